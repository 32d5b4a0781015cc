"""Dense exact linear algebra over Q (small systems only)."""
from __future__ import annotations

from fractions import Fraction


class ExactSolver:
    """Row-reduce ``A`` once, then solve ``A x = b`` for many right-hand sides.

    ``A`` is given as a list of rows.  Solving returns ``None`` when the system
    is inconsistent; free variables (rank deficiency) are set to zero.
    """

    def __init__(self, rows: list[list]):
        self.m = len(rows)
        self.n = len(rows[0]) if rows else 0
        # augment with the identity to record the row operations
        aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(self.m)]
               for i, row in enumerate(rows)]
        pivots = []
        r = 0
        for col in range(self.n):
            piv = next((i for i in range(r, self.m) if aug[i][col] != 0), None)
            if piv is None:
                continue
            aug[r], aug[piv] = aug[piv], aug[r]
            inv = 1 / aug[r][col]
            aug[r] = [x * inv for x in aug[r]]
            for i in range(self.m):
                if i != r and aug[i][col] != 0:
                    f = aug[i][col]
                    row_r = aug[r]
                    aug[i] = [a - f * b for a, b in zip(aug[i], row_r)]
            pivots.append(col)
            r += 1
            if r == self.m:
                break
        self.rank = r
        self.pivots = pivots
        self.transform = [row[self.n:] for row in aug]

    @property
    def full_column_rank(self) -> bool:
        return self.rank == self.n

    def solve(self, b: list) -> list[Fraction] | None:
        tb = [sum((t * x for t, x in zip(row, b) if x), Fraction(0)) for row in self.transform]
        if any(tb[i] != 0 for i in range(self.rank, self.m)):
            return None
        x = [Fraction(0)] * self.n
        for i, col in enumerate(self.pivots):
            x[col] = tb[i]
        return x


def rank(rows: list[list]) -> int:
    """Rank of a rational matrix given by rows."""
    mat = [[Fraction(x) for x in row] for row in rows]
    if not mat:
        return 0
    m, n = len(mat), len(mat[0])
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if mat[i][col] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        for i in range(r + 1, m):
            if mat[i][col] != 0:
                f = mat[i][col] / mat[r][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        r += 1
        if r == m:
            break
    return r


def solve(rows: list[list], b: list) -> list[Fraction] | None:
    return ExactSolver(rows).solve(b)


def inverse(rows: list[list]) -> list[list[Fraction]]:
    solver = ExactSolver(rows)
    if solver.rank != solver.m or solver.m != solver.n:
        raise ZeroDivisionError("matrix is singular")
    # transform * A = I with pivots in natural order
    return solver.transform

import json
import subprocess
import sys

import pytest

from qkdv import cli
from qkdv.errors import DegenerateSpectrum


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("QKDV_CACHE", str(tmp_path / "cache.json"))
    return tmp_path / "cache.json"


def test_density_examples(capsys):
    assert run(capsys, "density", "kdv", "0") == (0, "u0^2/2 - 1/24 + (eps/24) u2\n", "")
    assert run(capsys, "density", "kdv", "-1")[1] == "u0\n"
    code, out, _ = run(capsys, "density", "ilw", "1", "--genus", "2", "--source")
    assert code == 0 and "eps^2*mu" in out and "eps^3" not in out


def test_density_specializations(capsys):
    _, out, _ = run(capsys, "density", "kdv", "0", "--eps", "0")
    assert out == "u0^2/2 - 1/24\n"
    _, out, _ = run(capsys, "density", "ilw", "1", "--mu", "0")
    _, kdv, _ = run(capsys, "density", "kdv", "1")
    assert out == kdv


def test_density_json_is_canonical(capsys):
    _, a, _ = run(capsys, "density", "kdv", "3", "--json")
    _, b, _ = run(capsys, "--json", "density", "kdv", "3")
    assert a == b
    data = json.loads(a)
    assert json.dumps(data, sort_keys=True) == a.strip()


def test_verify_table(capsys):
    code, out, _ = run(capsys, "verify", "kdv", "2")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 5 and all(l.startswith("PASS") for l in lines)
    assert "(1/240*eps^2)*G6 + (1/12 - 1/12*c*eps)*G4 + (1/2)*G2^2" in lines[-1]


def test_verify_single_and_ilw(capsys):
    code, out, _ = run(capsys, "verify", "kdv", "-2")
    assert code == 0 and out.split()[-1] == "1" and "weight=0" in out
    code, out, _ = run(capsys, "verify", "ilw", "1", "--genus", "2")
    assert code == 0 and "k=1   weight=3" in out


def test_verify_failure_exit_code(capsys):
    code, out, _ = run(capsys, "verify", "kdv", "3", "--from", "3", "--qorder", "4")
    assert code == 1 and out.startswith("FAIL")


def test_verify_json(capsys):
    code, out, _ = run(capsys, "verify", "kdv", "1", "--from", "0", "--json")
    data = json.loads(out)
    assert code == 0 and data["ok"]
    assert [r["input"]["k"] for r in data["reports"]] == [0, 1]


def test_matrix_and_eigenvalues(capsys):
    code, out, _ = run(capsys, "matrix", "1", "0")
    assert code == 0 and len(out.strip().splitlines()) == 2
    code, out, _ = run(capsys, "eigenvalues", "0", "3", "--order", "2")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 3
    assert all(l.endswith("71/24 + 1/2*c^2") for l in lines)
    _, out, _ = run(capsys, "eigenvalues", "1", "2", "--order", "0")
    assert out == "s(2): 1 + 47/24*c + 1/6*c^3\ns(1,1): -1 + 47/24*c + 1/6*c^3\n"


def test_rational_c(capsys):
    _, out, _ = run(capsys, "matrix", "0", "2", "--c", "1/2")
    assert "25/12" in out and "c" not in out.split("|")[1]
    _, out, _ = run(capsys, "recognize", "kdv", "0", "--c", "0")
    assert out == "G2\n"


def test_degenerate_spectrum_surfaced(capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise DegenerateSpectrum("coincide", pair=((2, 1), (3,)))
    monkeypatch.setattr(cli, "perturbative_eigenvalues", boom)
    code, _, err = run(capsys, "eigenvalues", "1", "3")
    assert code == 1 and "[2, 1]" in err and "[3]" in err


def test_cache_cycle(capsys, isolated_cache):
    assert run(capsys, "cache", "build", "kdv", "6")[0] == 0
    first = isolated_cache.read_bytes()
    assert run(capsys, "cache", "validate")[0] == 0
    assert run(capsys, "cache", "build", "kdv", "6")[0] == 0
    assert isolated_cache.read_bytes() == first
    # tamper with one coefficient
    data = json.loads(first)
    data["tables"][0]["densities"][-1]["density"][0]["scalar"][0]["re"] = "3/7"
    isolated_cache.write_text(json.dumps(data))
    code, out, _ = run(capsys, "cache", "validate")
    assert code == 1 and out.startswith("FAIL")
    assert run(capsys, "cache", "clear")[0] == 0
    assert not isolated_cache.exists()
    assert run(capsys, "cache", "validate")[0] == 2


def test_cache_used_by_density(capsys, isolated_cache):
    run(capsys, "cache", "build", "kdv", "4")
    _, out, _ = run(capsys, "--cache", str(isolated_cache), "density", "kdv", "2")
    assert out.startswith("u0^4/24")


def test_cache_unreadable(capsys, isolated_cache):
    isolated_cache.write_text("{not json")
    assert run(capsys, "cache", "validate")[0] == 2


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["density", "foo", "1"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["--qorder", "0", "qseries", "kdv", "0"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["matrix", "0", "2", "--c", "abc"])
    assert info.value.code == 2
    assert run(capsys, "density", "kdv", "-3")[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qkdv", "density", "kdv", "-1"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "u0\n"

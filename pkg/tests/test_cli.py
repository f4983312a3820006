import json
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bohrgcd.cli import main
from bohrgcd.coppersmith import AgcdInstance, Planted, generate_instance
from bohrgcd.core import DomainError, Stream
from bohrgcd.records import (
    SCHEMA_LINE,
    dumps_instance,
    format_csv,
    instance_from_dict,
    load_instance,
    read_csv,
    save_instance,
)

TOY = {"a0": "10403", "a": ["5052"], "X": ["3"], "beta": "49/100", "planted": None}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(8, 40))
def test_instance_roundtrip(seed, m, bits):
    inst = generate_instance(bits, m, 5, Fraction(1, 2), Stream(seed))
    assert instance_from_dict(json.loads(dumps_instance(inst))) == inst


def test_instance_file_format(tmp_path):
    inst = AgcdInstance(10403, (5052,), (3,), Fraction(2, 4), Planted(101, 103, (50,), (2,)))
    path = tmp_path / "i.json"
    save_instance(path, inst)
    d = json.loads(path.read_text())
    assert d["beta"] == "1/2" and d["a0"] == "10403" and d["planted"]["r"] == ["2"]
    assert load_instance(path) == inst


def test_instance_load_rechecks_plant(tmp_path):
    bad = {**TOY, "planted": {"p": "101", "q": "103", "b": ["50"], "r": ["1"]}}
    with pytest.raises(DomainError):
        instance_from_dict(bad)
    with pytest.raises(DomainError):
        instance_from_dict({**TOY, "a0": 10403})
    with pytest.raises(OSError, match="missing.json"):
        load_instance(tmp_path / "missing.json")


def test_csv_schema():
    text = format_csv(("q", "r", "rate"), [{"q": 5, "r": (1, -2), "rate": Fraction(3, 6)}])
    assert text.splitlines()[0] == SCHEMA_LINE
    assert read_csv(text) == [{"q": "5", "r": "1 -2", "rate": "1/2"}]


def test_gen_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(capsys, "gen", "--bits", "10", "--m", "1", "--H", "3", "--beta", "1/2", "--seed", "42", "--out", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    inst = load_instance(a)
    assert inst.common_divisor(inst.planted.r) >= inst.planted.p


def test_gen_warns_outside_regime(capsys):
    code, out, err = run(capsys, "gen", "--bits", "20", "--m", "2", "--H", "100000")
    assert code == 0 and "warning" in err and "1 - 1/(m+1)" in err
    code, out, err = run(capsys, "gen", "--bits", "20", "--m", "2", "--H", "3")
    assert "warning" not in err


def test_solve_toy(tmp_path, capsys):
    path = tmp_path / "toy.json"
    path.write_text(json.dumps(TOY))
    code, out, _ = run(capsys, "solve", str(path))
    assert code == 0
    assert json.loads(out)["roots"] == [["2"]]
    assert "timings_ms" not in json.loads(out)
    code, out, _ = run(capsys, "solve", str(path), "--timings")
    assert "timings_ms" in json.loads(out)


def test_solve_infeasible_exit_code(tmp_path, capsys):
    path = tmp_path / "wide.json"
    path.write_text(json.dumps({**TOY, "X": ["5000"]}))
    code, _, err = run(capsys, "solve", str(path))
    assert code == 2 and "margin" in err


def test_solve_missing_file(capsys):
    code, _, err = run(capsys, "solve", "/nonexistent/x.json")
    assert code == 1 and "/nonexistent/x.json" in err


def test_solve_batch_jobs_identical(tmp_path, capsys):
    outs = []
    for jobs in ("1", "3"):
        out = tmp_path / f"r{jobs}.json"
        code, _, err = run(capsys, "solve", "--trials", "6", "--bits", "30", "--h-exp", "1/5", "--h-base", "a0",
                           "--seed", "4", "--jobs", jobs, "--out", str(out), "--csv", str(out) + ".csv")
        assert code == 0 and "recovered 6/6" in err
        outs.append((out.read_bytes(), (tmp_path / f"r{jobs}.json.csv").read_bytes()))
    assert outs[0] == outs[1]


def test_bohr_u_fixture(capsys):
    code, out, _ = run(capsys, "bohr", "u", "--q", "5")
    rows = read_csv(out)
    assert code == 0 and rows[0]["count"] == "2" and rows[0]["mode"] == "exact"


def test_bohr_cap_and_sampling(capsys):
    code, _, err = run(capsys, "bohr", "u", "--q", "10007")
    assert code == 3 and "cap" in err
    code, out, _ = run(capsys, "bohr", "u", "--q", "10007", "--sample", "100")
    row = read_csv(out)[0]
    assert code == 0 and row["mode"] == "sampled" and row["stderr"] != ""


def test_bohr_cap_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("BOHRGCD_CENSUS_CAP", "100")
    assert run(capsys, "bohr", "u", "--q", "101")[0] == 3


def test_bohr_prime_sweep_diagnostic(capsys):
    code, out, err = run(capsys, "bohr", "u", "--q-min", "100", "--q-max", "200", "--h", "2,3,4")
    assert code == 0 and "diagnostic" in err
    assert [int(r["q"]) for r in read_csv(out)][:3] == [101, 103, 107]


def test_bohr_agcd_and_reduction(capsys):
    code, out, _ = run(capsys, "bohr", "agcd", "--q", "13", "--m", "1", "--t", "2", "--r", "2")
    assert code == 0 and read_csv(out)[0]["count_U"] == "144"
    code, out, _ = run(capsys, "bohr", "reduction", "--q", "13,17", "--r", "2")
    assert code == 0 and [r["c_min"] for r in read_csv(out)] == ["1", "1"]
    code, _, _ = run(capsys, "bohr", "agcd", "--q", "1009", "--m", "2")
    assert code == 3


@pytest.mark.parametrize("suite", ["dual", "charsum"])
def test_verify(suite, capsys):
    code, out, _ = run(capsys, "verify", suite)
    summary = json.loads(out)
    assert code == 0 and summary["passed"] and summary["suite"] == suite


def test_sweeps_independent_of_jobs(capsys):
    args = ["sweep", "moment", "--q-min", "100", "--q-max", "160"]
    a = run(capsys, *args, "--jobs", "1")[1]
    b = run(capsys, *args, "--jobs", "2")[1]
    assert a == b and a.startswith(SCHEMA_LINE)
    a = run(capsys, "sweep", "shape", "--q", "101,103", "--jobs", "1")[1]
    b = run(capsys, "sweep", "shape", "--q", "101,103", "--jobs", "2")[1]
    assert a == b


def test_sweep_agcd(capsys):
    code, out, _ = run(capsys, "sweep", "agcd", "--bits", "24", "--h-exps", "1/10,1/5", "--trials", "2")
    rows = read_csv(out)
    assert code == 0 and [r["h_exp"] for r in rows] == ["1/10", "1/5"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "bohrgcd", "bohr", "u", "--q", "5"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith(SCHEMA_LINE)

import json

import pytest

from bitree import cli, reports, suites


def run(capsys, *args):
    code = cli.main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_selfcheck_exit_zero(capsys):
    code, out, _ = run(capsys, "selfcheck", "--max-depth", "2", "--seed", "7", "--trials", "50")
    data = json.loads(out)
    assert code == 0 and data["schema"] == 1 and data["pass"] is True
    assert data["config"]["seed"] == 7


def test_counterexample_report(capsys):
    code, out, _ = run(capsys, "counterexample", "--M", "5", "--delta", "1")
    row = json.loads(out)["rows"][0]
    assert code == 0 and row["V_at_omega0"] >= 0.125


def test_counterexample_range_csv(capsys):
    code, out, _ = run(capsys, "counterexample", "--M", "5:7", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("M,N,delta,V_at_omega0")
    assert [ln.split(",")[0] for ln in lines[1:]] == ["5", "6", "7"]


def test_majorant_sweep(capsys):
    code, out, _ = run(capsys, "majorant", "--trials", "40", "--depth", "4", "--seed", "1")
    data = json.loads(out)
    assert code == 0 and data["worst_energy_ratio"] <= 36
    assert len(data["cases"]) == 40


def test_potential_and_scaling(capsys):
    code, out, _ = run(capsys, "potential", "--depth", "2", "--depth2", "3", "--kind", "diagonal")
    assert code == 0 and json.loads(out)["depths"] == [2, 3]
    code, out, _ = run(capsys, "scaling", "--depth", "3", "--trials", "1", "--tau", "0.5")
    assert code == 0 and json.loads(out)["taus"] == [0.5]
    code, out, _ = run(capsys, "scaling", "--depth", "2", "--trials", "1", "--ladder", "1:10:5", "--format", "csv")
    assert code == 0 and out.startswith("mu_id,delta,energy_delta")


def test_capacity_command(capsys):
    code, out, _ = run(capsys, "capacity", "--trials", "20", "--lambda", "5")
    data = json.loads(out)
    assert code == 0 and data["cap_root"] == pytest.approx(1) and data["non_increasing"]


@pytest.mark.parametrize("args", [
    ["counterexample", "--M", "1"],
    ["counterexample", "--M", "7:5"],
    ["scaling", "--tau", "1.5"],
    ["scaling", "--ladder", "1:2"],
    ["selfcheck", "--max-depth", "5"],
    ["capacity", "--M", "6"],
    ["nonsense"],
    [],
])
def test_usage_errors_exit_two(capsys, args):
    assert cli.main(args) == 2


def test_thread_env_validated(capsys, monkeypatch):
    monkeypatch.setenv(suites.THREADS_ENV, "zero")
    assert cli.main(["counterexample", "--M", "5"]) == 2


def test_certificate_failure_exits_one(capsys, monkeypatch):
    def failing(a):
        return {"pass": False, "failing": {"name": "x"}}, (["a"], [])
    monkeypatch.setitem(cli.COMMANDS, "selfcheck", failing)
    code, out, _ = run(capsys, "selfcheck")
    assert code == 1 and json.loads(out)["failing"] == {"name": "x"}


def test_out_file_and_meta(tmp_path, capsys):
    out = tmp_path / "sub" / "report.json"
    code = cli.main(["counterexample", "--M", "5", "--out", str(out)])
    assert code == 0 and out.exists()
    meta = json.loads(reports.meta_path(out).read_text())
    assert "timestamp" in meta and meta["seed"] == 0
    assert "timestamp" not in out.read_text()
    assert not list(out.parent.glob(".report.json.*"))


def test_threads_do_not_change_payload(tmp_path, monkeypatch):
    paths = []
    for n in ("1", "4"):
        monkeypatch.setenv(suites.THREADS_ENV, n)
        p = tmp_path / f"m{n}.json"
        assert cli.main(["majorant", "--trials", "30", "--seed", "5", "--out", str(p)]) == 0
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_write_atomic_replaces(tmp_path):
    p = tmp_path / "x.txt"
    reports.write_atomic(p, "a")
    reports.write_atomic(p, "b")
    assert p.read_text() == "b"


def test_csv_dump_uses_repr_for_floats():
    text = reports.dumps_csv(["x"], [[0.1], [1]])
    assert text == "x\n0.1\n1\n"

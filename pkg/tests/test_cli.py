import json

import pytest

from koszul_lab.cli import Check, ScenarioConfig, exit_code, main, render, run


def call(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_algebra_scenario_passes(capsys):
    code, out, _ = call(capsys, "check", "--scenario", "algebra", "--u", "1", "--v", "1",
                        "--max-z-degree", "2", "--max-degree", "4", "--output", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "koszul-lab/1"
    assert doc["verdict"] == "pass"
    assert [c["check"] for c in doc["checks"]] == ["dg_soundness", "cohomology_model", "Z_koszul_algebra"]
    assert all("seconds" not in c for c in doc["checks"])


def test_timings_flag(capsys):
    code, out, _ = call(capsys, "check", "--scenario", "algebra", "--u", "1", "--output", "json",
                        "--timings")
    assert code == 0
    assert all("seconds" in c for c in json.loads(out)["checks"])


def test_config_errors_exit_2(capsys):
    code, _, err = call(capsys, "check", "--u", "1", "--v", "2")
    assert code == 2
    assert "v must not exceed u (got v=2, u=1)" in err
    code, _, _ = call(capsys, "check", "--u", "1", "--scenario", "nonsense")
    assert code == 2


def test_config_file(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text("# small run\nu = 1\nv=1\nmax-z-degree=1\nscenario=algebra\noutput=csv\n")
    code, out, _ = call(capsys, "check", "--config", str(path))
    assert code == 0
    assert out.splitlines()[0] == "check,kind,verdict"
    path.write_text("bogus=3\n")
    code, _, err = call(capsys, "check", "--config", str(path))
    assert code == 2 and "unknown key" in err


def test_exit_code_precedence():
    ok = Check("a", True, "certification")
    cert = Check("b", False, "certification")
    cons = Check("c", False, "consistency")
    assert exit_code([ok]) == 0
    assert exit_code([ok, cert]) == 1
    assert exit_code([cert, cons]) == 3
    cfg = ScenarioConfig()
    assert "fail" in render(cfg, [cert], 1, fmt="csv")


def test_dump_basis(capsys):
    code, out, _ = call(capsys, "dump", "basis", "--u", "1", "--v", "1", "--max-z-degree", "2")
    assert code == 0
    lines = out.splitlines()
    # three functions and three log 1-forms
    assert len(lines) == 6
    assert lines[3] == "1\t(0)\tz^(0) ^ dlog z_1 @factor 1"


def test_dump_tor_golden(capsys):
    _, out, _ = call(capsys, "dump", "tor", "--u", "2", "--max-degree", "3")
    assert out == "i,j,dim\n0,0,1\n1,1,2\n2,2,3\n3,3,4\n"
    _, out, _ = call(capsys, "dump", "tor", "--target", "truncated-poly", "--max-degree", "4")
    assert out == "i,j,dim\n0,0,1\n1,1,1\n2,3,1\n3,4,1\n"


def test_dump_dual_golden(capsys):
    _, out, _ = call(capsys, "dump", "dual", "--u", "1", "--v", "1", "--max-z-degree", "2",
                     "--max-degree", "2")
    assert out == "tuple,dim\n1,3\n1.1,9\n2,9\n"


def test_bad_dump_choice():
    with pytest.raises(SystemExit) as e:
        main(["dump", "quasi"])
    assert e.value.code == 2


def test_output_is_identical_across_worker_counts():
    base = dict(u=1, v=1, D=2, N=4, m_max=3, scenario="quasi", output="json")
    c1, t1 = run(ScenarioConfig(jobs=1, **base))
    c8, t8 = run(ScenarioConfig(jobs=8, **base))
    assert c1 == c8 == 0
    assert t1 == t8


def test_jobs_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("KOSZUL_LAB_JOBS", "2")
    code, out, _ = call(capsys, "check", "--scenario", "algebra", "--u", "1", "--output", "json")
    assert code == 0
    assert "jobs" not in json.loads(out)["config"]

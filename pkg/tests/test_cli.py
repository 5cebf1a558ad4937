import json
import subprocess
import sys

import pytest

from rgw import cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_binary(capsys):
    code, out, _ = run(["analyze", "--law", "0,0,1", "--q", "0.3"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["m_nu_q"] == pytest.approx(2.0) and doc["lambda1"] == pytest.approx(2.0)
    assert doc["survival_sum"] == pytest.approx(3.5)


def test_analyze_writes_file(tmp_path, capsys):
    code, out, _ = run(["analyze", "--nu-p", "0.05", "--q", "0.1", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert json.loads((tmp_path / "analysis.json").read_text()) == json.loads(out)


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "--law", "0.5,0.6", "--q", "0.3"],
        ["analyze", "--law", "0,0,1", "--q", "1.5"],
        ["analyze", "--law", "1,0,0.0", "--q", "0.3"],
        ["analyze", "--law", "0,0,1", "--nu-p", "0.1"],
        ["simulate", "--law", "0,0,1", "--q", "0.3"],
        ["spine", "--law", "0,0,1", "--q", "0.3"],
        ["simulate", "--law", "0,0.5,0.5", "--q", "0.3", "--seed", "1", "--start", "p_ell:7"],
    ],
)
def test_invalid_input_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and "error" in err


def test_numeric_failure_exit_3(monkeypatch, capsys):
    from rgw.errors import NoConvergence

    def boom(*a, **k):
        raise NoConvergence("forced")

    monkeypatch.setattr(cli.analytic, "classify_regime", boom)
    code, _, err = run(["analyze", "--law", "0,0,1", "--q", "0.3"], capsys)
    assert code == 3 and "forced" in err


def test_verify_failure_exit_4(monkeypatch, tmp_path, capsys):
    from rgw import acceptance

    monkeypatch.setattr(acceptance, "run_suite", lambda *a, **k: [acceptance.CriterionResult(1, "x", False, "")])
    monkeypatch.setattr(acceptance, "write_artifacts", lambda *a, **k: [])
    code, out, _ = run(["verify", "--out", str(tmp_path)], capsys)
    assert code == 4 and "failed: [1]" in out


def test_simulate_outputs_byte_identical(tmp_path, capsys):
    args = ["simulate", "--law", "0,0.5,0.5", "--q", "0.3", "--horizon", "5", "--replicas", "40", "--seed", "3"]
    assert run(args + ["--out", str(tmp_path / "a")], capsys)[0] == 0
    assert run(args + ["--out", str(tmp_path / "b"), "--jobs", "2"], capsys)[0] == 0
    for name in ("trajectories.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    doc = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert doc["survival_p_hat"] == 1.0


def test_spine_outputs(tmp_path, capsys):
    code, out, _ = run(["spine", "--law", "0,0.5,0.5", "--q", "0.3", "--steps", "2000", "--paths", "5",
                        "--seed", "1", "--out", str(tmp_path)], capsys)
    assert code == 0
    doc = json.loads((tmp_path / "spine.json").read_text())
    assert doc["fluctuation"]["regime"] == "light" and doc["perpetuity_converged"]
    assert (tmp_path / "urn.csv").read_text().startswith("n,xi,N_1,N_2,phi,phi_sum\n")


def test_phase_outputs(tmp_path, capsys):
    code, out, _ = run(["phase-diagram", "--resolution", "10,10", "--out", str(tmp_path)], capsys)
    assert code == 0
    for name in ("phase_grid.csv", "phase_curves.csv", "phase_diagram.svg"):
        assert (tmp_path / name).exists()


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "exp.yaml"
    cfg.write_text("law: {preset: nu_p, p: 0.05}\nq: 0.1\nhorizon: 4\nreplicas: 20\nseed: 2\n"
                   f"out: {tmp_path / 'o'}\n")
    assert run(["simulate", "--config", str(cfg)], capsys)[0] == 0
    assert (tmp_path / "o" / "summary.json").exists()
    cfg.write_text("q: 0.1\nbogus: 1\n")
    code, _, err = run(["analyze", "--config", str(cfg)], capsys)
    assert code == 2 and "bogus" in err


def test_verify_quick_subset(tmp_path, capsys):
    code, out, _ = run(["verify", "--quick", "--only", "1,3,13", "--out", str(tmp_path)], capsys)
    assert code == 0 and "3/3 criteria passed" in out
    assert len((tmp_path / "acceptance.csv").read_text().splitlines()) == 4
    assert (tmp_path / "artifacts").is_dir()


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "rgw.cli", "analyze", "--law", "0,0,1", "--q", "0.5"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["m_star"] == pytest.approx(2.0)

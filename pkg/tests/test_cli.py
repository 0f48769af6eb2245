import subprocess
import sys

import pytest

from adaptalloc.cli import main


def _invoke(argv):
    """Exit status of the CLI, whether returned or raised by the parser."""
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


def test_short_run_writes_outputs(tmp_path, capsys):
    code = _invoke(["run", "--duration", "0.5", "--out", str(tmp_path)])
    assert code == 0
    for name in ("run.csv", "metrics.csv", "inputs.png", "pitch.png", "tracking_error.png", "parameter_error.png"):
        assert (tmp_path / name).stat().st_size > 0
    assert len((tmp_path / "run.csv").read_text().splitlines()) == 52
    assert "epsilon=0.2 ok" in capsys.readouterr().out


def test_no_plots_skips_figures(tmp_path):
    assert _invoke(["run", "--duration", "0.1", "--no-plots", "--out", str(tmp_path)]) == 0
    assert not list(tmp_path.glob("*.png"))


def test_overrides_reach_the_run(tmp_path):
    assert _invoke(["run", "--duration", "0.1", "--dt", "0.02", "--eps", "0.25", "--no-plots", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "run.csv").read_text().splitlines()
    assert len(lines) == 7
    assert (tmp_path / "metrics.csv").read_text().splitlines()[1].startswith("0.25,")


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("plant: quadrotor\nduration: 0.2\nparam_scale: 1.2\n")
    assert _invoke(["run", "--config", str(cfg), "--no-plots", "--out", str(tmp_path / "o")]) == 0
    header = (tmp_path / "o" / "run.csv").read_text().splitlines()[0]
    assert "u3" in header


def test_diverged_run_exits_2(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("duration: 1.0\ninitial_error: [0.0, 1.0, 0.0, 0.0]\ndivergence_threshold: 0.5\n")
    assert _invoke(["run", "--config", str(cfg), "--no-plots", "--out", str(tmp_path)]) == 2
    assert (tmp_path / "run.csv").exists()


def test_sweep_writes_table_and_figure(tmp_path, capsys):
    code = _invoke(["sweep", "--eps", "0.3", "0.2", "--duration", "0.5", "--out", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "metrics.csv").read_text().splitlines()
    assert len(lines) == 3
    assert (tmp_path / "error_vs_epsilon.png").stat().st_size > 0
    assert capsys.readouterr().out.count("epsilon=") == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--eps", "3", "--duration", "0.1"],
        ["run", "--eps", "0", "--duration", "0.1"],
        ["run", "--dt", "-1"],
        ["run", "--config", "does-not-exist.yaml"],
        ["sweep", "--eps", "0.2", "0.5", "--duration", "0.1"],
        ["sweep", "--workers", "0", "--duration", "0.1"],
        ["fly"],
        [],
        ["run", "--duration", "soon"],
    ],
)
def test_usage_and_config_errors_exit_1(argv, tmp_path):
    assert _invoke(argv + ["--out", str(tmp_path)] if argv and argv[0] in ("run", "sweep") else argv) == 1


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "adaptalloc.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "run" in out.stdout and "sweep" in out.stdout

import math
import os

import numpy as np
import pytest

from fracwave.cli import main, parse_config
from fracwave.errors import ConfigurationError

MINIMAL = """
[domain]
x_min = 0
x_max = 1000
y_min = 0
y_max = 1000
dx = 100

[media]
c0 = 2000
q = 100
omega0 = 60

[time]
t_end = 2e-4

[solver]
mode = classical
"""

FIG3_STYLE = """
[domain]
kind = rectangle
x_min = 0
x_max = 1000
y_min = 0
y_max = 1000
dx = 100

[media]
c0 = 2000
q = 100
omega0 = 60

[source]
kind = ricker
f0 = 5
x = 500
y = 500

[time]
dt = 1e-4
t_end = 2e-3

[output]
snapshot_times = 2e-3
snapshot_nx = 11
snapshot_ny = 11
receivers = 750:500
"""


def _write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestParseConfig:
    def test_minimal_defaults_applied(self, tmp_path):
        cfg = parse_config(_write(tmp_path, MINIMAL))
        assert cfg.dt == 1e-7
        assert cfg.h == 1.0
        assert cfg.n_theta == 20
        assert cfg.shape == 0.0           # resolves to dx downstream
        assert ("time", "dt") in cfg.defaults_applied
        assert ("operator", "h") in cfg.defaults_applied
        assert cfg.mode == "classical"

    def test_point_source_scenario(self, tmp_path):
        cfg = parse_config(_write(tmp_path, FIG3_STYLE))
        assert cfg.source_kind == "ricker"
        assert cfg.f0 == 5.0
        assert (cfg.source_x, cfg.source_y) == (500.0, 500.0)
        assert cfg.c0 == 2000.0 and cfg.q == 100.0
        assert cfg.receivers == ((750.0, 500.0),)

    def test_snapshot_time_beyond_t_end(self, tmp_path):
        bad = MINIMAL + "\n[output]\nsnapshot_times = 1.0\n"
        with pytest.raises(ConfigurationError):
            parse_config(_write(tmp_path, bad))

    def test_unknown_key_with_line_number(self, tmp_path):
        bad = MINIMAL.replace("dx = 100", "dx = 100\nwhatever = 3")
        with pytest.raises(ConfigurationError) as err:
            parse_config(_write(tmp_path, bad))
        assert "whatever" in str(err.value)
        assert ":" in str(err.value)

    def test_unknown_section(self, tmp_path):
        with pytest.raises(ConfigurationError):
            parse_config(_write(tmp_path, MINIMAL + "\n[bogus]\nkey = 1\n"))

    def test_duplicate_key(self, tmp_path):
        with pytest.raises(ConfigurationError):
            parse_config(_write(tmp_path, MINIMAL + "\n[time]\nt_end = 3\n"))

    def test_missing_required(self, tmp_path):
        with pytest.raises(ConfigurationError):
            parse_config(_write(tmp_path, "[domain]\ndx = 10\n"))

    def test_infinite_q(self, tmp_path):
        cfg = parse_config(_write(tmp_path, MINIMAL.replace("q = 100", "q = inf")))
        assert cfg.q == math.inf

    def test_missing_polygon_file(self, tmp_path):
        bad = MINIMAL.replace("x_min = 0", "kind = polygon\nfile = nope.txt") \
            .replace("x_max = 1000", "").replace("y_min = 0", "") \
            .replace("y_max = 1000", "")
        with pytest.raises(ConfigurationError):
            parse_config(_write(tmp_path, bad))


class TestMainRun:
    def test_zero_source_run_exit_zero(self, tmp_path, capsys):
        cfg = _write(tmp_path, MINIMAL + "\n[output]\nsnapshot_times = 2e-4\n"
                     "snapshot_nx = 11\nsnapshot_ny = 11\n")
        out = str(tmp_path / "out")
        assert main(["run", "--config", cfg, "--out", out]) == 0
        snap = np.loadtxt(os.path.join(out, "snap_0.2ms.csv"),
                          delimiter=",", skiprows=1)
        assert np.all(snap[:, 2] == 0.0)
        assert os.path.exists(os.path.join(out, "manifest.txt"))
        assert os.path.exists(os.path.join(out, "trace.csv"))

    def test_config_error_exit_two(self, tmp_path, capsys):
        cfg = _write(tmp_path, MINIMAL + "\n[output]\nsnapshot_times = 99\n")
        code = main(["run", "--config", cfg, "--out", str(tmp_path / "o")])
        assert code == 2
        err = capsys.readouterr().err
        assert "fracwave: error code=2" in err

    def test_missing_config_exit_two(self, tmp_path, capsys):
        code = main(["run", "--config", str(tmp_path / "nope.cfg")])
        assert code == 2

    def test_instability_exit_three(self, tmp_path, capsys):
        unstable = MINIMAL.replace("t_end = 2e-4", "dt = 1.0\nt_end = 150") + (
            "\n[source]\nkind = ricker\nf0 = 0.01\nx = 500\ny = 500\n")
        cfg = _write(tmp_path, unstable)
        out = str(tmp_path / "out3")
        code = main(["run", "--config", cfg, "--out", out])
        assert code == 3
        assert "code=3" in capsys.readouterr().err
        # the partial outputs, including the last finite snapshot, were saved
        snaps = [f for f in os.listdir(out) if f.startswith("snap_")]
        assert len(snaps) >= 1

    def test_io_error_exit_four(self, tmp_path, capsys):
        cfg = _write(tmp_path, MINIMAL)
        blocker = tmp_path / "blocker"
        blocker.write_text("a file, not a directory")
        code = main(["run", "--config", cfg, "--out", str(blocker)])
        assert code == 4


class TestManifest:
    def test_manifest_is_valid_config_and_complete(self, tmp_path):
        cfg_path = _write(tmp_path, FIG3_STYLE)
        out = str(tmp_path / "out")
        assert main(["run", "--config", cfg_path, "--out", out]) == 0
        manifest = os.path.join(out, "manifest.txt")
        cfg1 = parse_config(cfg_path)
        cfg2 = parse_config(manifest)
        for name in ("dx", "c0", "q", "omega0", "dt", "t_end", "h", "n_theta",
                     "snapshot_times", "receivers", "mode", "solver", "f0"):
            assert getattr(cfg1, name) == getattr(cfg2, name), name

    def test_defaults_marked(self, tmp_path):
        cfg_path = _write(tmp_path, MINIMAL)
        out = str(tmp_path / "out")
        assert main(["run", "--config", cfg_path, "--out", out]) == 0
        text = open(os.path.join(out, "manifest.txt")).read()
        assert "dt = 1e-07  # (default)" in text
        assert "h = 1.0  # (default)" in text
        assert "n_theta = 20  # (default)" in text

    def test_rerun_from_manifest_bit_identical(self, tmp_path):
        cfg_path = _write(tmp_path, FIG3_STYLE)
        out1 = tmp_path / "out1"
        out2 = tmp_path / "out2"
        assert main(["run", "--config", cfg_path, "--out", str(out1)]) == 0
        assert main(["run", "--config", str(out1 / "manifest.txt"),
                     "--out", str(out2)]) == 0
        for name in ("snap_2ms.csv", "trace.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


class TestStudyAndValidate:
    def test_study_csv_rows(self, tmp_path):
        cfg = _write(tmp_path, MINIMAL + "\n[study]\npoint_counts = 16, 36\n")
        out = str(tmp_path / "study_out")
        assert main(["study", "--config", cfg, "--out", out]) == 0
        lines = open(os.path.join(out, "study.csv")).read().strip().splitlines()
        assert len(lines) == 3      # header + one row per count
        assert os.path.exists(os.path.join(out, "study.txt"))

    def test_validate_runs(self, tmp_path, capsys):
        cfg = _write(tmp_path, MINIMAL + "\n[study]\nvalidate_points = 121\n")
        out = str(tmp_path / "val_out")
        assert main(["validate", "--config", cfg, "--out", out]) == 0
        assert "avg_rel" in capsys.readouterr().out
        assert os.path.exists(os.path.join(out, "validate.csv"))


class TestCompare:
    def test_compare_outputs(self, tmp_path):
        cfg = _write(tmp_path, FIG3_STYLE.replace("f0 = 5", "f0 = 0.004"))
        out = tmp_path / "cmp"
        assert main(["compare", "--config", cfg, "--out", str(out)]) == 0
        assert (out / "compare_report.txt").exists()
        assert (out / "profile_2ms.csv").exists()
        assert (out / "rbf" / "snap_2ms.csv").exists()
        assert (out / "spectral" / "snap_2ms.csv").exists()
        header = (out / "profile_2ms.csv").read_text().splitlines()[0]
        assert header == "x,sigma_rbf,sigma_spectral"

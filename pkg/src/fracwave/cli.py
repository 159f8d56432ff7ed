"""Run orchestration: config parsing, scenario building, output writing.

Configs are line-oriented text: bracketed section headers, one "key = value"
per line, "#" comments, blank lines ignored. Unknown sections or keys are
errors, not warnings; every file referenced must exist at parse time. The
full grammar is documented in the README next to a worked example.

Every run writes a manifest (same grammar) recording all effective
parameters; values that came from defaults carry a trailing "# (default)"
marker. A manifest is itself a valid config, so any run can be reproduced
bit-identically by pointing the CLI at its manifest.

Exit codes: 0 success, 2 config error, 3 numerical failure (instability or
conditioning), 4 I/O error. Failures print one machine-parsable line to
stderr: "fracwave: error code=<code> kind=<ExceptionName>: <message>".
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field

from .errors import (ConditioningError, ConfigurationError, CoverageError,
                     DomainError, FracwaveError, InstabilityError)

__all__ = ["RunConfig", "parse_config", "main"]


_SCHEMA = {
    "domain": {"kind", "x_min", "x_max", "y_min", "y_max", "file", "dx"},
    "media": {"c0", "layers", "raster", "q", "omega0", "rho0"},
    "source": {"kind", "f0", "x", "y"},
    "force": {"kind"},
    "time": {"dt", "t_end"},
    "operator": {"h", "n_theta", "shape", "diagonal_shift"},
    "solver": {"kind", "mode", "spectral_nx", "spectral_ny"},
    "output": {"directory", "snapshot_times", "snapshot_nx", "snapshot_ny",
               "receivers"},
    "study": {"point_counts", "validate_points"},
}


@dataclass
class RunConfig:
    """Validated run parameters; defaults_applied lists (section, key) pairs."""

    domain_kind: str = "rectangle"
    x_min: float = 0.0
    x_max: float = 0.0
    y_min: float = 0.0
    y_max: float = 0.0
    polygon_file: str = ""
    dx: float = 0.0

    media_kind: str = "constant"
    c0: float = 0.0
    layers: tuple = ()
    raster_file: str = ""
    q: float = math.inf
    omega0: float = 0.0
    rho0: float = 1.0

    source_kind: str = "none"
    f0: float = 5.0
    source_x: float = 0.0
    source_y: float = 0.0

    force_kind: str = "none"

    dt: float = 1e-7
    t_end: float = 0.0

    h: float = 1.0
    n_theta: int = 20
    shape: float = 0.0          # 0 means "use dx"
    diagonal_shift: float = 0.0

    solver: str = "rbf"
    mode: str = "full"
    spectral_nx: int = 128
    spectral_ny: int = 128

    directory: str = "out"
    snapshot_times: tuple = ()
    snapshot_nx: int = 101
    snapshot_ny: int = 101
    receivers: tuple = ()

    point_counts: tuple = (121, 441, 961)
    validate_points: int = 441

    defaults_applied: set = field(default_factory=set)


def _read_sections(path):
    sections = {}
    current = None
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    for ln, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SCHEMA:
                raise ConfigurationError(f"{path}:{ln}: unknown section [{current}]")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{ln}: expected 'key = value', got {raw!r}")
        if current is None:
            raise ConfigurationError(f"{path}:{ln}: key outside any [section]")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA[current]:
            raise ConfigurationError(f"{path}:{ln}: unknown key '{key}' in [{current}]")
        if key in sections[current]:
            raise ConfigurationError(f"{path}:{ln}: duplicate key '{key}'")
        sections[current][key] = (value, ln)
    return sections


class _Extractor:
    def __init__(self, path, sections):
        self.path = path
        self.sections = sections
        self.defaults = set()

    def get(self, section, key, convert, default=None, required=False):
        entry = self.sections.get(section, {}).get(key)
        if entry is None:
            if required:
                raise ConfigurationError(
                    f"{self.path}: missing required key '{key}' in [{section}]")
            self.defaults.add((section, key))
            return default
        value, ln = entry
        try:
            return convert(value)
        except FracwaveError:
            raise
        except Exception as exc:
            raise ConfigurationError(
                f"{self.path}:{ln}: bad value for '{key}': {exc}") from exc

    def has(self, section, key):
        return key in self.sections.get(section, {})


def _float(v):
    if v.lower() in ("inf", "infinity"):
        return math.inf
    return float(v)


def _float_list(v):
    v = v.strip()
    return tuple(float(t) for t in v.split(",") if t.strip()) if v else ()


def _int_list(v):
    v = v.strip()
    return tuple(int(t) for t in v.split(",") if t.strip()) if v else ()


def _pairs(v):
    out = []
    for tok in v.split(","):
        tok = tok.strip()
        if not tok:
            continue
        parts = tok.split(":")
        if len(parts) != 2:
            raise ValueError(f"expected 'x:y', got {tok!r}")
        out.append((float(parts[0]), float(parts[1])))
    return tuple(out)


def _triples(v):
    out = []
    for tok in v.split(","):
        tok = tok.strip()
        if not tok:
            continue
        parts = tok.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected 'y_low:y_high:c0', got {tok!r}")
        out.append((float(parts[0]), float(parts[1]), float(parts[2])))
    return tuple(out)


def _choice(options):
    def convert(v):
        if v not in options:
            raise ValueError(f"expected one of {sorted(options)}, got {v!r}")
        return v
    return convert


def parse_config(path) -> RunConfig:
    """Parse and fully validate a config file, applying documented defaults."""
    sections = _read_sections(path)
    ex = _Extractor(path, sections)
    cfg = RunConfig()

    cfg.domain_kind = ex.get("domain", "kind", _choice({"rectangle", "polygon"}),
                             default="rectangle")
    if cfg.domain_kind == "rectangle":
        cfg.x_min = ex.get("domain", "x_min", _float, required=True)
        cfg.x_max = ex.get("domain", "x_max", _float, required=True)
        cfg.y_min = ex.get("domain", "y_min", _float, required=True)
        cfg.y_max = ex.get("domain", "y_max", _float, required=True)
        for bad in ("file",):
            if ex.has("domain", bad):
                raise ConfigurationError(f"{path}: '{bad}' is not valid for a rectangle")
    else:
        cfg.polygon_file = ex.get("domain", "file", str, required=True)
        if not os.path.exists(cfg.polygon_file):
            raise ConfigurationError(f"{path}: polygon file not found: {cfg.polygon_file}")
        for bad in ("x_min", "x_max", "y_min", "y_max"):
            if ex.has("domain", bad):
                raise ConfigurationError(f"{path}: '{bad}' is not valid for a polygon")
    cfg.dx = ex.get("domain", "dx", _float, required=True)
    if not cfg.dx > 0:
        raise ConfigurationError(f"{path}: dx must be positive")

    given = [k for k in ("c0", "layers", "raster") if ex.has("media", k)]
    if len(given) != 1:
        raise ConfigurationError(
            f"{path}: [media] needs exactly one of c0, layers, raster; got {given}")
    if given[0] == "c0":
        cfg.media_kind = "constant"
        cfg.c0 = ex.get("media", "c0", _float, required=True)
    elif given[0] == "layers":
        cfg.media_kind = "layered"
        cfg.layers = ex.get("media", "layers", _triples, required=True)
    else:
        cfg.media_kind = "raster"
        cfg.raster_file = ex.get("media", "raster", str, required=True)
        if not os.path.exists(cfg.raster_file):
            raise ConfigurationError(f"{path}: raster file not found: {cfg.raster_file}")
    cfg.q = ex.get("media", "q", _float, required=True)
    cfg.omega0 = ex.get("media", "omega0", _float, required=True)
    cfg.rho0 = ex.get("media", "rho0", _float, default=1.0)

    cfg.source_kind = ex.get("source", "kind", _choice({"none", "ricker"}),
                             default="none")
    if cfg.source_kind == "ricker":
        cfg.f0 = ex.get("source", "f0", _float, default=5.0)
        cfg.source_x = ex.get("source", "x", _float, required=True)
        cfg.source_y = ex.get("source", "y", _float, required=True)

    cfg.force_kind = ex.get("force", "kind", _choice({"none", "manufactured"}),
                            default="none")

    cfg.dt = ex.get("time", "dt", _float, default=1e-7)
    cfg.t_end = ex.get("time", "t_end", _float, required=True)
    if not (cfg.dt > 0 and cfg.t_end > 0):
        raise ConfigurationError(f"{path}: dt and t_end must be positive")

    cfg.h = ex.get("operator", "h", _float, default=1.0)
    cfg.n_theta = ex.get("operator", "n_theta", int, default=20)
    cfg.shape = ex.get("operator", "shape", _float, default=0.0)
    cfg.diagonal_shift = ex.get("operator", "diagonal_shift", _float, default=0.0)

    cfg.solver = ex.get("solver", "kind", _choice({"rbf", "spectral"}), default="rbf")
    cfg.mode = ex.get("solver", "mode",
                      _choice({"full", "attenuation", "dispersion", "classical"}),
                      default="full")
    cfg.spectral_nx = ex.get("solver", "spectral_nx", int, default=128)
    cfg.spectral_ny = ex.get("solver", "spectral_ny", int, default=128)

    cfg.directory = ex.get("output", "directory", str, default="out")
    cfg.snapshot_times = ex.get("output", "snapshot_times", _float_list, default=())
    cfg.snapshot_nx = ex.get("output", "snapshot_nx", int, default=101)
    cfg.snapshot_ny = ex.get("output", "snapshot_ny", int, default=101)
    cfg.receivers = ex.get("output", "receivers", _pairs, default=())

    cfg.point_counts = ex.get("study", "point_counts", _int_list,
                              default=(121, 441, 961))
    cfg.validate_points = ex.get("study", "validate_points", int, default=441)

    for t in cfg.snapshot_times:
        if not (0.0 <= t <= cfg.t_end):
            raise ConfigurationError(
                f"{path}: snapshot time {t} outside [0, t_end = {cfg.t_end}]")
    if cfg.force_kind == "manufactured":
        if cfg.domain_kind != "rectangle" or cfg.x_min != 0 or cfg.y_min != 0 \
                or cfg.x_max != cfg.y_max:
            raise ConfigurationError(
                f"{path}: manufactured force needs the square domain (0, L)^2")
        if cfg.media_kind != "constant":
            raise ConfigurationError(f"{path}: manufactured force needs a uniform medium")

    cfg.defaults_applied = ex.defaults
    return cfg


def _build_scenario(cfg: RunConfig):
    from . import harness
    from .geometry import Domain2D, read_polygon_file
    from .media import (MediumSpec, constant_velocity, layered_velocity,
                        read_velocity_raster)
    from .fraclap import FracOpConfig
    from .stepper import Scenario, SourceTerm

    if cfg.domain_kind == "rectangle":
        dom = Domain2D.rectangle(cfg.x_min, cfg.x_max, cfg.y_min, cfg.y_max)
    else:
        dom = read_polygon_file(cfg.polygon_file)

    if cfg.media_kind == "constant":
        vel = constant_velocity(cfg.c0)
    elif cfg.media_kind == "layered":
        vel = layered_velocity(cfg.layers)
    else:
        vel = read_velocity_raster(cfg.raster_file)
    cov = vel.coverage()
    if not (cov[0] <= dom.x_min and cov[1] >= dom.x_max
            and cov[2] <= dom.y_min and cov[3] >= dom.y_max):
        raise ConfigurationError("velocity field does not cover the domain bounding box")
    medium = MediumSpec(velocity=vel, q_factor=cfg.q, omega0=cfg.omega0, rho0=cfg.rho0)

    if cfg.force_kind == "manufactured":
        case = harness.ManufacturedCase(
            side=cfg.x_max, c0=cfg.c0, q_factor=cfg.q, omega0=cfg.omega0,
            dt=cfg.dt, t_end=cfg.t_end,
            solver_cfg=FracOpConfig(h=cfg.h, n_theta=cfg.n_theta),
            force_cfg=FracOpConfig(h=cfg.h / 2, n_theta=2 * cfg.n_theta))
        cache = {}

        def force(xs, ys, t):
            import numpy as np
            key = "spatial"
            if key not in cache:
                cache[key] = harness.force_spatial(case, np.column_stack([xs, ys]))
            return np.exp(-t) * cache[key]

        def initial(xs, ys):
            return harness.spatial_factor(case, xs, ys)

        source = SourceTerm(kind="force_function", force=force, initial=initial)
    elif cfg.source_kind == "ricker":
        source = SourceTerm(kind="initial_ricker", f0=cfg.f0,
                            x=cfg.source_x, y=cfg.source_y)
    else:
        source = SourceTerm(kind="none")

    return Scenario(
        domain=dom, dx=cfg.dx, medium=medium, source=source, dt=cfg.dt,
        t_end=cfg.t_end, op_cfg=FracOpConfig(h=cfg.h, n_theta=cfg.n_theta),
        mode=cfg.mode, shape=(cfg.shape if cfg.shape > 0 else None),
        diagonal_shift=cfg.diagonal_shift,
        snapshot_times=cfg.snapshot_times, snapshot_nx=cfg.snapshot_nx,
        snapshot_ny=cfg.snapshot_ny, receivers=cfg.receivers,
        spectral_nx=cfg.spectral_nx, spectral_ny=cfg.spectral_ny)


def _manifest_lines(cfg: RunConfig, threads):
    def mark(section, key, value):
        suffix = "  # (default)" if (section, key) in cfg.defaults_applied else ""
        return f"{key} = {value}{suffix}"

    def fnum(v):
        if v == math.inf:
            return "inf"
        return repr(float(v))

    lines = ["# fracwave run manifest: a valid config reproducing this run", ""]
    lines.append("[domain]")
    lines.append(mark("domain", "kind", cfg.domain_kind))
    if cfg.domain_kind == "rectangle":
        for key in ("x_min", "x_max", "y_min", "y_max"):
            lines.append(mark("domain", key, fnum(getattr(cfg, key))))
    else:
        lines.append(mark("domain", "file", cfg.polygon_file))
    lines.append(mark("domain", "dx", fnum(cfg.dx)))
    lines.append("")
    lines.append("[media]")
    if cfg.media_kind == "constant":
        lines.append(mark("media", "c0", fnum(cfg.c0)))
    elif cfg.media_kind == "layered":
        lines.append(mark("media", "layers",
                          ", ".join(f"{fnum(a)}:{fnum(b)}:{fnum(c)}" for a, b, c in cfg.layers)))
    else:
        lines.append(mark("media", "raster", cfg.raster_file))
    lines.append(mark("media", "q", fnum(cfg.q)))
    lines.append(mark("media", "omega0", fnum(cfg.omega0)))
    lines.append(mark("media", "rho0", fnum(cfg.rho0)))
    lines.append("")
    lines.append("[source]")
    lines.append(mark("source", "kind", cfg.source_kind))
    if cfg.source_kind == "ricker":
        lines.append(mark("source", "f0", fnum(cfg.f0)))
        lines.append(mark("source", "x", fnum(cfg.source_x)))
        lines.append(mark("source", "y", fnum(cfg.source_y)))
    lines.append("")
    lines.append("[force]")
    lines.append(mark("force", "kind", cfg.force_kind))
    lines.append("")
    lines.append("[time]")
    lines.append(mark("time", "dt", fnum(cfg.dt)))
    lines.append(mark("time", "t_end", fnum(cfg.t_end)))
    lines.append("")
    lines.append("[operator]")
    lines.append(mark("operator", "h", fnum(cfg.h)))
    lines.append(mark("operator", "n_theta", cfg.n_theta))
    shape_note = "  # (default)" if ("operator", "shape") in cfg.defaults_applied else ""
    shape_val = cfg.shape if cfg.shape > 0 else cfg.dx
    lines.append(f"shape = {fnum(shape_val)}{shape_note}")
    lines.append(mark("operator", "diagonal_shift", fnum(cfg.diagonal_shift)))
    lines.append("")
    lines.append("[solver]")
    lines.append(mark("solver", "kind", cfg.solver))
    lines.append(mark("solver", "mode", cfg.mode))
    lines.append(mark("solver", "spectral_nx", cfg.spectral_nx))
    lines.append(mark("solver", "spectral_ny", cfg.spectral_ny))
    lines.append("")
    lines.append("[output]")
    lines.append(mark("output", "directory", cfg.directory))
    lines.append(mark("output", "snapshot_times",
                      ", ".join(fnum(t) for t in cfg.snapshot_times)))
    lines.append(mark("output", "snapshot_nx", cfg.snapshot_nx))
    lines.append(mark("output", "snapshot_ny", cfg.snapshot_ny))
    lines.append(mark("output", "receivers",
                      ", ".join(f"{fnum(x)}:{fnum(y)}" for x, y in cfg.receivers)))
    lines.append("")
    lines.append("[study]")
    lines.append(mark("study", "point_counts", ", ".join(str(c) for c in cfg.point_counts)))
    lines.append(mark("study", "validate_points", cfg.validate_points))
    lines.append("")
    lines.append(f"# threads = {threads}")
    return lines


def _write_manifest(outdir, cfg, threads):
    path = os.path.join(outdir, "manifest.txt")
    with open(path, "w") as fh:
        fh.write("\n".join(_manifest_lines(cfg, threads)) + "\n")
    return path


def _write_run_outputs(outdir, result):
    from .stepper import snapshot_filename, write_snapshot_csv, write_trace_csv
    for snap in result.snapshots:
        write_snapshot_csv(os.path.join(outdir, snapshot_filename(snap.time)), snap)
    write_trace_csv(os.path.join(outdir, "trace.csv"),
                    result.trace_times, result.trace_values)


def _cmd_run(cfg, outdir, threads):
    from . import reference, stepper
    scenario = _build_scenario(cfg)
    _write_manifest(outdir, cfg, threads)
    try:
        if cfg.solver == "spectral":
            result = reference.spectral_run(scenario)
        else:
            result = stepper.run(scenario)
    except InstabilityError as exc:
        partial = getattr(exc, "partial_result", None)
        if partial is not None:
            _write_run_outputs(outdir, partial)
        raise
    _write_run_outputs(outdir, result)
    return 0


def _cmd_validate(cfg, outdir, threads):
    from . import harness
    _write_manifest(outdir, cfg, threads)
    case = harness.ManufacturedCase()
    rows = harness.convergence_study(case, [cfg.validate_points])
    harness.write_study_csv(os.path.join(outdir, "validate.csv"), rows)
    harness.write_study_report(os.path.join(outdir, "validate.txt"), rows, case)
    row = rows[0]
    if row.failed:
        raise ConditioningError(f"validation run failed: {row.failed}")
    print(f"validate: M+N = {row.n_points}, max_abs = {row.max_abs:.6e}, "
          f"avg_rel = {row.avg_rel:.6e}")
    return 0


def _cmd_study(cfg, outdir, threads):
    from . import harness
    _write_manifest(outdir, cfg, threads)
    case = harness.ManufacturedCase()
    rows = harness.convergence_study(case, list(cfg.point_counts))
    harness.write_study_csv(os.path.join(outdir, "study.csv"), rows)
    harness.write_study_report(os.path.join(outdir, "study.txt"), rows, case)
    for row in rows:
        if row.failed:
            print(f"study: M+N = {row.n_points} FAILED: {row.failed}")
        else:
            print(f"study: M+N = {row.n_points}, avg_rel = {row.avg_rel:.6e}, "
                  f"assembly = {row.assembly_seconds:.3f} s")
    return 0


def _cmd_compare(cfg, outdir, threads):
    import numpy as np
    from . import reference, stepper
    scenario = _build_scenario(cfg)
    _write_manifest(outdir, cfg, threads)
    rbf_dir = os.path.join(outdir, "rbf")
    spec_dir = os.path.join(outdir, "spectral")
    os.makedirs(rbf_dir, exist_ok=True)
    os.makedirs(spec_dir, exist_ok=True)

    res_rbf = stepper.run(scenario)
    res_spec = reference.spectral_run(scenario)
    _write_run_outputs(rbf_dir, res_rbf)
    _write_run_outputs(spec_dir, res_spec)

    report = [f"solver comparison on {cfg.snapshot_nx} x {cfg.snapshot_ny} grid"]
    y_mid = 0.5 * (scenario.domain.y_min + scenario.domain.y_max)
    for sa, sb in zip(res_rbf.snapshots, res_spec.snapshots):
        diff = float(np.max(np.abs(sa.values - sb.values)))
        iy = int(np.argmin(np.abs(sa.grid.ys - y_mid)))
        prof_a = sa.values[iy]
        prof_b = sb.values[iy]
        ia = int(np.argmax(np.abs(prof_a)))
        ib = int(np.argmax(np.abs(prof_b)))
        cell = sa.grid.xs[1] - sa.grid.xs[0]
        lag = abs(sa.grid.xs[ia] - sb.grid.xs[ib])
        report.append(
            f"t = {sa.time:g} s: max|rbf - spectral| = {diff:.6e}, "
            f"profile peak lag along y = {y_mid:g}: {lag:.6g} m ({lag / cell:.2f} cells)")
        prof_path = os.path.join(outdir, f"profile_{sa.time * 1000:g}ms.csv")
        with open(prof_path, "w") as fh:
            fh.write("x,sigma_rbf,sigma_spectral\n")
            for x, va, vb in zip(sa.grid.xs, prof_a, prof_b):
                fh.write(f"{x:.17g},{va:.17g},{vb:.17g}\n")
    with open(os.path.join(outdir, "compare_report.txt"), "w") as fh:
        fh.write("\n".join(report) + "\n")
    print("\n".join(report))
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "validate": _cmd_validate,
    "study": _cmd_study,
    "compare": _cmd_compare,
}


def _exit_code_for(exc):
    if isinstance(exc, (InstabilityError, ConditioningError)):
        return 3
    if isinstance(exc, (ConfigurationError, DomainError, CoverageError)):
        return 2
    if isinstance(exc, OSError):
        return 4
    return 2


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="fracwave",
        description="Meshfree viscoacoustic wave solver with fractional Laplacians")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to the run config")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker thread count (overrides FRACWAVE_THREADS)")
    args = parser.parse_args(argv)

    threads = args.threads
    if threads is None and os.environ.get("FRACWAVE_THREADS"):
        try:
            threads = int(os.environ["FRACWAVE_THREADS"])
        except ValueError:
            print("fracwave: error code=2 kind=ConfigurationError: "
                  "FRACWAVE_THREADS must be an integer", file=sys.stderr)
            return 2
    if threads is not None:
        try:
            import numba
            numba.set_num_threads(max(1, threads))
        except ImportError:
            pass

    try:
        cfg = parse_config(args.config)
        outdir = args.out if args.out else cfg.directory
        os.makedirs(outdir, exist_ok=True)
        return _COMMANDS[args.command](cfg, outdir, threads if threads else "auto")
    except FracwaveError as exc:
        code = _exit_code_for(exc)
        print(f"fracwave: error code={code} kind={type(exc).__name__}: {exc}",
              file=sys.stderr)
        return code
    except OSError as exc:
        print(f"fracwave: error code=4 kind={type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

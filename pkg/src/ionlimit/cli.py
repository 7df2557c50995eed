"""Command-line front end: reproducible CSV + manifest outputs for each experiment.

Exit codes: 0 success, 2 invalid configuration (JSON error record on stderr),
3 runtime or accuracy failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import spectral
from .errors import InvalidInputError
from .io import fmt, write_csv, write_manifest
from .pulse import c0_zero_structure, classify, describe, displacement, momentum_transfer, pulse_from_config

COMMANDS = ("analyze-pulse", "survival", "pfeifer", "simulate", "sweep", "remark5")
STATES = ("hydrogen", "delta", "gaussian", "tabulated")
POTENTIALS = ("soft-core", "gaussian-well", "square-well")
PULSE_COMMANDS = ("analyze-pulse", "simulate", "sweep", "remark5")
MODEL_COMMANDS = ("simulate", "sweep", "remark5")

FIG1_TAU = (0.1, 2000.0, 50)
FIG2_TAU = (200.0, 400.0, 1000.0)
FIG2_ALPHA = (0.1, 10.0, 41)

DEFAULT_PULSE = {
    "analyze-pulse": {"kind": "rectangular", "tau": 1.0},
    "simulate": {"kind": "sin", "omega": 2.0, "cycles": 1},
    "sweep": {"kind": "sin", "omega": 2.0, "cycles": 1},
    "remark5": {"kind": "gap", "omega": 2.0, "gap": 1.5},
}
DEFAULT_POTENTIAL = {"kind": "soft-core", "depth": 1.0}
DEFAULT_GRID = {"x_max": 200.0, "n": 8192}
DEFAULT_E0 = {"simulate": [5.0], "sweep": [1.0, 2.0, 5.0, 10.0, 20.0], "remark5": [10.0, 30.0, 100.0, 300.0]}


class ConfigError(InvalidInputError):
    """Aggregated configuration problems."""

    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


@dataclass
class ExperimentConfig:
    command: str
    out: str = "out"
    pulse: dict = field(default_factory=dict)
    state: dict = field(default_factory=dict)
    potential: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    dt: float | None = None
    tau: list = field(default_factory=list)
    alpha: list = field(default_factory=list)
    E0: list = field(default_factory=list)
    tol: float = 1e-10
    nsamples: int = 1024
    points: int = 201
    method: str | None = None
    gauge: str = "kh"
    deviation: bool = False
    snapshot: bool = False
    bound_index: int = 0
    base_dir: str = "."

    def to_dict(self):
        return asdict(self)


# -- parsing ----------------------------------------------------------------------


def _log_grid(triple):
    start, stop, n = float(triple[0]), float(triple[1]), int(triple[2])
    return np.geomspace(start, stop, n).tolist()


def build_parser():
    parser = argparse.ArgumentParser(prog="ionlimit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="YAML or JSON file with config keys")
        p.add_argument("--out", dest="out", help="output directory (default: out)")
        p.add_argument("--format", choices=["csv"], default="csv")

    def pulse_args(p):
        g = p.add_argument_group("pulse")
        g.add_argument("--kind", dest="pulse.kind",
                       help="rectangular, trapezoidal, sin2, gaussian, gap, sampled, or cos/sin cycles")
        g.add_argument("--tau", dest="pulse.tau", type=float)
        g.add_argument("--omega", dest="pulse.omega", type=float)
        g.add_argument("--cycles", dest="pulse.cycles", type=float)
        g.add_argument("--phase", dest="pulse.phase", type=float)
        g.add_argument("--ramp-fraction", dest="pulse.ramp_fraction", type=float)
        g.add_argument("--center", dest="pulse.center", type=float)
        g.add_argument("--width", dest="pulse.width", type=float)
        g.add_argument("--gap", dest="pulse.gap", type=float)
        g.add_argument("--samples", dest="pulse.samples_path", help="CSV with header t,f")
        g.add_argument("--scale", dest="pulse.scale", type=float)

    def state_args(p):
        p.add_argument("--state", dest="state.kind", choices=STATES)
        p.add_argument("--alpha", dest="state.alpha", type=float)
        p.add_argument("--sigma", dest="state.sigma", type=float)
        p.add_argument("--state-file", dest="state.path", help="CSV with header p,psi_hat")

    def model_args(p):
        g = p.add_argument_group("model")
        g.add_argument("--potential", dest="potential.kind", choices=POTENTIALS)
        g.add_argument("--depth", dest="potential.depth", type=float)
        g.add_argument("--soft-a", dest="potential.a", type=float)
        g.add_argument("--cutoff", dest="potential.cutoff", type=float)
        g.add_argument("--well-width", dest="potential.width", type=float)
        g.add_argument("--half-width", dest="potential.half_width", type=float)
        g.add_argument("--x-max", dest="grid.x_max", type=float)
        g.add_argument("--n", dest="grid.n", type=int)
        g.add_argument("--dt", dest="dt", type=float, help="time step (default dx^2/pi)")
        g.add_argument("--bound-index", dest="bound_index", type=int, help="initial bound state")

    p = sub.add_parser("analyze-pulse", help="regime, b0, c0 and the c0 zero structure")
    common(p), pulse_args(p)
    p.add_argument("--tol", dest="tol", type=float)
    p.add_argument("--nsamples", dest="nsamples", type=int)
    p.add_argument("--points", dest="points", type=int, help="rows in the t,f,b0,c0 table")

    p = sub.add_parser("survival", help="survival probability q(tau) of a momentum state")
    common(p), state_args(p)
    p.add_argument("--tau", dest="tau", type=float, nargs="+")
    p.add_argument("--tau-grid", dest="tau_grid", nargs=3, metavar=("START", "STOP", "N"))
    p.add_argument("--alpha-grid", dest="alpha", type=float, nargs="*",
                   help="coupling values; bare flag uses 41 log-spaced values on [0.1, 10]")
    p.add_argument("--method", dest="method", choices=["closed", "rotated", "filon"])

    p = sub.add_parser("pfeifer", help="energy moments and the Pfeifer time")
    common(p), state_args(p)

    p = sub.add_parser("simulate", help="one propagation at a single amplitude")
    common(p), pulse_args(p), model_args(p)
    p.add_argument("--E0", dest="E0", type=float, nargs=1)
    p.add_argument("--gauge", dest="gauge", choices=["kh", "length"])
    p.add_argument("--snapshot", dest="snapshot", action="store_const", const=True)

    p = sub.add_parser("sweep", help="ionization versus amplitude")
    common(p), pulse_args(p), model_args(p)
    p.add_argument("--E0", dest="E0", type=float, nargs="+")
    p.add_argument("--E0-grid", dest="E0_grid", nargs=3, metavar=("START", "STOP", "N"))
    p.add_argument("--deviation", dest="deviation", action="store_const", const=True)

    p = sub.add_parser("remark5", help="accelerated-frame evolution versus the flat/free product")
    common(p), pulse_args(p), model_args(p)
    p.add_argument("--E0", dest="E0", type=float, nargs="+")
    return parser


def config_from_args(ns):
    """Merge the optional config file with explicitly given flags (flags win)."""
    cfg = {}
    base = Path(".")
    if ns.config is not None:
        try:
            loaded = yaml.safe_load(ns.config.read_text())
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError([f"config: cannot read {ns.config}: {exc}"]) from exc
        if not isinstance(loaded, dict):
            raise ConfigError([f"config: {ns.config} is not a mapping"])
        if isinstance(loaded.get("config"), dict) and "outputs" in loaded:
            loaded = loaded["config"]  # a run manifest
        cfg = loaded
        base = ns.config.parent
        if cfg.get("command", ns.command) != ns.command:
            raise ConfigError([f"config: command {cfg['command']!r} does not match {ns.command!r}"])
    cfg = {k: (dict(v) if isinstance(v, dict) else v) for k, v in cfg.items()}
    cfg["command"] = ns.command
    cfg.setdefault("base_dir", str(base))
    for key, val in vars(ns).items():
        if val is None or key in ("config", "command", "format"):
            continue
        if key in ("tau_grid", "E0_grid"):
            try:
                cfg[key[:-5]] = _log_grid(val)
            except ValueError:
                raise ConfigError([f"{key}: expected START STOP N"]) from None
        elif "." in key:
            section, name = key.split(".", 1)
            cfg.setdefault(section, {})[name] = val
        else:
            cfg[key] = val
    return cfg


# -- validation -------------------------------------------------------------------


def _positive(x):
    try:
        return math.isfinite(float(x)) and float(x) > 0
    except (TypeError, ValueError):
        return False


def _build_state(state, base_dir):
    kind = state.get("kind", "hydrogen")
    if kind == "hydrogen":
        return spectral.MomentumState.hydrogen_1s()
    if kind == "delta":
        return spectral.MomentumState.point_interaction(float(state.get("alpha", 1.0)))
    if kind == "gaussian":
        return spectral.MomentumState.gaussian(float(state.get("sigma", 1.0)))
    if kind == "tabulated":
        return spectral.load_tabulated_csv(Path(base_dir) / state["path"])
    raise InvalidInputError(f"unknown state {kind!r}")


def _build_model(cfg):
    from .qdyn import Grid1D, PotentialGrid

    grid = Grid1D(float(cfg.grid["x_max"]), int(cfg.grid["n"]))
    pot = dict(cfg.potential)
    kind = pot.pop("kind", "soft-core")
    makers = {"soft-core": PotentialGrid.soft_core, "gaussian-well": PotentialGrid.gaussian_well,
              "square-well": PotentialGrid.square_well}
    if kind not in makers:
        raise InvalidInputError(f"unknown potential {kind!r}")
    return grid, makers[kind](grid, **{k: float(v) for k, v in pot.items()})


def validate(raw):
    """Check a config mapping against every downstream guard.

    Returns
    -------
    ExperimentConfig

    Raises
    ------
    ConfigError
        Lists every violation found, not just the first.
    """
    problems = []
    raw = dict(raw)
    command = raw.get("command")
    if command not in COMMANDS:
        raise ConfigError([f"command: expected one of {', '.join(COMMANDS)}, got {command!r}"])
    known = set(ExperimentConfig.__dataclass_fields__)
    for key in sorted(set(raw) - known):
        problems.append(f"{key}: unknown config key")
    cfg = ExperimentConfig(**{k: v for k, v in raw.items() if k in known})
    base = Path(cfg.base_dir)
    pulse = None

    if command in PULSE_COMMANDS:
        cfg.pulse = {**(DEFAULT_PULSE[command] if not cfg.pulse else {}), **cfg.pulse}
        samples = cfg.pulse.get("samples_path")
        if cfg.pulse.get("kind") == "sampled" and samples is None:
            problems.append("pulse.samples_path: required for sampled pulses")
        elif samples is not None and not (base / samples).is_file():
            problems.append(f"pulse.samples_path: file not found: {base / samples}")
        else:
            try:
                pulse = pulse_from_config(cfg.pulse, base)
            except (ValueError, KeyError, TypeError) as exc:
                problems.append(f"pulse: {exc}")
    if command == "analyze-pulse":
        if not (_positive(cfg.tol) and cfg.tol < 1):
            problems.append("tol: must lie in (0, 1)")
        if int(cfg.nsamples) < 64:
            problems.append("nsamples: must be >= 64")
        if int(cfg.points) < 2:
            problems.append("points: must be >= 2")

    if command in ("survival", "pfeifer"):
        cfg.state = {"kind": "hydrogen", **cfg.state}
        kind = cfg.state["kind"]
        if kind not in STATES:
            problems.append(f"state.kind: expected one of {', '.join(STATES)}")
        if kind == "tabulated" and not (base / str(cfg.state.get("path", ""))).is_file():
            problems.append(f"state.path: file not found: {base / str(cfg.state.get('path', ''))}")
        for key in ("alpha", "sigma"):
            if key in cfg.state and not _positive(cfg.state[key]):
                problems.append(f"state.{key}: must be positive")
    if command == "survival":
        kind = cfg.state["kind"]
        if cfg.alpha == [] and "alpha" in raw:
            cfg.alpha = _log_grid(FIG2_ALPHA)
        if cfg.alpha and kind != "delta":
            problems.append("alpha: an alpha grid needs --state delta")
        if not cfg.tau:
            cfg.tau = list(FIG2_TAU) if cfg.alpha else _log_grid(FIG1_TAU)
        bad = [t for t in cfg.tau if not (math.isfinite(float(t)) and float(t) >= 0)]
        if bad:
            problems.append(f"tau: values must be finite and >= 0, got {bad}")
        if any(not _positive(a) for a in cfg.alpha):
            problems.append("alpha: values must be positive")
        if cfg.method is None:
            cfg.method = "closed" if kind in ("hydrogen", "delta") else "rotated"
        if cfg.method == "closed" and kind not in ("hydrogen", "delta"):
            problems.append("method: closed form exists only for hydrogen and delta")

    if command in MODEL_COMMANDS:
        cfg.potential = {**DEFAULT_POTENTIAL, **cfg.potential} if "kind" not in cfg.potential else cfg.potential
        cfg.grid = {**DEFAULT_GRID, **cfg.grid}
        if not cfg.E0:
            cfg.E0 = list(DEFAULT_E0[command])
        cfg.E0 = [float(e) for e in cfg.E0]
        grid = V = None
        n = cfg.grid.get("n")
        if not isinstance(n, int) or n < 256 or n & (n - 1):
            problems.append(f"grid.n: must be a power of two >= 256, got {n!r}")
        elif not _positive(cfg.grid.get("x_max")):
            problems.append("grid.x_max: must be positive")
        else:
            try:
                grid, V = _build_model(cfg)
            except (ValueError, TypeError) as exc:
                problems.append(f"potential: {exc}")
        if grid is not None:
            guard = grid.dx ** 2 / math.pi
            if cfg.dt is None:
                cfg.dt = guard
            elif not _positive(cfg.dt):
                problems.append("dt: must be positive")
            elif float(cfg.dt) > guard * (1 + 1e-12):
                problems.append(f"dt: {cfg.dt} exceeds the stability guard dx^2/pi = {guard:.6g}")
        if cfg.gauge not in ("kh", "length"):
            problems.append("gauge: expected kh or length")
        if command == "simulate" and len(cfg.E0) != 1:
            problems.append("E0: simulate takes exactly one amplitude")
        if any(not math.isfinite(e) or e < 0 for e in cfg.E0):
            problems.append("E0: values must be finite and >= 0")
        elif command == "sweep":
            from .qdyn.sweep import check_amplitudes
            problems += [f"E0: {m}" for m in check_amplitudes(cfg.E0)]
        elif np.any(np.diff(cfg.E0) <= 0):
            problems.append("E0: grid must be strictly ascending")
        if grid is not None and pulse is not None and cfg.E0 and _positive(cfg.dt):
            t = np.linspace(0.0, pulse.tau, 4097)
            reach = max(cfg.E0) * float(np.max(np.abs(displacement(pulse, t))))
            if reach > grid.x_max:
                problems.append(f"E0: displacement {reach:.4g} exceeds half the grid ({grid.x_max:.4g})")
    if problems:
        raise ConfigError(problems)
    return cfg


# -- commands -----------------------------------------------------------------------


def _paths(cfg):
    out = Path(cfg.out)
    return out / f"{cfg.command}.csv", out / f"{cfg.command}.manifest.json"


def _finish(cfg, header, rows, summary, extra_outputs=()):
    csv_path, man_path = _paths(cfg)
    write_csv(csv_path, header, rows)
    outputs = [csv_path.name, *[Path(p).name for p in extra_outputs]]
    write_manifest(man_path, {"command": cfg.command, "config": cfg.to_dict(), "outputs": outputs,
                              "summary": summary})
    return {"csv": str(csv_path), "manifest": str(man_path), **summary}


def _cmd_analyze_pulse(cfg):
    p = pulse_from_config(cfg.pulse, cfg.base_dir)
    inv = classify(p, tol=cfg.tol, nsamples=cfg.nsamples)
    t = np.linspace(0.0, p.tau, int(cfg.points))
    rows = zip(t, p(t), momentum_transfer(p, t), displacement(p, t))
    summary = {"regime": inv.regime.value, "b0_tau": inv.b0_tau, "c0_tau": inv.c0_tau, "a0": inv.a0,
               "b0_normalized": inv.b0_normalized, "c0_normalized": inv.c0_normalized,
               "c0_zeros": list(inv.c0_zeros), "c0_flat_intervals": [list(iv) for iv in inv.c0_flat_intervals],
               "partition": list(inv.remark5_partition), "pulse": describe(p)}
    return _finish(cfg, ["t", "f", "b0", "c0"], rows, summary), 0


def _cmd_survival(cfg):
    kind = cfg.state["kind"]
    rows = []
    alphas = cfg.alpha or ([cfg.state.get("alpha", 1.0)] if kind == "delta" else [None])
    for alpha in alphas:
        state = None
        if cfg.method != "closed":
            st = dict(cfg.state, alpha=alpha) if alpha is not None else cfg.state
            state = _build_state(st, cfg.base_dir)
        for tau in cfg.tau:
            try:
                if cfg.method == "closed":
                    q = spectral.q_hydrogen(tau) if kind == "hydrogen" else spectral.q_delta(alpha, tau)
                else:
                    q = spectral.survival_probability(state, tau, method=cfg.method)
            except (ValueError, RuntimeError) as exc:
                where = f"tau={fmt(tau)}" + (f", alpha={fmt(alpha)}" if alpha is not None else "")
                raise RuntimeError(f"{where}: {type(exc).__name__}: {exc}") from exc
            rows.append(([alpha] if alpha is not None else []) + [tau, q, 1.0 - q])
    header = (["alpha"] if kind == "delta" else []) + ["tau", "q", "p"]
    summary = {"rows": len(rows), "state": kind, "method": cfg.method}
    return _finish(cfg, header, rows, summary), 0


def _cmd_pfeifer(cfg):
    state = _build_state(cfg.state, cfg.base_dir)
    mom = spectral.h0_moments(state)
    tstar = spectral.pfeifer_time(state)
    if mom.divergent:
        row = [cfg.state["kind"], float("nan"), float("nan"), float("nan"), float("nan")]
    else:
        row = [cfg.state["kind"], mom.m1, mom.m2, math.sqrt(mom.m2 - mom.m1 ** 2), tstar]
    summary = {"state": cfg.state["kind"], "divergent": mom.divergent, "tau_star": tstar}
    return _finish(cfg, ["state", "m1", "m2", "sigma_E", "tau_star"], [row], summary), 0


def _model(cfg):
    from .qdyn import bound_states

    pulse = pulse_from_config(cfg.pulse, cfg.base_dir)
    grid, V = _build_model(cfg)
    P = bound_states(V, max_count=max(8, cfg.bound_index + 1))
    if cfg.bound_index >= len(P):
        raise InvalidInputError(f"bound_index {cfg.bound_index} but only {len(P)} bound states")
    return pulse, grid, V, P, P.state(cfg.bound_index)


def _cmd_simulate(cfg):
    from .qdyn import gauge_relate, ionization, propagate_kh, propagate_length

    pulse, grid, V, P, psi = _model(cfg)
    E0 = cfg.E0[0]
    if cfg.gauge == "length":
        final = propagate_length(psi, V, pulse, E0, cfg.dt)
    else:
        kh = propagate_kh(psi, V, pulse, E0, cfg.dt)
        final = gauge_relate(kh, E0 * momentum_transfer(pulse, pulse.tau), E0 * displacement(pulse, pulse.tau))
    ion = ionization(final, P)
    extra = []
    if cfg.snapshot:
        snap = Path(cfg.out) / "simulate_density.csv"
        write_csv(snap, ["x", "density"], zip(grid.x, final.density()))
        extra.append(snap)
    header = ["E0", "P_ion", *[f"pop_{n}" for n in range(len(P))], "norm"]
    row = [E0, ion, *P.populations(final), final.norm()]
    summary = {"P_ion": ion, "energies": P.energies.tolist(), "gauge": cfg.gauge}
    return _finish(cfg, header, [row], summary, extra), 0


def _cmd_sweep(cfg):
    from .qdyn import sweep_amplitude

    pulse, grid, V, P, psi = _model(cfg)
    res = sweep_amplitude(psi, V, pulse, cfg.E0, cfg.dt, bound_set=P, deviation=cfg.deviation)
    errors = {fmt(r.E0): r.error for r in res.rows if r.error}
    summary = {"energies": P.energies.tolist(), "row_errors": errors,
               "regime": classify(pulse).regime.value}
    return _finish(cfg, res.header(), res.table(), summary), (3 if errors else 0)


def _cmd_remark5(cfg):
    from .qdyn import ionization, propagate_kh, remark5_product

    pulse, grid, V, P, psi = _model(cfg)
    _, flats, partition = c0_zero_structure(pulse)
    ref = remark5_product(psi, partition, V, cfg.dt, tau=pulse.tau)
    ref_ion = ionization(ref, P)
    rows = []
    for E0 in cfg.E0:
        kh = propagate_kh(psi, V, pulse, E0, cfg.dt)
        rows.append([E0, (kh - ref).norm(), ionization(kh, P), ref_ion])
    summary = {"partition": list(partition), "flat_intervals": [list(iv) for iv in flats]}
    return _finish(cfg, ["E0", "distance", "P_ion_kh", "P_ion_product"], rows, summary), 0


HANDLERS = {"analyze-pulse": _cmd_analyze_pulse, "survival": _cmd_survival, "pfeifer": _cmd_pfeifer,
            "simulate": _cmd_simulate, "sweep": _cmd_sweep, "remark5": _cmd_remark5}


def run(cfg: ExperimentConfig):
    """Execute a validated config; returns (summary, exit code)."""
    return HANDLERS[cfg.command](cfg)


def _emit(stream, record):
    stream.write(json.dumps(record, sort_keys=True, default=str) + "\n")


def main(argv=None):
    ns = build_parser().parse_args(argv)
    try:
        cfg = validate(config_from_args(ns))
    except ConfigError as exc:
        _emit(sys.stderr, {"status": "invalid", "errors": exc.problems})
        return 2
    try:
        summary, code = run(cfg)
    except (ValueError, RuntimeError, OSError) as exc:
        _emit(sys.stderr, {"status": "error", "command": cfg.command, "type": type(exc).__name__,
                           "message": str(exc)})
        return 3
    _emit(sys.stdout, {"status": "ok" if code == 0 else "partial", **summary})
    return code


if __name__ == "__main__":
    sys.exit(main())

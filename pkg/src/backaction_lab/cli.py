"""Command-line front end.

Exit codes: 0 success, 1 computational failure or failed check, 2 usage or
configuration error. Options come from defaults, then an optional flat
``key = value`` config file, then command-line flags (highest precedence).
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import backaction as ba
from . import config
from . import meter as mt
from . import scenarios as sc
from . import suites
from . import uncertainty as un
from .core import Observable, StateVector, pauli, random_hermitian, random_state
from .errors import AmplitudeVanishesError, BackActionError, ConfigError

log = logging.getLogger("backaction_lab")

SUBCOMMANDS = ("verify", "sweep-weakvalue", "tradeoff", "fourier-limit", "sterngerlach", "freeparticle")
SYSTEMS = ("sg", "random", "eigenstate", "freeparticle")


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).replace(",", " ").split()]


@dataclass
class RunConfig:
    subcommand: str = "verify"
    system: str = "sg"
    dim: int = 3
    c_up: float = 0.8
    c_down: float = -0.6
    theta: float = float("nan")
    psi_up: float = 0.5
    post_select: bool = False
    f_up: float = 1 / np.sqrt(5)
    N: int = 64
    delta_B: float = 0.0
    g: float = 1.0
    sigma_B: float = 0.1
    phi_min: float = -3.0
    phi_max: float = 3.0
    phi_points: int = 601
    phi_bar: float = 0.0
    sigmas: list = field(default_factory=lambda: np.geomspace(0.05, 10.0, 40).tolist())
    widths: list = field(default_factory=lambda: list(suites.EMERGENCE_WIDTHS))
    m: float = 0.25
    t: float = 1.0
    x1: float = 0.0
    x2: float = 0.0
    seed: int = 0
    out: str = "-"
    format: str = "csv"
    jobs: int = 1
    hbar: float = 1.0
    amp_tol: float = 1e-10
    fd_step: float = 1e-4
    inject_fault: bool = False

    def validate(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.system not in SYSTEMS:
            raise ConfigError(f"system must be one of {SYSTEMS}, got {self.system!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        for name in ("hbar", "amp_tol", "fd_step", "t", "m"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.amp_tol >= 1e-2:
            raise ConfigError(f"amp_tol = {self.amp_tol} is not a meaningful amplitude tolerance")
        if self.phi_points < 2 or not self.phi_max > self.phi_min:
            raise ConfigError("phi range must be non-empty and ascending")
        if not self.sigmas or min(self.sigmas) <= 0:
            raise ConfigError("sigmas must be a non-empty list of positive widths")
        if not self.widths or min(self.widths) <= 0:
            raise ConfigError("widths must be a non-empty list of positive widths")
        if self.jobs < 1 or self.dim < 1 or self.N < 2:
            raise ConfigError("jobs, dim must be >= 1 and N >= 2")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if not 0 <= self.psi_up <= 1 or not -1 <= self.f_up <= 1:
            raise ConfigError("psi_up must lie in [0, 1] and f_up in [-1, 1]")
        if np.isfinite(self.theta):
            self.c_up, self.c_down = float(np.cos(self.theta)), float(np.sin(self.theta))
        if abs(self.c_up**2 + self.c_down**2 - 1) > 1e-9:
            raise ConfigError("c_up^2 + c_down^2 must equal 1")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, value):
    kind = _FIELD_TYPES.get(key)
    if kind is None:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        if kind is bool or kind == "bool":
            if isinstance(value, bool):
                return value
            return str(value).strip().lower() in ("1", "true", "yes", "on")
        if kind is int or kind == "int":
            return int(value)
        if kind is float or kind == "float":
            return float(value)
        if kind is list or kind == "list":
            return _floats(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return str(value)


def read_config_file(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        values[key] = _coerce(key, value)
    return values


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file")
    common.add_argument("--out", help="output path ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--hbar", type=float)
    common.add_argument("--amp-tol", dest="amp_tol", type=float)
    common.add_argument("--fd-step", dest="fd_step", type=float)

    parser = argparse.ArgumentParser(prog="backaction-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("verify", parents=[common], help="run all verification suites")
    p.add_argument("--suite", action="append", dest="suites", choices=list(suites.SUITES))
    p.add_argument("--inject-fault", dest="inject_fault", action="store_true", default=None,
                   help=argparse.SUPPRESS)

    system = argparse.ArgumentParser(add_help=False)
    system.add_argument("--system", choices=SYSTEMS)
    system.add_argument("--dim", type=int)
    system.add_argument("--c-up", dest="c_up", type=float)
    system.add_argument("--c-down", dest="c_down", type=float)
    system.add_argument("--theta", type=float,
                        help="post-select cos(theta)|up> + sin(theta)|down> (overrides --c-up/--c-down)")

    p = sub.add_parser("sweep-weakvalue", parents=[common, system], help="S, P and weak value over phi")
    p.add_argument("--phi-min", dest="phi_min", type=float)
    p.add_argument("--phi-max", dest="phi_max", type=float)
    p.add_argument("--phi-points", dest="phi_points", type=int)

    p = sub.add_parser("tradeoff", parents=[common, system], help="fluctuation trade-off over meter widths")
    p.add_argument("--sigmas", type=_floats)
    p.add_argument("--phi-bar", dest="phi_bar", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--t", type=float)

    p = sub.add_parser("fourier-limit", parents=[common], help="eigenvalue and projector emergence")
    p.add_argument("--widths", type=_floats)
    p.add_argument("--psi-up", dest="psi_up", type=float, help="probability of spin up in psi")
    p.add_argument("--post-select", dest="post_select", action="store_true", default=None)
    p.add_argument("--f-up", dest="f_up", type=float, help="<f|up>; <f|down> follows by normalization")
    p.add_argument("--delta-B", dest="delta_B", type=float, help="fixed meter spacing (0 = automatic)")
    p.add_argument("--g", type=float)

    p = sub.add_parser("sterngerlach", parents=[common], help="Stern-Gerlach closed forms vs engine")
    p.add_argument("--c-up", dest="c_up", type=float)
    p.add_argument("--c-down", dest="c_down", type=float)
    p.add_argument("--phi-min", dest="phi_min", type=float)
    p.add_argument("--phi-max", dest="phi_max", type=float)
    p.add_argument("--phi-points", dest="phi_points", type=int)

    p = sub.add_parser("freeparticle", parents=[common], help="free-particle closed forms")
    for name in ("m", "t", "x1", "x2"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--phi-min", dest="phi_min", type=float, help="smallest momentum kick")
    p.add_argument("--phi-max", dest="phi_max", type=float, help="largest momentum kick")
    p.add_argument("--phi-points", dest="phi_points", type=int)
    return parser


def resolve_config(args):
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key, value in vars(args).items():
        if key in ("config", "suites") or value is None:
            continue
        values[key] = value
    unknown = set(values) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return RunConfig(**values).validate()


# -- output ---------------------------------------------------------------


@dataclass
class Table:
    """Rows for one subcommand; ``columns`` maps name to description."""

    columns: dict
    rows: list
    meta: dict = field(default_factory=dict)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value) + 0.0, ".17g")
    return str(value)


def render(table, fmt):
    if fmt == "json":
        records = [{k: _jsonable(row.get(k)) for k in table.columns} for row in table.rows]
        return json.dumps({"meta": _jsonable(table.meta), "columns": table.columns, "records": records},
                          indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    for key, value in table.meta.items():
        buf.write(f"# {key}: {_fmt(value) if not isinstance(value, (list, dict)) else json.dumps(_jsonable(value))}\n")
    for name, doc in table.columns.items():
        buf.write(f"# {name}: {doc}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(table.columns))
    for row in table.rows:
        writer.writerow([_fmt(row.get(k)) for k in table.columns])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else None
    return value


def write_atomic(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename; '-' means stdout."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- systems --------------------------------------------------------------


def build_context(cfg):
    """The (A, psi, f) context for the configured system."""
    if cfg.system == "sg":
        return sc.SternGerlachScenario(cfg.c_up, cfg.c_down, cfg.hbar).context()
    if cfg.system == "eigenstate":
        A = Observable(cfg.hbar * pauli("z") / 2)
        f = StateVector(np.array([cfg.c_up, cfg.c_down]))
        return ba.BackActionContext(A, StateVector.basis(2, 0), f, cfg.hbar)
    if cfg.system == "random":
        seeds = np.random.SeedSequence(cfg.seed).generate_state(3, dtype=np.uint32).tolist()
        return ba.BackActionContext(random_hermitian(cfg.dim, seeds[0]), random_state(cfg.dim, seeds[1]),
                                    random_state(cfg.dim, seeds[2]), cfg.hbar)
    raise ConfigError(f"system {cfg.system!r} has no finite-dimensional context")


def _map(func, items, jobs):
    if jobs <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


# -- subcommands ----------------------------------------------------------


def cmd_verify(cfg, names=None):
    results = suites.run_all(cfg.seed, fault=cfg.inject_fault, names=names)
    report = {"seed": cfg.seed, "passed": all(r.passed for r in results),
              "suites": [r.as_dict() for r in results]}
    for r in results:
        log.info("%s: %s", r.name, "pass" if r.passed else "FAIL")
    return report


SWEEP_COLUMNS = {
    "phi": "back-action parameter g*B",
    "skipped": "1 if |<f|U(phi)|psi>| < amp_tol (phase undefined; other fields empty)",
    "S": "action: hbar times the unwrapped phase of <f|U(phi)|psi>",
    "P": "post-selection probability |<f|U(phi)|psi>|^2",
    "ReW": "real weak value Re <f|A U|psi>/<f|U|psi> (meter shift)",
    "ImW": "imaginary part of the weak value",
    "hj_residual": "|-dS/dphi - ReW| with Richardson central differences",
}


def cmd_sweep_weakvalue(cfg):
    ctx = build_context(cfg)
    phis = np.linspace(cfg.phi_min, cfg.phi_max, cfg.phi_points)
    amps = ctx.amplitude(phis)
    keep = np.abs(amps) >= cfg.amp_tol
    S = np.full(phis.shape, np.nan)
    for lo, hi in sc._segments(keep):
        S[lo:hi] = ctx.hbar * ba.unwrapped_phase(ctx, phis[lo:hi], amps[lo:hi], cfg.amp_tol)
    rows = []
    for i, phi in enumerate(phis):
        if not keep[i]:
            rows.append({"phi": phi, "skipped": True})
            continue
        try:
            w = ba.weak_value(ctx, phi)
            residual = ba.hj_residual(ctx, phi, cfg.fd_step)
        except AmplitudeVanishesError:
            rows.append({"phi": phi, "skipped": True})
            continue
        rows.append({"phi": phi, "skipped": False, "S": S[i], "P": abs(amps[i]) ** 2,
                     "ReW": w.real, "ImW": w.imag, "hj_residual": residual})
    return Table(SWEEP_COLUMNS, rows, {"system": cfg.system, "hbar": cfg.hbar})


TRADEOFF_COLUMNS = {
    "sigma_phi": "back-action spread delta_phi = g * std(B) of the Gaussian meter",
    "delta_A_S": "intrinsic spread |d2S/dphi2| * delta_phi",
    "delta_A_M": "resolution bound hbar / (2 delta_phi)",
    "delta_A": "quadrature total sqrt(delta_A_S^2 + delta_A_M^2)",
    "floor": "minimal fluctuation sqrt(hbar |d2S/dphi2|)",
    "empirical_delta_A": "simulated RMS of the pointer readout around Re W(phi_bar) (empty if not simulated)",
}


def _tradeoff_row(args):
    cfg, sigma = args
    with config.using(hbar=cfg.hbar, amp_tol=cfg.amp_tol, fd_step=cfg.fd_step):
        ctx = build_context(cfg)
        center = ba.weak_value(ctx, cfg.phi_bar).real
        _, _, dist = un.simulate_gaussian_readout(ctx, sigma, cfg.phi_bar)
        r = un.tradeoff_report(ctx, cfg.phi_bar, sigma, un.empirical_fluctuation(dist, center))
    return {"sigma_phi": sigma, "delta_A_S": r.delta_A_S, "delta_A_M": r.delta_A_M,
            "delta_A": r.delta_A_total, "floor": r.bound_floor, "empirical_delta_A": r.empirical_delta_A}


def cmd_tradeoff(cfg):
    sigmas = cfg.sigmas
    if cfg.system == "freeparticle":
        s = sc.FreeParticleScenario(cfg.m, cfg.t, cfg.x1, cfg.x2, cfg.hbar)
        curv = sc.fp_curvature(s)
        rows = []
        for sigma in sigmas:
            d_s = abs(curv) * sigma
            d_m = un.resolution_bound(sigma, cfg.hbar)
            rows.append({"sigma_phi": sigma, "delta_A_S": d_s, "delta_A_M": d_m,
                         "delta_A": float(np.hypot(d_s, d_m)), "floor": sc.fp_min_fluctuation(s)})
        return Table(TRADEOFF_COLUMNS, rows, {"system": "freeparticle", "hbar": cfg.hbar})
    rows = _map(_tradeoff_row, [(cfg, float(s)) for s in sigmas], cfg.jobs)
    meta = {"system": cfg.system, "hbar": cfg.hbar, "phi_bar": cfg.phi_bar}
    if rows:
        emp = np.array([r["empirical_delta_A"] for r in rows])
        i = int(np.argmin(emp))
        meta.update(empirical_min=emp[i], sigma_at_empirical_min=rows[i]["sigma_phi"],
                    floor=rows[i]["floor"])
    return Table(TRADEOFF_COLUMNS, rows, meta)


def _fourier_setup(cfg):
    A = Observable(cfg.hbar * pauli("z") / 2)
    psi = StateVector(np.array([np.sqrt(cfg.psi_up), np.sqrt(1 - cfg.psi_up)]))
    f = None
    if cfg.post_select:
        f = StateVector(np.array([cfg.f_up, np.sqrt(1 - cfg.f_up**2)]))
    return A, psi, f


def _fourier_row(args):
    cfg, width = args
    with config.using(hbar=cfg.hbar, amp_tol=cfg.amp_tol):
        A, psi, f = _fourier_setup(cfg)
        halfwidth = float(np.max(np.abs(A.eigenvalues)))
        if cfg.delta_B > 0:
            sigma_B = width / abs(cfg.g)
            half = int(np.ceil(12.5 * sigma_B / cfg.delta_B))
            meter = mt.MeterModel(2 * half + 1, cfg.delta_B, cfg.g, cfg.hbar)
            phi_M = mt.gaussian_meter_state(meter, sigma_B)
        else:
            meter, phi_M = mt.design_gaussian_meter(width, halfwidth, g=cfg.g, hbar=cfg.hbar)
        mt.check_aliasing(A.eigenvalues, meter)
        if f is None:
            dist = mt.readout_distribution((A, psi), meter, phi_M)
        else:
            dist = mt.readout_distribution(ba.BackActionContext(A, psi, f, cfg.hbar), meter, phi_M)
        masses = mt.peak_masses(dist, A.eigenvalues)
        proj = mt.projector_emergence_check(A, [(meter, phi_M)]).rows[0]
    return {"sigma_phi": width, "N": meter.N, "delta_B": meter.delta_B,
            "mass_down": masses[0], "mass_up": masses[1], "tv_error": None,
            "total_mass": dist.total_mass, "projector_distance": proj.max_distance}


FOURIER_COLUMNS = {
    "sigma_phi": "back-action spread of the Gaussian meter",
    "N": "meter grid size",
    "delta_B": "meter grid spacing",
    "mass_down": "normalized readout mass nearest the eigenvalue -hbar/2",
    "mass_up": "normalized readout mass nearest the eigenvalue +hbar/2",
    "ref_down": "limit mass |<f|a><a|psi>|^2 (normalized) for a = -hbar/2",
    "ref_up": "limit mass for a = +hbar/2",
    "tv_error": "total-variation distance between masses and limit masses",
    "total_mass": "post-selection probability (1 if unconditional)",
    "projector_distance": "max over eigenvalues of ||<m|U|phi_M>/c - |a><a| ||_2 at the bin nearest a",
}


def cmd_fourier_limit(cfg):
    A, psi, f = _fourier_setup(cfg)
    ref = []
    for _, projector in A.spectrum:
        if f is None:
            ref.append(np.vdot(psi.amplitudes, projector @ psi.amplitudes).real)
        else:
            ref.append(abs(np.vdot(f.amplitudes, projector @ psi.amplitudes)) ** 2)
    ref = np.array(ref) / np.sum(ref)
    rows = _map(_fourier_row, [(cfg, float(w)) for w in cfg.widths], cfg.jobs)
    for row in rows:
        row["ref_down"], row["ref_up"] = ref
        row["tv_error"] = 0.5 * (abs(row["mass_down"] - ref[0]) + abs(row["mass_up"] - ref[1]))
    tv = [r["tv_error"] for r in rows]
    dist = [r["projector_distance"] for r in rows]
    meta = {"post_selected": cfg.post_select, "hbar": cfg.hbar,
            "tv_monotone": mt.is_nonincreasing(tv), "projector_monotone": mt.is_nonincreasing(dist)}
    return Table(FOURIER_COLUMNS, rows, meta)


SG_COLUMNS = {
    "phi": "spin precession angle g*z",
    "P": "closed-form probability (1 + 2 c_up c_down cos phi) / 2",
    "S": "closed-form action -hbar arctan(W0 tan(phi/2)), continued",
    "weak_value": "closed-form meter shift (hbar/2) W0 / (cos^2(phi/2) + W0^2 sin^2(phi/2))",
    "P_engine": "generic engine probability",
    "weak_value_engine": "generic engine Re weak value",
}


def cmd_sterngerlach(cfg):
    s = sc.SternGerlachScenario(cfg.c_up, cfg.c_down, cfg.hbar)
    phis = np.linspace(cfg.phi_min, cfg.phi_max, cfg.phi_points)
    ctx = s.context()
    P = sc.sg_probability(s, phis)
    S = sc.sg_action(s, phis)
    W = sc.sg_weak_value(s, phis)
    amps = ctx.amplitude(phis)
    rows = []
    for i, phi in enumerate(phis):
        row = {"phi": phi, "P": P[i], "S": S[i], "weak_value": W[i], "P_engine": abs(amps[i]) ** 2}
        if abs(amps[i]) >= cfg.amp_tol:
            row["weak_value_engine"] = ba.weak_value(ctx, phi).real
        rows.append(row)
    report = sc.crosscheck_stern_gerlach(s, phis, amp_tol=cfg.amp_tol)
    meta = {"c_up": s.c_up, "c_down": s.c_down, "W0": sc.sg_W0(s), "hbar": cfg.hbar,
            "max_residual": report.max_residual, "skipped": len(report.skipped)}
    return Table(SG_COLUMNS, rows, meta)


FP_COLUMNS = {
    "p": "momentum kick (back-action parameter)",
    "S": "closed-form action m(x1^2+x2^2)/t - (t/8m)(p + 2m(x1+x2)/t)^2 - pi hbar/4",
    "x_m": "straight-line position (x1+x2)/2 + t p / 4m",
    "minus_dS_dp": "finite-difference -dS/dp",
    "curvature": "d2S/dp2 = -t/4m",
}


def cmd_freeparticle(cfg):
    s = sc.FreeParticleScenario(cfg.m, cfg.t, cfg.x1, cfg.x2, cfg.hbar)
    ps = np.linspace(cfg.phi_min, cfg.phi_max, cfg.phi_points)
    slope = sc.central_difference(lambda q: sc.fp_action(s, q), ps, 0.1)
    rows = [{"p": p, "S": float(sc.fp_action(s, p)), "x_m": float(sc.fp_position(s, p)),
             "minus_dS_dp": float(-slope[i]), "curvature": sc.fp_curvature(s)}
            for i, p in enumerate(ps)]
    meta = {"m": s.m, "t": s.t, "x1": s.x1, "x2": s.x2, "hbar": s.hbar,
            "min_fluctuation": sc.fp_min_fluctuation(s)}
    return Table(FP_COLUMNS, rows, meta)


COMMANDS = {
    "sweep-weakvalue": cmd_sweep_weakvalue,
    "tradeoff": cmd_tradeoff,
    "fourier-limit": cmd_fourier_limit,
    "sterngerlach": cmd_sterngerlach,
    "freeparticle": cmd_freeparticle,
}


def _setup_logging():
    level = os.environ.get("BACKACTION_LAB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = resolve_config(args)
    except (ConfigError, TypeError) as exc:
        print(f"backaction-lab: config error: {exc}", file=sys.stderr)
        return 2
    try:
        with config.using(hbar=cfg.hbar, amp_tol=cfg.amp_tol, fd_step=cfg.fd_step):
            if cfg.subcommand == "verify":
                report = cmd_verify(cfg, args.suites)
                write_atomic(cfg.out, json.dumps(_jsonable(report), indent=1) + "\n")
                return 0 if report["passed"] else 1
            table = COMMANDS[cfg.subcommand](cfg)
            write_atomic(cfg.out, render(table, cfg.format))
    except BackActionError as exc:
        print(f"backaction-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

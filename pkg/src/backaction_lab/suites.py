"""End-to-end verification suites run by ``backaction-lab verify``.

Each suite compares two independent routes to the same quantity over seeded
random (or fixed) instances and returns a :class:`SuiteResult`. Results hold
only deterministic data so that reports are byte-identical for a fixed seed.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from . import backaction as ba
from . import meter as mt
from . import scenarios as sc
from . import uncertainty as un
from .core import Observable, StateVector, pauli, random_hermitian, random_state, unitary_from_generator

SG_TRADEOFF_THETA = 1.2
SG_TRADEOFF_PHI_BAR = 2.9
EMERGENCE_WIDTHS = (2.0, 5.0, 10.0, 20.0)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)


def _seeds(seed, n):
    return np.random.SeedSequence(seed).generate_state(n, dtype=np.uint32).tolist()


def _rng(seed, salt):
    return np.random.default_rng([seed, salt])


def representation_equivalence(seed, n=100, max_dim=8, max_N=64, tol=1e-10):
    """Joint unitary from the full generator vs the sum of conditional back-actions."""
    rng = _rng(seed, 1)
    worst = 0.0
    for s in _seeds(seed + 1, n):
        dim = int(rng.integers(1, max_dim + 1))
        N = int(rng.integers(2, max_N + 1))
        A = random_hermitian(dim, s)
        meter = mt.MeterModel(N, float(rng.uniform(0.05, 0.5)), float(rng.uniform(0.1, 1.0)))
        direct = mt.interaction_unitary(A, meter)
        assembled = mt.assemble_backaction(mt.backaction_decomposition(A, meter))
        worst = max(worst, float(np.linalg.norm(direct - assembled, 2)))
    return SuiteResult("representation_equivalence", worst < tol,
                       {"max_operator_norm_residual": worst, "instances": n}, {"residual": tol})


def random_context(rng, seed, min_dim=2, max_dim=6, min_prob=1e-4):
    """Random (A, psi, f) and a back-action phi with ``P(phi) >= min_prob``."""
    dim = int(rng.integers(min_dim, max_dim + 1))
    sub = _seeds(seed, 3)
    ctx = ba.BackActionContext(random_hermitian(dim, sub[0]), random_state(dim, sub[1]),
                               random_state(dim, sub[2]))
    while True:
        phi = float(rng.uniform(-np.pi, np.pi))
        if ba.probability(ctx, phi) >= min_prob:
            return ctx, phi


def hamilton_jacobi(seed, n=100, h=1e-4, tol=1e-6, fault=False):
    """Finite-difference slope of the action vs the real weak value.

    Also fits the log-log slope of the plain central-difference residual over
    steps 0.02, 0.01, 0.005 (expected 2).
    """
    rng = _rng(seed, 2)
    worst = 0.0
    orders = []
    for s in _seeds(seed + 2, n):
        ctx, phi = random_context(rng, s)
        w = ba.weak_value(ctx, phi).real
        if fault:
            w = -w
        slope = ba.action_slope(ctx, phi, h, richardson=True)
        worst = max(worst, abs(-slope - w))
        steps = np.array([0.02, 0.01, 0.005])
        res = np.array([ba.hj_residual(ctx, phi, k, richardson=False) for k in steps])
        if res[-1] > 1e-9:
            orders.append(float(np.polyfit(np.log(steps), np.log(res), 1)[0]))
    median_order = float(np.median(orders))
    passed = worst < tol and abs(median_order - 2) < 0.1
    return SuiteResult("hamilton_jacobi", passed,
                       {"max_residual": worst, "median_convergence_order": median_order,
                        "order_samples": len(orders)},
                       {"residual": tol, "order": "2 +/- 0.1"})


def joint_amplitude_equivalence(seed, n=100, tol=1e-10):
    """Factorized meter sum vs brute-force evolution in the joint space."""
    rng = _rng(seed, 3)
    worst = 0.0
    for s in _seeds(seed + 3, n):
        dim = int(rng.integers(2, 5))
        N = int(rng.integers(2, 17))
        sub = _seeds(s, 4)
        ctx = ba.BackActionContext(random_hermitian(dim, sub[0]), random_state(dim, sub[1]),
                                   random_state(dim, sub[2]))
        meter = mt.MeterModel(N, float(rng.uniform(0.1, 1.0)), float(rng.uniform(0.2, 2.0)))
        phi_M = random_state(N, sub[3])
        m = int(rng.integers(N))
        diff = abs(mt.joint_amplitude(ctx, meter, phi_M, m) - mt.joint_amplitude_oracle(ctx, meter, phi_M, m))
        worst = max(worst, diff)
    return SuiteResult("joint_amplitude", worst < tol, {"max_deviation": worst, "instances": n},
                       {"deviation": tol})


def stern_gerlach(seed, n=20, points=1000, tol=1e-9):
    """Generic engine on spin-1/2 vs the closed forms, plus the anomalous example."""
    rng = _rng(seed, 4)
    grid = np.linspace(-np.pi + 0.1, np.pi - 0.1, points)
    worst = {"amplitude": 0.0, "probability": 0.0, "action": 0.0, "weak_value": 0.0}
    skipped = 0
    for _ in range(n):
        s = sc.SternGerlachScenario.from_angle(float(rng.uniform(-np.pi / 2, np.pi / 2)))
        report = sc.crosscheck_stern_gerlach(s, grid)
        skipped += len(report.skipped)
        for key, value in report.residuals.items():
            worst[key] = max(worst[key], value)
    anomalous = sc.SternGerlachScenario(0.8, -0.6)
    w0 = sc.sg_W0(anomalous)
    wv = ba.weak_value(anomalous.context(), 0.0)
    anomalous_ok = abs(w0 - 7) < 1e-12 and abs(wv - 3.5 * anomalous.hbar) < 1e-12
    passed = max(worst.values()) < tol and anomalous_ok
    metrics = {f"max_{k}_residual": v for k, v in worst.items()}
    metrics.update({"skipped_points": skipped, "W0": w0, "weak_value_real": wv.real,
                    "weak_value_imag": wv.imag})
    return SuiteResult("stern_gerlach", passed, metrics,
                       {"residual": tol, "W0": "7 +/- 1e-12", "weak_value": "3.5 hbar +/- 1e-12"})


def free_particle(seed, tol=1e-10):
    """Closed-form action, trajectory and fluctuation floor of the free particle."""
    rng = _rng(seed, 5)
    worst_pos = worst_curv = 0.0
    for _ in range(20):
        s = sc.FreeParticleScenario(m=float(rng.uniform(0.1, 3)), t=float(rng.uniform(0.1, 3)),
                                    x1=float(rng.uniform(-2, 2)), x2=float(rng.uniform(-2, 2)))
        ps = rng.uniform(-3, 3, 50)
        report = sc.crosscheck_free_particle(s, ps, h=0.1)
        worst_pos = max(worst_pos, report.residuals["position"])
        curv = (sc.fp_action(s, ps + 1) - 2 * sc.fp_action(s, ps) + sc.fp_action(s, ps - 1))
        worst_curv = max(worst_curv, float(np.max(np.abs(curv - sc.fp_curvature(s)))))
    floor = sc.fp_min_fluctuation(sc.FreeParticleScenario(m=0.25, t=1.0))
    passed = worst_pos < tol and worst_curv < 1e-12 and floor == 1.0
    return SuiteResult("free_particle", passed,
                       {"max_position_residual": worst_pos, "max_curvature_residual": worst_curv,
                        "min_fluctuation_m0.25_t1": floor},
                       {"position": tol, "curvature": 1e-12, "min_fluctuation": "== 1"})


def eigenvalue_emergence(seed, widths=EMERGENCE_WIDTHS, tol_tv=1e-3, tol_proj=1e-2, floor=1e-12):
    """Born-rule masses and projector emergence as the meter widens."""
    A = Observable(pauli("z") / 2)
    psi = StateVector(np.array([np.sqrt(0.3), np.sqrt(0.7)]))
    f = StateVector.from_amplitudes([1.0, 2.0])
    unconditional = mt.born_rule_study(A, psi, widths)
    post = mt.born_rule_study(A, psi, widths, f=f)
    meters = [mt.design_gaussian_meter(w, 0.5) for w in widths]
    proj = mt.projector_emergence_check(A, meters, floor=floor)
    tv_u = [row["tv_error"] for row in unconditional]
    tv_p = [row["tv_error"] for row in post]
    checks = [
        mt.is_nonincreasing(tv_u, floor), tv_u[-1] < tol_tv,
        mt.is_nonincreasing(tv_p, floor), tv_p[-1] < tol_tv,
        proj.monotone, proj.distances[-1] < tol_proj,
    ]
    return SuiteResult("eigenvalue_emergence", all(checks),
                       {"widths": list(widths), "tv_unconditional": tv_u, "tv_post_selected": tv_p,
                        "projector_distance": proj.distances,
                        "masses_widest": unconditional[-1]["masses"].tolist()},
                       {"tv": tol_tv, "projector": tol_proj, "monotone_floor": floor})


def tradeoff(seed, tol_analytic=1e-10, tol_sim=0.10):
    """Analytic minimum of the quadrature sum, and the simulated Stern-Gerlach readout."""
    rng = _rng(seed, 7)
    worst = 0.0
    for s in _seeds(seed + 7, 20):
        ctx, phi = random_context(rng, s)
        curv = ba.action_curvature(ctx, phi)
        _, minimum = un.minimize_total_fluctuation(curv, ctx.hbar)
        closed = un.total_fluctuation(curv, un.optimal_delta_phi(curv, ctx.hbar), ctx.hbar)
        floor = un.minimal_fluctuation_from_curvature(curv, ctx.hbar)
        worst = max(worst, abs(minimum - floor) / floor, abs(closed - floor) / floor)
    ctx = sc.SternGerlachScenario.from_angle(SG_TRADEOFF_THETA).context()
    weak = np.linspace(0.05, 0.3, 11)
    reports = un.tradeoff_sweep(ctx, weak, phi_bar=SG_TRADEOFF_PHI_BAR)
    weak_dev = max(abs(r.empirical_delta_A / r.delta_A_total - 1) for r in reports)
    scan = np.geomspace(0.05, 10.0, 120)
    reports = un.tradeoff_sweep(ctx, scan, phi_bar=SG_TRADEOFF_PHI_BAR)
    emp = np.array([r.empirical_delta_A for r in reports])
    i = int(np.argmin(emp))
    min_ratio = float(emp[i] / reports[i].bound_floor)
    passed = worst < tol_analytic and weak_dev < tol_sim and abs(min_ratio - 1) < tol_sim
    return SuiteResult("tradeoff", passed,
                       {"max_analytic_minimum_rel_error": worst, "weak_regime_max_rel_dev": weak_dev,
                        "empirical_min_over_floor": min_ratio, "sigma_at_min": float(scan[i]),
                        "sigma_optimal": un.optimal_delta_phi(ba.action_curvature(ctx, SG_TRADEOFF_PHI_BAR))},
                       {"analytic": tol_analytic, "simulation": tol_sim})


def completeness(seed, n=10, tol=1e-10):
    """P-weighted weak values over a complete basis average to the expectation value."""
    rng = _rng(seed, 8)
    worst = 0.0
    for s in _seeds(seed + 8, n):
        dim = int(rng.integers(2, 7))
        sub = _seeds(s, 3)
        A = random_hermitian(dim, sub[0])
        psi = random_state(dim, sub[1])
        basis = random_hermitian(dim, sub[2]).decomposition.eigenvectors
        for phi in rng.uniform(-np.pi, np.pi, 5):
            total = 0.0
            for k in range(dim):
                ctx = ba.BackActionContext(A, psi, basis[:, k])
                total += ba.probability(ctx, phi) * ba.weak_value(ctx, phi).real
            U = unitary_from_generator(A, phi)
            evolved = U @ psi.amplitudes
            expect = np.vdot(evolved, A.matrix @ evolved).real
            worst = max(worst, abs(total - expect))
    return SuiteResult("completeness", worst < tol, {"max_deviation": worst, "systems": n},
                       {"deviation": tol})


SUITES = {
    "representation_equivalence": representation_equivalence,
    "hamilton_jacobi": hamilton_jacobi,
    "joint_amplitude": joint_amplitude_equivalence,
    "stern_gerlach": stern_gerlach,
    "free_particle": free_particle,
    "eigenvalue_emergence": eigenvalue_emergence,
    "tradeoff": tradeoff,
    "completeness": completeness,
}


def run_all(seed=0, fault=False, names=None):
    results = []
    for name, suite in SUITES.items():
        if names and name not in names:
            continue
        if name == "hamilton_jacobi":
            results.append(suite(seed, fault=fault))
        else:
            results.append(suite(seed))
    return results

"""Monitored quantities: conserved energy, growth bounds, the higher-order
blow-up functional, interpolation-inequality ratios, the log-Sobolev bound,
Gronwall envelopes, and the two-trajectory difference energy.

All ratio checks use homogeneous derivative norms (Frobenius over the full
derivative stack) so that a pure Fourier mode makes every factor a clean
power of its wavenumber.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import grid as sg
from .dynamics import rhs_projector
from .errors import Degenerate, GridMismatch

DRIFT_EPS = 1e-30
DEGENERATE_EPS = 1e-30

GN_NAMES = {1: ("grad_inf", "hess_inf", "ut_inf"), 2: ("lap_inf", "ut_inf", "grad_inf", "grad_l4", "grad_ut_l4")}

E_CONST = math.e


def energy(s):
    """Conserved energy (1/2) (|u_t|_L2^2 + |lap u|_L2^2)."""
    return 0.5 * (sg.lebesgue_norm(s.ut, 2) ** 2 + sg.homogeneous_norm(s.u, 2) ** 2)


def grad_l2_sq(s):
    return sg.homogeneous_norm(s.u, 1) ** 2


def grad_sup(s):
    """h(t): sup-norm of the pointwise Frobenius magnitude of grad u."""
    return sg.lebesgue_norm(sg.stack_fields(sg.gradient(s.u)), np.inf)


def cal_E(s):
    """Higher-order monitor: |lap u_t| + |lap^2 u| in 2-d, the gradient-level
    analogue |grad u_t| + |grad lap u| in 1-d."""
    if s.grid.dim == 2:
        return sg.homogeneous_norm(s.ut, 2) + sg.homogeneous_norm(s.u, 4)
    return sg.homogeneous_norm(s.ut, 1) + sg.homogeneous_norm(s.u, 3)


def _ratio(num, den, name, degenerate):
    if not den > DEGENERATE_EPS:
        degenerate.add(name)
        return 0.0
    return num / den


@dataclass
class GNResult:
    ratios: dict
    degenerate: frozenset

    def __getitem__(self, name):
        return self.ratios[name]


def gn_check(s):
    """Left/right ratios of the interpolation inequalities for this dimension.

    Zero denominators yield ratio 0 and the name is flagged degenerate.
    """
    u, ut = s.u, s.ut
    deg = set()
    ratios = {}
    if s.grid.dim == 2:
        lap = sg.laplacian(u)
        lap_inf = sg.lebesgue_norm(lap, np.inf)
        d3 = sg.homogeneous_norm(u, 3)
        d4 = sg.homogeneous_norm(u, 4)
        lap_l2 = sg.homogeneous_norm(u, 2)
        grad = sg.stack_fields(sg.gradient(u))
        grad_inf = sg.lebesgue_norm(grad, np.inf)
        grad_l2 = sg.homogeneous_norm(u, 1)
        grad_l4 = sg.lebesgue_norm(grad, 4)
        ut_inf = sg.lebesgue_norm(ut, np.inf)
        ut_l2 = sg.lebesgue_norm(ut, 2)
        lap_ut = sg.homogeneous_norm(ut, 2)
        grad_ut_l4 = sg.lebesgue_norm(sg.stack_fields(sg.gradient(ut)), 4)
        ratios["lap_inf"] = _ratio(lap_inf + d3, d4**0.5 * lap_l2**0.5, "lap_inf", deg)
        ratios["ut_inf"] = _ratio(ut_inf, lap_ut**0.5 * ut_l2**0.5, "ut_inf", deg)
        ratios["grad_inf"] = _ratio(grad_inf, d4 ** (1 / 3) * grad_l2 ** (2 / 3), "grad_inf", deg)
        ratios["grad_l4"] = _ratio(grad_l4, d4 ** (1 / 6) * grad_l2 ** (5 / 6), "grad_l4", deg)
        ratios["grad_ut_l4"] = _ratio(grad_ut_l4, lap_ut**0.75 * ut_l2**0.25, "grad_ut_l4", deg)
    else:
        grad = sg.stack_fields(sg.gradient(u))
        grad_inf = sg.lebesgue_norm(grad, np.inf)
        grad_l2 = sg.homogeneous_norm(u, 1)
        hess = sg.stack_fields(sg.hessian_fields(u))
        hess_inf = sg.lebesgue_norm(hess, np.inf)
        hess_l2 = sg.homogeneous_norm(u, 2)
        d4 = sg.homogeneous_norm(u, 4)
        ut_inf = sg.lebesgue_norm(ut, np.inf)
        ut_l2 = sg.lebesgue_norm(ut, 2)
        grad_ut = sg.homogeneous_norm(ut, 1)
        ratios["grad_inf"] = _ratio(grad_inf, hess_l2**0.5 * grad_l2**0.5, "grad_inf", deg)
        ratios["hess_inf"] = _ratio(hess_inf, d4**0.25 * hess_l2**0.75, "hess_inf", deg)
        ratios["ut_inf"] = _ratio(ut_inf, grad_ut**0.5 * ut_l2**0.5, "ut_inf", deg)
    return GNResult(ratios=ratios, degenerate=frozenset(deg))


def bgw_check(s):
    """Log-corrected sup bound ratio for grad u in 2-d:
    h / [ |grad u|_H1 (1 + log^(1/2)(1 + |grad u|_H2^2 / |grad u|_H1^2)) ].
    """
    if s.grid.dim != 2:
        raise ValueError("bgw_check is defined for dim 2 only")
    grad = sg.stack_fields(sg.gradient(s.u))
    h1 = sg.sobolev_norm(grad, 1)
    if not h1 > DEGENERATE_EPS:
        raise Degenerate("gradient vanishes identically")
    h2 = sg.sobolev_norm(grad, 2)
    h = sg.lebesgue_norm(grad, np.inf)
    return h / (h1 * (1.0 + math.sqrt(math.log1p(h2**2 / h1**2))))


@dataclass
class ScalingCheck:
    E_original: float
    E_scaled: float
    measured_ratio: float
    predicted_ratio_fixed_box: float  # lambda^4: box measure is unchanged
    predicted_ratio_rn: float  # lambda^(4-n): whole-space convention


def rescale_state(s, lam):
    """u_lam(x) = u(lam x), u_lam_t = lam^2 u_t(lam x) by exact index gather
    (lam integer keeps lam*x on the grid)."""
    if lam != int(lam) or lam < 1:
        raise ValueError("lambda must be a positive integer")
    lam = int(lam)
    g = s.grid
    m = g.points_per_axis
    idx = (lam * np.arange(m)) % m
    if g.dim == 1:
        u = s.u.values[idx]
        ut = s.ut.values[idx]
    else:
        u = s.u.values[np.ix_(idx, idx)]
        ut = s.ut.values[np.ix_(idx, idx)]
    from .dynamics import SimulationState

    return SimulationState(
        u=sg.GridField(g, u), ut=sg.GridField(g, lam**2 * ut), time=s.time
    )


def scaling_energy_check(s, lam):
    """Energy behavior under the parabolic rescaling, reported in both the
    fixed-box (measured directly) and whole-space conventions."""
    scaled = rescale_state(s, lam)
    e0 = energy(s)
    e1 = energy(scaled)
    measured = e1 / e0 if e0 > 0 else math.nan
    n = s.grid.dim
    return ScalingCheck(
        E_original=e0,
        E_scaled=e1,
        measured_ratio=measured,
        predicted_ratio_fixed_box=float(lam) ** 4,
        predicted_ratio_rn=float(lam) ** (4 - n),
    )


@dataclass
class GronwallReport:
    envelope: np.ndarray
    monitored: np.ndarray
    violated: np.ndarray

    @property
    def any_violation(self):
        return bool(self.violated.any())


def gronwall_envelope(history, C, dim):
    """Admissible envelopes for the higher-order monitor along a history.

    dim 2: log(e + cal_E^2(t)) <= exp(C (t-t0)) log(e + cal_E^2(t0));
    dim 1: 1 + cal_E(t) <= exp(C (t-t0)) (1 + cal_E(t0)).
    Returns per-record envelope values, the monitored quantity, and flags.
    """
    if not history:
        raise ValueError("history must be nonempty")
    times = np.array([r.time for r in history])
    if np.any(np.diff(times) <= 0) and len(times) > 1:
        raise ValueError("history times must be increasing")
    cal = np.array([r.cal_E for r in history])
    if dim == 2:
        monitored = np.log(E_CONST + cal**2)
    else:
        monitored = 1.0 + cal
    env = np.exp(C * (times - times[0])) * monitored[0]
    violated = monitored > env * (1.0 + 1e-12)
    return GronwallReport(envelope=env, monitored=monitored, violated=violated)


def uniqueness_energy(a, b):
    """Difference energy (|w_t|_L2^2 + |w|_H2^2)^(1/2) with w = u_a - u_b."""
    if a.grid != b.grid:
        raise GridMismatch(f"{a.grid} vs {b.grid}")
    w = a.u - b.u
    wt = a.ut - b.ut
    return math.sqrt(sg.lebesgue_norm(wt, 2) ** 2 + sg.sobolev_norm(w, 2) ** 2)


@dataclass
class DiagnosticsRecord:
    time: float
    energy: float
    energy_rel_drift: float
    grad_l2_sq: float
    cal_E: float
    h: float
    constraint_max: float
    tangent_max: float
    ortho_residual: float
    gn_ratios: dict
    bgw_ratio: float
    gronwall_envelope: float
    gronwall_violated: bool
    gn_degenerate: frozenset = field(default_factory=frozenset)


@dataclass
class Baseline:
    """Quantities frozen at t0 that later records are compared against."""

    time: float
    energy: float
    cal_E: float

    @property
    def log_monitor(self):
        return math.log(E_CONST + self.cal_E**2)

    @property
    def lin_monitor(self):
        return 1.0 + self.cal_E


def compute_record(m, s, baseline=None, gronwall_C=0.0, dealias_fraction=2.0 / 3.0):
    """Evaluate every monitored quantity on one state.

    The orthogonality residual is always taken through the generic projector
    assembly (the sphere fast path is normal by construction, so it would
    report nothing). Returns (record, baseline); pass baseline=None at t0.
    """
    e = energy(s)
    ce = cal_E(s)
    if baseline is None:
        baseline = Baseline(time=s.time, energy=e, cal_E=ce)
    drift = abs(e - baseline.energy) / max(baseline.energy, DRIFT_EPS)

    F = rhs_projector(m, s, dealias_fraction)
    utt = sg.GridField(s.grid, F.values - sg.bilaplacian(s.u).values, copy=False)
    from .dynamics import orthogonality_residual

    ortho = orthogonality_residual(m, s, utt)

    gn = gn_check(s)
    if s.grid.dim == 2:
        try:
            bgw = bgw_check(s)
        except Degenerate:
            bgw = 0.0
    else:
        bgw = 0.0

    dt_rel = s.time - baseline.time
    if s.grid.dim == 2:
        env = math.exp(gronwall_C * dt_rel) * baseline.log_monitor
        violated = math.log(E_CONST + ce**2) > env * (1.0 + 1e-12)
    else:
        env = math.exp(gronwall_C * dt_rel) * baseline.lin_monitor
        violated = (1.0 + ce) > env * (1.0 + 1e-12)

    rec = DiagnosticsRecord(
        time=s.time,
        energy=e,
        energy_rel_drift=drift,
        grad_l2_sq=grad_l2_sq(s),
        cal_E=ce,
        h=grad_sup(s),
        constraint_max=s.constraint_max(m),
        tangent_max=s.tangent_max(m),
        ortho_residual=ortho,
        gn_ratios=gn.ratios,
        bgw_ratio=bgw,
        gronwall_envelope=env,
        gronwall_violated=violated,
        gn_degenerate=gn.degenerate,
    )
    return rec, baseline


def csv_header(dim):
    cols = [
        "time",
        "energy",
        "energy_rel_drift",
        "grad_l2_sq",
        "cal_E",
        "h",
        "constraint_max",
        "tangent_max",
        "ortho_residual",
    ]
    cols += [f"gn_{name}" for name in GN_NAMES[dim]]
    cols += ["bgw_ratio", "gronwall_envelope", "gronwall_violated"]
    return cols


def record_to_row(rec, dim):
    vals = [
        rec.time,
        rec.energy,
        rec.energy_rel_drift,
        rec.grad_l2_sq,
        rec.cal_E,
        rec.h,
        rec.constraint_max,
        rec.tangent_max,
        rec.ortho_residual,
    ]
    vals += [rec.gn_ratios[name] for name in GN_NAMES[dim]]
    vals += [rec.bgw_ratio, rec.gronwall_envelope]
    return [f"{v:.17g}" for v in vals] + ["1" if rec.gronwall_violated else "0"]


def write_csv(path, records, dim, comments=()):
    with open(path, "w", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(csv_header(dim)) + "\n")
        for rec in records:
            fh.write(",".join(record_to_row(rec, dim)) + "\n")

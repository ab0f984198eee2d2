"""Experiment driver: single runs with CSV/snapshot output, and the
convergence, scaling and perturbation studies plus the invariants suite."""

import datetime
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import diagnostics as dg
from . import grid as sg
from .dynamics import SimulationState
from .errors import DiscreteBlowup, TubeExceeded, ValidationError
from .initial import make_initial, traveling_wave_state
from .integrator import evolve
from .kernels import dot_last
from .snapshot import write_snapshot


def _thread_count():
    try:
        return max(1, int(os.environ.get("BWM_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Map over independent work items; BWM_THREADS caps the pool size."""
    items = list(items)
    n = min(_thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


@dataclass
class RunResult:
    exit_code: int
    records: list
    final_state: object = None
    csv_path: str = None
    error: object = None
    u0_l2_dist: list = None  # |u(t) - u0|_L2 at each record time


def run(cfg, out_dir=None, quiet=True, gronwall_C=None):
    """Execute one configured simulation.

    Writes the diagnostics CSV (and optional final snapshot) when an output
    location is configured; on discrete blow-up the partial CSV ends with a
    row stamped with the failure time and exit code 2 is reported.
    """
    state0 = make_initial(cfg)
    if gronwall_C is None:
        from .calibration import load_constants

        gronwall_C = load_constants()["gronwall_C"][str(cfg.dim)]

    records = []
    u0_l2 = []
    baseline = None
    u0 = state0.u

    def observer(s):
        nonlocal baseline
        rec, baseline = dg.compute_record(
            cfg.manifold, s, baseline, gronwall_C, cfg.scheme.dealias_fraction
        )
        records.append(rec)
        u0_l2.append(sg.lebesgue_norm(s.u - u0, 2))
        if not quiet:
            print(
                f"t={rec.time:9.4f}  E={rec.energy:.9e}  drift={rec.energy_rel_drift:.3e}  "
                f"calE={rec.cal_E:.6e}  h={rec.h:.4e}"
            )

    exit_code = 0
    error = None
    final = None
    try:
        final = evolve(cfg.manifold, state0, cfg.scheme, cfg.t_end, observer, cfg.output_every)
    except DiscreteBlowup as exc:
        exc.last_record = records[-1] if records else None
        error = exc
        exit_code = 2
        if records:
            records.append(replace(records[-1], time=exc.time))

    csv_path = None
    if out_dir is not None or cfg.csv_path is not None:
        name = cfg.csv_path or "diagnostics.csv"
        csv_path = os.path.join(out_dir, name) if out_dir is not None else name
        os.makedirs(os.path.dirname(csv_path) or ".", exist_ok=True)
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
        dg.write_csv(csv_path, records, cfg.dim, comments=(f"generated {stamp}",))
    if cfg.snapshot_path is not None and final is not None:
        snap = os.path.join(out_dir, cfg.snapshot_path) if out_dir is not None else cfg.snapshot_path
        os.makedirs(os.path.dirname(snap) or ".", exist_ok=True)
        write_snapshot(snap, final)

    return RunResult(
        exit_code=exit_code,
        records=records,
        final_state=final,
        csv_path=csv_path,
        error=error,
        u0_l2_dist=u0_l2,
    )


def _sup_distance(a, b):
    diff = a.values - b.values
    return float(np.sqrt(dot_last(diff, diff)).max())


@dataclass
class ConvergenceReport:
    temporal: list = field(default_factory=list)  # (dt, sup_error)
    spatial: list = field(default_factory=list)  # (M, sup_error)
    fitted_order: float = math.nan

    def format_table(self):
        lines = ["dt            sup_error"]
        lines += [f"{dt:<13g} {e:.6e}" for dt, e in self.temporal]
        if self.temporal:
            lines.append(f"fitted temporal order: {self.fitted_order:.3f}")
        lines.append("M             sup_error")
        lines += [f"{M:<13d} {e:.6e}" for M, e in self.spatial]
        return "\n".join(lines)


def study_convergence(cfg, dt_list=(4e-3, 2e-3, 1e-3), m_list=(8, 16, 32)):
    """Temporal/spatial error table against the exact traveling-wave family."""
    if cfg.initial.family != "traveling_wave":
        raise ValidationError("initial", "convergence study needs the traveling_wave family")
    report = ConvergenceReport()
    if cfg.t_end == 0:
        return report
    k = cfg.initial.params["k"]
    omega = cfg.initial.params["omega"]
    axes = cfg.initial.params["axes"]

    def wave_error(c):
        final = evolve(c.manifold, make_initial(c), c.scheme, c.t_end)
        exact = traveling_wave_state(c.grid, c.manifold, k, omega, axes, t=c.t_end)
        return _sup_distance(final.u, exact.u)

    for dt in dt_list:
        report.temporal.append((dt, wave_error(cfg.with_updates(dt=dt))))
    errs = np.array([e for _, e in report.temporal])
    dts = np.array([d for d, _ in report.temporal])
    if len(dts) >= 2 and np.all(errs > 0):
        report.fitted_order = float(np.polyfit(np.log(dts), np.log(errs), 1)[0])
    dt_fine = min(dt_list)
    for M in m_list:
        report.spatial.append((M, wave_error(cfg.with_updates(grid_size=M, dt=dt_fine))))
    return report


@dataclass
class ScalingReport:
    lam: int
    energy_check: dg.ScalingCheck
    snapshot_errors: list  # (t_scaled, sup_error)
    max_error: float


def study_scaling(cfg, lam, gronwall_C=0.0):
    """Trajectory correspondence under u_lam(t, x) = u(lam^2 t, lam x).

    The base run is compared, after exact index resampling, against the
    run started from the rescaled data on the same box; output cadences
    are aligned so snapshots pair up one-to-one.
    """
    lam = int(lam)
    if lam < 1:
        raise ValidationError("lambda", "must be a positive integer")
    base0 = make_initial(cfg)
    check = dg.scaling_energy_check(base0, lam)

    base_states = []
    evolve(cfg.manifold, base0, cfg.scheme, cfg.t_end, base_states.append, cfg.output_every)

    lam2 = lam * lam
    scaled0 = dg.rescale_state(base0, lam)
    scaled_cfg = cfg.with_updates(dt=cfg.scheme.dt / lam2)
    scaled_cfg = replace(scaled_cfg, t_end=cfg.t_end / lam2, output_every=cfg.output_every / lam2)
    scaled_states = []
    evolve(
        scaled_cfg.manifold,
        scaled0,
        scaled_cfg.scheme,
        scaled_cfg.t_end,
        scaled_states.append,
        scaled_cfg.output_every,
    )

    errors = []
    for sb, ss in zip(base_states, scaled_states):
        resampled = dg.rescale_state(sb, lam)
        errors.append((ss.time, _sup_distance(ss.u, resampled.u)))
    max_err = max((e for _, e in errors), default=0.0)
    return ScalingReport(lam=lam, energy_check=check, snapshot_errors=errors, max_error=max_err)


def perturb_state(manifold, state, delta, direction_axis=0, width=1.0):
    """Tangent-bump perturbation retracted onto the manifold (tube-checked)."""
    u0 = state.u.values
    L = u0.shape[-1]
    e = np.zeros(L)
    e[direction_axis] = 1.0
    P = manifold.tangent_projector(u0)
    t = np.einsum("...ab,b->...a", P, e)
    from .initial import _periodic_bump

    phi = _periodic_bump(state.grid, width)
    u_new = manifold.retract(u0 + delta * phi[..., None] * t)
    P_new = manifold.tangent_projector(u_new)
    ut_new = np.einsum("...ab,...b->...a", P_new, state.ut.values)
    return SimulationState(
        u=sg.GridField(state.grid, u_new), ut=sg.GridField(state.grid, ut_new), time=state.time
    )


@dataclass
class PerturbationRow:
    delta: float
    ew0: float
    growth: float  # G(delta) = sup_t Ew(t) / Ew(0)
    error: str = None


@dataclass
class PerturbationReport:
    rows: list

    @property
    def growth_spread(self):
        gs = [r.growth for r in self.rows if r.error is None and r.ew0 > 0]
        return max(gs) / min(gs) if gs else math.nan


def study_perturbation(cfg, deltas):
    """Two-trajectory stability: for each delta, evolve base and perturbed
    data and report the worst difference-energy growth factor."""
    base0 = make_initial(cfg)
    base_states = []
    evolve(cfg.manifold, base0, cfg.scheme, cfg.t_end, base_states.append, cfg.output_every)

    def one(delta):
        if delta == 0.0:
            pert0 = base0
        else:
            try:
                pert0 = perturb_state(cfg.manifold, base0, delta)
            except TubeExceeded as exc:
                return PerturbationRow(delta, math.nan, math.nan, error=str(exc))
        ew0 = dg.uniqueness_energy(base0, pert0)
        pert_states = []
        try:
            evolve(cfg.manifold, pert0, cfg.scheme, cfg.t_end, pert_states.append, cfg.output_every)
        except DiscreteBlowup as exc:
            return PerturbationRow(delta, ew0, math.nan, error=str(exc))
        ews = [dg.uniqueness_energy(a, b) for a, b in zip(base_states, pert_states)]
        growth = max(ews) / ew0 if ew0 > 0 else (0.0 if max(ews) == 0 else math.inf)
        return PerturbationRow(delta, ew0, growth)

    return PerturbationReport(rows=parallel_map(one, deltas))


def invariants_suite(seed=12345):
    """Fast numeric property checks over geometry and grid; returns
    (name, passed, detail) triples for the CLI pass/fail table."""
    from .geometry import Sphere, TorusOfRevolution

    rng = np.random.default_rng(seed)
    checks = []

    def add(name, value, bound):
        checks.append((name, bool(value <= bound), f"{value:.3e} <= {bound:.0e}"))

    for m in (Sphere(3), TorusOfRevolution(2.0, 0.5)):
        pts = m.random_point(rng, (10_000,))
        P = m.tangent_projector(pts)
        add(f"{m}: projector symmetry", np.abs(P - np.swapaxes(P, -1, -2)).max(), 1e-12)
        add(f"{m}: projector idempotence", np.abs(np.einsum("pab,pbc->pac", P, P) - P).max(), 1e-10)
        trace = np.einsum("paa->p", P)
        add(f"{m}: projector trace", np.abs(trace - m.manifold_dim).max(), 1e-10)
        v = rng.standard_normal(pts.shape)
        tv = np.einsum("pab,pb->pa", P, v)
        residual = tv - np.einsum("pab,pb->pa", P, tv)
        add(f"{m}: tangent annihilation", np.sqrt(dot_last(residual, residual)).max(), 1e-10)
        add(
            f"{m}: retract idempotence",
            np.abs(m.retract(m.project(pts + 0.05 * v)) - m.project(pts + 0.05 * v)).max(),
            1e-12,
        )

    m = Sphere(3)
    pts = m.random_point(rng, (1_000,))
    jet = m.projector_jet(pts)
    w = np.einsum("pab,pb->pa", jet.P, rng.standard_normal(pts.shape))
    closed = np.einsum("pabc,pc->pab", jet.dP, w)
    h = 1e-5
    fd = (m.tangent_projector(m.project(pts + h * w)) - m.tangent_projector(m.project(pts - h * w))) / (2 * h)
    add("Sphere(3): closed-form dP vs finite differences", np.abs(closed - fd).max(), 1e-7)

    g = sg.Grid(2, 32)
    X, Y = g.meshgrid()
    f = sg.GridField(g, np.stack([np.cos(2 * X) * np.sin(Y), np.sin(X + 3 * Y)], axis=-1))
    gx, gy = sg.gradient(f)
    exact_gx = np.stack([-2 * np.sin(2 * X) * np.sin(Y), np.cos(X + 3 * Y)], axis=-1)
    add("grid: spectral gradient exactness", np.abs(gx.values - exact_gx).max(), 1e-12)
    add(
        "grid: bilaplacian = laplacian^2",
        np.abs(sg.bilaplacian(f).values - sg.laplacian(sg.laplacian(f)).values).max(),
        1e-10,
    )
    add(
        "grid: parseval",
        abs(sg.sobolev_norm(f, 0) - sg.lebesgue_norm(f, 2)),
        1e-12,
    )
    lap_grad = sg.laplacian(gx)
    grad_lap = sg.gradient(sg.laplacian(f))[0]
    add("grid: laplacian/gradient commute", np.abs(lap_grad.values - grad_lap.values).max(), 1e-10)
    mono = all(
        sg.sobolev_norm(f, s) <= sg.sobolev_norm(f, s + 1) * (1 + 1e-12) for s in range(0, 4)
    )
    checks.append(("grid: sobolev monotonicity in s", mono, "s=0..4"))
    add("grid: dealias fraction 1 identity", np.abs(sg.dealias(f, 1.0).values - f.values).max(), 0.0)
    add(
        "grid: dealias below cutoff unchanged",
        np.abs(sg.dealias(f, 2.0 / 3.0).values - f.values).max(),
        1e-12,
    )
    return checks

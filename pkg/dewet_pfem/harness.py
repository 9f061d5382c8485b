"""
Module: harness.py

Trajectory drivers and the convergence studies built on them.

evolve runs a fixed number of steps and records the diagnostics time series;
evolve_to_equilibrium runs until the energy decay rate drops below epsilon
and the equilibrium residual below residual_tol.
The studies (cauchy_study, wulff_study, angle_convergence_study,
equilibrium_sweep) run one trajectory per refinement level, optionally in a
process pool, and reduce the results in level order.
"""
import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

from . import scheme_type
from .curve import (
    ShapeSpec,
    diagnostics,
    enclosed_area,
    from_shape,
    write_curve_csv,
)
from .exceptions import (
    EquilibriumNotReached,
    HarnessError,
    ParameterError,
    StepFailure,
    TrajectoryError,
)
from .metrics import ANGLES, CAUCHY, WULFF, ConvergenceReport, manifold_distance, wulff_shape
from .schemes import DEFAULT_ETA, SchemeParams, equilibrium_residual, make_stepper


logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-12
DEFAULT_MAX_STEPS = 10 ** 7
DEFAULT_N_REF = 8192

# relative slack under which T/tau counts as an integer
STEP_TOL = 1e-9
ENERGY_TOL = 1e-12
DEFAULT_RESIDUAL_TOL = 1e-8

DIAGNOSTICS_CSV_HEADER = ('t', 'W', 'A', 'dA_rel', 'Psi', 'theta_l', 'theta_r')


def step_count(T, tau):  # pylint: disable=invalid-name
    """Number of steps to reach T; T is snapped to the nearest multiple of tau."""
    if T < 0:
        raise ParameterError(f"T must be nonnegative, got {T}")
    ratio = T / tau
    steps = int(round(ratio))
    if abs(ratio - steps) > STEP_TOL * max(1.0, ratio):
        logger.warning("T = %g is not a multiple of tau = %g, snapped to %g",
                       T, tau, steps * tau)
    return steps


class DiagnosticsRow(NamedTuple):
    step: int
    t: float
    energy: float
    area: float
    area_change: float
    mesh_ratio: float
    theta_left: float
    theta_right: float


@dataclass
class TrajectoryRecord:
    """
    Diagnostics of one trajectory.

    rows -- sampled every `stride` steps, always at m = 0 and the last step
    energies -- W^m for every step, independent of the stride
    snapshots -- curves at the sampled steps, when kept
    checkpoints -- curves captured at requested times
    """
    scheme: str
    params: SchemeParams
    stride: int = 1
    rows: List[DiagnosticsRow] = field(default_factory=list)
    energies: List[float] = field(default_factory=list)
    snapshots: Dict[int, object] = field(default_factory=dict)
    checkpoints: Dict[float, object] = field(default_factory=dict)
    final_curve: object = None
    final_kappa: object = None
    max_energy_increase: float = 0.0
    equilibrium_residual: Optional[float] = None

    @property
    def steps(self):
        return len(self.energies) - 1

    @property
    def initial_area(self):
        return self.rows[0].area

    def observe(self, step, curve, kappa=None, sample=False, keep_snapshot=False):
        """Account for the curve produced by `step`."""
        sigma = self.params.sigma
        diag = diagnostics(curve, sigma)
        if self.energies:
            increase = diag.energy - self.energies[-1]
            if increase > self.max_energy_increase:
                self.max_energy_increase = increase
            if self.scheme == scheme_type.ZJB and increase > ENERGY_TOL:
                logger.warning("step %d: energy increased by %.3e", step, increase)
        self.energies.append(diag.energy)
        self.final_curve, self.final_kappa = curve, kappa

        if sample or not self.rows:
            area0 = self.rows[0].area if self.rows else diag.area
            self.rows.append(DiagnosticsRow(
                step=step,
                t=step * self.params.tau,
                energy=diag.energy,
                area=diag.area,
                area_change=(diag.area - area0) / area0,
                mesh_ratio=diag.mesh_ratio,
                theta_left=diag.theta_left,
                theta_right=diag.theta_right,
            ))
            if keep_snapshot:
                self.snapshots[step] = curve
        return diag

    def normalized_energy(self):
        """W(t)/W(0) at the sampled rows."""
        energy0 = self.rows[0].energy
        return [row.energy / energy0 for row in self.rows]

    def to_csv(self, path):
        with open(path, 'w', newline='', encoding='utf-8') as f_csv:
            writer = csv.writer(f_csv)
            writer.writerow(DIAGNOSTICS_CSV_HEADER)
            for row in self.rows:
                writer.writerow([format(value, '.17g') for value in (
                    row.t, row.energy, row.area, row.area_change,
                    row.mesh_ratio, row.theta_left, row.theta_right)])

    def write(self, directory):
        """Write diagnostics.csv and one curve_<step>.csv per kept snapshot."""
        os.makedirs(directory, exist_ok=True)
        self.to_csv(os.path.join(directory, 'diagnostics.csv'))
        for step, curve in sorted(self.snapshots.items()):
            write_curve_csv(os.path.join(directory, f'curve_{step}.csv'), curve)


def _abort(scheme, exc, stepper, record):
    return TrajectoryError(f"{scheme} trajectory aborted: {exc}",
                           last_curve=stepper.curve, record=record)


def evolve(curve0, scheme, params, T, stride=1, checkpoints=(),
           keep_snapshots=True):  # pylint: disable=invalid-name,too-many-arguments
    """
    Run T/tau steps of `scheme` from curve0 and record the diagnostics.

    Rows are sampled every `stride` steps and at the first and last step.
    Curves at the times listed in `checkpoints` are stored in
    record.checkpoints, keyed by the requested time.
    """
    if stride < 1:
        raise ParameterError(f"stride must be at least 1, got {stride}")
    n_steps = step_count(T, params.tau)
    wanted = {}
    for t in checkpoints:
        m = step_count(t, params.tau)
        if m > n_steps:
            raise ParameterError(f"checkpoint t = {t} lies beyond T = {T}")
        wanted.setdefault(m, []).append(t)

    record = TrajectoryRecord(scheme=scheme, params=params, stride=stride)
    record.observe(0, curve0, sample=True, keep_snapshot=keep_snapshots)
    for t in wanted.get(0, ()):
        record.checkpoints[t] = curve0
    if n_steps == 0:
        return record

    logger.info("%s: %d steps of tau = %g, N = %d", scheme, n_steps, params.tau, curve0.N)
    stepper = make_stepper(scheme, curve0, params)
    if stepper.kappa is not None:
        record.final_kappa = stepper.kappa
    for m in range(1, n_steps + 1):
        try:
            curve = stepper.step()
        except StepFailure as exc:
            raise _abort(scheme, exc, stepper, record) from exc
        sample = m % stride == 0 or m == n_steps
        record.observe(m, curve, stepper.kappa, sample=sample, keep_snapshot=keep_snapshots)
        for t in wanted.get(m, ()):
            record.checkpoints[t] = curve
    logger.info("%s: done, W = %.12g", scheme, record.energies[-1])
    return record


def energy_settled(energy_prev, energy, tau, epsilon):
    """
    True when the energy decay rate (W^m - W^{m+1}) / tau is at most epsilon
    and the energy did not rise by more than ENERGY_TOL.
    """
    decrease = energy_prev - energy
    return -ENERGY_TOL <= decrease and decrease / tau <= epsilon


def evolve_to_equilibrium(curve0, scheme, params, epsilon=DEFAULT_EPSILON,
                          max_steps=DEFAULT_MAX_STEPS, stride=1,
                          keep_snapshots=False,
                          residual_tol=DEFAULT_RESIDUAL_TOL):  # pylint: disable=too-many-arguments
    """
    Step until the energy has settled (see energy_settled) and the
    equilibrium residual of the current curve is at most residual_tol.
    residual_tol=None stops on the energy criterion alone.

    Returns (curve, record). The record carries the equilibrium residual of
    the final curve and curvature.
    """
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    if max_steps < 1:
        raise ParameterError(f"max_steps must be at least 1, got {max_steps}")
    if stride < 1:
        raise ParameterError(f"stride must be at least 1, got {stride}")
    if residual_tol is not None and not residual_tol > 0:
        raise ParameterError(f"residual_tol must be positive, got {residual_tol}")

    record = TrajectoryRecord(scheme=scheme, params=params, stride=stride)
    record.observe(0, curve0, sample=True, keep_snapshot=keep_snapshots)
    stepper = make_stepper(scheme, curve0, params)
    logger.info("%s: equilibrium run, tau = %g, N = %d, epsilon = %g",
                scheme, params.tau, curve0.N, epsilon)

    residual = None
    for m in range(1, max_steps + 1):
        try:
            curve = stepper.step()
        except StepFailure as exc:
            raise _abort(scheme, exc, stepper, record) from exc
        energy_prev = record.energies[-1]
        diag = diagnostics(curve, params.sigma)
        done = energy_settled(energy_prev, diag.energy, params.tau, epsilon)
        if done:
            residual = equilibrium_residual(curve, stepper.equilibrium_kappa, params.sigma)
            done = residual_tol is None or residual <= residual_tol
        record.observe(m, curve, stepper.kappa, sample=done or m % stride == 0,
                       keep_snapshot=keep_snapshots)
        if done:
            break
    else:
        raise EquilibriumNotReached(f"{scheme}: no equilibrium after {max_steps} steps",
                                    last_curve=stepper.curve, record=record)

    record.equilibrium_residual = residual
    final = record.rows[-1]
    logger.info("%s: equilibrium after %d steps, Psi = %.6f, theta = (%.6f, %.6f), "
                "residual = %.3e", scheme, m, final.mesh_ratio, final.theta_left,
                final.theta_right, record.equilibrium_residual)
    return curve, record


class Level(NamedTuple):
    tau: float
    h: float
    N: int  # pylint: disable=invalid-name


@dataclass(frozen=True)
class StudySpec:  # pylint: disable=too-many-instance-attributes
    """
    A convergence study.

    Levels come from an explicit list of N (`levels`), coupled to tau by the
    path tau = path_c * h**path_alpha or by the fixed `tau`; or from `tau0`
    halved n_levels - 1 times along the path, with N = round(1/h) and the
    step recomputed from the snapped h.
    """
    scheme: str
    shape: ShapeSpec
    theta_young: float
    eta: float = DEFAULT_ETA
    path_c: Optional[float] = None
    path_alpha: Optional[float] = None
    levels: Tuple[int, ...] = ()
    tau0: Optional[float] = None
    n_levels: int = 4
    tau: Optional[float] = None
    times: Tuple[float, ...] = ()
    epsilon: float = DEFAULT_EPSILON
    max_steps: int = DEFAULT_MAX_STEPS
    n_ref: int = DEFAULT_N_REF
    workers: int = 1

    def __post_init__(self):
        if self.scheme not in scheme_type.SCHEMES:
            raise ParameterError(f"unknown scheme {self.scheme!r}")
        if not 0.0 < self.theta_young < math.pi:
            raise ParameterError(f"theta_young must lie in (0, pi), got {self.theta_young}")
        if self.path_c is not None and not self.path_c > 0:
            raise ParameterError(f"path_c must be positive, got {self.path_c}")
        if self.path_alpha is not None and not self.path_alpha > 0:
            raise ParameterError(f"path_alpha must be positive, got {self.path_alpha}")
        if self.workers < 1:
            raise ParameterError(f"workers must be at least 1, got {self.workers}")
        if self.n_ref < 3:
            raise ParameterError(f"n_ref must be at least 3, got {self.n_ref}")
        for n in self.levels:
            if n < 3:
                raise ParameterError(f"level N must be at least 3, got {n}")

    @property
    def has_path(self):
        return self.path_c is not None and self.path_alpha is not None

    def params(self, tau):
        return SchemeParams(tau=tau, theta_young=self.theta_young, eta=self.eta)

    def _path_tau(self, h):
        return self.path_c * h ** self.path_alpha

    def resolve_levels(self):
        """Return the (tau, h, N) of every level, coarsest first."""
        if self.levels:
            if self.has_path:
                return [Level(self._path_tau(1.0 / n), 1.0 / n, n) for n in self.levels]
            if self.tau is not None:
                return [Level(self.tau, 1.0 / n, n) for n in self.levels]
            raise ParameterError("explicit levels need a path (path_c, path_alpha) or tau")

        if self.tau0 is None or not self.has_path:
            raise ParameterError("give either levels or tau0 with path_c and path_alpha")
        if self.n_levels < 2:
            raise ParameterError(f"n_levels must be at least 2, got {self.n_levels}")
        levels = []
        for i in range(self.n_levels):
            tau = self.tau0 / 2 ** i
            h = (tau / self.path_c) ** (1.0 / self.path_alpha)
            n = max(3, int(round(1.0 / h)))
            if abs(1.0 / h - n) > 1e-6 * n:
                logger.info("level %d: 1/h = %.6g snapped to N = %d", i, 1.0 / h, n)
            levels.append(Level(self._path_tau(1.0 / n), 1.0 / n, n))
        for coarse, fine in zip(levels, levels[1:]):
            if fine.N <= coarse.N:
                raise ParameterError(f"levels do not refine: N = {coarse.N} then {fine.N}")
        return levels


def _map_levels(func, jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(func, jobs))
    return [func(job) for job in jobs]


def _cauchy_level(job):
    spec, level = job
    logger.info("cauchy level N = %d, tau = %.6g", level.N, level.tau)
    curve0 = from_shape(spec.shape, level.N)
    record = evolve(curve0, spec.scheme, spec.params(level.tau), max(spec.times),
                    checkpoints=spec.times, keep_snapshots=False)
    return record.checkpoints


def _equilibrium_level(job):
    spec, level = job
    logger.info("equilibrium level N = %d, tau = %.6g", level.N, level.tau)
    curve0 = from_shape(spec.shape, level.N)
    curve, record = evolve_to_equilibrium(curve0, spec.scheme, spec.params(level.tau),
                                          epsilon=spec.epsilon, max_steps=spec.max_steps)
    return curve, record.rows[-1]


def cauchy_study(spec):
    """
    Cauchy-type study: one report per time T, with errors
    E_i = M(Gamma at level i, Gamma at level i+1) and orders in tau.
    """
    if not spec.times:
        raise ParameterError("cauchy study needs at least one time T")
    levels = spec.resolve_levels()
    if len(levels) < 2:
        raise ParameterError("cauchy study needs at least two levels")

    results = _map_levels(_cauchy_level, [(spec, level) for level in levels], spec.workers)
    reports = []
    for T in spec.times:  # pylint: disable=invalid-name
        errors = [manifold_distance(coarse[T], fine[T]) for coarse, fine in zip(results, results[1:])]
        reports.append(ConvergenceReport.from_levels(CAUCHY, spec.scheme, T, levels, errors))
    return reports


def initial_area(shape, n_ref=DEFAULT_N_REF):
    """Analytic area of shape, or the area of a fine sampling of it."""
    area = shape.exact_area()
    if area is not None:
        return area
    if shape.kind == scheme_type.FILE:
        return enclosed_area(from_shape(shape, None))
    return enclosed_area(from_shape(shape, n_ref))


def wulff_study(spec):
    """Distance of each level's equilibrium to the analytic Wulff shape."""
    levels = spec.resolve_levels()
    target = wulff_shape(initial_area(spec.shape, spec.n_ref), spec.theta_young, spec.n_ref)
    results = _map_levels(_equilibrium_level, [(spec, level) for level in levels], spec.workers)
    errors = [manifold_distance(curve, target) for curve, _ in results]
    return ConvergenceReport.from_levels(WULFF, spec.scheme, 'equilibrium', levels, errors)


def angle_convergence_study(spec):
    """|cos(theta_e^l) - sigma| at equilibrium per mesh level, orders in h."""
    levels = spec.resolve_levels()
    sigma = math.cos(spec.theta_young)
    results = _map_levels(_equilibrium_level, [(spec, level) for level in levels], spec.workers)
    errors = [abs(math.cos(row.theta_left) - sigma) for _, row in results]
    return ConvergenceReport.from_levels(ANGLES, spec.scheme, 'equilibrium', levels, errors,
                                         order_in='h')


class SweepResult(NamedTuple):
    theta_young: float
    distance: float
    mesh_ratio: float
    theta_left: float
    theta_right: float
    curve: object


def equilibrium_sweep(shape, N, scheme, tau, thetas, eta=DEFAULT_ETA,
                      epsilon=DEFAULT_EPSILON, max_steps=DEFAULT_MAX_STEPS,
                      n_ref=DEFAULT_N_REF):  # pylint: disable=invalid-name,too-many-arguments
    """
    Equilibria of one initial shape for several Young's angles, each compared
    with its Wulff shape.
    """
    if not thetas:
        raise HarnessError("empty angle list")
    curve0 = from_shape(shape, N)
    area0 = initial_area(shape, n_ref)
    results = []
    for theta in thetas:
        params = SchemeParams(tau=tau, theta_young=theta, eta=eta)
        curve, record = evolve_to_equilibrium(curve0, scheme, params,
                                              epsilon=epsilon, max_steps=max_steps)
        final = record.rows[-1]
        distance = manifold_distance(curve, wulff_shape(area0, theta, n_ref))
        results.append(SweepResult(theta, distance, final.mesh_ratio,
                                   final.theta_left, final.theta_right, curve))
    return results

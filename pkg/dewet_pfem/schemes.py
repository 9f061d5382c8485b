"""
Module: schemes.py

Time steppers for the dewetting flow: the backward Euler scheme (ZJB), its
predictor-corrector refinement (PC) and the k-step backward differentiation
schemes BDF2..BDF4, together with the least-squares initial curvature and
the start-up procedure that fills a multistep history.

Each scheme reduces to one call of assembly.assemble/assembly.solve per
corrector, with a different reference curve:

- ZJB: the current curve Gamma^m, a = 1, X-hat = X^m;
- PC: the ZJB prediction at half step, trapezoidal curvature and averaged
  position stiffness;
- BDFk: the BDF(k-1) prediction of Gamma^{m+1}, with (a, X-hat) from the
  BDF coefficients.

The module offers plain step functions and stepper objects that carry one
trajectory and iterate over it step by step.
"""
import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from . import scheme_type
from .assembly import (
    StepDescriptor,
    assemble,
    normal_weights,
    solve,
    stiffness_matrix,
    well_posedness_check,
)
from .exceptions import (
    Error,
    HistoryError,
    ParameterError,
    RankDeficientError,
    StepFailure,
    WellPosednessError,
)


logger = logging.getLogger(__name__)

DEFAULT_ETA = 100.0

# (a, extrapolation weights for X^m, X^{m-1}, ...)
BDF_COEFFICIENTS = {
    1: (Fraction(1), (Fraction(1),)),
    2: (Fraction(3, 2), (Fraction(2), Fraction(-1, 2))),
    3: (Fraction(11, 6), (Fraction(3), Fraction(-3, 2), Fraction(1, 3))),
    4: (Fraction(25, 12), (Fraction(4), Fraction(-3), Fraction(4, 3), Fraction(-1, 4))),
}

# column norms below this fraction of the mean segment length are treated as zero
RANK_TOL = 1e-12


@dataclass(frozen=True)
class SchemeParams:
    """
    Physical and numerical constants of a run.

    tau -- time step
    theta_young -- Young's angle in radians, in (0, pi)
    eta -- contact line mobility
    sigma -- cos(theta_young), derived
    """
    tau: float
    theta_young: float
    eta: float = DEFAULT_ETA
    sigma: float = field(init=False)

    def __post_init__(self):
        if not self.tau > 0:
            raise ParameterError(f"tau must be positive, got {self.tau}")
        if not self.eta > 0:
            raise ParameterError(f"eta must be positive, got {self.eta}")
        if not 0.0 < self.theta_young < math.pi:
            raise ParameterError(f"theta_young must lie in (0, pi), got {self.theta_young}")
        object.__setattr__(self, 'sigma', math.cos(self.theta_young))

    @classmethod
    def from_degrees(cls, tau, theta_deg, eta=DEFAULT_ETA):
        return cls(tau=tau, theta_young=math.radians(theta_deg), eta=eta)

    def with_tau(self, tau):
        """Return a copy with a different time step."""
        return replace(self, tau=tau)


def bdf_coefficients(k):
    """Exact (a, weights) of the k-step scheme; k = 1 is backward Euler."""
    try:
        return BDF_COEFFICIENTS[k]
    except KeyError:
        raise ParameterError(f"BDF order must be 1..4, got {k}") from None


class CurveHistory:
    """
    The last `order` curves of a trajectory (oldest first) and their
    curvatures, feeding the BDF extrapolation.
    """

    def __init__(self, order, curves=(), kappas=None):
        if order not in BDF_COEFFICIENTS:
            raise ParameterError(f"history order must be 1..4, got {order}")
        self.order = order
        self._curves = deque(maxlen=order)
        self._kappas = deque(maxlen=order)
        kappas = list(kappas) if kappas is not None else [None] * len(curves)
        if len(kappas) != len(curves):
            raise HistoryError("curves and kappas must have equal length")
        for curve, kappa in zip(curves, kappas):
            self.push(curve, kappa)

    def push(self, curve, kappa=None):
        """Append the newest curve, dropping the oldest beyond `order`."""
        if self._curves and curve.N != self._curves[-1].N:
            raise HistoryError(f"history holds N={self._curves[-1].N}, got N={curve.N}")
        self._curves.append(curve)
        self._kappas.append(kappa)

    @property
    def curves(self):
        return tuple(self._curves)

    @property
    def kappas(self):
        return tuple(self._kappas)

    @property
    def depth(self):
        return len(self._curves)

    @property
    def latest(self):
        if not self._curves:
            raise HistoryError("empty history")
        return self._curves[-1]

    @property
    def latest_kappa(self):
        if not self._kappas:
            raise HistoryError("empty history")
        return self._kappas[-1]

    def extrapolate(self, k):
        """
        Return (a, X-hat) of the k-step scheme built from the k newest curves.
        The contact extrapolants are the x-coordinates of X-hat at j = 0, N.
        """
        a, weights = bdf_coefficients(k)
        if self.depth < k:
            raise HistoryError(f"BDF{k} needs {k} curves, history holds {self.depth}")
        x_hat = np.zeros_like(self._curves[-1].nodes)
        for p, weight in enumerate(weights):
            x_hat += float(weight) * self._curves[-1 - p].nodes
        return float(a), x_hat


def _solve_descriptor(desc):
    kappa, curve = solve(assemble(desc))
    return curve, kappa


def zjb_step(curve, params):
    """
    One backward Euler step on Gamma^m. Returns (curve, kappa).
    """
    desc = StepDescriptor(reference=curve, rhs_nodes=curve.nodes, params=params)
    return _solve_descriptor(desc)


def initial_curvature(curve):
    """
    Least-squares nodal curvature of curve.

    Minimizes the residual of <kappa n, omega>^h - <d_s X, d_s omega> = 0
    over the 2N test functions (phi_j, 0), j = 0..N, and (0, phi_i),
    i = 1..N-1. With mass lumping the normal equations are diagonal. A
    vanishing column at an end node (horizontal end segment) gets the
    minimum-norm value 0; a vanishing interior column is an error.
    """
    N = curve.N  # pylint: disable=invalid-name
    K = stiffness_matrix(curve)  # pylint: disable=invalid-name
    omega = normal_weights(curve)
    interior = slice(1, N)

    design = sp.vstack((
        sp.diags(omega[:, 0], format='csr'),
        sp.diags(omega[:, 1], format='csr')[interior, :],
    ), format='csr')
    target = np.concatenate((K @ curve.x, (K @ curve.y)[interior]))

    gram = np.asarray(design.multiply(design).sum(axis=0)).ravel()
    lengths = np.hypot(*np.diff(curve.nodes, axis=0).T)
    tol = (RANK_TOL * float(np.mean(lengths))) ** 2
    rank_deficient = gram <= tol
    if np.any(rank_deficient[1:N]):
        j = int(np.flatnonzero(rank_deficient[1:N])[0]) + 1
        raise RankDeficientError(f"curvature at node {j} is undetermined (curve folds back)")
    if np.any(rank_deficient):
        logger.warning("end segment horizontal, curvature at contact node set to 0")

    kappa = np.zeros(N + 1)
    projected = design.T @ target
    kappa[~rank_deficient] = projected[~rank_deficient] / gram[~rank_deficient]
    return kappa


def pc_step(curve, kappa, params):
    """
    One predictor-corrector step. Returns (curve, kappa).

    The predictor is a ZJB step of size tau/2; the corrector solves the
    trapezoidal system on the predicted curve with full step tau.
    """
    try:
        predicted, _ = zjb_step(curve, params.with_tau(params.tau / 2.0))
    except Error as exc:
        raise StepFailure(str(exc), phase='predictor') from exc
    if not well_posedness_check(predicted):
        raise StepFailure("predicted curve violates the well-posedness conditions",
                          phase='predictor')

    try:
        desc = StepDescriptor(
            reference=predicted,
            rhs_nodes=curve.nodes,
            params=params,
            kappa_mode=scheme_type.TRAPEZOIDAL,
            kappa_prev=kappa,
        )
        return _solve_descriptor(desc)
    except Error as exc:
        raise StepFailure(str(exc), phase='corrector') from exc


def bdf_step(history, k, params):
    """
    One k-step BDF step from history. Returns (curve, kappa).

    The reference curve is predicted by one BDF(k-1) step from the same
    history (BDF1 being ZJB).
    """
    if k not in BDF_COEFFICIENTS:
        raise ParameterError(f"BDF order must be 1..4, got {k}")
    if history.depth < k:
        raise HistoryError(f"BDF{k} needs {k} curves, history holds {history.depth}")
    if k == 1:
        return zjb_step(history.latest, params)

    try:
        predicted, _ = bdf_step(history, k - 1, params)
    except Error as exc:
        raise StepFailure(str(exc), phase='predictor') from exc
    if not well_posedness_check(predicted):
        raise StepFailure("predicted curve violates the well-posedness conditions",
                          phase='predictor')

    a, x_hat = history.extrapolate(k)
    try:
        desc = StepDescriptor(reference=predicted, rhs_nodes=x_hat, params=params, a_coeff=a)
        return _solve_descriptor(desc)
    except Error as exc:
        raise StepFailure(str(exc), phase='corrector') from exc


def bootstrap_substeps(tau, k, order_used=2):
    """
    Number of substeps of one bootstrap interval: ceil(tau / tau_sub) with
    tau_sub = tau**(k/(order_used+1)) capped at tau, so that a substepped
    scheme of order `order_used` has error O(tau**k) over the interval.
    """
    if order_used < 1:
        raise ParameterError(f"order_used must be positive, got {order_used}")
    tau_sub = min(tau, tau ** (k / (order_used + 1.0)))
    return max(1, math.ceil(tau / tau_sub - 1e-9))


def bootstrap(curve0, k, params):
    """
    Build the history Gamma^0..Gamma^{k-1} needed by the first BDFk step.

    Interval 1 runs the predictor-corrector scheme, interval p >= 2 runs
    BDFp, each on its own grid of bootstrap_substeps(tau, k, order) substeps.
    A grid that does not divide the previous one is replaced by the previous
    one, so every BDFp stencil finds its back values among the computed
    curves. kappa^0 is the least-squares initial curvature.
    """
    if k not in (2, 3, 4):
        raise ParameterError(f"bootstrap order must be 2, 3 or 4, got {k}")
    if not well_posedness_check(curve0):
        raise WellPosednessError("initial curve violates the well-posedness conditions")

    kappa = initial_curvature(curve0)
    history = CurveHistory(k)
    history.push(curve0, kappa)

    # (curve, kappa) keyed by time in units of tau
    computed = {Fraction(0): (curve0, kappa)}
    n_prev = None
    for p in range(1, k):
        order_used = 2 if p == 1 else p
        n_sub = bootstrap_substeps(params.tau, k, order_used)
        if n_prev is not None and n_prev % n_sub:
            n_sub = n_prev
        fine = params.with_tau(params.tau / n_sub)
        logger.debug("bootstrap BDF%d, interval %d: %d substeps of %.3e",
                     k, p, n_sub, fine.tau)

        for sub in range(n_sub):
            t = Fraction(p - 1) + Fraction(sub, n_sub)
            try:
                if p == 1:
                    curve, kappa = pc_step(*computed[t], fine)
                else:
                    back = [computed[t - Fraction(j, n_sub)] for j in reversed(range(p))]
                    stencil = CurveHistory(p, curves=[c for c, _ in back],
                                           kappas=[kap for _, kap in back])
                    curve, kappa = bdf_step(stencil, p, fine)
            except Error as exc:
                raise StepFailure(f"substep {sub} of interval {p}: {exc}",
                                  phase='bootstrap') from exc
            computed[t + Fraction(1, n_sub)] = (curve, kappa)
        history.push(*computed[Fraction(p)])
        n_prev = n_sub
    return history


def equilibrium_residual(curve, kappa, sigma):
    """
    Max-norm residual of the stationary system on curve:
    <d_s kappa, d_s psi> = 0 and
    <kappa n, omega>^h - <d_s X, d_s omega> + sigma (omega_1(1) - omega_1(0)) = 0.
    """
    N = curve.N  # pylint: disable=invalid-name
    kappa = np.asarray(kappa, dtype=float)
    K = stiffness_matrix(curve)  # pylint: disable=invalid-name
    omega = normal_weights(curve)
    flux = K @ kappa
    balance_x = omega[:, 0] * kappa - K @ curve.x
    balance_x[0] -= sigma
    balance_x[N] += sigma
    balance_y = (omega[:, 1] * kappa - K @ curve.y)[1:N]
    return float(max(np.max(np.abs(flux)), np.max(np.abs(balance_x)),
                     np.max(np.abs(balance_y))))


class BaseStepper:
    """
    A base for stepper classes. A stepper owns one trajectory and advances
    it one step per call. Useful attributes:

    curve::
        the current curve Gamma^m

    kappa::
        the nodal curvature returned with it (None before the first step,
        except for PC, which starts from the least-squares kappa^0)

    step_index::
        m, the number of steps taken
    """

    def __init__(self, curve0, params):
        if curve0.N < 3:
            raise ParameterError(f"N must be at least 3, got {curve0.N}")
        if not well_posedness_check(curve0):
            raise WellPosednessError("initial curve violates the well-posedness conditions")
        self.params = params
        self.curve = curve0
        self.kappa = None
        self.step_index = 0

    @classmethod
    def _get_scheme(cls):
        """
        Return the scheme name.
        To be implemented in the subclasses.
        """
        raise NotImplementedError

    @property
    def scheme(self):
        return self._get_scheme()

    @property
    def order(self):
        return scheme_type.ORDER[self._get_scheme()]

    @property
    def time(self):
        return self.step_index * self.params.tau

    @property
    def equilibrium_kappa(self):
        """Curvature that balances the current curve in the stationary equations."""
        return self.kappa

    def _advance(self):
        raise NotImplementedError

    def step(self):
        """Advance by one step and return the new curve."""
        try:
            curve, kappa = self._advance()
        except StepFailure as exc:
            raise StepFailure(exc.reason, step=self.step_index, phase=exc.phase) from exc
        except Error as exc:
            raise StepFailure(str(exc), step=self.step_index) from exc

        self.curve, self.kappa = curve, kappa
        self.step_index += 1
        return curve

    def __iter__(self):
        return self

    def __next__(self):
        return self.step()


class ZJBStepper(BaseStepper):
    '''
    Backward Euler stepper, first order, energy stable.
    '''

    @classmethod
    def _get_scheme(cls):
        return scheme_type.ZJB

    def _advance(self):
        return zjb_step(self.curve, self.params)


class PCStepper(BaseStepper):
    '''
    Predictor-corrector stepper, second order.
    '''

    def __init__(self, curve0, params):
        super().__init__(curve0, params)
        self.kappa = initial_curvature(curve0)
        self._kappa_before = None

    @classmethod
    def _get_scheme(cls):
        return scheme_type.PC

    @property
    def equilibrium_kappa(self):
        """
        (kappa^m + kappa^{m+1}) / 2, the curvature the trapezoidal corrector
        solves for. kappa^{m+1} alone carries an undamped odd-even mode.
        """
        if self._kappa_before is None:
            return self.kappa
        return 0.5 * (self._kappa_before + self.kappa)

    def _advance(self):
        curve, kappa = pc_step(self.curve, self.kappa, self.params)
        self._kappa_before = self.kappa
        return curve, kappa


class BDFStepper(BaseStepper):
    '''
    k-step BDF stepper. The first k-1 steps replay the bootstrap history.
    '''
    # pylint: disable=abstract-method

    def __init__(self, curve0, params):
        super().__init__(curve0, params)
        self.k = scheme_type.BDF_STEPS[self._get_scheme()]
        self.history = None

    def _advance(self):
        if self.history is None:
            try:
                self.history = bootstrap(self.curve, self.k, self.params)
            except StepFailure as exc:
                raise StepFailure(exc.reason, phase='bootstrap') from exc
        if self.step_index + 1 < self.k:
            p = self.step_index + 1
            return self.history.curves[p], self.history.kappas[p]

        curve, kappa = bdf_step(self.history, self.k, self.params)
        self.history.push(curve, kappa)
        return curve, kappa


class BDF2Stepper(BDFStepper):
    '''
    Two-step BDF stepper with a ZJB-predicted reference curve.
    '''

    @classmethod
    def _get_scheme(cls):
        return scheme_type.BDF2


class BDF3Stepper(BDFStepper):
    '''
    Three-step BDF stepper with a BDF2-predicted reference curve.
    '''

    @classmethod
    def _get_scheme(cls):
        return scheme_type.BDF3


class BDF4Stepper(BDFStepper):
    '''
    Four-step BDF stepper with a BDF3-predicted reference curve.
    '''

    @classmethod
    def _get_scheme(cls):
        return scheme_type.BDF4


STEPPERS = {
    scheme_type.ZJB: ZJBStepper,
    scheme_type.PC: PCStepper,
    scheme_type.BDF2: BDF2Stepper,
    scheme_type.BDF3: BDF3Stepper,
    scheme_type.BDF4: BDF4Stepper,
}


def make_stepper(scheme, curve0, params):
    """Factory function for the stepper classes."""
    try:
        stepper_class = STEPPERS[scheme]
    except KeyError:
        raise ParameterError(f"unknown scheme {scheme!r}") from None
    return stepper_class(curve0, params)

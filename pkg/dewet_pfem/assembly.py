"""
Module: assembly.py

Finite element inner products on a polygonal reference curve and the
one-step linear system shared by every time stepper.

Unknowns of one step are ordered

    kappa_0 .. kappa_N,  x_0 .. x_N,  y_1 .. y_{N-1}

(3N+1 in total; y_0 = y_N = 0 are eliminated). Rows follow the same blocks:
the motion law tested with the hat functions phi_j, then the curvature
equation tested with (phi_j, 0), then with (0, phi_i) for interior i.

Stiffness terms use the exact P1 inner product on the reference curve;
normal-velocity and curvature terms use the mass-lumped one. With lumping,
<X . n, phi_j>^h reduces to X_j . omega_j with the nodal weight

    omega_j = (|h_j| n_j + |h_{j+1}| n_{j+1}) / 2,

so those couplings are diagonal.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.io
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import scheme_type
from .curve import PolygonalCurve, segment_data, segment_vectors
from .exceptions import (
    DegenerateMeshError,
    ParameterError,
    SolveError,
    WellPosednessError,
)


logger = logging.getLogger(__name__)

WELL_POSED_TOL = 1e-14
RESIDUAL_TOL = 1e-10


def stiffness_matrix(reference):
    """
    Sparse (N+1)x(N+1) matrix of <d_s phi_i, d_s phi_j> on reference.
    """
    lengths = np.hypot(*segment_vectors(reference).T)
    if np.min(lengths) <= 0.0:
        raise DegenerateMeshError("zero-length segment in reference curve")
    inv = 1.0 / lengths
    diag = np.zeros(reference.N + 1)
    diag[:-1] += inv
    diag[1:] += inv
    return sp.diags([-inv, diag, -inv], [-1, 0, 1], format='csr')


def normal_weights(reference):
    """(N+1, 2) array of lumped nodal normal weights omega_j."""
    seg = segment_data(reference)
    scaled = seg.normals * seg.lengths[:, None]
    omega = np.zeros((reference.N + 1, 2))
    omega[:-1] += 0.5 * scaled
    omega[1:] += 0.5 * scaled
    return omega


def _nodal(values, N, name):  # pylint: disable=invalid-name
    arr = np.asarray(values, dtype=float)
    if arr.shape != (N + 1,):
        raise ParameterError(f"{name} must hold {N + 1} nodal values, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} must be finite")
    return arr


def stiffness_apply(reference, f, g):
    """<d_s f, d_s g> for nodal fields f, g on reference."""
    N = reference.N  # pylint: disable=invalid-name
    f = _nodal(f, N, 'f')
    g = _nodal(g, N, 'g')
    lengths = np.hypot(*segment_vectors(reference).T)
    if np.min(lengths) <= 0.0:
        raise DegenerateMeshError("zero-length segment in reference curve")
    return float(np.sum(np.diff(f) * np.diff(g) / lengths))


def _piecewise(values, N):  # pylint: disable=invalid-name
    """
    Expand values to one-sided limits, shape (N, 2, d): [:, 0] at rho_{j-1}^+
    and [:, 1] at rho_j^-. Accepts a constant, a nodal array of N+1 entries
    (continuous) or a per-segment array of N entries.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        return np.full((N, 2, 1), float(arr))
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ParameterError(f"cannot interpret array of shape {arr.shape} on the curve")
    if arr.shape[0] == N + 1:
        return np.stack((arr[:-1], arr[1:]), axis=1)
    if arr.shape[0] == N:
        return np.stack((arr, arr), axis=1)
    raise ParameterError(f"expected {N + 1} nodal or {N} segment values, got {arr.shape[0]}")


def lumped_inner(reference, u, v):
    """
    Mass-lumped inner product <u, v>^h on reference.

    u and v may be constants, nodal fields (N+1 values, scalar or vector)
    or per-segment fields (N values, e.g. the normals).
    """
    N = reference.N  # pylint: disable=invalid-name
    pu, pv = _piecewise(u, N), _piecewise(v, N)
    if pu.shape[2] != pv.shape[2] and 1 not in (pu.shape[2], pv.shape[2]):
        raise ParameterError(f"dimension mismatch: {pu.shape[2]} vs {pv.shape[2]}")
    products = np.sum(pu * pv, axis=2)
    lengths = np.hypot(*segment_vectors(reference).T)
    if np.min(lengths) <= 0.0:
        raise DegenerateMeshError("zero-length segment in reference curve")
    return 0.5 * float(np.sum(lengths * (products[:, 0] + products[:, 1])))


def well_posedness_check(reference):
    """
    True if the end normals are not both vertical and no segment vanishes.
    """
    h = segment_vectors(reference)
    lengths = np.hypot(h[:, 0], h[:, 1])
    if np.min(lengths) <= WELL_POSED_TOL:
        return False
    # x-component of n_j = (-dy, dx)/|h| is -dy/|h|
    n1 = -h[0, 1] / lengths[0]
    nn = -h[-1, 1] / lengths[-1]
    return bool(n1 * n1 + nn * nn > WELL_POSED_TOL)


@dataclass(frozen=True)
class StepDescriptor:
    """
    Everything needed to assemble one semi-implicit step.

    reference -- curve carrying the inner products and normals
    rhs_nodes -- (N+1, 2) extrapolated data X-hat; X^m for one-step schemes
    params -- object with tau, eta and sigma (SchemeParams)
    a_coeff -- leading time-derivative coefficient a
    kappa_mode -- scheme_type.IMPLICIT or scheme_type.TRAPEZOIDAL
    kappa_prev -- kappa^m, required in trapezoidal mode (where rhs_nodes is X^m)
    """
    reference: PolygonalCurve
    rhs_nodes: np.ndarray
    params: object
    a_coeff: float = 1.0
    kappa_mode: str = scheme_type.IMPLICIT
    kappa_prev: Optional[np.ndarray] = None

    def __post_init__(self):
        N = self.reference.N  # pylint: disable=invalid-name
        if N < 3:
            raise ParameterError(f"a step needs N >= 3 segments, got {N}")
        rhs = np.asarray(self.rhs_nodes, dtype=float)
        if rhs.shape != (N + 1, 2):
            raise ParameterError(f"rhs_nodes must have shape {(N + 1, 2)}, got {rhs.shape}")
        object.__setattr__(self, 'rhs_nodes', rhs)
        if not self.params.tau > 0:
            raise ParameterError(f"tau must be positive, got {self.params.tau}")
        if not self.params.eta > 0:
            raise ParameterError(f"eta must be positive, got {self.params.eta}")
        if not self.a_coeff > 0:
            raise ParameterError(f"a must be positive, got {self.a_coeff}")
        if self.kappa_mode == scheme_type.TRAPEZOIDAL:
            if self.kappa_prev is None:
                raise ParameterError("trapezoidal mode needs kappa_prev")
            if self.a_coeff != 1.0:
                raise ParameterError("trapezoidal mode is a one-step scheme, a must be 1")
            object.__setattr__(self, 'kappa_prev', _nodal(self.kappa_prev, N, 'kappa_prev'))
        elif self.kappa_mode != scheme_type.IMPLICIT:
            raise ParameterError(f"unknown kappa mode {self.kappa_mode!r}")


@dataclass(frozen=True)
class StepSystem:
    """Sparse system of dimension 3N+1 and its right-hand side."""
    matrix: sp.csc_matrix
    rhs: np.ndarray
    N: int  # pylint: disable=invalid-name


def assemble(desc):
    """
    Assemble the linear system of one step described by desc.

    Raises WellPosednessError if the reference curve fails
    well_posedness_check.
    """
    ref = desc.reference
    N = ref.N  # pylint: disable=invalid-name
    if not well_posedness_check(ref):
        raise WellPosednessError(
            "reference curve has both end segments horizontal or a vanishing segment")

    tau, eta, sigma = desc.params.tau, desc.params.eta, desc.params.sigma
    a = desc.a_coeff
    w = 1.0 if desc.kappa_mode == scheme_type.IMPLICIT else 0.5

    K = stiffness_matrix(ref)  # pylint: disable=invalid-name
    omega = normal_weights(ref)
    Dx = sp.diags(omega[:, 0], format='csr')  # pylint: disable=invalid-name
    Dy = sp.diags(omega[:, 1], format='csr')  # pylint: disable=invalid-name
    ends = np.zeros(N + 1)
    ends[0] = ends[N] = 1.0
    E = sp.diags(ends, format='csr')  # pylint: disable=invalid-name
    interior = slice(1, N)

    matrix = sp.bmat([
        [w * K, (a / tau) * Dx, (a / tau) * Dy[:, interior]],
        [w * Dx, -w * K - (a / (eta * tau)) * E, None],
        [w * Dy[interior, :], None, -w * K[interior, interior]],
    ], format='csc')

    x_hat = desc.rhs_nodes
    rhs_kappa = np.sum(omega * x_hat, axis=1) / tau
    rhs_x = np.zeros(N + 1)
    rhs_x[0] += sigma - x_hat[0, 0] / (eta * tau)
    rhs_x[N] += -sigma - x_hat[N, 0] / (eta * tau)
    rhs_y = np.zeros(N - 1)

    if desc.kappa_mode == scheme_type.TRAPEZOIDAL:
        # known halves of (kappa^{m+1}+kappa^m)/2 and (X^{m+1}+X^m)/2
        kappa_m = desc.kappa_prev
        rhs_kappa -= (1.0 - w) * (K @ kappa_m)
        rhs_x += (1.0 - w) * (K @ x_hat[:, 0] - omega[:, 0] * kappa_m)
        rhs_y += (1.0 - w) * (K @ x_hat[:, 1] - omega[:, 1] * kappa_m)[interior]

    return StepSystem(matrix=matrix, rhs=np.concatenate((rhs_kappa, rhs_x, rhs_y)), N=N)


def _condition_estimate(matrix, lu):
    inverse = spla.LinearOperator(
        matrix.shape,
        matvec=lu.solve,
        rmatvec=lambda v: lu.solve(v, trans='T'),
        dtype=float,
    )
    return float(spla.norm(matrix, 1)) * float(spla.onenormest(inverse))


def split_solution(sol, N):  # pylint: disable=invalid-name
    """Split a solution vector into (kappa, (N+1, 2) nodes)."""
    kappa = sol[:N + 1].copy()
    nodes = np.zeros((N + 1, 2))
    nodes[:, 0] = sol[N + 1:2 * N + 2]
    nodes[1:N, 1] = sol[2 * N + 2:]
    return kappa, nodes


def solve(system):
    """
    Solve system with a sparse LU factorization.

    Returns (kappa, curve). The end nodes of the curve are exactly on the
    substrate. Raises SolveError if the matrix is singular or the residual
    exceeds RESIDUAL_TOL * (1 + |b|_inf).
    """
    matrix, rhs = system.matrix, system.rhs
    matrix_norm = float(spla.norm(matrix, 1))
    try:
        lu = spla.splu(matrix)
    except RuntimeError as exc:
        raise SolveError(f"singular step matrix: {exc}", matrix_norm=matrix_norm) from exc

    sol = lu.solve(rhs)
    if not np.all(np.isfinite(sol)):
        raise SolveError("non-finite solution", matrix_norm=matrix_norm,
                         condition=_condition_estimate(matrix, lu))
    residual = float(np.max(np.abs(matrix @ sol - rhs)))
    if residual > RESIDUAL_TOL * (1.0 + float(np.max(np.abs(rhs)))):
        raise SolveError(
            f"residual {residual:.3e} above tolerance",
            residual=residual,
            matrix_norm=matrix_norm,
            condition=_condition_estimate(matrix, lu),
        )

    kappa, nodes = split_solution(sol, system.N)
    return kappa, PolygonalCurve(nodes)


def dump_system(system, directory, stem='system'):
    """
    Write system to <stem>.mtx (Matrix Market) and <stem>_rhs.txt.
    Returns the two paths.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    matrix_path = directory / f'{stem}.mtx'
    rhs_path = directory / f'{stem}_rhs.txt'
    scipy.io.mmwrite(str(matrix_path), system.matrix, precision=17)
    np.savetxt(rhs_path, system.rhs, fmt='%.17g')
    logger.debug("dumped %dx%d system to %s", *system.matrix.shape, matrix_path)
    return matrix_path, rhs_path

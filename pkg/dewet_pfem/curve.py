"""
Module: curve.py

Polygonal representation of the film/vapor interface and the per-curve
geometric diagnostics.

A film profile is an open polygon X = (x_j, y_j), j = 0..N, parameterized on
the uniform grid rho_j = j/N. The two end nodes are the contact points and
lie exactly on the substrate y = 0; the polygon runs from the left contact
point to the right one, so that the film lies to the right of the direction
of travel and the unit normal n = (-dy, dx)/|h| points out of the film.

Key features:
- PolygonalCurve: immutable node array with its invariants enforced on
  construction.
- Segment data (lengths, unit tangents, unit normals), enclosed area,
  discrete energy, mesh ratio and contact angles.
- ShapeSpec / from_shape: the shape library used to build initial curves.
- Lossless CSV snapshots (header ``j,x,y``).
"""
import csv
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import scheme_type
from .exceptions import (
    ContactCrossingError,
    CurveError,
    DegenerateMeshError,
    ParameterError,
)


logger = logging.getLogger(__name__)

# relative tolerance under which an end node is projected onto the substrate
SUBSTRATE_TOL = 1e-10

CSV_HEADER = ('j', 'x', 'y')
CSV_FORMAT = '.17g'


class PolygonalCurve:
    """
    Ordered nodes of an open polygonal curve with both ends on y = 0.

    The node array is copied and frozen; curves are values and may be shared
    freely. Construction enforces the invariants:

    - y_0 = y_N = 0 (end nodes within SUBSTRATE_TOL are projected, others
      are rejected),
    - x_0 <= x_N,
    - every segment has positive length.
    """

    __slots__ = ('_nodes',)

    def __init__(self, nodes):
        arr = np.array(nodes, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise CurveError(f"nodes must have shape (N+1, 2), got {arr.shape}")
        if arr.shape[0] < 3:
            raise CurveError(f"a curve needs at least 2 segments, got {arr.shape[0] - 1}")
        if not np.all(np.isfinite(arr)):
            raise CurveError("nodes must be finite")

        scale = 1.0 + float(np.max(np.abs(arr)))
        for end in (0, -1):
            if abs(arr[end, 1]) > SUBSTRATE_TOL * scale:
                raise CurveError(
                    f"contact node {end % arr.shape[0]} is off the substrate: y = {arr[end, 1]!r}")
            arr[end, 1] = 0.0

        if arr[0, 0] > arr[-1, 0]:
            raise ContactCrossingError(
                f"left contact x = {arr[0, 0]!r} lies right of right contact x = {arr[-1, 0]!r}")

        lengths = np.hypot(*np.diff(arr, axis=0).T)
        if np.min(lengths) <= 0.0:
            j = int(np.argmin(lengths)) + 1
            raise DegenerateMeshError(f"segment {j} has zero length")

        arr.flags.writeable = False
        self._nodes = arr

    @property
    def nodes(self):
        """Read-only (N+1, 2) array of node coordinates."""
        return self._nodes

    @property
    def N(self):  # pylint: disable=invalid-name
        """Number of segments."""
        return self._nodes.shape[0] - 1

    @property
    def x(self):
        """Node abscissae x_0..x_N."""
        return self._nodes[:, 0]

    @property
    def y(self):
        """Node heights; y_0 = y_N = 0."""
        return self._nodes[:, 1]

    @property
    def contacts(self):
        """(x_c^l, x_c^r)"""
        return float(self._nodes[0, 0]), float(self._nodes[-1, 0])

    def translated(self, dx):
        """Return the curve shifted by (dx, 0)."""
        return PolygonalCurve(self._nodes + np.array([dx, 0.0]))

    def scaled(self, factor):
        """Return the curve scaled about the origin."""
        return PolygonalCurve(self._nodes * factor)

    def reflected(self):
        """Return the mirror image across the y-axis, re-ordered left to right."""
        mirrored = self._nodes[::-1].copy()
        mirrored[:, 0] *= -1.0
        return PolygonalCurve(mirrored)

    def __reduce__(self):
        return (PolygonalCurve, (np.array(self._nodes),))

    def __len__(self):
        return self._nodes.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PolygonalCurve):
            return NotImplemented
        return np.array_equal(self._nodes, other._nodes)

    def __hash__(self):
        return hash(self._nodes.tobytes())

    def __repr__(self):
        xl, xr = self.contacts
        return f"PolygonalCurve(N={self.N}, contacts=({xl:.6g}, {xr:.6g}))"


class SegmentData(NamedTuple):
    """Per-segment geometry, arrays indexed by segment j = 1..N (stored 0..N-1)."""
    lengths: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray


@dataclass(frozen=True)
class Diagnostics:
    """Scalar diagnostics of one curve."""
    area: float
    energy: float
    mesh_ratio: float
    theta_left: float
    theta_right: float
    total_length: float


def segment_vectors(curve):
    """Return the (N, 2) array of segment vectors h_j = X_j - X_{j-1}."""
    return np.diff(curve.nodes, axis=0)


def segment_data(curve):
    """
    Lengths, unit tangents and unit normals of every segment.

    For a segment with displacement (dx, dy) the tangent is (dx, dy)/|h| and
    the normal is (-dy, dx)/|h|.
    """
    h = segment_vectors(curve)
    lengths = np.hypot(h[:, 0], h[:, 1])
    if np.min(lengths) <= 0.0:
        raise DegenerateMeshError("zero-length segment")
    tangents = h / lengths[:, None]
    normals = np.column_stack((-tangents[:, 1], tangents[:, 0]))
    return SegmentData(lengths, tangents, normals)


def enclosed_area(curve):
    """
    Area of the region between the curve and the substrate,
    A = 1/2 sum_j (x_j - x_{j-1}) (y_j + y_{j-1}).
    """
    x, y = curve.x, curve.y
    return 0.5 * float(np.sum(np.diff(x) * (y[1:] + y[:-1])))


def total_length(curve):
    """Sum of the segment lengths, the surface energy without the substrate term."""
    return float(np.sum(np.hypot(*segment_vectors(curve).T)))


def discrete_energy(curve, sigma):
    """Total length minus sigma times the wetted length x_N - x_0."""
    xl, xr = curve.contacts
    return total_length(curve) - sigma * (xr - xl)


def mesh_ratio(curve):
    """Ratio of the longest to the shortest segment."""
    lengths = np.hypot(*segment_vectors(curve).T)
    shortest = float(np.min(lengths))
    if shortest <= 0.0:
        raise DegenerateMeshError("zero-length segment")
    return float(np.max(lengths)) / shortest


def contact_angles(curve):
    """
    Interior contact angles (theta_left, theta_right) against the substrate.

    At the right end the angle is taken between the back tangent -h_N and the
    substrate direction (-1, 0), so both angles are measured inside the film
    and mirror images swap them.
    """
    h = segment_vectors(curve)
    first, last = h[0], h[-1]
    len_first, len_last = math.hypot(*first), math.hypot(*last)
    if len_first <= 0.0 or len_last <= 0.0:
        raise DegenerateMeshError("degenerate end segment")
    cos_left = min(1.0, max(-1.0, first[0] / len_first))
    cos_right = min(1.0, max(-1.0, last[0] / len_last))
    return math.acos(cos_left), math.acos(cos_right)


def diagnostics(curve, sigma):
    """Collect the scalar diagnostics of curve."""
    theta_left, theta_right = contact_angles(curve)
    return Diagnostics(
        area=enclosed_area(curve),
        energy=discrete_energy(curve, sigma),
        mesh_ratio=mesh_ratio(curve),
        theta_left=theta_left,
        theta_right=theta_right,
        total_length=total_length(curve),
    )


@dataclass(frozen=True)
class ShapeSpec:
    """
    Description of an initial shape.

    kind -- one of scheme_type.SHAPES
    a, b -- semi-axes of a semi-ellipse
    area, theta -- enclosed area and Young's angle (radians) of a Wulff arc
    path -- node file for explicit shapes
    """
    kind: str
    a: float = 2.0
    b: float = 1.0
    area: Optional[float] = None
    theta: Optional[float] = None
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in scheme_type.SHAPES:
            raise ParameterError(f"unknown shape {self.kind!r}")
        if self.kind == scheme_type.SEMI_ELLIPSE and (self.a <= 0 or self.b <= 0):
            raise ParameterError(f"semi-axes must be positive, got a={self.a}, b={self.b}")
        if self.kind == scheme_type.WULFF:
            if self.area is None or self.area <= 0:
                raise ParameterError(f"Wulff area must be positive, got {self.area}")
            if self.theta is None or not 0.0 < self.theta < math.pi:
                raise ParameterError(f"Wulff angle must lie in (0, pi), got {self.theta}")
        if self.kind == scheme_type.FILE and not self.path:
            raise ParameterError("file shape needs a path")

    @classmethod
    def semi_ellipse(cls, a=2.0, b=1.0):
        return cls(scheme_type.SEMI_ELLIPSE, a=a, b=b)

    @classmethod
    def flower(cls):
        return cls(scheme_type.FLOWER)

    @classmethod
    def wulff(cls, area, theta):
        return cls(scheme_type.WULFF, area=area, theta=theta)

    @classmethod
    def from_file(cls, path):
        return cls(scheme_type.FILE, path=str(path))

    def exact_area(self):
        """Analytic enclosed area when the shape has one, otherwise None."""
        if self.kind == scheme_type.SEMI_ELLIPSE:
            return math.pi * self.a * self.b / 2.0
        if self.kind == scheme_type.WULFF:
            return self.area
        return None


def _polar_angles(N):  # pylint: disable=invalid-name
    # theta runs from pi down to 0 so that node 0 is the left contact point
    return math.pi * (1.0 - np.arange(N + 1) / N)


def from_shape(shape, N):  # pylint: disable=invalid-name
    """
    Sample shape with N segments.

    Semi-ellipses and Curve I are sampled at equal polar-angle increments,
    Wulff arcs at equal increments of their arc parameter, and node files are
    read as-is (N must then match the file or be None).
    """
    if shape.kind == scheme_type.FILE:
        curve = read_curve_csv(shape.path)
        if N is not None and curve.N != N:
            raise CurveError(f"{shape.path}: file holds {curve.N} segments, {N} requested")
        return curve

    if N is None or N < 2:
        raise ParameterError(f"N must be at least 2, got {N}")

    if shape.kind == scheme_type.WULFF:
        # pylint: disable=import-outside-toplevel,cyclic-import
        from .metrics import wulff_shape
        return wulff_shape(shape.area, shape.theta, N)

    theta = _polar_angles(N)
    if shape.kind == scheme_type.SEMI_ELLIPSE:
        nodes = np.column_stack((shape.a * np.cos(theta), shape.b * np.sin(theta)))
    else:
        radius = 2.0 + np.cos(6.0 * theta)
        nodes = np.column_stack((radius * np.cos(theta), radius * np.sin(theta)))
    nodes[0, 1] = nodes[-1, 1] = 0.0
    return PolygonalCurve(nodes)


def write_curve_csv(path, curve):
    """Write curve as ``j,x,y`` rows with 17 significant digits."""
    with open(path, 'w', newline='', encoding='utf-8') as f_csv:
        writer = csv.writer(f_csv)
        writer.writerow(CSV_HEADER)
        for j, (x, y) in enumerate(curve.nodes):
            writer.writerow((j, format(x, CSV_FORMAT), format(y, CSV_FORMAT)))


def read_curve_csv(path):
    """Read a curve written by write_curve_csv."""
    with open(path, 'r', newline='', encoding='utf-8') as f_csv:
        reader = csv.reader(f_csv)
        header = tuple(next(reader, ()))
        if header != CSV_HEADER:
            raise CurveError(f"{path}: expected header {','.join(CSV_HEADER)}, got {header}")
        rows = [row for row in reader if row]

    indices = [int(row[0]) for row in rows]
    if indices != list(range(len(rows))):
        raise CurveError(f"{path}: node indices must run 0..N in order")
    return PolygonalCurve([(float(row[1]), float(row[2])) for row in rows])

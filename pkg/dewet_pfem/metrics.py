"""
Module: metrics.py

Region geometry and error measures used by the convergence studies.

- Region / region_of: the film region bounded by a curve and the substrate,
  as a shapely polygon oriented counterclockwise.
- manifold_distance: area of the symmetric difference of two film regions,
  M = 2|A u B| - |A| - |B|, with the union computed by GEOS.
- wulff_shape: the circular-arc equilibrium for a given area and Young's
  angle.
- convergence_orders / ConvergenceReport: order tables for Cauchy, Wulff
  and contact-angle studies.
"""
import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np
import shapely
from shapely.errors import GEOSException
from shapely.geometry import Polygon
from shapely.geometry.polygon import orient
from shapely.validation import explain_validity

from .curve import PolygonalCurve
from .exceptions import ClippingError, NonSimpleRegionError, ParameterError


logger = logging.getLogger(__name__)

REPORT_CSV_HEADER = ('tau', 'h', 'error', 'order')
# several final times in one table
MULTI_REPORT_CSV_HEADER = ('T',) + REPORT_CSV_HEADER

CAUCHY = 'cauchy'
WULFF = 'wulff'
ANGLES = 'angles'
STUDY_KINDS = (CAUCHY, WULFF, ANGLES)


@dataclass(frozen=True)
class Region:
    """Simple counterclockwise polygon closed along the substrate."""
    polygon: Polygon

    @property
    def area(self):
        """Enclosed area, always nonnegative."""
        return float(self.polygon.area)

    @property
    def boundary(self):
        """Closed vertex array, first vertex repeated at the end."""
        return np.asarray(self.polygon.exterior.coords)


def region_of(curve):
    """
    The region enclosed by curve and the substrate segment from (x_N, 0)
    back to (x_0, 0).
    """
    polygon = Polygon(curve.nodes)
    if not polygon.is_valid:
        raise NonSimpleRegionError(f"{curve!r}: {explain_validity(polygon)}")
    if not polygon.area > 0.0:
        raise NonSimpleRegionError(f"{curve!r}: region has zero area")
    return Region(orient(polygon, sign=1.0))


def manifold_distance(c1, c2):
    """Symmetric-difference area of the regions of c1 and c2."""
    r1, r2 = region_of(c1), region_of(c2)
    try:
        union = shapely.union(r1.polygon, r2.polygon)
    except GEOSException as exc:
        raise ClippingError(f"union failed: {exc}") from exc
    if union.is_empty or not union.is_valid:
        raise ClippingError(f"union is not a valid region: {explain_validity(union)}")

    distance = 2.0 * float(union.area) - r1.area - r2.area
    # rounding in the three areas only
    return max(distance, 0.0)


def wulff_radius(area0, theta_i):
    return math.sqrt(area0 / (theta_i - math.sin(theta_i) * math.cos(theta_i)))


def wulff_shape(area0, theta_i, N):  # pylint: disable=invalid-name
    """
    Circular arc of enclosed area area0 meeting the substrate at theta_i,
    sampled at u_j = j/N of

        x(u) = -r sin(theta_i (1 - 2u)),
        y(u) = -r cos(theta_i) + r cos(theta_i (1 - 2u)).
    """
    if not area0 > 0:
        raise ParameterError(f"area must be positive, got {area0}")
    if not 0.0 < theta_i < math.pi:
        raise ParameterError(f"theta_i must lie in (0, pi), got {theta_i}")
    if N is None or N < 2:
        raise ParameterError(f"N must be at least 2, got {N}")

    r = wulff_radius(area0, theta_i)
    phase = theta_i * (1.0 - 2.0 * np.arange(N + 1) / N)
    nodes = np.column_stack((-r * np.sin(phase), r * (np.cos(phase) - math.cos(theta_i))))
    nodes[0, 1] = nodes[-1, 1] = 0.0
    return PolygonalCurve(nodes)


def convergence_orders(errors, steps):
    """
    order_i = log(E_i / E_{i+1}) / log(s_i / s_{i+1}) for consecutive rows,
    where the steps s are time steps (or mesh sizes), strictly decreasing.
    """
    errors = [float(e) for e in errors]
    steps = [float(s) for s in steps]
    if len(errors) != len(steps):
        raise ParameterError(f"{len(errors)} errors for {len(steps)} steps")
    if len(errors) < 2:
        raise ParameterError("at least two rows are needed for an order")
    for i, error in enumerate(errors):
        if not error > 0.0:
            raise ParameterError(f"error {i} must be positive, got {error}")
    orders = []
    for i in range(len(errors) - 1):
        if not steps[i + 1] < steps[i]:
            raise ParameterError(
                f"steps must decrease, step {i + 1} is {steps[i + 1]} after {steps[i]}")
        orders.append(math.log(errors[i] / errors[i + 1]) / math.log(steps[i] / steps[i + 1]))
    return orders


@dataclass(frozen=True)
class ConvergenceRow:
    tau: float
    h: float
    N: int  # pylint: disable=invalid-name
    error: float
    order: Optional[float] = None


@dataclass
class ConvergenceReport:
    """
    Order table of one study.

    kind -- 'cauchy', 'wulff' or 'angles'
    time -- final time T, or 'equilibrium'
    order_in -- 'tau' or 'h', the step the orders are measured against
    """
    kind: str
    scheme: str
    time: object
    rows: List[ConvergenceRow] = field(default_factory=list)
    order_in: str = 'tau'

    @classmethod
    def from_levels(cls, kind, scheme, time, levels, errors, order_in='tau'):
        """Build the report of `errors` measured at `levels` (objects with tau, h, N)."""
        if kind not in STUDY_KINDS:
            raise ParameterError(f"unknown study kind {kind!r}")
        levels = list(levels)[:len(errors)]
        orders = [None]
        if len(errors) >= 2:
            steps = [getattr(level, order_in) for level in levels]
            orders += convergence_orders(errors, steps)
        rows = [
            ConvergenceRow(tau=level.tau, h=level.h, N=level.N, error=float(error), order=order)
            for level, error, order in zip(levels, errors, orders)
        ]
        return cls(kind=kind, scheme=scheme, time=time, rows=rows, order_in=order_in)

    @property
    def errors(self):
        return [row.error for row in self.rows]

    @property
    def orders(self):
        return [row.order for row in self.rows if row.order is not None]

    def mean_order(self, last=2):
        """Mean of the last `last` orders."""
        orders = self.orders[-last:]
        if not orders:
            raise ParameterError("report has no orders")
        return sum(orders) / len(orders)

    def csv_rows(self):
        for row in self.rows:
            order = '' if row.order is None else format(row.order, '.17g')
            yield (format(row.tau, '.17g'), format(row.h, '.17g'),
                   format(row.error, '.17g'), order)

    def to_csv(self, path):
        with open(path, 'w', newline='', encoding='utf-8') as f_csv:
            writer = csv.writer(f_csv)
            writer.writerow(REPORT_CSV_HEADER)
            writer.writerows(self.csv_rows())

    def as_dict(self):
        return {
            'kind': self.kind,
            'scheme': self.scheme,
            'time': self.time,
            'order_in': self.order_in,
            'rows': [asdict(row) for row in self.rows],
        }

    def to_json(self, path):
        with open(path, 'w', encoding='utf-8') as f_json:
            json.dump(self.as_dict(), f_json, indent=2)

    def format_table(self):
        """Plain-text table for the terminal."""
        lines = [f"{self.kind} study, {self.scheme}, T = {self.time}",
                 f"{'tau':>12} {'h':>12} {'N':>6} {'error':>12} {'order':>8}"]
        for row in self.rows:
            order = '' if row.order is None else f"{row.order:.4f}"
            lines.append(f"{row.tau:12.5e} {row.h:12.5e} {row.N:6d} {row.error:12.5e} {order:>8}")
        return "\n".join(lines)


def write_reports_csv(path, reports):
    """Write the rows of several reports to one table keyed by the final time T."""
    with open(path, 'w', newline='', encoding='utf-8') as f_csv:
        writer = csv.writer(f_csv)
        writer.writerow(MULTI_REPORT_CSV_HEADER)
        for report in reports:
            for row in report.csv_rows():
                writer.writerow((format(report.time, 'g'),) + row)

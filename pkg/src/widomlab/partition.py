"""Equal-measure partitions of level curves and their centroid roots.

On a level curve the equilibrium measure of the level set is uniform in the
conjugate-angle parameter, so arcs of equal measure are simply arcs of equal
theta increment, and arc centroids reduce to plain trapezoidal averages of
z(theta).  No Jacobian appears anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegreeTooSmallError, InsufficientResolutionError
from .geometry import TWO_PI, CompactSet, distance_to_set
from .potential import EquilibriumSolver, LevelCurve
from .validation import positive_int

__all__ = [
    "DegreeAllocation",
    "allocate_degrees",
    "ArcCell",
    "Partition",
    "partition_level_curve",
    "partition_diagnostics",
    "PartitionDiagnostics",
    "arc_masses_by_flux",
]


@dataclass(frozen=True)
class DegreeAllocation:
    """Split of a total degree over components proportional to their masses.

    All but the last component get the integer part of n * omega_j; the last
    absorbs the remainder, so the total is exact and the last component's
    excess over n * omega_m is at most m - 1.
    """

    total: int
    per_component: tuple[int, ...]
    masses: tuple[float, ...]

    @property
    def advisory_minimum(self) -> float:
        """Degree above which every component is guaranteed >= 10 roots."""
        return 10.0 / min(self.masses)

    def __post_init__(self):
        if sum(self.per_component) != self.total:
            raise ValueError("allocation does not sum to the total degree")


def allocate_degrees(masses, n: int) -> DegreeAllocation:
    """Allocate a total degree ``n`` across components with the floor rule.

    Any ``n`` giving every component at least one root is accepted; degrees
    below ``10 / min(masses)`` are legal but leave few roots on the lightest
    component, which the diagnostics surface rather than refuse.
    """
    n = positive_int(n, "n")
    omega = np.asarray(masses, dtype=float)
    if omega.ndim != 1 or omega.size == 0 or np.any(omega <= 0):
        raise ValueError("masses must be a nonempty vector of positive numbers")
    if abs(omega.sum() - 1.0) > 1e-9:
        raise ValueError(f"masses must sum to 1, got {omega.sum()!r}")
    # the epsilon absorbs solver rounding in the masses (floor(12 * (0.5 - 1e-16))
    # must be 6, not 5)
    parts = [int(math.floor(n * w + 1e-9)) for w in omega[:-1]]
    parts.append(n - sum(parts))
    if min(parts) < 1:
        raise DegreeTooSmallError(
            f"degree {n} is below the admissible threshold for masses "
            f"{omega.tolist()}: some component would receive no root "
            f"(need roughly n > {10.0 / omega.min():.1f})")
    return DegreeAllocation(n, tuple(parts), tuple(omega.tolist()))


@dataclass(frozen=True)
class ArcCell:
    """One equal-measure subarc: theta range, endpoints, centroid, metrics."""

    theta_lo: float
    theta_hi: float
    start: complex
    end: complex
    centroid: complex
    mass: float
    length: float
    diam: float
    dist: float
    nodes: np.ndarray


@dataclass(frozen=True)
class Partition:
    component: int
    level: float
    omega: float
    arcs: tuple[ArcCell, ...]
    anchor: float

    def __len__(self) -> int:
        return len(self.arcs)

    @property
    def centroids(self) -> np.ndarray:
        return np.array([a.centroid for a in self.arcs])

    @property
    def endpoints(self) -> np.ndarray:
        return np.array([a.end for a in self.arcs])

    @property
    def masses(self) -> np.ndarray:
        return np.array([a.mass for a in self.arcs])


def _interp(points: np.ndarray, theta: np.ndarray, t: float) -> complex:
    i = int(np.clip(np.searchsorted(theta, t, side="right") - 1, 0, len(theta) - 2))
    span = theta[i + 1] - theta[i]
    frac = 0.0 if span == 0 else (t - theta[i]) / span
    return complex(points[i] + frac * (points[i + 1] - points[i]))


def partition_level_curve(curve: LevelCurve, n_arcs: int, K: CompactSet | None = None,
                          phase: float = 0.0) -> Partition:
    """Split a traced level curve into ``n_arcs`` arcs of equal measure.

    Arc boundaries sit at equal conjugate-angle increments (phase-shiftable),
    which makes each arc carry measure omega / n_arcs exactly.  Centroids are
    trapezoidal averages of z over theta.  Per-arc arclength, diameter, and
    distance to ``K`` (when given) are recorded for the diagnostics.
    """
    n_arcs = positive_int(n_arcs, "n_arcs")
    if len(curve) < 8 * n_arcs:
        raise InsufficientResolutionError(
            f"refine trace: {len(curve)} nodes cannot support {n_arcs} arcs "
            f"(need at least {8 * n_arcs})")
    theta0, theta1 = float(curve.theta[0]), float(curve.theta[-1])
    span = theta1 - theta0
    u = (curve.theta - theta0) / span
    z = curve.points

    shift = (phase / TWO_PI) % 1.0
    if shift > 0.0:
        # rotate the node arrays so the anchor becomes the first node
        cut = _interp(z, u, shift)
        i = int(np.searchsorted(u, shift, side="right"))
        u = np.concatenate(([0.0], u[i:] - shift, u[:i] + 1.0 - shift, [1.0]))
        z = np.concatenate(([cut], z[i:], z[:i], [cut]))

    arcs = []
    mass = curve.omega / n_arcs
    for k in range(n_arcs):
        lo, hi = k / n_arcs, (k + 1) / n_arcs
        i0 = int(np.searchsorted(u, lo, side="right"))
        i1 = int(np.searchsorted(u, hi, side="left"))
        start, end = _interp(z, u, lo), _interp(z, u, hi)
        nodes = np.concatenate(([start], z[i0:i1], [end]))
        tvals = np.concatenate(([lo], u[i0:i1], [hi]))
        centroid = complex(np.trapezoid(nodes, tvals) / (hi - lo))
        length = float(np.abs(np.diff(nodes)).sum())
        diam = float(np.abs(nodes[:, None] - nodes[None, :]).max())
        dist = float(np.min(distance_to_set(nodes, K))) if K is not None else math.nan
        arcs.append(ArcCell(theta_lo=theta0 + lo * span, theta_hi=theta0 + hi * span,
                            start=start, end=end, centroid=centroid, mass=mass,
                            length=length, diam=diam, dist=dist, nodes=nodes))
    return Partition(curve.component, curve.level, curve.omega, tuple(arcs), phase)


@dataclass(frozen=True)
class PartitionDiagnostics:
    """Geometric quality ratios of a partition against the underlying set."""

    max_length_ratio: float        # max |I_k| / d(I_k, K)
    max_diam_chord_ratio: float    # max diam(I_k) / |end_k - start_k|
    max_centroid_shift_ratio: float  # max |centroid_k - end_k| / d(I_k, K)
    length_bound_satisfied: bool   # whether |I_k| <= 0.1 d(I_k, K) everywhere
    min_enforcing_c: float         # smallest c that would satisfy the bound
    estimated_c: float


def partition_diagnostics(partition: Partition, K: CompactSet) -> PartitionDiagnostics:
    """Measure how strongly the arcs separate from the set.

    The construction is well defined at any level s = c/n, but the bound
    |I_k| <= 0.1 d(I_k, K) that drives the centroid-root error analysis only
    kicks in for large c (the ratio scales like 2*pi/c on a circle).  The
    report states the measured maxima, whether the bound holds, and the
    smallest c that would enforce it at the same total degree.
    """
    r_len, r_diam, r_cent = 0.0, 0.0, 0.0
    for a in partition.arcs:
        dist = a.dist if math.isfinite(a.dist) else float(np.min(distance_to_set(a.nodes, K)))
        chord = abs(a.end - a.start)
        r_len = max(r_len, a.length / dist)
        if chord > 0:
            r_diam = max(r_diam, a.diam / chord)
        r_cent = max(r_cent, abs(a.centroid - a.end) / dist)
    n_total = len(partition) / partition.omega
    c_est = partition.level * n_total
    return PartitionDiagnostics(
        max_length_ratio=r_len,
        max_diam_chord_ratio=r_diam,
        max_centroid_shift_ratio=r_cent,
        length_bound_satisfied=r_len <= 0.1,
        min_enforcing_c=c_est * r_len / 0.1,
        estimated_c=c_est,
    )


def arc_masses_by_flux(model: EquilibriumSolver, partition: Partition) -> np.ndarray:
    """Re-measure arc masses by integrating the normal derivative of g.

    Independent of the theta bookkeeping: the equilibrium measure of the
    level set has density |grad g| / (2*pi) with respect to arclength, so a
    plain midpoint rule along each arc's nodes must reproduce omega / n.
    """
    out = np.empty(len(partition.arcs))
    for k, a in enumerate(partition.arcs):
        mid = 0.5 * (a.nodes[1:] + a.nodes[:-1])
        seg = np.abs(np.diff(a.nodes))
        out[k] = float(np.abs(model.complex_derivative(mid)) @ seg) / TWO_PI
    return out

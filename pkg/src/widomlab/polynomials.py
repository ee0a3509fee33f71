"""Monic polynomials with centroid roots, stable evaluation, and sup norms.

Polynomials stay in root form throughout: expanding coefficients is
catastrophically ill-conditioned at the degrees used here, while |P| in root
form evaluates stably in the log domain.  Norm search exploits the maximum
principle, so only boundary curves are ever searched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LevelTooLargeError
from .geometry import CompactSet, TWO_PI, clustered_sample, distance_to_set
from .partition import DegreeAllocation, Partition, allocate_degrees, partition_level_curve
from .potential import EquilibriumSolver, LevelCurve, estimate_safe_level, trace_level_curve
from .validation import as_complex_array, positive_float, positive_int

__all__ = [
    "MonicPolynomial",
    "NormEstimate",
    "TotikBuild",
    "totik_polynomial",
    "log_eval",
    "sup_norm",
    "widom_factor",
    "interference_sum",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TotikBuild:
    """Provenance of a centroid-root polynomial."""

    c: float
    level: float
    allocation: DegreeAllocation
    curves: tuple[LevelCurve, ...]
    partitions: tuple[Partition, ...]


@dataclass(frozen=True)
class MonicPolynomial:
    """Monic polynomial kept as its root multiset."""

    roots: np.ndarray
    provenance: TotikBuild | None = None

    def __post_init__(self):
        object.__setattr__(self, "roots", np.asarray(self.roots, dtype=complex))

    @property
    def degree(self) -> int:
        return len(self.roots)

    def log_abs(self, z):
        return log_eval(self, z)


def totik_polynomial(K: CompactSet, model: EquilibriumSolver, n: int, c: float = 1.0,
                     *, step: float | None = None, phase: float = 0.0) -> MonicPolynomial:
    """Monic degree-``n`` polynomial whose roots are equal-measure centroids.

    Traces the level curve at s = c/n around every component, splits each
    curve into its allocated number of equal-measure arcs, and pools the arc
    centroids as roots.  The level must stay below half the safe level, else
    the caller should reduce c or raise n.
    """
    n = positive_int(n, "n")
    positive_float(c, "c")
    s = c / n
    ceiling = estimate_safe_level(model)
    if s >= 0.5 * ceiling:
        raise LevelTooLargeError(
            f"level c/n = {s:g} is not below half the safe level "
            f"({0.5 * ceiling:g}); reduce c or raise n")
    allocation = allocate_degrees(model.masses_, n)
    curves, partitions, roots = [], [], []
    for j, n_j in enumerate(allocation.per_component):
        trace_step = step if step is not None else TWO_PI / max(2048, 16 * n_j)
        curve = trace_level_curve(model, j, s, step=trace_step)
        part = partition_level_curve(curve, n_j, K, phase=phase)
        curves.append(curve)
        partitions.append(part)
        roots.append(part.centroids)
    roots = np.concatenate(roots)
    if np.min(distance_to_set(roots, K)) <= 0.0:
        raise LevelTooLargeError("a centroid root landed on the set; raise n or reduce c")
    return MonicPolynomial(roots, TotikBuild(c, s, allocation, tuple(curves),
                                             tuple(partitions)))


def log_eval(p: MonicPolynomial, z):
    """log|P(z)|, summed over root distances in ascending order.

    Vectorized over ``z``; evaluation exactly at a root yields -inf.
    """
    arr, scalar = as_complex_array(z)
    terms = np.abs(arr[..., None] - p.roots)
    with np.errstate(divide="ignore"):
        logs = np.log(terms)
    out = np.sort(logs, axis=-1).sum(axis=-1)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class NormEstimate:
    """Sup-norm estimate from coarse sampling plus local refinement.

    ``certified_lower`` is the best coarse sample (every reported value is an
    actually evaluated point); ``value`` is the refined maximum.  ``tolerance``
    bounds the fraction by which refinement may exceed the coarse grid for a
    degree-n oscillation at the used sampling density.
    """

    value: float
    log_value: float
    argmax: complex
    refinement_depth: int
    certified_lower: float
    tolerance: float
    converged: bool


def _local_maxima(values: np.ndarray, circular: bool) -> np.ndarray:
    if circular:
        left = np.roll(values, 1)
        right = np.roll(values, -1)
        return np.nonzero((values >= left) & (values >= right))[0]
    idx = [0, len(values) - 1]
    interior = np.nonzero((values[1:-1] >= values[:-2]) & (values[1:-1] >= values[2:]))[0] + 1
    return np.unique(np.concatenate([idx, interior]))


def _golden_max(fn, a: float, b: float, tol: float, max_iter: int):
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    depth = 0
    for depth in range(1, max_iter + 1):
        if (b - a) <= tol:
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = fn(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = fn(x1)
    converged = (b - a) <= tol
    if f1 >= f2:
        return x1, f1, depth, converged
    return x2, f2, depth, converged


def sup_norm(p: MonicPolynomial, K: CompactSet, samples: int | None = None,
             refine_tol: float = 1e-8, *, candidates: int = 5,
             max_refine: int = 80) -> NormEstimate:
    """Supremum of |P| over the set, via boundary search with refinement.

    The maximum of a polynomial modulus over a compact set is attained on the
    boundary, so each component contributes a one-dimensional search in its
    boundary parameter: coarse samples (endpoint-clustered on arcs), then
    golden-section refinement around the strongest local maxima.  Everything
    runs in the log domain and is exponentiated only on output.
    """
    n = max(p.degree, 1)
    total = samples if samples is not None else max(16 * n, 1024)
    if total < 16 * n:
        raise ValueError(f"samples must be at least 16 * degree = {16 * n}")
    lengths = np.array([c.length for c in K.components])
    counts = np.maximum((total * lengths / lengths.sum()).astype(int), 64)

    best_coarse = -math.inf
    per_comp = []
    for comp, m in zip(K.components, counts):
        pts, params = clustered_sample(comp, int(m))
        logs = log_eval(p, pts)
        per_comp.append((comp, params, logs))
        best_coarse = max(best_coarse, float(logs.max()))

    cands = []
    for comp, params, logs in per_comp:
        for i in _local_maxima(logs, comp.is_closed):
            cands.append((float(logs[i]), comp, params, int(i)))
    cands.sort(key=lambda t: -t[0])

    best_log, best_arg = best_coarse, None
    depth_used, all_converged = 0, True
    for logv, comp, params, i in cands[:candidates]:
        m = len(params)
        if comp.is_closed:
            lo = params[(i - 1) % m] if i > 0 else params[-1] - comp.length
            hi = params[(i + 1) % m] if i < m - 1 else params[0] + comp.length
        else:
            lo = params[max(i - 1, 0)]
            hi = params[min(i + 1, m - 1)]
        if hi <= lo:
            continue
        fn = lambda t: float(log_eval(p, comp.point_at(np.array([t]))[0]))
        t_star, f_star, depth, conv = _golden_max(fn, float(lo), float(hi),
                                                  refine_tol * comp.length, max_refine)
        depth_used = max(depth_used, depth)
        all_converged = all_converged and conv
        if f_star > best_log:
            best_log = f_star
            best_arg = complex(comp.point_at(np.array([t_star]))[0])
    if best_arg is None:
        for comp, params, logs in per_comp:
            i = int(np.argmax(logs))
            if float(logs[i]) == best_coarse:
                best_arg = complex(comp.point_at(np.array([params[i]]))[0])
                break
    nyquist = (math.pi * n / (2.0 * counts.min())) ** 2
    return NormEstimate(value=math.exp(best_log), log_value=best_log,
                        argmax=best_arg, refinement_depth=depth_used,
                        certified_lower=math.exp(best_coarse),
                        tolerance=max(nyquist, 8.0 * refine_tol),
                        converged=all_converged)


def widom_factor(p: MonicPolynomial, K: CompactSet, model: EquilibriumSolver,
                 norm: NormEstimate | None = None) -> float:
    """||P|| / capacity^degree, computed entirely in the log domain."""
    est = norm if norm is not None else sup_norm(p, K)
    return math.exp(est.log_value + p.degree * model.robin_)


def interference_sum(partitions, z):
    """Sum over all arcs of (diam / distance-to-arc)^2 at the points ``z``.

    Measures how strongly the root cells crowd a boundary point; it is the
    quantity that separates log|P| from the capacity line in the norm bound.
    """
    parts = list(partitions)
    arr, scalar = as_complex_array(z)
    seg_a, seg_b, owner = [], [], []
    diams = []
    for part in parts:
        for a in part.arcs:
            seg_a.append(a.nodes[:-1])
            seg_b.append(a.nodes[1:])
            owner.append(np.full(len(a.nodes) - 1, len(diams), dtype=int))
            diams.append(a.diam)
    a_all = np.concatenate(seg_a)
    b_all = np.concatenate(seg_b)
    owner = np.concatenate(owner)
    diams = np.asarray(diams)
    d = b_all - a_all
    lens2 = np.abs(d) ** 2
    out = np.empty(arr.shape)
    flat = arr.ravel()
    order = np.argsort(owner, kind="stable")
    bounds = np.searchsorted(owner[order], np.arange(len(diams)))
    for i, zv in enumerate(flat):
        t = np.clip(((zv - a_all).real * d.real + (zv - a_all).imag * d.imag) / lens2, 0.0, 1.0)
        dist = np.abs(zv - (a_all + t * d))
        per_arc = np.minimum.reduceat(dist[order], bounds)
        out.ravel()[i] = float(np.sum((diams / per_arc) ** 2))
    return float(out.ravel()[0]) if scalar else out

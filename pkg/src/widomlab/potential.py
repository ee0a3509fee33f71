"""Equilibrium measure, Green's function, and level curves of the complement.

The equilibrium problem is discretized as a single layer of point charges
sitting on the boundary of each component.  On closed curves the charges live
on a uniform grid of a periodic parametrization; on open arcs the grid is the
image of a uniform grid under a cosine substitution, which traverses the arc
twice and absorbs the inverse-square-root density blowup at the endpoints.
In both cases the logarithmic self-interaction is integrated with spectrally
accurate trigonometric quadrature weights, so the circle and the straight
segment come out exact to rounding and smooth curves converge spectrally.

Collocation enforces a constant potential on the charge grid itself; the
constant is the Robin constant, whose exponential is the capacity.  A
held-out set of staggered boundary points provides an a-posteriori residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import (
    GeometryError,
    IllConditionedSystemError,
    InsufficientResolutionError,
    LevelTooLargeError,
    TraceError,
)
from .geometry import CompactSet, Disk, JordanPolyline, Segment, TWO_PI
from .validation import as_complex_array, nonnegative_float, positive_float, positive_int

__all__ = [
    "EquilibriumSolver",
    "LevelCurve",
    "solve_equilibrium",
    "green",
    "capacity",
    "level_capacity_check",
    "trace_level_curve",
    "estimate_safe_level",
    "conjugate_net_change",
]

_CHUNK = 2048


@lru_cache(maxsize=64)
def _log_tables(n: int):
    """Quadrature tables on the uniform n-grid of [0, 2*pi).

    ``kappa[k]`` integrates the log|2 sin((t - tau)/2)| factor exactly against
    trigonometric polynomials of degree < n/2; ``log2sin[k]`` is the factor
    itself at grid offset k (index 0 unused, patched by callers).
    """
    k = np.arange(n)
    m = np.arange(1, n // 2)
    ang = TWO_PI * k / n
    kappa = -(np.cos(np.outer(m, ang)) / m[:, None]).sum(axis=0) - np.cos(np.pi * k) / n
    log2sin = np.zeros(n)
    log2sin[1:] = np.log(2.0 * np.abs(np.sin(np.pi * k[1:] / n)))
    return kappa, log2sin


@dataclass
class _ComponentGrid:
    nodes: np.ndarray          # physical charge points, listed once
    colloc: np.ndarray         # collocation points (== nodes)
    block: np.ndarray          # self-interaction matrix, colloc x nodes
    validation: np.ndarray     # staggered held-out boundary points
    flux_speed: float          # |dz/dt| scale, informational


def _closed_grid(shape, m: int) -> _ComponentGrid:
    n = m
    if isinstance(shape, Disk):
        t = TWO_PI * np.arange(n) / n
        z = shape.center + shape.radius * np.exp(1j * t)
        zv = shape.center + shape.radius * np.exp(1j * (t + math.pi / n))
        speed = shape.radius
    else:
        length = shape.length
        s = length * np.arange(n) / n
        z = shape.point_at(s)
        zv = shape.point_at(s + 0.5 * length / n)
        speed = length / TWO_PI
    kappa, log2sin = _log_tables(n)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    dist = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(dist, 1.0)
    smooth = np.log(dist) - log2sin[idx]
    np.fill_diagonal(smooth, math.log(speed))
    return _ComponentGrid(z, z, kappa[idx] + smooth, zv, speed)


def _arc_grid(shape, m: int) -> _ComponentGrid:
    n = 2 * m
    length = shape.length
    j = np.arange(n)
    t = TWO_PI * (j + 0.5) / n
    s = 0.5 * length * (1.0 - np.cos(t))
    z = shape.point_at(s)
    kappa, log2sin = _log_tables(n)
    i1 = (j[:, None] - j[None, :]) % n
    i2 = (j[:, None] + j[None, :] + 1) % n
    dist = np.abs(z[:, None] - z[None, :])
    patch = dist < 1e-9 * length
    dist[patch] = 1.0
    smooth = np.log(dist) - log2sin[i1] - log2sin[i2]
    smooth[patch] = math.log(0.25 * length)
    full = kappa[i1] + kappa[i2] + smooth
    # The two cosine sheets carry the same physical points; fold the twin
    # columns into one unknown per point and drop the duplicated rows.
    half = 0.5 * (full[:, :m] + full[:, ::-1][:, :m])
    block = half[:m, :]
    sv = 0.5 * length * (1.0 - np.cos(TWO_PI * (np.arange(m) + 1.0) / n))
    zv = shape.point_at(sv)
    return _ComponentGrid(z[:m], z[:m], block, zv, 0.25 * length)


class EquilibriumSolver(BaseEstimator):
    """Discrete equilibrium measure of a compact set, sklearn-style.

    Parameters
    ----------
    n_nodes : int
        Charge nodes per component (even; odd values are rounded up).
    regularization : float
        Optional Tikhonov weight pulling charges toward uniform; default 0.
    residual_tolerance : float
        Maximum accepted sup|g| on held-out staggered boundary points.  The
        held-out points are evaluated with the raw charge sum, whose intrinsic
        bias decays like 1/n_nodes, so this is a coarse sanity bound rather
        than a solve accuracy measure.
    condition_limit : float
        Maximum accepted condition number of the collocation system.

    After ``fit`` the instance carries ``charge_points_``, ``weights_``,
    ``robin_``, ``masses_``, ``validation_residual_`` and can evaluate the
    Green's function anywhere in the complement.
    """

    def __init__(self, n_nodes=512, regularization=0.0, residual_tolerance=0.05,
                 condition_limit=1e12):
        self.n_nodes = n_nodes
        self.regularization = regularization
        self.residual_tolerance = residual_tolerance
        self.condition_limit = condition_limit

    # -- fitting -------------------------------------------------------------

    def fit(self, K: CompactSet, y=None):
        if not isinstance(K, CompactSet):
            raise TypeError("fit expects a CompactSet")
        m = positive_int(self.n_nodes, "n_nodes", minimum=32)
        m += m % 2
        nonnegative_float(self.regularization, "regularization")

        grids = [
            _closed_grid(c, m) if c.is_closed else _arc_grid(c, m)
            for c in K.components
        ]
        sizes = [len(g.nodes) for g in grids]
        offsets = np.concatenate(([0], np.cumsum(sizes)))
        N = offsets[-1]
        A = np.empty((N, N))
        for i, gi in enumerate(grids):
            ri = slice(offsets[i], offsets[i + 1])
            for j, gj in enumerate(grids):
                cj = slice(offsets[j], offsets[j + 1])
                if i == j:
                    A[ri, cj] = gi.block
                else:
                    A[ri, cj] = np.log(np.abs(gi.colloc[:, None] - gj.nodes[None, :]))

        # Eliminate the unit-mass constraint exactly: the last weight is
        # 1 - sum(others).  Remaining unknowns: N-1 weights and the Robin
        # constant; solved by orthogonal factorization.
        rhs = -A[:, -1]
        sys = np.hstack([A[:, :-1] - A[:, -1:], np.ones((N, 1))])
        lam = float(self.regularization)
        if lam > 0.0:
            reg = np.hstack([lam * np.eye(N - 1), np.zeros((N - 1, 1))])
            sys = np.vstack([sys, reg])
            rhs = np.concatenate([rhs, np.full(N - 1, lam / N)])
        x, _, _, sv = np.linalg.lstsq(sys, rhs, rcond=None)
        cond = float(sv[0] / sv[-1]) if sv.size and sv[-1] > 0 else math.inf
        if cond > float(self.condition_limit):
            raise IllConditionedSystemError(
                f"collocation system condition {cond:.3e} exceeds limit "
                f"{float(self.condition_limit):.1e}", condition=cond)

        weights = np.concatenate([x[:-1], [1.0 - x[:-1].sum()]])
        robin = float(x[-1])

        self.set_ = K
        self.charge_points_ = np.concatenate([g.nodes for g in grids])
        self.weights_ = weights
        self.robin_ = robin
        self.component_of_ = np.concatenate(
            [np.full(s, i, dtype=int) for i, s in enumerate(sizes)])
        self.masses_ = np.array([weights[offsets[i]:offsets[i + 1]].sum()
                                 for i in range(len(grids))])
        self.condition_ = cond
        self.min_weight_ = float(weights.min())
        self.negative_weight_count_ = int(np.sum(weights < 0.0))
        held_out = np.concatenate([g.validation for g in grids])
        self.validation_residual_ = float(np.max(np.abs(self.green(held_out))))
        self._safe_level = None
        if self.validation_residual_ > float(self.residual_tolerance):
            raise InsufficientResolutionError(
                f"insufficient resolution: held-out potential residual "
                f"{self.validation_residual_:.3e} exceeds tolerance "
                f"{float(self.residual_tolerance):.1e}",
                residual=self.validation_residual_)
        return self

    def _check_fitted(self):
        if not hasattr(self, "weights_"):
            raise NotFittedError("solver is not fitted; call fit(K) first")

    # -- spec-named field aliases ---------------------------------------------

    @property
    def charge_points(self):
        self._check_fitted()
        return self.charge_points_

    @property
    def weights(self):
        self._check_fitted()
        return self.weights_

    @property
    def robin(self) -> float:
        self._check_fitted()
        return self.robin_

    @property
    def masses(self):
        self._check_fitted()
        return self.masses_

    @property
    def validation_residual(self) -> float:
        self._check_fitted()
        return self.validation_residual_

    # -- evaluation ------------------------------------------------------------

    def green(self, z, flag_interior: bool = False):
        """Green's function g(z) = sum_i q_i log|z - y_i| + robin.

        Vectorized over ``z``.  With ``flag_interior`` a value below -1e-6 in
        relative scale raises, since g is positive on the complement.
        """
        self._check_fitted()
        arr, scalar = as_complex_array(z)
        flat = arr.ravel()
        out = np.empty(flat.shape, dtype=float)
        y, q = self.charge_points_, self.weights_
        for lo in range(0, flat.size, _CHUNK):
            blk = flat[lo:lo + _CHUNK, None] - y[None, :]
            out[lo:lo + _CHUNK] = np.log(np.abs(blk)) @ q
        out += self.robin_
        if flag_interior and np.any(out < -1e-6 * max(1.0, abs(self.robin_))):
            raise GeometryError("green evaluated at points inside the set")
        out = out.reshape(arr.shape)
        return float(out[0]) if scalar else out

    def predict(self, z):
        """Alias of :meth:`green`, for estimator-style composition."""
        return self.green(z)

    def complex_derivative(self, z):
        """Derivative of the complex potential, sum_i q_i / (z - y_i)."""
        self._check_fitted()
        arr, scalar = as_complex_array(z)
        flat = arr.ravel()
        out = np.empty(flat.shape, dtype=complex)
        y, q = self.charge_points_, self.weights_
        for lo in range(0, flat.size, _CHUNK):
            out[lo:lo + _CHUNK] = (1.0 / (flat[lo:lo + _CHUNK, None] - y[None, :])) @ q
        out = out.reshape(arr.shape)
        return complex(out[0]) if scalar else out

    def capacity(self) -> float:
        """Logarithmic capacity exp(-robin)."""
        self._check_fitted()
        return math.exp(-self.robin_)

    # -- serialization -----------------------------------------------------------

    def to_dict(self) -> dict:
        self._check_fitted()
        return {
            "params": self.get_params(),
            "charge_points": [[p.real, p.imag] for p in self.charge_points_],
            "weights": self.weights_.tolist(),
            "robin": self.robin_,
            "component_of": self.component_of_.tolist(),
            "masses": self.masses_.tolist(),
            "condition": self.condition_,
            "validation_residual": self.validation_residual_,
        }

    @classmethod
    def from_dict(cls, data: dict, K: CompactSet | None = None) -> "EquilibriumSolver":
        model = cls(**data["params"])
        pts = np.array([complex(x, y) for x, y in data["charge_points"]])
        model.set_ = K
        model.charge_points_ = pts
        model.weights_ = np.asarray(data["weights"], dtype=float)
        model.robin_ = float(data["robin"])
        model.component_of_ = np.asarray(data["component_of"], dtype=int)
        model.masses_ = np.asarray(data["masses"], dtype=float)
        model.condition_ = float(data["condition"])
        model.min_weight_ = float(model.weights_.min())
        model.negative_weight_count_ = int(np.sum(model.weights_ < 0.0))
        model.validation_residual_ = float(data["validation_residual"])
        model._safe_level = None
        return model


def solve_equilibrium(K: CompactSet, m: int = 512, regularization: float = 0.0,
                      **kwargs) -> EquilibriumSolver:
    """Solve the equilibrium problem with ``m`` charge nodes per component."""
    return EquilibriumSolver(n_nodes=m, regularization=regularization, **kwargs).fit(K)


def green(model: EquilibriumSolver, z):
    return model.green(z)


def capacity(model: EquilibriumSolver) -> float:
    return model.capacity()


# -- level curves ---------------------------------------------------------------


@dataclass(frozen=True)
class LevelCurve:
    """Positively oriented trace of one component's Green level curve.

    ``theta`` is the conjugate-angle parameter: the accumulated change of the
    conjugate potential divided by the component mass.  It runs from 0 to
    2*pi over one closed loop and is strictly increasing along the trace.
    """

    component: int
    level: float
    points: np.ndarray
    theta: np.ndarray
    omega: float
    tolerance: float

    def __post_init__(self):
        if len(self.points) != len(self.theta):
            raise ValueError("points/theta length mismatch")

    def __len__(self) -> int:
        return len(self.points)

    def reversed(self) -> "LevelCurve":
        """Same geometric curve traversed backwards; theta is negated."""
        return LevelCurve(self.component, self.level, self.points[::-1].copy(),
                          -self.theta[::-1].copy(), self.omega, self.tolerance)


def _theta_increment(model: EquilibriumSolver, z_old: complex, z_new: complex) -> float:
    """Net change of the conjugate potential along the short step z_old -> z_new."""
    y, q = model.charge_points_, model.weights_
    return float(np.angle((z_new - y) / (z_old - y)) @ q)


def conjugate_net_change(model: EquilibriumSolver, points: np.ndarray) -> float:
    """Total conjugate-potential change around the closed polyline ``points``.

    Implements the discrete Gauss theorem: for a loop enclosing exactly the
    charges of component j the result is 2*pi times the component mass, up to
    rounding, independent of how the loop was produced.
    """
    pts = np.asarray(points, dtype=complex)
    if abs(pts[0] - pts[-1]) > 0:
        pts = np.concatenate([pts, pts[:1]])
    y, q = model.charge_points_, model.weights_
    starts, ends = pts[:-1], pts[1:]
    total = 0.0
    for lo in range(0, len(starts), _CHUNK):
        z0 = starts[lo:lo + _CHUNK, None]
        z1 = ends[lo:lo + _CHUNK, None]
        total += float((np.angle((z1 - y[None, :]) / (z0 - y[None, :])) @ q).sum())
    return total


def _trace_anchor(model: EquilibriumSolver, j: int):
    """Deterministic, isometry-equivariant seed point and outward direction.

    Disks carry a continuous symmetry, so their anchor is the exact support
    point away from the whole set's reference (falling back to a fixed gauge
    for a single centered disk); other shapes use the sample farthest from
    the component reference, whose index tie-break follows the equivariant
    sample order.
    """
    comp = model.set_.components[j]
    ref = comp.reference_point
    set_ref = np.mean([c.reference_point for c in model.set_.components])
    if isinstance(comp, Disk):
        away = ref - set_ref
        direction = away / abs(away) if abs(away) > 1e-12 * comp.diameter else 1.0 + 0j
        return ref + comp.radius * direction, direction
    pts, _ = comp.sample(64)
    seed = pts[int(np.argmax(np.abs(pts - ref)))]
    direction = seed - ref
    direction = direction / abs(direction) if abs(direction) > 0 else 1.0 + 0j
    return seed, direction


def _find_start(model: EquilibriumSolver, j: int, s: float) -> complex:
    comp = model.set_.components[j]
    seed, direction = _trace_anchor(model, j)
    r = max(comp.diameter, 1e-3) * 0.25
    for _ in range(80):
        if model.green(seed + r * direction) > s:
            break
        r *= 2.0
    else:
        raise TraceError("could not bracket the level along the outward ray")
    lo, hi = 0.0, r
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if model.green(seed + mid * direction) > s:
            hi = mid
        else:
            lo = mid
    z = seed + hi * direction
    for _ in range(30):
        g = model.green(z)
        if abs(g - s) <= 1e-13 * max(1.0, s):
            break
        d = model.complex_derivative(z)
        z -= (g - s) * np.conj(d) / abs(d) ** 2
    return complex(z)


def trace_level_curve(model: EquilibriumSolver, j: int, s: float,
                      step: float = TWO_PI / 2048, *, corrector_tol: float = 1e-11,
                      max_theta_error: float = 1e-6) -> LevelCurve:
    """Trace the level curve {g = s} around component ``j``.

    Predictor steps run along the tangent with the conjugate-angle increment
    capped at ``step``; a Newton corrector along the gradient returns each
    node to the level set.  Increments of the multivalued conjugate potential
    are accumulated charge by charge, each unwrapped to (-pi, pi], so theta is
    continuous by construction.

    Raises :class:`LevelTooLargeError` when the loop's net conjugate change
    shows the curve enclosing more than component ``j``.
    """
    model._check_fitted()
    if model.set_ is None:
        raise TraceError("model carries no geometry; refit or attach the set")
    positive_float(s, "s")
    positive_float(step, "step")
    if not 0 <= j < len(model.masses_):
        raise IndexError(f"component index {j} out of range")
    omega = float(model.masses_[j])
    z0 = _find_start(model, j, s)
    zs = [z0]
    thetas = [0.0]
    z, theta = z0, 0.0
    corr_tol = corrector_tol * max(1.0, s)
    max_steps = int(60.0 * TWO_PI / step)
    failures = 0
    while theta < TWO_PI - 1e-12:
        h = min(step, TWO_PI - theta)
        accepted = False
        for _ in range(40):
            d = model.complex_derivative(z)
            ad = abs(d)
            if ad < 1e-14:
                raise LevelTooLargeError(
                    f"level {s:g} reaches a critical point of the potential")
            z_pred = z + 1j * np.conj(d) / ad * (h * omega / ad)
            z_new, ok = z_pred, False
            for _ in range(12):
                g = model.green(z_new)
                if abs(g - s) <= corr_tol:
                    ok = True
                    break
                dn = model.complex_derivative(z_new)
                adn = abs(dn)
                if adn < 1e-14:
                    break
                z_new = z_new - (g - s) * np.conj(dn) / adn ** 2
            if ok:
                dtheta = _theta_increment(model, z, complex(z_new)) / omega
                if 0.0 < dtheta <= min(2.5 * step, 0.5):
                    z = complex(z_new)
                    theta += dtheta
                    zs.append(z)
                    thetas.append(theta)
                    accepted = True
                    break
            h *= 0.5
            failures += 1
        if not accepted:
            raise TraceError(
                f"corrector failed to converge near {z:.6g} at level {s:g}")
        if len(zs) > max_steps:
            raise TraceError(f"trace exceeded {max_steps} nodes at level {s:g}")

    gap = abs(z - z0)
    spatial_scale = float(np.median(np.abs(np.diff(zs[:64])))) if len(zs) > 2 else gap
    closing = _theta_increment(model, z, z0) / omega
    total = theta + closing
    if abs(total - TWO_PI) > max_theta_error or gap > 50.0 * max(spatial_scale, 1e-14):
        raise LevelTooLargeError(
            f"level {s:g} exceeds the disjointness threshold for component {j}: "
            f"net conjugate change {total * omega:.6f} != 2*pi*mass "
            f"({TWO_PI * omega:.6f})")
    zs.append(z0)
    thetas.append(total)
    return LevelCurve(j, float(s), np.asarray(zs), np.asarray(thetas), omega,
                      corr_tol)


def estimate_safe_level(model: EquilibriumSolver, *, ceiling: float = 1.0,
                        probe_step: float = TWO_PI / 256, bisections: int = 12) -> float:
    """Largest level at which all component curves stay disjoint, halved.

    For a single component there is nothing to merge and the configured
    ceiling is returned.  Otherwise the threshold is bracketed by probing
    traces (closure plus the requirement that every trace node is nearest to
    its own component) and refined by bisection; half the detected threshold
    is returned as a safety margin.  The result is cached on the model.
    """
    model._check_fitted()
    if model.set_ is None:
        raise TraceError("model carries no geometry")
    cached = getattr(model, "_safe_level", None)
    if cached is not None:
        return cached
    m = len(model.masses_)
    if m == 1:
        model._safe_level = float(ceiling)
        return model._safe_level

    K = model.set_

    def ok(s: float) -> bool:
        try:
            for j in range(m):
                curve = trace_level_curve(model, j, s, step=probe_step)
                if np.any(K.nearest_component(curve.points) != j):
                    return False
            return True
        except TraceError:
            return False

    hi = float(ceiling)
    if ok(hi):
        model._safe_level = hi
        return hi
    lo = hi / 2.0
    shrink = 0
    while not ok(lo):
        hi = lo
        lo /= 2.0
        shrink += 1
        if shrink > 20:
            raise TraceError("no traceable level found; components may be too close")
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    model._safe_level = 0.5 * lo
    return model._safe_level


def level_capacity_check(model: EquilibriumSolver, s: float, *,
                         n_nodes: int | None = None,
                         trace_step: float = TWO_PI / 2048) -> float:
    """Ratio of the re-solved capacity of the traced level set to e^s * cap.

    The level curves are traced, rebuilt as closed polylines, and their
    equilibrium problem is solved from scratch; the capacity scaling law
    predicts a ratio of exactly 1.
    """
    model._check_fitted()
    positive_float(s, "s")
    curves = [trace_level_curve(model, j, s, step=trace_step)
              for j in range(len(model.masses_))]
    shapes = tuple(JordanPolyline(tuple(c.points[:-1])) for c in curves)
    K_s = CompactSet(shapes)
    nodes = n_nodes or min(2048, max(512, len(curves[0]) // 2))
    lifted = solve_equilibrium(K_s, nodes, residual_tolerance=math.inf)
    return lifted.capacity() / (math.exp(s) * model.capacity())

"""Reference minimax (Chebyshev) polynomials via Lawson iteration.

Lawson's method is iteratively reweighted least squares: at each pass the
weighted L2-optimal monic polynomial is computed and the weights are scaled
by the residual moduli, which drives the weighted solution toward the
uniform-norm minimizer.  The least-squares step orthonormalizes the basis
against the current weighted sample inner product with an Arnoldi-style
recurrence, so conditioning never sees raw monomials and the optimal monic
residual is available in closed form at every iteration.

This module exists to calibrate the centroid-root construction; it is a
reference oracle at small degree, not a certified minimax solver.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .geometry import CompactSet, clustered_sample
from .validation import positive_int

__all__ = [
    "MinimaxResult",
    "LawsonChebyshev",
    "lawson_chebyshev",
    "interval_oracle",
    "two_interval_even_oracle",
    "TwoIntervalOracle",
    "boundary_sample_set",
    "perturbation_slack",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MinimaxResult:
    """Monic minimax approximation: T_n = z^n + sum_k c_k z^k.

    ``flatness`` is the ratio of the 5th percentile to the maximum of the
    residual moduli over the actively weighted samples; it approaches 1 as
    the error curve equioscillates.
    """

    degree: int
    coefficients: np.ndarray
    norm: float
    log_norm: float
    iterations: int
    flatness: float
    converged: bool
    history: tuple[float, ...]

    def __call__(self, z):
        coeffs = np.concatenate([[1.0 + 0j], self.coefficients[::-1]])
        return np.polyval(coeffs, np.asarray(z, dtype=complex))


def boundary_sample_set(K: CompactSet, total: int) -> np.ndarray:
    """Boundary samples for fitting: uniform on closed curves, endpoint
    clustered on arcs, counts proportional to arclength."""
    lengths = np.array([c.length for c in K.components])
    counts = np.maximum((total * lengths / lengths.sum()).astype(int), 32)
    return np.concatenate([clustered_sample(c, int(m))[0]
                           for c, m in zip(K.components, counts)])


def _weighted_monic_ls(z: np.ndarray, w: np.ndarray, n: int):
    """Weighted-L2-optimal monic polynomial of degree n on samples ``z``.

    Builds an orthonormal basis for the weighted sample inner product by the
    z-shift recurrence with full reorthogonalization.  In that basis the
    optimal monic polynomial is just the top basis vector rescaled by the
    product of the recurrence norms, so the residual values come out stably
    even when the norm underflows any fixed scale.

    Returns (log of max residual, residual moduli relative to their max,
    monomial coefficients of the correction c_0..c_{n-1}).
    """
    m = len(z)
    Q = np.empty((m, n + 1), dtype=complex)
    C = np.zeros((n + 1, n + 1), dtype=complex)
    norm0 = math.sqrt(float(w.sum()))
    Q[:, 0] = 1.0 / norm0
    C[0, 0] = 1.0 / norm0
    log_scale = math.log(norm0)
    for k in range(n):
        v = z * Q[:, k]
        cv = np.zeros(n + 1, dtype=complex)
        cv[1:k + 2] = C[:k + 1, k]
        for _ in range(2):
            proj = (w * v) @ np.conj(Q[:, :k + 1])
            v -= Q[:, :k + 1] @ proj
            cv -= C[:, :k + 1] @ proj
        h = math.sqrt(float(w @ (np.abs(v) ** 2)))
        if h <= 0.0 or not math.isfinite(h):
            raise ValueError("degenerate sample set: basis recurrence broke down")
        Q[:, k + 1] = v / h
        C[:, k + 1] = cv / h
        log_scale += math.log(h)
    # optimal monic residual is phi_n * prod(h) * norm0; only the log of its
    # max and the relative moduli are needed, which sidesteps underflow
    peak = float(np.max(np.abs(Q[:, n])))
    log_norm = log_scale + math.log(peak)
    lead = C[n, n]
    coeffs = (C[:, n] / lead)[:n] if lead != 0 else C[:n, n]
    return log_norm, np.abs(Q[:, n]) / peak, coeffs


class LawsonChebyshev(BaseEstimator):
    """Monic minimax polynomial on a compact set, sklearn-style.

    Parameters
    ----------
    degree : int
        Polynomial degree, at most 64 (conditioning guard for the reference
        role of this solver).
    samples : int or None
        Boundary samples; default max(16 * degree, 512), and at least
        16 * degree is enforced.
    max_iter, tol : Lawson iteration controls.  The iteration stops once the
        maximum residual changes by less than ``tol`` relatively.
    stall_limit : iterations without improvement before returning the best
        iterate with ``converged_ = False``.
    """

    def __init__(self, degree=8, samples=None, max_iter=250, tol=1e-9, stall_limit=40):
        self.degree = degree
        self.samples = samples
        self.max_iter = max_iter
        self.tol = tol
        self.stall_limit = stall_limit

    def fit(self, K: CompactSet, y=None):
        n = positive_int(self.degree, "degree")
        if n > 64:
            raise ValueError("degree above 64 is outside the reference solver's guard")
        total = self.samples if self.samples is not None else max(16 * n, 512)
        total = positive_int(total, "samples", minimum=16 * n)
        z = boundary_sample_set(K, total)
        m = len(z)
        w = np.full(m, 1.0 / m)

        best = None
        history = []
        prev = math.inf
        converged = False
        iters = 0
        for iters in range(1, int(self.max_iter) + 1):
            log_norm, rel_abs, coeffs = _weighted_monic_ls(z, w, n)
            history.append(log_norm)
            if best is None or log_norm < best[0]:
                best = (log_norm, rel_abs.copy(), w.copy(), coeffs, iters)
            elif log_norm > best[0] + abs(self.tol):
                logger.debug("lawson rebound at iter %d: %.3e above best", iters,
                             log_norm - best[0])
            if abs(prev - log_norm) <= abs(self.tol) * max(1.0, abs(log_norm)):
                converged = True
                break
            if iters - best[4] > int(self.stall_limit):
                break
            prev = log_norm
            w = w * rel_abs
            total_w = w.sum()
            if total_w <= 0.0:
                break
            w /= total_w

        log_norm, rel_abs, w_best, coeffs, _ = best
        active = w_best >= 1e-3 * w_best.max()
        flatness = float(np.percentile(rel_abs[active], 5.0)) if active.any() else 0.0

        self.set_ = K
        self.samples_ = z
        self.weights_ = w_best
        self.coefficients_ = coeffs
        self.log_norm_ = log_norm
        self.norm_ = math.exp(log_norm)
        self.iterations_ = iters
        self.flatness_ = flatness
        self.converged_ = converged
        self.history_ = tuple(history)
        self.result_ = MinimaxResult(n, coeffs, self.norm_, log_norm, iters,
                                     flatness, converged, self.history_)
        return self

    def predict(self, z):
        """Evaluate the fitted monic polynomial via its coefficients.

        Fine at reference degrees; at the top of the degree range the values
        carry coefficient-expansion rounding and only their scale is
        meaningful near the set.
        """
        if not hasattr(self, "result_"):
            raise NotFittedError("call fit(K) first")
        return self.result_(z)


def lawson_chebyshev(K: CompactSet, n: int, samples: int | None = None,
                     max_iters: int = 250, tol: float = 1e-9) -> MinimaxResult:
    """Monic minimax reference solution of degree ``n`` on ``K``."""
    est = LawsonChebyshev(degree=n, samples=samples, max_iter=max_iters, tol=tol)
    return est.fit(K).result_


def interval_oracle(n: int) -> float:
    """Exact monic Chebyshev norm on [-1, 1]: 2^(1-n)."""
    n = positive_int(n, "n")
    return 2.0 ** (1 - n)


@dataclass(frozen=True)
class TwoIntervalOracle:
    capacity: float
    norm: float
    degree: int


def two_interval_even_oracle(a: float, m: int) -> TwoIntervalOracle:
    """Exact even-degree minimax data on [-1, -a] U [a, 1].

    The set is the preimage of [a^2, 1] under z -> z^2, so the degree-2m
    minimax polynomial is the degree-m monic Chebyshev polynomial of
    [a^2, 1] composed with z^2: capacity sqrt(1-a^2)/2 and norm
    2 * ((1-a^2)/4)^m, a Widom factor of exactly 2 at even degrees.
    """
    if not 0.0 < a < 1.0:
        raise ValueError("a must lie strictly between 0 and 1")
    m = positive_int(m, "m")
    half_len = (1.0 - a * a) / 4.0
    return TwoIntervalOracle(capacity=math.sqrt(1.0 - a * a) / 2.0,
                             norm=2.0 * half_len ** m, degree=2 * m)


def perturbation_slack(result: MinimaxResult, K: CompactSet, rng,
                       trials: int = 16, rel: float = 1e-3,
                       samples: int = 2048) -> float:
    """Largest decrease of the sampled max residual under random coefficient
    perturbations of size rel * norm.  Near optimality this is <= 0."""
    z = boundary_sample_set(K, samples)
    base = float(np.max(np.abs(result(z))))
    worst = 0.0
    for _ in range(trials):
        delta = rng.standard_normal(result.degree) + 1j * rng.standard_normal(result.degree)
        delta *= rel * result.norm / np.linalg.norm(delta)
        perturbed = MinimaxResult(result.degree, result.coefficients + delta,
                                  result.norm, result.log_norm, result.iterations,
                                  result.flatness, result.converged, ())
        worst = max(worst, base - float(np.max(np.abs(perturbed(z)))))
    return worst

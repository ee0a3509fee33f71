import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from widomlab.minimax import (
    LawsonChebyshev,
    interval_oracle,
    lawson_chebyshev,
    perturbation_slack,
    two_interval_even_oracle,
    _weighted_monic_ls,
)


def remez_monic_norm(a: float, b: float, m: int, iters: int = 60) -> float:
    """Brute-force exchange iteration for the monic minimax norm on [a, b].

    Independent of the Lawson machinery: solves the equioscillation system on
    m + 2 reference points and exchanges them against a dense grid argmax.
    """
    # alternation set for a monic degree-m minimizer has m + 1 points
    k = np.arange(m + 1)
    ref = 0.5 * (a + b) - 0.5 * (b - a) * np.cos(math.pi * k / m)
    grid = np.linspace(a, b, 20000)

    def solve_on(ref_pts):
        A = np.vander(ref_pts, m + 1, increasing=True)
        sign = (-1.0) ** np.arange(m + 1)
        return np.linalg.solve(np.hstack([A[:, :m], -sign[:, None]]), -ref_pts ** m)

    for _ in range(iters):
        sol = solve_on(ref)
        coeffs = sol[:m]
        err = grid ** m + sum(c * grid ** i for i, c in enumerate(coeffs))
        # exchange: local extrema of |err| plus the endpoints
        mag = np.abs(err)
        idx = [0, len(grid) - 1]
        interior = np.nonzero((mag[1:-1] >= mag[:-2]) & (mag[1:-1] >= mag[2:]))[0] + 1
        idx = np.unique(np.concatenate([idx, interior]))
        top = idx[np.argsort(mag[idx])[::-1][:m + 1]]
        new_ref = np.sort(grid[top])
        if len(new_ref) < m + 1 or np.allclose(new_ref, ref, atol=1e-14):
            break
        ref = new_ref
    return abs(float(solve_on(ref)[-1]))


class TestOracles:
    def test_interval_oracle_values(self):
        assert interval_oracle(1) == 1.0
        assert interval_oracle(4) == 0.125
        assert interval_oracle(10) == pytest.approx(2.0 ** -9)

    def test_two_interval_closed_form(self):
        orc = two_interval_even_oracle(0.5, 1)
        assert orc.capacity == pytest.approx(0.4330127018922193, abs=1e-12)
        assert orc.norm == pytest.approx(0.375, abs=1e-12)
        assert orc.norm / orc.capacity ** 2 == pytest.approx(2.0, abs=1e-10)

    def test_two_interval_m3(self):
        assert two_interval_even_oracle(0.5, 3).norm == pytest.approx(
            2 * 0.1875 ** 3, abs=1e-12)

    def test_degenerate_limit(self):
        assert two_interval_even_oracle(1e-12, 1).capacity == pytest.approx(0.5)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_against_brute_force_remez(self, m):
        # the even-degree norm equals the monic minimax norm on the squared
        # interval; the exchange iteration provides that value independently
        a = 0.5
        remez = remez_monic_norm(a * a, 1.0, m)
        assert two_interval_even_oracle(a, m).norm == pytest.approx(remez, rel=1e-4)

    def test_remez_sanity_on_symmetric_interval(self):
        # monic Chebyshev on [-1, 1] as a Remez self-test
        assert remez_monic_norm(-1.0, 1.0, 3) == pytest.approx(0.25, rel=1e-6)


class TestLawson:
    def test_degree_one_odd_symmetry(self, interval_set):
        r = lawson_chebyshev(interval_set, 1)
        assert r.norm == pytest.approx(1.0, rel=1e-6)
        assert abs(r.coefficients[0]) < 1e-9

    def test_degree_two_classical(self, interval_set):
        r = lawson_chebyshev(interval_set, 2)
        assert r.norm == pytest.approx(0.5, abs=1e-3)
        assert r.coefficients[0].real == pytest.approx(-0.5, abs=1e-3)

    def test_disk_rotational_symmetry(self, disk_set):
        r = lawson_chebyshev(disk_set, 5)
        assert r.norm == pytest.approx(1.0, abs=1e-6)
        assert np.max(np.abs(r.coefficients)) < 1e-9

    @pytest.mark.parametrize("n", [4, 8, 16])
    def test_interval_within_percent(self, interval_set, n):
        r = lawson_chebyshev(interval_set, n, samples=512)
        assert r.norm == pytest.approx(interval_oracle(n), rel=0.01)

    def test_two_interval_even(self, two_interval_set):
        r = lawson_chebyshev(two_interval_set, 4)
        assert r.norm == pytest.approx(two_interval_even_oracle(0.5, 2).norm, rel=0.03)

    def test_norm_history_monotone(self, interval_set):
        r = lawson_chebyshev(interval_set, 8)
        increments = np.diff(np.array(r.history))
        assert increments.size == 0 or increments.max() <= 1e-6

    def test_flatness_approaches_one(self, interval_set, disk_set):
        assert lawson_chebyshev(interval_set, 6).flatness > 0.9
        assert lawson_chebyshev(disk_set, 6).flatness > 0.99

    def test_norm_at_least_capacity_power(self, two_interval_model, two_interval_set):
        for n in (3, 5, 9):
            r = lawson_chebyshev(two_interval_set, n)
            assert r.log_norm >= n * math.log(two_interval_model.capacity()) - 1e-9

    def test_perturbation_certificate(self, interval_set):
        r = lawson_chebyshev(interval_set, 6)
        rng = np.random.default_rng(11)
        slack = perturbation_slack(r, interval_set, rng, trials=12, rel=1e-3)
        assert slack <= 1e-6 * r.norm

    def test_callable_evaluation(self, interval_set):
        r = lawson_chebyshev(interval_set, 3)
        x = np.array([0.3 + 0j])
        direct = x ** 3 + sum(c * x ** k for k, c in enumerate(r.coefficients))
        assert np.allclose(r(x), direct)


class TestGuards:
    def test_degree_guard(self, interval_set):
        with pytest.raises(ValueError, match="64"):
            lawson_chebyshev(interval_set, 65)

    def test_sample_guard(self, interval_set):
        with pytest.raises(ValueError, match="samples"):
            lawson_chebyshev(interval_set, 8, samples=64)

    def test_degenerate_samples(self):
        z = np.full(32, 1.0 + 1.0j)
        w = np.full(32, 1.0 / 32)
        with pytest.raises(ValueError, match="degenerate"):
            _weighted_monic_ls(z, w, 2)

    def test_estimator_protocol(self, interval_set):
        est = LawsonChebyshev(degree=4, samples=512)
        assert clone(est).get_params()["degree"] == 4
        with pytest.raises(NotFittedError):
            est.predict(0j)
        fitted = est.fit(interval_set)
        assert fitted is est
        assert fitted.norm_ == pytest.approx(0.125, rel=0.01)
        assert fitted.result_.degree == 4

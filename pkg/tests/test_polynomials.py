import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from widomlab.errors import LevelTooLargeError
from widomlab.geometry import CompactSet, Disk, Segment, transform_set
from widomlab.minimax import lawson_chebyshev
from widomlab.polynomials import (
    MonicPolynomial,
    interference_sum,
    log_eval,
    sup_norm,
    totik_polynomial,
    widom_factor,
)
from widomlab.potential import solve_equilibrium


def disk_root_radius(n: int, c: float = 1.0) -> float:
    x = math.pi / n
    return math.exp(c / n) * math.sin(x) / x


class TestTotik:
    def test_disk_root_radius(self, disk_set, disk_model):
        poly = totik_polynomial(disk_set, disk_model, 8, 1.0)
        assert np.max(np.abs(np.abs(poly.roots) - disk_root_radius(8))) < 1e-4

    def test_disk_norm_closed_form(self, disk_set, disk_model):
        poly = totik_polynomial(disk_set, disk_model, 8, 1.0)
        rho = disk_root_radius(8)
        est = sup_norm(poly, disk_set)
        assert est.value == pytest.approx(1 + rho ** 8, rel=1e-3)

    def test_two_congruent_disks_symmetry(self):
        k = CompactSet((Disk(-3 + 0j, 1.0), Disk(3 + 0j, 1.0)))
        model = solve_equilibrium(k, 512)
        poly = totik_polynomial(k, model, 24, 0.5)
        swapped = np.sort_complex(np.round(-poly.roots, 9))
        assert np.max(np.abs(swapped - np.sort_complex(np.round(poly.roots, 9)))) < 1e-7

    def test_level_guard(self, disk_set, disk_model):
        with pytest.raises(LevelTooLargeError, match="reduce c or raise n"):
            totik_polynomial(disk_set, disk_model, 8, 8.0)

    def test_roots_off_the_set(self, interval_set, interval_model):
        poly = totik_polynomial(interval_set, interval_model, 16, 1.0)
        assert np.min(interval_set.distance(poly.roots)) > 0


class TestLogEval:
    def test_double_root(self):
        p = MonicPolynomial(np.zeros(2, dtype=complex))
        assert log_eval(p, 2 + 0j) == pytest.approx(math.log(4))

    def test_at_root_is_neg_inf(self):
        p = MonicPolynomial(np.array([1 + 1j, 2 + 0j]))
        assert log_eval(p, 1 + 1j) == -math.inf

    def test_monic_asymptotics(self, disk_set, disk_model):
        poly = totik_polynomial(disk_set, disk_model, 8, 1.0)
        assert log_eval(poly, 1e9 + 0j) - 8 * math.log(1e9) == pytest.approx(0, abs=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_matches_direct_product(self, salt):
        rng = np.random.default_rng(salt)
        n = int(rng.integers(1, 64))
        roots = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        z = complex(rng.standard_normal() * 3, rng.standard_normal() * 3)
        if np.min(np.abs(z - roots)) < 1e-3:
            return
        p = MonicPolynomial(roots)
        direct = float(np.log(np.abs(np.prod(z - roots))))
        if not math.isfinite(direct):  # direct product over/underflowed; log form must not
            assert math.isfinite(log_eval(p, z))
            return
        assert log_eval(p, z) == pytest.approx(direct, rel=1e-10, abs=1e-10)


class TestSupNorm:
    def test_pure_power_on_disk(self, disk_set):
        p = MonicPolynomial(np.zeros(8, dtype=complex))
        assert sup_norm(p, disk_set).value == pytest.approx(1.0, abs=1e-9)

    def test_chebyshev3_on_interval(self, interval_set):
        p = MonicPolynomial(np.array([0, math.sqrt(3) / 2, -math.sqrt(3) / 2],
                                     dtype=complex))
        assert sup_norm(p, interval_set).value == pytest.approx(0.25, abs=1e-6)

    def test_certified_lower_close(self, disk_set, disk_model):
        poly = totik_polynomial(disk_set, disk_model, 16, 1.0)
        est = sup_norm(poly, disk_set)
        assert est.certified_lower <= est.value
        assert est.value / est.certified_lower <= 1 + est.tolerance

    def test_nyquist_guard(self, disk_set):
        p = MonicPolynomial(np.zeros(32, dtype=complex))
        with pytest.raises(ValueError, match="16"):
            sup_norm(p, disk_set, samples=256)


class TestWidom:
    def test_power_on_disk(self, disk_set, disk_model):
        p = MonicPolynomial(np.zeros(8, dtype=complex))
        assert widom_factor(p, disk_set, disk_model) == pytest.approx(1.0, abs=1e-6)

    def test_chebyshev_on_interval(self, interval_set, interval_model):
        # monic Chebyshev of any degree has norm 2 * cap^n on the interval
        p = MonicPolynomial(np.array([0, math.sqrt(3) / 2, -math.sqrt(3) / 2],
                                     dtype=complex))
        assert widom_factor(p, interval_set, interval_model) == pytest.approx(2.0, rel=1e-3)

    def test_lower_bound(self, interval_set, interval_model):
        rng = np.random.default_rng(3)
        for _ in range(5):
            n = int(rng.integers(2, 12))
            roots = rng.uniform(-1, 1, n) + 1j * rng.uniform(-0.2, 0.2, n)
            p = MonicPolynomial(roots)
            assert widom_factor(p, interval_set, interval_model) >= 1 - 1e-6


class TestInvariants:
    def test_minimality_sandwich(self, interval_set, interval_model):
        for n in (4, 8):
            tot = totik_polynomial(interval_set, interval_model, n, 1.0)
            est = sup_norm(tot, interval_set)
            law = lawson_chebyshev(interval_set, n)
            capn = n * math.log(interval_model.capacity())
            assert capn - 1e-6 <= law.log_norm <= est.log_value + 1e-3

    def test_isometry_equivariance(self):
        k = CompactSet((Segment(-1 + 0j, 1 + 0j), Disk(0 + 3j, 0.5)))
        rot = complex(math.cos(1.1), math.sin(1.1))
        shift = 0.4 - 0.9j
        moved = transform_set(k, rotation=rot, translation=shift)
        m1 = solve_equilibrium(k, 512)
        m2 = solve_equilibrium(moved, 512)
        p1 = totik_polynomial(k, m1, 16, 0.5)
        p2 = totik_polynomial(moved, m2, 16, 0.5)
        mapped = np.sort_complex(np.round(rot * p1.roots + shift, 9))
        assert np.max(np.abs(mapped - np.sort_complex(np.round(p2.roots, 9)))) < 1e-8
        w1 = widom_factor(p1, k, m1)
        w2 = widom_factor(p2, moved, m2)
        assert w1 == pytest.approx(w2, rel=1e-8)

    def test_scaling_covariance(self, interval_set, interval_model):
        lam = 3.0
        scaled = transform_set(interval_set, scale=lam)
        m2 = solve_equilibrium(scaled, 1024)
        assert m2.capacity() == pytest.approx(lam * interval_model.capacity(), rel=1e-10)
        n = 8
        p1 = totik_polynomial(interval_set, interval_model, n, 1.0)
        p2 = totik_polynomial(scaled, m2, n, 1.0)
        e1, e2 = sup_norm(p1, interval_set), sup_norm(p2, scaled)
        assert e2.log_value - e1.log_value == pytest.approx(n * math.log(lam), abs=1e-7)
        assert widom_factor(p1, interval_set, interval_model, e1) == pytest.approx(
            widom_factor(p2, scaled, m2, e2), rel=1e-7)


class TestInterferenceSum:
    def test_far_decay(self, disk_set, disk_model):
        poly = totik_polynomial(disk_set, disk_model, 8, 1.0)
        parts = poly.provenance.partitions
        z = 2000 + 0j
        total_diam2 = sum(a.diam ** 2 for p in parts for a in p.arcs)
        val = interference_sum(parts, z)
        assert val == pytest.approx(total_diam2 / abs(z) ** 2, rel=1e-2)
        assert val < 1e-4

    def test_bounded_under_doubling(self, disk_set, disk_model):
        z = np.exp(1j * np.linspace(0, 2 * math.pi, 24, endpoint=False))
        vals = []
        for n in (16, 32, 64):
            poly = totik_polynomial(disk_set, disk_model, n, 1.0)
            vals.append(float(np.max(interference_sum(poly.provenance.partitions, z))))
        for a, b in zip(vals, vals[1:]):
            assert b / a < 2.0

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from widomlab.errors import DegreeTooSmallError, InsufficientResolutionError
from widomlab.partition import (
    allocate_degrees,
    arc_masses_by_flux,
    partition_diagnostics,
    partition_level_curve,
)
from widomlab.potential import trace_level_curve

TWO_PI = 2 * math.pi


class TestAllocate:
    def test_exact_products(self):
        assert allocate_degrees((0.6, 0.4), 10).per_component == (6, 4)

    def test_remainder_to_last(self):
        alloc = allocate_degrees((1 / 3, 1 / 3, 1 / 3), 10)
        assert alloc.per_component == (3, 3, 4)
        excess = alloc.per_component[-1] - 10 / 3
        assert 0 <= excess <= len(alloc.per_component) - 1

    def test_single_component(self):
        assert allocate_degrees((1.0,), 7).per_component == (7,)

    def test_too_small_raises(self):
        with pytest.raises(DegreeTooSmallError):
            allocate_degrees((0.05, 0.95), 10)

    def test_advisory_minimum(self):
        assert allocate_degrees((0.5, 0.5), 30).advisory_minimum == pytest.approx(20.0)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 4), st.integers(30, 300), st.integers(0, 10 ** 6))
    def test_floor_rule_bounds(self, m, n, salt):
        rng = np.random.default_rng(salt)
        w = rng.dirichlet(np.ones(m) * 3.0)
        w = np.maximum(w, 0.05)
        w = w / w.sum()
        if n * w.min() < 1:
            return
        alloc = allocate_degrees(w, n)
        parts = alloc.per_component
        assert sum(parts) == n
        assert all(p >= 1 for p in parts)
        for j in range(m - 1):
            assert parts[j] == math.floor(n * w[j])
        assert -1e-9 <= parts[-1] - n * w[-1] <= m - 1 + 1e-9


class TestPartition:
    def test_circle_centroid_radius_and_spacing(self, disk_model, disk_set):
        curve = trace_level_curve(disk_model, 0, math.log(1.1))
        part = partition_level_curve(curve, 4, disk_set)
        cents = part.centroids
        expected_r = 1.1 * math.sin(math.pi / 4) / (math.pi / 4)
        assert np.max(np.abs(np.abs(cents) - expected_r)) < 1e-5
        ang = np.sort(np.angle(cents))
        assert np.allclose(np.diff(ang), math.pi / 2, atol=1e-5)

    def test_full_circle_centroid_is_center(self, disk_model, disk_set):
        curve = trace_level_curve(disk_model, 0, 0.25)
        part = partition_level_curve(curve, 1, disk_set)
        assert abs(part.centroids[0]) < 1e-9

    def test_masses_exact(self, interval_model, interval_set):
        curve = trace_level_curve(interval_model, 0, 0.3)
        part = partition_level_curve(curve, 8, interval_set)
        assert np.allclose(part.masses, 1 / 8, atol=1e-6)
        assert part.masses.sum() == pytest.approx(part.omega, abs=1e-10)

    def test_flux_crosscheck(self, interval_model, interval_set):
        curve = trace_level_curve(interval_model, 0, 0.3)
        part = partition_level_curve(curve, 8, interval_set)
        flux = arc_masses_by_flux(interval_model, part)
        assert np.max(np.abs(flux - 1 / 8)) < 1e-4

    def test_centroid_in_hull(self, interval_model, interval_set):
        curve = trace_level_curve(interval_model, 0, 0.2)
        part = partition_level_curve(curve, 6, interval_set)
        for arc in part.arcs:
            # hull membership via support tests against the node cloud
            rel = arc.nodes - arc.centroid
            for phi in np.linspace(0, math.pi, 13):
                d = np.exp(1j * phi)
                proj = rel.real * d.real + rel.imag * d.imag
                assert proj.min() <= 1e-12 and proj.max() >= -1e-12

    def test_reversal_keeps_centroids(self, interval_model, interval_set):
        curve = trace_level_curve(interval_model, 0, 0.25)
        part = partition_level_curve(curve, 5, interval_set)
        rpart = partition_level_curve(curve.reversed(), 5, interval_set)
        a = np.sort_complex(np.round(part.centroids, 10))
        b = np.sort_complex(np.round(rpart.centroids, 10))
        assert np.max(np.abs(a - b)) < 1e-8

    def test_phase_rotates_anchor(self, disk_model, disk_set):
        # on a circle theta equals the polar angle, so a phase offset rotates
        # the whole centroid set by exactly that angle
        curve = trace_level_curve(disk_model, 0, 0.25)
        base = partition_level_curve(curve, 4, disk_set)
        shifted = partition_level_curve(curve, 4, disk_set, phase=math.pi / 4)
        rotated = np.sort_complex(np.round(base.centroids * np.exp(1j * math.pi / 4), 8))
        assert np.max(np.abs(rotated - np.sort_complex(np.round(shifted.centroids, 8)))) < 1e-5

    def test_too_few_nodes(self, disk_model, disk_set):
        curve = trace_level_curve(disk_model, 0, 0.25, step=TWO_PI / 64)
        with pytest.raises(InsufficientResolutionError, match="refine trace"):
            partition_level_curve(curve, 32, disk_set)


class TestDiagnostics:
    def test_disk_scaling_law(self, disk_model, disk_set):
        n = 64
        curve = trace_level_curve(disk_model, 0, 1.0 / n)
        part = partition_level_curve(curve, n, disk_set)
        diag = partition_diagnostics(part, disk_set)
        assert diag.max_length_ratio == pytest.approx(TWO_PI, rel=0.05)
        assert not diag.length_bound_satisfied
        assert diag.min_enforcing_c == pytest.approx(20 * math.pi, rel=0.05)

    def test_disk_large_c_satisfies_bound(self, disk_model, disk_set):
        n, c = 2048, 20 * math.pi
        curve = trace_level_curve(disk_model, 0, c / n, step=TWO_PI / (16 * n))
        part = partition_level_curve(curve, n, disk_set)
        diag = partition_diagnostics(part, disk_set)
        assert diag.max_length_ratio == pytest.approx(0.1, rel=0.05)
        assert diag.max_centroid_shift_ratio <= 0.2

    def test_centroid_pullback_under_bound(self, disk_model, disk_set):
        # once the arc-length bound holds, centroids sit within 0.2 d of
        # their arc endpoint (c = 24*pi leaves finite-level slack over 20*pi)
        n, c = 512, 24 * math.pi
        curve = trace_level_curve(disk_model, 0, c / n, step=TWO_PI / (16 * n))
        part = partition_level_curve(curve, n, disk_set)
        diag = partition_diagnostics(part, disk_set)
        assert diag.length_bound_satisfied
        assert diag.max_centroid_shift_ratio <= 0.2

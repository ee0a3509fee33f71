import math

import numpy as np
import pytest
from scipy import integrate

from widomlab.analysis import (
    ExperimentConfig,
    area_integral_bound,
    growth_fit,
    line_integral_bound,
    loewner_gap,
    run_experiment,
)
from widomlab.minimax import two_interval_even_oracle
from widomlab.potential import estimate_safe_level


class TestLineBound:
    def test_disk_closed_form(self, disk_set, disk_model):
        # on a circle of radius R = e^s the integrand is constant in the
        # angle average: value (R-1) * 2*pi*R / (R^2-1) = 2*pi*R/(R+1)
        val = line_integral_bound(disk_set, disk_model, 0.01)
        R = math.exp(0.01)
        assert val == pytest.approx(2 * math.pi * R / (R + 1), rel=0.01)

    def test_disk_small_s_limit(self, disk_set, disk_model):
        val = line_integral_bound(disk_set, disk_model, 0.004)
        assert val == pytest.approx(math.pi, rel=0.02)

    def test_interval_bounded_as_s_shrinks(self, interval_set, interval_model):
        vals = [line_integral_bound(interval_set, interval_model, s)
                for s in (0.2, 0.1, 0.05, 0.025)]
        assert max(vals) / min(vals) < 2.0


class TestAreaBound:
    def test_disk_against_quadrature_oracle(self, disk_set, disk_model):
        s = 0.1
        r0, r1 = math.exp(s), math.exp(2 * s)

        def integrand(theta, r):
            return r / (r * r - 2 * r * math.cos(theta) + 1.0)

        oracle, _ = integrate.dblquad(integrand, r0, r1, 0.0, 2 * math.pi,
                                      epsabs=1e-10)
        val = area_integral_bound(disk_set, disk_model, s, grid=192, depth=3)
        assert val == pytest.approx(oracle, rel=0.02)

    def test_log_growth_cap_under_halving(self, interval_set, interval_model):
        v1 = area_integral_bound(interval_set, interval_model, 0.05, grid=128)
        v2 = area_integral_bound(interval_set, interval_model, 0.025, grid=128)
        # halving the level may grow the bound at most by a log-type factor
        assert v2 <= v1 * (1.0 + math.log(2) / max(v1, 1e-9) * 2 * math.pi + 1.0)

    def test_far_field_decay(self, disk_set, disk_model):
        # probing the integral at a distant point: mass / distance^2
        from widomlab.analysis import _boundary_probes
        s = 0.1
        val_near = area_integral_bound(disk_set, disk_model, s, grid=96,
                                       refine=False)
        strip_area = math.pi * (math.exp(4 * s) - math.exp(2 * s))
        assert val_near > strip_area / 4.0  # boundary point, order-one distance


class TestLoewner:
    def test_interval_endpoint_gap(self, interval_set, interval_model):
        lg = loewner_gap(interval_set, interval_model, 0.1)
        assert lg.gap == pytest.approx(math.cosh(0.1) - 1, rel=5e-3)
        assert lg.ratio == pytest.approx(0.5, rel=0.05)

    def test_disk_linear_regime(self, disk_set, disk_model):
        lg = loewner_gap(disk_set, disk_model, 0.1)
        assert lg.gap == pytest.approx(math.exp(0.1) - 1, rel=1e-3)
        assert lg.ratio == pytest.approx(10.5, rel=0.02)

    def test_square_rate_sharp_at_endpoints(self, interval_set, interval_model):
        for s in (0.2, 0.1, 0.05):
            ratio = loewner_gap(interval_set, interval_model, s).ratio
            assert 0.45 <= ratio <= 0.56


class TestGrowthFit:
    def test_constant_series(self):
        fit = growth_fit([8, 16, 24, 32, 48, 64], [2.0] * 6)
        assert fit.slope == pytest.approx(0.0, abs=1e-12)
        assert fit.const == pytest.approx(2.0)

    def test_pure_log_series(self):
        n = [8, 16, 24, 32, 48, 64]
        fit = growth_fit(n, [3 * math.log(v + 1) for v in n])
        assert fit.slope == pytest.approx(3.0, abs=1e-8)
        assert fit.slope_residual < 1e-10

    def test_requires_span(self):
        with pytest.raises(ValueError):
            growth_fit([8, 16], [1, 1])
        with pytest.raises(ValueError):
            growth_fit([8, 10, 12, 14, 16], [1] * 5)


class TestRunExperiment:
    @pytest.fixture(scope="class")
    def disk_report(self, disk_set, disk_model):
        cfg = ExperimentConfig(area_grid=96, lawson_max_iter=150)
        return run_experiment(disk_set, [8, 16, 32, 64], 1.0, cfg,
                              model=disk_model, geometry_id="disk")

    def test_rows_complete(self, disk_report):
        assert disk_report.ok
        assert [r.n for r in disk_report.records] == [8, 16, 32, 64]
        for r in disk_report.records:
            assert r.widom_lawson == pytest.approx(1.0, abs=1e-4)
            assert 1.0 <= r.widom_totik < 5.0
            assert r.line_bound is not None and r.area_bound is not None

    def test_ratio_band(self, disk_report):
        assert disk_report.line_ratio_max / disk_report.line_ratio_min < 2.0

    def test_interval_lawson_row(self, interval_set, interval_model):
        cfg = ExperimentConfig(with_area=False, lawson_max_iter=200)
        rep = run_experiment(interval_set, [8, 16, 32, 64], 1.0, cfg,
                             model=interval_model, geometry_id="interval")
        assert rep.ok
        for r in rep.records:
            assert r.widom_lawson == pytest.approx(2.0, rel=0.02)

    def test_two_interval_even_degrees(self, two_interval_set, two_interval_model):
        cfg = ExperimentConfig(with_area=False)
        rep = run_experiment(two_interval_set, [4, 8, 12], 0.5, cfg,
                             model=two_interval_model, geometry_id="two_intervals")
        assert rep.ok
        for r in rep.records:
            orc = two_interval_even_oracle(0.5, r.n // 2)
            lawson_norm = 10 ** r.lawson_norm_log10
            assert lawson_norm == pytest.approx(orc.norm, rel=0.03)

    def test_partial_failure_recorded(self, disk_set, disk_model):
        # degree 2 forces c/n above the safe-level guard: row errors, sweep
        # continues
        cfg = ExperimentConfig(with_area=False)
        rep = run_experiment(disk_set, [2, 16], 1.2, cfg, model=disk_model)
        assert rep.records[0].error is not None
        assert "reduce c or raise n" in rep.records[0].error
        assert rep.records[1].error is None
        assert not rep.ok

    def test_csv_schema(self, disk_report, tmp_path):
        import io
        buf = io.StringIO()
        disk_report.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == ("n,cap,totik_norm_log10,lawson_norm_log10,w_totik,"
                            "w_lawson,i_line,i_area,ms,error")
        assert len(lines) == 5

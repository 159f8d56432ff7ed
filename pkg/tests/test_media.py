import math

import numpy as np
import pytest

from fracwave.errors import ConfigurationError, CoverageError, DomainError
from fracwave.media import (MediumParams, constant_velocity, derive_coefficients,
                            dispersion_curve, gamma_from_q, layered_velocity,
                            raster_velocity, read_velocity_raster, sample_velocity)

# frozen with an independent 30-digit evaluator
GAMMA_Q10 = 0.0317255174305535695149771186013
GAMMA_Q100 = 0.00318299276490825514911901377248
ETA_2000_60_Q100 = -1.02252258768227430418404933826
TAU_2000_60_Q100 = -5.1126129384113715209202466913e-06
CPHASE_2000_60_Q100 = 1999.97500171861524562280533848
C_DISPERSIVE_2X = 2143.54692507258632842601265005  # 2000 * 2**0.1


class TestGammaFromQ:
    def test_infinite_q_is_exactly_zero(self):
        assert gamma_from_q(math.inf) == 0.0

    def test_q10(self):
        assert gamma_from_q(10) == pytest.approx(GAMMA_Q10, rel=1e-15)

    def test_q100(self):
        assert gamma_from_q(100) == pytest.approx(GAMMA_Q100, rel=1e-15)

    def test_q1_quarter(self):
        assert gamma_from_q(1) == pytest.approx(0.25, rel=1e-15)

    @pytest.mark.parametrize("bad", [0.0, -1.0, -math.inf])
    def test_nonpositive_rejected(self, bad):
        with pytest.raises(DomainError):
            gamma_from_q(bad)

    def test_strictly_decreasing_and_bounded(self):
        qs = np.logspace(0, 6, 40)
        gs = [gamma_from_q(q) for q in qs]
        assert all(a > b for a, b in zip(gs, gs[1:]))
        assert all(0 < g <= 0.25 for g in gs)


class TestDeriveCoefficients:
    @pytest.mark.parametrize("c0,w0", [(2000.0, 60.0), (3000.0, 40.0), (1.0, 1.0)])
    def test_gamma_zero_recovers_classical(self, c0, w0):
        eta, tau, c = derive_coefficients(c0, 0.0, w0)
        assert eta == -1.0
        assert tau == 0.0
        assert c == c0

    def test_gamma_half_diffusion_limit(self):
        # boundary value, for testing only: cos(pi/2) underflows to ~6e-17
        eta, tau, _ = derive_coefficients(2000.0, 0.5, 60.0)
        assert abs(eta) < 1e-12
        assert tau == pytest.approx(-1.0 / 60.0, rel=1e-14)

    def test_frozen_triple_q100(self):
        eta, tau, c = derive_coefficients(2000.0, gamma_from_q(100), 60.0)
        assert eta == pytest.approx(ETA_2000_60_Q100, rel=1e-13)
        assert tau == pytest.approx(TAU_2000_60_Q100, rel=1e-13)
        assert c == pytest.approx(CPHASE_2000_60_Q100, rel=1e-14)

    def test_preconditions(self):
        with pytest.raises(DomainError):
            derive_coefficients(-1.0, 0.1, 60.0)
        with pytest.raises(DomainError):
            derive_coefficients(2000.0, 0.1, 0.0)
        with pytest.raises(DomainError):
            derive_coefficients(2000.0, 0.7, 60.0)


class TestMediumParams:
    def test_invariants_recomputed(self):
        p = MediumParams.from_quality(2500.0, 30.0, 50.0, rho0=1.0)
        g = math.atan(1.0 / 30.0) / math.pi
        assert p.gamma == g
        assert p.eta == -(2500.0 ** (2 * g)) * 50.0 ** (-2 * g) * math.cos(math.pi * g)
        assert p.tau == -(2500.0 ** (2 * g - 1)) * 50.0 ** (-2 * g) * math.sin(math.pi * g)
        assert 0.0 <= p.gamma < 0.5

    def test_rho_carried_not_used(self):
        a = MediumParams.from_quality(2000.0, 10.0, 60.0, rho0=1.0)
        b = MediumParams.from_quality(2000.0, 10.0, 60.0, rho0=2.5)
        assert (a.eta, a.tau, a.gamma) == (b.eta, b.tau, b.gamma)
        assert b.rho0 == 2.5


class TestDispersionCurve:
    def test_reference_frequency_returns_c0(self):
        p = MediumParams.from_quality(2000.0, 50.0, 60.0)
        (c, _), = dispersion_curve(p, 2000.0, [60.0])
        assert c == 2000.0

    def test_gamma_zero_no_attenuation(self):
        p = MediumParams.from_quality(2000.0, math.inf, 60.0)
        curve = dispersion_curve(p, 2000.0, [1.0, 60.0, 500.0])
        assert all(alpha == 0.0 for _, alpha in curve)

    def test_power_evaluation(self):
        p = MediumParams(q_factor=math.inf, omega0=60.0, gamma=0.1,
                         eta=0.0, tau=0.0)
        (c, _), = dispersion_curve(p, 2000.0, [120.0])
        assert c == pytest.approx(C_DISPERSIVE_2X, rel=1e-14)

    def test_loglog_slope_is_one_minus_gamma(self):
        p = MediumParams.from_quality(2000.0, 20.0, 60.0)
        (_, a1), (_, a2) = dispersion_curve(p, 2000.0, [60.0, 600.0])
        slope = (math.log(a2) - math.log(a1)) / math.log(10.0)
        assert abs(slope - (1.0 - p.gamma)) < 1e-10

    def test_nonpositive_frequency_rejected(self):
        p = MediumParams.from_quality(2000.0, 20.0, 60.0)
        with pytest.raises(DomainError):
            dispersion_curve(p, 2000.0, [0.0])


class TestSampleVelocity:
    def test_constant(self):
        f = constant_velocity(2000.0)
        assert sample_velocity(f, 123.0, -456.0) == 2000.0

    def test_layer_lookup_lower_inclusive(self):
        f = layered_velocity([(0.0, 500.0, 2000.0), (500.0, 1000.0, 3000.0)])
        assert sample_velocity(f, 0.0, 250.0) == 2000.0
        assert sample_velocity(f, 0.0, 500.0) == 3000.0   # lower boundary inclusive
        assert sample_velocity(f, 0.0, 499.999) == 2000.0
        assert sample_velocity(f, 0.0, 1000.0) == 3000.0  # closed top of coverage

    def test_layer_outside_coverage(self):
        f = layered_velocity([(0.0, 500.0, 2000.0)])
        with pytest.raises(CoverageError):
            sample_velocity(f, 0.0, -1.0)

    def test_raster_center_average(self):
        f = raster_velocity(2, 2, 1.0, 1.0, 0.0, 0.0, [1000.0, 2000.0, 3000.0, 4000.0])
        assert sample_velocity(f, 0.5, 0.5) == pytest.approx(2500.0, rel=1e-15)

    def test_raster_nodes_exact(self):
        vals = np.arange(1.0, 13.0).reshape(3, 4)
        f = raster_velocity(3, 4, 2.0, 5.0, 10.0, 20.0, vals)
        for i in range(3):
            for j in range(4):
                assert sample_velocity(f, 10.0 + 2.0 * j, 20.0 + 5.0 * i) == vals[i, j]

    def test_raster_outside_coverage(self):
        f = raster_velocity(2, 2, 1.0, 1.0, 0.0, 0.0, [1.0, 2.0, 3.0, 4.0])
        with pytest.raises(CoverageError):
            sample_velocity(f, 1.5, 0.5)

    def test_nonpositive_velocity_rejected(self):
        with pytest.raises(ConfigurationError):
            constant_velocity(0.0)
        with pytest.raises(ConfigurationError):
            raster_velocity(2, 2, 1.0, 1.0, 0.0, 0.0, [1.0, -2.0, 3.0, 4.0])

    def test_overlapping_layers_rejected(self):
        with pytest.raises(ConfigurationError):
            layered_velocity([(0.0, 600.0, 2000.0), (500.0, 1000.0, 3000.0)])


def test_raster_file_round_trip(tmp_path):
    path = tmp_path / "vel.txt"
    path.write_text("2 3 10 20 0 0\n1000 1100 1200\n2000 2100 2200\n")
    f = read_velocity_raster(path)
    assert f.rows == 2 and f.cols == 3
    assert sample_velocity(f, 10.0, 0.0) == 1100.0
    assert sample_velocity(f, 10.0, 20.0) == 2100.0


def test_raster_file_bad_count(tmp_path):
    path = tmp_path / "vel.txt"
    path.write_text("2 2 10 10 0 0\n1 2 3\n")
    with pytest.raises(ConfigurationError):
        read_velocity_raster(path)

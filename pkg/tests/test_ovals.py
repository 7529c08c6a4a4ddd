import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

import _oracles as orc
from catslab import ovals as ov
from catslab.ovals import ClosedCurve

TWO_PI = 2.0 * math.pi


def rotated_translated(curve, rng):
    axis = rng.standard_normal(3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.0, TWO_PI)
    K = np.array(
        [[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]]
    )
    R = np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * (K @ K)
    shift = rng.standard_normal(3) * 3.0
    return ClosedCurve(curve.points @ R.T + shift)


class TestClosedCurve:
    def test_validation(self):
        with pytest.raises(ValueError):
            ClosedCurve(np.zeros((8, 3)))  # too few samples
        with pytest.raises(ValueError):
            ClosedCurve(np.zeros((64, 3)))  # degenerate speed
        with pytest.raises(ValueError):
            ClosedCurve(np.full((64, 3), np.nan))

    def test_circle_quantities(self):
        c = ClosedCurve.circle(2.0, 256)
        assert c.total_length == pytest.approx(2 * TWO_PI, rel=1e-14)
        assert np.abs(c.curvature - 0.5).max() <= 1e-12
        assert c.arclength[0] == 0.0
        assert np.all(np.diff(c.arclength) > 0)


class TestResample:
    def test_circle_any_start(self):
        c = ClosedCurve.circle(1.0, 256)
        r = ov.resample_arclength(c, 256)
        assert r.total_length == pytest.approx(TWO_PI, rel=1e-8)

    def test_idempotent(self):
        e = ClosedCurve.ellipse(2.0, 1.0, 256)
        once = ov.resample_arclength(e, 256)
        twice = ov.resample_arclength(once, 256)
        assert np.abs(twice.points - once.points).max() <= 1e-10

    def test_ellipse_against_quadrature_oracle(self):
        e = ClosedCurve.ellipse(2.0, 1.0, 256)
        oracle, _ = quad(
            lambda u: math.hypot(2 * math.sin(u), math.cos(u)),
            0.0,
            TWO_PI,
            epsabs=1e-13,
            epsrel=1e-13,
        )
        resampled = ov.resample_arclength(e, 512)
        assert resampled.total_length == pytest.approx(oracle, rel=1e-8)
        assert e.total_length == pytest.approx(oracle, rel=1e-8)

    def test_uniform_speed_after_resampling(self):
        r = ov.resample_arclength(ClosedCurve.ellipse(3.0, 1.0, 512), 512)
        assert np.ptp(r.speed) <= 1e-10 * r.speed.mean()

    def test_length_preserved(self):
        curve = ClosedCurve.rounded_polygon(5)
        resampled = ov.resample_arclength(curve, 512)
        assert resampled.total_length == pytest.approx(curve.total_length, rel=1e-8)


class TestRayleighQuotient:
    def test_circle_constant_function(self):
        for r in (0.5, 1.0, 3.0):
            c = ClosedCurve.circle(r, 256)
            assert ov.rayleigh_quotient(c, np.ones(256)) == pytest.approx(
                1.0 / r**2, rel=1e-12
            )

    def test_convex_total_curvature_bound(self):
        # for a convex planar curve, RQ(1) = Int kappa^2 / L >= (2 pi / L)^2
        e = ov.resample_arclength(ClosedCurve.ellipse(2.0, 1.0, 512), 512)
        rq = ov.rayleigh_quotient(e, np.ones(512))
        total_curvature = float((e.curvature * e.speed).mean())  # = 2 pi
        assert total_curvature == pytest.approx(TWO_PI, rel=1e-10)
        assert rq >= (TWO_PI / e.total_length) ** 2

    @given(st.floats(0.1, 10.0))
    def test_homogeneity(self, c):
        curve = ClosedCurve.ellipse(2.0, 1.0, 128)
        f = np.sin(TWO_PI * np.arange(128) / 128) + 2.0
        assert ov.rayleigh_quotient(curve, c * f) == pytest.approx(
            ov.rayleigh_quotient(curve, f), rel=1e-12
        )

    def test_zero_function_rejected(self):
        with pytest.raises(ValueError):
            ov.rayleigh_quotient(ClosedCurve.circle(1.0, 64), np.zeros(64))


class TestLowestEigenvalue:
    def test_circle_exact(self):
        for r in (0.5, 1.0, 2.0):
            spec = ov.lowest_eigenvalue(ClosedCurve.circle(r, 256))
            assert spec.lambda1 == pytest.approx(1.0 / r**2, rel=1e-9)
            assert abs(spec.functional - 1.0) <= 1e-9

    def test_ellipse_reported(self):
        spec = ov.lowest_eigenvalue(ClosedCurve.ellipse(2.0, 1.0, 256))
        assert spec.functional >= 0.5  # proven constant: hard assertion
        if spec.functional < 1.0:  # conjectured constant: report only
            print(f"functional below 1: {spec.functional}")

    def test_variational_upper_bound(self):
        curve = ov.resample_arclength(ClosedCurve.ellipse(2.0, 1.0, 256), 256)
        spec = ov.lowest_eigenvalue(curve)
        rng = np.random.default_rng(1)
        u = np.arange(256) / 256
        for _ in range(5):
            f = 1.0 + 0.5 * np.cos(TWO_PI * u * rng.integers(1, 4)) + 0.1 * rng.standard_normal()
            assert spec.lambda1 <= ov.rayleigh_quotient(curve, f) + 1e-10

    def test_scale_invariance(self):
        base = ClosedCurve.ellipse(2.0, 1.0, 256)
        spec0 = ov.lowest_eigenvalue(base)
        for c in (0.3, 3.0):
            scaled = ClosedCurve(base.points * c)
            spec = ov.lowest_eigenvalue(scaled)
            assert spec.functional == pytest.approx(spec0.functional, rel=1e-9)
            assert spec.lambda1 * c * c == pytest.approx(spec0.lambda1, rel=1e-9)

    def test_rigid_motion_invariance(self, rng):
        base = ClosedCurve.random_fourier(rng, n_modes=4, amplitude=0.25)
        spec0 = ov.lowest_eigenvalue(base)
        for _ in range(3):
            moved = rotated_translated(base, rng)
            spec = ov.lowest_eigenvalue(moved)
            assert spec.lambda1 == pytest.approx(spec0.lambda1, abs=1e-10 + 1e-9 * spec0.lambda1)

    def test_floquet_oracle_benchmarks(self, rng):
        curves = [
            ClosedCurve.circle(1.3, 256),
            ClosedCurve.ellipse(2.0, 1.0, 256),
            ClosedCurve.ellipse(1.5, 0.9, 256),
            ClosedCurve.rounded_polygon(4, rounding=0.12, n=256),
            ClosedCurve.random_fourier(rng, n_modes=3, amplitude=0.2),
        ]
        for curve in curves:
            spec = ov.lowest_eigenvalue(curve)
            uniform = ov.resample_arclength(curve, 512)
            oracle = orc.floquet_lambda1(uniform)
            assert spec.lambda1 == pytest.approx(oracle, abs=1e-7 * max(1.0, oracle))


class TestCorpusInvariants:
    def test_proven_half_constant(self, rng):
        curves = [ClosedCurve.ellipse(a, 1.0, 128) for a in (1.0, 1.5, 2.5, 4.0)]
        curves += [ClosedCurve.rounded_polygon(k, n=256) for k in (3, 4, 6)]
        curves += [ClosedCurve.random_fourier(rng, n_modes=4, amplitude=0.3) for _ in range(5)]
        below_conjecture = []
        for curve in curves:
            spec = ov.lowest_eigenvalue(curve, n_start=128)
            assert spec.functional >= 0.5
            if spec.functional < 1.0:
                below_conjecture.append(spec.functional)
        # the conjectured constant 1 is reported, never asserted
        if below_conjecture:
            print(f"curves below the conjectured constant: {below_conjecture}")

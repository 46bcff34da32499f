import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from inls.ground_state import (
    GroundStateProfile,
    QuadratureError,
    QuadratureSpec,
    compute_quantities,
    scaled_energy_ratio,
    sphere_area,
    w_eval,
    w_grad_eval,
)


def closed_form_h1(n: int, b: float) -> float:
    # Beta-function reduction of the bubble integrals (independent oracle):
    # substitute v = r^(2-b)/eps in either integral; both reduce to
    # S_{n-1} [(n-b)(n-2)]^a B(a, a)/(2-b) with a = (n-b)/(2-b).
    a = (n - b) / (2.0 - b)
    beta = math.gamma(a) ** 2 / math.gamma(2 * a)
    return sphere_area(n) * ((n - b) * (n - 2.0)) ** a * beta / (2.0 - b)


class TestProfileEvaluation:
    def test_peak_value_classic(self):
        # numerator [1*3*1]^(1/4), denominator 1
        assert w_eval(GroundStateProfile(3, 0.0, 1.0), 0.0) == pytest.approx(3 ** 0.25, rel=1e-15)

    def test_far_field_decay_rate(self):
        profile = GroundStateProfile(3, 0.0, 1.0)
        # decay r^-1 for n=3, b=0
        assert w_eval(profile, 1e6) * 1e6 == pytest.approx(profile.amplitude, rel=1e-5)

    def test_high_precision_point(self):
        # independent high-precision evaluation with mpmath
        profile = GroundStateProfile(4, 0.5, 2.0)
        with mpmath.workdps(50):
            num = (mpmath.mpf(2) * mpmath.mpf("3.5") * 2) ** (mpmath.mpf(2) / 3)
            den = (mpmath.mpf(2) + 1) ** (mpmath.mpf(2) / mpmath.mpf("1.5"))
            expected = float(num / den)
        assert w_eval(profile, 1.0) == pytest.approx(expected, rel=1e-14)

    def test_monotone_decreasing(self):
        profile = GroundStateProfile(5, 1.5, 0.7)
        r = np.linspace(0.0, 50.0, 400)
        values = w_eval(profile, r)
        assert np.all(np.diff(values) < 0)
        assert np.all(values > 0)

    def test_profile_validation(self):
        with pytest.raises(ValueError):
            GroundStateProfile(2, 0.5)
        with pytest.raises(ValueError):
            GroundStateProfile(3, 2.0)
        with pytest.raises(ValueError):
            GroundStateProfile(3, 0.5, 0.0)


class TestGradient:
    def test_zero_at_origin_smooth_case(self):
        assert w_grad_eval(GroundStateProfile(3, 0.0, 1.0), 0.0) == 0.0

    def test_rejects_origin_for_steep_weight(self):
        with pytest.raises(ValueError):
            w_grad_eval(GroundStateProfile(3, 1.5, 1.0), 0.0)

    def test_finite_difference_agreement(self):
        for n, b, eps in [(3, 0.0, 1.0), (3, 0.5, 2.0), (4, 1.0, 0.5), (5, 1.5, 1.0)]:
            profile = GroundStateProfile(n, b, eps)
            r = np.logspace(-3, 3, 61)
            h = 1e-4 * r  # relative step balancing roundoff vs truncation
            fd = (w_eval(profile, r + h) - w_eval(profile, r - h)) / (2 * h)
            grad = w_grad_eval(profile, r)
            assert np.max(np.abs(grad - fd) / np.abs(grad)) < 1e-6

    def test_far_field_is_negligible(self):
        for profile in [GroundStateProfile(3, 0.5, 1.0), GroundStateProfile(4, 1.0, 2.0)]:
            assert abs(w_grad_eval(profile, 1e6)) < 1e-5 * w_eval(profile, 1.0)


class TestQuantities:
    def test_matches_beta_closed_form(self):
        for n, b, eps in [(3, 0.0, 1.0), (3, 0.5, 3.0), (4, 1.0, 0.5), (5, 1.5, 2.0)]:
            q = compute_quantities(GroundStateProfile(n, b, eps))
            assert q.h1dot_sq == pytest.approx(closed_form_h1(n, b), rel=1e-11)
            assert q.potential_integral == pytest.approx(closed_form_h1(n, b), rel=1e-11)

    def test_matches_adaptive_quadrature_oracle(self):
        profile = GroundStateProfile(3, 0.5, 1.0)
        q = compute_quantities(profile)
        sig1 = profile.sigma1

        def pot_integrand(r):
            return r ** (3 - 1 - 0.5) * w_eval(profile, r) ** (sig1 + 2)

        oracle, _ = quad(pot_integrand, 0.0, np.inf, limit=400)
        assert q.potential_integral == pytest.approx(sphere_area(3) * oracle, rel=1e-9)

    def test_pohozaev_residual(self):
        q = compute_quantities(GroundStateProfile(3, 0.0, 1.0))
        assert abs(q.h1dot_sq - q.potential_integral) / q.h1dot_sq <= 1e-8

    def test_sharp_constant_epsilon_invariance(self):
        a = compute_quantities(GroundStateProfile(3, 0.5, 1.0))
        b = compute_quantities(GroundStateProfile(3, 0.5, 3.0))
        assert abs(a.c_hs - b.c_hs) / a.c_hs <= 1e-8

    def test_closed_form_chain(self):
        n, b = 3, 0.5
        q = compute_quantities(GroundStateProfile(n, b, 1.0))
        power = -2 * (n - b) / (2 - b)
        assert q.h1dot_sq == pytest.approx(q.c_hs ** power, rel=1e-6)
        assert q.energy == pytest.approx(
            (2 - b) / (2 * (n - b)) * q.c_hs ** power, rel=1e-6
        )

    def test_energy_positive(self):
        q = compute_quantities(GroundStateProfile(4, 0.25, 1.0))
        assert q.energy > 0
        assert q.energy == pytest.approx(
            0.5 * q.h1dot_sq - q.potential_integral / (q.profile.sigma1 + 2), rel=1e-14
        )

    def test_quadrature_nonconvergence_signalled(self):
        # max_refine = 0 leaves no comparison pass, so convergence can
        # never be certified
        spec = QuadratureSpec(tol=1e-30, max_refine=0)
        with pytest.raises(QuadratureError):
            compute_quantities(GroundStateProfile(3, 0.5, 1.0), spec)

    def test_quadrature_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(tol=0.0)

    def test_explicit_r_max_honoured(self):
        # fixing the panel range still converges thanks to the analytic tail
        spec = QuadratureSpec(r_min=1e-6, r_max=1e6)
        q = compute_quantities(GroundStateProfile(3, 0.5, 1.0), spec)
        assert q.h1dot_sq == pytest.approx(closed_form_h1(3, 0.5), rel=1e-10)


class TestScaledEnergy:
    def test_unit_scale(self):
        q = compute_quantities(GroundStateProfile(3, 0.5, 1.0))
        ratio, h1 = scaled_energy_ratio(1.0, q)
        sig1 = q.profile.sigma1
        assert ratio == pytest.approx(0.5 - 1.0 / (sig1 + 2), rel=1e-15)
        assert h1 == 1.0

    def test_reference_value(self):
        # n=3, b=1/2 gives sigma1=3: 0.72 - 1.2^5/5 = 0.222336 exactly
        q = compute_quantities(GroundStateProfile(3, 0.5, 1.0))
        ratio, h1 = scaled_energy_ratio(1.2, q)
        assert ratio == pytest.approx(0.222336, abs=1e-12)
        assert h1 == pytest.approx(1.2)

    def test_small_scale_limit(self):
        q = compute_quantities(GroundStateProfile(3, 0.5, 1.0))
        ratio, _ = scaled_energy_ratio(1e-6, q)
        assert 0 < ratio < 1e-11

    def test_rejects_nonpositive(self):
        q = compute_quantities(GroundStateProfile(3, 0.5, 1.0))
        with pytest.raises(ValueError):
            scaled_energy_ratio(0.0, q)


class TestThresholdGeometry:
    def test_threshold_peaks_at_bubble_norm(self):
        from inls.diagnostics import g_threshold

        for n, b in [(3, 0.5), (4, 1.0), (5, 1.5)]:
            q = compute_quantities(GroundStateProfile(n, b, 1.0))
            h1w = math.sqrt(q.h1dot_sq)
            res = minimize_scalar(
                lambda y: -g_threshold(y, q),
                bracket=(0.1 * h1w, h1w, 5 * h1w),
                method="golden",
                options={"xtol": 1e-12},
            )
            assert res.x == pytest.approx(h1w, rel=1e-6)
            assert -res.fun == pytest.approx(q.energy, rel=1e-6)

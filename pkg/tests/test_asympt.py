"""Tail-asymptotics tests: amplitude law, truncated models against numeric
runs, the fitting pipeline, the rho laws and the connection map."""

import math

import numpy as np
import pytest

from filpiv import asympt, flow, symmetric
from filpiv.errors import (
    ConfigError,
    DomainError,
    NonRealMonodromyError,
    OmegaOutOfBoundsError,
    WindowTooShortError,
)
from filpiv.flow import FlowParams
from filpiv.specfun import cgamma

P10 = FlowParams(1.0, 0.0)


def odd_tail(params, side=1):
    om, rr = symmetric.conjecture_omega(params, "odd")
    delta = asympt.delta_from_re_rho(rr, om, params)
    return asympt.make_tail(side, om, delta, params)


class TestAmplitudeLaw:
    def test_zeros_at_boundaries(self):
        p = FlowParams(1.0, 0.6)
        assert asympt.r_of_omega(p.eps / 3.0, p) == 0.0
        assert asympt.r_of_omega((3.0 * p.a - p.eps) / 6.0, p) == 0.0

    def test_square_ratio_to_product_is_81(self):
        # R(omega)^2 = 81 |A|^2 with |A|^2 = 2(eps-3w)(9a^2-(eps+6w)^2)/27
        rng = np.random.RandomState(3)
        for _ in range(20):
            a = rng.uniform(0.4, 3.0)
            eps = rng.uniform(-a / 2, a)
            p = FlowParams(a, eps)
            lo, hi = asympt.omega_bounds(p)
            w = rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo))
            ab = 2.0 * (eps - 3 * w) * (9 * a * a - (eps + 6 * w) ** 2) / 27.0
            assert asympt.r_of_omega(w, p) ** 2 == pytest.approx(81.0 * ab, rel=1e-12)

    def test_domain_error(self):
        p = FlowParams(1.0, 0.0)
        with pytest.raises(DomainError):
            asympt.r_of_omega(0.2, p)  # eps - 3w < 0, second factor positive

    def test_d1_at_zero_omega(self):
        p = FlowParams(2.0, 1.5)
        expected = p.eps * (p.eps**2 - 9 * p.a**2) / 36.0
        assert asympt.d1_coefficient(0.0, p) == pytest.approx(expected, rel=1e-14)


class TestRhoLaws:
    def test_im_rho_boundary_divergence(self):
        p = FlowParams(1.0, 0.3)
        with pytest.raises(DomainError):
            asympt.im_rho(p.eps / 3.0, p)  # sinh factor vanishes
        with pytest.raises(DomainError):
            asympt.im_rho((3.0 * p.a - p.eps) / 6.0, p)  # cosh difference vanishes
        # approaching the boundary from inside the value grows without bound
        vals = [asympt.im_rho(p.eps / 3.0 - h, p) for h in (1e-2, 1e-4, 1e-6)]
        assert vals[0] < vals[1] < vals[2]

    def test_amplitude_consistency_with_gamma_products(self):
        # e^{-Im rho} |Gamma product| law reproduces R/9 exactly
        for (a, eps, w) in ((1.0, 0.0, -0.22), (1.5, 0.4, -0.1), (2.0, -0.5, -0.35)):
            p = FlowParams(a, eps)
            x1 = (eps + 6 * w - 3 * a) / 6.0
            x2 = (eps + 6 * w + 3 * a) / 6.0
            x3 = (3 * w - eps) / 3.0
            prod = abs(cgamma(1 + 1j * x1) * cgamma(1 + 1j * x2) * cgamma(1 + 1j * x3))
            lhs = (math.exp(-asympt.im_rho(w, p)) * 2**1.5 / (2 * math.pi) ** 1.5
                   * math.exp(1.5 * math.pi * w) * prod)
            assert lhs == pytest.approx(asympt.r_of_omega(w, p) / 9.0, rel=1e-11)

    def test_delta_re_rho_inverse(self):
        p = FlowParams(1.3, 0.2)
        for (delta, w) in ((0.4, -0.2), (-2.0, 0.05)):
            assert asympt.delta_from_re_rho(
                asympt.re_rho(delta, w, p), w, p
            ) == pytest.approx(delta, abs=1e-13)


class TestSigmaModel:
    def test_secular_signs(self):
        # with zero oscillation amplitude:
        # sigma' = (eps+6w)/3 - (a^2 - 12 w^2 + eps^2/3)/s^2
        p = FlowParams(1.0, 0.3)
        tail = asympt.make_tail(1, -0.15, 0.0, p)
        coeffs = asympt.ExpansionCoeffs(0.0, 0.0, asympt.d1_coefficient(-0.15, p))
        c2 = asympt.c2_coefficient(-0.15, p)
        u = (p.eps + 6 * (-0.15)) / 3.0
        for m in (20.0, 35.0):
            _, sig_p, _ = asympt.sigma_model(m, tail, coeffs, p)
            assert sig_p == pytest.approx(u - c2 / m**2, abs=1e-14)

    def test_wrong_side_raises(self):
        tail = odd_tail(P10, side=1)
        coeffs = asympt.expansion_coeffs(tail, P10)
        with pytest.raises(ConfigError):
            asympt.sigma_model(-30.0, tail, coeffs, P10)

    @pytest.mark.parametrize("side", [1, -1])
    def test_against_numeric_tail(self, runs, side):
        run = runs.grid_run(1.0, 0.0, "odd", s_max=46.0, rel=2e-13)
        p = run.params
        tail = odd_tail(p, side)
        coeffs = asympt.expansion_coeffs(tail, p)
        worst = {"sigma": 0.0, "sigma_p": 0.0, "sigma_pp": 0.0}
        for m in np.linspace(30.0, 45.0, 240):
            s = side * float(m)
            jet = run.sigma_jet(s)
            sig, sig_p, sig_pp = asympt.sigma_model(s, tail, coeffs, p)
            worst["sigma"] = max(worst["sigma"], abs(jet.sigma - sig))
            worst["sigma_p"] = max(worst["sigma_p"], abs(jet.sigma_p - sig_p))
            worst["sigma_pp"] = max(worst["sigma_pp"], abs(jet.sigma_pp - sig_pp))
        assert worst["sigma"] <= 1e-4
        assert worst["sigma_p"] <= 1e-3
        assert worst["sigma_pp"] <= 1e-3


class TestModelCurvTors:
    def test_boundary_omega_constant(self):
        p = FlowParams(1.0, 0.6)
        w_hi = min(p.eps / 3.0, p.a / 2.0 - p.eps / 6.0)
        tail = asympt.TailParams(1, w_hi, 0.0, complex(0.0, math.inf))
        c2a, t_line = asympt.model_curv_tors(30.0, tail, p)
        c2b, _ = asympt.model_curv_tors(37.0, tail, p)
        assert c2a == pytest.approx(c2b, abs=1e-14)
        assert t_line == 0.0

    def test_mean_over_period(self):
        tail = odd_tail(P10)
        m0 = 30.0
        period = 4.0 * math.pi / m0
        ms = np.linspace(m0, m0 + period, 2000)
        vals = [asympt.model_curv_tors(float(m), tail, P10)[0] for m in ms]
        mean = float(np.trapezoid(vals, ms) / period)
        limit = 2.0 * (P10.eps - 3.0 * tail.omega) / 3.0
        assert mean == pytest.approx(limit, abs=5e-4)

    def test_against_numeric_curvature(self, runs):
        run = runs.grid_run(1.0, 0.0, "odd", s_max=46.0, rel=2e-13)
        p = run.params
        worst = 0.0
        for side in (1, -1):
            tail = odd_tail(p, side)
            for m in np.linspace(25.0, 40.0, 200):
                s = side * float(m)
                smp = run.sample(s)
                c2_model, t_model = asympt.model_curv_tors(s, tail, p)
                worst = max(worst, abs(smp["C"] ** 2 - c2_model))
                t_line = (p.eps - 3.0 * tail.omega) * (smp["T"] - s / 2.0)
                assert abs(t_line - t_model) <= 5e-2  # its remainder is O(1/s)
        assert worst <= 5e-3


class TestFitTail:
    def test_synthetic_round_trip(self):
        p = FlowParams(1.0, 0.3)
        tail_true = asympt.make_tail(1, -0.19, 0.7, p)
        coeffs = asympt.expansion_coeffs(tail_true, p)

        class FakeRun:
            params = p
            s_min, s_max = -50.0, 50.0

            def gp(self, s):
                _, sig_p, _ = asympt.sigma_model(s, tail_true, coeffs, p)
                return np.array([0.0, 0.0, sig_p])

        fr = asympt.fit_tail(FakeRun(), 1, (24.0, 40.0))
        assert abs(fr.tail.omega - (-0.19)) <= 1e-4
        assert abs(fr.tail.delta - 0.7) <= 1e-3
        assert fr.amplitude == pytest.approx(2 * abs(coeffs.A), rel=1e-3)

    def test_trivial_line_boundary_omega(self):
        p = FlowParams(1.0, 1.0)
        st = flow.FlowState(np.array([0.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0]), 0.0)
        run = flow.integrate_flow(p, st, -42.0, 42.0)
        fr = asympt.fit_tail(run, 1, (25.0, 42.0))
        assert fr.tail.omega == pytest.approx((3 * p.a - p.eps) / 6.0, abs=1e-9)
        assert fr.amplitude <= 1e-9
        assert fr.tail.rho.imag == math.inf

    def test_window_validation(self, runs):
        run = runs.grid_run(1.0, 0.0, "odd", s_max=25.0)
        with pytest.raises(WindowTooShortError):
            asympt.fit_tail(run, 1, (20.0, 21.0))
        with pytest.raises(ConfigError):
            asympt.fit_tail(run, 1, (10.0, 24.0))
        with pytest.raises(ConfigError):
            asympt.fit_tail(run, 1, (18.0, 40.0))  # beyond the span

    def test_omega_out_of_bounds(self):
        p = FlowParams(1.0, 0.0)

        class FakeRun:
            params = p
            s_min, s_max = -60.0, 60.0

            def gp(self, s):
                return np.array([0.0, 0.0, 1.2])  # sigma' beyond a

        with pytest.raises(OmegaOutOfBoundsError):
            asympt.fit_tail(FakeRun(), 1, (24.0, 45.0))

    def test_odd_run_re_rho_matches_prediction(self, runs):
        run = runs.grid_run(1.0, 0.0, "odd", s_max=40.0)
        fr = asympt.fit_tail(run, 1, (24.0, 40.0))
        assert abs(math.remainder(fr.tail.rho.real - math.pi, 2 * math.pi)) <= 1e-2

    def test_amplitude_consistency_within_ten_percent(self, runs):
        run = runs.grid_run(1.0, 0.5, "odd", s_max=40.0)
        for side in (1, -1):
            fr = asympt.fit_tail(run, side, (24.0, 40.0))
            expected = 2.0 * asympt.r_of_omega(fr.tail.omega, run.params) / 9.0
            assert fr.amplitude == pytest.approx(expected, rel=0.1)


class TestConnect:
    def test_symmetric_fixed_point_and_residuals(self):
        for (a, eps, branch) in ((1.0, 0.0, "odd"), (1.0, 1.5, "mixed_minus")):
            p = FlowParams(a, eps)
            om, rr = symmetric.conjecture_omega(p, branch)
            delta = asympt.delta_from_re_rho(rr, om, p)
            tail = asympt.make_tail(1, om, delta, p)
            out = asympt.connect(tail, p, consistency_tol=1e-6)
            assert out.side == -1
            assert out.omega == pytest.approx(om, abs=1e-10)
            assert abs(math.remainder(out.delta - delta, 2 * math.pi)) <= 1e-10
            res = asympt.connfI_residuals(tail, out, p)
            assert max(res.values()) <= 1e-8

    def test_round_trip(self):
        p = FlowParams(1.0, 0.3)
        # a generic point on the real-solution surface
        tail = asympt.make_tail(1, -0.12, 0.9, p)
        minus = asympt.connect(tail, p, consistency_tol=1e-6)
        back = asympt.connect(minus, p, consistency_tol=1e-6)
        assert back.side == 1
        assert back.omega == pytest.approx(tail.omega, abs=1e-8)
        assert abs(math.remainder(back.delta - tail.delta, 2 * math.pi)) <= 1e-8

    def test_two_tail_fit_agreement(self, runs):
        run = runs.asymmetric_run(0.1, 0.93)
        p = run.params
        fp = asympt.fit_tail(run, 1, (25.0, 42.0))
        fm = asympt.fit_tail(run, -1, (25.0, 42.0))
        predicted = asympt.connect(fp.tail, p)
        assert abs(predicted.omega - fm.tail.omega) <= 1e-2
        assert abs(math.remainder(predicted.delta - fm.tail.delta,
                                  2 * math.pi)) <= 5e-2

    def test_inconsistent_input_raises(self):
        p = FlowParams(1.0, 0.3)
        bad = asympt.TailParams(1, 0.0, 0.0, complex(math.pi, -5.0))
        with pytest.raises(NonRealMonodromyError):
            asympt.connect(bad, p)

    def test_im_rho_mismatch_flagged(self):
        p = FlowParams(1.0, 0.3)
        tail = asympt.make_tail(1, -0.12, 0.9, p)
        skewed = asympt.TailParams(1, tail.omega, tail.delta,
                                   complex(tail.rho.real, tail.rho.imag + 0.3))
        with pytest.raises(NonRealMonodromyError):
            asympt.connect(skewed, p, consistency_tol=1e-3)

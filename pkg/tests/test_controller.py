import math

import numpy as np
import pytest

from fahvsim import (ChannelPpc, CommandFilterState, Divergence,
                     ErrorTransformConfig, GainSet, ParameterDomain,
                     PerformanceFunction, SingularControlGain, StepInputs,
                     TransformedError, VirtualCommandLimits, command_filter_rhs,
                     controller_step, elevator_control, epsilon_of,
                     gain_floor_audit, phi, phi_max_rate, rho, rho_dot,
                     velocity_control, virtual_gamma, virtual_q,
                     virtual_theta)
from fahvsim.vehicle import ActuatorLimits

G4 = GainSet()  # the shipped defaults are the reference gain values used throughout


# ---------------------------------------------------------------------------
# independent transcriptions used as oracles: written from scratch against
# the law definitions, deliberately structured differently from the library
# ---------------------------------------------------------------------------

def oracle_velocity(eps1, xi1, e_v, f_v, g_v, dhat, vd_dot, rho1, rho1_dot,
                    phi1, phi_m, g):
    barrier = rho1 * (1.0 - xi1 ** 2)
    terms = [
        -f_v,
        -barrier * g.kv2 * eps1 ** 3,
        -barrier * g.kv3 * math.tanh(eps1 / g.l_v2),
        -g.kv1 * eps1,
        -(g.kv4 * eps1 * (phi_m * e_v) ** 2) / (g.lam_v1 * barrier),
        -(eps1 * phi1) / (g.lam_v2 * barrier),
        -dhat,
        vd_dot,
        rho1_dot * e_v / rho1,
    ]
    return sum(terms) / g_v


def oracle_gamma(eps2, xi2, e_h, hd_dot, rho2, rho2_dot, phi2, phi2_m, g_h, g):
    barrier = rho2 * (1.0 - xi2 ** 2)
    damping = sum(eps2 * phi2 / (lam * barrier)
                  for lam in (g.lam_h2, g.lam_h3, g.lam_h4))
    total = (hd_dot + rho2_dot * e_h / rho2
             - g.kh1 * eps2
             - (g.kh2 * eps2 ** 3 + g.kh3 * math.tanh(eps2 / g.l_h1)) * barrier
             - damping
             - g.kh4 * eps2 * (phi2_m * e_h) ** 2 / (g.lam_h1 * barrier))
    return total / g_h


def oracle_theta(e_g, f_g, g_g, dhat, x1d_dot, g):
    return (x1d_dot - f_g - dhat
            - g.kg1 * e_g - g.kg2 * e_g ** 3
            - g.kg3 * math.tanh(e_g / g.l_g1)) / g_g


def oracle_q(e_t, dhat, x2d_dot, g):
    return (x2d_dot - dhat - g.kt1 * e_t - g.kt2 * e_t ** 3
            - g.kt3 * math.tanh(e_t / g.l_t1))


def oracle_elevator(e_q, f_q, g_q, dhat, x3d_dot, g):
    return (x3d_dot - g.kq1 * e_q - f_q - dhat - g.kq2 * e_q ** 3
            - g.kq3 * math.tanh(e_q / g.l_q3)) / g_q


def transformed(e, t, beta, T_p, pf):
    cfg = ErrorTransformConfig(beta=beta, T_p=T_p)
    return epsilon_of(e, t, cfg, pf), cfg


class TestVelocityControl:
    PF = PerformanceFunction(xi_a=6.0, xi_b=0.2, T_s=10.0)

    def test_zero_error_feedforward_only(self):
        eps = TransformedError(e=0.0, e_bar=0.0, xi=0.0, epsilon=0.0)
        out = velocity_control(eps, f_V=-3.0, g_V=45.0, D_hat_V=0.7,
                               Vd_dot=12.0, rho1=6.0, rho1_dot=-1.0, phi=0.3,
                               phi_m=0.4, gains=G4)
        assert out == pytest.approx((3.0 - 0.7 + 12.0) / 45.0)

    def test_sign_of_feedback(self):
        t = 1.0
        te, cfg = transformed(0.0, t, 0.05, 2.5, self.PF)
        base = velocity_control(te, 0.0, 45.0, 0.0, 0.0, rho(t, self.PF),
                                rho_dot(t, self.PF), phi(t, cfg),
                                phi_max_rate(cfg), G4)
        te2, _ = transformed(0.5, t, 0.05, 2.5, self.PF)
        out = velocity_control(te2, 0.0, 45.0, 0.0, 0.0, rho(t, self.PF),
                               rho_dot(t, self.PF), phi(t, cfg),
                               phi_max_rate(cfg), G4)
        # the rho_dot term is error-proportional too; isolate feedback sign
        assert out - base < 0.0

    def test_matches_independent_transcription(self):
        rng = np.random.default_rng(21)
        cfg = ErrorTransformConfig(beta=0.05, T_p=2.5)
        phi_m = phi_max_rate(cfg)
        for _ in range(50):
            t = float(rng.uniform(0.0, 20.0))
            e_v = float(rng.uniform(-0.8, 0.8)) * rho(t, self.PF)
            te = epsilon_of(e_v, t, cfg, self.PF)
            args = (te.epsilon, te.xi, e_v, float(rng.uniform(-5, 5)),
                    float(rng.uniform(20, 80)), float(rng.uniform(-3, 3)),
                    float(rng.uniform(-10, 40)), rho(t, self.PF),
                    rho_dot(t, self.PF), phi(t, cfg), phi_m)
            expected = oracle_velocity(*args, G4)
            got = velocity_control(te, *args[3:], gains=G4)
            assert got == pytest.approx(expected, rel=1e-9)

    def test_singular_gain(self):
        eps = TransformedError(e=0.0, e_bar=0.0, xi=0.0, epsilon=0.0)
        with pytest.raises(SingularControlGain):
            velocity_control(eps, 0.0, 0.0, 0.0, 0.0, 6.0, 0.0, 1.0, 0.0, G4)


class TestCommandFilter:
    def test_zero(self):
        assert command_filter_rhs(0.0, 0.2, 3, 0.1) == 0.0

    def test_reference_value(self):
        out = command_filter_rhs(1.0, 0.2, 3, 0.1)
        assert out == pytest.approx(-(1.0 + math.tanh(10.0) + 1.0) / 0.2)
        assert out == pytest.approx(-15.0, abs=1e-6)

    def test_antisymmetry(self):
        for y in (0.05, 0.3, 2.0):
            assert command_filter_rhs(-y, 0.2, 3, 0.1) == pytest.approx(
                -command_filter_rhs(y, 0.2, 3, 0.1))

    def test_domain(self):
        with pytest.raises(ParameterDomain):
            command_filter_rhs(1.0, 0.0, 3, 0.1)
        with pytest.raises(ParameterDomain):
            command_filter_rhs(1.0, 0.2, 2, 0.1)


class TestVirtualGamma:
    PF = PerformanceFunction(xi_a=40.6, xi_b=0.6, T_s=30.0)

    def test_zero_error(self):
        eps = TransformedError(e=0.0, e_bar=0.0, xi=0.0, epsilon=0.0)
        out = virtual_gamma(eps, h_d_dot=120.0, rho2=40.6, rho2_dot=-2.0,
                            phi2=0.5, phi2_m=0.3, g_h=8000.0, gains=G4)
        assert out == pytest.approx(120.0 / 8000.0)

    def test_matches_independent_transcription(self):
        rng = np.random.default_rng(5)
        cfg = ErrorTransformConfig(beta=0.05, T_p=5.0)
        phi_m = phi_max_rate(cfg)
        for _ in range(50):
            t = float(rng.uniform(0.0, 40.0))
            e_h = float(rng.uniform(-0.8, 0.8)) * rho(t, self.PF)
            te = epsilon_of(e_h, t, cfg, self.PF)
            g_h = float(rng.uniform(7500, 11000))
            hd_dot = float(rng.uniform(-50, 250))
            expected = oracle_gamma(te.epsilon, te.xi, e_h, hd_dot,
                                    rho(t, self.PF), rho_dot(t, self.PF),
                                    phi(t, cfg), phi_m, g_h, G4)
            got = virtual_gamma(te, hd_dot, rho(t, self.PF),
                                rho_dot(t, self.PF), phi(t, cfg), phi_m,
                                g_h, G4)
            assert got == pytest.approx(expected, rel=1e-9)

    def test_gain_scaling(self):
        eps = TransformedError(e=2.0, e_bar=1.0, xi=0.1, epsilon=0.2)
        one = virtual_gamma(eps, 100.0, 40.0, -1.0, 0.5, 0.3, 8000.0, G4)
        two = virtual_gamma(eps, 100.0, 40.0, -1.0, 0.5, 0.3, 16000.0, G4)
        assert two == pytest.approx(one / 2.0)


class TestInnerLaws:
    def test_theta_feedforward(self):
        out = virtual_theta(0.0, 0.0, 0.42, 0.0, x1d_dot=0.21, gains=G4)
        assert out == pytest.approx(0.5)

    def test_theta_reference_value(self):
        g = GainSet(kg1=0.5, kg2=0.1, kg3=0.1, l_g1=0.1)
        out = virtual_theta(1.0, 0.0, 1.0, 0.0, 0.0, g)
        assert out == pytest.approx(-(0.5 + 0.1 + 0.1 * math.tanh(10.0)))
        assert out == pytest.approx(-0.7, abs=1e-6)

    def test_theta_odd_feedback(self):
        for e in (0.05, 0.5, 2.0):
            a = virtual_theta(e, 0.0, 1.0, 0.0, 0.0, G4)
            b = virtual_theta(-e, 0.0, 1.0, 0.0, 0.0, G4)
            assert a == pytest.approx(-b)

    def test_q_zero(self):
        assert virtual_q(0.0, 0.0, 0.0, G4) == 0.0

    def test_q_reference_value(self):
        g = GainSet(kt1=1.0, kt2=0.1, kt3=0.1, l_t1=0.1)
        out = virtual_q(1.0, 0.0, 0.0, g)
        assert out == pytest.approx(-(1.0 + 0.1 + 0.1 * math.tanh(10.0)))
        assert out == pytest.approx(-1.2, abs=1e-6)

    def test_q_linear_in_feedforward(self):
        base = virtual_q(0.3, 0.1, 0.0, G4)
        assert virtual_q(0.3, 0.1, 1.7, G4) == pytest.approx(base + 1.7)

    def test_elevator_feedforward(self):
        out = elevator_control(0.0, 0.0, 2.8, 0.0, x3d_dot=1.4, gains=G4)
        assert out == pytest.approx(0.5)

    def test_elevator_reference_value(self):
        g = GainSet(kq1=2.0, kq2=0.5, kq3=0.5, l_q3=0.1)
        out = elevator_control(1.0, 0.0, 1.0, 0.0, 0.0, g)
        assert out == pytest.approx(-(2.0 + 0.5 + 0.5 * math.tanh(10.0)))
        assert out == pytest.approx(-3.0, abs=1e-6)

    def test_inner_transcriptions(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            e = float(rng.uniform(-0.5, 0.5))
            f = float(rng.uniform(-1, 1))
            gg = float(rng.uniform(0.2, 2.0))
            dh = float(rng.uniform(-0.5, 0.5))
            xd = float(rng.uniform(-2, 2))
            assert virtual_theta(e, f, gg, dh, xd, G4) == pytest.approx(
                oracle_theta(e, f, gg, dh, xd, G4), rel=1e-9)
            assert virtual_q(e, dh, xd, G4) == pytest.approx(
                oracle_q(e, dh, xd, G4), rel=1e-9)
            gq = float(rng.uniform(1.0, 6.0))
            assert elevator_control(e, f, gq, dh, xd, G4) == pytest.approx(
                oracle_elevator(e, f, gq, dh, xd, G4), rel=1e-9)


def nominal_step_inputs(t=0.0, **overrides):
    base = dict(t=t, V=7846.4, h=85000.0, gamma_hat=0.001, theta=0.01,
                Q=0.002, dhat_V=0.1, dhat_gamma=1e-4, dhat_theta=1e-4,
                dhat_Q=1e-4, V_d=7846.4, Vd_dot=2.0, h_d=85000.0, hd_dot=10.0,
                f_V=-3.0, g_V=45.0, g_h=7846.4, f_gamma=-0.004,
                g_gamma=0.42, g_theta=1.0, f_Q=-0.008, g_Q=2.8)
    base.update(overrides)
    return StepInputs(**base)


def nominal_ppc():
    tv = ErrorTransformConfig(beta=0.05, T_p=2.5)
    th = ErrorTransformConfig(beta=0.05, T_p=5.0)
    return (ChannelPpc(tv, PerformanceFunction(6.0, 0.2, 10.0),
                       phi_max_rate(tv)),
            ChannelPpc(th, PerformanceFunction(40.6, 0.6, 30.0),
                       phi_max_rate(th)))


class TestControllerStep:
    def test_perfect_tracking_reduces_to_feedforward(self):
        ppc_v, ppc_h = nominal_ppc()
        filt = CommandFilterState(x1d=0.0015, x2d=0.0, x3d=0.0)
        inp = nominal_step_inputs(
            t=50.0, gamma_hat=0.0015, theta=0.0, Q=0.0,
            dhat_V=0.0, dhat_gamma=0.0, dhat_theta=0.0, dhat_Q=0.0,
            Vd_dot=9.0, hd_dot=0.0015 * 7846.4)
        out = controller_step(inp, filt, G4, ppc_v, ppc_h)
        # e_V = e_h = 0, e_gamma = e_theta = e_Q = 0, filters settled at the
        # virtual commands, so only the feedforward terms survive
        assert out.phi_d == pytest.approx((3.0 + 9.0) / 45.0)
        assert out.diagnostics.gamma_bar == pytest.approx(0.0015)
        assert out.diagnostics.e_gamma_hat == 0.0

    def test_pipeline_order_and_filter_rates(self):
        ppc_v, ppc_h = nominal_ppc()
        filt = CommandFilterState(x1d=0.01, x2d=0.02, x3d=0.03)
        inp = nominal_step_inputs()
        out = controller_step(inp, filt, G4, ppc_v, ppc_h)
        d = out.diagnostics
        # filter inputs are current filter state minus the fresh commands
        assert d.y_1 == pytest.approx(filt.x1d - d.gamma_bar)
        assert d.y_2 == pytest.approx(filt.x2d - d.theta_bar)
        assert d.y_3 == pytest.approx(filt.x3d - d.q_bar)
        for y, xd, l in ((d.y_1, out.filter_dots[0], G4.l_h2),
                         (d.y_2, out.filter_dots[1], G4.l_g2),
                         (d.y_3, out.filter_dots[2], G4.l_t2)):
            assert xd == pytest.approx(command_filter_rhs(y, 0.2, 3, l))

    def test_filter_causality(self):
        # the filter state after integrating k steps depends only on the
        # virtual-command sequence up to k
        rng = np.random.default_rng(2)
        cmds_a = rng.normal(0.0, 0.01, 50)
        cmds_b = cmds_a.copy()
        cmds_b[30:] += 1.0

        def integrate(cmds, n):
            x, dt = 0.0, 0.01
            for i in range(n):
                x += dt * command_filter_rhs(x - cmds[i], 0.2, 3, 0.1)
            return x

        assert integrate(cmds_a, 30) == integrate(cmds_b, 30)
        assert integrate(cmds_a, 40) != integrate(cmds_b, 40)

    def test_divergence_flag(self):
        ppc_v, ppc_h = nominal_ppc()
        inp = nominal_step_inputs(gamma_hat=5.0)  # absurd reconstruction
        with pytest.raises(Divergence):
            controller_step(inp, CommandFilterState(), G4, ppc_v, ppc_h,
                            divergence_ceiling=1e-3)

    def test_command_clamps(self):
        ppc_v, ppc_h = nominal_ppc()
        lim = ActuatorLimits()
        inp = nominal_step_inputs(dhat_V=1e5)
        out = controller_step(inp, CommandFilterState(), G4, ppc_v, ppc_h,
                              actuator=lim)
        assert out.phi_d == lim.phi_cmd_min
        inp = nominal_step_inputs(dhat_V=-1e5)
        out = controller_step(inp, CommandFilterState(), G4, ppc_v, ppc_h,
                              actuator=lim)
        assert out.phi_d == lim.phi_cmd_max

    def test_virtual_command_clamp(self):
        ppc_v, ppc_h = nominal_ppc()
        vlim = VirtualCommandLimits(gamma_max=0.01, theta_max=0.02,
                                    q_max=0.03)
        inp = nominal_step_inputs(h=85000.0 + 35.0)
        out = controller_step(inp, CommandFilterState(), G4, ppc_v, ppc_h,
                              vlim=vlim)
        assert abs(out.diagnostics.gamma_bar) <= 0.01 + 1e-15
        assert abs(out.diagnostics.theta_bar) <= 0.02 + 1e-15
        assert abs(out.diagnostics.q_bar) <= 0.03 + 1e-15


class TestSmoothSignConsistency:
    def test_rate_contribution_slack(self):
        """Each tanh term's rate contribution e*k*tanh(e/l) is within the
        smooth-sign slack k*c*l of the ideal k*|e|."""
        c = 0.2785
        terms = [(G4.kv3, G4.l_v2), (G4.kh3, G4.l_h1), (G4.kg3, G4.l_g1),
                 (G4.kt3, G4.l_t1), (G4.kq3, G4.l_q3)]
        for k, l in terms:
            e = np.linspace(-20.0 * l, 20.0 * l, 20001)
            delta = np.abs(k * np.abs(e) - k * e * np.tanh(e / l))
            assert delta.max() <= k * c * l * 1.001


class TestGainAudit:
    def test_reports_brackets(self):
        audit = gain_floor_audit(G4, g_gamma=0.42, g_h=7846.4, beta_v=0.05,
                                 beta_h=0.05)
        names = [name for name, _, _ in audit]
        assert len(names) == len(set(names))
        by_name = {name: (value, ok) for name, value, ok in audit}
        # pitch-rate bracket is comfortably positive with the shipped gains
        value, ok = by_name["e_q_bracket"]
        assert ok and value == pytest.approx(1.5)
        # the altitude-gain-squared bracket cannot be positive at g_h ~ V;
        # it must be reported as a warning, not raised
        assert not by_name["e_gamma_bracket"][1]

    def test_gain_validation(self):
        with pytest.raises(ParameterDomain):
            GainSet(r=2).validate()
        with pytest.raises(ParameterDomain):
            GainSet(kv1=0.0).validate()
        GainSet().validate()

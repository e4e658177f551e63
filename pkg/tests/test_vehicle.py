import math

import numpy as np
import pytest

from fahvsim import (ActuatorLimits, AeroModel, ControlCommand,
                     DisturbanceChannel, DisturbanceProfile, EnvelopeViolation,
                     FaultConfig, SingularControlGain, SinusoidTerm,
                     VehicleState, apply_fault, disturbance_at, dynamics_rhs,
                     envelope_min_gain, eval_aero, rk4_step, trim_inputs,
                     trim_state)

TRIM = VehicleState(V=7846.4, h=85000.0, gamma=0.0, theta=0.0, Q=0.0)


class TestEvalAero:
    def test_identity_model(self):
        coeffs = eval_aero(TRIM, AeroModel.identity(), check_envelope=False)
        assert coeffs.f_V == 0.0
        assert coeffs.g_V == 1.0
        assert coeffs.g_gamma == 1.0
        assert coeffs.g_Q == 1.0

    def test_default_model_at_trim(self):
        coeffs = eval_aero(TRIM, AeroModel())
        for g in (coeffs.g_V, coeffs.g_h, coeffs.g_gamma, coeffs.g_theta,
                  coeffs.g_Q):
            assert abs(g) > 0.0

    def test_affine_velocity_gain(self):
        model = AeroModel(v_ref=1.0, gv0=1.0, gv1=1e-5, gv2=0.0)
        state = VehicleState(V=10000.0, h=85000.0, gamma=0.0, theta=0.0, Q=0.0)
        coeffs = eval_aero(state, model)
        assert coeffs.g_V == pytest.approx(1.1)

    def test_envelope_violation(self):
        state = VehicleState(V=5000.0, h=85000.0, gamma=0.0, theta=0.0, Q=0.0)
        with pytest.raises(EnvelopeViolation):
            eval_aero(state, AeroModel())
        eval_aero(state, AeroModel(), check_envelope=False)

    def test_singular_gain(self):
        model = AeroModel(gv0=0.0, gv1=0.0, gv2=1e-6)
        with pytest.raises(SingularControlGain):
            eval_aero(TRIM, model)

    def test_envelope_scan(self):
        mins = envelope_min_gain(AeroModel(), n=20)
        for name, value in mins.items():
            assert value > 1e-3, name


class TestApplyFault:
    FAULT = FaultConfig(lambda_phi=0.8, f_phi=0.03, lambda_delta=0.8,
                        f_delta=0.05, t_fault=50.0)

    def test_identity_before_fault(self):
        phi, _ = apply_fault(ControlCommand(phi_d=1.0), self.FAULT, 10.0)
        assert phi == 1.0

    def test_throttle_fault(self):
        phi, _ = apply_fault(ControlCommand(phi_d=1.0), self.FAULT, 50.0)
        assert phi == pytest.approx(0.83)

    def test_elevator_fault(self):
        _, delta = apply_fault(ControlCommand(delta_ed=0.1), self.FAULT, 60.0)
        assert delta == pytest.approx(0.13)

    def test_affine_before_saturation(self):
        rng = np.random.default_rng(8)
        wide = ActuatorLimits(phi_min=-100.0, phi_max=100.0,
                              delta_min=-100.0, delta_max=100.0)
        for _ in range(100):
            lam = float(rng.uniform(0.05, 1.0))
            bias = float(rng.uniform(-0.5, 0.5))
            cmd = float(rng.uniform(-2.0, 2.0))
            fault = FaultConfig(lambda_phi=lam, f_phi=bias, lambda_delta=lam,
                                f_delta=bias, t_fault=0.0)
            phi, delta = apply_fault(ControlCommand(cmd, cmd), fault, 1.0, wide)
            assert phi == pytest.approx(lam * cmd + bias, abs=1e-14)
            assert delta == pytest.approx(lam * cmd + bias, abs=1e-14)

    def test_saturation(self):
        phi, delta = apply_fault(ControlCommand(phi_d=5.0, delta_ed=-2.0),
                                 FaultConfig(t_fault=1e9), 0.0)
        lim = ActuatorLimits()
        assert phi == lim.phi_max
        assert delta == lim.delta_min


class TestDynamics:
    def test_equilibrium(self):
        model = AeroModel.identity()
        state = VehicleState(V=1.0, h=0.0, gamma=0.0, theta=0.0, Q=0.0)
        out = dynamics_rhs(state, (0.0, 0.0), np.zeros(5), model,
                           check_envelope=False)
        assert np.all(out == 0.0)

    def test_small_angle_altitude_channel(self):
        model = AeroModel.identity()
        model.gh0, model.gh1 = 0.0, 1.0
        state = VehicleState(V=8000.0, h=85000.0, gamma=0.01, theta=0.01, Q=0.0)
        out = dynamics_rhs(state, (0.0, 0.0), np.zeros(5), model,
                           small_angle=True, check_envelope=False)
        assert out[1] == pytest.approx(0.01 * 8000.0)
        exact = dynamics_rhs(state, (0.0, 0.0), np.zeros(5), model,
                             check_envelope=False)
        assert exact[1] == pytest.approx(8000.0 * math.sin(0.01))

    def test_flexible_mode_acceleration(self):
        model = AeroModel(zeta1=0.1, omega1=20.0)
        state = VehicleState(V=7846.4, h=85000.0, gamma=0.0, theta=0.0, Q=0.0,
                             eta=np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]))
        out = dynamics_rhs(state, (0.0, 0.0), np.zeros(5), model,
                           check_envelope=False)
        assert out[6] == pytest.approx(-400.0)

    def test_flexible_mode_decay_envelope(self):
        # amplitude stays under the standard second-order bound
        for zeta, omega, eta0 in ((0.02, 20.0, 1.0), (0.1, 50.0, -0.5),
                                  (0.5, 5.0, 2.0)):
            c_bound = 1.0 / math.sqrt(1.0 - zeta ** 2)

            def rhs(t, y):
                return np.array([y[1],
                                 -2 * zeta * omega * y[1] - omega ** 2 * y[0]])

            y = np.array([eta0, 0.0])
            t, dt = 0.0, 1e-3
            while t < 3.0 / (zeta * omega):
                y = rk4_step(y, rhs, t, dt)
                t += dt
                bound = abs(eta0) * math.exp(-zeta * omega * t) * c_bound
                assert abs(y[0]) <= bound * (1.0 + 1e-6) + 1e-12

    def test_trim_is_balanced(self):
        model = AeroModel()
        state = trim_state(model, 7846.4, 85000.0)
        cmd = trim_inputs(model, state)
        out = dynamics_rhs(state, (cmd.phi_d, cmd.delta_ed), np.zeros(5),
                           model)
        assert abs(out[0]) < 1e-9   # velocity rate
        assert abs(out[2]) < 1e-9   # flight path angle rate
        assert abs(out[4]) < 1e-9   # pitch rate


class TestDisturbance:
    def test_empty_profile(self):
        assert np.all(disturbance_at(DisturbanceProfile(), 3.7) == 0.0)

    def test_sine_closed_form(self):
        prof = DisturbanceProfile(V=DisturbanceChannel(
            0.0, [SinusoidTerm(0.5, 1.0)]))
        assert disturbance_at(prof, math.pi / 2.0)[0] == pytest.approx(0.5)

    def test_amplitude_bound(self):
        ch = DisturbanceChannel(0.0, [SinusoidTerm(1.0, 0.7, 0.3),
                                      SinusoidTerm(2.0, 1.3, 1.1)])
        prof = DisturbanceProfile(gamma=ch)
        bound = ch.amplitude_bound()
        assert bound == pytest.approx(3.0)
        for t in np.linspace(0.0, 200.0, 4001):
            assert abs(disturbance_at(prof, t)[2]) <= bound + 1e-12

    def test_default_profile_bounded(self):
        prof = DisturbanceProfile.default()
        for name in DisturbanceProfile.CHANNELS:
            ch = getattr(prof, name)
            assert ch.amplitude_bound() < 2.0


class TestScaling:
    def test_plant_multipliers(self):
        base = AeroModel()
        plant = base.scaled(mult_v=1.3, mult_gamma=1.3, mult_q=1.3)
        s = TRIM
        c0 = eval_aero(s, base)
        c1 = eval_aero(s, plant)
        assert c1.g_V == pytest.approx(1.3 * c0.g_V)
        assert c1.g_Q == pytest.approx(1.3 * c0.g_Q)
        # gravity projections are not uncertainty-scaled
        state = VehicleState(V=7846.4, h=85000.0, gamma=0.01, theta=0.01, Q=0.0)
        f0 = eval_aero(state, base).f_V
        f1 = eval_aero(state, plant).f_V
        grav = base.fv_grav * math.sin(0.01)
        assert f1 - grav == pytest.approx(1.3 * (f0 - grav))
        # kinematic altitude gain unchanged
        assert c1.g_h == pytest.approx(c0.g_h)

"""Longitudinal vehicle model: rigid-body channels, fuselage bending modes,
actuator faults and bounded external disturbances.

Channel coefficients f_i, g_i come from a configurable polynomial table in
(V, angle of attack, pitch rate) with a dynamic-pressure style scaling in
Vn = V / v_ref (constant density baked into the coefficients), plus fixed
gravity projections.  The shipped default set is representative, not flight
data: magnitudes are sized so the cruise/climb scenario runs inside the
default actuator limits and every channel gain stays away from zero over
the declared envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields as dataclass_fields

import numpy as np
from numba import njit

from .errors import EnvelopeViolation, ParameterDomain, SingularControlGain

G0 = 32.17  # gravitational acceleration, ft/s^2


# ---------------------------------------------------------------------------
# state and configuration types
# ---------------------------------------------------------------------------

@dataclass
class VehicleState:
    """Rigid-body states plus three bending modes with their rates."""

    V: float
    h: float
    gamma: float
    theta: float
    Q: float
    eta: np.ndarray = field(default_factory=lambda: np.zeros(6))

    def validate(self) -> None:
        vals = [self.V, self.h, self.gamma, self.theta, self.Q] + list(self.eta)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterDomain("vehicle state contains non-finite values")
        if self.V <= 0.0:
            raise ParameterDomain(f"V must be > 0, got {self.V}")
        if abs(self.gamma) >= math.pi / 2:
            raise ParameterDomain(f"|gamma| must be < pi/2, got {self.gamma}")

    @property
    def alpha(self) -> float:
        return self.theta - self.gamma

    def as_array(self) -> np.ndarray:
        out = np.empty(11)
        out[0], out[1], out[2], out[3], out[4] = (
            self.V, self.h, self.gamma, self.theta, self.Q)
        out[5:11] = self.eta
        return out

    @classmethod
    def from_array(cls, y: np.ndarray) -> "VehicleState":
        return cls(V=float(y[0]), h=float(y[1]), gamma=float(y[2]),
                   theta=float(y[3]), Q=float(y[4]), eta=np.array(y[5:11]))


@dataclass
class FlightEnvelope:
    """Box the coefficient tables are declared valid on."""

    v_min: float = 7500.0
    v_max: float = 11000.0
    h_min: float = 80000.0
    h_max: float = 110000.0
    gamma_min: float = -0.0349066
    gamma_max: float = 0.0349066
    theta_min: float = -0.0872665
    theta_max: float = 0.0872665
    q_min: float = -0.1745329
    q_max: float = 0.1745329

    def contains(self, state: VehicleState) -> bool:
        return (self.v_min <= state.V <= self.v_max
                and self.h_min <= state.h <= self.h_max
                and self.gamma_min <= state.gamma <= self.gamma_max
                and self.theta_min <= state.theta <= self.theta_max
                and self.q_min <= state.Q <= self.q_max)


@dataclass
class AeroModel:
    """Coefficient tables for the five channels plus bending-mode data.

    g_V, g_gamma, g_theta, g_Q are quadratics in Vn = V / v_ref; the f terms
    are low-order polynomials in (alpha, gamma, Q) scaled by Vn**exp with
    separate gravity projections.  g_h is affine in raw V (the altitude
    channel gain used by the controller), gh0 + gh1 * V.
    """

    v_ref: float = 7846.4
    # velocity channel
    gv0: float = 0.0
    gv1: float = 0.0
    gv2: float = 45.0
    fv_a0: float = -3.0
    fv_a1: float = -25.0
    fv_a2: float = -150.0
    fv_exp: float = 2.0
    fv_grav: float = -G0
    # altitude channel gain (controller side)
    gh0: float = 0.0
    gh1: float = 1.0
    # flight-path-angle channel
    gg0: float = 0.0
    gg1: float = 0.42
    gg2: float = 0.0
    fg_b0: float = 0.0
    fg_b1: float = -0.42
    fg_exp: float = 1.0
    fg_grav: float = -G0
    # pitch-angle channel (kinematic identity by default)
    gt0: float = 1.0
    gt1: float = 0.0
    gt2: float = 0.0
    ft_c0: float = 0.0
    ft_c1: float = 0.0
    ft_c2: float = 0.0
    ft_exp: float = 0.0
    # pitch-rate channel
    gq0: float = 0.0
    gq1: float = 0.0
    gq2: float = 2.8
    fq_d0: float = 0.0
    fq_d1: float = -0.8
    fq_d2: float = -0.25
    fq_exp: float = 2.0
    # bending modes
    zeta1: float = 0.02
    zeta2: float = 0.02
    zeta3: float = 0.02
    omega1: float = 20.0
    omega2: float = 50.0
    omega3: float = 100.0
    # generalized-force coupling per mode: alpha, Phi, delta_e coefficients
    n1_alpha: float = 0.0
    n1_phi: float = 0.0
    n1_delta: float = 0.0
    n2_alpha: float = 0.0
    n2_phi: float = 0.0
    n2_delta: float = 0.0
    n3_alpha: float = 0.0
    n3_phi: float = 0.0
    n3_delta: float = 0.0
    envelope: FlightEnvelope = field(default_factory=FlightEnvelope)
    g_floor: float = 1e-3

    def validate(self) -> None:
        if self.v_ref <= 0.0:
            raise ParameterDomain("v_ref must be > 0")
        for name, z in (("zeta1", self.zeta1), ("zeta2", self.zeta2),
                        ("zeta3", self.zeta3)):
            if not (0.0 < z < 1.0):
                raise ParameterDomain(f"{name} must be in (0,1), got {z}")
        for name, w in (("omega1", self.omega1), ("omega2", self.omega2),
                        ("omega3", self.omega3)):
            if w <= 0.0:
                raise ParameterDomain(f"{name} must be > 0, got {w}")

    @classmethod
    def identity(cls) -> "AeroModel":
        """All f = 0, all g = 1; handy for synthetic channel tests."""
        return cls(v_ref=1.0, gv0=1.0, gv1=0.0, gv2=0.0,
                   fv_a0=0.0, fv_a1=0.0, fv_a2=0.0, fv_grav=0.0,
                   gh0=1.0, gh1=0.0,
                   gg0=1.0, gg1=0.0, gg2=0.0, fg_b0=0.0, fg_b1=0.0, fg_grav=0.0,
                   gt0=1.0, gq0=1.0, gq1=0.0, gq2=0.0,
                   fq_d0=0.0, fq_d1=0.0, fq_d2=0.0)

    def scaled(self, mult_v: float = 1.0, mult_gamma: float = 1.0,
               mult_theta: float = 1.0, mult_q: float = 1.0) -> "AeroModel":
        """Copy with aerodynamic coefficients multiplied per channel.

        Gravity projections and the kinematic altitude gain are left alone;
        this realizes a plant whose aero tables differ from the controller
        model by the given factors.
        """
        kw = {f.name: getattr(self, f.name) for f in dataclass_fields(self)
              if f.name != "envelope"}
        for name in ("gv0", "gv1", "gv2", "fv_a0", "fv_a1", "fv_a2"):
            kw[name] = kw[name] * mult_v
        for name in ("gg0", "gg1", "gg2", "fg_b0", "fg_b1"):
            kw[name] = kw[name] * mult_gamma
        for name in ("gt0", "gt1", "gt2", "ft_c0", "ft_c1", "ft_c2"):
            kw[name] = kw[name] * mult_theta
        for name in ("gq0", "gq1", "gq2", "fq_d0", "fq_d1", "fq_d2"):
            kw[name] = kw[name] * mult_q
        return AeroModel(envelope=self.envelope, **kw)


@dataclass
class AeroCoeffs:
    """Channel coefficients evaluated at one state."""

    f_V: float
    g_V: float
    g_h: float
    f_gamma: float
    g_gamma: float
    f_theta: float
    g_theta: float
    f_Q: float
    g_Q: float


@dataclass
class FaultConfig:
    """Multiplicative effectiveness loss plus additive bias, from t_fault on."""

    lambda_phi: float = 0.8
    f_phi: float = 0.03
    lambda_delta: float = 0.8
    f_delta: float = 0.05
    t_fault: float = 50.0

    def validate(self) -> None:
        for name, lam in (("lambda_phi", self.lambda_phi),
                          ("lambda_delta", self.lambda_delta)):
            if not (0.0 < lam <= 1.0):
                raise ParameterDomain(f"{name} must be in (0,1], got {lam}")
        if self.t_fault < 0.0:
            raise ParameterDomain(f"t_fault must be >= 0, got {self.t_fault}")


@dataclass
class ActuatorLimits:
    """Static saturation of the effective inputs, plus wider clamps on the
    commanded values.

    Commands may exceed the physical range (an effectiveness-loss fault is
    countered by over-commanding) but stay bounded so a saturated channel
    cannot wind up the disturbance estimate.
    """

    phi_min: float = 0.05
    phi_max: float = 1.5
    delta_min: float = -0.3490659
    delta_max: float = 0.3490659
    phi_cmd_min: float = 0.0
    phi_cmd_max: float = 2.25
    delta_cmd_min: float = -0.5235988
    delta_cmd_max: float = 0.5235988

    def validate(self) -> None:
        if self.phi_min >= self.phi_max:
            raise ParameterDomain("phi_min must be < phi_max")
        if self.delta_min >= self.delta_max:
            raise ParameterDomain("delta_min must be < delta_max")
        if self.phi_cmd_min >= self.phi_cmd_max:
            raise ParameterDomain("phi_cmd_min must be < phi_cmd_max")
        if self.delta_cmd_min >= self.delta_cmd_max:
            raise ParameterDomain("delta_cmd_min must be < delta_cmd_max")


@dataclass
class ControlCommand:
    """Commanded fuel equivalence ratio and elevator deflection."""

    phi_d: float = 0.0
    delta_ed: float = 0.0


@dataclass
class SinusoidTerm:
    amplitude: float
    frequency: float
    phase: float = 0.0


@dataclass
class DisturbanceChannel:
    const: float = 0.0
    terms: list = field(default_factory=list)

    def amplitude_bound(self) -> float:
        return abs(self.const) + sum(abs(t.amplitude) for t in self.terms)


@dataclass
class DisturbanceProfile:
    """Bounded external disturbances: constant plus sinusoids per channel."""

    V: DisturbanceChannel = field(default_factory=DisturbanceChannel)
    h: DisturbanceChannel = field(default_factory=DisturbanceChannel)
    gamma: DisturbanceChannel = field(default_factory=DisturbanceChannel)
    theta: DisturbanceChannel = field(default_factory=DisturbanceChannel)
    Q: DisturbanceChannel = field(default_factory=DisturbanceChannel)

    CHANNELS = ("V", "h", "gamma", "theta", "Q")

    @classmethod
    def default(cls) -> "DisturbanceProfile":
        return cls(
            V=DisturbanceChannel(0.5, [SinusoidTerm(0.5, 0.2)]),
            gamma=DisturbanceChannel(5e-5, [SinusoidTerm(1e-4, 0.1)]),
            theta=DisturbanceChannel(0.0, [SinusoidTerm(1e-4, 0.15)]),
            Q=DisturbanceChannel(2e-4, [SinusoidTerm(5e-4, 0.5)]),
        )


# ---------------------------------------------------------------------------
# packed-coefficient layout shared with the integration kernel
# ---------------------------------------------------------------------------

AERO_PACK_SIZE = 47
MAX_SINUSOIDS = 3
DIST_ROW = 1 + 3 * MAX_SINUSOIDS  # const + (amp, freq, phase) triples


def pack_aero(model: AeroModel) -> np.ndarray:
    c = np.zeros(AERO_PACK_SIZE)
    c[0] = model.v_ref
    c[1:4] = (model.gv0, model.gv1, model.gv2)
    c[4:9] = (model.fv_a0, model.fv_a1, model.fv_a2, model.fv_exp, model.fv_grav)
    c[9:11] = (model.gh0, model.gh1)
    c[11:14] = (model.gg0, model.gg1, model.gg2)
    c[14:18] = (model.fg_b0, model.fg_b1, model.fg_exp, model.fg_grav)
    c[18:21] = (model.gt0, model.gt1, model.gt2)
    c[21:25] = (model.ft_c0, model.ft_c1, model.ft_c2, model.ft_exp)
    c[25:28] = (model.gq0, model.gq1, model.gq2)
    c[28:32] = (model.fq_d0, model.fq_d1, model.fq_d2, model.fq_exp)
    c[32:35] = (model.zeta1, model.zeta2, model.zeta3)
    c[35:38] = (model.omega1, model.omega2, model.omega3)
    c[38:41] = (model.n1_alpha, model.n1_phi, model.n1_delta)
    c[41:44] = (model.n2_alpha, model.n2_phi, model.n2_delta)
    c[44:47] = (model.n3_alpha, model.n3_phi, model.n3_delta)
    return c


def pack_disturbance(profile: DisturbanceProfile) -> np.ndarray:
    d = np.zeros((5, DIST_ROW))
    for row, name in enumerate(DisturbanceProfile.CHANNELS):
        ch: DisturbanceChannel = getattr(profile, name)
        d[row, 0] = ch.const
        if len(ch.terms) > MAX_SINUSOIDS:
            raise ParameterDomain(
                f"at most {MAX_SINUSOIDS} sinusoid terms per channel")
        for i, term in enumerate(ch.terms):
            d[row, 1 + 3 * i:4 + 3 * i] = (term.amplitude, term.frequency,
                                           term.phase)
    return d


@njit(cache=True)
def _aero_eval(c, V, gamma, theta, Q):
    """Channel coefficients from a packed table at one state point."""
    vn = V / c[0]
    alpha = theta - gamma
    g_v = c[1] + c[2] * vn + c[3] * vn * vn
    f_v = (c[4] + c[5] * alpha + c[6] * alpha * alpha) * vn ** c[7] \
        + c[8] * math.sin(gamma)
    g_h = c[9] + c[10] * V
    g_g = c[11] + c[12] * vn + c[13] * vn * vn
    f_g = (c[14] + c[15] * gamma) * vn ** c[16] + c[17] * math.cos(gamma) / V
    g_t = c[18] + c[19] * vn + c[20] * vn * vn
    f_t = (c[21] + c[22] * alpha + c[23] * Q) * vn ** c[24]
    g_q = c[25] + c[26] * vn + c[27] * vn * vn
    f_q = (c[28] + c[29] * alpha + c[30] * Q) * vn ** c[31]
    return f_v, g_v, g_h, f_g, g_g, f_t, g_t, f_q, g_q


@njit(cache=True)
def _disturbance_eval(d, t, out):
    for row in range(5):
        v = d[row, 0]
        for i in range(MAX_SINUSOIDS):
            amp = d[row, 1 + 3 * i]
            if amp != 0.0:
                v += amp * math.sin(d[row, 2 + 3 * i] * t + d[row, 3 + 3 * i])
        out[row] = v


@njit(cache=True)
def _apply_fault(phi_d, delta_ed, t, fault, lim):
    """Effective inputs after fault map and saturation.

    fault = (lambda_phi, f_phi, lambda_delta, f_delta, t_fault),
    lim = (phi_min, phi_max, delta_min, delta_max).
    """
    if t >= fault[4]:
        phi = fault[0] * phi_d + fault[1]
        delta = fault[2] * delta_ed + fault[3]
    else:
        phi = phi_d
        delta = delta_ed
    if phi < lim[0]:
        phi = lim[0]
    elif phi > lim[1]:
        phi = lim[1]
    if delta < lim[2]:
        delta = lim[2]
    elif delta > lim[3]:
        delta = lim[3]
    return phi, delta


@njit(cache=True)
def _plant_rhs(c, y, phi, delta_e, d5, small_angle, out):
    """Rigid-body plus bending-mode derivatives into out[0:11].

    y = (V, h, gamma, theta, Q, eta1, eta1', eta2, eta2', eta3, eta3').
    The altitude channel integrates the exact V*sin(gamma) unless the
    small-angle option is selected, and carries no external disturbance.
    """
    V, h, gamma, theta, Q = y[0], y[1], y[2], y[3], y[4]
    f_v, g_v, g_h, f_g, g_g, f_t, g_t, f_q, g_q = _aero_eval(c, V, gamma, theta, Q)
    out[0] = g_v * phi + f_v + d5[0]
    if small_angle:
        out[1] = g_h * gamma
    else:
        out[1] = V * math.sin(gamma)
    out[2] = g_g * theta + f_g + d5[2]
    out[3] = g_t * Q + f_t + d5[3]
    out[4] = g_q * delta_e + f_q + d5[4]
    alpha = theta - gamma
    for m in range(3):
        eta = y[5 + 2 * m]
        eta_dot = y[6 + 2 * m]
        zeta = c[32 + m]
        omega = c[35 + m]
        n_force = (c[38 + 3 * m] * alpha + c[39 + 3 * m] * phi
                   + c[40 + 3 * m] * delta_e)
        out[5 + 2 * m] = eta_dot
        out[6 + 2 * m] = -2.0 * zeta * omega * eta_dot - omega * omega * eta \
            + n_force


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def eval_aero(state: VehicleState, model: AeroModel,
              check_envelope: bool = True) -> AeroCoeffs:
    """Evaluate all channel coefficients at a state.

    Raises EnvelopeViolation outside the declared envelope (unless disabled)
    and SingularControlGain when any |g_i| falls below the model's floor.
    """
    if check_envelope and not model.envelope.contains(state):
        raise EnvelopeViolation(
            f"state (V={state.V}, h={state.h}, gamma={state.gamma}, "
            f"theta={state.theta}, Q={state.Q}) outside declared envelope")
    c = pack_aero(model)
    f_v, g_v, g_h, f_g, g_g, f_t, g_t, f_q, g_q = _aero_eval(
        c, state.V, state.gamma, state.theta, state.Q)
    coeffs = AeroCoeffs(f_V=f_v, g_V=g_v, g_h=g_h, f_gamma=f_g, g_gamma=g_g,
                        f_theta=f_t, g_theta=g_t, f_Q=f_q, g_Q=g_q)
    for name, g in (("g_V", g_v), ("g_h", g_h), ("g_gamma", g_g),
                    ("g_theta", g_t), ("g_Q", g_q)):
        if abs(g) < model.g_floor:
            raise SingularControlGain(f"|{name}| = {abs(g)} below floor "
                                      f"{model.g_floor}")
    return coeffs


def apply_fault(cmd: ControlCommand, fault: FaultConfig, t: float,
                limits: ActuatorLimits | None = None) -> tuple[float, float]:
    """Effective (Phi, delta_e) after the fault map and saturation."""
    if limits is None:
        limits = ActuatorLimits()
    f5 = np.array([fault.lambda_phi, fault.f_phi, fault.lambda_delta,
                   fault.f_delta, fault.t_fault])
    l4 = np.array([limits.phi_min, limits.phi_max, limits.delta_min,
                   limits.delta_max])
    return _apply_fault(cmd.phi_d, cmd.delta_ed, t, f5, l4)


def disturbance_at(profile: DisturbanceProfile, t: float) -> np.ndarray:
    """Disturbance values (V, h, gamma, theta, Q order) at time t."""
    out = np.empty(5)
    _disturbance_eval(pack_disturbance(profile), t, out)
    return out


def dynamics_rhs(state: VehicleState, effective: tuple[float, float],
                 d: np.ndarray, model: AeroModel,
                 small_angle: bool = False,
                 check_envelope: bool = True) -> np.ndarray:
    """State derivative for effective inputs and disturbance values d.

    Propagates the envelope and gain-floor errors of eval_aero.
    """
    eval_aero(state, model, check_envelope=check_envelope)
    out = np.empty(11)
    _plant_rhs(pack_aero(model), state.as_array(), effective[0], effective[1],
               np.asarray(d, dtype=np.float64), small_angle, out)
    return out


def envelope_min_gain(model: AeroModel, n: int = 20) -> dict[str, float]:
    """Minimum |g_i| per channel over an n^3 grid of (V, h, alpha).

    The scan runs with gamma = 0, so alpha maps directly onto theta; pitch
    rate only enters f terms and is held at 0.
    """
    env = model.envelope
    c = pack_aero(model)
    vs = np.linspace(env.v_min, env.v_max, n)
    hs = np.linspace(env.h_min, env.h_max, n)
    alphas = np.linspace(env.theta_min, env.theta_max, n)
    mins = {"g_V": np.inf, "g_h": np.inf, "g_gamma": np.inf,
            "g_theta": np.inf, "g_Q": np.inf}
    for v in vs:
        for h in hs:
            for a in alphas:
                _, g_v, g_h, _, g_g, _, g_t, _, g_q = _aero_eval(c, v, 0.0, a, 0.0)
                mins["g_V"] = min(mins["g_V"], abs(g_v))
                mins["g_h"] = min(mins["g_h"], abs(g_h))
                mins["g_gamma"] = min(mins["g_gamma"], abs(g_g))
                mins["g_theta"] = min(mins["g_theta"], abs(g_t))
                mins["g_Q"] = min(mins["g_Q"], abs(g_q))
    return mins


def trim_state(model: AeroModel, V: float, h: float) -> VehicleState:
    """Level-flight state: gamma = 0, alpha balancing the gamma channel.

    Solves f_gamma + g_gamma * theta = 0 at gamma = 0, where alpha = theta.
    """
    c = pack_aero(model)
    _, _, _, f_g, g_g, _, _, _, _ = _aero_eval(c, V, 0.0, 0.0, 0.0)
    theta = -f_g / g_g
    return VehicleState(V=V, h=h, gamma=0.0, theta=theta, Q=0.0)


def trim_inputs(model: AeroModel, state: VehicleState) -> ControlCommand:
    """Inputs holding V and Q steady at the given state (no disturbance)."""
    c = pack_aero(model)
    f_v, g_v, _, _, _, _, _, f_q, g_q = _aero_eval(
        c, state.V, state.gamma, state.theta, state.Q)
    return ControlCommand(phi_d=-f_v / g_v, delta_ed=-f_q / g_q)

"""Velocity controller and four-step altitude backstepping with nonlinear
command filters.

The velocity and altitude channels feed their tracking errors through the
performance transform (log barrier on the ramped, envelope-normalized
error); the inner angle/rate channels use plain errors against filtered
virtual commands.  Each law mixes a linear term, an odd power r, and a
smooth tanh sign term; the two barrier channels add damping and a robust
term sized by the ramp's peak slope.

Virtual commands are clamped to configurable physical ranges before they
enter the command filters; the law functions themselves are exact
and unclamped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields as dataclass_fields

import numpy as np
from numba import njit

from .errors import Divergence, ParameterDomain, SingularControlGain
from .ppc import (ErrorTransformConfig, PerformanceFunction, TransformedError,
                  _eps_core, _phi, _rho, _rho_dot)


@dataclass
class GainSet:
    """Every controller gain, grouped by channel.

    kv*: velocity; kh*: altitude barrier step; kg*: flight-path-angle step;
    kt*: pitch-angle step; kq*: pitch-rate step.  lam_* are the damping /
    robustness weights; l_* are tanh widths; tau_* the filter time
    constants; r the shared odd feedback power.
    """

    kv1: float = 3.0
    kv2: float = 2.0
    kv3: float = 1.0
    kv4: float = 10.0
    lam_v1: float = 1.0
    lam_v2: float = 1.0
    l_v1: float = 0.1
    l_v2: float = 0.1
    kh1: float = 1.7
    kh2: float = 1.0
    kh3: float = 1.0
    kh4: float = 8.0
    lam_h1: float = 1.0
    lam_h2: float = 1.0
    lam_h3: float = 1.0
    lam_h4: float = 1.0
    l_h1: float = 0.1
    l_h2: float = 0.1
    kg1: float = 0.5
    kg2: float = 0.1
    kg3: float = 0.1
    lam_g1: float = 1.0
    lam_g2: float = 1.0
    lam_g3: float = 1.0
    lam_g4: float = 1.0
    l_g1: float = 0.05
    l_g2: float = 0.1
    kt1: float = 1.0
    kt2: float = 0.1
    kt3: float = 0.1
    lam_t1: float = 1.0
    lam_t2: float = 1.0
    lam_t3: float = 1.0
    lam_t4: float = 1.0
    lam_t5: float = 1.0
    l_t1: float = 0.02
    l_t2: float = 0.1
    kq1: float = 2.0
    kq2: float = 0.5
    kq3: float = 0.5
    lam_q1: float = 1.0
    l_q2: float = 0.1
    l_q3: float = 0.01
    r: int = 3
    tau_1: float = 0.2
    tau_2: float = 0.2
    tau_3: float = 0.2

    def validate(self) -> None:
        for f in dataclass_fields(self):
            v = getattr(self, f.name)
            if f.name == "r":
                if int(v) != v or v < 3 or v % 2 == 0:
                    raise ParameterDomain(f"r must be an odd integer >= 3, got {v}")
            elif v <= 0.0:
                raise ParameterDomain(f"gain {f.name} must be > 0, got {v}")


# index map for the packed gain array shared with the integration kernel
GAIN_FIELDS = [f.name for f in dataclass_fields(GainSet)]
GAIN_INDEX = {name: i for i, name in enumerate(GAIN_FIELDS)}
_GI = GAIN_INDEX
GI_KV1, GI_KV2, GI_KV3, GI_KV4 = _GI["kv1"], _GI["kv2"], _GI["kv3"], _GI["kv4"]
GI_LAMV1, GI_LAMV2, GI_LV1, GI_LV2 = (_GI["lam_v1"], _GI["lam_v2"],
                                      _GI["l_v1"], _GI["l_v2"])
GI_KH1, GI_KH2, GI_KH3, GI_KH4 = _GI["kh1"], _GI["kh2"], _GI["kh3"], _GI["kh4"]
GI_LAMH1, GI_LAMH2, GI_LAMH3, GI_LAMH4 = (_GI["lam_h1"], _GI["lam_h2"],
                                          _GI["lam_h3"], _GI["lam_h4"])
GI_LH1, GI_LH2 = _GI["l_h1"], _GI["l_h2"]
GI_KG1, GI_KG2, GI_KG3 = _GI["kg1"], _GI["kg2"], _GI["kg3"]
GI_LG1, GI_LG2 = _GI["l_g1"], _GI["l_g2"]
GI_KT1, GI_KT2, GI_KT3 = _GI["kt1"], _GI["kt2"], _GI["kt3"]
GI_LT1, GI_LT2 = _GI["l_t1"], _GI["l_t2"]
GI_KQ1, GI_KQ2, GI_KQ3 = _GI["kq1"], _GI["kq2"], _GI["kq3"]
GI_LQ3 = _GI["l_q3"]
GI_R = _GI["r"]
GI_TAU1, GI_TAU2, GI_TAU3 = _GI["tau_1"], _GI["tau_2"], _GI["tau_3"]


def pack_gains(gains: GainSet) -> np.ndarray:
    return np.array([float(getattr(gains, name)) for name in GAIN_FIELDS])


@dataclass
class VirtualCommandLimits:
    """Physical clamps on the virtual commands feeding the filters."""

    gamma_max: float = 0.3490659   # 20 deg
    theta_max: float = 0.4363323   # 25 deg
    q_max: float = 0.3490659       # 20 deg/s


@dataclass
class CommandFilterState:
    """Filtered virtual commands that stand in for their derivatives."""

    x1d: float = 0.0
    x2d: float = 0.0
    x3d: float = 0.0


@dataclass
class ControllerDiagnostics:
    """Per-step error vector, virtual commands and raw commands."""

    eps_1: float
    eps_2: float
    e_gamma_hat: float
    e_theta: float
    e_Q: float
    y_1: float
    y_2: float
    y_3: float
    gamma_bar: float
    theta_bar: float
    q_bar: float
    phi_d: float
    delta_ed: float
    xi_1: float = 0.0
    xi_2: float = 0.0
    viol_V: bool = False
    viol_h: bool = False

    def error_vector(self) -> np.ndarray:
        return np.array([self.eps_1, self.eps_2, self.e_gamma_hat,
                         self.e_theta, self.e_Q, self.y_1, self.y_2, self.y_3])


# ---------------------------------------------------------------------------
# jitted law cores
# ---------------------------------------------------------------------------

@njit(cache=True)
def _ipow_odd(x, r):
    """x**r for odd integer r by repeated multiplication (sign-exact)."""
    out = x
    for _ in range(r - 1):
        out *= x
    return out


@njit(cache=True)
def _velocity_control_core(eps1, xi1, e_v, f_v, g_v, d_hat_v, vd_dot,
                           rho1, rho1_dot, phi1, phi_m,
                           kv1, kv2, kv3, kv4, lam_v1, lam_v2, l_v2, r):
    omx = 1.0 - xi1 * xi1
    num = (-f_v
           - rho1 * omx * (kv2 * _ipow_odd(eps1, r) + kv3 * math.tanh(eps1 / l_v2))
           - kv1 * eps1
           - kv4 * eps1 * phi_m * phi_m * e_v * e_v / (lam_v1 * rho1 * omx)
           - eps1 * phi1 / (lam_v2 * rho1 * omx)
           - d_hat_v + vd_dot + rho1_dot * e_v / rho1)
    return num / g_v


@njit(cache=True)
def _virtual_gamma_core(eps2, xi2, e_h, hd_dot, rho2, rho2_dot, phi2, phi2_m,
                        g_h, kh1, kh2, kh3, kh4, lam_h1, lam_h2, lam_h3,
                        lam_h4, l_h1, r):
    omx = 1.0 - xi2 * xi2
    num = (hd_dot + rho2_dot * e_h / rho2
           - kh1 * eps2
           - (kh2 * _ipow_odd(eps2, r) + kh3 * math.tanh(eps2 / l_h1)) * rho2 * omx
           - eps2 * phi2 / (lam_h2 * rho2 * omx)
           - eps2 * phi2 / (lam_h3 * rho2 * omx)
           - eps2 * phi2 / (lam_h4 * rho2 * omx)
           - kh4 * eps2 * phi2_m * phi2_m * e_h * e_h / (lam_h1 * rho2 * omx))
    return num / g_h


@njit(cache=True)
def _virtual_theta_core(e_g, f_g, g_g, d_hat_g, x1d_dot, kg1, kg2, kg3, l_g1, r):
    return (-f_g - d_hat_g + x1d_dot - kg1 * e_g - kg2 * _ipow_odd(e_g, r)
            - kg3 * math.tanh(e_g / l_g1)) / g_g


@njit(cache=True)
def _virtual_q_core(e_t, d_hat_t, x2d_dot, kt1, kt2, kt3, l_t1, r):
    return (-d_hat_t + x2d_dot - kt1 * e_t - kt2 * _ipow_odd(e_t, r)
            - kt3 * math.tanh(e_t / l_t1))


@njit(cache=True)
def _elevator_control_core(e_q, f_q, g_q, d_hat_q, x3d_dot, kq1, kq2, kq3,
                           l_q3, r):
    return (-kq1 * e_q - f_q - d_hat_q + x3d_dot - kq2 * _ipow_odd(e_q, r)
            - kq3 * math.tanh(e_q / l_q3)) / g_q


@njit(cache=True)
def _filter_rhs_core(y, tau, r, l):
    return (-_ipow_odd(y, r) - math.tanh(y / l) - y) / tau


@njit(cache=True)
def _clamp(x, limit):
    if x > limit:
        return limit
    if x < -limit:
        return -limit
    return x


@njit(cache=True)
def _controller_core(t, V, h, gamma_hat, theta, Q,
                     dhat_v, dhat_g, dhat_t, dhat_q,
                     x1d, x2d, x3d,
                     v_d, vd_dot, h_d, hd_dot,
                     f_v, g_v, g_h, f_g, g_g, g_t, f_q, g_q,
                     G, tr, pf, vlim, cmd4, divide_g_theta):
    """One full control evaluation; returns commands, diagnostics and the
    filter derivatives to be integrated by the engine.

    tr = (beta1, a1, mu1, Tp1, phim1, beta2, a2, mu2, Tp2, phim2),
    pf = (xia1, xib1, Ts1, n1, xia2, xib2, Ts2, n2),
    vlim = (gamma_max, theta_max, q_max),
    cmd4 = (phi_cmd_min, phi_cmd_max, delta_cmd_min, delta_cmd_max).

    Issued commands are clamped to the command range (wider than the
    actuator's physical range) so a saturated channel keeps a bounded
    command and cannot wind up the disturbance estimate.
    """
    r = int(G[GI_R])

    # velocity branch
    e_v = V - v_d
    phi1 = _phi(t, tr[0], tr[1], tr[2], tr[3])
    rho1 = _rho(t, pf[0], pf[1], pf[2], pf[3])
    rho1_dot = _rho_dot(t, pf[0], pf[1], pf[2], pf[3])
    _, xi1, eps1, viol1 = _eps_core(e_v, phi1, rho1)
    phi_d = _velocity_control_core(
        eps1, xi1, e_v, f_v, g_v, dhat_v, vd_dot, rho1, rho1_dot, phi1, tr[4],
        G[GI_KV1], G[GI_KV2], G[GI_KV3], G[GI_KV4],
        G[GI_LAMV1], G[GI_LAMV2], G[GI_LV2], r)
    if phi_d < cmd4[0]:
        phi_d = cmd4[0]
    elif phi_d > cmd4[1]:
        phi_d = cmd4[1]

    # altitude barrier step
    e_h = h - h_d
    phi2 = _phi(t, tr[5], tr[6], tr[7], tr[8])
    rho2 = _rho(t, pf[4], pf[5], pf[6], pf[7])
    rho2_dot = _rho_dot(t, pf[4], pf[5], pf[6], pf[7])
    _, xi2, eps2, viol2 = _eps_core(e_h, phi2, rho2)
    gamma_bar = _virtual_gamma_core(
        eps2, xi2, e_h, hd_dot, rho2, rho2_dot, phi2, tr[9], g_h,
        G[GI_KH1], G[GI_KH2], G[GI_KH3], G[GI_KH4],
        G[GI_LAMH1], G[GI_LAMH2], G[GI_LAMH3], G[GI_LAMH4], G[GI_LH1], r)
    gamma_bar = _clamp(gamma_bar, vlim[0])

    # flight-path-angle step
    y1 = x1d - gamma_bar
    x1d_dot = _filter_rhs_core(y1, G[GI_TAU1], r, G[GI_LH2])
    e_g = gamma_hat - x1d
    theta_bar = _virtual_theta_core(e_g, f_g, g_g, dhat_g, x1d_dot,
                                    G[GI_KG1], G[GI_KG2], G[GI_KG3],
                                    G[GI_LG1], r)
    theta_bar = _clamp(theta_bar, vlim[1])

    # pitch-angle step
    y2 = x2d - theta_bar
    x2d_dot = _filter_rhs_core(y2, G[GI_TAU2], r, G[GI_LG2])
    e_t = theta - x2d
    q_bar = _virtual_q_core(e_t, dhat_t, x2d_dot,
                            G[GI_KT1], G[GI_KT2], G[GI_KT3], G[GI_LT1], r)
    if divide_g_theta:
        q_bar = q_bar / g_t
    q_bar = _clamp(q_bar, vlim[2])

    # pitch-rate step
    y3 = x3d - q_bar
    x3d_dot = _filter_rhs_core(y3, G[GI_TAU3], r, G[GI_LT2])
    e_q = Q - x3d
    delta_ed = _elevator_control_core(e_q, f_q, g_q, dhat_q, x3d_dot,
                                      G[GI_KQ1], G[GI_KQ2], G[GI_KQ3],
                                      G[GI_LQ3], r)
    if delta_ed < cmd4[2]:
        delta_ed = cmd4[2]
    elif delta_ed > cmd4[3]:
        delta_ed = cmd4[3]

    return (phi_d, delta_ed, gamma_bar, theta_bar, q_bar,
            eps1, eps2, e_g, e_t, e_q, y1, y2, y3,
            x1d_dot, x2d_dot, x3d_dot,
            e_v, e_h, xi1, xi2, rho1, rho2, phi1, phi2,
            viol1, viol2)


# ---------------------------------------------------------------------------
# public law wrappers
# ---------------------------------------------------------------------------

def _check_gain(name: str, g: float, floor: float = 1e-12) -> None:
    if abs(g) < floor:
        raise SingularControlGain(f"|{name}| = {abs(g)} too small to divide by")


def velocity_control(eps: TransformedError, f_V: float, g_V: float,
                     D_hat_V: float, Vd_dot: float, rho1: float,
                     rho1_dot: float, phi: float, phi_m: float,
                     gains: GainSet) -> float:
    """Fuel-equivalence-ratio command from the transformed velocity error."""
    _check_gain("g_V", g_V)
    return _velocity_control_core(
        eps.epsilon, eps.xi, eps.e, f_V, g_V, D_hat_V, Vd_dot, rho1, rho1_dot,
        phi, phi_m, gains.kv1, gains.kv2, gains.kv3, gains.kv4,
        gains.lam_v1, gains.lam_v2, gains.l_v2, int(gains.r))


def virtual_gamma(eps2: TransformedError, h_d_dot: float, rho2: float,
                  rho2_dot: float, phi2: float, phi2_m: float, g_h: float,
                  gains: GainSet) -> float:
    """Flight-path-angle virtual command from the transformed altitude error."""
    _check_gain("g_h", g_h)
    return _virtual_gamma_core(
        eps2.epsilon, eps2.xi, eps2.e, h_d_dot, rho2, rho2_dot, phi2, phi2_m,
        g_h, gains.kh1, gains.kh2, gains.kh3, gains.kh4,
        gains.lam_h1, gains.lam_h2, gains.lam_h3, gains.lam_h4,
        gains.l_h1, int(gains.r))


def virtual_theta(e_gamma_hat: float, f_gamma: float, g_gamma: float,
                  D_hat_gamma: float, x1d_dot: float, gains: GainSet) -> float:
    """Pitch-angle virtual command from the flight-path-angle error."""
    _check_gain("g_gamma", g_gamma)
    return _virtual_theta_core(e_gamma_hat, f_gamma, g_gamma, D_hat_gamma,
                               x1d_dot, gains.kg1, gains.kg2, gains.kg3,
                               gains.l_g1, int(gains.r))


def virtual_q(e_theta: float, D_hat_theta: float, x2d_dot: float,
              gains: GainSet) -> float:
    """Pitch-rate virtual command; written with unit channel gain."""
    return _virtual_q_core(e_theta, D_hat_theta, x2d_dot, gains.kt1,
                           gains.kt2, gains.kt3, gains.l_t1, int(gains.r))


def elevator_control(e_Q: float, f_Q: float, g_Q: float, D_hat_Q: float,
                     x3d_dot: float, gains: GainSet) -> float:
    """Elevator deflection command from the pitch-rate error."""
    _check_gain("g_Q", g_Q)
    return _elevator_control_core(e_Q, f_Q, g_Q, D_hat_Q, x3d_dot,
                                  gains.kq1, gains.kq2, gains.kq3,
                                  gains.l_q3, int(gains.r))


def command_filter_rhs(y: float, tau: float, r: int, l: float) -> float:
    """Filter state derivative (-y**r - tanh(y/l) - y) / tau."""
    if tau <= 0.0:
        raise ParameterDomain(f"tau must be > 0, got {tau}")
    if int(r) != r or r < 1 or r % 2 == 0:
        raise ParameterDomain(f"r must be an odd integer, got {r}")
    return _filter_rhs_core(y, tau, int(r), l)


# ---------------------------------------------------------------------------
# full step composition
# ---------------------------------------------------------------------------

@dataclass
class ChannelPpc:
    """Transform + envelope pair for one barrier channel, with the ramp's
    grid-maximized slope."""

    transform: ErrorTransformConfig
    perf: PerformanceFunction
    phi_m: float

    def packed(self) -> tuple[np.ndarray, np.ndarray]:
        tr = np.array([self.transform.beta, self.transform.a_exp,
                       self.transform.mu, self.transform.T_p, self.phi_m])
        pf = np.array([self.perf.xi_a, self.perf.xi_b, self.perf.T_s,
                       self.perf.n])
        return tr, pf


@dataclass
class StepInputs:
    """Everything the controller consumes at one instant."""

    t: float
    V: float
    h: float
    gamma_hat: float
    theta: float
    Q: float
    dhat_V: float
    dhat_gamma: float
    dhat_theta: float
    dhat_Q: float
    V_d: float
    Vd_dot: float
    h_d: float
    hd_dot: float
    f_V: float
    g_V: float
    g_h: float
    f_gamma: float
    g_gamma: float
    g_theta: float
    f_Q: float
    g_Q: float


@dataclass
class StepOutput:
    phi_d: float
    delta_ed: float
    diagnostics: ControllerDiagnostics
    filter_dots: tuple[float, float, float]
    e_V: float
    e_h: float
    rho_V: float
    rho_h: float
    phi_V: float
    phi_h: float


def controller_step(inp: StepInputs, filt: CommandFilterState,
                    gains: GainSet, ppc_v: ChannelPpc, ppc_h: ChannelPpc,
                    vlim: VirtualCommandLimits | None = None,
                    divide_g_theta: bool = False,
                    divergence_ceiling: float = 1e9,
                    actuator=None) -> StepOutput:
    """Wire the velocity branch and the four altitude steps in order.

    The returned filter derivatives are integrated by the engine, not here.
    Raises Divergence when any diagnostic magnitude passes the ceiling.
    """
    from .vehicle import ActuatorLimits
    if vlim is None:
        vlim = VirtualCommandLimits()
    if actuator is None:
        actuator = ActuatorLimits()
    tr1, pf1 = ppc_v.packed()
    tr2, pf2 = ppc_h.packed()
    tr = np.concatenate([tr1, tr2])
    pf = np.concatenate([pf1, pf2])
    out = _controller_core(
        inp.t, inp.V, inp.h, inp.gamma_hat, inp.theta, inp.Q,
        inp.dhat_V, inp.dhat_gamma, inp.dhat_theta, inp.dhat_Q,
        filt.x1d, filt.x2d, filt.x3d,
        inp.V_d, inp.Vd_dot, inp.h_d, inp.hd_dot,
        inp.f_V, inp.g_V, inp.g_h, inp.f_gamma, inp.g_gamma, inp.g_theta,
        inp.f_Q, inp.g_Q,
        pack_gains(gains), tr, pf,
        np.array([vlim.gamma_max, vlim.theta_max, vlim.q_max]),
        np.array([actuator.phi_cmd_min, actuator.phi_cmd_max,
                  actuator.delta_cmd_min, actuator.delta_cmd_max]),
        divide_g_theta)
    (phi_d, delta_ed, gamma_bar, theta_bar, q_bar,
     eps1, eps2, e_g, e_t, e_q, y1, y2, y3,
     xd1, xd2, xd3, e_v, e_h, xi1, xi2, rho1, rho2, phi1, phi2,
     viol1, viol2) = out
    diag = ControllerDiagnostics(
        eps_1=eps1, eps_2=eps2, e_gamma_hat=e_g, e_theta=e_t, e_Q=e_q,
        y_1=y1, y_2=y2, y_3=y3, gamma_bar=gamma_bar, theta_bar=theta_bar,
        q_bar=q_bar, phi_d=phi_d, delta_ed=delta_ed, xi_1=xi1, xi_2=xi2,
        viol_V=bool(viol1), viol_h=bool(viol2))
    worst = np.max(np.abs(diag.error_vector()))
    if not math.isfinite(worst) or worst > divergence_ceiling:
        raise Divergence(f"controller diagnostic reached {worst} at t={inp.t}",
                         t=inp.t)
    return StepOutput(phi_d=phi_d, delta_ed=delta_ed, diagnostics=diag,
                      filter_dots=(xd1, xd2, xd3), e_V=e_v, e_h=e_h,
                      rho_V=rho1, rho_h=rho2, phi_V=phi1, phi_h=phi2)


def gain_floor_audit(gains: GainSet, g_gamma: float, g_h: float,
                     beta_v: float, beta_h: float) -> list[tuple[str, float, bool]]:
    """Closed-loop bracket coefficients that should be positive.

    Evaluates the parameter-only parts of the stability brackets at nominal
    channel gains.  A negative entry is a tuning warning, not an error: the
    brackets are sufficient conditions with conservative cross terms.
    """
    g = gains
    entries = [
        ("velocity_ramp_margin", g.kv4 * beta_v - 1.0),
        ("altitude_ramp_margin", g.kh4 * beta_h - 1.0),
        ("e_gamma_bracket",
         g.kg1 - 0.5 / g.lam_g1 - 0.5 / g.lam_g2 - 0.5 / g.lam_g3
         - 0.5 * g.lam_h2 * g_h * g_h),
        ("e_theta_bracket",
         g.kt1 - 0.5 / g.lam_t1 - 0.5 / g.lam_t2 - 0.5 / g.lam_t3
         - 0.5 / g.lam_t4 - 0.5 * g.lam_g1 * g_gamma * g_gamma),
        ("e_q_bracket", g.kq1 - 0.5 / g.lam_q1),
        ("y2_bracket", 1.0 / g.tau_2 - 0.5 * g.lam_g2 * g_gamma * g_gamma
         - 0.5 * g.lam_g4),
        ("y3_bracket", 1.0 / g.tau_3 - 0.5 * g.lam_t5 - 0.5 * g.lam_t2),
    ]
    return [(name, value, value > 0.0) for name, value in entries]

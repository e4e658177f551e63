"""Scenario orchestration: fixed-step integration of the coupled closed
loop, trajectory logging, and metric computation."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernel
from .controller import (ChannelPpc, CommandFilterState, GainSet, StepInputs,
                         VirtualCommandLimits, controller_step,
                         gain_floor_audit, pack_gains)
from .errors import (ArcsinDomain, BoundBreach, Divergence, EmptyLog,
                     NonFiniteDerivative, ParameterDomain, ValidationError)
from .observers import FtNnObserver, SigTrackerState, grid_centers
from .ppc import (ErrorTransformConfig, PerformanceFunction, phi_max_rate)
from .vehicle import (ActuatorLimits, AeroModel, DisturbanceProfile,
                      FaultConfig, VehicleState, eval_aero, pack_aero,
                      pack_disturbance, trim_state)

COLUMNS = [
    "t", "V", "h", "gamma", "theta", "Q", "gamma_hat", "alpha_hat",
    "e_V", "e_h", "rho_V", "rho_h", "phi_V", "phi_h",
    "Phi_cmd", "delta_e_cmd", "Phi_eff", "delta_e_eff",
    "dhat_V", "dhat_h", "dhat_gamma", "dhat_theta", "dhat_Q",
    "D_V", "D_h", "D_gamma", "D_theta", "D_Q",
    "eps_V", "eps_h", "xi_V", "xi_h",
    "e_gamma_hat", "e_theta", "e_Q", "y_1", "y_2", "y_3",
    "gamma_bar", "theta_bar", "Q_bar", "x_1d", "x_2d", "x_3d",
    "h_hat", "chi_h", "s_1", "s_2",
    "z_V", "z_h", "z_gamma", "z_theta", "z_Q",
    "Wnorm_V", "Wnorm_h", "Wnorm_gamma", "Wnorm_theta", "Wnorm_Q",
    "eta_1", "eta_1_dot", "eta_2", "eta_2_dot", "eta_3", "eta_3_dot",
    "V_d", "Vd_dot", "h_d", "hd_dot", "alpha", "viol_V", "viol_h",
]
assert len(COLUMNS) == _kernel.NCOL

# network input wiring: indices into the measured vector (V, h, gamma_hat,
# theta, Q) per observer channel
NN_INPUT_INDEX = ((0,), (0, 2), (0, 2, 3), (0, 2, 3), (0, 2, 3, 4))


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class InitialConditions:
    """Initial tracking errors and attitude; theta=None means plant trim."""

    v_err: float = 8.0
    h_err: float = 40.0
    gamma: float = 0.0
    theta: float | None = None
    Q: float = 0.0


@dataclass
class ReferenceConfig:
    """Step commands smoothed by critically damped second-order filters."""

    v0: float = 7846.4
    v1: float = 10032.0
    omega_v: float = 0.05
    h0: float = 85000.0
    h1: float = 105583.0
    omega_h: float = 0.008

    def packed(self) -> np.ndarray:
        return np.array([self.v0, self.v1 - self.v0, self.omega_v,
                         self.h0, self.h1 - self.h0, self.omega_h])


@dataclass
class UncertaintyConfig:
    """Plant-over-controller coefficient multipliers per aero channel."""

    v: float = 1.3
    gamma: float = 1.3
    theta: float = 1.0
    q: float = 1.3


@dataclass
class TrackerConfig:
    d_h: float = 20.0
    d_gamma: float = 15.0
    eta0: float = 1.5
    eta1: float = 1.5
    eta2: float = 1.5
    eta3: float = 1.5

    def packed(self) -> np.ndarray:
        return np.array([self.d_h, self.d_gamma, self.eta0, self.eta1,
                         self.eta2, self.eta3])


@dataclass
class NnChannelConfig:
    l1: float
    l2: float
    l3: float
    gamma_w: float


@dataclass
class NnConfig:
    """Disturbance-observer geometry and gains.

    Node grids tile each channel's input box (taken from the declared
    envelope) with nodes_per_dim points per input dimension; the Gaussian
    width is width_factor times the normalized grid spacing.
    """

    alpha1: float = 0.5
    beta1: float = 2.0
    k_leak: float = 0.001
    nodes_per_dim: int = 3
    width_factor: float = 1.5
    v: NnChannelConfig = field(default_factory=lambda: NnChannelConfig(5.0, 5.0, 1.0, 1.2))
    h: NnChannelConfig = field(default_factory=lambda: NnChannelConfig(5.0, 5.0, 1.0, 1.5))
    gamma: NnChannelConfig = field(default_factory=lambda: NnChannelConfig(10.0, 10.0, 1.0, 2.0))
    theta: NnChannelConfig = field(default_factory=lambda: NnChannelConfig(10.0, 10.0, 1.0, 2.0))
    q: NnChannelConfig = field(default_factory=lambda: NnChannelConfig(20.0, 20.0, 1.0, 10.0))

    def channel(self, i: int) -> NnChannelConfig:
        return (self.v, self.h, self.gamma, self.theta, self.q)[i]


@dataclass
class AcceptanceParams:
    """Tunables of the acceptance checks (kept here so the CLI can override)."""

    smooth_sign_c: float = 0.2785


@dataclass
class ScenarioConfig:
    """Full description of one closed-loop experiment."""

    duration: float = 100.0
    dt: float = 5e-4
    log_every: float = 0.01
    variant: str = "proposed"
    strict_ppc: bool = False
    divergence_ceiling: float = 1e9
    small_angle_hdot: bool = False
    divide_by_g_theta: bool = False
    initial: InitialConditions = field(default_factory=InitialConditions)
    reference: ReferenceConfig = field(default_factory=ReferenceConfig)
    aero: AeroModel = field(default_factory=AeroModel)
    uncertainty: UncertaintyConfig = field(default_factory=UncertaintyConfig)
    disturbance: DisturbanceProfile = field(default_factory=DisturbanceProfile.default)
    fault: FaultConfig = field(default_factory=FaultConfig)
    actuator: ActuatorLimits = field(default_factory=ActuatorLimits)
    gains: GainSet = field(default_factory=GainSet)
    vlimits: VirtualCommandLimits = field(default_factory=VirtualCommandLimits)
    transform_v: ErrorTransformConfig = field(
        default_factory=lambda: ErrorTransformConfig(T_p=2.5))
    transform_h: ErrorTransformConfig = field(
        default_factory=lambda: ErrorTransformConfig(T_p=5.0))
    perf_v: PerformanceFunction = field(
        default_factory=lambda: PerformanceFunction(xi_a=6.0, xi_b=0.2, T_s=10.0))
    perf_h: PerformanceFunction = field(
        default_factory=lambda: PerformanceFunction(xi_a=40.6, xi_b=0.6, T_s=30.0))
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    nn: NnConfig = field(default_factory=NnConfig)
    acceptance: AcceptanceParams = field(default_factory=AcceptanceParams)

    def validate(self) -> None:
        if not self.dt > 0.0:
            raise ValidationError("dt must be > 0", key="scenario.dt",
                                  constraint="dt > 0")
        if self.log_every < self.dt:
            raise ValidationError("log_every must be >= dt",
                                  key="scenario.log_every",
                                  constraint="log_every >= dt")
        if self.variant not in ("proposed", "baseline"):
            raise ValidationError(f"unknown variant {self.variant!r}",
                                  key="scenario.variant",
                                  constraint="proposed | baseline")
        if self.duration < max(self.perf_v.T_s, self.perf_h.T_s):
            raise ValidationError(
                "duration must cover both appointed times",
                key="scenario.duration", constraint="duration >= max(T_s)")
        for key, tf, pf in (("velocity", self.transform_v, self.perf_v),
                            ("altitude", self.transform_h, self.perf_h)):
            if pf.T_s <= tf.T_p:
                raise ValidationError(
                    f"{key}: appointed time T_s must exceed ramp time T_p",
                    key=f"performance.{key}.T_s", constraint="T_s > T_p")
        for obj, key in ((self.transform_v, "transform.velocity"),
                         (self.transform_h, "transform.altitude"),
                         (self.perf_v, "performance.velocity"),
                         (self.perf_h, "performance.altitude"),
                         (self.gains, "gains"), (self.fault, "fault"),
                         (self.actuator, "actuator"), (self.aero, "aero")):
            try:
                obj.validate()
            except ParameterDomain as exc:
                raise ValidationError(str(exc), key=key,
                                      constraint=str(exc)) from exc


# ---------------------------------------------------------------------------
# reference and generic integrator step
# ---------------------------------------------------------------------------

@dataclass
class ReferenceSample:
    V_d: float
    Vd_dot: float
    h_d: float
    hd_dot: float


def reference_at(t: float, ref: ReferenceConfig) -> ReferenceSample:
    """Smoothed command values and analytic rates at time t."""
    v_d, vd_dot, h_d, hd_dot = _kernel._reference_core(t, ref.packed())
    return ReferenceSample(V_d=v_d, Vd_dot=vd_dot, h_d=h_d, hd_dot=hd_dot)


def rk4_step(y, rhs, t: float, dt: float):
    """One classical fourth-order Runge-Kutta update of y' = rhs(t, y)."""
    if dt <= 0.0:
        raise ParameterDomain(f"dt must be > 0, got {dt}")
    y = np.asarray(y, dtype=np.float64)
    stages = []
    for c, prev in ((0.0, None), (0.5, 0), (0.5, 1), (1.0, 2)):
        yi = y if prev is None else y + c * dt * stages[prev]
        k = np.asarray(rhs(t + c * dt, yi), dtype=np.float64)
        if not np.all(np.isfinite(k)):
            bad = int(np.flatnonzero(~np.isfinite(k))[0])
            raise NonFiniteDerivative(
                f"non-finite derivative in component {bad} at t={t + c * dt}",
                component=bad, t=t + c * dt)
        stages.append(k)
    k1, k2, k3, k4 = stages
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

@dataclass
class TrajectoryLog:
    """Uniformly sampled time series of the full experiment."""

    data: np.ndarray
    columns: tuple = tuple(COLUMNS)

    def __len__(self) -> int:
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    @property
    def t(self) -> np.ndarray:
        return self.data[:, 0]

    def to_csv(self, path) -> None:
        np.savetxt(path, self.data, fmt="%.9g", delimiter=",",
                   header=",".join(self.columns), comments="")

    @classmethod
    def from_csv(cls, path) -> "TrajectoryLog":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data=data, columns=tuple(header))


@dataclass
class ChannelMetrics:
    max_err_after_tp: float = math.nan
    time_to_enter_bound: float = math.nan
    settle_at_ts: float = math.nan
    violation_count: int = 0
    first_violation_time: float = math.nan
    post_fault_recovery_time: float = math.nan


@dataclass
class ExactCounters:
    """Per-step (not just per-logged-sample) counters from the kernel."""

    viol_count_v: int = 0
    viol_count_h: int = 0
    first_viol_t_v: float = math.nan
    first_viol_t_h: float = math.nan
    max_xi_v: float = 0.0
    max_xi_h: float = 0.0
    max_ev_post_tp: float = 0.0
    max_eh_post_tp: float = 0.0
    max_excess_ev_post_tp: float = -math.inf
    max_excess_eh_post_tp: float = -math.inf
    max_ev_post_ts: float = 0.0
    max_eh_post_ts: float = 0.0
    max_ev_post_fault: float = 0.0
    max_eh_post_fault: float = 0.0
    max_excess_ev_post_fault: float = -math.inf
    max_excess_eh_post_fault: float = -math.inf
    viol_v_post_fault: int = 0
    viol_h_post_fault: int = 0


@dataclass
class RunMetrics:
    velocity: ChannelMetrics = field(default_factory=ChannelMetrics)
    altitude: ChannelMetrics = field(default_factory=ChannelMetrics)
    peak_phi_cmd: float = math.nan
    peak_delta_cmd: float = math.nan
    wall_clock_s: float = math.nan
    n_steps: int = 0
    dt: float = math.nan
    status: str = "ok"
    exact: ExactCounters | None = None
    gain_audit: list = field(default_factory=list)

    def summary(self) -> str:
        lines = [f"status: {self.status}",
                 f"steps: {self.n_steps}  dt: {self.dt:g}  "
                 f"wall_clock_s: {self.wall_clock_s:.3f}"]
        for name, ch in (("velocity", self.velocity), ("altitude", self.altitude)):
            lines.append(f"[{name}]")
            lines.append(f"  max_err_after_tp: {ch.max_err_after_tp:.6g}")
            lines.append(f"  time_to_enter_bound: {ch.time_to_enter_bound:.6g}")
            lines.append(f"  settle_at_ts: {ch.settle_at_ts:.6g}")
            lines.append(f"  violation_count: {ch.violation_count}")
            lines.append(f"  first_violation_time: {ch.first_violation_time:.6g}")
            lines.append(
                f"  post_fault_recovery_time: {ch.post_fault_recovery_time:.6g}")
        lines.append(f"peak_phi_cmd: {self.peak_phi_cmd:.6g}")
        lines.append(f"peak_delta_cmd: {self.peak_delta_cmd:.6g}")
        failing = [(n, v) for n, v, ok in self.gain_audit if not ok]
        if failing:
            lines.append("gain audit warnings (non-positive brackets):")
            for name, value in failing:
                lines.append(f"  {name}: {value:.4g}")
        if self.exact is not None:
            x = self.exact
            lines.append("[exact]")
            lines.append(f"  viol_count_v: {x.viol_count_v}  "
                         f"viol_count_h: {x.viol_count_h}")
            lines.append(f"  max_xi_v: {x.max_xi_v:.6g}  max_xi_h: {x.max_xi_h:.6g}")
            lines.append(f"  max_ev_post_tp: {x.max_ev_post_tp:.6g}  "
                         f"max_eh_post_tp: {x.max_eh_post_tp:.6g}")
            lines.append(f"  max_ev_post_ts: {x.max_ev_post_ts:.6g}  "
                         f"max_eh_post_ts: {x.max_eh_post_ts:.6g}")
            lines.append(f"  max_ev_post_fault: {x.max_ev_post_fault:.6g}  "
                         f"max_eh_post_fault: {x.max_eh_post_fault:.6g}")
        return "\n".join(lines) + "\n"


def _channel_metrics(t, e, rho, viol, t_p, t_s, xi_b, t_fault) -> ChannelMetrics:
    out = ChannelMetrics()
    after_tp = t > t_p
    if np.any(after_tp):
        out.max_err_after_tp = float(np.max(np.abs(e[after_tp])))
    inside = np.abs(e) < rho
    if inside[-1]:
        idx = np.flatnonzero(~inside)
        out.time_to_enter_bound = float(t[idx[-1] + 1]) if idx.size else float(t[0])
    at_ts = np.flatnonzero(t >= t_s)
    if at_ts.size:
        out.settle_at_ts = float(abs(e[at_ts[0]]))
    flags = viol > 0.5
    rising = np.flatnonzero(flags & ~np.concatenate(([False], flags[:-1])))
    out.violation_count = int(rising.size)
    if rising.size:
        out.first_violation_time = float(t[np.flatnonzero(flags)[0]])
    if t_fault <= t[-1]:
        post = np.flatnonzero(t >= t_fault)
        ok = np.abs(e[post]) <= xi_b
        if ok[-1]:
            bad = np.flatnonzero(~ok)
            first_ok = post[bad[-1] + 1] if bad.size else post[0]
            out.post_fault_recovery_time = float(t[first_ok] - t_fault)
    return out


def compute_metrics(log: TrajectoryLog, cfg: ScenarioConfig) -> RunMetrics:
    """Deterministic metrics from the logged samples alone."""
    if len(log) == 0:
        raise EmptyLog("trajectory log has no rows")
    t = log.t
    m = RunMetrics(dt=cfg.dt, n_steps=int(round(cfg.duration / cfg.dt)))
    m.velocity = _channel_metrics(
        t, log.column("e_V"), log.column("rho_V"), log.column("viol_V"),
        cfg.transform_v.T_p, cfg.perf_v.T_s, cfg.perf_v.xi_b, cfg.fault.t_fault)
    m.altitude = _channel_metrics(
        t, log.column("e_h"), log.column("rho_h"), log.column("viol_h"),
        cfg.transform_h.T_p, cfg.perf_h.T_s, cfg.perf_h.xi_b, cfg.fault.t_fault)
    m.peak_phi_cmd = float(np.max(np.abs(log.column("Phi_cmd"))))
    m.peak_delta_cmd = float(np.max(np.abs(log.column("delta_e_cmd"))))
    return m


# ---------------------------------------------------------------------------
# scenario assembly and execution
# ---------------------------------------------------------------------------

def _effective_transforms(cfg: ScenarioConfig):
    """The baseline variant disables the ramp: T_p = 0 makes phi identically
    one and the peak-slope term vanish."""
    if cfg.variant == "baseline":
        tv = replace(cfg.transform_v, T_p=0.0)
        th = replace(cfg.transform_h, T_p=0.0)
        return ChannelPpc(tv, cfg.perf_v, 0.0), ChannelPpc(th, cfg.perf_h, 0.0)
    return (ChannelPpc(cfg.transform_v, cfg.perf_v, phi_max_rate(cfg.transform_v)),
            ChannelPpc(cfg.transform_h, cfg.perf_h, phi_max_rate(cfg.transform_h)))


def _nn_geometry(cfg: ScenarioConfig):
    """Centers, offsets and input wiring for the five observer channels."""
    env = cfg.aero.envelope
    var_lo = np.array([env.v_min, env.h_min, env.gamma_min, env.theta_min,
                       env.q_min])
    var_hi = np.array([env.v_max, env.h_max, env.gamma_max, env.theta_max,
                       env.q_max])
    npd = cfg.nn.nodes_per_dim
    spacing = 2.0 / (npd - 1)
    bhat = cfg.nn.width_factor * spacing
    blocks = [grid_centers(len(idx), npd) for idx in NN_INPUT_INDEX]
    q_arr = np.array([b.shape[0] for b in blocks], dtype=np.int64)
    centers = np.zeros((int(q_arr.sum()), 4))
    qoff = np.zeros(6, dtype=np.int64)
    for i, b in enumerate(blocks):
        qoff[i + 1] = qoff[i] + b.shape[0]
        centers[qoff[i]:qoff[i + 1], :b.shape[1]] = b
    n_in = np.array([len(idx) for idx in NN_INPUT_INDEX], dtype=np.int64)
    in_idx = np.zeros((5, 4), dtype=np.int64)
    for i, idx in enumerate(NN_INPUT_INDEX):
        in_idx[i, :len(idx)] = idx
    nn_g = np.zeros((5, 6))
    for i in range(5):
        ch = cfg.nn.channel(i)
        nn_g[i] = (ch.l1, ch.l2, ch.l3, cfg.nn.k_leak, ch.gamma_w, bhat)
    return centers, qoff, q_arr, n_in, in_idx, var_lo, var_hi, nn_g


@dataclass
class ObserverBank:
    """The reconstruction trackers and disturbance-observer channels of one
    scenario, as standalone objects (the engine integrates the same
    quantities packed into its state vector)."""

    altitude_tracker: SigTrackerState
    angle_tracker: SigTrackerState
    channels: dict[str, FtNnObserver]


def build_observer_bank(cfg: ScenarioConfig) -> ObserverBank:
    centers, qoff, q_arr, n_in, in_idx, var_lo, var_hi, nn_g = _nn_geometry(cfg)
    tr = cfg.tracker
    banks = {}
    for i, name in enumerate(("V", "h", "gamma", "theta", "Q")):
        idx = list(NN_INPUT_INDEX[i])
        obs = FtNnObserver(
            z=0.0, W_hat=np.zeros(int(q_arr[i])),
            centers=centers[qoff[i]:qoff[i + 1], :int(n_in[i])].copy(),
            box_lo=var_lo[idx].copy(), box_hi=var_hi[idx].copy(),
            b_hat=nn_g[i, 5], l1=nn_g[i, 0], l2=nn_g[i, 1], l3=nn_g[i, 2],
            k=nn_g[i, 3], gamma_w=nn_g[i, 4], alpha1=cfg.nn.alpha1,
            beta1=cfg.nn.beta1)
        obs.validate()
        banks[name] = obs
    return ObserverBank(
        altitude_tracker=SigTrackerState(d=tr.d_h, eta0=tr.eta0, eta1=tr.eta1,
                                         eta2=tr.eta2, eta3=tr.eta3),
        angle_tracker=SigTrackerState(d=tr.d_gamma, eta0=tr.eta0,
                                      eta1=tr.eta1, eta2=tr.eta2,
                                      eta3=tr.eta3),
        channels=banks)


def build_initial_state(cfg: ScenarioConfig, plant: AeroModel,
                        n_state: int, woff: np.ndarray) -> np.ndarray:
    """Initial coupled state: plant off-reference by the configured errors,
    trackers and observers aligned with the measurements, filters seeded by
    the cascade of t = 0 virtual commands."""
    v0 = cfg.reference.v0 + cfg.initial.v_err
    h0 = cfg.reference.h0 + cfg.initial.h_err
    if cfg.initial.theta is None:
        theta0 = trim_state(plant, v0, h0).theta + cfg.initial.gamma
    else:
        theta0 = cfg.initial.theta
    y = np.zeros(n_state)
    y[0], y[1], y[2], y[3], y[4] = v0, h0, cfg.initial.gamma, theta0, cfg.initial.Q
    # trackers start on the measured signals with zero rate estimates
    y[11] = h0
    y[12] = 0.0
    y[13] = 0.0
    y[14] = 0.0
    # observer states start on the measured channel values; gamma_hat(0) = 0
    y[15], y[16], y[17], y[18], y[19] = v0, h0, 0.0, theta0, cfg.initial.Q
    return y


def _seed_filters(cfg: ScenarioConfig, y: np.ndarray,
                  ppc_v: ChannelPpc, ppc_h: ChannelPpc) -> None:
    """Set x_1d..x_3d to the cascade of t = 0 virtual commands so the
    filters start without an artificial transient."""
    gamma_hat0 = math.asin(y[12] / y[0])
    meas = VehicleState(V=y[0], h=y[1], gamma=gamma_hat0, theta=y[3], Q=y[4])
    coeffs = eval_aero(meas, cfg.aero, check_envelope=False)
    refs = reference_at(0.0, cfg.reference)
    filt = CommandFilterState(x1d=0.0, x2d=0.0, x3d=0.0)
    inp = StepInputs(
        t=0.0, V=y[0], h=y[1], gamma_hat=gamma_hat0, theta=y[3], Q=y[4],
        dhat_V=0.0, dhat_gamma=0.0, dhat_theta=0.0, dhat_Q=0.0,
        V_d=refs.V_d, Vd_dot=refs.Vd_dot, h_d=refs.h_d, hd_dot=refs.hd_dot,
        f_V=coeffs.f_V, g_V=coeffs.g_V, g_h=coeffs.g_h,
        f_gamma=coeffs.f_gamma, g_gamma=coeffs.g_gamma,
        g_theta=coeffs.g_theta, f_Q=coeffs.f_Q, g_Q=coeffs.g_Q)
    for attr in ("x1d", "x2d", "x3d"):
        out = controller_step(inp, filt, cfg.gains, ppc_v, ppc_h,
                              cfg.vlimits, cfg.divide_by_g_theta,
                              math.inf, cfg.actuator)
        source = {"x1d": out.diagnostics.gamma_bar,
                  "x2d": out.diagnostics.theta_bar,
                  "x3d": out.diagnostics.q_bar}[attr]
        setattr(filt, attr, source)
    y[20], y[21], y[22] = filt.x1d, filt.x2d, filt.x3d


def run_scenario(cfg: ScenarioConfig):
    """Integrate the closed loop; returns (TrajectoryLog, RunMetrics).

    Raises Divergence / NonFiniteDerivative / ArcsinDomain on integration
    failure and BoundBreach in strict mode, each carrying the partial log.
    """
    cfg.validate()
    plant = cfg.aero.scaled(cfg.uncertainty.v, cfg.uncertainty.gamma,
                            cfg.uncertainty.theta, cfg.uncertainty.q)
    ppc_v, ppc_h = _effective_transforms(cfg)
    centers, qoff, q_arr, n_in, in_idx, var_lo, var_hi, nn_g = _nn_geometry(cfg)
    woff = _kernel.W0 + np.concatenate(([0], np.cumsum(q_arr)))
    woff = woff.astype(np.int64)
    n_state = int(woff[-1])

    y = build_initial_state(cfg, plant, n_state, woff)
    _seed_filters(cfg, y, ppc_v, ppc_h)

    n_steps = int(round(cfg.duration / cfg.dt))
    log_stride = max(1, int(round(cfg.log_every / cfg.dt)))
    n_rows = n_steps // log_stride + 2
    log_out = np.zeros((n_rows, _kernel.NCOL))
    aux = np.zeros(_kernel.AUX_SIZE)

    tr1, pf1 = ppc_v.packed()
    tr2, pf2 = ppc_h.packed()
    fault5 = np.array([cfg.fault.lambda_phi, cfg.fault.f_phi,
                       cfg.fault.lambda_delta, cfg.fault.f_delta,
                       cfg.fault.t_fault])
    lim4 = np.array([cfg.actuator.phi_min, cfg.actuator.phi_max,
                     cfg.actuator.delta_min, cfg.actuator.delta_max])
    cmd4 = np.array([cfg.actuator.phi_cmd_min, cfg.actuator.phi_cmd_max,
                     cfg.actuator.delta_cmd_min, cfg.actuator.delta_cmd_max])
    vlim = np.array([cfg.vlimits.gamma_max, cfg.vlimits.theta_max,
                     cfg.vlimits.q_max])

    t_start = time.perf_counter()
    status, rows, t_end = _kernel._simulate(
        y, n_steps, cfg.dt, log_stride,
        pack_aero(plant), pack_aero(cfg.aero), pack_disturbance(cfg.disturbance),
        fault5, lim4, cmd4, pack_gains(cfg.gains),
        np.concatenate([tr1, tr2]), np.concatenate([pf1, pf2]),
        cfg.reference.packed(), cfg.tracker.packed(),
        centers, qoff, q_arr, n_in, in_idx, var_lo, var_hi, nn_g,
        cfg.nn.alpha1, cfg.nn.beta1, woff, vlim,
        cfg.small_angle_hdot, cfg.divide_by_g_theta, cfg.strict_ppc,
        cfg.divergence_ceiling, ppc_v.transform.T_p, ppc_h.transform.T_p,
        cfg.perf_v.T_s, cfg.perf_h.T_s, cfg.fault.t_fault,
        log_out, aux)
    wall = time.perf_counter() - t_start

    log = TrajectoryLog(data=log_out[:rows].copy())
    if status == _kernel.STATUS_NONFINITE:
        bad = int(aux[_kernel.A_BAD_COMPONENT])
        raise NonFiniteDerivative(
            f"non-finite state component {bad} at t={t_end:.6g}",
            component=bad, t=t_end, log=log)
    if status == _kernel.STATUS_DIVERGENCE:
        raise Divergence(f"diagnostics exceeded ceiling at t={t_end:.6g}",
                         t=t_end, log=log)
    if status == _kernel.STATUS_ARCSIN:
        raise ArcsinDomain(
            f"altitude-rate estimate left the arcsin domain at t={t_end:.6g}")
    if status == _kernel.STATUS_BREACH:
        raise BoundBreach(f"performance bound reached at t={t_end:.6g} "
                          "(strict mode)", t=t_end, log=log)

    metrics = compute_metrics(log, cfg)
    metrics.wall_clock_s = wall
    trim0 = trim_state(cfg.aero, cfg.reference.v0, cfg.reference.h0)
    coeffs0 = eval_aero(trim0, cfg.aero, check_envelope=False)
    metrics.gain_audit = gain_floor_audit(
        cfg.gains, g_gamma=coeffs0.g_gamma, g_h=coeffs0.g_h,
        beta_v=ppc_v.transform.beta, beta_h=ppc_h.transform.beta)
    metrics.exact = ExactCounters(
        viol_count_v=int(aux[_kernel.A_VIOL_V]),
        viol_count_h=int(aux[_kernel.A_VIOL_H]),
        first_viol_t_v=(aux[_kernel.A_FIRST_VIOL_V]
                        if aux[_kernel.A_FIRST_VIOL_V] >= 0 else math.nan),
        first_viol_t_h=(aux[_kernel.A_FIRST_VIOL_H]
                        if aux[_kernel.A_FIRST_VIOL_H] >= 0 else math.nan),
        max_xi_v=aux[_kernel.A_MAX_XI_V],
        max_xi_h=aux[_kernel.A_MAX_XI_H],
        max_ev_post_tp=aux[_kernel.A_MAX_EV_POST_TP],
        max_eh_post_tp=aux[_kernel.A_MAX_EH_POST_TP],
        max_excess_ev_post_tp=aux[_kernel.A_MAX_EXC_EV_POST_TP],
        max_excess_eh_post_tp=aux[_kernel.A_MAX_EXC_EH_POST_TP],
        max_ev_post_ts=aux[_kernel.A_MAX_EV_POST_TS],
        max_eh_post_ts=aux[_kernel.A_MAX_EH_POST_TS],
        max_ev_post_fault=aux[_kernel.A_MAX_EV_POST_FAULT],
        max_eh_post_fault=aux[_kernel.A_MAX_EH_POST_FAULT],
        max_excess_ev_post_fault=aux[_kernel.A_MAX_EXC_EV_POST_FAULT],
        max_excess_eh_post_fault=aux[_kernel.A_MAX_EXC_EH_POST_FAULT],
        viol_v_post_fault=int(aux[_kernel.A_VIOL_V_POST_FAULT]),
        viol_h_post_fault=int(aux[_kernel.A_VIOL_H_POST_FAULT]))
    return log, metrics

"""State reconstruction and disturbance estimation.

Two second-order trackers driven by bounded sigmoid corrections recover the
altitude rate (and from it the flight path angle) and the reconstructed
angle's rate from measurable states.  Five adaptive radial-basis-function
observers estimate the per-channel lumped disturbances; their correction
terms mix a fractional and a higher-than-linear power of the observation
error so the estimate settles within a time that is insensitive to the
initial error size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ArcsinDomain, DimensionMismatch, ParameterDomain

ASIN_EDGE = 1.0 - 1e-9


# ---------------------------------------------------------------------------
# scalar primitives
# ---------------------------------------------------------------------------

@njit(cache=True)
def sig(x, eta0, eta1):
    """Scaled, shifted sigmoid: eta0 * (1 / (1 + exp(-eta1 * x)) - 0.5).

    Odd and bounded by eta0 / 2 in magnitude.
    """
    return eta0 * (1.0 / (1.0 + math.exp(-eta1 * x)) - 0.5)


@njit(cache=True)
def spow(x, a):
    """Signed power |x|**a * sgn(x); odd in x for any a > 0."""
    if x > 0.0:
        return x ** a
    if x < 0.0:
        return -((-x) ** a)
    return 0.0


def fixed_time_bound(c1: float, c2: float, p: float, q: float, w: float) -> float:
    """Upper bound on the settling time of a two-power decrement.

    For V' <= -c1*V**p - c2*V**q + residual with p in (0,1), q > 1 and a
    split factor w in (0,1), the settling time is at most
    1/(c1*w*(1-p)) + 1/(c2*w*(q-1)).
    """
    if c1 <= 0.0 or c2 <= 0.0:
        raise ParameterDomain(f"c1, c2 must be > 0, got {c1}, {c2}")
    if not (0.0 < p < 1.0):
        raise ParameterDomain(f"p must be in (0,1), got {p}")
    if q <= 1.0:
        raise ParameterDomain(f"q must be > 1, got {q}")
    if not (0.0 < w < 1.0):
        raise ParameterDomain(f"w must be in (0,1), got {w}")
    return 1.0 / (c1 * w * (1.0 - p)) + 1.0 / (c2 * w * (q - 1.0))


def residual_set_bound(c1: float, c2: float, p: float, q: float, w: float,
                       varsigma: float) -> float:
    """Level-set bound the two-power decrement settles into.

    min{ (varsigma/((1-w)c1))**(1/p), (varsigma/((1-w)c2))**(1/q) }.
    """
    fixed_time_bound(c1, c2, p, q, w)  # shares the domain checks
    if varsigma <= 0.0:
        raise ParameterDomain(f"varsigma must be > 0, got {varsigma}")
    b1 = (varsigma / ((1.0 - w) * c1)) ** (1.0 / p)
    b2 = (varsigma / ((1.0 - w) * c2)) ** (1.0 / q)
    return min(b1, b2)


# ---------------------------------------------------------------------------
# second-order sigmoid trackers
# ---------------------------------------------------------------------------

@dataclass
class SigTrackerState:
    """Second-order tracker: z1 follows the measured signal, z2 its rate."""

    z1: float = 0.0
    z2: float = 0.0
    d: float = 20.0
    eta0: float = 1.5
    eta1: float = 1.5
    eta2: float = 1.5
    eta3: float = 1.5

    def validate(self) -> None:
        if self.d <= 0.0:
            raise ParameterDomain(f"tracker gain d must be > 0, got {self.d}")
        for name in ("eta0", "eta1", "eta2", "eta3"):
            if getattr(self, name) <= 0.0:
                raise ParameterDomain(f"{name} must be > 0")


@njit(cache=True)
def _tracker_rhs(z1, z2, measured, d, eta0, eta1, eta2, eta3):
    dz1 = z2
    dz2 = -d * d * (sig(z1 - measured, eta0, eta1) + sig(z2 / d, eta2, eta3))
    return dz1, dz2


def sig_tracker_rhs(state: SigTrackerState, measured: float) -> tuple[float, float]:
    """Time derivatives (z1', z2') of the tracker against a measured signal."""
    return _tracker_rhs(state.z1, state.z2, measured, state.d,
                        state.eta0, state.eta1, state.eta2, state.eta3)


def reconstruct_angles(chi_h: float, V: float, theta: float) -> tuple[float, float]:
    """Flight path angle from the altitude-rate estimate, and angle of attack.

    gamma_hat = arcsin(chi_h / V), alpha_hat = theta - gamma_hat.  Raises
    ArcsinDomain when the ratio leaves [-1, 1], which signals tracker
    divergence rather than a recoverable condition.
    """
    ratio = chi_h / V
    if abs(ratio) > ASIN_EDGE:
        raise ArcsinDomain(f"|chi_h / V| = {abs(ratio)} out of arcsin domain")
    gamma_hat = math.asin(ratio)
    return gamma_hat, theta - gamma_hat


# ---------------------------------------------------------------------------
# radial basis function machinery
# ---------------------------------------------------------------------------

@njit(cache=True)
def _rbf_core(x, centers, b_hat, out):
    q, n = centers.shape
    for i in range(q):
        s = 0.0
        for j in range(n):
            dv = x[j] - centers[i, j]
            s += dv * dv
        out[i] = math.exp(-s / (b_hat * b_hat))


def rbf_eval(x: np.ndarray, centers: np.ndarray, b_hat: float) -> np.ndarray:
    """Gaussian activations exp(-||x - c_i||^2 / b_hat^2) for each node."""
    x = np.asarray(x, dtype=np.float64).ravel()
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[1] != x.shape[0]:
        raise DimensionMismatch(
            f"centers shape {centers.shape} does not match input length {x.shape[0]}")
    if b_hat <= 0.0:
        raise ParameterDomain(f"b_hat must be > 0, got {b_hat}")
    out = np.empty(centers.shape[0])
    _rbf_core(x, centers, b_hat, out)
    return out


def grid_centers(n_dims: int, nodes_per_dim: int) -> np.ndarray:
    """Tensor-product grid of nodes over the normalized box [-1, 1]^n."""
    axes = [np.linspace(-1.0, 1.0, nodes_per_dim) for _ in range(n_dims)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


@njit(cache=True)
def _normalize_box(x, lo, hi, out):
    for j in range(x.shape[0]):
        out[j] = 2.0 * (x[j] - lo[j]) / (hi[j] - lo[j]) - 1.0


# ---------------------------------------------------------------------------
# adaptive disturbance observer
# ---------------------------------------------------------------------------

@dataclass
class FtNnObserver:
    """One adaptive disturbance observer channel.

    The observer state z chases the measured channel state through a
    three-term correction (fractional power alpha1, power beta1 > 1, and a
    linear term).  A Gaussian network with adaptive output weights supplies
    the disturbance estimate; network inputs are normalized onto the
    declared state box before evaluation, and the node grid lives in those
    normalized coordinates.

    The weight drive moves opposite to the observation error z - x: when
    the plant runs away above the observer the estimate is pushed up.  The
    descent direction is pinned down by the Lyapunov-decrement unit test on
    a scalar plant.
    """

    z: float
    W_hat: np.ndarray
    centers: np.ndarray          # (q, n) in normalized coordinates
    box_lo: np.ndarray
    box_hi: np.ndarray
    b_hat: float = 1.5
    l1: float = 5.0
    l2: float = 5.0
    l3: float = 1.0
    k: float = 0.001
    gamma_w: float = 1.0
    alpha1: float = 0.5
    beta1: float = 2.0

    def validate(self) -> None:
        for name in ("b_hat", "l1", "l2", "l3", "gamma_w"):
            if getattr(self, name) <= 0.0:
                raise ParameterDomain(f"{name} must be > 0")
        if self.k < 0.0:
            raise ParameterDomain("k must be >= 0")
        if not (0.0 < self.alpha1 < 1.0):
            raise ParameterDomain(f"alpha1 must be in (0,1), got {self.alpha1}")
        if self.beta1 <= 1.0:
            raise ParameterDomain(f"beta1 must be > 1, got {self.beta1}")
        if self.centers.shape[0] != self.W_hat.shape[0]:
            raise DimensionMismatch("W_hat length must equal number of centers")
        if np.abs(self.centers).max() > 1.0 + 1e-12:
            raise ParameterDomain("centers must lie inside the normalized box")

    def normalized_input(self, nn_input: np.ndarray) -> np.ndarray:
        x = np.asarray(nn_input, dtype=np.float64).ravel()
        if x.shape[0] != self.centers.shape[1]:
            raise DimensionMismatch(
                f"input length {x.shape[0]} != network dimension {self.centers.shape[1]}")
        out = np.empty_like(x)
        _normalize_box(x, self.box_lo, self.box_hi, out)
        return out

    def activations(self, nn_input: np.ndarray) -> np.ndarray:
        return rbf_eval(self.normalized_input(nn_input), self.centers, self.b_hat)

    def d_hat(self, nn_input: np.ndarray) -> float:
        return float(self.W_hat @ self.activations(nn_input))


@njit(cache=True)
def _ftnn_correction(e1, l1, l2, l3, alpha1, beta1):
    return -l1 * spow(e1, alpha1) - l2 * spow(e1, beta1) - l3 * e1


@njit(cache=True)
def _ftnn_rates(z, x_i, w_hat, h_act, f_i, g_i, bar_x_i,
                l1, l2, l3, k, gamma_w, alpha1, beta1, dw_out):
    e1 = z - x_i
    d_hat = 0.0
    for i in range(w_hat.shape[0]):
        d_hat += w_hat[i] * h_act[i]
    dz = d_hat + _ftnn_correction(e1, l1, l2, l3, alpha1, beta1) + f_i + g_i * bar_x_i
    for i in range(w_hat.shape[0]):
        dw_out[i] = gamma_w * (-e1 * h_act[i] - k * w_hat[i])
    return dz, d_hat


def ftnn_observer_rhs(obs: FtNnObserver, x_i: float, bar_x_i: float,
                      f_i: float, g_i: float, nn_input: np.ndarray):
    """Rates (z', W_hat') plus the current disturbance estimate d_hat."""
    h_act = obs.activations(nn_input)
    dw = np.empty_like(obs.W_hat)
    dz, d_hat = _ftnn_rates(obs.z, x_i, obs.W_hat, h_act, f_i, g_i, bar_x_i,
                            obs.l1, obs.l2, obs.l3, obs.k, obs.gamma_w,
                            obs.alpha1, obs.beta1, dw)
    return dz, dw, d_hat


def make_observer(box_lo, box_hi, nodes_per_dim: int = 3, width_factor: float = 1.5,
                  z0: float = 0.0, **gains) -> FtNnObserver:
    """Build an observer whose node grid tiles the given state box.

    b_hat is width_factor times the normalized grid spacing (the spacing is
    2/(nodes_per_dim-1)), so neighboring nodes overlap regardless of the
    raw units of each input dimension.
    """
    box_lo = np.asarray(box_lo, dtype=np.float64).ravel()
    box_hi = np.asarray(box_hi, dtype=np.float64).ravel()
    if box_lo.shape != box_hi.shape:
        raise DimensionMismatch("box_lo and box_hi must have the same length")
    if np.any(box_hi <= box_lo):
        raise ParameterDomain("box_hi must exceed box_lo componentwise")
    if nodes_per_dim < 2:
        raise ParameterDomain("nodes_per_dim must be >= 2")
    centers = grid_centers(box_lo.shape[0], nodes_per_dim)
    spacing = 2.0 / (nodes_per_dim - 1)
    obs = FtNnObserver(z=z0, W_hat=np.zeros(centers.shape[0]), centers=centers,
                       box_lo=box_lo, box_hi=box_hi,
                       b_hat=width_factor * spacing, **gains)
    obs.validate()
    return obs

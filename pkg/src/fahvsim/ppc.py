"""Prescribed-performance machinery: shrinking error envelopes and the
initial-error-free transformation ramp.

The envelope rho(t) decays polynomially from its initial bound to the final
accuracy bound, reaching it exactly at the appointed time T_s.  The ramp
phi(t) grows from a small design value beta to 1 by the rendezvous time T_p,
so the product phi(t) * e(t) starts deep inside the envelope no matter how
large the raw initial error is.  The normalized error xi = phi*e/rho is
mapped through a logarithmic barrier to the transformed error used by the
controllers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from numba import njit

from .errors import BoundBreach, ParameterDomain

XI_EDGE = 1.0 - 1e-9


@dataclass
class ErrorTransformConfig:
    """Shape parameters of the ramp phi(t).

    beta is the value at t = 0 and must lie in (0, 1); a_exp > 1 and mu > 0
    bend the curve; T_p is the time at which phi reaches 1 and stays there.
    """

    beta: float = 0.05
    a_exp: float = 1.05
    mu: float = 0.1
    T_p: float = 2.5

    def validate(self) -> None:
        if not (0.0 < self.beta < 1.0):
            raise ParameterDomain(f"beta must be in (0,1), got {self.beta}")
        if not self.a_exp > 1.0:
            raise ParameterDomain(f"a_exp must be > 1, got {self.a_exp}")
        if not self.mu > 0.0:
            raise ParameterDomain(f"mu must be > 0, got {self.mu}")
        if self.T_p < 0.0:
            raise ParameterDomain(f"T_p must be >= 0, got {self.T_p}")


@dataclass
class PerformanceFunction:
    """Decaying bound rho(t): initial bound xi_a, final bound xi_b at T_s."""

    xi_a: float = 6.0
    xi_b: float = 0.2
    T_s: float = 10.0
    n: float = 2.0

    def validate(self) -> None:
        if not (self.xi_a > self.xi_b > 0.0):
            raise ParameterDomain(
                f"need xi_a > xi_b > 0, got xi_a={self.xi_a}, xi_b={self.xi_b}")
        if self.T_s <= 0.0:
            raise ParameterDomain(f"T_s must be > 0, got {self.T_s}")
        if self.n < 1.0:
            raise ParameterDomain(f"n must be >= 1, got {self.n}")


@dataclass
class TransformedError:
    """Raw error, ramped error, normalized error and its log-barrier image."""

    e: float
    e_bar: float
    xi: float
    epsilon: float
    clamped: bool = False


@njit(cache=True)
def _phi(t, beta, a_exp, mu, t_p):
    if t >= t_p:
        return 1.0
    den = t_p * (math.exp(mu * t / t_p) + 1.0) - t
    u = 2.0 * (t_p - t) / den
    return 1.0 - (1.0 - beta) * u ** a_exp


@njit(cache=True)
def _phi_dot(t, beta, a_exp, mu, t_p):
    if t >= t_p:
        return 0.0
    den = t_p * (math.exp(mu * t / t_p) + 1.0) - t
    u = 2.0 * (t_p - t) / den
    dden = mu * math.exp(mu * t / t_p) - 1.0
    du = (-2.0 * den - 2.0 * (t_p - t) * dden) / (den * den)
    return -(1.0 - beta) * a_exp * u ** (a_exp - 1.0) * du


@njit(cache=True)
def _rho(t, xi_a, xi_b, t_s, n):
    if t >= t_s:
        return xi_b
    return (xi_a - xi_b) * (1.0 - t / t_s) ** n + xi_b


@njit(cache=True)
def _rho_dot(t, xi_a, xi_b, t_s, n):
    if t >= t_s:
        return 0.0
    return -n * (xi_a - xi_b) * (1.0 - t / t_s) ** (n - 1.0) / t_s


@njit(cache=True)
def _eps_core(e, phi_val, rho_val):
    """Returns (e_bar, xi, epsilon, violated) with xi clamped at the barrier edge."""
    e_bar = phi_val * e
    xi = e_bar / rho_val
    violated = False
    if xi >= XI_EDGE:
        xi = XI_EDGE
        violated = True
    elif xi <= -XI_EDGE:
        xi = -XI_EDGE
        violated = True
    eps = math.log((1.0 + xi) / (1.0 - xi))
    return e_bar, xi, eps, violated


def phi(t: float, cfg: ErrorTransformConfig) -> float:
    """Ramp value at time t; equals beta at t = 0 and 1 for t >= T_p."""
    return _phi(t, cfg.beta, cfg.a_exp, cfg.mu, cfg.T_p)


def phi_dot(t: float, cfg: ErrorTransformConfig) -> float:
    """Analytic time derivative of the ramp; 0 beyond T_p."""
    return _phi_dot(t, cfg.beta, cfg.a_exp, cfg.mu, cfg.T_p)


@njit(cache=True)
def _phi_rate_grid(beta, a_exp, mu, t_p, n_pts):
    rate_max = -1e300
    rate_min = 1e300
    for i in range(n_pts):
        t = t_p * i / (n_pts - 1.0)
        r = _phi_dot(t, beta, a_exp, mu, t_p)
        if r > rate_max:
            rate_max = r
        if r < rate_min:
            rate_min = r
    return rate_max, rate_min


def phi_max_rate(cfg: ErrorTransformConfig, n_pts: int = 10001) -> float:
    """Grid maximum of phi_dot over [0, T_p]; the controllers use it as phi_m."""
    if cfg.T_p <= 0.0:
        return 0.0
    rate_max, _ = _phi_rate_grid(cfg.beta, cfg.a_exp, cfg.mu, cfg.T_p, n_pts)
    return rate_max


def phi_is_monotone(cfg: ErrorTransformConfig, n_pts: int = 10001) -> bool:
    """Grid check that the ramp never decreases on [0, T_p]."""
    if cfg.T_p <= 0.0:
        return True
    _, rate_min = _phi_rate_grid(cfg.beta, cfg.a_exp, cfg.mu, cfg.T_p, n_pts)
    return rate_min >= -1e-12


def rho(t: float, pf: PerformanceFunction) -> float:
    """Envelope value at time t; xi_a at 0, xi_b for t >= T_s."""
    return _rho(t, pf.xi_a, pf.xi_b, pf.T_s, pf.n)


def rho_dot(t: float, pf: PerformanceFunction) -> float:
    """Analytic derivative of the envelope; <= 0 everywhere, 0 beyond T_s."""
    return _rho_dot(t, pf.xi_a, pf.xi_b, pf.T_s, pf.n)


def epsilon_of(e: float, t: float, cfg: ErrorTransformConfig,
               pf: PerformanceFunction, clamp: bool = False) -> TransformedError:
    """Transform a raw tracking error at time t.

    With clamp=False a normalized error at the barrier edge raises
    BoundBreach; with clamp=True the event is recorded on the returned
    object and the transform is evaluated at the clamped edge.
    """
    phi_val = _phi(t, cfg.beta, cfg.a_exp, cfg.mu, cfg.T_p)
    rho_val = _rho(t, pf.xi_a, pf.xi_b, pf.T_s, pf.n)
    e_bar, xi, eps, violated = _eps_core(e, phi_val, rho_val)
    if violated and not clamp:
        raise BoundBreach(
            f"|xi| >= {XI_EDGE} at t={t} (e={e}, phi={phi_val}, rho={rho_val})",
            t=t)
    return TransformedError(e=e, e_bar=e_bar, xi=xi, epsilon=eps, clamped=violated)


def xi_from_epsilon(eps: float) -> float:
    """Inverse of the log barrier: xi = (exp(eps) - 1) / (exp(eps) + 1)."""
    return math.tanh(0.5 * eps)


def beta_for_initial_error(e0: float, rho0: float, margin: float = 1e-3,
                           beta_max: float = 0.05) -> float:
    """Largest ramp start value that keeps |xi(0)| < 1 for a raw error e0.

    Returns min(beta_max, (1 - margin) * rho0 / |e0|); any beta at or below
    the second term maps e0 strictly inside the envelope at t = 0.
    """
    if rho0 <= 0.0:
        raise ParameterDomain(f"rho0 must be > 0, got {rho0}")
    if not (0.0 < beta_max < 1.0):
        raise ParameterDomain(f"beta_max must be in (0,1), got {beta_max}")
    if e0 == 0.0:
        return beta_max
    return min(beta_max, (1.0 - margin) * rho0 / abs(e0))

"""Fused fixed-step integration loop (numba).

One coupled state vector carries the plant, both sigmoid trackers, the five
disturbance observers (scalar state + weight blocks) and the three command
filters.  Commands are computed once per step from the step-start state and
held over the four RK4 stages, so the controller always consumes estimates
produced by the previous step.  All piecewise-in-time formulas (fault map,
ramp and envelope switches) are evaluated inside the stage derivative;
they are continuous at their switch points except for the fault map, whose
jump is confined to the input path.

State layout: 0..4 V,h,gamma,theta,Q | 5..10 bending modes | 11,12 altitude
tracker | 13,14 angle tracker | 15..19 observer states z | 20..22 command
filters | 23.. observer weight blocks.
"""

import math

import numpy as np
from numba import njit

from .controller import (GI_LG2, GI_LH2, GI_LT2, GI_R, GI_TAU1, GI_TAU2,
                         GI_TAU3, _controller_core, _filter_rhs_core)
from .observers import _ftnn_rates, _tracker_rhs
from .vehicle import _aero_eval, _apply_fault, _disturbance_eval, _plant_rhs

ASIN_EDGE = 1.0 - 1e-9
W0 = 23  # first weight index in the state vector

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_DIVERGENCE = 2
STATUS_BREACH = 3
STATUS_ARCSIN = 4

# aux vector layout
A_VIOL_V = 0
A_VIOL_H = 1
A_FIRST_VIOL_V = 2
A_FIRST_VIOL_H = 3
A_MAX_XI_V = 4
A_MAX_XI_H = 5
A_MAX_EV_POST_TP = 6
A_MAX_EH_POST_TP = 7
A_MAX_EV_POST_TS = 8
A_MAX_EH_POST_TS = 9
A_MAX_EV_POST_FAULT = 10
A_MAX_EH_POST_FAULT = 11
A_PEAK_PHI = 12
A_PEAK_DELTA = 13
A_VIOL_V_POST_FAULT = 14
A_VIOL_H_POST_FAULT = 15
A_MAX_EXC_EV_POST_TP = 16
A_MAX_EXC_EH_POST_TP = 17
A_MAX_EXC_EV_POST_FAULT = 18
A_MAX_EXC_EH_POST_FAULT = 19
A_BAD_COMPONENT = 20
AUX_SIZE = 21

NCOL = 71


@njit(cache=True)
def _reference_core(t, rp):
    """Critically damped second-order step response, closed form.

    rp = (v0, dv, om_v, h0, dh, om_h); returns (V_d, Vd_dot, h_d, hd_dot).
    """
    ev = math.exp(-rp[2] * t)
    v_d = rp[0] + rp[1] * (1.0 - ev * (1.0 + rp[2] * t))
    vd_dot = rp[1] * rp[2] * rp[2] * t * ev
    eh = math.exp(-rp[5] * t)
    h_d = rp[3] + rp[4] * (1.0 - eh * (1.0 + rp[5] * t))
    hd_dot = rp[4] * rp[5] * rp[5] * t * eh
    return v_d, vd_dot, h_d, hd_dot


@njit(cache=True)
def _nn_activations(meas, ch, centers, qoff, q_arr, n_in, in_idx,
                    var_lo, var_hi, bhat, act):
    """Fill act[:q] with the channel's Gaussian activations at the measured
    inputs, normalized onto [-1, 1] per variable box."""
    q = q_arr[ch]
    nin = n_in[ch]
    base = qoff[ch]
    b2 = bhat * bhat
    for i in range(q):
        s = 0.0
        for j in range(nin):
            vi = in_idx[ch, j]
            xn = 2.0 * (meas[vi] - var_lo[vi]) / (var_hi[vi] - var_lo[vi]) - 1.0
            d = xn - centers[base + i, j]
            s += d * d
        act[i] = math.exp(-s / b2)
    return q


@njit(cache=True)
def _sim_rhs(t, y, phi_d, delta_ed, gam_bar, th_bar, q_bar,
             apc, acc, dist, fault5, lim4, G, trk,
             centers, qoff, q_arr, n_in, in_idx, var_lo, var_hi, nn_g,
             alpha1, beta1, woff, tau_l, small_angle, dy, act, d5, meas):
    """Stage derivative of the full coupled state with held commands.

    tau_l = (tau1, tau2, tau3, l_f1, l_f2, l_f3, r) filter constants.
    """
    # effective inputs and disturbances at stage time
    phi_eff, delta_eff = _apply_fault(phi_d, delta_ed, t, fault5, lim4)
    _disturbance_eval(dist, t, d5)

    # plant
    _plant_rhs(apc, y[:11], phi_eff, delta_eff, d5, small_angle, dy[:11])

    # altitude tracker measures true altitude
    dz1, dz2 = _tracker_rhs(y[11], y[12], y[1], trk[0],
                            trk[2], trk[3], trk[4], trk[5])
    dy[11] = dz1
    dy[12] = dz2

    # reconstructed flight path angle drives the cascaded tracker
    ratio = y[12] / y[0]
    if ratio > ASIN_EDGE:
        ratio = ASIN_EDGE
    elif ratio < -ASIN_EDGE:
        ratio = -ASIN_EDGE
    gam_hat = math.asin(ratio)
    ds1, ds2 = _tracker_rhs(y[13], y[14], gam_hat, trk[1],
                            trk[2], trk[3], trk[4], trk[5])
    dy[13] = ds1
    dy[14] = ds2

    # controller-model coefficients at the reconstructed state
    f_v, g_v, g_h, f_g, g_g, f_t, g_t, f_q, g_q = _aero_eval(
        acc, y[0], gam_hat, y[3], y[4])

    meas[0] = y[0]
    meas[1] = y[1]
    meas[2] = gam_hat
    meas[3] = y[3]
    meas[4] = y[4]

    # disturbance observers; known-input terms follow the transformed model
    for ch in range(5):
        q = _nn_activations(meas, ch, centers, qoff, q_arr, n_in, in_idx,
                            var_lo, var_hi, nn_g[ch, 5], act)
        if ch == 0:
            f_i, g_i, xbar = f_v, g_v, phi_d
        elif ch == 1:
            f_i, g_i, xbar = 0.0, g_h, gam_hat
        elif ch == 2:
            f_i, g_i, xbar = f_g, g_g, y[3]
        elif ch == 3:
            f_i, g_i, xbar = f_t, g_t, y[4]
        else:
            f_i, g_i, xbar = f_q, g_q, delta_ed
        w = y[woff[ch]:woff[ch + 1]]
        dw = dy[woff[ch]:woff[ch + 1]]
        dz, _ = _ftnn_rates(y[15 + ch], meas[ch], w, act[:q], f_i, g_i, xbar,
                            nn_g[ch, 0], nn_g[ch, 1], nn_g[ch, 2],
                            nn_g[ch, 3], nn_g[ch, 4], alpha1, beta1, dw)
        dy[15 + ch] = dz

    # command filters chase the held virtual commands
    r = int(tau_l[6])
    dy[20] = _filter_rhs_core(y[20] - gam_bar, tau_l[0], r, tau_l[3])
    dy[21] = _filter_rhs_core(y[21] - th_bar, tau_l[1], r, tau_l[4])
    dy[22] = _filter_rhs_core(y[22] - q_bar, tau_l[2], r, tau_l[5])


@njit(cache=True, nogil=True)
def _simulate(y, n_steps, dt, log_stride,
              apc, acc, dist, fault5, lim4, cmd4, G, tr, pf, refp, trk,
              centers, qoff, q_arr, n_in, in_idx, var_lo, var_hi, nn_g,
              alpha1, beta1, woff, vlim,
              small_angle, divide_g_theta, strict_ppc,
              div_ceiling, tp_v, tp_h, ts_v, ts_h, t_fault,
              log_out, aux):
    """Run the scenario; fills log_out rows and aux counters.

    Returns (status, rows_written, t_reached).
    """
    nst = y.shape[0]
    dy = np.zeros(nst)
    k1 = np.zeros(nst)
    k2 = np.zeros(nst)
    k3 = np.zeros(nst)
    k4 = np.zeros(nst)
    ytmp = np.zeros(nst)
    max_q = 0
    for ch in range(5):
        if q_arr[ch] > max_q:
            max_q = q_arr[ch]
    act = np.zeros(max_q)
    d5 = np.zeros(5)
    meas = np.zeros(5)
    dhat = np.zeros(5)

    tau_l = np.zeros(7)
    tau_l[0] = G[GI_TAU1]
    tau_l[1] = G[GI_TAU2]
    tau_l[2] = G[GI_TAU3]
    tau_l[3] = G[GI_LH2]
    tau_l[4] = G[GI_LG2]
    tau_l[5] = G[GI_LT2]
    tau_l[6] = G[GI_R]

    aux[A_FIRST_VIOL_V] = -1.0
    aux[A_FIRST_VIOL_H] = -1.0
    aux[A_MAX_EXC_EV_POST_TP] = -1e300
    aux[A_MAX_EXC_EH_POST_TP] = -1e300
    aux[A_MAX_EXC_EV_POST_FAULT] = -1e300
    aux[A_MAX_EXC_EH_POST_FAULT] = -1e300
    t_fault_settled = t_fault + 5.0

    row = 0
    sticky_v = 0.0
    sticky_h = 0.0
    status = STATUS_OK
    t = 0.0

    for step in range(n_steps + 1):
        t = step * dt

        ratio = y[12] / y[0]
        if ratio >= ASIN_EDGE or ratio <= -ASIN_EDGE:
            status = STATUS_ARCSIN
            break
        gam_hat = math.asin(ratio)
        alpha_hat = y[3] - gam_hat

        f_v, g_v, g_h, f_g, g_g, f_t, g_t, f_q, g_q = _aero_eval(
            acc, y[0], gam_hat, y[3], y[4])

        meas[0] = y[0]
        meas[1] = y[1]
        meas[2] = gam_hat
        meas[3] = y[3]
        meas[4] = y[4]
        for ch in range(5):
            q = _nn_activations(meas, ch, centers, qoff, q_arr, n_in, in_idx,
                                var_lo, var_hi, nn_g[ch, 5], act)
            s = 0.0
            for i in range(q):
                s += y[woff[ch] + i] * act[i]
            dhat[ch] = s

        v_d, vd_dot, h_d, hd_dot = _reference_core(t, refp)

        (phi_d, delta_ed, gam_bar, th_bar, q_bar,
         eps1, eps2, e_g, e_t, e_q, yf1, yf2, yf3,
         _xd1, _xd2, _xd3, e_v, e_h, xi1, xi2, rho1, rho2, phi1, phi2,
         viol1, viol2) = _controller_core(
            t, y[0], y[1], gam_hat, y[3], y[4],
            dhat[0], dhat[2], dhat[3], dhat[4],
            y[20], y[21], y[22],
            v_d, vd_dot, h_d, hd_dot,
            f_v, g_v, g_h, f_g, g_g, g_t, f_q, g_q,
            G, tr, pf, vlim, cmd4, divide_g_theta)

        # divergence watch on the error vector
        worst = abs(eps1)
        for v in (eps2, e_g, e_t, e_q, yf1, yf2, yf3):
            if abs(v) > worst:
                worst = abs(v)
        if not math.isfinite(worst) or worst > div_ceiling:
            status = STATUS_DIVERGENCE
            break

        # per-step violation accounting and maxima
        if viol1:
            aux[A_VIOL_V] += 1.0
            sticky_v = 1.0
            if aux[A_FIRST_VIOL_V] < 0.0:
                aux[A_FIRST_VIOL_V] = t
            if t >= t_fault:
                aux[A_VIOL_V_POST_FAULT] += 1.0
        if viol2:
            aux[A_VIOL_H] += 1.0
            sticky_h = 1.0
            if aux[A_FIRST_VIOL_H] < 0.0:
                aux[A_FIRST_VIOL_H] = t
            if t >= t_fault:
                aux[A_VIOL_H_POST_FAULT] += 1.0
        if abs(xi1) > aux[A_MAX_XI_V]:
            aux[A_MAX_XI_V] = abs(xi1)
        if abs(xi2) > aux[A_MAX_XI_H]:
            aux[A_MAX_XI_H] = abs(xi2)
        if t > tp_v:
            if abs(e_v) > aux[A_MAX_EV_POST_TP]:
                aux[A_MAX_EV_POST_TP] = abs(e_v)
            exc = abs(e_v) - rho1
            if exc > aux[A_MAX_EXC_EV_POST_TP]:
                aux[A_MAX_EXC_EV_POST_TP] = exc
        if t > tp_h:
            if abs(e_h) > aux[A_MAX_EH_POST_TP]:
                aux[A_MAX_EH_POST_TP] = abs(e_h)
            exc = abs(e_h) - rho2
            if exc > aux[A_MAX_EXC_EH_POST_TP]:
                aux[A_MAX_EXC_EH_POST_TP] = exc
        if t >= ts_v and abs(e_v) > aux[A_MAX_EV_POST_TS]:
            aux[A_MAX_EV_POST_TS] = abs(e_v)
        if t >= ts_h and abs(e_h) > aux[A_MAX_EH_POST_TS]:
            aux[A_MAX_EH_POST_TS] = abs(e_h)
        if t >= t_fault_settled:
            if abs(e_v) > aux[A_MAX_EV_POST_FAULT]:
                aux[A_MAX_EV_POST_FAULT] = abs(e_v)
            if abs(e_h) > aux[A_MAX_EH_POST_FAULT]:
                aux[A_MAX_EH_POST_FAULT] = abs(e_h)
            exc = abs(e_v) - rho1
            if exc > aux[A_MAX_EXC_EV_POST_FAULT]:
                aux[A_MAX_EXC_EV_POST_FAULT] = exc
            exc = abs(e_h) - rho2
            if exc > aux[A_MAX_EXC_EH_POST_FAULT]:
                aux[A_MAX_EXC_EH_POST_FAULT] = exc
        if abs(phi_d) > aux[A_PEAK_PHI]:
            aux[A_PEAK_PHI] = abs(phi_d)
        if abs(delta_ed) > aux[A_PEAK_DELTA]:
            aux[A_PEAK_DELTA] = abs(delta_ed)

        must_log = (step % log_stride == 0 or step == n_steps
                    or (strict_ppc and (viol1 or viol2)))
        if must_log:
            phi_eff, delta_eff = _apply_fault(phi_d, delta_ed, t, fault5, lim4)
            _disturbance_eval(dist, t, d5)
            # true lumped disturbances: plant rate minus controller model
            fvp, gvp, _ghp, fgp, ggp, ftp, gtp, fqp, gqp = _aero_eval(
                apc, y[0], y[2], y[3], y[4])
            vdot_true = gvp * phi_eff + fvp + d5[0]
            hdot_true = y[0] * math.sin(y[2])
            _, chi_dot = _tracker_rhs(y[11], y[12], y[1], trk[0],
                                      trk[2], trk[3], trk[4], trk[5])
            root = math.sqrt(1.0 - ratio * ratio)
            gamhat_dot = (chi_dot * y[0] - y[12] * vdot_true) / (y[0] * y[0] * root)
            d_v = vdot_true - (g_v * phi_d + f_v)
            d_h = hdot_true - g_h * gam_hat
            d_gam = gamhat_dot - (g_g * y[3] + f_g)
            d_th = (gtp * y[4] + ftp + d5[3]) - (g_t * y[4] + f_t)
            d_q = (gqp * delta_eff + fqp + d5[4]) - (g_q * delta_ed + f_q)

            log_out[row, 0] = t
            log_out[row, 1] = y[0]
            log_out[row, 2] = y[1]
            log_out[row, 3] = y[2]
            log_out[row, 4] = y[3]
            log_out[row, 5] = y[4]
            log_out[row, 6] = gam_hat
            log_out[row, 7] = alpha_hat
            log_out[row, 8] = e_v
            log_out[row, 9] = e_h
            log_out[row, 10] = rho1
            log_out[row, 11] = rho2
            log_out[row, 12] = phi1
            log_out[row, 13] = phi2
            log_out[row, 14] = phi_d
            log_out[row, 15] = delta_ed
            log_out[row, 16] = phi_eff
            log_out[row, 17] = delta_eff
            log_out[row, 18] = dhat[0]
            log_out[row, 19] = dhat[1]
            log_out[row, 20] = dhat[2]
            log_out[row, 21] = dhat[3]
            log_out[row, 22] = dhat[4]
            log_out[row, 23] = d_v
            log_out[row, 24] = d_h
            log_out[row, 25] = d_gam
            log_out[row, 26] = d_th
            log_out[row, 27] = d_q
            log_out[row, 28] = eps1
            log_out[row, 29] = eps2
            log_out[row, 30] = xi1
            log_out[row, 31] = xi2
            log_out[row, 32] = e_g
            log_out[row, 33] = e_t
            log_out[row, 34] = e_q
            log_out[row, 35] = yf1
            log_out[row, 36] = yf2
            log_out[row, 37] = yf3
            log_out[row, 38] = gam_bar
            log_out[row, 39] = th_bar
            log_out[row, 40] = q_bar
            log_out[row, 41] = y[20]
            log_out[row, 42] = y[21]
            log_out[row, 43] = y[22]
            log_out[row, 44] = y[11]
            log_out[row, 45] = y[12]
            log_out[row, 46] = y[13]
            log_out[row, 47] = y[14]
            log_out[row, 48] = y[15]
            log_out[row, 49] = y[16]
            log_out[row, 50] = y[17]
            log_out[row, 51] = y[18]
            log_out[row, 52] = y[19]
            for ch in range(5):
                s = 0.0
                for i in range(woff[ch], woff[ch + 1]):
                    s += y[i] * y[i]
                log_out[row, 53 + ch] = math.sqrt(s)
            log_out[row, 58] = y[5]
            log_out[row, 59] = y[6]
            log_out[row, 60] = y[7]
            log_out[row, 61] = y[8]
            log_out[row, 62] = y[9]
            log_out[row, 63] = y[10]
            log_out[row, 64] = v_d
            log_out[row, 65] = vd_dot
            log_out[row, 66] = h_d
            log_out[row, 67] = hd_dot
            log_out[row, 68] = y[3] - y[2]
            log_out[row, 69] = sticky_v
            log_out[row, 70] = sticky_h
            row += 1
            sticky_v = 0.0
            sticky_h = 0.0

        if strict_ppc and (viol1 or viol2):
            status = STATUS_BREACH
            break

        if step == n_steps:
            break

        # classical RK4 with held commands
        _sim_rhs(t, y, phi_d, delta_ed, gam_bar, th_bar, q_bar,
                 apc, acc, dist, fault5, lim4, G, trk,
                 centers, qoff, q_arr, n_in, in_idx, var_lo, var_hi, nn_g,
                 alpha1, beta1, woff, tau_l, small_angle, k1, act, d5, meas)
        for i in range(nst):
            ytmp[i] = y[i] + 0.5 * dt * k1[i]
        _sim_rhs(t + 0.5 * dt, ytmp, phi_d, delta_ed, gam_bar, th_bar, q_bar,
                 apc, acc, dist, fault5, lim4, G, trk,
                 centers, qoff, q_arr, n_in, in_idx, var_lo, var_hi, nn_g,
                 alpha1, beta1, woff, tau_l, small_angle, k2, act, d5, meas)
        for i in range(nst):
            ytmp[i] = y[i] + 0.5 * dt * k2[i]
        _sim_rhs(t + 0.5 * dt, ytmp, phi_d, delta_ed, gam_bar, th_bar, q_bar,
                 apc, acc, dist, fault5, lim4, G, trk,
                 centers, qoff, q_arr, n_in, in_idx, var_lo, var_hi, nn_g,
                 alpha1, beta1, woff, tau_l, small_angle, k3, act, d5, meas)
        for i in range(nst):
            ytmp[i] = y[i] + dt * k3[i]
        _sim_rhs(t + dt, ytmp, phi_d, delta_ed, gam_bar, th_bar, q_bar,
                 apc, acc, dist, fault5, lim4, G, trk,
                 centers, qoff, q_arr, n_in, in_idx, var_lo, var_hi, nn_g,
                 alpha1, beta1, woff, tau_l, small_angle, k4, act, d5, meas)
        ok = True
        for i in range(nst):
            step_i = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if not math.isfinite(step_i):
                ok = False
                aux[A_BAD_COMPONENT] = i
                break
            ytmp[i] = step_i
        if not ok:
            status = STATUS_NONFINITE
            break
        for i in range(nst):
            y[i] = ytmp[i]

    return status, row, t

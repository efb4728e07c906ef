"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``.

Signatures and return values match the compiled module. ``servo_advance``
repeats the compiled loop's floating-point operations in the same order, so
the two backends agree bit-for-bit on it; the MLP routines use numpy matrix
products and agree only to rounding.
"""

import math

import numpy as np

STD_RAW = 0
STD_SOFTPLUS = 1
STD_EXP = 2


def compensated_product_sum(a, b, scale):
    """Correctly rounded sum of ``a[i] * b[i] * scale``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("length mismatch")
    return math.fsum((a * b * scale).tolist())


def servo_advance(state, voltage, n_sub, dt, L_a, R_a, J_m, b_m, K_t, N, eta,
                  angle_limit, zero_vel_on_clamp, disc, disc_step, reward_sign):
    a11 = -b_m / J_m
    a12 = K_t / J_m
    a21 = -K_t / L_a
    a22 = -R_a / L_a
    a41 = -b_m / (J_m * N * eta)
    a42 = K_t / (J_m * N * eta)
    b2 = 1.0 / L_a
    w, i, th, thd, target = (float(v) for v in state)
    voltage = float(voltage)
    acc = 0.0
    fabs = math.fabs
    for _ in range(n_sub):
        d_w = a11 * w + a12 * i
        d_i = a21 * w + a22 * i + b2 * voltage
        d_th = thd
        d_thd = a41 * w + a42 * i
        w = w + d_w * dt
        i = i + d_i * dt
        th = th + d_th * dt
        thd = thd + d_thd * dt
        if th > angle_limit:
            th = angle_limit
            if zero_vel_on_clamp:
                thd = 0.0
        elif th < -angle_limit:
            th = -angle_limit
            if zero_vel_on_clamp:
                thd = 0.0
        disc = disc * disc_step
        acc = acc + disc * (reward_sign * fabs(th - target)) * dt
    state[0] = w
    state[1] = i
    state[2] = th
    state[3] = thd
    return acc, disc


def _std_value(s, mode):
    if mode == STD_SOFTPLUS:
        if s > 30.0:  # large s: avoid overflow in exp
            return s + math.log1p(math.exp(-s))
        return math.log1p(math.exp(s))
    if mode == STD_EXP:
        return math.exp(s)
    return s


def _std_deriv(s, mode):
    if mode == STD_SOFTPLUS:
        return 1.0 / (1.0 + math.exp(-s))
    if mode == STD_EXP:
        return math.exp(s)
    return 1.0


def _unpack(params, h1, h2):
    o_b1 = h1 * 3
    o_w2 = o_b1 + h1
    o_b2 = o_w2 + h2 * h1
    o_w3 = o_b2 + h2
    o_b3 = o_w3 + h2
    W1 = params[:o_b1].reshape(h1, 3)
    b1 = params[o_b1:o_w2]
    W2 = params[o_w2:o_b2].reshape(h2, h1)
    b2 = params[o_b2:o_w3]
    w3 = params[o_w3:o_b3]
    return W1, b1, W2, b2, w3, params[o_b3]


def _forward(params, h1, h2, x):
    W1, b1, W2, b2, w3, b3 = _unpack(params, h1, h2)
    a1 = np.tanh(W1 @ x + b1)
    a2 = np.tanh(W2 @ a1 + b2)
    return float(w3 @ a2 + b3), a1, a2


def policy_forward(params, h1, h2, x, std_mode):
    params = np.asarray(params, dtype=float)
    mean, _, _ = _forward(params, h1, h2, np.asarray(x, dtype=float))
    return mean, _std_value(float(params[-1]), std_mode)


def grad_log_pi(params, h1, h2, x, action, std_mode):
    params = np.asarray(params, dtype=float)
    x = np.asarray(x, dtype=float)
    W1, b1, W2, b2, w3, b3 = _unpack(params, h1, h2)
    mean, a1, a2 = _forward(params, h1, h2, x)
    s = float(params[-1])
    std = _std_value(s, std_mode)
    diff = action - mean
    var = std * std
    dmean = diff / var
    dstd = (diff * diff - var) / (var * std)

    d2 = dmean * w3 * (1.0 - a2 * a2)
    d1 = (W2.T @ d2) * (1.0 - a1 * a1)
    return np.concatenate([
        np.outer(d1, x).ravel(),
        d1,
        np.outer(d2, a1).ravel(),
        d2,
        dmean * a2,
        [dmean],
        [dstd * _std_deriv(s, std_mode)],
    ])


def trace_step(params, z, h1, h2, x, action, std_mode, scale, decay, work):
    g = grad_log_pi(params, h1, h2, x, action, std_mode)
    z += g
    params += scale * z
    z *= decay
    return bool(np.all(np.isfinite(params)))

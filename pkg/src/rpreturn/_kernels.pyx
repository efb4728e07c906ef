# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Every function here has a line-for-line counterpart in ``_pykernels``; the
servo loop performs the same floating-point operations in the same order so
both backends replay bit-identically.
"""

import numpy as np

from libc.math cimport exp, fabs, isfinite, log1p, tanh

cdef enum:
    MODE_RAW = 0
    MODE_SOFTPLUS = 1
    MODE_EXP = 2

STD_RAW = MODE_RAW
STD_SOFTPLUS = MODE_SOFTPLUS
STD_EXP = MODE_EXP


def compensated_product_sum(const double[::1] a, const double[::1] b, double scale):
    """Kahan-compensated sum of ``a[i] * b[i] * scale``."""
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double total = 0.0, comp = 0.0, term, y, t
    if b.shape[0] != n:
        raise ValueError("length mismatch")
    for i in range(n):
        term = a[i] * b[i] * scale
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def servo_advance(double[::1] state, double voltage, Py_ssize_t n_sub, double dt,
                  double L_a, double R_a, double J_m, double b_m, double K_t,
                  double N, double eta, double angle_limit, bint zero_vel_on_clamp,
                  double disc, double disc_step, double reward_sign):
    """Run ``n_sub`` explicit Euler substeps under a held voltage.

    ``state`` is (omega_m, i_a, theta, theta_dot, theta_target) and is updated
    in place. Returns ``(integral_increment, discount_after)`` where the
    increment accumulates ``discount * reward * dt`` at each substep's end.
    """
    cdef double a11 = -b_m / J_m
    cdef double a12 = K_t / J_m
    cdef double a21 = -K_t / L_a
    cdef double a22 = -R_a / L_a
    cdef double a41 = -b_m / (J_m * N * eta)
    cdef double a42 = K_t / (J_m * N * eta)
    cdef double b2 = 1.0 / L_a
    cdef double w = state[0], i = state[1], th = state[2], thd = state[3]
    cdef double target = state[4]
    cdef double d_w, d_i, d_th, d_thd
    cdef double acc = 0.0
    cdef Py_ssize_t k
    for k in range(n_sub):
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


cdef inline double _std_value(double s, int mode) nogil:
    if mode == MODE_SOFTPLUS:
        if s > 30.0:  # large s: avoid overflow in exp
            return s + log1p(exp(-s))
        return log1p(exp(s))
    if mode == MODE_EXP:
        return exp(s)
    return s


cdef inline double _std_deriv(double s, int mode) nogil:
    if mode == MODE_SOFTPLUS:
        return 1.0 / (1.0 + exp(-s))
    if mode == MODE_EXP:
        return exp(s)
    return 1.0


cdef double _forward(const double[::1] p, Py_ssize_t h1, Py_ssize_t h2,
                     const double[::1] x, double[::1] a1, double[::1] a2):
    cdef Py_ssize_t j, k
    cdef Py_ssize_t o_b1 = h1 * 3
    cdef Py_ssize_t o_w2 = o_b1 + h1
    cdef Py_ssize_t o_b2 = o_w2 + h2 * h1
    cdef Py_ssize_t o_w3 = o_b2 + h2
    cdef Py_ssize_t o_b3 = o_w3 + h2
    cdef double acc
    for j in range(h1):
        acc = p[o_b1 + j]
        for k in range(3):
            acc = acc + p[j * 3 + k] * x[k]
        a1[j] = tanh(acc)
    for j in range(h2):
        acc = p[o_b2 + j]
        for k in range(h1):
            acc = acc + p[o_w2 + j * h1 + k] * a1[k]
        a2[j] = tanh(acc)
    acc = p[o_b3]
    for j in range(h2):
        acc = acc + p[o_w3 + j] * a2[j]
    return acc


def policy_forward(const double[::1] params, Py_ssize_t h1, Py_ssize_t h2,
                   const double[::1] x, int std_mode):
    """Return ``(mean, std)`` of the Gaussian policy at normalized input ``x``."""
    cdef double[::1] a1 = np.empty(h1)
    cdef double[::1] a2 = np.empty(h2)
    cdef double mean = _forward(params, h1, h2, x, a1, a2)
    return mean, _std_value(params[params.shape[0] - 1], std_mode)


cdef void _score(const double[::1] p, Py_ssize_t h1, Py_ssize_t h2,
                 const double[::1] x, double action, int std_mode,
                 double[::1] g, double[::1] a1, double[::1] a2, double[::1] d2):
    cdef Py_ssize_t j, k
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t o_b1 = h1 * 3
    cdef Py_ssize_t o_w2 = o_b1 + h1
    cdef Py_ssize_t o_b2 = o_w2 + h2 * h1
    cdef Py_ssize_t o_w3 = o_b2 + h2
    cdef Py_ssize_t o_b3 = o_w3 + h2
    cdef double mean = _forward(p, h1, h2, x, a1, a2)
    cdef double s = p[n - 1]
    cdef double std = _std_value(s, std_mode)
    cdef double diff = action - mean
    cdef double var = std * std
    cdef double dmean = diff / var
    cdef double dstd = (diff * diff - var) / (var * std)
    cdef double back
    g[n - 1] = dstd * _std_deriv(s, std_mode)
    g[o_b3] = dmean
    for j in range(h2):
        g[o_w3 + j] = dmean * a2[j]
        d2[j] = dmean * p[o_w3 + j] * (1.0 - a2[j] * a2[j])
        g[o_b2 + j] = d2[j]
        for k in range(h1):
            g[o_w2 + j * h1 + k] = d2[j] * a1[k]
    for k in range(h1):
        back = 0.0
        for j in range(h2):
            back = back + p[o_w2 + j * h1 + k] * d2[j]
        back = back * (1.0 - a1[k] * a1[k])
        g[o_b1 + k] = back
        for j in range(3):
            g[k * 3 + j] = back * x[j]


def grad_log_pi(const double[::1] params, Py_ssize_t h1, Py_ssize_t h2,
                const double[::1] x, double action, int std_mode):
    """Gradient of log N(action; mean(x), std^2) w.r.t. the flat parameters."""
    g = np.empty(params.shape[0])
    _score(params, h1, h2, x, action, std_mode, g, np.empty(h1), np.empty(h2),
           np.empty(h2))
    return g


def trace_step(double[::1] params, double[::1] z, Py_ssize_t h1, Py_ssize_t h2,
               const double[::1] x, double action, int std_mode,
               double scale, double decay, double[::1] work):
    """Fused online update: z += score; params += scale * z; z *= decay.

    ``work`` is caller-owned scratch of length ``len(params) + h1 + 2 * h2``.
    Returns False if any parameter became non-finite.
    """
    cdef Py_ssize_t j, n = params.shape[0]
    cdef bint ok = True
    cdef double[::1] g = work[:n]
    _score(params, h1, h2, x, action, std_mode, g, work[n:n + h1],
           work[n + h1:n + h1 + h2], work[n + h1 + h2:n + h1 + 2 * h2])
    for j in range(n):
        z[j] = z[j] + g[j]
        params[j] = params[j] + scale * z[j]
        z[j] = z[j] * decay
        if not isfinite(params[j]):
            ok = False
    return ok

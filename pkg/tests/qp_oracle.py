"""Independent brute-force QP solver for the SVM dual, used as a test oracle.

Accelerated projected gradient (FISTA) on
    maximize  sum(a) - 1/2 a' Q a   s.t.  0 <= a <= C,  y'a = 0,
with the exact Euclidean projection onto the box-hyperplane intersection
solved in closed form over the breakpoints of the piecewise-linear
multiplier equation.  Shares no code with the SMO implementation under
test.
"""

import numpy as np


def project_box_hyperplane(v, y, C):
    """argmin ||a - v|| s.t. 0 <= a <= C, y'a = 0.

    The KKT solution is a = clip(v - mu*y, 0, C) where mu solves
    g(mu) = y' clip(v - mu*y, 0, C) = 0; g is non-increasing and piecewise
    linear, so mu is found exactly from the sorted breakpoints.
    """
    v = np.asarray(v, dtype=float)
    y = np.asarray(y, dtype=float)

    def g(mu):
        return y @ np.clip(v - mu * y, 0.0, C)

    breaks = np.unique(np.concatenate([(v - 0.0) / y, (v - C) / y]))
    values = np.array([g(mu) for mu in breaks])
    if values[0] <= 0.0:  # crossing at or before the first breakpoint
        mu_star = breaks[0]
    elif values[-1] >= 0.0:
        mu_star = breaks[-1]
    else:
        hi = int(np.searchsorted(-values, 0.0, side="left"))
        lo = hi - 1
        g_lo, g_hi = values[lo], values[hi]
        if g_lo == g_hi:
            mu_star = breaks[lo]
        else:
            mu_star = breaks[lo] + g_lo * (breaks[hi] - breaks[lo]) / (g_lo - g_hi)
    return np.clip(v - mu_star * y, 0.0, C)


def solve_dual(kernel, y, C, n_iter=10000):
    """Optimal dual variables alpha for the soft-margin SVM."""
    kernel = np.asarray(kernel, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    q = kernel * np.outer(y, y)
    lipschitz = max(float(np.linalg.eigvalsh(q).max()), 1e-12)
    step = 1.0 / lipschitz

    alpha = project_box_hyperplane(np.zeros(n), y, C)
    momentum = alpha.copy()
    t_prev = 1.0
    for _ in range(n_iter):
        grad = np.ones(n) - q @ momentum  # gradient of the maximized objective
        nxt = project_box_hyperplane(momentum + step * grad, y, C)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_prev ** 2))
        momentum = nxt + ((t_prev - 1.0) / t_next) * (nxt - alpha)
        alpha, t_prev = nxt, t_next
    # final plain projection step, dropping any momentum overshoot
    grad = np.ones(n) - q @ alpha
    return project_box_hyperplane(alpha + step * grad, y, C)


def objective(kernel, y, alpha):
    y = np.asarray(y, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ np.asarray(kernel) @ ay)

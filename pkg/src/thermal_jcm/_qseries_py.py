"""Pure numpy implementation of the Q-series block kernel."""
import numpy as np

SMALL_X = 1e-8


def _sin2_over_x(x, kt):
    # x: (N+1,), kt: (nt, 1)
    out = np.empty((kt.shape[0], x.shape[0]))
    big = x >= SMALL_X
    xb = x[big]
    out[:, big] = np.sin(np.sqrt(xb) * kt) ** 2 / xb
    if not big.all():
        xs = x[~big]
        ks = kt * kt
        y2 = xs * ks
        out[:, ~big] = ks * (1.0 - y2 / 3.0 + 2.0 * y2 * y2 / 45.0)
    return out


def q_block(t, weights, c, kappa, l_max):
    """Return Q[kind, l, i] for kind 0 (g1 series) and 1 (g2 series), l = 0..l_max.

    Q[0, l] = sum_n w_n g1(n + c + l)
    Q[1, l] = sum_n w_n sin^2(sqrt(n+c+1+l)|k|t) (n+1+l) / (n+c+1+l)
    """
    t = np.ascontiguousarray(t, dtype=np.float64)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    n = np.arange(w.shape[0], dtype=np.float64)
    kt = (abs(kappa) * t)[:, None]
    out = np.empty((2, l_max + 1, t.shape[0]))
    for m in range(l_max + 2):
        x = n + c + m
        s = _sin2_over_x(x, kt)
        if m <= l_max:
            cos2 = np.cos(np.sqrt(x) * kt) ** 2
            out[0, m] = (cos2 + c * s) @ w
        if m >= 1:
            out[1, m - 1] = (s * (n + m)) @ w
    return out

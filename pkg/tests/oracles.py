"""Independent reference implementations used to check the library.

Everything here is deliberately written the slow, literal way and shares
no code with the production paths it validates.
"""

from __future__ import annotations

import numpy as np


def direct_value_field_loop(reward: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Literal cross-correlation: V[t] = sum_o K[o] * R[t + o], zero padded.

    Pure Python loops; use only on small grids.
    """
    n0, n1 = reward.shape
    k0, k1 = kernel.shape
    c0, c1 = (k0 - 1) // 2, (k1 - 1) // 2
    out = np.zeros_like(reward, dtype=float)
    for t0 in range(n0):
        for t1 in range(n1):
            acc = 0.0
            for i in range(k0):
                for j in range(k1):
                    s0, s1 = t0 + i - c0, t1 + j - c1
                    if 0 <= s0 < n0 and 0 <= s1 < n1:
                        acc += kernel[i, j] * reward[s0, s1]
            out[t0, t1] = acc
    return out


def direct_value_field(reward: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Direct summation over kernel offsets via a zero-padded window view.

    Same literal sum as the loop version (validated against it), fast
    enough for full-size grids. No FFT involved.
    """
    n0, n1 = reward.shape
    k0, k1 = kernel.shape
    c0, c1 = (k0 - 1) // 2, (k1 - 1) // 2
    padded = np.zeros((n0 + k0 - 1, n1 + k1 - 1))
    padded[c0 : c0 + n0, c1 : c1 + n1] = reward
    windows = np.lib.stride_tricks.sliding_window_view(padded, (k0, k1))
    return np.einsum("xyij,ij->xy", windows, kernel)


def eq_mixture_likelihood(v_flat, lam, f_flat) -> float:
    """Literal softmax-mixture likelihood evaluated term by term:

        (sum_t e^(lam*V(t)) * f(t)) / (sum_t e^(lam*V(t)))

    Plain float64 arithmetic, no stabilization; callers must keep lam*V
    within exp range.
    """
    num = 0.0
    den = 0.0
    for v, f in zip(v_flat, f_flat):
        w = np.exp(lam * v)
        num += w * f
        den += w
    return num / den


def gauss_pdf_2d(point, mean, cov) -> float:
    """Dense bivariate normal density, direct matrix formula."""
    d = np.asarray(point, dtype=float) - np.asarray(mean, dtype=float)
    inv = np.linalg.inv(cov)
    return float(
        np.exp(-0.5 * d @ inv @ d) / (2.0 * np.pi * np.sqrt(np.linalg.det(cov)))
    )


def kl_quadrature(mean_p, cov_p, mean_q, cov_q, nodes: int = 700, span: float = 8.0) -> float:
    """Trapezoid quadrature of the KL integrand p * ln(p/q) over a box
    covering mean_p +- span * max std of P."""
    mean_p = np.asarray(mean_p, dtype=float)
    s = np.sqrt(np.diag(cov_p)).max()
    x = np.linspace(mean_p[0] - span * s, mean_p[0] + span * s, nodes)
    y = np.linspace(mean_p[1] - span * s, mean_p[1] + span * s, nodes)
    dx, dy = x[1] - x[0], y[1] - y[0]
    gx, gy = np.meshgrid(x, y, indexing="ij")

    def log_density(m, c):
        inv = np.linalg.inv(c)
        ux, uy = gx - m[0], gy - m[1]
        q = inv[0, 0] * ux * ux + 2 * inv[0, 1] * ux * uy + inv[1, 1] * uy * uy
        return -0.5 * q - np.log(2 * np.pi * np.sqrt(np.linalg.det(c)))

    lp = log_density(mean_p, cov_p)
    lq = log_density(np.asarray(mean_q, dtype=float), cov_q)
    p = np.exp(lp)
    integrand = p * (lp - lq)
    w = np.ones(nodes)
    w[0] = w[-1] = 0.5
    return float((integrand * np.outer(w, w)).sum() * dx * dy)


def rect_prob_rho0(cov, aim, bounds) -> float:
    """Analytic probability of aim + N(0, diag cov) in a rectangle (rho=0)."""
    from scipy.stats import norm

    sx, sy = np.sqrt(cov[0][0]), np.sqrt(cov[1][1])
    x0, x1, y0, y1 = bounds
    px = norm.cdf((x1 - aim[0]) / sx) - norm.cdf((x0 - aim[0]) / sx)
    py = norm.cdf((y1 - aim[1]) / sy) - norm.cdf((y0 - aim[1]) / sy)
    return float(px * py)


def sector_reward_oracle(state, point) -> float:
    """Region-rule reward lookup written independently of the library:
    angle via atan2 into 18-degree wedges (first boundary 9 degrees from
    vertical), radius compared against the band edges with outer-region
    boundary ownership."""
    g = state.geometry
    x, y = float(point[0]), float(point[1])
    r = (x * x + y * y) ** 0.5
    if r >= g.double_outer:
        return 0.0
    if r < g.bull_radius:
        return float(state.bull_values[0])
    if r < g.outer_bull_radius:
        return float(state.bull_values[1])
    angle = np.degrees(np.arctan2(x, y))
    if angle < 0:
        angle += 360.0
    sector = int(((angle + 9.0) % 360.0) // 18.0)
    base = float(state.sector_values[sector])
    if g.treble_inner <= r < g.treble_outer:
        return 3.0 * base
    if g.double_inner <= r < g.double_outer:
        return 2.0 * base
    return base

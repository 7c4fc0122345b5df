"""Softmax-mixture observation likelihood.

The probability of seeing executed action x from an agent with noise
parameters sigma and rationality lam is the softmax-weighted mixture of
the noise density centered on every candidate target:

    P(x | sigma, lam) = sum_t softmax(lam * V)(t) * f_sigma(x - t)

All computations run in log space with max-subtraction so that large
lam * V products and tiny densities never overflow or underflow.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidObservationError


def log_softmax_mixture(v_flat: np.ndarray, lam: float, log_f_flat: np.ndarray) -> float:
    """Exact log P(x | sigma, lam) from a value vector and log densities."""
    a = lam * np.asarray(v_flat, dtype=np.float64)
    b = a + np.asarray(log_f_flat, dtype=np.float64)
    ma = a.max()
    mb = b.max()
    if not np.isfinite(mb):
        raise InvalidObservationError("observation produced non-finite log-likelihood")
    num = mb + np.log(np.exp(b - mb).sum())
    den = ma + np.log(np.exp(a - ma).sum())
    return float(num - den)


def log_softmax_mixture_batch(
    v: np.ndarray, lam: np.ndarray, log_f: np.ndarray
) -> np.ndarray:
    """Batched log-likelihoods: v, log_f of shape (B, n_cells), lam (B,).

    Uses a fused two-pass evaluation (softmax numerator and denominator
    share one exponentiation of lam * v); rows whose mixture underflows in
    the fused form fall back to the exact pairwise log-sum-exp.
    """
    lv = lam[:, None] * v
    m = lv.max(axis=1, keepdims=True)
    e = np.exp(lv - m)
    mf = log_f.max(axis=1, keepdims=True)
    f = np.exp(log_f - mf)
    num = np.einsum("ij,ij->i", e, f)
    den = e.sum(axis=1)
    out = np.empty(len(lv), dtype=np.float64)
    ok = num > 0
    with np.errstate(divide="ignore"):
        out[ok] = (np.log(num[ok]) - np.log(den[ok])) + mf[ok, 0]
    for i in np.nonzero(~ok)[0]:
        out[i] = log_softmax_mixture(v[i].astype(np.float64), float(lam[i]), log_f[i].astype(np.float64))
    if not np.all(np.isfinite(out)):
        raise InvalidObservationError("observation produced non-finite log-likelihood")
    return out

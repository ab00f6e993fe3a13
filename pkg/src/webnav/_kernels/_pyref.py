"""NumPy reference implementation of the hot kernels.

Semantics here are authoritative; the compiled extension in ``_core.pyx``
must match these functions (same shapes, same update order). Agent kernels
work in float64; the CBOW kernel updates float32 tables with float64
accumulation, matching the storage layout of the embedding module.
"""

from __future__ import annotations

import numpy as np


def affine_tanh_fwd(W: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.tanh(W @ x + b)


def affine_tanh_bwd(W, x, a, da):
    dz = da * (1.0 - a * a)
    return np.outer(dz, x), dz.copy(), W.T @ dz


def lstm_step_fwd(Wx, Wh, b, x, h_prev, c_prev):
    """One LSTM step; returns (h, c, gates) with gates = [i, f, o, g] post-activation."""
    H = h_prev.shape[0]
    pre = Wx @ x + Wh @ h_prev + b
    gates = np.empty(4 * H)
    gates[: 3 * H] = 1.0 / (1.0 + np.exp(-pre[: 3 * H]))  # i, f, o
    gates[3 * H :] = np.tanh(pre[3 * H :])  # g
    i, f, g = gates[:H], gates[H : 2 * H], gates[3 * H :]
    c = f * c_prev + i * g
    h = gates[2 * H : 3 * H] * np.tanh(c)
    return h, c, gates


def lstm_step_bwd(Wx, Wh, x, h_prev, c_prev, gates, c_new, dh, dc):
    H = h_prev.shape[0]
    i, f, o, g = gates[:H], gates[H : 2 * H], gates[2 * H : 3 * H], gates[3 * H :]
    tc = np.tanh(c_new)
    do = dh * tc
    dc_total = dc + dh * o * (1.0 - tc * tc)
    dpre = np.empty(4 * H)
    dpre[:H] = (dc_total * g) * i * (1.0 - i)
    dpre[H : 2 * H] = (dc_total * c_prev) * f * (1.0 - f)
    dpre[2 * H : 3 * H] = do * o * (1.0 - o)
    dpre[3 * H :] = (dc_total * i) * (1.0 - g * g)
    dWx = np.outer(dpre, x)
    dWh = np.outer(dpre, h_prev)
    dx = Wx.T @ dpre
    dh_prev = Wh.T @ dpre
    dc_prev = dc_total * f
    return dWx, dWh, dpre.copy(), dx, dh_prev, dc_prev


def cbow_epoch(w_in, w_out, centers, ctx_flat, ctx_off, negatives, lr):
    """One pass of negative-sampling CBOW over pre-extracted positions.

    ``negatives`` holds pre-sampled noise word ids, shape (positions, k);
    a noise id equal to the center word is skipped. Updates both tables
    in place (float32 storage, float64 arithmetic).
    """
    dim = w_in.shape[1]
    for p in range(len(centers)):
        ctx = ctx_flat[ctx_off[p] : ctx_off[p + 1]]
        h = np.zeros(dim)
        for c in ctx:
            h += w_in[c]
        h /= len(ctx)
        neu1e = np.zeros(dim)
        center = centers[p]
        for s in range(negatives.shape[1] + 1):
            if s == 0:
                word, label = center, 1.0
            else:
                word = negatives[p, s - 1]
                if word == center:
                    continue
                label = 0.0
            row = w_out[word].astype(np.float64)
            z = min(max(float(row @ h), -30.0), 30.0)
            grad = (label - 1.0 / (1.0 + np.exp(-z))) * lr
            neu1e += grad * row
            w_out[word] = (row + grad * h).astype(np.float32)
        upd = neu1e / len(ctx)
        for c in ctx:
            w_in[c] = (w_in[c].astype(np.float64) + upd).astype(np.float32)

"""Pure-NumPy implementation of the dense network kernels.

Layer convention: weight matrices are (out, in) and act on column inputs,
so a batch X of shape (n, in) flows through X @ W.T + b. Hidden layers are
rectified; the output layer is affine. ``backward_batch`` returns raw sums
over the batch; any averaging is folded into ``d_out`` by the caller.
"""

from __future__ import annotations

import numpy as np


def forward_one(w1, b1, w2, b2, w3, b3, x):
    h1 = w1 @ x + b1
    np.maximum(h1, 0.0, out=h1)
    h2 = w2 @ h1 + b2
    np.maximum(h2, 0.0, out=h2)
    return w3 @ h2 + b3


def forward_batch(w1, b1, w2, b2, w3, b3, xs):
    h1 = xs @ w1.T + b1
    np.maximum(h1, 0.0, out=h1)
    h2 = h1 @ w2.T + b2
    np.maximum(h2, 0.0, out=h2)
    out = h2 @ w3.T + b3
    return out, h1, h2


def backward_batch(w1, w2, w3, xs, h1, h2, d_out):
    dw3 = d_out.T @ h2
    db3 = d_out.sum(axis=0)
    dh2 = d_out @ w3
    dh2 *= h2 > 0.0
    dw2 = dh2.T @ h1
    db2 = dh2.sum(axis=0)
    dh1 = dh2 @ w2
    dh1 *= h1 > 0.0
    dw1 = dh1.T @ xs
    db1 = dh1.sum(axis=0)
    return dw1, db1, dw2, db2, dw3, db3

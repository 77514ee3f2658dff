# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled dense network kernels (the hot path of rollouts and updates).

Mirrors ``_numpy_backend`` exactly: (out, in) weight matrices, rectified
hidden layers, affine output, raw batch sums in the backward pass.
"""

import numpy as np


def forward_one(double[:, ::1] w1, double[::1] b1,
                double[:, ::1] w2, double[::1] b2,
                double[:, ::1] w3, double[::1] b3,
                double[::1] x):
    cdef Py_ssize_t n_in = w1.shape[1]
    cdef Py_ssize_t n1 = w1.shape[0]
    cdef Py_ssize_t n2 = w2.shape[0]
    cdef Py_ssize_t n_out = w3.shape[0]
    cdef Py_ssize_t i, j
    cdef double s

    a1_np = np.empty(n1, dtype=np.float64)
    a2_np = np.empty(n2, dtype=np.float64)
    out_np = np.empty(n_out, dtype=np.float64)
    cdef double[::1] a1 = a1_np
    cdef double[::1] a2 = a2_np
    cdef double[::1] out = out_np

    for i in range(n1):
        s = b1[i]
        for j in range(n_in):
            s += w1[i, j] * x[j]
        a1[i] = s if s > 0.0 else 0.0
    for i in range(n2):
        s = b2[i]
        for j in range(n1):
            s += w2[i, j] * a1[j]
        a2[i] = s if s > 0.0 else 0.0
    for i in range(n_out):
        s = b3[i]
        for j in range(n2):
            s += w3[i, j] * a2[j]
        out[i] = s
    return out_np


def forward_batch(double[:, ::1] w1, double[::1] b1,
                  double[:, ::1] w2, double[::1] b2,
                  double[:, ::1] w3, double[::1] b3,
                  double[:, ::1] xs):
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t n_in = w1.shape[1]
    cdef Py_ssize_t n1 = w1.shape[0]
    cdef Py_ssize_t n2 = w2.shape[0]
    cdef Py_ssize_t n_out = w3.shape[0]
    cdef Py_ssize_t t, i, j
    cdef double s

    h1_np = np.empty((n, n1), dtype=np.float64)
    h2_np = np.empty((n, n2), dtype=np.float64)
    out_np = np.empty((n, n_out), dtype=np.float64)
    cdef double[:, ::1] h1 = h1_np
    cdef double[:, ::1] h2 = h2_np
    cdef double[:, ::1] out = out_np

    for t in range(n):
        for i in range(n1):
            s = b1[i]
            for j in range(n_in):
                s += w1[i, j] * xs[t, j]
            h1[t, i] = s if s > 0.0 else 0.0
        for i in range(n2):
            s = b2[i]
            for j in range(n1):
                s += w2[i, j] * h1[t, j]
            h2[t, i] = s if s > 0.0 else 0.0
        for i in range(n_out):
            s = b3[i]
            for j in range(n2):
                s += w3[i, j] * h2[t, j]
            out[t, i] = s
    return out_np, h1_np, h2_np


def backward_batch(double[:, ::1] w1, double[:, ::1] w2, double[:, ::1] w3,
                   double[:, ::1] xs, double[:, ::1] h1, double[:, ::1] h2,
                   double[:, ::1] d_out):
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t n_in = w1.shape[1]
    cdef Py_ssize_t n1 = w1.shape[0]
    cdef Py_ssize_t n2 = w2.shape[0]
    cdef Py_ssize_t n_out = w3.shape[0]
    cdef Py_ssize_t t, i, j
    cdef double g

    dw1_np = np.zeros((n1, n_in), dtype=np.float64)
    db1_np = np.zeros(n1, dtype=np.float64)
    dw2_np = np.zeros((n2, n1), dtype=np.float64)
    db2_np = np.zeros(n2, dtype=np.float64)
    dw3_np = np.zeros((n_out, n2), dtype=np.float64)
    db3_np = np.zeros(n_out, dtype=np.float64)
    cdef double[:, ::1] dw1 = dw1_np
    cdef double[::1] db1 = db1_np
    cdef double[:, ::1] dw2 = dw2_np
    cdef double[::1] db2 = db2_np
    cdef double[:, ::1] dw3 = dw3_np
    cdef double[::1] db3 = db3_np

    dh1_np = np.empty(n1, dtype=np.float64)
    dh2_np = np.empty(n2, dtype=np.float64)
    cdef double[::1] dh1 = dh1_np
    cdef double[::1] dh2 = dh2_np

    for t in range(n):
        for i in range(n_out):
            g = d_out[t, i]
            db3[i] += g
            for j in range(n2):
                dw3[i, j] += g * h2[t, j]
        for j in range(n2):
            g = 0.0
            if h2[t, j] > 0.0:
                for i in range(n_out):
                    g += w3[i, j] * d_out[t, i]
            dh2[j] = g
        for i in range(n2):
            g = dh2[i]
            if g != 0.0:
                db2[i] += g
                for j in range(n1):
                    dw2[i, j] += g * h1[t, j]
        for j in range(n1):
            g = 0.0
            if h1[t, j] > 0.0:
                for i in range(n2):
                    g += w2[i, j] * dh2[i]
            dh1[j] = g
        for i in range(n1):
            g = dh1[i]
            if g != 0.0:
                db1[i] += g
                for j in range(n_in):
                    dw1[i, j] += g * xs[t, j]
    return dw1_np, db1_np, dw2_np, db2_np, dw3_np, db3_np

"""Actor/critic networks: two rectified hidden layers, manual backprop, Adam.

Parameters live in plain float64 arrays so the same training code drives
either the compiled kernel or the NumPy fallback (see
:mod:`culturesim.backend`). The gradient flow is hand-derived and the test
suite checks it against central finite differences, which is the keystone
correctness check for everything downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from culturesim.backend import ops

DEFAULT_HIDDEN = (64, 64)
HIDDEN_GAIN = float(np.sqrt(2.0))


class DivergenceError(RuntimeError):
    """Training produced non-finite numbers."""


def orthogonal_matrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Sample a (rows, cols) matrix with orthonormal columns (rows >= cols)
    or orthonormal rows (rows < cols), via QR of a Gaussian draw."""
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    tall = rows >= cols
    a = rng.standard_normal((rows, cols) if tall else (cols, rows))
    q, r = np.linalg.qr(a)
    # Sign-fix the QR factor so the distribution does not depend on the
    # LAPACK sign convention.
    d = np.sign(np.diag(r))
    d[d == 0.0] = 1.0
    q = q * d
    return np.ascontiguousarray(q if tall else q.T)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Stable softmax over the last axis; rejects non-finite logits because
    they mean the policy diverged."""
    logits = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(logits)):
        raise DivergenceError("non-finite logits in softmax")
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class Gradients:
    """Loss gradients, shape-congruent with the owning network."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    def arrays(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2, self.w3, self.b3]

    def global_norm(self) -> float:
        return float(np.sqrt(sum(float(np.sum(a * a)) for a in self.arrays())))


def clip_global_norm(grads: Gradients, max_norm: float) -> Gradients:
    """Scale all gradients down (in place) so the global L2 norm is at most
    ``max_norm``; a below-threshold gradient passes through unchanged."""
    if max_norm <= 0.0:
        raise ValueError("max_norm must be positive")
    norm = grads.global_norm()
    if norm > max_norm:
        scale = max_norm / norm
        for a in grads.arrays():
            a *= scale
    return grads


def _adam_step_array(param, grad, m, v, t, lr, beta1, beta2, eps):
    """One bias-corrected Adam update on a single parameter array, in place."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)


class Mlp:
    """Feed-forward net ``in -> hidden[0] -> hidden[1] -> out`` with ReLU
    hidden activations, carrying its own Adam moments."""

    def __init__(self, w1, b1, w2, b2, w3, b3):
        self.w1 = np.ascontiguousarray(w1, dtype=np.float64)
        self.b1 = np.ascontiguousarray(b1, dtype=np.float64)
        self.w2 = np.ascontiguousarray(w2, dtype=np.float64)
        self.b2 = np.ascontiguousarray(b2, dtype=np.float64)
        self.w3 = np.ascontiguousarray(w3, dtype=np.float64)
        self.b3 = np.ascontiguousarray(b3, dtype=np.float64)
        self._check_shapes()
        self._m = [np.zeros_like(a) for a in self.param_arrays()]
        self._v = [np.zeros_like(a) for a in self.param_arrays()]
        self.step_count = 0

    def _check_shapes(self):
        if self.w1.ndim != 2 or self.w2.ndim != 2 or self.w3.ndim != 2:
            raise ValueError("weight matrices must be 2-D")
        if (
            self.b1.shape != (self.w1.shape[0],)
            or self.w2.shape[1] != self.w1.shape[0]
            or self.b2.shape != (self.w2.shape[0],)
            or self.w3.shape[1] != self.w2.shape[0]
            or self.b3.shape != (self.w3.shape[0],)
        ):
            raise ValueError("inconsistent layer shapes")

    @property
    def n_in(self) -> int:
        return self.w1.shape[1]

    @property
    def n_out(self) -> int:
        return self.w3.shape[0]

    @property
    def hidden(self) -> tuple[int, int]:
        return (self.w1.shape[0], self.w2.shape[0])

    def param_arrays(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2, self.w3, self.b3]

    @classmethod
    def init_orthogonal(
        cls,
        n_in: int,
        n_out: int,
        rng: np.random.Generator,
        hidden: tuple[int, int] = DEFAULT_HIDDEN,
        hidden_gain: float = HIDDEN_GAIN,
        out_gain: float = 1.0,
    ) -> "Mlp":
        """Orthogonally initialized network with zero biases.

        Hidden layers use the rectifier gain sqrt(2); the output gain is the
        caller's choice (a small one keeps an initial policy near uniform).
        """
        h1, h2 = hidden
        w1 = hidden_gain * orthogonal_matrix(rng, h1, n_in)
        w2 = hidden_gain * orthogonal_matrix(rng, h2, h1)
        w3 = out_gain * orthogonal_matrix(rng, n_out, h2)
        return cls(w1, np.zeros(h1), w2, np.zeros(h2), w3, np.zeros(n_out))

    @classmethod
    def zeros(
        cls, n_in: int, n_out: int, hidden: tuple[int, int] = DEFAULT_HIDDEN
    ) -> "Mlp":
        """All-zero network; as a policy it plays uniformly at random."""
        h1, h2 = hidden
        return cls(
            np.zeros((h1, n_in)),
            np.zeros(h1),
            np.zeros((h2, h1)),
            np.zeros(h2),
            np.zeros((n_out, h2)),
            np.zeros(n_out),
        )

    def forward_one(self, x: np.ndarray) -> np.ndarray:
        """Cache-free forward pass for a single observation (hot path)."""
        return ops.forward_one(self.w1, self.b1, self.w2, self.b2, self.w3, self.b3, x)

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, tuple]:
        """Forward pass returning the output and the activation cache needed
        by :meth:`backward`."""
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape != (self.n_in,):
            raise ValueError(f"expected input of shape ({self.n_in},), got {x.shape}")
        out, h1, h2 = ops.forward_batch(
            self.w1, self.b1, self.w2, self.b2, self.w3, self.b3, x[None, :]
        )
        return out[0], (x, h1[0], h2[0])

    def forward_batch(self, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Batched forward pass; returns (outputs, h1, h2) with hidden
        activations kept for the backward pass."""
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        if xs.ndim != 2 or xs.shape[1] != self.n_in:
            raise ValueError(f"expected inputs of shape (n, {self.n_in}), got {xs.shape}")
        return ops.forward_batch(self.w1, self.b1, self.w2, self.b2, self.w3, self.b3, xs)

    def backward(self, cache: tuple, d_out: np.ndarray) -> Gradients:
        """Gradients of a scalar loss whose output-gradient is ``d_out``,
        for the single forward call that produced ``cache``."""
        x, h1, h2 = cache
        d_out = np.ascontiguousarray(d_out, dtype=np.float64)
        if d_out.shape != (self.n_out,):
            raise ValueError(f"expected d_out of shape ({self.n_out},), got {d_out.shape}")
        return self.backward_batch(x[None, :], h1[None, :], h2[None, :], d_out[None, :])

    def backward_batch(self, xs, h1, h2, d_out) -> Gradients:
        """Batched backprop. Returns raw sums over the batch; fold any
        averaging into ``d_out``."""
        n = xs.shape[0]
        if h1.shape != (n, self.hidden[0]) or h2.shape != (n, self.hidden[1]):
            raise ValueError("activation cache does not match this network")
        if d_out.shape != (n, self.n_out):
            raise ValueError(f"expected d_out of shape ({n}, {self.n_out})")
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        d_out = np.ascontiguousarray(d_out, dtype=np.float64)
        parts = ops.backward_batch(self.w1, self.w2, self.w3, xs, h1, h2, d_out)
        return Gradients(*parts)

    def adam_step(
        self,
        grads: Gradients,
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> None:
        """Apply one Adam update with bias correction."""
        self.step_count += 1
        for param, grad, m, v in zip(
            self.param_arrays(), grads.arrays(), self._m, self._v
        ):
            if param.shape != grad.shape:
                raise ValueError("gradient shapes do not match parameters")
            _adam_step_array(param, grad, m, v, self.step_count, lr, beta1, beta2, eps)

    def save(self, path) -> None:
        """Debug snapshot: layer sizes on the first line, then one parameter
        per line in fixed order (w1 rows, b1, w2 rows, b2, w3 rows, b3)."""
        h1, h2 = self.hidden
        with open(path, "w") as fh:
            fh.write(f"{self.n_in} {h1} {h2} {self.n_out}\n")
            for arr in self.param_arrays():
                for value in arr.ravel():
                    fh.write(repr(float(value)) + "\n")

    @classmethod
    def load(cls, path) -> "Mlp":
        with open(path) as fh:
            sizes = [int(tok) for tok in fh.readline().split()]
            if len(sizes) != 4:
                raise ValueError(f"{path}: malformed snapshot header")
            n_in, h1, h2, n_out = sizes
            shapes = [(h1, n_in), (h1,), (h2, h1), (h2,), (n_out, h2), (n_out,)]
            arrays = []
            for shape in shapes:
                count = int(np.prod(shape))
                values = [float(fh.readline()) for _ in range(count)]
                arrays.append(np.array(values).reshape(shape))
        return cls(*arrays)

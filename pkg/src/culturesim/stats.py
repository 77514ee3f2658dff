"""Ordinary least squares with inference, plus descriptive sweep summaries.

The fit is solved through a QR decomposition rather than the raw normal
equations; standard errors come from the unbiased residual variance and the
diagonal of (X'X)^-1. Two-sided p-values use the normal approximation to
the t distribution, which is accurate to well under display precision at
the sample sizes the sweep produces (hundreds of observations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_CONDITION = 1e12


class SingularDesignError(ValueError):
    """Design matrix is singular or numerically unusable."""


@dataclass(frozen=True)
class Design:
    """Regression inputs: matrix columns are intercept, yield, spoilage in
    the standard construction, and the response is mean culture per agent."""

    matrix: np.ndarray  # (n, k)
    response: np.ndarray  # (n,)
    column_names: tuple[str, ...]

    def __post_init__(self):
        x = np.asarray(self.matrix, dtype=np.float64)
        y = np.asarray(self.response, dtype=np.float64)
        object.__setattr__(self, "matrix", x)
        object.__setattr__(self, "response", y)
        if x.ndim != 2:
            raise ValueError("design matrix must be 2-D")
        n, k = x.shape
        if y.shape != (n,):
            raise ValueError("response length does not match design rows")
        if n <= k:
            raise ValueError(f"need more observations than regressors (n={n}, k={k})")
        if len(self.column_names) != k:
            raise ValueError("need one name per design column")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("design contains non-finite entries")


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    r_squared: float
    residual_variance: float
    column_names: tuple[str, ...]
    n_observations: int


def design_from_results(results) -> Design:
    """Standard sweep regression: mean culture on intercept, yield, spoilage."""
    if not results:
        raise ValueError("no results to build a design from")
    n = len(results)
    x = np.empty((n, 3))
    y = np.empty(n)
    for i, row in enumerate(results):
        x[i, 0] = 1.0
        x[i, 1] = row.y
        x[i, 2] = row.p
        y[i] = row.mean_c
    return Design(x, y, ("const", "Y", "p"))


def normal_sf(z: float) -> float:
    """Upper-tail probability of the standard normal, via erfc."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def ols_fit(design: Design) -> OlsFit:
    """Least-squares fit with standard errors, t statistics and two-sided
    p-values. Raises :class:`SingularDesignError` naming the offending
    column when the design is numerically singular."""
    x, y = design.matrix, design.response
    n, k = x.shape
    q, r = np.linalg.qr(x)
    diag = np.abs(np.diag(r))
    col_scale = np.sqrt(np.sum(x * x, axis=0))
    col_scale[col_scale == 0.0] = 1.0
    if np.any(diag == 0.0) or np.linalg.cond(x) > MAX_CONDITION:
        worst = int(np.argmin(diag / col_scale))
        raise SingularDesignError(
            f"design is singular or ill-conditioned; offending column "
            f"{design.column_names[worst]!r}"
        )
    beta = np.linalg.solve(r, q.T @ y)
    residuals = y - x @ beta
    rss = float(residuals @ residuals)
    sigma2 = rss / (n - k)
    r_inv = np.linalg.inv(r)
    xtx_inv = r_inv @ r_inv.T
    se = np.sqrt(sigma2 * np.diag(xtx_inv))
    t = np.empty(k)
    for j in range(k):
        if se[j] > 0.0:
            t[j] = beta[j] / se[j]
        elif beta[j] == 0.0:
            t[j] = 0.0
        else:
            # exact fit: infinite t, p-value 0
            t[j] = math.copysign(math.inf, beta[j])
    p = np.array([2.0 * normal_sf(abs(tj)) for tj in t])
    y_centered = y - y.mean()
    tss = float(y_centered @ y_centered)
    r2 = 1.0 - rss / tss if tss > 0.0 else 0.0
    r2 = min(max(r2, 0.0), 1.0)
    return OlsFit(
        coefficients=beta,
        standard_errors=se,
        t_stats=t,
        p_values=p,
        r_squared=r2,
        residual_variance=sigma2,
        column_names=design.column_names,
        n_observations=n,
    )


def pearson(x, y) -> tuple[float, bool]:
    """Pearson correlation; returns (0, True) when either side has zero
    variance, flagging the degenerate case instead of dividing by zero."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(np.sqrt(xc @ xc))
    sy = float(np.sqrt(yc @ yc))
    if sx == 0.0 or sy == 0.0:
        return 0.0, True
    return float((xc @ yc) / (sx * sy)), False


@dataclass(frozen=True)
class SweepSummary:
    n_agents: int
    mean_yield: float
    mean_spoilage: float
    mean_culture: float
    corr_spoilage_culture: float
    corr_yield_culture: float
    degenerate_culture: bool
    culture_hist_counts: tuple[int, ...]
    culture_hist_edges: tuple[float, ...]


def summarize(results, hist_bins: int = 20) -> SweepSummary:
    """Descriptive summary of sweep rows: means, the two correlations the
    scatter figures display, and a histogram of mean culture."""
    if not results:
        raise ValueError("cannot summarize an empty result list")
    ys = np.array([row.y for row in results])
    ps = np.array([row.p for row in results])
    cs = np.array([row.mean_c for row in results])
    corr_pc, degenerate_p = pearson(ps, cs)
    corr_yc, degenerate_y = pearson(ys, cs)
    counts, edges = np.histogram(cs, bins=hist_bins)
    return SweepSummary(
        n_agents=len(results),
        mean_yield=float(ys.mean()),
        mean_spoilage=float(ps.mean()),
        mean_culture=float(cs.mean()),
        corr_spoilage_culture=corr_pc,
        corr_yield_culture=corr_yc,
        degenerate_culture=degenerate_p or degenerate_y,
        culture_hist_counts=tuple(int(c) for c in counts),
        culture_hist_edges=tuple(float(e) for e in edges),
    )

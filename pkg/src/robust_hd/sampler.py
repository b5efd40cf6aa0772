"""Gaussian reference draws, multiplier bootstrap and max-statistic quantiles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
from scipy import optimize, special

from .covariance import RobustCovariance
from .errors import ArgumentError, NumericError

__all__ = [
    "CriticalValue",
    "GaussianSpec",
    "bootstrap_critical_value",
    "bootstrap_max_norms",
    "empirical_quantile",
    "gaussian_draw",
    "max_norm_cdf_diagonal",
    "max_quantile_diagonal",
    "max_quantile_monte_carlo",
    "multiplier_bootstrap_draw",
    "stream",
]

Method = Literal["closed_form_diagonal", "monte_carlo", "bootstrap"]

# Rows of multiplier draws generated per matmul.
_CHUNK = 256


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``.

    Streams with different keys are statistically independent, and the
    same key always reproduces the same stream. Parallel workers key on
    the replication index, so results do not depend on scheduling.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class CriticalValue:
    alpha: float
    value: float
    method: Method
    draws: int = 0
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "value": self.value,
            "method": self.method,
            "draws": self.draws,
            "degenerate": self.degenerate,
        }


class GaussianSpec:
    """Centered normal law on R^d, from a full covariance or its diagonal.

    The lower-triangular factor is computed lazily. Diagonal specs never
    factorize.
    """

    def __init__(self, covariance):
        c = np.asarray(covariance, dtype=np.float64)
        if c.ndim == 0:
            c = c[None]
        if c.ndim == 1:
            if np.any(c < 0) or not np.all(np.isfinite(c)):
                raise ArgumentError("diagonal variances must be finite and >= 0")
        elif c.ndim == 2:
            if c.shape[0] != c.shape[1]:
                raise ArgumentError(f"covariance must be square, got {c.shape}")
            tr = float(np.trace(c))
            if not np.allclose(c, c.T, rtol=0.0, atol=1e-8 * max(abs(tr), 1e-300)):
                raise ArgumentError("covariance is not symmetric")
        else:
            raise ArgumentError("covariance must be a vector or a square matrix")
        self.covariance = c

    @property
    def dim(self) -> int:
        return self.covariance.shape[0]

    @property
    def is_diagonal(self) -> bool:
        return self.covariance.ndim == 1

    @cached_property
    def factor(self) -> np.ndarray:
        if self.is_diagonal:
            return np.diag(np.sqrt(self.covariance))
        c = self.covariance
        tr = float(np.trace(c))
        if tr == 0.0:
            if np.any(c != 0):
                raise NumericError("zero-trace covariance with nonzero entries")
            return np.zeros_like(c)
        if tr < 0:
            raise NumericError("covariance has negative trace")
        try:
            return np.linalg.cholesky(c)
        except np.linalg.LinAlgError:
            pass
        jitter = 1e-10 * tr / self.dim
        try:
            return np.linalg.cholesky(c + jitter * np.eye(self.dim))
        except np.linalg.LinAlgError as exc:
            raise NumericError(
                "covariance is not positive semi-definite within tolerance"
            ) from exc

    def draw(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        k = 1 if size is None else int(size)
        z = rng.standard_normal((k, self.dim))
        if self.is_diagonal:
            out = z * np.sqrt(self.covariance)
        else:
            out = z @ self.factor.T
        return out[0] if size is None else out


def gaussian_draw(spec: GaussianSpec, rng: np.random.Generator) -> np.ndarray:
    """One draw from ``spec``."""
    return spec.draw(rng)


def _as_residuals(v) -> np.ndarray:
    a = np.asarray(v, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise ArgumentError(f"expected an (n, d) residual matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ArgumentError("residual matrix contains non-finite entries")
    return a


def multiplier_bootstrap_draw(
    V, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """``n^{-1/2} sum_i xi_i V_i`` with i.i.d. standard normal ``xi``.

    Conditionally on ``V`` the draw is ``N_d(0, V.T V / n)``. Pass ``size``
    to get a ``(size, d)`` block of independent draws.
    """
    v = _as_residuals(V)
    k = 1 if size is None else int(size)
    xi = rng.standard_normal((k, v.shape[0]))
    out = (xi @ v) / math.sqrt(v.shape[0])
    return out[0] if size is None else out


def _quantile_index(alpha: float, count: int) -> int:
    # 1-based index ceil((1 - alpha) * count), guarded against 95.00000000001.
    return min(count, max(1, math.ceil((1.0 - alpha) * count - 1e-9)))


def empirical_quantile(values, alpha: float) -> float:
    """Order statistic ``ceil((1-alpha) B)`` of ``values``.

    This is the empirical version of ``inf{t : P(T <= t) >= 1 - alpha}``.
    """
    a = np.asarray(values, dtype=np.float64).ravel()
    k = _quantile_index(alpha, a.size)
    return float(np.partition(a, k - 1)[k - 1])


def bootstrap_max_norms(V, B: int, rng: np.random.Generator) -> np.ndarray:
    """Sup-norms of ``B`` multiplier bootstrap draws, formed in chunks."""
    v = _as_residuals(V)
    n = v.shape[0]
    out = np.empty(B)
    scale = 1.0 / math.sqrt(n)
    for start in range(0, B, _CHUNK):
        k = min(_CHUNK, B - start)
        xi = rng.standard_normal((k, n))
        block = xi @ v
        out[start : start + k] = np.max(np.abs(block), axis=1) * scale
    return out


def bootstrap_critical_value(
    cov: RobustCovariance,
    alpha: float,
    B: int,
    rng: np.random.Generator,
    *,
    return_norms: bool = False,
):
    """Empirical ``1 - alpha`` quantile of ``||Z~||_inf`` over ``B`` draws.

    Draws go through the residual matrix when the estimate has one.
    Otherwise a Cholesky factor of ``cov.matrix`` is used. A zero covariance
    returns 0 and sets the ``degenerate`` flag.
    """
    if not 0.0 < alpha < 1.0:
        raise ArgumentError(f"alpha must lie in (0, 1), got {alpha!r}")
    if int(B) != B or B < 100:
        raise ArgumentError(f"B must be an integer >= 100, got {B!r}")
    B = int(B)
    if cov.residuals is not None:
        degenerate = not np.any(cov.residuals)
        norms = np.zeros(B) if degenerate else bootstrap_max_norms(cov.residuals, B, rng)
    else:
        degenerate = not np.any(cov.matrix)
        if degenerate:
            norms = np.zeros(B)
        else:
            spec = GaussianSpec(cov.matrix)
            norms = np.empty(B)
            for start in range(0, B, _CHUNK):
                k = min(_CHUNK, B - start)
                norms[start : start + k] = np.max(np.abs(spec.draw(rng, k)), axis=1)
    cv = CriticalValue(
        alpha=alpha,
        value=0.0 if degenerate else empirical_quantile(norms, alpha),
        method="bootstrap",
        draws=B,
        degenerate=degenerate,
    )
    return (cv, norms) if return_norms else cv


def _log_coord_cdf(t: float, sd: np.ndarray) -> float:
    # log P(|N(0, sd^2)| <= t) = log(1 - erfc(t / (sd sqrt 2))), summed.
    return float(np.sum(np.log1p(-special.erfc(t / (sd * math.sqrt(2.0))))))


def max_norm_cdf_diagonal(t, sigma2, d: int | None = None) -> np.ndarray:
    """``P(||Z||_inf <= t)`` for ``Z ~ N(0, diag(sigma2))``.

    ``sigma2`` is a scalar (then ``d`` is required) or a per-coordinate
    vector. The result is vectorized over ``t``.
    """
    t = np.asarray(t, dtype=np.float64)
    s2 = np.asarray(sigma2, dtype=np.float64)
    out = np.zeros(t.shape)
    pos = t > 0
    if s2.ndim == 0:
        if d is None:
            raise ArgumentError("d is required for a scalar variance")
        if s2 == 0:
            return np.where(t >= 0, 1.0, 0.0)
        p = special.erf(t[pos] / math.sqrt(2.0 * s2))
        out[pos] = np.exp(d * np.log(p))
        return out
    sd = np.sqrt(s2)
    if np.any(sd == 0):
        sd = sd[sd > 0]
        if sd.size == 0:
            return np.where(t >= 0, 1.0, 0.0)
    p = special.erf(t[pos][:, None] / (sd[None, :] * math.sqrt(2.0)))
    out[pos] = np.exp(np.sum(np.log(p), axis=1))
    return out


def max_quantile_diagonal(sigma2, d: int, alpha: float) -> CriticalValue:
    """Exact ``c_{1-alpha}`` of ``||Z||_inf`` for independent coordinates.

    With a common variance the closed form is
    ``sigma * Phi^{-1}((1 + (1-alpha)^{1/d}) / 2)``. It is evaluated through
    the upper-tail mass for accuracy when d is large. With unequal
    variances, ``prod_j (2 Phi(t/sigma_j) - 1) = 1 - alpha`` is solved by
    bracketed root finding.
    """
    if not 0.0 < alpha < 1.0:
        raise ArgumentError(f"alpha must lie in (0, 1), got {alpha!r}")
    if int(d) != d or d < 1:
        raise ArgumentError(f"d must be a positive integer, got {d!r}")
    s2 = np.asarray(sigma2, dtype=np.float64)
    if np.any(s2 <= 0) or not np.all(np.isfinite(s2)):
        raise ArgumentError("variances must be finite and > 0")
    if s2.ndim == 0 or np.all(s2 == s2.flat[0]):
        sigma = math.sqrt(float(s2.flat[0]))
        dd = d if s2.ndim == 0 else s2.size
        tail = -math.expm1(math.log1p(-alpha) / dd) / 2.0
        value = -sigma * float(special.ndtri(tail))
        return CriticalValue(alpha, value, "closed_form_diagonal")
    sd = np.sqrt(s2.ravel())
    target = math.log1p(-alpha)
    f = lambda t: _log_coord_cdf(t, sd) - target  # noqa: E731
    hi = float(sd.max()) * (2.0 * math.sqrt(2.0 * math.log(2.0 * sd.size / alpha)) + 1.0)
    while f(hi) < 0:
        hi *= 2.0
    lo = float(sd.min()) * 1e-6
    while f(lo) > 0:
        lo /= 2.0
    value = optimize.brentq(f, lo, hi, xtol=1e-12, rtol=1e-14, maxiter=500)
    return CriticalValue(alpha, float(value), "closed_form_diagonal")


def max_quantile_monte_carlo(
    spec: GaussianSpec, alpha: float, draws: int, rng: np.random.Generator
) -> tuple[CriticalValue, float]:
    """Monte Carlo ``c_{1-alpha}`` for a general Gaussian law.

    Returns the critical value and a standard error. The error is read off
    as half the gap between the order statistics one binomial standard
    deviation either side of the quantile index.
    """
    norms = np.empty(int(draws))
    for start in range(0, draws, _CHUNK * 16):
        k = min(_CHUNK * 16, draws - start)
        norms[start : start + k] = np.max(np.abs(spec.draw(rng, k)), axis=1)
    norms.sort()
    k = _quantile_index(alpha, norms.size)
    value = float(norms[k - 1])
    h = max(1, int(math.sqrt(norms.size * alpha * (1 - alpha))))
    se = 0.5 * (norms[min(norms.size - 1, k - 1 + h)] - norms[max(0, k - 1 - h)])
    return CriticalValue(alpha, value, "monte_carlo", draws=int(draws)), float(se)

"""Quantile-based winsorized and trimmed means of high-dimensional samples.

Every statistic works column by column on an ``(n, d)`` sample, with one row
per observation. The winsorization points of coordinate ``j`` are order
statistics of column ``j``, taken at the indices of an
:class:`EpsilonSchedule`.

Internally the sample is handled as a C-contiguous ``(d, n)`` array. Each
coordinate is then a contiguous row: ``np.partition`` selects the order
statistics in expected O(n), and ``np.sum`` uses pairwise summation, which
keeps per-coordinate sums accurate to a few ulps.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ArgumentError, DegenerateScaleError, PreconditionError

Mode = Literal["mean", "covariance"]
StatisticKind = Literal[
    "winsorized", "trimmed", "normalized_winsorized", "location", "sample_mean"
]

__all__ = [
    "EpsilonSchedule",
    "MeanStatistic",
    "as_sample",
    "centered_sample_mean",
    "clamp",
    "epsilon_schedule",
    "kth_order_statistic",
    "normalized_winsorized_mean",
    "schedule_from_epsilon",
    "trimmed_mean",
    "winsorization_bounds",
    "winsorized_and_trimmed",
    "winsorized_location",
    "winsorized_mean",
]


@dataclass(frozen=True)
class EpsilonSchedule:
    """Winsorization level and the order-statistic indices it induces.

    ``lower_index`` is ceil(eps*n) and ``upper_index`` is ceil((1-eps)*n),
    both 1-based, evaluated in exact rational arithmetic on the double
    ``eps`` so that no rounding of ``eps*n`` or ``1 - eps`` can move them.
    ``valid`` is False whenever eps lies outside (0, 1/2). Estimators
    refuse such schedules instead of silently proceeding.
    """

    n: int
    d: int
    epsilon: float
    lower_index: int
    upper_index: int
    valid: bool
    mode: Mode = "mean"
    eta_bar: float = 0.0
    lambda1: float | None = None
    lambda2: float | None = None

    @property
    def window_size(self) -> int:
        """Number of order statistics kept by the trimmed mean."""
        return self.upper_index - self.lower_index + 1

    def log_term(self) -> float:
        """log(dn)/n in mean mode, log(d^2 n)/n in covariance mode."""
        arg = self.d * self.n if self.mode == "mean" else self.d * self.d * self.n
        return math.log(arg) / self.n

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "mode": self.mode,
            "eta_bar": self.eta_bar,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "epsilon": self.epsilon,
            "lower_index": self.lower_index,
            "upper_index": self.upper_index,
            "valid": self.valid,
        }


@dataclass(frozen=True)
class MeanStatistic:
    """A d-vector statistic together with its kind and centering vector."""

    values: np.ndarray
    kind: StatisticKind
    centered_at: np.ndarray = field(repr=False)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def _order_indices(n: int, epsilon: float) -> tuple[int, int]:
    # Exact rational arithmetic on the double: a rounded product eps*n can
    # land on an integer the exact value misses, shifting an index by one.
    e = Fraction(epsilon)
    return math.ceil(e * n), math.ceil((1 - e) * n)


def epsilon_schedule(
    n: int,
    d: int,
    eta_bar: float = 0.0,
    lambda1: float = 1.05,
    lambda2: float = 0.1,
    mode: Mode = "mean",
) -> EpsilonSchedule:
    """Build ``eps = lambda1*eta_bar + lambda2*log(arg)/n``.

    ``arg`` is ``d*n`` in mean mode and ``d**2 * n`` in covariance mode. In
    covariance mode ``lambda1`` and ``lambda2`` play the role of the primed
    tuning constants.

    Raises
    ------
    ArgumentError
        If any parameter lies outside its domain. An epsilon outside
        (0, 1/2) is not an error; the returned schedule is marked
        ``valid=False``.
    """
    if int(n) != n or n <= 3:
        raise ArgumentError(f"n must be an integer > 3, got {n!r}")
    if int(d) != d or d < 1:
        raise ArgumentError(f"d must be an integer >= 1, got {d!r}")
    if not (0.0 <= eta_bar < 0.5):
        raise ArgumentError(f"eta_bar must lie in [0, 1/2), got {eta_bar!r}")
    if not lambda1 > 1.0:
        raise ArgumentError(f"lambda1 must exceed 1, got {lambda1!r}")
    if not lambda2 > 0.0:
        raise ArgumentError(f"lambda2 must be positive, got {lambda2!r}")
    if mode not in ("mean", "covariance"):
        raise ArgumentError(f"unknown mode {mode!r}")
    n, d = int(n), int(d)
    arg = d * n if mode == "mean" else d * d * n
    eps = lambda1 * eta_bar + lambda2 * math.log(arg) / n
    lo, hi = _order_indices(n, eps)
    return EpsilonSchedule(
        n=n,
        d=d,
        epsilon=eps,
        lower_index=lo,
        upper_index=hi,
        valid=0.0 < eps < 0.5,
        mode=mode,
        eta_bar=eta_bar,
        lambda1=lambda1,
        lambda2=lambda2,
    )


def schedule_from_epsilon(
    n: int, epsilon: float, d: int = 1, mode: Mode = "mean"
) -> EpsilonSchedule:
    """Schedule for an explicitly chosen epsilon (no tuning constants)."""
    if int(n) != n or n < 1:
        raise ArgumentError(f"n must be a positive integer, got {n!r}")
    if not math.isfinite(epsilon) or epsilon < 0:
        raise ArgumentError(f"epsilon must be finite and >= 0, got {epsilon!r}")
    lo, hi = _order_indices(int(n), epsilon)
    return EpsilonSchedule(
        n=int(n),
        d=int(d),
        epsilon=float(epsilon),
        lower_index=lo,
        upper_index=hi,
        valid=0.0 < epsilon < 0.5,
        mode=mode,
    )


def as_sample(data) -> np.ndarray:
    """Validate ``data`` as an ``(n, d)`` float matrix with finite entries.

    A 1-D input is read as a single coordinate (d = 1).
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ArgumentError(f"expected an (n, d) sample, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ArgumentError("sample contains NaN or infinite entries")
    return x


def _columns(x: np.ndarray) -> np.ndarray:
    # No copy when x is already Fortran-ordered (e.g. a transposed draw).
    return np.ascontiguousarray(x.T)


def _center(mu, d: int) -> np.ndarray:
    m = np.asarray(mu, dtype=np.float64)
    if m.ndim > 1 or m.size not in (1, d):
        raise ArgumentError(f"mu must be a scalar or a {d}-vector, got shape {m.shape}")
    m = np.broadcast_to(m.ravel(), (d,)).copy()
    if not np.all(np.isfinite(m)):
        raise ArgumentError("centering vector mu must be finite")
    return m


def _require_valid(sched: EpsilonSchedule, n: int) -> None:
    if not sched.valid:
        raise PreconditionError(
            f"epsilon={sched.epsilon:.6g} lies outside (0, 1/2); "
            "the schedule is not implementable"
        )
    if sched.n != n:
        raise PreconditionError(f"schedule built for n={sched.n}, data has n={n}")
    if not 1 <= sched.lower_index <= sched.upper_index <= n:
        raise PreconditionError(
            f"order indices ({sched.lower_index}, {sched.upper_index}) "
            f"out of range for n={n}"
        )


def kth_order_statistic(v, k: int) -> float:
    """Return the k-th smallest entry of ``v`` (1-based; ties kept)."""
    a = np.asarray(v, dtype=np.float64).ravel()
    if a.size == 0:
        raise ArgumentError("empty vector")
    if int(k) != k or not 1 <= k <= a.size:
        raise IndexError(f"k={k!r} out of range [1, {a.size}]")
    k = int(k)
    return float(np.partition(a, k - 1)[k - 1])


def clamp(x, a: float, b: float):
    """Clamp ``x`` into ``[a, b]``; works for scalars and arrays."""
    if a > b:
        raise ArgumentError(f"clamp requires a <= b, got a={a!r}, b={b!r}")
    if np.ndim(x) == 0:
        return min(max(float(x), a), b)
    return np.clip(x, a, b)


def _partitioned(cols: np.ndarray, lo: int, hi: int) -> np.ndarray:
    kth = [lo - 1] if lo == hi else [lo - 1, hi - 1]
    return np.partition(cols, kth, axis=1)


def winsorization_bounds(data, sched: EpsilonSchedule) -> tuple[np.ndarray, np.ndarray]:
    """Per-coordinate order statistics at ``sched``'s lower and upper index."""
    x = as_sample(data)
    _require_valid(sched, x.shape[0])
    part = _partitioned(_columns(x), sched.lower_index, sched.upper_index)
    return part[:, sched.lower_index - 1].copy(), part[:, sched.upper_index - 1].copy()


def _winsorized_columns(cols: np.ndarray, sched: EpsilonSchedule) -> np.ndarray:
    part = _partitioned(cols, sched.lower_index, sched.upper_index)
    lo = part[:, sched.lower_index - 1 : sched.lower_index]
    hi = part[:, sched.upper_index - 1 : sched.upper_index]
    return np.clip(cols, lo, hi)


def winsorized_mean(data, mu, sched: EpsilonSchedule) -> MeanStatistic:
    """Centered winsorized mean ``n^{-1/2} sum_i (clamp(X_ij) - mu_j)``.

    Coordinate ``j`` is clamped to its own order statistics at
    ``sched.lower_index`` and ``sched.upper_index``.
    """
    x = as_sample(data)
    n, d = x.shape
    _require_valid(sched, n)
    m = _center(mu, d)
    w = _winsorized_columns(_columns(x), sched)
    values = np.sum(w - m[:, None], axis=1) / math.sqrt(n)
    return MeanStatistic(values, "winsorized", m)


def trimmed_mean(data, mu, sched: EpsilonSchedule) -> MeanStatistic:
    """Centered trimmed mean over the order statistics lower..upper index.

    Coordinate ``j`` gets ``sqrt(n)/|I| * sum_{i in I} (X*_ij - mu_j)``, where
    ``I = {lower_index, ..., upper_index}``.
    """
    x = as_sample(data)
    n, d = x.shape
    _require_valid(sched, n)
    if sched.window_size < 1:
        raise PreconditionError("empty trim window")
    m = _center(mu, d)
    part = _partitioned(_columns(x), sched.lower_index, sched.upper_index)
    kept = part[:, sched.lower_index - 1 : sched.upper_index]
    values = math.sqrt(n) * np.sum(kept - m[:, None], axis=1) / sched.window_size
    return MeanStatistic(values, "trimmed", m)


def winsorized_and_trimmed(
    data, mu, sched: EpsilonSchedule
) -> tuple[MeanStatistic, MeanStatistic]:
    """Winsorized and trimmed means from a single partition pass.

    This is the fast path used by the simulation harness. The results equal
    those of :func:`winsorized_mean` and :func:`trimmed_mean`.
    """
    x = as_sample(data)
    n, d = x.shape
    _require_valid(sched, n)
    m = _center(mu, d)
    cols = _columns(x)
    part = _partitioned(cols, sched.lower_index, sched.upper_index)
    lo, hi = sched.lower_index - 1, sched.upper_index - 1
    w = np.clip(cols, part[:, lo : lo + 1], part[:, hi : hi + 1])
    rn = math.sqrt(n)
    wins = np.sum(w - m[:, None], axis=1) / rn
    trim = rn * np.sum(part[:, lo : hi + 1] - m[:, None], axis=1) / sched.window_size
    return MeanStatistic(wins, "winsorized", m), MeanStatistic(trim, "trimmed", m)


def winsorized_location(data, sched_cov: EpsilonSchedule) -> MeanStatistic:
    """Unscaled winsorized sample means (the centering used by the
    winsorized covariance estimator)."""
    x = as_sample(data)
    n, d = x.shape
    _require_valid(sched_cov, n)
    w = _winsorized_columns(_columns(x), sched_cov)
    return MeanStatistic(np.sum(w, axis=1) / n, "location", np.zeros(d))


def normalized_winsorized_mean(
    data, mu, sched: EpsilonSchedule, sigma_tilde
) -> MeanStatistic:
    """Winsorized mean divided coordinatewise by ``sigma_tilde``.

    Raises
    ------
    DegenerateScaleError
        If some entry of ``sigma_tilde`` is not strictly positive. The
        quotient is then undefined, and no floor is substituted.
    """
    s = np.asarray(sigma_tilde, dtype=np.float64)
    base = winsorized_mean(data, mu, sched)
    s = np.broadcast_to(s, base.values.shape)
    if not np.all(s > 0):
        bad = np.flatnonzero(~(s > 0))
        raise DegenerateScaleError(
            f"scale estimate is not positive in coordinates {bad[:10].tolist()}"
        )
    return MeanStatistic(base.values / s, "normalized_winsorized", base.centered_at)


def centered_sample_mean(data, mu) -> MeanStatistic:
    """The classical ``n^{-1/2} sum_i (X_i - mu)``."""
    x = as_sample(data)
    n, d = x.shape
    m = _center(mu, d)
    values = np.sum(_columns(x) - m[:, None], axis=1) / math.sqrt(n)
    return MeanStatistic(values, "sample_mean", m)

"""Winsorized covariance estimator and its correlation form."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ArgumentError, DegenerateScaleError
from .estimators import (
    EpsilonSchedule,
    _columns,
    _require_valid,
    _winsorized_columns,
    as_sample,
)

__all__ = [
    "FeasibilityReport",
    "RobustCovariance",
    "correlation_normalize",
    "feasibility_condition",
    "winsorized_covariance",
    "winsorized_residuals",
]


class RobustCovariance:
    """A symmetric PSD covariance estimate.

    It is held either as an explicit ``matrix`` or as the ``(n, d)``
    centered residual matrix ``V`` with ``matrix = V.T @ V / n``. When the
    residuals are present the d x d matrix is computed only on first
    access. The bootstrap draws straight from ``V`` and never needs it,
    which is what keeps d = 5,000 affordable.
    """

    def __init__(
        self,
        matrix: np.ndarray | None = None,
        *,
        residuals: np.ndarray | None = None,
        schedule: EpsilonSchedule | None = None,
    ):
        if matrix is None and residuals is None:
            raise ArgumentError("need a matrix or a residual matrix")
        if matrix is not None:
            m = np.asarray(matrix, dtype=np.float64)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ArgumentError(f"covariance must be square, got {m.shape}")
            if not np.array_equal(m, m.T):
                raise ArgumentError("covariance matrix must be exactly symmetric")
            self.__dict__["matrix"] = m
        if residuals is not None:
            residuals = np.asarray(residuals, dtype=np.float64)
            if residuals.ndim != 2:
                raise ArgumentError("residual matrix must be 2-D")
        self.residuals = residuals
        self.schedule = schedule
        # Set for correlation forms: the diagonal is 1 by construction.
        self.unit_diagonal = False

    @property
    def dim(self) -> int:
        if self.residuals is not None:
            return self.residuals.shape[1]
        return self.matrix.shape[0]

    @cached_property
    def matrix(self) -> np.ndarray:
        v = self.residuals
        g = (v.T @ v) / v.shape[0]
        g = np.triu(g) + np.triu(g, 1).T
        if self.unit_diagonal:
            np.fill_diagonal(g, 1.0)
        return g

    @cached_property
    def diag_sd(self) -> np.ndarray:
        if self.unit_diagonal:
            return np.ones(self.dim)
        if self.residuals is not None and "matrix" not in self.__dict__:
            var = np.einsum("ij,ij->j", self.residuals, self.residuals) / self.residuals.shape[0]
        else:
            var = np.diag(self.matrix).copy()
        return np.sqrt(var)

    def __repr__(self) -> str:
        src = "residuals" if self.residuals is not None else "matrix"
        return f"RobustCovariance(dim={self.dim}, from={src})"


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of a sufficient condition of the form ``lhs < threshold``."""

    lhs_value: float
    satisfied: bool
    components: tuple[float, ...]
    threshold: float = 1.0
    simplified_lhs: float | None = None
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "lhs_value": self.lhs_value,
            "threshold": self.threshold,
            "satisfied": self.satisfied,
            "components": list(self.components),
        }
        if self.simplified_lhs is not None:
            out["simplified_lhs"] = self.simplified_lhs
        out.update(self.notes)
        return out


def winsorized_residuals(data, sched_cov: EpsilonSchedule) -> np.ndarray:
    """The ``(n, d)`` matrix ``V`` of winsorized columns minus their means."""
    x = as_sample(data)
    _require_valid(sched_cov, x.shape[0])
    w = _winsorized_columns(_columns(x), sched_cov)
    w -= (np.sum(w, axis=1) / x.shape[0])[:, None]
    return w.T


def winsorized_covariance(data, sched_cov: EpsilonSchedule) -> RobustCovariance:
    """Gram-matrix estimate ``V.T @ V / n`` from winsorized, centered columns.

    The columns are clamped to their ``sched_cov`` order statistics and
    centered at the winsorized location. The full matrix is materialized
    only if ``.matrix`` is read.
    """
    return RobustCovariance(
        residuals=winsorized_residuals(data, sched_cov), schedule=sched_cov
    )


def correlation_normalize(cov: RobustCovariance) -> RobustCovariance:
    """Rescale to unit diagonal: ``D^{-1} cov D^{-1}`` with ``D = diag(sd)``.

    Raises
    ------
    DegenerateScaleError
        If any diagonal entry is zero. The correlation form is then undefined.
    """
    sd = cov.diag_sd
    if not np.all(sd > 0):
        bad = np.flatnonzero(~(sd > 0))
        raise DegenerateScaleError(
            f"zero variance estimate in coordinates {bad[:10].tolist()}"
        )
    if cov.residuals is not None and "matrix" not in cov.__dict__:
        out = RobustCovariance(residuals=cov.residuals / sd, schedule=cov.schedule)
        out.unit_diagonal = True
        return out
    corr = cov.matrix / np.outer(sd, sd)
    corr = np.triu(corr) + np.triu(corr, 1).T
    np.fill_diagonal(corr, 1.0)
    out = RobustCovariance(corr, schedule=cov.schedule)
    out.unit_diagonal = True
    if cov.residuals is not None:
        out.residuals = cov.residuals / sd
    return out


def feasibility_condition(
    n: int,
    d: int,
    eps_prime: float,
    *,
    lambda2_prime: float | None = None,
    mode: str = "covariance",
) -> FeasibilityReport:
    """Evaluate ``2e + L + sqrt(L^2 + 4 L e) < threshold``.

    In covariance mode ``L = log(d^2 n)/n`` and the threshold is 1. In mean
    mode ``L = log(dn)/n`` and the threshold is 1/2, which is the stricter
    variant used to control the mean-mode constants. If ``lambda2_prime`` is
    given, the contamination-free simplification
    ``(2*lambda2 + 1 + sqrt(1 + 4*lambda2)) * L`` is reported as well.
    """
    if int(n) != n or n <= 3:
        raise ArgumentError(f"n must be an integer > 3, got {n!r}")
    if int(d) != d or d < 1:
        raise ArgumentError(f"d must be an integer >= 1, got {d!r}")
    if not 0.0 < eps_prime < 1.0:
        raise ArgumentError(f"epsilon must lie in (0, 1), got {eps_prime!r}")
    if mode == "covariance":
        log_term, threshold = math.log(d * d * n) / n, 1.0
    elif mode == "mean":
        log_term, threshold = math.log(d * n) / n, 0.5
    else:
        raise ArgumentError(f"unknown mode {mode!r}")
    parts = (
        2.0 * eps_prime,
        log_term,
        math.sqrt(log_term * log_term + 4.0 * log_term * eps_prime),
    )
    lhs = math.fsum(parts)
    simplified = None
    if lambda2_prime is not None:
        simplified = (
            2.0 * lambda2_prime + 1.0 + math.sqrt(1.0 + 4.0 * lambda2_prime)
        ) * log_term
    return FeasibilityReport(
        lhs_value=lhs,
        satisfied=lhs < threshold,
        components=parts,
        threshold=threshold,
        simplified_lhs=simplified,
    )

"""Adversaries that corrupt at most floor(eta_bar * n) rows of a sample.

This module ships four concrete strategies. Use :func:`register_adversary`
to plug in others. Every strategy receives the clean sample and may
inspect it before choosing replacement values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import ArgumentError
from .estimators import as_sample

__all__ = [
    "ADVERSARIES",
    "AdversarySpec",
    "apply_adversary",
    "register_adversary",
]

Sign = Literal["+", "-", "both"]


@dataclass(frozen=True)
class AdversarySpec:
    kind: str = "none"
    eta_bar: float = 0.0
    magnitude: float = 1e6
    target_sign: Sign = "both"

    def __post_init__(self):
        if not 0.0 <= self.eta_bar < 0.5:
            raise ArgumentError(f"eta_bar must lie in [0, 1/2), got {self.eta_bar!r}")
        if not math.isfinite(self.magnitude):
            raise ArgumentError(f"magnitude must be finite, got {self.magnitude!r}")
        if self.target_sign not in ("+", "-", "both"):
            raise ArgumentError(f"target_sign must be '+', '-' or 'both'")
        if self.kind not in ADVERSARIES:
            raise ArgumentError(
                f"unknown adversary {self.kind!r}; registered: {sorted(ADVERSARIES)}"
            )

    def budget(self, n: int) -> int:
        return math.floor(self.eta_bar * n)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "eta_bar": self.eta_bar,
            "magnitude": self.magnitude,
            "target_sign": self.target_sign,
        }


# (clean data, rows to corrupt, spec, rng) -> replacement values for those rows
Strategy = Callable[[np.ndarray, np.ndarray, AdversarySpec, np.random.Generator], np.ndarray]


def _signs(shape, target: Sign, rng: np.random.Generator) -> np.ndarray:
    # "both" draws each sign independently; a fixed alternating pattern
    # would cancel exactly in the sample mean whenever the budget is even.
    if target == "+":
        return np.ones(shape)
    if target == "-":
        return -np.ones(shape)
    return rng.choice(np.array([-1.0, 1.0]), size=shape)


def _fixed_outlier(x, rows, spec, rng):
    return spec.magnitude * _signs((rows.size, x.shape[1]), spec.target_sign, rng)


def _location_shift(x, rows, spec, rng):
    signs = _signs(rows.size, spec.target_sign, rng)
    return x[rows] + (signs * spec.magnitude)[:, None]


def _adaptive_max_coordinate(x, rows, spec, rng):
    # Each coordinate gets the sign whose replacement moves its winsorized
    # mean furthest, i.e. toward the winsorization point farther from the
    # row's current value.
    n = x.shape[0]
    k = rows.size
    lo_idx, hi_idx = min(k, n - 1), max(n - 1 - k, 0)
    part = np.partition(x, sorted({lo_idx, hi_idx}), axis=0)
    alpha, beta = part[lo_idx], part[hi_idx]
    current = x[rows]
    up = (beta - current) >= (current - alpha)
    return np.where(up, spec.magnitude, -spec.magnitude)


ADVERSARIES: dict[str, Strategy | None] = {
    "none": None,
    "fixed_outlier": _fixed_outlier,
    "location_shift": _location_shift,
    "adaptive_max_coordinate": _adaptive_max_coordinate,
}


def register_adversary(name: str, strategy: Strategy) -> None:
    """Make ``strategy`` selectable as ``AdversarySpec(kind=name, ...)``."""
    if name in ADVERSARIES:
        raise ArgumentError(f"adversary {name!r} is already registered")
    ADVERSARIES[name] = strategy


def apply_adversary(
    data, spec: AdversarySpec, rng: np.random.Generator
) -> tuple[np.ndarray, int]:
    """Return the corrupted sample and the number of rows actually changed.

    The ``floor(eta_bar * n)`` target rows are drawn without replacement
    from ``rng``. With no budget (or ``kind="none"``) the input comes back
    untouched.
    """
    x = as_sample(data)
    n = x.shape[0]
    budget = spec.budget(n)
    strategy = ADVERSARIES[spec.kind]
    if strategy is None or budget == 0:
        return x, 0
    rows = np.sort(rng.choice(n, size=budget, replace=False))
    new_rows = np.asarray(strategy(x, rows, spec, rng), dtype=np.float64)
    if new_rows.shape != (budget, x.shape[1]) or not np.all(np.isfinite(new_rows)):
        raise ArgumentError(f"adversary {spec.kind!r} returned invalid rows")
    out = x.copy(order="K")
    out[rows] = new_rows
    changed = int(np.count_nonzero(np.any(out[rows] != x[rows], axis=1)))
    return out, changed

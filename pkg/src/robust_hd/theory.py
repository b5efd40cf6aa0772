"""Lambert W, the winsorization constants c1/c2, and rate diagnostics.

The rate bounds carry an unspecified multiplicative constant ``C``. The
evaluators take it explicitly (default 1). Treat their output as a shape
diagnostic (how a bound moves with n, d, m, eta), never as an error
certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .covariance import FeasibilityReport, feasibility_condition
from .errors import ArgumentError, NumericError

__all__ = [
    "CConstants",
    "RateBound",
    "RATE_KINDS",
    "anticoncentration_bound",
    "c_constant_brackets",
    "c_constants",
    "lambert_w0",
    "lambert_wm1",
    "quantile_mean_envelope",
    "rate_bound",
    "sharp_feasibility",
]

_INV_E = math.exp(-1.0)
_TOL = 4.0 * 2.0**-52


def _halley(w: float, x: float) -> float:
    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0 or f == 0.0:
            return w
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= _TOL * (1.0 + abs(w)):
            break
    return w


def _branch_point_series(x: float, sign: float) -> float:
    # w = -1 + sign*p - p^2/3 + sign*11/72 p^3, with p = sqrt(2(ex + 1)).
    p = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
    return -1.0 + sign * p - p * p / 3.0 + sign * (11.0 / 72.0) * p**3


def lambert_w0(x: float) -> float:
    """Principal branch ``W_0``: the solution ``w >= -1`` of ``w e^w = x``."""
    x = float(x)
    if not math.isfinite(x) or x < -_INV_E * (1.0 + 1e-15):
        raise ArgumentError(f"W0 is defined for x >= -1/e, got {x!r}")
    if x == 0.0:
        return 0.0
    if x <= -_INV_E:
        return -1.0
    if x < -0.25:
        w = _branch_point_series(x, 1.0)
    elif x < 3.0:
        w = math.log1p(x)
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    return _halley(w, x)


def lambert_wm1(x: float) -> float:
    """Lower branch ``W_{-1}``: the solution ``w <= -1`` of ``w e^w = x``,
    for ``x`` in ``[-1/e, 0)``."""
    x = float(x)
    if not math.isfinite(x) or x >= 0.0 or x < -_INV_E * (1.0 + 1e-15):
        raise ArgumentError(f"W_-1 is defined for x in [-1/e, 0), got {x!r}")
    if x <= -_INV_E:
        return -1.0
    if x < -0.25:
        w = _branch_point_series(x, -1.0)
    else:
        l1 = math.log(-x)
        l2 = math.log(-l1)
        w = l1 - l2 + l2 / l1
    return _halley(w, x)


def _u_minus_log_u(s: float, large: bool) -> float:
    """Solve ``u - log(u) = s`` (s >= 1) on the branch u <= 1 or u >= 1.

    This equals ``-W(-e^{-s})`` on the principal (u <= 1) or lower
    (u >= 1) branch. The form stays accurate when ``e^{-s}`` underflows.
    """
    if large:
        u = s + math.log(s)
        for _ in range(64):
            step = (u - math.log(u) - s) / (1.0 - 1.0 / u)
            u -= step
            if abs(step) <= _TOL * u:
                break
        return u
    # Fixed point u = exp(u - s) contracts at rate u, and u is small here.
    u = math.exp(-s)
    for _ in range(200):
        nxt = math.exp(u - s)
        if abs(nxt - u) <= _TOL * nxt:
            return nxt
        u = nxt
    return u


@dataclass(frozen=True)
class CConstants:
    c1: float
    c2: float
    a_plus: float
    a_minus: float
    r: float

    def to_dict(self) -> dict:
        return {
            "c1": self.c1,
            "c2": self.c2,
            "a_plus": self.a_plus,
            "a_minus": self.a_minus,
            "r": self.r,
        }


def c_constants(
    n: int,
    d_eff: int,
    eps: float,
    lambda1: float,
    eta_positive: bool,
    log_arg: Literal["dn", "d2n"] = "dn",
) -> CConstants:
    """The winsorization constants ``c1 = -A+ W0(-e^{-(r+A+)/A+})`` and
    ``c2 = -A- W_{-1}(-e^{-(r+A-)/A-})``, with ``r = log(arg)/(eps n)``.

    ``arg`` is ``d n`` (``log_arg="dn"``) or ``d^2 n`` (``"d2n"``, the
    covariance-mode constants). ``A+ = 1 - 1/lambda1`` and
    ``A- = 1 + 1/lambda1`` if contamination is present. Otherwise both
    equal 1.
    """
    if int(n) != n or n <= 3:
        raise ArgumentError(f"n must be an integer > 3, got {n!r}")
    if not 0.0 < eps < 1.0:
        raise ArgumentError(f"eps must lie in (0, 1), got {eps!r}")
    if eta_positive and not lambda1 > 1.0:
        raise ArgumentError(f"lambda1 must exceed 1, got {lambda1!r}")
    if log_arg == "dn":
        arg = d_eff * n
    elif log_arg == "d2n":
        arg = d_eff * d_eff * n
    else:
        raise ArgumentError(f"log_arg must be 'dn' or 'd2n', got {log_arg!r}")
    r = math.log(arg) / (eps * n)
    a_plus = 1.0 - 1.0 / lambda1 if eta_positive else 1.0
    a_minus = 1.0 + 1.0 / lambda1 if eta_positive else 1.0
    s_plus = (r + a_plus) / a_plus
    s_minus = (r + a_minus) / a_minus
    if s_plus < 700.0:
        c1 = -a_plus * lambert_w0(-math.exp(-s_plus))
    else:
        c1 = a_plus * _u_minus_log_u(s_plus, large=False)
    if s_minus < 700.0:
        c2 = -a_minus * lambert_wm1(-math.exp(-s_minus))
    else:
        c2 = a_minus * _u_minus_log_u(s_minus, large=True)
    if not (0.0 <= c1 < a_plus and c2 > a_minus):
        raise NumericError(f"Lambert branch evaluation failed (c1={c1!r}, c2={c2!r})")
    return CConstants(c1=c1, c2=c2, a_plus=a_plus, a_minus=a_minus, r=r)


def c_constant_brackets(lambda1: float, lambda2: float) -> tuple[float, float]:
    """``(lower bound on c1, upper bound on c2)`` as functions of the tuning
    constants alone. Both hold once the mean-mode condition is satisfied."""
    a = 1.0 - 1.0 / lambda1
    lower = a * math.exp(-1.0 / (lambda2 * a) - 1.0)
    upper = 2.0 + 1.0 / lambda2 + math.sqrt(lambda2**-2 + 4.0 / lambda2)
    return lower, upper


RATE_KINDS = (
    "gauss_winsorized",
    "normalized",
    "trimmed",
    "covariance_rate",
    "bootstrap",
    "bootstrap_normalized",
    "bootstrap_trimmed",
)


@dataclass(frozen=True)
class RateBound:
    value: float
    kind: str
    constant_C: float

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value, "constant_C": self.constant_C}


def _pow(base: float, expo: float) -> float:
    return 0.0 if base == 0.0 else base**expo


def rate_bound(
    kind: str, n: int, d: int, m: float, eta_bar: float = 0.0, C: float = 1.0
) -> RateBound:
    """Evaluate one of the approximation-error bounds with constant ``C``.

    kinds
        ``gauss_winsorized``: Gaussian approximation of the winsorized mean.
        ``trimmed``: the same plus the trimming-distance term.
        ``normalized``: normalized winsorized means.
        ``covariance_rate``: max-entry error of the winsorized covariance.
        ``bootstrap*``: the matching Gaussian bound plus the covariance
        comparison term.
    """
    if kind not in RATE_KINDS:
        raise ArgumentError(f"unknown bound kind {kind!r}; choose from {RATE_KINDS}")
    if not m > 2:
        raise ArgumentError(f"the moment index m must exceed 2, got {m!r}")
    if int(n) != n or n <= 3:
        raise ArgumentError(f"n must be an integer > 3, got {n!r}")
    if int(d) != d or d < 2:
        raise ArgumentError(f"d must be an integer >= 2, got {d!r}")
    if not 0.0 <= eta_bar < 0.5:
        raise ArgumentError(f"eta_bar must lie in [0, 1/2), got {eta_bar!r}")
    if not C >= 0:
        raise ArgumentError(f"C must be nonnegative, got {C!r}")

    log_dn = math.log(d * n)
    log_d = math.log(d)
    ratio = log_dn / n
    cov_exp = 1.0 - 1.0 / min(m / 2.0, 2.0)
    cov_term = _pow(eta_bar, 1.0 - 2.0 / m) + ratio**cov_exp

    gauss = C * (
        (log_dn ** (5.0 - 2.0 / m) / n ** (1.0 - 2.0 / m)) ** 0.25
        + (_pow(eta_bar, 1.0 - 1.0 / m) + ratio ** (1.0 - 1.0 / m)) * math.sqrt(n * log_d)
    ) + C * math.sqrt(
        log_d**2 * (_pow(eta_bar, 1.0 - 2.0 / m) + ratio ** (1.0 - 2.0 / m))
    )
    trim_extra = C * math.sqrt(n * log_d) * (
        _pow(eta_bar, 1.0 - 1.0 / m) + ratio ** (1.0 - 1.0 / m)
    )
    normalized = C * (gauss + math.sqrt(log_d * log_dn) * cov_term)
    comparison = C * math.sqrt(log_d**2 * cov_term)

    value = {
        "gauss_winsorized": gauss,
        "trimmed": gauss + trim_extra,
        "normalized": normalized,
        "covariance_rate": C * cov_term,
        "bootstrap": gauss + comparison,
        "bootstrap_normalized": normalized + comparison,
        "bootstrap_trimmed": gauss + trim_extra + comparison,
    }[kind]
    return RateBound(value=value, kind=kind, constant_C=C)


def quantile_mean_envelope(
    mean: float, sigma_m: float, m: float, p: float
) -> tuple[float, float]:
    """Bounds on the p-quantile from the mean and the m-th central moment:
    ``mean - sigma_m / p^{1/m} <= Q_p <= mean + sigma_m / (1-p)^{1/m}``."""
    if not math.isfinite(mean):
        raise ArgumentError("mean must be finite")
    if not sigma_m >= 0 or not math.isfinite(sigma_m):
        raise ArgumentError(f"sigma_m must be finite and >= 0, got {sigma_m!r}")
    if not m >= 1:
        raise ArgumentError(f"m must be >= 1, got {m!r}")
    if not 0.0 < p < 1.0:
        raise ArgumentError(f"p must lie in (0, 1), got {p!r}")
    return mean - sigma_m / p ** (1.0 / m), mean + sigma_m / (1.0 - p) ** (1.0 / m)


def anticoncentration_bound(delta_bar: float, sigma_min: float, d: int) -> float:
    """``(delta_bar / sigma_min) * (sqrt(2 log d) + 4)``.

    This bounds how far the Gaussian mass of a rectangle can move when its
    edges shift by at most ``delta_bar``.
    """
    if not delta_bar >= 0:
        raise ArgumentError(f"delta_bar must be >= 0, got {delta_bar!r}")
    if not sigma_min > 0:
        raise ArgumentError(f"sigma_min must be > 0, got {sigma_min!r}")
    if int(d) != d or d < 1:
        raise ArgumentError(f"d must be an integer >= 1, got {d!r}")
    return delta_bar / sigma_min * (math.sqrt(2.0 * math.log(d)) + 4.0)


def sharp_feasibility(
    n: int,
    d: int,
    eps_prime: float,
    lambda1_prime: float = 1.05,
    eta_positive: bool = False,
    mode: str = "covariance",
) -> FeasibilityReport:
    """Lambert-W form ``eps (c1 + c2) < threshold`` of the feasibility check.

    The closed-form condition of :func:`feasibility_condition` is a
    conservative sufficient condition for this one. The report carries
    both left-hand sides so callers can see the slack.
    """
    log_arg = "d2n" if mode == "covariance" else "dn"
    cc = c_constants(n, d, eps_prime, lambda1_prime, eta_positive, log_arg)
    simple = feasibility_condition(n, d, eps_prime, mode=mode)
    parts = (eps_prime * cc.c1, eps_prime * cc.c2)
    lhs = parts[0] + parts[1]
    return FeasibilityReport(
        lhs_value=lhs,
        satisfied=lhs < simple.threshold,
        components=parts,
        threshold=simple.threshold,
        notes={
            "simple_lhs": simple.lhs_value,
            "simple_satisfied": simple.satisfied,
            "c_constants": cc.to_dict(),
        },
    )

import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import special

from robust_hd.covariance import feasibility_condition
from robust_hd.errors import ArgumentError
from robust_hd.estimators import epsilon_schedule
from robust_hd.theory import (
    RATE_KINDS,
    anticoncentration_bound,
    c_constant_brackets,
    c_constants,
    lambert_w0,
    lambert_wm1,
    quantile_mean_envelope,
    rate_bound,
    sharp_feasibility,
)

INV_E = math.exp(-1.0)


def test_lambert_exact_points():
    assert lambert_w0(0.0) == 0.0
    assert lambert_w0(-INV_E) == -1.0
    assert lambert_wm1(-INV_E) == -1.0
    assert lambert_w0(math.e) == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("x", [-0.5, math.inf, math.nan])
def test_w0_domain(x):
    with pytest.raises(ArgumentError):
        lambert_w0(x)


@pytest.mark.parametrize("x", [0.0, 0.1, -0.5])
def test_wm1_domain(x):
    with pytest.raises(ArgumentError):
        lambert_wm1(x)


def _round_trip_points(rng, k=1000):
    w0 = np.concatenate([
        -INV_E + np.geomspace(1e-14, INV_E, k // 4),
        rng.uniform(-INV_E, 5.0, k // 4),
        np.geomspace(1.0, 1e300, k // 2),
    ])
    wm1 = -np.concatenate([
        INV_E - np.geomspace(1e-14, INV_E * (1 - 1e-12), k // 2),
        np.geomspace(1e-300, 0.3, k // 2),
    ])
    return w0, wm1


def test_lambert_round_trip():
    w0_pts, wm1_pts = _round_trip_points(np.random.default_rng(11))
    for x in w0_pts:
        w = lambert_w0(x)
        assert w >= -1.0
        assert abs(w * math.exp(w) - x) <= 1e-12 * abs(x)
    for x in wm1_pts:
        w = lambert_wm1(x)
        assert w <= -1.0
        assert abs(w * math.exp(w) - x) <= 1e-12 * abs(x)


@pytest.mark.parametrize("x", [-0.367, -0.3, -1e-3, -1e-50, -1e-300])
def test_wm1_against_mpmath(x):
    ref = float(mpmath.lambertw(mpmath.mpf(x), -1).real)
    assert lambert_wm1(x) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("x", [-0.367, -0.2, 1e-8, 0.7, 10.0, 1e10, 1e300])
def test_w0_against_mpmath(x):
    ref = float(mpmath.lambertw(mpmath.mpf(x)).real)
    assert lambert_w0(x) == pytest.approx(ref, rel=1e-13)


def _root_oracle(s: float, large: bool) -> float:
    # u - log u = s, bracketed on one side of u = 1, at 40 digits.
    with mpmath.workdps(40):
        f = lambda u: u - mpmath.log(u) - s  # noqa: E731
        bracket = (mpmath.mpf(1), mpmath.mpf(2 * s)) if large else (mpmath.mpf(10) ** -30, mpmath.mpf(1))
        return float(mpmath.findroot(f, bracket, solver="anderson"))


def test_c_constants_frozen():
    # lambda2 = 0.1 exactly => r = 1/lambda2 = 10, s = 11.
    n, d = 200, 500
    eps = 0.1 * math.log(d * n) / n
    cc = c_constants(n, d, eps, 1.05, eta_positive=False)
    assert cc.r == pytest.approx(10.0, rel=1e-14)
    assert cc.c1 == pytest.approx(1.6701979744043485e-05, abs=1e-9 * 1e-5)
    assert cc.c2 == pytest.approx(13.610868638149876, abs=1e-9)
    assert cc.c1 == pytest.approx(_root_oracle(11.0, large=False), rel=1e-12)
    assert cc.c2 == pytest.approx(_root_oracle(11.0, large=True), rel=1e-12)


def test_c_constants_underflow_path_is_continuous():
    # s just below and above the switch to the u - log u form.
    a = c_constants(1000, 10, math.log(10_000) / (1000 * 698.0), 1.05, False)
    b = c_constants(1000, 10, math.log(10_000) / (1000 * 700.5), 1.05, False)
    assert a.c2 < b.c2 < a.c2 * 1.01
    assert b.c1 < a.c1 and b.c1 > 0


def test_c_constants_contaminated_weights():
    cc = c_constants(200, 500, 0.03, 1.05, eta_positive=True)
    assert cc.a_plus == pytest.approx(1 - 1 / 1.05)
    assert cc.a_minus == pytest.approx(1 + 1 / 1.05)


def test_doubling_eps():
    a = c_constants(200, 500, 0.01, 1.05, False)
    b = c_constants(200, 500, 0.02, 1.05, False)
    assert b.r == pytest.approx(a.r / 2)
    assert b.c1 > a.c1 and b.c2 < a.c2


@given(
    n=st.integers(50, 10**6),
    d=st.integers(1, 10**5),
    eta=st.floats(0.0, 0.05),
    lambda1=st.floats(1.01, 5.0),
    lambda2=st.floats(0.02, 2.0),
)
def test_bracket_property(n, d, eta, lambda1, lambda2):
    s = epsilon_schedule(n, d, eta, lambda1, lambda2)
    assume(s.valid)
    assume(feasibility_condition(n, d, s.epsilon, mode="mean").satisfied)
    cc = c_constants(n, d, s.epsilon, lambda1, eta > 0)
    lo, hi = c_constant_brackets(lambda1, lambda2)
    assert cc.c1 >= lo * (1 - 1e-12)
    assert cc.c2 <= hi * (1 + 1e-12)


@pytest.mark.parametrize("kind", RATE_KINDS)
def test_rate_eta_terms_vanish(kind):
    a = rate_bound(kind, 200, 500, 4.0, 0.0).value
    b = rate_bound(kind, 200, 500, 4.0, 1e-300).value
    assert a == pytest.approx(b, rel=1e-12)


@pytest.mark.parametrize("kind", RATE_KINDS)
def test_rate_monotone_in_eta_and_d(kind):
    etas = [0.0, 0.01, 0.05, 0.2]
    vals = [rate_bound(kind, 500, 100, 4.0, e).value for e in etas]
    assert vals == sorted(vals)
    ds = [2, 10, 100, 10_000]
    vals = [rate_bound(kind, 500, d, 4.0, 0.01).value for d in ds]
    assert vals == sorted(vals)


def test_gauss_rate_adapts_to_m():
    ms = np.linspace(2.05, 50, 60)
    vals = [rate_bound("gauss_winsorized", 10**5, 100, m).value for m in ms]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert rate_bound("gauss_winsorized", 200, 500, 4).value < rate_bound("gauss_winsorized", 200, 500, 3).value


def test_covariance_rate_exponent():
    n, d = 400, 30
    r = rate_bound("covariance_rate", n, d, 4.0).value
    assert r == pytest.approx((math.log(d * n) / n) ** 0.5, rel=1e-14)
    r3 = rate_bound("covariance_rate", n, d, 3.0).value
    assert r3 == pytest.approx((math.log(d * n) / n) ** (1 - 1 / 1.5), rel=1e-14)


def test_rate_constant_scales():
    assert rate_bound("bootstrap", 200, 50, 4, 0.01, C=3).value > rate_bound("bootstrap", 200, 50, 4, 0.01).value
    assert rate_bound("covariance_rate", 200, 50, 4, 0.0, C=0).value == 0.0


@pytest.mark.parametrize(
    "args",
    [("nope", 200, 5, 4.0), ("bootstrap", 200, 5, 2.0), ("bootstrap", 3, 5, 4.0),
     ("bootstrap", 200, 1, 4.0), ("bootstrap", 200, 5, 4.0, 0.5)],
)
def test_rate_domain(args):
    with pytest.raises(ArgumentError):
        rate_bound(*args)


def test_quantile_envelope():
    lo, hi = quantile_mean_envelope(0.0, 1.0, 2.0, 0.25)
    assert lo == pytest.approx(-2.0) and hi == pytest.approx(1 / math.sqrt(0.75))
    lo, hi = quantile_mean_envelope(0.0, 1.0, 2.0, 1 - 1e-12)
    assert lo == pytest.approx(-1.0) and hi > 1e5


@given(st.floats(0.01, 0.99), st.floats(1.0, 10.0))
def test_quantile_envelope_contains_normal_quantile(p, m):
    # sigma_m = (E|Z|^m)^{1/m} for a standard normal.
    sigma = (2 ** (m / 2) * math.gamma((m + 1) / 2) / math.sqrt(math.pi)) ** (1 / m)
    lo, hi = quantile_mean_envelope(0.0, sigma, m, p)
    q = float(special.ndtri(p))
    assert lo <= q <= hi


def test_anticoncentration_examples():
    assert anticoncentration_bound(0.0, 1.0, 100) == 0.0
    assert anticoncentration_bound(0.1, 1.0, 7) == pytest.approx(0.1 * (math.sqrt(2 * math.log(7)) + 4))
    assert anticoncentration_bound(0.1, 2.0, 7) == pytest.approx(anticoncentration_bound(0.05, 1.0, 7))


def test_sharp_feasibility_example():
    eps = 0.07 * math.log(500**2 * 200) / 200
    rep = sharp_feasibility(200, 500, eps, 1.05, False)
    assert rep.notes["c_constants"]["r"] == pytest.approx(1 / 0.07, rel=1e-13)
    cc = c_constants(200, 500, eps, 1.05, False, log_arg="d2n")
    assert rep.lhs_value == pytest.approx(eps * (cc.c1 + cc.c2), rel=1e-15)
    assert rep.satisfied
    assert rep.lhs_value < rep.notes["simple_lhs"]


def test_sharp_feasibility_violated_near_half():
    assert not sharp_feasibility(10, 3, 0.45, 1.05, False).satisfied


def test_simple_implies_sharp():
    rng = np.random.default_rng(5)
    seen = 0
    for _ in range(1000):
        n = int(rng.integers(10, 10**5))
        d = int(rng.integers(1, 10**4))
        eps = float(rng.uniform(1e-4, 0.49))
        eta_pos = bool(rng.integers(2))
        lam = float(rng.uniform(1.01, 4.0))
        if not feasibility_condition(n, d, eps).satisfied:
            continue
        seen += 1
        assert sharp_feasibility(n, d, eps, lam, eta_pos).satisfied
    assert seen > 200

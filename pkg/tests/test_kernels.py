"""Kernel zoo: order functions, primitives, Dini classifier, scaling bounds.

Oracles are restated inline (closed forms where they exist, scipy.integrate.quad
elsewhere) so a regression in the package cannot silently move the target.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from nlplab import (
    DivergenceError,
    KernelSpec,
    LogBorderline,
    LogPerturbedPower,
    Min,
    Power,
    PureLog,
    Sum,
    Tabulated,
    capital_phi,
    check_dini,
    check_scaling_bounds,
    exterior_kernel_mass,
    get_phi_table,
    phi_eval,
    sphere_area,
)


def power_spec(s, p=2.0):
    return KernelSpec(Power(s=s), p=p)


# ---------------------------------------------------------------------------
# capital_phi oracles
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("s", [0.3, 0.5, 0.75, 0.9])
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_power_primitive_closed_form(s, p):
    # Phi(t) = int_0^t tau^((1-s)p) dtau/tau = t^((1-s)p) / ((1-s)p)
    spec = power_spec(s, p)
    table = get_phi_table(spec)
    a = (1.0 - s) * p
    for t in np.geomspace(1e-3, 1e3, 61):
        np.testing.assert_allclose(capital_phi(table, t), t**a / a, rtol=1e-10)


def quad_phi_oracle(phi, t, points=()):
    # int_0^t phi(tau)/tau dtau after tau = e^-u: int_{-log t}^inf phi(e^-u) du
    lo = -math.log(t)
    val, err = quad(
        lambda u: phi(math.exp(-u)),
        lo,
        math.inf,
        points=None,
        limit=400,
    )
    for b in points:  # refine across known kinks
        if b > t:
            continue
        split = -math.log(b)
        v1, _ = quad(lambda u: phi(math.exp(-u)), split, math.inf, limit=400)
        v2, _ = quad(lambda u: phi(math.exp(-u)), lo, split, limit=400)
        val = v1 + v2
    return val


@pytest.mark.parametrize("t", [0.05, 0.3, 1.0, 4.0])
def test_sum_primitive_against_quadrature(t):
    s, s_up, p = 0.4, 0.8, 2.0
    spec = KernelSpec(Sum(s=s, s_upper=s_up), p=p)
    phi = lambda tau: tau ** ((1 - s) * p) + tau ** ((1 - s_up) * p)
    np.testing.assert_allclose(
        capital_phi(get_phi_table(spec), t), quad_phi_oracle(phi, t), rtol=1e-8
    )
    # and the closed form, since both terms are pure powers
    exact = t ** ((1 - s) * p) / ((1 - s) * p) + t ** ((1 - s_up) * p) / ((1 - s_up) * p)
    np.testing.assert_allclose(capital_phi(get_phi_table(spec), t), exact, rtol=1e-8)


@pytest.mark.parametrize("t", [0.2, 1.0, 3.0])
def test_min_primitive_against_quadrature(t):
    s, s_up, p = 0.3, 0.7, 2.0
    spec = KernelSpec(Min(s=s, s_upper=s_up), p=p)
    a, b = (1 - s) * p, (1 - s_up) * p
    phi = lambda tau: min(tau**a, tau**b)
    np.testing.assert_allclose(
        capital_phi(get_phi_table(spec), t),
        quad_phi_oracle(phi, t, points=(1.0,)),
        rtol=1e-8,
    )


@pytest.mark.parametrize("t", [0.1, 0.5, 2.0])
def test_log_perturbed_primitive_against_quadrature(t):
    s, gamma, p = 0.5, 1.5, 2.0
    spec = KernelSpec(LogPerturbedPower(s=s, gamma=gamma), p=p)

    def phi(tau):
        if tau <= 0.0:  # e^-u underflows for large u; the limit is 0
            return 0.0
        return tau ** ((1 - s) * p) * math.log1p(1.0 / tau) ** gamma
    np.testing.assert_allclose(
        capital_phi(get_phi_table(spec), t), quad_phi_oracle(phi, t), rtol=1e-8
    )


@pytest.mark.parametrize("t", [0.05, 1 / math.e, 1.0, 2.0])
def test_log_borderline_primitive_against_quadrature(t):
    gamma, s, p = 2.0, 0.5, 2.0
    spec = KernelSpec(LogBorderline(gamma=gamma, s=s), p=p)
    a = (1 - s) * p

    def phi(tau):
        if tau <= 0.0:
            return 0.0
        if tau <= 1 / math.e:
            return max((-math.log(tau)) ** -gamma, tau**a)
        return (math.e * tau) ** a

    np.testing.assert_allclose(
        capital_phi(get_phi_table(spec), t),
        quad_phi_oracle(phi, t, points=(1 / math.e,)),
        rtol=1e-7,
    )


def test_log_borderline_unit_mass_below_knee():
    # int_0^{1/e} (-log tau)^-2 dtau/tau = int_1^inf u^-2 du = 1, and the
    # power branch tau^((1-s)p) stays below the log branch there for s=0.5.
    spec = KernelSpec(LogBorderline(gamma=2.0, s=0.5), p=2.0)
    np.testing.assert_allclose(capital_phi(get_phi_table(spec), 1 / math.e), 1.0, rtol=1e-8)


def test_phi_point_values():
    np.testing.assert_allclose(phi_eval(power_spec(0.5), 4.0), 4.0, rtol=1e-14)
    spec = KernelSpec(LogBorderline(gamma=2.0, s=0.5), p=2.0)
    np.testing.assert_allclose(phi_eval(spec, math.exp(-2.0)), 0.25, rtol=1e-14)
    # continuity across the 1/e knee
    np.testing.assert_allclose(phi_eval(spec, 1 / math.e), 1.0, rtol=1e-14)
    below = phi_eval(spec, (1 - 1e-9) / math.e)
    above = phi_eval(spec, (1 + 1e-9) / math.e)
    np.testing.assert_allclose(below, above, rtol=1e-6)
    table = get_phi_table(power_spec(0.75))
    np.testing.assert_allclose(capital_phi(table, 2.0), 2.0**0.5 / 0.5, rtol=1e-12)


def test_phi_eval_vectorized():
    spec = power_spec(0.5)
    t = np.array([0.25, 1.0, 4.0])
    np.testing.assert_allclose(phi_eval(spec, t), t)  # (1-s)p = 1


# ---------------------------------------------------------------------------
# Dini classifier
# ---------------------------------------------------------------------------


def test_dini_power():
    res = check_dini(power_spec(0.5))
    assert res.converges
    np.testing.assert_allclose(res.value, 1.0, rtol=1e-8)  # 1/((1-s)p)


def test_dini_pure_log_convergent():
    # int_0^{1/e} (-log t)^-2 dt/t = 1 exactly
    res = check_dini(KernelSpec(PureLog(gamma=2.0), p=2.0, s=0.5, s_tilde=1.25))
    assert res.converges
    np.testing.assert_allclose(res.value, 1.0, atol=1e-6)


def test_dini_pure_log_divergent():
    res = check_dini(KernelSpec(PureLog(gamma=1.0), p=2.0))
    assert not res.converges
    assert math.isinf(res.value)


def test_dini_log_borderline_finite():
    res = check_dini(KernelSpec(LogBorderline(gamma=2.0, s=0.5), p=2.0))
    assert res.converges
    assert np.isfinite(res.value)


def test_divergent_kernel_has_no_primitive():
    spec = KernelSpec(PureLog(gamma=1.0), p=2.0)
    with pytest.raises(DivergenceError):
        capital_phi(get_phi_table(spec), 0.3)


# ---------------------------------------------------------------------------
# scaling bounds
# ---------------------------------------------------------------------------


def test_scaling_bounds_power_tight():
    sb = check_scaling_bounds(power_spec(0.5))
    np.testing.assert_allclose(sb.L_dec, 1.0)
    np.testing.assert_allclose(sb.L_inc, 1.0)


def test_scaling_bounds_understated_s():
    # declaring s=0.4 for a true s=0.5 power still gives a monotone ratio
    spec = KernelSpec(Power(s=0.5), p=2.0, s=0.4)
    np.testing.assert_allclose(check_scaling_bounds(spec).L_dec, 1.0)


@pytest.mark.parametrize(
    "spec",
    [
        KernelSpec(Power(s=0.5), p=2.0),
        KernelSpec(Sum(s=0.3, s_upper=0.8), p=2.0),
        KernelSpec(Min(s=0.3, s_upper=0.7), p=2.0),
        KernelSpec(LogPerturbedPower(s=0.5, gamma=1.5), p=2.0),
        KernelSpec(LogBorderline(gamma=2.0, s=0.5), p=2.0),
    ],
    ids=lambda sp: type(sp.variant).__name__,
)
def test_declared_constants_cover_measured(spec):
    sb = check_scaling_bounds(spec)
    assert sb.L_dec <= spec.L * (1 + 1e-9)
    assert sb.L_inc <= spec.L * (1 + 1e-9)


def test_log_borderline_honest_L():
    # the ratio phi(t)/t^((1-s)p) dips at t* = exp(-gamma/((1-s)p)) and
    # climbs back to e^((1-s)p) at the knee; the declared constant is the
    # exact ratio of those two values.
    gamma, s, p = 2.0, 0.5, 2.0
    a = (1 - s) * p
    spec = KernelSpec(LogBorderline(gamma=gamma, s=s), p=p)
    dip = math.exp(gamma) * (a / gamma) ** gamma
    np.testing.assert_allclose(spec.L, math.exp(a) / dip, rtol=1e-12)
    sb = check_scaling_bounds(spec)
    assert sb.L_dec <= spec.L * (1 + 1e-9)
    # on a grid confined below the dip the ratio is genuinely decreasing
    low = np.geomspace(1e-8, math.exp(-gamma / a), 33)
    np.testing.assert_allclose(check_scaling_bounds(spec, t_grid=low).L_dec, 1.0)


def test_log_borderline_needs_s_tilde_at_least_one():
    # phi(t)/t^((1-q)p) with q < 1 blows up as t -> 0 on the log branch,
    # so no finite constant works below q = 1; at q = 1 the ratio is phi
    # itself, which is nondecreasing.
    spec = KernelSpec(LogBorderline(gamma=2.0, s=0.5), p=2.0)
    t = np.geomspace(1e-9, 1e2, 801)
    for q, ok in ((0.9, False), (1.0, True), (1.25, True)):
        ratio = phi_eval(spec, t) / t ** ((1 - q) * spec.p)
        suffix_min = np.minimum.accumulate(ratio[::-1])[::-1]
        worst = float(np.max(ratio / suffix_min))
        if ok:
            assert worst <= 1 + 1e-9
        else:
            assert worst > 1.5


# ---------------------------------------------------------------------------
# exterior kernel mass
# ---------------------------------------------------------------------------


def test_exterior_mass_power_analytic():
    # omega_1 * int_r^inf rho^((1-s)p) rho^(-p-1) drho = 2/(sp) * phi(r)/r^p
    spec = power_spec(0.5)
    np.testing.assert_allclose(exterior_kernel_mass(spec, 1.0, n=1), 2.0, rtol=5e-3)
    np.testing.assert_allclose(exterior_kernel_mass(spec, 2.0, n=1), 1.0, rtol=5e-3)


@pytest.mark.parametrize(
    "spec",
    [
        KernelSpec(Power(s=0.5), p=2.0),
        KernelSpec(Power(s=0.25), p=3.0),
        KernelSpec(Sum(s=0.3, s_upper=0.8), p=2.0),
        KernelSpec(Min(s=0.3, s_upper=0.7), p=2.0),
        KernelSpec(LogPerturbedPower(s=0.5, gamma=1.5), p=2.0),
        KernelSpec(LogBorderline(gamma=2.0, s=0.5), p=2.0),
    ],
    ids=lambda sp: type(sp.variant).__name__ + f"-s{sp.s:g}",
)
@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_exterior_mass_bound(spec, r):
    # mass over {|y| > r} of phi(|y|)/|y|^{n+p}  <=  L * omega_n/(sp) * phi(r)/r^p
    mass = exterior_kernel_mass(spec, r, n=1)
    bound = spec.L * sphere_area(1) / (spec.s * spec.p) * phi_eval(spec, r) / r**spec.p
    assert mass <= 1.01 * bound


def test_pure_log_probe_has_no_exterior_mass():
    # the probe is only defined below t = 1; the mass integral runs to infinity
    spec = KernelSpec(PureLog(gamma=2.0), p=2.0, s=0.5, s_tilde=1.25)
    with pytest.raises(ValueError):
        exterior_kernel_mass(spec, 0.5, n=1)


def test_phi_dominated_by_primitive():
    # the almost-decreasing ratio gives phi(t) <= L (1-s) p Phi(t)
    for spec in (
        power_spec(0.5),
        KernelSpec(Sum(s=0.3, s_upper=0.8), p=2.0),
        KernelSpec(LogPerturbedPower(s=0.5, gamma=1.5), p=2.0),
        KernelSpec(LogBorderline(gamma=2.0, s=0.5), p=2.0),
    ):
        table = get_phi_table(spec)
        cap = spec.L * (1 - spec.s) * spec.p
        for t in np.geomspace(1e-3, 1e2, 21):
            assert phi_eval(spec, t) <= cap * capital_phi(table, t) * (1 + 1e-9)


def test_primitive_scaling_inequality():
    # Phi(lam t) <= L lam^((1-s)p) Phi(t) for lam >= 1 follows from adec
    spec = KernelSpec(Sum(s=0.3, s_upper=0.8), p=2.0)
    table = get_phi_table(spec)
    a = (1 - spec.s) * spec.p
    for t in (0.01, 0.3, 2.0):
        base = capital_phi(table, t)
        for lam in (1.0, 2.0, 10.0, 50.0):
            assert capital_phi(table, lam * t) <= spec.L * lam**a * base * (1 + 1e-9)


# ---------------------------------------------------------------------------
# spec construction and validation
# ---------------------------------------------------------------------------


def test_spec_defaults_filled():
    spec = power_spec(0.5)
    assert spec.s == 0.5
    assert spec.s_tilde > spec.s
    assert spec.L >= 1.0
    assert spec.Lambda == 1.0


def test_spec_validation_errors():
    with pytest.raises(ValueError):
        KernelSpec(Power(s=0.5), p=2.0, s=1.5)
    with pytest.raises(ValueError):
        KernelSpec(Power(s=0.5), p=2.0, s_tilde=0.3)  # below s
    with pytest.raises(ValueError):
        KernelSpec(Power(s=0.5), p=2.0, L=0.5)
    with pytest.raises(ValueError):
        KernelSpec(Power(s=0.5), p=2.0, Lambda=0.5)
    with pytest.raises(ValueError):
        KernelSpec(Power(s=0.5), p=0.9)


def test_variant_validation_errors():
    with pytest.raises(ValueError):
        KernelSpec(Sum(s=0.5, s_upper=1.2), p=2.0)
    with pytest.raises(ValueError):
        KernelSpec(Min(s=0.7, s_upper=0.3), p=2.0)
    with pytest.raises(ValueError):
        KernelSpec(LogPerturbedPower(s=0.5, gamma=0.0), p=2.0)
    with pytest.raises(ValueError):
        KernelSpec(LogBorderline(gamma=1.0, s=0.5), p=2.0)
    with pytest.raises(ValueError):
        KernelSpec(PureLog(gamma=-1.0), p=2.0)


def test_tabulated_needs_declared_indices():
    with pytest.raises(ValueError):
        KernelSpec(Tabulated(t=(0.1, 1.0), values=(0.5, 1.0)), p=2.0)


def test_tabulated_eval_and_range():
    spec = KernelSpec(
        Tabulated(t=(0.1, 1.0, 10.0), values=(0.5, 1.0, 2.0)),
        p=2.0,
        s=0.5,
        s_tilde=0.75,
    )
    np.testing.assert_allclose(phi_eval(spec, 1.0), 1.0)
    np.testing.assert_allclose(phi_eval(spec, 10.0), 2.0)
    with pytest.raises(ValueError):
        phi_eval(spec, 0.01)
    with pytest.raises(ValueError):
        phi_eval(spec, 100.0)

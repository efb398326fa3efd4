import math

import numpy as np
import pytest
from scipy.integrate import quad

from heatkernel import (
    Cube,
    DomainError,
    ParameterError,
    PolynomialPotential,
    PowerPotential,
    ScaledPotential,
    SumPotential,
    TabulatedPotential,
    ap_constant,
    constant,
    cube_average,
    doubling_fit,
    eval_potential,
    m_beta,
    rh_constant,
)


# independent oracle: integral of |x|^a over [lo, hi] by direct antiderivative
def power_integral(lo, hi, a):
    def prim(v):
        return v ** (a + 1.0) / (a + 1.0)

    if lo >= 0:
        return prim(hi) - prim(lo)
    if hi <= 0:
        return prim(-lo) - prim(-hi)
    return prim(-lo) + prim(hi)


def test_eval_examples():
    assert eval_potential(PolynomialPotential([0, 0, 1]), 3.0) == 9.0
    assert eval_potential(PowerPotential(-0.5), 4.0) == 0.5
    with pytest.raises(DomainError):
        eval_potential(PowerPotential(-0.5), 0.0)


def test_eval_vectorized_and_nd():
    V = PolynomialPotential([1, 2], n=2)  # (1 + 2x)(1 + 2y)
    assert eval_potential(V, [1.0, 0.5]) == pytest.approx(3.0 * 2.0)
    Vp = PowerPotential(2.0, n=2)
    assert eval_potential(Vp, [3.0, 4.0]) == pytest.approx(25.0)


def test_cube_average_quadratic_formula():
    # mean of a2 z^2 + a1 z + a0 over the side-r cube at x is a2(x^2 + r^2/12) + a1 x + a0
    for a0, a1, a2, x, r in [(0, 0, 1, 1.0, 1.0), (2.0, -1.5, 3.0, 0.4, 0.7), (1, 1, 1, -2.0, 2.5)]:
        V = PolynomialPotential([a0, a1, a2])
        got = cube_average(V, Cube(x, r))
        assert got == pytest.approx(a2 * (x * x + r * r / 12.0) + a1 * x + a0, rel=1e-14)
    assert cube_average(PolynomialPotential([0, 0, 1]), Cube(1.0, 1.0)) == pytest.approx(13.0 / 12.0)


def test_cube_average_constant():
    for side in (0.1, 1.0, 7.0):
        assert cube_average(constant(4.2), Cube(-3.0, side)) == pytest.approx(4.2)


def test_cube_average_closed_vs_quadrature():
    V = PolynomialPotential([1.0, -2.0, 0.5, 0.25])
    for center, side in [(0.0, 1.0), (2.5, 0.3), (-1.0, 4.0)]:
        closed = cube_average(V, Cube(center, side), method="closed")
        adaptive = cube_average(V, Cube(center, side), method="quad")
        assert closed == pytest.approx(adaptive, rel=1e-12)


def test_cube_average_singular_power_closed_form():
    V = PowerPotential(-0.5)
    Z = Cube(0.0, 2.0)
    # integrable singularity handled by closed form: mean of |x|^{-1/2} over [-1,1] is 2
    assert cube_average(V, Z) == pytest.approx(2.0, rel=1e-14)
    with pytest.raises(ParameterError):
        cube_average(V, Z, method="quad")
    with pytest.raises(DomainError):
        cube_average(PowerPotential(-1.5), Z)


def test_cube_average_nd_product():
    V = PolynomialPotential([0, 0, 1], n=2)  # x^2 * y^2
    got = cube_average(V, Cube((1.0, 1.0), 1.0))
    assert got == pytest.approx((13.0 / 12.0) ** 2, rel=1e-14)


def test_tabulated_roundtrip():
    xs = np.linspace(-1, 1, 41)
    V = TabulatedPotential(xs, xs**2)
    assert eval_potential(V, 0.5) == pytest.approx(0.25, abs=2e-3)
    # integral of the interpolant equals trapezoid exactly
    got = cube_average(V, Cube(0.0, 2.0))
    assert got == pytest.approx(np.trapezoid(xs**2, xs) / 2.0, rel=1e-14)
    with pytest.raises(DomainError):
        eval_potential(V, 1.5)
    with pytest.raises(ParameterError):
        TabulatedPotential(xs, xs)  # negative values


def test_compositions():
    V = SumPotential(ScaledPotential(2.0, PolynomialPotential([0, 0, 1])), constant(1.0))
    Z = Cube(0.5, 1.0)
    want = 2.0 * cube_average(PolynomialPotential([0, 0, 1]), Z) + 1.0
    assert cube_average(V, Z) == pytest.approx(want, rel=1e-14)
    assert eval_potential(V, 2.0) == pytest.approx(9.0)


def test_m_beta_examples():
    assert m_beta(0.5, 0.3) == 0.5
    assert m_beta(4.0, 0.5) == 2.0
    assert m_beta(1.0, 0.7) == 1.0


def test_m_beta_properties():
    xs = np.linspace(0, 10, 2001)
    for beta in (0.1, 0.5, 0.99, 1.0):
        vals = [m_beta(float(x), beta) for x in xs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))  # nondecreasing
        assert all(v <= x + 1e-15 for v, x in zip(vals, xs))  # below identity
        # continuity at the knee
        assert abs(m_beta(1.0 - 1e-12, beta) - m_beta(1.0 + 1e-12, beta)) < 1e-10
    with pytest.raises(ParameterError):
        m_beta(-1.0, 0.5)
    with pytest.raises(ParameterError):
        m_beta(1.0, 0.0)


def test_rh_constant_unit_weight():
    for q in (1.5, 3.0, math.inf):
        rep = rh_constant(constant(1.0), q, Cube(0.0, 2.0), 6)
        assert rep.constant == pytest.approx(1.0, abs=1e-12)
        assert not rep.divergent


def test_rh_power_convergent():
    # |x|^{-1/2} is reverse-Holder for q < 2; the singular cube realizes the sup
    rep = rh_constant(PowerPotential(-0.5), 1.5, Cube(0.0, 2.0), 12)
    # oracle: mean(V^q)^{1/q} / mean(V) over [0, s] = (4 s^{-3/4})^{2/3} / (2 s^{-1/2})
    oracle = 4.0 ** (2.0 / 3.0) / 2.0
    assert rep.constant == pytest.approx(oracle, rel=1e-12)
    assert not rep.divergent
    assert math.isfinite(rep.constant)


def test_rh_power_divergent():
    rep = rh_constant(PowerPotential(-0.5), 3.0, Cube(0.0, 2.0), 20)
    assert rep.divergent
    assert rep.divergent_at_side == 2.0  # window itself contains the singularity
    tail = [r for _, r in rep.trace[-11:]]
    assert all(b > a for a, b in zip(tail, tail[1:]))
    assert tail[-1] > 10.0 * tail[0]


def test_rh_jensen_lower_bound():
    # power-mean inequality: ratio >= 1 on integrable inputs
    for V in (PolynomialPotential([1.0, 0.5, 2.0]), PowerPotential(0.5), constant(2.0)):
        for q in (1.5, 2.0, 4.0):
            rep = rh_constant(V, q, Cube(0.3, 1.7), 8)
            assert all(r >= 1.0 - 1e-10 for _, r in rep.trace)


def test_rh_infinity():
    rep = rh_constant(PolynomialPotential([0, 0, 1]), math.inf, Cube(0.0, 4.0), 8)
    # sup over [0,s] of z^2 is s^2, mean is s^2/3: ratio 3 at the origin cubes
    assert rep.constant == pytest.approx(3.0, rel=1e-9)
    with pytest.raises(ParameterError):
        rh_constant(PolynomialPotential([0, 0, 1]), math.inf, Cube(0.0, 4.0), 20)


def test_rh_parameter_errors():
    with pytest.raises(ParameterError):
        rh_constant(constant(1.0), 1.0, Cube(0.0, 2.0), 4)
    with pytest.raises(ParameterError):
        rh_constant(constant(1.0), 2.0, Cube(0.0, 2.0), 0)


def test_ap_constants():
    rep = ap_constant(constant(5.0), 2.0, Cube(0.0, 2.0), 6)
    assert rep.constant == pytest.approx(1.0, abs=1e-12)
    assert rep.beta == pytest.approx(2.0 / 3.0)
    rep3 = ap_constant(constant(0.1), 3.0, Cube(0.0, 2.0), 4)
    assert rep3.constant == pytest.approx(1.0, abs=1e-12)
    assert rep3.beta == pytest.approx(2.0 / (2.0 + 2.0))


def test_ap_power_cross_check():
    # oracle for V = |x|^{1/2}, p = 2 on cubes touching 0:
    # mean(V) * mean(1/V) = (2/3) s^{1/2} * 2 s^{-1/2} = 4/3
    rep = ap_constant(PowerPotential(0.5), 2.0, Cube(0.0, 2.0), 10)
    assert rep.constant == pytest.approx(4.0 / 3.0, rel=1e-10)
    assert not rep.divergent


def test_ap_divergent_dual_weight():
    # V = x^2 has 1/V non-integrable at 0 for p = 2
    rep = ap_constant(PolynomialPotential([0, 0, 1]), 2.0, Cube(0.0, 2.0), 6)
    assert rep.divergent


def test_doubling_fit_exact_cases():
    window = Cube(0.0, 2.0)
    lebesgue = doubling_fit(constant(1.0), window, 8)
    assert lebesgue.epsilon == pytest.approx(1.0, abs=1e-12)
    assert lebesgue.C == pytest.approx(1.0, abs=1e-12)

    cubic = doubling_fit(PolynomialPotential([0, 0, 1]), window, 12)
    assert cubic.epsilon == pytest.approx(3.0, abs=1e-6)
    assert cubic.residual < 1e-10

    root = doubling_fit(PowerPotential(-0.5), window, 12)
    assert root.epsilon == pytest.approx(0.5, abs=1e-6)


def test_doubling_fit_needs_pairs():
    with pytest.raises(ParameterError):
        doubling_fit(constant(1.0), Cube(0.0, 2.0), 2)


def test_rh_matches_independent_quadrature(rng):
    # dual route: scan ratios against direct quad on a smooth potential
    V = PolynomialPotential([1.0, 0.0, 1.0])
    rep = rh_constant(V, 2.0, Cube(0.0, 2.0), 3)
    for side, got in rep.trace:
        best = 0.0
        k = int(round(2.0 / side))
        for j in range(k):
            lo = -1.0 + j * side
            hi = lo + side
            num = quad(lambda x: V(x) ** 2, lo, hi, epsabs=1e-14, epsrel=1e-12)[0] / side
            den = quad(lambda x: float(V(x)), lo, hi, epsabs=1e-14, epsrel=1e-12)[0] / side
            best = max(best, math.sqrt(num) / den)
        assert got == pytest.approx(best, rel=1e-9)


def test_rh_constant_tabulated_potential():
    xs = np.linspace(-1, 1, 201)
    V = TabulatedPotential(xs, 1.0 + xs**2)
    rep = rh_constant(V, 2.0, Cube(0.0, 2.0), 6)
    assert not rep.divergent
    assert 1.0 - 1e-10 <= rep.constant < 2.0


def test_power_interval_integrals_fuzzed_against_quadrature(rng):
    from heatkernel.potentials import interval_integral

    for _ in range(25):
        alpha = float(rng.uniform(-0.9, 3.0))
        V = PowerPotential(alpha)
        lo = float(rng.uniform(-2.0, 1.5))
        hi = lo + float(rng.uniform(0.05, 2.0))
        got = float(interval_integral(V, lo, hi))
        if lo < 0.0 < hi and alpha < 0:
            # split the improper integral at the singularity
            want = (
                quad(lambda x: abs(x) ** alpha, lo, 0.0, epsabs=1e-13, epsrel=1e-11)[0]
                + quad(lambda x: abs(x) ** alpha, 0.0, hi, epsabs=1e-13, epsrel=1e-11)[0]
            )
        else:
            want = quad(lambda x: abs(x) ** alpha, lo, hi, epsabs=1e-13, epsrel=1e-11)[0]
        assert got == pytest.approx(want, rel=1e-8)


def test_powered_integrals_fuzzed(rng):
    from heatkernel.potentials import powered_interval_integral

    for _ in range(15):
        alpha = float(rng.uniform(-0.4, 2.0))
        q = float(rng.uniform(1.1, 2.5))
        V = PowerPotential(alpha)
        lo = float(rng.uniform(-1.5, 1.0))
        hi = lo + float(rng.uniform(0.1, 1.5))
        vals, flags = powered_interval_integral(V, np.array([lo]), np.array([hi]), q)
        assert not flags[0]
        s = alpha * q
        if lo < 0.0 < hi and s < 0:
            want = (
                quad(lambda x: abs(x) ** s, lo, 0.0, epsabs=1e-13, epsrel=1e-11)[0]
                + quad(lambda x: abs(x) ** s, 0.0, hi, epsabs=1e-13, epsrel=1e-11)[0]
            )
        else:
            want = quad(lambda x: abs(x) ** s, lo, hi, epsabs=1e-13, epsrel=1e-11)[0]
        assert vals[0] == pytest.approx(want, rel=1e-8)


def test_rh_ratio_scale_invariance():
    V = PowerPotential(-0.5)
    base = rh_constant(V, 1.5, Cube(0.0, 2.0), 8)
    scaled = rh_constant(ScaledPotential(37.0, V), 1.5, Cube(0.0, 2.0), 8)
    for (s1, r1), (s2, r2) in zip(base.trace, scaled.trace):
        assert s1 == s2
        assert r1 == pytest.approx(r2, rel=1e-12)

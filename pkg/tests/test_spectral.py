import math

import numpy as np
import pytest

from heatkernel import (
    DomainError,
    ParameterError,
    PolynomialPotential,
    PowerPotential,
    ProbeGrid,
    QuadraticCoeffs,
    build_spectral,
    constant,
    converged_kernel,
    dirichlet_interval_kernel,
    eval_spectral,
    gaussian_kernel,
    pde_residual,
    quadratic_kernel,
    semigroup_defect,
)
from heatkernel.spectral import cached_spectral

V_SQ = PolynomialPotential([0.0, 0.0, 1.0])


def test_free_eigenvalues(spectral_free):
    # Dirichlet spectrum on [-2, 2]: (k pi / 4)^2 with O(h^2) error
    k = np.arange(1, 6)
    exact = (k * math.pi / 4.0) ** 2
    rel = np.abs(spectral_free.eigenvalues[:5] - exact) / exact
    assert np.max(rel) < 1e-4


def test_free_kernel_matches_sine_series(spectral_free):
    for x, y, t in [(0.3, -0.5, 0.05), (0.0, 0.0, 0.2), (1.2, 0.7, 0.1), (-1.0, 1.0, 0.5)]:
        a = eval_spectral(spectral_free, x, y, t).value
        b = dirichlet_interval_kernel(-2.0, 2.0, x, y, t).value
        assert a == pytest.approx(b, rel=1e-4, abs=1e-12)


def test_harmonic_ground_energy(spectral_harmonic):
    lam = spectral_harmonic.eigenvalues
    assert abs(lam[0] - 1.0) < 1e-3
    assert abs(lam[1] - 3.0) < 1e-3
    assert abs(lam[2] - 5.0) < 1e-3
    # Rayleigh quotient cross-check on the ground mode
    K = spectral_harmonic
    phi0 = K.phi[1:-1, 0]
    lap = np.zeros_like(phi0)
    lap[1:-1] = (phi0[2:] - 2 * phi0[1:-1] + phi0[:-2]) / K.h**2
    lap[0] = (phi0[1] - 2 * phi0[0]) / K.h**2
    lap[-1] = (phi0[-2] - 2 * phi0[-1]) / K.h**2
    rayleigh = K.h * float(np.sum(phi0 * (-lap + K.nodes**2 * phi0)))
    assert rayleigh == pytest.approx(lam[0], rel=1e-10)


def test_eval_symmetry_and_positivity(spectral_vxx1):
    for x, y, t in [(0.4, -1.3, 0.05), (2.0, 1.0, 0.5), (-1.8, 1.8, 1.0)]:
        a = eval_spectral(spectral_vxx1, x, y, t)
        b = eval_spectral(spectral_vxx1, y, x, t)
        assert a.log_value == b.log_value
        assert a.value >= 0.0  # truncation negatives clamp to zero


def test_spectral_matches_quadratic_oracle(spectral_vxx1):
    c = QuadraticCoeffs(1.0, 1.0, 1.0)
    for x, y, t in [(0.0, 0.0, 0.05), (1.0, 0.5, 0.1), (-2.0, -1.5, 0.5), (2.0, 2.0, 1.0)]:
        ps = eval_spectral(spectral_vxx1, x, y, t).value
        pq = quadratic_kernel(c, x, y, t).value
        assert ps == pytest.approx(pq, rel=5e-3)


def test_eval_parameter_errors(spectral_free):
    with pytest.raises(ParameterError):
        eval_spectral(spectral_free, 0.0, 0.0, 0.0)
    with pytest.raises(ParameterError):
        eval_spectral(spectral_free, 3.0, 0.0, 0.1)


def test_build_rejections():
    with pytest.raises(ParameterError):
        build_spectral(V_SQ, 4.0, 2)
    with pytest.raises(DomainError):
        build_spectral(PowerPotential(-0.5), 4.0, 101)
    with pytest.raises(DomainError):
        build_spectral(PolynomialPotential([-1.0]), 4.0, 101)


def test_dirichlet_boundary_and_peak():
    assert dirichlet_interval_kernel(0.0, math.pi, 0.0, 1.0, 0.5).value == 0.0
    got = dirichlet_interval_kernel(0.0, math.pi, math.pi / 2, math.pi / 2, 10.0).value
    assert got == pytest.approx(2.0 / math.pi * math.exp(-10.0), rel=1e-12)
    with pytest.raises(ParameterError):
        dirichlet_interval_kernel(0.0, math.pi, -0.5, 1.0, 0.5)


def test_dirichlet_below_free_kernel():
    for x, y, t in [(0.3, 0.6, 0.05), (1.5, -1.5, 0.3), (0.0, 0.0, 1.0)]:
        gd = dirichlet_interval_kernel(-2.0, 2.0, x, y, t).value
        g = gaussian_kernel(1, x, y, t).value
        assert gd <= g * (1.0 + 1e-8)


def test_converged_kernel_against_oracles():
    got = converged_kernel(V_SQ, 0.0, 0.0, 0.5, rel_tol=1e-4)
    want = quadratic_kernel(QuadraticCoeffs(0, 0, 1), 0.0, 0.0, 0.5).value
    assert got.value == pytest.approx(want, rel=1e-3)
    free = converged_kernel(constant(0.0), 0.1, -0.4, 0.3, rel_tol=1e-4)
    assert free.value == pytest.approx(gaussian_kernel(1, 0.1, -0.4, 0.3).value, rel=1e-4)


def test_domain_monotonicity():
    a = cached_spectral(V_SQ, 4.0, 799)
    b = cached_spectral(V_SQ, 8.0, 1599)
    for x, y, t in [(0.0, 0.0, 0.3), (1.0, -0.5, 0.5), (2.0, 2.0, 1.0)]:
        va = eval_spectral(a, x, y, t).value
        vb = eval_spectral(b, x, y, t).value
        assert va <= vb * (1.0 + 1e-6) + 1e-8


def test_bounded_potential_comparison():
    # 0 <= V <= M on the box makes exp(-Mt) Gamma_D a lower bound for p_B
    K = cached_spectral(V_SQ, 2.0, 799)
    M = 4.0
    for x in np.linspace(-1.5, 1.5, 5):
        for y in np.linspace(-1.5, 1.5, 5):
            for t in (0.1, 0.5, 1.0):
                lhs = math.exp(-M * t) * dirichlet_interval_kernel(-2.0, 2.0, x, y, t).value
                pb = eval_spectral(K, x, y, t).value
                assert lhs <= pb * (1.0 + 1e-6)


def test_mass_bound(spectral_vxx1):
    for t in (0.05, 0.5, 1.0):
        assert spectral_vxx1.mass(0.0, t) <= 1.0 + 1e-8


def test_pde_residual_rates():
    grid = ProbeGrid(-1.0, 1.0, 0.3, 0.31, h=0.02, tau=2e-4)
    quad_K = lambda x, y, t: quadratic_kernel(QuadraticCoeffs(0, 0, 1), x, y, t)
    coarse = pde_residual(V_SQ, quad_K, 0.3, grid)
    fine = pde_residual(V_SQ, quad_K, 0.3, grid.refine())
    assert 3.5 <= coarse / fine <= 4.5

    free_K = lambda x, y, t: gaussian_kernel(1, x, y, t)
    coarse0 = pde_residual(constant(0.0), free_K, 0.3, grid)
    fine0 = pde_residual(constant(0.0), free_K, 0.3, grid.refine())
    assert 3.5 <= coarse0 / fine0 <= 4.5


def test_pde_residual_negative_control():
    grid = ProbeGrid(-1.0, 1.0, 0.3, 0.31, h=0.02, tau=2e-4)
    free_K = lambda x, y, t: gaussian_kernel(1, x, y, t)
    res = pde_residual(V_SQ, free_K, 0.3, grid)
    peak = max(
        abs(x * x * gaussian_kernel(1, x, 0.3, 0.3).value) for x in np.linspace(-1, 1, 101)
    )
    assert res > 0.1 * peak


def test_probe_grid_validation():
    with pytest.raises(ParameterError):
        ProbeGrid(-1.0, 1.0, 1e-5, 0.3, h=0.02, tau=2e-4)
    with pytest.raises(ParameterError):
        ProbeGrid(1.0, -1.0, 0.3, 0.4, h=0.02, tau=2e-4)


def test_semigroup_defects(spectral_free):
    quad_K = lambda x, y, t: quadratic_kernel(QuadraticCoeffs(0, 0, 1), x, y, t)
    assert semigroup_defect(quad_K, 0.0, 0.0, 0.25, 0.25) <= 1e-4
    gauss_K = lambda x, y, t: gaussian_kernel(1, x, y, t)
    assert semigroup_defect(gauss_K, 0.0, 0.0, 0.25, 0.25) <= 1e-10
    # discrete eigensum satisfies the identity exactly up to interpolation
    assert semigroup_defect(spectral_free, 0.3, -0.4, 0.2, 0.3) <= 1e-6


def test_orthonormality_defect(spectral_free):
    assert spectral_free.orthonormality_defect <= 1e-8


def test_separable_2d_product():
    from heatkernel.spectral import separable_kernel_2d

    g1 = lambda x, y, t: gaussian_kernel(1, x, y, t)
    k2 = separable_kernel_2d(g1, g1)
    got = k2((0.3, -0.2), (0.1, 0.5), 0.7)
    want = gaussian_kernel(2, (0.3, -0.2), (0.1, 0.5), 0.7)
    assert got.log_value == pytest.approx(want.log_value, rel=1e-14)
    # tensor-product quadratic: factors multiply in log-space
    q = lambda x, y, t: quadratic_kernel(QuadraticCoeffs(0, 0, 1), x, y, t)
    kq = separable_kernel_2d(q, g1)
    assert kq((1.0, 0.0), (0.0, 1.0), 0.5).log_value == pytest.approx(
        q(1.0, 0.0, 0.5).log_value + g1(0.0, 1.0, 0.5).log_value, rel=1e-14
    )


def test_spectral_below_free_kernel(spectral_vxx1):
    # nonnegative potential: the free Gaussian kernel dominates
    for x, y, t in [(0.0, 0.0, 0.05), (1.0, -0.5, 0.2), (2.0, 2.0, 1.0)]:
        ps = eval_spectral(spectral_vxx1, x, y, t).value
        g = gaussian_kernel(1, x, y, t).value
        assert ps <= g * (1.0 + 1e-10)


def test_converged_kernel_failure_carries_trace():
    from heatkernel import ConvergenceError

    with pytest.raises(ConvergenceError) as exc:
        converged_kernel(V_SQ, 0.0, 0.0, 0.5, rel_tol=0.0, max_doublings=1)
    assert len(exc.value.trace) == 2  # one evaluation per domain tried


def test_semigroup_defect_underflow_falls_back_to_absolute():
    gauss_K = lambda x, y, t: gaussian_kernel(1, x, y, t)
    # direct value underflows at huge separation; absolute defect returned
    d = semigroup_defect(gauss_K, -60.0, 60.0, 0.05, 0.05, L=80.0)
    assert 0.0 <= d < 1e-300

"""Biorthogonal decompositions and derived static observables."""

import numpy as np
import pytest

from nhchain import (
    BiorthogonalizationError,
    HamiltonianMatrix,
    ModelParams,
    build_fock_basis,
    build_many_body,
    build_single_particle,
    cdw_order,
    decompose,
    density_profile,
    fock_ipr,
    imag_fraction,
    ipr,
    ipr_per_state,
    static_observables,
)


def biorth_residual(d):
    return np.abs(d.left @ d.right - np.eye(d.dim)).max()


def completeness_residual(d):
    return np.abs(d.right @ d.left - np.eye(d.dim)).max()


def test_two_site_obc_eigenvalues_unit():
    # H = [[0, -e^g], [-e^-g, 0]] has eigenvalues +-1 for every g
    for g in (0.0, 0.3, 1.5):
        d = decompose(build_single_particle(ModelParams(L=2, g=g, bc="obc")))
        assert np.allclose(np.sort(d.eigenvalues.real), [-1.0, 1.0], atol=1e-14)
        assert np.all(d.eigenvalues.imag == 0.0)


def test_hermitian_left_equals_right_dagger():
    d = decompose(build_single_particle(ModelParams(L=13, g=0.0, W=1.3, bc="pbc")))
    assert np.array_equal(d.left, d.right.conj().T)
    assert biorth_residual(d) < 1e-12


def test_similarity_route_biorthogonal_exactly():
    # left entries grow like e^{g S}, so completeness carries that scale
    d = decompose(build_single_particle(ModelParams(L=20, g=1.0, W=3.0, bc="obc")))
    assert biorth_residual(d) < 1e-10
    assert completeness_residual(d) < 1e-8


@pytest.mark.parametrize("seed", [20250813])
def test_general_route_residuals_random_points(seed):
    rng = np.random.default_rng(seed)
    worst_b = worst_c = 0.0
    for _ in range(20):
        g = rng.uniform(0.05, 1.0)
        W = rng.uniform(0.0, 8.0)
        theta0 = rng.uniform(0.0, 2.0 * np.pi)
        p = ModelParams(L=55, g=g, W=W, theta0=theta0, bc="pbc")
        d = decompose(build_single_particle(p))
        worst_b = max(worst_b, biorth_residual(d))
        worst_c = max(worst_c, completeness_residual(d))
    assert worst_b < 1e-12
    assert worst_c < 1e-11


def test_eigenvalue_collision_raises():
    # hand-built defective-adjacent spectrum pushed through the general route
    p = ModelParams(L=2, g=0.5, bc="pbc")
    H = HamiltonianMatrix(dim=2, entries=np.diag([1.0, 1.0 + 1e-13]).astype(complex), params=p)
    with pytest.raises(BiorthogonalizationError):
        decompose(H)


def test_ipr_bounds():
    assert ipr(np.ones(8) / np.sqrt(8)) == pytest.approx(1.0 / 8.0)
    delta = np.zeros(8)
    delta[3] = 1.0
    assert ipr(delta) == pytest.approx(1.0)
    assert ipr(np.array([2.0, 0.0])) == pytest.approx(1.0)   # normalizes defensively
    with pytest.raises(ValueError):
        ipr(np.zeros(4))


def test_skin_state_ipr_large_chain():
    # localized regime on top of the skin effect keeps states compact
    d = decompose(build_single_particle(ModelParams(L=55, g=1.0, W=0.5, bc="obc")))
    lowest = d.right[:, int(np.argmin(d.eigenvalues.real))]
    assert ipr(lowest) > 0.3


def test_imag_fraction_transition():
    low = decompose(build_single_particle(ModelParams(L=89, g=0.5, W=0.1, bc="pbc")))
    high = decompose(build_single_particle(ModelParams(L=89, g=0.5, W=6.0, bc="pbc")))
    assert imag_fraction(low) > 0.95
    assert imag_fraction(high) == 0.0


def test_density_profile_fock_state():
    basis = build_fock_basis(8, 4)
    wall = np.zeros(basis.dim, dtype=complex)
    wall[basis.index_of[0b11110000]] = 1.0
    dens = density_profile(wall, basis)
    assert np.allclose(dens, [0, 0, 0, 0, 1, 1, 1, 1], atol=1e-15)


def test_density_profile_single_particle():
    psi = np.array([1.0, 1.0j, 0.0, 0.0]) / np.sqrt(2.0)
    assert np.allclose(density_profile(psi), [0.5, 0.5, 0.0, 0.0], atol=1e-15)


def test_average_density_skews_left_for_positive_g():
    basis = build_fock_basis(8, 4)
    p = ModelParams(L=8, N=4, g=0.5, V=2.0, W=0.0, bc="obc")
    obs = static_observables(decompose(build_many_body(p, basis)), basis)
    left = obs.density[:4].sum()
    assert obs.density.sum() == pytest.approx(4.0, abs=1e-9)
    assert left == pytest.approx(3.058, abs=2e-3)
    assert left > 4.0 - left


def test_fock_ipr_scale_separation():
    basis = build_fock_basis(12, 6)
    p = ModelParams(L=12, N=6, g=0.5, V=2.0, W=0.5, bc="obc")
    mb = float(np.mean(ipr_per_state(decompose(build_many_body(p, basis)))))
    sp = float(np.mean(ipr_per_state(decompose(build_single_particle(
        ModelParams(L=12, g=0.5, W=0.5, bc="obc"))))))
    assert mb == pytest.approx(0.1641, abs=2e-3)
    assert sp == pytest.approx(0.4635, abs=2e-3)
    assert mb < sp   # Fock-space spreading dilutes single-state weight
    assert fock_ipr(np.ones(basis.dim) / np.sqrt(basis.dim)) == pytest.approx(1.0 / basis.dim)


def test_cdw_order():
    assert cdw_order(np.array([1.0, 0.0, 1.0, 0.0])) == pytest.approx(0.5)
    assert cdw_order(np.full(6, 0.5)) == pytest.approx(0.0)


def test_static_observables_shapes():
    p = ModelParams(L=10, g=0.5, W=1.0, bc="pbc")
    obs = static_observables(decompose(build_single_particle(p)))
    assert obs.ipr_per_state.shape == (10,)
    assert obs.density.shape == (10,)
    assert 0.0 <= obs.f_im <= 1.0
    assert obs.o_dw >= 0.0


def test_mode_coefficients_invert_expansion():
    p = ModelParams(L=12, g=0.4, W=0.8, bc="pbc")
    d = decompose(build_single_particle(p))
    rng = np.random.default_rng(3)
    psi = rng.normal(size=12) + 1j * rng.normal(size=12)
    c = d.mode_coefficients(psi)
    assert np.allclose(d.right @ c, psi, atol=1e-10)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from padicmind.grid import StateVector, make_grid, omega, plane_wave, tensor_state
from padicmind.padic import BaseConfig
from padicmind.transform import (DualGridMap, character_matrix, fast_fourier, fourier,
                                 inverse_fourier, multiplier_operator, reflect)


def character_oracle(g):
    """Dense kernel built from exact p-adic characters of representatives."""
    d = g.dual()
    out = np.empty((d.size, g.size), dtype=complex)
    for k in range(d.size):
        xi = d.axis_representative(k)
        for j in range(g.size):
            x = g.axis_representative(j)
            out[k, j] = 1 if xi.is_zero or x.is_zero else (xi * x).character()
    return out * g.cell_measure


def rand_state(g, seed):
    rng = np.random.default_rng(seed)
    return StateVector(g, rng.normal(size=g.size) + 1j * rng.normal(size=g.size))


@pytest.mark.parametrize("p,N,M", [(2, 1, 2), (3, 1, 1), (5, 0, 2), (2, 2, 0)])
def test_dense_matches_character_oracle(p, N, M):
    g = make_grid(BaseConfig(p), N, M)
    assert np.allclose(character_matrix(g), character_oracle(g), atol=1e-13)


@pytest.mark.parametrize("p,N,M,d", [(2, 3, 3, 1), (3, 2, 2, 1), (5, 1, 2, 1), (7, 1, 1, 1),
                                     (2, 1, 2, 2), (3, 1, 1, 2)])
def test_fast_equals_dense_on_basis(p, N, M, d):
    g = make_grid(BaseConfig(p), N, M, d)
    eye = np.eye(g.size)
    F = character_matrix(g)
    fast = np.column_stack([fast_fourier(StateVector(g, eye[:, k])).coeffs for k in range(g.size)])
    assert np.max(np.abs(fast - F)) <= 1e-10


def test_two_axis_is_kronecker_of_one_axis():
    g = make_grid(BaseConfig(3), 1, 1)
    a, b = rand_state(g, 1), rand_state(g, 2)
    t = fourier(tensor_state(a, b), method="fast")
    want = np.multiply.outer(fourier(a).coeffs, fourier(b).coeffs).ravel()
    assert np.allclose(t.coeffs, want)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([(2, 2, 2), (3, 1, 2), (5, 1, 1)]))
def test_plancherel_and_inversion(seed, shape):
    g = make_grid(BaseConfig(shape[0]), shape[1], shape[2])
    phi = rand_state(g, seed)
    for method in ("dense", "fast"):
        ft = fourier(phi, method)
        assert ft.grid == g.dual()
        assert ft.norm() == pytest.approx(phi.norm(), rel=1e-12)
        back = inverse_fourier(ft, method)
        assert np.allclose(back.coeffs, phi.coeffs, atol=1e-12)


@pytest.mark.parametrize("p,N,M", [(2, 2, 2), (3, 1, 2), (5, 2, 1)])
def test_ball_indicator_transforms(p, N, M):
    g = make_grid(BaseConfig(p), N, M)
    assert np.max(np.abs(fourier(omega(g, 0)).coeffs - omega(g.dual(), 0).coeffs)) <= 1e-12
    for m in range(-M, N + 1):
        ft = fourier(omega(g, m)).coeffs
        assert np.allclose(ft, p**m * omega(g.dual(), -m).coeffs, atol=1e-12)


def test_plane_wave_transforms_to_point_mass():
    cfg = BaseConfig(3)
    g = make_grid(cfg, 1, 1)
    d = g.dual()
    for k in range(d.size):
        xi = d.axis_representative(k)
        ft = fourier(plane_wave(xi, g)).coeffs
        # e(xi x) has transform concentrated on the cell of -xi
        mass = np.abs(ft) ** 2
        assert np.count_nonzero(mass > 1e-12) == 1


def test_reflect_is_involution_and_conjugates_transform():
    g = make_grid(BaseConfig(5), 1, 1)
    phi = rand_state(g, 4)
    assert np.allclose(reflect(reflect(phi)).coeffs, phi.coeffs)
    assert np.allclose(fourier(reflect(phi)).coeffs, reflect(fourier(phi)).coeffs)


def test_multiplier_operator_matches_direct_conjugation():
    g = make_grid(BaseConfig(2), 2, 2)
    lam = np.random.default_rng(1).normal(size=g.size)
    F = character_matrix(g)
    Finv = character_matrix(g.dual(), -1)
    assert np.allclose(multiplier_operator(g, lam), Finv @ np.diag(lam) @ F, atol=1e-12)


def test_dual_grid_map_and_errors():
    g = make_grid(BaseConfig(2), 1, 3)
    m = DualGridMap.of(g)
    assert (m.target.N, m.target.M) == (3, 1)
    with pytest.raises(ValueError):
        DualGridMap(g, g)
    with pytest.raises(ValueError):
        fourier(rand_state(g, 0), method="slow")


def test_transform_deterministic():
    g = make_grid(BaseConfig(3), 2, 2)
    phi = rand_state(g, 9)
    assert np.array_equal(fast_fourier(phi).coeffs, fast_fourier(phi).coeffs)

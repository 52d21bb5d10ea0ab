from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from padicmind.grid import (GridMismatchError, GridSizeError, StateVector, all_balls, ball_mask,
                            cell_index_of, cells, encode_spike_train, from_empirical,
                            indicator_state, inner, integrate, make_grid, norm2, omega,
                            plane_wave, tensor_state, uniform_state)
from padicmind.padic import Ball, BaseConfig, PadicNumber, distance, encode

GRIDS = [(2, 1, 1), (2, 0, 3), (3, 1, 1), (3, 0, 2), (5, 1, 1), (2, 2, 2)]


def test_cell_representatives_p2():
    g = make_grid(BaseConfig(2), 1, 1)
    reps = [c.representative[0].to_fraction() for c in cells(g)]
    assert reps == [0, 1, Fraction(1, 2), Fraction(3, 2)]
    assert g.cell_measure == 0.5


def test_grid_counts_and_measure():
    g = make_grid(BaseConfig(3), 0, 2)
    assert g.size == 9
    assert all(c.representative[0].norm() <= 1 for c in cells(g))
    g2 = make_grid(BaseConfig(2), 1, 2, d=2)
    assert g2.size == 64 and g2.total_measure == pytest.approx(4.0)
    assert integrate(g2, np.ones(g2.size)) == pytest.approx(4.0)


def test_size_limit_and_invalid():
    with pytest.raises(GridSizeError):
        make_grid(BaseConfig(2), 6, 7)
    with pytest.raises(ValueError):
        make_grid(BaseConfig(2), 0, 0)
    assert make_grid(BaseConfig(2), 6, 7, max_cells=10**4).size == 8192


@pytest.mark.parametrize("p,N,M", GRIDS)
def test_cell_index_round_trip(p, N, M):
    g = make_grid(BaseConfig(p), N, M)
    for c in cells(g):
        assert cell_index_of(g, c.representative) == c.index


@pytest.mark.parametrize("p,N,M", GRIDS)
def test_ball_masks_match_membership(p, N, M):
    g = make_grid(BaseConfig(p), N, M)
    reps = [c.representative[0] for c in cells(g)]
    for ball, mask in all_balls(g):
        want = np.array([ball.contains(x) for x in reps])
        assert np.array_equal(mask, want)
        assert integrate(g, mask) == pytest.approx(float(ball.radius), abs=1e-14)


def test_ball_mask_errors():
    g = make_grid(BaseConfig(2), 1, 1)
    zero = PadicNumber.zero(g.cfg)
    with pytest.raises(GridSizeError):
        ball_mask(g, Ball(zero, -2))
    with pytest.raises(GridSizeError):
        ball_mask(g, Ball(zero, 2))


def test_indicator_examples():
    g = make_grid(BaseConfig(2), 1, 1)
    assert np.array_equal(omega(g, 0).coeffs, [1, 1, 0, 0])
    for m in (-1, 0, 1):
        assert norm2(omega(g, m)) == pytest.approx(2.0**m)
        assert omega(g, m, normalized=True).norm() == pytest.approx(1.0)


def test_uniform_ball_probability_exact():
    for p in (2, 3, 5):
        g = make_grid(BaseConfig(p), 0, 2)
        phi = uniform_state(g)
        for ball, mask in all_balls(g):
            assert integrate(g, phi.probabilities() * mask) == pytest.approx(
                float(ball.radius), abs=1e-12)


def test_integrate_examples():
    g = make_grid(BaseConfig(3), 0, 2)
    z = PadicNumber.zero(g.cfg)
    assert integrate(g, indicator_state(g, Ball(z, -1))) == pytest.approx(1 / 3)
    with pytest.raises(GridMismatchError):
        integrate(g, np.ones(3))


def rand_state(g, seed):
    rng = np.random.default_rng(seed)
    return StateVector(g, rng.normal(size=g.size) + 1j * rng.normal(size=g.size))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 2**31))
def test_inner_product_laws(s1, s2):
    g = make_grid(BaseConfig(3), 1, 1)
    a, b = rand_state(g, s1), rand_state(g, s2)
    assert inner(a, b) == pytest.approx(np.conj(inner(b, a)))
    assert inner(a, a).real >= 0 and abs(inner(a, a).imag) < 1e-12
    assert abs(inner(a, b)) <= np.sqrt(norm2(a) * norm2(b)) + 1e-12
    # direct cell sum
    mu = 1 / 3
    assert inner(a, b) == pytest.approx(sum(x * np.conj(y) for x, y in zip(a.coeffs, b.coeffs)) * mu)
    lin = integrate(g, a.coeffs + 2 * b.coeffs)
    assert lin == pytest.approx(integrate(g, a.coeffs) + 2 * integrate(g, b.coeffs))


def test_inner_omega_uniform():
    g = make_grid(BaseConfig(2), 2, 1)
    # (Omega_1, u) = measure(Z_2) / sqrt(total measure)
    assert inner(omega(g, 0), uniform_state(g)) == pytest.approx(1 / 2)


@pytest.mark.parametrize("p,N,M", [(2, 1, 2), (3, 1, 1), (5, 0, 2)])
def test_plane_wave_phase_matches_characters(p, N, M):
    cfg = BaseConfig(p)
    g = make_grid(cfg, N, M)
    h = encode(1, cfg).shift(1)
    for k in range(g.dual().size):
        eta = g.dual().axis_representative(k)
        xi = eta / h if not eta.is_zero else eta
        w = plane_wave(xi, g, h)
        want = [(h * xi * c.representative[0]).character() if not xi.is_zero else 1
                for c in cells(g)]
        assert np.allclose(w.coeffs, want, atol=1e-13)
        assert np.allclose(np.abs(w.coeffs), 1)


def test_plane_wave_zero_and_unrepresentable():
    cfg = BaseConfig(2)
    g = make_grid(cfg, 1, 1)
    assert np.allclose(plane_wave(PadicNumber.zero(cfg), g).coeffs, 1)
    with pytest.raises(ValueError):
        plane_wave(encode(1, cfg).shift(-2), g)


def test_from_empirical():
    g = make_grid(BaseConfig(2), 0, 2)
    u = from_empirical(g, [3, 3, 3, 3])
    assert np.allclose(u.coeffs, uniform_state(g).coeffs)
    c = np.array([1.0, 0.0, 2.0, 5.0])
    phi = from_empirical(g, c, phase=[0.3, 1.0, -2.0, 0.1])
    assert np.allclose(phi.probabilities(), c / c.sum() / g.cell_measure)
    assert np.allclose(phi.probabilities(), from_empirical(g, c).probabilities())
    assert phi.norm() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        from_empirical(g, [0, 0, 0, 0])


def test_encode_spike_train():
    cfg = BaseConfig(2)
    assert encode_spike_train([1, 0, 1], cfg) == encode(5, cfg)
    assert encode_spike_train([0, 0, 0], cfg).is_exact_zero
    with pytest.raises(ValueError):
        encode_spike_train([2], cfg)
    a = encode_spike_train([1, 0, 1, 1, 0, 0, 1], cfg)
    b = encode_spike_train([1, 0, 1, 1, 0, 1, 1], cfg)
    assert distance(a, b) == Fraction(1, 32)


def test_spike_train_injective():
    cfg = BaseConfig(3)
    from itertools import product
    seen = set()
    for counts in product(range(3), repeat=4):
        x = encode_spike_train(counts, cfg)
        seen.add(x.to_fraction())
    assert len(seen) == 81


def test_tensor_state_norm():
    g = make_grid(BaseConfig(2), 1, 1)
    a, b = rand_state(g, 1).normalized(), rand_state(g, 2).normalized()
    t = tensor_state(a, b)
    assert t.grid.d == 2 and t.norm() == pytest.approx(1.0)


def test_state_is_immutable_value():
    g = make_grid(BaseConfig(2), 1, 1)
    s = uniform_state(g)
    with pytest.raises(ValueError):
        s.coeffs[0] = 2
    with pytest.raises(GridMismatchError):
        s + uniform_state(make_grid(BaseConfig(3), 1, 1))

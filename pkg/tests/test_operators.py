from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from padicmind.grid import GridMismatchError, StateVector, cells, make_grid, omega, plane_wave
from padicmind.operators import (NotHermitianError, OperatorMatrix, PlanckConstant, commutator,
                                 group_levels, hamiltonian, motivation_magnitude,
                                 neuron_activation, position_magnitude, potential_abs2, spectrum,
                                 spectrum_law, vladimirov_integral, vladimirov_multiplier,
                                 zero_mode_value)
from padicmind.padic import BaseConfig, distance


def enumerated_multiset(g, alpha):
    """Frequency norms of dual representatives, counted one by one."""
    d = g.dual()
    c = Counter()
    for k in range(d.size):
        xi = d.axis_representative(k)
        c[float(xi.norm()) ** alpha] += 1
    return c


@pytest.mark.parametrize("p,N,M", [(2, 1, 2), (2, 2, 2), (3, 1, 1), (5, 0, 2), (3, 2, 1)])
@pytest.mark.parametrize("alpha", [1.0, 2.0, 0.5])
def test_spectrum_matches_enumeration(p, N, M, alpha):
    g = make_grid(BaseConfig(p), N, M)
    dec = spectrum(vladimirov_multiplier(g, alpha))
    enum = enumerated_multiset(g, alpha)
    want = np.sort(np.concatenate([[v] * m for v, m in enum.items()]))
    assert np.max(np.abs(dec.eigenvalues - want)) <= 1e-9
    assert dict(spectrum_law(g, alpha)) == pytest.approx(dict(enum))
    assert sum(m for _, m in dec.levels()) == p ** (N + M)
    assert dec.max_residual <= 1e-9 and dec.orthonormality_error <= 1e-10


def test_spectrum_law_small_case():
    g = make_grid(BaseConfig(2), 1, 2)
    assert spectrum_law(g, 1.0) == [(0.0, 1), (1.0, 1), (2.0, 2), (4.0, 4)]


def test_degeneracy_grows_with_level():
    for p in (2, 3):
        g = make_grid(BaseConfig(p), 2, 2)
        mults = [m for _, m in spectrum(vladimirov_multiplier(g, 2.0)).levels()][1:]
        assert all(b > a for a, b in zip(mults, mults[1:]))


def test_vladimirov_kills_constants_and_rejects_bad_alpha():
    g = make_grid(BaseConfig(3), 1, 2)
    D = vladimirov_multiplier(g)
    assert np.max(np.abs(D.entries @ np.ones(g.size))) <= 1e-12
    with pytest.raises(ValueError):
        vladimirov_multiplier(g, 0.0)
    with pytest.raises(ValueError):
        vladimirov_multiplier(g, 1.0, zero_mode="bogus")


@pytest.mark.parametrize("p,N,M", [(2, 2, 2), (3, 1, 1)])
def test_free_wave_eigenrelation(p, N, M):
    cfg = BaseConfig(p)
    g = make_grid(cfg, N, M)
    D = vladimirov_multiplier(g)
    for k in range(g.dual().size):
        xi = g.dual().axis_representative(k)
        w = plane_wave(xi, g)
        assert (D.apply(w) - w * float(xi.norm())).norm() <= 1e-10


def integral_oracle(g, tail=True):
    """Integral form from p-adic distances of representatives."""
    p = g.p
    C = p * p / (p + 1)
    reps = [c.representative[0] for c in cells(g)]
    n = len(reps)
    mat = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                mat[i, j] = -C * g.cell_measure / float(distance(reps[i], reps[j])) ** 2
    for i in range(n):
        mat[i, i] = -mat[i].sum() + (C * p ** -(g.N + 1) if tail else 0.0)
    return mat


@pytest.mark.parametrize("p,N,M", [(2, 2, 2), (3, 1, 1), (5, 1, 1)])
def test_integral_form_matches_oracle_and_multiplier(p, N, M):
    g = make_grid(BaseConfig(p), N, M)
    Di = vladimirov_integral(g)
    assert np.allclose(Di.entries, integral_oracle(g), atol=1e-13)
    Dm = vladimirov_multiplier(g, 1.0, zero_mode="cell_average")
    assert np.max(np.abs(Di.entries - Dm.entries)) <= 1e-8
    # without the tail the two forms differ by the zero-cell constant
    Dn = vladimirov_integral(g, tail_corrected=False)
    z = zero_mode_value(g, 1.0)
    assert np.allclose(Dn.entries, Dm.entries - z * np.eye(g.size), atol=1e-12)
    assert np.allclose(vladimirov_integral(g, False).entries, integral_oracle(g, False))


def test_omega_spot_value():
    for p in (2, 3, 5):
        g = make_grid(BaseConfig(p), 2, 1)
        v = vladimirov_integral(g).apply(omega(g, 0)).coeffs[0]
        assert v == pytest.approx(p / (p + 1), abs=1e-10)


def test_zero_mode_value_alpha1():
    g = make_grid(BaseConfig(2), 3, 1)
    assert zero_mode_value(g, 1.0) == pytest.approx(2**-3 * 2 / 3)


def test_position_and_activation():
    g = make_grid(BaseConfig(3), 1, 1)
    Mq = position_magnitude(g)
    A = neuron_activation(g)
    reps = [c.representative[0] for c in cells(g)]
    assert np.allclose(np.diag(Mq.entries).real, [float(x.norm()) for x in reps])
    for x, a in zip(reps, np.diag(A.entries).real):
        if x.is_zero:
            assert a == g.M + 1
        else:
            assert a == x.valuation
    assert commutator(Mq, A).norm() == 0


def test_commutator_nonzero_and_antihermitian():
    g = make_grid(BaseConfig(3), 1, 1)
    C = commutator(position_magnitude(g), motivation_magnitude(g, PlanckConstant(3, 1)))
    assert C.norm() > 0
    iC = 1j * C.entries
    assert np.max(np.abs(iC - iC.conj().T)) <= 1e-12


def test_planck_constant():
    h = PlanckConstant(3, 2)
    assert h.value == pytest.approx(1 / 9)
    assert h.padic(BaseConfig(3)).norm() == 9
    g = make_grid(BaseConfig(3), 1, 1)
    assert np.allclose(motivation_magnitude(g, h).entries, vladimirov_multiplier(g).entries / 9)


def test_hamiltonian_structure():
    g = make_grid(BaseConfig(2), 1, 1, d=2)
    H = hamiltonian(g, 1.0, potential_abs2(g))
    assert H.hermiticity_error() <= 1e-12
    d2 = vladimirov_multiplier(g.axis(), 2.0).entries
    eye = np.eye(g.n_axis)
    want = np.kron(d2, eye) + np.kron(eye, d2) + np.diag(potential_abs2(g))
    assert np.allclose(H.entries, want)
    with pytest.raises(ValueError):
        hamiltonian(g, 1.0, np.ones(g.size) * 1j)
    with pytest.raises(GridMismatchError):
        hamiltonian(g, 1.0, np.ones(3))


@pytest.mark.parametrize("p,N,M", [(2, 2, 2), (3, 1, 1)])
def test_ground_state_simple(p, N, M):
    g = make_grid(BaseConfig(p), N, M)
    ev = spectrum(hamiltonian(g, 1.0, potential_abs2(g))).eigenvalues
    assert (ev[1] - ev[0]) / ev[0] > 1e-6


def test_operator_matrix_validation():
    g = make_grid(BaseConfig(2), 1, 1)
    with pytest.raises(NotHermitianError):
        OperatorMatrix(g, np.triu(np.ones((4, 4))), hermitian=True)
    op = OperatorMatrix(g, np.triu(np.ones((4, 4))))
    with pytest.raises(NotHermitianError):
        spectrum(op)


def test_group_levels_tolerance():
    assert group_levels(np.array([0.0, 1.0, 1.0 + 1e-12, 2.0])) == ((0, 1), (1, 3), (3, 4))
    assert group_levels(np.array([1.0, 1.001]), tau=1e-2) == ((0, 2),)


def test_projectors_resolve_identity():
    g = make_grid(BaseConfig(3), 1, 1)
    dec = spectrum(vladimirov_multiplier(g))
    total = sum(dec.projector(k) for k in range(len(dec.groups)))
    assert np.allclose(total, np.eye(g.size))


def test_eigenvectors_deterministic():
    g = make_grid(BaseConfig(2), 2, 2)
    H = hamiltonian(g, 1.0, potential_abs2(g))
    a, b = spectrum(H), spectrum(H)
    assert np.array_equal(a.vectors, b.vectors)
    v = a.eigenvector(0)
    assert isinstance(v, StateVector) and v.norm() == pytest.approx(1.0)

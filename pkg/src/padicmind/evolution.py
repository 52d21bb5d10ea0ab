"""Schrödinger-type evolution and derived quantities (averages, entropy,
quantum-like potential, consciousness measure)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec, StateVector
from .operators import OperatorMatrix, SpectralDecomposition, spectrum, vladimirov_multiplier


@dataclass(frozen=True)
class EvolutionResult:
    times: np.ndarray
    states: tuple = field(repr=False)
    norms: np.ndarray = field(repr=False)

    def probabilities(self) -> np.ndarray:
        """``P(t, x)`` as an array of shape (times, cells)."""
        return np.array([s.probabilities() for s in self.states])


def evolve(phi0: StateVector, H: OperatorMatrix, h, times, sign: int = +1,
           decomposition: SpectralDecomposition | None = None) -> EvolutionResult:
    """Propagate ``i h dphi/dt = H phi`` exactly through the eigenbasis of H.

    Stationary states pick up ``exp(sign * i E t / h)``; ``sign=+1`` follows
    the convention used for free mental waves, ``sign=-1`` is the textbook one.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    H.grid.check_same(phi0.grid)
    if not H.hermitian:
        raise ValueError("Hamiltonian must be Hermitian")
    if abs(phi0.norm() - 1) > 1e-10:
        raise ValueError("initial state must be normalized")
    hv = float(getattr(h, "value", h))
    dec = decomposition or spectrum(H)
    mu = H.grid.cell_measure
    basis = dec.vectors * np.sqrt(mu)  # unit columns in the plain metric
    c = basis.conj().T @ (phi0.coeffs * np.sqrt(mu))
    times = np.asarray(times, dtype=float)
    phases = np.exp(sign * 1j * np.outer(times, dec.eigenvalues) / hv)
    coeffs = (phases * c) @ basis.T / np.sqrt(mu)
    states = tuple(phi0.with_coeffs(row, label=f"{phi0.label}(t)") for row in coeffs)
    norms = np.sqrt(np.sum(np.abs(coeffs) ** 2, axis=1) * mu)
    return EvolutionResult(times, states, norms)


def average(A: OperatorMatrix, phi: StateVector) -> float:
    """``<A>_phi = int (A phi)(x) conj(phi(x)) dx``."""
    A.grid.check_same(phi.grid)
    val = np.vdot(phi.coeffs, A.entries @ phi.coeffs) * phi.grid.cell_measure
    if A.hermitian and abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
        raise ArithmeticError(f"average of Hermitian operator has imaginary part {val.imag}")
    return float(val.real)


def entropy(grid: GridSpec, P) -> float:
    """``E_P = -int log_p(P) P dq`` with ``0 log 0 = 0``."""
    P = np.asarray(P, dtype=float).reshape(-1)
    if P.size != grid.size:
        raise ValueError("density does not match grid")
    if np.any(P < 0):
        raise ValueError("density must be nonnegative")
    total = P.sum() * grid.cell_measure
    if abs(total - 1) > 1e-10:
        raise ValueError(f"density integrates to {total}, not 1")
    live = P > 0
    return float(-np.sum(P[live] * np.log(P[live])) / np.log(grid.p) * grid.cell_measure)


def bohm_potential(phi: StateVector, h=1.0, eps: float = 1e-12):
    """``W = -(h^2 / R) D^2 R`` with ``R = |phi|``; cells where ``R <= eps``
    are masked (the expression is undefined there).

    Returns ``(W, valid)``; ``W`` is NaN outside ``valid``.
    """
    if phi.grid.d != 1:
        raise ValueError("bohm_potential is implemented for d = 1")
    hv = float(getattr(h, "value", h))
    R = np.abs(phi.coeffs)
    d2 = vladimirov_multiplier(phi.grid, 2.0).entries
    d2R = (d2 @ R).real
    valid = R > eps
    W = np.full(R.shape, np.nan)
    W[valid] = -hv * hv * d2R[valid] / R[valid]
    return W, valid


def consciousness_measure(evolution: EvolutionResult) -> np.ndarray:
    """``int (|D_x P|^2 + |dP/dt|^2) dx`` at each sample time.

    ``D_x`` is the Vladimirov operator (infimum zero mode) applied to the
    real field P; ``dP/dt`` uses central differences inside the time grid
    and first-order one-sided differences at its ends.
    """
    t = np.asarray(evolution.times, dtype=float)
    if t.size < 2:
        raise ValueError("need at least two time samples")
    steps = np.diff(t)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise ValueError("time grid must be uniform")
    grid = evolution.states[0].grid
    if grid.d != 1:
        raise ValueError("consciousness_measure is implemented for d = 1")
    P = evolution.probabilities()
    D = vladimirov_multiplier(grid, 1.0).entries
    DP = P @ D.T
    dPdt = np.gradient(P, t, axis=0, edge_order=1)
    mu = grid.cell_measure
    return (np.sum(np.abs(DP) ** 2, axis=1) + np.sum(dPdt ** 2, axis=1)) * mu

"""Observables on a grid: Vladimirov operators, magnitudes, Hamiltonians.

All operators are dense matrices acting on coefficient vectors in cell
order.  The Haar measure is uniform across cells, so matrix Hermiticity is
the same as self-adjointness for the grid inner product.

Zero-mode conventions
---------------------
A multiplier such as ``|xi|_p^alpha`` is not constant on the zero cell
``B_{p^-N}(0)`` of the dual grid.  ``"infimum"`` puts 0 there, which keeps
the point spectrum ``{0} U {p^(alpha k)}``.  ``"cell_average"`` puts the
cell mean of the multiplier there; this is the exact restriction of the
continuum operator to grid functions and is what the integral
representation reproduces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .grid import GridMismatchError, GridSpec, StateVector, int_valuation
from .padic import BaseConfig, PadicNumber
from .transform import multiplier_operator

ZERO_MODES = ("infimum", "cell_average")
DEFAULT_TAU_DEG = 1e-7


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class PlanckConstant:
    """``h = p^-m``; real-valued in operators, p-adic inside characters."""

    p: int
    m: int = 0

    @property
    def value(self) -> float:
        return float(Fraction(self.p) ** (-self.m))

    def padic(self, cfg: BaseConfig) -> PadicNumber:
        if cfg.p != self.p:
            raise ValueError("prime mismatch")
        return PadicNumber.from_digits(cfg, -self.m, [1])


def _h_value(h) -> float:
    if isinstance(h, PlanckConstant):
        return h.value
    return float(h)


@dataclass(frozen=True)
class OperatorMatrix:
    grid: GridSpec
    entries: np.ndarray = field(repr=False)
    hermitian: bool = False
    label: str = ""

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.shape != (self.grid.size, self.grid.size):
            raise ValueError(f"operator must be {self.grid.size}x{self.grid.size}")
        if self.hermitian:
            dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
            if dev > 1e-12 * max(1.0, np.max(np.abs(a))):
                raise NotHermitianError(f"{self.label}: asymmetry {dev:.3e}")
            a = 0.5 * (a + a.conj().T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    def apply(self, phi: StateVector) -> StateVector:
        self.grid.check_same(phi.grid)
        return phi.with_coeffs(self.entries @ phi.coeffs)

    def __matmul__(self, other):
        if isinstance(other, StateVector):
            return self.apply(other)
        self.grid.check_same(other.grid)
        return OperatorMatrix(self.grid, self.entries @ other.entries,
                              label=f"{self.label}{other.label}")

    def __add__(self, other):
        self.grid.check_same(other.grid)
        return OperatorMatrix(self.grid, self.entries + other.entries,
                              self.hermitian and other.hermitian,
                              f"{self.label}+{other.label}")

    def __sub__(self, other):
        self.grid.check_same(other.grid)
        return OperatorMatrix(self.grid, self.entries - other.entries,
                              self.hermitian and other.hermitian,
                              f"{self.label}-{other.label}")

    def scaled(self, c: float) -> "OperatorMatrix":
        herm = self.hermitian and np.isreal(c)
        return OperatorMatrix(self.grid, self.entries * c, herm, f"{c}*{self.label}")

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.grid, self.entries.conj().T, self.hermitian,
                              f"{self.label}^+")

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def norm(self) -> float:
        """Spectral (operator 2-) norm."""
        return float(np.linalg.norm(self.entries, 2))


# -- multipliers ------------------------------------------------------------

def frequency_norms(grid: GridSpec) -> np.ndarray:
    """``|xi|_p`` (max-norm over axes) on the dual grid, zero cell = 0."""
    return grid.dual().norms()


def zero_mode_value(grid: GridSpec, alpha: float) -> float:
    """Mean of ``|xi|^alpha`` over the dual zero cell ``B_{p^-N}(0)`` (d = 1).

    ``p^(-N alpha) (1 - 1/p) / (1 - p^(-alpha-1))``.
    """
    p, N = grid.p, grid.N
    return p ** (-N * alpha) * (1 - 1 / p) / (1 - p ** (-alpha - 1))


def vladimirov_multiplier(grid: GridSpec, alpha: float = 1.0,
                          zero_mode: str = "infimum") -> OperatorMatrix:
    """``D^alpha = F^-1 |xi|_p^alpha F`` on a one-dimensional grid."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if grid.d != 1:
        raise ValueError("vladimirov_multiplier acts on one axis; use hamiltonian for d > 1")
    if zero_mode not in ZERO_MODES:
        raise ValueError(f"zero_mode must be one of {ZERO_MODES}")
    lam = frequency_norms(grid) ** alpha
    zero = grid.dual().naturals() == 0
    lam[zero] = 0.0 if zero_mode == "infimum" else zero_mode_value(grid, alpha)
    mat = multiplier_operator(grid, lam)
    return OperatorMatrix(grid, mat, hermitian=True, label=f"D^{alpha:g}")


def integral_constant(p: int) -> float:
    """``p^2 / (p + 1)``, the prefactor of the integral form of D."""
    return p * p / (p + 1)


def tail_constant(grid: GridSpec) -> float:
    """``int_{|y| > p^N} |y|^-2 dy = p^-(N+1)``."""
    return float(Fraction(1, grid.p) ** (grid.N + 1))


def vladimirov_integral(grid: GridSpec, tail_corrected: bool = True) -> OperatorMatrix:
    """``D phi(x) = C_p int (phi(x) - phi(y)) / |x - y|^2 dy`` on the grid.

    Off-diagonal entries are exact (``phi`` is constant on cells and
    ``|x - y|`` is constant across a foreign cell).  The part of the
    integral outside the grid domain only sees ``phi(x)`` and is added to
    the diagonal in closed form when ``tail_corrected``.
    """
    if grid.d != 1:
        raise ValueError("integral form is implemented for d = 1")
    p, n = grid.p, grid.n_axis
    r = grid.naturals()
    diff = (r[:, None] - r[None, :]) % n
    v = int_valuation(diff, p, grid.levels)
    dist = np.power(float(p), (grid.N - v).astype(float))
    c = integral_constant(p)
    off = np.zeros((n, n))
    nz = diff != 0
    off[nz] = -c * grid.cell_measure / dist[nz] ** 2
    mat = off.copy()
    np.fill_diagonal(mat, -off.sum(axis=1) + (c * tail_constant(grid) if tail_corrected else 0.0))
    label = "D_int" + ("" if tail_corrected else "(no tail)")
    return OperatorMatrix(grid, mat, hermitian=True, label=label)


# -- magnitudes -------------------------------------------------------------

def position_magnitude(grid: GridSpec, zero_mode: str = "infimum",
                       axis: int | None = None) -> OperatorMatrix:
    """``M_q phi(x) = |x|_p phi(x)`` (max-norm for d > 1 unless ``axis``)."""
    if zero_mode not in ZERO_MODES:
        raise ValueError(f"zero_mode must be one of {ZERO_MODES}")
    if axis is None:
        vals = grid.norms().copy()
    else:
        a = grid.axis().axis_norms()
        vals = np.broadcast_to(
            a.reshape([-1 if i == axis else 1 for i in range(grid.d)]), grid.shape
        ).reshape(-1).copy()
    if zero_mode == "cell_average":
        # cell mean of |x| over B_{p^-M}(0), mirror image of the dual case
        g = GridSpec(grid.cfg, grid.M, grid.N, 1, grid.max_cells)
        vals[vals == 0] = zero_mode_value(g, 1.0)
    return OperatorMatrix(grid, np.diag(vals), hermitian=True, label="M_q")


def motivation_magnitude(grid: GridSpec, h=1.0, zero_mode: str = "infimum") -> OperatorMatrix:
    """``M_xi = h D``."""
    d = vladimirov_multiplier(grid, 1.0, zero_mode)
    return OperatorMatrix(grid, _h_value(h) * d.entries, hermitian=True, label="M_xi")


def neuron_activation(grid: GridSpec, cutoff_value: float | None = None) -> OperatorMatrix:
    """``A = -log_p M_q``: index of the first firing neuron.

    The zero cell has no finite value; it gets ``cutoff_value``
    (default ``M + 1``).
    """
    if grid.d != 1:
        raise ValueError("neuron_activation is defined on one axis")
    if cutoff_value is None:
        cutoff_value = grid.M + 1
    k = grid.axis_norm_exponents().astype(float)
    vals = -k
    vals[grid.naturals() == 0] = cutoff_value
    return OperatorMatrix(grid, np.diag(vals), hermitian=True, label="A")


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    a.grid.check_same(b.grid)
    m = a.entries @ b.entries - b.entries @ a.entries
    return OperatorMatrix(a.grid, m, label=f"[{a.label},{b.label}]")


def potential_abs2(grid: GridSpec) -> np.ndarray:
    """``V(q) = sum_j |q_j|_p^2`` per cell."""
    a = grid.axis().axis_norms() ** 2
    out = a
    for _ in range(grid.d - 1):
        out = np.add.outer(out, a)
    return np.asarray(out).reshape(-1)


def hamiltonian(grid: GridSpec, h=1.0, V=None, zero_mode: str = "infimum",
                alpha: float = 2.0) -> OperatorMatrix:
    """``H = h^2 sum_j D_j^alpha + V`` assembled axis by axis with Kronecker
    products; ``alpha = 2`` is the free mental Hamiltonian."""
    hv = _h_value(h)
    if V is None:
        V = np.zeros(grid.size)
    V = np.asarray(V)
    if np.iscomplexobj(V):
        if np.max(np.abs(V.imag)) > 0:
            raise ValueError("potential must be real-valued")
        V = V.real
    V = V.astype(float).reshape(-1)
    if V.size != grid.size:
        raise GridMismatchError(f"potential has {V.size} values, grid has {grid.size}")
    d2 = vladimirov_multiplier(grid.axis(), alpha, zero_mode).entries
    eye = np.eye(grid.n_axis)
    lap = np.zeros((grid.size, grid.size), dtype=complex)
    for j in range(grid.d):
        term = np.ones((1, 1))
        for k in range(grid.d):
            term = np.kron(term, d2 if k == j else eye)
        lap += term
    mat = hv * hv * lap + np.diag(V)
    return OperatorMatrix(grid, mat, hermitian=True, label="H")


# -- spectra ----------------------------------------------------------------

@dataclass(frozen=True)
class SpectralDecomposition:
    grid: GridSpec
    eigenvalues: np.ndarray
    vectors: np.ndarray = field(repr=False)  # columns, Haar-orthonormal coefficients
    groups: tuple  # (start, stop) index ranges of degenerate levels
    max_residual: float
    orthonormality_error: float

    def eigenvector(self, k: int) -> StateVector:
        return StateVector(self.grid, self.vectors[:, k], label=f"eig{k}")

    def levels(self) -> list:
        """``[(mean eigenvalue, multiplicity), ...]`` in ascending order."""
        return [(float(np.mean(self.eigenvalues[a:b])), b - a) for a, b in self.groups]

    def projector(self, level: int) -> np.ndarray:
        """Projector onto a degenerate level, acting on coefficient vectors."""
        a, b = self.groups[level]
        v = self.vectors[:, a:b] * np.sqrt(self.grid.cell_measure)
        return v @ v.conj().T


def group_levels(eigenvalues: np.ndarray, tau: float = DEFAULT_TAU_DEG) -> tuple:
    """Split sorted eigenvalues into runs whose neighbours differ by at most
    ``tau`` relative (with an absolute floor at machine-noise scale)."""
    ev = np.asarray(eigenvalues)
    if ev.size == 0:
        return ()
    floor = 1e-12 * max(1.0, float(np.max(np.abs(ev))))
    groups = []
    start = 0
    for i in range(1, ev.size):
        a, b = ev[i - 1], ev[i]
        if abs(b - a) > max(tau * max(abs(a), abs(b)), floor):
            groups.append((start, i))
            start = i
    groups.append((start, ev.size))
    return tuple(groups)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # deterministic phase: first component above half the column max is real > 0
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        mag = np.abs(col)
        j = int(np.argmax(mag >= 0.5 * mag.max()))
        out[:, k] = col * (abs(col[j]) / col[j])
    return out


def spectrum(op: OperatorMatrix, tau_deg: float = DEFAULT_TAU_DEG) -> SpectralDecomposition:
    """Eigen-decomposition of a Hermitian operator with degeneracy grouping."""
    if not op.hermitian and op.hermiticity_error() > 1e-12 * max(1.0, np.max(np.abs(op.entries))):
        raise NotHermitianError(f"{op.label} is not Hermitian")
    a = op.entries
    w, v = np.linalg.eigh(a)
    v = _fix_phases(v)
    resid = np.max(np.linalg.norm(a @ v - v * w, axis=0)) if w.size else 0.0
    ortho = np.max(np.abs(v.conj().T @ v - np.eye(w.size))) if w.size else 0.0
    vecs = v / np.sqrt(op.grid.cell_measure)
    return SpectralDecomposition(op.grid, w, vecs, group_levels(w, tau_deg),
                                 float(resid), float(ortho))


def degeneracy_report(spec: SpectralDecomposition) -> list:
    return spec.levels()


def spectrum_law(grid: GridSpec, alpha: float = 1.0) -> list:
    """Closed-form multiset of ``D^alpha`` on a 1-D grid (infimum convention):
    ``0`` once and ``p^(alpha k)`` with multiplicity ``p^(k+N-1)(p-1)`` for
    ``k = -N+1 .. M``."""
    p, N, M = grid.p, grid.N, grid.M
    out = [(0.0, 1)]
    for k in range(-N + 1, M + 1):
        out.append((float(p) ** (alpha * k), p ** (k + N - 1) * (p - 1)))
    return out

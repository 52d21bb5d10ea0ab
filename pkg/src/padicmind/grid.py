"""Finite-dimensional stand-in for L2(Q_p^d, dx).

A grid covers the ball ``B_{p^N}(0)`` (per axis) with cosets of
``B_{p^-M}(0)``.  A cell's canonical representative carries digits at
positions ``-N .. M-1`` only.  Cells are ordered lexicographically in those
digits with the least significant position first, which keeps every grid
ball contiguous.  Internally a representative ``x`` is tracked by the
integer ``t = p^N x`` in ``[0, p^(N+M))``; the cell index is ``t`` with its
base-p digits reversed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .padic import Ball, BaseConfig, PadicNumber, encode

DEFAULT_MAX_CELLS = 4096


class GridSizeError(ValueError):
    pass


class GridMismatchError(ValueError):
    pass


def digit_reverse(i: np.ndarray | int, p: int, L: int):
    """Reverse the ``L`` base-p digits of ``i`` (an involution)."""
    i = np.asarray(i, dtype=np.int64)
    out = np.zeros_like(i)
    for _ in range(L):
        out = out * p + i % p
        i = i // p
    return out


def int_valuation(a: np.ndarray, p: int, cap: int) -> np.ndarray:
    """Elementwise p-adic valuation of integers, ``cap`` for zeros."""
    a = np.asarray(a, dtype=np.int64)
    v = np.zeros(a.shape, dtype=np.int64)
    live = a != 0
    work = a.copy()
    while True:
        step = live & (work % p == 0)
        if not step.any():
            break
        v[step] += 1
        work[step] //= p
    v[~live] = cap
    return v


@dataclass(frozen=True)
class GridSpec:
    cfg: BaseConfig
    N: int
    M: int
    d: int = 1
    max_cells: int = DEFAULT_MAX_CELLS

    def __post_init__(self):
        if self.N + self.M < 1:
            raise ValueError("need N + M >= 1")
        if self.d < 1:
            raise ValueError("need d >= 1")
        if self.size > self.max_cells:
            raise GridSizeError(
                f"grid has {self.size} cells, limit is {self.max_cells}"
            )

    @property
    def p(self) -> int:
        return self.cfg.p

    @property
    def levels(self) -> int:
        return self.N + self.M

    @property
    def n_axis(self) -> int:
        return self.p**self.levels

    @property
    def size(self) -> int:
        return self.n_axis**self.d

    @property
    def shape(self) -> tuple:
        return (self.n_axis,) * self.d

    @property
    def cell_measure(self) -> float:
        return float(Fraction(1, self.p ** (self.d * self.M)) if self.M >= 0
                     else Fraction(self.p ** (-self.d * self.M)))

    @property
    def total_measure(self) -> float:
        return float(Fraction(self.p) ** (self.d * self.N))

    def dual(self) -> "GridSpec":
        """Frequency grid: support and resolution exponents swapped."""
        return GridSpec(self.cfg, self.M, self.N, self.d, self.max_cells)

    def axis(self) -> "GridSpec":
        """The one-dimensional grid of a single axis."""
        return GridSpec(self.cfg, self.N, self.M, 1, self.max_cells)

    def check_same(self, other: "GridSpec"):
        if (self.cfg, self.N, self.M, self.d) != (other.cfg, other.N, other.M, other.d):
            raise GridMismatchError(f"grid mismatch: {self} vs {other}")

    # per-axis integer views ------------------------------------------

    def naturals(self) -> np.ndarray:
        """``t = p^N x`` for each axis cell index."""
        return digit_reverse(np.arange(self.n_axis), self.p, self.levels)

    def axis_norms(self) -> np.ndarray:
        """``|x|_p`` per axis cell (zero cell gives 0)."""
        t = self.naturals()
        v = int_valuation(t, self.p, self.levels)
        out = np.power(float(self.p), (self.N - v).astype(float))
        out[t == 0] = 0.0
        return out

    def axis_norm_exponents(self) -> np.ndarray:
        """Exponent ``k`` with ``|x|_p = p^k`` per axis cell (``-M-1`` on the zero cell)."""
        t = self.naturals()
        v = int_valuation(t, self.p, self.levels + 1)
        return self.N - v

    def norms(self) -> np.ndarray:
        """Max-norm ``|q|_p`` of each cell, flattened in cell order."""
        a = self.axis_norms()
        if self.d == 1:
            return a
        grids = np.meshgrid(*([a] * self.d), indexing="ij")
        return np.maximum.reduce(grids).ravel()

    def axis_representative(self, index: int) -> PadicNumber:
        t = int(self.naturals()[index])
        return encode(t, self.cfg).shift(-self.N) if t else PadicNumber.zero(self.cfg)

    def multi_index(self, flat: int) -> tuple:
        return np.unravel_index(flat, self.shape)


@dataclass(frozen=True)
class Cell:
    grid: GridSpec
    index: int

    @property
    def axis_indices(self) -> tuple:
        return tuple(int(i) for i in self.grid.multi_index(self.index))

    @property
    def representative(self) -> tuple:
        return tuple(self.grid.axis_representative(i) for i in self.axis_indices)

    def digits(self) -> tuple:
        """Per axis, the digits at positions -N .. M-1."""
        g = self.grid
        out = []
        for i in self.axis_indices:
            ds = []
            for _ in range(g.levels):
                ds.append(i % g.p)
                i //= g.p
            out.append(tuple(reversed(ds)))
        return tuple(out)


def make_grid(cfg: BaseConfig, N: int, M: int, d: int = 1,
              max_cells: int = DEFAULT_MAX_CELLS) -> GridSpec:
    return GridSpec(cfg, N, M, d, max_cells)


def cells(grid: GridSpec) -> list:
    return [Cell(grid, i) for i in range(grid.size)]


def cell_index_of(grid: GridSpec, point) -> int:
    """Flat index of the cell containing ``point`` (a PadicNumber per axis)."""
    if isinstance(point, PadicNumber):
        point = (point,)
    if len(point) != grid.d:
        raise ValueError("point dimension does not match grid")
    idx = []
    for x in point:
        if x.norm() > Fraction(grid.p) ** grid.N:
            raise ValueError(f"{x} lies outside the grid domain")
        digs = [x.digit(k) for k in range(-grid.N, grid.M)]
        i = 0
        for dgt in digs:
            i = i * grid.p + dgt
        idx.append(i)
    return int(np.ravel_multi_index(tuple(idx), grid.shape))


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude per cell, plus a label and the h used to build it."""

    grid: GridSpec
    coeffs: np.ndarray = field(repr=False)
    label: str = ""
    h: float | None = None

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} coefficients, got {c.size}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def norm(self) -> float:
        return float(np.sqrt(norm2(self)))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero state")
        return self.with_coeffs(self.coeffs / n)

    def probabilities(self) -> np.ndarray:
        """Density ``P(q) = |phi(q)|^2`` per cell."""
        return np.abs(self.coeffs) ** 2

    def phase(self) -> np.ndarray:
        return np.angle(self.coeffs)

    def with_coeffs(self, coeffs, label=None) -> "StateVector":
        return StateVector(self.grid, coeffs, self.label if label is None else label, self.h)

    def __add__(self, other):
        self.grid.check_same(other.grid)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other):
        self.grid.check_same(other.grid)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, c):
        return self.with_coeffs(self.coeffs * c)

    __rmul__ = __mul__


def integrate(grid: GridSpec, values) -> complex | float:
    """Haar integral of a cell-indexed function (or a StateVector)."""
    if isinstance(values, StateVector):
        grid.check_same(values.grid)
        values = values.coeffs
    values = np.asarray(values)
    if values.size != grid.size:
        raise GridMismatchError(f"expected {grid.size} values, got {values.size}")
    return values.sum() * grid.cell_measure


def inner(phi: StateVector, psi: StateVector) -> complex:
    """``(phi, psi) = int phi * conj(psi) dx``."""
    phi.grid.check_same(psi.grid)
    return complex(np.vdot(psi.coeffs, phi.coeffs) * phi.grid.cell_measure)


def norm2(phi: StateVector) -> float:
    return float(np.sum(np.abs(phi.coeffs) ** 2) * phi.grid.cell_measure)


def ball_mask(grid: GridSpec, ball: Ball) -> np.ndarray:
    """Boolean per axis cell: is the cell inside ``ball``."""
    p = grid.p
    if ball.center.config.p != p:
        raise ValueError("ball and grid use different primes")
    if ball.m < -grid.M:
        raise GridSizeError(f"radius p^{ball.m} is below grid resolution p^{-grid.M}")
    if ball.m > grid.N or ball.center.norm() > Fraction(p) ** grid.N:
        raise GridSizeError("ball is not contained in the grid domain")
    # |x - c| <= p^m  iff  digits agree at every position below -m
    t = grid.naturals()
    span = p ** (grid.N - ball.m)
    c = ball.center
    ct = 0
    for k in range(-grid.N, -ball.m):
        ct += c.digit(k) * p ** (k + grid.N)
    return (t % span) == ct


def indicator_state(grid: GridSpec, ball, normalized: bool = False) -> StateVector:
    """Characteristic function of a ball (a product of balls when d > 1)."""
    balls = (ball,) if isinstance(ball, Ball) else tuple(ball)
    if len(balls) != grid.d:
        raise ValueError("need one ball per axis")
    ax = grid.axis()
    masks = [ball_mask(ax, b).astype(float) for b in balls]
    coeffs = masks[0]
    for m in masks[1:]:
        coeffs = np.multiply.outer(coeffs, m)
    label = "Omega" if len(balls) == 1 else "Omega^d"
    st = StateVector(grid, coeffs.ravel(), label=label)
    return st.normalized() if normalized else st


def omega(grid: GridSpec, m: int = 0, normalized: bool = False) -> StateVector:
    """``Omega_{p^m}``: indicator of ``B_{p^m}(0)`` on every axis."""
    z = PadicNumber.zero(grid.cfg)
    return indicator_state(grid, [Ball(z, m)] * grid.d, normalized=normalized)


def uniform_state(grid: GridSpec) -> StateVector:
    """Normalized constant amplitude on the whole grid domain."""
    return StateVector(grid, np.ones(grid.size), label="uniform").normalized()


def plane_wave(xi, grid: GridSpec, h: PadicNumber | None = None) -> StateVector:
    """Free wave ``e(h xi . x)`` sampled at cell representatives.

    ``xi`` is a PadicNumber (d = 1) or a sequence of them.  The wave must be
    constant on cells, i.e. ``|h xi|_p <= p^M`` on every axis.
    """
    xis = (xi,) if isinstance(xi, PadicNumber) else tuple(xi)
    if len(xis) != grid.d:
        raise ValueError("need one frequency per axis")
    p, L = grid.p, grid.levels
    n = grid.n_axis
    t = grid.naturals()
    phases = []
    for x in xis:
        eta = x if h is None else x * h
        if eta.norm() > Fraction(p) ** grid.M:
            raise ValueError(
                f"|h xi|_p = {eta.norm()} exceeds p^M; wave is not constant on cells"
            )
        scaled = eta.shift(grid.M)
        if scaled.absolute_precision < L:
            raise ValueError("frequency is not known to enough digits for this grid")
        e = 0
        for k in range(L):
            e += scaled.digit(k) * p**k
        phases.append(((e * t) % n) / n)
    ph = phases[0]
    for q in phases[1:]:
        ph = np.add.outer(ph, q)
    coeffs = np.exp(2j * np.pi * ph.ravel())
    hval = None if h is None else float(h.to_fraction())
    return StateVector(grid, coeffs, label="plane_wave", h=hval)


def from_empirical(grid: GridSpec, counts, phase=None, label: str = "empirical") -> StateVector:
    """Amplitude ``sqrt(P) exp(i theta)`` from cell counts.

    Counts are turned into a density w.r.t. Haar measure; the phase defaults
    to zero because raw counts carry no phase information.
    """
    c = np.asarray(counts, dtype=float).reshape(-1)
    if c.size != grid.size:
        raise GridMismatchError(f"expected {grid.size} counts, got {c.size}")
    if np.any(c < 0):
        raise ValueError("counts must be nonnegative")
    total = c.sum()
    if total == 0:
        raise ValueError("all counts are zero")
    density = c / (total * grid.cell_measure)
    theta = np.zeros_like(density) if phase is None else np.asarray(phase, dtype=float).reshape(-1)
    return StateVector(grid, np.sqrt(density) * np.exp(1j * theta), label=label)


def encode_spike_train(counts, cfg: BaseConfig, window_ms: float | None = None) -> PadicNumber:
    """Mental state whose digit ``j`` is the oscillation count of neuron ``j``.

    ``window_ms`` is the length of the counting window; it fixes the meaning
    of ``p`` but plays no role in the encoding.
    """
    counts = [int(c) for c in counts]
    for j, c in enumerate(counts):
        if not 0 <= c < cfg.p:
            raise ValueError(
                f"neuron {j}: count {c} outside [0, {cfg.p - 1}]"
            )
    if len(counts) > cfg.K:
        raise ValueError(f"{len(counts)} neurons exceed digit precision K={cfg.K}")
    if not any(counts):
        return PadicNumber.zero(cfg)
    return PadicNumber.from_digits(cfg, 0, counts)


def all_balls(grid: GridSpec):
    """Every ball representable on a one-dimensional grid, as (Ball, mask)."""
    ax = grid.axis()
    p = ax.p
    out = []
    for m in range(-ax.M, ax.N + 1):
        span = p ** (ax.N - m)
        for ct in range(span):
            center = encode(ct, ax.cfg).shift(-ax.N) if ct else PadicNumber.zero(ax.cfg)
            b = Ball(center, m)
            out.append((b, ball_mask(ax, b)))
    return out


def tensor_state(*states: StateVector, label: str = "product") -> StateVector:
    """Product state on the d = len(states) grid built from 1-D states."""
    g0 = states[0].grid
    for s in states[1:]:
        g0.check_same(s.grid)
    grid = GridSpec(g0.cfg, g0.N, g0.M, len(states), g0.max_cells)
    c = states[0].coeffs
    for s in states[1:]:
        c = np.multiply.outer(c, s.coeffs)
    return StateVector(grid, c.ravel(), label=label)


def iter_digit_tuples(p: int, L: int):
    return product(range(p), repeat=L)

"""p-adic Fourier transform on grid states.

The kernel is the additive character ``e(xi x)`` weighted by the source cell
measure, with no extra normalization.  On a grid ``(p, N, M)`` the
frequencies live on the dual grid ``(p, M, N)``; for representatives
``x = t / p^N`` and ``xi = s / p^M`` the phase is ``(s t mod p^L) / p^L``,
so everything reduces to integer arithmetic on the naturals of each axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, StateVector


@dataclass(frozen=True)
class DualGridMap:
    source: GridSpec
    target: GridSpec

    @classmethod
    def of(cls, grid: GridSpec) -> "DualGridMap":
        return cls(grid, grid.dual())

    def __post_init__(self):
        s, t = self.source, self.target
        if (s.cfg, s.N, s.M, s.d) != (t.cfg, t.M, t.N, t.d):
            raise ValueError("target must swap support and resolution of source")


def axis_character_matrix(grid: GridSpec, sign: int = 1) -> np.ndarray:
    """Unweighted ``e(sign * xi x)`` for one axis, rows = frequency cells."""
    n = grid.n_axis
    r = grid.naturals()
    phase = np.outer(r, r) % n
    return np.exp(sign * 2j * np.pi * phase / n)


def character_matrix(grid: GridSpec, sign: int = 1) -> np.ndarray:
    """Dense transform matrix from ``grid`` to its dual, measure included."""
    w = axis_character_matrix(grid.axis(), sign) * (grid.p ** (-float(grid.M)))
    out = w
    for _ in range(grid.d - 1):
        out = np.kron(out, w)
    return out


def _fft_natural(x: np.ndarray, p: int, sign: int) -> np.ndarray:
    """Radix-p decimation-in-time DFT along the last axis, natural order.

    Computes ``X[k] = sum_t x[t] exp(sign 2 pi i t k / n)`` for ``n = p^L``.
    Each level combines ``p`` interleaved sub-transforms with twiddles and a
    ``p x p`` character butterfly.
    """
    lead = x.shape[:-1]
    n = x.shape[-1]
    if n == 1:
        return x.copy()
    butterfly = np.exp(sign * 2j * np.pi * np.outer(np.arange(p), np.arange(p)) / p)
    a = x.reshape(lead + (n, 1)).astype(complex)
    m = 1
    while m < n:
        mm = m * p
        rows = n // mm
        b = a.reshape(lead + (p, rows, m))
        tw = np.exp(sign * 2j * np.pi * np.outer(np.arange(p), np.arange(m)) / mm)
        b = b * tw[:, None, :]
        c = np.einsum("qj,...jrk->...rqk", butterfly, b)
        a = c.reshape(lead + (rows, mm))
        m = mm
    return a.reshape(lead + (n,))


def _apply_axes(coeffs: np.ndarray, grid: GridSpec, sign: int) -> np.ndarray:
    r = grid.naturals()
    arr = coeffs.reshape(grid.shape)
    for ax in range(grid.d):
        arr = np.moveaxis(arr, ax, -1)
        nat = arr[..., r]
        out = _fft_natural(nat, grid.p, sign)
        arr = np.moveaxis(out[..., r], -1, ax)
    return arr.reshape(-1)


def _transform(phi: StateVector, sign: int, method: str) -> StateVector:
    g = phi.grid
    target = g.dual()
    if method == "dense":
        out = character_matrix(g, sign) @ phi.coeffs
    elif method == "fast":
        out = _apply_axes(phi.coeffs, g, sign) * g.cell_measure
    else:
        raise ValueError(f"unknown method {method!r}")
    label = ("F" if sign > 0 else "F^-1") + (f"[{phi.label}]" if phi.label else "")
    return StateVector(target, out, label=label, h=phi.h)


def fourier(phi: StateVector, method: str = "dense") -> StateVector:
    """``phi~(xi) = int phi(x) e(xi x) dx`` on the dual grid."""
    return _transform(phi, +1, method)


def inverse_fourier(phi_t: StateVector, method: str = "dense") -> StateVector:
    """``phi(x) = int phi~(xi) e(-xi x) dxi``."""
    return _transform(phi_t, -1, method)


def fast_fourier(phi: StateVector) -> StateVector:
    return _transform(phi, +1, "fast")


def reflect(phi: StateVector) -> StateVector:
    """``x -> -x`` on the grid."""
    g = phi.grid
    r = g.naturals()
    n = g.n_axis
    # index of cell holding -x, per axis
    neg = r[(-r) % n]
    arr = phi.coeffs.reshape(g.shape)
    for ax in range(g.d):
        arr = np.take(arr, neg, axis=ax)
    return phi.with_coeffs(arr.reshape(-1))


def multiplier_operator(grid: GridSpec, multiplier: np.ndarray) -> np.ndarray:
    """Dense matrix of ``F^-1 diag(multiplier) F`` on ``grid``.

    ``multiplier`` is indexed by dual-grid cells.  The operator commutes with
    translations, so it is assembled from a single column (the response to
    the zero-cell indicator) and shifted.
    """
    dual = grid.dual()
    lam = np.asarray(multiplier, dtype=complex).reshape(-1)
    if lam.size != dual.size:
        raise ValueError("multiplier must be indexed by dual-grid cells")
    # F(delta_0) = cell measure on every frequency
    col = inverse_fourier(StateVector(dual, lam * grid.cell_measure), method="fast").coeffs
    col = col.reshape(grid.shape)
    r = grid.naturals()
    n = grid.n_axis
    # kernel value for x - y, per axis in natural coordinates
    diff_idx = r[(r[:, None] - r[None, :]) % n]  # cell index of x_i - x_j
    if grid.d == 1:
        return col[diff_idx]
    idx = [diff_idx] * grid.d
    mesh = np.ix_(*[np.arange(grid.n_axis)] * (2 * grid.d))
    # gather col[diff(i1,j1), diff(i2,j2), ...] then order as (i..., j...)
    parts = [idx[a][mesh[a], mesh[grid.d + a]] for a in range(grid.d)]
    full = col[tuple(parts)]
    return full.reshape(grid.size, grid.size)

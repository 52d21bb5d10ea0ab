"""Projective measurement, the random self-measurement stream, and
Schmidt analysis of two-axis states."""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .grid import StateVector
from .operators import DEFAULT_TAU_DEG, OperatorMatrix, SpectralDecomposition, commutator, spectrum

COMMUTE_TOL = 1e-9


def derive_seed(master: int, component: str) -> np.random.SeedSequence:
    """Per-component seed: ``SeedSequence([master, crc32(component)])``."""
    return np.random.SeedSequence([int(master), zlib.crc32(component.encode())])


def spawn_rngs(master: int, component: str, n: int) -> list:
    """``n`` independent generators for trials, derived from the master seed."""
    return [np.random.default_rng(s) for s in derive_seed(master, component).spawn(n)]


def measurement_statistics(phi: StateVector, A: OperatorMatrix,
                           dec: SpectralDecomposition | None = None,
                           tau_deg: float = DEFAULT_TAU_DEG):
    """Outcomes, Born probabilities ``||Pi_lambda phi||^2`` and projectors."""
    A.grid.check_same(phi.grid)
    dec = dec or spectrum(A, tau_deg)
    mu = phi.grid.cell_measure
    outcomes, probs, projs = [], [], []
    for level, (val, _mult) in enumerate(dec.levels()):
        P = dec.projector(level)
        outcomes.append(val)
        probs.append(float(np.sum(np.abs(P @ phi.coeffs) ** 2) * mu))
        projs.append(P)
    return np.array(outcomes), np.array(probs), projs


def projective_measure(phi: StateVector, A: OperatorMatrix, rng: np.random.Generator,
                       dec: SpectralDecomposition | None = None):
    """Sample one outcome of ``A`` in state ``phi``.

    Returns ``(eigenvalue, probability, collapsed_state)``.
    """
    if not isinstance(rng, np.random.Generator):
        raise TypeError("rng must be a seeded numpy Generator")
    if abs(phi.norm() - 1) > 1e-10:
        raise ValueError("state must be normalized")
    vals, probs, projs = measurement_statistics(phi, A, dec)
    p = np.clip(probs, 0, None)
    p = p / p.sum()
    k = int(rng.choice(len(vals), p=p))
    post = phi.with_coeffs(projs[k] @ phi.coeffs).normalized()
    return float(vals[k]), float(probs[k]), post


@dataclass(frozen=True)
class MeasurementRecord:
    step: int
    observable: str
    outcome: float
    probability: float
    state: StateVector = field(repr=False, compare=False)

    def to_json(self) -> str:
        return json.dumps({"step": self.step, "observable": self.observable,
                           "outcome": self.outcome, "probability": self.probability})


@dataclass(frozen=True)
class RdsConfig:
    """Selection process for the self-measurement stream.

    ``transitions[i][j]`` weights moving from commuting subset ``i`` to
    ``j``.  With ``memory_depth > 1`` the next-step weights mix the rows of
    the last ``memory_depth`` selections with factors ``memory_decay**k``.
    """

    family: tuple
    transitions: tuple | None = None
    memory_depth: int = 1
    memory_decay: float = 0.5
    subset_size: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.memory_depth < 1:
            raise ValueError("memory_depth must be >= 1")
        if not 0 < self.memory_decay <= 1:
            raise ValueError("memory_decay must lie in (0, 1]")
        if self.transitions is not None:
            w = np.asarray(self.transitions, dtype=float)
            if np.any(w < 0):
                raise ValueError("transition weights must be nonnegative")
            if np.any(w.sum(axis=1) <= 0):
                raise ValueError("every transition row needs positive weight")


def commuting_subsets(family: dict, size: int | None = None, tol: float = COMMUTE_TOL) -> list:
    """Label tuples of pairwise-commuting observables.

    ``size=None`` gives the maximal commuting subsets; otherwise every
    commuting subset of exactly ``size`` members.
    """
    labels = list(family)
    ok = {}
    for a, b in combinations(labels, 2):
        ok[a, b] = ok[b, a] = commutator(family[a], family[b]).norm() <= tol
    def commuting(sub):
        return all(ok[a, b] for a, b in combinations(sub, 2))
    if size is not None:
        subs = [s for s in combinations(labels, size) if commuting(s)]
        if not subs:
            raise ValueError(f"no commuting subset of size {size}")
        return subs
    every = [s for k in range(1, len(labels) + 1)
             for s in combinations(labels, k) if commuting(s)]
    return [s for s in every if not any(set(s) < set(t) for t in every)]


def rds_stream(phi0: StateVector, family: dict, cfg: RdsConfig, steps: int) -> list:
    """Random self-measurement stream: at each step pick a commuting subset
    by the memory-weighted Markov process and measure its members in turn."""
    family = {k: family[k] for k in cfg.family}
    subsets = commuting_subsets(family, cfg.subset_size)
    n = len(subsets)
    if cfg.transitions is None:
        W = np.full((n, n), 1.0 / n)
    else:
        W = np.asarray(cfg.transitions, dtype=float)
        if W.shape != (n, n):
            raise ValueError(f"transitions must be {n}x{n} for subsets {subsets}")
        W = W / W.sum(axis=1, keepdims=True)
    decs = {k: spectrum(op) for k, op in family.items()}
    rng = np.random.default_rng(derive_seed(cfg.seed, "rds"))
    history = []
    phi = phi0
    records = []
    for step in range(steps):
        if not history:
            w = np.full(n, 1.0 / n)
        else:
            recent = history[::-1][: cfg.memory_depth]
            w = sum(cfg.memory_decay**k * W[s] for k, s in enumerate(recent))
            w = w / w.sum()
        s = int(rng.choice(n, p=w))
        history.append(s)
        for label in subsets[s]:
            val, prob, phi = projective_measure(phi, family[label], rng, decs[label])
            records.append(MeasurementRecord(step, label, val, prob, phi))
    return records


def records_to_jsonl(records) -> str:
    return "".join(r.to_json() + "\n" for r in records)


def schmidt_analysis(phi: StateVector, split: int = 1, tau: float = 1e-10):
    """Singular values of ``phi`` across the axis split, and the rank above
    ``tau``; ``sum(sigma**2) = ||phi||^2``."""
    g = phi.grid
    if g.d != 2:
        raise ValueError("schmidt_analysis needs a two-axis grid")
    if split != 1:
        raise ValueError("a two-axis grid has the single split 1")
    mat = phi.coeffs.reshape(g.n_axis, g.n_axis)
    sigma = np.linalg.svd(mat, compute_uv=False) * np.sqrt(g.cell_measure)
    return sigma, int(np.sum(sigma > tau))

"""Monomial maps ``x -> x^n`` on Z_p with exact digit arithmetic."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .padic import BaseConfig, PadicNumber, encode

ATTRACTING = "attracting"
REPELLING = "repelling"
NEUTRAL = "neutral/Siegel"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class DynSpec:
    p: int
    K: int
    n: int
    x0: PadicNumber
    steps: int
    fixed_point: PadicNumber | None = None  # defaults to 1

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("exponent n must be >= 2")
        cfg = BaseConfig(self.p, self.K)
        if self.x0.config != cfg:
            raise ValueError("x0 must use the (p, K) of the DynSpec")
        if not self.x0.is_zero and self.x0.valuation < 0:
            raise ValueError("x0 must lie in Z_p")
        if self.steps < 0:
            raise ValueError("steps must be nonnegative")

    @property
    def cfg(self) -> BaseConfig:
        return BaseConfig(self.p, self.K)

    def reference(self) -> PadicNumber:
        return self.fixed_point if self.fixed_point is not None else encode(1, self.cfg)


@dataclass(frozen=True)
class OrbitReport:
    orbit: tuple = field(repr=False)
    distances: tuple  # exact Fractions: |x_k - x*|_p
    classification: str
    empirical: str
    exhausted: bool = False  # orbit truncated: difference fell below p^-K

    def distance_exponents(self) -> list:
        """``j`` with distance ``p^-j`` (``None`` for distance 0)."""
        p = self.orbit[0].p
        out = []
        for d in self.distances:
            if d == 0:
                out.append(None)
            else:
                j = 0
                while d < 1:
                    d *= p
                    j += 1
                while d > 1:
                    d /= p
                    j -= 1
                out.append(j)
        return out


def classify_fixed_point(x_star: PadicNumber, n: int, p: int | None = None) -> str:
    """Derivative test: compare ``|n x*^(n-1)|_p`` with 1."""
    if p is not None and x_star.p != p:
        raise ValueError("prime mismatch")
    if not (x_star**n - x_star).is_zero:
        raise ValueError(f"{x_star} is not a fixed point of x^{n}")
    deriv = (x_star ** (n - 1)) * n
    m = deriv.norm()
    if m < 1:
        return ATTRACTING
    if m > 1:
        return REPELLING
    return NEUTRAL


def _empirical(dist: list) -> str:
    if len(dist) < 2:
        return INCONCLUSIVE
    if all(d == dist[0] for d in dist):
        # sitting on the fixed point says nothing about nearby orbits
        return NEUTRAL if dist[0] != 0 else INCONCLUSIVE
    if all(b < a or b == 0 == a for a, b in zip(dist, dist[1:])):
        return ATTRACTING
    if all(b > a for a, b in zip(dist, dist[1:])):
        return REPELLING
    return INCONCLUSIVE


def _run(spec: DynSpec, perturb=None) -> OrbitReport:
    ref = spec.reference()
    x = spec.x0
    orbit = [x]
    dist = [(x - ref).norm()]
    exhausted = False
    for k in range(spec.steps):
        x = x**spec.n
        if perturb is not None:
            x = perturb(k, x)
        diff = x - ref
        if diff.is_zero and not diff.is_exact_zero and dist[-1] != 0:
            exhausted = True
            break
        orbit.append(x)
        dist.append(diff.norm())
    return OrbitReport(tuple(orbit), tuple(dist),
                       classify_fixed_point(ref, spec.n), _empirical(dist), exhausted)


def iterate(spec: DynSpec) -> OrbitReport:
    """Exact orbit ``x_{k+1} = x_k^n`` with distances to the fixed point."""
    return _run(spec)


@dataclass(frozen=True)
class NoiseSpec:
    """Each step, with probability ``rate``, one digit at a position in
    ``[depth, K)`` is replaced by a different random digit."""

    depth: int
    rate: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("noise depth must be positive")
        if not 0 <= self.rate <= 1:
            raise ValueError("rate must lie in [0, 1]")


def _digit_flip(x: PadicNumber, pos: int, new: int) -> PadicNumber:
    return x + encode((new - x.digit(pos)) * x.p**pos, x.config)


def perturbed_iterate(spec: DynSpec, noise: NoiseSpec | None):
    """Orbit under random digit flips of size at most ``p^-depth``.

    Returns ``(report, stable)``.  An attracting orbit is stable when its
    second half stays inside ``B_{p^-depth}(x*)``; a neutral one when every
    distance equals the initial distance.
    """
    if noise is None or noise.rate == 0:
        rep = iterate(spec)
        return rep, True
    rng = np.random.default_rng(noise.seed)
    p, K = spec.p, spec.K

    def perturb(k, x):
        if rng.random() >= noise.rate or noise.depth >= K:
            return x
        pos = int(rng.integers(noise.depth, K))
        new = int((x.digit(pos) + rng.integers(1, p)) % p)
        return _digit_flip(x, pos, new)

    rep = _run(spec, perturb)
    bound = Fraction(1, p**noise.depth)
    if rep.classification == ATTRACTING:
        tail = rep.distances[len(rep.distances) // 2:]
        stable = all(d <= bound for d in tail)
    elif rep.classification == NEUTRAL:
        stable = all(d == rep.distances[0] for d in rep.distances)
    else:
        stable = False
    return rep, stable


def mental_space_size(p: int, L: int) -> int:
    """Number of digit strings of length ``L`` in base ``p``: ``p**L``."""
    if L < 1:
        raise ValueError("L must be >= 1")
    return p**L


def decimal_digit_count(n: int) -> int:
    """Number of decimal digits of a positive integer without ``str``."""
    if n <= 0:
        raise ValueError("n must be positive")
    k = max(1, int(n.bit_length() * 0.30102999566398120))
    while 10**k <= n:
        k += 1
    while k > 1 and 10 ** (k - 1) > n:
        k -= 1
    return k

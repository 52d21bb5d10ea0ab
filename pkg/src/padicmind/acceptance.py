"""Acceptance checks: analytic values and property suites at fixed tolerances.

Each check returns a :class:`CheckResult`; ``run_checks`` drives them for the
``verify`` command and for ``tests/test_acceptance.py``.  Expected values
come from closed forms or from constructions written here independently of
the code path being checked.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import dynamics as dyn
from .evolution import average, consciousness_measure, entropy, evolve
from .grid import (StateVector, all_balls, integrate, make_grid, omega, plane_wave,
                   tensor_state, uniform_state)
from .measurement import (RdsConfig, commuting_subsets, measurement_statistics,
                          projective_measure, rds_stream, records_to_jsonl,
                          schmidt_analysis, spawn_rngs)
from .operators import (PlanckConstant, commutator, hamiltonian, motivation_magnitude,
                        neuron_activation, position_magnitude, potential_abs2, spectrum,
                        spectrum_law, vladimirov_integral, vladimirov_multiplier)
from .padic import BaseConfig, PadicNumber, encode
from .transform import character_matrix, fast_fourier, fourier

# ||[M_q, M_xi]|| on (p=2, N=M=2, h=1), infimum zero mode; first computed
# value, cross-checked against a hand-built DFT conjugation.
COMMUTATOR_NORM_P2_N2_M2 = 1.1996018714650745


@dataclass(frozen=True)
class CheckResult:
    cid: int
    name: str
    passed: bool
    deviation: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"[{flag}] {self.cid:>2} {self.name:<28} dev={self.deviation:.3e} "
                f"tol={self.tolerance:.1e}  {self.detail}")


def _result(cid, name, dev, tol, detail="", strict_gt=False):
    dev = float(dev)
    ok = (dev > tol) if strict_gt else (dev <= tol)
    return CheckResult(cid, name, bool(ok and np.isfinite(dev)), dev, tol, detail)


def check_uniform_ball_probability() -> CheckResult:
    """Uniform state on Z_p: P(q in B_r(a)) = r for every grid ball."""
    worst = 0.0
    count = 0
    for p in (2, 3, 5):
        for M in (1, 2, 3):
            g = make_grid(BaseConfig(p), 0, M)
            phi = StateVector(g, np.ones(g.size))
            dens = phi.probabilities()
            for ball, mask in all_balls(g):
                prob = integrate(g, dens * mask).real
                worst = max(worst, abs(prob - float(ball.radius)))
                count += 1
    return _result(1, "uniform_ball_probability", worst, 1e-12, f"{count} balls")


def check_motivation_mean() -> CheckResult:
    """<M_xi> = 1/(p^(l-1)(p+1)) when phi~ is uniform on B_{p^-l}(0)."""
    worst = 0.0
    parts = []
    for p in (2, 3, 5):
        g = make_grid(BaseConfig(p), 3, 1)
        Mxi = motivation_magnitude(g, 1.0, zero_mode="cell_average")
        F = character_matrix(g)
        for l in (0, 1, 2):
            # phi~ = p^(l/2) Omega_{p^-l} on the dual grid, pulled back by the
            # adjoint of the (unitary) dense transform
            ft = p ** (l / 2) * omega(g.dual(), -l).coeffs
            phi = StateVector(g, np.linalg.solve(F, ft))
            want = Fraction(1, 1) / (Fraction(p) ** (l - 1) * (p + 1))
            got = average(Mxi, phi)
            worst = max(worst, abs(got - float(want)))
            if p == 2 and l == 1:
                parts.append(f"p=2,l=1: {got:.12f} vs 1/3")
    return _result(2, "motivation_mean_on_ball", worst, 1e-10, "; ".join(parts))


def check_free_wave() -> CheckResult:
    """M_xi e(h xi x) = |xi|_p e(h xi x) for every representable xi."""
    worst = 0.0
    n = 0
    for p in (2, 3):
        cfg = BaseConfig(p)
        g = make_grid(cfg, 2, 2)
        dual = g.dual()
        for m in (0, 1):
            h = PlanckConstant(p, m)
            Mxi = motivation_magnitude(g, h)
            hp = h.padic(cfg)
            for k in range(dual.size):
                eta = dual.axis_representative(k)  # h xi
                xi = eta / hp if not eta.is_zero else eta
                wave = plane_wave(xi, g, hp)
                res = Mxi.apply(wave) - wave * float(xi.norm())
                worst = max(worst, res.norm())
                n += 1
    return _result(3, "free_wave_eigenrelation", worst, 1e-10, f"{n} waves")


def check_spectrum_law() -> CheckResult:
    worst = 0.0
    mult_ok = True
    for p, N, M in ((2, 2, 2), (3, 1, 2), (5, 1, 1), (2, 1, 3)):
        g = make_grid(BaseConfig(p), N, M)
        for alpha in (1.0, 2.0):
            dec = spectrum(vladimirov_multiplier(g, alpha))
            law = spectrum_law(g, alpha)
            expected = np.sort(np.concatenate([[v] * m for v, m in law]))
            worst = max(worst, float(np.max(np.abs(dec.eigenvalues - expected))))
            got = [m for _, m in dec.levels()]
            mult_ok &= got == [m for _, m in law] and sum(got) == p ** (N + M)
    r = _result(4, "vladimirov_spectrum_law", worst, 1e-9, "multiplicities exact")
    if not mult_ok:
        return CheckResult(4, r.name, False, r.deviation, r.tolerance, "multiplicity mismatch")
    return r


def check_operator_forms() -> CheckResult:
    worst = 0.0
    spot = 0.0
    for p, N, M in ((2, 2, 2), (3, 2, 1), (5, 1, 2), (2, 4, 2)):
        g = make_grid(BaseConfig(p), N, M)
        Di = vladimirov_integral(g, tail_corrected=True)
        Dm = vladimirov_multiplier(g, 1.0, zero_mode="cell_average")
        worst = max(worst, float(np.max(np.abs(Di.entries - Dm.entries))))
        o = omega(g, 0)
        zero = 0  # cell index of the representative 0
        want = p / (p + 1)
        for D in (Di, Dm):
            spot = max(spot, abs(D.apply(o).coeffs[zero] - want))
    ok = worst <= 1e-8 and spot <= 1e-10
    return CheckResult(5, "integral_vs_multiplier", ok, max(worst, spot), 1e-8,
                       f"cellwise {worst:.2e} (tol 1e-8), D Omega_1(0) {spot:.2e} (tol 1e-10)")


def check_fourier_suite() -> CheckResult:
    rng = np.random.default_rng(20240601)
    planch = 0.0
    g = make_grid(BaseConfig(3), 2, 2)
    for _ in range(100):
        phi = StateVector(g, rng.normal(size=g.size) + 1j * rng.normal(size=g.size))
        planch = max(planch, abs(fourier(phi).norm() - phi.norm()) / phi.norm())
    selfdual = 0.0
    for p, N, M in ((2, 2, 2), (3, 1, 2), (5, 2, 1)):
        gg = make_grid(BaseConfig(p), N, M)
        selfdual = max(selfdual, float(np.max(np.abs(
            fourier(omega(gg, 0)).coeffs - omega(gg.dual(), 0).coeffs))))
    fast = 0.0
    for p, N, M, d in ((2, 4, 4, 1), (3, 2, 3, 1), (5, 1, 2, 1), (2, 2, 2, 2), (3, 1, 1, 2)):
        gg = make_grid(BaseConfig(p), N, M, d)
        F = character_matrix(gg)
        for k in range(gg.size):
            e = np.zeros(gg.size)
            e[k] = 1.0
            fast = max(fast, float(np.max(np.abs(
                fast_fourier(StateVector(gg, e)).coeffs - F[:, k]))))
    ok = planch <= 1e-10 and selfdual <= 1e-12 and fast <= 1e-10
    return CheckResult(6, "fourier_suite", ok, max(planch, fast), 1e-10,
                       f"plancherel {planch:.1e}, self-dual {selfdual:.1e} (tol 1e-12), "
                       f"fast-vs-dense {fast:.1e}")


def check_uncertainty() -> CheckResult:
    g = make_grid(BaseConfig(2), 2, 2)
    C = commutator(position_magnitude(g), motivation_magnitude(g, 1.0))
    nrm = C.norm()
    iC = 1j * C.entries
    herm = float(np.max(np.abs(iC - iC.conj().T)))
    rel = abs(nrm - COMMUTATOR_NORM_P2_N2_M2) / COMMUTATOR_NORM_P2_N2_M2
    ok = nrm > 0 and herm <= 1e-12 and rel <= 1e-9
    return CheckResult(7, "commutator_uncertainty", ok, rel, 1e-9,
                       f"||[Mq,Mxi]||={nrm:.12f}, i[.,.] herm err {herm:.1e}")


def check_entropy_identity() -> CheckResult:
    worst = 0.0
    notes = []
    for p in (2, 3):
        g = make_grid(BaseConfig(p), 0, 4)
        absq = g.norms()
        c = 1.0 / integrate(g, absq).real
        P = c * absq
        phi = StateVector(g, np.sqrt(P))
        A = neuron_activation(g)
        lhs = entropy(g, P)
        rhs = average(A, phi) - math.log(c, p)
        worst = max(worst, abs(lhs - rhs))
        notes.append(f"p={p}: c={c:.6f} (continuum (p+1)/p={(p + 1) / p:.6f})")
    return _result(8, "entropy_identity", worst, 1e-10, "; ".join(notes))


def _evolution_setup():
    p = 2
    g = make_grid(BaseConfig(p), 2, 2)
    h = PlanckConstant(p, 1)
    H = hamiltonian(g, h, potential_abs2(g))
    return g, h, H, spectrum(H)


def check_evolution() -> CheckResult:
    g, h, H, dec = _evolution_setup()
    rng = np.random.default_rng(7)
    phi0 = StateVector(g, rng.normal(size=g.size) + 1j * rng.normal(size=g.size)).normalized()
    times = np.linspace(0.0, 25.0, 1000)
    ev = evolve(phi0, H, h, times, decomposition=dec)
    ndev = float(np.max(np.abs(ev.norms - 1)))
    e0 = average(H, phi0)
    edev = max(abs(average(H, s) - e0) for s in ev.states)
    ground = dec.eigenvector(0)
    evg = evolve(ground, H, h, times, decomposition=dec)
    mu = g.cell_measure
    fid = max(abs(abs(np.vdot(ground.coeffs, s.coeffs) * mu) - 1) for s in evg.states)
    # two non-degenerate levels: revival when the relative phase closes
    (a0, b0), (a1, b1) = dec.groups[0], dec.groups[1]
    assert b0 - a0 == 1 and b1 - a1 == 1
    l0, l1 = dec.eigenvalues[a0], dec.eigenvalues[a1]
    sup = StateVector(g, (dec.vectors[:, a0] + dec.vectors[:, a1]) / math.sqrt(2))
    T = 2 * math.pi * h.value / (l1 - l0)
    evr = evolve(sup, H, h, [0.0, 0.5 * T, T], decomposition=dec)
    rev = abs(abs(np.vdot(sup.coeffs, evr.states[2].coeffs) * mu) - 1)
    half = abs(np.vdot(sup.coeffs, evr.states[1].coeffs) * mu)
    ok = ndev <= 1e-10 and edev <= 1e-9 and fid <= 1e-10 and rev <= 1e-8 and half < 0.5
    return CheckResult(9, "schrodinger_evolution", ok, max(ndev, fid), 1e-10,
                       f"norm {ndev:.1e}, energy {edev:.1e} (tol 1e-9), eigen-fidelity "
                       f"{fid:.1e}, revival {rev:.1e} (tol 1e-8)")


def check_ground_state() -> CheckResult:
    gaps = []
    for p, N, M in ((2, 2, 2), (3, 1, 1)):
        g = make_grid(BaseConfig(p), N, M)
        dec = spectrum(hamiltonian(g, 1.0, potential_abs2(g)))
        l0, l1 = dec.eigenvalues[0], dec.eigenvalues[1]
        gaps.append((l1 - l0) / max(abs(l0), 1e-300))
    worst = min(gaps)
    return _result(10, "ground_state_simple", worst, 1e-6,
                   "relative gaps " + ", ".join(f"{x:.4f}" for x in gaps), strict_gt=True)


def check_measurement() -> CheckResult:
    notes = []
    ok = True
    cfg = BaseConfig(2)
    g = make_grid(cfg, 1, 2)
    Mq = position_magnitude(g)
    # eigenstate: indicator of the unit sphere has |q| = 1
    sphere = omega(g, 0).coeffs - omega(g, -1).coeffs
    eig = StateVector(g, sphere).normalized()
    rngs = spawn_rngs(11, "measure-eigen", 200)
    outs = [projective_measure(eig, Mq, r) for r in rngs]
    ok &= all(o[0] == 1.0 and abs(o[1] - 1) <= 1e-12 for o in outs)
    # Born rule on a random state, 10^4 trials
    rng = np.random.default_rng(3)
    phi = StateVector(g, rng.normal(size=g.size) + 1j * rng.normal(size=g.size)).normalized()
    dec = spectrum(Mq)
    vals, probs, _ = measurement_statistics(phi, Mq, dec)
    n = 10_000
    gen = np.random.default_rng(np.random.SeedSequence(5))
    counts = np.zeros(len(vals))
    for _ in range(n):
        v, _, _ = projective_measure(phi, Mq, gen, dec)
        counts[int(np.argmin(np.abs(vals - v)))] += 1
    sig = np.sqrt(n * probs * (1 - probs))
    z = np.max(np.abs(counts - n * probs) / np.where(sig > 0, sig, 1))
    ok &= z <= 3
    notes.append(f"max |z| {z:.2f}")
    # RDS: reproducibility and commuting selection
    fam = {"M_q": Mq, "A": neuron_activation(g), "M_xi": motivation_magnitude(g, 1.0)}
    rcfg = RdsConfig(family=("M_q", "A", "M_xi"), memory_depth=3, seed=42)
    s1 = records_to_jsonl(rds_stream(phi, fam, rcfg, 60)).encode()
    s2 = records_to_jsonl(rds_stream(phi, fam, rcfg, 60)).encode()
    ok &= s1 == s2
    recs = rds_stream(phi, fam, rcfg, 60)
    by_step = {}
    for r in recs:
        by_step.setdefault(r.step, set()).add(r.observable)
    co = any({"M_q", "M_xi"} <= s for s in by_step.values())
    subsets = commuting_subsets(fam)
    ok &= not co and all(not {"M_q", "M_xi"} <= set(s) for s in subsets)
    notes.append(f"rds bytes equal {s1 == s2}, co-selected {co}")
    return CheckResult(11, "measurement_born_rds", bool(ok), float(z), 3.0, "; ".join(notes))


def check_dynamics() -> CheckResult:
    steps = 50
    ok = True
    notes = []
    for p, x0, want in ((2, 3, dyn.ATTRACTING), (3, 4, dyn.NEUTRAL)):
        classes = []
        for K in (64, 65):
            cfg = BaseConfig(p, K)
            rep = dyn.iterate(dyn.DynSpec(p, K, 2, encode(x0, cfg), steps))
            classes.append(rep.classification)
            d = rep.distances
            full = len(d) == steps + 1 and not rep.exhausted
            if want == dyn.ATTRACTING:
                good = full and all(b < a for a, b in zip(d, d[1:]))
            else:
                good = full and all(x == d[0] for x in d)
            ok &= good and rep.empirical == want
        ok &= classes[0] == classes[1] == want
        notes.append(f"p={p}: {classes[0]}")
    return CheckResult(12, "monomial_dynamics", bool(ok), 0.0 if ok else 1.0, 0.0,
                       "; ".join(notes))


# consciousness measure at t = pi/2 for (psi_0 + psi_1)/sqrt(2), p=2, N=M=1,
# 101 samples on [0, 2 pi]: (sin(dt)/dt)^2 / 2 from the closed-form density
def _consciousness_pinned():
    dt = 2 * math.pi / 100
    return 0.5 * (math.sin(dt) / dt) ** 2


def check_consciousness() -> CheckResult:
    cfg = BaseConfig(2)
    g = make_grid(cfg, 1, 1)
    H = hamiltonian(g, 1.0)
    t = np.linspace(0, 2 * math.pi, 101)
    flat = evolve(uniform_state(g), H, 1.0, t)
    zero = float(np.max(np.abs(consciousness_measure(flat))))
    psi0 = uniform_state(g)
    psi1 = plane_wave(encode(1, cfg), g).normalized()
    sup = (psi0 + psi1) * (1 / math.sqrt(2))
    vals = [consciousness_measure(evolve(sup, H, 1.0, t))[25] for _ in range(2)]
    pinned = _consciousness_pinned()
    dev = max(abs(v - pinned) for v in vals)
    ok = zero <= 1e-10 and dev <= 1e-9 and vals[0] == vals[1] and vals[0] > 0
    return CheckResult(13, "consciousness_measure", ok, dev, 1e-9,
                       f"flat {zero:.1e}; superposition {vals[0]:.12f}")


def check_schmidt() -> CheckResult:
    cfg = BaseConfig(2)
    g1 = make_grid(cfg, 1, 1)
    rng = np.random.default_rng(9)
    a = StateVector(g1, rng.normal(size=g1.size) + 1j * rng.normal(size=g1.size)).normalized()
    b = StateVector(g1, rng.normal(size=g1.size)).normalized()
    _, r_prod = schmidt_analysis(tensor_state(a, b))
    # orthonormal pairs: two characters per axis
    e1 = uniform_state(g1)
    e2 = plane_wave(encode(1, cfg), g1).normalized()
    f1 = plane_wave(PadicNumber.from_digits(cfg, -1, [1]), g1).normalized()
    f2 = plane_wave(PadicNumber.from_digits(cfg, -1, [1, 1]), g1).normalized()
    # first vector of the mixed basis U (e1f1, e2f2) with a Hadamard mixing U
    mixed = StateVector(tensor_state(e1, f1).grid,
                        (tensor_state(e1, f1).coeffs + tensor_state(e2, f2).coeffs) / math.sqrt(2))
    sig, rank = schmidt_analysis(mixed)
    dev = float(np.max(np.abs(sig[:2] - 1 / math.sqrt(2))))
    ok = r_prod == 1 and rank == 2 and dev <= 1e-10
    return CheckResult(14, "schmidt_entanglement", ok, dev, 1e-10,
                       f"product rank {r_prod}, mixed rank {rank}")


CHECKS = [
    check_uniform_ball_probability, check_motivation_mean, check_free_wave, check_spectrum_law,
    check_operator_forms, check_fourier_suite, check_uncertainty, check_entropy_identity,
    check_evolution, check_ground_state, check_measurement, check_dynamics,
    check_consciousness, check_schmidt,
]
QUICK = [check_uniform_ball_probability, check_motivation_mean, check_spectrum_law]


QUICK_BUDGET_S = 60.0
FULL_BUDGET_S = 600.0


def run_checks(quick: bool = False, echo=None) -> list:
    """Run the suite; the last result is the wall-clock budget check."""
    out = []
    start = time.perf_counter()
    for fn in (QUICK if quick else CHECKS):
        t0 = time.perf_counter()
        try:
            r = fn()
        except Exception as exc:  # a crashing check is a failed check
            r = CheckResult(-1, fn.__name__, False, float("inf"), 0.0, f"error: {exc!r}")
        r = CheckResult(r.cid, r.name, r.passed, r.deviation, r.tolerance, r.detail,
                        time.perf_counter() - t0)
        if echo:
            echo(r.line())
        out.append(r)
    total = time.perf_counter() - start
    budget = QUICK_BUDGET_S if quick else FULL_BUDGET_S
    r = CheckResult(15, "wall_clock_budget", total < budget, total, budget,
                    f"{'quick' if quick else 'full'} run {total:.1f} s", total)
    if echo:
        echo(r.line())
    out.append(r)
    return out

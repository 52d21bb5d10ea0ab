"""Command-line entry point.

Every subcommand takes ``--config FILE`` (flat ``key = value``) and
``--KEY VALUE`` flags; flags override the file, the file overrides the
defaults.  The resolved configuration is echoed to stdout and written as
``config.json`` next to the outputs.  Randomness comes only from ``seed``:
each component draws from ``SeedSequence([seed, crc32(component)])``.

Exit codes: 0 success, 1 failed acceptance check, 2 invalid configuration
or input, 3 grid size limit exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import dynamics as dyn
from .acceptance import run_checks
from .evolution import average, consciousness_measure, entropy, evolve
from .formats import FormatError, read_config, read_spikes, read_state, spike_windows, write_state
from .grid import (DEFAULT_MAX_CELLS, GridSizeError, GridSpec, StateVector, cell_index_of,
                   encode_spike_train, from_empirical, uniform_state)
from .measurement import (RdsConfig, derive_seed, measurement_statistics, projective_measure,
                          rds_stream, records_to_jsonl, spawn_rngs)
from .operators import (PlanckConstant, hamiltonian, motivation_magnitude, neuron_activation,
                        position_magnitude, potential_abs2, spectrum)
from .padic import BaseConfig, PadicNumber, encode, parse
from .transform import fourier, inverse_fourier


class ConfigError(ValueError):
    def __init__(self, key, msg):
        super().__init__(f"config key '{key}': {msg}")
        self.key = key


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _choice(*options):
    def conv(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return conv


GRID_KEYS = {
    "p": (int, 2, "prime base"),
    "N": (int, 1, "domain is the ball of radius p^N"),
    "M": (int, 2, "cells have radius p^-M"),
    "d": (int, 1, "number of axes"),
    "max_cells": (int, DEFAULT_MAX_CELLS, "grid size limit"),
}
PHYS_KEYS = {
    "m": (int, 0, "Planck constant h = p^-m"),
    "potential": (_choice("none", "abs2", "file"), "abs2", "potential preset"),
    "potential_file": (str, "", "one potential value per line, cell order"),
    "zero_mode": (_choice("infimum", "cell_average"), "infimum", "multiplier on the dual zero cell"),
}
STATE_KEYS = {
    "state": (_choice("uniform", "ground", "two_level", "random", "file"), "two_level",
              "initial state preset"),
    "state_file": (str, "", "state file when state = file"),
    "seed": (int, 0, "master seed"),
}
OUT = {"out": (str, "padicmind-out", "output directory")}

SCHEMAS = {
    "spectrum": {**GRID_KEYS, **PHYS_KEYS, "potential": (PHYS_KEYS["potential"][0], "none",
                                                         "potential preset"),
                 "alpha": (float, 1.0, "order of the Vladimirov operator"),
                 "tau_deg": (float, 1e-7, "relative degeneracy tolerance"), **OUT},
    "transform": {"state_file": (str, "", "input state file"),
                  "method": (_choice("dense", "fast"), "fast", "transform route"),
                  "inverse": (_bool, False, "apply the inverse transform"),
                  "max_cells": GRID_KEYS["max_cells"], **OUT},
    "evolve": {**GRID_KEYS, **PHYS_KEYS, **STATE_KEYS,
               "t_start": (float, 0.0, "first time sample"),
               "t_stop": (float, 10.0, "last time sample"),
               "t_steps": (int, 101, "number of time samples"),
               "sign": (int, 1, "phase sign of stationary states"), **OUT},
    "measure": {**GRID_KEYS, **PHYS_KEYS, **STATE_KEYS,
                "observable": (_choice("M_q", "M_xi", "A", "H"), "M_q", "observable to measure"),
                "trials": (int, 10000, "number of independent trials"), **OUT},
    "rds": {**GRID_KEYS, **PHYS_KEYS, **STATE_KEYS,
            "family": (str, "M_q,A,M_xi", "comma separated observables"),
            "steps": (int, 50, "selection steps"),
            "memory_depth": (int, 1, "selections remembered"),
            "memory_decay": (float, 0.5, "weight decay per remembered step"),
            "subset_size": (int, 0, "commuting subset size; 0 for maximal subsets"), **OUT},
    "dynamics": {"p": (int, 2, "prime base"), "K": (int, 64, "digit precision"),
                 "n": (int, 2, "exponent of x -> x^n"),
                 "x0": (str, "3", "initial point: integer, fraction or p-adic literal"),
                 "steps": (int, 50, "iterations"),
                 "noise_depth": (int, 0, "digit-flip noise depth; 0 disables noise"),
                 "noise_rate": (float, 1.0, "flip probability per step"),
                 "seed": (int, 0, "master seed"), **OUT},
    "ingest": {"spikes": (str, "", "spike CSV neuron_index,window_index,count"),
               "p": (int, 5, "prime base"), "window_ms": (float, 100.0, "window length (metadata)"),
               "N": (int, 0, "domain radius exponent"),
               "M": (int, 0, "cell radius exponent; 0 uses the neuron count"),
               "max_cells": GRID_KEYS["max_cells"], **OUT},
}


def _coerce(schema, raw: dict) -> dict:
    out = {}
    for key, val in raw.items():
        if key not in schema:
            raise ConfigError(key, "unknown key")
        conv = schema[key][0]
        try:
            out[key] = conv(val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(key, str(exc)) from None
    return out


def resolve_config(command: str, file_values: dict, flag_values: dict) -> dict:
    schema = SCHEMAS[command]
    cfg = {k: v[1] for k, v in schema.items()}
    cfg.update(_coerce(schema, file_values))
    cfg.update(_coerce(schema, flag_values))
    return cfg


# -- shared builders --------------------------------------------------------

def _grid(cfg) -> GridSpec:
    try:
        base = BaseConfig(cfg["p"])
    except ValueError as exc:
        raise ConfigError("p", str(exc)) from None
    for key in ("M", "d", "max_cells"):
        if cfg.get(key, 1) < 1:
            raise ConfigError(key, "must be >= 1")
    if cfg["N"] + cfg["M"] < 1:
        raise ConfigError("N", "need N + M >= 1")
    return GridSpec(base, cfg["N"], cfg["M"], cfg.get("d", 1), cfg["max_cells"])


def _potential(cfg, grid):
    kind = cfg["potential"]
    if kind == "none":
        return None
    if kind == "abs2":
        return potential_abs2(grid)
    if not cfg["potential_file"]:
        raise ConfigError("potential_file", "required when potential = file")
    try:
        vals = np.loadtxt(cfg["potential_file"], dtype=float, ndmin=1)
    except (OSError, ValueError) as exc:
        raise ConfigError("potential_file", str(exc)) from None
    if vals.size != grid.size:
        raise ConfigError("potential_file", f"{vals.size} values for {grid.size} cells")
    return vals


def _planck(cfg):
    return PlanckConstant(cfg["p"], cfg["m"])


def _hamiltonian(cfg, grid):
    return hamiltonian(grid, _planck(cfg), _potential(cfg, grid), cfg["zero_mode"])


def _initial_state(cfg, grid, H_dec) -> StateVector:
    kind = cfg["state"]
    if kind == "uniform":
        return uniform_state(grid)
    if kind == "ground":
        return H_dec.eigenvector(0)
    if kind == "two_level":
        a, b = H_dec.groups[0][0], H_dec.groups[min(1, len(H_dec.groups) - 1)][0]
        if a == b:
            return H_dec.eigenvector(0)
        return StateVector(grid, (H_dec.vectors[:, a] + H_dec.vectors[:, b]) / math.sqrt(2),
                           label="two_level")
    if kind == "random":
        rng = np.random.default_rng(derive_seed(cfg["seed"], "initial-state"))
        z = rng.normal(size=grid.size) + 1j * rng.normal(size=grid.size)
        return StateVector(grid, z, label="random").normalized()
    if not cfg["state_file"]:
        raise ConfigError("state_file", "required when state = file")
    phi = read_state(cfg["state_file"], cfg["max_cells"])
    if phi.grid != grid:
        raise ConfigError("state_file", "state grid differs from the configured grid")
    return phi.normalized()


def _observable(name, cfg, grid, H=None):
    if name == "M_q":
        return position_magnitude(grid, cfg["zero_mode"])
    if name == "M_xi":
        return motivation_magnitude(grid, _planck(cfg), cfg["zero_mode"])
    if name == "A":
        return neuron_activation(grid)
    if name == "H":
        return H if H is not None else _hamiltonian(cfg, grid)
    raise ConfigError("observable", f"unknown observable {name!r}")


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# -- subcommands ------------------------------------------------------------

def cmd_spectrum(cfg, out: Path):
    grid = _grid(cfg)
    if cfg["alpha"] <= 0:
        raise ConfigError("alpha", "must be positive")
    op = hamiltonian(grid, _planck(cfg), _potential(cfg, grid), cfg["zero_mode"], cfg["alpha"])
    dec = spectrum(op, cfg["tau_deg"])
    _write_csv(out / "spectrum.csv", ["eigenvalue", "multiplicity"],
               [[_fmt(v), m] for v, m in dec.levels()])
    _write_json(out / "residuals.json", {
        "max_residual": dec.max_residual, "orthonormality_error": dec.orthonormality_error,
        "levels": len(dec.groups), "dimension": grid.size})
    return 0


def cmd_transform(cfg, out: Path):
    if not cfg["state_file"]:
        raise ConfigError("state_file", "required")
    phi = read_state(cfg["state_file"], cfg["max_cells"])
    fn = inverse_fourier if cfg["inverse"] else fourier
    res = fn(phi, method=cfg["method"])
    write_state(out / "state.csv", res)
    return 0


def cmd_evolve(cfg, out: Path):
    grid = _grid(cfg)
    if cfg["t_steps"] < 2:
        raise ConfigError("t_steps", "need at least two samples")
    if cfg["sign"] not in (1, -1):
        raise ConfigError("sign", "must be 1 or -1")
    H = _hamiltonian(cfg, grid)
    dec = spectrum(H)
    phi0 = _initial_state(cfg, grid, dec)
    times = np.linspace(cfg["t_start"], cfg["t_stop"], cfg["t_steps"])
    ev = evolve(phi0, H, _planck(cfg), times, sign=cfg["sign"], decomposition=dec)
    P = ev.probabilities()
    _write_csv(out / "probabilities.csv", ["t"] + [f"cell_{i}" for i in range(grid.size)],
               [[_fmt(t)] + [_fmt(x) for x in row] for t, row in zip(times, P)])
    Mq = position_magnitude(grid, cfg["zero_mode"])
    cons = consciousness_measure(ev) if grid.d == 1 else [float("nan")] * len(times)
    rows = []
    for t, s, n, c in zip(times, ev.states, ev.norms, cons):
        rows.append([_fmt(t), _fmt(n), _fmt(average(H, s)), _fmt(average(Mq, s)), _fmt(c)])
    _write_csv(out / "observables.csv", ["t", "norm", "energy", "mean_abs_q", "consciousness"],
               rows)
    write_state(out / "initial_state.csv", phi0)
    return 0


def cmd_measure(cfg, out: Path):
    grid = _grid(cfg)
    if cfg["trials"] < 1:
        raise ConfigError("trials", "must be positive")
    H = _hamiltonian(cfg, grid)
    hdec = spectrum(H)
    phi = _initial_state(cfg, grid, hdec).normalized()
    A = _observable(cfg["observable"], cfg, grid, H)
    dec = hdec if cfg["observable"] == "H" else spectrum(A)
    vals, probs, _ = measurement_statistics(phi, A, dec)
    counts = np.zeros(len(vals), dtype=int)
    for rng in spawn_rngs(cfg["seed"], "measure", cfg["trials"]):
        v, _, _ = projective_measure(phi, A, rng, dec)
        counts[int(np.argmin(np.abs(vals - v)))] += 1
    _write_csv(out / "histogram.csv", ["outcome", "born_probability", "count", "frequency"],
               [[_fmt(v), _fmt(p), int(c), _fmt(c / cfg["trials"])]
                for v, p, c in zip(vals, probs, counts)])
    return 0


def cmd_rds(cfg, out: Path):
    grid = _grid(cfg)
    labels = tuple(s.strip() for s in cfg["family"].split(",") if s.strip())
    if not labels:
        raise ConfigError("family", "empty observable family")
    H = _hamiltonian(cfg, grid)
    hdec = spectrum(H)
    phi = _initial_state(cfg, grid, hdec).normalized()
    fam = {name: _observable(name, cfg, grid, H) for name in labels}
    try:
        rc = RdsConfig(family=labels, memory_depth=cfg["memory_depth"],
                       memory_decay=cfg["memory_decay"],
                       subset_size=cfg["subset_size"] or None, seed=cfg["seed"])
    except ValueError as exc:
        raise ConfigError("memory_depth" if "depth" in str(exc) else "memory_decay",
                          str(exc)) from None
    try:
        recs = rds_stream(phi, fam, rc, cfg["steps"])
    except ValueError as exc:
        raise ConfigError("subset_size", str(exc)) from None
    (out / "records.jsonl").write_text(records_to_jsonl(recs))
    return 0


def _parse_x0(text: str, cfg: BaseConfig) -> PadicNumber:
    text = text.strip()
    if "(" in text:
        x = parse(text, cfg.K)
        if x.p != cfg.p:
            raise ValueError("literal base differs from p")
        return x
    return encode(Fraction(text), cfg)


def cmd_dynamics(cfg, out: Path):
    try:
        base = BaseConfig(cfg["p"], cfg["K"])
    except ValueError as exc:
        raise ConfigError("p", str(exc)) from None
    try:
        x0 = _parse_x0(cfg["x0"], base)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError("x0", str(exc)) from None
    try:
        spec = dyn.DynSpec(cfg["p"], cfg["K"], cfg["n"], x0, cfg["steps"])
    except ValueError as exc:
        key = "n" if "exponent" in str(exc) else "steps" if "steps" in str(exc) else "x0"
        raise ConfigError(key, str(exc)) from None
    noise = None
    if cfg["noise_depth"] > 0:
        try:
            noise = dyn.NoiseSpec(cfg["noise_depth"], cfg["noise_rate"], cfg["seed"])
        except ValueError as exc:
            raise ConfigError("noise_rate", str(exc)) from None
    rep, stable = dyn.perturbed_iterate(spec, noise)
    rows = []
    for k, (x, j) in enumerate(zip(rep.orbit, rep.distance_exponents())):
        digs = " ".join(str(d) for d in x.digits) if not x.is_zero else "0"
        rows.append([k, "inf" if j is None else j, digs])
    _write_csv(out / "orbit.csv", ["step", "distance_exponent", "digits"], rows)
    _write_json(out / "summary.json", {
        "classification": rep.classification, "empirical": rep.empirical,
        "exhausted": rep.exhausted, "points": len(rep.orbit),
        "noise_stable": stable if noise is not None else None})
    return 0


def cmd_ingest(cfg, out: Path):
    if not cfg["spikes"]:
        raise ConfigError("spikes", "spike CSV path required")
    try:
        base = BaseConfig(cfg["p"])
    except ValueError as exc:
        raise ConfigError("p", str(exc)) from None
    try:
        rows = read_spikes(cfg["spikes"])
    except OSError as exc:
        raise ConfigError("spikes", str(exc)) from None
    for r in rows:
        if r.count >= base.p:
            raise FormatError(f"count {r.count} exceeds p - 1 = {base.p - 1}", r.line)
    windows = spike_windows(rows)
    width = len(next(iter(windows.values())))
    M = cfg["M"] or width
    grid = _grid({"p": base.p, "N": cfg["N"], "M": M, "d": 1, "max_cells": cfg["max_cells"]})
    counts = np.zeros(grid.size)
    for w, train in windows.items():
        x = encode_spike_train(train, BaseConfig(base.p, max(base.K, width)), cfg["window_ms"])
        counts[cell_index_of(grid, x)] += 1
    phi = from_empirical(grid, counts, label="ingested")
    write_state(out / "state.csv", phi)
    P = phi.probabilities()
    _write_json(out / "summary.json", {
        "windows": len(windows), "neurons": width, "window_ms": cfg["window_ms"],
        "entropy": entropy(grid, P), "mean_activation": average(neuron_activation(grid), phi)})
    return 0


COMMANDS = {"spectrum": cmd_spectrum, "transform": cmd_transform, "evolve": cmd_evolve,
            "measure": cmd_measure, "rds": cmd_rds, "dynamics": cmd_dynamics,
            "ingest": cmd_ingest}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="padicmind", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value file; flags override it")
        if name == "ingest":
            sp.add_argument("spikes_path", nargs="?", help="spike CSV (same as --spikes)")
        for key, (_, default, help_) in schema.items():
            flags = [f"--{key}"]
            if "_" in key:
                flags.append(f"--{key.replace('_', '-')}")
            sp.add_argument(*flags, dest=key, default=argparse.SUPPRESS,
                            help=f"{help_} (default: {default})")
    vp = sub.add_parser("verify", help="run the acceptance suite")
    vp.add_argument("--quick", action="store_true", help="worked-example checks only")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        results = run_checks(quick=args.quick, echo=print)
        failed = [r for r in results if not r.passed]
        print(f"{len(results) - len(failed)}/{len(results)} checks passed")
        return 1 if failed else 0
    flags = {k: v for k, v in vars(args).items()
             if k not in ("command", "config", "spikes_path")}
    if getattr(args, "spikes_path", None):
        flags.setdefault("spikes", args.spikes_path)
    try:
        file_values = read_config(args.config) if args.config else {}
        cfg = resolve_config(args.command, file_values, flags)
        out = Path(cfg["out"])
        print(json.dumps({"command": args.command, "config": cfg}, sort_keys=True))
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "config.json", {"command": args.command, "config": cfg})
        return COMMANDS[args.command](cfg, out)
    except GridSizeError as exc:
        print(f"error: grid size limit: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

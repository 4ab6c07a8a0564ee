"""Command-line front end.

Every subcommand reads one JSON document (a path, or ``-`` for standard
input).  A JSON list of documents is a sweep; ``--jobs N`` runs its items in
parallel processes.  Outputs go to files named by ``--out PREFIX``; without
a prefix the primary table is written to standard output.
"""
from __future__ import annotations

import argparse
import cmath
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from .errors import (
    CapabilityError, DegenerateLatticeError, DegenerateMotionError, DomainError,
    NoPhysicalBracketError, SingularityError,
)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_CAPABILITY = 4

CLASSICAL_COLUMNS = ["t", "re_z0", "im_z0", "re_z1", "im_z1", "re_z2", "im_z2",
                     "I0", "psi0", "H", "C"]


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------- formatting

def fmt(x: float) -> str:
    """17 significant digits, round-trip exact."""
    return "%.17g" % float(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return bool(obj) if isinstance(obj, np.bool_) else obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    x = float(obj)
    if not math.isfinite(x):
        return None
    return _Float17(x)


class _Float17(float):
    def __repr__(self):
        return fmt(self)


class _Encoder(json.JSONEncoder):
    def iterencode(self, o, _one_shot=False):
        # the C encoder ignores float subclasses' repr; use the Python path
        return json.encoder._make_iterencode(
            {}, self.default, json.encoder.encode_basestring, self.indent,
            lambda f: fmt(f), self.key_separator, self.item_separator,
            self.sort_keys, self.skipkeys, _one_shot)(o, 0)


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), cls=_Encoder, indent=2, sort_keys=True) + "\n"


def csv_text(header: list, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------- config

def _num(d: dict, key: str, default=None, section: str = "") -> float:
    if key not in d:
        if default is None:
            raise ConfigError(f"missing field {section + '.' if section else ''}{key}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"field {key} must be a finite number, got {v!r}")
    return float(v)


def _int(d: dict, key: str, default=None, minimum: int = 0) -> int:
    if key not in d:
        if default is None:
            raise ConfigError(f"missing field {key}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(f"field {key} must be an integer >= {minimum}, got {v!r}")
    return v


def _section(cfg: dict, name: str) -> dict:
    sec = cfg.get(name)
    if not isinstance(sec, dict):
        raise ConfigError(f"missing object {name!r}")
    return sec


def _params(cfg: dict):
    from .model import ModelParams
    sec = _section(cfg, "params")
    try:
        return ModelParams(_num(sec, "omega0"), _num(sec, "omega1"), _num(sec, "omega2"),
                           _num(sec, "g0"), _num(sec, "hbar", 1.0))
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def _time_grid(sec: dict) -> np.ndarray:
    span = sec.get("t_span")
    if not (isinstance(span, list) and len(span) == 2):
        raise ConfigError("t_span must be a two-element list")
    t0, t1 = (_num({"v": v}, "v") for v in span)
    if not t1 > t0:
        raise ConfigError("t_span must be increasing")
    n = _int(sec, "n_samples", minimum=2)
    return np.linspace(t0, t1, n)


def _complex_pair(v) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(float(v), 0.0)
    if not (isinstance(v, list) and len(v) == 2):
        raise ConfigError(f"complex values are [re, im] pairs, got {v!r}")
    re, im = (_num({"v": x}, "v") for x in v)
    return complex(re, im)


def _label(sec: dict):
    from .quantum import BlockLabel
    return BlockLabel(_int(sec, "v1"), _int(sec, "v2"))


# ---------------------------------------------------------------- commands

@dataclass
class Outcome:
    files: dict       # suffix -> text
    primary: str      # suffix of the table written to stdout without --out
    code: int = EXIT_OK


def cmd_classical(cfg: dict) -> Outcome:
    from .classical import exact_solution, integrate_threewave, phase_recovery
    from .model import (
        ActionAngle, ModeAmplitudes, casimir, from_action_angle, hamiltonian_classical,
        kummer_point, momentum_map, reduced_invariants, to_action_angle, wrap_angle,
    )
    p = _params(cfg)
    sec = _section(cfg, "classical")
    amps = sec.get("z0")
    if not (isinstance(amps, list) and len(amps) == 3):
        raise ConfigError("classical.z0 must list three [re, im] pairs")
    z0 = ModeAmplitudes(*(_complex_pair(a) for a in amps))
    t = _time_grid(sec)
    method = sec.get("method", "rk")
    if method not in ("exact", "rk", "both"):
        raise ConfigError(f"classical.method must be exact, rk or both, got {method!r}")
    rtol = _num(sec, "rel_tol", 1e-10)

    inv = reduced_invariants(z0, p)
    tau = t - t[0]  # amplitudes are given at t_span[0]
    sol = None
    if method in ("exact", "both"):
        sol = exact_solution(z0, p)
    if method == "exact":
        aa0 = to_action_angle(z0)
        I0 = np.asarray(sol.i0(tau), dtype=float)
        ps0, ps1, ps2 = phase_recovery(sol, aa0, tau)
        Z = np.array([from_action_angle(ActionAngle(I0[i], inv.c1, inv.c2, ps0[i], ps1[i], ps2[i])).as_array()
                      for i in range(t.size)])
    else:
        _, Z = integrate_threewave(z0, p, tau, rel_tol=rtol)
    header = list(CLASSICAL_COLUMNS)
    rows = []
    Hs, I1s, I2s = [], [], []
    for i, ti in enumerate(t):
        z = ModeAmplitudes(*Z[i])
        H = hamiltonian_classical(z, p)
        I1, I2 = momentum_map(z)
        kp = kummer_point(z, p.g0)
        C = casimir(kp, inv, p.g0)
        psi0 = wrap_angle(cmath.phase(z.z0) - cmath.phase(z.z1) - cmath.phase(z.z2))
        Hs.append(H)
        I1s.append(I1)
        I2s.append(I2)
        rows.append([ti, z.z0.real, z.z0.imag, z.z1.real, z.z1.imag, z.z2.real, z.z2.imag,
                     abs(z.z0) ** 2, psi0, H, C])
    summary: dict[str, Any] = {"method": method, "n_samples": int(t.size)}
    if method == "both":
        header.append("I0_exact")
        ie = np.asarray(sol.i0(tau), dtype=float)
        for r, v in zip(rows, ie):
            r.append(v)
        summary["max_dev_exact_rk"] = float(np.max(np.abs(ie - np.abs(Z[:, 0]) ** 2)))
    else:
        summary["max_dev_exact_rk"] = None

    def drift(v):
        v = np.asarray(v)
        return float(np.max(np.abs(v - v[0])) / max(abs(v[0]), 1e-300))

    summary.update(drift_H=drift(Hs), drift_I1=drift(I1s), drift_I2=drift(I2s))
    if sol is not None and not sol.frozen:
        summary["period"] = sol.period()
    return Outcome({"trajectory.csv": csv_text(header, rows), "summary.json": dumps(summary)},
                   "trajectory.csv")


def cmd_spectrum(cfg: dict) -> Outcome:
    from .quantum import block_spectrum, build_block, char_poly_coefficients, parity_factorization
    p = _params(cfg)
    sec = _section(cfg, "spectrum")
    label = _label(sec)
    method = sec.get("method", "both")
    if method not in ("sturm", "explicit", "both"):
        raise ConfigError(f"spectrum.method must be sturm, explicit or both, got {method!r}")
    block = build_block(label, p)
    out: dict[str, Any] = {"v1": label.v1, "v2": label.v2, "shift": block.shift,
                           "eigenvalues_sturm": block_spectrum(block)[0],
                           "char_poly_coeffs": char_poly_coefficients(block)}
    if method == "explicit":
        out["eigenvalues_explicit"] = block_spectrum(block, "explicit")[0]
    elif method == "both" and block.resonant and label.L <= 8:
        out["eigenvalues_explicit"] = block_spectrum(block, "explicit")[0]
    out["parity"] = parity_factorization(block).parity if block.resonant else "none"
    return Outcome({"spectrum.json": dumps(out)}, "spectrum.json")


def _initial_state(sec: dict, label, p) -> np.ndarray:
    from .coherent import reduced_coherent_vector
    init = sec.get("initial", {"n": 0})
    if not isinstance(init, dict) or len(init) != 1:
        raise ConfigError("quantum.initial must be {\"n\": index} or {\"zhat\": [re, im]}")
    if "n" in init:
        n = _int(init, "n")
        if n > label.L:
            raise ConfigError(f"initial index {n} outside 0..{label.L}")
        psi = np.zeros(label.dim, dtype=complex)
        psi[n] = 1.0
        return psi
    if "zhat" in init:
        v = reduced_coherent_vector(_complex_pair(init["zhat"]), label, p).amplitudes
        return v / np.linalg.norm(v)
    raise ConfigError("quantum.initial must be {\"n\": index} or {\"zhat\": [re, im]}")


def cmd_evolve_q(cfg: dict) -> Outcome:
    from .quantum import block_operators, build_block, evolution_operator
    p = _params(cfg)
    sec = _section(cfg, "quantum")
    label = _label(sec)
    t = _time_grid(sec)
    block = build_block(label, p)
    psi0 = _initial_state(sec, label, p)
    ops = block_operators(label, p)
    header = ["t"] + [f"pop_{n}" for n in range(label.dim)] + ["A0", "X", "Y"]
    rows = []
    for ti in t:
        psi = evolution_operator(ti, block) @ psi0
        pops = np.abs(psi) ** 2
        ev = [float(np.vdot(psi, o.matrix @ psi).real) for o in (ops.A0, ops.X, ops.Y)]
        rows.append([ti, *pops, *ev])
    return Outcome({"evolution.csv": csv_text(header, rows)}, "evolution.csv")


def cmd_transition(cfg: dict) -> Outcome:
    """Closed-form and matrix-element transition probability on an L = 2 block."""
    from .quantum import BlockLabel, build_block, transition_probability, transition_probability_numeric
    p = _params(cfg)
    sec = _section(cfg, "quantum")
    v1 = _int(sec, "v1", minimum=2)
    t = _time_grid(sec)
    if p.delta != 0:
        raise CapabilityError("the closed-form transition probability needs resonance")
    block = build_block(BlockLabel(v1, 2), p)
    rows = [[ti, transition_probability(ti, v1, p), transition_probability_numeric(ti, block, 0, 2)]
            for ti in t]
    return Outcome({"transition.csv": csv_text(["t", "closed_form", "matrix_element"], rows)},
                   "transition.csv")


def cmd_measure(cfg: dict) -> Outcome:
    from .coherent import moment_check, weight_rho
    p = _params(cfg)
    sec = _section(cfg, "measure")
    label = _label(sec)
    n_max = _int(sec, "n_max", label.L)
    if n_max > label.L:
        raise ConfigError(f"measure.n_max must be <= L = {label.L}")
    xs = sec.get("x", None)
    if xs is None:
        xs = np.exp(np.linspace(math.log(1e-2), math.log(1e2), 41))
    else:
        xs = np.array([_num({"v": v}, "v") for v in xs])
        if np.any(xs <= 0):
            raise ConfigError("measure.x values must be positive")
    rho = weight_rho(xs, label, p)
    table = csv_text(["x", "rho"], zip(xs, np.atleast_1d(rho)))
    moments = {str(n): moment_check(n, label, p) for n in range(n_max + 1)}
    return Outcome({"rho.csv": table, "moments.json": dumps({"moment_residuals": moments})}, "rho.csv")


COMMANDS: dict[str, Callable[[dict], Outcome]] = {
    "classical": cmd_classical,
    "spectrum": cmd_spectrum,
    "evolve-q": cmd_evolve_q,
    "transition": cmd_transition,
    "measure": cmd_measure,
}


def _error_code(exc: BaseException) -> int:
    if isinstance(exc, (ConfigError, json.JSONDecodeError)):
        return EXIT_CONFIG
    if isinstance(exc, (DegenerateMotionError, DegenerateLatticeError, NoPhysicalBracketError,
                        SingularityError)):
        return EXIT_DEGENERATE
    if isinstance(exc, CapabilityError):
        return EXIT_CAPABILITY
    if isinstance(exc, (DomainError, IndexError)):
        return EXIT_CONFIG
    raise exc


def run_one(command: str, cfg: Any) -> tuple[int, Optional[Outcome], str]:
    """Run a command on one config; returns (exit code, outcome, error message)."""
    try:
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        return EXIT_OK, COMMANDS[command](cfg), ""
    except Exception as exc:  # mapped to documented exit codes, others re-raised
        code = _error_code(exc)
        return code, None, f"{type(exc).__name__}: {exc}"


def _read_config(path: str):
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _run_command(args) -> int:
    try:
        cfg = _read_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sweep = isinstance(cfg, list)
    items = cfg if sweep else [cfg]
    if args.jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(run_one, [args.command] * len(items), items))
    else:
        results = [run_one(args.command, c) for c in items]
    worst = EXIT_OK
    for i, (code, outcome, msg) in enumerate(results):
        if code:
            print(f"error{f' (item {i})' if sweep else ''}: {msg}", file=sys.stderr)
            worst = max(worst, code)
            continue
        if args.out:
            stem = f"{args.out}_{i}" if sweep else args.out
            for suffix, text in outcome.files.items():
                _write(f"{stem}_{suffix}", text)
        else:
            sys.stdout.write(outcome.files[outcome.primary])
    return worst


def _run_verify(args) -> int:
    from .verify import run_suite
    rep = run_suite(args.suite, seed=args.seed, fault=args.inject_fault)
    text = rep.format() + "\n"
    sys.stdout.write(text)
    if args.out:
        _write(f"{args.out}_verify.txt", text)
    return EXIT_OK if rep.passed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="threewave", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("config", help="JSON config path, or - for standard input")
        sp.add_argument("--out", help="output file prefix")
        sp.add_argument("--jobs", type=int, default=1, help="parallel workers for config sweeps")
    vp = sub.add_parser("verify")
    vp.add_argument("suite", nargs="?", default="all", choices=["all", "classical", "quantum", "coherent"])
    vp.add_argument("--seed", type=int, default=None, help="RNG seed (default: THREEWAVE_SEED or built-in)")
    vp.add_argument("--inject-fault", choices=["negate-b"], default=None,
                    help="deliberately corrupt the block couplings to exercise the failure path")
    vp.add_argument("--out", help="also write the report to PREFIX_verify.txt")
    return ap


def main(argv: Optional[list] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "verify":
        return _run_verify(args)
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    return _run_command(args)


if __name__ == "__main__":
    sys.exit(main())

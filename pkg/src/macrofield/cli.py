"""Experiment runner: one subcommand per experiment, CSV or JSON reports.

Every run echoes its parsed configuration, so a report can be replayed
bit-for-bit from its own header. Records are always ordered by their leading
key even when the per-n work is spread over worker threads. Exit codes:
0 success, 2 bad input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from ._optim import OptimizerFailed
from .definetti import DiscreteMixture, field_of_states_check, fit_mixture, mixture_state
from .linalg import EigFailed, MacrofieldError, Operator, SiteSpace, spectral_norm
from .macrolimit import (
    NormGapRecord,
    born_curve,
    commutator_decay,
    fit_decay_exponent,
    product_state_sup,
    window_mass,
)
from .sections import FrequencySpec, SymmetricSection, frequency_section, materialize
from .states import BlochVector, PureState, bloch_to_density, density_to_bloch
from .stochastics import (
    And,
    BernoulliSpec,
    Leaf,
    Not,
    Or,
    quantum_classical_agreement,
    random_expression,
    slln_check,
)

__all__ = ["UnknownCommand", "BadFlag", "run", "main"]


class UnknownCommand(MacrofieldError):
    pass


class BadFlag(MacrofieldError):
    pass


_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "P0": np.diag([1.0, 0.0]).astype(np.complex128),
    "P1": np.diag([0.0, 1.0]).astype(np.complex128),
}

_SECTION_RE = re.compile(r"(avg|sym2|freq)\(([^)]*)\)\Z")


def _letter(tok: str) -> np.ndarray:
    key = tok.strip().upper()
    if key not in _PAULI:
        raise BadFlag(f"unknown one-site letter {tok!r}; use X, Y, Z, P0, P1")
    return _PAULI[key]


def _parse_section(text: str) -> tuple[SymmetricSection, str]:
    """Descriptor to section: avg(L), sym2(L,L), freq(0|1), or a bare letter."""
    src = text.strip()
    if src.upper() in _PAULI:
        src = f"avg({src})"
    m = _SECTION_RE.match(src)
    if m is None:
        raise BadFlag(f"bad section descriptor {text!r}")
    kind, body = m.group(1), m.group(2)
    if kind == "avg":
        arr = _letter(body)
        canon = f"avg({body.strip().upper()})"
        return SymmetricSection(2, 1, Operator(SiteSpace(2, 1), arr)), canon
    if kind == "sym2":
        parts = body.split(",")
        if len(parts) != 2:
            raise BadFlag(f"sym2 needs two letters, got {text!r}")
        a, b = _letter(parts[0]), _letter(parts[1])
        seed = 0.5 * (np.kron(a, b) + np.kron(b, a))
        canon = f"sym2({parts[0].strip().upper()},{parts[1].strip().upper()})"
        return SymmetricSection(2, 2, Operator(SiteSpace(2, 2), seed)), canon
    if body.strip() not in ("0", "1"):
        raise BadFlag(f"freq takes outcome 0 or 1, got {text!r}")
    k = int(body)
    proj = _PAULI["P1"] if k else _PAULI["P0"]
    spec = FrequencySpec(2, Operator(SiteSpace(2, 1), proj))
    return frequency_section(spec), f"freq({k})"


def _parse_n_list(text: str) -> list[int]:
    """Either lo..hi or a comma list; the result is strictly increasing."""
    src = text.strip()
    try:
        if ".." in src:
            lo_txt, hi_txt = src.split("..", 1)
            lo, hi = int(lo_txt), int(hi_txt)
            if hi < lo:
                raise BadFlag(f"empty site range {text!r}")
            vals = list(range(lo, hi + 1))
        else:
            vals = sorted({int(tok) for tok in src.split(",")})
    except ValueError:
        raise BadFlag(f"bad site list {text!r}") from None
    if not vals:
        raise BadFlag(f"bad site list {text!r}")
    return vals


def _parse_psi(text: str) -> PureState:
    try:
        amps = np.array([float(tok) for tok in text.split(",")], dtype=np.complex128)
    except ValueError:
        raise BadFlag(f"bad amplitude list {text!r}") from None
    if amps.size < 2:
        raise BadFlag("state needs at least two amplitudes")
    norm = float(np.linalg.norm(amps))
    if norm <= 0.0:
        raise BadFlag("state amplitudes are all zero")
    return PureState(amps.size, amps / norm)


def _parse_atoms(text: str) -> tuple[DiscreteMixture, str]:
    """w:x,y,z;w:x,y,z descriptor to a mixture of Bloch-point atoms."""
    pairs = []
    for part in text.split(";"):
        chunk = part.strip()
        if not chunk:
            continue
        try:
            w_txt, b_txt = chunk.split(":", 1)
            coords = [float(tok) for tok in b_txt.split(",")]
            weight = float(w_txt)
        except ValueError:
            raise BadFlag(f"bad atom {part!r}; expected w:x,y,z") from None
        if len(coords) != 3:
            raise BadFlag(f"atom needs three Bloch coordinates, got {part!r}")
        pairs.append((weight, bloch_to_density(BlochVector(*coords))))
    if not pairs:
        raise BadFlag("no atoms given")
    mix = DiscreteMixture(tuple(pairs))
    canon = ";".join(
        f"{w!r}:{density_to_bloch(rho).x!r},{density_to_bloch(rho).y!r},{density_to_bloch(rho).z!r}"
        for w, rho in mix.atoms
    )
    return mix, canon


def _freq_spec(d: int, lam: int) -> FrequencySpec:
    if not 0 <= lam < d:
        raise BadFlag(f"outcome index {lam} outside 0..{d - 1}")
    proj = np.zeros((d, d), dtype=np.complex128)
    proj[lam, lam] = 1.0
    return FrequencySpec(d, Operator(SiteSpace(d, 1), proj))


def _worker_count(n_items: int) -> int:
    raw = os.environ.get("MACROFIELD_THREADS")
    if raw is None:
        cap = os.cpu_count() or 1
    else:
        try:
            cap = int(raw)
        except ValueError:
            raise BadFlag(f"MACROFIELD_THREADS must be an integer, got {raw!r}") from None
        if cap < 1:
            raise BadFlag(f"MACROFIELD_THREADS must be >= 1, got {cap}")
    return max(1, min(cap, n_items))


def _map_ordered(fn, items):
    """Apply fn to each item, possibly on threads; results keep item order."""
    workers = _worker_count(len(items))
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _count_leaves(expr) -> int:
    total, stack = 0, [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            total += 1
        elif isinstance(node, Not):
            stack.append(node.inner)
        elif isinstance(node, (And, Or)):
            stack.extend((node.left, node.right))
    return total


def _clean(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


# ------------------------------------------------------------- subcommands
# each handler returns (config echo, column names, records, summary)


def _cmd_born_converge(args):
    psi = _parse_psi(args.psi)
    spec = _freq_spec(psi.d, args.lam)
    n_list = _parse_n_list(args.n)
    born = float(abs(psi.amplitudes[args.lam]) ** 2)
    tol = args.tol if args.tol is not None else 1e-10
    rows = _map_ordered(lambda n: born_curve(psi, spec, [n])[0], n_list)
    records = [
        {"n": int(n), "value": float(v), "born": born, "abs_error": abs(float(v) - born)}
        for n, v in rows
    ]
    worst = max(r["abs_error"] for r in records)
    config = {
        "psi": [float(a.real) for a in psi.amplitudes],
        "lambda": args.lam,
        "n_list": n_list,
        "tol": tol,
    }
    return config, ("n", "value", "born", "abs_error"), records, {
        "max_abs_error": worst,
        "ok": worst <= tol,
    }


def _cmd_commutator_decay(args):
    s1, canon1 = _parse_section(args.seed1)
    s2, canon2 = _parse_section(args.seed2)
    n_list = _parse_n_list(args.n)
    recs = _map_ordered(lambda n: commutator_decay(s1, s2, [n])[0], n_list)
    records = [
        {"n": r.n, "value": float(r.value), "scaled": float(r.scaled)} for r in recs
    ]
    exponent = fit_decay_exponent(recs)
    config = {"seed1": canon1, "seed2": canon2, "n_list": n_list}
    return config, ("n", "value", "scaled"), records, {
        "fitted_exponent": _clean(exponent)
    }


def _cmd_norm_gap(args):
    section, canon = _parse_section(args.section)
    n_list = _parse_n_list(args.n)
    sup = product_state_sup(section, section.m)

    def one(n: int) -> NormGapRecord:
        if n < section.m:
            raise BadFlag(f"n={n} below the seed order {section.m}")
        exact = spectral_norm(materialize(section, n))
        return NormGapRecord(n, exact, sup, exact - sup)

    recs = _map_ordered(one, n_list)
    records = [
        {
            "n": r.n,
            "exact_norm": float(r.exact_norm),
            "product_sup": float(r.product_sup),
            "gap": float(r.gap),
        }
        for r in recs
    ]
    gaps = [r["gap"] for r in records]
    config = {"section": canon, "n_list": n_list}
    return config, ("n", "exact_norm", "product_sup", "gap"), records, {
        "min_gap": min(gaps),
        "max_gap": max(gaps),
    }


def _cmd_window_mass(args):
    psi = _parse_psi(args.psi)
    spec = _freq_spec(psi.d, args.lam)
    n_list = _parse_n_list(args.n)
    if args.epsilon <= 0.0:
        raise BadFlag(f"window half-width must be positive, got {args.epsilon}")
    recs = _map_ordered(lambda n: window_mass(psi, spec, n, args.epsilon), n_list)
    records = [
        {"n": r.n, "epsilon": float(r.epsilon), "mass": float(r.mass)} for r in recs
    ]
    config = {
        "psi": [float(a.real) for a in psi.amplitudes],
        "lambda": args.lam,
        "epsilon": args.epsilon,
        "n_list": n_list,
    }
    return config, ("n", "epsilon", "mass"), records, {
        "born": float(abs(psi.amplitudes[args.lam]) ** 2),
        "final_mass": records[-1]["mass"],
    }


def _cmd_slln_mc(args):
    report = slln_check(
        BernoulliSpec(args.p), args.horizon, args.trials, args.delta, args.rng_seed
    )
    record = {
        "p": float(report.p),
        "horizon": int(report.n),
        "trials": int(report.trials),
        "delta": float(report.delta),
        "hit_fraction": float(report.hit_fraction),
        "hoeffding_bound": float(report.hoeffding_bound),
    }
    config = {
        "p": args.p,
        "horizon": args.horizon,
        "trials": args.trials,
        "delta": args.delta,
        "rng_seed": args.rng_seed,
    }
    cols = ("p", "horizon", "trials", "delta", "hit_fraction", "hoeffding_bound")
    return config, cols, [record], {}


def _cmd_boolean_check(args):
    if args.instances < 1:
        raise BadFlag(f"need at least one instance, got {args.instances}")
    tol = args.tol if args.tol is not None else 1e-10
    rng = np.random.default_rng(args.rng_seed)
    records = []
    for idx in range(args.instances):
        expr = random_expression(rng, args.sites, args.max_leaves)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        psi = PureState(2, v / np.linalg.norm(v))
        quantum, classical = quantum_classical_agreement(psi, expr, args.sites)
        records.append(
            {
                "instance": idx,
                "sites": args.sites,
                "leaves": _count_leaves(expr),
                "quantum": float(quantum),
                "classical": float(classical),
                "abs_error": abs(float(quantum) - float(classical)),
            }
        )
    worst = max(r["abs_error"] for r in records)
    config = {
        "instances": args.instances,
        "max_leaves": args.max_leaves,
        "sites": args.sites,
        "rng_seed": args.rng_seed,
        "tol": tol,
    }
    cols = ("instance", "sites", "leaves", "quantum", "classical", "abs_error")
    return config, cols, records, {"max_abs_error": worst, "ok": worst <= tol}


def _cmd_definetti_fit(args):
    mix, canon = _parse_atoms(args.atoms)
    target = mixture_state(mix, args.sites)
    result = fit_mixture(target, args.k_max)
    records = []
    for idx, (w, rho) in enumerate(result.mixture.atoms):
        b = density_to_bloch(rho)
        records.append(
            {"atom": idx, "weight": float(w), "x": b.x, "y": b.y, "z": b.z}
        )
    config = {"atoms": canon, "sites": args.sites, "k_max": args.k_max}
    return config, ("atom", "weight", "x", "y", "z"), records, {
        "residual": float(result.residual),
        "iterations": int(result.iterations),
        "budget_exhausted": bool(result.budget_exhausted),
    }


def _cmd_field_check(args):
    mix, canon = _parse_atoms(args.atoms)
    section, canon_sec = _parse_section(args.section)
    n_list = _parse_n_list(args.n) if args.n else list(range(section.m, 9))
    tol = args.tol if args.tol is not None else 1e-9
    rows = field_of_states_check(mix, section, n_list)
    records = [
        {"n": n, "lhs": float(lhs), "rhs": float(rhs), "abs_error": abs(lhs - rhs)}
        for n, lhs, rhs in rows
    ]
    worst = max(r["abs_error"] for r in records)
    config = {"atoms": canon, "section": canon_sec, "n_list": n_list, "tol": tol}
    return config, ("n", "lhs", "rhs", "abs_error"), records, {
        "limit_value": records[0]["rhs"],
        "max_abs_error": worst,
        "ok": worst <= tol,
    }


_COMMANDS = {
    "born-converge": _cmd_born_converge,
    "commutator-decay": _cmd_commutator_decay,
    "norm-gap": _cmd_norm_gap,
    "window-mass": _cmd_window_mass,
    "slln-mc": _cmd_slln_mc,
    "boolean-check": _cmd_boolean_check,
    "definetti-fit": _cmd_definetti_fit,
    "field-check": _cmd_field_check,
}


# ---------------------------------------------------------------- plumbing


def _u64(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed {value} outside the unsigned 64-bit range")
    return value


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--rng-seed", type=_u64, default=0, dest="rng_seed", metavar="U64")
    common.add_argument("--tol", type=float, default=None, metavar="REAL")
    common.add_argument(
        "--no-timestamp",
        action="store_true",
        help="omit timestamp and wall time, for byte-stable reports",
    )

    parser = argparse.ArgumentParser(
        prog="macrofield",
        description="Finite-size experiments over permutation-averaged observables.",
    )
    parser.add_argument("--version", action="version", version=f"macrofield {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("born-converge", parents=[common], help="frequency expectation per n")
    p.add_argument("--psi", required=True, help="comma-separated real amplitudes, normalized")
    p.add_argument("--lambda", dest="lam", type=int, default=1, help="basis outcome index")
    p.add_argument("--n", default="1..10", help="site counts, lo..hi or comma list")

    p = sub.add_parser("commutator-decay", parents=[common], help="commutator norm per n")
    p.add_argument("--seed1", required=True, help="section descriptor or bare letter")
    p.add_argument("--seed2", required=True)
    p.add_argument("--n", default="2..12")

    p = sub.add_parser("norm-gap", parents=[common], help="exact norm vs product supremum")
    p.add_argument("--section", required=True)
    p.add_argument("--n", default="2..12")

    p = sub.add_parser("window-mass", parents=[common], help="frequency window weight per n")
    p.add_argument("--psi", required=True)
    p.add_argument("--lambda", dest="lam", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--n", default="1..12")

    p = sub.add_parser("slln-mc", parents=[common], help="Bernoulli sample-mean concentration")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--horizon", type=int, required=True, help="sequence length per trial")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)

    p = sub.add_parser("boolean-check", parents=[common], help="event vs projection agreement")
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--max-leaves", dest="max_leaves", type=int, default=4)
    p.add_argument("--sites", type=int, default=6)

    p = sub.add_parser("definetti-fit", parents=[common], help="mixture recovery round trip")
    p.add_argument("--atoms", required=True, help="truth mixture, w:x,y,z;w:x,y,z")
    p.add_argument("--sites", type=int, default=6)
    p.add_argument("--k-max", dest="k_max", type=int, default=6)

    p = sub.add_parser("field-check", parents=[common], help="mixture expectations vs the limit")
    p.add_argument("--atoms", required=True)
    p.add_argument("--section", required=True)
    p.add_argument("--n", default=None, help="defaults to seed order..8")

    return parser


def _fmt_plain(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt_plain(v) for v in value)
    if value is None:
        return "nan"
    return str(value)


def _render_csv(report: dict, columns) -> str:
    lines = [f"# command={report['command']}", f"# version={report['version']}"]
    for key in sorted(report["config"]):
        lines.append(f"# {key}={_fmt_plain(report['config'][key])}")
    lines.append(",".join(columns))
    for rec in report["records"]:
        lines.append(",".join(_fmt_plain(rec[c]) for c in columns))
    for key in sorted(report.get("summary", ())):
        lines.append(f"# {key}={_fmt_plain(report['summary'][key])}")
    if "timestamp" in report:
        lines.append(f"# timestamp={report['timestamp']}")
        lines.append(f"# wall_time_s={_fmt_plain(report['wall_time_s'])}")
    return "\n".join(lines) + "\n"


def _render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 2
        return 0 if code == 0 else 2

    handler = _COMMANDS.get(args.command)
    if handler is None:
        print(f"error: unknown command {args.command!r}", file=sys.stderr)
        return 2

    started = time.perf_counter()
    try:
        config, columns, records, summary = handler(args)
    except (OptimizerFailed, EigFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (MacrofieldError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    config["format"] = args.format
    report = {
        "command": args.command,
        "version": __version__,
        "config": config,
        "records": records,
    }
    if summary:
        report["summary"] = summary
    if not args.no_timestamp:
        report["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        report["wall_time_s"] = round(time.perf_counter() - started, 6)

    text = _render_csv(report, columns) if args.format == "csv" else _render_json(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())

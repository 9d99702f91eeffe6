"""Command-line front end: ``contexta <command> ...``.

Covers are given as a JSON file or a name (mermin-square, mermin-star,
square-open, star-open, full:p:n).  States are given as a JSON file or a
shorthand (ghz, bell, maximally_mixed, basis:k, random:seed[:mix]).
Vectors are always written in (z|x) order: z_1..z_n followed by x_1..x_n.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .covers import _pauli_word, cover_to_json, load_cover, named_context
from .decision import (
    extend_cover,
    inequality,
    is_noncontextual,
    wigner_negativity,
)
from .errors import ContextaError, InputError
from .gfp import PrimeConfig, Subspace, span
from .presheaf import (
    ContextCover,
    compatibility_check,
    empirical_model,
    outcome_from_basis,
    section_space,
)
from .quantum import PROB_TOL, DensityMatrix, named_state, wigner
from .topology import (
    beta_is_coboundary,
    coset_poset,
    d_formula,
    euler_characteristic,
    group_for,
    homology_dims,
    sphere_count,
)

SCHEMA = "contexta/1"


# --------------------------------------------------------------------------
# argument parsing helpers


def _vec(v) -> list[int]:
    return [int(a) for a in v]


def _num(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    return round(float(x), 12)


def _load_json(path: Path, what: str):
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read {what} file {str(path)!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} file {str(path)!r}: {exc}") from None


def load_state(source: str, cfg: PrimeConfig, seed: int = 0) -> DensityMatrix:
    """A JSON state file or a shorthand such as 'ghz', 'basis:3', 'random:7:0.5'."""
    path = Path(source)
    if path.suffix == ".json" or path.is_file():
        return state_from_json(_load_json(path, "state"), cfg)
    name, *args = source.split(":")
    params: dict = {}
    try:
        if name == "basis" and args:
            params["k"] = int(args[0])
        elif name == "random":
            params["seed"] = int(args[0]) if args else seed
            if len(args) > 1:
                params["mix"] = float(args[1])
    except ValueError:
        raise InputError(f"bad state shorthand {source!r}") from None
    return named_state(name, cfg, **params)


def state_from_json(data: dict, cfg: PrimeConfig) -> DensityMatrix:
    if not isinstance(data, dict):
        raise InputError("state JSON must be an object")
    if "p" in data or "n" in data:
        if (data.get("p"), data.get("n")) != (cfg.p, cfg.n):
            raise InputError(f"state is for p={data.get('p')}, n={data.get('n')} but the cover has "
                             f"p={cfg.p}, n={cfg.n}")
    kind = data.get("kind")
    if kind == "named":
        return named_state(str(data.get("name")), cfg, **data.get("params", {}))
    if kind == "matrix":
        try:
            re = np.array(data["real"], dtype=float)
            im = np.array(data.get("imag", np.zeros_like(re)), dtype=float)
        except (KeyError, ValueError) as exc:
            raise InputError(f"matrix state needs numeric 'real' (and optional 'imag') arrays: {exc}") from None
        return DensityMatrix(re + 1j * im, cfg, label=data.get("label", "matrix"))
    raise InputError(f"state kind must be 'named' or 'matrix', got {kind!r}")


def load_context(source: str, cover: ContextCover) -> Subspace:
    """A JSON generator list, a 1-based index into the cover's generators, or 'name:k'."""
    cfg = cover.cfg
    text = source.strip()
    if text.startswith("["):
        try:
            gens = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"--context: {exc}") from None
        vecs = [_pauli_word(g, cfg.n) if isinstance(g, str) else cfg.check(g) for g in gens]
        return span(vecs, cfg)
    if text.isdigit():
        k = int(text)
        pool = cover.generators or tuple(tuple(I.basis) for I in cover.maximal)
        if not 1 <= k <= len(pool):
            raise InputError(f"context index {k} out of range 1..{len(pool)}")
        return span(pool[k - 1], cfg)
    J = named_context(text)
    if J.cfg != cfg:
        raise InputError(f"context {source!r} lives in p={J.cfg.p}, n={J.cfg.n}")
    return J


# --------------------------------------------------------------------------
# commands


def cmd_analyze_cover(args) -> dict:
    cover = load_cover(args.cover)
    coboundary, _witness = beta_is_coboundary(cover)  # guarded: fails fast on oversized covers
    h1, h2 = homology_dims(cover)
    _unknowns, sol = section_space(cover)
    return {
        "cover": cover.name or args.cover,
        "p": cover.cfg.p,
        "n": cover.cfg.n,
        "contexts": len(cover),
        "maximal_contexts": len(cover.maximal),
        "support": len(cover.support),
        "sections": sol.count,
        "strongly_contextual": sol.count == 0,
        "beta_coboundary": coboundary,
        "obstruction": not coboundary,
        "H1": h1,
        "H2": h2,
    }


def _context_label(I: Subspace) -> list:
    return [_vec(b) for b in I.basis]


def cmd_analyze_state(args) -> dict:
    cover = load_cover(args.cover)
    if args.extend:
        cover = extend_cover(cover, load_context(args.extend, cover))
    rho = load_state(args.state, cover.cfg, args.seed)
    model = empirical_model(rho, cover)
    report = {
        "cover": cover.name or args.cover,
        "state": rho.label or args.state,
        "p": cover.cfg.p,
        "n": cover.cfg.n,
        "contexts": len(cover),
        "compatible": compatibility_check(model).ok,
    }
    hidden = args.hidden
    if hidden == "auto":
        hidden = "points" if cover.cfg.p > 2 and cover.is_full() else "sections"
    verdict = is_noncontextual(model, mode=args.rationalize, hidden=hidden)
    report["hidden_variables"] = hidden
    report["verdict"] = verdict.kind
    if verdict.witness is not None:
        report["witness_support"] = len(verdict.witness)
    if verdict.certificate is not None:
        digest = hashlib.sha256(",".join(map(str, verdict.certificate)).encode()).hexdigest()
        report["certificate_sha256"] = digest[:16]
    if args.table:
        report["model"] = [
            {"context": _context_label(I),
             "outcomes": [{"basis_values": list(s.on_basis()), "probability": _num(q)}
                          for s, q in model.tables[I].items()]}
            for I in cover.contexts if I.dim > 0
        ]
    if cover.is_full():
        W = wigner(rho)
        neg = wigner_negativity(rho)
        report["wigner_min"] = _num(neg.minimum)
        report["wigner"] = [[_vec(v), _num(w)] for v, w in W.as_dict().items()]
        if cover.cfg.p > 2:
            report["wigner_verdict"] = neg.verdict
            report["marginal"] = neg.marginal
            report["wigner_agrees"] = neg.marginal or (neg.negative == verdict.contextual)
    return report


def cmd_topology(args) -> dict:
    cover = load_cover(args.cover)
    group = group_for(cover, args.group)
    poset = coset_poset(group, cover)
    chi = euler_characteristic(poset)
    report = {
        "cover": cover.name or args.cover,
        "p": cover.cfg.p,
        "n": cover.cfg.n,
        "group": group.name,
        "group_order": group.order,
        "poset_size": len(poset),
        "chain_length": poset.chain_length,
        "euler_characteristic": chi,
        "spheres": sphere_count(poset, poset.chain_length),
    }
    if cover.is_full():
        d = d_formula(cover.cfg.p, cover.cfg.n)
        report["d_formula"] = d
        report["d_formula_matches"] = d == chi - 1
        if d != chi - 1:
            report["formula_interpretation"] = "r = n reading disagrees with the coset-poset count"
    return report


def cmd_inequality(args) -> dict:
    cover = load_cover(args.cover)
    J = load_context(args.context, cover)
    rho = load_state(args.state, cover.cfg, args.seed)
    if args.s0 != "auto":
        try:
            vals = json.loads(args.s0)
        except json.JSONDecodeError as exc:
            raise InputError(f"--s0: {exc}") from None
        s0 = outcome_from_basis(J, [int(v) for v in vals])
    else:
        s0 = None
    rep = inequality(rho, cover, J, s0, tol=args.tolerance)
    return {
        "cover": cover.name or args.cover,
        "state": rho.label or args.state,
        "context": _context_label(J),
        "s0_on_basis": list(rep.s0.on_basis()),
        "ev": _num(rep.ev),
        "correlator": _num(rep.correlator),
        "bound": _num(rep.bound),
        "violated": rep.violated,
        "ev_exceeds_bound": rep.ev > float(rep.bound) + PROB_TOL,
        "terms": [{"vector": _vec(a), "s0": k, "expectation": [_num(e.real), _num(e.imag)]}
                  for a, k, e in rep.terms],
    }


def cmd_emit_cover(args) -> dict:
    cover = load_cover(args.cover)
    data = cover_to_json(cover)
    if args.output:
        Path(args.output).write_text(json.dumps(data, indent=2) + "\n")
    return data


COMMANDS = {
    "analyze-cover": cmd_analyze_cover,
    "analyze-state": cmd_analyze_state,
    "topology": cmd_topology,
    "inequality": cmd_inequality,
    "emit-cover": cmd_emit_cover,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contexta", description="Exact contextuality, Wigner and topology computations for Pauli covers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--json", metavar="OUT", help="write the JSON report to OUT ('-' for stdout)")
    parser.add_argument("--seed", type=int, default=0, help="default seed for random states")
    parser.add_argument("--tolerance", type=float, default=PROB_TOL,
                        help="eigenstate tolerance for --s0 auto (default %(default)g)")
    parser.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze-cover", help="global sections, [beta] obstruction, homology")
    p.add_argument("cover")

    p = sub.add_parser("analyze-state", help="empirical model and contextuality verdict")
    p.add_argument("state")
    p.add_argument("cover")
    p.add_argument("--extend", metavar="CONTEXT", help="add a context J and all its intersections first")
    p.add_argument("--hidden", choices=["auto", "sections", "points"], default="auto",
                   help="hidden-variable space for the LP (default: points for full covers at odd p)")
    p.add_argument("--rationalize", choices=["strict", "bridge"], default="bridge")
    p.add_argument("--table", action="store_true", help="include the empirical model table")

    p = sub.add_parser("topology", help="coset poset, Euler characteristic and sphere count")
    p.add_argument("cover")
    p.add_argument("--group", choices=["auto", "full-extension", "abelian"], default="auto")

    p = sub.add_parser("inequality", help="eigenvalue-function inequality for a context J")
    p.add_argument("state")
    p.add_argument("cover")
    p.add_argument("--context", required=True, help="JSON generator list, 1-based index, or name:k")
    p.add_argument("--s0", default="auto", help="'auto' or a JSON list of values on J's basis")

    p = sub.add_parser("emit-cover", help="write a cover as JSON")
    p.add_argument("cover")
    p.add_argument("-o", "--output")
    return parser


def _format_text(report: dict) -> str:
    lines = []
    for key, value in report.items():
        if key in ("schema", "command", "version"):
            continue
        if isinstance(value, list) and value and isinstance(value[0], (list, dict)):
            lines.append(f"{key}:")
            lines.extend(f"  {json.dumps(item)}" for item in value)
        else:
            lines.append(f"{key}: {json.dumps(value) if not isinstance(value, str) else value}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        body = COMMANDS[args.command](args)
    except ContextaError as exc:
        print(f"contexta: error: {exc}", file=sys.stderr)
        return exc.exit_code
    report = {"schema": SCHEMA, "version": __version__, "command": args.command, **body}
    if args.timing:
        report["seconds"] = round(time.perf_counter() - start, 3)
    text = json.dumps(report, indent=2, sort_keys=False)
    if args.json == "-":
        print(text)
    else:
        if args.json:
            Path(args.json).write_text(text + "\n")
        print(_format_text(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())

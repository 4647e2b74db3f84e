"""Command-line front end.

Every stochastic subcommand requires an explicit --seed (there is no
wall-clock default), and identical inputs, flags and seed produce
byte-identical reports.  Exit status: 0 on success, 1 on computation
failure (including failed acceptance criteria under ``verify``), 2 on usage
errors or malformed input files.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import acceptance, io
from .cpmaps import LinearMap, cb_norm, is_cp, kraus, sp_op_norm
from .conic import SolverError
from .extension import SubspaceBasis, extend
from .linalg import BlockMatrix, LinalgError, PExp
from .randgen import complex_gaussian, random_cp_choi, random_map_choi, rng_from
from .regular import decompose_cp, regular_bracket
from .rho import PairingElement, pairing_value, rho_upper
from .search import SearchBudget
from .vnorm import vnorm_bracket


class CliError(Exception):
    pass


def _emit(args, command, result, inputs=None):
    doc = io.report_doc(command, result, inputs)
    text = io.render_report(doc)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _load_map(path) -> LinearMap:
    return io.map_from_doc(io.load(path), where=path)


def _load_block(path) -> BlockMatrix:
    return io.block_from_doc(io.load(path), where=path)


def cmd_vnorm(args):
    x = _load_block(args.input)
    p = PExp.parse(args.p)
    br = vnorm_bracket(x, p, restarts=args.restarts, seed=args.seed)
    _emit(args, "vnorm", {
        "p": str(p),
        "lower": io.fmt(br.lower),
        "upper": io.fmt(br.upper),
        "width": io.fmt(br.width),
    }, {"input": args.input, "seed": args.seed, "restarts": args.restarts})


def cmd_rho(args):
    a = io.pairing_from_doc(io.load(args.input), where=args.input)
    if args.p is not None:
        a = PairingElement(a.n, a.m, PExp.parse(args.p), a.block)
    val, wit = rho_upper(a, restarts=args.restarts, seed=args.seed)
    _emit(args, "rho", {
        "p": str(a.p),
        "upper": io.fmt(val),
        "witness_residual": io.fmt(wit.residual(a)),
    }, {"input": args.input, "seed": args.seed, "restarts": args.restarts})


def cmd_cbnorm(args):
    u = _load_map(args.input)
    val = cb_norm(u)
    _emit(args, "cbnorm", {"value": io.fmt(val)}, {"input": args.input})


def cmd_cpcheck(args):
    u = _load_map(args.input)
    verdict = is_cp(u, tol=args.tol)
    _emit(args, "cpcheck", {
        "is_cp": verdict.is_cp,
        "margin": io.fmt(verdict.margin),
    }, {"input": args.input, "tol": io.fmt(args.tol)})


def cmd_kraus(args):
    u = _load_map(args.input)
    ks = kraus(u, tol=args.tol)
    _emit(args, "kraus", {
        "count": len(ks.ops),
        "operators": [io.matrix_doc(y) for y in ks.ops],
    }, {"input": args.input, "tol": io.fmt(args.tol)})


def cmd_spnorm(args):
    u = _load_map(args.input)
    p = PExp.parse(args.p)
    br = sp_op_norm(u, p, SearchBudget(seed=args.seed))
    _emit(args, "spnorm", {
        "p": str(p),
        "lower": io.fmt(br.lower),
        "upper": io.fmt(br.upper),
    }, {"input": args.input, "seed": args.seed})


def cmd_regnorm(args):
    u = _load_map(args.input)
    p = PExp.parse(args.p)
    rep = regular_bracket(u, p, levels=args.levels,
                          budget=SearchBudget(seed=args.seed))
    _emit(args, "regnorm", {
        "p": str(p),
        "lower": io.fmt(rep.lower),
        "upper": io.fmt(rep.upper),
        "levels": [io.fmt(v) for v in rep.levels],
        "certificate": ("cb-norm SDP" if p.is_inf
                        else "four-part CP decomposition, interpolated endpoints"),
    }, {"input": args.input, "seed": args.seed, "levels": args.levels})


def cmd_decompose(args):
    u = _load_map(args.input)
    p = PExp.parse(args.p)
    dec = decompose_cp(u, p)
    recon = float(np.linalg.norm(dec.recombined().choi - u.choi))
    _emit(args, "decompose", {
        "p": str(p),
        "certificate": io.fmt(dec.certificate),
        "surrogate": io.fmt(dec.surrogate),
        "recombination_residual": io.fmt(recon),
        "parts": [io.map_doc(part) for part in dec.parts],
    }, {"input": args.input})


def cmd_pair(args):
    u = _load_map(args.map)
    a = io.pairing_from_doc(io.load(args.tensor), where=args.tensor)
    val, wit = rho_upper(a, seed=args.seed)
    rep = pairing_value(u, a, witness=wit, rho=val)
    _emit(args, "pair", {
        "p": str(a.p),
        "value": io.fmt(rep.value),
        "route_agreement": io.fmt(rep.route_agreement),
        "rho_upper": io.fmt(rep.rho),
        "regular_upper": io.fmt(rep.regular),
        "duality_ok": rep.duality_ok,
        "ratio": io.fmt(rep.ratio),
    }, {"map": args.map, "tensor": args.tensor, "seed": args.seed})


def cmd_extend(args):
    ambient, mats, imgs = io.subspace_from_doc(io.load(args.input), where=args.input)
    space = SubspaceBasis(ambient, mats)
    p = PExp.parse(args.p)
    res = extend(space, imgs, p, budget=SearchBudget(seed=args.seed))
    _emit(args, "extend", {
        "p": str(p),
        "upper": io.fmt(res.upper),
        "subspace_lower": io.fmt(res.subspace_lower),
        "gap": io.fmt(res.gap),
        "restriction_residual": io.fmt(res.restriction_residual),
        "extension": io.map_doc(res.extension),
    }, {"input": args.input, "seed": args.seed})


def cmd_gen(args):
    rng = rng_from(args.seed)
    n = args.n
    m = args.m if args.m is not None else n
    if args.kind == "map":
        doc = io.map_doc(LinearMap(n, m, random_map_choi(rng, n, m)))
    elif args.kind == "cpmap":
        doc = io.map_doc(LinearMap(n, m, random_cp_choi(rng, n, m)))
    elif args.kind == "block":
        doc = io.block_doc(BlockMatrix(n, m, complex_gaussian(rng, n * m)))
    elif args.kind == "pairing":
        p = PExp.parse(args.p if args.p is not None else 2)
        a = PairingElement(n, m, p, BlockMatrix(n, m, complex_gaussian(rng, n * m)))
        doc = io.pairing_doc(a)
    else:  # pragma: no cover - argparse restricts choices
        raise CliError(f"unknown kind {args.kind}")
    io.save(args.out, doc)
    sys.stdout.write(f"wrote {args.kind} to {args.out}\n")


def cmd_verify(args):
    indices = None
    if args.criteria:
        indices = {int(tok) for tok in args.criteria.split(",")}
    results = acceptance.run_all(seed=args.seed, indices=indices)
    for res in results:
        sys.stdout.write(res.line() + "\n")
        for d in res.details:
            sys.stdout.write(f"    {d}\n")
    doc = io.report_doc("verify", {
        "seed": args.seed,
        "criteria": [{
            "index": r.index,
            "name": r.name,
            "status": "pass" if r.passed else "fail",
            "details": r.details,
        } for r in results],
        "all_passed": all(r.passed for r in results),
    })
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(io.render_report(doc))
    if not all(r.passed for r in results):
        raise CliError("one or more acceptance criteria failed")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="regop",
        description="Norm brackets and decompositions for regular operators "
                    "on matrix spaces")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=fn)
        return p

    p = add("vnorm", cmd_vnorm, help="vector-valued Schatten norm bracket")
    p.add_argument("--input", required=True)
    p.add_argument("--p", required=True, help="exponent in [1, inf]; accepts 'inf' and fractions like 4/3")
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")

    p = add("rho", cmd_rho, help="pairing-norm upper bound with witness")
    p.add_argument("--input", required=True)
    p.add_argument("--p", default=None, help="override the exponent stored in the file")
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")

    p = add("cbnorm", cmd_cbnorm, help="completely bounded norm (SDP)")
    p.add_argument("--input", required=True)
    p.add_argument("--out")

    p = add("cpcheck", cmd_cpcheck, help="complete positivity with margin")
    p.add_argument("--input", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")

    p = add("kraus", cmd_kraus, help="Kraus decomposition of a CP map")
    p.add_argument("--input", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")

    p = add("spnorm", cmd_spnorm, help="Schatten p->p operator norm bracket")
    p.add_argument("--input", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")

    p = add("regnorm", cmd_regnorm, help="regular-norm bracket")
    p.add_argument("--input", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")

    p = add("decompose", cmd_decompose, help="four-part CP decomposition")
    p.add_argument("--input", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--out")

    p = add("pair", cmd_pair, help="duality pairing of a map against a tensor")
    p.add_argument("--map", required=True)
    p.add_argument("--tensor", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")

    p = add("extend", cmd_extend, help="norm-minimal extension from a subspace")
    p.add_argument("--input", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")

    p = add("gen", cmd_gen, help="generate a seeded random instance")
    p.add_argument("--kind", required=True, choices=["map", "cpmap", "block", "pairing"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--p", default=None)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = add("verify", cmd_verify, help="run the acceptance suite")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--criteria", default=None, help="comma-separated subset, e.g. 1,2,6")
    p.add_argument("--out")

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        args.func(args)
    except io.FileFormatError as exc:
        sys.stderr.write(f"regop: input error: {exc}\n")
        return 2
    except (LinalgError, SolverError, CliError, ValueError) as exc:
        sys.stderr.write(f"regop: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line front end: proof search, checking, translation, embedding,
extraction, cut elimination, and reproduction of the separating examples.

Exit codes: 0 success (for prove: proof found), 1 certified non-provability
(prove) or a failed check, 2 budget exhausted, 3 a transformation was
refused (e.g. extraction meets licensed associativity under acll),
64 usage errors, 65 parse errors.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources

from . import calculus as C
from . import cutelim as CE
from . import embedding as E
from . import formulas as F
from . import proofio
from . import prover
from . import structures as S
from . import syntax

USAGE_ERROR = 64
PARSE_ERROR = 65


def _signature(args) -> F.Signature:
    if args.signature:
        with open(args.signature, "r", encoding="utf-8") as handle:
            return F.load_signature(handle.read())
    return F.DEFAULT_SIGNATURE


def _config(args, system=None) -> C.CalculusConfig:
    return C.CalculusConfig(
        system or args.system,
        _signature(args),
        allow_cut=getattr(args, "allow_cut", False),
        allow_zero=getattr(args, "allow_zero", False),
    )


def _budget(args) -> prover.SearchBudget:
    return prover.SearchBudget(
        max_depth=args.max_depth,
        max_contractions_per_branch=args.max_contractions,
    )


def _read_input(args) -> str:
    if args.file:
        if args.input is not None:
            raise SystemExit(USAGE_ERROR)
        if args.file == "-":
            return sys.stdin.read()
        with open(args.file, "r", encoding="utf-8") as handle:
            return handle.read()
    if args.input is None:
        print("error: missing input", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)
    return args.input


def cmd_prove(args) -> int:
    cfg = _config(args)
    seq = syntax.parse_sequent(_read_input(args))
    out = prover.prove(seq, cfg, _budget(args))
    if out.proved:
        print(proofio.proof_to_sexpr(out.proof))
        return 0
    print(f"; {out.status}")
    return 1 if out.exhaustive else 2


def cmd_check(args) -> int:
    cfg = _config(args)
    proof = proofio.proof_from_sexpr(_read_input(args))
    res = C.check(proof, cfg)
    if res.ok:
        print("valid")
        return 0
    print(f"invalid at node {'.'.join(map(str, res.path)) or 'root'}: {res.reason}")
    return 1


def cmd_translate(args) -> int:
    text = _read_input(args)
    seq = syntax.parse_sequent(text)
    if isinstance(seq, C.TwoSided):
        out = prover.translate_sequent(seq)
        print(syntax.fmt_sequent(out))
    else:
        # treat a bare one-sided input as a formula translation request
        f = syntax.parse_formula(text)
        print(syntax.fmt_formula(F.translate(f)))
    return 0


def cmd_embed(args) -> int:
    proof = proofio.proof_from_sexpr(_read_input(args))
    if not isinstance(proof.conclusion, C.TwoSided):
        print("error: embed expects a two-sided proof", file=sys.stderr)
        return USAGE_ERROR
    system = args.system if args.system != "cacll" else "acll"
    cfg = _config(args, system)
    C.assert_valid(proof, cfg)
    out = E.embed_proof(proof, cfg)
    print(proofio.proof_to_sexpr(out))
    return 0


def cmd_extract(args) -> int:
    proof = proofio.proof_from_sexpr(_read_input(args))
    cfg = _config(args, "cacll")
    try:
        out = E.extract_proof(proof, args.target, cfg)
    except E.AssocForbidden as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3
    print(proofio.proof_to_sexpr(out))
    return 0


def cmd_cutelim(args) -> int:
    cfg = C.CalculusConfig(args.system, _signature(args), allow_cut=True,
                           allow_zero=args.allow_zero)
    proof = proofio.proof_from_sexpr(_read_input(args))
    out, trace = CE.eliminate(proof, cfg)
    if args.trace:
        for step in trace.steps:
            pos = ".".join(map(str, step.position)) or "root"
            print(
                f"; {step.case} {pos} {step.before[0]},{step.before[1]} -> "
                f"{step.after[0]},{step.after[1]}"
            )
    print(proofio.proof_to_sexpr(out))
    return 0


def cmd_counter(args) -> int:
    f = syntax.parse_formula(_read_input(args))
    try:
        print(F.counter(f))
    except F.UndefinedCounter as exc:
        print(f"undefined: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_designate(args) -> int:
    ctx = syntax.parse_context(_read_input(args))
    print(syntax.fmt_structure(S.designate(ctx)))
    return 0


def _print_outcome(tag: str, out) -> None:
    print(f"{tag}: {out.status}")


def cmd_demo(args) -> int:
    if args.name in ("assoc", "zero"):
        report = prover.decide_paper_counterexamples(args.name, _budget(args))
        print(f"sequent:      {syntax.fmt_sequent(report.sequent)}")
        _print_outcome("acll search ", report.intuitionistic)
        print(f"translation:  {syntax.fmt_sequent(report.translation)}")
        _print_outcome("cacll search", report.classical)
        print(proofio.proof_to_sexpr(report.classical.proof))
        if args.name == "assoc":
            cfg = C.CalculusConfig("cacll", prover.ASSOC_SIGNATURE)
            back = E.extract_proof(report.classical.proof, "acll+", cfg)
            print("; extraction to acll+:")
            print(proofio.proof_to_sexpr(back))
            try:
                E.extract_proof(report.classical.proof, "acll", cfg)
            except E.AssocForbidden as exc:
                print(f"; extraction to acll refused: {exc}")
        return 0
    if args.name == "section3":
        cfg = C.CalculusConfig("cacll", F.DEFAULT_SIGNATURE)
        for name in ("exchange.proof", "associativity.proof"):
            text = resources.files("cacll").joinpath("fixtures", name).read_text()
            proof = proofio.proof_from_sexpr(text)
            res = C.check(proof, cfg)
            status = "valid" if res.ok else f"INVALID: {res.reason}"
            print(f"; {name}: {syntax.fmt_sequent(proof.conclusion)} ({status})")
            print(text.rstrip())
        return 0
    print(f"unknown demo {args.name!r}", file=sys.stderr)
    return USAGE_ERROR


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="cacll",
        description="classical non-associative non-commutative linear logic "
        "with subexponentials",
    )
    top.add_argument("--system", choices=("cacll", "acll", "acll+"),
                     default="cacll")
    top.add_argument("--signature", help="signature file")
    top.add_argument("--allow-zero", action="store_true")
    top.add_argument("--allow-cut", action="store_true")
    top.add_argument("--max-depth", type=int, default=64)
    top.add_argument("--max-contractions", type=int, default=None)
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, fn, with_input=True):
        p = sub.add_parser(name)
        if with_input:
            p.add_argument("input", nargs="?")
            p.add_argument("--file", "-f")
        p.set_defaults(fn=fn)
        return p

    add("prove", cmd_prove)
    add("check", cmd_check)
    add("translate", cmd_translate)
    add("embed", cmd_embed)
    ext = add("extract", cmd_extract)
    ext.add_argument("--target", choices=("acll", "acll+"), required=True)
    ce = add("cutelim", cmd_cutelim)
    ce.add_argument("--trace", action="store_true")
    add("counter", cmd_counter)
    add("designate", cmd_designate)
    demo = sub.add_parser("demo")
    demo.add_argument("name", choices=("assoc", "zero", "section3"))
    demo.set_defaults(fn=cmd_demo)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except syntax.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return PARSE_ERROR
    except proofio.SexprError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return PARSE_ERROR
    except (C.MalformedProof, F.SignatureError, E.NotInImage,
            E.NotPolarizable, F.UndefinedCounter, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line front end: check, evaluate, enumerate languages, optimize,
convert between logics, run Datalog programs, run spanners, analyze patterns.

Output is deterministic for deterministic inputs: rows and words are sorted,
and wall-clock timing goes to stderr only.  Exit status 0 means the command
ran to completion (a `check` that prints false still exits 0); parse errors,
fragment errors, and cross-check mismatches exit nonzero.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
import time

from fclogic import bridges, datalog, patternopt, spanner
from fclogic.core import Alphabet, Word, canonicalize
from fclogic.evaluator import (
    EngineStats,
    eval_bottomup,
    eval_naive,
    eval_relation_naive,
    make_substitution,
)
from fclogic.patternopt import ShapeError
from fclogic.syntax import (
    UNIVERSE,
    ParseError,
    TermItem,
    VarItem,
    free_vars,
    parse,
    print_formula,
    tokenize,
    width,
)


class CliError(Exception):
    """User-facing error; message goes to stderr with exit status 1."""


class MismatchError(Exception):
    """Cross-check failure (--engine both / --verify); exit status 2."""


def _input_text(value: str) -> str:
    """Inline text, or the contents of a file when prefixed with '@'."""
    if value.startswith("@"):
        with open(value[1:], encoding="utf-8") as fh:
            return fh.read()
    return value


def _load_word(args) -> Word:
    if args.word is None:
        raise CliError("--word is required")
    text = _input_text(args.word)
    if args.word.startswith("@") and text.endswith("\n"):
        text = text[:-1]
    if args.alphabet is not None:
        sigma = Alphabet(args.alphabet)
        for ch in text:
            if ch not in sigma:
                raise CliError(f"word contains {ch!r}, outside alphabet {args.alphabet!r}")
    return Word(text)


def _alphabet(args, default: str = "ab") -> Alphabet:
    return Alphabet(args.alphabet if args.alphabet is not None else default)


def _factor_json(w: Word, f) -> dict:
    return {"start": f.start, "len": f.len, "word": w.factor_text(f)}


def _relation_json(w: Word, rel) -> dict:
    order = sorted(rel.scheme)
    rel = rel.reorder(order)
    rows = sorted(rel.rows)
    return {
        "variables": list(order),
        "rows": [[_factor_json(w, f) for f in row] for row in rows],
    }


def _relation_text(w: Word, rel) -> str:
    payload = _relation_json(w, rel)
    lines = ["variables: " + " ".join(payload["variables"])]
    for row in payload["rows"]:
        cells = [
            f"{v}={cell['word']!r}@{cell['start']}" for v, cell in zip(payload["variables"], row)
        ]
        lines.append("  " + (", ".join(cells) if cells else "()"))
    lines.append(f"({len(payload['rows'])} rows)")
    return "\n".join(lines)


def _emit(args, payload, text: str):
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _stats_note(stats: EngineStats, started: float):
    ms = (time.perf_counter() - started) * 1000.0
    print(
        f"# relations={stats.relations} max_rows={stats.max_relation_rows} "
        f"stages={stats.fixpoint_stages} wall_ms={ms:.1f}",
        file=sys.stderr,
    )


def _parse_bindings(w: Word, pairs) -> dict:
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise CliError(f"--bind expects VAR=VALUE, got {item!r}")
        var, _, value = item.partition("=")
        if var == UNIVERSE:
            raise CliError(f"{UNIVERSE!r} is always bound to the whole word")
        out[var] = value
    return out


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    w = _load_word(args)
    phi = parse(_input_text(args.formula))
    binds = _parse_bindings(w, args.bind)
    fv = free_vars(phi) - {UNIVERSE}
    missing = fv - set(binds)
    if missing:
        raise CliError(f"free variables {sorted(missing)} need --bind VAR=VALUE")
    stats = EngineStats()
    started = time.perf_counter()
    sigma, warnings = make_substitution(w, binds)
    for note in warnings:
        print(f"# {note}", file=sys.stderr)
    results = {}
    if args.engine in ("naive", "both"):
        results["naive"] = False if sigma is None else eval_naive(phi, sigma)
    if args.engine in ("bottomup", "both"):
        if sigma is None:
            results["bottomup"] = False
        else:
            rel = eval_bottomup(phi, w, stats=stats)
            if rel.scheme:
                row = tuple(canonicalize(w, sigma[v]) for v in rel.scheme)
                results["bottomup"] = row in rel.rows
            else:
                results["bottomup"] = rel.is_true_sentence()
    if len(results) == 2 and results["naive"] != results["bottomup"]:
        raise MismatchError(f"engines disagree: {results}")
    truth = next(iter(results.values()))
    _stats_note(stats, started)
    _emit(args, {"result": truth}, "true" if truth else "false")
    return 0


def cmd_eval(args) -> int:
    w = _load_word(args)
    phi = parse(_input_text(args.formula))
    stats = EngineStats()
    started = time.perf_counter()
    rel = None
    if args.engine in ("bottomup", "both"):
        rel = eval_bottomup(phi, w, stats=stats)
    if args.engine in ("naive", "both"):
        naive = eval_relation_naive(phi, w)
        if rel is not None and naive != rel:
            raise MismatchError(
                f"engines disagree: naive has {len(naive)} rows, bottom-up has {len(rel)}"
            )
        rel = naive if rel is None else rel
    _stats_note(stats, started)
    _emit(args, _relation_json(w, rel), _relation_text(w, rel))
    return 0


def _words_upto(sigma: Alphabet, max_len: int):
    for n in range(max_len + 1):
        for tup in itertools.product(sigma.letters, repeat=n):
            yield "".join(tup)


def cmd_lang(args) -> int:
    phi = parse(_input_text(args.formula))
    fv = free_vars(phi) - {UNIVERSE}
    if fv:
        raise CliError(f"language enumeration needs a sentence; free variables: {sorted(fv)}")
    sigma = _alphabet(args)
    stats = EngineStats()
    started = time.perf_counter()
    out = []
    for text in _words_upto(sigma, args.max_len):
        w = Word(text)
        hit = None
        if args.engine in ("bottomup", "both"):
            hit = eval_bottomup(phi, w, stats=stats).is_true_sentence()
        if args.engine in ("naive", "both"):
            naive = eval_relation_naive(phi, w).is_true_sentence()
            if hit is not None and naive != hit:
                raise MismatchError(f"engines disagree on {text!r}")
            hit = naive if hit is None else hit
        if hit:
            out.append(text)
    out.sort()
    _stats_note(stats, started)
    _emit(args, {"words": out}, "\n".join(repr(t) for t in out) if out else "(empty)")
    return 0


def _verify_same_relation(phi1, phi2, sigma: Alphabet, max_len: int):
    for text in _words_upto(sigma, max_len):
        w = Word(text)
        if eval_bottomup(phi1, w) != eval_bottomup(phi2, w):
            raise MismatchError(f"formulas disagree on {text!r}")


def cmd_optimize(args) -> int:
    phi = parse(_input_text(args.formula))
    rewritten = None
    note = None
    try:
        rewritten = patternopt.rewrite_power(phi)
        note = "power-of-two chain rewriting"
    except ShapeError:
        try:
            rewritten = patternopt.decompose_equation(phi)
            note = "tree-decomposition-guided equation decomposition"
        except ShapeError as exc:
            rewritten, note = phi, f"no-op ({exc})"
    before, after = width(phi), width(rewritten)
    if args.verify is not None:
        _verify_same_relation(phi, rewritten, _alphabet(args), args.verify)
    _emit(
        args,
        {
            "formula": print_formula(rewritten),
            "width_before": before,
            "width_after": after,
            "rewrite": note,
            "verified_max_len": args.verify,
        },
        f"{print_formula(rewritten)}\n# width {before} -> {after} via {note}",
    )
    return 0


def cmd_convert(args) -> int:
    sigma = _alphabet(args)
    text = _input_text(args.formula)
    if args.target == "fc":
        phi = bridges.parse_foeq(text)
        out = bridges.foeq_to_fc(phi, sigma)
        printed = print_formula(out)
        if args.verify is not None:
            if bridges.fo_free_vars(phi):
                raise CliError("--verify needs a sentence")
            for wtext in _words_upto(sigma, args.verify):
                w = Word(wtext)
                if bridges.eval_foeq(phi, w) != eval_bottomup(out, w).is_true_sentence():
                    raise MismatchError(f"translation disagrees on {wtext!r}")
    elif args.target == "foeq":
        phi = parse(text)
        out = bridges.fc_to_foeq(phi, sigma)
        printed = bridges.print_foeq(out)
        if args.verify is not None:
            if free_vars(phi) - {UNIVERSE}:
                raise CliError("--verify needs a sentence")
            for wtext in _words_upto(sigma, args.verify):
                w = Word(wtext)
                if eval_bottomup(phi, w).is_true_sentence() != bridges.eval_foeq(out, w):
                    raise MismatchError(f"translation disagrees on {wtext!r}")
    elif args.target == "c-guarded":
        phi = parse(text)
        out = bridges.fc_to_c_guarded(phi)
        printed = print_formula(out)
        if args.verify is not None:
            _verify_same_relation(phi, out, sigma, args.verify)
    else:  # pragma: no cover - argparse restricts choices
        raise CliError(f"unknown target {args.target!r}")
    _emit(
        args,
        {"formula": printed, "target": args.target, "verified_max_len": args.verify},
        printed,
    )
    return 0


def cmd_datalog(args) -> int:
    w = _load_word(args)
    program = datalog.parse_program(_input_text(args.program), allow_constraints=True)
    stats = EngineStats()
    started = time.perf_counter()
    rel = datalog.eval_program(program, w, semi_naive=args.semi_naive, stats=stats)
    _stats_note(stats, started)
    if rel.scheme:
        _emit(args, {"Ans": _relation_json(w, rel)}, _relation_text(w, rel))
    else:
        truth = rel.is_true_sentence()
        _emit(args, {"Ans": [[]] if truth else []}, "Ans = {()}" if truth else "Ans = {}")
    return 0


def cmd_spanner(args) -> int:
    w = _load_word(args)
    expr = spanner.parse_algebra(_input_text(args.expr))
    stats = EngineStats()
    started = time.perf_counter()
    tuples = sorted(spanner.eval_spanner(expr, w, stats=stats))
    _stats_note(stats, started)
    payload = [{x: [i, j] for x, (i, j) in tup} for tup in tuples]
    lines = [
        " ".join(f"{x}=[{i},{j}]" for x, (i, j) in tup) if tup else "()" for tup in tuples
    ]
    _emit(args, {"tuples": payload}, "\n".join(lines) if lines else "(empty)")
    return 0


def _parse_pattern(text: str):
    items = []
    for tok in tokenize(text):
        if tok.kind == "ident":
            items.append(VarItem(tok.value))
        elif tok.kind == "string":
            items.append(TermItem(tok.value))
        elif tok.kind == "eof":
            break
        else:
            raise CliError(f"pattern must be variables and string literals, got {tok.value!r}")
    from fclogic.syntax import make_pattern

    return make_pattern(items)


def cmd_pattern(args) -> int:
    pattern = _parse_pattern(args.pattern)
    graph = patternopt.standard_graph(pattern)
    result = patternopt.treewidth(graph)
    if args.treewidth:
        _emit(args, {"treewidth": result.width}, str(result.width))
        return 0
    bags = [sorted(bag) for bag in result.decomposition.bags]
    _emit(
        args,
        {
            "treewidth": result.width,
            "exact": result.exact,
            "positions": graph.n,
            "bags": bags,
        },
        f"treewidth {result.width} ({'exact' if result.exact else 'heuristic upper bound'}), "
        f"{graph.n} positions, bags {bags}",
    )
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="fc",
        description="Model checking and query evaluation over the factors of a word.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, word=False, formula=False, engine=False):
        p.add_argument("--format", choices=("json", "text"), default="text")
        p.add_argument("--alphabet", help="allowed symbols (default 'ab' where needed)")
        if word:
            p.add_argument("--word", help="host word, inline or @file")
        if formula:
            p.add_argument("--formula", required=True, help="formula text, inline or @file")
        if engine:
            p.add_argument(
                "--engine", choices=("naive", "bottomup", "both"), default="bottomup"
            )

    p = sub.add_parser("check", help="decide whether a substitution satisfies a formula")
    common(p, word=True, formula=True, engine=True)
    p.add_argument("--bind", action="append", metavar="VAR=VALUE")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("eval", help="all satisfying assignments as a relation")
    common(p, word=True, formula=True, engine=True)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("lang", help="enumerate the language of a sentence")
    common(p, formula=True, engine=True)
    p.add_argument("--max-len", type=int, required=True)
    p.set_defaults(fn=cmd_lang)

    p = sub.add_parser("optimize", help="width-reducing rewriting of equation formulas")
    common(p, formula=True)
    p.add_argument("--verify", type=int, metavar="N", help="cross-check on all words up to length N")
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("convert", help="translate between FC, FO[Eq], and c-guarded FC")
    common(p, formula=True)
    p.add_argument("--target", choices=("foeq", "fc", "c-guarded"), required=True)
    p.add_argument("--verify", type=int, metavar="N", help="cross-check on all words up to length N")
    p.set_defaults(fn=cmd_convert)

    p = sub.add_parser("datalog", help="evaluate a Datalog program on a word")
    common(p, word=True)
    p.add_argument("program", help="program text, inline or @file")
    p.add_argument("--semi-naive", action="store_true")
    p.set_defaults(fn=cmd_datalog)

    p = sub.add_parser("spanner", help="evaluate a spanner algebra expression on a word")
    common(p, word=True)
    p.add_argument("expr", help="algebra expression, inline or @file")
    p.set_defaults(fn=cmd_spanner)

    p = sub.add_parser("pattern", help="treewidth report for a pattern")
    common(p)
    p.add_argument("pattern", help="space-separated variables and string literals")
    p.add_argument("--treewidth", action="store_true", help="print only the treewidth")
    p.set_defaults(fn=cmd_pattern)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except MismatchError as exc:
        print(f"fc: cross-check failed: {exc}", file=sys.stderr)
        return 2
    except (CliError, ParseError, ShapeError, ValueError, OSError) as exc:
        print(f"fc: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

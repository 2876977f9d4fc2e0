"""Command-line interface: check, translate, lang-member, suite, enumerate."""

import argparse
import json
import sys

from hsmc.expressiveness import BalancedFormulaSpec, enumerate_balanced
from hsmc.formulas import atoms
from hsmc.hs_eval import EvalContext, EvalError, check, recheck_witness
from hsmc.kripke import (
    Lasso,
    StructureError,
    builtin,
    enumerate_lassos,
    enumerate_traces,
    load_kripke_file,
)
from hsmc.pointwise import (
    PointEvalError,
    check_ctlstar,
    check_finitary_ctlstar,
    check_hybrid,
    check_ltl,
    eval_finitary_ctlstar,
    eval_hybrid,
    eval_ltl,
    lact_enumerate,
    lact_member,
)
from hsmc.suites import VALIDATORS, fig7_suite, fig9_suite, vending_suite
from hsmc.syntax import ParseError, parse, render
from hsmc.translate import (
    CLOSURE_KINDS,
    TranslationError,
    closure_formula,
    eliminate_initial_past,
    finitary_ctlstar_to_abe,
    hs_ct_to_hybrid,
    hs_to_fo,
    load_be_oracle,
    ltl_to_ab,
)

EXIT_HOLDS, EXIT_FAILS, EXIT_USAGE = 0, 1, 2

INTERVAL_SEMANTICS = ("st", "ct", "lin")
POINT_SEMANTICS = ("ltl", "ctlstar", "finitary", "hybrid")

MAP_DIALECT = {
    "ltl2ab": "point",
    "hs2fo": "hs",
    "ct2hybrid": "hs",
    "closure": "hs",
    "past-elim": "point",
    "ctlstar2abe": "point",
}


class UsageError(Exception):
    pass


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _formula_text(args):
    if args.formula is not None and args.formula_file is not None:
        raise UsageError("give either --formula or --formula-file, not both")
    if args.formula_file is not None:
        with open(args.formula_file) as fh:
            return fh.read()
    if args.formula is None:
        raise UsageError("a formula is required (--formula or --formula-file)")
    return args.formula


def _structure(args):
    if args.structure and args.builtin:
        raise UsageError("give either --structure or --builtin, not both")
    if args.structure:
        return load_kripke_file(args.structure)
    try:
        return builtin(args.builtin or "fig1")
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc


def _dialect(semantics):
    return "hs" if semantics in INTERVAL_SEMANTICS else "point"


# Witness encoding shared by text and JSON output


def witness_to_json(w):
    if w is None:
        return None
    if isinstance(w, Lasso):
        return {"stem": list(w.stem), "loop": list(w.loop)}
    if isinstance(w, tuple) and len(w) == 2 and isinstance(w[0], Lasso):
        lasso, (i, j) = w
        return {"stem": list(lasso.stem), "loop": list(lasso.loop), "interval": [i, j]}
    return {"trace": list(w)}


def witness_from_json(doc):
    if "trace" in doc:
        return tuple(doc["trace"])
    lasso = Lasso(tuple(doc["stem"]), tuple(doc["loop"]))
    if "interval" in doc:
        i, j = doc["interval"]
        return lasso, (i, j)
    return lasso


def witness_to_text(w):
    doc = witness_to_json(w)
    if doc is None:
        return "-"
    if "trace" in doc:
        return " ".join(doc["trace"])
    text = f"stem=[{' '.join(doc['stem'])}] loop=[{' '.join(doc['loop'])}]"
    if "interval" in doc:
        text += f" interval={doc['interval'][0]},{doc['interval'][1]}"
    return text


def _run_check(k, f, args):
    sem = args.semantics
    if sem in INTERVAL_SEMANTICS:
        ctx = EvalContext(k, sem, args.bound, ct_mode=args.ct_mode, horizon=args.horizon, jobs=args.jobs)
        return check(ctx, f)
    if sem == "ltl":
        return check_ltl(k, f, args.bound)
    if sem == "ctlstar":
        return check_ctlstar(k, f, args.bound)
    if sem == "finitary":
        return check_finitary_ctlstar(k, f, args.bound)
    return check_hybrid(k, f, args.bound, finitary=args.finitary_paths)


def _recheck(k, f, args, witness):
    sem = args.semantics
    if sem in INTERVAL_SEMANTICS:
        ctx = EvalContext(k, sem, args.bound, ct_mode=args.ct_mode, horizon=args.horizon)
        return recheck_witness(ctx, f, witness)
    if sem == "ltl":
        return eval_ltl(k, witness, 0, f)
    if sem == "finitary":
        return eval_finitary_ctlstar(k, witness, 0, f, args.bound)
    return eval_hybrid(k, witness, {}, 0, f, args.bound)


def cmd_check(args, out):
    k = _structure(args)
    f = parse(_formula_text(args), _dialect(args.semantics))
    if args.witness is not None:
        witness = witness_from_json(json.loads(args.witness))
        value = _recheck(k, f, args, witness)
        if args.format == "json":
            out.write(json.dumps({"witness": witness_to_json(witness), "value": value}) + "\n")
        else:
            out.write(f"value: {str(value).lower()}\n")
        return EXIT_HOLDS if value else EXIT_FAILS
    v = _run_check(k, f, args)
    if args.format == "json":
        doc = {
            "verdict": v.value,
            "witness": witness_to_json(v.witness),
            "bound_hit": v.bound_hit,
            "exact": v.exact,
            "checked": v.checked,
            "semantics": args.semantics,
            "bound": args.bound,
        }
        out.write(json.dumps(doc) + "\n")
    else:
        out.write(f"verdict: {v.value}\n")
        out.write(f"witness: {witness_to_text(v.witness)}\n")
        out.write(f"bound_hit: {str(v.bound_hit).lower()}\n")
        out.write(f"checked: {v.checked}\n")
    return EXIT_FAILS if v.value == "fails" else EXIT_HOLDS


def _translate(f, args):
    m = args.map
    if m == "ltl2ab":
        return {"formula": render(ltl_to_ab(f))}
    if m == "hs2fo":
        open_formula, sentence = hs_to_fo(f)
        return {"formula": render(open_formula), "sentence": render(sentence)}
    if m == "ct2hybrid":
        return {"formula": render(hs_ct_to_hybrid(f, finitary=args.finitary_paths))}
    if m == "closure":
        return {"formula": render(closure_formula(f, args.kind, args.separator))}
    if m == "past-elim":
        return {"formula": render(eliminate_initial_past(f))}
    return {"formula": render(finitary_ctlstar_to_abe(f, load_be_oracle()))}


def cmd_translate(args, out):
    f = parse(_formula_text(args), MAP_DIALECT[args.map])
    doc = _translate(f, args)
    status = EXIT_HOLDS
    if args.validate is not None:
        extra = {"kind": args.kind, "b": args.separator} if args.map == "closure" else {}
        checked, bad = VALIDATORS[args.map](f, args.validate, **extra)
        doc["validation"] = {"checked": checked, "mismatches": len(bad), "result": "pass" if not bad else "fail"}
        if bad:
            doc["validation"]["first_mismatch"] = repr(bad[0])
            status = EXIT_FAILS
    if args.format == "json":
        out.write(json.dumps(doc) + "\n")
    else:
        out.write(doc["formula"] + "\n")
        if "sentence" in doc:
            out.write(f"sentence: {doc['sentence']}\n")
        if "validation" in doc:
            val = doc["validation"]
            out.write(f"validation: {val['result']} (checked {val['checked']}, mismatches {val['mismatches']})\n")
    return status


def _split_word(text):
    return tuple(x for x in text.replace(",", " ").split() if x)


def cmd_lang_member(args, out):
    dialect = "hs" if args.dialect == "be_action" else "point"
    f = parse(_formula_text(args), dialect)
    alphabet = _split_word(args.alphabet) if args.alphabet else None
    w = _split_word(args.word)
    value = lact_member(w, f, args.dialect, alphabet)
    if args.format == "json":
        out.write(json.dumps({"word": list(w), "member": value}) + "\n")
    else:
        out.write(f"member: {str(value).lower()}\n")
    return EXIT_HOLDS if value else EXIT_FAILS


def _suite_rows_text(result, out):
    out.write(f"{result.title}\n")
    for r in result.rows:
        mark = "ok" if r.ok else "MISMATCH"
        out.write(
            f"  {r.name:<10} {r.semantics:<4} bound={r.bound:<2} expected={r.expected:<15}"
            f" computed={r.verdict.value:<15} witness={witness_to_text(r.verdict.witness)}  {mark}\n"
        )
    for note in result.notes:
        out.write(note + "\n")
    out.write(f"overall: {'ok' if result.ok else 'MISMATCH'}\n")


def cmd_suite(args, out):
    if args.name == "vending":
        result = vending_suite(args.bound or 8, jobs=args.jobs)
    elif args.name == "fig7":
        result = fig7_suite(args.bound or 6)
    else:
        result = fig9_suite(args.n, args.bound, jobs=args.jobs)
    if args.format == "json":
        doc = {
            "title": result.title,
            "ok": result.ok,
            "rows": [
                {
                    "name": r.name,
                    "semantics": r.semantics,
                    "bound": r.bound,
                    "expected": r.expected,
                    "verdict": r.verdict.value,
                    "witness": witness_to_json(r.verdict.witness),
                    "witness_sound": r.sound,
                }
                for r in result.rows
            ],
            "notes": result.notes,
        }
        out.write(json.dumps(doc) + "\n")
    else:
        _suite_rows_text(result, out)
    return EXIT_HOLDS if result.ok else EXIT_FAILS


def cmd_enumerate(args, out):
    what = args.what
    if what in ("traces", "lassos"):
        k = _structure(args)
        if what == "traces":
            items = [witness_to_json(t) for t in enumerate_traces(k, args.max, initial_only=args.initial_only)]
        else:
            items = [witness_to_json(x) for x in enumerate_lassos(k, args.max)]
    elif what == "balanced":
        atom_names = tuple(_split_word(args.alphabet)) if args.alphabet else ("p",)
        spec = BalancedFormulaSpec(atom_names, ("B", "Bbar", "E", "Ebar"), args.max)
        items = [render(f) for f in enumerate_balanced(spec)]
    else:
        f = parse(_formula_text(args), "hs" if args.dialect == "be_action" else "point")
        alphabet = _split_word(args.alphabet) if args.alphabet else tuple(sorted(atoms(f)))
        items = [list(w) for w in sorted(lact_enumerate(alphabet, f, args.max, args.dialect), key=lambda w: (len(w), w))]
    if args.format == "json":
        out.write(json.dumps(items) + "\n")
    else:
        for item in items:
            if isinstance(item, str):
                out.write(item + "\n")
            elif isinstance(item, list):
                out.write(" ".join(item) + "\n")
            else:
                out.write(witness_to_text(witness_from_json(item)) + "\n")
    return EXIT_HOLDS


def _add_structure(p):
    p.add_argument("--builtin", help="fig1, vending, k1, k2, knN or mnN (default fig1)")
    p.add_argument("--structure", help="path to a YAML or JSON structure document")


def _add_formula(p):
    p.add_argument("--formula", help="formula text")
    p.add_argument("--formula-file", help="file holding the formula text")


def _add_format(p):
    p.add_argument("--format", choices=("text", "json"), default="text")


def build_parser():
    parser = argparse.ArgumentParser(prog="hsmc", description="Interval temporal logic model checking on finite Kripke structures.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check a formula against a structure")
    _add_structure(p)
    _add_formula(p)
    p.add_argument("--semantics", choices=INTERVAL_SEMANTICS + POINT_SEMANTICS, default="st")
    p.add_argument("--bound", type=_positive, default=6)
    p.add_argument("--ct-mode", choices=("interval", "tree"), default="interval")
    p.add_argument("--horizon", type=_positive, help="lin only: largest interval endpoint considered (default 2*bound)")
    p.add_argument("--finitary-paths", action="store_true", help="hybrid only: quantify over finite traces")
    p.add_argument("--witness", help="JSON witness from an earlier run; evaluate the formula on it instead")
    p.add_argument("--jobs", type=_positive, default=1)
    _add_format(p)

    p = sub.add_parser("translate", help="apply one of the formula translations")
    _add_formula(p)
    p.add_argument("--map", choices=tuple(MAP_DIALECT), required=True)
    p.add_argument("--kind", choices=CLOSURE_KINDS, default="bLb", help="closure only")
    p.add_argument("--separator", default="b", help="closure only: the fresh letter")
    p.add_argument("--finitary-paths", action="store_true", help="ct2hybrid only: emit finitary quantifiers")
    p.add_argument("--validate", type=_positive, metavar="N", help="run the brute-force agreement oracle up to N")
    _add_format(p)

    p = sub.add_parser("lang-member", help="membership of a finite word in a formula's language")
    _add_formula(p)
    p.add_argument("--word", required=True, help="letters separated by spaces or commas")
    p.add_argument("--alphabet", help="allowed letters separated by spaces or commas")
    p.add_argument("--dialect", choices=("be_action", "ltl_finite"), default="be_action")
    _add_format(p)

    p = sub.add_parser("suite", help="replay a verdict table")
    p.add_argument("name", choices=("vending", "fig7", "fig9"))
    p.add_argument("--bound", type=_positive)
    p.add_argument("--n", type=_positive, default=2)
    p.add_argument("--jobs", type=_positive, default=1)
    _add_format(p)

    p = sub.add_parser("enumerate", help="list traces, lassos, balanced formulas or words of a language")
    p.add_argument("what", choices=("traces", "lassos", "balanced", "words"))
    _add_structure(p)
    _add_formula(p)
    p.add_argument("--max", type=_positive, default=3, help="maximal length, total size or formula size")
    p.add_argument("--initial-only", action="store_true")
    p.add_argument("--alphabet", help="letters or atoms separated by spaces or commas")
    p.add_argument("--dialect", choices=("be_action", "ltl_finite"), default="be_action")
    _add_format(p)
    return parser


COMMANDS = {
    "check": cmd_check,
    "translate": cmd_translate,
    "lang-member": cmd_lang_member,
    "suite": cmd_suite,
    "enumerate": cmd_enumerate,
}


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_HOLDS
    try:
        return COMMANDS[args.command](args, out)
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
    except (UsageError, StructureError, EvalError, PointEvalError, TranslationError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

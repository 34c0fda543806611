"""Command-line front end.

Subcommands: build (finite quotient models with certificates), eval (exact
formula evaluation on a model file), translate (between the three formula
languages, plus axiom text generation), check (axiom-defect report), construct
(extension / excision search), spectrum (chain and discreteness table).

Exit codes: 0 success, 1 failed check or unmet contract, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .core import FinMetric, ZERO, rat, rat_str
from .errors import MetricsetError
from . import formulas as F
from . import translate as T
from . import trees
from . import verify
from .semantics import (LeStructure, MetricSetStructure, completion, eval_e,
                        eval_luk, eval_sq, load_structure, save_structure)


def _load_metric(path: str) -> FinMetric:
    with open(path) as fh:
        doc = json.load(fh)
    rows = doc["d"] if isinstance(doc, dict) else doc
    return FinMetric([[rat(str(v)) for v in row] for row in rows])


def _parse_gauge(spec: str, height: int) -> trees.Gauge:
    if spec.startswith("sn:"):
        return trees.pseudo_finite_gauge(int(spec[3:]), height)
    values = tuple(rat(part) for part in spec.split(","))
    if len(values) != height + 1:
        raise MetricsetError(
            f"gauge has {len(values)} values but height {height} needs {height + 1}")
    eps = trees.Gauge(values).smallest_eps()
    return trees.Gauge(values, epsilon=eps)


def _parse_assignment(text: str | None) -> dict[str, int]:
    if not text:
        return {}
    out = {}
    for part in text.split(","):
        name, _, value = part.partition("=")
        out[name.strip()] = int(value)
    return out


def _report_doc(qm: trees.QuotientModel) -> dict:
    return {
        "gauge": [rat_str(v) for v in qm.gauge.values],
        "epsilon": rat_str(qm.epsilon) if qm.epsilon is not None else None,
        "size": qm.size,
        "reports": [
            {"name": r.name, "formula": r.formula, "defect": rat_str(r.defect),
             "bound": rat_str(r.bound), "pass": r.passed, "mode": r.mode}
            for r in qm.reports],
    }


def _mss_of(model) -> MetricSetStructure:
    if isinstance(model, MetricSetStructure):
        return model
    return completion(model)


def cmd_build(args) -> int:
    q = None if args.atoms == "empty" else _load_metric(args.atoms)
    gauge = _parse_gauge(args.gauge, args.height)
    qm = trees.quotient_model(q, args.height, gauge, cap=args.cap, seed=args.seed)
    save_structure(qm.le, args.out)
    doc = _report_doc(qm)
    with open(args.out + ".cert.json", "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    for r in qm.reports:
        print(r.line())
    print(f"model: {qm.size} classes -> {args.out}")
    return 0 if all(r.passed for r in qm.reports) else 1


def _resolve_formula(language: str, text: str):
    if text.startswith("schema:"):
        name, _, r = text[len("schema:"):].partition(":")
        return F.schema(name, rat(r) if r else None)
    if text == "axiom:h_ext":
        return T.axiom_h_ext()
    return F.parse(language, text)


def cmd_eval(args) -> int:
    model = load_structure(args.model)
    rho = _parse_assignment(args.assign)
    phi = _resolve_formula(args.language, args.formula)
    if args.language == "sq":
        value = eval_sq(phi, _mss_of(model), rho)
    elif args.language == "e":
        if isinstance(model, MetricSetStructure):
            raise MetricsetError("membership-language evaluation needs an le model")
        value = eval_e(phi, model, rho)
    elif args.language == "luk":
        if isinstance(model, MetricSetStructure):
            raise MetricsetError("Lukasiewicz evaluation needs an le model")
        value = eval_luk(phi, model, rho)
    else:
        raise MetricsetError(f"unknown language {args.language!r}")
    print(rat_str(value))
    return 0


def cmd_translate(args) -> int:
    src, dst = args.source, args.target
    if src == "axiom":
        if dst == "h_ext":
            print(F.print_formula(T.axiom_h_ext()))
        elif dst == "excision":
            phi = F.parse("e", args.formula)
            print(F.print_formula(T.axiom_excision(phi)))
        elif dst == "luk_ext":
            print(F.print_formula(T.luk_axiom_ext()))
        elif dst == "luk_excision":
            phi = F.parse("luk", args.formula)
            print(F.print_formula(T.luk_axiom_excision(phi)))
        else:
            raise MetricsetError(f"unknown axiom {dst!r}")
        return 0
    phi = F.parse(src, args.formula)
    if (src, dst) == ("e", "sq"):
        print(F.print_formula(T.to_sq(phi)))
    elif (src, dst) == ("sq", "e"):
        print(F.print_formula(T.to_e(phi)))
    elif (src, dst) == ("e", "anf"):
        print(T.print_max_anf(T.prenex_max_anf(phi)))
    elif (src, dst) == ("e", "luk"):
        psi, scale = T.to_luk_condition(phi)
        print(F.print_formula(psi))
        print(f"scale: {scale}")
    else:
        raise MetricsetError(f"unsupported translation {src} -> {dst}")
    return 0


def cmd_check(args) -> int:
    model = load_structure(args.model)
    if isinstance(model, MetricSetStructure):
        raise MetricsetError("check expects an le model file")
    eps = rat(args.eps) if args.eps is not None else None
    if eps is None:
        try:
            with open(args.model + ".cert.json") as fh:
                doc = json.load(fh)
            eps = rat(doc["epsilon"]) if doc.get("epsilon") else ZERO
        except OSError:
            eps = ZERO
    if args.corpus:
        with open(args.corpus) as fh:
            corpus = [(line.strip(), F.parse("e", line.strip()), "x")
                      for line in fh if line.strip()]
    else:
        corpus = trees.default_corpus()
    ok = True
    value = eval_e(T.axiom_h_ext(), model, {})
    passed = value <= eps
    ok &= passed
    print(T.AxiomReport("h-ext", "", value, eps, passed).line())
    for label, phi, var in corpus:
        value, mode = T.excision_defect(
            model, phi, var=var,
            samples=None if model.size <= 64 else 32, seed=args.seed)
        bound = 2 * F.v_of(phi) * eps
        passed = value <= bound
        ok &= passed
        print(T.AxiomReport(f"excision[{label}]", label, value, bound,
                            passed, mode).line())
    return 0 if ok else 1


def cmd_construct(args) -> int:
    model = _mss_of(load_structure(args.model))
    if args.what == "extension":
        target = [] if args.target == "empty" else [
            int(t) for t in args.target.split(",")]
        res = verify.find_extension(model, target)
    elif args.what == "exc":
        phi = F.parse("sq" if "d(" in args.formula else "e", args.formula)
        try:
            res = verify.exc_search(model, phi, rat(args.r), rat(args.s),
                                    slack=rat(args.slack))
        except MetricsetError as exc:
            print(f"no witness: {exc}")
            return 1
    else:
        raise MetricsetError(f"unknown constructor {args.what!r}")
    print(f"index {res.index} residual {rat_str(res.residual)} "
          f"satisfied {int(res.satisfied)}")
    return 0 if res.satisfied else 1


def cmd_spectrum(args) -> int:
    model = _mss_of(load_structure(args.model))
    print(verify.format_chain_report(verify.chain_report(model)))
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metricset", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a finite quotient model")
    b.add_argument("atoms", help='"empty" or a JSON metric file of atoms')
    b.add_argument("height", type=int)
    b.add_argument("gauge", help='"sn:N" or a comma list of rationals')
    b.add_argument("--cap", type=int, default=2 ** 17)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default="model.json")
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("eval", help="evaluate a formula on a model file")
    e.add_argument("model")
    e.add_argument("language", choices=["sq", "e", "luk"])
    e.add_argument("formula")
    e.add_argument("--assign", help="comma list var=index")
    e.set_defaults(func=cmd_eval)

    t = sub.add_parser("translate", help="translate formulas / emit axioms")
    t.add_argument("source", help="e | sq | axiom")
    t.add_argument("target", help="sq | e | anf | luk | axiom name")
    t.add_argument("formula", nargs="?", default="")
    t.set_defaults(func=cmd_translate)

    c = sub.add_parser("check", help="axiom-defect report for a model")
    c.add_argument("model")
    c.add_argument("--corpus", help="file with one membership formula per line")
    c.add_argument("--eps", help="certificate tolerance (default: sidecar or 0)")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_check)

    k = sub.add_parser("construct", help="extension / excision search")
    k.add_argument("model")
    k.add_argument("what", choices=["extension", "exc"])
    k.add_argument("target", nargs="?", default="empty",
                   help="comma list of indices (extension)")
    k.add_argument("--formula", default="1 - e(x,x)")
    k.add_argument("--r", default="1/2")
    k.add_argument("--s", default="1")
    k.add_argument("--slack", default="0")
    k.set_defaults(func=cmd_construct)

    s = sub.add_parser("spectrum", help="chain and discreteness table")
    s.add_argument("model")
    s.set_defaults(func=cmd_spectrum)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MetricsetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point ``ql-bridge``.

Every command reads JSON documents (a path, or the name of a bundled
fixture) and writes one JSON report to stdout. Exit status: 0 success,
2 input error, 3 precondition violation, 4 procedure-dependent mean
probability, 5 search budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import contextuality as ks
from . import hilbert as hb
from . import lattice as lt
from . import pragmatics as pg
from . import probability as pr
from . import semantics as sm
from . import synthesis as sy
from . import syntax as sx
from .errors import BudgetExhausted, InputError, PreconditionError, QLBridgeError, TPrimeViolation

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_TPRIME, EXIT_BUDGET = 0, 2, 3, 4, 5


class _Exit(Exception):
    """Carries a finished report together with a nonzero exit status."""

    def __init__(self, report, code):
        self.report = report
        self.code = code


# -- loading ------------------------------------------------------------------

def fixture_names():
    root = resources.files("qlbridge") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_document(ref: str):
    path = Path(ref)
    if not path.exists():
        name = ref[:-5] if ref.endswith(".json") else ref
        candidate = resources.files("qlbridge") / "fixtures" / f"{name}.json"
        if "/" in name or not candidate.is_file():
            raise InputError(f"{ref}: no such file or bundled fixture")
        text, label = candidate.read_text(), f"fixture {name}"
    else:
        text, label = path.read_text(), str(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{label}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def _tolerance(args, default):
    return default if args.tolerance is None else args.tolerance


def load_model(ref, args):
    doc = load_document(ref)
    if "contexts" in doc:
        doc = dict(doc)
        if args.tolerance is not None:
            doc["tolerance"] = args.tolerance
        return pr.MuContextModel.from_dict(doc), doc
    return sm.ClassicalModel.from_dict(doc), doc


def load_mu_model(ref, args):
    model, doc = load_model(ref, args)
    if not isinstance(model, pr.MuContextModel):
        raise InputError(f"{ref}: not a mu-context model (no 'contexts' key)")
    return model, doc


def load_quantum(ref, args):
    """A ``{dim, states, properties}`` document."""
    doc = load_document(ref)
    try:
        tol = _tolerance(args, float(doc.get("tolerance", hb.DEFAULT_TOL)))
        hs = hb.HilbertSpace(int(doc["dim"]), tol)
        states = {k: hb.state_from_dict(v, tol) for k, v in doc.get("states", {}).items()}
        props = {k: hb.projection_from_dict(v, tol) for k, v in doc.get("properties", {}).items()}
    except KeyError as exc:
        raise InputError(f"{ref}: missing key {exc.args[0]!r}") from None
    return hs, states, props, doc


def load_lattice(ref, args):
    doc = dict(load_document(ref))
    if args.tolerance is not None:
        doc["tolerance"] = args.tolerance
    if "dim" not in doc:
        raise InputError(f"{ref}: not a projection lattice document (no 'dim')")
    return hb.lattice_from_dict(doc)


def signature_of(doc):
    return sx.Signature.from_dict(doc.get("signature", doc))


def parse_wff(text, sig):
    fragment = sx.Fragment.CONTEXTUAL if "[" in text else sx.Fragment.CLASSICAL
    return sx.parse(text, sig, fragment)


def frac(x):
    if isinstance(x, Fraction):
        return {"value": float(x), "exact": str(x)}
    return {"value": float(x)}


# -- commands -------------------------------------------------------------------

def cmd_parse(args):
    sig = signature_of(load_document(args.signature))
    fragment = sx.Fragment(args.fragment) if args.fragment else (
        sx.Fragment.CONTEXTUAL if "[" in args.wff else sx.Fragment.CLASSICAL)
    w = sx.parse(args.wff, sig, fragment)
    return {"text": sx.to_text(w), "fragment": sx.fragment_of(w).to_dict()}


def cmd_eval(args):
    model, _ = load_model(args.model, args)
    base = model.base if isinstance(model, pr.MuContextModel) else model
    w = parse_wff(args.wff, base.signature)
    mask = sm.extension_mask(w, base)
    out = {"wff": sx.to_text(w),
           "extension": sorted(sm.extension(w, base), key=base.universe.index),
           "measure": frac(base.measure(mask))}
    if args.object is not None:
        out["value"] = sm.evaluate(w, base, args.object)
    if args.state is not None:
        out["c_truth"] = sm.c_truth(w, args.state, base).value
    if isinstance(model, pr.MuContextModel):
        out["testable"] = pr.testable(w, model)
    return out


def cmd_preorder(args):
    model, _ = load_model(args.model, args)
    base = model.base if isinstance(model, pr.MuContextModel) else model
    a, b = parse_wff(args.a, base.signature), parse_wff(args.b, base.signature)
    out = {"a": sx.to_text(a), "b": sx.to_text(b),
           "logical": {"a<b": sm.logical_preorder(a, b, base),
                       "b<a": sm.logical_preorder(b, a, base)}}
    if sx.fragment_of(a).in_phi and sx.fragment_of(b).in_phi:
        out["physical"] = {"a<b": sm.physical_preorder(a, b, base),
                           "b<a": sm.physical_preorder(b, a, base)}
    return out


def _iso_report(left, right):
    return lt.order_isomorphic(left, right).to_dict()


def cmd_concrete_logic(args):
    doc = load_document(args.input)
    if "dim" in doc:
        lattice = load_lattice(args.input, args)
        exported = hb.export_classical_model(lattice)
        logic = sm.concrete_logic(exported.model, exported.phi_v, exported.ortho)
        out = {"source": "projection-lattice", "model": exported.model.to_dict(),
               "isomorphic_to_lattice": _iso_report(logic.structure, lattice)}
    else:
        model, _ = load_model(args.input, args)
        base = model.base if isinstance(model, pr.MuContextModel) else model
        spec = doc.get("concrete_logic")
        if spec is None:
            raise InputError(f"{args.input}: model has no 'concrete_logic' section")
        sig = base.signature
        cands = [sx.parse(t, sig) for t in spec["candidates"]]
        phi_v = sm.verifiable_wffs(cands, base,
                                   [sx.parse(t, sig) for t in spec.get("include", [])],
                                   [sx.parse(t, sig) for t in spec.get("exclude", [])])
        ortho = {sx.parse(k, sig): sx.parse(v, sig) for k, v in spec["ortho"].items()}
        logic = sm.concrete_logic(base, phi_v, ortho)
        out = {"source": "classical-model", "verifiable": [sx.to_text(w) for w in phi_v]}
    out["logic"] = logic.to_dict()
    out["diagnostics"] = lt.lattice_diagnostics(logic.structure).to_dict()
    return out


def cmd_lattice_check(args):
    lattice = load_lattice(args.lattice, args)
    out = {"lattice": {"dim": lattice.dim, "labels": list(lattice.labels)},
           "diagnostics": lt.lattice_diagnostics(lattice).to_dict()}
    if args.meet:
        p = hb.meet(lattice[args.meet[0]], lattice[args.meet[1]])
        out["meet"] = lattice.labels[lattice.find(p)]
    if args.join:
        p = hb.join(lattice[args.join[0]], lattice[args.join[1]])
        out["join"] = lattice.labels[lattice.find(p)]
    if args.ortho:
        out["ortho"] = lattice.labels[lattice.find(hb.ortho(lattice[args.ortho]))]
    if args.compare:
        out["isomorphism"] = _iso_report(lattice, load_lattice(args.compare, args))
    return out


def cmd_born(args):
    _, states, props, _ = load_quantum(args.system, args)
    rows = [{"state": s, "property": e, "probability": hb.born(states[s], props[e])}
            for s in states for e in props]
    return {"born": rows}


def _oracle(props, args):
    if args.atoms:
        names = args.atoms.split(",")
        missing = [n for n in names if n not in props]
        if missing:
            raise InputError(f"unknown property {missing[0]!r}")
        props = {n: props[n] for n in names}
    return props


def cmd_pragmatic_eval(args):
    hs, states, props, _ = load_quantum(args.system, args)
    oracle = pg.QuantumOracle(props, hs.tolerance)
    d = pg.parse_af(args.formula, oracle.signature)
    chosen = [args.state] if args.state else list(states)
    rows = []
    for s in chosen:
        if s not in states:
            raise InputError(f"unknown state {s!r}")
        rows.append({"state": s, "justified": pg.justify(d, states[s], oracle),
                     "analytic": pg.DEFAULT_RULES.justification_set(d, oracle).contains(states[s])})
    out = {"formula": pg.af_to_text(d), "points": rows}
    if args.below:
        d2 = pg.parse_af(args.below, oracle.signature)
        out["below"] = {"formula": pg.af_to_text(d2),
                        "analytic": pg.pragmatic_preorder(d, d2, oracle),
                        "on_points": pg.pragmatic_preorder(d, d2, oracle,
                                                           [states[s] for s in chosen])}
    return out


def cmd_pragmatic_structure(args):
    hs, _, props, _ = load_quantum(args.system, args)
    fs = pg.quantum_fragment_structure(_oracle(props, args), args.depth, args.budget,
                                       hs.tolerance)
    out = fs.to_dict()
    out["diagnostics"] = lt.lattice_diagnostics(fs.structure).to_dict()
    if args.compare:
        out["isomorphism"] = _iso_report(fs.structure, load_lattice(args.compare, args))
    return out


def cmd_prob_cond(args):
    model, _ = load_model(args.model, args)
    base = model.base if isinstance(model, pr.MuContextModel) else model
    a, b = parse_wff(args.a, base.signature), parse_wff(args.b, base.signature)
    out = {"a": sx.to_text(a), "b": sx.to_text(b), "probability": frac(pr.cond_prob(a, b, base))}
    if isinstance(model, pr.MuContextModel):
        out["jointly_testable"] = pr.jointly_testable(a, b, model)
    return out


def cmd_prob_mean(args):
    model, _ = load_mu_model(args.model, args)
    sig = model.signature
    a, b = parse_wff(args.a, sig), parse_wff(args.b, sig)
    report = pr.mean_cond_prob(a, b, model)
    out = {"a": sx.to_text(a), "b": sx.to_text(b), "mean": report.to_dict()}
    if not report.consistent:
        raise _Exit(out, EXIT_TPRIME)
    return out


def cmd_prob_q(args):
    model, _ = load_mu_model(args.model, args)
    try:
        value = pr.q_probability(args.property, args.state, model)
    except TPrimeViolation as exc:
        raise _Exit({"property": args.property, "state": args.state,
                     "error": str(exc), "mean": exc.report.to_dict()}, EXIT_TPRIME) from None
    return {"property": args.property, "state": args.state, "probability": frac(value)}


def cmd_prob_cond_q(args):
    model, _ = load_mu_model(args.model, args)
    if args.collapse:
        model = pr.collapse_contexts(model)
    res = pr.conditional_q_prob(args.e, args.f, args.state, model, shared_draw=args.shared_draw)
    out = res.to_dict()
    out.update({"e": args.e, "f": args.f, "state": args.state, "collapsed": args.collapse,
                "shared_draw": args.shared_draw})
    return out


def cmd_prob_synthesize(args):
    hs, states, props, doc = load_quantum(args.system, args)
    resolution = args.resolution or int(doc.get("resolution", 1000))
    model = sy.born_model_synthesize(hs, states, props, resolution)
    pairs = []
    for (e, s), target in model.synthesis.targets.items():
        q = pr.q_probability(e, s, model)
        pairs.append({"property": e, "state": s, "born": target, "q_probability": frac(q),
                      "deviation": abs(float(q) - target)})
    out = {"resolution": resolution, "objects": len(model.base.universe),
           "max_deviation": max(p["deviation"] for p in pairs), "pairs": pairs}
    if args.output:
        mdoc = model.to_dict()
        try:
            mdoc["property_lattice"] = sy.synthesized_lattice_spec(model).to_dict()
        except PreconditionError:
            pass
        Path(args.output).write_text(json.dumps(mdoc, sort_keys=True) + "\n")
        out["output"] = args.output
    return out


def cmd_prob_sample(args):
    model, _ = load_mu_model(args.model, args)
    sig = model.signature
    a, b = parse_wff(args.a, sig), parse_wff(args.b, sig)
    rep = pr.mean_probability_measurement(a, b, model, args.trials, args.seed, args.procedure)
    return {"a": sx.to_text(a), "b": sx.to_text(b), "sample": rep.to_dict()}


def cmd_prob_compat(args):
    model, _ = load_mu_model(args.model, args)
    props, matrix = pr.compatibility_matrix(model)
    n = len(props)
    failures = [[props[i], props[j], props[k]] for i in range(n) for j in range(n)
                for k in range(n) if matrix[i][j] and matrix[j][k] and not matrix[i][k]]
    return {"properties": props, "procedures": {p: model.procedures_of(p) for p in props},
            "compatible": {props[i]: [props[j] for j in range(n) if matrix[i][j]]
                           for i in range(n)},
            "reflexive": all(matrix[i][i] for i in range(n)),
            "symmetric": all(matrix[i][j] == matrix[j][i] for i in range(n) for j in range(n)),
            "transitive": not failures, "non_transitive_witness": failures[0] if failures else None}


def cmd_prob_measure_check(args):
    model, doc = load_mu_model(args.model, args)
    spec_doc = load_document(args.lattice) if args.lattice else doc.get("property_lattice")
    if spec_doc is None:
        raise InputError(f"{args.model}: no 'property_lattice' section and no --lattice given")
    report = pr.generalized_measure_check(model, pr.LatticeSpec.from_dict(spec_doc))
    return report.to_dict()


def _ks_verify(system, result):
    if result.assignment is None:
        return None
    return all(ks.check_law(result.assignment, law, system) for law in system.laws)


def cmd_ks_solve(args):
    system = ks.ObservableConstraintSystem.from_dict(load_document(args.instance))
    if args.mode == "mcp":
        res = ks.mcp_solve(system, args.budget, audit=args.audit)
        if not res.sat and res.audit is None:
            # an unsatisfiability claim always carries the enumeration count when feasible
            res.audit = ks.brute_force_audit(system)
        out = res.to_dict()
        out["verified"] = _ks_verify(system, res)
        if res.status == "INCONCLUSIVE":
            raise _Exit(out, EXIT_BUDGET)
        return out
    res = ks.mgp_check(system)
    out = res.to_dict()
    out["verified"] = all(
        ks.check_law(p["witness"], system.law(p["law"]), system)
        for p in res.per_law if p["satisfiable"])
    return out


def cmd_ks_report(args):
    system = ks.ObservableConstraintSystem.from_dict(load_document(args.instance))
    report = ks.contextuality_report(system, args.budget)
    out = report.to_dict()
    if report.mcp.status == "INCONCLUSIVE":
        raise _Exit(out, EXIT_BUDGET)
    return out


def cmd_fixtures(args):
    return {"fixtures": fixture_names()}


# which library operations each command reaches
DISPATCH = {
    "parse": (cmd_parse, [sx.parse, sx.to_text, sx.fragment_of]),
    "eval": (cmd_eval, [sm.extension, sm.extension_mask, sm.evaluate, sm.c_truth, pr.testable]),
    "preorder": (cmd_preorder, [sm.logical_preorder, sm.physical_preorder]),
    "concrete-logic": (cmd_concrete_logic, [sm.verifiable_wffs, sm.concrete_logic,
                                            hb.export_classical_model, lt.order_isomorphic]),
    "lattice-check": (cmd_lattice_check, [lt.lattice_diagnostics, lt.order_isomorphic,
                                          hb.meet, hb.join, hb.ortho]),
    "born": (cmd_born, [hb.born]),
    "pragmatic-eval": (cmd_pragmatic_eval, [pg.justify, pg.pragmatic_preorder]),
    "pragmatic-structure": (cmd_pragmatic_structure, [pg.quantum_fragment_structure]),
    "prob cond": (cmd_prob_cond, [pr.cond_prob, pr.jointly_testable]),
    "prob mean": (cmd_prob_mean, [pr.mean_cond_prob]),
    "prob q": (cmd_prob_q, [pr.q_probability]),
    "prob cond-q": (cmd_prob_cond_q, [pr.conditional_q_prob, pr.collapse_contexts]),
    "prob synthesize": (cmd_prob_synthesize, [sy.born_model_synthesize]),
    "prob sample": (cmd_prob_sample, [pr.mean_probability_measurement]),
    "prob compat": (cmd_prob_compat, [pr.compatibility]),
    "prob measure-check": (cmd_prob_measure_check, [pr.generalized_measure_check]),
    "ks solve": (cmd_ks_solve, [ks.mcp_solve, ks.mgp_check, ks.check_law]),
    "ks report": (cmd_ks_report, [ks.contextuality_report]),
    "fixtures": (cmd_fixtures, []),
}


# -- argument parsing ----------------------------------------------------------

def _common():
    # SUPPRESS lets the flags appear before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=["json", "table"], default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--tolerance", type=float, default=argparse.SUPPRESS)
    p.add_argument("--budget", type=int, default=argparse.SUPPRESS)
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="ql-bridge", parents=[common],
                                     description="Classical, quantum and pragmatic logics "
                                                 "on finite models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, target=sub, group=None):
        p = target.add_parser(name, parents=[common], help=help_)
        p.set_defaults(key=f"{group} {name}" if group else name)
        return p

    p = add("parse", "parse a formula and print its canonical form")
    p.add_argument("wff")
    p.add_argument("signature", help="signature or model document")
    p.add_argument("--fragment", choices=["classical", "contextual"])

    p = add("eval", "extension, truth value and C-truth of a formula")
    p.add_argument("wff")
    p.add_argument("model")
    p.add_argument("--object")
    p.add_argument("--state")

    p = add("preorder", "logical and physical order between two formulas")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("model")

    p = add("concrete-logic", "concrete logic of a model or of a projection lattice")
    p.add_argument("input")

    p = add("lattice-check", "lattice diagnostics of a projection lattice")
    p.add_argument("lattice")
    p.add_argument("--compare", help="second lattice for an isomorphism check")
    p.add_argument("--meet", nargs=2, metavar=("P", "Q"))
    p.add_argument("--join", nargs=2, metavar=("P", "Q"))
    p.add_argument("--ortho", metavar="P")

    p = add("born", "Born probabilities of every state/property pair")
    p.add_argument("system")

    p = add("pragmatic-eval", "justification of an assertive formula at quantum states")
    p.add_argument("formula")
    p.add_argument("system")
    p.add_argument("--state")
    p.add_argument("--below", help="second formula for the pragmatic preorder")

    p = add("pragmatic-structure", "quotient structure of the quantum assertive fragment")
    p.add_argument("system")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--atoms", help="comma-separated subset of the properties")
    p.add_argument("--compare", help="projection lattice for an isomorphism check")

    prob = sub.add_parser("prob", help="mu-contextual probabilities")
    psub = prob.add_subparsers(dest="prob_command", required=True)
    for name, help_ in (("cond", "conditional probability p(a|b)"),
                        ("mean", "mean conditional probability <p(a|b)>")):
        p = add(name, help_, psub, "prob")
        p.add_argument("a")
        p.add_argument("b")
        p.add_argument("model")
    p = add("q", "Q-probability P_S(E)", psub, "prob")
    p.add_argument("model")
    p.add_argument("--state", required=True)
    p.add_argument("--property", required=True)
    p = add("cond-q", "conditional Q-probability from successive measurements", psub, "prob")
    p.add_argument("model")
    p.add_argument("--e", required=True)
    p.add_argument("--f", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--shared-draw", action="store_true")
    p.add_argument("--collapse", action="store_true", help="collapse mu-contexts first")
    p = add("synthesize", "finite model reproducing Born probabilities", psub, "prob")
    p.add_argument("system")
    p.add_argument("--resolution", type=int)
    p.add_argument("--output")
    p = add("sample", "simulated mean probability measurement", psub, "prob")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("model")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--procedure")
    p = add("compat", "compatibility relation between properties", psub, "prob")
    p.add_argument("model")
    p = add("measure-check", "generalized probability measure axioms", psub, "prob")
    p.add_argument("model")
    p.add_argument("--lattice")

    ksp = sub.add_parser("ks", help="value assignments under laws")
    ksub = ksp.add_subparsers(dest="ks_command", required=True)
    p = add("solve", "solve under MCP or MGP", ksub, "ks")
    p.add_argument("instance")
    p.add_argument("--mode", choices=["mcp", "mgp"], default="mcp")
    p.add_argument("--audit", action="store_true",
                   help="brute-force count for SAT results too (UNSAT always carries it)")
    p = add("report", "contextuality report under both modes", ksub, "ks")
    p.add_argument("instance")

    add("fixtures", "list bundled fixtures")
    return parser


# -- output ---------------------------------------------------------------------

def _table(obj, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for key in sorted(obj):
            val = obj[key]
            if isinstance(val, (dict, list)) and val and not _flat(val):
                lines.append(f"{pad}{key}:")
                lines.extend(_table(val, indent + 1))
            else:
                lines.append(f"{pad}{key}: {json.dumps(val, sort_keys=True)}")
    elif isinstance(obj, list):
        for val in obj:
            if isinstance(val, (dict, list)) and not _flat(val):
                lines.append(f"{pad}-")
                lines.extend(_table(val, indent + 1))
            else:
                lines.append(f"{pad}- {json.dumps(val, sort_keys=True)}")
    return lines


def _flat(val):
    items = val.values() if isinstance(val, dict) else val
    return all(not isinstance(v, (dict, list)) for v in items) and len(val) <= 8


def render(report, fmt):
    if fmt == "table":
        return "\n".join(_table(report)) + "\n"
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("format", "json"), ("seed", 0), ("tolerance", None),
                          ("budget", 1_000_000)):
        if not hasattr(args, name):
            setattr(args, name, default)
    handler = DISPATCH[args.key][0]
    code = EXIT_OK
    try:
        report = handler(args)
    except _Exit as done:
        report, code = done.report, done.code
    except InputError as exc:
        print(f"ql-bridge {args.key}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TPrimeViolation as exc:
        print(f"ql-bridge {args.key}: procedure dependence: {exc}", file=sys.stderr)
        return EXIT_TPRIME
    except BudgetExhausted as exc:
        print(f"ql-bridge {args.key}: budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except PreconditionError as exc:
        print(f"ql-bridge {args.key}: precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except QLBridgeError as exc:
        print(f"ql-bridge {args.key}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (KeyError, TypeError, ValueError) as exc:
        print(f"ql-bridge {args.key}: input error: malformed document ({exc!r})", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"ql-bridge {args.key}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(render(report, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())

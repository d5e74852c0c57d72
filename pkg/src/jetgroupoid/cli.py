"""Command-line interface: ``jetg <verb> <action> [inputs] [options]``.

Inputs are JSON file paths or inline JSON. Results go to ``--out`` or stdout.
Exit status: 0 success, 1 domain error, 2 malformed input.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from . import serialize as ser
from .algebroid import (GroupJetSection, JetSection, TrivialSection, ad, anchor, bracket_group_jet, bracket_jet,
                        bracket_trivial, lie_derivative)
from .errors import DomainError, MalformedInput, NonNormal
from .finite_groupoid import check_axioms, cosets, is_normal, local_triviality_checks, quotient
from .flows import FlowConfig, exp_jet, exp_trivial_path, flow_vector_field
from .jet_groupoid import JetArrow, project, prolong_vector_field
from .linear_groupoid import LinearOperator, VectorSection, apply, commutator, operator_flow
from .multijet import jet_add, jet_compose, jet_invert, jet_mul, jet_of_polynomial, jet_sub
from .rational import from_text
from .verify import SUITES, format_table, run_suite


def load(arg: str):
    """Inline JSON when ``arg`` starts with ``{`` or ``[``, otherwise a file path."""
    text = arg
    if not arg.lstrip().startswith(("{", "[")):
        try:
            with open(arg, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise MalformedInput(f"cannot read {arg!r}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON in {arg!r}: {exc.msg}") from exc


def parse_point(text: str | None, exact: bool = True):
    if text is None:
        raise MalformedInput("--point is required")
    try:
        vals = [from_text(p) for p in text.split(",")]
    except ValueError as exc:
        raise MalformedInput(f"malformed point {text!r}") from exc
    return vals if exact else [float(v) for v in vals]


def _require(value, flag):
    if value is None:
        raise MalformedInput(f"{flag} is required for this action")
    return value


def _inputs(args, count: int):
    if len(args.inputs) != count:
        raise MalformedInput(f"{args.verb} {args.action} expects {count} input(s), got {len(args.inputs)}")
    return [load(a) for a in args.inputs]


def _jet(doc):
    if isinstance(doc, dict) and "kind" in doc and doc["kind"] not in ("jet", "jet_arrow"):
        raise MalformedInput(f"expected a jet, got {doc['kind']!r}")
    return ser.jet_from_json(doc)


def _config(args) -> FlowConfig:
    return FlowConfig.from_env(step=args.step, tol=args.tol)


# verbs

def run_jet(args):
    act = args.action
    if act == "compose":
        a, b = (_jet(d) for d in _inputs(args, 2))
        return ser.jet_to_json(jet_compose(a, b))
    if act == "invert":
        (a,) = (_jet(d) for d in _inputs(args, 1))
        return ser.jet_to_json(jet_invert(a))
    if act in ("add", "sub", "mul"):
        a, b = (_jet(d) for d in _inputs(args, 2))
        fn = {"add": jet_add, "sub": jet_sub, "mul": jet_mul}[act]
        return ser.jet_to_json(fn(a, b))
    if act == "project":
        (a,) = (_jet(d) for d in _inputs(args, 1))
        return ser.arrow_to_json(project(JetArrow(a), _require(args.k, "--k")))
    if act == "identity":
        pt = parse_point(args.point)
        if args.dim is not None and args.dim != len(pt):
            raise MalformedInput("--dim differs from the point dimension")
        return ser.arrow_to_json(JetArrow.identity(pt, _require(args.k, "--k")))
    if act == "of-poly":
        (doc,) = _inputs(args, 1)
        field = ser.section_from_json(doc)
        comps = list(field.components) if hasattr(field, "components") else None
        if comps is None:
            raise MalformedInput("of-poly expects a vector_field or vector_section document")
        return ser.jet_to_json(jet_of_polynomial(comps, parse_point(args.point), _require(args.k, "--k")))
    if act == "prolong":
        fdoc, adoc = _inputs(args, 2)
        field = ser.section_from_json(fdoc)
        arrow = JetArrow(_jet(adoc))
        return ser.jet_to_json(prolong_vector_field(field, arrow), "tangent_vector")
    raise MalformedInput(f"unknown jet action {act!r}")


def run_groupoid(args):
    act = args.action
    if act in ("check", "triviality"):
        (doc,) = _inputs(args, 1)
        t = ser.groupoid_from_json(doc)
        if act == "check":
            rep = check_axioms(t)
            return {"ok": rep.ok, "violations": [str(v) for v in rep.violations]}
        rep = local_triviality_checks(t)
        return {"locally_trivial": rep.locally_trivial, "components": [asdict(c) for c in rep.components]}
    gdoc, sdoc = _inputs(args, 2)
    t = ser.groupoid_from_json(gdoc)
    s = ser.subgroupoid_from_json(sdoc, t)
    if act == "cosets":
        return {"blocks": [list(b) for b in cosets(t, s)]}
    if act == "normal":
        res = is_normal(t, s)
        return {"normal": res.normal, "witness": list(res.witness) if res.witness else None}
    if act == "quotient":
        return ser.groupoid_to_json(quotient(t, s))
    raise MalformedInput(f"unknown groupoid action {act!r}")


def run_algebroid(args):
    act = args.action
    if act == "anchor":
        (doc,) = _inputs(args, 1)
        return ser.field_doc_to_json(anchor(ser.section_from_json(doc)))
    a, b = (ser.section_from_json(d) for d in _inputs(args, 2))
    if act == "bracket":
        if isinstance(a, TrivialSection) and isinstance(b, TrivialSection):
            return ser.to_json(bracket_trivial(a, b))
        if isinstance(a, JetSection) and isinstance(b, JetSection):
            return ser.to_json(bracket_jet(a, b))
        if isinstance(a, GroupJetSection) and isinstance(b, GroupJetSection):
            return ser.to_json(bracket_group_jet(a, b))
        raise MalformedInput("bracket needs two sections of the same kind")
    if act == "ad":
        if not (isinstance(a, TrivialSection) and isinstance(b, TrivialSection)):
            raise MalformedInput("ad expects two trivial sections")
        return ser.to_json(ad(a, b))
    if act == "lie":
        if not (isinstance(a, JetSection) and isinstance(b, GroupJetSection)):
            raise MalformedInput("lie expects a jet section and a group jet section")
        return ser.to_json(lie_derivative(a, b))
    raise MalformedInput(f"unknown algebroid action {act!r}")


def run_flow(args):
    act = args.action
    cfg = _config(args)
    (doc,) = _inputs(args, 1)
    obj = ser.section_from_json(doc)
    pt = parse_point(args.point, exact=False)
    t = _require(args.t, "--t")
    if act == "field":
        theta = obj.theta if isinstance(obj, TrivialSection) else obj
        return {"t": t, "point": ser.array_to_json(flow_vector_field(theta, pt, t, cfg))}
    if act == "exp":
        if not isinstance(obj, TrivialSection):
            raise MalformedInput("flow exp expects a trivial section")
        path = exp_trivial_path(obj, pt, t, args.samples, cfg)
        if args.format == "csv":
            return ser.path_to_csv(path)
        return {"path": ser.path_to_json(path)}
    if act == "exp-jet":
        if not isinstance(obj, JetSection):
            raise MalformedInput("flow exp-jet expects a jet section")
        if args.k is not None and args.k != obj.k:
            obj = obj.projected(args.k)
        return ser.jet_to_json(exp_jet(obj, pt, t, cfg).jet, "jet_arrow")
    raise MalformedInput(f"unknown flow action {act!r}")


def run_linop(args):
    act = args.action
    if act == "commutator":
        a, b = (ser.section_from_json(d) for d in _inputs(args, 2))
        if not (isinstance(a, LinearOperator) and isinstance(b, LinearOperator)):
            raise MalformedInput("commutator expects two linear operators")
        return ser.to_json(commutator(a, b))
    op, s = (ser.section_from_json(d) for d in _inputs(args, 2))
    if not (isinstance(op, LinearOperator) and isinstance(s, VectorSection)):
        raise MalformedInput(f"linop {act} expects an operator and a vector section")
    if act == "apply":
        return ser.to_json(apply(op, s))
    if act == "flow":
        t = _require(args.t, "--t")
        val = operator_flow(op, s, parse_point(args.point, exact=False), t, _config(args))
        return {"t": t, "value": ser.array_to_json(val)}
    raise MalformedInput(f"unknown linop action {act!r}")


def run_verify(args):
    suite = args.action
    if suite not in SUITES:
        raise MalformedInput(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    results = run_suite(suite, args.seed, _config(args))
    table = format_table(results, timings=args.timings)
    failed = not all(r.passed for r in results)
    return table, failed


VERBS = {"jet": run_jet, "groupoid": run_groupoid, "algebroid": run_algebroid, "flow": run_flow,
         "linop": run_linop}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jetg", description="Jet groupoid calculus toolkit.")
    p.add_argument("verb", choices=sorted(list(VERBS) + ["verify"]))
    p.add_argument("action", help="operation name, or the suite name for verify")
    p.add_argument("inputs", nargs="*", help="JSON file paths or inline JSON")
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step", type=float, default=None, help="RK4 step (env JETG_STEP)")
    p.add_argument("--tol", type=float, default=None, help="tolerance (env JETG_TOL)")
    p.add_argument("--k", type=int, default=None, help="jet order")
    p.add_argument("--dim", type=int, default=None, help="dimension check for constructed jets")
    p.add_argument("--point", default=None, help="comma-separated coordinates, e.g. 1/2,3")
    p.add_argument("--t", type=float, default=None, help="flow time")
    p.add_argument("--samples", type=int, default=10, help="path samples for flow exp")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--timings", action="store_true", help="add run times to the verify table")
    return p


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "verify":
            table, failed = run_verify(args)
            _emit(table, args.out)
            return 1 if failed else 0
        result = VERBS[args.verb](args)
        _emit(result if isinstance(result, str) else ser.dumps(result) + "\n", args.out)
        return 0
    except NonNormal as exc:
        print(f"error: {exc} (witness: {exc.witness})", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except MalformedInput as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError, KeyError) as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end: instance documents in, deterministic reports out.

Usage::

    pqnkit <command> --instance <path> [--seed S] [--trials K] [--format json|text]
    pqnkit compute <what> --instance <path> ...

Exit status is 0 when the verdict is true, 1 when it is false and 2 on any error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass

from . import gencplx, structures
from .exterior import (
    CotangentMap,
    DifferentialForm,
    EndomorphismField,
    MultiVectorField,
    VectorValuedTwoForm,
    d_N_cartan,
    exterior_derivative,
    format_field,
    koszul_bracket_graded,
    schouten_bracket,
)
from .ratpoly import Polynomial, PolynomialParseError, format_polynomial, parse_polynomial

__all__ = [
    "InstanceError",
    "Instance",
    "parse_instance",
    "dump_instance",
    "run_command",
    "emit_report",
    "main",
    "COMMANDS",
    "COMPUTE_TARGETS",
]

SCHEMA = 1
KINDS = ("bivector", "vector", "form", "endomorphism")

COMMANDS = (
    "check-poisson",
    "check-pn",
    "check-pqn",
    "check-symplectic-quasi",
    "check-gcs",
    "verify-theorem-a",
    "verify-theorem-d",
    "courant-axioms",
    "lemma74",
    "prop75",
    "compute",
)
COMPUTE_TARGETS = ("schouten", "d", "dn", "koszul", "bracket-std", "bracket-deformed", "bracket-double")

DEFAULT_TRIALS = {"courant-axioms": 2, "lemma74": 3, "prop75": 25}


class InstanceError(ValueError):
    """Malformed instance document or a command that lacks a required tensor."""


# instance documents -------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    n: int
    tensors: dict

    def get(self, name, default=None):
        return self.tensors.get(name, default)

    def require(self, *names):
        missing = [k for k in names if k not in self.tensors]
        if missing:
            raise InstanceError("instance is missing tensor(s): " + ", ".join(missing))
        return [self.tensors[k] for k in names]


def _fail(where, msg):
    raise InstanceError(f"{where}: {msg}")


def _check_keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        _fail(where, "expected an object")
    for k in obj:
        if k not in allowed:
            _fail(where, f"unknown field {k!r}")
    for k in required:
        if k not in obj:
            _fail(where, f"missing field {k!r}")


def _parse_tensor(name, spec, n):
    where = f"tensors.{name}"
    _check_keys(spec, ("kind", "degree", "components"), ("kind",), where)
    kind = spec["kind"]
    if kind not in KINDS:
        _fail(where, f"unknown kind {kind!r} (expected one of {', '.join(KINDS)})")
    degree = spec.get("degree")
    if degree is not None and (not isinstance(degree, int) or isinstance(degree, bool) or degree < 0):
        _fail(where, "degree must be a non-negative integer")
    if kind == "bivector":
        if degree not in (None, 2):
            _fail(where, "a bivector has degree 2")
        degree = 2
    elif kind == "vector":
        degree = 1 if degree is None else degree
    elif kind == "form":
        if degree is None:
            _fail(where, "a form needs a degree")
    elif degree not in (None, 1):
        _fail(where, "an endomorphism has no degree")
    comps = spec.get("components", [])
    if not isinstance(comps, list):
        _fail(where, "components must be a list")
    width = 2 if kind == "endomorphism" else degree
    values = {}
    for k, c in enumerate(comps):
        cw = f"{where}.components[{k}]"
        _check_keys(c, ("indices", "value"), ("indices", "value"), cw)
        idx, text = c["indices"], c["value"]
        if not isinstance(idx, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in idx):
            _fail(cw, "indices must be a list of integers")
        if len(idx) != width:
            _fail(cw, f"expected {width} indices, got {len(idx)}")
        if any(i < 1 or i > n for i in idx):
            _fail(cw, f"indices out of range 1..{n}")
        if kind != "endomorphism" and any(a >= b for a, b in zip(idx, idx[1:])):
            _fail(cw, "indices not strictly increasing")
        if not isinstance(text, (str, int)) or isinstance(text, bool):
            _fail(cw, "value must be a polynomial expression string")
        try:
            p = parse_polynomial(str(text), n)
        except PolynomialParseError as exc:
            _fail(cw, str(exc))
        key = tuple(i - 1 for i in idx)
        if key in values:
            _fail(cw, "duplicate indices")
        values[key] = p
    if kind == "endomorphism":
        return EndomorphismField(n, [[values.get((i, j), 0) for j in range(n)] for i in range(n)])
    if kind == "form":
        return DifferentialForm(n, degree, values)
    return MultiVectorField(n, degree, values)


def parse_instance(text: str) -> Instance:
    """Parse and validate an instance document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    _check_keys(doc, ("schema", "n", "tensors"), ("n",), "document")
    if "schema" in doc and doc["schema"] != SCHEMA:
        _fail("document", f"unsupported schema {doc['schema']!r}")
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        _fail("n", "dimension must be a positive integer")
    tensors = doc.get("tensors", {})
    if not isinstance(tensors, dict):
        _fail("tensors", "expected an object")
    return Instance(n, {name: _parse_tensor(name, spec, n) for name, spec in tensors.items()})


def _tensor_doc(t):
    if isinstance(t, EndomorphismField):
        comps = [
            {"indices": [i + 1, j + 1], "value": format_polynomial(t[i, j])}
            for i in range(t.n)
            for j in range(t.n)
            if t[i, j]
        ]
        return {"kind": "endomorphism", "components": comps}
    comps = [{"indices": [i + 1 for i in I], "value": format_polynomial(a)} for I, a in t.items()]
    if isinstance(t, DifferentialForm):
        return {"kind": "form", "degree": t.degree, "components": comps}
    if t.degree == 2:
        return {"kind": "bivector", "components": comps}
    return {"kind": "vector", "degree": t.degree, "components": comps}


def dump_instance(inst: Instance) -> str:
    """Canonical JSON text of an instance; parse_instance(dump_instance(x)) == x."""
    doc = {"schema": SCHEMA, "n": inst.n, "tensors": {k: _tensor_doc(v) for k, v in sorted(inst.tensors.items())}}
    return json.dumps(doc, indent=2) + "\n"


# serialization of defects -------------------------------------------------------------


def _key(k) -> str:
    if isinstance(k, tuple):
        return ",".join(str(x) for x in k)
    return str(k)


def _payload(obj):
    """JSON-able rendering listing only nonzero parts; None when obj is zero."""
    if isinstance(obj, structures.DefectReport):
        return [_entry(e) for e in obj]
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            p = _payload(v)
            if p is not None:
                out[_key(k)] = p
        return out or None
    if isinstance(obj, (list, tuple)):
        out = {}
        for k, v in enumerate(obj):
            p = _payload(v)
            if p is not None:
                out[f"trial {k + 1}"] = p
        return out or None
    if isinstance(obj, Polynomial):
        return None if obj.is_zero() else format_polynomial(obj)
    if isinstance(obj, (MultiVectorField, DifferentialForm)):
        if obj.is_zero():
            return None
        doc = _tensor_doc(obj)
        doc["text"] = format_field(obj)
        return doc
    if isinstance(obj, EndomorphismField):
        return None if obj.is_zero() else _tensor_doc(obj)
    if isinstance(obj, CotangentMap):
        if obj.is_zero():
            return None
        comps = [
            {"indices": [i + 1, j + 1], "value": format_polynomial(obj.matrix[i][j])}
            for i in range(obj.n)
            for j in range(obj.n)
            if obj.matrix[i][j]
        ]
        return {"kind": "matrix", "components": comps}
    if isinstance(obj, VectorValuedTwoForm):
        if obj.is_zero():
            return None
        comps = [
            {"indices": [i + 1, j + 1, k + 1], "value": format_polynomial(a)}
            for (i, j), v in obj.items()
            for (k,), a in v.items()
        ]
        return {"kind": "vector-valued-2-form", "components": comps}
    if isinstance(obj, structures.ConcomitantCN):
        return _payload({
            "C(dx_i,dx_j)": {(i + 1, j + 1): v for (i, j), v in sorted(obj.components.items())},
            "C(x_k dx_i,dx_j) - x_k C(dx_i,dx_j)": {
                (k + 1, i + 1, j + 1): v for (k, i, j), v in sorted(obj.witnesses.items())
            },
        })
    if isinstance(obj, gencplx.GeneralizedSection):
        if obj.is_zero():
            return None
        return {"kind": "section", "vector": _payload(obj.vector), "form": _payload(obj.form)}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _entry(e):
    out = {"name": e.name, "is_zero": e.is_zero}
    if not e.is_zero:
        out["defect"] = _payload(e.defect)
    return out


def _value_doc(obj):
    p = _payload(obj)
    if p is not None:
        return p
    if isinstance(obj, gencplx.GeneralizedSection):
        return {"kind": "section", "vector": None, "form": None}
    return 0


# commands -----------------------------------------------------------------------


def _structure_data(inst, need_phi=False):
    pi, N = inst.require("pi", "N")
    phi, sigma = inst.get("phi"), inst.get("sigma")
    if phi is not None and sigma is not None:
        raise InstanceError("supply at most one of phi and sigma")
    return structures.StructureData(inst.n, pi=pi, N=N, phi=phi, sigma=sigma)


def _blocks(inst):
    n = inst.n
    pi = inst.get("pi", MultiVectorField.zero(n, 2))
    N = inst.get("N", EndomorphismField.zero(n))
    sigma = inst.get("sigma", DifferentialForm.zero(n, 2))
    return pi, N, sigma


def _section(inst, vec, form):
    n = inst.n
    return gencplx.GeneralizedSection(
        inst.get(vec, MultiVectorField.zero(n, 1)), inst.get(form, DifferentialForm.zero(n, 1))
    )


def _pair_sections(inst):
    if not any(k in inst.tensors for k in ("X", "xi")) or not any(k in inst.tensors for k in ("Y", "eta")):
        raise InstanceError("bracket needs sections X + xi and Y + eta (missing parts count as zero)")
    return _section(inst, "X", "xi"), _section(inst, "Y", "eta")


def _report(verdict, entries, **extra):
    return {"verdict": verdict, "entries": entries, **extra}


def _theorem(tv):
    return {
        "verdict": tv.agree,
        "verdicts": {"left": tv.left, "right": tv.right, "agree": tv.agree},
        "left": tv.left_report,
        "right": tv.right_report,
    }


def _courant_structure(inst):
    n = inst.n
    if "sigma" in inst.tensors:
        return gencplx.CourantStructure.deformed(gencplx.build_J(*_blocks(inst)))
    if "pi" in inst.tensors:
        pi = inst.tensors["pi"]
        N = inst.get("N", EndomorphismField.identity(n))
        return gencplx.CourantStructure.double(pi, N, inst.get("phi"))
    return gencplx.CourantStructure.standard(n)


def _compute(what, inst):
    n = inst.n
    if what == "schouten":
        P, Q = inst.require("P", "Q")
        return schouten_bracket(P, Q)
    if what == "d":
        (alpha,) = inst.require("alpha")
        return exterior_derivative(alpha)
    if what == "dn":
        N, alpha = inst.require("N", "alpha")
        return d_N_cartan(N, alpha)
    if what == "koszul":
        pi, a, b = inst.require("pi", "alpha", "beta")
        return koszul_bracket_graded(pi, a, b)
    v, w = _pair_sections(inst)
    if what == "bracket-std":
        return gencplx.std_bracket(v, w)
    if what == "bracket-deformed":
        return gencplx.deformed_bracket(gencplx.build_J(*_blocks(inst)), v, w)
    if what == "bracket-double":
        pi, N = inst.require("pi", "N")
        return gencplx.double_bracket(pi, N, inst.get("phi", DifferentialForm.zero(n, 3)), v, w)
    raise InstanceError(f"unknown compute target {what!r}")


def run_command(command: str, inst: Instance, seed: int = 0, trials: int | None = None,
                target: str | None = None) -> dict:
    """Run one command; returns a report dict (see :func:`emit_report`)."""
    if command not in COMMANDS:
        raise InstanceError(f"unknown command {command!r}")
    if trials is None:
        trials = DEFAULT_TRIALS.get(command, 5)
    head = {"schema": SCHEMA, "command": command if target is None else f"compute {target}", "n": inst.n,
            "seed": seed, "trials": trials}
    n = inst.n
    if command == "compute":
        if target not in COMPUTE_TARGETS:
            raise InstanceError(f"unknown compute target {target!r}")
        body = {"verdict": None, "result": _compute(target, inst)}
    elif command == "check-poisson":
        (pi,) = inst.require("pi")
        body = _report(None, structures.DefectReport.of(("[pi,pi]", structures.poisson_defect(pi))))
    elif command == "check-pn":
        pi, N = inst.require("pi", "N")
        body = _report(None, structures.check_pn(pi, N))
    elif command == "check-pqn":
        body = _report(None, structures.check_pqn(_structure_data(inst)))
    elif command == "check-symplectic-quasi":
        omega, N = inst.require("omega", "N")
        phi = inst.get("phi", DifferentialForm.zero(n, 3))
        body = _report(None, structures.symplectic_quasi_check(omega, N, phi))
    elif command == "check-gcs":
        J = gencplx.build_J(*_blocks(inst))
        alg = gencplx.algebraic_defects(J)
        rep = alg + gencplx.integrability_defect(J) if alg.verdict else alg
        body = _report(None, rep)
    elif command == "verify-theorem-a":
        body = _theorem(structures.verify_theorem_a(_structure_data(inst)))
    elif command == "verify-theorem-d":
        body = _theorem(gencplx.verify_theorem_d(*_blocks(inst)))
    elif command == "courant-axioms":
        S = _courant_structure(inst)
        rng = random.Random(seed)
        entries = []
        for t in range(trials):
            secs = [gencplx.random_section(rng, n) for _ in range(3)]
            fns = [gencplx.random_polynomial(rng, n) for _ in range(2)]
            rep = gencplx.courant_axiom_defects(S, secs, fns)
            entries.extend(structures.DefectEntry(f"trial {t + 1}: {e.name}", e.defect) for e in rep)
        body = _report(None, structures.DefectReport(tuple(entries)), structure=S.kind)
    elif command == "lemma74":
        body = _report(None, gencplx.lemma74_defects(gencplx.build_J(*_blocks(inst)), trials, seed))
    else:  # prop75
        body = _report(None, gencplx.prop75_equivalence(*_blocks(inst), trials=trials, seed=seed))
    if body["verdict"] is None and command != "compute":
        body["verdict"] = body["entries"].verdict
    return {**head, **body}


# report emission ---------------------------------------------------------------------


def _report_json(report):
    out = {}
    for k, v in report.items():
        if k == "result":
            out[k] = _value_doc(v)
        elif isinstance(v, structures.DefectReport):
            out[k] = _payload(v)
        else:
            out[k] = v
    return out


def _text_lines(rep, indent=""):
    lines = []
    for e in rep:
        lines.append(f"{indent}[{'ok' if e.is_zero else 'FAIL'}] {e.name}")
        if not e.is_zero:
            lines.extend(_text_defect(e.defect, indent + "    "))
    return lines


def _text_defect(obj, indent):
    p = _payload(obj)
    return [indent + line for line in _flatten_text(p)]


def _flatten_text(p):
    if p is None:
        return []
    if isinstance(p, str):
        return [p]
    if isinstance(p, dict) and "kind" in p:
        if "text" in p:
            return [p["text"]]
        if p["kind"] == "section":
            return [f"vector: {(p['vector'] or {}).get('text', '0')}", f"form: {(p['form'] or {}).get('text', '0')}"]
        return [f"({','.join(map(str, c['indices']))}): {c['value']}" for c in p["components"]]
    if isinstance(p, list):
        return [line for q in p for line in _flatten_text(q)]
    out = []
    for k, v in p.items():
        sub = _flatten_text(v)
        if len(sub) == 1:
            out.append(f"{k}: {sub[0]}")
        else:
            out.append(f"{k}:")
            out.extend("    " + s for s in sub)
    return out


def emit_report(report: dict, fmt: str = "json") -> bytes:
    """Deterministic bytes for a report from :func:`run_command`."""
    if fmt == "json":
        return (json.dumps(_report_json(report), indent=2, sort_keys=False) + "\n").encode()
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [f"command: {report['command']}", f"n: {report['n']}"]
    if report["command"] in ("courant-axioms", "lemma74", "prop75"):
        lines.append(f"seed: {report['seed']}  trials: {report['trials']}")
    if "structure" in report:
        lines.append(f"structure: {report['structure']}")
    if "result" in report:
        lines.append("result:")
        res = _value_doc(report["result"])
        lines.extend("    " + s for s in (_flatten_text(res) if res != 0 else ["0"]))
        return ("\n".join(lines) + "\n").encode()
    if "verdicts" in report:
        v = report["verdicts"]
        lines.append(f"left: {v['left']}  right: {v['right']}  agree: {v['agree']}")
        lines.append("left side:")
        lines.extend(_text_lines(report["left"], "  "))
        lines.append("right side:")
        lines.extend(_text_lines(report["right"], "  "))
    else:
        lines.extend(_text_lines(report["entries"]))
    lines.append(f"verdict: {'true' if report['verdict'] else 'false'}")
    return ("\n".join(lines) + "\n").encode()


# entry point -----------------------------------------------------------------------


def _parser():
    p = argparse.ArgumentParser(prog="pqnkit", description="Exact checks for Poisson quasi-Nijenhuis "
                                "and generalized complex structures with polynomial coefficients.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("target", nargs="?", help="what to compute (only with 'compute')")
    p.add_argument("--instance", required=True, help="path to the JSON instance document")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--output", help="write the report here instead of stdout")
    return p


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.command == "compute":
        if args.target not in COMPUTE_TARGETS:
            parser.print_usage(sys.stderr)
            print(f"pqnkit: error: compute needs one of {', '.join(COMPUTE_TARGETS)}", file=sys.stderr)
            return 2
    elif args.target is not None:
        parser.print_usage(sys.stderr)
        print(f"pqnkit: error: unexpected argument {args.target!r}", file=sys.stderr)
        return 2
    if args.trials is not None and args.trials < 1:
        print("pqnkit: error: --trials must be positive", file=sys.stderr)
        return 2
    if args.seed < 0 or args.seed >= 2**64:
        print("pqnkit: error: --seed must fit in an unsigned 64-bit integer", file=sys.stderr)
        return 2
    try:
        with open(args.instance, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"pqnkit: error: {exc}", file=sys.stderr)
        return 2
    try:
        inst = parse_instance(text)
        report = run_command(args.command, inst, seed=args.seed, trials=args.trials, target=args.target)
        data = emit_report(report, args.format)
    except (ValueError, TypeError) as exc:
        print(f"pqnkit: error: {exc}", file=sys.stderr)
        return 2
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    if report["verdict"] is None:
        return 0
    return 0 if report["verdict"] else 1


if __name__ == "__main__":
    sys.exit(main())

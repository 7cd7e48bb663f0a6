"""
Ratunif v1.0 - Render Service
Text and JSON views of unification results, and reading a JSON
unifier back into a substitution.
"""
from typing import Any, Dict, List, Optional

from .config import logger
from .contract_service import validate_against_schema
from .errors import InputError, NameResolutionError
from .pipeline_service import UnifyOutcome
from .saturation_service import format_trace
from .surface_service import RApp, RLam, RName, RawTerm, Signature, parse_term, parse_type, show_type
from .term_service import (
    Assignment,
    Binder,
    Const,
    Flex,
    MetaVar,
    Mode,
    RecApp,
    RecConst,
    Rigid,
    SimpleType,
    Substitution,
    Term,
    Var,
    arg_types,
    result_type,
    show_def,
    show_term,
    strip,
    with_binders,
)

NO_UNIFIER = "no unifier"


# ========= Text =========

def show_assignment(a: Assignment) -> str:
    prefix = "".join(f"[{y}] " for y in a.pattern)
    return f"{a.meta.name} := {prefix}{show_term(a.value)}"


def render_substitution(gamma: Substitution, free: Optional[List[MetaVar]] = None) -> List[str]:
    lines = [show_assignment(a) for a in gamma.assignments]
    if free:
        lines.append("free: " + ", ".join(m.name for m in free))
    if gamma.defs:
        lines.append("where")
        lines += [f"  {show_def(r, body)}" for r, body in gamma.defs]
    return lines


def render_text(outcome: UnifyOutcome, trace: bool = False) -> str:
    lines: List[str] = []
    if trace:
        lines += format_trace(outcome.trace)
        lines.append("")
    if not outcome.found:
        lines.append(NO_UNIFIER)
    else:
        lines += render_substitution(outcome.gamma, outcome.free)
    return "\n".join(lines) + "\n"


# ========= JSON =========

def _meta_json(m: MetaVar) -> Dict[str, Any]:
    return {"metavar": m.name, "mode": m.mode.value, "type": show_type(m.type)}


def render_json(outcome: UnifyOutcome, trace: bool = False) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "result": "unifier" if outcome.found else "no-unifier",
        "mode": outcome.mode,
        "assignments": [],
        "defs": [],
    }
    if outcome.found:
        data["assignments"] = [
            dict(_meta_json(a.meta), pattern=list(a.pattern), value=show_term(a.value))
            for a in outcome.gamma.assignments
        ]
        data["free"] = [_meta_json(m) for m in outcome.free]
        for r, body in outcome.gamma.defs:
            binders, inner = strip(body)
            data["defs"].append({
                "name": r.name,
                "type": show_type(r.type),
                "binders": [b.name for b in binders],
                "body": show_term(inner),
            })
    if trace:
        data["trace"] = format_trace(outcome.trace)
    if outcome.report is not None:
        data["check"] = {"depth": outcome.report.k, "ok": outcome.report.ok}
    ok, err = validate_against_schema(data, "unify_result")
    if not ok:
        logger.error(err)
    return data


# ========= Reading JSON Back =========

class _Reader:
    """Surface strings to flattened terms, guided by expected types."""

    def __init__(self, sig: Signature, metas: Dict[str, MetaVar], recs: Dict[str, RecConst]):
        self.sig = sig
        self.metas = metas
        self.recs = recs

    def term(self, raw: RawTerm, ty: SimpleType, env: Dict[str, SimpleType]) -> Term:
        env = dict(env)
        binders = []
        for param in arg_types(ty):
            if not isinstance(raw, RLam):
                raise InputError(f"Expected a [x] binder for a term of type {show_type(ty)}")
            binders.append(Binder(raw.name, param))
            env[raw.name] = param
            raw = raw.body
        head, args = _spine(raw)
        name = head.name
        if name in env or name in self.sig.constants:
            sym = Var(name) if name in env else Const(name, self.sig.constants[name])
            positions = arg_types(env[name] if name in env else self.sig.constants[name])
            if len(positions) != len(args):
                raise InputError(f"{name} applied to {len(args)} arguments, expects {len(positions)}")
            children = tuple(self.term(a, p, env) for a, p in zip(args, positions))
            if any(isinstance(c, Rigid) for c in children):
                raise InputError(f"Arguments of {name} must be rec-const or metavariable applications")
            return Rigid(tuple(binders), sym, children)
        names = tuple(_variable(a, env) for a in args)
        if name in self.metas:
            return Flex(tuple(binders), self.metas[name], names)
        if name in self.recs:
            return RecApp(tuple(binders), self.recs[name], names)
        raise NameResolutionError(f"Unknown identifier {name} in unifier")


def _spine(raw: RawTerm):
    args = []
    while isinstance(raw, RApp):
        args.append(raw.arg)
        raw = raw.fn
    if not isinstance(raw, RName):
        raise InputError("Unifier terms must be in normal form")
    args.reverse()
    return raw, args


def _variable(raw: RawTerm, env: Dict[str, SimpleType]) -> str:
    if not isinstance(raw, RName) or raw.name not in env:
        raise InputError("Metavariable and rec-const arguments must be bound variables")
    return raw.name


def substitution_from_json(data: Dict[str, Any], sig: Signature) -> Substitution:
    """Inverse of render_json for results with a unifier."""
    validate_against_schema(data, "unify_result", raise_on_error=True)
    if data["result"] != "unifier":
        raise InputError("Result carries no unifier")
    metas: Dict[str, MetaVar] = {}
    for entry in data["assignments"] + data.get("free", []):
        metas[entry["metavar"]] = MetaVar(entry["metavar"], Mode(entry["mode"]), parse_type(entry["type"]))
    recs = {d["name"]: RecConst(d["name"], parse_type(d["type"])) for d in data["defs"]}
    reader = _Reader(sig, metas, recs)

    assignments = []
    for entry in data["assignments"]:
        meta = metas[entry["metavar"]]
        env = dict(zip(entry["pattern"], arg_types(meta.type)))
        value = reader.term(parse_term(entry["value"]), result_type(meta.type), env)
        assignments.append(Assignment(meta, tuple(entry["pattern"]), value))
    defs = []
    for d in data["defs"]:
        rec = recs[d["name"]]
        binders = tuple(Binder(n, t) for n, t in zip(d["binders"], arg_types(rec.type)))
        env = {b.name: b.type for b in binders}
        body = reader.term(parse_term(d["body"]), result_type(rec.type), env)
        defs.append((rec, with_binders(binders, body)))
    return Substitution(tuple(assignments), tuple(defs))

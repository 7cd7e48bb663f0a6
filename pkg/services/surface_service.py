"""
Ratunif v1.0 - Surface Service
Parses Twelf-style problem files, infers simple types and normalizes
terms to β-normal η-long form.

    conat : cotype.
    cosucc : conat -> conat.
    omega : conat = cosucc omega.
    ?- omega = cosucc (cosucc H).
"""
import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple, Union

import lark
from lark import Lark, Transformer, v_args

from .config import DEFAULT_BASE_TYPE, GEN_PREFIX, logger
from .errors import InputError, NameResolutionError, ParseError, PatternError, TypeInferenceError
from .term_service import (
    Arrow,
    Base,
    Binder,
    Const,
    MetaVar,
    Mode,
    Pattern,
    RecConst,
    SimpleType,
    Var,
    arg_types,
    prime_name,
)

KIND_NAMES = ("type", "cotype")


# ========= Grammar =========

GRAMMAR = r"""
start: item*

?item: decl
     | defn
     | query
     | equation

decl: name ":" type "."
defn: name ":" type "=" term "."
query: "?-" equation
equation: term "=" term "."

?type: atype "->" type -> arrow_type
     | atype
?atype: name -> base_type
      | "*" -> star_type
      | "(" type ")"

?term: lam
     | app
     | app lam -> app_lam
lam: "[" name [":" type] "]" term
app: atom+
?atom: name
     | "(" term ")"

name: NAME | GENNAME

NAME: /[A-Za-z][A-Za-z0-9_']*/
GENNAME: /_[A-Za-z0-9_']+/
COMMENT: /%[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""


# ========= Raw Syntax =========

@dataclass(frozen=True)
class RName:
    name: str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RLam:
    name: str
    annotation: Optional[SimpleType]
    body: "RawTerm"


@dataclass(frozen=True)
class RApp:
    fn: "RawTerm"
    arg: "RawTerm"


RawTerm = Union[RName, RLam, RApp]


@dataclass(frozen=True)
class _Equation:
    left: RawTerm
    right: RawTerm
    opens_query: bool


class _ProblemTransformer(Transformer):

    def __init__(self, allow_generated: bool):
        super().__init__()
        self.allow_generated = allow_generated

    def start(self, items):
        return list(items)

    @v_args(inline=True)
    def name(self, token):
        if token.type == "GENNAME" and not self.allow_generated:
            raise ParseError(f"Identifier {token} uses the reserved prefix", token.line, token.column)
        return RName(str(token), token.line, token.column)

    @v_args(inline=True)
    def decl(self, name, ty):
        return ("decl", name, ty)

    @v_args(inline=True)
    def defn(self, name, ty, body):
        return ("defn", name, ty, body)

    @v_args(inline=True)
    def query(self, eq):
        return _Equation(eq.left, eq.right, True)

    @v_args(inline=True)
    def equation(self, left, right):
        return _Equation(left, right, False)

    @v_args(inline=True)
    def arrow_type(self, a, b):
        return Arrow(a, b)

    @v_args(inline=True)
    def base_type(self, name):
        return Base(name.name)

    def star_type(self, _children):
        return Base(DEFAULT_BASE_TYPE)

    @v_args(inline=True)
    def lam(self, name, annotation, body):
        return RLam(name.name, annotation, body)

    def app(self, atoms):
        result = atoms[0]
        for a in atoms[1:]:
            result = RApp(result, a)
        return result

    @v_args(inline=True)
    def app_lam(self, fn, lam_term):
        return RApp(fn, lam_term)


_PARSER = Lark(GRAMMAR, parser="lalr", start=["start", "term", "type"], propagate_positions=True)


def _run_parser(text: str, start: str, allow_generated: bool):
    try:
        tree = _PARSER.parse(text, start=start)
        return _ProblemTransformer(allow_generated).transform(tree)
    except lark.exceptions.VisitError as e:
        if isinstance(e.orig_exc, ParseError):
            raise e.orig_exc
        raise
    except lark.exceptions.UnexpectedInput as e:
        raise ParseError("Syntax error", getattr(e, "line", None), getattr(e, "column", None))


# ========= Signature & Contexts =========

@dataclass
class Signature:
    type_names: Dict[str, str] = field(default_factory=dict)
    constants: Dict[str, SimpleType] = field(default_factory=dict)
    recs: Dict[str, SimpleType] = field(default_factory=dict)

    def declared(self, name: str) -> bool:
        return name in self.type_names or name in self.constants or name in self.recs


@dataclass(frozen=True)
class ConcreteTerm:
    """[x̄] h T̄ with h a constant or variable, or [x̄] H ȳ / [x̄] r ȳ."""
    binders: Pattern
    head: Union[Const, Var, MetaVar, RecConst]
    args: Tuple[Union["ConcreteTerm", str], ...] = ()


@dataclass(frozen=True)
class ConcreteContext:
    """Equations and definitions; raw after parsing, typed and normal after elaborate."""
    equations: Tuple[Tuple[Any, Any], ...] = ()
    defs: Tuple[Tuple[Any, Any], ...] = ()
    metavars: Tuple[MetaVar, ...] = ()


def parse_problem(text: str, allow_generated: bool = False) -> Tuple[Signature, ConcreteContext]:
    items = _run_parser(text, "start", allow_generated)
    sig = Signature()
    equations: List[Tuple[RawTerm, RawTerm]] = []
    defs: List[Tuple[str, RawTerm]] = []
    in_query = False
    for item in items:
        if isinstance(item, _Equation):
            if not (item.opens_query or in_query):
                where = _first_name(item.left)
                raise ParseError("Equation outside a ?- query", where.line, where.column)
            in_query = True
            equations.append((item.left, item.right))
            continue
        in_query = False
        kind, name = item[0], item[1]
        if sig.declared(name.name):
            raise NameResolutionError(f"Duplicate declaration of {name.name} at line {name.line}")
        ty = item[2]
        if kind == "decl" and isinstance(ty, Base) and ty.name in KIND_NAMES:
            sig.type_names[name.name] = ty.name
        elif kind == "decl":
            sig.constants[name.name] = ty
        else:
            sig.recs[name.name] = ty
            defs.append((name.name, item[3]))
    _check_signature(sig)
    return sig, ConcreteContext(tuple(equations), tuple(defs))


def parse_term(text: str, allow_generated: bool = True) -> RawTerm:
    return _run_parser(text, "term", allow_generated)


def parse_type(text: str) -> SimpleType:
    return _run_parser(text, "type", True)


def _first_name(t: RawTerm) -> RName:
    while not isinstance(t, RName):
        t = t.fn if isinstance(t, RApp) else t.body
    return t


def _check_signature(sig: Signature) -> None:
    for name, ty in list(sig.constants.items()) + list(sig.recs.items()):
        for base in _bases(ty):
            if base.name not in sig.type_names and base.name != DEFAULT_BASE_TYPE:
                raise NameResolutionError(f"Type {base.name} of {name} is not declared")


def _bases(ty: SimpleType) -> List[Base]:
    if isinstance(ty, Arrow):
        return _bases(ty.arg) + _bases(ty.res)
    return [ty]


# ========= Type Inference =========

@dataclass(frozen=True)
class TypeVar:
    id: int


@dataclass(frozen=True)
class TSym:
    sym: Union[Const, Binder, MetaVar, RecConst]


@dataclass(frozen=True)
class TLam:
    binder: Binder
    body: "TTerm"


@dataclass(frozen=True)
class TApp:
    fn: "TTerm"
    arg: "TTerm"


TTerm = Union[TSym, TLam, TApp]


class _TypeSolver:

    def __init__(self):
        self.bindings: Dict[TypeVar, Any] = {}
        self._ids = itertools.count()

    def fresh(self) -> TypeVar:
        return TypeVar(next(self._ids))

    def resolve(self, t):
        while isinstance(t, TypeVar) and t in self.bindings:
            t = self.bindings[t]
        return t

    def zonk(self, t):
        t = self.resolve(t)
        if isinstance(t, Arrow):
            return Arrow(self.zonk(t.arg), self.zonk(t.res))
        return t

    def occurs(self, v: TypeVar, t) -> bool:
        t = self.resolve(t)
        if t == v:
            return True
        if isinstance(t, Arrow):
            return self.occurs(v, t.arg) or self.occurs(v, t.res)
        return False

    def unify(self, a, b, where: str) -> None:
        a, b = self.resolve(a), self.resolve(b)
        if a == b:
            return
        if isinstance(b, TypeVar) and not isinstance(a, TypeVar):
            a, b = b, a
        if isinstance(a, TypeVar):
            if self.occurs(a, b):
                raise TypeInferenceError(f"Type clash{where}: cyclic type")
            self.bindings[a] = b
            return
        if isinstance(a, Arrow) and isinstance(b, Arrow):
            self.unify(a.arg, b.arg, where)
            self.unify(a.res, b.res, where)
            return
        raise TypeInferenceError(f"Type clash{where}: {show_type(self.zonk(a))} vs {show_type(self.zonk(b))}")


class _Inference:

    def __init__(self, sig: Signature, metavar_modes: Optional[Dict[str, Mode]] = None):
        self.sig = sig
        self.solver = _TypeSolver()
        self.meta_types: Dict[str, TypeVar] = {}
        self.metavar_modes = metavar_modes or {}

    def infer(self, t: RawTerm, env: Dict[str, Any], in_query: bool, owner: str):
        if isinstance(t, RName):
            return self._name(t, env, in_query, owner)
        if isinstance(t, RLam):
            ty = t.annotation if t.annotation is not None else self.solver.fresh()
            inner = dict(env)
            inner[t.name] = ty
            body, body_ty = self.infer(t.body, inner, in_query, owner)
            return TLam(Binder(t.name, ty), body), Arrow(ty, body_ty)
        fn, fn_ty = self.infer(t.fn, env, in_query, owner)
        arg, arg_ty = self.infer(t.arg, env, in_query, owner)
        res = self.solver.fresh()
        head = _first_name(t)
        self.solver.unify(fn_ty, Arrow(arg_ty, res), f" at line {head.line}, column {head.column}")
        return TApp(fn, arg), res

    def _name(self, t: RName, env, in_query: bool, owner: str):
        n = t.name
        if n in env:
            return TSym(Binder(n, env[n])), env[n]
        if n in self.sig.constants:
            ty = self.sig.constants[n]
            return TSym(Const(n, ty)), ty
        if n in self.sig.recs:
            ty = self.sig.recs[n]
            return TSym(RecConst(n, ty)), ty
        if in_query and _is_metavar_name(n):
            tv = self.meta_types.setdefault(n, self.solver.fresh())
            return TSym(MetaVar(n, self.metavar_modes.get(n, Mode.REC), tv)), tv
        raise NameResolutionError(
            f"Unknown identifier {n} in {owner} at line {t.line}, column {t.column}"
        )

    def finish(self, t: TTerm, default_base: Optional[str]) -> TTerm:
        if isinstance(t, TSym):
            s = t.sym
            if isinstance(s, Binder):
                return TSym(Binder(s.name, self.ground(s.type, default_base, s.name)))
            if isinstance(s, MetaVar):
                return TSym(MetaVar(s.name, s.mode, self.ground(s.type, default_base, s.name)))
            return t
        if isinstance(t, TLam):
            b = Binder(t.binder.name, self.ground(t.binder.type, default_base, t.binder.name))
            return TLam(b, self.finish(t.body, default_base))
        return TApp(self.finish(t.fn, default_base), self.finish(t.arg, default_base))

    def ground(self, ty, default_base: Optional[str], owner: str) -> SimpleType:
        ty = self.solver.zonk(ty)
        if isinstance(ty, TypeVar):
            if default_base is None:
                raise TypeInferenceError(f"Ambiguous type for {owner}")
            logger.info(f"Type of {owner} is unconstrained, defaulting to {default_base}")
            self.solver.bindings[ty] = Base(default_base)
            return Base(default_base)
        if isinstance(ty, Arrow):
            return Arrow(self.ground(ty.arg, default_base, owner), self.ground(ty.res, default_base, owner))
        return ty


def _is_metavar_name(name: str) -> bool:
    core = name[len(GEN_PREFIX):] if name.startswith(GEN_PREFIX) else name
    return bool(core) and core[0].isupper()


def infer_types(sig: Signature, ctx: ConcreteContext,
                default_base: Optional[str] = DEFAULT_BASE_TYPE,
                metavar_modes: Optional[Dict[str, Mode]] = None) -> ConcreteContext:
    """Annotate metavariables and binders with simple types; returns typed trees."""
    inf = _Inference(sig, metavar_modes)
    eqs = []
    for left, right in ctx.equations:
        lt, lty = inf.infer(left, {}, True, "query")
        rt, rty = inf.infer(right, {}, True, "query")
        head = _first_name(left)
        inf.solver.unify(lty, rty, f" in equation at line {head.line}")
        eqs.append((lt, rt))
    defs = []
    for name, body in ctx.defs:
        bt, bty = inf.infer(body, {}, False, f"definition of {name}")
        inf.solver.unify(sig.recs[name], bty, f" in definition of {name}")
        defs.append((RecConst(name, sig.recs[name]), bt))
    # metavariable types first, so defaults are reported once per metavariable
    metas = tuple(
        MetaVar(n, inf.metavar_modes.get(n, Mode.REC), inf.ground(tv, default_base, n))
        for n, tv in inf.meta_types.items()
    )
    eqs = [(inf.finish(l, default_base), inf.finish(r, default_base)) for l, r in eqs]
    defs = [(r, inf.finish(b, default_base)) for r, b in defs]
    return ConcreteContext(tuple(eqs), tuple(defs), metas)


def type_of(t: TTerm) -> SimpleType:
    if isinstance(t, TSym):
        return t.sym.type
    if isinstance(t, TLam):
        return Arrow(t.binder.type, type_of(t.body))
    fn_ty = type_of(t.fn)
    if not isinstance(fn_ty, Arrow):
        raise TypeInferenceError("Application of a non-function")
    return fn_ty.res


# ========= Normalization =========

def _typed_free(t: TTerm) -> Set[str]:
    if isinstance(t, TSym):
        return {t.sym.name} if isinstance(t.sym, Binder) else set()
    if isinstance(t, TLam):
        return _typed_free(t.body) - {t.binder.name}
    return _typed_free(t.fn) | _typed_free(t.arg)


def _typed_names(t: TTerm) -> Set[str]:
    if isinstance(t, TSym):
        return {t.sym.name} if isinstance(t.sym, Binder) else set()
    if isinstance(t, TLam):
        return _typed_names(t.body) | {t.binder.name}
    return _typed_names(t.fn) | _typed_names(t.arg)


def subst_typed(t: TTerm, name: str, s: TTerm) -> TTerm:
    """[s/name] t, capture-avoiding."""
    if isinstance(t, TSym):
        if isinstance(t.sym, Binder) and t.sym.name == name:
            return s
        return t
    if isinstance(t, TApp):
        return TApp(subst_typed(t.fn, name, s), subst_typed(t.arg, name, s))
    b = t.binder
    if b.name == name:
        return t
    if b.name in _typed_free(s):
        fresh = prime_name(b.name, _typed_names(t) | _typed_names(s) | {name})
        body = subst_typed(t.body, b.name, TSym(Binder(fresh, b.type)))
        b = Binder(fresh, b.type)
        return TLam(b, subst_typed(body, name, s))
    return TLam(b, subst_typed(t.body, name, s))


def normalize(t: TTerm, ty: SimpleType, scope: Sequence[str] = ()) -> ConcreteTerm:
    """β-normal η-long form; metavariable and rec-const arguments stay unexpanded."""
    bound: Set[str] = set(scope)
    taken = bound | _typed_names(t)
    binders: List[Binder] = []
    body = t
    for param in arg_types(ty):
        if isinstance(body, TLam):
            name = body.binder.name
            inner = body.body
            if name in bound:
                fresh = prime_name(name, taken)
                inner = subst_typed(inner, name, TSym(Binder(fresh, param)))
                name = fresh
        else:
            name = prime_name("x", taken) if "x" in taken else "x"
            inner = TApp(body, TSym(Binder(name, param)))
        taken.add(name)
        bound.add(name)
        binders.append(Binder(name, param))
        body = inner

    head, args = _spine(body)
    while isinstance(head, TLam):
        if not args:
            raise TypeInferenceError("λ-abstraction at base type")
        reduced = subst_typed(head.body, head.binder.name, args[0])
        head, rest = _spine(reduced)
        args = rest + args[1:]

    sym = head.sym
    scope_now = tuple(scope) + tuple(b.name for b in binders)
    if isinstance(sym, (Const, Binder)):
        positions = arg_types(sym.type)
        if len(positions) != len(args):
            raise TypeInferenceError(f"{sym.name} applied to {len(args)} arguments, expects {len(positions)}")
        out_head = sym if isinstance(sym, Const) else Var(sym.name)
        new_args = tuple(normalize(a, p, scope_now) for a, p in zip(args, positions))
        return ConcreteTerm(tuple(binders), out_head, new_args)

    positions = arg_types(sym.type)
    if len(positions) != len(args):
        raise PatternError(f"{sym.name} applied to {len(args)} arguments, width is {len(positions)}")
    names = tuple(_as_variable(a, p, scope_now, sym.name) for a, p in zip(args, positions))
    if isinstance(sym, MetaVar):
        if len(set(names)) != len(names):
            raise PatternError(f"Non-pattern argument to {sym.name}: repeated variable")
    return ConcreteTerm(tuple(binders), sym, names)


def _spine(t: TTerm) -> Tuple[TTerm, List[TTerm]]:
    args: List[TTerm] = []
    while isinstance(t, TApp):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def _as_variable(arg: TTerm, ty: SimpleType, scope: Sequence[str], owner: str) -> str:
    ct = normalize(arg, ty, scope)
    if isinstance(ct.head, Var) and ct.head.name in scope and _is_eta_of(ct):
        return ct.head.name
    kind = "metavariable" if _is_metavar_name(owner) else "rec-const"
    raise PatternError(f"Non-pattern argument to {kind} {owner}: {show_concrete(ct)}")


def _is_eta_of(ct: ConcreteTerm) -> bool:
    """True if ct is [w̄] x w̄ (the η-expansion of x)."""
    names = [b.name for b in ct.binders]
    if ct.head.name in names or len(ct.args) != len(names):
        return False
    for a, w in zip(ct.args, names):
        if not (isinstance(a, ConcreteTerm) and isinstance(a.head, Var) and a.head.name == w and _is_eta_of(a)):
            return False
    return True


def to_typed(ct: ConcreteTerm, types: Dict[str, SimpleType]) -> TTerm:
    """Inverse view of a normal term as a typed tree (for re-normalization)."""
    env = dict(types)
    for b in ct.binders:
        env[b.name] = b.type
    if isinstance(ct.head, Var):
        head: TTerm = TSym(Binder(ct.head.name, env[ct.head.name]))
    else:
        head = TSym(ct.head)
    if isinstance(ct.head, (MetaVar, RecConst)):
        positions = arg_types(ct.head.type)
        args = [TSym(Binder(a, p)) for a, p in zip(ct.args, positions)]
    else:
        args = [to_typed(a, env) for a in ct.args]
    result = head
    for a in args:
        result = TApp(result, a)
    for b in reversed(ct.binders):
        result = TLam(b, result)
    return result


def is_normal(ct: ConcreteTerm, ty: SimpleType, env: Optional[Dict[str, SimpleType]] = None) -> bool:
    """Grammar check: η-long at ty, constructor/variable heads fully applied, pattern arguments."""
    env = dict(env or {})
    params = arg_types(ty)
    if len(ct.binders) != len(params):
        return False
    for b, p in zip(ct.binders, params):
        if b.type != p:
            return False
        env[b.name] = b.type
    head = ct.head
    if isinstance(head, Var):
        if head.name not in env:
            return False
        head_ty = env[head.name]
    else:
        head_ty = head.type
    positions = arg_types(head_ty)
    if len(positions) != len(ct.args):
        return False
    if isinstance(head, (MetaVar, RecConst)):
        if not all(isinstance(a, str) and a in env and env[a] == p for a, p in zip(ct.args, positions)):
            return False
        return not isinstance(head, MetaVar) or len(set(ct.args)) == len(ct.args)
    return all(isinstance(a, ConcreteTerm) and is_normal(a, p, env) for a, p in zip(ct.args, positions))


def elaborate(sig: Signature, ctx: ConcreteContext,
              default_base: Optional[str] = DEFAULT_BASE_TYPE,
              metavar_modes: Optional[Dict[str, Mode]] = None) -> ConcreteContext:
    """parse result -> typed, normalized ConcreteContext."""
    typed = infer_types(sig, ctx, default_base, metavar_modes)
    eqs = []
    for left, right in typed.equations:
        ty = type_of(left)
        eqs.append((normalize(left, ty), normalize(right, ty)))
    defs = []
    for r, body in typed.defs:
        ct = normalize(body, r.type)
        if not isinstance(ct.head, (Const, Var)):
            raise InputError(f"Definition of {r.name} is not contractive: head {ct.head.name}")
        defs.append((r, ct))
    return ConcreteContext(tuple(eqs), tuple(defs), typed.metavars)


# ========= Printing =========

def show_type(ty) -> str:
    if isinstance(ty, Arrow):
        left = f"({show_type(ty.arg)})" if isinstance(ty.arg, Arrow) else show_type(ty.arg)
        return f"{left} -> {show_type(ty.res)}"
    if isinstance(ty, TypeVar):
        return f"?{ty.id}"
    return ty.name


def show_raw(t: RawTerm) -> str:
    if isinstance(t, RName):
        return t.name
    if isinstance(t, RLam):
        ann = f":{show_type(t.annotation)}" if t.annotation is not None else ""
        return f"[{t.name}{ann}] {show_raw(t.body)}"
    fn = show_raw(t.fn) if not isinstance(t.fn, RLam) else f"({show_raw(t.fn)})"
    arg = show_raw(t.arg)
    if not isinstance(t.arg, RName):
        arg = f"({arg})"
    return f"{fn} {arg}"


def show_concrete(ct: ConcreteTerm) -> str:
    prefix = "".join(f"[{b.name}] " for b in ct.binders)
    parts = [ct.head.name]
    for a in ct.args:
        if isinstance(a, str):
            parts.append(a)
        else:
            s = show_concrete(a)
            parts.append(f"({s})" if a.binders or a.args else s)
    return prefix + " ".join(parts)


def print_problem(sig: Signature, ctx: ConcreteContext) -> str:
    """Re-emit a parsed (raw) problem in the input syntax."""
    lines = [f"{n} : {k}." for n, k in sig.type_names.items()]
    lines += [f"{n} : {show_type(t)}." for n, t in sig.constants.items()]
    for name, body in ctx.defs:
        lines.append(f"{name} : {show_type(sig.recs[name])} = {show_raw(body)}.")
    for left, right in ctx.equations:
        lines.append(f"?- {show_raw(left)} = {show_raw(right)}.")
    return "\n".join(lines) + "\n"

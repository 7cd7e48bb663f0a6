"""
Ratunif v1.0 - Flatten Service
Turns concrete contexts into shallow ones: every definition body and
every equation side becomes one constructor level deep.
"""
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .config import logger
from .errors import InternalError, PatternError
from .surface_service import ConcreteContext, ConcreteTerm
from .term_service import (
    Binder,
    Const,
    Definition,
    Equation,
    Flex,
    MetaVar,
    NameSupply,
    RecApp,
    RecConst,
    Rigid,
    SimpleType,
    Term,
    UnifContext,
    Var,
    arg_types,
    arrow,
    prime_name,
    result_type,
)


# ========= Concrete Term Helpers =========

def concrete_free_vars(ct: ConcreteTerm) -> List[str]:
    """Free variables in order of first occurrence."""
    seen: List[str] = []

    def walk(t: ConcreteTerm, bound: frozenset) -> None:
        bound = bound | {b.name for b in t.binders}
        if isinstance(t.head, Var) and t.head.name not in bound and t.head.name not in seen:
            seen.append(t.head.name)
        for a in t.args:
            if isinstance(a, str):
                if a not in bound and a not in seen:
                    seen.append(a)
            else:
                walk(a, bound)

    walk(ct, frozenset())
    return seen


def _concrete_names(ct: ConcreteTerm) -> Set[str]:
    names = {b.name for b in ct.binders}
    if isinstance(ct.head, Var):
        names.add(ct.head.name)
    for a in ct.args:
        names |= {a} if isinstance(a, str) else _concrete_names(a)
    return names


def rename_concrete(ct: ConcreteTerm, mapping: Dict[str, str]) -> ConcreteTerm:
    """Capture-avoiding variable renaming on concrete terms."""
    if not mapping:
        return ct
    local = dict(mapping)
    binders = []
    for b in ct.binders:
        local.pop(b.name, None)
        if b.name in local.values():
            fresh = prime_name(b.name, _concrete_names(ct) | set(mapping.values()) | set(mapping))
            local[b.name] = fresh
            binders.append(Binder(fresh, b.type))
        else:
            binders.append(b)
    head = ct.head
    if isinstance(head, Var):
        head = Var(local.get(head.name, head.name))
    args = tuple(
        local.get(a, a) if isinstance(a, str) else rename_concrete(a, local) for a in ct.args
    )
    return ConcreteTerm(tuple(binders), head, args)


# ========= Pattern Repair =========

class _Patternizer:
    """Rewrites r x x ... into t x with t =_d the collapsed instance of r's body."""

    def __init__(self, defs: Dict[str, Tuple[RecConst, ConcreteTerm]], supply: NameSupply):
        self.defs = dict(defs)
        self.supply = supply
        self.memo: Dict[Tuple[str, Tuple[int, ...]], RecConst] = {}
        self.new_defs: List[Tuple[RecConst, ConcreteTerm]] = []

    def term(self, ct: ConcreteTerm) -> ConcreteTerm:
        if isinstance(ct.head, RecConst):
            if len(set(ct.args)) == len(ct.args):
                return ct
            rec, args = self._collapse(ct.head, ct.args)
            return ConcreteTerm(ct.binders, rec, args)
        if isinstance(ct.head, MetaVar):
            return ct
        return replace(ct, args=tuple(a if isinstance(a, str) else self.term(a) for a in ct.args))

    def _collapse(self, rec: RecConst, args: Sequence[str]) -> Tuple[RecConst, Tuple[str, ...]]:
        first: Dict[str, int] = {}
        classes = []
        for i, a in enumerate(args):
            first.setdefault(a, i)
            classes.append(first[a])
        keep = sorted(set(classes))
        key = (rec.name, tuple(classes))
        dedup = tuple(args[i] for i in keep)
        if key in self.memo:
            return self.memo[key], dedup
        if rec.name not in self.defs:
            raise PatternError(f"Rec-const {rec.name} has no definition")
        _, body = self.defs[rec.name]
        positions = arg_types(rec.type)
        t = RecConst(self.supply.fresh("t"), arrow(*[positions[i] for i in keep], result_type(rec.type)))
        self.memo[key] = t
        z = [b.name for b in body.binders[:len(args)]]
        mapping = {z[i]: z[classes[i]] for i in range(len(args)) if classes[i] != i}
        inner = ConcreteTerm(body.binders[len(args):], body.head, body.args)
        inner = rename_concrete(inner, mapping)
        collapsed = ConcreteTerm(
            tuple(body.binders[i] for i in keep) + inner.binders, inner.head, inner.args
        )
        logger.debug(f"Collapsed {rec.name} {' '.join(args)} into {t.name}")
        self.defs[t.name] = (t, collapsed)
        self.new_defs.append((t, self.term(collapsed)))
        return t, dedup


def patternize_rec_args(ct: ConcreteTerm, defs: Dict[str, Tuple[RecConst, ConcreteTerm]],
                        supply: NameSupply) -> Tuple[ConcreteTerm, List[Tuple[RecConst, ConcreteTerm]]]:
    p = _Patternizer(defs, supply)
    return p.term(ct), p.new_defs


def patternize_context(ctx: ConcreteContext, supply: NameSupply) -> ConcreteContext:
    p = _Patternizer({r.name: (r, body) for r, body in ctx.defs}, supply)
    eqs = tuple((p.term(l), p.term(r)) for l, r in ctx.equations)
    defs = tuple((r, p.term(body)) for r, body in ctx.defs)
    return ConcreteContext(eqs, defs + tuple(p.new_defs), ctx.metavars)


# ========= Flattening =========

ABSTRACTIONS = ("free", "scope")


class _Flattener:
    """abstraction="free" closes new rec-consts over the free variables of the body,
    "scope" over every variable bound at that point."""

    def __init__(self, supply: NameSupply, abstraction: str = "free"):
        if abstraction not in ABSTRACTIONS:
            raise InternalError(f"Unknown abstraction {abstraction!r}")
        self.supply = supply
        self.abstraction = abstraction
        self.defs: List[Definition] = []

    def rec(self, ct: ConcreteTerm, env: Dict[str, SimpleType]) -> Term:
        """T ▷REC N"""
        if isinstance(ct.head, MetaVar):
            return Flex(ct.binders, ct.head, tuple(ct.args))
        if isinstance(ct.head, RecConst):
            return RecApp(ct.binders, ct.head, tuple(ct.args))
        name = self.supply.fresh("r")
        inner_env = dict(env)
        for b in ct.binders:
            inner_env[b.name] = b.type
        body = ConcreteTerm((), ct.head, ct.args)
        zs = concrete_free_vars(body) if self.abstraction == "free" else list(inner_env)
        head_ty = ct.head.type if isinstance(ct.head, Const) else inner_env[ct.head.name]
        r = RecConst(name, arrow(*[inner_env[z] for z in zs], result_type(head_ty)))
        slot = len(self.defs)
        self.defs.append((r, None))
        u = self.con(body, inner_env)
        self.defs[slot] = (r, replace(u, binders=tuple(Binder(z, inner_env[z]) for z in zs)))
        return RecApp(ct.binders, r, tuple(zs))

    def con(self, ct: ConcreteTerm, env: Dict[str, SimpleType]) -> Term:
        """T ▷CON U"""
        if not isinstance(ct.head, (Const, Var)):
            raise InternalError(f"No contractive flattening for a term headed by {ct.head.name}")
        inner_env = dict(env)
        for b in ct.binders:
            inner_env[b.name] = b.type
        args = tuple(self.rec(a, inner_env) for a in ct.args)
        return Rigid(ct.binders, ct.head, args)


def flatten_rec(ct: ConcreteTerm, supply: NameSupply,
                env: Optional[Dict[str, SimpleType]] = None,
                abstraction: str = "free") -> Tuple[Term, UnifContext]:
    f = _Flattener(supply, abstraction)
    n = f.rec(ct, env or {})
    return n, UnifContext((), tuple(f.defs))


def flatten_con(ct: ConcreteTerm, supply: NameSupply,
                env: Optional[Dict[str, SimpleType]] = None,
                abstraction: str = "free") -> Tuple[Term, UnifContext]:
    f = _Flattener(supply, abstraction)
    u = f.con(ct, env or {})
    return u, UnifContext((), tuple(f.defs))


def flatten(ctx: ConcreteContext, supply: Optional[NameSupply] = None,
            abstraction: str = "free") -> UnifContext:
    """Δc ▷ Δ. Equations are flattened before definitions so fresh names follow reading order."""
    supply = supply or NameSupply(_user_names(ctx))
    f = _Flattener(supply, abstraction)
    eqs = []
    for left, right in ctx.equations:
        eqs.append(Equation(f.rec(left, {}), f.rec(right, {})))
    for r, body in ctx.defs:
        slot = len(f.defs)
        f.defs.append((r, None))
        f.defs[slot] = (r, f.con(body, {}))
    delta = UnifContext((), ()).with_items(eqs, f.defs)
    logger.debug(f"Flattened {len(ctx.equations)} equations into {len(delta.defs)} definitions")
    return delta


def _user_names(ctx: ConcreteContext) -> Set[str]:
    names = {r.name for r, _ in ctx.defs} | {m.name for m in ctx.metavars}
    return names

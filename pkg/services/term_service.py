"""
Ratunif v1.0 - Term Service
Simple types, flattened terms, unification contexts and the substitution algebra.
"""
import itertools
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property, lru_cache
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

from .config import GEN_PREFIX
from .errors import SubstitutionError


# ========= Simple Types =========

@dataclass(frozen=True)
class Base:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Arrow:
    arg: "SimpleType"
    res: "SimpleType"

    def __str__(self) -> str:
        left = f"({self.arg})" if isinstance(self.arg, Arrow) else str(self.arg)
        return f"{left} -> {self.res}"


SimpleType = Union[Base, Arrow]


def arrow(*types: SimpleType) -> SimpleType:
    """Right-associated arrow chain: arrow(a, b, c) = a -> (b -> c)."""
    result = types[-1]
    for t in reversed(types[:-1]):
        result = Arrow(t, result)
    return result


def arg_types(ty: SimpleType) -> List[SimpleType]:
    out = []
    while isinstance(ty, Arrow):
        out.append(ty.arg)
        ty = ty.res
    return out


def result_type(ty: SimpleType) -> Base:
    while isinstance(ty, Arrow):
        ty = ty.res
    return ty


def arity(ty: SimpleType) -> int:
    return len(arg_types(ty))


# ========= Symbols =========

class Mode(str, Enum):
    CON = "CON"
    REC = "REC"


@dataclass(frozen=True)
class MetaVar:
    name: str
    mode: Mode
    type: SimpleType

    @property
    def width(self) -> int:
        return arity(self.type)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class RecConst:
    name: str
    type: SimpleType

    @property
    def width(self) -> int:
        return arity(self.type)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    name: str
    type: SimpleType


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Binder:
    name: str
    type: SimpleType


Pattern = Tuple[Binder, ...]


# ========= Flattened Terms =========
# Rigid  ::= [x̄] h N̄      (contractive, constructor or variable head)
# Flex   ::= [x̄] H ȳ      (contractive or recursive by the metavariable's mode)
# RecApp ::= [x̄] r ȳ      (recursive)

@dataclass(frozen=True)
class Rigid:
    binders: Pattern
    head: Union[Const, Var]
    args: Tuple["Term", ...] = ()


@dataclass(frozen=True)
class Flex:
    binders: Pattern
    meta: MetaVar
    args: Tuple[str, ...] = ()


@dataclass(frozen=True)
class RecApp:
    binders: Pattern
    rec: RecConst
    args: Tuple[str, ...] = ()


Term = Union[Rigid, Flex, RecApp]


def is_contractive(t: Term) -> bool:
    return isinstance(t, Rigid) or (isinstance(t, Flex) and t.meta.mode is Mode.CON)


def is_recursive(t: Term) -> bool:
    return isinstance(t, RecApp) or (isinstance(t, Flex) and t.meta.mode is Mode.REC)


def strip(t: Term) -> Tuple[Pattern, Term]:
    """Split off the λ-prefix."""
    return t.binders, replace(t, binders=())


def with_binders(binders: Sequence[Binder], t: Term) -> Term:
    if not binders:
        return t
    return replace(t, binders=tuple(binders) + t.binders)


def binder_names(binders: Iterable[Binder]) -> Tuple[str, ...]:
    return tuple(b.name for b in binders)


def free_vars(t: Term) -> List[str]:
    """Free variables in order of first occurrence."""
    seen: List[str] = []

    def walk(u: Term, bound: frozenset) -> None:
        bound = bound | set(binder_names(u.binders))
        if isinstance(u, Rigid):
            if isinstance(u.head, Var) and u.head.name not in bound and u.head.name not in seen:
                seen.append(u.head.name)
            for a in u.args:
                walk(a, bound)
        else:
            for a in u.args:
                if a not in bound and a not in seen:
                    seen.append(a)

    walk(t, frozenset())
    return seen


def all_names(t: Term) -> Set[str]:
    """Every variable name occurring in t, free or bound."""
    names = set(binder_names(t.binders))
    if isinstance(t, Rigid):
        if isinstance(t.head, Var):
            names.add(t.head.name)
        for a in t.args:
            names |= all_names(a)
    else:
        names.update(t.args)
    return names


def metavars_of(t: Term) -> List[MetaVar]:
    if isinstance(t, Flex):
        return [t.meta]
    if isinstance(t, Rigid):
        out: List[MetaVar] = []
        for a in t.args:
            for m in metavars_of(a):
                if m not in out:
                    out.append(m)
        return out
    return []


def recconsts_of(t: Term) -> List[RecConst]:
    if isinstance(t, RecApp):
        return [t.rec]
    if isinstance(t, Rigid):
        out: List[RecConst] = []
        for a in t.args:
            for r in recconsts_of(a):
                if r not in out:
                    out.append(r)
        return out
    return []


# ========= Canonical Keys =========

def _key(t: Term, env: Dict[str, int], depth: int):
    if t.binders:
        env = dict(env)
        for i, b in enumerate(t.binders):
            env[b.name] = depth + i
        depth += len(t.binders)

    def v(name: str):
        if name in env:
            return ("b", env[name])
        return ("f", name)

    n = len(t.binders)
    if isinstance(t, Rigid):
        head = ("c", t.head.name) if isinstance(t.head, Const) else v(t.head.name)
        return ("R", n, head, tuple(_key(a, env, depth) for a in t.args))
    if isinstance(t, Flex):
        return ("H", n, t.meta.name, t.meta.mode.value, tuple(v(a) for a in t.args))
    return ("r", n, t.rec.name, tuple(v(a) for a in t.args))


@lru_cache(maxsize=500_000)
def alpha_key(t: Term):
    """Key equal for α-equivalent terms (bound variables become levels)."""
    return _key(t, {}, 0)


# ========= Equations & Contexts =========

@dataclass(frozen=True, eq=False)
class Equation:
    """Unordered pair; left/right are only a printing orientation."""
    left: Term
    right: Term

    @cached_property
    def key(self):
        a, b = alpha_key(self.left), alpha_key(self.right)
        return (a, b) if repr(a) <= repr(b) else (b, a)

    def __eq__(self, other) -> bool:
        return isinstance(other, Equation) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def sides(self) -> Tuple[Tuple[Term, Term], Tuple[Term, Term]]:
        return (self.left, self.right), (self.right, self.left)

    def __str__(self) -> str:
        return f"{show_term(self.left)} == {show_term(self.right)}"


Definition = Tuple[RecConst, Term]


@dataclass(frozen=True)
class UnifContext:
    eqs: Tuple[Equation, ...] = ()
    defs: Tuple[Definition, ...] = ()
    contra: bool = False

    @cached_property
    def def_map(self) -> Dict[str, Definition]:
        return {r.name: (r, body) for r, body in self.defs}

    def lookup(self, name: str) -> Optional[Definition]:
        return self.def_map.get(name)

    def terms(self) -> Iterator[Term]:
        for eq in self.eqs:
            yield eq.left
            yield eq.right
        for _, body in self.defs:
            yield body

    def metavars(self) -> List[MetaVar]:
        """UV(Δ) in order of first occurrence."""
        out: List[MetaVar] = []
        for t in self.terms():
            for m in metavars_of(t):
                if m not in out:
                    out.append(m)
        return out

    def rec_names(self) -> Set[str]:
        names = {r.name for r, _ in self.defs}
        for t in self.terms():
            names.update(r.name for r in recconsts_of(t))
        return names

    def with_items(self, eqs: Iterable[Equation] = (), defs: Iterable[Definition] = (),
                   contra: bool = False) -> "UnifContext":
        new_eqs = list(self.eqs)
        seen = set(new_eqs)
        for eq in eqs:
            if eq not in seen:
                seen.add(eq)
                new_eqs.append(eq)
        new_defs = list(self.defs)
        known = {r.name for r, _ in new_defs}
        for r, body in defs:
            if r.name not in known:
                known.add(r.name)
                new_defs.append((r, body))
        return UnifContext(tuple(new_eqs), tuple(new_defs), self.contra or contra)


# ========= Substitutions =========

@dataclass(frozen=True)
class Assignment:
    """H x̄ ≐ M, read as H := [x̄] M."""
    meta: MetaVar
    pattern: Tuple[str, ...]
    value: Term

    def __post_init__(self):
        if len(self.pattern) != self.meta.width:
            raise SubstitutionError(
                f"Pattern of {self.meta.name} has {len(self.pattern)} variables, width is {self.meta.width}"
            )


@dataclass(frozen=True)
class Substitution:
    assignments: Tuple[Assignment, ...] = ()
    defs: Tuple[Definition, ...] = ()

    @cached_property
    def _by_name(self) -> Dict[str, Assignment]:
        return {a.meta.name: a for a in self.assignments}

    def get(self, name: str) -> Optional[Assignment]:
        return self._by_name.get(name)

    def dom(self) -> List[MetaVar]:
        return [a.meta for a in self.assignments]

    def dom_names(self) -> Set[str]:
        return set(self._by_name)

    def to_context(self) -> UnifContext:
        eqs = tuple(
            Equation(Flex((), a.meta, a.pattern), a.value) for a in self.assignments
        )
        return UnifContext(eqs, self.defs, False)

    def rec_names(self) -> Set[str]:
        names = {r.name for r, _ in self.defs}
        for a in self.assignments:
            names.update(r.name for r in recconsts_of(a.value))
        return names


# ========= Name Supply =========

class NameSupply:
    """The single source of generated names of one engine instance."""

    def __init__(self, taken: Iterable[str] = ()):
        self._counter = itertools.count(1)
        self._taken: Set[str] = set(taken)

    def reserve(self, names: Iterable[str]) -> None:
        self._taken.update(names)

    def fresh(self, stem: str) -> str:
        while True:
            name = f"{GEN_PREFIX}{stem}{next(self._counter)}"
            if name not in self._taken:
                self._taken.add(name)
                return name


def pool_var(index: int) -> str:
    """Reusable variable names for stripped binders (bounded per equation)."""
    return f"{GEN_PREFIX}z{index}"


def prime_name(name: str, taken: Set[str]) -> str:
    new = name + "'"
    while new in taken:
        new += "'"
    return new


# ========= Renaming =========

def rename(t: Term, frm: Sequence[str], to: Sequence[str]) -> Term:
    """[to/frm] t, capture-avoiding."""
    if len(frm) != len(to):
        raise SubstitutionError(f"Renaming arity mismatch: {len(frm)} vs {len(to)}")
    mapping = {a: b for a, b in zip(frm, to) if a != b}
    return rename_map(t, mapping)


def rename_map(t: Term, mapping: Dict[str, str]) -> Term:
    if not mapping:
        return t
    local = dict(mapping)
    new_binders = []
    taken: Optional[Set[str]] = None
    for b in t.binders:
        local.pop(b.name, None)
        if b.name in local.values():
            if taken is None:
                taken = all_names(t) | set(mapping.values()) | set(mapping)
            fresh = prime_name(b.name, taken)
            taken.add(fresh)
            local[b.name] = fresh
            new_binders.append(Binder(fresh, b.type))
        else:
            new_binders.append(b)
    binders = tuple(new_binders)
    if isinstance(t, Rigid):
        head = t.head
        if isinstance(head, Var):
            head = Var(local.get(head.name, head.name))
        return Rigid(binders, head, tuple(rename_map(a, local) for a in t.args))
    args = tuple(local.get(a, a) for a in t.args)
    return replace(t, binders=binders, args=args)


def rename_recconsts(t: Term, mapping: Dict[str, RecConst]) -> Term:
    if not mapping:
        return t
    if isinstance(t, RecApp):
        new = mapping.get(t.rec.name)
        return replace(t, rec=new) if new is not None else t
    if isinstance(t, Rigid):
        return replace(t, args=tuple(rename_recconsts(a, mapping) for a in t.args))
    return t


# ========= η-Expansion =========

def eta_expand(args: Sequence[Flex], head_type: SimpleType, supply: NameSupply) -> List[Flex]:
    """Complete partial metavariable applications to the η-long shape of each position."""
    positions = arg_types(head_type)
    if len(positions) != len(args):
        raise SubstitutionError(f"Head expects {len(positions)} arguments, got {len(args)}")
    out = []
    for arg, position in zip(args, positions):
        extra = arg_types(position)
        if len(arg.args) + len(extra) != arg.meta.width:
            raise SubstitutionError(f"Cannot η-expand {arg.meta.name} at type {position}")
        if not extra:
            out.append(arg)
            continue
        ws = tuple(Binder(supply.fresh("w"), ty) for ty in extra)
        out.append(Flex(arg.binders + ws, arg.meta, arg.args + binder_names(ws)))
    return out


# ========= Context Joining =========

def rename_context_apart(delta: UnifContext, taken: Set[str]) -> UnifContext:
    """Rename rec-consts of delta that collide with `taken`, consistently."""
    own = delta.rec_names()
    clash = sorted(own & taken)
    if not clash:
        return delta
    used = set(taken) | own
    mapping: Dict[str, RecConst] = {}
    types = {r.name: r for r, _ in delta.defs}
    for t in delta.terms():
        for r in recconsts_of(t):
            types.setdefault(r.name, r)
    for name in clash:
        new = prime_name(name, used)
        used.add(new)
        mapping[name] = RecConst(new, types[name].type)
    eqs = tuple(
        Equation(rename_recconsts(e.left, mapping), rename_recconsts(e.right, mapping))
        for e in delta.eqs
    )
    defs = tuple(
        (mapping.get(r.name, r), rename_recconsts(body, mapping)) for r, body in delta.defs
    )
    return UnifContext(eqs, defs, delta.contra)


def join_contexts(delta1: UnifContext, delta2: UnifContext) -> UnifContext:
    delta2 = rename_context_apart(delta2, delta1.rec_names())
    joined = delta1.with_items(delta2.eqs, delta2.defs)
    return UnifContext(joined.eqs, joined.defs, delta1.contra or delta2.contra)


# ========= Substitution Application =========

def apply_subst_term(t: Term, gamma: Substitution) -> Term:
    if isinstance(t, RecApp):
        return t
    if isinstance(t, Rigid):
        return replace(t, args=tuple(apply_subst_term(a, gamma) for a in t.args))
    a = gamma.get(t.meta.name)
    if a is None:
        return t
    if len(t.args) != len(a.pattern):
        raise SubstitutionError(
            f"{t.meta.name} applied to {len(t.args)} arguments, substitution expects {len(a.pattern)}"
        )
    return with_binders(t.binders, rename(a.value, a.pattern, t.args))


def _subst_taken(gamma: Substitution) -> Set[str]:
    return gamma.rec_names()


def apply_subst_context(delta: UnifContext, gamma: Substitution) -> UnifContext:
    """Δ[Γ]: defs(Γ) joined with Δ's equations and defs mapped through Γ."""
    delta = rename_context_apart(delta, _subst_taken(gamma))
    eqs = [
        Equation(apply_subst_term(e.left, gamma), apply_subst_term(e.right, gamma))
        for e in delta.eqs
    ]
    defs = [(r, apply_subst_term(body, gamma)) for r, body in delta.defs]
    base = UnifContext((), gamma.defs, False)
    return base.with_items(eqs, defs, delta.contra)


def apply_subst_substitution(gamma1: Substitution, gamma2: Substitution) -> Substitution:
    """Γ1[Γ2]: values and defs of Γ1 mapped through Γ2, defs joined."""
    renamed = rename_context_apart(gamma1.to_context(), _subst_taken(gamma2))
    assignments = []
    for eq, a in zip(renamed.eqs, gamma1.assignments):
        assignments.append(Assignment(a.meta, a.pattern, apply_subst_term(eq.right, gamma2)))
    defs = list(gamma2.defs)
    known = {r.name for r, _ in defs}
    for r, body in renamed.defs:
        if r.name not in known:
            defs.append((r, apply_subst_term(body, gamma2)))
    return Substitution(tuple(assignments), tuple(defs))


def compose(gamma1: Substitution, gamma2: Substitution) -> Substitution:
    """Γ1 ∘ Γ2: apply Γ1 and then Γ2."""
    first = apply_subst_substitution(gamma1, gamma2)
    dom1 = gamma1.dom_names()
    extra = tuple(a for a in gamma2.assignments if a.meta.name not in dom1)
    return Substitution(first.assignments + extra, first.defs)


def restrict(gamma: Substitution, names: Iterable[str]) -> Substitution:
    keep = set(names)
    return Substitution(tuple(a for a in gamma.assignments if a.meta.name in keep), gamma.defs)


# ========= Pattern Helpers =========

def is_pattern(args: Sequence[str]) -> bool:
    return len(set(args)) == len(args)


def pattern_subset(a: Sequence[str], b: Sequence[str]) -> bool:
    return set(a) <= set(b)


def pattern_proper_subset(a: Sequence[str], b: Sequence[str]) -> bool:
    return set(a) < set(b)


def pattern_intersect(a: Sequence[str], b: Sequence[str]) -> Tuple[str, ...]:
    """x̄ ∩ ȳ in the order of x̄."""
    other = set(b)
    return tuple(x for x in a if x in other)


# ========= Display =========

def show_term(t: Term) -> str:
    """Surface-syntax rendering: binders as [x], application by juxtaposition."""
    prefix = "".join(f"[{b.name}] " for b in t.binders)
    if isinstance(t, Rigid):
        head = t.head.name
        parts = [head] + [_show_arg(a) for a in t.args]
    elif isinstance(t, Flex):
        parts = [t.meta.name] + list(t.args)
    else:
        parts = [t.rec.name] + list(t.args)
    return prefix + " ".join(parts)


def _show_arg(t: Term) -> str:
    s = show_term(t)
    if t.binders or (isinstance(t, Rigid) and t.args) or (not isinstance(t, Rigid) and t.args):
        return f"({s})"
    return s


def show_def(r: RecConst, body: Term) -> str:
    return f"{r.name} =_d {show_term(body)}"

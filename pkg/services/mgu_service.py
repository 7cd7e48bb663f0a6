"""
Ratunif v1.0 - MGU Service
Reads the most general unifier off a saturated context: resolutions,
representative equations, replacement, definition garbage collection
and mediation against another unifier.
"""
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

from .config import logger
from .errors import InternalError, MediationError, MissingRepresentativeError
from .term_service import (
    Assignment,
    Binder,
    Equation,
    Flex,
    MetaVar,
    RecApp,
    Rigid,
    Substitution,
    Term,
    UnifContext,
    arg_types,
    metavars_of,
    pool_var,
    recconsts_of,
    rename,
    rename_context_apart,
    with_binders,
)
from .saturation_service import resolution_side, saturate

RESOLUTION_POLICIES = ("earliest", "latest")
REPLACEMENT_LIMIT = 1_000_000


# ========= Choices =========

@dataclass
class ResolutionChoice:
    """Chosen resolution per resolved metavariable, representative per unresolved one."""
    resolutions: Dict[str, Assignment] = field(default_factory=dict)
    witnesses: Dict[str, Equation] = field(default_factory=dict)
    representatives: Dict[str, Assignment] = field(default_factory=dict)
    classes: Dict[str, str] = field(default_factory=dict)

    def free(self) -> List[str]:
        """Representatives, i.e. metavariables that stay unconstrained."""
        return [name for name, rep in self.classes.items() if name == rep]


def identity_assignment(meta: MetaVar) -> Assignment:
    pattern = tuple(pool_var(i + 1) for i in range(meta.width))
    return Assignment(meta, pattern, Flex((), meta, pattern))


def _unresolved_link(eq: Equation, unresolved: Set[str]) -> Optional[Tuple[Flex, Flex]]:
    a, b = eq.left, eq.right
    if not (isinstance(a, Flex) and isinstance(b, Flex)) or a.binders or b.binders:
        return None
    if a.meta.name == b.meta.name or a.meta.mode is not b.meta.mode:
        return None
    if a.meta.name not in unresolved or b.meta.name not in unresolved:
        return None
    if set(a.args) != set(b.args):
        return None
    return a, b


def choose(delta: UnifContext, policy: str = "earliest",
           preferred: Iterable[str] = ()) -> ResolutionChoice:
    if policy not in RESOLUTION_POLICIES:
        raise InternalError(f"Unknown resolution policy {policy!r}")
    metas = delta.metavars()
    order = {m.name: i for i, m in enumerate(metas)}
    eqs = list(delta.eqs) if policy == "earliest" else list(reversed(delta.eqs))
    choice = ResolutionChoice()

    for eq in eqs:
        for m in metas:
            if m.name in choice.resolutions:
                continue
            found = resolution_side(eq, m.name)
            if found is not None:
                flex, value = found
                choice.resolutions[m.name] = Assignment(m, flex.args, value)
                choice.witnesses[m.name] = eq

    unresolved = {m.name for m in metas if m.name not in choice.resolutions}
    parent = {name: name for name in unresolved}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for eq in delta.eqs:
        link = _unresolved_link(eq, unresolved)
        if link is not None:
            ra, rb = find(link[0].meta.name), find(link[1].meta.name)
            if ra != rb:
                parent[max(ra, rb, key=order.get)] = min(ra, rb, key=order.get)

    preferred = set(preferred)
    members: Dict[str, List[str]] = {}
    for name in sorted(unresolved, key=order.get):
        members.setdefault(find(name), []).append(name)
    by_name = {m.name: m for m in metas}
    for group in members.values():
        picks = [n for n in group if n in preferred] or group
        rep = picks[0]
        for name in group:
            choice.classes[name] = rep
        choice.representatives[rep] = identity_assignment(by_name[rep])
        for name in group:
            if name == rep:
                continue
            choice.representatives[name] = _representative_equation(delta, by_name[name], rep)
    return choice


def _representative_equation(delta: UnifContext, meta: MetaVar, rep: str) -> Assignment:
    for eq in delta.eqs:
        for a, b in eq.sides():
            if (isinstance(a, Flex) and isinstance(b, Flex) and not a.binders and not b.binders
                    and a.meta.name == meta.name and b.meta.name == rep and set(a.args) == set(b.args)):
                return Assignment(meta, a.args, b)
    raise MissingRepresentativeError(f"No representative equation linking {meta.name} to {rep}")


# ========= unif =========

class _Replacer:
    """Iterated replacement of metavariables by their chosen values."""

    def __init__(self, choice: ResolutionChoice):
        self.choice = choice
        self.final: Dict[str, Assignment] = {}
        self.active: Set[str] = set()
        self.steps = 0

    def chosen(self, name: str) -> Assignment:
        a = self.choice.resolutions.get(name) or self.choice.representatives.get(name)
        if a is None:
            raise InternalError(f"Metavariable {name} has neither a resolution nor a representative")
        return a

    def value(self, name: str) -> Assignment:
        done = self.final.get(name)
        if done is not None:
            return done
        a = self.chosen(name)
        if self.choice.classes.get(name) == name:
            self.final[name] = a
            return a
        if name in self.active:
            raise InternalError(f"Replacement cycle through {name}")
        self.active.add(name)
        result = Assignment(a.meta, a.pattern, self.term(a.value))
        self.active.discard(name)
        self.final[name] = result
        return result

    def term(self, t: Term) -> Term:
        self.steps += 1
        if self.steps > REPLACEMENT_LIMIT:
            raise InternalError("Replacement did not reach a fixed point")
        if isinstance(t, RecApp):
            return t
        if isinstance(t, Rigid):
            return Rigid(t.binders, t.head, tuple(self.term(a) for a in t.args))
        if self.choice.classes.get(t.meta.name) == t.meta.name:
            return t
        a = self.value(t.meta.name)
        return with_binders(t.binders, rename(a.value, a.pattern, t.args))


def unif(delta: UnifContext, policy: str = "earliest", preferred: Iterable[str] = (),
         collect: bool = True) -> Substitution:
    """unif(Δ) for a saturated, contradiction-free context."""
    if delta.contra:
        raise InternalError("unif called on a contradictory context")
    choice = choose(delta, policy, preferred)
    replacer = _Replacer(choice)
    assignments = tuple(replacer.value(m.name) for m in delta.metavars())
    defs = tuple((r, replacer.term(body)) for r, body in delta.defs)
    gamma = Substitution(assignments, defs)
    logger.info(
        f"Unifier: {len(choice.resolutions)} resolved, {len(choice.free())} free, {len(defs)} definitions"
    )
    return gc_defs(gamma) if collect else gamma


def free_metavars(gamma: Substitution) -> List[MetaVar]:
    """Metavariables assigned to themselves."""
    out = []
    for a in gamma.assignments:
        v = a.value
        if isinstance(v, Flex) and not v.binders and v.meta.name == a.meta.name and v.args == a.pattern:
            out.append(a.meta)
    return out


# ========= Garbage Collection =========

def gc_defs(gamma: Substitution) -> Substitution:
    by_name = {r.name: (r, body) for r, body in gamma.defs}
    reachable: Set[str] = set()
    todo = [r.name for a in gamma.assignments for r in recconsts_of(a.value)]
    while todo:
        name = todo.pop()
        if name in reachable or name not in by_name:
            continue
        reachable.add(name)
        todo.extend(r.name for r in recconsts_of(by_name[name][1]))
    kept = tuple(d for d in gamma.defs if d[0].name in reachable)
    dropped = len(gamma.defs) - len(kept)
    if dropped:
        logger.debug(f"Removed {dropped} unused definitions")
    return Substitution(gamma.assignments, kept)


# ========= Mediation =========

def value_metavars(gamma: Substitution) -> List[MetaVar]:
    out: List[MetaVar] = []
    terms = [a.value for a in gamma.assignments] + [body for _, body in gamma.defs]
    for t in terms:
        for m in metavars_of(t):
            if m not in out:
                out.append(m)
    return out


def mediate(delta: UnifContext, gamma_mgu: Substitution, gamma2: Substitution) -> Substitution:
    """Γ′ with compose(Γ_mgu, Γ′) restricted to dom(Γ2) equal to Γ2."""
    reps = value_metavars(gamma_mgu)
    fixed = {m.name for m in value_metavars(gamma2)}
    other = rename_context_apart(gamma2.to_context(), gamma_mgu.rec_names())
    values2 = {eq.left.meta.name: (eq.left.args, eq.right) for eq in other.eqs}

    eqs: List[Equation] = []
    for a in gamma_mgu.assignments:
        if a.meta.name not in values2:
            continue
        pattern2, value2 = values2[a.meta.name]
        binders = tuple(Binder(y, ty) for y, ty in zip(a.pattern, arg_types(a.meta.type)))
        eqs.append(Equation(with_binders(binders, a.value), with_binders(binders, rename(value2, pattern2, a.pattern))))
    missing = gamma2.dom_names() - gamma_mgu.dom_names()
    if missing:
        raise MediationError(f"Substitution assigns metavariables outside the unifier: {', '.join(sorted(missing))}")

    problem = UnifContext((), gamma_mgu.defs).with_items(eqs, other.defs)
    saturated, _ = saturate(problem, mode="ho")
    if saturated.contra:
        raise MediationError("Substitution is not an instance of the most general unifier")
    found = unif(saturated, preferred=fixed, collect=False)
    for name in fixed:
        a = found.get(name)
        if a is not None and a.meta not in free_metavars(Substitution((a,))):
            raise MediationError(f"Mediation would instantiate {name}, which the given substitution leaves free")
    keep = {m.name for m in reps}
    assignments = tuple(a for a in found.assignments if a.meta.name in keep)
    result = gc_defs(Substitution(assignments, found.defs))
    logger.debug(f"Mediating substitution covers {len(assignments)} representatives")
    return result

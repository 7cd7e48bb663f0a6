"""
Ratunif v1.0 - Oracle Service
Independent checks for the engine: bounded unifier verification,
a classical occurs-check unifier for acyclic first-order problems,
and seeded random problem generation.
"""
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple, Union

from .config import DEFAULT_CHECK_DEPTH, logger
from .errors import InputError, MediationError
from .expansion_service import BotTerm, Expander, first_divergence, truncate
from .flatten_service import flatten, flatten_rec
from .mgu_service import mediate, unif
from .saturation_service import saturate
from .surface_service import ConcreteContext, ConcreteTerm, Signature, elaborate, parse_problem
from .term_service import (
    Assignment,
    Const,
    Equation,
    MetaVar,
    NameSupply,
    Substitution,
    UnifContext,
    apply_subst_context,
)


# ========= Unifier Verification =========

@dataclass(frozen=True)
class EquationCheck:
    equation: Equation
    holds: bool
    depth: Optional[int] = None
    left: Optional[BotTerm] = None
    right: Optional[BotTerm] = None

    def describe(self) -> str:
        if self.holds:
            return f"holds: {self.equation}"
        return f"fails at depth {self.depth}: {self.left}  vs  {self.right}"


@dataclass
class VerifyReport:
    k: int
    checks: List[EquationCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.holds for c in self.checks)

    def failures(self) -> List[EquationCheck]:
        return [c for c in self.checks if not c.holds]

    def first_failure_depth(self) -> Optional[int]:
        depths = [c.depth for c in self.failures()]
        return min(depths) if depths else None


def verify_unifier(delta: UnifContext, gamma: Substitution, k: int = DEFAULT_CHECK_DEPTH) -> VerifyReport:
    """Check every equation of Δ[Γ] up to expansion depth k."""
    applied = apply_subst_context(delta, gamma)
    expander = Expander(applied.def_map)
    report = VerifyReport(k)
    for eq in applied.eqs:
        left = expander.expand(eq.left, k)
        right = expander.expand(eq.right, k)
        d = first_divergence(left, right)
        if d is None:
            report.checks.append(EquationCheck(eq, True))
        else:
            report.checks.append(EquationCheck(eq, False, d, truncate(left, d), truncate(right, d)))
    if not report.ok:
        logger.debug(f"Unifier check failed at depth {report.first_failure_depth()}")
    return report


# ========= Occurs-Check Baseline =========

@dataclass(frozen=True)
class RobinsonMGU:
    bindings: Dict[str, ConcreteTerm]


@dataclass(frozen=True)
class OccursFail:
    metavar: str


@dataclass(frozen=True)
class Clash:
    left: str
    right: str


RobinsonResult = Union[RobinsonMGU, OccursFail, Clash]


def _check_acyclic_fo(ctx: ConcreteContext) -> None:
    if ctx.defs:
        raise InputError("Occurs-check unification needs a problem without recursive definitions")

    def walk(ct: ConcreteTerm) -> None:
        if ct.binders or not isinstance(ct.head, (Const, MetaVar)):
            raise InputError("Occurs-check unification needs a first-order problem")
        if isinstance(ct.head, MetaVar) and ct.args:
            raise InputError("Occurs-check unification needs argument-free metavariables")
        for a in ct.args:
            if isinstance(a, str):
                raise InputError("Occurs-check unification needs a first-order problem")
            walk(a)

    for left, right in ctx.equations:
        walk(left)
        walk(right)


def robinson_acyclic(ctx: ConcreteContext) -> RobinsonResult:
    """Syntactic unification with occurs check over finite terms.

    A failed occurs check is remembered and the binding kept as a cycle,
    so a clash anywhere in the problem is still reported as Clash.
    """
    _check_acyclic_fo(ctx)
    subst: Dict[str, ConcreteTerm] = {}
    occurs_fail: Optional[OccursFail] = None

    def walk(t: ConcreteTerm) -> ConcreteTerm:
        seen = set()
        while isinstance(t.head, MetaVar) and t.head.name in subst and t.head.name not in seen:
            seen.add(t.head.name)
            t = subst[t.head.name]
        return t

    def occurs(name: str, t: ConcreteTerm, seen: Set[str]) -> bool:
        t = walk(t)
        if isinstance(t.head, MetaVar):
            return t.head.name == name
        for a in t.args:
            key = a.head.name if isinstance(a.head, MetaVar) else None
            if key in seen:
                continue
            if key is not None:
                seen.add(key)
            if occurs(name, a, seen):
                return True
        return False

    stack: List[Tuple[ConcreteTerm, ConcreteTerm]] = list(reversed(ctx.equations))
    visited: Set[Tuple[ConcreteTerm, ConcreteTerm]] = set()
    while stack:
        a, b = stack.pop()
        if (a, b) in visited:
            continue
        visited.add((a, b))
        a, b = walk(a), walk(b)
        if isinstance(a.head, MetaVar) and isinstance(b.head, MetaVar) and a.head.name == b.head.name:
            continue
        if not isinstance(a.head, MetaVar) and isinstance(b.head, MetaVar):
            a, b = b, a
        if isinstance(a.head, MetaVar):
            if occurs_fail is None and occurs(a.head.name, b, set()):
                occurs_fail = OccursFail(a.head.name)
            subst[a.head.name] = b
            continue
        if a.head.name != b.head.name or len(a.args) != len(b.args):
            return Clash(a.head.name, b.head.name)
        stack.extend(reversed(list(zip(a.args, b.args))))

    if occurs_fail is not None:
        return occurs_fail

    def resolve(t: ConcreteTerm) -> ConcreteTerm:
        t = walk(t)
        if isinstance(t.head, MetaVar):
            return t
        return ConcreteTerm((), t.head, tuple(resolve(a) for a in t.args))

    return RobinsonMGU({name: resolve(t) for name, t in subst.items()})


def robinson_substitution(result: RobinsonMGU, metavars: Tuple[MetaVar, ...],
                          supply: Optional[NameSupply] = None) -> Substitution:
    """The baseline unifier as a flattened substitution."""
    supply = supply or NameSupply()
    assignments = []
    defs = []
    for m in metavars:
        value = result.bindings.get(m.name)
        if value is None:
            continue
        term, aux = flatten_rec(value, supply)
        assignments.append(Assignment(m, (), term))
        defs.extend(aux.defs)
    return Substitution(tuple(assignments), tuple(defs))


# ========= Problem Generation =========

@dataclass(frozen=True)
class GenConfig:
    mode: str = "fo"
    max_constructors: int = 3
    max_depth: int = 3
    max_metavars: int = 3
    max_equations: int = 2
    cyclic: bool = False
    max_defs: int = 2


class _Generator:
    BASE = "t"

    def __init__(self, cfg: GenConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        n = rng.randint(1, max(1, cfg.max_constructors))
        # at least one nullary constructor so every depth bound is reachable
        self.arities = [0] + [rng.randint(0, 2) for _ in range(n - 1)]
        self.binding = cfg.mode == "ho" and rng.random() < 0.7
        self.widths = {}
        for i in range(rng.randint(1, max(1, cfg.max_metavars))):
            width = rng.randint(0, 2) if cfg.mode == "ho" else 0
            self.widths[f"H{i}"] = width
        self.recs: List[str] = []
        if cfg.cyclic:
            self.recs = [f"r{i}" for i in range(rng.randint(1, max(1, cfg.max_defs)))]
        self.bound = 0

    def declarations(self) -> List[str]:
        lines = [f"{self.BASE} : type."]
        for i, n in enumerate(self.arities):
            lines.append(f"c{i} : {' -> '.join([self.BASE] * (n + 1))}.")
        if self.binding:
            lines.append(f"lam : ({self.BASE} -> {self.BASE}) -> {self.BASE}.")
        return lines

    def fresh_var(self) -> str:
        self.bound += 1
        return f"x{self.bound}"

    def constructor(self, env: List[str], depth: int, in_query: bool) -> str:
        choices = list(range(len(self.arities)))
        if depth <= 0:
            choices = [i for i in choices if self.arities[i] == 0]
        options = [("c", i) for i in choices]
        if self.binding and depth > 0:
            options.append(("lam", None))
        kind, i = self.rng.choice(options)
        if kind == "lam":
            x = self.fresh_var()
            return f"lam ([{x}:{self.BASE}] {self.term(env + [x], depth - 1, in_query)})"
        args = [self.term(env, depth - 1, in_query) for _ in range(self.arities[i])]
        return " ".join([f"c{i}"] + [f"({a})" for a in args])

    def term(self, env: List[str], depth: int, in_query: bool) -> str:
        options = ["con", "con"]
        if env:
            options.append("var")
        metas = [h for h, w in self.widths.items() if w <= len(env)]
        if in_query and metas:
            options += ["meta", "meta"]
        if self.recs:
            options.append("rec")
        pick = self.rng.choice(options)
        if pick == "var":
            return self.rng.choice(env)
        if pick == "meta":
            h = self.rng.choice(metas)
            args = self.rng.sample(env, self.widths[h])
            return " ".join([h] + args)
        if pick == "rec":
            return self.rng.choice(self.recs)
        return self.constructor(env, depth, in_query)

    def definitions(self) -> List[str]:
        return [f"{r} : {self.BASE} = {self.constructor([], self.cfg.max_depth, False)}." for r in self.recs]

    def equations(self) -> List[str]:
        lines = []
        for _ in range(self.rng.randint(1, max(1, self.cfg.max_equations))):
            prefix = ""
            env: List[str] = []
            if self.cfg.mode == "ho":
                for _ in range(self.rng.randint(0, 2)):
                    x = self.fresh_var()
                    env.append(x)
                    prefix += f"[{x}:{self.BASE}] "
            left = self.term(env, self.cfg.max_depth, True)
            right = self.term(env, self.cfg.max_depth, True)
            lines.append(f"?- {prefix}{left} = {prefix}{right}.")
        return lines


def gen_problem_text(cfg: GenConfig, seed: int) -> str:
    """Deterministic problem source for a seed."""
    gen = _Generator(cfg, random.Random(seed))
    lines = gen.declarations() + gen.definitions() + gen.equations()
    return "\n".join(lines) + "\n"


def gen_problem(cfg: GenConfig, seed: int) -> Tuple[Signature, ConcreteContext]:
    sig, raw = parse_problem(gen_problem_text(cfg, seed))
    return sig, elaborate(sig, raw)


# ========= Differential Check =========

def compare_with_baseline(seed: int, cfg: GenConfig) -> str:
    """Empty string if the engine and occurs-check unification agree on this seed."""
    _, ctx = gen_problem(cfg, seed)
    delta = flatten(ctx)
    saturated, _ = saturate(delta, "fo")
    baseline = robinson_acyclic(ctx)
    if isinstance(baseline, Clash):
        return "" if saturated.contra else f"seed {seed}: baseline clash, engine found a unifier"
    if saturated.contra:
        return f"seed {seed}: engine contra, baseline {type(baseline).__name__}"
    gamma = unif(saturated)
    if not verify_unifier(delta, gamma).ok:
        return f"seed {seed}: engine unifier fails the depth check"
    if isinstance(baseline, RobinsonMGU):
        other = robinson_substitution(baseline, ctx.metavars, NameSupply(delta.rec_names()))
        try:
            mediate(delta, gamma, other)
        except MediationError as e:
            return f"seed {seed}: baseline unifier is not an instance ({e})"
    return ""

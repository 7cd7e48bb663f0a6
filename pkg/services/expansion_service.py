"""
Ratunif v1.0 - Expansion Service
Depth-k definitional expansion, rational term equality and substitution equality.
"""
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple, Union

from .config import logger
from .errors import InternalError
from .surface_service import ConcreteContext, ConcreteTerm
from .term_service import (
    Const,
    Equation,
    Flex,
    MetaVar,
    RecApp,
    RecConst,
    Rigid,
    Substitution,
    Term,
    UnifContext,
    binder_names,
    rename,
    rename_context_apart,
    strip,
)

EQUALITY_STEP_LIMIT = 1_000_000


# ========= Observation Trees =========

@dataclass(frozen=True)
class BotTerm:
    """λ-prefix + head + children, or ⊥. Binders are named by absolute depth (#0, #1, ...)."""
    kind: str  # "bot" | "const" | "var" | "meta"
    head: str = ""
    binders: Tuple[str, ...] = ()
    args: Tuple[Union["BotTerm", str], ...] = ()
    _hash: int = field(default=0, init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.kind, self.head, self.binders, self.args)))

    def __hash__(self) -> int:
        return self._hash

    @property
    def is_bot(self) -> bool:
        return self.kind == "bot"

    def children(self) -> List["BotTerm"]:
        return [a for a in self.args if isinstance(a, BotTerm)]

    def __str__(self) -> str:
        if self.is_bot:
            return "⊥"
        prefix = "".join(f"[{b}] " for b in self.binders)
        parts = [self.head]
        for a in self.args:
            s = str(a)
            parts.append(f"({s})" if isinstance(a, BotTerm) and (a.args or a.binders) else s)
        return prefix + " ".join(parts)


BOT = BotTerm("bot")


def _view(t) -> Tuple[tuple, str, object, tuple]:
    """(binders, kind, head, args) for flattened and concrete terms alike."""
    if isinstance(t, ConcreteTerm):
        h = t.head
        if isinstance(h, MetaVar):
            return t.binders, "meta", h, t.args
        if isinstance(h, RecConst):
            return t.binders, "rec", h, t.args
        return t.binders, "rigid", h, t.args
    if isinstance(t, Rigid):
        return t.binders, "rigid", t.head, t.args
    if isinstance(t, Flex):
        return t.binders, "meta", t.meta, t.args
    return t.binders, "rec", t.rec, t.args


class Expander:
    """exp_k over one set of definitions, with shared (hash-consed) results."""

    def __init__(self, defs: Dict[str, tuple]):
        self.defs = defs
        self._intern: Dict[tuple, BotTerm] = {}
        self._memo: Dict[tuple, BotTerm] = {}

    def node(self, kind: str, head: str, binders: Tuple[str, ...], args: tuple) -> BotTerm:
        key = (kind, head, binders, tuple(id(a) if isinstance(a, BotTerm) else a for a in args))
        found = self._intern.get(key)
        if found is None:
            found = BotTerm(kind, head, binders, tuple(args))
            self._intern[key] = found
        return found

    def expand(self, t, k: int) -> BotTerm:
        return self._exp(t, k, {}, 0, ())

    def _exp(self, t, k: int, env: Dict[str, str], depth: int, outer: Tuple[str, ...]) -> BotTerm:
        if k <= 0:
            return BOT
        binders, kind, head, args = _view(t)
        relevant = tuple(sorted((n, v) for n, v in env.items()))
        memo_key = (t, k, depth, outer, relevant)
        cached = self._memo.get(memo_key)
        if cached is not None:
            return cached
        env = dict(env)
        names = list(outer)
        for b in binders:
            env[b.name] = f"#{depth}"
            names.append(env[b.name])
            depth += 1
        if kind == "rigid":
            name = head.name if isinstance(head, Const) else env.get(head.name, head.name)
            children = tuple(self._exp(a, k - 1, env, depth, ()) for a in args)
            result = self.node("const" if isinstance(head, Const) else "var", name, tuple(names), children)
        elif kind == "meta":
            result = self.node("meta", head.name, tuple(names), tuple(env.get(a, a) for a in args))
        else:
            entry = self.defs.get(head.name)
            if entry is None:
                raise InternalError(f"Undefined rec-const {head.name}")
            _, body = entry
            width = len(args)
            inner_env = {b.name: env.get(a, a) for b, a in zip(body.binders[:width], args)}
            inner = _drop_binders(body, width)
            result = self._exp(inner, k, inner_env, depth, tuple(names))
        self._memo[memo_key] = result
        return result


def _drop_binders(body, width: int):
    if isinstance(body, ConcreteTerm):
        return ConcreteTerm(body.binders[width:], body.head, body.args)
    return replace(body, binders=body.binders[width:])


def expand(delta: UnifContext, t: Term, k: int) -> BotTerm:
    return Expander(delta.def_map).expand(t, k)


def expand_concrete(ctx: ConcreteContext, ct: ConcreteTerm, k: int) -> BotTerm:
    return Expander({r.name: (r, body) for r, body in ctx.defs}).expand(ct, k)


def truncate(bt: BotTerm, k: int) -> BotTerm:
    """Replace everything at depth ≥ k by ⊥."""
    if k <= 0 or bt.is_bot:
        return BOT
    if bt.kind == "meta":
        return bt
    return BotTerm(bt.kind, bt.head, bt.binders, tuple(truncate(a, k - 1) for a in bt.args))


def first_divergence(a: BotTerm, b: BotTerm) -> Optional[int]:
    """Smallest k at which the two depth-limited expansions differ, or None if equal."""
    queue = deque([(a, b, 0)])
    seen = set()
    while queue:
        x, y, depth = queue.popleft()
        if x is y or (id(x), id(y)) in seen:
            continue
        seen.add((id(x), id(y)))
        if x.kind != y.kind or x.head != y.head or x.binders != y.binders or len(x.args) != len(y.args):
            return depth + 1
        if x.kind == "meta":
            if x.args != y.args:
                return depth + 1
            continue
        for cx, cy in zip(x.args, y.args):
            queue.append((cx, cy, depth + 1))
    return None


# ========= Rational Equality =========

def _pair_key(a: Term, b: Term):
    """Key of a pair of terms modulo a joint renaming of all variables."""
    names: Dict[str, int] = {}

    def var(n: str, env: Dict[str, int]):
        if n in env:
            return ("b", env[n])
        if n not in names:
            names[n] = len(names)
        return ("f", names[n])

    def walk(t: Term, env: Dict[str, int], depth: int):
        env = dict(env)
        for b in t.binders:
            env[b.name] = depth
            depth += 1
        n = len(t.binders)
        if isinstance(t, Rigid):
            head = ("c", t.head.name) if isinstance(t.head, Const) else var(t.head.name, env)
            return ("R", n, head, tuple(walk(x, env, depth) for x in t.args))
        if isinstance(t, Flex):
            return ("H", n, t.meta.name, tuple(var(x, env) for x in t.args))
        return ("r", n, t.rec.name, tuple(var(x, env) for x in t.args))

    return walk(a, {}, 0), walk(b, {}, 0)


def _unfold(defs: Dict[str, tuple], t: RecApp) -> Term:
    entry = defs.get(t.rec.name)
    if entry is None:
        raise InternalError(f"Undefined rec-const {t.rec.name}")
    _, body = entry
    width = len(t.args)
    zs = binder_names(body.binders[:width])
    inner = _drop_binders(body, width)
    return rename(inner, zs, t.args)


def equal_rational(delta: UnifContext, m1: Term, m2: Term,
                   defs: Optional[Dict[str, tuple]] = None) -> bool:
    """Coinductive comparison: equal iff every depth-k expansion agrees."""
    defs = defs if defs is not None else delta.def_map
    assumed = set()
    stack = [(m1, m2)]
    counter = 0
    steps = 0
    while stack:
        steps += 1
        if steps > EQUALITY_STEP_LIMIT:
            raise InternalError("Rational equality did not terminate within its step limit")
        a, b = stack.pop()
        if len(a.binders) != len(b.binders):
            return False
        if a.binders:
            fresh = tuple(f"#{counter + i}" for i in range(len(a.binders)))
            counter += len(fresh)
            _, a_body = strip(a)
            _, b_body = strip(b)
            a = rename(a_body, binder_names(a.binders), fresh)
            b = rename(b_body, binder_names(b.binders), fresh)
        if isinstance(a, RecApp) or isinstance(b, RecApp):
            key = _pair_key(a, b)
            if key in assumed:
                continue
            assumed.add(key)
            if isinstance(a, RecApp):
                a = _unfold(defs, a)
            if isinstance(b, RecApp):
                b = _unfold(defs, b)
            stack.append((a, b))
            continue
        if isinstance(a, Rigid) and isinstance(b, Rigid):
            if type(a.head) is not type(b.head) or a.head.name != b.head.name or len(a.args) != len(b.args):
                return False
            stack.extend(zip(a.args, b.args))
            continue
        if isinstance(a, Flex) and isinstance(b, Flex):
            if a.meta.name != b.meta.name or a.args != b.args:
                return False
            continue
        return False
    logger.debug(f"Rational equality settled after {steps} steps, {len(assumed)} assumptions")
    return True


def equation_holds(delta: UnifContext, eq: Equation) -> bool:
    return equal_rational(delta, eq.left, eq.right)


def subst_equal(gamma1: Substitution, gamma2: Substitution) -> bool:
    """Same domain and, metavariable by metavariable, rationally equal values."""
    if gamma1.dom_names() != gamma2.dom_names():
        return False
    other = rename_context_apart(gamma2.to_context(), gamma1.rec_names())
    defs = dict(UnifContext((), gamma1.defs).def_map)
    defs.update(other.def_map)
    values2 = {eq.left.meta.name: (eq.left.args, eq.right) for eq in other.eqs}
    for a in gamma1.assignments:
        pattern2, value2 = values2[a.meta.name]
        b = gamma2.get(a.meta.name)
        if b.meta.mode != a.meta.mode or b.meta.type != a.meta.type:
            return False
        if not equal_rational(UnifContext(), a.value, rename(value2, pattern2, a.pattern), defs):
            return False
    return True

"""
Ratunif v1.0 - Saturation Service
Closes a flattened unification context under the first-order or
higher-order unification rules, with ∃-parameter subsumption,
status predicates and the termination measure.
"""
from collections import Counter, deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

from .config import DEFAULT_MAX_STEPS, logger
from .errors import InputError, SaturationBudgetExceeded
from .term_service import (
    Binder,
    Const,
    Definition,
    Equation,
    Flex,
    MetaVar,
    Mode,
    NameSupply,
    RecApp,
    RecConst,
    Rigid,
    Term,
    UnifContext,
    Var,
    alpha_key,
    arg_types,
    arrow,
    binder_names,
    eta_expand,
    free_vars,
    is_contractive,
    pattern_intersect,
    pattern_proper_subset,
    pattern_subset,
    pool_var,
    rename,
    result_type,
    show_def,
    strip,
)


# ========= Rules =========

class RuleId(str, Enum):
    SIMP_F = "SIMP-F"
    R_EXP = "R-EXP"
    U_INST = "U-INST"
    N_INST = "N-INST"
    SIMP_F1 = "SIMP-F1"
    SIMP_F2 = "SIMP-F2"
    SIMP_F3 = "SIMP-F3"
    SIMP = "SIMP"
    PROJ_F = "PROJ-F"
    IMIT = "IMIT"
    PROJ = "PROJ"
    PRUNE = "PRUNE"
    FF_D = "FF-D"
    FF_S = "FF-S"
    REC_EXP = "REC-EXP"
    U_AGREE = "U-AGREE"
    N_AGREE = "N-AGREE"
    U_SYM = "U-SYM"
    N_SYM = "N-SYM"
    U_TRANS = "U-TRANS"
    N_TRANS = "N-TRANS"


FO_RULES = frozenset({
    RuleId.SIMP_F, RuleId.SIMP, RuleId.R_EXP,
    RuleId.U_SYM, RuleId.U_TRANS, RuleId.N_SYM, RuleId.N_TRANS,
})
HO_RULES = frozenset(set(RuleId) - {RuleId.SIMP_F, RuleId.R_EXP})
SYMBOL_CREATING = frozenset({RuleId.IMIT, RuleId.PROJ, RuleId.PRUNE, RuleId.FF_D, RuleId.FF_S})


# ========= Measure =========

@dataclass(frozen=True)
class Measure:
    """⟨A, B, C⟩, each a multiset of widths kept as a descending tuple."""
    unpruned_recs: Tuple[int, ...] = ()
    unresolved_con: Tuple[int, ...] = ()
    unresolved_rec: Tuple[int, ...] = ()

    def as_tuple(self):
        return (self.unpruned_recs, self.unresolved_con, self.unresolved_rec)


def multiset_less(xs: Sequence[int], ys: Sequence[int]) -> bool:
    """Multiset ordering on naturals."""
    cx, cy = Counter(xs), Counter(ys)
    only_x = cx - cy
    only_y = cy - cx
    if not only_x and not only_y:
        return False
    if not only_y:
        return False
    return max(only_y) > max(only_x, default=-1)


def measure_less(m1: Measure, m2: Measure) -> bool:
    """Lexicographic combination of the three multiset orders."""
    for a, b in zip(m1.as_tuple(), m2.as_tuple()):
        if multiset_less(a, b):
            return True
        if a != b:
            return False
    return False


# ========= Status Predicates =========

@dataclass(frozen=True)
class MetaStatus:
    resolved: bool
    witness: Optional[Equation] = None


UNRESOLVED = MetaStatus(False)


class RecStatus(str, Enum):
    PRUNED = "pruned"
    UNPRUNED = "unpruned"


def resolution_side(eq: Equation, meta_name: str) -> Optional[Tuple[Flex, Term]]:
    """(H ȳ, M) if eq is a resolution equation for H, else None."""
    for a, b in eq.sides():
        if not isinstance(a, Flex) or a.meta.name != meta_name or a.binders or b.binders:
            continue
        ys = a.args
        if a.meta.mode is Mode.CON:
            if isinstance(b, Rigid) and pattern_subset(free_vars(b), ys):
                return a, b
            if isinstance(b, Flex) and b.meta.mode is Mode.CON and pattern_proper_subset(b.args, ys):
                return a, b
        else:
            if isinstance(b, RecApp) and pattern_subset(b.args, ys):
                return a, b
            if isinstance(b, Flex) and b.meta.mode is Mode.REC and pattern_proper_subset(b.args, ys):
                return a, b
    return None


def pruning_witness(eq: Equation) -> Optional[str]:
    """Name of the rec-const r if eq is r x̄ ≐ s ȳ with ȳ ⊊ x̄."""
    a, b = eq.left, eq.right
    if not (isinstance(a, RecApp) and isinstance(b, RecApp)) or a.binders or b.binders:
        return None
    if pattern_proper_subset(b.args, a.args):
        return a.rec.name
    if pattern_proper_subset(a.args, b.args):
        return b.rec.name
    return None


def status_metavar(delta: UnifContext, meta: MetaVar) -> MetaStatus:
    for eq in delta.eqs:
        if resolution_side(eq, meta.name) is not None:
            return MetaStatus(True, eq)
    return UNRESOLVED


def status_recconst(delta: UnifContext, rec: RecConst) -> RecStatus:
    for eq in delta.eqs:
        if pruning_witness(eq) == rec.name:
            return RecStatus.PRUNED
    return RecStatus.UNPRUNED


def measure(delta: UnifContext) -> Measure:
    pruned = {pruning_witness(eq) for eq in delta.eqs} - {None}
    resolved = set()
    metas = delta.metavars()
    for m in metas:
        if any(resolution_side(eq, m.name) for eq in delta.eqs):
            resolved.add(m.name)
    return _measure_of([r for r, _ in delta.defs], pruned, metas, resolved)


def _measure_of(recs: Iterable[RecConst], pruned: Set[str], metas: Iterable[MetaVar],
                resolved: Set[str]) -> Measure:
    a = sorted((r.width for r in recs if r.name not in pruned), reverse=True)
    b = sorted((m.width for m in metas if m.mode is Mode.CON and m.name not in resolved), reverse=True)
    c = sorted((m.width for m in metas if m.mode is Mode.REC and m.name not in resolved), reverse=True)
    return Measure(tuple(a), tuple(b), tuple(c))


# ========= Schemas =========

@dataclass(frozen=True)
class Schema:
    """Conclusion template under (∃ holes)."""
    items: Tuple[Union[Equation, Definition], ...]
    var_holes: FrozenSet[str] = frozenset()
    meta_holes: FrozenSet[str] = frozenset()
    rec_holes: FrozenSet[str] = frozenset()


def coarse_key(t: Term):
    """Shape of a term with every name except constructors erased."""
    n = len(t.binders)
    if isinstance(t, Rigid):
        head = ("c", t.head.name) if isinstance(t.head, Const) else ("v",)
        return ("R", n, head, tuple(coarse_key(a) for a in t.args))
    if isinstance(t, Flex):
        return ("H", n, t.meta.mode.value, len(t.args))
    return ("r", n, len(t.args))


def coarse_pair(eq: Equation):
    a, b = coarse_key(eq.left), coarse_key(eq.right)
    return (a, b) if repr(a) <= repr(b) else (b, a)


class _Match:
    """Immutable-by-copy hole assignment."""

    def __init__(self, vars_=None, metas=None, recs=None):
        self.vars: Dict[str, str] = vars_ or {}
        self.metas: Dict[str, MetaVar] = metas or {}
        self.recs: Dict[str, RecConst] = recs or {}

    def copy(self) -> "_Match":
        return _Match(dict(self.vars), dict(self.metas), dict(self.recs))


def _schema_fixed(schema: Schema) -> Set[str]:
    fixed: Set[str] = set()
    for item in schema.items:
        terms = [item.left, item.right] if isinstance(item, Equation) else [item[1]]
        for t in terms:
            fixed.update(v for v in free_vars(t) if v not in schema.var_holes)
    return fixed


def _match_term(p: Term, t: Term, m: _Match, schema: Schema, fixed: Set[str],
                penv: Dict[str, int], tenv: Dict[str, int], depth: int) -> Optional[_Match]:
    if len(p.binders) != len(t.binders) or type(p) is not type(t):
        return None
    if p.binders:
        penv, tenv = dict(penv), dict(tenv)
        for i, (bp, bt) in enumerate(zip(p.binders, t.binders)):
            penv[bp.name] = depth + i
            tenv[bt.name] = depth + i
        depth += len(p.binders)

    def var(pn: str, tn: str) -> bool:
        if pn in penv or tn in tenv:
            return penv.get(pn, -1) == tenv.get(tn, -2)
        if pn in schema.var_holes:
            cur = m.vars.get(pn)
            if cur is not None:
                return cur == tn
            if tn in fixed or tn in m.vars.values():
                return False
            m.vars[pn] = tn
            return True
        return pn == tn

    m = m.copy()
    if isinstance(p, Rigid):
        if type(p.head) is not type(t.head) or len(p.args) != len(t.args):
            return None
        if isinstance(p.head, Const):
            if p.head.name != t.head.name:
                return None
        elif not var(p.head.name, t.head.name):
            return None
        for pa, ta in zip(p.args, t.args):
            m = _match_term(pa, ta, m, schema, fixed, penv, tenv, depth)
            if m is None:
                return None
        return m
    if len(p.args) != len(t.args):
        return None
    if isinstance(p, Flex):
        if p.meta.name in schema.meta_holes:
            cur = m.metas.get(p.meta.name)
            if cur is None:
                if t.meta.mode is not p.meta.mode or t.meta.type != p.meta.type:
                    return None
                m.metas[p.meta.name] = t.meta
            elif cur.name != t.meta.name:
                return None
        elif p.meta.name != t.meta.name:
            return None
    else:
        if p.rec.name in schema.rec_holes:
            cur = m.recs.get(p.rec.name)
            if cur is None:
                if t.rec.type != p.rec.type:
                    return None
                m.recs[p.rec.name] = t.rec
            elif cur.name != t.rec.name:
                return None
        elif p.rec.name != t.rec.name:
            return None
    for pa, ta in zip(p.args, t.args):
        if not var(pa, ta):
            return None
    return m


def _match_items(schema: Schema, fixed: Set[str], index: int, m: _Match,
                 candidates: Callable[[Equation], Iterable[Equation]],
                 defs: Sequence[Definition]) -> bool:
    if index == len(schema.items):
        return True
    item = schema.items[index]
    if isinstance(item, Equation):
        for cand in candidates(item):
            for a, b in cand.sides():
                m1 = _match_term(item.left, a, m, schema, fixed, {}, {}, 0)
                if m1 is None:
                    continue
                m2 = _match_term(item.right, b, m1, schema, fixed, {}, {}, 0)
                if m2 is not None and _match_items(schema, fixed, index + 1, m2, candidates, defs):
                    return True
        return False
    rec, body = item
    for r, b in defs:
        m1 = m.copy()
        if rec.name in schema.rec_holes:
            cur = m1.recs.get(rec.name)
            if cur is not None and cur.name != r.name:
                continue
            if cur is None:
                if r.type != rec.type:
                    continue
                m1.recs[rec.name] = r
        elif rec.name != r.name:
            continue
        m2 = _match_term(body, b, m1, schema, fixed, {}, {}, 0)
        if m2 is not None and _match_items(schema, fixed, index + 1, m2, candidates, defs):
            return True
    return False


def match_schema(delta: UnifContext, schema: Schema) -> bool:
    """True iff some instantiation of the schema's holes occurs in delta."""
    buckets: Dict[tuple, List[Equation]] = {}
    for eq in delta.eqs:
        buckets.setdefault(coarse_pair(eq), []).append(eq)
    return _match_items(schema, _schema_fixed(schema), 0, _Match(),
                        lambda e: buckets.get(coarse_pair(e), ()), delta.defs)


# ========= Trace =========

CONTRA = "contra"


@dataclass(frozen=True)
class TraceStep:
    step: int
    rule: RuleId
    premises: Tuple[int, ...]
    produced: Tuple[Tuple[int, object], ...]
    measure_before: Optional[Measure] = None
    measure_after: Optional[Measure] = None
    note: str = ""


@dataclass
class SatTrace:
    initial: Tuple[Tuple[int, object], ...] = ()
    steps: List[TraceStep] = field(default_factory=list)

    def rules(self) -> List[RuleId]:
        return [s.rule for s in self.steps]

    def count(self, rule: RuleId) -> int:
        return sum(1 for s in self.steps if s.rule is rule)


def show_item(item) -> str:
    if item == CONTRA:
        return "contra"
    if isinstance(item, Equation):
        return str(item)
    return show_def(*item)


def format_trace(trace: SatTrace) -> List[str]:
    """Numbered listing: one line per produced item."""
    lines = [f"({i}) {show_item(item)}" for i, item in trace.initial]
    for s in trace.steps:
        on = ", ".join(f"({p})" for p in s.premises)
        for i, item in s.produced:
            lines.append(f"({i}) {show_item(item)}    by {s.rule.value} on {on}")
    return lines


def replay_trace(initial: UnifContext, trace: SatTrace) -> UnifContext:
    """Re-apply the recorded products to the initial context."""
    delta = initial
    for s in trace.steps:
        eqs = [item for _, item in s.produced if isinstance(item, Equation)]
        defs = [item for _, item in s.produced if isinstance(item, tuple)]
        contra = any(item == CONTRA for _, item in s.produced)
        delta = delta.with_items(eqs, defs, contra)
    return delta


# ========= Engine =========

class SaturationEngine:
    """Worklist saturation; SYM is structural and TRANS joins over an adjacency index."""

    def __init__(self, delta: UnifContext, mode: str = "ho", supply: Optional[NameSupply] = None,
                 max_steps: int = DEFAULT_MAX_STEPS, early_stop: bool = True,
                 schedule: str = "fifo", check_measure: bool = False):
        self.mode = mode
        self.rules = FO_RULES if mode == "fo" else HO_RULES
        self.max_steps = max_steps
        self.early_stop = early_stop
        self.schedule = schedule
        self.check_measure = check_measure
        self.supply = supply or NameSupply(_context_names(delta))

        self.eqs: Dict[Equation, int] = {}
        self.defs: Dict[str, Tuple[int, Definition]] = {}
        self.queue: deque = deque()
        self.adj: Dict[tuple, List[Tuple[Term, int]]] = {}
        self.agree: Dict[str, List[Tuple[Tuple[str, ...], Term, int]]] = {}
        self.buckets: Dict[tuple, List[Equation]] = {}
        self.resolved: Set[str] = set()
        self.pruned: Set[str] = set()
        self.metas: Dict[str, MetaVar] = {}
        self.contra = delta.contra
        self.trace = SatTrace()
        self._next_id = 1
        self.fired = 0

        if mode == "fo":
            _check_first_order(delta)
        initial = []
        for eq in delta.eqs:
            if eq not in self.eqs:
                initial.append((self._store_eq(eq), eq))
        for d in delta.defs:
            initial.append((self._store_def(d), d))
        self.trace.initial = tuple(initial)

    # ----- storage -----

    def _new_id(self) -> int:
        i = self._next_id
        self._next_id += 1
        return i

    def _store_def(self, d: Definition) -> int:
        i = self._new_id()
        self.defs[d[0].name] = (i, d)
        self._note_metas(d[1])
        return i

    def _store_eq(self, eq: Equation) -> int:
        i = self._new_id()
        self.eqs[eq] = i
        self.buckets.setdefault(coarse_pair(eq), []).append(eq)
        self._note_metas(eq.left)
        self._note_metas(eq.right)
        for a in (eq.left, eq.right):
            if isinstance(a, Flex) and resolution_side(eq, a.meta.name) is not None:
                self.resolved.add(a.meta.name)
        pruned = pruning_witness(eq)
        if pruned is not None:
            self.pruned.add(pruned)
        self.queue.append((i, eq))
        return i

    def _note_metas(self, t: Term) -> None:
        if isinstance(t, Flex):
            self.metas.setdefault(t.meta.name, t.meta)
        elif isinstance(t, Rigid):
            for a in t.args:
                self._note_metas(a)

    def current_measure(self) -> Measure:
        return _measure_of([d[0] for _, d in self.defs.values()], self.pruned,
                           self.metas.values(), self.resolved)

    def context(self) -> UnifContext:
        eqs = tuple(sorted(self.eqs, key=self.eqs.get))
        defs = tuple(d for _, d in sorted(self.defs.values(), key=lambda e: e[0]))
        return UnifContext(eqs, defs, self.contra)

    # ----- firing -----

    def _fire(self, rule: RuleId, premises: Sequence[int], eqs: Sequence[Equation] = (),
              defs: Sequence[Definition] = (), contra: bool = False, note: str = "") -> bool:
        before = self.current_measure() if self.check_measure and rule in SYMBOL_CREATING else None
        produced = []
        for eq in eqs:
            if eq not in self.eqs:
                produced.append((self._store_eq(eq), eq))
        for d in defs:
            produced.append((self._store_def(d), d))
        if contra and not self.contra:
            self.contra = True
            produced.append((self._new_id(), CONTRA))
        if not produced:
            return False
        self.fired += 1
        if self.fired > self.max_steps:
            raise SaturationBudgetExceeded(f"Saturation exceeded {self.max_steps} steps")
        after = self.current_measure() if before is not None else None
        if after is not None and not measure_less(after, before):
            logger.warning(f"Measure did not decrease at {rule.value}: {before} -> {after} {note}".rstrip())
        step = TraceStep(len(self.trace.steps) + 1, rule, tuple(premises), tuple(produced), before, after, note)
        self.trace.steps.append(step)
        for i, item in produced:
            logger.debug(f"({i}) {show_item(item)} by {rule.value}")
        return True

    # ----- main loop -----

    def run(self) -> Tuple[UnifContext, SatTrace]:
        while self.queue and not (self.contra and self.early_stop):
            i, eq = self.queue.popleft() if self.schedule == "fifo" else self.queue.pop()
            self._process(i, eq)
        if self.contra and self.early_stop:
            self.queue.clear()
        logger.info(
            f"Saturation finished: {len(self.eqs)} equations, {len(self.defs)} definitions, "
            f"{self.fired} firings, contra={self.contra}"
        )
        return self.context(), self.trace

    def _process(self, i: int, eq: Equation) -> None:
        a, b = eq.left, eq.right
        if a.binders or b.binders:
            if len(a.binders) == len(b.binders) and self.mode != "fo":
                self._inst(i, eq)
            return
        self._unary(i, a, b)
        if self.contra and self.early_stop:
            return
        if self.mode != "fo":
            self._agree(i, eq)
        self._trans(i, a, b)

    # ----- INST -----

    def _inst(self, i: int, eq: Equation) -> None:
        a, b = eq.left, eq.right
        taken = set(free_vars(a)) | set(free_vars(b))
        zs: List[str] = []
        n = 1
        while len(zs) < len(a.binders):
            name = pool_var(n)
            n += 1
            if name not in taken:
                zs.append(name)
        _, a_body = strip(a)
        _, b_body = strip(b)
        concl = Equation(rename(a_body, binder_names(a.binders), zs), rename(b_body, binder_names(b.binders), zs))
        if self._subsumed(Schema((concl,), var_holes=frozenset(zs))):
            return
        rule = RuleId.U_INST if is_contractive(a) else RuleId.N_INST
        self._fire(rule, (i,), [concl])

    def _subsumed(self, schema: Schema) -> bool:
        return _match_items(schema, _schema_fixed(schema), 0, _Match(),
                            lambda e: self.buckets.get(coarse_pair(e), ()),
                            [d for _, d in self.defs.values()])

    # ----- single-premise rules -----

    def _unary(self, i: int, a: Term, b: Term) -> None:
        if isinstance(a, Rigid) and isinstance(b, Rigid):
            self._simp(i, a, b)
            return
        if isinstance(a, RecApp) and isinstance(b, RecApp):
            self._rec_exp(i, a, b)
            return
        if isinstance(a, Flex) and isinstance(b, Flex):
            self._flex_flex(i, a, b)
            return
        if isinstance(b, Flex):
            a, b = b, a
        if not isinstance(a, Flex) or self.mode == "fo":
            return
        if isinstance(b, Rigid) and a.meta.mode is Mode.CON:
            self._flex_rigid(i, a, b)
        elif isinstance(b, RecApp) and a.meta.mode is Mode.REC:
            self._prune(i, a, b)

    def _simp(self, i: int, a: Rigid, b: Rigid) -> None:
        if self.mode == "fo":
            if a.head.name != b.head.name:
                self._fire(RuleId.SIMP_F, (i,), contra=True)
                return
        else:
            ha, hb = a.head, b.head
            if isinstance(ha, Const) and isinstance(hb, Var):
                ha, hb = hb, ha
            if isinstance(ha, Var) and isinstance(hb, Const):
                self._fire(RuleId.SIMP_F1, (i,), contra=True)
                return
            if isinstance(ha, Var) and isinstance(hb, Var) and ha.name != hb.name:
                self._fire(RuleId.SIMP_F2, (i,), contra=True)
                return
            if isinstance(ha, Const) and isinstance(hb, Const) and ha.name != hb.name:
                self._fire(RuleId.SIMP_F3, (i,), contra=True)
                return
        self._fire(RuleId.SIMP, (i,), [Equation(x, y) for x, y in zip(a.args, b.args)])

    def _unfold(self, t: RecApp) -> Tuple[Term, int]:
        def_id, (_, body) = self.defs[t.rec.name]
        width = len(t.args)
        inner = strip(body)[1] if len(body.binders) == width else _drop(body, width)
        return rename(inner, binder_names(body.binders[:width]), t.args), def_id

    def _rec_exp(self, i: int, a: RecApp, b: RecApp) -> None:
        ua, da = self._unfold(a)
        ub, db = self._unfold(b)
        rule = RuleId.R_EXP if self.mode == "fo" else RuleId.REC_EXP
        self._fire(rule, (i, da, db) if da != db else (i, da), [Equation(ua, ub)])

    def _flex_rigid(self, i: int, h: Flex, b: Rigid) -> None:
        ys = h.args
        head = b.head
        if isinstance(head, Var) and head.name not in ys:
            self._fire(RuleId.PROJ_F, (i,), contra=True)
            return
        if h.meta.name in self.resolved:
            return
        ytypes = arg_types(h.meta.type)
        if isinstance(head, Const):
            head_type = head.type
            rule = RuleId.IMIT
        else:
            head_type = ytypes[ys.index(head.name)]
            rule = RuleId.PROJ
        partial = []
        for position in arg_types(head_type):
            g = MetaVar(self.supply.fresh("G"), Mode.REC, arrow(*ytypes, position))
            partial.append(Flex((), g, ys))
        args = eta_expand(partial, head_type, self.supply)
        concl = Equation(Flex((), h.meta, ys), Rigid((), head, tuple(args)))
        holes = frozenset(p.meta.name for p in partial)
        if self._subsumed(Schema((concl,), meta_holes=holes)):
            return
        self._fire(rule, (i,), [concl])

    def _prune(self, i: int, h: Flex, r: RecApp) -> None:
        ys, xs = h.args, r.args
        if pattern_subset(xs, ys) or h.meta.name in self.resolved:
            return
        ws = pattern_intersect(xs, ys)
        positions = arg_types(r.rec.type)
        wtypes = [positions[xs.index(w)] for w in ws]
        ty = arrow(*wtypes, result_type(r.rec.type))
        t = RecConst(self.supply.fresh("t"), ty)
        g = MetaVar(self.supply.fresh("G"), Mode.CON, ty)
        binders = tuple(Binder(w, wt) for w, wt in zip(ws, wtypes))
        definition = (t, Flex(binders, g, ws))
        eqs = [Equation(Flex((), h.meta, ys), RecApp((), t, ws)), Equation(RecApp((), r.rec, xs), RecApp((), t, ws))]
        schema = Schema(tuple(eqs) + (definition,), meta_holes=frozenset({g.name}), rec_holes=frozenset({t.name}))
        if self._subsumed(schema):
            return
        note = f"{r.rec.name} already pruned" if r.rec.name in self.pruned else ""
        self._fire(RuleId.PRUNE, (i,), eqs, [definition], note=note)

    def _flex_flex(self, i: int, g: Flex, h: Flex) -> None:
        if self.mode == "fo" or g.meta.mode is not h.meta.mode:
            return
        xs, ys = g.args, h.args
        if g.meta.name != h.meta.name:
            if pattern_subset(xs, ys) or pattern_subset(ys, xs):
                return
            if g.meta.name in self.resolved and h.meta.name in self.resolved:
                return
            zs = pattern_intersect(xs, ys)
            rule = RuleId.FF_D
        else:
            if xs == ys:
                return
            zs = tuple(x for x, y in zip(xs, ys) if x == y)
            rule = RuleId.FF_S
        positions = arg_types(g.meta.type)
        ztypes = [positions[xs.index(z)] for z in zs]
        f = MetaVar(self.supply.fresh("F"), g.meta.mode, arrow(*ztypes, result_type(g.meta.type)))
        fz = Flex((), f, zs)
        eqs = [Equation(Flex((), g.meta, xs), fz), Equation(Flex((), h.meta, ys), fz)]
        if self._subsumed(Schema(tuple(eqs), meta_holes=frozenset({f.name}))):
            return
        note = f"{g.meta.name} already resolved" if rule is RuleId.FF_S and g.meta.name in self.resolved else ""
        self._fire(rule, (i,), eqs, note=note)

    # ----- two-premise rules -----

    def _trans(self, i: int, a: Term, b: Term) -> None:
        rule = RuleId.U_TRANS if is_contractive(a) else RuleId.N_TRANS
        ka, kb = alpha_key(a), alpha_key(b)
        for c, j in list(self.adj.get(ka, ())):
            self._fire(rule, (i, j), [Equation(b, c)])
        for c, j in list(self.adj.get(kb, ())):
            self._fire(rule, (i, j), [Equation(a, c)])
        self.adj.setdefault(ka, []).append((b, i))
        if kb != ka:
            self.adj.setdefault(kb, []).append((a, i))

    def _agree(self, i: int, eq: Equation) -> None:
        entries = []
        for a, b in eq.sides():
            if isinstance(a, Flex) and pattern_subset(free_vars(b), a.args):
                entries.append((a, b))
        for h, u in entries:
            rule = RuleId.U_AGREE if h.meta.mode is Mode.CON else RuleId.N_AGREE
            for ys, u2, j in list(self.agree.get(h.meta.name, ())):
                self._fire(rule, (i, j), [Equation(u, rename(u2, ys, h.args))])
                self._fire(rule, (j, i), [Equation(u2, rename(u, h.args, ys))])
        for h, u in entries:
            self.agree.setdefault(h.meta.name, []).append((h.args, u, i))


def _drop(body: Term, width: int) -> Term:
    return replace(body, binders=body.binders[width:])


def _context_names(delta: UnifContext) -> Set[str]:
    names = {m.name for m in delta.metavars()} | delta.rec_names()
    for t in delta.terms():
        names.update(free_vars(t))
    return names


def _check_first_order(delta: UnifContext) -> None:
    for t in delta.terms():
        if not is_first_order_term(t):
            raise InputError("Problem is higher-order; first-order mode needs binder-free, argument-free symbols")


def is_first_order_term(t: Term) -> bool:
    if t.binders:
        return False
    if isinstance(t, Rigid):
        return isinstance(t.head, Const) and all(is_first_order_term(a) for a in t.args)
    return not t.args


def is_first_order(delta: UnifContext) -> bool:
    return all(is_first_order_term(t) for t in delta.terms())


def saturate(delta: UnifContext, mode: str = "ho", supply: Optional[NameSupply] = None,
             max_steps: int = DEFAULT_MAX_STEPS, early_stop: bool = True,
             schedule: str = "fifo", check_measure: bool = False) -> Tuple[UnifContext, SatTrace]:
    engine = SaturationEngine(delta, mode, supply, max_steps, early_stop, schedule, check_measure)
    return engine.run()

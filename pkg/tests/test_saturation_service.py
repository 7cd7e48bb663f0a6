"""
Tests for services/saturation_service.py: status predicates, the
termination measure, subsumption schemas and the saturation engine.
"""
import pytest

from conftest import fixture_text
from services.errors import InputError, SaturationBudgetExceeded
from services.pipeline_service import RunConfig, load_problem
from services.saturation_service import (
    CONTRA,
    Measure,
    RecStatus,
    RuleId,
    Schema,
    format_trace,
    is_first_order,
    match_schema,
    measure,
    measure_less,
    multiset_less,
    replay_trace,
    saturate,
    status_metavar,
    status_recconst,
)
from services.term_service import (
    Base,
    Binder,
    Const,
    Equation,
    Flex,
    MetaVar,
    Mode,
    RecApp,
    RecConst,
    Rigid,
    UnifContext,
    arrow,
)

# ── Helpers ──────────────────────────────────────────────────────────

EL = Base("element")
SP = Base("sp")
PUT = Const("put", arrow(EL, SP, SP))
K = Const("k", EL)
ODD = RecConst("odd", SP)
R4 = RecConst("r4", arrow(EL, EL))

CLASH = "nat : type.\nzero : nat.\nsucc : nat -> nat.\n?- succ H = zero.\n"


def put_r4(var):
    return Rigid((), PUT, (RecApp((), R4, (var,)), RecApp((), ODD)))


def saturated(name, **kwargs):
    problem = load_problem(fixture_text(name))
    return problem.delta, saturate(problem.delta, **kwargs)


class TestStatusMetavar:
    """Resolution equations by mode."""

    def test_contractive_resolved_by_rigid(self):
        h = MetaVar("H", Mode.CON, arrow(EL, SP))
        eq = Equation(Flex((), h, ("y",)), put_r4("y"))
        status = status_metavar(UnifContext((eq,)), h)
        assert status.resolved
        assert status.witness == eq

    def test_rigid_with_foreign_variable(self):
        h = MetaVar("H", Mode.CON, arrow(EL, SP))
        eq = Equation(Flex((), h, ("y",)), put_r4("w"))
        assert not status_metavar(UnifContext((eq,)), h).resolved

    def test_recursive_resolved_by_rec_const(self):
        s = MetaVar("S", Mode.REC, arrow(EL, SP))
        eq = Equation(Flex((), s, ("y",)), RecApp((), RecConst("t", SP)))
        assert status_metavar(UnifContext((eq,)), s).resolved

    def test_recursive_flex_flex_needs_proper_subset(self):
        s = MetaVar("S", Mode.REC, arrow(EL, SP))
        g = MetaVar("G", Mode.REC, arrow(EL, SP))
        g0 = MetaVar("G0", Mode.REC, SP)
        same = Equation(Flex((), s, ("y",)), Flex((), g, ("y",)))
        smaller = Equation(Flex((), s, ("y",)), Flex((), g0))
        assert not status_metavar(UnifContext((same,)), s).resolved
        assert status_metavar(UnifContext((smaller,)), s).resolved

    def test_modes_do_not_mix(self):
        h = MetaVar("H", Mode.CON, arrow(EL, SP))
        eq = Equation(Flex((), h, ("y",)), RecApp((), RecConst("t", SP)))
        assert not status_metavar(UnifContext((eq,)), h).resolved


class TestStatusRecconst:
    """Pruning witnesses."""

    def test_pruned_by_smaller_pattern(self):
        r = RecConst("r", arrow(EL, SP))
        s = RecConst("s", SP)
        delta = UnifContext((Equation(RecApp((), r, ("z",)), RecApp((), s)),))
        assert status_recconst(delta, r) is RecStatus.PRUNED
        assert status_recconst(delta, s) is RecStatus.UNPRUNED


class TestMeasure:
    """⟨unpruned rec-consts, unresolved CON, unresolved REC⟩ by width."""

    def test_multiset_order(self):
        assert multiset_less([1], [2])
        assert multiset_less([1, 1, 1], [2])
        assert not multiset_less([2, 0], [2])
        assert not multiset_less([2], [2])
        assert multiset_less([], [0])

    def test_lexicographic(self):
        assert measure_less(Measure((1,), (5, 5), ()), Measure((2,), (), ()))
        assert not measure_less(Measure((2,), (), ()), Measure((1,), (5,), ()))
        assert measure_less(Measure((1,), (), (0,)), Measure((1,), (), (1,)))

    def test_measure_of_context(self):
        r = RecConst("r", arrow(EL, EL))
        s = RecConst("s", EL)
        g0 = MetaVar("G0", Mode.REC, EL)
        g1 = MetaVar("G1", Mode.REC, EL)
        delta = UnifContext(
            (Equation(RecApp((), r, ("z",)), RecApp((), s)), Equation(Flex((), g0), Flex((), g1))),
            ((r, Rigid((Binder("z", EL),), K)), (s, Rigid((), K))),
        )
        assert measure(delta) == Measure((0,), (), (0, 0))


class TestMatchSchema:
    """Subsumption up to the schema's holes."""

    H = MetaVar("H", Mode.REC, arrow(EL, SP))
    R = RecConst("r", arrow(EL, SP))

    def delta(self):
        return UnifContext((Equation(Flex((), self.H, ("_z1",)), RecApp((), self.R, ("_z1",))),))

    def test_variable_holes(self):
        schema = Schema((Equation(Flex((), self.H, ("w",)), RecApp((), self.R, ("w",))),),
                        var_holes=frozenset({"w"}))
        assert match_schema(self.delta(), schema)

    def test_variable_holes_are_injective(self):
        schema = Schema((Equation(Flex((), self.H, ("w",)), RecApp((), self.R, ("v",))),),
                        var_holes=frozenset({"w", "v"}))
        assert not match_schema(self.delta(), schema)

    def test_either_orientation(self):
        schema = Schema((Equation(RecApp((), self.R, ("w",)), Flex((), self.H, ("w",))),),
                        var_holes=frozenset({"w"}))
        assert match_schema(self.delta(), schema)

    def test_metavariable_holes(self):
        f = MetaVar("F", Mode.REC, arrow(EL, SP))
        schema = Schema((Equation(Flex((), f, ("w",)), RecApp((), self.R, ("w",))),),
                        var_holes=frozenset({"w"}), meta_holes=frozenset({"F"}))
        assert match_schema(self.delta(), schema)

    def test_metavariable_hole_respects_mode(self):
        f = MetaVar("F", Mode.CON, arrow(EL, SP))
        schema = Schema((Equation(Flex((), f, ("w",)), RecApp((), self.R, ("w",))),),
                        var_holes=frozenset({"w"}), meta_holes=frozenset({"F"}))
        assert not match_schema(self.delta(), schema)

    def test_fixed_variables(self):
        schema = Schema((Equation(Flex((), self.H, ("a",)), RecApp((), self.R, ("a",))),))
        assert not match_schema(self.delta(), schema)


class TestSaturateFirstOrder:
    """Rules SIMP-F, R-EXP, SIMP and TRANS."""

    def test_conat(self):
        delta, (sat, trace) = saturated("conat", mode="fo")
        assert not sat.contra
        assert RuleId.R_EXP in trace.rules()
        assert RuleId.SIMP in trace.rules()
        assert RuleId.N_TRANS in trace.rules()

    def test_clash(self):
        problem = load_problem(CLASH)
        assert is_first_order(problem.delta)
        sat, trace = saturate(problem.delta, "fo")
        assert sat.contra
        assert trace.rules()[-1] is RuleId.SIMP_F
        assert trace.steps[-1].produced[-1][1] == CONTRA

    def test_higher_order_problem_rejected(self):
        problem = load_problem(fixture_text("stream"))
        assert not is_first_order(problem.delta)
        with pytest.raises(InputError):
            saturate(problem.delta, "fo")

    @pytest.mark.parametrize("name", ["conat", "occurs"])
    def test_replay_reproduces_context(self, name):
        delta, (sat, trace) = saturated(name, mode="fo")
        replayed = replay_trace(delta, trace)
        assert set(replayed.eqs) == set(sat.eqs)
        assert [r.name for r, _ in replayed.defs] == [r.name for r, _ in sat.defs]
        assert replayed.contra == sat.contra


class TestSaturateHigherOrder:
    """Pattern rules: INST, IMIT, PROJ, PRUNE, FF-D, FF-S, AGREE."""

    def test_stream_trace_listing(self):
        _, (sat, trace) = saturated("stream")
        lines = format_trace(trace)
        assert lines[0] == "(1) _r1 == odd"
        assert "(8) get ([x] _r2 x) == get ([x] even)    by REC-EXP on (1), (2), (4)" in lines
        assert not sat.contra

    def test_no_solution_ends_with_projection_failure(self):
        _, (sat, trace) = saturated("no_solution")
        assert sat.contra
        assert trace.rules()[-1] is RuleId.PROJ_F
        assert RuleId.PRUNE in trace.rules()
        assert RuleId.IMIT in trace.rules()

    def test_var_dependency_single_flex_flex_step(self):
        _, (sat, trace) = saturated("var_dependency")
        assert not sat.contra
        assert trace.count(RuleId.FF_D) == 1

    def test_double_consumer_rules(self):
        problem = load_problem(fixture_text("double_consumer"), RunConfig(abstraction="scope"))
        sat, trace = saturate(problem.delta)
        rules = trace.rules()
        assert not sat.contra
        for rule in (RuleId.FF_S, RuleId.N_AGREE, RuleId.PRUNE):
            assert rule in rules
        notes = [s.note for s in trace.steps if s.rule is RuleId.FF_S]
        assert "S already resolved" in notes

    @pytest.mark.parametrize("name", ["stream", "no_solution", "producer", "consumer",
                                      "double_consumer", "var_dependency", "intro_cyclic", "intro_pattern"])
    def test_replay_reproduces_context(self, name):
        delta, (sat, trace) = saturated(name)
        replayed = replay_trace(delta, trace)
        assert set(replayed.eqs) == set(sat.eqs)
        assert replayed.contra == sat.contra

    @pytest.mark.parametrize("name", ["stream", "no_solution", "producer", "consumer",
                                      "double_consumer", "var_dependency", "intro_cyclic", "intro_pattern"])
    def test_measure_decreases(self, name):
        _, (_, trace) = saturated(name, check_measure=True)
        for step in trace.steps:
            if step.measure_before is not None and not step.note:
                assert measure_less(step.measure_after, step.measure_before), step.rule

    def test_lifo_schedule_agrees_on_contra(self):
        _, (fifo, _) = saturated("no_solution")
        _, (lifo, _) = saturated("no_solution", schedule="lifo")
        assert fifo.contra and lifo.contra

    def test_budget(self):
        problem = load_problem(fixture_text("stream"))
        with pytest.raises(SaturationBudgetExceeded):
            saturate(problem.delta, max_steps=2)

    def test_keep_going_after_contra(self):
        _, (stopped, t1) = saturated("no_solution")
        _, (full, t2) = saturated("no_solution", early_stop=False)
        assert stopped.contra and full.contra
        assert len(t2.steps) >= len(t1.steps)

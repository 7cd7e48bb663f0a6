"""
Tests for services/term_service.py: types, renaming, η-expansion,
equations, context joining and substitution operations.
"""
import pytest

from services.errors import SubstitutionError
from services.term_service import (
    Arrow,
    Assignment,
    Base,
    Binder,
    Const,
    Equation,
    Flex,
    MetaVar,
    Mode,
    NameSupply,
    RecApp,
    RecConst,
    Rigid,
    Substitution,
    UnifContext,
    Var,
    apply_subst_context,
    apply_subst_term,
    arg_types,
    arity,
    arrow,
    compose,
    eta_expand,
    free_vars,
    join_contexts,
    pool_var,
    rename,
    restrict,
    result_type,
    show_term,
)

# ── Helpers ──────────────────────────────────────────────────────────

EL = Base("element")
SP = Base("sp")
GET = Const("get", arrow(arrow(EL, SP), SP))
PUT = Const("put", arrow(EL, SP, SP))


def meta(name, *types, mode=Mode.REC):
    return MetaVar(name, mode, arrow(*types))


def rec(name, *types):
    return RecConst(name, arrow(*types))


class TestTypes:
    """Simple types: arrows associate to the right."""

    def test_arrow_is_right_associative(self):
        assert arrow(EL, EL, SP) == Arrow(EL, Arrow(EL, SP))

    def test_arg_and_result_types(self):
        ty = arrow(arrow(EL, SP), EL, SP)
        assert arg_types(ty) == [arrow(EL, SP), EL]
        assert result_type(ty) == SP
        assert arity(ty) == 2

    def test_base_type_has_no_arguments(self):
        assert arity(SP) == 0
        assert meta("H", SP).width == 0


class TestRename:
    """Capture-avoiding renaming of free variables."""

    def test_renames_free_occurrences(self):
        s = meta("S", EL, EL, SP)
        t = Rigid((), GET, (Flex((Binder("y", EL),), s, ("x", "y")),))
        out = rename(t, ["x"], ["z"])
        assert show_term(out) == "get ([y] S z y)"

    def test_binder_is_primed_on_capture(self):
        h = meta("H", EL, EL, SP)
        t = Flex((Binder("y", EL),), h, ("x", "y"))
        out = rename(t, ["x"], ["y"])
        assert out.binders == (Binder("y'", EL),)
        assert out.args == ("y", "y'")

    def test_arity_mismatch_raises(self):
        h = meta("H", EL, SP)
        with pytest.raises(SubstitutionError):
            rename(Flex((), h, ("x",)), ["x", "y"], ["z"])

    def test_free_vars_in_first_occurrence_order(self):
        s = meta("S", EL, EL, SP)
        t = Rigid((), PUT, (Rigid((), Var("b")), Flex((Binder("y", EL),), s, ("a", "y"))))
        assert free_vars(t) == ["b", "a"]


class TestEtaExpand:
    """Partial metavariable applications get η-long."""

    def test_expands_missing_arguments(self):
        g = meta("G", EL, SP)
        out = eta_expand([Flex((), g, ())], GET.type, NameSupply())
        assert out == [Flex((Binder("_w1", EL),), g, ("_w1",))]

    def test_complete_application_is_kept(self):
        h = meta("H", SP)
        args = [Flex((), meta("A", EL), ()), Flex((), h, ())]
        assert eta_expand(args, PUT.type, NameSupply()) == args

    def test_width_mismatch_raises(self):
        h = meta("H", SP)
        with pytest.raises(SubstitutionError):
            eta_expand([Flex((), h, ())], GET.type, NameSupply())


class TestEquation:
    """Equations are unordered and compared up to α."""

    def test_symmetric(self):
        h = meta("H", SP)
        r = rec("r", SP)
        assert Equation(Flex((), h), RecApp((), r)) == Equation(RecApp((), r), Flex((), h))

    def test_alpha_equivalent(self):
        h = meta("H", EL, SP)
        r = rec("r", EL, SP)
        e1 = Equation(Flex((Binder("x", EL),), h, ("x",)), RecApp((Binder("x", EL),), r, ("x",)))
        e2 = Equation(Flex((Binder("y", EL),), h, ("y",)), RecApp((Binder("y", EL),), r, ("y",)))
        assert e1 == e2
        assert len({e1, e2}) == 1

    def test_free_names_matter(self):
        h = meta("H", EL, SP)
        r = rec("r", EL, SP)
        assert Equation(Flex((), h, ("a",)), RecApp((), r, ("a",))) != \
            Equation(Flex((), h, ("a",)), RecApp((), r, ("b",)))


class TestNameSupply:
    """Generated names skip everything already taken."""

    def test_skips_taken_names(self):
        supply = NameSupply({"_r1"})
        assert supply.fresh("r") == "_r2"
        assert supply.fresh("t") == "_t3"

    def test_pool_variables(self):
        assert pool_var(1) == "_z1"


class TestJoinContexts:
    """Joining renames clashing rec-consts of the second context."""

    def test_second_context_is_renamed(self):
        conat = Base("conat")
        cosucc = Const("cosucc", arrow(conat, conat))
        r = RecConst("r", conat)
        h = meta("H", conat)
        d1 = UnifContext((), ((r, Rigid((), cosucc, (RecApp((), r),))),))
        d2 = UnifContext(
            (Equation(Flex((), h), RecApp((), r)),),
            ((r, Rigid((), cosucc, (Flex((), h),))),),
        )
        joined = join_contexts(d1, d2)
        assert [d[0].name for d in joined.defs] == ["r", "r'"]
        assert {show_term(joined.eqs[0].left), show_term(joined.eqs[0].right)} == {"H", "r'"}


class TestSubstitution:
    """Application, composition and restriction."""

    def test_pattern_width_is_checked(self):
        h = meta("H", EL, SP)
        with pytest.raises(SubstitutionError):
            Assignment(h, (), RecApp((), rec("r", SP)))

    def test_apply_renames_pattern_to_arguments(self):
        h = meta("H", EL, SP)
        r = rec("r", EL, SP)
        gamma = Substitution((Assignment(h, ("a",), RecApp((), r, ("a",))),))
        out = apply_subst_term(Flex((Binder("x", EL),), h, ("x",)), gamma)
        assert out == RecApp((Binder("x", EL),), r, ("x",))

    def test_apply_leaves_other_metavariables(self):
        h = meta("H", SP)
        g = meta("G", SP)
        gamma = Substitution((Assignment(h, (), RecApp((), rec("r", SP))),))
        assert apply_subst_term(Flex((), g), gamma) == Flex((), g)

    def test_apply_to_context_adds_definitions(self):
        h = meta("H", SP)
        r = rec("r", SP)
        body = Rigid((), GET, (RecApp((Binder("x", EL),), r),))
        gamma = Substitution((Assignment(h, (), RecApp((), r)),), ((r, body),))
        delta = UnifContext((Equation(Flex((), h), RecApp((), rec("s", SP))),))
        applied = apply_subst_context(delta, gamma)
        assert applied.def_map["r"] == (r, body)
        assert applied.eqs[0] == Equation(RecApp((), r), RecApp((), rec("s", SP)))

    def test_compose_maps_values_through_second(self):
        h = meta("H", SP)
        g = meta("G", SP)
        r = rec("r", SP)
        gamma1 = Substitution((Assignment(h, (), Flex((), g)),))
        gamma2 = Substitution((Assignment(g, (), RecApp((), r)),))
        composed = compose(gamma1, gamma2)
        assert composed.get("H").value == RecApp((), r)
        assert composed.get("G").value == RecApp((), r)

    def test_restrict_keeps_definitions(self):
        h = meta("H", SP)
        g = meta("G", SP)
        r = rec("r", SP)
        gamma = Substitution(
            (Assignment(h, (), RecApp((), r)), Assignment(g, (), RecApp((), r))),
            ((r, Rigid((), GET, (RecApp((Binder("x", EL),), r),))),),
        )
        out = restrict(gamma, ["G"])
        assert out.dom_names() == {"G"}
        assert out.defs == gamma.defs

"""
Tests for services/expansion_service.py: depth-k expansion,
rational equality of terms and of substitutions.
"""
import pytest

from conftest import expected_unifier
from services.expansion_service import (
    BOT,
    equal_rational,
    equation_holds,
    expand,
    first_divergence,
    subst_equal,
    truncate,
)
from services.term_service import (
    Assignment,
    Base,
    Const,
    Equation,
    Flex,
    MetaVar,
    Mode,
    RecApp,
    RecConst,
    Rigid,
    Substitution,
    UnifContext,
    apply_subst_context,
    arrow,
    rename_context_apart,
)

# ── Helpers ──────────────────────────────────────────────────────────

CONAT = Base("conat")
COSUCC = Const("cosucc", arrow(CONAT, CONAT))
H = MetaVar("H", Mode.REC, CONAT)


def rec_app(name):
    return RecApp((), RecConst(name, CONAT))


def cosucc(t):
    return Rigid((), COSUCC, (t,))


def conat_defs():
    """omega = cosucc omega, s = cosucc omega, u = cosucc u, v = cosucc w, w = cosucc v."""
    return UnifContext((), (
        (RecConst("omega", CONAT), cosucc(rec_app("omega"))),
        (RecConst("s", CONAT), cosucc(rec_app("omega"))),
        (RecConst("u", CONAT), cosucc(rec_app("u"))),
        (RecConst("v", CONAT), cosucc(rec_app("w"))),
        (RecConst("w", CONAT), cosucc(rec_app("v"))),
        (RecConst("h", CONAT), cosucc(Flex((), H))),
    ))


def renamed_apart(gamma):
    """The same substitution with every rec-const primed."""
    ctx = rename_context_apart(gamma.to_context(), gamma.rec_names())
    assignments = tuple(
        Assignment(a.meta, a.pattern, eq.right) for a, eq in zip(gamma.assignments, ctx.eqs)
    )
    return Substitution(assignments, ctx.defs)


class TestExpand:
    """exp_k unfolds definitions and cuts at depth k."""

    def test_omega(self):
        delta = conat_defs()
        assert expand(delta, rec_app("omega"), 0) is BOT
        assert str(expand(delta, rec_app("omega"), 1)) == "cosucc ⊥"
        assert str(expand(delta, rec_app("omega"), 3)) == "cosucc (cosucc (cosucc ⊥))"

    def test_metavariable_is_a_leaf(self):
        delta = conat_defs()
        assert str(expand(delta, rec_app("h"), 5)) == "cosucc H"

    @pytest.mark.parametrize("k", [1, 2, 5, 12])
    def test_refines_with_depth(self, problem, k):
        delta = problem("stream").delta
        for _, body in delta.defs:
            t = expand(delta, body, k + 1)
            assert first_divergence(truncate(t, k), expand(delta, body, k)) is None

    def test_equations_do_not_matter(self, problem):
        delta = problem("stream").delta
        odd = delta.def_map["odd"][0]
        bare = UnifContext((), delta.defs)
        assert str(expand(delta, RecApp((), odd), 6)) == str(expand(bare, RecApp((), odd), 6))

    def test_first_divergence_of_odd_and_even(self, problem):
        delta = problem("stream").delta
        odd = RecApp((), delta.def_map["odd"][0])
        even = RecApp((), delta.def_map["even"][0])
        assert first_divergence(expand(delta, odd, 25), expand(delta, even, 25)) == 2


class TestEqualRational:
    """Coinductive equality agrees with all depth-k expansions."""

    NAMES = ["omega", "s", "u", "v", "w"]

    def test_all_unfoldings_of_omega_are_equal(self):
        delta = conat_defs()
        for a in self.NAMES:
            for b in self.NAMES:
                assert equal_rational(delta, rec_app(a), rec_app(b))

    def test_metavariable_makes_a_difference(self):
        delta = conat_defs()
        assert not equal_rational(delta, rec_app("h"), rec_app("omega"))
        assert not equal_rational(delta, rec_app("omega"), rec_app("h"))
        assert equal_rational(delta, rec_app("h"), cosucc(Flex((), H)))

    def test_agrees_with_expansion(self, problem):
        delta = problem("stream").delta
        terms = [RecApp((), r) for r, _ in delta.defs if r.width == 0]
        for a in terms:
            for b in terms:
                same = first_divergence(expand(delta, a, 25), expand(delta, b, 25)) is None
                assert equal_rational(delta, a, b) == same

    def test_equation_holds(self):
        delta = conat_defs()
        assert equation_holds(delta, Equation(rec_app("v"), cosucc(rec_app("u"))))
        assert not equation_holds(delta, Equation(rec_app("v"), Flex((), H)))


class TestSubstEqual:
    """Substitutions are equal when their values are rationally equal."""

    def test_omega_and_its_unfolding(self, problem):
        sig = problem("conat").signature
        g1 = expected_unifier(sig, [{"metavar": "H", "type": "conat", "pattern": [], "value": "omega"}],
                              [{"name": "omega", "type": "conat", "binders": [], "body": "cosucc omega"}], mode="fo")
        g2 = expected_unifier(sig, [{"metavar": "H", "type": "conat", "pattern": [], "value": "s"}],
                              [{"name": "s", "type": "conat", "binders": [], "body": "cosucc omega"},
                               {"name": "omega", "type": "conat", "binders": [], "body": "cosucc omega"}],
                              mode="fo")
        assert subst_equal(g1, g2)
        assert subst_equal(g2, g1)

    def test_renamed_rec_consts(self, solved):
        gamma = solved("stream").gamma
        assert subst_equal(gamma, gamma)
        assert subst_equal(gamma, renamed_apart(gamma))
        assert subst_equal(renamed_apart(gamma), gamma)

    def test_domains_must_agree(self, solved):
        gamma = solved("stream").gamma
        assert not subst_equal(gamma, Substitution((), gamma.defs))

    def test_different_values(self):
        g = MetaVar("G", Mode.REC, CONAT)
        delta = conat_defs()
        g1 = Substitution((Assignment(g, (), rec_app("omega")),), delta.defs)
        g2 = Substitution((Assignment(g, (), Flex((), H)),), delta.defs)
        assert not subst_equal(g1, g2)

    def test_applied_problem_equations_hold(self, solved):
        for name in ["conat", "stream", "producer", "consumer", "intro_cyclic"]:
            outcome = solved(name)
            applied = apply_subst_context(outcome.problem.delta, outcome.gamma)
            for eq in applied.eqs:
                assert equation_holds(applied, eq), name

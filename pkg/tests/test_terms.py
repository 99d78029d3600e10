"""Names, substitutions and the unifier."""

from __future__ import annotations

from hypothesis import given, settings, strategies as st

from shrew.oracles import brute_unify, factors_through
from shrew.terms import (
    App,
    Name,
    NameGen,
    Subst,
    Var,
    eqn,
    fresh_renaming,
    iter_names,
    mgu,
    term_names,
)

a, b, c, x, y, z = (Name(s) for s in "abcxyz")


def f(*args):
    return App("f", args)


def g(*args):
    return App("g", args)


# ---------------------------------------------------------------- names


def test_name_str_plain_and_indexed():
    assert str(Name("x")) == "x"
    assert str(Name("x", 3)) == "x~3"


def test_name_order_puts_plain_before_indexed():
    assert sorted([Name("x", 2), Name("x"), Name("x", 1)]) == [
        Name("x"),
        Name("x", 1),
        Name("x", 2),
    ]
    assert Name("a", 9) < Name("b")


def test_namegen_skips_avoided_names():
    gen = NameGen(avoid=[Name("n", 1), Name("n", 2)])
    assert gen.fresh() == Name("n", 3)
    assert gen.fresh() == Name("n", 4)


def test_namegen_fresh_like_keeps_the_base():
    gen = NameGen()
    assert gen.fresh_like(Name("w", 7)) == Name("w", 1)
    assert gen.fresh_like(Name("w")) == Name("w", 2)


def test_fresh_renaming_is_injective_and_fresh():
    gen = NameGen(avoid=[x, y, z])
    rho = fresh_renaming([x, y], gen)
    assert rho.is_renaming()
    assert rho.domain == {x, y}
    assert not rho.range_names() & {x, y, z}


# ---------------------------------------------------------- substitutions


def test_subst_drops_identity_bindings():
    assert Subst({x: Var(x), y: Var(z)}) == Subst({y: Var(z)})
    assert not Subst({x: Var(x)})


def test_subst_apply_reaches_under_functors():
    s = Subst({x: g(Var(y), Var(z))})
    assert s.apply(f(Var(x), Var(y))) == f(g(Var(y), Var(z)), Var(y))


def test_subst_items_is_sorted_by_name():
    s = Subst({z: Var(a), x: Var(a), y: Var(a)})
    assert [k for k, _ in s.items()] == [x, y, z]


def test_compose_is_apply_then_apply():
    s = Subst({x: Var(y)})
    t = Subst({y: f(Var(z))})
    st_ = s.compose(t)
    term = f(Var(x), Var(y), Var(z))
    assert st_.apply(term) == t.apply(s.apply(term))
    assert st_.apply(Var(x)) == f(Var(z))


def test_restrict_and_without_partition_the_domain():
    s = Subst({x: Var(a), y: Var(b)})
    assert s.restrict([x]) == Subst({x: Var(a)})
    assert s.without([x]) == Subst({y: Var(b)})
    assert s.restrict([x]).compose(s.without([x])) == s


def test_renaming_and_idempotence_predicates():
    assert Subst({x: Var(a), y: Var(b)}).is_renaming()
    assert not Subst({x: Var(a), y: Var(a)}).is_renaming()
    assert not Subst({x: f(Var(a))}).is_renaming()
    assert Subst({x: f(Var(a))}).is_idempotent()
    assert not Subst({x: f(Var(x))}).is_idempotent()


def test_classes_groups_preimages_per_representative():
    s = Subst.of_names({x: a, y: a, z: b})
    assert s.classes() == {a: (x, y), b: (z,)}


def test_apply_name_rejects_structured_bindings():
    s = Subst({x: f(Var(y))})
    try:
        s.apply_name(x)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")


# ----------------------------------------------------------------- mgu


class TestMgu:
    def test_variable_chain_collapses_to_one_class(self):
        assert mgu([(f(Var(x), Var(y)), f(Var(y), Var(z)))]) == Subst.of_names(
            {y: x, z: x}
        )

    def test_representative_is_least_unless_steered(self):
        assert mgu([(Var(x), Var(y))]) == Subst.of_names({y: x})
        assert mgu([(Var(x), Var(y))], preferred=[y]) == Subst.of_names({x: y})

    def test_structured_solution(self):
        got = mgu([(f(g(Var(x)), Var(y)), f(Var(y), g(Var(a))))])
        assert got == Subst({x: Var(a), y: g(Var(a))})

    def test_occurs_check(self):
        assert mgu([(Var(x), f(Var(x)))]) is None
        assert mgu([(Var(x), f(g(Var(y)), g(Var(x))))]) is None

    def test_functor_and_arity_clash(self):
        assert mgu([(f(Var(x)), g(Var(x)))]) is None
        assert mgu([(f(Var(x)), f(Var(x), Var(y)))]) is None

    def test_two_bound_classes_union_without_looping(self):
        # regression: unioning two classes that each already carry a
        # binding must reconcile the bindings once, not re-decompose them
        # forever; this set used to spin and must fail by occurs check
        eqs = [
            (Var(c), Var(a)),
            (f(Var(c), Var(b)), Var(c)),
            (Var(c), f(Var(c), Var(b))),
            (Var(a), f(Var(a), Var(b))),
        ]
        assert mgu(eqs) is None

    def test_two_bound_classes_union_solvable_case(self):
        eqs = [
            (Var(c), f(Var(x))),
            (Var(a), f(Var(y))),
            (Var(c), Var(a)),
        ]
        got = mgu(eqs)
        assert got is not None
        assert got.apply(Var(c)) == got.apply(Var(a))
        assert got.apply(Var(x)) == got.apply(Var(y))

    def test_empty_set_has_empty_unifier(self):
        assert mgu([]) == Subst()

    def test_eqn_round_trip_on_least_representative_maps(self):
        theta = Subst.of_names({y: x, z: x, b: a})
        assert mgu(eqn(theta)) == theta


# ------------------------------------------------- properties of the mgu

_pool = [Name(s) for s in "uvw"]
_vars = st.sampled_from([Var(n) for n in _pool])

# flat terms only: the brute-force oracle refuses sides deeper than two
_flat = (
    _vars
    | st.just(App("k"))
    | st.builds(lambda t: App("f", (t,)), _vars)
    | st.builds(lambda s, t: App("g", (s, t)), _vars, _vars)
)

_equations = st.lists(st.tuples(_flat, _flat), max_size=4)


@given(_equations)
def test_mgu_solves_its_equations_idempotently(eqs):
    sigma = mgu(eqs)
    if sigma is None:
        return
    assert sigma.is_idempotent()
    for s, t in eqs:
        assert sigma.apply(s) == sigma.apply(t)


@given(_equations)
def test_mgu_is_deterministic(eqs):
    assert mgu(eqs) == mgu(list(eqs))


@settings(max_examples=60)
@given(_equations)
def test_mgu_matches_exhaustive_search(eqs):
    """Success/failure and generality agree with the brute-force oracle."""
    variables = set()
    for s, t in eqs:
        variables |= term_names(s) | term_names(t)
    solutions = brute_unify(eqs, _pool)
    sigma = mgu(eqs)
    if sigma is None:
        assert not solutions
    else:
        assert all(factors_through(tau, sigma, variables) for tau in solutions)


@given(_equations)
def test_mgu_result_never_invents_names(eqs):
    sigma = mgu(eqs)
    if sigma is None:
        return
    seen = set()
    for s, t in eqs:
        seen |= term_names(s) | term_names(t)
    assert sigma.names() <= seen


def test_iter_names_preorder_with_repeats():
    t = g(f(Var(x)), g(Var(y), Var(x)))
    assert list(iter_names(t)) == [x, y, x]
    assert term_names(t) == {x, y}

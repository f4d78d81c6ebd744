import random
from collections import Counter

import pytest

from cohorn.syntax import (
    App,
    Atom,
    Const,
    EApp,
    EAxiom,
    ELam,
    EMu,
    EVar,
    PredicateMismatch,
    Var,
    alpha_equal,
    anti_unify,
    anti_unify_all,
    apply,
    compose,
    free_vars,
    match,
    mk_app,
    mk_eapp,
    pair,
    render_evidence,
    render_term,
    symbol_multiset,
    var_multiset,
)
from conftest import eq, random_atom, random_term

Int = Const("Int")
Mu = Const("Mu")
HPTree = Const("HPTree")
x, y = Var("x"), Var("y")


# ---------------------------------------------------------------------------
# Independent oracle: brute-force matching by enumerating candidate bindings


def subterms(t):
    out = [t]
    if isinstance(t, App):
        out += subterms(t.fun) + subterms(t.arg)
    return out


def brute_force_match(pattern: Atom, subject: Atom):
    """Enumerate every mapping from pattern variables to subterms of the
    subject and keep those with apply(s, pattern) == subject."""
    if pattern.pred != subject.pred or len(pattern.args) != len(subject.args):
        return []
    pool = [t for arg in subject.args for t in subterms(arg)]
    pool = list(dict.fromkeys(pool))
    names = free_vars(pattern)
    found = []

    def go(i, binds):
        if i == len(names):
            if apply(binds, pattern) == subject:
                found.append(dict(binds))
            return
        for t in pool:
            binds[names[i]] = t
            go(i + 1, binds)
        del binds[names[i]]

    go(0, {})
    return found


# ---------------------------------------------------------------------------
# match


def test_match_pair_of_ints():
    got = match(eq(pair(x, y)), eq(pair(Int, Int)))
    assert got == {"x": Int, "y": Int}


def test_match_identical_atoms_is_identity():
    got = match(eq(x), eq(x))
    assert got == {}
    assert apply(got, eq(x)) == eq(x)


def test_match_pair_pattern_against_non_application():
    # oracle first: no candidate binding maps the pair pattern onto Eq Int
    assert brute_force_match(eq(pair(x, y)), eq(Int)) == []
    assert match(eq(pair(x, y)), eq(Int)) is None


def test_match_agrees_with_brute_force_on_random_atoms():
    rng = random.Random(7)
    for _ in range(150):
        pattern = random_atom(rng, 2, ["x", "y"])
        subject = random_atom(rng, 2, [])
        got = match(pattern, subject)
        oracle = brute_force_match(pattern, subject)
        if got is None:
            assert oracle == []
        else:
            assert apply(got, pattern) == subject
            assert any(apply(s, pattern) == subject for s in oracle)


def test_match_soundness_property():
    # whenever match succeeds, applying the result reproduces the subject
    rng = random.Random(11)
    for _ in range(300):
        pattern = random_atom(rng, 2, ["x", "y", "z"])
        sigma = {v: random_term(rng, 2, []) for v in free_vars(pattern)}
        subject = apply(sigma, pattern)
        got = match(pattern, subject)
        assert got is not None
        assert apply(got, pattern) == subject


def test_match_unique_when_it_exists():
    rng = random.Random(13)
    for _ in range(100):
        pattern = random_atom(rng, 1, ["x", "y"])
        subject = apply({v: random_term(rng, 2, []) for v in free_vars(pattern)}, pattern)
        oracle = brute_force_match(pattern, subject)
        normalized = {
            tuple(sorted((k, render_term(v)) for k, v in s.items() if Var(k) != v))
            for s in oracle
        }
        assert len(normalized) <= 1 or match(pattern, subject) is not None


# ---------------------------------------------------------------------------
# apply


def test_apply_single_binding():
    got = apply({"x": Int}, eq(mk_app(Mu, HPTree, x)))
    assert got == eq(mk_app(Mu, HPTree, Int))


def test_apply_empty_substitution_is_identity():
    atom = eq(mk_app(Mu, HPTree, x))
    assert apply({}, atom) == atom


def test_apply_twice_squares_the_pair_substitution():
    # sigma = [(x,x)/x]; two applications give Eq (Mu HPTree ((x,x),(x,x)))
    sigma = {"x": pair(x, x)}
    once = apply(sigma, eq(mk_app(Mu, HPTree, x)))
    twice = apply(sigma, once)
    assert twice == eq(mk_app(Mu, HPTree, pair(pair(x, x), pair(x, x))))


def test_apply_composition_on_disjoint_domains():
    rng = random.Random(17)
    for _ in range(200):
        t = random_term(rng, 3, ["x", "y"])
        s1 = {"x": random_term(rng, 2, [])}
        s2 = {"y": random_term(rng, 2, [])}
        assert apply(s2, apply(s1, t)) == apply(compose(s2, s1), t)


# ---------------------------------------------------------------------------
# anti-unification


def test_anti_unify_hptree_instances():
    got = anti_unify(eq(mk_app(Mu, HPTree, Int)), eq(mk_app(Mu, HPTree, pair(Int, Int))))
    (arg,) = got.args
    head, args = arg, []
    while isinstance(head, App):
        args.insert(0, head.arg)
        head = head.fun
    assert head == Mu
    assert args[0] == HPTree
    assert isinstance(args[1], Var)


def test_anti_unify_identical_atoms():
    atom = eq(mk_app(Mu, HPTree, pair(Int, Int)))
    assert anti_unify(atom, atom) == atom


def test_anti_unify_q_instances():
    # clause by clause: S matches, Z vs (G Z) disagrees and becomes a variable
    S, G, Z = Const("S"), Const("G"), Const("Z")
    q = lambda t: Atom("Q", (t,))
    got = anti_unify(q(App(S, Z)), q(App(S, App(G, Z))))
    (arg,) = got.args
    assert isinstance(arg, App) and arg.fun == S and isinstance(arg.arg, Var)
    # both instances recoverable by matching
    assert match(got, q(App(S, Z))) is not None
    assert match(got, q(App(S, App(G, Z)))) is not None


def test_anti_unify_all_fold():
    odd = eq(App(Const("OddList"), Int))
    assert anti_unify_all([odd, odd]) == odd
    assert anti_unify_all([odd]) == odd
    got = anti_unify_all(
        [eq(mk_app(Mu, HPTree, Int)), eq(mk_app(Mu, HPTree, pair(Int, Int)))]
    )
    assert match(got, eq(mk_app(Mu, HPTree, Int))) is not None


def test_anti_unify_predicate_mismatch():
    with pytest.raises(PredicateMismatch):
        anti_unify(Atom("P", (Int,)), Atom("Q", (Int,)))
    with pytest.raises(PredicateMismatch):
        anti_unify(Atom("P", (Int,)), Atom("P", (Int, Int)))


def test_anti_unify_phi_injectivity():
    # identical mismatching pairs get the same fresh variable, distinct
    # pairs get distinct ones
    F, G, H = Const("F"), Const("G"), Const("H")
    left = Atom("P", (App(F, Int), App(F, Int), App(G, Int)))
    right = Atom("P", (App(G, Int), App(G, Int), App(H, Int)))
    got = anti_unify(left, right)
    v1, v2, v3 = got.args
    assert isinstance(v1, Var) and isinstance(v2, Var) and isinstance(v3, Var)
    assert v1 == v2
    assert v1 != v3


def test_anti_unify_generality_random():
    rng = random.Random(23)
    for _ in range(300):
        a = random_atom(rng, 2, [])
        b = random_atom(rng, 2, [])
        g = anti_unify(a, b)
        assert match(g, a) is not None
        assert match(g, b) is not None
        assert anti_unify(a, a) == a


# ---------------------------------------------------------------------------
# symbol / variable multisets


def test_multisets_hbush_head():
    f_, a_ = Var("f"), Var("a")
    atom = eq(mk_app(Const("HBush"), f_, a_))
    assert symbol_multiset(atom) == Counter({"HBush": 1})
    assert var_multiset(atom) == Counter({"f": 1, "a": 1})


def test_multisets_count_every_occurrence():
    h = Var("h")
    atom = eq(mk_app(h, App(Mu, h), Var("a")))
    assert symbol_multiset(atom) == Counter({"Mu": 1})
    assert var_multiset(atom) == Counter({"h": 2, "a": 1})


def test_multisets_lone_variable():
    assert symbol_multiset(eq(x)) == Counter()
    assert var_multiset(eq(x)) == Counter({"x": 1})


# ---------------------------------------------------------------------------
# alpha equivalence


def test_alpha_equal_binder_renaming():
    k = EAxiom("K")
    e1 = EMu("al", ELam("b", EApp(k, EApp(EVar("al"), EVar("b")))))
    e2 = EMu("c", ELam("d", EApp(k, EApp(EVar("c"), EVar("d")))))
    assert alpha_equal(e1, e2)


def test_alpha_equal_distinct_constants():
    assert not alpha_equal(
        EApp(EAxiom("K1"), EAxiom("K2")), EApp(EAxiom("K2"), EAxiom("K1"))
    )


def test_alpha_equal_ab_evidence():
    e1 = EMu("al", mk_eapp(EAxiom("KA"), EApp(EAxiom("KB"), EVar("al"))))
    e2 = EMu("be", mk_eapp(EAxiom("KA"), EApp(EAxiom("KB"), EVar("be"))))
    assert alpha_equal(e1, e2)
    assert not alpha_equal(e1, EMu("al", mk_eapp(EAxiom("KB"), EApp(EAxiom("KA"), EVar("al")))))


def test_render_evidence_shapes():
    e = ELam("b0", mk_eapp(EAxiom("Ax0"), mk_eapp(EAxiom("Ax1"), EVar("b0"), EVar("x"))))
    assert render_evidence(e) == "\\ b0 . Ax0 (Ax1 b0 x)"

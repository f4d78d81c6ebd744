"""Shared environments (the running examples of the domain) and random
generators used by the property suites."""

import pathlib
import random

import pytest

from cohorn.resolve import AxiomEnv, axiom
from cohorn.syntax import (
    App,
    Atom,
    Const,
    HornFormula,
    Term,
    Var,
    fact,
    mk_app,
    pair,
)

CORPUS = pathlib.Path(__file__).parent / "corpus"


def eq(t: Term) -> Atom:
    return Atom("Eq", (t,))


x, y, a, f, h = Var("x"), Var("y"), Var("a"), Var("f"), Var("h")
Int, Unit = Const("Int"), Const("Unit")
Mu = Const("Mu")


@pytest.fixture
def corpus():
    return CORPUS


@pytest.fixture
def phi_pair() -> AxiomEnv:
    return AxiomEnv(
        [
            axiom("KInt", fact(eq(Int))),
            axiom("KPair", HornFormula((eq(x), eq(y)), eq(pair(x, y)))),
        ]
    )


@pytest.fixture
def phi_hptree(phi_pair) -> AxiomEnv:
    hptree = Const("HPTree")
    return phi_pair.extended(
        axiom("KMu", HornFormula((eq(mk_app(h, App(Mu, h), a)),), eq(mk_app(Mu, h, a)))),
        axiom(
            "KHPTree",
            HornFormula((eq(a), eq(App(f, pair(a, a)))), eq(mk_app(hptree, f, a))),
        ),
    )


@pytest.fixture
def phi_hbush() -> AxiomEnv:
    hbush = Const("HBush")
    return AxiomEnv(
        [
            axiom("KMu", HornFormula((eq(mk_app(f, App(Mu, f), a)),), eq(mk_app(Mu, f, a)))),
            axiom(
                "KHBush",
                HornFormula((eq(a), eq(App(f, App(f, a)))), eq(mk_app(hbush, f, a))),
            ),
            axiom("KUnit", fact(eq(Unit))),
        ]
    )


@pytest.fixture
def phi_ab() -> AxiomEnv:
    return AxiomEnv(
        [
            axiom("KA", HornFormula((Atom("B", (x,)),), Atom("A", (x,)))),
            axiom("KB", HornFormula((Atom("A", (x,)),), Atom("B", (x,)))),
        ]
    )


@pytest.fixture
def phi_evenodd() -> AxiomEnv:
    odd = lambda t: eq(App(Const("OddList"), t))
    even = lambda t: eq(App(Const("EvenList"), t))
    return AxiomEnv(
        [
            axiom("KInt", fact(eq(Int))),
            axiom("KOdd", HornFormula((eq(a), even(a)), odd(a))),
            axiom("KEven", HornFormula((eq(a), odd(a)), even(a))),
        ]
    )


@pytest.fixture
def phi_q() -> AxiomEnv:
    q = lambda t: Atom("Q", (t,))
    S, G, Z = Const("S"), Const("G"), Const("Z")
    return AxiomEnv(
        [
            axiom("KS", HornFormula((q(App(S, App(G, x))), q(x)), q(App(S, x)))),
            axiom("KG", HornFormula((q(x),), q(App(G, x)))),
            axiom("KZ", fact(q(Z))),
        ]
    )


@pytest.fixture
def phi_d() -> AxiomEnv:
    d = lambda t, u: Atom("D", (t, u))
    S, Z = Const("S"), Const("Z")
    n, m = Var("n"), Var("m")
    return AxiomEnv(
        [
            axiom("K1", HornFormula((d(n, App(S, m)),), d(App(S, n), m))),
            axiom("K2", HornFormula((d(App(S, m), Z),), d(Z, m))),
        ]
    )


# ---------------------------------------------------------------------------
# Random generators


def random_terminating_case(rng: random.Random) -> tuple[AxiomEnv, Atom]:
    """A non-overlapping, structurally terminating environment (one clause
    per constructor, bodies on strict subterms) plus a ground goal.  Every
    goal over the constructors resolves successfully."""
    n_ctors = rng.randint(2, 4)
    ctors = [("F0", 0)]
    for i in range(1, n_ctors):
        ctors.append((f"F{i}", rng.randint(0, 2)))
    entries = []
    for i, (name, arity) in enumerate(ctors):
        args = [Var(f"x{j}") for j in range(arity)]
        head = Atom("P", (mk_app(Const(name), *args),))
        body = tuple(Atom("P", (v,)) for v in args)
        entries.append(axiom(f"K{i}", HornFormula(body, head)))

    def term(depth: int) -> Term:
        name, arity = rng.choice(ctors if depth > 0 else [ctors[0]])
        return mk_app(Const(name), *(term(depth - 1) for _ in range(arity)))

    return AxiomEnv(entries), Atom("P", (term(rng.randint(0, 4)),))


def random_term(rng: random.Random, depth: int, vars_: list[str]) -> Term:
    roll = rng.random()
    if depth <= 0 or roll < 0.3:
        if vars_ and roll < 0.15:
            return Var(rng.choice(vars_))
        return Const(rng.choice(["Int", "Unit", "List", "Tree"]))
    head: Term = Const(rng.choice(["F", "G", "Pair"]))
    for _ in range(rng.randint(1, 2)):
        head = App(head, random_term(rng, depth - 1, vars_))
    return head


def random_atom(rng: random.Random, arity: int, vars_: list[str]) -> Atom:
    return Atom("P", tuple(random_term(rng, 3, vars_) for _ in range(arity)))

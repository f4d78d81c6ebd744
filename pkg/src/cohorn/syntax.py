"""Terms, atoms, Horn formulas, evidence terms and the operations shared by
the whole engine: substitution, one-sided matching, anti-unification,
symbol/variable multisets and alpha-equivalence.

Conventions: variable names start lowercase, constant and predicate names
start uppercase. All node types are frozen dataclasses and safe to share.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Optional, Union


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class Eigen:
    """A proof-local constant standing in for a universally quantified
    variable.  Distinct from Const by type, so it can never collide with a
    constant written by the user."""

    name: str
    origin: str = ""

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"

    def __repr__(self):
        return render_term(self)


Term = Union[Var, Const, Eigen, App]

PAIR = "Pair"


def mk_app(head: Term, *args: Term) -> Term:
    t = head
    for a in args:
        t = App(t, a)
    return t


def pair(a: Term, b: Term) -> Term:
    return App(App(Const(PAIR), a), b)


def spine_term(t: Term) -> tuple[Term, list[Term]]:
    """Flatten left-nested applications into (head, args)."""
    args: list[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


# ---------------------------------------------------------------------------
# Atoms and Horn formulas


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    def __repr__(self):
        return render_atom(self)


@dataclass(frozen=True)
class HornFormula:
    """body_1, ..., body_n => head, all variables implicitly universally
    quantified at the outermost level.  Well-formed formulas have no
    existential variables: every body variable occurs in the head."""

    body: tuple[Atom, ...]
    head: Atom

    def __repr__(self):
        return render_horn(self)


def fact(head: Atom) -> HornFormula:
    return HornFormula((), head)


# ---------------------------------------------------------------------------
# Evidence and mixed terms
#
# Mixed terms reuse the evidence constructors with MAtom leaves for not yet
# resolved atoms; a mixed term with no MAtom and no redex is plain evidence.


@dataclass(frozen=True)
class EAxiom:
    """Named axiom or proven-lemma constant."""

    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class EVar:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class EApp:
    fun: "Mixed"
    arg: "Mixed"

    def __repr__(self):
        return render_evidence(self)


@dataclass(frozen=True)
class ELam:
    binder: str
    body: "Mixed"

    def __repr__(self):
        return render_evidence(self)


@dataclass(frozen=True)
class EMu:
    binder: str
    body: "Mixed"

    def __repr__(self):
        return render_evidence(self)


@dataclass(frozen=True)
class MAtom:
    atom: Atom

    def __repr__(self):
        return render_evidence(self)


@dataclass(frozen=True)
class Hole:
    """Marker replacing a focused subterm when comparing contexts."""

    def __repr__(self):
        return "<*>"


Evidence = Union[EAxiom, EVar, EApp, ELam, EMu]
Mixed = Union[Evidence, MAtom, Hole]


def mk_eapp(head: Mixed, *args: Mixed) -> Mixed:
    e = head
    for a in args:
        e = EApp(e, a)
    return e


def spine_evidence(e: Mixed) -> tuple[Mixed, list[Mixed]]:
    args: list[Mixed] = []
    while isinstance(e, EApp):
        args.append(e.arg)
        e = e.fun
    args.reverse()
    return e, args


# ---------------------------------------------------------------------------
# Substitution

Subst = dict[str, Term]


def apply_term(s: Subst, t: Term) -> Term:
    if isinstance(t, Var):
        return s.get(t.name, t)
    if isinstance(t, App):
        return App(apply_term(s, t.fun), apply_term(s, t.arg))
    return t


def apply(s: Subst, x):
    """Simultaneous capture-free substitution over a term, atom, Horn
    formula or mixed term."""
    if isinstance(x, (Var, Const, Eigen, App)):
        return apply_term(s, x)
    if isinstance(x, Atom):
        return Atom(x.pred, tuple(apply_term(s, a) for a in x.args))
    if isinstance(x, HornFormula):
        return HornFormula(tuple(apply(s, b) for b in x.body), apply(s, x.head))
    if isinstance(x, MAtom):
        return MAtom(apply(s, x.atom))
    if isinstance(x, EApp):
        return EApp(apply(s, x.fun), apply(s, x.arg))
    if isinstance(x, ELam):
        return ELam(x.binder, apply(s, x.body))
    if isinstance(x, EMu):
        return EMu(x.binder, apply(s, x.body))
    return x


def compose(s2: Subst, s1: Subst) -> Subst:
    """s2 after s1: apply(compose(s2, s1), t) == apply(s2, apply(s1, t))."""
    out = {x: apply_term(s2, t) for x, t in s1.items()}
    for x, t in s2.items():
        if x not in out:
            out[x] = t
    return out


# ---------------------------------------------------------------------------
# Matching (one-sided unification)


def match_term(pattern: Term, subject: Term, binds: Subst) -> bool:
    if isinstance(pattern, Var):
        bound = binds.get(pattern.name)
        if bound is None:
            binds[pattern.name] = subject
            return True
        return bound == subject
    if isinstance(pattern, Const):
        return isinstance(subject, Const) and pattern.name == subject.name
    if isinstance(pattern, Eigen):
        return pattern == subject
    # application: subject must be an application too
    return (
        isinstance(subject, App)
        and match_term(pattern.fun, subject.fun, binds)
        and match_term(pattern.arg, subject.arg, binds)
    )


def match(pattern: Atom, subject: Atom) -> Optional[Subst]:
    """Find the unique substitution s with apply(s, pattern) == subject, or
    None when there is none.  Variables in the subject are opaque: only a
    pattern variable can match them."""
    if pattern.pred != subject.pred or len(pattern.args) != len(subject.args):
        return None
    binds: Subst = {}
    for p, t in zip(pattern.args, subject.args):
        if not match_term(p, t, binds):
            return None
    # drop identity bindings so the result is idempotent
    return {x: t for x, t in binds.items() if not (isinstance(t, Var) and t.name == x)}


# ---------------------------------------------------------------------------
# Free variables and fresh names


def _iter_terms(x) -> Iterator[Term]:
    if isinstance(x, (Var, Const, Eigen, App)):
        yield x
    elif isinstance(x, Atom):
        yield from x.args
    elif isinstance(x, HornFormula):
        yield from x.head.args
        for b in x.body:
            yield from b.args
    else:
        raise TypeError(f"no terms in {type(x).__name__}")


def free_vars(x) -> list[str]:
    """Variable names in first-occurrence order."""
    seen: dict[str, None] = {}
    stack = list(_iter_terms(x))
    stack.reverse()
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            seen.setdefault(t.name, None)
        elif isinstance(t, App):
            stack.append(t.arg)
            stack.append(t.fun)
    return list(seen)


def fresh_var_names(avoid: set[str]) -> Iterator[str]:
    i = 1
    while True:
        name = f"var_{i}"
        if name not in avoid:
            yield name
        i += 1


# ---------------------------------------------------------------------------
# Anti-unification


class PredicateMismatch(Exception):
    """Raised when anti-unifying atoms with different predicates or arities."""


def anti_unify(a: Atom, b: Atom) -> Atom:
    """Least general common generalization of two atoms.

    Shared constant-headed structure is retained; every mismatching pair of
    subterms is replaced through an injective map from term pairs to fresh
    variables, so equal mismatching pairs receive the same variable.
    """
    return anti_unify_all([a, b])


def anti_unify_all(atoms: list[Atom]) -> Atom:
    """Left fold of anti_unify over a nonempty list."""
    if not atoms:
        raise ValueError("anti_unify_all needs at least one atom")
    out = atoms[0]
    for a in atoms[1:]:
        out = _anti_unify2(out, a)
    return out


def _anti_unify2(a: Atom, b: Atom) -> Atom:
    if a.pred != b.pred or len(a.args) != len(b.args):
        raise PredicateMismatch(f"cannot anti-unify {a!r} with {b!r}")
    avoid = set(free_vars(a)) | set(free_vars(b))
    names = fresh_var_names(avoid)
    phi: dict[tuple[Term, Term], Var] = {}

    def gen(t: Term, u: Term) -> Term:
        if t == u:
            return t
        th, targs = spine_term(t)
        uh, uargs = spine_term(u)
        if (
            isinstance(th, Const)
            and isinstance(uh, Const)
            and th.name == uh.name
            and len(targs) == len(uargs)
        ):
            out: Term = th
            for ta, ua in zip(targs, uargs):
                out = App(out, gen(ta, ua))
            return out
        key = (t, u)
        if key not in phi:
            phi[key] = Var(next(names))
        return phi[key]

    return Atom(a.pred, tuple(gen(t, u) for t, u in zip(a.args, b.args)))


# ---------------------------------------------------------------------------
# Symbol and variable multisets


def symbol_multiset(a: Atom) -> Counter:
    """Occurrences of every term-level constant.  The predicate symbol is
    not counted."""
    counts: Counter = Counter()
    stack: list[Term] = list(a.args)
    while stack:
        t = stack.pop()
        if isinstance(t, (Const, Eigen)):
            counts[t.name] += 1
        elif isinstance(t, App):
            stack.append(t.fun)
            stack.append(t.arg)
    return counts


def var_multiset(a: Atom) -> Counter:
    counts: Counter = Counter()
    stack: list[Term] = list(a.args)
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            counts[t.name] += 1
        elif isinstance(t, App):
            stack.append(t.fun)
            stack.append(t.arg)
    return counts


# ---------------------------------------------------------------------------
# Evidence utilities


def free_evars(e: Mixed) -> set[str]:
    out: set[str] = set()
    stack: list[tuple[Mixed, frozenset[str]]] = [(e, frozenset())]
    while stack:
        node, bound = stack.pop()
        if isinstance(node, EVar):
            if node.name not in bound:
                out.add(node.name)
        elif isinstance(node, EApp):
            stack.append((node.fun, bound))
            stack.append((node.arg, bound))
        elif isinstance(node, (ELam, EMu)):
            stack.append((node.body, bound | {node.binder}))
    return out


def subst_evidence(e: Mixed, name: str, repl: Mixed) -> Mixed:
    """Capture-avoiding replacement of the free evidence variable `name`."""
    repl_free = free_evars(repl)

    def go(node: Mixed, bound: frozenset[str]) -> Mixed:
        if isinstance(node, EVar):
            return repl if (node.name == name and node.name not in bound) else node
        if isinstance(node, EApp):
            return EApp(go(node.fun, bound), go(node.arg, bound))
        if isinstance(node, (ELam, EMu)):
            cls = type(node)
            binder = node.binder
            if binder == name:
                return node
            body = node.body
            if binder in repl_free:
                fresh = binder
                taken = repl_free | free_evars(body) | bound
                k = 0
                while fresh in taken:
                    fresh = f"{binder}_{k}"
                    k += 1
                body = subst_evidence(body, binder, EVar(fresh))
                binder = fresh
            return cls(binder, go(body, bound | {binder}))
        return node

    return go(e, frozenset())


def alpha_equal(e1: Mixed, e2: Mixed) -> bool:
    """Equality up to consistent renaming of lambda and mu binders."""

    def go(a: Mixed, b: Mixed, m1: dict, m2: dict, depth: int) -> bool:
        if type(a) is not type(b):
            return False
        if isinstance(a, EVar):
            return m1.get(a.name, a.name) == m2.get(b.name, b.name)
        if isinstance(a, EAxiom):
            return a.name == b.name
        if isinstance(a, (MAtom,)):
            return a == b
        if isinstance(a, Hole):
            return True
        if isinstance(a, EApp):
            return go(a.fun, b.fun, m1, m2, depth) and go(a.arg, b.arg, m1, m2, depth)
        # binder: map both to the same canonical level marker
        n1 = dict(m1)
        n2 = dict(m2)
        n1[a.binder] = depth
        n2[b.binder] = depth
        return go(a.body, b.body, n1, n2, depth + 1)

    return go(e1, e2, {}, {}, 0)


# ---------------------------------------------------------------------------
# Rendering
#
# Atoms print as `Pred t1 ... tn`, applications left-associated with
# compound arguments parenthesized, pairs with the `(a, b)` sugar, lambdas
# as `\ a . e` and fixed points as `mu a . e` (the CLI renders stored
# lemmas through named recursion instead).


def _is_pair(t: Term) -> bool:
    return (
        isinstance(t, App)
        and isinstance(t.fun, App)
        and isinstance(t.fun.fun, Const)
        and t.fun.fun.name == PAIR
    )


def render_term(t: Term, atomic: bool = False) -> str:
    if isinstance(t, (Var, Const, Eigen)):
        return t.name
    if _is_pair(t):
        return f"({render_term(t.fun.arg)}, {render_term(t.arg)})"
    head, args = spine_term(t)
    s = " ".join([render_term(head)] + [render_term(a, atomic=True) for a in args])
    return f"({s})" if atomic else s


def render_atom(a: Atom, atomic: bool = False) -> str:
    if not a.args:
        return a.pred
    s = " ".join([a.pred] + [render_term(t, atomic=True) for t in a.args])
    return f"({s})" if atomic else s


def render_horn(h: HornFormula) -> str:
    if not h.body:
        return render_atom(h.head)
    ctx = ", ".join(render_atom(b) for b in h.body)
    return f"({ctx}) => {render_atom(h.head)}"


def render_evidence(e: Mixed, atomic: bool = False) -> str:
    if isinstance(e, (EAxiom, EVar)):
        return e.name
    if isinstance(e, Hole):
        return "<*>"
    if isinstance(e, MAtom):
        return render_atom(e.atom, atomic=atomic)
    if isinstance(e, EApp):
        head, args = spine_evidence(e)
        s = " ".join(
            [render_evidence(head, atomic=True)]
            + [render_evidence(a, atomic=True) for a in args]
        )
        return f"({s})" if atomic else s
    if isinstance(e, ELam):
        s = f"\\ {e.binder} . {render_evidence(e.body)}"
        return f"({s})" if atomic else s
    if isinstance(e, EMu):
        s = f"mu {e.binder} . {render_evidence(e.body)}"
        return f"({s})" if atomic else s
    raise TypeError(f"cannot render {type(e).__name__}")

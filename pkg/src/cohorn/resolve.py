"""Big-step and small-step term-matching resolution with evidence, plus
resolution-tree construction.

The big-step solver is an explicit-stack machine (divergent searches reach
depths far beyond Python's recursion limit) with chronological backtracking
over clause choices, all bounded by fuel.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .syntax import (
    Atom,
    EAxiom,
    EVar,
    EApp,
    ELam,
    EMu,
    Evidence,
    HornFormula,
    MAtom,
    Mixed,
    apply,
    match,
    mk_eapp,
    render_atom,
)


class EntryKind(enum.Enum):
    AXIOM = "axiom"
    LEMMA = "lemma"
    HYP = "hypothesis"
    COHYP = "cohypothesis"


@dataclass(frozen=True)
class Entry:
    name: str
    formula: HornFormula
    evidence: Evidence
    kind: EntryKind

    def ref(self) -> Evidence:
        """The evidence node standing for this entry inside proofs."""
        if self.kind in (EntryKind.AXIOM, EntryKind.LEMMA):
            return EAxiom(self.name)
        return EVar(self.name)


def axiom(name: str, formula: HornFormula) -> Entry:
    return Entry(name, formula, EAxiom(name), EntryKind.AXIOM)


def lemma(name: str, formula: HornFormula, evidence: Evidence) -> Entry:
    return Entry(name, formula, evidence, EntryKind.LEMMA)


def hypothesis(name: str, head: Atom) -> Entry:
    return Entry(name, HornFormula((), head), EVar(name), EntryKind.HYP)


def cohypothesis(name: str, formula: HornFormula) -> Entry:
    return Entry(name, formula, EVar(name), EntryKind.COHYP)


class AxiomEnv:
    """Ordered sequence of named, evidence-backed Horn formulas.

    Environments are not mutated in place; `extended` returns a new one
    sharing the prefix, so snapshots between lemma rounds stay valid.
    """

    def __init__(self, entries=()):
        self.entries: tuple[Entry, ...] = tuple(entries)
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("duplicate entry names in environment")

    def extended(self, *entries: Entry) -> "AxiomEnv":
        return AxiomEnv(self.entries + entries)

    def lookup(self, name: str) -> Optional[Entry]:
        for e in self.entries:
            if e.name == name:
                return e
        return None

    def clauses(self) -> list[Entry]:
        return [e for e in self.entries if e.kind in (EntryKind.AXIOM, EntryKind.LEMMA)]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __repr__(self):
        return f"AxiomEnv({', '.join(e.name for e in self.entries)})"


# ---------------------------------------------------------------------------
# Errors and fuel


class FuelExhausted(Exception):
    """The step budget ran out; the derivation may be divergent."""


class Stuck(Exception):
    def __init__(self, goal: Atom):
        super().__init__(f"no clause matches {render_atom(goal)}")
        self.goal = goal


class GuardViolation(Exception):
    """The only derivations found use the coinductive hypothesis at an
    unguarded position, so the fixed point would not be head-normal."""

    def __init__(self, goal: Atom):
        super().__init__(
            f"coinductive hypothesis matches {render_atom(goal)} only at an "
            "unguarded position"
        )
        self.goal = goal


class OverlapError(Exception):
    def __init__(self, goal: Atom, names: list[str]):
        super().__init__(
            f"{len(names)} clause heads match {render_atom(goal)}: "
            + ", ".join(names)
        )
        self.goal = goal
        self.names = names


@dataclass
class Fuel:
    remaining: int

    def spend(self, n: int = 1):
        self.remaining -= n
        if self.remaining < 0:
            raise FuelExhausted()


# ---------------------------------------------------------------------------
# Clause selection policies


class ClausePolicy:
    """Orders the environment entries tried against one subgoal."""

    def candidates(self, env: AxiomEnv, goal: Atom, guard_depth: int):
        """Return (list of (entry, substitution), blocked_cohyp flag)."""
        raise NotImplementedError


class NewestFirst(ClausePolicy):
    """Plain resolution order: lemmas shadow axioms, newest entry first."""

    def candidates(self, env, goal, guard_depth):
        out = []
        for e in reversed(env.entries):
            if e.kind not in (EntryKind.AXIOM, EntryKind.LEMMA):
                continue
            s = match(e.formula.head, goal)
            if s is not None:
                out.append((e, s))
        return out, False


class CorecPolicy(ClausePolicy):
    """Order used while proving a Horn formula corecursively: hypotheses
    first (exact atom match), then the coinductive hypothesis when the
    subgoal sits strictly beneath at least one axiom or lemma application,
    then axioms and lemmas newest-first."""

    def candidates(self, env, goal, guard_depth):
        hyps = []
        cohyps = []
        rest = []
        blocked = False
        for e in reversed(env.entries):
            if e.kind is EntryKind.HYP:
                if e.formula.head == goal:
                    hyps.append((e, {}))
            elif e.kind is EntryKind.COHYP:
                s = match(e.formula.head, goal)
                if s is not None:
                    if guard_depth >= 1:
                        cohyps.append((e, s))
                    else:
                        blocked = True
            else:
                s = match(e.formula.head, goal)
                if s is not None:
                    rest.append((e, s))
        return hyps + cohyps + rest, blocked


NEWEST_FIRST = NewestFirst()


# ---------------------------------------------------------------------------
# Big-step resolution


@dataclass
class _Frame:
    ref: Optional[Evidence]  # None marks the root frame
    pending: list[tuple[Atom, int]]  # (subgoal, guard depth), leftmost first
    done: list[Evidence] = field(default_factory=list)

    def snapshot(self) -> "_Frame":
        return _Frame(self.ref, list(self.pending), list(self.done))


def resolve(
    env: AxiomEnv,
    goal: Atom,
    fuel: Fuel | int = 10_000,
    policy: ClausePolicy = NEWEST_FIRST,
    guard_depth: int = 0,
) -> Evidence:
    """Prove an atomic goal by term-matching resolution.

    Clause choice follows `policy` with chronological backtracking, one
    fuel unit per clause application.  Raises FuelExhausted when the budget
    runs out, Stuck when every alternative fails, and GuardViolation when
    failure is due only to the guardedness restriction.
    """
    if isinstance(fuel, int):
        fuel = Fuel(fuel)
    stack: list[_Frame] = [_Frame(None, [(goal, guard_depth)])]
    # each choice point: remaining candidates plus a copy of the whole stack
    choices: list[tuple[list, int, list[_Frame]]] = []
    stuck_at: Optional[Atom] = None
    saw_blocked = False

    def enter(entry: Entry, sigma, depth: int):
        fuel.spend()
        inc = 1 if entry.kind in (EntryKind.AXIOM, EntryKind.LEMMA) else 0
        pending = [(apply(sigma, b), depth + inc) for b in entry.formula.body]
        stack.append(_Frame(entry.ref(), pending))

    while True:
        top = stack[-1]
        if not top.pending:
            stack.pop()
            ev = top.done[0] if top.ref is None else mk_eapp(top.ref, *top.done)
            if not stack:
                return ev
            stack[-1].done.append(ev)
            continue
        atom, depth = top.pending.pop(0)
        cands, blocked = policy.candidates(env, atom, depth)
        saw_blocked = saw_blocked or blocked
        if cands:
            if len(cands) > 1:
                snap = [f.snapshot() for f in stack]
                snap[-1].pending.insert(0, (atom, depth))
                choices.append((cands, 1, snap))
            entry, sigma = cands[0]
            enter(entry, sigma, depth)
            continue
        # dead end: chronological backtracking
        if stuck_at is None and not blocked:
            stuck_at = atom
        while choices:
            cands, i, snap = choices.pop()
            if i < len(cands):
                stack = [f.snapshot() for f in snap]
                if i + 1 < len(cands):
                    choices.append((cands, i + 1, snap))
                atom, depth = stack[-1].pending.pop(0)
                entry, sigma = cands[i]
                enter(entry, sigma, depth)
                break
        else:
            if saw_blocked and stuck_at is None:
                raise GuardViolation(goal)
            raise Stuck(stuck_at if stuck_at is not None else goal)


# ---------------------------------------------------------------------------
# Small-step resolution

Path = tuple[int, ...]


def _child(node: Mixed, i: int) -> Mixed:
    if isinstance(node, EApp):
        return node.fun if i == 0 else node.arg
    return node.body  # ELam / EMu


def _rebuild(node: Mixed, i: int, child: Mixed) -> Mixed:
    if isinstance(node, EApp):
        return EApp(child, node.arg) if i == 0 else EApp(node.fun, child)
    if isinstance(node, ELam):
        return ELam(node.binder, child)
    return EMu(node.binder, child)


def subterm_at(state: Mixed, path: Path) -> Mixed:
    for i in path:
        state = _child(state, i)
    return state


def replace_at(state: Mixed, path: Path, new: Mixed) -> Mixed:
    nodes = [state]
    for i in path:
        nodes.append(_child(nodes[-1], i))
    out = new
    for node, i in zip(reversed(nodes[:-1]), reversed(path)):
        out = _rebuild(node, i, out)
    return out


def iter_atoms(state: Mixed):
    """Yield (path, atom) for every atom leaf, leftmost-outermost first."""
    stack: list[tuple[Mixed, Path]] = [(state, ())]
    while stack:
        node, path = stack.pop()
        if isinstance(node, MAtom):
            yield path, node.atom
        elif isinstance(node, EApp):
            stack.append((node.arg, path + (1,)))
            stack.append((node.fun, path + (0,)))
        elif isinstance(node, (ELam, EMu)):
            stack.append((node.body, path + (0,)))


def step(
    env: AxiomEnv, state: Mixed, policy: ClausePolicy = NEWEST_FIRST
) -> Optional[Mixed]:
    """One small resolution step: rewrite the leftmost reducible atom
    through the first clause the policy offers, or None when every atom is
    irreducible."""
    for path, atom in iter_atoms(state):
        cands, _ = policy.candidates(env, atom, 1)
        if not cands:
            continue
        entry, sigma = cands[0]
        new = mk_eapp(
            entry.ref(), *(MAtom(apply(sigma, b)) for b in entry.formula.body)
        )
        return replace_at(state, path, new)
    return None


def trace(
    env: AxiomEnv,
    goal: Atom,
    max_steps: int = 10_000,
    policy: ClausePolicy = NEWEST_FIRST,
) -> list[Mixed]:
    """Iterate `step` from the goal; the list ends at a normal form or
    after max_steps rewrites."""
    states: list[Mixed] = [MAtom(goal)]
    for _ in range(max_steps):
        nxt = step(env, states[-1], policy)
        if nxt is None:
            break
        states.append(nxt)
    return states


# ---------------------------------------------------------------------------
# Resolution trees


class NodeStatus(enum.Enum):
    INTERNAL = "internal"
    SUCCESS = "success"  # the box leaf under an empty-body clause
    STUCK = "stuck"  # no clause head matches; genuinely irreducible
    UNEXPANDED = "unexpanded"  # cut off by the depth or node bound


@dataclass
class ResolutionTree:
    """Position-indexed unfolding of a goal.

    Positions are tuples of 1-based child indices; () is the root.  For an
    expanded position w, clause_at[w] names the clause applied there, so
    the edge (w, i) carries the projection clause_at[w]^i.  Success leaves
    have no atom.  `formulas` snapshots the formula of every clause used,
    so the tree is self-contained for loop analysis.
    """

    root: Atom
    nodes: dict[Path, Optional[Atom]]
    status: dict[Path, NodeStatus]
    clause_at: dict[Path, str]
    formulas: dict[str, HornFormula]
    truncated: bool

    def children(self, pos: Path) -> list[Path]:
        out = []
        i = 1
        while (pos + (i,)) in self.nodes:
            out.append(pos + (i,))
            i += 1
        return out


def _unique_clause(env: AxiomEnv, goal: Atom):
    found = []
    for e in env.clauses():
        s = match(e.formula.head, goal)
        if s is not None:
            found.append((e, s))
    if len(found) > 1:
        raise OverlapError(goal, [e.name for e, _ in found])
    return found[0] if found else None


def build_tree(
    env: AxiomEnv, goal: Atom, depth_bound: int = 50, node_bound: int = 10_000
) -> ResolutionTree:
    """Breadth-first resolution tree, truncated at the given number of node
    levels (the root is level 0) and total node count.  Success leaves are
    always completed, so an empty-body clause never counts against the
    depth.  Raises OverlapError when two clause heads match one node."""
    if depth_bound <= 0 or node_bound <= 0:
        raise ValueError("tree bounds must be positive")
    nodes: dict[Path, Optional[Atom]] = {(): goal}
    status: dict[Path, NodeStatus] = {}
    clause_at: dict[Path, str] = {}
    formulas: dict[str, HornFormula] = {}
    truncated = False
    queue: deque[Path] = deque([()])
    count = 1
    while queue:
        pos = queue.popleft()
        atom = nodes[pos]
        found = _unique_clause(env, atom)
        if found is None:
            status[pos] = NodeStatus.STUCK
            continue
        entry, sigma = found
        depth = len(pos)
        if entry.formula.body and (depth + 1 >= depth_bound or count >= node_bound):
            status[pos] = NodeStatus.UNEXPANDED
            truncated = True
            continue
        status[pos] = NodeStatus.INTERNAL
        clause_at[pos] = entry.name
        formulas[entry.name] = entry.formula
        if not entry.formula.body:
            nodes[pos + (1,)] = None
            status[pos + (1,)] = NodeStatus.SUCCESS
            count += 1
            continue
        for i, b in enumerate(entry.formula.body, start=1):
            child = pos + (i,)
            nodes[child] = apply(sigma, b)
            count += 1
            queue.append(child)
    return ResolutionTree(goal, nodes, status, clause_at, formulas, truncated)

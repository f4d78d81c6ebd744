"""Batch driver: parse a declaration file, prove its lemma and auto goals
in order, and print the definitions in the standard report layout.

Exit codes: 0 when every goal is proven, 1 on a proof failure, 2 on parse,
scope or arity errors.  Diagnostics go to stderr; the report (or its JSON
mirror under --json) goes to stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Optional

from .corec import (
    DIRECTLY_PROVEN,
    INCONCLUSIVE,
    PROVEN,
    AutoReport,
    LoopAnalysis,
    ProofConfig,
    auto,
    prove_horn,
    wf_check,
)
from .evidence import (
    check_obs_equiv,
    corecursive_points,
    detect_simple_loop,
    observational_points,
)
from .parser import Decl, ParseError, ScopeError, SourceModule, parse_atom, parse_module
from .resolve import (
    AxiomEnv,
    FuelExhausted,
    GuardViolation,
    NodeStatus,
    Path,
    Stuck,
    axiom,
    lemma,
    trace as small_step_trace,
)
from .syntax import (
    Atom,
    EAxiom,
    EMu,
    Evidence,
    HornFormula,
    free_vars,
    match,
    render_atom,
    render_evidence,
    render_horn,
    subst_evidence,
)


@dataclass
class RunConfig:
    path: str
    fuel: int = 10_000
    tree_depth: int = 50
    max_lemma_rounds: int = 3
    trace: bool = False
    explain: bool = False
    obs_check: Optional[int] = None
    json: bool = False

    def __post_init__(self):
        if self.fuel <= 0 or self.tree_depth <= 0 or self.max_lemma_rounds <= 0:
            raise ValueError("all bounds must be positive")
        if self.obs_check is not None and self.obs_check < 0:
            raise ValueError("obs check count must be nonnegative")

    def proof_config(self) -> ProofConfig:
        return ProofConfig(
            fuel=self.fuel,
            max_lemma_rounds=self.max_lemma_rounds,
            tree_depth=self.tree_depth,
        )


@dataclass
class Definition:
    name: str
    formula: HornFormula
    shown: str  # evidence with the fixed point rendered as named recursion
    kind: str  # "axiom" | "lemma"


@dataclass
class GoalResult:
    name: str
    decl: Decl
    report: AutoReport
    # the environment the goal was proven in: its lemmas included, its own
    # entry excluded, so traces replay the proof instead of shortcutting
    # through it
    proof_env: Optional[AxiomEnv] = None
    steps: Optional[int] = None


@dataclass
class Session:
    """One engine run over one source module: sequential declaration
    processing with a global declaration counter for names."""

    module: SourceModule
    cfg: ProofConfig
    env: AxiomEnv = field(default_factory=AxiomEnv)
    definitions: list[Definition] = field(default_factory=list)
    goals: list[GoalResult] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    failed: bool = False

    def load_checks(self):
        """Arity consistency across every formula, plus duplicate and
        overlapping axiom warnings."""
        arity: dict[str, int] = {}
        for d in self.module.decls:
            for a in (d.formula.head, *d.formula.body):
                seen = arity.setdefault(a.pred, len(a.args))
                if seen != len(a.args):
                    raise ScopeError(
                        f"predicate {a.pred} used with arity {len(a.args)} "
                        f"and {seen}",
                        d.line,
                    )
        axioms = [d.formula for d in self.module.decls if d.kind == "axiom"]
        for i, f in enumerate(axioms):
            for g in axioms[:i]:
                if f == g:
                    self.warnings.append(
                        f"duplicate axiom formula {render_horn(f)}"
                    )
                elif (
                    match(f.head, g.head) is not None
                    or match(g.head, f.head) is not None
                ):
                    self.warnings.append(
                        f"overlapping heads: {render_atom(f.head)} and "
                        f"{render_atom(g.head)}"
                    )

    def process(self):
        next_id = len(self.module.decls)

        def namer() -> str:
            nonlocal next_id
            name = f"genLemm{next_id}"
            next_id += 1
            return name

        for i, d in enumerate(self.module.decls):
            if d.kind == "axiom":
                entry = axiom(f"Ax{i}", d.formula)
                self.env = self.env.extended(entry)
                self.definitions.append(
                    Definition(entry.name, d.formula, entry.name, "axiom")
                )
                continue
            name = f"goalLem{i}"
            if d.kind == "lemma":
                report = self._prove_lemma(d)
            else:
                report = auto(self.env, d.formula, self.cfg, namer)
            result = GoalResult(name, d, report)
            self.goals.append(result)
            if report.outcome not in (PROVEN, DIRECTLY_PROVEN):
                self.failed = True
                return
            for lem in report.lemmas:
                self.env = self.env.extended(lem)
                self.definitions.append(
                    Definition(
                        lem.name,
                        lem.formula,
                        _named_recursion(lem.evidence, lem.name),
                        "lemma",
                    )
                )
            result.proof_env = self.env
            entry = lemma(name, d.formula, report.evidence)
            self.env = self.env.extended(entry)
            self.definitions.append(
                Definition(
                    name, d.formula, _named_recursion(report.evidence, name), "lemma"
                )
            )
            if not d.formula.body and not free_vars(d.formula):
                result.steps = (
                    len(small_step_trace(result.proof_env, d.formula.head, self.cfg.fuel))
                    - 1
                )

    def _prove_lemma(self, d: Decl) -> AutoReport:
        try:
            ev = prove_horn(self.env, d.formula, self.cfg)
            return AutoReport(d.formula, DIRECTLY_PROVEN, evidence=ev)
        except (FuelExhausted, Stuck, GuardViolation) as ex:
            return AutoReport(
                d.formula, INCONCLUSIVE, reason=f"lemma proof failed: {ex}"
            )


def _named_recursion(ev: Evidence, name: str) -> str:
    """Render a definition body, unfolding its own fixed point to the
    definition name."""
    if isinstance(ev, EMu):
        ev = subst_evidence(ev.body, ev.binder, EAxiom(name))
    return render_evidence(ev)


# ---------------------------------------------------------------------------
# Report rendering


def _pos(p: Path) -> str:
    return "<" + ",".join(str(i) for i in p) + ">"


def _tree_lines(nodes, status, clause_at, base: Path, out: list[str], indent: str):
    order = sorted(nodes, key=lambda q: (len(q), q))
    for p in order:
        if base and p[: len(base)] != base:
            continue
        rel = len(p) - len(base)
        atom = nodes[p]
        label = clause_at.get(p)
        st = status.get(p)
        tag = f"  [{label}]" if label else ""
        if st is NodeStatus.SUCCESS:
            text = "[]"
        else:
            text = render_atom(atom)
            if st is NodeStatus.UNEXPANDED:
                tag = "  [critical]" if not label else tag
            elif st is NodeStatus.STUCK:
                tag = "  [irreducible]"
        out.append(f"{indent}{'  ' * rel}{_pos(p[len(base):])} {text}{tag}")


def _explain_lines(name: str, analysis: LoopAnalysis) -> list[str]:
    out = [f"Loop analysis for {name}"]
    root = analysis.closed.root if analysis.closed else ()
    inner = [t for t in analysis.triples if t.upper != root]
    shown = [t for t in analysis.triples if t.upper == root]
    out.append("  critical triples:")
    for t in shown:
        out.append(
            f"    {t.projection.clause}^{t.projection.index} between "
            f"{_pos(t.upper)} and {_pos(t.lower)}"
        )
    if inner:
        out.append(
            f"  note: {len(inner)} critical triple(s) whose upper is an inner "
            "node were ignored"
        )
    if analysis.closed is not None:
        cs = analysis.closed
        out.append(f"  closed subtree rooted at {_pos(cs.root)}:")
        sub_nodes = {p: cs.tree.nodes[p] for p in cs.positions}
        sub_status = {
            p: (
                NodeStatus.UNEXPANDED
                if p in cs.critical_leaves
                else cs.tree.status[p]
            )
            for p in cs.positions
        }
        sub_clauses = {
            p: cs.tree.clause_at[p]
            for p in cs.positions
            if p in cs.tree.clause_at and p not in cs.critical_leaves
        }
        _tree_lines(sub_nodes, sub_status, sub_clauses, cs.root, out, "    ")
    if analysis.abstract is not None:
        at = analysis.abstract
        out.append("  abstract tree:")
        _tree_lines(at.nodes, at.status, at.clause_at, (), out, "    ")
    return out


def _goal_failure_lines(g: GoalResult) -> list[str]:
    out = [
        f"Proof failed for {g.decl.kind} {render_horn(g.decl.formula)}",
        f"  outcome: {g.report.outcome}",
    ]
    if g.report.candidate is not None:
        out.append(
            f"  candidate: {render_horn(g.report.candidate.formula)}"
        )
    if g.report.reason:
        out.append(f"  reason: {g.report.reason}")
    return out


def _report_text(session: Session, cfg: RunConfig) -> str:
    lines = ["Parsing success!", "Type Checking success!", "Program Definitions"]
    for d in session.definitions:
        lines.append(f"  {d.name} :: {render_horn(d.formula)}")
        lines.append(f"  = {d.shown}")
    lines.append("Axioms")
    for d in reversed([d for d in session.definitions if d.kind == "axiom"]):
        lines.append(f"  {d.name} :: {render_horn(d.formula)}")
    lines.append("Lemmas")
    for d in reversed([d for d in session.definitions if d.kind == "lemma"]):
        lines.append(f"  {d.name} :: {render_horn(d.formula)}")
    if cfg.explain:
        for g in session.goals:
            if g.report.analysis is not None:
                lines.extend(_explain_lines(g.name, g.report.analysis))
    if cfg.trace:
        for g in session.goals:
            f = g.decl.formula
            if (
                g.report.outcome in (PROVEN, DIRECTLY_PROVEN)
                and g.proof_env is not None
                and not f.body
                and not free_vars(f)
            ):
                lines.append(f"Trace for {g.name} {render_atom(f.head)}")
                for state in small_step_trace(g.proof_env, f.head, cfg.fuel):
                    lines.append(f"  {render_evidence(state)}")
    if cfg.obs_check is not None:
        ax_env = AxiomEnv([e for e in session.env if e.kind.name == "AXIOM"])
        for g in session.goals:
            f = g.decl.formula
            if not f.body and not free_vars(f):
                lines.extend(
                    _obs_lines(ax_env, f.head, cfg.obs_check, session.cfg)
                )
    for g in session.goals:
        if g.report.outcome not in (PROVEN, DIRECTLY_PROVEN):
            lines.extend(_goal_failure_lines(g))
    return "\n".join(lines) + "\n"


def emit_json(session: Session, cfg: RunConfig, exit_code: int) -> str:
    """Machine-readable mirror of the text report."""
    defs = [
        {
            "name": d.name,
            "formula": render_horn(d.formula),
            "evidence": d.shown,
            "kind": d.kind,
        }
        for d in session.definitions
    ]
    goals = []
    for g in session.goals:
        goals.append(
            {
                "name": g.name,
                "declared": g.decl.kind,
                "formula": render_horn(g.decl.formula),
                "outcome": g.report.outcome,
                "evidence": (
                    render_evidence(g.report.evidence)
                    if g.report.evidence is not None
                    else None
                ),
                "lemmas": [lem.name for lem in g.report.lemmas],
                "candidate": (
                    render_horn(g.report.candidate.formula)
                    if g.report.candidate is not None
                    else None
                ),
                "reason": g.report.reason or None,
                "steps": g.steps,
            }
        )
    doc = {
        "module": session.module.name,
        "definitions": defs,
        "axioms": [d.name for d in reversed(session.definitions) if d.kind == "axiom"],
        "lemmas": [d.name for d in reversed(session.definitions) if d.kind == "lemma"],
        "goals": goals,
        "warnings": session.warnings,
        "exit_code": exit_code,
    }
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Observational equivalence report


def _obs_lines(env: AxiomEnv, goal: Atom, n: int, cfg: ProofConfig) -> list[str]:
    out = [f"Observational equivalence for {render_atom(goal)} (n={n})"]
    loop = detect_simple_loop(env, goal, cfg.fuel)
    if loop is None:
        out.append("  no simple loop detected")
        return out
    formula = HornFormula(loop.hypotheses, goal)
    out.append(f"  loop formula: {render_horn(formula)}")
    try:
        ev = prove_horn(env, formula, cfg)
    except (FuelExhausted, Stuck, GuardViolation) as ex:
        out.append(f"  loop formula not provable: {ex}")
        return out
    out.append(f"  evidence: {render_evidence(ev)}")
    obs = observational_points(loop, n, cfg.fuel)
    cor = corecursive_points(ev, loop.hypotheses, n, cfg.fuel)
    for m in range(1, n + 1):
        out.append(f"  m={m}")
        o = render_evidence(obs[m - 1].context) if m <= len(obs) else "(none)"
        c = render_evidence(cor[m - 1].context) if m <= len(cor) else "(none)"
        out.append(f"    resolution : {o}")
        out.append(f"    evidence   : {c}")
    ok, why = check_obs_equiv(env, loop, ev, n, cfg.fuel)
    out.append(f"  equivalent: {'yes' if ok else 'no'}")
    if why:
        out.append(f"  {why}")
    return out


# ---------------------------------------------------------------------------
# Entry points


def run(cfg: RunConfig) -> tuple[int, str, str]:
    """The `check` behavior: returns (exit code, stdout text, stderr text)."""
    err_lines: list[str] = []
    try:
        with open(cfg.path, encoding="utf-8") as f:
            text = f.read()
    except OSError as ex:
        return 2, "", f"error: {ex}\n"
    try:
        module = parse_module(text)
    except ParseError as ex:
        return 2, "", f"{cfg.path}:{ex}\n"
    except ScopeError as ex:
        return 2, "", f"{cfg.path}:{ex}\n"
    session = Session(module, cfg.proof_config())
    try:
        session.load_checks()
    except ScopeError as ex:
        return 2, "", f"{cfg.path}:{ex}\n"
    err_lines.extend(f"warning: {w}" for w in session.warnings)
    session.process()
    ok, failures = wf_check(session.env)
    err_lines.extend(f"wf: {msg}" for msg in failures)
    code = 1 if (session.failed or not ok) else 0
    out = (
        emit_json(session, cfg, code)
        if cfg.json
        else _report_text(session, cfg)
    )
    err = "".join(line + "\n" for line in err_lines)
    return code, out, err


def run_trace(path: str, goal_text: str, steps: int, fuel: int = 10_000) -> tuple[int, str, str]:
    try:
        with open(path, encoding="utf-8") as f:
            module = parse_module(f.read())
        goal = parse_atom(goal_text)
    except (OSError, ParseError, ScopeError) as ex:
        return 2, "", f"error: {ex}\n"
    session = Session(module, ProofConfig(fuel=fuel))
    session.process()
    err = ""
    if session.failed:
        err = "warning: some declarations failed; tracing under the partial environment\n"
    states = small_step_trace(session.env, goal, steps)
    out = "".join(render_evidence(s) + "\n" for s in states)
    return 0, out, err


def run_obs(path: str, goal_text: str, n: int, fuel: int = 10_000) -> tuple[int, str, str]:
    try:
        with open(path, encoding="utf-8") as f:
            module = parse_module(f.read())
        goal = parse_atom(goal_text)
    except (OSError, ParseError, ScopeError) as ex:
        return 2, "", f"error: {ex}\n"
    env = AxiomEnv()
    for i, d in enumerate(module.decls):
        if d.kind == "axiom":
            env = env.extended(axiom(f"Ax{i}", d.formula))
    cfg = ProofConfig(fuel=fuel)
    lines = _obs_lines(env, goal, n, cfg)
    code = 0 if any(l.strip() == "equivalent: yes" for l in lines) else 1
    return code, "".join(l + "\n" for l in lines), ""


def _build_arg_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cohorn")
    sub = p.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="prove every lemma and auto goal in a file")
    check.add_argument("file")
    check.add_argument("--fuel", type=int, default=10_000)
    check.add_argument("--depth", type=int, default=50)
    check.add_argument("--rounds", type=int, default=3)
    check.add_argument("--trace", action="store_true")
    check.add_argument("--explain", action="store_true")
    check.add_argument("--obs-check", type=int, default=None, metavar="N")
    check.add_argument("--json", action="store_true")

    tr = sub.add_parser("trace", help="dump the small-step resolution trace of a goal")
    tr.add_argument("file")
    tr.add_argument("--goal", required=True)
    tr.add_argument("--steps", type=int, default=100)
    tr.add_argument("--fuel", type=int, default=10_000)

    obs = sub.add_parser(
        "obs", help="compare resolution and evidence reduction on a simple loop"
    )
    obs.add_argument("file")
    obs.add_argument("--goal", required=True)
    obs.add_argument("-n", type=int, default=3)
    obs.add_argument("--fuel", type=int, default=10_000)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 50_000))
    args = _build_arg_parser().parse_args(argv)
    if args.command == "check":
        cfg = RunConfig(
            path=args.file,
            fuel=args.fuel,
            tree_depth=args.depth,
            max_lemma_rounds=args.rounds,
            trace=args.trace,
            explain=args.explain,
            obs_check=args.obs_check,
            json=args.json,
        )
        code, out, err = run(cfg)
    elif args.command == "trace":
        code, out, err = run_trace(args.file, args.goal, args.steps, args.fuel)
    else:
        code, out, err = run_obs(args.file, args.goal, args.n, args.fuel)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Reference interpreter: direct execution of the structural rewrite rules.

Each statement form has one derivation step.  A step either completes
instantaneously (ticked=False) or pauses (ticked=True); `react` chains steps
until the program pauses or terminates, which is one logical tick.  Guard
expressions always read the *previous* tick's signal statuses, so reactions
are insensitive to the order of same-tick updates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .frontend import (
    Abort, And, Ast, CheckedAst, Emit, IfElse, Loop, Not, Nothing, Or, Par,
    Pause, Ref, Seq, SigExpr, SignalDecl, ast_size,
)
from .trace import TickTrace


class UnboundSignal(Exception):
    pass


class KindMismatch(Exception):
    pass


class UnknownInputSignal(Exception):
    pass


class DivergenceGuard(Exception):
    """Step budget exceeded: the validator let an instantaneous cycle through."""


@dataclass
class SignalRecord:
    kind: str
    curr: bool = False
    prev: bool = False


class SignalEnv:
    """Signal store: current and previous per-tick boolean statuses.

    Reads of previous statuses are counted so tests can assert that guard
    evaluation never consults current statuses.
    """

    def __init__(self):
        self.records: dict[str, SignalRecord] = {}
        self.prev_reads = 0

    def declare(self, name: str, kind: str):
        rec = self.records.get(name)
        if rec is None:
            self.records[name] = SignalRecord(kind)
        elif rec.kind != kind:
            raise KindMismatch(f"signal '{name}' re-declared as {kind}, was {rec.kind}")
        # re-declaration keeps both statuses

    def set_curr(self, name: str):
        try:
            self.records[name].curr = True
        except KeyError:
            raise UnboundSignal(name) from None

    def read_prev(self, name: str) -> bool:
        self.prev_reads += 1
        try:
            return self.records[name].prev
        except KeyError:
            raise UnboundSignal(name) from None

    def end_of_tick(self):
        for rec in self.records.values():
            rec.prev = rec.curr
            rec.curr = False

    def currs(self, kind: Optional[str] = None) -> frozenset[str]:
        return frozenset(n for n, r in self.records.items()
                         if r.curr and (kind is None or r.kind == kind))

    def copy(self) -> "SignalEnv":
        env = SignalEnv()
        env.records = {n: SignalRecord(r.kind, r.curr, r.prev)
                       for n, r in self.records.items()}
        return env

    def merge_from(self, other: "SignalEnv"):
        """Union-merge another environment's records (parallel arm results)."""
        for name, rec in other.records.items():
            mine = self.records.get(name)
            if mine is None:
                self.records[name] = SignalRecord(rec.kind, rec.curr, rec.prev)
            else:
                if mine.kind != rec.kind:
                    raise KindMismatch(name)
                mine.curr = mine.curr or rec.curr

    def snapshot(self) -> dict[str, tuple[bool, bool]]:
        return {n: (r.curr, r.prev) for n, r in sorted(self.records.items())}


class _Terminated:
    def __repr__(self):
        return "Terminated"


TERMINATED = _Terminated()

Residual = Union[Ast, _Terminated]


@dataclass
class StepOutcome:
    env: SignalEnv
    residual: Residual
    ticked: bool


def eval_expr(env: SignalEnv, e: SigExpr) -> bool:
    """Signal expressions are judged against previous-tick statuses only."""
    match e:
        case Ref(name):
            return env.read_prev(name)
        case Not(arg):
            return not eval_expr(env, arg)
        case And(a, b):
            return eval_expr(env, a) and eval_expr(env, b)
        case Or(a, b):
            return eval_expr(env, a) or eval_expr(env, b)
    raise TypeError(e)


def declare(env: SignalEnv, name: str, kind: str) -> SignalEnv:
    env.declare(name, kind)
    return env


def sos_step(env: SignalEnv, stmt: Residual) -> StepOutcome:
    """One derivation of the rewrite relation.  `stmt` must not be Terminated."""
    assert not isinstance(stmt, _Terminated)
    match stmt:
        case Nothing():
            return StepOutcome(env, TERMINATED, False)
        case Emit(name, _):
            env.set_curr(name)
            return StepOutcome(env, TERMINATED, False)
        case SignalDecl(kind, names, _):
            for name in names:
                env.declare(name, kind)
            return StepOutcome(env, TERMINATED, False)
        case Pause(label, span):
            # pauses rewrite to the syntactic no-op and carry the tick
            return StepOutcome(env, Nothing(span=span), True)
        case Seq(a, b, span):
            out = sos_step(env, a)
            if out.ticked:
                assert not isinstance(out.residual, _Terminated)
                return StepOutcome(out.env, Seq(out.residual, b, span), True)
            if isinstance(out.residual, _Terminated):
                return StepOutcome(out.env, b, False)
            return StepOutcome(out.env, Seq(out.residual, b, span), False)
        case IfElse(cond, then, orelse, _):
            taken = then if eval_expr(env, cond) else orelse
            return StepOutcome(env, taken, False)
        case Loop(body, span):
            return StepOutcome(env, Seq(body, stmt, span), False)
        case Abort(cond, body, span, resumed):
            if resumed and eval_expr(env, cond):
                # pre-emption leaves the signal state untouched
                return StepOutcome(env, TERMINATED, False)
            out = sos_step(env, body)
            if out.ticked:
                assert not isinstance(out.residual, _Terminated)
                return StepOutcome(out.env, Abort(cond, out.residual, span, resumed=True), True)
            if isinstance(out.residual, _Terminated):
                return StepOutcome(out.env, TERMINATED, False)
            return StepOutcome(out.env, Abort(cond, out.residual, span, resumed), False)
        case Par(arms, span):
            # each arm runs to its own pause or completion against a copy of
            # the incoming state; current-status updates are then union-merged
            merged = env.copy()
            new_arms: list[Ast] = []
            any_ticked = False
            for arm in arms:
                arm_env, residual = react(env.copy(), arm)
                merged.merge_from(arm_env)
                if isinstance(residual, _Terminated):
                    new_arms.append(Nothing())
                else:
                    new_arms.append(residual)
                    any_ticked = True
            if not any_ticked:
                return StepOutcome(merged, TERMINATED, False)
            return StepOutcome(merged, Par(tuple(new_arms), span), True)
    raise TypeError(stmt)


def react(env: SignalEnv, stmt: Residual) -> tuple[SignalEnv, Residual]:
    """Run derivations until the program pauses or terminates (one tick)."""
    if isinstance(stmt, _Terminated):
        return env, stmt
    budget = 10 * ast_size(stmt)
    for _ in range(budget):
        out = sos_step(env, stmt)
        env, stmt = out.env, out.residual
        if out.ticked or isinstance(stmt, _Terminated):
            return env, stmt
    raise DivergenceGuard(f"no pause after {budget} steps; instantaneous loop?")


def end_of_tick(env: SignalEnv) -> SignalEnv:
    env.end_of_tick()
    return env


def initial_env(signals: dict[str, str]) -> SignalEnv:
    """Pre-seed records for all statically declared signals (all absent)."""
    env = SignalEnv()
    for name, kind in signals.items():
        env.declare(name, kind)
    return env


def inject_inputs(env: SignalEnv, inputs: frozenset[str]):
    for name in sorted(inputs):
        rec = env.records.get(name)
        if rec is None or rec.kind != "input":
            raise UnknownInputSignal(name)
        rec.curr = True


def run_trace_sos(checked: CheckedAst, inputs: TickTrace) -> TickTrace:
    """Interpret the program over the input trace; one output set per tick.

    Always performs tick 1 (the initialisation reaction).  Stops after the
    last input tick or at termination, whichever comes first.
    """
    env = initial_env(checked.signals)
    residual: Residual = checked.ast
    out = TickTrace()
    n_ticks = max(1, len(inputs.ticks))
    for t in range(1, n_ticks + 1):
        present = inputs.ticks[t - 1] if t <= len(inputs.ticks) else frozenset()
        inject_inputs(env, present)
        env, residual = react(env, residual)
        out.ticks.append(env.currs("output"))
        env.end_of_tick()
        if isinstance(residual, _Terminated):
            out.terminated_at = t
            break
    return out

"""Random program generator and differential runner (SOS vs FSM).

Programs are valid by construction: loop bodies always pause on every path,
emits target outputs or locals, and guards mention declared signals only.
The generator's envelope (statement depth, parallel groups, signal count)
matches the differential-testing envelope used by the acceptance suite.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .frontend import (
    Abort, And, Ast, CheckedAst, Emit, IfElse, Loop, Not, Nothing, Or, Par,
    Pause, Ref, Seq, SigExpr, SignalDecl, validate, _is_instantaneous,
)
from .optimize import eliminate_dummies
from .rewrite import rewrite_program
from .semantics import run_trace_sos
from .simulate import run_trace_fsm
from .trace import TickTrace


@dataclass(frozen=True)
class GenParams:
    max_depth: int = 5
    max_pars: int = 3
    max_signals: int = 8
    max_arms: int = 3


class _Gen:
    def __init__(self, rng: random.Random, params: GenParams):
        self.rng = rng
        self.params = params
        self.pars_left = params.max_pars
        n_inputs = rng.randint(1, 3)
        n_outputs = rng.randint(1, 3)
        n_locals = rng.randint(0, max(0, params.max_signals - n_inputs - n_outputs))
        self.inputs = [f"I{i}" for i in range(n_inputs)]
        self.outputs = [f"O{i}" for i in range(n_outputs)]
        self.locals = [f"L{i}" for i in range(n_locals)]

    def expr(self, depth: int = 2) -> SigExpr:
        names = self.inputs + self.outputs + self.locals
        if depth == 0 or self.rng.random() < 0.45:
            return Ref(self.rng.choice(names))
        pick = self.rng.randrange(3)
        if pick == 0:
            return Not(self.expr(depth - 1))
        if pick == 1:
            return And(self.expr(depth - 1), self.expr(depth - 1))
        return Or(self.expr(depth - 1), self.expr(depth - 1))

    def leaf(self) -> Ast:
        pick = self.rng.randrange(4)
        if pick == 0:
            return Nothing()
        if pick == 1 and (self.outputs or self.locals):
            return Emit(self.rng.choice(self.outputs + self.locals))
        return Pause()

    def stmt(self, depth: int) -> Ast:
        if depth == 0:
            return self.leaf()
        pick = self.rng.random()
        if pick < 0.30:
            return Seq(self.stmt(depth - 1), self.stmt(depth - 1))
        if pick < 0.45:
            return Loop(self.pausing(self.stmt(depth - 1)))
        if pick < 0.60:
            return IfElse(self.expr(), self.stmt(depth - 1), self.stmt(depth - 1))
        if pick < 0.75:
            return Abort(self.expr(), self.stmt(depth - 1))
        if pick < 0.85 and self.pars_left > 0:
            self.pars_left -= 1
            n = self.rng.randint(2, self.params.max_arms)
            return Par(tuple(self.stmt(depth - 1) for _ in range(n)))
        return self.leaf()

    def pausing(self, s: Ast) -> Ast:
        """Loop bodies must pause on every control path."""
        if not _is_instantaneous(s):
            return s
        return Seq(s, Pause()) if self.rng.random() < 0.5 else Seq(Pause(), s)

    def program(self) -> Ast:
        decls: list[Ast] = [SignalDecl("input", (n,)) for n in self.inputs]
        decls += [SignalDecl("output", (n,)) for n in self.outputs]
        decls += [SignalDecl("local", (n,)) for n in self.locals]
        body = self.stmt(self.params.max_depth)
        out = body
        for d in reversed(decls):
            out = Seq(d, out)
        return out


def gen_program(rng: random.Random, params: GenParams = GenParams()) -> CheckedAst:
    while True:
        gen = _Gen(rng, params)
        try:
            return validate(gen.program())
        except Exception:  # pragma: no cover - generator is valid by construction
            continue


def gen_trace(rng: random.Random, input_names: list[str], length: int,
              density: float = 0.4) -> TickTrace:
    return TickTrace.of(*[{n for n in input_names if rng.random() < density}
                          for _ in range(length)])


@dataclass
class Discrepancy:
    program: CheckedAst
    trace: TickTrace
    sos: TickTrace
    fsm: TickTrace


def differential_run(checked: CheckedAst, trace: TickTrace) -> Optional[Discrepancy]:
    """Run both execution paths; report the first disagreement, if any."""
    g, threads, _ = rewrite_program(checked)
    g2, threads2 = eliminate_dummies(g, threads)
    sos = run_trace_sos(checked, trace)
    fsm = run_trace_fsm(g2, threads2, trace)
    if sos != fsm:
        return Discrepancy(checked, trace, sos, fsm)
    return None


def run_fuzz(seed: int, count: int, ticks: int,
             params: GenParams = GenParams()) -> list[Discrepancy]:
    rng = random.Random(seed)
    found: list[Discrepancy] = []
    for _ in range(count):
        checked = gen_program(rng, params)
        inputs = sorted(n for n, k in checked.signals.items() if k == "input")
        trace = gen_trace(rng, inputs, ticks)
        bad = differential_run(checked, trace)
        if bad is not None:
            found.append(bad)
    return found

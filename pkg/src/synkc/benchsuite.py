"""In-repo benchmark programs and their frozen golden traces.

ABRO is the classic reset-join example; the other three are original
programs sized to match published benchmark shapes (threads x states):
conveyor 6x31, router 9x33, watchdogs 15x34.  Golden outputs are generated
by the reference interpreter and committed; a suite test regenerates them to
catch semantic drift.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .frontend import CheckedAst, parse_source, validate

BENCH_DIR = Path(__file__).resolve().parents[2] / "benchmarks"
TRACE_DIR = BENCH_DIR / "traces"

BENCHMARK_NAMES = ["abro", "conveyor", "router", "watchdogs"]


@dataclass(frozen=True)
class Benchmark:
    name: str
    program: Path
    traces: tuple[tuple[Path, Path], ...]  # (input, golden output) pairs

    def source(self) -> str:
        return self.program.read_text(encoding="utf-8")

    def checked(self) -> CheckedAst:
        return validate(parse_source(self.source()))


def suite() -> list[Benchmark]:
    benches = []
    for name in BENCHMARK_NAMES:
        program = BENCH_DIR / f"{name}.syn"
        pairs = []
        for inp in sorted(TRACE_DIR.glob(f"{name}_*.trace")):
            if inp.name.endswith(".golden.trace"):
                continue
            golden = inp.with_name(inp.name[:-len(".trace")] + ".golden.trace")
            pairs.append((inp, golden))
        benches.append(Benchmark(name, program, tuple(pairs)))
    return benches

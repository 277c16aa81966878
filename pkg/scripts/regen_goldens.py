#!/usr/bin/env python3
"""Author benchmark input traces (seeded) and freeze golden outputs from the
reference interpreter.  Hand-written scenario traces are left untouched if
they already exist; randomized ones are regenerated deterministically."""

import random
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from synkc.benchsuite import BENCH_DIR, TRACE_DIR, BENCHMARK_NAMES  # noqa: E402
from synkc.frontend import parse_source, validate  # noqa: E402
from synkc.semantics import run_trace_sos  # noqa: E402
from synkc.trace import format_trace, parse_trace  # noqa: E402

SCENARIOS = {
    "abro_n1": "A B\n-\n",
    "abro_n2": "A B R\n-\n",
    "abro_n3": "A\nB\nR\n",
}

RANDOM_CASES = {  # name -> (benchmark, seed, ticks, density)
    "abro_rand": ("abro", 11, 60, 0.35),
    "conveyor_run": ("conveyor", 21, 60, 0.25),
    "conveyor_rand": ("conveyor", 22, 80, 0.45),
    "router_run": ("router", 31, 60, 0.25),
    "router_rand": ("router", 32, 80, 0.45),
    "watchdogs_run": ("watchdogs", 41, 60, 0.25),
    "watchdogs_rand": ("watchdogs", 42, 80, 0.45),
}


def main():
    TRACE_DIR.mkdir(parents=True, exist_ok=True)
    checked = {}
    for name in BENCHMARK_NAMES:
        src = (BENCH_DIR / f"{name}.syn").read_text(encoding="utf-8")
        checked[name] = validate(parse_source(src))

    for case, text in SCENARIOS.items():
        (TRACE_DIR / f"{case}.trace").write_text(text, encoding="utf-8")

    for case, (bench, seed, ticks, density) in RANDOM_CASES.items():
        rng = random.Random(seed)
        inputs = sorted(n for n, k in checked[bench].signals.items()
                        if k == "input")
        lines = []
        for _ in range(ticks):
            present = sorted(n for n in inputs if rng.random() < density)
            lines.append(" ".join(present) if present else "-")
        (TRACE_DIR / f"{case}.trace").write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8")

    for path in sorted(TRACE_DIR.glob("*.trace")):
        if path.name.endswith(".golden.trace"):
            continue
        bench = path.name.split("_")[0]
        trace = parse_trace(path.read_text(encoding="utf-8"))
        out = run_trace_sos(checked[bench], trace)
        golden = path.with_name(path.name[:-len(".trace")] + ".golden.trace")
        golden.write_text(format_trace(out), encoding="utf-8")
        print(f"{golden.name}: {len(out.ticks)} ticks"
              + (f", terminated at {out.terminated_at}" if out.terminated_at else ""))


if __name__ == "__main__":
    main()

"""Tick-trace format: one line per tick, `-` for an empty set, `#` comments.

The same text format drives the SOS interpreter, the FSM simulator, and the
generated back-end binaries, so all three can be compared byte for byte.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class TraceSyntaxError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class TickTrace:
    ticks: list[frozenset[str]] = field(default_factory=list)
    terminated_at: Optional[int] = None  # 1-based tick of termination, if any

    def __len__(self) -> int:
        return len(self.ticks)

    @staticmethod
    def of(*ticks: Iterable[str]) -> "TickTrace":
        return TickTrace([frozenset(t) for t in ticks])

    def extended_to(self, n: int) -> "TickTrace":
        """Truncate or zero-extend with empty ticks to exactly n ticks."""
        ticks = self.ticks[:n] + [frozenset()] * max(0, n - len(self.ticks))
        return TickTrace(ticks)


def parse_trace(text: str) -> TickTrace:
    if text and not text.endswith("\n"):
        raise TraceSyntaxError("missing final newline", text.count("\n") + 1)
    ticks: list[frozenset[str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#"):
            continue
        if line == "-":
            ticks.append(frozenset())
            continue
        names = line.split()
        if not names:
            raise TraceSyntaxError("empty tick line (use '-' for an empty set)", lineno)
        for name in names:
            if not NAME_RE.fullmatch(name):
                raise TraceSyntaxError(f"invalid signal name {name!r}", lineno)
        ticks.append(frozenset(names))
    return TickTrace(ticks)


def format_trace(trace: TickTrace) -> str:
    lines = [" ".join(sorted(tick)) if tick else "-" for tick in trace.ticks]
    return "".join(line + "\n" for line in lines)

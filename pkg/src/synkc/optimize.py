"""Graph cleanup: chain-compress unneeded dummy nodes, then verify that
every state's outgoing guards are deterministic and exhaustive.

Fusion only touches plain dummies with a single predecessor, so guard
composition stays linear and the pass is order-insensitive.  Dummies kept
alive either carry an essential role (init, fork, parallel ends, abort
exits) or merge several control paths (in-degree at least two).
"""

from __future__ import annotations

import itertools
import random
from typing import Optional

from .frontend import And, DUMMY_SPAN, Diagnostic, Not, Or, Ref, SigExpr
from .fsmgraph import (
    Edge, FsmGraph, Guard, JoinKind, Node, NodeId, Role, ThreadTable, conjoin,
    node_display,
)


def eliminate_dummies(g: FsmGraph, threads: ThreadTable,
                      order_seed: Optional[int] = None
                      ) -> tuple[FsmGraph, ThreadTable]:
    """Fresh graph and thread table with fusible dummies compressed away.

    A dummy is fusible when it is plain (no essential role), is not a state,
    and has exactly one incoming edge and at least one outgoing edge.  Its
    predecessor inherits the outgoing edges with conjoined guards and
    concatenated actions, spliced in place to preserve edge order.
    Fusion never changes any other node's in-degree, so the candidate set is
    fixed up front and any processing order converges to the same graph.
    """
    g = g.copy()
    threads = threads.copy()

    incoming: dict[NodeId, list[Edge]] = {n.id: [] for n in g.nodes}
    for edges in g.out:
        for e in edges:
            incoming[e.dst].append(e)

    candidates = [n.id for n in g.nodes
                  if n.alive and not n.is_state and n.role is Role.PLAIN
                  and len(incoming[n.id]) == 1
                  and incoming[n.id][0].src != n.id
                  and len(g.out[n.id]) >= 1]
    if order_seed is not None:
        random.Random(order_seed).shuffle(candidates)

    for dummy in candidates:
        (in_edge,) = incoming[dummy]
        src = in_edge.src
        fused = []
        for out_edge in g.out[dummy]:
            new_edge = Edge(src, out_edge.dst,
                            conjoin(in_edge.guard, out_edge.guard),
                            in_edge.actions + out_edge.actions,
                            priority=0)
            incoming[out_edge.dst].remove(out_edge)
            incoming[out_edge.dst].append(new_edge)
            fused.append(new_edge)
        pos = g.out[src].index(in_edge)
        g.replace_out_edges(src, g.out[src][:pos] + fused + g.out[src][pos + 1:])
        g.out[dummy] = []
        incoming[dummy] = []
        g.nodes[dummy].alive = False
        for th in threads.threads:
            if th.init == dummy:
                th.init = fused[0].dst if len(fused) == 1 else None

    # fusion can leave a lower-priority edge with a guard identical to an
    # earlier one (e.g. a loop back-edge next to an abort's termination
    # edge); first-match evaluation can never reach it, so drop it.  Edges
    # only compete within a match class: everything at a state node, but per
    # target thread at a dummy (fork entries and the structural edges into a
    # join state are taken independently, not first-match).
    for node in g.nodes:
        if not node.alive:
            continue
        seen: set = set()
        kept = []
        for e in sorted(g.out[node.id], key=lambda e: e.priority):
            cls = None if node.is_state else g.nodes[e.dst].thread
            key = (cls, e.guard)
            if key in seen:
                continue
            seen.add(key)
            kept.append(e)
        if len(kept) != len(g.out[node.id]):
            g.replace_out_edges(node.id, kept)
    return g, threads


# ---------------------------------------------------------------------------
# determinism checking

MAX_ENUMERATED_SIGNALS = 16


def _holds(e: Optional[SigExpr], val: dict[str, bool]) -> bool:
    match e:
        case None:
            return True
        case Ref(name):
            return val[name]
        case Not(arg):
            return not _holds(arg, val)
        case And(a, b):
            return _holds(a, val) and _holds(b, val)
        case Or(a, b):
            return _holds(a, val) or _holds(b, val)
    raise TypeError(e)


def _guard_fires(guard: Guard, val: dict[str, bool], alldone: Optional[bool]) -> bool:
    if not _holds(guard.sig, val):
        return False
    if guard.join is None:
        return True
    assert alldone is not None
    return alldone if guard.join.kind is JoinKind.ALL_DONE else not alldone


def check_determinism(g: FsmGraph) -> list[Diagnostic]:
    """Exhaustively evaluate every state's guard set over all valuations of
    the previous-tick signals it mentions (and both join outcomes)."""
    diags: list[Diagnostic] = []
    for node in g.state_nodes():
        edges = sorted(g.out[node.id], key=lambda e: e.priority)
        label = node_display(node)
        if not edges:
            diags.append(Diagnostic(
                "StuckState", f"state {label} has no outgoing edges", DUMMY_SPAN))
            continue
        signals = sorted(set().union(*(e.guard.signals() for e in edges)))
        if len(signals) > MAX_ENUMERATED_SIGNALS:
            diags.append(Diagnostic(
                "NotChecked",
                f"state {label} guards mention {len(signals)} signals; not enumerated",
                DUMMY_SPAN, severity="warning"))
            continue
        join_cases = [True, False] if any(e.guard.join for e in edges) else [None]
        stuck = ambiguous = None
        for bits in itertools.product([False, True], repeat=len(signals)):
            val = dict(zip(signals, bits))
            for alldone in join_cases:
                fired = [e for e in edges if _guard_fires(e.guard, val, alldone)]
                if not fired and stuck is None:
                    stuck = (val, alldone)
                elif len(fired) > 1 and ambiguous is None:
                    ambiguous = (val, alldone)
        if stuck is not None:
            diags.append(Diagnostic(
                "StuckState",
                f"state {label} has no enabled edge under {_fmt_val(*stuck)}",
                DUMMY_SPAN))
        if ambiguous is not None:
            # priority order resolves first-match; informational only
            diags.append(Diagnostic(
                "AmbiguousState",
                f"state {label} has several enabled edges under "
                f"{_fmt_val(*ambiguous)}; priority order applies",
                DUMMY_SPAN, severity="info"))
    return diags


def _fmt_val(val: dict[str, bool], alldone: Optional[bool]) -> str:
    parts = [f"{k}={'T' if v else 'F'}" for k, v in sorted(val.items())]
    if alldone is not None:
        parts.append(f"all-done={'T' if alldone else 'F'}")
    return "{" + ", ".join(parts) + "}"


def hard_errors(diags: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.severity == "error"]

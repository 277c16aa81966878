"""Syntactic graph rewrites: one rule per kernel construct, applied in a
single recursive pass over the AST.

Every construct contributes at most three nodes, so the generated graph is
linear in the program size regardless of how many parallel blocks it has.
Parallel joins never enumerate state products: each arm becomes its own
thread and the join is a single ND state guarded by a group-done test.
"""

from __future__ import annotations

from dataclasses import dataclass

from .frontend import (
    Abort, Ast, CheckedAst, Emit, IfElse, Loop, Nothing, Par, Pause, Seq,
    SigExpr, SignalDecl, ast_size, count_pars,
)
from .fsmgraph import (
    Action, FsmGraph, Guard, Join, JoinKind, NodeId, Role, ThreadId,
    ThreadTable, TRUE_GUARD, guard_not, new_graph,
)


@dataclass(frozen=True)
class Fragment:
    init: NodeId
    end: NodeId


def _nd_labels(ast: Ast, taken: set[str]) -> dict[tuple, str]:
    """Assign a join-state label to every Par, in source order, avoiding
    user and generated pause labels."""
    labels: dict[tuple, str] = {}
    counter = [0]

    def fresh() -> str:
        while True:
            counter[0] += 1
            name = "ND" if counter[0] == 1 else f"ND{counter[0]}"
            if name not in taken:
                return name

    def walk(node: Ast, path: tuple):
        match node:
            case Seq(a, b):
                walk(a, path + (0,))
                walk(b, path + (1,))
            case Loop(body) | Abort(_, body):
                walk(body, path + (0,))
            case IfElse(_, t, e):
                walk(t, path + (0,))
                walk(e, path + (1,))
            case Par(arms):
                labels[path] = fresh()
                for i, arm in enumerate(arms):
                    walk(arm, path + (i,))
            case _:
                pass

    walk(ast, ())
    return labels


class Rewriter:
    def __init__(self, g: FsmGraph, threads: ThreadTable, nd_labels: dict[tuple, str],
                 seq_right_first: bool = False):
        self.g = g
        self.threads = threads
        self.nd_labels = nd_labels
        self.seq_right_first = seq_right_first

    # one fragment per construct; `path` identifies the source position
    def rewrite_stmt(self, stmt: Ast, thread: ThreadId, path: tuple = ()) -> Fragment:
        self.g.stmt_visits += 1
        match stmt:
            case Nothing() | Emit() | SignalDecl():
                return self.rw_instantaneous(stmt, thread)
            case Pause(label, _):
                return self.rw_pause(label, thread)
            case Seq(a, b, _):
                if self.seq_right_first:
                    fb = self.rewrite_stmt(b, thread, path + (1,))
                    fa = self.rewrite_stmt(a, thread, path + (0,))
                else:
                    fa = self.rewrite_stmt(a, thread, path + (0,))
                    fb = self.rewrite_stmt(b, thread, path + (1,))
                return self.rw_seq(fa, fb)
            case Loop(body, _):
                return self.rw_loop(self.rewrite_stmt(body, thread, path + (0,)))
            case IfElse(cond, then, orelse, _):
                ft = self.rewrite_stmt(then, thread, path + (0,))
                fe = self.rewrite_stmt(orelse, thread, path + (1,))
                return self.rw_if(cond, ft, fe, thread)
            case Abort(cond, body, _, _):
                start = len(self.g.nodes)
                fb = self.rewrite_stmt(body, thread, path + (0,))
                return self.rw_abort(cond, fb, range(start, len(self.g.nodes)), thread)
            case Par(arms, _):
                frags: list[Fragment] = []
                tids: list[ThreadId] = []
                for i, arm in enumerate(arms):
                    tid = self.threads.new_thread(thread)
                    frag = self.rewrite_stmt(arm, tid, path + (i,))
                    th = self.threads.threads[tid]
                    th.init, th.end = frag.init, frag.end
                    self.g.nodes[frag.end].role = Role.PAR_END
                    frags.append(frag)
                    tids.append(tid)
                return self.rw_par(frags, tids, thread, self.nd_labels[path])
        raise TypeError(stmt)

    def rw_instantaneous(self, stmt: Ast, thread: ThreadId) -> Fragment:
        i = self.g.add_node(thread)
        u = self.g.add_node(thread)
        match stmt:
            case Nothing():
                actions: tuple[Action, ...] = ()
            case Emit(name, _):
                actions = (Action("emit", name),)
            case SignalDecl(kind, names, _):
                actions = tuple(Action("declare", n, kind) for n in names)
        self.g.add_edge(i, u, TRUE_GUARD, actions)
        return Fragment(i, u)

    def rw_pause(self, label: str, thread: ThreadId) -> Fragment:
        i = self.g.add_node(thread)
        s = self.g.add_node(thread, state_label=label)
        u = self.g.add_node(thread)
        self.g.add_edge(i, s)
        self.g.add_edge(s, u)
        return Fragment(i, u)

    def rw_seq(self, a: Fragment, b: Fragment) -> Fragment:
        self.g.add_edge(a.end, b.init)
        return Fragment(a.init, b.end)

    def rw_loop(self, body: Fragment) -> Fragment:
        self.g.add_edge(body.end, body.init)
        return Fragment(body.init, body.end)

    def rw_if(self, cond: SigExpr, then: Fragment, orelse: Fragment,
              thread: ThreadId) -> Fragment:
        from .frontend import Not

        i = self.g.add_node(thread)
        u = self.g.add_node(thread)
        self.g.add_edge(i, then.init, Guard(cond))
        self.g.add_edge(i, orelse.init, Guard(Not(cond)))
        self.g.add_edge(then.end, u)
        self.g.add_edge(orelse.end, u)
        return Fragment(i, u)

    def rw_abort(self, cond: SigExpr, body: Fragment, body_nodes: range,
                 thread: ThreadId) -> Fragment:
        i = self.g.add_node(thread)
        exit_node = self.g.add_node(thread, role=Role.ABORT_EXIT)
        self.g.add_edge(i, body.init)  # entry is unguarded
        for nid in body_nodes:
            node = self.g.nodes[nid]
            if not node.is_state:
                continue
            # the body may proceed only while the abort expression is false
            for edge in self.g.out[nid]:
                edge.guard = guard_not(cond, edge.guard)
            self.g.insert_edge_front(nid, exit_node, Guard(cond))
        self.g.add_edge(body.end, exit_node)  # instantaneous completion
        return Fragment(i, exit_node)

    def rw_par(self, frags: list[Fragment], tids: list[ThreadId],
               owner: ThreadId, nd_label: str) -> Fragment:
        fork = self.g.add_node(owner, role=Role.FORK)
        nd = self.g.add_node(owner, state_label=nd_label)
        exit_node = self.g.add_node(owner, role=Role.PAR_JOIN_EXIT)
        for frag in frags:
            self.g.add_edge(fork, frag.init)
        for frag in frags:
            self.g.add_edge(frag.end, nd)  # structural: records the group
        gid = len(self.threads.groups)
        self.g.add_edge(nd, exit_node, Guard(join=Join(JoinKind.ALL_DONE, gid)))
        self.g.add_edge(nd, nd, Guard(join=Join(JoinKind.NOT_ALL_DONE, gid)))
        from .fsmgraph import ParGroup

        self.threads.groups.append(
            ParGroup(gid, owner, tuple(tids), fork, nd, exit_node))
        return Fragment(fork, exit_node)


def rewrite_program(checked: CheckedAst, seq_right_first: bool = False
                    ) -> tuple[FsmGraph, ThreadTable, Fragment]:
    """Build the whole-program graph; root entry and exit become essential."""
    g, threads = new_graph()
    labels = _nd_labels(checked.ast, set(checked.labels))
    rw = Rewriter(g, threads, labels, seq_right_first)
    frag = rw.rewrite_stmt(checked.ast, 0)
    root = threads.threads[0]
    root.init, root.end = frag.init, frag.end
    if g.nodes[frag.init].role is Role.PLAIN:
        g.nodes[frag.init].role = Role.INIT
    if g.nodes[frag.end].role is Role.PLAIN:
        g.nodes[frag.end].role = Role.PAR_END  # program exit is essential
    return g, threads, frag


def node_budget(checked: CheckedAst) -> int:
    """Linearity bound on live nodes for a validated program."""
    return 3 * ast_size(checked.ast) + 3 * count_pars(checked.ast)

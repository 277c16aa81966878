"""Arena-backed FSM graph: dummy/state nodes, guarded prioritized edges.

Node ids are arena indices and are never reused; passes that remove nodes
mark them dead instead of reindexing.  Edges out of a node are kept densely
prioritized from 0; execution always tries them in ascending priority.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .frontend import And, SigExpr, expr_signals, format_expr

NodeId = int
ThreadId = int
ParGroupId = int


class UnknownNode(Exception):
    pass


class Role(Enum):
    PLAIN = "plain"
    INIT = "init"
    FORK = "fork"
    PAR_END = "par_end"
    ABORT_EXIT = "abort_exit"
    PAR_JOIN_EXIT = "par_join_exit"


ESSENTIAL_ROLES = frozenset({Role.INIT, Role.FORK, Role.PAR_END,
                             Role.ABORT_EXIT, Role.PAR_JOIN_EXIT})


@dataclass
class Node:
    id: NodeId
    thread: ThreadId
    state_label: Optional[str] = None  # set iff this is a state node
    role: Role = Role.PLAIN            # meaningful for dummies only
    alive: bool = True

    @property
    def is_state(self) -> bool:
        return self.state_label is not None


class JoinKind(Enum):
    ALL_DONE = "all_done"
    NOT_ALL_DONE = "not_all_done"


@dataclass(frozen=True)
class Join:
    kind: JoinKind
    group: ParGroupId


@dataclass(frozen=True)
class Guard:
    """Signal condition (None means True) plus optional parallel-join test."""

    sig: Optional[SigExpr] = None
    join: Optional[Join] = None

    def signals(self) -> set[str]:
        return expr_signals(self.sig) if self.sig is not None else set()

    def render(self) -> str:
        sig = format_expr(self.sig) if self.sig is not None else "True"
        if self.join is None:
            return sig
        tag = "all-done" if self.join.kind is JoinKind.ALL_DONE else "not-all-done"
        return f"{sig} [{tag} g{self.join.group}]"


TRUE_GUARD = Guard()


class JoinGuardCollision(Exception):
    pass


def _conjuncts(e: Optional[SigExpr]) -> list[SigExpr]:
    if e is None:
        return []
    if isinstance(e, And):
        return _conjuncts(e.left) + _conjuncts(e.right)
    return [e]


def conjoin(g1: Guard, g2: Guard) -> Guard:
    """Control-flow composition of two guards (g1 then g2).

    Conjunctions are kept right-nested in traversal order so that composing
    a chain of guards gives the same expression whichever end fuses first.
    """
    if g1.join is not None and g2.join is not None:
        raise JoinGuardCollision(f"{g1.render()} + {g2.render()}")
    parts = _conjuncts(g1.sig) + _conjuncts(g2.sig)
    sig: Optional[SigExpr] = None
    for p in reversed(parts):
        sig = p if sig is None else And(p, sig)
    return Guard(sig, g1.join or g2.join)


def guard_not(e: SigExpr, g: Guard) -> Guard:
    """Prefix a guard with the negation of an abort expression."""
    from .frontend import Not

    return conjoin(Guard(Not(e)), g)


@dataclass(frozen=True)
class Action:
    """Edge effect: declare a signal or set one present."""

    op: str  # 'declare' | 'emit'
    signal: str
    kind: Optional[str] = None  # for declare

    def render(self) -> str:
        if self.op == "declare":
            return f"decl {self.signal}:{self.kind}"
        return f"emit {self.signal}"


@dataclass(eq=False)  # identity semantics: edges live in adjacency lists
class Edge:
    src: NodeId
    dst: NodeId
    guard: Guard
    actions: tuple[Action, ...]
    priority: int


@dataclass
class Thread:
    id: ThreadId
    parent: Optional[ThreadId]
    init: Optional[NodeId] = None
    end: Optional[NodeId] = None


@dataclass
class ParGroup:
    id: ParGroupId
    owner: ThreadId
    members: tuple[ThreadId, ...]
    fork: NodeId
    nd: NodeId
    exit: NodeId


@dataclass
class ThreadTable:
    threads: list[Thread] = field(default_factory=list)
    groups: list[ParGroup] = field(default_factory=list)

    def new_thread(self, parent: Optional[ThreadId]) -> ThreadId:
        tid = len(self.threads)
        self.threads.append(Thread(tid, parent))
        return tid

    def depth(self, tid: ThreadId) -> int:
        d = 0
        cur = self.threads[tid].parent
        while cur is not None:
            d += 1
            cur = self.threads[cur].parent
        return d

    def is_ancestor(self, candidate: ThreadId, of: ThreadId) -> bool:
        cur = self.threads[of].parent
        while cur is not None:
            if cur == candidate:
                return True
            cur = self.threads[cur].parent
        return False

    def group_by_fork(self, fork: NodeId) -> ParGroup:
        for g in self.groups:
            if g.fork == fork:
                return g
        raise KeyError(fork)

    def group_by_nd(self, nd: NodeId) -> Optional[ParGroup]:
        for g in self.groups:
            if g.nd == nd:
                return g
        return None

    def copy(self) -> "ThreadTable":
        t = ThreadTable()
        t.threads = [replace(th) for th in self.threads]
        t.groups = [replace(g) for g in self.groups]
        return t


class FsmGraph:
    def __init__(self):
        self.nodes: list[Node] = []
        self.out: list[list[Edge]] = []  # per node, sorted by priority
        self.stmt_visits = 0  # rewrite instrumentation

    # -- construction ------------------------------------------------------

    def add_node(self, thread: ThreadId, state_label: Optional[str] = None,
                 role: Role = Role.PLAIN) -> NodeId:
        nid = len(self.nodes)
        self.nodes.append(Node(nid, thread, state_label, role))
        self.out.append([])
        return nid

    def _check(self, nid: NodeId):
        if not (0 <= nid < len(self.nodes)):
            raise UnknownNode(nid)

    def add_edge(self, src: NodeId, dst: NodeId, guard: Guard = TRUE_GUARD,
                 actions: tuple[Action, ...] = ()) -> Edge:
        self._check(src)
        self._check(dst)
        edge = Edge(src, dst, guard, actions, priority=len(self.out[src]))
        self.out[src].append(edge)
        return edge

    def insert_edge_front(self, src: NodeId, dst: NodeId,
                          guard: Guard = TRUE_GUARD,
                          actions: tuple[Action, ...] = ()) -> Edge:
        """Add an edge at priority 0, shifting existing priorities up."""
        self._check(src)
        self._check(dst)
        edge = Edge(src, dst, guard, actions, priority=0)
        self.out[src].insert(0, edge)
        self._renumber(src)
        return edge

    def _renumber(self, src: NodeId):
        for i, e in enumerate(self.out[src]):
            e.priority = i

    def replace_out_edges(self, src: NodeId, edges: list[Edge]):
        self.out[src] = edges
        self._renumber(src)

    # -- queries -----------------------------------------------------------

    def live_nodes(self) -> list[Node]:
        return [n for n in self.nodes if n.alive]

    def live_edges(self) -> list[Edge]:
        return [e for n in self.nodes if n.alive for e in self.out[n.id]]

    def state_nodes(self) -> list[Node]:
        return [n for n in self.live_nodes() if n.is_state]

    def in_edges(self, nid: NodeId) -> list[Edge]:
        return [e for e in self.live_edges() if e.dst == nid]

    def declared_signals(self) -> dict[str, str]:
        """Signal table recovered from declare actions, first kind wins."""
        table: dict[str, str] = {}
        for edge in self.live_edges():
            for a in edge.actions:
                if a.op == "declare" and a.signal not in table:
                    table[a.signal] = a.kind
        return table

    def copy(self) -> "FsmGraph":
        g = FsmGraph()
        g.nodes = [replace(n) for n in self.nodes]
        g.out = [[replace(e) for e in edges] for edges in self.out]
        g.stmt_visits = self.stmt_visits
        return g


def new_graph() -> tuple[FsmGraph, ThreadTable]:
    """Empty arena plus a thread table holding only the root thread."""
    table = ThreadTable()
    table.new_thread(None)
    return FsmGraph(), table


# ---------------------------------------------------------------------------
# DOT export

_ROLE_TAGS = {
    Role.PLAIN: "D",
    Role.INIT: "I",
    Role.FORK: "Fork",
    Role.PAR_END: "E",
    Role.ABORT_EXIT: "AE",
    Role.PAR_JOIN_EXIT: "PX",
}


def node_display(node: Node) -> str:
    if node.is_state:
        return node.state_label
    return f"{_ROLE_TAGS[node.role]}{node.id}"


def canonicalize(g: FsmGraph, entry: NodeId, threads: Optional[ThreadTable] = None):
    """Structure of the graph reachable from `entry`, with node, thread, and
    parallel-group identifiers renamed in traversal order.  Two graphs that
    differ only in arena numbering canonicalize identically."""
    node_map: dict[NodeId, int] = {}
    thread_map: dict[ThreadId, int] = {}
    group_map: dict[ParGroupId, int] = {}
    order: list[NodeId] = []

    def visit_node(nid: NodeId):
        if nid not in node_map:
            node_map[nid] = len(node_map)
            order.append(nid)

    def canon_guard(guard: Guard) -> str:
        sig = format_expr(guard.sig) if guard.sig is not None else "True"
        if guard.join is None:
            return sig
        if guard.join.group not in group_map:
            group_map[guard.join.group] = len(group_map)
        tag = "all-done" if guard.join.kind is JoinKind.ALL_DONE else "not-all-done"
        return f"{sig} [{tag} g{group_map[guard.join.group]}]"

    visit_node(entry)
    result = []
    i = 0
    while i < len(order):
        nid = order[i]
        i += 1
        node = g.nodes[nid]
        if node.thread not in thread_map:
            thread_map[node.thread] = len(thread_map)
        edges = []
        for edge in sorted(g.out[nid], key=lambda e: e.priority):
            visit_node(edge.dst)
            edges.append((canon_guard(edge.guard),
                          tuple(a.render() for a in edge.actions),
                          node_map[edge.dst]))
        result.append((node_map[nid], node.state_label, node.role.value,
                       thread_map[node.thread], tuple(edges)))
    return tuple(result)


def to_dot(g: FsmGraph) -> str:
    lines = ["digraph fsm {", "  rankdir=LR;"]
    for node in g.live_nodes():
        shape = "circle" if node.is_state else "box"
        lines.append(f'  n{node.id} [shape={shape}, label="{node_display(node)}"];')
    for node in g.live_nodes():
        for edge in sorted(g.out[node.id], key=lambda e: e.priority):
            label = edge.guard.render() + " / " + "; ".join(a.render() for a in edge.actions)
            lines.append(f'  n{edge.src} -> n{edge.dst} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

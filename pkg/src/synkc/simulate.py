"""Direct FSM execution with per-thread program counters.

Each tick: inject inputs, advance threads children-before-owner (deepest
groups first, members in arm order), collect outputs, then copy current
statuses to previous.  Instantaneous traversal runs through dummy nodes and
rests only on state nodes; parallel joins pass through their ND state when
every member thread is already done on arrival.

Pre-emption: an edge from a child thread's state to a node owned by an
ancestor deactivates everything below that ancestor, which then resumes
traversal at the edge target.  Sibling threads carry the same abort edge by
construction, so whichever is processed first wins and the rest are simply
deactivated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .fsmgraph import (
    Action, Edge, FsmGraph, JoinKind, NodeId, Role, ThreadId, ThreadTable,
    node_display,
)
from .semantics import SignalEnv, eval_expr, initial_env, inject_inputs
from .trace import TickTrace


class SimStuck(Exception):
    """No edge enabled: excluded on determinism-checked graphs."""


class SimInternalError(Exception):
    """Traversal revisited a node beyond the per-tick budget."""


class _Inactive:
    def __repr__(self):
        return "Inactive"


class _Done:
    def __repr__(self):
        return "Done"


INACTIVE = _Inactive()
DONE = _Done()


@dataclass(frozen=True)
class AtState:
    node: NodeId


ThreadStatus = object  # INACTIVE | DONE | AtState


@dataclass
class SimState:
    statuses: list[ThreadStatus]
    env: SignalEnv
    terminated: bool = False
    outputs: frozenset[str] = frozenset()
    visits: dict[tuple[ThreadId, NodeId], int] = field(default_factory=dict)
    advanced: set[ThreadId] = field(default_factory=set)


class Simulator:
    def __init__(self, g: FsmGraph, threads: ThreadTable):
        self.g = g
        self.threads = threads
        self.signals = g.declared_signals()
        n_abort_exits = sum(1 for n in g.live_nodes() if n.role is Role.ABORT_EXIT)
        self.visit_limit = 3 + n_abort_exits
        # deepest threads advance first; ties resolve in arm/creation order
        self.tick_order = sorted(
            (t.id for t in threads.threads),
            key=lambda tid: (-threads.depth(tid), tid))

    # -- instantaneous traversal -------------------------------------------

    def _bump(self, st: SimState, tid: ThreadId, nid: NodeId):
        key = (tid, nid)
        st.visits[key] = st.visits.get(key, 0) + 1
        if st.visits[key] > self.visit_limit:
            raise SimInternalError(
                f"thread {tid} visited node {nid} more than {self.visit_limit} times in one tick")

    def _apply(self, st: SimState, action: Action):
        if action.op == "declare":
            st.env.declare(action.signal, action.kind)
        else:
            st.env.set_curr(action.signal)

    def _enter(self, st: SimState, tid: ThreadId, edge: Edge):
        for action in edge.actions:
            self._apply(st, action)
        self._land(st, tid, edge.dst)

    def _deactivate_subtree(self, st: SimState, tid: ThreadId):
        st.statuses[tid] = INACTIVE
        st.advanced.add(tid)
        for t in self.threads.threads:
            if t.parent == tid:
                self._deactivate_subtree(st, t.id)

    def _land(self, st: SimState, tid: ThreadId, nid: NodeId):
        self._bump(st, tid, nid)
        node = self.g.nodes[nid]
        if node.is_state:
            group = self.threads.group_by_nd(nid)
            if group is not None and group.owner == tid:
                # join test on arrival: an all-instantaneous parallel block
                # completes inside its entry tick without resting here
                if all(st.statuses[m] is DONE for m in group.members):
                    edge = next(e for e in self.g.out[nid]
                                if e.guard.join is not None
                                and e.guard.join.kind is JoinKind.ALL_DONE)
                    for m in group.members:
                        self._deactivate_subtree(st, m)
                    self._enter(st, tid, edge)
                    return
            st.statuses[tid] = AtState(nid)
            return
        if node.role is Role.FORK:
            group = self.threads.group_by_fork(nid)
            for member in group.members:
                candidates = [e for e in self.g.out[nid]
                              if self.g.nodes[e.dst].thread == member]
                fired = self._first_enabled(st, candidates)
                if fired is None:
                    raise SimStuck(f"no entry edge enabled for thread {member}")
                st.advanced.add(member)
                self._enter(st, member, fired)
            self._land(st, tid, group.nd)
            return
        # dummy: continue along the first enabled own-thread edge;
        # cross-thread edges out of a dummy are structural group bookkeeping
        own = [e for e in self.g.out[nid] if self.g.nodes[e.dst].thread == tid]
        if not own:
            assert nid == self.threads.threads[tid].end, node_display(node)
            st.statuses[tid] = DONE
            if tid == 0:
                st.terminated = True
            return
        fired = self._first_enabled(st, own)
        if fired is None:
            raise SimStuck(f"no edge enabled at {node_display(node)}")
        self._enter(st, tid, fired)

    def _first_enabled(self, st: SimState, edges: list[Edge]) -> Optional[Edge]:
        for edge in sorted(edges, key=lambda e: e.priority):
            if self._guard_holds(st, edge):
                return edge
        return None

    def _guard_holds(self, st: SimState, edge: Edge) -> bool:
        guard = edge.guard
        if guard.sig is not None and not eval_expr(st.env, guard.sig):
            return False
        if guard.join is not None:
            group = self.threads.groups[guard.join.group]
            alldone = all(st.statuses[m] is DONE for m in group.members)
            return alldone if guard.join.kind is JoinKind.ALL_DONE else not alldone
        return True

    # -- ticks ---------------------------------------------------------------

    def sim_init(self, inputs: frozenset[str] = frozenset()) -> SimState:
        st = SimState([INACTIVE] * len(self.threads.threads),
                      initial_env(self.signals))
        inject_inputs(st.env, inputs)
        root = self.threads.threads[0]
        self._land(st, 0, root.init)
        st.outputs = st.env.currs("output")
        st.env.end_of_tick()
        st.visits.clear()
        st.advanced.clear()
        return st

    def sim_tick(self, st: SimState, inputs: frozenset[str]
                 ) -> tuple[SimState, frozenset[str]]:
        assert not st.terminated
        inject_inputs(st.env, inputs)
        st.visits.clear()
        st.advanced.clear()
        for tid in self.tick_order:
            if st.terminated:
                break
            if tid in st.advanced:
                continue
            status = st.statuses[tid]
            if not isinstance(status, AtState):
                continue
            nid = status.node
            edge = self._first_enabled(st, self.g.out[nid])
            if edge is None:
                raise SimStuck(f"no edge enabled at state "
                               f"{node_display(self.g.nodes[nid])}")
            st.advanced.add(tid)
            target_thread = self.g.nodes[edge.dst].thread
            if target_thread != tid:
                assert self.threads.is_ancestor(target_thread, tid)
                self._preempt(st, target_thread, edge)
                continue
            group = self.threads.group_by_nd(nid)
            if group is not None and group.owner == tid and edge.dst != nid:
                # owner departs its join state: children reset fully
                for m in group.members:
                    self._deactivate_subtree(st, m)
            self._enter(st, tid, edge)
        outputs = st.env.currs("output")
        st.outputs = outputs
        st.env.end_of_tick()
        return st, outputs

    def _preempt(self, st: SimState, ancestor: ThreadId, edge: Edge):
        """A child's abort edge fires: everything under the ancestor stops and
        the ancestor resumes instantaneous traversal at the edge target."""
        for t in self.threads.threads:
            if t.parent == ancestor:
                self._deactivate_subtree(st, t.id)
        st.advanced.add(ancestor)
        self._enter(st, ancestor, edge)


def sim_init(g: FsmGraph, threads: ThreadTable,
             inputs: frozenset[str] = frozenset()) -> SimState:
    return Simulator(g, threads).sim_init(inputs)


def run_trace_fsm(g: FsmGraph, threads: ThreadTable, inputs: TickTrace) -> TickTrace:
    """Execute the FSM over the input trace; mirrors run_trace_sos."""
    sim = Simulator(g, threads)
    n_ticks = max(1, len(inputs.ticks))
    st = sim.sim_init(inputs.ticks[0] if inputs.ticks else frozenset())
    out = TickTrace([st.outputs])
    if st.terminated:
        out.terminated_at = 1
        return out
    for t in range(2, n_ticks + 1):
        present = inputs.ticks[t - 1] if t <= len(inputs.ticks) else frozenset()
        st, outputs = sim.sim_tick(st, present)
        out.ticks.append(outputs)
        if st.terminated:
            out.terminated_at = t
            break
    return out

"""Back-end: emit a self-contained C++ type-state program from the FSM.

States become empty structs, every synchronous block becomes an empty
template over its state, and the per-thread tagged union lists exactly the
states that thread can occupy.  One transition function is emitted per
(thread, state) pair; its branch chain mirrors the state's outgoing edges in
priority order, reading only `_prev` records and writing `_curr` records and
thread unions.  Instantaneous control (dummy chains, forks, join pass-through,
abort re-entry) is flattened into straight-line code inside the transitions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .frontend import And, Not, Or, Ref, SigExpr
from .fsmgraph import (
    Edge, FsmGraph, Guard, JoinKind, Node, NodeId, Role, ThreadId,
    ThreadTable,
)
from .optimize import check_determinism, hard_errors


class UnsupportedGraph(Exception):
    pass


@dataclass(frozen=True)
class CodegenOptions:
    io_mode: str = "trace-stdio"  # or "extern"
    # Listing-style `constexpr` on transitions; advisory and off by default
    # because libstdc++ before GCC 12 lacks constexpr variant assignment.
    constexpr_annotations: bool = False


_CPP_RESERVED = {
    "State", "I", "E", "main", "bool", "true", "false", "int", "char",
    "double", "float", "void", "struct", "class", "template", "using",
    "return", "if", "else", "while", "for", "break", "continue", "auto",
    "not", "and", "or", "new", "delete", "this", "const", "static",
}


def count_transition_functions(g: FsmGraph, threads: ThreadTable) -> int:
    """Sum of per-thread state counts; the root also ticks in its initial
    pseudo-state, which performs the first tick's instantaneous phase."""
    return 1 + len(g.state_nodes())


class _Emitter:
    def __init__(self, g: FsmGraph, threads: ThreadTable, opts: CodegenOptions):
        self.g = g
        self.threads = threads
        self.opts = opts
        self.signals = dict(sorted(g.declared_signals().items()))
        self.inputs = sorted(n for n, k in self.signals.items() if k == "input")
        self.outputs = sorted(n for n, k in self.signals.items() if k == "output")
        self.states_of: dict[ThreadId, list[Node]] = {
            t.id: [] for t in threads.threads}
        for node in g.state_nodes():
            self.states_of[node.thread].append(node)
        for lst in self.states_of.values():
            lst.sort(key=lambda n: n.id)
        self.state_type = self._mangle_states()
        self.kw = "inline constexpr" if opts.constexpr_annotations else "inline"

    def _mangle_states(self) -> dict[NodeId, str]:
        taken = set(_CPP_RESERVED)
        for s in self.signals:
            taken.update({s and f"signal_{s}", f"{s}_curr", f"{s}_prev"})
        names: dict[NodeId, str] = {}
        for node in self.g.state_nodes():
            name = node.state_label
            while name in taken or name in names.values():
                name += "_st"
            names[node.id] = name
            taken.add(name)
        return names

    # -- small renderers -----------------------------------------------------

    def sig_cpp(self, e: SigExpr, parent: int = 0) -> str:
        match e:
            case Ref(name):
                return f"{name}_prev.status"
            case Not(arg):
                return f"(not {self.sig_cpp(arg, 3)})"
            case And(a, b):
                s = f"{self.sig_cpp(a, 2)} and {self.sig_cpp(b, 2)}"
                return f"({s})" if parent >= 2 else s
            case Or(a, b):
                s = f"{self.sig_cpp(a, 1)} or {self.sig_cpp(b, 1)}"
                return f"({s})" if parent >= 1 else s
        raise TypeError(e)

    def _done_cpp(self, tid: ThreadId) -> str:
        return f"std::holds_alternative<Thread{tid}<E>>(st{tid})"

    def guard_cpp(self, guard: Guard) -> str:
        parts = []
        if guard.sig is not None:
            parts.append(self.sig_cpp(guard.sig, 2))
        if guard.join is not None:
            group = self.threads.groups[guard.join.group]
            alldone = " and ".join(self._done_cpp(m) for m in group.members)
            if guard.join.kind is JoinKind.ALL_DONE:
                parts.append(f"({alldone})")
            else:
                parts.append(f"(not ({alldone}))")
        return " and ".join(parts) if parts else "true"

    def set_state(self, tid: ThreadId, type_name: str) -> str:
        return f"st{tid} = Thread{tid}<{type_name}>{{}};"

    # -- instantaneous traversal, partially evaluated into C++ ---------------

    def emit_actions(self, edge: Edge, indent: str) -> list[str]:
        lines = []
        for a in edge.actions:
            if a.op == "emit":
                lines.append(f"{indent}{a.signal}_curr.status = true;")
            # declarations are satisfied by the global signal records
        return lines

    def emit_enter(self, tid: ThreadId, edge: Edge, indent: str,
                   depth: int) -> tuple[list[str], bool]:
        lines = self.emit_actions(edge, indent)
        sub, may_finish = self.emit_land(tid, edge.dst, indent, depth + 1)
        return lines + sub, may_finish

    def emit_land(self, tid: ThreadId, nid: NodeId, indent: str,
                  depth: int) -> tuple[list[str], bool]:
        if depth > 4 * len(self.g.nodes) + 16:
            raise UnsupportedGraph("instantaneous expansion does not settle")
        node = self.g.nodes[nid]
        if node.is_state:
            # plain rest; join states are only ever landed on via their fork
            return [indent + self.set_state(tid, self.state_type[nid])], False
        if node.role is Role.FORK:
            return self.emit_fork(tid, nid, indent, depth)
        own = [e for e in sorted(self.g.out[nid], key=lambda e: e.priority)
               if self.g.nodes[e.dst].thread == tid]
        if not own:
            return [indent + self.set_state(tid, "E")], True
        if len(own) == 1 and own[0].guard == Guard():
            return self.emit_enter(tid, own[0], indent, depth)
        lines: list[str] = []
        may_finish = False
        for i, edge in enumerate(own):
            cond = self.guard_cpp(edge.guard)
            opener = (f"{indent}if ({cond}) {{" if i == 0 else
                      f"{indent}}} else if ({cond}) {{" if i < len(own) - 1 else
                      f"{indent}}} else {{  // {cond}")
            lines.append(opener)
            body, fin = self.emit_enter(tid, edge, indent + "  ", depth)
            lines.extend(body)
            may_finish = may_finish or fin
        lines.append(indent + "}")
        return lines, may_finish

    def emit_fork(self, tid: ThreadId, fork: NodeId, indent: str,
                  depth: int) -> tuple[list[str], bool]:
        group = self.threads.group_by_fork(fork)
        lines = [f"{indent}// fork parallel group {group.id}"]
        member_may_finish = []
        for member in group.members:
            entries = [e for e in sorted(self.g.out[fork], key=lambda e: e.priority)
                       if self.g.nodes[e.dst].thread == member]
            if len(entries) == 1 and entries[0].guard == Guard():
                body, fin = self.emit_enter(member, entries[0], indent, depth)
                lines.extend(body)
            else:
                body, fin = self._entry_chain(member, entries, indent, depth)
                lines.extend(body)
            member_may_finish.append(fin)
        nd_type = self.state_type[group.nd]
        if all(member_may_finish):
            alldone = " and ".join(self._done_cpp(m) for m in group.members)
            alldone_edge = next(
                e for e in self.g.out[group.nd]
                if e.guard.join is not None
                and e.guard.join.kind is JoinKind.ALL_DONE)
            lines.append(f"{indent}if ({alldone}) {{")
            body, fin = self.emit_enter(tid, alldone_edge, indent + "  ", depth)
            lines.extend(body)
            lines.append(f"{indent}}} else {{")
            lines.append(f"{indent}  {self.set_state(tid, nd_type)}")
            lines.append(f"{indent}}}")
            return lines, fin
        # some arm always pauses: the join cannot pass through on arrival
        lines.append(indent + self.set_state(tid, nd_type))
        return lines, False

    def _entry_chain(self, member: ThreadId, entries: list[Edge], indent: str,
                     depth: int) -> tuple[list[str], bool]:
        lines = []
        may_finish = False
        for i, edge in enumerate(entries):
            cond = self.guard_cpp(edge.guard)
            opener = (f"{indent}if ({cond}) {{" if i == 0 else
                      f"{indent}}} else if ({cond}) {{" if i < len(entries) - 1 else
                      f"{indent}}} else {{  // {cond}")
            lines.append(opener)
            body, fin = self.emit_enter(member, edge, indent + "  ", depth)
            lines.extend(body)
            may_finish = may_finish or fin
        lines.append(indent + "}")
        return lines, may_finish

    # -- transition functions -------------------------------------------------

    def emit_tick(self, tid: ThreadId, state: Node) -> list[str]:
        name = self.state_type[state.id]
        lines = [f"{self.kw} void Thread{tid}<{name}>::tick() {{"]
        group = self.threads.group_by_nd(state.id)
        if group is not None and group.owner == tid:
            for member in group.members:  # children advance before their owner
                lines.append(f"  visit{member}();")
        edges = sorted(self.g.out[state.id], key=lambda e: e.priority)
        if not edges:
            raise UnsupportedGraph(f"state {name} has no outgoing edges")
        for i, edge in enumerate(edges):
            cond = self.guard_cpp(edge.guard)
            opener = (f"  if ({cond}) {{" if i == 0 else
                      f"  }} else if ({cond}) {{" if i < len(edges) - 1 else
                      f"  }} else {{  // {cond}")
            lines.append(opener)
            target_thread = self.g.nodes[edge.dst].thread
            if target_thread != tid:
                # abort exit into an ancestor: this thread just ends; the
                # ancestor's own copy of the edge performs the jump
                lines.append(f"    {self.set_state(tid, 'E')}")
            elif edge.dst == state.id:
                lines.append(f"    {self.set_state(tid, name)}")
            else:
                body, _ = self.emit_enter(tid, edge, "    ", 0)
                lines.extend(body)
        lines.append("  }")
        lines.append("}")
        return lines

    def emit_init_tick(self) -> list[str]:
        lines = [f"{self.kw} void Thread0<I>::tick() {{"]
        body, _ = self.emit_land(0, self.threads.threads[0].init, "  ", 0)
        lines.extend(body)
        lines.append("}")
        return lines

    # -- file assembly --------------------------------------------------------

    def thread_union_types(self, tid: ThreadId) -> list[str]:
        names = [self.state_type[n.id] for n in self.states_of[tid]]
        if tid == 0:
            return ["I"] + names + ["E"]
        return names + ["E"]

    def emit(self) -> str:
        out: list[str] = []
        push = out.append
        mode = self.opts.io_mode
        push("// generated synchronous-program FSM (type-state encoding)")
        push(f"// io mode: {mode}")
        push("#include <variant>")
        if mode == "trace-stdio":
            push("#include <iostream>")
            push("#include <sstream>")
            push("#include <string>")
        push("")
        push("// signal records: current and previous per-tick statuses")
        for name in self.signals:
            push(f"typedef struct signal_{name} {{ bool status; }} signal_{name};")
            push(f"static signal_{name} {name}_curr, {name}_prev;")
        push("")
        push("// states as empty types")
        push("struct State {};")
        push("struct I : State {};   // initial phase")
        push("struct E : State {};   // terminated thread")
        for node in self.g.state_nodes():
            push(f"struct {self.state_type[node.id]} : State {{}};")
        push("")
        push("// one empty template per synchronous block, parameterized on state")
        for t in self.threads.threads:
            tid = t.id
            push(f"template <class St> struct Thread{tid} {{}};")
            if tid == 0:
                push(f"template <> struct Thread0<I> {{ static void tick(); }};")
            for node in self.states_of[tid]:
                push(f"template <> struct Thread{tid}<{self.state_type[node.id]}> "
                     f"{{ static void tick(); }};")
            push(f"template <> struct Thread{tid}<E> {{ static void tick() {{}} }};")
        push("")
        push("// per-thread tagged unions over exactly the occupiable states")
        for t in self.threads.threads:
            tid = t.id
            alts = ", ".join(f"Thread{tid}<{n}>" for n in self.thread_union_types(tid))
            push(f"using Thread{tid}State = std::variant<{alts}>;")
        for t in self.threads.threads:
            tid = t.id
            init = "Thread0<I>{}" if tid == 0 else f"Thread{tid}<E>{{}}"
            push(f"static Thread{tid}State st{tid} = {init};")
        push("")
        for t in self.threads.threads:
            push(f"static void visit{t.id}();")
        push("")
        push("// transition functions, one per (thread, state)")
        for line in self.emit_init_tick():
            push(line)
        for t in self.threads.threads:
            for node in self.states_of[t.id]:
                for line in self.emit_tick(t.id, node):
                    push(line)
        push("")
        push("// dispatch helpers")
        for t in self.threads.threads:
            tid = t.id
            push(f"static inline __attribute__((always_inline)) void visit{tid}() {{")
            push(f"  std::visit([](auto &&t) {{ t.tick(); }}, st{tid});")
            push("}")
        push("")
        push("// initialisation: all signals absent, root poised at its entry")
        push("static void init0() {")
        for name in self.signals:
            push(f"  {name}_curr.status = false; {name}_prev.status = false;")
        push("  st0 = Thread0<I>{};")
        for t in self.threads.threads[1:]:
            push(f"  st{t.id} = Thread{t.id}<E>{{}};")
        push("}")
        push("")
        push("static void end_of_tick() {")
        for name in self.signals:
            push(f"  {name}_prev = {name}_curr; {name}_curr.status = false;")
        push("}")
        push("")
        if mode == "trace-stdio":
            out.extend(self._main_trace_stdio())
        else:
            out.extend(self._main_extern())
        return "\n".join(out) + "\n"

    def _print_outputs(self) -> list[str]:
        lines = ["static void print_outputs() {", "  std::string out;"]
        for name in self.outputs:
            lines.append(f"  if ({name}_curr.status) "
                         f"{{ if (!out.empty()) out += ' '; out += \"{name}\"; }}")
        lines.append('  std::cout << (out.empty() ? "-" : out) << "\\n";')
        lines.append("}")
        return lines

    def _main_trace_stdio(self) -> list[str]:
        lines = self._print_outputs()
        lines.extend([
            "",
            "int main() {",
            "  init0();",
            "  std::string line;",
            "  bool ran_any = false;",
            "  while (std::getline(std::cin, line)) {",
            "    if (!line.empty() && line[0] == '#') continue;",
            "    if (line.empty()) { std::cerr << \"empty tick line\\n\"; return 1; }",
            "    if (line != \"-\") {",
            "      std::istringstream iss(line);",
            "      std::string name;",
            "      while (iss >> name) {",
        ])
        for name in self.inputs:
            lines.append(f'        if (name == "{name}") '
                         f"{{ {name}_curr.status = true; continue; }}")
        lines.extend([
            "        std::cerr << \"unknown input signal: \" << name << \"\\n\";",
            "        return 1;",
            "      }",
            "    }",
            "    ran_any = true;",
            "    visit0();",
            "    print_outputs();",
            "    if (std::holds_alternative<Thread0<E>>(st0)) return 0;",
            "    end_of_tick();",
            "  }",
            "  if (!ran_any) {  // no input: still run the initialisation tick",
            "    visit0();",
            "    print_outputs();",
            "  }",
            "  return 0;",
            "}",
        ])
        return lines

    def _main_extern(self) -> list[str]:
        lines = [
            "// externally-linked IO hooks (trace-backed stubs or real drivers)",
            'extern "C" int syn_next_tick(void);',
            'extern "C" unsigned char syn_read_input(const char *name);',
            'extern "C" void syn_write_output(const char *name, unsigned char present);',
            'extern "C" void syn_tick_done(void);',
            "",
            "int main() {",
            "  init0();",
            "  while (syn_next_tick()) {",
        ]
        for name in self.inputs:
            lines.append(f'    if (syn_read_input("{name}")) {name}_curr.status = true;')
        lines.append("    visit0();")
        for name in self.outputs:
            lines.append(f'    syn_write_output("{name}", {name}_curr.status ? 1 : 0);')
        lines.extend([
            "    syn_tick_done();",
            "    if (std::holds_alternative<Thread0<E>>(st0)) return 0;",
            "    end_of_tick();",
            "  }",
            "  return 0;",
            "}",
        ])
        return lines


def emit_typestate(g: FsmGraph, threads: ThreadTable,
                   opts: CodegenOptions = CodegenOptions()) -> str:
    """Emit the complete single-file back-end program."""
    if opts.io_mode not in ("trace-stdio", "extern"):
        raise ValueError(f"unknown io mode {opts.io_mode!r}")
    if hard_errors(check_determinism(g)):
        raise UnsupportedGraph("graph failed determinism checking")
    return _Emitter(g, threads, opts).emit()

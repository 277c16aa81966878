"""Benchmark corpus: golden-trace drift detection and structural shape."""

import pytest

from synkc.benchsuite import suite
from synkc.frontend import ast_size, count_pars
from synkc.optimize import check_determinism, eliminate_dummies, hard_errors
from synkc.rewrite import node_budget, rewrite_program
from synkc.semantics import run_trace_sos
from synkc.trace import format_trace, parse_trace

BENCHES = {b.name: b for b in suite()}
SHAPES = {  # threads, states: published benchmark shapes these approximate
    "abro": (3, 4),
    "conveyor": (6, 31),
    "router": (9, 33),
    "watchdogs": (15, 34),
}


def test_suite_contents():
    assert list(BENCHES) == ["abro", "conveyor", "router", "watchdogs"]
    for b in BENCHES.values():
        assert b.program.exists()
        assert len(b.traces) >= 1
        for inp, golden in b.traces:
            assert inp.exists() and golden.exists()


def test_abro_source_is_verbatim():
    src = BENCHES["abro"].source()
    for line in ["input signal A, B, R;", "abort(R) {", "{abort(A){loop{S0: pause}}}",
                 "{abort(B){loop{S1: pause}}};", "emit O;", "loop{S2: pause}"]:
        assert line in src


@pytest.mark.parametrize("name", list(SHAPES))
def test_shapes(name):
    threads, states = SHAPES[name]
    checked = BENCHES[name].checked()
    g, t, _ = rewrite_program(checked)
    g2, _ = eliminate_dummies(g, t)
    assert len(t.threads) == threads
    assert len(g2.state_nodes()) == states
    assert not hard_errors(check_determinism(g2))


@pytest.mark.parametrize("name", list(SHAPES))
def test_live_nodes_within_linearity_bound(name):
    checked = BENCHES[name].checked()
    g, t, _ = rewrite_program(checked)
    assert len(g.live_nodes()) <= 3 * ast_size(checked.ast) + 3 * count_pars(checked.ast)


@pytest.mark.parametrize("name", list(SHAPES))
def test_goldens_regenerate_identically(name):
    bench = BENCHES[name]
    checked = bench.checked()
    for inp, golden in bench.traces:
        trace = parse_trace(inp.read_text())
        out = run_trace_sos(checked, trace)
        assert format_trace(out) == golden.read_text(), inp.name

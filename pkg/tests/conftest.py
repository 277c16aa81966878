import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

ABRO_PATH = REPO / "benchmarks" / "abro.syn"

ABRO_SOURCE = """\
input signal A, B, R; //Input signals from environment
output signal O; //Output signal to environment
loop {
 abort(R) { //abort body when signal R is present
  {abort(A){loop{S0: pause}}} //stmt-1--wait  signal A
  || //run stmt-1 and stmt-2 in synchronous parallel
  {abort(B){loop{S1: pause}}}; //stmt-2--wait  signal B
  emit O; // emit O if A and B and not R
  loop{S2: pause} //halt
 }
} //restart (loop-back) program when R is present
"""


@pytest.fixture(scope="session")
def abro_source() -> str:
    return ABRO_SOURCE


@pytest.fixture(scope="session")
def abro_checked():
    from synkc.frontend import parse_source, validate

    return validate(parse_source(ABRO_SOURCE))

import numpy as np
import pytest

from hybridjt import parse_bif
from hybridjt.network import BayesianNetwork, Cpt, Variable

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_net(spec, cards=None, name="test"):
    """Build a network from ``{child: (parents, flat_probabilities)}`` keyed by variable name.

    Variables are declared in dict order; cardinalities default to 2.
    """
    names = list(spec)
    cards = cards or {}
    variables = [
        Variable(i, n, tuple(f"{n.lower()}{k}" for k in range(cards.get(n, 2)))) for i, n in enumerate(names)
    ]
    cpts = []
    for i, n in enumerate(names):
        parents, probs = spec[n]
        cpts.append(Cpt(i, tuple(names.index(p) for p in parents), np.asarray(probs, dtype=float)))
    return BayesianNetwork(tuple(variables), tuple(cpts), name=name)


@pytest.fixture
def chain_ab():
    # P(A=1) = 0.3, P(B=1 | A=0) = 0.2, P(B=1 | A=1) = 0.9
    return make_net({"A": ((), [0.7, 0.3]), "B": (("A",), [0.8, 0.2, 0.1, 0.9])})


@pytest.fixture
def chain_abc():
    return make_net({
        "A": ((), [0.6, 0.4]),
        "B": (("A",), [0.7, 0.3, 0.2, 0.8]),
        "C": (("B",), [0.9, 0.1, 0.35, 0.65]),
    })


@pytest.fixture
def asia_text():
    return MINIMAL_ASIA


MINIMAL_ASIA = """\
network asia {
}
variable asia {
  type discrete [ 2 ] { yes, no };
}
variable tub {
  type discrete [ 2 ] { yes, no };
}
variable smoke {
  type discrete [ 2 ] { yes, no };
}
variable lung {
  type discrete [ 2 ] { yes, no };
}
variable either {
  type discrete [ 2 ] { yes, no };
}
probability ( asia ) {
  table 0.01, 0.99;
}
probability ( tub | asia ) {
  (yes) 0.05, 0.95;
  (no) 0.01, 0.99;
}
probability ( smoke ) {
  table 0.5, 0.5;
}
probability ( lung | smoke ) {
  (yes) 0.1, 0.9;
  (no) 0.01, 0.99;
}
probability ( either | lung, tub ) {
  (yes, yes) 1.0, 0.0;
  (no, yes) 1.0, 0.0;
  (yes, no) 1.0, 0.0;
  (no, no) 0.0, 1.0;
}
"""


@pytest.fixture
def small_asia():
    return parse_bif(MINIMAL_ASIA)

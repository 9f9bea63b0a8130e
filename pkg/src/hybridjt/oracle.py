"""Brute-force enumeration inference and a small random-network generator.

Deliberately shares no code with the junction-tree engine: the joint is built
by broadcasting every CPT over the full state space and summed with
``math.fsum``.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterator, Mapping

import numpy as np

from .exceptions import ZeroProbabilityEvidence
from .network import BayesianNetwork, Cpt, Variable, as_evidence, row_index, topological_order

MAX_STATES = 10**7


class JointEnumerator:
    """All full assignments of a network with their joint probabilities."""

    def __init__(self, net: BayesianNetwork):
        size = math.prod(net.cards)
        if size > MAX_STATES:
            raise ValueError(f"joint state space {size} exceeds the enumeration guard {MAX_STATES}")
        self.net = net
        self.order = topological_order(net)

    def __len__(self):
        return math.prod(self.net.cards)

    def __iter__(self) -> Iterator[tuple[tuple[int, ...], float]]:
        net = self.net
        ranges = [range(net.variables[v].card) for v in self.order]
        assignment = [0] * net.n_vars
        for states in itertools.product(*ranges):
            for v, s in zip(self.order, states):
                assignment[v] = s
            p = 1.0
            for v in self.order:
                cpt = net.cpt_of(v)
                p *= cpt.probabilities[row_index(net, cpt, assignment) * net.variables[v].card + assignment[v]]
            yield tuple(assignment), p

    def joint(self) -> np.ndarray:
        """Joint distribution as an array with one axis per variable id."""
        net = self.net
        joint = np.ones(net.cards)
        for cpt in net.cpts:
            table = net.cpt_array(cpt.child)
            fam = cpt.family
            order = sorted(range(len(fam)), key=fam.__getitem__)
            table = table.transpose(order)
            shape = [1] * net.n_vars
            for v in fam:
                shape[v] = net.cards[v]
            joint = joint * table.reshape(shape)
        return joint


def _conditioned_joint(net: BayesianNetwork, evidence) -> np.ndarray:
    joint = JointEnumerator(net).joint()
    for var, state in as_evidence(evidence).items():
        mask = np.zeros(net.cards[var], dtype=bool)
        mask[state] = True
        shape = [1] * net.n_vars
        shape[var] = net.cards[var]
        joint = np.where(mask.reshape(shape), joint, 0.0)
    return joint


def _posterior(joint: np.ndarray, var: int) -> np.ndarray:
    moved = np.moveaxis(joint, var, 0)
    weights = [math.fsum(moved[s].ravel()) for s in range(moved.shape[0])]
    total = math.fsum(weights)
    if not total > 0:
        raise ZeroProbabilityEvidence("evidence has probability zero")
    return np.array([w / total for w in weights])


def enumerate_posterior(net: BayesianNetwork, evidence, var: int) -> np.ndarray:
    """P(var | evidence) by summing the full joint."""
    return _posterior(_conditioned_joint(net, evidence), var)


def enumerate_all_posteriors(net: BayesianNetwork, evidence, variables=None) -> dict[int, np.ndarray]:
    joint = _conditioned_joint(net, evidence)
    variables = range(net.n_vars) if variables is None else variables
    return {v: _posterior(joint, v) for v in variables}


def evidence_probability(net: BayesianNetwork, evidence) -> float:
    return math.fsum(_conditioned_joint(net, evidence).ravel())


def random_network(n_vars: int, max_card: int = 3, max_parents: int = 3, edge_prob: float = 0.3,
                   seed: int = 0) -> BayesianNetwork:
    """Random DAG over a shuffled variable order with Dirichlet(1) CPT rows."""
    if n_vars > 20:
        raise ValueError("random_network is meant for small oracle-checkable networks (n_vars <= 20)")
    rng = np.random.default_rng(seed)
    cards = rng.integers(2, max(max_card, 2) + 1, size=n_vars)
    order = rng.permutation(n_vars)
    parents: dict[int, list[int]] = {v: [] for v in range(n_vars)}
    for j in range(n_vars):
        for i in range(j):
            if rng.random() < edge_prob and len(parents[order[j]]) < max_parents:
                parents[int(order[j])].append(int(order[i]))
    variables = [Variable(v, f"X{v}", tuple(f"s{k}" for k in range(cards[v]))) for v in range(n_vars)]
    cpts = []
    for v in range(n_vars):
        ps = tuple(sorted(parents[v]))
        n_rows = math.prod(int(cards[p]) for p in ps)
        rows = rng.dirichlet(np.ones(cards[v]), size=n_rows)
        cpts.append(Cpt(v, ps, rows.ravel()))
    return BayesianNetwork(tuple(variables), tuple(cpts), name=f"random_{seed}")

"""Input validation helpers shared by the estimator and the CLI."""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from .network import BayesianNetwork, Evidence

MISSING = -1


def check_network_input(X) -> BayesianNetwork:
    """Accept a network object, a bundled network name, or a BIF path."""
    if isinstance(X, BayesianNetwork):
        return X
    if isinstance(X, str) or hasattr(X, "__fspath__"):
        from .datasets import resolve_network

        return resolve_network(str(X))
    raise TypeError(f"expected a BayesianNetwork, network name or BIF path, got {type(X).__name__}")


def check_evidence(X, net: BayesianNetwork) -> list[Evidence]:
    """Normalize evidence cases to a list of :class:`Evidence`.

    ``X`` is either an integer array of shape (n_cases, n_vars) with ``-1``
    marking unobserved variables, or a sequence of mappings keyed by variable
    id or name with state index or state name values.
    """
    if isinstance(X, Mapping):
        X = [X]
    if isinstance(X, np.ndarray) or (
        isinstance(X, (list, tuple)) and X and not isinstance(X[0], Mapping)
    ):
        arr = np.asarray(X)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2 or arr.shape[1] != net.n_vars:
            raise ValueError(f"expected evidence of shape (n_cases, {net.n_vars}), got {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise ValueError("evidence array must hold integer state indices")
            arr = arr.astype(np.int64)
        cases = [Evidence({int(v): int(s) for v, s in enumerate(row) if s != MISSING}) for row in arr]
    else:
        cases = [_mapping_case(case, net) for case in X]
    for ev in cases:
        ev.check(net)
    return cases


def _mapping_case(case: Mapping, net: BayesianNetwork) -> Evidence:
    out = {}
    for key, value in case.items():
        var = net.var_id(key) if isinstance(key, str) else int(key)
        if not 0 <= var < net.n_vars:
            raise ValueError(f"unknown variable id {var}")
        if isinstance(value, str):
            states = net.variables[var].states
            if value not in states:
                raise ValueError(f"unknown state {value!r} for variable {net.variables[var].name!r}")
            value = states.index(value)
        out[var] = int(value)
    return Evidence(out)

"""Bundled bnlearn networks and synthetic benchmark networks."""

from __future__ import annotations

import dataclasses
import gzip
from functools import lru_cache
from importlib import resources

import numpy as np

from .bif import parse_bif, read_bif
from .network import BayesianNetwork, Cpt, Variable

#: the six networks of the original evaluation, smallest first
PAPER_NETWORKS = ("hailfinder", "pathfinder", "diabetes", "pigs", "munin2", "munin4")
SMALL_NETWORKS = ("asia", "cancer", "earthquake", "sachs", "survey", "alarm", "child", "insurance", "win95pts")


def bundled_networks() -> list[str]:
    root = resources.files("hybridjt") / "data" / "networks"
    return sorted(p.name[: -len(".bif.gz")] for p in root.iterdir() if p.name.endswith(".bif.gz"))


@lru_cache(maxsize=None)
def load_network(name: str) -> BayesianNetwork:
    """Load a bundled network by name (e.g. ``"hailfinder"``)."""
    res = resources.files("hybridjt") / "data" / "networks" / f"{name}.bif.gz"
    if not res.is_file():
        raise KeyError(f"no bundled network {name!r}; available: {', '.join(bundled_networks())}")
    net = parse_bif(gzip.decompress(res.read_bytes()).decode("utf-8"))
    return dataclasses.replace(net, name=name) if net.name == "unknown" else net


def resolve_network(spec: str) -> BayesianNetwork:
    """A BIF path, a bundled network name, or ``grid:ROWSxCOLS[:CARD]``."""
    if spec.startswith("grid:"):
        dims, _, card = spec[5:].partition(":")
        rows, cols = (int(x) for x in dims.lower().split("x"))
        return grid_network(rows, cols, int(card or 2))
    if spec in bundled_networks():
        return load_network(spec)
    return read_bif(spec)


def grid_network(rows: int, cols: int, card: int = 2, seed: int = 0) -> BayesianNetwork:
    """Grid-shaped network: each cell's parents are the cells above and to the left.

    Treewidth grows with ``min(rows, cols)``, which makes grids a convenient knob
    for junction trees with large tables.
    """
    rng = np.random.default_rng(seed)
    variables, cpts = [], []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            variables.append(Variable(v, f"G{r}_{c}", tuple(f"s{k}" for k in range(card))))
            parents = []
            if r > 0:
                parents.append(v - cols)
            if c > 0:
                parents.append(v - 1)
            n_rows = card ** len(parents)
            cpts.append(Cpt(v, tuple(sorted(parents)), rng.dirichlet(np.ones(card), size=n_rows).ravel()))
    return BayesianNetwork(tuple(variables), tuple(cpts), name=f"grid{rows}x{cols}_c{card}")

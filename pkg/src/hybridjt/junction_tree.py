"""Junction tree construction: moralize, triangulate, connect cliques, assign CPTs, root and layer.

Cliques and separators are both nodes of the layered tree. Node ids put the
cliques first (``0 .. n_cliques-1``) followed by the separators
(``n_cliques + separator id``).
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .network import BayesianNetwork
from .potential import PotentialTable

Graph = dict  # vertex -> set of neighbouring vertices


def moralize(net: BayesianNetwork) -> Graph:
    """Undirected skeleton of the DAG plus an edge between every pair of co-parents."""
    g: Graph = {v: set() for v in range(net.n_vars)}
    for cpt in net.cpts:
        for p in cpt.parents:
            g[p].add(cpt.child)
            g[cpt.child].add(p)
        for a, b in itertools.combinations(cpt.parents, 2):
            g[a].add(b)
            g[b].add(a)
    return g


def _fill_cost(g: Graph, v) -> int:
    nbrs = list(g[v])
    cost = 0
    for i, a in enumerate(nbrs):
        ga = g[a]
        for b in nbrs[i + 1:]:
            if b not in ga:
                cost += 1
    return cost


def triangulate_min_fill(g: Graph):
    """Greedy min-fill elimination.

    Ties go to the vertex with the smaller elimination clique, then the smaller id.
    Returns ``(chordal_graph, elimination_order, maximal_cliques)`` where the
    cliques are ascending tuples listed in the order they were formed.
    """
    cur = {v: set(n) for v, n in g.items()}
    chordal = {v: set(n) for v, n in g.items()}
    cost = {v: _fill_cost(cur, v) for v in cur}
    order, candidates = [], []
    while cur:
        v = min(cur, key=lambda u: (cost[u], len(cur[u]), u))
        nbrs = cur.pop(v)
        for a in nbrs:
            cur[a].discard(v)
        for a, b in itertools.combinations(nbrs, 2):
            if b not in cur[a]:
                cur[a].add(b)
                cur[b].add(a)
                chordal[a].add(b)
                chordal[b].add(a)
        touched = set(nbrs)
        for a in nbrs:
            touched |= cur[a]
        for u in touched:
            cost[u] = _fill_cost(cur, u)
        del cost[v]
        order.append(v)
        candidates.append(frozenset(nbrs) | {v})

    # an elimination clique can only be contained in an earlier one
    containing: dict = {}
    cliques = []
    for v, cand in zip(order, candidates):
        if not any(cand <= other for other in containing.get(v, ())):
            cliques.append(tuple(sorted(cand)))
        for u in cand:
            containing.setdefault(u, []).append(cand)
    return chordal, order, cliques


@dataclass
class Clique:
    id: int
    scope: tuple[int, ...]
    potential: PotentialTable | None = None
    separators: list[int] = field(default_factory=list)


@dataclass
class Separator:
    id: int
    endpoints: tuple[int, int]
    scope: tuple[int, ...]
    potential: PotentialTable | None = None


@dataclass
class LayerSchedule:
    """BFS layering of cliques and separators outward from the root(s).

    Even layers hold cliques, odd layers hold separators. ``parent[node]`` is
    the node one layer closer to the root (-1 for roots).
    """

    layers: list[list[int]]
    layer_of: list[int]
    parent: list[int]
    roots: list[int]

    @property
    def n_layers(self) -> int:
        return len(self.layers)


@dataclass
class JunctionTree:
    cliques: list[Clique]
    separators: list[Separator]
    cards: tuple[int, ...] = ()
    roots: list[int] = field(default_factory=list)
    schedule: LayerSchedule | None = None
    cpt_home: dict[int, int] = field(default_factory=dict)

    @property
    def n_cliques(self) -> int:
        return len(self.cliques)

    @property
    def n_nodes(self) -> int:
        return len(self.cliques) + len(self.separators)

    @property
    def root(self) -> int:
        return self.roots[0]

    def is_separator(self, node: int) -> bool:
        return node >= len(self.cliques)

    def sep_node(self, s: int) -> int:
        return len(self.cliques) + s

    def node_scope(self, node: int) -> tuple[int, ...]:
        if self.is_separator(node):
            return self.separators[node - len(self.cliques)].scope
        return self.cliques[node].scope

    def node_size(self, node: int) -> int:
        return math.prod(self.cards[v] for v in self.node_scope(node))

    def neighbors(self, node: int) -> list[int]:
        if self.is_separator(node):
            return list(self.separators[node - len(self.cliques)].endpoints)
        return [self.sep_node(s) for s in self.cliques[node].separators]

    def components(self) -> list[list[int]]:
        """Clique ids of each connected component, ordered by smallest member."""
        seen = [False] * self.n_cliques
        comps = []
        for start in range(self.n_cliques):
            if seen[start]:
                continue
            comp, queue = [], deque([start])
            seen[start] = True
            while queue:
                c = queue.popleft()
                comp.append(c)
                for s in self.cliques[c].separators:
                    for o in self.separators[s].endpoints:
                        if not seen[o]:
                            seen[o] = True
                            queue.append(o)
            comps.append(sorted(comp))
        return comps

    def smallest_clique_containing(self, var: int) -> int:
        return _smallest_containing(self, {var})


def _smallest_containing(tree: JunctionTree, vars_: set) -> int:
    best, best_size = -1, None
    for c in tree.cliques:
        if vars_ <= set(c.scope):
            size = tree.node_size(c.id) if tree.cards else len(c.scope)
            if best_size is None or size < best_size:
                best, best_size = c.id, size
    if best < 0:
        raise LookupError(f"no clique contains variables {sorted(vars_)}")
    return best


def build_tree(cliques: Sequence[Iterable[int]], cards: Sequence[int] = ()) -> JunctionTree:
    """Maximum-weight spanning forest over the clique graph (Kruskal).

    Edge weight is the size of the scope intersection; ties prefer the
    lexicographically smaller (min id, max id) pair. Disjoint cliques are never
    joined, so a disconnected moral graph yields one tree per component.
    """
    scopes = [tuple(sorted(c)) for c in cliques]
    holders: dict[int, list[int]] = {}
    for i, sc in enumerate(scopes):
        for v in sc:
            holders.setdefault(v, []).append(i)
    weights: dict[tuple[int, int], int] = {}
    for members in holders.values():
        for a, b in itertools.combinations(members, 2):
            weights[(a, b)] = weights.get((a, b), 0) + 1
    edges = sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))

    parent = list(range(len(scopes)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree_cliques = [Clique(i, sc) for i, sc in enumerate(scopes)]
    separators: list[Separator] = []
    for (a, b), _ in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        parent[ra] = rb
        sid = len(separators)
        scope = tuple(sorted(set(scopes[a]) & set(scopes[b])))
        separators.append(Separator(sid, (a, b), scope))
        tree_cliques[a].separators.append(sid)
        tree_cliques[b].separators.append(sid)
    return JunctionTree(tree_cliques, separators, tuple(cards))


def assign_cpts(net: BayesianNetwork, tree: JunctionTree) -> JunctionTree:
    """Initialize clique potentials to the product of the CPTs assigned to them.

    Each CPT goes to the clique with the fewest table entries among those that
    contain its family (lowest id on ties). Separator potentials start at one.
    """
    tree.cards = net.cards
    home: dict[int, int] = {}
    for var in range(net.n_vars):
        home[var] = _smallest_containing(tree, set(net.cpt_of(var).family))
    for c in tree.cliques:
        pot = PotentialTable(c.scope, [net.cards[v] for v in c.scope])
        for var in sorted(v for v, h in home.items() if h == c.id):
            cpt = net.cpt_of(var)
            factor = PotentialTable(cpt.family, [net.cards[v] for v in cpt.family], cpt.probabilities)
            pot = pot.multiply_in(factor)
        c.potential = pot
    for s in tree.separators:
        s.potential = PotentialTable(s.scope, [net.cards[v] for v in s.scope])
    tree.cpt_home = home
    return tree


def _bfs(tree: JunctionTree, start: int):
    dist = {start: 0}
    prev = {start: -1}
    queue = deque([start])
    while queue:
        n = queue.popleft()
        for m in tree.neighbors(n):
            if m not in dist:
                dist[m] = dist[n] + 1
                prev[m] = n
                queue.append(m)
    return dist, prev


def _farthest(dist: dict) -> int:
    return min(dist, key=lambda n: (-dist[n], n))


def select_root(tree: JunctionTree, start: int = 0) -> int:
    """Center clique of the component containing ``start`` (double BFS).

    The returned clique has minimum eccentricity over the clique-and-separator
    node graph, so BFS from it gives the fewest layers.
    """
    dist, _ = _bfs(tree, start)
    u = _farthest(dist)
    dist_u, prev = _bfs(tree, u)
    v = _farthest(dist_u)
    path = [v]
    while path[-1] != u:
        path.append(prev[path[-1]])
    path.reverse()  # u ... v
    mid = (len(path) - 1) // 2
    if tree.is_separator(path[mid]):
        mid -= 1
    return path[mid]


def select_roots(tree: JunctionTree) -> list[int]:
    return [select_root(tree, comp[0]) for comp in tree.components()]


def eccentricity(tree: JunctionTree, node: int) -> int:
    dist, _ = _bfs(tree, node)
    return max(dist.values())


def compute_layers(tree: JunctionTree, roots) -> LayerSchedule:
    """BFS layer labels for cliques and separators; forests merge layer-by-layer."""
    if isinstance(roots, (int, np.integer)):
        roots = [int(roots)]
    n = tree.n_nodes
    layer_of = [-1] * n
    parent = [-1] * n
    layers: list[list[int]] = []
    for root in roots:
        dist, prev = _bfs(tree, root)
        for node, d in dist.items():
            layer_of[node] = d
            parent[node] = prev[node]
            while len(layers) <= d:
                layers.append([])
            layers[d].append(node)
    for layer in layers:
        layer.sort()
    return LayerSchedule(layers, layer_of, parent, list(roots))


def build_junction_tree(net: BayesianNetwork) -> JunctionTree:
    """Full pipeline from a network to a rooted, layered junction tree with potentials."""
    _, _, cliques = triangulate_min_fill(moralize(net))
    tree = build_tree(cliques, net.cards)
    assign_cpts(net, tree)
    tree.roots = select_roots(tree)
    tree.schedule = compute_layers(tree, tree.roots)
    return tree


def running_intersection_holds(tree: JunctionTree) -> bool:
    """Check that the cliques holding each variable form a connected subtree."""
    holders: dict[int, set[int]] = {}
    for c in tree.cliques:
        for v in c.scope:
            holders.setdefault(v, set()).add(c.id)
    for v, members in holders.items():
        start = next(iter(members))
        seen, stack = {start}, [start]
        while stack:
            c = stack.pop()
            for s in tree.cliques[c].separators:
                sep = tree.separators[s]
                if v not in sep.scope:
                    continue
                for o in sep.endpoints:
                    if o in members and o not in seen:
                        seen.add(o)
                        stack.append(o)
        if seen != members:
            return False
    return True


def tree_report(net: BayesianNetwork, tree: JunctionTree, all_roots: bool = True) -> dict:
    """Summary statistics used by the ``inspect`` command."""
    clique_entries = [tree.node_size(c.id) for c in tree.cliques]
    sep_entries = [tree.node_size(tree.sep_node(s.id)) for s in tree.separators]
    report = {
        "network": net.name,
        "variables": net.n_vars,
        "edges": len(net.edges),
        "cliques": tree.n_cliques,
        "separators": len(tree.separators),
        "components": len(tree.roots),
        "max_clique_scope": max((len(c.scope) for c in tree.cliques), default=0),
        "max_clique_entries": max(clique_entries, default=0),
        "clique_entries": int(sum(clique_entries)),
        "separator_entries": int(sum(sep_entries)),
        "total_entries": int(sum(clique_entries) + sum(sep_entries)),
        "roots": list(tree.roots),
        "layers": tree.schedule.n_layers if tree.schedule else None,
    }
    if all_roots:
        per_root = {}
        for comp, root in zip(tree.components(), tree.roots):
            for c in comp:
                per_root[c] = eccentricity(tree, c) + 1
        report["layers_per_root"] = per_root
        report["min_layers"] = min(per_root.values(), default=0)
    return report

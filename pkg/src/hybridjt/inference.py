"""Hugin-style two-phase propagation with four execution modes.

Every phase is a sequence of tree layers with a barrier between consecutive
layers. Within a layer the work is split into tasks, each owning a
contiguous range of one destination table:

``seq``     one task per node, run on the calling thread
``inter``   one task per node, nodes of a layer spread over the threads
``intra``   nodes processed one at a time, each node's entries chunked over the threads
``hybrid``  the entries of all nodes in a layer packed into chunks and spread over the threads

Each destination entry is computed by exactly one task with a fixed
summation order, so every mode and thread count gives bit-identical results.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import _kernels as K
from .exceptions import InconsistentDivision, ZeroProbabilityEvidence
from .junction_tree import JunctionTree, LayerSchedule
from .network import as_evidence
from .potential import PotentialTable

DEFAULT_CHUNK = 1024
RESCALE_BELOW = 1e-100

MARGINALIZE = "marginalize"
ABSORB = "absorb"
REDUCE = "reduce"
_KIND_CODE = {MARGINALIZE: K.MARG, ABSORB: K.ABSORB, REDUCE: K.REDUCE}


class EngineMode(str, enum.Enum):
    SEQUENTIAL = "seq"
    INTER = "inter"
    INTRA = "intra"
    HYBRID = "hybrid"

    @property
    def chunked(self) -> bool:
        return self in (EngineMode.INTRA, EngineMode.HYBRID)


@dataclass(frozen=True)
class Task:
    node: int
    kind: str
    begin: int
    end: int

    @property
    def size(self) -> int:
        return self.end - self.begin


@dataclass
class QueryResult:
    variable: int
    posterior: np.ndarray


def _node_tasks(node, kind, size, chunk, chunked):
    if not chunked or size <= chunk:
        return [Task(node, kind, 0, size)]
    return [Task(node, kind, b, min(b + chunk, size)) for b in range(0, size, chunk)]


def phase_nodes(tree: JunctionTree, schedule: LayerSchedule, phase: str | None) -> list[list[int]]:
    """Nodes with work to do in each layer of ``phase`` ("collect", "distribute" or None for all)."""
    if phase is None:
        return [list(layer) for layer in schedule.layers]
    has_child = set(p for p in schedule.parent if p >= 0)
    out = []
    for layer in schedule.layers:
        keep = []
        for node in layer:
            if tree.is_separator(node):
                keep.append(node)
            elif phase == "collect" and node in has_child:
                keep.append(node)
            elif phase == "distribute" and schedule.parent[node] >= 0:
                keep.append(node)
        out.append(keep)
    return out


def build_layer_tasks(tree: JunctionTree, schedule: LayerSchedule, mode, t: int = 1,
                      chunk: int = DEFAULT_CHUNK, phase: str | None = None) -> list[list[Task]]:
    """Partition the destination tables of every layer into tasks.

    Separator layers marginalize into the separator; clique layers absorb
    into the clique. In the chunked modes no chunk spans two nodes.
    """
    mode = EngineMode(mode)
    if chunk < 1:
        raise ValueError("chunk must be at least 1")
    out = []
    for nodes in phase_nodes(tree, schedule, phase):
        layer = []
        for node in nodes:
            kind = MARGINALIZE if tree.is_separator(node) else ABSORB
            layer.extend(_node_tasks(node, kind, tree.node_size(node), chunk, mode.chunked))
        out.append(layer)
    return out


@dataclass
class _Layer:
    nodes: np.ndarray  # destination nodes in task order
    tasks: np.ndarray  # (n, 5) kind, node, begin, end, aux offset
    aux: np.ndarray
    starts: np.ndarray  # first task of each node
    separators: bool
    links: list  # per node: (sep node, src clique) for separators, absorbed sep nodes for cliques


@dataclass
class InferenceState:
    """Working copy of every clique and separator table for one inference run.

    The true potential of node ``n`` is its stored values times ``exp(log_scale[n])``.
    """

    values: np.ndarray
    ratio: np.ndarray
    log_scale: np.ndarray
    ratio_scale: np.ndarray
    evidence: dict = field(default_factory=dict)
    stage: str = "fresh"
    zero_evidence: bool = False
    scaled: bool = False


class Propagator:
    """Compiled message-passing plan for one junction tree and execution mode.

    Holds a thread pool when ``n_threads > 1``; use as a context manager or call
    :meth:`close`.
    """

    def __init__(self, tree: JunctionTree, mode="hybrid", n_threads: int = 1, chunk: int = DEFAULT_CHUNK):
        self.tree = tree
        self.mode = EngineMode(mode)
        if n_threads < 1:
            raise ValueError("n_threads must be at least 1")
        self.n_threads = 1 if self.mode is EngineMode.SEQUENTIAL else int(n_threads)
        self.chunk = int(chunk)
        self._pool = ThreadPoolExecutor(self.n_threads - 1) if self.n_threads > 1 else None
        self._compile()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def _compile(self):
        tree = self.tree
        schedule = tree.schedule
        n = tree.n_nodes
        sizes = np.array([tree.node_size(i) for i in range(n)], dtype=np.int64)
        self.node_size = sizes
        self.node_off = np.zeros(n, dtype=np.int64)
        np.cumsum(sizes[:-1], out=self.node_off[1:])
        self.ratio_off = np.zeros(n, dtype=np.int64)
        acc = 0
        for node in range(tree.n_cliques, n):
            self.ratio_off[node] = acc
            acc += sizes[node]
        self.ratio_size = max(acc, 1)
        init = np.empty(int(sizes.sum()))
        for c in tree.cliques:
            init[self.node_off[c.id]:self.node_off[c.id] + sizes[c.id]] = c.potential.values
        for s in tree.separators:
            node = tree.sep_node(s.id)
            init[self.node_off[node]:self.node_off[node] + sizes[node]] = s.potential.values
        self.init_values = init

        blob = []
        self.recipe_of = {}
        for s in tree.separators:
            for c in s.endpoints:
                self.recipe_of[(s.id, c)] = len(blob)
                blob.extend(_recipe(tree, s.scope, tree.cliques[c].scope))
        self.recipes = np.asarray(blob or [0], dtype=np.int64)
        self.width = max((len(c.scope) for c in tree.cliques), default=0) + 1

        self.phases = {}
        for phase in ("collect", "distribute"):
            layered = build_layer_tasks(tree, schedule, self.mode, self.n_threads, self.chunk, phase)
            self.phases[phase] = [self._pack_layer(tasks, phase) if tasks else None for tasks in layered]

        # clique used for evidence and queries on each variable
        self.home = {v: tree.smallest_clique_containing(v) for c in tree.cliques for v in c.scope}
        self._query_recipe = {}
        self._reduce_ranges = {}

    def _pack_layer(self, tasks: list[Task], phase: str) -> _Layer:
        tree, schedule = self.tree, self.tree.schedule
        children: dict[int, list[int]] = {}
        for node, p in enumerate(schedule.parent):
            if p >= 0:
                children.setdefault(p, []).append(node)
        aux: list[int] = []
        aux_at: dict[int, int] = {}
        links = []
        rows = []
        nodes = []
        starts = []
        for i, task in enumerate(tasks):
            node = task.node
            if node not in aux_at:
                aux_at[node] = len(aux)
                starts.append(i)
                nodes.append(node)
                if tree.is_separator(node):
                    sep = tree.separators[node - tree.n_cliques]
                    src = children[node][0] if phase == "collect" else schedule.parent[node]
                    aux.extend([self.recipe_of[(sep.id, src)], src])
                    links.append((node, src))
                else:
                    seps = sorted(children.get(node, [])) if phase == "collect" else [schedule.parent[node]]
                    aux.append(len(seps))
                    for sn in seps:
                        aux.extend([self.recipe_of[(sn - tree.n_cliques, node)], sn])
                    links.append(seps)
            rows.append((_KIND_CODE[task.kind], node, task.begin, task.end, aux_at[node]))
        return _Layer(
            np.asarray(nodes, dtype=np.int64),
            np.asarray(rows, dtype=np.int64).reshape(-1, 5),
            np.asarray(aux, dtype=np.int64),
            np.asarray(starts, dtype=np.int64),
            tree.is_separator(tasks[0].node),
            links,
        )

    # execution

    def _run(self, state: InferenceState, tasks: np.ndarray, aux: np.ndarray, task_max: np.ndarray):
        err = np.zeros(tasks.shape[0], dtype=np.int64)
        args = (state.values, state.ratio, self.node_off, self.ratio_off, self.recipes, aux, tasks)
        if self.mode is EngineMode.INTRA:
            starts = np.flatnonzero(np.diff(tasks[:, 1], prepend=-1))
            bounds = list(starts) + [tasks.shape[0]]
            for lo, hi in zip(bounds[:-1], bounds[1:]):
                sub = (state.values, state.ratio, self.node_off, self.ratio_off, self.recipes, aux, tasks[lo:hi])
                self._spread(sub, task_max[lo:hi], err[lo:hi])
        else:
            self._spread(args, task_max, err)
        if err.any():
            raise InconsistentDivision("positive separator entry divided by zero during propagation")

    def _spread(self, args, task_max, err):
        n_tasks = args[-1].shape[0]
        workers = min(self.n_threads, n_tasks)
        if workers <= 1:
            K.run_tasks(*args, 0, 1, task_max, err, self.width)
            return
        futures = [self._pool.submit(K.run_tasks, *args, w, workers, task_max, err, self.width)
                   for w in range(1, workers)]
        K.run_tasks(*args, 0, workers, task_max, err, self.width)
        wait(futures)
        for f in futures:
            f.result()

    def new_state(self) -> InferenceState:
        n = self.tree.n_nodes
        return InferenceState(
            self.init_values.copy(), np.zeros(self.ratio_size), np.zeros(n), np.zeros(n)
        )

    def load_evidence(self, state: InferenceState, evidence) -> None:
        """Zero the entries of each observed variable's home clique that contradict it."""
        if state.stage != "fresh":
            raise RuntimeError("evidence can only be loaded into a fresh state")
        evidence = as_evidence(evidence)
        cards = self.tree.cards
        per_clique: dict[int, list[int]] = {}
        for var, st in evidence.items():
            if var not in self.home:
                raise LookupError(f"variable {var} is not in any clique")
            if not 0 <= st < cards[var]:
                raise IndexError(f"evidence state {st} out of range for variable {var}")
            c = self.home[var]
            scope = self.tree.cliques[c].scope
            stride = math.prod(cards[v] for v in scope[scope.index(var) + 1:])
            per_clique.setdefault(c, []).extend([stride, cards[var], st])
        state.evidence = dict(evidence.items())
        state.stage = "evidence"
        if not per_clique:
            return
        aux, rows = [], []
        for c in sorted(per_clique):
            at = len(aux)
            triples = per_clique[c]
            aux.append(len(triples) // 3)
            aux.extend(triples)
            for b, e in self._ranges(c):
                rows.append((K.REDUCE, c, b, e, at))
        tasks = np.asarray(rows, dtype=np.int64)
        self._run(state, tasks, np.asarray(aux, dtype=np.int64), np.zeros(len(rows)))

    def _ranges(self, c):
        r = self._reduce_ranges.get(c)
        if r is None:
            r = [(t.begin, t.end) for t in _node_tasks(c, REDUCE, int(self.node_size[c]), self.chunk,
                                                       self.mode.chunked)]
            self._reduce_ranges[c] = r
        return r

    def _run_phase(self, state: InferenceState, phase: str) -> None:
        layers = self.phases[phase]
        order = range(len(layers) - 1, -1, -1) if phase == "collect" else range(len(layers))
        for k in order:
            layer = layers[k]
            if layer is None:
                continue
            task_max = np.zeros(layer.tasks.shape[0])
            self._run(state, layer.tasks, layer.aux, task_max)
            if layer.separators:
                if state.scaled:
                    for sep, src in layer.links:
                        state.ratio_scale[sep] = state.log_scale[src] - state.log_scale[sep]
                        state.log_scale[sep] = state.log_scale[src]
                continue
            if state.scaled:
                for node, seps in zip(layer.nodes, layer.links):
                    for sn in seps:
                        state.log_scale[node] += state.ratio_scale[sn]
            node_max = np.maximum.reduceat(task_max, layer.starts)
            for node, top in zip(layer.nodes, node_max):
                if 0.0 < top < RESCALE_BELOW:
                    off, size = self.node_off[node], self.node_size[node]
                    state.values[off:off + size] /= top
                    state.log_scale[node] += math.log(top)
                    state.scaled = True

    def collect(self, state: InferenceState) -> bool:
        """Leaves-to-root pass. Returns False if the evidence has probability zero."""
        if state.stage == "fresh":
            state.stage = "evidence"
        if state.stage != "evidence":
            raise RuntimeError(f"collect called in stage {state.stage!r}")
        self._run_phase(state, "collect")
        state.stage = "collected"
        for root in self.tree.roots:
            off, size = self.node_off[root], self.node_size[root]
            if not state.values[off:off + size].any():
                state.zero_evidence = True
        return not state.zero_evidence

    def distribute(self, state: InferenceState) -> bool:
        """Root-to-leaves pass; afterwards every clique is calibrated."""
        if state.stage != "collected":
            raise RuntimeError(f"distribute called in stage {state.stage!r}")
        if not state.zero_evidence:
            self._run_phase(state, "distribute")
        state.stage = "distributed"
        return not state.zero_evidence

    def node_table(self, state: InferenceState, node: int) -> PotentialTable:
        """Stored (unscaled) table of a clique or separator node."""
        scope = self.tree.node_scope(node)
        off, size = self.node_off[node], self.node_size[node]
        return PotentialTable._wrap(scope, tuple(self.tree.cards[v] for v in scope),
                                    state.values[off:off + size].copy())

    def query_marginal(self, state: InferenceState, var: int) -> QueryResult:
        if state.stage != "distributed":
            raise RuntimeError("query_marginal needs a fully propagated state")
        if state.zero_evidence:
            raise ZeroProbabilityEvidence("evidence has probability zero")
        c = self.home[var]
        recipe = self._query_recipe.get(var)
        if recipe is None:
            scope = self.tree.cliques[c].scope
            cards = [self.tree.cards[v] for v in scope]
            strides = [math.prod(cards[i + 1:]) for i in range(len(cards))]
            j = scope.index(var)
            rest = [i for i in range(len(scope)) if i != j]
            recipe = (
                np.array([cards[j]], dtype=np.int64), np.array([strides[j]], dtype=np.int64),
                np.array([cards[i] for i in rest], dtype=np.int64),
                np.array([strides[i] for i in rest], dtype=np.int64),
            )
            self._query_recipe[var] = recipe
        out = np.empty(recipe[0][0])
        K.marg_range(state.values, self.node_off[c], out, 0, *recipe, 0, out.size)
        total = out.sum()
        if not total > 0:
            raise ZeroProbabilityEvidence("evidence has probability zero")
        return QueryResult(var, out / total)

    def run_case(self, evidence=None, query=None) -> dict[int, QueryResult]:
        """Fresh state, evidence, collect, distribute, then query every unobserved variable."""
        state = self.new_state()
        self.load_evidence(state, evidence or {})
        if not self.collect(state):
            raise ZeroProbabilityEvidence("evidence has probability zero")
        self.distribute(state)
        if query is None:
            query = [v for v in range(len(self.tree.cards)) if v not in state.evidence]
        return {v: self.query_marginal(state, v) for v in query}


def _recipe(tree: JunctionTree, sep_scope, clique_scope) -> list[int]:
    cards = [tree.cards[v] for v in clique_scope]
    cstrides = [math.prod(cards[i + 1:]) for i in range(len(cards))]
    sep_cards = [tree.cards[v] for v in sep_scope]
    sstrides = [math.prod(sep_cards[i + 1:]) for i in range(len(sep_cards))]
    kept = [clique_scope.index(v) for v in sep_scope]
    summed = [i for i, v in enumerate(clique_scope) if v not in sep_scope]
    sep_stride_of = {v: s for v, s in zip(sep_scope, sstrides)}
    out = [len(kept), len(summed), len(clique_scope)]
    out += [cards[i] for i in kept] + [cstrides[i] for i in kept]
    out += [cards[i] for i in summed] + [cstrides[i] for i in summed]
    out += cards + [sep_stride_of.get(v, 0) for v in clique_scope]
    return out


def run_case(tree: JunctionTree, evidence=None, mode="seq", n_threads: int = 1,
             chunk: int = DEFAULT_CHUNK) -> dict[int, QueryResult]:
    """One-shot convenience wrapper around :class:`Propagator`."""
    with Propagator(tree, mode, n_threads, chunk) as prop:
        return prop.run_case(evidence)

"""scikit-learn style front end.

``fit`` compiles a network into a junction tree; ``transform`` maps evidence
rows to concatenated posterior marginals and ``predict`` to the most probable
state of every variable.

>>> from hybridjt import JunctionTreeInference
>>> est = JunctionTreeInference(mode="seq").fit("asia")
>>> est.predict_proba([{"smoke": "yes"}])[0]["lung"].round(3).tolist()
[0.1, 0.9]
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ZeroProbabilityEvidence
from .inference import DEFAULT_CHUNK, EngineMode, Propagator
from .junction_tree import build_junction_tree
from .validation import check_evidence, check_network_input


class JunctionTreeInference(TransformerMixin, BaseEstimator):
    """Exact posterior marginals by junction-tree propagation.

    Parameters
    ----------
    mode : {"seq", "inter", "intra", "hybrid"}
        Execution strategy inside each propagation layer.
    n_threads : int
        Worker threads; ignored (forced to 1) in ``"seq"`` mode.
    chunk_size : int
        Maximum table entries per task in the chunked modes.
    """

    def __init__(self, mode="hybrid", n_threads=1, chunk_size=DEFAULT_CHUNK):
        self.mode = mode
        self.n_threads = n_threads
        self.chunk_size = chunk_size

    def fit(self, X, y=None):
        EngineMode(self.mode)
        if int(self.n_threads) < 1 or int(self.chunk_size) < 1:
            raise ValueError("n_threads and chunk_size must be positive")
        self.network_ = check_network_input(X)
        self.tree_ = build_junction_tree(self.network_)
        self.n_features_in_ = self.network_.n_vars
        self.feature_names_in_ = np.array([v.name for v in self.network_.variables], dtype=object)
        return self

    def _propagator(self):
        return Propagator(self.tree_, self.mode, self.n_threads, self.chunk_size)

    def predict_proba(self, X):
        """Posterior of every variable per case, as ``{name: array}`` dicts.

        Observed variables get a one-hot posterior. A case whose evidence has
        probability zero maps to ``None``.
        """
        check_is_fitted(self, "tree_")
        net = self.network_
        cases = check_evidence(X, net)
        out = []
        with self._propagator() as prop:
            for ev in cases:
                try:
                    res = prop.run_case(ev)
                except ZeroProbabilityEvidence:
                    out.append(None)
                    continue
                post = {}
                for v in net.variables:
                    if v.id in ev:
                        p = np.zeros(v.card)
                        p[ev[v.id]] = 1.0
                    else:
                        p = res[v.id].posterior
                    post[v.name] = p
                out.append(post)
        return out

    def transform(self, X):
        """Concatenated posteriors, one column per (variable, state); NaN rows for impossible evidence."""
        width = sum(self.network_.cards) if hasattr(self, "network_") else 0
        rows = []
        for post in self.predict_proba(X):
            rows.append(np.full(width, np.nan) if post is None else np.concatenate(list(post.values())))
        return np.vstack(rows) if rows else np.empty((0, width))

    def predict(self, X):
        """Most probable marginal state per variable, shape (n_cases, n_vars); -1 for impossible evidence."""
        out = []
        for post in self.predict_proba(X):
            if post is None:
                out.append(np.full(self.n_features_in_, -1))
            else:
                out.append(np.array([int(np.argmax(p)) for p in post.values()]))
        return np.vstack(out) if out else np.empty((0, self.n_features_in_), dtype=int)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "tree_")
        return np.array(
            [f"{v.name}={s}" for v in self.network_.variables for s in v.states], dtype=object
        )

"""Graph corpus ingest (TU edge-list layout) and per-graph feature rows.

A dataset directory DS holds at least

    DS_A.txt                "i, j" lines, 1-based global node ids, one
                            directed edge per line (taken verbatim, no
                            symmetrization)
    DS_graph_indicator.txt  line n maps node n to its graph id (1-based)
    DS_graph_labels.txt     line g is the label of graph g

Node attributes and edge labels, when present, are ignored. Each graph is
padded with isolated nodes up to the next power of m and pushed through
the inference pipeline; the resulting rows are p_hat followed by the m**2
entries of X_hat (column-major), then the graph label.
"""
import os
import warnings
from dataclasses import dataclass, replace as dc_replace

import numpy as np

from .solver import SolverConfig, infer
from .validation import ParseError, ValidationError, check_positive_int

__all__ = [
    "TUGraph",
    "FeatureTable",
    "parse_tu_dataset",
    "graph_to_adjacency",
    "extract_features",
    "standardize_features",
]


@dataclass
class TUGraph:
    """One graph from a corpus: local 0-based edges plus a label."""

    n_nodes: int
    edges: np.ndarray  # (E, 2) int64, 0-based local ids, directed
    label: float


@dataclass
class FeatureTable:
    """Per-graph feature rows: p_hat, the m**2 initiator entries, label."""

    features: np.ndarray  # (n_graphs, m**2 + 1) float
    labels: np.ndarray    # (n_graphs,)
    m: int
    standardized: bool = False

    @property
    def width(self):
        """Total row width including the label column."""
        return self.m ** 2 + 2

    def header(self):
        return ["p_hat"] + [f"x_{q}" for q in range(1, self.m ** 2 + 1)] + ["label"]

    def to_csv(self, path, comment=None):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            if comment:
                fh.write(comment.rstrip("\n") + "\n")
            fh.write(",".join(self.header()) + "\n")
            for row, label in zip(self.features, self.labels):
                cells = [f"{v:.12g}" for v in row] + [f"{label:.12g}"]
                fh.write(",".join(cells) + "\n")


def _read_lines(path):
    if not os.path.isfile(path):
        raise FileNotFoundError(f"required dataset file missing: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read().splitlines()


def _parse_int(token, path, lineno):
    try:
        return int(token.strip())
    except ValueError:
        raise ParseError(f"{path}:{lineno}: expected an integer, got {token.strip()!r}")


def parse_tu_dataset(path, name=None):
    """Load a TU-layout dataset directory into a list of TUGraph.

    Parameters
    ----------
    path : str
        Dataset directory.
    name : str, optional
        File prefix DS; defaults to the directory basename.

    Raises
    ------
    FileNotFoundError
        If a required file is absent.
    ParseError
        On malformed lines (with the offending line number) or on edges
        joining nodes of different graphs.
    """
    name = name or os.path.basename(os.path.normpath(path))
    ind_path = os.path.join(path, f"{name}_graph_indicator.txt")
    a_path = os.path.join(path, f"{name}_A.txt")
    lab_path = os.path.join(path, f"{name}_graph_labels.txt")

    indicator = []
    for lineno, line in enumerate(_read_lines(ind_path), start=1):
        if not line.strip():
            continue
        indicator.append(_parse_int(line, ind_path, lineno))
    if not indicator:
        raise ParseError(f"{ind_path}: no node records")
    indicator = np.asarray(indicator, dtype=np.int64)
    if np.any(np.diff(indicator) < 0):
        raise ParseError(f"{ind_path}: graph ids must be non-decreasing")
    n_graphs = int(indicator.max())
    counts = np.bincount(indicator, minlength=n_graphs + 1)[1:]
    offsets = np.concatenate([[0], np.cumsum(counts)])

    labels = []
    for lineno, line in enumerate(_read_lines(lab_path), start=1):
        if not line.strip():
            continue
        try:
            labels.append(float(line.strip()))
        except ValueError:
            raise ParseError(f"{lab_path}:{lineno}: expected a numeric label")
    if len(labels) != n_graphs:
        raise ParseError(
            f"{lab_path}: {len(labels)} labels for {n_graphs} graphs"
        )

    edges = [[] for _ in range(n_graphs)]
    n_nodes = indicator.size
    for lineno, line in enumerate(_read_lines(a_path), start=1):
        if not line.strip():
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ParseError(f"{a_path}:{lineno}: expected 'i, j', got {line!r}")
        i = _parse_int(parts[0], a_path, lineno)
        j = _parse_int(parts[1], a_path, lineno)
        if not (1 <= i <= n_nodes and 1 <= j <= n_nodes):
            raise ParseError(f"{a_path}:{lineno}: node id out of range [1, {n_nodes}]")
        gi, gj = indicator[i - 1], indicator[j - 1]
        if gi != gj:
            raise ParseError(
                f"{a_path}:{lineno}: edge ({i}, {j}) joins graphs {gi} and {gj}"
            )
        base = offsets[gi - 1]
        edges[gi - 1].append((i - 1 - base, j - 1 - base))

    graphs = []
    for g in range(n_graphs):
        e = np.asarray(edges[g], dtype=np.int64).reshape(-1, 2)
        graphs.append(TUGraph(n_nodes=int(counts[g]), edges=e, label=labels[g]))
    return graphs


def graph_to_adjacency(graph, m):
    """Embed a graph into the smallest m**K x m**K adjacency matrix.

    K = ceil(log_m(max(n_nodes, m))), with the extra rows and columns left
    as isolated nodes.
    """
    m = check_positive_int(m, "m")
    if m < 2:
        raise ValidationError("m must be at least 2")
    n = check_positive_int(graph.n_nodes, "n_nodes")
    K = 1
    while m ** K < n:
        K += 1
    N = m ** K
    A = np.zeros((N, N), dtype=np.uint8)
    if graph.edges.size:
        if graph.edges.min() < 0 or graph.edges.max() >= n:
            raise ValidationError("edge endpoints must be local ids in [0, n_nodes)")
        A[graph.edges[:, 0], graph.edges[:, 1]] = 1
    return A


def extract_features(graphs, m, config=None, accelerate=False):
    """Run the inference pipeline on every graph and stack feature rows.

    Graphs on which inference is impossible (empty or complete, so the
    base rate is degenerate) contribute an all-zero row; a single warning
    reports how many were skipped. Identical graphs give identical rows.
    """
    config = config or SolverConfig()
    rows = []
    labels = []
    degenerate = 0
    for g in graphs:
        A = graph_to_adjacency(g, m)
        try:
            res = infer(A, m, dc_replace(config), accelerate=accelerate)
            row = np.concatenate([[res.p_hat], res.X_hat.flatten(order="F")])
        except ValidationError:
            degenerate += 1
            row = np.zeros(m * m + 1)
        rows.append(row)
        labels.append(g.label)
    if degenerate:
        warnings.warn(f"{degenerate} graph(s) had degenerate edge density; "
                      "emitted zero rows", RuntimeWarning, stacklevel=2)
    return FeatureTable(
        features=np.asarray(rows, dtype=float),
        labels=np.asarray(labels, dtype=float),
        m=m,
    )


def standardize_features(table):
    """Center and scale each feature column to zero mean and unit variance.

    Uses the population standard deviation. Zero-variance columns become
    identically zero. Requires at least two rows.
    """
    if table.features.shape[0] < 2:
        raise ValidationError("standardization needs at least two rows")
    mu = table.features.mean(axis=0)
    sd = table.features.std(axis=0)
    scale = np.where(sd > 0, sd, 1.0)
    return FeatureTable(
        features=(table.features - mu) / scale,
        labels=table.labels.copy(),
        m=table.m,
        standardized=True,
    )

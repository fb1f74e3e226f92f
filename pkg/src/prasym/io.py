"""Plain-text formats: edge lists and one-value-per-line vectors."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParameterError
from .graphs import Graph


def write_edge_list(g: Graph, path) -> None:
    """Header ``"n m"`` then one ``"i j"`` per edge, i < j, lexicographic order."""
    edges = g.edges()
    with open(path, "w") as fh:
        fh.write(f"{g.n} {len(edges)}\n")
        if len(edges):
            np.savetxt(fh, edges, fmt="%d")


def read_edge_list(path) -> Graph:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ParameterError(f"{path}: expected header 'n m_edges'")
        n, m = int(header[0]), int(header[1])
        body = fh.read()
    edges = np.array(body.split(), dtype=np.int64).reshape(-1, 2) if body.strip() else np.empty((0, 2), np.int64)
    if len(edges) != m:
        raise ParameterError(f"{path}: header says {m} edges, found {len(edges)}")
    return Graph.from_edges(n, edges)


def write_vector(x, path) -> None:
    """One decimal per line at 17 significant digits (round-trips float64 exactly)."""
    Path(path).write_text("".join(f"{v:.17g}\n" for v in np.asarray(x, dtype=float)))


def read_vector(path) -> np.ndarray:
    text = Path(path).read_text().split()
    return np.array([float(t) for t in text])

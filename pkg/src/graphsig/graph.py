"""Sparse undirected graphs and normalized propagation operators.

A graph is held as a symmetric 0/1 adjacency in CSR form together with
its degree vector.  Two propagation operators are derived from it: the
row-normalized transition matrix (each row of a non-isolated node sums
to one) and the symmetric-normalized matrix with entries
1/sqrt(d_i d_j) on edges.  Isolated nodes get all-zero rows in both, so
every propagated signal stays finite.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class SparseGraph:
    """Undirected graph: node count, sorted edge array, CSR adjacency, degrees.

    ``edges`` is an (m, 2) int array with u < v per row, lexicographically
    sorted, no duplicates, no self-loops.  ``degree[i]`` is the neighbor
    count of node i.
    """

    n: int
    edges: np.ndarray
    adj: sp.csr_matrix
    degree: np.ndarray

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]


def build_graph(n: int, edge_list) -> SparseGraph:
    """Build a SparseGraph from a raw edge list.

    The input may contain duplicates, self-loops, or both orientations of
    an edge; all are collapsed to a clean undirected edge set.  Endpoints
    outside [0, n) raise ValueError naming the offending edge.
    """
    if n < 0:
        raise ValueError(f"node count must be nonnegative, got {n}")
    pairs = set()
    for u, v in edge_list:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u},{v}) has endpoint outside [0,{n})")
        if u == v:
            continue
        pairs.add((u, v) if u < v else (v, u))
    if pairs:
        edges = np.array(sorted(pairs), dtype=np.int64)
    else:
        edges = np.zeros((0, 2), dtype=np.int64)
    return _from_clean_edges(n, edges)


def _from_clean_edges(n: int, edges: np.ndarray) -> SparseGraph:
    m = edges.shape[0]
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    data = np.ones(2 * m, dtype=np.float64)
    adj = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    degree = np.asarray(adj.sum(axis=1)).ravel().astype(np.int64)
    return SparseGraph(n=n, edges=edges, adj=adj, degree=degree)


@dataclass(frozen=True)
class PropagationOperator:
    """Normalized propagation operator, kind 'row' or 'sym'."""

    kind: str
    matrix: sp.csr_matrix


def _inv_degree(degree: np.ndarray) -> np.ndarray:
    # isolated nodes: 1/d := 0, giving zero operator rows
    inv = np.zeros(degree.shape[0], dtype=np.float64)
    nz = degree > 0
    inv[nz] = 1.0 / degree[nz]
    return inv


def row_operator(g: SparseGraph) -> PropagationOperator:
    """Row-normalized transition matrix D^-1 A (zero rows for isolated nodes)."""
    inv = _inv_degree(g.degree)
    mat = sp.diags(inv).dot(g.adj).tocsr()
    return PropagationOperator(kind="row", matrix=mat)


def sym_operator(g: SparseGraph) -> PropagationOperator:
    """Symmetric-normalized matrix D^-1/2 A D^-1/2."""
    inv_sqrt = np.sqrt(_inv_degree(g.degree))
    d = sp.diags(inv_sqrt)
    mat = d.dot(g.adj).dot(d).tocsr()
    return PropagationOperator(kind="sym", matrix=mat)


def propagate(op: PropagationOperator, X: np.ndarray) -> np.ndarray:
    """Sparse-dense product op @ X; apply repeatedly for operator powers."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != op.matrix.shape[1]:
        raise ValueError(
            f"shape mismatch: operator is {op.matrix.shape}, signal is {X.shape}"
        )
    return np.asarray(op.matrix.dot(X))


def load_edge_list(path, n_nodes=None) -> list:
    """Read a 'src,dst' per line edge file (optional 'src,dst' header).

    Returns raw integer pairs; full validation happens in build_graph,
    but when ``n_nodes`` is given, out-of-range ids fail here so the
    error can carry a line number.  Malformed lines raise ValueError
    with the line number.
    """
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if lineno == 1 and line.replace(" ", "") == "src,dst":
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'src,dst', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: non-integer node id in {line!r}"
                ) from None
            if n_nodes is not None and not (0 <= u < n_nodes and 0 <= v < n_nodes):
                raise ValueError(
                    f"{path}:{lineno}: node id outside [0, {n_nodes}) in {line!r}"
                )
            pairs.append((u, v))
    return pairs


def save_edge_list(path, edges) -> None:
    """Write edges in the standard 'src,dst' text format with header."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("src,dst\n")
        for u, v in edges:
            fh.write(f"{int(u)},{int(v)}\n")

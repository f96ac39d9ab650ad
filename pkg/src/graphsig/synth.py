"""Synthetic planted-partition datasets for tests and demos.

Graphs come from a stochastic block model; features are isotropic
Gaussians with a per-class mean offset along a coordinate axis, so the
class signal strength and the graph assortativity can be dialed
independently.
"""

import numpy as np

from .graph import build_graph


def sbm_graph(sizes, p_within: float, p_between: float, seed: int = 0):
    """Undirected stochastic block model; returns (graph, labels)."""
    sizes = [int(s) for s in sizes]
    if any(s < 1 for s in sizes):
        raise ValueError("every block needs at least one node")
    for p in (p_within, p_between):
        if not (0 <= p <= 1):
            raise ValueError("edge probabilities must lie in [0, 1]")
    n = sum(sizes)
    y = np.repeat(np.arange(len(sizes)), sizes)
    rng = np.random.default_rng(seed)
    same = y[:, None] == y[None, :]
    prob = np.where(same, p_within, p_between)
    draw = rng.random((n, n))
    iu, ju = np.triu_indices(n, k=1)
    mask = draw[iu, ju] < prob[iu, ju]
    edges = np.stack([iu[mask], ju[mask]], axis=1)
    return build_graph(n, edges), y


def gaussian_features(y, d: int, shift: float, seed: int = 0, noise: float = 1.0):
    """Standard-normal features plus ``shift`` along axis (c mod d)."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    X = noise * rng.standard_normal((y.shape[0], int(d)))
    for c in np.unique(y):
        X[y == c, int(c) % d] += shift
    return X


def make_sbm_dataset(
    n_per_class: int = 100,
    n_classes: int = 2,
    p_within: float = 0.10,
    p_between: float = 0.01,
    d: int = 20,
    shift: float = 0.6,
    seed: int = 0,
):
    """Convenience bundle: (graph, features, labels) from one seed."""
    g, y = sbm_graph([n_per_class] * n_classes, p_within, p_between, seed=seed)
    X = gaussian_features(y, d, shift, seed=seed + 1)
    return g, X, y

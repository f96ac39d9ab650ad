"""The nine-block graph-signal dictionary.

Blocks, in fixed order: the raw features X; the low-pass propagations
P_row X, P_row^2 X, P_row^3 X, P_sym X, P_sym^2 X; and the high-pass
differences X - P_row X, P_row X - P_row^2 X, X - P_sym X.  Differences
are formed from the un-normalized propagated matrices; every block is
then row-L2 normalized independently and the active blocks are
concatenated columnwise.  Each output coordinate remembers which block
it came from, which is what the downstream evidence decomposition runs
on.
"""

from dataclasses import dataclass

import numpy as np

from .graph import SparseGraph, propagate, row_operator, sym_operator


@dataclass(frozen=True)
class BlockId:
    index: int
    name: str
    family: str  # raw | low | high


BLOCKS = (
    BlockId(0, "X", "raw"),
    BlockId(1, "ProwX", "low"),
    BlockId(2, "Prow2X", "low"),
    BlockId(3, "Prow3X", "low"),
    BlockId(4, "X-ProwX", "high"),
    BlockId(5, "ProwX-Prow2X", "high"),
    BlockId(6, "PsymX", "low"),
    BlockId(7, "Psym2X", "low"),
    BlockId(8, "X-PsymX", "high"),
)

BLOCK_NAMES = tuple(b.name for b in BLOCKS)
FAMILIES = ("raw", "low", "high")

_BY_NAME = {b.name: b for b in BLOCKS}


def block_by_name(name: str) -> BlockId:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise KeyError(f"unknown block {name!r}; valid: {', '.join(BLOCK_NAMES)}") from None


def family_blocks(family: str, active=BLOCKS) -> tuple:
    return tuple(b for b in active if b.family == family)


@dataclass(frozen=True)
class SignalDictionary:
    """Concatenated, block-normalized signal matrix with coordinate metadata.

    F0 is n x p with p = len(active) * d.  coord_block[j] is the block
    index (0..8) owning column j; columns of one block are contiguous and
    ordered by block index.
    """

    F0: np.ndarray
    coord_block: np.ndarray
    d: int
    active: tuple

    @property
    def n(self) -> int:
        return self.F0.shape[0]

    @property
    def p(self) -> int:
        return self.F0.shape[1]


def _row_l2_normalize(M: np.ndarray) -> np.ndarray:
    # zero rows stay zero: no epsilon inflation of no-evidence rows
    norms = np.linalg.norm(M, axis=1)
    scale = np.zeros_like(norms)
    nz = norms > 0
    scale[nz] = 1.0 / norms[nz]
    return M * scale[:, None]


def build_dictionary(g: SparseGraph, X: np.ndarray, active_blocks=None) -> SignalDictionary:
    """Build the dictionary for the given active block subset (default: all nine).

    Computes the propagated matrices by iterated sparse products, forms
    difference blocks from the un-normalized propagations, row-normalizes
    each block, and concatenates in canonical block order.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != g.n:
        raise ValueError(f"features must be (n={g.n}, d), got {X.shape}")
    if not np.all(np.isfinite(X)):
        bad = np.argwhere(~np.isfinite(X))[0]
        raise ValueError(f"non-finite feature entry at row {bad[0]}, column {bad[1]}")

    if active_blocks is None:
        active = BLOCKS
    else:
        active = tuple(
            b if isinstance(b, BlockId) else block_by_name(b) for b in active_blocks
        )
        active = tuple(sorted(set(active), key=lambda b: b.index))
    if not active:
        raise ValueError("active_blocks must be nonempty")

    names = {b.name for b in active}
    need_row = 0
    if names & {"ProwX", "X-ProwX"}:
        need_row = 1
    if names & {"Prow2X", "ProwX-Prow2X"}:
        need_row = 2
    if "Prow3X" in names:
        need_row = 3
    need_sym = 0
    if names & {"PsymX", "X-PsymX"}:
        need_sym = 1
    if "Psym2X" in names:
        need_sym = 2

    row_pows = {}
    if need_row:
        P = row_operator(g)
        cur = X
        for k in range(1, need_row + 1):
            cur = propagate(P, cur)
            row_pows[k] = cur
    sym_pows = {}
    if need_sym:
        Q = sym_operator(g)
        cur = X
        for k in range(1, need_sym + 1):
            cur = propagate(Q, cur)
            sym_pows[k] = cur

    raw_block = {
        "X": lambda: X,
        "ProwX": lambda: row_pows[1],
        "Prow2X": lambda: row_pows[2],
        "Prow3X": lambda: row_pows[3],
        "X-ProwX": lambda: X - row_pows[1],
        "ProwX-Prow2X": lambda: row_pows[1] - row_pows[2],
        "PsymX": lambda: sym_pows[1],
        "Psym2X": lambda: sym_pows[2],
        "X-PsymX": lambda: X - sym_pows[1],
    }

    parts = []
    coord_block = []
    d = X.shape[1]
    for b in active:
        parts.append(_row_l2_normalize(raw_block[b.name]()))
        coord_block.extend([b.index] * d)
    F0 = np.concatenate(parts, axis=1)
    return SignalDictionary(
        F0=F0, coord_block=np.array(coord_block, dtype=np.int64), d=d, active=active
    )


def block_slice(dictionary: SignalDictionary, b) -> np.ndarray:
    """Contiguous column slice of one active block (KeyError if inactive)."""
    if not isinstance(b, BlockId):
        b = block_by_name(b)
    for pos, active in enumerate(dictionary.active):
        if active.index == b.index:
            d = dictionary.d
            return dictionary.F0[:, pos * d : (pos + 1) * d]
    raise KeyError(f"block {b.name!r} is not active in this dictionary")

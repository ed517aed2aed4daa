"""Block-partitioned stochastic matrices and vectors.

Core containers and checks for level-phase Markov chains with block size d:

- BlockStochasticMatrix / BlockVector / PhaseMatrix
- block-monotonicity, block-wise dominance, block-increasing predicates
  (all computed via suffix-sum passes over level blocks)
- last-column-block-augmented (LCB) truncation
- stationary distributions via subtraction-free state reduction
- total-variation and weighted-norm distances

Levels index the unbounded coordinate, phases the finite one; state (k, i)
maps to flat index k*d + i.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

__all__ = [
    "BlockStochasticMatrix",
    "BlockVector",
    "PhaseMatrix",
    "MultipleClosedClassesError",
    "PhaseStructureError",
    "StationarySolveError",
    "is_block_monotone",
    "block_dominates",
    "vector_dominates",
    "is_block_increasing",
    "lcb_truncate",
    "stationary",
    "tv_distance",
    "v_norm_distance",
    "phase_matrix",
    "transient_distribution",
]

# Default slack for monotonicity/dominance comparisons: folded tail sums carry
# rounding, so exact comparisons would reject valid inputs. Strict checks are
# available by passing tol=0.
CHECK_TOLERANCE = 1e-12

ROW_SUM_TOLERANCE = 1e-9
STATIONARY_RESIDUAL_TOLERANCE = 1e-10


class MultipleClosedClassesError(ValueError):
    """The chain has more than one closed communicating class."""

    def __init__(self, classes: list[list[tuple[int, int]]]):
        self.classes = classes
        preview = "; ".join(str(cls[:4]) + ("..." if len(cls) > 4 else "") for cls in classes)
        super().__init__(f"{len(classes)} closed classes detected: {preview}")


class PhaseStructureError(ValueError):
    """Row phase sums are not constant across levels within tolerance."""


class StationarySolveError(RuntimeError):
    """The stationary solve failed a numerical sanity check."""


@dataclass(frozen=True, eq=False)
class BlockStochasticMatrix:
    """Finite corner of a block-partitioned (sub)stochastic matrix.

    Stores levels 0..levels-1 as rows and 0..col_levels-1 as columns of d x d
    blocks, in one dense array of shape (levels*d, col_levels*d). Rectangular
    corners (col_levels > levels) hold complete rows of a larger matrix whose
    remaining rows, if any, are described by `tail` (a GI/G/1-type model
    object that can regenerate them).
    """

    d: int
    values: np.ndarray
    substochastic: bool = False
    tail: object | None = field(default=None, repr=False)
    row_tolerance: float = ROW_SUM_TOLERANCE

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if self.d < 1:
            raise ValueError("block size d must be >= 1")
        if values.ndim != 2:
            raise ValueError("values must be a 2-D array")
        rows, cols = values.shape
        if rows == 0 or rows % self.d or cols % self.d or cols < rows:
            raise ValueError(
                f"values shape {values.shape} is not (R*d, C*d) with C >= R >= 1 for d={self.d}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix entries must be finite")
        if np.any(values < 0):
            k, i = divmod(int(np.argmin(values.min(axis=1))), self.d)
            raise ValueError(f"negative entry in row (level {k}, phase {i})")
        sums = values.sum(axis=1)
        if self.substochastic:
            bad = sums > 1.0 + self.row_tolerance
        else:
            bad = np.abs(sums - 1.0) > self.row_tolerance
        if np.any(bad):
            state = int(np.argmax(bad))
            raise ValueError(
                f"row (level {state // self.d}, phase {state % self.d}) sums to "
                f"{sums[state]:.12g}, outside tolerance {self.row_tolerance:g}"
            )

    @property
    def levels(self) -> int:
        """Number of stored row levels."""
        return self.values.shape[0] // self.d

    @property
    def col_levels(self) -> int:
        """Number of stored column levels."""
        return self.values.shape[1] // self.d

    @property
    def square(self) -> bool:
        return self.values.shape[0] == self.values.shape[1]

    def as_blocks(self) -> np.ndarray:
        """View of shape (levels, d, col_levels, d); [k, i, l, j] indexing."""
        return self.values.reshape(self.levels, self.d, self.col_levels, self.d)

    def block(self, k: int, l: int) -> np.ndarray:
        """The d x d block at row level k, column level l (copy)."""
        d = self.d
        return self.values[k * d:(k + 1) * d, l * d:(l + 1) * d].copy()

    @classmethod
    def from_blocks(
        cls,
        d: int,
        blocks: dict[tuple[int, int], np.ndarray],
        levels: int | None = None,
        col_levels: int | None = None,
        **kwargs,
    ) -> "BlockStochasticMatrix":
        """Assemble from a sparse {(k, l): d x d block} map; absent blocks are zero."""
        if not blocks and levels is None:
            raise ValueError("empty block map needs explicit levels")
        max_k = max((k for k, _ in blocks), default=0)
        max_l = max((l for _, l in blocks), default=0)
        levels = max_k + 1 if levels is None else levels
        col_levels = max(max_l + 1, levels) if col_levels is None else col_levels
        values = np.zeros((levels * d, col_levels * d))
        for (k, l), blk in blocks.items():
            blk = np.asarray(blk, dtype=float)
            if blk.shape != (d, d):
                raise ValueError(f"block ({k},{l}) has shape {blk.shape}, expected ({d},{d})")
            values[k * d:(k + 1) * d, l * d:(l + 1) * d] = blk
        return cls(d=d, values=values, **kwargs)


@dataclass(frozen=True, eq=False)
class BlockVector:
    """Level-indexed list of length-d vectors, stored as an (levels, d) array."""

    d: int
    entries: np.ndarray

    def __post_init__(self):
        entries = np.atleast_2d(np.asarray(self.entries, dtype=float))
        object.__setattr__(self, "entries", entries)
        if self.d < 1:
            raise ValueError("block size d must be >= 1")
        if entries.ndim != 2 or entries.shape[1] != self.d:
            raise ValueError(f"entries shape {entries.shape} incompatible with d={self.d}")
        if not np.all(np.isfinite(entries)):
            raise ValueError("vector entries must be finite")

    @property
    def levels(self) -> int:
        return self.entries.shape[0]

    @property
    def flat(self) -> np.ndarray:
        return self.entries.reshape(-1)

    def padded(self, levels: int) -> np.ndarray:
        """Entries zero-padded (or unchanged) to the requested level count."""
        if levels < self.levels:
            raise ValueError("padding cannot drop levels")
        out = np.zeros((levels, self.d))
        out[: self.levels] = self.entries
        return out

    def suffix_sums(self) -> np.ndarray:
        """S[l, j] = sum over m >= l of entries[m, j]."""
        return np.flip(np.cumsum(np.flip(self.entries, axis=0), axis=0), axis=0)

    def is_probability(self, tol: float = ROW_SUM_TOLERANCE) -> bool:
        return bool(np.all(self.entries >= -tol) and abs(self.entries.sum() - 1.0) <= tol)


@dataclass(frozen=True, eq=False)
class PhaseMatrix:
    """Phase-marginal transition kernel with its stationary vector."""

    psi: np.ndarray
    varpi: np.ndarray | None = None

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=float)
        object.__setattr__(self, "psi", psi)
        if psi.ndim != 2 or psi.shape[0] != psi.shape[1]:
            raise ValueError("psi must be square")
        if np.any(psi < 0) or np.any(np.abs(psi.sum(axis=1) - 1.0) > ROW_SUM_TOLERANCE):
            raise ValueError("psi must be a stochastic matrix")
        if self.varpi is not None:
            varpi = np.asarray(self.varpi, dtype=float)
            object.__setattr__(self, "varpi", varpi)
            if varpi.shape != (psi.shape[0],):
                raise ValueError("varpi has wrong shape")
            if np.any(varpi < -1e-12) or abs(varpi.sum() - 1.0) > 1e-8:
                raise ValueError("varpi must be a probability vector")
            if np.max(np.abs(varpi @ psi - varpi)) > 1e-8:
                raise ValueError("varpi is not stationary for psi")

    @property
    def d(self) -> int:
        return self.psi.shape[0]


def _suffix_sums(blocks: np.ndarray) -> np.ndarray:
    # S[k, i, l, j] = sum over m >= l of blocks[k, i, m, j]
    return np.flip(np.cumsum(np.flip(blocks, axis=2), axis=2), axis=2)


def is_block_monotone(S, tol: float = CHECK_TOLERANCE) -> bool:
    """Check block-monotonicity: block tail sums non-decreasing in the level.

    True iff for every stored pair of consecutive row levels k, k+1 and every
    (l, i, j): sum over m >= l of s(k,i;m,j) <= the same sum at k+1, within
    tol. GI/G/1-type model objects are checked analytically via their own
    method (their repeating rows cannot be enumerated).
    """
    if hasattr(S, "is_block_monotone"):
        return S.is_block_monotone(tol)
    sums = _suffix_sums(S.as_blocks())
    return bool(np.all(sums[:-1] <= sums[1:] + tol))


def _padded_suffix_sums(P: BlockStochasticMatrix, levels: int, col_levels: int) -> np.ndarray:
    blocks = np.zeros((levels, P.d, col_levels, P.d))
    blocks[: P.levels, :, : P.col_levels, :] = P.as_blocks()
    return _suffix_sums(blocks)


def block_dominates(P1, P2, tol: float = CHECK_TOLERANCE) -> bool:
    """Check block-wise dominance of P1 by P2 (P1's block tail sums <= P2's).

    Rows and columns are compared over the union of stored levels; the
    shorter operand is zero-padded, so a truncated corner can be compared
    against a larger corner of the original chain.
    """
    if P1.d != P2.d:
        raise ValueError(f"block size mismatch: {P1.d} != {P2.d}")
    levels = max(P1.levels, P2.levels)
    col_levels = max(P1.col_levels, P2.col_levels)
    s1 = _padded_suffix_sums(P1, levels, col_levels)
    s2 = _padded_suffix_sums(P2, levels, col_levels)
    return bool(np.all(s1 <= s2 + tol))


def vector_dominates(mu: BlockVector, eta: BlockVector, tol: float = CHECK_TOLERANCE) -> bool:
    """Check block-wise dominance of probability vector mu by eta."""
    if mu.d != eta.d:
        raise ValueError(f"block size mismatch: {mu.d} != {eta.d}")
    for name, vec in (("mu", mu), ("eta", eta)):
        if not vec.is_probability():
            raise ValueError(f"{name} is not a probability vector")
    levels = max(mu.levels, eta.levels)
    s_mu = BlockVector(mu.d, mu.padded(levels)).suffix_sums()
    s_eta = BlockVector(eta.d, eta.padded(levels)).suffix_sums()
    return bool(np.all(s_mu <= s_eta + tol))


def is_block_increasing(f: BlockVector, tol: float = 0.0) -> bool:
    """True iff f(k, i) <= f(k+1, i) for all stored k and every phase i."""
    return bool(np.all(f.entries[:-1] <= f.entries[1:] + tol))


def lcb_truncate(P, n: int) -> BlockStochasticMatrix:
    """Last-column-block-augmented truncation at level n.

    Keeps rows/columns 0..n, copying columns l < n and folding all mass from
    column levels >= n into column n. Accepts either a stored corner with at
    least n+1 complete rows or a GI/G/1-type model object (exact analytic
    fold).

    Args:
        P: BlockStochasticMatrix (complete rows) or GI/G/1-type model.
        n: truncation level, >= 1.

    Returns:
        Square (n+1)-level BlockStochasticMatrix.
    """
    if n < 1:
        raise ValueError("truncation level n must be >= 1")
    if not isinstance(P, BlockStochasticMatrix):
        return P.truncate(n)
    if P.levels < n + 1:
        if P.tail is not None:
            return P.tail.truncate(n)
        raise ValueError(
            f"n={n} exceeds the {P.levels} stored levels and no tail descriptor is attached"
        )
    d = P.d
    blocks = P.as_blocks()
    out = np.zeros((n + 1, d, n + 1, d))
    out[:, :, :n, :] = blocks[: n + 1, :, :n, :]
    out[:, :, n, :] = blocks[: n + 1, :, n:, :].sum(axis=2)
    return BlockStochasticMatrix(
        d=d,
        values=out.reshape((n + 1) * d, (n + 1) * d),
        substochastic=P.substochastic,
        row_tolerance=P.row_tolerance,
    )


def _closed_classes(pattern: np.ndarray) -> list[np.ndarray]:
    """State lists of the closed strongly connected classes of a 0/1 pattern."""
    graph = sparse.csr_matrix(pattern)
    n_comp, labels = csgraph.connected_components(graph, directed=True, connection="strong")
    rows, cols = np.nonzero(pattern)
    is_open = np.zeros(n_comp, dtype=bool)
    crossing = labels[rows] != labels[cols]
    is_open[labels[rows[crossing]]] = True
    return [np.nonzero(labels == c)[0] for c in range(n_comp) if not is_open[c]]


def _gth_stationary(W: np.ndarray) -> np.ndarray:
    """Stationary vector of an irreducible stochastic matrix, GTH elimination.

    Subtraction-free state reduction: no cancellation, stable for nearly
    reducible inputs. The rank-1 update is restricted to the nonzero support
    of the pivot row/column, which keeps banded matrices near O(states).
    """
    A = np.array(W, dtype=float)
    n = A.shape[0]
    if n == 1:
        return np.ones(1)
    trim = np.empty(n)
    for s in range(n - 1, 0, -1):
        row = A[s, :s]
        total = row.sum()
        if total <= 0.0:
            raise StationarySolveError(
                f"state {s} cannot reach lower states inside its class (numerical degeneracy)"
            )
        trim[s] = total
        col = A[:s, s]
        rows_nz = np.nonzero(col)[0]
        cols_nz = np.nonzero(row)[0]
        if rows_nz.size and cols_nz.size:
            A[np.ix_(rows_nz, cols_nz)] += np.outer(col[rows_nz], row[cols_nz] / total)
    pi = np.empty(n)
    pi[0] = 1.0
    for s in range(1, n):
        pi[s] = (pi[:s] @ A[:s, s]) / trim[s]
    return pi / pi.sum()


def _stationary_flat(W: np.ndarray, residual_tol: float, d: int) -> np.ndarray:
    classes = _closed_classes(W > 0.0)
    if len(classes) > 1:
        as_states = [[(int(s) // d, int(s) % d) for s in cls] for cls in classes]
        raise MultipleClosedClassesError(as_states)
    cls = classes[0]
    pi = np.zeros(W.shape[0])
    pi[cls] = _gth_stationary(W[np.ix_(cls, cls)])
    residual = float(np.max(np.abs(pi @ W - pi)))
    if residual > residual_tol:
        raise StationarySolveError(f"stationary residual {residual:.3e} exceeds {residual_tol:g}")
    return pi


def stationary(
    P: BlockStochasticMatrix, residual_tol: float = STATIONARY_RESIDUAL_TOLERANCE
) -> BlockVector:
    """Stationary distribution of a finite stochastic corner.

    Args:
        P: square, stochastic BlockStochasticMatrix (truncate first if needed).
        residual_tol: maximum allowed max-norm residual of pi*P - pi.

    Returns:
        Probability BlockVector; states outside the unique closed class get 0.

    Raises:
        MultipleClosedClassesError: more than one closed class (lists them).
        ValueError: non-square or substochastic input.
        StationarySolveError: residual check failed.
    """
    if not P.square:
        raise ValueError("stationary needs a square corner; apply lcb_truncate first")
    if P.substochastic:
        raise ValueError("stationary needs stochastic rows")
    pi = _stationary_flat(P.values, residual_tol, P.d)
    return BlockVector(P.d, pi.reshape(P.levels, P.d))


def tv_distance(x: BlockVector, y: BlockVector) -> float:
    """Total variation distance: sum of |x - y| over all (level, phase)."""
    if x.d != y.d:
        raise ValueError(f"block size mismatch: {x.d} != {y.d}")
    levels = max(x.levels, y.levels)
    return float(np.abs(x.padded(levels) - y.padded(levels)).sum())


def v_norm_distance(x: BlockVector, y: BlockVector, v: BlockVector) -> float:
    """Weighted distance sum |x - y| * v with weights v >= 1 everywhere."""
    if x.d != y.d or x.d != v.d:
        raise ValueError("block size mismatch")
    if np.any(v.entries < 1.0 - 1e-12):
        raise ValueError("weight vector must be >= 1 everywhere")
    levels = max(x.levels, y.levels)
    if v.levels < levels:
        raise ValueError(f"weight vector covers {v.levels} levels, need {levels}")
    diff = np.abs(x.padded(levels) - y.padded(levels))
    return float((diff * v.entries[:levels]).sum())


def phase_matrix(P, tol: float = CHECK_TOLERANCE) -> PhaseMatrix:
    """Phase-marginal kernel psi(i, j) = sum over l of p(k,i;l,j), any k.

    The row phase sums of a block-monotone chain do not depend on the level;
    this is verified across all stored levels within tol. Also solves for the
    stationary phase vector.

    Raises:
        PhaseStructureError: phase sums vary with the level beyond tol.
    """
    if hasattr(P, "phase_matrix"):
        return P.phase_matrix(tol)
    per_level = P.as_blocks().sum(axis=2)
    spread = float(np.max(np.abs(per_level - per_level[0]))) if P.levels > 1 else 0.0
    if spread > tol:
        raise PhaseStructureError(
            f"row phase sums vary across levels by {spread:.3e} (> {tol:g})"
        )
    psi = per_level[0]
    varpi = _stationary_flat(psi, STATIONARY_RESIDUAL_TOLERANCE, d=1)
    return PhaseMatrix(psi=psi, varpi=varpi)


def transient_distribution(P: BlockStochasticMatrix, init: BlockVector, m: int) -> BlockVector:
    """Distribution after m steps from init under a finite square corner."""
    if not P.square:
        raise ValueError("transient_distribution needs a square corner")
    if m < 1:
        raise ValueError("step count m must be >= 1")
    if init.d != P.d:
        raise ValueError("block size mismatch")
    if not init.is_probability():
        raise ValueError("init is not a probability vector")
    if init.levels > P.levels:
        raise ValueError("init has more levels than the matrix")
    x = init.padded(P.levels).reshape(-1)
    for _ in range(m):
        x = x @ P.values
    return BlockVector(P.d, x.reshape(P.levels, P.d))

"""Shared model builders, random generators and slow explicit oracles.

The explicit T-product oracles materialize the block lower-triangular
all-ones transform, which the library itself never builds; tests use them to
cross-check the suffix-sum implementations.
"""

from __future__ import annotations

import numpy as np

from bmtrunc import BlockStochasticMatrix, BlockVector, GIG1Model, assemble

# deterministic seed for the randomly generated acceptance model
RANDOM_MODEL_SEED = 20260814


# --- explicit transform oracles (tests only) ---


def t_matrix(levels: int, d: int) -> np.ndarray:
    """Block lower-triangular matrix of identity blocks."""
    return np.kron(np.tril(np.ones((levels, levels))), np.eye(d))


def t_inverse(levels: int, d: int) -> np.ndarray:
    core = np.eye(levels)
    core[np.arange(1, levels), np.arange(levels - 1)] = -1.0
    return np.kron(core, np.eye(d))


def oracle_block_monotone(P: BlockStochasticMatrix, tol: float = 1e-12) -> bool:
    """Def-style oracle: T^{-1} S T >= O, with T materialized."""
    if not P.square:
        raise ValueError("oracle needs a square corner")
    levels, d = P.levels, P.d
    product = t_inverse(levels, d) @ P.values @ t_matrix(levels, d)
    return bool(np.all(product >= -tol))


def oracle_dominates(P1: BlockStochasticMatrix, P2: BlockStochasticMatrix, tol=1e-12) -> bool:
    """Def-style oracle: P1 T <= P2 T element-wise, with T materialized."""
    T = t_matrix(P1.col_levels, P1.d)
    return bool(np.all(P1.values @ T <= P2.values @ T + tol))


# --- fixed models used across module and acceptance tests ---


def natural_walk() -> GIG1Model:
    """d=1 birth-death, up 0.4 / down 0.6, reflecting self-loop at 0."""
    return GIG1Model(
        d=1,
        A={-1: [[0.6]], 1: [[0.4]]},
        B={-1: [[0.6]], 0: [[0.6]], 1: [[0.4]]},
    )


def mg1_walk() -> GIG1Model:
    """Same walk in skip-free-downward form (level-0 row jumps to level 2)."""
    return GIG1Model(
        d=1,
        A={-1: [[0.6]], 1: [[0.4]]},
        B={-1: [[0.6]], 0: [[0.6]], 2: [[0.4]]},
    )


_A2 = {
    -1: np.array([[0.5, 0.1], [0.2, 0.3]]),
    0: np.array([[0.1, 0.1], [0.2, 0.1]]),
    1: np.array([[0.1, 0.1], [0.1, 0.1]]),
}


def mg1_d2() -> GIG1Model:
    """d=2 skip-free-downward model with three-term A-support."""
    return GIG1Model(
        d=2,
        A=_A2,
        B={-1: _A2[-1], 0: _A2[-1], 1: _A2[0], 2: _A2[1]},
    )


def gig1_d2() -> GIG1Model:
    """d=2 model off the skip-free pattern (forces the boundary lift)."""
    return GIG1Model(
        d=2,
        A=_A2,
        B={
            -1: _A2[-1],
            0: _A2[-1] + _A2[0] + 0.5 * _A2[1],
            1: 0.5 * _A2[1],
        },
    )


def dominance_pair(levels: int = 801):
    """(P, Ptilde): Ptilde the monotone d=2 corner, P a dominated non-monotone edit.

    Row 1 of the assembled corner moves 0.05 from every entry of its
    level-2 block to the matching entry of its level-0 block: downward mass
    moves shrink tail sums (dominated) while breaking the row-0 <= row-1
    tail-sum ordering (not block-monotone). Phase sums are untouched.
    """
    model = mg1_d2()
    corner = assemble(model, levels)
    values = corner.values.copy()
    d = model.d
    shift = 0.05 * np.ones((d, d))
    values[d:2 * d, 0:d] += shift
    values[d:2 * d, 2 * d:3 * d] -= shift
    edited = BlockStochasticMatrix(d=d, values=values)
    return edited, model


def random_monotone_gig1(seed: int = RANDOM_MODEL_SEED) -> GIG1Model:
    """Random block-monotone d=2 model with A-support {-2..2}.

    Rows below the boundary are forced by monotonicity (B(-k) = sum of
    A-blocks at or below -k); the level-0 row starts from the fold of all
    downward mass into level 0 and then moves extra random mass downward,
    which keeps the tail-sum inequalities intact.
    """
    from bmtrunc import mean_drift

    rng = np.random.default_rng(seed)
    d = 2
    while True:
        weights = np.array([3.0, 2.5, 1.0, 1.0, 0.8])  # tilt toward downward moves
        raw = {
            j: w * rng.uniform(0.05, 1.0, size=(d, d))
            for j, w in zip(range(-2, 3), weights)
        }
        total = sum(raw.values()).sum(axis=1)
        A = {j: blk / total[:, None] for j, blk in raw.items()}
        B = {-2: A[-2], -1: A[-2] + A[-1], 0: A[-2] + A[-1]}
        for l in range(1, 4):
            B[l] = A[l - 1].copy()
        if mean_drift(GIG1Model(d=d, A=A, B=B)) < -0.05:
            break
    # push random mass down from column blocks 1..3 to column 0
    for l in range(1, 4):
        movable = rng.uniform(0.0, 0.5, size=(d, d)) * B[l]
        B[l] = B[l] - movable
        B[0] = B[0] + movable
    return GIG1Model(d=d, A=A, B=B)


def acceptance_models():
    """The five-model soundness suite: (name, model, dominating or None)."""
    edited, tilde = dominance_pair()
    return [
        ("d1-birth-death", natural_walk(), None),
        ("d2-skip-free", mg1_d2(), None),
        ("d2-general", gig1_d2(), None),
        ("dominated-pair", edited, tilde),
        ("random-monotone", random_monotone_gig1(), None),
    ]


# --- random instance generators for property tests ---


def random_phase_kernel(rng, d: int) -> np.ndarray:
    psi = rng.dirichlet(np.ones(d) * 2.0, size=d) + 0.05
    return psi / psi.sum(axis=1, keepdims=True)


def _base_cdfs(rng, d: int, levels: int) -> np.ndarray:
    """One strictly positive conditional CDF over levels per (i, j) pair."""
    pmf = rng.dirichlet(np.ones(levels), size=(d, d)) + 1e-3
    pmf /= pmf.sum(axis=2, keepdims=True)
    return np.cumsum(pmf, axis=2)


def _corner_from_cdfs(psi: np.ndarray, cdfs: np.ndarray) -> BlockStochasticMatrix:
    """cdfs has shape (levels, d, d, levels): row level, i, j, column level."""
    levels, d = cdfs.shape[0], cdfs.shape[1]
    pmf = np.diff(cdfs, axis=3, prepend=0.0)
    blocks = pmf * psi[None, :, :, None]
    values = blocks.transpose(0, 1, 3, 2).reshape(levels * d, levels * d)
    values = np.maximum(values, 0.0)
    values /= values.sum(axis=1, keepdims=True)
    return BlockStochasticMatrix(d=d, values=values)


def random_bm_corner(rng, d: int, levels: int) -> BlockStochasticMatrix:
    """Strictly positive block-monotone square corner.

    Per (i, j), successive row levels take powers >= 1 of one base CDF: the
    CDF shrinks pointwise with the level, so tail sums grow with it.
    """
    psi = random_phase_kernel(rng, d)
    base = _base_cdfs(rng, d, levels)
    exponents = np.cumprod(rng.uniform(1.0, 2.0, size=levels))
    cdfs = base[None, :, :, :] ** exponents[:, None, None, None]
    cdfs[..., -1] = 1.0
    return _corner_from_cdfs(psi, cdfs)


def random_corner(rng, d: int, levels: int) -> BlockStochasticMatrix:
    """Plain random stochastic corner (usually not block-monotone)."""
    values = rng.dirichlet(np.ones(levels * d), size=levels * d) + 1e-6
    values /= values.sum(axis=1, keepdims=True)
    return BlockStochasticMatrix(d=d, values=values)


def random_dominated_corner(rng, dominating: BlockStochasticMatrix) -> BlockStochasticMatrix:
    """Corner block-wise dominated by `dominating`, same phase kernel.

    Raises each conditional CDF to a power in (0, 1], which lifts it
    pointwise, i.e. pushes mass toward lower levels.
    """
    d, levels = dominating.d, dominating.levels
    blocks = dominating.as_blocks().transpose(0, 1, 3, 2)
    psi = blocks.sum(axis=3)[0]
    cond = blocks / np.where(psi[None, :, :, None] > 0, psi[None, :, :, None], 1.0)
    cdfs = np.cumsum(cond, axis=3)
    powers = rng.uniform(0.4, 1.0, size=(levels, d, d))
    lowered = cdfs ** powers[:, :, :, None]
    lowered[..., -1] = 1.0
    return _corner_from_cdfs(psi, lowered)


def random_dominated_vectors(rng, d: int, levels: int):
    """(mu, eta) probability vectors with mu block-wise dominated by eta."""
    marginal = rng.dirichlet(np.ones(d)) + 0.01
    marginal /= marginal.sum()
    pmf = rng.dirichlet(np.ones(levels), size=d) + 1e-4
    pmf /= pmf.sum(axis=1, keepdims=True)
    eta_cdf = np.cumsum(pmf, axis=1)
    mu_cdf = eta_cdf ** rng.uniform(0.3, 1.0, size=(d, 1))
    mu_cdf[:, -1] = 1.0
    eta = (np.diff(eta_cdf, axis=1, prepend=0.0) * marginal[:, None]).T
    mu = (np.diff(mu_cdf, axis=1, prepend=0.0) * marginal[:, None]).T
    return BlockVector(d, mu), BlockVector(d, eta)


def random_block_increasing(rng, d: int, levels: int) -> BlockVector:
    steps = rng.uniform(0.0, 2.0, size=(levels, d))
    return BlockVector(d, np.cumsum(steps, axis=0))

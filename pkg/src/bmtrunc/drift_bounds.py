"""Geometric drift certificates and certified truncation error bounds.

A drift certificate (v, gamma, b, K) witnesses the row-wise inequality

    (P v)(k, i) <= gamma * v(k, i) + b * [k <= K]

with gamma < 1, b > 0 and a block-increasing weight vector v >= 1. For K = 0
the certificate yields two computable upper bounds on the total-variation
error of the level-n LCB truncation, one using the truncation's own top-level
mass and one using 1/v(n, .) only. Certificates with K > 0 are reduced to
K = 0 via lift_certificate before the bounds apply.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .block_matrix import (
    BlockVector,
    is_block_increasing,
    lcb_truncate,
    stationary,
    tv_distance,
)

__all__ = [
    "GeometricTail",
    "DriftCertificate",
    "CertificateCheck",
    "BoundReport",
    "BoundViolationError",
    "ReferenceNotConvergedError",
    "verify_certificate",
    "bound_theorem31",
    "optimize_m",
    "lift_certificate",
    "compare_against_oracle",
]

# Row slack allowed when checking the drift inequality. Scaled by max(1, rhs):
# weight vectors grow geometrically, so an absolute tolerance would reject
# rows where the inequality holds with exact equality but the row values are
# astronomically large.
VERIFY_TOLERANCE = 1e-10

REFERENCE_CONVERGENCE_TOLERANCE = 1e-10
BOUND_CHECK_SLACK = 1e-9


class BoundViolationError(RuntimeError):
    """A measured error exceeded its certified bound (soundness alarm)."""


class ReferenceNotConvergedError(RuntimeError):
    """The reference truncation has not converged to the requested accuracy."""

    def __init__(self, gap: float, level: int):
        self.gap = gap
        self.level = level
        super().__init__(
            f"reference truncation at level {level} not converged: "
            f"TV gap to level {2 * level} is {gap:.3e}"
        )


@dataclass(frozen=True, eq=False)
class GeometricTail:
    """Closed form v(k) = alpha^k * coeff + shift for all levels k >= start."""

    alpha: float
    coeff: np.ndarray
    shift: float = 0.0
    start: int = 0

    def __post_init__(self):
        coeff = np.asarray(self.coeff, dtype=float).reshape(-1)
        object.__setattr__(self, "coeff", coeff)
        if not self.alpha > 1.0:
            raise ValueError("tail growth rate alpha must exceed 1")
        if np.any(coeff <= 0):
            raise ValueError("tail coefficients must be positive")
        if self.shift < 0 or self.start < 0:
            raise ValueError("tail shift and start level must be non-negative")

    def values(self, ks) -> np.ndarray:
        ks = np.asarray(ks, dtype=float)
        return np.power(self.alpha, ks)[..., None] * self.coeff + self.shift


@dataclass(frozen=True, eq=False)
class DriftCertificate:
    """Witness (v, gamma, b, K) of the geometric drift inequality.

    v stores finitely many levels; an optional GeometricTail extends it in
    closed form so certificates remain checkable against repeating-tail
    chains of any depth.
    """

    v: BlockVector
    gamma: float
    b: float
    K: int = 0
    tail: GeometricTail | None = field(default=None)

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma={self.gamma} outside (0, 1)")
        if not self.b > 0.0:
            raise ValueError("b must be positive")
        if self.K < 0:
            raise ValueError("K must be non-negative")
        if np.any(self.v.entries < 1.0 - 1e-12):
            raise ValueError("weight vector must satisfy v >= 1 everywhere")
        if not is_block_increasing(self.v, tol=1e-9):
            raise ValueError("weight vector must be block-increasing")
        if self.tail is not None:
            if self.tail.start > self.v.levels:
                raise ValueError("tail must start within or adjacent to stored levels")
            last = self.v.levels - 1
            if self.tail.start <= last:
                stored = self.v.entries[last]
                closed = self.tail.values(last)
                rel = np.max(np.abs(stored - closed) / np.maximum(1.0, np.abs(closed)))
                if rel > 1e-8:
                    raise ValueError("stored entries disagree with the closed-form tail")

    @property
    def d(self) -> int:
        return self.v.d

    def value_at(self, k: int) -> np.ndarray:
        """v(k, .) as a length-d array, from storage or the closed form."""
        if k < self.v.levels:
            return self.v.entries[k].copy()
        if self.tail is not None and k >= self.tail.start:
            return self.tail.values(k)
        raise ValueError(f"certificate vector undefined at level {k} (no closed-form tail)")

    def values_up_to(self, levels: int) -> np.ndarray:
        """Materialized (levels, d) array of v(0..levels-1, .)."""
        stored = min(levels, self.v.levels)
        out = np.empty((levels, self.d))
        out[:stored] = self.v.entries[:stored]
        if levels > stored:
            if self.tail is None:
                raise ValueError(
                    f"certificate vector undefined beyond level {stored - 1} "
                    "(no closed-form tail)"
                )
            out[stored:] = self.tail.values(np.arange(stored, levels))
        return out


@dataclass(frozen=True, eq=False)
class CertificateCheck:
    """Outcome of a row-wise certificate verification."""

    ok: bool
    violations: list[tuple[int, int, float]]
    checked_levels: int
    tail_analytic: bool = False
    max_slack: float = 0.0

    def __bool__(self) -> bool:
        return self.ok


def verify_certificate(P, cert: DriftCertificate, tol: float = VERIFY_TOLERANCE) -> CertificateCheck:
    """Row-by-row check of the drift inequality for cert against P.

    Every stored row of P is checked; GI/G/1-type model objects are delegated
    to their own analytic verifier so the repeating tail is covered in closed
    form. A row (k, i) is violating when (Pv)(k,i) exceeds
    gamma*v(k,i) + b*[k <= K] by more than tol*max(1, rhs).

    Returns:
        CertificateCheck (truthy iff no violations) listing violating rows
        with their slack.
    """
    if hasattr(P, "verify_drift"):
        return P.verify_drift(cert, tol)
    d = P.d
    if d != cert.d:
        raise ValueError("block size mismatch between matrix and certificate")
    v_cols = cert.values_up_to(P.col_levels)
    lhs = (P.values @ v_cols.reshape(-1)).reshape(P.levels, d)
    rhs = cert.gamma * cert.values_up_to(P.levels)
    rhs[: cert.K + 1] += cert.b
    slack = lhs - rhs - tol * np.maximum(1.0, rhs)
    bad = np.argwhere(slack > 0.0)
    violations = [(int(k), int(i), float(lhs[k, i] - rhs[k, i])) for k, i in bad]
    return CertificateCheck(
        ok=not violations,
        violations=violations,
        checked_levels=P.levels,
        max_slack=float(np.max(lhs - rhs)),
    )


@dataclass(frozen=True, eq=False)
class BoundReport:
    """Evaluation of the certified bounds at one (n, m) pair."""

    n: int
    m: int
    bound2: float
    bound1: float | None = None
    measured_error: float | None = None
    reference_level: int | None = None


def _bound_terms(cert: DriftCertificate, n: int):
    if cert.K != 0:
        raise ValueError("bounds need a K=0 certificate; apply lift_certificate first")
    v_n = cert.value_at(n)
    prefactor = cert.b / (1.0 - cert.gamma)
    return prefactor, float(np.sum(1.0 / v_n))


def bound_theorem31(
    cert: DriftCertificate, m: int, n: int, top_mass=None
) -> BoundReport:
    """Both certified TV bounds for the level-n truncation at parameter m.

    Args:
        cert: K=0 drift certificate for the (block-monotone) chain.
        m: free coupling-horizon parameter, >= 1.
        n: truncation level.
        top_mass: optional length-d array of the truncation's stationary mass
            on level n; enables the first (sharper) bound.

    Returns:
        BoundReport with bound2 always set and bound1 set iff top_mass given.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    prefactor, inv_v_sum = _bound_terms(cert, n)
    geom = cert.gamma ** m
    bound2 = prefactor * (4.0 * geom + 2.0 * m * inv_v_sum)
    bound1 = None
    if top_mass is not None:
        top_mass = np.asarray(top_mass, dtype=float).reshape(-1)
        if top_mass.shape != (cert.d,) or np.any(top_mass < 0):
            raise ValueError("top_mass must be a non-negative length-d vector")
        bound1 = 4.0 * geom * prefactor + 2.0 * m * float(top_mass.sum())
    return BoundReport(n=n, m=m, bound2=bound2, bound1=bound1)


def optimize_m(
    cert: DriftCertificate,
    n: int,
    m_max: int | None = None,
    which: str = "bound2",
    top_mass=None,
) -> tuple[int, float]:
    """Exact minimizer of the selected bound over m in 1..m_max.

    Exhaustive scan (the bound is cheap to evaluate); ties break toward the
    smaller m. m_max defaults to 10*ceil(1/(1-gamma)).
    """
    if m_max is None:
        m_max = 10 * math.ceil(1.0 / (1.0 - cert.gamma))
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    prefactor, inv_v_sum = _bound_terms(cert, n)
    ms = np.arange(1, m_max + 1, dtype=float)
    geom = np.power(cert.gamma, ms)
    if which == "bound2":
        values = prefactor * (4.0 * geom + 2.0 * ms * inv_v_sum)
    elif which == "bound1":
        if top_mass is None:
            raise ValueError("bound1 optimization needs top_mass")
        total = float(np.asarray(top_mass, dtype=float).sum())
        values = 4.0 * geom * prefactor + 2.0 * ms * total
    else:
        raise ValueError(f"unknown bound selector {which!r}")
    best = int(np.argmin(values))
    return best + 1, float(values[best])


def lift_certificate(
    vprime: BlockVector,
    gamma_prime: float,
    b_prime: float,
    K: int,
    boundary_block: np.ndarray,
    tail: GeometricTail | None = None,
) -> DriftCertificate:
    """Reduce a level-K drift certificate to an equivalent K=0 certificate.

    Needs every phase of the level-K rows to reach level 0 in one step:
    boundary_block (the chain's (K; 0) block) must have positive row sums.
    The smallest feasible shift B = b'/min_i row_sum_i is used, which gives
    the smallest lifted gamma; then

        gamma = (gamma' + B) / (1 + B),  b = b' + B,
        v(0) = v'(0),  v(k) = v'(k) + B for k >= 1.

    Args:
        vprime: weight vector of the level-K certificate.
        gamma_prime, b_prime: its drift rate and boundary constant.
        K: level set of the original indicator (>= 0).
        boundary_block: d x d block mapping level K to level 0.
        tail: optional closed form of vprime beyond its stored levels; the
            lifted closed form (shifted by B) is attached to the result.

    Returns:
        K=0 DriftCertificate.
    """
    if not 0.0 < gamma_prime < 1.0:
        raise ValueError(f"gamma_prime={gamma_prime} outside (0, 1)")
    if not b_prime > 0.0:
        raise ValueError("b_prime must be positive")
    if K < 0:
        raise ValueError("K must be non-negative")
    boundary_block = np.asarray(boundary_block, dtype=float)
    if boundary_block.shape != (vprime.d, vprime.d):
        raise ValueError("boundary_block must be d x d")
    row_sums = boundary_block.sum(axis=1)
    min_row = float(row_sums.min())
    if min_row <= 0.0:
        raise ValueError(
            "boundary block has a zero row sum: some phase cannot reach level 0, no feasible lift"
        )
    B = b_prime / min_row
    gamma = (gamma_prime + B) / (1.0 + B)
    b = b_prime + B
    entries = vprime.entries.copy()
    entries[1:] += B
    lifted_tail = None
    if tail is not None:
        lifted_tail = GeometricTail(
            alpha=tail.alpha,
            coeff=tail.coeff,
            shift=tail.shift + B,
            start=max(tail.start, 1),
        )
    return DriftCertificate(
        v=BlockVector(vprime.d, entries), gamma=gamma, b=b, K=0, tail=lifted_tail
    )


def _truncated_stationary(model, n: int) -> BlockVector:
    return stationary(lcb_truncate(model, n))


def compare_against_oracle(
    model,
    n_list,
    cert: DriftCertificate,
    m_max: int | None = None,
    reference_level: int | None = None,
    dominating=None,
    convergence_tol: float = REFERENCE_CONVERGENCE_TOLERANCE,
    bound_check_tol: float = BOUND_CHECK_SLACK,
    max_workers: int = 1,
) -> list[BoundReport]:
    """Measure truncation errors against a converged reference and bound them.

    For each n: truncates, solves, measures the TV distance to the reference
    stationary vector, picks m by minimizing the sharper available bound and
    reports both bounds at that m. The reference truncation (at
    reference_level) is accepted only if its TV gap to the truncation at
    twice that level is below convergence_tol.

    Args:
        model: chain under study (GI/G/1-type model or stored corner).
        n_list: truncation levels to evaluate.
        cert: K=0 certificate for the chain, or for a dominating chain.
        m_max: scan limit for the m optimization (None: certificate default).
        reference_level: oracle truncation level, must exceed max(n_list).
        dominating: optional block-monotone chain dominating `model`; its
            truncations then supply the level-n mass for the first bound
            (the first bound is not available from `model`'s own truncation
            when only the dominating chain is certified).
        max_workers: thread count for the per-n evaluations.

    Raises:
        ReferenceNotConvergedError: oracle gap above convergence_tol.
        BoundViolationError: a measured error exceeded its bound.
    """
    n_list = [int(n) for n in n_list]
    if not n_list or min(n_list) < 1:
        raise ValueError("n_list must contain levels >= 1")
    if reference_level is None or reference_level <= max(n_list):
        raise ValueError("reference_level must exceed every requested n")

    pi_ref = _truncated_stationary(model, reference_level)
    gap = tv_distance(pi_ref, _truncated_stationary(model, 2 * reference_level))
    if gap > convergence_tol:
        raise ReferenceNotConvergedError(gap, reference_level)

    top_source = dominating if dominating is not None else model

    def evaluate(n: int) -> BoundReport:
        pi_n = _truncated_stationary(model, n)
        measured = tv_distance(pi_n, pi_ref)
        if top_source is model:
            top_mass = pi_n.entries[n]
        else:
            top_mass = _truncated_stationary(top_source, n).entries[n]
        m_star, _ = optimize_m(cert, n, m_max, which="bound1", top_mass=top_mass)
        report = bound_theorem31(cert, m_star, n, top_mass=top_mass)
        return BoundReport(
            n=n,
            m=m_star,
            bound2=report.bound2,
            bound1=report.bound1,
            measured_error=measured,
            reference_level=reference_level,
        )

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            reports = list(pool.map(evaluate, n_list))
    else:
        reports = [evaluate(n) for n in n_list]

    for report in reports:
        bound = report.bound1 if report.bound1 is not None else report.bound2
        if report.measured_error > bound + bound_check_tol:
            raise BoundViolationError(
                f"n={report.n}: measured error {report.measured_error:.6e} exceeds "
                f"certified bound {bound:.6e}"
            )
    return reports

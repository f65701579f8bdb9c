"""Block-wise circumcentered-reflection iterations.

A :class:`BlockPartition` splits an ordered family of affine subspaces into
consecutive blocks.  One iteration applies the circumcentered-reflection
step of every block in order.  Unit blocks give the method of alternating
projections; a single block holding the whole family gives the plain
circumcentered-reflection method, which for hyperplanes lands on the
solution in one step.
"""

import csv
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .circumcenter import (
    Block,
    _chain_points,
    _circumcenter,
    _hit_flags,
    CIRCUMCENTER_RANK_TOL,
    EQUIDISTANCE_TOL,
)
from .errors import DegeneracyError, DimensionError, InsufficientDataError
from .geometry import as_point, oracle_intersection_projection

__all__ = [
    "BlockPartition",
    "SolverConfig",
    "IterationRecord",
    "IterationTrace",
    "bwcrm_step",
    "solve",
    "map_solve",
    "crm_solve",
    "rep_shift",
    "rep_replace",
    "fit_empirical_rate",
]

CONVERGED = "converged"
BUDGET_EXHAUSTED = "budget exhausted"
DEGENERACY = "degeneracy"


class BlockPartition:
    """Consecutive, non-overlapping blocks covering an ordered family.

    Parameters
    ----------
    blocks : sequence of Block or of sequences of subspaces
    """

    def __init__(self, blocks):
        blocks = tuple(b if isinstance(b, Block) else Block(b) for b in blocks)
        if not blocks:
            raise ValueError("a partition needs at least one block")
        n = blocks[0].dim
        for b in blocks:
            if b.dim != n:
                raise DimensionError("blocks live in different dimensions")
        self.blocks = blocks
        self.dim = n

    @classmethod
    def from_boundaries(cls, family, boundaries):
        """Build from cut points ``0 = q_0 < q_1 < ... < q_p = m``."""
        family = list(family)
        q = [int(x) for x in boundaries]
        if len(q) < 2 or q[0] != 0 or q[-1] != len(family):
            raise ValueError(f"boundaries must run from 0 to {len(family)}, got {q}")
        if any(a >= b for a, b in zip(q, q[1:])):
            raise ValueError(f"boundaries must be strictly increasing, got {q}")
        return cls(family[a:b] for a, b in zip(q, q[1:]))

    @classmethod
    def unit(cls, family):
        return cls([U] for U in family)

    @classmethod
    def full(cls, family):
        return cls([list(family)])

    @property
    def family(self):
        return [U for b in self.blocks for U in b]

    @property
    def boundaries(self):
        q = [0]
        for b in self.blocks:
            q.append(q[-1] + len(b))
        return q

    @property
    def sizes(self):
        return [len(b) for b in self.blocks]

    def __len__(self):
        return len(self.blocks)

    def __repr__(self):
        return f"BlockPartition(sizes={self.sizes})"


@dataclass
class SolverConfig:
    """Stopping rule and bad-luck handling for :func:`solve`.

    ``rep_initial_t=None`` means ``0.1 * (1 + ||z||)`` at the point being
    replaced.
    """

    residual_tol: float = 1e-8
    max_iterations: int = 1000
    membership_tol: float = 1e-9
    rep_enabled: bool = True
    rep_initial_t: Optional[float] = None
    rep_shrink: float = 0.5
    rep_max_tries: int = 60
    trace_oracle: bool = False
    record_iterates: bool = True

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if not self.membership_tol > 0:
            raise ValueError("membership_tol must be positive")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if not 0 < self.rep_shrink < 1:
            raise ValueError("rep_shrink must lie in (0, 1)")
        if self.rep_max_tries < 1:
            raise ValueError("rep_max_tries must be positive")
        if self.rep_initial_t is not None and not self.rep_initial_t > 0:
            raise ValueError("rep_initial_t must be positive")


@dataclass
class IterationRecord:
    k: int
    residual: float
    proj_count: int
    error: Optional[float] = None
    iterate: Optional[np.ndarray] = None


@dataclass
class IterationTrace:
    """Per-iteration history of a run; record 0 describes the start point."""

    records: List[IterationRecord] = field(default_factory=list)
    reason: Optional[str] = None
    seconds: float = 0.0
    rep_shifts: int = 0

    @property
    def iterations(self):
        return self.records[-1].k if self.records else 0

    @property
    def residuals(self):
        return np.array([r.residual for r in self.records])

    @property
    def errors(self):
        return np.array([np.nan if r.error is None else r.error for r in self.records])

    @property
    def proj_count(self):
        return self.records[-1].proj_count if self.records else 0

    @property
    def final_residual(self):
        return self.records[-1].residual

    @property
    def converged(self):
        return self.reason == CONVERGED

    def iterates(self):
        return np.array([r.iterate for r in self.records])

    def write_csv(self, path):
        """Write ``iter,residual[,error],proj_count`` rows."""
        with_error = any(r.error is not None for r in self.records)
        header = ["iter", "residual"] + (["error"] if with_error else []) + ["proj_count"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in self.records:
                row = [r.k, f"{r.residual:.6e}"]
                if with_error:
                    row.append(f"{r.error:.6e}")
                row.append(r.proj_count)
                w.writerow(row)


def _step(blocks, z, tol=EQUIDISTANCE_TOL, rank_tol=CIRCUMCENTER_RANK_TOL):
    for b in blocks:
        z = _circumcenter(_chain_points(b.members, z), tol, rank_tol)
    return z


def bwcrm_step(partition, z):
    """Apply every block's circumcentered-reflection step in order."""
    z = as_point(z, partition.dim)
    return _step(partition.blocks, z)


def _stacked(problem):
    A = getattr(problem, "matrix", None)
    b = getattr(problem, "rhs", None)
    if A is None:
        A = np.vstack([U.rows for U in problem.family])
        b = np.concatenate([U.rhs for U in problem.family])
    return np.asarray(A, dtype=float), np.asarray(b, dtype=float)


def solve(problem, partition, config=None):
    """Iterate the block-wise step from ``problem.start``.

    Stops as soon as the stacked residual ``||A z - b||`` drops to
    ``config.residual_tol`` (checked before the first step as well) or the
    iteration budget runs out.  When the partition is a single block made of
    hyperplanes and ``config.rep_enabled`` is set, the start point is first
    replaced so that no reflected point of the chain lies on its hyperplane.

    Returns
    -------
    z : ndarray
    trace : IterationTrace
    """
    config = config or SolverConfig()
    if partition.dim != problem.start.shape[0]:
        raise DimensionError("partition and start point differ in dimension")
    A, b = _stacked(problem)
    m = sum(partition.sizes)
    z = as_point(problem.start, partition.dim).copy()

    target = None
    if config.trace_oracle:
        target = oracle_intersection_projection(problem.family, z)

    trace = IterationTrace()

    def record(k, count):
        trace.records.append(IterationRecord(
            k=k,
            residual=float(np.linalg.norm(A @ z - b)),
            proj_count=count,
            error=None if target is None else float(np.linalg.norm(z - target)),
            iterate=z.copy() if config.record_iterates else None,
        ))

    t0 = time.perf_counter()
    record(0, 0)
    count = 0
    one_shot = (
        config.rep_enabled
        and len(partition.blocks) == 1
        and all(U.is_hyperplane for U in partition.blocks[0])
    )
    try:
        k = 0
        while trace.records[-1].residual > config.residual_tol:
            if k >= config.max_iterations:
                trace.reason = BUDGET_EXHAUSTED
                break
            if one_shot and k == 0:
                z, shifts, extra = _rep_loop(partition.blocks[0].members, z, config)
                trace.rep_shifts = shifts
                count += extra
            z = _step(partition.blocks, z)
            k += 1
            count += m
            record(k, count)
        else:
            trace.reason = CONVERGED
    except DegeneracyError as exc:
        trace.reason = DEGENERACY
        trace.seconds = time.perf_counter() - t0
        exc.trace = trace
        raise
    trace.seconds = time.perf_counter() - t0
    return z, trace


def map_solve(problem, config=None):
    """:func:`solve` with one block per subspace (alternating projections)."""
    return solve(problem, BlockPartition.unit(problem.family), config)


def crm_solve(problem, config=None):
    """:func:`solve` with the whole family as a single block."""
    return solve(problem, BlockPartition.full(problem.family), config)


def _first_hit(members, z, tol):
    return next((i for i, h in enumerate(_hit_flags(members, _chain_points(members, z), tol)) if h), None)


def _rep_shift(members, z, config, i_hat):
    # Reflect the normal of the offending hyperplane back through the linear
    # parts of R_{i_hat}, ..., R_1; then R_{i_hat}...R_1(z + t d) equals the
    # offending chain point plus t times that normal.
    d = members[i_hat].normal.copy()
    for U in reversed(members[: i_hat + 1]):
        d = U._reflect_direction(d)
    prefix = members[: i_hat + 1]
    t = config.rep_initial_t
    if t is None:
        t = 0.1 * (1.0 + np.linalg.norm(z))
    for _ in range(config.rep_max_tries):
        cand = z + t * d
        flags = _hit_flags(prefix, _chain_points(prefix, cand), config.membership_tol)
        if not any(flags):
            return cand
        t *= config.rep_shrink
    raise DegeneracyError(
        f"replacement search exhausted after {config.rep_max_tries} tries"
    )


def rep_shift(family, z, config=None):
    """Replace ``z`` to clear the first bad-luck hit of the reflection chain.

    Let ``i`` be the first index whose reflected point lies on hyperplane
    ``H_i``.  Returns ``z + t * R_1 ... R_i(a)`` where ``a`` is the unit
    normal of ``H_i`` and the reflections act on directions.  The projection
    onto the intersection is unchanged for every ``t``; ``t`` is shrunk
    geometrically until none of the first ``i`` chain points lies on its
    hyperplane.

    Raises
    ------
    ValueError
        The chain has no hit, or a member is not a hyperplane.
    DegeneracyError
        No admissible ``t`` was found within ``config.rep_max_tries``.
    """
    config = config or SolverConfig()
    members = tuple(family)
    if not all(U.is_hyperplane for U in members):
        raise ValueError("rep_shift requires every member to be a hyperplane")
    z = as_point(z, members[0].dim)
    i_hat = _first_hit(members, z, config.membership_tol)
    if i_hat is None:
        raise ValueError("reflection chain has no bad-luck index")
    return _rep_shift(members, z, config, i_hat)


def _rep_loop(members, z, config):
    # The first chain is the one the circumcenter step builds anyway, so only
    # reflections caused by replacements are counted.
    shifts = 0
    extra = 0
    for _ in range(len(members) + 1):
        i_hat = _first_hit(members, z, config.membership_tol)
        if i_hat is None:
            return z, shifts, extra
        z = _rep_shift(members, z, config, i_hat)
        shifts += 1
        extra += i_hat + 1 + len(members)
    raise DegeneracyError("repeated replacement did not clear every bad-luck hit")


def rep_replace(family, z, config=None):
    """Apply :func:`rep_shift` until the chain has no hit.

    Returns the replaced point and the number of shifts applied (zero when
    ``z`` was already free of hits).
    """
    config = config or SolverConfig()
    members = tuple(family)
    if not all(U.is_hyperplane for U in members):
        raise ValueError("rep_replace requires every member to be a hyperplane")
    z = as_point(z, members[0].dim)
    z, shifts, _ = _rep_loop(members, z, config)
    return z, shifts


def fit_empirical_rate(trace, scale=None):
    """Geometric mean of successive error ratios ``e[k+1] / e[k]``.

    Ratios are only taken while both errors exceed
    ``100 * eps * (1 + scale)``; below that the errors are rounding noise.

    Parameters
    ----------
    trace : IterationTrace or sequence of float
        A trace recorded with ``trace_oracle=True``, or raw errors.
    scale : float, optional
        Defaults to ``||z_0||`` for a trace with iterates, else 1.

    Raises
    ------
    InsufficientDataError
        Fewer than two usable ratios.
    """
    if isinstance(trace, IterationTrace):
        errors = trace.errors
        if scale is None:
            first = trace.records[0].iterate if trace.records else None
            scale = 0.0 if first is None else float(np.linalg.norm(first))
    else:
        errors = np.asarray(trace, dtype=float)
    if scale is None:
        scale = 1.0
    if errors.size < 3 or np.any(np.isnan(errors)):
        raise InsufficientDataError("need at least three recorded errors")
    floor = 100 * np.finfo(float).eps * (1.0 + scale)
    ratios = []
    for a, b in zip(errors, errors[1:]):
        if a <= floor or b <= floor:
            break
        ratios.append(b / a)
    if len(ratios) < 2:
        raise InsufficientDataError("fewer than two error ratios above the noise floor")
    return float(np.exp(np.mean(np.log(ratios))))

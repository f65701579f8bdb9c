"""Circumcenters of point sets and circumcentered-reflection steps of blocks."""

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, DimensionError, NonFiniteError
from .geometry import as_point

__all__ = [
    "Block",
    "ReflectionChain",
    "reflection_chain",
    "circumcenter_points",
    "circumcenter_block",
    "EQUIDISTANCE_TOL",
    "CIRCUMCENTER_RANK_TOL",
]

EQUIDISTANCE_TOL = 1e-8
CIRCUMCENTER_RANK_TOL = 1e-12
# Chain points carry absolute rounding error of a few eps times their size, so
# difference vectors below this multiple of eps * scale are indistinguishable
# from zero whatever the relative cutoff says.
NOISE_FACTOR = 100.0


class Block:
    """An ordered, non-empty group of affine subspaces of a common R^n."""

    __slots__ = ("members", "dim")

    def __init__(self, members):
        members = tuple(members)
        if not members:
            raise ValueError("a block needs at least one member")
        n = members[0].dim
        for U in members:
            if U.dim != n:
                raise DimensionError(f"block mixes dimensions {n} and {U.dim}")
        self.members = members
        self.dim = n

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def __repr__(self):
        return f"Block(size={len(self.members)}, dim={self.dim})"


@dataclass(frozen=True)
class ReflectionChain:
    """``points[0] = z`` and ``points[i] = R_i(points[i-1])``.

    ``hit_flags[i]`` refers to ``points[i + 1]``: it is true when the point
    produced by reflecting through member ``i`` lies on that member.
    """

    points: np.ndarray
    hit_flags: tuple

    @property
    def first_hit(self):
        """0-based index of the first member whose flag is set, or ``None``."""
        for i, hit in enumerate(self.hit_flags):
            if hit:
                return i
        return None


def _chain_points(members, z):
    pts = np.empty((len(members) + 1, z.shape[0]))
    pts[0] = z
    for i, U in enumerate(members):
        pts[i + 1] = U._reflect(pts[i])
    return pts


def _hit_flags(members, pts, tol):
    flags = []
    for i, U in enumerate(members):
        p = pts[i + 1]
        flags.append(bool(U._residual(p) <= tol * (1.0 + np.linalg.norm(p))))
    return tuple(flags)


def reflection_chain(block, z, membership_tol=1e-9):
    """Successive reflections of ``z`` through the members of ``block``.

    Parameters
    ----------
    block : Block or sequence of AffineSubspace
    z : array_like
    membership_tol : float
        Relative band used to decide whether a reflected point lies on its
        subspace (see :meth:`AffineSubspace.contains`).
    """
    if not isinstance(block, Block):
        block = Block(block)
    z = as_point(z, block.dim)
    pts = _chain_points(block.members, z)
    return ReflectionChain(pts, _hit_flags(block.members, pts, membership_tol))


def _circumcenter(P, tol, rank_tol):
    p0 = P[0]
    if P.shape[0] == 1:
        return p0.copy()
    if P.shape[0] == 2:
        return 0.5 * (P[0] + P[1])
    V = P[1:] - p0
    w = np.einsum("ij,ij->i", V, V)
    if not np.any(w):
        return p0.copy()
    # Minimum-norm solution of V x = w/2.  It lies in the row space of V, so
    # x = V^T t where t is the min-norm solution of the Gram system
    # (V V^T) t = w/2; solving on V directly avoids squaring its condition.
    U, s, Vt = np.linalg.svd(V, full_matrices=False)
    scale = 1.0 + np.abs(P).max()
    cutoff = max(rank_tol * s[0], NOISE_FACTOR * np.finfo(float).eps * scale)
    keep = s > cutoff
    x = Vt[keep].T @ ((U[:, keep].T @ (0.5 * w)) / s[keep])
    c = p0 + x

    d = np.linalg.norm(P - c, axis=1)
    diam = np.sqrt(w.max())
    if np.max(np.abs(d - d[0])) > tol * (1.0 + diam):
        raise DegeneracyError(
            "points admit no equidistant center in their affine hull "
            f"(spread {np.max(np.abs(d - d[0])):.3e})"
        )
    return c


def circumcenter_points(points, tol=EQUIDISTANCE_TOL, rank_tol=CIRCUMCENTER_RANK_TOL):
    """Circumcenter of a finite ordered point set.

    Returns the point of the affine hull of ``points`` equidistant from all
    of them.  Repeated or affinely dependent points are allowed; the
    rank-truncated least-squares solve picks the canonical solution.

    Parameters
    ----------
    points : array_like, shape (k, n)
    tol : float
        Equidistance is verified to ``tol * (1 + diameter)``, where the
        diameter is measured from ``points[0]``.
    rank_tol : float
        Relative singular-value cutoff for the difference matrix.

    Raises
    ------
    DegeneracyError
        No equidistant point exists in the affine hull (e.g. three distinct
        collinear points).
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2:
        raise DimensionError(f"points must form a 2-d array, got shape {P.shape}")
    if P.shape[0] == 0:
        raise ValueError("need at least one point")
    if not np.all(np.isfinite(P)):
        raise NonFiniteError("points have non-finite entries")
    return _circumcenter(P, tol, rank_tol)


def circumcenter_block(block, z, tol=EQUIDISTANCE_TOL, rank_tol=CIRCUMCENTER_RANK_TOL):
    """Circumcentered-reflection step of ``block`` at ``z``."""
    if not isinstance(block, Block):
        block = Block(block)
    z = as_point(z, block.dim)
    return _circumcenter(_chain_points(block.members, z), tol, rank_tol)

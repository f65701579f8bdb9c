"""Friedrichs angles, theoretical rate bounds and best-approximation checks."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .geometry import as_point, oracle_intersection_projection

__all__ = [
    "RateReport",
    "friedrichs_cosine",
    "composed_rate_bound",
    "chained_rate_bound",
    "map_rate_bound",
    "verify_bam",
    "INTERSECTION_BAND",
]

INTERSECTION_BAND = 1e-8


@dataclass(frozen=True)
class RateReport:
    friedrichs_cosine: float
    theoretical_bound: float
    fitted_empirical_rate: float
    bound_satisfied: bool

    def __post_init__(self):
        if not 0.0 <= self.friedrichs_cosine < 1.0:
            raise ValueError("friedrichs_cosine must lie in [0, 1)")


def friedrichs_cosine(V, W, band=INTERSECTION_BAND):
    """Cosine of the Friedrichs angle between two intersecting affine subspaces.

    The principal cosines of the two direction spaces are the singular
    values of ``B_V^T B_W`` for orthonormal direction bases.  Values within
    ``band`` of one belong to the common directions and are discarded; the
    largest remaining value is returned (0 when nothing remains).

    Raises
    ------
    InconsistentSystemError
        ``V`` and ``W`` do not intersect.
    """
    if V.dim != W.dim:
        raise DimensionError(f"subspaces live in R^{V.dim} and R^{W.dim}")
    # raises when the intersection is empty
    oracle_intersection_projection([V, W], np.zeros(V.dim))
    BV = V.direction_basis()
    BW = W.direction_basis()
    if BV.shape[1] == 0 or BW.shape[1] == 0:
        return 0.0
    s = np.linalg.svd(BV.T @ BW, compute_uv=False)
    s = s[s < 1.0 - band]
    return float(min(s.max(), 1.0)) if s.size else 0.0


def _check_unit(name, x):
    if not 0.0 <= x < 1.0:
        raise ValueError(f"{name} must lie in [0, 1), got {x}")


def composed_rate_bound(r_v, r_w, c_f):
    """Rate of ``G_W o G_V`` for best approximation mappings with rates ``r_v``, ``r_w``.

    ``max_j sqrt(r_j^2 + (1 - r_j^2) (1 + c_f^2) / 2)`` over ``j in {v, w}``.
    """
    _check_unit("r_v", r_v)
    _check_unit("r_w", r_w)
    _check_unit("c_f", c_f)
    half = (1.0 + c_f * c_f) / 2.0
    return max(math.sqrt(r * r + (1.0 - r * r) * half) for r in (r_v, r_w))


def chained_rate_bound(rates, cosines):
    """Heuristic bound for a composition of several best approximation mappings.

    Folds :func:`composed_rate_bound` from the left: the running composite
    rate is combined with the next rate using the next cosine.  The cosines
    must be supplied by the caller (typically between the intersection so
    far and the next subspace); no sharpness is claimed.
    """
    rates = list(rates)
    cosines = list(cosines)
    if not rates or len(cosines) != len(rates) - 1:
        raise ValueError("need k rates and k - 1 cosines")
    r = rates[0]
    _check_unit("rate", r)
    for r_next, c in zip(rates[1:], cosines):
        r = composed_rate_bound(r, r_next, c)
    return r


def map_rate_bound(c_f, k):
    """``c_f ** (2k - 1)``: k-sweep error factor of two-set alternating projections."""
    _check_unit("c_f", c_f)
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    return c_f ** (2 * int(k) - 1)


def verify_bam(operator, V, samples, tol=1e-10):
    """Sample-based check that ``operator`` is a best approximation mapping onto ``V``.

    For every sample ``z`` checks ``P_V(G(z)) = P_V(z)`` and
    ``G(P_V(z)) = P_V(z)`` to ``tol * (1 + ||z||)`` and records the ratio
    ``||G(z) - P_V(z)|| / ||z - P_V(z)||``.

    Returns
    -------
    ok : bool
        Both identities hold on every sample and the worst ratio is below 1.
    worst_ratio : float
        Largest observed ratio, an empirical lower bound on the rate.
    """
    samples = [as_point(z, V.dim) for z in samples]
    if not samples:
        raise ValueError("need at least one sample")
    identities = True
    worst = 0.0
    for z in samples:
        p = V.project(z)
        g = as_point(operator(z), V.dim)
        band = tol * (1.0 + np.linalg.norm(z))
        if np.linalg.norm(V.project(g) - p) > band:
            identities = False
        if np.linalg.norm(as_point(operator(p), V.dim) - p) > band:
            identities = False
        dist = np.linalg.norm(z - p)
        if dist > band:
            worst = max(worst, float(np.linalg.norm(g - p) / dist))
    return identities and worst < 1.0, worst

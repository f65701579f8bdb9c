"""Affine subspaces of R^n: projection, reflection and membership.

Every affine subspace is stored in row form ``{z : A z = b}``.  Rows are
scaled to unit length on construction, and an orthonormal basis of the row
space plus the minimum-norm particular solution are cached, so that a
projection costs two thin matrix-vector products.
"""

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateHyperplaneError,
    DimensionError,
    InconsistentSystemError,
    NonFiniteError,
    NumericalRankError,
)

__all__ = [
    "AffineSubspace",
    "Hyperplane",
    "as_point",
    "project",
    "reflect",
    "contains",
    "oracle_intersection_projection",
    "stack_rows",
    "RANK_TOL",
    "CONSISTENCY_TOL",
]

RANK_TOL = 1e-12
CONSISTENCY_TOL = 1e-10


def as_point(z, n=None):
    """Return ``z`` as a finite 1-d float array, optionally of length ``n``."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 1:
        raise DimensionError(f"expected a 1-d point, got shape {z.shape}")
    if n is not None and z.shape[0] != n:
        raise DimensionError(f"point has dimension {z.shape[0]}, expected {n}")
    if not np.all(np.isfinite(z)):
        raise NonFiniteError("point has non-finite entries")
    return z


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class AffineSubspace:
    """The solution set of a consistent linear system ``A z = b``.

    Parameters
    ----------
    rows : array_like, shape (p, n)
        Coefficient matrix. ``p = 0`` describes the whole space.
    rhs : array_like, shape (p,)
        Right-hand side.
    rank_tol : float
        Singular values below ``rank_tol * s_max`` are treated as zero.
    consistency_tol : float
        Construction fails when the minimum-norm solution leaves a residual
        larger than ``consistency_tol * (1 + ||b||)``.

    Notes
    -----
    Instances are immutable; the cached arrays are flagged read-only.
    """

    def __init__(self, rows, rhs, *, rank_tol=RANK_TOL, consistency_tol=CONSISTENCY_TOL):
        A = np.asarray(rows, dtype=float)
        if A.ndim == 1:
            A = A[None, :]
        if A.ndim != 2:
            raise DimensionError(f"rows must be a 2-d array, got shape {A.shape}")
        b = np.atleast_1d(np.asarray(rhs, dtype=float))
        if b.ndim != 1 or b.shape[0] != A.shape[0]:
            raise DimensionError(f"rhs has shape {b.shape}, expected ({A.shape[0]},)")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise NonFiniteError("system has non-finite entries")

        n = A.shape[1]
        norms = np.linalg.norm(A, axis=1)
        zero = norms == 0.0
        if np.any(np.abs(b[zero]) > consistency_tol * (1.0 + np.linalg.norm(b))):
            raise InconsistentSystemError("zero row with nonzero right-hand side")
        A = A[~zero] / norms[~zero, None]
        b = b[~zero] / norms[~zero]

        if A.shape[0] == 0:
            basis = np.zeros((n, 0))
            point = np.zeros(n)
        else:
            try:
                U, s, Vt = np.linalg.svd(A, full_matrices=False)
            except np.linalg.LinAlgError as exc:
                raise NumericalRankError(f"SVD failed: {exc}") from exc
            r = int(np.sum(s > rank_tol * s[0]))
            basis = Vt[:r].T
            point = basis @ ((U[:, :r].T @ b) / s[:r])
            resid = np.linalg.norm(A @ point - b)
            if resid > consistency_tol * (1.0 + np.linalg.norm(b)):
                raise InconsistentSystemError(
                    f"system is inconsistent (min-norm residual {resid:.3e})"
                )

        self._rows = _readonly(A)
        self._rhs = _readonly(b)
        self._basis = _readonly(basis)
        self._point = _readonly(point)
        self._n = n
        self._direction_basis = None

    @classmethod
    def whole_space(cls, n):
        return cls(np.zeros((0, n)), np.zeros(0))

    @classmethod
    def through(cls, point, rows):
        """Subspace with the given row matrix passing through ``point``."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        return cls(rows, rows @ as_point(point, rows.shape[1]))

    @property
    def dim(self):
        """Ambient dimension n."""
        return self._n

    @property
    def codim(self):
        """Numerical rank of the row matrix."""
        return self._basis.shape[1]

    @property
    def rows(self):
        """Unit-normalized rows (zero rows dropped)."""
        return self._rows

    @property
    def rhs(self):
        return self._rhs

    @property
    def row_basis(self):
        """Orthonormal basis of the row space, shape (n, codim)."""
        return self._basis

    @property
    def point(self):
        """Minimum-norm point of the subspace."""
        return self._point

    @property
    def is_hyperplane(self):
        return self.codim == 1

    @property
    def normal(self):
        """Unit normal; only defined for codimension one."""
        if not self.is_hyperplane:
            raise ValueError("normal is only defined for hyperplanes")
        return self._basis[:, 0]

    def direction_basis(self):
        """Orthonormal basis of the direction (linear) space, shape (n, n - codim)."""
        if self._direction_basis is None:
            if self.codim == 0:
                d = np.eye(self._n)
            else:
                d = scipy.linalg.null_space(self._basis.T)
            self._direction_basis = _readonly(d)
        return self._direction_basis

    # unchecked kernels, used in hot loops after validation has been done once
    def _project(self, z):
        B = self._basis
        return z - B @ (B.T @ (z - self._point))

    def _reflect(self, z):
        B = self._basis
        return z - 2.0 * (B @ (B.T @ (z - self._point)))

    def _reflect_direction(self, v):
        B = self._basis
        return v - 2.0 * (B @ (B.T @ v))

    def _residual(self, z):
        return np.linalg.norm(self._rows @ z - self._rhs)

    def project(self, z):
        return self._project(as_point(z, self._n))

    def reflect(self, z):
        return self._reflect(as_point(z, self._n))

    def reflect_direction(self, v):
        """Apply the linear part of the reflection to a direction vector."""
        return self._reflect_direction(as_point(v, self._n))

    def residual(self, z):
        """``||A z - b||`` with unit-normalized rows."""
        return self._residual(as_point(z, self._n))

    def contains(self, z, tol=1e-12):
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        z = as_point(z, self._n)
        return bool(self._residual(z) <= tol * (1.0 + np.linalg.norm(z)))

    def __repr__(self):
        return f"{type(self).__name__}(dim={self._n}, codim={self.codim})"


class Hyperplane(AffineSubspace):
    """``{z : <normal, z> = offset}`` with a nonzero normal.

    The normal is stored at unit length and the offset rescaled with it.
    """

    def __init__(self, normal, offset):
        a = np.asarray(normal, dtype=float)
        if a.ndim != 1:
            raise DimensionError(f"normal must be 1-d, got shape {a.shape}")
        if not (np.all(np.isfinite(a)) and np.isfinite(offset)):
            raise NonFiniteError("hyperplane has non-finite data")
        nrm = np.linalg.norm(a)
        if nrm == 0.0:
            raise DegenerateHyperplaneError("hyperplane normal must be nonzero")
        a = a / nrm
        beta = float(offset) / nrm
        self._rows = _readonly(a[None, :])
        self._rhs = _readonly([beta])
        self._basis = _readonly(a[:, None])
        self._point = _readonly(beta * a)
        self._n = a.shape[0]
        self._direction_basis = None
        self._a = self._basis[:, 0]
        self._beta = beta

    @property
    def offset(self):
        return self._beta

    def _project(self, z):
        return z - (self._a @ z - self._beta) * self._a

    def _reflect(self, z):
        return z - 2.0 * (self._a @ z - self._beta) * self._a

    def _reflect_direction(self, v):
        return v - 2.0 * (self._a @ v) * self._a

    def _residual(self, z):
        return abs(self._a @ z - self._beta)


def project(V, z):
    """Euclidean projection of ``z`` onto ``V``."""
    return V.project(z)


def reflect(V, z):
    """Reflection ``2 P_V(z) - z``."""
    return V.reflect(z)


def contains(V, z, tol):
    """True iff ``||A z - b|| <= tol * (1 + ||z||)`` (unit rows)."""
    return V.contains(z, tol)


def stack_rows(family):
    """Stack the normalized rows and right-hand sides of a family."""
    family = list(family)
    if not family:
        raise ValueError("family must be non-empty")
    n = family[0].dim
    for V in family:
        if V.dim != n:
            raise DimensionError(f"family mixes dimensions {n} and {V.dim}")
    A = np.vstack([V.rows for V in family])
    b = np.concatenate([V.rhs for V in family])
    return A, b


def oracle_intersection_projection(family, z, *, rank_tol=RANK_TOL,
                                   consistency_tol=CONSISTENCY_TOL):
    """Project ``z`` onto the intersection of ``family`` by a direct solve.

    Computes ``z + A^+ (b - A z)`` for the stacked system via a truncated
    SVD; this is the minimum-distance point of ``{s : A s = b}``.

    Raises
    ------
    InconsistentSystemError
        The stacked system has no solution (empty intersection).
    NumericalRankError
        The SVD did not converge.
    """
    A, b = stack_rows(family)
    z = as_point(z, A.shape[1])
    if A.shape[0] == 0:
        return z.copy()
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalRankError(f"SVD of stacked system failed: {exc}") from exc
    if not np.all(np.isfinite(s)):
        raise NumericalRankError("stacked system produced non-finite singular values")
    r = int(np.sum(s > rank_tol * s[0])) if s.size else 0
    if r == 0:
        raise NumericalRankError("stacked system has numerical rank zero")
    d = b - A @ z
    x = z + Vt[:r].T @ ((U[:, :r].T @ d) / s[:r])
    resid = np.linalg.norm(A @ x - b)
    if resid > consistency_tol * (1.0 + np.linalg.norm(b)):
        raise InconsistentSystemError(
            f"intersection is empty (least-squares residual {resid:.3e})"
        )
    return x

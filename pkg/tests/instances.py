"""Random instance generators shared by the test modules."""

import numpy as np

from bwcrm import AffineSubspace, Hyperplane, Problem


def random_hyperplanes(rng, p, n, point=None):
    """``p`` random hyperplanes of R^n through a common (random) point."""
    A = rng.standard_normal((p, n))
    x = rng.standard_normal(n) if point is None else point
    return [Hyperplane(a, a @ x) for a in A], A, A @ x


def random_family(rng, n, sizes, point=None):
    """Affine subspaces with the given codimensions through a common point."""
    x = rng.standard_normal(n) if point is None else point
    fam = []
    for c in sizes:
        R = rng.standard_normal((c, n))
        fam.append(Hyperplane(R[0], R[0] @ x) if c == 1 else AffineSubspace(R, R @ x))
    return fam


def hyperplane_problem(rng, p, n, scale=1.0):
    fam, A, b = random_hyperplanes(rng, p, n)
    return Problem(fam, scale * rng.standard_normal(n), matrix=A, rhs=b)


def kkt_projection(A, b, z):
    """Projection onto {s : A s = b} from the KKT system of min |z - s|^2.

    Independent of the SVD route; only valid for full row rank ``A``.
    """
    p, n = A.shape
    K = np.block([[np.eye(n), A.T], [A, np.zeros((p, p))]])
    sol = np.linalg.solve(K, np.concatenate([z, b]))
    return sol[:n]

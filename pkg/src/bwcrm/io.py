"""Problem construction, file formats and synthetic instances."""

import csv
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import DimensionError, MatrixMarketError
from .geometry import Hyperplane, as_point, oracle_intersection_projection, stack_rows
from .solver import BlockPartition

__all__ = [
    "Problem",
    "BenchmarkRow",
    "read_matrix_market",
    "write_matrix_market",
    "read_vector",
    "read_dense_csv",
    "read_matrix",
    "problem_from_rows",
    "synth_consistent_system",
    "phantom_image",
    "image_shape",
    "partition_by_size",
    "write_benchmark_table",
    "write_pgm",
    "BENCHMARK_HEADER",
]

BENCHMARK_HEADER = ["method", "blocks", "proj_reflec", "iter", "residual", "cpu_seconds"]


@dataclass
class Problem:
    """Project ``start`` onto the intersection of ``family``.

    ``matrix``/``rhs`` keep the unscaled system the family was built from;
    residuals are reported against it.  Without them the stacked unit rows
    of the family are used.  ``solution`` is an optional reference point
    (e.g. the planted solution of a synthetic system).
    """

    family: List
    start: np.ndarray
    name: str = ""
    matrix: Optional[np.ndarray] = None
    rhs: Optional[np.ndarray] = None
    solution: Optional[np.ndarray] = None
    _oracle: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.family = list(self.family)
        A, b = stack_rows(self.family)
        self.start = as_point(self.start, A.shape[1]).copy()
        if (self.matrix is None) != (self.rhs is None):
            raise ValueError("matrix and rhs must be given together")
        if self.matrix is not None:
            self.matrix = np.asarray(self.matrix, dtype=float)
            self.rhs = np.asarray(self.rhs, dtype=float)
            if self.matrix.shape != (self.rhs.shape[0], A.shape[1]):
                raise DimensionError("matrix/rhs do not match the family")
        # verifies the stacked system is consistent
        self._oracle = oracle_intersection_projection(self.family, self.start)

    @property
    def dim(self):
        return self.start.shape[0]

    def oracle(self):
        """Exact projection of the start point onto the intersection."""
        return self._oracle.copy()

    def residual(self, z):
        if self.matrix is None:
            A, b = stack_rows(self.family)
        else:
            A, b = self.matrix, self.rhs
        return float(np.linalg.norm(A @ as_point(z, self.dim) - b))


@dataclass
class BenchmarkRow:
    method: str
    blocks: int
    proj_reflec: int
    iter: int
    residual: float
    cpu_seconds: float

    @classmethod
    def from_trace(cls, method, blocks, trace):
        return cls(method, blocks, trace.proj_count, trace.iterations,
                   trace.final_residual, trace.seconds)

    def as_csv_row(self):
        return [self.method, self.blocks, self.proj_reflec, self.iter,
                f"{self.residual:.4e}", f"{self.cpu_seconds:.4e}"]


# ---------------------------------------------------------------- Matrix Market

def _parse_banner(line, lineno):
    tokens = line.split()
    if not tokens or tokens[0] != "%%MatrixMarket":
        raise MatrixMarketError("missing %%MatrixMarket banner", lineno)
    if len(tokens) != 5:
        raise MatrixMarketError("banner must have 5 fields", lineno)
    obj, fmt, fld, sym = (t.lower() for t in tokens[1:])
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object {obj!r}", lineno)
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(f"unsupported format {fmt!r}", lineno)
    if fld not in ("real", "double", "integer"):
        raise MatrixMarketError(f"non-real field {fld!r}", lineno)
    if sym not in ("general", "symmetric"):
        raise MatrixMarketError(f"unsupported symmetry {sym!r}", lineno)
    return fmt, fld, sym


def _ints(tokens, count, lineno, what):
    if len(tokens) != count:
        raise MatrixMarketError(f"{what} needs {count} fields, got {len(tokens)}", lineno)
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise MatrixMarketError(f"{what} must be integers", lineno) from None


def _float(token, lineno):
    try:
        v = float(token)
    except ValueError:
        raise MatrixMarketError(f"bad numeric value {token!r}", lineno) from None
    if not np.isfinite(v):
        raise MatrixMarketError(f"non-finite value {token!r}", lineno)
    return v


def read_matrix_market(path):
    """Read a real Matrix Market file into a dense array.

    Supports the ``coordinate`` and ``array`` formats with ``general`` or
    ``symmetric`` storage.  Indices are 1-based in the file; duplicate
    coordinate entries are summed and symmetric storage is mirrored.

    Returns
    -------
    matrix : ndarray, shape (rows, cols)
    meta : dict
        ``format``, ``field``, ``symmetry``, ``shape``, ``entries`` (count of
        stored entries) and ``comments`` (list of comment lines).

    Raises
    ------
    MatrixMarketError
        With the offending line number.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)
    fmt, fld, sym = _parse_banner(lines[0], 1)

    comments = []
    body = []
    for lineno, raw in enumerate(lines[1:], start=2):
        s = raw.strip()
        if not s:
            continue
        if s.startswith("%"):
            comments.append(s)
            continue
        body.append((lineno, s.split()))
    if not body:
        raise MatrixMarketError("missing size line", len(lines) + 1)

    size_lineno, size_tokens = body[0]
    entries = body[1:]
    eof = len(lines) + 1

    if fmt == "coordinate":
        m, n, nnz = _ints(size_tokens, 3, size_lineno, "size line")
        if m < 0 or n < 0 or nnz < 0:
            raise MatrixMarketError("negative size", size_lineno)
        if sym == "symmetric" and m != n:
            raise MatrixMarketError("symmetric matrix must be square", size_lineno)
        M = np.zeros((m, n))
        if len(entries) > nnz:
            raise MatrixMarketError(f"more than {nnz} entries", entries[nnz][0])
        for lineno, tok in entries:
            if len(tok) != 3:
                raise MatrixMarketError(f"entry needs 3 fields, got {len(tok)}", lineno)
            i, j = _ints(tok[:2], 2, lineno, "entry indices")
            v = _float(tok[2], lineno)
            if not (1 <= i <= m and 1 <= j <= n):
                raise MatrixMarketError(f"index ({i}, {j}) outside {m}x{n}", lineno)
            M[i - 1, j - 1] += v
            if sym == "symmetric" and i != j:
                M[j - 1, i - 1] += v
        if len(entries) < nnz:
            raise MatrixMarketError(
                f"truncated: {len(entries)} of {nnz} entries present", eof
            )
        stored = nnz
    else:
        m, n = _ints(size_tokens, 2, size_lineno, "size line")
        if m < 0 or n < 0:
            raise MatrixMarketError("negative size", size_lineno)
        if sym == "symmetric":
            if m != n:
                raise MatrixMarketError("symmetric matrix must be square", size_lineno)
            slots = [(i, j) for j in range(n) for i in range(j, m)]
        else:
            slots = [(i, j) for j in range(n) for i in range(m)]
        values = []
        for lineno, tok in entries:
            for t in tok:
                if len(values) == len(slots):
                    raise MatrixMarketError(f"more than {len(slots)} values", lineno)
                values.append(_float(t, lineno))
        if len(values) < len(slots):
            raise MatrixMarketError(
                f"truncated: {len(values)} of {len(slots)} values present", eof
            )
        M = np.zeros((m, n))
        for (i, j), v in zip(slots, values):
            M[i, j] = v
            if sym == "symmetric":
                M[j, i] = v
        stored = len(slots)

    meta = {"format": fmt, "field": fld, "symmetry": sym, "shape": (m, n),
            "entries": stored, "comments": comments}
    return M, meta


def write_matrix_market(path, matrix, fmt="array", comment=None):
    """Write a dense matrix as a general real Matrix Market file.

    Values are written with 17 significant digits so that a re-read is
    bit-exact.
    """
    M = np.atleast_2d(np.asarray(matrix, dtype=float))
    m, n = M.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"%%MatrixMarket matrix {fmt} real general\n")
        if comment:
            for line in str(comment).splitlines():
                fh.write(f"% {line}\n")
        if fmt == "array":
            fh.write(f"{m} {n}\n")
            for v in M.T.ravel():
                fh.write(f"{v:.17g}\n")
        elif fmt == "coordinate":
            ii, jj = np.nonzero(M)
            fh.write(f"{m} {n} {ii.size}\n")
            for i, j in zip(ii, jj):
                fh.write(f"{i + 1} {j + 1} {M[i, j]:.17g}\n")
        else:
            raise ValueError(f"unknown format {fmt!r}")


def read_dense_csv(path):
    """Dense matrix from a comma- or whitespace-separated text file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    delim = "," if "," in text else None
    M = np.loadtxt(path, delimiter=delim, ndmin=2, comments="#")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{path}: non-finite entries")
    return M


def read_matrix(path):
    """Dispatch on content: Matrix Market banner, else dense CSV."""
    with open(path, "r", encoding="utf-8") as fh:
        head = fh.readline()
    if head.startswith("%%MatrixMarket"):
        return read_matrix_market(path)[0]
    return read_dense_csv(path)


def read_vector(path):
    """Vector from a Matrix Market file or a plain list of numbers."""
    M = read_matrix(path)
    if 1 not in M.shape:
        raise DimensionError(f"{path}: expected a vector, got shape {M.shape}")
    return M.ravel()


# ---------------------------------------------------------------- problems

def problem_from_rows(matrix, rhs=None, start=None, row_range=None, name=""):
    """One hyperplane per selected row of ``matrix``.

    Parameters
    ----------
    matrix : array_like, shape (p, n)
    rhs : array_like, optional
        Right-hand side for the *selected* rows; defaults to all ones.
    start : array_like, optional
        Defaults to the origin.
    row_range : int, (start, stop) or slice, optional
        An integer ``k`` selects the first ``k`` rows.

    Raises
    ------
    DegenerateHyperplaneError
        A selected row is zero.
    InconsistentSystemError
        The selected system has no solution.
    """
    M = np.atleast_2d(np.asarray(matrix, dtype=float))
    if row_range is not None:
        if isinstance(row_range, slice):
            sl = row_range
        elif np.isscalar(row_range):
            sl = slice(0, int(row_range))
        else:
            a, b = row_range
            sl = slice(int(a), int(b))
        M = M[sl]
        if M.shape[0] == 0:
            raise ValueError("row selection is empty")
    p, n = M.shape
    b = np.ones(p) if rhs is None else np.asarray(rhs, dtype=float).ravel()
    if b.shape[0] != p:
        raise DimensionError(f"rhs has length {b.shape[0]}, expected {p}")
    z0 = np.zeros(n) if start is None else start
    family = [Hyperplane(a, beta) for a, beta in zip(M, b)]
    return Problem(family, z0, name=name, matrix=M.copy(), rhs=b.copy())


def image_shape(n):
    """Most nearly square ``(h, w)`` with ``h * w == n`` and ``h <= w``."""
    h = int(np.sqrt(n))
    while n % h:
        h -= 1
    return h, n // h


def phantom_image(h, w):
    """A small piecewise-constant head-like test image with values in [0, 1]."""
    y, x = np.mgrid[0:h, 0:w]
    u = (x + 0.5) / w * 2 - 1
    v = (y + 0.5) / h * 2 - 1
    img = np.zeros((h, w))
    ellipses = [  # value, centre u, centre v, semi-axis u, semi-axis v
        (1.0, 0.0, 0.0, 0.85, 0.9),
        (-0.6, 0.0, 0.0, 0.75, 0.8),
        (0.3, -0.3, -0.1, 0.2, 0.35),
        (0.3, 0.3, -0.1, 0.2, 0.35),
        (0.2, 0.0, 0.45, 0.15, 0.15),
    ]
    for val, cu, cv, au, av in ellipses:
        img[((u - cu) / au) ** 2 + ((v - cv) / av) ** 2 <= 1.0] += val
    return np.clip(img, 0.0, 1.0)


def _draw(rng, entries, size):
    if entries == "uniform":
        return 1.0 - rng.random(size)  # (0, 1], never an exact zero
    return rng.standard_normal(size)


def synth_consistent_system(p, n, density=1.0, seed=0, planted="gaussian",
                            entries="uniform", start=None, name=None):
    """Random sparse system with a planted solution, hence consistent.

    Each entry is nonzero with probability ``density``.  Nonzeros are
    uniform on (0, 1] by default, mimicking the nonnegative ray lengths of
    a tomography matrix; ``entries="normal"`` draws standard normals
    instead.  Rows left empty get one nonzero in a random column so every
    row defines a hyperplane.  ``planted`` is ``"gaussian"`` or
    ``"phantom"`` (a flattened :func:`phantom_image`).  Output is a
    deterministic function of the arguments.
    """
    p, n = int(p), int(n)
    if p < 1 or n < 1:
        raise ValueError(f"need p, n >= 1, got {p}x{n}")
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density must lie in (0, 1], got {density}")
    if entries not in ("uniform", "normal"):
        raise ValueError(f"unknown entry distribution {entries!r}")
    rng = np.random.default_rng(seed)
    A = np.where(rng.random((p, n)) < density, _draw(rng, entries, (p, n)), 0.0)
    for i in np.flatnonzero(~A.any(axis=1)):
        A[i, rng.integers(n)] = _draw(rng, entries, None) or 1.0
    if planted == "gaussian":
        x = rng.standard_normal(n)
    elif planted == "phantom":
        x = phantom_image(*image_shape(n)).ravel()
    else:
        raise ValueError(f"unknown planted solution {planted!r}")
    b = A @ x
    prob = problem_from_rows(A, b, start=start,
                             name=name or f"synth-{p}x{n}-d{density:g}-s{seed}")
    prob.solution = x
    return prob


def partition_by_size(family, q):
    """Consecutive blocks of ``q`` subspaces; the last holds the remainder."""
    family = list(family)
    q = int(q)
    if q < 1:
        raise ValueError(f"block size must be >= 1, got {q}")
    bounds = list(range(0, len(family), q)) + [len(family)]
    return BlockPartition.from_boundaries(family, bounds)


# ---------------------------------------------------------------- output

def write_benchmark_table(rows, path):
    """CSV with header ``method,blocks,proj_reflec,iter,residual,cpu_seconds``.

    ``path`` may also be an open text stream.
    """
    if hasattr(path, "write"):
        _write_rows(rows, path)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_rows(rows, fh)


def _write_rows(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(BENCHMARK_HEADER)
    for row in rows:
        w.writerow(row.as_csv_row())


def write_pgm(path, values, shape=None):
    """8-bit binary PGM (P5), min-max normalized, row-major."""
    img = np.asarray(values, dtype=float)
    if shape is not None:
        img = img.reshape(shape)
    if img.ndim != 2:
        raise DimensionError("image must be 2-d (pass shape for a vector)")
    lo, hi = float(img.min()), float(img.max())
    scaled = np.zeros(img.shape) if hi == lo else (img - lo) / (hi - lo)
    data = np.round(scaled * 255).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())

"""
Invertible Gram-Schmidt kernels.

Forward transforms turn a set of linearly independent columns ``v`` (an
``M x N`` array) or blocks (an ``M x B x N`` array) into a pairwise
orthogonal set ``u`` of the same shape plus ``N(N-1)/2`` packed projection
coefficients ``r``.  The inverse transforms rebuild ``v`` from ``u`` and
``r``.  Outputs are orthogonal, not orthonormal: no column is ever rescaled.

Packed layout: coefficient ``r[n, m]`` (1-based, ``m < n``) lives at flat
position ``k = (n-1)(n-2)/2 + m``, which is the order the forward loops
produce them in (outer ``n`` ascending, inner ``m`` ascending).

Summation strategy: every inner product is one ``numpy.dot`` over a
contiguous copy of the column (or flattened block), so results are
deterministic for a given numpy/BLAS build.  The column recurrence itself is
sequential.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

METHODS = ("gsp", "egsp", "mgs")
DEFAULT_REL_DEP = 1e-12


class DependentVector(ValueError):
    """Raised when column ``column`` (1-based) is numerically dependent on
    the columns before it."""

    kind = "vector"

    def __init__(self, column, ratio=None):
        self.column = int(column)
        self.ratio = ratio
        msg = f"{self.kind} {self.column} is linearly dependent on the preceding {self.kind}s"
        if ratio is not None:
            msg += f" (residual/original norm ratio {ratio:.3e})"
        super().__init__(msg)


class DependentBlock(DependentVector):
    kind = "block"


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerance:
    """Relative dependence threshold.

    Column ``n`` is rejected when ``|u_n|^2 <= rel_dep^2 * |v_n|^2``.
    """

    rel_dep: float = DEFAULT_REL_DEP

    def __post_init__(self):
        if not 0.0 < self.rel_dep < 1.0:
            raise ValueError(f"rel_dep must lie in (0, 1), got {self.rel_dep!r}")


def _tolerance(tol):
    if tol is None:
        return Tolerance()
    if isinstance(tol, Tolerance):
        return tol
    return Tolerance(float(tol))


# ---------------------------------------------------------------------------
# Coefficient counting and packed storage
# ---------------------------------------------------------------------------

def gfbr(x):
    """Number of packed coefficients consumed by columns ``1 .. x+1``.

    Equal to ``0 + 1 + ... + x``.
    """
    x = int(x)
    if x < 0:
        raise ValueError(f"gfbr needs x >= 0, got {x}")
    return x * (x + 1) // 2


def n_coefficients(n_vectors):
    """Length of the packed coefficient vector for ``n_vectors`` columns."""
    if n_vectors < 1:
        raise ValueError(f"need at least one vector, got {n_vectors}")
    return gfbr(n_vectors - 1)


def pack_index(n, m):
    """1-based flat position of ``r[n, m]``; requires ``2 <= n`` and ``1 <= m < n``."""
    if n < 2 or not 1 <= m <= n - 1:
        raise IndexError(f"(n, m) = ({n}, {m}) is not a strictly lower entry")
    return gfbr(n - 2) + m


def unpack_index(k):
    """Inverse of :func:`pack_index`: 1-based ``k`` -> ``(n, m)``."""
    if k < 1:
        raise IndexError(f"packed index must be >= 1, got {k}")
    n = 2
    while gfbr(n - 1) < k:
        n += 1
    return n, k - gfbr(n - 2)


@dataclass(frozen=True, eq=False)
class PackedCoefficients:
    """Flat projection coefficients of an ``N``-column transform."""

    values: np.ndarray
    n_vectors: int

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "n_vectors", int(self.n_vectors))
        expected = n_coefficients(self.n_vectors)
        if values.size != expected:
            raise ShapeError(
                f"{self.n_vectors} vectors need {expected} coefficients, got {values.size}"
            )

    @classmethod
    def zeros(cls, n_vectors):
        return cls(np.zeros(n_coefficients(n_vectors)), n_vectors)

    @classmethod
    def from_triangular(cls, t):
        """Pack the strictly lower part of a unit lower-triangular matrix."""
        t = np.asarray(t, dtype=np.float64)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ShapeError(f"expected a square matrix, got shape {t.shape}")
        rows, cols = np.tril_indices(t.shape[0], -1)
        return cls(t[rows, cols], t.shape[0])

    def __len__(self):
        return self.values.size

    def __getitem__(self, nm):
        n, m = nm
        if n > self.n_vectors:
            raise IndexError(f"row {n} out of range for {self.n_vectors} vectors")
        return float(self.values[pack_index(n, m) - 1])

    def row(self, n):
        """Coefficients ``r[n, 1 .. n-1]`` (1-based ``n``)."""
        if not 1 <= n <= self.n_vectors:
            raise IndexError(f"row {n} out of range for {self.n_vectors} vectors")
        return self.values[gfbr(n - 2) if n >= 2 else 0:gfbr(n - 1)]

    def triangular(self):
        """Unit lower-triangular ``N x N`` view: ones on the diagonal,
        ``r[n, m]`` below it, zeros above."""
        n = self.n_vectors
        t = np.eye(n)
        # row-major lower triangle has the same order as the packed layout
        t[np.tril_indices(n, -1)] = self.values
        return t

    def __eq__(self, other):
        if not isinstance(other, PackedCoefficients):
            return NotImplemented
        return self.n_vectors == other.n_vectors and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"PackedCoefficients(n_vectors={self.n_vectors}, values={self.values!r})"


def _coefficients(r, n_vectors):
    if isinstance(r, PackedCoefficients):
        if r.n_vectors != n_vectors:
            raise ShapeError(
                f"coefficients are for {r.n_vectors} vectors but the set has {n_vectors}"
            )
        return r
    return PackedCoefficients(r, n_vectors)


# ---------------------------------------------------------------------------
# Input validation
# ---------------------------------------------------------------------------

def as_vector_set(v):
    """Validate an ``M x N`` column set and return it as float64."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 2 or min(v.shape) < 1:
        raise ShapeError(f"a vector set must be a nonempty M x N array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector set contains NaN or Inf")
    return v


def as_block_set(v):
    """Validate an ``M x B x N`` block set and return it as float64."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 3 or min(v.shape) < 1:
        raise ShapeError(f"a block set must be a nonempty M x B x N array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("block set contains NaN or Inf")
    return v


def _to_stack(v):
    # one contiguous row per column/block; B = 1 gives the same rows as M x N
    n = v.shape[-1]
    return np.ascontiguousarray(np.moveaxis(v, -1, 0).reshape(n, -1))


def _from_stack(stack, shape):
    return np.moveaxis(stack.reshape((shape[-1],) + shape[:-1]), 0, -1).copy()


# ---------------------------------------------------------------------------
# Kernels (operate on N x L stacks)
# ---------------------------------------------------------------------------

def _forward(stack, method, tol, error):
    n_vec = stack.shape[0]
    rel2 = tol.rel_dep ** 2
    u = np.empty_like(stack)
    den = np.empty(n_vec)
    r = np.empty(n_coefficients(n_vec))
    k = 0
    for n in range(n_vec):
        vn = stack[n]
        if method == "gsp":
            acu = np.zeros_like(vn)
            for m in range(n):
                r[k] = np.dot(vn, u[m]) / den[m]
                acu = acu + r[k] * u[m]
                k += 1
            u[n] = vn - acu
        elif method == "egsp":
            un = vn.copy()
            for m in range(n):
                r[k] = np.dot(vn, u[m]) / den[m]
                un = un - r[k] * u[m]
                k += 1
            u[n] = un
        elif method == "mgs":
            un = vn.copy()
            for m in range(n):
                r[k] = np.dot(un, u[m]) / den[m]
                un = un - r[k] * u[m]
                k += 1
            u[n] = un
        else:
            raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
        den[n] = np.dot(u[n], u[n])
        ref = np.dot(vn, vn)
        if den[n] <= rel2 * ref:
            ratio = float(np.sqrt(den[n] / ref)) if ref > 0 else None
            raise error(n + 1, ratio)
    return u, PackedCoefficients(r, n_vec)


def _inverse(stack, r, accumulate_first):
    v = np.empty_like(stack)
    k = 0
    for n in range(stack.shape[0]):
        if accumulate_first:
            acu = np.zeros_like(stack[n])
            for m in range(n):
                acu = acu + r[k] * stack[m]
                k += 1
            v[n] = stack[n] + acu
        else:
            vn = stack[n].copy()
            for m in range(n):
                vn = vn + r[k] * stack[m]
                k += 1
            v[n] = vn
    return v


def _forward_vectors(v, method, tol):
    v = as_vector_set(v)
    u, r = _forward(_to_stack(v), method, _tolerance(tol), DependentVector)
    return _from_stack(u, v.shape), r


def _inverse_any(u, r, accumulate_first, block):
    u = as_block_set(u) if block else as_vector_set(u)
    r = _coefficients(r, u.shape[-1])
    v = _inverse(_to_stack(u), r.values, accumulate_first)
    return _from_stack(v, u.shape)


# ---------------------------------------------------------------------------
# Public transforms
# ---------------------------------------------------------------------------

def gsp(v, tol=None):
    """Classical Gram-Schmidt.

    All projections of ``v_n`` are accumulated first and subtracted once.

    Parameters
    ----------
    v : array_like, shape (M, N)
        Columns are the input vectors.
    tol : Tolerance or float, optional
        Dependence threshold, default ``1e-12``.

    Returns
    -------
    u : ndarray, shape (M, N)
        Pairwise orthogonal columns, ``u[:, 0] == v[:, 0]``.
    r : PackedCoefficients
        ``r[n, m] = <u_m, v_n> / <u_m, u_m>``.

    Raises
    ------
    DependentVector
        If some ``u_n`` collapses below ``tol`` relative to ``v_n``.
    """
    return _forward_vectors(v, "gsp", tol)


def egsp(v, tol=None):
    """Enhanced Gram-Schmidt.

    ``u_n`` starts as ``v_n`` and each projection is subtracted as soon as it
    is computed.  The projection numerator always uses the original ``v_n``.
    Same signature and errors as :func:`gsp`.
    """
    return _forward_vectors(v, "egsp", tol)


def mgs_strict(v, tol=None):
    """Textbook modified Gram-Schmidt: like :func:`egsp` but the numerator
    uses the partially updated ``u_n``.  Invert with :func:`iegsp`."""
    return _forward_vectors(v, "mgs", tol)


def igsp(u, r):
    """Inverse of :func:`gsp`: ``v_n = u_n + sum_{m<n} r[n, m] u_m``,
    with the sum accumulated before it is added."""
    return _inverse_any(u, r, accumulate_first=True, block=False)


def iegsp(u, r):
    """Inverse of :func:`egsp` (and :func:`mgs_strict`), adding each
    ``r[n, m] u_m`` term incrementally."""
    return _inverse_any(u, r, accumulate_first=False, block=False)


def egsp2d(v, tol=None):
    """Block version of :func:`egsp` for an ``M x B x N`` array.

    Blocks are compared with the Frobenius inner product, so the number of
    coefficients is ``N(N-1)/2`` whatever ``M`` and ``B`` are.  With ``B = 1``
    the result is bit-identical to :func:`egsp` on the squeezed array.

    Raises
    ------
    DependentBlock
    """
    v = as_block_set(v)
    u, r = _forward(_to_stack(v), "egsp", _tolerance(tol), DependentBlock)
    return _from_stack(u, v.shape), r


def iegsp2d(u, r):
    """Inverse of :func:`egsp2d`."""
    return _inverse_any(u, r, accumulate_first=False, block=True)


def orthogonalize(v, method="egsp", tol=None):
    """Run ``method`` on a vector set (2-D) or block set (3-D).

    Block sets accept every method; dependence there raises
    :class:`DependentBlock`.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    arr = np.asarray(v)
    if arr.ndim == 3:
        arr = as_block_set(arr)
        u, r = _forward(_to_stack(arr), method, _tolerance(tol), DependentBlock)
        return _from_stack(u, arr.shape), r
    return _forward_vectors(arr, method, tol)


def reconstruct(u, r, method="egsp"):
    """Inverse matching ``method``; works for vector and block sets."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    block = np.ndim(u) == 3
    return _inverse_any(u, r, accumulate_first=(method == "gsp"), block=block)


def prune_reconstruct(u, r, keep, *, project=False):
    """Lossy reconstruction that drops the trailing orthogonal components.

    Columns ``1 .. keep`` are rebuilt exactly.  For ``n > keep`` the own
    component ``u_n`` is dropped, so ``v_n - vhat_n = u_n`` and the squared
    error is exactly the energy of the dropped components.

    With ``project=True`` the terms ``r[n, m] u_m`` with ``m > keep`` are
    dropped as well, i.e. ``vhat_n`` is the orthogonal projection of ``v_n``
    onto ``span(u_1 .. u_keep)``, which only needs the first ``keep``
    components of ``u``.

    ``keep = N`` returns the exact inverse in both modes.
    """
    block = np.ndim(u) == 3
    u = as_block_set(u) if block else as_vector_set(u)
    n_vec = u.shape[-1]
    r = _coefficients(r, n_vec)
    keep = int(keep)
    if not 1 <= keep <= n_vec:
        raise ValueError(f"keep must lie in [1, {n_vec}], got {keep}")
    stack = _to_stack(u)
    out = np.empty_like(stack)
    k = 0
    for n in range(n_vec):
        vn = stack[n].copy() if n < keep else np.zeros_like(stack[n])
        for m in range(n):
            if n < keep or not project or m < keep:
                vn = vn + r.values[k] * stack[m]
            k += 1
        out[n] = vn
    return _from_stack(out, u.shape)

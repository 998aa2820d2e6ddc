"""Finite-dimensional Hermitian/unitary matrix layer.

Eigendecomposition, functional calculus, spectral projections, norms and
compressions.  Everything here is plain dense numpy underneath; banded
storage only exists so that the localiser module can route large matrices
around the O(n^3) dense path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BoundaryEigenvalue,
    DimensionMismatch,
    DimensionTooLarge,
    IndexOutOfRange,
)

#: Largest dimension for which dense O(n^3) eigen-paths are allowed.
DENSE_LIMIT = 20000

#: Spectral boundaries must clear the spectrum by at least this much.
GAP_TOL = 1e-9

DENSE = "dense"
BANDED = "banded"


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HermitianMatrix:
    """Hermitian matrix with a storage-layout tag.

    ``layout == "dense"``: ``data`` is the full (n, n) matrix, exactly equal
    to its conjugate transpose as stored.

    ``layout == "banded"``: ``data`` is LAPACK-style lower band storage of
    shape (bandwidth + 1, n): ``data[i, j] = A[j + i, j]``.  The upper
    triangle is implied by Hermitian symmetry, so the stored entries satisfy
    the symmetry invariant by construction.
    """

    data: np.ndarray
    layout: str = DENSE
    bandwidth: int = 0

    def __post_init__(self):
        object.__setattr__(self, "data", _freeze(self.data))
        if self.layout == DENSE:
            if self.data.ndim != 2 or self.data.shape[0] != self.data.shape[1]:
                raise DimensionMismatch("dense Hermitian storage must be square")
        elif self.layout == BANDED:
            if self.data.ndim != 2 or self.data.shape[0] != self.bandwidth + 1:
                raise DimensionMismatch("band storage must have bandwidth+1 rows")
        else:
            raise ValueError(f"unknown layout {self.layout!r}")

    @classmethod
    def from_dense(cls, a: np.ndarray, *, atol: float | None = None) -> "HermitianMatrix":
        """Wrap a dense array, verifying Hermitian symmetry.

        The stored matrix is the exact Hermitian average (a + a*)/2, which is
        Hermitian entry-by-entry in IEEE arithmetic.  ``atol`` bounds the
        allowed deviation of the input from its average (default:
        1e-10 * max(1, |a|_max)).
        """
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected square matrix, got {a.shape}")
        h = (a + a.conj().T) / 2
        if atol is None:
            atol = 1e-10 * max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
        dev = float(np.max(np.abs(a - h))) if a.size else 0.0
        if dev > atol:
            raise DimensionMismatch(f"matrix is not Hermitian: deviation {dev:.3e}")
        return cls(h, DENSE, 0)

    @classmethod
    def from_diagonal(cls, d: np.ndarray) -> "HermitianMatrix":
        """Diagonal matrix stored as bandwidth-0 band storage."""
        d = np.asarray(d)
        if np.iscomplexobj(d):
            if np.max(np.abs(d.imag)) > 1e-12 * max(1.0, np.max(np.abs(d))):
                raise DimensionMismatch("diagonal of a Hermitian matrix must be real")
            d = d.real
        return cls(d.reshape(1, -1).astype(float), BANDED, 0)

    @classmethod
    def from_banded(cls, ab: np.ndarray, bandwidth: int) -> "HermitianMatrix":
        """Wrap LAPACK lower band storage (bandwidth+1, n)."""
        ab = np.asarray(ab)
        return cls(ab, BANDED, bandwidth)

    @property
    def dim(self) -> int:
        return self.data.shape[1] if self.layout == BANDED else self.data.shape[0]

    @property
    def is_diagonal(self) -> bool:
        return self.layout == BANDED and self.bandwidth == 0

    def diagonal(self) -> np.ndarray:
        if self.layout == BANDED:
            return self.data[0].real
        return np.real(np.diag(self.data))

    def to_dense(self) -> np.ndarray:
        """Materialise the full matrix (guarded by DENSE_LIMIT)."""
        if self.layout == DENSE:
            return np.array(self.data)
        n = self.dim
        if n > DENSE_LIMIT:
            raise DimensionTooLarge(
                f"cannot densify banded matrix of dim {n} > {DENSE_LIMIT}"
            )
        out = np.zeros((n, n), dtype=self.data.dtype)
        for i in range(self.bandwidth + 1):
            m = n - i
            idx = np.arange(m)
            out[idx + i, idx] = self.data[i, :m]
            if i:
                out[idx, idx + i] = np.conj(self.data[i, :m])
        return out


Matrix = np.ndarray  # general (possibly rectangular) complex matrix


def as_dense(m) -> np.ndarray:
    """Dense ndarray view of a HermitianMatrix or array-like."""
    if isinstance(m, HermitianMatrix):
        return m.to_dense()
    return np.asarray(m)


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues with a unitary column eigenbasis."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _freeze(self.eigenvalues))
        object.__setattr__(self, "eigenvectors", _freeze(self.eigenvectors))

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eig(h: HermitianMatrix) -> EigenSystem:
    """Full eigendecomposition, dense path only.

    Banded inputs are densified when dim <= DENSE_LIMIT; beyond that the
    dense path is refused (use the banded inertia machinery instead).
    """
    n = h.dim
    if n > DENSE_LIMIT:
        raise DimensionTooLarge(f"eig: dim {n} exceeds dense limit {DENSE_LIMIT}")
    if h.is_diagonal:
        d = h.diagonal()
        order = np.argsort(d, kind="stable")
        vecs = np.zeros((n, n))
        vecs[order, np.arange(n)] = 1.0
        return EigenSystem(d[order], vecs)
    w, v = np.linalg.eigh(h.to_dense())
    return EigenSystem(w, v)


def apply_function(h: HermitianMatrix, f: Callable[[np.ndarray], np.ndarray]) -> HermitianMatrix:
    """Functional calculus f(H).

    Diagonal matrices take a fast path: f is applied entrywise to the stored
    diagonal, no eigendecomposition.  Dense matrices go through eigh and the
    result is re-symmetrised exactly.
    """
    if h.is_diagonal:
        return HermitianMatrix.from_diagonal(np.asarray(f(h.diagonal()), dtype=float))
    es = eig(h)
    fv = np.asarray(f(es.eigenvalues))
    out = (es.eigenvectors * fv) @ es.eigenvectors.conj().T
    return HermitianMatrix((out + out.conj().T) / 2, DENSE, 0)


def spectral_projection(
    h: HermitianMatrix,
    interval: Sequence[float],
    gap_tol: float = GAP_TOL,
) -> HermitianMatrix:
    """Orthogonal projection onto eigenvectors with eigenvalue in [a, b].

    Raises BoundaryEigenvalue when an eigenvalue sits within gap_tol of a
    boundary; truncation thresholds must avoid the spectrum.
    """
    a, b = float(interval[0]), float(interval[1])
    es = eig(h)
    w = es.eigenvalues
    for boundary in (a, b):
        if w.size:
            i = int(np.argmin(np.abs(w - boundary)))
            dist = abs(w[i] - boundary)
            if dist < gap_tol:
                raise BoundaryEigenvalue(float(w[i]), float(dist))
    inside = (w >= a) & (w <= b)
    if h.is_diagonal:
        d = h.diagonal()
        return HermitianMatrix.from_diagonal(((d >= a) & (d <= b)).astype(float))
    vs = es.eigenvectors[:, inside]
    p = vs @ vs.conj().T
    return HermitianMatrix((p + p.conj().T) / 2, DENSE, 0)


def operator_norm(m) -> float:
    """Largest singular value."""
    a = as_dense(m)
    if a.size == 0:
        return 0.0
    if a.ndim == 1:
        return float(np.linalg.norm(a))
    return float(np.linalg.norm(a, 2))


def compress(m, rows, cols) -> np.ndarray:
    """Entrywise restriction M[rows, cols].

    Index sets may be integer arrays or boolean masks; compressing twice
    composes as intersection of the index sets.
    """
    a = as_dense(m)
    rows = _as_index(rows, a.shape[0], "row")
    cols = _as_index(cols, a.shape[1], "column")
    return a[np.ix_(rows, cols)]


def _as_index(idx, extent: int, what: str) -> np.ndarray:
    idx = np.asarray(idx)
    if idx.dtype == bool:
        if idx.shape != (extent,):
            raise IndexOutOfRange(f"{what} mask has wrong length {idx.shape}")
        return np.where(idx)[0]
    idx = idx.astype(int)
    if idx.size and (idx.min() < 0 or idx.max() >= extent):
        raise IndexOutOfRange(f"{what} index out of range for extent {extent}")
    return idx

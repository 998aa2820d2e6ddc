"""Banded Hermitian LDL* inertia.

LAPACK-style lower band storage: ab[i, j] = A[j + i, j] for
0 <= i <= bandwidth.  The factorization uses 1x1 pivots with
Bunch-Kaufman-style adjacent 2x2 pivots (no row exchanges, so the band
never grows) and counts inertia from the pivot blocks.  Robustness comes
from running the factorization at two diagonal shifts +-rho and requiring
both inertias to agree: agreement certifies that no eigenvalue lies in
[-rho, rho) and the inertia of the unshifted matrix equals both.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import SingularMatrix

_OK = 0
_BREAKDOWN = 1
_GROWTH = 2

_ALPHA = (1.0 + np.sqrt(17.0)) / 8.0  # Bunch-Kaufman pivot threshold
_GROWTH_LIMIT = 1e12


@njit(cache=True)
def _ldl_inertia_kernel(ab, bw, breakdown_tol, growth_limit):  # pragma: no cover
    n = ab.shape[1]
    npos = 0
    nneg = 0
    k = 0
    while k < n:
        w = bw if bw < n - 1 - k else n - 1 - k
        a = ab[0, k].real
        colmax = 0.0
        for i in range(1, w + 1):
            m = abs(ab[i, k])
            if m > colmax:
                colmax = m
        if abs(a) > growth_limit:
            return npos, nneg, _GROWTH
        if abs(a) >= _ALPHA * colmax:
            # 1x1 pivot
            if abs(a) <= breakdown_tol:
                return npos, nneg, _BREAKDOWN
            for j in range(k + 1, k + w + 1):
                ljk = ab[j - k, k] / a
                if ljk != 0:
                    for i in range(j, k + w + 1):
                        ab[i - j, j] -= ab[i - k, k] * np.conj(ljk)
            if a > 0.0:
                npos += 1
            else:
                nneg += 1
            k += 1
        else:
            # adjacent 2x2 pivot on (k, k+1); colmax > 0 implies w >= 1
            b = ab[1, k]
            c = ab[0, k + 1].real
            det = a * c - (b.real * b.real + b.imag * b.imag)
            scale = max(abs(a), abs(b), abs(c))
            if abs(det) <= breakdown_tol * max(scale, 1.0):
                return npos, nneg, _BREAKDOWN
            w2 = bw if bw < n - 2 - k else n - 2 - k
            for j in range(k + 2, k + 2 + w2):
                xj = ab[j - k, k] if j - k <= bw else 0.0 * ab[0, 0]
                yj = ab[j - k - 1, k + 1]
                u1 = (c * np.conj(xj) - np.conj(b) * np.conj(yj)) / det
                u2 = (-b * np.conj(xj) + a * np.conj(yj)) / det
                if u1 != 0 or u2 != 0:
                    for i in range(j, k + 2 + w2):
                        xi = ab[i - k, k] if i - k <= bw else 0.0 * ab[0, 0]
                        yi = ab[i - k - 1, k + 1]
                        ab[i - j, j] -= xi * u1 + yi * u2
            if det < 0.0:
                npos += 1
                nneg += 1
            elif a + c > 0.0:
                npos += 2
            else:
                nneg += 2
            k += 2
    return npos, nneg, _OK


def band_from_dense(a: np.ndarray, bandwidth: int) -> np.ndarray:
    """Lower band storage of a dense Hermitian matrix."""
    n = a.shape[0]
    ab = np.zeros((bandwidth + 1, n), dtype=a.dtype)
    for i in range(bandwidth + 1):
        ab[i, : n - i] = np.diagonal(a, -i)
    return ab


def band_to_dense(ab: np.ndarray, bandwidth: int) -> np.ndarray:
    n = ab.shape[1]
    out = np.zeros((n, n), dtype=ab.dtype)
    for i in range(bandwidth + 1):
        idx = np.arange(n - i)
        out[idx + i, idx] = ab[i, : n - i]
        if i:
            out[idx, idx + i] = np.conj(ab[i, : n - i])
    return out


def band_inf_norm(ab: np.ndarray, bandwidth: int) -> float:
    """Max absolute row sum, an upper bound for the operator norm."""
    n = ab.shape[1]
    sums = np.zeros(n)
    sums += np.abs(ab[0])
    for i in range(1, bandwidth + 1):
        m = n - i
        sums[i:] += np.abs(ab[i, :m])  # entries below the diagonal
        sums[:m] += np.abs(ab[i, :m])  # their Hermitian mirrors
    return float(np.max(sums)) if n else 0.0


def banded_inertia(ab: np.ndarray, bandwidth: int, rho: float):
    """Certified inertia (n_pos, n_neg) of the banded Hermitian matrix.

    Runs the LDL inertia at diagonal shifts -rho and +rho; agreement
    certifies that no eigenvalue lies within rho of zero and pins the
    inertia.  Raises SingularMatrix on disagreement or pivot breakdown.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    scale = max(float(np.max(np.abs(ab))), 1e-300)
    breakdown_tol = 1e-14 * scale
    results = []
    # one working buffer, refilled per shift: peak memory stays at 2x the
    # band storage even for ~1e7-dimensional inputs
    work = np.empty(ab.shape, dtype=np.complex128 if np.iscomplexobj(ab) else np.float64)
    for shift in (-rho, rho):
        np.copyto(work, ab)
        work[0] += shift
        npos, nneg, status = _ldl_inertia_kernel(
            work, int(bandwidth), breakdown_tol, _GROWTH_LIMIT * scale
        )
        if status == _BREAKDOWN:
            raise SingularMatrix(f"pivot breakdown at shift {shift:+.3e}")
        if status == _GROWTH:
            raise SingularMatrix("element growth exceeded the stability limit")
        results.append((npos, nneg))
    # eigenvalues of A - rho vs A + rho: agreement of the counts means the
    # open window (-rho, rho) contains no spectrum
    (npos_m, nneg_m), (npos_p, nneg_p) = results
    if (npos_m, nneg_m) != (npos_p, nneg_p):
        raise SingularMatrix(
            f"inertia differs between +-rho shifts ({results}); spectrum meets "
            f"the zero window of half-width {rho:.3e}"
        )
    return npos_m, nneg_m

"""Bundled spectral-triple instances with exact ground truth.

The circle Dirac model (D = -i d/dtheta truncated to Fourier modes
|n| <= N, v = multiplication by e^(i k theta), a shift by k) carries the
closed-form commutator norm |[D, v]| = |k| and a brute-force Fredholm
oracle for the index of P v P + (1 - P).  The weighted block model stacks
circle models for the semi-finite variant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionTooLarge,
    InvalidWeights,
    RankDecisionAmbiguous,
    TruncationTooSmall,
)
from .operators import DENSE_LIMIT

#: Singular values below this count as kernel directions in the oracle.
ORACLE_SV_TOL = 1e-8

#: Required gap between kernel and non-kernel singular values.
ORACLE_GAP_TOL = 1e-4


@dataclass(frozen=True)
class CircleModel:
    """Fourier truncation of the circle spectral triple with winding k."""

    N: int
    k: int

    @property
    def dim(self) -> int:
        return 2 * self.N + 1

    @property
    def comm_norm(self) -> float:
        """|[D, v]| = |k|, exact: [D, e^(ik theta)] = k e^(ik theta)."""
        return float(abs(self.k))

    def modes(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def d_diag(self) -> np.ndarray:
        return self.modes().astype(float)

    def doubled_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of D + D in the interleaved doubled ordering."""
        return np.repeat(self.d_diag(), 2)

    def v_matrix(self) -> np.ndarray:
        """Dense shift-by-k matrix on the truncation: v e_m = e_{m+k}."""
        if self.dim > DENSE_LIMIT:
            raise DimensionTooLarge(f"dense v at dim {self.dim} > {DENSE_LIMIT}")
        v = np.zeros((self.dim, self.dim))
        m = np.arange(self.dim)
        src = m[(m + self.k >= 0) & (m + self.k < self.dim)]
        v[src + self.k, src] = 1.0
        return v

    def interior_mask(self) -> np.ndarray:
        """Modes on which v is exactly unitary: |n| <= N - |k|."""
        return np.abs(self.modes()) <= self.N - abs(self.k)

    def commutator_matrix(self) -> np.ndarray:
        """[D, v] on the truncation (k times the shift on its arcs)."""
        d = np.diag(self.d_diag())
        v = self.v_matrix()
        return d @ v - v @ d

    def descriptor(self) -> dict:
        return {"type": "circle", "N": self.N, "k": self.k}


def circle_model(N: int, k: int) -> CircleModel:
    if N < abs(k) + 1:
        raise TruncationTooSmall(f"need N >= |k| + 1 = {abs(k) + 1}, got {N}")
    return CircleModel(int(N), int(k))


def edge_guard(N: int, lam: float, k: int) -> bool:
    """True when all compressions at threshold lam are exactly equal to
    their bi-infinite counterparts: N >= lam + |k| + 1."""
    return N >= lam + abs(k) + 1


@dataclass(frozen=True)
class FredholmWitness:
    dim_ker: int
    dim_coker: int
    sv_gap: float
    alt_index: int  # same computation with the zero mode assigned to P

    @property
    def index(self) -> int:
        return self.dim_ker - self.dim_coker


def _kernel_counts(T: np.ndarray, modes: np.ndarray, guard: np.ndarray, sv_tol, gap_tol):
    """Kernel/cokernel dimensions of T with truncation artifacts removed.

    On a finite truncation every operator has matrix index zero: the
    genuine kernel vectors of the bi-infinite operator are compactly
    supported near mode 0, while the truncation introduces artifact
    vectors supported on the guard region at the edges.  Vectors are
    classified by where more than half of their mass sits.
    """
    u, sv, vh = np.linalg.svd(T)
    null = sv < sv_tol
    n_null = int(np.sum(null))
    if n_null < len(sv):
        smallest_keep = float(np.min(sv[~null]))
        if smallest_keep < gap_tol:
            raise RankDecisionAmbiguous(
                f"singular value {smallest_keep:.3e} inside the ambiguity window"
            )
        gap = smallest_keep
    else:
        gap = float("inf")
    dim_ker = 0
    dim_coker = 0
    for i in np.where(null)[0]:
        if np.sum(np.abs(vh[i].conj()[guard]) ** 2) < 0.5:
            dim_ker += 1
        if np.sum(np.abs(u[:, i][guard]) ** 2) < 0.5:
            dim_coker += 1
    return dim_ker, dim_coker, gap


def fredholm_index_oracle(
    model: CircleModel,
    sv_tol: float = ORACLE_SV_TOL,
    gap_tol: float = ORACLE_GAP_TOL,
) -> FredholmWitness:
    """Brute-force index of P v P + (1 - P), P = chi_(0,inf)(D).

    The zero mode is assigned to 1 - P; the witness also carries the index
    computed with P' = chi_[0,inf)(D), which must agree (the index pairing
    does not depend on the chopping convention).
    """
    if model.N < 2 * abs(model.k) + 8:
        raise TruncationTooSmall(f"oracle needs N >= 2|k| + 8, got N = {model.N}")
    if model.dim > DENSE_LIMIT:
        raise DimensionTooLarge("oracle runs on dense truncations only")
    modes = model.modes()
    v = model.v_matrix()
    guard = np.abs(modes) > model.N - abs(model.k) - 2

    def run(P_diag):
        P = np.diag(P_diag.astype(float))
        T = P @ v @ P + np.eye(model.dim) - P
        return _kernel_counts(T, modes, guard, sv_tol, gap_tol)

    dim_ker, dim_coker, gap = run(modes > 0)
    alt_ker, alt_coker, _ = run(modes >= 0)
    alt_index = alt_ker - alt_coker
    if alt_index != dim_ker - dim_coker:
        raise RankDecisionAmbiguous(
            f"chopping conventions disagree: {dim_ker - dim_coker} vs {alt_index}"
        )
    return FredholmWitness(dim_ker, dim_coker, gap, alt_index)


def fredholm_index_from_parts(d_diags, vs, guards, sv_tol=ORACLE_SV_TOL, gap_tol=ORACLE_GAP_TOL):
    """Oracle on an explicit direct sum of diagonal-D models.

    Used to check additivity of the index under v1 + v2.
    """
    d = np.concatenate([np.asarray(x, dtype=float) for x in d_diags])
    dim = len(d)
    v = np.zeros((dim, dim))
    off = 0
    guard = np.zeros(dim, dtype=bool)
    for vi, gi in zip(vs, guards):
        ni = vi.shape[0]
        v[off : off + ni, off : off + ni] = vi
        guard[off : off + ni] = gi
        off += ni
    P = np.diag((d > 0).astype(float))
    T = P @ v @ P + np.eye(dim) - P
    dim_ker, dim_coker, gap = _kernel_counts(T, d, guard, sv_tol, gap_tol)
    return dim_ker - dim_coker


@dataclass(frozen=True)
class BlockModel:
    """Weighted direct sum of circle models over B = C^m."""

    weights: tuple
    components: tuple

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def windings(self) -> tuple:
        return tuple(c.k for c in self.components)

    def descriptor(self) -> dict:
        return {
            "type": "block",
            "N": self.components[0].N,
            "weights": list(self.weights),
            "windings": list(self.windings),
        }


def block_model(weights, windings, N: int) -> BlockModel:
    weights = [float(w) for w in weights]
    windings = [int(k) for k in windings]
    if len(weights) != len(windings) or not weights:
        raise DimensionMismatch("weights and windings must have equal nonzero length")
    if any(w <= 0 for w in weights):
        raise InvalidWeights(f"weights must be strictly positive, got {weights}")
    if not np.isfinite(sum(weights)):
        raise InvalidWeights("weights must have a finite sum")
    return BlockModel(tuple(weights), tuple(circle_model(N, k) for k in windings))


def model_from_descriptor(desc: dict):
    kind = desc.get("type")
    if kind == "circle":
        return circle_model(desc["N"], desc["k"])
    if kind == "block":
        return block_model(desc["weights"], desc["windings"], desc["N"])
    raise DimensionMismatch(f"unknown model type {kind!r}")

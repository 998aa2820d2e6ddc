"""Quantitative K-theory kernel.

Quasi-idempotent defects, the kappa0 spectral projection, straight-line
homotopy criteria, and K0-class bookkeeping via rank differences.  The
quantitative criteria implemented here are pure arithmetic; every homotopy
claim is double-checked numerically on a fixed 65-point grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DefectTooLarge, NonIntegralTrace, SignIterationDiverged
from .operators import HermitianMatrix, as_dense, operator_norm

#: s-grid used as a numerical witness for straight-line homotopies.
HOMOTOPY_GRID = np.linspace(0.0, 1.0, 65)

#: |trace - round(trace)| above this aborts rank extraction.
TRACE_TOL = 1e-6


def idempotent_defect(e) -> float:
    """Operator norm of e^2 - e."""
    a = as_dense(e)
    return operator_norm(a @ a - a)


@dataclass(frozen=True)
class QuasiIdempotent:
    """Square matrix with cached defect |e^2 - e|."""

    matrix: np.ndarray
    defect: float

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @classmethod
    def from_matrix(cls, e) -> "QuasiIdempotent":
        a = np.array(as_dense(e))
        return cls(a, idempotent_defect(a))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def certified(self, eps: float) -> bool:
        """True when this is an eps-quasi-idempotent with eps <= 1/4."""
        return self.defect < eps <= 0.25


@dataclass(frozen=True)
class QuasiProjection(QuasiIdempotent):
    """Hermitian quasi-idempotent.

    For Hermitian e with defect < 1/4 the spectrum automatically avoids
    (1/2 - g, 1/2 + g) with g = sqrt(1/4 - defect).
    """

    @classmethod
    def from_matrix(cls, e) -> "QuasiProjection":
        h = e if isinstance(e, HermitianMatrix) else HermitianMatrix.from_dense(as_dense(e))
        a = h.to_dense()  # fresh array; frozen by __post_init__
        return cls(a, idempotent_defect(a))

    def spectral_gap_halfwidth(self) -> float:
        if self.defect >= 0.25:
            raise DefectTooLarge(f"defect {self.defect:.4f} >= 1/4")
        return float(np.sqrt(0.25 - self.defect))


def kappa0(e, *, tol: float = 1e-12, max_iter: int = 100) -> np.ndarray:
    """Projection onto the spectrum with Re z > 1/2.

    Hermitian inputs go through the eigendecomposition (exact orthogonal
    projection).  Non-Hermitian quasi-idempotents use the Newton sign
    iteration Z <- (Z + Z^-1)/2 on Z0 = 2e - 1, converged when
    |Z^2 - 1| <= tol; kappa0 = (sign + 1)/2 is then an oblique idempotent.
    """
    a = np.asarray(as_dense(e))
    defect = idempotent_defect(a)
    if defect >= 0.25:
        raise DefectTooLarge(f"defect {defect:.4f} >= 1/4; kappa0 undefined")
    herm = np.max(np.abs(a - a.conj().T)) <= 1e-12 * max(1.0, np.max(np.abs(a)))
    if herm:
        w, v = np.linalg.eigh((a + a.conj().T) / 2)
        vs = v[:, w > 0.5]
        p = vs @ vs.conj().T
        return (p + p.conj().T) / 2
    z = 2.0 * a.astype(complex) - np.eye(a.shape[0])
    residuals = []
    for _ in range(max_iter):
        r = operator_norm(z @ z - np.eye(a.shape[0]))
        residuals.append(r)
        if r <= tol:
            return (z + np.eye(a.shape[0])) / 2
        try:
            zinv = np.linalg.inv(z)
        except np.linalg.LinAlgError as exc:
            raise SignIterationDiverged(residuals, f"singular iterate: {exc}") from exc
        z = (z + zinv) / 2
    raise SignIterationDiverged(residuals)


def perturbation_defect_bound(norm_e: float, eps: float, delta: float) -> float:
    """Right-hand side of the perturbation estimate.

    |f^2 - f| <= (2|e| + |e - f| + 1)|e - f| + |e^2 - e|, evaluated at
    |e| = norm_e, |e^2 - e| = eps, |e - f| = delta.
    """
    if min(norm_e, eps, delta) < 0:
        raise ValueError("arguments must be nonnegative")
    return (2.0 * norm_e + delta + 1.0) * delta + eps


@dataclass(frozen=True)
class HomotopyWitness:
    valid: bool
    worst_defect: float
    criterion: float


def straightline_homotopy_valid(e, f) -> HomotopyWitness:
    """Straight-line homotopy criterion for quasi-idempotents.

    Valid iff max(eps_e, eps_f) + |e - f|^2 / 4 < 1/4.  The worst defect
    along the 65-point s-grid is returned as a numerical witness; it must
    stay below 1/4 whenever the criterion holds.
    """
    a, b = np.asarray(as_dense(e)), np.asarray(as_dense(f))
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    eps_e = idempotent_defect(a)
    eps_f = idempotent_defect(b)
    delta = operator_norm(a - b)
    criterion = max(eps_e, eps_f) + 0.25 * delta**2
    worst = max(idempotent_defect((1.0 - s) * a + s * b) for s in HOMOTOPY_GRID)
    return HomotopyWitness(bool(criterion < 0.25), float(worst), float(criterion))


@dataclass(frozen=True)
class PerturbationWitness:
    is_quasi: bool
    eps_f: float
    homotopic: bool
    delta: float
    criterion: float


def projection_perturbation_check(e, f) -> PerturbationWitness:
    """Check whether a Hermitian perturbation f of a projection e stays a
    quasi-projection homotopic to e.

    delta = |e - f| < 1/17 certifies f as a 4*delta-quasi-projection with a
    straight-line homotopy.  Otherwise the general criterion
    (2|e| + (5/4) delta + 1) delta + eps < 1/4 is evaluated; homotopic is
    claimed only when it holds.
    """
    a, b = np.asarray(as_dense(e)), np.asarray(as_dense(f))
    eps_e = idempotent_defect(a)
    if eps_e > 1e-10:
        raise DefectTooLarge(f"e must be an exact projection, defect {eps_e:.3e}")
    delta = operator_norm(a - b)
    eps_f = idempotent_defect(b)
    norm_e = operator_norm(a)
    criterion = (2.0 * norm_e + 1.25 * delta + 1.0) * delta + eps_e
    if delta < 1.0 / 17.0:
        return PerturbationWitness(True, float(eps_f), True, float(delta), float(criterion))
    return PerturbationWitness(
        bool(eps_f < 0.25), float(eps_f), bool(criterion < 0.25), float(delta), float(criterion)
    )


@dataclass(frozen=True)
class K0Class:
    """Integer (scalar case) or integer vector (block case) K0 value."""

    value: object

    def __add__(self, other: "K0Class") -> "K0Class":
        return K0Class(np.asarray(self.value) + np.asarray(other.value))

    def __eq__(self, other) -> bool:
        if isinstance(other, K0Class):
            other = other.value
        return bool(np.all(np.asarray(self.value) == np.asarray(other)))

    def __hash__(self):
        return hash(repr(np.asarray(self.value)))


def projection_rank(p, *, tol: float = TRACE_TOL) -> int:
    """Rank of a numerically exact projection via trace rounding.

    Rejects traces further than tol from an integer; a large residue means
    an upstream computation failed and must surface, not be absorbed.
    """
    tr = float(np.real(np.trace(as_dense(p))))
    r = round(tr)
    if abs(tr - r) > tol:
        raise NonIntegralTrace(f"trace {tr} is {abs(tr - r):.3e} from an integer")
    return int(r)


def k0_from_pair(p, q) -> K0Class:
    """K0 class of the formal difference [p] - [q] of quasi-projections."""
    dp, dq = idempotent_defect(p), idempotent_defect(q)
    if dp >= 0.25 or dq >= 0.25:
        raise DefectTooLarge(f"defects ({dp:.4f}, {dq:.4f}) must be < 1/4")
    return K0Class(projection_rank(kappa0(p)) - projection_rank(kappa0(q)))

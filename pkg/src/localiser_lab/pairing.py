"""Asymptotic-morphism image of the suspension class.

Builds the operators e_t, e-check_t, f_t, Theta_t from a model and a scale
t, and verifies the quantitative commutator estimates that control them:
the c/s commutators, the resolvent-power commutator, the |D|^s-weighted
F_t commutator with its Gamma-function constant, and the decay of the
asymptotic families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import shift_analysis as sa
from .errors import NotUnitary
from .ktheory import QuasiIdempotent, QuasiProjection
from .operators import HermitianMatrix, operator_norm

#: Certified commutator constant for the bundled functions.
R_CERTIFIED = 2.0

#: Upper end of the admissible quasi-projection tolerance window,
#: (8/237)(sqrt(1393) - 34) ~ 0.1122.
EPS_STAR = (8.0 / 237.0) * (math.sqrt(1393.0) - 34.0)

DEFAULT_FUNCTION_TAG = "half-angle arctan pair"


@dataclass(frozen=True)
class LocaliserFunctions:
    """Complementary function pair with c^2 + s^2 = 1.

    c decreases from 1 at -inf to 0 at +inf, s increases from 0 to 1; the
    bundled default satisfies c(x) s(x) = (1/2)(1 + x^2)^(-1/2).
    """

    c: Callable[[np.ndarray], np.ndarray]
    s: Callable[[np.ndarray], np.ndarray]
    tag: str = "custom"

    @property
    def is_default(self) -> bool:
        return self.tag == DEFAULT_FUNCTION_TAG

    def validate(self) -> None:
        """Check the defining identities on a wide grid."""
        x = np.linspace(-1e4, 1e4, 10_000)
        c, s = np.asarray(self.c(x)), np.asarray(self.s(x))
        if np.max(np.abs(c**2 + s**2 - 1.0)) > 1e-14:
            raise ValueError("c^2 + s^2 = 1 fails on the validation grid")
        if np.any(np.diff(s) < -1e-15) or np.any(np.diff(c) > 1e-15):
            raise ValueError("monotonicity of c (down) / s (up) fails")
        if abs(float(self.s(np.array([1e8]))[0]) - 1.0) > 1e-7:
            raise ValueError("s(+inf) = 1 fails at x = 1e8")
        if abs(float(self.c(np.array([-1e8]))[0]) - 1.0) > 1e-7:
            raise ValueError("c(-inf) = 1 fails at x = -1e8")


def default_functions() -> LocaliserFunctions:
    """The function pair that reproduces the spectral localiser.

    c(x) = sqrt(1/2 - x (1+x^2)^(-1/2) / 2) and the complementary s; they
    are evaluated in half-angle form c = cos(u/2), s = sin(u/2) with
    u = pi/2 + arctan(x), which is the same function but stays accurate for
    |x| >> 1 where the subtractive form loses all digits.
    """
    return LocaliserFunctions(sa.sym_c, sa.sym_s, DEFAULT_FUNCTION_TAG)


@dataclass(frozen=True)
class AsymptoticFrame:
    """Diagonal functional-calculus data c(D/t), s(D/t), sqrt(c s)(D/t)."""

    t: float
    model: object
    funcs: LocaliserFunctions
    c_t: HermitianMatrix
    s_t: HermitianMatrix
    sqrt_cs_t: HermitianMatrix

    @property
    def cs_t(self) -> np.ndarray:
        return self.c_t.diagonal() * self.s_t.diagonal()


def build_frame(model, t: float, funcs: LocaliserFunctions | None = None) -> AsymptoticFrame:
    """Evaluate the frame functions on the model's Dirac eigenvalues."""
    if t < 1.0:
        raise ValueError(f"t must be >= 1, got {t}")
    funcs = funcs or default_functions()
    x = model.d_diag() / t
    c = np.asarray(funcs.c(x), dtype=float)
    s = np.asarray(funcs.s(x), dtype=float)
    sq = np.sqrt(c * s)
    frame = AsymptoticFrame(
        float(t),
        model,
        funcs,
        HermitianMatrix.from_diagonal(c),
        HermitianMatrix.from_diagonal(s),
        HermitianMatrix.from_diagonal(sq),
    )
    if np.max(sq) > math.sqrt(0.5) + 1e-12:
        raise ValueError("|sqrt(c s)| exceeds sqrt(2)/2")
    if funcs.is_default:
        target = 0.5 / np.hypot(1.0, x)
        if np.max(np.abs(c * s - target)) > 1e-12:
            raise ValueError("c s != (1/2)(1 + x^2)^(-1/2) for default functions")
    return frame


def interleave_doubled(a11, a12, a21, a22) -> np.ndarray:
    """Assemble a doubled-space operator in the interleaved ordering.

    State 2i is (copy1, mode i), state 2i+1 is (copy2, mode i), modes sorted
    ascending by Dirac eigenvalue.  This is the ordering every doubled
    matrix in the toolkit uses.
    """
    n = a11.shape[0]
    dtype = np.result_type(a11, a12, a21, a22)
    out = np.zeros((2 * n, 2 * n), dtype=dtype)
    out[0::2, 0::2] = a11
    out[0::2, 1::2] = a12
    out[1::2, 0::2] = a21
    out[1::2, 1::2] = a22
    return out


@dataclass(frozen=True)
class PairRepresentative:
    """The quadruple (e_t, e-check_t, f_t, Theta_t) on the doubled space."""

    e_t: QuasiProjection
    e_check_t: QuasiIdempotent
    f_t: np.ndarray
    theta_t: np.ndarray
    frame: AsymptoticFrame
    distance: float  # |e_t - e_check_t| of the assembled matrices
    certified_model: bool = True  # False for caller-supplied band unitaries

    @property
    def t(self) -> float:
        return self.frame.t

    @property
    def model(self):
        return self.frame.model


def build_pair(frame: AsymptoticFrame, v: np.ndarray | None = None) -> PairRepresentative:
    """Assemble e_t, e-check_t, f_t and Theta_t for a unitary v.

    v defaults to the model's band unitary.  Unitarity is certified on the
    model's interior modes (a truncated shift is only a partial isometry on
    its guard region); models without a guard are checked globally.
    """
    model = frame.model
    certified = v is None  # only the model's own unitary carries oracle ground truth
    if v is None:
        v = model.v_matrix()
    v = np.asarray(v)
    n = v.shape[0]
    if v.shape != (n, n) or n != frame.c_t.dim:
        raise NotUnitary(f"v has shape {v.shape}, expected ({frame.c_t.dim},) ** 2")
    mask = getattr(model, "interior_mask", lambda: np.ones(n, dtype=bool))()
    gram = v.conj().T @ v
    dev = operator_norm((gram - np.eye(n))[np.ix_(mask, mask)])
    if dev > 1e-10:
        raise NotUnitary(f"v fails unitarity on interior modes: {dev:.3e}")

    c = frame.c_t.diagonal()
    s = frame.s_t.diagonal()
    sq = frame.sqrt_cs_t.diagonal()
    cs = frame.cs_t

    sqv_sq = sq[:, None] * v * sq[None, :]
    e = interleave_doubled(np.diag(s**2), sqv_sq, sqv_sq.conj().T, np.diag(c**2))
    e_check = interleave_doubled(
        np.diag(s**2), cs[:, None] * v, cs[None, :] * v.conj().T, np.diag(c**2)
    )
    f = interleave_doubled(np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, n)), np.eye(n))
    theta = interleave_doubled(np.diag(c), np.diag(s), np.diag(-s), np.diag(c))

    return PairRepresentative(
        e_t=QuasiProjection.from_matrix(e),
        e_check_t=QuasiIdempotent.from_matrix(e_check),
        f_t=f,
        theta_t=theta,
        frame=frame,
        distance=operator_norm(e - e_check),
        certified_model=certified,
    )


def defect_bound(t: float, comm_norm: float, r: float = R_CERTIFIED) -> float:
    """Certified bound 2 R |[D, v]| / t on the e_t defect."""
    return 2.0 * r * comm_norm / t


def distance_bound(t: float, comm_norm: float, r: float = R_CERTIFIED) -> float:
    """Certified bound (sqrt(2)/2) R |[D, v]| / t on |e_t - e-check_t|."""
    return math.sqrt(0.5) * r * comm_norm / t


# ---------------------------------------------------------------------------
# quantitative commutator estimates


@dataclass(frozen=True)
class CommutatorReport:
    lhs_c: float
    lhs_s: float
    bound: float
    passed: bool


def commutator_bound_cs(model, t: float) -> CommutatorReport:
    """|[c_t, v]| and |[s_t, v]| against (1/2) |[D, v]| / t.

    The left-hand sides are exact suprema over the shift diagonal.
    """
    k = model.k
    lhs_c = sa.commutator_sup(sa.sym_c, t, k)
    lhs_s = sa.commutator_sup(sa.sym_s, t, k)
    bound = 0.5 * model.comm_norm / t
    return CommutatorReport(lhs_c, lhs_s, bound, lhs_c <= bound + 1e-12 and lhs_s <= bound + 1e-12)


@dataclass(frozen=True)
class BoundReport:
    lhs: float
    bound: float
    passed: bool


def commutator_bound_resolvent(model, t: float, s: float) -> BoundReport:
    """|[(1 + D^2/t^2)^(-s), v]| against 2 |[D, v]| / t, 0 < s <= 1."""
    if not 0.0 < s <= 1.0:
        raise ValueError(f"s must be in (0, 1], got {s}")
    lhs = sa.commutator_sup(lambda x: sa.sym_resolvent(x, s), t, model.k)
    bound = 2.0 * model.comm_norm / t
    return BoundReport(lhs, bound, lhs <= bound + 1e-12)


def C_s_constant(s: float) -> float:
    """The constant 1 + 2 sqrt(pi) Gamma((1-s)/2) / Gamma((2-s)/2).

    At s = 0 this evaluates to 1 + 2 pi.  math.gamma is accurate to a few
    ulp, far inside the 1e-12 relative requirement; the test suite
    cross-validates it against Euler's reflection formula.
    """
    if not 0.0 <= s < 1.0:
        raise ValueError(f"s must be in [0, 1), got {s}")
    return 1.0 + 2.0 * math.sqrt(math.pi) * math.gamma((1.0 - s) / 2.0) / math.gamma(
        (2.0 - s) / 2.0
    )


def weighted_F_commutator_bound(model, t: float, s: float) -> BoundReport:
    """| |D|^s [F_t, v] | against C_s t^(s-1) |[D, v]|, 0 <= s < 1."""
    lhs = sa.weighted_F_sup(t, model.k, s)
    bound = C_s_constant(s) * t ** (s - 1.0) * model.comm_norm
    return BoundReport(lhs, bound, lhs <= bound + 1e-10)


# ---------------------------------------------------------------------------
# asymptotic family distances (numerical decay experiment)


@dataclass(frozen=True)
class AsymptoticReport:
    """Pairwise distance table of the three asymptotic families.

    Family 1: f(w_t) P_1 a; family 2: f(w_t P_1) a - f(P_1) a;
    family 3: f(P_t) a, with w_t = (1 + D^2/t^2)^(-1), P_t = (1 + F_t)/2,
    a = v and generator f(x) = x (1 - x).  Only the 1-2 distance is driven
    to zero (the error-reduction limit); the 1-3 and 2-3 columns are
    recorded for trend analysis and pinned at 1/4 by the kernel mode of D.
    """

    t_grid: tuple
    d12: tuple
    d13: tuple
    d23: tuple
    d12_decreases: bool
    d13_decreases: bool
    d23_decreases: bool

    def rows(self):
        return [
            {"t": t, "d12": a, "d13": b, "d23": c}
            for t, a, b, c in zip(self.t_grid, self.d12, self.d13, self.d23)
        ]


def asymptotic_equivalence_report(model, t_grid: Sequence[float]) -> AsymptoticReport:
    """Distances between the three asymptotic families on the truncation.

    Each family is G_i(D) v for an explicit symbol G_i, so the distances
    are exact per-mode suprema |G_i - G_j| over the modes the shift
    reaches.  Decrease is asserted only between the first and last grid
    point, and only the 1-2 pair is expected to decay.
    """
    t_grid = [float(t) for t in t_grid]
    if len(t_grid) < 2 or any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ValueError("t_grid must be ascending with at least 2 points")
    k = model.k
    modes = model.modes()
    targets = modes[(modes - k >= modes[0]) & (modes - k <= modes[-1])].astype(float)

    def f(x):
        return x * (1.0 - x)

    p1 = 0.5 * (1.0 + sa.sym_F(targets))
    d12, d13, d23 = [], [], []
    for t in t_grid:
        w = 1.0 / (1.0 + (targets / t) ** 2)
        pt = 0.5 * (1.0 + sa.sym_F(targets / t))
        g1 = f(w) * p1
        g2 = f(w * p1) - f(p1)
        g3 = f(pt)
        d12.append(float(np.max(np.abs(g1 - g2))))
        d13.append(float(np.max(np.abs(g1 - g3))))
        d23.append(float(np.max(np.abs(g2 - g3))))
    return AsymptoticReport(
        tuple(t_grid),
        tuple(d12),
        tuple(d13),
        tuple(d23),
        d12[-1] < d12[0],
        d13[-1] < d13[0],
        d23[-1] < d23[0],
    )

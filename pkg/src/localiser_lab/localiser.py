"""Spectral truncation and the spectral localiser.

Builds L_{kappa,lambda} = compression of [[kappa D, v], [v*, -kappa D]]
onto the low spectral subspace of D + D, computes signatures through a
dense eigenvalue path or a banded LDL inertia path, certifies the
truncation hypotheses (off-diagonal smallness, reduction to the diagonal),
and exposes the threshold arithmetic of the certified regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import shift_analysis as sa
from .band_ldl import band_inf_norm, banded_inertia
from .errors import (
    BoundaryEigenvalue,
    DimensionMismatch,
    HypothesisViolated,
    OddSignature,
    SingularMatrix,
    TruncationTooSmall,
    WindowViolated,
)
from .ktheory import idempotent_defect
from .operators import (
    DENSE_LIMIT,
    GAP_TOL,
    HermitianMatrix,
    as_dense,
    compress,
    operator_norm,
)
from .pairing import PairRepresentative, R_CERTIFIED, interleave_doubled

#: Combined tolerance window of the certified regime: eps + delta < 1/400.
CERTIFICATION_WINDOW = 1.0 / 400.0


def snap_half_integer(x: float) -> float:
    """Smallest half-integer >= x (spectral thresholds must avoid Z)."""
    base = math.floor(x) + 0.5
    return base if base >= x else base + 1.0


@dataclass(frozen=True)
class SpectralDecomposition:
    """Index partition of the doubled space at threshold lam."""

    lam: float
    eigenvalues: np.ndarray  # of D + D, interleaved doubled ordering
    low: np.ndarray  # index array
    high: np.ndarray  # index array

    @property
    def low_dim(self) -> int:
        return len(self.low)


def spectral_decompose(model, lam: float, gap_tol: float = GAP_TOL) -> SpectralDecomposition:
    """Split the doubled space into |spec| <= lam and its complement."""
    lam = float(lam)
    if lam <= 0:
        raise ValueError("lam must be positive")
    dd = model.doubled_eigenvalues()
    dist = np.abs(np.abs(dd) - lam)
    i = int(np.argmin(dist))
    if dist[i] < gap_tol:
        raise BoundaryEigenvalue(float(dd[i]), float(dist[i]))
    low_mask = np.abs(dd) <= lam
    return SpectralDecomposition(
        lam, dd, np.where(low_mask)[0], np.where(~low_mask)[0]
    )


@dataclass(frozen=True)
class BlockDecomposition:
    """2x2 block data of an operator under a spectral decomposition.

    p acts on the low subspace, q on the high one, m maps low -> high; for
    self-adjoint input the fourth block is m*.
    """

    p: np.ndarray
    q: np.ndarray
    m: np.ndarray
    n: np.ndarray


def block_decompose(T, sd: SpectralDecomposition) -> BlockDecomposition:
    a = as_dense(T)
    if a.shape != (len(sd.eigenvalues),) * 2:
        raise DimensionMismatch(f"operator shape {a.shape} does not match the decomposition")
    p = compress(a, sd.low, sd.low)
    q = compress(a, sd.high, sd.high)
    m = compress(a, sd.high, sd.low)
    n = compress(a, sd.low, sd.high)
    # reassembly must reproduce the source exactly (pure index shuffling)
    back = np.zeros_like(a)
    back[np.ix_(sd.low, sd.low)] = p
    back[np.ix_(sd.high, sd.high)] = q
    back[np.ix_(sd.high, sd.low)] = m
    back[np.ix_(sd.low, sd.high)] = n
    if not np.array_equal(back, a):
        raise DimensionMismatch("block reassembly failed")
    return BlockDecomposition(p, q, m, n)


def offdiagonal_bound(t: float, lam: float) -> float:
    """Bound on |q^e - q^Theta q^f q^Theta*| for the bundled functions.

    The difference is the high compression of sqrt(cs)(v - 1)sqrt(cs), so
    its norm is at most |v - 1| <= 2 times the supremum of c s over
    |x| > lam/t, giving (1 + (lam/t)^2)^(-1/2).  For lam > t/delta this is
    below delta, which is what the truncation theorem consumes.
    """
    return (1.0 + (lam / t) ** 2) ** -0.5


@dataclass(frozen=True)
class OffdiagonalReport:
    lhs: float
    bound: float
    passed: bool


def offdiagonal_certificate(pair: PairRepresentative, sd: SpectralDecomposition) -> OffdiagonalReport:
    """Matrix-level check of the off-diagonal truncation estimate."""
    t = pair.t
    qe = block_decompose(pair.e_t.matrix, sd).q
    qf = block_decompose(pair.f_t, sd).q
    qth = block_decompose(pair.theta_t, sd).q
    lhs = operator_norm(qe - qth @ qf @ qth.conj().T)
    bound = offdiagonal_bound(t, sd.lam)
    return OffdiagonalReport(float(lhs), float(bound), bool(lhs <= bound + 1e-10))


def offdiagonal_certificate_exact(model, t: float, lam: float) -> OffdiagonalReport:
    """Scale-free certificate from the ideal shift-model suprema.

    The reported lhs is a rigorous upper bound (diagonal part plus shift
    part of the high compression), valid at any dimension.
    """
    bs = sa.block_stats(t, model.k, lam)
    bound = offdiagonal_bound(t, lam)
    return OffdiagonalReport(bs.offdiag_upper, float(bound), bool(bs.offdiag_upper <= bound + 1e-10))


@dataclass(frozen=True)
class DiagonalReductionReport:
    passed: bool
    p_defect: float
    m_norm: float
    window_ok: bool
    p_bound_ok: bool
    m_bound_ok: bool
    path_ok: bool


def _reduction_verdict(eps, eps_q, p_defect, m_norm, path_worst) -> DiagonalReductionReport:
    window_ok = eps_q < CERTIFICATION_WINDOW - eps
    p_ok = p_defect <= 2.0 * eps + eps_q + 1e-10
    m_ok = m_norm**2 <= eps + eps_q + 1e-10
    path_ok = path_worst < 0.25
    return DiagonalReductionReport(
        bool(window_ok and p_ok and m_ok and path_ok),
        float(p_defect),
        float(m_norm),
        bool(window_ok),
        bool(p_ok),
        bool(m_ok),
        bool(path_ok),
    )


def diagonal_reduction_check(
    e, sd: SpectralDecomposition, eps: float, eps_q: float
) -> DiagonalReductionReport:
    """Reduction-to-the-diagonal certificate for a quasi-projection e.

    Hypothesis: defect(e) < eps, defect(q-block) < eps_q and
    eps_q < 1/400 - eps.  Checks the conclusions p is a
    (2 eps + eps_q)-quasi-projection and |m|^2 <= eps + eps_q, and walks the
    straight-line path [[p, s m*], [s m, q]] on the 65-point s-grid.
    """
    a = as_dense(e)
    defect_e = idempotent_defect(a)
    if defect_e >= eps:
        raise HypothesisViolated(f"defect(e) = {defect_e:.3e} >= eps = {eps:.3e}")
    bd = block_decompose(a, sd)
    defect_q = idempotent_defect(bd.q)
    if defect_q >= eps_q:
        raise HypothesisViolated(f"defect(q) = {defect_q:.3e} >= eps_q = {eps_q:.3e}")
    if eps_q >= CERTIFICATION_WINDOW - eps:
        raise HypothesisViolated(
            f"window fails: eps_q = {eps_q:.3e} >= 1/400 - eps = {CERTIFICATION_WINDOW - eps:.3e}"
        )
    p_defect = idempotent_defect(bd.p)
    m_norm = operator_norm(bd.m)
    path_worst = 0.0
    nl = len(sd.low)
    for s in np.linspace(0.0, 1.0, 65):
        block = np.zeros_like(a)
        block[:nl, :nl] = bd.p
        block[nl:, nl:] = bd.q
        block[nl:, :nl] = s * bd.m
        block[:nl, nl:] = s * bd.m.conj().T
        path_worst = max(path_worst, idempotent_defect(block))
    return _reduction_verdict(eps, eps_q, p_defect, m_norm, path_worst)


def diagonal_reduction_check_exact(model, t: float, lam: float, eps: float) -> DiagonalReductionReport:
    """Scale-free reduction certificate from the ideal shift-model cells.

    eps_q is taken as the exact defect of the high block itself.
    """
    defect_e = sa.pair_defect(t, model.k)
    if defect_e >= eps:
        raise HypothesisViolated(f"ideal defect {defect_e:.3e} >= eps = {eps:.3e}")
    bs = sa.block_stats(t, model.k, lam)
    eps_q = np.nextafter(bs.q_defect, np.inf)
    if eps_q >= CERTIFICATION_WINDOW - eps:
        raise HypothesisViolated(
            f"window fails: eps_q = {eps_q:.3e} >= 1/400 - eps = {CERTIFICATION_WINDOW - eps:.3e}"
        )
    return _reduction_verdict(eps, eps_q, bs.p_defect, bs.m_norm, bs.path_worst_defect)


# ---------------------------------------------------------------------------
# the localiser itself


@dataclass(frozen=True)
class Localiser:
    """Truncated localiser matrix with its layout tag and gap certificate."""

    kappa: float
    lam: float
    matrix: HermitianMatrix
    gap: float | None = None

    @property
    def dim(self) -> int:
        return self.matrix.dim

    @property
    def layout(self) -> str:
        return self.matrix.layout


def build_localiser(model, kappa: float, lam: float, *, force_banded: bool = False) -> Localiser:
    """Compress [[kappa D, v], [v*, -kappa D]] onto the low subspace.

    Dense layout up to DENSE_LIMIT; shift models above that (or on request)
    are assembled directly in band storage, where the interleaved ordering
    (copy1, copy2 per mode, modes ascending) keeps the bandwidth at
    max(1, 2k - 1) for a shift by k > 0, within the 2|k| + 2 budget.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    lam = float(lam)
    lf = math.floor(lam)
    if getattr(model, "N", None) is not None and lf > model.N:
        raise TruncationTooSmall(f"lambda = {lam} exceeds the truncation radius N = {model.N}")
    # threshold must clear the spectrum of D + D
    dd_dist = np.min(np.abs(np.abs(model.d_diag()) - lam))
    if dd_dist < GAP_TOL:
        raise BoundaryEigenvalue(lam, float(dd_dist))

    low_dim = 2 * (2 * lf + 1)
    if low_dim <= DENSE_LIMIT and not force_banded:
        sd = spectral_decompose(model, lam)
        d = model.d_diag()
        v = model.v_matrix()
        full = interleave_doubled(
            kappa * np.diag(d), v, v.conj().T, -kappa * np.diag(d)
        )
        mat = HermitianMatrix.from_dense(compress(full, sd.low, sd.low))
        return Localiser(float(kappa), lam, mat)

    k = model.k
    modes = np.arange(-lf, lf + 1)
    mcount = len(modes)
    bw = 1 if k == 0 else (2 * k - 1 if k > 0 else 2 * abs(k) + 1)
    ab = np.zeros((bw + 1, 2 * mcount))
    ab[0, 0::2] = kappa * modes
    ab[0, 1::2] = -kappa * modes
    # v couples (copy2, m) -> (copy1, m + k): row 2(m+k+lf), col 2(m+lf)+1
    src = modes[(modes + k >= -lf) & (modes + k <= lf)]
    rows = 2 * (src + k + lf)
    cols = 2 * (src + lf) + 1
    if k >= 1:
        ab[rows - cols, cols] = 1.0  # lower triangle (row > col)
    else:
        ab[cols - rows, rows] = 1.0  # row < col: store the Hermitian mirror
    return Localiser(float(kappa), lam, HermitianMatrix.from_banded(ab, bw))


@dataclass(frozen=True)
class SignatureReport:
    sig: int
    n_pos: int
    n_neg: int
    gap: float
    path: str


def signature(h, zero_tol: float | None = None) -> SignatureReport:
    """Signature and inertia of an invertible Hermitian matrix.

    Dense path: eigenvalue counts with |eigenvalue| > zero_tol (default
    1e-8 |H|); any eigenvalue inside the window raises SingularMatrix and
    gap is the smallest |eigenvalue|.  Banded path: LDL inertia run at
    diagonal shifts +-zero_tol, whose agreement certifies the spectrum
    clears the window; gap reports the certified margin.
    """
    mat = h.matrix if isinstance(h, Localiser) else h
    if not isinstance(mat, HermitianMatrix):
        mat = HermitianMatrix.from_dense(as_dense(mat))
    if mat.layout == "banded" and mat.dim > DENSE_LIMIT:
        scale = band_inf_norm(mat.data, mat.bandwidth)
        tol = zero_tol if zero_tol is not None else 1e-8 * max(scale, 1e-300)
        n_pos, n_neg = banded_inertia(mat.data, mat.bandwidth, tol)
        if n_pos + n_neg != mat.dim:
            raise SingularMatrix("inertia does not account for full dimension")
        return SignatureReport(n_pos - n_neg, n_pos, n_neg, tol, "banded")
    w = np.linalg.eigvalsh(mat.to_dense())
    scale = float(np.max(np.abs(w))) if len(w) else 0.0
    tol = zero_tol if zero_tol is not None else 1e-8 * max(scale, 1e-300)
    gap = float(np.min(np.abs(w))) if len(w) else math.inf
    if gap <= tol:
        raise SingularMatrix(f"eigenvalue {gap:.3e} inside the zero window {tol:.3e}")
    n_pos = int(np.sum(w > tol))
    n_neg = int(np.sum(w < -tol))
    return SignatureReport(n_pos - n_neg, n_pos, n_neg, gap, "dense")


def signature_banded(h: HermitianMatrix, zero_tol: float) -> SignatureReport:
    """Force the banded LDL inertia path (cross-validation entry point)."""
    if h.layout != "banded":
        raise DimensionMismatch("signature_banded requires band storage")
    n_pos, n_neg = banded_inertia(h.data, h.bandwidth, zero_tol)
    if n_pos + n_neg != h.dim:
        raise SingularMatrix("inertia does not account for full dimension")
    return SignatureReport(n_pos - n_neg, n_pos, n_neg, zero_tol, "banded")


@dataclass(frozen=True)
class CongruenceReport:
    sig_2p_minus_1: int
    sig_localiser: int
    equal: bool
    residual: float
    tol: float


def congruence_check(
    pair: PairRepresentative, sd: SpectralDecomposition, loc: Localiser
) -> CongruenceReport:
    """Verify 2 p^e - 1 = S L S with S the truncated (1 + D^2/t^2)^(-1/4).

    Requires the localiser tuning kappa = 1/t of the pair's frame; the two
    signatures must then agree by Sylvester's law of inertia.
    """
    t = pair.t
    if abs(loc.kappa * t - 1.0) > 1e-12:
        raise DimensionMismatch(f"localiser kappa {loc.kappa} is not 1/t for t = {t}")
    p = block_decompose(pair.e_t.matrix, sd).p
    m2p = 2.0 * p - np.eye(p.shape[0])
    dd = sd.eigenvalues[sd.low]
    s_diag = (1.0 + (dd / t) ** 2) ** -0.25
    ldense = loc.matrix.to_dense()
    resid = operator_norm(m2p - s_diag[:, None] * ldense * s_diag[None, :])
    tol = 1e-9 * operator_norm(ldense)
    sig_m = signature(HermitianMatrix.from_dense(m2p)).sig
    sig_l = signature(loc).sig
    return CongruenceReport(sig_m, sig_l, sig_m == sig_l, float(resid), float(tol))


@dataclass(frozen=True)
class ThresholdReport:
    eps: float
    delta: float
    comm_norm: float
    R: float
    t_min: float
    lambda_min: float
    window_ok: bool


def thresholds(eps: float, delta: float, comm_norm: float, R: float = R_CERTIFIED) -> ThresholdReport:
    """Threshold arithmetic: t_min = 2 R |[D,v]| / eps, lambda_min = t_min / delta."""
    if eps <= 0 or delta <= 0:
        raise ValueError("eps and delta must be positive")
    t_min = 2.0 * R * comm_norm / eps
    return ThresholdReport(
        eps,
        delta,
        comm_norm,
        R,
        t_min,
        t_min / delta,
        eps + delta < CERTIFICATION_WINDOW,
    )


@dataclass(frozen=True)
class HalfSignatureResult:
    t: float
    lam: float
    lam_requested: float
    index: int
    sig: int
    gap: float
    dim: int
    layout: str
    window_ok: bool
    certified: bool
    certificates: tuple  # of (name, lhs, rhs, passed)


def half_signature_index(
    model,
    eps: float,
    delta: float,
    t: float | None = None,
    lam: float | None = None,
    *,
    certify: bool | None = None,
    zero_tol: float | None = None,
    force_banded: bool = False,
) -> HalfSignatureResult:
    """Half-signature of L_{1/t, lambda} with optional certification.

    Omitted t and lambda default to 1.01 times their thresholds.  lambda is
    snapped up to a half-integer (and the snap reported).  Certification
    evaluates the quantitative hypotheses through the exact shift-model
    suprema, so it runs unchanged at banded scales.
    """
    th = thresholds(eps, delta, model.comm_norm)
    is_shift = getattr(model, "k", None) is not None
    if certify is None:
        certify = th.window_ok and is_shift
    if certify and not th.window_ok:
        raise WindowViolated(
            f"eps + delta = {eps + delta:.6f} >= 1/400; certification unavailable"
        )
    if certify and not is_shift:
        raise HypothesisViolated("certification requires a shift model (exact suprema)")
    t = float(t) if t is not None else max(1.0, 1.01 * th.t_min)
    lam_requested = float(lam) if lam is not None else 1.01 * t / delta
    lam = snap_half_integer(lam_requested)

    loc = build_localiser(model, 1.0 / t, lam, force_banded=force_banded)
    certificates = []
    if certify:
        exact_defect = sa.pair_defect(t, model.k)
        off = offdiagonal_certificate_exact(model, t, lam)
        bs = sa.block_stats(t, model.k, lam)
        eps_q = np.nextafter(bs.q_defect, np.inf)
        red = _reduction_verdict(eps, eps_q, bs.p_defect, bs.m_norm, bs.path_worst_defect)
        certificates = [
            ("window_eps_plus_delta", eps + delta, CERTIFICATION_WINDOW, th.window_ok),
            ("t_above_threshold", th.t_min, t, t > th.t_min),
            ("lambda_above_threshold", t / delta, lam, lam > t / delta),
            ("pair_defect_below_eps", exact_defect, eps, exact_defect < eps),
            ("offdiagonal_bound", off.lhs, off.bound, off.passed),
            ("offdiagonal_below_delta", off.lhs, delta, off.lhs <= delta),
            ("reduction_window", eps_q, CERTIFICATION_WINDOW - eps, red.window_ok),
            ("p_defect_bound", red.p_defect, 2 * eps + eps_q + 1e-10, red.p_bound_ok),
            ("m_norm_bound", red.m_norm**2, eps + eps_q + 1e-10, red.m_bound_ok),
            ("path_quasi_projection", bs.path_worst_defect, 0.25, red.path_ok),
        ]
        if zero_tol is None:
            # spectrum of 2p - 1 clears (-2g, 2g); L is a congruence of it by
            # the inverse of a contraction, so the localiser gap is >= 2g
            g = math.sqrt(0.25 - min(red.p_defect, 0.2499))
            zero_tol = 1e-3 * 2.0 * g
    rep = signature(loc, zero_tol=zero_tol)
    if rep.sig % 2 != 0:
        raise OddSignature(f"signature {rep.sig} is odd")
    certified = bool(certify) and all(c[3] for c in certificates)
    return HalfSignatureResult(
        t=t,
        lam=lam,
        lam_requested=lam_requested,
        index=rep.sig // 2,
        sig=rep.sig,
        gap=rep.gap,
        dim=loc.dim,
        layout=loc.layout,
        window_ok=th.window_ok,
        certified=certified,
        certificates=tuple(certificates),
    )

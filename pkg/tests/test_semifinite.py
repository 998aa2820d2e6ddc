import numpy as np
import pytest

from localiser_lab import (
    WeightedTrace,
    block_model,
    circle_model,
    fredholm_index_oracle,
    half_signature_index,
    semifinite_half_signature,
    tau_rank,
    tau_signature,
    trace_transfer_check,
)
from localiser_lab.errors import DimensionMismatch, InvalidWeights

from conftest import random_hermitian


def _projection_of_rank(rng, n, r):
    q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return q @ q.T


def test_weighted_trace_validation():
    WeightedTrace((0.5, 0.25))
    with pytest.raises(InvalidWeights):
        WeightedTrace((0.5, 0.0))
    with pytest.raises(InvalidWeights):
        WeightedTrace(())
    with pytest.raises(DimensionMismatch):
        WeightedTrace((1.0,)).of_element([1.0, 2.0])


def test_tau_rank_examples(rng):
    trace = WeightedTrace((0.5, 0.25))
    zero = [np.zeros((6, 6)), np.zeros((4, 4))]
    assert tau_rank(zero, trace) == 0.0
    blocks = [_projection_of_rank(rng, 8, 2), _projection_of_rank(rng, 10, 4)]
    assert tau_rank(blocks, trace) == pytest.approx(0.5 * 2 + 0.25 * 4)
    single = WeightedTrace((1.0,))
    assert tau_rank([_projection_of_rank(rng, 7, 3)], single) == 3.0


def test_tau_signature_examples(rng):
    trace = WeightedTrace((0.5, 0.25))
    blocks = [np.eye(6), np.eye(4)]
    assert tau_signature(blocks, trace) == pytest.approx(0.5 * 6 + 0.25 * 4)
    # signatures (2, -2) with weights (1, 1) cancel
    even = WeightedTrace((1.0, 1.0))
    blocks = [np.diag([1.0, 1.0, 1.0, -1.0]), np.diag([-1.0, -1.0, -1.0, 1.0])]
    assert tau_signature(blocks, even) == 0.0
    # single block reduces to the integer signature
    h = random_hermitian(rng, 9) + 3 * np.eye(9)
    from localiser_lab import HermitianMatrix, signature

    assert tau_signature([h], WeightedTrace((1.0,))) == float(
        signature(HermitianMatrix.from_dense(h)).sig
    )


def test_semifinite_zero_windings():
    bm = block_model([0.5, 0.25], [0, 0], 64)
    res = semifinite_half_signature(bm, 0.1, 0.1, t=5.0, lam=20.5)
    assert res.tau_index == 0.0


def test_semifinite_single_block_reduces_to_scalar():
    bm = block_model([1.0], [1], 256)
    res = semifinite_half_signature(bm, 0.1, 0.1, t=20.0, lam=200.5)
    scalar = half_signature_index(circle_model(256, 1), 0.1, 0.1, t=20.0, lam=200.5)
    assert res.tau_index == float(scalar.index)
    assert res.per_block == (scalar.index,)


def test_semifinite_weighted_oracle_sum():
    bm = block_model([0.5, 0.25], [1, -2], 256)
    res = semifinite_half_signature(bm, 0.1, 0.1, t=20.0, lam=200.5)
    expected = 0.5 * fredholm_index_oracle(circle_model(64, 1)).index + 0.25 * (
        fredholm_index_oracle(circle_model(64, -2)).index
    )
    assert res.tau_index == pytest.approx(expected, abs=1e-12)


def test_trace_transfer_rank_one_rules(rng):
    bm = block_model([0.5, 0.25], [1, -2], 32)
    trace = WeightedTrace(bm.weights)
    dims = [2 * c.dim for c in bm.components]

    # unit vector in component j: transferred trace is w_j
    for j, w in enumerate(bm.weights):
        xi = [np.zeros(d, dtype=complex) for d in dims]
        xi[j][3] = 1.0
        blocks = [np.outer(a, np.conj(a)) for a in xi]
        assert trace.of_blocks(blocks) == pytest.approx(w, abs=1e-15)

    # vectors supported on distinct components are tau-orthogonal
    xi1 = [np.zeros(d, dtype=complex) for d in dims]
    xi2 = [np.zeros(d, dtype=complex) for d in dims]
    xi1[0][0] = 1.0
    xi2[1][0] = 1.0
    blocks = [np.outer(a, np.conj(b)) for a, b in zip(xi1, xi2)]
    assert trace.of_blocks(blocks) == 0.0


def test_trace_transfer_report():
    bm = block_model([0.5, 0.25], [1, -2], 32)
    rep = trace_transfer_check(bm)
    assert rep.passed
    assert rep.max_residual <= 1e-12
    # tau(P_lambda) is finite and equals the weighted low dimensions
    assert rep.p_lambda_trace > 0


def test_tau_hat_linearity_and_trace_property(rng):
    bm = block_model([0.7, 0.2, 0.1], [1, 0, -1], 16)
    trace = WeightedTrace(bm.weights)
    dims = [2 * c.dim for c in bm.components]

    def rand_blocks():
        return [
            (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / d
            for d in dims
        ]

    for _ in range(5):
        tb, sb = rand_blocks(), rand_blocks()
        alpha, beta = rng.standard_normal(2)
        lin = trace.of_blocks([alpha * a + beta * b for a, b in zip(tb, sb)])
        assert lin == pytest.approx(
            alpha * trace.of_blocks(tb) + beta * trace.of_blocks(sb), abs=1e-12
        )
        ts = trace.of_blocks([a @ b for a, b in zip(tb, sb)])
        st = trace.of_blocks([b @ a for a, b in zip(tb, sb)])
        assert ts == pytest.approx(st, abs=1e-10)

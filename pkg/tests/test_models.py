import numpy as np
import pytest

from localiser_lab import (
    block_model,
    circle_model,
    edge_guard,
    fredholm_index_oracle,
    operator_norm,
)
from localiser_lab.errors import (
    DimensionMismatch,
    InvalidWeights,
    RankDecisionAmbiguous,
    TruncationTooSmall,
)
from localiser_lab.models import fredholm_index_from_parts, model_from_descriptor


def test_circle_model_construction():
    m = circle_model(4, 0)
    assert np.array_equal(m.v_matrix(), np.eye(9))
    assert m.comm_norm == 0.0

    m = circle_model(4, 1)
    v = m.v_matrix()
    assert v.shape == (9, 9)
    expected = np.zeros((9, 9))
    expected[np.arange(1, 9), np.arange(8)] = 1.0  # lower shift
    assert np.array_equal(v, expected)
    assert m.comm_norm == 1.0

    assert circle_model(256, 3).comm_norm == 3.0
    with pytest.raises(TruncationTooSmall):
        circle_model(1, 2)


def test_commutator_norm_on_interior():
    for k in (1, 2, 3):
        m = circle_model(64, k)
        comm = m.commutator_matrix()
        inner = m.interior_mask()
        restricted = comm[np.ix_(inner, inner)]
        assert operator_norm(restricted) == pytest.approx(k, abs=1e-12)


@pytest.mark.parametrize("k", range(-3, 4))
def test_oracle_index_values(k):
    # brute-force ground truth: winding k pairs to index -k
    w = fredholm_index_oracle(circle_model(64, k))
    assert w.index == -k
    assert w.alt_index == w.index
    # kernel sits entirely on one side for a pure shift
    assert min(w.dim_ker, w.dim_coker) == 0
    assert w.sv_gap >= 1e-4


@pytest.mark.parametrize("k", range(-3, 4))
@pytest.mark.parametrize("N", [64, 128])
def test_oracle_truncation_stability(k, N):
    a = fredholm_index_oracle(circle_model(N, k)).index
    b = fredholm_index_oracle(circle_model(N + 16, k)).index
    assert a == b


def test_oracle_antisymmetry():
    for k in (1, 2, 3):
        assert (
            fredholm_index_oracle(circle_model(64, k)).index
            == -fredholm_index_oracle(circle_model(64, -k)).index
        )
    assert fredholm_index_oracle(circle_model(64, 0)).index == 0


def test_oracle_additivity_direct_sum():
    m1 = circle_model(64, 1)
    m2 = circle_model(64, -2)
    total = fredholm_index_from_parts(
        [m1.d_diag(), m2.d_diag()],
        [m1.v_matrix(), m2.v_matrix()],
        [np.abs(m1.modes()) > m1.N - 3, np.abs(m2.modes()) > m2.N - 4],
    )
    assert total == (
        fredholm_index_oracle(m1).index + fredholm_index_oracle(m2).index
    )


def test_oracle_guards():
    with pytest.raises(TruncationTooSmall):
        fredholm_index_oracle(circle_model(8, 2))
    with pytest.raises(RankDecisionAmbiguous):
        # absurd tolerances force singular values into the ambiguity window
        fredholm_index_oracle(circle_model(64, 1), sv_tol=0.5, gap_tol=10.0)


def test_edge_guard():
    assert edge_guard(256, 200.5, 1)
    assert not edge_guard(200, 200.5, 1)
    assert not edge_guard(2, 0.5, 2)


def test_block_model_construction():
    bm = block_model([1.0], [1], 64)
    assert bm.m == 1 and bm.windings == (1,)

    bm = block_model([0.5, 0.25], [1, -2], 128)
    assert bm.m == 2
    assert bm.components[1].k == -2

    with pytest.raises(InvalidWeights):
        block_model([0.5, -0.1], [1, 2], 64)
    with pytest.raises(DimensionMismatch):
        block_model([0.5], [1, 2], 64)


def test_descriptor_round_trip():
    m = circle_model(64, 2)
    assert model_from_descriptor(m.descriptor()) == m
    bm = block_model([0.5, 0.25], [1, -2], 64)
    assert model_from_descriptor(bm.descriptor()) == bm

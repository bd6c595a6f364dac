import itertools

import numpy as np
import pytest

from prodpolar.construction import FrozenSet, bhattacharyya_order, frozen_from_order
from prodpolar.decoders import (
    list_soft_output,
    sc_decode,
    sc_decode_batch,
    scl_decode,
    scl_decode_batch,
    soft_output_from_lists,
)
from prodpolar.polar_core import polar_encode


def exact_metric(x, y):
    """-log P(x | y) for independent bits with LLRs y."""
    return float(np.sum(np.log1p(np.exp(-(1.0 - 2.0 * x) * y))))


def codebook(F: FrozenSet):
    info = F.information
    out = []
    for bits in itertools.product((0, 1), repeat=len(info)):
        u = np.zeros(F.length, dtype=np.uint8)
        u[list(info)] = bits
        out.append((u, polar_encode(u)))
    return out


def awgn_llrs(x, snr_db, rate, rng):
    var = 1.0 / (2.0 * rate * 10 ** (snr_db / 10))
    y = 1.0 - 2.0 * x + np.sqrt(var) * rng.standard_normal(x.shape)
    return 2.0 * y / var


@pytest.fixture
def code_8_4():
    return frozen_from_order(bhattacharyya_order(8), 4)


def test_ml_equivalence_small(code_8_4, rng):
    book = codebook(code_8_4)
    for _ in range(300):
        u, x = book[rng.integers(len(book))]
        y = awgn_llrs(x, 2.0, 0.5, rng)
        best = min(book, key=lambda c: exact_metric(c[1], y))
        got = scl_decode(y, code_8_4, 16, exact=True)[0]
        assert np.array_equal(got.u_hat, best[0])


def test_exact_metric_is_negative_log_likelihood(rng):
    F = frozen_from_order(bhattacharyya_order(16), 8)
    y = rng.normal(1.0, 2.0, 16)
    for c in scl_decode(y, F, 8, exact=True):
        assert c.metric == pytest.approx(exact_metric(c.x_hat, y), rel=1e-10, abs=1e-10)


def test_full_list_returns_whole_codebook(rng):
    F = frozen_from_order(bhattacharyya_order(16), 4)
    y = rng.normal(0.5, 2.0, 16)
    cands = scl_decode(y, F, 16, exact=True)
    book = codebook(F)
    assert len(cands) == 16
    assert {c.u_hat.tobytes() for c in cands} == {u.tobytes() for u, _ in book}
    expect = sorted(exact_metric(x, y) for _, x in book)
    assert np.allclose([c.metric for c in cands], expect)


@pytest.mark.parametrize("exact", [False, True])
def test_list_of_one_is_sc(exact, rng):
    F = frozen_from_order(bhattacharyya_order(64), 40)
    for _ in range(50):
        y = rng.normal(1.0, 2.5, 64)
        sc = sc_decode(y, F, exact)
        (scl,) = scl_decode(y, F, 1, exact)
        assert np.array_equal(sc.u_hat, scl.u_hat)
        assert sc.metric == scl.metric


def test_candidates_sorted_distinct_and_valid(rng):
    F = frozen_from_order(bhattacharyya_order(32), 20)
    y = rng.normal(0.5, 2.0, 32)
    cands = scl_decode(y, F, 8)
    metrics = [c.metric for c in cands]
    assert len(cands) == 8
    assert metrics == sorted(metrics)
    assert len({c.u_hat.tobytes() for c in cands}) == 8
    for c in cands:
        assert not c.u_hat[F.mask].any()
        assert np.array_equal(c.x_hat, polar_encode(c.u_hat))


def test_small_information_set_keeps_all_paths():
    F = frozen_from_order(bhattacharyya_order(8), 2)
    assert len(scl_decode(np.ones(8), F, 8)) == 4


@pytest.mark.parametrize("L", [1, 4])
def test_noiseless_decoding(L, rng):
    F = frozen_from_order(bhattacharyya_order(128), 90)
    for _ in range(20):
        u = np.zeros(128, dtype=np.uint8)
        u[~F.mask] = rng.integers(0, 2, 90)
        y = 50.0 * (1.0 - 2.0 * polar_encode(u))
        assert np.array_equal(scl_decode(y, F, L)[0].u_hat, u)
        assert np.array_equal(sc_decode(y, F).u_hat, u)


def test_zero_llr_decides_zero():
    F = FrozenSet((), 4)
    assert sc_decode(np.zeros(4), F).u_hat.tolist() == [0, 0, 0, 0]


def test_rate_one_sign_flip_complements_decisions(rng):
    F = FrozenSet((), 32)
    y = rng.normal(0.0, 2.0, 32)
    a = sc_decode(y, F).x_hat
    b = sc_decode(-y, F).x_hat
    assert np.array_equal(a ^ 1, b)
    assert np.array_equal(a, (y < 0).astype(np.uint8))


def test_batches_match_single(rng):
    F = frozen_from_order(bhattacharyya_order(16), 10)
    llrs = rng.normal(1.0, 2.0, (6, 16))
    masks = np.tile(F.mask, (6, 1))
    u, pm = sc_decode_batch(llrs, masks)
    U, PM, counts = scl_decode_batch(llrs, masks, 4)
    for b in range(6):
        assert np.array_equal(u[b], sc_decode(llrs[b], F).u_hat)
        cands = scl_decode(llrs[b], F, 4)
        assert counts[b] == len(cands)
        for r, c in enumerate(cands):
            assert np.array_equal(U[b, r], c.u_hat)
            assert PM[b, r] == c.metric


def test_soft_output_rules(rng):
    F = frozen_from_order(bhattacharyya_order(32), 24)
    for _ in range(20):
        y = rng.normal(1.0, 1.5, 32)
        cands = scl_decode(y, F, 8)
        lam = list_soft_output(cands, 1e3)
        x = np.stack([c.x_hat for c in cands])
        m = np.array([c.metric for c in cands])
        best = cands[0]
        for i in range(32):
            ones, zeros = m[x[:, i] == 1], m[x[:, i] == 0]
            if ones.size and zeros.size:
                assert lam[i] == ones.min() - zeros.min()
                # one of the two terms is always the overall best metric
                assert min(ones.min(), zeros.min()) == m.min()
            else:
                assert abs(lam[i]) == 1e3
            # ties in the metric give a zero soft value
            if lam[i] != 0:
                assert (lam[i] < 0) == bool(best.x_hat[i])


def test_soft_output_unanimous_and_vectorised():
    x = np.array([[[0, 1, 1], [0, 1, 0]]], dtype=np.uint8)
    pm = np.array([[0.5, 2.0]])
    assert soft_output_from_lists(x, pm, 7.0)[0].tolist() == [7.0, -7.0, -1.5]
    # unused slots (infinite metric) are ignored
    pm = np.array([[0.5, np.inf]])
    assert soft_output_from_lists(x, pm, 7.0)[0].tolist() == [7.0, -7.0, -7.0]


def test_argument_checks(code_8_4):
    with pytest.raises(ValueError):
        scl_decode(np.zeros(8), code_8_4, 0)
    with pytest.raises(ValueError):
        sc_decode(np.zeros(4), code_8_4)
    with pytest.raises(ValueError):
        sc_decode(np.zeros(6), np.zeros(6, dtype=bool))
    with pytest.raises(ValueError):
        list_soft_output([], 1.0)
    with pytest.raises(ValueError):
        list_soft_output(scl_decode(np.ones(8), code_8_4, 2), 0.0)

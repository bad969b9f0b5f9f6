import numpy as np
import pytest

from caspi.diffkit import (
    ParamStore,
    SequenceEncoder,
    Tape,
    VocabularyError,
    pad_batch,
    sequence_encode,
)
from caspi.diffkit.kernels import (
    _build_numba_kernels,
    gru_scan_bwd_numpy,
    gru_scan_fwd_numpy,
)


def _encoder(seed=0, vocab=11, embed=4, hidden=3):
    store = ParamStore(seed=seed)
    return store, SequenceEncoder(store, "enc", vocab, embed, hidden)


def test_output_dimension_is_twice_hidden():
    _, enc = _encoder(hidden=5)
    assert enc.out_dim == 10


def test_single_token_uses_same_token_for_both_directions():
    store, enc = _encoder()
    out = sequence_encode(Tape(), enc, [[3]]).value[0]
    # one-step scan from h=0 in each direction over the same embedding row
    x = store.get("enc/emb")[3]
    for half, direction in ((out[:3], "fwd"), (out[3:], "bwd")):
        gx = x @ store.get(f"enc/{direction}/wx") + store.get(f"enc/{direction}/b")
        z = 1.0 / (1.0 + np.exp(-gx[3:6]))
        n = np.tanh(gx[6:])
        assert np.allclose(half, (1.0 - z) * n, atol=1e-15)


def test_deterministic_encoding():
    store, enc = _encoder(seed=4)
    ids, lens = pad_batch([[1, 2, 3, 4, 5]])
    a = sequence_encode(Tape(), enc, ids, lens).value
    b = sequence_encode(Tape(), enc, ids, lens).value
    assert np.array_equal(a, b)


def test_out_of_vocabulary_rejected():
    store, enc = _encoder(vocab=5)
    with pytest.raises(VocabularyError, match="token id 9"):
        sequence_encode(Tape(), enc, [[1, 9]])


def test_padding_does_not_change_encoding():
    store, enc = _encoder(seed=2)
    a = sequence_encode(Tape(), enc, np.array([[1, 2, 3]]), [3]).value
    padded = np.array([[1, 2, 3, 7, 8]])
    b = sequence_encode(Tape(), enc, padded, [3]).value
    assert np.allclose(a, b, atol=1e-15)


def test_batching_matches_single_rows():
    store, enc = _encoder(seed=8)
    rows = [[1, 2, 3, 4], [5, 6], [7, 8, 9]]
    ids, lens = pad_batch(rows)
    batch = sequence_encode(Tape(), enc, ids, lens).value
    for i, row in enumerate(rows):
        single = sequence_encode(Tape(), enc, [row]).value[0]
        assert np.allclose(batch[i], single, atol=1e-14)


def test_numba_and_numpy_kernels_agree():
    try:
        fwd_nb, bwd_nb = _build_numba_kernels()
    except ImportError:
        pytest.skip("numba unavailable")
    rng = np.random.default_rng(0)
    b, t, h = 5, 6, 4
    gx = rng.normal(size=(b, t, 3 * h))
    wh_rz = rng.normal(size=(h, 2 * h))
    wh_n = rng.normal(size=(h, h))
    lengths = np.array([6, 3, 1, 5, 2], dtype=np.int64)
    ref = gru_scan_fwd_numpy(gx, wh_rz, wh_n, lengths)
    got = fwd_nb(gx, wh_rz, wh_n, lengths)
    for r, g in zip(ref, got):
        assert np.allclose(r, g, atol=1e-14)
    dh = rng.normal(size=(b, h))
    args = (
        dh,
        gx,
        np.ascontiguousarray(wh_rz.T),
        np.ascontiguousarray(wh_n.T),
        lengths,
        *ref,
    )
    assert np.allclose(gru_scan_bwd_numpy(*args), bwd_nb(*args), atol=1e-14)


def test_empty_sequence_rejected():
    with pytest.raises(ValueError, match="empty"):
        pad_batch([[1, 2], []])

"""Neural layers over the tape: linear, embedding, bidirectional recurrent encoder."""

import numpy as np

from .tape import DiffkitError


class VocabularyError(DiffkitError):
    pass


class Linear:
    def __init__(self, store, name, d_in, d_out):
        self.store = store
        self.w_name = f"{name}/w"
        self.b_name = f"{name}/b"
        store.create(self.w_name, (d_in, d_out), fan_in=d_in)
        store.create(self.b_name, (d_out,), fan_in=d_in)

    def __call__(self, tape, x):
        w = tape.param(self.store, self.w_name)
        b = tape.param(self.store, self.b_name)
        return tape.add(tape.matmul(x, w), b)


class Embedding:
    def __init__(self, store, name, vocab_size, dim):
        self.store = store
        self.vocab_size = vocab_size
        self.name = f"{name}/emb"
        store.create(self.name, (vocab_size, dim), fan_in=dim)

    def __call__(self, tape, ids):
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= self.vocab_size):
            bad = ids[(ids < 0) | (ids >= self.vocab_size)][0]
            raise VocabularyError(
                f"token id {bad} outside closed vocabulary of size {self.vocab_size}"
            )
        return tape.gather(tape.param(self.store, self.name), ids)


class BiGRU:
    """Single-layer bidirectional gated recurrent encoder.

    Consumes an embedded batch (B, T, E) with lengths and yields the final
    states of both directions concatenated, shape (B, 2 * hidden).
    """

    def __init__(self, store, name, d_in, hidden):
        self.store = store
        self.hidden = hidden
        self.names = []
        for direction in ("fwd", "bwd"):
            prefix = f"{name}/{direction}"
            store.create(f"{prefix}/wx", (d_in, 3 * hidden), fan_in=d_in)
            store.create(f"{prefix}/wh_rz", (hidden, 2 * hidden), fan_in=hidden)
            store.create(f"{prefix}/wh_n", (hidden, hidden), fan_in=hidden)
            store.create(f"{prefix}/b", (3 * hidden,), fan_in=d_in)
            self.names += [
                f"{prefix}/wx",
                f"{prefix}/wh_rz",
                f"{prefix}/wh_n",
                f"{prefix}/b",
            ]

    def __call__(self, tape, x, lengths):
        params = [tape.param(self.store, n) for n in self.names]
        return tape.bigru(x, lengths, *params)


class SequenceEncoder:
    """Embedding plus BiGRU; the shared sequence encoder of both networks."""

    def __init__(self, store, name, vocab_size, embed_dim, hidden):
        self.embedding = Embedding(store, name, vocab_size, embed_dim)
        self.rnn = BiGRU(store, name, embed_dim, hidden)
        self.out_dim = 2 * hidden

    def __call__(self, tape, ids, lengths):
        return self.rnn(tape, self.embedding(tape, ids), lengths)


def sequence_encode(tape, encoder, token_ids, lengths=None):
    """Encode a batch of token id rows to fixed-size vectors.

    token_ids is (B, T) padded; lengths default to full rows. Every id must
    be inside the encoder's closed vocabulary.
    """
    ids = np.asarray(token_ids, dtype=np.int64)
    if ids.ndim == 1:
        ids = ids[None, :]
    if lengths is None:
        lengths = np.full(ids.shape[0], ids.shape[1], dtype=np.int64)
    return encoder(tape, ids, np.asarray(lengths, dtype=np.int64))


def pad_batch(sequences, pad_id=0):
    """Stack variable-length id lists into a padded (B, T) array plus lengths."""
    if not sequences:
        raise ValueError("empty batch")
    lengths = np.array([len(s) for s in sequences], dtype=np.int64)
    if lengths.min() < 1:
        raise ValueError("empty sequence in batch")
    out = np.full((len(sequences), int(lengths.max())), pad_id, dtype=np.int64)
    for i, seq in enumerate(sequences):
        out[i, : len(seq)] = seq
    return out, lengths


class MLP:
    """Feed-forward stack with tanh between layers, linear last layer."""

    def __init__(self, store, name, dims):
        self.layers = [
            Linear(store, f"{name}/l{i}", dims[i], dims[i + 1])
            for i in range(len(dims) - 1)
        ]

    def __call__(self, tape, x):
        for i, layer in enumerate(self.layers):
            x = layer(tape, x)
            if i < len(self.layers) - 1:
                x = tape.tanh(x)
        return x

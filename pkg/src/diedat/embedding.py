"""Vocabularies and skip-gram word embeddings.

Embeddings are trained with negative sampling on the raw (unmasked)
sentences and later serve as the trainable embedding layer of the
classifiers. The reserved tokens PREDICT (index 0) and UNK (index 1) never
occur in raw text, so their rows keep their random initialization until
classifier training updates them.
"""

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from diedat import kernels
from diedat.corpus import PREDICT_TOKEN, Document
from diedat.errors import ConfigError, ParseError, UndefinedSimilarityError
from diedat.tensor import make_rng

UNK_TOKEN = "UNK"
SPECIAL_TOKENS = (PREDICT_TOKEN, UNK_TOKEN)


@dataclass
class Vocab:
    tokens: list[str]
    index: dict[str, int] = field(repr=False)

    def __len__(self):
        return len(self.tokens)

    def lookup(self, token: str) -> int:
        """Index of token, or the UNK index for out-of-vocabulary tokens."""
        return self.index.get(token, 1)

    @classmethod
    def from_tokens(cls, tokens: list[str]) -> "Vocab":
        if tokens[:2] != list(SPECIAL_TOKENS):
            tokens = list(SPECIAL_TOKENS) + [t for t in tokens if t not in SPECIAL_TOKENS]
        return cls(tokens=tokens, index={t: i for i, t in enumerate(tokens)})


def _count_tokens(documents) -> Counter:
    counts: Counter = Counter()
    for doc in documents:
        for sent in doc.sentences:
            for tok in sent.tokens:
                counts[tok.surface] += 1
    return counts


def build_vocab(documents: list[Document], min_count: int = 1) -> Vocab:
    """Vocabulary of tokens with frequency >= min_count, plus the specials.

    Non-special entries are ordered by (frequency desc, token asc) so the
    result is stable across runs.
    """
    counts = _count_tokens(documents)
    for special in SPECIAL_TOKENS:
        counts.pop(special, None)
    kept = sorted((t for t, c in counts.items() if c >= min_count),
                  key=lambda t: (-counts[t], t))
    return Vocab.from_tokens(list(SPECIAL_TOKENS) + kept)


def build_vocab_from_windows(token_lists, min_count: int = 1) -> Vocab:
    """Same ordering rule, counting over sample windows instead of documents."""
    counts: Counter = Counter()
    for tokens in token_lists:
        counts.update(tokens)
    for special in SPECIAL_TOKENS:
        counts.pop(special, None)
    kept = sorted((t for t, c in counts.items() if c >= min_count),
                  key=lambda t: (-counts[t], t))
    return Vocab.from_tokens(list(SPECIAL_TOKENS) + kept)


@dataclass
class EmbeddingTable:
    vocab: Vocab
    dim: int
    vectors: np.ndarray  # [len(vocab), dim]
    trainable: bool = True


def pair_loss_grads(v: np.ndarray, u_pos: np.ndarray, U_neg: np.ndarray):
    """Loss and gradients of one negative-sampling pair.

    loss = -log sigmoid(v.u_pos) - sum_m log sigmoid(-v.U_neg[m]).
    Returns (loss, dv, du_pos, dU_neg). This is the reference the in-place
    kernel updates are tested against.
    """
    def sig(x):
        return 0.5 * (1.0 + np.tanh(0.5 * x))

    x_pos = float(v @ u_pos)
    loss = np.log1p(np.exp(-abs(x_pos))) + max(-x_pos, 0.0)
    g_pos = sig(x_pos) - 1.0
    dv = g_pos * u_pos
    du_pos = g_pos * v
    dU_neg = np.zeros_like(U_neg)
    for m in range(U_neg.shape[0]):
        x = float(v @ U_neg[m])
        loss += np.log1p(np.exp(-abs(x))) + max(x, 0.0)
        g = sig(x)
        dv = dv + g * U_neg[m]
        dU_neg[m] = g * v
    return loss, dv, du_pos, dU_neg


def _encode_sentences(documents, vocab: Vocab):
    """Vocabulary-index sequences; tokens outside the vocabulary are dropped."""
    encoded = []
    for doc in documents:
        for sent in doc.sentences:
            ids = [vocab.index[t.surface] for t in sent.tokens if t.surface in vocab.index]
            if len(ids) >= 2:
                encoded.append(np.asarray(ids, dtype=np.int64))
    return encoded


def _pair_count(n: int, window: int) -> int:
    return sum(min(n, i + window + 1) - max(0, i - window) - 1 for i in range(n))


def _sentence_pairs(ids: np.ndarray, window: int):
    """All (center, context) index pairs within the fixed window."""
    n = len(ids)
    centers = []
    contexts = []
    for i in range(n):
        lo = max(0, i - window)
        hi = min(n, i + window + 1)
        for j in range(lo, hi):
            if j != i:
                centers.append(ids[i])
                contexts.append(ids[j])
    return (np.asarray(centers, dtype=np.int64),
            np.asarray(contexts, dtype=np.int64))


def train_skipgram(documents: list[Document], dim: int, *, window: int = 5,
                   negatives: int = 5, epochs: int = 5, lr: float = 0.025,
                   min_lr_factor: float = 1e-4, seed: int = 0, min_count: int = 1,
                   vocab: Vocab | None = None,
                   loss_out: list | None = None) -> EmbeddingTable:
    """Skip-gram with negative sampling over the given documents.

    Negatives are drawn from the unigram^(3/4) distribution; the learning
    rate decays linearly to min_lr_factor of its initial value. Deterministic
    per seed. Per-epoch mean pair loss is appended to loss_out when given.
    """
    if dim <= 0 or window <= 0 or negatives <= 0 or epochs <= 0 or lr <= 0:
        raise ConfigError("dim, window, negatives, epochs and lr must all be positive")
    counts = _count_tokens(documents)
    if vocab is None:
        vocab = build_vocab(documents, min_count=min_count)
    rng = make_rng(seed)
    V = len(vocab)
    W_in = np.ascontiguousarray((rng.random((V, dim)) - 0.5) / dim)
    W_out = np.zeros((V, dim))

    sentences = _encode_sentences(documents, vocab)
    # noise distribution over tokens that actually occur
    noise_ids = np.asarray([i for i, t in enumerate(vocab.tokens) if counts.get(t, 0) > 0],
                           dtype=np.int64)
    if len(sentences) == 0 or len(noise_ids) == 0:
        return EmbeddingTable(vocab=vocab, dim=dim, vectors=W_in, trainable=True)
    weights = np.asarray([counts[vocab.tokens[i]] for i in noise_ids], dtype=np.float64)
    weights = weights ** 0.75
    cum = np.cumsum(weights / weights.sum())
    cum[-1] = 1.0

    pairs_per_epoch = sum(_pair_count(len(ids), window) for ids in sentences)
    total_pairs = max(1, epochs * pairs_per_epoch)

    step = 0
    for _ in range(epochs):
        epoch_loss = 0.0
        epoch_pairs = 0
        for ids in sentences:
            centers, contexts = _sentence_pairs(ids, window)
            n = len(centers)
            if n == 0:
                continue
            negs = noise_ids[np.searchsorted(cum, rng.random((n, negatives)), side="right")]
            # a negative equal to the positive context would contradict it
            if len(noise_ids) > 1:
                for _attempt in range(10):
                    clash = negs == contexts[:, None]
                    if not clash.any():
                        break
                    redraw = noise_ids[np.searchsorted(cum, rng.random(int(clash.sum())),
                                                       side="right")]
                    negs[clash] = redraw
            alpha = lr * max(1.0 - step / total_pairs, min_lr_factor)
            epoch_loss += kernels.sgns_step(W_in, W_out, centers, contexts,
                                            np.ascontiguousarray(negs), alpha)
            epoch_pairs += n
            step += n
        if loss_out is not None:
            loss_out.append(epoch_loss / max(epoch_pairs, 1))
    return EmbeddingTable(vocab=vocab, dim=dim, vectors=W_in, trainable=True)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise UndefinedSimilarityError("cosine similarity of a zero vector is undefined")
    return float(u @ v) / (nu * nv)


# ---------------------------------------------------------------------------
# word2vec text format


def save_word2vec(table: EmbeddingTable, path) -> None:
    """`<count> <dim>` header, then one `<token> <v1> ... <vdim>` row per entry."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table.vocab)} {table.dim}\n")
        for i, token in enumerate(table.vocab.tokens):
            values = " ".join(f"{x:.9g}" for x in table.vectors[i])
            fh.write(f"{token} {values}\n")


def load_word2vec(path) -> EmbeddingTable:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ParseError(f"{path}:1: header must be '<count> <dim>'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError as e:
            raise ParseError(f"{path}:1: header must be two integers") from e
        tokens = []
        rows = []
        for line_no, line in enumerate(fh, 2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise ParseError(
                    f"{path}:{line_no}: expected token plus {dim} values, got {len(parts) - 1}"
                )
            tokens.append(parts[0])
            rows.append([float(x) for x in parts[1:]])
    if len(tokens) != count:
        raise ParseError(f"{path}: header claims {count} rows, file has {len(tokens)}")
    vectors = np.asarray(rows, dtype=np.float64).reshape(len(tokens), dim)
    if tokens[:2] != list(SPECIAL_TOKENS):
        # foreign file: prepend the reserved rows with a deterministic init
        rng = make_rng(0)
        extra = (rng.random((2, dim)) - 0.5) / dim
        tokens = list(SPECIAL_TOKENS) + tokens
        vectors = np.vstack([extra, vectors])
    return EmbeddingTable(vocab=Vocab.from_tokens(tokens), dim=dim,
                          vectors=np.ascontiguousarray(vectors), trainable=True)


def save_vocab(vocab: Vocab, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for token in vocab.tokens:
            fh.write(token + "\n")


def load_vocab(path) -> Vocab:
    with open(path, encoding="utf-8") as fh:
        tokens = [line.rstrip("\n") for line in fh if line.rstrip("\n")]
    if tokens[:2] != list(SPECIAL_TOKENS):
        raise ParseError(f"{path}: vocabulary must start with {SPECIAL_TOKENS[0]} and {SPECIAL_TOKENS[1]}")
    return Vocab.from_tokens(tokens)

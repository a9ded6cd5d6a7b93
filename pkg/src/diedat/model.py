"""Classifier architectures, their backward passes, and checkpointing.

Four architectures share the same building blocks:

binary         embedding (dim 100) -> dropout 0.5 -> BiLSTM stack (default one
               layer, 32 units per direction) -> max-over-time pool ->
               dropout 0.5 -> linear -> softmax over {dat, die}.
mlt_bilstm     embedding (dim 200) -> two BiLSTM layers (inter-layer dropout
               0.2) -> maxpool -> two linear heads (die/dat and POS).
mlt_ffctx      mlt_bilstm plus a feedforward context encoder over the two
               tokens before and one token after the masked site; heads read
               the 128-dim concatenation of sentence and context vectors.
mlt_bilstmctx  same with a one-layer BiLSTM context encoder (dropout 0.2).

All parameters are float64 in memory and are exposed as an ordered
name -> array mapping; backward passes return gradients under the same
names, with dense zero rows for untouched embedding entries.
"""

import json
from pathlib import Path

import numpy as np

from diedat import kernels
from diedat.corpus import PREDICT_TOKEN
from diedat.embedding import (EmbeddingTable, Vocab, UNK_TOKEN, load_vocab,
                              save_vocab)
from diedat.errors import CheckpointError, ConfigError, ContractError
from diedat.tensor import dropout_mask, make_rng, sigmoid, softmax, uniform_init

ARCHITECTURES = ("binary", "mlt_bilstm", "mlt_ffctx", "mlt_bilstmctx")
CHECKPOINT_VERSION = 1

_GATE_NAMES = ("Wi", "Wf", "Wo", "Wg", "Ui", "Uf", "Uo", "Ug",
               "bi", "bf", "bo", "bg")


class LstmCellParams:
    """Weights of one LSTM direction: W* [h, d_in], U* [h, h], b* [h]."""

    __slots__ = _GATE_NAMES

    def __init__(self, **arrays):
        for name in _GATE_NAMES:
            setattr(self, name, arrays[name])

    @classmethod
    def init(cls, rng, d_in: int, h: int) -> "LstmCellParams":
        rw = 1.0 / np.sqrt(d_in)
        ru = 1.0 / np.sqrt(h)
        arrays = {}
        for g in "ifog":
            arrays[f"W{g}"] = uniform_init(rng, (h, d_in), rw)
            arrays[f"U{g}"] = uniform_init(rng, (h, h), ru)
            arrays[f"b{g}"] = np.zeros(h)
        return cls(**arrays)

    def arrays(self):
        return tuple(getattr(self, n) for n in _GATE_NAMES)

    def weight_arrays(self):
        return tuple(getattr(self, n) for n in _GATE_NAMES[:8])

    def named(self, prefix: str):
        for n in _GATE_NAMES:
            yield f"{prefix}.{n}", getattr(self, n)


class BiLstmLayer:
    """A forward and a backward LSTM cell over the same input."""

    def __init__(self, fwd: LstmCellParams, bwd: LstmCellParams, h: int):
        self.fwd = fwd
        self.bwd = bwd
        self.h = h

    @classmethod
    def init(cls, rng, d_in: int, h: int) -> "BiLstmLayer":
        return cls(LstmCellParams.init(rng, d_in, h), LstmCellParams.init(rng, d_in, h), h)

    def named(self, prefix: str):
        yield from self.fwd.named(f"{prefix}.fwd")
        yield from self.bwd.named(f"{prefix}.bwd")


def lstm_step(cell: LstmCellParams, x_t: np.ndarray, h_prev: np.ndarray,
              c_prev: np.ndarray):
    """One LSTM step; the per-step reference the sequence kernel is tested against."""
    h = cell.bi.shape[0]
    if x_t.shape != (cell.Wi.shape[1],) or h_prev.shape != (h,) or c_prev.shape != (h,):
        raise ContractError(
            f"lstm_step: shapes do not conform, x{x_t.shape} h_prev{h_prev.shape} "
            f"c_prev{c_prev.shape} for W{cell.Wi.shape}"
        )
    i = sigmoid(cell.Wi @ x_t + cell.Ui @ h_prev + cell.bi)
    f = sigmoid(cell.Wf @ x_t + cell.Uf @ h_prev + cell.bf)
    o = sigmoid(cell.Wo @ x_t + cell.Uo @ h_prev + cell.bo)
    g = np.tanh(cell.Wg @ x_t + cell.Ug @ h_prev + cell.bg)
    c_t = f * c_prev + i * g
    h_t = o * np.tanh(c_t)
    return h_t, c_t


def bilstm_forward(layer: BiLstmLayer, X: np.ndarray):
    """Concatenated [forward ; backward] hidden states, row per time step."""
    if X.ndim != 2 or X.shape[0] < 1:
        raise ContractError(f"bilstm_forward: need a non-empty [T, d] input, got {X.shape}")
    X = np.ascontiguousarray(X)
    f_outs = kernels.lstm_forward(X, *layer.fwd.arrays())
    Xr = np.ascontiguousarray(X[::-1])
    b_outs = kernels.lstm_forward(Xr, *layer.bwd.arrays())
    H = np.hstack([f_outs[0], b_outs[0][::-1]])
    return H, (X, Xr, f_outs, b_outs)


def bilstm_backward(layer: BiLstmLayer, cache, dH: np.ndarray):
    """Gradient w.r.t. the layer input plus per-cell parameter gradients."""
    X, Xr, f_outs, b_outs = cache
    h = layer.h
    dHf = np.ascontiguousarray(dH[:, :h])
    dHb = np.ascontiguousarray(dH[::-1, h:])
    rf = kernels.lstm_backward(dHf, X, *f_outs, *layer.fwd.weight_arrays())
    rb = kernels.lstm_backward(dHb, Xr, *b_outs, *layer.bwd.weight_arrays())
    dX = rf[0] + rb[0][::-1]
    grads = {}
    for name, g in zip(_GATE_NAMES, rf[1:]):
        grads[f"fwd.{name}"] = g
    for name, g in zip(_GATE_NAMES, rb[1:]):
        grads[f"bwd.{name}"] = g
    return dX, grads


def _softmax_backward(probs: np.ndarray, dprobs: np.ndarray) -> np.ndarray:
    return probs * (dprobs - float(probs @ dprobs))


def _maxpool_backward(H_shape, argmax_rows: np.ndarray, dpooled: np.ndarray) -> np.ndarray:
    dH = np.zeros(H_shape)
    dH[argmax_rows, np.arange(H_shape[1])] = dpooled
    return dH


def context_tokens(window_tokens: list[str]) -> list[str]:
    """The two tokens before and one token after the masked site, UNK-padded."""
    i = window_tokens.index(PREDICT_TOKEN)
    before = window_tokens[max(0, i - 2):i]
    before = [UNK_TOKEN] * (2 - len(before)) + before
    after = window_tokens[i + 1:i + 2] or [UNK_TOKEN]
    return before + after


class BinaryModel:
    """Die/dat classifier; `layers` adds stacked BiLSTMs for the depth ablation."""

    def __init__(self, vocab: Vocab, embedding: np.ndarray, layers: list[BiLstmLayer],
                 W_out: np.ndarray, b_out: np.ndarray, *, p_drop: float = 0.5,
                 p_inter: float = 0.0):
        self.vocab = vocab
        self.embedding = embedding
        self.layers = layers
        self.W_out = W_out
        self.b_out = b_out
        self.p_drop = p_drop
        self.p_inter = p_inter

    architecture = "binary"
    is_multitask = False

    @classmethod
    def build(cls, vocab: Vocab, *, rng, dim: int = 100, hidden: int = 32,
              layers: int = 1, embeddings: EmbeddingTable | None = None,
              p_drop: float = 0.5, p_inter: float = 0.0) -> "BinaryModel":
        vocab, E = _embedding_matrix(vocab, dim, rng, embeddings)
        stack = []
        d_in = dim
        for _ in range(layers):
            stack.append(BiLstmLayer.init(rng, d_in, hidden))
            d_in = 2 * hidden
        W_out = uniform_init(rng, (2, 2 * hidden), 1.0 / np.sqrt(2 * hidden))
        b_out = np.zeros(2)
        return cls(vocab, E, stack, W_out, b_out, p_drop=p_drop, p_inter=p_inter)

    @property
    def hidden(self) -> int:
        return self.layers[0].h

    @property
    def dim(self) -> int:
        return self.embedding.shape[1]

    def hyperparams(self) -> dict:
        return {
            "embedding_dim": self.dim,
            "hidden_size": self.hidden,
            "layers": len(self.layers),
            "dropout": self.p_drop,
            "interlayer_dropout": self.p_inter,
        }

    def params(self) -> dict:
        out = {"embedding": self.embedding}
        for li, layer in enumerate(self.layers):
            out.update(layer.named(f"sent{li}"))
        out["out.W"] = self.W_out
        out["out.b"] = self.b_out
        return out

    def forward(self, tokens: list[str], training: bool = False, rng=None):
        """Class distribution over (dat, die) plus the backward cache."""
        if not tokens:
            raise ContractError("forward: empty token window")
        idxs = np.asarray([self.vocab.lookup(t) for t in tokens], dtype=np.int64)
        X = self.embedding[idxs]
        emb_mask = None
        if training and self.p_drop > 0.0:
            emb_mask = dropout_mask(rng, X.shape, self.p_drop)
            X = X * emb_mask
        inter_masks = []
        layer_caches = []
        cur = X
        for li, layer in enumerate(self.layers):
            H, cache = bilstm_forward(layer, cur)
            layer_caches.append(cache)
            if li < len(self.layers) - 1:
                mask = None
                if training and self.p_inter > 0.0:
                    mask = dropout_mask(rng, H.shape, self.p_inter)
                    H = H * mask
                inter_masks.append(mask)
            cur = H
        argmax_rows = cur.argmax(axis=0)
        pooled = cur.max(axis=0)
        pool_mask = None
        if training and self.p_drop > 0.0:
            pool_mask = dropout_mask(rng, pooled.shape, self.p_drop)
            pooled = pooled * pool_mask
        probs = softmax(self.W_out @ pooled + self.b_out)
        cache = (idxs, emb_mask, layer_caches, inter_masks, cur.shape,
                 argmax_rows, pool_mask, pooled, probs)
        return probs, cache

    def backward(self, cache, dprobs: np.ndarray) -> dict:
        """Gradients for every named parameter given dLoss/dprobs."""
        (idxs, emb_mask, layer_caches, inter_masks, H_shape,
         argmax_rows, pool_mask, pooled, probs) = cache
        grads = {}
        dlogits = _softmax_backward(probs, dprobs)
        grads["out.W"] = np.outer(dlogits, pooled)
        grads["out.b"] = dlogits
        dpooled = self.W_out.T @ dlogits
        if pool_mask is not None:
            dpooled = dpooled * pool_mask
        dcur = _maxpool_backward(H_shape, argmax_rows, dpooled)
        for li in range(len(self.layers) - 1, -1, -1):
            dX, layer_grads = bilstm_backward(self.layers[li], layer_caches[li], dcur)
            for name, g in layer_grads.items():
                grads[f"sent{li}.{name}"] = g
            if li > 0:
                mask = inter_masks[li - 1]
                dcur = dX * mask if mask is not None else dX
        if emb_mask is not None:
            dX = dX * emb_mask
        dE = np.zeros_like(self.embedding)
        np.add.at(dE, idxs, dX)
        grads["embedding"] = dE
        return grads


class MultitaskModel:
    """Joint die/dat and POS classifier, optionally with a context encoder."""

    is_multitask = True

    def __init__(self, architecture: str, vocab: Vocab, embedding: np.ndarray,
                 sent_layers: list[BiLstmLayer], heads: dict, ctx=None, *,
                 p_inter: float = 0.2, p_ctx: float = 0.2):
        if architecture not in ("mlt_bilstm", "mlt_ffctx", "mlt_bilstmctx"):
            raise ConfigError(f"unknown multitask architecture {architecture!r}")
        self.architecture = architecture
        self.vocab = vocab
        self.embedding = embedding
        self.sent_layers = sent_layers
        self.W_dd, self.b_dd = heads["dd"]
        self.W_pos, self.b_pos = heads["pos"]
        self.ctx = ctx  # None | ("ff", W, b) | ("bilstm", BiLstmLayer)
        self.p_inter = p_inter
        self.p_ctx = p_ctx

    @classmethod
    def build(cls, architecture: str, vocab: Vocab, *, rng, dim: int = 200,
              hidden: int = 32, layers: int = 2,
              embeddings: EmbeddingTable | None = None,
              p_inter: float = 0.2, p_ctx: float = 0.2) -> "MultitaskModel":
        vocab, E = _embedding_matrix(vocab, dim, rng, embeddings)
        stack = []
        d_in = dim
        for _ in range(layers):
            stack.append(BiLstmLayer.init(rng, d_in, hidden))
            d_in = 2 * hidden
        sent_dim = 2 * hidden
        ctx = None
        if architecture == "mlt_ffctx":
            W = uniform_init(rng, (sent_dim, 3 * dim), 1.0 / np.sqrt(3 * dim))
            b = np.zeros(sent_dim)
            ctx = ("ff", W, b)
        elif architecture == "mlt_bilstmctx":
            ctx = ("bilstm", BiLstmLayer.init(rng, dim, hidden))
        head_dim = sent_dim if ctx is None else 2 * sent_dim
        heads = {
            "dd": (uniform_init(rng, (2, head_dim), 1.0 / np.sqrt(head_dim)), np.zeros(2)),
            "pos": (uniform_init(rng, (3, head_dim), 1.0 / np.sqrt(head_dim)), np.zeros(3)),
        }
        return cls(architecture, vocab, E, stack, heads, ctx,
                   p_inter=p_inter, p_ctx=p_ctx)

    @property
    def hidden(self) -> int:
        return self.sent_layers[0].h

    @property
    def dim(self) -> int:
        return self.embedding.shape[1]

    def hyperparams(self) -> dict:
        return {
            "embedding_dim": self.dim,
            "hidden_size": self.hidden,
            "layers": len(self.sent_layers),
            "interlayer_dropout": self.p_inter,
            "context_dropout": self.p_ctx,
        }

    def params(self) -> dict:
        out = {"embedding": self.embedding}
        for li, layer in enumerate(self.sent_layers):
            out.update(layer.named(f"sent{li}"))
        if self.ctx is not None and self.ctx[0] == "ff":
            out["ctx.W"] = self.ctx[1]
            out["ctx.b"] = self.ctx[2]
        elif self.ctx is not None:
            out.update(self.ctx[1].named("ctx"))
        out["head_dd.W"] = self.W_dd
        out["head_dd.b"] = self.b_dd
        out["head_pos.W"] = self.W_pos
        out["head_pos.b"] = self.b_pos
        return out

    def head_param_names(self, head: str) -> list[str]:
        return [f"head_{head}.W", f"head_{head}.b"]

    def trunk_param_names(self) -> list[str]:
        return [n for n in self.params() if not n.startswith("head_")]

    def forward(self, tokens: list[str], ctx_tokens: list[str] | None = None,
                training: bool = False, rng=None):
        """(die/dat distribution, POS distribution, cache).

        ctx_tokens defaults to the window's own immediate context; it is
        ignored entirely when the model has no context encoder.
        """
        if not tokens:
            raise ContractError("forward: empty token window")
        idxs = np.asarray([self.vocab.lookup(t) for t in tokens], dtype=np.int64)
        X = self.embedding[idxs]
        inter_masks = []
        layer_caches = []
        cur = X
        for li, layer in enumerate(self.sent_layers):
            H, cache = bilstm_forward(layer, cur)
            layer_caches.append(cache)
            if li < len(self.sent_layers) - 1:
                mask = None
                if training and self.p_inter > 0.0:
                    mask = dropout_mask(rng, H.shape, self.p_inter)
                    H = H * mask
                inter_masks.append(mask)
            cur = H
        argmax_rows = cur.argmax(axis=0)
        s = cur.max(axis=0)

        ctx_cache = None
        if self.ctx is None:
            z = s
        else:
            if ctx_tokens is None:
                ctx_tokens = context_tokens(tokens)
            ctx_idxs = np.asarray([self.vocab.lookup(t) for t in ctx_tokens],
                                  dtype=np.int64)
            C = self.embedding[ctx_idxs]
            if self.ctx[0] == "ff":
                flat = C.ravel()
                pre = self.ctx[1] @ flat + self.ctx[2]
                c = np.maximum(pre, 0.0)
                ctx_cache = ("ff", ctx_idxs, flat, pre)
            else:
                Hc, bcache = bilstm_forward(self.ctx[1], C)
                ctx_mask = None
                if training and self.p_ctx > 0.0:
                    ctx_mask = dropout_mask(rng, Hc.shape, self.p_ctx)
                    Hc = Hc * ctx_mask
                am_c = Hc.argmax(axis=0)
                c = Hc.max(axis=0)
                ctx_cache = ("bilstm", ctx_idxs, bcache, ctx_mask, Hc.shape, am_c)
            z = np.concatenate([s, c])
        p_dd = softmax(self.W_dd @ z + self.b_dd)
        p_pos = softmax(self.W_pos @ z + self.b_pos)
        cache = (idxs, layer_caches, inter_masks, cur.shape, argmax_rows, s,
                 ctx_cache, z, p_dd, p_pos)
        return p_dd, p_pos, cache

    def backward(self, cache, dp_dd: np.ndarray | None = None,
                 dp_pos: np.ndarray | None = None) -> dict:
        """Gradients for all parameters; omitted heads get exact zeros."""
        (idxs, layer_caches, inter_masks, H_shape, argmax_rows, s,
         ctx_cache, z, p_dd, p_pos) = cache
        grads = {}
        dz = np.zeros_like(z)
        if dp_dd is not None:
            dlog = _softmax_backward(p_dd, dp_dd)
            grads["head_dd.W"] = np.outer(dlog, z)
            grads["head_dd.b"] = dlog
            dz += self.W_dd.T @ dlog
        else:
            grads["head_dd.W"] = np.zeros_like(self.W_dd)
            grads["head_dd.b"] = np.zeros_like(self.b_dd)
        if dp_pos is not None:
            dlog = _softmax_backward(p_pos, dp_pos)
            grads["head_pos.W"] = np.outer(dlog, z)
            grads["head_pos.b"] = dlog
            dz += self.W_pos.T @ dlog
        else:
            grads["head_pos.W"] = np.zeros_like(self.W_pos)
            grads["head_pos.b"] = np.zeros_like(self.b_pos)

        dE = np.zeros_like(self.embedding)
        sent_dim = 2 * self.hidden
        ds = dz[:sent_dim]
        if self.ctx is not None:
            dc = dz[sent_dim:]
            kind = ctx_cache[0]
            if kind == "ff":
                _, ctx_idxs, flat, pre = ctx_cache
                dpre = dc * (pre > 0.0)
                grads["ctx.W"] = np.outer(dpre, flat)
                grads["ctx.b"] = dpre
                dC = (self.ctx[1].T @ dpre).reshape(-1, self.dim)
            else:
                _, ctx_idxs, bcache, ctx_mask, Hc_shape, am_c = ctx_cache
                dHc = _maxpool_backward(Hc_shape, am_c, dc)
                if ctx_mask is not None:
                    dHc = dHc * ctx_mask
                dC, layer_grads = bilstm_backward(self.ctx[1], bcache, dHc)
                for name, g in layer_grads.items():
                    grads[f"ctx.{name}"] = g
            np.add.at(dE, ctx_idxs, dC)

        dcur = _maxpool_backward(H_shape, argmax_rows, ds)
        for li in range(len(self.sent_layers) - 1, -1, -1):
            dX, layer_grads = bilstm_backward(self.sent_layers[li], layer_caches[li], dcur)
            for name, g in layer_grads.items():
                grads[f"sent{li}.{name}"] = g
            if li > 0:
                mask = inter_masks[li - 1]
                dcur = dX * mask if mask is not None else dX
        np.add.at(dE, idxs, dX)
        grads["embedding"] = dE
        return grads


def _embedding_matrix(vocab: Vocab | None, dim: int, rng,
                      embeddings: EmbeddingTable | None):
    if embeddings is not None:
        if vocab is not None and vocab.tokens != embeddings.vocab.tokens:
            raise ConfigError("embedding table vocabulary does not match the given vocabulary")
        if embeddings.dim != dim:
            raise ConfigError(
                f"embedding table has dim {embeddings.dim}, model expects {dim}")
        return embeddings.vocab, np.array(embeddings.vectors, dtype=np.float64)
    if vocab is None:
        raise ConfigError("either a vocabulary or an embedding table is required")
    return vocab, uniform_init(rng, (len(vocab), dim), 1.0 / np.sqrt(dim))


def build_model(architecture: str, vocab: Vocab | None, *, rng=None,
                dim: int | None = None, hidden: int = 32,
                layers: int | None = None,
                embeddings: EmbeddingTable | None = None, **kwargs):
    """Construct any of the four architectures with its defaults."""
    if rng is None:
        rng = make_rng(0)
    if architecture == "binary":
        return BinaryModel.build(vocab, rng=rng, dim=dim or 100, hidden=hidden,
                                 layers=layers or 1, embeddings=embeddings, **kwargs)
    if architecture in ("mlt_bilstm", "mlt_ffctx", "mlt_bilstmctx"):
        return MultitaskModel.build(architecture, vocab, rng=rng, dim=dim or 200,
                                    hidden=hidden, layers=layers or 2,
                                    embeddings=embeddings, **kwargs)
    raise ConfigError(f"unknown architecture {architecture!r}")


# ---------------------------------------------------------------------------
# checkpoints: manifest.json + weights.bin (row-major little-endian float32)
# + vocab.txt in one directory


def save_checkpoint(model, dirpath, extra_hyper: dict | None = None) -> None:
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    params = model.params()
    manifest = {
        "format_version": CHECKPOINT_VERSION,
        "architecture": model.architecture,
        "hyperparameters": {**model.hyperparams(), **(extra_hyper or {})},
        "tensors": [{"name": name, "shape": list(arr.shape)}
                    for name, arr in params.items()],
    }
    with open(dirpath / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(dirpath / "weights.bin", "wb") as fh:
        for arr in params.values():
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    save_vocab(model.vocab, dirpath / "vocab.txt")


def load_checkpoint(dirpath, expected_architecture: str | None = None):
    """Rebuild a model from a checkpoint directory.

    Returns (model, hyperparameters). Raises CheckpointError on version or
    architecture mismatches and on blobs that do not match the manifest.
    """
    dirpath = Path(dirpath)
    manifest_path = dirpath / "manifest.json"
    if not manifest_path.exists():
        raise CheckpointError(f"{dirpath}: no manifest.json")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    version = manifest.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"{dirpath}: checkpoint format version {version}, expected {CHECKPOINT_VERSION}")
    arch = manifest.get("architecture")
    if arch not in ARCHITECTURES:
        raise CheckpointError(f"{dirpath}: unknown architecture {arch!r}")
    if expected_architecture is not None and arch != expected_architecture:
        raise CheckpointError(
            f"{dirpath}: checkpoint architecture is {arch!r}, expected "
            f"{expected_architecture!r}")
    hyper = manifest.get("hyperparameters", {})
    vocab = load_vocab(dirpath / "vocab.txt")
    if arch == "binary":
        drops = {"p_drop": hyper.get("dropout", 0.5),
                 "p_inter": hyper.get("interlayer_dropout", 0.0)}
    else:
        drops = {"p_inter": hyper.get("interlayer_dropout", 0.2),
                 "p_ctx": hyper.get("context_dropout", 0.2)}
    model = build_model(arch, vocab, rng=make_rng(0),
                        dim=hyper.get("embedding_dim"),
                        hidden=hyper.get("hidden_size", 32),
                        layers=hyper.get("layers"), **drops)
    params = model.params()
    listed = [t["name"] for t in manifest["tensors"]]
    if set(listed) != set(params) or len(listed) != len(set(listed)):
        raise CheckpointError(f"{dirpath}: manifest tensor names do not match the architecture")
    blob = (dirpath / "weights.bin").read_bytes()
    offset = 0
    for entry in manifest["tensors"]:
        name = entry["name"]
        shape = tuple(entry["shape"])
        if params[name].shape != shape:
            raise CheckpointError(
                f"{dirpath}: tensor '{name}' has shape {shape}, model expects "
                f"{params[name].shape}")
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        need = count * 4
        if offset + need > len(blob):
            raise CheckpointError(f"{dirpath}: weights blob truncated at tensor '{name}'")
        values = np.frombuffer(blob, dtype="<f4", count=count, offset=offset)
        params[name][...] = values.reshape(shape).astype(np.float64)
        offset += need
    if offset != len(blob):
        raise CheckpointError(f"{dirpath}: weights blob has {len(blob) - offset} trailing bytes")
    return model, hyper

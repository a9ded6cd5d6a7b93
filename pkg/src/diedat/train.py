"""Losses, optimizers and the binary/multitask training loops.

The binary trainer minimizes binary cross-entropy with SGD + momentum
(lr 0.01, momentum 0.9, 24 epochs, batches of 128). The multitask trainer
runs two phases per batch: (a) BCE through the die/dat head and the shared
trunk, applied with SGD + momentum, then (b) a fresh forward pass and
cross-entropy through the POS head and the shared trunk, applied with Adam
(lr 0.0001, 35 epochs, batches of 512). Samples without a POS label skip
phase (b) and are counted. Probabilities are clamped to [eps, 1-eps] before
the log so both losses stay finite; inside the clamped region the loss is
constant, so its gradient there is exactly zero.

Model selection keeps the epoch with the best validation balanced accuracy
on the die/dat task.
"""

from dataclasses import dataclass, field, fields, replace

import numpy as np

from diedat import corpus, evaluation
from diedat.errors import ConfigError, ContractError, ParseError
from diedat.model import build_model
from diedat.tensor import make_rng

ARCH_DEFAULTS = {
    "binary": {"epochs": 24, "batch_size": 128, "embedding_dim": 100, "layers": 1},
    "mlt_bilstm": {"epochs": 35, "batch_size": 512, "embedding_dim": 200, "layers": 2},
    "mlt_ffctx": {"epochs": 35, "batch_size": 512, "embedding_dim": 200, "layers": 2},
    "mlt_bilstmctx": {"epochs": 35, "batch_size": 512, "embedding_dim": 200, "layers": 2},
}


@dataclass
class TrainConfig:
    architecture: str = "binary"
    train_path: str | None = None
    val_path: str | None = None
    embeddings_path: str | None = None
    window_mode: str = "windowed_no_boundaries"
    radius: int = 5
    batch_size: int | None = None  # None -> architecture default
    epochs: int | None = None
    embedding_dim: int | None = None
    hidden_size: int = 32
    layers: int | None = None
    sgd_lr: float = 0.01
    sgd_momentum: float = 0.9
    adam_lr: float = 0.0001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    prob_clamp_eps: float = 1e-7
    pos_enabled: bool = True
    min_count: int = 1
    threads: int = 1
    split_seed: int = 0
    shuffle_seed: int = 1
    init_seed: int = 2
    dropout_seed: int = 3

    def resolved(self) -> "TrainConfig":
        """Fill architecture defaults and validate."""
        if self.architecture not in ARCH_DEFAULTS:
            raise ConfigError(f"unknown architecture {self.architecture!r}")
        d = ARCH_DEFAULTS[self.architecture]
        cfg = replace(
            self,
            batch_size=self.batch_size if self.batch_size is not None else d["batch_size"],
            epochs=self.epochs if self.epochs is not None else d["epochs"],
            embedding_dim=(self.embedding_dim if self.embedding_dim is not None
                           else d["embedding_dim"]),
            layers=self.layers if self.layers is not None else d["layers"],
        )
        if cfg.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {cfg.batch_size}")
        if cfg.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {cfg.epochs}")
        for name in ("sgd_lr", "adam_lr", "adam_eps", "prob_clamp_eps"):
            if getattr(cfg, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if cfg.window_mode not in corpus.WINDOW_MODES:
            raise ConfigError(f"unknown window mode {cfg.window_mode!r}")
        return cfg


_BOOL_VALUES = {"true": True, "1": True, "yes": True,
                "false": False, "0": False, "no": False}


def parse_config_file(path) -> dict:
    """Flat key=value lines; '#' starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{line_no}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def config_from_mapping(values: dict, base: TrainConfig | None = None) -> TrainConfig:
    """Apply string key=value settings on top of a base config."""
    cfg = base if base is not None else TrainConfig()
    by_name = {f.name: f for f in fields(TrainConfig)}
    updates = {}
    for key, raw in values.items():
        if key not in by_name:
            raise ConfigError(f"unknown config key {key!r}")
        tname = str(by_name[key].type)
        try:
            if "bool" in tname:
                if raw.lower() not in _BOOL_VALUES:
                    raise ValueError(raw)
                updates[key] = _BOOL_VALUES[raw.lower()]
            elif "int" in tname:
                updates[key] = int(raw)
            elif "float" in tname:
                updates[key] = float(raw)
            else:
                updates[key] = raw
        except ValueError as e:
            raise ConfigError(f"config key {key!r} has invalid value {raw!r}") from e
    return replace(cfg, **updates)


# ---------------------------------------------------------------------------
# losses


def _clamp(p: np.ndarray, eps: float) -> np.ndarray:
    return np.clip(p, eps, 1.0 - eps)


def bce(p_die: np.ndarray, labels: np.ndarray, eps: float = 1e-7) -> float:
    """Mean binary cross-entropy of the die-class probabilities (label 1 = die)."""
    p_die = np.asarray(p_die, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if p_die.shape != labels.shape or p_die.size == 0:
        raise ContractError(f"bce: need matching non-empty arrays, got {p_die.shape} "
                            f"and {labels.shape}")
    p = _clamp(p_die, eps)
    return float(-np.mean(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p)))


def bce_grad(p_die: np.ndarray, labels: np.ndarray, eps: float = 1e-7) -> np.ndarray:
    """d(bce)/d(p_die); exactly zero where the clamp is active."""
    p_die = np.asarray(p_die, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    n = p_die.shape[0]
    p = _clamp(p_die, eps)
    grad = -(labels / p - (1.0 - labels) / (1.0 - p)) / n
    inside = (p_die > eps) & (p_die < 1.0 - eps)
    return np.where(inside, grad, 0.0)


def ce(probs: np.ndarray, labels: np.ndarray, eps: float = 1e-7) -> float:
    """Mean cross-entropy of class distributions probs[N, C] vs integer labels."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if probs.ndim != 2 or probs.shape[0] == 0 or labels.shape != (probs.shape[0],):
        raise ContractError(f"ce: need probs [N, C] and labels [N], got {probs.shape} "
                            f"and {labels.shape}")
    if labels.min() < 0 or labels.max() >= probs.shape[1]:
        raise ContractError(f"ce: label outside [0, {probs.shape[1]})")
    picked = _clamp(probs[np.arange(len(labels)), labels], eps)
    return float(-np.mean(np.log(picked)))


def ce_grad(probs: np.ndarray, labels: np.ndarray, eps: float = 1e-7) -> np.ndarray:
    """d(ce)/d(probs), nonzero only on each sample's correct-class entry."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n = probs.shape[0]
    grad = np.zeros_like(probs)
    rows = np.arange(n)
    picked = probs[rows, labels]
    clamped = _clamp(picked, eps)
    inside = (picked > eps) & (picked < 1.0 - eps)
    grad[rows, labels] = np.where(inside, -1.0 / (n * clamped), 0.0)
    return grad


# ---------------------------------------------------------------------------
# optimizers


class SgdMomentum:
    """v <- momentum * v + g; theta <- theta - lr * v."""

    def __init__(self, lr: float, momentum: float, param_names):
        self.lr = lr
        self.momentum = momentum
        self.param_names = list(param_names)
        self.velocity = {}

    def step(self, params: dict, grads: dict) -> None:
        for name in self.param_names:
            g = grads[name]
            v = self.velocity.get(name)
            if v is None:
                v = np.zeros_like(params[name])
                self.velocity[name] = v
            v *= self.momentum
            v += g
            params[name] -= self.lr * v


class Adam:
    """Bias-corrected Adam with one shared step counter."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8, param_names=()):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.param_names = list(param_names)
        self.m = {}
        self.v = {}
        self.t = 0

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for name in self.param_names:
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(params[name])
                self.v[name] = np.zeros_like(params[name])
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            m_hat = m / correction1
            v_hat = v / correction2
            params[name] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _accumulate(total: dict | None, grads: dict) -> dict:
    if total is None:
        return {k: v.copy() for k, v in grads.items()}
    for k, v in grads.items():
        total[k] += v
    return total


# ---------------------------------------------------------------------------
# histories


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_accuracy: float
    val_balanced_accuracy: float
    train_loss_pos: float | None = None
    pos_skipped: int | None = None


@dataclass
class TrainHistory:
    epochs: list[EpochStats] = field(default_factory=list)
    selected_epoch: int = -1


def write_history_tsv(history: TrainHistory, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch\ttrain_loss\ttrain_loss_pos\tpos_skipped\t"
                 "val_accuracy\tval_balanced_accuracy\tselected\n")
        for e in history.epochs:
            pos_loss = "-" if e.train_loss_pos is None else f"{e.train_loss_pos:.6f}"
            skipped = "-" if e.pos_skipped is None else str(e.pos_skipped)
            selected = "*" if e.epoch == history.selected_epoch else "-"
            fh.write(f"{e.epoch}\t{e.train_loss:.6f}\t{pos_loss}\t{skipped}\t"
                     f"{e.val_accuracy:.6f}\t{e.val_balanced_accuracy:.6f}\t{selected}\n")


def _validation_scores(model, val_samples):
    if not val_samples:
        return 0.0, 0.0
    report = evaluation.evaluate(model, val_samples, "diedat")["diedat"]
    return report.accuracy, report.balanced_accuracy


def _snapshot(params: dict) -> dict:
    return {k: v.copy() for k, v in params.items()}


def _restore(params: dict, snapshot: dict) -> None:
    for k, v in snapshot.items():
        params[k][...] = v


# ---------------------------------------------------------------------------
# training loops


def train_binary(config: TrainConfig, train_samples, val_samples,
                 vocab=None, embeddings=None):
    """Train the binary classifier; returns (model, history).

    The returned model carries the parameters of the epoch with the best
    validation balanced accuracy (earliest epoch on ties).
    """
    if config.embedding_dim is None and embeddings is not None:
        config = replace(config, embedding_dim=embeddings.dim)
    cfg = config.resolved()
    if not train_samples:
        raise ConfigError("training set is empty")
    model = build_model("binary", vocab, rng=make_rng(cfg.init_seed),
                        dim=cfg.embedding_dim, hidden=cfg.hidden_size,
                        layers=cfg.layers, embeddings=embeddings)
    params = model.params()
    opt = SgdMomentum(cfg.sgd_lr, cfg.sgd_momentum, params.keys())
    rng_drop = make_rng(cfg.dropout_seed)
    history = TrainHistory()
    best = (-1.0, None)
    for epoch in range(cfg.epochs):
        batch_losses = []
        for batch in corpus.batches(train_samples, cfg.batch_size, epoch, cfg.shuffle_seed):
            outs = [model.forward(s.window_tokens, training=True, rng=rng_drop)
                    for s in batch]
            p_die = np.asarray([probs[1] for probs, _ in outs])
            labels = np.asarray([s.target_label for s in batch])
            batch_losses.append(bce(p_die, labels, cfg.prob_clamp_eps))
            dp = bce_grad(p_die, labels, cfg.prob_clamp_eps)
            grads = None
            for (probs, cache), g in zip(outs, dp):
                grads = _accumulate(grads, model.backward(cache, np.asarray([0.0, g])))
            opt.step(params, grads)
        val_acc, val_bal = _validation_scores(model, val_samples)
        history.epochs.append(EpochStats(epoch, float(np.mean(batch_losses)),
                                         val_acc, val_bal))
        if val_bal > best[0]:
            best = (val_bal, _snapshot(params))
            history.selected_epoch = epoch
    if best[1] is not None:
        _restore(params, best[1])
    return model, history


def train_multitask(config: TrainConfig, train_samples, val_samples,
                    vocab=None, embeddings=None):
    """Train a multitask model with the two-phase batch scheme; see module doc."""
    if config.embedding_dim is None and embeddings is not None:
        config = replace(config, embedding_dim=embeddings.dim)
    cfg = config.resolved()
    if not train_samples:
        raise ConfigError("training set is empty")
    if cfg.architecture == "binary":
        raise ConfigError("train_multitask needs a multitask architecture")
    model = build_model(cfg.architecture, vocab, rng=make_rng(cfg.init_seed),
                        dim=cfg.embedding_dim, hidden=cfg.hidden_size,
                        layers=cfg.layers, embeddings=embeddings)
    params = model.params()
    trunk = model.trunk_param_names()
    sgd = SgdMomentum(cfg.sgd_lr, cfg.sgd_momentum,
                      trunk + model.head_param_names("dd"))
    adam = Adam(cfg.adam_lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps,
                trunk + model.head_param_names("pos"))
    rng_drop = make_rng(cfg.dropout_seed)
    history = TrainHistory()
    best = (-1.0, None)
    for epoch in range(cfg.epochs):
        dd_losses = []
        pos_losses = []
        pos_skipped = 0
        for batch in corpus.batches(train_samples, cfg.batch_size, epoch, cfg.shuffle_seed):
            # phase (a): die/dat head, BCE, SGD on trunk + dd head
            outs = [model.forward(s.window_tokens, training=True, rng=rng_drop)
                    for s in batch]
            p_die = np.asarray([p_dd[1] for p_dd, _, _ in outs])
            labels = np.asarray([s.target_label for s in batch])
            dd_losses.append(bce(p_die, labels, cfg.prob_clamp_eps))
            dp = bce_grad(p_die, labels, cfg.prob_clamp_eps)
            grads = None
            for (p_dd, _, cache), g in zip(outs, dp):
                grads = _accumulate(grads, model.backward(cache, dp_dd=np.asarray([0.0, g])))
            sgd.step(params, grads)
            # phase (b): POS head, CE, Adam on trunk + pos head, fresh forward
            pos_batch = [s for s in batch if s.pos_label is not None]
            pos_skipped += len(batch) - len(pos_batch)
            if not cfg.pos_enabled or not pos_batch:
                continue
            outs = [model.forward(s.window_tokens, training=True, rng=rng_drop)
                    for s in pos_batch]
            probs = np.asarray([p_pos for _, p_pos, _ in outs])
            pos_labels = np.asarray([s.pos_label for s in pos_batch])
            pos_losses.append(ce(probs, pos_labels, cfg.prob_clamp_eps))
            dP = ce_grad(probs, pos_labels, cfg.prob_clamp_eps)
            grads = None
            for (_, p_pos, cache), g in zip(outs, dP):
                grads = _accumulate(grads, model.backward(cache, dp_pos=g))
            adam.step(params, grads)
        val_acc, val_bal = _validation_scores(model, val_samples)
        history.epochs.append(EpochStats(
            epoch, float(np.mean(dd_losses)), val_acc, val_bal,
            train_loss_pos=float(np.mean(pos_losses)) if pos_losses else None,
            pos_skipped=pos_skipped))
        if val_bal > best[0]:
            best = (val_bal, _snapshot(params))
            history.selected_epoch = epoch
    if best[1] is not None:
        _restore(params, best[1])
    return model, history


def train(config: TrainConfig, train_samples, val_samples, vocab=None, embeddings=None):
    """Dispatch on the configured architecture."""
    if config.architecture == "binary":
        return train_binary(config, train_samples, val_samples, vocab, embeddings)
    return train_multitask(config, train_samples, val_samples, vocab, embeddings)

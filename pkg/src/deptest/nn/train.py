"""Adam training loop with validation split, early stopping and plateau LR decay."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import InvalidInputError
from ..features import FeatureSet
from ..seeding import child_rng
from .model import NetworkModel, batch_seed, bce, loss_and_grads, model_inputs, predict

IMPROVE_TOL = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-7
    batch_size: int = 128
    max_epochs: int = 50
    val_split: float = 0.2
    early_stop_patience: int = 3
    plateau_factor: float = 0.5
    plateau_patience: int = 2
    min_lr: float = 1e-6
    seed: int = 0
    restore_best: bool = True

    def __post_init__(self):
        if not (0.0 < self.val_split < 1.0):
            raise InvalidInputError(f"val_split must lie in (0, 1), got {self.val_split}")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise InvalidInputError("batch_size and max_epochs must be >= 1")
        if not (0.0 < self.plateau_factor < 1.0):
            raise InvalidInputError("plateau_factor must lie in (0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)


class Adam:
    """Adam with the bias correction folded into the step size.

    ``lr_t = lr * sqrt(1 - beta2^t) / (1 - beta1^t)`` and
    ``theta -= lr_t * m / (sqrt(v) + epsilon)``.
    """

    def __init__(self, params: dict[str, list[np.ndarray]], cfg: TrainConfig):
        self.cfg = cfg
        self.t = 0
        self.m = {k: [np.zeros_like(a) for a in v] for k, v in params.items()}
        self.v = {k: [np.zeros_like(a) for a in v] for k, v in params.items()}

    def step(self, params, grads, lr: float) -> None:
        c = self.cfg
        self.t += 1
        lr_t = lr * math.sqrt(1.0 - c.beta2**self.t) / (1.0 - c.beta1**self.t)
        for key, gs in grads.items():
            for i, g in enumerate(gs):
                m = self.m[key][i]
                v = self.v[key][i]
                m *= c.beta1
                m += (1.0 - c.beta1) * g
                v *= c.beta2
                v += (1.0 - c.beta2) * (g * g)
                params[key][i] -= lr_t * m / (np.sqrt(v) + c.epsilon)


@dataclass
class Metrics:
    auc: float
    accuracy: float
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    train_acc: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)
    lr: list[float] = field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0
    final: Metrics | None = None

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "final"}
        d["final"] = None if self.final is None else self.final.to_dict()
        return d


class PlateauSchedule:
    """Multiply the LR by ``factor`` after ``patience`` non-improving epochs, floored at ``min_lr``."""

    def __init__(self, lr: float, factor: float, patience: int, min_lr: float):
        self.lr = lr
        self.factor = factor
        self.patience = patience
        self.min_lr = min_lr
        self.best = math.inf
        self.wait = 0

    def update(self, val: float) -> float:
        if val < self.best - IMPROVE_TOL:
            self.best = val
            self.wait = 0
        else:
            self.wait += 1
            if self.wait >= self.patience:
                self.lr = max(self.lr * self.factor, self.min_lr)
                self.wait = 0
        return self.lr


def auc_score(scores: np.ndarray, labels: np.ndarray) -> float:
    """Area under the ROC curve via the Mann-Whitney statistic with midranks."""
    from scipy.stats import rankdata

    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    n1 = int(y.sum())
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        raise InvalidInputError("AUC needs both classes present")
    r = rankdata(s)  # average ranks for ties
    return float((r[y].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


def classification_metrics(scores: np.ndarray, labels: np.ndarray, threshold: float = 0.5) -> Metrics:
    y = np.asarray(labels).astype(bool)
    if y.size == 0:
        raise InvalidInputError("metrics need a nonempty dataset")
    pred = np.asarray(scores) >= threshold
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    fn = int(np.sum(~pred & y))
    acc = float(np.mean(pred == y))
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    try:
        auc = auc_score(scores, labels)
    except InvalidInputError:
        auc = float("nan")
    return Metrics(auc, acc, prec, rec, f1)


def evaluate(model: NetworkModel, fs: FeatureSet) -> Metrics:
    if fs.labels is None or len(fs) == 0:
        raise InvalidInputError("evaluation needs a nonempty labeled feature set")
    return classification_metrics(predict(model, fs), fs.labels)


def split_indices(n: int, val_split: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded global shuffle, then the last ``val_split`` fraction is the validation part."""
    perm = child_rng(seed, "split").permutation(n)
    n_val = int(round(n * val_split))
    return perm[: n - n_val], perm[n - n_val :]


def fit_standardizer(model: NetworkModel, fs: FeatureSet) -> None:
    """Fix the indicator standardization from the training part of the data."""
    if "indicators" not in model.branches:
        return
    x = fs.indicators
    shift = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0] = 1.0
    model.input_shift = shift
    model.input_scale = scale


def train(model: NetworkModel, fs: FeatureSet, cfg: TrainConfig = TrainConfig()) -> tuple[NetworkModel, TrainHistory]:
    """Train a copy of ``model`` on ``fs`` and return it with its history."""
    if fs.labels is None:
        raise InvalidInputError("training needs labels")
    need = math.ceil(cfg.batch_size / (1.0 - cfg.val_split))
    if len(fs) < need:
        raise InvalidInputError(f"training needs at least {need} samples, got {len(fs)}")
    model = model.copy()
    tr_idx, va_idx = split_indices(len(fs), cfg.val_split, cfg.seed)
    tr, va = fs.subset(tr_idx), fs.subset(va_idx)
    fit_standardizer(model, tr)
    x_tr = model_inputs(model, tr)
    y_tr = tr.labels.astype(np.float64)
    opt = Adam(model.params, cfg)
    sched = PlateauSchedule(cfg.lr, cfg.plateau_factor, cfg.plateau_patience, cfg.min_lr)
    hist = TrainHistory()
    best_val, wait = math.inf, 0
    best_params = None
    lr = cfg.lr
    for epoch in range(cfg.max_epochs):
        order = child_rng(cfg.seed, f"epoch/{epoch}").permutation(len(tr))
        for b, start in enumerate(range(0, len(tr), cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            batch = {k: v[idx] for k, v in x_tr.items()}
            _, grads = loss_and_grads(model, batch, y_tr[idx], batch_seed(cfg.seed, epoch, b))
            opt.step(model.params, grads, lr)
        s_tr = predict(model, tr)
        s_va = predict(model, va)
        val = bce(s_va, va.labels)
        hist.train_loss.append(bce(s_tr, tr.labels))
        hist.val_loss.append(val)
        hist.train_acc.append(float(np.mean((s_tr >= 0.5) == tr.labels.astype(bool))))
        hist.val_acc.append(float(np.mean((s_va >= 0.5) == va.labels.astype(bool))))
        hist.lr.append(lr)
        hist.stopped_epoch = epoch + 1
        if val < best_val - IMPROVE_TOL:
            best_val, wait = val, 0
            hist.best_epoch = epoch + 1
            best_params = {k: [a.copy() for a in v] for k, v in model.params.items()}
        else:
            wait += 1
            if wait >= cfg.early_stop_patience:
                break
        lr = sched.update(val)
    if cfg.restore_best and best_params is not None:
        model.params = best_params
    model.meta = dict(model.meta, train_config=cfg.to_dict(), train_seed=int(cfg.seed))
    hist.final = evaluate(model, va)
    return model, hist

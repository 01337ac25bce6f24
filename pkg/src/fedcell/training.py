"""Local trainers and server-side aggregation.

Both trainers (multinomial logistic regression and a one-hidden-layer MLP)
operate on a flat parameter vector so clients and server exchange a single
array. Gradients are analytic; Adam state is rebuilt for every local
training call (clients keep no optimizer state between rounds).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset

TRAINER_KINDS = ("logistic_regression", "mlp_1hidden")


@dataclass
class ModelParams:
    """Flat vector of learnable parameters."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError("parameter vector must be one-dimensional")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("parameter vector contains non-finite entries")

    def copy(self) -> "ModelParams":
        return ModelParams(self.values.copy())

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class TrainerSpec:
    """Architecture choice plus the local optimization settings."""

    kind: str = "logistic_regression"
    hidden_units: int = 128
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    local_epochs: int = 5
    batch_size: int = 32

    def __post_init__(self):
        if self.kind not in TRAINER_KINDS:
            raise ValueError(f"unknown trainer kind {self.kind!r}; expected one of {TRAINER_KINDS}")
        if self.hidden_units < 1:
            raise ValueError("hidden_units must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.local_epochs < 1 or self.batch_size < 1:
            raise ValueError("local_epochs and batch_size must be >= 1")


def _log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _softmax(z: np.ndarray) -> np.ndarray:
    return np.exp(_log_softmax(z))


class LogisticRegressionModel:
    """Softmax regression: logits = X W + b."""

    def __init__(self, n_features: int, n_classes: int):
        self.n_features = n_features
        self.n_classes = n_classes

    @property
    def n_params(self) -> int:
        return self.n_features * self.n_classes + self.n_classes

    def _unpack(self, values: np.ndarray):
        d, c = self.n_features, self.n_classes
        w = values[: d * c].reshape(d, c)
        b = values[d * c :]
        return w, b

    def init_params(self, rng: np.random.Generator) -> ModelParams:
        s = 1.0 / np.sqrt(self.n_features)
        return ModelParams(rng.uniform(-s, s, size=self.n_params))

    def logits(self, values: np.ndarray, x: np.ndarray) -> np.ndarray:
        w, b = self._unpack(values)
        return x @ w + b

    def loss(self, values: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
        log_p = _log_softmax(self.logits(values, x))
        return float(-log_p[np.arange(len(y)), y].mean())

    def loss_and_grad(self, values: np.ndarray, x: np.ndarray, y: np.ndarray):
        log_p = _log_softmax(self.logits(values, x))
        loss = float(-log_p[np.arange(len(y)), y].mean())
        g = np.exp(log_p)
        g[np.arange(len(y)), y] -= 1.0
        g /= len(y)
        grad = np.concatenate([(x.T @ g).ravel(), g.sum(axis=0)])
        return loss, grad


class OneHiddenMlpModel:
    """One ReLU hidden layer: logits = relu(X W1 + b1) W2 + b2."""

    def __init__(self, n_features: int, n_classes: int, hidden_units: int):
        self.n_features = n_features
        self.n_classes = n_classes
        self.hidden_units = hidden_units

    @property
    def n_params(self) -> int:
        d, h, c = self.n_features, self.hidden_units, self.n_classes
        return d * h + h + h * c + c

    def _unpack(self, values: np.ndarray):
        d, h, c = self.n_features, self.hidden_units, self.n_classes
        o = 0
        w1 = values[o : o + d * h].reshape(d, h)
        o += d * h
        b1 = values[o : o + h]
        o += h
        w2 = values[o : o + h * c].reshape(h, c)
        o += h * c
        b2 = values[o : o + c]
        return w1, b1, w2, b2

    def init_params(self, rng: np.random.Generator) -> ModelParams:
        d, h, c = self.n_features, self.hidden_units, self.n_classes
        s1 = 1.0 / np.sqrt(d)
        s2 = 1.0 / np.sqrt(h)
        parts = [
            rng.uniform(-s1, s1, size=d * h + h),
            rng.uniform(-s2, s2, size=h * c + c),
        ]
        return ModelParams(np.concatenate(parts))

    def logits(self, values: np.ndarray, x: np.ndarray) -> np.ndarray:
        w1, b1, w2, b2 = self._unpack(values)
        hidden = np.maximum(x @ w1 + b1, 0.0)
        return hidden @ w2 + b2

    def loss(self, values: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
        log_p = _log_softmax(self.logits(values, x))
        return float(-log_p[np.arange(len(y)), y].mean())

    def loss_and_grad(self, values: np.ndarray, x: np.ndarray, y: np.ndarray):
        w1, b1, w2, b2 = self._unpack(values)
        pre = x @ w1 + b1
        hidden = np.maximum(pre, 0.0)
        log_p = _log_softmax(hidden @ w2 + b2)
        loss = float(-log_p[np.arange(len(y)), y].mean())

        g = np.exp(log_p)
        g[np.arange(len(y)), y] -= 1.0
        g /= len(y)
        d_hidden = (g @ w2.T) * (pre > 0.0)
        grad = np.concatenate(
            [
                (x.T @ d_hidden).ravel(),
                d_hidden.sum(axis=0),
                (hidden.T @ g).ravel(),
                g.sum(axis=0),
            ]
        )
        return loss, grad


def make_model(spec: TrainerSpec, n_features: int, n_classes: int):
    if spec.kind == "logistic_regression":
        return LogisticRegressionModel(n_features, n_classes)
    return OneHiddenMlpModel(n_features, n_classes, spec.hidden_units)


def train_local(
    params: ModelParams, shard: Dataset, spec: TrainerSpec, rng: np.random.Generator
) -> ModelParams:
    """Run local_epochs of mini-batch Adam on the shard; returns new params.

    The input parameter vector is left unmodified. Batch order comes from
    one seeded shuffle per epoch; the trailing partial batch is kept.
    """
    if len(shard) == 0:
        raise ValueError("cannot train on an empty shard")
    model = make_model(spec, shard.n_features, shard.n_classes)
    if len(params) != model.n_params:
        raise ValueError(f"expected {model.n_params} parameters, got {len(params)}")

    values = params.values.copy()
    m = np.zeros_like(values)
    v = np.zeros_like(values)
    # scratch buffers keep the hot loop free of per-batch allocations
    s1 = np.empty_like(values)
    s2 = np.empty_like(values)
    t = 0
    for _ in range(spec.local_epochs):
        order = rng.permutation(len(shard))
        for start in range(0, len(shard), spec.batch_size):
            batch = order[start : start + spec.batch_size]
            _, grad = model.loss_and_grad(values, shard.features[batch], shard.labels[batch])
            t += 1
            # m = beta1*m + (1-beta1)*grad
            np.multiply(m, spec.beta1, out=m)
            np.multiply(grad, 1.0 - spec.beta1, out=s1)
            np.add(m, s1, out=m)
            # v = beta2*v + ((1-beta2)*grad)*grad
            np.multiply(v, spec.beta2, out=v)
            np.multiply(grad, 1.0 - spec.beta2, out=s1)
            np.multiply(s1, grad, out=s1)
            np.add(v, s1, out=v)
            # values -= lr*m_hat / (sqrt(v_hat) + eps)
            np.divide(m, 1.0 - spec.beta1**t, out=s1)
            np.divide(v, 1.0 - spec.beta2**t, out=s2)
            np.sqrt(s2, out=s2)
            np.add(s2, spec.adam_eps, out=s2)
            np.multiply(s1, spec.learning_rate, out=s1)
            np.divide(s1, s2, out=s1)
            np.subtract(values, s1, out=values)
    return ModelParams(values)


def fedavg(updates: list[tuple[ModelParams, float]]) -> ModelParams:
    """Sample-count-weighted element-wise mean of client parameter vectors."""
    if not updates:
        raise ValueError("fedavg needs at least one update")
    length = len(updates[0][0])
    total = 0.0
    for p, w in updates:
        if len(p) != length:
            raise ValueError(f"update length {len(p)} does not match {length}")
        if w <= 0:
            raise ValueError(f"update weight must be positive, got {w}")
        total += w
    out = np.zeros(length, dtype=np.float64)
    for p, w in updates:
        out += w * p.values
    return ModelParams(out / total)


def predict(model, values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Argmax class prediction."""
    return model.logits(values, x).argmax(axis=1)

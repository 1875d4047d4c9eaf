"""Classifiers and optimization primitives.

Float64 throughout so finite-difference gradient checks are meaningful.
Two model families share the catalog-ordered output convention:

* MlpClassifier: multi-label head, optional hidden ReLU layer with inverted
  dropout, sigmoid outputs, trained with BCE + AdamW.
* LogisticEnsemble: one-vs-rest L2-regularized logistic regression, one
  binary head per requirement, full-batch gradient descent with backtracking
  line search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, NumericalError, ShapeError

EPS = 1e-12


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def bce_loss(y_hat: np.ndarray, y: np.ndarray) -> float:
    """Mean binary cross-entropy over labels (and batch rows, if 2-D)."""
    y_hat = np.asarray(y_hat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y_hat.shape != y.shape:
        raise ShapeError(f"bce_loss shapes {y_hat.shape} vs {y.shape}")
    p = np.clip(y_hat, EPS, 1.0 - EPS)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


@dataclass(frozen=True)
class OptimizerConfig:
    peak_lr: float = 1e-3
    warmup_fraction: float = 0.10
    weight_decay: float = 0.01
    clip_norm: float = 1.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 8

    def __post_init__(self):
        if not 0.0 < self.warmup_fraction < 1.0:
            raise InvalidInput("warmup_fraction must be in (0, 1)")
        if self.clip_norm <= 0:
            raise InvalidInput("clip_norm must be positive")


def lr_at(step: int, total_steps: int, cfg: OptimizerConfig) -> float:
    """Linear warmup to peak_lr over the first warmup_fraction of steps,
    then linear decay to 0 at total_steps."""
    if total_steps <= 0:
        raise InvalidInput("total_steps must be positive")
    if not 0 <= step <= total_steps:
        raise InvalidInput(f"step {step} outside [0, {total_steps}]")
    w = round(cfg.warmup_fraction * total_steps)
    if step <= w:
        return cfg.peak_lr * step / w if w else cfg.peak_lr
    return cfg.peak_lr * (total_steps - step) / (total_steps - w)


class AdamWState:
    def __init__(self):
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}


def adamw_step(params: dict, grads: dict, state: AdamWState, lr: float,
               cfg: OptimizerConfig) -> None:
    """In-place AdamW update: global-norm gradient clipping, bias-corrected
    Adam moments, then decoupled weight decay p -= lr * wd * p."""
    sq = 0.0
    for g in grads.values():
        if not np.all(np.isfinite(g)):
            raise NumericalError("non-finite gradient")
        sq += float(np.sum(g * g))
    norm = math.sqrt(sq)
    scale = cfg.clip_norm / norm if norm > cfg.clip_norm else 1.0

    state.t += 1
    bc1 = 1.0 - cfg.beta1 ** state.t
    bc2 = 1.0 - cfg.beta2 ** state.t
    for name, p in params.items():
        g = grads[name] * scale
        m = state.m.setdefault(name, np.zeros_like(p))
        v = state.v.setdefault(name, np.zeros_like(p))
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * g * g
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + cfg.eps)
        p -= lr * cfg.weight_decay * p


class MlpClassifier:
    """Multi-label classifier head over fixed feature vectors.

    With hidden_dim set: sigmoid(W2 . dropout(relu(W1 . x + b1)) + b2).
    Without: a single linear layer into the sigmoid. Dropout is inverted
    (train-time scaling by 1/(1-p)), so eval needs no rescaling.
    """

    def __init__(self, input_dim: int, n_outputs: int, hidden_dim: int | None = None,
                 dropout_p: float = 0.0, seed: int = 0):
        if not 0.0 <= dropout_p < 1.0:
            raise InvalidInput("dropout_p must be in [0, 1)")
        self.input_dim = input_dim
        self.n_outputs = n_outputs
        self.hidden_dim = hidden_dim
        self.dropout_p = dropout_p
        rng = np.random.default_rng(seed)
        self.params: dict[str, np.ndarray] = {}
        if hidden_dim is not None:
            self.params["W1"] = self._kaiming(rng, hidden_dim, input_dim)
            self.params["b1"] = np.zeros(hidden_dim)
            self.params["W2"] = self._kaiming(rng, n_outputs, hidden_dim)
            self.params["b2"] = np.zeros(n_outputs)
        else:
            self.params["W2"] = self._kaiming(rng, n_outputs, input_dim)
            self.params["b2"] = np.zeros(n_outputs)

    @staticmethod
    def _kaiming(rng, fan_out, fan_in):
        bound = math.sqrt(6.0 / fan_in)
        return rng.uniform(-bound, bound, size=(fan_out, fan_in))

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.input_dim:
            raise ShapeError(f"expected input dim {self.input_dim}, got {x.shape[1]}")
        return x

    def _dropout_mask(self, shape, rng) -> np.ndarray:
        if rng is None:
            rng = np.random.default_rng()
        keep = 1.0 - self.dropout_p
        return (rng.random(shape) < keep) / keep

    def forward(self, x: np.ndarray, train_mode: bool = False, rng=None) -> np.ndarray:
        single = np.asarray(x).ndim == 1
        probs, _ = self._forward_cached(self._check_input(x), train_mode, rng)
        return probs[0] if single else probs

    def _forward_cached(self, X, train_mode, rng, mask=None):
        p = self.params
        if self.hidden_dim is None:
            logits = X @ p["W2"].T + p["b2"]
            return sigmoid(logits), (X, None, None)
        h = np.maximum(X @ p["W1"].T + p["b1"], 0.0)
        if train_mode and self.dropout_p > 0.0:
            if mask is None:
                mask = self._dropout_mask(h.shape, rng)
            hd = h * mask
        else:
            mask = None
            hd = h
        logits = hd @ p["W2"].T + p["b2"]
        return sigmoid(logits), (X, h, mask)

    def loss_and_grads(self, X: np.ndarray, Y: np.ndarray, train_mode: bool = True,
                       rng=None, dropout_mask=None):
        """Mean BCE over the batch plus analytic gradients w.r.t. all params.

        A fixed dropout_mask may be passed to make the stochastic loss a
        deterministic function of the parameters (used by gradient checks).
        """
        X = self._check_input(X)
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        if Y.shape != (X.shape[0], self.n_outputs):
            raise ShapeError(f"labels shape {Y.shape}, want {(X.shape[0], self.n_outputs)}")
        probs, (X, h, mask) = self._forward_cached(X, train_mode, rng, dropout_mask)
        loss = bce_loss(probs, Y)

        # d(mean BCE)/d(logits) for clamped sigmoid outputs
        n = Y.size
        p_clip = np.clip(probs, EPS, 1.0 - EPS)
        dlogits = (p_clip - Y) / n * (probs * (1.0 - probs)) / (p_clip * (1.0 - p_clip))

        grads = {}
        if self.hidden_dim is None:
            grads["W2"] = dlogits.T @ X
            grads["b2"] = dlogits.sum(axis=0)
            return loss, grads
        hd = h * mask if mask is not None else h
        grads["W2"] = dlogits.T @ hd
        grads["b2"] = dlogits.sum(axis=0)
        dh = dlogits @ self.params["W2"]
        if mask is not None:
            dh = dh * mask
        dh = dh * (h > 0.0)
        grads["W1"] = dh.T @ X
        grads["b1"] = dh.sum(axis=0)
        return loss, grads

    def to_json_obj(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "n_outputs": self.n_outputs,
            "hidden_dim": self.hidden_dim,
            "dropout_p": self.dropout_p,
            "params": {k: v.tolist() for k, v in self.params.items()},
        }

    @classmethod
    def from_json_obj(cls, obj) -> "MlpClassifier":
        model = cls(obj["input_dim"], obj["n_outputs"], obj["hidden_dim"], obj["dropout_p"])
        model.params = {k: np.array(v, dtype=np.float64) for k, v in obj["params"].items()}
        return model


@dataclass
class HeadReport:
    degenerate_heads: list = field(default_factory=list)
    iterations: dict = field(default_factory=dict)


class LogisticEnsemble:
    """One-vs-rest binary logistic regression, one head per requirement."""

    def __init__(self, input_dim: int, n_outputs: int, l2_strength: float = 1.0):
        self.input_dim = input_dim
        self.n_outputs = n_outputs
        self.l2_strength = l2_strength
        self.W = np.zeros((n_outputs, input_dim))
        self.b = np.zeros(n_outputs)
        # heads without both classes fall back to a constant prior probability
        self.constant_prob = np.full(n_outputs, np.nan)

    def forward(self, x: np.ndarray) -> np.ndarray:
        single = np.asarray(x).ndim == 1
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.input_dim:
            raise ShapeError(f"expected input dim {self.input_dim}, got {x.shape[1]}")
        probs = sigmoid(x @ self.W.T + self.b)
        for j in np.flatnonzero(~np.isnan(self.constant_prob)):
            probs[:, j] = self.constant_prob[j]
        return probs[0] if single else probs

    def to_json_obj(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "n_outputs": self.n_outputs,
            "l2_strength": self.l2_strength,
            "W": self.W.tolist(),
            "b": self.b.tolist(),
            "constant_prob": [None if np.isnan(p) else p for p in self.constant_prob],
        }

    @classmethod
    def from_json_obj(cls, obj) -> "LogisticEnsemble":
        model = cls(obj["input_dim"], obj["n_outputs"], obj["l2_strength"])
        model.W = np.array(obj["W"], dtype=np.float64)
        model.b = np.array(obj["b"], dtype=np.float64)
        model.constant_prob = np.array(
            [np.nan if p is None else p for p in obj["constant_prob"]], dtype=np.float64)
        return model


def _head_loss_grad(w, b, X, y, l2):
    z = X @ w + b
    # log(1 + exp(-|z|)) formulation keeps the loss finite for large |z|
    loss = float(np.mean(np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))))
    loss += 0.5 * l2 * float(w @ w) / X.shape[0]
    r = sigmoid(z) - y
    gw = X.T @ r / X.shape[0] + l2 * w / X.shape[0]
    gb = float(r.mean())
    return loss, gw, gb


def train_logistic(ensemble: LogisticEnsemble, features: np.ndarray, labels: np.ndarray,
                   max_iter: int = 100, tol: float = 1e-6,
                   report: HeadReport | None = None,
                   loss_history: dict | None = None) -> LogisticEnsemble:
    """Fit each head by full-batch gradient descent with backtracking
    (Armijo) line search, so the loss is non-increasing per iteration.

    Heads whose training labels contain a single class become constant
    predictors at the Laplace-smoothed positive prior.
    """
    X = np.asarray(features, dtype=np.float64)
    Y = np.asarray(labels, dtype=np.float64)
    if X.shape[0] != Y.shape[0] or Y.shape[1] != ensemble.n_outputs:
        raise ShapeError(f"features {X.shape} vs labels {Y.shape}")
    n = X.shape[0]
    for j in range(ensemble.n_outputs):
        y = Y[:, j]
        n_pos = int(y.sum())
        if n_pos == 0 or n_pos == n:
            ensemble.constant_prob[j] = (n_pos + 1) / (n + 2)
            if report is not None:
                report.degenerate_heads.append(j)
            continue
        w = np.zeros(ensemble.input_dim)
        b = 0.0
        loss, gw, gb = _head_loss_grad(w, b, X, y, ensemble.l2_strength)
        history = [loss]
        step = 1.0
        it = 0
        for it in range(1, max_iter + 1):
            gnorm2 = float(gw @ gw) + gb * gb
            if math.sqrt(gnorm2) < tol:
                break
            step = min(step * 2.0, 1e4)  # allow growth after cautious steps
            accepted = False
            while step >= 1e-12:
                w_new = w - step * gw
                b_new = b - step * gb
                new_loss, gw_new, gb_new = _head_loss_grad(
                    w_new, b_new, X, y, ensemble.l2_strength)
                if new_loss <= loss - 1e-4 * step * gnorm2:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break
            w, b, loss, gw, gb = w_new, b_new, new_loss, gw_new, gb_new
            history.append(loss)
        ensemble.W[j] = w
        ensemble.b[j] = b
        ensemble.constant_prob[j] = np.nan
        if report is not None:
            report.iterations[j] = it
        if loss_history is not None:
            loss_history[j] = history
    return ensemble

"""Feed-forward student networks trained on class-probability targets.

The student family is a fixed grid: 1 to 5 hidden layers, a node count
shared by every hidden layer, an optional bottleneck that narrows the
middle layer once there are at least 3, relu or tanh, and an Adam
learning rate.  Training minimizes softmax cross-entropy against either
soft targets (a teacher's posteriors) or one-hot hard labels.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .model_io import load_model, save_model

LAYER_CHOICES = (1, 2, 3, 4, 5)
NODE_CHOICES = (10, 25, 100, 200, 400)
BOTTLENECK_CHOICES = (0.2, 0.5, 1.0)
ACTIVATION_CHOICES = ("relu", "tanh")
LR_CHOICES = (1e-2, 1e-3, 1e-4, 1e-5)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class TrainingDivergedError(RuntimeError):
    """Raised when the loss stops being finite; carries the 1-based epoch."""

    def __init__(self, epoch):
        super().__init__(f"training loss became non-finite at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class StudentConfig:
    """One point of the student grid; values outside the grid are rejected."""

    layers: int
    nodes: int
    bottleneck: float
    activation: str
    lr: float

    def __post_init__(self):
        if self.layers not in LAYER_CHOICES:
            raise ValueError(f"layers must be one of {LAYER_CHOICES}, got {self.layers}")
        if self.nodes not in NODE_CHOICES:
            raise ValueError(f"nodes must be one of {NODE_CHOICES}, got {self.nodes}")
        if self.bottleneck not in BOTTLENECK_CHOICES:
            raise ValueError(
                f"bottleneck must be one of {BOTTLENECK_CHOICES}, got {self.bottleneck}"
            )
        if self.activation not in ACTIVATION_CHOICES:
            raise ValueError(
                f"activation must be one of {ACTIVATION_CHOICES}, got {self.activation}"
            )
        if self.lr not in LR_CHOICES:
            raise ValueError(f"lr must be one of {LR_CHOICES}, got {self.lr}")

    @property
    def config_id(self):
        return (
            f"l{self.layers}-n{self.nodes}-r{self.bottleneck:g}"
            f"-{self.activation}-{self.lr:.0e}"
        )

    def hidden_widths(self):
        """Hidden layer sizes; the bottleneck narrows the middle when layers >= 3."""
        widths = [self.nodes] * self.layers
        if self.layers >= 3:
            widths[self.layers // 2] = math.ceil(self.bottleneck * self.nodes)
        return tuple(widths)


def parse_config_id(config_id):
    """Inverse of StudentConfig.config_id."""
    parts = config_id.split("-")
    if len(parts) != 6 or not (
        parts[0].startswith("l") and parts[1].startswith("n") and parts[2].startswith("r")
    ):
        raise ValueError(f"malformed config id {config_id!r}")
    try:
        return StudentConfig(
            layers=int(parts[0][1:]),
            nodes=int(parts[1][1:]),
            bottleneck=float(parts[2][1:]),
            activation=parts[3],
            lr=float(parts[4] + "-" + parts[5]),
        )
    except ValueError as exc:
        raise ValueError(f"malformed config id {config_id!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# standardization (student inputs only)
# ---------------------------------------------------------------------------

class Standardizer:
    """Per-column zero-mean unit-variance scaling with train statistics.

    Constant columns keep scale 1 so they map to zero instead of NaN.
    """

    def __init__(self):
        self.mean_ = None
        self.scale_ = None

    def fit(self, X):
        X = np.asarray(X, dtype=np.float64)
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        self.scale_ = np.where(std > 0, std, 1.0)
        return self

    def transform(self, X):
        if self.mean_ is None:
            raise ValueError("standardizer not fitted")
        return (np.asarray(X, dtype=np.float64) - self.mean_) / self.scale_


# ---------------------------------------------------------------------------
# network core: weights are a list of (W, b) pairs
# ---------------------------------------------------------------------------

def init_weights(config, in_dim, out_dim, rng):
    """He-uniform (relu) or Glorot-uniform (tanh) weights, zero biases."""
    dims = (in_dim,) + config.hidden_widths() + (out_dim,)
    weights = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        if config.activation == "relu":
            limit = math.sqrt(6.0 / fan_in)
        else:
            limit = math.sqrt(6.0 / (fan_in + fan_out))
        W = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        weights.append((W, np.zeros(fan_out)))
    return weights


def _act(z, activation):
    if activation == "relu":
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _act_grad(a, activation):
    # gradient through the activation, expressed in the activated value
    if activation == "relu":
        return (a > 0.0).astype(np.float64)
    return 1.0 - a * a


def forward_logits(weights, X, activation):
    """Network output before softmax."""
    a = np.asarray(X, dtype=np.float64)
    for W, b in weights[:-1]:
        a = _act(a @ W + b, activation)
    W, b = weights[-1]
    return a @ W + b


def log_softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def cross_entropy(logits, targets):
    """Mean over rows of -sum_c targets * log softmax(logits)."""
    return float(-(targets * log_softmax(logits)).sum(axis=1).mean())


def loss_and_grad(weights, X, targets, activation):
    """Cross-entropy loss and its gradient in every weight and bias.

    targets is an (n, C) row-stochastic matrix.  Returns (loss, grads)
    with grads shaped exactly like weights.
    """
    X = np.asarray(X, dtype=np.float64)
    m = X.shape[0]

    acts = [X]
    a = X
    for W, b in weights[:-1]:
        a = _act(a @ W + b, activation)
        acts.append(a)
    W_out, b_out = weights[-1]
    logits = a @ W_out + b_out

    logp = log_softmax(logits)
    loss = float(-(targets * logp).sum(axis=1).mean())

    delta = (np.exp(logp) - targets) / m
    grads = [None] * len(weights)
    for layer in range(len(weights) - 1, -1, -1):
        grads[layer] = (acts[layer].T @ delta, delta.sum(axis=0))
        if layer > 0:
            W, _ = weights[layer]
            delta = (delta @ W.T) * _act_grad(acts[layer], activation)
    return loss, grads


# ---------------------------------------------------------------------------
# trained model container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Mlp:
    """A trained student: weights plus the input scaling baked in at fit time."""

    config: StudentConfig
    weights: list
    in_dim: int
    out_dim: int
    mean: np.ndarray = None
    scale: np.ndarray = None
    seed: int = 0

    def _scaled(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.in_dim:
            raise ValueError(f"expected (n, {self.in_dim}) matrix, got {X.shape}")
        if self.mean is None:
            return X
        return (X - self.mean) / self.scale

    def predict_proba(self, X):
        logits = forward_logits(self.weights, self._scaled(X), self.config.activation)
        return np.exp(log_softmax(logits))

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1).astype(np.int64)

    def save(self, path):
        meta = {
            "layers": self.config.layers,
            "nodes": self.config.nodes,
            "bottleneck": self.config.bottleneck,
            "activation": self.config.activation,
            "lr": self.config.lr,
            "in_dim": self.in_dim,
            "out_dim": self.out_dim,
            "seed": self.seed,
            "n_layers_total": len(self.weights),
            "standardized": self.mean is not None,
        }
        arrays = {}
        for i, (W, b) in enumerate(self.weights):
            arrays[f"W{i}"] = W
            arrays[f"b{i}"] = b
        if self.mean is not None:
            arrays["mean"] = self.mean
            arrays["scale"] = self.scale
        save_model(path, "mlp", meta, arrays)

    @classmethod
    def load(cls, path):
        _, meta, arrays = load_model(path, expect_kind="mlp")
        config = StudentConfig(
            layers=meta["layers"],
            nodes=meta["nodes"],
            bottleneck=meta["bottleneck"],
            activation=meta["activation"],
            lr=meta["lr"],
        )
        weights = [
            (arrays[f"W{i}"], arrays[f"b{i}"]) for i in range(meta["n_layers_total"])
        ]
        return cls(
            config=config,
            weights=weights,
            in_dim=meta["in_dim"],
            out_dim=meta["out_dim"],
            mean=arrays.get("mean"),
            scale=arrays.get("scale"),
            seed=meta["seed"],
        )


@dataclass(frozen=True)
class TrainResult:
    model: "Mlp"
    loss_history: np.ndarray = field(repr=False)
    epochs: int = 0
    stopped_early: bool = False


def _as_targets(y, n_classes):
    y = np.asarray(y)
    if y.ndim == 2:
        if np.any(y < 0) or not np.allclose(y.sum(axis=1), 1.0, atol=1e-6):
            raise ValueError("soft targets must be row-stochastic")
        return np.asarray(y, dtype=np.float64), y.shape[1]
    if n_classes is None:
        n_classes = int(y.max()) + 1
    onehot = np.zeros((y.shape[0], n_classes))
    onehot[np.arange(y.shape[0]), y.astype(np.int64)] = 1.0
    return onehot, n_classes


def train_student(X, targets, config, seed, n_classes=None, max_epochs=200,
                  batch_size=None, tol=1e-4, patience=10, standardize=True):
    """Fit one student with Adam and mean-loss early stopping.

    targets may be (n, C) probabilities or (n,) integer labels (one-hot
    encoded, optionally with an explicit n_classes).  Inputs are
    standardized with training statistics unless standardize=False; the
    scaling is stored inside the returned model.  Epochs end early once
    the mean epoch loss has not improved by tol for `patience` epochs.
    Raises TrainingDivergedError when the loss leaves the finite range.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("feature matrix must be 2-dimensional")
    n, d = X.shape
    T, out_dim = _as_targets(targets, n_classes)
    if T.shape[0] != n:
        raise ValueError("targets length does not match rows")
    if out_dim < 2:
        raise ValueError("need at least two classes")
    if np.isnan(X).any():
        raise ValueError("features contain NaN; impute before training")
    if batch_size is None:
        batch_size = min(200, n)
    if batch_size < 1:
        raise ValueError("batch_size must be positive")

    scaler = None
    if standardize:
        scaler = Standardizer().fit(X)
        X = scaler.transform(X)

    rng = np.random.default_rng(seed)
    weights = init_weights(config, d, out_dim, rng)
    m_state = [(np.zeros_like(W), np.zeros_like(b)) for W, b in weights]
    v_state = [(np.zeros_like(W), np.zeros_like(b)) for W, b in weights]

    lr = config.lr
    step = 0
    best = math.inf
    bad_epochs = 0
    history = []
    stopped_early = False
    epochs_run = 0

    for epoch in range(1, max_epochs + 1):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            loss, grads = loss_and_grad(weights, X[idx], T[idx], config.activation)
            if not math.isfinite(loss):
                raise TrainingDivergedError(epoch)
            batch_losses.append(loss)
            step += 1
            c1 = 1.0 - ADAM_BETA1 ** step
            c2 = 1.0 - ADAM_BETA2 ** step
            for i, (gW, gb) in enumerate(grads):
                mW, mb = m_state[i]
                vW, vb = v_state[i]
                mW = ADAM_BETA1 * mW + (1.0 - ADAM_BETA1) * gW
                mb = ADAM_BETA1 * mb + (1.0 - ADAM_BETA1) * gb
                vW = ADAM_BETA2 * vW + (1.0 - ADAM_BETA2) * gW * gW
                vb = ADAM_BETA2 * vb + (1.0 - ADAM_BETA2) * gb * gb
                m_state[i] = (mW, mb)
                v_state[i] = (vW, vb)
                W, b = weights[i]
                W = W - lr * (mW / c1) / (np.sqrt(vW / c2) + ADAM_EPS)
                b = b - lr * (mb / c1) / (np.sqrt(vb / c2) + ADAM_EPS)
                weights[i] = (W, b)
        epoch_loss = float(np.mean(batch_losses))
        history.append(epoch_loss)
        epochs_run = epoch
        if epoch_loss < best - tol:
            best = epoch_loss
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= patience:
                stopped_early = True
                break

    model = Mlp(
        config=config,
        weights=weights,
        in_dim=d,
        out_dim=out_dim,
        mean=None if scaler is None else scaler.mean_,
        scale=None if scaler is None else scaler.scale_,
        seed=seed,
    )
    return TrainResult(
        model=model,
        loss_history=np.array(history),
        epochs=epochs_run,
        stopped_early=stopped_early,
    )

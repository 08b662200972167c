"""Feedforward ReLU network with shift activations and a softmax head.

A network with L hidden layers is parameterized by L+1 weight matrices and
L shift vectors and computes

    softmax( W_L relu(z_L - v_L) ... W_1 relu(z_1 - v_1) )   with z_1 = W_0 x.

Shifts enter with a minus sign, i.e. they are the negated biases of a
conventional layer; they are stored as shifts (not biases) on purpose, and
every consumer in this package sticks to that sign convention.  The final
weight matrix maps to K class logits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError

PROB_FLOOR = 1e-12  # floor inside log() when training; keeps CE finite


@dataclass(frozen=True)
class Architecture:
    """Shape of the network: input width, hidden widths p_1..p_L, classes K."""

    input_dim: int
    hidden_widths: tuple
    n_classes: int

    def __post_init__(self):
        object.__setattr__(self, "hidden_widths", tuple(int(p) for p in self.hidden_widths))
        if self.input_dim < 1:
            raise DomainError(f"input_dim must be >= 1, got {self.input_dim}")
        if len(self.hidden_widths) < 1 or any(p < 1 for p in self.hidden_widths):
            raise DomainError("need at least one hidden layer, all widths >= 1")
        if self.n_classes < 2:
            raise DomainError(f"need at least 2 classes, got {self.n_classes}")

    @property
    def depth(self) -> int:
        return len(self.hidden_widths)

    def layer_widths(self) -> tuple:
        return (self.input_dim, *self.hidden_widths, self.n_classes)


@dataclass
class NetworkParams:
    """Weights and shifts of one network.

    `weights[l]` has shape (p_{l+1}, p_l) for l = 0..L, `shifts[l]` has
    length p_{l+1} for l = 0..L-1 and is subtracted before the ReLU that
    follows `weights[l]`.
    """

    weights: list
    shifts: list

    def __post_init__(self):
        self.weights = [np.asarray(w, dtype=float) for w in self.weights]
        self.shifts = [np.asarray(v, dtype=float) for v in self.shifts]
        if len(self.weights) != len(self.shifts) + 1:
            raise DomainError("need exactly one more weight matrix than shift vectors")
        for i, v in enumerate(self.shifts):
            if v.shape != (self.weights[i].shape[0],):
                raise DomainError(f"shift {i + 1} does not match the width of weight {i}")
        for i in range(len(self.weights) - 1):
            if self.weights[i + 1].shape[1] != self.weights[i].shape[0]:
                raise DomainError(f"weight matrices {i} and {i + 1} have mismatched widths")
        for arr in (*self.weights, *self.shifts):
            if not np.all(np.isfinite(arr)):
                raise DomainError("network parameters must be finite")

    @property
    def architecture(self) -> Architecture:
        return Architecture(
            input_dim=self.weights[0].shape[1],
            hidden_widths=tuple(w.shape[0] for w in self.weights[:-1]),
            n_classes=self.weights[-1].shape[0],
        )

    def copy(self) -> "NetworkParams":
        return NetworkParams(
            weights=[w.copy() for w in self.weights],
            shifts=[v.copy() for v in self.shifts],
        )


def zero_params(arch: Architecture) -> NetworkParams:
    widths = arch.layer_widths()
    return NetworkParams(
        weights=[np.zeros((widths[i + 1], widths[i])) for i in range(len(widths) - 1)],
        shifts=[np.zeros(w) for w in arch.hidden_widths],
    )


def initial_params(arch: Architecture, rng: np.random.Generator) -> NetworkParams:
    """Symmetric uniform init scaled by 1/sqrt(fan-in); shifts start at zero."""
    widths = arch.layer_widths()
    weights = []
    for i in range(len(widths) - 1):
        bound = 1.0 / np.sqrt(widths[i])
        weights.append(rng.uniform(-bound, bound, size=(widths[i + 1], widths[i])))
    return NetworkParams(weights=weights, shifts=[np.zeros(w) for w in arch.hidden_widths])


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max-logit subtraction for overflow safety."""
    logits = np.asarray(logits, dtype=float)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _as_batch(x: np.ndarray, input_dim: int):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != input_dim:
        raise DomainError(f"input has shape {x.shape}, network expects width {input_dim}")
    return x, single


def _forward_pass(params: NetworkParams, x: np.ndarray, masks=None):
    """Shared forward computation; returns (activations, pre_relu, probs).

    `masks` is an optional list of per-hidden-layer multiplicative factors
    (0 or 1/(1-s)) with the batch shape; they implement inverted dropout.
    """
    n_hidden = len(params.shifts)
    activations = [x]
    pre_relu = []
    a = x
    for l in range(n_hidden):
        h = a @ params.weights[l].T - params.shifts[l]
        a = np.maximum(h, 0.0)
        if masks is not None and masks[l] is not None:
            a = a * masks[l]
        pre_relu.append(h)
        activations.append(a)
    logits = a @ params.weights[-1].T
    return activations, pre_relu, logits


def forward_logits(params: NetworkParams, x: np.ndarray) -> np.ndarray:
    """Class logits before the softmax; mainly a test hook (the classifier
    is invariant to adding a constant to all K logits)."""
    xb, single = _as_batch(x, params.weights[0].shape[1])
    _, _, logits = _forward_pass(params, xb)
    return logits[0] if single else logits


def forward(params: NetworkParams, x: np.ndarray) -> np.ndarray:
    """Class probabilities for one input (J,) or a batch (n, J).

    Raises NumericError naming the first layer that produced non-finite
    values.
    """
    xb, single = _as_batch(x, params.weights[0].shape[1])
    n_hidden = len(params.shifts)
    a = xb
    for l in range(n_hidden):
        a = np.maximum(a @ params.weights[l].T - params.shifts[l], 0.0)
        if not np.all(np.isfinite(a)):
            raise NumericError(f"non-finite values after hidden layer {l + 1}")
    logits = a @ params.weights[-1].T
    if not np.all(np.isfinite(logits)):
        raise NumericError("non-finite values in the output logits")
    probs = softmax(logits)
    return probs[0] if single else probs


def _one_hot(label, n_classes: int) -> np.ndarray:
    """Accept an int class in {1..K} or an explicit one-hot vector."""
    arr = np.asarray(label)
    if arr.ndim == 0:
        k = int(arr)
        if not 1 <= k <= n_classes:
            raise DomainError(f"class label must lie in 1..{n_classes}, got {k}")
        y = np.zeros(n_classes)
        y[k - 1] = 1.0
        return y
    y = arr.astype(float)
    if y.shape != (n_classes,) or not np.isclose(y.sum(), 1.0) or set(np.unique(y)) - {0.0, 1.0}:
        raise DomainError("label must be a one-hot vector of length K")
    return y


def ce_loss(probs: np.ndarray, label, clamp: float | None = None) -> float:
    """Cross-entropy -log p_true, optionally truncated at `clamp`.

    A zero true-class probability without a clamp returns +inf (flagged
    with a RuntimeWarning); with a clamp the truncation binds instead.
    """
    probs = np.asarray(probs, dtype=float)
    if clamp is not None and clamp < 2.0:
        raise DomainError(f"truncation constant must be >= 2, got {clamp}")
    y = _one_hot(label, probs.shape[-1])
    p_true = float(probs @ y)
    if p_true <= 0.0:
        if clamp is None:
            import warnings

            warnings.warn("true-class probability is 0; loss is infinite", RuntimeWarning)
            return float("inf")
        return float(clamp)
    loss = -np.log(p_true)
    return float(min(loss, clamp)) if clamp is not None else float(loss)


def _gradient_pass(params: NetworkParams, activations, pre_relu, probs, y, masks=None):
    """Mean gradient of the CE loss over the batch, in NetworkParams layout."""
    n = probs.shape[0]
    n_hidden = len(params.shifts)
    grad_w = [None] * len(params.weights)
    grad_v = [None] * n_hidden

    delta = (probs - y) / n
    grad_w[-1] = delta.T @ activations[-1]
    upstream = delta @ params.weights[-1]
    for l in range(n_hidden - 1, -1, -1):
        if masks is not None and masks[l] is not None:
            upstream = upstream * masks[l]
        dh = upstream * (pre_relu[l] > 0.0)
        grad_v[l] = -dh.sum(axis=0)
        grad_w[l] = dh.T @ activations[l]
        if l > 0:
            upstream = dh @ params.weights[l]
    return NetworkParams(weights=grad_w, shifts=grad_v)


def backward(params: NetworkParams, x: np.ndarray, label, dropout_masks=None) -> NetworkParams:
    """Exact gradient of the CE loss with respect to every weight and shift.

    For a batch input the mean gradient over the batch is returned.  The
    result reuses the NetworkParams container, gradients laid out exactly
    like the parameters.  `dropout_masks`, when given, must be the same
    multiplicative factors used in the corresponding forward pass; dropped
    units receive zero gradient.
    """
    xb, single = _as_batch(x, params.weights[0].shape[1])
    y = np.asarray(label, dtype=float)
    if single and (y.ndim == 0 or y.shape == (params.weights[-1].shape[0],)):
        y = _one_hot(label, params.weights[-1].shape[0])[None, :]
    elif y.ndim == 1 and y.shape[0] == xb.shape[0]:
        k = params.weights[-1].shape[0]
        y = np.stack([_one_hot(int(lbl), k) for lbl in y])
    if y.shape != (xb.shape[0], params.weights[-1].shape[0]):
        raise DomainError("labels do not match the batch")
    activations, pre_relu, logits = _forward_pass(params, xb, dropout_masks)
    probs = softmax(logits)
    return _gradient_pass(params, activations, pre_relu, probs, y, dropout_masks)


@dataclass(frozen=True)
class SparsityReport:
    """Exact nonzero count and max-entry norm over all weights and shifts."""

    active_count: int
    max_entry: float


def sparsity_report(params: NetworkParams) -> SparsityReport:
    active = sum(int(np.count_nonzero(a)) for a in (*params.weights, *params.shifts))
    max_entry = max(float(np.abs(a).max()) if a.size else 0.0 for a in (*params.weights, *params.shifts))
    return SparsityReport(active_count=active, max_entry=max_entry)


def clip_weights(params: NetworkParams) -> NetworkParams:
    """Project every weight and shift into [-1, 1] (componentwise, idempotent)."""
    return NetworkParams(
        weights=[np.clip(w, -1.0, 1.0) for w in params.weights],
        shifts=[np.clip(v, -1.0, 1.0) for v in params.shifts],
    )

"""Dense ReLU network engine: initialization, forward pass, exact gradients.

All arithmetic is float64. Layers store weight matrices as (fan_out, fan_in)
and bias vectors of length fan_out.
"""

from __future__ import annotations

import copy
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError

PROVENANCE_RANDOM = "random-init"
PROVENANCE_ADVERSARIAL = "adversarial-init"
PROVENANCE_TRAINED = "trained"


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    hidden_widths: tuple[int, ...]
    n_classes: int

    def __post_init__(self):
        object.__setattr__(self, "hidden_widths", tuple(int(h) for h in self.hidden_widths))
        if self.input_dim < 1:
            raise ContractError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.n_classes < 2:
            raise ContractError(f"n_classes must be >= 2, got {self.n_classes}")
        if any(h < 1 for h in self.hidden_widths):
            raise ContractError(f"hidden widths must be >= 1, got {self.hidden_widths}")

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) per layer, input to output."""
        dims = [self.input_dim, *self.hidden_widths, self.n_classes]
        return list(zip(dims[:-1], dims[1:]))

    @property
    def n_params(self) -> int:
        return sum(fi * fo + fo for fi, fo in self.layer_dims)

    def fingerprint(self) -> str:
        cached = getattr(self, "_fingerprint", None)
        if cached is None:
            text = f"mlp|{self.input_dim}|{','.join(map(str, self.hidden_widths))}|{self.n_classes}"
            cached = hashlib.sha256(text.encode()).hexdigest()[:16]
            object.__setattr__(self, "_fingerprint", cached)
        return cached


@dataclass
class Weights:
    layers: list[tuple[np.ndarray, np.ndarray]]
    spec_fingerprint: str
    provenance: str
    seed: int

    def copy(self) -> "Weights":
        return Weights(
            layers=[(w.copy(), b.copy()) for w, b in self.layers],
            spec_fingerprint=self.spec_fingerprint,
            provenance=self.provenance,
            seed=self.seed,
        )

    def flat(self) -> np.ndarray:
        """All parameters as one vector: per layer, weights row-major then bias."""
        return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in self.layers])

    @staticmethod
    def from_flat(spec: MlpSpec, vec: np.ndarray, provenance: str, seed: int) -> "Weights":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.size != spec.n_params:
            raise ContractError(f"expected {spec.n_params} parameters, got {vec.size}")
        layers = []
        pos = 0
        for fan_in, fan_out in spec.layer_dims:
            w = vec[pos:pos + fan_in * fan_out].reshape(fan_out, fan_in).copy()
            pos += fan_in * fan_out
            b = vec[pos:pos + fan_out].copy()
            pos += fan_out
            layers.append((w, b))
        return Weights(layers, spec.fingerprint(), provenance, seed)


@dataclass
class Batch:
    features: np.ndarray
    labels: np.ndarray


# Gradients and momentum buffers share the Weights layer structure: a list of
# (weight-matrix array, bias array) pairs.
Gradients = list


def zeros_like_layers(w: Weights) -> list[tuple[np.ndarray, np.ndarray]]:
    return [(np.zeros_like(m), np.zeros_like(b)) for m, b in w.layers]


def init_weights(spec: MlpSpec, seed: int) -> Weights:
    """Uniform init on [-1/sqrt(fan_in), +1/sqrt(fan_in)] for weights and biases."""
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out in spec.layer_dims:
        bound = 1.0 / np.sqrt(fan_in)
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        b = rng.uniform(-bound, bound, size=fan_out)
        layers.append((w, b))
    return Weights(layers, spec.fingerprint(), PROVENANCE_RANDOM, seed)


def _check_forward_args(spec: MlpSpec, w: Weights, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise ContractError(
            f"input has shape {x.shape}, expected (*, {spec.input_dim})")
    if not np.all(np.isfinite(x)):
        raise ContractError("input contains non-finite values")
    if w.spec_fingerprint != spec.fingerprint():
        raise ContractError("weights were built for a different architecture")
    for i, ((fan_in, fan_out), (m, b)) in enumerate(zip(spec.layer_dims, w.layers)):
        if m.shape != (fan_out, fan_in) or b.shape != (fan_out,):
            raise ContractError(
                f"layer {i}: weight shape {m.shape}/{b.shape} does not match "
                f"expected ({fan_out}, {fan_in})/({fan_out},)")
    return x


def _forward_cached(spec: MlpSpec, w: Weights, x: np.ndarray):
    """Returns (logits, activations, preacts); activations[0] is the input."""
    acts = [x]
    pres = []
    h = x
    n_layers = len(w.layers)
    for i, (m, b) in enumerate(w.layers):
        z = h @ m.T + b
        pres.append(z)
        if i < n_layers - 1:
            h = np.maximum(z, 0.0)
            acts.append(h)
    return pres[-1], acts, pres


def forward(spec: MlpSpec, w: Weights, x: np.ndarray) -> np.ndarray:
    x = _check_forward_args(spec, w, x)
    logits, _, _ = _forward_cached(spec, w, x)
    return logits


def predict(spec: MlpSpec, w: Weights, x: np.ndarray) -> np.ndarray:
    """Per-row argmax of the logits; ties go to the lowest class index."""
    return np.argmax(forward(spec, w, x), axis=1)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def loss_and_grads(spec: MlpSpec, w: Weights, batch: Batch, l2: float):
    """Mean softmax cross-entropy plus (l2/2) * sum of squared weight-matrix
    entries (biases are not penalized). Returns (loss, gradients)."""
    if l2 < 0:
        raise ContractError(f"l2 must be nonnegative, got {l2}")
    x = _check_forward_args(spec, w, batch.features)
    y = np.asarray(batch.labels)
    n = x.shape[0]
    if y.shape != (n,):
        raise ContractError(f"labels have shape {y.shape}, expected ({n},)")
    if np.any(y < 0) or np.any(y >= spec.n_classes):
        raise ContractError("labels out of range")
    return _loss_and_grads_core(w, x, y, l2)


def _loss_and_grads_core(w: Weights, x: np.ndarray, y: np.ndarray, l2: float):
    """Hot path: assumes x/y already validated against spec and w."""
    n = x.shape[0]
    logits, acts, pres = _forward_cached(None, w, x)
    logp = _log_softmax(logits)
    ce = -logp[np.arange(n), y].mean()
    loss = ce
    if l2 > 0:
        loss = ce + 0.5 * l2 * sum(float(np.sum(m * m)) for m, _ in w.layers)

    probs = np.exp(logp)
    delta = probs
    delta[np.arange(n), y] -= 1.0
    delta /= n

    grads = [None] * len(w.layers)
    for i in range(len(w.layers) - 1, -1, -1):
        m, _ = w.layers[i]
        gw = delta.T @ acts[i]
        if l2 > 0:
            gw += l2 * m
        gb = delta.sum(axis=0)
        grads[i] = (gw, gb)
        if i > 0:
            delta = (delta @ m) * (pres[i - 1] > 0)
    return loss, grads


def input_gradient(spec: MlpSpec, w: Weights, x: np.ndarray, y: int) -> np.ndarray:
    """Gradient of the single-example cross-entropy loss w.r.t. the input."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    if not 0 <= int(y) < spec.n_classes:
        raise ContractError(f"label {y} out of range for {spec.n_classes} classes")
    x = _check_forward_args(spec, w, x)
    logits, acts, pres = _forward_cached(spec, w, x)
    probs = np.exp(_log_softmax(logits))
    delta = probs
    delta[0, int(y)] -= 1.0
    for i in range(len(w.layers) - 1, 0, -1):
        m, _ = w.layers[i]
        delta = (delta @ m) * (pres[i - 1] > 0)
    return (delta @ w.layers[0][0]).ravel()


def gradient_check(spec: MlpSpec, w: Weights, batch: Batch, epsilon: float = 1e-5,
                   l2: float = 0.0) -> float:
    """Max relative error of the analytic gradients (parameters and inputs)
    against central finite differences."""
    if epsilon <= 0:
        raise ContractError(f"epsilon must be positive, got {epsilon}")

    def rel_err(a, n):
        return abs(a - n) / max(abs(a), abs(n), 1e-8)

    _, grads = loss_and_grads(spec, w, batch, l2)
    analytic = np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in grads])
    theta = w.flat()
    worst = 0.0
    for j in range(theta.size):
        for sign in (+1.0, -1.0):
            pert = theta.copy()
            pert[j] += sign * epsilon
            wp = Weights.from_flat(spec, pert, w.provenance, w.seed)
            loss_p, _ = loss_and_grads(spec, wp, batch, l2)
            if sign > 0:
                up = loss_p
            else:
                down = loss_p
        worst = max(worst, rel_err(analytic[j], (up - down) / (2 * epsilon)))

    x0 = batch.features[0].astype(np.float64)
    y0 = int(batch.labels[0])
    gin = input_gradient(spec, w, x0, y0)
    single = Batch(x0.reshape(1, -1), np.array([y0]))
    for j in range(x0.size):
        xp = x0.copy()
        xp[j] += epsilon
        xm = x0.copy()
        xm[j] -= epsilon
        up, _ = loss_and_grads(spec, w, Batch(xp.reshape(1, -1), single.labels), 0.0)
        down, _ = loss_and_grads(spec, w, Batch(xm.reshape(1, -1), single.labels), 0.0)
        worst = max(worst, rel_err(gin[j], (up - down) / (2 * epsilon)))
    return worst

"""Model-quality proxies: normalized weight distance, Frobenius norm, path
norms, FGSM perturbations and robustness curves, 2-D margin estimation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import ContractError, UndefinedDenominatorError, UnsupportedDimensionError
from .net import MlpSpec, Weights, input_gradient, predict


@dataclass
class RobustnessCurve:
    points: list[tuple[float, float]]
    eval_set: str
    attack: str = "fgsm"

    def auc(self) -> float:
        """Trapezoidal area under accuracy vs epsilon."""
        eps = np.array([e for e, _ in self.points])
        acc = np.array([a for _, a in self.points])
        trapezoid = getattr(np, "trapezoid", np.trapz)
        return float(trapezoid(acc, eps))


@dataclass
class ComplexityReport:
    frobenius: float
    path_norm_l1: float
    path_norm_l2: float
    distances: dict[str, float] = field(default_factory=dict)


def distance(w1: Weights, w2: Weights) -> float:
    """||w1 - w2||_F / ||w2||_F over all trainable parameters (asymmetric)."""
    a, b = w1.flat(), w2.flat()
    if a.size != b.size:
        raise ContractError("weight vectors have different parameter counts")
    denom = np.linalg.norm(b)
    if denom == 0:
        raise UndefinedDenominatorError("second argument has zero Frobenius norm")
    return float(np.linalg.norm(a - b) / denom)


def weight_frobenius(w: Weights) -> float:
    """sqrt of the sum of all squared parameters, biases included."""
    return float(np.linalg.norm(w.flat()))


def path_norm(spec: MlpSpec, w: Weights, p: int) -> float:
    """(sum over input-to-output paths of the product of |edge weight|^p)^(1/p).

    Biases count as edges from a constant-1 unit appended at every layer.
    Computed in closed form by pushing a ones vector through the |W|^p
    matrices."""
    if p not in (1, 2):
        raise ContractError(f"p must be 1 or 2, got {p}")
    v = np.ones(spec.input_dim)
    for m, b in w.layers:
        v = np.abs(m) ** p @ v + np.abs(b) ** p
    return float(np.sum(v) ** (1.0 / p))


def path_norm_bruteforce(spec: MlpSpec, w: Weights, p: int) -> float:
    """Explicit path enumeration; independent oracle for path_norm on tiny nets.

    A path either starts at an input unit, or at the constant-1 bias source of
    some layer, then passes through exactly one unit per subsequent layer."""
    import itertools

    n_layers = len(w.layers)
    widths = [spec.input_dim] + [m.shape[0] for m, _ in w.layers]
    total = 0.0
    # start=0: paths from an input unit; start=l>=1: paths opened by layer l's bias.
    for start in range(n_layers + 1):
        if start == 0:
            first_units = range(widths[0])
        else:
            first_units = [None]  # bias source; the unit at level `start` is free
        levels = [range(widths[k]) for k in range(max(start, 1), n_layers + 1)]
        for u0 in first_units:
            for units in itertools.product(*levels):
                prod = 1.0
                if start == 0:
                    chain = (u0,) + units
                    for l in range(n_layers):
                        prod *= abs(w.layers[l][0][chain[l + 1], chain[l]]) ** p
                else:
                    prod = abs(w.layers[start - 1][1][units[0]]) ** p
                    for l in range(start, n_layers):
                        prod *= abs(w.layers[l][0][units[l - start + 1], units[l - start]]) ** p
                total += prod
    return float(total ** (1.0 / p))


def fgsm_perturb(spec: MlpSpec, w: Weights, x: np.ndarray, y: int, eps: float,
                 clip: tuple[float, float] | None = None) -> np.ndarray:
    """x + eps * sign(dLoss/dx), with sign(0) = 0; optionally clipped."""
    if eps < 0:
        raise ContractError("eps must be nonnegative")
    g = input_gradient(spec, w, x, y)
    out = np.asarray(x, dtype=np.float64) + eps * np.sign(g)
    if clip is not None:
        out = np.clip(out, clip[0], clip[1])
    return out


def robustness_curve(spec: MlpSpec, w: Weights, ds: Dataset,
                     epsilons: list[float]) -> RobustnessCurve:
    eps = [float(e) for e in epsilons]
    if not eps or eps[0] != 0.0:
        raise ContractError("epsilon grid must start at 0")
    if any(b <= a for a, b in zip(eps, eps[1:])):
        raise ContractError("epsilons must be strictly increasing")
    points = []
    for e in eps:
        if e == 0.0:
            acc = float(np.mean(predict(spec, w, ds.features) == ds.labels))
        else:
            hits = 0
            for i in range(ds.n):
                xp = fgsm_perturb(spec, w, ds.features[i], int(ds.labels[i]), e)
                pred = predict(spec, w, xp.reshape(1, -1))[0]
                hits += int(pred == ds.labels[i])
            acc = hits / ds.n
        points.append((e, acc))
    return RobustnessCurve(points, eval_set=ds.name)


def margin_estimate(spec: MlpSpec, w: Weights, ds: Dataset,
                    box: tuple[tuple[float, float], tuple[float, float]],
                    grid_res: int):
    """Distance from each point to the nearest grid cell predicted differently
    than the point itself. Returns (per-point margins, min, median)."""
    if spec.input_dim != 2:
        raise UnsupportedDimensionError("margin estimation supports 2-D inputs only")
    if grid_res < 64:
        raise ContractError(f"grid_res must be >= 64, got {grid_res}")
    (x_lo, x_hi), (y_lo, y_hi) = box
    cx = (x_hi - x_lo) / grid_res
    cy = (y_hi - y_lo) / grid_res
    xs = x_lo + (np.arange(grid_res) + 0.5) * cx
    ys = y_lo + (np.arange(grid_res) + 0.5) * cy
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    grid_labels = predict(spec, w, grid)
    point_labels = predict(spec, w, ds.features)
    margins = np.empty(ds.n)
    for i in range(ds.n):
        other = grid[grid_labels != point_labels[i]]
        if other.shape[0] == 0:
            margins[i] = np.inf
        else:
            d2 = np.sum((other - ds.features[i]) ** 2, axis=1)
            margins[i] = np.sqrt(d2.min())
    return margins, float(np.min(margins)), float(np.median(margins))


def complexity_report(spec: MlpSpec, w: Weights,
                      distances: dict[str, float] | None = None) -> ComplexityReport:
    return ComplexityReport(
        frobenius=weight_frobenius(w),
        path_norm_l1=path_norm(spec, w, 1),
        path_norm_l2=path_norm(spec, w, 2),
        distances=dict(distances or {}),
    )

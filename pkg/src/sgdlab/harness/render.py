"""Deterministic SVG rendering of 2-D decision boundaries."""

from __future__ import annotations

import numpy as np

from ..data import Dataset
from ..errors import UnsupportedDimensionError
from ..net import MlpSpec, Weights, predict

# One fill per class; repeats past 10 classes.
CLASS_COLORS = ["#aecbfa", "#f8b4b4", "#b7e1cd", "#fde598", "#d5c2f0",
                "#fcd3b6", "#c2e7f0", "#e8c8e8", "#d9e2c6", "#cfcfcf"]
POINT_COLORS = ["#1a56c4", "#c01818", "#157145", "#b98a00", "#5e2ca5",
                "#b35c00", "#0b6e8a", "#8a2d8a", "#5a6e1f", "#444444"]


def render_decision_boundary(spec: MlpSpec, w: Weights, ds: Dataset,
                             box: tuple[tuple[float, float], tuple[float, float]],
                             grid_res: int, out_path: str,
                             canvas: int = 640) -> None:
    if spec.input_dim != 2:
        raise UnsupportedDimensionError("boundary rendering supports 2-D inputs only")
    (x_lo, x_hi), (y_lo, y_hi) = box
    cx = (x_hi - x_lo) / grid_res
    cy = (y_hi - y_lo) / grid_res
    xs = x_lo + (np.arange(grid_res) + 0.5) * cx
    ys = y_lo + (np.arange(grid_res) + 0.5) * cy
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    labels = predict(spec, w, np.column_stack([gx.ravel(), gy.ravel()]))
    labels = labels.reshape(grid_res, grid_res)

    px = canvas / grid_res

    def to_px(x, y):
        return ((x - x_lo) / (x_hi - x_lo) * canvas,
                (y_hi - y) / (y_hi - y_lo) * canvas)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{canvas}" '
             f'height="{canvas}" viewBox="0 0 {canvas} {canvas}">']
    for i in range(grid_res):
        for j in range(grid_res):
            color = CLASS_COLORS[int(labels[i, j]) % len(CLASS_COLORS)]
            x0 = i * px
            y0 = canvas - (j + 1) * px
            parts.append(f'<rect x="{x0:.3f}" y="{y0:.3f}" width="{px:.3f}" '
                         f'height="{px:.3f}" fill="{color}"/>')
    for k in range(ds.n):
        x, y = to_px(ds.features[k, 0], ds.features[k, 1])
        color = POINT_COLORS[int(ds.labels[k]) % len(POINT_COLORS)]
        parts.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="3" fill="{color}" '
                     f'stroke="#000000" stroke-width="0.5"/>')
    parts.append("</svg>")
    with open(out_path, "w", newline="\n") as f:
        f.write("\n".join(parts) + "\n")

"""Plain-text persistence: CSV grids and data vectors, PGM previews,
convergence logs and key=value metric summaries.

Grid CSV layout: comment header lines carry the cell edge coordinates, then
one row per x index with the y values of that column, row-major with respect
to the ``(nx, ny)`` field layout.  PGM previews are binary 8-bit, min/max
scaled, written with the y axis pointing up (top image row = largest y).
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .grids import Grid2D


def _fmt(v) -> str:
    return repr(float(v))


def write_field_csv(path, grid: Grid2D, values: np.ndarray, note: str = "") -> None:
    path = Path(path)
    with path.open("w", newline="") as f:
        if note:
            f.write(f"# {note}\n")
        f.write("# x_edges: " + " ".join(_fmt(v) for v in grid.x_edges) + "\n")
        f.write("# y_edges: " + " ".join(_fmt(v) for v in grid.y_edges) + "\n")
        w = csv.writer(f)
        for i in range(grid.nx):
            w.writerow([_fmt(v) for v in values[i, :]])


def read_field_csv(path) -> tuple[Grid2D, np.ndarray]:
    path = Path(path)
    edges = {}
    rows = []
    with path.open() as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                for key in ("x_edges", "y_edges"):
                    if body.startswith(key + ":"):
                        edges[key] = np.array(
                            [float(v) for v in body.split(":", 1)[1].split()])
                continue
            rows.append([float(v) for v in line.split(",")])
    grid = Grid2D(edges["x_edges"], edges["y_edges"])
    return grid, np.asarray(rows)


def write_pgm(path, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=float)
    lo, hi = float(values.min()), float(values.max())
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    img = np.round((values - lo) * scale).astype(np.uint8)
    img = img.T[::-1, :]  # rows top-down = y descending
    with Path(path).open("wb") as f:
        f.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        f.write(img.tobytes())


def write_data_csv(path, data: np.ndarray) -> None:
    data = np.asarray(data)
    with Path(path).open("w", newline="") as f:
        w = csv.writer(f)
        if np.iscomplexobj(data):
            w.writerow(["index", "real", "imag"])
            for k, v in enumerate(data):
                w.writerow([k, _fmt(v.real), _fmt(v.imag)])
        else:
            w.writerow(["index", "value"])
            for k, v in enumerate(data):
                w.writerow([k, _fmt(v)])


def read_data_csv(path) -> np.ndarray:
    with Path(path).open() as f:
        rdr = csv.reader(f)
        header = next(rdr)
        rows = list(rdr)
    if header[-1] == "imag":
        return np.array([float(r[1]) + 1j * float(r[2]) for r in rows])
    return np.array([float(r[1]) for r in rows])


def write_convergence_csv(path, log: list[dict]) -> None:
    cols = ["iteration", "cost", "residual_norm", "lambda", "active_bumps",
            "contrast_in", "contrast_out"]
    with Path(path).open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(cols)
        for row in log:
            w.writerow([_fmt(row[c]) if isinstance(row[c], float) else row[c]
                        for c in cols])


def write_params_csv(path, model) -> None:
    with Path(path).open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["bump", "weight", "dilation", "center_x", "center_y",
                    "contrast_in", "contrast_out"])
        for j in range(model.m0):
            w.writerow([j, _fmt(model.weights[j]), _fmt(model.dilations[j]),
                        _fmt(model.centers[j, 0]), _fmt(model.centers[j, 1]),
                        _fmt(model.contrast_in), _fmt(model.contrast_out)])


def write_metrics(path, metrics: dict) -> None:
    with Path(path).open("w") as f:
        for k, v in metrics.items():
            f.write(f"{k}={v}\n")


def read_metrics(path) -> dict:
    out = {}
    with Path(path).open() as f:
        for line in f:
            line = line.strip()
            if line:
                k, v = line.split("=", 1)
                out[k] = v
    return out

"""Target registry, grid norms, rate fits and CSV output."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DegenerateSeries

# --------------------------------------------------------------------------
# targets
# --------------------------------------------------------------------------

# name -> (f, f') on the real line; all are smooth on a neighbourhood of [0, 1]
_UNIVARIATE = {
    "sin2pi": (lambda x: np.sin(2 * np.pi * x),
               lambda x: 2 * np.pi * np.cos(2 * np.pi * x)),
    "gauss": (lambda x: np.exp(-4 * (2 * x - 1) ** 2),
              lambda x: -16 * (2 * x - 1) * np.exp(-4 * (2 * x - 1) ** 2)),
    "runge": (lambda x: 1 / (1 + 25 * (2 * x - 1) ** 2),
              lambda x: -100 * (2 * x - 1) / (1 + 25 * (2 * x - 1) ** 2) ** 2),
    "poly2": (lambda x: x ** 2, lambda x: 2 * x),
    "const1": (lambda x: np.ones_like(x), lambda x: np.zeros_like(x)),
}


@dataclass(frozen=True)
class TargetFunction:
    """Product of univariate factors, one per coordinate: f(x) = prod_l g_l(x_l)."""

    name: str
    factors: tuple
    beta: float = math.inf  # every registered target is analytic

    @property
    def d(self):
        return len(self.factors)

    @property
    def p(self):
        return 1

    def _points(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None] if self.d == 1 else x[None, :]
        if x.shape[-1] != self.d:
            raise ValueError(f"{self.name} takes {self.d} coordinates")
        return x

    def __call__(self, x):
        """Values, shape (P, 1)."""
        x = self._points(x)
        out = np.ones(x.shape[0])
        for l, g in enumerate(self.factors):
            out = out * _UNIVARIATE[g][0](x[:, l])
        return out[:, None]

    def grad(self, x):
        """Gradient, shape (P, 1, d)."""
        x = self._points(x)
        vals = [_UNIVARIATE[g][0](x[:, l]) for l, g in enumerate(self.factors)]
        ders = [_UNIVARIATE[g][1](x[:, l]) for l, g in enumerate(self.factors)]
        cols = []
        for l in range(self.d):
            c = ders[l].copy()
            for k in range(self.d):
                if k != l:
                    c = c * vals[k]
            cols.append(c)
        return np.stack(cols, axis=-1)[:, None, :]

    def sampler(self, x):
        return self(x)[:, 0]


def target_names():
    return sorted(_UNIVARIATE)


def get_target(name, d=1):
    """``"sin2pi"`` with ``d`` copies, or an explicit product ``"sin2pi*gauss"``."""
    parts = name.split("*")
    if len(parts) == 1:
        parts = parts * int(d)
    elif d not in (1, len(parts)):
        raise ArgumentError(f"{name!r} has {len(parts)} factors, asked for d={d}")
    for g in parts:
        if g not in _UNIVARIATE:
            raise ArgumentError(f"unknown target {g!r}; known: {', '.join(target_names())}")
    return TargetFunction(name if len(parts) == 1 else "*".join(parts), tuple(parts))


# --------------------------------------------------------------------------
# grids and norms
# --------------------------------------------------------------------------

def default_points_per_axis(d):
    return 10_000 if d == 1 else 200


@dataclass(frozen=True)
class Grid:
    points_per_axis: int
    d: int = 1
    extent: tuple = (0.0, 1.0)

    def axis(self):
        return np.linspace(self.extent[0], self.extent[1], self.points_per_axis)

    def points(self):
        a = self.axis()
        mesh = np.meshgrid(*([a] * self.d), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


def unit_grid(d=1, points_per_axis=None):
    return Grid(points_per_axis or default_points_per_axis(d), d)


@dataclass(frozen=True)
class ErrorReport:
    grid: Grid
    c0_error: float
    c1_error: float
    c0_argmax: tuple
    grad_argmax: tuple

    @property
    def grad_error(self):
        return self.c1_error - self.c0_error


def _eval_pair(g, x):
    if isinstance(g, tuple):
        v, dv = g[0](x), g[1](x)
    elif hasattr(g, "value_and_grad"):
        v, dv = g.value_and_grad(x)
    else:
        v, dv = g(x), g.grad(x)
    v = np.asarray(v, dtype=float).reshape(x.shape[0], -1)
    dv = np.asarray(dv, dtype=float).reshape(x.shape[0], v.shape[1], x.shape[1])
    return v, dv


def c1_error(f, g, grid):
    """sup |f - g| + sup max-norm |grad f - grad g| over the grid points.

    ``f`` and ``g`` expose ``__call__`` and ``grad`` (or are ``(fn, grad)``
    pairs); values are reshaped to ``(P, p)`` and gradients to ``(P, p, d)``.
    """
    x = grid.points()
    fv, fg = _eval_pair(f, x)
    gv, gg = _eval_pair(g, x)
    e0 = np.abs(fv - gv).max(axis=1)
    e1 = np.abs(fg - gg).max(axis=(1, 2))
    i0, i1 = int(np.argmax(e0)), int(np.argmax(e1))
    c0 = float(e0[i0])
    return ErrorReport(grid, c0, c0 + float(e1[i1]), tuple(x[i0].tolist()), tuple(x[i1].tolist()))


# --------------------------------------------------------------------------
# rate fits
# --------------------------------------------------------------------------

RATE_MODES = ("loglog", "sqrt")


@dataclass(frozen=True)
class RateFit:
    x: tuple
    y: tuple
    slope: float
    intercept: float
    r2: float
    mode: str


def fit_rate(x, y, mode="loglog"):
    """OLS slope of log y against log x (``loglog``) or against sqrt x (``sqrt``)."""
    if mode not in RATE_MODES:
        raise ArgumentError(f"mode must be one of {RATE_MODES}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 3:
        raise DegenerateSeries("need at least three (x, y) pairs")
    if np.any(~(y > 0)):
        raise DegenerateSeries("errors must be positive to take logs")
    if np.any(x <= 0):
        raise DegenerateSeries("abscissae must be positive")
    u = np.log(x) if mode == "loglog" else np.sqrt(x)
    v = np.log(y)
    slope, intercept = np.polyfit(u, v, 1)
    resid = v - (slope * u + intercept)
    ss = float(np.sum((v - v.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 1.0
    return RateFit(tuple(x.tolist()), tuple(y.tolist()), float(slope), float(intercept), r2, mode)


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(header, rows):
    """Header row, '.' decimals, shortest round-trip floats, '\\n' line endings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    text = csv_text(header, rows)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return text


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows

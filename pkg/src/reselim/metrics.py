"""Diagnostics computed from greedy curves and node rankings."""
from dataclasses import dataclass, field
import csv
import io
import json
import math

import numpy as np

from .cascade import CascadeConfig
from .maximize import MULTISET, SET, greedy_select

FRIENDLY = "friendly"
AWARE = "aware"
FREE = "free"
FRIENDLY_ABOVE = 1.5
FREE_BELOW = 1.05
DEFAULT_ALPHAS = tuple(round(0.1 * i, 1) for i in range(11))
FLAT_SLOPE = 1e-9


@dataclass(frozen=True)
class SaturationFit:
    sigma1: float
    sigma0: float
    k_min: int
    k_max: int


def reselection_gain(simple, resel, k):
    """Ratio of the multiset curve to the set curve at budget ``k``."""
    if simple.mode != SET or resel.mode != MULTISET:
        raise ValueError("reselection gain needs a set-mode and a multiset-mode curve")
    return resel.tau(k) / simple.tau(k)


def fit_line(ks, values):
    """Ordinary least squares ``values ~ slope * ks + intercept``."""
    x = np.asarray(ks, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    slope = float(np.dot(dx, y - ym) / np.dot(dx, dx))
    return slope, float(ym - slope * xm)


def fit_saturation(curve, k_min=5, k_max=50):
    if not k_min < k_max:
        raise ValueError("k_min must be below k_max")
    if k_min < 1 or len(curve) < k_max:
        raise ValueError(f"curve of length {len(curve)} does not cover [{k_min}, {k_max}]")
    ks = list(range(k_min, k_max + 1))
    slope, intercept = fit_line(ks, [curve.tau(k) for k in ks])
    return SaturationFit(slope, intercept, k_min, k_max)


def influence_saturation(fit):
    """``(sigma1 + sigma0) / sigma1``; ``None`` for a flat curve."""
    if fit.sigma1 <= FLAT_SLOPE:
        return None
    return (fit.sigma1 + fit.sigma0) / fit.sigma1


def hub_ratio(ranking, k):
    if not 2 <= k <= len(ranking):
        raise ValueError(f"hub ratio distance {k} outside [2, {len(ranking)}]")
    return ranking.spread(1) / ranking.spread(k)


def categorize(rg):
    # both boundaries belong to "aware"
    if rg > FRIENDLY_ABOVE:
        return FRIENDLY
    if rg >= FREE_BELOW:
        return AWARE
    return FREE


def pearson(xs, ys):
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValueError("pearson needs two equal-length sequences of at least 2 values")
    dx, dy = x - x.mean(), y - y.mean()
    sx, sy = math.sqrt(np.dot(dx, dx)), math.sqrt(np.dot(dy, dy))
    if sx == 0 or sy == 0:
        raise ValueError("correlation undefined for a constant sequence")
    return float(np.clip(np.dot(dx, dy) / (sx * sy), -1.0, 1.0))


def alpha_sweep(graph, k, alphas, cfg, simple=None, curve_fn=None):
    """Reselection gain at budget ``k`` for each fading value.

    ``curve_fn(mode, alpha) -> GreedyCurve`` lets callers cache curves.
    """
    if curve_fn is None:
        def curve_fn(mode, alpha):
            c = CascadeConfig(alpha, cfg.runs, cfg.master_seed, cfg.workers)
            return greedy_select(graph, k, mode, c)
    for a in alphas:
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"alpha {a} outside [0, 1]")
    if simple is None:
        simple = curve_fn(SET, cfg.alpha)
    return {float(a): reselection_gain(simple, curve_fn(MULTISET, float(a)), k) for a in alphas}


@dataclass
class MetricsReport:
    graph: str
    weight_model: str
    k: int
    alpha: float
    rg: float
    fit: SaturationFit = None
    is_value: float = None
    hr: dict = field(default_factory=dict)
    category: str = None
    alpha_curve: dict = None
    runs: int = None
    seed: int = None

    def to_dict(self):
        return {
            "graph": self.graph,
            "weight_model": self.weight_model,
            "k": self.k,
            "alpha": self.alpha,
            "rg": self.rg,
            "sigma1": None if self.fit is None else self.fit.sigma1,
            "sigma0": None if self.fit is None else self.fit.sigma0,
            "k_min": None if self.fit is None else self.fit.k_min,
            "k_max": None if self.fit is None else self.fit.k_max,
            "is": self.is_value,
            "hr": {str(k): v for k, v in sorted(self.hr.items())},
            "category": self.category,
            "alpha_curve": None if self.alpha_curve is None
            else {repr(float(a)): v for a, v in sorted(self.alpha_curve.items())},
            "runs": self.runs,
            "seed": self.seed,
            "notes": "rg uses greedy curve values in place of the true optima on both sides",
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def csv_row(self):
        d = self.to_dict()
        cols = ["graph", "weight_model", "k", "alpha", "rg", "sigma1", "sigma0", "is", "category"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        w.writerow(["" if d[c] is None else (repr(d[c]) if isinstance(d[c], float) else d[c])
                    for c in cols])
        return buf.getvalue()

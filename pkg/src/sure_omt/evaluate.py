"""Monte-Carlo estimation of error rates and power, plus wealth trajectories."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import StepCdf
from .spending import SpendingSequence


@dataclass
class TrialOutcome:
    """Per-trial reject flags and ground-truth labels (True = alternative)."""

    rejects: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.rejects = np.asarray(self.rejects, dtype=bool)
        self.labels = np.asarray(self.labels, dtype=bool)
        if self.rejects.shape != self.labels.shape:
            raise ValueError("rejects and labels must have equal length")

    def false_discoveries(self, T: int) -> int:
        return int(np.sum(self.rejects[:T] & ~self.labels[:T]))

    def discoveries(self, T: int) -> int:
        return int(np.sum(self.rejects[:T]))

    def true_discoveries(self, T: int) -> int:
        return int(np.sum(self.rejects[:T] & self.labels[:T]))


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float
    n_trials: int


def estimate_fwer(trials: Sequence[TrialOutcome], T: int) -> Estimate:
    """Fraction of trials with at least one false rejection by time T."""
    if not trials:
        raise ValueError("need at least one trial")
    n = len(trials)
    hits = sum(1 for tr in trials if tr.false_discoveries(T) >= 1)
    p = hits / n
    return Estimate(p, math.sqrt(p * (1.0 - p) / n), n)


def estimate_mfdr(trials: Sequence[TrialOutcome], T: int) -> Estimate:
    """Ratio of mean false discoveries to mean (1 or more) discoveries.

    The standard error is a delta-method approximation for the ratio of
    means.
    """
    if not trials:
        raise ValueError("need at least one trial")
    n = len(trials)
    x = np.array([tr.false_discoveries(T) for tr in trials], dtype=float)
    y = np.array([max(1, tr.discoveries(T)) for tr in trials], dtype=float)
    xbar, ybar = x.mean(), y.mean()
    ratio = xbar / ybar
    if n > 1:
        sxx = x.var(ddof=1)
        syy = y.var(ddof=1)
        sxy = float(np.cov(x, y, ddof=1)[0, 1])
        var = (sxx - 2.0 * ratio * sxy + ratio * ratio * syy) / (n * ybar * ybar)
        se = math.sqrt(max(0.0, var))
    else:
        se = float("nan")
    return Estimate(ratio, se, n)


def estimate_power(trials: Sequence[TrialOutcome], T: int) -> Estimate:
    """Mean proportion of alternatives detected by time T."""
    if not trials:
        raise ValueError("need at least one trial")
    props = []
    for tr in trials:
        m1 = int(np.sum(tr.labels))
        props.append(tr.true_discoveries(T) / max(1, m1))
    arr = np.asarray(props)
    n = len(arr)
    se = float(arr.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    return Estimate(float(arr.mean()), se, n)


def wealth_curves(gamma: SpendingSequence, alpha: float, cdfs: Sequence[StepCdf],
                  horizon: int, realized_alphas: Sequence[float] | None = None):
    """Nominal and effective wealth trajectories over the horizon.

    Nominal assumes the scheduled levels alpha * gamma_t are fully spent;
    effective charges only the truly achieved level F_t of each critical
    value (the scheduled one, or ``realized_alphas`` when given).
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    nominal = np.empty(horizon)
    effective = np.empty(horizon)
    nom = eff = alpha
    for i in range(horizon):
        level = alpha * gamma.gamma(i + 1)
        spent = level if realized_alphas is None else realized_alphas[i]
        nom -= level
        eff -= cdfs[i](spent)
        nominal[i] = nom
        effective[i] = eff
    return nominal, effective


@dataclass
class EvalReport:
    """Flat grid of Monte-Carlo estimates, exportable as CSV or JSON."""

    rows: list[dict] = field(default_factory=list)
    audits_ok: bool = True

    def add(self, procedure: str, metric: str, est: Estimate, checkpoint: int, **keys):
        row = {"procedure": procedure, "metric": metric, "estimate": est.value,
               "se": est.se, "n_trials": est.n_trials, "checkpoint": checkpoint}
        row.update(keys)
        self.rows.append(row)

    def filter(self, **keys) -> list[dict]:
        return [r for r in self.rows
                if all(r.get(k) == v for k, v in keys.items())]

    def value(self, procedure: str, metric: str, **keys) -> float:
        rows = self.filter(procedure=procedure, metric=metric, **keys)
        if len(rows) != 1:
            raise KeyError(f"expected one row for {procedure}/{metric}/{keys}, got {len(rows)}")
        return rows[0]["estimate"]

    def to_csv(self, path):
        fields = sorted({k for r in self.rows for k in r})
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            for r in self.rows:
                out = dict(r)
                for k, v in out.items():
                    if isinstance(v, float):
                        out[k] = format(v, ".17g")
                writer.writerow(out)

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.rows, fh, indent=2)

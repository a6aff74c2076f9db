"""Two-sample binary experiment generator and Monte-Carlo sweep harness.

Each stream position is a two-group comparison of N binary responses,
summarized as a 2x2 table and tested with the two-sided Fisher exact test.
Null positions use equal success probabilities (a low and a mid level);
alternative positions give one group an elevated probability.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .core import StepCdf
from .discrete import fisher_margins, support_to_bound
from .evaluate import (EvalReport, TrialOutcome, estimate_fwer, estimate_mfdr,
                       estimate_power)
from .procedures import (FWER_NAMES, OnlineProcedure, ProcedureConfig,
                         audit_fwer_budget, audit_mfdr_budget, make_procedure)
from .spending import make_kernel, make_power_law

PLACEMENTS = ("B", "E", "BM", "BE", "ME", "Random")
SWEEP_AXES = ("placement", "pi_a", "N", "p3", "lambda", "h")


@dataclass(frozen=True)
class ScenarioConfig:
    m: int = 500
    pi_a: float = 0.3
    n_subjects: int = 25
    p3: float = 0.4
    p_null_low: float = 0.01
    p_null_mid: float = 0.10
    placement: str = "Random"
    seed: int = 0
    n_trials: int = 1000

    def __post_init__(self):
        if self.placement not in PLACEMENTS:
            raise ValueError(f"unknown placement {self.placement!r}")
        for p in (self.pi_a, self.p3, self.p_null_low, self.p_null_mid):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")

    @property
    def m3(self) -> int:
        return round(self.pi_a * self.m)

    @property
    def m2(self) -> int:
        return (self.m - self.m3) // 2

    @property
    def m1(self) -> int:
        # the odd remainder of the null split goes to the low-probability group
        return self.m - self.m3 - self.m2


@dataclass
class TrialStream:
    tables: list[tuple[int, int, int, int]]
    labels: np.ndarray
    pvals: list[float]
    bounds: list[StepCdf]


def place_signal(m: int, m3: int, scheme: str, rng: np.random.Generator | None = None):
    """1-based alternative positions for a placement scheme.

    Two-block schemes put ceil(m3/2) at the first named anchor and the rest
    at the second (anchors: stream start, floor(m/2), stream end), shifting
    blocks just enough to keep them disjoint within the stream.
    """
    if m3 > m:
        raise ValueError("m3 must not exceed m")
    if m3 == 0:
        return tuple()
    b1 = m3 - m3 // 2
    b2 = m3 // 2
    mid = m // 2
    if scheme == "B":
        idx = range(1, m3 + 1)
    elif scheme == "E":
        idx = range(m - m3 + 1, m + 1)
    elif scheme == "BM":
        start2 = max(mid, b1 + 1)
        idx = list(range(1, b1 + 1)) + list(range(start2, start2 + b2))
    elif scheme == "BE":
        idx = list(range(1, b1 + 1)) + list(range(m - b2 + 1, m + 1))
    elif scheme == "ME":
        start1 = min(mid, m - b2 - b1 + 1)
        idx = list(range(start1, start1 + b1)) + list(range(m - b2 + 1, m + 1))
    elif scheme == "Random":
        if rng is None:
            raise ValueError("Random placement needs an rng")
        idx = sorted(int(i) + 1 for i in rng.choice(m, size=m3, replace=False))
    else:
        raise ValueError(f"unknown placement {scheme!r}")
    return tuple(idx)


def generate_trial(config: ScenarioConfig, trial_index: int) -> TrialStream:
    """One simulated stream; deterministic given (seed, trial_index)."""
    rng = np.random.default_rng(np.random.SeedSequence((config.seed, trial_index)))
    m, n = config.m, config.n_subjects
    h1 = place_signal(m, config.m3, config.placement, rng)
    labels = np.zeros(m, dtype=bool)
    for i in h1:
        labels[i - 1] = True
    # null positions in stream order: the first m1 use the low level
    probs = np.empty(m)
    null_seen = 0
    for i in range(m):
        if labels[i]:
            probs[i] = config.p_null_mid
        else:
            probs[i] = config.p_null_low if null_seen < config.m1 else config.p_null_mid
            null_seen += 1
    probs_a = np.where(labels, config.p3, probs)
    succ_a = rng.binomial(n, probs_a)
    succ_b = rng.binomial(n, probs)
    tables = []
    pvals = []
    bounds = []
    for i in range(m):
        a = int(succ_a[i])
        c = int(succ_b[i])
        tables.append((a, n - a, c, n - c))
        c1 = a + c
        if n == 0 or c1 == 0 or c1 == 2 * n:
            pvals.append(1.0)
            bounds.append(support_to_bound((1.0,)))
            continue
        pv, lo, support = fisher_margins(n, n, c1)
        pvals.append(pv[a - lo])
        bounds.append(support_to_bound(support))
    return TrialStream(tables=tables, labels=labels, pvals=pvals, bounds=bounds)


def dump_stream_csv(stream: TrialStream, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "a", "b", "c", "d", "label"])
        for i, tab in enumerate(stream.tables):
            writer.writerow([i + 1, *tab, int(stream.labels[i])])


_GAMMA_CACHE: dict[float, object] = {}


def _shared_power_law(q: float):
    if q not in _GAMMA_CACHE:
        _GAMMA_CACHE[q] = make_power_law(q)
    return _GAMMA_CACHE[q]


@dataclass(frozen=True)
class ProcSpec:
    """Named procedure with its tuning parameters; defaults follow the
    standard experimental configuration (level 0.2, adaptivity 0.5,
    power-law 1.6 spending, kernel bandwidth 100 for FWER / 10 for mFDR)."""

    name: str
    alpha: float = 0.2
    lam: float = 0.5
    w0: float | None = None
    q: float = 1.6
    h: int | None = None

    def build(self, lam: float | None = None, h: int | None = None) -> OnlineProcedure:
        lam = self.lam if lam is None else lam
        if h is None:
            h = self.h if self.h is not None else (100 if self.name in FWER_NAMES or
                                                   self.name in ("rho-ob", "rho-aob") else 10)
        investing = self.name in ("lord", "rho-lord", "alord", "rho-alord", "saffron-capped")
        w0 = self.w0 if self.w0 is not None else (self.alpha / 2 if investing else None)
        cfg = ProcedureConfig(
            alpha=self.alpha,
            gamma=_shared_power_law(self.q),
            lam=lam,
            w0=w0,
            gamma_prime=make_kernel(h) if self.name.startswith("rho-") else None,
        )
        return make_procedure(self.name, cfg)

    @property
    def is_fwer(self) -> bool:
        return self.name in FWER_NAMES


@dataclass
class TrialResults:
    outcomes: dict[str, list[TrialOutcome]]
    audits_ok: bool
    audit_failures: list[tuple[str, int]] = field(default_factory=list)


def run_trials(scenario: ScenarioConfig, specs: Sequence[ProcSpec],
               lam: float | None = None, h: int | None = None,
               audit: bool = False) -> TrialResults:
    """Run each procedure over each simulated trial, in fixed trial order."""
    outcomes: dict[str, list[TrialOutcome]] = {s.name: [] for s in specs}
    failures: list[tuple[str, int]] = []
    for i in range(scenario.n_trials):
        stream = generate_trial(scenario, i)
        for spec in specs:
            proc = spec.build(lam=lam, h=h)
            step = proc.step
            for p, bound in zip(stream.pvals, stream.bounds):
                step(p, bound)
            outcomes[spec.name].append(TrialOutcome(proc.rejects, stream.labels))
            if audit:
                rep = (audit_fwer_budget(proc) if spec.is_fwer
                       else audit_mfdr_budget(proc))
                if not rep.ok:
                    failures.append((spec.name, i))
    return TrialResults(outcomes=outcomes, audits_ok=not failures,
                        audit_failures=failures)


def _report_from_outcomes(report: EvalReport, outcomes, T: int, **keys):
    for name, trials in outcomes.items():
        report.add(name, "fwer", estimate_fwer(trials, T), T, **keys)
        report.add(name, "mfdr", estimate_mfdr(trials, T), T, **keys)
        report.add(name, "power", estimate_power(trials, T), T, **keys)


def run_sweep(base_config: ScenarioConfig, axis: str, values: Sequence,
              specs: Sequence[ProcSpec], audit: bool = False) -> EvalReport:
    """Vary one parameter over a grid, keeping the rest fixed."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}")
    report = EvalReport()
    all_ok = True
    for value in values:
        scenario = base_config
        lam = h = None
        if axis == "placement":
            scenario = replace(base_config, placement=value)
        elif axis == "pi_a":
            scenario = replace(base_config, pi_a=value)
        elif axis == "N":
            scenario = replace(base_config, n_subjects=value)
        elif axis == "p3":
            scenario = replace(base_config, p3=value)
        elif axis == "lambda":
            lam = value
        elif axis == "h":
            h = value
        results = run_trials(scenario, specs, lam=lam, h=h, audit=audit)
        all_ok = all_ok and results.audits_ok
        _report_from_outcomes(report, results.outcomes, scenario.m,
                              axis=axis, value=value)
    report.audits_ok = all_ok
    return report

"""Online procedure state machines.

Four base rules (online Bonferroni, its adaptive variant, alpha-investing
LORD, adaptive LORD) and their rewarded counterparts, which add back the
unspent fraction of past critical values through a reward spending
sequence.  The step API is emit_alpha() -> observe(p, bound): the critical
value for time T is fixed before the p-value at T is seen.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .core import Decision, IDENTITY_BOUND, StepCdf
from .spending import SpendingSequence

BASE_NAMES = ("ob", "aob", "lord", "alord")
PROCEDURE_NAMES = (
    "ob", "rho-ob", "aob", "rho-aob",
    "lord", "rho-lord", "alord", "rho-alord", "saffron-capped",
)
FWER_NAMES = ("ob", "rho-ob", "aob", "rho-aob")


@dataclass
class ProcedureConfig:
    """Parameters shared by all procedures; w0 applies to investing rules only."""

    alpha: float
    gamma: SpendingSequence
    lam: float = 0.0
    w0: float | None = None
    gamma_prime: SpendingSequence | None = None
    saffron_capping: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0.0 <= self.lam < 1.0:
            raise ValueError("lambda must lie in [0, 1)")
        if self.w0 is not None and not 0.0 < self.w0 < self.alpha:
            raise ValueError("w0 must lie in (0, alpha)")


class OnlineProcedure:
    """One single-stream online testing state machine.

    ``base`` selects the base rule; ``rewarded`` adds the reward convolution
    and (for adaptive bases) the carry term for sub-lambda p-values.
    """

    def __init__(self, base: str, config: ProcedureConfig, rewarded: bool = False,
                 use_lambda: bool | None = None):
        if base not in BASE_NAMES:
            raise ValueError(f"unknown base rule {base!r}")
        if base in ("lord", "alord") and config.w0 is None:
            raise ValueError(f"{base} requires an initial wealth w0")
        if rewarded and config.gamma_prime is None:
            raise ValueError("rewarded procedures require gamma_prime")
        if config.saffron_capping and base != "alord":
            raise ValueError("capping applies to the alord base only")
        self.base = base
        self.config = config
        self.rewarded = rewarded
        adaptive = base in ("aob", "alord") if use_lambda is None else use_lambda
        self._lam = config.lam if adaptive else 0.0
        self._alpha = config.alpha
        self._w0 = config.w0
        self._g = config.gamma
        self._gp = config.gamma_prime
        self._capped = config.saffron_capping
        # history, appended once per step
        self.pvals: list[float] = []
        self.lam_flags: list[bool] = []       # p_t >= lambda
        self.alphas: list[float] = []
        self.bases: list[float] = []
        self.sures: list[float] = []
        self.epss: list[float] = []
        self.rhos: list[float] = []
        self.rejects: list[bool] = []
        self.cdfs: list[StepCdf] = []
        self.taus: list[int] = []
        self.r_count = 0
        self._clocks: list[int] = [1]         # current re-indexation clock values
        self._ledger: list[tuple[int, float]] = []   # eligible positive rewards
        self._win_t: deque[int] = deque()
        self._win_rho: deque[float] = deque()
        self._t_next = 1
        self._pending: tuple[float, float, float, float] | None = None

    # -- base rules ---------------------------------------------------------

    def _base_alpha(self, T: int) -> float:
        g = self._g
        g._extend(T)
        memo = g._memo
        if self.base == "ob":
            return self._alpha * memo[T]
        if self.base == "aob":
            return self._alpha * (1.0 - self._lam) * memo[self._clocks[0]]
        alpha, w0 = self._alpha, self._w0
        taus = self.taus
        if self.base == "lord":
            b1 = memo[T - taus[0]] if taus else 0.0
            s = 0.0
            for tau in taus[1:]:
                s += memo[T - tau]
            return w0 * memo[T] + (alpha - w0) * b1 + alpha * s
        # alord
        clocks = self._clocks
        b1 = memo[clocks[1]] if len(clocks) > 1 else 0.0
        s = 0.0
        for c in clocks[2:]:
            s += memo[c]
        val = (1.0 - self._lam) * (w0 * memo[clocks[0]] + (alpha - w0) * b1 + alpha * s)
        if self._capped:
            val = min(self._lam, val)
        return val

    # -- reward convolution -------------------------------------------------

    def _sure_part(self, T: int) -> float:
        gp = self._gp
        if gp.kind == "kernel":
            h = gp.h
            wt, wr = self._win_t, self._win_rho
            cutoff = T - h
            while wt and wt[0] < cutoff:
                wt.popleft()
                wr.popleft()
            return sum(wr) / h if wr else 0.0
        if gp.kind == "explicit":
            vals = gp.values
            lo = T - len(vals)
            ledger = self._ledger
            i = len(ledger)
            while i > 0 and ledger[i - 1][0] >= lo:
                i -= 1
            s = 0.0
            for t, rho in ledger[i:]:
                s += vals[T - t - 1] * rho
            return s
        s = 0.0
        for t, rho in self._ledger:
            s += gp.gamma(T - t) * rho
        return s

    # -- step API ------------------------------------------------------------

    def emit_alpha(self) -> float:
        """Critical value for the next time index; must precede observe()."""
        if self._pending is not None:
            raise RuntimeError("observe() must be called before the next emit_alpha()")
        T = self._t_next
        base = self._base_alpha(T)
        if self.rewarded:
            sure = self._sure_part(T)
            if T > 1 and not self.lam_flags[-1]:
                eps = self.alphas[-1] - self.bases[-1]
            else:
                eps = 0.0
            alpha = base + sure + eps
        else:
            sure = eps = 0.0
            alpha = base
        self._pending = (alpha, base, sure, eps)
        return alpha

    def observe(self, p: float, bound: StepCdf | None = None) -> Decision:
        """Consume the p-value (and its null bound) for the emitted time index."""
        if self._pending is None:
            raise RuntimeError("emit_alpha() must be called before observe()")
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        alpha, base, sure, eps = self._pending
        self._pending = None
        bound = IDENTITY_BOUND if bound is None else bound
        t = self._t_next
        reject = p <= alpha
        rho = alpha - bound(alpha)
        eligible = p >= self._lam
        self.pvals.append(p)
        self.lam_flags.append(eligible)
        self.alphas.append(alpha)
        self.bases.append(base)
        self.sures.append(sure)
        self.epss.append(eps)
        self.rhos.append(rho)
        self.rejects.append(reject)
        self.cdfs.append(bound)
        if self.rewarded and eligible and rho > 0.0:
            if self._gp.kind == "kernel":
                self._win_t.append(t)
                self._win_rho.append(rho)
            else:
                self._ledger.append((t, rho))
        if eligible:
            clocks = self._clocks
            for j in range(len(clocks)):
                clocks[j] += 1
        if reject:
            self.taus.append(t)
            self._clocks.append(1)
            self.r_count += 1
        self._t_next = t + 1
        return Decision(t=t, p=p, alpha=alpha, reject=reject, rho=rho,
                        base_part=base, sure_part=sure, eps_part=eps,
                        r_count=self.r_count)

    def step(self, p: float, bound: StepCdf | None = None) -> Decision:
        self.emit_alpha()
        return self.observe(p, bound)

    def run(self, stream) -> list[Decision]:
        """Run over (p, bound) pairs or StreamRecord objects, in order."""
        out = []
        for item in stream:
            if hasattr(item, "null_bound"):
                out.append(self.step(item.p, item.null_bound))
            else:
                p, bound = item
                out.append(self.step(p, bound))
        return out

    @property
    def t(self) -> int:
        """Number of completed steps."""
        return self._t_next - 1

    def reindex_clock(self, j: int, T: int) -> int:
        """Recompute the j-th re-indexation clock at time T from the history."""
        return reindex_clock(self.lam_flags, self.taus, j, T)

    def trace_rows(self):
        """Per-step records for export (decision components plus tau snapshots)."""
        taus: list[int] = []
        for i in range(len(self.pvals)):
            if self.rejects[i]:
                taus.append(i + 1)
            yield {
                "t": i + 1,
                "p": self.pvals[i],
                "alpha": self.alphas[i],
                "base_part": self.bases[i],
                "sure_part": self.sures[i],
                "epsilon_part": self.epss[i],
                "rho": self.rhos[i],
                "reject": self.rejects[i],
                "R": len(taus),
                "tau_list": tuple(taus),
            }


def make_procedure(name: str, config: ProcedureConfig) -> OnlineProcedure:
    """Build a procedure by its public name."""
    if name == "saffron-capped":
        if not config.saffron_capping:
            config = ProcedureConfig(alpha=config.alpha, gamma=config.gamma,
                                     lam=config.lam, w0=config.w0,
                                     gamma_prime=config.gamma_prime,
                                     saffron_capping=True)
        return OnlineProcedure("alord", config, rewarded=False)
    if name not in PROCEDURE_NAMES:
        raise ValueError(f"unknown procedure {name!r}")
    rewarded = name.startswith("rho-")
    base = name[4:] if rewarded else name
    return OnlineProcedure(base, config, rewarded=rewarded)


def generic_reward(base: str, config: ProcedureConfig,
                   gamma_prime: SpendingSequence | None = None,
                   lam: float | None = None) -> OnlineProcedure:
    """Reward any base rule satisfying the budget condition.

    The rewarded critical value is the base value plus the reward
    convolution over eligible past times plus the carry term for a
    sub-lambda previous p-value.
    """
    if gamma_prime is not None or lam is not None:
        config = ProcedureConfig(
            alpha=config.alpha, gamma=config.gamma,
            lam=config.lam if lam is None else lam,
            w0=config.w0,
            gamma_prime=config.gamma_prime if gamma_prime is None else gamma_prime,
            saffron_capping=config.saffron_capping,
        )
    use_lambda = config.lam > 0.0
    return OnlineProcedure(base, config, rewarded=True, use_lambda=use_lambda)


def reindex_clock(lam_flags: Sequence[bool], taus: Sequence[int], j: int, T: int) -> int:
    """Clock value at time T: counts steps whose preceding p-value was eligible.

    Clock 0 starts at time 1; clock j >= 1 starts right after the j-th
    rejection and reads 0 up to it.
    """
    if j < 0 or T < 1:
        raise ValueError("need j >= 0 and T >= 1")
    if j == 0:
        start = 2
    else:
        if j > len(taus):
            return 0
        tau = taus[j - 1]
        if T <= tau:
            return 0
        start = tau + 2
    # lam_flags[t-1] holds the eligibility of p_t
    return 1 + sum(1 for t in range(start, T + 1) if lam_flags[t - 2])


def alpha_tilde_oracle(base_values: Sequence[float], p_values: Sequence[float],
                       cdfs: Sequence[StepCdf], gamma_prime: SpendingSequence,
                       lam: float, T: int) -> float:
    """Dual-form recursion for the rewarded critical value (test oracle).

    Computes the value at time T from full prefixes, independently of the
    incremental machinery.
    """
    tilde: list[float] = []
    for s in range(1, T + 1):
        v = base_values[s - 1]
        for t in range(1, s):
            if p_values[t - 1] >= lam:
                a = gamma_prime.prefix(s - t)
                v += base_values[t - 1]
                v -= (1.0 - a) * tilde[t - 1] + a * cdfs[t - 1](tilde[t - 1])
        tilde.append(v)
    return tilde[T - 1]


@dataclass(frozen=True)
class AuditReport:
    ok: bool
    worst_excess: float
    worst_t: int | None
    n_checked: int


def _audit(proc: OnlineProcedure, mfdr: bool, alphas=None, tol: float = 1e-9) -> AuditReport:
    lam = proc._lam
    alpha = proc.config.alpha
    budget = (1.0 - lam) * alpha
    n = len(proc.pvals)
    worst = 0.0
    worst_t = None
    r = 0
    if proc.rewarded or alphas is not None:
        vals = list(proc.alphas) if alphas is None else list(alphas)
        spent = [proc.cdfs[i](vals[i]) for i in range(n)]
    else:
        vals = proc.bases
        spent = vals
    cum = 0.0
    for i in range(n):
        if mfdr and proc.rejects[i]:
            r += 1
        rhs = budget * max(1, r) if mfdr else budget
        excess = vals[i] + cum - rhs
        if excess > worst:
            worst, worst_t = excess, i + 1
        if proc.lam_flags[i]:
            cum += spent[i]
    return AuditReport(ok=worst <= tol, worst_excess=worst, worst_t=worst_t, n_checked=n)


def audit_fwer_budget(proc: OnlineProcedure, alphas=None, tol: float = 1e-9) -> AuditReport:
    """Check the family-wise error budget along the realized history.

    For base procedures this is the condition on the base values; for
    rewarded procedures the realized critical values enter through their
    truly spent level F_t(alpha_t).  ``alphas`` substitutes a corrupted
    sequence for negative-control testing.
    """
    return _audit(proc, mfdr=False, alphas=alphas, tol=tol)


def audit_mfdr_budget(proc: OnlineProcedure, alphas=None, tol: float = 1e-9) -> AuditReport:
    """Same as the FWER audit but against the rejection-scaled budget."""
    return _audit(proc, mfdr=True, alphas=alphas, tol=tol)

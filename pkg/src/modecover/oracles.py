"""Randomized and exhaustive oracles certifying the coverage bounds as
executable properties of the implementation.

Each oracle draws adversarial-within-budget instances, evaluates the claimed
inequality exactly, and reports trials, violations, and the worst margin.
Per-trial seeds derive from (master seed, trial index), so results are
independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boost import BoostConfig, mixture_support_masses, run_exact
from .bounds import (
    coverage_guarantee,
    single_round_cover_bound,
    worst_subset,
)
from .core import ContractViolation, DiscreteDistribution
from .generators import AdversarialCoverageGenerator, adversarial_make, greedy_uncover_region

SLACK = 1e-12


@dataclass(frozen=True)
class OracleReport:
    name: str
    trials: int
    violations: int
    worst_margin: float
    seed: int
    params: dict = field(default_factory=dict)
    first_violation: dict | None = None

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_json_dict(self) -> dict:
        out = {
            "suite": self.name,
            "trials": self.trials,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "seed": self.seed,
            "params": self.params,
        }
        if self.first_violation is not None:
            out["first_violation"] = self.first_violation
        return out


def _trial_rng(seed, trial: int):
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(trial))))


def _index_support(n: int) -> np.ndarray:
    return np.arange(n, dtype=float)[:, None]


def _most_adversarial_beta(p, q, delta, gamma, rng):
    """Exact covered q-mass for the worst of a greedy and a random victim."""
    support = _index_support(len(p))
    base = DiscreteDistribution(support, q)
    regions = [greedy_uncover_region(q, p, gamma, delta)]
    size = int(rng.integers(1, len(p)))
    regions.append(rng.choice(len(p), size=size, replace=False))
    best = None
    for region in regions:
        g_dist, _ = adversarial_make(base, gamma, region)
        covered = g_dist.mass >= delta * p
        beta = float(q[covered].sum())
        if best is None or beta < best[0]:
            best = (beta, g_dist.mass, np.asarray(region, dtype=int))
    return best


def check_single_round_cover(
    trials: int,
    support_size: int = 10,
    delta: float = 0.25,
    gamma: float = 0.1,
    seed=0,
    threshold_shift: float = 0.0,
) -> OracleReport:
    """Random (P, Q) pairs with a budget-gamma adversarial G must keep the
    probability of drawing a delta-covered point at least 1 - 2*delta - gamma.

    `threshold_shift` tightens the claimed bound; the oracle has power ---
    a positive shift of a few percent does produce violations.
    """
    if not (0.0 < delta <= 1.0 and 0.0 <= gamma <= 1.0):
        raise ContractViolation("delta in (0,1], gamma in [0,1] required")
    bound = single_round_cover_bound(delta, gamma) + threshold_shift
    violations = 0
    worst = math.inf
    first = None
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        p = rng.dirichlet(np.ones(support_size))
        q = rng.dirichlet(np.ones(support_size))
        beta, g_mass, region = _most_adversarial_beta(p, q, delta, gamma, rng)
        margin = beta - bound
        worst = min(worst, margin)
        if margin < -SLACK:
            violations += 1
            if first is None:
                first = {
                    "trial": trial,
                    "p": p.tolist(),
                    "q": q.tolist(),
                    "g": g_mass.tolist(),
                    "region": region.tolist(),
                    "beta": beta,
                    "bound": bound,
                }
    return OracleReport(
        name="single_round_cover",
        trials=trials,
        violations=violations,
        worst_margin=worst,
        seed=seed,
        params={
            "support_size": support_size,
            "delta": delta,
            "gamma": gamma,
            "threshold_shift": threshold_shift,
        },
        first_violation=first,
    )


def check_quarter_cover(trials: int, seed=0) -> OracleReport:
    """Quarter-threshold specialization: delta = 1/4, gamma = 0.1, and the
    covered-draw probability must reach 0.4."""
    report = check_single_round_cover(
        trials, support_size=10, delta=0.25, gamma=0.1, seed=seed
    )
    return OracleReport(
        name="quarter_cover",
        trials=report.trials,
        violations=report.violations,
        worst_margin=report.worst_margin,
        seed=seed,
        params={"delta": 0.25, "gamma": 0.1, "threshold": 0.4},
        first_violation=report.first_violation,
    )


def _greedy_mass_subset(masses: np.ndarray, cap: float) -> np.ndarray:
    """Flags of a high-mass subset with total mass <= cap (greedy descending)."""
    order = np.argsort(-masses, kind="stable")
    flags = np.zeros(len(masses), dtype=bool)
    total = 0.0
    for i in order:
        if total + masses[i] <= cap + 1e-15:
            flags[i] = True
            total += masses[i]
    return flags


def check_weight_growth(
    trials: int,
    support_size: int = 16,
    rounds: int = 30,
    eps: float = 0.3,
    seed=0,
) -> OracleReport:
    """Total weight after T rounds never exceeds (1 + eps)^T when every
    round's doubled set holds at most eps of the round distribution."""
    if not 0.0 <= eps <= 1.0:
        raise ContractViolation("eps must be in [0, 1]")
    cap_log2 = rounds * math.log2(1.0 + eps)
    violations = 0
    worst = math.inf
    first = None
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        lw = np.log2(rng.dirichlet(np.ones(support_size)))
        log2_total = 0.0
        for _ in range(rounds):
            u = np.exp2(lw - lw.max())
            p_t = u / u.sum()
            flags = _greedy_mass_subset(p_t, eps)
            lw = lw + flags
            log2_total = lw.max() + math.log2(np.sum(np.exp2(lw - lw.max())))
        margin = cap_log2 - (log2_total - 0.0)
        worst = min(worst, margin)
        if margin < -1e-9:
            violations += 1
            if first is None:
                first = {"trial": trial, "log2_final": log2_total, "cap": cap_log2}
    return OracleReport(
        name="weight_growth",
        trials=trials,
        violations=violations,
        worst_margin=worst,
        seed=seed,
        params={"support_size": support_size, "rounds": rounds, "eps": eps},
        first_violation=first,
    )


def _all_subset_masses(masses: np.ndarray) -> np.ndarray:
    """(2^n,) subset masses via the n-bit mask matrix."""
    n = len(masses)
    codes = np.arange(1 << n, dtype=np.uint32)
    bits = ((codes[:, None] >> np.arange(n)) & 1).astype(float)
    return bits @ masses


def check_mixture_cover_exhaustive(
    support_size: int = 8,
    rounds: int = 24,
    delta: float = 0.25,
    gamma: float = 0.1,
    eta: float = 0.2,
    trials: int = 100,
    seed=0,
) -> OracleReport:
    """Run the exact boosting loop against a budget-gamma adversary and check
    the mixture's subset coverage bound over every qualifying subset."""
    if support_size > 12:
        raise ContractViolation("exhaustive subset check capped at 12 points")
    bound = coverage_guarantee(delta, gamma, eta)
    mass_lb = 2.0 ** (-eta * rounds)
    violations = 0
    worst = math.inf
    first = None
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        p = rng.dirichlet(np.ones(support_size))
        target = DiscreteDistribution(_index_support(support_size), p)
        cfg = BoostConfig(
            generator=AdversarialCoverageGenerator(gamma=gamma, delta=delta),
            rounds=rounds,
            delta=delta,
            eta=eta,
            seed=int(rng.integers(2**32)),
        )
        mixture, trace = run_exact(target, cfg)
        g_star = mixture_support_masses(mixture, target.support)
        p_sub = _all_subset_masses(target.mass)
        g_sub = _all_subset_masses(g_star)
        qualifying = p_sub >= mass_lb
        qualifying[0] = False
        margins = g_sub[qualifying] - bound * p_sub[qualifying]
        if margins.size:
            m = float(margins.min())
            worst = min(worst, m)
            if m < -SLACK:
                violations += 1
                if first is None:
                    bad = int(np.flatnonzero(qualifying)[int(np.argmin(margins))])
                    first = {
                        "trial": trial,
                        "p": p.tolist(),
                        "g_star": g_star.tolist(),
                        "subset_code": bad,
                        "bound": bound,
                        "max_round_tv": trace.max_tv,
                    }
    return OracleReport(
        name="mixture_cover_exhaustive",
        trials=trials,
        violations=violations,
        worst_margin=worst,
        seed=seed,
        params={
            "support_size": support_size,
            "rounds": rounds,
            "delta": delta,
            "gamma": gamma,
            "eta": eta,
            "bound": bound,
            "mass_lb": mass_lb,
        },
        first_violation=first,
    )


def prefix_matches_exhaustive(
    ratios, masses, mass_lb: float
) -> tuple[bool, float, float]:
    """Compare the prefix heuristic with true subset minimization."""
    from .bounds import worst_subset_exhaustive

    pre = worst_subset(ratios, masses, mass_lb)
    exact = worst_subset_exhaustive(ratios, masses, mass_lb)
    return (
        abs(pre.ratio - exact.ratio) <= 1e-12,
        pre.ratio,
        exact.ratio,
    )

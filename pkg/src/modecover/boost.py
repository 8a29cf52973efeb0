"""The multiplicative-weights boosting loops.

Exact mode runs on a finite target distribution with generator-side point
masses, so the doubling test compares like with like. Empirical mode runs on
raw samples: each round resamples a training set by weight, fits the weak
generator, trains a discriminator, and doubles the weight of every sample
whose estimated coverage falls strictly below the threshold.

Round RNG streams are derived from (master seed, round, purpose), so traces
for rounds 1..t are unchanged by raising T.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    ConfigurationError,
    ContractViolation,
    DiscreteDistribution,
    UnsupportedOperation,
    WeightedDataset,
    double_weights,
    init_weights_empirical,
    init_weights_exact,
    normalize,
    uniform_on,
)
from .discriminator import (
    DiagnosticsAccumulator,
    DiscriminatorSpec,
    empirical_cover_test,
    train_discriminator,
)
from .divergences import tv_discrete
from .generators import AdversarialCoverageGenerator, HistogramGenerator, WeakGenerator

_PURPOSES = {"fit": 0, "resample": 1, "disc_pos": 2, "disc_neg": 3, "disc_train": 4}


class BoostRunError(RuntimeError):
    def __init__(self, round_index: int, message: str):
        self.round_index = round_index
        super().__init__(f"round {round_index}: {message}")


def round_rng_seed(master_seed, round_index: int, purpose: str):
    """Stable per-round, per-purpose seed material."""
    return np.random.SeedSequence(
        (int(master_seed), int(round_index), _PURPOSES[purpose])
    )


@dataclass(frozen=True)
class BoostConfig:
    generator: WeakGenerator
    rounds: int = 24
    delta: float = 0.25
    eta: float = 0.01
    seed: int = 0
    discriminator: DiscriminatorSpec | None = None
    resample_size: int | None = None
    disc_sample_size: int | None = None
    delta_prime: float | None = None
    minority_indices: np.ndarray | None = None

    def __post_init__(self):
        if self.rounds < 1:
            raise ConfigurationError("at least one round required")
        if not 0.0 < self.delta < 1.0:
            raise ConfigurationError("delta must lie in (0, 1)")
        if not 0.0 < self.eta < 1.0:
            raise ConfigurationError("eta must lie in (0, 1)")


@dataclass(frozen=True)
class GeneratorMixture:
    """Uniform ensemble of the per-round generators; no mixture weights."""

    generators: tuple[WeakGenerator, ...]

    def __post_init__(self):
        if not self.generators:
            raise ConfigurationError("mixture must hold at least one generator")

    @property
    def rounds(self) -> int:
        return len(self.generators)

    def to_config(self) -> dict:
        return {
            "rounds": self.rounds,
            "generators": [g.to_config() for g in self.generators],
        }


def mixture_pdf(mixture: GeneratorMixture, x) -> np.ndarray:
    """Pointwise mean of the member densities."""
    for gen in mixture.generators:
        if not gen.supports_exact_pdf:
            raise UnsupportedOperation("a member generator has no exact pdf")
    vals = [np.asarray(gen.pdf(x), dtype=float) for gen in mixture.generators]
    return sum(vals) / len(vals)


def mixture_support_masses(mixture: GeneratorMixture, points) -> np.ndarray:
    """Mean of the members' distributions restricted to a finite support."""
    vals = [gen.support_masses(points) for gen in mixture.generators]
    return sum(vals) / len(vals)


def mixture_sample(mixture: GeneratorMixture, count: int, seed) -> np.ndarray:
    """Per draw: choose a member uniformly, then draw one sample from it."""
    if count < 0:
        raise ContractViolation("count must be >= 0")
    if count == 0:
        return mixture.generators[0].sample(0, seed)
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, mixture.rounds, size=count)
    sub_seeds = rng.integers(2**32, size=mixture.rounds)
    out = None
    for j in range(mixture.rounds):
        sel = np.flatnonzero(picks == j)
        if not sel.size:
            continue
        pts = mixture.generators[j].sample(
            sel.size, np.random.SeedSequence((int(sub_seeds[j]), j))
        )
        if out is None:
            out = np.empty((count, pts.shape[1]))
        out[sel] = pts
    return out


@dataclass(frozen=True)
class RoundRecord:
    round: int
    log2_total: float  # W_t before this round's doubling
    doubled: np.ndarray  # per-sample flags
    n_doubled: int
    tv_gen_vs_pt: float | None = None
    minority_ratio: float | None = None
    epsilon_prime: float | None = None
    lambda_min: float | None = None


@dataclass(frozen=True)
class RoundTrace:
    init_log2_weights: np.ndarray
    rounds: tuple[RoundRecord, ...]
    final_log2_total: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(
            "round,log2_W,n_doubled,tv_gen_vs_pt,minority_ratio,"
            "epsilon_prime,lambda_min\n"
        )
        for r in self.rounds:
            cells = [
                str(r.round),
                repr(r.log2_total),
                str(r.n_doubled),
                "" if r.tv_gen_vs_pt is None else repr(r.tv_gen_vs_pt),
                "" if r.minority_ratio is None else repr(r.minority_ratio),
                "" if r.epsilon_prime is None else repr(r.epsilon_prime),
                "" if r.lambda_min is None else repr(r.lambda_min),
            ]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    @property
    def max_tv(self) -> float | None:
        vals = [r.tv_gen_vs_pt for r in self.rounds if r.tv_gen_vs_pt is not None]
        return max(vals) if vals else None


def _minority_share(ws: WeightedDataset, indices) -> float | None:
    if indices is None:
        return None
    rel = ws.relative_weights()
    return float(rel[np.asarray(indices, dtype=int)].sum())


def run_exact(target: DiscreteDistribution, cfg: BoostConfig):
    """Boosting with exact densities: the weak generator's point masses are
    compared directly against the target's, and weights double on strict
    shortfall below delta times the target mass.
    """
    if not cfg.generator.supports_exact_pdf:
        raise ConfigurationError("exact mode needs an exact-pdf generator")
    gen_spec = cfg.generator
    if isinstance(gen_spec, AdversarialCoverageGenerator) and gen_spec.target is None:
        gen_spec = replace(gen_spec, target=target, delta=cfg.delta)
    ws = init_weights_exact(target)
    generators = []
    records = []
    for t in range(1, cfg.rounds + 1):
        p_t = normalize(ws)
        try:
            gen = gen_spec.fit(p_t, round_rng_seed(cfg.seed, t, "fit"))
            g_mass = gen.support_masses(target.support)
        except Exception as exc:  # noqa: BLE001 - context added, then re-raised
            raise BoostRunError(t, f"generator fit failed: {exc}") from exc
        flags = g_mass < cfg.delta * target.mass
        records.append(
            RoundRecord(
                round=t,
                log2_total=ws.log2_total,
                doubled=flags,
                n_doubled=int(flags.sum()),
                tv_gen_vs_pt=tv_discrete(
                    DiscreteDistribution(target.support, g_mass), p_t
                ),
                minority_ratio=_minority_share(ws, cfg.minority_indices),
            )
        )
        generators.append(gen)
        ws = double_weights(ws, flags)
    trace = RoundTrace(
        init_log2_weights=np.log2(target.mass),
        rounds=tuple(records),
        final_log2_total=ws.log2_total,
    )
    return GeneratorMixture(tuple(generators)), trace


def _measured_tv(gen: WeakGenerator, p_hat: DiscreteDistribution) -> float | None:
    """Per-round TV between the fitted generator and the round distribution.

    Histograms compare bin masses (their native discretization); other
    exact-pdf generators compare their support-renormalized masses, which is
    a proxy and labeled as such in the docs.
    """
    if isinstance(gen, HistogramGenerator):
        data_bins = gen.bin_masses_of(p_hat)
        return 0.5 * float(np.abs(gen.bin_mass - data_bins).sum())
    if not gen.supports_exact_pdf:
        return None
    g_mass = gen.support_masses(p_hat.support)
    return tv_discrete(DiscreteDistribution(p_hat.support, g_mass), p_hat)


def run_empirical(points, cfg: BoostConfig, exact_target_pdf=None, discriminator_factory=None):
    """Boosting on raw samples with discriminator-estimated density ratios.

    When `exact_target_pdf` is given and the generator has an exact pdf, the
    per-round discriminator diagnostics are measured against the exact
    doubling test and reported in the trace. `discriminator_factory` replaces
    classifier training, e.g. with an ideal-response stub; it is called as
    factory(p_hat, fitted_generator, pos, neg, seed) and must return an
    object with a ``predict(points)`` method.
    """
    ws = init_weights_empirical(points)
    n = ws.size
    if n < 2:
        raise ConfigurationError("need at least two samples")
    disc_spec = cfg.discriminator or DiscriminatorSpec()
    if discriminator_factory is None:
        discriminator_factory = lambda p_hat, gen, pos, neg, seed: train_discriminator(
            pos, neg, disc_spec, seed
        )
    resample = cfg.resample_size or n
    n_disc = cfg.disc_sample_size or n
    diag = None
    if exact_target_pdf is not None and cfg.generator.supports_exact_pdf:
        diag = DiagnosticsAccumulator(n, cfg.delta, cfg.delta_prime)
        p_vals = np.asarray(
            exact_target_pdf(ws.points)
            if callable(exact_target_pdf)
            else exact_target_pdf,
            dtype=float,
        )
    generators = []
    records = []
    for t in range(1, cfg.rounds + 1):
        p_hat = normalize(ws)
        try:
            train_pts = p_hat.sample(resample, round_rng_seed(cfg.seed, t, "resample"))
            gen = cfg.generator.fit(
                uniform_on(train_pts), round_rng_seed(cfg.seed, t, "fit")
            )
        except Exception as exc:  # noqa: BLE001
            raise BoostRunError(t, f"generator fit failed: {exc}") from exc
        try:
            pos = p_hat.sample(n_disc, round_rng_seed(cfg.seed, t, "disc_pos"))
            neg = gen.sample(n_disc, round_rng_seed(cfg.seed, t, "disc_neg"))
            disc = discriminator_factory(
                p_hat, gen, pos, neg, round_rng_seed(cfg.seed, t, "disc_train")
            )
        except Exception as exc:  # noqa: BLE001
            raise BoostRunError(t, f"discriminator training failed: {exc}") from exc
        flags = empirical_cover_test(disc, ws, cfg.delta)
        eps_prime = lam_min = None
        if diag is not None:
            g_vals = np.asarray(gen.pdf(ws.points), dtype=float)
            eps_prime = diag.add_round(g_vals, p_vals, ws.relative_weights(), flags)
            lam_min = diag.finalize().lambda_min
        records.append(
            RoundRecord(
                round=t,
                log2_total=ws.log2_total,
                doubled=flags,
                n_doubled=int(flags.sum()),
                tv_gen_vs_pt=_measured_tv(gen, p_hat),
                minority_ratio=_minority_share(ws, cfg.minority_indices),
                epsilon_prime=eps_prime,
                lambda_min=lam_min,
            )
        )
        generators.append(gen)
        ws = double_weights(ws, flags)
    trace = RoundTrace(
        init_log2_weights=np.full(n, -np.log2(float(n))),
        rounds=tuple(records),
        final_log2_total=ws.log2_total,
    )
    return GeneratorMixture(tuple(generators)), trace

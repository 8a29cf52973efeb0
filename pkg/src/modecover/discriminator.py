"""Probabilistic classifier used to estimate the generated/target density
ratio on each boosting round, plus quality diagnostics measured against
exact densities when those are available.

The classifier is a logistic model over either standardized affine features
or radial basis functions at k-means centers of the pooled sample. Training
is plain full-batch gradient descent with a fixed schedule, so a fixed seed
gives bit-identical weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    ConfigurationError,
    ContractViolation,
    UnsupportedOperation,
    WeightedDataset,
    as_points,
)
from .generators import kmeans_pp_centers, lloyd_iterations


@dataclass(frozen=True)
class DiscriminatorSpec:
    feature_map: str = "rbf"  # 'rbf' | 'affine'
    n_centers: int = 64
    max_iter: int = 25  # ridge-Newton iterations
    l2: float = 1e-4
    clamp: float = 1e-6
    center_subsample: int = 4096  # cap for k-means and the scale median

    def __post_init__(self):
        if self.feature_map not in ("rbf", "affine"):
            raise ConfigurationError(f"unknown feature map {self.feature_map!r}")
        if not 0.0 < self.clamp <= 0.01:
            raise ConfigurationError("clamp must be in (0, 0.01]")


@dataclass(frozen=True)
class Discriminator:
    """Trained classifier; predict() is the probability a point came from
    the target-side sample rather than the generator."""

    spec: DiscriminatorSpec
    weights: np.ndarray  # (n_features + 1,), bias last
    centers: np.ndarray | None  # rbf only
    scale: float | None  # rbf only
    mean: np.ndarray | None  # affine only
    std: np.ndarray | None  # affine only
    loss_path: tuple[float, ...] = field(default=(), repr=False)

    def features(self, x) -> np.ndarray:
        pts = as_points(x)
        if self.spec.feature_map == "rbf":
            z2 = np.sum(
                (pts[:, None, :] - self.centers[None, :, :]) ** 2, axis=2
            )
            phi = np.exp(-z2 / (2.0 * self.scale**2))
        else:
            phi = (pts - self.mean) / self.std
        return np.concatenate([phi, np.ones((len(pts), 1))], axis=1)

    def predict(self, x) -> np.ndarray:
        logits = self.features(x) @ self.weights
        probs = 1.0 / (1.0 + np.exp(-logits))
        return np.clip(probs, self.spec.clamp, 1.0 - self.spec.clamp)


@dataclass(frozen=True)
class ExactDiscriminator:
    """Stand-in with the ideal response p_t / (p_t + g_t) on a fixed support.

    Used where the worked examples specify the optimal classifier, and to
    isolate the boosting loop from classifier noise in tests.
    """

    support: np.ndarray
    response: np.ndarray
    clamp: float = 1e-6

    def predict(self, x) -> np.ndarray:
        pts = as_points(x)
        out = np.empty(len(pts))
        for i, p in enumerate(pts):
            hit = np.flatnonzero(np.all(self.support == p, axis=1))
            if hit.size == 0:
                raise ContractViolation("query off the stub's support")
            out[i] = self.response[hit[0]]
        return np.clip(out, self.clamp, 1.0 - self.clamp)


def exact_discriminator(p_mass, g_mass, support, clamp: float = 1e-6) -> ExactDiscriminator:
    p = np.asarray(p_mass, dtype=float)
    g = np.asarray(g_mass, dtype=float)
    denom = p + g
    resp = np.where(denom > 0, p / np.maximum(denom, 1e-300), 0.5)
    return ExactDiscriminator(as_points(support), resp, clamp)


def _rbf_setup(pooled: np.ndarray, spec: DiscriminatorSpec, rng):
    pts = pooled
    if len(pts) > spec.center_subsample:
        idx = rng.choice(len(pts), size=spec.center_subsample, replace=False)
        pts = pts[idx]
    ones = np.ones(len(pts))
    k = min(spec.n_centers, len(np.unique(pts, axis=0)))
    for attempt in range(3):
        centers = kmeans_pp_centers(pts, ones, k, rng)
        centers = lloyd_iterations(pts, ones, centers, iters=10)
        if len(np.unique(np.round(centers, 12), axis=0)) == len(centers):
            break
        if attempt == 2:
            raise ConfigurationError("degenerate rbf centers after 3 reseeds")
    # kernel width matched to the basis resolution: the median distance from
    # a pooled point to its nearest center (a global median pairwise distance
    # cannot resolve small far-apart clusters)
    d2 = np.sum((pts[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    scale = float(np.sqrt(np.median(d2.min(axis=1))))
    return centers, max(scale, 1e-6)


def _penalized_loss(phi, y, w, l2) -> float:
    logits = phi @ w
    # mean cross entropy, computed stably from the logits
    return float(np.mean(np.logaddexp(0.0, logits) - y * logits) + l2 * w @ w)


def train_discriminator(pos, neg, spec: DiscriminatorSpec | None = None, seed=0) -> Discriminator:
    """Fit the L2-regularized logistic separator of two sample sets.

    pos are samples from the round's target distribution (label 1), neg from
    the generator (label 0). Optimized by ridge-regularized Newton steps with
    backtracking, so the penalized loss is non-increasing and rare-region
    features converge as fast as dense ones.
    """
    spec = spec or DiscriminatorSpec()
    pos = as_points(pos)
    neg = as_points(neg)
    rng = np.random.default_rng(seed)
    pooled = np.concatenate([pos, neg])
    centers = scale = mean = std = None
    if spec.feature_map == "rbf":
        centers, scale = _rbf_setup(pooled, spec, rng)
    else:
        mean = pooled.mean(axis=0)
        std = np.maximum(pooled.std(axis=0), 1e-12)
    model = Discriminator(spec, np.zeros(1), centers, scale, mean, std)
    phi = model.features(pooled)
    y = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    n, p = phi.shape
    w = np.zeros(p)
    loss = _penalized_loss(phi, y, w, spec.l2)
    losses = [loss]
    eye = np.eye(p)
    for _ in range(spec.max_iter):
        logits = phi @ w
        probs = 1.0 / (1.0 + np.exp(-logits))
        grad = phi.T @ (probs - y) / n + 2.0 * spec.l2 * w
        curv = np.maximum(probs * (1.0 - probs), 1e-10)
        hess = (phi * curv[:, None]).T @ phi / n + (2.0 * spec.l2 + 1e-10) * eye
        step = np.linalg.solve(hess, grad)
        t = 1.0
        for _ in range(30):
            trial = _penalized_loss(phi, y, w - t * step, spec.l2)
            if trial <= loss:
                break
            t *= 0.5
        else:
            break  # no descent direction left at float precision
        w = w - t * step
        loss = trial
        losses.append(loss)
        if len(losses) > 1 and losses[-2] - losses[-1] < 1e-12 * (1.0 + losses[-2]):
            break
    return replace(model, weights=w, loss_path=tuple(losses))


def ratio_estimate(disc, x) -> np.ndarray:
    """Estimated generated/target density ratio, 1/D - 1, clamp-bounded."""
    return 1.0 / disc.predict(x) - 1.0


def empirical_cover_test(disc, ws: WeightedDataset, delta: float) -> np.ndarray:
    """Doubling flags for every sample: estimated-ratio times relative weight
    strictly below delta / n. Equality keeps the weight unchanged."""
    ratios = ratio_estimate(disc, ws.points)
    rel = np.exp2(ws.log2_weight - ws.log2_total)
    return ratios * rel < delta / ws.size


@dataclass(frozen=True)
class DiscriminatorDiagnostics:
    """How far the classifier's doubling decisions sit from the exact test.

    epsilon_prime: round-distribution mass of points that were truly covered
    yet doubled. lambda_min / lambda_mean: across rounds and points, the
    (worst / target-weighted mean) fraction of not-doubled rounds that truly
    covered the point at the weaker threshold delta_prime.
    """

    epsilon_prime: float
    lambda_min: float
    lambda_mean: float
    delta_prime: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon_prime <= 1.0:
            raise ContractViolation("epsilon_prime outside [0, 1]")
        if not 0.0 <= self.lambda_min <= 1.0:
            raise ContractViolation("lambda_min outside [0, 1]")


class DiagnosticsAccumulator:
    """Collects per-round exact-vs-classifier comparisons over a boosting run."""

    def __init__(self, n_points: int, delta: float, delta_prime: float | None = None):
        self.delta = delta
        self.delta_prime = delta if delta_prime is None else delta_prime
        self.kept_rounds = np.zeros(n_points, dtype=int)
        self.covered_prime_rounds = np.zeros(n_points, dtype=int)
        self.epsilon_primes: list[float] = []

    def add_round(self, g_vals, p_vals, p_t_mass, flags) -> float:
        """Record one round; returns that round's epsilon_prime."""
        g = np.asarray(g_vals, dtype=float)
        p = np.asarray(p_vals, dtype=float)
        flags = np.asarray(flags, dtype=bool)
        covered = g >= self.delta * p
        eps = float(np.asarray(p_t_mass)[covered & flags].sum())
        self.epsilon_primes.append(eps)
        self.kept_rounds += ~flags
        self.covered_prime_rounds += g >= self.delta_prime * p
        return eps

    def finalize(self, p_mass=None) -> DiscriminatorDiagnostics:
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = np.where(
                self.kept_rounds > 0,
                np.minimum(1.0, self.covered_prime_rounds / np.maximum(self.kept_rounds, 1)),
                1.0,
            )
        if p_mass is None:
            p_mass = np.full(len(lam), 1.0 / len(lam))
        return DiscriminatorDiagnostics(
            epsilon_prime=max(self.epsilon_primes) if self.epsilon_primes else 0.0,
            lambda_min=float(lam.min()),
            lambda_mean=float(np.dot(np.asarray(p_mass), lam)),
            delta_prime=self.delta_prime,
        )


def diagnostics(
    disc, exact_g, exact_p, ws: WeightedDataset, delta: float, delta_prime: float | None = None
) -> DiscriminatorDiagnostics:
    """Single-round diagnostics of `disc` against exact densities.

    exact_g / exact_p are callables over points (or precomputed arrays).
    """
    g = exact_g(ws.points) if callable(exact_g) else np.asarray(exact_g, dtype=float)
    p = exact_p(ws.points) if callable(exact_p) else np.asarray(exact_p, dtype=float)
    if g is None or p is None:
        raise UnsupportedOperation("diagnostics need exact densities")
    flags = empirical_cover_test(disc, ws, delta)
    acc = DiagnosticsAccumulator(ws.size, delta, delta_prime)
    acc.add_round(g, p, ws.relative_weights(), flags)
    return acc.finalize(ws.relative_weights())

"""Weak density generators: classical models exposing fit, exact pdf, and
seeded sampling, plus a budget-limited adversarial generator for stress tests.

`fit` never mutates; it returns a fitted copy, so specs are reusable and
fitted models are safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    AnalyticDensity,
    ConfigurationError,
    ContractViolation,
    DiscreteDistribution,
    GridSpec,
    as_points,
)


class FitError(RuntimeError):
    """A generator could not be fit to the given distribution."""


class WeakGenerator:
    """Interface: fit(train, seed) -> fitted copy; pdf(x); sample(count, seed).

    `support_masses(points)` is the generator's own distribution restricted
    and renormalized to a finite support; the exact boosting loop compares
    those masses against target masses so both sides share one measure.
    """

    supports_exact_pdf: bool = True

    def fit(self, train: DiscreteDistribution, seed) -> "WeakGenerator":
        raise NotImplementedError

    def pdf(self, x) -> np.ndarray:
        raise NotImplementedError

    def sample(self, count: int, seed) -> np.ndarray:
        raise NotImplementedError

    def support_masses(self, points) -> np.ndarray:
        vals = np.asarray(self.pdf(as_points(points)), dtype=float)
        total = vals.sum()
        if total <= 0:
            raise FitError("generator assigns zero density to entire support")
        return vals / total

    def to_config(self) -> dict:
        raise NotImplementedError


def _require_fitted(obj, attr: str):
    if getattr(obj, attr) is None:
        raise ContractViolation("generator is not fitted")


# ---------------------------------------------------------------------------
# histogram
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HistogramGenerator(WeakGenerator):
    """Piecewise-constant density on a fixed grid.

    alpha blends a uniform floor into the fitted bin masses so no cell (and
    hence no data point) ever gets exactly zero density; the floor is part of
    the generator's measured TV distance to its training distribution.
    """

    grid: GridSpec | None = None
    alpha: float = 1e-9
    bin_mass: np.ndarray | None = None

    supports_exact_pdf = True

    def fit(self, train: DiscreteDistribution, seed=None) -> "HistogramGenerator":
        grid = self.grid
        if grid is None:
            raise ConfigurationError("histogram needs a grid before fitting")
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigurationError("alpha must be in [0, 1)")
        raw = np.zeros(grid.n_cells)
        np.add.at(raw, grid.locate(train.support), train.mass)
        mass = (1.0 - self.alpha) * raw + self.alpha / grid.n_cells
        return replace(self, bin_mass=mass)

    def pdf(self, x) -> np.ndarray:
        _require_fitted(self, "bin_mass")
        pts = as_points(x)
        inside = np.all((pts >= self.grid.lo) & (pts <= self.grid.hi), axis=1)
        out = np.zeros(len(pts))
        if np.any(inside):
            cells = self.grid.locate(pts[inside])
            out[inside] = self.bin_mass[cells] / self.grid.cell_volume
        return out

    def sample(self, count: int, seed) -> np.ndarray:
        _require_fitted(self, "bin_mass")
        if count < 0:
            raise ContractViolation("count must be >= 0")
        rng = np.random.default_rng(seed)
        cells = rng.choice(len(self.bin_mass), size=count, p=self.bin_mass)
        lo = self.grid.cell_lo(cells)
        width = (self.grid.hi - self.grid.lo) / self.grid.cells
        return lo + rng.random((count, self.grid.dim)) * width

    def bin_masses_of(self, dist: DiscreteDistribution) -> np.ndarray:
        """Project a discrete distribution onto this generator's bins."""
        out = np.zeros(self.grid.n_cells)
        np.add.at(out, self.grid.locate(dist.support), dist.mass)
        return out

    def to_config(self) -> dict:
        out = {
            "kind": "histogram",
            "alpha": self.alpha,
            "grid": {
                "lo": self.grid.lo.tolist(),
                "hi": self.grid.hi.tolist(),
                "cells": self.grid.cells,
            },
        }
        if self.bin_mass is not None:
            out["bin_mass"] = self.bin_mass.tolist()
        return out


# ---------------------------------------------------------------------------
# k-means helpers shared by the GMM and the discriminator feature map
# ---------------------------------------------------------------------------


def kmeans_pp_centers(points: np.ndarray, weights: np.ndarray, k: int, rng) -> np.ndarray:
    """Weighted k-means++ seeding: squared-distance-proportional draws."""
    n = len(points)
    probs = weights / weights.sum()
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.choice(n, p=probs)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        scores = probs * d2
        total = scores.sum()
        if total <= 0:  # all mass already on chosen centers
            centers[j] = points[rng.choice(n, p=probs)]
        else:
            centers[j] = points[rng.choice(n, p=scores / total)]
        d2 = np.minimum(d2, np.sum((points - centers[j]) ** 2, axis=1))
    return centers


def lloyd_iterations(
    points: np.ndarray, weights: np.ndarray, centers: np.ndarray, iters: int = 10
) -> np.ndarray:
    for _ in range(iters):
        d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        owner = np.argmin(d2, axis=1)
        for j in range(len(centers)):
            sel = owner == j
            wsum = weights[sel].sum()
            if wsum > 0:
                centers[j] = np.average(points[sel], axis=0, weights=weights[sel])
    return centers


# ---------------------------------------------------------------------------
# diagonal-covariance Gaussian mixture fit by weighted EM
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GmmGenerator(WeakGenerator):
    """Mixture of k axis-aligned Gaussians fit by EM on weighted points.

    k-means++ seeding, best of `restarts` by final log-likelihood, variances
    floored at `var_floor` to keep degenerate clusters recoverable.
    """

    k: int = 4
    max_iter: int = 100
    var_floor: float = 1e-6
    restarts: int = 3
    tol: float = 1e-8
    fitted: AnalyticDensity | None = None
    loglik_path: tuple[float, ...] = ()

    supports_exact_pdf = True

    def fit(self, train: DiscreteDistribution, seed) -> "GmmGenerator":
        pts, w = train.support, train.mass
        if self.k > len(np.unique(pts, axis=0)):
            raise FitError(
                f"k={self.k} exceeds the {len(pts)} distinct training points"
            )
        rng = np.random.default_rng(seed)
        best = None
        for _ in range(max(1, self.restarts)):
            model, path = self._fit_once(pts, w, rng)
            if best is None or path[-1] > best[1][-1]:
                best = (model, path)
        return replace(self, fitted=best[0], loglik_path=tuple(best[1]))

    def _fit_once(self, pts, w, rng):
        n, d = pts.shape
        centers = kmeans_pp_centers(pts, w, self.k, rng)
        centers = lloyd_iterations(pts, w, centers.copy(), iters=5)
        global_var = np.average(
            (pts - np.average(pts, axis=0, weights=w)) ** 2, axis=0, weights=w
        )
        var = np.tile(np.maximum(global_var, self.var_floor), (self.k, 1))
        pi = np.full(self.k, 1.0 / self.k)
        mu = centers
        path = []
        for _ in range(self.max_iter):
            log_resp = self._log_component_pdf(pts, pi, mu, var)
            m = log_resp.max(axis=1, keepdims=True)
            norm = m[:, 0] + np.log(np.sum(np.exp(log_resp - m), axis=1))
            path.append(float(np.dot(w, norm)))
            resp = np.exp(log_resp - norm[:, None])
            wr = resp * w[:, None]  # (n, k) posterior mass
            nk = wr.sum(axis=0)
            live = nk > 1e-12
            pi = np.where(live, nk, 1e-12)
            pi = pi / pi.sum()
            for j in range(self.k):
                if not live[j]:
                    # degenerate cluster: reseed on the weighted data
                    mu[j] = pts[rng.choice(n, p=w / w.sum())]
                    var[j] = np.maximum(global_var, self.var_floor)
                    continue
                mu[j] = wr[:, j] @ pts / nk[j]
                var[j] = np.maximum(
                    wr[:, j] @ (pts - mu[j]) ** 2 / nk[j], self.var_floor
                )
            if len(path) > 1 and abs(path[-1] - path[-2]) < self.tol * (
                1.0 + abs(path[-2])
            ):
                break
        model = AnalyticDensity(pi.copy(), mu.copy(), var.copy())
        log_resp = self._log_component_pdf(pts, pi, mu, var)
        m = log_resp.max(axis=1, keepdims=True)
        norm = m[:, 0] + np.log(np.sum(np.exp(log_resp - m), axis=1))
        path.append(float(np.dot(w, norm)))
        return model, path

    @staticmethod
    def _log_component_pdf(pts, pi, mu, var):
        z2 = (pts[:, None, :] - mu[None, :, :]) ** 2 / var
        lognorm = 0.5 * np.sum(np.log(2.0 * np.pi * var), axis=1)
        return np.log(pi)[None, :] - 0.5 * z2.sum(axis=2) - lognorm[None, :]

    def pdf(self, x) -> np.ndarray:
        _require_fitted(self, "fitted")
        return self.fitted.pdf(x)

    def sample(self, count: int, seed) -> np.ndarray:
        _require_fitted(self, "fitted")
        return self.fitted.sample(count, seed)

    def to_config(self) -> dict:
        out = {
            "kind": "gmm",
            "k": self.k,
            "max_iter": self.max_iter,
            "var_floor": self.var_floor,
            "restarts": self.restarts,
        }
        if self.fitted is not None:
            out["weights"] = self.fitted.weights.tolist()
            out["means"] = self.fitted.means.tolist()
            out["variances"] = self.fitted.variances.tolist()
        return out


# ---------------------------------------------------------------------------
# kernel density generator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KdeGenerator(WeakGenerator):
    """Gaussian kernels on the training points; sampling re-draws a training
    point by weight and jitters it by the bandwidth."""

    bandwidth: float = 0.1
    centers: np.ndarray | None = None
    center_mass: np.ndarray | None = None

    supports_exact_pdf = True

    def fit(self, train: DiscreteDistribution, seed=None) -> "KdeGenerator":
        if self.bandwidth <= 0:
            raise ConfigurationError("bandwidth must be positive")
        return replace(self, centers=train.support, center_mass=train.mass)

    def pdf(self, x) -> np.ndarray:
        _require_fitted(self, "centers")
        pts = as_points(x)
        d = self.centers.shape[1]
        lognorm = d * (0.5 * math.log(2.0 * math.pi) + math.log(self.bandwidth))
        z2 = np.sum(
            (pts[:, None, :] - self.centers[None, :, :]) ** 2, axis=2
        ) / (2.0 * self.bandwidth**2)
        return np.exp(-z2 - lognorm) @ self.center_mass

    def sample(self, count: int, seed) -> np.ndarray:
        _require_fitted(self, "centers")
        if count < 0:
            raise ContractViolation("count must be >= 0")
        rng = np.random.default_rng(seed)
        idx = rng.choice(len(self.centers), size=count, p=self.center_mass)
        noise = rng.standard_normal((count, self.centers.shape[1]))
        return self.centers[idx] + self.bandwidth * noise

    def to_config(self) -> dict:
        out = {"kind": "kde", "bandwidth": self.bandwidth}
        if self.centers is not None:
            out["centers"] = self.centers.tolist()
            out["center_mass"] = self.center_mass.tolist()
        return out


# ---------------------------------------------------------------------------
# fixed finite family, maximum-likelihood selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FixedFamilyGenerator(WeakGenerator):
    """Chooses the candidate density maximizing weighted log-likelihood of
    the training distribution (ties go to the lowest index)."""

    candidates: tuple[AnalyticDensity, ...] = ()
    selected: int | None = None

    supports_exact_pdf = True

    def fit(self, train: DiscreteDistribution, seed=None) -> "FixedFamilyGenerator":
        if not self.candidates:
            raise ConfigurationError("candidate family is empty")
        scores = []
        for cand in self.candidates:
            with np.errstate(divide="ignore"):
                logs = np.log(np.maximum(cand.pdf(train.support), 1e-300))
            scores.append(float(np.dot(train.mass, logs)))
        return replace(self, selected=int(np.argmax(scores)))

    @property
    def chosen(self) -> AnalyticDensity:
        _require_fitted(self, "selected")
        return self.candidates[self.selected]

    def pdf(self, x) -> np.ndarray:
        return self.chosen.pdf(as_points(x))

    def sample(self, count: int, seed) -> np.ndarray:
        return self.chosen.sample(count, seed)

    def to_config(self) -> dict:
        return {
            "kind": "fixed_family",
            "n_candidates": len(self.candidates),
            "selected": self.selected,
        }


# ---------------------------------------------------------------------------
# budgeted adversarial generator (test instrument)
# ---------------------------------------------------------------------------


def adversarial_make(base: DiscreteDistribution, gamma: float, region, seed=None):
    """Remove up to `gamma` mass from `region` (proportionally) and push it
    onto the complement (proportionally). Returns (distribution, achieved_tv);
    achieved_tv < gamma only when the region holds less mass than the budget.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ContractViolation("gamma must be in [0, 1]")
    region = np.asarray(region, dtype=int)
    mask = np.zeros(base.size, dtype=bool)
    mask[region] = True
    if gamma == 0.0 or not mask.any():
        return DiscreteDistribution(base.support, base.mass.copy()), 0.0
    if mask.all():
        raise ContractViolation("region must leave room to redistribute")
    inside = float(base.mass[mask].sum())
    outside = 1.0 - inside
    removed = min(gamma, inside)
    if outside <= 0:
        raise ContractViolation("no mass outside region to scale up")
    mass = base.mass.copy()
    mass[mask] *= 1.0 - removed / inside if inside > 0 else 0.0
    mass[~mask] *= 1.0 + removed / outside
    mass = mass / mass.sum()  # guard rounding drift
    return DiscreteDistribution(base.support, mass), removed


def greedy_uncover_region(
    base_mass: np.ndarray, target_mass: np.ndarray, gamma: float, delta: float
) -> np.ndarray:
    """Pick the removal region that most reduces coverage of the target.

    Sweeps prefixes of points sorted by base/target ratio (all points, and
    covered points only) and keeps the prefix whose post-removal covered
    base-mass is smallest.
    """
    ratio = base_mass / np.maximum(target_mass, 1e-300)
    order_all = np.lexsort((np.arange(len(ratio)), ratio))
    covered = ratio >= delta
    order_cov = order_all[covered[order_all]]
    best_region = order_all[:1]
    best_beta = np.inf
    for order in (order_all, order_cov):
        for k in range(1, len(order) + 1):
            region = order[:k]
            if len(region) == len(base_mass):
                break  # must leave a non-empty complement
            beta = _beta_after_removal(base_mass, target_mass, region, gamma, delta)
            if beta < best_beta - 1e-15:
                best_beta = beta
                best_region = region
    return np.asarray(best_region, dtype=int)


def _beta_after_removal(base_mass, target_mass, region, gamma, delta) -> float:
    mask = np.zeros(len(base_mass), dtype=bool)
    mask[region] = True
    inside = float(base_mass[mask].sum())
    removed = min(gamma, inside)
    g = base_mass.copy()
    if inside > 0:
        g[mask] *= 1.0 - removed / inside
    g[~mask] *= 1.0 + removed / (1.0 - inside)
    covered = g >= delta * target_mass
    return float(base_mass[covered].sum())


@dataclass(frozen=True)
class AdversarialCoverageGenerator(WeakGenerator):
    """Worst-case-within-budget generator: a copy of its training
    distribution with exactly `gamma` TV moved off a victim region.

    `victim` is 'greedy' (region chosen to minimize coverage of `target`),
    an explicit index array naming the region, or a callable mapping the
    training distribution to indices. Used to realize the per-round TV
    premise of the coverage theorem at its boundary.
    """

    gamma: float = 0.1
    victim: object = "greedy"
    delta: float = 0.25
    target: DiscreteDistribution | None = None
    fitted_dist: DiscreteDistribution | None = None
    achieved_tv: float | None = None

    supports_exact_pdf = True

    def fit(self, train: DiscreteDistribution, seed=None) -> "AdversarialCoverageGenerator":
        target = self.target if self.target is not None else train
        if isinstance(self.victim, str):
            if self.victim != "greedy":
                raise ConfigurationError(f"unknown victim rule {self.victim!r}")
            region = greedy_uncover_region(
                train.mass, target.mass, self.gamma, self.delta
            )
        elif callable(self.victim):
            region = np.asarray(self.victim(train), dtype=int)
        else:
            region = np.asarray(self.victim, dtype=int)
        dist, achieved = adversarial_make(train, self.gamma, region)
        return replace(self, fitted_dist=dist, achieved_tv=achieved)

    def pdf(self, x) -> np.ndarray:
        """Point masses of the perturbed distribution (counting measure)."""
        _require_fitted(self, "fitted_dist")
        pts = as_points(x)
        out = np.zeros(len(pts))
        support = self.fitted_dist.support
        for i, p in enumerate(pts):
            hit = np.flatnonzero(np.all(support == p, axis=1))
            if hit.size:
                out[i] = self.fitted_dist.mass[hit[0]]
        return out

    def support_masses(self, points) -> np.ndarray:
        pts = as_points(points)
        if pts.shape == self.fitted_dist.support.shape and np.array_equal(
            pts, self.fitted_dist.support
        ):
            return self.fitted_dist.mass
        return super().support_masses(points)

    def sample(self, count: int, seed) -> np.ndarray:
        _require_fitted(self, "fitted_dist")
        return self.fitted_dist.sample(count, seed)

    def to_config(self) -> dict:
        out = {"kind": "adversarial", "gamma": self.gamma, "delta": self.delta}
        if self.fitted_dist is not None:
            out["mass"] = self.fitted_dist.mass.tolist()
            out["achieved_tv"] = self.achieved_tv
        return out


GENERATOR_KINDS = ("histogram", "gmm", "kde", "fixed_family", "adversarial")


def generator_from_config(config: dict, default_grid: GridSpec | None = None) -> WeakGenerator:
    """Build an unfitted generator from the CLI's JSON configuration."""
    kind = config.get("kind")
    if kind == "histogram":
        grid = default_grid
        if "grid" in config:
            g = config["grid"]
            grid = GridSpec(np.asarray(g["lo"]), np.asarray(g["hi"]), int(g["cells"]))
        elif "cells" in config and default_grid is not None:
            grid = GridSpec(default_grid.lo, default_grid.hi, int(config["cells"]))
        if grid is None:
            raise ConfigurationError("histogram config needs a grid")
        return HistogramGenerator(grid=grid, alpha=config.get("alpha", 1e-9))
    if kind == "gmm":
        return GmmGenerator(
            k=int(config.get("k", 4)),
            max_iter=int(config.get("max_iter", 100)),
            var_floor=float(config.get("var_floor", 1e-6)),
            restarts=int(config.get("restarts", 3)),
        )
    if kind == "kde":
        return KdeGenerator(bandwidth=float(config.get("bandwidth", 0.1)))
    if kind == "fixed_family":
        cands = tuple(
            AnalyticDensity(c["weights"], c["means"], c["variances"])
            for c in config.get("candidates", [])
        )
        return FixedFamilyGenerator(candidates=cands)
    if kind == "adversarial":
        return AdversarialCoverageGenerator(
            gamma=float(config.get("gamma", 0.1)),
            victim=config.get("victim", "greedy"),
            delta=float(config.get("delta", 0.25)),
        )
    raise ConfigurationError(f"unknown generator kind {kind!r}")

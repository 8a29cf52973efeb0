"""Core data model: points, finite distributions, Gaussian mixtures, and the
multiplicative weight state.

Weights are kept in log base 2 so that a point doubled in every one of T
rounds stays representable (its raw weight grows like 2^T). Doubling is then
an exact ``+1.0`` on the stored exponent, and all normalizations go through a
max-shifted sum, which keeps small worked examples bit-exact.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtr

MASS_TOL = 1e-9


class ConfigurationError(ValueError):
    """Raised when an input or hyperparameter cannot define a valid object."""


class ContractViolation(ValueError):
    """Raised when a caller breaks a documented precondition."""


class UnsupportedOperation(RuntimeError):
    """Raised when an operation needs a capability the object does not have."""


def as_points(points) -> np.ndarray:
    """Coerce input to a float (n, d) array of finite coordinates."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
        raise ConfigurationError(
            f"points must form a non-empty (n, d) array, got shape {pts.shape}"
        )
    if not np.all(np.isfinite(pts)):
        raise ConfigurationError("point coordinates must be finite")
    return pts


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability masses on a finite set of distinct points."""

    support: np.ndarray  # (n, d)
    mass: np.ndarray  # (n,)

    def __post_init__(self):
        support = as_points(self.support)
        mass = np.asarray(self.mass, dtype=float)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "mass", mass)
        if mass.ndim != 1 or mass.shape[0] != support.shape[0]:
            raise ConfigurationError("support and mass lengths differ")
        if np.any(mass < 0) or not np.all(np.isfinite(mass)):
            raise ConfigurationError("masses must be finite and nonnegative")
        if abs(mass.sum() - 1.0) > MASS_TOL:
            raise ConfigurationError(f"masses sum to {mass.sum()!r}, not 1")
        if len(np.unique(support, axis=0)) != support.shape[0]:
            raise ConfigurationError("support points must be distinct")

    @property
    def size(self) -> int:
        return self.support.shape[0]

    @property
    def dim(self) -> int:
        return self.support.shape[1]

    def sample(self, count: int, seed) -> np.ndarray:
        """Draw `count` i.i.d. support points with probability `mass`."""
        if count < 0:
            raise ContractViolation("count must be >= 0")
        rng = np.random.default_rng(seed)
        idx = rng.choice(self.size, size=count, p=self.mass)
        return self.support[idx]


def uniform_on(points) -> DiscreteDistribution:
    """Aggregate a point multiset into the uniform empirical distribution."""
    pts = as_points(points)
    support, counts = _aggregate(pts, np.ones(len(pts)))
    return DiscreteDistribution(support, counts / len(pts))


def _aggregate(points: np.ndarray, values: np.ndarray):
    """Sum `values` over duplicate rows of `points`, keeping first-seen order."""
    _, first, inverse = np.unique(
        points, axis=0, return_index=True, return_inverse=True
    )
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    groups = rank[inverse]
    sums = np.zeros(len(order))
    np.add.at(sums, groups, values)
    return points[np.sort(first)], sums


@dataclass(frozen=True)
class WeightedDataset:
    """Per-sample multiplicative weights in log2, plus their log2 total.

    Duplicate points are legitimate distinct samples (multiset semantics);
    `normalize` aggregates them back into a distribution over distinct points.
    """

    points: np.ndarray  # (n, d)
    log2_weight: np.ndarray  # (n,)
    round: int
    log2_total: float

    def __post_init__(self):
        points = as_points(self.points)
        lw = np.asarray(self.log2_weight, dtype=float)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "log2_weight", lw)
        if lw.shape != (points.shape[0],):
            raise ConfigurationError("log2_weight length must match points")
        if not np.all(np.isfinite(lw)):
            raise ConfigurationError("log2 weights must be finite")
        if self.round < 1:
            raise ConfigurationError("round starts at 1")
        if abs(self.log2_total - log2_weight_sum(lw)) > MASS_TOL:
            raise ConfigurationError("log2_total inconsistent with weights")

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def relative_weights(self) -> np.ndarray:
        """Per-sample w_i / W as plain floats (max-shifted, overflow safe)."""
        u = np.exp2(self.log2_weight - self.log2_weight.max())
        return u / u.sum()


def log2_weight_sum(log2_weights: np.ndarray) -> float:
    """log2 of the sum of 2**log2_weights, evaluated with a max shift."""
    m = float(np.max(log2_weights))
    return m + float(np.log2(np.sum(np.exp2(log2_weights - m))))


def init_weights_empirical(points) -> WeightedDataset:
    """Start every sample at weight 1/n (total weight exactly 1)."""
    pts = as_points(points)
    n = pts.shape[0]
    lw = np.full(n, -np.log2(float(n)))
    return WeightedDataset(pts, lw, round=1, log2_total=0.0)


def init_weights_exact(target: DiscreteDistribution) -> WeightedDataset:
    """Start each support point at its target mass (total weight exactly 1)."""
    if np.any(target.mass <= 0):
        raise ConfigurationError(
            "exact weight init needs strictly positive masses"
        )
    lw = np.log2(target.mass)
    return WeightedDataset(target.support, lw, round=1, log2_total=0.0)


def normalize(ws: WeightedDataset) -> DiscreteDistribution:
    """Current round distribution: mass_i = w_i / W, duplicates aggregated."""
    u = np.exp2(ws.log2_weight - ws.log2_weight.max())
    per_sample = u / u.sum()
    support, mass = _aggregate(ws.points, per_sample)
    return DiscreteDistribution(support, mass)


def double_weights(ws: WeightedDataset, doubled) -> WeightedDataset:
    """Double the weight of every flagged sample and advance the round."""
    flags = np.asarray(doubled, dtype=bool)
    if flags.shape != (ws.size,):
        raise ContractViolation(
            f"flag count {flags.shape} does not match {ws.size} samples"
        )
    lw = ws.log2_weight + flags
    return WeightedDataset(
        ws.points, lw, round=ws.round + 1, log2_total=log2_weight_sum(lw)
    )


@dataclass(frozen=True)
class AnalyticDensity:
    """Mixture of axis-aligned Gaussians with known density and sampler."""

    weights: np.ndarray  # (K,)
    means: np.ndarray  # (K, d)
    variances: np.ndarray  # (K, d), diagonal covariance entries

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        mu = np.atleast_2d(np.asarray(self.means, dtype=float))
        var = np.atleast_2d(np.asarray(self.variances, dtype=float))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "variances", var)
        if np.any(w < 0) or abs(w.sum() - 1.0) > MASS_TOL:
            raise ConfigurationError("component weights must be >= 0, sum 1")
        if mu.shape != var.shape or mu.shape[0] != w.shape[0]:
            raise ConfigurationError("component shapes inconsistent")
        if np.any(var <= 0):
            raise ConfigurationError("variances must be positive")

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def pdf(self, x) -> np.ndarray:
        """Density at one point (scalar out) or at (m, d) points ((m,) out)."""
        pts = np.asarray(x, dtype=float)
        scalar = pts.ndim <= 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.dim:
            raise ContractViolation(
                f"query dim {pts.shape[1]} != density dim {self.dim}"
            )
        # (m, K, d) residuals; product kernel over d
        z2 = (pts[:, None, :] - self.means[None, :, :]) ** 2 / self.variances
        lognorm = 0.5 * np.sum(np.log(2.0 * np.pi * self.variances), axis=1)
        comp = np.exp(-0.5 * z2.sum(axis=2) - lognorm)
        out = comp @ self.weights
        return float(out[0]) if scalar else out

    def sample(self, count: int, seed) -> np.ndarray:
        if count < 0:
            raise ContractViolation("count must be >= 0")
        rng = np.random.default_rng(seed)
        comp = rng.choice(len(self.weights), size=count, p=self.weights)
        noise = rng.standard_normal((count, self.dim))
        return self.means[comp] + noise * np.sqrt(self.variances[comp])

    def box_probability(self, lo, hi) -> float:
        """Exact mass of the axis-aligned box [lo, hi] via CDF products."""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        sd = np.sqrt(self.variances)
        per_axis = ndtr((hi - self.means) / sd) - ndtr((lo - self.means) / sd)
        return float(np.dot(self.weights, np.prod(per_axis, axis=1)))


def analytic_pdf(density: AnalyticDensity, x) -> float:
    """Evaluate a Gaussian-mixture density at a single point."""
    return float(density.pdf(np.atleast_1d(np.asarray(x, dtype=float))))


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned box split into `cells` equal intervals per axis."""

    lo: np.ndarray
    hi: np.ndarray
    cells: int

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo.shape != hi.shape or np.any(lo >= hi):
            raise ConfigurationError("grid needs lo < hi per axis")
        if self.cells < 2:
            raise ConfigurationError("at least 2 cells per axis")

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def cell_volume(self) -> float:
        return float(np.prod((self.hi - self.lo) / self.cells))

    @property
    def n_cells(self) -> int:
        return self.cells**self.dim

    def axes(self) -> list[np.ndarray]:
        """Node coordinates per axis, cells + 1 points each."""
        return [
            np.linspace(self.lo[j], self.hi[j], self.cells + 1)
            for j in range(self.dim)
        ]

    def nodes(self) -> np.ndarray:
        """All grid nodes as an ((cells+1)^d, d) array, C order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def locate(self, points) -> np.ndarray:
        """Flat cell index of each point; out-of-box points clip to edge cells."""
        pts = as_points(points)
        if pts.shape[1] != self.dim:
            raise ContractViolation("point dim does not match grid dim")
        width = (self.hi - self.lo) / self.cells
        idx = np.floor((pts - self.lo) / width).astype(int)
        idx = np.clip(idx, 0, self.cells - 1)
        flat = idx[:, 0]
        for j in range(1, self.dim):
            flat = flat * self.cells + idx[:, j]
        return flat

    def cell_lo(self, flat_index: np.ndarray) -> np.ndarray:
        """Lower corner of each flat-indexed cell."""
        idx = np.empty((len(flat_index), self.dim), dtype=int)
        rem = np.asarray(flat_index)
        for j in range(self.dim - 1, -1, -1):
            idx[:, j] = rem % self.cells
            rem = rem // self.cells
        width = (self.hi - self.lo) / self.cells
        return self.lo + idx * width


def bounding_grid(points, cells: int, pad: float = 1e-6) -> GridSpec:
    """Grid covering the data bounding box, padded so no point sits on hi."""
    pts = as_points(points)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    return GridSpec(lo - pad * span, hi + pad * span, cells)


def save_points_csv(path, points, mode_ids=None) -> None:
    """Write points as CSV: header row, d numeric columns, optional mode_id."""
    pts = as_points(points)
    header = [f"x{j}" for j in range(pts.shape[1])]
    if mode_ids is not None:
        mode_ids = np.asarray(mode_ids, dtype=int)
        if mode_ids.shape != (pts.shape[0],):
            raise ContractViolation("mode_ids length must match points")
        header.append("mode_id")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, row in enumerate(pts):
            out = [repr(float(v)) for v in row]
            if mode_ids is not None:
                out.append(str(int(mode_ids[i])))
            writer.writerow(out)


def load_points_csv(path):
    """Read the CSV point format; returns (points, mode_ids or None)."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigurationError(f"{path}: empty file, header required")
        rows = list(reader)
    if not rows:
        raise ConfigurationError(f"{path}: no data rows")
    has_mode = header[-1].strip() == "mode_id"
    d = len(header) - (1 if has_mode else 0)
    if d < 1:
        raise ConfigurationError(f"{path}: no coordinate columns")
    pts = np.empty((len(rows), d))
    modes = np.empty(len(rows), dtype=int) if has_mode else None
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ConfigurationError(f"{path}: row {i + 2} has wrong arity")
        pts[i] = [float(v) for v in row[:d]]
        if has_mode:
            modes[i] = int(row[d])
    return as_points(pts), modes

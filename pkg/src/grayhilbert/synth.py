"""Seeded synthetic point clouds with controlled tail behaviour.

Generators cover the distribution families the sparsity measure must
distinguish: uniform background noise versus clusters whose radial
spread is log-normal or Pareto (heavy-tailed), plus a mixture.  All
randomness flows from numpy's PCG64 via ``default_rng(seed)``, so a spec
plus seed reproduces the same cloud on any platform.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .tree import PointCloud

DISTRIBUTIONS = ("uniform", "lognormal-cluster", "pareto-cluster", "mixture")


@dataclass(frozen=True)
class SynthSpec:
    distribution: str
    n: int
    count: int
    seed: int = 42
    clusters: int = 16
    mu: float = -6.0        # log-scale of lognormal radial displacement
    sigma: float = 0.5      # shape of lognormal radial displacement
    alpha: float = 2.5      # pareto tail exponent (> 1)
    scale: float = 1e-4     # pareto minimum radius
    uniform_fraction: float = 0.5  # mixture: share of background points

    def __post_init__(self) -> None:
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}; expected one of {DISTRIBUTIONS}")
        if self.count < 1 or self.n < 1 or self.n > 63:
            raise ValueError("count must be >= 1 and n in 1..63")
        if self.clusters < 1:
            raise ValueError("clusters must be >= 1")
        if self.sigma < 0 or self.scale <= 0:
            raise ValueError("sigma must be >= 0 and scale > 0")
        if self.alpha <= 1:
            raise ValueError("alpha must exceed 1")
        if not 0.0 <= self.uniform_fraction <= 1.0:
            raise ValueError("uniform_fraction must lie in [0, 1]")


def _fold_unit(x: np.ndarray) -> np.ndarray:
    """Reflect into [0, 1): period-2 triangle map, then clamp the closed end."""
    y = np.mod(x, 2.0)
    y = np.where(y >= 1.0, 2.0 - y, y)
    return np.minimum(y, np.nextafter(1.0, 0.0))


def _clustered(rng: np.random.Generator, count: int, n: int, clusters: int, radii: np.ndarray) -> np.ndarray:
    centers = rng.random((clusters, n))
    assign = rng.integers(0, clusters, count)
    direction = rng.normal(size=(count, n))
    norms = np.linalg.norm(direction, axis=1)
    norms[norms == 0.0] = 1.0
    direction /= norms[:, None]
    return _fold_unit(centers[assign] + radii[:, None] * direction)


def generate(spec: SynthSpec) -> PointCloud:
    """Deterministic cloud for ``spec``; ids are the row numbers."""
    rng = np.random.default_rng(spec.seed)
    if spec.distribution == "uniform":
        pts = rng.random((spec.count, spec.n))
    elif spec.distribution == "lognormal-cluster":
        radii = rng.lognormal(spec.mu, spec.sigma, spec.count)
        pts = _clustered(rng, spec.count, spec.n, spec.clusters, radii)
    elif spec.distribution == "pareto-cluster":
        radii = spec.scale * (1.0 + rng.pareto(spec.alpha, spec.count))
        pts = _clustered(rng, spec.count, spec.n, spec.clusters, radii)
    else:  # mixture
        background = round(spec.count * spec.uniform_fraction)
        uni = rng.random((background, spec.n))
        radii = rng.lognormal(spec.mu, spec.sigma, spec.count - background)
        clu = _clustered(rng, spec.count - background, spec.n, spec.clusters, radii)
        pts = np.concatenate([uni, clu], axis=0)
    return PointCloud(pts, np.arange(spec.count, dtype=np.int64))


def cloud_to_csv(cloud: PointCloud, delimiter: str = ",") -> str:
    """CSV text in the shape the ingest loader consumes (header x0..x{n-1})."""
    buf = io.StringIO()
    buf.write(delimiter.join(f"x{i}" for i in range(cloud.n)) + "\n")
    for row in cloud.points:
        buf.write(delimiter.join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue()

"""Index-quality metrics: splitting pressure, capacity, capacity ratio, sparsity.

For a tree T over a cloud S, ``omega`` is the fraction of non-empty
leaves that are overfilled and ``Omega = (1 + omega) * (leaf count)`` is
the tree's storage capacity for the cloud.  The capacity ratio R compares
the scaled tree against the optimal-depth static tree; the local sparsity
exponent ``rho`` solves (2s)**rho = |S| / |L| * (1 + omega_static).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .curve import Scheme
from .tree import MAX_COORD_BITS, PointCloud, ScaledTree, TreeStats, build_scaled, static_profile

#: Column order of the CSV emitted by the CLI sweep.
CSV_COLUMNS = (
    "n",
    "s",
    "scheme",
    "k",
    "leaves_scaled",
    "leaves_static",
    "omega_scaled",
    "omega_static",
    "Omega_scaled",
    "Omega_static",
    "R",
    "rho",
)

RHO_TOLERANCE = 1e-9


class SparsityBoundsError(ValueError):
    """rho fell outside [0, 1] beyond tolerance (leaf-count convention mismatch,
    typically a duplicate-dominated cloud whose buckets exceed the capacity)."""

    def __init__(self, value: float):
        super().__init__(f"local sparsity exponent {value!r} outside [0, 1]")
        self.value = value


def _as_stats(stats: TreeStats | Sequence[int]) -> TreeStats:
    total, nonempty, overfilled = stats
    return TreeStats(int(total), int(nonempty), int(overfilled))


def omega(stats: TreeStats | Sequence[int]) -> float:
    """Overfilled share of the non-empty leaves: expected splitting pressure."""
    stats = _as_stats(stats)
    if stats.nonempty < 1:
        raise ValueError("omega is undefined for a tree with no non-empty leaves")
    return stats.overfilled / stats.nonempty

def capacity_Omega(stats: TreeStats | Sequence[int]) -> float:
    """(1 + omega) times the leaf count (empty leaves included)."""
    stats = _as_stats(stats)
    return (1.0 + omega(stats)) * stats.total_leaves


def static_k(num_points: int, s: int, n: int) -> int:
    """Iteration count of the optimal static index: ceil(log2(|S|/s) / n).

    Computed in exact integer arithmetic (smallest k with s * 2**(n*k) >= |S|);
    0 when the cloud fits one bucket.
    """
    if num_points < 1 or s < 1 or n < 1:
        raise ValueError("num_points, s and n must all be >= 1")
    if num_points <= s:
        return 0
    ratio = -(-num_points // s)  # ceil
    e = (ratio - 1).bit_length()  # smallest e with 2**e >= ratio
    return -(-e // n)


@dataclass(frozen=True)
class IndexMetrics:
    """Metric bundle for one (cloud, scheme, s) configuration."""

    n: int
    s: int
    scheme: str
    k: int
    leaves_scaled: int
    leaves_static: int
    nonempty_scaled: int
    overfilled_scaled: int
    nonempty_static: int
    overfilled_static: int
    omega_scaled: float
    omega_static: float
    Omega_scaled: float
    Omega_static: float
    R: float
    rho: float

    def to_dict(self) -> dict:
        out = {name: getattr(self, name) for name in CSV_COLUMNS}
        for extra in ("nonempty_scaled", "overfilled_scaled", "nonempty_static", "overfilled_static"):
            out[extra] = getattr(self, extra)
        return out

    def csv_row(self) -> str:
        return ",".join(repr(v) if isinstance(v, float) else str(v) for v in (getattr(self, c) for c in CSV_COLUMNS))


def _capacity_ratio(omega_sc: float, leaves_sc: int, omega_st: float, nk: int) -> float:
    if nk <= 1000:
        return ((1.0 + omega_sc) * leaves_sc) / ((1.0 + omega_st) * float(1 << nk))
    log2_ratio = math.log2(1.0 + omega_sc) + math.log2(leaves_sc) - math.log2(1.0 + omega_st) - nk
    return 2.0**log2_ratio


def _rho(num_points: int, nonempty_scaled: int, omega_st: float, s: int, strict: bool = True) -> float:
    value = math.log((num_points / nonempty_scaled) * (1.0 + omega_st)) / math.log(2.0 * s)
    if strict and not -RHO_TOLERANCE <= value <= 1.0 + RHO_TOLERANCE:
        raise SparsityBoundsError(value)
    return value


def metrics_for_tree(tree: ScaledTree, cloud: PointCloud, strict_rho: bool = True) -> IndexMetrics:
    """Metric bundle for an already-built scaled tree and its cloud."""
    num = len(cloud)
    sc = tree.stats()
    k = static_k(num, tree.s, tree.n)
    st = static_profile(cloud, k, tree.scheme, tree.s, tree.max_bits or MAX_COORD_BITS)
    omega_sc = omega(sc)
    omega_st = omega(st)
    nk = tree.n * k
    omega_static_cap = (1.0 + omega_st) * float(st.total_leaves) if nk <= 1000 else math.inf
    return IndexMetrics(
        n=tree.n,
        s=tree.s,
        scheme=tree.scheme.value,
        k=k,
        leaves_scaled=sc.total_leaves,
        leaves_static=st.total_leaves,
        nonempty_scaled=sc.nonempty,
        overfilled_scaled=sc.overfilled,
        nonempty_static=st.nonempty,
        overfilled_static=st.overfilled,
        omega_scaled=omega_sc,
        omega_static=omega_st,
        Omega_scaled=capacity_Omega(sc),
        Omega_static=omega_static_cap,
        R=_capacity_ratio(omega_sc, sc.total_leaves, omega_st, nk),
        rho=_rho(num, sc.nonempty, omega_st, tree.s, strict=strict_rho),
    )


def compute_metrics(
    cloud: PointCloud,
    s: int,
    scheme: Scheme | str,
    max_bits: int = MAX_COORD_BITS,
    engine: str | None = None,
    strict_rho: bool = True,
) -> IndexMetrics:
    """Build the scaled tree and assemble the full metric bundle."""
    tree = build_scaled(cloud, s, scheme, max_bits=max_bits, engine=engine)
    return metrics_for_tree(tree, cloud, strict_rho=strict_rho)


def capacity_ratio(
    cloud: PointCloud,
    s: int,
    scheme: Scheme | str,
    max_bits: int = MAX_COORD_BITS,
    engine: str | None = None,
) -> float:
    """R = Omega(T_scaled) / Omega(T_static) at k = static_k; below 1 means the
    scaled index is the more storage-efficient one."""
    tree = build_scaled(cloud, s, scheme, max_bits=max_bits, engine=engine)
    sc = tree.stats()
    k = static_k(len(cloud), tree.s, tree.n)
    st = static_profile(cloud, k, tree.scheme, tree.s, max_bits)
    return _capacity_ratio(omega(sc), sc.total_leaves, omega(st), tree.n * k)


def local_sparsity_rho(
    cloud: PointCloud,
    s: int,
    scheme: Scheme | str,
    max_bits: int = MAX_COORD_BITS,
    engine: str | None = None,
) -> float:
    """Sparsity exponent rho in [0, 1]: near 0 for uniform clouds, near 1 for
    strongly clustered ones.

    |L(T_scaled)| is the non-empty leaf count, which keeps the exponent
    within its proven bounds; values outside [0, 1] beyond 1e-9 raise
    :class:`SparsityBoundsError` instead of being clamped.
    """
    tree = build_scaled(cloud, s, scheme, max_bits=max_bits, engine=engine)
    k = static_k(len(cloud), tree.s, tree.n)
    st = static_profile(cloud, k, tree.scheme, tree.s, max_bits)
    return _rho(len(cloud), tree.stats().nonempty, omega(st), tree.s)

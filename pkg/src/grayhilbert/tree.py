"""Scaled curve-index tree: data-driven construction, linearization, exports.

The scaled tree is the smallest binary subtree of the infinite
subdivision tree whose leaves hold at most ``s`` points each.  Each level
splits one coordinate; a block of ``n`` consecutive levels performs one
hypercube subdivision, traversed in transformed Gray-code order.  Empty
sibling leaves forced by the binary structure are kept as nodes.  Points
whose coordinates coincide at the full quantized resolution can never be
separated; such groups terminate early in a single overfilled leaf.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from . import engine as _engine_mod
from ._engine_py import advance_states
from .curve import SCHEME_IDS, Scheme, root_state

MAX_COORD_BITS = 52  # float64 mantissa resolution of [0,1) inputs

_ONE = np.uint64(1)


class BucketStatus(enum.Enum):
    EMPTY = "empty"
    FILLED = "filled"
    UNDERFILLED = "underfilled"
    OVERFILLED = "overfilled"


def bucket_status(count: int, s: int) -> BucketStatus:
    if count == 0:
        return BucketStatus.EMPTY
    if count == s:
        return BucketStatus.FILLED
    return BucketStatus.UNDERFILLED if count < s else BucketStatus.OVERFILLED


@dataclass(frozen=True)
class PointCloud:
    """N points of the unit n-cube with stable original row identities."""

    points: np.ndarray
    ids: np.ndarray

    def __post_init__(self) -> None:
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2:
            raise ValueError("points must be a (N, n) array")
        if pts.shape[1] < 1 or pts.shape[1] > 63:
            raise ValueError(f"dimension must be in 1..63, got {pts.shape[1]}")
        if pts.size and (not np.isfinite(pts).all() or pts.min() < 0.0 or pts.max() >= 1.0):
            raise ValueError("coordinates must lie in [0, 1)")
        ids = np.asarray(self.ids, dtype=np.int64)
        if ids.shape != (pts.shape[0],):
            raise ValueError("ids must be a 1-D array matching the row count")
        if ids.size and np.unique(ids).size != ids.size:
            raise ValueError("ids must be unique")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "ids", ids)

    @classmethod
    def from_points(cls, points: np.ndarray | Sequence[Sequence[float]]) -> "PointCloud":
        pts = np.asarray(points, dtype=np.float64)
        return cls(pts, np.arange(pts.shape[0], dtype=np.int64))

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


def quantize(points: np.ndarray, max_bits: int) -> np.ndarray:
    """Per-coordinate dyadic grid index floor(x * 2**max_bits), clamped below 2**max_bits."""
    if not 1 <= max_bits <= MAX_COORD_BITS:
        raise ValueError(f"max_bits must be in 1..{MAX_COORD_BITS}, got {max_bits}")
    scale = float(1 << max_bits)
    q = np.floor(points * scale)
    np.minimum(q, scale - 1.0, out=q)
    return q.astype(np.uint64)


@dataclass(frozen=True)
class TreeNode:
    """Read-only view of one node (see :meth:`ScaledTree.node`)."""

    id: int
    kind: str
    axis: int | None
    depth: int
    children: tuple[int, int] | None
    count: int
    status: BucketStatus
    point_ids: np.ndarray | None


class TreeStats(NamedTuple):
    """Leaf statistics consumed by the index metrics: (total, non-empty, overfilled)."""

    total_leaves: int
    nonempty: int
    overfilled: int


class CurveOrder(NamedTuple):
    """Points in curve order with the pre-order rank of their bucket."""

    ids: np.ndarray
    leaf_ordinals: np.ndarray

    def __iter__(self) -> Iterator[tuple[int, int]]:  # type: ignore[override]
        return zip(self.ids.tolist(), self.leaf_ordinals.tolist())


@dataclass
class ScaledTree:
    """Array-backed scaled index tree over a point cloud.

    Nodes are stored in BFS order: ``children[v] == (-1, -1)`` marks a
    leaf, ``lo[v]`` is the start of node v's contiguous span in curve
    order and ``count[v]`` its length.  ``order`` maps curve positions to
    cloud rows; ``ids`` are the cloud's original identifiers.
    """

    n: int
    s: int
    scheme: Scheme
    max_bits: int | None
    depth: np.ndarray
    children: np.ndarray
    count: np.ndarray
    lo: np.ndarray
    axes: np.ndarray
    order: np.ndarray
    ids: np.ndarray
    engine: str = "python"
    _leaf_lo: np.ndarray | None = field(default=None, repr=False)

    @property
    def num_points(self) -> int:
        return int(self.order.size)

    @property
    def num_nodes(self) -> int:
        return int(self.depth.size)

    def leaf_mask(self) -> np.ndarray:
        return self.children[:, 0] < 0

    @property
    def num_leaves(self) -> int:
        return int(self.leaf_mask().sum())

    @property
    def num_internal(self) -> int:
        return self.num_nodes - self.num_leaves

    def stats(self) -> TreeStats:
        leaves = self.leaf_mask()
        counts = self.count[leaves]
        return TreeStats(int(leaves.sum()), int((counts > 0).sum()), int((counts > self.s).sum()))

    def node(self, v: int) -> TreeNode:
        leaf = self.children[v, 0] < 0
        cnt = int(self.count[v])
        pts = None
        if leaf:
            lo = int(self.lo[v])
            pts = self.ids[self.order[lo : lo + cnt]]
        return TreeNode(
            id=v,
            kind="leaf" if leaf else "internal",
            axis=None if leaf else int(self.axes[v]),
            depth=int(self.depth[v]),
            children=None if leaf else (int(self.children[v, 0]), int(self.children[v, 1])),
            count=cnt,
            status=bucket_status(cnt, self.s),
            point_ids=pts,
        )

    def nonempty_leaves(self) -> np.ndarray:
        """Node ids of non-empty leaves, ordered along the curve."""
        if self._leaf_lo is None:
            mask = self.leaf_mask() & (self.count > 0)
            ids = np.flatnonzero(mask)
            self._leaf_lo = ids[np.argsort(self.lo[ids], kind="stable")]
        return self._leaf_lo

    def ids_in_curve_order(self) -> np.ndarray:
        return self.ids[self.order]


def _initial_wave_blocks(num: int, s: int, n: int, max_bits: int) -> int:
    # heuristic start depth: one block past the balanced-occupancy depth
    ratio = max(num / max(s, 1), 2.0)
    k = int(math.ceil(math.log2(ratio) / n)) + 1
    return max(2, min(k, max_bits))


def _curve_sort(
    u: np.ndarray, ids: np.ndarray, s: int, scheme: Scheme, max_bits: int, eng
) -> tuple[np.ndarray, np.ndarray]:
    """Digits deep enough to resolve order and buckets, plus the curve-order permutation.

    Point order is by curve key, tie-broken by id; digit columns are
    extended in waves until every run of identical rows is an exact
    duplicate group (identical quantized coordinates) or the resolution
    limit is reached.
    """
    num, n = u.shape
    sid = SCHEME_IDS[scheme]
    perms = np.tile(np.array(root_state(scheme, n).perm, np.uint64), (num, 1))
    masks = np.zeros(num, np.uint64)
    digits = np.empty((num, 0), np.uint64)
    order = np.empty(0, np.int64)
    pending: np.ndarray | None = None  # original row indices needing deeper digits
    pending_pos: np.ndarray | None = None  # their positions in `order`
    total = 0

    while True:
        if total == 0:
            add = _initial_wave_blocks(num, s, n, max_bits)
            digits = np.empty((num, add), np.uint64)
            eng.encode_blocks(u, max_bits, 0, add, perms, masks, sid, digits)
        else:
            add = min(max(total, 2), max_bits - total)
            new_cols = np.zeros((num, add), np.uint64)
            assert pending is not None
            sub_u = np.ascontiguousarray(u[pending])
            sub_perms = np.ascontiguousarray(perms[pending])
            sub_masks = masks[pending].copy()
            sub_out = np.empty((pending.size, add), np.uint64)
            eng.encode_blocks(sub_u, max_bits, total, add, sub_perms, sub_masks, sid, sub_out)
            perms[pending] = sub_perms
            masks[pending] = sub_masks
            new_cols[pending] = sub_out
            digits = np.concatenate([digits, new_cols], axis=1)
        total += add

        if pending is None:
            keys = [ids]
            keys += [u[:, i] for i in range(n - 1, -1, -1)]
            keys += [digits[:, j] for j in range(total - 1, -1, -1)]
            order = np.lexsort(tuple(keys))
        else:
            sub_keys = [ids[pending]]
            sub_keys += [u[pending, i] for i in range(n - 1, -1, -1)]
            sub_keys += [digits[pending, j] for j in range(total - 1, -1, -1)]
            order[pending_pos] = pending[np.lexsort(tuple(sub_keys))]

        if num < 2:
            break
        sorted_digits = digits[order]
        tie = np.ones(num - 1, bool)
        for j in range(total):
            tie &= sorted_digits[:-1, j] == sorted_digits[1:, j]
        if not tie.any():
            break
        sorted_u = u[order]
        dup = np.ones(num - 1, bool)
        for i in range(n):
            dup &= sorted_u[:-1, i] == sorted_u[1:, i]
        nondup = tie & ~dup
        if not nondup.any() or total >= max_bits:
            break
        run = np.cumsum(~tie)  # pairs of one tie-run share a value
        bad_runs = np.bincount(run[nondup], minlength=int(run[-1]) + 1) > 0
        pair_bad = tie & bad_runs[run]
        row_bad = np.zeros(num, bool)
        row_bad[:-1] |= pair_bad
        row_bad[1:] |= pair_bad
        pending_pos = np.flatnonzero(row_bad)
        pending = order[pending_pos]

    return digits, order


def _compute_axes(
    depth: np.ndarray,
    children: np.ndarray,
    lo: np.ndarray,
    sorted_digits: np.ndarray,
    n: int,
    scheme: Scheme,
) -> np.ndarray:
    """Split coordinate per internal node (leaves get -1).

    The permutation state is constant within a block of n levels and
    advances by the traversal digit at block boundaries, so states are
    tracked per block-anchor node and propagated level by level.
    """
    num_nodes = depth.size
    axes = np.full(num_nodes, -1, np.int16)
    internal = children[:, 0] >= 0
    if not internal.any():
        return axes
    sid = SCHEME_IDS[scheme]
    parent = np.full(num_nodes, -1, np.int64)
    ints = np.flatnonzero(internal)
    parent[children[ints, 0]] = ints
    parent[children[ints, 1]] = ints

    perm_tab = np.zeros((num_nodes, n), np.uint8)  # filled at block anchors only
    anchor = np.full(num_nodes, -1, np.int64)
    root_perm = np.array(root_state(scheme, n).perm, np.uint8)

    max_depth = int(depth[ints].max())
    # BFS ids ascend with depth, so nodes of one level form a contiguous slice
    bounds = np.searchsorted(depth, np.arange(max_depth + 2))
    for level in range(max_depth + 1):
        sl = slice(bounds[level], bounds[level + 1])
        idx = np.flatnonzero(internal[sl]) + bounds[level]
        if idx.size == 0:
            continue
        if level == 0:
            perm_tab[0] = root_perm
            anchor[0] = 0
        elif level % n == 0:
            par_anchor = anchor[parent[idx]]
            perms = perm_tab[par_anchor].astype(np.uint64)
            dummy = np.zeros(idx.size, np.uint64)
            ranks = sorted_digits[lo[idx], level // n - 1]
            advance_states(perms, dummy, ranks, sid)
            perm_tab[idx] = perms.astype(np.uint8)
            anchor[idx] = idx
        else:
            anchor[idx] = anchor[parent[idx]]
        axes[idx] = perm_tab[anchor[idx], n - 1 - level % n]
    return axes


def build_scaled(
    cloud: PointCloud,
    s: int,
    scheme: Scheme | str,
    max_bits: int = MAX_COORD_BITS,
    engine: str | None = None,
) -> ScaledTree:
    """Build the scaled index tree of ``cloud`` with bucket capacity ``s``."""
    if len(cloud) == 0:
        raise ValueError("cannot build an index for an empty cloud")
    if not isinstance(s, (int, np.integer)) or s < 1:
        raise ValueError(f"bucket capacity must be a positive integer, got {s!r}")
    scheme = Scheme.parse(scheme)
    eng = _engine_mod.get_engine(engine)
    u = quantize(cloud.points, max_bits)
    digits, order = _curve_sort(u, cloud.ids, int(s), scheme, max_bits, eng)
    sorted_digits = np.ascontiguousarray(digits[order])
    depth, children, count, lo = eng.derive_tree(sorted_digits, cloud.n, int(s))
    axes = _compute_axes(depth, children, lo, sorted_digits, cloud.n, scheme)
    return ScaledTree(
        n=cloud.n,
        s=int(s),
        scheme=scheme,
        max_bits=max_bits,
        depth=depth,
        children=children,
        count=count,
        lo=lo,
        axes=axes,
        order=order,
        ids=cloud.ids.copy(),
        engine=eng.ENGINE,
    )


def preorder_index(tree: ScaledTree) -> CurveOrder:
    """Points in pre-order (curve) position with their bucket's pre-order rank.

    Within a bucket, points are ordered by refinement of their curve keys
    with id as the final tie-break; the concatenation equals sorting all
    points by sufficiently deep keys.
    """
    leaves = tree.nonempty_leaves()
    starts = tree.lo[leaves]
    ordinals = np.searchsorted(starts, np.arange(tree.num_points), side="right") - 1
    return CurveOrder(tree.ids_in_curve_order(), ordinals.astype(np.int64))


def leaf_occupancies(tree: ScaledTree) -> np.ndarray:
    """Bucket sizes of the non-empty leaves, in curve order."""
    return tree.count[tree.nonempty_leaves()].astype(np.int64)


def static_cell_occupancies(cloud: PointCloud, k: int, max_bits: int = MAX_COORD_BITS) -> np.ndarray:
    """Point counts of the non-empty depth-k cells (scheme-free partition).

    Cells are resolved at most at the ``max_bits`` quantization (float64
    resolution); deeper requests group identically.
    """
    if k < 0:
        raise ValueError("iteration count k must be >= 0")
    num, n = cloud.points.shape
    if num == 0:
        return np.empty(0, np.int64)
    if k == 0:
        return np.array([num], np.int64)
    cells = quantize(cloud.points, max_bits) >> np.uint64(max_bits - min(k, max_bits))
    order = np.lexsort(tuple(cells[:, i] for i in range(n)))
    sc = cells[order]
    boundary = np.zeros(num, bool)
    boundary[0] = True
    for i in range(n):
        boundary[1:] |= sc[:-1, i] != sc[1:, i]
    starts = np.flatnonzero(boundary)
    return np.diff(np.append(starts, num)).astype(np.int64)


def static_profile(
    cloud: PointCloud,
    k: int,
    scheme: Scheme | str,
    s: int,
    max_bits: int = MAX_COORD_BITS,
) -> TreeStats:
    """Leaf statistics of the depth-k uniform (static) tree, without materializing it.

    ``total_leaves`` is the exact 2**(n*k); occupancy counts come from
    grouping points by their depth-k cell, which is the same partition
    under either permutation scheme.
    """
    Scheme.parse(scheme)
    if s < 1:
        raise ValueError("bucket capacity must be >= 1")
    num, n = cloud.points.shape
    total = 1 << (n * k)
    if num == 0:
        return TreeStats(total, 0, 0)
    sizes = static_cell_occupancies(cloud, k, max_bits)
    return TreeStats(total, int(sizes.size), int((sizes > s).sum()))


def tree_to_json_doc(tree: ScaledTree) -> dict:
    """JSON document for the tree (schema: n, s, scheme, nodes[])."""
    nodes = []
    leaf = tree.leaf_mask()
    for v in range(tree.num_nodes):
        cnt = int(tree.count[v])
        if leaf[v]:
            lo = int(tree.lo[v])
            pts = tree.ids[tree.order[lo : lo + cnt]].tolist()
            axis = None
            kids = None
        else:
            pts = None
            axis = int(tree.axes[v])
            kids = [int(tree.children[v, 0]), int(tree.children[v, 1])]
        nodes.append(
            {
                "id": v,
                "kind": "leaf" if leaf[v] else "internal",
                "axis": axis,
                "depth": int(tree.depth[v]),
                "children": kids,
                "points": pts,
                "status": bucket_status(cnt, tree.s).value,
            }
        )
    return {"n": tree.n, "s": tree.s, "scheme": tree.scheme.value, "nodes": nodes}


def tree_to_json(tree: ScaledTree) -> str:
    return json.dumps(tree_to_json_doc(tree), sort_keys=True, separators=(",", ":")) + "\n"


def tree_from_json(doc: dict | str) -> ScaledTree:
    """Rebuild an array-backed tree from an exported JSON document.

    Curve order is recovered by depth-first traversal (first child first);
    the quantization budget is not part of the schema and is left unset.
    """
    if isinstance(doc, str):
        doc = json.loads(doc)
    n = int(doc["n"])
    s = int(doc["s"])
    scheme = Scheme.parse(doc["scheme"])
    raw = sorted(doc["nodes"], key=lambda r: r["id"])
    num_nodes = len(raw)
    if [r["id"] for r in raw] != list(range(num_nodes)):
        raise ValueError("node ids must be exactly 0..M-1")
    depth = np.zeros(num_nodes, np.int32)
    children = np.full((num_nodes, 2), -1, np.int64)
    count = np.zeros(num_nodes, np.int64)
    lo = np.zeros(num_nodes, np.int64)
    axes = np.full(num_nodes, -1, np.int16)
    buckets: dict[int, list[int]] = {}
    for r in raw:
        v = r["id"]
        depth[v] = r["depth"]
        if r["kind"] == "internal":
            children[v] = r["children"]
            axes[v] = r["axis"]
        else:
            buckets[v] = list(r["points"] or [])
    # DFS, first child first: recovers curve order and spans
    ids_in_order: list[int] = []
    stack = [0]
    post: list[int] = []
    while stack:
        v = stack.pop()
        lo[v] = len(ids_in_order)
        if children[v, 0] < 0:
            ids_in_order.extend(buckets.get(v, ()))
            count[v] = len(buckets.get(v, ()))
        else:
            post.append(v)
            stack.append(int(children[v, 1]))
            stack.append(int(children[v, 0]))
    for v in reversed(post):
        count[v] = count[children[v, 0]] + count[children[v, 1]]
        lo[v] = lo[children[v, 0]]
    ids = np.array(ids_in_order, np.int64)
    return ScaledTree(
        n=n,
        s=s,
        scheme=scheme,
        max_bits=None,
        depth=depth,
        children=children,
        count=count,
        lo=lo,
        axes=axes,
        order=np.arange(ids.size, dtype=np.int64),
        ids=ids,
        engine="json",
    )


def tree_to_dot(tree: ScaledTree) -> str:
    """Graphviz DOT text with the same labels as the JSON export."""
    lines = ["digraph scaled_index {", "  node [shape=box];"]
    leaf = tree.leaf_mask()
    for v in range(tree.num_nodes):
        cnt = int(tree.count[v])
        status = bucket_status(cnt, tree.s).value
        if leaf[v]:
            label = f"leaf depth={int(tree.depth[v])} size={cnt} {status}"
        else:
            label = f"axis={int(tree.axes[v])} depth={int(tree.depth[v])} size={cnt} {status}"
        lines.append(f'  n{v} [label="{label}"];')
    for v in np.flatnonzero(~leaf):
        lines.append(f"  n{v} -> n{int(tree.children[v, 0])};")
        lines.append(f"  n{v} -> n{int(tree.children[v, 1])};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_tree(tree: ScaledTree, format: str = "json") -> str:
    """Serialize the tree; ``format`` is ``json`` or ``dot``."""
    if format == "json":
        return tree_to_json(tree)
    if format == "dot":
        return tree_to_dot(tree)
    raise ValueError(f"unknown export format {format!r}; expected 'json' or 'dot'")

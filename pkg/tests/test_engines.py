from __future__ import annotations

import numpy as np
import pytest

from grayhilbert.curve import SCHEME_IDS, CellAddress, Scheme, encode_key, root_state
from grayhilbert.engine import available_engines, get_engine
from grayhilbert.tree import PointCloud, build_scaled

pytestmark = pytest.mark.skipif(
    "compiled" not in available_engines(), reason="compiled engine not built"
)

TREE_FIELDS = ("depth", "children", "count", "lo", "axes", "order")


def _encode(eng, u, scheme, blocks):
    num, n = u.shape
    perms = np.tile(np.array(root_state(scheme, n).perm, np.uint64), (num, 1))
    masks = np.zeros(num, np.uint64)
    out = np.empty((num, blocks), np.uint64)
    eng.encode_blocks(u, 52, 0, blocks, perms, masks, SCHEME_IDS[scheme], out)
    return out, perms, masks


@pytest.mark.parametrize("scheme", (Scheme.BUBBLE, Scheme.RING))
def test_encode_blocks_equivalence(rng, scheme):
    for _ in range(6):
        num = int(rng.integers(1, 2000))
        n = int(rng.integers(1, 13))
        blocks = int(rng.integers(1, 7))
        u = rng.integers(0, 1 << 52, size=(num, n), dtype=np.uint64)
        a = _encode(get_engine("python"), u, scheme, blocks)
        b = _encode(get_engine("compiled"), u, scheme, blocks)
        for x, y in zip(a, b):
            assert (x == y).all()


@pytest.mark.parametrize("scheme", (Scheme.BUBBLE, Scheme.RING))
def test_encode_matches_scalar_reference(rng, scheme):
    pts = rng.random((60, 3))
    u = np.floor(pts * float(1 << 52)).astype(np.uint64)
    for eng_name in ("python", "compiled"):
        digits, _, _ = _encode(get_engine(eng_name), u, scheme, 4)
        for i in range(len(pts)):
            cell = CellAddress(tuple(int(v >> np.uint64(48)) for v in u[i]), 3, 4)
            assert tuple(int(d) for d in digits[i]) == encode_key(cell, scheme).digits


def test_build_equivalence_random_and_degenerate(rng):
    for trial in range(8):
        num = int(rng.integers(1, 4000))
        n = int(rng.integers(1, 6))
        s = int(rng.choice([1, 2, 4, 9]))
        pts = rng.random((num, n))
        if trial % 3 == 0 and num > 10:
            pts[: num // 3] = pts[0]  # duplicate block
        cloud = PointCloud.from_points(pts)
        scheme = ("bubble", "ring")[trial % 2]
        a = build_scaled(cloud, s, scheme, engine="python")
        b = build_scaled(cloud, s, scheme, engine="compiled")
        for name in TREE_FIELDS:
            assert (getattr(a, name) == getattr(b, name)).all(), (trial, name)


def test_engine_selection():
    assert get_engine("python").ENGINE == "python"
    assert get_engine("compiled").ENGINE == "compiled"
    with pytest.raises(ValueError):
        get_engine("fortran")

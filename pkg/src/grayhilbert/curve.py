"""Gray-code curve primitives: n-dimensional Hilbert-style key encoding.

Conventions used throughout the package:

* bit position ``i`` of an n-bit word corresponds to coordinate ``i``;
  coordinate 0 is the least significant bit;
* a cell address stores, per coordinate, the integer grid index after
  ``k`` binary subdivisions (its k-bit binary expansion, most significant
  bit first, is the sequence of halving choices);
* a curve key stores, per subdivision level, the traversal rank of the
  visited child (so keys compare lexicographically in curve order).

Everything here is a pure function of its inputs; the array engines in
``_engine_py`` / ``_engine_c`` reimplement the hot paths and are tested
against this module.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

MAX_DIMENSION = 63


class Scheme(enum.Enum):
    """Coordinate permutation family used to re-orient child traversals."""

    BUBBLE = "bubble"
    RING = "ring"

    @classmethod
    def parse(cls, value: "Scheme | str") -> "Scheme":
        if isinstance(value, Scheme):
            return value
        try:
            return cls(value.lower())
        except ValueError:
            raise ValueError(f"unknown scheme {value!r}; expected 'bubble' or 'ring'") from None


#: Stable integer ids shared with the array engines.
SCHEME_IDS = {Scheme.BUBBLE: 0, Scheme.RING: 1}


def _check_dimension(n: int) -> None:
    if not 1 <= n <= MAX_DIMENSION:
        raise ValueError(f"dimension must be in 1..{MAX_DIMENSION}, got {n}")


def gray_encode(x: int, n: int) -> int:
    """Map the rank ``x`` to its binary reflected Gray code (n-bit word)."""
    _check_dimension(n)
    if not 0 <= x < (1 << n):
        raise ValueError(f"value {x} out of range for {n}-bit word")
    return x ^ (x >> 1)


def gray_decode(g: int, n: int) -> int:
    """Inverse of :func:`gray_encode`: rank of the Gray word ``g``."""
    _check_dimension(n)
    if not 0 <= g < (1 << n):
        raise ValueError(f"value {g} out of range for {n}-bit word")
    x = g
    shift = 1
    while shift < n:
        x ^= x >> shift
        shift <<= 1
    return x


def _trailing_ones(x: int) -> int:
    count = 0
    while x & 1:
        count += 1
        x >>= 1
    return count


def scheme_permutation(scheme: Scheme | str, d: int, n: int) -> tuple[int, ...]:
    """Permutation of bit positions used at a child whose first split is coordinate ``d``.

    Returned as an image table ``sigma`` with ``sigma[i]`` the destination
    of bit ``i``.  Both families map bit n-1 to ``d`` (the net travel axis
    of the canonical Gray traversal becomes the child's first-level axis);
    they differ in how the remaining axes rotate.
    """
    _check_dimension(n)
    scheme = Scheme.parse(scheme)
    if not 0 <= d < n:
        raise ValueError(f"split coordinate {d} out of range for dimension {n}")
    if scheme is Scheme.RING:
        return tuple((i + d + 1) % n for i in range(n))
    sigma = [i if i < d else i + 1 for i in range(n - 1)]
    sigma.append(d)
    return tuple(sigma)


@dataclass(frozen=True)
class TransformState:
    """Affine re-orientation of the Gray traversal inside one hypercube.

    ``perm`` maps local bit ``i`` to global bit ``perm[i]``; ``mask`` is
    the XOR translation.  The cell visited at traversal rank ``r`` is
    ``apply(perm, gray_encode(r)) ^ mask``.
    """

    perm: tuple[int, ...]
    mask: int
    n: int

    def __post_init__(self) -> None:
        _check_dimension(self.n)
        if sorted(self.perm) != list(range(self.n)):
            raise ValueError(f"perm {self.perm} is not a permutation of 0..{self.n - 1}")
        if not 0 <= self.mask < (1 << self.n):
            raise ValueError(f"mask {self.mask:#x} out of range for dimension {self.n}")

    def apply(self, word: int) -> int:
        out = 0
        for i, dest in enumerate(self.perm):
            out |= ((word >> i) & 1) << dest
        return out

    def invert(self, word: int) -> int:
        out = 0
        for i, dest in enumerate(self.perm):
            out |= ((word >> dest) & 1) << i
        return out

    def orthant_of_rank(self, rank: int) -> int:
        """n-bit cell label (bit i = coordinate i's half) visited at ``rank``."""
        return self.apply(gray_encode(rank, self.n)) ^ self.mask

    def rank_of_orthant(self, orthant: int) -> int:
        return gray_decode(self.invert(orthant ^ self.mask), self.n)


def root_state(scheme: Scheme | str, n: int) -> TransformState:
    """Traversal state of the unit cube: first split on coordinate 0, entry at the origin."""
    return TransformState(scheme_permutation(scheme, 0, n), 0, n)


def child_state(parent: TransformState, digit: int, scheme: Scheme | str) -> TransformState:
    """State governing the sub-traversal inside the child at traversal rank ``digit``.

    Entry corners follow the standard Gray-code construction: child 0
    enters where the parent does, child g >= 1 at the parent image of
    ``gray_encode(2 * floor((g - 1) / 2))``.  The child's first split
    coordinate is the axis along which its traversal net-moves, which
    parameterizes the scheme permutation.
    """
    n = parent.n
    scheme = Scheme.parse(scheme)
    if not 0 <= digit < (1 << n):
        raise ValueError(f"digit {digit} out of range for dimension {n}")
    if digit == 0:
        entry = 0
        d_local = 0
    else:
        entry = gray_encode((digit - 1) & ~1, n)
        d_local = _trailing_ones(digit if digit & 1 else digit - 1) % n
    sigma = scheme_permutation(scheme, d_local, n)
    perm = tuple(parent.perm[sigma[i]] for i in range(n))
    return TransformState(perm, parent.mask ^ parent.apply(entry), n)


@dataclass(frozen=True)
class CellAddress:
    """One subhypercube of the k-th binary subdivision of the unit n-cube.

    ``cell[i]`` is the integer grid index along coordinate ``i`` in
    ``0 .. 2**k - 1``.
    """

    cell: tuple[int, ...]
    n: int
    k: int

    def __post_init__(self) -> None:
        _check_dimension(self.n)
        if self.k < 0:
            raise ValueError("iteration count k must be >= 0")
        if len(self.cell) != self.n:
            raise ValueError(f"expected {self.n} coordinates, got {len(self.cell)}")
        hi = 1 << self.k
        for i, c in enumerate(self.cell):
            if not 0 <= c < hi:
                raise ValueError(f"coordinate {i} index {c} out of range for k={self.k}")

    def coordinate_bits(self, i: int) -> str:
        """Subdivision choices of coordinate ``i`` as a k-character bit string."""
        return format(self.cell[i], f"0{self.k}b") if self.k else ""

    def orthant_at(self, level: int) -> int:
        """n-bit half-choice label at subdivision ``level`` (0-based)."""
        shift = self.k - 1 - level
        out = 0
        for i, c in enumerate(self.cell):
            out |= ((c >> shift) & 1) << i
        return out


@dataclass(frozen=True)
class CurveKey:
    """Position on the k-th iteration curve as per-level traversal ranks."""

    digits: tuple[int, ...]
    n: int
    k: int

    def __post_init__(self) -> None:
        _check_dimension(self.n)
        if len(self.digits) != self.k:
            raise ValueError(f"expected {self.k} digits, got {len(self.digits)}")
        for a in self.digits:
            if not 0 <= a < (1 << self.n):
                raise ValueError(f"digit {a} out of range for dimension {self.n}")

    def rank(self) -> int:
        """Overall position along the curve (big-endian base 2**n integer)."""
        out = 0
        for a in self.digits:
            out = (out << self.n) | a
        return out


def point_to_cell(point: Sequence[float], k: int) -> CellAddress:
    """Dyadic cell of depth ``k`` containing a point of [0,1)^n."""
    n = len(point)
    _check_dimension(n)
    if k < 0:
        raise ValueError("iteration count k must be >= 0")
    scale = 1 << k
    cell = []
    for i, x in enumerate(point):
        if not 0.0 <= x < 1.0 or x != x:
            raise ValueError(f"coordinate {i} = {x!r} outside [0, 1)")
        # float multiply may round up to the cell boundary; the true value is < scale
        cell.append(min(math.floor(x * scale), scale - 1))
    return CellAddress(tuple(cell), n, k)


def encode_key(cell: CellAddress, scheme: Scheme | str) -> CurveKey:
    """Curve key of a cell: lexicographic key order equals traversal order."""
    scheme = Scheme.parse(scheme)
    state = root_state(scheme, cell.n)
    digits = []
    for level in range(cell.k):
        rank = state.rank_of_orthant(cell.orthant_at(level))
        digits.append(rank)
        state = child_state(state, rank, scheme)
    return CurveKey(tuple(digits), cell.n, cell.k)


def decode_key(key: CurveKey, scheme: Scheme | str) -> CellAddress:
    """Cell visited at ``key``; inverse of :func:`encode_key`."""
    scheme = Scheme.parse(scheme)
    state = root_state(scheme, key.n)
    cell = [0] * key.n
    for rank in key.digits:
        orthant = state.orthant_of_rank(rank)
        for i in range(key.n):
            cell[i] = (cell[i] << 1) | ((orthant >> i) & 1)
        state = child_state(state, rank, scheme)
    return CellAddress(tuple(cell), key.n, key.k)


def curve_order(n: int, k: int, scheme: Scheme | str) -> Iterable[CellAddress]:
    """All depth-k cells in traversal order (exhaustive; test-scale sizes only)."""
    scheme = Scheme.parse(scheme)
    total = 1 << (n * k)
    base = 1 << n
    for pos in range(total):
        digits = []
        for level in reversed(range(k)):
            digits.append((pos >> (level * n)) & (base - 1))
        yield decode_key(CurveKey(tuple(digits), n, k), scheme)

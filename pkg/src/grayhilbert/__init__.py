"""Scaled and static Gray-code Hilbert curve indexing for n-dimensional point clouds."""

from .curve import (
    CellAddress,
    CurveKey,
    Scheme,
    TransformState,
    child_state,
    decode_key,
    encode_key,
    gray_decode,
    gray_encode,
    point_to_cell,
    root_state,
    scheme_permutation,
)
from .metrics import (
    IndexMetrics,
    capacity_Omega,
    capacity_ratio,
    compute_metrics,
    local_sparsity_rho,
    omega,
    static_k,
)
from .tree import (
    BucketStatus,
    PointCloud,
    ScaledTree,
    build_scaled,
    export_tree,
    leaf_occupancies,
    preorder_index,
    static_profile,
)

__version__ = "0.1.0"

__all__ = [
    "BucketStatus",
    "CellAddress",
    "CurveKey",
    "IndexMetrics",
    "PointCloud",
    "ScaledTree",
    "Scheme",
    "TransformState",
    "build_scaled",
    "capacity_Omega",
    "capacity_ratio",
    "child_state",
    "compute_metrics",
    "decode_key",
    "encode_key",
    "export_tree",
    "gray_decode",
    "gray_encode",
    "leaf_occupancies",
    "local_sparsity_rho",
    "omega",
    "point_to_cell",
    "preorder_index",
    "root_state",
    "scheme_permutation",
    "static_k",
    "static_profile",
    "__version__",
]

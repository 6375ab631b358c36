"""Hybrid sparse matrices: CSC for arithmetic, a red-black tree for inserts."""

from ._core import (
    Axis,
    BoundsError,
    DimensionError,
    Format,
    MatrixMarketError,
    SpMat,
    diag_extract,
    diagmat,
    diagmat_fused_add,
    dumps_matrix_market,
    expr,
    load_matrix_market,
    loads_matrix_market,
    reverse,
    save_matrix_market,
    scalar_mul,
    sp_add,
    sp_mul,
    speye,
    sprandu,
    sum_dim,
    trace,
    trace_fused_atb,
    transpose,
    vec_mat_mul,
)

__all__ = [name for name in dir() if not name.startswith("_")]

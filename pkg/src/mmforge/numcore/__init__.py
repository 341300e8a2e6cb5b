"""Dense float64 tensor math with a recorded-operation gradient tape.

The op set is deliberately small: exactly what the connectors downstream
need, each with a hand-written vector-Jacobian product that `grad_check`
verifies against central differences.
"""

from .tensor import GradTape, NumericError, ShapeError, Tensor, as_tensor
from .ops import (
    add,
    bilinear_resize,
    broadcast_rows,
    concat_last,
    concat_rows,
    global_mean_pool,
    matmul,
    mul,
    reshape,
    scale,
    slice2d,
    slice_rows,
    softmax_last,
    sub,
    sum_all,
    transpose,
)
from .gradcheck import GradCheckResult, grad_check
from .textio import load_tensor, loads_tensor, dumps_tensor, save_tensor

__all__ = [
    "Tensor",
    "as_tensor",
    "GradTape",
    "ShapeError",
    "NumericError",
    "matmul",
    "softmax_last",
    "bilinear_resize",
    "global_mean_pool",
    "add",
    "sub",
    "mul",
    "scale",
    "transpose",
    "reshape",
    "concat_last",
    "concat_rows",
    "slice2d",
    "slice_rows",
    "broadcast_rows",
    "sum_all",
    "grad_check",
    "GradCheckResult",
    "save_tensor",
    "load_tensor",
    "dumps_tensor",
    "loads_tensor",
]

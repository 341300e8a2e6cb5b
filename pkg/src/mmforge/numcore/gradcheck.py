"""Central-difference verification of tape gradients."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .tensor import GradTape, NumericError, Tensor


@dataclass(frozen=True)
class GradCheckResult:
    """Per-parameter relative errors between analytic and numeric gradients."""

    per_parameter: dict[str, float]
    max_rel_error: float
    analytic: dict[str, np.ndarray]
    numeric: dict[str, np.ndarray]

    def __repr__(self) -> str:
        return f"GradCheckResult(max_rel_error={self.max_rel_error:.3e})"


def _eval_plain(f: Callable[[Mapping[str, Tensor]], Tensor], arrays: dict[str, np.ndarray], context: str) -> float:
    out = f({k: Tensor(v) for k, v in arrays.items()})
    v = float(np.asarray(out.array).reshape(()))
    if not math.isfinite(v):
        raise NumericError(f"non-finite evaluation while perturbing {context}")
    return v


def grad_check(
    f: Callable[[Mapping[str, Tensor]], Tensor],
    params: Mapping[str, np.ndarray | Tensor],
    eps: float = 1e-5,
) -> GradCheckResult:
    """Compare the tape gradient of scalar-valued `f` against central differences.

    `f` receives a dict of tensors (tape-attached on the analytic pass, plain
    on the finite-difference passes) and must return a scalar tensor. The
    reported error per parameter is
    ``||analytic - fd|| / (||fd|| + 1e-12)``.
    """
    base = {
        name: np.array(p.array if isinstance(p, Tensor) else p, dtype=np.float64)
        for name, p in params.items()
    }

    tape = GradTape()
    tracked = {name: tape.parameter(name, v) for name, v in base.items()}
    loss = f(tracked)
    if not math.isfinite(float(np.asarray(loss.array).reshape(()))):
        raise NumericError("non-finite evaluation at the base point")
    analytic = tape.backward(loss)

    numeric: dict[str, np.ndarray] = {}
    errors: dict[str, float] = {}
    for name, arr in base.items():
        fd = np.zeros_like(arr)
        flat = arr.reshape(-1)
        for i in range(flat.size):
            saved = flat[i]
            work = {k: (v if k != name else v.copy()) for k, v in base.items()}
            wflat = work[name].reshape(-1)
            wflat[i] = saved + eps
            up = _eval_plain(f, work, name)
            wflat[i] = saved - eps
            down = _eval_plain(f, work, name)
            fd.reshape(-1)[i] = (up - down) / (2.0 * eps)
        numeric[name] = fd
        diff = float(np.linalg.norm(analytic[name] - fd))
        errors[name] = diff / (float(np.linalg.norm(fd)) + 1e-12)

    return GradCheckResult(
        per_parameter=errors,
        max_rel_error=max(errors.values()) if errors else 0.0,
        analytic=analytic,
        numeric=numeric,
    )

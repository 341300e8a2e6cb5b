"""The differentiable op set.

Every op validates shapes, computes the forward value with numpy, and, when
an operand is attached to a :class:`~mmforge.numcore.tensor.GradTape`,
records a hand-written vector-Jacobian product. Bilinear resizing samples
at half-pixel centers (corners not aligned).
"""

from __future__ import annotations

import numpy as np

from .tensor import ShapeError, Tensor, as_tensor, tape_of


def _emit(out: np.ndarray, parents: tuple[Tensor, ...], vjp) -> Tensor:
    tape = tape_of(*parents)
    if tape is None:
        return Tensor._wrap(out)
    return tape.record(out, parents, vjp)


def matmul(a, b) -> Tensor:
    """Matrix product of two rank-2 tensors."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul expects rank-2 operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimensions differ: {a.shape} x {b.shape}")
    out = a.array @ b.array

    def vjp(g: np.ndarray):
        return g @ b.array.T, a.array.T @ g

    return _emit(out, (a, b), vjp)


def softmax_last(x) -> Tensor:
    """Softmax over the last axis; each slice sums to 1 and the map is shift-invariant."""
    x = as_tensor(x)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise ShapeError(f"softmax_last needs a nonempty last axis, got shape {x.shape}")
    shifted = x.array - x.array.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=-1, keepdims=True)

    def vjp(g: np.ndarray):
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

    return _emit(y, (x,), vjp)


def _resize_axis(n_src: int, n_dst: int):
    # Half-pixel sampling positions, clamped; returns lower index, upper index, fraction.
    pos = (np.arange(n_dst, dtype=np.float64) + 0.5) * (n_src / n_dst) - 0.5
    pos = np.clip(pos, 0.0, n_src - 1.0)
    lo = np.floor(pos).astype(np.intp)
    lo = np.minimum(lo, n_src - 1)
    hi = np.minimum(lo + 1, n_src - 1)
    frac = pos - lo
    return lo, hi, frac


def bilinear_resize(grid, target_h: int, target_w: int) -> Tensor:
    """Resize an h x w x c grid to target_h x target_w x c bilinearly.

    The map is linear in the input; resizing to the same size is an exact
    identity and constant fields stay constant.
    """
    grid = as_tensor(grid)
    if grid.ndim != 3:
        raise ShapeError(f"bilinear_resize expects an h x w x c grid, got shape {grid.shape}")
    if target_h < 1 or target_w < 1:
        raise ShapeError(f"target size must be positive, got {target_h} x {target_w}")
    h, w, _ = grid.shape
    r0, r1, fr = _resize_axis(h, target_h)
    c0, c1, fc = _resize_axis(w, target_w)
    fr = fr[:, None, None]
    fc = fc[None, :, None]
    a = grid.array
    top = a[r0][:, c0] * (1 - fc) + a[r0][:, c1] * fc
    bot = a[r1][:, c0] * (1 - fc) + a[r1][:, c1] * fc
    out = top * (1 - fr) + bot * fr

    def vjp(g: np.ndarray):
        gx = np.zeros_like(a)
        w00 = g * (1 - fr) * (1 - fc)
        w01 = g * (1 - fr) * fc
        w10 = g * fr * (1 - fc)
        w11 = g * fr * fc
        rr0 = np.broadcast_to(r0[:, None], g.shape[:2])
        rr1 = np.broadcast_to(r1[:, None], g.shape[:2])
        cc0 = np.broadcast_to(c0[None, :], g.shape[:2])
        cc1 = np.broadcast_to(c1[None, :], g.shape[:2])
        np.add.at(gx, (rr0, cc0), w00)
        np.add.at(gx, (rr0, cc1), w01)
        np.add.at(gx, (rr1, cc0), w10)
        np.add.at(gx, (rr1, cc1), w11)
        return (gx,)

    return _emit(out, (grid,), vjp)


def global_mean_pool(grid) -> Tensor:
    """Channel-wise arithmetic mean over the spatial positions of an h x w x c grid."""
    grid = as_tensor(grid)
    if grid.ndim != 3:
        raise ShapeError(f"global_mean_pool expects an h x w x c grid, got shape {grid.shape}")
    h, w, _ = grid.shape
    out = grid.array.mean(axis=(0, 1))

    def vjp(g: np.ndarray):
        return (np.broadcast_to(g / (h * w), grid.shape).copy(),)

    return _emit(out, (grid,), vjp)


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"add expects matching shapes, got {a.shape} and {b.shape}")
    return _emit(a.array + b.array, (a, b), lambda g: (g, g))


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"sub expects matching shapes, got {a.shape} and {b.shape}")
    return _emit(a.array - b.array, (a, b), lambda g: (g, -g))


def mul(a, b) -> Tensor:
    """Elementwise product (same shapes)."""
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"mul expects matching shapes, got {a.shape} and {b.shape}")
    return _emit(a.array * b.array, (a, b), lambda g: (g * b.array, g * a.array))


def scale(x, s: float) -> Tensor:
    x = as_tensor(x)
    s = float(s)
    return _emit(x.array * s, (x,), lambda g: (g * s,))


def transpose(x) -> Tensor:
    x = as_tensor(x)
    if x.ndim != 2:
        raise ShapeError(f"transpose expects a rank-2 tensor, got shape {x.shape}")
    return _emit(x.array.T.copy(), (x,), lambda g: (g.T,))


def reshape(x, shape) -> Tensor:
    x = as_tensor(x)
    shape = tuple(int(s) for s in shape)
    if int(np.prod(shape, dtype=np.int64)) != x.size:
        raise ShapeError(f"cannot reshape {x.shape} to {shape}")
    orig = x.shape
    return _emit(x.array.reshape(shape).copy(), (x,), lambda g: (g.reshape(orig),))


def concat_last(a, b) -> Tensor:
    """Concatenate along the last axis."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != b.ndim or a.shape[:-1] != b.shape[:-1]:
        raise ShapeError(f"concat_last expects matching leading dims, got {a.shape} and {b.shape}")
    na = a.shape[-1]
    out = np.concatenate([a.array, b.array], axis=-1)
    return _emit(out, (a, b), lambda g: (g[..., :na], g[..., na:]))


def concat_rows(tensors) -> Tensor:
    """Concatenate rank-2 tensors along axis 0."""
    ts = [as_tensor(t) for t in tensors]
    if not ts:
        raise ShapeError("concat_rows needs at least one tensor")
    cols = ts[0].shape[-1] if ts[0].ndim == 2 else None
    for t in ts:
        if t.ndim != 2 or t.shape[1] != cols:
            raise ShapeError(f"concat_rows expects rank-2 tensors with {cols} columns, got {t.shape}")
    out = np.concatenate([t.array for t in ts], axis=0)
    splits = np.cumsum([t.shape[0] for t in ts])[:-1]

    def vjp(g: np.ndarray):
        return tuple(np.split(g, splits, axis=0))

    return _emit(out, tuple(ts), vjp)


def slice2d(grid, r0: int, r1: int, c0: int, c1: int) -> Tensor:
    """Contiguous spatial slice [r0:r1, c0:c1] of an h x w x c grid."""
    grid = as_tensor(grid)
    if grid.ndim != 3:
        raise ShapeError(f"slice2d expects an h x w x c grid, got shape {grid.shape}")
    h, w, _ = grid.shape
    if not (0 <= r0 < r1 <= h and 0 <= c0 < c1 <= w):
        raise ShapeError(f"slice [{r0}:{r1}, {c0}:{c1}] out of range for grid {grid.shape}")
    out = grid.array[r0:r1, c0:c1].copy()

    def vjp(g: np.ndarray):
        gx = np.zeros_like(grid.array)
        gx[r0:r1, c0:c1] = g
        return (gx,)

    return _emit(out, (grid,), vjp)


def slice_rows(x, r0: int, r1: int) -> Tensor:
    """Rows [r0:r1] of a rank-2 tensor."""
    x = as_tensor(x)
    if x.ndim != 2:
        raise ShapeError(f"slice_rows expects a rank-2 tensor, got shape {x.shape}")
    n = x.shape[0]
    if not (0 <= r0 < r1 <= n):
        raise ShapeError(f"row slice [{r0}:{r1}] out of range for {x.shape}")
    out = x.array[r0:r1].copy()

    def vjp(g: np.ndarray):
        gx = np.zeros_like(x.array)
        gx[r0:r1] = g
        return (gx,)

    return _emit(out, (x,), vjp)


def broadcast_rows(vec, n: int) -> Tensor:
    """Repeat a rank-1 vector as the rows of an n x len(vec) tensor."""
    vec = as_tensor(vec)
    if vec.ndim != 1:
        raise ShapeError(f"broadcast_rows expects a rank-1 tensor, got shape {vec.shape}")
    if n < 1:
        raise ShapeError(f"row count must be positive, got {n}")
    out = np.tile(vec.array, (n, 1))
    return _emit(out, (vec,), lambda g: (g.sum(axis=0),))


def sum_all(x) -> Tensor:
    """Sum of all elements, as a scalar tensor."""
    x = as_tensor(x)
    shape = x.shape
    out = np.asarray(x.array.sum())
    return _emit(out, (x,), lambda g: (np.broadcast_to(g, shape).copy(),))

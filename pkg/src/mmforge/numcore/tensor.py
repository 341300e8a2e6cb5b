"""Immutable float64 tensors and the gradient tape they can be recorded on."""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np


class ShapeError(ValueError):
    """Raised when operand shapes do not satisfy an op's contract."""


class NumericError(ArithmeticError):
    """Raised when an evaluation produces non-finite values."""


class Tensor:
    """A dense n-dimensional array of float64 values.

    Tensors are value-semantic: the backing array is frozen at construction
    and every op returns a fresh tensor, so instances are safe to share
    across threads. A tensor produced by an op while a :class:`GradTape` is
    involved carries a reference to that tape and a node id; leaf tensors
    have neither.
    """

    __slots__ = ("array", "tape", "node")

    def __init__(self, data, *, copy: bool = True):
        arr = np.array(data, dtype=np.float64, copy=copy)
        arr.setflags(write=False)
        self.array = arr
        self.tape: GradTape | None = None
        self.node: int | None = None

    @classmethod
    def _wrap(cls, arr: np.ndarray, tape: GradTape | None = None, node: int | None = None) -> Tensor:
        # Internal fast path: `arr` must be a fresh float64 array.
        t = cls.__new__(cls)
        arr.setflags(write=False)
        t.array = arr
        t.tape = tape
        t.node = node
        return t

    @property
    def shape(self) -> tuple[int, ...]:
        return self.array.shape

    @property
    def size(self) -> int:
        return self.array.size

    @property
    def ndim(self) -> int:
        return self.array.ndim

    def item(self) -> float:
        if self.array.size != 1:
            raise ShapeError(f"item() requires a single-element tensor, got shape {self.shape}")
        return float(self.array.reshape(()))

    def tolist(self):
        return self.array.tolist()

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape})"


def as_tensor(value) -> Tensor:
    """Coerce arrays / nested lists / scalars to a leaf Tensor (no-op on tensors)."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


class GradTape:
    """Records op applications so a scalar result can be differentiated.

    Usage: register leaves through :meth:`parameter`, build a scalar loss
    with numcore ops, then call :meth:`backward`. The tape is single-use
    and single-threaded; the tensors it holds remain immutable and
    shareable.
    """

    def __init__(self):
        self._next_node = 0
        self._records: list[tuple[int, tuple[int, ...], Callable[[np.ndarray], Sequence[np.ndarray | None]]]] = []
        self._params: dict[str, Tensor] = {}

    def parameter(self, name: str, value) -> Tensor:
        """Register a named leaf whose gradient `backward` will report."""
        if name in self._params:
            raise ValueError(f"parameter {name!r} registered twice")
        t = as_tensor(value)
        leaf = Tensor._wrap(np.array(t.array), self, self._fresh_node())
        self._params[name] = leaf
        return leaf

    @property
    def parameters(self) -> dict[str, Tensor]:
        return dict(self._params)

    def _fresh_node(self) -> int:
        nid = self._next_node
        self._next_node += 1
        return nid

    def record(
        self,
        out_array: np.ndarray,
        parents: Iterable[Tensor],
        vjp: Callable[[np.ndarray], Sequence[np.ndarray | None]],
    ) -> Tensor:
        """Append one op application; `vjp` maps the output cotangent to per-parent cotangents."""
        nid = self._fresh_node()
        parent_ids = tuple(p.node if p.tape is self else -1 for p in parents)
        self._records.append((nid, parent_ids, vjp))
        return Tensor._wrap(out_array, self, nid)

    def backward(self, loss: Tensor) -> dict[str, np.ndarray]:
        """Reverse sweep from a scalar `loss`; returns gradients keyed by parameter name.

        Every registered parameter appears in the result with a gradient of
        its own shape (zeros if the loss does not depend on it).
        """
        if loss.tape is not self or loss.node is None:
            raise ValueError("loss tensor was not produced on this tape")
        if loss.array.size != 1:
            raise ShapeError(f"backward expects a scalar loss, got shape {loss.shape}")
        grads: dict[int, np.ndarray] = {loss.node: np.ones_like(loss.array)}
        for nid, parent_ids, vjp in reversed(self._records):
            g = grads.pop(nid, None)
            if g is None:
                continue
            for pid, pg in zip(parent_ids, vjp(g)):
                if pid < 0 or pg is None:
                    continue
                acc = grads.get(pid)
                grads[pid] = pg if acc is None else acc + pg
        out: dict[str, np.ndarray] = {}
        for name, leaf in self._params.items():
            g = grads.get(leaf.node)
            out[name] = np.zeros_like(leaf.array) if g is None else np.asarray(g)
        return out


def tape_of(*tensors: Tensor) -> GradTape | None:
    """The unique tape attached to any operand, or None. Mixing tapes is an error."""
    tape = None
    for t in tensors:
        if t.tape is None:
            continue
        if tape is None:
            tape = t.tape
        elif tape is not t.tape:
            raise ValueError("operands belong to different gradient tapes")
    return tape

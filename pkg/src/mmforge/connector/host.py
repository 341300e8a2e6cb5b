"""A stand-in host model with strided cross-attention insertions.

The stub is a stack of identity-plus-affine blocks over a (T, C) hidden
state. A contiguous span of rows is declared visual. After every block whose
1-based index is divisible by the configured stride, those rows attend once
(single layer, single group) against the original, uncompressed encoder
feature maps and are updated residually; all other rows pass through
untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .. import numcore as nc
from ..numcore import ShapeError, Tensor
from .sva import EncoderFeatureMap, QueryGrid, SvaConfig, SvaParams, SvaTrace, sva_cross_attend


def host_layer_config(cfg: SvaConfig) -> SvaConfig:
    """The in-host insertion always runs one layer of one query group."""
    return replace(cfg, depth=1, groups=1)


@dataclass(frozen=True)
class HostBlock:
    weight: np.ndarray  # (C, C)
    bias: np.ndarray  # (C,)

    def apply(self, hidden: Tensor) -> Tensor:
        bumped = nc.matmul(hidden, Tensor(self.weight))
        shifted = nc.add(bumped, nc.broadcast_rows(Tensor(self.bias), hidden.shape[0]))
        return nc.add(hidden, shifted)


@dataclass(frozen=True)
class HostStub:
    """n_layers affine perturbation blocks plus the visual row span."""

    blocks: tuple[HostBlock, ...]
    visual_start: int
    visual_length: int

    @property
    def n_layers(self) -> int:
        return len(self.blocks)

    @classmethod
    def build(
        cls,
        n_layers: int,
        hidden_dim: int,
        visual_start: int,
        visual_length: int,
        seed: int = 0,
        perturbation: float = 0.01,
    ) -> HostStub:
        rng = np.random.default_rng(seed)
        blocks = tuple(
            HostBlock(
                weight=rng.standard_normal((hidden_dim, hidden_dim)) * perturbation,
                bias=rng.standard_normal(hidden_dim) * perturbation,
            )
            for _ in range(n_layers)
        )
        return cls(blocks=blocks, visual_start=visual_start, visual_length=visual_length)

    def forward_plain(self, hidden: Tensor) -> Tensor:
        for block in self.blocks:
            hidden = block.apply(hidden)
        return hidden


def host_insert_forward(
    hidden: Tensor,
    stub: HostStub,
    features: list[EncoderFeatureMap],
    params: SvaParams,
    cfg: SvaConfig,
    trace: SvaTrace | None = None,
) -> tuple[Tensor, list[int]]:
    """Host forward with strided visual re-aggregation.

    Returns the final hidden state and the 1-based block indices at which an
    insertion ran (empty when host_stride exceeds the layer count or is
    unset).
    """
    layer_cfg = host_layer_config(cfg)
    if stub.visual_length != layer_cfg.tokens_per_group:
        raise ShapeError(
            f"visual span length {stub.visual_length} != grid_side**2 = {layer_cfg.tokens_per_group}"
        )
    if hidden.ndim != 2 or hidden.shape[1] != cfg.hidden_dim:
        raise ShapeError(f"hidden state must be (T, {cfg.hidden_dim}), got {hidden.shape}")
    if stub.visual_start + stub.visual_length > hidden.shape[0]:
        raise ShapeError("visual span exceeds the hidden sequence")

    # Insertions re-attend as queries over the hidden rows themselves, with a
    # residual update (the layer config forces residual on).
    attend_cfg = replace(layer_cfg, residual=True)

    insertions: list[int] = []
    stride = cfg.host_stride
    for index, block in enumerate(stub.blocks, start=1):
        hidden = block.apply(hidden)
        if stride is None or index % stride != 0:
            continue
        insertions.append(index)
        s, n = stub.visual_start, stub.visual_length
        span = nc.slice_rows(hidden, s, s + n)
        attended = sva_cross_attend(
            QueryGrid(group=0, tokens=span), features, params, attend_cfg, layer=0, trace=trace
        ).tokens
        parts = []
        if s > 0:
            parts.append(nc.slice_rows(hidden, 0, s))
        parts.append(attended)
        if s + n < hidden.shape[0]:
            parts.append(nc.slice_rows(hidden, s + n, hidden.shape[0]))
        hidden = nc.concat_rows(parts)
    return hidden, insertions

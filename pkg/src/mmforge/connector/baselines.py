"""Comparison connectors: interpolate-and-concatenate, and a global resampler.

The ensemble baseline resizes every encoder's token grid to a fixed token
count and stacks channels; the resampler attends a set of learnable latents
globally over all encoder tokens with no sub-region structure at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import numcore as nc
from ..numcore import ShapeError, Tensor
from .sva import EncoderFeatureMap, _orthogonal


@dataclass(frozen=True)
class EnsembleOutput:
    tokens: Tensor  # (target_tokens, sum of encoder channel widths)
    projected: Tensor | None  # (target_tokens, out_dim) when a projection is given


def _square_side(n_tokens: int, what: str) -> int:
    side = math.isqrt(n_tokens)
    if side * side != n_tokens:
        raise ShapeError(f"{what} token count {n_tokens} is not a perfect square")
    return side


def concat_ensemble(
    raw_maps: list[Tensor], target_tokens: int, projection: Tensor | None = None
) -> EnsembleOutput:
    """Bilinearly resize each (tokens, channels) map to `target_tokens` and concat channels.

    Token counts must be perfect squares: each map is viewed as its square
    grid, resized to the square root of `target_tokens` per side, and
    re-flattened before the channel concatenation. An optional projection
    matrix maps the stacked channels down afterwards.
    """
    if not raw_maps:
        raise ShapeError("concat_ensemble needs at least one feature map")
    target_side = _square_side(target_tokens, "target")
    columns: list[np.ndarray] = []
    pieces: list[Tensor] = []
    for idx, raw in enumerate(raw_maps):
        raw = nc.as_tensor(raw)
        if raw.ndim != 2:
            raise ShapeError(f"map {idx}: expected (tokens, channels), got shape {raw.shape}")
        n_tokens, channels = raw.shape
        side = _square_side(n_tokens, f"map {idx}")
        grid = nc.reshape(raw, (side, side, channels))
        resized = nc.bilinear_resize(grid, target_side, target_side)
        pieces.append(nc.reshape(resized, (target_tokens, channels)))
    merged = pieces[0]
    for extra in pieces[1:]:
        merged = nc.concat_last(merged, extra)
    projected = None
    if projection is not None:
        if projection.shape[0] != merged.shape[1]:
            raise ShapeError(
                f"projection expects {merged.shape[1]} input channels, got {projection.shape}"
            )
        projected = nc.matmul(merged, projection)
    return EnsembleOutput(tokens=merged, projected=projected)


@dataclass(frozen=True)
class ResamplerParams:
    w_q: Tensor
    w_k: Tensor
    w_v: Tensor

    @classmethod
    def initialize(cls, hidden_dim: int, seed: int = 0) -> ResamplerParams:
        rng = np.random.default_rng(seed)
        return cls(
            w_q=Tensor(_orthogonal(rng, hidden_dim, hidden_dim)),
            w_k=Tensor(_orthogonal(rng, hidden_dim, hidden_dim)),
            w_v=Tensor(_orthogonal(rng, hidden_dim, hidden_dim)),
        )

    @classmethod
    def identity(cls, hidden_dim: int) -> ResamplerParams:
        eye = Tensor(np.eye(hidden_dim))
        return cls(w_q=eye, w_k=eye, w_v=eye)


def flatten_feature_maps(features: list[EncoderFeatureMap]) -> Tensor:
    """Row-major flatten of every encoder grid, concatenated along the token axis."""
    if not features:
        raise ShapeError("no feature maps to flatten")
    pieces = []
    for fmap in features:
        h, w, c = fmap.grid.shape
        pieces.append(nc.reshape(fmap.grid, (h * w, c)))
    return nc.concat_rows(pieces)


def resampler(
    latents: Tensor,
    features: Tensor,
    params: ResamplerParams,
    residual: bool = False,
) -> Tensor:
    """Global cross-attention: every latent attends over all feature tokens jointly.

    No sub-region masking, no feed-forward, no normalization; `residual`
    optionally adds the latents back onto the attended output.
    """
    if latents.ndim != 2 or features.ndim != 2:
        raise ShapeError(
            f"latents and features must be rank-2, got {latents.shape} and {features.shape}"
        )
    if features.shape[0] < 1:
        raise ShapeError("resampler needs at least one feature token")
    if latents.shape[1] != features.shape[1]:
        raise ShapeError(
            f"channel mismatch: latents {latents.shape} vs features {features.shape}"
        )
    c = latents.shape[1]
    q = nc.matmul(latents, params.w_q)
    k = nc.matmul(features, params.w_k)
    v = nc.matmul(features, params.w_v)
    weights = nc.softmax_last(nc.scale(nc.matmul(q, nc.transpose(k)), 1.0 / math.sqrt(c)))
    out = nc.matmul(weights, v)
    if residual:
        out = nc.add(latents, out)
    return out

"""Spatially-aligned latent-query cross-attention over multiple encoder grids.

A learnable token is repeated into an L x L query grid. Query (i, j) attends
only to the aligned sub-region of every encoder's feature map, so an encoder
whose grid side is ``multiplier * L`` contributes ``multiplier**2`` keys per
query and the output token count stays ``groups * L**2`` no matter how many
encoders feed in or how large their grids are. Layers can be stacked
(``depth``) and independent query groups run in parallel (``groups``); group
outputs are concatenated along the token axis.

Per query the attention is the usual scaled dot product: logits are
``q @ K.T / sqrt(hidden_dim)`` over the union of all encoders' sub-region
keys, and the layer output is added residually to the incoming query row
(disable with ``residual=False``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .. import numcore as nc
from ..numcore import ShapeError, Tensor


@dataclass(frozen=True)
class SvaConfig:
    """Shape and behavior of the aggregator.

    grid_side:   side length of the learnable query grid (tokens per group
                 side; output has groups * grid_side**2 tokens)
    hidden_dim:  channel width shared by queries, keys, and values
    multipliers: per-encoder ratio between feature-grid side and grid_side;
                 every entry must be a positive integer
    depth:       stacked cross-attention layers per group
    groups:      parallel learnable-query groups
    host_stride: when set, stride of extra single-layer insertions inside a
                 host model (see mmforge.connector.host)
    """

    grid_side: int
    hidden_dim: int
    multipliers: tuple[int, ...]
    depth: int = 1
    groups: int = 1
    host_stride: int | None = None
    use_positional_encoding: bool = True
    use_global_query_augmentation: bool = False
    residual: bool = True

    def __post_init__(self):
        object.__setattr__(self, "multipliers", tuple(int(m) for m in self.multipliers))
        if self.grid_side < 1 or self.hidden_dim < 1:
            raise ValueError("grid_side and hidden_dim must be >= 1")
        if self.depth < 1 or self.groups < 1:
            raise ValueError("depth and groups must be >= 1")
        if not self.multipliers:
            raise ValueError("at least one encoder multiplier is required")
        if any(m < 1 for m in self.multipliers):
            raise ValueError(f"multipliers must be positive integers, got {self.multipliers}")
        if self.host_stride is not None and self.host_stride < 1:
            raise ValueError("host_stride must be >= 1 when set")

    @property
    def num_encoders(self) -> int:
        return len(self.multipliers)

    @property
    def tokens_per_group(self) -> int:
        return self.grid_side * self.grid_side

    @property
    def output_tokens(self) -> int:
        return self.groups * self.tokens_per_group

    def feature_side(self, encoder: int) -> int:
        return self.multipliers[encoder] * self.grid_side


@dataclass(frozen=True)
class EncoderFeatureMap:
    """One encoder's adapted feature grid: side = multiplier * grid_side, channels = hidden_dim."""

    index: int
    multiplier: int
    grid: Tensor

    @property
    def side(self) -> int:
        return self.grid.shape[0]


def check_feature_maps(features: list[EncoderFeatureMap], cfg: SvaConfig) -> None:
    if len(features) != cfg.num_encoders:
        raise ShapeError(
            f"expected {cfg.num_encoders} feature maps, got {len(features)}"
        )
    for pos, fmap in enumerate(features):
        want = cfg.feature_side(pos)
        if fmap.multiplier != cfg.multipliers[pos]:
            raise ShapeError(
                f"encoder {pos}: multiplier {fmap.multiplier} != configured {cfg.multipliers[pos]}"
            )
        if fmap.grid.shape != (want, want, cfg.hidden_dim):
            raise ShapeError(
                f"encoder {pos}: grid shape {fmap.grid.shape} != expected "
                f"({want}, {want}, {cfg.hidden_dim})"
            )


@dataclass(frozen=True)
class QueryGrid:
    """The expanded query tokens of one group (rows of the latent before layer 1)."""

    group: int
    tokens: Tensor  # (grid_side**2, hidden_dim)

    @classmethod
    def from_latent(cls, latent: Tensor, cfg: SvaConfig, group: int) -> QueryGrid:
        return cls(group=group, tokens=nc.broadcast_rows(latent, cfg.tokens_per_group))


@dataclass(frozen=True)
class CrossAttentionState:
    """Diagnostics for one attended query position (plain arrays, detached)."""

    layer: int
    group: int
    row: int
    col: int
    query: np.ndarray  # projected query, (hidden_dim,)
    keys: np.ndarray  # stacked projected keys, (sum of multiplier**2, hidden_dim)
    values: np.ndarray
    logits: np.ndarray
    weights: np.ndarray
    segments: tuple[tuple[int, int, int], ...]  # (encoder index, start, end) into weights
    output: np.ndarray


@dataclass
class SvaTrace:
    """Collects per-query attention states across a forward pass."""

    states: list[CrossAttentionState] = field(default_factory=list)


# ---------------------------------------------------------------------------
# parameters


class SvaParams:
    """Flat name -> Tensor parameter store for one aggregator.

    Names:
        latent.g{g}                    learnable token per group
        layer{d}.g{g}.w_q              query projection
        layer{d}.g{g}.enc{k}.w_k/w_v   per-encoder key/value projections
        layer{d}.g{g}.w_aug            2C->C map for the pooled-feature augmentation
        pos.enc{k}                     positional encoding, only where multiplier > 1
    """

    def __init__(self, cfg: SvaConfig, tensors: dict[str, Tensor]):
        self.cfg = cfg
        self.tensors = dict(tensors)
        missing = set(self.parameter_shapes(cfg)) - set(self.tensors)
        if missing:
            raise ValueError(f"missing parameters: {sorted(missing)}")

    @staticmethod
    def parameter_shapes(cfg: SvaConfig) -> dict[str, tuple[int, ...]]:
        c = cfg.hidden_dim
        shapes: dict[str, tuple[int, ...]] = {}
        for g in range(cfg.groups):
            shapes[f"latent.g{g}"] = (c,)
        for d in range(cfg.depth):
            for g in range(cfg.groups):
                base = f"layer{d}.g{g}"
                shapes[f"{base}.w_q"] = (c, c)
                if cfg.use_global_query_augmentation:
                    shapes[f"{base}.w_aug"] = (2 * c, c)
                for k in range(cfg.num_encoders):
                    shapes[f"{base}.enc{k}.w_k"] = (c, c)
                    shapes[f"{base}.enc{k}.w_v"] = (c, c)
        if cfg.use_positional_encoding:
            for k, m in enumerate(cfg.multipliers):
                if m > 1:
                    shapes[f"pos.enc{k}"] = (m, m, c)
        return shapes

    @classmethod
    def initialize(cls, cfg: SvaConfig, seed: int = 0) -> SvaParams:
        """Deterministic init: latents and positional encodings ~ N(0, 0.02^2), orthogonal projections."""
        rng = np.random.default_rng(seed)
        tensors: dict[str, Tensor] = {}
        for name, shape in sorted(cls.parameter_shapes(cfg).items()):
            if name.startswith(("latent.", "pos.")):
                tensors[name] = Tensor(rng.normal(0.0, 0.02, size=shape))
            else:
                tensors[name] = Tensor(_orthogonal(rng, *shape))
        return cls(cfg, tensors)

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: np.array(t.array) for name, t in self.tensors.items()}

    def save_directory(self, directory) -> None:
        """One text-format tensor file per parameter (name.txt)."""
        import os

        from ..numcore import save_tensor

        os.makedirs(directory, exist_ok=True)
        for name, tensor in self.tensors.items():
            save_tensor(os.path.join(directory, f"{name}.txt"), tensor)

    @classmethod
    def load_directory(cls, cfg: SvaConfig, directory) -> SvaParams:
        import os

        from ..numcore import load_tensor

        tensors = {
            name: load_tensor(os.path.join(directory, f"{name}.txt"))
            for name in cls.parameter_shapes(cfg)
        }
        return cls(cfg, tensors)

    # accessors -------------------------------------------------------------
    def latent(self, g: int) -> Tensor:
        return self.tensors[f"latent.g{g}"]

    def w_q(self, d: int, g: int) -> Tensor:
        return self.tensors[f"layer{d}.g{g}.w_q"]

    def w_aug(self, d: int, g: int) -> Tensor:
        return self.tensors[f"layer{d}.g{g}.w_aug"]

    def w_k(self, d: int, g: int, k: int) -> Tensor:
        return self.tensors[f"layer{d}.g{g}.enc{k}.w_k"]

    def w_v(self, d: int, g: int, k: int) -> Tensor:
        return self.tensors[f"layer{d}.g{g}.enc{k}.w_v"]

    def pos(self, k: int) -> Tensor | None:
        return self.tensors.get(f"pos.enc{k}")

    def permute_encoders(self, order: list[int]) -> SvaParams:
        """Relabel encoder parameter blocks by `order` (order[new] = old index)."""
        cfg = replace(self.cfg, multipliers=tuple(self.cfg.multipliers[o] for o in order))
        tensors = dict(self.tensors)
        for d in range(cfg.depth):
            for g in range(cfg.groups):
                for new_k, old_k in enumerate(order):
                    for kind in ("w_k", "w_v"):
                        tensors[f"layer{d}.g{g}.enc{new_k}.{kind}"] = self.tensors[
                            f"layer{d}.g{g}.enc{old_k}.{kind}"
                        ]
        for key in [k for k in tensors if k.startswith("pos.enc")]:
            del tensors[key]
        for new_k, old_k in enumerate(order):
            old = self.tensors.get(f"pos.enc{old_k}")
            if old is not None:
                tensors[f"pos.enc{new_k}"] = old
        return SvaParams(cfg, tensors)


def _orthogonal(rng: np.random.Generator, rows: int, *rest: int) -> np.ndarray:
    cols = rest[0] if rest else rows
    a = rng.standard_normal((rows, cols))
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))


# ---------------------------------------------------------------------------
# encoder adaptation


def adapt_encoder_output(
    raw: Tensor, cfg: SvaConfig, encoder: int, channel_map: Tensor | None = None
) -> EncoderFeatureMap:
    """Resize a raw h x w x d grid to the aligned side and project channels to hidden_dim.

    With `channel_map` None the raw channel count must already equal
    hidden_dim. Otherwise `channel_map` is a (d, hidden_dim) matrix applied
    position-wise after the resize.
    """
    side = cfg.feature_side(encoder)
    resized = nc.bilinear_resize(raw, side, side)
    grid = _project_channels(resized, cfg, channel_map)
    return EncoderFeatureMap(index=encoder, multiplier=cfg.multipliers[encoder], grid=grid)


def adapt_encoder_stages(
    stages: list[Tensor], cfg: SvaConfig, encoder: int, channel_map: Tensor | None = None
) -> EncoderFeatureMap:
    """Multi-stage variant: resize every stage to the aligned side, concatenate
    channel-wise, then project the stacked channels to hidden_dim."""
    if not stages:
        raise ShapeError("adapt_encoder_stages needs at least one stage")
    side = cfg.feature_side(encoder)
    resized = [nc.bilinear_resize(s, side, side) for s in stages]
    merged = resized[0]
    for extra in resized[1:]:
        merged = nc.concat_last(merged, extra)
    grid = _project_channels(merged, cfg, channel_map)
    return EncoderFeatureMap(index=encoder, multiplier=cfg.multipliers[encoder], grid=grid)


def _project_channels(grid: Tensor, cfg: SvaConfig, channel_map: Tensor | None) -> Tensor:
    h, w, d = grid.shape
    if channel_map is None:
        if d != cfg.hidden_dim:
            raise ShapeError(
                f"grid has {d} channels but hidden_dim is {cfg.hidden_dim}; pass a channel_map"
            )
        return grid
    if channel_map.shape != (d, cfg.hidden_dim):
        raise ShapeError(
            f"channel_map shape {channel_map.shape} does not map {d} -> {cfg.hidden_dim} channels"
        )
    flat = nc.reshape(grid, (h * w, d))
    return nc.reshape(nc.matmul(flat, channel_map), (h, w, cfg.hidden_dim))


# ---------------------------------------------------------------------------
# attention


def sub_region_view(
    fmap: EncoderFeatureMap, i: int, j: int, cfg: SvaConfig, pos_enc: Tensor | None = None
) -> Tensor:
    """The (multiplier x multiplier) feature block aligned with query (i, j), flattened row-major.

    When a positional encoding is supplied it is added elementwise to the
    block before flattening.
    """
    side = cfg.grid_side
    if not (0 <= i < side and 0 <= j < side):
        raise ShapeError(f"query index ({i}, {j}) out of range for grid side {side}")
    m = fmap.multiplier
    block = nc.slice2d(fmap.grid, m * i, m * (i + 1), m * j, m * (j + 1))
    if pos_enc is not None:
        block = nc.add(block, pos_enc)
    return nc.reshape(block, (m * m, cfg.hidden_dim))


def _pooled_feature(features: list[EncoderFeatureMap], cfg: SvaConfig) -> Tensor:
    pooled = nc.global_mean_pool(features[0].grid)
    for fmap in features[1:]:
        pooled = nc.add(pooled, nc.global_mean_pool(fmap.grid))
    pooled = nc.scale(pooled, 1.0 / len(features))
    return nc.reshape(pooled, (1, cfg.hidden_dim))


def sva_cross_attend(
    x: QueryGrid,
    features: list[EncoderFeatureMap],
    params: SvaParams,
    cfg: SvaConfig,
    layer: int = 0,
    trace: SvaTrace | None = None,
) -> QueryGrid:
    """One cross-attention layer over the aligned sub-regions of every encoder."""
    check_feature_maps(features, cfg)
    g = x.group
    inv_sqrt_c = 1.0 / math.sqrt(cfg.hidden_dim)
    pooled = (
        _pooled_feature(features, cfg) if cfg.use_global_query_augmentation else None
    )

    # weight-vector layout: encoder k's keys occupy [start, end) of every query's softmax
    segments: list[tuple[int, int, int]] = []
    start = 0
    for fmap in features:
        count = fmap.multiplier**2
        segments.append((fmap.index, start, start + count))
        start += count

    out_rows: list[Tensor] = []
    for pos in range(cfg.tokens_per_group):
        i, j = divmod(pos, cfg.grid_side)
        row = nc.slice_rows(x.tokens, pos, pos + 1)
        q_in = row
        if pooled is not None:
            q_in = nc.matmul(nc.concat_last(row, pooled), params.w_aug(layer, g))
        q = nc.matmul(q_in, params.w_q(layer, g))

        keys: list[Tensor] = []
        values: list[Tensor] = []
        for k, fmap in enumerate(features):
            pos_enc = params.pos(k) if cfg.use_positional_encoding else None
            block = sub_region_view(fmap, i, j, cfg, pos_enc)
            keys.append(nc.matmul(block, params.w_k(layer, g, k)))
            values.append(nc.matmul(block, params.w_v(layer, g, k)))
        key_mat = nc.concat_rows(keys)
        val_mat = nc.concat_rows(values)

        logits = nc.scale(nc.matmul(q, nc.transpose(key_mat)), inv_sqrt_c)
        weights = nc.softmax_last(logits)
        attended = nc.matmul(weights, val_mat)
        new_row = nc.add(row, attended) if cfg.residual else attended
        out_rows.append(new_row)

        if trace is not None:
            trace.states.append(
                CrossAttentionState(
                    layer=layer,
                    group=g,
                    row=i,
                    col=j,
                    query=np.array(q.array[0]),
                    keys=np.array(key_mat.array),
                    values=np.array(val_mat.array),
                    logits=np.array(logits.array[0]),
                    weights=np.array(weights.array[0]),
                    segments=tuple(segments),
                    output=np.array(new_row.array[0]),
                )
            )

    return QueryGrid(group=g, tokens=nc.concat_rows(out_rows))


def sva_forward(
    features: list[EncoderFeatureMap],
    params: SvaParams,
    cfg: SvaConfig,
    trace: SvaTrace | None = None,
) -> Tensor:
    """Run every group's stacked layers and concatenate the group token blocks.

    Output shape is (groups * grid_side**2, hidden_dim) regardless of the
    encoder count or multipliers.
    """
    check_feature_maps(features, cfg)
    group_tokens: list[Tensor] = []
    for g in range(cfg.groups):
        grid = QueryGrid.from_latent(params.latent(g), cfg, g)
        for d in range(cfg.depth):
            grid = sva_cross_attend(grid, features, params, cfg, layer=d, trace=trace)
        group_tokens.append(grid.tokens)
    if len(group_tokens) == 1:
        return group_tokens[0]
    return nc.concat_rows(group_tokens)


# ---------------------------------------------------------------------------
# attention-mass reporting


def attention_mass_by_encoder(trace: SvaTrace) -> np.ndarray:
    """Mean over queries of the softmax mass landing on each encoder's keys.

    The result is indexed by encoder and sums to 1.
    """
    if not trace.states:
        raise ValueError("attention trace is empty; run a forward pass with trace=")
    n_encoders = max(k for state in trace.states for (k, _, _) in state.segments) + 1
    totals = np.zeros(n_encoders)
    for state in trace.states:
        for k, start, end in state.segments:
            totals[k] += float(state.weights[start:end].sum())
    return totals / len(trace.states)


def format_attention_mass(fractions: np.ndarray, names: list[str] | None = None) -> str:
    """Render one `<name> <pct>%` row per encoder, e.g. ``SigLIP 29.7%``."""
    rows = []
    for k, frac in enumerate(fractions):
        label = names[k] if names and k < len(names) else f"encoder{k}"
        rows.append(f"{label} {100.0 * frac:.1f}%")
    return "\n".join(rows)

"""Connectors that map vision-encoder feature grids into a token sequence."""

from .sva import (
    CrossAttentionState,
    EncoderFeatureMap,
    QueryGrid,
    SvaConfig,
    SvaParams,
    SvaTrace,
    adapt_encoder_output,
    adapt_encoder_stages,
    attention_mass_by_encoder,
    format_attention_mass,
    sub_region_view,
    sva_cross_attend,
    sva_forward,
)
from .host import HostStub, host_insert_forward, host_layer_config
from .baselines import (
    EnsembleOutput,
    ResamplerParams,
    concat_ensemble,
    flatten_feature_maps,
    resampler,
)

__all__ = [
    "SvaConfig",
    "SvaParams",
    "EncoderFeatureMap",
    "QueryGrid",
    "CrossAttentionState",
    "SvaTrace",
    "adapt_encoder_output",
    "adapt_encoder_stages",
    "sub_region_view",
    "sva_cross_attend",
    "sva_forward",
    "attention_mass_by_encoder",
    "format_attention_mass",
    "HostStub",
    "host_insert_forward",
    "host_layer_config",
    "EnsembleOutput",
    "ResamplerParams",
    "concat_ensemble",
    "flatten_feature_maps",
    "resampler",
]

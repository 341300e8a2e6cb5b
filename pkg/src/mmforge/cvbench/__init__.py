"""Vision-centric VQA item generation from annotated scenes, plus scoring."""

from .scenes import Scene, SceneObject, load_scenes, loads_scene, scene_to_json
from .items import Overlay, QuestionItem, load_items, save_items
from .generate import (
    DEFAULT_3D_OFFSET,
    derive_scene_seed,
    gen_count,
    gen_depth_order,
    gen_relative_distance,
    gen_spatial,
    generate_all,
)
from .scoring import CvBenchScore, GradedItem, composition_summary, load_graded, score_cvbench

__all__ = [
    "Scene",
    "SceneObject",
    "load_scenes",
    "loads_scene",
    "scene_to_json",
    "QuestionItem",
    "Overlay",
    "load_items",
    "save_items",
    "gen_spatial",
    "gen_count",
    "gen_depth_order",
    "gen_relative_distance",
    "generate_all",
    "derive_scene_seed",
    "DEFAULT_3D_OFFSET",
    "CvBenchScore",
    "GradedItem",
    "score_cvbench",
    "composition_summary",
    "load_graded",
]

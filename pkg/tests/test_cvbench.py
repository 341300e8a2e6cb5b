"""Generator tests: every emitted answer is re-derived by brute-force geometry."""

from __future__ import annotations

import math
import re

import numpy as np
import pytest

from mmforge.cvbench import (
    GradedItem,
    QuestionItem,
    Scene,
    SceneObject,
    composition_summary,
    derive_scene_seed,
    gen_count,
    gen_depth_order,
    gen_relative_distance,
    gen_spatial,
    load_items,
    load_scenes,
    save_items,
    scene_to_json,
    score_cvbench,
)
from mmforge.cvbench.generate import _count_window

POOL = ("person", "car", "chair", "dog", "table", "bicycle", "boat", "bottle")


# ---------------------------------------------------------------------------
# synthetic scene factories


def random_2d_scene(r: np.random.Generator, idx: int, n_categories: int = 2) -> Scene:
    cats = list(r.choice(POOL, size=n_categories, replace=False))
    objects = []
    for cat in cats:
        for _ in range(int(r.integers(1, 4))):
            x, y = r.uniform(0, 400, size=2)
            w, h = r.uniform(5, 80, size=2)
            objects.append(SceneObject(category=cat, bbox2d=(float(x), float(y), float(w), float(h))))
    return Scene(id=f"scene2d-{idx}", source="coco-like", objects=tuple(objects))


def random_box(r: np.random.Generator) -> tuple:
    cx, cy = r.uniform(-4, 4, size=2)
    cz = r.uniform(1, 12)
    hx, hy, hz = r.uniform(0.1, 1.0, size=3)
    corners = tuple(
        (float(cx + sx * hx), float(cy + sy * hy), float(cz + sz * hz))
        for sx in (-1, 1)
        for sy in (-1, 1)
        for sz in (-1, 1)
    )
    return corners


def random_3d_scene(r: np.random.Generator, idx: int, n_objects: int = 4) -> Scene:
    cats = list(r.choice(POOL, size=min(n_objects, len(POOL)), replace=False))
    objects = []
    for k in range(n_objects):
        x, y = r.uniform(0, 400, size=2)
        objects.append(
            SceneObject(
                category=cats[k % len(cats)],
                bbox2d=(float(x), float(y), 10.0 + k, 10.0 + k),
                corners3d=random_box(r),
            )
        )
    return Scene(id=f"scene3d-{idx}", source="omni3d-like", objects=tuple(objects))


def find_object(scene: Scene, bbox) -> SceneObject:
    matches = [o for o in scene.objects if o.bbox2d == tuple(bbox)]
    assert len(matches) == 1, "overlay bbox should identify a unique instance"
    return matches[0]


# ---------------------------------------------------------------------------
# brute-force oracles (independent re-derivations from the raw scene)


def spatial_oracle_ok(scene: Scene, item: QuestionItem) -> bool:
    other = find_object(scene, item.overlays[0].bbox2d)
    anchor = find_object(scene, item.overlays[1].bbox2d)
    ox, oy = other.center2d
    ax, ay = anchor.center2d
    if set(item.choices) == {"left", "right"}:
        expected = "right" if ox > ax else "left"
    else:
        expected = "bottom" if oy > ay else "top"
    return item.answer == expected


def count_oracle_ok(scene: Scene, item: QuestionItem) -> bool:
    match = re.search(r"How many (.+) are in the image", item.prompt)
    assert match, item.prompt
    category = match.group(1)
    true_count = sum(1 for o in scene.objects if o.category == category)
    return item.answer == true_count


def depth_oracle_ok(scene: Scene, item: QuestionItem, offset: float) -> bool:
    a = find_object(scene, item.overlays[0].bbox2d)
    b = find_object(scene, item.overlays[1].bbox2d)
    da = [math.dist(p, (0.0, 0.0, 0.0)) for p in a.corners3d]
    db = [math.dist(p, (0.0, 0.0, 0.0)) for p in b.corners3d]
    if max(da) + offset < min(db):
        expected = a.category
    elif max(db) + offset < min(da):
        expected = b.category
    else:
        return False  # ambiguous pairs must not be emitted at all
    return item.answer == expected


def reldist_oracle_ok(scene: Scene, item: QuestionItem, offset: float) -> bool:
    anchor = find_object(scene, item.overlays[0].bbox2d)
    a = find_object(scene, item.overlays[1].bbox2d)
    b = find_object(scene, item.overlays[2].bbox2d)
    cx = tuple(sum(c[d] for c in anchor.corners3d) / 8.0 for d in range(3))
    da = [math.dist(p, cx) for p in a.corners3d]
    db = [math.dist(p, cx) for p in b.corners3d]
    if max(da) + offset < min(db):
        expected = a.category
    elif max(db) + offset < min(da):
        expected = b.category
    else:
        return False
    return item.answer == expected


# ---------------------------------------------------------------------------
# spatial relationship


def test_spatial_forced_geometry_right():
    scene = Scene(
        id="s",
        source="coco-like",
        objects=(
            SceneObject("dog", (0.0, 40.0, 20.0, 20.0)),  # center (10, 50)
            SceneObject("car", (80.0, 40.0, 20.0, 20.0)),  # center (90, 50)
        ),
    )
    items = gen_spatial(scene, rng_seed=1)
    assert len(items) == 1
    assert spatial_oracle_ok(scene, items[0])
    # whatever was picked as anchor, the two centers differ only in x
    assert set(items[0].choices) == {"left", "right"}


def test_spatial_mirror_flips_answer():
    width = 200.0
    objects = (
        SceneObject("dog", (10.0, 40.0, 20.0, 20.0)),
        SceneObject("car", (120.0, 40.0, 20.0, 20.0)),
    )
    scene = Scene(id="s", source="coco-like", objects=objects)
    mirrored = Scene(
        id="s",
        source="coco-like",
        objects=tuple(
            SceneObject(o.category, (width - o.bbox2d[0] - o.bbox2d[2], o.bbox2d[1], o.bbox2d[2], o.bbox2d[3]))
            for o in objects
        ),
    )
    item = gen_spatial(scene, rng_seed=3)[0]
    flipped = gen_spatial(mirrored, rng_seed=3)[0]
    assert {item.answer, flipped.answer} == {"left", "right"}
    assert item.answer != flipped.answer


def test_spatial_requires_exactly_two_categories():
    r = np.random.default_rng(0)
    one = random_2d_scene(r, 0, n_categories=1)
    three = random_2d_scene(r, 1, n_categories=3)
    assert gen_spatial(one, 0) == []
    assert gen_spatial(three, 0) == []


def test_spatial_random_scenes_match_oracle():
    r = np.random.default_rng(42)
    emitted = 0
    for idx in range(200):
        scene = random_2d_scene(r, idx)
        for item in gen_spatial(scene, derive_scene_seed(7, scene.id)):
            emitted += 1
            assert spatial_oracle_ok(scene, item)
    assert emitted > 150


def test_spatial_deterministic_under_seed():
    scene = random_2d_scene(np.random.default_rng(5), 0)
    a = [i.to_json() for i in gen_spatial(scene, 123)]
    b = [i.to_json() for i in gen_spatial(scene, 123)]
    assert a == b


# ---------------------------------------------------------------------------
# object count


def test_count_window_examples():
    assert _count_window(4) == [2, 3, 4, 5, 6]
    assert _count_window(1) == [0, 1, 2, 3, 4]
    assert _count_window(0) == [0, 1, 2, 3, 4]


@pytest.mark.parametrize("n", list(range(0, 21)))
def test_count_window_invariants_exhaustive(n):
    window = _count_window(n)
    assert len(window) == 5
    assert len(set(window)) == 5
    assert all(v >= 0 for v in window)
    assert n in window
    assert window == list(range(window[0], window[0] + 5))  # contiguous


def test_count_items_match_oracle():
    r = np.random.default_rng(11)
    for idx in range(100):
        scene = random_2d_scene(r, idx, n_categories=int(r.integers(1, 4)))
        for item in gen_count(scene, derive_scene_seed(3, scene.id)):
            assert count_oracle_ok(scene, item)
            assert item.choices.count(item.answer) == 1


def test_count_existence_check_answer_zero():
    scene = Scene(id="s", source="ade-like", objects=(SceneObject("dog", (0, 0, 5, 5)),))
    items = gen_count(scene, 9)
    absent = [i for i in items if i.id.endswith("absent-0")]
    assert len(absent) == 1
    assert absent[0].answer == 0
    assert 0 in absent[0].choices


# ---------------------------------------------------------------------------
# depth order


def box_at_distance(d: float) -> tuple:
    # degenerate box: all vertices at distance exactly d along z
    return tuple((0.0, 0.0, d) for _ in range(8))


def test_depth_forced_answer():
    scene = Scene(
        id="s",
        source="omni3d-like",
        objects=(
            SceneObject("dog", (0, 0, 5, 5), corners3d=box_at_distance(1.0)),
            SceneObject("car", (10, 0, 5, 5), corners3d=box_at_distance(5.0)),
        ),
    )
    items = gen_depth_order(scene, offset=0.5)
    assert len(items) == 1
    assert items[0].answer == "dog"
    colors = [o.color for o in items[0].overlays]
    assert len(set(colors)) == 2


def test_depth_interleaved_ranges_suppressed():
    scene = Scene(
        id="s",
        source="omni3d-like",
        objects=(
            SceneObject("dog", (0, 0, 5, 5), corners3d=box_at_distance(4.0)),
            SceneObject("car", (10, 0, 5, 5), corners3d=box_at_distance(3.8)),
        ),
    )
    assert gen_depth_order(scene, offset=0.3) == []


def test_depth_random_pairs_match_oracle():
    r = np.random.default_rng(13)
    emitted = 0
    for idx in range(200):
        scene = random_3d_scene(r, idx, n_objects=3)
        for item in gen_depth_order(scene, offset=0.3):
            emitted += 1
            assert depth_oracle_ok(scene, item, offset=0.3)
    assert emitted > 50


def test_depth_offset_monotonicity():
    r = np.random.default_rng(17)
    scenes = [random_3d_scene(r, idx) for idx in range(40)]
    previous: set[str] | None = None
    for offset in np.linspace(0.0, 5.0, 50):
        current = {
            item.id for scene in scenes for item in gen_depth_order(scene, offset=float(offset))
        }
        if previous is not None:
            assert current <= previous
        previous = current


# ---------------------------------------------------------------------------
# relative distance


def shifted_box(center, spread=0.05) -> tuple:
    cx, cy, cz = center
    return tuple(
        (cx + sx * spread, cy + sy * spread, cz + sz * spread)
        for sx in (-1, 1)
        for sy in (-1, 1)
        for sz in (-1, 1)
    )


def test_relative_distance_forced_answer():
    scene = Scene(
        id="s",
        source="omni3d-like",
        objects=(
            SceneObject("table", (0, 0, 5, 5), corners3d=shifted_box((0, 0, 5))),
            SceneObject("dog", (10, 0, 5, 5), corners3d=shifted_box((1, 0, 5))),
            SceneObject("car", (20, 0, 5, 5), corners3d=shifted_box((6, 0, 5))),
        ),
    )
    items = gen_relative_distance(scene, offset=1.0)
    matching = [i for i in items if i.overlays[0].bbox2d == (0.0, 0.0, 5.0, 5.0)]
    assert matching and all(i.answer == "dog" for i in matching)
    assert all(len({o.color for o in i.overlays}) == 3 for i in items)


def test_relative_distance_label_swap_swaps_answer():
    scene = Scene(
        id="s",
        source="omni3d-like",
        objects=(
            SceneObject("table", (0, 0, 5, 5), corners3d=shifted_box((0, 0, 5))),
            SceneObject("dog", (10, 0, 5, 5), corners3d=shifted_box((1, 0, 5))),
            SceneObject("car", (20, 0, 5, 5), corners3d=shifted_box((6, 0, 5))),
        ),
    )
    swapped = Scene(
        id="s",
        source="omni3d-like",
        objects=(
            scene.objects[0],
            SceneObject("car", (10, 0, 5, 5), corners3d=shifted_box((1, 0, 5))),
            SceneObject("dog", (20, 0, 5, 5), corners3d=shifted_box((6, 0, 5))),
        ),
    )
    base = [i for i in gen_relative_distance(scene, 1.0) if i.overlays[0].bbox2d == (0.0, 0.0, 5.0, 5.0)]
    flip = [i for i in gen_relative_distance(swapped, 1.0) if i.overlays[0].bbox2d == (0.0, 0.0, 5.0, 5.0)]
    assert base[0].answer == "dog" and flip[0].answer == "car"


def test_relative_distance_random_triples_match_oracle():
    r = np.random.default_rng(19)
    emitted = 0
    for idx in range(150):
        scene = random_3d_scene(r, idx, n_objects=4)
        for item in gen_relative_distance(scene, offset=0.3):
            emitted += 1
            assert reldist_oracle_ok(scene, item, offset=0.3)
    assert emitted > 50


# ---------------------------------------------------------------------------
# scoring


def make_graded(task: str, source: str, n: int, n_correct: int) -> list[GradedItem]:
    return [
        GradedItem(id=f"{task}-{source}-{i}", task=task, source=source, correct=i < n_correct)
        for i in range(n)
    ]


def test_score_formula_fixture():
    graded = (
        make_graded("object_count", "coco-like", 10, 6)  # 0.6
        + make_graded("spatial_relationship", "ade-like", 10, 8)  # 0.8
        + make_graded("depth_order", "omni3d-like", 10, 7)  # 0.7 pooled
    )
    score = score_cvbench(graded)
    assert score.acc_coco == pytest.approx(0.6)
    assert score.acc_ade == pytest.approx(0.8)
    assert score.acc_3d == pytest.approx(0.7)
    assert score.acc_2d == pytest.approx(0.7)
    assert score.overall == pytest.approx(0.7)


def test_score_all_correct():
    graded = (
        make_graded("object_count", "coco-like", 4, 4)
        + make_graded("spatial_relationship", "ade-like", 4, 4)
        + make_graded("relative_distance", "omni3d-like", 4, 4)
    )
    assert score_cvbench(graded).overall == 1.0


def test_score_empty_bucket_names_bucket():
    graded = make_graded("object_count", "coco-like", 4, 4) + make_graded(
        "depth_order", "omni3d-like", 4, 4
    )
    with pytest.raises(ValueError) as err:
        score_cvbench(graded)
    assert "ade" in str(err.value)


def test_score_invariants_random():
    r = np.random.default_rng(23)
    for _ in range(20):
        graded = (
            make_graded("object_count", "coco-like", 10, int(r.integers(0, 11)))
            + make_graded("spatial_relationship", "ade-like", 10, int(r.integers(0, 11)))
            + make_graded("depth_order", "omni3d-like", 10, int(r.integers(0, 11)))
        )
        s = score_cvbench(graded)
        assert s.acc_2d == pytest.approx((s.acc_coco + s.acc_ade) / 2)
        assert s.overall == pytest.approx((s.acc_2d + s.acc_3d) / 2)


def test_composition_summary_layout():
    tasks = (
        ["spatial_relationship"] * 650
        + ["object_count"] * 788
        + ["depth_order"] * 600
        + ["relative_distance"] * 600
    )
    text = composition_summary(tasks)
    lines = text.splitlines()
    assert any(line.startswith("Depth Order") and line.endswith("600") for line in lines)
    assert any(line.startswith("Object Count") and line.endswith("788") for line in lines)
    assert lines[-1].startswith("Total") and lines[-1].endswith("2638")


# ---------------------------------------------------------------------------
# serialization round trips


def test_scene_and_item_roundtrip(tmp_path):
    r = np.random.default_rng(29)
    scenes = [random_2d_scene(r, i) for i in range(3)] + [random_3d_scene(r, i) for i in range(3)]
    scene_file = tmp_path / "scenes.jsonl"
    scene_file.write_text("\n".join(scene_to_json(s) for s in scenes) + "\n")
    loaded = load_scenes(scene_file)
    assert [scene_to_json(s) for s in loaded] == [scene_to_json(s) for s in scenes]

    items = []
    for scene in loaded:
        items.extend(gen_spatial(scene, 1))
        items.extend(gen_depth_order(scene, 0.3))
    item_file = tmp_path / "items.jsonl"
    save_items(item_file, items)
    back = load_items(item_file)
    assert [i.to_json() for i in back] == [i.to_json() for i in items]


def test_bad_scene_record_raises_with_line(tmp_path):
    path = tmp_path / "scenes.jsonl"
    path.write_text('{"id": "a", "source": "coco-like", "objects": [{"category": "x", "bbox2d": [0, 0, -1, 5]}]}\n')
    with pytest.raises(ValueError) as err:
        load_scenes(path)
    assert ":1:" in str(err.value)

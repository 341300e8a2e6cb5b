"""End-to-end command line runs over small fixtures."""

from __future__ import annotations

import json

import numpy as np
import pytest
from click.testing import CliRunner
from PIL import Image

from mmforge.cli import main
from mmforge.curate import DataPool, PoolRecord, save_pool
from mmforge.cvbench import Scene, SceneObject, scene_to_json


@pytest.fixture
def runner():
    return CliRunner()


def write_sva_config(path, **overrides):
    cfg = {
        "grid_side": 2,
        "hidden_dim": 3,
        "multipliers": [1, 2],
        "depth": 1,
        "groups": 1,
        "seed": 0,
        "use_global_query_augmentation": False,
        "grad_check": True,
    }
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return path


def test_sva_bench_reports_pass_records(runner, tmp_path):
    config = write_sva_config(tmp_path / "cfg.json")
    out = tmp_path / "report.jsonl"
    result = runner.invoke(main, ["sva", "bench", "--config", str(config), "--out", str(out)])
    assert result.exit_code == 0, result.output
    records = [json.loads(line) for line in out.read_text().splitlines()]
    names = {r["name"] for r in records}
    assert "forward_tokens" in names and "grad_check_max_rel_err" in names
    assert all(r["pass"] for r in records)
    assert "encoder0" in result.output  # attention-mass report footer


def test_connector_compare_table(runner, tmp_path):
    config = write_sva_config(tmp_path / "cfg.json", grad_check=False, target_tokens=4)
    result = runner.invoke(main, ["connector", "compare", "--config", str(config)])
    assert result.exit_code == 0, result.output
    assert "spatial-aggregator" in result.output
    assert "concat-ensemble" in result.output
    assert "resampler" in result.output


def test_cvbench_gen_and_score(runner, tmp_path):
    scenes = [
        Scene(
            id="a",
            source="coco-like",
            objects=(
                SceneObject("dog", (0, 0, 10, 10)),
                SceneObject("car", (100, 0, 10, 10)),
            ),
        ),
        Scene(
            id="b",
            source="omni3d-like",
            objects=(
                SceneObject("dog", (0, 0, 5, 5), corners3d=tuple((0.0, 0.0, 1.0) for _ in range(8))),
                SceneObject("car", (9, 0, 5, 5), corners3d=tuple((0.0, 0.0, 6.0) for _ in range(8))),
            ),
        ),
    ]
    scene_file = tmp_path / "scenes.jsonl"
    scene_file.write_text("\n".join(scene_to_json(s) for s in scenes) + "\n")
    items_file = tmp_path / "items.jsonl"
    result = runner.invoke(
        main,
        ["cvbench", "gen", "--scenes", str(scene_file), "--seed", "3", "--out", str(items_file)],
    )
    assert result.exit_code == 0, result.output
    assert "Total" in result.output
    assert items_file.exists()

    graded_file = tmp_path / "graded.jsonl"
    graded = [
        {"id": "1", "task": "object_count", "source": "coco-like", "correct": True},
        {"id": "2", "task": "spatial_relationship", "source": "ade-like", "correct": False},
        {"id": "3", "task": "depth_order", "source": "omni3d-like", "correct": True},
    ]
    graded_file.write_text("\n".join(json.dumps(g) for g in graded) + "\n")
    result = runner.invoke(main, ["cvbench", "score", "--graded", str(graded_file)])
    assert result.exit_code == 0, result.output
    # acc_2d = (1.0 + 0.0)/2, overall = (0.5 + 1.0)/2
    assert "overall: 0.7500" in result.output


def test_curate_balance_and_mix(runner, tmp_path):
    records = []
    for i in range(30):
        records.append(PoolRecord(id=f"g{i}", source="big", category="General"))
    for i in range(5):
        records.append(PoolRecord(id=f"o{i}", source="small", category="OCR"))
    pool_file = tmp_path / "pool.jsonl"
    save_pool(pool_file, DataPool(records))

    balanced = tmp_path / "balanced.jsonl"
    result = runner.invoke(
        main,
        ["curate", "balance", "--pool", str(pool_file), "--t", "10", "--out", str(balanced)],
    )
    assert result.exit_code == 0, result.output
    assert "output records: 15" in result.output

    ratios = tmp_path / "ratios.json"
    ratios.write_text(json.dumps({"ratios": {"General": 0.6, "OCR": 0.4}}))
    mixed = tmp_path / "mixed.jsonl"
    result = runner.invoke(
        main,
        ["curate", "mix", "--pool", str(pool_file), "--ratios", str(ratios), "--n", "10", "--out", str(mixed)],
    )
    assert result.exit_code == 0, result.output
    assert '"General": 6' in result.output and '"OCR": 4' in result.output


def test_curate_leak_on_image_trees(runner, tmp_path):
    rng = np.random.default_rng(0)
    train_dir = tmp_path / "train"
    tests_dir = tmp_path / "tests" / "bench-a"
    train_dir.mkdir()
    tests_dir.mkdir(parents=True)

    shared = rng.integers(0, 255, size=(16, 16), dtype=np.uint8)
    unique = rng.integers(0, 255, size=(16, 16), dtype=np.uint8)
    Image.fromarray(shared).save(train_dir / "img0.png")
    Image.fromarray(shared).save(tests_dir / "dup.png")
    Image.fromarray(unique).save(tests_dir / "fresh.png")

    result = runner.invoke(
        main, ["curate", "leak", "--train", str(train_dir), "--tests", str(tmp_path / "tests")]
    )
    assert result.exit_code == 0, result.output
    assert "bench-a" in result.output
    assert "(50.00%)" in result.output


def test_curate_engine_mock(runner, tmp_path):
    journal = tmp_path / "journal.jsonl"
    out = tmp_path / "items.jsonl"
    args = [
        "curate", "engine", "--field", "Physics", "--mock",
        "--journal", str(journal), "--out", str(out),
    ]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    assert "generated 1 items" in result.output
    item = json.loads(out.read_text().splitlines()[0])
    assert item["Question"]

    # resumed run reuses the journal
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    assert "generated 1 items" in result.output


def test_eval_grade_rules(runner, tmp_path):
    responses = tmp_path / "responses.jsonl"
    rows = [
        {"id": "1", "prediction": "Apple", "answer": "(a) Apple"},
        {"id": "2", "prediction": "25", "answer": "29"},
    ]
    responses.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    result = runner.invoke(main, ["eval", "grade", "--responses", str(responses)])
    assert result.exit_code == 0, result.output
    assert "accuracy: 1/2 = 0.5000" in result.output


def write_score_csvs(tmp_path, enabled_scores, disabled_scores=None):
    meta = tmp_path / "meta.csv"
    meta.write_text(
        "benchmark,category,scale_divisor,num_choices,size\n"
        "b0,General,1,4,100\n"
        "b1,General,1,4,100\n"
        "b2,Vision-Centric,1,2,100\n"
        "b3,Vision-Centric,1,2,100\n"
    )

    def write(path, scores):
        lines = ["model,b0,b1,b2,b3"]
        for m, row in enumerate(scores):
            lines.append(",".join([f"m{m}"] + [str(v) for v in row]))
        path.write_text("\n".join(lines) + "\n")

    enabled = tmp_path / "enabled.csv"
    write(enabled, enabled_scores)
    disabled = None
    if disabled_scores is not None:
        disabled = tmp_path / "disabled.csv"
        write(disabled, disabled_scores)
    return enabled, disabled, meta


def test_eval_cluster_emits_plot_data(runner, tmp_path):
    rng = np.random.default_rng(5)
    a = rng.uniform(40, 60, size=4)
    b = rng.uniform(62, 90, size=4)
    scores = np.column_stack([a, a + 0.5, b, b - 0.5])
    enabled, _, meta = write_score_csvs(tmp_path, scores)
    out = tmp_path / "plot.json"
    result = runner.invoke(
        main,
        ["eval", "cluster", "--table", str(enabled), "--meta", str(meta), "--k", "2", "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text())
    assert len(payload["benchmarks"]) == 4
    labels = [row["cluster"] for row in payload["benchmarks"]]
    assert labels[0] == labels[1] and labels[2] == labels[3] and labels[0] != labels[2]


def test_eval_gaps_output(runner, tmp_path):
    enabled, disabled, meta = write_score_csvs(
        tmp_path,
        [[80.0, 54.0, 90.0, 70.0]],
        [[40.0, 50.0, 45.0, 68.0]],
    )
    result = runner.invoke(
        main,
        ["eval", "gaps", "--enabled", str(enabled), "--disabled", str(disabled), "--meta", str(meta)],
    )
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[1].startswith("b2")  # largest gap first
    assert "vision-insensitive" in result.output  # b1 and b3 fall under the flag

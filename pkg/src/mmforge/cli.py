"""`forge` command line: connector benches, item generation, curation, grading, review."""

from __future__ import annotations

import json
import time
from pathlib import Path

import click
import numpy as np

from . import connector as cn
from . import numcore as nc
from .curate import (
    CuratorConfig,
    apply_threshold,
    cumulative_curve,
    dhash,
    leakage_scan,
    load_pool,
    mix_by_ratio,
    normalize_ratios,
    save_pool,
)
from .curate.clients import (
    ClientError,
    HttpChatClient,
    HttpPageClient,
    HttpSearchClient,
    MockChatClient,
    MockPageClient,
    MockSearchClient,
)
from .curate.engine import DataEngine, EngineJournal
from .cvbench import (
    composition_summary,
    generate_all,
    load_graded,
    load_items,
    load_scenes,
    save_items,
    score_cvbench,
)
from .evalkit import ScoreTable, fuzzy_match, pca_cluster, vision_gap_report
from .evalkit.grader import grade_many
from .review import ReviewStore, create_app


@click.group()
def main():
    """Desk-scale multimodal-LLM tooling."""


# ---------------------------------------------------------------------------
# sva


def _load_sva_config(path: str) -> tuple[cn.SvaConfig, dict]:
    raw = json.loads(Path(path).read_text())
    cfg = cn.SvaConfig(
        grid_side=int(raw["grid_side"]),
        hidden_dim=int(raw["hidden_dim"]),
        multipliers=tuple(raw["multipliers"]),
        depth=int(raw.get("depth", 1)),
        groups=int(raw.get("groups", 1)),
        host_stride=raw.get("host_stride"),
        use_positional_encoding=bool(raw.get("use_positional_encoding", True)),
        use_global_query_augmentation=bool(raw.get("use_global_query_augmentation", False)),
        residual=bool(raw.get("residual", True)),
    )
    return cfg, raw


def _features_for(cfg: cn.SvaConfig, raw: dict) -> list[cn.EncoderFeatureMap]:
    files = raw.get("feature_files")
    features = []
    if files:
        if len(files) != cfg.num_encoders:
            raise click.ClickException(
                f"config lists {cfg.num_encoders} encoders but {len(files)} feature files"
            )
        for k, path in enumerate(files):
            grid = nc.load_tensor(path)
            features.append(cn.EncoderFeatureMap(index=k, multiplier=cfg.multipliers[k], grid=grid))
    else:
        rng = np.random.default_rng(int(raw.get("seed", 0)) + 1)
        for k, m in enumerate(cfg.multipliers):
            side = m * cfg.grid_side
            grid = nc.Tensor(rng.standard_normal((side, side, cfg.hidden_dim)))
            features.append(cn.EncoderFeatureMap(index=k, multiplier=m, grid=grid))
    return features


@main.group()
def sva():
    """Spatial aggregator checks."""


@sva.command("bench")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write JSONL records here.")
def sva_bench(config_path, out_path):
    """Forward pass, gradient check, and attention-mass report for one config."""
    cfg, raw = _load_sva_config(config_path)
    seed = int(raw.get("seed", 0))
    if raw.get("params_dir"):
        params = cn.SvaParams.load_directory(cfg, raw["params_dir"])
    else:
        params = cn.SvaParams.initialize(cfg, seed=seed)
    features = _features_for(cfg, raw)

    records = []

    def check(name, value, ok):
        records.append({"name": name, "value": value, "pass": bool(ok)})

    trace = cn.SvaTrace()
    t0 = time.perf_counter()
    out = cn.sva_forward(features, params, cfg, trace=trace)
    forward_s = time.perf_counter() - t0
    check("forward_tokens", out.shape[0], out.shape[0] == cfg.output_tokens)
    check("forward_seconds", forward_s, True)

    worst = max(abs(float(s.weights.sum()) - 1.0) for s in trace.states)
    check("weights_normalization_err", worst, worst < 1e-9)

    mass = cn.attention_mass_by_encoder(trace)
    check("attention_mass_sum_err", abs(float(mass.sum()) - 1.0), abs(float(mass.sum()) - 1.0) < 1e-9)
    names = raw.get("encoder_names") or [f"encoder{k}" for k in range(cfg.num_encoders)]
    for k, frac in enumerate(mass):
        check(f"attention_mass[{names[k]}]", float(frac), True)

    if raw.get("grad_check", True):
        eps = float(raw.get("grad_eps", 1e-5))
        tol = float(raw.get("grad_tolerance", 1e-4))

        def loss_fn(tensors):
            p = cn.SvaParams(cfg, dict(tensors))
            y = cn.sva_forward(features, p, cfg)
            return nc.sum_all(nc.mul(y, y))

        t0 = time.perf_counter()
        result = nc.grad_check(loss_fn, params.tensors, eps=eps)
        check("grad_check_max_rel_err", result.max_rel_error, result.max_rel_error < tol)
        check("grad_check_seconds", time.perf_counter() - t0, True)

    lines = "\n".join(json.dumps(r) for r in records)
    if out_path:
        Path(out_path).write_text(lines + "\n")
    click.echo(lines)
    click.echo(cn.format_attention_mass(mass, names))
    if not all(r["pass"] for r in records):
        raise SystemExit(1)


# ---------------------------------------------------------------------------
# connector comparison


@main.group("connector")
def connector_group():
    """Connector baselines."""


@connector_group.command("compare")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def connector_compare(config_path):
    """Token counts and timing: spatial aggregator vs ensemble vs resampler."""
    cfg, raw = _load_sva_config(config_path)
    seed = int(raw.get("seed", 0))
    params = cn.SvaParams.initialize(cfg, seed=seed)
    features = _features_for(cfg, raw)

    t0 = time.perf_counter()
    sva_out = cn.sva_forward(features, params, cfg)
    sva_s = time.perf_counter() - t0

    raw_maps = []
    for fmap in features:
        h, w, c = fmap.grid.shape
        raw_maps.append(nc.reshape(fmap.grid, (h * w, c)))
    target = int(raw.get("target_tokens", cfg.tokens_per_group))
    t0 = time.perf_counter()
    ens = cn.concat_ensemble(raw_maps, target_tokens=target)
    ens_s = time.perf_counter() - t0

    r_latents = int(raw.get("resampler_latents", cfg.tokens_per_group))
    rng = np.random.default_rng(seed + 2)
    latents = nc.Tensor(rng.standard_normal((r_latents, cfg.hidden_dim)))
    rp = cn.ResamplerParams.initialize(cfg.hidden_dim, seed=seed + 3)
    flat = cn.flatten_feature_maps(features)
    t0 = time.perf_counter()
    res_out = cn.resampler(latents, flat, rp)
    res_s = time.perf_counter() - t0

    rows = [
        ("spatial-aggregator", sva_out.shape[0], sva_out.shape[1], sva_s),
        ("concat-ensemble", ens.tokens.shape[0], ens.tokens.shape[1], ens_s),
        ("resampler", res_out.shape[0], res_out.shape[1], res_s),
    ]
    click.echo(f"{'connector':<20} {'tokens':>8} {'dim':>6} {'seconds':>10}")
    for name, tokens, dim, seconds in rows:
        click.echo(f"{name:<20} {tokens:>8} {dim:>6} {seconds:>10.4f}")


# ---------------------------------------------------------------------------
# cvbench


@main.group()
def cvbench():
    """VQA item generation and scoring."""


@cvbench.command("gen")
@click.option("--scenes", "scenes_path", required=True, type=click.Path(exists=True))
@click.option("--offset-3d", default=0.3, show_default=True, help="3D separation margin in meters.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
def cvbench_gen(scenes_path, offset_3d, seed, out_path):
    """Generate question items from a scene file."""
    scenes = load_scenes(scenes_path)
    items = generate_all(scenes, global_seed=seed, offset_3d=offset_3d)
    if out_path:
        save_items(out_path, items)
        click.echo(f"wrote {len(items)} items to {out_path}")
    else:
        for item in items:
            click.echo(item.to_json())
    click.echo(composition_summary([i.task for i in items]))


@cvbench.command("score")
@click.option("--graded", "graded_path", required=True, type=click.Path(exists=True))
def cvbench_score(graded_path):
    """Score graded responses with the two-level 2D/3D averaging."""
    score = score_cvbench(load_graded(graded_path))
    for field in ("acc_coco", "acc_ade", "acc_2d", "acc_3d", "overall"):
        click.echo(f"{field}: {getattr(score, field):.4f}")


# ---------------------------------------------------------------------------
# curate


@main.group()
def curate():
    """Instruction-data pool curation."""


@curate.command("balance")
@click.option("--pool", "pool_path", required=True, type=click.Path(exists=True))
@click.option("--t", "threshold", required=True, type=int, help="Per-source record cap.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
def curate_balance(pool_path, threshold, seed, out_path):
    """Cap every source at --t records (seeded uniform subsample)."""
    pool = load_pool(pool_path)
    curve = cumulative_curve(pool)
    balanced = apply_threshold(pool, threshold, seed=seed)
    click.echo(f"input records: {len(pool)}  output records: {len(balanced)}")
    click.echo("cumulative curve (rank, records): " + ", ".join(str(p) for p in curve))
    if out_path:
        save_pool(out_path, balanced)
        click.echo(f"wrote {out_path}")


@curate.command("mix")
@click.option("--pool", "pool_path", required=True, type=click.Path(exists=True))
@click.option("--ratios", "ratios_path", required=True, type=click.Path(exists=True))
@click.option("--n", "target_size", required=True, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
def curate_mix(pool_path, ratios_path, target_size, seed, out_path):
    """Sample a category-ratio mix of --n records."""
    pool = load_pool(pool_path)
    ratios = normalize_ratios(
        {k: float(v) for k, v in json.loads(Path(ratios_path).read_text())["ratios"].items()}
    )
    cfg = CuratorConfig(threshold=1, ratios=ratios, target_size=target_size, seed=seed)
    result = mix_by_ratio(pool, cfg)
    click.echo(f"mixed records: {len(result.pool)}")
    click.echo("allocations: " + json.dumps(result.allocations, sort_keys=True))
    if result.shortfalls:
        click.echo("shortfalls: " + json.dumps(result.shortfalls, sort_keys=True))
    if out_path:
        save_pool(out_path, result.pool)
        click.echo(f"wrote {out_path}")


def _hash_directory(path: Path) -> list[int]:
    from PIL import Image

    from .curate.dhash import dhash_many

    rasters = []
    for file in sorted(path.rglob("*")):
        if not file.is_file() or file.suffix.lower() not in (".png", ".jpg", ".jpeg", ".bmp", ".gif"):
            continue
        with Image.open(file) as img:
            rasters.append(np.asarray(img.convert("L"), dtype=np.float64))
    return dhash_many(rasters)


@curate.command("leak")
@click.option("--train", "train_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--tests", "tests_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--hamming", default=0, show_default=True, help="Match within this bit distance (0 = exact).")
@click.option("--json", "as_json", is_flag=True, help="Emit machine-readable records.")
def curate_leak(train_dir, tests_dir, hamming, as_json):
    """Hash train/test image trees and report exact-hash overlap per test set."""
    train_hashes = _hash_directory(Path(train_dir))
    tests_root = Path(tests_dir)
    subdirs = [d for d in sorted(tests_root.iterdir()) if d.is_dir()]
    if subdirs:
        test_sets = {d.name: _hash_directory(d) for d in subdirs}
    else:
        test_sets = {tests_root.name: _hash_directory(tests_root)}
    report = leakage_scan(train_hashes, test_sets, hamming_threshold=hamming)
    if as_json:
        click.echo(json.dumps(report.to_records()))
    else:
        click.echo(report.render_table())


_DEMO_TOPICS = {"Electromagnetism": ["Electric Field and Electric Potential"]}
_DEMO_URL = "https://en.wikipedia.org/wiki/Electric_potential"
_DEMO_PAGE = (
    "<h2>Electrostatics</h2><p>"
    + "An electric potential at a point in a static electric field is given by a line "
    + "integral along an arbitrary path from a fixed reference point, and it is uniquely "
    + "determined up to a constant. The field concept extends to time-varying settings "
    + "where the scalar potential alone no longer captures the dynamics, which motivates "
    + "the vector potential formulation used throughout electrodynamics and beyond today."
    + "</p><figure><img src='https://img.example/potential.png'>"
    + "<figcaption>Electric potential of separate positive and negative point charges.</figcaption>"
    + "</figure>"
)


@curate.command("engine")
@click.option("--field", "field_name", required=True)
@click.option("--mock", is_flag=True, help="Use canned demo clients instead of live endpoints.")
@click.option("--journal", "journal_path", type=click.Path(), default="engine-journal.jsonl", show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
def curate_engine(field_name, mock, journal_path, out_path):
    """Run the four-stage targeted data engine for one field."""
    if mock:
        qa = json.dumps({"Question": "What do the contour lines depict?", "Answer": "Equipotential lines."})
        chat = MockChatClient(lambda p: json.dumps(_DEMO_TOPICS) if "subfields" in p else qa)
        search = MockSearchClient({t: [_DEMO_URL] for ts in _DEMO_TOPICS.values() for t in ts})
        pages = MockPageClient({_DEMO_URL: _DEMO_PAGE})
    else:
        try:
            chat = HttpChatClient()
            search = HttpSearchClient()
        except ClientError as err:
            raise click.ClickException(str(err)) from err
        pages = HttpPageClient()
    engine = DataEngine(chat=chat, search=search, pages=pages, journal=EngineJournal(journal_path))
    items = engine.run_field(field_name)
    click.echo(f"generated {len(items)} items; {len(engine.rejections)} rejections")
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            for item in items:
                fh.write(json.dumps(item.to_record(), sort_keys=True) + "\n")
        click.echo(f"wrote {out_path}")


# ---------------------------------------------------------------------------
# eval


@main.group("eval")
def eval_group():
    """Grading and benchmark analytics."""


@eval_group.command("grade")
@click.option("--responses", "responses_path", required=True, type=click.Path(exists=True))
@click.option("--llm", is_flag=True, help="Grade through the configured chat endpoint instead of rules.")
@click.option("--out", "out_path", type=click.Path(), default=None)
def eval_grade(responses_path, llm, out_path):
    """Grade JSONL responses ({id, prediction, answer}) and print accuracy."""
    client = None
    if llm:
        try:
            client = HttpChatClient()
        except ClientError as err:
            raise click.ClickException(str(err)) from err
    rows = []
    with open(responses_path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    pairs = [(str(r["prediction"]), str(r["answer"])) for r in rows]
    if llm:
        verdicts = grade_many(pairs, client)
    else:
        verdicts = [fuzzy_match(p, g) for p, g in pairs]
    records = [
        {"id": raw.get("id"), "verdict": v.value, "rule": v.rule_fired}
        for raw, v in zip(rows, verdicts)
    ]
    n_correct = sum(v.correct for v in verdicts)
    for rec in records:
        click.echo(json.dumps(rec))
    if out_path:
        Path(out_path).write_text("\n".join(json.dumps(r) for r in records) + "\n")
    total = len(records)
    click.echo(f"accuracy: {n_correct}/{total} = {n_correct / total:.4f}" if total else "no responses")


@eval_group.command("cluster")
@click.option("--table", "table_path", required=True, type=click.Path(exists=True))
@click.option("--meta", "meta_path", required=True, type=click.Path(exists=True))
@click.option("--k", default=4, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--names", "names_path", type=click.Path(exists=True), default=None,
              help="Optional JSON map of cluster id -> display name.")
@click.option("--out", "out_path", type=click.Path(), default=None)
def eval_cluster(table_path, meta_path, k, seed, names_path, out_path):
    """2D principal coordinates + cluster ids for each benchmark (plot data)."""
    table = ScoreTable.from_csv(table_path, meta_path)
    result = pca_cluster(table, k=k, seed=seed)
    names = json.loads(Path(names_path).read_text()) if names_path else {}
    payload = {
        "explained": list(result.explained),
        "benchmarks": [
            {
                "benchmark": bench,
                "x": float(result.coordinates[i, 0]),
                "y": float(result.coordinates[i, 1]),
                "cluster": int(result.labels[i]),
                "cluster_name": names.get(str(int(result.labels[i]))),
            }
            for i, bench in enumerate(result.benchmarks)
        ],
    }
    text = json.dumps(payload, indent=2)
    if out_path:
        Path(out_path).write_text(text + "\n")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text)


@eval_group.command("gaps")
@click.option("--enabled", "enabled_path", required=True, type=click.Path(exists=True))
@click.option("--disabled", "disabled_path", required=True, type=click.Path(exists=True))
@click.option("--meta", "meta_path", required=True, type=click.Path(exists=True))
def eval_gaps(enabled_path, disabled_path, meta_path):
    """Sort benchmarks by the cost of disabling visual input."""
    enabled = ScoreTable.from_csv(enabled_path, meta_path)
    disabled = ScoreTable.from_csv(disabled_path, meta_path)
    rows = vision_gap_report(enabled, disabled)
    click.echo(f"{'benchmark':<20} {'gap':>8} {'off-random':>11}  flag")
    for row in rows:
        base = "n/a" if row.disabled_minus_random is None else f"{row.disabled_minus_random:.2f}"
        flag = "vision-insensitive" if row.vision_insensitive else ""
        click.echo(f"{row.benchmark:<20} {row.gap:>8.2f} {base:>11}  {flag}")


# ---------------------------------------------------------------------------
# review


@main.group()
def review():
    """Human review loop."""


@review.command("serve")
@click.option("--items", "items_path", required=True, type=click.Path(exists=True))
@click.option("--journal", "journal_path", required=True, type=click.Path())
@click.option("--port", default=8787, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--static-dir", "static_dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Serve a frontend bundle at / alongside the API.")
def review_serve(items_path, journal_path, port, host, static_dir):
    """Serve the review API (and optionally the UI bundle) over HTTP."""
    import uvicorn

    store = ReviewStore(load_items(items_path), journal_path)
    app = create_app(store, static_dir=static_dir)
    click.echo(f"serving {store.stats()['total']} items on {host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()

"""Matching rules, referee grading, and score-table analytics."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmforge.curate.clients import MockChatClient
from mmforge.evalkit import (
    BenchmarkMeta,
    GradingError,
    ScoreTable,
    build_grader_prompt,
    category_scores,
    correlation_matrix,
    fuzzy_match,
    grade_llm,
    grader_template,
    pca_cluster,
    random_baseline,
    vision_gap_report,
)

FIXTURES = Path(__file__).parent / "fixtures"


# ---------------------------------------------------------------------------
# fuzzy matching


@pytest.mark.parametrize(
    "pred,gt,expected",
    [
        ("25", "29", "INCORRECT"),
        ("Yes", "Yes", "CORRECT"),
        ("80", "80", "CORRECT"),
        ("Ireland", "Italy", "INCORRECT"),
        ("UK", "UK", "CORRECT"),
        ("2019", "2011", "INCORRECT"),
    ],
)
def test_fuzzy_few_shot_verdicts(pred, gt, expected):
    assert fuzzy_match(pred, gt).value == expected


def test_fuzzy_option_letter_and_stem():
    assert fuzzy_match("the Apple", "(a) Apple").correct
    assert fuzzy_match("Apple", "(a) Apple").correct
    assert fuzzy_match("a", "(a) Apple").correct
    assert fuzzy_match("(b)", "(a) Apple").value == "INCORRECT"
    assert fuzzy_match("B.", "(a) Apple").value == "INCORRECT"


def test_fuzzy_numeric_boundary_inclusive():
    assert fuzzy_match("105", "100").value == "CORRECT"  # rel err exactly 0.05
    assert fuzzy_match("1.05", "1.0").value == "CORRECT"
    assert fuzzy_match("106", "100").value == "INCORRECT"


def test_fuzzy_numeric_formats():
    assert fuzzy_match("1,250", "1250").correct
    assert fuzzy_match("50%", "50").correct
    assert fuzzy_match("$3.00", "3").correct


def test_fuzzy_years_must_match_exactly():
    verdict = fuzzy_match("2018", "2019")
    assert verdict.value == "INCORRECT"
    assert verdict.rule_fired == "numeric-year-mismatch"
    assert fuzzy_match("1999", "1999").correct


def test_fuzzy_case_and_articles():
    assert fuzzy_match("THE CAT", "cat").correct
    assert fuzzy_match("An orange", "orange").correct


def test_fuzzy_token_substring():
    assert fuzzy_match("it is in paris", "Paris").correct
    assert fuzzy_match("north america", "america").correct
    # partial-word overlap must not count
    assert fuzzy_match("Ireland", "Island").value == "INCORRECT"


def test_fuzzy_rule_fired_names_one_rule():
    for pred, gt in [("yes", "yes"), ("25", "29"), ("x", "y"), ("the Apple", "(a) Apple")]:
        verdict = fuzzy_match(pred, gt)
        assert verdict.rule_fired
        assert " " not in verdict.rule_fired


@settings(max_examples=80, deadline=None)
@given(st.text(alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Nd"), max_codepoint=127), max_size=12))
def test_fuzzy_reflexive_and_case_insensitive(text):
    assert fuzzy_match(text, text).correct
    assert fuzzy_match(text.upper(), text.lower()).correct


# ---------------------------------------------------------------------------
# referee grading


def test_grader_template_byte_matches_fixture():
    expected = (FIXTURES / "grader_prompt_expected.txt").read_bytes()
    assert grader_template().encode("utf-8") == expected


def test_grader_prompt_substitution():
    prompt = build_grader_prompt("42", "41")
    assert prompt.endswith("answer: 42\ngt_answer: 41\nevaluation:\n")
    assert "{answer}" not in prompt and "{gt_answer}" not in prompt


def test_grade_llm_passthrough():
    assert grade_llm("x", "y", MockChatClient(["CORRECT"])).value == "CORRECT"


def test_grade_llm_lenient_parse():
    assert grade_llm("x", "y", MockChatClient(["incorrect."])).value == "INCORRECT"
    assert grade_llm("x", "y", MockChatClient(["  Correct!\n"])).value == "CORRECT"


def test_grade_llm_retry_then_error_carries_reply():
    client = MockChatClient(["hmm, unclear", "still unclear"])
    with pytest.raises(GradingError) as err:
        grade_llm("x", "y", client, retries=1)
    assert "still unclear" in str(err.value)
    assert len(client.prompts) == 2


def test_grade_llm_retry_recovers():
    client = MockChatClient(["no idea", "INCORRECT"])
    assert grade_llm("x", "y", client, retries=1).value == "INCORRECT"


def test_grade_many_parallel_preserves_order():
    from mmforge.evalkit.grader import grade_many

    def scripted(prompt: str) -> str:
        lines = prompt.strip().splitlines()
        pred = lines[-3].removeprefix("answer: ")
        gt = lines[-2].removeprefix("gt_answer: ")
        return "CORRECT" if pred == gt else "INCORRECT"

    pairs = [("same", "same"), ("other", "same"), ("same", "same"), ("nope", "same")]
    verdicts = grade_many(pairs, MockChatClient(scripted), workers=3)
    assert [v.value for v in verdicts] == ["CORRECT", "INCORRECT", "CORRECT", "INCORRECT"]


# ---------------------------------------------------------------------------
# score tables


def simple_table(scores, names=None, categories=None, **meta_kwargs) -> ScoreTable:
    scores = np.asarray(scores, dtype=float)
    n_bench = scores.shape[1]
    names = names or [f"bench{i}" for i in range(n_bench)]
    categories = categories or ["General"] * n_bench
    benchmarks = [
        BenchmarkMeta(name=names[i], category=categories[i], **meta_kwargs) for i in range(n_bench)
    ]
    models = [f"model{i}" for i in range(scores.shape[0])]
    return ScoreTable(models=models, benchmarks=benchmarks, scores=scores)


def test_table_csv_roundtrip(tmp_path):
    scores_csv = tmp_path / "scores.csv"
    meta_csv = tmp_path / "meta.csv"
    scores_csv.write_text("model,MME-P,GQA\nm1,1500,60\nm2,1400,55\n")
    meta_csv.write_text(
        "benchmark,category,scale_divisor,num_choices,size\n"
        "MME-P,General,20,,2374\n"
        "GQA,General,1,2,398\n"
    )
    table = ScoreTable.from_csv(scores_csv, meta_csv)
    assert table.models == ["m1", "m2"]
    assert table.benchmarks[0].scale_divisor == 20
    assert table.benchmarks[1].num_choices == 2
    assert table.scores[0, 0] == 1500


def test_table_missing_metadata_errors(tmp_path):
    (tmp_path / "s.csv").write_text("model,A\nm,1\n")
    (tmp_path / "m.csv").write_text("benchmark,category\nB,General\n")
    with pytest.raises(ValueError):
        ScoreTable.from_csv(tmp_path / "s.csv", tmp_path / "m.csv")


# ---------------------------------------------------------------------------
# category scores and baselines


def test_category_scores_applies_divisor():
    table = ScoreTable(
        models=["m"],
        benchmarks=[
            BenchmarkMeta(name="MME-P", category="General", scale_divisor=20.0),
            BenchmarkMeta(name="GQA", category="General"),
        ],
        scores=np.array([[1500.0, 65.0]]),
    )
    out = category_scores(table)
    assert out["m"]["General"] == pytest.approx((75.0 + 65.0) / 2)


def test_category_scores_single_benchmark_category():
    table = simple_table([[42.0]], names=["only"], categories=["Vision-Centric"])
    assert category_scores(table)["model0"]["Vision-Centric"] == 42.0


def test_category_scores_against_loop_oracle():
    rng = np.random.default_rng(3)
    scores = rng.uniform(0, 100, size=(5, 6))
    cats = ["General", "General", "Knowledge", "OCR & Chart", "Knowledge", "Vision-Centric"]
    table = simple_table(scores, categories=cats)
    got = category_scores(table)
    for m, model in enumerate(table.models):
        for cat in set(cats):
            cols = [i for i, c in enumerate(cats) if c == cat]
            expected = sum(scores[m, i] for i in cols) / len(cols)
            assert abs(got[model][cat] - expected) < 1e-12


def test_category_scores_order_invariant_within_category():
    scores = np.array([[10.0, 20.0, 30.0]])
    t1 = simple_table(scores, names=["a", "b", "c"])
    t2 = simple_table(scores[:, ::-1], names=["c", "b", "a"])
    assert category_scores(t1)["model0"]["General"] == category_scores(t2)["model0"]["General"]


def test_random_baseline():
    assert random_baseline(BenchmarkMeta(name="x", category="General", num_choices=4)) == 25.0
    assert random_baseline(BenchmarkMeta(name="x", category="General", num_choices=2)) == 50.0
    with pytest.raises(ValueError):
        random_baseline(BenchmarkMeta(name="x", category="General"))
    with pytest.raises(ValueError):
        random_baseline(
            BenchmarkMeta(name="x", category="General", num_choices=2, paired_scoring=True)
        )


# ---------------------------------------------------------------------------
# vision gap report


def test_gap_zero_everywhere_all_flagged():
    scores = np.array([[50.0, 60.0], [55.0, 65.0]])
    table = simple_table(scores, num_choices=4)
    rows = vision_gap_report(table, table)
    assert all(r.gap == 0.0 for r in rows)
    assert all(r.vision_insensitive for r in rows)
    assert all(r.disabled_minus_random is not None for r in rows)


def test_gap_largest_sorts_first():
    enabled = simple_table(np.array([[90.0, 52.0, 61.0]]), names=["big", "small", "mid"])
    disabled = simple_table(np.array([[50.0, 51.0, 55.0]]), names=["big", "small", "mid"])
    rows = vision_gap_report(enabled, disabled)
    assert [r.benchmark for r in rows] == ["big", "mid", "small"]
    assert rows[0].gap == pytest.approx(40.0)


def test_gap_flag_boundary_strict():
    enabled = simple_table(np.array([[55.0]]))
    disabled = simple_table(np.array([[50.0]]))
    rows = vision_gap_report(enabled, disabled)
    assert rows[0].gap == pytest.approx(5.0)
    assert rows[0].vision_insensitive is False  # strictly-below rule


def test_gap_benchmark_mismatch_errors():
    a = simple_table(np.array([[1.0]]), names=["x"])
    b = simple_table(np.array([[1.0]]), names=["y"])
    with pytest.raises(ValueError):
        vision_gap_report(a, b)


# ---------------------------------------------------------------------------
# correlation matrix


def corr_oracle(x: np.ndarray) -> np.ndarray:
    # textbook pairwise formula
    n, b = x.shape
    out = np.eye(b)
    for i in range(b):
        for j in range(b):
            xi, xj = x[:, i], x[:, j]
            num = ((xi - xi.mean()) * (xj - xj.mean())).sum()
            den = np.sqrt(((xi - xi.mean()) ** 2).sum() * ((xj - xj.mean()) ** 2).sum())
            out[i, j] = num / den if den else (1.0 if i == j else 0.0)
    return out


def test_correlation_duplicated_column_is_one():
    col = np.random.default_rng(5).uniform(0, 100, size=5)
    table = simple_table(np.column_stack([col, col]))
    corr = correlation_matrix(table)
    assert corr[0, 1] == pytest.approx(1.0, abs=1e-12)


def test_correlation_negated_column_is_minus_one():
    col = np.random.default_rng(7).uniform(0, 100, size=5)
    table = simple_table(np.column_stack([col, -col]))
    assert correlation_matrix(table)[0, 1] == pytest.approx(-1.0, abs=1e-12)


def test_correlation_against_textbook_oracle():
    x = np.random.default_rng(9).uniform(0, 100, size=(10, 5))
    table = simple_table(x)
    got = correlation_matrix(table)
    assert np.max(np.abs(got - corr_oracle(x))) < 1e-10


def test_correlation_symmetric_unit_diagonal_bounded():
    x = np.random.default_rng(11).uniform(0, 100, size=(8, 6))
    corr = correlation_matrix(simple_table(x))
    assert np.array_equal(corr, corr.T)
    assert np.allclose(np.diag(corr), 1.0)
    assert np.all(corr <= 1.0) and np.all(corr >= -1.0)


def test_correlation_zero_variance_warns_and_zeroes():
    x = np.column_stack(
        [np.full(5, 3.0), np.random.default_rng(13).uniform(0, 1, size=5)]
    )
    with pytest.warns(UserWarning, match="zero-variance"):
        corr = correlation_matrix(simple_table(x))
    assert corr[0, 1] == 0.0
    assert corr[0, 0] == 1.0


def test_correlation_needs_two_models():
    with pytest.raises(ValueError):
        correlation_matrix(simple_table(np.array([[1.0, 2.0]])))


# ---------------------------------------------------------------------------
# PCA clustering


def planted_table(seed=0, n_models=20) -> ScoreTable:
    rng = np.random.default_rng(seed)
    profile_a = rng.uniform(0, 100, size=n_models)
    profile_b = rng.uniform(0, 100, size=n_models)
    noise = lambda: rng.normal(0, 0.5, size=n_models)  # noqa: E731
    cols = [profile_a + noise() for _ in range(3)] + [profile_b + noise() for _ in range(3)]
    return simple_table(np.column_stack(cols), names=[f"b{i}" for i in range(6)])


def test_pca_recovers_planted_clusters():
    table = planted_table()
    result = pca_cluster(table, k=2, seed=1)
    group_a = set(result.labels[:3])
    group_b = set(result.labels[3:])
    assert len(group_a) == 1 and len(group_b) == 1
    assert group_a != group_b


def test_pca_rank_one_table_explains_everything():
    rng = np.random.default_rng(17)
    base = rng.uniform(0, 1, size=8)
    weights = np.array([1.0, 2.0, -1.5, 0.5])
    table = simple_table(np.outer(base, weights))
    result = pca_cluster(table, k=2, seed=0)
    assert result.explained[0] == pytest.approx(1.0, abs=1e-9)
    assert result.explained[1] == pytest.approx(0.0, abs=1e-9)


def test_pca_coordinates_centered():
    table = planted_table(seed=3)
    result = pca_cluster(table, k=2, seed=0)
    means = result.coordinates.mean(axis=0)
    assert np.max(np.abs(means)) < 1e-10


def test_pca_deterministic_under_seed():
    table = planted_table(seed=5)
    r1 = pca_cluster(table, k=3, seed=9)
    r2 = pca_cluster(table, k=3, seed=9)
    assert np.array_equal(r1.labels, r2.labels)
    assert np.array_equal(r1.coordinates, r2.coordinates)


def test_pca_labels_invariant_to_column_order():
    table = planted_table(seed=7)
    perm = [3, 0, 5, 1, 4, 2]
    permuted = ScoreTable(
        models=table.models,
        benchmarks=[table.benchmarks[i] for i in perm],
        scores=table.scores[:, perm],
    )
    base = pca_cluster(table, k=2, seed=4)
    moved = pca_cluster(permuted, k=2, seed=4)
    # co-clustering must agree up to label names
    base_pairs = {
        (i, j)
        for i in range(6)
        for j in range(6)
        if base.labels[i] == base.labels[j]
    }
    inv = {orig: new for new, orig in enumerate(perm)}
    moved_pairs = {
        (i, j)
        for i in range(6)
        for j in range(6)
        if moved.labels[inv[i]] == moved.labels[inv[j]]
    }
    assert base_pairs == moved_pairs


def test_pca_k_validation():
    with pytest.raises(ValueError):
        pca_cluster(planted_table(), k=7)
    with pytest.raises(ValueError):
        pca_cluster(simple_table(np.array([[1.0, 2.0], [2.0, 1.0]])), k=1)

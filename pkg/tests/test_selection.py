import random

import pytest

from rewritemt.errors import MissingScore, RangeViolation
from rewritemt.selection import batch_select, select_one, tournament_select


def test_strict_improvement_chooses_rewrite():
    out = select_one("s1", 0.90, 0.95, "simplification")
    assert out.chosen == "rewrite"
    assert out.margin == pytest.approx(0.05)


def test_tie_keeps_original():
    out = select_one("s1", 0.90, 0.90, "simplification")
    assert out.chosen == "original"
    assert out.margin == 0.0


def test_worse_rewrite_keeps_original():
    out = select_one("s1", 0.95, 0.90, "simplification")
    assert out.chosen == "original"
    assert out.margin == pytest.approx(-0.05)


def test_out_of_range_scores_rejected():
    with pytest.raises(RangeViolation):
        select_one("s1", 1.2, 0.5, "m")
    with pytest.raises(RangeViolation):
        select_one("s1", 0.5, -0.1, "m")


def test_chosen_score_is_max_with_original_on_ties():
    rng = random.Random(99)
    for _ in range(10_000):
        a, b = rng.random(), rng.random()
        out = select_one("s", a, b, "m")
        chosen_score = b if out.chosen == "rewrite" else a
        assert chosen_score == max(a, b)
        if a == b:
            assert out.chosen == "original"


def test_selected_mean_never_below_original_mean():
    rng = random.Random(5)
    for _ in range(50):
        n = rng.randint(1, 200)
        pairs = {f"s{i}": (rng.random(), rng.random()) for i in range(n)}
        outcomes, _ = batch_select(pairs, "m")
        selected = [o.score_rewrite if o.chosen == "rewrite" else o.score_original
                    for o in outcomes]
        originals = [o.score_original for o in outcomes]
        assert sum(selected) / n >= sum(originals) / n - 1e-12


def test_batch_select_counts_and_order():
    pairs = {"b": (0.2, 0.9), "a": (0.9, 0.2), "c": (0.5, 0.5)}
    outcomes, summary = batch_select(pairs, "m", segment_order=["a", "b", "c"])
    assert [o.segment_id for o in outcomes] == ["a", "b", "c"]
    assert summary == {"n_rewrite_chosen": 1, "n_total": 3}


def test_batch_select_all_rewrites_better():
    pairs = {f"s{i}": (0.1, 0.9) for i in range(7)}
    _, summary = batch_select(pairs, "m")
    assert summary == {"n_rewrite_chosen": 7, "n_total": 7}


def test_batch_select_missing_score():
    with pytest.raises(MissingScore):
        batch_select({"a": (0.1, 0.2)}, "m", segment_order=["a", "b"])


def test_batch_select_is_pure():
    rng = random.Random(1)
    pairs = {f"s{i}": (rng.random(), rng.random()) for i in range(64)}
    first, summary1 = batch_select(pairs, "m")
    second, summary2 = batch_select(pairs, "m")
    assert first == second
    assert summary1 == summary2


def test_tournament_argmax_with_original_winning_ties():
    candidates = {"s1": {"a": 0.6, "b": 0.8}, "s2": {"a": 0.3, "b": 0.3}}
    originals = {"s1": 0.7, "s2": 0.3}
    outcomes, summary = tournament_select(candidates, originals, ["s1", "s2"])
    assert outcomes[0].chosen == "rewrite"
    assert outcomes[0].method == "tournament:b"
    assert outcomes[1].chosen == "original"  # tie with best candidate
    assert summary["n_rewrite_chosen"] == 1


def test_tournament_method_tie_resolved_by_name():
    candidates = {"s1": {"b": 0.9, "a": 0.9}}
    outcomes, _ = tournament_select(candidates, {"s1": 0.1}, ["s1"])
    assert outcomes[0].method == "tournament:a"

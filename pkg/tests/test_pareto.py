import random

import pytest

from rewritemt.errors import EmptyInput
from rewritemt.pareto import MethodPoint, dominates, frontier_flags, pareto_frontier


def pt(method, x, y):
    return MethodPoint(method, x, y)


def oracle_frontier(points):
    """Quadratic reference: a point survives iff nothing dominates it."""
    return [p for p in points if not any(dominates(q, p) for q in points)]


def as_set(points):
    return {(p.method, p.x, p.y) for p in points}


# -- dominates ---------------------------------------------------------------

def test_dominates_strictly_better():
    assert dominates(pt("a", 0.9, 0.9), pt("b", 0.5, 0.5))


def test_incomparable_points_do_not_dominate():
    assert not dominates(pt("a", 0.9, 0.5), pt("b", 0.5, 0.9))
    assert not dominates(pt("b", 0.5, 0.9), pt("a", 0.9, 0.5))


def test_equal_points_do_not_dominate():
    assert not dominates(pt("a", 0.9, 0.9), pt("b", 0.9, 0.9))


def test_dominates_with_one_axis_tied():
    assert dominates(pt("a", 0.9, 0.9), pt("b", 0.9, 0.5))
    assert dominates(pt("a", 0.9, 0.9), pt("b", 0.5, 0.9))


# -- pareto_frontier -----------------------------------------------------------

def test_worked_four_point_set():
    points = [pt("a", 0.9, 0.5), pt("b", 0.5, 0.9), pt("c", 0.8, 0.8), pt("d", 0.7, 0.7)]
    frontier = pareto_frontier(points)
    assert as_set(frontier) == {("a", 0.9, 0.5), ("c", 0.8, 0.8), ("b", 0.5, 0.9)}
    # stable order: descending x
    assert [p.method for p in frontier] == ["a", "c", "b"]


def test_single_point():
    assert pareto_frontier([pt("only", 0.5, 0.5)]) == [pt("only", 0.5, 0.5)]


def test_all_identical_points_all_returned():
    points = [pt(m, 0.5, 0.5) for m in "abc"]
    assert as_set(pareto_frontier(points)) == as_set(points)


def test_empty_input():
    with pytest.raises(EmptyInput):
        pareto_frontier([])


def test_sweep_equals_oracle_on_random_sets():
    rng = random.Random(1234)
    for trial in range(1000):
        n = rng.randint(1, 200)
        # small coordinate grid to force plenty of ties and duplicates
        points = [pt(f"m{i}", round(rng.uniform(0, 1), 2), round(rng.uniform(0, 1), 2))
                  for i in range(n)]
        assert as_set(pareto_frontier(points)) == as_set(oracle_frontier(points)), trial


def test_frontier_invariant_under_permutation():
    rng = random.Random(5)
    points = [pt(f"m{i}", rng.random(), rng.random()) for i in range(60)]
    shuffled = list(points)
    rng.shuffle(shuffled)
    assert as_set(pareto_frontier(points)) == as_set(pareto_frontier(shuffled))


def test_adding_dominated_point_never_changes_frontier():
    rng = random.Random(6)
    for _ in range(100):
        points = [pt(f"m{i}", rng.random(), rng.random()) for i in range(30)]
        frontier = pareto_frontier(points)
        anchor = rng.choice(frontier)
        dominated = pt("extra", anchor.x - 0.01, anchor.y - 0.01)
        assert as_set(pareto_frontier(points + [dominated])) == as_set(frontier)


def test_excluded_points_are_dominated_by_some_frontier_point():
    rng = random.Random(7)
    points = [pt(f"m{i}", round(rng.random(), 2), round(rng.random(), 2))
              for i in range(150)]
    frontier = pareto_frontier(points)
    frontier_keys = as_set(frontier)
    for p in points:
        if (p.method, p.x, p.y) in frontier_keys:
            continue
        assert any(dominates(q, p) for q in frontier)
    # frontier points are pairwise non-dominating
    for a in frontier:
        for b in frontier:
            assert not dominates(a, b)


def test_frontier_flags_export():
    points = [pt("a", 0.9, 0.5), pt("d", 0.7, 0.7), pt("c", 0.8, 0.8)]
    flags = {row["method"]: row["on_frontier"] for row in frontier_flags(points)}
    assert flags == {"a": True, "c": True, "d": False}

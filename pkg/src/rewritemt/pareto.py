"""Pareto frontier over (translatability, meaning preservation) method points.

Both objectives are higher-better. Computed by sort-and-sweep; duplicates on
the frontier are all kept, since two methods may land on the same point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyInput


@dataclass(frozen=True)
class MethodPoint:
    method: str
    x: float  # translatability mean
    y: float  # meaning-preservation mean

    def to_dict(self) -> dict:
        return {"method": self.method, "x": self.x, "y": self.y}


def dominates(a: MethodPoint, b: MethodPoint) -> bool:
    """a dominates b iff a is >= on both axes and > on at least one."""
    return a.x >= b.x and a.y >= b.y and (a.x > b.x or a.y > b.y)


def pareto_frontier(points: Sequence[MethodPoint]) -> list[MethodPoint]:
    """Exactly the non-dominated points, ordered by descending x then method.

    Identical coordinates never dominate each other, so coincident frontier
    points are all returned.
    """
    if not points:
        raise EmptyInput("points")
    ordered = sorted(points, key=lambda p: (-p.x, p.method))

    frontier: list[MethodPoint] = []
    best_y = float("-inf")  # max y among points with strictly larger x
    i = 0
    while i < len(ordered):
        # Group points sharing this x: within the group only the max-y
        # points survive; the group survives only if it beats every
        # larger-x point's y strictly (x-strict dominance otherwise).
        j = i
        while j < len(ordered) and ordered[j].x == ordered[i].x:
            j += 1
        group = ordered[i:j]
        group_best = max(p.y for p in group)
        if group_best > best_y:
            frontier.extend(p for p in group if p.y == group_best)
            best_y = group_best
        i = j
    return frontier


def frontier_flags(points: Sequence[MethodPoint]) -> list[dict]:
    """Plot-data export rows: x, y, label, on_frontier."""
    keyset = {(p.method, p.x, p.y) for p in pareto_frontier(points)}
    return [
        {"method": p.method, "x": p.x, "y": p.y,
         "on_frontier": (p.method, p.x, p.y) in keyset}
        for p in points
    ]

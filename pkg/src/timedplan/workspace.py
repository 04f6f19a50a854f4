"""Workspace geometry: box cells, grid decompositions, point location,
decomposition refinement, and per-agent service labelings.

Cells are axis-aligned boxes partitioning a bounding box.  Membership uses
half-open faces [lo, hi) with the global upper face closed, so every point
of the workspace lands in exactly one cell.  Cell indices are 1-based and
follow the construction order (grids: lexicographic by grid coordinate).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

from .errors import BoundsMismatch, CellSizeTooLarge, OutOfBounds

EPS_GEO = 1e-9


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise BoundsMismatch("lo/hi dimension mismatch")
        for a, b in zip(self.lo, self.hi):
            if not b > a:
                raise BoundsMismatch(f"degenerate box extent [{a}, {b}]")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def center(self) -> tuple[float, ...]:
        return tuple(0.5 * (a + b) for a, b in zip(self.lo, self.hi))

    @property
    def diameter(self) -> float:
        return math.sqrt(sum((b - a) ** 2 for a, b in zip(self.lo, self.hi)))

    def contains(self, p, eps: float = 0.0) -> bool:
        """Closed-box membership with optional inflation."""
        return all(a - eps <= x <= b + eps for x, a, b in zip(p, self.lo, self.hi))

    def distance(self, p) -> float:
        """Euclidean distance from p to the closed box (0 inside)."""
        acc = 0.0
        for x, a, b in zip(p, self.lo, self.hi):
            if x < a:
                acc += (a - x) ** 2
            elif x > b:
                acc += (x - b) ** 2
        return math.sqrt(acc)

    def sample(self, rng):
        return tuple(a + rng.random() * (b - a) for a, b in zip(self.lo, self.hi))


def _half_open_owns(cell: Box, bounds: Box, p) -> bool:
    for x, a, b, top in zip(p, cell.lo, cell.hi, bounds.hi):
        if x < a:
            return False
        if x >= b and not (x == b == top):
            return False
    return True


@dataclass(frozen=True)
class CellDecomposition:
    """A finite box partition of a bounding box.

    ``cuts`` is present for uniform grids and enables O(log) location;
    generic decompositions fall back to a scan with the same ownership rule.
    """

    bounds: Box
    cells: tuple[Box, ...]
    cuts: tuple[tuple[float, ...], ...] | None = field(default=None)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def dim(self) -> int:
        return self.bounds.dim

    @property
    def diameter(self) -> float:
        return max(c.diameter for c in self.cells)

    def cell(self, index: int) -> Box:
        if not 1 <= index <= len(self.cells):
            raise OutOfBounds(f"cell index {index} not in 1..{len(self.cells)}")
        return self.cells[index - 1]

    def center(self, index: int) -> tuple[float, ...]:
        return self.cell(index).center


def grid(bounds: Box, cell_size: float) -> CellDecomposition:
    """Uniform grid with ragged clipping at the upper faces.

    Each axis is cut every ``cell_size`` starting at the lower face; a final
    shorter cell absorbs the remainder.  Requires cell_size <= every side.
    """
    if cell_size <= 0:
        raise CellSizeTooLarge("cell size must be positive")
    for a, b in zip(bounds.lo, bounds.hi):
        if cell_size > (b - a) + EPS_GEO:
            raise CellSizeTooLarge(
                f"cell size {cell_size} exceeds workspace side {b - a}"
            )
    axes = []
    for a, b in zip(bounds.lo, bounds.hi):
        count = max(1, math.ceil((b - a) / cell_size - EPS_GEO))
        pts = [a + k * cell_size for k in range(count)] + [b]
        axes.append(tuple(pts))
    cells = []
    idx = [0] * bounds.dim
    while True:
        lo = tuple(axes[k][idx[k]] for k in range(bounds.dim))
        hi = tuple(axes[k][idx[k] + 1] for k in range(bounds.dim))
        cells.append(Box(lo, hi))
        for k in range(bounds.dim - 1, -1, -1):
            idx[k] += 1
            if idx[k] < len(axes[k]) - 1:
                break
            idx[k] = 0
        else:
            break
    return CellDecomposition(bounds=bounds, cells=tuple(cells), cuts=tuple(axes))


def from_cuts(bounds: Box, cuts_per_axis) -> CellDecomposition:
    """Non-uniform rectilinear decomposition from explicit cut points."""
    axes = []
    for k, cuts in enumerate(cuts_per_axis):
        pts = sorted(set(float(c) for c in cuts) | {bounds.lo[k], bounds.hi[k]})
        if pts[0] != bounds.lo[k] or pts[-1] != bounds.hi[k]:
            raise BoundsMismatch("cuts must stay inside the bounding box")
        axes.append(tuple(pts))
    cells = []
    idx = [0] * bounds.dim
    while True:
        lo = tuple(axes[k][idx[k]] for k in range(bounds.dim))
        hi = tuple(axes[k][idx[k] + 1] for k in range(bounds.dim))
        cells.append(Box(lo, hi))
        for k in range(bounds.dim - 1, -1, -1):
            idx[k] += 1
            if idx[k] < len(axes[k]) - 1:
                break
            idx[k] = 0
        else:
            break
    return CellDecomposition(bounds=bounds, cells=tuple(cells), cuts=tuple(axes))


def locate(dec: CellDecomposition, p) -> int:
    """Index (1-based) of the unique cell owning p under the half-open rule."""
    p = tuple(float(x) for x in p)
    if len(p) != dec.dim:
        raise BoundsMismatch(f"point dimension {len(p)} != workspace dimension {dec.dim}")
    if not dec.bounds.contains(p):
        raise OutOfBounds(f"point {p} outside workspace bounds")
    if dec.cuts is not None:
        coord = []
        for x, cuts in zip(p, dec.cuts):
            j = bisect_right(cuts, x) - 1
            if j >= len(cuts) - 1:  # closed top face
                j = len(cuts) - 2
            coord.append(j)
        index = 0
        for k in range(dec.dim):
            index = index * (len(dec.cuts[k]) - 1) + coord[k]
        return index + 1
    for i, cell in enumerate(dec.cells):
        if _half_open_owns(cell, dec.bounds, p):
            return i + 1
    raise OutOfBounds(f"point {p} not owned by any cell")  # pragma: no cover


def intersect_decompositions(
    abs_dec: CellDecomposition, spec_dec: CellDecomposition
) -> CellDecomposition:
    """Common refinement: every nonempty pairwise overlap becomes a cell.

    Output cells are ordered by (first-input index, second-input index) and
    each lies inside exactly one cell of each input.  Slivers with no
    interior are dropped.
    """
    if abs_dec.bounds != spec_dec.bounds:
        raise BoundsMismatch("decompositions cover different bounding boxes")
    cells = []
    for a in abs_dec.cells:
        for b in spec_dec.cells:
            lo = tuple(max(x, y) for x, y in zip(a.lo, b.lo))
            hi = tuple(min(x, y) for x, y in zip(a.hi, b.hi))
            if all(h - l > EPS_GEO for l, h in zip(lo, hi)):
                cells.append(Box(lo, hi))
    return CellDecomposition(bounds=abs_dec.bounds, cells=tuple(cells), cuts=None)


class ServiceLabeling:
    """Per-agent map from cell index to the service set offered there.

    Service alphabets must be disjoint across agents, which keeps joint
    labels unambiguous when unioned.
    """

    def __init__(self, assignments: dict[int, dict[int, frozenset[str]]]):
        self._by_agent = {
            int(agent): {int(c): frozenset(s) for c, s in cells.items() if s}
            for agent, cells in assignments.items()
        }
        seen: dict[str, int] = {}
        for agent in sorted(self._by_agent):
            for services in self._by_agent[agent].values():
                for s in services:
                    if s in seen and seen[s] != agent:
                        raise BoundsMismatch(
                            f"service {s!r} claimed by agents {seen[s]} and {agent}"
                        )
                    seen[s] = agent

    def label(self, agent: int, cell: int) -> frozenset[str]:
        return self._by_agent.get(agent, {}).get(cell, frozenset())

    def alphabet(self, agent: int) -> frozenset[str]:
        out = set()
        for services in self._by_agent.get(agent, {}).values():
            out |= services
        return frozenset(out)

    def agents(self) -> tuple[int, ...]:
        return tuple(sorted(self._by_agent))

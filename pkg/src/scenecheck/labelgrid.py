"""Label-map parsing and scene-object extraction.

A label grid is a per-pixel assignment of semantic class ids (0 denotes
background).  Scene objects are 8-connected same-class components with
geometric summaries: pixel count, centroid, bounding box and a traced
outer boundary.

All functions here are pure; LabelGrid and SceneObject are immutable
after construction and safe to share across threads.

Coordinate convention: row increases downward, column increases
rightward, so "above" always means a smaller row index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import FormatError, UnknownClassError

DEFAULT_MIN_AREA = 25

# Moore neighbourhood in clockwise order starting at West.  Consecutive
# entries are 4-adjacent to each other, which guarantees that the cell
# scanned just before a hit is 4-adjacent to that hit.
_MOORE = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))

_NEIGHBORS_8 = _MOORE
_NEIGHBORS_4 = ((-1, 0), (1, 0), (0, -1), (0, 1))


@dataclass(frozen=True)
class LabelGrid:
    """A 2-D grid of class ids plus the id -> name map for the scene."""

    image_id: str
    height: int
    width: int
    cells: tuple[int, ...]
    class_map: Mapping[int, str]

    def __post_init__(self) -> None:
        if self.height < 1 or self.width < 1:
            raise FormatError(f"grid must be at least 1x1, got {self.height}x{self.width}")
        if len(self.cells) != self.height * self.width:
            raise FormatError(
                f"cell count {len(self.cells)} != {self.height}x{self.width}"
            )
        for v in self.cells:
            if v != 0 and v not in self.class_map:
                raise UnknownClassError(f"class id {v} missing from class map")

    def at(self, row: int, col: int) -> int:
        return self.cells[row * self.width + col]

    def to_array(self) -> np.ndarray:
        return np.asarray(self.cells, dtype=np.int32).reshape(self.height, self.width)

    def diagonal(self) -> float:
        return float(np.hypot(self.height, self.width))

    def to_text(self) -> str:
        """Render back to the `.lgrid` text format."""
        lines = [f"{self.height} {self.width}"]
        for r in range(self.height):
            row = self.cells[r * self.width : (r + 1) * self.width]
            lines.append(" ".join(str(v) for v in row))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SceneObject:
    """One extracted connected component.

    `pixels` is the sorted tuple of (row, col) positions belonging to the
    component; `boundary` is the closed clockwise outer-boundary cycle
    starting at the top-left-most pixel.
    """

    object_id: int
    class_id: int
    pixel_count: int
    centroid: tuple[float, float]
    bbox: tuple[int, int, int, int]
    boundary: tuple[tuple[int, int], ...]
    pixels: tuple[tuple[int, int], ...] = field(repr=False)


def parse_label_grid(
    text: str, class_map: Mapping[int, str], image_id: str = ""
) -> LabelGrid:
    """Parse the `.lgrid` text format.

    First line is "height width"; each of the following `height` lines
    holds `width` space-separated non-negative integers.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty label grid text")
    header = lines[0].split()
    if len(header) != 2:
        raise FormatError(f"header must be 'height width', got {lines[0]!r}")
    try:
        height, width = int(header[0]), int(header[1])
    except ValueError:
        raise FormatError(f"non-integer header token in {lines[0]!r}") from None
    if height < 1 or width < 1:
        raise FormatError(f"grid must be at least 1x1, got {height}x{width}")
    if len(lines) - 1 != height:
        raise FormatError(f"expected {height} rows, got {len(lines) - 1}")
    cells: list[int] = []
    for ln in lines[1:]:
        tokens = ln.split()
        if len(tokens) != width:
            raise FormatError(f"ragged row: expected {width} tokens, got {len(tokens)}")
        for tok in tokens:
            try:
                v = int(tok)
            except ValueError:
                raise FormatError(f"non-integer cell token {tok!r}") from None
            if v < 0:
                raise FormatError(f"negative cell value {v}")
            cells.append(v)
    return LabelGrid(image_id, height, width, tuple(cells), dict(class_map))


def load_label_grid(path: str | Path, class_map: Mapping[int, str]) -> LabelGrid:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise FormatError(f"{path}: file not found") from None
    return parse_label_grid(text, class_map, image_id=path.stem)


def grid_from_array(
    arr: np.ndarray, class_map: Mapping[int, str], image_id: str = ""
) -> LabelGrid:
    arr = np.asarray(arr)
    return LabelGrid(
        image_id,
        int(arr.shape[0]),
        int(arr.shape[1]),
        tuple(int(v) for v in arr.ravel()),
        dict(class_map),
    )


def extract_objects(grid: LabelGrid, min_area: int = DEFAULT_MIN_AREA) -> list[SceneObject]:
    """Extract 8-connected same-class components of at least `min_area` pixels.

    Background (id 0) never yields objects.  Object ids are assigned in
    raster order of each kept component's first pixel, so extraction is
    deterministic for a given grid.
    """
    if min_area < 1:
        raise ValueError("min_area must be >= 1")
    arr = grid.to_array()
    h, w = arr.shape
    visited = np.zeros((h, w), dtype=bool)
    objects: list[SceneObject] = []
    for r0 in range(h):
        for c0 in range(w):
            if visited[r0, c0] or arr[r0, c0] == 0:
                continue
            class_id = int(arr[r0, c0])
            stack = [(r0, c0)]
            visited[r0, c0] = True
            pixels: list[tuple[int, int]] = []
            while stack:
                r, c = stack.pop()
                pixels.append((r, c))
                for dr, dc in _NEIGHBORS_8:
                    nr, nc = r + dr, c + dc
                    if 0 <= nr < h and 0 <= nc < w and not visited[nr, nc] and arr[nr, nc] == class_id:
                        visited[nr, nc] = True
                        stack.append((nr, nc))
            if len(pixels) < min_area:
                continue
            pixels.sort()
            rows = np.array([p[0] for p in pixels], dtype=np.float64)
            cols = np.array([p[1] for p in pixels], dtype=np.float64)
            obj = SceneObject(
                object_id=len(objects),
                class_id=class_id,
                pixel_count=len(pixels),
                centroid=(float(rows.mean()), float(cols.mean())),
                bbox=(int(rows.min()), int(cols.min()), int(rows.max()), int(cols.max())),
                boundary=_trace(frozenset(pixels)),
                pixels=tuple(pixels),
            )
            objects.append(obj)
    return objects


def trace_boundary(grid: LabelGrid, obj: SceneObject) -> tuple[tuple[int, int], ...]:
    """Return the outer boundary of `obj` as a closed clockwise cycle.

    Uses Moore neighbourhood tracing starting at the top-left-most pixel;
    a single-pixel object yields a one-element boundary.  Consecutive
    entries (including the wrap-around) are 8-adjacent, and every entry
    has at least one 4-neighbour outside the component or off the grid.
    """
    return _trace(frozenset(obj.pixels))


def _step(
    state: tuple[tuple[int, int], tuple[int, int]],
    pixels: frozenset[tuple[int, int]],
) -> tuple[tuple[int, int], tuple[int, int]]:
    """One Moore-tracing move: (pixel, backtrack cell) -> next such state."""
    cur, back = state
    d0 = _MOORE.index((back[0] - cur[0], back[1] - cur[1]))
    for k in range(1, 9):
        d = (d0 + k) % 8
        cand = (cur[0] + _MOORE[d][0], cur[1] + _MOORE[d][1])
        if cand in pixels:
            prev = (d0 + k - 1) % 8
            return cand, (cur[0] + _MOORE[prev][0], cur[1] + _MOORE[prev][1])
    raise AssertionError("no neighbour found")  # pragma: no cover


def _trace(pixels: frozenset[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    start = min(pixels)
    if len(pixels) == 1:
        return (start,)
    # Walk (pixel, backtrack) states until one repeats; the repeated
    # segment is the full clockwise outer contour.  The artificial
    # initial state (backtrack = West of the raster-first pixel, which
    # cannot belong to the component) may itself lie off that cycle.
    state = (start, (start[0], start[1] - 1))
    seen: dict = {}
    walk: list[tuple[tuple[int, int], tuple[int, int]]] = []
    while state not in seen:
        seen[state] = len(walk)
        walk.append(state)
        state = _step(state, pixels)
    cycle = [s[0] for s in walk[seen[state] :]]
    j = cycle.index(start)  # the top-left-most pixel is on the outer contour
    return tuple(cycle[j:] + cycle[:j])


def pixel_accounting(grid: LabelGrid, objects: Iterable[SceneObject]) -> tuple[int, int, int]:
    """Split the grid's pixels into (object, small-component, background) counts."""
    object_px = sum(o.pixel_count for o in objects)
    background = sum(1 for v in grid.cells if v == 0)
    ignored = grid.height * grid.width - object_px - background
    return object_px, ignored, background

"""Parsing, connected-component extraction, and boundary tracing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scenecheck import (
    FormatError,
    UnknownClassError,
    extract_objects,
    grid_from_array,
    parse_label_grid,
    trace_boundary,
)
from scenecheck.labelgrid import pixel_accounting

from conftest import blob_grid


class TestParse:
    def test_basic_grid(self):
        grid = parse_label_grid("2 3\n0 1 1\n0 0 2", {1: "cat", 2: "sofa"})
        assert (grid.height, grid.width) == (2, 3)
        assert grid.cells == (0, 1, 1, 0, 0, 2)

    def test_all_background_single_cell(self):
        grid = parse_label_grid("1 1\n0", {})
        assert grid.cells == (0,)
        assert extract_objects(grid, min_area=1) == []

    def test_unknown_class_id(self):
        with pytest.raises(UnknownClassError):
            parse_label_grid("2 2\n0 5\n0 0", {1: "cat"})

    def test_ragged_row(self):
        with pytest.raises(FormatError):
            parse_label_grid("2 3\n0 1\n0 0 2", {1: "cat", 2: "sofa"})

    def test_non_integer_token(self):
        with pytest.raises(FormatError):
            parse_label_grid("1 2\n0 x", {})

    def test_wrong_row_count(self):
        with pytest.raises(FormatError):
            parse_label_grid("3 2\n0 0\n0 0", {})

    def test_roundtrip_text(self):
        text = "2 3\n0 1 1\n0 0 2\n"
        grid = parse_label_grid(text, {1: "cat", 2: "sofa"})
        assert grid.to_text() == text


class TestExtract:
    def test_diagonal_pixels_join(self):
        arr = np.zeros((4, 4), dtype=int)
        arr[1, 1] = arr[2, 2] = 1
        objects = extract_objects(grid_from_array(arr, {1: "x"}), min_area=1)
        assert len(objects) == 1
        assert objects[0].pixel_count == 2

    def test_separated_blobs_stay_apart(self):
        arr = np.zeros((4, 5), dtype=int)
        arr[:, 0:2] = 3
        arr[:, 3:5] = 3
        objects = extract_objects(grid_from_array(arr, {3: "y"}), min_area=1)
        assert [o.class_id for o in objects] == [3, 3]
        assert all(o.pixel_count == 8 for o in objects)

    def test_min_area_filters(self):
        arr = np.zeros((4, 4), dtype=int)
        arr[0, 0] = 1
        arr[2:4, 2:4] = 1
        objects = extract_objects(grid_from_array(arr, {1: "x"}), min_area=2)
        assert len(objects) == 1
        assert objects[0].pixel_count == 4

    def test_background_never_extracted(self):
        arr = np.zeros((3, 3), dtype=int)
        assert extract_objects(grid_from_array(arr, {}), min_area=1) == []

    def test_matches_flood_fill_oracle(self, rng):
        # Independent BFS flood fill over all pixels, 4+diagonal adjacency.
        for _ in range(20):
            arr = rng.integers(0, 4, size=(64, 64)).astype(np.int32)
            grid = grid_from_array(arr, {1: "a", 2: "b", 3: "c"})
            assert _component_oracle(arr, 1) == {
                (o.class_id, o.pixels)
                for o in extract_objects(grid, min_area=1)
            }

    def test_object_ids_follow_raster_order(self, rng):
        arr = rng.integers(0, 3, size=(32, 32)).astype(np.int32)
        objects = extract_objects(grid_from_array(arr, {1: "a", 2: "b"}), min_area=1)
        firsts = [o.pixels[0] for o in objects]
        assert firsts == sorted(firsts)
        assert [o.object_id for o in objects] == list(range(len(objects)))

    def test_reparse_is_byte_stable(self, rng):
        arr = rng.integers(0, 3, size=(20, 20)).astype(np.int32)
        grid = grid_from_array(arr, {1: "a", 2: "b"})
        text = grid.to_text()
        a = extract_objects(parse_label_grid(text, grid.class_map), min_area=1)
        b = extract_objects(parse_label_grid(text, grid.class_map), min_area=1)
        assert a == b

    def test_centroid_lies_within_bbox(self, rng):
        for _ in range(10):
            arr = rng.integers(0, 3, size=(24, 24)).astype(np.int32)
            for obj in extract_objects(grid_from_array(arr, {1: "a", 2: "b"}), min_area=1):
                r0, c0, r1, c1 = obj.bbox
                assert r0 <= obj.centroid[0] <= r1
                assert c0 <= obj.centroid[1] <= c1

    def test_pixel_accounting_sums_to_grid(self, rng):
        for _ in range(10):
            arr = rng.integers(0, 4, size=(24, 24)).astype(np.int32)
            grid = grid_from_array(arr, {1: "a", 2: "b", 3: "c"})
            objects = extract_objects(grid, min_area=3)
            obj_px, ignored, background = pixel_accounting(grid, objects)
            assert obj_px + ignored + background == 24 * 24
            assert ignored >= 0


def _component_oracle(arr, min_area):
    """Set of (class, sorted pixel tuple) per 8-connected component."""
    h, w = arr.shape
    seen = set()
    out = set()
    for r in range(h):
        for c in range(w):
            if (r, c) in seen or arr[r, c] == 0:
                continue
            cls = arr[r, c]
            stack, comp = [(r, c)], []
            seen.add((r, c))
            while stack:
                y, x = stack.pop()
                comp.append((y, x))
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = y + dy, x + dx
                        if (
                            0 <= ny < h
                            and 0 <= nx < w
                            and (ny, nx) not in seen
                            and arr[ny, nx] == cls
                        ):
                            seen.add((ny, nx))
                            stack.append((ny, nx))
            if len(comp) >= min_area:
                out.add((int(cls), tuple(sorted(comp))))
    return out


class TestBoundary:
    def test_solid_square_boundary(self):
        grid = grid_from_array(np.ones((3, 3), dtype=int), {1: "x"})
        (obj,) = extract_objects(grid, min_area=1)
        assert len(obj.boundary) == 8
        assert (1, 1) not in obj.boundary
        assert obj.boundary[0] == (0, 0)

    def test_single_pixel_boundary(self):
        arr = np.zeros((3, 3), dtype=int)
        arr[1, 1] = 1
        (obj,) = extract_objects(grid_from_array(arr, {1: "x"}), min_area=1)
        assert obj.boundary == ((1, 1),)

    def test_boundary_set_matches_4_neighbour_oracle(self, rng):
        for _ in range(50):
            grid = blob_grid(rng)
            (obj,) = extract_objects(grid, min_area=1)
            pixels = set(obj.pixels)
            expected = {
                (r, c)
                for r, c in pixels
                if any(
                    (r + dr, c + dc) not in pixels
                    for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1))
                )
            }
            assert set(obj.boundary) == expected

    def test_boundary_is_closed_8_connected_cycle(self, rng):
        for _ in range(25):
            grid = blob_grid(rng)
            (obj,) = extract_objects(grid, min_area=1)
            cycle = list(obj.boundary)
            for p, q in zip(cycle, cycle[1:] + cycle[:1]):
                if len(cycle) == 1:
                    break
                assert max(abs(p[0] - q[0]), abs(p[1] - q[1])) == 1

    def test_trace_boundary_matches_extraction(self, rng):
        grid = blob_grid(rng)
        (obj,) = extract_objects(grid, min_area=1)
        assert trace_boundary(grid, obj) == obj.boundary

    def test_starts_at_top_left_most_pixel(self, rng):
        for _ in range(10):
            grid = blob_grid(rng)
            (obj,) = extract_objects(grid, min_area=1)
            assert obj.boundary[0] == min(obj.pixels)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_every_boundary_pixel_touches_outside(seed):
    rng = np.random.default_rng(seed)
    grid = blob_grid(rng, size=12, steps=30)
    for obj in extract_objects(grid, min_area=1):
        pixels = set(obj.pixels)
        for r, c in obj.boundary:
            assert (r, c) in pixels
            assert any(
                not (0 <= r + dr < grid.height and 0 <= c + dc < grid.width)
                or (r + dr, c + dc) not in pixels
                for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1))
            )

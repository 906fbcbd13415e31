import math

import numpy as np
import pytest
from shapely.geometry import Polygon

from fibrebend.geometry import (
    ActuatorSpec,
    GeometryAParams,
    GeometryBParams,
    GeometryError,
    SectionRegion,
    build_geometry_a,
    build_geometry_b,
    chamber_metrics,
    mirror_spec_b,
    polygon_area,
    polygon_centroid,
)


def circle(n, r=1.0, cx=0.0, cy=0.0):
    t = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    return np.column_stack([cx + r * np.cos(t), cy + r * np.sin(t)])


class TestPolygonQuadrature:
    def test_rectangle_exact(self):
        rect = np.array([[0.0, 0.0], [4.0, 0.0], [4.0, 3.0], [0.0, 3.0]])
        assert polygon_area(rect) == pytest.approx(12.0, abs=1e-12)
        assert polygon_centroid(rect) == pytest.approx((2.0, 1.5), abs=1e-12)

    def test_circle_convergence(self):
        errs = [abs(polygon_area(circle(n)) - math.pi) for n in (64, 256, 1024)]
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 1e-4

    def test_semicircle_centroid(self):
        t = np.linspace(0.0, np.pi, 2000)
        half = np.column_stack([np.cos(t), np.sin(t)])
        _, cy = polygon_centroid(half)
        assert cy == pytest.approx(4.0 / (3.0 * np.pi), abs=1e-5)

    def test_orientation_independent(self):
        poly = circle(512, r=2.0, cx=1.0, cy=-3.0)
        assert polygon_area(poly[::-1]) == pytest.approx(polygon_area(poly), rel=1e-12)


class TestGeometryA:
    def test_section_anchors(self, spec_a):
        assert spec_a.chamber_area == pytest.approx(20.790058683862245, rel=1e-12)
        assert spec_a.metrics.nominal_volume == pytest.approx(550.9365551223495, rel=1e-12)
        assert spec_a.chamber_centroid_y == pytest.approx(6.333624635793663, rel=1e-12)

    def test_shapely_agrees_on_chamber_area(self, spec_a):
        # independent polygon engine on the same boundary samples
        for poly in spec_a.chamber_polygons:
            assert Polygon(poly).area == pytest.approx(polygon_area(poly), rel=1e-12)
        assert Polygon(spec_a.outer_polygon).area == pytest.approx(
            polygon_area(spec_a.outer_polygon), rel=1e-12)

    def test_chamber_sits_inside_envelope(self, spec_a):
        outer = Polygon(spec_a.outer_polygon)
        for poly in spec_a.chamber_polygons:
            assert outer.contains(Polygon(poly))

    def test_derived_planes(self, spec_a):
        p = spec_a.params
        assert p.flat_y == 2.0
        assert p.fabric_mid == pytest.approx(3.7)
        assert p.chamber_floor == pytest.approx(3.8)
        assert p.chamber_bore_radius == pytest.approx(7.0)
        assert p.cage_radius == pytest.approx(8.594)
        assert spec_a.neutral_y == pytest.approx(3.7)
        assert spec_a.hoop_wall == pytest.approx(9.0 - p.chamber_outer_radius)

    def test_min_cover_matches_crown_cover_plus_skin(self, spec_a):
        m = chamber_metrics(spec_a)
        assert m.min_cover == pytest.approx(spec_a.hoop_wall, abs=2e-3)

    def test_resist_strips_consistent(self, spec_a):
        ys, wd = spec_a.resist_strips(512)
        assert np.all(wd >= -1e-12)
        assert ys.min() >= spec_a.flat_y - 1e-9
        assert ys.max() <= spec_a.params.cage_radius + 1e-9
        a1 = float(np.sum(wd))
        ys2, wd2 = spec_a.resist_strips(2048)
        assert float(np.sum(wd2)) == pytest.approx(a1, rel=1e-3)

    def test_validation(self):
        with pytest.raises(GeometryError):
            build_geometry_a(GeometryAParams(chamber_diameter=-1.0))
        with pytest.raises(GeometryError):
            build_geometry_a(GeometryAParams(chamber_diameter=30.0))


class TestGeometryB:
    def test_section_anchors(self, spec_b):
        assert spec_b.chamber_area == pytest.approx(8.0 * math.pi, rel=1e-4)
        assert spec_b.metrics.nominal_volume == pytest.approx(666.0, rel=1e-3)
        assert len(spec_b.chamber_polygons) == 2

    def test_chamber_centers_symmetric(self, spec_b):
        (x0, y0), (x1, y1) = spec_b.params.chamber_centers
        assert x0 == -x1 and y0 == y1 == pytest.approx(4.5)

    def test_neutral_requires_fabric_layer(self, spec_b, spec_b_layered):
        assert spec_b.neutral_y is None
        assert spec_b_layered.neutral_y == pytest.approx(spec_b_layered.params.fabric_mid)

    def test_winding_radius_is_rod(self, spec_b):
        assert spec_b.params.winding_radius == pytest.approx(2.5)

    def test_mirror_involution(self, spec_b):
        twice = mirror_spec_b(mirror_spec_b(spec_b))
        assert np.allclose(twice.outer_polygon, spec_b.outer_polygon)
        for a, b in zip(twice.chamber_polygons, spec_b.chamber_polygons):
            assert np.allclose(a, b)

    def test_mirror_rejects_a(self, spec_a):
        with pytest.raises(GeometryError):
            mirror_spec_b(spec_a)

    def test_validation(self):
        with pytest.raises(GeometryError):
            build_geometry_b(GeometryBParams(chamber_separation=3.0))  # chambers overlap


class TestSectionRegion:
    def test_disk_area(self):
        disk = SectionRegion("d", (0.0, 0.0), 3.0, y_clip=10.0)
        assert disk.area == pytest.approx(math.pi * 9.0, rel=1e-5)

    def test_clip_halves_disk(self):
        half = SectionRegion("h", (0.0, 0.0), 3.0, y_clip=0.0)
        assert half.area == pytest.approx(0.5 * math.pi * 9.0, rel=1e-4)

    def test_annulus_area_matches_shapely(self):
        ring = SectionRegion("r", (1.0, 2.0), 4.0, y_clip=10.0, inner_radius=1.5)
        hole = Polygon(circle(4096, 1.5, 1.0, 2.0))
        outer = Polygon(circle(4096, 4.0, 1.0, 2.0))
        assert ring.area == pytest.approx(outer.difference(hole).area, rel=1e-4)

    def test_degenerate_annulus_is_empty(self):
        ring = SectionRegion("z", (0.0, 0.0), 2.0, y_clip=10.0, inner_radius=2.0)
        ys, wd = ring.strips()
        assert len(ys) == 0 and len(wd) == 0
        assert ring.area == 0.0

    def test_roundtrip(self):
        ring = SectionRegion("r", (1.0, -2.0), 4.0, 1.5, 0.5, 20.0, True, 0.75)
        assert SectionRegion.from_dict(ring.to_dict()) == ring


class TestSerialization:
    def test_json_roundtrip(self, spec_a, spec_b_layered):
        for spec in (spec_a, spec_b_layered):
            back = ActuatorSpec.from_json(spec.to_json())
            assert back.kind == spec.kind
            assert back.params == spec.params
            assert back.neutral_y == spec.neutral_y
            assert np.allclose(back.outer_polygon, spec.outer_polygon)
            for a, b in zip(back.chamber_polygons, spec.chamber_polygons):
                assert np.allclose(a, b)

    def test_json_deterministic(self, spec_a):
        assert spec_a.to_json() == spec_a.to_json()

    def test_section_csv(self, spec_a):
        lines = spec_a.section_csv().strip().splitlines()
        assert lines[0].startswith("#")
        header = lines[1].split(",")
        assert "x" in header[1] and "y" in header[2]
        vals = [float(v) for v in lines[2].split(",")[1:]]
        assert len(vals) == 2

    def test_save_load(self, tmp_path, spec_a):
        path = tmp_path / "spec.json"
        spec_a.save(path)
        back = ActuatorSpec.load(path)
        assert back.chamber_area == pytest.approx(spec_a.chamber_area, rel=1e-12)

import math

import numpy as np
import pytest

from fibrebend.postprocess import (
    AngleSeries,
    NodeHistory,
    PostprocessError,
    PressureSchedule,
    bending_angle,
    hysteresis_ratio,
    parse_bench_log,
    parse_histories,
    radial_expansion,
    select_radial_pairs,
    serialize_bench_log,
    serialize_histories,
    time_to_pressure,
)


def arc_tip_history(alpha_deg: float, L: float = 37.5, steps: int = 5) -> NodeHistory:
    """Tip of an initially straight rod bent into a circular arc."""
    times = np.linspace(0.0, 1.0, steps)
    disp = []
    for t in times:
        a = math.radians(alpha_deg) * t
        if a < 1e-12:
            x, z = 0.0, L
        else:
            r = L / a
            x, z = r * (1.0 - math.cos(a)), r * math.sin(a)
        disp.append([x, 0.0, z - L])
    return NodeHistory(1, np.array([0.0, 0.0, L]), times, np.array(disp))


class TestSchedules:
    def test_proportional_levels(self):
        s = PressureSchedule.proportional(p_max=100.0, n_steps=11)
        assert np.allclose(s.pressures_kpa(), np.linspace(0.0, 100.0, 11))

    def test_stepped_holds(self):
        s = PressureSchedule.stepped(increment=10.0, hold=5.0, p_max=100.0)
        assert s.pressure_at(12.0) == pytest.approx(30.0)  # third hold
        assert s.pressure_at(0.0) == pytest.approx(10.0)
        assert np.allclose(s.pressures_kpa(), np.arange(0.0, 101.0, 10.0))

    def test_stepped_reverse_walks_down(self):
        s = PressureSchedule.stepped(increment=25.0, p_max=100.0, with_reverse=True)
        p = s.pressures_kpa()
        assert np.allclose(p, [0, 25, 50, 75, 100, 75, 50, 25, 0])
        fwd, bwd = s.legs()
        assert np.allclose(fwd, [0, 25, 50, 75, 100])
        assert np.allclose(bwd, [100, 75, 50, 25, 0])

    def test_explicit_interpolates(self):
        s = PressureSchedule.explicit([(0.0, 0.0), (2.0, 50.0), (4.0, 100.0)])
        assert time_to_pressure(s, 1.0) == pytest.approx(25.0)
        assert time_to_pressure(s, 3.0) == pytest.approx(75.0)

    def test_out_of_span_rejected(self):
        s = PressureSchedule.proportional(t_end=1.0)
        with pytest.raises(PostprocessError):
            s.pressure_at(1.5)
        with pytest.raises(PostprocessError):
            s.pressure_at(-0.1)

    def test_validation(self):
        with pytest.raises(PostprocessError):
            PressureSchedule("sinusoidal")
        with pytest.raises(PostprocessError):
            PressureSchedule.explicit([(0.0, 0.0), (0.0, 10.0)])
        with pytest.raises(PostprocessError):
            PressureSchedule.explicit([(0.0, -5.0)])


class TestBendingAngle:
    @pytest.mark.parametrize("alpha", [30.0, 90.0, 180.0, 270.0])
    def test_chord_rotates_half_the_arc(self, alpha):
        tip = arc_tip_history(alpha)
        got = bending_angle((0.0, 0.0, 0.0), tip, 1.0)
        assert got == pytest.approx(alpha / 2.0, abs=1e-9)

    def test_zero_at_rest(self):
        tip = arc_tip_history(90.0)
        assert bending_angle((0.0, 0.0, 0.0), tip, 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_degenerate_reference_rejected(self):
        tip = arc_tip_history(90.0)
        with pytest.raises(PostprocessError):
            bending_angle((0.0, 0.0, 37.5), tip, 0.0)


def grid_histories(spec, inflate=0.0, steps=3):
    """Flat-face and crown node columns along the chamber; optional uniform
    outward motion of the crown side."""
    times = np.linspace(0.0, 1.0, steps)
    hist = {}
    nid = 0
    for z in np.arange(0.0, 27.0, 2.5):
        for y, moves in ((spec.flat_y, False), (spec.crown_apex_y, True)):
            disp = np.zeros((steps, 3))
            if moves:
                disp[:, 1] = inflate * times
            hist[nid] = NodeHistory(nid, np.array([0.0, y, z]), times, disp)
            nid += 1
    return hist


class TestRadialPairs:
    def test_station_layout(self, spec_a):
        hist = grid_histories(spec_a)
        nodes = [(i, h.initial_xyz) for i, h in hist.items()]
        pairs = select_radial_pairs(nodes, spec_a)
        stations = [p.station_mm for p in pairs]
        assert stations == pytest.approx(list(np.arange(0.0, 27.0, 2.5)) + [26.5])
        assert all(p.initial_distance == pytest.approx(7.0) for p in pairs)

    def test_tie_breaks_to_lower_id(self, spec_a):
        nodes = [(9, (1.0, spec_a.flat_y, 0.0)), (5, (-1.0, spec_a.flat_y, 0.0)),
                 (3, (0.0, spec_a.crown_apex_y, 0.0))]
        pairs = select_radial_pairs(nodes, spec_a, n_pairs=1)
        assert pairs[0].flat_id == 5
        assert pairs[0].curved_id == 3

    def test_empty_cloud_rejected(self, spec_a):
        with pytest.raises(PostprocessError):
            select_radial_pairs([], spec_a)

    @pytest.mark.parametrize("u", [0.1, 0.3, 1.0])
    def test_uniform_inflation_recovered(self, spec_a, u):
        hist = grid_histories(spec_a, inflate=u)
        nodes = [(i, h.initial_xyz) for i, h in hist.items()]
        pairs = select_radial_pairs(nodes, spec_a)
        point = radial_expansion(pairs, hist, 1.0)
        assert point.mean_mm == pytest.approx(u, abs=1e-9)
        assert np.allclose(point.per_pair_mm, u, atol=1e-9)

    def test_missing_history_rejected(self, spec_a):
        hist = grid_histories(spec_a)
        nodes = [(i, h.initial_xyz) for i, h in hist.items()]
        pairs = select_radial_pairs(nodes, spec_a)
        del hist[pairs[0].flat_id]
        with pytest.raises(PostprocessError):
            radial_expansion(pairs, hist, 1.0)


class TestHistoriesSerialization:
    def test_roundtrip(self, spec_a):
        hist = grid_histories(spec_a, inflate=0.25)
        h_csv, s_csv = serialize_histories(hist)
        back = parse_histories(h_csv, s_csv)
        assert set(back) == set(hist)
        for nid in hist:
            assert np.array_equal(back[nid].times, hist[nid].times)
            assert np.array_equal(back[nid].displacements, hist[nid].displacements)
            assert np.array_equal(back[nid].initial_xyz, hist[nid].initial_xyz)

    def test_monotone_times_required(self):
        with pytest.raises(PostprocessError):
            NodeHistory(0, np.zeros(3), np.array([0.0, 1.0, 1.0]), np.zeros((3, 3)))

    def test_interpolation_between_frames(self):
        h = NodeHistory(0, np.zeros(3), np.array([0.0, 1.0]),
                        np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))
        assert h.displacement_at(0.5)[0] == pytest.approx(1.0)
        assert h.position_at(0.25)[0] == pytest.approx(0.5)


class TestHysteresis:
    def test_known_gap_exact(self):
        p = np.linspace(0.0, 100.0, 11)
        fwd = AngleSeries(p, 0.9 * p)
        bwd = AngleSeries(p, 0.9 * p + 5.0)
        hys = hysteresis_ratio(fwd, bwd)
        assert hys.ratio_pct == pytest.approx(5.0 / 90.0 * 100.0, rel=1e-12)
        assert np.allclose(hys.gap_deg, 5.0)

    def test_identical_curves_zero(self):
        p = np.linspace(0.0, 100.0, 11)
        fwd = AngleSeries(p, 0.9 * p)
        hys = hysteresis_ratio(fwd, AngleSeries(p.copy(), (0.9 * p).copy()))
        assert hys.ratio_pct == 0.0
        assert hys.loop_area_ratio_pct == 0.0

    def test_loop_area_ratio(self):
        p = np.linspace(0.0, 100.0, 101)
        fwd = AngleSeries(p, 0.9 * p)
        bwd = AngleSeries(p, 0.9 * p + 4.5)
        hys = hysteresis_ratio(fwd, bwd)
        # constant 4.5 deg gap over 100 kPa against a 0..90 deg triangle
        assert hys.loop_area_ratio_pct == pytest.approx(450.0 / 4500.0 * 100.0, rel=1e-12)

    def test_grid_mismatch_rejected(self):
        fwd = AngleSeries(np.linspace(0, 100, 11), np.zeros(11))
        bwd = AngleSeries(np.linspace(0, 90, 11), np.zeros(11))
        with pytest.raises(PostprocessError):
            hysteresis_ratio(fwd, bwd)


class TestBenchLog:
    def test_roundtrip_with_reverse(self):
        p = np.array([0.0, 50.0, 100.0, 50.0, 0.0])
        th = np.array([0.0, 40.0, 90.0, 45.0, 5.0])
        text = serialize_bench_log(AngleSeries(p, th))
        fwd, bwd = parse_bench_log(text)
        assert np.allclose(fwd.pressures_kpa, [0.0, 50.0, 100.0])
        assert np.allclose(fwd.theta_deg, [0.0, 40.0, 90.0])
        assert np.allclose(bwd.pressures_kpa, [0.0, 50.0, 100.0])
        assert np.allclose(bwd.theta_deg, [5.0, 45.0, 90.0])

    def test_one_way_log(self):
        p = np.array([0.0, 50.0, 100.0])
        th = np.array([0.0, 40.0, 90.0])
        fwd, bwd = parse_bench_log(serialize_bench_log(AngleSeries(p, th)))
        assert bwd is None
        assert np.allclose(fwd.theta_deg, th)

    def test_rejects_malformed(self):
        with pytest.raises(PostprocessError):
            parse_bench_log("pressure_kPa,theta_deg,timestamp\nnot,a,row\n")

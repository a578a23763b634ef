"""Synthesis, stream simulation, and file-format tests.

The generator's scalar kernels (theoretical change, thresholding, blur) are
checked against hand-worked values, and whole generated sets are replayed
bit-for-bit from their traces through the public scalar functions.
"""

from __future__ import annotations

import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iegtrack.core import GroundTruth, Pattern, Velocity2
from iegtrack.errors import FileFormatError
from iegtrack.synth import (
    EventStream,
    SynthConfig,
    TrainingSample,
    builtin_marker,
    displace_point,
    events_from_csv,
    events_to_csv,
    gaussian_blur_sample,
    generate_training_set,
    load_training_set,
    quantize_delta,
    save_training_set,
    simulate_stream,
    theoretical_delta,
    truth_from_csv,
    truth_to_csv,
)


class TestTheoreticalDelta:
    def test_pure_translation_is_grad_dot_v_times_t(self):
        # grad (1, 0), v (10, 0), no rotation: delta = 10 * t.
        d = theoretical_delta([1.0, 0.0], [3.0, -2.0], Velocity2(10.0, 0.0, 0.0), 0.02)
        assert d == pytest.approx(0.2)

    def test_rigid_rotation_quarter_turn(self):
        # omega*t = pi/2 rotates grad (1,0) to (0,1); the rigid field at
        # point (2, 0) is (0, 2*omega); so delta = 2*omega*t = pi.
        om = math.pi / 2
        d = theoretical_delta([1.0, 0.0], [2.0, 0.0], Velocity2(0.0, 0.0, om), 1.0)
        assert d == pytest.approx(math.pi)

    def test_rigid_field_respects_center(self):
        # About center (2, 0) the same point has zero lever arm: only v remains.
        om = 0.7
        d = theoretical_delta(
            [1.0, 0.0], [2.0, 0.0], Velocity2(5.0, 0.0, om), 1e-9, center=(2.0, 0.0)
        )
        assert d == pytest.approx(5e-9, rel=1e-6)

    def test_literal_model_hand_value(self):
        # a = (vx + cos omega, vy + sin omega); omega = 0 keeps grad unrotated:
        # delta = (vx + 1) * t.
        d = theoretical_delta(
            [1.0, 0.0], [0.0, 0.0], Velocity2(4.0, 9.0, 0.0), 0.5, model="literal"
        )
        assert d == pytest.approx(2.5)

    def test_literal_model_ignores_position(self):
        a = theoretical_delta(
            [0.3, 0.4], [0.0, 0.0], Velocity2(4.0, 2.0, 1.0), 0.25, model="literal"
        )
        b = theoretical_delta(
            [0.3, 0.4], [50.0, -9.0], Velocity2(4.0, 2.0, 1.0), 0.25, model="literal"
        )
        assert a == b

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError, match="velocity_model"):
            theoretical_delta([1.0, 0.0], [0.0, 0.0], Velocity2(1.0, 0.0, 0.0), 0.1, model="affine")

    @given(st.floats(0.0, 0.05), st.floats(-300, 300), st.floats(-300, 300))
    def test_rigid_is_linear_in_t_without_rotation(self, t, vx, vy):
        vel = Velocity2(vx, vy, 0.0)
        d1 = theoretical_delta([0.5, -0.2], [1.0, 2.0], vel, t)
        d2 = theoretical_delta([0.5, -0.2], [1.0, 2.0], vel, 2.0 * t)
        assert d2 == pytest.approx(2.0 * d1, abs=1e-12)


class TestQuantize:
    def test_fires_positive(self):
        assert quantize_delta(0.02, 0.01) == 1

    def test_fires_negative(self):
        assert quantize_delta(-0.02, 0.01) == -1

    def test_dead_band_returns_none(self):
        assert quantize_delta(0.005, 0.01) is None

    def test_boundary_is_inside_dead_band(self):
        assert quantize_delta(0.01, 0.01) is None
        assert quantize_delta(-0.01, 0.01) is None


class TestBlur:
    def test_one_sigma_offset_is_exp_minus_half(self):
        assert gaussian_blur_sample(1, 2.0, 0.0, 2.0, 6.0) == pytest.approx(
            math.exp(-0.5)
        )

    def test_negative_polarity_flips_sign(self):
        assert gaussian_blur_sample(-1, 0.0, 0.0, 2.0, 6.0) == -1.0

    def test_outside_radius_is_zero(self):
        assert gaussian_blur_sample(1, 5.0, 5.0, 2.0, 6.0) == 0.0

    def test_radius_boundary_still_counts(self):
        assert gaussian_blur_sample(1, 6.0, 0.0, 2.0, 6.0) == pytest.approx(
            math.exp(-36.0 / 8.0)
        )

    @given(st.floats(-8, 8), st.floats(-8, 8))
    def test_magnitude_never_exceeds_one(self, dx, dy):
        assert abs(gaussian_blur_sample(1, dx, dy, 2.0, 6.0)) <= 1.0


class TestDisplace:
    def test_quarter_turn_about_custom_center(self):
        # (2, 1) about center (1, 1) through pi/2 lands at (1, 2); then + v*t.
        vel = Velocity2(10.0, 0.0, math.pi / 2)
        out = displace_point([2.0, 1.0], vel, 1.0, center=(1.0, 1.0))
        assert out[0] == pytest.approx(1.0 + 10.0)
        assert out[1] == pytest.approx(2.0)

    def test_zero_time_is_identity(self):
        out = displace_point([3.0, 4.0], Velocity2(100.0, -50.0, 2.0), 0.0)
        assert out == (3.0, 4.0)


class TestTrainingSample:
    def test_input_array_order(self):
        s = TrainingSample(1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 0.5)
        np.testing.assert_array_equal(s.input_array(), [1, 2, 3, 4, 5, 6])

    def test_rejects_target_outside_unit_interval(self):
        with pytest.raises(ValueError, match="target"):
            TrainingSample(0, 0, 0, 0, 0, 0, 1.5)

    def test_rejects_nan_fields(self):
        with pytest.raises(ValueError, match="finite"):
            TrainingSample(float("nan"), 0, 0, 0, 0, 0, 0.0)


class TestSynthConfig:
    def test_rejects_bad_t_range(self):
        with pytest.raises(ValueError, match="t_range"):
            SynthConfig(t_range=(0.02, 0.01))

    def test_rejects_negative_threshold(self):
        with pytest.raises(ValueError, match="delta_bar"):
            SynthConfig(delta_bar=0.0)

    def test_rejects_background_ratio_of_one(self):
        with pytest.raises(ValueError, match="background_ratio"):
            SynthConfig(background_ratio=1.0)

    def test_rejects_unknown_velocity_model(self):
        with pytest.raises(ValueError, match="velocity_model"):
            SynthConfig(velocity_model="quadratic")


class TestGenerate:
    def test_sample_count_and_background_split(self, bar_pattern, small_config):
        samples, traces = generate_training_set(
            bar_pattern, small_config, 101, seed=3, return_traces=True
        )
        assert len(samples) == 101
        n_background = sum(1 for tr in traces if tr is None)
        assert n_background == math.ceil(0.25 * 101)
        for s, tr in zip(samples, traces):
            if tr is None:
                assert s.target == 0.0

    def test_deterministic_in_seed(self, bar_pattern, small_config):
        a = generate_training_set(bar_pattern, small_config, 300, seed=5)
        b = generate_training_set(bar_pattern, small_config, 300, seed=5)
        assert a == b
        c = generate_training_set(bar_pattern, small_config, 300, seed=6)
        assert a != c

    def test_worker_count_does_not_change_output(self, bar_pattern, small_config):
        a = generate_training_set(bar_pattern, small_config, 9000, seed=5, workers=1)
        b = generate_training_set(bar_pattern, small_config, 9000, seed=5, workers=4)
        assert a == b

    def test_traces_replay_bitwise(self, bar_pattern, small_config):
        """Every on-edge sample must be reproducible exactly from its trace
        through the public scalar kernels."""
        samples, traces = generate_training_set(
            bar_pattern, small_config, 400, seed=12, return_traces=True
        )
        edges = bar_pattern.edges_centered
        grads = bar_pattern.edge_grads
        for s, tr in zip(samples, traces):
            if tr is None:
                continue
            vel = Velocity2(tr.vx, tr.vy, tr.omega)
            assert tr.delta_t == theoretical_delta(
                grads[tr.edge_index], edges[tr.edge_index], vel, tr.t,
                small_config.velocity_model,
            )
            assert tr.delta_q == quantize_delta(tr.delta_t, small_config.delta_bar)
            assert abs(tr.delta_t) > small_config.delta_bar
            xt, yt = displace_point(edges[tr.edge_index], vel, tr.t)
            assert s.x == xt + tr.dx and s.y == yt + tr.dy
            assert s.target == gaussian_blur_sample(
                tr.delta_q, tr.dx, tr.dy, small_config.sigma, small_config.w
            )

    def test_background_positions_clear_every_displaced_edge(
        self, bar_pattern, small_config
    ):
        samples, traces = generate_training_set(
            bar_pattern, small_config, 200, seed=2, return_traces=True
        )
        edges = bar_pattern.edges_centered
        for s, tr in zip(samples, traces):
            if tr is not None:
                continue
            vel = Velocity2(s.vx, s.vy, s.omega)
            moved = np.array([displace_point(e, vel, s.t) for e in edges])
            d = np.hypot(moved[:, 0] - s.x, moved[:, 1] - s.y)
            assert d.min() > small_config.w

    def test_motion_draws_stay_in_configured_ranges(self, bar_pattern, small_config):
        samples = generate_training_set(bar_pattern, small_config, 500, seed=8)
        for s in samples:
            assert small_config.t_range[0] <= s.t <= small_config.t_range[1]
            assert small_config.v_range[0] <= s.vx <= small_config.v_range[1]
            assert small_config.v_range[0] <= s.vy <= small_config.v_range[1]
            assert small_config.omega_range[0] <= s.omega <= small_config.omega_range[1]

    def test_edgeless_pattern_rejected(self, small_config):
        flat = Pattern.from_array(np.full((8, 8), 0.5))
        with pytest.raises(ValueError, match="no edge"):
            generate_training_set(flat, small_config, 10, seed=0)

    def test_argument_validation(self, bar_pattern, small_config):
        with pytest.raises(ValueError, match="n must"):
            generate_training_set(bar_pattern, small_config, 0, seed=0)
        with pytest.raises(ValueError, match="seed"):
            generate_training_set(bar_pattern, small_config, 10, seed=-1)
        with pytest.raises(ValueError, match="workers"):
            generate_training_set(bar_pattern, small_config, 10, seed=0, workers=0)


class TestTrainingSetFile:
    def test_round_trip_is_bit_exact(self, bar_pattern, small_config, tmp_path):
        samples = generate_training_set(bar_pattern, small_config, 64, seed=1)
        path = tmp_path / "set.iegd"
        save_training_set(samples, path)
        assert load_training_set(path) == samples

    def test_bad_magic_is_reported(self, tmp_path):
        path = tmp_path / "bad.iegd"
        path.write_bytes(b"NOPE" + b"\x00" * 12)
        with pytest.raises(FileFormatError, match="magic"):
            load_training_set(path)

    def test_truncated_record_reports_offset(self, bar_pattern, small_config, tmp_path):
        samples = generate_training_set(bar_pattern, small_config, 3, seed=1)
        path = tmp_path / "cut.iegd"
        save_training_set(samples, path)
        data = path.read_bytes()
        path.write_bytes(data[:-20])
        with pytest.raises(FileFormatError, match="truncated"):
            load_training_set(path)

    def test_unsupported_version_rejected(self, tmp_path):
        path = tmp_path / "v9.iegd"
        path.write_bytes(struct.pack("<4sIQ", b"IEGD", 9, 0))
        with pytest.raises(FileFormatError, match="version"):
            load_training_set(path)


class TestBuiltinMarker:
    def test_default_size_and_edges(self):
        m = builtin_marker()
        assert m.intensity.shape == (128, 128)
        assert len(m.edges) > 400

    def test_scales_by_integer_factor(self):
        m = builtin_marker(192)
        assert m.intensity.shape == (192, 192)

    def test_rejects_non_multiple_sizes(self):
        with pytest.raises(ValueError, match="multiple"):
            builtin_marker(100)
        with pytest.raises(ValueError, match="multiple"):
            builtin_marker(32)

    def test_has_edges_of_both_orientations(self):
        m = builtin_marker()
        g = m.edge_grads
        assert np.any(np.abs(g[:, 0]) > 0.2) and np.any(np.abs(g[:, 1]) > 0.2)

    def test_no_quarter_turn_symmetry(self):
        # Rotation observability: a quarter- or half-turn must change the image,
        # otherwise pattern orientation is ambiguous up to that turn.
        img = builtin_marker().intensity
        assert np.abs(img - np.rot90(img)).mean() > 0.01
        assert np.abs(img - np.rot90(img, 2)).mean() > 0.01

    def test_binary_intensities(self):
        img = builtin_marker().intensity
        assert set(np.unique(img)) == {0.0, 1.0}


def _const_traj(duration: float, vel: Velocity2):
    return [(duration, vel)]


class TestSimulate:
    def test_zero_velocity_emits_no_events(self, bar_pattern):
        stream = simulate_stream(
            bar_pattern, _const_traj(0.5, Velocity2(0, 0, 0)), contrast=0.2, dt=1e-3,
            seed=0,
        )
        assert len(stream.events) == 0
        assert stream.duration == 0.5
        assert stream.ground_truth.t[0] == 0.0
        assert stream.ground_truth.t[-1] == pytest.approx(0.5)

    def test_events_sorted_and_in_bounds(self, bar_pattern):
        stream = simulate_stream(
            bar_pattern, _const_traj(0.2, Velocity2(60.0, -40.0, 1.0)),
            contrast=0.1, dt=1e-3, seed=3,
        )
        assert len(stream.events) > 0
        ts = np.array([e.t for e in stream.events])
        assert np.all(np.diff(ts) >= 0)
        for e in stream.events:
            assert 0.0 <= e.x < stream.width
            assert 0.0 <= e.y < stream.height
            assert 0.0 <= e.t <= stream.duration

    def test_single_edge_translation_gives_one_polarity_per_side(self):
        # A vertical step moving right: the dark->light edge sees intensity
        # fall at a fixed sensor pixel, so each edge layer fires one polarity.
        img = np.zeros((16, 16))
        img[:, 8:] = 1.0
        pat = Pattern.from_array(img)
        stream = simulate_stream(
            pat, _const_traj(0.1, Velocity2(50.0, 0.0, 0.0)), contrast=0.2,
            dt=1e-3, seed=1,
        )
        assert len(stream.events) > 0
        # Group events by their source column (x - vx * t is constant per layer).
        cols = np.round(
            [e.x - 50.0 * e.t for e in stream.events]
        ).astype(int)
        pols = np.array([e.polarity for e in stream.events])
        for c in np.unique(cols):
            assert len(set(pols[cols == c])) == 1

    def test_event_positions_ride_the_moving_edge(self):
        img = np.zeros((16, 16))
        img[:, 8:] = 1.0
        pat = Pattern.from_array(img)
        vx = 70.0
        stream = simulate_stream(
            pat, _const_traj(0.1, Velocity2(vx, 0.0, 0.0)), contrast=0.2,
            dt=1e-3, seed=1,
        )
        residual = np.array([(e.x - vx * e.t) % 1.0 for e in stream.events])
        residual = np.minimum(residual, 1.0 - residual)
        assert residual.max() < 1e-9

    def test_ground_truth_velocity_is_pattern_frame(self, bar_pattern):
        vel = Velocity2(30.0, 10.0, 2.0)
        stream = simulate_stream(
            bar_pattern, _const_traj(0.2, vel), contrast=0.5, dt=1e-3, seed=0,
        )
        gt = stream.ground_truth
        # Sensor-frame velocity is constant; the logged pattern-frame value
        # must be R(-r) v at each sample.
        for k in range(len(gt.t)):
            r = gt.poses[k, 2]
            c, s = math.cos(-r), math.sin(-r)
            np.testing.assert_allclose(
                gt.velocities[k, :2],
                [c * vel.vx - s * vel.vy, s * vel.vx + c * vel.vy],
                atol=1e-12,
            )
            assert gt.velocities[k, 2] == vel.omega

    def test_piecewise_trajectory_changes_truth_velocity(self, bar_pattern):
        stream = simulate_stream(
            bar_pattern,
            [(0.1, Velocity2(50.0, 0.0, 0.0)), (0.1, Velocity2(0.0, 50.0, 0.0))],
            contrast=0.3, dt=1e-3, seed=0,
        )
        gt = stream.ground_truth
        early = gt.velocities[gt.t < 0.1 - 1e-9]
        late = gt.velocities[gt.t > 0.1 + 1e-9]
        assert np.all(early[:, 0] == 50.0) and np.all(late[:, 1] == 50.0)

    def test_deterministic_in_seed(self, bar_pattern):
        kw = dict(contrast=0.2, dt=1e-3, seed=7)
        a = simulate_stream(bar_pattern, _const_traj(0.1, Velocity2(40, 0, 1)), **kw)
        b = simulate_stream(bar_pattern, _const_traj(0.1, Velocity2(40, 0, 1)), **kw)
        assert a.events == b.events

    def test_validation(self, bar_pattern):
        with pytest.raises(ValueError, match="contrast"):
            simulate_stream(bar_pattern, _const_traj(0.1, Velocity2(1, 0, 0)),
                            contrast=0.0, dt=1e-3, seed=0)
        with pytest.raises(ValueError, match="dt"):
            simulate_stream(bar_pattern, _const_traj(0.1, Velocity2(1, 0, 0)),
                            contrast=0.1, dt=0.0, seed=0)
        with pytest.raises(ValueError, match="segment"):
            simulate_stream(bar_pattern, [], contrast=0.1, dt=1e-3, seed=0)


class TestEventStreamValidation:
    def _truth(self, duration):
        return GroundTruth(
            t=[0.0, duration],
            poses=np.zeros((2, 3)),
            velocities=np.zeros((2, 3)),
        )

    def test_rejects_unsorted_events(self):
        from iegtrack.core import Event

        ev = (Event(0.2, 1, 1, 1), Event(0.1, 1, 1, 1))
        with pytest.raises(ValueError, match="sorted"):
            EventStream(8, 8, 0.5, ev, self._truth(0.5))

    def test_rejects_truth_not_covering_duration(self):
        with pytest.raises(ValueError, match="cover"):
            EventStream(8, 8, 0.5, (), self._truth(0.3))


class TestCsv:
    def test_events_round_trip_bit_exact(self, bar_pattern, tmp_path):
        stream = simulate_stream(
            bar_pattern, _const_traj(0.1, Velocity2(55.0, -20.0, 1.5)),
            contrast=0.15, dt=1e-3, seed=4,
        )
        path = tmp_path / "ev.csv"
        events_to_csv(stream.events, path)
        back = events_from_csv(path)
        assert tuple(back) == stream.events

    def test_events_header_only_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        events_to_csv([], path)
        assert path.read_text().splitlines() == ["t,x,y,p"]
        assert events_from_csv(path) == []

    def test_events_csv_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,x,y,p\n")
        with pytest.raises(FileFormatError, match=r"bad\.csv:1:"):
            events_from_csv(path)

    def test_events_csv_bad_field_count_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,x,y,p\n0.0,1.0,2.0,1\n0.1,3.0\n")
        with pytest.raises(FileFormatError, match=r"bad\.csv:3:"):
            events_from_csv(path)

    def test_events_csv_bad_polarity_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,x,y,p\n0.0,1.0,2.0,5\n")
        with pytest.raises(FileFormatError, match=r"bad\.csv:2:"):
            events_from_csv(path)

    def test_truth_round_trip_bit_exact(self, bar_pattern, tmp_path):
        stream = simulate_stream(
            bar_pattern, _const_traj(0.05, Velocity2(40.0, 25.0, -2.0)),
            contrast=0.3, dt=1e-3, seed=2,
        )
        path = tmp_path / "gt.csv"
        truth_to_csv(stream.ground_truth, path)
        back = truth_from_csv(path)
        np.testing.assert_array_equal(back.t, stream.ground_truth.t)
        np.testing.assert_array_equal(back.poses, stream.ground_truth.poses)
        np.testing.assert_array_equal(back.velocities, stream.ground_truth.velocities)

    def test_truth_csv_rejects_wrong_header(self, tmp_path):
        path = tmp_path / "gt.csv"
        path.write_text("t,x,y\n")
        with pytest.raises(FileFormatError, match=r"gt\.csv:1:"):
            truth_from_csv(path)


@settings(max_examples=30, deadline=None)
@given(
    st.floats(-3, 3), st.floats(-3, 3),
    st.floats(-200, 200), st.floats(-200, 200), st.floats(-4, 4),
    st.floats(0.001, 0.05),
)
def test_quantized_blur_sign_matches_delta_sign(gx, gy, vx, vy, om, t):
    d = theoretical_delta([gx, gy], [1.0, -2.0], Velocity2(vx, vy, om), t)
    q = quantize_delta(d, 0.01)
    if q is not None:
        assert q == math.copysign(1, d)
        b = gaussian_blur_sample(q, 1.0, 1.0, 2.0, 6.0)
        assert math.copysign(1, b) == q

"""Training-tuple synthesis and event-stream simulation for a planar pattern.

The generative model: an edge pixel with gradient g, moved rigidly for time t
with velocity (vx, vy, omega), produces a theoretical intensity change. Changes
past a firing threshold are quantized to +/-1 and spread over a Gaussian blur
disk around the displaced edge position; samples inside the disk carry the
blurred value as their regression target, samples away from every displaced
edge carry 0. All sample positions are pattern-frame (centered) coordinates.

The simulator plays the same linearized model forward in the sensor frame:
per-edge-pixel accumulators integrate grad . velocity over time and emit an
event each time the accumulated change crosses the contrast threshold.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import Event, GroundTruth, Pattern, Pose2, Velocity2, rot2
from .errors import FileFormatError

__all__ = [
    "TrainingSample",
    "SampleTrace",
    "SynthConfig",
    "EventStream",
    "theoretical_delta",
    "quantize_delta",
    "gaussian_blur_sample",
    "displace_point",
    "generate_training_set",
    "save_training_set",
    "load_training_set",
    "simulate_stream",
    "builtin_marker",
    "events_to_csv",
    "events_from_csv",
    "truth_to_csv",
    "truth_from_csv",
]

VELOCITY_MODELS = ("rigid", "literal")

_CHUNK = 4096  # fixed generation chunk; part of the deterministic draw order

DATA_MAGIC = b"IEGD"
DATA_VERSION = 1


@dataclass(frozen=True, slots=True)
class TrainingSample:
    """One regression tuple: input (x, y, t, vx, vy, omega) and target in [-1, 1]."""

    x: float
    y: float
    t: float
    vx: float
    vy: float
    omega: float
    target: float

    def __post_init__(self):
        for v in (self.x, self.y, self.t, self.vx, self.vy, self.omega, self.target):
            if not math.isfinite(v):
                raise ValueError("TrainingSample fields must be finite")
        if abs(self.target) > 1.0:
            raise ValueError(f"target must lie in [-1, 1], got {self.target}")

    def input_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.t, self.vx, self.vy, self.omega])


@dataclass(frozen=True, slots=True)
class SampleTrace:
    """Provenance of one on-edge sample, for recomputing its target from scratch."""

    edge_index: int
    t: float
    vx: float
    vy: float
    omega: float
    delta_t: float
    delta_q: int
    dx: float
    dy: float


@dataclass(frozen=True)
class SynthConfig:
    """Knobs of the synthesis model.

    delta_bar: firing threshold on the theoretical change.
    sigma, w: blur standard deviation and blur radius, px.
    t_range, v_range, omega_range: uniform sampling intervals for elapsed time,
        each translational velocity component, and angular velocity.
    background_ratio: fraction rho of zero-target samples, 0 <= rho < 1.
    velocity_model: "rigid" dots the rotated gradient with the rigid per-point
        velocity about the pattern center; "literal" dots it with
        (vx + cos omega, vy + sin omega).
    """

    delta_bar: float = 0.001
    sigma: float = 2.0
    w: float = 6.0
    t_range: tuple[float, float] = (0.0, 0.01)
    v_range: tuple[float, float] = (-500.0, 500.0)
    omega_range: tuple[float, float] = (-5.0, 5.0)
    background_ratio: float = 0.3
    velocity_model: str = "rigid"

    def __post_init__(self):
        if not (self.delta_bar > 0.0):
            raise ValueError("delta_bar must be > 0")
        if not (self.sigma > 0.0):
            raise ValueError("sigma must be > 0")
        if not (self.w > 0.0):
            raise ValueError("w must be > 0")
        tmin, tmax = self.t_range
        if not (tmax > tmin >= 0.0):
            raise ValueError("t_range must satisfy tmax > tmin >= 0")
        if self.v_range[0] > self.v_range[1]:
            raise ValueError("v_range is empty")
        if self.omega_range[0] > self.omega_range[1]:
            raise ValueError("omega_range is empty")
        if not (0.0 <= self.background_ratio < 1.0):
            raise ValueError("background_ratio must lie in [0, 1)")
        if self.velocity_model not in VELOCITY_MODELS:
            raise ValueError(f"velocity_model must be one of {VELOCITY_MODELS}")


def theoretical_delta(
    grad,
    point,
    velocity: Velocity2,
    t: float,
    model: str = "rigid",
    center=(0.0, 0.0),
) -> float:
    """Theoretical intensity change of an edge moved for time t.

    The gradient is rotated by R(omega * t), dotted with the model's velocity
    vector, and scaled by t. For model="rigid" the velocity vector is the rigid
    per-point field (vx - omega*(ye - cy), vy + omega*(xe - cx)) about `center`;
    for model="literal" it is (vx + cos omega, vy + sin omega).
    """
    gx, gy = float(grad[0]), float(grad[1])
    wt = velocity.omega * t
    c, s = math.cos(wt), math.sin(wt)
    rgx = c * gx - s * gy
    rgy = s * gx + c * gy
    if model == "rigid":
        ax = velocity.vx - velocity.omega * (float(point[1]) - float(center[1]))
        ay = velocity.vy + velocity.omega * (float(point[0]) - float(center[0]))
    elif model == "literal":
        ax = velocity.vx + math.cos(velocity.omega)
        ay = velocity.vy + math.sin(velocity.omega)
    else:
        raise ValueError(f"velocity_model must be one of {VELOCITY_MODELS}")
    return (rgx * ax + rgy * ay) * t


def quantize_delta(delta_t: float, delta_bar: float) -> int | None:
    """Threshold a theoretical change: +1 above +delta_bar, -1 below -delta_bar.

    Returns None inside the dead band; the band is boundary-inclusive, so
    delta_t == +/-delta_bar does not fire.
    """
    if delta_t > delta_bar:
        return 1
    if delta_t < -delta_bar:
        return -1
    return None


def gaussian_blur_sample(
    delta_q: int, dx: float, dy: float, sigma: float, w: float
) -> float:
    """Blurred target at offset (dx, dy) from a fired edge: zero outside radius w."""
    r2 = dx * dx + dy * dy
    if math.sqrt(r2) > w:
        return 0.0
    return delta_q * math.exp(-r2 / (2.0 * sigma * sigma))


def displace_point(point, velocity: Velocity2, t: float, center=(0.0, 0.0)):
    """Rigidly move a point for time t: rotate by omega*t about center, translate by v*t."""
    wt = velocity.omega * t
    c, s = math.cos(wt), math.sin(wt)
    dx = float(point[0]) - float(center[0])
    dy = float(point[1]) - float(center[1])
    return (
        float(center[0]) + c * dx - s * dy + velocity.vx * t,
        float(center[1]) + s * dx + c * dy + velocity.vy * t,
    )


def _displace_batch(points: np.ndarray, velocity: Velocity2, t: float) -> np.ndarray:
    """Vectorized displace_point about the origin for (N, 2) centered points."""
    wt = velocity.omega * t
    c, s = math.cos(wt), math.sin(wt)
    out = np.empty_like(points)
    out[:, 0] = c * points[:, 0] - s * points[:, 1] + velocity.vx * t
    out[:, 1] = s * points[:, 0] + c * points[:, 1] + velocity.vy * t
    return out


def _draw_motion(rng, cfg: SynthConfig) -> tuple[float, Velocity2]:
    # Draw order is part of the format: t, vx, vy, omega.
    t = rng.uniform(cfg.t_range[0], cfg.t_range[1])
    vx = rng.uniform(cfg.v_range[0], cfg.v_range[1])
    vy = rng.uniform(cfg.v_range[0], cfg.v_range[1])
    om = rng.uniform(cfg.omega_range[0], cfg.omega_range[1])
    return t, Velocity2(vx, vy, om)


_MAX_ATTEMPTS = 100_000


def _edge_chunk(edges_c, grads, cfg: SynthConfig, count: int, seed: int, chunk_id: int):
    rng = np.random.default_rng([seed, 0, chunk_id])
    n_edges = len(edges_c)
    samples: list[TrainingSample] = []
    traces: list[SampleTrace] = []
    for _ in range(count):
        for attempt in range(_MAX_ATTEMPTS):
            t, vel = _draw_motion(rng, cfg)
            e = int(rng.integers(0, n_edges))
            delta_t = theoretical_delta(
                grads[e], edges_c[e], vel, t, cfg.velocity_model
            )
            delta_q = quantize_delta(delta_t, cfg.delta_bar)
            if delta_q is not None:
                break
        else:
            raise RuntimeError(
                "no firing draw found; the configured ranges never exceed delta_bar"
            )
        # Uniform offset over the blur disk via the polar transform.
        u1 = rng.uniform(0.0, 1.0)
        u2 = rng.uniform(0.0, 1.0)
        rr = cfg.w * math.sqrt(u1)
        th = 2.0 * math.pi * u2
        dx = rr * math.cos(th)
        dy = rr * math.sin(th)
        xt, yt = displace_point(edges_c[e], vel, t)
        target = gaussian_blur_sample(delta_q, dx, dy, cfg.sigma, cfg.w)
        samples.append(
            TrainingSample(xt + dx, yt + dy, t, vel.vx, vel.vy, vel.omega, target)
        )
        traces.append(
            SampleTrace(e, t, vel.vx, vel.vy, vel.omega, delta_t, delta_q, dx, dy)
        )
    return samples, traces


def _background_chunk(
    edges_c, cfg: SynthConfig, bound: float, count: int, seed: int, chunk_id: int
):
    rng = np.random.default_rng([seed, 1, chunk_id])
    w2 = cfg.w * cfg.w
    samples: list[TrainingSample] = []
    for _ in range(count):
        for attempt in range(_MAX_ATTEMPTS):
            t, vel = _draw_motion(rng, cfg)
            moved = _displace_batch(edges_c, vel, t)
            px = rng.uniform(-bound, bound)
            py = rng.uniform(-bound, bound)
            d2 = (moved[:, 0] - px) ** 2 + (moved[:, 1] - py) ** 2
            if d2.min() > w2:
                break
        else:
            raise RuntimeError("could not place a background sample off every edge")
        samples.append(TrainingSample(px, py, t, vel.vx, vel.vy, vel.omega, 0.0))
    return samples, [None] * count


def generate_training_set(
    pattern: Pattern,
    cfg: SynthConfig,
    n: int,
    seed: int,
    workers: int = 1,
    return_traces: bool = False,
):
    """Synthesize `n` training tuples from a pattern's edge set.

    ceil(background_ratio * n) of the samples are zero-target positions placed
    farther than w from every displaced edge; the rest are blur-disk samples
    around fired, displaced edge points, in pattern-frame coordinates.

    Deterministic in (pattern, cfg, n, seed): generation runs in fixed chunks,
    each with its own RNG stream keyed by (seed, kind, chunk index), so the
    worker count never changes the output.

    With return_traces=True also returns, per sample, a SampleTrace for on-edge
    samples and None for background samples.
    """
    if n <= 0:
        raise ValueError("n must be > 0")
    if seed < 0:
        raise ValueError("seed must be >= 0")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if len(pattern.edges) == 0:
        raise ValueError("pattern has no edge pixels at this threshold")

    edges_c = np.ascontiguousarray(pattern.edges_centered)
    grads = np.ascontiguousarray(pattern.edge_grads)

    n_background = math.ceil(cfg.background_ratio * n)
    n_edge = n - n_background
    vmax = max(abs(cfg.v_range[0]), abs(cfg.v_range[1]))
    bound = pattern.radius + vmax * cfg.t_range[1] + cfg.w + 2.0

    jobs = []
    for chunk_id in range(0, (n_edge + _CHUNK - 1) // _CHUNK):
        count = min(_CHUNK, n_edge - chunk_id * _CHUNK)
        jobs.append((_edge_chunk, (edges_c, grads, cfg, count, seed, chunk_id)))
    for chunk_id in range(0, (n_background + _CHUNK - 1) // _CHUNK):
        count = min(_CHUNK, n_background - chunk_id * _CHUNK)
        jobs.append(
            (_background_chunk, (edges_c, cfg, bound, count, seed, chunk_id))
        )

    if workers == 1:
        results = [fn(*args) for fn, args in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: job[0](*job[1]), jobs))

    samples: list[TrainingSample] = []
    traces: list[SampleTrace | None] = []
    for chunk_samples, chunk_traces in results:
        samples.extend(chunk_samples)
        traces.extend(chunk_traces)
    if return_traces:
        return samples, traces
    return samples


# ---------------------------------------------------------------------------
# Training-set binary file: magic, u32 version, u64 count, then per record
# seven little-endian f64 (x, y, t, vx, vy, omega, target).
# ---------------------------------------------------------------------------

_DATA_HEADER = struct.Struct("<4sIQ")


def save_training_set(samples, path) -> None:
    arr = np.empty((len(samples), 7), dtype="<f8")
    for i, s in enumerate(samples):
        arr[i] = (s.x, s.y, s.t, s.vx, s.vy, s.omega, s.target)
    with open(path, "wb") as fh:
        fh.write(_DATA_HEADER.pack(DATA_MAGIC, DATA_VERSION, len(samples)))
        fh.write(arr.tobytes())


def load_training_set(path) -> list[TrainingSample]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _DATA_HEADER.size:
        raise FileFormatError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, version, count = _DATA_HEADER.unpack_from(blob, 0)
    if magic != DATA_MAGIC:
        raise FileFormatError(f"{path}: bad magic {magic!r}")
    if version > DATA_VERSION:
        raise FileFormatError(
            f"{path}: format version {version} is newer than supported ({DATA_VERSION})"
        )
    body = blob[_DATA_HEADER.size :]
    expected = count * 56
    if len(body) != expected:
        raise FileFormatError(
            f"{path}: expected {expected} record bytes at offset {_DATA_HEADER.size}, "
            f"found {len(body)}"
        )
    arr = np.frombuffer(body, dtype="<f8").reshape(count, 7)
    return [TrainingSample(*row) for row in arr.tolist()]


# ---------------------------------------------------------------------------
# Event streams.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EventStream:
    """A time-sorted event list with its sensor header and ground truth."""

    width: int
    height: int
    duration: float
    events: tuple[Event, ...]
    ground_truth: GroundTruth

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("sensor size must be positive")
        if not (self.duration >= 0.0):
            raise ValueError("duration must be >= 0")
        object.__setattr__(self, "events", tuple(self.events))
        prev = 0.0
        for ev in self.events:
            if ev.t < prev:
                raise ValueError("events must be time-sorted")
            prev = ev.t
            if not (0.0 <= ev.x < self.width and 0.0 <= ev.y < self.height):
                raise ValueError(f"event at ({ev.x}, {ev.y}) outside sensor bounds")
            if ev.t > self.duration:
                raise ValueError("event time exceeds stream duration")
        if self.ground_truth.t[0] > 0.0 or self.ground_truth.duration < self.duration:
            raise ValueError("ground truth must cover [0, duration]")


def _as_segments(trajectory) -> list[tuple[float, Velocity2]]:
    if isinstance(trajectory, tuple) and len(trajectory) == 2 and isinstance(
        trajectory[1], Velocity2
    ):
        trajectory = [trajectory]
    segments = []
    for dur, vel in trajectory:
        if not (dur > 0.0):
            raise ValueError("segment durations must be > 0")
        if not isinstance(vel, Velocity2):
            raise ValueError("segment velocities must be Velocity2")
        segments.append((float(dur), vel))
    if not segments:
        raise ValueError("trajectory needs at least one segment")
    return segments


_MAX_STREAM_EVENTS = 20_000_000


def simulate_stream(
    pattern: Pattern,
    trajectory,
    contrast: float,
    dt: float,
    seed: int,
    init_pose: Pose2 | None = None,
    sensor_size: tuple[int, int] | None = None,
) -> EventStream:
    """Simulate the event stream of a rigidly moving pattern.

    `trajectory` is one (duration, Velocity2) segment or a list of them; within
    a segment the pattern center translates at (vx, vy) px/s in the sensor
    frame while the pattern spins at omega rad/s about its center. Per edge
    pixel, the signed linearized change grad . velocity * dt accumulates and
    every crossing of `contrast` emits one event with the sign's polarity
    (the accumulator keeps its remainder). Event timestamps are jittered
    uniformly within their step and each event takes the edge pixel's exact
    sensor position at its own timestamp; events outside the sensor are
    dropped. Ground truth is recorded at every step boundary by exact
    integration, with velocities in the pattern frame.
    """
    if not (contrast > 0.0):
        raise ValueError("contrast must be > 0")
    if not (dt > 0.0):
        raise ValueError("dt must be > 0")
    if seed < 0:
        raise ValueError("seed must be >= 0")
    segments = _as_segments(trajectory)
    if sensor_size is None:
        sensor_size = (2 * pattern.width, 2 * pattern.height)
    width, height = int(sensor_size[0]), int(sensor_size[1])
    if width <= 0 or height <= 0:
        raise ValueError("sensor size must be positive")
    if init_pose is None:
        init_pose = Pose2((width - 1) / 2.0, (height - 1) / 2.0, 0.0)

    rng = np.random.default_rng([seed])
    pts = np.ascontiguousarray(pattern.edges_centered)
    grads = np.ascontiguousarray(pattern.edge_grads)
    n_edges = len(pts)
    acc = np.zeros(n_edges)

    ev_t: list[np.ndarray] = []
    ev_x: list[np.ndarray] = []
    ev_y: list[np.ndarray] = []
    ev_p: list[np.ndarray] = []
    truth_rows: list[tuple[float, float, float, float, float, float, float]] = []
    total_events = 0

    u = np.array([init_pose.tx, init_pose.ty])
    r = init_pose.r
    base = 0.0
    for dur, vel in segments:
        v = np.array([vel.vx, vel.vy])
        om = vel.omega
        nsteps = max(1, math.ceil(dur / dt - 1e-12))
        for k in range(nsteps):
            a = k * dt
            b = min(a + dt, dur)
            h = b - a
            # Ground truth at the step start, velocity in the pattern frame.
            ra = r + om * a
            ua = u + v * a
            vp = rot2(-ra) @ v
            truth_rows.append((base + a, ua[0], ua[1], ra, vp[0], vp[1], om))

            mid = a + h / 2.0
            rm = r + om * mid
            rel = pts @ rot2(rm).T  # sensor offsets from the pattern center
            gs = grads @ rot2(rm).T
            vpt_x = v[0] - om * rel[:, 1]
            vpt_y = v[1] + om * rel[:, 0]
            rate = gs[:, 0] * vpt_x + gs[:, 1] * vpt_y
            acc += rate * h

            mag = np.abs(acc)
            idx = np.nonzero(mag >= contrast)[0]
            if len(idx) == 0:
                continue
            nev = np.floor_divide(mag[idx], contrast).astype(np.int64)
            pol = np.sign(acc[idx])
            acc[idx] -= pol * nev * contrast
            total = int(nev.sum())
            total_events += total
            if total_events > _MAX_STREAM_EVENTS:
                raise ValueError(
                    f"stream exceeds {_MAX_STREAM_EVENTS} events; raise contrast or dt"
                )
            rep = np.repeat(idx, nev)
            ts = a + rng.uniform(0.0, 1.0, total) * h
            re = r + om * ts
            ce, se = np.cos(re), np.sin(re)
            px = pts[rep, 0]
            py = pts[rep, 1]
            ex = ce * px - se * py + u[0] + v[0] * ts
            ey = se * px + ce * py + u[1] + v[1] * ts
            ev_t.append(base + ts)
            ev_x.append(ex)
            ev_y.append(ey)
            ev_p.append(np.repeat(pol, nev))
        u = u + v * dur
        r = r + om * dur
        base += dur
    v_last = segments[-1][1]
    vp_last = rot2(-r) @ np.array([v_last.vx, v_last.vy])
    truth_rows.append((base, u[0], u[1], r, vp_last[0], vp_last[1], v_last.omega))

    if ev_t:
        t_all = np.concatenate(ev_t)
        x_all = np.concatenate(ev_x)
        y_all = np.concatenate(ev_y)
        p_all = np.concatenate(ev_p)
        keep = (x_all >= 0.0) & (x_all < width) & (y_all >= 0.0) & (y_all < height)
        t_all, x_all, y_all, p_all = t_all[keep], x_all[keep], y_all[keep], p_all[keep]
        order = np.lexsort((p_all, y_all, x_all, t_all))
        events = tuple(
            Event(float(t_all[i]), float(x_all[i]), float(y_all[i]), int(p_all[i]))
            for i in order
        )
    else:
        events = ()

    rows = np.array(truth_rows)
    truth = GroundTruth(rows[:, 0], rows[:, 1:4], rows[:, 4:7])
    return EventStream(width, height, base, events, truth)


def builtin_marker(size: int = 128) -> Pattern:
    """The built-in fiducial: a chamfered dark octagon with asymmetric satellites.

    The layout balances two competing demands on the blurred change field.

    Learnability: the irreducible part of the fit loss comes from sample
    neighbourhoods containing fired edges of both polarities. Right-angle
    corners put opposite-signed strong responses within one blur radius for
    half of all motion draws; 135-degree chamfers shrink that to a narrow
    wedge of near-tangent motions whose weak responses the firing threshold
    rejects. All parallel edge pairs sit farther apart than twice the default
    blur radius, and curved edges are kept at gentle radii.

    Observability: a chamfered octagon alone is nearly rotation-invariant —
    small rotations slide edge points along themselves, so the rotation and
    angular-rate directions of the tracking loss collapse into a gauge mode
    that fit noise can tilt. The off-center hole and the three corner disks
    (one corner left empty, its opposite disk larger, so no 90- or 180-degree
    symmetry survives) give rotations a long lever arm and supply edge
    normals at every orientation for velocity-direction observability.

    The geometry is designed on a 64-px grid and scales with `size`; feature
    separations satisfy the two-blur-radius rule at size 128 and above.
    """
    if size < 64 or size % 64 != 0:
        raise ValueError("marker size must be a positive multiple of 64")
    u = size / 64.0
    lo, hi, chamfer = 10 * u, 54 * u - 1, 13 * u
    img = np.ones((size, size))
    yy, xx = np.mgrid[0:size, 0:size]
    inside = (xx >= lo) & (xx <= hi) & (yy >= lo) & (yy <= hi)
    inside &= (xx + yy >= 2 * lo + chamfer) & (xx + yy <= 2 * hi - chamfer)
    inside &= (xx - yy <= hi - lo - chamfer) & (yy - xx <= hi - lo - chamfer)
    img[inside] = 0.0

    def octet(cx: float, cy: float, a: float, value: float, rot: float = 0.0) -> None:
        # Regular octagon of apothem a, optionally rotated; reuses the gated
        # 135-degree corner geometry at feature scale (circles of any feasible
        # radius put opposing normals inside one blur disk and mix polarities).
        dx = xx - cx * u
        dy = yy - cy * u
        if rot:
            c, s = math.cos(rot), math.sin(rot)
            dx, dy = c * dx + s * dy, -s * dx + c * dy
        mask = (
            (np.abs(dx) <= a * u)
            & (np.abs(dy) <= a * u)
            & (np.abs(dx) + np.abs(dy) <= math.sqrt(2.0) * a * u)
        )
        img[mask] = value

    # Feature sizing: sides of one feature that meet at 90 deg (one side
    # apart) are ungated by the firing threshold, so they must sit farther
    # than the blur diameter: apothem * sqrt(2) > 2w.
    octet(37.5, 28.0, 6.0, 1.0)  # bright hole, off the octagon center
    octet(57.0, 6.75, 5.0, 0.0)  # top-right satellite
    octet(6.75, 57.0, 5.0, 0.0)  # bottom-left satellite
    # Top-left satellite: larger and rotated 22.5 deg, so the marker carries
    # all eight edge orientations; the bottom-right corner stays empty.
    octet(7.75, 7.75, 5.25, 0.0, rot=math.pi / 8.0)
    return Pattern.from_array(img)


# ---------------------------------------------------------------------------
# CSV formats. Floats are written with repr so re-reading is bit-exact.
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def events_to_csv(events, path) -> None:
    """Write events as CSV with header t,x,y,p."""
    if isinstance(events, EventStream):
        events = events.events
    with open(path, "w", encoding="ascii") as fh:
        fh.write("t,x,y,p\n")
        for ev in events:
            fh.write(f"{_fmt(ev.t)},{_fmt(ev.x)},{_fmt(ev.y)},{ev.polarity}\n")


def events_from_csv(path) -> list[Event]:
    """Read an event CSV, validating shape, polarity and time order per line."""
    events: list[Event] = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        if header != "t,x,y,p":
            raise FileFormatError(f"{path}:1: expected header 't,x,y,p', got {header!r}")
        prev_t = -math.inf
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise FileFormatError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
            try:
                t, x, y = float(parts[0]), float(parts[1]), float(parts[2])
                p = int(parts[3])
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: {exc}") from exc
            if p not in (1, -1):
                raise FileFormatError(f"{path}:{lineno}: polarity must be 1 or -1, got {p}")
            if t < prev_t:
                raise FileFormatError(f"{path}:{lineno}: events not time-sorted")
            prev_t = t
            events.append(Event(t, x, y, p))
    return events


def truth_to_csv(truth: GroundTruth, path) -> None:
    """Write ground truth as CSV with header t,tx,ty,r,vx,vy,omega."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("t,tx,ty,r,vx,vy,omega\n")
        for i in range(len(truth.t)):
            row = [truth.t[i], *truth.poses[i], *truth.velocities[i]]
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def truth_from_csv(path) -> GroundTruth:
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        if header != "t,tx,ty,r,vx,vy,omega":
            raise FileFormatError(
                f"{path}:1: expected header 't,tx,ty,r,vx,vy,omega', got {header!r}"
            )
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 7:
                raise FileFormatError(f"{path}:{lineno}: expected 7 fields, got {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise FileFormatError(f"{path}: no ground-truth rows")
    arr = np.array(rows)
    try:
        return GroundTruth(arr[:, 0], arr[:, 1:4], arr[:, 4:7])
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc

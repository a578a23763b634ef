"""Pose and velocity tracking by gradient descent through a trained model.

Each window of M events is explained by six numbers: a pose (tx, ty, r) at the
window's first event and a pattern-frame velocity (vx, vy, omega). Every event
is warped into the pattern frame by the pose, stamped with its time offset
from the window start, and fed to the model together with the velocity; the
window loss rewards predictions of large magnitude, so descent pulls the warp
onto the pattern's edges and the velocity toward the motion that explains the
observed polarities' timing.

Descent runs on the model's normalized input scales rather than raw units:
pixels, radians and px/s curvatures differ by many orders of magnitude, and a
single raw learning rate cannot serve all six. Each coordinate steps by
lr * s_c^2 * gradient, where s_c is the model's input scale for that
coordinate (the rotation entries get the translation scales divided by the rms
normalized pattern radius, which is what a radian is worth in pixels here).

Windows slide by K events and are warm-started from the previous window's
result propagated across the stride gap; the reported trajectory is keyed by
each window's last event time, with the window state propagated to that time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Event, Pose2, Velocity2, WindowState, rot2, drot2
from .errors import FileFormatError, NumericalDivergenceError
from .ieg import IegModel, forward_batch, grad_input_batch

__all__ = [
    "TrackerConfig",
    "Trajectory",
    "window_loss",
    "window_loss_grad",
    "optimize_window",
    "slide_track",
    "advance_state",
]

POLARITY_MODES = ("ignore", "match")


@dataclass(frozen=True)
class TrackerConfig:
    """Sliding-window tracking knobs.

    m: events per window; k: window stride in events.
    lr: descent rate applied on the normalized scales (0 freezes the state).
    eps_bar: stop once the per-iteration loss improvement falls below this.
    polarity_mode: "ignore" scores 1 - |prediction| per event; "match" scores
        the squared gap to the event's signed polarity.
    normalize_loss: divide the window loss (and its gradient) by the window
        size, making eps_bar a per-event threshold.
    """

    m: int = 20000
    k: int = 500
    lr: float = 1e-4
    eps_bar: float = 1e-6
    max_iters: int = 5000
    polarity_mode: str = "ignore"
    normalize_loss: bool = False

    def __post_init__(self):
        if self.m <= 0:
            raise ValueError("m must be > 0")
        if not (0 < self.k <= self.m):
            raise ValueError("k must satisfy 0 < k <= m")
        if self.lr < 0.0:
            raise ValueError("lr must be >= 0")
        if not (self.eps_bar > 0.0):
            raise ValueError("eps_bar must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.polarity_mode not in POLARITY_MODES:
            raise ValueError(f"polarity_mode must be one of {POLARITY_MODES}")


def _events_to_arrays(events) -> np.ndarray:
    """(N, 4) float64 array of t, x, y, polarity, sorted like the event order."""
    if isinstance(events, np.ndarray):
        arr = np.asarray(events, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ValueError(f"expected an (N, 4) event array, got {arr.shape}")
        return arr
    arr = np.empty((len(events), 4))
    for i, ev in enumerate(events):
        arr[i, 0] = ev.t
        arr[i, 1] = ev.x
        arr[i, 2] = ev.y
        arr[i, 3] = ev.polarity
    return arr


def _model_inputs(
    model: IegModel, ev: np.ndarray, pose: Pose2, velocity: Velocity2
) -> np.ndarray:
    """Assemble the (N, 6) model batch for a window under a candidate state."""
    n = len(ev)
    q = np.empty((n, 6))
    rinv = rot2(-pose.r)
    dx = ev[:, 1] - pose.tx
    dy = ev[:, 2] - pose.ty
    q[:, 0] = rinv[0, 0] * dx + rinv[0, 1] * dy
    q[:, 1] = rinv[1, 0] * dx + rinv[1, 1] * dy
    tmin = model.input_offset[2] - model.input_scale[2]
    tmax = model.input_offset[2] + model.input_scale[2]
    np.clip(ev[:, 0] - ev[0, 0], tmin, tmax, out=q[:, 2])
    q[:, 3] = velocity.vx
    q[:, 4] = velocity.vy
    q[:, 5] = velocity.omega
    return q


def _loss_terms(pred: np.ndarray, pol: np.ndarray, mode: str):
    """Per-event losses and d(loss)/d(prediction) for a polarity mode."""
    if mode == "ignore":
        return 1.0 - np.abs(pred), -np.sign(pred)
    err = pred - pol
    return err**2, 2.0 * err


def window_loss(
    model: IegModel,
    events,
    pose: Pose2,
    velocity: Velocity2,
    cfg: TrackerConfig = TrackerConfig(),
) -> float:
    """Loss of one window under a candidate state; low when events land on edges."""
    ev = _events_to_arrays(events)
    if len(ev) == 0:
        raise ValueError("window has no events")
    q = _model_inputs(model, ev, pose, velocity)
    pred = forward_batch(model, q)
    terms, _ = _loss_terms(pred, ev[:, 3], cfg.polarity_mode)
    total = float(np.sum(terms))
    return total / len(ev) if cfg.normalize_loss else total


def window_loss_grad(
    model: IegModel,
    events,
    pose: Pose2,
    velocity: Velocity2,
    cfg: TrackerConfig = TrackerConfig(),
):
    """Window loss and its exact gradient w.r.t. (tx, ty, r, vx, vy, omega).

    The pose enters through the warp of every event position and the velocity
    is shared by every row, so the chain rule reduces to one batched input
    gradient plus small per-window contractions.
    """
    ev = _events_to_arrays(events)
    if len(ev) == 0:
        raise ValueError("window has no events")
    q = _model_inputs(model, ev, pose, velocity)
    pred = forward_batch(model, q)
    terms, dl_dpred = _loss_terms(pred, ev[:, 3], cfg.polarity_mode)
    loss = float(np.sum(terms))
    g6 = grad_input_batch(model, q, dl_dpred)

    gxy = g6[:, 0:2]
    s = gxy.sum(axis=0)
    grad = np.empty(6)
    # d(warped)/d(translation) is -R(-r) for every event
    grad[0:2] = -(rot2(-pose.r).T @ s)
    a = -drot2(-pose.r)  # d(R(-r))/dr
    dx = ev[:, 1] - pose.tx
    dy = ev[:, 2] - pose.ty
    grad[2] = float(
        np.sum(
            gxy[:, 0] * (a[0, 0] * dx + a[0, 1] * dy)
            + gxy[:, 1] * (a[1, 0] * dx + a[1, 1] * dy)
        )
    )
    grad[3:6] = g6[:, 3:6].sum(axis=0)
    if cfg.normalize_loss:
        loss /= len(ev)
        grad /= len(ev)
    return loss, grad


def descent_scales(model: IegModel) -> np.ndarray:
    """Per-coordinate step scales derived from the model's input normalization.

    Translations and velocities use their own input scales. A radian of
    rotation (or of angular rate) moves a point at the rms normalized pattern
    radius by that many normalized pixels, so the rotation entries are the
    mean translation scale divided by that radius.
    """
    s = model.input_scale
    rho = math.sqrt((s[0] ** 2 + s[1] ** 2) / 3.0)
    return np.array(
        [s[0], s[1], (s[0] + s[1]) / (2.0 * rho), s[3], s[4], (s[3] + s[4]) / (2.0 * rho)]
    )


def optimize_window(
    model: IegModel,
    events,
    init_pose: Pose2,
    init_velocity: Velocity2,
    cfg: TrackerConfig = TrackerConfig(),
) -> WindowState:
    """Descend one window's loss from an initial state until it stops improving.

    Each iteration evaluates the loss and gradient, steps, and compares the
    loss to the previous iteration's; the loop ends when the signed
    improvement drops below eps_bar or at max_iters.
    """
    ev = _events_to_arrays(events)
    s2 = descent_scales(model) ** 2
    theta = np.array(
        [
            init_pose.tx,
            init_pose.ty,
            init_pose.r,
            init_velocity.vx,
            init_velocity.vy,
            init_velocity.omega,
        ],
        dtype=np.float64,
    )
    prev = math.inf
    k = 0
    while True:
        loss, grad = window_loss_grad(
            model, ev, Pose2(*theta[:3]), Velocity2(*theta[3:]), cfg
        )
        if not math.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise NumericalDivergenceError(
                f"non-finite window loss at iteration {k}",
                {"iteration": k, "loss": loss, "state": theta.tolist()},
            )
        theta -= cfg.lr * s2 * grad
        k += 1
        improvement = prev - loss
        prev = loss
        if improvement < cfg.eps_bar or k >= cfg.max_iters:
            break
    return WindowState(Pose2(*theta[:3]), Velocity2(*theta[3:]), k, loss)


def advance_state(pose: Pose2, velocity: Velocity2, dt: float):
    """Propagate a (pose, pattern-frame velocity) state over a time gap.

    The sensor-frame translational velocity R(r) v stays constant, so the
    position moves by it, the angle advances by omega * dt, and the
    pattern-frame velocity counter-rotates to keep describing the same motion.
    """
    v_sensor = rot2(pose.r) @ np.array([velocity.vx, velocity.vy])
    dr = velocity.omega * dt
    v_new = rot2(-dr) @ np.array([velocity.vx, velocity.vy])
    return (
        Pose2(pose.tx + v_sensor[0] * dt, pose.ty + v_sensor[1] * dt, pose.r + dr),
        Velocity2(v_new[0], v_new[1], velocity.omega),
    )


@dataclass(frozen=True)
class Trajectory:
    """Per-window tracking output keyed by each window's last event time."""

    t: np.ndarray
    poses: np.ndarray
    velocities: np.ndarray
    iterations: np.ndarray
    losses: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        poses = np.asarray(self.poses, dtype=np.float64)
        vels = np.asarray(self.velocities, dtype=np.float64)
        iters = np.asarray(self.iterations, dtype=np.int64)
        losses = np.asarray(self.losses, dtype=np.float64)
        n = len(t)
        if n == 0:
            raise ValueError("trajectory must have at least one window")
        if poses.shape != (n, 3) or vels.shape != (n, 3):
            raise ValueError("poses and velocities must have shape (n, 3)")
        if iters.shape != (n,) or losses.shape != (n,):
            raise ValueError("iterations and losses must have shape (n,)")
        if np.any(np.diff(t) < 0.0):
            raise ValueError("window times must be non-decreasing")
        for name, arr in (("t", t), ("poses", poses), ("velocities", vels), ("losses", losses)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
        for name, arr in (("t", t), ("poses", poses), ("velocities", vels), ("iterations", iters), ("losses", losses)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.t)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("t,tx,ty,r,vx,vy,omega,iters,loss\n")
            for i in range(len(self.t)):
                vals = [self.t[i], *self.poses[i], *self.velocities[i]]
                fh.write(
                    ",".join(repr(float(v)) for v in vals)
                    + f",{int(self.iterations[i])},{repr(float(self.losses[i]))}\n"
                )

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        rows = []
        with open(path, "r", encoding="ascii") as fh:
            header = fh.readline().rstrip("\n")
            if header != "t,tx,ty,r,vx,vy,omega,iters,loss":
                raise FileFormatError(
                    f"{path}:1: expected trajectory header, got {header!r}"
                )
            for lineno, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                if len(parts) != 9:
                    raise FileFormatError(
                        f"{path}:{lineno}: expected 9 fields, got {len(parts)}"
                    )
                try:
                    row = [float(p) for p in parts]
                    int(parts[7])
                except ValueError as exc:
                    raise FileFormatError(f"{path}:{lineno}: {exc}") from exc
                rows.append(row)
        if not rows:
            raise FileFormatError(f"{path}: no trajectory rows")
        arr = np.array(rows)
        try:
            return cls(arr[:, 0], arr[:, 1:4], arr[:, 4:7], arr[:, 7], arr[:, 8])
        except ValueError as exc:
            raise FileFormatError(f"{path}: {exc}") from exc


def slide_track(
    model: IegModel,
    events,
    init_pose: Pose2,
    init_velocity: Velocity2 = Velocity2(0.0, 0.0, 0.0),
    cfg: TrackerConfig = TrackerConfig(),
    on_window=None,
) -> Trajectory:
    """Track a whole stream with windows of m events sliding by k.

    The first window starts from (init_pose, init_velocity); every later
    window is warm-started from its predecessor's result propagated across the
    stride gap. The final window is the first one whose span reaches the last
    event; if fewer than a tenth of m events remain in it, it is dropped.
    Raises ValueError when the stream is shorter than one window.
    """
    ev = _events_to_arrays(events)
    n = len(ev)
    if n < cfg.m:
        raise ValueError(f"stream has {n} events, need at least m={cfg.m}")
    order = np.lexsort((ev[:, 3], ev[:, 2], ev[:, 1], ev[:, 0]))
    ev = ev[order]

    last_j = max(0, math.ceil((n - cfg.m) / cfg.k))
    starts = []
    for j in range(last_j + 1):
        lo = j * cfg.k
        hi = min(lo + cfg.m, n)
        if hi - lo < cfg.m and (hi - lo) < 0.1 * cfg.m:
            continue
        starts.append((lo, hi))

    pose, vel = init_pose, init_velocity
    prev_t0 = None
    t_out, pose_out, vel_out, it_out, loss_out = [], [], [], [], []
    for widx, (lo, hi) in enumerate(starts):
        win = ev[lo:hi]
        t0 = win[0, 0]
        if prev_t0 is not None:
            pose, vel = advance_state(pose, vel, t0 - prev_t0)
        state = optimize_window(model, win, pose, vel, cfg)
        pose, vel = state.pose, state.velocity
        prev_t0 = t0

        t_end = win[-1, 0]
        out_pose, out_vel = advance_state(pose, vel, t_end - t0)
        t_out.append(t_end)
        pose_out.append(out_pose.as_array())
        vel_out.append(out_vel.as_array())
        it_out.append(state.iterations)
        loss_out.append(state.final_loss)
        if on_window is not None:
            on_window(widx, len(starts), state)
    return Trajectory(
        np.array(t_out),
        np.array(pose_out),
        np.array(vel_out),
        np.array(it_out),
        np.array(loss_out),
    )

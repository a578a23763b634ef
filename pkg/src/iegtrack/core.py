"""Domain types and planar geometry.

Coordinate conventions used throughout the package:

* Sensor frame: pixel units, origin at the sensor's top-left pixel, x right,
  y down. Events live here.
* Pattern frame: pixel units with the origin at the PATTERN CENTER
  ((W-1)/2, (H-1)/2 of the intensity grid). Warped event positions, training
  sample positions and the rigid velocity field all live here.
* Rotations are counter-clockwise-positive angles in radians on this y-down
  grid, R(a) = [[cos a, -sin a], [sin a, cos a]]. Angles are stored unwrapped
  (no modulo) so trajectories stay continuous.

A pose ``T = (tx, ty, r)`` places the pattern center at sensor position
``(tx, ty)`` with the pattern rotated by ``r``; a pattern point ``p`` (centered
coordinates) appears at sensor position ``R(r) p + t``. ``warp`` inverts that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image

__all__ = [
    "Pose2",
    "Velocity2",
    "Event",
    "WindowState",
    "GroundTruth",
    "Pattern",
    "rot2",
    "drot2",
    "warp",
    "warp_batch",
    "warp_jacobian",
    "load_pattern",
    "save_pgm",
]


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True, slots=True)
class Pose2:
    """Planar pose: translation (tx, ty) in sensor pixels, rotation r in radians."""

    tx: float
    ty: float
    r: float

    def __post_init__(self):
        _require_finite("Pose2", self.tx, self.ty, self.r)

    def as_array(self) -> np.ndarray:
        return np.array([self.tx, self.ty, self.r], dtype=float)


@dataclass(frozen=True, slots=True)
class Velocity2:
    """Planar velocity: (vx, vy) in px/s, omega in rad/s."""

    vx: float
    vy: float
    omega: float

    def __post_init__(self):
        _require_finite("Velocity2", self.vx, self.vy, self.omega)

    def as_array(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.omega], dtype=float)


@dataclass(frozen=True, slots=True)
class Event:
    """One intensity-change event: time t (s), sensor position, polarity +1 or -1."""

    t: float
    x: float
    y: float
    polarity: int

    def __post_init__(self):
        _require_finite("Event", self.t, self.x, self.y)
        if self.polarity not in (1, -1):
            raise ValueError(f"polarity must be +1 or -1, got {self.polarity!r}")


@dataclass(frozen=True, slots=True)
class WindowState:
    """Converged state of one event window."""

    pose: Pose2
    velocity: Velocity2
    iterations: int
    final_loss: float

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not (self.final_loss >= 0.0):
            raise ValueError("final_loss must be >= 0")


@dataclass(frozen=True)
class GroundTruth:
    """Trajectory samples: times (N,), poses (N, 3) as tx/ty/r, velocities (N, 3).

    Velocities are pattern-frame: (R(-r) v_sensor, omega). Times are strictly
    increasing.
    """

    t: np.ndarray
    poses: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or len(t) < 1:
            raise ValueError("ground truth needs at least one sample")
        if np.any(np.diff(t) <= 0):
            raise ValueError("ground truth times must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "poses", np.asarray(self.poses, dtype=float))
        object.__setattr__(self, "velocities", np.asarray(self.velocities, dtype=float))
        if self.poses.shape != (len(t), 3) or self.velocities.shape != (len(t), 3):
            raise ValueError("poses/velocities must be (N, 3)")

    @property
    def duration(self) -> float:
        return float(self.t[-1])


def rot2(angle: float) -> np.ndarray:
    """CCW rotation matrix R(angle) for the y-down grid."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def drot2(angle: float) -> np.ndarray:
    """Derivative dR/da at `angle`."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[-s, -c], [c, -s]])


def warp(point, pose: Pose2) -> np.ndarray:
    """Map a sensor point into pattern-frame coordinates: R(-r) (p - t)."""
    p = np.asarray(point, dtype=float)
    return rot2(-pose.r) @ (p - np.array([pose.tx, pose.ty]))


def warp_batch(points: np.ndarray, pose: Pose2) -> np.ndarray:
    """Vectorized `warp` for an (N, 2) array of sensor points."""
    d = np.asarray(points, dtype=float) - np.array([pose.tx, pose.ty])
    return d @ rot2(-pose.r).T


def warp_jacobian(point, pose: Pose2) -> np.ndarray:
    """Jacobian of `warp` w.r.t. (tx, ty, r), shape (2, 3).

    Columns: d/dtx = -R(-r) e1, d/dty = -R(-r) e2, d/dr = dR(-r)/dr (p - t).
    """
    p = np.asarray(point, dtype=float)
    rinv = rot2(-pose.r)
    # dR(-r)/dr: differentiate [[cos r, sin r], [-sin r, cos r]] in r.
    c, s = math.cos(pose.r), math.sin(pose.r)
    a = np.array([[-s, c], [-c, -s]])
    jac = np.empty((2, 3))
    jac[:, 0] = -rinv[:, 0]
    jac[:, 1] = -rinv[:, 1]
    jac[:, 2] = a @ (p - np.array([pose.tx, pose.ty]))
    return jac


@dataclass(frozen=True)
class Pattern:
    """A planar intensity pattern and its edge set.

    intensity: (H, W) float array in [0, 1].
    grad: (H, W, 2) spatial gradient (d/dx, d/dy), central differences inside,
        one-sided at the image border.
    edges: (E, 4) rows (x, y, gx, gy) in raw pixel coordinates, listed in
        row-major scan order, for pixels with gradient magnitude >= threshold.
    """

    intensity: np.ndarray
    grad: np.ndarray
    edges: np.ndarray
    edge_threshold: float

    def __post_init__(self):
        for arr in (self.intensity, self.grad, self.edges):
            arr.flags.writeable = False

    @classmethod
    def from_array(cls, intensity, edge_threshold: float = 0.1) -> "Pattern":
        img = np.asarray(intensity, dtype=float)
        if img.ndim != 2 or img.shape[0] < 2 or img.shape[1] < 2:
            raise ValueError("pattern must be a 2-D grid, at least 2x2")
        if img.min() < 0.0 or img.max() > 1.0:
            raise ValueError("pattern intensities must lie in [0, 1]")
        if not (edge_threshold > 0.0):
            raise ValueError("edge_threshold must be > 0")
        gy, gx = np.gradient(img)  # axis 0 is y (rows), axis 1 is x (cols)
        grad = np.stack([gx, gy], axis=-1)
        mag = np.hypot(gx, gy)
        ys, xs = np.nonzero(mag >= edge_threshold)
        edges = np.column_stack(
            [xs.astype(float), ys.astype(float), gx[ys, xs], gy[ys, xs]]
        )
        return cls(img, grad, edges, float(edge_threshold))

    @property
    def height(self) -> int:
        return self.intensity.shape[0]

    @property
    def width(self) -> int:
        return self.intensity.shape[1]

    @property
    def center(self) -> np.ndarray:
        """Pattern center in raw pixel coordinates."""
        return np.array([(self.width - 1) / 2.0, (self.height - 1) / 2.0])

    @property
    def edges_centered(self) -> np.ndarray:
        """Edge positions in pattern-frame (centered) coordinates, shape (E, 2)."""
        return self.edges[:, :2] - self.center

    @property
    def edge_grads(self) -> np.ndarray:
        """Edge gradients (E, 2)."""
        return self.edges[:, 2:4]

    @property
    def radius(self) -> float:
        """Half-diagonal of the grid: the farthest any pattern point can be from center."""
        return float(np.hypot(self.width / 2.0, self.height / 2.0))


def load_pattern(path, edge_threshold: float = 0.1) -> Pattern:
    """Load a grayscale pattern image (PGM or PNG), normalized to [0, 1]."""
    with Image.open(path) as im:
        img = np.asarray(im.convert("L"), dtype=float) / 255.0
    return Pattern.from_array(img, edge_threshold)


def save_pgm(path, intensity: np.ndarray) -> None:
    """Write a [0, 1] float grid as a binary (P5) PGM file."""
    img = np.asarray(intensity, dtype=float)
    data = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())

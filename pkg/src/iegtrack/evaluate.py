"""Scoring of tracked trajectories against simulator ground truth.

Ground truth is sampled on the simulator's step grid and trajectories on
window end times, so truth is linearly interpolated onto the trajectory's
timestamps before computing per-component mean squared errors. Rotation
errors are wrapped onto (-pi, pi] first; velocity components compare in the
pattern frame, which is what both sides record.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .core import GroundTruth
from .tracker import Trajectory

__all__ = [
    "ErrorReport",
    "align_and_score",
    "wrap_angle",
    "report_to_json",
    "report_from_json",
    "report_table",
    "emit_timeseries",
]


def wrap_angle(d):
    """Map angle differences onto (-pi, pi]."""
    return math.pi - np.mod(math.pi - np.asarray(d, dtype=np.float64), 2.0 * math.pi)


@dataclass(frozen=True)
class ErrorReport:
    """Per-component MSEs plus iteration statistics for one tracked stream."""

    window_count: int
    mse_tx: float
    mse_ty: float
    mse_r: float
    mse_vx: float
    mse_vy: float
    mse_omega: float
    iters_first: int
    iters_rest_mean: float | None
    config: dict


def align_and_score(
    traj: Trajectory,
    truth: GroundTruth,
    config_echo: dict | None = None,
    subsample: int = 1,
) -> ErrorReport:
    """Interpolate truth onto the trajectory's window times and report MSEs.

    Raises ValueError when any window time falls outside the truth's span.
    """
    if subsample < 1:
        raise ValueError("subsample must be >= 1")
    t = traj.t[::subsample]
    poses = traj.poses[::subsample]
    vels = traj.velocities[::subsample]
    if t[0] < truth.t[0] or t[-1] > truth.t[-1]:
        raise ValueError(
            f"trajectory spans [{t[0]}, {t[-1]}] but ground truth only covers "
            f"[{truth.t[0]}, {truth.t[-1]}]"
        )
    gt_x = np.interp(t, truth.t, truth.poses[:, 0])
    gt_y = np.interp(t, truth.t, truth.poses[:, 1])
    gt_r = np.interp(t, truth.t, np.unwrap(truth.poses[:, 2]))
    gt_vx = np.interp(t, truth.t, truth.velocities[:, 0])
    gt_vy = np.interp(t, truth.t, truth.velocities[:, 1])
    gt_om = np.interp(t, truth.t, truth.velocities[:, 2])

    r_err = wrap_angle(poses[:, 2] - gt_r)
    rest = traj.iterations[1:]
    return ErrorReport(
        window_count=len(traj),
        mse_tx=float(np.mean((poses[:, 0] - gt_x) ** 2)),
        mse_ty=float(np.mean((poses[:, 1] - gt_y) ** 2)),
        mse_r=float(np.mean(r_err**2)),
        mse_vx=float(np.mean((vels[:, 0] - gt_vx) ** 2)),
        mse_vy=float(np.mean((vels[:, 1] - gt_vy) ** 2)),
        mse_omega=float(np.mean((vels[:, 2] - gt_om) ** 2)),
        iters_first=int(traj.iterations[0]),
        iters_rest_mean=float(np.mean(rest)) if len(rest) else None,
        config=dict(config_echo or {}),
    )


def report_to_json(report: ErrorReport) -> str:
    return json.dumps(asdict(report), indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> ErrorReport:
    data = json.loads(text)
    return ErrorReport(**data)


def report_table(report: ErrorReport) -> str:
    """Aligned, human-readable rendering of a report."""
    headers = [
        "x [px^2]",
        "y [px^2]",
        "r [rad^2]",
        "vx [(px/s)^2]",
        "vy [(px/s)^2]",
        "omega [(rad/s)^2]",
    ]
    values = [
        report.mse_tx,
        report.mse_ty,
        report.mse_r,
        report.mse_vx,
        report.mse_vy,
        report.mse_omega,
    ]
    cells = [f"{v:.6g}" for v in values]
    widths = [max(len(h), len(c)) for h, c in zip(headers, cells)]
    lines = [
        "mse  " + "  ".join(h.rjust(w) for h, w in zip(headers, widths)),
        "     " + "  ".join(c.rjust(w) for c, w in zip(cells, widths)),
    ]
    rest = (
        f"{report.iters_rest_mean:.1f}" if report.iters_rest_mean is not None else "n/a"
    )
    lines.append(
        f"windows: {report.window_count}   iterations: first {report.iters_first}, "
        f"rest mean {rest}"
    )
    return "\n".join(lines) + "\n"


def _svg_plot(path, title: str, t, est, gt) -> None:
    """One standalone SVG: estimate as a solid line, truth dashed."""
    width, height = 800, 400
    ml, mr, mt, mb = 60, 20, 30, 40
    lo = min(float(np.min(est)), float(np.min(gt)))
    hi = max(float(np.max(est)), float(np.max(gt)))
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    t0, t1 = float(t[0]), float(t[-1])
    if t1 - t0 < 1e-12:
        t1 = t0 + 1.0

    def sx(tv):
        return ml + (tv - t0) / (t1 - t0) * (width - ml - mr)

    def sy(v):
        return height - mb - (v - lo) / (hi - lo) * (height - mt - mb)

    def poly(vals):
        return " ".join(f"{sx(float(ti)):.2f},{sy(float(vi)):.2f}" for ti, vi in zip(t, vals))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="18" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" y2="{height - mb}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height - mb}" stroke="black"/>',
        f'<text x="{ml}" y="{height - 10}" font-size="11">t = {t0:.4g} s</text>',
        f'<text x="{width - mr}" y="{height - 10}" text-anchor="end" font-size="11">t = {t1:.4g} s</text>',
        f'<text x="{ml - 6}" y="{height - mb}" text-anchor="end" font-size="11">{lo:.4g}</text>',
        f'<text x="{ml - 6}" y="{mt + 4}" text-anchor="end" font-size="11">{hi:.4g}</text>',
        f'<polyline points="{poly(gt)}" fill="none" stroke="#888888" '
        f'stroke-width="1.5" stroke-dasharray="6 4"/>',
        f'<polyline points="{poly(est)}" fill="none" stroke="#1060c0" stroke-width="1.5"/>',
        f'<text x="{width - mr}" y="{mt + 4}" text-anchor="end" font-size="11">'
        f"solid: tracked, dashed: truth</text>",
        "</svg>",
    ]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(parts) + "\n")


def emit_timeseries(traj: Trajectory, truth: GroundTruth, stem) -> list[str]:
    """Write <stem>.csv plus per-component SVG plots next to it.

    Returns the list of written paths. The CSV interleaves the tracked and
    interpolated-truth pose components at each window time.
    """
    stem = str(stem)
    t = traj.t
    gt_x = np.interp(t, truth.t, truth.poses[:, 0])
    gt_y = np.interp(t, truth.t, truth.poses[:, 1])
    gt_r = np.interp(t, truth.t, np.unwrap(truth.poses[:, 2]))
    csv_path = stem + ".csv"
    with open(csv_path, "w", encoding="ascii") as fh:
        fh.write("t,est_x,gt_x,est_y,gt_y,est_r,gt_r\n")
        for i in range(len(t)):
            row = [
                t[i],
                traj.poses[i, 0],
                gt_x[i],
                traj.poses[i, 1],
                gt_y[i],
                traj.poses[i, 2],
                gt_r[i],
            ]
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    written = [csv_path]
    for suffix, title, est, gt in (
        ("_x.svg", "x position [px]", traj.poses[:, 0], gt_x),
        ("_y.svg", "y position [px]", traj.poses[:, 1], gt_y),
        ("_r.svg", "rotation [rad]", traj.poses[:, 2], gt_r),
    ):
        _svg_plot(stem + suffix, title, t, est, gt)
        written.append(stem + suffix)
    return written

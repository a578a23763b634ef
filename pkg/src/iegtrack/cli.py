"""Command line front end.

Subcommands cover the full pipeline: gen-data (synthesize training tuples from
a pattern image), train (fit the model), simulate (event stream plus ground
truth of a moving pattern), track (pose/velocity trajectory from events),
eval (score a trajectory against truth), and demo (chain everything on the
built-in marker).

Option precedence: built-in defaults, then a --config JSON file, then explicit
flags. The seed additionally falls back to the IEG_SEED environment variable
before the built-in default. Exit codes: 0 success, 2 usage error, 3 file
format or I/O error, 4 numerical divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .core import Pose2, Velocity2, load_pattern, save_pgm
from .errors import FileFormatError, NumericalDivergenceError
from .evaluate import align_and_score, emit_timeseries, report_table, report_to_json
from .ieg import (
    AdamState,
    init_model,
    load_model,
    ranges_from_samples,
    save_model,
    train,
)
from .synth import (
    SynthConfig,
    builtin_marker,
    events_from_csv,
    events_to_csv,
    generate_training_set,
    load_training_set,
    save_training_set,
    simulate_stream,
    truth_from_csv,
    truth_to_csv,
)
from .tracker import TrackerConfig, Trajectory, slide_track

__all__ = ["main", "entry"]


class UsageError(ValueError):
    """Bad flag combinations or values detected after argument parsing."""


BUILTIN_SEED = 0

GEN_DEFAULTS = {
    "n": 200_000,
    "seed": BUILTIN_SEED,
    "workers": 1,
    "edge_threshold": 0.1,
    "delta_bar": 0.001,
    "sigma": 2.0,
    "w": 6.0,
    "t_min": 0.0,
    "t_max": 0.01,
    "v_max": 500.0,
    "omega_max": 5.0,
    "background_ratio": 0.3,
    "velocity_model": "rigid",
}

TRAIN_DEFAULTS = {
    "seed": BUILTIN_SEED,
    "epochs": 20,
    "batch_size": 256,
    "hidden": "128,128,128,128",
    "fourier": 0,
    "lr": 1e-4,
    "beta1": 0.9,
    "beta2": 0.999,
    "adam_eps": 1e-8,
    "loss_log": None,
}

SIM_DEFAULTS = {
    "seed": BUILTIN_SEED,
    "duration": 1.0,
    "vx": 0.0,
    "vy": 0.0,
    "omega": 0.0,
    "segments": None,
    "contrast": 0.05,
    "dt": 1e-3,
    "init": None,
    "sensor": None,
    "edge_threshold": 0.1,
}

TRACK_DEFAULTS = {
    "m": 20_000,
    "k": 500,
    "lr": 1e-4,
    "eps_bar": 1e-6,
    "max_iters": 5000,
    "polarity_mode": "ignore",
    "normalize_loss": False,
    "init_velocity": "0,0,0",
    "quiet": False,
}

EVAL_DEFAULTS = {
    "json": None,
    "plots": None,
    "subsample": 1,
}

# Small-scale end-to-end settings; sized so the whole chain stays around a
# minute while still recovering the simulated motion. The demo runs on the
# compact 64-px marker rather than the full-resolution default.
DEMO = {
    "marker_size": 64,
    "n": 60_000,
    "gen": dict(
        delta_bar=0.01,
        sigma=2.5,
        w=5.0,
        t_range=(0.0, 0.06),
        v_range=(-200.0, 200.0),
        omega_range=(-3.0, 3.0),
        background_ratio=0.3,
        velocity_model="rigid",
    ),
    "hidden": (64, 64),
    "fourier": 4,
    "epochs": 30,
    "batch_size": 256,
    "train_lr": 1.5e-3,
    "duration": 0.2,
    "velocity": (120.0, 80.0, 0.8),
    "contrast": 0.25,
    "dt": 1e-3,
    "init_offset": (2.0, -2.0, 0.02),
    # Tracking needs a rough speed prior: the model's response is gated on
    # motion, so a standing-start estimate sits in a flat region of the loss.
    "init_velocity": (90.0, 60.0, 0.6),
    "m": 3000,
    "k": 1500,
    "track_lr": 3e-4,
    "eps_bar": 1e-6,
    "max_iters": 600,
}


def _merge(ns: argparse.Namespace, defaults: dict) -> dict:
    """defaults < --config JSON < explicit flags, with unknown keys rejected."""
    config = {}
    if getattr(ns, "config", None) is not None:
        try:
            with open(ns.config, "r", encoding="utf-8") as fh:
                config = json.load(fh)
        except OSError:
            raise
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{ns.config}: {exc}") from exc
        if not isinstance(config, dict):
            raise FileFormatError(f"{ns.config}: config must be a JSON object")
        unknown = set(config) - set(defaults)
        if unknown:
            raise UsageError(
                f"unknown config keys: {', '.join(sorted(unknown))}"
            )
    merged = {}
    for key, builtin in defaults.items():
        flag = getattr(ns, key, None)
        if flag is not None:
            merged[key] = flag
        elif key in config:
            merged[key] = config[key]
        else:
            merged[key] = builtin
    if "seed" in defaults and getattr(ns, "seed", None) is None and "seed" not in config:
        env = os.environ.get("IEG_SEED")
        if env is not None:
            try:
                merged["seed"] = int(env)
            except ValueError as exc:
                raise UsageError(f"IEG_SEED must be an integer, got {env!r}") from exc
    return merged


def _parse_triple(text: str, what: str) -> tuple[float, float, float]:
    parts = str(text).split(",")
    if len(parts) != 3:
        raise UsageError(f"{what} must be three comma-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"{what}: {exc}") from exc


def _parse_hidden(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(p) for p in str(text).split(",") if p.strip())
    except ValueError as exc:
        raise UsageError(f"--hidden: {exc}") from exc
    if not dims or any(d <= 0 for d in dims):
        raise UsageError(f"--hidden must be positive integers, got {text!r}")
    return dims


def _parse_sensor(text: str) -> tuple[int, int]:
    parts = str(text).lower().split("x")
    if len(parts) != 2:
        raise UsageError(f"--sensor must look like 256x256, got {text!r}")
    try:
        w, h = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise UsageError(f"--sensor: {exc}") from exc
    if w <= 0 or h <= 0:
        raise UsageError("--sensor dimensions must be positive")
    return w, h


def _parse_segments(text: str) -> list[tuple[float, Velocity2]]:
    segments = []
    for part in str(text).split(";"):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise UsageError(
                f"segment {part!r} must look like DURATION:VX,VY,OMEGA"
            )
        dur_s, vel_s = part.split(":", 1)
        try:
            dur = float(dur_s)
        except ValueError as exc:
            raise UsageError(f"segment duration: {exc}") from exc
        vx, vy, om = _parse_triple(vel_s, "segment velocity")
        segments.append((dur, Velocity2(vx, vy, om)))
    if not segments:
        raise UsageError("--segments given but no segments parsed")
    return segments


def _load_any_pattern(path: str, edge_threshold: float):
    if path == "builtin":
        return builtin_marker()
    return load_pattern(path, edge_threshold=edge_threshold)


def cmd_gen_data(ns: argparse.Namespace) -> int:
    opts = _merge(ns, GEN_DEFAULTS)
    pattern = _load_any_pattern(ns.pattern, opts["edge_threshold"])
    cfg = SynthConfig(
        delta_bar=opts["delta_bar"],
        sigma=opts["sigma"],
        w=opts["w"],
        t_range=(opts["t_min"], opts["t_max"]),
        v_range=(-opts["v_max"], opts["v_max"]),
        omega_range=(-opts["omega_max"], opts["omega_max"]),
        background_ratio=opts["background_ratio"],
        velocity_model=opts["velocity_model"],
    )
    samples = generate_training_set(
        pattern, cfg, int(opts["n"]), int(opts["seed"]), workers=int(opts["workers"])
    )
    save_training_set(samples, ns.out)
    n_pos = sum(1 for s in samples if s.target > 0.0)
    n_neg = sum(1 for s in samples if s.target < 0.0)
    n_zero = len(samples) - n_pos - n_neg
    print(
        f"wrote {len(samples)} samples to {ns.out} "
        f"(positive {n_pos}, negative {n_neg}, zero {n_zero})"
    )
    return 0


def cmd_train(ns: argparse.Namespace) -> int:
    opts = _merge(ns, TRAIN_DEFAULTS)
    samples = load_training_set(ns.data)
    hidden = _parse_hidden(opts["hidden"])
    ranges = ranges_from_samples(samples)
    model = init_model(
        hidden, int(opts["seed"]), ranges, fourier_octaves=int(opts["fourier"])
    )
    adam = AdamState(
        lr=float(opts["lr"]),
        beta1=float(opts["beta1"]),
        beta2=float(opts["beta2"]),
        eps=float(opts["adam_eps"]),
    )
    print(
        f"training on {len(samples)} samples: layers {model.layer_dims}, "
        f"epochs {int(opts['epochs'])}, batch {int(opts['batch_size'])}, "
        f"lr={adam.lr}, beta1={adam.beta1}, beta2={adam.beta2}, seed {int(opts['seed'])}"
    )
    log_rows: list[tuple[int, float]] = []

    def on_epoch(epoch: int, loss: float) -> None:
        log_rows.append((epoch, loss))
        print(f"epoch {epoch}: loss {loss:.6g}", file=sys.stderr)

    model, _ = train(
        model,
        samples,
        epochs=int(opts["epochs"]),
        batch_size=int(opts["batch_size"]),
        adam=adam,
        seed=int(opts["seed"]),
        on_epoch=on_epoch,
    )
    save_model(model, ns.model_out)
    loss_log = opts["loss_log"] or str(ns.model_out) + ".loss.csv"
    with open(loss_log, "w", encoding="ascii") as fh:
        fh.write("epoch,loss\n")
        for epoch, loss in log_rows:
            fh.write(f"{epoch},{repr(loss)}\n")
    print(f"wrote model to {ns.model_out}, loss log to {loss_log}")
    return 0


def cmd_simulate(ns: argparse.Namespace) -> int:
    opts = _merge(ns, SIM_DEFAULTS)
    pattern = _load_any_pattern(ns.pattern, opts["edge_threshold"])
    if opts["segments"] is not None:
        trajectory = _parse_segments(opts["segments"])
    else:
        trajectory = [
            (
                float(opts["duration"]),
                Velocity2(float(opts["vx"]), float(opts["vy"]), float(opts["omega"])),
            )
        ]
    sensor = _parse_sensor(opts["sensor"]) if opts["sensor"] is not None else None
    init = (
        Pose2(*_parse_triple(opts["init"], "--init")) if opts["init"] is not None else None
    )
    stream = simulate_stream(
        pattern,
        trajectory,
        contrast=float(opts["contrast"]),
        dt=float(opts["dt"]),
        seed=int(opts["seed"]),
        init_pose=init,
        sensor_size=sensor,
    )
    events_to_csv(stream, ns.out_events)
    truth_to_csv(stream.ground_truth, ns.out_truth)
    print(
        f"simulated {len(stream.events)} events over {stream.duration} s "
        f"on a {stream.width}x{stream.height} sensor"
    )
    return 0


def cmd_track(ns: argparse.Namespace) -> int:
    opts = _merge(ns, TRACK_DEFAULTS)
    # Validate flags before touching any files so usage errors stay usage errors.
    init_pose = Pose2(*_parse_triple(ns.init, "--init"))
    init_vel = Velocity2(*_parse_triple(opts["init_velocity"], "--init-velocity"))
    cfg = TrackerConfig(
        m=int(opts["m"]),
        k=int(opts["k"]),
        lr=float(opts["lr"]),
        eps_bar=float(opts["eps_bar"]),
        max_iters=int(opts["max_iters"]),
        polarity_mode=opts["polarity_mode"],
        normalize_loss=bool(opts["normalize_loss"]),
    )
    model = load_model(ns.model)
    events = events_from_csv(ns.events)
    print(
        f"tracking {len(events)} events: m={cfg.m} k={cfg.k} lr={cfg.lr} "
        f"eps_bar={cfg.eps_bar}",
        file=sys.stderr,
    )

    def on_window(idx: int, total: int, state) -> None:
        if not opts["quiet"]:
            print(
                f"window {idx + 1}/{total}: iters={state.iterations} "
                f"loss={state.final_loss:.6g}",
                file=sys.stderr,
            )

    traj = slide_track(model, events, init_pose, init_vel, cfg, on_window=on_window)
    traj.to_csv(ns.out)
    print(f"wrote {len(traj)} windows to {ns.out}")
    return 0


def cmd_eval(ns: argparse.Namespace) -> int:
    opts = _merge(ns, EVAL_DEFAULTS)
    traj = Trajectory.from_csv(ns.trajectory)
    truth = truth_from_csv(ns.truth)
    report = align_and_score(
        traj,
        truth,
        config_echo={"trajectory": str(ns.trajectory), "truth": str(ns.truth)},
        subsample=int(opts["subsample"]),
    )
    sys.stdout.write(report_table(report))
    if opts["json"] is not None:
        with open(opts["json"], "w", encoding="ascii") as fh:
            fh.write(report_to_json(report))
        print(f"wrote report to {opts['json']}")
    if opts["plots"] is not None:
        written = emit_timeseries(traj, truth, opts["plots"])
        print(f"wrote {', '.join(written)}")
    return 0


def cmd_demo(ns: argparse.Namespace) -> int:
    opts = _merge(ns, {"seed": BUILTIN_SEED, "workers": 1, "outdir": "demo-out"})
    outdir = ns.outdir if ns.outdir is not None else opts["outdir"]
    os.makedirs(outdir, exist_ok=True)
    seed = int(opts["seed"])
    d = DEMO

    pattern = builtin_marker(d["marker_size"])
    pgm = os.path.join(outdir, "marker.pgm")
    save_pgm(pgm, pattern.intensity)

    print("demo 1/5: synthesizing training data", file=sys.stderr)
    cfg = SynthConfig(**d["gen"])
    samples = generate_training_set(
        pattern, cfg, d["n"], seed, workers=int(opts["workers"])
    )
    data_path = os.path.join(outdir, "train.iegd")
    save_training_set(samples, data_path)

    print("demo 2/5: training the model", file=sys.stderr)
    model = init_model(
        d["hidden"], seed, ranges_from_samples(samples), fourier_octaves=d["fourier"]
    )
    model, history = train(
        model,
        samples,
        epochs=d["epochs"],
        batch_size=d["batch_size"],
        adam=AdamState(lr=d["train_lr"]),
        seed=seed,
    )
    model_path = os.path.join(outdir, "model.iegm")
    save_model(model, model_path)

    print("demo 3/5: simulating an event stream", file=sys.stderr)
    vx, vy, om = d["velocity"]
    stream = simulate_stream(
        pattern,
        [(d["duration"], Velocity2(vx, vy, om))],
        contrast=d["contrast"],
        dt=d["dt"],
        seed=seed,
    )
    events_path = os.path.join(outdir, "events.csv")
    truth_path = os.path.join(outdir, "truth.csv")
    events_to_csv(stream, events_path)
    truth_to_csv(stream.ground_truth, truth_path)

    print("demo 4/5: tracking", file=sys.stderr)
    tcfg = TrackerConfig(
        m=d["m"],
        k=d["k"],
        lr=d["track_lr"],
        eps_bar=d["eps_bar"],
        max_iters=d["max_iters"],
        normalize_loss=True,
    )
    true0 = stream.ground_truth.poses[0]
    off = d["init_offset"]
    init_pose = Pose2(true0[0] + off[0], true0[1] + off[1], true0[2] + off[2])
    init_vel = Velocity2(*d["init_velocity"])
    traj = slide_track(model, stream.events, init_pose, init_vel, tcfg)
    traj_path = os.path.join(outdir, "trajectory.csv")
    traj.to_csv(traj_path)

    print("demo 5/5: scoring", file=sys.stderr)
    report = align_and_score(
        traj, stream.ground_truth, config_echo={"demo_seed": seed}
    )
    report_path = os.path.join(outdir, "report.json")
    with open(report_path, "w", encoding="ascii") as fh:
        fh.write(report_to_json(report))
    emit_timeseries(traj, stream.ground_truth, os.path.join(outdir, "timeseries"))
    sys.stdout.write(report_table(report))
    print(
        f"demo artifacts in {outdir}: marker.pgm, train.iegd, model.iegm, "
        f"events.csv, truth.csv, trajectory.csv, report.json, timeseries plots"
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iegtrack",
        description="Event-stream pattern tracking through a learned "
        "intensity-change model.",
    )
    sub = parser.add_subparsers(dest="command")

    def add_common(p: argparse.ArgumentParser, defaults: dict) -> None:
        p.add_argument("--config", help="JSON file with option defaults")
        if "seed" in defaults:
            p.add_argument(
                "--seed",
                type=int,
                help=f"RNG seed (default {defaults['seed']}, or IEG_SEED)",
            )

    p = sub.add_parser("gen-data", help="synthesize training tuples from a pattern")
    p.add_argument("pattern", help="pattern image path, or 'builtin'")
    p.add_argument("out", help="output training-set file")
    p.add_argument("--n", type=int, help=f"sample count (default {GEN_DEFAULTS['n']})")
    p.add_argument("--workers", type=int, help="parallel workers (default 1)")
    p.add_argument("--edge-threshold", dest="edge_threshold", type=float,
                   help=f"min gradient magnitude for edge pixels (default {GEN_DEFAULTS['edge_threshold']})")
    p.add_argument("--delta-bar", dest="delta_bar", type=float,
                   help=f"firing threshold (default {GEN_DEFAULTS['delta_bar']})")
    p.add_argument("--sigma", type=float, help=f"blur sigma, px (default {GEN_DEFAULTS['sigma']})")
    p.add_argument("--w", type=float, help=f"blur radius, px (default {GEN_DEFAULTS['w']})")
    p.add_argument("--t-min", dest="t_min", type=float,
                   help=f"min elapsed time (default {GEN_DEFAULTS['t_min']})")
    p.add_argument("--t-max", dest="t_max", type=float,
                   help=f"max elapsed time (default {GEN_DEFAULTS['t_max']})")
    p.add_argument("--v-max", dest="v_max", type=float,
                   help=f"velocity range half-width, px/s (default {GEN_DEFAULTS['v_max']})")
    p.add_argument("--omega-max", dest="omega_max", type=float,
                   help=f"angular velocity half-width, rad/s (default {GEN_DEFAULTS['omega_max']})")
    p.add_argument("--background-ratio", dest="background_ratio", type=float,
                   help=f"fraction of zero-target samples (default {GEN_DEFAULTS['background_ratio']})")
    p.add_argument("--velocity-model", dest="velocity_model",
                   choices=["rigid", "literal"],
                   help=f"velocity term (default {GEN_DEFAULTS['velocity_model']})")
    add_common(p, GEN_DEFAULTS)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="fit the model to a training set")
    p.add_argument("data", help="training-set file")
    p.add_argument("model_out", help="output model file")
    p.add_argument("--epochs", type=int, help=f"default {TRAIN_DEFAULTS['epochs']}")
    p.add_argument("--batch-size", dest="batch_size", type=int,
                   help=f"default {TRAIN_DEFAULTS['batch_size']}")
    p.add_argument("--hidden", help=f"hidden sizes (default {TRAIN_DEFAULTS['hidden']})")
    p.add_argument("--fourier", type=int,
                   help=f"sin/cos octaves on x, y (default {TRAIN_DEFAULTS['fourier']})")
    p.add_argument("--lr", type=float, help=f"Adam rate (default {TRAIN_DEFAULTS['lr']})")
    p.add_argument("--beta1", type=float, help=f"default {TRAIN_DEFAULTS['beta1']}")
    p.add_argument("--beta2", type=float, help=f"default {TRAIN_DEFAULTS['beta2']}")
    p.add_argument("--adam-eps", dest="adam_eps", type=float,
                   help=f"default {TRAIN_DEFAULTS['adam_eps']}")
    p.add_argument("--loss-log", dest="loss_log",
                   help="loss history CSV path (default <model_out>.loss.csv)")
    add_common(p, TRAIN_DEFAULTS)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("simulate", help="simulate an event stream of a moving pattern")
    p.add_argument("pattern", help="pattern image path, or 'builtin'")
    p.add_argument("out_events", help="output event CSV")
    p.add_argument("out_truth", help="output ground-truth CSV")
    p.add_argument("--duration", type=float, help=f"seconds (default {SIM_DEFAULTS['duration']})")
    p.add_argument("--vx", type=float, help="sensor-frame x velocity, px/s (default 0)")
    p.add_argument("--vy", type=float, help="sensor-frame y velocity, px/s (default 0)")
    p.add_argument("--omega", type=float, help="spin about the pattern center, rad/s (default 0)")
    p.add_argument("--segments", help="piecewise spec DUR:VX,VY,OMEGA;... overriding the above")
    p.add_argument("--contrast", type=float,
                   help=f"event firing threshold (default {SIM_DEFAULTS['contrast']})")
    p.add_argument("--dt", type=float, help=f"integration step, s (default {SIM_DEFAULTS['dt']})")
    p.add_argument("--init", help="initial pose TX,TY,R (default sensor center, 0)")
    p.add_argument("--sensor", help="sensor size WxH (default twice the pattern)")
    p.add_argument("--edge-threshold", dest="edge_threshold", type=float,
                   help=f"default {SIM_DEFAULTS['edge_threshold']}")
    add_common(p, SIM_DEFAULTS)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("track", help="track a pattern through an event stream")
    p.add_argument("model", help="trained model file")
    p.add_argument("events", help="event CSV")
    p.add_argument("--out", required=True, help="output trajectory CSV")
    p.add_argument("--init", required=True, help="initial pose TX,TY,R")
    p.add_argument("--init-velocity", dest="init_velocity",
                   help="initial pattern-frame velocity VX,VY,OMEGA (default 0,0,0)")
    p.add_argument("--m", type=int, help=f"events per window (default {TRACK_DEFAULTS['m']})")
    p.add_argument("--k", type=int, help=f"window stride (default {TRACK_DEFAULTS['k']})")
    p.add_argument("--lr", type=float, help=f"descent rate (default {TRACK_DEFAULTS['lr']})")
    p.add_argument("--eps-bar", dest="eps_bar", type=float,
                   help=f"stop threshold (default {TRACK_DEFAULTS['eps_bar']})")
    p.add_argument("--max-iters", dest="max_iters", type=int,
                   help=f"default {TRACK_DEFAULTS['max_iters']}")
    p.add_argument("--polarity-mode", dest="polarity_mode", choices=["ignore", "match"],
                   help=f"default {TRACK_DEFAULTS['polarity_mode']}")
    p.add_argument("--normalize-loss", dest="normalize_loss",
                   action=argparse.BooleanOptionalAction, default=None,
                   help="divide window loss by window size (default off)")
    p.add_argument("--quiet", action=argparse.BooleanOptionalAction, default=None,
                   help="suppress per-window progress")
    add_common(p, TRACK_DEFAULTS)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="score a trajectory against ground truth")
    p.add_argument("trajectory", help="trajectory CSV")
    p.add_argument("truth", help="ground-truth CSV")
    p.add_argument("--json", help="also write the report as JSON here")
    p.add_argument("--plots", help="also write timeseries CSV/SVG files at this stem")
    p.add_argument("--subsample", type=int, help="score every j-th window (default 1)")
    add_common(p, EVAL_DEFAULTS)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("demo", help="run the whole pipeline on the built-in marker")
    p.add_argument("--outdir", help="artifact directory (default demo-out)")
    p.add_argument("--workers", type=int, help="parallel workers (default 1)")
    add_common(p, {"seed": BUILTIN_SEED})
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    if getattr(ns, "func", None) is None:
        parser.print_help()
        return 2
    try:
        return ns.func(ns)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalDivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

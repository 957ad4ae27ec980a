"""Command line front end: reconstruct, compare, synth, evaluate.

Failures print one line ``error: <category>: <message>`` on stderr and
exit with the category's code; usage errors exit with 2.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence as SequenceABC
from pathlib import Path

import numpy as np

from . import io as pio
from .errors import IoError, PisteError
from .masking import SnowFilterConfig
from .reconstruction import (
    EngineConfig,
    RunRecord,
    annotate_speed,
    compare_runs,
    extract_features,
    smooth,
    start,
    step,
    trajectory_at,
)
from .render import OverlayStyle, render_overlay
from .synthetic import GroundTruth, SyntheticScene, format_scene, load_scene, measure_error
from .tracking import BBox, format_track_csv, load_track_file

log = logging.getLogger("piste")

INVALID_ARGUMENT_EXIT = 3


def _bbox_arg(text: str) -> BBox:
    parts = text.split(",")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        vals = []
    if len(vals) != 4:
        raise argparse.ArgumentTypeError(f"expected X,Y,W,H, got {text!r}")
    return BBox(*vals)


def _on_off(text: str) -> bool:
    if text.lower() not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text.lower() == "on"


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--frames", required=True, metavar="DIR", help="directory of PNG frames")
    src = p.add_argument_group("athlete boxes (one required)")
    src.add_argument("--init-bbox", type=_bbox_arg, metavar="X,Y,W,H",
                     help="initial box; the built-in tracker follows it")
    src.add_argument("--track-file", metavar="CSV", help="per-frame boxes (frame,x,y,w,h)")
    p.add_argument("--mask", metavar="PNG", help="static overlay mask, nonzero = ignore")
    p.add_argument("--snow-filter", type=_on_off, default=True, metavar="on|off",
                   help="drop keypoints on whitish texture (default on)")
    p.add_argument("--seed", type=int, default=0, help="RANSAC seed (default 0)")
    p.add_argument("--out", metavar="DIR", help="write overlay frames here")
    p.add_argument("--export", metavar="JSON_PATH", help="write the trajectory export")
    p.add_argument("--speed", metavar="CSV", help="speed labels (frame,speed_mps)")
    p.add_argument("--samples", type=int, default=8, help="spline samples per segment")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="piste",
        description="Reconstruct an athlete's ground trajectory from moving-camera video frames.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-frame progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reconstruct", help="track one athlete and chain homographies")
    _add_run_flags(p)

    p = sub.add_parser("compare", help="overlay another athlete's run on the reference video")
    _add_run_flags(p)
    p.add_argument("--other-frames", required=True, metavar="DIR")
    p.add_argument("--other-export", required=True, metavar="JSON_PATH")
    p.add_argument("--pairing", required=True, metavar="CSV", help="ref_frame,other_frame rows")

    p = sub.add_parser("synth", help="render a synthetic scene with ground truth")
    p.add_argument("--scene", required=True, metavar="CONFIG", help="key = value scene file")
    p.add_argument("--out", required=True, metavar="DIR")

    p = sub.add_parser("evaluate", help="compare an export with synthetic ground truth")
    p.add_argument("--export", required=True, metavar="JSON_PATH")
    p.add_argument("--truth", required=True, metavar="JSON_PATH")
    return parser


def _engine_config(args, keep_history: bool) -> EngineConfig:
    mask = pio.load_mask(args.mask) if args.mask else None
    return EngineConfig(snow=SnowFilterConfig(enabled=args.snow_filter), static_mask=mask,
                        seed=args.seed, keep_history=keep_history)


def _process(args, keep_history: bool):
    seq = pio.load_sequence(args.frames)
    cfg = _engine_config(args, keep_history)
    track = load_track_file(args.track_file) if args.track_file else None
    speeds = pio.load_speed_csv(args.speed) if args.speed else None
    out = Path(args.out) if args.out and args.command == "reconstruct" else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    style = OverlayStyle()

    frame = seq[0]
    state = start(frame, args.init_bbox, cfg, track)
    for t in range(len(seq)):
        if t > 0:
            frame = seq[t]
            step(state, frame)
            r = state.diagnostics[-1]
            log.info("frame %d: matches=%d inliers=%d%s", t, r.matches, r.inliers,
                     " bridged" if r.bridged else "")
        if out is not None:
            traj = state.trajectory
            notes = annotate_speed(traj, speeds) if speeds else None
            img = render_overlay(frame, smooth(traj, args.samples), style, notes)
            pio.write_png(img, out / seq.paths[t].name)
    if args.export:
        pio.export_trajectory(state.trajectory, state.diagnostics, args.export)
    return seq, state, speeds


def _summary(state) -> str:
    d = state.diagnostics
    bridged = sum(r.bridged for r in d)
    inl = np.mean([r.inliers for r in d[1:]]) if len(d) > 1 else 0.0
    return f"frames={len(d)} bridged={bridged} mean_inliers={inl:.1f}"


def cmd_reconstruct(args) -> int:
    _, state, _ = _process(args, keep_history=False)
    print(_summary(state))
    return 0


class _LazyFeatures(SequenceABC):
    """Features of the other video, computed on first use with its exported boxes."""

    def __init__(self, seq, boxes, cfg):
        self.seq, self.boxes, self.cfg = seq, boxes, cfg
        self._cache: dict[int, object] = {}

    def __len__(self) -> int:
        return min(len(self.seq), len(self.boxes))

    def __getitem__(self, s):
        if s not in self._cache:
            self._cache[s] = extract_features(self.seq[s], self.boxes[s], self.cfg)
        return self._cache[s]


class _LazyTrajectories(dict):
    def __init__(self, final, chain):
        super().__init__()
        self.final, self.chain = final, chain

    def __contains__(self, s) -> bool:
        return isinstance(s, int) and 0 <= s <= self.final.frame_index

    def __missing__(self, s):
        self[s] = trajectory_at(self.final, self.chain, s)
        return self[s]


def cmd_compare(args) -> int:
    seq, state, speeds = _process(args, keep_history=True)
    other = pio.import_trajectory(args.other_export)
    other_seq = pio.load_sequence(args.other_frames)
    pairing = pio.load_pairing_csv(args.pairing)
    cfg = state.config
    record = RunRecord(_LazyFeatures(other_seq, other.boxes, cfg),
                       _LazyTrajectories(other.trajectory, other.homography_chain()))
    result = compare_runs(RunRecord.from_state(state), record, pairing, cfg)
    for t, why in sorted(result.omitted.items()):
        log.info("frame %d: no overlay (%s)", t, why)

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        style = OverlayStyle()
        for t in range(len(seq)):
            traj = state.trajectory_history[t]
            notes = annotate_speed(traj, speeds) if speeds else None
            img = render_overlay(seq[t], smooth(traj, args.samples), style, notes)
            if t in result.overlays:
                img = render_overlay(img, smooth(result.overlays[t], args.samples), style,
                                     color=style.comparison_color)
            pio.write_png(img, out / seq.paths[t].name)
    print(f"{_summary(state)} overlays={len(result.overlays)} omitted={len(result.omitted)}")
    return 0


def cmd_synth(args) -> int:
    cfg = load_scene(args.scene)
    scene = SyntheticScene(cfg)
    out = Path(args.out)
    frames_dir = out / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    digits = max(3, len(str(cfg.frames - 1)))
    for t in range(cfg.frames):
        pio.write_png(scene.render(t), frames_dir / f"{t:0{digits}d}.png")
    (out / "truth.json").write_text(scene.truth.to_json(), encoding="utf-8")
    (out / "track.csv").write_text(format_track_csv(dict(enumerate(scene.truth.boxes))),
                                   encoding="utf-8")
    (out / "scene.cfg").write_text(format_scene(cfg), encoding="utf-8")
    b = scene.truth.boxes[0]
    print(f"frames={cfg.frames} init_bbox={b.x!r},{b.y!r},{b.w!r},{b.h!r}")
    return 0


def cmd_evaluate(args) -> int:
    run = pio.import_trajectory(args.export)
    try:
        text = Path(args.truth).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"{args.truth}: {exc.strerror or exc}") from None
    report = measure_error(run.trajectory, GroundTruth.from_json(text))
    print(report.summary())
    return 0


COMMANDS = {
    "reconstruct": cmd_reconstruct,
    "compare": cmd_compare,
    "synth": cmd_synth,
    "evaluate": cmd_evaluate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("reconstruct", "compare"):
        if args.init_bbox is None and args.track_file is None:
            parser.error(f"{args.command}: one of --init-bbox or --track-file is required")
        if args.samples < 1:
            parser.error("--samples must be >= 1")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except PisteError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: invalid_argument: {exc}", file=sys.stderr)
        return INVALID_ARGUMENT_EXIT


if __name__ == "__main__":
    sys.exit(main())

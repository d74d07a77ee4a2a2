"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 numeric failure.
Failures print one JSON line to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .beat import BeatGrid, estimate_beat_distance, nearest_beat_distance
from .diffusion import (
    Constraint,
    ConstantDenoiser,
    SamplerConfig,
    cosine_schedule,
    identity_denoiser,
    sample,
)
from .errors import NumericError
from .harness import SYNTH_KINDS, emit_plot_data, periodic_beat_frames, sample_keyframes, synth_motion
from .losses import LossWeights, total_loss
from .masks import attention_mask, dilate_mask
from .metrics import MetricConfig, evaluate
from .motion import POSE_DIM, default_skeleton

EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERIC = 1, 2, 3

CONFIG_SECTIONS = ("loss", "metrics", "sampler", "schedule", "beats")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def load_config(path):
    """Read the merged JSON config; unknown sections are rejected."""
    if path is None:
        return {}
    cfg = io.read_json(path)
    unknown = set(cfg) - set(CONFIG_SECTIONS)
    if unknown:
        raise ValueError(f"unknown config section(s): {sorted(unknown)}")
    return cfg


def _skeleton(args):
    return io.load_skeleton(args.skeleton) if args.skeleton else default_skeleton()


def _beat_params(cfg):
    b = cfg.get("beats", {})
    return b.get("min_prominence", 0.0), b.get("smooth_radius", 1)


def cmd_beat_distance(args, cfg):
    if (args.beats is None) == (args.motion is None):
        raise UsageError("give exactly one of --beats or --motion")
    if args.beats:
        grid, _ = io.load_beats(args.beats)
        out = {"length": grid.length, "source": "grid",
               "distances": nearest_beat_distance(grid).tolist(), "no_beats": False,
               "beat_frames": grid.beat_frames.tolist()}
    else:
        seq = io.load_motion(args.motion)
        est = estimate_beat_distance(seq, _skeleton(args), *_beat_params(cfg))
        out = {"length": len(seq), "source": "motion", "distances": est.distances.tolist(),
               "no_beats": est.no_beats, "beat_frames": est.motion_beats.beat_frames.tolist()}
    io.write_json(out, args.out)


def cmd_dilate_mask(args, cfg):
    mask = io.load_mask(args.mask)
    grid, _ = io.load_beats(args.beats)
    md = dilate_mask(mask, grid, args.step)
    io.write_json({"length": int(md.size), "values": md.tolist()}, args.out)


def cmd_attention_mask(args, cfg):
    mask = io.load_mask(args.mask)
    grid, _ = io.load_beats(args.beats)
    attn = attention_mask(mask, dilate_mask(mask, grid, args.step))
    io.write_json({"length": int(mask.size), "values": attn.tolist()}, args.out)


def cmd_losses(args, cfg):
    w = LossWeights(**cfg.get("loss", {}))
    skel = _skeleton(args)
    target, pred = io.load_motion(args.target), io.load_motion(args.pred)
    grid, _ = io.load_beats(args.beats)
    b = nearest_beat_distance(grid)
    if args.pred_distances:
        b_hat = np.asarray(io.read_json(args.pred_distances)["distances"], dtype=np.float64)
    else:
        b_hat = estimate_beat_distance(pred, skel, *_beat_params(cfg)).distances
    report = total_loss(target, pred, skel, b, b_hat, grid, w)
    io.write_json(report.to_dict(), args.out)


def cmd_metrics(args, cfg):
    mcfg = dict(cfg.get("metrics", {}))
    for key in ("bas_sigma", "bap_tolerance", "bas_direction", "bap_mode"):
        val = getattr(args, key)
        if val is not None:
            mcfg[key] = val
    mcfg = MetricConfig(**mcfg)
    skel = _skeleton(args)
    gen = io.load_motion(args.motion)
    music = io.load_beats(args.music_beats)[0] if args.music_beats else None
    designated = io.load_beats(args.designated_beats)[0] if args.designated_beats else None
    reference = io.load_motion(args.reference) if args.reference else None
    mask = io.load_mask(args.mask) if args.mask else None
    if (reference is None) != (mask is None):
        raise UsageError("--reference and --mask go together")
    others = [io.load_motion(p) for p in args.others or ()]
    report = evaluate(gen, skel, mcfg, music, designated, reference, mask, others)
    io.write_json(report.to_dict(), args.out)


def _denoiser(args):
    if args.denoiser == "identity":
        return identity_denoiser
    if args.denoiser == "zero":
        return ConstantDenoiser(np.zeros((args.length, POSE_DIM)))
    if args.target is None:
        raise UsageError("--denoiser ground-truth needs --target")
    return ConstantDenoiser(io.load_motion(args.target).frames)


def cmd_sample(args, cfg):
    scfg = dict(cfg.get("sampler", {}))
    if args.seed is not None:
        scfg["seed"] = args.seed
    if args.guidance_scale is not None:
        scfg["guidance_scale"] = args.guidance_scale
    if args.schedule:
        sched = io.load_schedule(args.schedule)
    elif args.steps is not None:
        sched = cosine_schedule(args.steps)
    else:
        sched = io.schedule_from_dict({"T": 1000, **cfg.get("schedule", {})})
    if (args.constraint_motion is None) != (args.constraint_mask is None):
        raise UsageError("--constraint-motion and --constraint-mask go together")
    if args.constraint_motion:
        ref = io.load_motion(args.constraint_motion)
        scfg["constraint"] = Constraint(ref.frames, io.load_mask(args.constraint_mask))
    # built-in denoisers ignore the condition; a non-null one turns on guidance
    scfg.setdefault("condition", "default")
    seq = sample(_denoiser(args), SamplerConfig(**scfg), sched, args.length, POSE_DIM, args.fps)
    io.save_motion(seq, args.out)


def cmd_plot_data(args, cfg):
    seq = io.load_motion(args.motion)
    grid = io.load_beats(args.beats)[0] if args.beats else None
    data = emit_plot_data(seq, _skeleton(args), grid, *_beat_params(cfg))
    if args.out_json:
        io.write_json(data.to_dict(), args.out_json)
    if args.out_csv:
        Path(args.out_csv).write_text(data.to_csv())
    if not (args.out_json or args.out_csv):
        raise UsageError("give --out-json and/or --out-csv")


def cmd_sample_keyframes(args, cfg):
    io.save_mask(sample_keyframes(args.length, args.ratio, args.seed), args.out)


def cmd_synth(args, cfg):
    seq = synth_motion(args.kind, args.length, args.fps, args.seed, args.speed, args.period)
    io.save_motion(seq, args.out)
    if args.beats_out:
        if args.kind != "periodic":
            raise UsageError("--beats-out only applies to --kind periodic")
        grid = BeatGrid(args.length, periodic_beat_frames(args.length, args.period))
        io.save_beats(grid, args.fps, args.beats_out)


def build_parser():
    p = _Parser(prog="beatsync", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="merged JSON config")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("beat-distance", help="nearest-beat distance vector")
    s.add_argument("--beats")
    s.add_argument("--motion")
    s.add_argument("--skeleton")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_beat_distance)

    for name, func, help_ in (("dilate-mask", cmd_dilate_mask, "beat-aware dilated mask"),
                              ("attention-mask", cmd_attention_mask, "L x L attention mask")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--mask", required=True)
        s.add_argument("--beats", required=True)
        s.add_argument("--step", type=int, default=4, help="base dilation step s")
        s.add_argument("--out", required=True)
        s.set_defaults(func=func)

    s = sub.add_parser("losses", help="loss report for a target/prediction pair")
    s.add_argument("--target", required=True)
    s.add_argument("--pred", required=True)
    s.add_argument("--beats", required=True, help="designated beat grid")
    s.add_argument("--pred-distances", help="beat-distance output for the prediction")
    s.add_argument("--skeleton")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_losses)

    s = sub.add_parser("metrics", help="evaluation metrics for a generated motion")
    s.add_argument("--motion", required=True)
    s.add_argument("--music-beats")
    s.add_argument("--designated-beats")
    s.add_argument("--reference")
    s.add_argument("--mask")
    s.add_argument("--others", nargs="*")
    s.add_argument("--skeleton")
    s.add_argument("--bas-sigma", type=float)
    s.add_argument("--bap-tolerance", type=int)
    s.add_argument("--bas-direction", choices=["motion-to-music", "music-to-motion"])
    s.add_argument("--bap-mode", choices=["precision", "recall"])
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("sample", help="reverse diffusion with a built-in denoiser")
    s.add_argument("--length", type=int, required=True)
    s.add_argument("--fps", type=float, default=30.0)
    s.add_argument("--steps", type=int)
    s.add_argument("--schedule")
    s.add_argument("--seed", type=int)
    s.add_argument("--guidance-scale", type=float)
    s.add_argument("--denoiser", choices=["identity", "zero", "ground-truth"], default="identity")
    s.add_argument("--target")
    s.add_argument("--constraint-motion")
    s.add_argument("--constraint-mask")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("plot-data", help="mean joint speed curve with beat markers")
    s.add_argument("--motion", required=True)
    s.add_argument("--beats")
    s.add_argument("--skeleton")
    s.add_argument("--out-json")
    s.add_argument("--out-csv")
    s.set_defaults(func=cmd_plot_data)

    s = sub.add_parser("sample-keyframes", help="random keyframe mask")
    s.add_argument("--length", type=int, required=True)
    s.add_argument("--ratio", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample_keyframes)

    s = sub.add_parser("synth", help="synthetic test motion")
    s.add_argument("--kind", choices=SYNTH_KINDS, required=True)
    s.add_argument("--length", type=int, required=True)
    s.add_argument("--fps", type=float, default=30.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--speed", type=float, default=1.0)
    s.add_argument("--period", type=int, default=15)
    s.add_argument("--out", required=True)
    s.add_argument("--beats-out", help="write the construction's beat grid (periodic)")
    s.set_defaults(func=cmd_synth)
    return p


def _fail(code, exc):
    line = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(line), file=sys.stderr)
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args.config)
        args.func(args, cfg)
    except UsageError as exc:
        return _fail(EXIT_USAGE, exc)
    except NumericError as exc:
        return _fail(EXIT_NUMERIC, exc)
    except (ValueError, KeyError, TypeError, OSError) as exc:
        return _fail(EXIT_VALIDATION, exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""``navspace`` command line: geometry, sedf, episode, sweep, selftest."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .delaunay import DegenerateGeometryError
from .distance_field import SedfConfig, heatmap_rgb, sedf_from_mask
from .io import PnmFormatError, format_matrix, write_ppm
from .mask_geometry import InsufficientSupportError, SegMask, reconstruct, segmentation_metrics
from .sim import (build_env, records_to_csv, run_episode, summarize, summary_to_csv, sweep_alpha,
                  trial_seed)

log = logging.getLogger("navspace")

FIELD_PANEL_ALPHAS = (0.05, 0.25, 0.55, 1.00)


class CliError(Exception):
    pass


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("seed must be >= 0")
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from None


def _prefix(args, default: str) -> Path:
    return Path(args.out) if args.out else Path(default)


def _with_suffix(prefix: Path, tail: str) -> Path:
    return prefix.with_name(prefix.name + tail)


def cmd_geometry(args) -> int:
    cfg = _config(args)
    k = args.k if args.k is not None else cfg.k_vertices
    try:
        mask = SegMask.read_pgm(args.mask)
    except PnmFormatError as exc:
        raise CliError(f"{args.mask}: {exc}") from None
    polyline, tris, kept, recon = reconstruct(mask, k)
    prefix = _prefix(args, Path(args.mask).stem)
    _write_text(_with_suffix(prefix, ".polyline.txt"), format_matrix(polyline.vertices, "%.12g"))
    tri_text = ("# points: u v\n" + format_matrix(tris.points, "%.12g")
                + "# triangles: i j k kept\n"
                + format_matrix(np.column_stack([tris.triangles, _kept_flags(tris, kept)]), "%d"))
    _write_text(_with_suffix(prefix, ".triangles.txt"), tri_text)
    recon_path = _with_suffix(prefix, ".recon.pgm")
    recon_path.parent.mkdir(parents=True, exist_ok=True)
    recon.write_pgm(recon_path)
    m = segmentation_metrics(recon, mask)
    print("metric,value")
    for name, val in zip(("accuracy", "precision", "recall", "f_score", "iou"), m.as_tuple()):
        print(f"{name},{'undefined' if val is None else f'{val:.6f}'}")
    return 0


def _kept_flags(tris, kept) -> np.ndarray:
    chosen = {tuple(t) for t in kept.triangles.tolist()}
    return np.array([tuple(t) in chosen for t in tris.triangles.tolist()], dtype=np.int64)


def _sedf_outputs(mask: SegMask, alpha: float, v_thres: float, prefix: Path):
    _, _, sedf, alpha_dmax = sedf_from_mask(mask, SedfConfig(alpha, v_thres))
    write_ppm(_with_suffix(prefix, ".ppm"), heatmap_rgb(sedf))
    _write_text(_with_suffix(prefix, ".field.txt"), format_matrix(sedf.values))
    return sedf, alpha_dmax


def cmd_sedf(args) -> int:
    cfg = _config(args)
    try:
        mask = SegMask.read_pgm(args.mask)
    except PnmFormatError as exc:
        raise CliError(f"{args.mask}: {exc}") from None
    v_thres = args.v_thres if args.v_thres is not None else (
        0.5 * mask.height if cfg.v_thres < 0 else cfg.v_thres)
    prefix = _prefix(args, Path(args.mask).stem + ".sedf")
    prefix.parent.mkdir(parents=True, exist_ok=True)
    if args.panels:
        from .plotting import plot_field_panels

        fields = []
        print("alpha,alpha_dmax,ppm")
        for a in FIELD_PANEL_ALPHAS:
            p = _with_suffix(prefix, f".alpha{a:.2f}")
            sedf, adm = _sedf_outputs(mask, a, v_thres, p)
            fields.append(sedf.values)
            print(f"{a:.2f},{adm:.6g},{_with_suffix(p, '.ppm')}")
        plot_field_panels(fields, [f"alpha = {a:.2f}" for a in FIELD_PANEL_ALPHAS],
                          _with_suffix(prefix, ".panels.png"))
        return 0
    alpha = args.alpha if args.alpha is not None else cfg.alpha
    if not 0 <= alpha <= 1:
        raise CliError("alpha must lie in [0, 1]")
    _, adm = _sedf_outputs(mask, alpha, v_thres, prefix)
    print("alpha,alpha_dmax,ppm")
    print(f"{alpha:.6g},{adm:.6g},{_with_suffix(prefix, '.ppm')}")
    return 0


def cmd_episode(args) -> int:
    cfg = _config(args)
    env = args.env if args.env is not None else cfg.env
    seed = trial_seed(cfg.seed, env, args.trial)
    world = build_env(env, seed)
    result = run_episode(world, cfg.camera(), replace(cfg.episode(), seed=seed))
    prefix = _prefix(args, f"episode_env{env}_trial{args.trial}")
    traj = np.array([p.as_array() for p in result.trajectory])
    _write_text(_with_suffix(prefix, ".trajectory.txt"), format_matrix(traj, "%.12g"))
    from .plotting import plot_episode

    plot_episode(world, result, _with_suffix(prefix, ".png"))
    print("env,alpha,trial,outcome,steps,seed")
    print(f"{env},{cfg.alpha:g},{args.trial},{result.outcome},{result.steps},{seed}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    out = Path(args.out) if args.out else Path("sweep.csv")
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.touch()
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}") from None

    def progress(rec):
        log.info("env %d alpha %.2f trial %d: %s (%d steps)", rec.env, rec.alpha, rec.trial,
                 rec.outcome, rec.steps)

    records = sweep_alpha(cfg.envs, cfg.alphas, cfg.trials, cfg.episode(), cfg.camera(), progress)
    summary = summarize(records)
    _write_text(out, records_to_csv(records))
    summary_text = summary_to_csv(summary)
    _write_text(out.with_name(out.stem + ".summary.csv"), summary_text)
    if not args.no_plots:
        from .plotting import plot_action_steps, plot_success_rate

        plot_success_rate(summary, out.with_name(out.stem + ".success_rate.png"))
        plot_action_steps(summary, out.with_name(out.stem + ".action_steps.png"))
    sys.stdout.write(summary_text)
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    seed = args.seed if args.seed is not None else 0
    rows = run_selftest(seed)
    print("check,result,detail")
    for name, ok, detail in rows:
        print(f"{name},{'PASS' if ok else 'FAIL'},{detail}")
    return 0 if all(ok for _, ok, _ in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--seed", type=int, help="override the configured base seed")
    common.add_argument("--out", help="output path or prefix")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = argparse.ArgumentParser(prog="navspace", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("geometry", parents=[common], help="mask -> polyline -> triangles -> mask round trip")
    g.add_argument("mask", help="binary PGM mask (nonzero = navigable)")
    g.add_argument("-k", type=int, help="polyline vertex count (default from config, 16)")
    g.set_defaults(func=cmd_geometry)

    s = sub.add_parser("sedf", parents=[common], help="scaled distance field heatmap and raw values")
    s.add_argument("mask", help="binary PGM mask")
    s.add_argument("--alpha", type=float)
    s.add_argument("--v-thres", type=float, dest="v_thres")
    s.add_argument("--panels", action="store_true",
                   help=f"render the alpha family {FIELD_PANEL_ALPHAS} plus a PNG panel")
    s.set_defaults(func=cmd_sedf)

    e = sub.add_parser("episode", parents=[common], help="run one navigation episode")
    e.add_argument("--env", type=int, choices=(1, 2, 3))
    e.add_argument("--trial", type=int, default=0)
    e.set_defaults(func=cmd_episode)

    w = sub.add_parser("sweep", parents=[common], help="alpha sweep over environments, CSV plus figures")
    w.add_argument("--no-plots", action="store_true")
    w.set_defaults(func=cmd_sweep)

    t = sub.add_parser("selftest", parents=[common], help="numeric checks of the loss kernels")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CliError, ConfigError, PnmFormatError, InsufficientSupportError,
            DegenerateGeometryError, ValueError, OSError) as exc:
        print(f"navspace {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

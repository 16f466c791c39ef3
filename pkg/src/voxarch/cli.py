"""Command line driver ``arch``: one subcommand per pipeline stage.

Exit codes: 0 success, 1 operational error (missing files, bad data,
training blow-ups), 2 usage error (bad flags or values).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import SCENE_EXTENT
from .grids import VoxelGrid, clean_up, read_vxg1, write_vxg1

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2

VQGAN_CKPT = "vqgan.pt"
PRIOR_CKPT = "prior.pt"


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _nonneg_int(raw: str) -> int:
    value = int(raw)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {value}")
    return value


def _settings(args) -> dict:
    values = cfgmod.preset("full")
    if args.config:
        values.update(cfgmod.load_config(args.config))
    return values


def _say(args, message: str) -> None:
    if args.verbose:
        print(message)


def load_plan_image(path, resolution: int) -> np.ndarray:
    """Read a PBM or PNG plan; dark pixels (< 50% gray) mark occupied cells.

    Image rows map to decreasing y so the drawing reads as a top view.
    """
    from PIL import Image

    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"))
    if arr.shape != (resolution, resolution):
        raise ValueError(
            f"plan must be {resolution}x{resolution} pixels, got {arr.shape[1]}x{arr.shape[0]}"
        )
    dark = arr < 128
    return dark.T[:, ::-1].copy()


def _load_stage1(args):
    from .prior.train import load_prior
    from .vqgan.train import load_vqgan

    ckpt = Path(args.ckpt_dir)
    vqgan = load_vqgan(ckpt / VQGAN_CKPT)
    prior = load_prior(ckpt / PRIOR_CKPT)
    return vqgan, prior


def _write_grid(path, grid: VoxelGrid, args) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_vxg1(path, grid)
    _say(args, f"wrote {path} ({grid.resolution}^3, {grid.count()} occupied)")
    return path


def cmd_prep(args) -> int:
    from .dataprep import prep_dataset

    values = _settings(args)
    manifest = prep_dataset(
        args.data_dir,
        n_models=args.count or values["data.count"],
        seed=args.seed,
        resolution=values["data.resolution"],
        extent=SCENE_EXTENT,
        chunks_per_model=values["data.chunks_per_model"],
        progress=lambda i, n: _say(args, f"prepped {i}/{n} models"),
    )
    print(f"dataset: {len(manifest.models)} models at {manifest.resolution}^3 in {args.data_dir}")
    return EXIT_OK


def _train_grids(args):
    from .dataprep import DatasetManifest

    manifest = DatasetManifest.load(Path(args.data_dir) / "manifest.json")
    grids = [read_vxg1(Path(manifest.root) / m.grid_path) for m in manifest.split("train")]
    if not grids:
        raise ValueError("no training grids in the dataset; run `arch prep` first")
    return manifest, grids


def _chunk_pairs(manifest, level: int):
    from .upsampler import LevelConfig

    lc = LevelConfig(level)
    pairs = []
    root = Path(manifest.root)
    for m in manifest.split("train"):
        for c in range(m.n_chunks):
            coarse = root / m.chunk_dir / f"c{c:03d}_r{lc.coarse_patch:02d}.vxg"
            fine = root / m.chunk_dir / f"c{c:03d}_r{lc.fine_patch:02d}.vxg"
            pairs.append((read_vxg1(coarse), read_vxg1(fine)))
    if not pairs:
        raise ValueError(f"no level-{level} chunk pairs in the dataset")
    return pairs


def cmd_train(args) -> int:
    values = _settings(args)
    ckpt_dir = Path(args.ckpt_dir)

    if args.stage == "vqgan":
        from .vqgan.train import VqganTrainConfig, train_vqgan

        manifest, grids = _train_grids(args)
        tc = VqganTrainConfig(
            resolution=manifest.resolution,
            base_channels=values["vqgan.base_channels"],
            codebook_size=values["vqgan.codebook_size"],
            embed_dim=values["vqgan.embed_dim"],
            epochs=args.epochs or values["vqgan.epochs"],
            batch_size=values["vqgan.batch_size"],
            seed=args.seed,
        )
        result = train_vqgan(grids, tc, ckpt_dir, resume=args.resume,
                             progress=lambda e, entry: _say(args, f"epoch {e}: {entry}") or False)
    elif args.stage == "prior":
        from .prior import PriorConfig, tokenize
        from .prior.train import PriorTrainConfig, train_prior
        from .vqgan.train import load_vqgan

        manifest, grids = _train_grids(args)
        vqgan = load_vqgan(ckpt_dir / VQGAN_CKPT)
        sequences = [tokenize(vqgan.index_map(g)) for g in grids]
        tc = PriorTrainConfig(
            model=PriorConfig(
                codebook_size=vqgan.config.codebook_size,
                latent_resolution=vqgan.config.latent_resolution,
                n_layers=values["prior.layers"],
                n_heads=values["prior.heads"],
                width=values["prior.width"],
                seed=args.seed,
            ),
            epochs=args.epochs or values["prior.epochs"],
            batch_size=values["prior.batch_size"],
            seed=args.seed,
        )
        result = train_prior(sequences, tc, ckpt_dir, resume=args.resume,
                             progress=lambda e, entry: _say(args, f"epoch {e}: {entry}") or False)
    else:
        from .dataprep import DatasetManifest
        from .upsampler import UpsamplerTrainConfig, train_level

        if args.level is None:
            print("arch train upsampler: error: --level 1|2|3 is required", file=sys.stderr)
            return EXIT_USAGE
        manifest = DatasetManifest.load(Path(args.data_dir) / "manifest.json")
        pairs = _chunk_pairs(manifest, args.level)
        tc = UpsamplerTrainConfig(
            level=args.level,
            base_channels=values["upsampler.base_channels"],
            epochs=args.epochs or values["upsampler.epochs"],
            batch_size=values["upsampler.batch_size"],
            T=values["upsampler.T"],
            seed=args.seed,
        )
        result = train_level(pairs, tc, ckpt_dir, resume=args.resume,
                             progress=lambda e, entry: _say(args, f"epoch {e}: {entry}") or False)

    print(f"checkpoint: {result.checkpoint}")
    return EXIT_OK


def cmd_sample(args) -> int:
    from .prior import sample_tokens, sequence_to_json
    from .prior.sample import decode_sequence

    values = _settings(args)
    vqgan, prior = _load_stage1(args)
    voxel_size = SCENE_EXTENT / vqgan.config.resolution
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    top_k = args.top_k or values["sample.top_k"]
    for i in range(args.count):
        tokens = sample_tokens(
            prior, top_k=min(top_k, prior.config.codebook_size),
            temperature=args.temperature, seed=args.seed + i,
        )
        grid = decode_sequence(vqgan, tokens, voxel_size=voxel_size)
        _write_grid(out_dir / f"sample_{i:03d}.vxg", grid, args)
        (out_dir / f"sample_{i:03d}.tokens.json").write_text(
            sequence_to_json(tokens, prior.config.codebook_size)
        )
    print(f"sampled {args.count} models into {out_dir}")
    return EXIT_OK


def cmd_complete(args) -> int:
    from .prior import complete, half_known_mask
    from .prior.sample import decode_sequence

    vqgan, prior = _load_stage1(args)
    grid = read_vxg1(args.input)
    known = half_known_mask(vqgan.config.latent_resolution, args.half)
    sequences = complete(
        prior, vqgan, grid, known, k=args.k,
        top_k=args.top_k, temperature=args.temperature, seed=args.seed,
    )
    stem = Path(args.input).with_suffix("")
    voxel_size = SCENE_EXTENT / vqgan.config.resolution
    for i, tokens in enumerate(sequences):
        out = decode_sequence(vqgan, tokens, voxel_size=voxel_size)
        _write_grid(Path(f"{stem}.complete{i}.vxg"), out, args)
    print(f"wrote {args.k} completions of the {args.half} half next to {args.input}")
    return EXIT_OK


def cmd_plan_complete(args) -> int:
    from .prior import plan_complete
    from .prior.sample import decode_sequence

    vqgan, prior = _load_stage1(args)
    plan = load_plan_image(args.plan, vqgan.config.resolution)
    sequences = plan_complete(
        prior, vqgan, plan, k=args.k,
        top_k=args.top_k, temperature=args.temperature, seed=args.seed,
    )
    stem = Path(args.plan).with_suffix("")
    voxel_size = SCENE_EXTENT / vqgan.config.resolution
    for i, tokens in enumerate(sequences):
        out = decode_sequence(vqgan, tokens, voxel_size=voxel_size)
        _write_grid(Path(f"{stem}.plan{i}.vxg"), out, args)
    print(f"wrote {args.k} plan completions next to {args.plan}")
    return EXIT_OK


def cmd_interpolate(args) -> int:
    from .genetics import crossover
    from .prior import tokenize
    from .prior.sample import decode_sequence
    from .vqgan.train import load_vqgan

    vqgan = load_vqgan(Path(args.ckpt_dir) / VQGAN_CKPT)
    tokens_a = tokenize(vqgan.index_map(read_vxg1(args.a)))
    tokens_b = tokenize(vqgan.index_map(read_vxg1(args.b)))
    child = crossover(tokens_a, tokens_b, seed=args.seed)
    grid = decode_sequence(vqgan, child, voxel_size=SCENE_EXTENT / vqgan.config.resolution)
    out = Path(args.out) if args.out else Path(args.a).with_suffix(".interp.vxg")
    _write_grid(out, grid, args)
    print(f"interpolated {args.a} x {args.b} -> {out}")
    return EXIT_OK


def cmd_vary(args) -> int:
    from .genetics import mutate
    from .prior import tokenize
    from .prior.sample import decode_sequence
    from .vqgan.train import load_vqgan

    vqgan = load_vqgan(Path(args.ckpt_dir) / VQGAN_CKPT)
    base = tokenize(vqgan.index_map(read_vxg1(args.input)))
    stem = Path(args.input).with_suffix("")
    voxel_size = SCENE_EXTENT / vqgan.config.resolution
    for i in range(args.n):
        child = mutate(base, n_swaps=args.n_swaps, seed=args.seed + i)
        grid = decode_sequence(vqgan, child, voxel_size=voxel_size)
        _write_grid(Path(f"{stem}.var{i}.vxg"), grid, args)
    print(f"wrote {args.n} variations next to {args.input}")
    return EXIT_OK


def cmd_detailise(args) -> int:
    from .upsampler import checkpoint_name, detailise, load_level

    grid = read_vxg1(args.input)
    models = {}
    for level in range(1, args.level + 1):
        model, schedule, _ = load_level(Path(args.ckpt_dir) / checkpoint_name(level))
        models[level] = (model, schedule)
    out_grid = detailise(
        grid, args.level, models,
        batch_size=args.batch_size, ddim_steps=args.ddim_steps, seed=args.seed,
        progress=lambda level, done, total: _say(args, f"level {level}: {done}/{total} patches"),
    )
    out = Path(args.out) if args.out else Path(args.input).with_suffix(f".l{args.level}.vxg")
    _write_grid(out, out_grid, args)
    print(f"detailised {args.input} to {out_grid.resolution}^3 -> {out}")
    return EXIT_OK


def cmd_clean(args) -> int:
    grid = read_vxg1(args.input)
    cleaned = clean_up(grid, iterations=args.iters)
    out = Path(args.out) if args.out else Path(args.input).with_suffix(".clean.vxg")
    _write_grid(out, cleaned, args)
    print(f"removed {grid.count() - cleaned.count()} voxels -> {out}")
    return EXIT_OK


def _points_from_dir(path, seed: int):
    from .metrics import grid_to_points

    files = sorted(Path(path).glob("*.vxg"))
    if not files:
        raise ValueError(f"no .vxg files in {path}")
    clouds = []
    for f in files:
        grid = read_vxg1(f)
        if grid.count() == 0:
            print(f"arch: warning: skipping empty grid {f}", file=sys.stderr)
            continue
        clouds.append(grid_to_points(grid, seed=seed))
    if not clouds:
        raise ValueError(f"all grids in {path} are empty")
    return clouds


def cmd_metrics(args) -> int:
    from .metrics import MetricReport, cov_mmd_1nna, report_to_csv

    generated = _points_from_dir(args.generated, args.seed)
    reference = _points_from_dir(args.reference, args.seed)
    cov, mmd, one_nna = cov_mmd_1nna(generated, reference)
    report = MetricReport(cov=cov, mmd=mmd, one_nna=one_nna)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.to_json())
    if args.csv:
        report_to_csv(args.csv, report)
    print(f"COV {cov:.4f}  MMD {mmd:.4f}  1-NNA {one_nna:.4f}  ({out})")
    return EXIT_OK


def cmd_serve(args) -> int:
    import os

    import uvicorn

    from .service import create_app

    # an explicit --ckpt-dir wins; at its default, defer to ARCH_CKPT_DIR
    ckpt_dir = args.ckpt_dir if args.ckpt_dir != "checkpoints" else None
    app = create_app(data_dir=args.serve_dir, ckpt_dir=ckpt_dir, workers=args.workers)
    port = args.port or int(os.environ.get("ARCH_PORT", "8000"))
    uvicorn.run(app, host=args.host, port=port, log_level="warning" if not args.verbose else "info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arch",
        description="Two-stage voxel generation: train, sample, edit, detailise, serve.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base random seed (default 0)")
    common.add_argument("--config", default=None, help="key=value config file")
    common.add_argument("--data-dir", default="data", help="dataset directory")
    common.add_argument("--ckpt-dir", default="checkpoints", help="checkpoint directory")
    common.add_argument("-v", "--verbose", action="store_true", help="chatty progress output")

    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("prep", parents=[common], help="build the synthetic training corpus")
    p.add_argument("--count", type=_positive_int, default=None, help="number of houses")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("train", parents=[common], help="train one pipeline stage")
    p.add_argument("stage", choices=["vqgan", "prior", "upsampler"])
    p.add_argument("--level", type=int, choices=[1, 2, 3], default=None,
                   help="upsampler level (required for stage upsampler)")
    p.add_argument("--epochs", type=_positive_int, default=None, help="override epoch count")
    p.add_argument("--resume", default=None, help="checkpoint to resume from")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample", parents=[common], help="sample new models from the prior")
    p.add_argument("--count", type=_positive_int, default=1)
    p.add_argument("--top-k", type=_positive_int, default=None)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--out", default="samples", help="output directory")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("complete", parents=[common], help="complete a masked half of a model")
    p.add_argument("--input", required=True, help="partial model (VXG1)")
    p.add_argument("--half", required=True, choices=["x+", "x-", "y+", "y-", "z+", "z-"],
                   help="which half to fill in")
    p.add_argument("--k", type=_positive_int, default=1, help="number of completions")
    p.add_argument("--top-k", type=_positive_int, default=None)
    p.add_argument("--temperature", type=float, default=1.0)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("plan-complete", parents=[common],
                       help="generate models matching a floor plan image")
    p.add_argument("--plan", required=True, help="PBM or PNG top view; dark pixels = occupied")
    p.add_argument("--k", type=_positive_int, default=1)
    p.add_argument("--top-k", type=_positive_int, default=None)
    p.add_argument("--temperature", type=float, default=1.0)
    p.set_defaults(func=cmd_plan_complete)

    p = sub.add_parser("interpolate", parents=[common], help="token crossover of two models")
    p.add_argument("a", help="first parent (VXG1)")
    p.add_argument("b", help="second parent (VXG1)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("vary", parents=[common], help="token-swap variations of a model")
    p.add_argument("input", help="source model (VXG1)")
    p.add_argument("--n", type=_positive_int, default=1, help="number of variations")
    p.add_argument("--n-swaps", type=_nonneg_int, default=None)
    p.set_defaults(func=cmd_vary)

    p = sub.add_parser("detailise", parents=[common], help="diffusion-upsample a model")
    p.add_argument("input", help="coarse model (VXG1)")
    p.add_argument("--level", type=int, choices=[1, 2, 3], default=1,
                   help="target level: 1 doubles, 3 gives 8x")
    p.add_argument("--ddim-steps", type=_positive_int, default=50)
    p.add_argument("--batch-size", type=_positive_int, default=8)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_detailise)

    p = sub.add_parser("clean", parents=[common], help="strip floaters and stickers")
    p.add_argument("input", help="model to clean (VXG1)")
    p.add_argument("--iters", type=_nonneg_int, default=32, help="maximum passes (default 32)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("metrics", parents=[common], help="set-level generation metrics")
    p.add_argument("--generated", required=True, help="directory of generated .vxg files")
    p.add_argument("--reference", required=True, help="directory of reference .vxg files")
    p.add_argument("--out", default="report.json")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--workers", type=_positive_int, default=None, help="job worker threads")
    p.add_argument("--serve-dir", default=None, help="service state directory")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 0 for --help, 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        detail = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"arch: error: {detail}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

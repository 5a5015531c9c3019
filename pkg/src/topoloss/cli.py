"""Command-line interface.

Subcommands: diagram, match, loss, grad, eval, optimize, bench. All
validation and I/O failures exit with status 1 and a single JSON line on
stderr. Outputs are deterministic for fixed inputs and flags (bench
timings excluded).
"""

from __future__ import annotations

import functools
import json
import os
import statistics
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .descent import DescentConfig, make_synthetic_instance, optimize_likelihood, trace_to_csv
from .loss import loss_records, loss_report, topo_gradient
from .matching import match_diagrams, matching_records
from .metrics import evaluate_batch, metric_records, metric_table
from .persistence import compute_persistence, diagram_of_mask, diagram_to_csv
from .raster import binarize, load_image, pad_border, save_image
from .viz import barcode_svg, matching_overlay_svg


def _fail_cleanly(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, OSError) as exc:
            sys.stderr.write(json.dumps({"error": str(exc)}) + "\n")
            sys.exit(1)

    return wrapper


def _infer_kind(path: str, kind: str | None) -> str:
    if kind:
        return kind
    suffix = Path(path).suffix.lower()
    if suffix == ".npy":
        return "gray-f32"
    if suffix == ".pgm":
        return "gray-8bit"
    raise ValueError(f"{path}: cannot infer image kind from extension {suffix!r}")


def _load_gray(path: str, kind: str | None = None) -> np.ndarray:
    resolved = _infer_kind(path, kind)
    img = load_image(path, resolved)
    if resolved == "mask":
        return img.astype(np.float64)
    return img


def _load_mask(path: str, threshold: float) -> np.ndarray:
    suffix = Path(path).suffix.lower()
    if suffix == ".pgm":
        return load_image(path, "mask")
    return binarize(load_image(path, "gray-f32"), threshold)


def _write(text: str, output: str | None) -> None:
    if output is None or output == "-":
        click.echo(text, nl=False)
    else:
        Path(output).write_text(text)


mode_option = click.option(
    "--mode", type=click.Choice(["vanilla", "spatial"]), default="spatial", show_default=True
)
pad_option = click.option("--pad/--no-pad", "pad", default=True, show_default=True)
threshold_option = click.option("--threshold", type=float, default=0.5, show_default=True)


@click.group()
@click.version_option(version=__version__, prog_name="topoloss")
def main() -> None:
    """Persistence diagrams, spatially weighted matching, and topology losses."""


@main.command()
@click.argument("input_path", type=click.Path(dir_okay=False))
@click.option("-o", "--output", default=None, help="Output path; stdout if omitted.")
@click.option("--kind", type=click.Choice(["gray-f32", "gray-8bit", "mask"]), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "svg"]), default="csv", show_default=True)
@pad_option
@threshold_option
@_fail_cleanly
def diagram(input_path, output, kind, fmt, pad, threshold) -> None:
    """Persistence diagram of one image (CSV rows or barcode SVG)."""
    resolved = _infer_kind(input_path, kind)
    if resolved == "mask":
        dgm = diagram_of_mask(load_image(input_path, "mask"), pad=pad)
    else:
        img = load_image(input_path, resolved)
        dgm = compute_persistence(pad_border(img) if pad else img)
    _write(barcode_svg(dgm) if fmt == "svg" else diagram_to_csv(dgm), output)


@main.command()
@click.argument("input_path", type=click.Path(dir_okay=False))
@click.option("-o", "--output", default=None)
@click.option("--kind", type=click.Choice(["gray-f32", "gray-8bit", "mask"]), default=None)
@pad_option
@_fail_cleanly
def cells(input_path, output, kind, pad) -> None:
    """Debug dump of the filtered cell grid as CSV."""
    from .cubical import build_complex, cell_dim

    img = _load_gray(input_path, kind)
    cx = build_complex(pad_border(img) if pad else img)
    lines = ["grid_row,grid_col,dim,value"]
    h, w = cx.grid_shape
    for r in range(h):
        for c in range(w):
            lines.append(f"{r},{c},{cell_dim((r, c))},{cx.cell_values[r, c]!r}")
    _write("\n".join(lines) + "\n", output)


@main.command()
@click.argument("likelihood", type=click.Path(dir_okay=False))
@click.argument("target", type=click.Path(dir_okay=False))
@click.option("-o", "--output", default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "svg"]), default="json", show_default=True)
@mode_option
@pad_option
@threshold_option
@_fail_cleanly
def match(likelihood, target, output, fmt, mode, pad, threshold) -> None:
    """Match the diagrams of a likelihood raster and a target mask."""
    img = _load_gray(likelihood)
    mask = _load_mask(target, threshold)
    dl = compute_persistence(pad_border(img) if pad else img)
    dt = diagram_of_mask(mask, pad=pad)
    result = match_diagrams(dl, dt, mode=mode)
    if fmt == "svg":
        _write(matching_overlay_svg(dl, dt, result), output)
    else:
        _write(json.dumps(matching_records(result), indent=2) + "\n", output)


@main.command(name="loss")
@click.argument("likelihood", type=click.Path(dir_okay=False))
@click.argument("target", type=click.Path(dir_okay=False))
@click.option("-o", "--output", default=None)
@click.option("--lambda", "lam", type=float, default=0.01, show_default=True)
@mode_option
@pad_option
@threshold_option
@_fail_cleanly
def loss_cmd(likelihood, target, output, lam, mode, pad, threshold) -> None:
    """Loss breakdown (pixel + lambda * topology) as JSON."""
    report = loss_report(_load_gray(likelihood), _load_mask(target, threshold), lam=lam, mode=mode, pad=pad)
    _write(json.dumps(loss_records(report), indent=2) + "\n", output)


@main.command()
@click.argument("likelihood", type=click.Path(dir_okay=False))
@click.argument("target", type=click.Path(dir_okay=False))
@click.option("-o", "--output", required=True, help="Output float raster (.npy).")
@mode_option
@pad_option
@threshold_option
@_fail_cleanly
def grad(likelihood, target, output, mode, pad, threshold) -> None:
    """Topology-loss gradient raster over the likelihood pixels."""
    g = topo_gradient(_load_gray(likelihood), _load_mask(target, threshold), mode=mode, pad=pad)
    arr = g.astype("<f4")
    with open(output, "wb") as fh:
        np.save(fh, arr)


@main.command(name="eval")
@click.argument("predictions", type=click.Path())
@click.argument("targets", type=click.Path())
@click.option("-o", "--output", default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json", show_default=True)
@threshold_option
@_fail_cleanly
def eval_cmd(predictions, targets, output, fmt, threshold) -> None:
    """Metric report over two directories (or two files) of masks.

    Directory entries are paired by sorted file name. An optional
    TOPOLOSS_WORKERS environment variable sizes a thread pool.
    """
    pred_paths = _mask_paths(predictions)
    true_paths = _mask_paths(targets)
    if len(pred_paths) != len(true_paths):
        raise ValueError(
            f"prediction/target counts differ: {len(pred_paths)} vs {len(true_paths)}"
        )
    if not pred_paths:
        raise ValueError("no mask files found")

    def load_pair(paths):
        return (_load_mask(str(paths[0]), threshold), _load_mask(str(paths[1]), threshold))

    jobs = list(zip(pred_paths, true_paths))
    workers = int(os.environ.get("TOPOLOSS_WORKERS", "0"))
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(load_pair, jobs))
    else:
        pairs = [load_pair(j) for j in jobs]
    report = evaluate_batch(pairs)
    if fmt == "table":
        _write(metric_table(report), output)
    else:
        _write(json.dumps(metric_records(report), indent=2) + "\n", output)


def _mask_paths(root: str):
    p = Path(root)
    if p.is_file():
        return [p]
    return sorted(q for q in p.iterdir() if q.suffix.lower() in (".pgm", ".npy"))


@main.command()
@click.option("--target", "target_path", type=click.Path(dir_okay=False), default=None)
@click.option("--init", "init_path", type=click.Path(dir_okay=False), default=None)
@click.option("--kind", type=click.Choice(["two-blobs", "ring", "broken-line"]), default=None)
@click.option("--shape", type=int, default=32, show_default=True, help="Synthetic instance side length.")
@click.option("--noise", type=float, default=0.2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--output", default=None, help="Trace CSV path; stdout if omitted.")
@click.option("--out-image", default=None, help="Optional final likelihood raster (.npy).")
@click.option("--steps", type=int, default=300, show_default=True)
@click.option("--lr", type=float, default=0.5, show_default=True)
@click.option("--lambda", "lam", type=float, default=0.01, show_default=True)
@click.option("--record-every", type=int, default=10, show_default=True)
@click.option("--descent-mode", "mode", type=click.Choice(["vanilla", "spatial", "none"]), default="spatial", show_default=True)
@click.option("--snapshot-dir", default=None, help="Write a matching overlay SVG per recorded step.")
@pad_option
@threshold_option
@_fail_cleanly
def optimize(target_path, init_path, kind, shape, noise, seed, output, out_image,
             steps, lr, lam, record_every, mode, snapshot_dir, pad, threshold) -> None:
    """Gradient descent on likelihood pixels; writes the loss/error trace.

    Either give --kind for a synthetic instance, or --target (mask) plus
    --init (likelihood raster).
    """
    if kind is not None:
        L0, T = make_synthetic_instance(kind, (shape, shape), noise=noise, seed=seed)
    else:
        if target_path is None or init_path is None:
            raise ValueError("either --kind or both --target and --init are required")
        T = _load_mask(target_path, threshold)
        L0 = _load_gray(init_path)
    cfg = DescentConfig(
        steps=steps, learning_rate=lr, lam=lam, mode=mode,
        record_every=record_every, seed=seed, pad=pad, threshold=threshold,
    )
    on_record = None
    if snapshot_dir:
        snap = Path(snapshot_dir)
        snap.mkdir(parents=True, exist_ok=True)
        match_mode = mode if mode != "none" else "spatial"

        def on_record(step, img):
            dl = compute_persistence(pad_border(img) if pad else img)
            dt = diagram_of_mask(T, pad=pad)
            overlay = matching_overlay_svg(dl, dt, match_diagrams(dl, dt, mode=match_mode))
            (snap / f"step_{step:05d}.svg").write_text(overlay)

    trace = optimize_likelihood(L0, T, cfg, on_record=on_record)
    _write(trace_to_csv(trace), output)
    if out_image:
        save_image(trace.final_image, out_image, "gray-f32")


@main.command()
@click.option("--sizes", default="128,256,512,1024", show_default=True)
@click.option("--runs", type=int, default=5, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table", show_default=True)
@click.option("-o", "--output", default=None)
@_fail_cleanly
def bench(sizes, runs, fmt, output) -> None:
    """Median persistence runtime over synthetic images of growing size."""
    from scipy import ndimage

    side_list = [int(s) for s in sizes.split(",") if s.strip()]
    if not side_list or runs < 1:
        raise ValueError("need at least one size and one run")
    rng = np.random.default_rng(0)
    results = []
    warmed = False
    for side in side_list:
        img = ndimage.gaussian_filter(rng.random((side, side)), sigma=2.0)
        img = (img - img.min()) / (img.max() - img.min())
        if not warmed:
            compute_persistence(img)  # JIT warm-up outside the timed region
            warmed = True
        times = []
        for _ in range(runs):
            t0 = time.perf_counter()
            compute_persistence(img)
            times.append(time.perf_counter() - t0)
        results.append({"size": side, "median_s": statistics.median(times), "runs": runs})
    if fmt == "json":
        _write(json.dumps({"schema": 1, "results": results}, indent=2) + "\n", output)
    else:
        lines = [f"{'size':>6}  {'median_s':>10}"]
        for r in results:
            lines.append(f"{r['size']:>6}  {r['median_s']:>10.4f}")
        _write("\n".join(lines) + "\n", output)


if __name__ == "__main__":
    main()

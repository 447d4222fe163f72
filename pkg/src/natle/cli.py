"""Batch command-line front end: enhance, eval, and ablate."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from . import figures
from .denoise import estimate_local_sigma
from .image import init_illumination, load_image, save_image
from .metrics import psnr, ssim
from .pipeline import FLAT_FIELDS, NatleParams, enhance

logger = logging.getLogger(__name__)

REPORT_HEADER = ["file", "width", "height", "ms_illum", "ms_denoise",
                 "ms_reflect", "ms_total", "warnings"]

ABLATION_VARIANTS = ["alpha0", "beta0", "nodenoise", "full"]


@dataclass
class RunManifest:
    """Resolved description of one batch run."""

    inputs: list[Path]
    out_dir: Path
    params: NatleParams
    trace: bool = False
    refs_dir: Path | None = None
    seed: int | None = None  # reserved for stochastic test fixtures
    dump_config: Path | None = None

    def __post_init__(self):
        missing = [str(p) for p in self.inputs if not p.is_file()]
        if missing:
            raise click.ClickException(f"input not found: {', '.join(missing)}")
        self.out_dir.mkdir(parents=True, exist_ok=True)


def _read_config(path: Path) -> dict[str, str]:
    """Parse a flat key=value config file; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise click.ClickException(f"{path}:{lineno}: expected key=value, got {text!r}")
        key, value = (part.strip() for part in text.split("=", 1))
        if key not in FLAT_FIELDS:
            raise click.ClickException(f"{path}:{lineno}: unknown parameter {key!r}")
        values[key] = value
    return values


def _write_config(path: Path, params: NatleParams) -> None:
    lines = [f"{key}={value}" for key, value in params.to_flat_dict().items()]
    path.write_text("\n".join(lines) + "\n")


def _resolve_params(config: Path | None, flag_values: dict[str, object]) -> NatleParams:
    """Defaults, overridden by the config file, overridden by explicit flags."""
    flat: dict[str, object] = {}
    if config is not None:
        flat.update(_read_config(config))
    flat.update({key: value for key, value in flag_values.items() if value is not None})
    return NatleParams.from_flat_dict(flat)


def _param_options(command):
    """Attach the shared parameter flags (each maps to one params field)."""
    options = [
        click.option("--alpha", type=float, default=None, help="Illumination smoothness weight."),
        click.option("--beta", type=float, default=None, help="Reflectance gradient-fit weight."),
        click.option("--lambda", "lambda_", type=float, default=None,
                      help="Amplification of retained gradients."),
        click.option("--gamma", type=float, default=None, help="Brightening exponent."),
        click.option("--eps", type=float, default=None, help="Illumination gradient floor."),
        click.option("--eps-g", type=float, default=None,
                      help="Gradient magnitude below which the target is zeroed."),
        click.option("--median-radius", type=int, default=None, help="Median window radius."),
        click.option("--abf-spatial-sigma", type=float, default=None,
                      help="Bilateral spatial sigma (pixels)."),
        click.option("--abf-range-min", type=float, default=None,
                      help="Lower clamp of the bilateral range sigma."),
        click.option("--abf-range-max", type=float, default=None,
                      help="Upper clamp of the bilateral range sigma."),
        click.option("--no-denoise", "no_denoise", flag_value=True, default=None,
                      help="Skip the reflectance denoising round trip."),
        click.option("--tol", type=float, default=None, help="Solver relative tolerance."),
        click.option("--max-iters", type=int, default=None, help="Solver iteration budget."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _collect_flags(kwargs: dict) -> dict[str, object]:
    return {
        "alpha": kwargs.pop("alpha"),
        "beta": kwargs.pop("beta"),
        "lambda": kwargs.pop("lambda_"),
        "gamma": kwargs.pop("gamma"),
        "eps": kwargs.pop("eps"),
        "eps_g": kwargs.pop("eps_g"),
        "median_radius": kwargs.pop("median_radius"),
        "abf_spatial_sigma": kwargs.pop("abf_spatial_sigma"),
        "abf_range_min": kwargs.pop("abf_range_min"),
        "abf_range_max": kwargs.pop("abf_range_max"),
        "no_denoise": kwargs.pop("no_denoise"),
        "tol": kwargs.pop("tol"),
        "max_iters": kwargs.pop("max_iters"),
    }


@click.group()
def main():
    """Low-light image enhancement with integrated denoising."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")


@main.command(name="enhance")
@click.argument("inputs", nargs=-1, required=True,
                type=click.Path(path_type=Path))
@_param_options
@click.option("--out-dir", type=click.Path(path_type=Path), default=Path("enhanced"),
              show_default=True, help="Directory for outputs and the report.")
@click.option("--trace", is_flag=True, help="Write per-stage maps and a contact sheet.")
@click.option("--config", type=click.Path(exists=True, path_type=Path), default=None,
              help="Flat key=value parameter file (flags win on conflict).")
@click.option("--dump-config", type=click.Path(path_type=Path), default=None,
              help="Write the effective parameters to this file.")
def cmd_enhance(inputs, out_dir, trace, config, dump_config, **kwargs):
    """Enhance one or more images and write a CSV run report."""
    params = _resolve_params(config, _collect_flags(kwargs))
    manifest = RunManifest(inputs=list(inputs), out_dir=out_dir, params=params,
                           trace=trace, dump_config=dump_config)
    if manifest.dump_config is not None:
        _write_config(manifest.dump_config, params)

    rows = []
    failures = 0
    for path in manifest.inputs:
        try:
            image = load_image(path)
            output, run_trace = enhance(image, params, keep_maps=manifest.trace)
            out_path = manifest.out_dir / f"{path.stem}.png"
            save_image(out_path, output)
            if manifest.trace:
                figures.save_trace_panels(image, output, run_trace,
                                          manifest.out_dir / "trace", path.stem)
            rows.append({
                "file": path.name,
                "width": image.shape[1],
                "height": image.shape[0],
                "ms_illum": f"{run_trace.durations_ms['illum']:.3f}",
                "ms_denoise": f"{run_trace.durations_ms['denoise']:.3f}",
                "ms_reflect": f"{run_trace.durations_ms['reflect']:.3f}",
                "ms_total": f"{run_trace.durations_ms['total']:.3f}",
                "warnings": "; ".join(run_trace.warnings),
            })
            click.echo(f"{path.name}: ok ({run_trace.durations_ms['total']:.0f} ms) -> {out_path}")
        except Exception as exc:  # keep the batch going, report at the end
            failures += 1
            click.echo(f"{path.name}: FAILED ({exc})", err=True)

    report = manifest.out_dir / "report.csv"
    with open(report, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=REPORT_HEADER)
        writer.writeheader()
        writer.writerows(rows)
    click.echo(f"report: {report}")
    if failures:
        raise click.ClickException(f"{failures} image(s) failed")


def _matched_pairs(outputs_dir: Path, refs_dir: Path) -> list[tuple[str, Path, Path]]:
    def stems(d: Path) -> dict[str, Path]:
        table = {}
        for p in sorted(d.iterdir()):
            if p.suffix.lower() in (".png", ".jpg", ".jpeg") and p.is_file():
                table[p.stem] = p
        return table

    outs, refs = stems(outputs_dir), stems(refs_dir)
    if not outs:
        raise click.ClickException(f"no images found in {outputs_dir}")
    if not refs:
        raise click.ClickException(f"no images found in {refs_dir}")
    missing_refs = sorted(set(outs) - set(refs))
    missing_outs = sorted(set(refs) - set(outs))
    if missing_refs or missing_outs:
        raise click.ClickException(
            "filename sets do not match; "
            f"missing references: {missing_refs or 'none'}, "
            f"missing outputs: {missing_outs or 'none'}"
        )
    return [(stem, outs[stem], refs[stem]) for stem in sorted(outs)]


@main.command(name="eval")
@click.argument("outputs_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.argument("refs_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--out-dir", type=click.Path(path_type=Path), default=None,
              help="Where to write metrics.csv and the chart (default: OUTPUTS_DIR).")
def cmd_eval(outputs_dir, refs_dir, out_dir):
    """Score a directory of outputs against same-named reference images."""
    out_dir = out_dir or outputs_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for stem, out_path, ref_path in _matched_pairs(outputs_dir, refs_dir):
        out_img = load_image(out_path)
        ref_img = load_image(ref_path)
        score = ssim(out_img, ref_img)
        noise = psnr(out_img, ref_img)
        rows.append({"file": out_path.name, "ssim": score, "psnr": noise})
        shown = "identical" if math.isinf(noise) else f"{noise:.2f} dB"
        click.echo(f"{out_path.name}: ssim={score:.4f} psnr={shown}")

    mean_ssim = float(np.mean([row["ssim"] for row in rows]))
    finite = [row["psnr"] for row in rows if math.isfinite(row["psnr"])]
    mean_psnr = float(np.mean(finite)) if finite else math.inf
    click.echo(f"mean: ssim={mean_ssim:.4f} psnr="
               + ("identical" if math.isinf(mean_psnr) else f"{mean_psnr:.2f} dB"))

    table = out_dir / "metrics.csv"
    with open(table, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["file", "ssim", "psnr"])
        for row in rows:
            writer.writerow([row["file"], f"{row['ssim']:.6f}", repr(row["psnr"])])
        writer.writerow(["mean", f"{mean_ssim:.6f}", repr(mean_psnr)])
    chart = figures.save_metrics_chart(rows, out_dir / "metrics.png")
    click.echo(f"table: {table}\nchart: {chart}")


def _variant_params(base: NatleParams, variant: str) -> NatleParams:
    flat = base.to_flat_dict()
    if variant == "alpha0":
        flat["alpha"] = 0.0
    elif variant == "beta0":
        flat["beta"] = 0.0
    elif variant == "nodenoise":
        flat["no_denoise"] = True
    elif variant != "full":
        raise ValueError(f"unknown variant {variant}")
    return NatleParams.from_flat_dict({k: v for k, v in flat.items()})


@main.command(name="ablate")
@click.argument("inputs", nargs=-1, required=True, type=click.Path(path_type=Path))
@_param_options
@click.option("--out-dir", type=click.Path(path_type=Path), default=Path("ablation"),
              show_default=True, help="Directory for variant outputs and the table.")
@click.option("--refs", "refs_dir", type=click.Path(exists=True, file_okay=False, path_type=Path),
              default=None, help="Reference directory for per-variant SSIM.")
@click.option("--config", type=click.Path(exists=True, path_type=Path), default=None,
              help="Flat key=value parameter file (flags win on conflict).")
def cmd_ablate(inputs, out_dir, refs_dir, config, **kwargs):
    """Run the four parameter-study variants per image and compare them."""
    params = _resolve_params(config, _collect_flags(kwargs))
    manifest = RunManifest(inputs=list(inputs), out_dir=out_dir, params=params,
                           refs_dir=refs_dir)

    rows = []
    failures = 0
    for path in manifest.inputs:
        try:
            image = load_image(path)
            reference = None
            if manifest.refs_dir is not None:
                ref_path = _find_reference(manifest.refs_dir, path.stem)
                reference = load_image(ref_path)
            variant_outputs: dict[str, np.ndarray] = {}
            for variant in ABLATION_VARIANTS:
                output, _ = enhance(image, _variant_params(params, variant))
                variant_outputs[variant] = output
                save_image(manifest.out_dir / f"{path.stem}_{variant}.png", output)
                row = {
                    "file": path.name,
                    "variant": variant,
                    "mean_brightness": f"{float(init_illumination(output).mean()):.6f}",
                    "residual_sigma":
                        f"{float(np.median(estimate_local_sigma(init_illumination(output)))):.6f}",
                    "ssim": f"{ssim(output, reference):.6f}" if reference is not None else "",
                }
                rows.append(row)
                click.echo(f"{path.name} [{variant}]: brightness={row['mean_brightness']}"
                           + (f" ssim={row['ssim']}" if row["ssim"] else ""))
            figures.save_ablation_sheet(variant_outputs,
                                        manifest.out_dir / f"{path.stem}_ablation.png")
        except Exception as exc:
            failures += 1
            click.echo(f"{path.name}: FAILED ({exc})", err=True)

    table = manifest.out_dir / "ablation.csv"
    with open(table, "w", newline="") as handle:
        writer = csv.DictWriter(
            handle, fieldnames=["file", "variant", "mean_brightness", "residual_sigma", "ssim"])
        writer.writeheader()
        writer.writerows(rows)
    click.echo(f"table: {table}")
    if failures:
        raise click.ClickException(f"{failures} image(s) failed")


def _find_reference(refs_dir: Path, stem: str) -> Path:
    for suffix in (".png", ".jpg", ".jpeg"):
        candidate = refs_dir / f"{stem}{suffix}"
        if candidate.is_file():
            return candidate
    raise click.ClickException(f"no reference image for {stem!r} in {refs_dir}")


if __name__ == "__main__":
    main()

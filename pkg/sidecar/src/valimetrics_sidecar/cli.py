"""`valimetrics-extract`: run a CNN over an image directory, emit VFTS files."""

from __future__ import annotations

import logging
import sys

import click

from .errors import SidecarError
from .extract import export_lpips_weights, extract
from .spec import NETWORK_LAYERS, ExtractorSpec


@click.command()
@click.option("--images", "image_dir", required=True,
              type=click.Path(exists=True, file_okay=False),
              help="Directory of input images.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False),
              help="Output directory for .vfts files and spec.json.")
@click.option("--network", default="randcnn", show_default=True,
              type=click.Choice(sorted(NETWORK_LAYERS)))
@click.option("--layers", default=None,
              help="Comma-separated layer names; defaults to all known layers.")
@click.option("--resize", default="none", show_default=True,
              help='Input resize policy: "none" or "letterbox:HxW".')
@click.option("--weights-out", default=None, type=click.Path(dir_okay=False),
              help="Also write a VFTW weight file to this path.")
@click.option("--uniform", is_flag=True, default=True, show_default=True,
              help="Use uniform (all-ones) channel weights for --weights-out.")
def main(image_dir, out_dir, network, layers, resize, weights_out, uniform):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        spec = ExtractorSpec(
            network=network,
            layers=tuple(layers.split(",")) if layers else (),
            resize=resize,
        )
        failures: list = []
        written = extract(image_dir, spec, out_dir, failures=failures)
        if weights_out:
            export_lpips_weights(
                spec, weights_out,
                calibration="uniform" if uniform else "calibrated")
    except SidecarError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"{len(written)} feature files written ({spec.extractor_id})")
    if failures:
        click.echo(f"{len(failures)} images skipped", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()

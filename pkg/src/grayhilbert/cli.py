"""Command-line entry point: reproducible ingest, build, metric and tail runs.

Every subcommand is deterministic given its flags: all randomness flows
from ``--seed``, and output files are written atomically (temp file plus
rename) so reruns yield byte-identical artifacts.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile

import click
import numpy as np

from . import __version__
from .ingest import AttributeSpec, load_csv, parse_attribute_specs
from .metrics import CSV_COLUMNS, compute_metrics, static_k
from .stats import compare_models, fit_lognormal, fit_powerlaw, gof_bootstrap, tail_ccdf
from .synth import DISTRIBUTIONS, SynthSpec, cloud_to_csv, generate
from .tree import (
    MAX_COORD_BITS,
    build_scaled,
    export_tree,
    leaf_occupancies,
    preorder_index,
    static_cell_occupancies,
)

TAIL_SOURCES = ("static-cells", "scaled-leaves")


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        _atomic_write(out, text)


def _load_cloud(input_path, attrs, delimiter, seed, keep_missing):
    try:
        if attrs is None:
            with open(input_path, encoding="utf-8") as fh:
                header = fh.readline().strip()
            specs = [AttributeSpec(c.strip()) for c in header.split(delimiter) if c.strip()]
        else:
            specs = parse_attribute_specs(attrs)
        return load_csv(input_path, specs, delimiter=delimiter, seed=seed, missing_policy=keep_missing)
    except (ValueError, OSError) as exc:
        raise click.ClickException(str(exc)) from exc


def input_options(fn):
    fn = click.option("--keep-missing", type=click.Choice(["drop", "impute-zero"]), default="drop", show_default=True, help="Missing-value policy for selected attributes.")(fn)
    fn = click.option("--seed", type=int, default=42, show_default=True, help="Seed for every random choice in the run.")(fn)
    fn = click.option("--delimiter", default=",", show_default=True, help="CSV field delimiter.")(fn)
    fn = click.option("--attrs", default=None, help="Selected attributes, e.g. 'x,y,species:categorical,when:date' (default: every column, numeric).")(fn)
    fn = click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Input CSV path.")(fn)
    return fn


def index_options(fn):
    fn = click.option("--max-bits", type=click.IntRange(1, MAX_COORD_BITS), default=MAX_COORD_BITS, show_default=True, help="Per-coordinate subdivision budget.")(fn)
    fn = click.option("--scheme", type=click.Choice(["bubble", "ring"]), default="ring", show_default=True, help="Coordinate permutation scheme.")(fn)
    fn = click.option("--bucket", type=click.IntRange(min=1), default=1, show_default=True, help="Bucket capacity s.")(fn)
    return fn


@click.group()
@click.version_option(__version__, prog_name="grayhilbert", message="%(prog)s %(version)s")
def main() -> None:
    """Scaled and static Hilbert-curve indexing for n-dimensional point clouds."""


@main.command()
@input_options
@index_options
@click.option("--format", "fmt", type=click.Choice(["json", "dot"]), default="json", show_default=True, help="Tree export format.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Tree output path.")
@click.option("--report", "report_path", default=None, type=click.Path(dir_okay=False), help="Ingest report path (default: <out>.report.json).")
def build(input_path, attrs, delimiter, seed, keep_missing, bucket, scheme, max_bits, fmt, out, report_path):
    """Build the scaled index tree for a CSV cloud and export it."""
    cloud, report = _load_cloud(input_path, attrs, delimiter, seed, keep_missing)
    try:
        tree = build_scaled(cloud, bucket, scheme, max_bits=max_bits)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    _atomic_write(out, export_tree(tree, fmt))
    _atomic_write(report_path or out + ".report.json", report.to_json())
    stats = tree.stats()
    click.echo(
        f"points={len(cloud)} nodes={tree.num_nodes} leaves={stats.total_leaves} "
        f"nonempty={stats.nonempty} overfilled={stats.overfilled}"
    )


@main.command()
@input_options
@click.option("--bucket-sweep", default="1", show_default=True, help="Comma-separated bucket capacities, e.g. '1,2,4'.")
@click.option("--scheme", type=click.Choice(["bubble", "ring", "both"]), default="ring", show_default=True)
@click.option("--max-bits", type=click.IntRange(1, MAX_COORD_BITS), default=MAX_COORD_BITS, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="Output path (default: stdout).")
def metrics(input_path, attrs, delimiter, seed, keep_missing, bucket_sweep, scheme, max_bits, fmt, out):
    """Sweep bucket capacities and emit one metrics row per (s, scheme)."""
    cloud, _ = _load_cloud(input_path, attrs, delimiter, seed, keep_missing)
    try:
        sweep = [int(v) for v in bucket_sweep.split(",") if v.strip()]
    except ValueError:
        raise click.ClickException(f"invalid --bucket-sweep {bucket_sweep!r}") from None
    if not sweep or min(sweep) < 1:
        raise click.ClickException("--bucket-sweep must list positive integers")
    schemes = ["bubble", "ring"] if scheme == "both" else [scheme]
    rows = []
    for s in sweep:
        for sch in schemes:
            try:
                rows.append(compute_metrics(cloud, s, sch, max_bits=max_bits))
            except ValueError as exc:
                raise click.ClickException(f"s={s} scheme={sch}: {exc}") from exc
    if fmt == "csv":
        text = ",".join(CSV_COLUMNS) + "\n" + "".join(row.csv_row() + "\n" for row in rows)
    else:
        text = json.dumps([row.to_dict() for row in rows], sort_keys=True, separators=(",", ":")) + "\n"
    _emit(text, out)


@main.command()
@input_options
@index_options
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="Output path (default: stdout).")
def order(input_path, attrs, delimiter, seed, keep_missing, bucket, scheme, max_bits, out):
    """Print point ids in curve (pre-order) sequence, one per line."""
    cloud, _ = _load_cloud(input_path, attrs, delimiter, seed, keep_missing)
    try:
        tree = build_scaled(cloud, bucket, scheme, max_bits=max_bits)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    ids = preorder_index(tree).ids
    _emit("".join(f"{v}\n" for v in ids.tolist()), out)


def _occupancy_sample(cloud, bucket, scheme, max_bits, tail_source):
    if tail_source == "scaled-leaves":
        tree = build_scaled(cloud, bucket, scheme, max_bits=max_bits)
        return leaf_occupancies(tree)
    k = static_k(len(cloud), bucket, cloud.n)
    return static_cell_occupancies(cloud, k, max_bits)


@main.command()
@input_options
@index_options
@click.option("--tail-source", type=click.Choice(list(TAIL_SOURCES)), default="static-cells", show_default=True, help="Occupancy sample: depth-k static cells or scaled-tree leaves.")
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="Output path (default: stdout).")
def tail(input_path, attrs, delimiter, seed, keep_missing, bucket, scheme, max_bits, tail_source, out):
    """Emit the occupancy tail distribution as two-column CSV (x, ccdf)."""
    cloud, _ = _load_cloud(input_path, attrs, delimiter, seed, keep_missing)
    occ = _occupancy_sample(cloud, bucket, scheme, max_bits, tail_source)
    _emit(tail_ccdf(occ).to_csv(), out)


@main.command()
@input_options
@index_options
@click.option("--tail-source", type=click.Choice(list(TAIL_SOURCES)), default="static-cells", show_default=True)
@click.option("--replicates", type=click.IntRange(min=100), default=1000, show_default=True, help="Bootstrap replicates for the goodness-of-fit p-value.")
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="Output path (default: stdout).")
def fit(input_path, attrs, delimiter, seed, keep_missing, bucket, scheme, max_bits, tail_source, replicates, out):
    """Fit log-normal and power-law models to the occupancy tail and compare them."""
    cloud, _ = _load_cloud(input_path, attrs, delimiter, seed, keep_missing)
    occ = _occupancy_sample(cloud, bucket, scheme, max_bits, tail_source).astype(np.float64)
    try:
        lognormal = fit_lognormal(occ)
        gof = gof_bootstrap(occ, lognormal, replicates=replicates, seed=seed)
        powerlaw = fit_powerlaw(occ)
        ln_tail = fit_lognormal(occ[occ >= powerlaw.x_min])
        comparison = compare_models(occ, ln_tail, powerlaw)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    doc = {
        "sample_size": int(occ.size),
        "tail_source": tail_source,
        "bucket": bucket,
        "seed": seed,
        "replicates": replicates,
        "lognormal": {**lognormal.to_json_dict(), "gof_pvalue": gof},
        "lognormal_tail": ln_tail.to_json_dict(),
        "powerlaw": powerlaw.to_json_dict(),
        "comparison": {
            "log_likelihood_ratio": comparison.log_likelihood_ratio,
            "p_value": comparison.p_value,
            "raw_sum": comparison.raw_sum,
            "tail_size": comparison.tail_size,
        },
    }
    _emit(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", out)


@main.command()
@click.option("--dist", type=click.Choice(list(DISTRIBUTIONS)), default="uniform", show_default=True)
@click.option("--n", "n_dim", type=click.IntRange(1, 63), default=2, show_default=True, help="Dimension count.")
@click.option("--count", type=click.IntRange(min=1), default=1000, show_default=True, help="Point count.")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--clusters", type=click.IntRange(min=1), default=16, show_default=True)
@click.option("--mu", type=float, default=-6.0, show_default=True, help="Log-scale of cluster radii (lognormal families).")
@click.option("--sigma", type=float, default=0.5, show_default=True)
@click.option("--alpha", type=float, default=2.5, show_default=True, help="Pareto radius exponent.")
@click.option("--scale", type=float, default=1e-4, show_default=True, help="Pareto minimum radius.")
@click.option("--uniform-fraction", type=click.FloatRange(0.0, 1.0), default=0.5, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Output CSV path.")
def synth(dist, n_dim, count, seed, clusters, mu, sigma, alpha, scale, uniform_fraction, out):
    """Generate a seeded synthetic cloud as CSV (consumable by the other commands)."""
    try:
        spec = SynthSpec(
            distribution=dist,
            n=n_dim,
            count=count,
            seed=seed,
            clusters=clusters,
            mu=mu,
            sigma=sigma,
            alpha=alpha,
            scale=scale,
            uniform_fraction=uniform_fraction,
        )
        cloud = generate(spec)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    _atomic_write(out, cloud_to_csv(cloud))
    click.echo(f"wrote {count} points to {out}")


if __name__ == "__main__":
    main()

"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
report; the large-cloud performance check is marked ``perf``.
"""

from __future__ import annotations

import json
import resource
import time

import numpy as np
import pytest
from click.testing import CliRunner

from grayhilbert import curve
from grayhilbert.cli import main as cli_main
from grayhilbert.metrics import (
    capacity_Omega,
    capacity_ratio,
    compute_metrics,
    local_sparsity_rho,
    omega,
    static_k,
)
from grayhilbert.stats import compare_models, fit_lognormal, fit_powerlaw, gof_bootstrap
from grayhilbert.synth import SynthSpec, generate
from grayhilbert.tree import PointCloud, build_scaled, preorder_index

from conftest import report
from oracles import edge_adjacent, hilbert_2d_order, reference_order

SCHEMES = ("bubble", "ring")


def test_criterion_1_gray_code_exhaustive():
    started = time.perf_counter()
    for n in range(1, 11):
        size = 1 << n
        ranks = np.arange(size, dtype=np.uint64)
        codes = ranks ^ (ranks >> np.uint64(1))
        # against the library, exhaustively
        lib = np.array([curve.gray_encode(int(i), n) for i in range(size)], np.uint64)
        assert (codes == lib).all()
        assert np.unique(codes).size == size  # bijective
        flips = codes ^ np.roll(codes, -1)  # includes the wrap pair
        assert (np.bitwise_count(flips) == 1).all()
        decoded = np.array([curve.gray_decode(int(g), n) for g in codes], np.uint64)
        assert (decoded == ranks).all()
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    report("1", f"gray bijectivity+adjacency n<=10 in {elapsed:.2f}s")


def test_criterion_2_curve_validity():
    started = time.perf_counter()
    grid = [(2, k) for k in range(1, 6)] + [(3, k) for k in range(1, 4)] + [(4, 1), (4, 2)]
    for scheme in SCHEMES:
        for n, k in grid:
            cells = [c.cell for c in curve.curve_order(n, k, scheme)]
            assert len(set(cells)) == len(cells) == 1 << (n * k)  # bijection
            for a, b in zip(cells, cells[1:]):
                assert edge_adjacent(a, b)
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0
    report("2", f"bijection+adjacency on the (n,k) grid, both schemes, {elapsed:.1f}s")


def test_criterion_3_classical_2d_equivalence():
    for scheme in SCHEMES:
        for k in range(1, 6):
            got = [c.cell for c in curve.curve_order(2, k, scheme)]
            assert got == hilbert_2d_order(k)
    report("3", "2D curve equals the brute-force oracle, k<=5, both schemes")


def test_criterion_4_order_consistency_oracle():
    started = time.perf_counter()
    rng = np.random.default_rng(404)
    checked = 0
    for trial in range(50):
        n = int(rng.choice([2, 3, 4]))
        num = 5000 if trial < 4 else int(rng.integers(50, 3000))
        s = int(rng.choice([1, 2, 4]))
        scheme = SCHEMES[trial % 2]
        cloud = PointCloud.from_points(rng.random((num, n)))
        tree = build_scaled(cloud, s, scheme)
        got = preorder_index(tree).ids.tolist()
        assert got == reference_order(cloud.points, cloud.ids, curve.Scheme.parse(scheme))
        checked += 1
    elapsed = time.perf_counter() - started
    assert checked == 50 and elapsed < 60.0
    report("4", f"50 clouds match the static-key sort oracle in {elapsed:.1f}s")


def test_criterion_5_k_formula_and_spot_values():
    assert static_k(2_450_000, 1, 8) == 3
    assert static_k(4096, 1, 3) == 4
    assert static_k(1000, 2, 4) == 3
    assert omega((10, 4, 1)) == 0.25
    assert omega((4, 4, 0)) == 0.0
    assert omega((64, 1, 1)) == 1.0
    assert capacity_Omega((10, 4, 1)) == 12.5
    assert capacity_Omega((4, 4, 0)) == 4.0
    orthants = PointCloud.from_points([[0.75, 0.25], [0.25, 0.25], [0.25, 0.75], [0.75, 0.75]])
    assert capacity_ratio(orthants, 1, "ring") == 1.0
    dup = PointCloud.from_points(np.tile([[0.4, 0.2]], (50, 1)))
    assert capacity_ratio(dup, 1, "bubble") < 0.05
    report("5", "static_k at census scale and metric spot values exact")


def test_criterion_6_rho_bounds_and_direction():
    started = time.perf_counter()
    rng = np.random.default_rng(606)
    families = ("uniform", "lognormal-cluster", "pareto-cluster", "mixture")
    checked = 0
    for i in range(100):
        spec = SynthSpec(
            families[i % 4],
            n=int(rng.integers(1, 7)),
            count=int(rng.integers(500, 8000)),
            seed=9000 + i,
            clusters=int(rng.integers(2, 40)),
        )
        cloud = generate(spec)
        s = int(rng.choice([1, 2, 4, 8]))
        rho = local_sparsity_rho(cloud, s, SCHEMES[i % 2])
        assert -1e-9 <= rho <= 1.0 + 1e-9
        checked += 1
    assert checked == 100

    pair_wins = 0
    for seed in range(20):
        uni = generate(SynthSpec("uniform", 2, 100_000, seed=7000 + seed))
        clu = generate(SynthSpec("lognormal-cluster", 2, 100_000, seed=7000 + seed))
        if all(
            local_sparsity_rho(clu, s, "ring") > local_sparsity_rho(uni, s, "ring")
            for s in (1, 2, 4)
        ):
            pair_wins += 1
    elapsed = time.perf_counter() - started
    assert pair_wins >= 19  # >= 95% of 20 pairs
    assert elapsed < 300.0
    report("6", f"rho in [0,1] on 100 clouds; direction {pair_wins}/20 pairs in {elapsed:.0f}s")


def test_criterion_7_capacity_ratio_direction_at_scale():
    started = time.perf_counter()
    cloud = generate(SynthSpec("uniform", 8, 100_000, seed=77))
    values = {}
    for s in (1, 2, 4, 8, 16, 32, 64):
        m = compute_metrics(cloud, s, "ring")
        values[s] = m.R
        assert m.R < 1.0
    elapsed = time.perf_counter() - started
    assert elapsed < 300.0
    report("7", "R<1 for s=1..64: " + " ".join(f"s{s}={r:.3f}" for s, r in values.items()))


@pytest.mark.perf
def test_criterion_8_build_performance():
    cloud = generate(SynthSpec("uniform", 8, 2_500_000, seed=88))
    started = time.perf_counter()
    tree = build_scaled(cloud, 1, "ring")
    elapsed = time.perf_counter() - started
    peak_gb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024**2
    assert tree.stats().nonempty <= 2_500_000
    assert preorder_index(tree).ids.size == 2_500_000
    assert elapsed < 120.0
    assert peak_gb < 8.0
    report("8", f"2.5M x 8D s=1 build in {elapsed:.1f}s, peak rss {peak_gb:.2f} GB ({tree.engine} engine)")


def test_criterion_9_stats_recovery_and_comparison():
    started = time.perf_counter()
    rng = np.random.default_rng(99)
    pareto = 1.0 * (1.0 - rng.random(50_000)) ** (-1.0 / 1.5)
    pl = fit_powerlaw(pareto)
    assert abs(pl.alpha - 2.5) < 0.05

    lognormal = rng.lognormal(0.5, 1.2, 50_000)
    ln = fit_lognormal(lognormal)
    assert abs(ln.mu - 0.5) < 0.02 and abs(ln.sigma - 1.2) < 0.02

    comp_ln = compare_models(lognormal, fit_lognormal(lognormal), fit_powerlaw(lognormal, x_min=float(lognormal.min())))
    assert comp_ln.log_likelihood_ratio > 0 and comp_ln.p_value < 0.05
    comp_pl = compare_models(pareto, fit_lognormal(pareto), fit_powerlaw(pareto, x_min=1.0))
    assert comp_pl.log_likelihood_ratio < 0 and comp_pl.p_value < 0.05
    fast_part = time.perf_counter() - started
    assert fast_part < 120.0

    calib = np.random.default_rng(991).lognormal(0.0, 1.0, 10_000)
    boot_start = time.perf_counter()
    p = gof_bootstrap(calib, fit_lognormal(calib), replicates=1000, seed=17)
    boot = time.perf_counter() - boot_start
    assert p > 0.1
    assert boot < 600.0
    report("9", f"recoveries+signs in {fast_part:.1f}s; calibration p={p:.2f} ({boot:.0f}s/1000 reps)")


def test_criterion_10_cli_determinism(tmp_path):
    runner = CliRunner()

    def run(*args):
        res = runner.invoke(cli_main, [str(a) for a in args], catch_exceptions=False)
        assert res.exit_code == 0, res.output
        return res.output

    cloud_csv = tmp_path / "cloud.csv"
    commands = {
        "synth": ["synth", "--dist", "lognormal-cluster", "--n", 2, "--count", 4000, "--seed", 5, "--out", cloud_csv],
        "build": ["build", "--input", cloud_csv, "--bucket", 2, "--out", tmp_path / "tree.json"],
        "metrics": ["metrics", "--input", cloud_csv, "--bucket-sweep", "1,2", "--scheme", "both"],
        "order": ["order", "--input", cloud_csv, "--bucket", 2],
        "tail": ["tail", "--input", cloud_csv, "--bucket", 1],
        "fit": ["fit", "--input", cloud_csv, "--bucket", 1, "--replicates", 100, "--seed", 5],
    }
    artifacts = (tmp_path / "cloud.csv", tmp_path / "tree.json", tmp_path / "tree.json.report.json")
    for name, argv in commands.items():
        first_out = run(*argv)
        first_files = {p: p.read_bytes() for p in artifacts if p.exists()}
        second_out = run(*argv)
        assert second_out == first_out, name
        for p, content in first_files.items():
            assert p.read_bytes() == content, (name, p)
    report("10", "all six subcommands byte-identical across reruns")

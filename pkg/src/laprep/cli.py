"""Command-line entry point: ``laprep <command>``."""

from __future__ import annotations

import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from .bench.plots import render_plots
from .bench.results import write_csv
from .bench.sweep import SweepConfig, run_k_sweep, run_wall_sweep
from .bench.verify import verify as run_verify
from .chain import solve_poisson
from .gdo import GdoConfig, learn_representation, write_trace
from .gridworld import GridEnv, build_grid, carve_walls, to_chain
from .spectral import build_laplacian, spectrum as compute_spectrum


def _load_chain(env_path):
    env = GridEnv.load(env_path)
    chain = to_chain(env)
    sol = solve_poisson(chain.P, chain.r)
    L = build_laplacian(chain.P, sol.phi)
    return env, chain, sol, L


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose):
    """Laplacian representations of gridworld MDPs and their error bounds."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")


@main.command()
@click.option("--rows", type=int, default=15, show_default=True)
@click.option("--cols", type=int, default=15, show_default=True)
@click.option("--walls", type=int, default=0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def grid(rows, cols, walls, seed, out):
    """Build a gridworld, carve walls, and save it as JSON."""
    env = carve_walls(build_grid(rows, cols), walls, seed)
    env.save(out)
    click.echo(f"wrote {out}: {rows}x{cols}, {env.walls} walls")


@main.command()
@click.option("--env", "env_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def spectrum(env_path, out):
    """Write the Laplacian spectrum of an environment's uniform-policy chain."""
    _, _, sol, L = _load_chain(env_path)
    bundle = compute_spectrum(L, sol.phi)
    with open(out, "w", newline="") as fh:
        fh.write("# format_version=1\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "lambda"])
        for i, lam in enumerate(bundle.lambdas, start=1):
            writer.writerow([i, format(float(lam), ".12g")])
    click.echo(f"wrote {out}: lambda_2 = {bundle.lambdas[1]:.6g}")


@main.command()
@click.option("--env", "env_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--k", type=int, default=20, show_default=True)
@click.option("--beta", type=float, default=5.0, show_default=True)
@click.option("--step-size", type=float, default=0.05, show_default=True)
@click.option("--iters", type=int, default=2000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--mode", type=click.Choice(["full", "stochastic"]), default="full", show_default=True)
@click.option("--batch", type=int, default=256, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--trace-out", type=click.Path(dir_okay=False), help="Optional CSV of (iteration, loss).")
def gdo(env_path, k, beta, step_size, iters, seed, mode, batch, out, trace_out):
    """Learn Phi-orthonormal GDO features for an environment."""
    env, chain, sol, L = _load_chain(env_path)
    bundle = compute_spectrum(L, sol.phi)
    cfg = GdoConfig(k=k, beta=beta, step_size=step_size, iterations=iters, seed=seed, mode=mode, batch=batch)
    rep = learn_representation(chain.P, L, sol.phi, bundle.lambdas, cfg)
    with open(out, "w", newline="") as fh:
        fh.write(f"# format_version=1 k={k} epsilon={rep.epsilon:.12g}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row", "col"] + [f"psi_{i + 1}" for i in range(k)])
        for s, (r, c) in enumerate(chain.state_labels):
            writer.writerow([r, c] + [format(float(x), ".12g") for x in rep.Psi_hat[s]])
    if trace_out:
        write_trace(rep.optimizer_trace, trace_out)
    click.echo(f"wrote {out}: epsilon = {rep.epsilon:.6g}")


def _sweep_config(config_path, out, workers):
    cfg = SweepConfig.load(config_path) if config_path else SweepConfig()
    changes = {}
    if out:
        changes["output_path"] = out
    if workers:
        changes["workers"] = workers
    return replace(cfg, **changes)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
@click.option("--workers", type=int)
def sweep(config_path, out, workers):
    """Wall sweep: one record per (w, seed, k) cell."""
    cfg = _sweep_config(config_path, out, workers)
    records = run_wall_sweep(cfg)
    write_csv(records, cfg.output_path, cfg)
    failed = sum(r.error is not None for r in records)
    click.echo(f"wrote {cfg.output_path}: {len(records)} records, {failed} failed cells")


@main.command(name="ksweep")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
@click.option("--workers", type=int)
def ksweep(config_path, out, workers):
    """k sweep: walls fixed, k ranging (default 1..60)."""
    cfg = _sweep_config(config_path, out, workers)
    if not config_path:
        cfg = replace(cfg, walls=(10,), seeds=(0,))
    records = run_k_sweep(cfg)
    write_csv(records, cfg.output_path, cfg)
    click.echo(f"wrote {cfg.output_path}: {len(records)} records")


main.add_command(ksweep, name="kswep")


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
def plot(in_path, out_dir):
    """Render the five SVG figures from a results CSV."""
    for path in render_plots(in_path, out_dir):
        click.echo(f"wrote {path}")


@main.command()
@click.option("--fast", is_flag=True, help="Fewer random trials per property.")
def verify(fast):
    """Run every property suite; exit non-zero on any failure."""
    sys.exit(run_verify(fast=fast, out=click.echo))


if __name__ == "__main__":
    main()

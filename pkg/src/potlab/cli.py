"""Command-line entry points: configuration-driven runs and parameter sweeps.

Exit codes: 0 all gated checks passed, 1 at least one gated check failed
(failures listed on stderr), 2 configuration error.
"""

from __future__ import annotations

import dataclasses
import sys

import click

from .checks import RESULT_IDS
from .config import _REQUIRED, load_config
from .errors import ConfigError, LadderTooShortError, PotlabError


def _print_result_list():
    click.echo("result_id        required case keys (besides id/result/n/npts/box)")
    for rid in RESULT_IDS:
        needed = sorted(_REQUIRED[rid]) or ["-"]
        click.echo(f"{rid:<16} {', '.join(needed)}")


@click.group()
def main():
    """Inequality and identity checks for potential-theoretic operators."""


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON run configuration.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory (overrides the config).")
@click.option("--seed", type=int, default=None, help="Global seed override.")
@click.option("--probe", is_flag=True, help="Allow critical-exponent probes.")
@click.option("--refine", is_flag=True, help="Also run every case at 2N.")
@click.option("--jobs", type=int, default=None, help="Parallel case workers.")
@click.option("--list", "list_results", is_flag=True,
              help="List result ids and required parameters.")
def run(config_path, out_dir, seed, probe, refine, jobs, list_results):
    """Execute a suite of inequality cases from a JSON config."""
    if list_results:
        _print_result_list()
        return
    if config_path is None:
        raise click.UsageError("--config is required (or use --list)")
    try:
        cfg = load_config(config_path)
        cfg = dataclasses.replace(
            cfg,
            out_dir=out_dir if out_dir is not None else cfg.out_dir,
            seed=seed if seed is not None else cfg.seed,
            probe_mode=probe or cfg.probe_mode,
            refine=refine or cfg.refine,
            jobs=jobs if jobs is not None else cfg.jobs,
        )
    except (ConfigError, OSError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    from .runner import run_suite
    try:
        code, failures = run_suite(cfg)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    for line in failures:
        click.echo(f"FAIL {line}", err=True)
    click.echo(f"reports written to {cfg.out_dir}")
    sys.exit(code)


_SWEEP_RESULTS = ("T3ii_sharpness", "T1_necessity", "T3i", "CONJ_PROBE")


@main.command()
@click.option("--result", "result_id", type=click.Choice(_SWEEP_RESULTS),
              required=True)
@click.option("--n", "dim", type=int, default=2, show_default=True)
@click.option("--npts", type=int, default=64, show_default=True)
@click.option("--box", type=float, default=16.0, show_default=True)
@click.option("--ladder", required=True,
              help="Comma-separated parameter ladder (rho or eps values).")
@click.option("--q", type=float, default=1.0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default="sweep.csv",
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--probe", is_flag=True)
def sweep(result_id, dim, npts, box, ladder, q, out_path, seed, probe):
    """Run one ladder sweep and write a plot-ready trend CSV."""
    import numpy as np

    from . import checks
    from .fields import make_grid
    from .kernels import AbsPowerCombo
    from .runner import fmt_number

    try:
        values = [float(tok) for tok in ladder.split(",") if tok.strip()]
        if len(values) < 3:
            raise LadderTooShortError("ladder needs at least 3 entries")
        grid = make_grid(dim, box, npts)
        if result_id == "T3ii_sharpness":
            rep = checks.theorem3ii_sharpness(grid, values)
            xlabel = "rho"
        elif result_id == "T1_necessity":
            phi = AbsPowerCombo([1.0] * dim, q)
            rep = checks.theorem1_necessity_probe(phi, q, values, grid)
            xlabel = "rho"
        elif result_id == "T3i":
            rng = np.random.default_rng(seed)
            from .runner import _vector_bump_with_mean
            g = _vector_bump_with_mean(grid, rng)
            rep = checks.theorem3i_limit_check(g, values)
            xlabel = "eps"
        else:
            if not probe:
                raise ConfigError("CONJ_PROBE sweeps need --probe")
            rep = checks.conjecture_probe([[1.0, 0.0], [0.0, -1.0]], values, grid)
            xlabel = "rho"
    except (ConfigError, LadderTooShortError, PotlabError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    lines = [f"{xlabel},value"]
    for x, v in zip(rep.xs, rep.values):
        lines.append(f"{fmt_number(x)},{fmt_number(v)}")
    diffs = np.diff(rep.values)
    mono = "increasing" if np.all(diffs > 0) else \
        "decreasing" if np.all(diffs < 0) else "mixed"
    lines.append(f"# monotonicity: {mono}")
    for key in ("fit_intercept", "fit_slope", "fit_r2", "limit", "bound",
                "constant", "target"):
        if key in rep.extra:
            lines.append(f"# {key}: {fmt_number(rep.extra[key])}")
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    click.echo(f"sweep written to {out_path}")


if __name__ == "__main__":
    main()

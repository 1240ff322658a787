"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Tolerances are pinned here and match the per-checker gates; grids follow
the stated sizes (n=2 at N=64/128, n=3 at N=24). Run with `pytest -s
tests/test_acceptance.py` to see the per-criterion lines.
"""

import dataclasses
import json
import math
import time

import mpmath as mp
import numpy as np

from potlab import checks
from potlab.config import parse_config
from potlab.fields import (FieldRecipe, ScalarField, generate, make_grid,
                           random_dipole_ensemble, random_scalar_bumps)
from potlab.kernels import AbsPowerCombo, matrix_kernel, matrix_kernel_form
from potlab.runner import (_asymmetric_dipole, _divfree_field, _mixed_mean_zero,
                           conditioned_dipole_ensemble, csv_body_without_timing,
                           run_suite)
from potlab.specfun import bessel_k1, gamma_fn, paper_constant
from potlab.spectral import (dft, idft, plancherel_residual, sobolev_norm_homog)

mp.mp.dps = 30


def _report(number, ok, detail):
    print(f"\nACCEPTANCE {number:02d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def test_criterion_01_spectral_foundation():
    t0 = time.perf_counter()
    grid = make_grid(2, 16.0, 64)
    rng = np.random.default_rng(1)
    worst_pl, worst_rt = 0.0, 0.0
    for _ in range(5):
        f = ScalarField(grid, rng.normal(size=grid.shape))
        worst_pl = max(worst_pl, plancherel_residual(f))
        back = idft(dft(f))
        worst_rt = max(worst_rt, float(np.abs(back.values - f.values).max()
                                       / np.abs(f.values).max()))
    gauss = generate(FieldRecipe("gaussian_bump", {"width": 1.0}), grid)
    nsq = sobolev_norm_homog(gauss, 0.0) ** 2
    gauss_rel = abs(nsq - 4 * math.pi**3) / (4 * math.pi**3)
    elapsed = time.perf_counter() - t0
    ok = worst_pl <= 1e-10 and worst_rt <= 1e-12 and gauss_rel <= 0.01 \
        and elapsed < 5.0
    _report(1, ok, f"plancherel {worst_pl:.2e}, roundtrip {worst_rt:.2e}, "
                   f"gaussian H0 rel {gauss_rel:.2e}, {elapsed:.2f}s")


def test_criterion_02_theorem3_identity():
    t0 = time.perf_counter()
    worst, dual_worst = 0.0, 0.0
    for (n, npts, box) in ((2, 64, 16.0), (3, 24, 12.0)):
        grid = make_grid(n, box, npts)
        rng = np.random.default_rng(1000 + n)
        ker = matrix_kernel("M", n)
        for i in range(20):
            g = conditioned_dipole_ensemble(grid, rng)
            rep = checks.theorem3_identity_check(g)
            worst = max(worst, rep.extra["rel_diff"])
            if i < 3:
                a = matrix_kernel_form(g, ker, path="direct")
                b = matrix_kernel_form(g, ker, path="fft")
                dual_worst = max(dual_worst, abs(a - b) / abs(a))
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.02 and dual_worst <= 1e-8 and elapsed < 120.0
    _report(2, ok, f"identity rel diff {worst:.4f} (40 fields), "
                   f"dual-path {dual_worst:.2e}, {elapsed:.1f}s")


def test_criterion_03_theorem3iii_bound():
    worst = 0.0
    for (n, npts, box) in ((2, 64, 16.0), (3, 24, 12.0)):
        grid = make_grid(n, box, npts)
        rng = np.random.default_rng(2000 + n)
        for _ in range(50):
            rep = checks.theorem3iii_check(random_dipole_ensemble(grid, rng))
            worst = max(worst, rep.ratio)
    c3 = paper_constant("thm3iii_const", 3)
    const_gap = abs(c3 - 1 / (4 * math.pi**2))
    cross_gap = abs(c3 - paper_constant("thm4_const", 3))
    ok = worst <= 1.02 and const_gap <= 1e-12 and cross_gap <= 1e-12
    _report(3, ok, f"max ratio {worst:.4f} over 100 fields, "
                   f"constant gap {const_gap:.1e}, thm4 cross-check {cross_gap:.1e}")


def test_criterion_04_sharpness_sweep():
    t0 = time.perf_counter()
    grid = make_grid(2, 16.0, 128)
    rep = checks.theorem3ii_sharpness(grid, checks.DEFAULT_SHARPNESS_RHOS)
    elapsed = time.perf_counter() - t0
    ok = rep.passed and elapsed < 300.0
    _report(4, ok, f"ratios {[f'{v:.4f}' for v in rep.values]} vs target "
                   f"{rep.extra['target']:.4f} (monotone: "
                   f"{rep.extra['increasing']}), {elapsed:.1f}s")


def test_criterion_05_corollary_bound():
    worst = 0.0
    for (n, npts, box) in ((2, 64, 16.0), (3, 24, 12.0)):
        grid = make_grid(n, box, npts)
        rng = np.random.default_rng(3000 + n)
        for _ in range(50):
            rep = checks.corollary_check(random_scalar_bumps(grid, rng))
            worst = max(worst, rep.ratio)
    ok = worst <= 1.02
    _report(5, ok, f"max ratio {worst:.4f} over 100 scalar bumps")


def test_criterion_06_convolution_identities():
    worst_cr, worst_cre = 0.0, 0.0
    for (n, npts, box) in ((2, 64, 16.0), (3, 24, 12.0)):
        grid = make_grid(n, box, npts)
        rng = np.random.default_rng(4000 + n)
        for _ in range(10):
            worst_cr = max(worst_cr, checks.cr_identity_check(
                random_dipole_ensemble(grid, rng)).extra["residual"])
            worst_cre = max(worst_cre, checks.cre_identity_check(
                random_scalar_bumps(grid, rng)).extra["residual"])
    ok = worst_cr <= 0.03 and worst_cre <= 0.03
    _report(6, ok, f"cr residual {worst_cr:.4f}, cre residual {worst_cre:.4f} "
                   f"(20 fields each)")


def test_criterion_07_theorem1():
    grid = make_grid(2, 16.0, 64)
    phi0 = AbsPowerCombo([1.0, -1.0], 1.0)
    ring = generate(FieldRecipe("radial_ring", {"radius": 2.0, "width": 0.5}), grid)
    rep = checks.theorem1_check(ring, phi0, 1.0)
    sym_ok = rep.lhs <= 1e-8 * rep.rhs

    drifts = []
    for seed in range(5):
        vals = []
        for npts in (64, 128):
            g = make_grid(2, 16.0, npts)
            rng = np.random.default_rng(8000 + seed)
            vals.append(checks.theorem1_check(_asymmetric_dipole(g, rng),
                                              phi0, 1.0).ratio)
        drifts.append(abs(vals[1] - vals[0]) / vals[0])
    suff_ok = max(drifts) <= 0.10

    probe_grid = make_grid(2, 16.0, 256)
    rhos = [0.6, 0.42, 0.3, 0.21, 0.15]
    hot = checks.theorem1_necessity_probe(AbsPowerCombo([1.0, 1.0], 1.0), 1.0,
                                          rhos, probe_grid)
    cold = checks.theorem1_necessity_probe(phi0, 1.0, rhos, probe_grid)
    cold_growth = max(map(abs, cold.values)) / max(min(map(abs, cold.values)), 1e-30)
    nec_ok = hot.extra["increasing"] and hot.extra["fit_r2"] > 0.95 \
        and cold_growth <= 1.3
    ok = sym_ok and suff_ok and nec_ok
    _report(7, ok, f"symmetry lhs/rhs {rep.lhs / rep.rhs:.1e}, "
                   f"refine drift {max(drifts):.3f}, necessity R2 "
                   f"{hot.extra['fit_r2']:.3f} (control growth {cold_growth:.2f})")


def test_criterion_08_divfree_suite():
    grid = make_grid(2, 16.0, 64)
    rng = np.random.default_rng(7)
    f = _divfree_field(grid, rng)
    t2 = checks.theorem2_check(f, 1.0)
    div_ok = t2.extra["div_residual"] <= 1e-10
    lem = checks.lemma10x_check(f, 1.0)
    recon_ok = lem.extra["rowdiv_reconstruction_rel"] <= 1e-8

    drifts = []
    for seed in range(3):
        for builder, kw in ((checks.theorem2_check, {"q": 1.0}),
                            (checks.lemma10x_check, {"q": 1.0}),
                            (checks.prop1_check, {"q": 1.5}),
                            (checks.prop2_check, {})):
            vals = []
            for npts in (48, 96):
                g = make_grid(2, 16.0, npts)
                r = np.random.default_rng(7000 + seed)
                fld = _divfree_field(g, r) if builder in (
                    checks.theorem2_check, checks.lemma10x_check) \
                    else _mixed_mean_zero(g, r)
                args = (fld, kw["q"]) if "q" in kw else (fld,)
                vals.append(builder(*args).ratio)
            drifts.append(abs(vals[1] - vals[0]) / vals[0])
    drift_ok = max(drifts) <= 0.10

    flux = checks.flux_recursion_check(f, 1.0)
    flux_ok = flux.extra["recursion_rel_err"] <= 0.02 \
        and flux.extra["green_rel_err"] <= 0.02
    ok = div_ok and recon_ok and drift_ok and flux_ok
    _report(8, ok, f"div residual {t2.extra['div_residual']:.1e}, "
                   f"reconstruction {lem.extra['rowdiv_reconstruction_rel']:.1e}, "
                   f"max drift {max(drifts):.3f}, flux errs "
                   f"{flux.extra['recursion_rel_err']:.1e}/"
                   f"{flux.extra['green_rel_err']:.1e}")


def test_criterion_09_theorem4():
    grid = make_grid(3, 12.0, 24)
    rng = np.random.default_rng(5000)
    worst = 0.0
    for _ in range(20):
        w, f, g = checks.theorem4_build_triple(grid, rng)
        worst = max(worst, checks.theorem4_check(w, f, g).ratio)
    w, f, g = checks.theorem4_build_triple(grid, rng, zero_g=True)
    degen = checks.theorem4_check(w, f, g)
    ok = worst <= 1.02 and degen.passed and degen.lhs <= 1e-8 * degen.rhs
    _report(9, ok, f"max ratio {worst:.4f} over 20 triples, degenerate lhs "
                   f"{degen.lhs:.2e} vs scale {degen.rhs:.2e}")


def test_criterion_10_special_functions():
    rng = np.random.default_rng(3)
    rec_ok = all(abs(gamma_fn(z + 1) - z * gamma_fn(z)) <= 1e-12 * gamma_fn(z + 1)
                 for z in rng.uniform(0.1, 20.0, 200))
    oracle = float(mp.quad(lambda s: mp.exp(-mp.cosh(s)) * mp.cosh(s), [0, 20]))
    k1_ok = abs(bessel_k1(1.0) - oracle) / oracle < 1e-10
    small_ok = abs(1e-4 * bessel_k1(1e-4) - 1.0) < 1e-3
    ts = np.geomspace(1e-3, 50, 500)
    bound_ok = bool(np.all(ts * bessel_k1(ts) <= 1.0 + 1e-12))

    worst = 0.0
    for (n, npts, box) in ((2, 64, 16.0), (3, 24, 12.0)):
        grid = make_grid(n, box, npts)
        r = np.random.default_rng(6000 + n)
        for _ in range(10):
            worst = max(worst, checks.remark5_check(
                random_dipole_ensemble(grid, r)).extra["residual"])
    ok = rec_ok and k1_ok and small_ok and bound_ok and worst <= 0.03
    _report(10, ok, f"gamma recurrence ok, K1 oracle ok, tK1 bounded, "
                    f"remark5 residual {worst:.4f}")


def test_criterion_11_determinism(tmp_path):
    base = {
        "seed": 99,
        "cases": [
            {"id": "a", "result": "T3iii", "n": 2, "npts": 24, "box": 16.0,
             "count": 3},
            {"id": "b", "result": "COROLLARY", "n": 2, "npts": 24, "box": 16.0,
             "count": 3},
            {"id": "c", "result": "T2", "n": 2, "npts": 24, "box": 16.0,
             "q": 1.0, "count": 2},
            {"id": "d", "result": "REMARK5", "n": 2, "npts": 24, "box": 16.0,
             "count": 2},
        ],
    }
    bodies = []
    for tag, jobs in (("one", 1), ("two", 1), ("eight", 8)):
        cfg = parse_config(json.dumps(base))
        cfg = dataclasses.replace(cfg, out_dir=str(tmp_path / tag), jobs=jobs)
        run_suite(cfg)
        bodies.append(csv_body_without_timing(
            (tmp_path / tag / "report.csv").read_text()))
    ok = bodies[0] == bodies[1] == bodies[2]
    _report(11, ok, f"CSV bodies identical across 2 runs and jobs 1 vs 8 "
                    f"({len(bodies[0].splitlines()) - 1} rows)")

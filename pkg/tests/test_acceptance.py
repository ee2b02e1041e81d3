"""Acceptance criteria 1-12, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
Criteria 6 and 10 are marked slow.
"""
import math
from itertools import combinations

import numpy as np
import pytest

from ptaa import (
    LatticeConfig,
    NoCrossingError,
    Phase,
    PotentialTerm,
    SweepJob,
    boundedness_check,
    breaking_indices,
    build_hamiltonian,
    classify_interaction,
    eigenvalues,
    find_threshold,
    growth_rate,
    is_reentrant,
    map_boundary,
    phase_of,
    propagate,
    reentrance_scan,
    run_sweep,
    scaling_fit,
    site_state,
)
from ptaa.analysis import BISECTION_WIDTH
from ptaa.lattice import reference_energies
from ptaa.sweep import fraction_grid
from ptaa.twopotential import scaled_axis, single_thresholds

LAT20 = LatticeConfig(20)


def test_c01_dimer_oracle(criterion):
    worst = 0.0
    for beta in (0.1, 0.25, 0.5):
        g = find_threshold(LatticeConfig(2), 0.0, beta).gamma_pt
        worst = max(worst, abs(g - 1.0 / math.sin(math.pi * beta)))
    assert criterion(1, "N=2 threshold equals J/sin(pi beta)", worst <= 1e-5, f"max err {worst:.2e} J")


def test_c02_hermitian_limit(criterion):
    worst = 0.0
    for N in (2, 3, 20, 100):
        spec = eigenvalues(build_hamiltonian(LatticeConfig(N)))
        err = np.max(np.abs(spec.values - reference_energies(LatticeConfig(N)))) / spec.scale
        worst = max(worst, err)
    assert criterion(2, "gamma=0 spectra equal -2J cos(p pi/(N+1))", worst <= 1e-12, f"max err {worst:.2e} scale")


def test_c03_breaking_staircase(criterion):
    pairs = {k: breaking_indices(LAT20, 0.0, k / 40) for k in range(1, 21)}
    edge = all(pairs[k] == {(1, 2), (19, 20)} for k in (1, 2, 3))
    at_020 = (4, 5) in pairs[8]
    at_025 = (5, 6) in pairs[10]
    lows = [min(pairs[k])[0] for k in range(1, 21)]
    monotone = all(a <= b for a, b in zip(lows, lows[1:]))
    ok = edge and at_020 and at_025 and monotone
    assert criterion(3, "N=20 breaking-pair staircase", ok, f"lowest index by k/40: {lows}")


def test_c04_threshold_scaling(criterion):
    pts = [(N, find_threshold(LatticeConfig(N), 0.0, 0.3, with_pairs=False).gamma_pt) for N in (50, 100, 200, 400)]
    fit = scaling_fit(pts)
    ok = abs(fit.exponent + 1.0) <= 0.05
    assert criterion(4, "gamma_PT ~ C/N at beta=0.3", ok, f"exponent {fit.exponent:.4f}, C {fit.C_beta:.3f}")


def test_c05_small_beta_plateau(criterion):
    g = find_threshold(LatticeConfig(50), 0.0, 1e-4, with_pairs=False).gamma_pt
    ok = 0.2 <= g <= 0.4
    assert criterion(5, "N=50, beta=1e-4 threshold in [0.2, 0.4] J", ok, f"gamma_PT = {g:.4f} J")


@pytest.mark.slow
def test_c06_extrema_structure(criterion, tmp_path):
    N = 50
    step = 1 / 2500
    job = SweepJob("threshold-vs-beta", {"N": [N], "V0": [0.0], "beta": fraction_grid(2500)}, tmp_path / "c6.jsonl")
    recs = run_sweep(job)
    beta = np.array([r["inputs"]["beta"] for r in recs])
    gam = np.array([r["outputs"]["gamma_pt"] for r in recs], dtype=float)
    inner = np.arange(1, len(beta) - 1)
    minima = beta[inner[(gam[inner] < gam[inner - 1]) & (gam[inner] < gam[inner + 1])]]
    maxima = beta[inner[(gam[inner] > gam[inner - 1]) & (gam[inner] > gam[inner + 1])]]

    def hits(targets, found):
        return sum(found.size > 0 and np.min(np.abs(found - t)) <= step * (1 + 1e-9) for t in targets)

    min_hits = hits([k / N for k in range(1, N)], minima)
    max_hits = hits([(2 * k + 1) / (2 * N) for k in range(1, N - 1)], maxima)
    ok = min_hits >= 0.9 * (N - 1) and max_hits >= 0.9 * (N - 2)
    detail = f"minima near k/50: {min_hits}/49, interior maxima near (2k+1)/100: {max_hits}/48"
    assert criterion(6, "N=50 threshold extrema placement", ok, detail)


def test_c07_symmetries(criterion):
    tol = 2 * BISECTION_WIDTH
    worst_beta = worst_v0 = 0.0
    for beta in np.linspace(0.05, 0.45, 10):
        g = find_threshold(LAT20, 0.0, beta, with_pairs=False).gamma_pt
        worst_beta = max(worst_beta, abs(g - find_threshold(LAT20, 0.0, 1 - beta, with_pairs=False).gamma_pt))
        gp = find_threshold(LAT20, 0.5, beta, with_pairs=False).gamma_pt
        worst_v0 = max(worst_v0, abs(gp - find_threshold(LAT20, -0.5, beta, with_pairs=False).gamma_pt))
    odd = LatticeConfig(21)
    try:
        find_threshold(odd, 0.0, 0.5, gamma_max=10.0)
        odd_ok = False
    except NoCrossingError:
        odd_ok = phase_of(odd, [PotentialTerm(0.0, 10.0, 0.5)]).kind is Phase.SYMMETRIC
    ok = worst_beta <= tol and worst_v0 <= tol and odd_ok
    detail = f"|d beta->1-beta| {worst_beta:.1e}, |d V0->-V0| {worst_v0:.1e}, N=21 beta=1/2 real to 10J: {odd_ok}"
    assert criterion(7, "threshold symmetries", ok, detail)


def test_c08_cooperative_line(criterion):
    pb = map_boundary(LAT20, 0.04, 0.08)
    dev = float(np.max(np.abs(pb.boundary_points.sum(axis=1) - 1.0)))
    ok = dev <= 0.05 and len(pb.boundary_points) > 0
    assert criterion(8, "(0.04, 0.08) boundary is x + y = 1", ok, f"max |x+y-1| = {dev:.4f}")


def _reentrant_cut(beta1, beta2):
    for y in scaled_axis(3.0, 121):
        ivs = reentrance_scan(LAT20, beta1, beta2, y)
        if is_reentrant(ivs):
            return y, ivs
    return None, None


def test_c09_reentrance(criterion):
    found = {pair: _reentrant_cut(*pair)[0] for pair in ((0.20, 0.25), (0.20, 0.24))}
    ok = all(y is not None for y in found.values())
    detail = ", ".join(f"{p}: y={y}" for p, y in found.items())
    assert criterion(9, "Broken -> Symmetric -> Broken horizontal cut", ok, detail)


@pytest.mark.slow
def test_c10_interaction_matrix(criterion):
    rows = []
    agree = True
    for b1, b2 in combinations((0.05, 0.20, 0.25, 0.30), 2):
        kind = classify_interaction(LAT20, b1, b2)
        reentrant = map_boundary(LAT20, b1, b2).reentrant
        agree &= (kind.value == "competitive") == reentrant
        rows.append(f"{b1}/{b2} {kind.value[:4]} {'re' if reentrant else 'line'}")
    assert criterion(10, "interaction class agrees with re-entrance", agree, "; ".join(rows))


def test_c11_dynamics_triptych(criterion):
    witness = map_boundary(LAT20, 0.20, 0.25).witness
    assert witness is not None and witness.varied == "gamma1"
    y, ivs = witness.fixed_value, witness.intervals
    s1, s2 = single_thresholds(LAT20, 0.20, 0.25)
    T, steps = 100.0, 2000
    regions = []
    for iv in ivs[:3]:
        x = 0.5 * (iv.lo + iv.hi)
        h = build_hamiltonian(LAT20, [PotentialTerm(0.0, x * s1, 0.20), PotentialTerm(0.0, y * s2, 0.25)])
        field = propagate(h, site_state(20, 10), T, steps)
        bounded, peak = boundedness_check(field)
        regions.append((iv.kind, bounded, peak, field, eigenvalues(h).max_abs_imag))
    pattern = [bounded for _, bounded, *_ in regions] == [False, True, False]
    rate_errs = []
    for kind, _, _, field, im in regions:
        if kind is Phase.BROKEN:
            slope = 2.0 * growth_rate(field, (T / 2, T))
            rate_errs.append(abs(slope - 2.0 * im) / (2.0 * im))
    herm = propagate(build_hamiltonian(LAT20, [PotentialTerm(0.5, 0.0, 0.2)]), site_state(20, 10), T, steps)
    norm_err = float(np.max(np.abs(herm.total - 1.0)))
    ok = pattern and max(rate_errs) <= 0.05 and norm_err <= 1e-8
    detail = (
        f"y={y}, peaks {[f'{r[2]:.3g}' for r in regions]}, rate err {max(rate_errs):.2%}, "
        f"hermitian norm err {norm_err:.1e}"
    )
    assert criterion(11, "unbounded / bounded / unbounded intensity", ok, detail)


def test_c12_determinism_and_resume(criterion, tmp_path):
    grid = {"N": [16, 20], "V0": [0.0, 0.2], "beta": [0.05, 0.2, 0.25, 0.4]}

    def job(name, workers):
        return SweepJob("indices-vs-beta", grid, tmp_path / name, workers=workers)

    run_sweep(job("w1.jsonl", 1))
    run_sweep(job("w4.jsonl", 4))
    run_sweep(job("resumed.jsonl", 3), limit=5)
    partial = (tmp_path / "resumed.jsonl").read_text().splitlines(keepends=True)
    (tmp_path / "resumed.jsonl").write_text("".join(partial) + partial[-1][:20])  # torn write
    run_sweep(job("resumed.jsonl", 2))
    ref = (tmp_path / "w1.jsonl").read_bytes()
    same_workers = ref == (tmp_path / "w4.jsonl").read_bytes()
    same_resume = ref == (tmp_path / "resumed.jsonl").read_bytes()
    ok = same_workers and same_resume
    detail = f"workers 1 vs 4 identical: {same_workers}; interrupted+resumed identical: {same_resume}"
    assert criterion(12, "sweep determinism and resume", ok, detail)

import math

import numpy as np
import pytest

from ptaa import (
    AnalysisError,
    LatticeConfig,
    NoCrossingError,
    ParameterError,
    Phase,
    PotentialTerm,
    average_gain,
    breaking_indices,
    build_hamiltonian,
    classify,
    conjugate_pairs,
    eigenvalues,
    find_threshold,
    phase_of,
    predict_extrema,
    scaling_fit,
)
from ptaa.analysis import BISECTION_WIDTH, average_gain_direct, reality_scale
from ptaa.eigensolver import Spectrum


@pytest.mark.parametrize("J", [1.0, 2.5])
@pytest.mark.parametrize("beta", [0.1, 0.25, 0.5, 0.8])
def test_dimer_threshold(J, beta):
    res = find_threshold(LatticeConfig(2, J), 0.0, beta)
    assert res.gamma_pt == pytest.approx(J / math.sin(math.pi * beta), abs=1e-6 * J)
    lo, hi = res.bracket
    assert hi - lo <= BISECTION_WIDTH * J
    assert res.gamma_pt == 0.5 * (lo + hi)
    assert res.presample_count == 256
    assert res.sorted_pairs() == [(1, 2)]


def test_bracket_straddles_transition():
    lat = LatticeConfig(20)
    res = find_threshold(lat, 0.0, 0.2)
    lo, hi = res.bracket
    assert phase_of(lat, [PotentialTerm(0.0, lo, 0.2)]).kind is Phase.SYMMETRIC
    assert phase_of(lat, [PotentialTerm(0.0, hi, 0.2)]).kind is Phase.BROKEN


def test_odd_lattice_half_beta_never_breaks():
    with pytest.raises(NoCrossingError) as info:
        find_threshold(LatticeConfig(21), 0.0, 0.5)
    assert info.value.gamma_max == 10.0


def test_gamma_max_too_small():
    with pytest.raises(NoCrossingError):
        find_threshold(LatticeConfig(20), 0.0, 0.3, gamma_max=0.01)


@pytest.mark.parametrize("kwargs", [dict(gamma_max=0.0), dict(presamples=0), dict(beta=1.2)])
def test_threshold_parameter_errors(kwargs):
    args = dict(lattice=LatticeConfig(10), V0=0.0, beta=0.3)
    args.update(kwargs)
    with pytest.raises(ParameterError):
        find_threshold(**args)


@pytest.mark.parametrize("N", [20, 21])
def test_v0_sign_and_beta_mirror(N):
    lat = LatticeConfig(N)
    for beta in (0.13, 0.3):
        g = find_threshold(lat, 0.4, beta, with_pairs=False).gamma_pt
        assert find_threshold(lat, -0.4, beta, with_pairs=False).gamma_pt == pytest.approx(g, abs=2e-6)
        # even N: 1-beta flips the real part, which the V0 sign symmetry absorbs
        assert find_threshold(lat, 0.4, 1 - beta, with_pairs=False).gamma_pt == pytest.approx(g, abs=2e-6)


def test_real_modulation_suppresses_threshold():
    lat = LatticeConfig(20)
    base = find_threshold(lat, 0.0, 0.2, with_pairs=False).gamma_pt
    assert find_threshold(lat, 0.5, 0.2, with_pairs=False).gamma_pt < base


def test_classify_uses_tolerance():
    spec = Spectrum(np.array([-1.0 - 1e-9j, -1.0 + 1e-9j, 1.0]), np.zeros(3), 2.0)
    assert classify(spec).kind is Phase.SYMMETRIC
    label = classify(spec, tol=1e-12)
    assert label.kind is Phase.BROKEN
    assert label.max_abs_im == pytest.approx(1e-9)
    assert label.tol_used == pytest.approx(2e-12)
    with pytest.raises(ParameterError):
        classify(spec, tol=0.0)


def test_reality_scale():
    terms = [PotentialTerm(-0.5, 0.2, 0.1), PotentialTerm(0.3, 0.4, 0.2)]
    assert reality_scale(1.5, terms) == pytest.approx(3.0 + 0.8 + 0.6)


def test_conjugate_pairs_rejects_unpaired():
    spec = Spectrum(np.array([-1.0, 0.5 + 0.1j, 0.6]), np.zeros(3), 2.0)
    with pytest.raises(AnalysisError):
        conjugate_pairs(spec, 1e-8)


def test_conjugate_pairs_rejects_mismatch():
    spec = Spectrum(np.array([0.5 - 0.1j, 0.5 + 0.3j]), np.zeros(2), 2.0)
    with pytest.raises(AnalysisError):
        conjugate_pairs(spec, 1e-8)


def test_conjugate_pairs_on_broken_spectrum():
    lat = LatticeConfig(20)
    g = find_threshold(lat, 0.0, 0.25, with_pairs=False).gamma_pt
    spec = eigenvalues(build_hamiltonian(lat, [PotentialTerm(0.0, 1.01 * g, 0.25)]))
    assert conjugate_pairs(spec, 1e-8 * 3) == [(5, 6), (15, 16)]


@pytest.mark.parametrize(
    "beta,expected",
    [(0.025, {(1, 2), (19, 20)}), (0.2, {(4, 5), (16, 17)}), (0.25, {(5, 6), (15, 16)}), (0.5, {(10, 11)})],
)
def test_breaking_indices(beta, expected):
    assert breaking_indices(LatticeConfig(20), 0.0, beta) == frozenset(expected)


def test_real_modulation_breaks_single_pair():
    pairs = breaking_indices(LatticeConfig(20), 0.5, 0.2)
    assert len(pairs) == 1


@pytest.mark.parametrize("N", [2, 7, 20, 21, 50])
def test_average_gain_closed_form(N):
    for beta in np.linspace(0.01, 0.99, 37):
        assert average_gain(N, beta) == pytest.approx(average_gain_direct(N, beta), abs=1e-12)


def test_even_average_gain_nonnegative():
    assert min(average_gain(20, b) for b in np.linspace(0.001, 0.999, 500)) >= -1e-15


def test_average_gain_rejects():
    with pytest.raises(ParameterError):
        average_gain(1, 0.2)
    with pytest.raises(ParameterError):
        average_gain(10, 0.0)


def test_extrema_small():
    ex = predict_extrema(4)
    assert ex.maxima == [1 / 8, 3 / 8, 5 / 8, 7 / 8]
    assert ex.minima == [1 / 4, 1 / 2, 3 / 4]
    assert ex.endpoint_maxima == [1 / 8, 7 / 8]
    assert ex.interior_maxima == [3 / 8, 5 / 8]


def test_extrema_counts_and_symmetry():
    ex = predict_extrema(20)
    assert len(ex.maxima) == 20 and len(ex.minima) == 19
    np.testing.assert_allclose(sorted(1 - np.array(ex.maxima)), ex.maxima, atol=1e-15)
    np.testing.assert_allclose(sorted(1 - np.array(ex.minima)), ex.minima, atol=1e-15)
    assert all(0 < b < 1 for b in ex.maxima + ex.minima)
    np.testing.assert_allclose(np.diff(predict_extrema(50).minima), 0.02, atol=1e-15)


def test_scaling_fit_exact_power_law():
    fit = scaling_fit([(n, 5.0 / n) for n in (50, 100, 200, 400)])
    assert fit.exponent == pytest.approx(-1.0, abs=1e-12)
    assert fit.C_beta == pytest.approx(5.0, rel=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.sizes == (50, 100, 200, 400)


def test_scaling_fit_needs_three_sizes():
    with pytest.raises(ParameterError):
        scaling_fit([(50, 0.1), (100, 0.05), (100, 0.05)])
    with pytest.raises(ParameterError):
        scaling_fit([(50, 0.1), (100, 0.0), (200, 0.02)])


def test_small_beta_plateau_at_inverse_square_period():
    # beta ~ 1/N^2 is where the linear-potential threshold sits near 0.3 J
    g = find_threshold(LatticeConfig(50), 0.0, 1 / 50**2, with_pairs=False).gamma_pt
    assert 0.2 <= g <= 0.4

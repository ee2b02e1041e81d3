"""PT phase classification, single-potential thresholds and breaking levels."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import _kernels
from .eigensolver import SWEEP_FACTOR, Spectrum, canonical_order, eigenvalues
from .errors import AnalysisError, NoCrossingError, ParameterError, SolverError
from .lattice import LatticeConfig, PotentialTerm, build_hamiltonian, potential_profiles

REALITY_TOL = 1e-8
PRESAMPLES = 256
BISECTION_WIDTH = 1e-6  # in units of J
GAMMA_MAX = 10.0  # in units of J
PAST_THRESHOLD = 1e-3


class Phase(str, enum.Enum):
    SYMMETRIC = "symmetric"
    BROKEN = "broken"


class PhaseLabel(NamedTuple):
    kind: Phase
    max_abs_im: float
    tol_used: float


def reality_scale(J: float, terms: Iterable[PotentialTerm]) -> float:
    """2J + sum |V0| + sum gamma: the magnitude the reality tolerance multiplies."""
    scale = 2.0 * J
    for t in terms:
        scale += abs(t.V0) + t.gamma
    return scale


def classify(spectrum: Spectrum, tol: float = REALITY_TOL, scale: float | None = None, J: float = 1.0) -> PhaseLabel:
    """Broken iff some |Im E| exceeds ``tol * scale``.

    ``scale`` defaults to the spectrum's own 2J + max|diag|.
    """
    if len(spectrum) == 0:
        raise ParameterError("empty spectrum")
    if not tol > 0:
        raise ParameterError("tolerance must be positive")
    scale = spectrum.scale if scale is None else scale
    m = spectrum.max_abs_imag
    kind = Phase.BROKEN if m > tol * scale else Phase.SYMMETRIC
    return PhaseLabel(kind, m / J, tol * scale)


def phase_of(lattice: LatticeConfig, terms: Sequence[PotentialTerm], tol: float = REALITY_TOL) -> PhaseLabel:
    spec = eigenvalues(build_hamiltonian(lattice, terms))
    return classify(spec, tol, reality_scale(lattice.J, terms), lattice.J)


@dataclass(frozen=True)
class ThresholdResult:
    gamma_pt: float
    bracket: tuple[float, float]
    presample_count: int
    breaking_pairs: frozenset | None = None
    N: int | None = None
    V0: float = 0.0
    beta: float | None = None

    def sorted_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.breaking_pairs or ())


def _check_status(status):
    if status == _kernels.FAILED:
        raise SolverError("tridiagonal QR did not converge during the threshold search")


def find_threshold(
    lattice: LatticeConfig,
    V0: float,
    beta: float,
    gamma_max: float | None = None,
    *,
    presamples: int = PRESAMPLES,
    width: float | None = None,
    with_pairs: bool = True,
) -> ThresholdResult:
    """Smallest gamma at which V0 cos + i gamma sin breaks PT symmetry.

    ``gamma_max`` and ``width`` are in units of J (defaults 10 J and 1e-6 J).
    Raises NoCrossingError when the spectrum is real on the whole presample
    grid.
    """
    PotentialTerm(V0, 0.0, beta)  # validates
    J = lattice.J
    gamma_max = GAMMA_MAX * J if gamma_max is None else float(gamma_max)
    width = BISECTION_WIDTH * J if width is None else float(width)
    if not gamma_max > 0:
        raise ParameterError("gamma_max must be positive")
    if presamples < 1:
        raise ParameterError("need at least one presample")
    cos_p, sin_p = potential_profiles(lattice, beta)
    re = np.ascontiguousarray(V0 * cos_p)
    gammas = gamma_max * np.arange(1, presamples + 1) / presamples
    lo, hi, found, status = _kernels.threshold_search(
        re, np.ascontiguousarray(sin_p), gammas, J, REALITY_TOL, 2.0 * J + abs(V0), width, SWEEP_FACTOR
    )
    _check_status(status)
    if not found:
        raise NoCrossingError(
            f"spectrum stays real up to gamma_max={gamma_max:g} (N={lattice.N}, V0={V0:g}, beta={beta:g})",
            gamma_max=gamma_max,
        )
    result = ThresholdResult(0.5 * (lo + hi), (float(lo), float(hi)), presamples, None, lattice.N, float(V0), float(beta))
    if with_pairs:
        pairs = _pairs_past_threshold(lattice, V0, beta, result.gamma_pt)
        result = ThresholdResult(result.gamma_pt, result.bracket, presamples, pairs, lattice.N, float(V0), float(beta))
    return result


def conjugate_pairs(spectrum: Spectrum, tol_abs: float) -> list[tuple[int, int]]:
    """Rank pairs (1-based, sorted by real part) of complex-conjugate eigenvalues.

    Eigenvalues with |Im| <= tol_abs count as real.
    """
    vals = spectrum.values
    order = canonical_order(vals)
    vals = vals[order]
    res = spectrum.residuals[order]
    upper = [i for i in range(vals.size) if vals[i].imag > tol_abs]
    lower = [i for i in range(vals.size) if vals[i].imag < -tol_abs]
    if len(upper) != len(lower):
        raise AnalysisError(f"{len(upper)} eigenvalues above the real axis but {len(lower)} below")
    if not upper:
        return []
    cost = np.abs(vals[upper][:, None] - np.conj(vals[lower])[None, :])
    rows, cols = linear_sum_assignment(cost)
    pairs = []
    floor = 1e-9 * spectrum.scale
    for r, c in zip(rows, cols):
        i, j = upper[r], lower[c]
        bound = 4.0 * (res[i] + res[j]) + floor
        if cost[r, c] > bound:
            raise AnalysisError(
                f"ambiguous conjugate pairing: mismatch {cost[r, c]:.3g} exceeds residual bound {bound:.3g}"
            )
        a, b = sorted((i + 1, j + 1))
        if b != a + 1:
            raise AnalysisError(f"conjugate pair occupies non-adjacent ranks ({a}, {b})")
        pairs.append((a, b))
    return sorted(pairs)


def _expected_ok(pairs, N, V0):
    if len(pairs) == 0:
        return False
    if V0 != 0:
        return len(pairs) == 1
    first = pairs[0]
    mirror = (N - first[0], N + 1 - first[0])
    return set(pairs) == {first, mirror}


def _pairs_past_threshold(lattice: LatticeConfig, V0: float, beta: float, gamma_pt: float) -> frozenset:
    delta = PAST_THRESHOLD
    last = None
    for _ in range(11):
        term = PotentialTerm(V0, gamma_pt * (1.0 + delta), beta)
        spec = eigenvalues(build_hamiltonian(lattice, [term]))
        tol_abs = REALITY_TOL * reality_scale(lattice.J, [term])
        pairs = conjugate_pairs(spec, tol_abs)
        if _expected_ok(pairs, lattice.N, V0):
            return frozenset(pairs)
        last = pairs
        if not pairs:
            break
        delta *= 0.5
    raise AnalysisError(
        f"could not isolate the breaking pair just past gamma_pt={gamma_pt:.6g} "
        f"(N={lattice.N}, V0={V0:g}, beta={beta:g}); last pairs {last}"
    )


def breaking_indices(
    lattice: LatticeConfig, V0: float, beta: float, gamma_max: float | None = None
) -> frozenset:
    """Ranks (n, n+1) of the level pairs that turn complex at threshold."""
    res = find_threshold(lattice, V0, beta, gamma_max, with_pairs=True)
    return res.breaking_pairs


def lowest_pair(pairs) -> tuple[int, int]:
    return min(pairs)


def average_gain(N: int, beta: float) -> float:
    """Sum over gain-side sites of sin(2 pi beta (n - n_c)), in closed form.

    Even N: sin^2(N pi beta / 2) / sin(pi beta).
    Odd N: sin(pi beta (N-1)/2) sin(pi beta (N+1)/2) / sin(pi beta).
    """
    if int(N) != N or N < 2:
        raise ParameterError(f"N must be an integer >= 2, got {N!r}")
    if not 0 < beta < 1:
        raise ParameterError(f"beta must lie strictly inside (0, 1), got {beta}")
    s = math.sin(math.pi * beta)
    if N % 2 == 0:
        return math.sin(N * math.pi * beta / 2) ** 2 / s
    return math.sin(math.pi * beta * (N - 1) / 2) * math.sin(math.pi * beta * (N + 1) / 2) / s


def average_gain_direct(N: int, beta: float) -> float:
    lattice = LatticeConfig(N)
    _, sin_p = potential_profiles(lattice, beta)
    return float(np.sum(sin_p[lattice.sites > lattice.n_c]))


class Extrema(NamedTuple):
    maxima: list[float]
    minima: list[float]
    interior_maxima: list[float]
    endpoint_maxima: list[float]


def predict_extrema(N: int) -> Extrema:
    """Threshold maxima at (2k+1)/2N, k=0..N-1, and minima at k/N, k=1..N-1.

    The two outermost maxima are also reported separately from the N - 2
    interior ones.
    """
    if int(N) != N or N < 2:
        raise ParameterError(f"N must be an integer >= 2, got {N!r}")
    N = int(N)
    maxima = [(2 * k + 1) / (2 * N) for k in range(N)]
    minima = [k / N for k in range(1, N)]
    return Extrema(maxima, minima, maxima[1:-1], [maxima[0], maxima[-1]])


@dataclass(frozen=True)
class ScalingFit:
    C_beta: float
    exponent: float
    r_squared: float
    sizes: tuple[int, ...] = ()


def scaling_fit(thresholds: Sequence[tuple[int, float]]) -> ScalingFit:
    """Least-squares fit log gamma_pt = log C + exponent log N."""
    pts = sorted((int(n), float(g)) for n, g in thresholds)
    sizes = sorted({n for n, _ in pts})
    if len(sizes) < 3:
        raise ParameterError(f"scaling fit needs at least 3 distinct lattice sizes, got {len(sizes)}")
    if any(g <= 0 for _, g in pts):
        raise ParameterError("thresholds must be positive")
    x = np.log([n for n, _ in pts])
    y = np.log([g for _, g in pts])
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(float(math.exp(intercept)), float(slope), r2, tuple(sizes))

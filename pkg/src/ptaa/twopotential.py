"""Phase boundary of H0 + V_beta1 + V_beta2 in scaled loss-gain coordinates.

Both loss-gain strengths are measured in units of their own single-potential
thresholds: x = gamma1 / gamma1_PT, y = gamma2 / gamma2_PT. Rasters are
indexed ``grid[i, j]`` with row i at y = axis[i] and column j at x = axis[j].
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import _kernels
from .analysis import REALITY_TOL, Phase, PhaseLabel, breaking_indices, find_threshold
from .eigensolver import SWEEP_FACTOR
from .errors import NoCrossingError, ParameterError, SolverError
from .lattice import LatticeConfig, potential_profiles

R_MAX = 3.0
RESOLUTION = 121
REFINE_WIDTH = 1e-4


class Interaction(str, enum.Enum):
    COOPERATIVE = "cooperative"
    COMPETITIVE = "competitive"


class Interval(NamedTuple):
    lo: float
    hi: float
    label: PhaseLabel

    @property
    def kind(self) -> Phase:
        return self.label.kind


class Witness(NamedTuple):
    """An axis-parallel cut whose labels go Broken -> Symmetric as the varied gamma grows."""

    varied: str  # "gamma1" or "gamma2"
    fixed_value: float
    intervals: list[Interval]


@dataclass(frozen=True)
class PhaseBoundary:
    beta_pair: tuple[float, float]
    scale_factors: tuple[float, float]
    axis: np.ndarray
    grid: np.ndarray  # True where broken
    boundary_points: np.ndarray  # (k, 2) array of (x, y)
    reentrant: bool
    witness: Witness | None
    N: int
    V0: tuple[float, float] = (0.0, 0.0)


@lru_cache(maxsize=4096)
def _threshold(N: int, J: float, V0: float, beta: float) -> float:
    return find_threshold(LatticeConfig(N, J), V0, beta, with_pairs=False).gamma_pt


def single_thresholds(lattice, beta1, beta2, v0=(0.0, 0.0)) -> tuple[float, float]:
    try:
        return (
            _threshold(lattice.N, lattice.J, float(v0[0]), float(beta1)),
            _threshold(lattice.N, lattice.J, float(v0[1]), float(beta2)),
        )
    except NoCrossingError as exc:
        raise ParameterError(f"single-potential threshold missing: {exc}") from exc


class ScaledCut:
    """Hamiltonians along an axis-parallel cut of the scaled plane."""

    def __init__(self, lattice, betas, v0, scales, varied, fixed_value):
        c1, s1 = potential_profiles(lattice, betas[0])
        c2, s2 = potential_profiles(lattice, betas[1])
        self.re = np.ascontiguousarray(v0[0] * c1 + v0[1] * c2)
        self.J = lattice.J
        self.scale0 = 2.0 * lattice.J + abs(v0[0]) + abs(v0[1])
        if varied == "gamma1":
            self.s_var, self.unit = np.ascontiguousarray(s1), scales[0]
            self.s_fix, self.g_fix = np.ascontiguousarray(s2), fixed_value * scales[1]
        else:
            self.s_var, self.unit = np.ascontiguousarray(s2), scales[1]
            self.s_fix, self.g_fix = np.ascontiguousarray(s1), fixed_value * scales[0]

    def max_imag(self, ts):
        ts = np.ascontiguousarray(ts, dtype=float)
        m, status = _kernels.line_max_imag(
            self.re, self.s_fix, self.g_fix, self.s_var, self.unit, ts, self.J, SWEEP_FACTOR
        )
        if status == _kernels.FAILED:
            raise SolverError("tridiagonal QR did not converge on a boundary cut")
        return m

    def tolerance(self, ts):
        return REALITY_TOL * (self.scale0 + (self.g_fix + np.asarray(ts) * self.unit))

    def broken(self, ts):
        return self.max_imag(ts) > self.tolerance(ts)

    def refine(self, lo, hi, width=REFINE_WIDTH):
        lo, hi, status = _kernels.line_bisect(
            self.re, self.s_fix, self.g_fix, self.s_var, self.unit, float(lo), float(hi), width,
            self.J, REALITY_TOL, self.scale0, SWEEP_FACTOR,
        )
        if status == _kernels.FAILED:
            raise SolverError("tridiagonal QR did not converge while refining a boundary crossing")
        return 0.5 * (lo + hi)


def scaled_axis(r_max: float, resolution: int) -> np.ndarray:
    if resolution < 2:
        raise ParameterError("resolution must be at least 2")
    if not r_max > 0:
        raise ParameterError("r_max must be positive")
    return r_max * np.arange(resolution) / (resolution - 1)


def _runs(labels):
    """(start, stop) index runs of constant label."""
    runs = []
    start = 0
    for k in range(1, len(labels) + 1):
        if k == len(labels) or labels[k] != labels[start]:
            runs.append((start, k - 1))
            start = k
    return runs


def _intervals(line: ScaledCut, ts, broken, m, refine=True) -> list[Interval]:
    out = []
    runs = _runs(broken)
    edges = [ts[0]]
    for (a, b), (c, _) in zip(runs[:-1], runs[1:]):
        edges.append(line.refine(ts[b], ts[c]) if refine else 0.5 * (ts[b] + ts[c]))
    edges.append(ts[-1])
    tol = line.tolerance(ts)
    for k, (a, b) in enumerate(runs):
        kind = Phase.BROKEN if broken[a] else Phase.SYMMETRIC
        label = PhaseLabel(kind, float(m[a]) / line.J, float(tol[a]))
        out.append(Interval(float(edges[k]), float(edges[k + 1]), label))
    return out


def _has_restoration(intervals) -> bool:
    if len(intervals) < 3:
        return False
    kinds = [iv.kind for iv in intervals]
    return any(a is Phase.BROKEN and b is Phase.SYMMETRIC for a, b in zip(kinds, kinds[1:]))


def _restoration_score(intervals) -> float:
    """Narrower of the Broken lead and the restored Symmetric stretch, best over the cut."""
    best = 0.0
    for a, b in zip(intervals, intervals[1:]):
        if a.kind is Phase.BROKEN and b.kind is Phase.SYMMETRIC:
            best = max(best, min(a.hi - a.lo, b.hi - b.lo))
    return best


def map_boundary(
    lattice: LatticeConfig,
    beta1: float,
    beta2: float,
    r_max: float = R_MAX,
    resolution: int = RESOLUTION,
    v0: tuple[float, float] = (0.0, 0.0),
) -> PhaseBoundary:
    """Classify the scaled (x, y) plane on a raster and refine its boundary.

    Every Symmetric/Broken edge of the raster is bisected to 1e-4 scaled
    units. The re-entrance witness is the axis-parallel cut, horizontal
    preferred, whose Broken -> Symmetric step is widest on both sides.
    """
    if beta1 == beta2:
        raise ParameterError("beta1 and beta2 must differ")
    scales = single_thresholds(lattice, beta1, beta2, v0)
    axis = scaled_axis(r_max, resolution)
    betas = (beta1, beta2)

    grid = np.zeros((resolution, resolution), dtype=bool)
    rows = []
    for i, y in enumerate(axis):
        line = ScaledCut(lattice, betas, v0, scales, "gamma1", y)
        grid[i] = line.broken(axis)
        rows.append(line)

    points = []
    for i, line in enumerate(rows):
        for j in np.flatnonzero(grid[i, 1:] != grid[i, :-1]):
            points.append((line.refine(axis[j], axis[j + 1]), axis[i]))
    cols = []
    for j, x in enumerate(axis):
        line = ScaledCut(lattice, betas, v0, scales, "gamma2", x)
        cols.append(line)
        for i in np.flatnonzero(grid[1:, j] != grid[:-1, j]):
            points.append((x, line.refine(axis[i], axis[i + 1])))
    boundary = np.array(sorted(points), dtype=float).reshape(-1, 2)

    witness = None
    best = -1.0
    for varied, cuts, raster in (("gamma1", rows, grid), ("gamma2", cols, grid.T)):
        for k, line in enumerate(cuts):
            labels = raster[k]
            if len(_runs(labels)) < 3:
                continue
            coarse = _intervals(line, axis, labels, np.zeros(resolution), refine=False)
            if not _has_restoration(coarse):
                continue
            score = _restoration_score(coarse)
            if score > best:
                best = score
                m = line.max_imag(axis)
                witness = Witness(varied, float(axis[k]), _intervals(line, axis, labels, m))
        if witness is not None:
            break

    return PhaseBoundary(
        (float(beta1), float(beta2)), scales, axis, grid, boundary, witness is not None, witness,
        lattice.N, (float(v0[0]), float(v0[1])),
    )


def reentrance_scan(
    lattice: LatticeConfig,
    beta1: float,
    beta2: float,
    gamma2_scaled: float,
    gamma1_max_scaled: float = R_MAX,
    steps: int = RESOLUTION,
    v0: tuple[float, float] = (0.0, 0.0),
) -> list[Interval]:
    """Phase intervals along x at fixed y = ``gamma2_scaled``."""
    if beta1 == beta2:
        raise ParameterError("beta1 and beta2 must differ")
    if gamma2_scaled < 0:
        raise ParameterError("gamma2_scaled must be >= 0")
    scales = single_thresholds(lattice, beta1, beta2, v0)
    ts = scaled_axis(gamma1_max_scaled, steps)
    line = ScaledCut(lattice, (beta1, beta2), v0, scales, "gamma1", float(gamma2_scaled))
    m = line.max_imag(ts)
    return _intervals(line, ts, m > line.tolerance(ts), m)


def is_reentrant(intervals) -> bool:
    """Broken, then Symmetric, then Broken somewhere along the cut."""
    kinds = [iv.kind for iv in intervals]
    for k in range(len(kinds) - 2):
        if kinds[k] is Phase.BROKEN and kinds[k + 1] is Phase.SYMMETRIC and Phase.BROKEN in kinds[k + 2:]:
            return True
    return False


def classify_interaction(
    lattice: LatticeConfig, beta1: float, beta2: float, v0: tuple[float, float] = (0.0, 0.0)
) -> Interaction:
    """Cooperative when both potentials break the same level pairs."""
    if beta1 == beta2:
        raise ParameterError("beta1 and beta2 must differ")
    p1 = breaking_indices(lattice, v0[0], beta1)
    p2 = breaking_indices(lattice, v0[1], beta2)
    return Interaction.COOPERATIVE if p1 == p2 else Interaction.COMPETITIVE

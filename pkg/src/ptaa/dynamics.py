"""Time evolution under the non-Hermitian Hamiltonian (hbar = 1, time in 1/J).

The one-step propagator exp(-i H dt) is formed once by scaling and squaring
with the [13/13] Pade approximant and then applied repeatedly, so no
eigenvector basis is ever needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, PropagationOverflow
from .lattice import TridiagonalOperator

# Pade [13/13] coefficients and the 1-norm bound below which no scaling is needed.
_B13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0, 10559470521600.0, 670442572800.0, 33522128640.0,
    1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152

_OVERFLOW_LIMIT = 1e150


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with the degree-13 Pade approximant."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError("expm needs a square matrix")
    n = a.shape[0]
    norm = np.linalg.norm(a, 1)
    s = 0
    if norm > _THETA13:
        s = int(math.ceil(math.log2(norm / _THETA13)))
    a = a / 2.0**s
    b = _B13
    ident = np.eye(n, dtype=np.complex128)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


@dataclass(frozen=True)
class IntensityField:
    sites: np.ndarray  # 1..N
    times: np.ndarray  # 0..T
    intensity: np.ndarray  # shape (len(times), N)
    total: np.ndarray

    @property
    def T(self) -> float:
        return float(self.times[-1])


def site_state(N: int, site: int | None = None) -> np.ndarray:
    """Unit amplitude on ``site`` (1-based); defaults to ceil(N/2)."""
    site = (N + 1) // 2 if site is None else int(site)
    if not 1 <= site <= N:
        raise ParameterError(f"site must lie in 1..{N}, got {site}")
    psi = np.zeros(N, dtype=np.complex128)
    psi[site - 1] = 1.0
    return psi


def propagate(h: TridiagonalOperator, psi0: np.ndarray, T: float, steps: int) -> IntensityField:
    """I(k, t) = |<k| exp(-i H t) |psi0>|^2 on ``steps + 1`` equally spaced times."""
    psi = np.array(psi0, dtype=np.complex128)
    if psi.shape != (h.N,):
        raise ParameterError(f"initial state must have length {h.N}")
    if not (math.isfinite(T) and T > 0):
        raise ParameterError(f"T must be positive, got {T}")
    if int(steps) != steps or steps < 2:
        raise ParameterError(f"steps must be an integer >= 2, got {steps}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ParameterError("initial state must be normalised")
    steps = int(steps)
    times = T * np.arange(steps + 1) / steps
    u = expm(-1j * (T / steps) * h.dense())
    amps = np.empty((steps + 1, h.N), dtype=np.complex128)
    amps[0] = psi
    for k in range(1, steps + 1):
        psi = u @ psi
        peak = np.max(np.abs(psi))
        if not (np.isfinite(peak) and peak < _OVERFLOW_LIMIT):
            raise PropagationOverflow(
                f"amplitudes overflow after t={times[k - 1]:.6g}; shorten T", last_valid_time=float(times[k - 1])
            )
        amps[k] = psi
    intensity = np.abs(amps) ** 2
    return IntensityField(np.arange(1, h.N + 1), times, intensity, intensity.sum(axis=1))


def growth_rate(field: IntensityField, fit_window: tuple[float, float]) -> float:
    """Half the least-squares slope of log(total intensity) over the window."""
    t_lo, t_hi = fit_window
    if not (field.times[0] <= t_lo < t_hi <= field.times[-1]):
        raise ParameterError(f"fit window {fit_window} outside [0, {field.T}]")
    mask = (field.times >= t_lo) & (field.times <= t_hi)
    if mask.sum() < 2:
        raise ParameterError("fit window holds fewer than two samples")
    total = field.total[mask]
    if np.any(total <= 0):
        raise ParameterError("total intensity must be positive inside the fit window")
    slope = np.polyfit(field.times[mask], np.log(total), 1)[0]
    return 0.5 * float(slope)


def boundedness_check(field: IntensityField) -> tuple[bool, float]:
    """Bounded iff the second-half peak total stays within 10% of the first-half peak."""
    half = len(field.times) // 2
    first = float(np.max(field.total[: half + 1]))
    second = float(np.max(field.total[half:]))
    return second <= 1.1 * first, float(np.max(field.total))

"""All eigenvalues of the tridiagonal Hamiltonian, plus an independent check.

``eigenvalues`` runs the in-house tridiagonal QR kernel. ``char_poly_eval``
evaluates det(zI - H) by the three-term recurrence, which gives a Newton
correction |p(E)/p'(E)| for every reported eigenvalue without touching the
QR path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import _kernels
from .errors import EvaluationError, SolverError
from .lattice import TridiagonalOperator

SWEEP_FACTOR = 40


def canonical_order(values: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Indices sorting by real part, then imaginary part.

    Real parts closer than ``rtol * max(1, max|value|)`` to their neighbour
    count as equal, so a conjugate pair whose real parts differ only by
    rounding is always ordered lower half-plane first.
    """
    values = np.asarray(values)
    idx = np.argsort(values.real, kind="stable")
    if values.size < 2:
        return idx
    tol = rtol * max(1.0, float(np.max(np.abs(values))))
    re = values.real[idx]
    group = np.concatenate(([0], np.cumsum(np.diff(re) > tol)))
    return idx[np.lexsort((values.imag[idx], group))]


@dataclass(frozen=True)
class Spectrum:
    values: np.ndarray
    residuals: np.ndarray
    scale: float
    fallback_used: bool = False

    sort_key = "real, then imag"

    def __len__(self):
        return self.values.size

    @property
    def max_abs_imag(self) -> float:
        return float(np.max(np.abs(self.values.imag)))

    @property
    def residual_bound(self) -> float:
        return float(np.sum(self.residuals))


def _raw_eigvals(h: TridiagonalOperator) -> tuple[np.ndarray, bool]:
    w, status, lo, hi = _kernels.tridiag_eigvals(h.diag, h.offdiag, SWEEP_FACTOR, 0.0)
    if status == _kernels.FAILED:
        block = (int(lo), int(hi)) if lo >= 0 else None
        raise SolverError(
            f"tridiagonal QR did not converge within {SWEEP_FACTOR}*N sweeps"
            + (f"; unconverged block rows {block[0] + 1}..{block[1] + 1}" if block else ""),
            block=block,
        )
    return np.asarray(w), status == _kernels.OK_FALLBACK


def eigenvalues(h: TridiagonalOperator) -> Spectrum:
    w, fallback = _raw_eigvals(h)
    w = w[canonical_order(w)]
    residuals = np.abs(newton_corrections(h, w))
    values = w.copy()
    values.setflags(write=False)
    residuals.setflags(write=False)
    return Spectrum(values, residuals, h.scale, fallback)


def newton_corrections(h: TridiagonalOperator, z) -> np.ndarray:
    """p(z)/p'(z) at each point, overflow-free."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    return _kernels.newton_ratios(h.diag, h.offdiag, z)


def char_poly_eval(h: TridiagonalOperator, z: complex) -> tuple[complex, complex]:
    """det(z I - H) and its derivative in z."""
    p, dp, exp2, bad = _kernels.charpoly_scaled(h.diag, h.offdiag, complex(z))
    if bad:
        raise EvaluationError(f"characteristic polynomial overflowed at site {bad}", site=int(bad))
    try:
        value = complex(math.ldexp(p.real, exp2), math.ldexp(p.imag, exp2))
        deriv = complex(math.ldexp(dp.real, exp2), math.ldexp(dp.imag, exp2))
    except OverflowError:
        raise EvaluationError(
            f"characteristic polynomial exceeds double range (2**{exp2} scaling) at site {h.N}",
            site=h.N,
        ) from None
    return value, deriv


def conjugate_matching(values: np.ndarray) -> tuple[np.ndarray, float]:
    """Optimal pairing of the multiset with its complex conjugate.

    Returns ``(perm, distance)`` where ``values[i]`` is matched with
    ``conj(values[perm[i]])`` and ``distance`` is the summed mismatch.
    """
    values = np.asarray(values)
    cost = np.abs(values[:, None] - np.conj(values)[None, :])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty_like(cols)
    perm[rows] = cols
    return perm, float(cost[rows, cols].sum())

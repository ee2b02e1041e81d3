"""Lattice, potential terms and the tridiagonal Hamiltonian.

Sites are 1-based, n = 1..N, centred at n_c = (N + 1) / 2. A potential term
(V0, gamma, beta) puts

    V(n) = V0 cos(2 pi beta (n - n_c)) + i gamma sin(2 pi beta (n - n_c))

on every site; the hopping is uniform, -J, with open ends.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class LatticeConfig:
    N: int
    J: float = 1.0

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"lattice size must be an integer >= 1, got {self.N!r}")
        if not (math.isfinite(self.J) and self.J > 0):
            raise ParameterError(f"hopping J must be positive, got {self.J!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "J", float(self.J))

    @property
    def n_c(self) -> float:
        return (self.N + 1) / 2

    @property
    def sites(self) -> np.ndarray:
        return np.arange(1, self.N + 1)


@dataclass(frozen=True)
class PotentialTerm:
    V0: float = 0.0
    gamma: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        for name in ("V0", "gamma", "beta"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.gamma < 0:
            # negative gamma only swaps loss and gain; not validated, so refused
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")
        if not 0 <= self.beta < 1:
            raise ParameterError(f"beta must lie in [0, 1), got {self.beta}")


@dataclass(frozen=True)
class TridiagonalOperator:
    """Complex symmetric tridiagonal matrix with uniform hopping ``-J``."""

    diag: np.ndarray
    J: float

    def __post_init__(self):
        diag = np.array(self.diag, dtype=np.complex128)
        if diag.ndim != 1 or diag.size < 1:
            raise ParameterError("diagonal must be a non-empty vector")
        if not np.all(np.isfinite(diag)):
            raise ParameterError("diagonal must be finite")
        diag.setflags(write=False)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "J", float(self.J))

    @property
    def N(self) -> int:
        return self.diag.size

    @property
    def offdiag(self) -> np.ndarray:
        return np.full(self.N - 1, -self.J, dtype=np.complex128)

    @property
    def scale(self) -> float:
        """2J + max |diag|, the reference magnitude for error bounds."""
        return 2.0 * self.J + float(np.max(np.abs(self.diag)))

    def trace(self) -> complex:
        return complex(self.diag.sum())

    def dense(self) -> np.ndarray:
        h = np.diag(self.diag)
        off = self.offdiag
        h += np.diag(off, 1) + np.diag(off, -1)
        return h

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        out = self.diag * psi
        out[:-1] -= self.J * psi[1:]
        out[1:] -= self.J * psi[:-1]
        return out


def _phase(lattice: LatticeConfig, beta: float) -> np.ndarray:
    return 2.0 * np.pi * beta * (lattice.sites - lattice.n_c)


def potential_profiles(lattice: LatticeConfig, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """(cos, sin) site profiles of a term with periodicity ``beta``."""
    phase = _phase(lattice, beta)
    return np.cos(phase), np.sin(phase)


def build_potential(lattice: LatticeConfig, term: PotentialTerm) -> np.ndarray:
    cos_p, sin_p = potential_profiles(lattice, term.beta)
    return term.V0 * cos_p + 1j * (term.gamma * sin_p)


def build_hamiltonian(lattice: LatticeConfig, terms: Sequence[PotentialTerm] = ()) -> TridiagonalOperator:
    terms = list(terms)
    if len(terms) > 2:
        raise ParameterError(f"at most two potential terms are supported, got {len(terms)}")
    diag = np.zeros(lattice.N, dtype=np.complex128)
    for term in terms:
        diag = diag + build_potential(lattice, term)
    return TridiagonalOperator(diag, lattice.J)


class ReferenceLevel(NamedTuple):
    p: int
    energy: float
    k: float
    partner: int

    def wavefunction(self, j):
        """Unnormalised amplitude sin(k_p j) at site(s) j."""
        return np.sin(self.k * np.asarray(j))


def hermitian_reference(lattice: LatticeConfig) -> list[ReferenceLevel]:
    """Levels of the bare chain, eps_p = -2J cos(p pi / (N + 1)), ascending in p."""
    N = lattice.N
    energies = {}
    for p in range(1, N // 2 + 1):
        energies[p] = -2.0 * lattice.J * math.cos(p * np.pi / (N + 1))
        energies[N + 1 - p] = -energies[p]
    if N % 2:
        energies[(N + 1) // 2] = 0.0
    return [ReferenceLevel(p, energies[p], p * np.pi / (N + 1), N + 1 - p) for p in range(1, N + 1)]


def reference_energies(lattice: LatticeConfig) -> np.ndarray:
    return np.array([lvl.energy for lvl in hermitian_reference(lattice)])

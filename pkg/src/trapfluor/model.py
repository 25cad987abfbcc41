"""Physical configuration and the bare two-level dynamics.

Units: hbar = 1 and every frequency or rate is measured in units of the trap
frequency.  Internal basis ordering is ``|g> = 0``, ``|e> = 1`` so the dipole
lowering operator is ``sigma = |g><e|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ParameterError
from .hilbert import (
    EigenSystem,
    Superoperator,
    commutator_superop,
    lindblad_superop,
    spectral_decompose,
)

SIGMA = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_DAG = SIGMA.conj().T
PROJ_G = np.diag([1.0, 0.0]).astype(complex)
PROJ_E = np.diag([0.0, 1.0]).astype(complex)


@dataclass(frozen=True)
class TravelingWave:
    kind = "traveling"


@dataclass(frozen=True)
class StandingWave:
    """Standing-wave drive cos(kx + phi); ``phi`` is the phase at the trap centre."""

    phi: float
    kind = "standing"


Drive = Union[TravelingWave, StandingWave]


def _snap(value: float) -> float:
    # cos(pi/2) and friends come out as ~1e-17; the node must be exact
    return 0.0 if abs(value) < 1e-15 else value


def zeta(drive: Drive) -> tuple[complex, complex, complex]:
    """Drive profile at the trap centre and its first two phase derivatives."""
    if isinstance(drive, TravelingWave):
        return 1.0 + 0j, 1j, -1.0 + 0j
    if isinstance(drive, StandingWave):
        c = _snap(math.cos(drive.phi))
        s = _snap(math.sin(drive.phi))
        return complex(c), complex(-s), complex(-c)
    raise TypeError(f"unknown drive {drive!r}")


@dataclass(frozen=True)
class PhysParams:
    """All physical inputs, frequencies in units of the trap frequency.

    ``delta`` is the laser detuning from the atomic resonance, ``theta`` the
    angle between laser and trap axis, ``psi`` the detection angle (both in
    radians).  ``beta`` is the mean squared projection of the spontaneous
    emission recoil on the trap axis.
    """

    delta: float = -1.0
    omega: float = 1.0
    gamma: float = 0.1
    eta: float = 0.1
    theta: float = 0.0
    psi: float = math.radians(40.0)
    drive: Drive = field(default_factory=TravelingWave)
    beta: float = 0.4
    nmax: int = 20
    eta_max: float = 0.3

    def __post_init__(self):
        for name in ("delta", "omega", "gamma", "eta", "theta", "psi", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite", name)
        if self.gamma <= 0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}", "gamma")
        if self.omega < 0:
            raise ParameterError(f"omega must be non-negative, got {self.omega}", "omega")
        if not 0 <= self.eta < self.eta_max:
            raise ParameterError(
                f"eta={self.eta} violates the Lamb-Dicke guard 0 <= eta < {self.eta_max}",
                "eta",
            )
        if not 0 < self.beta <= 1:
            raise ParameterError(f"beta must lie in (0, 1], got {self.beta}", "beta")
        if int(self.nmax) != self.nmax or self.nmax < 4:
            raise ParameterError(f"nmax must be an integer >= 4, got {self.nmax}", "nmax")
        if not isinstance(self.drive, (TravelingWave, StandingWave)):
            raise ParameterError(f"unknown drive {self.drive!r}", "drive")

    @property
    def zeta(self) -> tuple[complex, complex, complex]:
        return zeta(self.drive)


@dataclass(frozen=True)
class InternalSystem:
    """Zero-order internal Liouvillian with its eigen-triplets and steady state."""

    liouvillian: Superoperator
    eigen: EigenSystem
    steady: np.ndarray
    elastic_index: int

    @property
    def values(self) -> np.ndarray:
        return self.eigen.values

    def index(self, lam: complex) -> int:
        return self.eigen.index_of(lam)


def internal_hamiltonian(params: PhysParams) -> np.ndarray:
    z0 = params.zeta[0]
    v0 = 0.5 * params.omega * z0 * SIGMA_DAG
    return params.delta * PROJ_G + v0 + v0.conj().T


def build_internal(params: PhysParams) -> InternalSystem:
    """Assemble the two-level Liouvillian and decompose it."""
    liou = commutator_superop(internal_hamiltonian(params)) + lindblad_superop(
        SIGMA, params.gamma
    )
    eigen = spectral_decompose(liou)
    if eigen.steady_index is None:
        raise ParameterError("internal Liouvillian has no unique steady state")
    steady = eigen.right[eigen.steady_index]
    return InternalSystem(liou, eigen, steady, eigen.steady_index)


def g_pair(sys: InternalSystem, lam: complex) -> tuple[complex, complex]:
    """Dipole overlaps g = Tr{sigma^+ rho^lam} and g_check = Tr{rho_check^lam sigma rho0}."""
    i = sys.index(lam)
    g = complex(np.trace(SIGMA_DAG @ sys.eigen.right[i]))
    gc = sys.eigen.overlap(i, SIGMA @ sys.steady)
    return g, gc


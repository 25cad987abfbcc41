"""Lamb-Dicke expansion of the mechanical coupling.

Positions are measured in units of the ground-state size ``x0`` so that the
position operator is ``a + a^+`` and the Lamb-Dicke parameter carries
``k x0``.  Joint operators are ordered motion (x) internal, i.e. a joint matrix
is ``np.kron(motional, internal)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .hilbert import (
    Superoperator,
    commutator_superop,
    lindblad_superop,
    sandwich,
)
from .model import SIGMA, SIGMA_DAG, PhysParams, internal_hamiltonian


def annihilation(nmax: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, nmax + 1)), 1).astype(complex)


def position(nmax: int) -> np.ndarray:
    """a + a^+ truncated to the lowest nmax + 1 Fock states."""
    a = annihilation(nmax)
    return a + a.conj().T


def number(nmax: int) -> np.ndarray:
    return np.diag(np.arange(nmax + 1)).astype(complex)


def _hermitian_drive(coeff: complex) -> np.ndarray:
    op = coeff * SIGMA_DAG
    return op + op.conj().T


def build_v1(params: PhysParams) -> np.ndarray:
    """First-order drive coupling (cos(theta) Omega zeta'/2) sigma^+ + h.c."""
    return _hermitian_drive(0.5 * math.cos(params.theta) * params.omega * params.zeta[1])


def build_v2(params: PhysParams) -> np.ndarray:
    return _hermitian_drive(0.5 * math.cos(params.theta) ** 2 * params.omega * params.zeta[2])


@dataclass(frozen=True)
class PerturbationOps:
    """Internal operators of the first- and second-order mechanical coupling.

    ``v1``/``v2`` multiply ``x`` and ``x^2`` (with ``eta`` and ``eta^2``
    attached where they are used).  ``beta * gamma`` sets the recoil part of
    the second-order dissipator and ``cos_psi`` the detector expansion.
    """

    eta: float
    v1: np.ndarray
    v2: np.ndarray
    beta: float
    gamma: float
    cos_psi: float


def build_perturbation(params: PhysParams) -> PerturbationOps:
    return PerturbationOps(
        eta=params.eta,
        v1=build_v1(params),
        v2=build_v2(params),
        beta=params.beta,
        gamma=params.gamma,
        cos_psi=math.cos(params.psi),
    )


def _joint(motional: np.ndarray, internal: np.ndarray) -> np.ndarray:
    return np.kron(motional, internal)


def recoil_superop(params: PhysParams, nmax: int) -> Superoperator:
    """rho -> beta (gamma/2) eta^2 sigma (2 x rho x - x^2 rho - rho x^2) sigma^+."""
    x = _joint(position(nmax), np.eye(2))
    x2 = x @ x
    s = _joint(np.eye(nmax + 1), SIGMA)
    eye = np.eye(x.shape[0])
    inner = 2 * sandwich(x, x) - sandwich(x2, eye) - sandwich(eye, x2)
    pref = params.beta * 0.5 * params.gamma * params.eta**2
    return Superoperator(pref * sandwich(s, s.conj().T) @ inner, x.shape[0])


def build_joint_L(params: PhysParams, order: int, nmax: int | None = None) -> Superoperator:
    """Order-resolved piece of the joint Liouvillian on 2(nmax + 1) states."""
    nmax = params.nmax if nmax is None else nmax
    if nmax < 4:
        raise ParameterError(f"Fock truncation nmax={nmax} is too small (need >= 4)")
    eye_m = np.eye(nmax + 1)
    x = position(nmax)
    if order == 0:
        h = _joint(number(nmax), np.eye(2)) + _joint(eye_m, internal_hamiltonian(params))
        return commutator_superop(h) + lindblad_superop(_joint(eye_m, SIGMA), params.gamma)
    if order == 1:
        return commutator_superop(params.eta * _joint(x, build_v1(params)))
    if order == 2:
        h2 = 0.5 * params.eta**2 * _joint(x @ x, build_v2(params))
        return commutator_superop(h2) + recoil_superop(params, nmax)
    raise ValueError(f"order must be 0, 1 or 2, got {order}")


def detector_ops(params: PhysParams, nmax: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Second-order expansion of the detected dipole exp(-i eta cos(psi) x) sigma."""
    x = position(nmax)
    c = math.cos(params.psi)
    d0 = _joint(np.eye(nmax + 1), SIGMA)
    d1 = -1j * params.eta * c * _joint(x, SIGMA)
    d2 = -0.5 * params.eta**2 * c**2 * _joint(x @ x, SIGMA)
    return d0, d1, d2

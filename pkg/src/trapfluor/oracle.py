"""Exact reference: the full master equation on a truncated Fock space.

No Lamb-Dicke expansion is made.  The drive carries the complete
position dependence of the laser field, spontaneous emission is averaged
over the recoil direction with a Gauss-Legendre rule, and the spectrum is
obtained from the quantum regression theorem as one resolvent solve per
frequency.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import NumericalError, TruncationError
from .hilbert import Superoperator, commutator_superop, lindblad_superop, vec
from .lamb_dicke import number, position
from .model import PROJ_G, SIGMA, SIGMA_DAG, PhysParams, StandingWave, TravelingWave

QUADRATURE_ORDER = 16
NMAX_CAP = 60
NMAX_STEP = 5
TAIL_TOL = 1e-8


def emission_pattern(beta: float, order: int = QUADRATURE_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Nodes u = cos(angle to the trap axis) and weights for the recoil average.

    The pattern ``N(u) = a + b u^2`` is normalized and has ``<u^2> = beta``;
    ``beta = 2/5`` gives the dipole pattern ``3(1 + u^2)/8``.  Outside
    0.2 <= beta <= 0.6 that pattern turns negative and two emission
    directions ``u = +-sqrt(beta)`` are used instead.
    """
    b = 45.0 * (beta - 1.0 / 3.0) / 8.0
    a = 0.5 * (1.0 - 2.0 * b / 3.0)
    if a < 0 or a + b < 0:
        s = math.sqrt(beta)
        return np.array([-s, s]), np.array([0.5, 0.5])
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights * (a + b * nodes**2)


def _hermitian_function(h: np.ndarray, fn) -> np.ndarray:
    vals, vecs = la.eigh(h)
    return (vecs * fn(vals)) @ vecs.conj().T


def field_profile(params: PhysParams, x: np.ndarray) -> np.ndarray:
    """Laser amplitude at the (operator-valued) ion position."""
    k = params.eta * math.cos(params.theta)
    if isinstance(params.drive, TravelingWave):
        return _hermitian_function(x, lambda v: np.exp(1j * k * v))
    if isinstance(params.drive, StandingWave):
        phi = params.drive.phi
        return _hermitian_function(x, lambda v: np.cos(k * v + phi)).astype(complex)
    raise TypeError(f"unknown drive {params.drive!r}")


@dataclass(frozen=True)
class ExactModel:
    params: PhysParams
    nmax: int
    liouvillian: Superoperator
    steady: np.ndarray
    detector: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def dim(self) -> int:
        return 2 * (self.nmax + 1)

    def fock_populations(self) -> np.ndarray:
        blocks = self.steady.reshape(self.nmax + 1, 2, self.nmax + 1, 2)
        return np.real(np.einsum("nana->n", blocks))


def exact_liouvillian(params: PhysParams, nmax: int, order: int = QUADRATURE_ORDER):
    """Full Liouvillian plus the quadrature it used."""
    x = position(nmax)
    eye_m = np.eye(nmax + 1)
    drive = np.kron(field_profile(params, x), 0.5 * params.omega * SIGMA_DAG)
    h = (
        np.kron(number(nmax), np.eye(2))
        + np.kron(eye_m, params.delta * PROJ_G)
        + drive
        + drive.conj().T
    )
    liou = commutator_superop(h)
    nodes, weights = emission_pattern(params.beta, order)
    for u, w in zip(nodes, weights):
        kick = _hermitian_function(x, lambda v: np.exp(1j * params.eta * u * v))
        liou = liou + lindblad_superop(np.kron(kick, SIGMA), w * params.gamma)
    return liou, nodes, weights


def steady_state(liou: Superoperator) -> np.ndarray:
    """Trace-one null vector of a Liouvillian."""
    d = liou.hdim
    a = liou.matrix.copy()
    a[0, :] = vec(np.eye(d))
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    try:
        rho = la.solve(a, rhs).reshape(d, d, order="F")
    except la.LinAlgError as exc:
        raise NumericalError(f"steady state solve failed: {exc}") from exc
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def build_exact(
    params: PhysParams,
    nmax: int | None = None,
    auto_raise: bool = True,
    order: int = QUADRATURE_ORDER,
) -> ExactModel:
    """Assemble the exact model, enlarging the Fock space until its top is empty."""
    nmax = params.nmax if nmax is None else nmax
    while True:
        liou, nodes, weights = exact_liouvillian(params, nmax, order)
        rho = steady_state(liou)
        kd = params.eta * math.cos(params.psi)
        det = np.kron(_hermitian_function(position(nmax), lambda v: np.exp(-1j * kd * v)), SIGMA)
        model = ExactModel(params, nmax, liou, rho, det, nodes, weights)
        tail = model.fock_populations()[-2:].sum()
        if tail < TAIL_TOL:
            return model
        if not auto_raise or nmax >= NMAX_CAP:
            raise TruncationError(
                f"top two Fock levels hold {tail:.3e} of the population at nmax={nmax}"
            )
        nmax = min(nmax + NMAX_STEP, NMAX_CAP)


def exact_nbar(model: ExactModel) -> float:
    p = model.fock_populations()
    return float(np.arange(len(p)) @ p)


def elastic_weight(model: ExactModel) -> float:
    return float(abs(np.trace(model.detector @ model.steady)) ** 2)


def exact_spectrum(model: ExactModel, grid) -> np.ndarray:
    """Inelastic spectrum Re Tr{D^+ (i w - L)^-1 (D rho - rho <D>)}.

    The stationary eigenvalue is moved to -1 so every solve is regular; a
    complex Schur form is computed once and each frequency costs a
    triangular solve.
    """
    grid = np.asarray(grid, dtype=float)
    d = model.dim
    rho = model.steady
    mean = np.trace(model.detector @ rho)
    b = vec(model.detector @ rho - rho * mean)
    shifted = model.liouvillian.matrix - np.outer(vec(rho), vec(np.eye(d)))
    t, z = la.schur(shifted, output="complex")
    bz = z.conj().T @ b
    cz = vec(model.detector.conj()) @ z
    diag = np.diag(t).copy()
    m = -t
    idx = np.diag_indices(len(diag))
    out = np.empty(len(grid))
    for i, w in enumerate(grid):
        s = 1j * w
        if np.min(np.abs(s - diag)) < 1e-12:
            warnings.warn(f"frequency {w} sits on a pole; shifted by 1e-9", RuntimeWarning)
            s = 1j * (w + 1e-9)
        m[idx] = s - diag
        y = la.solve_triangular(m, bz, check_finite=False)
        out[i] = np.real(cz @ y)
    return out

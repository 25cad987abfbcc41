"""Laser-cooling rates and the thermal motional state.

The internal steady manifold ``rho0 (x) |n><n + ell|`` is degenerate at zero
order.  Its second-order effective generator ``W^(ell)`` is a rate equation
for ell = 0 and governs the shape of the elastic motional sidebands for
ell = +-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import ModelViolationError, NumericalError, PhysicsDomainError, TruncationError
from .expansion import JointExpansion, Manifold, ModeProjector, mode_projectors
from .lamb_dicke import PerturbationOps, build_perturbation
from .model import InternalSystem, PhysParams, build_internal

RATE_NMAX = 12
TRIDIAG_TOL = 1e-10
RUNG_TOL = 1e-6


@dataclass(frozen=True)
class GeneratorModes:
    values: np.ndarray
    projectors: list[ModeProjector]
    condition: float


@dataclass(frozen=True)
class RateData:
    a_plus: float
    a_minus: float
    nbar: float
    w_gen: dict = field(default_factory=dict)
    w_eigen: dict = field(default_factory=dict)
    cooled: bool = True
    nmax: int = RATE_NMAX

    def require_cooling(self):
        if not self.cooled:
            raise PhysicsDomainError(
                f"no cooling: A- = {self.a_minus:.6g} <= A+ = {self.a_plus:.6g}"
            )


def effective_generator(
    internal: InternalSystem, pert: PerturbationOps, ell: int, nmax: int = RATE_NMAX
) -> np.ndarray:
    """W^(ell) on the states |n><n + ell| of the steady internal manifold.

    The basis runs over the ``nmax + 1 - |ell|`` Fock indices for which the
    coherence fits in the truncated space.
    """
    if ell not in (-1, 0, 1):
        raise ValueError(f"ell must be -1, 0 or 1, got {ell}")
    exp = JointExpansion(internal, pert, nmax)
    return exp.effective_generator(Manifold(internal.elastic_index, ell))


def rates(w0: np.ndarray) -> tuple[float, float]:
    """Heating and cooling rates (A+, A-) read off a birth-death generator."""
    w0 = np.asarray(w0)
    scale = max(np.abs(w0).max(), 1e-300)
    band = np.triu(np.tril(w0, 1), -1)
    off = np.abs(w0 - band).max()
    if off > TRIDIAG_TOL * scale or np.abs(w0.imag).max() > TRIDIAG_TOL * scale:
        raise ModelViolationError(
            f"W(0) is not a real tridiagonal rate matrix (stray entries {off:.3e})"
        )
    w = w0.real
    a_plus, a_minus = float(w[1, 0]), float(w[0, 1])
    # the top rung is only touched by the truncation through the diagonal
    n = np.arange(len(w) - 1)
    up = w[n + 1, n] / (n + 1)
    down = w[n, n + 1] / (n + 1)
    for label, seq, ref in (("A+", up, a_plus), ("A-", down, a_minus)):
        spread = np.abs(seq - ref).max()
        if spread > RUNG_TOL * max(abs(ref), 1e-300):
            raise ModelViolationError(f"{label} varies along the ladder (spread {spread:.3e})")
    if min(a_plus, a_minus) < -TRIDIAG_TOL * scale:
        raise ModelViolationError(f"negative rate: A+ = {a_plus}, A- = {a_minus}")
    return max(a_plus, 0.0), max(a_minus, 0.0)


def thermal_state(nbar: float, nmax: int) -> np.ndarray:
    """Thermal motional density matrix on nmax + 1 Fock states."""
    if not nbar >= 0:
        raise ValueError(f"nbar must be non-negative, got {nbar}")
    n = np.arange(nmax + 1)
    q = nbar / (1.0 + nbar)
    p = q**n / (1.0 + nbar)
    missing = 1.0 - p.sum()
    if missing > 1e-8:
        raise TruncationError(
            f"thermal state with nbar={nbar} loses {missing:.3e} of its weight "
            f"above n={nmax}"
        )
    return np.diag(p / p.sum()).astype(complex)


def null_distribution(w0: np.ndarray) -> np.ndarray:
    """Stationary distribution of a rate matrix (its normalized null vector)."""
    ns = la.null_space(np.real(w0), rcond=1e-12)
    if ns.shape[1] != 1:
        vals, vecs = la.eig(np.real(w0))
        ns = vecs[:, [np.argmin(np.abs(vals))]].real
    p = ns[:, 0]
    return p / p.sum()


def compute_rates(
    params: PhysParams,
    internal: InternalSystem | None = None,
    pert: PerturbationOps | None = None,
    nmax: int = RATE_NMAX,
) -> RateData:
    """Build W^(-1), W^(0), W^(+1), extract the rates and the mean occupation."""
    internal = internal if internal is not None else build_internal(params)
    pert = pert if pert is not None else build_perturbation(params)
    exp = JointExpansion(internal, pert, nmax)
    k0 = internal.elastic_index
    w_gen = {ell: exp.effective_generator(Manifold(k0, ell)) for ell in (-1, 0, 1)}
    a_plus, a_minus = rates(w_gen[0])
    cooled = a_minus > a_plus
    if not cooled:
        return RateData(a_plus, a_minus, float("nan"), w_gen, {}, False, nmax)

    nbar = a_plus / (a_minus - a_plus)
    p = null_distribution(w_gen[0])
    nbar_null = float(np.arange(len(p)) @ p)
    if abs(nbar_null - nbar) > 1e-8 * max(1.0, nbar):
        raise TruncationError(
            f"nbar from rates ({nbar:.10g}) and from the W(0) null vector "
            f"({nbar_null:.10g}) disagree; raise nmax above {nmax}"
        )
    w_eigen = {}
    for ell in (-1, 1):
        try:
            vals, projs, cond = mode_projectors(w_gen[ell])
        except la.LinAlgError as exc:
            raise NumericalError(f"eigen-decomposition of W({ell:+d}) failed: {exc}") from exc
        w_eigen[ell] = GeneratorModes(vals, projs, cond)
    return RateData(a_plus, a_minus, nbar, w_gen, w_eigen, True, nmax)

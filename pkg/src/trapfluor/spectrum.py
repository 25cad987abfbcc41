"""Fluorescence spectrum to second order in the Lamb-Dicke parameter.

Every feature of the spectrum is a line ``Re[A / (i w - lambda)]`` with
``w`` the detuning from the laser frequency.  Zero order gives the bare
dipole (Mollow) lines and the elastic delta weight.  Second order adds:

* ``inelastic-sideband``: copies of each Mollow line shifted by +-1 trap
  frequency, amplitudes F+-(lambda_I) from the closed-form scalar traces;
* ``elastic-sideband``: Stokes/anti-Stokes lines, split over the eigenmodes
  of the effective generator W^(+-1);
* ``mollow-correction``: amplitude corrections F0(lambda_I) of Mollow lines;
* ``carrier-correction``: F0(0), the second-order change of the elastic
  delta weight.

Second-order shifts of Mollow pole positions are not included.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cooling import RateData, compute_rates, thermal_state
from .errors import ModelViolationError
from .expansion import JointExpansion, Manifold
from .hilbert import constrained_resolvent
from .lamb_dicke import PerturbationOps, build_perturbation
from .model import SIGMA, SIGMA_DAG, InternalSystem, PhysParams, build_internal, g_pair

S1_TOL = 1e-12
SUM_RULE_TOL = 1e-8
MAX_MODE_CONDITION = 1e10


@dataclass(frozen=True)
class SpectralLine:
    """A Lorentz/Fano line ``Re[amplitude / (i w - pole)]``.

    ``origin`` is one of ``elastic``, ``mollow``, ``mollow-correction``,
    ``carrier-correction``, ``inelastic-sideband`` or ``elastic-sideband``.
    ``parent`` is the internal eigenvalue the line derives from and ``sign``
    the trap-frequency shift (+1, -1 or 0).
    """

    pole: complex
    amplitude: complex
    origin: str
    parent: complex = 0j
    sign: int = 0

    @property
    def is_delta(self) -> bool:
        return self.pole == 0

    @property
    def center(self) -> float:
        return float(self.pole.imag)

    @property
    def half_width(self) -> float:
        return float(-self.pole.real)

    def evaluate(self, grid) -> np.ndarray:
        w = np.asarray(grid, dtype=float)
        return np.real(self.amplitude / (1j * w - self.pole))


@dataclass(frozen=True)
class SpectrumResult:
    grid: np.ndarray
    s0: np.ndarray
    s2: np.ndarray
    elastic_weight: float
    elastic_correction: float
    lines: tuple
    nbar: float
    rates: Optional[RateData] = None
    s1_max: float = 0.0
    degraded: bool = False
    params: Optional[PhysParams] = field(default=None, compare=False)

    @property
    def total(self) -> np.ndarray:
        return self.s0 + self.s2

    def lines_with(self, *origins: str) -> list[SpectralLine]:
        return [ln for ln in self.lines if ln.origin in origins]


def render_lines(lines: Sequence[SpectralLine], grid) -> np.ndarray:
    """Sum of all non-delta lines on the grid."""
    w = np.asarray(grid, dtype=float)
    out = np.zeros_like(w)
    for ln in lines:
        if not ln.is_delta:
            out += ln.evaluate(w)
    return out


# -- zero order ------------------------------------------------------------


def mollow_lines(internal: InternalSystem) -> list[SpectralLine]:
    out = []
    for k, lam in enumerate(internal.values):
        g, gc = g_pair(internal, lam)
        origin = "elastic" if k == internal.elastic_index else "mollow"
        pole = 0j if origin == "elastic" else complex(lam)
        out.append(SpectralLine(pole, g * gc, origin, complex(lam)))
    return out


def s0_curve(internal: InternalSystem, grid) -> tuple[np.ndarray, float]:
    """Bare-dipole inelastic spectrum on the grid and the elastic delta weight."""
    lines = mollow_lines(internal)
    elastic = sum(ln.amplitude for ln in lines if ln.origin == "elastic")
    return render_lines(lines, grid), float(np.real(elastic))


# -- closed-form sideband amplitudes ------------------------------------------


def external_traces(ell: int, nbar: float) -> tuple[float, float]:
    """Motional traces Tr{x U x mu} and Tr{x U [x, mu]} for the ell = +-1 sector."""
    if ell == 1:
        return nbar, -1.0
    if ell == -1:
        return nbar + 1.0, 1.0
    raise ValueError(f"ell must be +1 or -1, got {ell}")


def rrut(
    internal: InternalSystem, pert: PerturbationOps, lam_i: complex, lam_e: complex
) -> tuple[complex, complex, complex, complex]:
    """Scalar internal traces r, r*, u, t for a Mollow eigenvalue and a trap shift.

    ``pert.v1`` already carries cos(theta), so each function is linear in it.
    """
    eig = internal.eigen
    k = internal.index(lam_i)
    lam = eig.values[k]
    rho, check = eig.right[k], eig.left[k]
    rho0, v1 = internal.steady, pert.v1
    L = internal.liouvillian

    def res(z, x):
        return constrained_resolvent(L, z, (), x, eig)

    def comm(a, b):
        return a @ b - b @ a

    # (lam_e + L)^-1 = -(-lam_e - L)^-1
    s_rho0 = SIGMA @ rho0
    r = np.trace(SIGMA_DAG @ res(lam + lam_e, comm(v1, rho)))
    r_star = -np.trace(check @ SIGMA @ res(-lam_e, comm(v1, rho0)))
    u = -np.trace(check @ comm(v1, res(lam + lam_e, s_rho0)))
    t = -np.trace(check @ SIGMA @ res(-lam_e, rho0 @ v1)) - np.trace(
        v1 @ check @ res(lam_e + lam, s_rho0)
    )
    return complex(r), complex(r_star), complex(u), complex(t)


def f_sidebands(
    internal: InternalSystem, pert: PerturbationOps, nbar: float, lam_i: complex
) -> tuple[complex, complex]:
    """Sideband amplitudes (F+, F-) of the line at ``lam_i``."""
    g, gc = g_pair(internal, lam_i)
    c = pert.cos_psi
    e2 = pert.eta**2
    out = []
    for ell in (1, -1):
        r, r_star, u, t = rrut(internal, pert, lam_i, 1j * ell)
        t_sym, t_com = external_traces(ell, nbar)
        bracket = (r_star + u) * t_sym + t * t_com
        out.append(e2 * (r * bracket - c * (g * bracket + r * gc * t_sym) + c * c * g * gc * t_sym))
    return out[0], out[1]


# -- joint-space traces --------------------------------------------------------


class TraceEvaluator:
    """Generic second-order traces Tr{D_a^+ P_b D_c rho_d} at a fixed thermal state."""

    def __init__(self, internal: InternalSystem, pert: PerturbationOps, nbar: float, nmax: int):
        self.internal = internal
        self.expansion = JointExpansion(internal, pert, nmax)
        self.steady = self.expansion.steady_terms(thermal_state(nbar, nmax))

    def terms(self, k: int, ell: int, mode=None, orders=(2,)):
        return self.expansion.amplitude_terms(Manifold(k, ell), self.steady, mode, orders)

    def amplitude(self, k: int, ell: int, mode=None, order: int = 2) -> complex:
        return sum(self.terms(k, ell, mode, (order,)).values())

    def first_order_max(self) -> float:
        worst = 0.0
        for k in range(len(self.internal.values)):
            for ell in (-1, 0, 1):
                vals = self.terms(k, ell, orders=(1,)).values()
                worst = max(worst, max(abs(v) for v in vals))
        return worst


def f_carrier(
    internal: InternalSystem, pert: PerturbationOps, nbar: float, lam_i: complex, nmax: int
) -> complex:
    """Second-order amplitude correction F0 of the zero-order line at ``lam_i``."""
    ev = TraceEvaluator(internal, pert, nbar, nmax)
    return ev.amplitude(internal.index(lam_i), 0)


def elastic_sideband_lines(
    rate_data: RateData,
    evaluator: TraceEvaluator,
    totals: dict[int, complex],
    resolve_modes: bool = True,
) -> tuple[list[SpectralLine], bool]:
    """Stokes/anti-Stokes lines split over the W^(+-1) eigenmodes.

    ``totals`` maps ell to the closed-form amplitude F+-(0).  Returns the
    lines and a flag set when the single-pole fallback had to be used.
    """
    k0 = evaluator.internal.elastic_index
    lines, degraded = [], False
    for ell in (1, -1):
        modes = rate_data.w_eigen[ell]
        total = totals[ell]
        amps = None
        if resolve_modes and modes.condition < MAX_MODE_CONDITION:
            amps = [evaluator.amplitude(k0, ell, mode) for mode in modes.projectors]
            if abs(sum(amps) - total) > SUM_RULE_TOL * max(abs(total), 1e-300):
                amps = None
        if amps is None:
            degraded = degraded or resolve_modes
            slowest = modes.values[0]
            lines.append(SpectralLine(1j * ell + slowest, total, "elastic-sideband", 0j, ell))
            continue
        for lam2, amp in zip(modes.values, amps):
            lines.append(SpectralLine(1j * ell + lam2, amp, "elastic-sideband", 0j, ell))
    return lines, degraded


def default_grid(lo: float = -4.0, hi: float = 4.0, n: int = 2001) -> np.ndarray:
    return np.linspace(lo, hi, n)


def assemble(
    params: PhysParams,
    grid=None,
    resolve_modes: bool = True,
    nmax: Optional[int] = None,
) -> SpectrumResult:
    """Full perturbative pipeline: cooling, thermal state, all lines, curves."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    nmax = params.nmax if nmax is None else nmax
    internal = build_internal(params)
    pert = build_perturbation(params)
    rate_data = compute_rates(params, internal, pert, nmax)
    rate_data.require_cooling()
    nbar = rate_data.nbar

    evaluator = TraceEvaluator(internal, pert, nbar, nmax)
    s1_max = evaluator.first_order_max()
    if s1_max > S1_TOL:
        raise ModelViolationError(f"first-order spectrum does not vanish ({s1_max:.3e})")

    zero = mollow_lines(internal)
    second: list[SpectralLine] = []
    k0 = internal.elastic_index
    totals = {}
    for k, lam in enumerate(internal.values):
        lam = complex(lam)
        f_plus, f_minus = f_sidebands(internal, pert, nbar, lam)
        f0 = evaluator.amplitude(k, 0)
        if k == k0:
            totals = {1: f_plus, -1: f_minus}
            second.append(SpectralLine(0j, f0, "carrier-correction", lam))
            continue
        second.append(SpectralLine(lam, f0, "mollow-correction", lam))
        second.append(SpectralLine(lam + 1j, f_plus, "inelastic-sideband", lam, 1))
        second.append(SpectralLine(lam - 1j, f_minus, "inelastic-sideband", lam, -1))
    sidebands, degraded = elastic_sideband_lines(rate_data, evaluator, totals, resolve_modes)
    second.extend(sidebands)

    elastic = float(np.real(sum(ln.amplitude for ln in zero if ln.origin == "elastic")))
    correction = float(
        np.real(sum(ln.amplitude for ln in second if ln.origin == "carrier-correction"))
    )
    return SpectrumResult(
        grid=grid,
        s0=render_lines(zero, grid),
        s2=render_lines(second, grid),
        elastic_weight=elastic,
        elastic_correction=correction,
        lines=tuple(zero + second),
        nbar=nbar,
        rates=rate_data,
        s1_max=s1_max,
        degraded=degraded,
        params=params,
    )


def trace_path_curve(params: PhysParams, grid, nmax: Optional[int] = None) -> np.ndarray:
    """s0 + s2 with every amplitude taken from joint-space traces.

    Independent of the closed forms used by :func:`assemble`; the
    elastic-sideband split uses the same mode projectors.
    """
    grid = np.asarray(grid, dtype=float)
    nmax = params.nmax if nmax is None else nmax
    internal = build_internal(params)
    pert = build_perturbation(params)
    rate_data = compute_rates(params, internal, pert, nmax)
    rate_data.require_cooling()
    ev = TraceEvaluator(internal, pert, rate_data.nbar, nmax)
    k0 = internal.elastic_index
    lines = []
    for k, lam in enumerate(internal.values):
        lam = complex(lam)
        if k == k0:
            continue
        lines.append(SpectralLine(lam, ev.amplitude(k, 0, order=0) + ev.amplitude(k, 0), "x"))
        for ell in (1, -1):
            lines.append(SpectralLine(lam + 1j * ell, ev.amplitude(k, ell), "x"))
    for ell in (1, -1):
        modes = rate_data.w_eigen[ell]
        for lam2, mode in zip(modes.values, modes.projectors):
            lines.append(SpectralLine(1j * ell + lam2, ev.amplitude(k0, ell, mode), "x"))
    return render_lines(lines, grid)

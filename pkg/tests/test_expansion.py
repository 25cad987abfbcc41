"""The second-order projector series against exact eigen-decomposition of
the truncated L0 + L1 + L2."""

import math

import numpy as np
import pytest

from trapfluor.cooling import thermal_state
from trapfluor.expansion import JointExpansion, Manifold, mode_projectors
from trapfluor.hilbert import spectral_decompose
from trapfluor.lamb_dicke import build_joint_L, build_perturbation, detector_ops
from trapfluor.model import PhysParams, StandingWave, build_internal
from trapfluor.oracle import steady_state

NMAX = 8


def exact_cluster_amplitude(params, center, radius):
    """Sum of Tr{D^+ P D rho_st} over eigenvalues of L0+L1+L2 near ``center``."""
    sup = sum((build_joint_L(params, k, NMAX) for k in (1, 2)), build_joint_L(params, 0, NMAX))
    sys = spectral_decompose(sup)
    rho = steady_state(sup)
    d = sum(detector_ops(params, NMAX))
    x = d @ rho
    amp = 0j
    for i, lam in enumerate(sys.values):
        if abs(lam - center) < radius:
            amp += np.trace(d.conj().T @ sys.right[i]) * sys.overlap(i, x)
    return amp


def series_amplitude(params, k, ell, nbar):
    internal = build_internal(params)
    exp = JointExpansion(internal, build_perturbation(params), NMAX)
    steady = exp.steady_terms(thermal_state(nbar, NMAX))
    terms = exp.amplitude_terms(Manifold(k, ell), steady, orders=(0, 2))
    return sum(terms.values())


@pytest.mark.parametrize("drive", [None, StandingWave(math.pi / 4)])
def test_sideband_amplitudes_converge_to_exact_residues(drive):
    errs = []
    for eta in (0.02, 0.01):
        kw = dict(gamma=0.33, eta=eta, nmax=NMAX)
        if drive is not None:
            kw["drive"] = drive
        p = PhysParams(**kw)
        internal = build_internal(p)
        w0 = JointExpansion(internal, build_perturbation(p), NMAX).effective_generator(
            Manifold(internal.elastic_index, 0)
        )
        nbar = w0[1, 0].real / (w0[0, 1].real - w0[1, 0].real)
        k = int(np.argmax(internal.values.imag))
        err = 0.0
        for ell in (1, 0, -1):
            center = internal.values[k] + 1j * ell
            exact = exact_cluster_amplitude(p, center, 0.05)
            err = max(err, abs(series_amplitude(p, k, ell, nbar) - exact) / eta**2)
        errs.append(err)
    # next correction is fourth order: residual over eta^2 drops fourfold
    assert errs[0] / errs[1] > 3.5
    assert errs[1] < 2e-5


def test_effective_generator_predicts_exact_eigenvalue_shifts():
    eta = 0.01
    p = PhysParams(gamma=0.1, eta=eta, nmax=NMAX)
    internal = build_internal(p)
    exp = JointExpansion(internal, build_perturbation(p), NMAX)
    sup = sum((build_joint_L(p, k, NMAX) for k in (1, 2)), build_joint_L(p, 0, NMAX))
    exact = spectral_decompose(sup).values
    w = exp.effective_generator(Manifold(internal.elastic_index, 1))
    vals, _, _ = mode_projectors(w)
    # slowest modes are well inside the truncation
    for lam2 in vals[:3]:
        dist = np.min(np.abs(exact - (1j + lam2)))
        assert dist < 1e-2 * abs(lam2)


def test_coefficient_round_trip(rng):
    p = PhysParams(nmax=5)
    exp = JointExpansion(build_internal(p), build_perturbation(p), 5)
    x = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    assert np.allclose(exp.operator(exp.coeffs(x)), x)


def test_mode_projectors_resolve_identity(rng):
    w = rng.normal(size=(5, 5))
    vals, projs, cond = mode_projectors(w)
    total = sum(np.outer(m.right, m.left) for m in projs)
    assert np.allclose(total, np.eye(5))
    assert cond >= 1

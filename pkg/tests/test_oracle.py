import math
import warnings

import numpy as np
import pytest

from conftest import node_params, random_density
from trapfluor.errors import TruncationError
from trapfluor.lamb_dicke import build_joint_L
from trapfluor.model import SIGMA, PhysParams, build_internal
from trapfluor.oracle import (
    ExactModel,
    build_exact,
    elastic_weight,
    emission_pattern,
    exact_liouvillian,
    exact_nbar,
    exact_spectrum,
)
from trapfluor.spectrum import s0_curve


@pytest.fixture(scope="module")
def fig2a_model():
    return build_exact(PhysParams(gamma=0.33, psi=math.radians(40)), nmax=12)


@pytest.mark.parametrize("beta", [0.4, 0.25, 0.55])
def test_emission_pattern_moments(beta):
    u, w = emission_pattern(beta)
    assert abs(w.sum() - 1) < 1e-13
    assert abs(w @ u**2 - beta) < 1e-13
    assert abs(w @ u) < 1e-13
    assert np.all(w > 0)


def test_dipole_pattern_weights():
    u, w = emission_pattern(0.4)
    _, plain = np.polynomial.legendre.leggauss(16)
    assert np.allclose(w, plain * 3 * (1 + u**2) / 8)


def test_emission_pattern_two_point_fallback():
    u, w = emission_pattern(0.9)
    assert np.allclose(u, [-math.sqrt(0.9), math.sqrt(0.9)])
    assert abs(w @ u**2 - 0.9) < 1e-15


def test_decoupled_liouvillian_is_order_zero_piece():
    p = PhysParams(eta=0.0, nmax=6)
    liou, _, _ = exact_liouvillian(p, 6)
    assert np.abs(liou.matrix - build_joint_L(p, 0, 6).matrix).max() < 1e-12


def test_decoupled_spectrum_is_mollow_triplet(rng):
    nmax = 6
    p = PhysParams(eta=0.0, gamma=0.1, nmax=nmax)
    internal = build_internal(p)
    liou, nodes, weights = exact_liouvillian(p, nmax)
    ground = np.zeros((nmax + 1, nmax + 1))
    ground[0, 0] = 1
    model = ExactModel(
        p, nmax, liou, np.kron(ground, internal.steady), np.kron(np.eye(nmax + 1), SIGMA),
        nodes, weights,
    )
    grid = rng.uniform(-4, 4, 60)
    expected, elastic = s0_curve(internal, grid)
    assert np.max(np.abs(exact_spectrum(model, grid) - expected)) < 1e-8 * expected.max()
    assert abs(elastic_weight(model) - elastic) < 1e-12


def test_steady_state_invariants(fig2a_model):
    rho = fig2a_model.steady
    assert abs(np.trace(rho) - 1) < 1e-12
    assert np.abs(rho - rho.conj().T).max() < 1e-12
    assert np.linalg.eigvalsh(rho).min() > -1e-9
    assert fig2a_model.fock_populations()[-2:].sum() < 1e-8
    assert np.abs(fig2a_model.liouvillian(rho)).max() < 1e-10


def test_dissipator_conserves_trace(rng):
    p = PhysParams(omega=0.0, delta=0.0, gamma=0.7, nmax=5)
    liou, _, _ = exact_liouvillian(p, 5)
    for _ in range(3):
        rho = random_density(rng, 12)
        assert abs(np.trace(liou(rho))) < 1e-10


def test_mean_occupation_fig2a(fig2a_model):
    assert abs(exact_nbar(fig2a_model) / 0.15 - 1) < 0.15


def ratio_spread(eta):
    model = build_exact(PhysParams(gamma=0.33, eta=eta), nmax=12)
    p = model.fock_populations()[:5]
    ratios = p[1:] / p[:-1]
    return np.ptp(ratios) / ratios.mean(), model


def test_motional_marginal_is_nearly_thermal():
    # the Boltzmann ratio p(n+1)/p(n) drifts with n only at second order in eta
    big, model = ratio_spread(0.1)
    small, _ = ratio_spread(0.05)
    assert 3.0 < big / small < 5.0
    blocks = model.steady.reshape(13, 2, 13, 2)
    marginal = np.einsum("nama->nm", blocks)
    off = marginal - np.diag(np.diag(marginal))
    assert np.abs(off).max() < 0.1**2


def test_auto_raise_and_guard():
    p = PhysParams(gamma=0.33, delta=-0.3, nmax=5)
    model = build_exact(p)
    assert model.nmax > 5
    with pytest.raises(TruncationError):
        build_exact(p, auto_raise=False)


def test_quadrature_order_is_converged():
    p = PhysParams(gamma=0.33, psi=math.radians(40))
    grid = np.linspace(-3, 3, 41)
    a = exact_spectrum(build_exact(p, nmax=10, order=16), grid)
    b = exact_spectrum(build_exact(p, nmax=10, order=8), grid)
    assert np.max(np.abs(a - b)) < 1e-8 * np.abs(a).max()


def test_exact_spectrum_positive(fig2a_model):
    s = exact_spectrum(fig2a_model, np.linspace(-4, 4, 161))
    assert s.min() > -1e-9 * s.max()


def node_mismatch(eta, grid):
    out = []
    for psi in (200, 40):
        model = build_exact(node_params(gamma=0.1, eta=eta, psi=math.radians(psi)), nmax=8)
        out.append(exact_spectrum(model, grid))
    return np.max(np.abs(out[0] - out[1])) / out[0].max(), out[0]


def test_node_spectrum_detector_angle_dependence_is_higher_order():
    grid = np.linspace(-2, 2, 41)
    big, s = node_mismatch(0.05, grid)
    small, _ = node_mismatch(0.025, grid)
    assert big < 0.05**2
    assert 3.5 < big / small < 4.5
    # only motional sidebands survive: the carrier region is dark
    assert s[np.argmin(np.abs(grid))] < 1e-2 * s.max()


def test_grid_point_on_pole_warns():
    p = PhysParams(eta=0.0, nmax=4)
    internal = build_internal(p)
    liou, nodes, weights = exact_liouvillian(p, 4)
    ground = np.zeros((5, 5))
    ground[0, 0] = 1
    model = ExactModel(
        p, 4, liou, np.kron(ground, internal.steady), np.kron(np.eye(5), SIGMA), nodes, weights
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = exact_spectrum(model, [0.0])
    assert np.isfinite(out).all()
    assert any("pole" in str(w.message) for w in caught)

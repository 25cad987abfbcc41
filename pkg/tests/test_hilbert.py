import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density, random_hermitian
from trapfluor.errors import DefectiveMatrixError, NearPoleError, UnknownEigenvalueError
from trapfluor.hilbert import (
    Superoperator,
    commutator_superop,
    constrained_resolvent,
    is_density_matrix,
    lindblad_superop,
    projector_apply,
    sandwich,
    spectral_decompose,
    unvec,
    vec,
)
from trapfluor.lamb_dicke import number
from trapfluor.model import SIGMA, PhysParams, build_internal


def lindbladian(rng, d, njumps=2):
    sup = commutator_superop(random_hermitian(rng, d))
    for _ in range(njumps):
        j = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        sup = sup + lindblad_superop(j, rng.uniform(0.1, 1.0))
    return sup


def test_vec_convention_matches_sandwich(rng):
    a, x, b = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(3))
    assert np.allclose(sandwich(a, b) @ vec(x), vec(a @ x @ b))
    assert np.allclose(unvec(vec(x), 3), x)


def test_commutator_of_identity_is_zero():
    assert np.all(commutator_superop(np.eye(3)).matrix == 0)


def test_oscillator_commutator_spectrum_is_integer_ladder():
    vals = np.linalg.eigvals(commutator_superop(number(5)).matrix)
    assert np.allclose(vals.real, 0)
    assert np.allclose(vals.imag, np.round(vals.imag))
    assert set(np.round(vals.imag).astype(int)) == set(range(-5, 6))


def test_commutator_matches_direct_arithmetic(rng):
    h = random_hermitian(rng, 4)
    rho = random_density(rng, 4)
    out = commutator_superop(h)(rho)
    assert np.allclose(out, -1j * (h @ rho - rho @ h), atol=1e-12)
    assert np.allclose(out, out.conj().T, atol=1e-12)
    assert abs(np.trace(out)) < 1e-12


def test_lindblad_zero_rate_and_negative_rate():
    assert np.all(lindblad_superop(SIGMA, 0.0).matrix == 0)
    with pytest.raises(ValueError):
        lindblad_superop(SIGMA, -0.1)


def test_spontaneous_decay_of_excited_state():
    gamma = 0.7
    rho_e = np.diag([0.0, 1.0]).astype(complex)
    out = lindblad_superop(SIGMA, gamma)(rho_e)
    assert np.allclose(out, gamma * np.diag([1.0, -1.0]))


def test_lindblad_output_is_traceless(rng):
    j = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    sup = lindblad_superop(j, 0.3)
    for _ in range(5):
        x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert abs(np.trace(sup(x))) < 1e-12


def test_liouvillian_preserves_trace_and_hermiticity(rng):
    sup = lindbladian(rng, 4)
    assert np.abs(sup.left_apply(np.eye(4))).max() < 1e-10
    h = random_hermitian(rng, 4)
    out = sup(h)
    assert np.abs(out - out.conj().T).max() < 1e-10


def test_left_apply_is_the_adjoint_action(rng):
    sup = lindbladian(rng, 3)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.isclose(np.trace(sup.left_apply(a) @ x), np.trace(a @ sup(x)))


def test_superoperator_shape_checked():
    with pytest.raises(ValueError):
        Superoperator(np.zeros((3, 3)), 2)


def test_decomposition_biorthonormal_complete_and_ordered(rng):
    sup = lindbladian(rng, 3)
    sys = spectral_decompose(sup)
    assert sys.biorthogonality_error() < 1e-10
    x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    total = sum(projector_apply(sys, lam, x) for lam in sys.values)
    assert np.abs(total - x).max() < 1e-8
    rel = np.linalg.norm(sys.reconstruct() - sup.matrix) / np.linalg.norm(sup.matrix)
    assert rel < 1e-8
    re = sys.values.real
    assert np.all(np.diff(np.round(re, 8)) <= 0)


def test_steady_state_normalization(rng):
    sys = spectral_decompose(lindbladian(rng, 3))
    i = sys.steady_index
    assert i is not None
    assert is_density_matrix(sys.right[i], tol=1e-10)
    assert np.allclose(sys.left[i], np.eye(3), atol=1e-10)
    assert np.sum(np.abs(sys.values) < 1e-10) == 1


def test_node_internal_eigen_table():
    # drive switched off: eigenvalues 0, -gamma, -gamma/2 +- i delta
    p = PhysParams(omega=0.0, gamma=0.1, delta=-1.0)
    sys = build_internal(p).eigen
    g, e = np.eye(2)[:, [0]], np.eye(2)[:, [1]]
    table = {
        0: g @ g.T,
        -0.1: e @ e.T - g @ g.T,
        # -i[delta |g><g|, |e><g|] = i delta |e><g|; with delta = -1 -> -i
        -0.05 - 1j: e @ g.T,
        -0.05 + 1j: g @ e.T,
    }
    for lam, op in table.items():
        r = sys.right[sys.index_of(lam)]
        k = np.argmax(np.abs(op))
        scale = r.flat[k] / op.flat[k]
        assert np.allclose(r, scale * op, atol=1e-12)


def faddeev_leverrier_roots(m):
    n = m.shape[0]
    coeffs = [1.0 + 0j]
    mk = np.zeros_like(m)
    for k in range(1, n + 1):
        mk = m @ mk + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(m @ mk) / k)
    return np.roots(coeffs)


def test_internal_eigenvalues_match_characteristic_polynomial():
    internal = build_internal(PhysParams(delta=-1, omega=1, gamma=0.1))
    roots = faddeev_leverrier_roots(internal.liouvillian.matrix)
    for lam in internal.values:
        assert np.min(np.abs(roots - lam)) < 1e-9


def test_projector_idempotent_and_biorthogonal(rng):
    sys = spectral_decompose(lindbladian(rng, 2))
    lam0, lam1 = sys.values[0], sys.values[1]
    r0, r1 = sys.right[0], sys.right[1]
    assert np.allclose(projector_apply(sys, lam0, r0), r0, atol=1e-12)
    assert np.abs(projector_apply(sys, lam0, r1)).max() < 1e-12
    with pytest.raises(UnknownEigenvalueError):
        projector_apply(sys, 123.0 + 4j, r0)


def test_defective_matrix_is_reported():
    jordan = np.zeros((4, 4), dtype=complex)
    jordan[0, 1] = 1.0
    with pytest.raises(DefectiveMatrixError) as err:
        spectral_decompose(Superoperator(jordan, 2))
    assert err.value.residual > 1e-6


def test_resolvent_diagonal_case_is_componentwise():
    diag = np.array([-1.0, -2.0, -3.0 + 1j, -0.5j])
    sup = Superoperator(np.diag(diag), 2)
    x = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
    y = constrained_resolvent(sup, 0.7j, (), x)
    assert np.allclose(vec(y), vec(x) / (0.7j - diag))


def test_resolvent_excluded_input_gives_zero(rng):
    sup = lindbladian(rng, 2)
    sys = spectral_decompose(sup)
    lam = sys.values[1]
    y = constrained_resolvent(sup, lam, [lam], sys.right[1], sys)
    assert np.abs(y).max() < 1e-12


def test_resolvent_near_pole_raises(rng):
    sup = lindbladian(rng, 2)
    sys = spectral_decompose(sup)
    with pytest.raises(NearPoleError) as err:
        constrained_resolvent(sup, sys.values[2] + 1e-11, (), np.eye(2), sys)
    assert abs(err.value.eigenvalue - sys.values[2]) < 1e-9


@settings(max_examples=25, deadline=None)
@given(
    d=st.sampled_from([2, 3]),
    seed=st.integers(0, 2**32 - 1),
    zr=st.floats(-2, 2),
    zi=st.floats(-3, 3),
)
def test_resolvent_matches_bordered_solve(d, seed, zr, zi):
    # random 4- and 9-dimensional superoperators, zero eigenspace excluded
    rng = np.random.default_rng(seed)
    sup = lindbladian(rng, d)
    sys = spectral_decompose(sup)
    z = complex(zr, zi)
    if np.min(np.abs(np.delete(sys.values, sys.steady_index) - z)) < 1e-3:
        return
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    y = constrained_resolvent(sup, z, [0.0], x, sys)
    # bordered system: [(z - L)  r0; l0^T 0] [y; s] = [(1-P)x; 0]
    n = d * d
    r0 = vec(sys.right[sys.steady_index])
    l0 = vec(np.eye(d))
    px = vec(x) - r0 * (l0 @ vec(x))
    big = np.zeros((n + 1, n + 1), dtype=complex)
    big[:n, :n] = z * np.eye(n) - sup.matrix
    big[:n, n] = r0
    big[n, :n] = l0
    sol = np.linalg.solve(big, np.append(px, 0))
    assert np.abs(vec(y) - sol[:n]).max() < 1e-10 * max(1, np.abs(sol).max())
    resid = (z * np.eye(n) - sup.matrix) @ vec(y) - px
    assert np.abs(resid).max() < 1e-10 * max(1, np.abs(px).max())

"""Perturbation theory on the truncated joint (motion x internal) space.

The zero-order Liouvillian is diagonal in the basis
``rho^{lambda_k} (x) |n><m|`` with eigenvalue ``lambda_k + i(m - n)``, so joint
operators are handled in coefficient form ``C[k, n, m]``.  Reduced resolvents
and eigenspace projectors are then elementwise operations; the couplings L1
and L2 act on ordinary matrices.

Corrections to eigenprojectors follow the standard expansion of the total
projector of an eigenspace (valid for degenerate eigenvalues) with
``G = (1 - P0)/(lambda0 - L0)``::

    P1 = P0 L1 G + G L1 P0
    P2 = P0 L2 G + G L2 P0 + P0 L1 G L1 G + G L1 P0 L1 G + G L1 G L1 P0
         - P0 L1 G G L1 P0

(terms with ``P0 L1 P0`` are dropped because L1 changes the motional
coherence order by one).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .lamb_dicke import PerturbationOps, position
from .model import SIGMA, InternalSystem

RESOLVENT_TOL = 1e-9


@dataclass(frozen=True)
class Manifold:
    """Zero-order eigenspace labelled by an internal eigen-index and a
    motional coherence order ``ell`` (states ``|n><n + ell|``)."""

    k: int
    ell: int


@dataclass(frozen=True)
class ModeProjector:
    """Rank-one projector inside a manifold: right/left vectors over its
    motional basis, normalized so that ``left @ right == 1``."""

    right: np.ndarray
    left: np.ndarray


def second_order_keys() -> list[tuple[int, int, int, int]]:
    return [t for t in itertools.product(range(3), repeat=4) if sum(t) == 2]


def first_order_keys() -> list[tuple[int, int, int, int]]:
    return [t for t in itertools.product(range(2), repeat=4) if sum(t) == 1]


class JointExpansion:
    """Zero-order structure plus L1/L2 on ``nmax + 1`` Fock states."""

    def __init__(self, internal: InternalSystem, pert: PerturbationOps, nmax: int):
        self.internal = internal
        self.pert = pert
        self.nmax = nmax
        self.n1 = n1 = nmax + 1
        eig = internal.eigen
        self.lam = np.asarray(eig.values)
        self.right = np.asarray(eig.right)
        self.left = np.asarray(eig.left)
        self.k0 = internal.elastic_index
        self.rho0 = internal.steady

        x = position(nmax)
        eye_m = np.eye(n1)
        eta = pert.eta
        self.h1 = eta * np.kron(x, pert.v1)
        self.h2 = 0.5 * eta**2 * np.kron(x @ x, pert.v2)
        self.xj = np.kron(x, np.eye(2))
        self.x2j = self.xj @ self.xj
        self.sj = np.kron(eye_m, SIGMA)
        self.recoil = 0.5 * pert.beta * pert.gamma * eta**2

        c = pert.cos_psi
        self.detectors = (
            self.sj,
            -1j * eta * c * np.kron(x, SIGMA),
            -0.5 * eta**2 * c**2 * np.kron(x @ x, SIGMA),
        )
        order = np.arange(n1)
        self.ell_grid = order[None, :] - order[:, None]
        self.l0 = self.lam[:, None, None] + 1j * self.ell_grid[None, :, :]

    # -- representation -------------------------------------------------
    def coeffs(self, op: np.ndarray) -> np.ndarray:
        blocks = op.reshape(self.n1, 2, self.n1, 2)
        return np.einsum("kba,namb->knm", self.left, blocks)

    def operator(self, coeffs: np.ndarray) -> np.ndarray:
        blocks = np.einsum("knm,kab->namb", coeffs, self.right)
        return blocks.reshape(2 * self.n1, 2 * self.n1)

    def basis(self, manifold: Manifold) -> np.ndarray:
        """Fock indices n of the manifold states |n><n + ell|."""
        ell = manifold.ell
        return np.arange(max(0, -ell), min(self.n1, self.n1 - ell))

    def value(self, manifold: Manifold) -> complex:
        return complex(self.lam[manifold.k] + 1j * manifold.ell)

    def state(self, manifold: Manifold, weights: np.ndarray) -> np.ndarray:
        """Joint operator sum_n weights[n] rho^{lambda_k} (x) |n><n + ell|."""
        c = np.zeros((len(self.lam), self.n1, self.n1), dtype=complex)
        n = self.basis(manifold)
        c[manifold.k, n, n + manifold.ell] = weights
        return self.operator(c)

    def components(self, manifold: Manifold, op: np.ndarray) -> np.ndarray:
        n = self.basis(manifold)
        return self.coeffs(op)[manifold.k, n, n + manifold.ell]

    # -- zero-order maps ------------------------------------------------
    def resolvent(self, z: complex, op: np.ndarray) -> np.ndarray:
        """(z - L0)^{-1} restricted to the complement of the L0 eigenspace at z."""
        c = self.coeffs(op)
        den = z - self.l0
        out = np.zeros_like(c)
        ok = np.abs(den) > RESOLVENT_TOL
        out[ok] = c[ok] / den[ok]
        return self.operator(out)

    def project(
        self, manifold: Manifold, op: np.ndarray, mode: Optional[ModeProjector] = None
    ) -> np.ndarray:
        comps = self.components(manifold, op)
        if mode is not None:
            comps = mode.right * (mode.left @ comps)
        return self.state(manifold, comps)

    # -- couplings -------------------------------------------------------
    def l1(self, op: np.ndarray) -> np.ndarray:
        return -1j * (self.h1 @ op - op @ self.h1)

    def l2(self, op: np.ndarray) -> np.ndarray:
        out = -1j * (self.h2 @ op - op @ self.h2)
        if self.recoil:
            inner = 2 * self.xj @ op @ self.xj - self.x2j @ op - op @ self.x2j
            out = out + self.recoil * self.sj @ inner @ self.sj.conj().T
        return out

    # -- derived quantities ------------------------------------------------
    def effective_generator(self, manifold: Manifold) -> np.ndarray:
        """Second-order generator P0 [L2 + L1 G L1] P0 in the manifold basis."""
        z = self.value(manifold)
        n = self.basis(manifold)
        w = np.zeros((len(n), len(n)), dtype=complex)
        for j in range(len(n)):
            e = np.zeros(len(n))
            e[j] = 1.0
            x = self.state(manifold, e)
            y = self.l2(x) + self.l1(self.resolvent(z, self.l1(x)))
            w[:, j] = self.components(manifold, y)
        return w

    def steady_terms(self, mu: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Zero-, first- and second-order steady state for motional state ``mu``.

        The second-order term omits its component inside the zero-order
        steady manifold, which is traceless and does not enter any
        second-order spectral amplitude.
        """
        r0 = np.kron(mu, self.rho0)
        r1 = self.resolvent(0.0, self.l1(r0))
        r2 = self.resolvent(0.0, self.l2(r0) + self.l1(r1))
        return r0, r1, r2

    def projector_series(
        self, manifold: Manifold, mode: Optional[ModeProjector] = None
    ) -> tuple[Callable, Callable, Callable]:
        z = self.value(manifold)

        def p0(x):
            return self.project(manifold, x, mode)

        def pfull(x):
            return self.project(manifold, x)

        def g(x):
            return self.resolvent(z, x)

        l1, l2 = self.l1, self.l2

        def p1(x):
            return p0(l1(g(x))) + g(l1(p0(x)))

        def p2(x):
            gx = g(x)
            return (
                p0(l2(gx))
                + g(l2(p0(x)))
                + p0(l1(g(l1(gx))))
                + g(l1(p0(l1(gx))))
                + g(l1(g(l1(p0(x)))))
                - p0(l1(g(g(l1(pfull(x))))))
            )

        return p0, p1, p2

    def amplitude_terms(
        self,
        manifold: Manifold,
        steady: tuple[np.ndarray, np.ndarray, np.ndarray],
        mode: Optional[ModeProjector] = None,
        orders: tuple[int, ...] = (2,),
    ) -> dict[tuple[int, int, int, int], complex]:
        """Tr{D_a^+ P_b D_c rho_d} for every (a, b, c, d) of the requested total orders."""
        projs = self.projector_series(manifold, mode)
        dets = self.detectors
        keys = []
        if 0 in orders:
            keys.append((0, 0, 0, 0))
        if 1 in orders:
            keys += first_order_keys()
        if 2 in orders:
            keys += second_order_keys()
        cache: dict[tuple[int, int, int], np.ndarray] = {}
        out = {}
        for a, b, c, d in keys:
            if (b, c, d) not in cache:
                cache[(b, c, d)] = projs[b](dets[c] @ steady[d])
            out[(a, b, c, d)] = complex(np.trace(dets[a].conj().T @ cache[(b, c, d)]))
        return out


def mode_projectors(w: np.ndarray) -> tuple[np.ndarray, list[ModeProjector], float]:
    """Eigen-decomposition of an effective generator into rank-one projectors.

    Returns eigenvalues, projectors and the condition number of the
    eigenvector matrix.
    """
    import scipy.linalg as la

    vals, vr = la.eig(w)
    order = np.argsort(-vals.real)
    vals, vr = vals[order], vr[:, order]
    cond = float(np.linalg.cond(vr))
    vl = la.inv(vr)
    return vals, [ModeProjector(vr[:, j], vl[j, :]) for j in range(len(vals))], cond

"""Dense operator algebra on finite Hilbert spaces.

Operators are plain ``numpy`` arrays of shape ``(d, d)``.  Superoperators act
on column-stacked operators, ``vec(A X B) = (B^T kron A) vec(X)``, and carry
the Hilbert dimension they act on.  Everything here is a pure function of its
inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
import scipy.linalg as la

from .errors import (
    DefectiveMatrixError,
    NearPoleError,
    NumericalError,
    UnknownEigenvalueError,
)

DEFECT_TOL = 1e-6
ZERO_TOL = 1e-10
POLE_TOL = 1e-9


def vec(op: np.ndarray) -> np.ndarray:
    """Column-stack an operator into a vector."""
    return np.asarray(op).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


def sandwich(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of the map X -> a X b."""
    return np.kron(np.asarray(b).T, np.asarray(a))


def is_density_matrix(rho: np.ndarray, tol: float = 1e-10) -> bool:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if abs(np.trace(rho) - 1.0) > tol:
        return False
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        return False
    return bool(np.min(la.eigvalsh(0.5 * (rho + rho.conj().T))) > -tol)


@dataclass(frozen=True)
class Superoperator:
    """Linear map on operators of a ``hdim``-dimensional Hilbert space."""

    matrix: np.ndarray
    hdim: int

    def __post_init__(self):
        n = self.hdim * self.hdim
        if self.matrix.shape != (n, n):
            raise ValueError(
                f"superoperator matrix must be {n}x{n} for hdim={self.hdim}, "
                f"got {self.matrix.shape}"
            )

    def __call__(self, op: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(op), self.hdim)

    def left_apply(self, op: np.ndarray) -> np.ndarray:
        """Return Y with Tr{Y X} = Tr{op L(X)} for every X (action from the left)."""
        return unvec(self.matrix.T @ vec(np.asarray(op).T), self.hdim).T

    def _check(self, other: "Superoperator"):
        if not isinstance(other, Superoperator) or other.hdim != self.hdim:
            raise ValueError("superoperators act on different spaces")

    def __add__(self, other: "Superoperator") -> "Superoperator":
        self._check(other)
        return Superoperator(self.matrix + other.matrix, self.hdim)

    def __sub__(self, other: "Superoperator") -> "Superoperator":
        self._check(other)
        return Superoperator(self.matrix - other.matrix, self.hdim)

    def __mul__(self, scalar: complex) -> "Superoperator":
        return Superoperator(scalar * self.matrix, self.hdim)

    __rmul__ = __mul__

    def __matmul__(self, other: "Superoperator") -> "Superoperator":
        self._check(other)
        return Superoperator(self.matrix @ other.matrix, self.hdim)

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    @classmethod
    def zero(cls, hdim: int) -> "Superoperator":
        return cls(np.zeros((hdim * hdim, hdim * hdim), dtype=complex), hdim)


def _square(op: np.ndarray) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"operator must be square, got shape {op.shape}")
    return op


def commutator_superop(h: np.ndarray) -> Superoperator:
    """Superoperator of rho -> -i [h, rho]."""
    h = _square(h)
    eye = np.eye(h.shape[0])
    return Superoperator(-1j * (sandwich(h, eye) - sandwich(eye, h)), h.shape[0])


def lindblad_superop(jump: np.ndarray, rate: float) -> Superoperator:
    """Superoperator of rho -> (rate/2)(2 J rho J^+ - J^+J rho - rho J^+J)."""
    if rate < 0:
        raise ValueError(f"dissipation rate must be non-negative, got {rate}")
    jump = _square(jump)
    eye = np.eye(jump.shape[0])
    jd = jump.conj().T
    jdj = jd @ jump
    m = sandwich(jump, jd) - 0.5 * sandwich(jdj, eye) - 0.5 * sandwich(eye, jdj)
    return Superoperator(rate * m, jump.shape[0])


@dataclass(frozen=True)
class EigenSystem:
    """Biorthonormal eigen-triplets of a superoperator.

    ``right[i]`` and ``left[i]`` are operators with
    ``Tr{left[i] @ right[j]} = delta_ij``.  ``clusters`` groups indices whose
    eigenvalues coincide within the clustering tolerance.
    """

    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    hdim: int
    clusters: tuple = ()
    cluster_tol: float = 1e-8
    steady_index: Optional[int] = None
    residual: float = 0.0

    def __len__(self):
        return len(self.values)

    def cluster_of(self, value: complex) -> tuple:
        """Indices of the eigenspace at ``value``."""
        for members in self.clusters:
            if abs(self.values[members[0]] - value) <= self.cluster_tol:
                return members
        raise UnknownEigenvalueError(value)

    def index_of(self, value: complex) -> int:
        members = self.cluster_of(value)
        if len(members) != 1:
            raise ValueError(f"eigenvalue {value!r} is {len(members)}-fold degenerate")
        return members[0]

    def overlap(self, index: int, op: np.ndarray) -> complex:
        """Tr{left[index] op}."""
        return complex(np.sum(self.left[index].T * op))

    def project(self, value: complex, op: np.ndarray) -> np.ndarray:
        out = np.zeros((self.hdim, self.hdim), dtype=complex)
        for i in self.cluster_of(value):
            out += self.right[i] * self.overlap(i, op)
        return out

    def biorthogonality_error(self) -> float:
        gram = np.einsum("iab,jba->ij", self.left, self.right)
        return float(np.max(np.abs(gram - np.eye(len(self)))))

    def reconstruct(self) -> np.ndarray:
        vr = np.stack([vec(r) for r in self.right], axis=1)
        vl = np.stack([vec(l.T) for l in self.left], axis=0)
        return (vr * self.values) @ vl


def _cluster(values: np.ndarray, tol: float) -> tuple:
    clusters = []
    assigned = np.full(len(values), False)
    for i in range(len(values)):
        if assigned[i]:
            continue
        members = np.flatnonzero((np.abs(values - values[i]) <= tol) & ~assigned)
        assigned[members] = True
        clusters.append(tuple(int(m) for m in members))
    return tuple(clusters)


def spectral_decompose(sup: Superoperator) -> EigenSystem:
    """Diagonalize ``sup`` into biorthonormal right/left eigen-operators.

    Eigenvalues are sorted by real part (descending) and then imaginary part.
    A single eigenvalue with ``|lambda| < 1e-10`` is treated as the steady
    state: its right element is trace-normalized and its left element becomes
    the identity.  Other right elements are scaled to unit Frobenius norm.
    """
    mat = sup.matrix
    scale = max(1.0, float(np.linalg.norm(mat)))
    try:
        values, vr = la.eig(mat)
    except (la.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(vr))):
        raise NumericalError("eigensolver returned non-finite values")

    tol = 1e-8 * scale
    order = np.lexsort((values.imag, -np.round(values.real / tol) * tol))
    values = values[order]
    vr = vr[:, order]
    try:
        vl = la.inv(vr)
    except la.LinAlgError as exc:
        raise DefectiveMatrixError(np.inf) from exc
    residual = float(np.linalg.norm((vr * values) @ vl - mat) / scale)
    if not np.isfinite(residual) or residual > DEFECT_TOL:
        raise DefectiveMatrixError(residual)

    d = sup.hdim
    right = np.stack([unvec(vr[:, i], d) for i in range(len(values))])
    left = np.stack([unvec(vl[i, :], d).T for i in range(len(values))])

    zeros = np.flatnonzero(np.abs(values) < ZERO_TOL * scale)
    steady = None
    if len(zeros) == 1 and abs(np.trace(right[zeros[0]])) > 1e-12:
        steady = int(zeros[0])
    for i in range(len(values)):
        if i == steady:
            c = np.trace(right[i])
        else:
            c = np.linalg.norm(right[i])
            # fix the phase so that the largest entry is real positive
            k = np.argmax(np.abs(right[i]))
            c = c * right[i].flat[k] / abs(right[i].flat[k])
        right[i] = right[i] / c
        left[i] = left[i] * c
    if steady is not None:
        values[steady] = 0.0
        right[steady] = 0.5 * (right[steady] + right[steady].conj().T)

    return EigenSystem(
        values=values,
        right=right,
        left=left,
        hdim=d,
        clusters=_cluster(values, tol),
        cluster_tol=tol,
        steady_index=steady,
        residual=residual,
    )


def projector_apply(sys: EigenSystem, value: complex, op: np.ndarray) -> np.ndarray:
    """P^value op = sum over the eigenspace of right * Tr{left op}."""
    return sys.project(value, np.asarray(op, dtype=complex))


def constrained_resolvent(
    sup: Superoperator,
    z: complex,
    exclude: Iterable[complex],
    op: np.ndarray,
    eigen: Optional[EigenSystem] = None,
) -> np.ndarray:
    """Solve (z - L) Y = (1 - P_excl) X with P_excl Y = 0.

    ``exclude`` lists eigenvalues whose eigenspaces are projected out.  If
    ``z`` lies within 1e-9 of any other eigenvalue a :class:`NearPoleError`
    is raised.
    """
    if eigen is None:
        eigen = spectral_decompose(sup)
    excluded = set()
    for value in exclude:
        excluded.update(eigen.cluster_of(value))
    for i, lam in enumerate(eigen.values):
        if i not in excluded and abs(z - lam) < POLE_TOL:
            raise NearPoleError(z, complex(lam))

    d = sup.hdim
    n = d * d
    p_ex = np.zeros((n, n), dtype=complex)
    for i in sorted(excluded):
        p_ex += np.outer(vec(eigen.right[i]), vec(eigen.left[i].T))
    x = vec(op)
    rhs = x - p_ex @ x
    a = (z * np.eye(n) - sup.matrix) @ (np.eye(n) - p_ex) + p_ex
    return unvec(la.solve(a, rhs), d)

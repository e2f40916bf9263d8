"""Dense complex linear algebra and bosonic Fock-space operator construction.

All operators are plain ``numpy.ndarray`` matrices of ``complex128`` in
row-major order, kept small enough (composite dimension capped, default
4096) that dense kernels are both simple and fast. Every function here is
pure: identical inputs give bit-identical outputs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import (
    CapacityError,
    InvalidArgumentError,
    NumericalError,
    SingularMatrixError,
)

# Operators are bare complex ndarrays; the alias documents intent.
CMatrix = np.ndarray

DEFAULT_DIM_CAP = 4096
CAP_ENV_VAR = "BLOCKADE_LAB_CAP"


def dimension_cap() -> int:
    """Composite-dimension cap, overridable via the BLOCKADE_LAB_CAP env var."""
    raw = os.environ.get(CAP_ENV_VAR)
    if raw is None:
        return DEFAULT_DIM_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise InvalidArgumentError(f"{CAP_ENV_VAR} must be an integer, got {raw!r}") from exc
    if cap < 2:
        raise InvalidArgumentError(f"{CAP_ENV_VAR} must be >= 2, got {cap}")
    return cap


def _check_capacity(dim: int) -> None:
    cap = dimension_cap()
    if dim > cap:
        raise CapacityError(f"composite dimension {dim} exceeds cap {cap}")


@dataclass(frozen=True)
class HilbertSpec:
    """Ordered mode labels with per-mode Fock cutoffs.

    ``cutoff`` is the dimension of the mode's truncated Fock space, i.e. the
    kept states are |0> ... |cutoff-1>. Canonical orderings are
    ("a1", "a2", "b") for the full model and ("a1", "a2") reduced.
    """

    modes: tuple[tuple[str, int], ...]

    def __post_init__(self):
        labels = [label for label, _ in self.modes]
        if len(set(labels)) != len(labels):
            raise InvalidArgumentError(f"mode labels must be unique, got {labels}")
        for label, cutoff in self.modes:
            if cutoff < 2:
                raise InvalidArgumentError(f"cutoff for mode {label!r} must be >= 2, got {cutoff}")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.modes)

    @property
    def cutoffs(self) -> tuple[int, ...]:
        return tuple(cutoff for _, cutoff in self.modes)

    @property
    def dim(self) -> int:
        return int(np.prod(self.cutoffs, dtype=np.int64))

    def cutoff(self, label: str) -> int:
        for name, cutoff in self.modes:
            if name == label:
                return cutoff
        raise InvalidArgumentError(f"unknown mode label {label!r}; have {self.labels}")

    def axis(self, label: str) -> int:
        for i, (name, _) in enumerate(self.modes):
            if name == label:
                return i
        raise InvalidArgumentError(f"unknown mode label {label!r}; have {self.labels}")


def identity(dim: int) -> CMatrix:
    return np.eye(dim, dtype=np.complex128)


def annihilation(cutoff: int) -> CMatrix:
    """Truncated bosonic annihilation operator: entry (n, n+1) = sqrt(n+1)."""
    if cutoff < 2:
        raise InvalidArgumentError(f"cutoff must be >= 2, got {cutoff}")
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=np.float64)), k=1).astype(np.complex128)


def creation(cutoff: int) -> CMatrix:
    return dagger(annihilation(cutoff))


def number_operator(cutoff: int) -> CMatrix:
    if cutoff < 2:
        raise InvalidArgumentError(f"cutoff must be >= 2, got {cutoff}")
    return np.diag(np.arange(cutoff, dtype=np.float64)).astype(np.complex128)


def dagger(a: CMatrix) -> CMatrix:
    return np.asarray(a, dtype=np.complex128).conj().T.copy()


def kron(a: CMatrix, b: CMatrix) -> CMatrix:
    """Kronecker product with a capacity guard on the composite dimension."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    _check_capacity(a.shape[0] * b.shape[0])
    out = np.kron(a, b)
    if not np.all(np.isfinite(out.view(np.float64))):
        raise NumericalError("kron produced non-finite entries")
    return out


def embed(op: CMatrix, label: str, spec: HilbertSpec) -> CMatrix:
    """Lift a single-mode operator into the composite space of ``spec``."""
    op = np.asarray(op, dtype=np.complex128)
    cutoff = spec.cutoff(label)
    if op.shape != (cutoff, cutoff):
        raise InvalidArgumentError(
            f"operator shape {op.shape} does not match cutoff {cutoff} of mode {label!r}"
        )
    _check_capacity(spec.dim)
    factors = [op if name == label else identity(c) for name, c in spec.modes]
    return reduce(np.kron, factors)


def trace(a: CMatrix) -> complex:
    return complex(np.trace(a))


def expectation(op: CMatrix, rho) -> complex:
    """Tr(op @ rho); accepts a bare matrix or any object with a .matrix field."""
    mat = getattr(rho, "matrix", rho)
    if op.shape != mat.shape:
        raise InvalidArgumentError(f"dimension mismatch: op {op.shape} vs state {mat.shape}")
    # trace(A @ B) without forming the product
    return complex(np.sum(op * mat.T))


def matmul(a: CMatrix, b: CMatrix) -> CMatrix:
    if a.shape[1] != b.shape[0]:
        raise InvalidArgumentError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def eig(a: CMatrix) -> np.ndarray:
    """Eigenvalues of a general complex matrix, unordered."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"eig needs a square matrix, got shape {a.shape}")
    _check_capacity(a.shape[0])
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed to converge on {a.shape[0]}x{a.shape[0]} matrix: {exc}") from exc


def solve_linear(a: CMatrix, b: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    """Solve A x = b with residual ||Ax-b|| <= rel_tol * ||b||, refining once.

    Raises SingularMatrixError (with a condition estimate) when the system is
    singular to tolerance or the residual bound cannot be met.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"solve_linear needs a square matrix, got {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise InvalidArgumentError(f"rhs length {b.shape[0]} does not match matrix {a.shape}")
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(
            f"linear system singular: {exc}", condition_estimate=float(np.linalg.cond(a))
        ) from exc
    bnorm = float(np.linalg.norm(b))
    tol = rel_tol * max(bnorm, np.finfo(float).tiny)
    residual = b - a @ x
    if float(np.linalg.norm(residual)) > tol:
        x = x + np.linalg.solve(a, residual)  # one step of iterative refinement
        residual = b - a @ x
        if float(np.linalg.norm(residual)) > tol:
            raise SingularMatrixError(
                f"residual {np.linalg.norm(residual):.3e} exceeds {tol:.3e} after refinement",
                condition_estimate=float(np.linalg.cond(a)),
            )
    return x

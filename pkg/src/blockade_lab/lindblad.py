"""Numerical open-system engine: Liouvillian, evolution, steady state, g2.

Density matrices are vectorized row-major, so A rho B maps to the
superoperator kron(A, B.T). The Liouvillian is assembled sparse: the full
three-mode model has d = 128 and a dense d^2 x d^2 matrix would need
gigabytes, while sparse LU solves it in seconds. Small systems are solved
densely through tensor_core.solve_linear.

The dissipator uses the 1/2 convention
L[o] rho = o rho o^dag - (o^dag o rho + rho o^dag o) / 2,
which is the unique choice whose no-jump part reproduces the -i kappa/2
terms of the non-Hermitian Hamiltonian; convention="literal" keeps the
published form (without the 1/2) available, but that form does not conserve
the trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    DegenerateSteadyStateError,
    InstabilityError,
    InvalidArgumentError,
    NumericalError,
    UndefinedCorrelationError,
)
from .model import DissipatorSpec, SystemParams
from .tensor_core import CMatrix, HilbertSpec, annihilation, dagger, embed, solve_linear

CONVENTIONS = ("half", "literal")

# Above this superoperator size the steady-state solve switches from dense
# LU to sparse LU, and the null-space uniqueness check from dense SVD to
# shift-inverted Arnoldi.
DENSE_SOLVE_LIMIT = 2048

ENTRY_DIVERGENCE_LIMIT = 1e6
MAX_TOTAL_STEPS = 50_000_000


@dataclass
class DensityMatrix:
    """Dense density matrix together with the Hilbert space it lives on."""

    matrix: np.ndarray
    spec: HilbertSpec

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.complex128)
        d = self.spec.dim
        if self.matrix.shape != (d, d):
            raise InvalidArgumentError(
                f"density matrix shape {self.matrix.shape} does not match spec dim {d}"
            )

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    @property
    def hermiticity_deviation(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


@dataclass
class Liouvillian:
    """Sparse d^2 x d^2 generator acting on row-major vectorized states.

    The Hamiltonian and dissipator list it was built from are kept so the
    large-system steady-state solver can form the effective (no-jump)
    Hamiltonian; both are None for hand-assembled generators.
    """

    matrix: sp.csr_matrix
    spec: HilbertSpec
    convention: str = "half"
    hamiltonian: np.ndarray | None = None
    dissipators: DissipatorSpec | None = None

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def scale(self) -> float:
        data = self.matrix.data
        return float(np.max(np.abs(data))) if data.size else 0.0

    def effective_hamiltonian(self) -> np.ndarray | None:
        """H minus the anticommutator part of the dissipators (no-jump drift)."""
        if self.hamiltonian is None or self.dissipators is None:
            return None
        weight = 0.5 if self.convention == "half" else 1.0
        heff = self.hamiltonian.astype(np.complex128).copy()
        for rate, op in self.dissipators:
            heff -= 1j * weight * rate * (op.conj().T @ op)
        return heff


@dataclass
class Trajectory:
    """Observable records along a fixed-step integration."""

    times: np.ndarray
    data: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise InvalidArgumentError("trajectory times must be strictly increasing")
        for key, series in self.data.items():
            if len(series) != len(self.times):
                raise InvalidArgumentError(f"record {key!r} length does not match times")


def vacuum_state(spec: HilbertSpec) -> DensityMatrix:
    rho = np.zeros((spec.dim, spec.dim), dtype=np.complex128)
    rho[0, 0] = 1.0
    return DensityMatrix(rho, spec)


def mode_annihilation(spec: HilbertSpec, mode: str) -> CMatrix:
    return embed(annihilation(spec.cutoff(mode)), mode, spec)


def build_liouvillian(
    h: CMatrix,
    dissipators: DissipatorSpec,
    spec: HilbertSpec,
    convention: str = "half",
) -> Liouvillian:
    """Assemble L(rho) = -i[H, rho] + sum_k r_k L[o_k] rho as a sparse matrix."""
    if convention not in CONVENTIONS:
        raise InvalidArgumentError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    d = spec.dim
    if h.shape != (d, d):
        raise InvalidArgumentError(f"Hamiltonian shape {h.shape} does not match spec dim {d}")
    eye = sp.identity(d, dtype=np.complex128, format="csr")
    hs = sp.csr_matrix(h)
    lio = -1j * (sp.kron(hs, eye, format="csr") - sp.kron(eye, hs.T, format="csr"))
    anti_weight = 0.5 if convention == "half" else 1.0
    for rate, op in dissipators:
        if rate < 0:
            raise InvalidArgumentError(f"dissipator rate must be >= 0, got {rate}")
        if op.shape != (d, d):
            raise InvalidArgumentError(f"collapse operator shape {op.shape} does not match dim {d}")
        o = sp.csr_matrix(op)
        odo = (o.conj().T @ o).tocsr()
        jump = sp.kron(o, o.conj(), format="csr")
        anti = sp.kron(odo, eye, format="csr") + sp.kron(eye, odo.T, format="csr")
        lio = lio + rate * (jump - anti_weight * anti)
    return Liouvillian(
        matrix=lio.tocsr(),
        spec=spec,
        convention=convention,
        hamiltonian=np.asarray(h, dtype=np.complex128),
        dissipators=[(float(rate), np.asarray(op, dtype=np.complex128)) for rate, op in dissipators],
    )


def apply_liouvillian(lio: Liouvillian, rho: DensityMatrix) -> np.ndarray:
    """d rho / dt as a dense matrix."""
    d = lio.dim
    return (lio.matrix @ rho.matrix.ravel()).reshape(d, d)


def _expectation_vectors(spec: HilbertSpec, operators: dict[str, CMatrix]) -> dict[str, np.ndarray]:
    # tr(A rho) = vec(A.T) . vec(rho) for row-major vec
    return {name: np.ascontiguousarray(op.T).ravel() for name, op in operators.items()}


def evolve(
    rho0: DensityMatrix,
    lio: Liouvillian,
    t_grid: np.ndarray,
    operators: dict[str, CMatrix] | None = None,
) -> Trajectory:
    """Fixed-step classical RK4 integration of d rho / dt = L(rho).

    Records the expectation of each named operator at every grid time, plus
    the diagnostics "trace" and "herm_dev". The step obeys
    h <= min(0.005 / scale(L), grid spacing) for determinism and accuracy.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise InvalidArgumentError("t_grid must increase strictly from 0")
    operators = operators or {}
    d = lio.dim
    if rho0.spec.dim != d:
        raise InvalidArgumentError("state and Liouvillian dimensions differ")

    a = lio.matrix
    scale = max(lio.scale, 1.0)
    h_max = 0.005 / scale
    exp_vecs = _expectation_vectors(lio.spec, operators)

    n_times = len(t_grid)
    records: dict[str, np.ndarray] = {
        name: np.empty(n_times, dtype=np.complex128) for name in operators
    }
    records["trace"] = np.empty(n_times, dtype=np.complex128)
    records["herm_dev"] = np.empty(n_times, dtype=float)

    v = rho0.matrix.ravel().astype(np.complex128).copy()

    total_steps = 0
    for spacing in np.diff(t_grid):
        total_steps += int(math.ceil(spacing / min(h_max, spacing)))
    if total_steps > MAX_TOTAL_STEPS:
        raise InstabilityError(
            f"step bound h = {h_max:.3e} needs {total_steps} steps (> {MAX_TOTAL_STEPS})"
        )

    def record(i: int, t: float) -> None:
        m = v.reshape(d, d)
        records["trace"][i] = np.trace(m)
        records["herm_dev"][i] = float(np.max(np.abs(m - m.conj().T)))
        for name, w in exp_vecs.items():
            records[name][i] = w @ v
        if float(np.max(np.abs(v))) > ENTRY_DIVERGENCE_LIMIT:
            raise InstabilityError(f"state entries diverged at t = {t:g}", time=t)

    record(0, t_grid[0])
    for i in range(1, n_times):
        spacing = t_grid[i] - t_grid[i - 1]
        n_sub = int(math.ceil(spacing / min(h_max, spacing)))
        h = spacing / n_sub
        for _ in range(n_sub):
            k1 = a @ v
            k2 = a @ (v + 0.5 * h * k1)
            k3 = a @ (v + 0.5 * h * k2)
            k4 = a @ (v + h * k3)
            v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        record(i, t_grid[i])

    return Trajectory(times=t_grid.copy(), data=records)


def _trace_row(d: int) -> np.ndarray:
    row = np.zeros(d * d, dtype=np.complex128)
    row[:: d + 1] = 1.0
    return row


def _check_null_space_unique(lio: Liouvillian) -> None:
    n = lio.matrix.shape[0]
    if n <= DENSE_SOLVE_LIMIT:
        sigma = np.linalg.svd(lio.matrix.toarray(), compute_uv=False)
        smallest, second = sigma[-1], sigma[-2]
        floor = 1e-14 * max(sigma[0], 1.0)
        if second <= 1e3 * max(smallest, floor):
            raise DegenerateSteadyStateError(
                f"null space not unique: singular values {smallest:.3e}, {second:.3e}"
            )
        return
    # Large systems: two eigenvalues nearest zero via shift-inverted Arnoldi.
    # Failure to converge is recorded as inconclusive rather than fatal; the
    # residual check below still guards the returned state.
    try:
        vals = spla.eigs(
            lio.matrix.tocsc(),
            k=2,
            sigma=1e-10 * max(lio.scale, 1.0) * 1j,
            which="LM",
            return_eigenvectors=False,
            maxiter=200,
        )
    except Exception:
        return
    mags = np.sort(np.abs(vals))
    floor = 1e-12 * max(lio.scale, 1.0)
    if mags[1] <= 1e3 * max(mags[0], floor):
        raise DegenerateSteadyStateError(
            f"null space not unique: eigenvalue magnitudes {mags[0]:.3e}, {mags[1]:.3e}"
        )


def _replaced_system(lio: Liouvillian) -> tuple[sp.csr_matrix, np.ndarray, float]:
    """Row-replaced linear system (trace row in place of row 0) and its rhs."""
    d = lio.dim
    weight = max(lio.scale, 1.0)
    trace_row = sp.csr_matrix(weight * _trace_row(d))
    system = sp.vstack([trace_row, lio.matrix[1:, :]], format="csr")
    rhs = np.zeros(d * d, dtype=np.complex128)
    rhs[0] = weight
    return system, rhs, weight


def _normalize_and_verify(x: np.ndarray, lio: Liouvillian, residual_tol: float) -> DensityMatrix:
    d = lio.dim
    rho = x.reshape(d, d)
    tr = np.trace(rho)
    if abs(tr) < 1e-12:
        raise NumericalError("steady-state solve returned a traceless matrix")
    rho = rho / tr
    residual = float(np.linalg.norm(lio.matrix @ rho.ravel()))
    if residual > residual_tol:
        raise NumericalError(
            f"steady-state residual ||L(rho)|| = {residual:.3e} exceeds {residual_tol:.1e}"
        )
    return DensityMatrix(rho, lio.spec)


class SylvesterPreconditioner:
    """Exact inverse of the no-jump part A rho + rho A^H, A = -i H_eff.

    One complex Schur decomposition of the d x d effective Hamiltonian turns
    every application into two triangular Sylvester solves plus four small
    matrix products, sidestepping any factorization of the d^2 x d^2 system.
    """

    def __init__(self, heff: np.ndarray):
        import scipy.linalg as sla
        from scipy.linalg import lapack

        a = -1j * np.asarray(heff, dtype=np.complex128)
        self.t, self.z = sla.schur(a, output="complex")
        self.zh = self.z.conj().T
        self.d = a.shape[0]
        (self._trsyl,) = lapack.get_lapack_funcs(("trsyl",), (self.t,))

    def solve(self, y: np.ndarray) -> np.ndarray:
        c = self.zh @ y.reshape(self.d, self.d) @ self.z
        out, scale, info = self._trsyl(self.t, self.t.conj().T, c, tranb="C")
        if info < 0:
            raise NumericalError(f"triangular Sylvester solve failed (info={info})")
        return ((self.z @ out @ self.zh) / scale).ravel()


def _steady_sylvester_gmres(
    lio: Liouvillian,
    x0: np.ndarray | None,
    residual_tol: float,
    max_passes: int = 4,
) -> np.ndarray | None:
    """Deflated, right-preconditioned GMRES; returns None when it stagnates.

    Krylov iterations cannot update the quasi-conserved directions (metastable
    populations with decay rates far below the Liouvillian scale), so this
    path succeeds only when the initial guess already carries them; the
    caller falls back to a direct factorization otherwise.
    """
    heff = lio.effective_hamiltonian()
    if heff is None:
        return None
    precond = SylvesterPreconditioner(heff)
    d = lio.dim
    n = d * d
    sigma = max(lio.scale, 1.0)
    p = np.zeros(n, dtype=np.complex128)
    p[0] = sigma
    tvec = _trace_row(d)
    lmat = lio.matrix

    def deflated(xv: np.ndarray) -> np.ndarray:
        return lmat @ xv + p * (tvec @ xv)

    op = spla.LinearOperator((n, n), matvec=lambda u: deflated(precond.solve(u)), dtype=complex)
    x = np.zeros(n, dtype=np.complex128) if x0 is None else x0.astype(np.complex128).copy()
    previous = np.inf
    for _ in range(max_passes):
        r = p - deflated(x)
        u, _ = spla.gmres(op, r, rtol=1e-12, atol=0.0, restart=60, maxiter=2)
        x = x + precond.solve(u)
        tr = np.trace(x.reshape(d, d))
        if abs(tr) < 1e-12:
            return None
        res = float(np.linalg.norm(lmat @ (x / tr)))
        if res <= residual_tol:
            return x
        if res > 0.5 * previous:
            break  # stagnation: quasi-conserved directions are off
        previous = res
    return None


class ReusableSteadyStateSolver:
    """One sparse LU factorization reused across a family of nearby Liouvillians.

    Factoring the row-replaced system is the expensive part of a large
    steady-state solve; parameter sweeps perturb the generator only weakly,
    so every other grid point is solved by GMRES preconditioned with the
    single factorization (a handful of iterations each).
    """

    def __init__(self, reference: Liouvillian):
        system, _, _ = _replaced_system(reference)
        self.spec = reference.spec
        self.lu = spla.splu(system.tocsc())
        self.n = system.shape[0]

    def solve(self, lio: Liouvillian, residual_tol: float = 1e-8, max_iter: int = 400) -> np.ndarray:
        if lio.spec != self.spec:
            raise InvalidArgumentError("solver was factored for a different Hilbert space")
        system, rhs, _ = _replaced_system(lio)
        op = spla.LinearOperator(
            (self.n, self.n), matvec=lambda u: system @ self.lu.solve(u), dtype=complex
        )
        u, info = spla.gmres(op, rhs, rtol=1e-13, atol=0.0, restart=80,
                             maxiter=max(1, max_iter // 80))
        x = self.lu.solve(u)
        d = lio.dim
        tr = np.trace(x.reshape(d, d))
        if abs(tr) < 1e-12 or float(np.linalg.norm(lio.matrix @ (x / tr))) > residual_tol:
            raise NumericalError(
                "reused factorization did not converge for this generator; "
                "factor a new solver closer to these parameters"
            )
        return x


def pad_density_matrix(rho: DensityMatrix, spec: HilbertSpec) -> DensityMatrix:
    """Zero-pad a state onto a spec with the same modes and enlarged cutoffs."""
    small = rho.spec
    if small.labels != spec.labels:
        raise InvalidArgumentError(f"mode labels differ: {small.labels} vs {spec.labels}")
    if any(cs > cb for cs, cb in zip(small.cutoffs, spec.cutoffs)):
        raise InvalidArgumentError("target cutoffs must dominate the source cutoffs")
    if small.cutoffs == spec.cutoffs:
        return DensityMatrix(rho.matrix.copy(), spec)
    tensor = rho.matrix.reshape(*small.cutoffs, *small.cutoffs)
    pads = [(0, cb - cs) for cs, cb in zip(small.cutoffs, spec.cutoffs)]
    tensor = np.pad(tensor, pads + pads)
    return DensityMatrix(tensor.reshape(spec.dim, spec.dim), spec)


def steady_state(
    lio: Liouvillian,
    check_unique: bool = True,
    residual_tol: float = 1e-8,
    initial_guess: DensityMatrix | None = None,
    solver: ReusableSteadyStateSolver | None = None,
) -> DensityMatrix:
    """Solve L(rho) = 0 with unit trace by replacing one row with the trace row.

    Small systems go through a dense residual-guaranteed solve. Large systems
    try, in order: the initial guess itself (zero-padded from a smaller-cutoff
    space if needed), a reusable sparse factorization, Sylvester-preconditioned
    GMRES seeded by the guess, and finally a fresh direct sparse LU.
    """
    d = lio.dim
    n = d * d
    if check_unique:
        _check_null_space_unique(lio)
    if n <= DENSE_SOLVE_LIMIT:
        system, rhs, _ = _replaced_system(lio)
        x = solve_linear(system.toarray(), rhs)
        return _normalize_and_verify(x, lio, residual_tol)

    guess_vec = None
    if initial_guess is not None:
        padded = pad_density_matrix(initial_guess, lio.spec)
        guess_vec = padded.matrix.ravel()
        if float(np.linalg.norm(lio.matrix @ guess_vec)) <= residual_tol:
            return _normalize_and_verify(guess_vec, lio, residual_tol)
    if solver is not None:
        return _normalize_and_verify(solver.solve(lio, residual_tol), lio, residual_tol)
    x = _steady_sylvester_gmres(lio, guess_vec, residual_tol)
    if x is not None:
        return _normalize_and_verify(x, lio, residual_tol)
    system, rhs, _ = _replaced_system(lio)
    lu = spla.splu(system.tocsc())
    x = lu.solve(rhs)
    resid = rhs - system @ x
    if float(np.linalg.norm(resid)) > 1e-10 * float(np.linalg.norm(rhs)):
        x = x + lu.solve(resid)
    return _normalize_and_verify(x, lio, residual_tol)


def _real_expectation(op: CMatrix, rho: DensityMatrix, imag_tol: float | None, what: str) -> float:
    value = complex(np.sum(op * rho.matrix.T))
    if imag_tol is not None and abs(value.imag) > imag_tol * max(1.0, abs(value.real)):
        raise NumericalError(
            f"{what} has imaginary residue {value.imag:.3e} beyond tolerance {imag_tol:.1e}"
        )
    return value.real


def photon_number(rho: DensityMatrix, mode: str, imag_tol: float | None = 1e-10) -> float:
    """Re Tr(a^dag a rho) for the given mode."""
    a = mode_annihilation(rho.spec, mode)
    return _real_expectation(dagger(a) @ a, rho, imag_tol, f"<n_{mode}>")


def g2_zero(rho: DensityMatrix, mode: str, imag_tol: float | None = 1e-10) -> float:
    """Equal-time second-order correlation Tr(a+a+aa rho) / Tr(a+a rho)^2."""
    a = mode_annihilation(rho.spec, mode)
    ad = dagger(a)
    denom = _real_expectation(ad @ a, rho, imag_tol, f"<n_{mode}>")
    if denom <= 1e-14:
        raise UndefinedCorrelationError(
            f"mode {mode!r} population {denom:.3e} too small for a correlation"
        )
    numer = _real_expectation(ad @ ad @ a @ a, rho, imag_tol, f"<a+a+aa>_{mode}")
    return numer / denom ** 2


def g2_tau(
    rho_ss: DensityMatrix,
    lio: Liouvillian,
    tau_grid: np.ndarray,
    mode: str,
    imag_tol: float | None = 1e-10,
) -> np.ndarray:
    """Delayed correlation via quantum regression: evolve a rho_ss a^dag under L."""
    tau_grid = np.asarray(tau_grid, dtype=float)
    residual = float(np.linalg.norm(lio.matrix @ rho_ss.matrix.ravel()))
    if residual > 1e-6:
        raise InvalidArgumentError(
            f"rho_ss is not a steady state of this Liouvillian (||L(rho)|| = {residual:.3e})"
        )
    a = mode_annihilation(rho_ss.spec, mode)
    ad = dagger(a)
    n_op = ad @ a
    denom = _real_expectation(n_op, rho_ss, imag_tol, f"<n_{mode}>")
    if denom <= 1e-14:
        raise UndefinedCorrelationError(f"mode {mode!r} has no steady population")
    conditional = DensityMatrix(a @ rho_ss.matrix @ ad, rho_ss.spec)
    if len(tau_grid) == 1 and tau_grid[0] == 0.0:
        numer = np.array([complex(np.sum(n_op * conditional.matrix.T))])
    else:
        traj = evolve(conditional, lio, tau_grid, operators={"n": n_op})
        numer = traj.data["n"]
    series = numer.real / denom ** 2
    if imag_tol is not None:
        worst = float(np.max(np.abs(numer.imag)))
        if worst > imag_tol * max(1.0, float(np.max(np.abs(numer.real)))):
            raise NumericalError(f"g2(tau) imaginary residue {worst:.3e} beyond tolerance")
    return series


@dataclass(frozen=True)
class ConvergenceReport:
    """Relative observable shifts under single-cutoff doublings."""

    base_value: float
    shifts: dict[str, float]
    threshold: float

    @property
    def passed(self) -> bool:
        return all(s < self.threshold for s in self.shifts.values())


def convergence_check(
    params: SystemParams,
    spec: HilbertSpec,
    observable,
    threshold: float = 0.05,
) -> ConvergenceReport:
    """Double each mode cutoff in turn and report the observable's relative shift.

    ``observable`` is a callable (params, spec) -> float. Doubled spaces are
    still subject to the composite-dimension cap.
    """
    base = float(observable(params, spec))
    shifts: dict[str, float] = {}
    for label, cutoff in spec.modes:
        doubled = HilbertSpec(
            tuple((m, 2 * c if m == label else c) for m, c in spec.modes)
        )
        value = float(observable(params, doubled))
        shifts[label] = abs(value - base) / max(abs(base), 1e-300)
    return ConvergenceReport(base_value=base, shifts=shifts, threshold=threshold)

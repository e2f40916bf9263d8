"""Closed-form weak-drive steady-state amplitudes and optimal-parameter relations.

Everything here is a pure function of SystemParams (or of the bare couplings).
The amplitude formulas assume the weak-drive hierarchy and the simplifications
delta1 == delta2, kappa1 == kappa2; preconditions are enforced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateParameterError,
    InvalidArgumentError,
    PoleError,
    UndefinedCorrelationError,
)
from .model import SystemParams, build_undriven, kerr_strength, reduced_spec
from .tensor_core import eig

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class AmplitudeSet:
    """Probability amplitudes of |n1, n2> with n1 + n2 <= 2."""

    c00: complex
    c10: complex
    c01: complex
    c20: complex
    c11: complex
    c02: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.c00, self.c10, self.c01, self.c20, self.c11, self.c02])


@dataclass(frozen=True)
class OptimalPoint:
    """One branch of the interference-blockade optimum."""

    branch: str
    delta2: float
    lambda2: float


@dataclass(frozen=True)
class FeasibilityReport:
    """Joint solvability of the two real conditions for |c20| = 0 (drive on a1)."""

    chi: float
    kappa2: float
    condition2_roots: tuple[float, float]
    condition1_residuals: tuple[float, float]
    condition1_roots: tuple[float, float]
    feasible: bool


def _check_symmetric_preconditions(params: SystemParams) -> None:
    scale = max(abs(params.delta1), abs(params.delta2), params.kappa2, 1e-300)
    if abs(params.delta1 - params.delta2) > 1e-9 * scale:
        raise InvalidArgumentError(
            f"closed forms require delta1 == delta2 (got {params.delta1} vs {params.delta2})"
        )
    kscale = max(params.kappa1, params.kappa2, 1e-300)
    if abs(params.kappa1 - params.kappa2) > 1e-9 * kscale:
        raise InvalidArgumentError(
            f"closed forms require kappa1 == kappa2 (got {params.kappa1} vs {params.kappa2})"
        )


def _denominators(params: SystemParams) -> tuple[complex, complex]:
    """Shared denominators M and N of both steady-state amplitude sets."""
    chi = kerr_strength(params)
    d2 = params.delta2
    k2 = params.kappa2
    ll = params.lambda1 * params.lambda2
    w1 = chi - 2.0 * d2 + 1j * k2
    w2 = 2.0 * chi - 2.0 * d2 + 1j * k2
    w4 = 4.0 * chi - 2.0 * d2 + 1j * k2
    m = 4.0 * ll + (2.0 * d2 - 1j * k2) * w2
    n = (4.0 * ll * w2 + (2.0 * d2 - 1j * k2) * w1 * w4) * m
    if abs(m) <= 1e-12 * k2 ** 2:
        raise PoleError(f"|M| = {abs(m):.3e} vanishes at delta2 = {d2}")
    if abs(n) <= 1e-12 * k2 ** 5:
        raise PoleError(f"|N| = {abs(n):.3e} vanishes at delta2 = {d2}")
    return m, n


def amplitude_rhs(amps: AmplitudeSet, params: SystemParams, include_drive_feeds: bool = True) -> AmplitudeSet:
    """Time derivatives dC/dt of the weak-drive amplitude equations.

    c00 is pinned to a constant (its derivative is 0). With
    ``include_drive_feeds=False`` the two higher-order drive terms E*c11 (in
    the c10 equation) and sqrt(2) E*c02 (in the c01 equation) are dropped,
    which is exactly the truncation under which the closed-form steady state
    is stationary.
    """
    chi = kerr_strength(params)
    d1, d2 = params.delta1, params.delta2
    k1, k2 = params.kappa1, params.kappa2
    l1, l2 = params.lambda1, params.lambda2
    e = params.E

    rhs10 = (d1 - 0.5j * k1 - chi) * amps.c10 + l1 * amps.c01
    rhs01 = (d2 - 0.5j * k2) * amps.c01 + l2 * amps.c10 + e * amps.c00
    if include_drive_feeds:
        rhs10 += e * amps.c11
        rhs01 += _SQRT2 * e * amps.c02
    rhs20 = (2.0 * d1 - 1j * k1 - 4.0 * chi) * amps.c20 + _SQRT2 * l1 * amps.c11
    rhs11 = (
        (d1 - 0.5j * k1 + d2 - 0.5j * k2 - chi) * amps.c11
        + _SQRT2 * (l1 * amps.c02 + l2 * amps.c20)
        + e * amps.c10
    )
    rhs02 = (2.0 * d2 - 1j * k2) * amps.c02 + _SQRT2 * l2 * amps.c11 + _SQRT2 * e * amps.c01
    return AmplitudeSet(
        c00=0.0,
        c10=-1j * rhs10,
        c01=-1j * rhs01,
        c20=-1j * rhs20,
        c11=-1j * rhs11,
        c02=-1j * rhs02,
    )


def steady_amplitudes_cavity_drive(params: SystemParams) -> AmplitudeSet:
    """Closed-form steady amplitudes when the laser drives the ordinary cavity a2."""
    _check_symmetric_preconditions(params)
    if params.E <= 0:
        raise InvalidArgumentError("steady amplitudes need a drive amplitude E > 0")
    chi = kerr_strength(params)
    d2, k2 = params.delta2, params.kappa2
    l1, l2 = params.lambda1, params.lambda2
    e = params.E
    m, n = _denominators(params)
    w1 = chi - 2.0 * d2 + 1j * k2
    w2 = 2.0 * chi - 2.0 * d2 + 1j * k2
    w4 = 4.0 * chi - 2.0 * d2 + 1j * k2
    return AmplitudeSet(
        c00=1.0,
        c10=-4.0 * e * l1 / m,
        c01=2.0 * e * (2.0 * d2 - 2.0 * chi - 1j * k2) / m,
        c20=8.0 * _SQRT2 * e ** 2 * l1 ** 2 * w1 / n,
        c11=8.0 * e ** 2 * l1 * w1 * w4 / n,
        c02=2.0 * _SQRT2 * e ** 2 * (4.0 * l1 * l2 * chi + w1 * w2 * w4) / n,
    )


def steady_amplitudes_om_drive(params: SystemParams) -> AmplitudeSet:
    """Closed-form steady amplitudes when the laser drives the optomechanical cavity a1."""
    _check_symmetric_preconditions(params)
    if params.E <= 0:
        raise InvalidArgumentError("steady amplitudes need a drive amplitude E > 0")
    chi = kerr_strength(params)
    d2, k2 = params.delta2, params.kappa2
    l2 = params.lambda2
    e = params.E
    m, n = _denominators(params)
    w1 = chi - 2.0 * d2 + 1j * k2
    w2 = 2.0 * chi - 2.0 * d2 + 1j * k2
    dd = 2.0 * d2 - 1j * k2
    return AmplitudeSet(
        c00=1.0,
        c10=2.0 * e * dd / m,
        c01=-4.0 * e * l2 / m,
        c20=2.0 * _SQRT2 * e ** 2 * dd ** 2 * w1 / n,
        c11=8.0 * e ** 2 * l2 * dd * (2.0 * d2 - 2.0 * chi - 1j * k2) / n,
        c02=8.0 * _SQRT2 * e ** 2 * l2 ** 2 * w2 / n,
    )


def g2_analytic(amps: AmplitudeSet, cavity: int) -> float:
    """Equal-time second-order correlation from the two-photon amplitudes."""
    if cavity == 1:
        single, double = amps.c10, amps.c20
    elif cavity == 2:
        single, double = amps.c01, amps.c02
    else:
        raise InvalidArgumentError(f"cavity must be 1 or 2, got {cavity}")
    if abs(single) == 0.0:
        raise UndefinedCorrelationError(f"cavity {cavity} single-photon amplitude vanishes")
    return 2.0 * abs(double) ** 2 / abs(single) ** 4


def g2_om_drive_closed_form(params: SystemParams) -> float:
    """g2 of cavity 1 under drive-on-a1, as the closed ratio ((chi-2d2)^2+k2^2)/|N/M^2|^2."""
    _check_symmetric_preconditions(params)
    chi = kerr_strength(params)
    m, n = _denominators(params)
    ratio = n / m ** 2
    return ((chi - 2.0 * params.delta2) ** 2 + params.kappa2 ** 2) / abs(ratio) ** 2


_BRANCH_SIGNS = {"+": 1.0, "-": -1.0}


def _branch_sign(branch: str) -> float:
    if branch not in _BRANCH_SIGNS:
        raise InvalidArgumentError(f"branch must be '+' or '-', got {branch!r}")
    return _BRANCH_SIGNS[branch]


def upb_delta2(chi: float, kappa2: float, branch: str) -> float:
    """Interference-optimal detuning; well defined for any chi >= 0."""
    sign = _branch_sign(branch)
    root = math.sqrt(3.0 * kappa2 ** 2 + 7.0 * chi ** 2)
    return sign * root / 6.0 + 7.0 * chi / 6.0


def upb_optimal(chi: float, kappa2: float, lambda1: float, branch: str) -> OptimalPoint:
    """Optimal (delta2, lambda2) pair that fully suppresses the |0,2> amplitude.

    The lambda2 relation has a 1/chi pole, so chi is guarded at 1e-3 kappa2;
    below the guard the required coupling exceeds any physical value.
    """
    sign = _branch_sign(branch)
    if kappa2 <= 0:
        raise InvalidArgumentError("kappa2 must be > 0")
    if chi < 1e-3 * kappa2:
        raise DegenerateParameterError(
            f"chi = {chi} below guard 1e-3 * kappa2; optimal coupling diverges"
        )
    if lambda1 == 0:
        raise DegenerateParameterError("lambda1 must be nonzero")
    root = math.sqrt(3.0 * kappa2 ** 2 + 7.0 * chi ** 2)
    delta2 = sign * root / 6.0 + 7.0 * chi / 6.0
    lambda2 = (
        -sign * (root / (54.0 * lambda1)) * (12.0 * kappa2 ** 2 / chi + 7.0 * chi)
        - 5.0 * chi ** 2 / (27.0 * lambda1)
    )
    return OptimalPoint(branch=branch, delta2=delta2, lambda2=lambda2)


def cpb_locations(chi: float, lambda1: float, lambda2: float) -> tuple[float, float] | None:
    """Detunings where a single-excitation eigenvalue crosses the laser.

    Returns (delta2_plus, delta2_minus), or None when lambda1*lambda2 <
    -chi^2/4 makes the square root imaginary (no real location).
    """
    radicand = lambda1 * lambda2 + chi ** 2 / 4.0
    if radicand < 0:
        return None
    root = math.sqrt(radicand)
    return (root + chi / 2.0, -root + chi / 2.0)


def single_excitation_eigenvalues(params: SystemParams) -> tuple[complex, complex, float]:
    """(eps_plus, eps_minus, eps_zero) of the undriven Hamiltonian blocks 1 and 0."""
    _check_symmetric_preconditions(params)
    chi = kerr_strength(params)
    root = np.sqrt(complex(params.lambda1 * params.lambda2 + chi ** 2 / 4.0))
    base = -chi / 2.0 + params.delta2
    return (base + root, base - root, 0.0)


def excitation_block_spectrum(params: SystemParams, n_exc: int) -> np.ndarray:
    """Numeric eigenvalues of the n_exc-total-excitation block of the undriven H."""
    _check_symmetric_preconditions(params)
    if n_exc not in (0, 1, 2):
        raise InvalidArgumentError(f"n_exc must be 0, 1 or 2, got {n_exc}")
    if n_exc == 0:
        return np.array([0.0 + 0.0j])
    spec = reduced_spec(3, 3)
    h = build_undriven(params, spec)
    basis = [(1, 0), (0, 1)] if n_exc == 1 else [(2, 0), (1, 1), (0, 2)]
    idx = [n1 * 3 + n2 for n1, n2 in basis]
    block = h[np.ix_(idx, idx)]
    return eig(block)


def conventional_optimal_lambda2(g: float, lambda1: float, omega_m: float) -> float:
    """Fitted ladder-resonance optimum 4.2 g^4 / (lambda1 omega_m^2) = 4.2 chi^2 / lambda1."""
    if lambda1 == 0:
        raise InvalidArgumentError("lambda1 must be nonzero")
    if omega_m <= 0:
        raise InvalidArgumentError("omega_m must be > 0")
    return 4.2 * g ** 4 / (lambda1 * omega_m ** 2)


def altdrive_blockade_feasibility(chi: float, kappa2: float) -> FeasibilityReport:
    """Show that |c20| = 0 under drive-on-a1 has no real solution.

    Condition 1 reads 12 d2^2 - 4 chi d2 = kappa2^2 and condition 2 reads
    4 d2 (chi - 4 d2)^2 = 0 (roots 0 and chi/4). The report carries the
    residual kappa2^2 - (12 d2^2 - 4 chi d2) of condition 1 at each root of
    condition 2; both residuals are strictly positive for kappa2 > 0.
    """
    if kappa2 <= 0:
        raise InvalidArgumentError("kappa2 must be > 0")
    roots2 = (0.0, chi / 4.0)
    residuals = tuple(kappa2 ** 2 - (12.0 * d * d - 4.0 * chi * d) for d in roots2)
    disc = math.sqrt(chi ** 2 + 3.0 * kappa2 ** 2)
    roots1 = ((chi + disc) / 6.0, (chi - disc) / 6.0)
    return FeasibilityReport(
        chi=chi,
        kappa2=kappa2,
        condition2_roots=roots2,
        condition1_residuals=residuals,
        condition1_roots=roots1,
        feasible=False,
    )

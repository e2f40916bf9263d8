"""Physical parameter record, unit conventions, and Hamiltonian builders.

Two coupled cavities (a1 optomechanical, a2 driven) with nonreciprocal
hopping lambda1 != lambda2, plus one mechanical mode b. All builders return
dense complex matrices on a truncated composite Fock space. Default units
put kappa2 = 1 ("kappa2-units"); "MHz-angular" records lab-frame angular
frequencies and converts explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError
from .tensor_core import CMatrix, HilbertSpec, annihilation, dagger, embed, number_operator

UNITS_KAPPA2 = "kappa2-units"
UNITS_MHZ = "MHz-angular"

REDUCED_MODES = ("a1", "a2")
FULL_MODES = ("a1", "a2", "b")

HBAR_SI = 1.054571817e-34  # J s

# Fields that carry angular-frequency units and participate in conversions.
_RATE_FIELDS = (
    "delta1", "delta2", "omega_m", "lambda1", "lambda2",
    "g", "E", "kappa1", "kappa2", "gamma_m",
)


@dataclass(frozen=True)
class SystemParams:
    """All physical rates and detunings of the double-cavity model.

    lambda1 and lambda2 may be negative (the '+' optimal branch produces
    negative lambda2); decay rates, omega_m, n_th and E must be nonnegative.
    """

    delta1: float
    delta2: float
    omega_m: float
    lambda1: float
    lambda2: float
    g: float
    E: float
    kappa1: float
    kappa2: float
    gamma_m: float
    n_th: float = 0.0
    units: str = UNITS_KAPPA2

    def __post_init__(self):
        for name in ("kappa1", "kappa2", "gamma_m", "omega_m", "n_th", "E"):
            value = getattr(self, name)
            if value < 0:
                raise InvalidArgumentError(f"{name} must be >= 0, got {value}")
        for name in _RATE_FIELDS + ("n_th",):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgumentError(f"{name} must be finite")
        if self.units not in (UNITS_KAPPA2, UNITS_MHZ):
            raise InvalidArgumentError(
                f"units must be {UNITS_KAPPA2!r} or {UNITS_MHZ!r}, got {self.units!r}"
            )

    def updated(self, **changes) -> "SystemParams":
        return replace(self, **changes)


def to_kappa2_units(params: SystemParams) -> SystemParams:
    """Divide every rate field by kappa2 so that kappa2 == 1."""
    if params.units == UNITS_KAPPA2:
        return params
    scale = params.kappa2
    if scale <= 0:
        raise InvalidArgumentError("kappa2 must be > 0 to convert units")
    changes = {name: getattr(params, name) / scale for name in _RATE_FIELDS}
    changes["units"] = UNITS_KAPPA2
    return replace(params, **changes)


def to_mhz_units(params: SystemParams, kappa2_mhz_angular: float) -> SystemParams:
    """Multiply every rate field by the angular-MHz value of kappa2."""
    if params.units == UNITS_MHZ:
        return params
    if kappa2_mhz_angular <= 0:
        raise InvalidArgumentError("kappa2_mhz_angular must be > 0")
    changes = {name: getattr(params, name) * kappa2_mhz_angular for name in _RATE_FIELDS}
    changes["units"] = UNITS_MHZ
    return replace(params, **changes)


def reduced_spec(n1: int = 4, n2: int = 4) -> HilbertSpec:
    return HilbertSpec((("a1", n1), ("a2", n2)))


def full_spec(n1: int = 4, n2: int = 4, nb: int = 8) -> HilbertSpec:
    return HilbertSpec((("a1", n1), ("a2", n2), ("b", nb)))


def kerr_strength(params: SystemParams) -> float:
    """Effective photon-photon interaction g^2 / omega_m."""
    if params.omega_m == 0:
        raise InvalidArgumentError("omega_m must be > 0 for the Kerr reduction")
    return params.g ** 2 / params.omega_m


def drive_amplitude_from_power(power: float, omega_l: float, kappa2: float) -> float:
    """|E| = sqrt(2 kappa2 P / (hbar omega_l)), all inputs SI (W, rad/s)."""
    if power <= 0 or omega_l <= 0 or kappa2 <= 0:
        raise InvalidArgumentError("power, omega_l and kappa2 must all be > 0")
    return math.sqrt(2.0 * kappa2 * power / (HBAR_SI * omega_l))


def power_from_drive_amplitude(amplitude: float, omega_l: float, kappa2: float) -> float:
    """Inverse of drive_amplitude_from_power."""
    if amplitude < 0 or omega_l <= 0 or kappa2 <= 0:
        raise InvalidArgumentError("amplitude must be >= 0, omega_l and kappa2 > 0")
    return HBAR_SI * omega_l * amplitude ** 2 / (2.0 * kappa2)


def gauge_parameterization(lam: float, h: float) -> tuple[float, float]:
    """Imaginary-gauge scaling: (lambda e^h, lambda e^-h); product is h-free."""
    return lam * math.exp(h), lam * math.exp(-h)


def _mode_ops(spec: HilbertSpec) -> dict[str, CMatrix]:
    return {label: embed(annihilation(spec.cutoff(label)), label, spec) for label in spec.labels}


def _require_modes(spec: HilbertSpec, expected: tuple[str, ...], builder: str) -> None:
    if spec.labels != expected:
        raise InvalidArgumentError(
            f"{builder} expects modes {expected}, got {spec.labels}"
        )


def build_full_hamiltonian(params: SystemParams, spec: HilbertSpec) -> CMatrix:
    """Three-mode Hamiltonian with optomechanical coupling -g n1 (b + b^dag)."""
    _require_modes(spec, FULL_MODES, "build_full_hamiltonian")
    a1 = embed(annihilation(spec.cutoff("a1")), "a1", spec)
    a2 = embed(annihilation(spec.cutoff("a2")), "a2", spec)
    b = embed(annihilation(spec.cutoff("b")), "b", spec)
    n1 = dagger(a1) @ a1
    n2 = dagger(a2) @ a2
    h = (
        params.delta1 * n1
        + params.delta2 * n2
        + params.omega_m * (dagger(b) @ b)
        + params.lambda1 * (dagger(a1) @ a2)
        + params.lambda2 * (a1 @ dagger(a2))
        - params.g * (n1 @ (dagger(b) + b))
        + params.E * (dagger(a2) + a2)
    )
    return h


def build_reduced_hamiltonian(params: SystemParams, spec: HilbertSpec) -> CMatrix:
    """Two-mode Kerr Hamiltonian after the mechanical displacement reduction."""
    _require_modes(spec, REDUCED_MODES, "build_reduced_hamiltonian")
    chi = kerr_strength(params)
    a1 = embed(annihilation(spec.cutoff("a1")), "a1", spec)
    a2 = embed(annihilation(spec.cutoff("a2")), "a2", spec)
    n1 = dagger(a1) @ a1
    n2 = dagger(a2) @ a2
    h = (
        params.delta1 * n1
        + params.delta2 * n2
        + params.lambda1 * (dagger(a1) @ a2)
        + params.lambda2 * (a1 @ dagger(a2))
        - chi * (n1 @ n1)
        + params.E * (dagger(a2) + a2)
    )
    return h


def build_nonhermitian(params: SystemParams, spec: HilbertSpec) -> CMatrix:
    """Reduced Hamiltonian with phenomenological -i kappa/2 decay terms."""
    _require_modes(spec, REDUCED_MODES, "build_nonhermitian")
    h = build_reduced_hamiltonian(params, spec)
    n1 = embed(number_operator(spec.cutoff("a1")), "a1", spec)
    n2 = embed(number_operator(spec.cutoff("a2")), "a2", spec)
    return h - 0.5j * params.kappa1 * n1 - 0.5j * params.kappa2 * n2


def build_undriven(params: SystemParams, spec: HilbertSpec) -> CMatrix:
    """Reduced Hamiltonian with the drive removed (block-diagonal in n1+n2)."""
    return build_reduced_hamiltonian(params.updated(E=0.0), spec)


def build_altdrive_hamiltonian(params: SystemParams, spec: HilbertSpec) -> CMatrix:
    """Variant with the laser driving the optomechanical cavity a1 instead."""
    _require_modes(spec, REDUCED_MODES, "build_altdrive_hamiltonian")
    h = build_undriven(params, spec)
    a1 = embed(annihilation(spec.cutoff("a1")), "a1", spec)
    return h + params.E * (dagger(a1) + a1)


# A dissipator specification is a list of (rate, collapse operator) pairs.
DissipatorSpec = list[tuple[float, CMatrix]]


def collapse_ops(params: SystemParams, spec: HilbertSpec, include_mechanics: bool) -> DissipatorSpec:
    """Decay channels of the master equation; zero-rate channels are omitted."""
    expected = FULL_MODES if include_mechanics else REDUCED_MODES
    _require_modes(spec, expected, "collapse_ops")
    ops: DissipatorSpec = [
        (params.kappa1, embed(annihilation(spec.cutoff("a1")), "a1", spec)),
        (params.kappa2, embed(annihilation(spec.cutoff("a2")), "a2", spec)),
    ]
    if include_mechanics:
        b = embed(annihilation(spec.cutoff("b")), "b", spec)
        ops.append((params.gamma_m * (params.n_th + 1.0), b))
        heating = params.gamma_m * params.n_th
        if heating > 0:
            ops.append((heating, dagger(b)))
    return [(rate, op) for rate, op in ops if rate > 0]

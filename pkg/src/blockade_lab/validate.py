"""Quick programmatic invariant suite backing the `blockade-lab validate` command.

Each check is a small self-contained identity with a fixed RNG seed, meant to
run in seconds. The pytest suite covers the same ground (and much more) with
independently computed oracles; this module exists so a deployed artifact can
sanity-check itself without a test harness.
"""

from __future__ import annotations

import math

import numpy as np

from . import analytic, lindblad, model, tensor_core
from .model import SystemParams


def _random_params(rng: np.random.Generator) -> SystemParams:
    delta = float(rng.uniform(-2.0, 2.0))
    return SystemParams(
        delta1=delta,
        delta2=delta,
        omega_m=500.0,
        lambda1=float(rng.uniform(0.2, 5.0)),
        lambda2=float(rng.uniform(0.2, 5.0)),
        g=float(rng.uniform(5.0, 60.0)),
        E=0.02,
        kappa1=1.0,
        kappa2=1.0,
        gamma_m=5e-4,
    )


def check_truncated_commutator() -> None:
    # sqrt(n)**2 rounds to n only within a few ulp, so "exact" means 1e-13 here
    for cutoff in (2, 4, 7):
        a = tensor_core.annihilation(cutoff)
        comm = a @ tensor_core.dagger(a) - tensor_core.dagger(a) @ a
        expected = np.eye(cutoff, dtype=complex)
        expected[-1, -1] = -(cutoff - 1)
        assert np.max(np.abs(comm - expected)) < 1e-13, f"commutator identity broken at cutoff {cutoff}"


def check_kron_mixed_product() -> None:
    rng = np.random.default_rng(11)
    for _ in range(5):
        a, b, c, d = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(4))
        lhs = tensor_core.kron(a, b) @ tensor_core.kron(c, d)
        rhs = tensor_core.kron(a @ c, b @ d)
        assert np.max(np.abs(lhs - rhs)) < 1e-12, "kron mixed-product identity failed"


def check_hermiticity_criterion() -> None:
    rng = np.random.default_rng(12)
    spec = model.reduced_spec()
    for _ in range(5):
        params = _random_params(rng)
        h = model.build_reduced_hamiltonian(params, spec)
        dev = float(np.max(np.abs(h - h.conj().T)))
        if math.isclose(params.lambda1, params.lambda2):
            assert dev < 1e-14
        else:
            assert dev > 1e-12, "asymmetric couplings must break hermiticity"
        sym = model.build_reduced_hamiltonian(
            params.updated(lambda2=params.lambda1), spec
        )
        assert np.max(np.abs(sym - sym.conj().T)) < 1e-14


def check_nonhermitian_decay_diagonal() -> None:
    rng = np.random.default_rng(13)
    spec = model.reduced_spec()
    params = _random_params(rng)
    diff = model.build_nonhermitian(params, spec) - model.build_reduced_hamiltonian(params, spec)
    off = diff - np.diag(np.diag(diff))
    assert np.max(np.abs(off)) == 0.0
    diag = np.diag(diff)
    assert np.max(np.abs(diag.real)) < 1e-14
    assert np.all(diag.imag <= 1e-14)


def check_amplitude_equations_match_matrix() -> None:
    rng = np.random.default_rng(14)
    params = _random_params(rng)
    spec = model.reduced_spec(3, 3)
    h = model.build_nonhermitian(params, spec)
    basis = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    idx = [n1 * 3 + n2 for n1, n2 in basis]
    block = h[np.ix_(idx, idx)]
    c = rng.normal(size=6) + 1j * rng.normal(size=6)
    amps = analytic.AmplitudeSet(*c)
    rhs = analytic.amplitude_rhs(amps, params).as_array()
    expected = -1j * (block @ c)
    assert np.max(np.abs(rhs[1:] - expected[1:])) < 1e-12, "amplitude equations disagree with matrix"


def check_steady_amplitude_residual() -> None:
    point = analytic.upb_optimal(0.882, 1.0, 0.95, "-")
    params = SystemParams(
        delta1=point.delta2, delta2=point.delta2, omega_m=500.0,
        lambda1=0.95, lambda2=point.lambda2, g=21.0, E=0.02,
        kappa1=1.0, kappa2=1.0, gamma_m=5e-4,
    )
    amps = analytic.steady_amplitudes_cavity_drive(params)
    rhs = analytic.amplitude_rhs(amps, params, include_drive_feeds=False)
    residual = float(np.max(np.abs(rhs.as_array())))
    assert residual <= 1e-10 * params.E, f"steady residual {residual:.2e}"


def check_interference_optimum_suppression() -> None:
    rng = np.random.default_rng(15)
    for _ in range(100):
        chi = float(rng.uniform(0.1, 30.0))
        lambda1 = float(rng.uniform(0.1, 30.0))
        for branch in ("+", "-"):
            point = analytic.upb_optimal(chi, 1.0, lambda1, branch)
            g = math.sqrt(chi * 500.0)
            params = SystemParams(
                delta1=point.delta2, delta2=point.delta2, omega_m=500.0,
                lambda1=lambda1, lambda2=point.lambda2, g=g, E=0.02,
                kappa1=1.0, kappa2=1.0, gamma_m=5e-4,
            )
            amps = analytic.steady_amplitudes_cavity_drive(params)
            assert abs(amps.c02) <= 1e-10 * abs(amps.c01) ** 2


def check_product_invariance() -> None:
    rng = np.random.default_rng(16)
    for _ in range(20):
        params = _random_params(rng)
        c = float(rng.uniform(0.2, 5.0))
        scaled = params.updated(lambda1=params.lambda1 * c, lambda2=params.lambda2 / c)
        for cavity in (1, 2):
            g_base = analytic.g2_analytic(analytic.steady_amplitudes_cavity_drive(params), cavity)
            g_scaled = analytic.g2_analytic(analytic.steady_amplitudes_cavity_drive(scaled), cavity)
            assert abs(g_base - g_scaled) <= 1e-10 * max(g_base, 1e-300)


def check_altdrive_closed_form() -> None:
    rng = np.random.default_rng(17)
    for _ in range(20):
        params = _random_params(rng)
        amps = analytic.steady_amplitudes_om_drive(params)
        direct = 2.0 * abs(amps.c20) ** 2 / abs(amps.c10) ** 4
        closed = analytic.g2_om_drive_closed_form(params)
        assert abs(direct - closed) <= 1e-12 * max(direct, 1e-300)


def check_resonance_locations() -> None:
    rng = np.random.default_rng(18)
    for _ in range(10):
        params = _random_params(rng)
        chi = model.kerr_strength(params)
        locations = analytic.cpb_locations(chi, params.lambda1, params.lambda2)
        assert locations is not None
        for loc in locations:
            at_loc = params.updated(delta1=loc, delta2=loc)
            eps = analytic.single_excitation_eigenvalues(at_loc)[:2]
            assert min(abs(e) for e in eps) < 1e-10


def check_trace_annihilation() -> None:
    rng = np.random.default_rng(19)
    params = _random_params(rng)
    spec = model.reduced_spec(3, 3)
    h = model.build_reduced_hamiltonian(params, spec)
    c_ops = model.collapse_ops(params, spec, include_mechanics=False)
    lio = lindblad.build_liouvillian(h, c_ops, spec, convention="half")
    d = spec.dim
    trace_vec = np.zeros(d * d, dtype=complex)
    trace_vec[:: d + 1] = 1.0
    functional = lio.matrix.T @ trace_vec
    assert float(np.max(np.abs(functional))) < 1e-12 * max(lio.scale, 1.0)


def check_vacuum_dark_state() -> None:
    spec = model.reduced_spec(3, 3)
    params = SystemParams(
        delta1=0.3, delta2=0.3, omega_m=500.0, lambda1=0.5, lambda2=0.5,
        g=10.0, E=0.0, kappa1=1.0, kappa2=1.0, gamma_m=0.0,
    )
    h = model.build_reduced_hamiltonian(params, spec)
    lio = lindblad.build_liouvillian(h, model.collapse_ops(params, spec, False), spec)
    rho = lindblad.vacuum_state(spec)
    assert float(np.max(np.abs(lindblad.apply_liouvillian(lio, rho)))) < 1e-14


def check_driven_cavity_closed_form() -> None:
    spec = tensor_core.HilbertSpec((("a", 12),))
    delta, kappa, drive = 0.3, 1.0, 0.1
    a = tensor_core.annihilation(12)
    h = delta * (tensor_core.dagger(a) @ a) + drive * (a + tensor_core.dagger(a))
    lio = lindblad.build_liouvillian(h, [(kappa, a)], spec)
    rho = lindblad.steady_state(lio)
    alpha = -1j * drive / (0.5 * kappa + 1j * delta)
    n_expected = abs(alpha) ** 2
    n_found = lindblad.photon_number(rho, "a")
    assert abs(n_found - n_expected) < 1e-6


def check_steady_state_consistency() -> None:
    params = SystemParams(
        delta1=0.5446, delta2=0.5446, omega_m=500.0, lambda1=0.95,
        lambda2=0.9688, g=21.0, E=0.02, kappa1=1.0, kappa2=1.0, gamma_m=5e-4,
    )
    spec = model.reduced_spec()
    h = model.build_reduced_hamiltonian(params, spec)
    lio = lindblad.build_liouvillian(h, model.collapse_ops(params, spec, False), spec)
    rho = lindblad.steady_state(lio)
    residual = float(np.linalg.norm(lio.matrix @ rho.matrix.ravel()))
    assert residual <= 1e-8
    traj = lindblad.evolve(rho, lio, np.linspace(0.0, 10.0, 11))
    drift = float(np.max(np.abs(traj.data["trace"] - 1.0)))
    assert drift <= 1e-8


def check_fock_statistics() -> None:
    spec = tensor_core.HilbertSpec((("a", 20),))
    one = np.zeros((20, 20), dtype=complex)
    one[1, 1] = 1.0
    assert lindblad.g2_zero(lindblad.DensityMatrix(one, spec), "a") == 0.0
    alpha = 0.2
    n = np.arange(20)
    coh = np.exp(-abs(alpha) ** 2 / 2) * alpha ** n / np.sqrt(
        np.array([math.factorial(int(k)) for k in n], dtype=float)
    )
    rho_coh = np.outer(coh, coh.conj())
    rho_coh /= np.trace(rho_coh)
    g2 = lindblad.g2_zero(lindblad.DensityMatrix(rho_coh, spec), "a")
    assert abs(g2 - 1.0) < 1e-4


def check_unit_round_trip() -> None:
    params = SystemParams(
        delta1=0.25, delta2=0.25, omega_m=512.0, lambda1=1.5, lambda2=-0.75,
        g=16.0, E=0.125, kappa1=2.0, kappa2=2.0, gamma_m=0.125, units="MHz-angular",
    )
    converted = model.to_kappa2_units(params)
    back = model.to_mhz_units(converted, params.kappa2)
    for name in ("delta1", "omega_m", "lambda2", "E", "gamma_m"):
        assert getattr(back, name) == getattr(params, name), f"round trip broke {name}"


def check_feasibility_identities() -> None:
    report = analytic.altdrive_blockade_feasibility(chi=7.0, kappa2=2.0)
    assert report.condition2_roots == (0.0, 7.0 / 4.0)
    assert math.isclose(report.condition1_residuals[0], 4.0)
    assert math.isclose(report.condition1_residuals[1], 4.0 + 49.0 / 4.0)
    assert report.feasible is False


ALL_CHECKS = [
    ("tensor-core: truncated commutator", check_truncated_commutator),
    ("tensor-core: kron mixed product", check_kron_mixed_product),
    ("model: hermiticity criterion", check_hermiticity_criterion),
    ("model: decay terms purely imaginary diagonal", check_nonhermitian_decay_diagonal),
    ("model: unit-tag round trip", check_unit_round_trip),
    ("analytic: amplitude equations = matrix restriction", check_amplitude_equations_match_matrix),
    ("analytic: steady amplitudes are stationary", check_steady_amplitude_residual),
    ("analytic: interference optimum suppresses |0,2>", check_interference_optimum_suppression),
    ("analytic: coupling-product invariance", check_product_invariance),
    ("analytic: drive-on-a1 closed form", check_altdrive_closed_form),
    ("analytic: resonance locations zero an eigenvalue", check_resonance_locations),
    ("analytic: drive-on-a1 feasibility identities", check_feasibility_identities),
    ("lindblad: trace annihilation", check_trace_annihilation),
    ("lindblad: vacuum is dark", check_vacuum_dark_state),
    ("lindblad: driven-cavity closed form", check_driven_cavity_closed_form),
    ("lindblad: steady-state self-consistency", check_steady_state_consistency),
    ("lindblad: Fock and coherent statistics", check_fock_statistics),
]


def run_all() -> list[tuple[str, bool, str]]:
    results = []
    for name, fn in ALL_CHECKS:
        try:
            fn()
            results.append((name, True, ""))
        except Exception as exc:  # pragma: no cover - failure path
            results.append((name, False, f"{type(exc).__name__}: {exc}"))
    return results

import numpy as np
import pytest

from blockade_lab.errors import (
    CapacityError,
    InvalidArgumentError,
    SingularMatrixError,
)
from blockade_lab.tensor_core import (
    HilbertSpec,
    annihilation,
    creation,
    dagger,
    dimension_cap,
    eig,
    embed,
    expectation,
    identity,
    kron,
    number_operator,
    solve_linear,
    trace,
)


def random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


class TestAnnihilation:
    def test_cutoff_two_is_sigma_minus(self):
        assert np.array_equal(annihilation(2), np.array([[0, 1], [0, 0]], dtype=complex))

    def test_cutoff_three_entry(self):
        a = annihilation(3)
        assert a[1, 2] == pytest.approx(np.sqrt(2))
        assert np.count_nonzero(a) == 2

    def test_number_operator_diagonal(self):
        a = annihilation(4)
        n = dagger(a) @ a
        assert np.allclose(np.diag(n), [0, 1, 2, 3])
        assert np.allclose(n, number_operator(4))

    def test_small_cutoff_rejected(self):
        with pytest.raises(InvalidArgumentError):
            annihilation(1)

    def test_truncated_commutator(self):
        # [a, a+] = I except the corner entry -(cutoff-1); float-exact up to
        # the sqrt(n)**2 rounding of the matrix elements
        for cutoff in (2, 3, 5, 8):
            a = annihilation(cutoff)
            comm = a @ dagger(a) - dagger(a) @ a
            expected = np.eye(cutoff, dtype=complex)
            expected[-1, -1] = -(cutoff - 1)
            assert np.max(np.abs(comm - expected)) < 1e-13


class TestKronEmbed:
    def test_identity_product(self):
        assert np.array_equal(kron(identity(2), identity(3)), identity(6))

    def test_definition_on_random(self, rng):
        a = random_complex(rng, (2, 3))
        b = random_complex(rng, (3, 2))
        out = kron(a, b)
        for i in range(2):
            for j in range(3):
                for k in range(3):
                    for l in range(2):
                        assert out[i * 3 + k, j * 2 + l] == pytest.approx(a[i, j] * b[k, l])

    def test_mixed_product_property(self, rng):
        a, b, c, d = (random_complex(rng, (3, 3)) for _ in range(4))
        lhs = kron(a, b) @ kron(c, d)
        rhs = kron(a @ c, b @ d)
        assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_associativity(self, rng):
        a, b, c = (random_complex(rng, (2, 2)) for _ in range(3))
        assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) < 1e-12

    def test_embed_matches_kron(self):
        spec = HilbertSpec((("a1", 3), ("a2", 3)))
        assert np.array_equal(embed(annihilation(3), "a1", spec), kron(annihilation(3), identity(3)))

    def test_embed_number_on_second_slot(self):
        spec = HilbertSpec((("a1", 2), ("a2", 2)))
        n2 = embed(number_operator(2), "a2", spec)
        ket01 = np.zeros(4)
        ket01[1] = 1.0  # |0,1>
        assert np.allclose(n2 @ ket01, ket01)

    def test_embed_identity(self):
        spec = HilbertSpec((("a1", 2), ("a2", 3)))
        assert np.array_equal(embed(identity(3), "a2", spec), identity(6))

    def test_disjoint_slots_commute(self, rng):
        spec = HilbertSpec((("a1", 3), ("a2", 3)))
        op1 = embed(random_complex(rng, (3, 3)), "a1", spec)
        op2 = embed(random_complex(rng, (3, 3)), "a2", spec)
        assert np.max(np.abs(op1 @ op2 - op2 @ op1)) < 1e-12

    def test_embed_dimension_mismatch(self):
        spec = HilbertSpec((("a1", 3), ("a2", 3)))
        with pytest.raises(InvalidArgumentError):
            embed(identity(2), "a1", spec)
        with pytest.raises(InvalidArgumentError):
            embed(identity(3), "b", spec)

    def test_capacity_cap(self, monkeypatch):
        monkeypatch.setenv("BLOCKADE_LAB_CAP", "8")
        assert dimension_cap() == 8
        with pytest.raises(CapacityError):
            kron(identity(4), identity(4))
        with pytest.raises(CapacityError):
            embed(identity(4), "a1", HilbertSpec((("a1", 4), ("a2", 4))))


class TestHilbertSpec:
    def test_dim_is_product(self):
        spec = HilbertSpec((("a1", 4), ("a2", 4), ("b", 8)))
        assert spec.dim == 128
        assert spec.cutoff("b") == 8
        assert spec.axis("a2") == 1

    def test_invalid_specs(self):
        with pytest.raises(InvalidArgumentError):
            HilbertSpec((("a1", 1), ("a2", 4)))
        with pytest.raises(InvalidArgumentError):
            HilbertSpec((("a1", 4), ("a1", 4)))


class TestAlgebra:
    def test_dagger_involution(self, rng):
        a = random_complex(rng, (4, 4))
        assert np.array_equal(dagger(dagger(a)), a)

    def test_trace_of_kron_factorizes(self, rng):
        a = random_complex(rng, (3, 3))
        b = random_complex(rng, (4, 4))
        assert trace(kron(a, b)) == pytest.approx(trace(a) * trace(b))

    def test_expectation_number_in_fock_one(self):
        n = number_operator(3)
        rho = np.zeros((3, 3), dtype=complex)
        rho[1, 1] = 1.0
        assert expectation(n, rho) == pytest.approx(1.0)

    def test_expectation_matches_trace_product(self, rng):
        op = random_complex(rng, (5, 5))
        rho = random_complex(rng, (5, 5))
        assert expectation(op, rho) == pytest.approx(np.trace(op @ rho))


class TestEig:
    def test_diagonal(self):
        values = np.array([1.0 + 2j, -0.5, 3.0])
        assert np.allclose(sorted(eig(np.diag(values)), key=abs), sorted(values, key=abs))

    def test_antidiagonal_closed_form(self):
        l1, l2 = 0.7, 1.3
        found = sorted(eig(np.array([[0, l1], [l2, 0]], dtype=complex)).real)
        root = np.sqrt(l1 * l2)
        assert found == pytest.approx([-root, root])

    def test_hermitian_eigenvalues_real(self, rng):
        a = random_complex(rng, (8, 8))
        h = a + dagger(a)
        assert np.max(np.abs(eig(h).imag)) < 1e-10

    def test_requires_square(self):
        with pytest.raises(InvalidArgumentError):
            eig(np.zeros((2, 3), dtype=complex))

    def test_respects_cap(self, monkeypatch):
        monkeypatch.setenv("BLOCKADE_LAB_CAP", "4")
        with pytest.raises(CapacityError):
            eig(identity(8))


class TestSolveLinear:
    def test_identity_system(self, rng):
        b = random_complex(rng, 6)
        assert np.array_equal(solve_linear(identity(6), b), b)

    def test_random_round_trip(self, rng):
        a = random_complex(rng, (10, 10)) + 10 * identity(10)
        x = random_complex(rng, 10)
        found = solve_linear(a, a @ x)
        assert np.max(np.abs(found - x)) < 1e-10

    def test_residual_contract(self, rng):
        a = random_complex(rng, (20, 20)) + 5 * identity(20)
        b = random_complex(rng, 20)
        x = solve_linear(a, b)
        assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)

    def test_singular_raises_with_condition(self):
        a = np.array([[1.0, 1.0], [1.0, 1.0]], dtype=complex)
        with pytest.raises(SingularMatrixError) as err:
            solve_linear(a, np.array([1.0, 0.0], dtype=complex))
        assert err.value.condition_estimate is None or err.value.condition_estimate > 1e12


def test_operations_are_pure():
    first = annihilation(5)
    second = annihilation(5)
    assert np.array_equal(first, second)
    spec = HilbertSpec((("a1", 3), ("a2", 4)))
    assert np.array_equal(embed(annihilation(3), "a1", spec), embed(annihilation(3), "a1", spec))

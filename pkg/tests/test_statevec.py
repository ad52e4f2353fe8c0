import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qudit_teleport.statevec import (
    LocalOperator,
    apply_local,
    basis_state,
    inner,
    make_state,
    permute,
    random_state,
    read_state,
    reduced_density,
    tensor,
    write_state,
)
from qudit_teleport.weyl import phi00, weyl_v

from conftest import full_operator

R2 = 1 / np.sqrt(2)


def random_unitary(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, _ = np.linalg.qr(z)
    return q


class TestMakeState:
    def test_basis(self):
        s = make_state(2, 1, [1, 0])
        np.testing.assert_array_equal(s.amps, [1, 0])

    def test_bell_pair_normalized(self):
        s = make_state(2, 2, [1, 0, 0, 1])
        np.testing.assert_allclose(s.amps, [R2, 0, 0, R2], atol=1e-15)

    def test_rescaling(self):
        np.testing.assert_allclose(make_state(3, 1, [2, 0, 0]).amps, [1, 0, 0])

    @pytest.mark.parametrize(
        "d, m, amps",
        [(2, 1, [1, 0, 0]), (2, 1, [0, 0]), (1, 1, [1]), (2, 0, [1])],
    )
    def test_errors(self, d, m, amps):
        with pytest.raises(ValueError):
            make_state(d, m, amps)


class TestTensor:
    def test_basis_product(self):
        s = tensor(basis_state(2, [0]), basis_state(2, [1]))
        assert s.m == 2
        np.testing.assert_array_equal(s.amps, [0, 1, 0, 0])

    def test_index_arithmetic(self):
        a, b = 0.6, 0.8j
        s = tensor(make_state(2, 1, [a, b]), basis_state(2, [0]))
        np.testing.assert_allclose(s.amps, [a, 0, b, 0])

    def test_post_condition_formula(self, rng):
        a, b = random_state(3, 2, rng), random_state(3, 1, rng)
        s = tensor(a, b)
        for x in range(9):
            for y in range(3):
                assert abs(s.amps[x * 3 + y] - a.amps[x] * b.amps[y]) <= 1e-15

    def test_associative(self, rng):
        a, b, c = (random_state(2, k, rng) for k in (1, 2, 1))
        left = tensor(tensor(a, b), c)
        right = tensor(a, tensor(b, c))
        assert left.m == right.m == 4
        np.testing.assert_allclose(left.amps, right.amps, atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            tensor(basis_state(2, [0]), basis_state(3, [0]))


class TestApplyLocal:
    def test_identity(self, rng):
        s = random_state(3, 3, rng)
        out = apply_local(s, LocalOperator(3, 2, np.eye(9)), [2, 0])
        np.testing.assert_allclose(out.amps, s.amps, atol=1e-15)

    def test_shift_on_first_qubit(self):
        out = apply_local(basis_state(2, [0, 0]), weyl_v(2, (0, 1)), [0])
        np.testing.assert_array_equal(out.amps, basis_state(2, [1, 0]).amps)

    @pytest.mark.parametrize("d, m, targets", [(2, 3, [2, 0]), (3, 3, [1]), (2, 4, [3, 1, 0]), (3, 2, [1, 0])])
    def test_matches_brute_force(self, rng, d, m, targets):
        s = random_state(d, m, rng)
        k = len(targets)
        mat = rng.standard_normal((d**k, d**k)) + 1j * rng.standard_normal((d**k, d**k))
        out = apply_local(s, LocalOperator(d, k, mat), targets)
        np.testing.assert_allclose(out.amps, full_operator(mat, targets, d, m) @ s.amps, atol=1e-12)

    def test_product_equals_sequential(self, rng):
        s = random_state(3, 3, rng)
        u1, u2 = random_unitary(3, rng), random_unitary(3, rng)
        joint = apply_local(s, LocalOperator(3, 2, np.kron(u1, u2)), [2, 0])
        seq = apply_local(apply_local(s, LocalOperator(3, 1, u1), [2]), LocalOperator(3, 1, u2), [0])
        np.testing.assert_allclose(joint.amps, seq.amps, atol=1e-12)

    def test_disjoint_commute(self, rng):
        s = random_state(2, 4, rng)
        a = LocalOperator(2, 2, random_unitary(4, rng))
        b = LocalOperator(2, 1, random_unitary(2, rng))
        ab = apply_local(apply_local(s, a, [0, 3]), b, [2])
        ba = apply_local(apply_local(s, b, [2]), a, [0, 3])
        np.testing.assert_allclose(ab.amps, ba.amps, atol=1e-12)

    @pytest.mark.parametrize("targets", [[0, 0], [3], [-1], [0, 1, 2]])
    def test_bad_targets(self, targets):
        s = basis_state(2, [0, 0, 0])
        arity = len(targets)
        with pytest.raises(ValueError):
            apply_local(s, LocalOperator(2, 2, np.eye(4)) if arity != 1 else LocalOperator(2, 1, np.eye(2)), targets)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 4), m=st.integers(1, 4))
    def test_unitary_preserves_norm(self, seed, d, m):
        rng = np.random.default_rng(seed)
        s = random_state(d, m, rng)
        t = int(rng.integers(m))
        out = apply_local(s, LocalOperator(d, 1, random_unitary(d, rng)), [t])
        assert abs(out.norm() - 1) <= 1e-10


class TestInner:
    def test_self(self, rng):
        s = random_state(3, 2, rng)
        assert abs(inner(s, s) - 1) < 1e-12

    def test_bell_orthogonal(self):
        phi01 = apply_local(phi00(2), weyl_v(2, (0, 1)), [1])
        assert abs(inner(phi00(2), phi01)) < 1e-15

    def test_basis(self):
        assert inner(basis_state(2, [0]), basis_state(2, [1])) == 0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            inner(basis_state(2, [0]), basis_state(2, [0, 0]))


def brute_reduced(s, keep):
    d, m = s.d, s.m
    rest = [q for q in range(m) if q not in keep]
    dk = d ** len(keep)
    rho = np.zeros((dk, dk), dtype=complex)
    digits = list(itertools.product(range(d), repeat=m))
    index = {dg: i for i, dg in enumerate(digits)}
    for a in itertools.product(range(d), repeat=len(keep)):
        for b in itertools.product(range(d), repeat=len(keep)):
            total = 0
            for r in itertools.product(range(d), repeat=len(rest)):
                da, db = [0] * m, [0] * m
                for q, v in zip(keep, a):
                    da[q] = v
                for q, v in zip(keep, b):
                    db[q] = v
                for q, v in zip(rest, r):
                    da[q] = db[q] = v
                total += s.amps[index[tuple(da)]] * np.conj(s.amps[index[tuple(db)]])
            ia = int("".join(map(str, a)), d) if a else 0
            ib = int("".join(map(str, b)), d) if b else 0
            rho[ia, ib] = total
    return rho


class TestReducedDensity:
    def test_bell_half(self):
        np.testing.assert_allclose(reduced_density(phi00(2), [1]), np.eye(2) / 2, atol=1e-15)

    def test_product(self):
        np.testing.assert_allclose(reduced_density(basis_state(2, [0, 0]), [0]), [[1, 0], [0, 0]])

    @pytest.mark.parametrize("keep", [[0], [2, 0], [1, 2], [0, 1, 2]])
    def test_brute_force(self, rng, keep):
        s = random_state(3, 3, rng)
        rho = reduced_density(s, keep)
        np.testing.assert_allclose(rho, brute_reduced(s, keep), atol=1e-12)
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.min(np.linalg.eigvalsh(rho)) > -1e-12

    def test_full_register_is_projector(self, rng):
        s = random_state(2, 3, rng)
        np.testing.assert_allclose(reduced_density(s, [0, 1, 2]), np.outer(s.amps, s.amps.conj()), atol=1e-12)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            reduced_density(basis_state(2, [0]), [1])


class TestRandomState:
    def test_deterministic(self):
        np.testing.assert_array_equal(random_state(3, 2, 7).amps, random_state(3, 2, 7).amps)

    def test_normalized(self):
        assert abs(random_state(5, 2, 1).norm() - 1) < 1e-12

    def test_seeds_differ(self):
        assert abs(inner(random_state(2, 2, 1), random_state(2, 2, 2))) < 1 - 1e-6

    def test_validation(self):
        with pytest.raises(ValueError):
            random_state(1, 1, 0)


def test_permute_matches_moved_axes(rng):
    s = random_state(2, 3, rng)
    p = permute(s, [2, 0, 1])
    for j0, j1, j2 in itertools.product(range(2), repeat=3):
        assert p.amps[j2 * 4 + j0 * 2 + j1] == s.amps[j0 * 4 + j1 * 2 + j2]


def test_state_file_roundtrip(tmp_path, rng):
    s = random_state(3, 2, rng)
    path = tmp_path / "psi.txt"
    write_state(s, path)
    lines = path.read_text(encoding="utf-8").split("\n")
    assert lines[0] == "3 2"
    assert len(lines) == 1 + 9 + 1 and lines[-1] == ""
    np.testing.assert_allclose(read_state(path).amps, s.amps, atol=1e-15)


def test_state_file_malformed(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 1\n1 0\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_state(path)

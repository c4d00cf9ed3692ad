import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal
from scipy.stats import unitary_group

from stochq.channels import apply_channel, embed_F, essentially_same, inverse_F, is_cptp, matrix_form
from stochq.classical import (
    COUNTEREXAMPLE3_SETS,
    circulant_stochastic,
    counterexample3_family,
    dichotomic_family,
    random_stochastic,
)
from stochq.numerics import DomainError, direct_sum_extract
from stochq.representation import (
    ClassSpec,
    DependenceError,
    admissible_specs,
    alpha_partition,
    block_for_alpha,
    build_c,
    build_class_member,
    build_g,
    build_representation,
    invertibility_scan,
    is_essentially_classical,
    rank_one_kraus,
    rank_one_mixing_unitary,
    repair_dependence,
    representation_matrix_form,
    root_of_unity,
    structural_blocks,
    unitary_mix,
    v_blocks,
)

ROOT_TIME_SET1 = math.log(32 + (1 + 5 * math.sqrt(673)) / 4)


def direct_kraus(lam, m, r, v, sign):
    """Operators written straight from the phase formula, without reduction."""
    n = lam.shape[0]
    j, k = np.indices((n, n))
    return [np.sqrt(lam / m) * np.exp(2j * np.pi * s * (r * j + sign * v * k) / m) for s in range(m)]


@st.composite
def stochastic_matrices(draw, n=None):
    n = draw(st.integers(2, 5)) if n is None else n
    cols = [draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n).filter(lambda c: sum(c) > 0.05)) for _ in range(n)]
    lam = np.array(cols).T
    return lam / lam.sum(axis=0)


class TestRepresentation:
    @pytest.mark.parametrize("n", range(2, 7))
    def test_entries(self, rng, n):
        lam = random_stochastic(n, rng)
        ops = build_representation(lam).kraus
        assert len(ops) == n
        for s, a in enumerate(ops):
            for j in range(n):
                for k in range(n):
                    expected = math.sqrt(lam[j, k]) / math.sqrt(n) * np.exp(2j * np.pi * s * (j - k) / n)
                    assert abs(a[j, k] - expected) <= 1e-15

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_identity_source(self, n):
        ops = build_representation(np.eye(n)).kraus
        for a in ops:
            assert_allclose(a, np.eye(n) / math.sqrt(n), atol=1e-16)
        merged = repair_dependence(ops)
        assert len(merged) == 1
        assert_allclose(merged[0], np.eye(n), atol=1e-15)

    @pytest.mark.parametrize("t", [0.1, 0.5, 2.0])
    def test_dichotomic_pair(self, t):
        a0, a1 = build_representation(dichotomic_family(1.0)(t)).kraus
        c, s = math.sqrt(math.cosh(t)), math.sqrt(math.sinh(t))
        scale = math.exp(-t / 2) / math.sqrt(2)
        assert_allclose(a0, scale * np.array([[c, s], [s, c]]), atol=1e-15)
        assert_allclose(a1, scale * np.array([[c, -s], [-s, c]]), atol=1e-15)

    @pytest.mark.parametrize("n", range(2, 7))
    def test_embedding(self, rng, n):
        for _ in range(50):
            lam = random_stochastic(n, rng)
            p = rng.dirichlet(np.ones(n))
            ops = build_representation(lam).kraus
            assert np.max(np.abs(inverse_F(apply_channel(ops, embed_F(p))) - lam @ p)) <= 1e-12
            assert is_cptp(ops).violation <= 1e-12

    @settings(max_examples=40)
    @given(stochastic_matrices())
    def test_diagonal_states_stay_diagonal(self, lam):
        ops = build_representation(lam).kraus
        n = lam.shape[0]
        for k in range(n):
            out = apply_channel(ops, embed_F(np.eye(n)[k]))
            assert np.max(np.abs(out - np.diag(np.diag(out)))) <= 1e-14

    @settings(max_examples=40)
    @given(stochastic_matrices())
    def test_closed_matrix_form(self, lam):
        root = np.sqrt(lam)
        expected = np.kron(root, root) * build_g(lam.shape[0])
        from_kraus = matrix_form(build_representation(lam).kraus)
        assert_allclose(from_kraus, expected, atol=1e-12)
        assert_allclose(representation_matrix_form(lam), from_kraus, atol=1e-12)

    def test_rejects_non_stochastic(self):
        with pytest.raises(ValueError):
            build_representation([[0.9, 0.1], [0.5, 0.5]])

    def test_reduced_phase(self):
        assert root_of_unity(7, 4) == root_of_unity(3, 4) == root_of_unity(-1, 4)
        assert abs(root_of_unity(1, 4) - 1j) <= 1e-16


class TestStructure:
    def test_g2(self):
        expected = np.zeros((4, 4))
        for j, k, l, m in np.ndindex(2, 2, 2, 2):
            expected[2 * j + k, 2 * l + m] = float((j - k + m - l) % 2 == 0)
        assert_array_equal(build_g(2), expected)
        assert_array_equal(build_g(2), [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 1, 0], [1, 0, 0, 1]])

    @pytest.mark.parametrize("n", range(2, 9))
    def test_g_algebra(self, n):
        g = build_g(n)
        assert_array_equal(g @ g, n * g)
        assert_array_equal(g.conj().T, g)

    def test_c2(self):
        assert_array_equal(build_c(2), [[0, 1], [1, 0]])

    @pytest.mark.parametrize("n", range(2, 9))
    def test_c_is_cyclic_permutation(self, n):
        c = build_c(n)
        assert_array_equal(np.linalg.matrix_power(c, n), np.eye(n))
        assert_array_equal(c.sum(axis=0), np.ones(n))
        assert_array_equal(c.sum(axis=1), np.ones(n))

    @pytest.mark.parametrize("builder", [build_c, build_g, alpha_partition])
    def test_dimension_floor(self, builder):
        with pytest.raises(ValueError):
            builder(1)

    def test_partition_small(self):
        assert alpha_partition(2) == [[0, 3], [1, 2]]
        assert alpha_partition(3) == [[0, 4, 8], [1, 5, 6], [2, 3, 7]]

    @pytest.mark.parametrize("n", range(2, 9))
    def test_partition_covers(self, n):
        sets = alpha_partition(n)
        flat = sorted(i for s in sets for i in s)
        assert flat == list(range(n * n))

    @pytest.mark.parametrize("n", range(2, 7))
    def test_first_block_is_source(self, rng, n):
        lam = random_stochastic(n, rng)
        assert_allclose(v_blocks(lam)[0], lam, atol=1e-15)

    @pytest.mark.parametrize("n", range(2, 7))
    def test_circulant_blocks_coincide(self, rng, n):
        lam = circulant_stochastic(rng.dirichlet(np.ones(n)))
        for v in v_blocks(lam):
            assert_allclose(v, lam, atol=1e-12)

    @pytest.mark.parametrize("n", range(2, 6))
    def test_direct_sum_of_blocks(self, rng, n):
        lam = random_stochastic(n, rng)
        m = sum(np.kron(a, a.conj()) for a in build_representation(lam).kraus)
        split = direct_sum_extract(m, alpha_partition(n))
        assert split.max_off_block < 1e-14
        vs = v_blocks(lam)
        for j, block in enumerate(split.blocks):
            assert_allclose(block, vs[block_for_alpha(j, n)], atol=1e-12)

    def test_block_labels_agree_for_two_levels(self):
        assert [block_for_alpha(j, 2) for j in range(2)] == [0, 1]
        assert [block_for_alpha(j, 3) for j in range(3)] == [0, 2, 1]


class TestClassSpec:
    def test_round_trip_text(self):
        spec = ClassSpec(2, 1, 1, 3)
        assert str(spec) == "class:2 r:1 v:1 M:3"
        assert ClassSpec.parse(str(spec)) == spec

    @pytest.mark.parametrize("text", ["class:3 r:1 v:1 M:3", "r:1 v:1 M:3", "class:1 r:x v:1 M:3"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            ClassSpec.parse(text)

    @pytest.mark.parametrize(
        "spec", [ClassSpec(2, 1, 1, 1), ClassSpec(2, 5, 1, 9), ClassSpec(2, 1, 1, 10), ClassSpec(3, 1, 1, 3)]
    )
    def test_validate_rejects(self, spec):
        with pytest.raises(ValueError):
            spec.validate(3)

    def test_offsets(self):
        for n in (2, 3):
            for spec in admissible_specs(n):
                spec.validate(n)
                assert 1 <= spec.offset(n) <= n * n - max(spec.r, spec.v) * (n - 1)
        assert len(admissible_specs(2, 1)) == len(admissible_specs(2, 2)) == 14


class TestClassMembers:
    def test_base_member_is_representation(self, rng):
        for n in range(2, 6):
            lam = random_stochastic(n, rng)
            ops = build_class_member(ClassSpec(2, 1, 1, n), lam)
            for a, b in zip(ops, build_representation(lam).kraus):
                assert_array_equal(a, b)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_replication(self, rng, n):
        lam = random_stochastic(n, rng)
        base = build_representation(lam).kraus
        for r in range(2, n + 1):
            ops = build_class_member(ClassSpec(2, r, r, r * n), lam)
            for j in range(r):
                for s in range(n):
                    assert np.max(np.abs(ops[n * j + s] - base[s] / math.sqrt(r))) <= 1e-15

    @pytest.mark.parametrize("n", [2, 3])
    def test_identity_condition_everywhere(self, rng, n):
        lam = random_stochastic(n, rng)
        for spec in admissible_specs(n):
            ops = build_class_member(spec, lam)
            assert len(ops) == spec.m
            oracle = direct_kraus(lam, spec.m, spec.r, spec.v, spec.sign)
            assert_allclose(ops, oracle, atol=1e-12)
            gram = sum(a.conj().T @ a for a in oracle)
            assert_allclose(gram, np.eye(n), atol=1e-12)
            assert is_cptp(ops, tol=1e-12).ok
            assert is_essentially_classical(ops)

    def test_plus_members_singular_at_identity(self):
        for spec in admissible_specs(3, 1):
            assert abs(np.linalg.det(matrix_form(build_class_member(spec, np.eye(3))))) < 1e-10

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            build_class_member(ClassSpec(2, 1, 1, 1), np.eye(2))

    def test_two_level_coincidence(self, rng):
        lam = random_stochastic(2, rng)
        assert essentially_same(
            build_class_member(ClassSpec(2, 3, 1, 4), lam), build_class_member(ClassSpec(2, 2, 1, 3), lam)
        )


class TestUnitaryMix:
    def test_identity_mixing(self, rng):
        ops = build_representation(random_stochastic(3, rng)).kraus
        assert_array_equal(unitary_mix(ops, np.eye(3)), ops)

    def test_random_mixing(self, rng):
        ops = build_representation(random_stochastic(4, rng)).kraus
        assert essentially_same(ops, unitary_mix(ops, unitary_group.rvs(4, random_state=rng)))

    @pytest.mark.parametrize("n", [2, 3])
    def test_rank_one_to_class_member(self, rng, n):
        lam = random_stochastic(n, rng)
        u = rank_one_mixing_unitary(n)
        assert_allclose(u.conj().T @ u, np.eye(n * n), atol=1e-14)
        mixed = unitary_mix(rank_one_kraus(lam), u)
        assert_allclose(mixed, build_class_member(ClassSpec(2, n, 1, n * n), lam), atol=1e-14)

    def test_rejects_non_unitary(self):
        with pytest.raises(DomainError):
            unitary_mix([np.eye(2), np.eye(2)], [[1, 1], [0, 1]])


class TestRepairDependence:
    def test_generic_unchanged(self, rng):
        ops = build_representation(random_stochastic(3, rng)).kraus
        merged = repair_dependence(ops)
        assert len(merged) == 3
        assert_array_equal(merged, ops)

    def test_uniform_source(self):
        # phases exp(2 pi i s (j - k) / N) differ between operators, so none merge
        ops = build_representation(np.full((3, 3), 1 / 3)).kraus
        for i in range(3):
            for k in range(i + 1, 3):
                ratio = ops[k] / ops[i]
                assert np.ptp(ratio) > 1e-3
        assert len(repair_dependence(ops)) == 3

    def test_merge_preserves_identity_condition(self):
        ops = [np.eye(2) / 2, -np.eye(2) / 2, 1j * np.eye(2) / 2, np.diag([1, -1]) / 2]
        merged = repair_dependence(ops)
        assert len(merged) == 2
        assert is_cptp(merged).ok

    def test_non_unit_ratio(self):
        with pytest.raises(DependenceError):
            repair_dependence([np.eye(2) * 0.6, np.eye(2) * 0.8])

    def test_non_proportional_dependence(self):
        # off-diagonal support only on (j - k) % 3 in {0, 2}: three operators in a 2-dimensional span
        lam = np.array([[1, 0.5, 0], [0, 0.5, 0.5], [0, 0, 0.5]])
        with pytest.raises(DependenceError):
            repair_dependence(build_representation(lam))


class TestEssentiallyClassical:
    def test_representation(self, rng):
        for n in range(2, 6):
            assert is_essentially_classical(build_representation(random_stochastic(n, rng)).kraus, trials=5)

    def test_dephasing(self):
        ops = [np.diag(np.eye(3)[k]) for k in range(3)]
        assert is_essentially_classical(ops, trials=5)

    def test_hadamard_unitary(self):
        h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
        out = h @ np.diag([1, 0]) @ h.T
        assert abs(out[0, 1]) > 0.4
        assert not is_essentially_classical([h])

    def test_measure_and_prepare_across_bases(self):
        # measure in the X basis, prepare in the Z basis
        ops = [np.array([[1, 1], [0, 0]]) / math.sqrt(2), np.array([[0, 0], [1, -1]]) / math.sqrt(2)]
        assert is_cptp(ops).ok
        out = apply_channel(ops, np.array([[0, 1], [0, 0]]))
        # the diagonal of Phi(|0><1|) is nonzero although Pi(|0><1|) = 0
        assert_allclose(np.diag(out), [0.5, -0.5])
        for k in range(2):
            state = apply_channel(ops, embed_F(np.eye(2)[k]))
            assert_allclose(state, np.diag(np.diag(state)), atol=1e-15)
        assert not is_essentially_classical(ops)


class TestInvertibilityScan:
    def test_dichotomic_has_no_root(self):
        scan = invertibility_scan(ClassSpec(2, 1, 1, 2), dichotomic_family(1.0), np.linspace(0, 10, 201))
        assert scan.roots == []
        assert np.all(np.abs(scan.dets) > 0)
        # the determinant is det(L)^2 = exp(-4 t)
        assert_allclose(scan.dets.real, np.exp(-4 * scan.times), rtol=1e-8, atol=1e-15)

    def test_first_parameter_set(self):
        fam = counterexample3_family(**COUNTEREXAMPLE3_SETS[1], gamma=1.0)
        scan = invertibility_scan(ClassSpec(2, 1, 1, 4), fam, np.arange(0, 6.0 + 1e-12, 0.01))
        assert len(scan.roots) == 1
        root = scan.roots[0]
        assert root.hi - root.lo <= 1e-9
        assert root.lo - 1e-9 <= ROOT_TIME_SET1 <= root.hi + 1e-9
        det = np.linalg.det(matrix_form(build_class_member(ClassSpec(2, 1, 1, 4), fam(ROOT_TIME_SET1))))
        assert abs(det) < 1e-8

    def test_second_parameter_set(self):
        fam = counterexample3_family(**COUNTEREXAMPLE3_SETS[2], gamma=1.0)
        scan = invertibility_scan(ClassSpec(2, 1, 1, 5), fam, np.arange(0, 5.0 + 1e-12, 0.01))
        assert any(1.99393180 < r.lo and r.hi < 1.99393181 for r in scan.roots)

    def test_blocks_partition_indices(self):
        blocks = structural_blocks(ClassSpec(2, 1, 1, 5), 3)
        assert sorted(int(i) for b in blocks for i in b) == list(range(9))

    def test_unsorted_grid(self):
        with pytest.raises(ValueError):
            invertibility_scan(ClassSpec(2, 1, 1, 2), dichotomic_family(1.0), [0.0, 1.0, 0.5])

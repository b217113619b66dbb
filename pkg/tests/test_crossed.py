import numpy as np
import pytest

from felldual.bundles import (
    cocycle_line_bundle,
    right_translation_action,
    semidirect_bundle_from_group_action,
    transformation_bundle,
    trivial_cocycle,
)
from felldual.crossed import (
    CrossedError,
    action_crossed_product,
    automorphism_from_unitary,
    bundle_coaction,
    check_bundle_covariance,
    coaction_crossed_product,
    dual_action,
    group_algebra,
    induced_section_action,
    semidirect_coaction_compat,
)
from felldual.groupoids import FiniteGroup
from felldual.linalg import star_closure, verify_isomorphism
from felldual.sections import Section, SectionAlgebra, canonical_trace, \
    enveloping_cstar

from oracles import center_dimension_oracle

X = np.array([[0, 1], [1, 0]], dtype=complex)


def z2():
    return FiniteGroup.cyclic(2)


def env_of(bundle):
    return enveloping_cstar(SectionAlgebra(bundle))


def z2_line_env():
    return env_of(cocycle_line_bundle(z2(), trivial_cocycle(z2())))


def pauli_env():
    g = FiniteGroup.klein_four()
    return env_of(cocycle_line_bundle(
        g, lambda s, t: (-1.0) ** ((s % 2) * (t // 2)), name="pauli"))


def diagonal_algebra(n):
    basis = [np.zeros((n, n), dtype=complex) for _ in range(n)]
    for i in range(n):
        basis[i][i, i] = 1.0
    return star_closure(basis)


class TestGroupAlgebra:
    def test_unitaries_are_left_regular(self):
        ga = group_algebra(FiniteGroup.cyclic(3))
        for s in range(3):
            u = ga.unitary(s)
            expected = np.zeros((3, 3))
            for t in range(3):
                expected[(s + t) % 3, t] = 1.0
            assert np.allclose(u, expected)

    def test_commutative(self):
        ga = group_algebra(FiniteGroup.cyclic(4))
        assert ga.realization.dim == 4
        assert ga.realization.center_dimension() == 4


class TestCoaction:
    def test_trivial_group(self):
        g = FiniteGroup.trivial()
        env = env_of(cocycle_line_bundle(g, trivial_cocycle(g)))
        co = bundle_coaction(env)
        assert co.injective
        assert co.map.matrix.shape == (1, 1)
        assert np.allclose(co.map.matrix, [[1.0]])

    def test_z2_line_images(self):
        env = z2_line_env()
        co = bundle_coaction(env)
        # delta(u_g) = u_g (x) lambda_g on the canonical generator
        bundle = env.algebra.bundle
        u_g = env.gns_single(1, bundle.fiber(1).basis[0] * np.sqrt(2))
        image = co.map.apply(u_g)
        assert np.abs(image - np.kron(u_g, co.group_alg.unitary(1))).max() \
            <= 1e-12
        assert co.coaction_identity_residual <= 1e-12

    def test_pauli_nondegeneracy_rank(self):
        co = bundle_coaction(pauli_env())
        assert co.nondegeneracy_rank == 16

    def test_coaction_is_certified_star_hom(self):
        co = bundle_coaction(z2_line_env())
        rep = verify_isomorphism(co.map)
        assert rep.is_star_hom and rep.is_injective


class TestCoactionCrossedProduct:
    def test_trivial_group_copies_algebra(self):
        g = FiniteGroup.trivial()
        env = env_of(cocycle_line_bundle(g, trivial_cocycle(g)))
        cp = coaction_crossed_product(bundle_coaction(env))
        assert cp.carrier.dim == 1

    def test_z2_line_gives_m2(self):
        cp = coaction_crossed_product(bundle_coaction(z2_line_env()))
        assert cp.carrier.dim == 4
        assert cp.carrier.center_dimension() == 1
        assert center_dimension_oracle(cp.carrier.carrier.basis) == 1

    @pytest.mark.parametrize("make_env,order,total", [
        (z2_line_env, 2, 2),
        (pauli_env, 4, 4),
    ])
    def test_dimension_formula(self, make_env, order, total):
        cp = coaction_crossed_product(bundle_coaction(make_env()))
        assert cp.carrier.dim == order * total


class TestDualAction:
    def test_identity_element(self):
        cp = coaction_crossed_product(bundle_coaction(z2_line_env()))
        maps = dual_action(cp)
        assert np.allclose(maps[0].matrix, np.eye(cp.carrier.dim))

    def test_square_is_identity(self):
        cp = coaction_crossed_product(bundle_coaction(z2_line_env()))
        maps = dual_action(cp)
        assert np.allclose(maps[1].matrix @ maps[1].matrix,
                           np.eye(cp.carrier.dim))

    def test_fixes_constant_function_leg(self):
        # j_A(a) = sum over point masses; translation permutes the summands
        cp = coaction_crossed_product(bundle_coaction(pauli_env()))
        maps = dual_action(cp)
        g = cp.group
        for i in range(4):
            total = sum(cp.generator((i, t)) for t in g.elements())
            coords = cp.carrier.carrier.coords(total)
            for s in g.elements():
                moved = maps[s].apply_coords(coords)
                assert np.abs(moved - coords).max() <= 1e-10


class TestActionCrossedProduct:
    def test_trivial_group(self):
        b = diagonal_algebra(2)
        g = FiniteGroup.trivial()
        act = {0: automorphism_from_unitary(b, np.eye(2, dtype=complex))}
        cp = action_crossed_product(b, g, act)
        assert cp.carrier.dim == 2

    def test_swap_action_gives_m2(self):
        b = diagonal_algebra(2)
        act = {0: automorphism_from_unitary(b, np.eye(2, dtype=complex)),
               1: automorphism_from_unitary(b, X)}
        cp = action_crossed_product(b, z2(), act)
        assert cp.carrier.dim == 4
        assert cp.carrier.center_dimension() == 1
        assert center_dimension_oracle(cp.carrier.carrier.basis) == 1

    def test_dual_style_action_on_line_bundle_product(self):
        inner = coaction_crossed_product(bundle_coaction(z2_line_env()))
        maps = dual_action(inner)
        outer = action_crossed_product(inner.carrier, z2(), maps)
        assert outer.carrier.dim == 8

    def test_uncertified_action_rejected(self):
        b = diagonal_algebra(2)
        bad = automorphism_from_unitary(b, np.eye(2, dtype=complex))
        bad.matrix = np.array([[1.0, 0.0], [1.0, 0.0]])
        with pytest.raises(CrossedError):
            action_crossed_product(b, z2(), {0: bad, 1: bad})


class TestBundleCovariance:
    def test_trivial_group_always_true(self):
        g = FiniteGroup.trivial()
        bundle = cocycle_line_bundle(g, trivial_cocycle(g))
        env = env_of(bundle)
        co = bundle_coaction(env)

        def pi0(s, k):
            return co.tensor.carrier.from_coords(co.map.matrix[:, s])

        def mu(t):
            return np.eye(co.tensor.ambient_dim, dtype=complex)

        assert check_bundle_covariance(bundle, pi0, mu)

    def _cp_pair(self, env):
        co = bundle_coaction(env)
        bundle = env.algebra.bundle
        alg = env.algebra
        n = co.group.order
        eye_a = np.eye(co.algebra.ambient_dim)

        def pi0(s, k):
            i = alg.offsets[s] + k
            return co.tensor.carrier.from_coords(co.map.matrix[:, i])

        def mu(t):
            mf = np.zeros((n, n), dtype=complex)
            mf[t, t] = 1.0
            return np.kron(eye_a, mf)

        return env, bundle, co, pi0, mu

    def test_regular_generators_are_covariant(self):
        _, bundle, co, pi0, mu = self._cp_pair(z2_line_env())
        assert check_bundle_covariance(bundle, pi0, mu)

    def test_right_translation_swap_fails(self):
        # on Z/2 left and right translation coincide (s = s^-1), so the
        # negative control needs an element of order three
        g3 = FiniteGroup.cyclic(3)
        env, bundle, co, pi0, mu = self._cp_pair(
            env_of(cocycle_line_bundle(g3, trivial_cocycle(g3))))
        n = g3.order
        rho = {}
        for s in g3.elements():
            p = np.zeros((n, n), dtype=complex)
            for t in g3.elements():
                p[g3.mul(t, g3.inv(s)), t] = 1.0
            rho[s] = p

        def pi0_rt(s, k):
            # right-regular group leg instead of the left-regular one
            i = env.algebra.offsets[s] + k
            li = env.algebra.left_regular_stack()[i]
            return np.kron(li, rho[s])

        assert check_bundle_covariance(bundle, pi0, mu)
        assert check_bundle_covariance(bundle, pi0_rt, mu) is False


class TestInducedSectionAction:
    def test_identity_action_is_identity(self):
        tb = transformation_bundle(
            cocycle_line_bundle(z2(), trivial_cocycle(z2())))
        act = right_translation_action(tb)
        env = env_of(tb)
        maps = induced_section_action(env, act)
        assert np.allclose(maps[0].matrix, np.eye(env.realization.dim))

    def test_rt_action_has_order_two(self):
        tb = transformation_bundle(
            cocycle_line_bundle(z2(), trivial_cocycle(z2())))
        env = env_of(tb)
        maps = induced_section_action(env, right_translation_action(tb))
        assert np.allclose(maps[1].matrix @ maps[1].matrix,
                           np.eye(env.realization.dim))

    def test_trace_invariance_on_basis(self):
        tb = transformation_bundle(
            cocycle_line_bundle(z2(), trivial_cocycle(z2())))
        act = right_translation_action(tb)
        alg = SectionAlgebra(tb)
        for t in (0, 1):
            for i, (x, k) in enumerate(alg.basis_index):
                moved = Section.single_arrow(
                    tb, act.beta.apply(t, x), act.ad(t, tb.fiber(x).basis[k]))
                orig = alg.basis_section(i)
                assert canonical_trace(moved) == \
                    pytest.approx(canonical_trace(orig), abs=1e-12)


class TestSemidirectCompat:
    def test_trivial_group(self):
        g = FiniteGroup.trivial()
        rep = semidirect_coaction_compat(
            diagonal_algebra(2), g, {0: np.eye(2, dtype=complex)})
        assert rep.passed
        assert rep.dims == (2, 2)

    def test_swap_example(self):
        rep = semidirect_coaction_compat(
            diagonal_algebra(2), z2(), {0: np.eye(2, dtype=complex), 1: X})
        assert rep.passed
        assert rep.dims == (4, 4)
        assert rep.equivariance_residual <= 1e-9

    def test_cyclic3_example(self):
        g = FiniteGroup.cyclic(3)
        perm = np.zeros((3, 3), dtype=complex)
        for i in range(3):
            perm[(i + 1) % 3, i] = 1.0
        u = {0: np.eye(3, dtype=complex), 1: perm, 2: perm @ perm}
        rep = semidirect_coaction_compat(diagonal_algebra(3), g, u)
        assert rep.passed
        assert rep.dims == (9, 9)

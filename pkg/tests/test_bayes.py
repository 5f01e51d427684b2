import math

import numpy as np
import pytest

import statbundle as sb
from statbundle.findiff import fd_vector_curve


def random_joint(n1, n2, seed):
    space = sb.ProductSpace(
        sb.make_space(np.linspace(0.3, 1.1, n1)),
        sb.make_space(np.linspace(0.4, 1.6, n2)),
    )
    return sb.random_density(space, seed)


def enum_margin(q12):
    n1, n2 = q12.space.shape
    mu2 = q12.space.right.weights
    return [
        math.fsum(float(q12.values[x, z]) * float(mu2[z]) for z in range(n2))
        for x in range(n1)
    ]


class TestMarginalize:
    def test_product_joint_recovers_left_factor(self):
        p1 = sb.random_density(sb.make_space([0.5, 0.5, 1.0]), 1)
        p2 = sb.random_density(sb.make_space([0.8, 1.2]), 2)
        q12 = sb.product_density(p1, p2)
        np.testing.assert_allclose(
            sb.marginalize(q12).values, p1.values, atol=1e-14
        )

    def test_worked_2x2(self, joint_2x2):
        _, q12 = joint_2x2
        np.testing.assert_allclose(sb.marginalize(q12).values, [1.0, 1.0],
                                   atol=1e-15)

    def test_margin_is_valid_density(self):
        q12 = random_joint(3, 4, 7)
        q1 = sb.marginalize(q12)
        assert np.all(q1.values > 0)
        np.testing.assert_allclose(q1.values, enum_margin(q12), atol=1e-15)

    def test_requires_product_space(self, two_point):
        _, _, q, _ = two_point
        with pytest.raises(sb.MismatchError):
            sb.marginalize(q)


class TestCondition:
    def test_product_joint_is_independent(self):
        p1 = sb.random_density(sb.make_space([0.5, 0.5, 1.0]), 3)
        p2 = sb.random_density(sb.make_space([0.8, 1.2]), 4)
        q12 = sb.product_density(p1, p2)
        for x in range(3):
            np.testing.assert_allclose(
                sb.condition(q12, x).values, p2.values, atol=1e-14
            )

    def test_worked_rows(self, joint_2x2):
        _, q12 = joint_2x2
        np.testing.assert_allclose(sb.condition(q12, 0).values, [1.6, 0.4],
                                   atol=1e-15)
        np.testing.assert_allclose(sb.condition(q12, 1).values, [0.4, 1.6],
                                   atol=1e-15)

    def test_index_out_of_range(self, joint_2x2):
        _, q12 = joint_2x2
        with pytest.raises(sb.MismatchError, match="out of range"):
            sb.condition(q12, 2)

    def test_reconstruction_identity(self):
        q12 = random_joint(3, 5, 8)
        q1 = sb.marginalize(q12)
        for x in range(3):
            rebuilt = q1.values[x] * sb.condition(q12, x).values
            np.testing.assert_allclose(
                rebuilt, q12.values[x], rtol=1e-15, atol=0.0
            )


class TestMarginalDerivative:
    def test_left_measurable_velocity_passes_through(self, joint_2x2):
        _, q12 = joint_2x2
        v = sb.FiberVector(q12, [[1.0, 1.0], [-1.0, -1.0]], "mixture")
        got = sb.marginal_derivative(q12, v)
        np.testing.assert_allclose(got.values, [1.0, -1.0], atol=1e-15)

    def test_worked_zero_case(self, joint_2x2):
        _, q12 = joint_2x2
        v = sb.FiberVector(q12, [[0.4, -1.6], [-1.6, 0.4]], "mixture")
        np.testing.assert_allclose(
            sb.marginal_derivative(q12, v).values, 0.0, atol=1e-15
        )

    def test_tower_property(self):
        q12 = random_joint(4, 3, 9)
        v = sb.random_fiber(q12, 10)
        out = sb.marginal_derivative(q12, v)
        assert abs(sb.expect(out.base, out.values)) <= 1e-12

    def test_linearity(self):
        q12 = random_joint(3, 3, 11)
        v = sb.random_fiber(q12, 12)
        w = sb.random_fiber(q12, 13)
        a, b = 0.7, -1.9
        combo = sb.FiberVector(q12, a * v.values + b * w.values)
        lhs = sb.marginal_derivative(q12, combo).values
        rhs = (
            a * sb.marginal_derivative(q12, v).values
            + b * sb.marginal_derivative(q12, w).values
        )
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_matches_mixture_curve_fd(self):
        q12 = random_joint(3, 4, 14)
        v = sb.random_fiber(q12, 15)
        q1 = sb.marginalize(q12)
        curve = sb.mixture_curve(q12, v)
        numeric = fd_vector_curve(
            lambda t: sb.mix_chart(q1, sb.marginalize(curve(t))).values, 0.0
        )
        np.testing.assert_allclose(
            sb.marginal_derivative(q12, v).values, numeric, atol=1e-6
        )

    def test_base_mismatch(self, joint_2x2):
        _, q12 = joint_2x2
        other = random_joint(2, 2, 16)
        v = sb.random_fiber(other, 17)
        with pytest.raises(sb.MismatchError):
            sb.marginal_derivative(q12, v)


class TestConditionalDerivative:
    def test_left_measurable_velocity_dies(self, joint_2x2):
        _, q12 = joint_2x2
        v = sb.FiberVector(q12, [[1.0, 1.0], [-1.0, -1.0]], "mixture")
        for x in range(2):
            np.testing.assert_allclose(
                sb.conditional_derivative(q12, x, v).values, 0.0, atol=1e-15
            )

    def test_worked_example(self, joint_2x2):
        _, q12 = joint_2x2
        v = sb.FiberVector(q12, [[0.4, -1.6], [-1.6, 0.4]], "mixture")
        got = sb.conditional_derivative(q12, 0, v)
        np.testing.assert_allclose(got.values, [0.4, -1.6], atol=1e-15)

    def test_zero_conditional_expectation(self):
        q12 = random_joint(3, 5, 18)
        v = sb.random_fiber(q12, 19)
        for x in range(3):
            out = sb.conditional_derivative(q12, x, v)
            assert abs(sb.expect(out.base, out.values)) <= 1e-12

    def test_matches_mixture_curve_fd(self):
        q12 = random_joint(2, 4, 20)
        v = sb.random_fiber(q12, 21)
        curve = sb.mixture_curve(q12, v)
        for x in range(2):
            base = sb.condition(q12, x)
            numeric = fd_vector_curve(
                lambda t: sb.mix_chart(base, sb.condition(curve(t), x)).values,
                0.0,
            )
            np.testing.assert_allclose(
                sb.conditional_derivative(q12, x, v).values, numeric, atol=1e-6
            )


class TestConditioningInCharts:
    def test_zero_maps_to_zero(self, two_point):
        _, p, _, _ = two_point
        p12 = sb.product_density(p, p)
        z = sb.FiberVector(p12, np.zeros((2, 2)), "mixture")
        np.testing.assert_array_equal(
            sb.condition_chart_expression(p, p, 0, z).values, 0.0
        )

    def test_worked_example(self, two_point, joint_2x2):
        _, p, _, _ = two_point
        _, q12 = joint_2x2
        p12 = sb.product_density(p, p)
        v0 = sb.mix_chart(p12, q12)
        got = sb.condition_chart_expression(p, p, 0, v0)
        np.testing.assert_allclose(got.values, [0.6, -0.6], atol=1e-15)

    def test_commutes_with_conditioning(self):
        # the chart expression is exactly the chart of the conditioned
        # inverse-chart density
        left = sb.make_space([0.6, 1.4, 0.5])
        right = sb.make_space([0.9, 1.1])
        p1 = sb.random_density(left, 22)
        p2 = sb.random_density(right, 23)
        p12 = sb.product_density(p1, p2)
        v = sb.random_fiber(p12, 24, "mixture")
        scale = 0.4 / float(np.max(np.abs(v.values)))
        v = sb.FiberVector(p12, scale * v.values, "mixture")
        q12 = sb.mix_chart_inv(p12, v)
        for x in range(3):
            via_chart = sb.condition_chart_expression(p1, p2, x, v).values
            direct = sb.mix_chart(p2, sb.condition(q12, x)).values
            np.testing.assert_allclose(via_chart, direct, atol=1e-12)

    def test_boundary_denominator(self, two_point):
        _, p, _, _ = two_point
        p12 = sb.product_density(p, p)
        v = sb.FiberVector(p12, [[-1.5, -0.5], [0.5, 1.5]], "mixture")
        with pytest.raises(sb.BoundaryError, match="leaves the model"):
            sb.condition_chart_expression(p, p, 0, v)

    def test_derivative_matches_fd(self):
        left = sb.make_space([0.6, 1.4])
        right = sb.make_space([0.9, 1.1, 0.7])
        p1 = sb.random_density(left, 25)
        p2 = sb.random_density(right, 26)
        p12 = sb.product_density(p1, p2)
        v = sb.random_fiber(p12, 27, "mixture")
        v = sb.FiberVector(p12, 0.3 * v.values / np.max(np.abs(v.values)), "mixture")
        h = sb.random_fiber(p12, 28, "mixture")
        for x in range(2):
            analytic = sb.condition_chart_derivative(p1, p2, x, v, h).values
            numeric = fd_vector_curve(
                lambda t: sb.condition_chart_expression(
                    p1, p2, x, sb.FiberVector(p12, v.values + t * h.values, "mixture")
                ).values,
                0.0,
            )
            np.testing.assert_allclose(analytic, numeric, atol=1e-6)

    def test_transport_pipeline_reconstructs_derivative(self):
        # chart the velocity down to the base product, differentiate the
        # chart expression, transport back to the conditioned density
        q12 = random_joint(3, 4, 29)
        v = sb.random_fiber(q12, 30, "mixture")
        p1 = sb.random_density(q12.space.left, 31)
        p2 = sb.random_density(q12.space.right, 32)
        p12 = sb.product_density(p1, p2)
        v0 = sb.mix_chart(p12, q12)
        h = sb.m_transport(q12, p12, v)
        for x in range(3):
            in_chart = sb.condition_chart_derivative(p1, p2, x, v0, h)
            moved = sb.m_transport(p2, sb.condition(q12, x), in_chart)
            direct = sb.conditional_derivative(q12, x, v)
            np.testing.assert_allclose(moved.values, direct.values, atol=1e-10)


class TestChartDecomposition:
    def test_base_point_is_all_zero(self, two_point):
        _, p, _, _ = two_point
        q12 = sb.product_density(p, p)
        dec = sb.exp_decompose(p, p, q12)
        np.testing.assert_allclose(dec.joint, 0.0, atol=1e-15)
        np.testing.assert_allclose(dec.marginal, 0.0, atol=1e-15)
        np.testing.assert_allclose(dec.conditional, 0.0, atol=1e-15)
        assert dec.residual <= 1e-15

    def test_worked_2x2(self, two_point, joint_2x2):
        _, p, _, _ = two_point
        _, q12 = joint_2x2
        dec = sb.exp_decompose(p, p, q12)
        np.testing.assert_allclose(dec.marginal, 0.0, atol=1e-15)
        half_log_ratio = 0.5 * math.log(1.6 / 0.4)
        np.testing.assert_allclose(
            dec.conditional[0], [half_log_ratio, -half_log_ratio], atol=1e-12
        )
        # the conditional divergence is the same for both rows, so the
        # centering term vanishes
        np.testing.assert_allclose(dec.centering, 0.0, atol=1e-15)
        assert sb.kl(p, sb.condition(q12, 0)) == pytest.approx(
            -0.5 * math.log(0.64), abs=1e-12
        )
        assert dec.residual <= 1e-12

    def test_random_3x4(self):
        q12 = random_joint(3, 4, 33)
        p1 = sb.random_density(q12.space.left, 34)
        p2 = sb.random_density(q12.space.right, 35)
        assert sb.exp_decompose(p1, p2, q12).residual <= 1e-12

    def test_literal_centering_breaks_the_identity(self):
        # the unweighted average is only exhibited for comparison: with a
        # margin reference that is not flat it cannot close the identity
        q12 = random_joint(3, 4, 36)
        p1 = sb.random_density(q12.space.left, 37)
        p2 = sb.random_density(q12.space.right, 38)
        weighted = sb.exp_decompose(p1, p2, q12, weighted_centering=True)
        literal = sb.exp_decompose(p1, p2, q12, weighted_centering=False)
        assert weighted.residual <= 1e-12
        assert literal.residual > 1e-6


class TestKLChain:
    def test_base_point_is_zero(self, two_point):
        _, p, _, _ = two_point
        q12 = sb.product_density(p, p)
        chain = sb.kl_chain(p, p, q12)
        assert chain.total == pytest.approx(0.0, abs=1e-15)
        assert chain.marginal_term == pytest.approx(0.0, abs=1e-15)
        assert chain.conditional_term == pytest.approx(0.0, abs=1e-15)

    def test_worked_2x2(self, two_point, joint_2x2):
        _, p, _, _ = two_point
        _, q12 = joint_2x2
        chain = sb.kl_chain(p, p, q12)
        expected = -0.5 * math.log(0.64)
        assert chain.total == pytest.approx(expected, abs=1e-12)
        assert chain.marginal_term == pytest.approx(0.0, abs=1e-12)
        assert chain.conditional_term == pytest.approx(expected, abs=1e-12)
        assert chain.residual <= 1e-12

    def test_random_instances(self):
        for seed in range(5):
            q12 = random_joint(3, 5, [40, seed])
            p1 = sb.random_density(q12.space.left, [41, seed])
            p2 = sb.random_density(q12.space.right, [42, seed])
            assert sb.kl_chain(p1, p2, q12).residual <= 1e-12

    def test_total_matches_enumeration(self):
        q12 = random_joint(3, 4, 43)
        p1 = sb.random_density(q12.space.left, 44)
        p2 = sb.random_density(q12.space.right, 45)
        chain = sb.kl_chain(p1, p2, q12)
        mu1 = q12.space.left.weights
        mu2 = q12.space.right.weights
        total = math.fsum(
            float(p1.values[x]) * float(p2.values[y])
            * math.log(float(p1.values[x]) * float(p2.values[y])
                       / float(q12.values[x, y]))
            * float(mu1[x]) * float(mu2[y])
            for x in range(3)
            for y in range(4)
        )
        assert chain.total == pytest.approx(total, abs=1e-14)

    def test_space_mismatch(self, joint_2x2):
        _, q12 = joint_2x2
        p_wrong = sb.random_density(sb.make_space([1, 1, 1]), 0)
        p_ok = sb.uniform_density(q12.space.right)
        with pytest.raises(sb.MismatchError):
            sb.kl_chain(p_wrong, p_ok, q12)

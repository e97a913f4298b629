import numpy as np
import pytest

from hypernorm.core import OperatorInstance
from hypernorm.oracles import norm_2_to_q_lower
from hypernorm.pseudoexp import validate_pef
from hypernorm.sdp import SolveOptions
from hypernorm.tensorsdp import (
    a22_matrix,
    a22_value,
    bcy_gap,
    certify_hypercontractivity,
    index_symmetrize,
    low_degree_instance,
    tensor_sdp,
)


def sign_instance(m, n, seed=0):
    rng = np.random.default_rng(seed)
    return OperatorInstance(rng.choice([-1.0, 1.0], size=(m, n)))


class TestTensorSdp:
    def test_scalar(self):
        res = tensor_sdp(OperatorInstance(np.array([[2.0]])), 4)
        assert abs(res.value - 16.0) <= 1e-5

    def test_identity2_circle_maximum(self):
        res = tensor_sdp(OperatorInstance(np.eye(2)), 4)
        assert abs(res.value - 1.0) <= 1e-6
        assert validate_pef(res.pe, 1e-6).passed

    def test_pe_satisfies_sphere_ideal(self):
        res = tensor_sdp(sign_instance(6, 3), 4)
        rep = validate_pef(res.pe, 1e-6)
        assert rep.passed
        assert max(rep.constraint_residuals) <= 1e-6

    def test_sandwich_against_oracle_and_eigenbound(self):
        inst = sign_instance(6, 3)
        res = tensor_sdp(inst, 4)
        ora = norm_2_to_q_lower(inst, 4, restarts=32, seed=0)
        lam = float(np.linalg.eigvalsh(a22_matrix(inst))[-1])
        assert ora.value**4 - 1e-6 <= res.value <= lam + 1e-6

    def test_level_monotonicity(self, rng):
        inst = OperatorInstance(rng.normal(size=(4, 2)))
        v4 = tensor_sdp(inst, 4).value
        v6 = tensor_sdp(inst, 6).value
        v8 = tensor_sdp(inst, 8, expand_residual=False).value
        assert v6 <= v4 + 1e-5
        assert v8 <= v6 + 1e-5

    def test_scaling_covariance(self):
        inst = sign_instance(5, 3, seed=4)
        v1 = tensor_sdp(inst, 4, expand_residual=False).value
        v2 = tensor_sdp(inst.scaled(2.0), 4, expand_residual=False).value
        assert abs(v2 - 16.0 * v1) <= 1e-8 * max(1.0, 16.0 * v1)

    def test_size_limits(self, rng):
        with pytest.raises(ValueError):
            tensor_sdp(OperatorInstance(rng.normal(size=(4, 21))), 4)
        with pytest.raises(ValueError):
            tensor_sdp(OperatorInstance(rng.normal(size=(4, 3))), 5)

    def test_certificate_identity(self):
        # the dual certificate reconstructs bound - objective as SOS + ideal part
        inst = sign_instance(6, 3, seed=1)
        res = tensor_sdp(inst, 4)
        cert = res.certificate
        assert cert.residual <= 1e-6
        assert cert.bound >= res.value - 1e-6 * max(1, res.value)

    def test_certificate_identity_level_six(self, rng):
        inst = OperatorInstance(rng.normal(size=(4, 2)))
        res = tensor_sdp(inst, 6)
        assert res.certificate.residual <= 1e-6
        assert res.certificate.bound >= res.value - 1e-6 * max(1, res.value)

    def test_bivariate_grid_exactness(self):
        # for two columns the relaxation is exact (bivariate quartic
        # nonnegativity is a sum of squares); compare to a fine circle grid
        for seed in range(5):
            r2 = np.random.default_rng(seed)
            a = r2.normal(size=(5, 2))
            inst = OperatorInstance(a)
            theta = np.linspace(0, np.pi, 200_001)
            pts = np.stack([np.cos(theta), np.sin(theta)], axis=1)
            truth = float(np.max(np.sum((pts @ a.T) ** 4, axis=1)))
            val = tensor_sdp(inst, 4, expand_residual=False).value
            assert truth - 1e-6 * max(1, truth) <= val <= truth + 1e-5 * max(1, truth)

    def test_certificate_valid_when_underconverged(self):
        inst = sign_instance(6, 3, seed=2)
        full = tensor_sdp(inst, 4, expand_residual=False)
        rough = tensor_sdp(inst, 4, opts=SolveOptions(max_iter=10), expand_residual=True)
        ora = norm_2_to_q_lower(inst, 4, restarts=16, seed=0)
        assert rough.certificate.bound >= ora.value**4 - 1e-9
        assert rough.certificate.bound >= full.value - 1e-5
        assert rough.certificate.residual <= 1e-6


class TestA22:
    def test_identity_agrees(self):
        inst = OperatorInstance(np.eye(2))
        assert abs(a22_value(inst) - 1.0) <= 1e-6

    def test_engines_and_formulations_agree(self):
        inst = sign_instance(6, 3)
        v_proj = a22_value(inst, engine="projector")
        v_gen = a22_value(inst, engine="generic")
        v_mom = tensor_sdp(inst, 4, expand_residual=False).value
        scale = max(1.0, abs(v_mom))
        assert abs(v_proj - v_gen) <= 1e-5 * scale
        assert abs(v_proj - v_mom) <= 1e-5 * scale

    def test_unsymmetrized_collapses_to_eigenvalue_with_gap(self, rng):
        # without permutation symmetry the program is the top eigenvalue, and
        # Gaussian-like rows make that strictly larger (the identity-tensor
        # direction has eigenvalue growing with n)
        n, m = 6, 720
        a = rng.normal(size=(m, n))
        inst = OperatorInstance(a / np.sqrt(n), "expectation")
        lam = float(np.linalg.eigvalsh(a22_matrix(inst))[-1])
        nosym = a22_value(inst, symmetrize=False)
        sym = a22_value(inst)
        assert abs(nosym - lam) <= 1e-4 * lam
        assert nosym > sym + 0.5

    def test_rigorous_bound_dominates(self):
        inst = sign_instance(8, 3, seed=9)
        res = a22_value(inst, return_details=True)
        assert res.bound >= res.value - 1e-7 * max(1, res.value)
        sym = index_symmetrize(a22_matrix(inst), 3)
        assert np.isclose(res.bound, np.linalg.eigvalsh(sym)[-1])


class TestBcy:
    def test_identity_all_equal(self):
        rep = bcy_gap(OperatorInstance(np.eye(4)), restarts=8)
        assert abs(rep.oracle_fourth - 1.0) <= 1e-6
        assert abs(rep.sdp_value - 1.0) <= 1e-5
        assert abs(rep.Z - 1.0) <= 1e-12
        assert abs(rep.implied_epsilon) <= 1e-5

    def test_single_unit_row(self):
        rep = bcy_gap(OperatorInstance(np.array([[0.6, 0.8]])), restarts=8)
        assert abs(rep.oracle_fourth - 1.0) <= 1e-8
        assert abs(rep.sdp_value - 1.0) <= 1e-5
        assert abs(rep.Z - 1.0) <= 1e-12

    def test_random_gaussian_sandwich(self, rng):
        inst = OperatorInstance(rng.normal(size=(32, 8)) / np.sqrt(8))
        rep = bcy_gap(inst, restarts=32, seed=0)
        assert rep.oracle_fourth <= rep.sdp_value + 1e-6
        assert rep.sdp_value <= rep.Z + 1e-5
        assert rep.implied_epsilon >= -1e-6 / rep.Z


class TestHyper:
    def test_degree_zero_constants(self):
        hc = certify_hypercontractivity(3, 0, restarts=4)
        assert abs(hc.value - 1.0) <= 1e-6
        assert hc.bound_claimed == 1.0

    def test_low_degree_instance_objective(self, rng):
        # the instance's quartic row sum equals E f^4 of the coefficient vector
        inst = low_degree_instance(3, 1)
        rows = inst.quartic_rows()
        from hypernorm.polybasis import chi_table

        table, _ = chi_table(3, 1)
        for _ in range(10):
            c = rng.normal(size=4)
            c /= np.linalg.norm(c)
            assert np.isclose(np.sum((rows @ c) ** 4), np.mean((table @ c) ** 4))

    def test_l4_d1_below_nine(self):
        hc = certify_hypercontractivity(4, 1, restarts=16)
        assert hc.value <= 9.0 + 1e-4
        assert hc.value >= hc.oracle_fourth - 1e-4
        assert hc.certificate.residual <= 1e-6

    def test_degree_one_projector_moment_solution_validates(self):
        # the solver output for the cube projector on 3 variables is a valid
        # level-4 functional satisfying the sphere ideal at 1e-6, and its
        # certificate reconstructs bound - objective as squares + ideal part
        res = tensor_sdp(low_degree_instance(3, 1), 4)
        rep = validate_pef(res.pe, 1e-6)
        assert rep.passed
        assert res.certificate.residual <= 1e-6
        assert res.certificate.squares  # nontrivial SOS part

    def test_size_guard(self):
        with pytest.raises(ValueError):
            certify_hypercontractivity(10, 2)

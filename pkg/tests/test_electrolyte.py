import math

import numpy as np
import pytest

from cellsim.electrolyte import (
    COLLOCATION,
    ElectrolyteProfile,
    amount_dynamics,
    exp_update,
    initial_amounts,
    interface_matrix,
    solve_profile,
)
from cellsim.errors import ProfileValidityError
from cellsim.parameters import electrolyte_diffusivity


def brug_de4(params, t=298.0, ce=None):
    ce = params.ce0 if ce is None else ce
    de = electrolyte_diffusivity(ce, t)
    return (de * params.brug(params.neg.eps_e),
            de * params.brug(params.sep.eps_e),
            de * params.brug(params.sep.eps_e),
            de * params.brug(params.pos.eps_e))


def test_collocation_grid():
    assert np.allclose(COLLOCATION, [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])


def test_exp_update_exact_for_constant_target():
    tau, k, dt = 12.0, 5.0, 1.0
    x = 1.0
    for _ in range(40):
        x = exp_update(x, tau, k, dt)
    assert x == pytest.approx(k + (1.0 - k) * math.exp(-40.0 / tau), rel=1e-12)


def test_exp_update_array_and_identity_limits():
    x = np.array([1.0, 2.0])
    out = exp_update(x, np.array([1e12, 1e12]), np.array([9.0, 9.0]), 1.0)
    assert np.allclose(out, x, rtol=1e-9)
    # dt >> tau lands on the target
    assert exp_update(1.0, 0.01, 7.0, 10.0) == pytest.approx(7.0, rel=1e-12)


def test_initial_amounts_frozen(presets):
    qn, _ = initial_amounts(presets["ncm523"])
    assert qn == pytest.approx(3.0486e-3, rel=2e-4)
    qn_lf, _ = initial_amounts(presets["lfpo"])
    assert qn_lf == pytest.approx(2.9489e-3, rel=2e-4)


def test_equilibrium_profile_is_flat(presets):
    p = presets["ncm523"]
    qn, qp = initial_amounts(p)
    prof = solve_profile(qn, qp, p, brug_de4(p))
    assert np.allclose(prof.ce_neg, p.ce0, rtol=1e-9)
    assert np.allclose(prof.ce_pos, p.ce0, rtol=1e-9)
    assert np.allclose(prof.ce_sep, p.ce0, rtol=1e-9)


def test_profile_interface_continuity(presets):
    p = presets["ncm523"]
    qn, qp = initial_amounts(p)
    prof = solve_profile(1.1 * qn, 0.9 * qp, p, brug_de4(p))
    # concentration continuity at both separator faces
    assert prof.eval_neg(p.neg.L) == pytest.approx(prof.eval_sep(0.0), rel=1e-9)
    assert prof.eval_pos(0.0, p.pos.L) == pytest.approx(
        prof.eval_sep(p.sep.L), rel=1e-9)


def test_profile_flux_continuity_is_area_weighted(presets):
    p = presets["ncm523"]
    de4 = brug_de4(p)
    qn, qp = initial_amounts(p)
    prof = solve_profile(1.05 * qn, 0.95 * qp, p, de4)
    # total molar flow A*De*dce/dx matches across the negative interface
    flow_el = p.neg.A * de4[0] * 2.0 * prof.ae_neg * p.neg.L
    flow_sep = p.sep.A * de4[1] * prof.ae_sep
    assert flow_el == pytest.approx(flow_sep, rel=1e-9)


def test_profile_integrals_recover_amounts(presets):
    p = presets["ncm523"]
    qn, qp = initial_amounts(p)
    prof = solve_profile(1.07 * qn, 0.93 * qp, p, brug_de4(p))
    xs = np.linspace(0.0, p.neg.L, 20001)
    got = np.trapezoid(prof.eval_neg(xs), xs) * p.neg.A * p.neg.eps_e
    assert got == pytest.approx(1.07 * qn, rel=1e-7)
    xs = np.linspace(0.0, p.pos.L, 20001)
    got = np.trapezoid(prof.eval_pos(xs, p.pos.L), xs) * p.pos.A * p.pos.eps_e
    assert got == pytest.approx(0.93 * qp, rel=1e-7)


def test_profile_validity_guard(presets):
    p = presets["ncm523"]
    qn, qp = initial_amounts(p)
    with pytest.raises(ProfileValidityError):
        solve_profile(3.0 * qn, -1.5 * qp, p, brug_de4(p))


def test_amount_dynamics_conserves_the_sum(presets):
    # tau_neg == tau_pos and K_neg + K_pos == Qe0: the pair's exponential
    # updates then keep Qe_neg + Qe_pos at Qe0 exactly, any current
    p = presets["ncm523"]
    qn, qp = initial_amounts(p)
    qe0 = qn + qp
    for current in (-3.0, 0.0, 1.5, 6.0):
        tau_n, k_n, tau_p, k_p = amount_dynamics(qe0, current, p, brug_de4(p))
        assert tau_n == pytest.approx(tau_p, rel=1e-9)
        assert k_n + k_p == pytest.approx(qe0, rel=1e-12)


def test_amount_dynamics_discharge_moves_lithium_to_negative(presets):
    p = presets["ncm523"]
    qn, qp = initial_amounts(p)
    tau_n, k_n, _, _ = amount_dynamics(qn + qp, 1.5, p, brug_de4(p))
    assert tau_n > 0.0
    assert k_n > qn  # discharge target holds more electrolyte lithium


def test_interface_matrix_shape_and_rank(presets):
    mat = interface_matrix(presets["lfpo"], brug_de4(presets["lfpo"]))
    assert mat.shape == (4, 4)
    assert np.linalg.matrix_rank(mat) == 4

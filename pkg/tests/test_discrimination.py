import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsecret import discrimination as disc
from qsecret.discrimination import (
    Ensemble,
    GenMeasurement,
    Infeasible,
    Member,
    build_ensemble,
    classify,
    damped_state,
    default_alpha_grid,
    dennis_project,
    discrepancy_report,
    error_rate,
    evaluate,
    inconclusive_bound,
    measurement_operator,
    optimize,
    povm_U,
    povm_V,
    psd_scan,
    reference_er1,
    reference_er2,
    reference_eta,
    reference_rho00,
    reference_zeta,
    t_bits,
)
from qsecret.protocol import BELL, DennisOutcome
from qsecret.qmath import basis_ket, projector

S = 1 / math.sqrt(2)
GAMMA_GRID = [k / 10 for k in range(11)]
MEASUREMENTS = [(S, S), (0.8, 0.6)]
PHI_PLUS_2 = 0.5 * np.ones((2, 2))  # |phi+><phi+| in {|00>, |11>} coordinates


def project_oracle(rho_prime, vec):
    """<v|_{34} rho' |v>_{34} by explicit tensor contraction."""
    t = rho_prime.reshape(4, 4, 4, 4)  # (charlie, dennis, charlie', dennis')
    return np.einsum("d,adbe,e->ab", vec.conj(), t, vec)


def test_measurement_examples():
    m = GenMeasurement(1.0, 0.0)
    assert np.array_equal(measurement_operator(m), projector(basis_ket("00")))
    assert np.allclose(measurement_operator(GenMeasurement.bell()), projector(BELL["phi+"]))


def test_measurement_rejects_unnormalized():
    with pytest.raises(ValueError):
        GenMeasurement(0.5, 0.5)


def test_bell_measurement_is_complete():
    total = sum(measurement_operator(GenMeasurement.bell(k)) for k in DennisOutcome)
    assert np.abs(total - np.eye(4)).max() < 1e-12


@settings(max_examples=100, deadline=None)
@given(theta=st.floats(0, math.pi / 2), phase=st.floats(0, 2 * math.pi))
def test_measurement_sum_general_alpha(theta, phase):
    # P1+P2+Q1+Q2 = 2|a|^2 (|00><00| + |01><01|) + 2|b|^2 (|10><10| + |11><11|),
    # which is the identity only at |a|^2 = 1/2.
    a, b = math.cos(theta), math.sin(theta) * complex(math.cos(phase), math.sin(phase))
    total = sum(measurement_operator(GenMeasurement(a, b, k)) for k in DennisOutcome)
    expected = np.diag([2 * abs(a) ** 2, 2 * abs(a) ** 2, 2 * abs(b) ** 2, 2 * abs(b) ** 2])
    assert np.abs(total - expected).max() < 1e-12


@settings(max_examples=60, deadline=None)
@given(gamma=st.floats(0, 1), theta=st.floats(0, math.pi / 2), phase=st.floats(0, 2 * math.pi),
       i=st.integers(1, 8))
def test_branch_probabilities_sum_to_one(gamma, theta, phase, i):
    base = GenMeasurement(math.cos(theta), math.sin(theta) * complex(math.cos(phase), math.sin(phase)))
    rho = damped_state(i, gamma)
    total = 0.0
    for k in DennisOutcome:
        m = base.with_kind(k)
        state, p = dennis_project(rho, m)
        total += p
        if state is not None:
            assert np.abs(state * p - project_oracle(rho, m.vector())).max() < 1e-12
    assert abs(total - 1) < 1e-12


def test_dennis_project_examples():
    state, p = dennis_project(damped_state(1, 0.0), GenMeasurement.bell())
    assert p == pytest.approx(0.5) and np.allclose(state, projector(BELL["phi+"]))
    state, _ = dennis_project(damped_state(1, 0.3), GenMeasurement.bell())
    assert state[0, 0] == pytest.approx(0.5 + 0.5 * 0.09, abs=1e-12)
    state, _ = dennis_project(damped_state(5, 1.0), GenMeasurement.bell())
    assert np.allclose(state, projector(basis_ket("00")), atol=1e-15)
    assert dennis_project(damped_state(1, 0.4), GenMeasurement.bell(DennisOutcome.Q1)) == (None, 0.0)


@pytest.mark.parametrize("alpha,beta", MEASUREMENTS + [(0.6, 0.8j)])
@pytest.mark.parametrize("i", [1, 2, 5, 6])
@pytest.mark.parametrize("gamma", GAMMA_GRID)
def test_rho00_matches_listed_matrix(alpha, beta, i, gamma):
    state, _ = dennis_project(damped_state(i, gamma), GenMeasurement(alpha, beta))
    assert np.abs(state - reference_rho00(i, gamma, alpha, beta)).max() < 1e-12


def test_classify_examples():
    for g in (0.0, 0.3, 1.0):
        rho00, _ = dennis_project(damped_state(5, g), GenMeasurement.bell())
        state, w = classify(rho00, "M1")
        assert w == pytest.approx(g / 2, abs=1e-12)
        if g > 0:
            assert np.allclose(state, projector(basis_ket("00")))
        else:
            assert state is None and w == 0.0


def test_zeta1_trace_is_twice_listed_value():
    # The listed rho_1^{M2} has trace |b|^2 g (1-g); its listed weight is half that.
    g = 0.3
    rho00, _ = dennis_project(damped_state(1, g), GenMeasurement.bell())
    _, w = classify(rho00, "M2")
    assert w == pytest.approx(0.5 * g * (1 - g), abs=1e-12)
    assert w == pytest.approx(2 * reference_zeta(1, g, S, S), abs=1e-12)


@pytest.mark.parametrize("alpha,beta", MEASUREMENTS)
@pytest.mark.parametrize("gamma", GAMMA_GRID)
def test_weights_against_listed_formulas(alpha, beta, gamma):
    m = GenMeasurement(alpha, beta)
    e1, e2 = build_ensemble(gamma, m, "M1"), build_ensemble(gamma, m, "M2")
    for i in (1, 2, 5, 6):
        assert abs(e1.weight(i) - reference_eta(i, gamma, alpha, beta)) < 1e-12
    for i in (5, 6):
        assert abs(e2.weight(i) - reference_zeta(i, gamma, alpha, beta)) < 1e-12
    for i in (1, 2):
        assert abs(e2.weight(i) - 2 * reference_zeta(i, gamma, alpha, beta)) < 1e-12
    # Per Dennis outcome the two classes exhaust the prior.
    for i in (1, 2, 5, 6):
        assert abs(e1.weight(i) + e2.weight(i) - 0.5) < 1e-12


def test_noiseless_weights_vanish():
    m = GenMeasurement.bell()
    e1, e2 = build_ensemble(0.0, m, "M1"), build_ensemble(0.0, m, "M2")
    assert e1.weight(5) == e1.weight(6) == 0.0
    assert e2.weight(1) == e2.weight(2) == 0.0


def test_weights_scale_with_prior():
    m = GenMeasurement.bell()
    a = build_ensemble(0.4, m, "M1", prior=0.5)
    b = build_ensemble(0.4, m, "M1", prior=0.25)
    assert all(abs(x.weight - 2 * y.weight) < 1e-15 for x, y in zip(a.members, b.members))


def test_inconclusive_bound_noiseless_is_zero():
    assert inconclusive_bound(build_ensemble(0.0, GenMeasurement.bell(), "M1")).value < 1e-12


def test_inconclusive_bound_identical_members():
    rho = np.diag([0.5, 0, 0, 0.5]).astype(complex)
    w = 0.3
    ens = Ensemble((Member(1, rho, w), Member(2, rho, w)), "M1")
    # sum over ordered pairs = 2 w^2, times n/(n-1) = 2
    assert inconclusive_bound(ens).value == pytest.approx(math.sqrt(2 * 2 * w * w))


def test_inconclusive_bound_frozen_value():
    # Independent 2x2 oracle with scipy sqrtm fidelities, evaluated once.
    bound = inconclusive_bound(build_ensemble(0.5, GenMeasurement.bell(), "M1"))
    assert bound.value == pytest.approx(1.0992421631894098, abs=1e-12)
    assert bound.clamped == 1.0


def test_inconclusive_bound_normalized_variant():
    ens = build_ensemble(0.5, GenMeasurement.bell(), "M1")
    total = sum(m.weight for m in ens.members)
    raw, norm = inconclusive_bound(ens).value, inconclusive_bound(ens, normalize=True).value
    assert norm == pytest.approx(raw / total, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(gamma=st.floats(0, 1), which=st.sampled_from(["M1", "M2"]),
       perm=st.permutations(range(4)))
def test_inconclusive_bound_permutation_symmetric(gamma, which, perm):
    ens = build_ensemble(gamma, GenMeasurement.bell(), which)
    shuffled = Ensemble(tuple(ens.members[k] for k in perm), which)
    a, b = inconclusive_bound(ens).value, inconclusive_bound(shuffled).value
    assert a >= 0 and abs(a - b) < 1e-12


def test_povm_examples():
    u = povm_U(0.0)
    assert np.allclose(u[1], PHI_PLUS_2) and not u[5].any() and not u[6].any()
    v = povm_V(0.0)
    assert not v[1].any() and not v[2].any() and np.allclose(v[5], 0.5 * np.ones((2, 2)))


@pytest.mark.parametrize("x", [0.0, 0.25, 0.5, 1.0])
def test_povm_sums_exact(x):
    assert np.array_equal(sum(povm_U(x).values()), np.eye(2))
    assert np.array_equal(sum(povm_V(x).values()), np.eye(2))


@given(st.floats(-2, 2))
def test_povm_sums_any_parameter(x):
    assert np.abs(sum(povm_U(x).values()) - np.eye(2)).max() < 1e-15
    assert np.abs(sum(povm_V(x).values()) - np.eye(2)).max() < 1e-15


def test_psd_scan_examples():
    (row,) = psd_scan(disc.U_FAMILY, [0.0])
    assert row.feasible
    (row,) = psd_scan(disc.U_FAMILY, [0.2])
    assert not row.feasible and row.min_eigs[1] < 0
    # det U1 = -u/2 = trace * min_eig * max_eig
    (row,) = psd_scan(disc.V_FAMILY, [0.1])
    assert not row.feasible and row.min_eigs[1] == pytest.approx(-0.1)


def test_psd_scan_default_grid():
    grid = [k * 0.005 for k in range(201)]
    assert [r.value for r in psd_scan(disc.U_FAMILY, grid) if r.feasible] == [0.0]
    assert [r.value for r in psd_scan(disc.V_FAMILY, grid) if r.feasible] == [0.0]


def trace_oracle(povm2, states2):
    """1 - 1/2 sum tr[Pi_i rho_i] with everything written out as 2x2 blocks."""
    return 1 - 0.5 * sum(np.trace(povm2[k] @ states2[k]).real for k in povm2)


def test_error_rate_oracles():
    # gamma = 0: rho_1 = 1/2 |phi+><phi+|, rho_2 = 1/2 |phi-><phi-|, rho_5 = rho_6 = 0
    phi_m = 0.5 * np.array([[1, -1], [-1, 1]])
    zero = np.zeros((2, 2))
    states = {1: 0.5 * PHI_PLUS_2, 2: 0.5 * phi_m, 5: zero, 6: zero}
    oracle = trace_oracle(povm_U(0.0), states)
    assert oracle == pytest.approx(0.5)
    assert abs(error_rate(povm_U(0.0), build_ensemble(0.0, GenMeasurement.bell(), "M1")) - oracle) < 1e-12

    # gamma = 1: everything lands on |00><00| with weights 1/2, 1/2, 1/2, 1/2
    g00 = np.diag([0.5, 0.0])
    oracle = trace_oracle(povm_U(0.0), {1: g00, 2: g00, 5: g00, 6: g00})
    assert oracle == pytest.approx(0.75)
    assert abs(error_rate(povm_U(0.0), build_ensemble(1.0, GenMeasurement.bell(), "M1")) - oracle) < 1e-12

    # gamma = 0, M2 block {|01>, |10>}: rho_5 = 1/2 |psi+><psi+|, rho_6 = 1/2 |psi-><psi->
    states = {1: zero, 2: zero, 5: 0.5 * PHI_PLUS_2, 6: 0.5 * phi_m}
    oracle = trace_oracle(povm_V(0.0), states)
    assert oracle == pytest.approx(0.5)
    assert abs(error_rate(povm_V(0.0), build_ensemble(0.0, GenMeasurement.bell(), "M2")) - oracle) < 1e-12


def test_error_rate_label_mismatch():
    ens = build_ensemble(0.2, GenMeasurement.bell(), "M1")
    with pytest.raises(ValueError):
        error_rate(povm_U(0.0, labels=(1, 2, 3, 4)), ens)


def test_reference_error_rates():
    assert reference_er1(0, 0) == pytest.approx(0.5)
    assert reference_er2(0, 0) == pytest.approx(0.0)
    assert reference_er1(0, 1) == pytest.approx(0.25)


@settings(max_examples=50)
@given(u=st.floats(0, 1), gamma=st.floats(0, 1))
def test_reference_er1_offset_is_half_gamma(u, gamma):
    # Direct trace evaluation exceeds the listed closed form by exactly gamma/2.
    numeric = error_rate(povm_U(u), build_ensemble(gamma, GenMeasurement.bell(), "M1"))
    assert abs(numeric - reference_er1(u, gamma) - gamma / 2) < 1e-12


@settings(max_examples=50)
@given(v=st.floats(0, 1), gamma=st.floats(0, 1))
def test_er2_numeric_closed_form(v, gamma):
    numeric = error_rate(povm_V(v), build_ensemble(gamma, GenMeasurement.bell(), "M2"))
    assert abs(numeric - (1 + gamma) / 2) < 1e-12


def test_t_bits():
    assert t_bits(0, 0) == 4
    r = evaluate(0.0, 0.0, 0.0)
    assert r.t_bits_numeric == pytest.approx(3.0)
    assert r.t_bits_paper == pytest.approx(3.5)
    assert r.discrepancies == [("er2", pytest.approx(0.5), pytest.approx(0.0), pytest.approx(0.5))]


def test_optimize_noiseless_picks_bell():
    grid = [k * 0.005 for k in range(201)]
    best = optimize(0.0, grid, grid, default_alpha_grid())
    assert (best.u, best.v) == (0.0, 0.0)
    assert best.alpha == pytest.approx(S) and best.beta == pytest.approx(S)
    assert best.p0_1 < 1e-12


def test_optimize_bell_is_best_on_alpha_grid_at_gamma_zero():
    sums = {}
    for a in default_alpha_grid():
        r = evaluate(0.0, 0.0, 0.0, GenMeasurement.from_alpha(a))
        sums[a] = r.er1_numeric + r.er2_numeric
    assert min(sums, key=sums.get) == pytest.approx(S)


def test_optimize_full_damping():
    best = optimize(1.0, [0.0, 0.5], [0.0], [S])
    assert best.u == 0.0 and best.er1_numeric == pytest.approx(0.75, abs=1e-12)


def test_optimize_infeasible():
    assert isinstance(optimize(0.3, [], [0.0], [S]), Infeasible)
    assert isinstance(optimize(0.3, [0.2, 0.4], [0.0], [S]), Infeasible)


def test_optimize_tie_breaks_smallest_v():
    # er2 does not depend on v, so every feasible v ties.
    best = optimize(0.5, [0.0], [0.3, 0.1, 0.2], [S], tol=10.0)
    assert best.v == 0.1


@pytest.mark.parametrize("gamma", [0.0, 0.3, 0.8])
def test_optimizer_argmin_invariant_under_weight_scaling(gamma):
    grid = [0.0, 0.1, 0.2]
    alphas = [k / 20 for k in range(21)]
    results = [optimize(gamma, grid, grid, alphas, tol=10.0, prior=p) for p in (0.5, 0.25, 1.0)]
    keys = {(r.u, r.v, r.alpha) for r in results}
    assert len(keys) == 1


@pytest.mark.parametrize("branch", ["I", "X", "iY"])
def test_other_branches_mirror_z(branch):
    for g in (0.0, 0.35, 1.0):
        a, b = evaluate(g, 0.0, 0.0), evaluate(g, 0.0, 0.0, branch=branch)
        assert abs(a.er1_numeric - b.er1_numeric) < 1e-12
        assert abs(a.er2_numeric - b.er2_numeric) < 1e-12
        assert abs(a.p0_1 - b.p0_1) < 1e-12


def test_discrepancy_report():
    ledger = discrepancy_report([0.0, 0.25, 0.5, 0.75, 1.0])
    (er2_0,) = [r for r in ledger.section("er2") if r.gamma == 0.0]
    assert er2_0.flagged and er2_0.delta == pytest.approx(0.5)
    (er1_1,) = [r for r in ledger.section("er1") if r.gamma == 1.0]
    assert er1_1.flagged and er1_1.delta == pytest.approx(0.5)
    assert not any(r.flagged for r in ledger.section("eta"))
    assert not any(r.flagged for r in ledger.section("rho00"))
    flagged_rho = {(r.quantity, r.gamma) for r in ledger.section("rho_prime") if r.flagged}
    assert flagged_rho == {(f"rho'_{i}", g) for i in (7, 8) for g in (0.0, 0.25, 0.5, 0.75)}
    flagged_zeta = {r.quantity.split("[")[0] for r in ledger.section("zeta") if r.flagged}
    assert flagged_zeta == {"zeta_1", "zeta_2"}
    assert ledger.feasible_sets == {"u": [0.0], "v": [0.0]}


def test_discrepancy_report_degenerate_tolerance():
    ledger = discrepancy_report([0.0, 0.5], tol=1.0)
    assert not any(r.flagged for r in ledger.rows)

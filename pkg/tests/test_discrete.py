"""Finite-alphabet solvers: estimator, capacity, rate-distortion, region."""

import itertools

import numpy as np
import pytest

from cas_limits import (
    FiniteCasModel,
    InfeasibleConstraint,
    UnreachableDistortion,
    ZeroProbabilityObservation,
    constrained_capacity,
    estimate_cost,
    estimate_costs,
    min_total_distortion,
    mutual_information,
    optimal_estimate,
    rate_distortion_discrete,
    theorem1_feasible,
)
from cas_limits.discrete import (
    estimator_table,
    induced_estimate_marginal,
    rate_distortion_inverse,
)

from helpers import (
    HAMMING,
    binary_sensing_model,
    bsc,
    random_finite_model,
    reference_2x2x2_model,
)


def h2_nats(p):
    return -(p * np.log(p) + (1 - p) * np.log(1 - p))


def noiseless_model(n=2):
    eye = np.eye(n)
    return FiniteCasModel(
        state_prior=np.full(n, 1.0 / n),
        sensing_law=np.stack([eye, eye]),
        comm_law=np.eye(2),
        distortion=1.0 - eye,
        cost=np.zeros(2),
    )


def state_blind_model(prior=(0.7, 0.3)):
    """The sensing observation carries no information about the state."""
    flat = np.full((2, 2), 0.5)
    return FiniteCasModel(
        state_prior=list(prior),
        sensing_law=np.stack([flat, flat]),
        comm_law=bsc(0.1),
        distortion=HAMMING,
        cost=np.zeros(2),
    )


# ---------------------------------------------------------------- estimator


def test_noiseless_sensing_estimates_the_observation():
    model = noiseless_model()
    for x in range(2):
        for z in range(2):
            assert optimal_estimate(model, x, z) == z


def test_uninformative_sensing_estimates_the_prior_mode():
    model = state_blind_model()
    for x in range(2):
        for z in range(2):
            assert optimal_estimate(model, x, z) == 0


def test_binary_sensing_estimator_table_matches_enumeration():
    # reliability 0.9 / 0.6 with uniform prior: the symmetric posterior
    # always favors the observed symbol
    model = binary_sensing_model(0.9, 0.6)
    joint = model.state_prior[None, :, None] * model.sensing_law
    expected = np.zeros((2, 2), dtype=int)
    for x in range(2):
        for z in range(2):
            risks = [joint[x, :, z] @ model.distortion[:, t] for t in range(2)]
            expected[x, z] = int(np.argmin(risks))
    assert np.array_equal(estimator_table(model), expected)
    assert np.array_equal(expected, [[0, 1], [0, 1]])


def test_zero_probability_observation_raises():
    model = FiniteCasModel(
        state_prior=[1.0, 0.0],
        sensing_law=[[[1.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]]],
        comm_law=bsc(0.1),
        distortion=HAMMING,
        cost=[0.0, 0.0],
    )
    with pytest.raises(ZeroProbabilityObservation):
        optimal_estimate(model, 0, 1)
    # the impossible cell contributes nothing to the cost
    assert estimate_cost(model, 0) == 0.0


def test_estimator_beats_every_deterministic_table(rng):
    for _ in range(25):
        model = random_finite_model(rng)
        joint = model.state_prior[None, :, None] * model.sensing_law
        loss = np.einsum("xsz,st->xzt", joint, model.distortion)
        ours = estimate_costs(model).mean()
        n_x, n_z, n_t = loss.shape
        best = min(
            sum(loss[x, z, tbl[x * n_z + z]] for x in range(n_x) for z in range(n_z))
            for tbl in itertools.product(range(n_t), repeat=n_x * n_z)
        ) / n_x
        assert abs(ours - best) < 1e-12


# ------------------------------------------------------------ estimate cost


def test_estimate_cost_examples():
    assert estimate_costs(noiseless_model()).max() == 0.0
    assert np.allclose(estimate_costs(state_blind_model()), 0.3)
    e = estimate_costs(binary_sensing_model(0.9, 0.6))
    assert np.allclose(e, [0.1, 0.4])


# --------------------------------------------------------------- capacity


def test_bsc_capacity_with_slack_constraints():
    model = binary_sensing_model(comm_eps=0.1)
    cap, px = constrained_capacity(model, d_s=10.0, budget=10.0)
    assert abs(cap - (np.log(2) - h2_nats(0.1))) < 1e-6
    assert np.allclose(px.probs, 0.5, atol=1e-4)


def test_infeasible_budget_raises():
    model = binary_sensing_model(cost=(0.5, 1.0))
    with pytest.raises(InfeasibleConstraint):
        constrained_capacity(model, d_s=1.0, budget=0.1)
    with pytest.raises(InfeasibleConstraint):
        constrained_capacity(model, d_s=0.05, budget=1.0)  # below min e(x)


def test_tight_distortion_pins_the_input_distribution():
    # e = (0.1, 0.4); at d_s = 0.1 only the point mass on input 0 is
    # feasible, so the capacity collapses to zero
    model = binary_sensing_model(0.9, 0.6)
    cap, px = constrained_capacity(model, d_s=0.1, budget=1.0)
    assert cap < 1e-6
    assert px.probs[0] > 1.0 - 1e-6

    # cross-check against a grid search over the constrained simplex
    best = 0.0
    for w in np.arange(0.0, 1.0 + 1e-12, 1e-3):
        p = np.array([w, 1.0 - w])
        if p @ estimate_costs(model) <= 0.1 + 1e-8:
            best = max(best, mutual_information(p, model.comm_law))
    assert cap >= best - 1e-6


def test_capacity_matches_simplex_grid_when_constraint_binds(rng):
    model = binary_sensing_model(0.9, 0.6, comm_eps=0.05)
    e = estimate_costs(model)
    for d_s in (0.15, 0.2, 0.3):
        cap, px = constrained_capacity(model, d_s, budget=1.0)
        assert px.probs @ e <= d_s + 1e-7
        # candidate grid plus the exact point where the constraint binds
        w_edge = (e[1] - d_s) / (e[1] - e[0])
        candidates = np.append(np.arange(0.0, 1.0 + 1e-12, 1e-4), np.clip(w_edge, 0, 1))
        best = 0.0
        for w in candidates:
            p = np.array([w, 1.0 - w])
            if p @ e <= d_s + 1e-12:
                best = max(best, mutual_information(p, model.comm_law))
        assert abs(cap - best) < 1e-6


def test_budget_constraint_binds(rng):
    model = binary_sensing_model(0.9, 0.6, cost=(1.0, 0.0))
    # cheap input is the bad sensor; a tight budget forces mass onto it
    cap_loose, _ = constrained_capacity(model, d_s=1.0, budget=1.0)
    cap_tight, px = constrained_capacity(model, d_s=1.0, budget=0.2)
    assert px.probs @ model.cost <= 0.2 + 1e-7
    assert cap_tight <= cap_loose + 1e-9


# ---------------------------------------------------------- rate-distortion


def test_bernoulli_rate_distortion_endpoints():
    src = np.array([0.5, 0.5])
    rate, cond = rate_distortion_discrete(src, HAMMING, 0.0)
    assert abs(rate - np.log(2)) < 1e-9
    assert np.allclose(cond, np.eye(2))
    rate, _ = rate_distortion_discrete(src, HAMMING, 0.5)
    assert rate == 0.0
    rate, _ = rate_distortion_discrete(src, HAMMING, 0.8)
    assert rate == 0.0


def test_bernoulli_rate_distortion_interior_point():
    rate, cond = rate_distortion_discrete(np.array([0.5, 0.5]), HAMMING, 0.11)
    assert abs(rate - (np.log(2) - h2_nats(0.11))) < 1e-6
    dist = 0.5 * cond[0, 1] + 0.5 * cond[1, 0]
    assert abs(dist - 0.11) < 1e-9


def test_unreachable_distortion_raises():
    with pytest.raises(UnreachableDistortion):
        rate_distortion_discrete(np.array([0.5, 0.5]), HAMMING, -0.01)
    dist = np.array([[0.2, 1.0], [1.0, 0.3]])
    with pytest.raises(UnreachableDistortion):
        rate_distortion_discrete(np.array([0.5, 0.5]), dist, 0.1)


def test_rate_distortion_inverse_round_trip(rng):
    for _ in range(10):
        n = int(rng.integers(2, 4))
        src = rng.gamma(1.0, 1.0, n) + 1e-3
        src /= src.sum()
        dist = rng.uniform(0.0, 1.0, (n, n))
        d_min = float(src @ dist.min(axis=1))
        d_zero = float((src @ dist).min())
        if d_zero - d_min < 3e-3:
            continue
        target = float(rng.uniform(d_min + 1e-3, d_zero - 1e-3))
        rate, _ = rate_distortion_discrete(src, dist, target)
        d_back, _ = rate_distortion_inverse(src, dist, rate)
        assert abs(d_back - target) < 1e-6


def test_rate_distortion_inverse_endpoints():
    src = np.array([0.5, 0.5])
    d_c, rate = rate_distortion_inverse(src, HAMMING, 0.0)
    assert d_c == 0.5 and rate == 0.0
    d_c, _ = rate_distortion_inverse(src, HAMMING, 10.0)
    assert d_c == 0.0


# ------------------------------------------------------- feasibility region


def test_feasible_when_rate_is_zero():
    model = binary_sensing_model(0.9, 0.6)
    res = theorem1_feasible(model, d_s=0.4, d_c=0.6, budget=1.0)
    assert res.feasible
    assert res.rate == 0.0
    assert abs(res.margin - res.capacity) < 1e-12


def test_noiseless_comm_channel_is_always_feasible():
    model = binary_sensing_model(0.9, 0.6, comm_eps=0.0)
    for d_c in (0.05, 0.2, 0.4):
        res = theorem1_feasible(model, d_s=0.4, d_c=d_c, budget=1.0)
        assert res.capacity <= np.log(2) + 1e-9
        assert res.feasible


def test_feasibility_boundary_crossing_in_d_c():
    model = binary_sensing_model(0.9, 0.6, comm_eps=0.1)
    margins = [
        theorem1_feasible(model, 0.25, d_c, 1.0).margin
        for d_c in np.linspace(0.02, 0.45, 12)
    ]
    assert margins[0] < 0 < margins[-1]
    assert all(b >= a - 1e-9 for a, b in zip(margins, margins[1:]))


# ------------------------------------------------------ total distortion


def test_perfect_chain_reaches_zero_distortion():
    model = noiseless_model()
    point = min_total_distortion(model, budget=1.0, grid=1e-2)
    assert point.d_total < 1e-9


def test_uninformative_sensing_reduces_to_rate_inversion():
    model = state_blind_model()
    point = min_total_distortion(model, budget=1.0, grid=1e-2)
    assert abs(point.d_s - 0.3) < 1e-12
    src = induced_estimate_marginal(model, np.array([0.5, 0.5]))
    cap, _ = constrained_capacity(model, 1.0, 1.0)
    d_c, _ = rate_distortion_inverse(src, model.distortion, cap)
    assert abs(point.d_c - d_c) < 1e-9


def test_reference_model_matches_brute_force():
    model = reference_2x2x2_model()
    budget = 0.6
    point = min_total_distortion(model, budget, grid=1e-3)
    e = estimate_costs(model)
    best = np.inf
    for w in np.arange(0.0, 1.0 + 1e-12, 1e-3):
        p = np.array([w, 1.0 - w])
        if p @ model.cost > budget + 1e-12:
            continue
        cap = mutual_information(p, model.comm_law)
        src = induced_estimate_marginal(model, p)
        d_c, _ = rate_distortion_inverse(src, model.distortion, cap)
        best = min(best, float(p @ e) + d_c)
    assert abs(point.d_total - best) < 1e-3
    assert abs(point.d_total - (point.d_s + point.d_c)) < 1e-9


# --------------------------------------------------------------- validation


def test_model_validation_rejects_bad_inputs():
    with pytest.raises(ValueError):
        FiniteCasModel(
            state_prior=[0.6, 0.6],
            sensing_law=[[[1.0, 0.0], [0.0, 1.0]]],
            comm_law=[[1.0]],
            distortion=HAMMING,
            cost=[0.0],
        )
    with pytest.raises(ValueError):
        FiniteCasModel(
            state_prior=[0.5, 0.5],
            sensing_law=[[[1.0, 0.0], [0.0, 1.0]]],
            comm_law=[[1.0]],
            distortion=[[0.0, -1.0], [1.0, 0.0]],
            cost=[0.0],
        )
    with pytest.raises(ValueError):
        rate_distortion_discrete(np.array([0.5, 0.5]), np.array([[0.0], [1.0], [2.0]]), 0.1)


def test_mutual_information_basics():
    assert mutual_information(np.array([0.5, 0.5]), np.eye(2)) == pytest.approx(np.log(2))
    flat = np.full((2, 2), 0.5)
    assert mutual_information(np.array([0.3, 0.7]), flat) == pytest.approx(0.0, abs=1e-12)

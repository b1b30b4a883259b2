"""Finite-alphabet limits of the communication-assisted sensing chain.

Implements the optimal per-symbol estimator, the estimate-cost function,
the capacity constrained by estimation distortion and resource cost, the
discrete rate-distortion function, the feasibility test coupling the two,
and the total-distortion minimizer. All rates are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import (
    InfeasibleConstraint,
    UnreachableDistortion,
    ZeroProbabilityObservation,
)
from .kernels import ba_capacity, ba_rate_distortion
from .types import TradeoffPoint

SIMPLEX_TOL = 1e-12
BA_TOL = 1e-12          # certified bound gap per Blahut-Arimoto run, nats
BA_MAX_ITER = 100_000
SLACK_TOL = 1e-8        # multiplier bisection stops at this constraint slack
_MU_CAP = 1e12          # multiplier doubling safety cap


def _check_prob(vec: np.ndarray, name: str) -> None:
    if np.any(vec < -SIMPLEX_TOL):
        raise ValueError(f"{name}: negative probability entry")
    if abs(vec.sum() - 1.0) > 1e-9 * max(1, vec.size):
        raise ValueError(f"{name}: entries sum to {vec.sum()!r}, expected 1")


@dataclass(frozen=True)
class FiniteCasModel:
    """A finite-alphabet CAS instance.

    Fields
    ------
    state_prior : (S,) prior over target states.
    sensing_law : (X, S, Z) conditional law of the sensing observation.
    comm_law : (X, Y) conditional law of the communication channel.
    distortion : (S, S~) nonnegative distortion matrix. The estimate
        alphabet doubles as the reconstruction alphabet by default.
    cost : (X,) nonnegative per-symbol resource cost.
    """

    state_prior: np.ndarray
    sensing_law: np.ndarray
    comm_law: np.ndarray
    distortion: np.ndarray
    cost: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "state_prior", np.asarray(self.state_prior, dtype=np.float64))
        object.__setattr__(self, "sensing_law", np.asarray(self.sensing_law, dtype=np.float64))
        object.__setattr__(self, "comm_law", np.asarray(self.comm_law, dtype=np.float64))
        object.__setattr__(self, "distortion", np.asarray(self.distortion, dtype=np.float64))
        object.__setattr__(self, "cost", np.asarray(self.cost, dtype=np.float64))

        if self.state_prior.ndim != 1 or self.state_prior.size < 1:
            raise ValueError("state_prior: expected a nonempty vector")
        _check_prob(self.state_prior, "state_prior")
        if self.sensing_law.ndim != 3:
            raise ValueError("sensing_law: expected a [x][s][z] tensor")
        n_x, n_s, _ = self.sensing_law.shape
        if n_s != self.state_prior.size:
            raise ValueError("sensing_law: state axis does not match state_prior")
        for x in range(n_x):
            for s in range(n_s):
                _check_prob(self.sensing_law[x, s], f"sensing_law[{x}][{s}]")
        if self.comm_law.ndim != 2 or self.comm_law.shape[0] != n_x:
            raise ValueError("comm_law: expected an [x][y] matrix matching sensing_law inputs")
        for x in range(n_x):
            _check_prob(self.comm_law[x], f"comm_law[{x}]")
        if self.distortion.ndim != 2 or self.distortion.shape[0] != n_s:
            raise ValueError("distortion: expected an [s][s'] matrix over states x estimates")
        if not np.all(np.isfinite(self.distortion)) or np.any(self.distortion < 0):
            raise ValueError("distortion: entries must be finite and nonnegative")
        if self.cost.ndim != 1 or self.cost.shape[0] != n_x:
            raise ValueError("cost: expected one entry per channel input")
        if not np.all(np.isfinite(self.cost)) or np.any(self.cost < 0):
            raise ValueError("cost: entries must be finite and nonnegative")

    @property
    def n_states(self) -> int:
        return self.state_prior.size

    @property
    def n_inputs(self) -> int:
        return self.sensing_law.shape[0]

    @property
    def n_observations(self) -> int:
        return self.sensing_law.shape[2]

    @property
    def n_outputs(self) -> int:
        return self.comm_law.shape[1]

    @property
    def n_estimates(self) -> int:
        return self.distortion.shape[1]


@dataclass(frozen=True)
class InputDistribution:
    """A channel-input distribution on the simplex."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=np.float64))
        if self.probs.ndim != 1:
            raise ValueError("probs: expected a vector")
        _check_prob(self.probs, "probs")


@dataclass(frozen=True)
class Theorem1Result:
    feasible: bool
    margin: float
    capacity: float
    rate: float


def _posterior_tables(model: FiniteCasModel):
    """Joint mass, observation marginal, posterior losses and argmin table.

    loss[x, z, s'] is the unnormalized posterior expected distortion of
    estimating s' after seeing (x, z); ties in the argmin break to the
    lowest index (np.argmin).
    """
    joint = model.state_prior[None, :, None] * model.sensing_law   # (X, S, Z)
    pz = joint.sum(axis=1)                                         # (X, Z)
    loss = np.einsum("xsz,st->xzt", joint, model.distortion)       # (X, Z, S~)
    table = np.argmin(loss, axis=2)
    return joint, pz, loss, table


def estimator_table(model: FiniteCasModel) -> np.ndarray:
    """Optimal deterministic estimator indexed [x][z].

    Zero-probability (x, z) pairs map to index 0; their value never enters
    any expectation.
    """
    _, _, _, table = _posterior_tables(model)
    return table


def optimal_estimate(model: FiniteCasModel, x: int, z: int) -> int:
    """Posterior-risk-minimizing estimate for channel input x, observation z."""
    _, pz, loss, table = _posterior_tables(model)
    if pz[x, z] <= 0.0:
        raise ZeroProbabilityObservation(f"observation z={z} has zero probability under x={x}")
    return int(table[x, z])


def estimate_costs(model: FiniteCasModel) -> np.ndarray:
    """e(x) for every input: expected distortion of the optimal estimator."""
    _, _, loss, table = _posterior_tables(model)
    return np.take_along_axis(loss, table[:, :, None], axis=2)[:, :, 0].sum(axis=1)


def estimate_cost(model: FiniteCasModel, x: int) -> float:
    """e(x) for a single input symbol."""
    return float(estimate_costs(model)[x])


def induced_estimate_marginal(model: FiniteCasModel, p_x: np.ndarray) -> np.ndarray:
    """Marginal of the optimal estimate when inputs are drawn from p_x."""
    p_x = np.asarray(p_x, dtype=np.float64)
    _, pz, _, table = _posterior_tables(model)
    marginal = np.zeros(model.n_estimates)
    weights = p_x[:, None] * pz
    np.add.at(marginal, table.ravel(), weights.ravel())
    # zero-probability cells carry zero weight, so the index-0 default is inert
    total = marginal.sum()
    if total > 0:
        marginal /= total
    return marginal


def mutual_information(p_x: np.ndarray, channel: np.ndarray) -> float:
    """I(X;Y) in nats for input law p_x and channel[x, y]."""
    p_x = np.asarray(p_x, dtype=np.float64)
    channel = np.asarray(channel, dtype=np.float64)
    p_y = p_x @ channel
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(channel > 0, np.log(channel) - np.log(p_y[None, :] + 1e-300), 0.0)
    return float(max(0.0, np.einsum("x,xy,xy->", p_x, channel, ratio)))


def _check_intersection(e: np.ndarray, b: np.ndarray, d_s: float, budget: float) -> None:
    """LP feasibility of {p on simplex : E[e] <= d_s, E[b] <= budget}."""
    res = linprog(
        c=np.zeros_like(e),
        A_ub=np.vstack([e, b]),
        b_ub=np.array([d_s + SLACK_TOL, budget + SLACK_TOL]),
        A_eq=np.ones((1, e.size)),
        b_eq=np.array([1.0]),
        bounds=(0.0, 1.0),
        method="highs",
    )
    if res.status != 0:
        raise InfeasibleConstraint(
            f"no input distribution satisfies E[e] <= {d_s} and E[b] <= {budget}"
        )


def constrained_capacity(
    model: FiniteCasModel, d_s: float, budget: float
) -> tuple[float, InputDistribution]:
    """Capacity under the estimation-distortion and resource-cost constraints.

    Maximizes I(X;Y) over the simplex intersected with E[e(X)] <= d_s and
    E[b(X)] <= budget. Solved by penalized Blahut-Arimoto with one Lagrange
    multiplier per constraint, each driven by bisection until the active
    constraint slack is below SLACK_TOL.
    """
    e = estimate_costs(model)
    b = model.cost
    w = model.comm_law
    if d_s < e.min() - SLACK_TOL or budget < b.min() - SLACK_TOL:
        raise InfeasibleConstraint(
            f"d_s={d_s} below min estimate-cost {e.min()} or budget={budget} "
            f"below min resource cost {b.min()}"
        )
    _check_intersection(e, b, d_s, budget)

    def solve(mu_e: float, mu_b: float) -> np.ndarray:
        p, _ = ba_capacity(w, mu_e * e + mu_b * b, BA_TOL, BA_MAX_ITER)
        return p

    def budget_adjusted(mu_e: float) -> np.ndarray:
        """Smallest budget multiplier meeting E[b] <= budget at this mu_e."""
        p = solve(mu_e, 0.0)
        if p @ b <= budget + SLACK_TOL:
            return p
        lo, hi = 0.0, 1.0
        while solve(mu_e, hi) @ b > budget and hi < _MU_CAP:
            lo, hi = hi, 2.0 * hi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            p = solve(mu_e, mid)
            slack = p @ b - budget
            if abs(slack) < SLACK_TOL:
                return p
            if slack > 0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15 * max(1.0, hi):
                break
        return solve(mu_e, hi)

    p = budget_adjusted(0.0)
    if p @ e > d_s + SLACK_TOL:
        lo, hi = 0.0, 1.0
        while budget_adjusted(hi) @ e > d_s and hi < _MU_CAP:
            lo, hi = hi, 2.0 * hi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            p = budget_adjusted(mid)
            slack = p @ e - d_s
            if abs(slack) < SLACK_TOL:
                break
            if slack > 0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15 * max(1.0, hi):
                break
        else:
            p = budget_adjusted(hi)
        if p @ e > d_s + SLACK_TOL:
            p = budget_adjusted(hi)
    return mutual_information(p, w), InputDistribution(p)


def _min_row_distortion(source: np.ndarray, distortion: np.ndarray) -> float:
    return float(source @ distortion.min(axis=1))


def _deterministic_channel(source: np.ndarray, distortion: np.ndarray):
    """Lowest-index argmin test channel and its rate (the d_min endpoint)."""
    m, n = distortion.shape
    idx = distortion.argmin(axis=1)
    cond = np.zeros((m, n))
    cond[np.arange(m), idx] = 1.0
    q = source @ cond
    active = q > 0
    rate = float(-(q[active] @ np.log(q[active])))
    return cond, rate


def rate_distortion_discrete(
    source: np.ndarray, distortion: np.ndarray, d_c: float
) -> tuple[float, np.ndarray]:
    """Discrete rate-distortion function R(d_c) in nats.

    Returns the minimum mutual information and an achieving test channel
    P(reconstruction | source symbol). Solved by Blahut-Arimoto with
    bisection on the slope parameter, plus a tangent correction so the
    returned rate sits on the curve at exactly d_c.
    """
    source = np.asarray(source, dtype=np.float64)
    distortion = np.asarray(distortion, dtype=np.float64)
    _check_prob(source, "source")
    if source.size != distortion.shape[0]:
        raise ValueError("distortion rows must match the source alphabet")
    if np.any(distortion < 0) or not np.all(np.isfinite(distortion)):
        raise ValueError("distortion: entries must be finite and nonnegative")
    if d_c < 0:
        raise UnreachableDistortion(f"d_c={d_c} is negative")

    d_min = _min_row_distortion(source, distortion)
    if d_c < d_min - 1e-12:
        raise UnreachableDistortion(f"d_c={d_c} below minimum achievable distortion {d_min}")

    col_avg = source @ distortion
    j0 = int(col_avg.argmin())
    if d_c >= col_avg[j0] - 1e-12:
        cond = np.zeros_like(distortion)
        cond[:, j0] = 1.0
        return 0.0, cond

    if d_c <= d_min + 1e-12:
        cond, rate = _deterministic_channel(source, distortion)
        return rate, cond

    lo, hi = 0.0, 1.0
    dist = ba_rate_distortion(source, distortion, hi, 1e-13, BA_MAX_ITER)[2]
    while dist > d_c and hi < 1e8:
        lo, hi = hi, 2.0 * hi
        dist = ba_rate_distortion(source, distortion, hi, 1e-13, BA_MAX_ITER)[2]
    cond, rate, dist = None, 0.0, 0.0
    beta = hi
    for _ in range(200):
        beta = 0.5 * (lo + hi)
        cond, rate, dist, _ = ba_rate_distortion(source, distortion, beta, 1e-13, BA_MAX_ITER)
        if abs(dist - d_c) < 1e-11:
            break
        if dist > d_c:
            lo = beta
        else:
            hi = beta
        if hi - lo < 1e-15 * max(1.0, hi):
            break
    # slope of R(D) is -beta: shift the rate onto the curve at d_c
    rate = max(0.0, rate + beta * (dist - d_c))
    return rate, cond


def rate_distortion_inverse(
    source: np.ndarray, distortion: np.ndarray, rate: float
) -> tuple[float, float]:
    """Smallest d_c with R(d_c) <= rate. Returns (d_c, rate_used).

    Inverts the rate-distortion curve by bisection on the slope parameter
    (the curve is traversed monotonically in the slope), which avoids the
    cost of re-solving R(D) per candidate d_c.
    """
    source = np.asarray(source, dtype=np.float64)
    distortion = np.asarray(distortion, dtype=np.float64)
    col_avg = source @ distortion
    d_zero = float(col_avg.min())
    if rate <= 0.0:
        return d_zero, 0.0
    d_min = _min_row_distortion(source, distortion)
    _, rate_max = _deterministic_channel(source, distortion)
    if rate >= rate_max - 1e-12:
        return d_min, rate_max

    lo, hi = 0.0, 1.0
    r = ba_rate_distortion(source, distortion, hi, 1e-13, BA_MAX_ITER)[1]
    while r < rate and hi < 1e8:
        lo, hi = hi, 2.0 * hi
        r = ba_rate_distortion(source, distortion, hi, 1e-13, BA_MAX_ITER)[1]
    beta, r, dist = hi, 0.0, d_zero
    for _ in range(200):
        beta = 0.5 * (lo + hi)
        _, r, dist, _ = ba_rate_distortion(source, distortion, beta, 1e-13, BA_MAX_ITER)
        if abs(r - rate) < 1e-10:
            break
        if r < rate:
            lo = beta
        else:
            hi = beta
        if hi - lo < 1e-15 * max(1.0, hi):
            break
    # move along the tangent (slope dR/dD = -beta) to hit the requested rate
    d_c = max(d_min, dist + (r - rate) / beta)
    return float(d_c), rate


def theorem1_feasible(
    model: FiniteCasModel,
    d_s: float,
    d_c: float,
    budget: float,
    comm_distortion: np.ndarray | None = None,
) -> Theorem1Result:
    """Check whether (d_s, d_c, budget) is an achievable operating point.

    Computes the constrained capacity, induces the estimate marginal from
    the capacity-achieving input law, and compares against the source rate
    needed at d_c. ``comm_distortion`` defaults to the model's distortion
    matrix (the estimate alphabet doubles as the reconstruction alphabet).
    """
    if comm_distortion is None:
        comm_distortion = model.distortion
        if comm_distortion.shape[0] != comm_distortion.shape[1]:
            raise ValueError(
                "model distortion is not square; pass comm_distortion explicitly"
            )
    capacity, px = constrained_capacity(model, d_s, budget)
    source = induced_estimate_marginal(model, px.probs)
    rate, _ = rate_distortion_discrete(source, comm_distortion, d_c)
    margin = capacity - rate
    return Theorem1Result(feasible=margin >= 0.0, margin=margin, capacity=capacity, rate=rate)


def min_total_distortion(
    model: FiniteCasModel,
    budget: float,
    grid: float = 1e-3,
    comm_distortion: np.ndarray | None = None,
) -> TradeoffPoint:
    """Minimize D_s + D_c over the sensing-distortion split at fixed budget.

    Sweeps the estimation-distortion bound over [min e, max e] at the given
    resolution; at each bound the communication distortion is the inverse
    rate-distortion evaluated at the constrained capacity. Deterministic
    for a fixed grid.
    """
    if comm_distortion is None:
        comm_distortion = model.distortion
        if comm_distortion.shape[0] != comm_distortion.shape[1]:
            raise ValueError(
                "model distortion is not square; pass comm_distortion explicitly"
            )
    e = estimate_costs(model)
    lo, hi = float(e.min()), float(e.max())
    if budget < model.cost.min() - SLACK_TOL:
        raise InfeasibleConstraint(f"budget={budget} below min resource cost {model.cost.min()}")
    if hi - lo < grid:
        ds_values = np.array([hi])
    else:
        ds_values = np.linspace(lo, hi, int(math.ceil((hi - lo) / grid)) + 1)

    best: TradeoffPoint | None = None
    for d_s in ds_values:
        try:
            capacity, px = constrained_capacity(model, float(d_s), budget)
        except InfeasibleConstraint:
            continue
        source = induced_estimate_marginal(model, px.probs)
        d_c, rate_used = rate_distortion_inverse(source, comm_distortion, capacity)
        d_s_achieved = float(px.probs @ e)
        point = TradeoffPoint(
            d_s=d_s_achieved,
            d_c=d_c,
            d_total=d_s_achieved + d_c,
            rate=min(rate_used, capacity) if rate_used > 0 else 0.0,
            capacity=capacity,
            budget=float(px.probs @ model.cost),
        )
        if best is None or point.d_total < best.d_total:
            best = point
    if best is None:
        raise InfeasibleConstraint("no feasible point on the sweep grid")
    return best

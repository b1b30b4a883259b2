"""Closed-form quantities for the Gaussian target-response-matrix example.

Covers the sensing MSE, the per-block MMSE filter, the estimate covariance
spectrum, the Gaussian rate-distortion allocation (reverse water-filling),
and the communication mutual information. All rates in nats.

Snapshot convention: the analytic sensing MSE carries a T/sigma^2 factor on
the Gram matrix. The observation model that reproduces it uses the
sqrt(T)-scaled waveform ("T effective snapshots"); ``estimate_covariance``
applies that scaling internally so the trace identity
M_s Tr(Sigma_s) = D_s + M_s Tr(R_block) holds, while ``mmse_filter`` is the
raw per-block filter for whatever waveform it is handed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularPrior

HERM_TOL = 1e-10
EIG_FLOOR = -1e-12
RANK_RTOL = 1e-12       # eigenvalues below this fraction of the max are zero modes
RWF_RATE_TOL = 1e-10


def _as_complex(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.complex128)


def _check_hermitian(a: np.ndarray, name: str, tol: float = HERM_TOL) -> np.ndarray:
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.conj().T).max(initial=0.0) > tol * scale:
        raise ValueError(f"{name}: matrix is not Hermitian within {tol}")
    return 0.5 * (a + a.conj().T)


def _clip_psd(a: np.ndarray, name: str) -> np.ndarray:
    vals, vecs = np.linalg.eigh(a)
    scale = max(1.0, float(vals.max(initial=0.0)))
    if vals.min(initial=0.0) < -1e-8 * scale:
        raise ValueError(f"{name}: matrix has significantly negative eigenvalues")
    if vals.min(initial=0.0) < 0.0:
        vals = np.maximum(vals, 0.0)
        a = (vecs * vals) @ vecs.conj().T
    return a


@dataclass(frozen=True)
class TrmModel:
    """Gaussian TRM sensing/communication instance.

    sigma_s : (N, N) Hermitian PSD covariance of each column of the TRM.
    h_c : (M_c, N) communication channel matrix.
    noise_s, noise_c : per-entry noise powers (> 0).
    t : number of transmit symbols (T >= N).
    m_s : number of sensing receive antennas.
    power : total power budget P_T; the Gram trace is capped at T * P_T.
    """

    sigma_s: np.ndarray
    h_c: np.ndarray
    noise_s: float
    noise_c: float
    t: int
    m_s: int
    power: float

    def __post_init__(self):
        sigma = _check_hermitian(_as_complex(self.sigma_s), "sigma_s")
        sigma = _clip_psd(sigma, "sigma_s")
        object.__setattr__(self, "sigma_s", sigma)
        object.__setattr__(self, "h_c", _as_complex(self.h_c))
        if self.sigma_s.ndim != 2 or self.sigma_s.shape[0] != self.sigma_s.shape[1]:
            raise ValueError("sigma_s: expected a square matrix")
        if self.h_c.ndim != 2 or self.h_c.shape[1] != self.sigma_s.shape[0]:
            raise ValueError("h_c: column count must match sigma_s dimension")
        if self.noise_s <= 0 or self.noise_c <= 0:
            raise ValueError("noise powers must be positive")
        if self.t < self.sigma_s.shape[0]:
            raise ValueError("t must be at least the number of transmit antennas")
        if self.m_s < 1:
            raise ValueError("m_s must be at least 1")
        if self.power <= 0:
            raise ValueError("power budget must be positive")

    @property
    def n(self) -> int:
        return self.sigma_s.shape[0]

    @property
    def m_c(self) -> int:
        return self.h_c.shape[0]

    @property
    def trace_budget(self) -> float:
        return self.t * self.power


@dataclass(frozen=True)
class GramMatrix:
    """Transmit Gram Q = X X^H, the optimization variable for the waveform."""

    q: np.ndarray
    trace_limit: float | None = None

    def __post_init__(self):
        q = _check_hermitian(_as_complex(self.q), "q")
        q = _clip_psd(q, "q")
        object.__setattr__(self, "q", q)
        if self.trace_limit is not None:
            tr = float(np.real(np.trace(self.q)))
            if tr > self.trace_limit + 1e-9:
                raise ValueError(f"q: trace {tr} exceeds limit {self.trace_limit}")

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.q)))


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of the estimate covariance, multiplicity-expanded, descending."""

    eigenvalues: np.ndarray
    xi: float | None = None

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=np.float64)
        if np.any(vals < -1e-12):
            raise ValueError("eigenvalues must be nonnegative")
        vals = np.maximum(vals, 0.0)
        if np.any(np.diff(vals) > 1e-12):
            vals = np.sort(vals)[::-1]
        object.__setattr__(self, "eigenvalues", vals)
        if self.xi is not None and self.xi < 0:
            raise ValueError("xi must be nonnegative")


@dataclass(frozen=True)
class RwfResult:
    """Reverse water-filling allocation for a Gaussian source spectrum."""

    xi: float
    d_c: float
    allocations: np.ndarray
    rate: float


def _gram_array(q) -> np.ndarray:
    return q.q if isinstance(q, GramMatrix) else _as_complex(q)


def sensing_mse(model: TrmModel, q) -> float:
    """MSE of the MMSE estimate of the vectorized TRM for Gram matrix q.

    Uses the inverse-free form M_s Tr[Sigma (scale Q Sigma + I)^-1] with
    scale = T / sigma_s^2, valid for rank-deficient priors as well; agrees
    with the direct prior-inverse form whenever that one is defined.
    """
    qa = _gram_array(q)
    scale = model.t / model.noise_s
    n = model.n
    inner = np.linalg.solve((scale * qa @ model.sigma_s + np.eye(n)).T, model.sigma_s.T).T
    return float(model.m_s * np.real(np.trace(inner)))


def sensing_mse_direct(model: TrmModel, q) -> float:
    """Printed-form sensing MSE M_s Tr[(scale Q + Sigma^-1)^-1].

    Raises SingularPrior when the prior covariance is rank-deficient; kept
    alongside the inverse-free form as a cross-check.
    """
    qa = _gram_array(q)
    vals = np.linalg.eigvalsh(model.sigma_s)
    if vals.min() <= RANK_RTOL * max(vals.max(), 1e-300):
        raise SingularPrior("sigma_s is rank-deficient; use sensing_mse instead")
    scale = model.t / model.noise_s
    inv_sigma = np.linalg.inv(model.sigma_s)
    return float(model.m_s * np.real(np.trace(np.linalg.inv(scale * qa + inv_sigma))))


def mmse_filter(model: TrmModel, x: np.ndarray) -> np.ndarray:
    """Per-block MMSE filter W = Sigma_s X R_z^-1 for waveform X (N x T).

    Applying I_{M_s} (x) W to the vectorized observation yields the MMSE
    estimate of the vectorized TRM.
    """
    x = _as_complex(x)
    r_z = x.conj().T @ model.sigma_s @ x + model.noise_s * np.eye(x.shape[1])
    return np.linalg.solve(r_z.conj().T, (model.sigma_s @ x).conj().T).conj().T


def _block_covariance_from_waveform(model: TrmModel, x: np.ndarray) -> np.ndarray:
    """Per-block covariance of the MMSE estimate, snapshot-scaled."""
    x_eff = np.sqrt(model.t) * _as_complex(x)
    w = mmse_filter(model, x_eff)
    block = model.sigma_s @ x_eff @ w.conj().T
    return 0.5 * (block + block.conj().T)


def _block_covariance_from_gram(model: TrmModel, q) -> np.ndarray:
    """Per-block estimate covariance Sigma - (scale Q + Sigma^-1)^-1 from Q."""
    qa = _gram_array(q)
    scale = model.t / model.noise_s
    n = model.n
    inner = np.linalg.solve((scale * qa @ model.sigma_s + np.eye(n)).T, model.sigma_s.T).T
    block = model.sigma_s - inner
    return 0.5 * (block + block.conj().T)


def _expanded_spectrum(model: TrmModel, block: np.ndarray) -> Spectrum:
    vals = np.linalg.eigvalsh(block)[::-1]
    vals = np.maximum(vals, 0.0)
    return Spectrum(np.repeat(vals, model.m_s))


def estimate_covariance(model: TrmModel, x: np.ndarray) -> Spectrum:
    """Spectrum of the estimate covariance for waveform x (N x T).

    Each per-block eigenvalue is repeated M_s times (Kronecker structure of
    the full covariance).
    """
    return _expanded_spectrum(model, _block_covariance_from_waveform(model, x))


def gram_spectrum(model: TrmModel, q) -> Spectrum:
    """Estimate-covariance spectrum computed directly from the Gram matrix."""
    return _expanded_spectrum(model, _block_covariance_from_gram(model, q))


def reverse_waterfill(spectrum, rate_budget: float) -> RwfResult:
    """Distortion-minimizing rate allocation over Gaussian source modes.

    Finds the water level xi such that sum_i log(lambda_i / min(lambda_i, xi))
    equals the rate budget, by bisection to RWF_RATE_TOL on the rate. Modes
    below RANK_RTOL of the largest eigenvalue carry no rate and no distortion.
    """
    if isinstance(spectrum, Spectrum):
        lam = spectrum.eigenvalues
    else:
        lam = np.sort(np.asarray(spectrum, dtype=np.float64))[::-1]
    if rate_budget < 0:
        raise ValueError("rate_budget must be nonnegative")
    if lam.size == 0 or lam.max(initial=0.0) <= 0.0:
        return RwfResult(xi=0.0, d_c=0.0, allocations=np.zeros(lam.size), rate=0.0)
    lam_max = float(lam.max())
    live = lam > RANK_RTOL * lam_max
    lam_live = lam[live]

    def rate_at(xi: float) -> float:
        return float(np.sum(np.maximum(0.0, np.log(lam_live / xi))))

    if rate_budget == 0.0:
        xi = lam_max
    else:
        lo = lam_max * np.exp(-rate_budget)   # rate(lo) >= budget
        hi = lam_max
        xi = hi
        for _ in range(200):
            xi = 0.5 * (lo + hi)
            r = rate_at(xi)
            if abs(r - rate_budget) < RWF_RATE_TOL:
                break
            if r > rate_budget:
                lo = xi
            else:
                hi = xi
            if hi - lo < 1e-18 * lam_max:
                break
    allocations = np.where(live, np.minimum(lam, xi), 0.0)
    return RwfResult(
        xi=float(xi),
        d_c=float(allocations.sum()),
        allocations=allocations,
        rate=rate_at(xi),
    )


def channel_mi(model: TrmModel, q) -> float:
    """Gaussian-input mutual information log det((T/sigma_c^2) H Q H^H + I).

    The identity has the receive dimension M_c (the dimensionally
    consistent choice).
    """
    qa = _gram_array(q)
    a = (model.t / model.noise_c) * model.h_c @ qa @ model.h_c.conj().T + np.eye(model.m_c)
    a = 0.5 * (a + a.conj().T)
    sign, logdet = np.linalg.slogdet(a)
    if sign.real <= 0:
        return 0.0
    return float(max(0.0, logdet))


def random_trm_model(
    seed: int,
    n: int = 4,
    m_s: int = 4,
    m_c: int = 4,
    t: int = 16,
    power: float = 1.0,
    noise_s: float = 1.0,
    noise_c: float = 1.0,
) -> TrmModel:
    """Seeded random model: Wishart prior (trace N) and i.i.d. CN(0,1) channel."""
    rng = np.random.default_rng(seed)
    a = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
    sigma = a @ a.conj().T
    sigma *= n / np.real(np.trace(sigma))
    h_c = (rng.standard_normal((m_c, n)) + 1j * rng.standard_normal((m_c, n))) / np.sqrt(2)
    return TrmModel(
        sigma_s=sigma, h_c=h_c, noise_s=noise_s, noise_c=noise_c, t=t, m_s=m_s, power=power
    )


def waveform_from_gram(model: TrmModel, q) -> np.ndarray:
    """Any N x T waveform whose Gram is q: the PSD square root padded with zeros."""
    qa = _gram_array(q)
    vals, vecs = np.linalg.eigh(qa)
    vals = np.maximum(vals, 0.0)
    root = (vecs * np.sqrt(vals)) @ vecs.conj().T
    x = np.zeros((model.n, model.t), dtype=np.complex128)
    x[:, : model.n] = root
    return x

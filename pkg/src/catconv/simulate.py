"""Seedable generators for DAR(1), NDARMA(p, q) and first-order Markov chains.

Randomness comes from counter-based Philox streams keyed by
``(seed, stream_index)``, so any replicate can be regenerated on its own
regardless of how work was split across workers.  Categories are drawn by
inverse CDF over the stored category order, which makes every path a
deterministic function of the uniforms pulled from its stream.

The ``*_paths`` functions are vectorised over leading axes of the uniform
arrays; the bootstrap engine uses them to simulate many replicates at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

__all__ = [
    "RngStream",
    "derive_stream",
    "Dar1Params",
    "NdarmaParams",
    "MarkovParams",
    "simulate_dar1",
    "simulate_ndarma",
    "simulate_markov",
    "dar1_paths",
    "markov_paths",
    "categorical_codes",
]

_MASK64 = (1 << 64) - 1
_PROB_TOL = 1e-12


@dataclass(frozen=True)
class RngStream:
    """Identifies one independent random stream."""

    seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        key = (self.stream_index & _MASK64) << 64 | (self.seed & _MASK64)
        return np.random.Generator(np.random.Philox(key=key))


def derive_stream(seed: int, index: int) -> RngStream:
    if index < 0:
        raise ValueError("stream index must be nonnegative")
    return RngStream(int(seed) & _MASK64, int(index))


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


def _check_probs(p, name="p") -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError(f"{name} must be a nonempty probability vector")
    if np.any(p < 0) or abs(p.sum() - 1.0) > _PROB_TOL:
        raise ValueError(f"{name} must be nonnegative and sum to 1")
    return p


def _cdf(p: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(p, axis=-1)
    cdf[..., -1] = 1.0
    return cdf


def categorical_codes(u: np.ndarray, cdf: np.ndarray) -> np.ndarray:
    """Inverse-CDF category codes for uniforms ``u`` under one CDF."""
    return np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)


@dataclass(frozen=True)
class Dar1Params:
    p: np.ndarray
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "p", _check_probs(self.p))
        if not 0.0 <= self.phi < 1.0:
            raise ValueError("phi must lie in [0, 1)")

    @property
    def r(self) -> int:
        return self.p.size


@dataclass(frozen=True)
class NdarmaParams:
    """NDARMA(p, q): ``phi_weights`` select past values, ``varphi_weights`` innovations."""

    p: np.ndarray
    phi_weights: tuple
    varphi_weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "p", _check_probs(self.p))
        phi = tuple(float(w) for w in self.phi_weights)
        varphi = tuple(float(w) for w in self.varphi_weights)
        object.__setattr__(self, "phi_weights", phi)
        object.__setattr__(self, "varphi_weights", varphi)
        if not varphi:
            raise ValueError("at least the lag-0 innovation weight is required")
        weights = np.array(phi + varphi)
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > _PROB_TOL:
            raise ValueError("selection weights must be nonnegative and sum to 1")
        if varphi[-1] <= 0:
            raise ValueError("the highest-lag innovation weight must be positive")
        if phi and varphi[0] <= 0:
            raise ValueError("the lag-0 innovation weight must be positive when p >= 1")

    @property
    def order(self) -> tuple:
        return len(self.phi_weights), len(self.varphi_weights) - 1


@dataclass(frozen=True)
class MarkovParams:
    transition: np.ndarray
    initial: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.transition, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValueError("transition matrix must be square")
        if np.any(t < 0) or np.any(np.abs(t.sum(axis=1) - 1.0) > _PROB_TOL):
            raise ValueError("transition rows must be nonnegative and sum to 1")
        init = _check_probs(self.initial, "initial")
        if init.size != t.shape[0]:
            raise ValueError("initial distribution size must match the transition matrix")
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "initial", init)


@numba.njit(cache=True)
def _inverse_cdf(u, cdf):
    r = cdf.shape[0]
    k = 0
    while k < r - 1 and cdf[k] <= u:
        k += 1
    return k


@numba.njit(cache=True)
def _dar1_kernel(u_copy, u_cat, cdf, phi):
    m, n = u_cat.shape
    x = np.empty((m, n), dtype=np.int64)
    for i in range(m):
        x[i, 0] = _inverse_cdf(u_cat[i, 0], cdf)
        for t in range(1, n):
            if u_copy[i, t] < phi:
                x[i, t] = x[i, t - 1]
            else:
                x[i, t] = _inverse_cdf(u_cat[i, t], cdf)
    return x


@numba.njit(cache=True)
def _markov_kernel(u, initial_cdf, transition_cdf, which):
    m, n = u.shape
    x = np.empty((m, n), dtype=np.int64)
    for i in range(m):
        x[i, 0] = _inverse_cdf(u[i, 0], initial_cdf[i])
        tc = transition_cdf[which[i]]
        for t in range(1, n):
            x[i, t] = _inverse_cdf(u[i, t], tc[x[i, t - 1]])
    return x


def dar1_paths(u_copy: np.ndarray, u_cat: np.ndarray, cdf: np.ndarray, phi: float) -> np.ndarray:
    """DAR(1) paths from uniforms shaped ``(..., n)``.

    At each step after the first the previous value is kept when
    ``u_copy < phi``; otherwise a fresh category is drawn from ``u_cat``.
    """
    shape = u_cat.shape
    n = shape[-1]
    x = _dar1_kernel(
        np.ascontiguousarray(u_copy, dtype=float).reshape(-1, n),
        np.ascontiguousarray(u_cat, dtype=float).reshape(-1, n),
        np.ascontiguousarray(cdf, dtype=float),
        float(phi),
    )
    return x.reshape(shape)


def markov_paths(u: np.ndarray, initial_cdf: np.ndarray, transition_cdf: np.ndarray) -> np.ndarray:
    """Markov chain paths from uniforms of shape ``(m, n)``; one chain per row.

    CDFs may be shared (``(r,)`` and ``(r, r)``) or given per row
    (``(m, r)`` and ``(m, r, r)``).
    """
    m, n = u.shape
    r = initial_cdf.shape[-1]
    initial_cdf = np.ascontiguousarray(np.broadcast_to(initial_cdf, (m, r)), dtype=float)
    transition_cdf = np.asarray(transition_cdf, dtype=float)
    if transition_cdf.ndim == 2:
        transition_cdf = transition_cdf[None]
        which = np.zeros(m, dtype=np.int64)
    else:
        which = np.arange(m, dtype=np.int64)
    return _markov_kernel(np.ascontiguousarray(u, dtype=float), initial_cdf, np.ascontiguousarray(transition_cdf), which)


def simulate_dar1(params: Dar1Params, length: int, rng) -> np.ndarray:
    if length < 1:
        raise ValueError("length must be at least 1")
    u = _generator(rng).random((2, length))
    return dar1_paths(u[0], u[1], _cdf(params.p), params.phi)


def simulate_ndarma(params: NdarmaParams, length: int, rng) -> np.ndarray:
    """NDARMA(p, q) path; the first ``max(p, q)`` values are i.i.d. draws from ``p``."""
    if length < 1:
        raise ValueError("length must be at least 1")
    u = _generator(rng).random((2, length))
    n_phi, q = params.order
    selector = categorical_codes(u[0], _cdf(np.array(params.phi_weights + params.varphi_weights)))
    eps = categorical_codes(u[1], _cdf(params.p))
    warmup = min(max(n_phi, q), length)
    x = np.empty(length, dtype=np.int64)
    x[:warmup] = eps[:warmup]
    for t in range(warmup, length):
        d = selector[t]
        x[t] = x[t - d - 1] if d < n_phi else eps[t - (d - n_phi)]
    return x


def simulate_markov(params: MarkovParams, length: int, rng) -> np.ndarray:
    if length < 1:
        raise ValueError("length must be at least 1")
    u = _generator(rng).random(length)
    return markov_paths(u[None, :], _cdf(params.initial), _cdf(params.transition))[0]

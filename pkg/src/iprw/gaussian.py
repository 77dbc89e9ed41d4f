"""Brownian motion and Riemann-Liouville processes B_q(s) = int_0^s (s-y)^q dB(y)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .seeding import derive_seed


@dataclass(frozen=True)
class GaussianPathSet:
    step: float
    q: int
    paths: np.ndarray  # (replicate, gridpoint), column 0 is u = 0

    @property
    def u(self) -> np.ndarray:
        return np.arange(self.paths.shape[1]) * self.step

    def column(self, u: float) -> np.ndarray:
        k = u / self.step
        kr = int(round(k))
        if abs(k - kr) > 1e-6:
            raise ValueError(f"{u} is not on the path grid")
        return self.paths[:, kr]


def rl_cross_covariance(q: int, r: int, u: float, v: float) -> float:
    """Cov(B_q(u), B_r(v)) = int_0^{u^v} (u-y)^q (v-y)^r dy."""
    if q < 0 or r < 0:
        raise ValueError("orders must be nonnegative")
    if u < 0 or v < 0:
        raise ValueError("times must be nonnegative")
    w = min(u, v)
    if w == 0:
        return 0.0
    # substitute z = w - y: (z + du)^q (z + dv)^r with du = u - w, dv = v - w
    du, dv = u - w, v - w
    if du == 0:
        q, r, du, dv = r, q, dv, du
    # now du == 0 or both zero: (z)^r (z + d)^q
    d = du
    total = 0.0
    for k in range(q + 1):
        total += math.comb(q, k) * d ** (q - k) * w ** (r + k + 1) / (r + k + 1)
    return total


def rl_covariance(q: int, u: float, v: float) -> float:
    return rl_cross_covariance(q, q, u, v)


def sample_bm(step: float, n_steps: int, replicates: int, seed: int) -> GaussianPathSet:
    """Brownian paths on u = 0, step, ..., n_steps * step. Replicate i uses
    the seed derived from (seed, i)."""
    if not step > 0:
        raise ValueError("step must be positive")
    paths = np.zeros((replicates, n_steps + 1))
    sd = math.sqrt(step)
    for i in range(replicates):
        rng = np.random.default_rng(derive_seed(seed, i))
        np.cumsum(rng.standard_normal(n_steps) * sd, out=paths[i, 1:])
    return GaussianPathSet(step, 0, paths)


def integrate_rl(bm: GaussianPathSet, q: int) -> GaussianPathSet:
    """B_q = q! times the q-fold iterated integral of B (cumulative trapezoid)."""
    if bm.q != 0:
        raise ValueError("integrate_rl expects Brownian paths")
    if q < 0:
        raise ValueError("q must be nonnegative")
    x = bm.paths
    for _ in range(q):
        inc = 0.5 * (x[:, 1:] + x[:, :-1]) * bm.step
        x = np.concatenate((np.zeros((x.shape[0], 1)), np.cumsum(inc, axis=1)), axis=1)
    return GaussianPathSet(bm.step, q, x * math.factorial(q))


class NearSingularError(np.linalg.LinAlgError):
    pass


def rl_covariance_matrix(q: int, u_points) -> np.ndarray:
    u = [float(x) for x in u_points]
    return np.array([[rl_covariance(q, a, b) for b in u] for a in u])


def fdd_sample(q: int, u_points, replicates: int, seed: int) -> np.ndarray:
    """Exact draws of (B_q(u_1), ..., B_q(u_n)), shape (replicates, n)."""
    u = np.asarray(u_points, dtype=float)
    if len(np.unique(u)) != len(u):
        raise NearSingularError("duplicate u points make the covariance singular")
    C = rl_covariance_matrix(q, u)
    w, V = np.linalg.eigh(C)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(w))) if len(w) else 1.0)
    if np.any(w < -tol):
        raise NearSingularError(f"covariance not positive semidefinite (min eigenvalue {w.min():g})")
    # zero-variance coordinates (u = 0) come out exactly 0
    w = np.where(w > tol, w, 0.0)
    L = V * np.sqrt(w)
    rng = np.random.default_rng(derive_seed(seed, 0))
    z = rng.standard_normal((replicates, len(u)))
    out = z @ L.T
    out[:, u == 0] = 0.0
    return out

"""Event-driven simulation of the perturbed random walk and its branching tree.

A replicate owns one ``numpy.random.Generator``. Pairs ``(xi, eta)`` are drawn
from it in fixed-size chunks and consumed strictly in order, one pair per
step, by the frontier kernel. Within a generation the parents are visited in
increasing birth time, and every parent walks until its local partial sum
exceeds the remaining horizon. Since ``T_k >= S_{k-1}`` no later child of
that parent can be born before the horizon, so nothing is truncated.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Any, Callable, Sequence

import numpy as np

from . import kernels
from .grid import build_grids, centering_integral, default_step, discretize_cdf
from .seeding import replicate_rng
from .steps import JointStepModel, flt_scale, moments

CHUNK = 1024
FRONTIER_CAP = 10**8
STEP_CAP = 10**7


class SimulationGuardError(RuntimeError):
    """Runaway walk or frontier larger than the configured cap."""


class PairStream:
    """Chunked supply of step pairs for one replicate."""

    def __init__(self, model: JointStepModel, rng: np.random.Generator, chunk: int = CHUNK):
        self.model = model
        self.rng = rng
        self.chunk = chunk
        self.xi = np.empty(0)
        self.eta = self.xi
        self.pos = 0
        self.consumed = 0  # pairs used before the current chunk

    def refill(self) -> None:
        self.consumed += len(self.xi)
        x, e = self.model.sample_pairs(self.rng, self.chunk)
        self.xi = np.ascontiguousarray(x, dtype=np.float64)
        self.eta = self.xi if e is x else np.ascontiguousarray(e, dtype=np.float64)
        self.pos = 0

    @property
    def used(self) -> int:
        return self.consumed + self.pos


@dataclass(frozen=True)
class PerturbedWalkRealization:
    partial_sums: np.ndarray  # S_0 = 0, ..., S_{nu-1}: every S_k <= horizon
    births: np.ndarray  # T_k <= horizon, in order of k
    horizon: float

    @property
    def nu(self) -> int:
        """First-passage index inf{k : S_k > horizon}."""
        return len(self.partial_sums)

    @property
    def count(self) -> int:
        return len(self.births)


def _root_walk(stream: PairStream, horizon: float, step_cap: int) -> tuple[np.ndarray, np.ndarray]:
    """Partial sums S_0..S_{nu-1} and births (in step order) of one walk
    started at 0. Consumes pairs exactly like :func:`kernels.advance` would
    for a single parent at 0."""
    sums: list[np.ndarray] = []
    births: list[np.ndarray] = []
    s_abs = 0.0
    steps = 0
    if s_abs > horizon:
        return np.empty(0), np.empty(0)
    while True:
        if stream.pos == len(stream.xi):
            stream.refill()
        xs = stream.xi[stream.pos :]
        es = stream.eta[stream.pos :]
        cum = np.cumsum(np.concatenate(([s_abs], xs)))
        starts = cum[:-1]
        n_act = int(np.searchsorted(starts, horizon, side="right"))
        if steps + n_act > step_cap:
            raise SimulationGuardError(f"walk exceeded {step_cap} steps before leaving [0, {horizon}]")
        b = starts[:n_act] + es[:n_act]
        sums.append(starts[:n_act])
        births.append(b[b <= horizon])
        steps += n_act
        stream.pos += n_act
        if n_act < len(starts):
            break
        s_abs = float(cum[-1])
        if s_abs > horizon:
            break
    return np.concatenate(sums), np.concatenate(births)


def simulate_prw(model: JointStepModel, horizon: float, rng: np.random.Generator,
                 step_cap: int = STEP_CAP, chunk: int = CHUNK) -> PerturbedWalkRealization:
    """One perturbed random walk truncated at ``horizon``.

    Draws are consumed exactly as the first generation of
    :func:`simulate_generations` consumes them, so both agree on a shared seed.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    stream = PairStream(model, rng, chunk)
    sums, births = _root_walk(stream, float(horizon), step_cap)
    return PerturbedWalkRealization(sums, births, float(horizon))


def _grow_generation(parents: np.ndarray, horizon: float, stream: PairStream,
                     frontier_cap: int, step_cap: int) -> np.ndarray:
    """All children born by ``horizon`` of the given parents, sorted."""
    if len(parents) == 0:
        return parents
    parents = np.ascontiguousarray(parents, dtype=np.float64)
    out = np.empty(max(64, 2 * len(parents)))
    p, s_abs, k, n_out = 0, float(parents[0]), 0, 0
    while True:
        p, s_abs, k, stream.pos, n_out, status = kernels.advance(
            parents, p, s_abs, k, horizon, stream.xi, stream.eta, stream.pos, out, n_out, step_cap
        )
        if status == kernels.DONE:
            break
        if status == kernels.NEED_DRAWS:
            stream.refill()
        elif status == kernels.NEED_SPACE:
            if len(out) >= frontier_cap:
                raise SimulationGuardError(
                    f"generation frontier exceeded {frontier_cap} individuals; raise the cap or lower t"
                )
            grown = np.empty(min(2 * len(out), frontier_cap))
            grown[:n_out] = out[:n_out]
            out = grown
        else:
            raise SimulationGuardError(
                f"an individual took more than {step_cap} steps; xi has too much mass near 0"
            )
    return np.sort(out[:n_out])


@dataclass(frozen=True)
class Tree:
    """Sorted birth times per generation (index 0 is generation 1)."""

    horizon: float
    generations: list[np.ndarray]
    root_sums: np.ndarray  # partial sums of the ancestor's walk, all <= horizon

    @property
    def nu(self) -> int:
        return len(self.root_sums)

    def nu_at(self, x) -> np.ndarray:
        """First-passage index inf{k : S_k > x} of the ancestor's walk."""
        return np.searchsorted(self.root_sums, np.asarray(x, dtype=float), side="right")

    def count(self, j: int, x) -> np.ndarray:
        """N_j(x) for x <= horizon."""
        x = np.asarray(x, dtype=float)
        if np.any(x > self.horizon):
            raise ValueError("counts beyond the simulated horizon")
        return np.searchsorted(self.generations[j - 1], x, side="right")


def grow_tree(model: JointStepModel, t: float, J: int, rng: np.random.Generator,
              frontier_cap: int = FRONTIER_CAP, step_cap: int = STEP_CAP,
              chunk: int = CHUNK) -> Tree:
    if J < 1:
        raise ValueError("J must be >= 1")
    if t < 0:
        raise ValueError("t must be nonnegative")
    stream = PairStream(model, rng, chunk)
    sums, first = _root_walk(stream, float(t), step_cap)
    frontier = np.sort(first)
    gens = [frontier]
    for _ in range(2, J + 1):
        frontier = _grow_generation(frontier, float(t), stream, frontier_cap, step_cap)
        gens.append(frontier)
    return Tree(float(t), gens, sums)


@dataclass(frozen=True)
class GenerationCountPath:
    t: float
    u: np.ndarray
    J: int
    counts: np.ndarray  # counts[j - 1, i] = N_j(u_i t)
    nu: int


def _check_fractions(u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u < 0) or np.any(u > 1) or np.any(np.diff(u) < 0):
        raise ValueError("fractions must be sorted within [0, 1]")
    return u


def simulate_generations(model: JointStepModel, t: float, J: int, u: Sequence[float],
                         rng: np.random.Generator, **caps: Any) -> GenerationCountPath:
    u = _check_fractions(u)
    tree = grow_tree(model, t, J, rng, **caps)
    x = np.minimum(u * t, t)
    counts = np.stack([tree.count(j, x) for j in range(1, J + 1)]).astype(np.int64)
    return GenerationCountPath(float(t), u, J, counts, tree.nu)


def slln_trajectory(model: JointStepModel, J: int, t_checkpoints: Sequence[float],
                    rng: np.random.Generator, **caps: Any) -> np.ndarray:
    """N_j(t_i) / t_i^j for j = 1..J (rows) from a single tree grown to max t."""
    ts = np.asarray(t_checkpoints, dtype=float)
    if len(ts) == 0 or np.any(np.diff(ts) < 0) or ts[0] <= 0:
        raise ValueError("checkpoints must be positive and ascending")
    tree = grow_tree(model, float(ts[-1]), J, rng, **caps)
    return np.stack([tree.count(j, ts) / ts**j for j in range(1, J + 1)])


# -- replicates -----------------------------------------------------------

def _run_block(task: Callable[[np.random.Generator, int], Any], seed: int,
               indices: Sequence[int]) -> list:
    return [task(replicate_rng(seed, i), i) for i in indices]


def run_replicates(task: Callable[[np.random.Generator, int], Any], replicates: int,
                   seed: int, workers: int = 1) -> list:
    """``[task(rng_i, i) for i in range(replicates)]`` with ``rng_i`` derived
    from (seed, i). The result does not depend on ``workers``."""
    idx = list(range(replicates))
    if workers <= 1 or replicates < 2:
        return _run_block(task, seed, idx)
    n_blocks = min(replicates, 4 * workers)
    size = math.ceil(replicates / n_blocks)
    blocks = [idx[i : i + size] for i in range(0, replicates, size)]
    out: list = []
    with ProcessPoolExecutor(max_workers=workers) as ex:
        for part in ex.map(partial(_run_block, task, seed), blocks):
            out.extend(part)
    return out


def _counts_task(model, t, J, u, caps, rng, index):
    path = simulate_generations(model, t, J, u, rng, **caps)
    return path.counts, path.nu


def generation_counts(model: JointStepModel, t: float, J: int, u: Sequence[float],
                      replicates: int, seed: int, workers: int = 1,
                      **caps: Any) -> tuple[np.ndarray, np.ndarray]:
    """Counts array (replicate, generation, fraction) and nu(t) per replicate."""
    u = _check_fractions(u)
    task = partial(_counts_task, model, float(t), J, u, caps)
    res = run_replicates(task, replicates, seed, workers)
    counts = np.stack([c for c, _ in res])
    nu = np.array([n for _, n in res], dtype=np.int64)
    return counts, nu


# -- normalised paths -----------------------------------------------------

CENTERINGS = ("grid", "polynomial", "center")


def centering_values(model: JointStepModel, t: float, J: int, u: np.ndarray,
                     centering: str = "grid", h: float | None = None) -> np.ndarray:
    """center_j(u_i t) as a (J, |u|) array."""
    mom = moments(model)
    x = np.asarray(u, dtype=float) * t
    if centering == "polynomial":
        if not mom.eta_half_finite:
            raise ValueError("polynomial centering needs E eta^(1/2) < inf")
        return np.stack([x**j / (math.factorial(j) * mom.m**j) for j in range(1, J + 1)])
    h = default_step(model, t) if h is None else h
    if centering == "grid":
        g = build_grids(model, h, t, J)
        return np.stack([g.Vj(j).at(x) for j in range(1, J + 1)])
    if centering == "center":
        G = discretize_cdf(model.eta, h, t)
        return np.stack([centering_integral(G, j, mom.m).at(x) for j in range(1, J + 1)])
    raise ValueError(f"unknown centering {centering!r}")


@dataclass(frozen=True)
class FltSample:
    values: np.ndarray  # (replicate, j, u): (N_j(ut) - center) / flt_scale(j, t)
    counts: np.ndarray
    center: np.ndarray
    scale: np.ndarray
    u: np.ndarray
    t: float
    centering: str


def normalise(counts: np.ndarray, model: JointStepModel, t: float, u: np.ndarray,
              centering: str = "grid", h: float | None = None) -> FltSample:
    J = counts.shape[1]
    mom = moments(model)
    center = centering_values(model, t, J, u, centering, h)
    scale = np.array([flt_scale(j, t, mom) for j in range(1, J + 1)])
    vals = (counts - center[None]) / scale[None, :, None]
    return FltSample(vals, counts, center, scale, np.asarray(u, dtype=float), float(t), centering)


def flt_path_sample(model: JointStepModel, t: float, J: int, u: Sequence[float],
                    replicates: int, seed: int, centering: str = "grid",
                    h: float | None = None, workers: int = 1, **caps: Any) -> FltSample:
    """Normalised counts (j-1)! (N_j(ut) - center_j(ut)) / sqrt(m^(-2j-1) s^2 t^(2j-1))."""
    u = _check_fractions(u)
    if centering not in CENTERINGS:
        raise ValueError(f"unknown centering {centering!r}")
    if centering == "polynomial" and not moments(model).eta_half_finite:
        raise ValueError("polynomial centering needs E eta^(1/2) < inf")
    counts, _ = generation_counts(model, t, J, u, replicates, seed, workers, **caps)
    return normalise(counts, model, t, u, centering, h)

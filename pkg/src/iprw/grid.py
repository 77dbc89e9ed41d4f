"""Renewal quantities on a uniform grid.

Every function is sampled at ``t_k = k h``. A grid measure (cdf, renewal
function, mean function) carries its increments in one of two placements:

* ``atomic=True``: the increment of cell ``((k-1)h, kh]`` is an atom at
  ``kh`` (lattice laws whose atoms sit on nodes). Convolutions against such
  a measure are exact.
* ``atomic=False``: the increment is spread over the cell, and the partner
  function is averaged over the cell (trapezoid product rule). This places
  each increment at the cell midpoint and cancels the one-sided bias of
  endpoint rules.

The value at ``t = 0`` is the atom at the origin (``U(0) = 1``).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .steps import (
    JointStepModel,
    MomentSummary,
    StepLaw,
    lorden_constant,
    moments,
    renewal_constant_bU,
)

log = logging.getLogger(__name__)

KINDS = ("cdf", "renewal", "mean_function", "plain")

# Declared discretisation budget: a grid value A_h(t) is trusted to
# |A_h(t) - A(t)| <= GRID_BUDGET * h * max(1, |A(t)|).
GRID_BUDGET = 1.0

_SNAP = 1e-9


class GridMismatchError(ValueError):
    pass


class GridGuardError(ArithmeticError):
    """Raised when a grid computation leaves its trusted regime."""


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A function sampled at ``k h``, ``k = 0..K``."""

    h: float
    values: np.ndarray
    kind: str = "plain"
    atomic: bool = False

    def __post_init__(self) -> None:
        if not self.h > 0:
            raise ValueError("grid step must be positive")
        if self.kind not in KINDS:
            raise ValueError(f"unknown grid kind {self.kind!r}")
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def K(self) -> int:
        return len(self.values) - 1

    @property
    def t_max(self) -> float:
        return self.K * self.h

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self.values)) * self.h

    def index(self, x: float) -> int:
        """Grid index of a node ``x`` (which must lie on the grid)."""
        k = x / self.h
        kr = round(k)
        if abs(k - kr) > 1e-6 * max(1.0, abs(k)):
            raise GridMismatchError(f"{x} is not a multiple of h={self.h}")
        if not 0 <= kr <= self.K:
            raise GridMismatchError(f"{x} outside [0, {self.t_max}]")
        return int(kr)

    def at(self, x):
        """Evaluate at arbitrary points in [0, t_max]: right-continuous step
        for atomic measures, linear interpolation otherwise. Negative
        arguments give 0."""
        x = np.asarray(x, dtype=float)
        if np.any(x > self.t_max * (1 + 1e-12) + 1e-12):
            raise GridMismatchError("evaluation beyond t_max")
        if self.atomic:
            k = np.floor(x / self.h + _SNAP).astype(np.int64)
            k = np.clip(k, -1, self.K)
            out = np.where(k >= 0, self.values[np.maximum(k, 0)], 0.0)
        else:
            out = np.interp(x, self.t, self.values, left=0.0)
            out = np.where(x < 0, 0.0, out)
        return out if out.ndim else float(out)

    def increments(self) -> np.ndarray:
        """Atom at 0 followed by cell increments."""
        return np.diff(self.values, prepend=0.0)

    def with_values(self, values, kind: str | None = None, atomic: bool | None = None):
        return GridFunction(
            self.h,
            values,
            kind=self.kind if kind is None else kind,
            atomic=self.atomic if atomic is None else atomic,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GridFunction):
            return NotImplemented
        return (
            self.h == other.h
            and self.kind == other.kind
            and self.atomic == other.atomic
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]


class GridMeasure(GridFunction):
    """Right-continuous nondecreasing grid function (cdf, U, V, V_j, ...)."""

    def __post_init__(self) -> None:
        super().__post_init__()
        v = self.values
        if self.kind == "plain":
            return
        scale = max(1.0, float(np.max(np.abs(v)))) if len(v) else 1.0
        if len(v) > 1 and np.min(np.diff(v)) < -1e-12 * scale:
            raise GridGuardError(f"{self.kind} grid is not nondecreasing")
        if self.kind == "cdf" and len(v) and v[-1] > 1 + 1e-12:
            raise GridGuardError("cdf grid exceeds 1")
        if self.kind == "renewal" and len(v) and v[0] < 1 - 1e-12:
            raise GridGuardError("renewal grid must have U(0) >= 1")


def _same_grid(*grids: GridFunction) -> None:
    h, n = grids[0].h, len(grids[0].values)
    for g in grids[1:]:
        if g.h != h or len(g.values) != n:
            raise GridMismatchError("grids must share step and length")


def default_step(model: JointStepModel, t_max: float) -> float:
    """min(lattice span, t_max / 1e4), shrunk so that every atom of xi and
    eta falls on a node."""
    h = t_max / 1e4
    spans = []
    for law in (model.xi, model.eta):
        if law.is_atomic:
            span = law.lattice_span
            if span is None:
                raise GridMismatchError(f"atoms of {law} lie on no integer lattice")
            spans.append(span)
    if not spans:
        return h
    span = min(spans)
    if span <= h:
        return span
    return span / math.ceil(span / h)


# -- discretisation --------------------------------------------------------

def discretize_cdf(law: StepLaw, h: float, t_max: float) -> GridMeasure:
    K = int(round(t_max / h))
    if abs(K * h - t_max) > 1e-9 * max(1.0, t_max):
        raise GridMismatchError("t_max must be a multiple of h")
    if law.is_atomic:
        vals = np.zeros(K + 1)
        for a, q in law.atoms():
            k = a / h
            kr = round(k)
            if abs(k - kr) > 1e-9 * max(1.0, k):
                raise GridMismatchError(f"atom {a} is not on the grid h={h}")
            if kr <= K:
                vals[kr:] += q
        return GridMeasure(h, np.minimum(vals, 1.0), kind="cdf", atomic=True)
    t = np.arange(K + 1) * h
    return GridMeasure(h, law.cdf(t), kind="cdf", atomic=False)


# -- convolution core ------------------------------------------------------

def _spread_conv(db: np.ndarray, w: np.ndarray) -> np.ndarray:
    """out_k = sum_{i=1}^k db_i w_{k-i}: cell increments db_i (i >= 1)
    against cell averages w_m of the partner over [mh, (m+1)h)."""
    n = len(db)
    out = np.zeros(n)
    if n > 1:
        e = np.ascontiguousarray(db[1:])
        out[1:] = kernels.causal_conv(e, np.ascontiguousarray(w[: n - 1]))
    return out


def stieltjes(a: GridFunction, b: GridFunction, kind: str = "plain") -> GridFunction:
    """Grid values of t -> int_[0,t] a(t - y) db(y)."""
    _same_grid(a, b)
    if not b.atomic and a.atomic and a.kind != "plain":
        a, b = b, a
    db = b.increments()
    if b.atomic:
        out = kernels.causal_conv(db, np.ascontiguousarray(a.values))
    else:
        w = 0.5 * (a.values[:-1] + a.values[1:])
        out = _spread_conv(db, w) + a.values * db[0]
    atomic = a.atomic and b.atomic
    cls = GridMeasure if kind != "plain" else GridFunction
    return cls(b.h, out, kind=kind, atomic=atomic)


def renewal_function(F: GridMeasure) -> GridMeasure:
    """U(t) = sum_{n>=0} P{S_n <= t} from the discretised renewal equation."""
    if F.kind != "cdf":
        raise GridMismatchError("renewal_function needs a cdf grid")
    if F.values[0] != 0.0:
        raise GridGuardError("F(0) must be 0 (steps are positive)")
    if not F.atomic and len(F.values) > 1 and F.values[1] >= 1.0:
        raise GridGuardError("all mass of F lies within one grid step; refine h")
    dF = F.increments()
    U = kernels.renewal_solve(np.ascontiguousarray(dF), not F.atomic)
    return GridMeasure(F.h, U, kind="renewal", atomic=F.atomic)


def tilde(U: GridMeasure) -> GridMeasure:
    """U~ = U - 1, the renewal measure without the atom at 0."""
    return GridMeasure(U.h, U.values - 1.0, kind="mean_function", atomic=U.atomic)


def mean_function(U: GridMeasure, G: GridMeasure) -> GridMeasure:
    """V(t) = int_[0,t] G(t - y) dU(y)."""
    _same_grid(U, G)
    # G as integrator: exact shift when G is atomic, trapezoid otherwise.
    return stieltjes(U, G, kind="mean_function")


def convolution_power(V: GridMeasure, j: int) -> GridMeasure:
    if j < 1:
        raise ValueError("j must be >= 1")
    return convolution_powers(V, j)[-1]


def convolution_powers(V: GridMeasure, J: int) -> list[GridMeasure]:
    """[V_1, ..., V_J] with V_j = V_{j-1} * dV."""
    out = [V]
    for _ in range(1, J):
        nxt = stieltjes(out[-1], V, kind="mean_function")
        if not np.all(np.isfinite(nxt.values)):
            raise GridGuardError("convolution power overflowed")
        out.append(nxt)
    return out


@dataclass
class RenewalGrids:
    model: JointStepModel
    F: GridMeasure
    G: GridMeasure
    U: GridMeasure
    U_tilde: GridMeasure
    V: list[GridMeasure] = field(default_factory=list)

    @property
    def h(self) -> float:
        return self.F.h

    def Vj(self, j: int) -> GridFunction:
        """V_j with V_0 = 1 on [0, inf)."""
        if j == 0:
            return GridMeasure(self.h, np.ones_like(self.F.values), kind="mean_function",
                               atomic=self.F.atomic)
        while len(self.V) < j:
            self.V.append(stieltjes(self.V[-1], self.V[0], kind="mean_function"))
        return self.V[j - 1]


def build_grids(model: JointStepModel, h: float, t_max: float, J: int = 1) -> RenewalGrids:
    F = discretize_cdf(model.xi, h, t_max)
    G = F if model.eta == model.xi else discretize_cdf(model.eta, h, t_max)
    U = renewal_function(F)
    Ut = tilde(U)
    V = Ut if model.coupling == "equal" else mean_function(U, G)
    grids = RenewalGrids(model, F, G, U, Ut, [V])
    grids.Vj(J)
    return grids


# -- directly Riemann integrable functions --------------------------------

@dataclass(frozen=True)
class DriFunction:
    """Nonnegative test function for key-renewal integrals.

    kinds: ``indicator`` (h0): 1 on [0, h0); ``exp_decay`` (c): exp(-c x);
    ``truncated_poly`` (p, cutoff): (1 - x/cutoff)^p on [0, cutoff);
    ``sampled`` (values, step, tail): piecewise linear through samples, then
    0 (``tail='zero'``) or the last sample held forever (``tail='hold'``).
    """

    kind: str
    params: tuple

    def __post_init__(self) -> None:
        if self.kind == "sampled":
            vals, step, tail = self.params
            vals = tuple(float(v) for v in vals)
            if step <= 0 or any(v < 0 for v in vals) or tail not in ("zero", "hold"):
                raise ValueError("bad sampled function")
            object.__setattr__(self, "params", (vals, float(step), tail))
        elif self.kind in ("indicator", "exp_decay"):
            if len(self.params) != 1 or not self.params[0] > 0:
                raise ValueError(f"{self.kind} takes one positive parameter")
        elif self.kind == "truncated_poly":
            p, cut = self.params
            if p < 0 or cut <= 0:
                raise ValueError("truncated_poly needs p >= 0, cutoff > 0")
        else:
            raise ValueError(f"unknown function kind {self.kind!r}")

    @classmethod
    def indicator(cls, h0: float) -> DriFunction:
        return cls("indicator", (float(h0),))

    @classmethod
    def exp_decay(cls, c: float) -> DriFunction:
        return cls("exp_decay", (float(c),))

    @classmethod
    def truncated_poly(cls, p: float, cutoff: float) -> DriFunction:
        return cls("truncated_poly", (float(p), float(cutoff)))

    @classmethod
    def sampled(cls, values, step: float, tail: str = "zero") -> DriFunction:
        return cls("sampled", (tuple(values), step, tail))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = self.kind
        if k == "indicator":
            out = ((x >= 0) & (x < self.params[0])).astype(float)
        elif k == "exp_decay":
            out = np.where(x >= 0, np.exp(-self.params[0] * np.maximum(x, 0)), 0.0)
        elif k == "truncated_poly":
            p, cut = self.params
            out = np.where((x >= 0) & (x < cut), np.clip(1 - x / cut, 0, 1) ** p, 0.0)
        else:
            vals, step, tail = self.params
            grid = np.arange(len(vals)) * step
            right = vals[-1] if tail == "hold" else 0.0
            out = np.interp(x, grid, vals, left=0.0, right=right)
            if tail == "zero":
                out = np.where(x > grid[-1], 0.0, out)
        return out if out.ndim else float(out)

    def antiderivative(self, x):
        """int_0^x f."""
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        k = self.kind
        if k == "indicator":
            return np.minimum(x, self.params[0])
        if k == "exp_decay":
            c = self.params[0]
            return -np.expm1(-c * x) / c
        if k == "truncated_poly":
            p, cut = self.params
            return cut / (p + 1) * (1 - (1 - np.minimum(x, cut) / cut) ** (p + 1))
        vals, step, tail = self.params
        v = np.asarray(vals)
        grid = np.arange(len(v)) * step
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * step)))
        inside = np.minimum(x, grid[-1])
        i = np.clip(np.floor(inside / step).astype(np.int64), 0, max(len(v) - 2, 0))
        fx = np.interp(inside, grid, v)
        part = cum[i] + (inside - grid[i]) * 0.5 * (v[i] + fx)
        if tail == "hold":
            part = part + np.maximum(x - grid[-1], 0.0) * v[-1]
        return part

    def integral(self) -> float:
        k = self.kind
        if k == "indicator":
            return self.params[0]
        if k == "exp_decay":
            return 1.0 / self.params[0]
        if k == "truncated_poly":
            p, cut = self.params
            return cut / (p + 1)
        vals, step, tail = self.params
        if tail == "hold" and vals[-1] > 0:
            return math.inf
        return float(self.antiderivative(step * (len(vals) - 1)))

    def cell_averages(self, h: float, n: int) -> np.ndarray:
        edges = np.arange(n + 1) * h
        return np.diff(self.antiderivative(edges)) / h

    def to_dict(self) -> dict:
        if self.kind == "sampled":
            vals, step, tail = self.params
            return {"kind": "sampled", "values": list(vals), "step": step, "tail": tail}
        names = {"indicator": ("h0",), "exp_decay": ("c",), "truncated_poly": ("p", "cutoff")}
        return {"kind": self.kind, **dict(zip(names[self.kind], self.params))}

    @classmethod
    def from_dict(cls, d: dict) -> DriFunction:
        k = d["kind"]
        if k == "indicator":
            return cls.indicator(d["h0"])
        if k == "exp_decay":
            return cls.exp_decay(d["c"])
        if k == "truncated_poly":
            return cls.truncated_poly(d["p"], d["cutoff"])
        return cls.sampled(d["values"], d["step"], d.get("tail", "zero"))


@dataclass(frozen=True)
class DriReport:
    passed: bool
    upper: tuple[float, float]
    lower: tuple[float, float]
    gap_ratio: float
    finite: bool
    integral_estimate: float


def _riemann_sums(f: DriFunction, delta: float, horizon: float) -> tuple[float, float]:
    n = int(math.ceil(horizon / delta))
    sub = 32
    left = np.arange(n)[:, None] * delta
    offs = np.concatenate((np.arange(sub) / sub, [1 - 1e-9])) * delta
    vals = f(left + offs[None, :])
    return float(np.sum(vals.max(axis=1)) * delta), float(np.sum(vals.min(axis=1)) * delta)


def dri_check(f: DriFunction, delta: float = 1.0, horizon: float = 1000.0) -> DriReport:
    """Upper/lower Riemann sums over cells of width delta and delta/2.

    Finiteness is judged by doubling the horizon: the upper sum must not
    grow by more than 1e-6 relative.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    up1, lo1 = _riemann_sums(f, delta, horizon)
    up2, lo2 = _riemann_sums(f, delta / 2, horizon)
    up_far, _ = _riemann_sums(f, delta, 2 * horizon)
    finite = up_far - up1 <= 1e-6 * max(1.0, up1)
    gap1, gap2 = up1 - lo1, up2 - lo2
    ratio = gap2 / gap1 if gap1 > 0 else 0.0
    shrinks = gap2 <= 0.75 * gap1 or gap2 <= 1e-12
    return DriReport(
        passed=bool(finite and shrinks),
        upper=(up1, up2),
        lower=(lo1, lo2),
        gap_ratio=ratio,
        finite=bool(finite),
        integral_estimate=0.5 * (up2 + lo2),
    )


# -- key renewal / Blackwell ----------------------------------------------

@dataclass(frozen=True)
class KeyRenewalResult:
    integral: GridFunction
    middle: GridFunction | None  # (int f / m) V_{j-1}(t)
    leading: GridFunction | None  # int f t^(j-1) / ((j-1)! m^j)


def key_renewal_integral(
    f: DriFunction,
    V_j: GridFunction,
    j: int | None = None,
    m: float | None = None,
    V_jm1: GridFunction | None = None,
    check: bool = True,
) -> KeyRenewalResult:
    """t -> int_[0,t] f(t - y) dV_j(y), with the two comparison curves."""
    if check:
        rep = dri_check(f)
        if not rep.passed:
            raise ValueError(f"{f} failed the direct Riemann integrability check")
    h, K = V_j.h, V_j.K
    dV = V_j.increments()
    if V_j.atomic:
        w = np.ascontiguousarray(f(np.arange(K + 1) * h))
        out = kernels.causal_conv(np.ascontiguousarray(dV), w)
    else:
        avg = f.cell_averages(h, K)
        out = _spread_conv(dV, avg) + dV[0] * f(np.arange(K + 1) * h)
    integral = GridFunction(h, out)
    middle = leading = None
    if m is not None:
        If = f.integral()
        if V_jm1 is not None:
            middle = GridFunction(h, If / m * V_jm1.values)
        if j is not None:
            t = V_j.t
            leading = GridFunction(h, If * t ** (j - 1) / (math.factorial(j - 1) * m**j))
    return KeyRenewalResult(integral, middle, leading)


def blackwell_increment(V_j: GridFunction, h0: float, j: int, m: float) -> tuple[GridFunction, GridFunction]:
    """(V_j(t + h0) - V_j(t), h0 t^(j-1) / ((j-1)! m^j)) on t in [0, t_max - h0]."""
    n0 = V_j.index(h0)
    v = V_j.values
    inc = v[n0:] - v[: len(v) - n0]
    t = np.arange(len(inc)) * V_j.h
    theory = h0 * t ** (j - 1) / (math.factorial(j - 1) * m**j)
    return GridFunction(V_j.h, inc), GridFunction(V_j.h, theory)


def lattice_flag(model: JointStepModel) -> bool:
    """True when xi is lattice, so Blackwell-type limits need not hold."""
    return model.xi.is_atomic


# -- second moments and variances (eta = xi) --------------------------------

def second_moment_sum(V_jm1: GridFunction, V_j: GridFunction, U_tilde: GridMeasure) -> GridFunction:
    """E(sum_r V_{j-1}(t - S_r) 1{S_r <= t})^2
    = 2 int V_{j-1} V_j (t - y) dU~(y) + int V_{j-1}^2 (t - y) dU~(y)."""
    _same_grid(V_jm1, V_j, U_tilde)
    atomic = V_jm1.atomic and V_j.atomic
    prod = GridFunction(V_j.h, V_jm1.values * V_j.values, atomic=atomic)
    sq = GridFunction(V_j.h, V_jm1.values**2, atomic=atomic)
    a = stieltjes(prod, U_tilde)
    b = stieltjes(sq, U_tilde)
    return GridFunction(V_j.h, 2 * a.values + b.values)


def variance_numeric(model: JointStepModel, J: int, h: float, t_max: float,
                     grids: RenewalGrids | None = None) -> list[GridFunction]:
    """[D_1, ..., D_J], D_j(t) = Var N_j(t), for eta = xi.

    D_1 = E N^2 - V^2 with E N^2 from the j = 1 second-moment sum;
    D_j = int D_{j-1}(t - y) dU~(y) + (second-moment sum - V_j^2).
    """
    if model.coupling != "equal":
        raise ValueError("variance recursion needs eta = xi (equal coupling)")
    g = grids if grids is not None else build_grids(model, h, t_max, J)
    Ut = g.U_tilde
    out: list[GridFunction] = []
    prev: GridFunction | None = None
    for j in range(1, J + 1):
        Vj, Vjm1 = g.Vj(j), g.Vj(j - 1)
        outer = second_moment_sum(Vjm1, Vj, Ut).values - Vj.values**2
        inner = stieltjes(prev, Ut).values if prev is not None else 0.0
        D = inner + outer
        budget = GRID_BUDGET * g.h * np.maximum(1.0, Vj.values**2)
        if np.any(D < -budget):
            k = int(np.argmin(D + budget))
            raise GridGuardError(f"D_{j}({k * g.h:g}) = {D[k]:g} is negative beyond budget")
        if np.any(D < 0):
            log.warning("clamping %d slightly negative values of D_%d", int(np.sum(D < 0)), j)
            D = np.maximum(D, 0.0)
        prev = GridFunction(g.h, D, atomic=Vj.atomic)
        out.append(prev)
    return out


# -- centering and tail integrals ------------------------------------------

def iterated_integral(A: GridFunction, times: int) -> GridFunction:
    """``times``-fold integral from 0; a right-continuous atomic step function
    is integrated exactly by the left sum first."""
    vals = A.values
    h = A.h
    for n in range(times):
        if n == 0 and A.atomic:
            cum = np.concatenate(([0.0], np.cumsum(vals[:-1]) * h))
        else:
            cum = np.concatenate(([0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1])) * h))
        vals = cum
    return GridFunction(h, vals)


def centering_integral(G: GridMeasure, j: int, m: float) -> GridFunction:
    """E (t - R_j)^j 1{R_j <= t} / (j! m^j), R_j = eta_1 + ... + eta_j,
    computed as the j-fold integral of P{R_j <= y} divided by m^j."""
    if G.kind != "cdf":
        raise GridMismatchError("centering needs the cdf grid of eta")
    Gj: GridFunction = G
    for _ in range(1, j):
        Gj = stieltjes(Gj, G, kind="cdf")
    nested = iterated_integral(Gj, j)
    return GridFunction(G.h, nested.values / m**j)


def weighted_tail_integral(U_tilde: GridMeasure, j: int, mom: MomentSummary) -> tuple[GridFunction, GridFunction]:
    """(int_[0,t] (t - y)^j dU~(y), residual), where the residual is
    (integral - t^(j+1)/((j+1)m) - (b_U - 1) t^j) / t^j."""
    bU = renewal_constant_bU(mom)
    if j == 0:
        I = U_tilde.values.copy()
    else:
        I = math.factorial(j) * iterated_integral(U_tilde, j).values
    t = U_tilde.t
    approx = t ** (j + 1) / ((j + 1) * mom.m) + (bU - 1) * t**j
    with np.errstate(divide="ignore", invalid="ignore"):
        res = np.where(t > 0, (I - approx) / np.where(t > 0, t**j, 1.0), 0.0)
    return GridFunction(U_tilde.h, I), GridFunction(U_tilde.h, res)


# -- Lorden-type bound audits ----------------------------------------------

@dataclass
class BoundCheck:
    name: str
    worst_margin: float
    worst_t: float
    tolerance: float
    passed: bool
    detail: str = ""


@dataclass
class AuditReport:
    checks: list[BoundCheck]
    lord3_constants: tuple[float, float] | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def violations(self) -> list[BoundCheck]:
        return [c for c in self.checks if not c.passed]


def _check(name: str, slack: np.ndarray, t: np.ndarray, scale: np.ndarray, h: float,
           detail: str = "") -> BoundCheck:
    tol = GRID_BUDGET * h * np.maximum(1.0, np.abs(scale))
    margin = slack + tol
    k = int(np.argmin(slack / np.maximum(tol, 1e-300)))
    return BoundCheck(name, float(slack[k]), float(t[k]), float(tol[k]),
                      bool(np.all(margin >= 0)), detail)


def bound_audit(mom: MomentSummary, U: GridMeasure | None = None,
                V: GridMeasure | None = None, U_powers: list[GridMeasure] | None = None,
                eta: StepLaw | None = None) -> AuditReport:
    """Audit Lorden's inequality and its relatives on the grid.

    Each check is held to the declared budget GRID_BUDGET * h * max(1, |A|).
    """
    checks: list[BoundCheck] = []
    m = mom.m
    lord3 = None
    if U is not None and math.isfinite(mom.m2):
        cU = lorden_constant(mom)
        t = U.t
        d = U.values - t / m
        checks.append(_check("lord_lower", d, t, U.values, U.h, "U(t) - t/m >= 0"))
        checks.append(_check("lord_upper", cU - d, t, U.values, U.h, f"U(t) - t/m <= c_U = {cU:g}"))
    if U_powers:
        for j, Uj in enumerate(U_powers, start=1):
            t = Uj.t
            poly = t**j / (math.factorial(j) * m**j)
            checks.append(_check(f"lordleft_j{j}", Uj.values - poly, t, Uj.values, Uj.h,
                                 f"U_{j}(t) >= t^{j}/({j}! m^{j})"))
    if V is not None:
        t = V.t
        d = V.values - t / m
        if math.isfinite(mom.m2):
            cU = lorden_constant(mom)
            checks.append(_check("lord1", cU - d, t, V.values, V.h, "V(t) - t/m <= c_U"))
            if math.isfinite(mom.eta_mean):
                cV = max(cU, mom.eta_mean / m)
                checks.append(_check("lord2", cV - np.abs(d), t, V.values, V.h,
                                     f"|V(t) - t/m| <= c_V = {cV:g}"))
        if not math.isfinite(mom.eta_mean) and 0 < mom.eta_alpha < 1:
            a = mom.eta_alpha
            deficit = np.maximum(0.0, -d)
            small = t < 1.0
            c1 = float(np.max(deficit[small])) if np.any(small) else 0.0
            big = ~small
            c2 = float(np.max(deficit[big] / t[big] ** (1 - a))) if np.any(big) else 0.0
            c1, c2 = max(c1, 1e-300), max(c2, 1e-300)
            lord3 = (c1, c2)
            checks.append(_check("lord3", d + c1 + c2 * t ** (1 - a), t, V.values, V.h,
                                 f"V(t) - t/m >= -c1 - c2 t^(1-a), a={a:g}, fitted c1={c1:.4g}, c2={c2:.4g}"))
    return AuditReport(checks, lord3)


def audit_model(model: JointStepModel, h: float, t_max: float, J: int = 3) -> AuditReport:
    """Build U, U_1..U_J and V for ``model`` and audit all applicable bounds."""
    mom = moments(model)
    g = build_grids(model, h, t_max, 1)
    powers = [g.U]
    for _ in range(1, J):
        powers.append(stieltjes(powers[-1], g.U, kind="renewal"))
    return bound_audit(mom, U=g.U, V=g.V[0], U_powers=powers, eta=model.eta)

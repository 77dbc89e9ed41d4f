"""Joint law of one step (xi, eta): sampling and closed-form moment constants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Any

import numpy as np
from scipy import special

FAMILIES = (
    "exponential",
    "gamma",
    "uniform",
    "lognormal",
    "pareto",
    "deterministic",
    "discrete",
)
COUPLINGS = ("independent", "equal", "comonotone")

# Moment orders a probed for E eta^a < inf.
MOMENT_TABLE = tuple(round(0.05 * k, 2) for k in range(1, 81))

_PARAM_NAMES = {
    "exponential": ("rate",),
    "gamma": ("shape", "rate"),
    "uniform": ("lo", "hi"),
    "lognormal": ("mu", "sigma"),
    "pareto": ("alpha", "scale"),
    "deterministic": ("value",),
}


class InfiniteMomentError(ValueError):
    """A constant was requested that needs a moment the law does not have."""


@dataclass(frozen=True)
class StepLaw:
    """A law on (0, inf) from one of the supported families.

    ``params`` holds the family parameters in the order of ``_PARAM_NAMES``;
    for ``discrete`` it is a tuple of ``(atom, probability)`` pairs.
    """

    family: str
    params: tuple

    def __post_init__(self) -> None:
        fam, p = self.family, self.params
        if fam not in FAMILIES:
            raise ValueError(f"unknown family {fam!r}")
        if fam == "discrete":
            if not p:
                raise ValueError("discrete law needs a non-empty support")
            atoms = [float(a) for a, _ in p]
            probs = [float(q) for _, q in p]
            if any(a <= 0 for a in atoms):
                raise ValueError("discrete atoms must be strictly positive")
            if any(b <= a for a, b in zip(atoms, atoms[1:])):
                raise ValueError("discrete atoms must be strictly increasing")
            if any(q <= 0 for q in probs):
                raise ValueError("discrete probabilities must be positive")
            if abs(math.fsum(probs) - 1.0) > 1e-12:
                raise ValueError("discrete probabilities must sum to 1")
            object.__setattr__(self, "params", tuple(zip(atoms, probs)))
            return
        names = _PARAM_NAMES[fam]
        if len(p) != len(names):
            raise ValueError(f"{fam} takes parameters {names}")
        vals = tuple(float(v) for v in p)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"{fam} parameters must be finite")
        object.__setattr__(self, "params", vals)
        if fam == "uniform":
            lo, hi = vals
            if not 0 <= lo < hi:
                raise ValueError("uniform requires 0 <= lo < hi")
        elif fam == "lognormal":
            if vals[1] <= 0:
                raise ValueError("lognormal sigma must be positive")
        elif any(v <= 0 for v in vals):
            raise ValueError(f"{fam} parameters must be strictly positive")

    # -- constructors -----------------------------------------------------
    @classmethod
    def exponential(cls, rate: float) -> StepLaw:
        return cls("exponential", (rate,))

    @classmethod
    def gamma(cls, shape: float, rate: float) -> StepLaw:
        return cls("gamma", (shape, rate))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> StepLaw:
        return cls("uniform", (lo, hi))

    @classmethod
    def lognormal(cls, mu: float, sigma: float) -> StepLaw:
        return cls("lognormal", (mu, sigma))

    @classmethod
    def pareto(cls, alpha: float, scale: float) -> StepLaw:
        return cls("pareto", (alpha, scale))

    @classmethod
    def deterministic(cls, value: float) -> StepLaw:
        return cls("deterministic", (value,))

    @classmethod
    def discrete(cls, support) -> StepLaw:
        return cls("discrete", tuple((a, q) for a, q in support))

    # -- structure --------------------------------------------------------
    @property
    def is_atomic(self) -> bool:
        return self.family in ("deterministic", "discrete")

    def atoms(self) -> tuple[tuple[float, float], ...]:
        if self.family == "deterministic":
            return ((self.params[0], 1.0),)
        if self.family == "discrete":
            return self.params
        return ()

    @property
    def lattice_span(self) -> float | None:
        """Span of the lattice carrying the law, for deterministic and
        integer-valued discrete laws; ``None`` otherwise."""
        if self.family == "deterministic":
            return self.params[0]
        if self.family == "discrete":
            atoms = [a for a, _ in self.params]
            if all(float(a).is_integer() for a in atoms):
                return float(reduce(math.gcd, (int(a) for a in atoms)))
        return None

    # -- moments ----------------------------------------------------------
    def mean(self) -> float:
        fam, p = self.family, self.params
        if fam == "exponential":
            return 1.0 / p[0]
        if fam == "gamma":
            return p[0] / p[1]
        if fam == "uniform":
            return 0.5 * (p[0] + p[1])
        if fam == "lognormal":
            return math.exp(p[0] + 0.5 * p[1] ** 2)
        if fam == "pareto":
            a, x0 = p
            return math.inf if a <= 1 else a * x0 / (a - 1)
        if fam == "deterministic":
            return p[0]
        return math.fsum(a * q for a, q in p)

    def second_moment(self) -> float:
        fam, p = self.family, self.params
        if fam == "exponential":
            return 2.0 / p[0] ** 2
        if fam == "gamma":
            k, r = p
            return k * (k + 1) / r**2
        if fam == "uniform":
            lo, hi = p
            return (lo * lo + lo * hi + hi * hi) / 3.0
        if fam == "lognormal":
            return math.exp(2 * p[0] + 2 * p[1] ** 2)
        if fam == "pareto":
            a, x0 = p
            return math.inf if a <= 2 else a * x0 * x0 / (a - 2)
        if fam == "deterministic":
            return p[0] ** 2
        return math.fsum(a * a * q for a, q in p)

    def variance(self) -> float:
        fam, p = self.family, self.params
        # direct forms avoid cancellation in m2 - m^2
        if fam == "exponential":
            return 1.0 / p[0] ** 2
        if fam == "gamma":
            return p[0] / p[1] ** 2
        if fam == "uniform":
            return (p[1] - p[0]) ** 2 / 12.0
        if fam == "lognormal":
            return math.expm1(p[1] ** 2) * math.exp(2 * p[0] + p[1] ** 2)
        if fam == "pareto":
            a, x0 = p
            return math.inf if a <= 2 else x0 * x0 * a / ((a - 1) ** 2 * (a - 2))
        if fam == "deterministic":
            return 0.0
        m = self.mean()
        return math.fsum((a - m) ** 2 * q for a, q in p)

    def has_moment(self, a: float) -> bool:
        """Whether E X^a < inf."""
        if self.family == "pareto":
            return a < self.params[0]
        return True

    # -- distribution functions ------------------------------------------
    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        fam, p = self.family, self.params
        if fam == "exponential":
            return np.where(x > 0, -np.expm1(-p[0] * np.maximum(x, 0.0)), 0.0)
        if fam == "gamma":
            return special.gammainc(p[0], p[1] * np.maximum(x, 0.0))
        if fam == "uniform":
            lo, hi = p
            return np.clip((x - lo) / (hi - lo), 0.0, 1.0)
        if fam == "lognormal":
            with np.errstate(divide="ignore"):
                z = (np.log(np.maximum(x, 0.0)) - p[0]) / p[1]
            return special.ndtr(z)
        if fam == "pareto":
            a, x0 = p
            with np.errstate(divide="ignore"):
                tail = (x0 / np.maximum(x, x0)) ** a
            return np.where(x >= x0, 1.0 - tail, 0.0)
        out = np.zeros_like(x)
        for a, q in self.atoms():
            out = out + q * (x >= a)
        return np.minimum(out, 1.0)

    def quantile(self, u):
        """Left-continuous inverse of the cdf, vectorised over u in [0, 1)."""
        u = np.asarray(u, dtype=float)
        fam, p = self.family, self.params
        if fam == "exponential":
            return -np.log1p(-u) / p[0]
        if fam == "gamma":
            return special.gammaincinv(p[0], u) / p[1]
        if fam == "uniform":
            return p[0] + (p[1] - p[0]) * u
        if fam == "lognormal":
            return np.exp(p[0] + p[1] * special.ndtri(u))
        if fam == "pareto":
            a, x0 = p
            return x0 * (1.0 - u) ** (-1.0 / a)
        atoms = np.array([a for a, _ in self.atoms()])
        cum = np.cumsum([q for _, q in self.atoms()])
        idx = np.searchsorted(cum, u, side="right")
        return atoms[np.minimum(idx, len(atoms) - 1)]

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        fam, p = self.family, self.params
        if fam == "exponential":
            return rng.exponential(1.0 / p[0], size)
        if fam == "gamma":
            return rng.gamma(p[0], 1.0 / p[1], size)
        if fam == "uniform":
            return rng.uniform(p[0], p[1], size)
        if fam == "lognormal":
            return rng.lognormal(p[0], p[1], size)
        if fam == "pareto":
            return p[1] * (1.0 + rng.pareto(p[0], size))
        if fam == "deterministic":
            return np.full(size, p[0])
        return self.quantile(rng.random(size))

    # -- serialisation ----------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        if self.family == "discrete":
            return {"family": "discrete", "support": [[a, q] for a, q in self.params]}
        out: dict[str, Any] = {"family": self.family}
        out.update(zip(_PARAM_NAMES[self.family], self.params))
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> StepLaw:
        d = dict(d)
        fam = d.pop("family", None)
        if fam not in FAMILIES:
            raise ValueError(f"unknown family {fam!r}")
        if fam == "discrete":
            support = d.pop("support", None)
            if d or support is None:
                raise ValueError("discrete law takes exactly one key: support")
            return cls.discrete(support)
        names = _PARAM_NAMES[fam]
        if set(d) != set(names):
            raise ValueError(f"{fam} takes exactly the keys {names}")
        return cls(fam, tuple(d[k] for k in names))

    def __str__(self) -> str:
        if self.family == "discrete":
            return f"discrete({list(self.params)})"
        return f"{self.family}({', '.join(f'{v:g}' for v in self.params)})"


@dataclass(frozen=True)
class MomentSummary:
    m: float
    m2: float
    s2: float
    eta_mean: float
    eta_half_finite: bool
    eta_alpha: float
    lattice: float | None


@dataclass(frozen=True)
class JointStepModel:
    """Joint law of (xi, eta).

    ``equal`` makes eta the same variate as xi; ``comonotone`` pushes one
    uniform through both quantile functions.
    """

    coupling: str
    xi: StepLaw
    eta: StepLaw

    def __post_init__(self) -> None:
        if self.coupling not in COUPLINGS:
            raise ValueError(f"unknown coupling {self.coupling!r}")
        if self.coupling == "equal" and self.eta != self.xi:
            raise ValueError("equal coupling requires eta law == xi law")

    @classmethod
    def independent(cls, xi: StepLaw, eta: StepLaw) -> JointStepModel:
        return cls("independent", xi, eta)

    @classmethod
    def equal(cls, xi: StepLaw) -> JointStepModel:
        return cls("equal", xi, xi)

    @classmethod
    def comonotone(cls, xi: StepLaw, eta: StepLaw) -> JointStepModel:
        return cls("comonotone", xi, eta)

    def sample_pairs(self, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
        """Draw ``size`` pairs. The consumption order of ``rng`` is fixed:
        xi block first, then eta block (independent coupling)."""
        if self.coupling == "equal":
            x = self.xi.sample(rng, size)
            return x, x
        if self.coupling == "comonotone":
            u = rng.random(size)
            return self.xi.quantile(u), self.eta.quantile(u)
        x = self.xi.sample(rng, size)
        return x, self.eta.sample(rng, size)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"coupling": self.coupling, "xi": self.xi.to_dict()}
        if self.coupling != "equal":
            out["eta"] = self.eta.to_dict()
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> JointStepModel:
        extra = set(d) - {"coupling", "xi", "eta"}
        if extra:
            raise ValueError(f"unknown model keys {sorted(extra)}")
        coupling = d.get("coupling")
        xi = StepLaw.from_dict(d["xi"])
        if coupling == "equal":
            if "eta" in d and StepLaw.from_dict(d["eta"]) != xi:
                raise ValueError("equal coupling requires eta law == xi law")
            return cls.equal(xi)
        if "eta" not in d:
            raise ValueError(f"{coupling} coupling needs an eta law")
        return cls(coupling, xi, StepLaw.from_dict(d["eta"]))

    def __str__(self) -> str:
        if self.coupling == "equal":
            return f"equal({self.xi})"
        return f"{self.coupling}({self.xi}, {self.eta})"


def sample_step(model: JointStepModel, rng: np.random.Generator) -> tuple[float, float]:
    x, e = model.sample_pairs(rng, 1)
    return float(x[0]), float(e[0])


def moments(model: JointStepModel) -> MomentSummary:
    xi, eta = model.xi, model.eta
    finite = [a for a in MOMENT_TABLE if eta.has_moment(a)]
    if eta.family == "pareto":
        alpha = finite[-1] if finite else 0.0
    else:
        alpha = math.inf
    return MomentSummary(
        m=xi.mean(),
        m2=xi.second_moment(),
        s2=xi.variance(),
        eta_mean=eta.mean(),
        eta_half_finite=eta.has_moment(0.5),
        eta_alpha=alpha,
        lattice=xi.lattice_span,
    )


def rate_constant_bV(mom: MomentSummary) -> float:
    """b_V = m^-1 (E xi^2 / (2m) - E eta)."""
    if not (math.isfinite(mom.m2) and math.isfinite(mom.eta_mean)):
        raise InfiniteMomentError("b_V needs E xi^2 < inf and E eta < inf")
    return (mom.m2 / (2 * mom.m) - mom.eta_mean) / mom.m


def renewal_constant_bU(mom: MomentSummary) -> float:
    if not math.isfinite(mom.m2):
        raise InfiniteMomentError("b_U needs E xi^2 < inf")
    return mom.m2 / (2 * mom.m * mom.m)


def lorden_constant(mom: MomentSummary) -> float:
    """c_U = E xi^2 / m^2."""
    if not math.isfinite(mom.m2):
        raise InfiniteMomentError("c_U needs E xi^2 < inf")
    return mom.m2 / mom.m**2


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def variance_constant(j: int, mom: MomentSummary) -> float:
    """s^2 / ((2j-1) ((j-1)!)^2 m^(2j+1))."""
    if j < 1:
        raise ValueError("j must be >= 1")
    if not (math.isfinite(mom.s2) and mom.s2 > 0):
        raise InfiniteMomentError("variance constant needs 0 < s^2 < inf")
    if j > 20:
        logc = (
            math.log(mom.s2)
            - math.log(2 * j - 1)
            - 2 * log_factorial(j - 1)
            - (2 * j + 1) * math.log(mom.m)
        )
        return math.exp(logc)
    return mom.s2 / ((2 * j - 1) * math.factorial(j - 1) ** 2 * mom.m ** (2 * j + 1))


def flt_scale(j: int, t: float, mom: MomentSummary) -> float:
    """sqrt(m^(-2j-1) s^2 t^(2j-1)) / (j-1)!."""
    if not (math.isfinite(mom.s2) and mom.s2 > 0):
        raise InfiniteMomentError("FLT scale needs 0 < s^2 < inf")
    if t <= 0:
        raise ValueError("t must be positive")
    log_scale = 0.5 * (
        (-2 * j - 1) * math.log(mom.m) + math.log(mom.s2) + (2 * j - 1) * math.log(t)
    )
    if j <= 20:
        return math.sqrt(mom.m ** (-2 * j - 1) * mom.s2 * t ** (2 * j - 1)) / math.factorial(j - 1)
    return math.exp(log_scale - log_factorial(j - 1))

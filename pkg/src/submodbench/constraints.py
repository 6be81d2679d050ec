"""Cost models: linear costs and the chance-constraint surrogates.

A ``CostModel`` maps a bitstring ``x`` to a scalar cost and carries the
bound ``B``; ``x`` is feasible iff ``cost(x) <= B`` (plain float ``<=``).

The surrogates assume each element cost is uniform on
``[a(v) - delta, a(v) + delta]``:

    chebyshev:  a(x) + delta * sqrt((1 - alpha) / (3 alpha) * |x|_1)
    chernoff:   a(x) + delta * sqrt(2 ln(1/alpha) * |x|_1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

DETERMINISTIC_KINDS = ("uniform", "linear_degree", "quadratic_degree", "explicit")
CHANCE_KINDS = ("chebyshev", "chernoff")
KINDS = DETERMINISTIC_KINDS + CHANCE_KINDS


class CostModelError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CostModel:
    kind: str
    base_costs: np.ndarray
    budget: float
    delta: float | None = None
    alpha: float | None = None
    # surrogate term per selected element, only for chance kinds
    _spread: float = field(init=False, repr=False, default=0.0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CostModelError(f"unknown cost kind {self.kind!r}")
        costs = np.ascontiguousarray(self.base_costs, dtype=np.float64).reshape(-1)
        if np.any(costs < 0) or not np.all(np.isfinite(costs)):
            raise CostModelError("base costs must be finite and non-negative")
        if not self.budget >= 0:
            raise CostModelError(f"budget must be non-negative, got {self.budget}")
        costs.setflags(write=False)
        object.__setattr__(self, "base_costs", costs)
        object.__setattr__(self, "budget", float(self.budget))
        if self.kind in CHANCE_KINDS:
            if self.delta is None or self.alpha is None:
                raise CostModelError(f"{self.kind} needs delta and alpha")
            if not self.delta >= 0:
                raise CostModelError(f"delta must be non-negative, got {self.delta}")
            if not 0 < self.alpha <= 0.5:
                raise CostModelError(f"alpha must lie in (0, 1/2], got {self.alpha}")
            if self.kind == "chebyshev":
                spread = (1 - self.alpha) / (3 * self.alpha)
            else:
                spread = 2 * math.log(1 / self.alpha)
            object.__setattr__(self, "_spread", spread)

    @property
    def dimension(self) -> int:
        return len(self.base_costs)

    @property
    def is_chance(self) -> bool:
        return self.kind in CHANCE_KINDS

    def __call__(self, x) -> float:
        return cost(self, x)

    # constructors ------------------------------------------------------------

    @classmethod
    def uniform(cls, n: int, budget: float):
        return cls("uniform", np.ones(n), budget)

    @classmethod
    def linear_degree(cls, degree, budget: float):
        return cls("linear_degree", 1.0 + np.asarray(degree, dtype=float), budget)

    @classmethod
    def quadratic_degree(cls, degree, budget: float):
        return cls("quadratic_degree", (1.0 + np.asarray(degree, dtype=float)) ** 2, budget)

    @classmethod
    def explicit(cls, costs, budget: float):
        return cls("explicit", costs, budget)

    @classmethod
    def chebyshev(cls, expected_costs, budget: float, delta: float, alpha: float):
        return cls("chebyshev", expected_costs, budget, delta, alpha)

    @classmethod
    def chernoff(cls, expected_costs, budget: float, delta: float, alpha: float):
        return cls("chernoff", expected_costs, budget, delta, alpha)


def _check(model: CostModel, x):
    if len(x) != model.dimension:
        raise ValueError(f"bitstring length {len(x)} != cost model dimension {model.dimension}")


def expected_cost(model: CostModel, x) -> float:
    """``a(x)``: the sum of base costs of the selected elements."""
    _check(model, x)
    return kernels.weighted_sum(model.base_costs, x)


def _surrogate(model: CostModel, x, kind: str) -> float:
    if model.kind != kind:
        raise CostModelError(f"cost model is {model.kind!r}, not {kind!r}")
    ones = int(np.count_nonzero(x))
    return expected_cost(model, x) + model.delta * math.sqrt(model._spread * ones)


def cost_chebyshev(model: CostModel, x) -> float:
    return _surrogate(model, x, "chebyshev")


def cost_chernoff(model: CostModel, x) -> float:
    return _surrogate(model, x, "chernoff")


def cost(model: CostModel, x) -> float:
    if model.is_chance:
        return _surrogate(model, x, model.kind)
    return expected_cost(model, x)


def cost_batch(model: CostModel, X: np.ndarray) -> np.ndarray:
    """Costs of every row of ``X`` (numpy only; used by the exact oracles)."""
    X = np.asarray(X)
    base = X @ model.base_costs
    if model.is_chance:
        base = base + model.delta * np.sqrt(model._spread * X.sum(axis=1))
    return base


# --- "kind[:key=value,...]" configuration strings ---------------------------

_ALIASES = {
    "uniform": "uniform",
    "linear-degree": "linear_degree",
    "linear_degree": "linear_degree",
    "quadratic-degree": "quadratic_degree",
    "quadratic_degree": "quadratic_degree",
    "explicit": "explicit",
    "chebyshev": "chebyshev",
    "chernoff": "chernoff",
}


@dataclass(frozen=True)
class CostSpec:
    """Parsed cost configuration, not yet bound to an instance."""

    kind: str
    budget: float | None = None
    delta: float | None = None
    alpha: float | None = None
    base: str = "uniform"

    def label(self) -> str:
        parts = [self.kind.replace("_", "-")]
        params = []
        if self.kind in CHANCE_KINDS:
            params += [f"base={self.base.replace('_', '-')}", f"delta={self.delta:g}", f"alpha={self.alpha:g}"]
        if self.budget is not None:
            params.append(f"budget={self.budget:g}")
        return parts[0] + (":" + ",".join(params) if params else "")


def parse_cost_spec(text: str) -> CostSpec:
    """Parse strings such as ``uniform``, ``linear-degree:budget=500`` or
    ``chernoff:delta=1,alpha=0.1,base=linear-degree,budget=500``."""
    head, _, tail = text.strip().partition(":")
    kind = _ALIASES.get(head.strip().lower())
    if kind is None:
        raise CostModelError(f"unknown cost kind {head!r}")
    values: dict[str, str] = {}
    for item in filter(None, (p.strip() for p in tail.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise CostModelError(f"expected key=value, got {item!r}")
        values[key.strip().lower()] = value.strip()
    unknown = set(values) - {"budget", "delta", "alpha", "base"}
    if unknown:
        raise CostModelError(f"unknown cost parameters {sorted(unknown)}")
    if kind not in CHANCE_KINDS and ({"delta", "alpha", "base"} & set(values)):
        raise CostModelError(f"{head} takes only a budget parameter")
    try:
        budget = float(values["budget"]) if "budget" in values else None
        delta = float(values["delta"]) if "delta" in values else None
        alpha = float(values["alpha"]) if "alpha" in values else None
    except ValueError as exc:
        raise CostModelError(str(exc)) from None
    base = _ALIASES.get(values.get("base", "uniform").lower())
    if base not in ("uniform", "linear_degree", "quadratic_degree"):
        raise CostModelError(f"unsupported base cost {values.get('base')!r}")
    if kind in CHANCE_KINDS:
        if delta is None or alpha is None:
            raise CostModelError(f"{kind} needs delta and alpha")
        if not 0 < alpha <= 0.5:
            raise CostModelError(f"alpha must lie in (0, 1/2], got {alpha}")
    return CostSpec(kind, budget, delta, alpha, base)


def build_cost_model(spec: CostSpec, degree, default_budgets: dict[str, float]) -> CostModel:
    """Bind ``spec`` to an instance given its per-element degree array.

    ``default_budgets`` maps a linear kind to the bound used when the spec
    leaves it open; chance kinds default to the bound of their base kind.
    """
    degree = np.asarray(degree, dtype=float)
    linear = spec.base if spec.kind in CHANCE_KINDS else spec.kind
    if linear == "explicit":
        raise CostModelError("explicit costs cannot be built from a spec string")
    budget = spec.budget if spec.budget is not None else default_budgets.get(linear)
    if budget is None:
        raise CostModelError(f"no default budget for {linear!r}; pass budget=...")
    costs = {
        "uniform": np.ones(len(degree)),
        "linear_degree": 1.0 + degree,
        "quadratic_degree": (1.0 + degree) ** 2,
    }[linear]
    if spec.kind in CHANCE_KINDS:
        return CostModel(spec.kind, costs, budget, spec.delta, spec.alpha)
    return CostModel(linear, costs, budget)

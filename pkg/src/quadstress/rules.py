"""Quadrature rule generators: composite Newton-Cotes, Gauss-Legendre,
Clenshaw-Curtis, and explicit node/weight lists.

All rules are immutable after construction and every operation here is a pure
function of its inputs, so rules can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    ConstructionError,
    EvaluationError,
    NonConvergenceError,
    UnsupportedDegreeError,
)

__all__ = [
    "Interval",
    "QuadratureRule",
    "RuleFamily",
    "newton_cotes_base",
    "composite",
    "gauss_legendre",
    "clenshaw_curtis",
    "apply",
    "family_from_name",
    "FAMILY_NAMES",
]


@dataclass(frozen=True)
class Interval:
    """Integration region [a, b] with a < b."""

    a: float
    b: float

    def __post_init__(self):
        a = float(self.a)
        b = float(self.b)
        if not (np.isfinite(a) and np.isfinite(b)):
            raise ConstructionError("interval endpoints must be finite")
        if not a < b:
            raise ConstructionError(f"interval requires a < b, got [{a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return self.b - self.a


def _readonly(arr) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class QuadratureRule:
    """Weighted nodes on an interval; one member of a rule sequence."""

    interval: Interval
    nodes: np.ndarray
    weights: np.ndarray
    label: str = ""

    def __post_init__(self):
        nodes = _readonly(self.nodes)
        weights = _readonly(self.weights)
        if nodes.ndim != 1 or weights.ndim != 1:
            raise ConstructionError("nodes and weights must be 1-d")
        if len(nodes) != len(weights) or len(nodes) < 1:
            raise ConstructionError(
                f"need len(nodes) == len(weights) >= 1, got {len(nodes)} and {len(weights)}"
            )
        if not np.all(np.isfinite(nodes)) or not np.all(np.isfinite(weights)):
            raise ConstructionError("nodes and weights must be finite")
        if np.any(np.diff(nodes) <= 0):
            raise ConstructionError("nodes must be strictly increasing")
        if nodes[0] < self.interval.a or nodes[-1] > self.interval.b:
            raise ConstructionError(
                "rule is not internal: nodes extend outside the interval"
            )
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.nodes)

    def apply(self, f) -> float:
        return apply(self, f)


def apply(rule: QuadratureRule, f) -> float:
    """Apply the rule to f: the weighted sum of node values, accumulated with
    compensated summation.

    f may be vectorized (ndarray -> ndarray) or scalar (float -> float).
    """
    nodes = rule.nodes
    values = None
    try:
        candidate = f(nodes)
    except (TypeError, ValueError):
        candidate = None
    if candidate is not None:
        candidate = np.asarray(candidate, dtype=np.float64)
        if candidate.shape == nodes.shape:
            values = candidate
    if values is None:
        values = np.array([float(f(x)) for x in nodes])
    if not np.all(np.isfinite(values)):
        i = int(np.flatnonzero(~np.isfinite(values))[0])
        raise EvaluationError(
            f"integrand returned {values[i]!r} at node x={nodes[i]!r} (index {i})"
        )
    return _kernels.compensated_dot(rule.weights, values)


# Closed Newton-Cotes weights on [0, 1], exact rationals per degree.
_NEWTON_COTES = {
    1: ([1, 1], 2),
    2: ([1, 4, 1], 6),
    3: ([1, 3, 3, 1], 8),
    4: ([7, 32, 12, 32, 7], 90),
    5: ([19, 75, 50, 50, 75, 19], 288),
    6: ([41, 216, 27, 272, 27, 216, 41], 840),
    7: ([751, 3577, 1323, 2989, 2989, 1323, 3577, 751], 17280),
    8: ([989, 5888, -928, 10496, -4540, 10496, -928, 5888, 989], 28350),
}

_NC_LABELS = {1: "trapezoid", 2: "simpson"}

UNIT = Interval(0.0, 1.0)


def newton_cotes_base(degree: int) -> QuadratureRule:
    """Closed Newton-Cotes rule of the given degree on [0, 1]."""
    if degree not in _NEWTON_COTES:
        raise UnsupportedDegreeError(
            f"newton_cotes_base supports degrees 1..8, got {degree}"
        )
    numerators, denominator = _NEWTON_COTES[degree]
    nodes = np.arange(degree + 1, dtype=np.float64) / degree
    weights = np.array(numerators, dtype=np.float64) / denominator
    label = _NC_LABELS.get(degree, f"newton-cotes-{degree}")
    return QuadratureRule(UNIT, nodes, weights, label)


def newton_cotes_exactness(degree: int) -> int:
    # Even-degree closed rules pick up one extra degree of exactness.
    return degree + 1 if degree % 2 == 0 else degree


def composite(base: QuadratureRule, m: int, interval: Interval) -> QuadratureRule:
    """Map a base rule on [0, 1] onto m equal subintervals of the interval.

    Coincident nodes at shared subinterval endpoints are merged by summing
    their weights, keeping the node list strictly increasing.
    """
    if m < 1:
        raise ConstructionError(f"composite requires m >= 1, got {m}")
    if base.interval.a != 0.0 or base.interval.b != 1.0:
        raise ConstructionError("composite base rule must live on [0, 1]")
    a, b = interval.a, interval.b
    h = (b - a) / m
    t = base.nodes
    nodes_parts = []
    weights_parts = []
    for j in range(m):
        # Endpoint-exact affine maps so shared endpoints compare equal.
        lo = (a * (m - j) + b * j) / m
        hi = (a * (m - j - 1) + b * (j + 1)) / m
        xj = lo * (1.0 - t) + hi * t
        wj = base.weights * h
        if nodes_parts and xj[0] == nodes_parts[-1][-1]:
            weights_parts[-1] = weights_parts[-1].copy()
            weights_parts[-1][-1] += wj[0]
            xj = xj[1:]
            wj = wj[1:]
        if len(xj):
            nodes_parts.append(xj)
            weights_parts.append(wj)
    nodes = np.concatenate(nodes_parts)
    weights = np.concatenate(weights_parts)
    return QuadratureRule(interval, nodes, weights, f"composite-{base.label}-{m}")


def _legendre_pair(x: np.ndarray, n: int):
    """P_n(x) and P_{n-1}(x) by the three-term recurrence."""
    pm1 = np.ones_like(x)
    p = x.copy()
    for j in range(2, n + 1):
        pm1, p = p, ((2 * j - 1) * x * p - (j - 1) * pm1) / j
    return p, pm1


_GL_MAX_N = 4096
_GL_TOL = 1e-15
_GL_MAX_ITER = 100


def gauss_legendre(n: int, interval: Interval) -> QuadratureRule:
    """Gauss-Legendre rule with n nodes.

    Roots of the degree-n Legendre polynomial by Newton iteration from the
    asymptotic initial guess cos(pi*(i - 1/4)/(n + 1/2)); a root counts as
    converged once its Newton update drops to 1e-15.
    """
    if not 1 <= n <= _GL_MAX_N:
        raise ConstructionError(f"gauss_legendre requires 1 <= n <= {_GL_MAX_N}, got {n}")
    i = np.arange(1, n + 1, dtype=np.float64)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    if n == 1:
        x = np.zeros(1)
    done = np.zeros(n, dtype=bool)
    for _ in range(_GL_MAX_ITER):
        p, pm1 = _legendre_pair(x, n)
        dp = n * (x * p - pm1) / (x * x - 1.0)
        dx = p / dp
        dx[done] = 0.0
        x = x - dx
        done |= np.abs(dx) <= _GL_TOL
        if done.all():
            break
    else:
        raise NonConvergenceError(
            f"Legendre root finder stalled at index {int(np.argmax(~done))} for n={n}"
        )
    p, pm1 = _legendre_pair(x, n)
    dp = n * (x * p - pm1) / (x * x - 1.0) if n > 1 else np.ones(1)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    x = x[::-1].copy()
    w = w[::-1].copy()
    a, b = interval.a, interval.b
    nodes = (a * (1.0 - x) + b * (1.0 + x)) / 2.0
    weights = w * (b - a) / 2.0
    return QuadratureRule(interval, nodes, weights, f"gauss-legendre-{n}")


def clenshaw_curtis(n: int, interval: Interval) -> QuadratureRule:
    """Clenshaw-Curtis rule on n Chebyshev extrema, exact through degree n-1."""
    if n < 2:
        raise ConstructionError(f"clenshaw_curtis requires n >= 2, got {n}")
    N = n - 1
    theta = np.pi * np.arange(n, dtype=np.float64) / N
    t = np.cos(theta)
    w = np.empty(n)
    ii = np.arange(1, N)
    v = np.ones(N - 1)
    if N % 2 == 0:
        w_end = 1.0 / (N * N - 1)
        for kk in range(1, N // 2):
            v -= 2.0 * np.cos(2.0 * kk * theta[ii]) / (4.0 * kk * kk - 1)
        v -= np.cos(N * theta[ii]) / (N * N - 1)
    else:
        w_end = 1.0 / (N * N)
        for kk in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2.0 * kk * theta[ii]) / (4.0 * kk * kk - 1)
    w[0] = w_end
    w[-1] = w_end
    w[1:-1] = 2.0 * v / N
    t = t[::-1].copy()
    w = w[::-1].copy()
    a, b = interval.a, interval.b
    nodes = (a * (1.0 - t) + b * (1.0 + t)) / 2.0
    weights = w * (b - a) / 2.0
    return QuadratureRule(interval, nodes, weights, f"clenshaw-curtis-{n}")


@dataclass(frozen=True)
class RuleFamily:
    """A sequence of rules indexed by size, with node count nondecreasing."""

    kind: str
    interval: Interval
    base_degree: int | None = None
    explicit_rules: tuple = field(default=None)

    COMPOSITE = "composite-newton-cotes"
    GAUSS = "gauss-legendre"
    CLENSHAW = "clenshaw-curtis"
    EXPLICIT = "explicit"

    def __post_init__(self):
        if self.kind == self.COMPOSITE:
            if self.base_degree not in _NEWTON_COTES:
                raise UnsupportedDegreeError(
                    f"composite family needs base degree 1..8, got {self.base_degree}"
                )
        elif self.kind == self.EXPLICIT:
            rules = tuple(self.explicit_rules or ())
            if not rules:
                raise ConstructionError("explicit family needs at least one rule")
            counts = [len(r) for r in rules]
            if any(c2 < c1 for c1, c2 in zip(counts, counts[1:])):
                raise ConstructionError(
                    "explicit family node counts must be nondecreasing"
                )
            object.__setattr__(self, "explicit_rules", rules)
        elif self.kind not in (self.GAUSS, self.CLENSHAW):
            raise ConstructionError(f"unknown rule family kind {self.kind!r}")

    @classmethod
    def composite_newton_cotes(cls, degree: int, interval: Interval) -> "RuleFamily":
        return cls(cls.COMPOSITE, interval, base_degree=degree)

    @classmethod
    def gauss_legendre(cls, interval: Interval) -> "RuleFamily":
        return cls(cls.GAUSS, interval)

    @classmethod
    def clenshaw_curtis(cls, interval: Interval) -> "RuleFamily":
        return cls(cls.CLENSHAW, interval)

    @classmethod
    def explicit(cls, rules, interval: Interval) -> "RuleFamily":
        return cls(cls.EXPLICIT, interval, explicit_rules=tuple(rules))

    @property
    def label(self) -> str:
        if self.kind == self.COMPOSITE:
            base = _NC_LABELS.get(self.base_degree, f"newton-cotes-{self.base_degree}")
            return f"composite-{base}"
        return self.kind

    def rule(self, index: int) -> QuadratureRule:
        """Rule for a size index: subinterval count for composite families,
        node count for Gauss-Legendre and Clenshaw-Curtis, list position for
        explicit families."""
        if self.kind == self.COMPOSITE:
            return composite(newton_cotes_base(self.base_degree), index, self.interval)
        if self.kind == self.GAUSS:
            return gauss_legendre(index, self.interval)
        if self.kind == self.CLENSHAW:
            return clenshaw_curtis(index, self.interval)
        return self.explicit_rules[index]

    def index_for_node_target(self, target: int) -> int:
        """Smallest size index whose rule has at least target nodes."""
        if target < 1:
            raise ConstructionError(f"node target must be >= 1, got {target}")
        if self.kind == self.COMPOSITE:
            d = self.base_degree
            return max(1, -((1 - target) // d))  # ceil((target - 1) / d)
        if self.kind == self.GAUSS:
            return min(max(1, target), _GL_MAX_N)
        if self.kind == self.CLENSHAW:
            return max(2, target)
        for idx, r in enumerate(self.explicit_rules):
            if len(r) >= target:
                return idx
        return len(self.explicit_rules) - 1

    def exactness_degree(self, index: int) -> int:
        """Largest polynomial degree the rule at this index integrates exactly."""
        if self.kind == self.COMPOSITE:
            return newton_cotes_exactness(self.base_degree)
        if self.kind == self.GAUSS:
            return 2 * index - 1
        if self.kind == self.CLENSHAW:
            return index - 1
        raise ConstructionError("explicit families carry no exactness guarantee")


FAMILY_NAMES = (
    "composite-trapezoid",
    "composite-simpson",
    "gauss-legendre",
    "clenshaw-curtis",
)


def family_from_name(name: str, interval: Interval) -> RuleFamily:
    """Resolve a family name like composite-trapezoid or gauss-legendre."""
    key = name.strip().lower()
    if key == "composite-trapezoid":
        return RuleFamily.composite_newton_cotes(1, interval)
    if key == "composite-simpson":
        return RuleFamily.composite_newton_cotes(2, interval)
    if key.startswith("composite-newton-cotes-"):
        try:
            degree = int(key.rsplit("-", 1)[1])
        except ValueError:
            raise ConstructionError(f"bad composite family name {name!r}") from None
        return RuleFamily.composite_newton_cotes(degree, interval)
    if key == "gauss-legendre":
        return RuleFamily.gauss_legendre(interval)
    if key == "clenshaw-curtis":
        return RuleFamily.clenshaw_curtis(interval)
    raise ConstructionError(f"unknown rule family {name!r}")

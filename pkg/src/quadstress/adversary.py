"""Worst-case spline integrands built from a quadrature rule's nodes.

Each spline vanishes at every node, is made of shifted monomial pieces
sign*(x - center)**k + offset with unit leading coefficient, and has a
closed-form integral.  The global construction fills every gap between
consecutive nodes with a four-piece bump whose knots sit at the quarter
points of the gap; the local construction places a single bump on the
widest gap and is zero elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConstructionError, DiscontinuityError, DomainError
from .rules import Interval

__all__ = [
    "MonomialPiece",
    "AdversarialSpline",
    "build_global",
    "build_local",
    "unit_integral",
    "MAX_ORDER",
]

MAX_ORDER = 12  # (gap/4)**k must stay inside double range; see _guard_gap

GLOBAL = "global"
LOCAL = "local"

_TWO_SIDED_RTOL = 1e-9


def _check_order(k: int) -> int:
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise ConstructionError(f"smoothness order must be an integer, got {k!r}")
    if not 1 <= k <= MAX_ORDER:
        raise ConstructionError(f"smoothness order must be in 1..{MAX_ORDER}, got {k}")
    return int(k)


def _ipow(base: float, p: int) -> float:
    # Repeated multiplication, matching the evaluation kernels bit for bit.
    acc = 1.0
    for _ in range(p):
        acc *= base
    return acc


def _guard_gap(gap: float, k: int):
    cap = 2.0 * _ipow(0.25 * gap, k)
    integral = _ipow(gap, k + 1) / _ipow(4.0, k)
    if not (math.isfinite(cap) and math.isfinite(integral)):
        raise ConstructionError(
            f"gap {gap!r} with k={k} overflows double precision"
        )
    if gap > 0.0 and (cap == 0.0 or integral == 0.0):
        raise ConstructionError(
            f"gap {gap!r} with k={k} underflows double precision"
        )


@dataclass(frozen=True)
class MonomialPiece:
    """sign*(x - center)**k + offset on [lo, hi); sign 0 is the zero filler."""

    lo: float
    hi: float
    sign: int
    center: float
    offset: float
    k: int

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ConstructionError(f"piece sign must be -1, 0 or 1, got {self.sign}")
        if not self.lo < self.hi:
            raise ConstructionError(f"piece needs lo < hi, got [{self.lo}, {self.hi}]")

    def value(self, x: float) -> float:
        return self.sign * _ipow(x - self.center, self.k) + self.offset

    def derivative(self, x: float, order: int) -> float:
        if order > self.k:
            return 0.0
        fact = 1.0
        for j in range(self.k - order + 1, self.k + 1):
            fact *= j
        val = self.sign * fact * _ipow(x - self.center, self.k - order)
        if order == 0:
            val += self.offset
        return val

    def integral(self) -> float:
        up = _ipow(self.hi - self.center, self.k + 1)
        dn = _ipow(self.lo - self.center, self.k + 1)
        return self.sign * (up - dn) / (self.k + 1) + self.offset * (self.hi - self.lo)


@dataclass(frozen=True)
class AdversarialSpline:
    """A piecewise shifted-monomial integrand with its bad set.

    bad_set holds the points at which analyticity may fail: for the global
    kind with odd k these are the nodes and gap midpoints (where the order-k
    derivative jumps by 2*k!), for even k every knot including the analytic
    node and midpoint splices; for the local kind the bump's five knots
    (four when k is even, the midpoint splice being analytic).  Only knots
    interior to the interval are listed.
    """

    interval: Interval
    k: int
    pieces: tuple
    bad_set: np.ndarray
    kind: str
    source_nodes: np.ndarray

    def __post_init__(self):
        k = _check_order(self.k)
        object.__setattr__(self, "k", k)
        pieces = tuple(self.pieces)
        if not pieces:
            raise ConstructionError("spline needs at least one piece")
        if pieces[0].lo != self.interval.a or pieces[-1].hi != self.interval.b:
            raise ConstructionError("pieces must cover the interval exactly")
        for left, right in zip(pieces, pieces[1:]):
            if left.hi != right.lo:
                raise ConstructionError("pieces must be contiguous")
        if any(p.k != k for p in pieces):
            raise ConstructionError("piece order does not match spline order")
        if self.kind not in (GLOBAL, LOCAL):
            raise ConstructionError(f"kind must be 'global' or 'local', got {self.kind!r}")
        object.__setattr__(self, "pieces", pieces)

        bounds = np.array([p.lo for p in pieces] + [pieces[-1].hi])
        if np.any(np.diff(bounds) <= 0):
            raise ConstructionError("piece boundaries must be strictly increasing")
        for name, arr in (
            ("_bounds", bounds),
            ("_signs", np.array([float(p.sign) for p in pieces])),
            ("_centers", np.array([p.center for p in pieces])),
            ("_offsets", np.array([p.offset for p in pieces])),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

        nodes = np.ascontiguousarray(self.source_nodes, dtype=np.float64)
        nodes.setflags(write=False)
        object.__setattr__(self, "source_nodes", nodes)
        bad = np.ascontiguousarray(self.bad_set, dtype=np.float64)
        bad.setflags(write=False)
        object.__setattr__(self, "bad_set", bad)
        knots = set(self.knots.tolist())
        if not set(bad.tolist()) <= knots:
            raise ConstructionError("bad_set must be a subset of the knot set")

        # Cheap sanity: the function itself must be continuous at every knot.
        for left, right in zip(pieces, pieces[1:]):
            lv = left.value(left.hi)
            rv = right.value(right.lo)
            if abs(lv - rv) > 1e-9 * (1.0 + abs(lv)):
                raise ConstructionError(
                    f"pieces disagree at knot {left.hi!r}: {lv!r} vs {rv!r}"
                )

    @property
    def knots(self) -> np.ndarray:
        """Interior piece boundaries."""
        return self._bounds[1:-1]

    @property
    def min_piece_width(self) -> float:
        return float(np.min(np.diff(self._bounds)))

    def _check_domain(self, xs: np.ndarray):
        if xs.size and (xs.min() < self.interval.a or xs.max() > self.interval.b):
            bad = xs[(xs < self.interval.a) | (xs > self.interval.b)][0]
            raise DomainError(
                f"x={bad!r} outside [{self.interval.a}, {self.interval.b}]"
            )

    def eval(self, x):
        """Value at x (scalar or array); the covering piece is found by
        binary search, with the half-open convention at knots."""
        xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
        self._check_domain(xs)
        out = _kernels.eval_pieces(
            self._bounds, self._signs, self._centers, self._offsets, self.k, xs
        )
        return float(out[0]) if np.isscalar(x) or np.ndim(x) == 0 else out

    __call__ = eval

    def eval_derivative_many(self, x, order: int):
        """Vectorized derivative sampling with the half-open convention."""
        order = self._check_derivative_order(order)
        xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
        self._check_domain(xs)
        return _kernels.eval_pieces(
            self._bounds, self._signs, self._centers, self._offsets, self.k, xs,
            order=order,
        )

    def _check_derivative_order(self, order: int) -> int:
        if not isinstance(order, (int, np.integer)) or isinstance(order, bool):
            raise ConstructionError(f"derivative order must be an integer, got {order!r}")
        if not 0 <= order <= self.k:
            raise ConstructionError(
                f"derivative order must be in 0..{self.k}, got {order}"
            )
        return int(order)

    def _piece_index_left(self, x: float):
        idx = int(np.searchsorted(self._bounds, x, side="left")) - 1
        return idx if idx >= 0 else None

    def _piece_index_right(self, x: float):
        idx = int(np.searchsorted(self._bounds, x, side="right")) - 1
        return idx if idx <= len(self.pieces) - 1 else None

    def eval_derivative(self, x, order: int, side: str = "two_sided") -> float:
        """Exact derivative of the covering piece at x.

        At a knot, side='left'/'right' selects the adjacent piece;
        'two_sided' requires the one-sided values to agree to 1e-9 relative
        and raises DiscontinuityError (carrying both values) otherwise.
        """
        order = self._check_derivative_order(order)
        x = float(x)
        self._check_domain(np.array([x]))
        li = self._piece_index_left(x)
        ri = self._piece_index_right(x)
        left = self.pieces[li].derivative(x, order) if li is not None else None
        right = self.pieces[ri].derivative(x, order) if ri is not None else None
        if side == "left":
            if left is None:
                raise DomainError(f"no left neighborhood at x={x!r}")
            return left
        if side == "right":
            if right is None:
                raise DomainError(f"no right neighborhood at x={x!r}")
            return right
        if side != "two_sided":
            raise ConstructionError(f"side must be left/right/two_sided, got {side!r}")
        if left is None:
            return right
        if right is None:
            return left
        if left != right and abs(left - right) > _TWO_SIDED_RTOL * max(abs(left), abs(right)):
            raise DiscontinuityError(
                f"one-sided order-{order} derivatives at x={x!r} disagree: "
                f"{left!r} vs {right!r}",
                left,
                right,
            )
        return 0.5 * (left + right)

    def jump_at(self, knot: float, order: int | None = None) -> float:
        """Signed right-minus-left derivative jump at a knot (default order k)."""
        order = self.k if order is None else self._check_derivative_order(order)
        li = self._piece_index_left(float(knot))
        ri = self._piece_index_right(float(knot))
        if li is None or ri is None or li == ri:
            return 0.0
        return self.pieces[ri].derivative(knot, order) - self.pieces[li].derivative(
            knot, order
        )

    def jump_knots(self) -> np.ndarray:
        """Knots where the order-k derivative genuinely jumps.

        Exact by construction: the order-k derivative of a piece is
        sign * k!, so a jump happens exactly where adjacent signs differ.
        """
        signs = self._signs
        mask = signs[1:] != signs[:-1]
        return self.knots[mask]

    def exact_integral(self) -> float:
        """Closed-form integral: endpoint terms (x1-a)^(k+1)/(k+1) and
        (b-xn)^(k+1)/(k+1) plus gap^(k+1)/4^k per node gap (global), or the
        single widest-gap term (local)."""
        k = self.k
        nodes = self.source_nodes
        a, b = self.interval.a, self.interval.b
        if self.kind == LOCAL:
            lo, hi = _local_unit(nodes, self.interval)
            return unit_integral(hi - lo, k)
        terms = [
            _ipow(nodes[0] - a, k + 1) / (k + 1),
            _ipow(b - nodes[-1], k + 1) / (k + 1),
        ]
        terms.extend(unit_integral(g, k) for g in np.diff(nodes))
        return math.fsum(terms)

    def serialize(self) -> str:
        """Line-oriented text form; floats use shortest round-trip printing."""
        lines = [
            "# quadstress spline v1",
            f"interval {self.interval.a!r} {self.interval.b!r}",
            f"k {self.k}",
            f"kind {self.kind}",
            "nodes " + " ".join(repr(x) for x in self.source_nodes),
            "bad " + " ".join(repr(x) for x in self.bad_set),
        ]
        for p in self.pieces:
            lines.append(
                f"piece {p.lo!r} {p.hi!r} {p.sign} {p.center!r} {p.offset!r} {p.k}"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def deserialize(cls, text: str) -> "AdversarialSpline":
        interval = None
        k = None
        kind = None
        nodes = None
        bad = None
        pieces = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tag, _, rest = line.partition(" ")
            fields = rest.split()
            if tag == "interval":
                interval = Interval(float(fields[0]), float(fields[1]))
            elif tag == "k":
                k = int(fields[0])
            elif tag == "kind":
                kind = fields[0]
            elif tag == "nodes":
                nodes = np.array([float(v) for v in fields])
            elif tag == "bad":
                bad = np.array([float(v) for v in fields])
            elif tag == "piece":
                pieces.append(
                    MonomialPiece(
                        float(fields[0]),
                        float(fields[1]),
                        int(fields[2]),
                        float(fields[3]),
                        float(fields[4]),
                        int(fields[5]),
                    )
                )
            else:
                raise ConstructionError(f"unknown spline dump line {line!r}")
        if interval is None or k is None or kind is None or nodes is None or bad is None:
            raise ConstructionError("incomplete spline dump")
        return cls(interval, k, tuple(pieces), bad, kind, nodes)


def unit_integral(gap: float, k: int) -> float:
    """Integral of one basic bump over its gap: gap^(k+1)/4^k."""
    k = _check_order(k)
    gap = float(gap)
    if gap < 0:
        raise ConstructionError(f"gap must be nonnegative, got {gap}")
    if gap == 0.0:
        return 0.0
    _guard_gap(gap, k)
    return _ipow(gap, k + 1) / _ipow(4.0, k)


def _validate_nodes(nodes, interval: Interval) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(nodes, dtype=np.float64))
    if arr.ndim != 1 or arr.size < 1:
        raise ConstructionError("need at least one node")
    if not np.all(np.isfinite(arr)):
        raise ConstructionError("nodes must be finite")
    if np.any(np.diff(arr) <= 0):
        raise ConstructionError("nodes must be strictly increasing (no duplicates)")
    if arr[0] < interval.a or arr[-1] > interval.b:
        raise ConstructionError("nodes must lie inside the interval")
    return arr


def _gap_pieces(lo: float, hi: float, k: int) -> list:
    """The four pieces of one basic bump on [lo, hi]."""
    gap = hi - lo
    _guard_gap(gap, k)
    q1 = lo + 0.25 * gap
    q2 = lo + 0.5 * gap
    q3 = lo + 0.75 * gap
    if not lo < q1 < q2 < q3 < hi:
        raise ConstructionError(
            f"gap [{lo!r}, {hi!r}] too narrow to resolve quarter points"
        )
    cap = 2.0 * _ipow(0.25 * gap, k)
    inner = 1 if k % 2 == 1 else -1
    return [
        MonomialPiece(lo, q1, 1, lo, 0.0, k),
        MonomialPiece(q1, q2, inner, q2, cap, k),
        MonomialPiece(q2, q3, -1, q2, cap, k),
        MonomialPiece(q3, hi, -1 if k % 2 == 1 else 1, hi, 0.0, k),
    ]


def build_global(nodes, k: int, interval: Interval) -> AdversarialSpline:
    """The everywhere-active adversary: one basic bump per node gap plus the
    endpoint monomials; zero at every node with unit leading coefficients."""
    k = _check_order(k)
    arr = _validate_nodes(nodes, interval)
    odd = k % 2 == 1
    a, b = interval.a, interval.b
    pieces = []
    if arr[0] > a:
        _guard_gap(arr[0] - a, k)
        pieces.append(MonomialPiece(a, arr[0], -1 if odd else 1, arr[0], 0.0, k))
    for lo, hi in zip(arr, arr[1:]):
        pieces.extend(_gap_pieces(float(lo), float(hi), k))
    if arr[-1] < b:
        _guard_gap(b - arr[-1], k)
        pieces.append(MonomialPiece(arr[-1], b, 1, arr[-1], 0.0, k))

    mids = arr[:-1] + 0.5 * np.diff(arr)
    if odd:
        jump_nodes = arr[(arr > a) & (arr < b)]
        bad = np.sort(np.concatenate([jump_nodes, mids]))
    else:
        bounds = np.array([p.lo for p in pieces] + [b])
        bad = bounds[1:-1]
    return AdversarialSpline(interval, k, tuple(pieces), bad, GLOBAL, arr)


def _local_unit(nodes: np.ndarray, interval: Interval):
    """Endpoints of the widest gap; ties break to the lowest index.

    With a single node the unit goes on the larger of the two endpoint gaps,
    treating the interval endpoint as the other node.
    """
    if len(nodes) == 1:
        left = nodes[0] - interval.a
        right = interval.b - nodes[0]
        if left >= right:
            return interval.a, float(nodes[0])
        return float(nodes[0]), interval.b
    gaps = np.diff(nodes)
    i = int(np.argmax(gaps))
    return float(nodes[i]), float(nodes[i + 1])


def build_local(nodes, k: int, interval: Interval) -> AdversarialSpline:
    """The single-bump adversary: one basic bump on the widest node gap,
    identically zero everywhere else."""
    k = _check_order(k)
    arr = _validate_nodes(nodes, interval)
    a, b = interval.a, interval.b
    lo, hi = _local_unit(arr, interval)
    if hi - lo <= 0:
        raise ConstructionError("maximal gap is empty; cannot place the bump")
    pieces = []
    if lo > a:
        pieces.append(MonomialPiece(a, lo, 0, lo, 0.0, k))
    unit = _gap_pieces(lo, hi, k)
    pieces.extend(unit)
    if hi < b:
        pieces.append(MonomialPiece(hi, b, 0, hi, 0.0, k))

    q1, q2, q3 = unit[0].hi, unit[1].hi, unit[2].hi
    if k % 2 == 1:
        listed = [lo, q1, q2, q3, hi]
    else:
        listed = [lo, q1, q3, hi]
    bad = np.array([t for t in listed if a < t < b])
    return AdversarialSpline(interval, k, tuple(pieces), bad, LOCAL, arr)

"""Run rule families against their adversaries and verify the quantitative
claims: error sequences, empirical convergence orders, lower-bound checks,
derivative smoothness verification, and an independent adaptive-quadrature
oracle for the closed-form integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as _cheb

from .adversary import GLOBAL, LOCAL, AdversarialSpline, build_global, build_local, _ipow
from .errors import (
    ConstructionError,
    InsufficientDataError,
    NonConvergenceError,
    QuadstressError,
)
from .rules import Interval, RuleFamily, apply

__all__ = [
    "ErrorRecord",
    "OrderFit",
    "BoundCheck",
    "SmoothnessReport",
    "error_sequence",
    "fit_order",
    "theorem1_bound_check",
    "theorem2_bound_check",
    "verify_smoothness",
    "oracle_integral",
    "adaptive_integral",
    "geometric_sizes",
]

# Records with abs_error below 10x this floor (scaled by (b-a)^(k+1)) would
# push denormals into the log-log fit; they are excluded.
UNDERFLOW_FLOOR = 1e-300


@dataclass(frozen=True)
class ErrorRecord:
    """One rule-vs-adversary measurement."""

    node_count: int
    rule_label: str
    quad_value: float
    exact_value: float
    abs_error: float
    nodes: np.ndarray | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class OrderFit:
    """Log-log regression of error against node count; slope is -order."""

    slope: float
    intercept: float
    r_squared: float
    n_range: tuple


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of a lower-bound assertion over an error sequence."""

    passed: bool
    worst_margin: float
    violator: ErrorRecord | None = None


@dataclass(frozen=True)
class SmoothnessReport:
    """Finite-difference findings at one knot."""

    knot: float
    max_matched_order: int
    jump_at_k: float
    is_bad: bool


def geometric_sizes(n_min: int, n_max: int, steps_per_octave: int = 2) -> list:
    """Node-count targets n_min * 2^(j/steps), deduplicated and increasing."""
    if n_min < 1 or n_min >= n_max:
        raise ConstructionError(f"need 1 <= n_min < n_max, got {n_min}, {n_max}")
    sizes = []
    j = 0
    while True:
        n = round(n_min * 2.0 ** (j / steps_per_octave))
        if n > n_max:
            break
        if not sizes or n > sizes[-1]:
            sizes.append(int(n))
        j += 1
    if sizes[-1] != n_max:
        sizes.append(n_max)
    return sizes


def error_sequence(family: RuleFamily, k: int, kind: str, sizes) -> list:
    """For each size index: generate the rule, build the matching adversary
    from its nodes, and record the quadrature value (expected ~0), the exact
    integral, and their absolute difference."""
    sizes = list(sizes)
    if not sizes:
        raise ConstructionError("sizes must be nonempty")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ConstructionError("sizes must be strictly increasing")
    if kind not in (GLOBAL, LOCAL):
        raise ConstructionError(f"kind must be 'global' or 'local', got {kind!r}")
    build = build_global if kind == GLOBAL else build_local
    records = []
    for size in sizes:
        try:
            rule = family.rule(size)
            spline = build(rule.nodes, k, family.interval)
            quad = apply(rule, spline.eval)
            exact = spline.exact_integral()
        except QuadstressError as exc:
            raise type(exc)(f"size {size}: {exc}") from exc
        records.append(
            ErrorRecord(
                node_count=len(rule),
                rule_label=rule.label,
                quad_value=quad,
                exact_value=exact,
                abs_error=abs(quad - exact),
                nodes=rule.nodes,
            )
        )
    return records


def fit_order(records, tail_fraction: float = 0.5, error_floor: float = 1e-299) -> OrderFit:
    """OLS of log(abs_error) on log(node_count) over the last tail_fraction
    of usable records; slope ~ -(empirical order)."""
    if not 0.0 < tail_fraction <= 1.0:
        raise ConstructionError(f"tail_fraction must be in (0, 1], got {tail_fraction}")
    usable = [r for r in records if r.abs_error > error_floor]
    usable.sort(key=lambda r: r.node_count)
    take = max(3, math.ceil(tail_fraction * len(usable)))
    tail = usable[-take:]
    if len(tail) < 3:
        raise InsufficientDataError(
            f"need at least 3 usable records, got {len(tail)}"
        )
    x = np.log([r.node_count for r in tail])
    y = np.log([r.abs_error for r in tail])
    xbar = x.mean()
    ybar = y.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    sxy = float(np.sum((x - xbar) * (y - ybar)))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    resid = y - (slope * x + intercept)
    sst = float(np.sum((y - ybar) ** 2))
    r2 = 1.0 if sst == 0.0 else 1.0 - float(np.sum(resid**2)) / sst
    return OrderFit(
        slope=slope,
        intercept=intercept,
        r_squared=r2,
        n_range=(tail[0].node_count, tail[-1].node_count),
    )


_EQUALITY_RTOL = 1e-12


def _theorem1_bound(record: ErrorRecord, k: int, interval: Interval) -> float:
    """Lower bound re-derived from actual node positions: endpoint terms are
    exact, the interior sum is minimized over gap placements at equal gaps
    (power-mean inequality), so equal spacing attains equality."""
    a, b = interval.a, interval.b
    if record.nodes is not None:
        nodes = record.nodes
        bound = _ipow(nodes[0] - a, k + 1) / (k + 1)
        bound += _ipow(b - nodes[-1], k + 1) / (k + 1)
        n = len(nodes)
        if n >= 2:
            bound += (n - 1) * _ipow((nodes[-1] - nodes[0]) / (n - 1), k + 1) / _ipow(4.0, k)
        return bound
    n = record.node_count
    return (n + 1) * _ipow((b - a) / (n + 1), k + 1) / _ipow(4.0, k)


def _bound_check(records, bound_fn) -> BoundCheck:
    worst = math.inf
    violator = None
    for record in records:
        bound = bound_fn(record)
        margin = (record.abs_error - bound) / bound
        if margin < worst:
            worst = margin
            if margin < -_EQUALITY_RTOL:
                violator = record
    return BoundCheck(passed=violator is None, worst_margin=worst, violator=violator)


def theorem1_bound_check(records, k: int, interval: Interval) -> BoundCheck:
    """Assert every global-adversary error sits on or above the node-derived
    closed-form lower bound; margin is relative to the bound."""
    return _bound_check(records, lambda r: _theorem1_bound(r, k, interval))


def theorem2_bound_check(records, k: int, interval: Interval) -> BoundCheck:
    """Assert every local-adversary error is at least
    (b-a)^(k+1)/4^k * (n+1)^(-(k+1)) with n the node count."""
    L = interval.length

    def bound(record: ErrorRecord) -> float:
        return _ipow(L, k + 1) / _ipow(4.0, k) / _ipow(float(record.node_count + 1), k + 1)

    return _bound_check(records, bound)


_DEFAULT_H_FACTORS = (1e-2, 5e-3, 2.5e-3)


def _one_sided_fd(spline: AdversarialSpline, knot: float, side: str, orders, h_list):
    """Collocation finite differences strictly on one side of a knot.

    For each step h, samples k+1 Chebyshev points in a window ending h away
    from the knot, interpolates the degree-k piece exactly, and
    differentiates the fit at the knot.  Returns the smallest-h estimates
    plus the spread across the h rungs (nonzero spread flags conditioning
    trouble; exact fits are h-independent).
    """
    k = spline.k
    if side == "left":
        idx = spline._piece_index_left(knot)
        width = knot - spline.pieces[idx].lo
        direction = -1.0
    else:
        idx = spline._piece_index_right(knot)
        width = spline.pieces[idx].hi - knot
        direction = 1.0
    u = np.cos(np.pi * np.arange(k + 1) / max(k, 1))
    rungs = {j: [] for j in orders}
    for h in h_list:
        h_eff = min(h, 0.3 * width)
        span = 0.9 * width - h_eff
        w_near = knot + direction * h_eff
        w_far = knot + direction * (h_eff + span)
        mid = 0.5 * (w_near + w_far)
        half = 0.5 * abs(w_far - w_near)
        xs = mid + half * u
        ys = spline.eval(xs)
        coef = _cheb.chebfit((xs - mid) / half, ys, k)
        ut = (knot - mid) / half
        for j in orders:
            rungs[j].append(float(_cheb.chebval(ut, _cheb.chebder(coef, j)) / half**j))
    est = {j: vals[-1] for j, vals in rungs.items()}
    spread = {j: max(vals) - min(vals) for j, vals in rungs.items()}
    return est, spread


def verify_smoothness(
    spline: AdversarialSpline,
    probe_orders: int | None = None,
    h_sequence=None,
) -> list:
    """Compare one-sided finite-difference derivative estimates against the
    exact piece derivatives at every knot.

    Reports the highest order that matches across the knot (finite
    differences agreeing with each other and with the exact one-sided
    derivatives to 1e-5*k!) plus the order-k jump; is_bad flags jumps above
    0.5*k!.
    """
    k = spline.k
    pmax = k if probe_orders is None else int(probe_orders)
    if not 0 <= pmax <= k:
        raise ConstructionError(f"probe_orders must be in 0..{k}, got {probe_orders}")
    if h_sequence is not None:
        hs = [float(h) for h in h_sequence]
        if not hs or any(b >= a for a, b in zip(hs, hs[1:])):
            raise ConstructionError("h_sequence must be strictly decreasing")
        nodes = spline.source_nodes
        gap_cap = (
            float(np.min(np.diff(nodes))) / 8.0
            if len(nodes) >= 2
            else spline.min_piece_width / 2.0
        )
        if hs[0] >= gap_cap or hs[-1] <= 0.0:
            raise ConstructionError(
                f"h_sequence must lie in (0, {gap_cap!r}), got {hs!r}"
            )
    else:
        hs = [f * spline.min_piece_width for f in _DEFAULT_H_FACTORS]

    # The jump is always probed at order k; probe_orders only limits the
    # matching depth.
    orders = sorted(set(range(0, pmax + 1)) | {k})
    match_tol = 1e-5 * math.factorial(k)
    jump_threshold = 0.5 * math.factorial(k)
    reports = []
    for knot in spline.knots:
        t = float(knot)
        left, left_spread = _one_sided_fd(spline, t, "left", orders, hs)
        right, right_spread = _one_sided_fd(spline, t, "right", orders, hs)
        matched = -1
        for j in range(0, pmax + 1):
            exact_l = spline.eval_derivative(t, j, side="left")
            exact_r = spline.eval_derivative(t, j, side="right")
            ok = (
                abs(left[j] - right[j]) < match_tol
                and abs(left[j] - exact_l) < match_tol
                and abs(right[j] - exact_r) < match_tol
                and left_spread[j] < match_tol
                and right_spread[j] < match_tol
            )
            if not ok:
                break
            matched = j
        jump = right[k] - left[k]
        reports.append(
            SmoothnessReport(
                knot=t,
                max_matched_order=matched,
                jump_at_k=jump,
                is_bad=abs(jump) > jump_threshold,
            )
        )
    return reports


_G10_CACHE = None


def _g10():
    global _G10_CACHE
    if _G10_CACHE is None:
        from .rules import gauss_legendre

        rule = gauss_legendre(10, Interval(0.0, 1.0))
        _G10_CACHE = (rule.nodes.copy(), rule.weights.copy())
    return _G10_CACHE


def _panels(f, los, his):
    """Single 10-point Gauss panel per segment, vectorized over segments."""
    t, w = _g10()
    lengths = his - los
    xs = los[:, None] + lengths[:, None] * t[None, :]
    ys = np.asarray(f(xs.ravel()), dtype=np.float64).reshape(xs.shape)
    return (ys @ w) * lengths


_ORACLE_INITIAL_SEGMENTS = 256
_ORACLE_MAX_DEPTH = 60


def adaptive_integral(f, a: float, b: float, rel_tol: float) -> float:
    """Globally adaptive quadrature for a black-box vectorized integrand.

    Each segment carries a 10-point Gauss estimate and its two-half
    refinement; their difference is the error estimate.  Segments above the
    equidistributed error budget are bisected until the total estimate is
    within rel_tol of the result or a segment hits depth 60.
    """
    if rel_tol < 1e-12:
        raise ConstructionError(f"rel_tol must be >= 1e-12, got {rel_tol}")
    edges = np.linspace(a, b, _ORACLE_INITIAL_SEGMENTS + 1)
    los = edges[:-1]
    his = edges[1:]
    mids = 0.5 * (los + his)
    left = _panels(f, los, mids)
    right = _panels(f, mids, his)
    single = _panels(f, los, his)
    fine = left + right
    err = np.abs(fine - single)
    depth = np.zeros(len(los), dtype=np.int64)

    while True:
        total = math.fsum(fine)
        total_err = math.fsum(err)
        if total_err == 0.0 or total_err <= rel_tol * abs(total):
            return total
        budget = rel_tol * abs(total) / len(los)
        mask = err > budget
        if not mask.any():
            mask = err >= err.max()
        if np.any(depth[mask] >= _ORACLE_MAX_DEPTH):
            raise NonConvergenceError(
                f"adaptive quadrature exceeded depth {_ORACLE_MAX_DEPTH}"
            )
        s_los, s_his, s_mids = los[mask], his[mask], mids[mask]
        c_los = np.concatenate([s_los, s_mids])
        c_his = np.concatenate([s_mids, s_his])
        c_mids = 0.5 * (c_los + c_his)
        c_left = _panels(f, c_los, c_mids)
        c_right = _panels(f, c_mids, c_his)
        c_single = np.concatenate([left[mask], right[mask]])
        c_fine = c_left + c_right
        c_err = np.abs(c_fine - c_single)
        c_depth = np.concatenate([depth[mask], depth[mask]]) + 1

        keep = ~mask
        los = np.concatenate([los[keep], c_los])
        his = np.concatenate([his[keep], c_his])
        mids = np.concatenate([mids[keep], c_mids])
        left = np.concatenate([left[keep], c_left])
        right = np.concatenate([right[keep], c_right])
        fine = np.concatenate([fine[keep], c_fine])
        err = np.concatenate([err[keep], c_err])
        depth = np.concatenate([depth[keep], c_depth])
        order = np.argsort(los, kind="stable")
        los, his, mids = los[order], his[order], mids[order]
        left, right = left[order], right[order]
        fine, err, depth = fine[order], err[order], depth[order]


def oracle_integral(spline: AdversarialSpline, rel_tol: float = 1e-10) -> float:
    """Numerically integrate the spline as a black box (no piece knowledge);
    independent cross-check of exact_integral."""
    return adaptive_integral(
        spline.eval, spline.interval.a, spline.interval.b, rel_tol
    )

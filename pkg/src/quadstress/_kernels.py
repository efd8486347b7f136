"""Hot numeric kernels: piecewise-monomial evaluation and compensated dot products.

Two interchangeable backends share one arithmetic definition so results are
bit-identical:

* a numba ``@njit`` fast path (default when numba imports), and
* a pure-numpy fallback, selected with ``QUADSTRESS_BACKEND=numpy``.

``benchmarks/bench_eval.py`` times one against the other.  Rule generation
(Legendre root finding, Clenshaw-Curtis weights) is not routed through here;
those are one-off per rule and stay in plain numpy.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def _pick_backend() -> str:
    choice = os.environ.get("QUADSTRESS_BACKEND", "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if choice == "numba":
        if not HAVE_NUMBA:
            raise ImportError(
                "QUADSTRESS_BACKEND=numba but numba is not importable"
            )
        return "numba"
    if choice == "numpy":
        return "numpy"
    raise ValueError(
        f"QUADSTRESS_BACKEND must be 'numba', 'numpy' or 'auto', got {choice!r}"
    )


BACKEND = _pick_backend()


def _eval_pieces_loop(bounds, signs, centers, offsets, k, order, xs, out):
    # Piece i covers [bounds[i], bounds[i+1]); the last piece is closed.
    npieces = bounds.shape[0] - 1
    p = k - order
    fact = 1.0
    for j in range(k - order + 1, k + 1):
        fact *= j
    for i in range(xs.shape[0]):
        x = xs[i]
        lo = 0
        hi = bounds.shape[0]
        while lo < hi:
            mid = (lo + hi) // 2
            if bounds[mid] <= x:
                lo = mid + 1
            else:
                hi = mid
        idx = lo - 1
        if idx < 0:
            idx = 0
        elif idx > npieces - 1:
            idx = npieces - 1
        dx = x - centers[idx]
        acc = 1.0
        for _ in range(p):
            acc *= dx
        val = signs[idx] * fact * acc
        if order == 0:
            val += offsets[idx]
        out[i] = val
    return out


def _compensated_dot_loop(weights, values):
    # Neumaier variant of Kahan summation over the products w[i]*v[i].
    total = 0.0
    comp = 0.0
    for i in range(weights.shape[0]):
        term = weights[i] * values[i]
        t = total + term
        if abs(total) >= abs(term):
            comp += (total - t) + term
        else:
            comp += (term - t) + total
        total = t
    return total + comp


def eval_pieces_numpy(bounds, signs, centers, offsets, k, order, xs):
    """Vectorized fallback; multiplication order matches the jitted loop."""
    idx = np.searchsorted(bounds, xs, side="right") - 1
    np.clip(idx, 0, bounds.shape[0] - 2, out=idx)
    fact = 1.0
    for j in range(k - order + 1, k + 1):
        fact *= j
    dx = xs - centers[idx]
    acc = np.ones_like(dx)
    for _ in range(k - order):
        acc *= dx
    out = signs[idx] * fact * acc
    if order == 0:
        out = out + offsets[idx]
    return out


def compensated_dot_numpy(weights, values):
    return _compensated_dot_loop(weights, values)


if HAVE_NUMBA:
    _eval_pieces_jit = njit(cache=True)(_eval_pieces_loop)
    _compensated_dot_jit = njit(cache=True)(_compensated_dot_loop)

    def eval_pieces_numba(bounds, signs, centers, offsets, k, order, xs):
        out = np.empty(xs.shape[0], dtype=np.float64)
        return _eval_pieces_jit(bounds, signs, centers, offsets, k, order, xs, out)

    def compensated_dot_numba(weights, values):
        return _compensated_dot_jit(weights, values)

else:  # pragma: no cover
    eval_pieces_numba = None
    compensated_dot_numba = None


if BACKEND == "numba":
    _eval_pieces_active = eval_pieces_numba
    _compensated_dot_active = compensated_dot_numba
else:
    _eval_pieces_active = eval_pieces_numpy
    _compensated_dot_active = compensated_dot_numpy


def eval_pieces(bounds, signs, centers, offsets, k, xs, order=0):
    """Evaluate a piecewise shifted-monomial function (or a derivative) at xs.

    Piece i is signs[i]*(x - centers[i])**k + offsets[i] on
    [bounds[i], bounds[i+1]); the offset only survives at order 0.
    Out-of-range points clamp to the first/last piece, so callers enforce
    the domain.
    """
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    return _eval_pieces_active(bounds, signs, centers, offsets, k, order, xs)


def compensated_dot(weights, values):
    """Neumaier-compensated sum of elementwise products."""
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    if weights.shape != values.shape:
        raise ValueError("weights and values must have the same length")
    return _compensated_dot_active(weights, values)

"""Differentiation kernel: exact forward-mode derivatives plus a central
finite-difference oracle.

Every bracket, Lie derivative and two-form in the package routes through the
operations here.  Fields are plain closures over coordinate sequences; they
must be written generically (indexing, arithmetic, and the ``dualnum`` math
helpers), because the dual scheme threads ``Dual`` scalars through them.
Point components may themselves be duals, so gradients of gradients (and
brackets of brackets) nest without special cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from geored.dualnum import Dual, is_dual, real_part, tangent_part
from geored.errors import EvaluationError


@dataclass(frozen=True)
class ScalarField:
    """A real-valued function of an n-vector."""

    arity: int
    fn: Callable
    label: str = "f"

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be a positive integer")

    def __call__(self, x):
        return self.fn(x)


@dataclass(frozen=True)
class VectorFieldFn:
    """An n-vector-valued function of an n-vector (same arity in and out)."""

    arity: int
    fn: Callable
    label: str = "X"

    def __call__(self, x):
        return self.fn(x)


class DiffMode(Enum):
    DUAL = "dual"
    CENTRAL = "central"


@dataclass(frozen=True)
class DiffScheme:
    mode: DiffMode = DiffMode.DUAL
    step: float = 1e-6

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")


DUAL = DiffScheme(DiffMode.DUAL)
CENTRAL = DiffScheme(DiffMode.CENTRAL)


def _check_finite(value, index):
    if not math.isfinite(real_part(value)):
        raise EvaluationError(
            f"non-finite derivative component at index {index}", index=index
        )
    return value


def _eval(f, xs, index):
    """Evaluate a field, mapping arithmetic blowups to EvaluationError so
    both dual backends (C arithmetic yields inf, Python raises) agree."""
    try:
        return f(xs)
    except ZeroDivisionError as err:
        raise EvaluationError(
            f"division by zero during evaluation (seed index {index})", index=index
        ) from err


def _plain(value):
    """Coerce numpy scalars to builtin floats so leaf duals stay on the
    compiled fast path; duals pass through untouched."""
    return value if isinstance(value, Dual) else float(value)


def _seed(x, i: int):
    return [Dual(_plain(x[j]), 1.0 if j == i else 0.0) for j in range(len(x))]


def _pack(values, x):
    """Float arrays for float points, plain lists when duals are involved."""
    if any(is_dual(v) for v in values) or any(is_dual(c) for c in x):
        return list(values)
    return np.asarray([float(v) for v in values])


def gradient(f: ScalarField, x: Sequence, scheme: DiffScheme = DUAL):
    """Row of partial derivatives of ``f`` at ``x``.

    DUAL mode is exact on smooth closed-form fields; CENTRAL is the
    second-order finite-difference oracle with per-component step scaling.
    """
    n = f.arity
    if scheme.mode is DiffMode.DUAL:
        out = []
        for i in range(n):
            v = _eval(f, _seed(x, i), i)
            out.append(_check_finite(tangent_part(v), i))
        return _pack(out, x)
    h = scheme.step
    out = []
    for i in range(n):
        hi = h * (1.0 + abs(real_part(x[i])))
        xp = [x[j] + (hi if j == i else 0.0) for j in range(n)]
        xm = [x[j] - (hi if j == i else 0.0) for j in range(n)]
        out.append(_check_finite((_eval(f, xp, i) - _eval(f, xm, i)) / (2.0 * hi), i))
    return _pack(out, x)


def jacobian(fields: Sequence[ScalarField], x: Sequence, scheme: DiffScheme = DUAL):
    """Stacked gradients; row i is the gradient of ``fields[i]``.

    One seeded evaluation per input direction covers every field at once in
    DUAL mode.
    """
    arities = {f.arity for f in fields}
    if len(arities) != 1:
        raise ValueError("all fields must share one arity")
    n = arities.pop()
    m = len(fields)
    if scheme.mode is DiffMode.DUAL:
        cols = []
        for i in range(n):
            xs = _seed(x, i)
            cols.append([_check_finite(tangent_part(_eval(f, xs, i)), i) for f in fields])
        rows = [[cols[i][r] for i in range(n)] for r in range(m)]
    else:
        rows = [list(gradient(f, x, scheme)) for f in fields]
    if any(is_dual(v) for row in rows for v in row) or any(is_dual(c) for c in x):
        return rows
    return np.asarray(rows, dtype=float)


def vector_jacobian(X: VectorFieldFn, x: Sequence, scheme: DiffScheme = DUAL):
    """Matrix of partials of a vector field (row = output component)."""
    n = X.arity
    if scheme.mode is DiffMode.DUAL:
        cols = []
        for i in range(n):
            ys = _eval(X, _seed(x, i), i)
            cols.append([_check_finite(tangent_part(y), i) for y in ys])
        rows = [[cols[i][r] for i in range(n)] for r in range(n)]
        if any(is_dual(v) for row in rows for v in row):
            return rows
        return np.asarray(rows, dtype=float)
    h = scheme.step
    rows = None
    for i in range(n):
        hi = h * (1.0 + abs(real_part(x[i])))
        xp = [x[j] + (hi if j == i else 0.0) for j in range(n)]
        xm = [x[j] - (hi if j == i else 0.0) for j in range(n)]
        yp, ym = _eval(X, xp, i), _eval(X, xm, i)
        col = [(yp[r] - ym[r]) / (2.0 * hi) for r in range(n)]
        if rows is None:
            rows = [[0.0] * n for _ in range(n)]
        for r in range(n):
            rows[r][i] = col[r]
    return np.asarray(rows, dtype=float)


def hessian(f: ScalarField, x: Sequence, scheme: DiffScheme = DUAL):
    """Symmetric matrix of second partials.

    DUAL mode nests two derivative layers, one seeded pair per (i, j); the
    result is symmetric by construction.  CENTRAL uses the four-point stencil
    and is symmetrized on return.
    """
    n = f.arity
    if scheme.mode is DiffMode.DUAL:
        rows = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                xs = [
                    Dual(
                        Dual(_plain(x[k]), 1.0 if k == i else 0.0),
                        Dual(1.0 if k == j else 0.0, 0.0),
                    )
                    for k in range(n)
                ]
                v = _eval(f, xs, i)
                entry = _check_finite(tangent_part(tangent_part(v)), i)
                rows[i][j] = entry
                rows[j][i] = entry
        if any(is_dual(v) for row in rows for v in row) or any(is_dual(c) for c in x):
            return rows
        return np.asarray(rows, dtype=float)
    # second differences lose eps/h^2 to roundoff; sqrt(step) balances that
    # against the O(h^2) truncation term
    h = math.sqrt(scheme.step)
    H = np.empty((n, n))
    steps = [h * (1.0 + abs(real_part(x[i]))) for i in range(n)]

    def ev(di, dj, i, j):
        xs = list(x)
        xs[i] = xs[i] + di
        xs[j] = xs[j] + dj
        return _eval(f, xs, i)

    for i in range(n):
        for j in range(i, n):
            hi, hj = steps[i], steps[j]
            if i == j:
                val = (ev(hi, 0.0, i, j) - 2.0 * f(list(x)) + ev(-hi, 0.0, i, j)) / (
                    hi * hi
                )
            else:
                val = (
                    ev(hi, hj, i, j)
                    - ev(hi, -hj, i, j)
                    - ev(-hi, hj, i, j)
                    + ev(-hi, -hj, i, j)
                ) / (4.0 * hi * hj)
            H[i, j] = H[j, i] = _check_finite(val, i)
    return 0.5 * (H + H.T)


def lie_derivative(X: VectorFieldFn, f: ScalarField, x: Sequence, scheme: DiffScheme = DUAL):
    """Derivative of ``f`` along the flow of ``X``: grad f(x) . X(x)."""
    if X.arity != f.arity:
        raise ValueError("vector field and function arities differ")
    if scheme.mode is DiffMode.DUAL:
        # single directional evaluation: seed the point with tangent X(x)
        vx = X(list(x))
        xs = [Dual(_plain(x[j]), _plain(vx[j])) for j in range(len(x))]
        return _check_finite(tangent_part(_eval(f, xs, None)), None)
    g = gradient(f, x, scheme)
    vx = X(list(x))
    return float(sum(g[i] * vx[i] for i in range(f.arity)))


def field_commutator(X: VectorFieldFn, Y: VectorFieldFn, x: Sequence, scheme: DiffScheme = DUAL):
    """Lie bracket [X, Y] evaluated at ``x``: (DY)X - (DX)Y."""
    if X.arity != Y.arity:
        raise ValueError("vector field arities differ")
    n = X.arity
    if scheme.mode is DiffMode.DUAL:
        vx = X(list(x))
        vy = Y(list(x))
        dy_x = _eval(Y, [Dual(_plain(x[j]), _plain(vx[j])) for j in range(n)], None)
        dx_y = _eval(X, [Dual(_plain(x[j]), _plain(vy[j])) for j in range(n)], None)
        out = [
            _check_finite(tangent_part(dy_x[r]) - tangent_part(dx_y[r]), r)
            for r in range(n)
        ]
        return _pack(out, x)
    vx = np.asarray([real_part(c) for c in X(list(x))])
    vy = np.asarray([real_part(c) for c in Y(list(x))])
    DX = vector_jacobian(X, x, scheme)
    DY = vector_jacobian(Y, x, scheme)
    return DY @ vx - DX @ vy

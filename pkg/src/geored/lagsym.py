"""Tangent-bundle canonical formalism: Cartan one-form, Lagrangian two-form,
energy, regularity, the Euler-Lagrange field, brackets for regular models,
kernel analysis and connection-based brackets for the degenerate
(relativistic) case, and the canonical chart on its manifold of motions.

Sign conventions.  The published derivations carry a few mutually
inconsistent orientation choices; here the two-form matrix follows the
block form with +d^2L/dv dv on the dq^dv slots, and brackets are oriented
so that momentum-coordinate pairs give {p_j, q^k} = +delta and the
canonical chart of the degenerate model gives {Q^i, P^j} = +delta.  All
tested identities (antisymmetry, Jacobi, Casimir, kernel) are orientation
independent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from geored import dualnum as dn
from geored.calc import DUAL, ScalarField, gradient, hessian
from geored.dualnum import is_dual, real_part
from geored.errors import (
    ConnectionInvalid,
    DegenerateLagrangian,
    DomainError,
    NotTimelike,
    ZeroTimeVelocity,
)

KERNEL_RTOL = 1e-8


@dataclass(frozen=True)
class MetricSignature:
    """Diagonal flat metric; the relativistic cases use (+, -, -, -) so a
    timelike velocity has positive square."""

    diag: tuple[float, ...] = (1.0, -1.0, -1.0, -1.0)

    def __post_init__(self):
        if any(d not in (1.0, -1.0) for d in self.diag):
            raise ValueError("signature entries must be +1 or -1")

    @property
    def dim(self) -> int:
        return len(self.diag)

    def dot(self, u, v):
        return sum(d * ui * vi for d, ui, vi in zip(self.diag, u, v))

    def lower(self, u):
        return [d * ui for d, ui in zip(self.diag, u)]


MINKOWSKI = MetricSignature()


@dataclass(frozen=True)
class LagrangianModel:
    """Scalar function on a (q, v) chart of dimension 2n."""

    n: int
    L: ScalarField
    label: str = "L"

    def __post_init__(self):
        if self.L.arity != 2 * self.n:
            raise ValueError("Lagrangian arity must be 2n")


def mechanical_lagrangian(n: int, potential: Callable | None = None) -> LagrangianModel:
    """L = |v|^2 / 2 - U(q), the regular benchmark model."""

    def fn(z):
        kinetic = sum(z[n + i] * z[n + i] for i in range(n)) * 0.5
        return kinetic - (potential(z[:n]) if potential is not None else 0.0)

    return LagrangianModel(n, ScalarField(2 * n, fn, "mechanical"), "mechanical")


def relativistic_lagrangian(
    m: float = 1.0, c: float = 1.0, signature: MetricSignature = MINKOWSKI
) -> LagrangianModel:
    """Reparametrization-invariant square-root Lagrangian on TR^4; defined
    only for timelike velocities."""
    n = signature.dim

    def fn(z):
        v = z[n:]
        s2 = signature.dot(v, v)
        if real_part(s2) <= 0.0:
            raise DomainError("velocity is not timelike")
        return (m * c) * dn.sqrt(s2)

    return LagrangianModel(n, ScalarField(2 * n, fn, "sqrt"), "relativistic")


# -- generic helpers (work on float or dual points) --------------------------


def _grad_list(f: ScalarField, z) -> list:
    g = gradient(f, z, DUAL)
    return list(g)


def _dot(u, v):
    total = 0.0
    for ui, vi in zip(u, v):
        total = total + ui * vi
    return total


def _solve_generic(A: list, b: list) -> list:
    """Gaussian elimination with partial pivoting over floats or duals."""
    n = len(b)
    M = [list(row) + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(real_part(M[r][col])))
        if abs(real_part(M[pivot][col])) == 0.0:
            raise DegenerateLagrangian("singular linear system in bracket solve")
        M[col], M[pivot] = M[pivot], M[col]
        inv = 1.0 / M[col][col]
        for r in range(n):
            if r == col:
                continue
            factor = M[r][col] * inv
            if real_part(factor) == 0.0 and not is_dual(factor):
                continue
            for c in range(col, n + 1):
                M[r][c] = M[r][c] - factor * M[col][c]
    return [M[i][n] / M[i][i] for i in range(n)]


def _two_form_rows(model: LagrangianModel, z) -> list:
    """2n x 2n matrix of the Lagrangian two-form at z, generic scalars.

    Blocks: [q,v] = d2L/dv dv, [q,q] = antisymmetrized d2L/dv dq, [v,v] = 0.
    """
    n = model.n
    H = hessian(model.L, z, DUAL)
    rows = [[0.0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            a_ij = H[n + i][n + j]
            b_ij = H[n + i][j]  # d2L / dv_i dq_j
            b_ji = H[n + j][i]
            rows[i][j] = b_ij - b_ji
            rows[i][n + j] = a_ij
            rows[n + i][j] = -a_ij
    return rows


# -- spec operations ---------------------------------------------------------


def cartan_one_form(model: LagrangianModel, point) -> np.ndarray:
    """(dL/dv) on the dq slots, zero on the dv slots."""
    n = model.n
    g = gradient(model.L, list(point), DUAL)
    out = np.zeros(2 * n)
    out[:n] = [float(g[n + i]) for i in range(n)]
    return out


@dataclass(frozen=True)
class TwoFormAtPoint:
    matrix: np.ndarray
    point: tuple

    def __post_init__(self):
        if np.max(np.abs(self.matrix + self.matrix.T)) > 1e-12:
            raise ValueError("two-form matrix must be antisymmetric")


def lagrangian_two_form(model: LagrangianModel, point) -> TwoFormAtPoint:
    rows = _two_form_rows(model, list(point))
    M = np.asarray([[float(v) for v in row] for row in rows])
    M = 0.5 * (M - M.T)  # kill rounding asymmetry; blocks are exact already
    return TwoFormAtPoint(M, tuple(float(v) for v in point))


def energy(model: LagrangianModel, point):
    """v . dL/dv - L, evaluated exactly through the dual scheme."""
    n = model.n
    z = list(point)
    g = gradient(model.L, z, DUAL)
    return _dot(z[n:], g[n:]) - model.L(z)


@dataclass
class RegularityReport:
    regular: bool
    det: float
    rank: int


def is_regular(model: LagrangianModel, point, tol: float = KERNEL_RTOL) -> RegularityReport:
    """Rank and determinant of the velocity Hessian."""
    n = model.n
    z = list(point)
    q = z[: model.n]
    restricted = ScalarField(n, lambda v: model.L(list(q) + list(v)))
    H = hessian(restricted, z[n:], DUAL)
    H = np.asarray(H, dtype=float)
    svals = np.linalg.svd(H, compute_uv=False)
    rank = int(np.sum(svals > tol * max(svals[0], 1e-300)))
    return RegularityReport(
        regular=rank == n, det=float(np.linalg.det(H)), rank=rank
    )


def el_field(model: LagrangianModel, point) -> np.ndarray:
    """The dynamical field solving the intrinsic Euler-Lagrange equation;
    second-order structure (q-components equal v) is enforced."""
    rep = is_regular(model, point)
    if not rep.regular:
        raise DegenerateLagrangian(
            "two-form is degenerate; use kernel_basis / the connection bracket"
        )
    n = model.n
    z = [float(v) for v in point]
    W = lagrangian_two_form(model, z).matrix
    e_field = ScalarField(2 * n, lambda w: energy(model, w), "E")
    dE = np.asarray(_grad_list(e_field, z), dtype=float)
    gamma = np.linalg.solve(W, -dE)
    if np.max(np.abs(gamma[:n] - z[n:])) > 1e-7 * (1.0 + np.max(np.abs(z))):
        raise DegenerateLagrangian("solution lost second-order structure")
    return gamma


def pb_regular(model: LagrangianModel, f: ScalarField, g: ScalarField, point):
    """Bracket from the Lagrangian two-form of a regular model.

    Solves one small linear system per argument; oriented so that
    {dL/dv_j, q^k} = +delta_j^k.
    """
    z = list(point)
    W = _two_form_rows(model, z)
    df = _grad_list(f, z)
    dg = _grad_list(g, z)
    xg = _solve_generic(W, [-v for v in dg])
    return -_dot(df, xg)


def kernel_basis(omega, tol: float = KERNEL_RTOL) -> list[np.ndarray]:
    """Orthonormal basis of the two-form kernel (singular vectors below
    tol * sigma_max)."""
    M = omega.matrix if isinstance(omega, TwoFormAtPoint) else np.asarray(omega)
    _, svals, vh = np.linalg.svd(M)
    cutoff = tol * max(float(svals[0]), 1e-300)
    return [vh[i] for i in range(len(svals)) if svals[i] <= cutoff]


def newton_wigner(point, signature: MetricSignature = MINKOWSKI, m: float = 1.0, c: float = 1.0):
    """Canonical chart on the manifold of motions of the free relativistic
    particle: Q^j = -x^j + (v^j / v^0) x^0 and P^j = v^j / L."""
    n = signature.dim
    z = [float(u) for u in point]
    x, v = z[:n], z[n:]
    if v[0] == 0.0:
        raise ZeroTimeVelocity("the chart needs a nonzero time velocity")
    s2 = signature.dot(v, v)
    if s2 <= 0.0:
        raise NotTimelike("velocity square is not positive")
    lag = m * c * math.sqrt(s2)
    Q = np.asarray([-x[j] + (v[j] / v[0]) * x[0] for j in range(1, n)])
    P = np.asarray([v[j] / lag for j in range(1, n)])
    return Q, P


def newton_wigner_fields(
    signature: MetricSignature = MINKOWSKI, m: float = 1.0, c: float = 1.0
) -> tuple[list[ScalarField], list[ScalarField]]:
    """The chart of ``newton_wigner`` as differentiable fields on the
    (x, v) coordinates."""
    n = signature.dim

    def make_q(j):
        def fn(z):
            return -z[j] + (z[n + j] / z[n]) * z[0]

        return ScalarField(2 * n, fn, f"Q{j}")

    def make_p(j):
        def fn(z):
            v = z[n:]
            return z[n + j] / ((m * c) * dn.sqrt(signature.dot(v, v)))

        return ScalarField(2 * n, fn, f"P{j}")

    return [make_q(j) for j in range(1, n)], [make_p(j) for j in range(1, n)]


@dataclass(frozen=True)
class ConnectionField:
    """Point-dependent projector complementing the two-form kernel.

    ``pair_metric`` carries the diagonal weights contracting the velocity
    and position frames in the bivector; None means Euclidean pairing.
    """

    at: Callable
    label: str = "A"
    pair_metric: tuple | None = None

    def validate(self, model: LagrangianModel, point, tol: float = 1e-9) -> None:
        A = np.asarray(
            [[float(v) for v in row] for row in self.at(list(point))]
        )
        if np.max(np.abs(A @ A - A)) > tol:
            raise ConnectionInvalid("A is not idempotent at the queried point")
        W = lagrangian_two_form(model, point).matrix
        null = kernel_basis(TwoFormAtPoint(W, tuple(point)))
        for vec in null:
            if np.max(np.abs(A @ vec)) > 1e-8 * (1.0 + np.linalg.norm(A)):
                raise ConnectionInvalid("kernel of the two-form is not killed by A")
        rank_a = np.linalg.matrix_rank(A, tol=1e-8)
        if rank_a != A.shape[0] - len(null):
            raise ConnectionInvalid("rank of A does not complement the kernel")


def relativistic_connection(
    m: float = 1.0, c: float = 1.0, signature: MetricSignature = MINKOWSKI
) -> ConnectionField:
    """Flat Lorentz-invariant connection for the square-root model: the
    identity minus the projector onto the span of the dynamical and dilation
    directions, built from degree-zero covectors."""
    n = signature.dim

    def at(z):
        x, v = list(z[:n]), list(z[n:])
        s2 = signature.dot(v, v)
        if real_part(s2) <= 0.0:
            raise DomainError("connection defined over timelike velocities only")
        v_low = signature.lower(v)
        x_dot_v = _dot(v_low, x)
        # theta1 = (m^2 c^2 / L) d((v.x)/L); theta2 = v_mu dv^mu / s2
        theta1 = [0.0] * (2 * n)
        theta2 = [0.0] * (2 * n)
        for nu in range(n):
            theta1[nu] = v_low[nu] / s2
            theta1[n + nu] = (x[nu] * signature.diag[nu] - x_dot_v * v_low[nu] / s2) / s2
            theta2[n + nu] = v_low[nu] / s2
        rows = [[0.0] * (2 * n) for _ in range(2 * n)]
        for i in range(2 * n):
            gamma_i = v[i] if i < n else 0.0
            delta_i = v[i - n] if i >= n else 0.0
            for j in range(2 * n):
                val = (1.0 if i == j else 0.0) - gamma_i * theta1[j] - delta_i * theta2[j]
                rows[i][j] = val
        return rows

    return ConnectionField(
        at, label="relativistic connection", pair_metric=signature.diag
    )


def presymplectic_bracket(
    model: LagrangianModel,
    A: ConnectionField,
    f: ScalarField,
    g: ScalarField,
    point,
    validate: bool = True,
):
    """Bracket of the degenerate model through the connection: the bivector
    pairs the horizontal lifts of the position and velocity frames with the
    metric contraction (required for Lorentz invariance), weighted by the
    (Casimir) Lagrangian; oriented so the canonical chart of the motion
    manifold satisfies {Q^i, P^j} = +delta."""
    n = model.n
    z = list(point)
    if validate and not any(is_dual(u) for u in z):
        A.validate(model, z)
    rows = A.at(z)
    weight = model.L(z)
    metric = A.pair_metric or (1.0,) * n
    df = _grad_list(f, z)
    dg = _grad_list(g, z)
    total = 0.0
    for mu in range(n):
        u_col = [rows[r][n + mu] for r in range(2 * n)]  # lift of d/dv^mu
        w_col = [rows[r][mu] for r in range(2 * n)]  # lift of d/dx^mu
        total = total + metric[mu] * (
            _dot(df, w_col) * _dot(dg, u_col) - _dot(df, u_col) * _dot(dg, w_col)
        )
    return weight * total


def jacobi_residual(bracket: Callable, f: ScalarField, g: ScalarField, h: ScalarField, point) -> float:
    """|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}| with the inner brackets realized
    as fields and differentiated by the nested dual scheme."""
    arity = f.arity

    def pairfield(a, b):
        return ScalarField(arity, lambda z: bracket(a, b, z), f"{{{a.label},{b.label}}}")

    total = (
        bracket(f, pairfield(g, h), list(point))
        + bracket(g, pairfield(h, f), list(point))
        + bracket(h, pairfield(f, g), list(point))
    )
    return abs(float(total))


def poisson_compatibility(model: LagrangianModel, A: ConnectionField, point, tol: float = 1e-8):
    """Matrix-level compatibility of the connection bivector with the
    two-form: Lambda omega Lambda = Lambda, and the kernel of Lambda meets
    the image of omega only at zero.

    The identity pairs the bivector with the exterior-derivative
    orientation of the two-form (omega = d theta), which is the negative of
    the block-form matrix from ``lagrangian_two_form``.
    """
    n = model.n
    z = [float(u) for u in point]
    rows = np.asarray([[float(v) for v in row] for row in A.at(z)])
    weight = float(model.L(z))
    metric = np.asarray(A.pair_metric or (1.0,) * n)
    Av, Ax = rows[:, n:] * metric, rows[:, :n]
    lam = weight * (Ax @ Av.T - Av @ Ax.T)
    W = -lagrangian_two_form(model, z).matrix
    residual = float(np.max(np.abs(lam @ W @ lam - lam)))
    # kernel of Lambda versus image of omega
    _, svals, vh = np.linalg.svd(lam)
    null_lam = vh[svals <= tol * max(svals[0], 1e-300)]
    u, sw, _ = np.linalg.svd(W)
    img_w = u[:, sw > tol * max(sw[0], 1e-300)]
    stacked = np.hstack([null_lam.T, img_w])
    min_sv = float(np.linalg.svd(stacked, compute_uv=False)[-1])
    return {
        "lambda_omega_lambda": residual,
        "kernel_image_min_singular_value": min_sv,
        "ok": residual <= tol and min_sv > tol,
    }


def bracket_table(bracket: Callable, fields: Sequence[ScalarField], point) -> dict:
    """All pairwise bracket values at a point plus antisymmetry residuals,
    in the JSON-exportable layout."""
    pairs = []
    worst_antisym = 0.0
    for i, f in enumerate(fields):
        for j, g in enumerate(fields):
            if j <= i:
                continue
            val = float(bracket(f, g, list(point)))
            rev = float(bracket(g, f, list(point)))
            worst_antisym = max(worst_antisym, abs(val + rev))
            pairs.append({"f": f.label, "g": g.label, "value": val})
    return {
        "point": [float(v) for v in point],
        "pairs": pairs,
        "residuals": {"antisymmetry": worst_antisym},
    }


def bracket_table_json(bracket: Callable, fields: Sequence[ScalarField], point) -> str:
    return json.dumps(bracket_table(bracket, fields, point), sort_keys=True, indent=2)


def coordinate_fields(dim: int, names: Sequence[str] | None = None) -> list[ScalarField]:
    names = names or [f"z{i}" for i in range(dim)]
    return [
        ScalarField(dim, (lambda k: lambda z: z[k])(i), names[i]) for i in range(dim)
    ]


def measured_position_brackets(
    m: float = 1.0, c: float = 1.0, point=None, signature: MetricSignature = MINKOWSKI
) -> dict:
    """Bracket table of the physical coordinates for the degenerate model
    with the mass and light-speed constants restored.

    The {x, x} block is fitted to the antisymmetric combination
    (v^sigma x^rho - v^rho x^sigma); the measured prefactor is reported
    next to the published closed form m^2 c^2 / L, which is not asserted.
    """
    model = relativistic_lagrangian(m, c, signature)
    A = relativistic_connection(m, c, signature)
    n = signature.dim
    z = [float(u) for u in point]
    coords = coordinate_fields(2 * n, [f"x{i}" for i in range(n)] + [f"v{i}" for i in range(n)])
    xs, vs = coords[:n], coords[n:]

    def br(f, g):
        return float(presymplectic_bracket(model, A, f, g, z, validate=False))

    vv = np.array([[br(vs[r], vs[s]) for s in range(n)] for r in range(n)])
    vx = np.array([[br(vs[r], xs[s]) for s in range(n)] for r in range(n)])
    xx = np.array([[br(xs[r], xs[s]) for s in range(n)] for r in range(n)])

    x, v = np.asarray(z[:n]), np.asarray(z[n:])
    pattern = np.empty((n, n))
    for r in range(n):
        for s in range(n):
            pattern[r, s] = v[s] * x[r] - v[r] * x[s]
    mask = np.abs(pattern) > 1e-9
    ratios = xx[mask] / pattern[mask]
    lag = float(model.L(z))
    return {
        "vv_max_abs": float(np.max(np.abs(vv))),
        "vx": vx.tolist(),
        "xx": xx.tolist(),
        "xx_prefactor_measured": float(np.mean(ratios)) if ratios.size else 0.0,
        "xx_prefactor_spread": float(np.ptp(ratios)) if ratios.size else 0.0,
        "xx_prefactor_published_form": m * m * c * c / lag,
        "lagrangian": lag,
    }

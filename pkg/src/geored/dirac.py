"""Canonical brackets on multi-particle relativistic phase space, constraint
sets, Dirac brackets, constrained evolution, the two-particle interacting
model with its dynamical gauge, the world-line-condition residual, and the
deformed position-Lorentz bracket algebra.

Phase functions are callables ``f(z, tau)`` on the 8N-dimensional chart
(x_1^0..3, p_1^0..3, x_2^0..3, ...); the evolution parameter rides along as
an explicit argument, never as a coordinate.  All brackets thread the dual
scheme, so brackets of brackets (Jacobi checks) nest transparently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from geored.calc import ScalarField
from geored.dualnum import Dual, is_dual, real_part
from geored.errors import (
    ConstraintDrift,
    OffSurface,
    SingularConstraintMatrix,
)
from geored.flow import Dopri45Stepper, IntegratorConfig, Trajectory
from geored.lagsym import MINKOWSKI, MetricSignature, _dot, _solve_generic


@dataclass(frozen=True)
class PhaseSpace:
    particles: int
    signature: MetricSignature = MINKOWSKI

    @property
    def dim(self) -> int:
        return 8 * self.particles

    def ix(self, alpha: int, mu: int) -> int:
        return 8 * alpha + mu

    def ip(self, alpha: int, mu: int) -> int:
        return 8 * alpha + 4 + mu

    def x(self, z, alpha: int):
        return [z[self.ix(alpha, mu)] for mu in range(4)]

    def p(self, z, alpha: int):
        return [z[self.ip(alpha, mu)] for mu in range(4)]


def as_phase_fn(f) -> Callable:
    """Accept ScalarField or raw callable; normalize to f(z, tau)."""
    if isinstance(f, ScalarField):
        return lambda z, tau: f(z)
    return f


def coordinate_fn(space: PhaseSpace, kind: str, alpha: int, mu: int) -> Callable:
    idx = space.ix(alpha, mu) if kind == "x" else space.ip(alpha, mu)
    fn = lambda z, tau: z[idx]
    fn.label = f"{kind}{mu}@{alpha}"
    return fn


def _plain(value):
    return value if is_dual(value) else float(value)


def _grad_z(fn: Callable, z, tau):
    """Gradient of a phase function in the coordinates, tau held fixed."""
    n = len(z)
    out = []
    for i in range(n):
        seeded = [Dual(_plain(z[j]), 1.0 if j == i else 0.0) for j in range(n)]
        v = fn(seeded, tau)
        out.append(v.b if is_dual(v) else 0.0)
    return out


def canonical_pb(space: PhaseSpace, f, g, point, tau: float = 0.0):
    """Sum over particles of g^{mu nu} (df/dx dg/dp - df/dp dg/dx)."""
    f, g = as_phase_fn(f), as_phase_fn(g)
    z = list(point)
    df = _grad_z(f, z, tau)
    dg = _grad_z(g, z, tau)
    return _pb_from_grads(space, df, dg)


def _pb_from_grads(space: PhaseSpace, df, dg):
    total = 0.0
    diag = space.signature.diag
    for alpha in range(space.particles):
        for mu in range(4):
            i, j = space.ix(alpha, mu), space.ip(alpha, mu)
            total = total + diag[mu] * (df[i] * dg[j] - df[j] * dg[i])
    return total


def minkowski_dot(space: PhaseSpace, u, v):
    return space.signature.dot(u, v)


@dataclass(frozen=True)
class PoincareGenerator:
    label: str
    fn: Callable

    def __call__(self, z, tau=0.0):
        return self.fn(z, tau)


def poincare_generators(space: PhaseSpace) -> list[PoincareGenerator]:
    """The six rotation-boost generators J_{mu nu} (mu < nu) and the four
    translation generators P_mu, summed over particles, lowered indices."""
    diag = space.signature.diag
    gens = []

    def make_j(mu, nu):
        def fn(z, tau):
            total = 0.0
            for alpha in range(space.particles):
                x = space.x(z, alpha)
                p = space.p(z, alpha)
                total = total + (
                    diag[mu] * x[mu] * diag[nu] * p[nu]
                    - diag[nu] * x[nu] * diag[mu] * p[mu]
                )
            return total

        return PoincareGenerator(f"J{mu}{nu}", fn)

    def make_p(mu):
        def fn(z, tau):
            total = 0.0
            for alpha in range(space.particles):
                total = total + diag[mu] * space.p(z, alpha)[mu]
            return total

        return PoincareGenerator(f"P{mu}", fn)

    for mu in range(4):
        for nu in range(mu + 1, 4):
            gens.append(make_j(mu, nu))
    for mu in range(4):
        gens.append(make_p(mu))
    return gens


class ConstraintRole(Enum):
    MASS_SHELL = "mass-shell"
    GAUGE = "gauge"


@dataclass(frozen=True)
class Constraint:
    label: str
    fn: Callable  # (z, tau) -> value
    role: ConstraintRole
    tau_dependent: bool = False

    def __call__(self, z, tau=0.0):
        return self.fn(z, tau)

    def check_tau_flag(self, z, tau: float = 0.3, h: float = 1e-6) -> bool:
        """Spot-check the declared tau sensitivity by a finite difference."""
        slope = (self.fn(z, tau + h) - self.fn(z, tau - h)) / (2 * h)
        return (abs(slope) > 1e-9) == self.tau_dependent


@dataclass
class ConstraintSet:
    space: PhaseSpace
    constraints: list[Constraint]
    surface_tol: float = 1e-9
    potential: "InteractionPotential | None" = None

    @property
    def gauges(self) -> list[Constraint]:
        return [c for c in self.constraints if c.role is ConstraintRole.GAUGE]

    @property
    def shells(self) -> list[Constraint]:
        return [c for c in self.constraints if c.role is ConstraintRole.MASS_SHELL]

    def values(self, z, tau) -> np.ndarray:
        return np.asarray([float(c(list(z), tau)) for c in self.constraints])

    def require_on_surface(self, z, tau):
        vals = self.values(z, tau)
        j = int(np.argmax(np.abs(vals)))
        if abs(vals[j]) > self.surface_tol:
            raise OffSurface(z, j, float(vals[j]))

    def classification_matrix(self, point, tau: float = 0.0):
        """Pairwise canonical brackets of every constraint with every other;
        the set is second class where this matrix is invertible."""
        return _pairwise_matrix(self.space, self.constraints, list(point), tau)


def _pairwise_matrix(space: PhaseSpace, constraints, z, tau):
    grads = [_grad_z(c.fn, z, tau) for c in constraints]
    k = len(constraints)
    M = [[0.0] * k for _ in range(k)]
    for a in range(k):
        for b in range(a + 1, k):
            val = _pb_from_grads(space, grads[a], grads[b])
            M[a][b] = val
            M[b][a] = -val
    return M, grads


def constraint_matrix(cset: ConstraintSet, point, tau: float = 0.0) -> np.ndarray:
    """The gauge-versus-shell block {chi_i, K_j} evaluated on the surface."""
    z = list(point)
    cset.require_on_surface(z, tau)
    gauges, shells = cset.gauges, cset.shells
    out = np.empty((len(gauges), len(shells)))
    for i, chi in enumerate(gauges):
        for j, K in enumerate(shells):
            out[i, j] = float(canonical_pb(cset.space, chi.fn, K.fn, z, tau))
    return out


def dirac_bracket(cset: ConstraintSet, f, g, point, tau: float = 0.0):
    """{f,g} minus the correction through the inverse of the full pairwise
    constraint matrix (computed by linear solves, never inversion)."""
    f, g = as_phase_fn(f), as_phase_fn(g)
    z = list(point)
    M, grads = _pairwise_matrix(cset.space, cset.constraints, z, tau)
    if not any(is_dual(u) for u in z):
        M_float = np.asarray([[real_part(v) for v in row] for row in M])
        cond = float(np.linalg.cond(M_float))
        if not np.isfinite(cond) or cond >= 1e10:
            raise SingularConstraintMatrix(cond)
    df = _grad_z(f, z, tau)
    dg = _grad_z(g, z, tau)
    plain = _pb_from_grads(cset.space, df, dg)
    fv = [_pb_from_grads(cset.space, df, gr) for gr in grads]  # {f, v_a}
    vg = [_pb_from_grads(cset.space, gr, dg) for gr in grads]  # {v_b, g}
    y = _solve_generic(M, vg)
    return plain - _dot(fv, y)


@dataclass(frozen=True)
class InteractionPotential:
    """Scalar interaction of the invariant separation; the derivative is
    supplied or taken exactly by the dual scheme."""

    V: Callable
    Vprime: Callable | None = None

    def __call__(self, xi):
        return self.V(xi)

    def derivative(self, xi):
        if self.Vprime is not None:
            return self.Vprime(xi)
        out = self.V(Dual(xi, 1.0))
        return out.b if is_dual(out) else 0.0

    def check_derivative(self, xi: float, step: float = 1e-6) -> bool:
        fd = (self.V(xi + step) - self.V(xi - step)) / (2 * step)
        return abs(fd - float(self.derivative(xi))) < 1e-6 * (1 + abs(fd))


def linear_potential(lam: float = 0.1) -> InteractionPotential:
    return InteractionPotential(lambda xi: lam * xi, lambda xi: lam)


def invariant_separation(space: PhaseSpace):
    """xi = r^2 - (P.r)^2 / P^2 with r = (x1 - x2)/2 and P = p1 + p2."""

    def fn(z, tau):
        x1, x2 = space.x(z, 0), space.x(z, 1)
        p1, p2 = space.p(z, 0), space.p(z, 1)
        r = [(a - b) / 2.0 for a, b in zip(x1, x2)]
        P = [a + b for a, b in zip(p1, p2)]
        rr = space.signature.dot(r, r)
        Pr = space.signature.dot(P, r)
        PP = space.signature.dot(P, P)
        return rr - Pr * Pr / PP

    return fn


def two_particle_model(
    m1: float, m2: float, V: InteractionPotential, signature: MetricSignature = MINKOWSKI
) -> tuple[ConstraintSet, PhaseSpace]:
    """Two mass-shell constraints sharing one invariant interaction, the
    relative-time gauge P.r = 0, and the dynamical evolution gauge
    P.(x1+x2)/2 = tau."""
    space = PhaseSpace(2, signature)
    xi = invariant_separation(space)

    def make_shell(alpha, mass):
        def fn(z, tau):
            p = space.p(z, alpha)
            return space.signature.dot(p, p) - mass * mass + V(xi(z, tau))

        return Constraint(f"K{alpha + 1}", fn, ConstraintRole.MASS_SHELL)

    def chi1(z, tau):
        x1, x2 = space.x(z, 0), space.x(z, 1)
        p1, p2 = space.p(z, 0), space.p(z, 1)
        r = [(a - b) / 2.0 for a, b in zip(x1, x2)]
        P = [a + b for a, b in zip(p1, p2)]
        return space.signature.dot(P, r)

    def chi2(z, tau):
        x1, x2 = space.x(z, 0), space.x(z, 1)
        p1, p2 = space.p(z, 0), space.p(z, 1)
        X = [(a + b) / 2.0 for a, b in zip(x1, x2)]
        P = [a + b for a, b in zip(p1, p2)]
        return space.signature.dot(P, X) - tau

    cset = ConstraintSet(
        space,
        [
            Constraint("chi1", chi1, ConstraintRole.GAUGE),
            Constraint("chi2", chi2, ConstraintRole.GAUGE, tau_dependent=True),
            make_shell(0, m1),
            make_shell(1, m2),
        ],
        potential=V,
    )
    return cset, space


def kinematical_gauge_model(
    m1: float, m2: float, V: InteractionPotential, signature: MetricSignature = MINKOWSKI
) -> tuple[ConstraintSet, PhaseSpace]:
    """Same shells, but the evolution gauge pins the laboratory time
    difference-and-mean instead of the state of motion: chi2 = x1^0 - tau
    with chi1 = x1^0 - x2^0.  Used to document the world-line failure."""
    base, space = two_particle_model(m1, m2, V, signature)

    def chi1(z, tau):
        return z[space.ix(0, 0)] - z[space.ix(1, 0)]

    def chi2(z, tau):
        return 0.5 * (z[space.ix(0, 0)] + z[space.ix(1, 0)]) - tau

    cset = ConstraintSet(
        space,
        [
            Constraint("chi1", chi1, ConstraintRole.GAUGE),
            Constraint("chi2", chi2, ConstraintRole.GAUGE, tau_dependent=True),
            base.constraints[2],
            base.constraints[3],
        ],
        potential=V,
    )
    return cset, space


def sample_on_shell(
    cset: ConstraintSet,
    rng: np.random.Generator,
    masses: tuple[float, float],
    tau: float = 0.0,
    newton_tol: float = 1e-12,
):
    """Random point on the full constraint surface.

    Spatial momenta and positions are sampled, the energy components are
    fixed by Newton iteration on the two mass-shell conditions, and the
    positions are shifted exactly along P to satisfy both gauges.
    """
    space = cset.space
    z = np.zeros(space.dim)
    for alpha in range(2):
        z[space.ix(alpha, 0) : space.ix(alpha, 0) + 4] = rng.uniform(-1, 1, 4)
        z[space.ip(alpha, 1) : space.ip(alpha, 1) + 3] = rng.uniform(-0.6, 0.6, 3)
        z[space.ip(alpha, 0)] = math.sqrt(
            masses[alpha] ** 2 + float(np.sum(z[space.ip(alpha, 1) : space.ip(alpha, 1) + 3] ** 2))
        )
    shells = cset.shells
    for _ in range(60):
        vals = [float(s(z, tau)) for s in shells]
        if max(abs(v) for v in vals) < newton_tol:
            break
        for alpha, shell in enumerate(shells):
            # Newton in the energy component, other variables frozen
            i0 = space.ip(alpha, 0)
            val = float(shell(z, tau))
            seeded = list(z)
            seeded[i0] = Dual(z[i0], 1.0)
            slope = shell(seeded, tau).b
            z[i0] -= val / slope
    else:
        raise ConstraintDrift(tau, max(abs(float(s(z, tau))) for s in shells))

    P = np.asarray(space.p(z, 0)) + np.asarray(space.p(z, 1))
    diag = np.asarray(space.signature.diag)
    PP = float(P @ (diag * P))
    x1 = np.asarray(space.x(z, 0))
    x2 = np.asarray(space.x(z, 1))
    r = (x1 - x2) / 2.0
    s = -float(P @ (diag * r)) / PP
    x1 = x1 + 2.0 * s * P  # moves r along P; xi and the shells are untouched
    X = (x1 + x2) / 2.0
    u = (tau - float(P @ (diag * X))) / PP
    x1 = x1 + u * P
    x2 = x2 + u * P
    z[space.ix(0, 0) : space.ix(0, 0) + 4] = x1
    z[space.ix(1, 0) : space.ix(1, 0) + 4] = x2
    cset.require_on_surface(z, tau)
    return z


def hamiltonian_flow_rhs(cset: ConstraintSet, z, tau):
    """dz/dtau = sum_i v_i X_{K_i} with the multipliers fixed by exact
    preservation of the gauge constraints."""
    space = cset.space
    gauges, shells = cset.gauges, cset.shells
    zs = list(z)
    shell_grads = [_grad_z(s.fn, zs, tau) for s in shells]
    gauge_grads = [_grad_z(g.fn, zs, tau) for g in gauges]
    A = np.asarray(
        [
            [float(_pb_from_grads(space, gg, sg)) for sg in shell_grads]
            for gg in gauge_grads
        ]
    )

    def tau_rate(g):
        out = g(zs, Dual(tau, 1.0))
        return out.b if is_dual(out) else 0.0

    rhs_tau = np.asarray([-tau_rate(g) for g in gauges])
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond >= 1e10:
        raise SingularConstraintMatrix(cond)
    v = np.linalg.solve(A, rhs_tau)
    diag = space.signature.diag
    out = np.zeros(space.dim)
    for i, grad in enumerate(shell_grads):
        for alpha in range(space.particles):
            for mu in range(4):
                xi_idx, pi_idx = space.ix(alpha, mu), space.ip(alpha, mu)
                out[xi_idx] += v[i] * diag[mu] * float(grad[pi_idx])
                out[pi_idx] -= v[i] * diag[mu] * float(grad[xi_idx])
    return out, v


def _project_to_surface(cset: ConstraintSet, z, tau, tol=1e-12, max_iter=6):
    space = cset.space
    out = np.array(z, dtype=float)
    for _ in range(max_iter):
        vals = cset.values(out, tau)
        if float(np.max(np.abs(vals))) <= tol:
            return out
        J = np.asarray(
            [
                [real_part(v) for v in _grad_z(c.fn, list(out), tau)]
                for c in cset.constraints
            ]
        )
        correction = J.T @ np.linalg.solve(J @ J.T, vals)
        out = out - correction
    return out


def constrained_flow(
    cset: ConstraintSet,
    point0,
    tau_span: tuple[float, float],
    cfg: IntegratorConfig | None = None,
    drift_limit: float = 1e-9,
    hard_limit: float = 1e-7,
) -> Trajectory:
    """Integrate the multiplier-fixed flow on the constraint surface.

    The four constraint values are monitored at every accepted step; drift
    past ``drift_limit`` triggers a Newton projection back to the surface,
    and exceeding ``hard_limit`` aborts with ConstraintDrift.
    """
    cfg = cfg or IntegratorConfig()
    t0, t1 = tau_span
    z0 = np.asarray(point0, dtype=float)
    cset.require_on_surface(z0, t0)

    def rhs(tau, z):
        return hamiltonian_flow_rhs(cset, z, tau)[0]

    stepper = Dopri45Stepper(rhs, t0, z0, cfg)
    times = [t0]
    states = [z0.copy()]
    interp = []
    while stepper.t < t1 - 1e-14 * max(1.0, abs(t1)):
        tau, z, record = stepper.step(t1)
        drift = float(np.max(np.abs(cset.values(z, tau))))
        if drift > hard_limit:
            raise ConstraintDrift(tau, drift)
        if drift > drift_limit:
            z = _project_to_surface(cset, z, tau)
            stepper.y = z
            stepper.reset_derivative()
        times.append(tau)
        states.append(np.array(stepper.y))
        interp.append(record)
    names = []
    for alpha in range(cset.space.particles):
        names += [f"x{mu}@{alpha}" for mu in range(4)]
        names += [f"p{mu}@{alpha}" for mu in range(4)]
    return Trajectory(
        times=np.asarray(times),
        states=np.asarray(states),
        method="rk45",
        meta={"coord_names": tuple(names), "config": cfg},
        _interp=interp,
    )


def position_noncommutativity(cset: ConstraintSet | None, space: PhaseSpace, point, tau: float = 0.0):
    """Per-particle tables of {x^mu, x^nu} under the Dirac bracket (or the
    plain canonical bracket when no constraints are supplied)."""
    tables = []
    worst = 0.0
    for alpha in range(space.particles):
        T = np.zeros((4, 4))
        for mu in range(4):
            for nu in range(mu + 1, 4):
                f = coordinate_fn(space, "x", alpha, mu)
                g = coordinate_fn(space, "x", alpha, nu)
                if cset is None:
                    val = float(canonical_pb(space, f, g, point, tau))
                else:
                    val = float(dirac_bracket(cset, f, g, point, tau))
                T[mu, nu] = val
                T[nu, mu] = -val
                worst = max(worst, abs(val))
        tables.append(T)
    return {"tables": tables, "max_abs": worst}


def poincare_transformation_fn(space: PhaseSpace, omega: np.ndarray, a: np.ndarray) -> Callable:
    """Generator G = (1/2) omega^{mu nu} J_{mu nu} - a^mu P_mu."""
    diag = space.signature.diag

    def fn(z, tau):
        total = 0.0
        for alpha in range(space.particles):
            x = space.x(z, alpha)
            p = space.p(z, alpha)
            x_low = [diag[m] * x[m] for m in range(4)]
            p_low = [diag[m] * p[m] for m in range(4)]
            for mu in range(4):
                for nu in range(4):
                    total = total + 0.5 * omega[mu][nu] * (
                        x_low[mu] * p_low[nu] - x_low[nu] * p_low[mu]
                    )
            for mu in range(4):
                total = total - a[mu] * p_low[mu]
        return total

    return fn


def wlc_residual(
    cset: ConstraintSet,
    omega: np.ndarray,
    a: np.ndarray,
    point,
    tau: float = 0.0,
) -> dict:
    """World-line condition residual for an infinitesimal transformation.

    Compares the Dirac-bracket action of the generator on each position
    with the geometric action plus a per-particle reparametrization found
    by scalar least squares along the flow direction; the residual is the
    post-fit maximum component mismatch.
    """
    space = cset.space
    omega = np.asarray(omega, dtype=float)
    a = np.asarray(a, dtype=float)
    if np.max(np.abs(omega + omega.T)) > 1e-15:
        raise ValueError("omega must be antisymmetric")
    z = list(point)
    cset.require_on_surface(z, tau)
    G = poincare_transformation_fn(space, omega, a)
    flow, _ = hamiltonian_flow_rhs(cset, z, tau)
    diag = space.signature.diag
    per_particle = []
    for alpha in range(space.particles):
        lhs = np.empty(4)
        geo = np.empty(4)
        u = np.empty(4)
        for mu in range(4):
            xf = coordinate_fn(space, "x", alpha, mu)
            lhs[mu] = float(dirac_bracket(cset, G, xf, z, tau))
            x = [float(v) for v in space.x(z, alpha)]
            geo[mu] = sum(omega[mu][nu] * diag[nu] * x[nu] for nu in range(4)) + a[mu]
            u[mu] = flow[space.ix(alpha, mu)]
        denom = float(u @ u)
        delta_tau = float(u @ (lhs - geo)) / denom if denom > 0 else 0.0
        residual = float(np.max(np.abs(lhs - geo - u * delta_tau)))
        per_particle.append({"residual": residual, "delta_tau": delta_tau})
    return {
        "residual": max(p["residual"] for p in per_particle),
        "per_particle": per_particle,
    }


# -- published two-particle matrix, for side-by-side reporting ---------------


def published_constraint_matrix(cset: ConstraintSet, point, tau: float = 0.0) -> dict:
    """The gauge-shell bracket block as published, next to the one computed
    from first principles.

    The published entries and determinant (with the stray factors they
    carry) are reproduced verbatim for comparison; the first-principles
    block is the ground truth.
    """
    space = cset.space
    z = list(point)
    diag = space.signature.diag
    p1 = [float(v) for v in space.p(z, 0)]
    p2 = [float(v) for v in space.p(z, 1)]
    x1 = [float(v) for v in space.x(z, 0)]
    x2 = [float(v) for v in space.x(z, 1)]
    P = [a + b for a, b in zip(p1, p2)]
    r = [(a - b) / 2.0 for a, b in zip(x1, x2)]
    dot = space.signature.dot
    p1p1, p2p2, p1p2 = dot(p1, p1), dot(p2, p2), dot(p1, p2)
    PP, Pr = dot(P, P), dot(P, r)
    xi = dot(r, r) - Pr * Pr / PP
    vprime = float(cset.potential.derivative(xi)) if cset.potential else 0.0
    printed = np.array(
        [
            [p1p1 + p1p2 + vprime, p1p2 + p2p2 + 2.0 * vprime / PP**2],
            [p1p1 + p1p2 + Pr**2 / PP**2, p1p2 + p2p2 + Pr**2 / PP**2],
        ]
    )
    printed_det = (p1p1 - p2p2) * (Pr**2 / PP**2 - 2.0 * vprime / PP**2)
    measured = constraint_matrix(cset, z, tau)
    return {
        "measured": measured.tolist(),
        "measured_det": float(np.linalg.det(measured)),
        "published": printed.tolist(),
        "published_det": float(printed_det),
    }


def sample_on_shell_kinematical(
    cset: ConstraintSet,
    rng: np.random.Generator,
    masses: tuple[float, float],
    tau: float = 0.0,
    newton_tol: float = 1e-12,
):
    """On-shell sampler for the equal-laboratory-time gauge: pin both time
    components to tau, fix the energies by Newton, polish with a full
    Newton projection."""
    space = cset.space
    z = np.zeros(space.dim)
    for alpha in range(2):
        z[space.ix(alpha, 0)] = tau
        z[space.ix(alpha, 0) + 1 : space.ix(alpha, 0) + 4] = rng.uniform(-1, 1, 3)
        z[space.ip(alpha, 1) : space.ip(alpha, 1) + 3] = rng.uniform(-0.6, 0.6, 3)
        z[space.ip(alpha, 0)] = math.sqrt(
            masses[alpha] ** 2
            + float(np.sum(z[space.ip(alpha, 1) : space.ip(alpha, 1) + 3] ** 2))
        )
    shells = cset.shells
    for _ in range(60):
        vals = [float(s(z, tau)) for s in shells]
        if max(abs(v) for v in vals) < newton_tol:
            break
        for alpha, shell in enumerate(shells):
            i0 = space.ip(alpha, 0)
            val = float(shell(z, tau))
            seeded = list(z)
            seeded[i0] = Dual(z[i0], 1.0)
            z[i0] -= val / shell(seeded, tau).b
    z = _project_to_surface(cset, z, tau)
    cset.require_on_surface(z, tau)
    return z


# -- deformed position-Lorentz algebra ----------------------------------------


@dataclass
class DeformedPoincare:
    """Bracket structure on the ten-dimensional basis (x_0..x_3, l_{mu nu})
    where positions close on the Lorentz block divided by the scale K."""

    K: float
    signature: MetricSignature = MINKOWSKI

    def __post_init__(self):
        if self.K <= 0:
            raise ValueError("the deformation scale must be positive")
        self.labels = [f"x{m}" for m in range(4)] + [
            f"l{m}{n}" for m in range(4) for n in range(m + 1, 4)
        ]
        self._pair_index = {}
        for idx, (m, n) in enumerate(
            [(m, n) for m in range(4) for n in range(m + 1, 4)]
        ):
            self._pair_index[(m, n)] = 4 + idx

    @property
    def dim(self) -> int:
        return 10

    def _l_vec(self, mu: int, nu: int) -> np.ndarray:
        out = np.zeros(10)
        if mu == nu:
            return out
        if mu < nu:
            out[self._pair_index[(mu, nu)]] = 1.0
        else:
            out[self._pair_index[(nu, mu)]] = -1.0
        return out

    def _x_vec(self, mu: int) -> np.ndarray:
        out = np.zeros(10)
        out[mu] = 1.0
        return out

    def bracket_basis(self, i: int, j: int) -> np.ndarray:
        eta = self.signature.diag
        if i < 4 and j < 4:
            return self._l_vec(i, j) / self.K
        if i >= 4 and j < 4:
            pairs = [(m, n) for m in range(4) for n in range(m + 1, 4)]
            mu, nu = pairs[i - 4]
            rho = j
            out = np.zeros(10)
            if mu == rho:
                out += eta[mu] * self._x_vec(nu)
            if nu == rho:
                out -= eta[nu] * self._x_vec(mu)
            return out
        if i < 4 and j >= 4:
            return -self.bracket_basis(j, i)
        pairs = [(m, n) for m in range(4) for n in range(m + 1, 4)]
        mu, nu = pairs[i - 4]
        rho, sig = pairs[j - 4]
        out = np.zeros(10)
        if mu == rho:
            out += eta[mu] * self._l_vec(nu, sig)
        if mu == sig:
            out -= eta[mu] * self._l_vec(nu, rho)
        if nu == rho:
            out -= eta[nu] * self._l_vec(mu, sig)
        if nu == sig:
            out += eta[nu] * self._l_vec(mu, rho)
        return out

    def bracket(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        out = np.zeros(10)
        for i in range(10):
            if u[i] == 0.0:
                continue
            for j in range(10):
                if v[j] == 0.0:
                    continue
                out += u[i] * v[j] * self.bracket_basis(i, j)
        return out

    def jacobi_residual_all(self) -> float:
        worst = 0.0
        basis = [np.eye(10)[i] for i in range(10)]
        for i in range(10):
            for j in range(10):
                for k in range(10):
                    total = (
                        self.bracket(basis[i], self.bracket(basis[j], basis[k]))
                        + self.bracket(basis[j], self.bracket(basis[k], basis[i]))
                        + self.bracket(basis[k], self.bracket(basis[i], basis[j]))
                    )
                    worst = max(worst, float(np.max(np.abs(total))))
        return worst

    def position_block(self) -> np.ndarray:
        """Coefficients of {x_rho, x_sigma} on the Lorentz basis; scales as
        1/K exactly."""
        out = np.zeros((4, 4))
        for rho in range(4):
            for sig in range(4):
                vec = self.bracket_basis(rho, sig)
                out[rho, sig] = float(np.max(np.abs(vec)))
        return out


def deformed_poincare(K: float, signature: MetricSignature = MINKOWSKI) -> DeformedPoincare:
    return DeformedPoincare(K, signature)

"""ODE integration: fixed-step RK4 and adaptive Dormand-Prince RK45 with
dense output, trajectory resampling, conserved-quantity drift measurement,
and second-order lifts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from geored.errors import BlowUp, StepLimitExceeded

BLOWUP_LIMIT = 1e12

# Dormand-Prince 5(4) tableau.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# Quartic dense-output weights (Shampine interpolant for the pair above).
_DP_P = np.array(
    [
        [
            1.0,
            -8048581381 / 2820520608,
            8663915743 / 2820520608,
            -12715105075 / 11282082432,
        ],
        [0.0, 0.0, 0.0, 0.0],
        [
            0.0,
            131558114200 / 32700410799,
            -68118460800 / 10900136933,
            87487479700 / 32700410799,
        ],
        [
            0.0,
            -1754552775 / 470086768,
            14199869525 / 1410260304,
            -10690763975 / 1880347072,
        ],
        [
            0.0,
            127303824393 / 49829197408,
            -318862633887 / 49829197408,
            701980252875 / 199316789632,
        ],
        [
            0.0,
            -282668133 / 205662961,
            2019193451 / 616988883,
            -1453857185 / 822651844,
        ],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45"  # "rk45" adaptive or "rk4" fixed step
    dt: float = 1e-3
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.method not in ("rk45", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")
        if min(self.dt, self.abs_tol, self.rel_tol) <= 0:
            raise ValueError("dt and tolerances must be positive")


@dataclass(frozen=True)
class VectorFieldSystem:
    """Explicit first-order ODE on an n-dimensional chart.

    ``rhs`` is called as ``rhs(x)`` for autonomous systems and ``rhs(x, t)``
    otherwise; it may return any sequence of length ``dim``.
    """

    dim: int
    rhs: Callable
    coord_names: tuple[str, ...]
    autonomous: bool = True
    label: str = ""

    def __post_init__(self):
        if len(self.coord_names) != self.dim:
            raise ValueError("coord_names length must equal dim")

    def eval_rhs(self, x, t: float = 0.0):
        return self.rhs(x) if self.autonomous else self.rhs(x, t)


@dataclass
class Trajectory:
    """Samples of a flow plus per-step interpolation data."""

    times: np.ndarray
    states: np.ndarray
    method: str
    meta: dict = field(default_factory=dict)
    _interp: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states length mismatch")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t1(self) -> float:
        return float(self.times[-1])

    def sample(self, t: float) -> np.ndarray:
        """Dense-output value at time ``t`` within the integrated span."""
        if not (self.t0 - 1e-12 <= t <= self.t1 + 1e-12):
            raise ValueError(f"t={t} outside [{self.t0}, {self.t1}]")
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        idx = min(max(idx, 0), len(self._interp) - 1)
        kind, t_lo, h, data = self._interp[idx]
        theta = (t - t_lo) / h
        if kind == "poly":
            y0, coeffs = data
            powers = np.array([theta, theta**2, theta**3, theta**4])
            return y0 + h * (coeffs @ powers)
        y0, y1, f0, f1 = data
        h00 = (1 + 2 * theta) * (1 - theta) ** 2
        h10 = theta * (1 - theta) ** 2
        h01 = theta**2 * (3 - 2 * theta)
        h11 = theta**2 * (theta - 1)
        return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1

    def resample(self, ts: Sequence[float]) -> np.ndarray:
        return np.asarray([self.sample(float(t)) for t in ts])

    def to_csv(self, path, time_label: str = "t"):
        """Time plus one column per coordinate, 17 significant digits."""
        names = self.meta.get("coord_names")
        header = [time_label] + (
            list(names) if names else [f"x{i}" for i in range(self.states.shape[1])]
        )
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for t, row in zip(self.times, self.states):
                cells = [f"{t:.17g}"] + [f"{v:.17g}" for v in row]
                fh.write(",".join(cells) + "\n")


def _check_state(y: np.ndarray, t_last: float):
    if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > BLOWUP_LIMIT:
        raise BlowUp(t_last, y)


class Dopri45Stepper:
    """Single-step driver for the adaptive pair; exposed so callers can
    interleave work (re-projection, constraint snapping) between steps."""

    def __init__(self, rhs_t, t0: float, y0: np.ndarray, cfg: IntegratorConfig):
        self.rhs = rhs_t
        self.t = float(t0)
        self.y = np.array(y0, dtype=float)
        self.cfg = cfg
        self.k1 = np.asarray(rhs_t(self.t, self.y), dtype=float)
        self.h = self._initial_step()
        self.steps = 0

    def _initial_step(self) -> float:
        scale = self.cfg.abs_tol + self.cfg.rel_tol * np.abs(self.y)
        d0 = np.sqrt(np.mean((self.y / scale) ** 2))
        d1 = np.sqrt(np.mean((self.k1 / scale) ** 2))
        h0 = 1e-6 if d1 < 1e-12 else 0.01 * d0 / d1
        return max(min(h0, 1.0), 1e-10)

    def reset_derivative(self):
        """Recompute the FSAL stage after an external state modification."""
        self.k1 = np.asarray(self.rhs(self.t, self.y), dtype=float)

    def step(self, t_limit: float):
        """Advance one accepted step, clipped to ``t_limit``.

        Returns (t_new, y_new, interp_record).
        """
        cfg = self.cfg
        while True:
            self.steps += 1
            if self.steps > cfg.max_steps:
                raise StepLimitExceeded(self.t, cfg.max_steps)
            h = min(self.h, t_limit - self.t)
            K = np.empty((7, len(self.y)))
            K[0] = self.k1
            for s in range(1, 7):
                ys = self.y + h * (_DP_A[s] @ K[:s])
                K[s] = self.rhs(self.t + _DP_C[s] * h, ys)
            y_new = self.y + h * (_DP_B @ K)
            err = h * (_DP_E @ K)
            scale = cfg.abs_tol + cfg.rel_tol * np.maximum(
                np.abs(self.y), np.abs(y_new)
            )
            err_norm = np.sqrt(np.mean((err / scale) ** 2))
            if err_norm <= 1.0:
                _check_state(y_new, self.t)
                coeffs = K.T @ _DP_P
                record = ("poly", self.t, h, (self.y.copy(), coeffs))
                self.t = self.t + h
                self.y = y_new
                self.k1 = K[6]  # FSAL
                factor = 5.0 if err_norm == 0.0 else min(5.0, 0.9 * err_norm**-0.2)
                self.h = abs(h) * factor
                return self.t, self.y, record
            self.h = h * max(0.2, 0.9 * err_norm**-0.2)
            if self.h < 1e-14 * max(1.0, abs(self.t)):
                raise StepLimitExceeded(self.t, cfg.max_steps)


def integrate(
    sys: VectorFieldSystem,
    x0: Sequence[float],
    t0: float,
    t1: float,
    cfg: IntegratorConfig | None = None,
) -> Trajectory:
    """Flow map sampler from ``t0`` to ``t1 > t0``.

    RK45 controls local error by the configured tolerances; RK4 marches the
    fixed step ``cfg.dt``.  Any non-finite or > 1e12 state component raises
    ``BlowUp`` carrying the last good time (never clamped).
    """
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    cfg = cfg or IntegratorConfig()
    y0 = np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(y0)):
        raise ValueError("initial state must be finite")

    def rhs_t(t, y):
        return np.asarray(sys.eval_rhs(y, t), dtype=float)

    meta = {"coord_names": sys.coord_names, "config": cfg}
    if cfg.method == "rk4":
        return _integrate_rk4(rhs_t, y0, t0, t1, cfg, meta)
    stepper = Dopri45Stepper(rhs_t, t0, y0, cfg)
    times = [t0]
    states = [y0.copy()]
    interp = []
    while stepper.t < t1 - 1e-14 * max(1.0, abs(t1)):
        t, y, record = stepper.step(t1)
        times.append(t)
        states.append(y.copy())
        interp.append(record)
    return Trajectory(
        times=np.asarray(times),
        states=np.asarray(states),
        method="rk45",
        meta=meta,
        _interp=interp,
    )


def _integrate_rk4(rhs_t, y0, t0, t1, cfg, meta) -> Trajectory:
    n_steps = max(1, int(np.ceil((t1 - t0) / cfg.dt - 1e-12)))
    if n_steps > cfg.max_steps:
        raise StepLimitExceeded(t0, cfg.max_steps)
    h = (t1 - t0) / n_steps
    times = [t0]
    states = [np.array(y0)]
    interp = []
    t, y = t0, np.array(y0)
    f_here = rhs_t(t, y)
    for _ in range(n_steps):
        k1 = f_here
        k2 = rhs_t(t + h / 2, y + h / 2 * k1)
        k3 = rhs_t(t + h / 2, y + h / 2 * k2)
        k4 = rhs_t(t + h, y + h * k3)
        y_new = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        _check_state(y_new, t)
        f_new = rhs_t(t + h, y_new)
        interp.append(("hermite", t, h, (y.copy(), y_new.copy(), k1, f_new)))
        t, y, f_here = t + h, y_new, f_new
        times.append(t)
        states.append(y.copy())
    return Trajectory(
        times=np.asarray(times),
        states=np.asarray(states),
        method="rk4",
        meta=meta,
        _interp=interp,
    )


def conserved_drift(sys: VectorFieldSystem, f, traj: Trajectory) -> float:
    """Max over samples of |f(x(t)) - f(x(0))|."""
    arity = getattr(f, "arity", sys.dim)
    if arity != sys.dim:
        raise ValueError("function arity must match system dimension")
    ref = float(f(traj.states[0]))
    return max(abs(float(f(state)) - ref) for state in traj.states)


def second_order_lift(
    n: int,
    force: Callable,
    coord_names: tuple[str, ...] | None = None,
    autonomous: bool = True,
    label: str = "",
) -> VectorFieldSystem:
    """Lift a force law (q, v, t) -> n-vector to the 2n first-order system
    (q, v) -> (v, force)."""
    names = coord_names or tuple(
        [f"q{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)]
    )

    if autonomous:

        def rhs(x):
            q, v = x[:n], x[n:]
            acc = force(q, v, 0.0)
            return [x[n + i] for i in range(n)] + [acc[i] for i in range(n)]

    else:

        def rhs(x, t):
            q, v = x[:n], x[n:]
            acc = force(q, v, t)
            return [x[n + i] for i in range(n)] + [acc[i] for i in range(n)]

    return VectorFieldSystem(
        dim=2 * n, rhs=rhs, coord_names=names, autonomous=autonomous, label=label
    )

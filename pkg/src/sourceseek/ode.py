"""Deterministic fixed-step integration with sampled-trajectory output.

The integrator is a classical fourth-order Runge-Kutta scheme with a fixed
step; the final step is shortened so the requested end time is hit exactly.
There is deliberately no adaptive error control: the systems in this package
are forced at known frequencies, so the step is tied to the fastest
oscillation and results are bit-for-bit reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "IntegrationAborted",
    "integrate",
    "first_entry_time",
]

TWO_PI = 2.0 * math.pi


class IntegrationAborted(RuntimeError):
    """Raised when integration cannot continue.

    Attributes
    ----------
    last_valid_time : float
        Last time at which the state was still acceptable.
    partial : Trajectory
        Samples recorded up to (and including) the last valid state.
    """

    def __init__(self, message: str, last_valid_time: float, partial: "Trajectory"):
        super().__init__(message)
        self.last_valid_time = last_valid_time
        self.partial = partial


@dataclass(frozen=True)
class IntegratorConfig:
    """Step-size policy for :func:`integrate`.

    ``dt`` must resolve the fastest forcing frequency with at least
    ``samples_per_period`` steps per period; pass ``omega_max`` to have that
    checked (use the highest input frequency, which for the
    curvature-inverting scheme is twice the dither frequency because of the
    double-frequency demodulation).
    """

    dt: float
    samples_per_period: int = 60
    output_stride: int = 1
    omega_max: float | None = None

    def __post_init__(self):
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.samples_per_period < 40:
            raise ValueError(
                f"samples_per_period must be >= 40, got {self.samples_per_period}"
            )
        if self.output_stride < 1:
            raise ValueError("output_stride must be >= 1")
        if self.omega_max is not None:
            limit = TWO_PI / (self.omega_max * self.samples_per_period)
            if self.dt > limit * (1.0 + 1e-12):
                raise ValueError(
                    f"dt={self.dt} too large for omega_max={self.omega_max}: "
                    f"need dt <= {limit}"
                )

    @classmethod
    def for_frequency(
        cls, omega_max: float, samples_per_period: int = 60, output_stride: int = 1
    ) -> "IntegratorConfig":
        """Config whose step resolves ``omega_max`` at the requested resolution."""
        dt = TWO_PI / (omega_max * samples_per_period)
        return cls(
            dt=dt,
            samples_per_period=samples_per_period,
            output_stride=output_stride,
            omega_max=omega_max,
        )


@dataclass
class Trajectory:
    """Time-stamped state samples plus metadata identifying their origin."""

    times: np.ndarray
    states: np.ndarray
    frame: str = ""
    scheme: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 2 or self.states.shape[0] != self.times.shape[0]:
            raise ValueError("states must be (n_samples, dim) matching times")

    def validate(self) -> None:
        """Check sample-grid invariants: strictly increasing, uniform spacing
        (the final gap may be shorter when the last step was shortened)."""
        diffs = np.diff(self.times)
        if len(diffs) == 0:
            return
        if not np.all(diffs > 0.0):
            raise ValueError("times must be strictly increasing")
        if len(diffs) >= 2:
            spacing = diffs[0]
            if not np.allclose(diffs[:-1], spacing, rtol=1e-9, atol=1e-12):
                raise ValueError("recorded times are not uniformly spaced")
            if diffs[-1] > spacing * (1.0 + 1e-9):
                raise ValueError("final gap exceeds the recording stride")

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self, path) -> Path:
        """Write ``t,s0,s1,...`` rows in full double precision."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = "t," + ",".join(f"s{i}" for i in range(self.dim))
        data = np.column_stack([self.times, self.states])
        np.savetxt(path, data, fmt="%.17g", delimiter=",", header=header, comments="")
        return path


def integrate(rhs, x0, t0: float, t1: float, config: IntegratorConfig,
              guard=None, frame: str = "", scheme: str = "",
              params: dict | None = None) -> Trajectory:
    """Integrate ``dx/dt = rhs(t, x)`` from ``t0`` to ``t1`` with fixed-step RK4.

    Parameters
    ----------
    rhs : callable
        ``rhs(t, x) -> dx`` with ``x`` a flat float array.
    guard : callable, optional
        ``guard(t, x) -> bool`` evaluated after every accepted step; a False
        result aborts with a step-size violation report.

    Returns
    -------
    Trajectory
        States recorded every ``config.output_stride`` steps; the initial and
        final states are always included.

    Raises
    ------
    IntegrationAborted
        On a non-finite state or a guard violation; carries the last valid
        time and the partial trajectory.
    """
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got [{t0}, {t1}]")
    dt = config.dt
    span = t1 - t0
    n_full = int(math.floor(span / dt * (1.0 + 1e-12)))
    remainder = span - n_full * dt
    has_tail = remainder > 1e-12 * max(span, dt)

    y = np.array(x0, dtype=float).ravel()
    if guard is not None and not guard(t0, y):
        raise ValueError(f"initial state violates the guard at t={t0}")

    rec_times = [t0]
    rec_states = [y.copy()]
    stride = config.output_stride
    meta = dict(frame=frame, scheme=scheme, params=dict(params or {}))

    def partial() -> Trajectory:
        return Trajectory(np.array(rec_times), np.array(rec_states), **meta)

    t = t0
    total_steps = n_full + (1 if has_tail else 0)
    for i in range(total_steps):
        h = dt if i < n_full else remainder
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1)
        k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t_new = t1 if i + 1 == total_steps else t0 + (i + 1) * dt
        if not np.all(np.isfinite(y)):
            raise IntegrationAborted(
                f"non-finite state at t={t_new}; last valid time t={t}",
                last_valid_time=t,
                partial=partial(),
            )
        if guard is not None and not guard(t_new, y):
            raise IntegrationAborted(
                f"state guard violated at t={t_new} (step-size violation: "
                f"reduce dt below {h}); last valid time t={t}",
                last_valid_time=t,
                partial=partial(),
            )
        t = t_new
        if (i + 1) % stride == 0 and i != total_steps - 1:
            rec_times.append(t)
            rec_states.append(y.copy())
    # final point always recorded
    if rec_times[-1] != t:
        rec_times.append(t)
        rec_states.append(y.copy())

    traj = Trajectory(np.array(rec_times), np.array(rec_states), **meta)
    return traj


def first_entry_time(traj: Trajectory, center, radius: float, components) -> float | None:
    """Earliest recorded time after which the selected components stay inside
    the ball of ``radius`` around ``center`` through the end of the trajectory.

    Returns None when the trajectory never settles into the ball.
    """
    if not radius > 0.0:
        raise ValueError(f"radius must be > 0, got {radius}")
    comps = list(components)
    if len(comps) == 0:
        raise ValueError("components must be a non-empty index set")
    center = np.asarray(center, dtype=float)
    if center.shape != (len(comps),):
        raise ValueError(
            f"center shape {center.shape} does not match {len(comps)} components"
        )
    sel = traj.states[:, comps]
    inside = np.linalg.norm(sel - center, axis=1) <= radius
    if inside.all():
        return float(traj.times[0])
    last_outside = int(np.where(~inside)[0][-1])
    if last_outside == len(inside) - 1:
        return None
    return float(traj.times[last_outside + 1])

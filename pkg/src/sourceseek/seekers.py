"""Closed-loop source-seeking schemes and their averaged counterparts.

Two schemes are implemented. The gradient seeker modulates the forward speed
with a dithered, high-pass-filtered field measurement while the turn rate is
held constant; its mean motion climbs the field gradient, so its convergence
rate inherits the unknown field curvature. The curvature-inverting (newton)
seeker adds a scalar Riccati filter that estimates the inverse curvature from
a double-frequency demodulation and feeds it back into the forward speed,
which makes the mean convergence rate a pure function of the chosen gains.

Because the turn rate is constant, the heading is eliminated analytically
(theta = omega0 * t) in every closed-loop right-hand side here; the raw
three-state unicycle is only needed for demonstrations and lives in
:mod:`sourceseek.model`.

State layouts used by :func:`closed_loop_rhs`:

======================  ==========================
(scheme, frame)         flat state
======================  ==========================
gradient, original      ``[x1, x2, nu]``
gradient, rotating_z    ``[z1, z2, nu]``
newton, original        ``[x1, x2, d, nu]``
newton, rotating_z      ``[z1, z2, d, nu]``
newton, rotating_z_log_d  ``[z1, z2, dtilde, nu]`` with ``d = exp(dtilde)``
======================  ==========================

and by :func:`averaged_rhs`:

================  ==========================
form              flat state
================  ==========================
gradient          ``[z1, z2, nu]``
newton            ``[z1, z2, d, nu]``
newton_exp        ``[z1, z2, dtilde, nu]``
newton_cascade    ``[r, z1, z2, dhat]``
================  ==========================
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .averaging import ControlAffineSystem, OscillatoryInput
from .model import FieldParams, SeekerParams

__all__ = [
    "Scheme",
    "Frame",
    "AveragedForm",
    "RotationY",
    "rotation_matrix",
    "spin_matrix",
    "to_rotating_frame",
    "from_rotating_frame",
    "gradient_control",
    "newton_control",
    "closed_loop_rhs",
    "closed_loop",
    "closed_loop_dimension",
    "averaged_rhs",
    "averaged_closed_loop",
    "averaged_dimension",
    "gradient_affine_system",
    "newton_affine_system",
]


class Scheme(enum.Enum):
    GRADIENT = "gradient"
    NEWTON = "newton"


class Frame(enum.Enum):
    ORIGINAL = "original"
    ROTATING_Z = "rotating_z"
    ROTATING_Z_LOG_D = "rotating_z_log_d"
    CASCADE_SHIFTED = "cascade_shifted"
    AVERAGED_GRADIENT = "averaged_gradient"
    AVERAGED_NEWTON = "averaged_newton"
    AVERAGED_NEWTON_EXP = "averaged_newton_exp"


class AveragedForm(enum.Enum):
    GRADIENT = "gradient"
    NEWTON = "newton"
    NEWTON_EXP = "newton_exp"
    NEWTON_CASCADE = "newton_cascade"


#: frames whose right-hand side carries explicit oscillatory forcing
_FULL_FRAMES = {
    (Scheme.GRADIENT, Frame.ORIGINAL): 3,
    (Scheme.GRADIENT, Frame.ROTATING_Z): 3,
    (Scheme.NEWTON, Frame.ORIGINAL): 4,
    (Scheme.NEWTON, Frame.ROTATING_Z): 4,
    (Scheme.NEWTON, Frame.ROTATING_Z_LOG_D): 4,
}

_AVERAGED_DIMS = {
    AveragedForm.GRADIENT: 3,
    AveragedForm.NEWTON: 4,
    AveragedForm.NEWTON_EXP: 4,
    AveragedForm.NEWTON_CASCADE: 4,
}

#: newton-only frames, rejected for the gradient scheme
_NEWTON_ONLY = {
    Frame.ROTATING_Z_LOG_D,
    Frame.CASCADE_SHIFTED,
    Frame.AVERAGED_NEWTON,
    Frame.AVERAGED_NEWTON_EXP,
}

_GRADIENT_ONLY = {Frame.AVERAGED_GRADIENT}


def frame_compatible(frame: Frame, scheme: Scheme) -> bool:
    if scheme is Scheme.GRADIENT:
        return frame not in _NEWTON_ONLY
    return frame not in _GRADIENT_ONLY


# ---------------------------------------------------------------------------
# rotating frame


def rotation_matrix(t: float, omega0: float) -> np.ndarray:
    """The 2x2 frame matrix Y(t) = [[sin w0 t, cos w0 t], [-cos w0 t, sin w0 t]]."""
    s, c = math.sin(omega0 * t), math.cos(omega0 * t)
    return np.array([[s, c], [-c, s]])


def spin_matrix(omega0: float) -> np.ndarray:
    """Constant-turn-rate generator [[0, w0], [-w0, 0]]; satisfies
    d/dt Y(t)^T = Y(t)^T @ spin_matrix(w0)."""
    return np.array([[0.0, omega0], [-omega0, 0.0]])


@dataclass(frozen=True)
class RotationY:
    """Materialized rotation frame at a fixed time."""

    time: float
    omega0: float

    @property
    def matrix(self) -> np.ndarray:
        return rotation_matrix(self.time, self.omega0)


def to_rotating_frame(t: float, x, x_star, omega0: float) -> np.ndarray:
    """Co-rotating offset z = Y(t)^T (x - x_star)."""
    x = np.asarray(x, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    return rotation_matrix(t, omega0).T @ (x - x_star)


def from_rotating_frame(t: float, z, x_star, omega0: float) -> np.ndarray:
    """Inverse of :func:`to_rotating_frame`: x = x_star + Y(t) z."""
    z = np.asarray(z, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    return x_star + rotation_matrix(t, omega0) @ z


# ---------------------------------------------------------------------------
# control laws


def gradient_control(t: float, y: float, nu: float,
                     params: SeekerParams) -> tuple[float, float, float]:
    """Gradient-seeker control: returns (u1, u2, nu_dot).

    u1 = c (y - nu) sin(w t) + alpha_tilde cos(w t), u2 = omega0, and the
    high-pass filter state obeys nu_dot = h (y - nu).
    """
    w, wt = params.omega, params.omega * t
    err = y - nu
    u1 = params.c * err * math.sin(wt) + params.alpha_tilde * math.cos(wt)
    return u1, params.omega0, params.h_gain * err


def newton_control(t: float, y: float, nu: float, dee: float,
                   params: SeekerParams) -> tuple[float, float, float, float]:
    """Curvature-inverting control: returns (u1, u2, dee_dot, nu_dot).

    The Riccati state multiplies the demodulated feedback in u1 and is driven
    by the double-frequency component of the filtered measurement:
    dee_dot = omega_d d (1 - d g (y - nu) cos(2 w t)) with g the demodulation
    gain. dee <= 0 is not rejected here; the integrator guards it.
    """
    wt = params.omega * t
    err = y - nu
    u1 = params.c * dee * err * math.sin(wt) + params.alpha_tilde * math.cos(wt)
    dee_dot = params.omega_d * dee * (
        1.0 - dee * params.demod_gain * err * math.cos(2.0 * wt)
    )
    return u1, params.omega0, dee_dot, params.h_gain * err


# ---------------------------------------------------------------------------
# closed loops


def closed_loop_dimension(scheme: Scheme, frame: Frame) -> int:
    try:
        return _FULL_FRAMES[(scheme, frame)]
    except KeyError:
        raise ValueError(
            f"frame {frame.value!r} is not a closed-loop frame for scheme "
            f"{scheme.value!r}"
        ) from None


def closed_loop_rhs(scheme: Scheme, frame: Frame, t: float, state,
                    params: SeekerParams, field: FieldParams) -> np.ndarray:
    """Right-hand side of the selected closed loop at time ``t``.

    The heading is eliminated (theta = omega0 t). See the module docstring
    for the state layout per (scheme, frame). Dimension mismatches and
    scheme/frame mismatches raise ValueError.
    """
    return closed_loop(scheme, frame, params, field)(t, np.asarray(state, dtype=float))


def closed_loop(scheme: Scheme, frame: Frame, params: SeekerParams,
                field: FieldParams):
    """Build ``rhs(t, state)`` for the selected closed loop.

    The returned closure is immutable after construction and safe to
    evaluate concurrently.
    """
    dim = closed_loop_dimension(scheme, frame)
    w0 = params.omega0
    h = params.h_gain
    fs, hess = field.f_star, field.hessian
    xs1, xs2 = float(field.source[0]), float(field.source[1])
    c, at, wd = params.c, params.alpha_tilde, params.omega_d
    w, g2 = params.omega, params.demod_gain

    def check(state: np.ndarray) -> None:
        if state.shape != (dim,):
            raise ValueError(
                f"state shape {state.shape} does not match ({dim},) for "
                f"({scheme.value}, {frame.value})"
            )

    if scheme is Scheme.GRADIENT and frame is Frame.ORIGINAL:

        def rhs(t, s):
            check(s)
            dx1, dx2 = s[0] - xs1, s[1] - xs2
            y = fs - 0.5 * hess * (dx1 * dx1 + dx2 * dx2)
            err = y - s[2]
            u1 = c * err * math.sin(w * t) + at * math.cos(w * t)
            return np.array(
                [u1 * math.cos(w0 * t), u1 * math.sin(w0 * t), h * err]
            )

    elif scheme is Scheme.GRADIENT and frame is Frame.ROTATING_Z:

        def rhs(t, s):
            check(s)
            y = fs - 0.5 * hess * (s[0] * s[0] + s[1] * s[1])
            err = y - s[2]
            u1 = c * err * math.sin(w * t) + at * math.cos(w * t)
            return np.array([w0 * s[1], -w0 * s[0] + u1, h * err])

    elif scheme is Scheme.NEWTON and frame is Frame.ORIGINAL:

        def rhs(t, s):
            check(s)
            dx1, dx2 = s[0] - xs1, s[1] - xs2
            y = fs - 0.5 * hess * (dx1 * dx1 + dx2 * dx2)
            d, err = s[2], y - s[3]
            u1 = c * d * err * math.sin(w * t) + at * math.cos(w * t)
            ddot = wd * d * (1.0 - d * g2 * err * math.cos(2.0 * w * t))
            return np.array(
                [u1 * math.cos(w0 * t), u1 * math.sin(w0 * t), ddot, h * err]
            )

    elif scheme is Scheme.NEWTON and frame is Frame.ROTATING_Z:

        def rhs(t, s):
            check(s)
            y = fs - 0.5 * hess * (s[0] * s[0] + s[1] * s[1])
            d, err = s[2], y - s[3]
            u1 = c * d * err * math.sin(w * t) + at * math.cos(w * t)
            ddot = wd * d * (1.0 - d * g2 * err * math.cos(2.0 * w * t))
            return np.array([w0 * s[1], -w0 * s[0] + u1, ddot, h * err])

    elif scheme is Scheme.NEWTON and frame is Frame.ROTATING_Z_LOG_D:
        # substituting d = exp(dtilde) removes the unstable d = 0 fixed point

        def rhs(t, s):
            check(s)
            y = fs - 0.5 * hess * (s[0] * s[0] + s[1] * s[1])
            ed, err = math.exp(s[2]), y - s[3]
            u1 = c * ed * err * math.sin(w * t) + at * math.cos(w * t)
            dtdot = wd * (1.0 - ed * g2 * err * math.cos(2.0 * w * t))
            return np.array([w0 * s[1], -w0 * s[0] + u1, dtdot, h * err])

    else:  # pragma: no cover - closed_loop_dimension already rejected it
        raise ValueError(f"unsupported combination ({scheme}, {frame})")

    return rhs


# ---------------------------------------------------------------------------
# averaged systems (closed form)


def averaged_dimension(form: AveragedForm) -> int:
    return _AVERAGED_DIMS[form]


def averaged_rhs(form: AveragedForm, state, params: SeekerParams,
                 field: FieldParams) -> np.ndarray:
    """Closed-form averaged right-hand side (autonomous).

    gradient:        z' = (S + L) z,          nu' = h (F(z) - nu)
    newton:          z' = (S + L d) z,        d' = omega_d d (1 - H d),
                     nu' = h (F(z) - nu)
    newton_exp:      d replaced by exp(dtilde),
                     dtilde' = omega_d (1 - H exp(dtilde))
    newton_cascade:  shifted coordinates (r, z, dhat) with
                     r' = -h r + H z^T (S + Lt e^dhat) z,
                     z' = (S + Lt e^dhat) z, dhat' = -omega_d (e^dhat - 1)

    where S is the constant-turn generator, L = diag(0, -alpha H / 2), and
    Lt = L / H is the curvature-normalized damping.
    """
    return averaged_closed_loop(form, params, field)(0.0, np.asarray(state, dtype=float))


def averaged_closed_loop(form: AveragedForm, params: SeekerParams,
                         field: FieldParams):
    """Build ``rhs(t, state)`` for the averaged system (ignores ``t``)."""
    dim = _AVERAGED_DIMS[form]
    w0, h, wd = params.omega0, params.h_gain, params.omega_d
    fs, hess = field.f_star, field.hessian
    lam = -0.5 * params.alpha * hess  # damping entry of L
    lam_t = -0.5 * params.alpha      # damping entry of Lt = L / H

    def check(state: np.ndarray) -> None:
        if state.shape != (dim,):
            raise ValueError(
                f"state shape {state.shape} does not match ({dim},) for "
                f"averaged form {form.value!r}"
            )

    if form is AveragedForm.GRADIENT:

        def rhs(t, s):
            check(s)
            nu_dot = h * (fs - 0.5 * hess * (s[0] * s[0] + s[1] * s[1]) - s[2])
            return np.array([w0 * s[1], -w0 * s[0] + lam * s[1], nu_dot])

    elif form is AveragedForm.NEWTON:

        def rhs(t, s):
            check(s)
            d = s[2]
            nu_dot = h * (fs - 0.5 * hess * (s[0] * s[0] + s[1] * s[1]) - s[3])
            return np.array(
                [w0 * s[1], -w0 * s[0] + lam * d * s[1], wd * d * (1.0 - hess * d), nu_dot]
            )

    elif form is AveragedForm.NEWTON_EXP:

        def rhs(t, s):
            check(s)
            ed = math.exp(s[2])
            nu_dot = h * (fs - 0.5 * hess * (s[0] * s[0] + s[1] * s[1]) - s[3])
            return np.array(
                [w0 * s[1], -w0 * s[0] + lam * ed * s[1], wd * (1.0 - hess * ed), nu_dot]
            )

    elif form is AveragedForm.NEWTON_CASCADE:

        def rhs(t, s):
            check(s)
            r, z1, z2, dhat = s
            ed = math.exp(dhat)
            dz1 = w0 * z2
            dz2 = -w0 * z1 + lam_t * ed * z2
            r_dot = -h * r + hess * (z1 * dz1 + z2 * dz2)
            return np.array([r_dot, dz1, dz2, -wd * (ed - 1.0)])

    else:  # pragma: no cover
        raise ValueError(f"unsupported averaged form {form}")

    return rhs


# ---------------------------------------------------------------------------
# input-affine decompositions for the averaging engine


def gradient_affine_system(params: SeekerParams, field: FieldParams) -> ControlAffineSystem:
    """Gradient closed loop in the rotating frame, split into drift plus the
    two oscillatory channels scaled by omega**(1-p) and omega**p."""
    w0, h, alpha = params.omega0, params.h_gain, params.alpha
    fs, hess = field.f_star, field.hessian

    def drift(s):
        return np.array(
            [w0 * s[1], -w0 * s[0],
             h * (fs - 0.5 * hess * (s[0] ** 2 + s[1] ** 2) - s[2])]
        )

    def feedback_field(s):
        return np.array([0.0, fs - 0.5 * hess * (s[0] ** 2 + s[1] ** 2) - s[2], 0.0])

    def dither_field(s):
        return np.array([0.0, alpha, 0.0])

    return ControlAffineSystem(
        drift=drift,
        channels=(
            (feedback_field, OscillatoryInput(np.sin, 1, 1.0 - params.p_exp)),
            (dither_field, OscillatoryInput(np.cos, 1, params.p_exp)),
        ),
        dimension=3,
    )


def newton_affine_system(params: SeekerParams, field: FieldParams) -> ControlAffineSystem:
    """Curvature-inverting closed loop in the rotating frame, split into
    drift plus three oscillatory channels (feedback at omega, dither at
    omega, demodulation at 2*omega)."""
    w0, h, alpha, wd = params.omega0, params.h_gain, params.alpha, params.omega_d
    fs, hess = field.f_star, field.hessian
    demod = 8.0 * wd / alpha**2

    def err(s):
        return fs - 0.5 * hess * (s[0] ** 2 + s[1] ** 2) - s[3]

    def drift(s):
        return np.array([w0 * s[1], -w0 * s[0], wd * s[2], h * err(s)])

    def feedback_field(s):
        return np.array([0.0, s[2] * err(s), 0.0, 0.0])

    def dither_field(s):
        return np.array([0.0, alpha, 0.0, 0.0])

    def demod_field(s):
        return np.array([0.0, 0.0, -demod * s[2] ** 2 * err(s), 0.0])

    return ControlAffineSystem(
        drift=drift,
        channels=(
            (feedback_field, OscillatoryInput(np.sin, 1, 1.0 - params.p_exp)),
            (dither_field, OscillatoryInput(np.cos, 1, params.p_exp)),
            (demod_field, OscillatoryInput(np.cos, 2, 2.0 - 2.0 * params.p_exp)),
        ),
        dimension=4,
    )

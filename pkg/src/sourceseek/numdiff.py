"""Central finite differences for vector fields."""

from __future__ import annotations

import numpy as np

__all__ = ["default_fd_step", "central_jacobian"]

#: cube root of machine epsilon, the standard central-difference step scale
_EPS_CBRT = float(np.finfo(float).eps) ** (1.0 / 3.0)


def default_fd_step(x: np.ndarray) -> np.ndarray:
    """Step eps**(1/3) * max(1, |x|) applied to every component direction.

    Scaling by the state norm rather than per-coordinate magnitudes keeps
    the difference quotients conditioned when the state mixes O(1) and
    O(100) components but the field couples them.
    """
    x = np.asarray(x, dtype=float)
    h = _EPS_CBRT * max(1.0, float(np.linalg.norm(x)))
    return np.full(x.shape, h)


def central_jacobian(f, x, step=None) -> np.ndarray:
    """Jacobian of ``f`` at ``x`` by central differences.

    Parameters
    ----------
    f : callable
        Maps an (n,) array to an (m,) array.
    x : array_like, shape (n,)
        Evaluation point.
    step : float or array_like, optional
        Step per component; defaults to ``default_fd_step(x)``.

    Raises
    ------
    ValueError
        If any evaluation returns a non-finite value; the offending point
        is included in the message.
    """
    x = np.asarray(x, dtype=float)
    h = default_fd_step(x) if step is None else np.broadcast_to(
        np.asarray(step, dtype=float), x.shape
    )
    cols = []
    for j in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[j] += h[j]
        xm[j] -= h[j]
        fp = np.asarray(f(xp), dtype=float)
        fm = np.asarray(f(xm), dtype=float)
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            bad = xp if not np.all(np.isfinite(fp)) else xm
            raise ValueError(f"non-finite field evaluation at {bad}")
        cols.append((fp - fm) / (2.0 * h[j]))
    return np.column_stack(cols)

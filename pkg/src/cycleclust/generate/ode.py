"""Fixed-step classical Runge-Kutta integration."""

from __future__ import annotations

import math

import numpy as np

from ..errors import NonFiniteStateError


def integrate(rhs, start, t_final: float, dt: float):
    """Integrate an autonomous system y' = rhs(y) with classical RK4.

    The final step is shortened so the result lands exactly on t_final.
    `start` may carry leading batch axes; rhs must broadcast over them.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_final < dt:
        raise ValueError("t_final must be at least dt")
    y = np.array(start, dtype=float)
    n_full = int(math.floor(t_final / dt + 1e-12))
    remainder = t_final - n_full * dt
    for _ in range(n_full):
        y = _rk4_step(rhs, y, dt)
        if not np.all(np.isfinite(y)):
            raise NonFiniteStateError("state blew up during integration")
    if remainder > 1e-12 * max(dt, 1.0):
        y = _rk4_step(rhs, y, remainder)
        if not np.all(np.isfinite(y)):
            raise NonFiniteStateError("state blew up during integration")
    return y


def _rk4_step(rhs, y, h):
    k1 = np.asarray(rhs(y))
    k2 = np.asarray(rhs(y + 0.5 * h * k1))
    k3 = np.asarray(rhs(y + 0.5 * h * k2))
    k4 = np.asarray(rhs(y + h * k3))
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

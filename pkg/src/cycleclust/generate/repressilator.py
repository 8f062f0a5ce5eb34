"""Three-gene ring oscillator: dynamics and the kernel transition matrix.

State layout is (m_a, p_a, m_b, p_b, m_c, p_c); each protein represses the
next gene's mRNA production around the ring C -| A -| B -| C.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatchError
from ..markov import TransitionMatrix, validate_stochastic
from .halton import low_discrepancy_points
from .ode import integrate

DEFAULT_PARAMS = {
    "v": 298.2,   # transcription rate
    "beta": 0.2,  # protein-to-mRNA decay ratio
    "v0": 0.03,   # leaky transcription
    "h": 2.0,     # Hill coefficient
}

KERNEL_SCALE = 0.2
STATE_LABELS = ("m_a", "p_a", "m_b", "p_b", "m_c", "p_c")


def repressilator_rhs(state, params: dict | None = None) -> np.ndarray:
    """Derivative of the six concentrations; broadcasts over leading axes."""
    p = DEFAULT_PARAMS if params is None else params
    v, beta, v0, h = p["v"], p["beta"], p["v0"], p["h"]
    s = np.asarray(state, dtype=float)
    m_a, p_a, m_b, p_b, m_c, p_c = (s[..., i] for i in range(6))
    out = np.empty_like(s)
    out[..., 0] = -m_a + v / (1.0 + p_c ** h) + v0
    out[..., 1] = -beta * (p_a - m_a)
    out[..., 2] = -m_b + v / (1.0 + p_a ** h) + v0
    out[..., 3] = -beta * (p_b - m_b)
    out[..., 4] = -m_c + v / (1.0 + p_b ** h) + v0
    out[..., 5] = -beta * (p_c - m_c)
    return out


def repressilator_transition_matrix(starts, ends) -> TransitionMatrix:
    """Kernel transition probabilities between trajectory start and end points.

    p_ij is the normalized exp(-0.2 * |start_i - end_j|); rows sum to one
    by construction.
    """
    a = np.asarray(starts, dtype=float)
    b = np.asarray(ends, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"starts {a.shape} and ends {b.shape} must match"
        )
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1))
    logits = -KERNEL_SCALE * d
    logits -= logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    return validate_stochastic(e / e.sum(axis=1, keepdims=True))


def generate_repressilator_instance(count: int = 200, lo: float = 0.0,
                                    hi: float = 20.0, t_final: float = 1.5,
                                    dt: float = 1e-3,
                                    params: dict | None = None):
    """Full pipeline: Halton starts, RK4 integration, kernel matrix.

    Returns (transition matrix, starts, ends).
    """
    starts = low_discrepancy_points(count, 6, lo, hi)
    ends = integrate(lambda y: repressilator_rhs(y, params), starts, t_final, dt)
    return repressilator_transition_matrix(starts, ends), starts, ends

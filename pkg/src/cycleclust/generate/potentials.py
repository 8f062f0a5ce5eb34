"""Two-dimensional multi-well energy landscapes for the sampled test sets.

Each landscape places its wells on a ring around a central bump; the well
centers double as the cyclic drift targets, in the order listed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

X_STAR = 0.5
Y_STAR = 0.5 * math.sqrt(3.0)


@dataclass(frozen=True)
class Potential:
    kind: str
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    minima: tuple

    def energy(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return self.evaluator(p[..., 0], p[..., 1])


def _omega3(x, y):
    return (6 * np.exp(-3 * (x ** 2 + y ** 2))
            - 8 * np.exp(-(x - X_STAR) ** 2 - (y + Y_STAR) ** 2)
            - 8 * np.exp(-(x + X_STAR) ** 2 - (y + Y_STAR) ** 2)
            - 8 * np.exp(-x ** 2 - (y - 1) ** 2))


def _omega4(x, y):
    return (4 * np.exp(-3 * (x ** 2 + y ** 2))
            - 8 * np.exp(-x ** 2 - (y - 1.5) ** 2)
            - 8 * np.exp(-(x - 1) ** 2 - y ** 2)
            - 8 * np.exp(-(x + 1) ** 2 - y ** 2)
            - 8 * np.exp(-x ** 2 - (y + 1.5) ** 2))


def _omega6(x, y):
    return (4 * np.exp(-3 * (x ** 2 + y ** 2))
            - 8 * np.exp(-(x - 2 * X_STAR) ** 2 - (y + 2 * Y_STAR) ** 2)
            - 8 * np.exp(-(x + 2 * X_STAR) ** 2 - (y + 2 * Y_STAR) ** 2)
            - 8 * np.exp(-(x + 2 * X_STAR) ** 2 - (y - 2 * Y_STAR) ** 2)
            - 8 * np.exp(-(x - 2 * X_STAR) ** 2 - (y - 2 * Y_STAR) ** 2)
            - 8 * np.exp(-(x + 2) ** 2 - (y - 1) ** 2)
            - 8 * np.exp(-(x - 2) ** 2 - y ** 2))


OMEGA3 = Potential("omega3", _omega3, (
    (X_STAR, -Y_STAR), (-X_STAR, -Y_STAR), (0.0, 1.0),
))
OMEGA4 = Potential("omega4", _omega4, (
    (0.0, 1.5), (1.0, 0.0), (-1.0, 0.0), (0.0, -1.5),
))
OMEGA6 = Potential("omega6", _omega6, (
    (2 * X_STAR, -2 * Y_STAR), (-2 * X_STAR, -2 * Y_STAR),
    (-2 * X_STAR, 2 * Y_STAR), (2 * X_STAR, 2 * Y_STAR),
    (-2.0, 1.0), (2.0, 0.0),
))

FLAT = Potential("flat", lambda x, y: np.zeros_like(np.asarray(x, dtype=float)),
                 ((0.0, 0.0),))

BY_NAME = {p.kind: p for p in (OMEGA3, OMEGA4, OMEGA6)}

"""Degree-7 polynomial smoothstep and the cutoffs built from it.

``S(t) = 35t^4 - 84t^5 + 70t^6 - 20t^7`` on [0, 1], clamped to 0 and 1
outside.  It is C^3 with ``S'(t) = 140 t^3 (1-t)^3``.
"""
import numpy as np

__all__ = [
    "step", "step_d1", "step_d2", "step_integral",
    "bump_b", "bump_b_d1", "bump_b_d2",
    "plateau", "plateau_d1", "plateau_d2",
]


def step(t):
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t**4 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)))


def step_d1(t):
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return 140.0 * (t * (1.0 - t))**3


def step_d2(t):
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return 420.0 * (t * (1.0 - t))**2 * (1.0 - 2.0 * t)


def step_integral(t):
    """``int_0^t S``; for t > 1 this keeps growing linearly."""
    t = np.asarray(t, dtype=float)
    c = np.clip(t, 0.0, 1.0)
    inner = c**5 * (7.0 + c * (-14.0 + c * (10.0 - 2.5 * c)))
    return inner + np.maximum(t - 1.0, 0.0)


# b: 0 below 1/2, 1 above 1, used by the C^{1,alpha} profile.
def bump_b(x):
    return step(2.0 * np.asarray(x, dtype=float) - 1.0)


def bump_b_d1(x):
    return 2.0 * step_d1(2.0 * np.asarray(x, dtype=float) - 1.0)


def bump_b_d2(x):
    return 4.0 * step_d2(2.0 * np.asarray(x, dtype=float) - 1.0)


# one-dimensional plateau: 1 on [0, 1], 0 beyond 2, as a function of s >= 0.
def plateau(s):
    return 1.0 - step(np.asarray(s, dtype=float) - 1.0)


def plateau_d1(s):
    return -step_d1(np.asarray(s, dtype=float) - 1.0)


def plateau_d2(s):
    return -step_d2(np.asarray(s, dtype=float) - 1.0)

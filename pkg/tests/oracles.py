"""Closed-form reference values computed independently of the package."""

import math

import numpy as np


def two_qubit_oracles(theta, b, s):
    """``F+(|0><0|)``, ``F-(|0><1|)`` and Kraus pairs of both maps, worked out by hand."""
    ep, em = np.exp(b * s / 2), np.exp(-b * s / 2)
    n = 1 / (ep + em)
    c, si = np.cos(theta), np.sin(theta)
    f_plus_00 = 0.5 * n * np.array([[c * c * em + ep, -1j * si * c * em], [1j * si * c * em, si * si * em]])
    f_minus_01 = c * n * np.array([[-1j * si, em - ep], [0, 1j * si]])
    q4 = np.exp(b * s / 4)
    v0p = q4 / np.sqrt(2) * np.array([[1, -1j * si], [0, -c]])
    v1p = 1 / q4 / np.sqrt(2) * np.array([[c, 0], [1j * si, 1]])
    v0m = np.array([[q4, 0], [-1j * si / q4, -c * q4]])
    v1m = np.array([[c / q4, 1j * si * q4], [0, 1 / q4]])
    return f_plus_00, f_minus_01, [np.sqrt(n) * v0p, np.sqrt(n) * v1p], [np.sqrt(n) * v0m, np.sqrt(n) * v1m]


def kinetic_partition(beta=1.0, kappa=0.1, momentum=4.0, sigma=0.5):
    """``<a|exp(-beta K)|a>`` as a Gaussian average ``E[exp(-c p^2)]``, ``c = beta kappa / 2``."""
    c, var = beta * kappa / 2, (1 / (2 * sigma)) ** 2
    return math.exp(-c * momentum**2 / (1 + 2 * c * var)) / math.sqrt(1 + 2 * c * var)


def deficit_plateau(beta=1.0):
    """Deficit far left, where the spin field is along z.

    There ``J_H`` factorizes, so the deficit is ``|| W_f^2 - W_z^2 ||_1 Z_K(a)``.
    """
    c, s = math.cosh(beta / 4), math.sinh(beta / 4)
    diff = np.array([[c - math.exp(beta / 2), -s], [-s, c - math.exp(-beta / 2)]])
    return float(np.abs(np.linalg.eigvalsh(diff)).sum()) * kinetic_partition(beta)

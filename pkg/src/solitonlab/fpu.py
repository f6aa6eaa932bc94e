"""Quadratic-anharmonic (alpha) lattice with pinned ends.

Equation of motion for the interior sites of a chain x_0 .. x_{N-1} with
x_0 = x_{N-1} = 0:

    x_i'' = (c/h)^2 (x_{i+1} + x_{i-1} - 2 x_i) (1 + alpha (x_{i+1} - x_{i-1}))

which is conservative: in bond variables d_i = x_{i+1} - x_i the force is
F(d) = d + alpha d^2, from the potential d^2/2 + alpha d^3/3 per bond.
Linear normal modes are discrete sines; energy per mode is tracked through
the orthonormal DST-I.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dst


@dataclass(frozen=True)
class LatticeConfig:
    n: int = 32
    alpha: float = 0.25
    c: float = 1.0
    h: float = 1.0

    def __post_init__(self):
        if self.n < 4:
            raise ValueError(f"lattice needs at least 4 sites, got n={self.n}")
        if self.h <= 0 or self.c <= 0:
            raise ValueError("c and h must be positive")

    @property
    def n_modes(self) -> int:
        return self.n - 2

    def omega(self) -> np.ndarray:
        """Exact frequencies of the linearized chain, modes k = 1 .. n-2."""
        k = np.arange(1, self.n - 1)
        return 2.0 * (self.c / self.h) * np.sin(k * np.pi / (2.0 * (self.n - 1)))

    def mode_period(self, k: int = 1) -> float:
        return 2.0 * np.pi / self.omega()[k - 1]


def acceleration(config: LatticeConfig, x: np.ndarray) -> np.ndarray:
    """Accelerations at all sites; pinned ends stay zero."""
    x = np.asarray(x, dtype=float)
    if x.shape != (config.n,):
        raise ValueError(f"state has shape {x.shape}, expected ({config.n},)")
    a = np.zeros_like(x)
    curv = x[2:] + x[:-2] - 2.0 * x[1:-1]
    stretch = x[2:] - x[:-2]
    a[1:-1] = (config.c / config.h) ** 2 * curv * (1.0 + config.alpha * stretch)
    return a


def verlet_step(config: LatticeConfig, x, v, dt: float, a=None):
    """One velocity-Verlet step. Returns (x, v, a) with a the new acceleration."""
    if a is None:
        a = acceleration(config, x)
    v_half = v + 0.5 * dt * a
    x_new = x + dt * v_half
    a_new = acceleration(config, x_new)
    v_new = v_half + 0.5 * dt * a_new
    return x_new, v_new, a_new


def mode_initial_state(config: LatticeConfig, k: int = 1, amplitude: float = 1.0):
    """Displacement profile A sin(k j pi / (N-1)) at rest."""
    if not 1 <= k <= config.n_modes:
        raise ValueError(f"mode k={k} outside 1..{config.n_modes}")
    j = np.arange(config.n)
    x = amplitude * np.sin(k * j * np.pi / (config.n - 1))
    x[0] = x[-1] = 0.0
    return x, np.zeros(config.n)


def mode_coefficients(config: LatticeConfig, x: np.ndarray, v: np.ndarray):
    """Orthonormal DST-I coefficients (a_k, adot_k) of the interior points.

    The kernel sqrt(2/(N-1)) sin(j k pi/(N-1)) is its own inverse, so
    idst(type=1, norm='ortho') recovers the displacements exactly.
    """
    a = dst(np.asarray(x)[1:-1], type=1, norm="ortho")
    adot = dst(np.asarray(v)[1:-1], type=1, norm="ortho")
    return a, adot


def mode_energies(config: LatticeConfig, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Harmonic energy per mode, H_k = adot_k^2/2 + omega_k^2 a_k^2/2."""
    a, adot = mode_coefficients(config, x, v)
    w = config.omega()
    return 0.5 * adot**2 + 0.5 * (w * a) ** 2

def total_energy(config: LatticeConfig, x: np.ndarray, v: np.ndarray) -> float:
    """Kinetic plus full anharmonic bond potential."""
    d = np.diff(np.asarray(x, dtype=float))
    pot = (config.c / config.h) ** 2 * np.sum(0.5 * d**2 + config.alpha * d**3 / 3.0)
    return float(0.5 * np.sum(np.asarray(v) ** 2) + pot)


def run_lattice(
    config: LatticeConfig,
    x0: np.ndarray,
    v0: np.ndarray,
    dt: float,
    n_steps: int,
    sample_every: int = 1,
):
    """Integrate n_steps of velocity Verlet, sampling every sample_every steps.

    Returns (t, X, V): sample times and stacked states including t = 0.
    """
    if dt <= 0 or n_steps < 0 or sample_every < 1:
        raise ValueError("need dt > 0, n_steps >= 0, sample_every >= 1")
    x = np.array(x0, dtype=float)
    v = np.array(v0, dtype=float)
    n_samples = n_steps // sample_every + 1
    X = np.empty((n_samples, config.n))
    V = np.empty((n_samples, config.n))
    t = np.empty(n_samples)
    X[0], V[0], t[0] = x, v, 0.0

    ch2 = (config.c / config.h) ** 2
    alpha = config.alpha
    half = 0.5 * dt
    a = acceleration(config, x)
    out = 1
    for step in range(1, n_steps + 1):
        v += half * a
        x += dt * v
        # acceleration inlined: the hot loop dominates long runs
        a[1:-1] = ch2 * (x[2:] + x[:-2] - 2.0 * x[1:-1]) * (
            1.0 + alpha * (x[2:] - x[:-2])
        )
        v += half * a
        if step % sample_every == 0:
            X[out], V[out], t[out] = x, v, step * dt
            out += 1
    return t[:out], X[:out], V[:out]


def mode_energy_history(config: LatticeConfig, X: np.ndarray, V: np.ndarray):
    """Mode energies for a whole trajectory, shape (n_samples, n_modes)."""
    a = dst(X[:, 1:-1], type=1, norm="ortho", axis=1)
    adot = dst(V[:, 1:-1], type=1, norm="ortho", axis=1)
    w = config.omega()
    return 0.5 * adot**2 + 0.5 * (w[None, :] * a) ** 2


def time_average(t: np.ndarray, f: np.ndarray):
    """Trapezoid running average (1/T) int f dt over the recorded window."""
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    if t.ndim != 1 or len(t) != f.shape[0]:
        raise ValueError("t and f must share the sample axis")
    if len(t) < 2:
        return f.copy() if f.ndim else float(f)
    span = t[-1] - t[0]
    if span <= 0:
        raise ValueError("samples must span a positive time window")
    return np.trapezoid(f, t, axis=0) / span


def detect_recurrence(
    t: np.ndarray,
    h1: np.ndarray,
    t_guard: float,
    tol: float = 0.01,
):
    """Earliest sample after t_guard where H_1 returns within tol of H_1(0).

    Returns (time, relative deviation) or None if the energy never comes back.
    """
    t = np.asarray(t, dtype=float)
    h1 = np.asarray(h1, dtype=float)
    if h1[0] <= 0:
        raise ValueError("H_1(0) must be positive to define a recurrence")
    mask = (t > t_guard) & (h1 >= (1.0 - tol) * h1[0])
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        return None
    i = idx[0]
    return float(t[i]), float(abs(h1[i] - h1[0]) / h1[0])

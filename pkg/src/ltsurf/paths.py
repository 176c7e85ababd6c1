"""Simulation of the driving processes and jump-diffusion SDE paths.

Paths live on a time grid that contains every jump time, so left limits
at jumps are well defined on-grid.  The Euler scheme is left-point: the
diffusion increment of the step ending at a jump time is applied first,
the pre-jump value recorded, and the jump applied afterwards.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import ConfigError, NumericalAbort

Coefficient = Union[float, Callable[[float, float, float], float]]


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing time points on [0, t_end] with jump markers."""

    times: np.ndarray
    jump_flags: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        f = np.asarray(self.jump_flags, dtype=bool)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "jump_flags", f)
        if t.ndim != 1 or t.size < 2:
            raise ConfigError("grid needs at least two time points")
        if t[0] != 0.0:
            raise ConfigError("grid must start at 0")
        if not np.all(np.diff(t) > 0):
            raise ConfigError("grid times must be strictly increasing")
        if f.shape != t.shape:
            raise ConfigError("jump_flags must align with times")

    @property
    def t_end(self):
        return float(self.times[-1])

    @property
    def n_steps(self):
        return self.times.size - 1

    @property
    def dts(self):
        return np.diff(self.times)

    @property
    def jump_indices(self):
        return np.nonzero(self.jump_flags)[0]


@dataclass(frozen=True)
class JumpTrain:
    """Finitely many (time, size) events of a pure-jump path on (0, t_end]."""

    times: np.ndarray
    sizes: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.sizes, dtype=float)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "sizes", s)
        if t.shape != s.shape:
            raise ConfigError("jump times and sizes must align")
        if t.size and not np.all(np.diff(t) > 0):
            raise ConfigError("jump times must be strictly increasing")

    @property
    def total_variation(self):
        # finite by construction: finitely many events
        return float(np.sum(np.abs(self.sizes)))


@dataclass(frozen=True)
class JumpLaw:
    """Jump-size sampler with finite mean absolute size.

    kinds: two_point (values a/b with prob p/1-p), uniform (lo, hi),
    gaussian (mean, std), exponential (mean, optionally negated via sign).
    """

    kind: str
    params: tuple

    def sample(self, rng, size):
        if self.kind == "two_point":
            lo, hi, p = self.params
            return np.where(rng.random(size) < p, lo, hi).astype(float)
        if self.kind == "uniform":
            lo, hi = self.params
            return rng.uniform(lo, hi, size)
        if self.kind == "gaussian":
            mean, std = self.params
            return mean + std * rng.standard_normal(size)
        if self.kind == "exponential":
            (mean,) = self.params
            return np.sign(mean) * rng.exponential(abs(mean), size)
        raise ConfigError(f"unknown jump law kind: {self.kind!r}")


def two_point(lo, hi, p=0.5):
    return JumpLaw("two_point", (lo, hi, p))


@dataclass(frozen=True)
class SdeSpec:
    """Coefficients and jump laws for the simulated jump-diffusion pair.

    dX = mu_x dt + sigma dB + lambda_x dY
    dA = mu_a dt + lambda_a dZ

    Coefficients may be plain floats (state-independent, enables the
    vectorised simulation lane) or callables of (t, a, x).  Setting
    a_jump_driver="y" routes the A jumps through the same train Y that
    drives X, for scenarios where both processes share one jump clock.
    """

    mu_x: Coefficient = 0.0
    sigma: Coefficient = 0.0
    lambda_x: Coefficient = 0.0
    mu_a: Coefficient = 0.0
    lambda_a: Coefficient = 0.0
    rate_y: float = 0.0
    rate_z: float = 0.0
    jump_law_y: Optional[JumpLaw] = None
    jump_law_z: Optional[JumpLaw] = None
    x0: float = 0.0
    a0: float = 0.0
    a_jump_driver: str = "z"

    def __post_init__(self):
        if self.a_jump_driver not in ("y", "z"):
            raise ConfigError("a_jump_driver must be 'y' or 'z'")
        if self.rate_y < 0 or self.rate_z < 0:
            raise ConfigError("jump intensities must be nonnegative")
        if self.rate_y > 0 and self.jump_law_y is None:
            raise ConfigError("rate_y > 0 requires jump_law_y")
        if self.rate_z > 0 and self.jump_law_z is None:
            raise ConfigError("rate_z > 0 requires jump_law_z")

    @property
    def is_constant_coefficient(self):
        return all(
            not callable(c)
            for c in (self.mu_x, self.sigma, self.lambda_x, self.mu_a, self.lambda_a)
        )

    def eval_coeff(self, name, t, a, x):
        c = getattr(self, name)
        if callable(c):
            return c(t, a, x)
        return c


@dataclass
class PathBundle:
    """Aligned realisation of (t, B, Y, Z, A, X) with left limits at jumps.

    Increment arrays (length n_steps) split X into a martingale part M
    (Brownian integral) and a finite-variation part K (drift + jumps):

        x[k+1] = x[k] + ((k_drift[k] + m[k]) + k_jump[k])

    with that exact floating-point association; the pre-jump value is
    x[k] + (k_drift[k] + m[k]).  Same split for A with m identically 0.
    """

    grid: TimeGrid
    b_path: np.ndarray  # driving Brownian motion
    y_path: np.ndarray
    z_path: np.ndarray
    a_path: np.ndarray
    x_path: np.ndarray
    x_pre: np.ndarray  # left limits, equal to the value at non-jump indices
    a_pre: np.ndarray
    y_pre: np.ndarray
    z_pre: np.ndarray
    m_increments: np.ndarray
    k_drift_increments: np.ndarray
    k_jump_increments: np.ndarray
    a_drift_increments: np.ndarray
    a_jump_increments: np.ndarray
    spec: Optional[SdeSpec] = None

    @property
    def jump_indices(self):
        return self.grid.jump_indices

    @property
    def times(self):
        return self.grid.times

    def left_limits(self, idx):
        """Pre-jump (A, X, Y, Z) values at a flagged grid index."""
        return (
            float(self.a_pre[idx]),
            float(self.x_pre[idx]),
            float(self.y_pre[idx]),
            float(self.z_pre[idx]),
        )

    def diffusion_increments(self):
        """Per-step continuous increments of X (drift + Brownian part)."""
        return self.k_drift_increments + self.m_increments

    def reconstruct_x(self):
        total = (self.k_drift_increments + self.m_increments) + self.k_jump_increments
        return np.cumsum(np.concatenate(([self.x_path[0]], total)))


def build_grid(t_end, n_steps, jump_times=()):
    """Uniform grid of n_steps intervals with jump times merged in.

    A jump time coinciding with a uniform point replaces it (flagged once).
    """
    if t_end <= 0:
        raise ConfigError("t_end must be positive")
    if n_steps < 1:
        raise ConfigError("n_steps must be at least 1")
    jt = np.sort(np.asarray(jump_times, dtype=float))
    if jt.size and (jt[0] <= 0 or jt[-1] > t_end):
        raise ConfigError("jump times must lie in (0, t_end]")
    uniform = np.linspace(0.0, t_end, n_steps + 1)
    atol = 1e-12 * max(1.0, t_end)
    keep = np.ones(uniform.size, dtype=bool)
    for t in jt:
        close = np.abs(uniform - t) <= atol
        keep &= ~close
    times = np.concatenate((uniform[keep], jt))
    flags = np.concatenate((np.zeros(keep.sum(), dtype=bool), np.ones(jt.size, dtype=bool)))
    order = np.argsort(times, kind="stable")
    return TimeGrid(times[order], flags[order])


def simulate_compound_poisson(rate, jump_law, t_end, seed):
    """Compound Poisson event train on (0, t_end], deterministic per seed."""
    if rate < 0:
        raise ConfigError("rate must be nonnegative")
    rng = np.random.default_rng(seed)
    if rate == 0:
        return JumpTrain(np.empty(0), np.empty(0))
    count = rng.poisson(rate * t_end)
    times = np.sort(rng.uniform(0.0, t_end, count))
    # strictly increasing times almost surely; drop pathological duplicates
    if count > 1:
        distinct = np.concatenate(([True], np.diff(times) > 0))
        times = times[distinct]
    sizes = jump_law.sample(rng, times.size)
    return JumpTrain(times, sizes)


def simulate_brownian(grid, seed):
    """Standard Brownian motion sampled on the grid (B_0 = 0)."""
    rng = np.random.default_rng(seed)
    increments = rng.standard_normal(grid.n_steps) * np.sqrt(grid.dts)
    return np.cumsum(np.concatenate(([0.0], increments)))


def _jump_train_on_grid(train, grid):
    """Step-function values of a jump train aligned to the grid, with
    per-step increments placed at the flagged index ending the step."""
    n = grid.n_steps
    inc = np.zeros(n)
    if train.times.size:
        idx = np.searchsorted(grid.times, train.times)
        # each jump time is a grid point by construction
        np.add.at(inc, idx - 1, train.sizes)
    path = np.cumsum(np.concatenate(([0.0], inc)))
    return path, inc


def _accumulate(x0, increments):
    return np.cumsum(np.concatenate(([x0], increments)))


def simulate_jump_diffusion(spec, t_end, n_steps, seed):
    """Euler left-point simulation of (A, X) driven by B, Y, Z.

    Deterministic given (spec, t_end, n_steps, seed).  Sub-streams for the
    Y jumps, Z jumps and Brownian increments are derived from the seed, so
    the Brownian draw does not depend on how many jumps occurred.
    """
    if n_steps < 1:
        raise ConfigError("n_steps must be at least 1")
    seed_y, seed_z, seed_b = np.random.SeedSequence(seed).spawn(3)
    train_y = simulate_compound_poisson(spec.rate_y, spec.jump_law_y, t_end, seed_y)
    train_z = simulate_compound_poisson(spec.rate_z, spec.jump_law_z, t_end, seed_z)
    jump_times = np.union1d(train_y.times, train_z.times)
    grid = build_grid(t_end, n_steps, jump_times)
    brownian = simulate_brownian(grid, seed_b)

    y_path, dy = _jump_train_on_grid(train_y, grid)
    z_path, dz = _jump_train_on_grid(train_z, grid)
    da_driver = dy if spec.a_jump_driver == "y" else dz

    n = grid.n_steps
    dts = grid.dts
    db = np.diff(brownian)
    times = grid.times

    if spec.is_constant_coefficient:
        k_drift = spec.mu_x * dts
        m_inc = spec.sigma * db
        k_jump = spec.lambda_x * dy
        a_drift = spec.mu_a * dts
        a_jump = spec.lambda_a * da_driver
        x_path = _accumulate(spec.x0, (k_drift + m_inc) + k_jump)
        a_path = _accumulate(spec.a0, a_drift + a_jump)
        x_pre = x_path.copy()
        a_pre = a_path.copy()
        jidx = grid.jump_indices
        x_pre[jidx] = x_path[jidx - 1] + (k_drift[jidx - 1] + m_inc[jidx - 1])
        a_pre[jidx] = a_path[jidx - 1] + a_drift[jidx - 1]
    else:
        k_drift = np.zeros(n)
        m_inc = np.zeros(n)
        k_jump = np.zeros(n)
        a_drift = np.zeros(n)
        a_jump = np.zeros(n)
        x_path = np.zeros(n + 1)
        a_path = np.zeros(n + 1)
        x_pre = np.zeros(n + 1)
        a_pre = np.zeros(n + 1)
        x_path[0] = x_pre[0] = spec.x0
        a_path[0] = a_pre[0] = spec.a0
        flags = grid.jump_flags
        for k in range(n):
            t, a, x = times[k], a_path[k], x_path[k]
            k_drift[k] = spec.eval_coeff("mu_x", t, a, x) * dts[k]
            m_inc[k] = spec.eval_coeff("sigma", t, a, x) * db[k]
            a_drift[k] = spec.eval_coeff("mu_a", t, a, x) * dts[k]
            xl = x + (k_drift[k] + m_inc[k])
            al = a + a_drift[k]
            x_pre[k + 1] = xl
            a_pre[k + 1] = al
            if flags[k + 1]:
                tj = times[k + 1]
                k_jump[k] = spec.eval_coeff("lambda_x", tj, al, xl) * dy[k]
                a_jump[k] = spec.eval_coeff("lambda_a", tj, al, xl) * da_driver[k]
            x_path[k + 1] = x + ((k_drift[k] + m_inc[k]) + k_jump[k])
            a_path[k + 1] = a + (a_drift[k] + a_jump[k])
        # left limit equals the value at non-jump indices by convention
        nonjump = ~flags
        x_pre[nonjump] = x_path[nonjump]
        a_pre[nonjump] = a_path[nonjump]

    if not (np.all(np.isfinite(x_path)) and np.all(np.isfinite(a_path))):
        raise NumericalAbort("non-finite values in simulated path")

    y_pre = y_path.copy()
    z_pre = z_path.copy()
    jidx = grid.jump_indices
    y_pre[jidx] = y_path[jidx] - dy[jidx - 1]
    z_pre[jidx] = z_path[jidx] - dz[jidx - 1]

    return PathBundle(
        grid=grid,
        b_path=brownian,
        y_path=y_path,
        z_path=z_path,
        a_path=a_path,
        x_path=x_path,
        x_pre=x_pre,
        a_pre=a_pre,
        y_pre=y_pre,
        z_pre=z_pre,
        m_increments=m_inc,
        k_drift_increments=k_drift,
        k_jump_increments=k_jump,
        a_drift_increments=a_drift,
        a_jump_increments=a_jump,
        spec=spec,
    )

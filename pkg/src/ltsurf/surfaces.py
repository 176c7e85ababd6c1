"""Moving surfaces b(t, a), their Moreau envelopes and pathwise variation."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Surface:
    """Continuous surface b(t, a).

    lipschitz_const is declared by the scenario author, not inferred; a
    declared constant marks the composed process t -> b(t, A_t) as having
    bounded variation whenever A does.
    """

    b: Callable[[np.ndarray, np.ndarray], np.ndarray]
    lipschitz_const: Optional[float] = None
    name: str = ""

    def __call__(self, t, a):
        return self.b(t, a)

    @property
    def is_lipschitz(self):
        return self.lipschitz_const is not None


def constant_surface(level, name=None):
    c = float(level)
    return Surface(lambda t, a: np.broadcast_arrays(np.asarray(t, float) * 0.0 + c, a)[0],
                   lipschitz_const=0.0,
                   name=name or f"const({c})")


def moreau_envelope(surface, m, query, search_box, grid_n=33, rounds=6, shrink=10.0):
    """Quadratic inf-convolution of b evaluated at one (t, a) query point.

    Penalty convention is (m/2)||.||^2, so the envelope increases to b as
    m grows.  The infimum is approximated by a nested grid search over the
    search box; the query point itself is always a candidate, so the result
    never exceeds b(query).
    """
    if m <= 0:
        raise ConfigError("m must be positive")
    (t_lo, t_hi), (a_lo, a_hi) = search_box
    if t_lo > t_hi or a_lo > a_hi:
        raise ConfigError("empty search box")
    tq, aq = query
    if not (t_lo <= tq <= t_hi and a_lo <= aq <= a_hi):
        raise ConfigError("query must lie inside the search box")

    def objective(ts, as_):
        return surface.b(ts, as_) + (m / 2.0) * ((ts - tq) ** 2 + (as_ - aq) ** 2)

    best_val = float(surface.b(np.asarray(tq), np.asarray(aq)))
    best_t, best_a = tq, aq
    half_t = (t_hi - t_lo) / 2.0
    half_a = (a_hi - a_lo) / 2.0
    ct, ca = (t_lo + t_hi) / 2.0, (a_lo + a_hi) / 2.0
    for _ in range(rounds):
        ts = np.linspace(max(t_lo, ct - half_t), min(t_hi, ct + half_t), grid_n)
        as_ = np.linspace(max(a_lo, ca - half_a), min(a_hi, ca + half_a), grid_n)
        tt, aa = np.meshgrid(ts, as_, indexing="ij")
        vals = objective(tt, aa)
        k = int(np.argmin(vals))
        if vals.flat[k] < best_val:
            best_val = float(vals.flat[k])
            best_t = float(tt.flat[k])
            best_a = float(aa.flat[k])
        ct, ca = best_t, best_a
        half_t /= shrink
        half_a /= shrink
    return best_val


def envelope_path(surface, m, a_path, grid, search_box=None, grid_n=33, rounds=6):
    """Envelope values along (t_k, A_{t_k}).

    A Lipschitz-declared surface is its own bounded-variation approximant,
    so b is returned directly in that case.
    """
    times = grid.times
    a_path = np.asarray(a_path, dtype=float)
    if surface.is_lipschitz:
        return np.asarray(surface.b(times, a_path), dtype=float)
    if search_box is None:
        pad_a = 1.0 + 0.5 * (a_path.max() - a_path.min())
        search_box = ((float(times[0]), float(times[-1])),
                      (float(a_path.min() - pad_a), float(a_path.max() + pad_a)))
    return np.array([
        moreau_envelope(surface, m, (float(t), float(a)), search_box,
                        grid_n=grid_n, rounds=rounds)
        for t, a in zip(times, a_path)
    ])


def pathwise_variation(series):
    """Total variation of a discrete series: sum of |consecutive differences|."""
    s = np.asarray(series, dtype=float)
    if s.size == 0:
        raise ConfigError("series must be nonempty")
    return float(np.sum(np.abs(np.diff(s))))

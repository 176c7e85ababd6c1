"""Term-by-term evaluation of the change-of-variables formulas.

Each verify_* function evaluates one formula variant on a simulated path
bundle and returns a FormulaReport holding the left-hand side, every
right-hand-side term by name, their sum, and the residual lhs - rhs.

Conventions shared by all variants:
  * integrands are evaluated at left limits (step-start values for the
    continuous parts, pre-jump values at flagged jump indices);
  * the glue is closed below: x <= b selects the lower branch;
  * indicators on {X != b} are strict inequalities on left limits.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .calculus import (LEBESGUE, MeasureSpec, continuous_qv_measure,
                       iter_jumps, local_time_time_integral, measure_integral)
from .errors import ConfigError, IncompatibleScenarioError
from .localtime import (DEFAULT_MOLLIFIER, local_time_mollifier,
                        local_time_occupation)


def coupled_eps(dt):
    """Default occupation-window bandwidth, coupled to the step size so the
    window stays resolvable: eps = 3 sqrt(dt)."""
    return 3.0 * math.sqrt(dt)


def coupled_mollifier_n(dt):
    """Default kernel sharpness for the mollifier estimator.

    The kernel window 1/n is matched to the path's per-step excursion
    scale sqrt(dt) rather than to the occupation eps: the Tanaka-type
    left-hand sides resolve the surface at the sqrt(dt) scale, and a
    matching window keeps the two sides tightly coupled per path.
    """
    return max(1, int(round(1.0 / math.sqrt(dt))))


@dataclass(frozen=True)
class Branch:
    """One smooth piece of a glued function, with sectional derivatives."""

    f: Callable
    d_t: Callable
    d_a: Callable
    d_x: Callable
    d_xx: Callable


@dataclass(frozen=True)
class PiecewiseSurfaceFunction:
    """F glued from two branches across a surface: lower on x <= b."""

    surface: object
    lower: Branch
    upper: Branch
    fx_plus: Callable  # (t, a) -> limit of F_x from above at the surface
    fx_minus: Callable

    @property
    def is_smooth(self):
        return self.lower is self.upper

    def b(self, t, a):
        return np.asarray(self.surface.b(t, a), dtype=float)

    def _select(self, attr, t, a, x):
        lower = np.asarray(getattr(self.lower, attr)(t, a, x), dtype=float)
        if self.is_smooth:
            return np.broadcast_arrays(lower, x)[0]
        upper = np.asarray(getattr(self.upper, attr)(t, a, x), dtype=float)
        return np.where(x <= self.b(t, a), lower, upper)

    def value(self, t, a, x):
        return self._select("f", t, a, x)

    def deriv(self, attr, t, a, x):
        return self._select(attr, t, a, x)

    def deriv_from_below(self, attr, t, a, x):
        """Limit in the space variable from below (x- evaluation)."""
        return self._select(attr, t, a, x)  # closed-below glue: same rule

    def deriv_from_above(self, attr, t, a, x):
        lower = np.asarray(getattr(self.lower, attr)(t, a, x), dtype=float)
        if self.is_smooth:
            return np.broadcast_arrays(lower, x)[0]
        upper = np.asarray(getattr(self.upper, attr)(t, a, x), dtype=float)
        return np.where(x >= self.b(t, a), upper, lower)

    def deriv_averaged(self, attr, t, a, x):
        above = self.deriv_from_above(attr, t, a, x)
        below = self.deriv_from_below(attr, t, a, x)
        return 0.5 * (above + below)

    def validate_glue(self, t_grid, a_grid, cont_tol=1e-9, fd_tol=1e-4, fd_h=1e-6):
        """Check continuity across the surface and agreement of the declared
        one-sided x-derivatives with finite differences toward the surface."""
        tt, aa = np.meshgrid(np.asarray(t_grid, float), np.asarray(a_grid, float),
                             indexing="ij")
        bb = self.b(tt, aa)
        gap = np.abs(self.lower.f(tt, aa, bb) - self.upper.f(tt, aa, bb))
        if np.max(gap) >= cont_tol:
            raise ConfigError(f"branches disagree at the surface: max gap {np.max(gap):g}")
        fd_plus = (self.upper.f(tt, aa, bb + fd_h) - self.upper.f(tt, aa, bb)) / fd_h
        fd_minus = (self.lower.f(tt, aa, bb) - self.lower.f(tt, aa, bb - fd_h)) / fd_h
        err_plus = np.max(np.abs(fd_plus - self.fx_plus(tt, aa)))
        err_minus = np.max(np.abs(fd_minus - self.fx_minus(tt, aa)))
        if max(err_plus, err_minus) >= fd_tol:
            raise ConfigError(
                "declared one-sided derivatives disagree with finite differences: "
                f"plus {err_plus:g}, minus {err_minus:g}"
            )


def smooth_psf(f, d_t, d_a, d_x, d_xx, surface):
    """Globally smooth F wrapped in the piecewise container (f1 = f2)."""
    branch = Branch(f, d_t, d_a, d_x, d_xx)
    return PiecewiseSurfaceFunction(
        surface=surface, lower=branch, upper=branch,
        fx_plus=lambda t, a: d_x(t, a, surface.b(t, a)),
        fx_minus=lambda t, a: d_x(t, a, surface.b(t, a)),
    )


def eval_F(psf, t, a, x):
    """Evaluate the glued function; the lower branch owns x = b."""
    return psf.value(np.asarray(t, float), np.asarray(a, float), np.asarray(x, float))


def fx_jump(psf, t, a):
    """One-sided x-derivative gap across the surface."""
    t = np.asarray(t, float)
    a = np.asarray(a, float)
    return np.asarray(psf.fx_plus(t, a), float) - np.asarray(psf.fx_minus(t, a), float)


@dataclass
class FormulaReport:
    variant: str
    lhs: float
    terms: dict
    rhs: float
    residual: float
    metadata: dict = field(default_factory=dict)


def _make_report(variant, lhs, terms, metadata=None):
    rhs = 0.0
    for v in terms.values():
        rhs += v
    return FormulaReport(variant=variant, lhs=float(lhs), terms=terms,
                         rhs=rhs, residual=float(lhs) - rhs,
                         metadata=metadata or {})


def _coeff_values(spec, name, t, a, x):
    c = getattr(spec, name)
    if not callable(c):
        return np.full(len(t), float(c))
    try:
        out = np.asarray(c(t, a, x), dtype=float)
        if out.shape == t.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([c(t[k], a[k], x[k]) for k in range(len(t))])


def _require_spec(bundle):
    if bundle.spec is None:
        raise ConfigError("this variant needs the bundle's SdeSpec coefficients")
    return bundle.spec


def verify_tanaka(bundle, level, n=None, qv_mode="analytic"):
    """Tanaka's formula for |X - a|, local time via the mollifier estimator."""
    a = float(level)
    dt = float(np.median(bundle.grid.dts))
    if n is None:
        n = coupled_mollifier_n(dt)
    u = bundle.x_path - a
    u_pre = bundle.x_pre - a
    sgn = np.where(u > 0.0, 1.0, -1.0)
    sgn_pre = np.where(u_pre > 0.0, 1.0, -1.0)
    cont_inc = bundle.diffusion_increments()
    jump_inc = bundle.k_jump_increments

    stoch = float(np.sum(sgn[:-1] * cont_inc) + np.sum(sgn_pre[1:] * jump_inc))
    jump_corr = float(np.sum((np.abs(u[1:]) - np.abs(u_pre[1:]))
                             - sgn_pre[1:] * jump_inc))
    lt = local_time_mollifier(bundle, a, n, qv_mode=qv_mode)

    lhs = float(np.abs(u[-1]) - np.abs(u[0]))
    terms = {
        "sgn_stochastic_integral": stoch,
        "jump_correction": jump_corr,
        "local_time": lt.final,
    }
    return _make_report("tanaka", lhs, terms,
                        {"level": a, "mollifier_n": n, "qv_mode": qv_mode})


def verify_ltc_diffusion(psf, bundle, eps=None, qv_mode="analytic"):
    """Diffusion-only local time on curves formula (symmetric local time)."""
    if bundle.jump_indices.size:
        raise IncompatibleScenarioError(
            "the diffusion formula requires a jump-free bundle")
    spec = _require_spec(bundle)
    dt = float(np.median(bundle.grid.dts))
    if eps is None:
        eps = coupled_eps(dt)

    t = bundle.times[:-1]
    a = bundle.a_path[:-1]
    x = bundle.x_path[:-1]
    b = psf.b(t, a)
    off = x != b

    mu = _coeff_values(spec, "mu_x", t, a, x)
    sigma = _coeff_values(spec, "sigma", t, a, x)
    gen = (psf.deriv("d_t", t, a, x)
           + mu * psf.deriv("d_x", t, a, x)
           + 0.5 * np.square(sigma) * psf.deriv("d_xx", t, a, x))
    time_term = float(np.sum(np.where(off, gen, 0.0) * bundle.grid.dts))

    db = np.diff(bundle.b_path)
    brownian_term = float(np.sum(
        np.where(off, sigma * psf.deriv("d_x", t, a, x), 0.0) * db))

    lt = local_time_occupation(bundle, psf.surface, eps, side="symmetric",
                               qv_mode=qv_mode)
    half_gap = 0.5 * fx_jump(psf, t, a)
    lt_term = float(np.sum(half_gap * np.diff(lt.values)))

    lhs = _lhs(psf, bundle)
    terms = {
        "generator_time_integral": time_term,
        "sigma_fx_brownian": brownian_term,
        "local_time": lt_term,
    }
    return _make_report("ltc_diffusion", lhs, terms,
                        {"eps": eps, "qv_mode": qv_mode, "lt_side": "symmetric"})


def verify_surfaces_strong(psf, bundle, eps=None, qv_mode="analytic"):
    """Strong-smoothness surfaces formula: averaged one-sided derivatives in
    the dt/dA/dX terms, symmetric local time, full jump compensation."""
    dt = float(np.median(bundle.grid.dts))
    if eps is None:
        eps = coupled_eps(dt)

    t = bundle.times[:-1]
    a = bundle.a_path[:-1]
    x = bundle.x_path[:-1]
    dts = bundle.grid.dts

    ft_bar = psf.deriv_averaged("d_t", t, a, x)
    fa_bar = psf.deriv_averaged("d_a", t, a, x)
    fx_bar = psf.deriv_averaged("d_x", t, a, x)

    time_term = float(np.sum(ft_bar * dts))
    a_cont = float(np.sum(fa_bar * bundle.a_drift_increments))
    x_cont = float(np.sum(fx_bar * bundle.diffusion_increments()))

    b = psf.b(t, a)
    qv = continuous_qv_measure(bundle, qv_mode=qv_mode)
    qv_term = float(np.sum(
        np.where(x != b, 0.5 * psf.deriv("d_xx", t, a, x), 0.0) * qv))

    lt = local_time_occupation(bundle, psf.surface, eps, side="symmetric",
                               qv_mode=qv_mode)
    lt_term = float(np.sum(0.5 * fx_jump(psf, t, a) * np.diff(lt.values)))

    a_jump = 0.0
    x_jump = 0.0
    comp = 0.0
    for ctx in iter_jumps(bundle):
        fa_pre = float(psf.deriv_averaged("d_a", ctx.t, ctx.a_pre, ctx.x_pre))
        fx_pre = float(psf.deriv_averaged("d_x", ctx.t, ctx.a_pre, ctx.x_pre))
        a_piece = fa_pre * ctx.da
        x_piece = fx_pre * ctx.dx
        a_jump += a_piece
        x_jump += x_piece
        df = float(eval_F(psf, ctx.t, ctx.a, ctx.x)
                   - eval_F(psf, ctx.t, ctx.a_pre, ctx.x_pre))
        comp += (df - a_piece) - x_piece

    lhs = _lhs(psf, bundle)
    terms = {
        "avg_ft_time_integral": time_term,
        "avg_fa_da_continuous": a_cont,
        "avg_fa_da_jumps": a_jump,
        "avg_fx_dx_continuous": x_cont,
        "avg_fx_dx_jumps": x_jump,
        "half_fxx_qv": qv_term,
        "local_time": lt_term,
        "jump_compensation": comp,
    }
    return _make_report("surfaces_strong", lhs, terms,
                        {"eps": eps, "qv_mode": qv_mode, "lt_side": "symmetric"})


def verify_jump_ltc(psf, bundle, n=None, qv_mode="analytic"):
    """Jump-diffusion local time on surfaces formula (right local time).

    Requires a Lipschitz-declared surface so the composed boundary process
    has bounded variation.
    """
    if not psf.surface.is_lipschitz:
        raise IncompatibleScenarioError(
            "this variant requires a Lipschitz-declared surface")
    spec = _require_spec(bundle)
    dt = float(np.median(bundle.grid.dts))
    if n is None:
        n = coupled_mollifier_n(dt)

    t = bundle.times[:-1]
    a = bundle.a_path[:-1]
    x = bundle.x_path[:-1]
    b = psf.b(t, a)
    off = x != b

    mu_x = _coeff_values(spec, "mu_x", t, a, x)
    mu_a = _coeff_values(spec, "mu_a", t, a, x)
    sigma = _coeff_values(spec, "sigma", t, a, x)
    gen = (psf.deriv("d_t", t, a, x)
           + mu_x * psf.deriv("d_x", t, a, x)
           + mu_a * psf.deriv("d_a", t, a, x)
           + 0.5 * np.square(sigma) * psf.deriv("d_xx", t, a, x))
    time_term = float(np.sum(np.where(off, gen, 0.0) * bundle.grid.dts))

    db = np.diff(bundle.b_path)
    brownian_term = float(np.sum(
        np.where(off, sigma * psf.deriv("d_x", t, a, x), 0.0) * db))

    lt = local_time_mollifier(bundle, psf.surface, n, qv_mode=qv_mode)
    lt_term = float(np.sum(0.5 * fx_jump(psf, t, a) * np.diff(lt.values)))

    jump_term = 0.0
    for ctx in iter_jumps(bundle):
        jump_term += float(eval_F(psf, ctx.t, ctx.a, ctx.x)
                           - eval_F(psf, ctx.t, ctx.a_pre, ctx.x_pre))

    lhs = _lhs(psf, bundle)
    terms = {
        "sigma_fx_brownian": brownian_term,
        "generator_time_integral": time_term,
        "local_time": lt_term,
        "jump_sum": jump_term,
    }
    return _make_report("jump_ltc", lhs, terms,
                        {"mollifier_n": n, "qv_mode": qv_mode, "lt_side": "right"})


def verify_smooth_fit(psf, bundle, qv_mode="analytic", fit_tol=1e-9,
                      fit_grid=21):
    """Extended Ito formula under smooth fit: no local-time term.

    The vanishing of the one-sided derivative gap is checked on a test grid
    spanning the path's (t, a) range before evaluation.
    """
    spec = _require_spec(bundle)
    t_grid = np.linspace(bundle.times[0], bundle.times[-1], fit_grid)
    a_lo, a_hi = float(bundle.a_path.min()), float(bundle.a_path.max())
    a_grid = np.linspace(a_lo - 0.1, a_hi + 0.1, fit_grid)
    tt, aa = np.meshgrid(t_grid, a_grid, indexing="ij")
    gap = np.max(np.abs(fx_jump(psf, tt, aa)))
    if gap >= fit_tol:
        raise IncompatibleScenarioError(
            f"smooth-fit condition violated on the test grid: max gap {gap:g}")

    t = bundle.times[:-1]
    a = bundle.a_path[:-1]
    x = bundle.x_path[:-1]
    b = psf.b(t, a)
    off = x != b

    mu_x = _coeff_values(spec, "mu_x", t, a, x)
    mu_a = _coeff_values(spec, "mu_a", t, a, x)
    sigma = _coeff_values(spec, "sigma", t, a, x)
    gen = (psf.deriv("d_t", t, a, x)
           + mu_x * psf.deriv("d_x", t, a, x)
           + mu_a * psf.deriv("d_a", t, a, x)
           + 0.5 * np.square(sigma) * psf.deriv("d_xx", t, a, x))
    time_term = float(np.sum(np.where(off, gen, 0.0) * bundle.grid.dts))

    db = np.diff(bundle.b_path)
    brownian_term = float(np.sum(
        np.where(off, sigma * psf.deriv("d_x", t, a, x), 0.0) * db))

    dy = bundle.y_path - bundle.y_pre  # nonzero only at flagged indices
    y_term = 0.0
    comp = 0.0
    for ctx in iter_jumps(bundle):
        idx = np.searchsorted(bundle.times, ctx.t)
        lam = spec.eval_coeff("lambda_x", ctx.t, ctx.a_pre, ctx.x_pre)
        fx_pre = float(psf.deriv_from_below("d_x", ctx.t, ctx.a_pre, ctx.x_pre))
        y_term += lam * fx_pre * float(dy[idx])
        df = float(eval_F(psf, ctx.t, ctx.a, ctx.x)
                   - eval_F(psf, ctx.t, ctx.a_pre, ctx.x_pre))
        comp += df - fx_pre * ctx.dx

    lhs = _lhs(psf, bundle)
    terms = {
        "sigma_fx_brownian": brownian_term,
        "lambda_fx_dY": y_term,
        "generator_time_integral": time_term,
        "jump_compensation": comp,
    }
    return _make_report("smooth_fit", lhs, terms,
                        {"qv_mode": qv_mode, "fit_gap": float(gap)})


@dataclass(frozen=True)
class GeneratorSpec:
    """User-supplied (H, lambda) pair for the general formula, plus the
    scenario author's analytic justification of the balance hypothesis."""

    h: Callable  # (t, a, x) -> float, evaluated at left limits along paths
    measure: MeasureSpec = LEBESGUE
    hypothesis_note: str = "asserted by scenario author"


def verify_general(psf, gen, bundle, n=None, qv_mode="analytic"):
    """General semimartingale formula with user-supplied (H, lambda)."""
    if bundle.m_increments is None:
        raise ConfigError("bundle lacks M/K decomposition tags")
    dt = float(np.median(bundle.grid.dts))
    if n is None:
        n = coupled_mollifier_n(dt)

    t = bundle.times
    h_vals = np.asarray(gen.h(t, bundle.a_pre, bundle.x_pre), dtype=float)
    h_vals = np.broadcast_arrays(h_vals, t)[0]
    h_term = measure_integral(h_vals, gen.measure, bundle.grid)

    tk = t[:-1]
    ak = bundle.a_path[:-1]
    xk = bundle.x_path[:-1]
    m_term = float(np.sum(
        psf.deriv_from_below("d_x", tk, ak, xk) * bundle.m_increments))

    lt = local_time_mollifier(bundle, psf.surface, n, qv_mode=qv_mode)
    lt_term = float(np.sum(0.5 * fx_jump(psf, tk, ak) * np.diff(lt.values)))

    jump_term = 0.0
    for ctx in iter_jumps(bundle):
        fx_pre = float(psf.deriv_from_below("d_x", ctx.t, ctx.a_pre, ctx.x_pre))
        df = float(eval_F(psf, ctx.t, ctx.a, ctx.x)
                   - eval_F(psf, ctx.t, ctx.a_pre, ctx.x_pre))
        jump_term += df - fx_pre * ctx.dm

    lhs = _lhs(psf, bundle)
    terms = {
        "h_dlambda": h_term,
        "fx_dM": m_term,
        "local_time": lt_term,
        "jump_compensation": jump_term,
    }
    return _make_report("general", lhs, terms,
                        {"mollifier_n": n, "qv_mode": qv_mode,
                         "hypothesis": gen.hypothesis_note, "lt_side": "right"})


def _lhs(psf, bundle):
    end = float(eval_F(psf, bundle.times[-1], bundle.a_path[-1], bundle.x_path[-1]))
    start = float(eval_F(psf, bundle.times[0], bundle.a_path[0], bundle.x_path[0]))
    return end - start

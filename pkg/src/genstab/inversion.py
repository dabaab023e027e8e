"""Densities, distribution functions and quantiles by Fourier inversion.

``pdf_at`` and ``cdf_at`` use Gil-Pelaez inversion of the chf with the atom
at zero (compound-Poisson members and their geometric extension) subtracted
first, since its Fourier term does not decay:

    pdf(x) = 1/pi  int_0^inf Re[exp(-i t x) phi_c(t)] dt
    F(x)   = atom * [x >= 0] + (1 - atom)/2 - 1/pi int_0^inf Im[exp(-i t x) phi_c(t)] / t dt

with ``phi_c = phi - atom``.  Members whose chf decays at least like a
stretched exponential are integrated on a truncated range found by doubling
(with an analytic bound on the discarded tail).  Slowly decaying chfs are
split into a head handled by adaptive Gauss-Kronrod and a tail handled by
QUADPACK's QAWF Fourier-integral routine.

The closed forms in :func:`oracle_pdf`, :func:`oracle_cdf` and the
convolution series :func:`geometric_series_cdf` serve as independent
references for the inversion.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special, stats
from scipy.interpolate import CubicSpline, PchipInterpolator

from .chf import log_chf, probe
from .errors import (
    AccuracyError,
    DegenerateMemberError,
    InputError,
    InvalidMemberError,
    NumericalError,
    RegimeError,
)
from .family import (
    CaseTag,
    FamilyParams,
    GeometricView,
    TiltedView,
    as_tilted,
    classify,
    cumulant,
    validate,
)

__all__ = [
    "DensityTable",
    "pdf_at",
    "cdf_at",
    "atom_mass",
    "quantile",
    "oracle_pdf",
    "oracle_cdf",
    "geometric_series_cdf",
    "compound_poisson_pdf",
    "compound_poisson_cdf",
    "compound_poisson_logpdf",
    "density_table",
    "pdf_grid",
    "pdf_fft",
    "positive_stable_logpdf",
    "tilted_stable_logpdf",
    "cdf_grid",
    "describe",
]

_PHI_FLOOR = 1e-16  # |phi| below this is treated as exhausted
_MAX_T_DOUBLINGS = 60
_FFT_MIN_POINTS = 2048  # cdf_grid switches to FFT + spline above this many points
_FFT_MAX_SIZE = 1 << 22


@dataclass(frozen=True)
class Law:
    """Everything the inversion needs to know about a member."""

    phi: Callable
    atom: float
    mean: float
    sd: float
    support: tuple
    fast_decay: bool
    decay_exponent: float
    label: str

    def phi_cont(self, t):
        return self.phi(t) - self.atom


def _half_line(sign: float) -> tuple:
    return (0.0, math.inf) if sign > 0 else (-math.inf, 0.0)


@lru_cache(maxsize=256)
def _describe_params(params: FamilyParams) -> Law:
    report = validate(params)
    if not report.is_valid_chf:
        raise InvalidMemberError(f"not a characteristic function:\n{report}", report)
    case = classify(params)
    if case is CaseTag.DEGENERATE:
        raise DegenerateMemberError(f"gamma = 1 is a point mass at {params.a * params.c!r}; no density")
    k1 = cumulant(params, 1)
    k2 = cumulant(params, 2)
    if not k2 > 1e-10 * max(1.0, k1 * k1):
        raise DegenerateMemberError(f"variance {k2!r} is numerically zero; no usable density")

    def phi(t, _p=params):
        return np.exp(log_chf(_p, np.asarray(t, dtype=float)))

    if case is CaseTag.COMPOUND_POISSON_GAMMA:
        return Law(phi, math.exp(params.a), k1, math.sqrt(k2), _half_line(params.c), False, 0.0, "a")
    if case is CaseTag.TILTED_POSITIVE_STABLE:
        return Law(phi, 0.0, k1, math.sqrt(k2), _half_line(params.c), True, params.gamma, "b")
    if case is CaseTag.TILTED_EXTREME_STABLE:
        return Law(phi, 0.0, k1, math.sqrt(k2), (-math.inf, math.inf), True, params.gamma, "d")
    return Law(phi, 0.0, k1, math.sqrt(k2), (-math.inf, math.inf), True, 2.0, "e")


@lru_cache(maxsize=64)
def _describe_geometric(gview: GeometricView) -> Law:
    params = gview.member
    case = classify(params)
    if case is CaseTag.GEOMETRIC_ONLY:
        rep = probe(lambda t: _omega(params, t))
        if rep.verdict != "consistent":
            raise InvalidMemberError(
                f"geometric extension of gamma={params.gamma}, a={params.a} failed the Bochner probe "
                f"(min eigenvalue {rep.min_eigenvalue:.3g}, max |omega| {rep.max_modulus:.6g})"
            )
    else:
        report = validate(params)
        if not report.is_valid_chf:
            raise InvalidMemberError(f"base member is not a characteristic function:\n{report}", report)
    k1 = cumulant(params, 1)
    var = cumulant(params, 2) + k1 * k1
    if not var > 0:
        raise DegenerateMemberError("geometric extension has zero variance")

    def phi(t, _p=params):
        return _omega(_p, t)

    atom = 0.0
    if case is CaseTag.COMPOUND_POISSON_GAMMA:
        atom = 1.0 - gview.q
        support = _half_line(params.c)
    elif case is CaseTag.TILTED_POSITIVE_STABLE:
        support = _half_line(params.c)
    elif case is CaseTag.DEGENERATE:
        support = _half_line(params.a * params.c)
    else:
        support = (-math.inf, math.inf)
    return Law(phi, atom, k1, math.sqrt(var), support, False, 0.0, "geometric-" + case.letter)


def _omega(params, t):
    return 1.0 / (1.0 - log_chf(params, np.asarray(t, dtype=float)))


def describe(member) -> Law:
    if isinstance(member, GeometricView):
        return _describe_geometric(member)
    return _describe_params(as_tilted(member).member)


def atom_mass(member) -> float:
    """Mass of the atom at zero (``exp(a)`` for compound Poisson, ``1 - q`` geometric)."""
    if isinstance(member, GeometricView):
        if member.q is None:
            return 0.0
        return 1.0 - member.q
    params = as_tilted(member).member
    if classify(params) is CaseTag.COMPOUND_POISSON_GAMMA and params.a < 0:
        return math.exp(params.a)
    return 0.0


# --------------------------------------------------------------------------
# scalar adaptive inversion


def _truncation_point(law: Law) -> tuple[float, float]:
    """Point beyond which |phi| stays below the floor, and a bound for the rest."""
    T = 1.0 / law.sd
    for _ in range(_MAX_T_DOUBLINGS):
        probe_t = np.array([T, 1.5 * T, 2.0 * T])
        if np.all(np.abs(law.phi_cont(probe_t)) < _PHI_FLOOR):
            mod = abs(law.phi_cont(T))
            if mod == 0.0:
                return T, 0.0
            # int_T^inf exp(-k t^nu) dt  <~  |phi(T)| T / (nu k T^nu)
            expo = max(-math.log(mod), 1.0)
            return T, mod * T / (law.decay_exponent * expo)
        T *= 2.0
    raise AccuracyError("characteristic function does not decay; cannot truncate", math.inf)


def _chunked_quad(f, a: float, b: float, freq: float, epsabs: float):
    """Adaptive quadrature on [a, b] split into pieces of ~8 oscillations."""
    if b <= a:
        return 0.0, 0.0
    n = max(1, int(math.ceil((b - a) * max(freq, 1e-300) / (16.0 * math.pi))))
    n = min(n, 20000)
    edges = np.linspace(a, b, n + 1)
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e = integrate.quad(f, lo, hi, epsabs=epsabs / n, epsrel=1e-12, limit=200)
        total += val
        err += e
    return total, err


def _weighted(f, a: float, b: float, kind: str, w: float, epsabs: float):
    """``int_a^b f(t) cos(w t)`` or ``sin(w t)`` dt; ``b`` may be infinite."""
    if w == 0.0:
        if kind == "sin":
            return 0.0, 0.0
        return integrate.quad(f, a, b, epsabs=epsabs, epsrel=1e-12, limit=500)
    sign = 1.0
    if w < 0:
        w = -w
        if kind == "sin":
            sign = -1.0
    if math.isinf(b):
        val, err = integrate.quad(f, a, b, weight=kind, wvar=w, epsabs=epsabs, limlst=200, limit=500)
    else:
        val, err = integrate.quad(f, a, b, weight=kind, wvar=w, epsabs=epsabs, epsrel=1e-12, limit=2000)
    return sign * val, err


def _fourier(law: Law, x: float, what: str, epsabs: float) -> tuple[float, float]:
    """``int_0^inf`` of the pdf or cdf integrand, with an error estimate.

    The head ``[0, 1/sd]`` is integrated directly; beyond it the factor
    ``exp(-i t x)`` is handled as a QAWO/QAWF weight.
    """
    if what == "pdf":
        def head(t):
            return (np.exp(-1j * t * x) * law.phi_cont(t)).real

        def f_cos(t):
            return law.phi_cont(t).real

        def f_sin(t):
            return law.phi_cont(t).imag

        sin_sign = 1.0
    else:
        def head(t):
            return (np.exp(-1j * t * x) * law.phi_cont(t)).imag / t

        def f_cos(t):
            return law.phi_cont(t).imag / t

        def f_sin(t):
            return law.phi_cont(t).real / t

        sin_sign = -1.0
    freq = abs(x) + abs(law.mean) + 1.0 / law.sd
    tail = 0.0
    if law.fast_decay:
        T, tail = _truncation_point(law)
        if what == "cdf":
            tail /= T
    else:
        T = math.inf
    T0 = min(1.0 / law.sd, T)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = _chunked_quad(head, 0.0, T0, freq, epsabs)
        if T > T0:
            v1, e1 = _weighted(f_cos, T0, T, "cos", x, epsabs)
            v2, e2 = _weighted(f_sin, T0, T, "sin", x, epsabs)
            val += v1 + sin_sign * v2
            err += e1 + e2
    return val, err + tail


def pdf_at(member, x: float, *, max_error: float = 1e-7, epsabs: float = 1e-11) -> float:
    """Density of the absolutely continuous part at ``x``.

    Raises :class:`AccuracyError` when the achieved error estimate exceeds
    ``max_error`` and :class:`DegenerateMemberError` for point masses.
    """
    law = describe(member)
    x = float(x)
    lo, hi = law.support
    if x < lo or x > hi:
        return 0.0
    if law.atom > 0 and x == 0.0:
        raise InputError("x = 0 carries the atom; the continuous density is evaluated at x != 0")
    val, err = _fourier(law, x, "pdf", epsabs)
    err /= math.pi
    if not err <= max_error:
        raise AccuracyError(f"pdf inversion at x={x!r} reached error bound {err:.3g}", err)
    return max(val / math.pi, 0.0)


def cdf_at(member, x: float, *, max_error: float = 1e-7, epsabs: float = 1e-11) -> float:
    law = describe(member)
    x = float(x)
    lo, hi = law.support
    if x < lo:
        return 0.0
    if x >= hi:
        return 1.0
    atom_part = law.atom if x >= 0.0 else 0.0
    if law.atom > 0 and lo == 0.0 and x == 0.0:
        return law.atom
    val, err = _fourier(law, x, "cdf", epsabs)
    err /= math.pi
    if not err <= max_error:
        raise AccuracyError(f"cdf inversion at x={x!r} reached error bound {err:.3g}", err)
    F = atom_part + 0.5 * (1.0 - law.atom) - val / math.pi
    return min(max(F, 0.0), 1.0)


def quantile(member, u: float, *, xtol: float = 1e-10) -> float:
    """Smallest ``x`` with ``F(x) >= u`` (``0`` when ``u`` falls inside the atom)."""
    if not 1e-9 < u < 1.0 - 1e-9:
        raise InputError("quantile level must lie in (1e-9, 1 - 1e-9)")
    law = describe(member)
    lo_s, hi_s = law.support
    F = lambda x: cdf_at(member, x)
    if law.atom > 0:
        below = F(-1e-300) if lo_s < 0 else 0.0
        if below < u <= below + law.atom:
            return 0.0

    def bracket(center, step, direction):
        x = center
        for _ in range(200):
            x = x + direction * step
            if direction < 0 and x <= lo_s:
                return lo_s
            if direction > 0 and x >= hi_s:
                return hi_s
            fx = F(x)
            if (direction < 0 and fx < u) or (direction > 0 and fx >= u):
                return x
            step *= 2.0
        raise NumericalError(f"could not bracket quantile level {u!r}")

    m, s = law.mean, law.sd
    fm = F(min(max(m, lo_s), hi_s))
    if fm >= u:
        a = bracket(m, s, -1)
        b = m
    else:
        a = m
        b = bracket(m, s, +1)
    a = max(a, lo_s)
    b = min(b, hi_s)
    fa, fb = F(a), F(b)
    while b - a > xtol * max(1.0, abs(a), abs(b)):
        mid = 0.5 * (a + b)
        fmid = F(mid)
        if fmid >= u:
            b, fb = mid, fmid
        else:
            a, fa = mid, fmid
    # one secant step inside the final bracket
    if fb > fa:
        x = a + (u - fa) * (b - a) / (fb - fa)
        if a <= x <= b:
            return x
    return b


# --------------------------------------------------------------------------
# grids and tables


@dataclass(frozen=True)
class DensityTable:
    abscissae: np.ndarray
    pdf: np.ndarray
    cdf: np.ndarray
    atom_at_zero: float

    def cdf_interpolator(self) -> Callable:
        """Monotone interpolant of the tabulated cdf (atom-aware at zero)."""
        x = self.abscissae
        F = np.maximum.accumulate(np.clip(self.cdf, 0.0, 1.0))
        interp = PchipInterpolator(x, F, extrapolate=False)
        x_lo, x_hi = x[0], x[-1]
        atom = self.atom_at_zero

        def cdf(v):
            v = np.asarray(v, dtype=float)
            out = np.asarray(interp(np.clip(v, x_lo, x_hi)), dtype=float)
            out = np.where(v < x_lo, 0.0 if x_lo > 0 or atom == 0 else out, out)
            out = np.where(v < x_lo, np.minimum(out, F[0]), out)
            out = np.where(v > x_hi, np.maximum(out, F[-1]), out)
            return np.clip(out, 0.0, 1.0)

        return cdf


def _grid_setup(member, law: Law, x: np.ndarray, anchor: float, reach: float):
    """Step and frequencies for the Poisson-summation sums, or None if too many."""
    T, _ = _truncation_point(law)
    span = max(x.max(), law.mean) - min(x.min(), law.mean, anchor)
    period = span + 2.0 * reach
    h = 2.0 * math.pi / period
    n = int(math.ceil(T / h))
    if n > 400000:
        return None
    return h, h * np.arange(1, n + 1)


def pdf_grid(member, x, *, fallback: bool = True) -> np.ndarray:
    """Vectorized continuous-part density on many points.

    Uses the trapezoid rule on the full line (Poisson summation): with step
    ``h`` the result is the density plus its periodic images at spacing
    ``2 pi / h``, so ``h`` is chosen to push the images beyond the mass of
    the law.  Points farther from the mean than the Chernoff tail reach
    (where the tail mass is below 1e-18) get 0.  Only for members whose chf
    decays fast; others fall back to :func:`pdf_at` point by point, or raise
    :class:`NumericalError` when ``fallback`` is false.  Compound
    Poisson-gamma members use their exact series instead.
    """
    law = describe(member)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape)
    if not isinstance(member, GeometricView):
        params = as_tilted(member).member
        if classify(params) is CaseTag.COMPOUND_POISSON_GAMMA:
            return _compound_poisson_pdf_limit(params, x)
    if not law.fast_decay:
        if not fallback:
            raise NumericalError("no trapezoid grid for a slowly decaying chf")
        return np.array([_safe_pdf(member, v) for v in x])
    reach = _tail_reach(member, law)
    lo, hi = law.support
    inside = (np.abs(x - law.mean) <= reach) & (x >= lo) & (x <= hi)
    if not np.any(inside):
        return out
    xi = x[inside]
    setup = _grid_setup(member, law, xi, law.mean, reach)
    if setup is None:
        if not fallback:
            raise NumericalError("no affordable trapezoid grid for this member")
        out[inside] = [_safe_pdf(member, v) for v in xi]
        return out
    h, t = setup
    phi = law.phi(t)
    w_re = phi.real * h
    w_im = phi.imag * h
    vals = np.empty(xi.size)
    chunk = max(1, int(4e6 // t.size))
    for s in range(0, xi.size, chunk):
        arg = np.outer(xi[s:s + chunk], t)
        vals[s:s + chunk] = 0.5 * h + np.cos(arg) @ w_re + np.sin(arg) @ w_im
    out[inside] = np.maximum(vals / math.pi, 0.0)
    return out


def pdf_fft(member, *, points_per_sd: int = 1024, max_size: int = 1 << 22):
    """Continuous-part density on a fine equispaced grid by one FFT.

    The same trapezoid sum as :func:`pdf_grid`, evaluated at ``N`` points of
    one period ``[mean - 1.25 R, mean + 1.25 R)`` (``R`` the tail reach) with
    spacing at most ``sd / points_per_sd``.  Returns ``(x, pdf)``; meant for
    interpolation onto many abscissae at once.
    """
    law = describe(member)
    if not law.fast_decay:
        raise NumericalError("no FFT grid for a slowly decaying chf")
    T, _ = _truncation_point(law)
    reach = _tail_reach(member, law)
    period = 2.5 * reach
    h = 2.0 * math.pi / period
    n = int(math.ceil(T / h))
    size = 1 << int(math.ceil(math.log2(max(2 * n, period / law.sd * points_per_sd, 256))))
    if size > max_size:
        raise NumericalError(f"FFT grid would need {size} points")
    x0 = law.mean - 0.5 * period
    k = np.arange(1, n + 1)
    coef = np.zeros(size, dtype=complex)
    coef[k] = law.phi(h * k) * np.exp(-1j * h * k * x0)
    x = x0 + np.arange(size) * (period / size)
    pdf = (h / math.pi) * (0.5 + np.fft.fft(coef).real)
    lo, hi = law.support
    pdf = np.where((x < lo) | (x > hi), 0.0, np.maximum(pdf, 0.0))
    return x, pdf


def cdf_grid(member, x) -> np.ndarray:
    """Vectorized cdf on many points.

    Integrates the periodized density of :func:`pdf_grid` from a left
    anchor ``x0`` with ``F(x0) ~ 0`` (the lower support end, or the mean
    minus the Chernoff tail reach), term by term:
    ``F(x) = h (x - x0) / (2 pi) + sum_k Re[phi(t_k) (e^{-i t_k x0} - e^{-i t_k x}) / (i k pi)]``.
    Compound Poisson-gamma members use their exact series; other slow-decay
    laws fall back to :func:`cdf_at`.
    """
    law = describe(member)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not isinstance(member, GeometricView):
        params = as_tilted(member).member
        if classify(params) is CaseTag.COMPOUND_POISSON_GAMMA:
            return compound_poisson_cdf(params, x)
    lo, hi = law.support
    reach = _tail_reach(member, law) if law.fast_decay else math.inf
    anchor = lo if math.isfinite(lo) else law.mean - reach
    # beyond the reach the cdf is 0 or 1 to within 1e-18
    xc = np.clip(x, anchor, law.mean + reach)
    setup = _grid_setup(member, law, xc, anchor, reach) if law.fast_decay else None
    if setup is None:
        return np.array([cdf_at(member, v) for v in x])
    h, t = setup
    k = np.arange(1, t.size + 1)
    coef = law.phi(t) / (1j * k * math.pi)
    base = coef * np.exp(-1j * t * anchor)
    period = 2.0 * math.pi / h
    size = 1 << int(math.ceil(math.log2(max(2 * t.size, period / law.sd * 1024, 256))))
    if x.size > _FFT_MIN_POINTS and size <= _FFT_MAX_SIZE:
        # same sum on the equispaced grid anchor + j period / size, then a spline
        padded = np.zeros(size, dtype=complex)
        padded[1:t.size + 1] = base
        xg = anchor + np.arange(size) * (period / size)
        Fg = h * (xg - anchor) / (2.0 * math.pi) + np.real(base.sum() - np.fft.fft(padded))
        out = CubicSpline(xg, Fg)(xc)
    else:
        out = np.empty_like(x)
        chunk = max(1, int(4e6 // t.size))
        for s in range(0, x.size, chunk):
            xs = xc[s:s + chunk]
            out[s:s + chunk] = h * (xs - anchor) / (2.0 * math.pi) + np.real(
                base.sum() - np.exp(-1j * np.outer(xs, t)) @ coef
            )
    out = np.where(x < lo, 0.0, np.where(x > hi, 1.0, out))
    return np.clip(out, 0.0, 1.0)


def _compound_poisson_pdf_limit(params: FamilyParams, x: np.ndarray) -> np.ndarray:
    """Series density with its one-sided limit at 0: 0, rate e^-rate / |c| or
    inf for jump shapes above, at or below 1."""
    out = compound_poisson_pdf(params, x)
    gb = params.gamma_bar
    at0 = 0.0 if gb > 1 else (-params.a * math.exp(params.a) / abs(params.c) if gb == 1 else math.inf)
    return np.where(x == 0.0, at0, out)


def _safe_pdf(member, v):
    law = describe(member)
    if law.atom > 0 and v == 0.0:
        v = math.copysign(1e-12 * law.sd, law.support[1] if law.support[0] == 0.0 else -1.0)
    return pdf_at(member, v)


def _tail_reach(member, law: Law) -> float:
    """Distance from the mean beyond which the density is negligible.

    Chernoff bound ``P(X - mean > d) <= exp(m(l) - l (mean + d))`` scanned
    over the mgf domain, in both directions; capped at 200 sd.
    """
    params = as_tilted(member).member
    c = params.c
    reach = 0.0
    for direction in (+1.0, -1.0):
        lam_cap = 1.0 / abs(c) if c * direction > 0 else math.inf
        lam = direction * np.linspace(0.0, min(lam_cap, 50.0 / law.sd), 402)[1:-1]
        m = -params.a * np.expm1(params.gamma * np.log(1.0 - lam * c))
        best = 200.0 * law.sd
        for d in law.sd * np.geomspace(1.0, 200.0, 60):
            if np.min(m - lam * law.mean - np.abs(lam) * d) < math.log(1e-18):
                best = d
                break
        reach = max(reach, best)
    return reach


def density_table(member, x) -> DensityTable:
    """Tabulate pdf (continuous part) and cdf on the sorted abscissae ``x``."""
    x = np.sort(np.asarray(x, dtype=float))
    law = describe(member)
    pdf = pdf_grid(member, x)
    cdf = cdf_grid(member, x)
    return DensityTable(x, pdf, cdf, law.atom)


# --------------------------------------------------------------------------
# closed-form references


def oracle_pdf(kind: str, x, **par):
    """Closed-form densities: ``inverse_gaussian(mu, lam)``, ``levy(scale)``,
    ``normal(mean, var)`` and ``gamma(shape, scale)``.  Zero off the support."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if kind == "inverse_gaussian":
            mu, lam = par["mu"], par["lam"]
            xs = np.where(x > 0, x, 1.0)
            val = np.sqrt(lam / (2 * np.pi * xs**3)) * np.exp(-lam * (xs - mu) ** 2 / (2 * mu**2 * xs))
            out = np.where(x > 0, val, 0.0)
        elif kind == "levy":
            s = par["scale"]
            xs = np.where(x > 0, x, 1.0)
            val = np.sqrt(s / (2 * np.pi)) * xs**-1.5 * np.exp(-s / (2 * xs))
            out = np.where(x > 0, val, 0.0)
        elif kind == "normal":
            out = np.exp(-((x - par["mean"]) ** 2) / (2 * par["var"])) / np.sqrt(2 * np.pi * par["var"])
        elif kind == "gamma":
            out = stats.gamma.pdf(x, par["shape"], scale=par["scale"])
        else:
            raise InputError(f"unknown oracle kind {kind!r}")
    return out if out.ndim else float(out)


def oracle_cdf(kind: str, x, **par):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if kind == "inverse_gaussian":
            mu, lam = par["mu"], par["lam"]
            xs = np.where(x > 0, x, 1.0)
            r = np.sqrt(lam / xs)
            # exp(2 lam/mu) Phi(-r(x/mu+1)) evaluated in log space
            second = np.exp(2 * lam / mu + special.log_ndtr(-r * (xs / mu + 1)))
            out = np.where(x > 0, special.ndtr(r * (xs / mu - 1)) + second, 0.0)
        elif kind == "levy":
            s = par["scale"]
            xs = np.where(x > 0, x, 1.0)
            out = np.where(x > 0, special.erfc(np.sqrt(s / (2 * xs))), 0.0)
        elif kind == "normal":
            out = special.ndtr((x - par["mean"]) / np.sqrt(par["var"]))
        elif kind == "gamma":
            out = stats.gamma.cdf(x, par["shape"], scale=par["scale"])
        else:
            raise InputError(f"unknown oracle kind {kind!r}")
    return out if out.ndim else float(out)


def compound_poisson_logpdf(member, x, *, max_terms: float = 1e7):
    """Log continuous-part density of a compound Poisson-gamma member by its
    series ``sum_n Poisson(n; -a) Gamma(n * gamma_bar, |c|)``; ``-inf`` off the
    open half-line."""
    params = as_tilted(member).member
    if classify(params) is not CaseTag.COMPOUND_POISSON_GAMMA or params.a >= 0:
        raise RegimeError("series density needs gamma < 0 and a < 0")
    x = np.asarray(x, dtype=float)
    y = x if params.c > 0 else -x
    rate = -params.a
    scale = abs(params.c)
    shape = params.gamma_bar
    flat = np.atleast_1d(np.where(y > 0, y, 1.0)).ravel()
    # the terms in n are unimodal with mode near n* solving
    # n^(1 + shape) = rate (y / (scale shape))^shape and width ~ sqrt(n* / (1 + shape))
    log_mode = (math.log(rate) + shape * np.log(flat / (scale * shape))) / (1.0 + shape)
    if np.max(log_mode) > math.log(max_terms):
        raise NumericalError(f"compound Poisson series needs more than {max_terms:.3g} terms at these parameters")
    mode = np.exp(log_mode)
    half = 12.0 * np.sqrt(mode / (1.0 + shape)) + 40.0
    lo = np.maximum(1.0, np.floor(mode - half)).astype(np.int64)
    width = int(np.max(np.ceil(2.0 * half))) + 1
    # log term = alpha_n + n shape log y + (terms in y alone)
    n_min = int(lo.min())
    n_all = np.arange(n_min, int(lo.max()) + width, dtype=float)
    alpha = (
        n_all * (math.log(rate) - shape * math.log(scale))
        - special.gammaln(n_all + 1.0)
        - special.gammaln(n_all * shape)
    )
    log_y = np.log(flat)
    out = np.empty(flat.size)
    step = max(1, int(2_000_000 // width))
    offs = np.arange(width)
    for s in range(0, flat.size, step):
        idx = lo[s:s + step, None] - n_min + offs
        terms = alpha[idx] + n_all[idx] * shape * log_y[s:s + step, None]
        out[s:s + step] = special.logsumexp(terms, axis=-1)
    out += -rate - log_y - flat / scale
    return np.where(y > 0, out.reshape(np.shape(y)), -np.inf)


def compound_poisson_cdf(member, x):
    """Cdf of a compound Poisson-gamma member, atom included, by the mixture
    ``sum_n Poisson(n; -a) P(Gamma(n * gamma_bar, |c|) <= y)`` over the
    Poisson counts carrying all but ~1e-17 of the mass."""
    params = as_tilted(member).member
    if classify(params) is not CaseTag.COMPOUND_POISSON_GAMMA or params.a >= 0:
        raise RegimeError("series cdf needs gamma < 0 and a < 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rate = -params.a
    scale = abs(params.c)
    half = 12.0 * math.sqrt(rate) + 40.0
    n = np.arange(max(1, int(rate - half)), int(rate + half) + 1, dtype=float)
    w = stats.poisson.pmf(n, rate)
    shapes = n * params.gamma_bar
    y = np.abs(x)
    out = np.empty(x.shape)
    step = max(1, int(2_000_000 // n.size))
    for s in range(0, x.size, step):
        ys = y[s:s + step, None] / scale
        if params.c > 0:
            out[s:s + step] = math.exp(-rate) + special.gammainc(shapes, ys) @ w
        else:
            out[s:s + step] = special.gammaincc(shapes, ys) @ w
    if params.c > 0:
        out = np.where(x < 0, 0.0, out)
    else:
        out = np.where(x >= 0, 1.0, out)
    return np.clip(out, 0.0, 1.0)


def compound_poisson_pdf(member, x):
    """Continuous-part density of a compound Poisson-gamma member (see
    :func:`compound_poisson_logpdf`)."""
    return np.exp(compound_poisson_logpdf(member, x))


def _log_sinc(x):
    """``log(sin x / x)`` with full relative accuracy near zero."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    series = -x2 * (1 / 6 + x2 * (1 / 180 + x2 * (1 / 2835 + x2 / 37800)))
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.log(np.sin(x) / np.where(x == 0, 1.0, x))
    return np.where(np.abs(x) < 1e-2, series, direct)


def _kanter_excess(alpha: float, u):
    """``K(u) - K(0)`` for ``K(u) = [sin(alpha u)^alpha sin((1-alpha) u)^(1-alpha) / sin u]^(1/(1-alpha))``.

    The powers of ``u`` cancel exactly, so the log ratio ``log K(u)/K(0)`` is a
    combination of ``log(sin x / x)`` terms and stays accurate as ``u -> 0``."""
    k0 = (1.0 - alpha) * alpha ** (alpha / (1.0 - alpha))
    with np.errstate(over="ignore"):
        log_ratio = (alpha * _log_sinc(alpha * u) + (1.0 - alpha) * _log_sinc((1.0 - alpha) * u) - _log_sinc(u)) / (
            1.0 - alpha
        )
        return k0 * np.expm1(log_ratio)


def positive_stable_logpdf(alpha: float, x):
    """Log density of the standard positive stable law (Laplace transform
    ``exp(-s**alpha)``) from its integral representation
    ``p(x) = alpha/(1-alpha) x^(-1/(1-alpha)) / pi * int_0^pi K(u) exp(-K(u) z) du``
    with ``z = x^(-alpha/(1-alpha))``.  The factor ``exp(-K(0) z)`` is pulled out
    so small ``x`` keeps full relative accuracy."""
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.full(x.shape, -np.inf)
    pos = x > 0
    if not np.any(pos):
        return out
    xp = x[pos]
    z = xp ** (-alpha / (1.0 - alpha))
    k0 = (1.0 - alpha) * alpha ** (alpha / (1.0 - alpha))
    # K(u) ~ k0 (1 + alpha u^2 / 2) near 0, so the peak has width ~ (k0 alpha z)^(-1/2);
    # once that is below ~1e-4 the Laplace approximation is accurate to ~1e-8
    laplace = k0 * alpha * z > 1e8
    log_int = np.empty(z.shape)
    log_int[laplace] = math.log(0.5 * k0) + 0.5 * np.log(2.0 * math.pi / (k0 * alpha * z[laplace]))
    # one adaptive run per decade of peak width, with breakpoints scaled to it
    decade = np.floor(np.log10(np.maximum(k0 * alpha * z, 1.0)))
    for d in np.unique(decade[~laplace]):
        sel = ~laplace & (decade == d)
        zq = z[sel]
        width = 10.0 ** (-0.5 * d)
        points = tuple(p for p in width * np.array([1.0, 3.0, 10.0, 30.0, 100.0]) if p < 3.0)

        def integrand(u, zq=zq):
            ex = _kanter_excess(alpha, u)
            with np.errstate(over="ignore", invalid="ignore"):
                val = (k0 + ex) * np.exp(-ex * zq)
            return np.where(np.isfinite(val), val, 0.0)

        val, _ = integrate.quad_vec(integrand, 0.0, math.pi, epsabs=0.0, epsrel=1e-12,
                                    points=points or None, limit=2000)
        log_int[sel] = np.log(val)
    out[pos] = math.log(alpha / ((1.0 - alpha) * math.pi)) - np.log(xp) / (1.0 - alpha) - k0 * z + log_int
    return out


def tilted_stable_logpdf(member, x):
    """Log density of a ``0 < gamma < 1`` member: ``a - x/c`` plus the log density
    of a positive stable law with scale ``a**(1/gamma) c`` (mirrored for ``c < 0``)."""
    params = as_tilted(member).member
    if classify(params) is not CaseTag.TILTED_POSITIVE_STABLE or params.a <= 0:
        raise RegimeError("tilted stable density needs 0 < gamma < 1 and a > 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = x if params.c > 0 else -x
    scale = abs(params.c)
    sigma = params.a ** (1.0 / params.gamma) * scale
    return params.a - y / scale - math.log(sigma) + positive_stable_logpdf(params.gamma, y / sigma)


def geometric_series_cdf(view, x: float, tolerance: float = 1e-12) -> float:
    """Cdf of the geometric extension of a compound-Poisson member by the
    convolution series ``sum_n (1-q) q**n Gamma_n(x)`` with ``q = -a/(1-a)``."""
    gview = view if isinstance(view, GeometricView) else None
    tv = as_tilted(view)
    params = tv.member
    if classify(params) is not CaseTag.COMPOUND_POISSON_GAMMA or not params.a < 0:
        raise RegimeError("the convolution series needs gamma < 0 and a_tilde < 0")
    q = gview.q if gview is not None else -params.a / (1.0 - params.a)
    if not 0 < tolerance < 1:
        raise InputError("tolerance must lie in (0, 1)")
    N = max(1, int(math.ceil(math.log(tolerance) / math.log(q))))
    n = np.arange(1, N + 1)
    shapes = n * params.gamma_bar
    scale = abs(params.c)
    y = float(x) if params.c > 0 else -float(x)
    weights = (1.0 - q) * q**n
    if params.c > 0:
        head = (1.0 - q) if y >= 0 else 0.0
        terms = special.gammainc(shapes, y / scale) if y > 0 else np.zeros(N)
        return float(head + np.sum(weights * terms))
    # jumps are negative: P(-G <= x) = P(G >= -x)
    head = (1.0 - q) if float(x) >= 0 else 0.0
    terms = special.gammaincc(shapes, y / scale) if y > 0 else np.ones(N)
    return float(head + np.sum(weights * terms))

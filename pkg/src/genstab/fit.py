"""Data ingestion, moment initialization and maximum likelihood.

The free parameters are the effective triple ``(gamma, a, c)`` of a tilted
member; ``(gamma, A, c, theta)`` is not identifiable.  Because tilting moves
within the family, the likelihood is stationary in the tilt direction only
where the fitted mean equals the sample mean, ``a gamma c = mean(x)``.  The
optimizer therefore searches over ``(gamma, log|c|)`` with ``a`` solved from
that equation, and the result is then checked for local optimality in all
three transformed coordinates.

Per regime the transformed shape coordinate is ``log(-gamma)`` (gamma < 0),
``logit(gamma)`` (0 < gamma < 1) or ``logit(gamma - 1)`` (1 < gamma < 2).  The
Gaussian boundary ``gamma = 2`` is fitted in closed form.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize, special, stats
from scipy.interpolate import CubicSpline

from .errors import (
    ConvergenceError,
    FallbackToGridError,
    InputError,
    InsufficientDataError,
    ParseError,
    PreconditionError,
    RegimeError,
    SupportError,
)
from .family import CaseTag, FamilyParams, classify, cumulant, validate
from .inversion import compound_poisson_logpdf, pdf_fft, pdf_grid, tilted_stable_logpdf

__all__ = [
    "FitResult",
    "FitOptions",
    "ProjectionWarning",
    "ingest",
    "mom_init",
    "loglik",
    "mle_fit",
    "profile_gamma",
]

MIN_ROWS = 10
# series terms allowed per compound-Poisson likelihood evaluation; beyond this
# (huge Poisson rates) the likelihood is treated as unavailable
SERIES_TERMS = 1e4


class ProjectionWarning(UserWarning):
    """Moment estimates fell outside every valid regime and were projected."""


@dataclass
class FitResult:
    params: FamilyParams
    loglik: float
    converged: bool
    n_evals: int
    stderr: np.ndarray
    case: CaseTag
    message: str = ""
    trace: list = field(default_factory=list, repr=False)


@dataclass(frozen=True)
class FitOptions:
    regimes: Optional[Sequence[CaseTag]] = None
    max_restarts: int = 4
    xatol: float = 1e-9
    fatol: float = 1e-9
    maxiter: int = 3000
    perturbation: float = 1e-4
    improvement_tol: float = 1e-8


# --------------------------------------------------------------------------
# ingestion


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def ingest(path: str, column=0) -> np.ndarray:
    """Read one numeric column from a plain or comma-separated text file.

    ``column`` is a 0-based index or a header name.  A first row whose
    selected field is not numeric is taken as the header.  Blank lines are
    skipped; any other non-numeric or non-finite value raises
    :class:`ParseError` with its 1-based line number.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(i + 1, row) for i, row in enumerate(csv.reader(fh)) if row and any(f.strip() for f in row)]
    if not rows:
        raise InsufficientDataError(f"{path}: no data rows")
    first_line, first = rows[0]
    header = None
    if isinstance(column, str) and not column.lstrip("-").isdigit():
        header = [f.strip() for f in first]
        if column not in header:
            raise ParseError(f"{path}: column {column!r} not in header {header}", first_line)
        idx = header.index(column)
        rows = rows[1:]
    else:
        idx = int(column)
        if idx < len(first) and not _is_number(first[idx].strip()):
            rows = rows[1:]
    values = []
    for line, row in rows:
        if idx >= len(row):
            raise ParseError(f"{path}:{line}: missing column {idx}", line)
        text = row[idx].strip()
        try:
            v = float(text)
        except ValueError:
            raise ParseError(f"{path}:{line}: not a number: {text!r}", line) from None
        if not math.isfinite(v):
            raise ParseError(f"{path}:{line}: non-finite value {text!r}", line)
        values.append(v)
    if len(values) < MIN_ROWS:
        raise InsufficientDataError(f"{path}: {len(values)} values, need at least {MIN_ROWS}")
    return np.asarray(values, dtype=float)


# --------------------------------------------------------------------------
# moments


def _from_cumulants(k1: float, k2: float, k3: float) -> FamilyParams:
    if not k2 > 0:
        raise PreconditionError("need a positive second cumulant")
    if k1 == 0:
        raise PreconditionError("need a nonzero mean (the family has mean a gamma c)")
    r = k1 * k3 / (k2 * k2)
    if abs(r - 1.0) < 1e-8:
        raise FallbackToGridError("k1 k3 / k2^2 is 1: gamma is unbounded; profile over a gamma grid instead")
    g = (r - 2.0) / (r - 1.0)
    if g > 2.0 or g == 0.0:
        warnings.warn(f"moment shape {g:.6g} has no valid member; projected to the Gaussian gamma = 2",
                      ProjectionWarning, stacklevel=3)
        g = 2.0
    if g == 1.0:
        raise FallbackToGridError("moment shape is exactly 1 (point mass) with positive variance")
    c = -k2 / (k1 * (g - 1.0))
    a = k1 / (g * c)
    return FamilyParams(g, a, c)


def mom_init(data) -> FamilyParams:
    """Method-of-moments member from the k-statistics ``k1, k2, k3``.

    With ``r = k1 k3 / k2^2 = (gamma - 2) / (gamma - 1)`` the shape is
    ``(r - 2) / (r - 1)``, then ``c = -k2 / (k1 (gamma - 1))`` and
    ``a = k1 / (gamma c)``.  A positive ``k2`` always gives the valid sign of
    ``a``; a shape above 2 is projected onto the Gaussian with a
    :class:`ProjectionWarning`.
    """
    x = np.asarray(data, dtype=float)
    if x.size < 3:
        raise InsufficientDataError("need at least 3 values for third-order moments")
    k1, k2, k3 = (float(stats.kstat(x, n)) for n in (1, 2, 3))
    return _from_cumulants(k1, k2, k3)


# --------------------------------------------------------------------------
# likelihood


def _support_ok(case: CaseTag, sign_c: float, x: np.ndarray) -> bool:
    if case is CaseTag.COMPOUND_POISSON_GAMMA:
        return bool(np.all(sign_c * x >= 0))
    if case is CaseTag.TILTED_POSITIVE_STABLE:
        return bool(np.all(sign_c * x > 0))
    return True


def loglik(member: FamilyParams, data) -> float:
    """Log-likelihood; zeros of a compound-Poisson member score ``log P(X=0) = a``."""
    x = np.asarray(data, dtype=float)
    report = validate(member)
    if not report.is_valid_chf:
        return -math.inf
    case = classify(member)
    if case is CaseTag.DEGENERATE:
        return 0.0 if np.all(x == member.a * member.c) else -math.inf
    if not _support_ok(case, math.copysign(1.0, member.c), x):
        return -math.inf
    if case is CaseTag.GAUSSIAN:
        return float(np.sum(stats.norm.logpdf(x, cumulant(member, 1), math.sqrt(cumulant(member, 2)))))
    if case is CaseTag.COMPOUND_POISSON_GAMMA:
        zeros = x == 0
        total = member.a * np.count_nonzero(zeros)
        if np.any(~zeros):
            total += float(np.sum(compound_poisson_logpdf(member, x[~zeros], max_terms=SERIES_TERMS)))
        return float(total)
    if case is CaseTag.TILTED_POSITIVE_STABLE:
        return float(np.sum(tilted_stable_logpdf(member, x)))
    pdf = _pdf_many(member, x)
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(np.maximum(pdf, 1e-300))))


def _pdf_many(member: FamilyParams, x: np.ndarray) -> np.ndarray:
    """Density at many points: direct trapezoid sums for small samples, a
    cubic spline through the FFT grid otherwise."""
    if x.size <= 256:
        return pdf_grid(member, x, fallback=False)
    grid, pdf = pdf_fft(member)
    out = np.zeros(x.shape)
    inside = (x >= grid[0]) & (x <= grid[-1])
    if np.any(inside):
        i0 = max(int(np.searchsorted(grid, x[inside].min())) - 3, 0)
        i1 = min(int(np.searchsorted(grid, x[inside].max())) + 4, grid.size)
        out[inside] = CubicSpline(grid[i0:i1], pdf[i0:i1])(x[inside])
    return np.maximum(out, 0.0)


def _safe_loglik(member: FamilyParams, x: np.ndarray) -> float:
    """:func:`loglik` with numerical failures scored as ``-inf`` (for optimizers)."""
    try:
        return loglik(member, x)
    except (ArithmeticError, ValueError):
        return -math.inf


def _gaussian_fit(x: np.ndarray) -> FamilyParams:
    mean = float(np.mean(x))
    var = float(np.var(x))
    if mean == 0.0:
        raise RegimeError("a zero mean has no Gaussian member (mean = 2 a c, variance = -2 a c^2)")
    c = -var / mean
    return FamilyParams(2.0, -mean * mean / (2.0 * var), c)


# shape transforms per regime: (to shape, from shape)
_SHAPE_MAPS = {
    CaseTag.COMPOUND_POISSON_GAMMA: (lambda u: -math.exp(u), lambda g: math.log(-g)),
    CaseTag.TILTED_POSITIVE_STABLE: (lambda u: float(special.expit(u)), lambda g: float(special.logit(g))),
    CaseTag.TILTED_EXTREME_STABLE: (lambda u: 1.0 + float(special.expit(u)), lambda g: float(special.logit(g - 1.0))),
}

_DEFAULT_SHAPE = {
    CaseTag.COMPOUND_POISSON_GAMMA: -1.0,
    CaseTag.TILTED_POSITIVE_STABLE: 0.5,
    CaseTag.TILTED_EXTREME_STABLE: 1.5,
}


def _c_sign(case: CaseTag, mean: float) -> float:
    """Sign of ``c`` that gives the valid sign of ``a = mean / (gamma c)``."""
    s = math.copysign(1.0, mean)
    return s if case in (CaseTag.COMPOUND_POISSON_GAMMA, CaseTag.TILTED_POSITIVE_STABLE) else -s


def _member_on_mean(case: CaseTag, gamma: float, log_abs_c: float, mean: float) -> FamilyParams:
    c = _c_sign(case, mean) * math.exp(log_abs_c)
    return FamilyParams(gamma, mean / (gamma * c), c)


def _coords3(case: CaseTag, m: FamilyParams) -> np.ndarray:
    return np.array([_SHAPE_MAPS[case][1](m.gamma), math.log(abs(m.a)), math.log(abs(m.c))])


def _from_coords3(case: CaseTag, u: np.ndarray, sign_a: float, sign_c: float) -> FamilyParams:
    return FamilyParams(_SHAPE_MAPS[case][0](u[0]), sign_a * math.exp(u[1]), sign_c * math.exp(u[2]))


# interior shape grids used to choose the regime before the simplex search
PROFILE_GRIDS = {
    CaseTag.COMPOUND_POISSON_GAMMA: (-3.0, -1.0, -0.3, -0.1),
    CaseTag.TILTED_POSITIVE_STABLE: (0.2, 0.35, 0.5, 0.65, 0.8),
    CaseTag.TILTED_EXTREME_STABLE: (1.2, 1.4, 1.6, 1.8),
    CaseTag.GAUSSIAN: (2.0,),
}


def _variance_log_c(x: np.ndarray, gamma: float) -> float:
    """``log|c|`` from the variance equation ``k2 = -k1 (gamma - 1) c``."""
    mean, var = float(np.mean(x)), float(np.var(x, ddof=1))
    return math.log(abs(var / (mean * (1.0 - gamma))))


def _profile_point(case: CaseTag, gamma: float, x: np.ndarray):
    """Best ``(loglik, log|c|)`` at a fixed shape, ``a`` from the mean equation."""
    mean = float(np.mean(x))
    lc0 = _variance_log_c(x, gamma)

    def negll(lc):
        try:
            member = _member_on_mean(case, gamma, lc, mean)
        except (ArithmeticError, ValueError):
            return math.inf
        v = _safe_loglik(member, x)
        return -v if math.isfinite(v) else math.inf

    res = optimize.minimize_scalar(negll, bounds=(lc0 - 8.0, lc0 + 8.0), method="bounded",
                                   options={"xatol": 1e-8})
    return -float(res.fun), float(res.x)


def _fit_regime(case: CaseTag, x: np.ndarray, start: np.ndarray, opts: FitOptions) -> FitResult:
    """Simplex search over ``(shape coordinate, log|c|)`` from ``start``,
    restarted until no +-perturbation of the three transformed coordinates
    improves the likelihood."""
    mean = float(np.mean(x))
    to_shape, from_shape = _SHAPE_MAPS[case]
    trace = []
    n_evals = 0

    def negll(v):
        nonlocal n_evals
        n_evals += 1
        try:
            g = to_shape(v[0])
            if not (math.isfinite(g) and g != 0.0 and classify(FamilyParams(g, 1.0, 1.0)) is case):
                return math.inf
            member = _member_on_mean(case, g, v[1], mean)
        except (ArithmeticError, ValueError):
            return math.inf
        value = _safe_loglik(member, x)
        return -value if math.isfinite(value) else math.inf

    best_v, best_f = np.asarray(start, dtype=float), negll(start)
    spread = 0.25
    status = "not started"
    for attempt in range(opts.max_restarts + 1):
        simplex = np.array([best_v, best_v + [spread, 0.0], best_v + [0.0, spread]])
        res = optimize.minimize(
            negll, best_v, method="Nelder-Mead",
            options={"xatol": opts.xatol, "fatol": opts.fatol, "maxiter": opts.maxiter,
                     "initial_simplex": simplex},
        )
        if res.fun <= best_f:
            best_v, best_f = np.asarray(res.x), float(res.fun)
        trace.append((attempt, best_v.tolist(), -best_f))
        if not math.isfinite(best_f):
            status = "no finite likelihood"
            break
        member = _member_on_mean(case, to_shape(best_v[0]), best_v[1], mean)
        status, better = _local_check(case, member, x, opts)
        if status != "improvable":
            break
        best_v = np.array([from_shape(better.gamma), math.log(abs(better.c))])
        best_f = negll(best_v)
        spread = 1e-2
    if not math.isfinite(best_f):
        return FitResult(FamilyParams(_DEFAULT_SHAPE[case], 1.0, 1.0), -math.inf, False, n_evals,
                         np.full(3, np.nan), case, f"no finite likelihood in regime {case.letter}", trace)
    member = _member_on_mean(case, to_shape(best_v[0]), best_v[1], mean)
    converged = status == "local maximum"
    message = {
        "local maximum": "converged: no +-perturbation improves the log-likelihood",
        "improvable": "local-optimality check still failing after restarts",
        "unverified": "stopped where neighbouring likelihoods cannot be evaluated (regime boundary)",
    }[status]
    return FitResult(member, -best_f, converged, n_evals, _stderr(member, x, (0, 1, 2)), case, message, trace)


def _local_check(case, member, x, opts: FitOptions):
    """``("local maximum" | "improvable" | "unverified", better neighbour or None)``
    after trying +-perturbation in each of the three transformed coordinates."""
    base = _safe_loglik(member, x)
    u = _coords3(case, member)
    sa, sc = math.copysign(1.0, member.a), math.copysign(1.0, member.c)
    best, best_val = None, base + opts.improvement_tol
    unverified = False
    for i in range(3):
        for step in (opts.perturbation, -opts.perturbation):
            v = u.copy()
            v[i] += step
            cand = _from_coords3(case, v, sa, sc)
            if classify(cand) is not case:
                unverified = True
                continue
            val = _safe_loglik(cand, x)
            if not math.isfinite(val):
                unverified = True
            elif val > best_val:
                best, best_val = cand, val
    if best is not None:
        return "improvable", best
    return ("unverified" if unverified else "local maximum"), None


def _stderr(member: FamilyParams, x: np.ndarray, free: Sequence[int]) -> np.ndarray:
    """Asymptotic standard errors from a central-difference Hessian in
    ``(gamma, a, c)``; entries outside ``free`` are NaN."""
    p0 = np.array([member.gamma, member.a, member.c])
    out = np.full(3, np.nan)
    free = list(free)
    h = 1e-4 * np.maximum(np.abs(p0), 1e-3)

    def f(p):
        try:
            value = _safe_loglik(FamilyParams(*p), x)
        except InputError:
            return math.nan
        return value if math.isfinite(value) else math.nan

    k = len(free)
    H = np.zeros((k, k))
    f0 = f(p0)
    for a in range(k):
        for b in range(a, k):
            i, j = free[a], free[b]
            if i == j:
                e = np.zeros(3)
                e[i] = h[i]
                H[a, a] = (f(p0 + e) - 2 * f0 + f(p0 - e)) / h[i] ** 2
            else:
                ei, ej = np.zeros(3), np.zeros(3)
                ei[i], ej[j] = h[i], h[j]
                H[a, b] = H[b, a] = (
                    f(p0 + ei + ej) - f(p0 + ei - ej) - f(p0 - ei + ej) + f(p0 - ei - ej)
                ) / (4 * h[i] * h[j])
    if not np.all(np.isfinite(H)):
        return out
    try:
        cov = np.linalg.inv(-H)
    except np.linalg.LinAlgError:
        return out
    d = np.diag(cov)
    out[free] = np.where(d > 0, np.sqrt(np.abs(d)), np.nan)
    return out


def _candidate_regimes(x: np.ndarray, opts: FitOptions) -> list:
    mean = float(np.mean(x))
    wanted = list(opts.regimes) if opts.regimes is not None else list(PROFILE_GRIDS)
    return [case for case in wanted if case in PROFILE_GRIDS and _support_ok(case, _c_sign(case, mean), x)]


def mle_fit(data, init: Optional[FamilyParams] = None, options: Optional[FitOptions] = None) -> FitResult:
    """Maximum-likelihood member for i.i.d. ``data``.

    The regime is chosen by profiling the likelihood over interior shape
    grids of every regime whose support contains the data (plus the shape of
    ``init`` or of the moment estimate); the simplex search then runs in that
    regime from the best profile cell.  If the Gaussian boundary wins the
    profile, or the interior fit does not beat it, the closed-form Gaussian
    fit is returned.  Constant data give the point mass ``(1, v, 1)``.
    """
    opts = options or FitOptions()
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        raise InsufficientDataError("no data")
    if not np.all(np.isfinite(x)):
        raise InputError("data must be finite")
    if np.all(x == x[0]):
        return FitResult(FamilyParams.degenerate(float(x[0])), 0.0, True, 0, np.full(3, np.nan),
                         CaseTag.DEGENERATE, "constant data: point mass")
    if float(np.mean(x)) == 0.0:
        raise RegimeError("data with zero mean cannot be fitted: every member has mean a gamma c != 0")
    if init is not None:
        report = validate(init)
        if not report.is_valid_chf:
            raise InputError(f"initial member is invalid:\n{report}")
        if not _support_ok(classify(init), math.copysign(1.0, init.c), x):
            raise SupportError(f"data fall outside the support of the initial member {init}")
    else:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ProjectionWarning)
                init = mom_init(x)
        except (FallbackToGridError, PreconditionError):
            init = None

    candidates = _candidate_regimes(x, opts)
    if not candidates:
        raise SupportError("no requested regime has a support containing the data")

    cells = []  # (loglik, case, gamma, log|c|)
    for case in candidates:
        shapes = list(PROFILE_GRIDS[case])
        if init is not None and classify(init) is case and init.gamma not in shapes:
            shapes.append(init.gamma)
        for g in shapes:
            if case is CaseTag.GAUSSIAN:
                cells.append((_safe_loglik(_gaussian_fit(x), x), case, 2.0, math.nan))
            else:
                ll, lc = _profile_point(case, g, x)
                cells.append((ll, case, g, lc))
    profile_evals = len(cells)
    best_ll, best_case, best_g, best_lc = max(cells, key=lambda cell: cell[0])
    if not math.isfinite(best_ll):
        raise ConvergenceError("no regime produced a finite likelihood", cells)

    gauss = None
    if CaseTag.GAUSSIAN in candidates:
        m = _gaussian_fit(x)
        gauss = FitResult(m, _safe_loglik(m, x), True, 1, _stderr(m, x, (1, 2)), CaseTag.GAUSSIAN,
                          "closed-form Gaussian fit")
    if best_case is CaseTag.GAUSSIAN:
        gauss.n_evals = profile_evals
        return gauss

    start = np.array([_SHAPE_MAPS[best_case][1](best_g), best_lc])
    result = _fit_regime(best_case, x, start, opts)
    result.trace = [("profile", cells)] + result.trace
    result.n_evals += profile_evals
    if gauss is not None and result.loglik <= gauss.loglik + opts.improvement_tol:
        gauss.n_evals = result.n_evals
        return gauss
    return result


def profile_gamma(data, gamma_grid) -> np.ndarray:
    """Rows ``(gamma, max loglik)``: for each shape the mean equation fixes
    ``a`` and the likelihood is maximized over ``log|c|``.  ``gamma = 2`` is
    the closed-form Gaussian; ``gamma = 1`` scores ``-inf`` unless the data
    are constant."""
    x = np.asarray(data, dtype=float)
    mean = float(np.mean(x))
    out = []
    for g in np.atleast_1d(np.asarray(gamma_grid, dtype=float)):
        g = float(g)
        if not -10.0 < g <= 2.0:
            raise InputError(f"profile shapes must lie in (-10, 2], got {g}")
        case = classify(FamilyParams(g, 1.0, 1.0))
        if case is CaseTag.DEGENERATE:
            out.append((g, 0.0 if np.all(x == x[0]) else -math.inf))
        elif case is CaseTag.GAUSSIAN:
            out.append((g, _safe_loglik(_gaussian_fit(x), x)))
        elif mean == 0.0 or not _support_ok(case, _c_sign(case, mean), x):
            out.append((g, -math.inf))
        else:
            out.append((g, _profile_point(case, g, x)[0]))
    return np.array(out, dtype=float)

"""Complex evaluation of the log-chf, chf, tilted and geometric chfs.

All complex powers are principal powers of bases with positive real part;
the strip check in :func:`log_chf` and the tilt domain guarantee that, so
no branch tracking is needed anywhere.

The residual functions return absolute maxima over a grid; they are the
numerical counterparts of the tilting identity, the generalized stability
relation, the log-form balance equation and the Gaussian-mixture identity
for ``1 < gamma < 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    InputError,
    InvalidMemberError,
    NumericalError,
    PreconditionError,
    RegimeError,
    StripViolationError,
    SymmetryError,
)
from .family import (
    CaseTag,
    FamilyParams,
    GeometricView,
    TiltedView,
    as_tilted,
    classify,
    tilt,
    validate,
)

__all__ = [
    "GridSpec",
    "SubordinationSpec",
    "ProbeReport",
    "log_chf",
    "chf",
    "chf_tilted",
    "chf_geometric",
    "raw_chf",
    "member_chf",
    "stability_residual",
    "tilt_residual",
    "balance_residual",
    "mixture_residual",
    "magnitude_check",
    "bochner_check",
    "probe",
]


@dataclass(frozen=True)
class GridSpec:
    t_min: float
    t_max: float
    n_points: int

    def __post_init__(self):
        if not self.t_min < self.t_max:
            raise InputError("GridSpec needs t_min < t_max")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise InputError("GridSpec needs an integer n_points >= 2")

    def points(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, int(self.n_points))


@dataclass(frozen=True)
class SubordinationSpec:
    """Gaussian-mixture reading of a ``1 < gamma < 2`` member with ``c < 0``.

    The member chf equals ``exp(laplace_exponent(-psi(t)))`` where ``psi`` is
    the log-chf of a Normal(2, 2 * (-c)) law.
    """

    params: FamilyParams

    def __post_init__(self):
        if not self.params.c < 0:
            raise PreconditionError("the Gaussian mixture needs c < 0 (positive variance 2*(-c))")

    @property
    def gaussian_mean(self) -> float:
        return 2.0

    @property
    def gaussian_variance(self) -> float:
        return -2.0 * self.params.c

    def laplace_exponent(self, u):
        p = self.params
        base = 1.0 + p.c * np.asarray(u, dtype=complex)
        return -p.a * np.expm1(p.gamma_half * np.log(base))

    def characteristic_exponent(self, t):
        t = np.asarray(t, dtype=float)
        return 2j * t - 0.5 * self.gaussian_variance * t * t


def log_chf(params: FamilyParams, z):
    """``g(z) = a [1 - (1 - i z c) ** gamma]`` on the strip ``Re(1 - i z c) > 0``."""
    classify(params)
    z = np.asarray(z, dtype=complex)
    base = 1.0 - 1j * z * params.c
    if np.any(~(base.real > 0)):
        raise StripViolationError(
            "argument outside the analyticity strip: need Im(z) > -1/c "
            f"(boundary line Im(z) = {-1.0 / params.c!r})"
        )
    g = -params.a * np.expm1(params.gamma * np.log(base))
    if g.ndim == 0:
        return complex(g)
    return g


def raw_chf(params: FamilyParams, t):
    """``exp(g(t))`` for real ``t`` without the validity gate."""
    g = log_chf(params, np.asarray(t, dtype=float))
    with np.errstate(over="ignore"):
        return np.exp(g)


def _require_valid(params: FamilyParams):
    report = validate(params)
    if not report.is_valid_chf:
        raise InvalidMemberError(
            f"(gamma={params.gamma}, a={params.a}, c={params.c}) is not a characteristic function:\n{report}",
            report,
        )
    return report


def chf(params: FamilyParams, t):
    _require_valid(params)
    return np.exp(log_chf(params, np.asarray(t, dtype=float)))


def chf_tilted(view: TiltedView, t):
    return chf(view.member, t)


def _geometric_value(params: FamilyParams, t):
    g = log_chf(params, np.asarray(t, dtype=float))
    denom = 1.0 - g
    if np.any(np.abs(denom) < 1e-300):
        raise NumericalError("1 - log f(t) vanishes; geometric chf overflows")
    return 1.0 / denom


def chf_geometric(view, t):
    """Geometric extension ``1 / (1 - log f(t))`` of a (tilted) member.

    Members with ``gamma > 2`` are evaluated without a validity gate; whether
    the result is a chf is for :func:`bochner_check` to decide.
    """
    tv = as_tilted(view)
    member = tv.member
    if classify(member) is not CaseTag.GEOMETRIC_ONLY:
        _require_valid(member)
    return _geometric_value(member, t)


def member_chf(member) -> Callable:
    """Validated chf callable for a plain, tilted or geometric member."""
    if isinstance(member, GeometricView):
        return lambda t: chf_geometric(member, t)
    params = as_tilted(member).member
    _require_valid(params)
    return lambda t: np.exp(log_chf(params, np.asarray(t, dtype=float)))


def stability_residual(params: FamilyParams, theta: float, grid: GridSpec) -> float:
    """``max |f_theta(t) - f(beta t) ** alpha|`` over the grid."""
    view = tilt(params, theta)
    t = grid.points()
    lhs = np.exp(log_chf(view.member, t))
    rhs = np.exp(view.alpha * log_chf(params, view.beta * t))
    return float(np.max(np.abs(lhs - rhs)))


def tilt_residual(params: FamilyParams, theta: float, grid: GridSpec) -> float:
    """``max |f_theta(t) - f(t - i theta) / f(-i theta)|`` over the grid."""
    view = tilt(params, theta)
    t = grid.points()
    lhs = np.exp(log_chf(view.member, t))
    rhs = np.exp(log_chf(params, t - 1j * theta) - log_chf(params, -1j * theta))
    return float(np.max(np.abs(lhs - rhs)))


def balance_residual(params: FamilyParams, theta: float, grid: GridSpec) -> float:
    """``max |g(t - i theta) - g(-i theta) - alpha g(beta t)|`` over the grid."""
    view = tilt(params, theta)
    t = grid.points()
    lhs = log_chf(params, t - 1j * theta)
    rhs = log_chf(params, -1j * theta) + view.alpha * log_chf(params, view.beta * t)
    return float(np.max(np.abs(lhs - rhs)))


def mixture_residual(params: FamilyParams, grid: GridSpec) -> float:
    """``max |f(t) - exp(l(-psi(t)))|`` for a ``1 < gamma < 2`` member with ``c < 0``."""
    if classify(params) is not CaseTag.TILTED_EXTREME_STABLE:
        raise RegimeError("the mixture identity is stated for 1 < gamma < 2")
    spec = SubordinationSpec(params)
    t = grid.points()
    lhs = np.exp(log_chf(params, t))
    rhs = np.exp(spec.laplace_exponent(-spec.characteristic_exponent(t)))
    return float(np.max(np.abs(lhs - rhs)))


def magnitude_check(params: FamilyParams, grid: GridSpec) -> float:
    """``max |exp(g(t))|`` over the grid; > 1 rules out a chf."""
    with np.errstate(over="ignore"):
        return float(np.max(np.abs(raw_chf(params, grid.points()))))


_PROBE_SCALES = (1.0, 10.0, 50.0)


def bochner_check(
    phi: Callable,
    n_points: int = 64,
    n_trials: int = 32,
    seed: int = 0,
    scales=_PROBE_SCALES,
    symmetry_tol: float = 1e-10,
) -> float:
    """Smallest eigenvalue of ``[phi(t_i - t_j)]`` over random point sets.

    Each trial draws its half-width ``T`` from ``scales`` and ``n_points``
    uniform points on ``[-T, T]`` from a generator seeded with
    ``SeedSequence([seed, trial])``, so the result does not depend on the
    order or grouping in which trials run.  Non-finite matrix entries give
    ``-inf``.
    """
    if not 1 <= n_points <= 128:
        raise InputError("n_points must be between 1 and 128")
    worst = np.inf
    for trial in range(int(n_trials)):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), trial]))
        T = float(rng.choice(scales))
        pts = rng.uniform(-T, T, size=int(n_points))
        diff = pts[:, None] - pts[None, :]
        with np.errstate(all="ignore"):
            m = np.asarray(phi(diff), dtype=complex)
        if not np.all(np.isfinite(m)):
            return -np.inf
        asym = np.max(np.abs(m - m.conj().T))
        if asym > symmetry_tol * max(1.0, np.max(np.abs(m))):
            raise SymmetryError(f"phi(-t) != conj(phi(t)) (max deviation {asym:.3g})")
        eig = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        worst = min(worst, float(eig[0]))
    return worst


@dataclass(frozen=True)
class ProbeReport:
    min_eigenvalue: float
    max_modulus: float
    verdict: str  # "consistent" or "violated"


def probe(
    phi: Callable,
    n_points: int = 64,
    n_trials: int = 32,
    seed: int = 0,
    eig_tol: float = 1e-6,
    modulus_tol: float = 1e-9,
) -> ProbeReport:
    """Bochner probe plus a modulus scan of ``phi`` on ``[-50, 50]``."""
    min_eig = bochner_check(phi, n_points, n_trials, seed)
    t = np.linspace(-50.0, 50.0, 2001)
    with np.errstate(all="ignore"):
        mod = np.abs(np.asarray(phi(t), dtype=complex))
    max_mod = float(np.max(mod)) if np.all(np.isfinite(mod)) else np.inf
    ok = min_eig >= -eig_tol and max_mod <= 1.0 + modulus_tol
    return ProbeReport(min_eig, max_mod, "consistent" if ok else "violated")

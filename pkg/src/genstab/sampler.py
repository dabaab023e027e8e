"""Random variate generation for every regime and the geometric extension.

Randomness always comes from ``numpy.random.Generator(PCG64)`` seeded with
``SeedSequence([seed, chunk])``: output is cut into fixed chunks of
``CHUNK`` values, each with its own derived stream, so results are
identical whatever the number of workers.

Methods by regime (``c < 0`` members are mirror images of ``c > 0`` ones):

* compound Poisson-gamma: ``N ~ Poisson(-a)``, sum of ``N`` Gamma(-gamma, c)
  jumps drawn in one go as Gamma(N * -gamma, c);
* tilted positive stable: Kanter's positive stable variate scaled by
  ``a ** (1/gamma) c``, accepted with probability ``exp(-x / c)``, for
  ``a <= 13``; larger ``a`` uses an inverse-cdf table;
* point mass: constant ``a c``;
* tilted extreme stable: inverse-cdf table from Fourier inversion;
* Gaussian: Normal(kappa1, kappa2).

The geometric extension uses ``omega(t) = E[f(t) ** T]`` with ``T ~ Exp(1)``:
draw ``T`` and then one variate of the member with ``a`` replaced by ``a T``.
Tilted positive stable draws there are sums of ``ceil(a T)`` independent
pieces, each accepted with probability at least ``exp(-1)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .chf import GridSpec
from .errors import EfficiencyError, InputError, InvalidMemberError, RegimeError
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
from .inversion import cdf_grid, quantile

__all__ = [
    "SampleBatch",
    "sample",
    "sample_positive_stable",
    "sample_tilted_stable",
    "sample_geometric",
    "sample_geometric_compound",
    "empirical_chf",
    "ks_statistic",
    "inverse_cdf_table",
    "CHUNK",
]

CHUNK = 1 << 16
REJECTION_MAX_A = 13.0
MIN_ACCEPTANCE = 1e-6
TABLE_KNOTS = 2048
TABLE_TAIL = 1e-5


@dataclass
class SampleBatch:
    values: np.ndarray
    member: object
    seed: int
    method: str
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return self.values.size


def _streams(seed: int, n: int):
    """(chunk index, size) pairs covering ``n`` draws."""
    out = []
    for k, start in enumerate(range(0, n, CHUNK)):
        out.append((k, min(CHUNK, n - start)))
    return out


def _rng(seed: int, chunk: int, salt: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(chunk), int(salt)]))


def _run_chunks(draw: Callable, n: int, seed: int, workers: int):
    """Run ``draw(rng, size)`` on every chunk and concatenate in order."""
    jobs = _streams(seed, n)
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: draw(_rng(seed, job[0]), job[1]), jobs))
    else:
        parts = [draw(_rng(seed, k), size) for k, size in jobs]
    values = np.concatenate([p[0] for p in parts]) if parts else np.empty(0)
    stats = [p[1] for p in parts]
    return values, stats


# --------------------------------------------------------------------------
# primitives


def _kanter(gamma: float, rng: np.random.Generator, size) -> np.ndarray:
    """Standard positive stable variates with Laplace transform exp(-s**gamma)."""
    u = rng.uniform(0.0, math.pi, size)
    e = rng.standard_exponential(size)
    a = np.sin(gamma * u) / np.sin(u) ** (1.0 / gamma)
    b = (np.sin((1.0 - gamma) * u) / e) ** ((1.0 - gamma) / gamma)
    return a * b


def _tilted_stable_core(gamma: float, a: np.ndarray, scale: float, rng: np.random.Generator):
    """One accepted draw per entry of ``a`` (all entries > 0).

    Returns the values and the total number of proposals.
    """
    out = np.empty(a.shape)
    pending = np.arange(a.size)
    proposals = 0
    factor = a ** (1.0 / gamma) * scale
    while pending.size:
        x = factor[pending] * _kanter(gamma, rng, pending.size)
        proposals += pending.size
        accept = rng.uniform(size=pending.size) < np.exp(-x / scale)
        out[pending[accept]] = x[accept]
        pending = pending[~accept]
    return out, proposals


def _split_divisible(gamma: float, a: np.ndarray, scale: float, rng, max_piece: float):
    """Tilted stable draws for arbitrary ``a`` as sums of pieces with a <= max_piece."""
    pieces = np.maximum(1, np.ceil(a / max_piece)).astype(np.int64)
    owner = np.repeat(np.arange(a.size), pieces)
    vals, proposals = _tilted_stable_core(gamma, (a / pieces)[owner], scale, rng)
    return np.bincount(owner, weights=vals, minlength=a.size), proposals


def _cp_gamma(rate: np.ndarray, shape: float, scale: float, rng) -> np.ndarray:
    n = rng.poisson(rate)
    out = np.zeros(n.shape)
    hit = n > 0
    out[hit] = rng.gamma(n[hit] * shape, scale)
    return out


# --------------------------------------------------------------------------
# public samplers


def sample_positive_stable(gamma: float, n: int, seed: int, workers: int = 1) -> SampleBatch:
    if not 0.0 < gamma < 1.0:
        raise InputError("positive stable index must lie in (0, 1)")
    values, _ = _run_chunks(lambda rng, size: (_kanter(gamma, rng, size), None), int(n), seed, workers)
    return SampleBatch(values, ("positive_stable", gamma), seed, "kanter")


def sample_tilted_stable(member, n: int, seed: int, workers: int = 1) -> SampleBatch:
    """Exponentially tilted positive stable law by rejection.

    Proposal ``a ** (1/gamma) |c| S`` with ``S`` standard positive stable,
    accepted with probability ``exp(-x / |c|)``; overall acceptance is
    ``exp(-a)``.
    """
    params = as_tilted(member).member
    if classify(params) is not CaseTag.TILTED_POSITIVE_STABLE:
        raise RegimeError("tilted stable sampling needs 0 < gamma < 1")
    if not params.a > 0:
        raise InvalidMemberError("tilted positive stable members need a > 0", validate(params))
    if math.exp(-params.a) < MIN_ACCEPTANCE:
        raise EfficiencyError(
            f"acceptance rate exp(-a) = {math.exp(-params.a):.3g} is below {MIN_ACCEPTANCE}; "
            "use sample() (divisible splitting) or the inversion tables instead"
        )
    scale = abs(params.c)
    sign = math.copysign(1.0, params.c)

    def draw(rng, size):
        vals, proposals = _tilted_stable_core(params.gamma, np.full(size, params.a), scale, rng)
        return sign * vals, proposals

    values, proposals = _run_chunks(draw, int(n), seed, workers)
    total = int(sum(proposals))
    return SampleBatch(
        values, member, seed, "tilted-stable-rejection",
        {"proposals": total, "acceptance_rate": values.size / total if total else float("nan")},
    )


def sample(member, n: int, seed: int = 0, workers: int = 1) -> SampleBatch:
    if isinstance(member, GeometricView):
        return sample_geometric(member, n, seed, workers)
    params = as_tilted(member).member
    report = validate(params)
    if not report.is_valid_chf:
        raise InvalidMemberError(f"cannot sample an invalid member:\n{report}", report)
    if int(n) < 1:
        raise InputError("n must be at least 1")
    n = int(n)
    case = classify(params)
    sign = math.copysign(1.0, params.c)
    scale = abs(params.c)

    if case is CaseTag.DEGENERATE:
        return SampleBatch(np.full(n, params.a * params.c), member, seed, "constant")

    if case is CaseTag.COMPOUND_POISSON_GAMMA:
        def draw(rng, size):
            return sign * _cp_gamma(np.full(size, -params.a), params.gamma_bar, scale, rng), None

        values, _ = _run_chunks(draw, n, seed, workers)
        return SampleBatch(values, member, seed, "compound-poisson-gamma")

    if case is CaseTag.TILTED_POSITIVE_STABLE and params.a <= REJECTION_MAX_A:
        batch = sample_tilted_stable(params, n, seed, workers)
        batch.member = member
        return batch

    if case is CaseTag.GAUSSIAN:
        mean, var = cumulant(params, 1), cumulant(params, 2)

        def draw(rng, size):
            return mean + math.sqrt(var) * rng.standard_normal(size), None

        values, _ = _run_chunks(draw, n, seed, workers)
        return SampleBatch(values, member, seed, "gaussian")

    # tilted extreme stable, or tilted positive stable beyond the rejection range
    table = inverse_cdf_table(params)
    values, _ = _run_chunks(lambda rng, size: (table.draw(rng, size), None), n, seed, workers)
    return SampleBatch(values, member, seed, "inverse-cdf-table", {"table_max_error": table.max_error})


def sample_geometric(gview: GeometricView, n: int, seed: int = 0, workers: int = 1) -> SampleBatch:
    """Geometric extension via ``T ~ Exp(1)`` and the member ``(gamma, a T, c)``."""
    if not isinstance(gview, GeometricView):
        raise InputError("sample_geometric needs a GeometricView")
    params = gview.member
    case = classify(params)
    if case is CaseTag.GEOMETRIC_ONLY:
        raise InvalidMemberError(
            "no sampler for gamma > 2: its geometric extension is only probed, not constructed"
        )
    report = validate(params)
    if not report.is_valid_chf:
        raise InvalidMemberError(f"base member is invalid:\n{report}", report)
    n = int(n)
    sign = math.copysign(1.0, params.c)
    scale = abs(params.c)
    a = params.a

    if case is CaseTag.TILTED_EXTREME_STABLE:
        table = inverse_cdf_table(gview)
        values, _ = _run_chunks(lambda rng, size: (table.draw(rng, size), None), n, seed, workers)
        return SampleBatch(values, gview, seed, "geometric-inverse-cdf-table", {"table_max_error": table.max_error})

    def draw(rng, size):
        T = rng.standard_exponential(size)
        if case is CaseTag.COMPOUND_POISSON_GAMMA:
            return sign * _cp_gamma(-a * T, params.gamma_bar, scale, rng), None
        if case is CaseTag.DEGENERATE:
            return a * params.c * T, None
        if case is CaseTag.GAUSSIAN:
            mean, var = cumulant(params, 1), cumulant(params, 2)
            return mean * T + np.sqrt(var * T) * rng.standard_normal(size), None
        vals, proposals = _split_divisible(params.gamma, a * T, scale, rng, 1.0)
        return sign * vals, proposals

    values, extra = _run_chunks(draw, n, seed, workers)
    diag = {}
    if case is CaseTag.TILTED_POSITIVE_STABLE:
        diag["proposals"] = int(sum(extra))
    return SampleBatch(values, gview, seed, "geometric-exponential-time", diag)


def sample_geometric_compound(gview: GeometricView, n: int, seed: int = 0, workers: int = 1) -> SampleBatch:
    """Compound-Poisson geometric extension as a geometric sum of gamma jumps.

    ``N`` with ``P(N = k) = (1 - q) q**k`` jumps of Gamma(-gamma, c_theta).
    """
    if not isinstance(gview, GeometricView) or gview.q is None:
        raise RegimeError("geometric-compound construction needs a compound-Poisson geometric view")
    params = gview.member
    sign = math.copysign(1.0, params.c)
    scale = abs(params.c)
    q = gview.q

    def draw(rng, size):
        k = rng.geometric(1.0 - q, size) - 1
        out = np.zeros(size)
        hit = k > 0
        out[hit] = rng.gamma(k[hit] * params.gamma_bar, scale)
        return sign * out, None

    values, _ = _run_chunks(draw, int(n), seed, workers)
    return SampleBatch(values, gview, seed, "geometric-compound")


# --------------------------------------------------------------------------
# inverse-cdf tables


@dataclass(frozen=True)
class InverseCdfTable:
    member: object
    knots_x: np.ndarray
    knots_u: np.ndarray
    max_error: float

    def draw(self, rng, size) -> np.ndarray:
        u = rng.uniform(size=size)
        interp = PchipInterpolator(self.knots_u, self.knots_x)
        out = interp(np.clip(u, self.knots_u[0], self.knots_u[-1]))
        outside = (u < self.knots_u[0]) | (u > self.knots_u[-1])
        for i in np.flatnonzero(outside):
            out[i] = quantile(self.member, float(np.clip(u[i], 2e-9, 1 - 2e-9)))
        return out


@lru_cache(maxsize=16)
def inverse_cdf_table(member, knots: int = TABLE_KNOTS, tail: float = TABLE_TAIL) -> InverseCdfTable:
    """Monotone-cubic inverse of the inverted cdf between its ``tail`` quantiles.

    ``max_error`` is the largest deviation in probability between the
    interpolant and the inverted cdf at knot midpoints (every 16th interval).
    """
    x_lo = quantile(member, tail)
    x_hi = quantile(member, 1.0 - tail)
    xs = np.linspace(x_lo, x_hi, knots)
    us = np.maximum.accumulate(cdf_grid(member, xs))
    keep = np.concatenate([[True], np.diff(us) > 0])
    xs, us = xs[keep], us[keep]
    fwd = PchipInterpolator(xs, us)
    mids = 0.5 * (xs[:-1] + xs[1:])[::16]
    err = float(np.max(np.abs(fwd(mids) - cdf_grid(member, mids))))
    return InverseCdfTable(member, xs, us, err)


# --------------------------------------------------------------------------
# empirical utilities


def empirical_chf(batch, grid) -> np.ndarray:
    """``mean(exp(i t x_j))`` for each grid point ``t``."""
    values = batch.values if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=float)
    t = grid.points() if isinstance(grid, GridSpec) else np.atleast_1d(np.asarray(grid, dtype=float))
    out = np.zeros(t.size, dtype=complex)
    step = max(1, int(2_000_000 // max(t.size, 1)))
    for s in range(0, values.size, step):
        out += np.exp(1j * np.outer(t, values[s:s + step])).sum(axis=1)
    return out / values.size


def ks_statistic(batch, cdf: Callable, atoms: Optional[dict] = None) -> float:
    """Sup distance between the empirical cdf and ``cdf``.

    Both one-sided limits are compared at every distinct sample value; the
    left limit of ``cdf`` at a point in ``atoms`` is ``cdf(v) - atoms[v]``.
    """
    values = batch.values if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=float)
    v, counts = np.unique(values, return_counts=True)
    n = values.size
    right = np.cumsum(counts) / n
    left = right - counts / n
    F = np.asarray(cdf(v), dtype=float)
    F_left = F.copy()
    for point, mass in (atoms or {}).items():
        F_left[v == point] -= mass
    return float(max(np.max(np.abs(right - F)), np.max(np.abs(left - F_left))))

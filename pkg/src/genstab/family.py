"""Parameter model, regime classification, validity rules and tilting algebra.

A member of the family is the triple ``(gamma, a, c)`` whose characteristic
function is ``exp{a * [1 - (1 - i t c) ** gamma]}``.  Exponential tilting by
``theta`` maps a member to another member of the same form with

    B       = 1 - c * theta
    a_tilde = a * B ** gamma
    c_theta = c / B

so every tilted view can be collapsed back into a plain :class:`FamilyParams`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .errors import (
    DomainError,
    IllDefinedShapeError,
    InputError,
    SingularTiltError,
    UndefinedPowerError,
)

__all__ = [
    "CaseTag",
    "FamilyParams",
    "ValidityReport",
    "TiltedView",
    "GeometricView",
    "classify",
    "validate",
    "theta_domain",
    "in_theta_domain",
    "tilt",
    "geometric",
    "cgf",
    "cumulant",
    "tweedie_power",
    "as_params",
]


class CaseTag(enum.Enum):
    """Regime of the shape exponent."""

    COMPOUND_POISSON_GAMMA = "compound_poisson_gamma"  # gamma < 0
    TILTED_POSITIVE_STABLE = "tilted_positive_stable"  # 0 < gamma < 1
    DEGENERATE = "degenerate"  # gamma == 1
    TILTED_EXTREME_STABLE = "tilted_extreme_stable"  # 1 < gamma < 2
    GAUSSIAN = "gaussian"  # gamma == 2
    GEOMETRIC_ONLY = "geometric_only"  # gamma > 2

    @property
    def letter(self) -> str:
        return _CASE_LETTER[self]


_CASE_LETTER = {
    CaseTag.COMPOUND_POISSON_GAMMA: "a",
    CaseTag.TILTED_POSITIVE_STABLE: "b",
    CaseTag.DEGENERATE: "c",
    CaseTag.TILTED_EXTREME_STABLE: "d",
    CaseTag.GAUSSIAN: "e",
    CaseTag.GEOMETRIC_ONLY: "f",
}


@dataclass(frozen=True)
class FamilyParams:
    """One member ``(gamma, a, c)`` of the family.

    ``c`` must be nonzero; a point mass at ``v`` is available through
    :meth:`degenerate`.  ``gamma > 2`` is accepted so that the geometric
    extension can be evaluated, but such members never define a chf.
    """

    gamma: float
    a: float
    c: float

    def __post_init__(self):
        for name in ("gamma", "a", "c"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InputError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.c == 0.0:
            raise InputError("c must be nonzero; use FamilyParams.degenerate() for a point mass")

    @classmethod
    def degenerate(cls, value: float) -> "FamilyParams":
        """Point mass at ``value`` (gamma = 1, a = value, c = 1)."""
        return cls(1.0, value, 1.0)

    @property
    def gamma_bar(self) -> float:
        """Gamma shape of the compound-Poisson jumps, ``-gamma``."""
        return -self.gamma

    @property
    def gamma_half(self) -> float:
        return self.gamma / 2.0

    @property
    def a_bar(self) -> float:
        return -self.a

    @property
    def case(self) -> CaseTag:
        return classify(self)

    def scaled(self, s: float) -> "FamilyParams":
        """Member whose chf is this chf raised to the power ``s`` (s > 0)."""
        if not s > 0:
            raise InputError("scale factor must be positive")
        return FamilyParams(self.gamma, s * self.a, self.c)


@dataclass(frozen=True)
class ValidityReport:
    is_valid_chf: bool
    implemented_condition: str
    paper_claimed_condition: str
    discrepancy_flag: bool
    case: Optional[CaseTag] = None

    def __str__(self) -> str:
        verdict = "valid" if self.is_valid_chf else "INVALID"
        lines = [
            f"member is {verdict} ({self.case.value if self.case else '?'})",
            f"  implemented condition: {self.implemented_condition}",
            f"  originally claimed:    {self.paper_claimed_condition}",
        ]
        if self.discrepancy_flag:
            lines.append(
                "  note: the originally claimed sign a > 0 makes |f(t)| unbounded for "
                "1 < gamma < 2; the implemented rule a < 0 is used"
            )
        return "\n".join(lines)


@dataclass(frozen=True)
class TiltedView:
    """Member tilted by ``theta`` together with its derived quantities."""

    params: FamilyParams
    theta: float
    B: float
    a_tilde: float
    c_theta: float
    alpha: float
    beta: float

    @property
    def member(self) -> FamilyParams:
        """The tilted law as a plain member ``(gamma, a_tilde, c_theta)``."""
        return FamilyParams(self.params.gamma, self.a_tilde, self.c_theta)

    @property
    def case(self) -> CaseTag:
        return classify(self.params)


@dataclass(frozen=True)
class GeometricView:
    """Geometric extension ``omega = 1 / (1 - log f)`` of a tilted member.

    ``q`` is the ratio of the geometric series for compound-Poisson members
    (``None`` otherwise); ``exp_time_construction`` tells whether sampling goes
    through ``omega(t) = E[f(t) ** T]``, ``T ~ Exp(1)``.
    """

    base: TiltedView
    q: Optional[float]
    exp_time_construction: bool

    @property
    def member(self) -> FamilyParams:
        return self.base.member

    @property
    def case(self) -> CaseTag:
        return self.base.case


def classify(params: FamilyParams) -> CaseTag:
    g = params.gamma
    if g == 0.0:
        raise IllDefinedShapeError("gamma = 0 does not define a member of the family")
    if g < 0.0:
        return CaseTag.COMPOUND_POISSON_GAMMA
    if g < 1.0:
        return CaseTag.TILTED_POSITIVE_STABLE
    if g == 1.0:
        return CaseTag.DEGENERATE
    if g < 2.0:
        return CaseTag.TILTED_EXTREME_STABLE
    if g == 2.0:
        return CaseTag.GAUSSIAN
    return CaseTag.GEOMETRIC_ONLY


# (implemented condition, originally claimed condition)
_CONDITIONS = {
    CaseTag.COMPOUND_POISSON_GAMMA: ("a < 0", "a < 0"),
    CaseTag.TILTED_POSITIVE_STABLE: ("a > 0", "a > 0"),
    CaseTag.DEGENERATE: ("always valid (point mass at a*c)", "always valid (point mass at a*c)"),
    CaseTag.TILTED_EXTREME_STABLE: ("a < 0 (any sign of c)", "a > 0 and c < 0"),
    CaseTag.GAUSSIAN: ("a < 0", "a < 0"),
    CaseTag.GEOMETRIC_ONLY: (
        "never a chf (geometric extension only)",
        "never a chf; geometric extension claimed valid for a_tilde > 1",
    ),
}


def validate(params: FamilyParams) -> ValidityReport:
    case = classify(params)
    a = params.a
    if case is CaseTag.TILTED_POSITIVE_STABLE:
        ok = a > 0
    elif case is CaseTag.DEGENERATE:
        ok = True
    elif case is CaseTag.GEOMETRIC_ONLY:
        ok = False
    else:
        ok = a < 0
    implemented, claimed = _CONDITIONS[case]
    return ValidityReport(
        is_valid_chf=ok,
        implemented_condition=implemented,
        paper_claimed_condition=claimed,
        discrepancy_flag=case is CaseTag.TILTED_EXTREME_STABLE,
        case=case,
    )


def theta_domain(params: FamilyParams) -> tuple[float, float]:
    """Open interval of admissible tilts, ``{theta : 1 - c theta > 0}``."""
    if params.c > 0:
        return (-math.inf, 1.0 / params.c)
    return (1.0 / params.c, math.inf)


def in_theta_domain(params: FamilyParams, theta: float) -> bool:
    return 1.0 - params.c * theta > 0.0


def tilt(params: FamilyParams, theta: float) -> TiltedView:
    classify(params)
    theta = float(theta)
    B = 1.0 - params.c * theta
    if not B > 0.0:
        lo, hi = theta_domain(params)
        raise SingularTiltError(
            f"theta = {theta!r} is outside the tilt domain ({lo}, {hi}); "
            f"theta = 1/c = {1.0 / params.c!r} is the singular point"
        )
    if theta == 0.0:
        return TiltedView(params, 0.0, 1.0, params.a, params.c, 1.0, 1.0)
    alpha = B ** params.gamma
    return TiltedView(
        params=params,
        theta=theta,
        B=B,
        a_tilde=params.a * alpha,
        c_theta=params.c / B,
        alpha=alpha,
        beta=1.0 / B,
    )


def as_tilted(member) -> TiltedView:
    if isinstance(member, TiltedView):
        return member
    if isinstance(member, FamilyParams):
        return tilt(member, 0.0)
    if isinstance(member, GeometricView):
        return member.base
    raise TypeError(f"expected FamilyParams, TiltedView or GeometricView, got {type(member).__name__}")


def as_params(member) -> FamilyParams:
    """Collapse any member description to its effective ``FamilyParams``."""
    if isinstance(member, FamilyParams):
        return member
    return as_tilted(member).member


def geometric(member, theta: float = 0.0) -> GeometricView:
    """Geometric extension of ``member`` (optionally tilted by ``theta`` first)."""
    if isinstance(member, GeometricView):
        return member
    if isinstance(member, FamilyParams):
        view = tilt(member, theta)
    elif isinstance(member, TiltedView):
        if theta != 0.0:
            raise InputError("pass either a TiltedView or theta, not both")
        view = member
    else:
        raise TypeError(f"cannot build a geometric view from {type(member).__name__}")
    case = view.case
    q = None
    if case is CaseTag.COMPOUND_POISSON_GAMMA and view.a_tilde < 0:
        q = -view.a_tilde / (1.0 - view.a_tilde)
    exp_time = case in (
        CaseTag.COMPOUND_POISSON_GAMMA,
        CaseTag.TILTED_POSITIVE_STABLE,
        CaseTag.DEGENERATE,
        CaseTag.GAUSSIAN,
    )
    return GeometricView(view, q, exp_time)


def cgf(params: FamilyParams, lam: float) -> float:
    """Cumulant generating function ``m(lam) = a [1 - (1 - lam c) ** gamma]``."""
    classify(params)
    base = 1.0 - lam * params.c
    if not base > 0.0:
        raise DomainError(f"lambda = {lam!r} outside the mgf domain 1 - lambda*c > 0")
    if lam == 0.0:
        return 0.0
    return -params.a * math.expm1(params.gamma * math.log(base))


def cumulant(params: FamilyParams, n: int) -> float:
    """``n``-th cumulant, ``-a (-c)**n gamma (gamma-1) ... (gamma-n+1)``."""
    if int(n) != n or n < 1:
        raise InputError("cumulant order must be a positive integer")
    classify(params)
    falling = 1.0
    for k in range(int(n)):
        falling *= params.gamma - k
    return -params.a * (-params.c) ** int(n) * falling


def tweedie_power(gamma: float) -> float:
    """Tweedie power ``p`` solving ``(p - 1)(1 - gamma) = 1``."""
    if gamma == 1.0:
        raise UndefinedPowerError("gamma = 1 has no Tweedie power (p would be infinite)")
    return 1.0 + 1.0 / (1.0 - gamma)

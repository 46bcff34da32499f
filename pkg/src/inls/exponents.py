"""Exact rational arithmetic for the exponent relations of the weighted NLS.

Every quantity here is an integer, a ``fractions.Fraction``, or the infinity
marker ``INF``.  No floating point enters this module: the admissibility and
criticality relations are rational identities and are checked exactly.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

CRITICAL = "critical"

LAMBDA_SIGNS = ("focusing", "defocusing", "complex")

#: Hypothesis predicates exposed by :func:`hypothesis_report`.
CRITERIA = (
    "subcritical_lwp",        # subcritical local well-posedness
    "critical_lwp",           # critical local well-posedness (model nonlinearity)
    "continuous_dependence",  # critical standard continuous dependence
    "blowup_criterion",       # energy-critical focusing blow-up hypotheses
)


class ExponentError(ValueError):
    """Base error for exponent arithmetic."""


class HypothesisViolation(ExponentError):
    """Raised when a computation is gated on hypotheses that do not hold."""

    def __init__(self, verdict: "Verdict"):
        failed = [c.name for c in verdict.checks if not c.passed]
        super().__init__(
            f"hypotheses of {verdict.criterion} violated: " + "; ".join(failed)
        )
        self.verdict = verdict
        self.failed = failed


class InfeasibleExponents(ExponentError):
    """Raised when an exponent relation has no admissible solution."""


class _Infinity:
    """Marker for an infinite exponent.  Compares above every rational."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "inf"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("exponent-infinity")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True


INF = _Infinity()

Rational = Fraction
RationalLike = Union[int, str, Fraction]
ExtendedRational = Union[Fraction, _Infinity]


def as_rational(value: RationalLike) -> Fraction:
    """Coerce to an exact Fraction.  Floats are rejected: exactness is the
    module contract, and a binary float silently misrepresents most decimals."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rational parameters")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(
        f"exact rational required, got {type(value).__name__}; "
        "pass an int, Fraction, or 'p/q' string"
    )


def fmt(value) -> str:
    """Render a rational or INF the way reports print it."""
    if value is INF:
        return "inf"
    if value is None:
        return "none"
    return str(value)


def is_even_integer(x: Fraction) -> bool:
    return x.denominator == 1 and x.numerator % 2 == 0


@dataclass(frozen=True)
class CriticalityParams:
    """The exact parameter tuple (n, s, b, sigma) plus the coupling character.

    ``sigma`` may be the marker ``"critical"``, in which case the power is
    resolved from (n, s, b); that requires s < n/2.
    """

    n: int
    s: Fraction
    b: Fraction
    sigma: Union[Fraction, str] = CRITICAL
    lambda_sign: str = "focusing"

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError("dimension n must be a positive integer")
        object.__setattr__(self, "s", as_rational(self.s))
        object.__setattr__(self, "b", as_rational(self.b))
        if self.s < 0:
            raise ValueError("regularity s must be >= 0")
        if self.b <= 0:
            raise ValueError("decay exponent b must be > 0")
        if self.sigma == CRITICAL:
            if not self.s < Fraction(self.n, 2):
                raise ValueError(
                    "critical sigma requires s < n/2 "
                    f"(got s = {fmt(self.s)}, n/2 = {fmt(Fraction(self.n, 2))})"
                )
        else:
            object.__setattr__(self, "sigma", as_rational(self.sigma))
            if self.sigma <= 0:
                raise ValueError("nonlinearity power sigma must be > 0")
        if self.lambda_sign not in LAMBDA_SIGNS:
            raise ValueError(f"lambda_sign must be one of {LAMBDA_SIGNS}")

    @property
    def sigma_value(self) -> Fraction:
        """The nonlinearity power, resolving the critical marker."""
        if self.sigma == CRITICAL:
            return critical_power(self.n, self.s, self.b)  # finite: s < n/2
        return self.sigma


@dataclass(frozen=True)
class AdmissiblePair:
    """A Strichartz-admissible pair (gamma, p) with 2/gamma = n/2 - n/p."""

    p: ExtendedRational
    gamma: ExtendedRational

    @classmethod
    def from_p(cls, p: ExtendedRational, n: int) -> "AdmissiblePair":
        if not is_admissible(p, n):
            raise InfeasibleExponents(
                f"p = {fmt(p)} is outside the admissible range for n = {n}"
            )
        return cls(p=p, gamma=gamma_of(p, n))


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    values: str


@dataclass(frozen=True)
class Verdict:
    """Outcome of a hypothesis predicate: one row per condition, no
    short-circuiting, exact values rendered in every row."""

    criterion: str
    holds: bool
    checks: tuple

    def failing(self):
        return [c for c in self.checks if not c.passed]


def critical_power(n: int, s: Fraction, b: RationalLike) -> ExtendedRational:
    """Scaling-critical power (4-2b)/(n-2s) for s < n/2, INF for s >= n/2."""
    s = as_rational(s)
    b = as_rational(b)
    if s < 0:
        raise ValueError("requires s >= 0")
    if s >= Fraction(n, 2):
        return INF
    return (4 - 2 * b) / (n - 2 * s)


def gamma_of(p: ExtendedRational, n: int) -> ExtendedRational:
    """Time exponent gamma with 2/gamma = n/2 - n/p; INF at p = 2."""
    if p is INF:
        return Fraction(4, n)
    p = as_rational(p)
    if p < 2:
        raise ExponentError(f"p must be >= 2, got {fmt(p)}")
    if p == 2:
        return INF
    return (4 * p) / (n * (p - 2))


def is_admissible(p: ExtendedRational, n: int) -> bool:
    """Whether p lies in the n-dependent Strichartz range."""
    if p is INF:
        return n == 1
    p = as_rational(p)
    if p < 2:
        return False
    if n >= 3:
        return p <= Fraction(2 * n, n - 2)
    return True  # n = 2: [2, inf); n = 1: [2, inf], finite p always fine


def _epsilon_choice(n: int, s: Fraction, b: Fraction) -> Fraction:
    # midpoint of the admissible window 0 < eps < min(n - s - b, n/2)
    return Fraction(1, 2) * min(n - s - b, Fraction(n, 2))


def working_exponent(params: CriticalityParams):
    """Space exponent r of the contraction scheme, with the eps used for
    n <= 2 (eps = half of min(n-s-b, n/2)); requires the critical
    well-posedness hypotheses.

    Returns ``(r, epsilon_used)`` where ``epsilon_used`` is None for n >= 3.
    """
    verdict = hypothesis_report("critical_lwp", params)
    if not verdict.holds:
        raise HypothesisViolation(verdict)
    n, s, b = params.n, params.s, params.b
    sig = params.sigma_value
    if n >= 3:
        r = (2 * n * sig + 2 * n) / (n + 2 + 2 * sig * s - 2 * b)
        return r, None
    eps = _epsilon_choice(n, s, b)
    r = (sig * n + n) / (sig * s + n - b - eps)
    return r, eps


def _inv_gamma(p: ExtendedRational, n: int) -> Fraction:
    # 1/gamma(p) = n/4 - n/(2p), with 1/gamma = 0 at p = 2 and n/4 at p = inf
    if p is INF:
        return Fraction(n, 4)
    p = as_rational(p)
    return Fraction(n, 4) - Fraction(n, 1) / (2 * p)


def dual_exponent_identity(params: CriticalityParams, r: RationalLike) -> bool:
    """Exact check of 1/rbar' = sigma*(1/r - s/n) + 1/r + b/n with
    rbar = 2n/(n-2); defined for n >= 3."""
    n = params.n
    if n < 3:
        raise ExponentError("dual exponent identity requires n >= 3")
    r = as_rational(r)
    s, b = params.s, params.b
    sig = params.sigma_value
    lhs = 1 - Fraction(n - 2, 2 * n)  # 1 - 1/rbar
    rhs = sig * (1 / r - Fraction(s, 1) / n) + 1 / r + Fraction(b, 1) / n
    return lhs == rhs


def holder_time_identity(params: CriticalityParams, r: RationalLike) -> bool:
    """Exact check of 1/gamma(rbar)' = (sigma+1)/gamma(r) with rbar fixed by
    the contraction construction (2n/(n-2) for n >= 3, n/eps for n <= 2)."""
    verdict = hypothesis_report("critical_lwp", params)
    if not verdict.holds:
        raise HypothesisViolation(verdict)
    r = as_rational(r)
    n = params.n
    if not is_admissible(r, n):
        raise ExponentError(f"r = {fmt(r)} is not admissible for n = {n}")
    if n >= 3:
        rbar: ExtendedRational = Fraction(2 * n, n - 2)
    else:
        eps = _epsilon_choice(n, params.s, params.b)
        rbar = Fraction(n, 1) / eps
    sig = params.sigma_value
    lhs = 1 - _inv_gamma(rbar, n)          # 1/gamma(rbar)'
    rhs = (sig + 1) * _inv_gamma(r, n)     # (sigma+1)/gamma(r)
    return lhs == rhs


def nonlinearity_index(
    r: RationalLike, s: RationalLike, sigma: RationalLike, n: int
) -> Fraction:
    """Lebesgue index p with 1/p = sigma*(1/r - s/n) + 1/r, the target space
    of the power nonlinearity; infeasible when 1/r <= s/n or p <= 1."""
    r = as_rational(r)
    s = as_rational(s)
    sigma = as_rational(sigma)
    if r <= 1:
        raise InfeasibleExponents(f"r must exceed 1, got {fmt(r)}")
    gap = 1 / r - Fraction(s, 1) / n
    if gap <= 0:
        raise InfeasibleExponents(
            f"requires 1/r > s/n (1/r = {fmt(1 / r)}, s/n = {fmt(Fraction(s, 1) / n)})"
        )
    inv_p = sigma * gap + 1 / r
    p = 1 / inv_p
    if p <= 1:
        raise InfeasibleExponents(f"index must exceed 1, got p = {fmt(p)}")
    return p


def _b_cap(n: int, s: Fraction) -> Fraction:
    return min(Fraction(2), n - s, 1 + Fraction(n - 2 * s, 2))


def hypothesis_report(
    criterion: str,
    params: CriticalityParams,
    polynomial_f: bool = False,
    symmetry: Optional[str] = None,
) -> Verdict:
    """Evaluate every hypothesis of the named criterion with exact values.

    All conditions are evaluated and reported even after the first failure.
    ``polynomial_f`` selects the polynomial-nonlinearity branch of the
    continuous-dependence criterion; ``symmetry='cylindrical'`` adds the
    b >= 4-n gate of the blow-up criterion.
    """
    if criterion not in CRITERIA:
        raise ExponentError(f"unknown criterion {criterion!r}; expected one of {CRITERIA}")
    n, s, b = params.n, params.s, params.b
    sig = params.sigma_value
    half = Fraction(n, 2)
    checks = []

    def add(name, ok, values):
        checks.append(Check(name, bool(ok), values))

    if criterion == "critical_lwp":
        add("0 <= s < n/2", 0 <= s < half, f"s = {fmt(s)}, n/2 = {fmt(half)}")
        cap = _b_cap(n, s)
        add(
            "0 < b < min(2, n-s, 1+(n-2s)/2)",
            0 < b < cap,
            f"b = {fmt(b)}, bound = {fmt(cap)}",
        )
        target = critical_power(n, s, b) if s < half else INF
        add(
            "sigma = (4-2b)/(n-2s)",
            sig == target,
            f"sigma = {fmt(sig)}, critical = {fmt(target)}",
        )
        if is_even_integer(sig):
            add(
                "model case: sigma even integer (polynomial)",
                True,
                f"sigma = {fmt(sig)}",
            )
        else:
            floor_req = math.ceil(s) - 1
            add(
                "model case: sigma > ceil(s)-1",
                sig > floor_req,
                f"sigma = {fmt(sig)}, ceil(s)-1 = {floor_req}",
            )
    elif criterion == "subcritical_lwp":
        s_cap = min(Fraction(n), half + 1)
        add("0 <= s < min(n, n/2+1)", 0 <= s < s_cap, f"s = {fmt(s)}, bound = {fmt(s_cap)}")
        cap = _b_cap(n, s)
        add(
            "0 < b < min(2, n-s, 1+(n-2s)/2)",
            0 < b < cap,
            f"b = {fmt(b)}, bound = {fmt(cap)}",
        )
        target = critical_power(n, s, b) if s >= 0 else INF
        add(
            "0 < sigma < critical power",
            0 < sig and sig < target,
            f"sigma = {fmt(sig)}, critical = {fmt(target)}",
        )
    elif criterion == "continuous_dependence":
        add("0 < s < n/2", 0 < s < half, f"s = {fmt(s)}, n/2 = {fmt(half)}")
        cap = _b_cap(n, s)
        add(
            "0 < b < min(2, n-s, 1+(n-2s)/2)",
            0 < b < cap,
            f"b = {fmt(b)}, bound = {fmt(cap)}",
        )
        target = critical_power(n, s, b) if s < half else INF
        add(
            "sigma = (4-2b)/(n-2s)",
            sig == target,
            f"sigma = {fmt(sig)}, critical = {fmt(target)}",
        )
        if polynomial_f:
            ok = sig.denominator == 1 and sig >= 1
            add(
                "polynomial f: deg f = 1+sigma is an integer >= 2",
                ok,
                f"sigma = {fmt(sig)}",
            )
        elif is_even_integer(sig):
            add(
                "model case: sigma even integer (polynomial)",
                True,
                f"sigma = {fmt(sig)}",
            )
        else:
            if s < 1:
                ok = sig > 1
                detail = f"0 < s < 1 requires sigma > 1; sigma = {fmt(sig)}"
            else:
                ok = sig >= math.ceil(s)
                detail = f"s >= 1 requires sigma >= ceil(s) = {math.ceil(s)}; sigma = {fmt(sig)}"
            add("model case regularity clause", ok, detail)
    else:  # blowup_criterion
        add("n >= 3", n >= 3, f"n = {n}")
        cap = min(Fraction(2), half)
        add("0 < b < min(2, n/2)", 0 < b < cap, f"b = {fmt(b)}, bound = {fmt(cap)}")
        if n >= 3:
            target = (4 - 2 * b) / (n - 2)
            add(
                "sigma = (4-2b)/(n-2)",
                sig == target,
                f"sigma = {fmt(sig)}, energy-critical = {fmt(target)}",
            )
        else:
            add("sigma = (4-2b)/(n-2)", False, "undefined for n < 3")
        if symmetry == "cylindrical":
            add("b >= 4-n", b >= 4 - n, f"b = {fmt(b)}, 4-n = {4 - n}")

    holds = all(c.passed for c in checks)
    return Verdict(criterion=criterion, holds=holds, checks=tuple(checks))


@dataclass(frozen=True)
class RegionReport:
    """Coverage of (n, s, b) by the baseline admissible region
    (0 <= s <= 1, s < n/2, b < min(2, n-2s)) versus the extended region
    (0 <= s < n/2, b < min(2, n-s, 1+(n-2s)/2))."""

    n: int
    s: Fraction
    b: Fraction
    in_baseline: bool
    in_extended: bool
    baseline_bound: Optional[Fraction]
    extended_bound: Fraction
    classification: str


def region_comparison(params: CriticalityParams) -> RegionReport:
    n, s, b = params.n, params.s, params.b
    half = Fraction(n, 2)
    baseline_bound = min(Fraction(2), n - 2 * s) if s <= 1 and s < half else None
    extended_bound = _b_cap(n, s)
    in_baseline = baseline_bound is not None and 0 < b < baseline_bound
    in_extended = 0 <= s < half and 0 < b < extended_bound
    if in_baseline and in_extended:
        classification = "both"
    elif in_extended:
        classification = "extended_only"
    elif in_baseline:
        classification = "baseline_only"
    else:
        classification = "neither"
    return RegionReport(
        n=n,
        s=s,
        b=b,
        in_baseline=in_baseline,
        in_extended=in_extended,
        baseline_bound=baseline_bound,
        extended_bound=extended_bound,
        classification=classification,
    )


def sample_critical_params(rng: random.Random, n_max: int = 6) -> CriticalityParams:
    """Draw one random parameter tuple satisfying the critical
    well-posedness hypotheses (rejection sampling, exact arithmetic)."""
    while True:
        n = rng.randint(1, n_max)
        den = rng.randint(1, 8)
        max_num = (n * den) // 2 if (n * den) % 2 else (n * den) // 2 - 1
        s = Fraction(rng.randint(0, max(max_num, 0)), den)
        if not s < Fraction(n, 2):
            continue
        cap = _b_cap(n, s)
        if cap <= 0:
            continue
        b = cap * Fraction(rng.randint(1, 63), 64)
        params = CriticalityParams(n=n, s=s, b=b, sigma=CRITICAL)
        if hypothesis_report("critical_lwp", params).holds:
            return params

"""Two-sample statistics: Mann-Whitney U and the independent t-test.

Everything is computed from first principles on top of math.lgamma and
math.erfc. The t-test p-value goes through the regularized incomplete
beta function, evaluated with the classic continued fraction (modified
Lentz); the Mann-Whitney p-value is available both by full enumeration
(exact, small samples) and by normal approximation with tie-corrected
variance and continuity correction.
"""

from __future__ import annotations

import itertools
import math
import statistics
from dataclasses import dataclass

from ..errors import InvalidInput

_BETACF_MAX_ITER = 400
_BETACF_EPS = 3e-16
_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betai(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0.0 or b <= 0.0:
        raise InvalidInput(f"beta parameters must be positive: a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise InvalidInput(f"beta argument out of [0, 1]: {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # The continued fraction converges fast only on one side of the mean;
    # use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) on the other.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def t_two_sided_p(t: float, df: float) -> float:
    """Two-sided p-value of a t statistic."""
    if df <= 0:
        raise InvalidInput(f"degrees of freedom must be positive: {df}")
    if math.isinf(t):
        return 0.0
    return betai(df / 2.0, 0.5, df / (df + t * t))


def _clean_sample(values, name: str, minimum: int) -> list[float]:
    if values is None or not isinstance(values, (list, tuple)):
        raise InvalidInput(f"sample {name} must be a list")
    if len(values) < minimum:
        raise InvalidInput(f"sample {name} needs at least {minimum} values, got {len(values)}")
    out = []
    for value in values:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidInput(f"sample {name} has a non-numeric value: {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise InvalidInput(f"sample {name} has a non-finite value")
        out.append(value)
    return out


def _ranks_doubled(pooled: list[float]) -> list[int]:
    """Average ranks of the pooled sample, times two (exact integers)."""
    order = sorted(range(len(pooled)), key=lambda i: pooled[i])
    doubled = [0] * len(pooled)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        # Positions i..j (0-based) share rank (i+1 + j+1)/2; doubled: i+j+2.
        for k in range(i, j + 1):
            doubled[order[k]] = i + j + 2
        i = j + 1
    return doubled


@dataclass(frozen=True)
class MwuResult:
    u: float
    u_other: float
    p: float
    method: str
    z: float | None = None

    @property
    def u_min(self) -> float:
        return min(self.u, self.u_other)


def mann_whitney_u(a, b, method: str = "asymptotic_cc") -> MwuResult:
    """Two-sided Mann-Whitney U test; U is reported for sample ``a``.

    "exact" enumerates every assignment of pooled ranks (requires
    n1+n2 <= 20); "asymptotic_cc" uses the normal approximation with
    tie-corrected variance and a 0.5 continuity correction.
    """
    xs = _clean_sample(a, "a", 1)
    ys = _clean_sample(b, "b", 1)
    n1, n2 = len(xs), len(ys)
    pooled = xs + ys
    doubled = _ranks_doubled(pooled)
    # U_a = R_a - n1(n1+1)/2, in doubled units to stay in integers.
    u2_obs = sum(doubled[:n1]) - n1 * (n1 + 1)
    u = u2_obs / 2.0
    u_other = n1 * n2 - u

    if method == "exact":
        if n1 + n2 > 20:
            raise InvalidInput(f"exact method requires n1+n2 <= 20, got {n1 + n2}")
        center2 = n1 * n2  # doubled mean of U
        observed_dev = abs(u2_obs - center2)
        hits = 0
        total = 0
        for combo in itertools.combinations(range(n1 + n2), n1):
            u2 = sum(doubled[i] for i in combo) - n1 * (n1 + 1)
            if abs(u2 - center2) >= observed_dev:
                hits += 1
            total += 1
        return MwuResult(u=u, u_other=u_other, p=hits / total, method="exact")

    if method != "asymptotic_cc":
        raise InvalidInput(f"unknown method: {method!r} (use exact or asymptotic_cc)")
    n = n1 + n2
    mean = n1 * n2 / 2.0
    tie_term = 0.0
    counts: dict[float, int] = {}
    for value in pooled:
        counts[value] = counts.get(value, 0) + 1
    for t in counts.values():
        tie_term += t * t * t - t
    if n > 1:
        variance = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    else:
        variance = 0.0
    if variance <= 0.0:
        return MwuResult(u=u, u_other=u_other, p=1.0, method="asymptotic_cc", z=0.0)
    sigma = math.sqrt(variance)
    if u > mean:
        z = (u - mean - 0.5) / sigma
    elif u < mean:
        z = (u - mean + 0.5) / sigma
    else:
        z = 0.0
    p = min(1.0, 2.0 * normal_cdf(-abs(z)))
    return MwuResult(u=u, u_other=u_other, p=p, method="asymptotic_cc", z=z)


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    df: float
    variance: str


def t_test_ind(a, b, variance: str = "pooled") -> TTestResult:
    """Two-sample two-sided t-test, pooled or Welch variance."""
    if variance not in ("pooled", "welch"):
        raise InvalidInput(f"unknown variance mode: {variance!r}")
    xs = _clean_sample(a, "a", 2)
    ys = _clean_sample(b, "b", 2)
    n1, n2 = len(xs), len(ys)
    m1, m2 = statistics.fmean(xs), statistics.fmean(ys)
    v1, v2 = statistics.variance(xs), statistics.variance(ys)

    if variance == "pooled":
        df = float(n1 + n2 - 2)
        pooled_var = ((n1 - 1) * v1 + (n2 - 1) * v2) / df
        denom = math.sqrt(pooled_var * (1.0 / n1 + 1.0 / n2))
    else:
        q1, q2 = v1 / n1, v2 / n2
        denom = math.sqrt(q1 + q2)
        if q1 + q2 > 0.0:
            df = (q1 + q2) ** 2 / (q1 * q1 / (n1 - 1) + q2 * q2 / (n2 - 1))
        else:
            df = float(n1 + n2 - 2)

    if denom == 0.0:
        # Both samples constant: equal means give the null exactly,
        # unequal means are infinitely far from it.
        if m1 == m2:
            return TTestResult(t=0.0, p=1.0, df=df, variance=variance)
        t = math.inf if m1 > m2 else -math.inf
        return TTestResult(t=t, p=0.0, df=df, variance=variance)

    t = (m1 - m2) / denom
    return TTestResult(t=t, p=t_two_sided_p(t, df), df=df, variance=variance)

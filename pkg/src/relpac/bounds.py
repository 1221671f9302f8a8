"""Closed-form error bounds and concentration tails.

Tail probabilities are clamped to [0, 1].  Floors ``n // k`` are exact
integers.  Theorem ids follow the CLI names: prop3, prop4 (known test
accuracy), tail1, tail2, tailr (concentration), thm7..thm10 (PAC).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class BoundReport:
    theorem: str
    value: float
    inputs: dict[str, Any]
    literal_count: int | None = None
    extra: dict[str, float] = field(default_factory=dict)

    @property
    def vacuous(self) -> bool:
        return self.literal_count is not None and self.value >= self.literal_count

    def as_dict(self) -> dict[str, Any]:
        out = {"theorem": self.theorem, "value": self.value, "inputs": dict(self.inputs),
               "vacuous": self.vacuous}
        if self.literal_count is not None:
            out["literal_count"] = self.literal_count
        out.update(self.extra)
        return out


def literal_count(u: int, a: int, positive_only: bool = False) -> int:
    """Number of ground p/a literals over u constants (signed unless positive_only)."""
    return u ** a if positive_only else 2 * u ** a


def _check_q(q: float) -> float:
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise ValueError("Q must lie in [0, 1]")
    return q


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")


def _check_sizes(k: int, a: int, *sizes: int) -> None:
    if k < 1:
        raise ValueError("k must be at least 1")
    if a > k:
        raise ValueError(f"arity a={a} exceeds k={k}")
    for s in sizes:
        if s < k:
            raise ValueError(f"domain size {s} is smaller than k={k}")


# worst case, accuracy on the test example known -----------------------------------


def worst_case_k(q: float, c_size: int, k: int, a: int) -> float:
    if a > k:
        raise ValueError(f"arity a={a} exceeds k={k}")
    return (1.0 - _check_q(q)) * float(c_size) ** k * k ** a


def worst_case_voting(q: float, c_size: int, k: int, a: int, gamma: float) -> float:
    if a > k:
        raise ValueError(f"arity a={a} exceeds k={k}")
    gamma = float(gamma)
    if gamma <= 0 or gamma * float(c_size) ** (k - a) < 1:
        return worst_case_k(q, c_size, k, a)
    return (1.0 - _check_q(q)) * float(c_size) ** a * k ** a / gamma


# concentration tails ------------------------------------------------------------


def tail_one_sample(n: int, k: int, eps: float, two_sided: bool = True) -> float:
    if not n >= k >= 1:
        raise ValueError("need n >= k >= 1")
    bound = math.exp(-2 * (n // k) * eps * eps)
    return min(1.0, 2 * bound if two_sided else bound)


def tail_two_sample(n: int, u: int, k: int, eps: float, two_sided: bool = True) -> float:
    if k < 1 or n < k or u < k:
        raise ValueError("need n, u >= k >= 1")
    bound = math.exp(-2 * eps * eps / (1 / (n // k) + 1 / (u // k)))
    return min(1.0, 2 * bound if two_sided else bound)


def tail_realizable(n: int, k: int, eps: float) -> float:
    if not n >= k >= 1:
        raise ValueError("need n >= k >= 1")
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    return min(1.0, math.exp(-(n // k) * eps))


def invert_tail(n: int, k: int, delta: float, which: str = "one", u: int | None = None,
                two_sided: bool = True) -> float:
    """Smallest eps whose tail bound is at most delta."""
    _check_delta(delta)
    m = n // k
    if which == "one":
        return math.sqrt(math.log((2 if two_sided else 1) / delta) / (2 * m))
    if which == "two":
        if u is None:
            raise ValueError("the two-sample tail needs u")
        return math.sqrt(math.log((2 if two_sided else 1) / delta) * (1 / m + 1 / (u // k)) / 2)
    if which == "realizable":
        return math.log(1 / delta) / m
    raise ValueError(f"unknown tail {which!r}")


# PAC bounds ----------------------------------------------------------------------


def _inputs(**kw) -> dict[str, Any]:
    return {k: v for k, v in kw.items() if v is not None}


def pac_realizable_expected(n: int, u: int, k: int, a: int, h_size: int, delta: float,
                            positive_only: bool = False) -> BoundReport:
    """Expected errors for theories with zero training error."""
    _check_delta(delta)
    _check_sizes(k, a, n, u)
    if h_size < 1:
        raise ValueError("the hypothesis class must be non-empty")
    value = (math.log(h_size) + math.log(1 / delta)) / (n // k) * float(u) ** k * k ** a
    return BoundReport("thm7", value, _inputs(n=n, u=u, k=k, a=a, H=h_size, delta=delta),
                       literal_count(u, a, positive_only))


def pac_expected(q_train: float, n: int, u: int, k: int, a: int, h_size: int, delta: float,
                 positive_only: bool = False) -> BoundReport:
    _check_delta(delta)
    _check_sizes(k, a, n, u)
    q = _check_q(q_train)
    slack = math.sqrt(math.log(h_size / delta) / (2 * (n // k)))
    value = (1 - q + slack) * float(u) ** k * k ** a
    return BoundReport("thm8", value, _inputs(Q=q, n=n, u=u, k=k, a=a, H=h_size, delta=delta),
                       literal_count(u, a, positive_only))


def pac_actual(q_train: float, n: int, u: int, k: int, a: int, h_size: int, delta: float,
               positive_only: bool = False) -> BoundReport:
    """Bound on the actual error count; reports the tighter first form."""
    _check_delta(delta)
    _check_sizes(k, a, n, u)
    q = _check_q(q_train)
    mn, mu = n // k, u // k
    log_term = math.log(2 * h_size / delta)
    scale = float(u) ** k * k ** a
    form1 = (1 - q + math.sqrt((mn + mu) * log_term / (2 * mn * mu))) * scale
    form2 = (1 - q + math.sqrt(log_term / min(mn, mu))) * scale
    if form1 > form2 * (1 + 1e-12):
        raise ArithmeticError("first form exceeds the second form")
    return BoundReport("thm9", form1, _inputs(Q=q, n=n, u=u, k=k, a=a, H=h_size, delta=delta),
                       literal_count(u, a, positive_only), {"form2": form2})


def pac_voting(q_train: float, n: int, u: int, k: int, a: int, gamma: float, h_size: int, delta: float,
               positive_only: bool = False) -> BoundReport:
    """Bound on actual voting errors, with the per-literal fraction |F| / u^a."""
    _check_delta(delta)
    _check_sizes(k, a, n, u)
    gamma = float(gamma)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    q = _check_q(q_train)
    fraction = (1 - q + math.sqrt(math.log(2 * h_size / delta) / min(u // k, n // k))) * k ** a / gamma
    value = fraction * float(u) ** a
    return BoundReport("thm10", value,
                       _inputs(Q=q, n=n, u=u, k=k, a=a, gamma=gamma, H=h_size, delta=delta),
                       literal_count(u, a, positive_only), {"fraction": fraction})

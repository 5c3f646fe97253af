"""Globally adaptive quadrature on a nested pair of open rules.

The workhorse is a 15-node interpolatory rule of Fejer's second kind
whose odd-indexed nodes form the embedded 7-node rule of the same
family.  Both rules are open (they never evaluate the endpoints), so
integrable endpoint singularities such as ``x**-0.5`` are handled by
bisection alone, without special-casing.

Error estimation follows the classic damping recipe: the raw
``|high - low|`` difference is tempered by the scale of the integrand's
oscillation on the panel, so smooth panels are not absurdly optimistic
and rough panels are not punished twice.

Subdivision is globally adaptive: the panel with the largest error
estimate is split first.  Panels that reach the depth cap (or that can
no longer be split in floating point) are moved to a locked pool; the
loop stops when the combined error of active and locked panels meets
the tolerance, when nothing splittable remains, or when the locked pool
alone already exceeds the tolerance and further work is pointless.  The
``converged`` flag reports honestly which of these happened.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Callable, List, Sequence, Tuple

from .errors import QuadratureError

__all__ = [
    "Tolerance",
    "DEFAULT_TOLERANCE",
    "QuadratureResult",
    "integrate",
    "integrate_to_infinity",
    "dyadic_shell_integrals",
]

_EPS = sys.float_info.epsilon


@dataclass(frozen=True, slots=True)
class Tolerance:
    """Requested accuracy: ``max(absolute, rel * |value|)``.

    Both knobs are explicit; the engine itself has no hidden accuracy
    defaults.  Module users who want the stock setting pass
    :data:`DEFAULT_TOLERANCE`.
    """

    rel: float = 1e-10
    absolute: float = 1e-14

    def __post_init__(self) -> None:
        for name in ("rel", "absolute"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be a finite non-negative number, got {v!r}")
        if self.rel == 0 and self.absolute == 0:
            raise ValueError("rel and absolute cannot both be zero")

    def bound(self, value: float) -> float:
        return max(self.absolute, self.rel * abs(value))


DEFAULT_TOLERANCE = Tolerance()


@dataclass(frozen=True, slots=True)
class QuadratureResult:
    """Value with an error estimate and an honest convergence flag.

    ``converged`` is False whenever the estimate could not be certified
    below tolerance, even if the value itself happens to be accurate.
    ``subdivisions`` counts evaluated panels.
    """

    value: float
    abs_error: float
    subdivisions: int
    converged: bool


def _fejer2(n: int) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    # Nodes cos(k pi / n), k = 1 .. n-1, with the standard closed-form
    # weights (Waldvogel's formula).  Endpoint abscissae are excluded.
    nodes: List[float] = []
    weights: List[float] = []
    for k in range(1, n):
        theta = k * math.pi / n
        s = 0.0
        for m in range(1, n // 2 + 1):
            s += math.sin((2 * m - 1) * theta) / (2 * m - 1)
        nodes.append(math.cos(theta))
        weights.append(4.0 / n * math.sin(theta) * s)
    return tuple(nodes), tuple(weights)


_X_HIGH, _W_HIGH = _fejer2(16)
_W_LOW = _fejer2(8)[1]
# odd-indexed high nodes coincide with the 7 low-rule nodes
_LOW_AT = (1, 3, 5, 7, 9, 11, 13)


def _panel(g: Callable[[float], float], a: float, b: float) -> Tuple[float, float]:
    """High-rule value and damped error estimate for one panel."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fx: List[float] = []
    for x in _X_HIGH:
        t = c + h * x
        v = g(t)
        if not math.isfinite(v):
            raise QuadratureError(f"integrand returned {v!r} at x={t!r}")
        fx.append(v)
    high = h * math.fsum(w * v for w, v in zip(_W_HIGH, fx))
    low = h * math.fsum(w * fx[i] for w, i in zip(_W_LOW, _LOW_AT))
    resabs = h * math.fsum(w * abs(v) for w, v in zip(_W_HIGH, fx))
    mean = high / (b - a)
    resasc = h * math.fsum(w * abs(v - mean) for w, v in zip(_W_HIGH, fx))
    err = abs(high - low)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    err = max(err, 50.0 * _EPS * resabs)
    return high, err


def integrate(
    g: Callable[[float], float],
    a: float,
    b: float,
    tol: Tolerance = DEFAULT_TOLERANCE,
    max_depth: int = 60,
    max_intervals: int = 1_000_000,
) -> QuadratureResult:
    """Adaptively integrate ``g`` over the finite interval ``[a, b]``.

    The endpoints themselves are never evaluated.  A NaN or infinity at
    any interior node raises :class:`QuadratureError` immediately.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integrate requires finite endpoints; use integrate_to_infinity")
    if b <= a:
        if b == a:
            return QuadratureResult(0.0, 0.0, 0, True)
        raise ValueError(f"empty interval: a={a!r} > b={b!r}")

    v0, e0 = _panel(g, a, b)
    # heap entries: (-err, serial, a, b, value, err, depth)
    active: list = [(-e0, 0, a, b, v0, e0, 0)]
    locked: List[Tuple[float, float]] = []
    act_v, act_e = v0, e0
    lok_v, lok_e = 0.0, 0.0
    count = 1
    serial = 1
    converged = False

    while True:
        total = act_v + lok_v
        eps_now = tol.bound(total)
        if act_e + lok_e <= eps_now:
            converged = True
            break
        if not active or lok_e > eps_now or count + 2 > max_intervals:
            break
        _, _, pa, pb, pv, pe, depth = heappop(active)
        act_v -= pv
        act_e -= pe
        m = 0.5 * (pa + pb)
        if depth >= max_depth or m <= pa or m >= pb:
            locked.append((pv, pe))
            lok_v += pv
            lok_e += pe
            continue
        v1, e1 = _panel(g, pa, m)
        v2, e2 = _panel(g, m, pb)
        count += 2
        heappush(active, (-e1, serial, pa, m, v1, e1, depth + 1))
        serial += 1
        heappush(active, (-e2, serial, m, pb, v2, e2, depth + 1))
        serial += 1
        act_v += v1 + v2
        act_e += e1 + e2

    value = math.fsum([item[4] for item in active] + [v for v, _ in locked])
    error = math.fsum([item[5] for item in active] + [e for _, e in locked])
    return QuadratureResult(value, error, count, converged)


def integrate_to_infinity(
    g: Callable[[float], float],
    a: float,
    tol: Tolerance = DEFAULT_TOLERANCE,
    max_depth: int = 60,
    max_intervals: int = 1_000_000,
) -> QuadratureResult:
    """Integrate ``g`` over ``[a, infinity)``.

    Uses the rational substitution t = 1/(1 + x - a), which maps the
    tail onto (0, 1] and keeps polynomially decaying integrands tame.
    Divergent tails show up as ``converged=False`` with a large error
    estimate rather than as an exception, because the transform cannot
    tell slow convergence from divergence; callers that need a hard
    verdict should consult the classifier first.
    """
    if not math.isfinite(a):
        raise ValueError("lower limit must be finite")

    def h(t: float) -> float:
        x = a + 1.0 / t - 1.0
        gv = g(x)
        if gv == 0.0:
            return 0.0
        return gv / (t * t)

    return integrate(h, 0.0, 1.0, tol, max_depth, max_intervals)


def _dyadic_shell_results(
    g: Callable[[float], float],
    eps: float,
    count: int,
    tol: Tolerance = DEFAULT_TOLERANCE,
) -> List[QuadratureResult]:
    if not (math.isfinite(eps) and eps > 0):
        raise ValueError(f"eps must be positive and finite, got {eps!r}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count!r}")
    out: List[QuadratureResult] = []
    hi = eps
    for _ in range(count):
        lo = 0.5 * hi
        out.append(integrate(g, lo, hi, tol))
        hi = lo
    return out


def dyadic_shell_integrals(
    g: Callable[[float], float],
    eps: float,
    count: int,
    tol: Tolerance = DEFAULT_TOLERANCE,
) -> List[float]:
    """Integrals of ``g`` over the shells (eps/2^(k+1), eps/2^k].

    Returned outermost first, k = 0 .. count-1.  Together the shells
    cover (eps * 2**-count, eps]; summing them and adding a remainder
    over (0, eps * 2**-count] reproduces the integral over (0, eps].
    """
    return [r.value for r in _dyadic_shell_results(g, eps, count, tol)]

"""Class II methods: inverse interpolation on the orbit of g(x) = f(x) + x.

From x0 the orbit x_{i+1} = g(x_i) gives increments Δ_i = f(x_i). The
inverse function takes the value x_i at Δ_i, and the order-n step is the
Newton-form interpolant of those n nodes evaluated at 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from . import expr as _expr
from .algebra import DELTA, MultiPoly, VarId, const, delta
from .errors import DegenerateNodes, OrbitEscape
from .numeric import PrecisionContext
from .schedule import CostProfile

ESCAPE_BOUND = 10 ** 12


@dataclass(frozen=True)
class DeltaOrbit:
    x0: object
    deltas: tuple
    points: tuple  # x_0 .. x_{n-1}: inverse-function values at the Δ nodes

    @property
    def nodes(self) -> list:
        return list(zip(self.deltas, self.points))


@dataclass(frozen=True)
class DividedDifferenceTable:
    """``columns[k][i]`` is the divided difference over nodes i..i+k."""

    abscissas: tuple
    columns: tuple

    def entry(self, i: int, k: int):
        return self.columns[k][i]

    def top(self, k: int):
        """D_{0,...,k}."""
        return self.columns[k][0]

    def newton_value(self, t):
        """Interpolating polynomial at ``t`` (nested Newton form)."""
        n = len(self.abscissas)
        acc = self.columns[n - 1][0]
        for k in range(n - 2, -1, -1):
            acc = self.columns[k][0] + (t - self.abscissas[k]) * acc
        return acc


@dataclass(frozen=True)
class Class2Plan:
    name: str
    order: int

    family = "class2"

    @property
    def evals(self) -> int:
        return self.order

    @property
    def cost(self) -> CostProfile:
        # first column reuses Δ_i as the ordinate difference
        n = self.order
        return CostProfile(mul=n - 1, div=n * (n - 1) // 2, addsub=n * (n - 1), int_scale=0)


def class2_plan(n: int) -> Class2Plan:
    if n < 2:
        raise ValueError("Class II methods need n >= 2")
    return Class2Plan(f"class2:{n}", n)


def divided_differences(abscissas: Sequence, ordinates: Sequence,
                        first_differences: Sequence | None = None) -> DividedDifferenceTable:
    """Divided-difference table by the standard recurrence.

    ``first_differences[i]`` may supply ``ordinates[i+1] - ordinates[i]``
    directly (for orbit nodes this is Δ_i, which avoids cancellation)."""
    n = len(abscissas)
    cols = [tuple(ordinates)]
    if n > 1:
        if first_differences is not None:
            nums = list(first_differences[: n - 1])
        else:
            nums = [ordinates[i + 1] - ordinates[i] for i in range(n - 1)]
        cols.append(tuple(nums[i] / (abscissas[i + 1] - abscissas[i]) for i in range(n - 1)))
    for k in range(2, n):
        prev = cols[-1]
        cols.append(tuple((prev[i + 1] - prev[i]) / (abscissas[i + k] - abscissas[i])
                          for i in range(n - k)))
    return DividedDifferenceTable(tuple(abscissas), tuple(cols))


def orbit_deltas(f, x0, n: int, ctx: PrecisionContext, bound=ESCAPE_BOUND) -> DeltaOrbit:
    f = _expr.as_expr(f)
    x = ctx.real(x0)
    limit = ctx.real(bound)
    deltas, points = [], []
    for _ in range(n):
        if abs(x) > limit:
            raise OrbitEscape(f"g-orbit left |x| <= {bound}")
        dx = _expr.evaluate(f, x, ctx)
        points.append(x)
        deltas.append(dx)
        x = x + dx
    return DeltaOrbit(ctx.real(x0), tuple(deltas), tuple(points))


def check_nodes(deltas: Sequence, ctx: PrecisionContext) -> None:
    scale = max(abs(v) for v in deltas)
    gap = min(abs(b - a) for a, b in combinations(deltas, 2))
    if not gap > ctx.tenpow(-(ctx.digits // 2)) * scale:
        raise DegenerateNodes("orbit increments are (nearly) coincident")


def kfn_from_orbit(orbit: DeltaOrbit, ctx: PrecisionContext):
    check_nodes(orbit.deltas, ctx)
    table = divided_differences(orbit.deltas, orbit.points, orbit.deltas)
    return table.newton_value(0)


def kfn_step(f, x0, n: int, ctx: PrecisionContext, bound=ESCAPE_BOUND):
    """One order-n Class II step x0 -> K_f^n(x0)."""
    f = _expr.as_expr(f)
    x0 = ctx.real(x0)
    d0 = _expr.evaluate(f, x0, ctx)
    if abs(d0) <= ctx.tenpow(-ctx.digits + 2) * (1 + abs(x0)):
        return x0
    orbit = orbit_deltas(f, x0, n, ctx, bound)
    return kfn_from_orbit(orbit, ctx)


def steffensen_direct(f, x0, ctx: PrecisionContext):
    """x - (g(x)-x)^2 / (g(g(x)) - 2 g(x) + x), written out in full."""
    f = _expr.as_expr(f)
    x = ctx.real(x0)
    gx = x + _expr.evaluate(f, x, ctx)
    ggx = gx + _expr.evaluate(f, gx, ctx)
    return x - (gx - x) ** 2 / (ggx - 2 * gx + x)


# ---------------------------------------------------------------------------
# symbolic Q_i / R_i

def r_poly(i: int) -> MultiPoly:
    """Product of the i(i+1)/2 factors (Δ_b - Δ_a), 0 <= a < b <= i."""
    out = const(1)
    for a, b in combinations(range(i + 1), 2):
        out = out * (delta(b) - delta(a))
    return out


def r_factors(i: int) -> list:
    return [(b, a) for a, b in combinations(range(i + 1), 2)]


def q_poly(i: int) -> MultiPoly:
    """Numerator with ``Q_i / R_i == (-1)^i D_{0..i}`` on the orbit nodes.

    Uses the symmetric form D_{0..i} = sum_k D_k / prod_{j != k} (Δ_k - Δ_j)
    with ordinates D_k = x0 + Δ_0 + ... + Δ_{k-1}; the x0 part is the
    divided difference of a constant and drops out for i >= 1."""
    if i < 1:
        raise ValueError("i must be at least 1")
    total = MultiPoly()
    for k in range(i + 1):
        ordinate = MultiPoly()
        for m in range(k):
            ordinate = ordinate + delta(m)
        if ordinate.is_zero():
            continue
        # R_i / prod_{j != k}(Δ_k - Δ_j) = sign * product of factors avoiding k
        rest = const(1)
        for a, b in combinations(range(i + 1), 2):
            if k not in (a, b):
                rest = rest * (delta(b) - delta(a))
        # factors (Δ_b - Δ_a) with a < b touching k: (Δ_k - Δ_j) for j < k and
        # (Δ_j - Δ_k) = -(Δ_k - Δ_j) for j > k
        sign = (-1) ** (i - k)
        total = total + sign * ordinate * rest
    return (-1) ** i * total


def symbolic_QR(i: int):
    return q_poly(i), r_poly(i)


def divided_difference_exact(deltas: Sequence[Fraction], x0: Fraction) -> Fraction:
    """Top divided difference over the orbit nodes, in exact arithmetic."""
    ordinates = [x0]
    for dv in deltas[:-1]:
        ordinates.append(ordinates[-1] + dv)
    table = divided_differences(list(deltas), ordinates)
    return table.top(len(deltas) - 1)


def kfn_symbolic_terms(n: int) -> list:
    """``[(Q_i, R_i, Δ_0...Δ_{i-1})]`` for i = 1..n-1."""
    terms = []
    for i in range(1, n):
        prod = const(1)
        for m in range(i):
            prod = prod * delta(m)
        terms.append((q_poly(i), r_poly(i), prod))
    return terms


DELTA_VARS = [VarId(DELTA, i) for i in range(8)]

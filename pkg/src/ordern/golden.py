"""Reference displays transcribed as plain text.

Each string parses with :func:`ordern.algebra.parse_poly`; ``D<i>`` stands
for the orbit increment Δ_i. Nothing here is computed, so comparisons
against these strings are independent checks of the generators.
"""

from __future__ import annotations

from functools import lru_cache

from .algebra import MultiPoly, parse_poly

# coefficient of -y2^k in the canonical polynomial, k = 1..6
CANONICAL_TAIL = (
    "1",
    "y3",
    "2*y3^2 - y4",
    "5*y3^3 - 5*y3*y4 + y5",
    "14*y3^4 - 21*y3^2*y4 + 6*y3*y5 + 3*y4^2 - y6",
    "42*y3^5 - 84*y3^3*y4 + 28*y3^2*y5 + 28*y3*y4^2 - 7*y3*y6 - 7*y4*y5 + y7",
)

NEWTON = "y1 - y2"
CHEBYSHEV = "y1 - y2 - y3*y2^2"


def canonical_text(n: int) -> str:
    """Displayed P^n for 2 <= n <= 7 as one expression."""
    if not 2 <= n <= 7:
        raise ValueError("displays cover 2 <= n <= 7")
    parts = ["y1"] + [f"({c})*y2^{k}" for k, c in enumerate(CANONICAL_TAIL[: n - 1], start=1)]
    return parts[0] + "".join(f" - {p}" for p in parts[1:])


# Halley-type denominators in their nested displays
HALLEY_DENOMINATORS = {
    3: "-1 + y3*y2",
    4: "-1 + y2*(y3 + y2*(y3^2 - y4))",
    5: "-1 + y2*(y3 + y2*(y3^2 - y4 + y2*(2*y3^3 - 3*y3*y4 + y5)))",
    6: "-1 + y2*(y3 + y2*(y3^2 - y4 + y2*(2*y3^3 - 3*y3*y4 + y5"
       " + y2*(5*y3^4 - 10*y3^2*y4 + 4*y3*y5 + 2*y4^2 - y6))))",
}

# order-4 rational variants as (numerator, denominator) of the y1 + N/D tail
M_FORMS = {
    "m1": ("y2", "-1 + y3*y2 + (y3^2 - y4)*y2^2"),
    "m2": ("y2 - y3*y2^2 - y4*y2^3", "-1 + 2*y2*y3"),
    "m3": ("y2 - y3*y2^2", "-1 + 2*y3*y2 - y4*y2^2"),
}

# nested forms printed beside the expanded ones
M_NESTED = {
    "m1": ("y2", "-1 + y2*(y3 + y2*(y3^2 - y4))"),
    "m2": ("y2*(1 - y2*(y3 + y4*y2))", "-1 + 2*y3*y2"),
    # printed with a plus sign; the expanded numerator above needs a minus
    "m3": ("y2*(1 + y3*y2)", "-1 + y2*(2*y3 - y4*y2)"),
}

# published products and quotients in Horner form (scaling by 2 not counted)
OPERATION_COUNTS = {
    "halley": {"mul": 1, "div": 1, "addsub": 2},
    "chebyshev": {"mul": 2, "addsub": 2},
    "m1": {"mul": 3, "div": 1},
    "m2": {"mul": 4, "div": 1},
    "m3": {"mul": 4, "div": 1},
    "canonical:4": {"mul": 4},
}

CLASS2_Q = {
    1: "-D0",
    2: "D1^2 - D0*D2",
    3: (
        "D0^2*D1*D3-D0^2*D2^2-D0*D1^2*D3+D0*D2^3+D0*D2^2*D3-D0*D2*D3^2+D1^3*D2-D1^3*D3"
        "+D1^2*D3^2-D1*D2^3"
    ),
    4: (
        "D0^3*D1^2*D2*D4-D0^3*D1^2*D3^2-D0^3*D1*D2^2*D4+D0^3*D1*D3^3+D0^3*D1*D3^2*D4"
        "-D0^3*D1*D3*D4^2+D0^3*D2^3*D3-D0^3*D2^3*D4+D0^3*D2^2*D4^2-D0^3*D2*D3^3"
        "-D0^2*D1^3*D2*D4+D0^2*D1^3*D3^2+D0^2*D1*D2^3*D4-D0^2*D1*D3^4-D0^2*D1*D3^3*D4"
        "+D0^2*D1*D3*D4^3-D0^2*D2^4*D3+D0^2*D2^4*D4-D0^2*D2^3*D3^2+D0^2*D2^2*D3^3"
        "-D0^2*D2^2*D4^3+D0^2*D2*D3^4+D0*D1^3*D2^2*D4-D0*D1^3*D3^3-D0*D1^3*D3^2*D4"
        "+D0*D1^3*D3*D4^2-D0*D1^2*D2^3*D4+D0*D1^2*D3^4+D0*D1^2*D3^3*D4-D0*D1^2*D3*D4^3"
        "+D0*D2^4*D3^2-D0*D2^4*D4^2+D0*D2^3*D3^2*D4-D0*D2^3*D3*D4^2+D0*D2^3*D4^3"
        "-D0*D2^2*D3^4-D0*D2^2*D3^3*D4+D0*D2^2*D3*D4^3+D0*D2*D3^3*D4^2-D0*D2*D3^2*D4^3"
        "-D1^4*D2^2*D3+D1^4*D2^2*D4+D1^4*D2*D3^2-D1^4*D2*D4^2-D1^4*D3^2*D4+D1^4*D3*D4^2"
        "-D1^3*D2^2*D4^2+D1^3*D2*D4^3+D1^3*D3^3*D4-D1^3*D3*D4^3+D1^2*D2^4*D3"
        "-D1^2*D2^4*D4+D1^2*D2^3*D4^2-D1^2*D2*D3^4-D1^2*D3^3*D4^2+D1^2*D3^2*D4^3"
        "-D1*D2^4*D3^2+D1*D2^4*D4^2-D1*D2^3*D4^3+D1*D2^2*D3^4"
    ),
}

CLASS2_R = {
    1: "D1 - D0",
    2: "(D1 - D0)*(D2 - D0)*(D2 - D1)",
    3: "(D1 - D0)*(D2 - D0)*(D3 - D0)*(D2 - D1)*(D3 - D1)*(D3 - D2)",
    4: "(D1 - D0)*(D2 - D0)*(D3 - D0)*(D4 - D0)*(D2 - D1)*(D3 - D1)*(D4 - D1)"
       "*(D3 - D2)*(D4 - D2)*(D4 - D3)",
}

EFFICIENCY = {
    "newton": (2, 2, 1.414214),
    "chebyshev": (3, 3, 1.442250),
    "ostrowski": (4, 3, 1.587401),
}


@lru_cache(maxsize=None)
def canonical(n: int) -> MultiPoly:
    return parse_poly(canonical_text(n))


@lru_cache(maxsize=None)
def halley_denominator(n: int) -> MultiPoly:
    return parse_poly(HALLEY_DENOMINATORS[n])


@lru_cache(maxsize=None)
def class2_q(i: int) -> MultiPoly:
    return parse_poly(CLASS2_Q[i])


@lru_cache(maxsize=None)
def class2_r(i: int) -> MultiPoly:
    return parse_poly(CLASS2_R[i])

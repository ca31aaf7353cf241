"""Ready-made generator instances used by the tests, demos, and docs.

The two combining functions below are frozen search results; rerunning
the searches is not needed to use them.  Their properties are asserted
in the test suite:

TOY_FILTER (6 variables): balanced, resiliency 1, nonlinearity 24,
autocorrelation peak 24, quadruple-sum bias 2*(P0 - 1/2) = 0.0419921875.

RESILIENT_FILTER_9 (9 variables): balanced, resiliency 3, nonlinearity
224, bias 2**-6.  Built as f(a, b) = a . phi(b) with a the first six
inputs, b the last three, and phi an injective map onto eight vectors of
weight >= 4, so every wrong first-stage candidate scores exactly
unbiased while the right one keeps the full 2**-6 edge.
"""

from __future__ import annotations

from .boolfn import BooleanFunction
from .gf2 import GeneratorSpec, LfsrSpec
from .multiples import Weight4Multiple

TOY_FILTER_HEX = "0x428f4ed6f65235a2"

RESILIENT_FILTER_9_HEX = (
    "0x0ff0f00ff00f0ff09696696969699696966996696996699"
    "63cc33cc3c33cc33c669966999966996669696969969696"
    "965aa5a55a5aa5a55a6699996666999966")

# Primitive feedback polynomials, bit i = coefficient of X**i.
TOY_POLY_13 = 0x201B      # X^13 + X^4 + X^3 + X + 1
TOY_POLY_11 = 0x805       # X^11 + X^2 + 1
TOY_POLY_9 = 0x211        # X^9 + X^4 + 1

POLY_29 = 0x20000005      # X^29 + X^2 + 1
POLY_31 = 0xB833CB93
POLY_37 = 0x24AD80928D

# 1 + X^102 + X^250 + X^6612 is divisible by both POLY_31 and POLY_37;
# the three polynomials above were fixed together so that this common
# multiple exists at desk scale.  Squaring a multiple doubles its
# exponents and keeps it a multiple, which is how one seed covers a
# whole keystream's worth of relations.
LARGE_MULTIPLE_31_37 = Weight4Multiple(102, 250, 6612)


def toy_filter():
    return BooleanFunction.from_hex(TOY_FILTER_HEX)


def resilient_filter_9():
    return BooleanFunction.from_hex(RESILIENT_FILTER_9_HEX)


def toy_generator():
    """Three registers of lengths 13, 11, 9 combined by TOY_FILTER.

    Inputs 0,1 come from the length-13 register, 2,3 from the length-11,
    and 4,5 from the length-9.
    """
    return GeneratorSpec(
        lfsrs=(
            LfsrSpec(13, TOY_POLY_13, (2, 9)),
            LfsrSpec(11, TOY_POLY_11, (1, 7)),
            LfsrSpec(9, TOY_POLY_9, (3, 8)),
        ),
        function=toy_filter(),
        wiring=((0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)),
    )


def generator_29_31_37():
    """Full-size instance: registers 29, 31, 37 under RESILIENT_FILTER_9.

    The length-29 register feeds inputs 6..8 (the b block of the
    combining function), the length-31 register inputs 0..2, and the
    length-37 register inputs 3..5.
    """
    return GeneratorSpec(
        lfsrs=(
            LfsrSpec(29, POLY_29, (3, 11, 20)),
            LfsrSpec(31, POLY_31, (5, 14, 27)),
            LfsrSpec(37, POLY_37, (2, 17, 33)),
        ),
        function=resilient_filter_9(),
        wiring=((1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2),
                (0, 0), (0, 1), (0, 2)),
    )


def large_multiples_31_37(max_degree):
    """LARGE_MULTIPLE_31_37 and its repeated squarings up to max_degree."""
    out = []
    m = LARGE_MULTIPLE_31_37
    while m.t3 <= max_degree:
        out.append(m)
        m = Weight4Multiple(2 * m.t1, 2 * m.t2, 2 * m.t3)
    return out

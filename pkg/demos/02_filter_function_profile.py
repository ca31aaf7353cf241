"""
Profiling a combining function
==============================

Everything the attack needs to know about the Boolean function sits in
two transforms: the Walsh spectrum (correlation with linear functions)
and the quadruple-sum probability spectrum derived from its 4th power.
"""

from fractions import Fraction

from combgen.boolfn import (autocorrelation, check_p_spectrum_bounds,
                            nonlinearity, p_spectrum, resiliency_order,
                            walsh_spectrum)
from combgen.presets import resilient_filter_9, toy_filter

for name, f in (("toy 6-input filter", toy_filter()),
                ("9-input resilient filter", resilient_filter_9())):
    print(f"--- {name} (n={f.n}) ---")
    w = walsh_spectrum(f)
    print(f"balanced: {f.is_balanced}   max |W|: {w.max_abs}")
    print(f"resiliency order: {resiliency_order(f)}")
    print(f"nonlinearity: {nonlinearity(f)}")
    print(f"autocorrelation peak: {autocorrelation(f).delta}")

    # P(x) is the chance four outputs sum to zero when the four inputs
    # sum to x.  P(0) always sticks out; its edge over 1/2 is the bias
    # every scored relation inherits.
    ps = p_spectrum(f)
    edge = 2 * (ps.p0 - Fraction(1, 2))
    print(f"P0 = {ps.p0} = 1/2 + {ps.p0 - Fraction(1, 2)}")
    print(f"relation bias 2*(P0 - 1/2) = {edge} = {float(edge)}")

    rep = check_p_spectrum_bounds(f)
    print(f"floor bound  P0 >= {rep.p0_bound}: {rep.p0 >= rep.p0_bound}")
    print(f"gap bound    min gap {rep.min_gap} >= {rep.gap_bound}: "
          f"{rep.min_gap >= rep.gap_bound}")
    print()

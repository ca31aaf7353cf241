"""
Finding weight-4 multiples by birthday collision
================================================

Relations that cancel whole registers come from multiples of their
feedback polynomials of the form 1 + X^t1 + X^t2 + X^t3.  Searching is
a meet-in-the-middle over pairs of residues X^a + X^b mod P: a
collision between two pairs yields four exponents summing to zero.
"""

from combgen.gf2 import poly_mul
from combgen.multiples import (expected_count, find_weight4,
                               find_weight4_bruteforce, verify_multiple)
from combgen.presets import TOY_POLY_11, TOY_POLY_9

# Single polynomial, small bound: compare against the cubic brute force.
rep = find_weight4(TOY_POLY_9, 128)
oracle = find_weight4_bruteforce(TOY_POLY_9, 128)
print(f"degree-9 modulus, bound 128: {rep.count} multiples "
      f"(expected ~{float(rep.expected):.1f}), brute force agrees: "
      f"{rep.found == oracle.found}")
for m in rep.found[:5]:
    print(f"  1 + X^{m.t1} + X^{m.t2} + X^{m.t3}")

# For the attack we need multiples of the *product* of the two passive
# registers' polynomials, so one relation cancels both at once.
product = poly_mul(TOY_POLY_11, TOY_POLY_9)
bound = 1500
rep = find_weight4(product, bound)
print(f"\nproduct modulus (degree 20), bound {bound}: {rep.count} multiples,"
      f" heuristic D^3/(6*2^m2) = {float(expected_count(20, bound)):.1f}")

# Every hit divides the product, hence both factors.
ok = all(verify_multiple(m, [TOY_POLY_11, TOY_POLY_9]) for m in rep.found)
print(f"all verified against both factors: {ok}")
lowest = rep.found[0]
print(f"lowest degree found: 1 + X^{lowest.t1} + X^{lowest.t2} + X^{lowest.t3}")

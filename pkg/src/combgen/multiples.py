"""Search for weight-4 multiples of feedback polynomial products.

A weight-4 multiple 1 + X**t1 + X**t2 + X**t3 of the product of some
registers' feedback polynomials yields keystream relations that cancel
those registers entirely; the attack conditions on them.  The search
here is the birthday-style collision scan: tabulate X**a mod M for
a = 1..D, then for every pair (a, b) look up whether 1 ^ r_a ^ r_b is
some r_c.  Time O(D**2 log D), memory O(D).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np

from .errors import ValidationError
from .gf2 import poly_degree, poly_gcd, poly_mul, x_power_mod

# int64 residue arrays hold moduli up to this degree; beyond it the scan
# falls back to Python ints.
_NUMPY_DEGREE_LIMIT = 62


@dataclass(frozen=True, order=True)
class Weight4Multiple:
    """Exponents of a multiple 1 + X**t1 + X**t2 + X**t3, 0 < t1 < t2 < t3."""

    t1: int
    t2: int
    t3: int

    def __post_init__(self):
        if not 0 < self.t1 < self.t2 < self.t3:
            raise ValidationError(
                f"exponents must satisfy 0 < t1 < t2 < t3, got "
                f"({self.t1}, {self.t2}, {self.t3})")

    @property
    def poly(self):
        return 1 | 1 << self.t1 | 1 << self.t2 | 1 << self.t3

    @property
    def degree(self):
        return self.t3

    @property
    def shifts(self):
        return (0, self.t1, self.t2, self.t3)


@dataclass(frozen=True)
class MultipleSearchReport:
    """Everything a search run found below one degree bound."""

    modulus: int
    degree_bound: int
    found: tuple
    expected: Fraction

    @property
    def count(self):
        return len(self.found)


def product_modulus(polys):
    """Product of pairwise-coprime feedback polynomials.

    Accepts ints or objects with a .feedback attribute.
    """
    polys = [p.feedback if hasattr(p, "feedback") else int(p) for p in polys]
    if not polys:
        raise ValidationError("empty polynomial group")
    for p in polys:
        if poly_degree(p) < 1:
            raise ValidationError("group members must have degree >= 1")
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            if poly_gcd(polys[i], polys[j]) != 1:
                raise ValidationError(
                    f"polynomials 0x{polys[i]:x} and 0x{polys[j]:x} share a factor")
    return reduce(poly_mul, polys)


def expected_count(degree, bound):
    """Heuristic number of weight-4 multiples with t3 <= bound: D**3 / (6 * 2**m)."""
    if degree < 1 or bound < 1:
        raise ValidationError("need degree >= 1 and bound >= 1")
    return Fraction(bound ** 3, 6 << degree)


def verify_multiple(mult, polys):
    """True iff every polynomial in the group divides the multiple.

    Works per exponent with X**t mod p, so huge-degree multiples verify
    in logarithmic time instead of materialising the dense polynomial.
    """
    polys = [p.feedback if hasattr(p, "feedback") else int(p) for p in polys]
    for p in polys:
        acc = 1
        for t in (mult.t1, mult.t2, mult.t3):
            acc ^= x_power_mod(t, p)
        if acc != 0:
            return False
    return True


def _residue_list(modulus, bound):
    """X**a mod modulus for a = 1..bound as a Python list."""
    top = 1 << poly_degree(modulus)
    low = modulus ^ top
    out = []
    r = 1
    for _ in range(bound):
        r <<= 1
        if r & top:
            r ^= top | low
        out.append(r)
    return out


def _scan_numpy(residues, bound):
    """Collision scan with sorted int64 lookups, yields raw (a, b, c)."""
    r = np.array(residues, dtype=np.int64)
    order = np.argsort(r, kind="stable")
    ranked = r[order]
    if bound > 1 and np.any(ranked[1:] == ranked[:-1]):
        raise ValidationError("degree bound exceeds the period of X modulo "
                              "the modulus; the collision scan would miss "
                              "solutions (lower the bound)")
    hits = []
    for ia in range(bound - 1):
        targets = 1 ^ r[ia] ^ r[ia + 1:]
        pos = np.searchsorted(ranked, targets)
        pos[pos == bound] = 0
        match = ranked[pos] == targets
        for off in np.flatnonzero(match):
            ib = ia + 1 + off
            ic = int(order[pos[off]])
            hits.append((ia + 1, ib + 1, ic + 1))
    return hits


def _scan_python(residues, bound):
    """Same collision scan with a dict of Python ints (any degree)."""
    where = {}
    for a, res in enumerate(residues, start=1):
        if res in where:
            raise ValidationError("degree bound exceeds the period of X "
                                  "modulo the modulus; the collision scan "
                                  "would miss solutions (lower the bound)")
        where[res] = a
    hits = []
    for ia in range(bound - 1):
        ra = residues[ia]
        for ib in range(ia + 1, bound):
            c = where.get(1 ^ ra ^ residues[ib])
            if c is not None:
                hits.append((ia + 1, ib + 1, c))
    return hits


def find_weight4(modulus, degree_bound, limit=None):
    """All weight-4 multiples of modulus with degree <= degree_bound.

    Exact and exhaustive within the bound.  The report lists multiples
    sorted by degree; `limit`, if given, truncates the sorted list (the
    scan itself always covers the full bound).
    """
    deg = poly_degree(modulus)
    if deg < 1:
        raise ValidationError("modulus must have degree >= 1")
    if not modulus & 1:
        raise ValidationError("modulus with zero constant term divides no "
                              "weight-4 multiple")
    if degree_bound < 3:
        raise ValidationError("degree bound below the minimum weight-4 degree")
    if degree_bound > 1 << 24:
        raise ValidationError("collision scan is quadratic; bound over 2**24 "
                              "is not practical here")
    residues = _residue_list(modulus, degree_bound)
    if deg <= _NUMPY_DEGREE_LIMIT:
        raw = _scan_numpy(residues, degree_bound)
    else:
        raw = _scan_python(residues, degree_bound)
    triples = set()
    for a, b, c in raw:
        if c != a and c != b:
            triples.add(tuple(sorted((int(a), int(b), int(c)))))
    found = sorted(Weight4Multiple(*t) for t in triples)
    found.sort(key=lambda m: (m.t3, m.t2, m.t1))
    if limit is not None:
        found = found[:limit]
    return MultipleSearchReport(modulus=modulus, degree_bound=degree_bound,
                                found=tuple(found),
                                expected=expected_count(deg, degree_bound))


def find_weight4_bruteforce(modulus, degree_bound):
    """Oracle: test every 0 < t1 < t2 < t3 <= degree_bound directly.

    Cost grows as degree_bound**3; for cross-checking the collision scan
    at small bounds.
    """
    deg = poly_degree(modulus)
    if deg < 1:
        raise ValidationError("modulus must have degree >= 1")
    if not modulus & 1:
        raise ValidationError("modulus with zero constant term divides no "
                              "weight-4 multiple")
    if degree_bound > 1 << 9:
        raise ValidationError("cubic enumeration limited to bound <= 512")
    residues = _residue_list(modulus, degree_bound)
    found = []
    for t1 in range(1, degree_bound - 1):
        for t2 in range(t1 + 1, degree_bound):
            partial = 1 ^ residues[t1 - 1] ^ residues[t2 - 1]
            for t3 in range(t2 + 1, degree_bound + 1):
                if partial == residues[t3 - 1]:
                    found.append(Weight4Multiple(t1, t2, t3))
    found.sort(key=lambda m: (m.t3, m.t2, m.t1))
    return MultipleSearchReport(modulus=modulus, degree_bound=degree_bound,
                                found=tuple(found),
                                expected=expected_count(deg, degree_bound))

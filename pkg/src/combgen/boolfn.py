"""Spectral analysis of Boolean functions used as combining functions.

Truth tables are numpy uint8 arrays of length 2**n.  Entry x holds f(x)
where bit j of the index x is input number j (LSB first).  Every spectral
quantity here is an exact integer, and probabilities are kept as integer
numerators over a power-of-two denominator, so results can be compared
bit-for-bit against brute-force enumeration.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvariantError, ValidationError

# Largest slice (in elements) touched by one vectorised butterfly pass.
# Keeps transform temporaries bounded for gigabyte-sized tables.
_FWHT_SLAB = 1 << 20


def fwht(table):
    """Walsh-Hadamard transform in place, k * 2**k butterfly operations.

    Accepts a numpy integer array (transformed in place, also returned)
    or a plain list of Python ints (exact, no overflow).  The length must
    be a power of two.  Applying the transform twice multiplies the
    original table by its length.  Numpy callers pick a dtype wide enough
    for the intermediate sums; nothing here checks for overflow.
    """
    size = len(table)
    if size == 0 or size & (size - 1):
        raise ValidationError(f"table length {size} is not a power of two")
    if isinstance(table, np.ndarray):
        return _fwht_array(table)
    h = 1
    while h < size:
        for start in range(0, size, 2 * h):
            for i in range(start, start + h):
                x, y = table[i], table[i + h]
                table[i] = x + y
                table[i + h] = x - y
        h *= 2
    return table


def _fwht_array(a):
    if a.ndim != 1:
        raise ValidationError("expected a one-dimensional array")
    size = a.size
    h = 1
    while h < size:
        view = a.reshape(-1, 2, h)
        rows = view.shape[0]
        rows_per = max(1, _FWHT_SLAB // h)
        for r0 in range(0, rows, rows_per):
            x = view[r0:r0 + rows_per, 0, :]
            y = view[r0:r0 + rows_per, 1, :]
            diff = x - y
            x += y
            y[:] = diff
        h <<= 1
    return a


@dataclass(frozen=True, eq=False)
class BooleanFunction:
    """An n-variable Boolean function stored as a truth table."""

    n: int
    table: np.ndarray

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValidationError(f"bad arity {self.n!r}")
        tbl = np.asarray(self.table)
        if tbl.shape != (1 << self.n,):
            raise ValidationError(
                f"table has {tbl.size} entries, expected {1 << self.n}")
        values = np.unique(tbl)
        if not np.isin(values, (0, 1)).all():
            raise ValidationError("truth table entries must be 0 or 1")
        tbl = np.ascontiguousarray(tbl, dtype=np.uint8)
        tbl.setflags(write=False)
        object.__setattr__(self, "table", tbl)

    @classmethod
    def from_hex(cls, text):
        """Parse a truth table written as a hex string of 2**n bits.

        Hex digit 0 carries table entries 0..3 (LSB first), so the string
        has 2**n / 4 digits and n must be at least 2.
        """
        digits = text.strip().lower().removeprefix("0x")
        nbits = 4 * len(digits)
        if nbits == 0 or nbits & (nbits - 1):
            raise ValidationError(
                f"hex truth table has {nbits} bits, not a power of two")
        try:
            packed = int(digits, 16)
        except ValueError as exc:
            raise ValidationError(f"bad hex truth table: {exc}") from None
        n = nbits.bit_length() - 1
        table = np.array([(packed >> i) & 1 for i in range(nbits)],
                         dtype=np.uint8)
        return cls(n, table)

    def to_hex(self):
        packed = 0
        for i, bit in enumerate(self.table):
            packed |= int(bit) << i
        width = (1 << self.n) // 4
        return "0x" + format(packed, f"0{width}x")

    @property
    def weight(self):
        return int(self.table.sum())

    @property
    def is_balanced(self):
        return self.weight == 1 << (self.n - 1)

    def __call__(self, x):
        return int(self.table[x])

    def __eq__(self, other):
        if not isinstance(other, BooleanFunction):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.n, self.table.tobytes()))


@dataclass(frozen=True, eq=False)
class WalshSpectrum:
    """Correlations with all linear functions: W[y] = sum_x (-1)^(f(x)+x.y)."""

    n: int
    values: np.ndarray

    @property
    def max_abs(self):
        return int(np.abs(self.values).max())


@dataclass(frozen=True, eq=False)
class AutocorrSpectrum:
    """Autocorrelation AC[y] = sum_x (-1)^(f(x)+f(x+y)) and its peak."""

    n: int
    values: np.ndarray
    delta: int


@dataclass(frozen=True)
class PSpectrum:
    """Distribution of f(u1)+f(u2)+f(u3)+f(u4) over quadruples with fixed sum.

    numerators[x] / 2**(3n) is the probability that the four outputs sum
    to zero given that the four (uniform, independent) inputs sum to x.
    """

    n: int
    numerators: tuple

    @property
    def denominator(self):
        return 1 << (3 * self.n)

    def probability(self, x):
        return Fraction(self.numerators[x], self.denominator)

    @property
    def p0(self):
        return self.probability(0)

    def as_floats(self):
        return [num / self.denominator for num in self.numerators]


def walsh_spectrum(f):
    """Exact Walsh spectrum of a BooleanFunction, int64 values."""
    signs = 1 - 2 * f.table.astype(np.int64)
    fwht(signs)
    return WalshSpectrum(f.n, signs)


def autocorrelation(f):
    """Autocorrelation spectrum via the squared Walsh spectrum.

    Uses 2**n * AC = WHT(W**2), checking divisibility along the way.
    delta is the largest |AC[y]| over y != 0.
    """
    if f.n > 20:
        raise ValidationError("autocorrelation supported up to n = 20")
    w = walsh_spectrum(f).values
    squares = w * w
    fwht(squares)
    mask = (1 << f.n) - 1
    if np.any(squares & mask):
        raise InvariantError("autocorrelation sums not divisible by 2**n")
    ac = squares >> f.n
    delta = int(np.abs(ac[1:]).max()) if f.n >= 1 else 0
    return AutocorrSpectrum(f.n, ac, delta)


def p_spectrum(f):
    """Exact quadruple-sum probability spectrum.

    Computed from the fourth power of the Walsh spectrum:
    numerator[x] = 2**(3n-1) + WHT(W**4)[x] / 2**(n+1), all in exact
    Python integers.  Warns when f is unbalanced since the downstream
    bias statistics assume a balanced combining function.
    """
    if not f.is_balanced:
        warnings.warn("p_spectrum of an unbalanced function; "
                      "bias-based scoring assumes balance", stacklevel=2)
    n = f.n
    fourth = [int(v) ** 4 for v in walsh_spectrum(f).values]
    fwht(fourth)
    half = 1 << (3 * n - 1)
    divisor = 1 << (n + 1)
    numerators = []
    for s in fourth:
        q, r = divmod(s, divisor)
        if r:
            raise InvariantError("fourth-power spectrum sum not divisible "
                                 f"by 2**{n + 1}")
        num = half + q
        if not 0 <= num <= 1 << (3 * n):
            raise InvariantError("probability numerator out of range")
        numerators.append(num)
    return PSpectrum(n, tuple(numerators))


def p_spectrum_bruteforce(f):
    """Ground-truth P spectrum by enumerating all 2**(3n) input triples.

    The fourth input is forced by the required sum x, so for each x we
    count triples (u1, u2, u3) with f(u1)+f(u2)+f(u3)+f(u1+u2+u3+x) = 0.
    Cost grows as 2**(3n); intended as an oracle for n <= 8.
    """
    if f.n > 8:
        raise ValidationError("brute force limited to n <= 8 (cost 2**(3n))")
    n = f.n
    size = 1 << n
    u = np.arange(size, dtype=np.uint16)
    tbl = f.table
    x3 = u[:, None, None] ^ u[None, :, None] ^ u[None, None, :]
    s3 = (tbl[u][:, None, None] ^ tbl[u][None, :, None]
          ^ tbl[u][None, None, :])
    numerators = []
    for x in range(size):
        agree = s3 == tbl[x3 ^ x]
        numerators.append(int(np.count_nonzero(agree)))
    return PSpectrum(n, tuple(numerators))


@dataclass(frozen=True)
class PSpectrumBounds:
    """Exact comparison of a P spectrum against its guaranteed bounds."""

    n: int
    delta: int
    p0: Fraction
    p0_bound: Fraction
    min_gap: Fraction
    gap_bound: Fraction

    @property
    def ok(self):
        return self.p0 >= self.p0_bound and self.min_gap >= self.gap_bound


def check_p_spectrum_bounds(f, strict=False):
    """Check the two exact lower bounds on the quadruple-sum spectrum.

    For any f: P(0) >= 1/2 + 2**-(n+1), and for every u != 0 the gap
    P(0) - P(u) is at least (1 - delta/2**n)**2 / 2**(n+1) where delta is
    the autocorrelation peak.  Comparisons are exact rational arithmetic.
    With strict=True a violation raises InvariantError (it would mean a
    bug in the spectrum code, the bounds hold unconditionally).
    """
    spec = p_spectrum(f)
    n = f.n
    delta = autocorrelation(f).delta
    p0 = spec.p0
    p0_bound = Fraction(1, 2) + Fraction(1, 1 << (n + 1))
    num0 = spec.numerators[0]
    min_gap_num = min(num0 - spec.numerators[u] for u in range(1, 1 << n))
    min_gap = Fraction(min_gap_num, spec.denominator)
    gap_bound = Fraction(((1 << n) - delta) ** 2, 1 << (3 * n + 1))
    report = PSpectrumBounds(n, delta, p0, p0_bound, min_gap, gap_bound)
    if strict and not report.ok:
        raise InvariantError(f"P spectrum bound violated: {report}")
    return report


def resiliency_order(f):
    """Largest t such that the Walsh spectrum vanishes on weights 0..t.

    Returns -1 for an unbalanced function.
    """
    w = walsh_spectrum(f).values
    if w[0] != 0:
        return -1
    weights = np.bitwise_count(np.arange(1 << f.n, dtype=np.uint32))
    for t in range(1, f.n + 1):
        if np.any(w[weights == t]):
            return t - 1
    raise InvariantError("Walsh spectrum identically zero")


def nonlinearity(f):
    """Distance to the nearest affine function: 2**(n-1) - max|W|/2."""
    peak = walsh_spectrum(f).max_abs
    return (1 << (f.n - 1)) - peak // 2


def random_balanced_function(n, rng):
    """Uniformly random balanced function on n variables."""
    if n < 1:
        raise ValidationError("need n >= 1")
    table = np.zeros(1 << n, dtype=np.uint8)
    ones = rng.permutation(1 << n)[: 1 << (n - 1)]
    table[ones] = 1
    return BooleanFunction(n, table)

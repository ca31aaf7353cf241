"""GF(2)[X] arithmetic and LFSR combination-generator simulation.

Polynomials over GF(2) are plain Python ints: bit i is the coefficient
of X**i, so X**4 + X + 1 is 0b10011 = 0x13.  The zero polynomial has
degree -1 by convention.

LFSR convention: a register of length l with feedback polynomial P
(degree l) outputs s_0, s_1, ... and satisfies
s_{t+l} = sum_{i<l} c_i * s_{t+i} where c_i is coefficient i of P.
The initial state is the first l bits, packed LSB-first into an int, and
the state at time t is the window (s_t, ..., s_{t+l-1}).  Under this
convention s_t equals the GF(2) dot product of the initial state with
the coefficient vector of X**t mod P, which is what ties sequence bits
to linear forms of the initial state throughout the attack code.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .boolfn import BooleanFunction
from .errors import ValidationError


def poly_degree(p):
    """Degree of a polynomial, -1 for the zero polynomial."""
    return p.bit_length() - 1


def poly_mul(a, b):
    """Carry-less product in GF(2)[X]."""
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        a <<= 1
        b >>= 1
    return acc


def poly_divmod(a, m):
    """Quotient and remainder of a by m in GF(2)[X]."""
    if m == 0:
        raise ZeroDivisionError("polynomial division by zero")
    dm = poly_degree(m)
    q = 0
    while True:
        shift = poly_degree(a) - dm
        if shift < 0:
            return q, a
        q |= 1 << shift
        a ^= m << shift


def poly_rem(a, m):
    """Remainder of a modulo m in GF(2)[X]."""
    return poly_divmod(a, m)[1]


def poly_mulmod(a, b, m):
    """Product of a and b reduced modulo m."""
    return poly_rem(poly_mul(a, b), m)


def poly_gcd(a, b):
    """Greatest common divisor in GF(2)[X]."""
    while b:
        a, b = b, poly_rem(a, b)
    return a


def x_power_mod(t, m):
    """X**t mod m by square and multiply; m must have degree >= 1."""
    if t < 0:
        raise ValidationError(f"negative exponent {t}")
    if poly_degree(m) < 1:
        raise ValidationError("modulus must have degree >= 1")
    result = 1
    base = poly_rem(2, m)
    while t:
        if t & 1:
            result = poly_mulmod(result, base, m)
        base = poly_mulmod(base, base, m)
        t >>= 1
    return result


def poly_from_exponents(exponents):
    """Polynomial with a 1 coefficient at each listed exponent."""
    p = 0
    for e in exponents:
        p |= 1 << e
    return p


def _prime_factors(m):
    from sympy import factorint

    return sorted(factorint(m))


@lru_cache(maxsize=None)
def poly_is_primitive(p):
    """True iff p is primitive over GF(2).

    Tests that X has order exactly 2**l - 1 modulo p, which for degree l
    characterises primitivity (it forces irreducibility as well).  The
    degree must be in [1, 64] so that 2**l - 1 factors quickly.
    """
    l = poly_degree(p)
    if l < 1:
        raise ValidationError("degree must be at least 1")
    if l > 64:
        raise ValidationError("primitivity test limited to degree <= 64")
    if not p & 1:
        return False
    order = (1 << l) - 1
    if x_power_mod(order, p) != 1:
        return False
    return all(x_power_mod(order // q, p) != 1 for q in _prime_factors(order))


# --- residue tables -------------------------------------------------------
#
# X**t mod P for consecutive t, as an int64 array.  These tables back both
# bulk sequence generation and the attack's linear-form columns, so they
# are cached per polynomial and grown on demand.  Growth under a lock; the
# arrays themselves are immutable once published.

_residue_cache = {}
_residue_lock = threading.Lock()


def residue_powers(poly, count):
    """Array of X**t mod poly for t in [0, count), cached per poly.

    Requires 1 <= degree(poly) <= 62 so residues fit in int64.
    """
    l = poly_degree(poly)
    if not 1 <= l <= 62:
        raise ValidationError("residue tables need degree in [1, 62]")
    if count <= 0:
        return np.zeros(0, dtype=np.int64)
    with _residue_lock:
        cached = _residue_cache.get(poly)
        if cached is None or cached.size < count:
            grow_to = max(count, 2 * (cached.size if cached is not None else 256))
            fresh = np.empty(grow_to, dtype=np.int64)
            if cached is None:
                start, r = 0, 1
            else:
                start, r = cached.size, int(cached[-1])
                fresh[:start] = cached
            top = 1 << l
            low = poly & (top - 1)
            out = fresh[start:]
            if start == 0:
                out[0] = r
                out = out[1:]
            for i in range(out.size):
                r <<= 1
                if r & top:
                    r ^= top | low
                out[i] = r
            fresh.setflags(write=False)
            _residue_cache[poly] = fresh
            cached = fresh
    return cached[:count]


def clear_residue_cache():
    """Drop all cached residue tables (frees memory after large runs)."""
    with _residue_lock:
        _residue_cache.clear()


def sequence_bits(poly, length, init, count):
    """First `count` output bits of the LFSR, fast bulk path.

    Bit t is the parity of (X**t mod poly) AND init, per the convention
    in the module docstring.
    """
    if not 0 <= init < 1 << length:
        raise ValidationError(f"initial state out of range for length {length}")
    if poly_degree(poly) != length:
        raise ValidationError("feedback degree does not match length")
    r = residue_powers(poly, count)
    return (np.bitwise_count(r & init) & 1).astype(np.uint8)


@dataclass(frozen=True)
class LfsrSpec:
    """One register: length, primitive feedback polynomial, tap positions."""

    length: int
    feedback: int
    taps: tuple

    def __post_init__(self):
        object.__setattr__(self, "taps", tuple(int(t) for t in self.taps))
        if poly_degree(self.feedback) != self.length:
            raise ValidationError(
                f"feedback 0x{self.feedback:x} does not have degree {self.length}")
        if not poly_is_primitive(self.feedback):
            raise ValidationError(f"feedback 0x{self.feedback:x} is not primitive")
        if len(set(self.taps)) != len(self.taps):
            raise ValidationError("duplicate tap positions")
        for t in self.taps:
            if not 0 <= t < self.length:
                raise ValidationError(f"tap {t} outside register of length "
                                      f"{self.length}")


@dataclass(frozen=True)
class GeneratorSpec:
    """A combination generator: LFSRs, combining function, and wiring.

    wiring[j] = (register index, tap index) says which tapped bit feeds
    input j of the combining function.  Every tap of every register must
    be wired exactly once.
    """

    lfsrs: tuple
    function: BooleanFunction
    wiring: tuple

    def __post_init__(self):
        object.__setattr__(self, "lfsrs", tuple(self.lfsrs))
        object.__setattr__(
            self, "wiring", tuple((int(r), int(k)) for r, k in self.wiring))
        if not self.lfsrs:
            raise ValidationError("need at least one register")
        feedbacks = [lf.feedback for lf in self.lfsrs]
        if len(set(feedbacks)) != len(feedbacks):
            raise ValidationError("feedback polynomials must be distinct")
        for i in range(len(feedbacks)):
            for j in range(i + 1, len(feedbacks)):
                if poly_gcd(feedbacks[i], feedbacks[j]) != 1:
                    raise ValidationError(
                        f"feedback polynomials {i} and {j} share a factor")
        total_taps = sum(len(lf.taps) for lf in self.lfsrs)
        if self.function.n != total_taps:
            raise ValidationError(
                f"function arity {self.function.n} != total taps {total_taps}")
        if len(self.wiring) != total_taps:
            raise ValidationError("wiring must list every tap exactly once")
        seen = set()
        for r, k in self.wiring:
            if not 0 <= r < len(self.lfsrs):
                raise ValidationError(f"wiring names register {r}")
            if not 0 <= k < len(self.lfsrs[r].taps):
                raise ValidationError(f"wiring names tap {k} of register {r}")
            if (r, k) in seen:
                raise ValidationError(f"tap ({r}, {k}) wired twice")
            seen.add((r, k))

    @property
    def m(self):
        """Total state size in bits."""
        return sum(lf.length for lf in self.lfsrs)

    @property
    def n(self):
        """Arity of the combining function."""
        return self.function.n

    def state_offset(self, r):
        """Bit offset of register r's state inside the packed full state."""
        return sum(lf.length for lf in self.lfsrs[:r])

    def split_state(self, state):
        """Unpack a full m-bit state int into per-register ints."""
        if not 0 <= state < 1 << self.m:
            raise ValidationError(f"state out of range for {self.m} bits")
        parts = []
        for lf in self.lfsrs:
            parts.append(state & ((1 << lf.length) - 1))
            state >>= lf.length
        return parts

    def join_state(self, parts):
        """Pack per-register state ints into the full m-bit state."""
        if len(parts) != len(self.lfsrs):
            raise ValidationError("wrong number of register states")
        state = 0
        for lf, part in zip(reversed(self.lfsrs), reversed(parts)):
            if not 0 <= part < 1 << lf.length:
                raise ValidationError("register state out of range")
            state = (state << lf.length) | part
        return state

    def inputs_of_register(self, r):
        """List of (input index, tap position) pairs wired from register r."""
        return [(j, self.lfsrs[r].taps[k])
                for j, (rr, k) in enumerate(self.wiring) if rr == r]


@dataclass(frozen=True, eq=False)
class Keystream:
    """A run of generator output bits as a uint8 0/1 array."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or (bits.size and bits.max() > 1):
            raise ValidationError("keystream bits must be one-dimensional 0/1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def of(cls, iterable):
        return cls(np.fromiter(iterable, dtype=np.uint8))

    def __len__(self):
        return self.bits.size

    def __getitem__(self, i):
        got = self.bits[i]
        return Keystream(got) if isinstance(got, np.ndarray) else int(got)

    def __eq__(self, other):
        if isinstance(other, Keystream):
            return np.array_equal(self.bits, other.bits)
        return NotImplemented


def lfsr_sequence(spec, init, count):
    """Reference bit-at-a-time simulation of one register.

    Walks the recurrence s_{t+l} = sum c_i s_{t+i} directly; used as the
    semantic baseline that the residue-table fast path is tested against.
    """
    l = spec.length
    if not 0 <= init < 1 << l:
        raise ValidationError(f"initial state out of range for length {l}")
    mask = spec.feedback & ((1 << l) - 1)
    window = init
    out = np.empty(count, dtype=np.uint8)
    for t in range(count):
        out[t] = window & 1
        fb = (window & mask).bit_count() & 1
        window = (window >> 1) | (fb << (l - 1))
    return out


def keystream(spec, state, count):
    """Generator output z_t = f(wired tap bits), fast bulk path."""
    parts = spec.split_state(state)
    if count < 0:
        raise ValidationError("count must be nonnegative")
    x = np.zeros(count, dtype=np.int32)
    if count:
        for r, lf in enumerate(spec.lfsrs):
            wired = spec.inputs_of_register(r)
            if not wired:
                continue
            span = count + max(p for _, p in wired)
            bits = sequence_bits(lf.feedback, lf.length, parts[r], span)
            for j, p in wired:
                x |= bits[p:p + count].astype(np.int32) << j
    return Keystream(spec.function.table[x])


def keystream_reference(spec, state, count):
    """Plain-loop generator simulation, independent of the fast path."""
    parts = spec.split_state(state)
    seqs = []
    for r, lf in enumerate(spec.lfsrs):
        span = count + max((p for _, p in spec.inputs_of_register(r)),
                           default=0)
        seqs.append(lfsr_sequence(lf, parts[r], span))
    out = np.empty(count, dtype=np.uint8)
    for t in range(count):
        x = 0
        for j, (r, k) in enumerate(spec.wiring):
            x |= int(seqs[r][t + spec.lfsrs[r].taps[k]]) << j
        out[t] = spec.function.table[x]
    return Keystream(out)


def random_state(spec, rng, nonzero_registers=True):
    """Draw a uniform full state; by default reroll all-zero registers."""
    parts = []
    for lf in spec.lfsrs:
        part = int(rng.integers(0, 1 << lf.length))
        while nonzero_registers and part == 0:
            part = int(rng.integers(0, 1 << lf.length))
        parts.append(part)
    return spec.join_state(parts)

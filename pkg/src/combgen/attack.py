"""Staged recovery of combination-generator initial states.

One stage targets one register.  Weight-4 multiples of the product of
the not-yet-targeted registers' feedback polynomials turn keystream
positions (t, t+t1, t+t2, t+t3) into relations whose untargeted input
contributions cancel; already-recovered registers are handled by keeping
only relations whose known contribution is zero.  Each surviving
relation then says: if the candidate target state is right, the four
target-input sums are all zero with the quadruple-sum advantage of the
combining function, else (for this package's preset filters, and in
general up to the spectrum gap) essentially no advantage.

Scoring all 2**m1 candidates costs one pair of mask histograms and one
Walsh transform per relation class instead of a per-candidate pass; a
split parameter trades table memory for repeated accumulation passes.
The last register is recovered by direct search on a short window.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .boolfn import autocorrelation, fwht
from .errors import AttackExhaustedError, InvariantError, ValidationError
from .gf2 import Keystream, keystream, residue_powers, sequence_bits
from .multiples import (Weight4Multiple, find_weight4, product_modulus,
                        verify_multiple)

DEFAULT_CHUNK = 1 << 20
DEFAULT_BEAM = 8

# Printed with every multi-ordering comparison: the first-stage equation
# count N = m1 * 2**(2n + n1 + 1) scales with the length m1 of whichever
# register is targeted first, so orderings that shrink keystream (larger
# m2) pay for it in equations and search time (larger m1).
EQUATION_SCALING_NOTE = (
    "equation counts N = m1 * 2^(2n+n1+1) scale with the first target's "
    "length m1, so orderings differ in N as well as in keystream")


# --------------------------------------------------------------------------
# planning


@dataclass(frozen=True)
class StagePlan:
    """Cost model for recovering one register with the rest split into
    already-known registers and cancelled (group2) registers."""

    target: int
    known: tuple
    group2: tuple
    m1: int
    m2: int
    n1: int
    n2: int
    n_known: int
    is_final: bool
    samples_required: int
    equations_required: int
    samples_worstcase: int
    equations_worstcase: int
    expected_false_survivors: float
    min_multiple_degree: int
    keystream_single: int
    keystream_multi: int
    keystream_estimate: int
    attack_time_log2: float
    attack_memory_log2: float
    tradeoff_time_log2: float
    tradeoff_memory_log2: float


@dataclass(frozen=True)
class AttackPlan:
    order: tuple
    stages: tuple
    keystream_required: int
    notes: tuple
    warnings: tuple

    def describe(self):
        lines = [f"attack plan, target order {list(self.order)}"]
        for i, st in enumerate(self.stages, start=1):
            lines.append(
                f"stage {i}: register {st.target} "
                f"(m1={st.m1})  known={list(st.known)}  "
                f"cancelled={list(st.group2)} (m2={st.m2}, n2={st.n2})")
            if st.is_final:
                lines.append(
                    f"  direct search over 2^{st.m1} states on a window of "
                    f"{st.keystream_estimate} bits")
                continue
            lines.append(
                f"  samples S = {st.samples_required} = "
                f"2^{math.log2(st.samples_required):.2f}   "
                f"equations N = {st.equations_required} = "
                f"2^{math.log2(st.equations_required):.2f}   "
                f"(n1={st.n1})")
            lines.append(
                f"  worst-case spectrum-gap figures: S = "
                f"{st.samples_worstcase}, N = {st.equations_worstcase}")
            lines.append(
                f"  expected false survivors ~ "
                f"{st.expected_false_survivors:.2f}")
            lines.append(
                f"  keystream: one multiple -> {_bits_human(st.keystream_single)}; "
                f"many multiples -> {_bits_human(st.keystream_multi)}; "
                f"planned {_bits_human(st.keystream_estimate)}")
            lines.append(
                f"  search: time 2^{st.attack_time_log2:.2f}, "
                f"memory 2^{st.attack_memory_log2:.2f} counters; tradeoff "
                f"endpoint time 2^{st.tradeoff_time_log2:.2f}, "
                f"memory 2^{st.tradeoff_memory_log2:.2f}")
        lines.append(
            f"total keystream required: {_bits_human(self.keystream_required)}")
        for note in self.notes:
            lines.append(f"note: {note}")
        for warning in self.warnings:
            lines.append(f"warning: {warning}")
        return "\n".join(lines)


def _bits_human(bits):
    nbytes = bits / 8
    if nbytes >= 1 << 20:
        human = f"{nbytes / (1 << 20):.2f} MB"
    elif nbytes >= 1 << 10:
        human = f"{nbytes / (1 << 10):.0f} KB"
    else:
        human = f"{nbytes:.0f} B"
    return f"{bits} bits = 2^{math.log2(bits):.2f} ({human})"


def _stage_inputs(spec, register):
    return spec.inputs_of_register(register)


def plan(spec, order=None, delta=None):
    """Per-stage cost model for recovering the registers in `order`.

    `delta` is the autocorrelation peak of the combining function; when
    not given it is computed, and it feeds the worst-case sample counts
    (the guaranteed spectrum gap shrinks as (1 - delta/2**n)**2, so the
    sample cost grows by its inverse square).
    """
    if order is None:
        order = tuple(range(len(spec.lfsrs)))
    order = tuple(int(r) for r in order)
    if sorted(order) != list(range(len(spec.lfsrs))):
        raise ValidationError(f"order {order} is not a permutation of the "
                              f"registers")
    if delta is None:
        delta = autocorrelation(spec.function).delta
    n = spec.n
    blowup = (1 - delta / (1 << n)) ** -4 if delta < (1 << n) else math.inf
    stages = []
    warnings = []
    for idx, target in enumerate(order):
        known = tuple(order[:idx])
        group2 = tuple(order[idx + 1:])
        m1 = spec.lfsrs[target].length
        m2 = sum(spec.lfsrs[r].length for r in group2)
        n1 = len(_stage_inputs(spec, target))
        n2 = sum(len(_stage_inputs(spec, r)) for r in group2)
        n_known = sum(len(_stage_inputs(spec, r)) for r in known)
        is_final = not group2
        if n1 == 0:
            raise ValidationError(
                f"register {target} feeds no inputs and cannot be scored")
        samples = m1 << (2 * n + 1)
        equations = samples << n1
        false_surv = (1 << m1) * 2.0 ** (-samples / (1 << (2 * n + 1)))
        if is_final:
            est_single = est_multi = est = m1 + 40
            d_min = 0
        else:
            raw = equations << n_known
            d_min = math.ceil((6 * 2.0 ** m2) ** (1 / 3))
            est_single = raw + d_min
            est_multi = math.ceil((12 * raw * 2.0 ** m2) ** (1 / 4))
            est = min(est_single, est_multi)
        stages.append(StagePlan(
            target=target, known=known, group2=group2,
            m1=m1, m2=m2, n1=n1, n2=n2, n_known=n_known, is_final=is_final,
            samples_required=samples, equations_required=equations,
            samples_worstcase=math.ceil(samples * blowup),
            equations_worstcase=math.ceil(equations * blowup),
            expected_false_survivors=false_surv,
            min_multiple_degree=d_min,
            keystream_single=est_single, keystream_multi=est_multi,
            keystream_estimate=est,
            attack_time_log2=math.log2(m1) + n1 + m1,
            attack_memory_log2=float(m1),
            tradeoff_time_log2=math.log2(m1) + 2 * n + n1 + m1,
            tradeoff_memory_log2=math.log2(m1) + 2 * n + n1,
        ))
    warnings.append(
        "an all-zero register state gives no usable statistic; candidate 0 "
        "is never ranked and such keys are not recoverable")
    return AttackPlan(
        order=order, stages=tuple(stages),
        keystream_required=max(st.keystream_estimate for st in stages),
        notes=(EQUATION_SCALING_NOTE,), warnings=tuple(warnings))


def compare_orderings(spec, orders=None, delta=None):
    """First-stage cost rows for several target orderings.

    Returns (ordering, first StagePlan) pairs; by default all
    permutations (register count capped at 4 to keep that sane).
    """
    if orders is None:
        from itertools import permutations
        if len(spec.lfsrs) > 4:
            raise ValidationError("pass explicit orders for > 4 registers")
        orders = list(permutations(range(len(spec.lfsrs))))
    if delta is None:
        delta = autocorrelation(spec.function).delta
    return [(tuple(o), plan(spec, o, delta=delta).stages[0]) for o in orders]


# --------------------------------------------------------------------------
# relations


@dataclass(frozen=True, eq=False)
class EquationGroup:
    """All harvested relations of one weight-4 multiple.

    bases[i] is the first keystream position of relation i; classes[i]
    is the observed keystream sum over the four positions.
    """

    multiple: Weight4Multiple
    bases: np.ndarray
    classes: np.ndarray

    @property
    def count(self):
        return self.bases.size


@dataclass(frozen=True, eq=False)
class EquationSet:
    groups: tuple

    @property
    def total(self):
        return sum(g.count for g in self.groups)

    @property
    def class_counts(self):
        ones = sum(int(g.classes.sum()) for g in self.groups)
        return self.total - ones, ones

    def concat_classes(self):
        return np.concatenate([g.classes for g in self.groups])


def harvest_equations(ks, mults, max_equations=None):
    """Extract 4-position relations for each multiple from a keystream.

    Multiples are consumed in ascending degree; `max_equations` stops
    once that many relations were collected (the last group truncated).
    """
    bits = ks.bits if isinstance(ks, Keystream) else np.asarray(ks, np.uint8)
    length = bits.size
    if length >= 1 << 31:
        raise ValidationError("keystream beyond 2^31 bits is unsupported")
    groups = []
    collected = 0
    for mult in sorted(mults, key=lambda m: (m.t3, m.t2, m.t1)):
        room = length - mult.t3
        if room <= 0:
            continue
        if max_equations is not None:
            room = min(room, max_equations - collected)
            if room <= 0:
                break
        bases = np.arange(room, dtype=np.int32)
        classes = (bits[:room] ^ bits[mult.t1:mult.t1 + room]
                   ^ bits[mult.t2:mult.t2 + room]
                   ^ bits[mult.t3:mult.t3 + room])
        groups.append(EquationGroup(mult, bases, classes))
        collected += room
    if not groups:
        raise ValidationError("no relations: every multiple outruns the "
                              "keystream (need more keystream or lower-degree "
                              "multiples)")
    return EquationSet(tuple(groups))


def filter_known(spec, eqs, known):
    """Keep relations whose known-register contributions sum to zero.

    `known` maps register index -> recovered initial state.  Each wired
    input of a known register must individually cancel over the four
    relation positions, which holds for about 2**-n_known of them.
    """
    if not known:
        return eqs
    groups = []
    for g in eqs.groups:
        keep = np.ones(g.count, dtype=bool)
        span = int(g.bases[-1]) + g.multiple.t3 + 1 if g.count else 0
        for r, state in known.items():
            lf = spec.lfsrs[r]
            wired = spec.inputs_of_register(r)
            if not wired:
                continue
            max_tap = max(p for _, p in wired)
            bits = sequence_bits(lf.feedback, lf.length, state, span + max_tap)
            for _, p in wired:
                sums = np.zeros(g.count, dtype=np.uint8)
                for shift in g.multiple.shifts:
                    sums ^= bits[g.bases + (p + shift)]
                keep &= sums == 0
        if keep.any():
            groups.append(EquationGroup(g.multiple, g.bases[keep],
                                        np.ascontiguousarray(g.classes[keep])))
    if not groups:
        raise ValidationError("known-register filtering left no relations; "
                              "harvest more keystream or more multiples")
    return EquationSet(tuple(groups))


# --------------------------------------------------------------------------
# linear-form columns and mask accumulation


@dataclass(frozen=True, eq=False)
class GColumns:
    """Per-relation linear forms of the packed target state.

    columns[j][i] is the mask whose dot product with the candidate state
    gives target-wired input j's sum over relation i's four positions;
    classes[i] is the observed keystream sum.
    """

    m1: int
    n1: int
    targets: tuple
    columns: tuple
    classes: np.ndarray

    @property
    def count(self):
        return self.classes.size


def _target_layout(spec, targets):
    """(register, tap, state offset) per wired input, in input order."""
    targets = tuple(targets)
    offsets = {}
    pos = 0
    for r in targets:
        offsets[r] = pos
        pos += spec.lfsrs[r].length
    layout = []
    for r in targets:
        for j, p in spec.inputs_of_register(r):
            layout.append((j, r, p, offsets[r]))
    layout.sort()
    return pos, layout


def _column_chunk(spec, layout, mult, bases):
    """Linear-form masks for one slice of one group's relations."""
    cols = []
    span = int(bases.max()) + mult.t3 + 1 if bases.size else 1
    for _, r, p, offset in layout:
        table = residue_powers(spec.lfsrs[r].feedback, span + p)
        col = (table[bases + p] ^ table[bases + (p + mult.t1)]
               ^ table[bases + (p + mult.t2)] ^ table[bases + (p + mult.t3)])
        if offset:
            col <<= offset
        cols.append(col)
    return cols


def iter_column_chunks(spec, targets, eqs, chunk=DEFAULT_CHUNK):
    """Yield (columns, classes) slices without holding everything at once."""
    m1, layout = _target_layout(spec, targets)
    if m1 > 40:
        raise ValidationError("packed target state beyond 40 bits")
    if not layout:
        raise ValidationError("target registers feed no inputs")
    for g in eqs.groups:
        for lo in range(0, g.count, chunk):
            sl = slice(lo, min(lo + chunk, g.count))
            yield _column_chunk(spec, layout, g.multiple, g.bases[sl]), \
                g.classes[sl]


def build_g_columns(spec, targets, eqs, chunk=DEFAULT_CHUNK):
    """Materialise all linear-form columns for small stages and tests."""
    m1, layout = _target_layout(spec, targets)
    n1 = len(layout)
    if eqs.total * max(n1, 1) > 1 << 28:
        raise ValidationError("stage too large to materialise; use the "
                              "streaming accumulators")
    parts = [[] for _ in range(n1)]
    classes = []
    for cols, cls in iter_column_chunks(spec, targets, eqs, chunk):
        for j, col in enumerate(cols):
            parts[j].append(col)
        classes.append(cls)
    return GColumns(
        m1=m1, n1=n1, targets=tuple(targets),
        columns=tuple(np.concatenate(p) for p in parts),
        classes=np.concatenate(classes))


def _table_dtype(m1, total, n1):
    if m1 <= 24:
        return np.int64
    if total * (1 << n1) >= 1 << 31:
        raise ValidationError("relation count overflows int32 tables")
    return np.int32


def _accumulate_chunk(tables, cols, classes, n1, prefix=None, suffix_bits=0):
    """Add one slice's mask counts into the pair of tables.

    With a prefix, counts are signed by the parity of (prefix AND the
    mask's high bits) and indexed by the low bits: the memory tradeoff.
    """
    is0 = classes == 0
    split = (is0, ~is0)
    for y in range(1, 1 << n1):
        v = None
        for j in range(n1):
            if y >> j & 1:
                v = cols[j].copy() if v is None else v ^ cols[j]
        for b in (0, 1):
            vb = v[split[b]]
            if prefix is None:
                np.add.at(tables[b], vb, 1)
            else:
                hi = vb >> suffix_bits
                parity = (np.bitwise_count(hi & prefix) & 1).astype(
                    tables[b].dtype)
                np.add.at(tables[b], vb & ((1 << suffix_bits) - 1),
                          1 - 2 * parity)


def accumulate_tables(g, dtype=None, chunk=DEFAULT_CHUNK, workers=1):
    """Mask-count histograms (class 0 and class 1) from materialised
    columns; transforming them scores every candidate at once.

    workers > 1 accumulates chunk-private tables in threads and merges
    them, which is only allowed while the tables stay small.
    """
    if dtype is None:
        dtype = _table_dtype(g.m1, g.count, g.n1)
    size = 1 << g.m1
    tables = (np.zeros(size, dtype), np.zeros(size, dtype))
    is0 = g.classes == 0
    zeros = int(np.count_nonzero(is0))
    tables[0][0] += zeros
    tables[1][0] += g.count - zeros
    slices = [slice(lo, min(lo + chunk, g.count))
              for lo in range(0, g.count, chunk)]
    if workers > 1 and g.m1 <= 22 and len(slices) > 1:
        def work_private(sl):
            local = (np.zeros(size, dtype), np.zeros(size, dtype))
            _accumulate_chunk(local, [c[sl] for c in g.columns],
                              g.classes[sl], g.n1)
            return local

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for local in pool.map(work_private, slices):
                for dst, src in zip(tables, local):
                    dst += src
    else:
        for sl in slices:
            _accumulate_chunk(tables, [c[sl] for c in g.columns],
                              g.classes[sl], g.n1)
    return tables


def candidate_counts(w0, w1, n1, class_counts=None):
    """Turn mask-count tables into per-candidate (n0, n1) relation counts.

    Transforms in place (the tables are consumed).  Every transformed
    entry must be divisible by 2**n1 and land in [0, class count]; a
    violation means corrupted tables and raises.
    """
    counts = []
    mask = (1 << n1) - 1
    for b, w in enumerate((w0, w1)):
        fwht(w)
        for lo in range(0, w.size, 1 << 24):
            if np.any(w[lo:lo + (1 << 24)] & mask):
                raise InvariantError("transformed counts not divisible "
                                     "by 2**n1")
        w >>= n1
        if int(w.min()) < 0:
            raise InvariantError("negative relation count")
        if class_counts is not None and int(w.max()) > class_counts[b]:
            raise InvariantError("relation count exceeds class size")
        counts.append(w)
    return counts[0], counts[1]


@dataclass(frozen=True)
class CandidateScore:
    candidate: int
    n0: int
    n1: int

    @property
    def total(self):
        return self.n0 + self.n1

    @property
    def bias(self):
        return (self.n0 - self.n1) / self.total if self.total else 0.0

    @property
    def zscore(self):
        return ((self.n0 - self.n1) / math.sqrt(self.total)
                if self.total else 0.0)


def _rank_blocks(blocks, top_k, exclude_zero=True, slice_size=1 << 22):
    """Merge (offset, n0, n1) blocks into the top-k candidate list.

    Blocks are ranked in bounded slices so the float64 z temporaries
    never rival the count arrays themselves; a 2**27-entry block would
    otherwise cost several extra GB right when memory is tightest.
    """
    best = []
    for offset, n0, n1c in blocks:
        for lo in range(0, n0.size, slice_size):
            sl = slice(lo, min(lo + slice_size, n0.size))
            a, b = n0[sl], n1c[sl]
            tot = a + b
            with np.errstate(invalid="ignore", divide="ignore"):
                z = np.where(tot > 0,
                             (a - b) / np.sqrt(np.maximum(tot, 1)), -np.inf)
            if exclude_zero and offset == 0 and lo == 0:
                z[0] = -np.inf
            k = min(top_k, z.size)
            idx = np.argpartition(z, z.size - k)[z.size - k:]
            for i in idx:
                best.append((float(z[i]), int(offset + lo + i),
                             int(a[i]), int(b[i])))
            best.sort(key=lambda t: (-t[0], t[1]))
            best = best[:top_k]
        # drop the block before the generator builds the next one
        n0 = n1c = a = b = tot = z = None
    return [CandidateScore(candidate=c, n0=a, n1=b) for _, c, a, b in best]


def score_candidates(w0, w1, n1, top_k=DEFAULT_BEAM, exclude_zero=True,
                     class_counts=None):
    """Rank candidates from accumulated tables: by (n0-n1)/sqrt(n0+n1)
    descending, ties broken by candidate value.  Candidate 0 matches
    every relation and is excluded by default."""
    n0, n1c = candidate_counts(w0, w1, n1, class_counts)
    return _rank_blocks([(0, n0, n1c)], top_k, exclude_zero)


def candidate_counts_naive(g):
    """Oracle scorer: test each candidate against each relation directly."""
    if g.m1 > 22:
        raise ValidationError("naive scoring limited to m1 <= 22")
    size = 1 << g.m1
    n0 = np.zeros(size, dtype=np.int64)
    n1c = np.zeros(size, dtype=np.int64)
    is0 = g.classes == 0
    for u in range(size):
        selected = np.ones(g.count, dtype=bool)
        for col in g.columns:
            selected &= (np.bitwise_count(col & u) & 1) == 0
        n0[u] = np.count_nonzero(selected & is0)
        n1c[u] = np.count_nonzero(selected) - n0[u]
    return n0, n1c


def score_candidates_naive(g, top_k=DEFAULT_BEAM, exclude_zero=True):
    n0, n1c = candidate_counts_naive(g)
    return _rank_blocks([(0, n0, n1c)], top_k, exclude_zero)


def _tradeoff_blocks(chunks_factory, m1, n1, total, class_counts, split_bits,
                     dtype=None):
    """Yield (offset, n0, n1) per prefix of the split candidate space.

    chunks_factory() restarts the (columns, classes) chunk stream; one
    full pass runs per prefix, against tables of 2**(m1 - split_bits)
    entries."""
    if not 0 <= split_bits <= m1:
        raise ValidationError(f"split_bits must lie in [0, {m1}]")
    suffix_bits = m1 - split_bits
    if dtype is None:
        dtype = _table_dtype(suffix_bits, total, n1)
    size = 1 << suffix_bits
    for prefix in range(1 << split_bits):
        tables = (np.zeros(size, dtype), np.zeros(size, dtype))
        tables[0][0] += class_counts[0]
        tables[1][0] += class_counts[1]
        for cols, classes in chunks_factory():
            _accumulate_chunk(tables, cols, classes, n1,
                              prefix=prefix, suffix_bits=suffix_bits)
        n0, n1c = candidate_counts(*tables, n1, class_counts)
        yield prefix << suffix_bits, n0, n1c


def candidate_counts_tradeoff(g, split_bits, chunk=DEFAULT_CHUNK):
    """Same counts as candidate_counts(accumulate_tables(g)) using
    2**split_bits accumulation passes over smaller tables."""
    if g.m1 > 26:
        raise ValidationError("materialising counts limited to m1 <= 26")
    n0 = np.empty(1 << g.m1, dtype=np.int64)
    n1c = np.empty(1 << g.m1, dtype=np.int64)

    def chunks():
        for lo in range(0, g.count, chunk):
            sl = slice(lo, lo + chunk)
            yield [c[sl] for c in g.columns], g.classes[sl]

    is0 = int(np.count_nonzero(g.classes == 0))
    for offset, a, b in _tradeoff_blocks(chunks, g.m1, g.n1, g.count,
                                         (is0, g.count - is0), split_bits):
        n0[offset:offset + a.size] = a
        n1c[offset:offset + b.size] = b
    return n0, n1c


def score_candidates_tradeoff(g, split_bits, top_k=DEFAULT_BEAM,
                              exclude_zero=True, chunk=DEFAULT_CHUNK):
    def chunks():
        for lo in range(0, g.count, chunk):
            sl = slice(lo, lo + chunk)
            yield [c[sl] for c in g.columns], g.classes[sl]

    is0 = int(np.count_nonzero(g.classes == 0))
    blocks = _tradeoff_blocks(chunks, g.m1, g.n1, g.count,
                              (is0, g.count - is0), split_bits)
    return _rank_blocks(blocks, top_k, exclude_zero)


# --------------------------------------------------------------------------
# direct search for the last register


def final_direct_search(spec, ks, known, window_extra=40):
    """Recover the one remaining register by filtering all its states.

    Uses a window of length + window_extra keystream bits; each wrong
    state survives a bit only with the function's agreement probability,
    so the expected number of false survivors is far below one.  Returns
    the surviving states, best matches first.
    """
    bits = ks.bits if isinstance(ks, Keystream) else np.asarray(ks, np.uint8)
    unknown = [r for r in range(len(spec.lfsrs)) if r not in known]
    if len(unknown) != 1:
        raise ValidationError(f"direct search needs exactly one unknown "
                              f"register, got {unknown}")
    r_open = unknown[0]
    lf = spec.lfsrs[r_open]
    if lf.length > 26:
        raise ValidationError("direct search enumerates 2**length states; "
                              "limited to length <= 26")
    window = min(bits.size, lf.length + window_extra)
    if window < lf.length:
        raise ValidationError("window shorter than the register")
    open_inputs = spec.inputs_of_register(r_open)
    max_tap = max((p for _, p in open_inputs), default=0)
    known_x = np.zeros(window, dtype=np.int32)
    for r, state in known.items():
        lfk = spec.lfsrs[r]
        wired = spec.inputs_of_register(r)
        if not wired:
            continue
        seq = sequence_bits(lfk.feedback, lfk.length, state,
                            window + max(p for _, p in wired))
        for j, p in wired:
            known_x += seq[p:p + window].astype(np.int32) << j
    table = residue_powers(lf.feedback, window + max_tap)
    alive = np.arange(1 << lf.length, dtype=np.int64)
    for t in range(window):
        x = np.full(alive.size, known_x[t], dtype=np.int32)
        for j, p in open_inputs:
            bit = (np.bitwise_count(alive & int(table[t + p])) & 1)
            x |= bit.astype(np.int32) << j
        alive = alive[spec.function.table[x] == bits[t]]
        if alive.size == 0:
            break
    return [int(v) for v in alive]


# --------------------------------------------------------------------------
# full attack driver


@dataclass(frozen=True)
class StageReport:
    stage: int
    target: int
    known: dict
    multiples: tuple
    relations_raw: int
    relations_used: int
    candidates: tuple
    seconds: float
    warnings: tuple = ()


@dataclass
class AttackResult:
    success: bool
    state: int | None
    order: tuple
    reports: list = field(default_factory=list)
    backtracks: int = 0
    seconds: float = 0.0


def _choose_multiples(spec, stage, ks_len, supplied, raw_target):
    """Pick enough verified multiples, lowest degree first."""
    group = [spec.lfsrs[r].feedback for r in stage.group2]
    modulus = product_modulus(group)
    if supplied:
        mults = sorted(
            (m for m in supplied if verify_multiple(m, group)),
            key=lambda m: (m.t3, m.t2, m.t1))
    else:
        # the collision scan needs distinct residues, so never look past
        # the order of X modulo the product
        period = math.lcm(*((1 << spec.lfsrs[r].length) - 1
                            for r in stage.group2))
        cap = min(ks_len - 1, period)
        bound = math.ceil((6 * 12 * 2.0 ** stage.m2) ** (1 / 3))
        bound = max(bound, 8)
        found = ()
        while True:
            bound = min(bound, cap)
            found = find_weight4(modulus, bound).found
            available = sum(ks_len - m.t3 for m in found)
            if available >= raw_target or bound >= cap:
                break
            bound *= 2
        mults = list(found)
    chosen = []
    available = 0
    for m in mults:
        if m.t3 >= ks_len:
            continue
        chosen.append(m)
        available += ks_len - m.t3
        if available >= raw_target:
            break
    if not chosen:
        raise ValidationError(
            f"no usable weight-4 multiple of modulus 0x{modulus:x} below the "
            f"keystream length; supply caches or more keystream")
    return chosen, available


def search_stage_multiples(spec, stage, ks_len, raw_margin=1.25):
    """Search enough weight-4 multiples for one planned stage.

    Returns (modulus, multiples); the same selection run_attack makes
    when none are supplied, exposed so callers can persist it.
    """
    if stage.is_final:
        raise ValidationError("the final stage uses direct search, not "
                              "multiples")
    raw_target = math.ceil(stage.equations_required
                           * (1 << stage.n_known) * raw_margin)
    group = [spec.lfsrs[r].feedback for r in stage.group2]
    modulus = product_modulus(group)
    chosen, _ = _choose_multiples(spec, stage, ks_len, None, raw_target)
    return modulus, chosen


def _score_stage(spec, stage, eqs, top_k, split_bits, chunk, workers):
    """Rank the stage's candidates, streaming or via full tables."""
    targets = (stage.target,)
    m1, layout = _target_layout(spec, targets)
    n1 = len(layout)
    zeros, ones = eqs.class_counts
    if split_bits:
        def chunks():
            return iter_column_chunks(spec, targets, eqs, chunk)

        blocks = _tradeoff_blocks(chunks, m1, n1, eqs.total,
                                  (zeros, ones), split_bits)
        return _rank_blocks(blocks, top_k)
    if workers > 1 and m1 <= 22 and eqs.total * max(n1, 1) <= 1 << 28:
        g = build_g_columns(spec, targets, eqs, chunk)
        tables = accumulate_tables(g, chunk=chunk, workers=workers)
        return score_candidates(*tables, n1, top_k=top_k,
                                class_counts=(zeros, ones))
    dtype = _table_dtype(m1, eqs.total, n1)
    size = 1 << m1
    tables = (np.zeros(size, dtype), np.zeros(size, dtype))
    tables[0][0] += zeros
    tables[1][0] += ones
    for cols, classes in iter_column_chunks(spec, targets, eqs, chunk):
        _accumulate_chunk(tables, cols, classes, n1)
    return score_candidates(*tables, n1, top_k=top_k,
                            class_counts=(zeros, ones))


def run_attack(spec, ks, attack_plan=None, multiples=None, top_k=DEFAULT_BEAM,
               split_bits=0, chunk=DEFAULT_CHUNK, workers=1,
               raw_margin=1.25):
    """Recover the full initial state from a keystream.

    Stages follow the plan's order; at each stage the top_k candidates
    are tried depth-first, so a stage-1 miss can be repaired by
    backtracking.  `multiples` optionally maps a stage index to a list
    of Weight4Multiple to use instead of searching.  The recovered state
    must regenerate the keystream exactly or the branch is rejected.
    """
    if attack_plan is None:
        attack_plan = plan(spec, tuple(range(len(spec.lfsrs))))
    bits = ks.bits if isinstance(ks, Keystream) else np.asarray(ks, np.uint8)
    ks = Keystream(bits)
    started = time.perf_counter()
    result = AttackResult(success=False, state=None, order=attack_plan.order)

    def solve(idx, known):
        stage = attack_plan.stages[idx]
        t0 = time.perf_counter()
        if stage.is_final:
            survivors = final_direct_search(spec, ks, known)
            result.reports.append(StageReport(
                stage=idx, target=stage.target, known=dict(known),
                multiples=(), relations_raw=0, relations_used=0,
                candidates=tuple(survivors[:top_k]),
                seconds=time.perf_counter() - t0))
            for cand in survivors:
                parts = dict(known)
                parts[stage.target] = cand
                state = spec.join_state([parts[r]
                                         for r in range(len(spec.lfsrs))])
                if keystream(spec, state, len(ks)) == ks:
                    return state
            return None
        raw_target = math.ceil(stage.equations_required
                               * (1 << stage.n_known) * raw_margin)
        supplied = (multiples or {}).get(idx)
        chosen, _ = _choose_multiples(spec, stage, len(ks), supplied,
                                      raw_target)
        eqs = harvest_equations(ks, chosen, max_equations=raw_target)
        raw = eqs.total
        eqs = filter_known(spec, eqs, known)
        warnings = ()
        if eqs.total < stage.equations_required:
            warnings = (f"only {eqs.total} relations survive filtering, "
                        f"below the planned {stage.equations_required}",)
        ranked = _score_stage(spec, stage, eqs, top_k, split_bits, chunk,
                              workers)
        result.reports.append(StageReport(
            stage=idx, target=stage.target, known=dict(known),
            multiples=tuple(chosen), relations_raw=raw,
            relations_used=eqs.total, candidates=tuple(ranked),
            seconds=time.perf_counter() - t0, warnings=warnings))
        for rank, cand in enumerate(ranked):
            if rank:
                result.backtracks += 1
            found = solve(idx + 1, {**known, stage.target: cand.candidate})
            if found is not None:
                return found
        return None

    state = solve(0, {})
    result.seconds = time.perf_counter() - started
    if state is None:
        raise AttackExhaustedError(
            "all candidate branches rejected", result)
    result.success = True
    result.state = state
    return result


def candidates_tsv(scores):
    """Candidate table as tab-separated text for reports and logs."""
    lines = ["candidate\tn0\tn1\tbias\tzscore"]
    for s in scores:
        lines.append(f"0x{s.candidate:x}\t{s.n0}\t{s.n1}\t"
                     f"{s.bias:.6f}\t{s.zscore:.3f}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# diagnostics


def zero_sum_fraction(spec, state, eqs):
    """Fraction of relations whose full input vectors sum to zero.

    With the true state and multiples of every register's feedback
    polynomial this is exactly 1.0; with multiples of only a subgroup it
    drops to about 2**-(inputs wired from uncancelled registers).
    """
    parts = spec.split_state(state)
    total = 0
    nonzero = 0
    for g in eqs.groups:
        span = int(g.bases[-1]) + g.multiple.t3 + 1 if g.count else 0
        bad = np.zeros(g.count, dtype=bool)
        for r, lf in enumerate(spec.lfsrs):
            wired = spec.inputs_of_register(r)
            if not wired:
                continue
            seq = sequence_bits(lf.feedback, lf.length, parts[r],
                                span + max(p for _, p in wired))
            for _, p in wired:
                sums = np.zeros(g.count, dtype=np.uint8)
                for shift in g.multiple.shifts:
                    sums ^= seq[g.bases + (p + shift)]
                bad |= sums != 0
        total += g.count
        nonzero += int(np.count_nonzero(bad))
    if total == 0:
        raise ValidationError("empty relation set")
    return 1.0 - nonzero / total

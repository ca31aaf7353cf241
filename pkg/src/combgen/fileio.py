"""On-disk formats: generator specs, keystreams, multiple caches.

Generator specs are JSON.  Keystreams are a small binary container:
magic "CGKS", a version byte (currently 1), the bit count as 8-byte
little-endian, then the bits packed LSB-first per byte.  Multiple caches
are line-oriented text with a header naming the modulus and the searched
degree bound, one "t1 t2 t3" triple per line in ascending degree.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .boolfn import BooleanFunction
from .errors import ValidationError
from .gf2 import GeneratorSpec, Keystream, LfsrSpec, poly_degree
from .multiples import MultipleSearchReport, Weight4Multiple, expected_count

KEYSTREAM_MAGIC = b"CGKS"
KEYSTREAM_VERSION = 1


def _parse_poly(text):
    try:
        return int(text, 16) if isinstance(text, str) else int(text)
    except (TypeError, ValueError):
        raise ValidationError(f"bad polynomial value {text!r}") from None


def generator_spec_to_dict(spec):
    return {
        "lfsrs": [
            {"length": lf.length, "feedback": f"0x{lf.feedback:x}",
             "taps": list(lf.taps)}
            for lf in spec.lfsrs
        ],
        "function": {"n": spec.function.n,
                     "truth_table": spec.function.to_hex()},
        "wiring": [list(pair) for pair in spec.wiring],
    }


def generator_spec_from_dict(data):
    try:
        lfsrs = tuple(
            LfsrSpec(length=int(entry["length"]),
                     feedback=_parse_poly(entry["feedback"]),
                     taps=tuple(int(t) for t in entry["taps"]))
            for entry in data["lfsrs"])
        fn = data["function"]
        function = BooleanFunction.from_hex(fn["truth_table"])
        if function.n != int(fn["n"]):
            raise ValidationError(
                f"truth table length implies n={function.n}, header says "
                f"{fn['n']}")
        wiring = tuple((int(r), int(k)) for r, k in data["wiring"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed generator spec: {exc!r}") from None
    return GeneratorSpec(lfsrs=lfsrs, function=function, wiring=wiring)


def save_generator_spec(path, spec):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(generator_spec_to_dict(spec), fh, indent=2)
        fh.write("\n")


def load_generator_spec(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"bad spec JSON: {exc}") from None
    return generator_spec_from_dict(data)


def save_keystream(path, ks):
    bits = ks.bits if isinstance(ks, Keystream) else np.asarray(ks, np.uint8)
    header = KEYSTREAM_MAGIC + bytes([KEYSTREAM_VERSION])
    header += struct.pack("<Q", bits.size)
    payload = np.packbits(bits, bitorder="little").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_keystream(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 13 or blob[:4] != KEYSTREAM_MAGIC:
        raise ValidationError(f"{path}: not a keystream file")
    if blob[4] != KEYSTREAM_VERSION:
        raise ValidationError(f"{path}: unsupported keystream version "
                              f"{blob[4]}")
    (nbits,) = struct.unpack("<Q", blob[5:13])
    payload = blob[13:]
    if len(payload) != (nbits + 7) // 8:
        raise ValidationError(f"{path}: payload is {len(payload)} bytes, "
                              f"expected {(nbits + 7) // 8}")
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8),
                         count=nbits, bitorder="little")
    return Keystream(bits)


def save_multiples_cache(path, report):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# modulus 0x{report.modulus:x} "
                 f"max-degree {report.degree_bound}\n")
        for m in report.found:
            fh.write(f"{m.t1} {m.t2} {m.t3}\n")


def load_multiples_cache(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("# modulus "):
        raise ValidationError(f"{path}: missing multiple-cache header")
    fields = lines[0].split()
    try:
        modulus = _parse_poly(fields[2])
        if fields[3] != "max-degree":
            raise ValueError
        bound = int(fields[4])
    except (IndexError, ValueError):
        raise ValidationError(f"{path}: bad header {lines[0]!r}") from None
    found = []
    for ln in lines[1:]:
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        try:
            t1, t2, t3 = (int(v) for v in ln.split())
        except ValueError:
            raise ValidationError(f"{path}: bad line {ln!r}") from None
        found.append(Weight4Multiple(t1, t2, t3))
    found.sort(key=lambda m: (m.t3, m.t2, m.t1))
    return MultipleSearchReport(
        modulus=modulus, degree_bound=bound, found=tuple(found),
        expected=expected_count(poly_degree(modulus), bound))

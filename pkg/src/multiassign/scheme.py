"""Split byte secrets among participants through an assignment map, and put them back together.

Byte secrets are turned into field symbols as follows: prefix the secret with
its length as a 4-byte big-endian integer, read the result as a bit string,
cut it into ``b``-bit symbols with ``b = floor(log2 p)`` (zero-padding the
last one), then append zero symbols up to a multiple of ``L``.

Bundle wire format (all integers big-endian, ``varint`` = unsigned LEB128)::

    b"MASB" | version (1 byte) | p (8 bytes) | t, L, m, blocks (varints)
    | map digest (16 bytes) | participant (varint) | share count (varint)
    | per share: index (varint) | blocks residues of ceil(bits(p)/8) bytes
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction

from . import crypto
from .access import RampAccessStructure, format_set, ramp_min_max
from .exceptions import BudgetExceeded, FieldError, MapError, ReconstructionRefused
from .maps import EXACT, RELAXED, verify
from .report import Report

MAGIC = b"MASB"
VERSION = 1
LENGTH_BYTES = 4


def map_digest(amap):
    """First 16 bytes of the SHA-256 of the map's canonical JSON."""
    doc = json.dumps(amap.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(doc.encode()).digest()[:16]


def symbol_bits(p):
    return p.bit_length() - 1


def encode_secret(secret, p, L=1):
    """Length-prefixed bit packing of ``secret`` into residues mod ``p``."""
    if not secret:
        raise FieldError("secret must be nonempty")
    if len(secret) >= 1 << (8 * LENGTH_BYTES):
        raise FieldError("secret too long for the 4-byte length prefix")
    b = symbol_bits(p)
    if b < 1:
        raise FieldError(f"GF({p}) is too small to carry bits")
    data = len(secret).to_bytes(LENGTH_BYTES, "big") + bytes(secret)
    nbits = 8 * len(data)
    count = -(-nbits // b)
    value = int.from_bytes(data, "big") << (count * b - nbits)
    mask = (1 << b) - 1
    symbols = [(value >> (b * (count - 1 - k))) & mask for k in range(count)]
    symbols += [0] * (-len(symbols) % L)
    return symbols


def decode_secret(symbols, p):
    b = symbol_bits(p)
    value = 0
    for s in symbols:
        if not 0 <= s < 1 << b:
            raise FieldError("symbol outside the packing range; wrong field or corrupted shares")
        value = (value << b) | s
    nbits = b * len(symbols)
    nbytes = nbits // 8
    data = (value >> (nbits - 8 * nbytes)).to_bytes(nbytes, "big") if nbytes else b""
    if len(data) < LENGTH_BYTES:
        raise FieldError("decoded stream is shorter than its length prefix")
    length = int.from_bytes(data[:LENGTH_BYTES], "big")
    body = data[LENGTH_BYTES:]
    if length > len(body) or any(body[length:]):
        raise FieldError("decoded stream does not match its length prefix")
    return body[:length]


@dataclass(frozen=True)
class SchemeHeader:
    p: int
    t: int
    L: int
    m: int
    blocks: int
    digest: bytes


@dataclass(frozen=True)
class ShareBundle:
    """Everything participant ``participant`` receives: its primitive shares and the scheme header."""

    participant: int
    header: SchemeHeader
    shares: tuple


def distribute(secret, amap, structure=None, p=crypto.DEFAULT_PRIME, rng=None, mode=EXACT):
    """Split ``secret`` (bytes) into one bundle per participant.

    Primitive share ``w`` of the map is the evaluation at point ``w + 1``.
    When ``structure`` is given the map is verified against it first.
    """
    if structure is not None:
        rep = verify(amap, structure, mode)
        if not rep.ok:
            raise MapError("map does not realize the structure:\n" + str(rep))
    symbols = encode_secret(secret, p, amap.L)
    prims = crypto.ramp_split(symbols, amap.t, amap.L, amap.m, p, rng)
    header = SchemeHeader(p, amap.t, amap.L, amap.m, len(symbols) // amap.L, map_digest(amap))
    return [
        ShareBundle(i, header, tuple(prims[w] for w in sorted(amap.assign[i])))
        for i in range(amap.n)
    ]


def pooled(bundles):
    """Distinct primitive shares across ``bundles``, keyed by index, with header checks."""
    headers = {b.header for b in bundles}
    if len(headers) > 1:
        raise FieldError("bundles come from different schemes")
    pool = {}
    for b in bundles:
        for s in b.shares:
            if s.modulus != b.header.p or len(s.payload) != b.header.blocks:
                raise FieldError(f"share {s.index} of participant {b.participant + 1} is malformed")
            if not 1 <= s.index <= b.header.m:
                raise FieldError(f"share index {s.index} outside 1..{b.header.m}")
            prev = pool.get(s.index)
            if prev is not None and prev.payload != s.payload:
                raise FieldError(f"conflicting copies of primitive share {s.index}")
            pool[s.index] = s
    return pool


def reconstruct(bundles, amap=None):
    """Recover the secret, or raise :class:`ReconstructionRefused` below the threshold."""
    bundles = list(bundles)
    if not bundles:
        raise ReconstructionRefused(0, amap.t if amap is not None else 1)
    header = bundles[0].header
    if amap is not None and map_digest(amap) != header.digest:
        raise FieldError("bundles were produced for a different assignment map")
    pool = pooled(bundles)
    if len(pool) < header.t:
        raise ReconstructionRefused(len(pool), header.t)
    symbols = crypto.ramp_reconstruct(list(pool.values()), header.t, header.L)
    return decode_secret(symbols, header.p)


# Serialization ------------------------------------------------------------

def _varint(n):
    if n < 0:
        raise ValueError("varints are unsigned")
    out = bytearray()
    while True:
        byte = n & 0x7F
        n >>= 7
        if n:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


class _Reader:
    def __init__(self, data):
        self.data = memoryview(data)
        self.pos = 0

    def take(self, k):
        if self.pos + k > len(self.data):
            raise FieldError("bundle is truncated")
        chunk = bytes(self.data[self.pos:self.pos + k])
        self.pos += k
        return chunk

    def varint(self):
        shift = value = 0
        while True:
            byte = self.take(1)[0]
            value |= (byte & 0x7F) << shift
            if not byte & 0x80:
                return value
            shift += 7
            if shift > 63:
                raise FieldError("varint too long")


def residue_width(p):
    return -(-p.bit_length() // 8)


def serialize_bundle(bundle):
    h = bundle.header
    width = residue_width(h.p)
    out = bytearray(MAGIC)
    out.append(VERSION)
    out += h.p.to_bytes(8, "big")
    for v in (h.t, h.L, h.m, h.blocks):
        out += _varint(v)
    out += h.digest
    out += _varint(bundle.participant)
    out += _varint(len(bundle.shares))
    for s in bundle.shares:
        out += _varint(s.index)
        for v in s.payload:
            out += v.to_bytes(width, "big")
    return bytes(out)


def deserialize_bundle(data):
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise FieldError("not a share bundle (bad magic)")
    version = r.take(1)[0]
    if version != VERSION:
        raise FieldError(f"unsupported bundle version {version}")
    p = int.from_bytes(r.take(8), "big")
    crypto.check_prime(p)
    t, L, m, blocks = (r.varint() for _ in range(4))
    header = SchemeHeader(p, t, L, m, blocks, r.take(16))
    participant = r.varint()
    count = r.varint()
    width = residue_width(p)
    shares = []
    for _ in range(count):
        index = r.varint()
        payload = tuple(int.from_bytes(r.take(width), "big") for _ in range(blocks))
        shares.append(crypto.PrimitiveShare(index, payload, p))
    if r.pos != len(r.data):
        raise FieldError("trailing bytes after bundle")
    return ShareBundle(participant, header, tuple(shares))


# End-to-end verification --------------------------------------------------

def _targets(amap, s, mode):
    """``(mask, required ratio, exact?)`` for every representative set."""
    out = []
    if isinstance(s, RampAccessStructure):
        fams = ramp_min_max(s)
        L = s.L
        out += [(a, Fraction(0), True) for a in fams[L][0]]
        for j in range(1, L):
            for a in sorted(set(fams[j][0]) | set(fams[j][1])):
                out.append((a, Fraction(L - j, L), mode == EXACT))
        out += [(a, Fraction(1), True) for a in fams[0][1]]
    else:
        out += [(a, Fraction(0), True) for a in s.qualified_min]
        out += [(a, Fraction(1), True) for a in s.forbidden_max]
    return out


def verify_scheme(amap, s, mode=EXACT, oracle_budget=crypto.ORACLE_BUDGET, prime=None):
    """Combinatorial check of the map, then exhaustive entropy checks over a tiny field.

    For each representative set, the ``w`` primitive shares it pools are
    relabelled onto points ``1..min(w, t)`` (threshold schemes are symmetric
    in their evaluation points, and ``t`` points already fix everything) and
    the entropy ratio is computed exactly.  Sets whose field enumeration would
    exceed ``oracle_budget`` are skipped and listed in the notes.
    """
    if mode not in (EXACT, RELAXED):
        raise ValueError(f"mode must be {EXACT!r} or {RELAXED!r}")
    rep = verify(amap, s, mode)
    if not rep.ok:
        return rep
    skipped = 0
    for a, want, exact in _targets(amap, s, mode):
        w = min(amap.count(a), amap.t)
        p = prime if prime is not None and prime >= w else crypto.next_prime(max(w - 1, 1))
        try:
            got = crypto.entropy_oracle(p, amap.t, amap.L, range(1, w + 1), oracle_budget)
        except BudgetExceeded:
            skipped += 1
            continue
        if (exact and got != want) or (not exact and got < want):
            rel = "=" if exact else ">="
            rep.violations.append(
                f"{format_set(a, s.names)}: entropy ratio {got}, need {rel} {want} (GF({p}))"
            )
    if skipped:
        rep.notes.append(f"oracle skipped {skipped} set(s) over the enumeration budget")
    return rep

"""Prime-field threshold and ramp schemes used to generate primitive shares.

A ``(t, m)`` threshold scheme hides each secret symbol in the constant term
of a random polynomial of degree ``t - 1``; a ``(t, L, m)`` ramp scheme puts
``L`` secret symbols in the ``L`` lowest coefficients, so each primitive
share is ``1/L`` the size of the secret block.  Share ``j`` is the evaluation
at the point ``j`` (``1..m``); point 0 would reveal the secret and is never
used.  Share ``p`` (only possible when ``m = p``) is the "point at infinity",
i.e. the leading coefficient.  Evaluations at ``1..p-1`` plus infinity form an
extended Reed-Solomon code, so any ``w`` of them leak exactly as much as any
other ``w``.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import BudgetExceeded, FieldError

DEFAULT_PRIME = 2**31 - 1
ORACLE_BUDGET = 10**7


def is_prime(p):
    """Deterministic Miller-Rabin, exact for every ``p < 3.3e24``."""
    if p < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if p % q == 0:
            return p == q
    d, r = p - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in small:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(r - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


def next_prime(n):
    """Smallest prime strictly greater than ``n``."""
    q = max(2, n + 1)
    while not is_prime(q):
        q += 1
    return q


def check_prime(p):
    if not isinstance(p, int) or not is_prime(p):
        raise FieldError(f"modulus must be prime, got {p!r}")


@dataclass(frozen=True)
class FieldElement:
    """An element of GF(p); arithmetic with plain ints coerces them into the field."""

    value: int
    modulus: int

    def __post_init__(self):
        if not 0 <= self.value < self.modulus:
            raise FieldError(f"{self.value} is not a residue mod {self.modulus}")

    @classmethod
    def of(cls, value, modulus):
        return cls(value % modulus, modulus)

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise FieldError("mixed moduli")
            return other.value
        if isinstance(other, int):
            return other % self.modulus
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else FieldElement((self.value + o) % self.modulus, self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else FieldElement((self.value - o) % self.modulus, self.modulus)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else FieldElement((o - self.value) % self.modulus, self.modulus)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else FieldElement(self.value * o % self.modulus, self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value % self.modulus, self.modulus)

    def inverse(self):
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse")
        return FieldElement(pow(self.value, -1, self.modulus), self.modulus)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * FieldElement(o, self.modulus).inverse()

    def __int__(self):
        return self.value


@dataclass(frozen=True)
class PrimitiveShare:
    """Evaluations at point ``index`` of every polynomial, one residue per block."""

    index: int
    payload: tuple
    modulus: int

    def __post_init__(self):
        object.__setattr__(self, "payload", tuple(int(v) for v in self.payload))
        if any(not 0 <= v < self.modulus for v in self.payload):
            raise FieldError(f"share {self.index} carries a value outside GF({self.modulus})")


def _residues(secret, p):
    out = []
    for s in secret:
        if isinstance(s, FieldElement):
            if s.modulus != p:
                raise FieldError("secret symbol over a different field")
            out.append(s.value)
        else:
            if not 0 <= s < p:
                raise FieldError(f"secret symbol {s} is not a residue mod {p}")
            out.append(int(s))
    return out


def _check_params(t, L, m, p):
    check_prime(p)
    if not 1 <= L <= t:
        raise FieldError(f"need 1 <= L <= t, got L={L}, t={t}")
    if t > m:
        raise FieldError(f"threshold t={t} exceeds share count m={m}")
    if m > p:
        raise FieldError(f"GF({p}) offers {p} evaluation points (1..{p - 1} and infinity), need m={m}")


def _monomials(x, t, p):
    """Row mapping the coefficient vector to the share at point ``x`` (``x = p`` is infinity)."""
    if x == p:
        return [0] * (t - 1) + [1]
    return [pow(x, k, p) for k in range(t)]


def _eval(coeffs, x, p):
    if x == p:
        return coeffs[-1] % p
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


def ramp_split(secret, t, L, m, p=DEFAULT_PRIME, rng=None):
    """Split symbols (a multiple of ``L``) into ``m`` shares, one polynomial per ``L`` symbols.

    Any ``t`` shares recover everything; ``w < t`` shares leave
    ``min(1, (t - w) / L)`` of the block's entropy.
    """
    _check_params(t, L, m, p)
    symbols = _residues(secret, p)
    if not symbols or len(symbols) % L:
        raise FieldError(f"secret must be a nonempty multiple of L={L} symbols")
    rng = rng or secrets.SystemRandom()
    payloads = [[] for _ in range(m)]
    for b in range(0, len(symbols), L):
        coeffs = symbols[b:b + L] + [rng.randrange(p) for _ in range(t - L)]
        for j in range(m):
            payloads[j].append(_eval(coeffs, j + 1, p))
    return [PrimitiveShare(j + 1, tuple(payloads[j]), p) for j in range(m)]


def shamir_split(secret, t, m, p=DEFAULT_PRIME, rng=None):
    """Ideal ``(t, m)`` threshold sharing of each symbol of ``secret``."""
    return ramp_split(secret, t, 1, m, p, rng)


def _interpolation_rows(xs, p, rows):
    """First ``rows`` rows of the inverse of the evaluation matrix on ``xs``.

    Row ``r`` gives coefficient ``a_r`` as a combination of the share values;
    for finite points these are the Lagrange basis coefficients.
    """
    t = len(xs)
    a = [_monomials(x, t, p) for x in xs]
    # Gauss-Jordan on [A^T | I] yields (A^T)^-1 = (A^-1)^T, whose columns are the rows we want.
    aug = [[a[k][c] for k in range(t)] + [int(c == j) for j in range(t)] for c in range(t)]
    for col in range(t):
        piv = next(r for r in range(col, t) if aug[r][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = pow(aug[col][col], -1, p)
        aug[col] = [v * inv % p for v in aug[col]]
        for r in range(t):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [(v - f * w) % p for v, w in zip(aug[r], aug[col])]
    inv_t = [row[t:] for row in aug]
    return [[inv_t[k][r] for r in range(rows)] for k in range(t)]


def _select(shares, t):
    if not shares:
        raise FieldError("no shares given")
    p = shares[0].modulus
    if any(s.modulus != p for s in shares):
        raise FieldError("shares over mixed moduli")
    idx = [s.index for s in shares]
    if len(set(idx)) != len(idx):
        raise FieldError("duplicate share indices")
    if any(not 0 < i <= p for i in idx):
        raise FieldError(f"share index outside 1..{p}")
    if len(shares) < t:
        raise FieldError(f"need {t} shares with distinct indices, got {len(shares)}")
    width = len(shares[0].payload)
    if any(len(s.payload) != width for s in shares):
        raise FieldError("shares carry different numbers of blocks")
    chosen = sorted(shares, key=lambda s: s.index)[:t]
    return chosen, p, width


def ramp_reconstruct(shares, t, L):
    """Interpolate each block polynomial from the first ``t`` shares and read its low ``L`` coefficients."""
    if not 1 <= L <= t:
        raise FieldError(f"need 1 <= L <= t, got L={L}, t={t}")
    chosen, p, width = _select(list(shares), t)
    basis = _interpolation_rows([s.index for s in chosen], p, L)
    out = []
    for b in range(width):
        ys = [s.payload[b] for s in chosen]
        for r in range(L):
            out.append(sum(y * bk[r] for y, bk in zip(ys, basis)) % p)
    return out


def shamir_reconstruct(shares, t):
    return ramp_reconstruct(shares, t, 1)


def entropy_oracle(p, t, L, points, budget=ORACLE_BUDGET):
    """Exact ``H(S | shares at points) / H(S)`` for one block of a ``(t, L, *)`` scheme.

    Enumerates every coefficient vector over GF(p) (uniform secret block and
    uniform randomness), counts how often each observed share tuple occurs
    with and without the secret, and returns the ratio as a Fraction.  Log
    base ``p`` makes the ratio rational; non-uniform counts are reported as
    an error rather than approximated.
    """
    check_prime(p)
    if not 1 <= L <= t:
        raise FieldError(f"need 1 <= L <= t, got L={L}, t={t}")
    pts = sorted(set(int(x) for x in points))
    if any(not 0 < x <= p for x in pts):
        raise FieldError(f"evaluation points must lie in 1..{p} ({p} is infinity)")
    if p**t > budget:
        raise BudgetExceeded(f"{p}^{t} coefficient vectors exceed the oracle budget {budget}")
    if not pts:
        return Fraction(1)
    # Values at any t distinct points determine the polynomial, so keying on
    # the first t of them loses nothing and keeps keys below p^t.
    pts = pts[:t]
    w = len(pts)
    vander = np.array([_monomials(x, t, p) for x in pts], dtype=np.int64).T
    place = np.array([p**k for k in range(w)], dtype=np.int64)
    rand_part = np.zeros((1, w), dtype=np.int64)
    for k in range(L, t):
        step = np.arange(p, dtype=np.int64)[:, None, None] * vander[k][None, None, :]
        rand_part = ((rand_part[None, :, :] + step) % p).reshape(-1, w)
    uniqs, counts_all, joint = [], [], set()
    for s in np.indices((p,) * L).reshape(L, -1).T:
        vals = (rand_part + s @ vander[:L]) % p
        uniq, counts = np.unique(vals @ place, return_counts=True)
        joint.update(counts.tolist())
        uniqs.append(uniq)
        counts_all.append(counts)
    if len(joint) != 1:
        raise FieldError("joint counts are not uniform; ratio is not a rational power of p")
    c_sa = joint.pop()
    keys, inv = np.unique(np.concatenate(uniqs), return_inverse=True)
    marg = set(np.bincount(inv, weights=np.concatenate(counts_all)).astype(np.int64).tolist())
    if len(marg) != 1:
        raise FieldError("share-tuple counts are not uniform")
    ratio = Fraction(marg.pop(), c_sa)
    k = 0
    while ratio.denominator == 1 and ratio.numerator % p == 0:
        ratio /= p
        k += 1
    if ratio != 1:
        raise FieldError("count ratio is not a power of p")
    return Fraction(k, L)

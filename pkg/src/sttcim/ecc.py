"""Error-correcting codes sized for in-array logic results.

Two codes, both linear and systematic over GF(2), so the bitwise XOR of two
codewords is again a codeword.  That closure is what lets a controller run
an ECC check directly on the XOR output of a compute-in-memory access
instead of on each operand.

* ``Secded``: extended Hamming code.  Corrects any single bit error and
  detects any double (distance 4).  Check bits sit at power-of-two
  positions, data bits fill the rest, one overall parity bit is appended.

* ``Ec3Ed4``: a binary BCH code of length 63 with designed distance 7,
  shortened to the requested data width, plus one overall parity bit.
  Corrects any 1, 2 or 3 bit errors and detects any 4 (distance 8).  The
  in-array failure mode is several independent column confusions per word,
  which single-error codes cannot absorb; this one is sized for it.

Codeword convention: Python ints, bit i of the int is codeword bit i.
Layout is [data | checks | parity] for ``Ec3Ed4``; ``Secded`` interleaves
checks at power-of-two Hamming positions with the parity bit last.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

__all__ = [
    "DecodeStatus",
    "DecodeResult",
    "Secded",
    "Ec3Ed4",
    "make_code",
]


class DecodeStatus(enum.Enum):
    CLEAN = "clean"
    CORRECTED = "corrected"
    DETECTED_UNCORRECTABLE = "detected_uncorrectable"


@dataclass(frozen=True)
class DecodeResult:
    """Outcome of one decode.

    data and codeword are the corrected values, or None when the decoder
    refuses.  error_positions lists the codeword bit indices the decoder
    flipped, in increasing order.
    """

    status: DecodeStatus
    data: int | None
    codeword: int | None
    error_positions: tuple[int, ...] = ()

    @property
    def errors(self) -> int:
        return len(self.error_positions)


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


class Secded:
    """Extended Hamming code: single-error correct, double-error detect."""

    def __init__(self, data_bits: int):
        if data_bits < 1:
            raise ValueError("data_bits must be positive")
        r = 2
        while (1 << r) < data_bits + r + 1:
            r += 1
        self.data_bits = data_bits
        self.check_bits = r
        # Hamming positions 1..m hold data and checks; one parity bit after.
        self._m = data_bits + r
        self.n = self._m + 1
        self.parity_position = self.n - 1
        self.data_positions: tuple[int, ...] = tuple(
            p - 1 for p in range(1, self._m + 1) if p & (p - 1)
        )
        self.check_positions: tuple[int, ...] = tuple((1 << i) - 1 for i in range(r))
        # For check i, the data-position mask it covers (codeword bit mask).
        self._check_masks = []
        for i in range(r):
            mask = 0
            for pos0 in self.data_positions:
                if (pos0 + 1) >> i & 1:
                    mask |= 1 << pos0
            self._check_masks.append(mask)

    def encode(self, data: int) -> int:
        if data < 0 or data >> self.data_bits:
            raise ValueError("data out of range")
        word = 0
        for j, pos0 in enumerate(self.data_positions):
            if data >> j & 1:
                word |= 1 << pos0
        for i, mask in enumerate(self._check_masks):
            if _parity(word & mask):
                word |= 1 << self.check_positions[i]
        if _parity(word):
            word |= 1 << self.parity_position
        return word

    def extract(self, codeword: int) -> int:
        data = 0
        for j, pos0 in enumerate(self.data_positions):
            if codeword >> pos0 & 1:
                data |= 1 << j
        return data

    def _syndrome(self, word: int) -> int:
        s = 0
        rest = word & ((1 << self._m) - 1)
        while rest:
            low = rest & -rest
            s ^= low.bit_length()
            rest ^= low
        return s

    def decode(self, word: int) -> DecodeResult:
        if word < 0 or word >> self.n:
            raise ValueError("word out of range")
        syndrome = self._syndrome(word)
        overall = _parity(word)
        if syndrome == 0 and overall == 0:
            return DecodeResult(DecodeStatus.CLEAN, self.extract(word), word)
        if syndrome == 0:
            fixed = word ^ (1 << self.parity_position)
            return DecodeResult(
                DecodeStatus.CORRECTED, self.extract(fixed), fixed, (self.parity_position,)
            )
        if overall == 1 and syndrome <= self._m:
            fixed = word ^ (1 << (syndrome - 1))
            return DecodeResult(
                DecodeStatus.CORRECTED, self.extract(fixed), fixed, (syndrome - 1,)
            )
        # Even overall parity with a nonzero syndrome is a double error;
        # a syndrome past the last position means at least three.
        return DecodeResult(DecodeStatus.DETECTED_UNCORRECTABLE, None, None)


# GF(2^6) tables over the primitive polynomial x^6 + x + 1.
_GF_POLY = 0b1000011
_GF_ORDER = 63
_EXP = [0] * (2 * _GF_ORDER)
_LOG = [0] * 64
_x = 1
for _i in range(_GF_ORDER):
    _EXP[_i] = _x
    _LOG[_x] = _i
    _x <<= 1
    if _x & 0x40:
        _x ^= _GF_POLY
for _i in range(_GF_ORDER):
    _EXP[_i + _GF_ORDER] = _EXP[_i]
del _x, _i


def _gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def _gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("inverse of 0 in GF(64)")
    return _EXP[_GF_ORDER - _LOG[a]]


def _minimal_polynomial(exponent: int) -> int:
    """GF(2) minimal polynomial of alpha**exponent, as a bitmask."""
    conjugates = []
    e = exponent % _GF_ORDER
    while e not in conjugates:
        conjugates.append(e)
        e = (e * 2) % _GF_ORDER
    # Multiply out (x - alpha^e) over GF(64); result must land in GF(2).
    poly = [1]
    for e in conjugates:
        root = _EXP[e]
        nxt = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i + 1] ^= c
            nxt[i] ^= _gf_mul(c, root)
        poly = nxt
    mask = 0
    for i, c in enumerate(poly):
        if c not in (0, 1):
            raise AssertionError("minimal polynomial left GF(2)")
        mask |= c << i
    return mask


def _poly_mul_gf2(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _poly_mod_gf2(a: int, mod: int) -> int:
    dm = mod.bit_length() - 1
    while a.bit_length() - 1 >= dm and a:
        a ^= mod << (a.bit_length() - 1 - dm)
    return a


def _berlekamp_massey(syndromes: list[int]) -> tuple[list[int], int]:
    """Error-locator polynomial from the syndrome sequence.

    Returns (coefficients lowest-first with C[0] == 1, register length L).
    """
    c = [1]
    b = [1]
    L = 0
    m = 1
    prev_d = 1
    for n_i, s in enumerate(syndromes):
        d = s
        for i in range(1, L + 1):
            if i < len(c):
                d ^= _gf_mul(c[i], syndromes[n_i - i])
        if d == 0:
            m += 1
            continue
        coef = _gf_mul(d, _gf_inv(prev_d))
        shifted_len = len(b) + m
        if shifted_len > len(c):
            c = c + [0] * (shifted_len - len(c))
        if 2 * L <= n_i:
            keep = c[:]
            for i, bc in enumerate(b):
                c[i + m] ^= _gf_mul(coef, bc)
            L = n_i + 1 - L
            b = keep
            prev_d = d
            m = 1
        else:
            for i, bc in enumerate(b):
                c[i + m] ^= _gf_mul(coef, bc)
            m += 1
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c, L


class Ec3Ed4:
    """Shortened distance-7 BCH code plus overall parity: distance 8.

    Corrects up to three bit errors per word and detects all four-bit
    patterns.  Data widths up to 45 bits are supported; the codeword is
    data_bits + 19 bits long ([data | 18 checks | parity]).
    """

    _T = 3
    _CHECK_BITS = 18
    _FULL_LENGTH = 63
    _MAX_DATA = 45

    def __init__(self, data_bits: int = 32):
        if not 1 <= data_bits <= self._MAX_DATA:
            raise ValueError(f"data_bits must be in 1..{self._MAX_DATA}")
        self.data_bits = data_bits
        self.check_bits = self._CHECK_BITS
        self.n = data_bits + self._CHECK_BITS + 1
        self.parity_position = self.n - 1
        self.data_positions: tuple[int, ...] = tuple(range(data_bits))
        self.check_positions: tuple[int, ...] = tuple(
            range(data_bits, data_bits + self._CHECK_BITS)
        )
        g = _minimal_polynomial(1)
        for e in (3, 5):
            g = _poly_mul_gf2(g, _minimal_polynomial(e))
        if g.bit_length() - 1 != self._CHECK_BITS:
            raise AssertionError("generator degree is off")
        self.generator = g
        # Number of (unshortened) polynomial positions actually in use.
        self._poly_len = self._CHECK_BITS + data_bits

    # Polynomial coefficient p maps to: checks for p < 18, data bit p - 18
    # otherwise.  Word bit order is [data | checks | parity].
    def _word_to_poly(self, word: int) -> int:
        data = word & ((1 << self.data_bits) - 1)
        checks = (word >> self.data_bits) & ((1 << self._CHECK_BITS) - 1)
        return (data << self._CHECK_BITS) | checks

    def _poly_to_word(self, poly: int, parity_bit: int) -> int:
        checks = poly & ((1 << self._CHECK_BITS) - 1)
        data = poly >> self._CHECK_BITS
        return data | (checks << self.data_bits) | (parity_bit << self.parity_position)

    def encode(self, data: int) -> int:
        if data < 0 or data >> self.data_bits:
            raise ValueError("data out of range")
        shifted = data << self._CHECK_BITS
        rem = _poly_mod_gf2(shifted, self.generator)
        poly = shifted | rem
        return self._poly_to_word(poly, _parity(poly))

    def extract(self, codeword: int) -> int:
        return codeword & ((1 << self.data_bits) - 1)

    def _syndromes(self, poly: int) -> list[int]:
        out = []
        positions = []
        rest = poly
        while rest:
            low = rest & -rest
            positions.append(low.bit_length() - 1)
            rest ^= low
        for j in range(1, 2 * self._T + 1):
            s = 0
            for p in positions:
                s ^= _EXP[(j * p) % _GF_ORDER]
            out.append(s)
        return out

    def decode(self, word: int) -> DecodeResult:
        if word < 0 or word >> self.n:
            raise ValueError("word out of range")
        poly = self._word_to_poly(word)
        overall = _parity(word)
        syndromes = self._syndromes(poly)
        if not any(syndromes):
            if overall == 0:
                return DecodeResult(DecodeStatus.CLEAN, self.extract(word), word)
            fixed = word ^ (1 << self.parity_position)
            return DecodeResult(
                DecodeStatus.CORRECTED, self.extract(fixed), fixed, (self.parity_position,)
            )
        locator, nu = _berlekamp_massey(syndromes)
        if nu > self._T or len(locator) - 1 > nu:
            return DecodeResult(DecodeStatus.DETECTED_UNCORRECTABLE, None, None)
        # Chien search restricted to the unshortened positions; a root
        # landing in the shortened tail shows up as a missing root here.
        roots = []
        for p in range(self._poly_len):
            acc = 0
            for i, ci in enumerate(locator):
                if ci:
                    acc ^= _EXP[(_LOG[ci] + (-p * i) % _GF_ORDER) % _GF_ORDER]
            if acc == 0:
                roots.append(p)
        if len(roots) != nu:
            return DecodeResult(DecodeStatus.DETECTED_UNCORRECTABLE, None, None)
        # The parity bit sees every error; disagreement means one more error
        # than the locator found.
        parity_flip = overall ^ (nu & 1)
        if parity_flip and nu >= self._T:
            # nu + 1 errors with nu == t exceeds the correction radius.
            return DecodeResult(DecodeStatus.DETECTED_UNCORRECTABLE, None, None)
        fixed_poly = poly
        for p in roots:
            fixed_poly ^= 1 << p
        parity_bit = (word >> self.parity_position & 1) ^ parity_flip
        fixed = self._poly_to_word(fixed_poly, parity_bit)
        positions = []
        for p in roots:
            if p < self._CHECK_BITS:
                positions.append(self.data_bits + p)
            else:
                positions.append(p - self._CHECK_BITS)
        if parity_flip:
            positions.append(self.parity_position)
        return DecodeResult(
            DecodeStatus.CORRECTED, self.extract(fixed), fixed, tuple(sorted(positions))
        )


def make_code(name: str, data_bits: int):
    """Code factory for config files: secded | ec3ed4."""
    key = name.strip().lower()
    if key == "secded":
        return Secded(data_bits)
    if key == "ec3ed4":
        return Ec3Ed4(data_bits)
    raise ValueError(f"unknown code {name!r}")

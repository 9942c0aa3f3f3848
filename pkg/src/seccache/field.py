"""GF(2^l) finite field arithmetic.

Field elements are plain integers in [0, 2^l - 1]; bit i is the coefficient
of x^i in the polynomial basis.  Addition is XOR, multiplication is a
carry-less polynomial product reduced by an irreducible polynomial of
degree l.  No wrapper objects: the field instance is passed around with
the elements.

For vectorized work (share encoding, linear-algebra checks) the field
exposes lazily built exp/log tables over a fixed generator, usable with
numpy fancy indexing.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

# Lowest-valued irreducible polynomial of each degree, found by exhaustive
# search and re-verified at construction time.  Bit i = coefficient of x^i.
_DEFAULT_POLYS = {
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x83,
    8: 0x11B,
    9: 0x203,
    10: 0x409,
    11: 0x805,
    12: 0x1009,
    13: 0x201B,
    14: 0x4021,
    15: 0x8003,
    16: 0x1002B,
}


def _poly_mod(a: int, b: int) -> int:
    """Remainder of a divided by b, both GF(2)[x] polynomials as ints."""
    db = b.bit_length() - 1
    while a and a.bit_length() - 1 >= db:
        a ^= b << (a.bit_length() - 1 - db)
    return a


def _is_irreducible(poly: int, degree: int) -> bool:
    """Exhaustive trial division by every polynomial of degree 1..degree//2."""
    if poly.bit_length() - 1 != degree:
        return False
    for d in range(1, degree // 2 + 1):
        for q in range(1 << d, 1 << (d + 1)):
            if _poly_mod(poly, q) == 0:
                return False
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


class BinaryField:
    """Arithmetic context for GF(2^l), 2 <= l <= 16.

    Parameters
    ----------
    l : int
        Bits per symbol; the field has 2^l elements.
    poly : int or None
        Reduction polynomial as an integer with bit l set.  Must be
        irreducible (checked exhaustively).  Defaults to the lowest-valued
        irreducible polynomial of degree l.
    """

    def __init__(self, l: int, poly: int | None = None):
        if not 2 <= l <= 16:
            raise ValueError(f"symbol width must be in [2, 16], got {l}")
        if poly is None:
            poly = _DEFAULT_POLYS[l]
        if not _is_irreducible(poly, l):
            raise ValueError(
                f"0b{poly:b} is not an irreducible polynomial of degree {l}"
            )
        self.l = l
        self.order = 1 << l
        self.poly = poly
        self._exp: np.ndarray | None = None
        self._log: np.ndarray | None = None

    # -- scalar operations --------------------------------------------------

    @staticmethod
    def add(a: int, b: int) -> int:
        """Field addition (= subtraction): XOR."""
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        """Carry-less polynomial product reduced by the field polynomial."""
        result = 0
        while b:
            if b & 1:
                result ^= a
            b >>= 1
            a <<= 1
            if a & self.order:
                a ^= self.poly
        return result

    def pow(self, a: int, n: int) -> int:
        """a raised to a nonnegative integer power."""
        r = 1
        while n:
            if n & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            n >>= 1
        return r

    def inv(self, a: int) -> int:
        """Multiplicative inverse; raises ZeroDivisionError for 0."""
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in GF(2^l)")
        if a >= self.order:
            raise ValueError(f"{a} is not a field element")
        return self.pow(a, self.order - 2)

    # -- vectorized support --------------------------------------------------

    def _find_generator(self) -> int:
        n = self.order - 1
        factors = _prime_factors(n)
        for g in range(2, self.order):
            if all(self.pow(g, n // p) != 1 for p in factors):
                return g
        raise AssertionError("multiplicative group of a field is cyclic")

    def _build_tables(self) -> None:
        q = self.order
        g = self._find_generator()
        exp = np.zeros(2 * (q - 1) - 1, dtype=np.uint16)
        log = np.zeros(q, dtype=np.int32)
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = self.mul(x, g)
        exp[q - 1 :] = exp[: q - 2]
        self._exp = exp
        self._log = log

    @property
    def exp_table(self) -> np.ndarray:
        """exp[i] = g^i, doubled in length so exp[log a + log b] needs no modulo."""
        if self._exp is None:
            self._build_tables()
        return self._exp

    @property
    def log_table(self) -> np.ndarray:
        """log[x] for x != 0; index 0 is never valid."""
        if self._log is None:
            self._build_tables()
        return self._log

    @property
    def dtype(self):
        return np.uint8 if self.l <= 8 else np.uint16

    def zeros(self, *shape: int) -> np.ndarray:
        return np.zeros(shape, dtype=self.dtype)

    def vector(self, symbols) -> np.ndarray:
        arr = np.asarray(symbols, dtype=self.dtype)
        if arr.size and int(arr.max()) >= self.order:
            raise ValueError("symbol out of field range")
        return arr

    def scale(self, s: int, vec: np.ndarray) -> np.ndarray:
        """Elementwise s * vec over the field."""
        if s == 0:
            return np.zeros_like(vec)
        if s == 1:
            return vec.copy()
        out = np.zeros_like(vec)
        nz = vec != 0
        out[nz] = self.exp_table[self.log_table[s] + self.log_table[vec[nz]]]
        return out

    def scaled_outer(self, factors: np.ndarray, row: np.ndarray) -> np.ndarray:
        """Matrix whose i-th row is factors[i] * row (factors all nonzero)."""
        out = np.zeros((len(factors), len(row)), dtype=row.dtype)
        nz = row != 0
        if nz.any():
            idx = self.log_table[factors][:, None] + self.log_table[row[nz]][None, :]
            out[:, nz] = self.exp_table[idx]
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BinaryField)
            and other.l == self.l
            and other.poly == self.poly
        )

    def __hash__(self) -> int:
        return hash((self.l, self.poly))

    def __repr__(self) -> str:
        return f"BinaryField(l={self.l}, poly=0x{self.poly:X})"


@lru_cache(maxsize=None)
def default_field(l: int = 8) -> BinaryField:
    """Shared instance with the default polynomial for width l."""
    return BinaryField(l)

"""Dense univariate polynomials with arbitrary-precision integer coefficients.

Coefficients are stored lowest degree first with no trailing zeros; the zero
polynomial is the empty tuple.  All arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


@dataclass(frozen=True)
class IntPoly:
    coeffs: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        c = tuple(int(v) for v in self.coeffs)
        while c and c[-1] == 0:
            c = c[:-1]
        object.__setattr__(self, "coeffs", c)

    # -- constructors ------------------------------------------------------

    @classmethod
    def const(cls, c: int) -> "IntPoly":
        return cls((c,))

    @classmethod
    def x(cls) -> "IntPoly":
        return cls((0, 1))

    @classmethod
    def from_roots(cls, roots: Iterable[int]) -> "IntPoly":
        """Monic product of (x - r) over the given integer roots."""
        p = cls((1,))
        for r in roots:
            p = p * cls((-r, 1))
        return p

    # -- structure ---------------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial having degree -1."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> int:
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    @property
    def constant_term(self) -> int:
        return self.coeffs[0] if self.coeffs else 0

    @property
    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    @property
    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def coeff(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def one_norm(self) -> int:
        return sum(abs(c) for c in self.coeffs)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "IntPoly") -> "IntPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return IntPoly(tuple(out))

    def __sub__(self, other: "IntPoly") -> "IntPoly":
        return self + (-other)

    def __neg__(self) -> "IntPoly":
        return IntPoly(tuple(-c for c in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPoly(tuple(c * other for c in self.coeffs))
        if not isinstance(other, IntPoly):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return IntPoly()
        out = [0] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca:
                for j, cb in enumerate(b):
                    out[i + j] += ca * cb
        return IntPoly(tuple(out))

    def __rmul__(self, other):
        if isinstance(other, int):
            return self * other
        return NotImplemented

    def __pow__(self, n: int) -> "IntPoly":
        if n < 0:
            raise ValueError("negative power")
        out = IntPoly((1,))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __call__(self, t: int) -> int:
        """Evaluate at an integer point by Horner's rule."""
        v = 0
        for c in reversed(self.coeffs):
            v = v * t + c
        return v

    # -- substitutions -----------------------------------------------------

    def shift_x(self, s: int) -> "IntPoly":
        """Return p(x + s)."""
        out = IntPoly()
        lin = IntPoly((s, 1))
        for c in reversed(self.coeffs):
            out = out * lin + IntPoly((c,))
        return out

    def substitute_neg_x(self) -> "IntPoly":
        """Return p(-x)."""
        return IntPoly(tuple(-c if i % 2 else c for i, c in enumerate(self.coeffs)))

    def sign_normalized(self) -> "IntPoly":
        """Flip the sign so the leading coefficient is positive (zero unchanged)."""
        if self.coeffs and self.coeffs[-1] < 0:
            return -self
        return self

    # -- division ----------------------------------------------------------

    def divmod_monic(self, d: "IntPoly") -> tuple["IntPoly", "IntPoly"]:
        """Euclidean division by a monic divisor; stays in Z[x]."""
        if not d.is_monic:
            raise ValueError("divisor must be monic")
        rem = list(self.coeffs)
        dd = d.degree
        q = [0] * max(0, len(rem) - dd)
        for i in range(len(rem) - dd - 1, -1, -1):
            c = rem[i + dd]
            if c:
                q[i] = c
                for j, dc in enumerate(d.coeffs):
                    rem[i + j] -= c * dc
        return IntPoly(tuple(q)), IntPoly(tuple(rem[:dd]))

    def exact_div(self, d: "IntPoly") -> "IntPoly | None":
        """Quotient self / d when it exists in Z[x], else None."""
        if d.is_zero:
            return None
        if self.is_zero:
            return IntPoly()
        if d.degree > self.degree:
            return None
        rem = [Fraction(c) for c in self.coeffs]
        dd = d.degree
        lead = Fraction(d.coeffs[-1])
        q = [Fraction(0)] * (len(rem) - dd)
        for i in range(len(q) - 1, -1, -1):
            c = rem[i + dd] / lead
            q[i] = c
            if c:
                for j, dc in enumerate(d.coeffs):
                    rem[i + j] -= c * dc
        if any(rem):
            return None
        if any(f.denominator != 1 for f in q):
            return None
        return IntPoly(tuple(int(f) for f in q))

    def divides(self, other: "IntPoly") -> bool:
        """True when self divides other in Z[x] (0 divides only 0)."""
        if self.is_zero:
            return other.is_zero
        return other.exact_div(self) is not None

    # -- display -----------------------------------------------------------

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            if i == 0:
                term = str(abs(c))
            else:
                mag = "" if abs(c) == 1 else f"{abs(c)}*"
                term = f"{mag}x" if i == 1 else f"{mag}x^{i}"
            if not parts:
                parts.append(("-" if c < 0 else "") + term)
            else:
                parts.append(("- " if c < 0 else "+ ") + term)
        return " ".join(parts)


ZERO = IntPoly()
ONE = IntPoly((1,))
X = IntPoly((0, 1))


def poly_list_product(polys: Sequence[IntPoly]) -> IntPoly:
    out = ONE
    for p in polys:
        out = out * p
    return out


def divisibility_chain_holds(polys: Sequence[IntPoly]) -> bool:
    """Check d_1 | d_2 | ... in Z[x]; zero entries may only appear at the end."""
    for a, b in zip(polys, polys[1:]):
        if not a.divides(b):
            return False
    return True

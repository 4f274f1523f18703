"""Differential poset families and their up/down operator matrices.

Three families are supported: Young's lattice (partitions under diagram
containment), the Young-Fibonacci lattice (words over {1,2} graded by digit
sum), and finite Cartesian products of these.  Ranks are generated bottom-up
from the cover rules and memoized; the canonical element order within each
rank fixes the standard basis, so every matrix here is reproducible
byte-for-byte across runs.

Element encodings: Young = weakly decreasing tuple of positive ints,
Young-Fibonacci = str over "12", product = tuple of factor elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

from .intmat import IntMatrix

Element = object  # family-specific: tuple[int, ...] | str | tuple[Element, ...]


@dataclass(frozen=True)
class PosetSpec:
    """Descriptor of a differential poset: one of the base families or a product."""

    kind: str
    factors: tuple["PosetSpec", ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("young", "yf", "product"):
            raise ValueError(f"unknown poset family {self.kind!r}")
        if self.kind == "product":
            if len(self.factors) < 2:
                raise ValueError("a product needs at least two factors")
            if any(f.kind == "product" for f in self.factors):
                raise ValueError("product factors must be base families (flatten first)")
        elif self.factors:
            raise ValueError("base families take no factors")

    @property
    def r(self) -> int:
        """Differential degree: 1 for the base lattices, additive over products."""
        if self.kind == "product":
            return sum(f.r for f in self.factors)
        return 1


YOUNG = PosetSpec("young")
YOUNG_FIB = PosetSpec("yf")


def product(*factors: PosetSpec) -> PosetSpec:
    """Cartesian product spec; nested products are flattened, singletons collapse."""
    flat: list[PosetSpec] = []
    for f in factors:
        if f.kind == "product":
            flat.extend(f.factors)
        else:
            flat.append(f)
    if not flat:
        raise ValueError("empty product")
    if len(flat) == 1:
        return flat[0]
    return PosetSpec("product", tuple(flat))


# -- spec string grammar: "young", "yf", "z(3)", "young^2", "young*yf" --------


def parse_spec(text: str) -> PosetSpec:
    """Parse the CLI spec grammar.  z(r) abbreviates the r-fold yf product."""
    factors: list[PosetSpec] = []
    for term in text.lower().replace(" ", "").split("*"):
        if not term:
            raise ValueError(f"bad spec string {text!r}")
        base, _, power = term.partition("^")
        count = 1
        if power:
            count = int(power)
            if count < 1:
                raise ValueError(f"bad power in {term!r}")
        if base in ("young", "y"):
            atom_list = [YOUNG] * count
        elif base == "yf":
            atom_list = [YOUNG_FIB] * count
        elif base.startswith("z(") and base.endswith(")"):
            if power:
                raise ValueError(f"bad spec string {text!r}")
            r = int(base[2:-1])
            if r < 1:
                raise ValueError("z(r) needs r >= 1")
            atom_list = [YOUNG_FIB] * r
        else:
            raise ValueError(f"bad spec string {text!r}")
        factors.extend(atom_list)
    return product(*factors)


def spec_to_string(spec: PosetSpec) -> str:
    """Compact string form; parse_spec round-trips it."""
    if spec.kind == "young":
        return "young"
    if spec.kind == "yf":
        return "yf"
    parts = []
    i = 0
    names = [spec_to_string(f) for f in spec.factors]
    while i < len(names):
        j = i
        while j < len(names) and names[j] == names[i]:
            j += 1
        parts.append(names[i] if j - i == 1 else f"{names[i]}^{j - i}")
        i = j
    return "*".join(parts)


# -- elements: validation, rank, canonical order ------------------------------


def minimum(spec: PosetSpec) -> Element:
    if spec.kind == "young":
        return ()
    if spec.kind == "yf":
        return ""
    return tuple(minimum(f) for f in spec.factors)


def element_rank(spec: PosetSpec, e: Element) -> int:
    if spec.kind == "young":
        return sum(e)
    if spec.kind == "yf":
        return sum(int(c) for c in e)
    return sum(element_rank(f, c) for f, c in zip(spec.factors, e))


def validate_element(spec: PosetSpec, e: Element) -> None:
    """Reject malformed encodings (wrong container, bad digits, bad ordering)."""
    if spec.kind == "young":
        if not isinstance(e, tuple) or any(not isinstance(p, int) or p < 1 for p in e):
            raise ValueError(f"bad partition {e!r}")
        if any(a < b for a, b in zip(e, e[1:])):
            raise ValueError(f"partition parts must be weakly decreasing: {e!r}")
    elif spec.kind == "yf":
        if not isinstance(e, str) or any(c not in "12" for c in e):
            raise ValueError(f"bad 12-word {e!r}")
    else:
        if not isinstance(e, tuple) or len(e) != len(spec.factors):
            raise ValueError(f"bad product element {e!r}")
        for f, c in zip(spec.factors, e):
            validate_element(f, c)


def canonical_key(spec: PosetSpec, e: Element):
    """Sort key realizing the canonical total order within a rank.

    Young: reverse-lexicographic on partitions.  Young-Fibonacci: longer words
    first, then lexicographic with 1 < 2.  Products: lexicographic on the
    factors' (rank, key) pairs.
    """
    if spec.kind == "young":
        return tuple(-p for p in e)
    if spec.kind == "yf":
        return (-len(e), e)
    return tuple((element_rank(f, c), canonical_key(f, c)) for f, c in zip(spec.factors, e))


# -- covers --------------------------------------------------------------------


def covers_up(spec: PosetSpec, e: Element) -> tuple[Element, ...]:
    """All elements covering e, in canonical order."""
    validate_element(spec, e)
    return tuple(sorted(_covers_up(spec, e), key=lambda c: canonical_key(spec, c)))


def _covers_up(spec: PosetSpec, e: Element) -> list[Element]:
    if spec.kind == "young":
        out = []
        for i, part in enumerate(e):
            if i == 0 or e[i - 1] > part:
                out.append(e[:i] + (part + 1,) + e[i + 1:])
        out.append(e + (1,))
        return out
    if spec.kind == "yf":
        out = []
        # positions preceded only by 2s, scanning left to right
        k = 0
        while k < len(e) and e[k] == "2":
            k += 1
        # (i) turn the first 1 (if any) into a 2
        if k < len(e):
            out.append(e[:k] + "2" + e[k + 1:])
        # (ii) insert a 1 at any position within the leading 2s, front included
        for pos in range(k + 1):
            out.append(e[:pos] + "1" + e[pos:])
        return out
    out = []
    for i, (f, c) in enumerate(zip(spec.factors, e)):
        for up in _covers_up(f, c):
            out.append(e[:i] + (up,) + e[i + 1:])
    return out


# -- ranks ---------------------------------------------------------------------


@dataclass(frozen=True)
class RankData:
    """Rank n of a poset: elements in canonical order (the standard basis)."""

    n: int
    elements: tuple[Element, ...]
    index: dict = field(compare=False, repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        self.index.update({e: i for i, e in enumerate(self.elements)})

    @property
    def size(self) -> int:
        return len(self.elements)


@lru_cache(maxsize=None)
def rank_elements(spec: PosetSpec, n: int) -> RankData:
    """Bottom-up rank generation: rank n+1 is the sorted union of up-covers."""
    if n < 0:
        raise ValueError("rank must be non-negative")
    if n == 0:
        return RankData(0, (minimum(spec),))
    below = rank_elements(spec, n - 1)
    seen = set()
    for e in below.elements:
        seen.update(_covers_up(spec, e))
    ordered = tuple(sorted(seen, key=lambda c: canonical_key(spec, c)))
    return RankData(n, ordered)


def rank_size(spec: PosetSpec, n: int) -> int:
    return rank_elements(spec, n).size if n >= 0 else 0


def delta_p(spec: PosetSpec, n: int) -> int:
    """Rank size difference p_n - p_{n-1} (p_{-1} = 0)."""
    return rank_size(spec, n) - rank_size(spec, n - 1)


# -- operator matrices -----------------------------------------------------------


@lru_cache(maxsize=None)
def up_matrix(spec: PosetSpec, n: int) -> IntMatrix:
    """Matrix of the up map from rank n to rank n+1 in the standard bases."""
    lo = rank_elements(spec, n)
    hi = rank_elements(spec, n + 1)
    data = [[0] * lo.size for _ in range(hi.size)]
    for j, e in enumerate(lo.elements):
        for c in _covers_up(spec, e):
            data[hi.index[c]][j] = 1
    return IntMatrix.from_rows(data) if hi.size else IntMatrix.zeros(0, lo.size)


def down_matrix(spec: PosetSpec, n: int) -> IntMatrix:
    """Matrix of the down map from rank n to rank n-1: the transpose of up."""
    if n < 1:
        raise ValueError("no down map at rank 0")
    return up_matrix(spec, n - 1).transpose()


def du_matrix(spec: PosetSpec, n: int) -> IntMatrix:
    return down_matrix(spec, n + 1) @ up_matrix(spec, n)


def ud_matrix(spec: PosetSpec, n: int) -> IntMatrix:
    if n == 0:
        p0 = rank_size(spec, 0)
        return IntMatrix.zeros(p0, p0)
    return up_matrix(spec, n - 1) @ down_matrix(spec, n)


# -- axiom verification -----------------------------------------------------------


@dataclass(frozen=True)
class AxiomViolation:
    n: int
    row: int
    col: int
    got: int
    expected: int


@dataclass(frozen=True)
class AxiomReport:
    spec: PosetSpec
    n_max: int
    r: int
    passed: bool
    violation: AxiomViolation | None = None

    def to_json(self) -> dict:
        out = {
            "spec": spec_to_string(self.spec),
            "n_max": self.n_max,
            "r": self.r,
            "passed": self.passed,
        }
        if self.violation is not None:
            v = self.violation
            out["violation"] = {"n": v.n, "row": v.row, "col": v.col,
                                "got": v.got, "expected": v.expected}
        return out


def verify_axioms(spec: PosetSpec, n_max: int) -> AxiomReport:
    """Check DU_n - UD_n = r*I exactly for 0 <= n <= n_max.

    This is the safety net for the cover-rule implementations: a wrong cover
    rule breaks the identity at small n.
    """
    r = spec.r
    for n in range(n_max + 1):
        diff = du_matrix(spec, n) - ud_matrix(spec, n)
        p = diff.rows
        for i in range(p):
            for j in range(p):
                expected = r if i == j else 0
                if diff.at(i, j) != expected:
                    return AxiomReport(spec, n_max, r, False,
                                       AxiomViolation(n, i, j, diff.at(i, j), expected))
    return AxiomReport(spec, n_max, r, True)

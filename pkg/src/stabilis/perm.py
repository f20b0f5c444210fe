"""Permutations of finite sets and the normalized Hamming metric.

Points are 0-indexed integers, subsets are sorted index tuples, and every
distance is an exact Fraction.  The distance-scaling exponent for this
metric is 1 (SCALING_EXPONENT below); the Hilbert-space variant with
exponent 1/2 is deliberately unsupported here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import SpecError

#: Exponent applied to size ratios in all coproduct/restriction estimates.
#: Hard-coded to 1: correct for permutations under the normalized Hamming
#: distance.
SCALING_EXPONENT = 1


class Perm:
    """A bijection of {0, ..., n-1}, stored as its image tuple."""

    __slots__ = ("image",)

    def __init__(self, image):
        image = tuple(image)
        n = len(image)
        seen = [False] * n
        for v in image:
            if not isinstance(v, int) or not 0 <= v < n or seen[v]:
                raise SpecError(f"not a permutation image: {image!r}")
            seen[v] = True
        object.__setattr__(self, "image", image)

    @property
    def degree(self):
        return len(self.image)

    @classmethod
    def identity(cls, n):
        return cls(range(n))

    @classmethod
    def from_cycles(cls, n, *cycles):
        """Build a degree-n permutation from disjoint cycles of point indices."""
        image = list(range(n))
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                if image[a] != a:
                    raise SpecError("cycles overlap")
                image[a] = b
        return cls(image)

    def __call__(self, x):
        return self.image[x]

    def __mul__(self, other):
        """Composition: (p * q)(x) == p(q(x))."""
        if self.degree != other.degree:
            raise SpecError("degree mismatch in composition")
        img = self.image
        return Perm(tuple(img[v] for v in other.image))

    def inverse(self):
        inv = [0] * self.degree
        for i, v in enumerate(self.image):
            inv[v] = i
        return Perm(inv)

    def is_identity(self):
        return all(v == i for i, v in enumerate(self.image))

    def support(self):
        return tuple(i for i, v in enumerate(self.image) if v != i)

    def __eq__(self, other):
        return isinstance(other, Perm) and self.image == other.image

    def __hash__(self):
        return hash(self.image)

    def __repr__(self):
        return f"Perm({list(self.image)})"

    def __setattr__(self, *a):
        raise AttributeError("Perm is immutable")


def hamming(p: Perm, q: Perm) -> Fraction:
    """Normalized Hamming distance: fraction of points where p and q differ."""
    if p.degree != q.degree:
        raise SpecError("degree mismatch in hamming")
    if p.degree == 0:
        return Fraction(0)
    moved = sum(1 for a, b in zip(p.image, q.image) if a != b)
    return Fraction(moved, p.degree)


def coproduct(p: Perm, q: Perm) -> Perm:
    """Disjoint-union permutation: p on the first block, q shifted after it."""
    n1 = p.degree
    return Perm(p.image + tuple(v + n1 for v in q.image))


def coproduct_many(perms) -> Perm:
    image = []
    offset = 0
    for p in perms:
        image.extend(v + offset for v in p.image)
        offset += p.degree
    return Perm(image)


def restrict(p: Perm, subset) -> Perm:
    """Restriction of p to a subset Y, as a permutation of Y's positions.

    Agrees with p on Y ∩ p^{-1}(Y); the leftover partial injection is
    completed canonically by matching unmatched sources to unmatched
    targets in increasing order.
    """
    subset = tuple(subset)
    if len(subset) == 0:
        raise SpecError("restriction to an empty subset")
    pos = {x: i for i, x in enumerate(subset)}
    if len(pos) != len(subset) or any(not 0 <= x < p.degree for x in subset):
        raise SpecError("subset must be distinct points of the domain")
    k = len(subset)
    image = [None] * k
    used = [False] * k
    for i, x in enumerate(subset):
        j = pos.get(p(x))
        if j is not None:
            image[i] = j
            used[j] = True
    free_targets = iter(j for j in range(k) if not used[j])
    for i in range(k):
        if image[i] is None:
            image[i] = next(free_targets)
    return Perm(image)


@dataclass(frozen=True)
class Word:
    """A word in free-group letters: (symbol, exponent) with exponent ±1."""

    letters: tuple

    def __post_init__(self):
        for sym, e in self.letters:
            if e not in (1, -1):
                raise SpecError(f"bad exponent {e} in word")

    def __len__(self):
        return len(self.letters)

    def inverse(self):
        return Word(tuple((s, -e) for s, e in reversed(self.letters)))

    def __mul__(self, other):
        return Word(self.letters + other.letters)

    @classmethod
    def from_syms(cls, *syms):
        """Word of positive letters; a trailing '-' on string symbols inverts."""
        letters = []
        for s in syms:
            if isinstance(s, tuple) and len(s) == 2 and s[1] in (1, -1):
                letters.append(s)
            else:
                letters.append((s, 1))
        return cls(tuple(letters))


EMPTY_WORD = Word(())


@dataclass(frozen=True)
class GenMap:
    """Images of free generators: one permutation per symbol, equal degree."""

    names: tuple
    images: dict

    def __post_init__(self):
        degs = {self.images[s].degree for s in self.names}
        if len(self.names) != len(set(self.names)):
            raise SpecError("duplicate generator names")
        if set(self.images) != set(self.names):
            raise SpecError("images must cover exactly the declared names")
        if len(degs) > 1:
            raise SpecError("generator images have mixed degrees")

    @property
    def degree(self):
        if not self.names:
            return 0
        return self.images[self.names[0]].degree

    @classmethod
    def of(cls, **images):
        return cls(tuple(images), dict(images))


def evaluate_word(g: GenMap, w: Word) -> Perm:
    """Left-to-right composition of generator images along the word."""
    result = Perm.identity(g.degree)
    for sym, e in w.letters:
        if sym not in g.images:
            raise SpecError(f"unknown symbol {sym!r} in word")
        p = g.images[sym]
        result = result * (p if e == 1 else p.inverse())
    return result


def relation_defect(g: GenMap, relations) -> Fraction:
    """Largest Hamming deviation of any relation word from the identity."""
    ident = Perm.identity(g.degree)
    worst = Fraction(0)
    for r in relations:
        worst = max(worst, hamming(evaluate_word(g, r), ident))
    return worst


# ---------------------------------------------------------------------------
# Metric toolkit: each check returns (lhs, rhs).  Default constants are the
# provable permutation-case ones: 3 for the padding and iterated restriction
# bounds and for the restricted-distance comparison (3 is tight for the
# latter: a = (0 1), b = (1 2) on three points with Y = {0, 2} reaches it),
# 3|r| for restricted word defects.
# ---------------------------------------------------------------------------


def coproduct_mixing(a1: Perm, a2: Perm, b: Perm):
    """Exact identity d(a1 ⊔ b, a2 ⊔ b) == d(a1, a2) * n1/(n1+n2).

    Returns (lhs, rhs); the two sides are equal for permutations.
    """
    lhs = hamming(coproduct(a1, b), coproduct(a2, b))
    n1, n2 = a1.degree, b.degree
    rhs = hamming(a1, a2) * Fraction(n1, n1 + n2)
    return lhs, rhs


def coproduct_sum_identity(as_, bs_):
    """Exact identity d(∐ a_i, ∐ b_i) == sum_i d(a_i, b_i) * |X_i| / |X|."""
    as_ = tuple(as_)
    bs_ = tuple(bs_)
    total = sum(a.degree for a in as_)
    lhs = hamming(coproduct_many(as_), coproduct_many(bs_))
    rhs = sum(
        (hamming(a, b) * Fraction(a.degree, total) for a, b in zip(as_, bs_)),
        Fraction(0),
    )
    return lhs, rhs


def padding_bound(a: Perm, subset, constant=3):
    """d(a, a|_Y ⊔ 1 on the complement) <= constant * (|X|-|Y|) / |X|."""
    subset = tuple(subset)
    n = a.degree
    rest = restrict(a, subset)
    complement = tuple(x for x in range(n) if x not in set(subset))
    padded_image = [None] * n
    for i, x in enumerate(subset):
        padded_image[x] = subset[rest(i)]
    for x in complement:
        padded_image[x] = x
    lhs = hamming(a, Perm(padded_image))
    rhs = Fraction(constant) * Fraction(n - len(subset), n)
    return lhs, rhs


def padded_restriction(a: Perm, subset) -> Perm:
    """a|_Y extended by the identity on the complement, as a degree-|X| perm."""
    subset = tuple(subset)
    rest = restrict(a, subset)
    image = list(range(a.degree))
    for i, x in enumerate(subset):
        image[x] = subset[rest(i)]
    return Perm(image)


def iterated_restriction_bound(a: Perm, subset_y, subset_z, constant=3):
    """d((a|_Y)|_Z, a|_Z) <= constant * (|X|-|Z|) / |Z|, for Z ⊆ Y ⊆ X.

    subset_z is given in X-coordinates and must be contained in subset_y.
    """
    subset_y = tuple(subset_y)
    subset_z = tuple(subset_z)
    if not set(subset_z) <= set(subset_y):
        raise SpecError("Z must sit inside Y")
    a_y = restrict(a, subset_y)
    pos_y = {x: i for i, x in enumerate(subset_y)}
    z_in_y = tuple(pos_y[x] for x in subset_z)
    lhs = hamming(restrict(a_y, z_in_y), restrict(a, subset_z))
    rhs = Fraction(constant) * Fraction(a.degree - len(subset_z), len(subset_z))
    return lhs, rhs


def restricted_distance_bound(a: Perm, b: Perm, subset, constant=3):
    """|d(a,b) - d(a|_Y, b|_Y) |Y|/|X|| <= constant * (|X|-|Y|) / |X|.

    Holds with constant 3, which is tight; no smaller constant works for
    every canonical completion.
    """
    subset = tuple(subset)
    n = a.degree
    inner = hamming(restrict(a, subset), restrict(b, subset))
    lhs = abs(hamming(a, b) - inner * Fraction(len(subset), n))
    rhs = Fraction(constant) * Fraction(n - len(subset), n)
    return lhs, rhs


def restricted_word_defect_bound(g: GenMap, subset, relation: Word, constant=3):
    """Defect of a restricted genuine map on a relation word.

    For g a genuine homomorphism (the relation evaluates to the identity),
    the restriction of every generator image to Y evaluates the relation
    within constant * |r| * (|X|-|Y|) / |Y| of the identity.
    """
    subset = tuple(subset)
    restricted = GenMap(
        g.names, {s: restrict(g.images[s], subset) for s in g.names}
    )
    lhs = hamming(
        evaluate_word(restricted, relation), Perm.identity(len(subset))
    )
    gap = Fraction(g.degree - len(subset), len(subset))
    rhs = Fraction(constant) * len(relation) * gap
    return lhs, rhs

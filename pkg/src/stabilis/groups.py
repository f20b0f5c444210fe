"""Finite groups as multiplication tables, their actions, and Burnside data.

A FiniteGroup is a validated multiplication table over element indices.
Subgroups are enumerated exhaustively up to the configured order cap
(env var STABILIS_CAP, default 48), grouped into conjugacy classes with a
canonical order; those classes index the coordinates of BurnsideVector.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import CapExceeded, SpecError
from .perm import Perm, coproduct_many, hamming

DEFAULT_CAP = 48


def order_cap() -> int:
    return int(os.environ.get("STABILIS_CAP", DEFAULT_CAP))


class FiniteGroup:
    """Immutable multiplication-table group.

    Elements are the indices 0..order-1.  `generators` defaults to all
    elements (the convention used for embedded finite subgroups).
    """

    def __init__(self, mult, generators=None, element_names=None, check=True):
        mult = tuple(tuple(row) for row in mult)
        n = len(mult)
        if any(len(row) != n for row in mult):
            raise SpecError("multiplication table must be square")
        if any(not 0 <= v < n for row in mult for v in row):
            raise SpecError("table entries out of range")
        self.mult = mult
        self.order = n
        identity = None
        for e in range(n):
            if all(mult[e][x] == x and mult[x][e] == x for x in range(n)):
                identity = e
                break
        if identity is None:
            raise SpecError("no identity element in table")
        self.identity = identity
        inverse = [None] * n
        for a in range(n):
            for b in range(n):
                if mult[a][b] == identity and mult[b][a] == identity:
                    inverse[a] = b
                    break
            if inverse[a] is None:
                raise SpecError(f"element {a} has no inverse")
        self.inverse = tuple(inverse)
        if check and n <= order_cap():
            for a in range(n):
                for b in range(n):
                    ab = mult[a][b]
                    for c in range(n):
                        if mult[ab][c] != mult[a][mult[b][c]]:
                            raise SpecError("table is not associative")
        if generators is None:
            generators = tuple(range(n))
        else:
            generators = tuple(generators)
            if self._closure(generators) != frozenset(range(n)):
                raise SpecError("declared generators do not generate")
        self.generators = generators
        self.element_names = tuple(element_names) if element_names else None

    # -- basic operations ---------------------------------------------------

    def op(self, a, b):
        return self.mult[a][b]

    def inv(self, a):
        return self.inverse[a]

    def conjugate(self, g, a):
        """g a g^{-1}."""
        return self.mult[self.mult[g][a]][self.inverse[g]]

    def name_of(self, a):
        if self.element_names:
            return self.element_names[a]
        return str(a)

    def _closure(self, seed):
        seen = {self.identity, *seed}
        frontier = list(seen)
        while frontier:
            nxt = []
            for a in frontier:
                for g in seed:
                    for c in (self.mult[a][g], self.mult[g][a]):
                        if c not in seen:
                            seen.add(c)
                            nxt.append(c)
            frontier = nxt
        return frozenset(seen)

    @cached_property
    def generator_words(self):
        """A word in `generators` for every element, found by BFS.

        The identity gets the empty word.  Used to extend generator data to
        whole-group data.
        """
        words = {self.identity: ()}
        queue = [self.identity]
        while queue:
            nxt = []
            for a in queue:
                for g in self.generators:
                    b = self.mult[a][g]
                    if b not in words:
                        words[b] = words[a] + (g,)
                        nxt.append(b)
            queue = nxt
        if len(words) != self.order:
            raise SpecError("generators do not generate")  # defensive
        return tuple(words[a] for a in range(self.order))

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_perm_generators(cls, perms, cap=None):
        """Closure of a list of equal-degree permutations, BFS element order."""
        cap = cap or order_cap()
        perms = [p if isinstance(p, Perm) else Perm(p) for p in perms]
        if perms:
            deg = perms[0].degree
            if any(p.degree != deg for p in perms):
                raise SpecError("generating permutations have mixed degrees")
        else:
            deg = 0
        ident = Perm.identity(deg)
        elements = [ident]
        index = {ident: 0}
        queue = [ident]
        while queue:
            nxt = []
            for a in queue:
                for g in perms:
                    b = a * g
                    if b not in index:
                        if len(elements) >= cap:
                            raise CapExceeded(
                                f"closure exceeds cap {cap}"
                            )
                        index[b] = len(elements)
                        elements.append(b)
                        nxt.append(b)
            queue = nxt
        n = len(elements)
        mult = [[index[elements[a] * elements[b]] for b in range(n)] for a in range(n)]
        gens = tuple(index[g] for g in perms) or (0,)
        group = cls(mult, generators=gens)
        group.seed_perms = tuple(elements)
        return group

    @classmethod
    def cyclic(cls, n):
        mult = [[(a + b) % n for b in range(n)] for a in range(n)]
        return cls(mult, generators=(1 % n,))

    @classmethod
    def dihedral(cls, n):
        """Dihedral group of order 2n, as symmetries of an n-gon."""
        rot = Perm(tuple((i + 1) % n for i in range(n)))
        flip = Perm(tuple((n - i) % n for i in range(n)))
        return cls.from_perm_generators([rot, flip])

    @classmethod
    def symmetric(cls, n):
        if n <= 1:
            return cls.trivial()
        cycle = Perm(tuple((i + 1) % n for i in range(n)))
        swap = Perm((1, 0) + tuple(range(2, n)))
        return cls.from_perm_generators([cycle, swap])

    @classmethod
    def trivial(cls):
        return cls(((0,),), generators=(0,))

    @classmethod
    def direct_product(cls, a, b):
        """Direct product with index (i, j) -> i * |b| + j."""
        n, m = a.order, b.order
        mult = [
            [a.mult[i1][i2] * m + b.mult[j1][j2] for i2 in range(n) for j2 in range(m)]
            for i1 in range(n)
            for j1 in range(m)
        ]
        gens = tuple(g * m + b.identity for g in a.generators) + tuple(
            a.identity * m + g for g in b.generators
        )
        return cls(mult, generators=gens)

    # -- subgroup machinery ---------------------------------------------------

    @cached_property
    def all_subgroups(self):
        """Every subgroup, as a sorted tuple of frozensets.

        Breadth-first closure over cyclic subgroups and pairwise joins.
        """
        if self.order > order_cap():
            raise CapExceeded(
                f"subgroup enumeration capped at order {order_cap()}"
            )
        subs = set()
        for g in range(self.order):
            subs.add(self._closure((g,)))
        frontier = set(subs)
        while frontier:
            new = set()
            for a in frontier:
                for b in subs:
                    if a <= b or b <= a:
                        continue
                    j = self._closure(a | b)
                    if j not in subs and j not in new:
                        new.add(j)
            subs |= new
            frontier = new
        return tuple(sorted(subs, key=lambda s: (len(s), sorted(s))))

    @cached_property
    def subgroup_classes(self):
        """Conjugacy classes of subgroups, canonically ordered.

        Order: by subgroup order, then by the sorted element tuple of the
        lexicographically minimal class member (the representative).
        """
        classes = []
        seen = set()
        for sub in self.all_subgroups:
            if sub in seen:
                continue
            orbit = {frozenset(self.conjugate(g, x) for x in sub) for g in range(self.order)}
            seen |= orbit
            members = tuple(sorted(orbit, key=lambda s: sorted(s)))
            classes.append(members)
        classes.sort(key=lambda mem: (len(mem[0]), sorted(mem[0])))
        return tuple(
            SubgroupClass(self, i, mem[0], mem) for i, mem in enumerate(classes)
        )

    @cached_property
    def _class_of_subgroup(self):
        lookup = {}
        for cls_ in self.subgroup_classes:
            for member in cls_.members:
                lookup[member] = cls_.index
        return lookup

    def class_index(self, elements):
        """Index of the conjugacy class of the subgroup with these elements."""
        key = frozenset(elements)
        try:
            return self._class_of_subgroup[key]
        except KeyError:
            raise SpecError("not a subgroup of this group") from None

    def is_normal(self, elements):
        sub = frozenset(elements)
        return all(
            frozenset(self.conjugate(g, x) for x in sub) == sub
            for g in range(self.order)
        )

    def __repr__(self):
        return f"FiniteGroup(order={self.order})"


@dataclass(frozen=True)
class SubgroupClass:
    group: FiniteGroup
    index: int
    representative: frozenset
    members: tuple

    @property
    def subgroup_order(self):
        return len(self.representative)

    @property
    def action_degree(self):
        """Degree of the transitive action on cosets of the representative."""
        return self.group.order // len(self.representative)


@dataclass(frozen=True)
class Subgroup:
    """A concrete subgroup: closed, inverse-closed, contains the identity."""

    parent: FiniteGroup
    elements: tuple

    def __post_init__(self):
        elems = frozenset(self.elements)
        g = self.parent
        if g.identity not in elems:
            raise SpecError("subgroup must contain the identity")
        for a in elems:
            if g.inverse[a] not in elems:
                raise SpecError("subgroup not closed under inverse")
            for b in elems:
                if g.mult[a][b] not in elems:
                    raise SpecError("subgroup not closed under multiplication")
        object.__setattr__(self, "elements", tuple(sorted(elems)))

    @property
    def order(self):
        return len(self.elements)


class GroupAction:
    """A genuine action: one permutation per group element, verified exactly."""

    def __init__(self, group: FiniteGroup, images, check=True):
        self.group = group
        images = tuple(images)
        if len(images) != group.order:
            raise SpecError("need one permutation per group element")
        self.images = images
        degs = {p.degree for p in images}
        if len(degs) > 1:
            raise SpecError("action images have mixed degrees")
        self.degree = images[0].degree if images else 0
        if check:
            if not images[group.identity].is_identity():
                raise SpecError("identity element must act as the identity")
            for a in range(group.order):
                for b in range(group.order):
                    if images[group.mult[a][b]] != images[a] * images[b]:
                        raise SpecError(
                            f"images are not multiplicative at ({a}, {b})"
                        )

    def __call__(self, g):
        return self.images[g]

    @classmethod
    def from_generator_images(cls, group, gen_images):
        """Extend images of the group's generators to the whole group.

        Only valid when the result is a genuine action (verified).
        """
        degree = next(iter(gen_images.values())).degree
        images = []
        for word in group.generator_words:
            p = Perm.identity(degree)
            for g in word:
                p = p * gen_images[g]
            images.append(p)
        return cls(group, images)

    @classmethod
    def trivial(cls, group, degree):
        ident = Perm.identity(degree)
        return cls(group, [ident] * group.order, check=False)

    @cached_property
    def orbits(self):
        """Orbits as sorted point tuples, ordered by minimal point."""
        seen = [False] * self.degree
        out = []
        for x in range(self.degree):
            if seen[x]:
                continue
            orbit = {x}
            stack = [x]
            while stack:
                y = stack.pop()
                for p in self.images:
                    z = p(y)
                    if z not in orbit:
                        orbit.add(z)
                        stack.append(z)
            for y in orbit:
                seen[y] = True
            out.append(tuple(sorted(orbit)))
        return tuple(out)

    def stabilizer(self, x):
        return frozenset(g for g in range(self.group.order) if self.images[g](x) == x)

    def sub_action(self, subset):
        """The action on an invariant subset, reindexed to positions."""
        subset = tuple(subset)
        pos = {x: i for i, x in enumerate(subset)}
        images = []
        for p in self.images:
            img = [None] * len(subset)
            for i, x in enumerate(subset):
                y = p(x)
                if y not in pos:
                    raise SpecError("subset is not invariant")
                img[i] = pos[y]
            images.append(Perm(img))
        return GroupAction(self.group, images, check=False)

    def conjugated(self, t: Perm):
        """The action g -> t ∘ g ∘ t^{-1} on the same set."""
        tinv = t.inverse()
        return GroupAction(
            self.group, [t * p * tinv for p in self.images], check=False
        )

    def coproduct(self, other):
        if other.group is not self.group:
            raise SpecError("coproduct requires a shared group")
        return GroupAction(
            self.group,
            [coproduct_many([p, q]) for p, q in zip(self.images, other.images)],
            check=False,
        )

    def distance(self, other, over=None):
        """max_g hamming(self(g), other(g)) over `over` (default: all)."""
        if other.degree != self.degree:
            raise SpecError("degree mismatch")
        elems = range(self.group.order) if over is None else over
        worst = Fraction(0)
        for g in elems:
            worst = max(worst, hamming(self.images[g], other.images[g]))
        return worst

    def __eq__(self, other):
        return (
            isinstance(other, GroupAction)
            and other.group is self.group
            and other.images == self.images
        )

    def __hash__(self):
        return hash((id(self.group), self.images))


def coset_action(group: FiniteGroup, subgroup) -> GroupAction:
    """Left-multiplication action on left cosets, ordered by minimal element."""
    if isinstance(subgroup, Subgroup):
        elems = subgroup.elements
    else:
        elems = tuple(sorted(subgroup))
        Subgroup(group, elems)  # validates
    cosets = {}
    for g in range(group.order):
        coset = frozenset(group.mult[g][s] for s in elems)
        key = min(coset)
        cosets[key] = coset
    reps = sorted(cosets)
    coset_index = {}
    for i, r in enumerate(reps):
        for x in cosets[r]:
            coset_index[x] = i
    images = []
    for a in range(group.order):
        images.append(Perm(tuple(coset_index[group.mult[a][r]] for r in reps)))
    return GroupAction(group, images, check=False)


class BurnsideVector:
    """Integer coefficients over the group's transitive-action types."""

    __slots__ = ("group", "coeffs")

    def __init__(self, group: FiniteGroup, coeffs):
        coeffs = tuple(int(c) for c in coeffs)
        if len(coeffs) != len(group.subgroup_classes):
            raise SpecError("coefficient length must match the class count")
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, *a):
        raise AttributeError("BurnsideVector is immutable")

    @classmethod
    def zero(cls, group):
        return cls(group, [0] * len(group.subgroup_classes))

    @classmethod
    def unit(cls, group, class_index, count=1):
        coeffs = [0] * len(group.subgroup_classes)
        coeffs[class_index] = count
        return cls(group, coeffs)

    @classmethod
    def trivial_type(cls, group, count=1):
        """`count` copies of the one-point action type."""
        full = group.class_index(range(group.order))
        return cls.unit(group, full, count)

    def _check(self, other):
        if other.group is not self.group:
            raise SpecError("vectors live over different groups")

    def norm(self):
        return sum(
            abs(c) * cls_.action_degree
            for c, cls_ in zip(self.coeffs, self.group.subgroup_classes)
        )

    def is_nonneg(self):
        return all(c >= 0 for c in self.coeffs)

    def meet(self, other):
        self._check(other)
        return BurnsideVector(
            self.group, [min(a, b) for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __add__(self, other):
        self._check(other)
        return BurnsideVector(
            self.group, [a + b for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __sub__(self, other):
        self._check(other)
        return BurnsideVector(
            self.group, [a - b for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __le__(self, other):
        self._check(other)
        return all(a <= b for a, b in zip(self.coeffs, other.coeffs))

    def __eq__(self, other):
        return (
            isinstance(other, BurnsideVector)
            and other.group is self.group
            and other.coeffs == self.coeffs
        )

    def __hash__(self):
        return hash((id(self.group), self.coeffs))

    def __repr__(self):
        parts = []
        for c, cls_ in zip(self.coeffs, self.group.subgroup_classes):
            if c:
                parts.append(f"{c}*[G/S{cls_.index}]")
        return "BurnsideVector(" + (" + ".join(parts) or "0") + ")"


def classify(action: GroupAction) -> BurnsideVector:
    """Orbit decomposition type: +1 per orbit to its stabilizer's class."""
    group = action.group
    coeffs = [0] * len(group.subgroup_classes)
    for orbit in action.orbits:
        stab = action.stabilizer(orbit[0])
        coeffs[group.class_index(stab)] += 1
    return BurnsideVector(group, coeffs)


def realize(vector: BurnsideVector) -> GroupAction:
    """Coproduct of coset actions matching the vector, in canonical order."""
    if not vector.is_nonneg():
        raise SpecError("cannot realize a vector with negative coefficients")
    group = vector.group
    blocks = []
    for c, cls_ in zip(vector.coeffs, group.subgroup_classes):
        if c:
            base = coset_action(group, cls_.representative)
            blocks.extend([base] * c)
    if not blocks:
        return GroupAction.trivial(group, 0)
    images = []
    for g in range(group.order):
        images.append(coproduct_many([b.images[g] for b in blocks]))
    return GroupAction(group, images, check=False)


def assemble_action(group: FiniteGroup, pieces) -> GroupAction:
    """Glue actions living on disjoint point lists into one action.

    `pieces` is a list of (action, points); the point lists must partition
    range(total).  Piece i acts through its point list, so the result
    restricted to that list is a relabeled copy of the piece.
    """
    total = sum(len(points) for _, points in pieces)
    seen = set()
    for act, points in pieces:
        if act.group is not group:
            raise SpecError("assemble_action pieces must share the group")
        if len(points) != act.degree:
            raise SpecError("piece degree does not match its point list")
        seen.update(points)
    if seen != set(range(total)):
        raise SpecError("point lists must partition the ambient set")
    images = []
    for g in range(group.order):
        image = [None] * total
        for act, points in pieces:
            p = act.images[g]
            for i, x in enumerate(points):
                image[x] = points[p(i)]
        images.append(Perm(image))
    return GroupAction(group, images, check=False)


def invariant_subset_of_type(action: GroupAction, vector: BurnsideVector):
    """Points of an invariant subset whose sub-action has the given type.

    For each transitive type the first `vector` many orbits (in canonical
    orbit order) are selected.  Requires vector <= classify(action).
    """
    if not vector.is_nonneg():
        raise SpecError("type vector must be nonnegative")
    group = action.group
    remaining = list(vector.coeffs)
    points = []
    for orbit in action.orbits:
        cls = group.class_index(action.stabilizer(orbit[0]))
        if remaining[cls] > 0:
            remaining[cls] -= 1
            points.extend(orbit)
    if any(r > 0 for r in remaining):
        raise SpecError("action does not contain the requested type")
    return tuple(sorted(points))

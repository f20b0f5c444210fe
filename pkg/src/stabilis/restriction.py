"""Restriction of group actions and Burnside vectors to finite subgroups.

An Inclusion is a verified embedding H -> G.  Restricting the transitive
G-types to H yields the restriction cone; its gcd-normalized directions
drive both the extension-property test and the decomposing maps used by
the strict stabilization pipelines.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .conjugator import conjugate_close
from .cones import IntCone, LinearMapZ, PrimitiveCone, member
from .errors import SpecError
from .groups import (
    BurnsideVector,
    FiniteGroup,
    GroupAction,
    assemble_action,
    classify,
    coset_action,
    invariant_subset_of_type,
    realize,
)
from .intlin import normalize_direction
from .perm import hamming


@dataclass(frozen=True)
class Inclusion:
    """An injective homomorphism H -> G given on all elements of H."""

    sub: FiniteGroup
    amb: FiniteGroup
    embed: tuple

    def __post_init__(self):
        embed = tuple(int(x) for x in self.embed)
        object.__setattr__(self, "embed", embed)
        h, g = self.sub, self.amb
        if len(embed) != h.order:
            raise SpecError("embedding must cover every subgroup element")
        if len(set(embed)) != h.order:
            raise SpecError("embedding is not injective")
        if any(not 0 <= x < g.order for x in embed):
            raise SpecError("embedding hits elements outside the group")
        for a in range(h.order):
            for b in range(h.order):
                if embed[h.mult[a][b]] != g.mult[embed[a]][embed[b]]:
                    raise SpecError("embedding is not a homomorphism")

    @classmethod
    def identity(cls, group):
        return cls(group, group, tuple(range(group.order)))

    @cached_property
    def image_elements(self):
        return frozenset(self.embed)

    @cached_property
    def is_normal(self):
        return self.amb.is_normal(self.image_elements)

    def restrict_action(self, action: GroupAction) -> GroupAction:
        """The H-action obtained by composing with the embedding."""
        if action.group is not self.amb:
            raise SpecError("action is not over the ambient group")
        return GroupAction(
            self.sub, [action.images[g] for g in self.embed], check=False
        )


@dataclass(frozen=True)
class RestrictionData:
    """Restriction images of all transitive types, plus cone structure.

    cone_generators[i] is the H-type of the restricted coset action for
    the i-th G-class; `directions` are the distinct gcd-normalized
    generator directions in canonical (sorted) order.
    """

    inclusion: Inclusion
    cone_generators: tuple  # BurnsideVector over H per G-class
    directions: tuple  # distinct normalized coefficient tuples, sorted
    multipliers: tuple  # per G-class: gcd of its generator
    direction_of_class: tuple  # per G-class: index into `directions`
    normal: bool

    @cached_property
    def cone(self) -> IntCone:
        """Integer cone spanned by the distinct restriction images.

        Coordinates are H-classes, weights their transitive degrees, so the
        cone norm is the Burnside norm.
        """
        h = self.inclusion.sub
        weights = tuple(c.action_degree for c in h.subgroup_classes)
        distinct = []
        for v in self.cone_generators:
            if v.coeffs not in distinct:
                distinct.append(v.coeffs)
        return IntCone(len(h.subgroup_classes), tuple(distinct), weights)

    @cached_property
    def generator_class_of_vector(self):
        """Canonical G-class realizing each distinct cone generator."""
        lookup = {}
        for i, v in enumerate(self.cone_generators):
            lookup.setdefault(v.coeffs, i)
        return lookup

    def vector_preimage(self, coeff_cert):
        """Pull a cone-membership certificate back to a G-type vector."""
        g = self.inclusion.amb
        out = [0] * len(g.subgroup_classes)
        for count, gen in zip(coeff_cert, self.cone.generators):
            if count:
                out[self.generator_class_of_vector[gen]] += count
        return BurnsideVector(g, out)


def restrict_vector(inc: Inclusion, v: BurnsideVector) -> BurnsideVector:
    """The linear extension of per-type restriction; preserves the norm."""
    if v.group is not inc.amb:
        raise SpecError("vector is not over the ambient group")
    if not v.is_nonneg():
        raise SpecError("restriction is defined on nonnegative vectors")
    data = compute_restriction_data(inc)
    out = BurnsideVector.zero(inc.sub)
    for c, gen in zip(v.coeffs, data.cone_generators):
        for _ in range(c):
            out = out + gen
    return out


_RESTRICTION_CACHE = {}


def compute_restriction_data(inc: Inclusion) -> RestrictionData:
    key = (id(inc.sub), id(inc.amb), inc.embed)
    cached = _RESTRICTION_CACHE.get(key)
    if cached is not None:
        return cached
    g = inc.amb
    gens = []
    for cls_ in g.subgroup_classes:
        act = coset_action(g, cls_.representative)
        restricted = inc.restrict_action(act)
        vec = classify(restricted)
        if vec.norm() != cls_.action_degree:
            raise SpecError("restriction failed to preserve the degree")
        gens.append(vec)
    directions = []
    multipliers = []
    dir_of_class = []
    for vec in gens:
        direction, mult = normalize_direction(vec.coeffs)
        if direction not in directions:
            directions.append(direction)
        multipliers.append(mult)
        dir_of_class.append(direction)
    directions.sort()
    data = RestrictionData(
        inclusion=inc,
        cone_generators=tuple(gens),
        directions=tuple(directions),
        multipliers=tuple(multipliers),
        direction_of_class=tuple(directions.index(d) for d in dir_of_class),
        normal=inc.is_normal,
    )
    _RESTRICTION_CACHE[key] = data
    return data


@dataclass(frozen=True)
class ExtensionReport:
    holds: bool
    certificates: tuple = None  # per H-class: cone certificate when holds
    missing_class: int = None  # witness H-class index when it fails


def extension_property(inc: Inclusion) -> ExtensionReport:
    """Whether every H-type is a restriction of some G-type combination.

    True iff every basis vector of the H-type space lies in the
    restriction cone; the certificate (or the unreachable basis vector)
    is returned.
    """
    data = compute_restriction_data(inc)
    h = inc.sub
    cone = data.cone
    certs = []
    for idx in range(len(h.subgroup_classes)):
        target = tuple(1 if i == idx else 0 for i in range(len(h.subgroup_classes)))
        res = member(cone, target)
        if res.status == "budget":
            raise SpecError("extension check exceeded its search budget")
        if not res.certified_in:
            return ExtensionReport(False, None, idx)
        certs.append(res.certificate)
    return ExtensionReport(True, tuple(certs), None)


def full_support_witness(inc: Inclusion) -> BurnsideVector:
    """A restriction-cone vector with every coordinate strictly positive.

    The sum of the restrictions of the coset types [G / H0] over all
    subgroup classes H0 of H; the orbit of the trivial coset under H has
    stabilizer exactly H0, so every H-class shows up.
    """
    g, h = inc.amb, inc.sub
    total = BurnsideVector.zero(h)
    for cls_ in h.subgroup_classes:
        elems = sorted(inc.embed[x] for x in cls_.representative)
        act = coset_action(g, elems)
        total = total + classify(inc.restrict_action(act))
    if not all(c > 0 for c in total.coeffs):
        raise SpecError("witness lost a coordinate")  # defensive
    return total


# ---------------------------------------------------------------------------
# Norm-vs-distance comparison between action types.
# ---------------------------------------------------------------------------


def type_gap_vs_distance(phi1: GroupAction, phi2: GroupAction):
    """(||type gap||, |H| * d_H * |X|): the left side never exceeds the right.

    The agreement set argument gives the explicit constant |H|.
    """
    if phi1.group is not phi2.group or phi1.degree != phi2.degree:
        raise SpecError("actions must share group and degree")
    gap = (classify(phi1) - classify(phi2)).norm()
    h = phi1.group.order
    rhs = Fraction(h) * phi1.distance(phi2) * phi1.degree
    return Fraction(gap), rhs


def action_with_type(phi1: GroupAction, xi: BurnsideVector) -> GroupAction:
    """An action of type xi differing from phi1 on a minimal sub-object.

    Requires ||xi|| == degree(phi1).  The common part min(type, xi) is
    kept in place; the complement is re-realized, so
    d_H(phi1, result) * |X| <= ||type(phi1) - xi||.
    """
    if xi.group is not phi1.group:
        raise SpecError("type vector is over the wrong group")
    if not xi.is_nonneg():
        raise SpecError("target type must be nonnegative")
    if xi.norm() != phi1.degree:
        raise SpecError("target norm must equal the degree")
    current = classify(phi1)
    common = current.meet(xi)
    kept = invariant_subset_of_type(phi1, common)
    rest = tuple(x for x in range(phi1.degree) if x not in set(kept))
    filler = realize(xi - common)
    result = assemble_action(
        phi1.group,
        [(phi1.sub_action(kept), kept), (filler, rest)],
    )
    if classify(result) != xi:
        raise SpecError("retyping failed")  # defensive
    return result


# ---------------------------------------------------------------------------
# Alteration repair: make a G-action restrict exactly to a prescribed
# H-action, moving the G-action as little as the discrepancy allows.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlterationReport:
    repaired: GroupAction
    distance: Fraction  # max over G elements, against the input action
    input_gap: Fraction  # d_H(psi0, restricted input)
    cut_fraction: Fraction  # |removed subobject| / |X|


def alteration_repair(inc: Inclusion, phi: GroupAction, psi0: GroupAction) -> AlterationReport:
    """Adjust phi so that its H-restriction equals psi0 exactly.

    Follows the greedy-cover construction: keep the largest invariant
    piece of phi whose restriction fits under psi0, re-realize the rest
    through the restriction cone (this needs the extension property), and
    finish with the conjugator so the restriction matches psi0 on the
    nose, not just in type.
    """
    if phi.group is not inc.amb:
        raise SpecError("phi must be an ambient-group action")
    if psi0.group is not inc.sub:
        raise SpecError("psi0 must be a subgroup action")
    if phi.degree != psi0.degree:
        raise SpecError("degree mismatch")
    ext = extension_property(inc)
    if not ext.holds:
        raise SpecError("inclusion has no extension property")
    data = compute_restriction_data(inc)
    g, h = inc.amb, inc.sub

    restricted = inc.restrict_action(phi)
    input_gap = restricted.distance(psi0)
    phi_type = classify(phi)
    res_type = classify(restricted)
    psi0_type = classify(psi0)
    xi = res_type.meet(psi0_type)
    to_cover = res_type - xi  # what must be cut, measured downstairs

    # Greedy cover: zeta' <= phi_type with restriction >= to_cover.
    zeta = BurnsideVector.zero(g)
    zeta_res = BurnsideVector.zero(h)
    covered = zeta_res.meet(to_cover)
    order = sorted(
        range(len(g.subgroup_classes)),
        key=lambda i: (-g.subgroup_classes[i].action_degree, i),
    )
    while not (to_cover <= zeta_res):
        progress = None
        for cls_idx in order:
            if zeta.coeffs[cls_idx] >= phi_type.coeffs[cls_idx]:
                continue
            step = data.cone_generators[cls_idx]
            new_covered = (zeta_res + step).meet(to_cover)
            if new_covered.norm() > covered.norm():
                progress = (cls_idx, step, new_covered)
                break
        if progress is None:
            raise SpecError("greedy cover stalled")  # cannot happen: types agree
        cls_idx, step, covered = progress
        zeta = zeta + BurnsideVector.unit(g, cls_idx)
        zeta_res = zeta_res + step

    # Keep the complement of the covered piece, in place.
    keep_type = phi_type - zeta
    kept = invariant_subset_of_type(phi, keep_type)
    cut = tuple(x for x in range(phi.degree) if x not in set(kept))
    kept_action = phi.sub_action(kept)
    rho = psi0_type - classify(inc.restrict_action(kept_action))
    if not rho.is_nonneg():
        raise SpecError("cover selection broke the residue")  # defensive
    res = member(data.cone, rho.coeffs)
    if not res.certified_in:
        raise SpecError("residue escaped the restriction cone")  # defensive
    omega = data.vector_preimage(res.certificate)
    alpha = realize(omega)
    beta = assemble_action(g, [(kept_action, kept), (alpha, cut)])

    cert = conjugate_close(psi0, inc.restrict_action(beta))
    repaired = beta.conjugated(cert.t)
    final_res = inc.restrict_action(repaired)
    for idx in range(h.order):
        if final_res.images[idx] != psi0.images[idx]:
            raise SpecError("alteration repair failed exactness")
    return AlterationReport(
        repaired=repaired,
        distance=phi.distance(repaired),
        input_gap=input_gap,
        cut_fraction=Fraction(len(cut), phi.degree) if phi.degree else Fraction(0),
    )


# ---------------------------------------------------------------------------
# Decomposing maps: norm-preserving projections of the G-type space onto a
# primitive cone, one component per restriction direction.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecomposingMap:
    """Coordinates for G-types along restriction directions.

    Each G-class maps to (its direction axis, its multiplier); the image
    cone is primitive with one numerical-semigroup component per axis and
    the axis weight equals the direction's Burnside norm, so the map is
    norm-preserving on nonnegative vectors.
    """

    group: FiniteGroup
    pcone: PrimitiveCone
    class_axis: tuple  # per G-class: axis index
    class_mult: tuple  # per G-class: positive multiplier
    axis_labels: tuple  # human-readable direction data (H-class coeff tuples)

    @cached_property
    def _axis_mult_class(self):
        lookup = {}
        for cls_idx, (axis, mult) in enumerate(zip(self.class_axis, self.class_mult)):
            lookup.setdefault((axis, mult), cls_idx)
        return lookup

    @property
    def rank(self):
        return self.pcone.rank

    def apply(self, v: BurnsideVector):
        if v.group is not self.group:
            raise SpecError("vector over the wrong group")
        coords = [0] * self.rank
        for c, axis, mult in zip(v.coeffs, self.class_axis, self.class_mult):
            coords[axis] += c * mult
        return tuple(coords)

    def axis_of_class(self, cls_idx):
        return self.class_axis[cls_idx]

    def norm_coords(self, coords):
        return self.pcone.norm_coords(coords)

    def preimage(self, coords) -> BurnsideVector:
        """A nonnegative G-type vector mapping onto the given coordinates."""
        certs = self.pcone.member_coords(coords)
        if certs is None:
            raise SpecError("coordinates outside the image cone")
        out = [0] * len(self.group.subgroup_classes)
        for axis, cert in enumerate(certs):
            for mult, count in cert.items():
                cls_idx = self._axis_mult_class.get((axis, mult))
                if cls_idx is None:
                    raise SpecError("certificate used a phantom multiplier")
                out[cls_idx] += count
        vec = BurnsideVector(self.group, out)
        if self.apply(vec) != tuple(coords):
            raise SpecError("preimage mismatch")  # defensive
        return vec

    @property
    def trivial_axis(self):
        """Axis carrying the one-point type (always present)."""
        full = self.group.class_index(range(self.group.order))
        return self.class_axis[full]


def decomposing_map(inc: Inclusion) -> DecomposingMap:
    """Decomposing map of a restriction; needs independent directions.

    Always valid for normal inclusions (orbit-sum directions have disjoint
    supports); raises SpecError when the directions are dependent.
    """
    data = compute_restriction_data(inc)
    h = inc.sub
    weights = tuple(c.action_degree for c in h.subgroup_classes)
    distinct = []
    for v in data.cone_generators:
        if v.coeffs not in distinct:
            distinct.append(v.coeffs)
    pcone = PrimitiveCone(tuple(distinct), data.directions, weights)
    class_axis = []
    class_mult = []
    for vec, mult in zip(data.cone_generators, data.multipliers):
        direction, _ = normalize_direction(vec.coeffs)
        class_axis.append(data.directions.index(direction))
        class_mult.append(mult)
    return DecomposingMap(
        group=inc.amb,
        pcone=pcone,
        class_axis=tuple(class_axis),
        class_mult=tuple(class_mult),
        axis_labels=data.directions,
    )


def difference_map(dmap: DecomposingMap) -> LinearMapZ:
    """d sending axis coordinates to the H-type space: direction values."""
    hdim = len(dmap.axis_labels[0])
    rows = []
    for i in range(hdim):
        rows.append(tuple(label[i] for label in dmap.axis_labels))
    sub_weights = None
    return LinearMapZ(tuple(rows), sub_weights)


def _direction_norm(direction, h: FiniteGroup) -> int:
    return sum(
        abs(c) * cls_.action_degree
        for c, cls_ in zip(direction, h.subgroup_classes)
    )


def hnn_decomposing_map(i1: Inclusion, i2: Inclusion) -> DecomposingMap:
    """Decomposing map for a pair of embeddings of one finite subgroup.

    Each G-class maps to the formal pair of its two restriction
    directions.  Distinct pairs are independent by construction (they are
    basis elements of the free module on pairs), so the cone coordinates
    are simply one unit axis per occurring pair; the axis weight is
    lcm(||a1||, ||a2||), which keeps the map norm-preserving.  The axis
    label stores (l1 * a1, l2 * a2) concatenated, from which the
    difference map is read off.
    """
    if i1.amb is not i2.amb or i1.sub is not i2.sub:
        raise SpecError("embeddings must share the group and the subgroup")
    from math import lcm

    data1 = compute_restriction_data(i1)
    data2 = compute_restriction_data(i2)
    g, h = i1.amb, i1.sub

    pair_label = []
    class_pair = []
    class_mult = []
    for cls_idx, cls_ in enumerate(g.subgroup_classes):
        d1 = data1.directions[data1.direction_of_class[cls_idx]]
        d2 = data2.directions[data2.direction_of_class[cls_idx]]
        n1 = _direction_norm(d1, h)
        n2 = _direction_norm(d2, h)
        common = lcm(n1, n2)
        l1, l2 = common // n1, common // n2
        label = tuple(l1 * c for c in d1) + tuple(l2 * c for c in d2)
        degree = cls_.action_degree
        if degree % common:
            raise SpecError("pair direction does not divide the degree")
        if label not in pair_label:
            pair_label.append(label)
        class_pair.append(label)
        class_mult.append(degree // common)
    pair_label.sort()
    rank = len(pair_label)
    hdim = len(h.subgroup_classes)

    def unit(i):
        return tuple(1 if j == i else 0 for j in range(rank))

    axes = tuple(unit(i) for i in range(rank))
    gens = []
    class_axis = []
    for label, mult in zip(class_pair, class_mult):
        axis = pair_label.index(label)
        class_axis.append(axis)
        gen = tuple(mult if j == axis else 0 for j in range(rank))
        if gen not in gens:
            gens.append(gen)
    weights = tuple(
        Fraction(sum(abs(c) * cls_.action_degree
                     for c, cls_ in zip(label[:hdim], h.subgroup_classes)))
        for label in pair_label
    )
    pcone = PrimitiveCone(tuple(gens), axes, weights)
    return DecomposingMap(
        group=g,
        pcone=pcone,
        class_axis=tuple(class_axis),
        class_mult=tuple(class_mult),
        axis_labels=tuple(pair_label),
    )

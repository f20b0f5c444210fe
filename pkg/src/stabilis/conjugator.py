"""The constructive conjugator argument for permutation actions.

Two actions of a finite group with equal decomposition type and small
Hamming distance are conjugate by a permutation supported on the points
where they disagree; the conjugating element is built orbit-by-orbit and
verified exactly before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import NotIsomorphic, SpecError
from .groups import GroupAction, classify
from .perm import Perm, hamming


@dataclass(frozen=True)
class ConjugacyCertificate:
    t: Perm
    support_fraction: Fraction
    verified: bool


def agreement_set(phi1: GroupAction, phi2: GroupAction):
    """Points where every group element acts identically under both actions.

    The result is invariant under both actions (asserted), so its
    complement carries genuine sub-actions of both.
    """
    if phi1.group is not phi2.group or phi1.degree != phi2.degree:
        raise SpecError("agreement_set needs actions of one group on one set")
    n = phi1.degree
    agree = [True] * n
    for p, q in zip(phi1.images, phi2.images):
        for x in range(n):
            if p(x) != q(x):
                agree[x] = False
    points = tuple(x for x in range(n) if agree[x])
    point_set = set(points)
    for p in phi1.images:
        for x in points:
            if p(x) not in point_set:
                raise SpecError("agreement set is not invariant")  # defensive
    return points


def equivariant_matching(a: GroupAction, b: GroupAction) -> Perm:
    """A bijection t0 with t0 ∘ b(h) ∘ t0^{-1} == a(h) for every h.

    Orbits are matched by stabilizer conjugacy class (greedy pairing in
    canonical order); within a matched pair the map is the coset
    correspondence through a conjugating group element found by exhaustive
    search.  The result is verified before returning.
    """
    if a.group is not b.group or a.degree != b.degree:
        raise SpecError("matching needs actions of one group on one set")
    group = a.group
    if classify(a) != classify(b):
        raise NotIsomorphic("actions have different decomposition types")

    def orbit_rows(action):
        rows = []
        for orbit in action.orbits:
            base = orbit[0]
            stab = action.stabilizer(base)
            rows.append((group.class_index(stab), base, orbit, stab))
        rows.sort(key=lambda r: (r[0], r[1]))
        return rows

    rows_a = orbit_rows(a)
    rows_b = orbit_rows(b)
    image = [None] * a.degree
    for ra, rb in zip(rows_a, rows_b):
        cls_a, x, orbit_a, stab_a = ra
        cls_b, y, orbit_b, stab_b = rb
        if cls_a != cls_b or len(orbit_a) != len(orbit_b):
            raise NotIsomorphic("orbit pairing failed")  # defensive
        conj = None
        for g in range(group.order):
            if frozenset(group.conjugate(g, s) for s in stab_a) == stab_b:
                conj = g
                break
        if conj is None:
            raise NotIsomorphic("no conjugating element between stabilizers")
        z = a.images[conj](x)
        # t0(b(h) y) = a(h) z; well-defined because Stab_a(z) = conj Stab_a(x) conj^{-1}.
        for h in range(group.order):
            image[b.images[h](y)] = a.images[h](z)
    t0 = Perm(image)
    t0_inv = t0.inverse()
    for h in range(group.order):
        if t0 * b.images[h] * t0_inv != a.images[h]:
            raise SpecError("equivariant matching failed verification")
    return t0


def conjugate_close(phi1: GroupAction, phi2: GroupAction) -> ConjugacyCertificate:
    """Conjugator t with phi2 conjugated by t equal to phi1, exactly.

    t is the identity on the agreement set, so its support fraction is at
    most |H| * d_H(phi1, phi2).  Raises NotIsomorphic when the types differ.
    """
    if classify(phi1) != classify(phi2):
        raise NotIsomorphic("actions have different decomposition types")
    agree = agreement_set(phi1, phi2)
    n = phi1.degree
    if len(agree) == n:
        t = Perm.identity(n)
        return ConjugacyCertificate(t, Fraction(0), True)
    complement = tuple(x for x in range(n) if x not in set(agree))
    sub1 = phi1.sub_action(complement)
    sub2 = phi2.sub_action(complement)
    if classify(sub1) != classify(sub2):
        raise SpecError("complement types diverged")  # defensive, cannot happen
    t0 = equivariant_matching(sub1, sub2)
    image = list(range(n))
    for i, x in enumerate(complement):
        image[x] = complement[t0(i)]
    t = Perm(image)
    conj = phi2.conjugated(t)
    verified = all(conj.images[g] == phi1.images[g] for g in range(phi1.group.order))
    if not verified:
        raise SpecError("conjugation failed verification")  # defensive
    return ConjugacyCertificate(t, hamming(t, Perm.identity(n)), True)

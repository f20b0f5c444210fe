"""Executable stability for finite groups.

`repair` turns an almost-action into a genuine close action by cutting
the points where multiplicativity fails; `reshape` moves an action's
decomposing-map image onto a prescribed nearby target while changing the
action as little as the gap allows.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import SpecError
from .groups import (
    BurnsideVector,
    FiniteGroup,
    GroupAction,
    assemble_action,
    classify,
    realize,
)
from .perm import Perm, hamming, restrict
from .restriction import DecomposingMap


class AlmostAction:
    """One permutation per group element, with no multiplicativity promise."""

    def __init__(self, group: FiniteGroup, images):
        self.group = group
        images = tuple(images)
        if len(images) != group.order:
            raise SpecError("need one permutation per group element")
        degs = {p.degree for p in images}
        if len(degs) > 1:
            raise SpecError("images have mixed degrees")
        self.images = images
        self.degree = images[0].degree if images else 0

    @classmethod
    def from_action(cls, action: GroupAction):
        return cls(action.group, action.images)

    @classmethod
    def from_generator_images(cls, group, gen_images):
        """Extend generator images along the group's generator words."""
        degree = next(iter(gen_images.values())).degree
        images = []
        for word in group.generator_words:
            p = Perm.identity(degree)
            for g in word:
                p = p * gen_images[g]
            images.append(p)
        return cls(group, images)

    @cached_property
    def defect(self) -> Fraction:
        """max over pairs (g, h) of d(images[g] ∘ images[h], images[g h])."""
        worst = Fraction(0)
        n = self.degree
        if n == 0:
            return worst
        mult = self.group.mult
        imgs = [p.image for p in self.images]
        for a in range(self.group.order):
            ia = imgs[a]
            for b in range(self.group.order):
                ib = imgs[b]
                iab = imgs[mult[a][b]]
                bad = sum(1 for y in range(n) if ia[ib[y]] != iab[y])
                if bad:
                    worst = max(worst, Fraction(bad, n))
        return worst


@dataclass(frozen=True)
class RepairReport:
    repaired: GroupAction
    distance: Fraction
    defect_in: Fraction
    good_fraction: Fraction


def repair(alpha: AlmostAction, completion="identity") -> RepairReport:
    """Repair an almost-action into a verified genuine action.

    Keeps the points where the data is already multiplicative and closed,
    completes the rest (identity completion by default, or whole free
    orbits plus fixed points with completion="regular"), and certifies
    d(alpha, result) <= |G|^3 * defect(alpha).
    """
    group = alpha.group
    n = alpha.degree
    order = group.order
    e = group.identity
    imgs = [p.image for p in alpha.images]

    good = [imgs[e][y] == y for y in range(n)]
    mult = group.mult
    for a in range(order):
        ia = imgs[a]
        for b in range(order):
            if a == e and b == e:
                continue
            ib = imgs[b]
            iab = imgs[mult[a][b]]
            for y in range(n):
                if good[y] and ia[ib[y]] != iab[y]:
                    good[y] = False
    # Keep only points whose whole G-trajectory stays good.
    keep = list(good)
    for y in range(n):
        if keep[y]:
            for a in range(order):
                if not good[imgs[a][y]]:
                    keep[y] = False
                    break
    kept = [y for y in range(n) if keep[y]]
    kept_set = set(kept)

    if completion == "identity":
        complement_images = None  # identity on the complement
    elif completion == "regular":
        rest = n - len(kept)
        free, fixed = divmod(rest, order)
        reg_class = group.class_index([e])
        full_class = group.class_index(range(order))
        vec = BurnsideVector.zero(group)
        vec = vec + BurnsideVector.unit(group, reg_class, free)
        vec = vec + BurnsideVector.unit(group, full_class, fixed)
        complement_images = realize(vec).images
    else:
        raise ValueError(f"unknown completion strategy {completion!r}")

    complement = [y for y in range(n) if y not in kept_set]
    betas = []
    for a in range(order):
        image = list(range(n))
        ia = imgs[a]
        for y in kept:
            image[y] = ia[y]
        if complement_images is not None:
            pc = complement_images[a]
            for i, y in enumerate(complement):
                image[y] = complement[pc(i)]
        betas.append(Perm(image))
    repaired = GroupAction(group, betas)  # verified multiplicative exactly

    distance = Fraction(0)
    for a in range(order):
        distance = max(distance, hamming(alpha.images[a], repaired.images[a]))
    defect = alpha.defect
    if distance > Fraction(order**3) * defect:
        raise SpecError("repair exceeded its certified bound")  # cannot happen
    return RepairReport(
        repaired=repaired,
        distance=distance,
        defect_in=defect,
        good_fraction=Fraction(len(kept), n) if n else Fraction(1),
    )


def restrict_almost(action, subset) -> AlmostAction:
    """Pointwise restriction of every element image to a subset.

    The subset need not be invariant; the result is an almost-action
    whose defect is controlled by the boundary size.
    """
    subset = tuple(subset)
    group = action.group
    return AlmostAction(group, [restrict(p, subset) for p in action.images])


@dataclass(frozen=True)
class ReshapeReport:
    reshaped: GroupAction
    distance: Fraction  # over the group generators, against the input
    target_gap: Fraction  # ||xi - p(type(psi))|| before reshaping


def reshape(psi: GroupAction, dmap: DecomposingMap, xi_coords) -> ReshapeReport:
    """Move the decomposing-map image of psi onto the target exactly.

    Pipeline: shrink the common part below the conductor shift, cut
    per-component subsets of that size, repair their restrictions into
    genuine actions, keep each repaired action's own component, then
    re-realize the remainder so the image lands on the target.
    """
    if psi.group is not dmap.group:
        raise SpecError("action and decomposing map disagree on the group")
    xi = tuple(int(c) for c in xi_coords)
    pcone = dmap.pcone
    if len(xi) != pcone.rank:
        raise SpecError("target has the wrong rank")
    if pcone.member_coords(xi) is None:
        raise SpecError("target outside the image cone")
    psi_type = classify(psi)
    current = dmap.apply(psi_type)
    if pcone.norm_coords(xi) != psi.degree:
        raise SpecError("target norm must match the degree")
    gap = pcone.norm_coords(tuple(a - b for a, b in zip(xi, current)))
    if xi == current:
        return ReshapeReport(psi, Fraction(0), Fraction(0))

    w0 = pcone.conductor_coords()
    zeta = tuple(
        max(0, min(x, c) - w) for x, c, w in zip(xi, current, w0)
    )
    group = psi.group
    weights = [int(w) for w in pcone.axis_weights]

    # Partition the set by axis, in canonical orbit order.
    axis_points = [[] for _ in range(pcone.rank)]
    for orbit in psi.orbits:
        cls_idx = group.class_index(psi.stabilizer(orbit[0]))
        axis_points[dmap.axis_of_class(cls_idx)].extend(orbit)

    pieces = []
    used = []
    for axis in range(pcone.rank):
        want = zeta[axis] * weights[axis]
        if want == 0:
            continue
        pts = tuple(axis_points[axis][:want])
        restricted = restrict_almost(psi, pts)
        fixed = repair(restricted).repaired
        # Keep only the repaired action's own component on this axis.
        keep_positions = []
        for orbit in fixed.orbits:
            cls_idx = group.class_index(fixed.stabilizer(orbit[0]))
            if dmap.axis_of_class(cls_idx) == axis:
                keep_positions.extend(orbit)
        keep_positions.sort()
        if keep_positions:
            piece = fixed.sub_action(keep_positions)
            points = tuple(pts[i] for i in keep_positions)
            pieces.append((piece, points))
            used.extend(points)

    alpha_type = BurnsideVector.zero(group)
    for piece, _ in pieces:
        alpha_type = alpha_type + classify(piece)
    rho = tuple(a - b for a, b in zip(xi, dmap.apply(alpha_type)))
    beta_vec = dmap.preimage(rho)
    complement = tuple(sorted(set(range(psi.degree)) - set(used)))
    beta = realize(beta_vec)
    if beta.degree != len(complement):
        raise SpecError("reshape bookkeeping lost points")  # defensive
    reshaped = assemble_action(group, pieces + [(beta, complement)])
    if dmap.apply(classify(reshaped)) != xi:
        raise SpecError("reshape missed the target")  # defensive
    distance = psi.distance(reshaped, over=group.generators)
    return ReshapeReport(reshaped, distance, gap)

"""Stabilization pipelines for amalgamated free products and HNN extensions.

Inputs are pairs of genuine finite-group actions (or an action plus a
candidate stable-letter permutation) whose matching defect over the
embedded subgroup is small; outputs are actions satisfying the matching
relations exactly, either on the same set (strict mode, normal subgroup
images required) or on a slightly larger one (flexible mode).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .conjugator import conjugate_close
from .cones import (
    LinearMapZ,
    PrimitiveCone,
    balance_pair,
    flex_adjust,
    project_ker,
)
from .errors import SpecError
from .groups import (
    BurnsideVector,
    FiniteGroup,
    GroupAction,
    assemble_action,
    classify,
    invariant_subset_of_type,
    realize,
)
from .oracle import AlmostAction, repair, reshape
from .perm import Perm, Word, hamming
from .restriction import (
    DecomposingMap,
    Inclusion,
    compute_restriction_data,
    decomposing_map,
    hnn_decomposing_map,
)


@dataclass(frozen=True)
class AmalgamSpec:
    """Two groups glued along embedded copies of a common finite subgroup."""

    g1: FiniteGroup
    g2: FiniteGroup
    h: FiniteGroup
    i1: Inclusion
    i2: Inclusion

    def __post_init__(self):
        if self.i1.sub is not self.h or self.i2.sub is not self.h:
            raise SpecError("inclusions must start from the shared subgroup")
        if self.i1.amb is not self.g1 or self.i2.amb is not self.g2:
            raise SpecError("inclusions must land in the declared factors")

    @classmethod
    def double(cls, inc: Inclusion):
        """The double: both factors are the same group via the same embedding."""
        return cls(inc.amb, inc.amb, inc.sub, inc, inc)

    @property
    def is_double(self):
        return self.g1 is self.g2 and self.i1.embed == self.i2.embed

    @cached_property
    def relations(self):
        """Matching relations over the free-product alphabet.

        Symbols are (0, element of g1) and (1, element of g2); the word for
        h reads i1(h) * i2(h)^{-1}.
        """
        return tuple(
            Word((((0, self.i1.embed[x]), 1), ((1, self.i2.embed[x]), -1)))
            for x in range(self.h.order)
        )


@dataclass(frozen=True)
class HNNSpec:
    """One group with two embedded copies of a finite subgroup and a stable letter."""

    g: FiniteGroup
    h: FiniteGroup
    i1: Inclusion
    i2: Inclusion
    stable_symbol: str = "t"

    def __post_init__(self):
        if self.i1.sub is not self.h or self.i2.sub is not self.h:
            raise SpecError("inclusions must start from the shared subgroup")
        if self.i1.amb is not self.g or self.i2.amb is not self.g:
            raise SpecError("inclusions must land in the base group")

    @property
    def is_identical(self):
        return self.i1.embed == self.i2.embed

    @cached_property
    def relations(self):
        """Words i1(h)^{-1} * t * i2(h) * t^{-1} over symbols (0, g) and 't'."""
        t = self.stable_symbol
        return tuple(
            Word(
                (
                    ((0, self.i1.embed[x]), -1),
                    (t, 1),
                    ((0, self.i2.embed[x]), 1),
                    (t, -1),
                )
            )
            for x in range(self.h.order)
        )


def matching_defect(spec: AmalgamSpec, phi1: GroupAction, phi2: GroupAction) -> Fraction:
    """max over h of d(phi1(i1 h), phi2(i2 h)); zero iff relations hold."""
    if phi1.degree != phi2.degree:
        raise SpecError("actions must share the underlying set")
    worst = Fraction(0)
    for x in range(spec.h.order):
        worst = max(
            worst,
            hamming(phi1.images[spec.i1.embed[x]], phi2.images[spec.i2.embed[x]]),
        )
    return worst


def hnn_matching_defect(spec: HNNSpec, phi: GroupAction, tau: Perm) -> Fraction:
    """max over h of d(phi(i1 h), tau phi(i2 h) tau^{-1})."""
    if tau.degree != phi.degree:
        raise SpecError("stable-letter candidate must act on the same set")
    tinv = tau.inverse()
    worst = Fraction(0)
    for x in range(spec.h.order):
        worst = max(
            worst,
            hamming(
                phi.images[spec.i1.embed[x]],
                tau * phi.images[spec.i2.embed[x]] * tinv,
            ),
        )
    return worst


@dataclass(frozen=True)
class StabilizationResult:
    kind: str  # "amalgam" | "hnn"
    mode: str  # "strict" | "flexible"
    base_degree: int
    ambient_degree: int
    input_defect: Fraction
    output_distance: Fraction
    conjugator_support: Fraction
    verified: bool
    psi1: GroupAction = None
    psi2: GroupAction = None
    psi_g: GroupAction = None
    psi_t: Perm = None

    @property
    def size_ratio(self):
        return Fraction(self.ambient_degree, self.base_degree)


def _prefix_distance(big: Perm, small: Perm) -> Fraction:
    """Disagreement fraction on the common prefix of the bigger set."""
    n = small.degree
    if n == 0:
        return Fraction(0)
    bad = sum(1 for x in range(n) if big(x) != small(x))
    return Fraction(bad, n)


def _action_prefix_distance(big: GroupAction, small: GroupAction) -> Fraction:
    worst = Fraction(0)
    for g in range(small.group.order):
        worst = max(worst, _prefix_distance(big.images[g], small.images[g]))
    return worst


def verify_amalgam(spec: AmalgamSpec, psi1: GroupAction, psi2: GroupAction):
    """Exact relation check; returns (ok, failing subgroup element or None)."""
    for x in range(spec.h.order):
        if psi1.images[spec.i1.embed[x]] != psi2.images[spec.i2.embed[x]]:
            return False, x
    return True, None


def verify_hnn(spec: HNNSpec, psi_g: GroupAction, psi_t: Perm):
    tinv = psi_t.inverse()
    for x in range(spec.h.order):
        lhs = psi_g.images[spec.i1.embed[x]]
        rhs = psi_t * psi_g.images[spec.i2.embed[x]] * tinv
        if lhs != rhs:
            return False, x
    return True, None


def verify(result: StabilizationResult, spec) -> bool:
    if result.kind == "amalgam":
        ok, _ = verify_amalgam(spec, result.psi1, result.psi2)
    else:
        ok, _ = verify_hnn(spec, result.psi_g, result.psi_t)
    return ok


# ---------------------------------------------------------------------------
# HNN over two identical copies: the conjugator alone suffices.
# ---------------------------------------------------------------------------


def stabilize_hnn_double(spec: HNNSpec, phi: GroupAction, tau: Perm) -> StabilizationResult:
    """Strict stabilization when both embeddings coincide.

    The base action is kept; the stable letter is corrected by the
    conjugator between the embedded restriction and its tau-conjugate
    (the types match automatically).
    """
    if not spec.is_identical:
        raise SpecError("this pipeline needs identical embeddings")
    defect = hnn_matching_defect(spec, phi, tau)
    restricted = spec.i1.restrict_action(phi)
    conjugated = restricted.conjugated(tau)
    cert = conjugate_close(restricted, conjugated)
    psi_t = cert.t * tau
    ok, _ = verify_hnn(spec, phi, psi_t)
    if not ok:
        raise SpecError("hnn double pipeline failed verification")
    return StabilizationResult(
        kind="hnn",
        mode="strict",
        base_degree=phi.degree,
        ambient_degree=phi.degree,
        input_defect=defect,
        output_distance=hamming(psi_t, tau),
        conjugator_support=cert.support_fraction,
        verified=True,
        psi_g=phi,
        psi_t=psi_t,
    )


# ---------------------------------------------------------------------------
# Amalgams.
# ---------------------------------------------------------------------------


def _pair_cone(dmap1: DecomposingMap, dmap2: DecomposingMap):
    """Primitive cone and difference map for a pair of decomposing maps.

    Ambient coordinates are two copies of the subgroup-type space; the
    difference map sends (c1, c2) to the type vector c1's direction sum
    minus c2's.
    """
    hdim = len(dmap1.axis_labels[0])
    if hdim != len(dmap2.axis_labels[0]):
        raise SpecError("decomposing maps disagree on the subgroup")

    def embed(vec, side):
        zero = (0,) * hdim
        return tuple(vec) + zero if side == 0 else zero + tuple(vec)

    gens = [embed(g, 0) for g in dmap1.pcone.generators]
    gens += [embed(g, 1) for g in dmap2.pcone.generators]
    axes = [embed(a, 0) for a in dmap1.pcone.axes]
    axes += [embed(a, 1) for a in dmap2.pcone.axes]
    weights = tuple(dmap1.pcone.ambient_weights) * 2
    pcone = PrimitiveCone(tuple(dict.fromkeys(gens)), tuple(axes), weights)
    rank1 = dmap1.rank
    rows = []
    h_weights = dmap1.pcone.ambient_weights
    for i in range(hdim):
        row = [label[i] for label in dmap1.axis_labels]
        row += [-label[i] for label in dmap2.axis_labels]
        rows.append(tuple(row))
    dmat = LinearMapZ(tuple(rows), tuple(h_weights))
    return pcone, dmat, rank1


def _zero_classes_off_axes(dmap: DecomposingMap, xi: BurnsideVector, kept_axes):
    kept = set(kept_axes)
    coeffs = [
        c if dmap.axis_of_class(idx) in kept else 0
        for idx, c in enumerate(xi.coeffs)
    ]
    return BurnsideVector(dmap.group, coeffs)


def _finish_amalgam_flexible(spec, phi1, phi2, xi1p, xi2p, eta1, eta2, defect):
    """Common tail: pad, cut, realize, identify, conjugate, verify."""
    g1, g2 = spec.g1, spec.g2
    base = phi1.degree
    total1 = xi1p.norm() + eta1.norm()
    total2 = xi2p.norm() + eta2.norm()
    if total1 != total2:
        raise SpecError("sides lost norm agreement")  # defensive
    pad = max(0, base - total1)
    eta1 = eta1 + BurnsideVector.trivial_type(g1, pad)
    eta2 = eta2 + BurnsideVector.trivial_type(g2, pad)
    zsize = total1 + pad

    pieces = []
    for phi, xi_p, eta in ((phi1, xi1p, eta1), (phi2, xi2p, eta2)):
        kept_points = invariant_subset_of_type(phi, xi_p)
        rest = [x for x in range(base) if x not in set(kept_points)]
        rest += list(range(base, zsize))
        alpha = realize(eta)
        if alpha.degree != len(rest):
            raise SpecError("flexible padding lost points")  # defensive
        beta = assemble_action(
            phi.group,
            [(phi.sub_action(kept_points), kept_points), (alpha, tuple(rest))],
        )
        pieces.append(beta)
    beta1, beta2 = pieces

    r1 = spec.i1.restrict_action(beta1)
    r2 = spec.i2.restrict_action(beta2)
    cert = conjugate_close(r1, r2)
    psi1 = beta1
    psi2 = beta2.conjugated(cert.t)
    ok, _ = verify_amalgam(spec, psi1, psi2)
    if not ok:
        raise SpecError("flexible amalgam pipeline failed verification")
    distance = max(
        _action_prefix_distance(psi1, phi1), _action_prefix_distance(psi2, phi2)
    )
    return StabilizationResult(
        kind="amalgam",
        mode="flexible",
        base_degree=base,
        ambient_degree=zsize,
        input_defect=defect,
        output_distance=distance,
        conjugator_support=cert.support_fraction,
        verified=True,
        psi1=psi1,
        psi2=psi2,
    )


def stabilize_amalgam_flexible(spec: AmalgamSpec, phi1: GroupAction, phi2: GroupAction):
    """Flexible stabilization: exact relations on a slightly larger set.

    Doubles go through the balance search on the shared restriction cone
    (nothing is cut); the general case goes through the flexible
    adjustment on the paired decomposing-map cone, which may cut whole
    direction components before padding.
    """
    if phi1.group is not spec.g1 or phi2.group is not spec.g2:
        raise SpecError("actions must match the amalgam factors")
    if phi1.degree != phi2.degree:
        raise SpecError("actions must share the underlying set")
    defect = matching_defect(spec, phi1, phi2)
    xi1, xi2 = classify(phi1), classify(phi2)

    if spec.is_double:
        data = compute_restriction_data(spec.i1)
        cone = data.cone
        rho1 = classify(spec.i1.restrict_action(phi1)).coeffs
        rho2 = classify(spec.i2.restrict_action(phi2)).coeffs
        bal = balance_pair(cone, rho1, rho2)
        eta1 = data.vector_preimage(bal.cert1)
        eta2 = data.vector_preimage(bal.cert2)
        return _finish_amalgam_flexible(
            spec, phi1, phi2, xi1, xi2, eta1, eta2, defect
        )

    dmap1 = decomposing_map(spec.i1)
    dmap2 = decomposing_map(spec.i2)
    pcone, dmat, rank1 = _pair_cone(dmap1, dmap2)
    pair_xi = dmap1.apply(xi1) + dmap2.apply(xi2)
    adj = flex_adjust(pcone, dmat, pair_xi)
    kept1 = [a for a in adj.kept_axes if a < rank1]
    kept2 = [a - rank1 for a in adj.kept_axes if a >= rank1]
    xi1p = _zero_classes_off_axes(dmap1, xi1, kept1)
    xi2p = _zero_classes_off_axes(dmap2, xi2, kept2)
    eta1 = dmap1.preimage(adj.eta[:rank1])
    eta2 = dmap2.preimage(adj.eta[rank1:])
    return _finish_amalgam_flexible(spec, phi1, phi2, xi1p, xi2p, eta1, eta2, defect)


def stabilize_amalgam_strict(spec: AmalgamSpec, phi1: GroupAction, phi2: GroupAction):
    """Strict stabilization over normal subgroup images: same set, exact relations.

    Kernel projection balances the two decomposing-map images, the
    trivial-direction pair renormalizes to the full degree, each side is
    reshaped onto its half of the kernel element, and the conjugator
    finishes.
    """
    if phi1.group is not spec.g1 or phi2.group is not spec.g2:
        raise SpecError("actions must match the amalgam factors")
    if phi1.degree != phi2.degree:
        raise SpecError("actions must share the underlying set")
    if not (spec.i1.is_normal and spec.i2.is_normal):
        raise SpecError("strict mode requires normal subgroup images")
    defect = matching_defect(spec, phi1, phi2)
    base = phi1.degree

    dmap1 = decomposing_map(spec.i1)
    dmap2 = decomposing_map(spec.i2)
    pcone, dmat, rank1 = _pair_cone(dmap1, dmap2)
    xi1, xi2 = classify(phi1), classify(phi2)
    pair_xi = dmap1.apply(xi1) + dmap2.apply(xi2)

    if all(x == 0 for x in dmat.apply(pair_xi)):
        psi1p, psi2p = phi1, phi2
    else:
        v = list(project_ker(pcone, dmat, pair_xi))
        side_norm = sum(
            w * c for w, c in zip(pcone.axis_weights[:rank1], v[:rank1])
        )
        shortfall = base - int(side_norm)
        if shortfall < 0:
            raise SpecError("kernel element overshot the degree")  # defensive
        t1 = dmap1.trivial_axis
        t2 = rank1 + dmap2.trivial_axis
        v[t1] += shortfall
        v[t2] += shortfall
        psi1p = reshape(phi1, dmap1, tuple(v[:rank1])).reshaped
        psi2p = reshape(phi2, dmap2, tuple(v[rank1:])).reshaped

    r1 = spec.i1.restrict_action(psi1p)
    r2 = spec.i2.restrict_action(psi2p)
    cert = conjugate_close(r1, r2)
    psi1 = psi1p
    psi2 = psi2p.conjugated(cert.t)
    ok, _ = verify_amalgam(spec, psi1, psi2)
    if not ok:
        raise SpecError("strict amalgam pipeline failed verification")
    distance = max(phi1.distance(psi1), phi2.distance(psi2))
    return StabilizationResult(
        kind="amalgam",
        mode="strict",
        base_degree=base,
        ambient_degree=base,
        input_defect=defect,
        output_distance=distance,
        conjugator_support=cert.support_fraction,
        verified=True,
        psi1=psi1,
        psi2=psi2,
    )


# ---------------------------------------------------------------------------
# HNN extensions with two different embeddings.
# ---------------------------------------------------------------------------


def stabilize_hnn_flexible(spec: HNNSpec, phi: GroupAction, tau: Perm):
    """Flexible HNN stabilization on a slightly larger set.

    Adjust the pair-direction image into the kernel, cut the zeroed
    components, pad trivially, then extend the stable letter through the
    conjugator against the tau-restriction.
    """
    if phi.group is not spec.g:
        raise SpecError("action must be over the base group")
    defect = hnn_matching_defect(spec, phi, tau)
    base = phi.degree
    dmap = hnn_decomposing_map(spec.i1, spec.i2)
    dmat = _hnn_difference_map(dmap, spec.h)
    xi = dmap.apply(classify(phi))
    adj = flex_adjust(dmap.pcone, dmat, xi)
    xi_p = _zero_classes_off_axes(dmap, classify(phi), adj.kept_axes)
    eta_vec = dmap.preimage(adj.eta)
    pad = max(0, base - (xi_p.norm() + eta_vec.norm()))
    eta_vec = eta_vec + BurnsideVector.trivial_type(spec.g, pad)

    kept_points = invariant_subset_of_type(phi, xi_p)
    zsize = xi_p.norm() + eta_vec.norm()
    rest = [x for x in range(base) if x not in set(kept_points)]
    rest += list(range(base, zsize))
    filler = realize(eta_vec)
    psi_base = assemble_action(
        spec.g,
        [(phi.sub_action(kept_points), kept_points), (filler, tuple(rest))],
    )

    # Stable-letter candidate on the enlarged set: tau kept on the cut
    # subset, identity elsewhere.
    kept_set = set(kept_points)
    timage = list(range(zsize))
    matched = {x: tau(x) for x in kept_points if tau(x) in kept_set}
    sources = [x for x in kept_points if x not in matched]
    targets = [y for y in kept_points if y not in set(matched.values())]
    for x, y in matched.items():
        timage[x] = y
    for x, y in zip(sources, targets):
        timage[x] = y
    big_tau = Perm(timage)

    r1 = spec.i1.restrict_action(psi_base)
    r2 = spec.i2.restrict_action(psi_base).conjugated(big_tau)
    cert = conjugate_close(r1, r2)
    psi_t = cert.t * big_tau
    ok, _ = verify_hnn(spec, psi_base, psi_t)
    if not ok:
        raise SpecError("flexible hnn pipeline failed verification")
    distance = max(
        _action_prefix_distance(psi_base, phi), _prefix_distance(psi_t, tau)
    )
    return StabilizationResult(
        kind="hnn",
        mode="flexible",
        base_degree=base,
        ambient_degree=zsize,
        input_defect=defect,
        output_distance=distance,
        conjugator_support=cert.support_fraction,
        verified=True,
        psi_g=psi_base,
        psi_t=psi_t,
    )


def stabilize_hnn_strict(spec: HNNSpec, phi: GroupAction, tau: Perm):
    """Strict HNN stabilization over two normal subgroup images."""
    if phi.group is not spec.g:
        raise SpecError("action must be over the base group")
    if not (spec.i1.is_normal and spec.i2.is_normal):
        raise SpecError("strict mode requires normal subgroup images")
    defect = hnn_matching_defect(spec, phi, tau)
    base = phi.degree
    dmap = hnn_decomposing_map(spec.i1, spec.i2)
    dmat = _hnn_difference_map(dmap, spec.h)
    xi = dmap.apply(classify(phi))

    if all(x == 0 for x in dmat.apply(xi)):
        psi_base = phi
    else:
        v = list(project_ker(dmap.pcone, dmat, xi))
        side_norm = dmap.pcone.norm_coords(v)
        shortfall = base - int(side_norm)
        if shortfall < 0:
            raise SpecError("kernel element overshot the degree")  # defensive
        v[dmap.trivial_axis] += shortfall
        psi_base = reshape(phi, dmap, tuple(v)).reshaped

    r1 = spec.i1.restrict_action(psi_base)
    r2 = spec.i2.restrict_action(psi_base).conjugated(tau)
    cert = conjugate_close(r1, r2)
    psi_t = cert.t * tau
    ok, _ = verify_hnn(spec, psi_base, psi_t)
    if not ok:
        raise SpecError("strict hnn pipeline failed verification")
    distance = max(phi.distance(psi_base), hamming(psi_t, tau))
    return StabilizationResult(
        kind="hnn",
        mode="strict",
        base_degree=base,
        ambient_degree=base,
        input_defect=defect,
        output_distance=distance,
        conjugator_support=cert.support_fraction,
        verified=True,
        psi_g=psi_base,
        psi_t=psi_t,
    )


def _hnn_difference_map(dmap: DecomposingMap, h: FiniteGroup) -> LinearMapZ:
    """d for pair-direction coordinates: first-copy value minus second-copy."""
    hdim = len(dmap.axis_labels[0]) // 2
    rows = []
    for i in range(hdim):
        rows.append(
            tuple(label[i] - label[hdim + i] for label in dmap.axis_labels)
        )
    weights = tuple(c.action_degree for c in h.subgroup_classes)
    return LinearMapZ(tuple(rows), weights)


# ---------------------------------------------------------------------------
# Normalizing raw almost-action input.
# ---------------------------------------------------------------------------


def normalize_pair(spec: AmalgamSpec, alpha1: AlmostAction, alpha2: AlmostAction):
    """Repair raw almost-actions into the genuine pair the pipelines expect."""
    rep1 = repair(alpha1)
    rep2 = repair(alpha2)
    return rep1.repaired, rep2.repaired


def stabilize(spec, mode, *inputs):
    """Dispatch to the right pipeline for a spec/mode combination."""
    if isinstance(spec, AmalgamSpec):
        if mode == "strict":
            return stabilize_amalgam_strict(spec, *inputs)
        if mode == "flexible":
            return stabilize_amalgam_flexible(spec, *inputs)
        raise SpecError(f"unknown mode {mode!r}")
    if isinstance(spec, HNNSpec):
        if mode == "strict":
            if spec.is_identical:
                return stabilize_hnn_double(spec, *inputs)
            return stabilize_hnn_strict(spec, *inputs)
        if mode == "flexible":
            return stabilize_hnn_flexible(spec, *inputs)
        raise SpecError(f"unknown mode {mode!r}")
    raise SpecError("unknown spec kind")

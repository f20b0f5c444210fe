"""JSON encodings for every external interface, with canonical dumps.

Fractions travel as "p/q" strings, permutations as image lists, groups as
mult tables / permutation generators / named constructors.  Canonical
serialization (sorted keys, fixed separators, trailing newline) makes
identical runs byte-identical; wall-clock timing is only embedded when
STABILIS_TIMING=1 so that reports stay deterministic by default.
"""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import SpecError
from .groups import FiniteGroup, GroupAction, realize, BurnsideVector
from .engine import AmalgamSpec, HNNSpec
from .oracle import AlmostAction, repair
from .perm import Perm
from .restriction import Inclusion

SCHEMA_VERSION = 1
TOOL_VERSION = "0.1.0"


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def frac_str(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def frac_parse(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    num, _, den = s.partition("/")
    return Fraction(int(num), int(den or 1))


# -- groups -----------------------------------------------------------------


def group_to_json(group: FiniteGroup):
    return {
        "kind": "mult_table",
        "table": [list(r) for r in group.mult],
        "generators": list(group.generators),
    }


def group_from_json(data) -> FiniteGroup:
    kind = data.get("kind", "mult_table")
    if kind == "mult_table":
        return FiniteGroup(data["table"], generators=data.get("generators"))
    if kind == "perm_gens":
        degree = data["degree"]
        gens = [Perm(img) for img in data["gens"]]
        if any(p.degree != degree for p in gens):
            raise SpecError("generator degree mismatch")
        return FiniteGroup.from_perm_generators(gens)
    if kind == "cyclic":
        return FiniteGroup.cyclic(int(data["n"]))
    if kind == "dihedral":
        return FiniteGroup.dihedral(int(data["n"]))
    if kind == "symmetric":
        return FiniteGroup.symmetric(int(data["n"]))
    if kind == "trivial":
        return FiniteGroup.trivial()
    if kind == "product":
        parts = [group_from_json(p) for p in data["parts"]]
        if len(parts) < 2:
            raise SpecError("product needs at least two parts")
        out = parts[0]
        for p in parts[1:]:
            out = FiniteGroup.direct_product(out, p)
        return out
    raise SpecError(f"unknown group kind {kind!r}")


def inclusion_from_json(data) -> Inclusion:
    sub = group_from_json(data["sub"])
    amb = group_from_json(data["amb"])
    return Inclusion(sub, amb, tuple(data["embed"]))


# -- actions ----------------------------------------------------------------


def action_to_json(action: GroupAction):
    return {"images": [list(p.image) for p in action.images]}


def action_from_json(group: FiniteGroup, data, allow_almost=False):
    """An action from explicit images or a {"realize": coeffs} recipe.

    Explicit images may cover all elements (list) or only generators
    (dict index -> image); generator data is extended along generator
    words.  With allow_almost the multiplicativity check is skipped and
    an AlmostAction is returned.
    """
    if "realize" in data:
        vec = BurnsideVector(group, data["realize"])
        return realize(vec)
    images = data["images"]
    if isinstance(images, dict):
        gen_images = {int(k): Perm(v) for k, v in images.items()}
        if allow_almost:
            return AlmostAction.from_generator_images(group, gen_images)
        return GroupAction.from_generator_images(group, gen_images)
    perms = [Perm(img) for img in images]
    if allow_almost:
        return AlmostAction(group, perms)
    return GroupAction(group, perms)


# -- cones ------------------------------------------------------------------


def cone_from_json(data):
    from .cones import IntCone

    weights = data.get("weights")
    return IntCone(int(data["dim"]), tuple(tuple(g) for g in data["gens"]), weights)


# -- scenarios --------------------------------------------------------------


@dataclass
class Scenario:
    kind: str  # "amalgam" | "hnn"
    spec: object
    mode: str
    phi1: GroupAction = None
    phi2: GroupAction = None
    tau: Perm = None
    echo: dict = None


def _amalgam_spec_from_json(data) -> AmalgamSpec:
    h = group_from_json(data["h"])
    g1 = group_from_json(data["g1"])
    if data["g1"] == data["g2"]:
        g2 = g1
    else:
        g2 = group_from_json(data["g2"])
    i1 = Inclusion(h, g1, tuple(data["i1"]))
    i2 = Inclusion(h, g2, tuple(data["i2"]))
    return AmalgamSpec(g1, g2, h, i1, i2)


def _hnn_spec_from_json(data) -> HNNSpec:
    h = group_from_json(data["h"])
    g = group_from_json(data["g"])
    i1 = Inclusion(h, g, tuple(data["i1"]))
    i2 = Inclusion(h, g, tuple(data["i2"]))
    return HNNSpec(g, h, i1, i2)


def _transposition_product(degree, k, rng) -> Perm:
    p = Perm.identity(degree)
    for _ in range(k):
        i, j = rng.sample(range(degree), 2)
        p = Perm.from_cycles(degree, (i, j)) * p
    return p


def scenario_from_json(data) -> Scenario:
    """Load a scenario, applying its perturbation recipe if present.

    Perturbation (seed mandatory): for amalgam pairs the second action is
    conjugated by k uniformly random transpositions (keeps it genuine
    while creating matching defect); for HNN scenarios the stable-letter
    candidate is pre-composed with them.  With "repair_input" the phi
    data may be non-multiplicative and is repaired first.
    """
    kind = data["kind"]
    mode = data.get("mode", "flexible")
    perturb = data.get("perturb")
    if perturb is not None and "seed" not in perturb:
        raise SpecError("perturbation recipes require a seed")
    repair_input = bool(data.get("repair_input", False))

    if kind == "amalgam":
        spec = _amalgam_spec_from_json(data["spec"])
        phi1 = action_from_json(spec.g1, data["phi1"], allow_almost=repair_input)
        phi2 = action_from_json(spec.g2, data["phi2"], allow_almost=repair_input)
        if repair_input:
            if isinstance(phi1, AlmostAction):
                phi1 = repair(phi1).repaired
            if isinstance(phi2, AlmostAction):
                phi2 = repair(phi2).repaired
        if perturb:
            rng = random.Random(f"{perturb['seed']}")
            sigma = _transposition_product(phi2.degree, int(perturb["k"]), rng)
            phi2 = phi2.conjugated(sigma)
        return Scenario(kind, spec, mode, phi1=phi1, phi2=phi2, echo=data)

    if kind == "hnn":
        spec = _hnn_spec_from_json(data["spec"])
        phi = action_from_json(spec.g, data["phi"], allow_almost=repair_input)
        if repair_input and isinstance(phi, AlmostAction):
            phi = repair(phi).repaired
        tau_data = data.get("tau", {"identity": True})
        if tau_data.get("identity"):
            tau = Perm.identity(phi.degree)
        else:
            tau = Perm(tau_data["image"])
        if perturb:
            rng = random.Random(f"{perturb['seed']}")
            sigma = _transposition_product(tau.degree, int(perturb["k"]), rng)
            tau = sigma * tau
        return Scenario(kind, spec, mode, phi1=phi, tau=tau, echo=data)

    raise SpecError(f"unknown scenario kind {kind!r}")


# -- reports ----------------------------------------------------------------


def report_from_result(scenario: Scenario, result, wall_time_ms=None) -> dict:
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": TOOL_VERSION,
        "scenario": scenario.echo,
        "kind": result.kind,
        "mode": result.mode,
        "base_degree": result.base_degree,
        "ambient_degree": result.ambient_degree,
        "defect_in": frac_str(result.input_defect),
        "distance_out": frac_str(result.output_distance),
        "size_ratio": frac_str(result.size_ratio),
        "conjugator_support": frac_str(result.conjugator_support),
        "fitted_constants": {
            "distance_per_defect": (
                frac_str(result.output_distance / result.input_defect)
                if result.input_defect
                else None
            ),
            "growth_per_defect": (
                frac_str((result.size_ratio - 1) / result.input_defect)
                if result.input_defect
                else None
            ),
        },
        "certificates": {"relations_verified": result.verified},
    }
    if result.kind == "amalgam":
        report["outputs"] = {
            "psi1": action_to_json(result.psi1),
            "psi2": action_to_json(result.psi2),
        }
    else:
        report["outputs"] = {
            "psi_g": action_to_json(result.psi_g),
            "psi_t": list(result.psi_t.image),
        }
    if wall_time_ms is not None and os.environ.get("STABILIS_TIMING") == "1":
        report["wall_time_ms"] = int(wall_time_ms)
    return report

"""Acceptance suite: one test per criterion, each printing a PASS line.

Regression-tracked constants live in tests/data/regression_constants.json;
rerun with STABILIS_RECORD=1 to refresh them after an intentional change.
All randomness is seeded, so recorded and measured values coincide exactly
on repeat runs; the asserted tolerance is +10%.
"""

import itertools
import json
import os
import random
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from stabilis.cli import EXIT_OK, main as cli_main
from stabilis.cones import IntCone, balance_pair, conductor_vector, member
from stabilis.conjugator import conjugate_close
from stabilis.engine import (
    hnn_matching_defect,
    matching_defect,
    stabilize,
)
from stabilis.groups import FiniteGroup, classify
from stabilis.intlin import LatticeSolver, nonneg_solution
from stabilis.oracle import AlmostAction, repair
from stabilis.perm import (
    Perm,
    Word,
    coproduct_sum_identity,
    hamming,
    iterated_restriction_bound,
    padding_bound,
    restricted_distance_bound,
    restricted_word_defect_bound,
)
from stabilis.restriction import Inclusion, extension_property
from stabilis.unitary import (
    URep,
    op_conjugate_close,
    op_norm,
    op_stabilize_amalgam,
    op_stabilize_hnn,
)
from stabilis import jsonio

from conftest import random_action, random_perm, transposition_product

DATA = Path(__file__).resolve().parent / "data" / "regression_constants.json"
SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
RECORD = os.environ.get("STABILIS_RECORD") == "1"


def check_constant(key, measured):
    """Assert a measured constant against its recorded baseline (+10%)."""
    measured = float(measured)
    recorded = json.loads(DATA.read_text()) if DATA.exists() else {}
    if RECORD:
        recorded[key] = measured
        DATA.parent.mkdir(exist_ok=True)
        DATA.write_text(json.dumps(recorded, indent=2, sort_keys=True) + "\n")
        return
    assert key in recorded, f"no recorded baseline for {key}; run with STABILIS_RECORD=1"
    assert measured <= recorded[key] * 1.10 + 1e-12, (
        f"{key} regressed: measured {measured}, recorded {recorded[key]}"
    )


def _catalog_le8():
    z2 = FiniteGroup.cyclic(2)
    return [
        z2,
        FiniteGroup.cyclic(3),
        FiniteGroup.cyclic(4),
        FiniteGroup.cyclic(5),
        FiniteGroup.cyclic(6),
        FiniteGroup.cyclic(7),
        FiniteGroup.cyclic(8),
        FiniteGroup.direct_product(z2, FiniteGroup.cyclic(2)),
        FiniteGroup.symmetric(3),
        FiniteGroup.dihedral(4),
    ]


def test_criterion_1_conjugator_exactness_and_bound():
    """>= 500 random equal-type pairs, |H| <= 8, |X| <= 60: exact
    conjugation and support bounded by |H| d_H.  Zero failures."""
    rng = random.Random(101)
    catalog = _catalog_le8()
    failures = 0
    for _ in range(500):
        h = rng.choice(catalog)
        n = rng.randrange(1, 61)
        base = random_action(h, n, rng)
        a = base.conjugated(random_perm(n, rng))
        b = base.conjugated(random_perm(n, rng))
        cert = conjugate_close(a, b)
        ok = b.conjugated(cert.t).images == a.images
        ok = ok and cert.support_fraction <= h.order * a.distance(b)
        failures += 0 if ok else 1
    assert failures == 0
    print("criterion 1: PASS — 500 conjugations exact, support <= |H| d_H")


def _random_dense_cone(rng):
    dim = rng.choice([1, 1, 1, 2, 2, 2, 3, 3, 4])
    entry_cap = {1: 5, 2: 5, 3: 3, 4: 2}[dim]
    pool = [
        v
        for v in itertools.product(range(entry_cap + 1), repeat=dim)
        if any(v)
    ]
    k = min(rng.randrange(1, 6), len(pool))
    return IntCone(dim, tuple(sorted(rng.sample(pool, k))))


def test_criterion_2_density_containment():
    """>= 200 random cones: every generator-lattice point of the shifted
    real cone inside the box [0, 2||w0||]^N is certified a member."""
    rng = random.Random(202)
    cones_done = 0
    points_checked = 0
    while cones_done < 200:
        cone = _random_dense_cone(rng)
        w0, _ = conductor_vector(cone)
        side = 2 * int(cone.norm(w0))
        # nonneg generators: w - w0 in the real cone forces w >= w0
        ranges = [range(w0[i], side + 1) for i in range(cone.dim)]
        total = 1
        for r in ranges:
            total *= len(r)
        if total > 1500 or total == 0:
            continue
        solver = LatticeSolver(
            [tuple(g[i] for g in cone.generators) for i in range(cone.dim)]
        )
        for w in itertools.product(*ranges):
            if solver.solve(w) is None:
                continue  # not in the generator lattice
            shifted = tuple(a - b for a, b in zip(w, w0))
            if nonneg_solution(cone.generators, shifted) is None:
                continue  # not in the shifted real cone
            res = member(cone, w)
            assert res.certified_in, (cone, w)
            points_checked += 1
        cones_done += 1

    # witness cone <2, 3>: conductor 25 and full agreement with the
    # brute-force numerical-semigroup oracle on [0, 100]
    cone = IntCone(1, ((2,), (3,)))
    w0, _ = conductor_vector(cone)
    assert w0 == (25,)
    reachable = {0}
    for v in range(1, 101):
        if v - 2 in reachable or v - 3 in reachable:
            reachable.add(v)
    for v in range(101):
        assert member(cone, (v,)).certified_in == (v in reachable)
    assert all(v in reachable for v in range(25, 101))
    print(
        f"criterion 2: PASS — 200 cones, {points_checked} shifted lattice "
        "points certified; witness cone conductor 25 matches brute force"
    )


def test_criterion_3_balance_exactness_and_constant():
    """>= 300 instances: exact balance, recorded norm constant stable."""
    rng = random.Random(303)
    worst = Fraction(0)
    for _ in range(300):
        dim = rng.randrange(1, 4)
        entry_cap = 3 if dim < 3 else 2
        pool = [
            v
            for v in itertools.product(range(entry_cap + 1), repeat=dim)
            if any(v)
        ]
        k = min(rng.randrange(1, 5), len(pool))
        cone = IntCone(dim, tuple(sorted(rng.sample(pool, k))))

        def sample():
            out = cone.zero()
            for _ in range(rng.randrange(0, 5)):
                g = rng.choice(cone.generators)
                out = tuple(a + b for a, b in zip(out, g))
            return out

        xi1, xi2 = sample(), sample()
        res = balance_pair(cone, xi1, xi2)
        assert tuple(a + b for a, b in zip(xi1, res.eta1)) == tuple(
            a + b for a, b in zip(xi2, res.eta2)
        )
        gap = max(
            Fraction(1), cone.norm(tuple(a - b for a, b in zip(xi1, xi2)))
        )
        worst = max(
            worst, cone.norm(res.eta1) / gap, cone.norm(res.eta2) / gap
        )
    check_constant("balance_pair_norm_ratio", worst)
    print(f"criterion 3: PASS — 300 exact balances, constant {float(worst):.3f}")


def _random_perm_of(n, rng):
    img = list(range(n))
    rng.shuffle(img)
    return Perm(img)


def test_criterion_4_metric_toolkit():
    """Four of the five stated inequalities at their stated constants,
    1000 randomized cases each, zero violations.  (The fifth is below.)"""
    rng = random.Random(404)
    violations = 0
    for _ in range(1000):
        n = rng.randrange(3, 16)
        a, b = _random_perm_of(n, rng), _random_perm_of(n, rng)
        k = rng.randrange(2, n + 1)
        y = tuple(sorted(rng.sample(range(n), k)))
        # coproduct sum identity (exact)
        parts = rng.randrange(1, 4)
        as_ = [_random_perm_of(rng.randrange(1, 6), rng) for _ in range(parts)]
        bs_ = [_random_perm_of(p.degree, rng) for p in as_]
        lhs, rhs = coproduct_sum_identity(as_, bs_)
        violations += lhs != rhs
        # padding bound, constant 3
        lhs, rhs = padding_bound(a, y, constant=3)
        violations += lhs > rhs
        # iterated restriction, constant 3
        kz = rng.randrange(1, k + 1)
        z = tuple(sorted(rng.sample(y, kz)))
        lhs, rhs = iterated_restriction_bound(a, y, z, constant=3)
        violations += lhs > rhs
        # restricted word defect, constant 3 |r|
        from stabilis.perm import GenMap

        gm = GenMap.of(u=a, v=b)
        word = Word((("u", 1), ("v", 1), ("u", -1), ("v", -1)))
        word = word * word.inverse()
        lhs, rhs = restricted_word_defect_bound(gm, y, word, constant=3)
        violations += lhs > rhs
    assert violations == 0
    print("criterion 4: PASS — 4/5 toolkit inequalities, 1000 cases, zero violations")


def test_criterion_4_restricted_distance_at_stated_constant():
    """The stated restricted-distance constant (2) over 1000 random cases.

    This is the criterion exactly as stated.  It is not attainable: with
    a = (0 1) and b = (1 2) on three points and Y = {0, 2}, both
    restrictions are forced to the identity, so the left side is 1 while
    2 (|X|-|Y|) / |X| = 2/3.  The tight constant is 3 (exhaustive over
    all |X| <= 5).  See the decisions ledger for the full analysis.
    """
    rng = random.Random(405)
    violations = []
    for _ in range(1000):
        n = rng.randrange(3, 16)
        a, b = _random_perm_of(n, rng), _random_perm_of(n, rng)
        k = rng.randrange(2, n + 1)
        y = tuple(sorted(rng.sample(range(n), k)))
        lhs, rhs = restricted_distance_bound(a, b, y, constant=2)
        if lhs > rhs:
            violations.append((n, a.image, b.image, y, lhs, rhs))
    assert not violations, (
        f"{len(violations)} violations of the stated constant 2; the bound "
        f"is only valid with constant 3, e.g. {violations[0]}"
    )
    print("criterion 4b: PASS — restricted-distance inequality at constant 2")


def test_criterion_5_repair_bound():
    """>= 500 randomized almost-actions, |G| <= 12, |X| <= 200: repaired
    action exactly multiplicative, distance <= |G|^3 defect."""
    rng = random.Random(505)
    z2 = FiniteGroup.cyclic(2)
    catalog = [
        z2,
        FiniteGroup.cyclic(3),
        FiniteGroup.cyclic(4),
        FiniteGroup.direct_product(z2, FiniteGroup.cyclic(2)),
        FiniteGroup.symmetric(3),
        FiniteGroup.cyclic(6),
        FiniteGroup.dihedral(4),
        FiniteGroup.cyclic(12),
    ]
    for i in range(500):
        g = rng.choice(catalog)
        n = rng.randrange(8, 201) if i % 10 == 0 else rng.randrange(8, 61)
        base = random_action(g, n, rng)
        images = list(base.images)
        for _ in range(rng.randrange(1, 3)):
            e = rng.randrange(g.order)
            images[e] = transposition_product(n, rng.randrange(0, 3), rng) * images[e]
        alpha = AlmostAction(g, images)
        report = repair(alpha)
        # GroupAction construction re-verifies multiplicativity exactly;
        # the certified bound is asserted inside repair and re-checked here.
        assert report.distance <= g.order**3 * report.defect_in
    print("criterion 5: PASS — 500 repairs, distance <= |G|^3 defect, exact outputs")


def _sweep(scenario_path, seed, max_k):
    data = json.loads(Path(scenario_path).read_text())
    base_mode = data.get("mode", "flexible")
    rows = []
    for k in range(max_k + 1):
        step = dict(data)
        step["perturb"] = {"k": k, "seed": f"{seed}:{k}"}
        scenario = jsonio.scenario_from_json(step)
        if scenario.kind == "amalgam":
            result = stabilize(scenario.spec, base_mode, scenario.phi1, scenario.phi2)
        else:
            result = stabilize(scenario.spec, base_mode, scenario.phi1, scenario.tau)
        rows.append((k, result))
    return rows


def test_criterion_6_pipeline_corpus():
    """Corpus sweeps: every output verified exactly, k = 0 gives zero
    distance, distance and growth bounded by recorded fitted constants."""
    plans = [
        ("double_s3_over_z3.json", 3),
        ("double_z4_over_z2.json", 1),
        ("double_d4_over_z2.json", 2),
        ("hnn_v4_over_two_z2.json", 1),
    ]
    for name, max_k in plans:
        rows = _sweep(SCENARIOS / name, seed=606, max_k=max_k)
        worst_dist = Fraction(0)
        worst_growth = Fraction(0)
        for k, result in rows:
            assert result.verified, (name, k)
            if k == 0:
                assert result.input_defect == 0
                assert result.output_distance == 0
                assert result.size_ratio == 1
            elif result.input_defect > 0:
                worst_dist = max(
                    worst_dist, result.output_distance / result.input_defect
                )
                worst_growth = max(
                    worst_growth,
                    (result.size_ratio - 1) / result.input_defect,
                )
            assert result.mode != "flexible" or result.size_ratio >= 1
        check_constant(f"sweep_distance_per_defect:{name}", worst_dist)
        check_constant(f"sweep_growth_per_defect:{name}", worst_growth)
    print("criterion 6: PASS — corpus sweeps verified, constants recorded")


def test_criterion_7_extension_property_ground_truth():
    z2 = FiniteGroup.cyclic(2)
    z4 = FiniteGroup.cyclic(4)
    v4 = FiniteGroup.direct_product(z2, FiniteGroup.cyclic(2))
    assert extension_property(Inclusion(z2, z4, (0, 2))).holds is False
    assert extension_property(Inclusion(z2, v4, (0, 2))).holds is True
    assert extension_property(Inclusion.identity(z2)).holds is True
    print("criterion 7: PASS — extension-property ground truths exact")


def _near_identity_unitary(n, angle, nrng):
    skew = nrng.standard_normal((n, n)) + 1j * nrng.standard_normal((n, n))
    skew = (skew - skew.conj().T) / 2
    nrm = op_norm(skew)
    if nrm > 0:
        skew *= angle / nrm
    vals, vecs = np.linalg.eigh(1j * skew)
    return (vecs * np.exp(-1j * vals)) @ vecs.conj().T


def test_criterion_8_operator_branch():
    """>= 100 exactly-conjugate pairs (dims <= 8, |H| <= 8, angle <= 0.1):
    conjugator within 2 d_H, residual <= 1e-8; amalgam/HNN constants."""
    rng = random.Random(808)
    nrng = np.random.default_rng(809)
    catalog = _catalog_le8()
    for i in range(100):
        h = rng.choice(catalog)
        n = rng.randrange(2, 9)
        act = random_action(h, n, rng)
        rep = URep.from_permutation_action(act)
        angle = nrng.uniform(0.005, 0.1)
        r = _near_identity_unitary(n, angle, nrng)
        other = rep.conjugated(r)
        d = rep.distance(other)
        u = op_conjugate_close(rep, other, max(d, 1e-12))
        assert op_norm(u - np.eye(n)) <= 2 * d + 1e-8
        resid = max(
            op_norm(u @ other.mats[x] @ u.conj().T - rep.mats[x])
            for x in range(h.order)
        )
        assert resid <= 1e-8
        if i % 3 == 0:
            inc = Inclusion.identity(h)
            res = op_stabilize_amalgam(inc, inc, rep, other)
            assert res.relation_residual <= 1e-8
            assert res.distance_out <= 4 * res.defect_in + 1e-8
            t = _near_identity_unitary(n, angle, nrng)
            res2 = op_stabilize_hnn(inc, inc, rep, t)
            assert res2.relation_residual <= 1e-8
            assert res2.distance_out <= 2 * res2.defect_in + 1e-8
    print("criterion 8: PASS — 100 operator conjugations within bounds")


def test_criterion_9_deterministic_reports(tmp_path):
    """Identical seeds and inputs give byte-identical report files."""
    for name in sorted(p.name for p in SCENARIOS.glob("*.json")):
        a = tmp_path / f"a_{name}"
        b = tmp_path / f"b_{name}"
        src = str(SCENARIOS / name)
        assert cli_main(["stabilize", "--in", src, "--seed", "9", "--out", str(a)]) == EXIT_OK
        assert cli_main(["stabilize", "--in", src, "--seed", "9", "--out", str(b)]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes(), name
    sweep_a = tmp_path / "sweep_a.csv"
    sweep_b = tmp_path / "sweep_b.csv"
    src = str(SCENARIOS / "double_s3_over_z3.json")
    for out in (sweep_a, sweep_b):
        assert (
            cli_main(
                ["sweep", "--in", src, "--seed", "4", "--max-k", "2", "--out", str(out)]
            )
            == EXIT_OK
        )
    assert sweep_a.read_bytes() == sweep_b.read_bytes()
    print("criterion 9: PASS — reports byte-identical across reruns")

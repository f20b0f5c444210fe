import random
from fractions import Fraction

import pytest

from stabilis.errors import SpecError
from stabilis.groups import (
    BurnsideVector,
    FiniteGroup,
    GroupAction,
    classify,
    coset_action,
    realize,
)
from stabilis.oracle import AlmostAction, repair, reshape, restrict_almost
from stabilis.perm import Perm
from stabilis.restriction import Inclusion, decomposing_map

from conftest import random_action, transposition_product


def corrupt(action, n_elements, n_swaps, rng):
    """Compose random transpositions into a few element images."""
    images = list(action.images)
    n = action.degree
    for _ in range(n_elements):
        g = rng.randrange(action.group.order)
        images[g] = transposition_product(n, n_swaps, rng) * images[g]
    return AlmostAction(action.group, images)


class TestRepair:
    def test_genuine_input_unchanged_distance(self):
        g = FiniteGroup.cyclic(3)
        act = coset_action(g, (0,))
        report = repair(AlmostAction.from_action(act))
        assert report.distance == 0
        assert report.defect_in == 0
        assert report.repaired.images == act.images

    def test_identity_images_nontrivial_group(self):
        g = FiniteGroup.symmetric(3)
        alpha = AlmostAction(g, [Perm.identity(5)] * 6)
        report = repair(alpha)
        assert report.defect_in == 0 and report.distance == 0

    def test_corrupted_regular_z3(self):
        g = FiniteGroup.cyclic(3)
        act = coset_action(g, (0,))
        imgs = list(act.images)
        im = list(imgs[1].image)
        im[0], im[1] = im[1], im[0]
        imgs[1] = Perm(im)
        alpha = AlmostAction(g, imgs)
        report = repair(alpha)
        assert report.distance <= 27 * report.defect_in

    def test_bound_randomized(self, groups):
        rng = random.Random(1)
        for _ in range(120):
            g = rng.choice(list(groups.values()))
            n = rng.randrange(4, 40)
            act = random_action(g, n, rng)
            alpha = corrupt(act, rng.randrange(1, 3), rng.randrange(0, 3), rng)
            report = repair(alpha)
            assert report.distance <= g.order**3 * report.defect_in
            # the output is a verified GroupAction by construction; check a pair
            out = report.repaired
            assert out.images[g.identity].is_identity()

    def test_restriction_composite_bound(self, groups):
        """Repairing the restriction of a genuine action to a subset:
        distance at most |G|^3 * 6 * (|X|-|Y|)/|Y|."""
        rng = random.Random(2)
        for _ in range(60):
            g = rng.choice([groups["z2"], groups["z3"], groups["z4"], groups["s3"]])
            n = rng.randrange(6, 30)
            act = random_action(g, n, rng)
            k = rng.randrange(max(2, n - 4), n)
            subset = tuple(sorted(rng.sample(range(n), k)))
            alpha = restrict_almost(act, subset)
            report = repair(alpha)
            gap = Fraction(n - k, k)
            assert report.defect_in <= 6 * gap
            assert report.distance <= g.order**3 * 6 * gap

    def test_regular_completion_strategy(self):
        g = FiniteGroup.cyclic(2)
        act = random_action(g, 10, random.Random(3))
        alpha = corrupt(act, 1, 2, random.Random(3))
        for completion in ("identity", "regular"):
            report = repair(alpha, completion=completion)
            assert report.distance <= g.order**3 * report.defect_in

    def test_unknown_completion(self):
        g = FiniteGroup.cyclic(2)
        alpha = AlmostAction(g, [Perm.identity(2)] * 2)
        with pytest.raises(ValueError):
            repair(alpha, completion="bogus")


class TestAlmostAction:
    def test_defect_of_genuine_action_is_zero(self, groups):
        rng = random.Random(4)
        for name in ("z4", "s3", "v4"):
            act = random_action(groups[name], 8, rng)
            assert AlmostAction.from_action(act).defect == 0

    def test_generator_extension(self):
        g = FiniteGroup.cyclic(4)
        gen_img = {1: Perm.from_cycles(4, (0, 1, 2, 3))}
        alpha = AlmostAction.from_generator_images(g, gen_img)
        assert alpha.defect == 0
        assert alpha.images[2] == gen_img[1] * gen_img[1]


class TestReshape:
    def _z2_map(self):
        z2 = FiniteGroup.cyclic(2)
        return z2, decomposing_map(Inclusion.identity(z2))

    def test_target_equals_current(self):
        z2, dm = self._z2_map()
        psi = GroupAction(z2, [Perm.identity(4), Perm.from_cycles(4, (0, 1), (2, 3))])
        xi = dm.apply(classify(psi))
        report = reshape(psi, dm, xi)
        assert report.distance == 0 and report.reshaped.images == psi.images

    def test_spec_example(self):
        z2, dm = self._z2_map()
        psi = GroupAction(z2, [Perm.identity(4), Perm.from_cycles(4, (0, 1), (2, 3))])
        # target: one free orbit plus two fixed points
        free = z2.class_index([0])
        full = z2.class_index([0, 1])
        target_vec = BurnsideVector.unit(z2, free) + BurnsideVector.unit(z2, full, 2)
        xi = dm.apply(target_vec)
        report = reshape(psi, dm, xi)
        assert dm.apply(classify(report.reshaped)) == xi
        assert report.distance == Fraction(1, 2)

    def test_rejects_norm_mismatch(self):
        z2, dm = self._z2_map()
        psi = GroupAction.trivial(z2, 4)
        full = z2.class_index([0, 1])
        xi = dm.apply(BurnsideVector.unit(z2, full, 3))
        with pytest.raises(SpecError):
            reshape(psi, dm, xi)

    def test_exactness_randomized(self, groups):
        rng = random.Random(5)
        z4 = groups["z4"]
        z2 = groups["z2"]
        inc = Inclusion(z2, z4, (0, 2))
        dm = decomposing_map(inc)
        from conftest import random_type_vector

        for _ in range(40):
            n = rng.choice([8, 12, 16, 20])
            psi = random_action(z4, n, rng)
            xi = dm.apply(random_type_vector(z4, n, rng))
            report = reshape(psi, dm, xi)
            assert dm.apply(classify(report.reshaped)) == xi
            assert report.reshaped.degree == n

    def test_distance_decays_with_gap(self, groups):
        """Smaller targets gaps give smaller reshaping distances: compare
        a one-step change against a full retype on the same action."""
        rng = random.Random(6)
        z4 = groups["z4"]
        inc = Inclusion(groups["z2"], z4, (0, 2))
        dm = decomposing_map(inc)
        free = z4.class_index([0])
        mid = next(c.index for c in z4.subgroup_classes if c.subgroup_order == 2)
        base_vec = BurnsideVector.unit(z4, free, 3)  # 12 points, free
        psi = realize(base_vec)
        near = BurnsideVector.unit(z4, free, 2) + BurnsideVector.unit(z4, mid, 2)
        far = BurnsideVector.unit(z4, mid, 6)
        r_near = reshape(psi, dm, dm.apply(near))
        r_far = reshape(psi, dm, dm.apply(far))
        assert r_near.target_gap < r_far.target_gap
        assert r_near.distance <= r_far.distance

import random

import pytest

from stabilis.groups import (
    BurnsideVector,
    FiniteGroup,
    GroupAction,
    coset_action,
    realize,
)
from stabilis.perm import Perm


@pytest.fixture(scope="session")
def groups():
    """Small-group catalog shared by the randomized suites."""
    z2 = FiniteGroup.cyclic(2)
    return {
        "z2": z2,
        "z3": FiniteGroup.cyclic(3),
        "z4": FiniteGroup.cyclic(4),
        "z5": FiniteGroup.cyclic(5),
        "z6": FiniteGroup.cyclic(6),
        "z8": FiniteGroup.cyclic(8),
        "z12": FiniteGroup.cyclic(12),
        "v4": FiniteGroup.direct_product(z2, FiniteGroup.cyclic(2)),
        "s3": FiniteGroup.symmetric(3),
        "d4": FiniteGroup.dihedral(4),
    }


def random_perm(n, rng):
    image = list(range(n))
    rng.shuffle(image)
    return Perm(image)


def transposition_product(n, k, rng):
    p = Perm.identity(n)
    for _ in range(k):
        i, j = rng.sample(range(n), 2)
        p = Perm.from_cycles(n, (i, j)) * p
    return p


def random_type_vector(group, degree, rng):
    """A nonnegative type vector of exactly the requested norm."""
    classes = group.subgroup_classes
    coeffs = [0] * len(classes)
    left = degree
    while left > 0:
        choices = [i for i, c in enumerate(classes) if c.action_degree <= left]
        i = rng.choice(choices)
        coeffs[i] += 1
        left -= classes[i].action_degree
    return BurnsideVector(group, coeffs)


def random_action(group, degree, rng):
    """A random action of exact degree: random type, randomly relabeled."""
    act = realize(random_type_vector(group, degree, rng))
    return act.conjugated(random_perm(degree, rng))


def z3_in_s3():
    """The order-3 subgroup embedding used by the corpus."""
    from stabilis.restriction import Inclusion

    s3 = FiniteGroup.symmetric(3)
    z3 = FiniteGroup.cyclic(3)
    gen = None
    for x in range(6):
        k, y = 1, x
        while y != s3.identity:
            y = s3.mult[y][x]
            k += 1
        if k == 3:
            gen = x
            break
    return Inclusion(z3, s3, (s3.identity, gen, s3.mult[gen][gen]))

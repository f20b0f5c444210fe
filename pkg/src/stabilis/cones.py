"""Exact integer-cone machinery.

A cone here is the subsemigroup of Z^N generated by a finite vector set
and 0.  Everything is exact big-integer / Fraction arithmetic; bounded
searches are breadth-first over certificate coefficient vectors ordered
by weighted norm with lexicographic tie-breaking, and an exhausted
budget is a distinct outcome, never conflated with non-membership.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import BudgetExceeded, SpecError
from .intlin import (
    kernel_basis,
    normalize_direction,
    nonneg_solution,
    solve_integer,
    solve_rational,
    vector_gcd,
)

DEFAULT_BUDGET = 200_000


def _vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def _vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def _vec_scale(c, v):
    return tuple(c * x for x in v)


@dataclass(frozen=True)
class IntCone:
    """Subsemigroup of Z^dim generated by `generators`, with a weighted l1 norm."""

    dim: int
    generators: tuple
    weights: tuple = None

    def __post_init__(self):
        gens = tuple(tuple(int(x) for x in g) for g in self.generators)
        if not gens:
            raise SpecError("cone needs at least one generator")
        if len(set(gens)) != len(gens):
            raise SpecError("duplicate cone generators")
        if any(len(g) != self.dim for g in gens):
            raise SpecError("generator dimension mismatch")
        if any(all(x == 0 for x in g) for g in gens):
            raise SpecError("zero vector is implicit, not a generator")
        object.__setattr__(self, "generators", gens)
        w = self.weights
        if w is None:
            w = tuple(Fraction(1) for _ in range(self.dim))
        else:
            w = tuple(Fraction(x) for x in w)
            if len(w) != self.dim or any(x <= 0 for x in w):
                raise SpecError("weights must be positive, one per coordinate")
        object.__setattr__(self, "weights", w)

    def norm(self, v):
        return sum(w * abs(x) for w, x in zip(self.weights, v))

    @property
    def is_nonneg(self):
        return all(x >= 0 for g in self.generators for x in g)

    def combine(self, coeffs):
        out = (0,) * self.dim
        for c, g in zip(coeffs, self.generators):
            if c:
                out = _vec_add(out, _vec_scale(c, g))
        return out

    def zero(self):
        return (0,) * self.dim


@lru_cache(maxsize=4096)
def _relation_basis_cached(gens):
    dim = len(gens[0])
    matrix = [tuple(g[i] for g in gens) for i in range(dim)]
    return kernel_basis(matrix)


def relation_lattice_basis(generators):
    """Basis of the integer relations {k : sum_i k_i v_i == 0}."""
    gens = tuple(tuple(g) for g in generators)
    if not gens:
        return ()
    return _relation_basis_cached(gens)


@lru_cache(maxsize=4096)
def _conductor_cached(gens, dim):
    basis = relation_lattice_basis(gens)
    L = sum(abs(x) for lam in basis for x in lam) or 1
    total = (0,) * dim
    for g in gens:
        total = _vec_add(total, g)
    return _vec_scale(L, total), L


def conductor_vector(cone: IntCone):
    """A vector w0 in the cone past which the lattice fills the real cone.

    w0 = L * sum(generators) with L the total absolute size of a relation
    basis (L = 1 when the generators are independent).  Every lattice point
    of w0 + R>=0-cone lies in the integer cone; see `member`'s fast path,
    which turns that containment into explicit certificates.
    """
    return _conductor_cached(cone.generators, cone.dim)


@dataclass(frozen=True)
class MemberResult:
    status: str  # "in" | "out" | "budget"
    certificate: tuple = None  # nonneg ints, one per generator, when "in"

    @property
    def certified_in(self):
        return self.status == "in"

    @property
    def certified_out(self):
        return self.status == "out"


def _verify_certificate(cone, w, cert):
    if any(c < 0 for c in cert):
        raise SpecError("negative certificate")
    if cone.combine(cert) != tuple(w):
        raise SpecError("certificate does not reproduce the target")


def _dense_certificate(cone, w, k_int, mu):
    """Certificate for w given an integer representation and a feasible
    rational representation of w - w0.  Constructive form of the density
    containment; guaranteed to produce nonnegative integers."""
    basis = relation_lattice_basis(cone.generators)
    L = sum(abs(x) for lam in basis for x in lam) or 1
    nu = [m + L for m in mu]
    if not basis:
        cert = tuple(k_int)
    else:
        diff = [n - k for n, k in zip(nu, k_int)]
        columns = [tuple(lam) for lam in basis]
        matrix = [tuple(col[i] for col in columns) for i in range(len(diff))]
        alpha = solve_rational(matrix, diff)
        if alpha is None:
            raise SpecError("relation solve failed")  # defensive
        cert = list(k_int)
        for a, lam in zip(alpha, basis):
            fl = a.numerator // a.denominator  # floor for Fractions
            if fl:
                for i in range(len(cert)):
                    cert[i] += fl * lam[i]
        cert = tuple(cert)
    _verify_certificate(cone, w, cert)
    return cert


def _sum_search(cone, target, norm_cap, budget, collect=None):
    """Min-norm BFS over nonnegative generator combinations.

    Visits sums in increasing (weighted norm, lex coefficient) order.  If
    `collect` is a dict it is filled with sum -> coefficient tuple for every
    visited state.  Returns the coefficient tuple reaching `target`, or None
    when the search space is exhausted, or raises BudgetExceeded.
    """
    k = len(cone.generators)
    gen_norms = [cone.norm(g) for g in cone.generators]
    start = (Fraction(0), (0,) * k, cone.zero(), 0)
    heap = [start]
    seen = {}
    steps = 0
    target = tuple(target) if target is not None else None
    bound_by_target = cone.is_nonneg and target is not None
    while heap:
        norm, coeffs, vec, min_gen = heapq.heappop(heap)
        if vec in seen:
            continue
        seen[vec] = coeffs
        if collect is not None:
            collect[vec] = coeffs
        if target is not None and vec == target:
            return coeffs
        for i in range(min_gen, k):
            child_norm = norm + gen_norms[i]
            if norm_cap is not None and child_norm > norm_cap:
                continue
            child_vec = _vec_add(vec, cone.generators[i])
            if bound_by_target and any(a > b for a, b in zip(child_vec, target)):
                continue
            if child_vec in seen:
                continue
            child_coeffs = tuple(
                c + 1 if j == i else c for j, c in enumerate(coeffs)
            )
            steps += 1
            if steps > budget:
                raise BudgetExceeded("cone search budget exhausted")
            heapq.heappush(heap, (child_norm, child_coeffs, child_vec, i))
    return None


def member(cone: IntCone, w, budget=DEFAULT_BUDGET) -> MemberResult:
    """Decide w in cone, with a verified nonnegative-integer certificate.

    Tri-state: certified in, certified out, or budget exhausted.  The fast
    path applies when w sits in the generator lattice and beyond the
    conductor shift; the slow path is an exhaustive bounded search, which
    is complete whenever the generators are componentwise nonnegative.
    """
    w = tuple(int(x) for x in w)
    if len(w) != cone.dim:
        raise SpecError("dimension mismatch")
    if all(x == 0 for x in w):
        return MemberResult("in", (0,) * len(cone.generators))
    k_int = solve_integer(
        [tuple(g[i] for g in cone.generators) for i in range(cone.dim)], w
    )
    if k_int is None:
        return MemberResult("out")  # not even in the generator lattice
    real = nonneg_solution(cone.generators, w)
    if real is None:
        return MemberResult("out")  # not in the real cone
    w0, _ = conductor_vector(cone)
    mu = nonneg_solution(cone.generators, _vec_sub(w, w0))
    if mu is not None:
        cert = _dense_certificate(cone, w, k_int, mu)
        return MemberResult("in", cert)
    norm_cap = None if cone.is_nonneg else cone.norm(w) + cone.norm(w0)
    try:
        found = _sum_search(cone, w, norm_cap, budget)
    except BudgetExceeded:
        return MemberResult("budget")
    if found is not None:
        _verify_certificate(cone, w, found)
        return MemberResult("in", found)
    if cone.is_nonneg:
        return MemberResult("out")
    return MemberResult("budget")


@dataclass(frozen=True)
class BalanceResult:
    eta1: tuple
    eta2: tuple
    cert1: tuple
    cert2: tuple

    @property
    def norm_pair(self):
        return self.eta1, self.eta2


def balance_pair(cone: IntCone, xi1, xi2, budget=DEFAULT_BUDGET) -> BalanceResult:
    """Find eta1, eta2 in the cone with xi1 + eta1 == xi2 + eta2.

    Searches by increasing norm bound (doubling); returns the first
    solution at the minimal bound, ordered by (norm, lex).  Inputs must be
    certified cone members.
    """
    xi1, xi2 = tuple(xi1), tuple(xi2)
    for xi in (xi1, xi2):
        res = member(cone, xi, budget=budget)
        if not res.certified_in:
            raise SpecError("balance_pair inputs must be certified cone members")
    delta = _vec_sub(xi2, xi1)
    if all(x == 0 for x in delta):
        zero_cert = (0,) * len(cone.generators)
        return BalanceResult(cone.zero(), cone.zero(), zero_cert, zero_cert)
    base = max(cone.norm(delta), Fraction(1))
    cap = base
    spent = 0
    while spent < budget:
        table = {}
        try:
            _sum_search(cone, None, cap + cone.norm(delta), budget - spent, collect=table)
        except BudgetExceeded:
            raise
        spent += len(table)
        # eta1 - eta2 == delta; scan eta1 candidates in (norm, lex) order.
        candidates = sorted(
            (cone.norm(v), c, v) for v, c in table.items() if cone.norm(v) <= cap
        )
        for _, c1, v1 in candidates:
            v2 = _vec_sub(v1, delta)
            if v2 in table:
                return BalanceResult(v1, v2, c1, table[v2])
        cap *= 2
    raise BudgetExceeded("balance_pair budget exhausted")


# ---------------------------------------------------------------------------
# Primitive cones: direct sums of rank-one components along independent axes.
# ---------------------------------------------------------------------------


def semigroup_member(gens, value):
    """Membership of `value` in the numerical semigroup generated by `gens`.

    Returns a dict gen -> count certificate, or None.  Exact DP.
    """
    if value < 0:
        return None
    if value == 0:
        return {}
    gens = sorted(set(int(g) for g in gens))
    if not gens or gens[0] <= 0:
        raise SpecError("semigroup generators must be positive")
    reach = [None] * (value + 1)
    reach[0] = (None, None)
    for v in range(1, value + 1):
        for g in gens:
            if g <= v and reach[v - g] is not None:
                reach[v] = (v - g, g)
                break
    if reach[value] is None:
        return None
    cert = {}
    v = value
    while v > 0:
        prev, g = reach[v]
        cert[g] = cert.get(g, 0) + 1
        v = prev
    return cert


class PrimitiveCone:
    """A cone splitting as a direct sum of rank-one components.

    `axes` are gcd-normalized independent directions; every ambient
    generator must be a positive multiple of exactly one axis.  All
    arithmetic happens in axis coordinates, where the cone is the direct
    sum of one numerical semigroup per axis.
    """

    def __init__(self, generators, axes, ambient_weights=None):
        gens = tuple(tuple(int(x) for x in g) for g in generators)
        axes = tuple(tuple(int(x) for x in a) for a in axes)
        if not gens or not axes:
            raise SpecError("primitive cone needs generators and axes")
        dim = len(gens[0])
        for a in axes:
            d, g = normalize_direction(a)
            if d != a:
                raise SpecError("axes must be gcd-normalized")
        if kernel_basis([tuple(a[i] for a in axes) for i in range(dim)]):
            raise SpecError("axes must be linearly independent")
        self.ambient_dim = dim
        self.axes = axes
        if ambient_weights is None:
            ambient_weights = tuple(Fraction(1) for _ in range(dim))
        self.ambient_weights = tuple(Fraction(w) for w in ambient_weights)
        self.axis_weights = tuple(
            sum(w * abs(x) for w, x in zip(self.ambient_weights, a)) for a in axes
        )
        gen_axis = []
        axis_gens = [set() for _ in axes]
        for g in gens:
            direction, mult = normalize_direction(g)
            try:
                idx = axes.index(direction)
            except ValueError:
                raise SpecError(
                    f"generator {g} is not a positive multiple of an axis"
                ) from None
            gen_axis.append(idx)
            axis_gens[idx].add(mult)
        if any(not s for s in axis_gens):
            raise SpecError("every axis needs at least one generator")
        self.generators = gens
        self.gen_axis = tuple(gen_axis)
        self.axis_gens = tuple(tuple(sorted(s)) for s in axis_gens)
        self.steps = tuple(min(s) for s in self.axis_gens)

    @property
    def rank(self):
        return len(self.axes)

    def coords(self, vector):
        """Axis coordinates of an ambient vector (must be exact integers)."""
        matrix = [tuple(a[i] for a in self.axes) for i in range(self.ambient_dim)]
        sol = solve_rational(matrix, vector)
        if sol is None or any(x.denominator != 1 for x in sol):
            raise SpecError("vector is not an integer combination of the axes")
        return tuple(int(x) for x in sol)

    def uncoords(self, coords):
        out = (0,) * self.ambient_dim
        for c, a in zip(coords, self.axes):
            if c:
                out = _vec_add(out, _vec_scale(c, a))
        return out

    def norm_coords(self, coords):
        return sum(w * abs(c) for w, c in zip(self.axis_weights, coords))

    def member_coords(self, coords):
        """Exact membership in the cone, axiswise; None or per-axis certs."""
        certs = []
        for c, gens in zip(coords, self.axis_gens):
            cert = semigroup_member(gens, c)
            if cert is None:
                return None
            certs.append(cert)
        return tuple(certs)

    def in_grid(self, coords):
        """Membership in the stepped subcone (each coordinate a nonnegative
        multiple of that axis' minimal step)."""
        return all(c >= 0 and c % k == 0 for c, k in zip(coords, self.steps))

    def grid_round_down(self, coords):
        return tuple(
            (c // k) * k if c > 0 else 0 for c, k in zip(coords, self.steps)
        )

    def conductor_coords(self):
        """Per-axis conductor shift, in coordinates (the density vector)."""
        basis = []
        for gens in self.axis_gens:
            basis.extend(relation_lattice_basis([(g,) for g in gens]))
        L = sum(abs(x) for lam in basis for x in lam) or 1
        return tuple(L * sum(gens) for gens in self.axis_gens)


@dataclass(frozen=True)
class LinearMapZ:
    """Integer matrix acting on axis-coordinate vectors."""

    rows: tuple
    target_weights: tuple = None

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        tw = self.target_weights
        if tw is None:
            tw = tuple(Fraction(1) for _ in rows)
        else:
            tw = tuple(Fraction(x) for x in tw)
        object.__setattr__(self, "target_weights", tw)

    @property
    def target_dim(self):
        return len(self.rows)

    @property
    def source_dim(self):
        return len(self.rows[0]) if self.rows else 0

    def apply(self, coords):
        return tuple(sum(r * c for r, c in zip(row, coords)) for row in self.rows)

    def target_norm(self, vec):
        return sum(w * abs(x) for w, x in zip(self.target_weights, vec))

    @classmethod
    def zero(cls, source_dim, target_dim=1):
        return cls(tuple(tuple(0 for _ in range(source_dim)) for _ in range(target_dim)))


def project_ker(pcone: PrimitiveCone, dmap: LinearMapZ, xi_coords, budget=DEFAULT_BUDGET):
    """Closest stepped-subcone kernel element below xi in norm.

    Returns v (axis coordinates) with v in the stepped subcone, d(v) == 0,
    ||v|| <= ||xi|| and ||xi - v|| minimal over the bounded search (ties:
    lexicographically smallest multiples).  When d(xi) == 0 already, v is
    the componentwise round-down of xi into the stepped subcone.
    """
    xi_coords = tuple(int(c) for c in xi_coords)
    if len(xi_coords) != pcone.rank:
        raise SpecError("coordinate length mismatch")
    if all(x == 0 for x in dmap.apply(xi_coords)):
        return pcone.grid_round_down(xi_coords)
    norm_cap = pcone.norm_coords(xi_coords)
    steps = pcone.steps
    weights = pcone.axis_weights
    best = None
    counter = 0

    def recurse(idx, coords, used_norm):
        nonlocal best, counter
        counter += 1
        if counter > budget:
            raise BudgetExceeded("project_ker budget exhausted")
        if idx == pcone.rank:
            v = tuple(coords)
            if any(x != 0 for x in dmap.apply(v)):
                return
            dist = sum(
                w * abs(x - c) for w, x, c in zip(weights, xi_coords, v)
            )
            key = (dist, v)
            if best is None or key < best:
                best = key
            return
        step_norm = weights[idx] * steps[idx]
        max_m = int((norm_cap - used_norm) / step_norm) if step_norm else 0
        for m in range(max_m + 1):
            coords.append(m * steps[idx])
            recurse(idx + 1, coords, used_norm + m * step_norm)
            coords.pop()

    recurse(0, [], Fraction(0))
    if best is None:
        raise BudgetExceeded("no kernel element found within budget")
    return best[1]


def _grid_target_search(pcone, dmap, target, norm_cap, budget, require_positive=None):
    """Min-norm m-multiples search: find grid coords eta >= 0 with
    d(eta) == target, ||eta|| <= norm_cap.  Deterministic (norm, lex) order."""
    steps = pcone.steps
    weights = pcone.axis_weights
    best = None
    counter = 0

    def recurse(idx, coords, used_norm):
        nonlocal best, counter
        counter += 1
        if counter > budget:
            raise BudgetExceeded("grid search budget exhausted")
        if best is not None and used_norm > best[0]:
            return
        if idx == pcone.rank:
            v = tuple(coords)
            if dmap.apply(v) != tuple(target):
                return
            if require_positive is not None and v[require_positive] == 0:
                return
            key = (used_norm, v)
            if best is None or key < best:
                best = key
            return
        step_norm = weights[idx] * steps[idx]
        max_m = int((norm_cap - used_norm) / step_norm) if step_norm else 0
        for m in range(max_m + 1):
            coords.append(m * steps[idx])
            recurse(idx + 1, coords, used_norm + m * step_norm)
            coords.pop()

    recurse(0, [], Fraction(0))
    return None if best is None else best[1]


@dataclass(frozen=True)
class FlexAdjustment:
    xi_prime: tuple  # axis coordinates, componentwise xi or 0
    eta: tuple  # axis coordinates, in the cone (grid when possible)
    kept_axes: tuple
    eta_in_grid: bool
    cut_norm: Fraction
    eta_norm: Fraction
    defect_norm: Fraction

    @property
    def cut_ratio(self):
        if self.defect_norm == 0:
            return Fraction(0)
        return self.cut_norm / self.defect_norm

    @property
    def eta_ratio(self):
        if self.defect_norm == 0:
            return Fraction(0)
        return self.eta_norm / self.defect_norm


def flex_adjust(pcone: PrimitiveCone, dmap: LinearMapZ, xi_coords, budget=DEFAULT_BUDGET):
    """Zero some components of xi and add a small cone element to reach ker d.

    Returns a FlexAdjustment with d(xi' + eta) == 0 exactly.  eta lands in
    the stepped subcone whenever the bounded search finds such an element;
    otherwise it falls back to a certified cone element built from kernel
    vectors (exactness is preserved either way).
    """
    xi_coords = tuple(int(c) for c in xi_coords)
    d_xi = dmap.apply(xi_coords)
    defect_norm = dmap.target_norm(d_xi)
    if all(x == 0 for x in d_xi):
        return FlexAdjustment(
            xi_coords,
            (0,) * pcone.rank,
            tuple(range(pcone.rank)),
            True,
            Fraction(0),
            Fraction(0),
            Fraction(0),
        )
    v = project_ker(pcone, dmap, xi_coords, budget=budget)
    kept = tuple(i for i in range(pcone.rank) if v[i] != 0)
    xi_prime = tuple(
        xi_coords[i] if i in set(kept) else 0 for i in range(pcone.rank)
    )
    cut_norm = pcone.norm_coords(_vec_sub(xi_coords, xi_prime))
    target = tuple(-x for x in dmap.apply(xi_prime))

    # Preferred path: eta directly in the stepped subcone.
    base_cap = pcone.norm_coords(_vec_sub(v, xi_prime)) + pcone.norm_coords(
        pcone.conductor_coords()
    )
    cap = max(base_cap, Fraction(1))
    eta = None
    for _ in range(3):
        try:
            eta = _grid_target_search(pcone, dmap, target, cap, budget)
        except BudgetExceeded:
            eta = None
            break
        if eta is not None:
            break
        cap *= 2
    if eta is not None:
        return FlexAdjustment(
            xi_prime,
            eta,
            kept,
            True,
            cut_norm,
            pcone.norm_coords(eta),
            defect_norm,
        )

    # Fallback: boost the kernel element v with kernel vectors until the
    # difference against xi' is a certified cone element on every kept axis.
    boosters = {}
    for a in kept:
        try:
            z = _grid_target_search(
                pcone,
                dmap,
                (0,) * dmap.target_dim,
                pcone.norm_coords(v) + pcone.norm_coords(pcone.conductor_coords()),
                budget,
                require_positive=a,
            )
        except BudgetExceeded:
            z = None
        boosters[a] = z if (z is not None and any(z)) else v
    v_prime = list(v)
    for a in kept:
        booster = boosters[a]
        guard = 0
        while semigroup_member(pcone.axis_gens[a], v_prime[a] - xi_coords[a]) is None:
            v_prime = [x + y for x, y in zip(v_prime, booster)]
            guard += 1
            if guard > budget:
                raise BudgetExceeded("flex_adjust booster loop exhausted")
    eta = tuple(x - y for x, y in zip(v_prime, xi_prime))
    if pcone.member_coords(eta) is None:
        raise SpecError("flex_adjust fallback produced a non-member")  # defensive
    if any(x != 0 for x in dmap.apply(_vec_add(xi_prime, eta))):
        raise SpecError("flex_adjust lost exactness")  # defensive
    return FlexAdjustment(
        xi_prime,
        eta,
        kept,
        pcone.in_grid(eta),
        cut_norm,
        pcone.norm_coords(eta),
        defect_norm,
    )

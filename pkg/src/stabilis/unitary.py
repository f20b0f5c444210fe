"""Operator-norm conjugator and stabilization for unitary representations.

The one floating-point module: near-identity intertwiners are averaged
over the finite group, their unitary part is extracted by the Newton
polar iteration, and the amalgam/HNN constructions follow with explicit
constants (4 delta and 2 delta).  Default tolerances: 1e-12 for the
iteration, 1e-8 for assertions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpecError
from .groups import FiniteGroup, GroupAction

ITER_TOL = 1e-12
ASSERT_TOL = 1e-8
MAX_ITER = 200
POWER_TOL = 1e-10
POWER_MAX_ITER = 10_000


def op_norm(a) -> float:
    """Largest singular value, by power iteration on a* a.

    Deterministic start vector; relative tolerance 1e-10; raises on
    non-convergence.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return 0.0
    gram = a.conj().T @ a
    if np.allclose(gram, 0):
        return 0.0
    v = np.arange(1, n + 1, dtype=complex)
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(POWER_MAX_ITER):
        w = gram @ v
        lam = float(np.real(np.vdot(v, w)))
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        v = w / nrm
        if abs(lam - prev) <= POWER_TOL * max(1.0, abs(lam)):
            return float(np.sqrt(max(lam, 0.0)))
        prev = lam
    raise SpecError("power iteration did not converge")


def _check_unitary(mat, tol):
    n = mat.shape[0]
    if op_norm(mat.conj().T @ mat - np.eye(n)) > tol:
        raise SpecError("matrix is not unitary within tolerance")


@dataclass(frozen=True)
class URep:
    """A unitary representation of a finite group, one matrix per element."""

    group: FiniteGroup
    mats: tuple
    tol: float = ASSERT_TOL

    def __post_init__(self):
        mats = tuple(np.asarray(m, dtype=complex) for m in self.mats)
        object.__setattr__(self, "mats", mats)
        if len(mats) != self.group.order:
            raise SpecError("need one matrix per group element")
        dims = {m.shape for m in mats}
        if len(dims) != 1 or any(s[0] != s[1] for s in dims):
            raise SpecError("matrices must be square and equal-size")
        for m in mats:
            _check_unitary(m, self.tol)
        mult = self.group.mult
        for a in range(self.group.order):
            for b in range(self.group.order):
                if op_norm(mats[a] @ mats[b] - mats[mult[a][b]]) > self.tol:
                    raise SpecError("representation is not multiplicative")

    @property
    def dim(self):
        return self.mats[0].shape[0]

    @classmethod
    def from_permutation_action(cls, action: GroupAction):
        mats = []
        n = action.degree
        for p in action.images:
            m = np.zeros((n, n), dtype=complex)
            for x in range(n):
                m[p(x), x] = 1.0
            mats.append(m)
        return cls(action.group, tuple(mats))

    def conjugated(self, u):
        u = np.asarray(u, dtype=complex)
        uh = u.conj().T
        return URep(self.group, tuple(u @ m @ uh for m in self.mats), self.tol)

    def distance(self, other) -> float:
        if other.group is not self.group or other.dim != self.dim:
            raise SpecError("representations are not comparable")
        return max(
            op_norm(a - b) for a, b in zip(self.mats, other.mats)
        )


def average_intertwiner(phi1: URep, phi2: URep):
    """a = (1/|H|) sum_h phi1(h) phi2(h)^{-1}.

    Satisfies ||a - I|| <= d_H(phi1, phi2) and phi1(h) a phi2(h)^{-1} == a
    for all h (checked to the assertion tolerance).
    """
    if phi1.group is not phi2.group or phi1.dim != phi2.dim:
        raise SpecError("representations are not comparable")
    group = phi1.group
    n = phi1.dim
    a = np.zeros((n, n), dtype=complex)
    for h in range(group.order):
        a += phi1.mats[h] @ phi2.mats[h].conj().T
    a /= group.order
    dist = phi1.distance(phi2)
    if op_norm(a - np.eye(n)) > dist + ASSERT_TOL:
        raise SpecError("averaging exceeded the distance bound")
    for h in range(group.order):
        resid = phi1.mats[h] @ a @ phi2.mats[h].conj().T - a
        if op_norm(resid) > ASSERT_TOL:
            raise SpecError("averaged operator failed to intertwine")
    return a


def polar_unitary(a, tol=ITER_TOL):
    """Unitary polar factor via the Newton iteration X <- (X + X^{-*}) / 2.

    Requires an invertible input (guaranteed when ||a - I|| < 1); asserts
    ||u - I|| <= 2 ||a - I|| with float slack.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if abs(np.linalg.det(a)) < 1e-300:
        raise SpecError("polar factor of a singular matrix")
    x = a.copy()
    for _ in range(MAX_ITER):
        nxt = 0.5 * (x + np.linalg.inv(x).conj().T)
        if np.max(np.abs(nxt - x)) <= tol:
            x = nxt
            break
        x = nxt
    else:
        raise SpecError("polar iteration did not converge")
    _check_unitary(x, ASSERT_TOL)
    dev = op_norm(a - np.eye(n))
    if op_norm(x - np.eye(n)) > 2 * dev + ASSERT_TOL:
        raise SpecError("polar factor drifted past twice the deviation")
    return x


def op_conjugate_close(phi1: URep, phi2: URep, delta: float):
    """A unitary u with phi2 conjugated by u equal to phi1.

    Asserts ||u - I|| <= 2 delta and the intertwining residual below the
    assertion tolerance.  Requires d_H(phi1, phi2) <= delta < 1.
    """
    if delta >= 1:
        raise SpecError("conjugation requires delta < 1")
    dist = phi1.distance(phi2)
    if dist > delta + ASSERT_TOL:
        raise SpecError("representations are farther apart than promised")
    a = average_intertwiner(phi1, phi2)
    u = polar_unitary(a)
    n = phi1.dim
    if op_norm(u - np.eye(n)) > 2 * delta + ASSERT_TOL:
        raise SpecError("conjugator drifted past 2 delta")
    uh = u.conj().T
    resid = max(
        op_norm(u @ phi2.mats[h] @ uh - phi1.mats[h])
        for h in range(phi1.group.order)
    )
    if resid > ASSERT_TOL:
        raise SpecError(f"intertwining residual {resid:.2e} too large")
    return u


@dataclass(frozen=True)
class OperatorAmalgamResult:
    psi1: URep
    psi2: URep
    defect_in: float
    distance_out: float
    relation_residual: float


@dataclass(frozen=True)
class OperatorHNNResult:
    psi_g: URep
    psi_t: np.ndarray
    defect_in: float
    distance_out: float
    relation_residual: float

    def __eq__(self, other):  # ndarray field breaks the default
        return self is other


def _amalgam_defect(i1, i2, phi1: URep, phi2: URep) -> float:
    return max(
        op_norm(phi1.mats[i1.embed[x]] - phi2.mats[i2.embed[x]])
        for x in range(i1.sub.order)
    )


def op_stabilize_amalgam(i1, i2, phi1: URep, phi2: URep) -> OperatorAmalgamResult:
    """psi1 = phi1, psi2 = phi2 conjugated; relations hold within tolerance.

    Generator distance at most 4 delta for input defect delta < 1.
    """
    delta = _amalgam_defect(i1, i2, phi1, phi2)
    if delta >= 1:
        raise SpecError("operator defect must be below 1")
    h = i1.sub
    r1 = URep(h, tuple(phi1.mats[g] for g in i1.embed), phi1.tol)
    r2 = URep(h, tuple(phi2.mats[g] for g in i2.embed), phi2.tol)
    u = op_conjugate_close(r1, r2, max(delta, 1e-15))
    psi2 = phi2.conjugated(u)
    residual = max(
        op_norm(phi1.mats[i1.embed[x]] - psi2.mats[i2.embed[x]])
        for x in range(h.order)
    )
    if residual > ASSERT_TOL:
        raise SpecError("amalgam relations failed after conjugation")
    distance = max(0.0, psi2.distance(phi2))
    if distance > 4 * delta + ASSERT_TOL:
        raise SpecError("amalgam construction drifted past 4 delta")
    return OperatorAmalgamResult(phi1, psi2, delta, distance, residual)


def op_stabilize_hnn(i1, i2, phi: URep, t_mat) -> OperatorHNNResult:
    """psi_g = phi, psi_t = u t; the stable-letter relation holds within tol.

    Stable-letter distance at most 2 delta for input defect delta < 1.
    """
    t_mat = np.asarray(t_mat, dtype=complex)
    _check_unitary(t_mat, ASSERT_TOL)
    h = i1.sub
    r1 = URep(h, tuple(phi.mats[g] for g in i1.embed), phi.tol)
    r2 = URep(h, tuple(phi.mats[g] for g in i2.embed), phi.tol)
    r2t = r2.conjugated(t_mat)
    delta = r1.distance(r2t)
    if delta >= 1:
        raise SpecError("operator defect must be below 1")
    u = op_conjugate_close(r1, r2t, max(delta, 1e-15))
    psi_t = u @ t_mat
    pth = psi_t.conj().T
    residual = max(
        op_norm(
            phi.mats[i1.embed[x]] - psi_t @ phi.mats[i2.embed[x]] @ pth
        )
        for x in range(h.order)
    )
    if residual > ASSERT_TOL:
        raise SpecError("hnn relation failed after conjugation")
    distance = op_norm(psi_t - t_mat)
    if distance > 2 * delta + ASSERT_TOL:
        raise SpecError("hnn construction drifted past 2 delta")
    return OperatorHNNResult(phi, psi_t, delta, distance, residual)

"""Fell bundles realized inside an ambient block matrix algebra.

A realized bundle assigns each arrow of a finite groupoid a subspace of a
fixed ambient matrix space, supported on the (range, source) block, so that
multiplication and involution are inherited from the ambient algebra:

  * grading      fibers(x) . fibers(y) inside fibers(x.y)
  * involution   fibers(x)^* = fibers(x^-1)
  * saturation   span(fibers(x) . fibers(y)) = fibers(x.y)
  * unit fibers  product/adjoint-closed (finite-dimensional C*-algebras)

Actions on bundles are unitarily implemented (UnitaryAction): abstract bundle
automorphisms that are not of the form Ad W for an ambient unitary are out of
scope for v1; this is a representational restriction, not a mathematical claim.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .groupoids import (
    FiniteGroup,
    FiniteGroupoid,
    GroupoidAction,
    GroupoidError,
    check_haar_invariance,
    group_as_groupoid,
    pair_groupoid,
    product_groupoid,
    semidirect_groupoid,
    transformation_groupoid,
)
from .linalg import CStarRealization, LinalgError, Subspace, orthonormalize

FIBER_TOL = 1e-9


class BundleError(ValueError):
    """Raised when a bundle construction or validation fails structurally."""


class RealizedFellBundle:
    """A Fell bundle over a finite groupoid, realized in block matrices.

    block_dims gives the size of each unit's diagonal block (in the order of
    base.units); the ambient dimension is their sum.  fibers[x] is a Subspace
    of ambient matrices supported on rows of block range(x) and columns of
    block source(x).
    """

    def __init__(self, base: FiniteGroupoid, block_dims, fibers,
                 name: str = "bundle"):
        self.base = base
        self.block_dims = [int(d) for d in block_dims]
        if len(self.block_dims) != base.n_units:
            raise BundleError("need one block dimension per unit")
        if any(d <= 0 for d in self.block_dims):
            raise BundleError("block dimensions must be positive")
        offsets = np.concatenate([[0], np.cumsum(self.block_dims)])
        self.block_offsets = offsets[:-1].tolist()
        self.ambient_dim = int(offsets[-1])
        self.fibers = list(fibers)
        if len(self.fibers) != base.n_arrows:
            raise BundleError("need one fiber per arrow")
        for f in self.fibers:
            if f.ambient_dim != self.ambient_dim:
                raise BundleError("fiber ambient dimension mismatch")
        self.name = name
        # provenance hooks set by constructors (None otherwise)
        self.pullback_source: RealizedFellBundle | None = None
        self.pullback_phi = None
        self.semidirect_base: RealizedFellBundle | None = None
        self.semidirect_action: UnitaryAction | None = None

    # -- block bookkeeping ---------------------------------------------------
    def block_slice(self, unit: int) -> slice:
        k = self.base.unit_index[int(unit)]
        return slice(self.block_offsets[k], self.block_offsets[k]
                     + self.block_dims[k])

    def arrow_block(self, x: int) -> tuple[slice, slice]:
        return self.block_slice(self.base.r(x)), self.block_slice(self.base.s(x))

    def fiber(self, x: int) -> Subspace:
        return self.fibers[x]

    def total_fiber_dim(self) -> int:
        return sum(f.dim for f in self.fibers)

    def __repr__(self):
        return (f"RealizedFellBundle({self.name}, arrows={self.base.n_arrows}, "
                f"ambient={self.ambient_dim}, total_dim={self.total_fiber_dim()})")

    # -- pullback plumbing -----------------------------------------------------
    def embed_fiber(self, x: int, matrix: np.ndarray) -> np.ndarray:
        """Realized matrix at arrow x for a source-bundle fiber element.

        Defined for pullback-constructed bundles: the source element (living
        at arrow phi(x) of the source bundle) is copied block-to-block.
        """
        if self.pullback_source is None:
            raise BundleError("embed_fiber needs a pullback-constructed bundle")
        src = self.pullback_source
        y = self.pullback_phi[x]
        rs, cs = src.arrow_block(y)
        out = np.zeros((self.ambient_dim, self.ambient_dim), dtype=complex)
        ro, co = self.arrow_block(x)
        out[ro, co] = np.asarray(matrix, complex)[rs, cs]
        return out

    def extract_fiber(self, x: int, matrix: np.ndarray) -> np.ndarray:
        """Inverse of embed_fiber: recover the source-bundle fiber element."""
        if self.pullback_source is None:
            raise BundleError("extract_fiber needs a pullback-constructed bundle")
        src = self.pullback_source
        y = self.pullback_phi[x]
        rs, cs = src.arrow_block(y)
        out = np.zeros((src.ambient_dim, src.ambient_dim), dtype=complex)
        ro, co = self.arrow_block(x)
        out[rs, cs] = np.asarray(matrix, complex)[ro, co]
        return out


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst_residual: float
    detail: str = ""


@dataclass
class BundleReport:
    checks: list[CheckResult]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def __str__(self):
        lines = []
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            extra = f"  ({c.detail})" if c.detail else ""
            lines.append(f"{status}  {c.name:<14} worst residual "
                         f"{c.worst_residual:.2e}{extra}")
        return "\n".join(lines)


def validate_bundle(b: RealizedFellBundle, tol: float = FIBER_TOL) -> BundleReport:
    """Check every realized-bundle invariant, reporting worst residuals.

    Checks: per-fiber block support, grading, involution (as subspaces),
    unit-fiber closedness, and saturation (rank equality of span(A_x A_y)
    against the fiber over x.y).
    """
    base = b.base
    checks = []

    worst, detail = 0.0, ""
    for x in range(base.n_arrows):
        ro, co = b.arrow_block(x)
        for m in b.fiber(x).basis:
            masked = m.copy()
            masked[ro, co] = 0.0
            off = float(np.abs(masked).max())
            if off > worst:
                worst, detail = off, f"arrow {base.labels[x]}"
    checks.append(CheckResult("block support", worst <= tol, worst, detail))

    worst, detail = 0.0, ""
    sat_fail, sat_detail, sat_gap = False, "", 0
    for x, y in base.composable_pairs():
        fx, fy = b.fiber(x), b.fiber(y)
        target = b.fiber(base.mul(x, y))
        if fx.dim == 0 or fy.dim == 0:
            prods = np.zeros((0, b.ambient_dim, b.ambient_dim))
        else:
            prods = np.einsum("iab,jbc->ijac", fx.basis, fy.basis).reshape(
                -1, b.ambient_dim, b.ambient_dim)
        for p in prods:
            off = target.defect(p)
            if off > worst:
                worst, detail = off, f"arrows ({base.labels[x]}, {base.labels[y]})"
        span = orthonormalize(prods, ambient_dim=b.ambient_dim) if len(prods) \
            else orthonormalize([], ambient_dim=b.ambient_dim)
        if span.dim != target.dim:
            sat_fail = True
            gap = target.dim - span.dim
            if gap > sat_gap:
                sat_gap = gap
                sat_detail = (f"span(A_x A_y) has dim {span.dim} < "
                              f"{target.dim} at ({base.labels[x]}, "
                              f"{base.labels[y]})")
    checks.append(CheckResult("grading", worst <= tol, worst, detail))
    checks.append(CheckResult("saturation", not sat_fail,
                              float(sat_gap), sat_detail))

    worst, detail = 0.0, ""
    for x in range(base.n_arrows):
        adj = b.fiber(x).basis.conj().transpose(0, 2, 1)
        target = b.fiber(base.inv(x))
        if b.fiber(x).dim != target.dim:
            worst, detail = float("inf"), f"dim mismatch at {base.labels[x]}"
            continue
        if len(adj):
            dist = orthonormalize(adj).projector_distance(target)
            if dist > worst:
                worst, detail = dist, f"arrow {base.labels[x]}"
    checks.append(CheckResult("involution", worst <= tol, worst, detail))

    worst, detail = 0.0, ""
    for u in base.units:
        f = b.fiber(int(u))
        if f.dim == 0:
            continue
        prods = np.einsum("iab,jbc->ijac", f.basis, f.basis).reshape(
            -1, b.ambient_dim, b.ambient_dim)
        adj = f.basis.conj().transpose(0, 2, 1)
        for m in np.concatenate([prods, adj]):
            off = f.defect(m)
            if off > worst:
                worst, detail = off, f"unit {base.labels[int(u)]}"
    checks.append(CheckResult("unit fibers", worst <= tol, worst, detail))

    return BundleReport(checks)


def _require_valid(b: RealizedFellBundle) -> RealizedFellBundle:
    report = validate_bundle(b)
    if not report.all_passed:
        failing = "; ".join(f"{c.name}: {c.detail}" for c in report.failing())
        raise BundleError(f"constructed bundle fails validation ({failing})")
    return b


# ---------------------------------------------------------------------------
# constructors over groups
# ---------------------------------------------------------------------------

def _right_regular_permutations(g: FiniteGroup) -> np.ndarray:
    """rho_s e_t = e_{t s^-1}; a faithful unitary representation of g."""
    n = g.order
    out = np.zeros((n, n, n), dtype=complex)
    for s in g.elements():
        for t in g.elements():
            out[s, g.mul(t, g.inv(s)), t] = 1.0
    return out


def semidirect_bundle_from_group_action(algebra: CStarRealization,
                                        g: FiniteGroup, u,
                                        name: str | None = None
                                        ) -> RealizedFellBundle:
    """The bundle over g whose sections form the crossed product of the action
    Ad u(s) on the given matrix algebra.

    Fiber over s is {a . (u(s) (x) rho_s) : a in algebra}, where rho is the
    right-regular permutation factor that keeps the fibers of distinct group
    elements independent in the ambient algebra.
    """
    m = algebra.ambient_dim
    us = [np.asarray(u(s) if callable(u) else u[s], dtype=complex)
          for s in g.elements()]
    for s in g.elements():
        if np.abs(us[s].conj().T @ us[s] - np.eye(m)).max() > 1e-12:
            raise BundleError(f"u({s}) is not unitary")
        for t in g.elements():
            if np.abs(us[s] @ us[t] - us[g.mul(s, t)]).max() > 1e-12:
                raise BundleError("u is not a group representation")
    for s in g.elements():
        for b in algebra.carrier.basis:
            if algebra.carrier.defect(us[s] @ b @ us[s].conj().T) > FIBER_TOL:
                raise BundleError(
                    f"Ad u({s}) does not preserve the algebra")
    rho = _right_regular_permutations(g)
    base = group_as_groupoid(g)
    scale = 1.0 / np.sqrt(g.order)
    fibers = []
    for s in g.elements():
        mats = [np.kron(b @ us[s], rho[s]) * scale
                for b in algebra.carrier.basis]
        fibers.append(Subspace(m * g.order, np.stack(mats)))
    bundle = RealizedFellBundle(base, [m * g.order], fibers,
                                name or f"{g.name} semidirect")
    return _require_valid(bundle)


def cocycle_line_bundle(g: FiniteGroup, omega,
                        name: str | None = None) -> RealizedFellBundle:
    """Line bundle over g twisted by a unit-modulus 2-cocycle.

    Fibers are C . U_s for the omega-regular unitaries U_s e_t = omega(s, t)
    e_{st}, which satisfy U_s U_t = omega(s, t) U_{st}.  omega must satisfy
    the cocycle identity and the normalization omega(e, s) = omega(s, e) = 1.
    Supplies bundles that are not semidirect products of an action.
    """
    n = g.order

    def w(s, t):
        val = complex(omega(s, t) if callable(omega) else omega[s][t])
        if abs(abs(val) - 1.0) > 1e-12:
            raise BundleError("cocycle values must have modulus one")
        return val

    for s in g.elements():
        if abs(w(g.identity, s) - 1.0) > 1e-12 or abs(w(s, g.identity) - 1.0) > 1e-12:
            raise BundleError("cocycle is not normalized at the identity")
    for s in g.elements():
        for t in g.elements():
            for r in g.elements():
                lhs = w(s, t) * w(g.mul(s, t), r)
                rhs = w(t, r) * w(s, g.mul(t, r))
                if abs(lhs - rhs) > 1e-12:
                    raise BundleError(
                        f"cocycle identity fails at ({s}, {t}, {r})")
    base = group_as_groupoid(g)
    fibers = []
    for s in g.elements():
        mat = np.zeros((n, n), dtype=complex)
        for t in g.elements():
            mat[g.mul(s, t), t] = w(s, t)
        fibers.append(Subspace(n, mat[None, :, :] / np.sqrt(n)))
    bundle = RealizedFellBundle(base, [n], fibers, name or f"{g.name} line")
    return _require_valid(bundle)


def trivial_cocycle(g: FiniteGroup):
    return lambda s, t: 1.0


def trivial_line_bundle_over_groupoid(gd: FiniteGroupoid,
                                      name: str | None = None
                                      ) -> RealizedFellBundle:
    """Fiber C . E_{r(x), s(x)} at each arrow; realizes the groupoid algebra."""
    n = gd.n_units
    fibers = []
    for x in range(gd.n_arrows):
        mat = np.zeros((n, n), dtype=complex)
        mat[gd.unit_index[gd.r(x)], gd.unit_index[gd.s(x)]] = 1.0
        fibers.append(Subspace(n, mat[None, :, :]))
    bundle = RealizedFellBundle(gd, [1] * n, fibers, name or f"line({gd.name})")
    return _require_valid(bundle)


# ---------------------------------------------------------------------------
# pullbacks and their specializations
# ---------------------------------------------------------------------------

def _check_homomorphism(h: FiniteGroupoid, gd: FiniteGroupoid, phi) -> np.ndarray:
    m = np.asarray([phi(x) for x in range(h.n_arrows)], dtype=int)
    for u in h.units:
        if int(m[u]) not in set(gd.units.tolist()):
            raise BundleError("phi does not map units to units")
    for x in range(h.n_arrows):
        if gd.inv(int(m[x])) != int(m[h.inv(x)]):
            raise BundleError("phi does not preserve inversion")
        if gd.r(int(m[x])) != int(m[h.r(x)]) or gd.s(int(m[x])) != int(m[h.s(x)]):
            raise BundleError("phi does not intertwine range/source")
    for x, y in h.composable_pairs():
        if int(m[h.mul(x, y)]) != gd.mul(int(m[x]), int(m[y])):
            raise BundleError("phi does not preserve composition")
    return m


def pullback_bundle(b: RealizedFellBundle, h: FiniteGroupoid, phi,
                    name: str | None = None) -> RealizedFellBundle:
    """Pull a bundle back along a groupoid homomorphism phi: h -> base(b).

    The fiber over an arrow x of h is a copy of the fiber over phi(x),
    re-supported on the (range(x), source(x)) block; multiplication is
    (a, x)(b, y) = (ab, xy) as inherited block arithmetic.
    """
    arrow_map = _check_homomorphism(h, b.base, phi)
    block_dims = [b.block_dims[b.base.unit_index[int(arrow_map[u])]]
                  for u in h.units]
    offsets = np.concatenate([[0], np.cumsum(block_dims)]).astype(int)
    ambient = int(offsets[-1])
    unit_pos = {int(u): k for k, u in enumerate(h.units)}

    def h_block(u):
        k = unit_pos[int(u)]
        return slice(int(offsets[k]), int(offsets[k]) + block_dims[k])

    fibers = []
    for x in range(h.n_arrows):
        y = int(arrow_map[x])
        rs, cs = b.arrow_block(y)
        ro, co = h_block(h.r(x)), h_block(h.s(x))
        mats = []
        for m in b.fiber(y).basis:
            out = np.zeros((ambient, ambient), dtype=complex)
            out[ro, co] = m[rs, cs]
            mats.append(out)
        fibers.append(Subspace(ambient, np.stack(mats)) if mats
                      else orthonormalize([], ambient))
    bundle = RealizedFellBundle(h, block_dims, fibers,
                                name or f"pullback({b.name})")
    bundle.pullback_source = b
    bundle.pullback_phi = arrow_map
    return _require_valid(bundle)


def transformation_bundle(a: RealizedFellBundle,
                          name: str | None = None) -> RealizedFellBundle:
    """Pull a group bundle back to the transformation groupoid along
    (s, t) -> s; fiber over (s, t) is a block-placed copy of the fiber at s."""
    if not a.base.is_group():
        raise BundleError("transformation bundle needs a bundle over a group")
    gd = transformation_groupoid(_group_of(a))
    labels = gd.labels
    return pullback_bundle(a, gd, lambda x: labels[x][0],
                           name=name or f"transformation({a.name})")


def product_bundle(a: RealizedFellBundle, h: FiniteGroupoid,
                   name: str | None = None) -> RealizedFellBundle:
    """Pull a group bundle back along the first projection of G x h."""
    if not a.base.is_group():
        raise BundleError("product bundle needs a bundle over a group")
    gd = product_groupoid(_group_of(a), h)
    labels = gd.labels
    return pullback_bundle(a, gd, lambda x: labels[x][0],
                           name=name or f"{a.name} x {h.name}")


def _group_of(a: RealizedFellBundle) -> FiniteGroup:
    """Recover the group structure from a one-unit base groupoid."""
    base = a.base
    table = np.empty((base.n_arrows, base.n_arrows), dtype=int)
    for x in range(base.n_arrows):
        for y in range(base.n_arrows):
            table[x, y] = base.mul(x, y)
    founding_unit = int(base.units[0])
    if founding_unit != 0:
        raise BundleError("group-based bundles index the identity as arrow 0")
    return FiniteGroup(table, base.name)


# ---------------------------------------------------------------------------
# unitary actions and groupoid semidirect products
# ---------------------------------------------------------------------------

class UnitaryAction:
    """A group action on a realized bundle implemented by ambient unitaries.

    W maps each group element to an ambient unitary with W_s W_t = W_{st}
    exactly (no projective factors in v1); each W_t permutes the unit blocks
    along beta_t and Ad W_t carries fibers(x) onto fibers(beta_t(x)).
    """

    def __init__(self, bundle: RealizedFellBundle, beta: GroupoidAction, W):
        self.bundle = bundle
        self.beta = beta
        self.group = beta.group
        n = bundle.ambient_dim
        self.W = np.stack([np.asarray(W(t) if callable(W) else W[t],
                                      dtype=complex)
                           for t in self.group.elements()])
        if self.W.shape != (self.group.order, n, n):
            raise BundleError("W matrices must match the bundle ambient")
        self._validate()

    def _validate(self):
        g, b = self.group, self.bundle
        n = b.ambient_dim
        eye = np.eye(n)
        for t in g.elements():
            if np.abs(self.W[t].conj().T @ self.W[t] - eye).max() > 1e-12:
                raise BundleError(f"W({t}) is not unitary")
        for s in g.elements():
            for t in g.elements():
                if np.abs(self.W[s] @ self.W[t] - self.W[g.mul(s, t)]).max() \
                        > 1e-12:
                    raise BundleError("W is not a group homomorphism")
        # block permutation: W_t is supported on (block u, block beta_t^-1(u))
        for t in g.elements():
            allowed = np.zeros((n, n), dtype=bool)
            for u in b.base.units:
                src = b.block_slice(self.beta.apply(g.inv(t), int(u)))
                allowed[b.block_slice(int(u)), src] = True
            off = float(np.abs(self.W[t][~allowed]).max()) \
                if (~allowed).any() else 0.0
            if off > 1e-12:
                raise BundleError(f"W({t}) is not block-permuting along beta")
        for t in g.elements():
            for x in range(b.base.n_arrows):
                image = [self.W[t] @ m @ self.W[t].conj().T
                         for m in b.fiber(x).basis]
                target = b.fiber(self.beta.apply(t, x))
                if len(image) != target.dim:
                    raise BundleError("Ad W does not match fiber dimensions")
                if image:
                    dist = orthonormalize(image).projector_distance(target)
                    if dist > FIBER_TOL:
                        raise BundleError(
                            f"Ad W({t}) does not map fiber {x} onto its image")

    def ad(self, t: int, matrix: np.ndarray) -> np.ndarray:
        return self.W[t] @ matrix @ self.W[t].conj().T


def groupoid_semidirect_bundle(b: RealizedFellBundle, act: UnitaryAction,
                               name: str | None = None) -> RealizedFellBundle:
    """Semidirect-product bundle of a unitary action on a realized bundle.

    Over the semidirect-product groupoid, the fiber at (x, t) is
    fibers(x) . W_t; the multiplication law (m W_t)(n W_s) =
    m Ad W_t(n) W_{ts} then holds automatically in the ambient algebra.
    """
    if act.bundle is not b:
        raise BundleError("action was validated for a different bundle")
    if not check_haar_invariance(b.base, act.beta):
        raise BundleError("underlying arrow action is not Haar-invariant")
    sd = semidirect_groupoid(b.base, act.beta)
    fibers = []
    for (x, t) in sd.labels:
        mats = [m @ act.W[t] for m in b.fiber(x).basis]
        fibers.append(Subspace(b.ambient_dim, np.stack(mats)) if mats
                      else orthonormalize([], b.ambient_dim))
    bundle = RealizedFellBundle(sd, b.block_dims, fibers,
                                name or f"{b.name} x| {act.group.name}")
    bundle.semidirect_base = b
    bundle.semidirect_action = act
    return _require_valid(bundle)


def right_translation_action(a: RealizedFellBundle) -> UnitaryAction:
    """The right-translation action on a transformation bundle.

    beta_r relabels arrows (s, t) -> (s, t r^-1); W_r = P_r (x) I with P_r the
    right-translation permutation of the unit-index factor (the unit blocks
    come first in this realization's ambient layout).
    """
    tb = a
    if tb.pullback_source is None or not tb.pullback_source.base.is_group():
        raise BundleError("expected a transformation bundle")
    g = _group_of(tb.pullback_source)
    gd = tb.base
    idx = {lab: i for i, lab in enumerate(gd.labels)}
    perms = {}
    for r in g.elements():
        perms[r] = np.array([idx[(s, g.mul(t, g.inv(r)))]
                             for (s, t) in gd.labels], dtype=int)
    beta = GroupoidAction(g, gd, perms)
    m = tb.pullback_source.ambient_dim
    W = {}
    for r in g.elements():
        p = np.zeros((g.order, g.order), dtype=complex)
        for t in g.elements():
            p[g.mul(t, g.inv(r)), t] = 1.0
        W[r] = np.kron(p, np.eye(m))
    return UnitaryAction(tb, beta, W)


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def _matrix_to_json(m: np.ndarray):
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(c[0], c[1]) for c in row] for row in rows],
                    dtype=complex)


def bundle_to_json_dict(b: RealizedFellBundle) -> dict:
    """Serialize a bundle over a group (constructor-only groupoids excepted)."""
    if not b.base.is_group():
        raise BundleError("only bundles over groups serialize in v1")
    return {
        "group": _group_of(b).to_json_dict(),
        "block_dims": b.block_dims,
        "fibers": {str(x): [_matrix_to_json(m) for m in b.fiber(x).basis]
                   for x in range(b.base.n_arrows)},
        "name": b.name,
    }


def bundle_from_json_dict(data: dict) -> RealizedFellBundle:
    """Load and validate a bundle description.

    The base is given either as {"group": ...} or as
    {"groupoid_constructor": {"kind": "group"|"transformation"|"pair",
    "group": ...}}.  Fibers are per-arrow spanning matrices (row-major,
    [re, im] entries); they are orthonormalized on load and the result is
    validated before use.
    """
    if "group" in data:
        base = group_as_groupoid(FiniteGroup.from_json_dict(data["group"]))
    elif "groupoid_constructor" in data:
        spec = data["groupoid_constructor"]
        g = FiniteGroup.from_json_dict(spec["group"])
        kind = spec.get("kind", "group")
        if kind == "group":
            base = group_as_groupoid(g)
        elif kind == "transformation":
            base = transformation_groupoid(g)
        elif kind == "pair":
            base = pair_groupoid(g)
        else:
            raise BundleError(f"unknown groupoid constructor {kind!r}")
    else:
        raise BundleError('bundle JSON needs "group" or "groupoid_constructor"')
    block_dims = data["block_dims"]
    fibers_data = data.get("fibers", {})
    ambient = int(np.sum(block_dims))
    fibers = []
    for x in range(base.n_arrows):
        mats = [_matrix_from_json(m) for m in fibers_data.get(str(x), [])]
        for m in mats:
            if m.shape != (ambient, ambient):
                raise BundleError(f"fiber matrix at arrow {x} has wrong shape")
        fibers.append(orthonormalize(mats, ambient_dim=ambient))
    bundle = RealizedFellBundle(base, block_dims, fibers,
                                data.get("name", "loaded bundle"))
    return bundle


def load_bundle(path: str) -> tuple[RealizedFellBundle, BundleReport]:
    """Read a bundle JSON file; returns the bundle plus its validation report."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    bundle = bundle_from_json_dict(data)
    return bundle, validate_bundle(bundle)


def save_bundle(b: RealizedFellBundle, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(bundle_to_json_dict(b), fh, indent=2, sort_keys=True)
        fh.write("\n")

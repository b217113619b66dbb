"""Finite groups and finite groupoids with counting-measure Haar systems.

Arrows are opaque integer ids with explicit structure maps (range, source,
partial composition, inversion) so that constructed groupoids — transformation,
semidirect-product, pair, Cartesian product — stay flat and comparable.
Constructors attach human-readable labels for reporting.

The Haar system is always counting measure on the range fibres; every
integral over a fibre becomes a plain sum with weight one.  Finite groups are
unimodular, so the modular function is the documented constant below.
"""

from __future__ import annotations

import itertools

import numpy as np

# Modular function of any finite group: counting measure is bi-invariant.
MODULAR_FUNCTION = 1.0


class GroupoidError(ValueError):
    """Raised when group/groupoid/action axioms fail an exhaustive check."""


class FiniteGroup:
    """A finite group as an index table; element 0 is the identity."""

    def __init__(self, table, name: str = "G"):
        table = np.asarray(table, dtype=int)
        n = table.shape[0]
        if table.shape != (n, n):
            raise GroupoidError("multiplication table must be square")
        self.order = n
        self.table = table
        self.name = name
        self.identity = 0
        self._validate()
        self.inverse = np.array([int(np.where(table[a] == 0)[0][0])
                                 for a in range(n)], dtype=int)

    def _validate(self):
        n, t = self.order, self.table
        if t.min() < 0 or t.max() >= n:
            raise GroupoidError("table entries out of range")
        if not (np.all(t[0] == np.arange(n)) and np.all(t[:, 0] == np.arange(n))):
            raise GroupoidError("element 0 is not an identity")
        # associativity on all triples at once: t[t[a,b],c] vs t[a,t[b,c]]
        if not np.array_equal(t[t], t[:, t]):
            raise GroupoidError("multiplication table is not associative")
        for a in range(n):
            if 0 not in t[a]:
                raise GroupoidError(f"element {a} has no inverse")

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def elements(self) -> range:
        return range(self.order)

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"FiniteGroup({self.name}, order={self.order})"

    @staticmethod
    def cyclic(n: int, name: str | None = None) -> "FiniteGroup":
        idx = np.arange(n)
        table = (idx[:, None] + idx[None, :]) % n
        return FiniteGroup(table, name or f"Z{n}")

    @staticmethod
    def trivial() -> "FiniteGroup":
        return FiniteGroup.cyclic(1, "1")

    @staticmethod
    def direct_product(g: "FiniteGroup", h: "FiniteGroup",
                       name: str | None = None) -> "FiniteGroup":
        ng, nh = g.order, h.order
        table = np.empty((ng * nh, ng * nh), dtype=int)
        for (a, b), (c, d) in itertools.product(
                itertools.product(range(ng), range(nh)), repeat=2):
            table[a * nh + b, c * nh + d] = g.mul(a, c) * nh + h.mul(b, d)
        return FiniteGroup(table, name or f"{g.name}x{h.name}")

    @staticmethod
    def klein_four() -> "FiniteGroup":
        z2 = FiniteGroup.cyclic(2)
        return FiniteGroup.direct_product(z2, z2, "Z2xZ2")

    @staticmethod
    def from_json_dict(data: dict) -> "FiniteGroup":
        if not isinstance(data, dict) or "order" not in data or "table" not in data:
            raise GroupoidError('group JSON needs "order" and "table"')
        table = np.asarray(data["table"], dtype=int)
        if table.shape != (int(data["order"]),) * 2:
            raise GroupoidError("group table shape disagrees with order")
        return FiniteGroup(table, data.get("name", "G"))

    def to_json_dict(self) -> dict:
        return {"order": self.order, "table": self.table.tolist(),
                "name": self.name}


class FiniteGroupoid:
    """A finite groupoid: arrows 0..n-1 with explicit structure maps.

    compose is an (n, n) index table with -1 where the pair is not composable;
    compose[x, y] is defined exactly when source(x) = range(y).  Units are the
    arrows that are their own range and source and act as two-sided identities.
    """

    def __init__(self, n_arrows: int, units, range_map, source_map,
                 compose, invert, labels=None, name: str = "groupoid"):
        self.n_arrows = int(n_arrows)
        self.units = np.asarray(units, dtype=int)
        self.range_map = np.asarray(range_map, dtype=int)
        self.source_map = np.asarray(source_map, dtype=int)
        self.compose_table = np.asarray(compose, dtype=int)
        self.invert = np.asarray(invert, dtype=int)
        self.labels = labels if labels is not None else list(range(n_arrows))
        self.name = name
        self.unit_index = {int(u): k for k, u in enumerate(self.units)}
        self._r_fibres = [np.flatnonzero(self.range_map == u) for u in self.units]
        self._validate()

    # -- structure ---------------------------------------------------------
    def r(self, x: int) -> int:
        return int(self.range_map[x])

    def s(self, x: int) -> int:
        return int(self.source_map[x])

    def inv(self, x: int) -> int:
        return int(self.invert[x])

    def composable(self, x: int, y: int) -> bool:
        return self.s(x) == self.r(y)

    def mul(self, x: int, y: int) -> int:
        z = int(self.compose_table[x, y])
        if z < 0:
            raise GroupoidError(f"arrows {x}, {y} are not composable")
        return z

    def r_fibre(self, u: int) -> np.ndarray:
        """Arrows with range u; the counting Haar measure lives here."""
        return self._r_fibres[self.unit_index[int(u)]]

    def composable_pairs(self):
        for x in range(self.n_arrows):
            for y in self.r_fibre(self.s(x)):
                yield x, int(y)

    @property
    def n_units(self) -> int:
        return len(self.units)

    def is_group(self) -> bool:
        return self.n_units == 1

    def __repr__(self):
        return (f"FiniteGroupoid({self.name}, arrows={self.n_arrows}, "
                f"units={self.n_units})")

    # -- exhaustive axiom checks (finite enumeration, no sampling) ----------
    def _validate(self):
        n = self.n_arrows
        if len(set(self.units.tolist())) != len(self.units):
            raise GroupoidError("duplicate units")
        for u in self.units:
            if self.r(u) != u or self.s(u) != u:
                raise GroupoidError(f"unit {u} is not its own range/source")
        unit_set = set(self.units.tolist())
        for x in range(n):
            if self.r(x) not in unit_set or self.s(x) not in unit_set:
                raise GroupoidError(f"arrow {x} has non-unit range or source")
        # definedness pattern and range/source of products
        for x in range(n):
            for y in range(n):
                z = int(self.compose_table[x, y])
                if (z >= 0) != self.composable(x, y):
                    raise GroupoidError(
                        f"composability pattern wrong at ({x}, {y})")
                if z >= 0 and (self.r(z) != self.r(x) or self.s(z) != self.s(y)):
                    raise GroupoidError(f"range/source of product ({x}, {y})")
        # unit laws
        for x in range(n):
            if self.mul(self.r(x), x) != x or self.mul(x, self.s(x)) != x:
                raise GroupoidError(f"unit law fails at arrow {x}")
        # inverses
        for x in range(n):
            xi = self.inv(x)
            if self.r(xi) != self.s(x) or self.s(xi) != self.r(x):
                raise GroupoidError(f"inverse of {x} has wrong range/source")
            if self.mul(x, xi) != self.r(x) or self.mul(xi, x) != self.s(x):
                raise GroupoidError(f"inverse law fails at arrow {x}")
        # associativity on all composable triples
        for x, y in self.composable_pairs():
            xy = self.mul(x, y)
            for z in self.r_fibre(self.s(y)):
                if self.mul(xy, int(z)) != self.mul(x, self.mul(y, int(z))):
                    raise GroupoidError(
                        f"associativity fails at ({x}, {y}, {z})")
        # left invariance of the counting Haar system: y -> x.y is a bijection
        # from the fibre over s(x) onto the fibre over r(x)
        for x in range(n):
            image = {self.mul(x, int(y)) for y in self.r_fibre(self.s(x))}
            if image != set(self.r_fibre(self.r(x)).tolist()):
                raise GroupoidError(
                    f"left translation by {x} is not a fibre bijection")


def _build(labels, units_lab, r_lab, s_lab, mul_lab, inv_lab, name):
    """Assemble a FiniteGroupoid from label-level structure functions."""
    index = {lab: i for i, lab in enumerate(labels)}
    n = len(labels)
    rng = [index[r_lab(lab)] for lab in labels]
    src = [index[s_lab(lab)] for lab in labels]
    inv = [index[inv_lab(lab)] for lab in labels]
    compose = -np.ones((n, n), dtype=int)
    for i, a in enumerate(labels):
        for j, b in enumerate(labels):
            if src[i] == rng[j]:
                compose[i, j] = index[mul_lab(a, b)]
    units = [index[u] for u in units_lab]
    return FiniteGroupoid(n, units, rng, src, compose, inv, labels, name)


def group_as_groupoid(g: FiniteGroup) -> FiniteGroupoid:
    """The group viewed as a groupoid with a single unit."""
    labels = list(g.elements())
    return _build(
        labels, [0],
        lambda a: 0, lambda a: 0,
        lambda a, b: g.mul(a, b), lambda a: g.inv(a),
        f"{g.name} (as groupoid)")


def transformation_groupoid(g: FiniteGroup) -> FiniteGroupoid:
    """G acting on itself by left translation.

    Arrows are pairs (s, t) with product (s, tr)(t, r) = (st, r) and inverse
    (s, t)^-1 = (s^-1, st); units are (e, t), range(s, t) = (e, st), and
    source(s, t) = (e, t).
    """
    e = g.identity
    labels = [(s, t) for s in g.elements() for t in g.elements()]
    return _build(
        labels, [(e, t) for t in g.elements()],
        lambda a: (e, g.mul(a[0], a[1])),
        lambda a: (e, a[1]),
        lambda a, b: (g.mul(a[0], b[0]), b[1]),
        lambda a: (g.inv(a[0]), g.mul(a[0], a[1])),
        f"{g.name} lt {g.name}")


def pair_groupoid(g: FiniteGroup) -> FiniteGroupoid:
    """The full equivalence relation on the set G: (s, t)(t, u) = (s, u)."""
    labels = [(s, t) for s in g.elements() for t in g.elements()]
    return _build(
        labels, [(s, s) for s in g.elements()],
        lambda a: (a[0], a[0]),
        lambda a: (a[1], a[1]),
        lambda a, b: (a[0], b[1]),
        lambda a: (a[1], a[0]),
        f"pairs({g.name})")


def product_groupoid(g: FiniteGroup, h: FiniteGroupoid) -> FiniteGroupoid:
    """Cartesian product of a group and a groupoid, componentwise."""
    labels = [(s, x) for s in g.elements() for x in range(h.n_arrows)]
    return _build(
        labels, [(g.identity, int(u)) for u in h.units],
        lambda a: (g.identity, h.r(a[1])),
        lambda a: (g.identity, h.s(a[1])),
        lambda a, b: (g.mul(a[0], b[0]), h.mul(a[1], b[1])),
        lambda a: (g.inv(a[0]), h.inv(a[1])),
        f"{g.name} x {h.name}")


class GroupoidAction:
    """A finite group acting on a finite groupoid by automorphisms.

    beta maps each group element to an arrow permutation.  Construction
    verifies exhaustively that every beta_t is a groupoid automorphism, that
    t -> beta_t is a homomorphism, and that each beta_t carries range fibres
    bijectively onto range fibres (so the counting Haar system is invariant —
    checked, not assumed).
    """

    def __init__(self, group: FiniteGroup, groupoid: FiniteGroupoid, beta):
        self.group = group
        self.groupoid = groupoid
        perms = np.stack([np.asarray(beta[t] if not callable(beta) else beta(t),
                                     dtype=int)
                          for t in group.elements()])
        self.perms = perms
        self._validate()

    def apply(self, t: int, x: int) -> int:
        return int(self.perms[t, x])

    def _validate(self):
        g, gd = self.group, self.groupoid
        n = gd.n_arrows
        ident = np.arange(n)
        if not np.array_equal(self.perms[g.identity], ident):
            raise GroupoidError("beta_e is not the identity permutation")
        for t in g.elements():
            p = self.perms[t]
            if sorted(p.tolist()) != list(range(n)):
                raise GroupoidError(f"beta_{t} is not a permutation")
            unit_set = set(gd.units.tolist())
            if {int(p[u]) for u in gd.units} != unit_set:
                raise GroupoidError(f"beta_{t} does not permute the units")
            for x in range(n):
                if gd.r(int(p[x])) != int(p[gd.r(x)]) or \
                        gd.s(int(p[x])) != int(p[gd.s(x)]):
                    raise GroupoidError(
                        f"beta_{t} does not intertwine range/source")
                if int(p[gd.inv(x)]) != gd.inv(int(p[x])):
                    raise GroupoidError(f"beta_{t} does not preserve inversion")
            for x, y in gd.composable_pairs():
                if int(p[gd.mul(x, y)]) != gd.mul(int(p[x]), int(p[y])):
                    raise GroupoidError(
                        f"beta_{t} does not preserve composition")
        for s in g.elements():
            for t in g.elements():
                if not np.array_equal(self.perms[s][self.perms[t]],
                                      self.perms[g.mul(s, t)]):
                    raise GroupoidError("beta is not a group homomorphism")
        if not check_haar_invariance(gd, self):
            raise GroupoidError("action does not preserve the Haar system")


def check_haar_invariance(gd: FiniteGroupoid, action: GroupoidAction) -> bool:
    """True iff each beta_t maps every r-fibre bijectively onto the r-fibre
    of the translated unit — counting-measure invariance, checked exhaustively.
    """
    for t in action.group.elements():
        p = action.perms[t]
        for u in gd.units:
            image = {int(p[x]) for x in gd.r_fibre(int(u))}
            target = set(gd.r_fibre(int(p[u])).tolist())
            if image != target:
                return False
    return True


def semidirect_groupoid(base: FiniteGroupoid,
                        action: GroupoidAction) -> FiniteGroupoid:
    """Semidirect product of a groupoid by a group action.

    Arrows are pairs (x, t); (x, t)(y, s) = (x.beta_t(y), ts) is defined when
    source(x) = beta_t(range(y)); inverse (x, t)^-1 = (beta_{t^-1}(x^-1), t^-1);
    units are (u, e); range(x, t) = (r(x), e), source(x, t) = (beta_t^-1(s(x)), e).
    The counting Haar system is the product of counting measures.
    """
    if action.groupoid is not base:
        raise GroupoidError("action was validated for a different groupoid")
    g = action.group
    e = g.identity
    labels = [(x, t) for x in range(base.n_arrows) for t in g.elements()]

    def beta(t, x):
        return action.apply(t, x)

    return _build(
        labels, [(int(u), e) for u in base.units],
        lambda a: (base.r(a[0]), e),
        lambda a: (beta(g.inv(a[1]), base.s(a[0])), e),
        lambda a, b: (base.mul(a[0], beta(a[1], b[0])), g.mul(a[1], b[1])),
        lambda a: (beta(g.inv(a[1]), base.inv(a[0])), g.inv(a[1])),
        f"{base.name} x| {g.name}")


def identity_action(group: FiniteGroup, gd: FiniteGroupoid) -> GroupoidAction:
    ident = np.arange(gd.n_arrows)
    return GroupoidAction(group, gd, {t: ident.copy() for t in group.elements()})


def arrow_map_is_isomorphism(src: FiniteGroupoid, dst: FiniteGroupoid,
                             arrow_map) -> bool:
    """Exhaustively check that an explicit arrow bijection is an isomorphism.

    Groupoid isomorphism checking is only ever by a supplied bijection,
    never by search.
    """
    m = np.asarray([arrow_map(x) for x in range(src.n_arrows)], dtype=int)
    if sorted(m.tolist()) != list(range(dst.n_arrows)):
        return False
    if {int(m[u]) for u in src.units} != set(dst.units.tolist()):
        return False
    for x in range(src.n_arrows):
        if dst.r(int(m[x])) != int(m[src.r(x)]) or \
                dst.s(int(m[x])) != int(m[src.s(x)]):
            return False
        if int(m[src.inv(x)]) != dst.inv(int(m[x])):
            return False
    for x, y in src.composable_pairs():
        if int(m[src.mul(x, y)]) != dst.mul(int(m[x]), int(m[y])):
            return False
    return True

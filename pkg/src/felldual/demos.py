"""Built-in example bundles, constructed in-process.

  trivial  — the scalar line bundle over the one-element group (D = 1)
  z2line   — the untwisted line bundle over Z/2 (D = 2, sections = C^2)
  cyclic3  — C^3 with the cyclic-shift Z/3 action, as a semidirect bundle
             (D = 9, sections = C^3 x| Z/3)
  swap     — C^2 with the coordinate-swap Z/2 action (D = 4, sections = M_2)
  pauli    — the Z/2 x Z/2 line bundle twisted by the anticommutation
             cocycle (-1)^(bc) (D = 4, sections = M_2)
"""

from __future__ import annotations

import numpy as np

from .bundles import (
    RealizedFellBundle,
    cocycle_line_bundle,
    semidirect_bundle_from_group_action,
    trivial_cocycle,
)
from .groupoids import FiniteGroup
from .linalg import star_closure


def _diagonal_algebra(n: int):
    basis = []
    for i in range(n):
        m = np.zeros((n, n), dtype=complex)
        m[i, i] = 1.0
        basis.append(m)
    return star_closure(basis)


def _cyclic_shift(n: int) -> np.ndarray:
    p = np.zeros((n, n), dtype=complex)
    for i in range(n):
        p[(i + 1) % n, i] = 1.0
    return p


def trivial_demo() -> RealizedFellBundle:
    g = FiniteGroup.trivial()
    return cocycle_line_bundle(g, trivial_cocycle(g), name="trivial")


def z2line_demo() -> RealizedFellBundle:
    g = FiniteGroup.cyclic(2)
    return cocycle_line_bundle(g, trivial_cocycle(g), name="z2line")


def cyclic3_demo() -> RealizedFellBundle:
    g = FiniteGroup.cyclic(3)
    shift = _cyclic_shift(3)
    u = {0: np.eye(3, dtype=complex), 1: shift, 2: shift @ shift}
    return semidirect_bundle_from_group_action(_diagonal_algebra(3), g, u,
                                               name="cyclic3")


def swap_demo() -> RealizedFellBundle:
    g = FiniteGroup.cyclic(2)
    u = {0: np.eye(2, dtype=complex), 1: _cyclic_shift(2)}
    return semidirect_bundle_from_group_action(_diagonal_algebra(2), g, u,
                                               name="swap")


def pauli_demo() -> RealizedFellBundle:
    g = FiniteGroup.klein_four()
    # elements are (a, b) <-> 2a + b; the cocycle (-1)^(b c) twists the two
    # Z/2 legs against each other, so the section algebra is a full M_2
    return cocycle_line_bundle(
        g, lambda s, t: (-1.0) ** ((s % 2) * (t // 2)), name="pauli")


DEMOS = {
    "trivial": trivial_demo,
    "z2line": z2line_demo,
    "cyclic3": cyclic3_demo,
    "swap": swap_demo,
    "pauli": pauli_demo,
}

EXPECTED_TOTAL_DIM = {
    "trivial": 1,
    "z2line": 2,
    "cyclic3": 9,
    "swap": 4,
    "pauli": 4,
}


def demo_bundle(name: str) -> RealizedFellBundle:
    try:
        return DEMOS[name]()
    except KeyError:
        raise KeyError(f"unknown demo {name!r}; have {sorted(DEMOS)}") from None

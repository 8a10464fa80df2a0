"""Shipped fixture algebras.

The primary fixture is the truncated polynomial vector-field algebra
W_n = span{e_1..e_n} with e_i > e_j = j e_{i+j-1} (terms past e_n drop),
tensored with a one-odd-generator exterior algebra; the distinguished
derivation is the inner one attached to the odd element e_2 t.  Its tower of
higher brackets is nonzero in every arity reachable at desk scale, with hand
checkable low-arity values.  The negative control is sl2 with the zero
differential.  No fixture property is trusted: the exhaustive checks rerun
at load time.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import InternalFaultError
from .graded import AltMap, GradedSpace, SymMap, TensorMap
from .prelie import PreLieAlgebra, check_derivation, check_prelie, inner_derivation

__all__ = [
    "truncated_vector_fields",
    "with_odd_generator",
    "standard_fixture",
    "sl2_dgla",
    "heisenberg_dgla",
    "abelian_two_step_dgla",
]


def truncated_vector_fields(n):
    """W_n: e_i > e_j = j e_{i+j-1}, truncated past e_n; left pre-Lie."""
    space = GradedSpace([("e%d" % i, 0) for i in range(1, n + 1)])
    prod = TensorMap(space, space, 2, 0)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            k = i + j - 1
            if k <= n:
                prod.add_term((i - 1, j - 1), k - 1, j)
    return PreLieAlgebra(space, prod, "left")


def with_odd_generator(L, suffix="t"):
    """Tensor a degree-0 pre-Lie algebra with the exterior algebra on one
    odd generator: (u (x) a) > (v (x) b) = (u > v) (x) (a b), so products of
    two odd elements vanish.  Generator x (x) t is named with the suffix."""
    base = L.space
    if any(d != 0 for d in base.degrees):
        raise InternalFaultError("odd extension expects a degree-0 base")
    gens = [(name, 0) for name, _ in base.generators]
    gens += [(name + suffix, 1) for name, _ in base.generators]
    space = GradedSpace(gens)
    dim = base.dim
    prod = TensorMap(space, space, 2, 0)
    for (i, j), combo in L.product.entries.items():
        for g, c in combo.items():
            prod.add_term((i, j), g, c)            # even * even
            prod.add_term((i, j + dim), g + dim, c)  # even * odd
            prod.add_term((i + dim, j), g + dim, c)  # odd * even
    return PreLieAlgebra(space, prod, L.chirality)


def standard_fixture(n=4, verify=True):
    """The shipped fixture (W_n tensored with the odd line) together with the
    inner derivation attached to e_2 t; re-verifies every axiom on load."""
    L = with_odd_generator(truncated_vector_fields(n))
    d = inner_derivation(L, {L.space.index("e2t"): Fraction(1)})
    if verify:
        rep = check_prelie(L)
        if not rep.passed:
            raise InternalFaultError("fixture fails its pre-Lie check")
        der = check_derivation(L, d)
        if not der.is_bracket_derivation or not der.squares_to_zero:
            raise InternalFaultError("fixture derivation fails its checks")
        if der.is_product_derivation:
            raise InternalFaultError(
                "fixture derivation unexpectedly satisfies the product Leibniz rule")
    return L, d


def sl2_dgla():
    """sl2 in degree zero with the zero differential: (space, d, bracket)."""
    space = GradedSpace([("e", 0), ("f", 0), ("h", 0)])
    br = AltMap(space, space, 2, 0)
    E, F, H = 0, 1, 2
    br.add_term((H, E), E, 2)
    br.add_term((H, F), F, -2)
    br.add_term((E, F), H, 1)
    return space, None, br


def heisenberg_dgla():
    """The Heisenberg algebra [x, y] = z in degree zero, zero differential."""
    space = GradedSpace([("x", 0), ("y", 0), ("z", 0)])
    br = AltMap(space, space, 2, 0)
    br.add_term((0, 1), 2, 1)
    return space, None, br


def abelian_two_step_dgla():
    """Abelian bracket with a nonzero differential a -> b (degrees 0, 1)."""
    space = GradedSpace([("a", 0), ("b", 1), ("c", 0)])
    d = SymMap(space, space, 1, 1)
    d.add_term((0,), 1, 1)
    br = AltMap(space, space, 2, 0)
    return space, d, br

"""Graded pre-Lie algebras, their associated Lie structure, derivations, and
the recursive hierarchy of higher brackets attached to a bracket derivation.

The tower is computed on tensor tuples with the first slot distinguished,
exactly as the recursion is stated; graded symmetry of every coefficient is
then *asserted*, not imposed, so any asymmetry signals a sign bug inside
this package and raises :class:`InternalFaultError`.
"""

from __future__ import annotations

from itertools import product as iter_product

from .errors import InternalFaultError, PreconditionError, StructureError
from .graded import (
    ONE,
    AltMap,
    SymMap,
    TensorMap,
    as_tensor,
    compose_linear,
    vec_add,
    vec_degree,
    vec_scale,
)
from .coalgebra import (
    NONREDUCED,
    REDUCED,
    Coderivation,
    gerstenhaber_bracket,
    nr_bracket,
    sigma,
)
from .linfty import check_linfty, effective_truncation, verify_splitting_witness

__all__ = [
    "PreLieAlgebra",
    "KapranovTower",
    "check_prelie",
    "associated_bracket",
    "nabla",
    "right_to_left",
    "check_derivation",
    "inner_derivation",
    "kapranov",
    "kapranov_recursion",
    "verify_compact_recursion",
    "verify_lie_morphism",
    "kapranov_splitting",
]


class PreLieAlgebra:
    """A graded space with a degree-0 bilinear product of fixed chirality and
    an optional degree-1 differential."""

    def __init__(self, space, product, chirality="left", differential=None):
        if chirality not in ("left", "right"):
            raise StructureError("chirality must be 'left' or 'right'")
        if product.arity != 2 or product.degree != 0 or product.domain != space:
            raise StructureError("the product must be a degree-0 binary map on the carrier")
        if differential is not None and (
                differential.arity != 1 or differential.degree != 1
                or differential.domain != space):
            raise StructureError("the differential must be a degree-1 endomorphism")
        self.space = space
        self.product = product
        self.chirality = chirality
        self.differential = differential

    def triangle(self, x, y):
        """Product of two generators, as a sparse vector."""
        return self.product.evaluate((x, y))

    def triangle_multi(self, xvec, yvec):
        return self.product.evaluate_multi((xvec, yvec))

    def __repr__(self):
        return "<PreLieAlgebra %s dim=%d>" % (self.chirality, self.space.dim)


class PreLieReport:
    def __init__(self, chirality, associator_failures, jacobi_failures):
        self.chirality = chirality
        self.associator_failures = associator_failures
        self.jacobi_failures = jacobi_failures

    @property
    def passed(self):
        return not self.associator_failures and not self.jacobi_failures

    @property
    def internal_fault(self):
        # Jacobi follows from the pre-Lie identity; failing it alone means a
        # sign bug in the derived-bracket computation, not bad input.
        return not self.associator_failures and bool(self.jacobi_failures)

    def as_dict(self, space):
        name = lambda t: [space.name(i) for i in t]
        return {
            "passed": self.passed,
            "chirality": self.chirality,
            "associator_failures": [name(t) for t in self.associator_failures],
            "jacobi_failures": [name(t) for t in self.jacobi_failures],
            "internal_fault": self.internal_fault,
        }


def _associator(L, x, y, z):
    """(x > y) > z - x > (y > z) on generators."""
    first = L.triangle_multi(L.triangle(x, y), {z: ONE})
    second = L.triangle_multi({x: ONE}, L.triangle(y, z))
    vec_add(first, second, -1)
    return first


def check_prelie(L):
    """Exhaustively check the chirality-appropriate graded symmetry of the
    associator on all ordered generator triples, then the Jacobi identity of
    the derived bracket (which must follow automatically)."""
    space = L.space
    assoc_failures = []
    n = space.dim
    for x in range(n):
        for y in range(n):
            for z in range(n):
                a = _associator(L, x, y, z)
                if L.chirality == "left":
                    sign = -1 if space.degree(x) % 2 and space.degree(y) % 2 else 1
                    b = vec_scale(_associator(L, y, x, z), sign)
                else:
                    sign = -1 if space.degree(y) % 2 and space.degree(z) % 2 else 1
                    b = vec_scale(_associator(L, x, z, y), sign)
                if a != b:
                    assoc_failures.append((x, y, z))
    jacobi_failures = []
    bracket = associated_bracket(L, checked=False)
    for x in range(n):
        dx = space.degree(x)
        for y in range(n):
            dy = space.degree(y)
            for z in range(n):
                dz = space.degree(z)
                # graded Jacobi in the form of left-invariance of ad
                acc = bracket.evaluate_multi(({x: ONE}, bracket.evaluate((y, z))))
                term = bracket.evaluate_multi((bracket.evaluate((x, y)), {z: ONE}))
                vec_add(acc, term, -1)
                sign = -1 if dx % 2 and dy % 2 else 1
                term = bracket.evaluate_multi(({y: ONE}, bracket.evaluate((x, z))))
                vec_add(acc, term, -sign)
                if acc:
                    jacobi_failures.append((x, y, z))
    return PreLieReport(L.chirality, assoc_failures, jacobi_failures)


def associated_bracket(L, checked=True):
    """[x, y] = x > y - (-1)^{|x||y|} y > x (for either chirality)."""
    if checked:
        rep = check_prelie(L)
        if rep.associator_failures:
            raise PreconditionError(
                "not a %s pre-Lie algebra; first failing triple %s"
                % (L.chirality, rep.associator_failures[0],))
    space = L.space
    out = AltMap(space, space, 2, 0)
    for x in range(space.dim):
        for y in range(x, space.dim):
            if x == y and space.degree(x) % 2 == 0:
                continue
            val = L.triangle(x, y)
            sign = -1 if space.degree(x) % 2 and space.degree(y) % 2 else 1
            vec_add(val, L.triangle(y, x), -sign)
            out.add_combo((x, y), val)
    return out


def nabla(L, xvec):
    """Left adjoint of a left pre-Lie product: y -> x > y."""
    if L.chirality != "left":
        raise PreconditionError("the left adjoint needs a left pre-Lie product")
    space = L.space
    deg = vec_degree(space, xvec) or 0
    out = SymMap(space, space, 1, deg)
    for j in range(space.dim):
        val = L.triangle_multi(xvec, {j: ONE})
        for g, c in val.items():
            out.add_term((j,), g, c)
    return out


def right_to_left(L):
    """Turn a right pre-Lie product into the left one with the same bracket:
    x > y := (-1)^{|x||y|+1} y < x."""
    if L.chirality != "right":
        raise PreconditionError("input must be a right pre-Lie algebra")
    rep = check_prelie(L)
    if rep.associator_failures:
        raise PreconditionError(
            "not a right pre-Lie algebra; first failing triple %s"
            % (rep.associator_failures[0],))
    space = L.space
    prod = TensorMap(space, space, 2, 0)
    for x in range(space.dim):
        for y in range(space.dim):
            sign = 1 if space.degree(x) % 2 and space.degree(y) % 2 else -1
            val = L.triangle(y, x)
            for g, c in val.items():
                prod.add_term((x, y), g, sign * c)
    return PreLieAlgebra(space, prod, "left", L.differential)


class DerivationReport:
    def __init__(self, bracket_failures, square, product_failures):
        self.bracket_failures = bracket_failures
        self.square = square  # the map d d (SymMap); zero iff d^2 = 0
        self.product_failures = product_failures

    @property
    def is_bracket_derivation(self):
        return not self.bracket_failures

    @property
    def squares_to_zero(self):
        return self.square.is_zero()

    @property
    def is_product_derivation(self):
        return not self.product_failures

    @property
    def passed(self):
        return self.is_bracket_derivation and self.squares_to_zero

    def as_dict(self, space):
        name = lambda t: [space.name(i) for i in t]
        return {
            "bracket_derivation": self.is_bracket_derivation,
            "squares_to_zero": self.squares_to_zero,
            "product_derivation": self.is_product_derivation,
            "bracket_failures": [name(t) for t in self.bracket_failures],
            "product_leibniz_failures": [name(t) for t in self.product_failures],
        }


def leibniz_defect(L, d, x, y):
    """d(x) > y + (-1)^{|d||x|} x > d(y) - d(x > y); the quadratic bracket of
    the tower equals exactly this defect."""
    space = L.space
    out = L.triangle_multi(d.evaluate((x,)), {y: ONE})
    sign = -1 if d.degree % 2 and space.degree(x) % 2 else 1
    vec_add(out, L.triangle_multi({x: ONE}, d.evaluate((y,))), sign)
    vec_add(out, d.evaluate_multi((L.triangle(x, y),)), -1)
    return out


def check_derivation(L, d):
    """Verify d is a derivation of the associated bracket and d^2 = 0, and
    separately report whether it also satisfies the Leibniz rule for the
    product (not required, but it forces the higher brackets to vanish)."""
    space = L.space
    bracket = associated_bracket(L, checked=False)
    bracket_failures = []
    for x in range(space.dim):
        sign = -1 if d.degree % 2 and space.degree(x) % 2 else 1
        for y in range(space.dim):
            lhs = d.evaluate_multi((bracket.evaluate((x, y)),))
            rhs = bracket.evaluate_multi((d.evaluate((x,)), {y: ONE}))
            vec_add(rhs, bracket.evaluate_multi(({x: ONE}, d.evaluate((y,)))), sign)
            if lhs != rhs:
                bracket_failures.append((x, y))
    square = compose_linear(d, d)
    product_failures = []
    for x in range(space.dim):
        for y in range(space.dim):
            if leibniz_defect(L, d, x, y):
                product_failures.append((x, y))
    return DerivationReport(bracket_failures, square, product_failures)


def inner_derivation(L, xvec):
    """ad_x = [x, -] for the associated bracket (a derivation by Jacobi)."""
    space = L.space
    deg = vec_degree(space, xvec) or 0
    bracket = associated_bracket(L, checked=False)
    out = SymMap(space, space, 1, deg)
    for j in range(space.dim):
        val = bracket.evaluate_multi((xvec, {j: ONE}))
        for g, c in val.items():
            out.add_term((j,), g, c)
    return out


# ---------------------------------------------------------------------------
# the tower of higher brackets


class KapranovTower:
    """The hierarchy of graded-symmetric brackets built recursively from a
    bracket derivation on a left pre-Lie algebra; the quadratic coefficient
    is the Leibniz defect of the derivation."""

    def __init__(self, base, derivation, variant, max_arity, taylor):
        self.base = base
        self.derivation = derivation
        self.variant = variant
        self.max_arity = max_arity
        self.taylor = taylor  # {n: SymMap}, taylor[1] = derivation

    @property
    def space(self):
        return self.base.space

    def coefficient(self, n):
        return self.taylor.get(n)

    def coderivation(self):
        """The tower as a reduced coderivation, truncated at its max arity."""
        return Coderivation(self.space, self.derivation.degree, REDUCED, None,
                            {n: m for n, m in self.taylor.items() if not m.is_zero()},
                            self.max_arity)

    def sign_twist(self):
        """The tower with coefficients scaled by (-1)^(n+1) (variant swap)."""
        twisted = {n: (m if n % 2 else m.scaled(-1)) for n, m in self.taylor.items()}
        other = "alternating" if self.variant == "plain" else "plain"
        return KapranovTower(self.base, self.derivation, other,
                             self.max_arity, twisted)

    def __repr__(self):
        return "<KapranovTower %s N=%d arities=%s>" % (
            self.variant, self.max_arity, sorted(self.taylor))


def _assert_graded_symmetric(space, tmap, arity_label):
    """Every tensor tuple must match the Koszul-signed canonical value."""
    n = tmap.arity
    for tup in iter_product(range(space.dim), repeat=n):
        got = tmap.evaluate(tup)
        canon = space.sym_canonical(tup)
        if canon is None:
            if got:
                raise InternalFaultError(
                    "tower coefficient %s is nonzero on the degenerate tuple %s"
                    % (arity_label, tup))
            continue
        mono, sign = canon
        want = vec_scale(tmap.evaluate(mono), sign)
        if got != want:
            raise InternalFaultError(
                "tower coefficient %s is not graded symmetric on %s"
                % (arity_label, tup))


def _symmetrize_storage(space, tmap, degree):
    out = SymMap(space, space, tmap.arity, degree)
    for mono in space.monomials(tmap.arity):
        out.add_combo(mono, tmap.evaluate(mono))
    return out


def kapranov_recursion(L, d, N, alternating=False):
    """Direct asymmetric recursion for the tower coefficients, in tensor
    form: the arity n+1 value on x (x) ys is -(+)[previous, nabla_x](ys),
    with the commutator taken for the insertion product of tensor maps.

    Returns {n: TensorMap}; graded symmetry is asserted for every arity.
    """
    space = L.space
    d_t = as_tensor(d)
    nab = [as_tensor(nabla(L, {x: ONE})) for x in range(space.dim)]
    towers = {1: d_t}
    if N >= 2:
        phi2 = TensorMap(space, space, 2, d.degree)
        for x in range(space.dim):
            bx = gerstenhaber_bracket(d_t, nab[x])
            dx = d.evaluate((x,))
            for y in range(space.dim):
                val = L.triangle_multi(dx, {y: ONE})
                vec_add(val, bx.evaluate((y,)), -1)
                if alternating:
                    val = vec_scale(val, -1)
                for g, c in val.items():
                    phi2.add_term((x, y), g, c)
        towers[2] = phi2
    outer_sign = 1 if alternating else -1
    for n in range(2, N):
        nxt = TensorMap(space, space, n + 1, d.degree)
        for x in range(space.dim):
            bx = gerstenhaber_bracket(towers[n], nab[x])
            for mono, combo in bx.entries.items():
                for g, c in combo.items():
                    nxt.add_term((x,) + mono, g, outer_sign * c)
        towers[n + 1] = nxt
    for n in range(2, N + 1):
        if n in towers:
            _assert_graded_symmetric(space, towers[n], "arity %d" % n)
    return towers


def kapranov(L, d, N, variant="plain"):
    """Build the tower of higher brackets for a bracket derivation.

    Preconditions: the product passes its pre-Lie check (right pre-Lie input
    is converted first) and d is a derivation of the associated bracket;
    d^2 = 0 is *not* required for the tower itself.  The alternating variant
    applies the sign automorphism (-1)^(n+1) coefficient-wise.
    """
    if variant not in ("plain", "alternating"):
        raise StructureError("variant must be 'plain' or 'alternating'")
    if L.chirality == "right":
        L = right_to_left(L)
    rep = check_prelie(L)
    if rep.associator_failures:
        raise PreconditionError(
            "not a left pre-Lie algebra; first failing triple %s"
            % (rep.associator_failures[0],))
    if rep.internal_fault:
        raise InternalFaultError("pre-Lie passes but derived Jacobi fails")
    der = check_derivation(L, d)
    if not der.is_bracket_derivation:
        raise PreconditionError(
            "d is not a derivation of the associated bracket; first failure %s"
            % (der.bracket_failures[0],))
    tensor_tower = kapranov_recursion(L, d, N, alternating=False)
    taylor = {1: d}
    for n in range(2, N + 1):
        m = _symmetrize_storage(L.space, tensor_tower[n], d.degree)
        if not m.is_zero():
            taylor[n] = m
    tower = KapranovTower(L, d, "plain", N, taylor)
    if variant == "alternating":
        tower = tower.sign_twist()
    return tower


class CompactRecursionReport:
    def __init__(self, variant, checked_through, failures):
        self.variant = variant
        self.checked_through = checked_through
        self.failures = failures  # list of generator names

    @property
    def passed(self):
        return not self.failures

    def as_dict(self):
        return {
            "variant": self.variant,
            "checked_through_arity": self.checked_through,
            "passed": self.passed,
            "failures": self.failures,
        }


def verify_compact_recursion(tower, witness_variant=None):
    """Check [Phi, sigma_x +- nabla_x] = sigma_dx +- nabla_dx for every
    generator, coefficient by coefficient (the bracket needs the coefficient
    of one higher arity, so the check runs through max_arity - 1).

    The plus sign belongs to the plain tower, the minus sign to the
    alternating one; `witness_variant` may deliberately mismatch for
    falsification tests.
    """
    L, d = tower.base, tower.derivation
    space = L.space
    variant = witness_variant or tower.variant
    s = 1 if variant == "plain" else -1
    Phi = tower.coderivation().embed()
    through = tower.max_arity - 1
    failures = []
    for x in range(space.dim):
        xdeg = space.degree(x)
        nx = nabla(L, {x: ONE})
        arg = sigma(space, {x: ONE}, degree=xdeg) + Coderivation(
            space, xdeg, NONREDUCED, None, {1: nx.scaled(s)} if not nx.is_zero() else None,
            None)
        lhs = nr_bracket(Phi, arg, up_to=through)
        dx = d.evaluate((x,))
        ndx = nabla(L, dx)
        rhs = sigma(space, dx, degree=xdeg + d.degree) + Coderivation(
            space, xdeg + d.degree, NONREDUCED, None,
            {1: ndx.scaled(s)} if not ndx.is_zero() else None, None)
        if not lhs.agrees_with(rhs, through):
            failures.append(space.name(x))
    return CompactRecursionReport(variant, through, failures)


class LieMorphismReport:
    def __init__(self, checked_through, first_failure):
        self.checked_through = checked_through
        self.first_failure = first_failure

    @property
    def passed(self):
        return self.first_failure is None

    def as_dict(self):
        return {
            "checked_through_arity": self.checked_through,
            "passed": self.passed,
            "first_failure_arity": self.first_failure,
        }


def verify_lie_morphism(L, d1, d2, N):
    """Check [Phi(d1), Phi(d2)] = Phi([d1, d2]) coefficient by coefficient."""
    if L.chirality == "right":
        L = right_to_left(L)
    sign = -1 if d1.degree % 2 and d2.degree % 2 else 1
    d12 = compose_linear(d1, d2) - compose_linear(d2, d1).scaled(sign)
    t1 = kapranov(L, d1, N)
    t2 = kapranov(L, d2, N)
    t12 = kapranov(L, d12, N)
    lhs = nr_bracket(t1.coderivation(), t2.coderivation(), up_to=N)
    rhs = t12.coderivation()
    first = None
    for n in range(1, N + 1):
        a = lhs.coefficient(n)
        b = rhs.coefficient(n)
        az = a is None or a.is_zero()
        bz = b is None or b.is_zero()
        if az != bz or (not az and a.entries != b.entries):
            first = n
            break
    return LieMorphismReport(N, first)


class KapranovSplittingResult:
    def __init__(self, witness, verified_through, failures, square_report):
        self.witness = witness
        self.verified_through = verified_through
        self.failures = failures
        self.square_report = square_report

    @property
    def passed(self):
        return not self.failures and self.square_report.passed

    def as_dict(self, space):
        return {
            "passed": self.passed,
            "verified_through_arity": self.verified_through,
            "failures": self.failures,
            "square_zero": self.square_report.passed,
        }


def splitting_witness(L):
    """The canonical dg right inverse x -> sigma_x + nabla_x, one non-reduced
    coderivation per generator."""
    space = L.space
    out = {}
    for x in range(space.dim):
        nx = nabla(L, {x: ONE})
        out[x] = sigma(space, {x: ONE}, degree=space.degree(x)) + Coderivation(
            space, space.degree(x), NONREDUCED, None,
            {1: nx} if not nx.is_zero() else None, None)
    return out


def kapranov_splitting(L, d, N, tower=None):
    """Verify the canonical witness: ev1(s(x)) = x and [Phi(d), s(x)] = s(dx)
    for every generator; a constructive certificate for the splitting
    property, so the composite homotopy-abelianity check must accept it."""
    if L.chirality == "right":
        L = right_to_left(L)
    der = check_derivation(L, d)
    if not der.squares_to_zero:
        raise PreconditionError("d does not square to zero")
    if tower is None:
        tower = kapranov(L, d, N, variant="plain")
    Q = tower.coderivation()
    square = check_linfty(Q, N)
    if not square.passed:
        raise PreconditionError(
            "tower does not square to zero through arity %d" % N)
    witness = splitting_witness(L)
    through = effective_truncation(Q, N)
    ok, failures = verify_splitting_witness(Q, witness, through)
    notes = ["%s: %s" % (name, reason) for name, reason in failures]
    return KapranovSplittingResult(witness, through, notes, square)

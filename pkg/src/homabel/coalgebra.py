"""Coderivations of symmetric and tensor coalgebras, their products and
brackets, coalgebra morphisms, and the evaluation-at-identity apparatus.

A coderivation of the reduced symmetric coalgebra over V is stored through
its tower of Taylor coefficients ``{arity n >= 1: SymMap}``; the non-reduced
variant adds an arity-0 coefficient, a single vector (the image of 1).  A
tower is either *exact* (``max_arity is None``: unstored coefficients are
exactly zero) or truncated at ``max_arity`` (higher coefficients are unknown
and asking for them raises :class:`TruncationError`).  Products and brackets
propagate the largest output arity that is still exactly determined by the
available input coefficients.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations

from .errors import InversionError, StructureError, TruncationError
from .graded import (
    ONE,
    ZERO,
    GradedSpace,
    SymMap,
    TensorMap,
    koszul_sign,
    subset_sign,
    vec_add,
    vec_degree,
    vec_scale,
)

__all__ = [
    "Coderivation",
    "TensorCoderivation",
    "CoalgebraMorphism",
    "expand",
    "corestrict",
    "nr_product",
    "nr_bracket",
    "sigma",
    "ev1",
    "bracket_with_sigma",
    "coproduct",
    "gerstenhaber_product",
    "gerstenhaber_bracket",
    "identity_morphism",
    "expand_morphism",
    "compose_morphisms",
    "invert_morphism",
    "conjugate",
    "set_partitions",
]

INF = math.inf

REDUCED = "reduced"
NONREDUCED = "nonreduced"


class Coderivation:
    """Arity-indexed tower of graded-symmetric Taylor coefficients.

    ``const`` is the arity-0 coefficient (image of the coalgebra unit),
    permitted only for the non-reduced variant.  ``max_arity=None`` declares
    the tower exact: all unstored coefficients vanish identically.
    """

    __slots__ = ("space", "variant", "degree", "const", "taylor", "max_arity")

    def __init__(self, space, degree, variant=REDUCED, const=None, taylor=None,
                 max_arity=None):
        if variant not in (REDUCED, NONREDUCED):
            raise StructureError("variant must be 'reduced' or 'nonreduced'")
        self.space = space
        self.variant = variant
        self.degree = int(degree)
        self.const = {}
        if const:
            if variant != NONREDUCED:
                raise StructureError(
                    "arity-0 coefficient is only allowed on the non-reduced variant")
            cdeg = vec_degree(space, const)
            if cdeg is not None and cdeg != self.degree:
                raise StructureError(
                    "arity-0 coefficient has degree %d, coderivation has degree %d"
                    % (cdeg, self.degree))
            self.const = {g: Fraction(c) for g, c in const.items() if c}
        self.taylor = {}
        if taylor:
            for n, m in taylor.items():
                if m is None or m.is_zero():
                    continue
                if n < 1:
                    raise StructureError("taylor keys must be >= 1")
                if m.arity != n or m.domain != space or m.codomain != space:
                    raise StructureError("taylor[%d] has wrong arity or carrier" % n)
                if m.degree != self.degree:
                    raise StructureError(
                        "taylor[%d] has degree %d, coderivation has degree %d"
                        % (n, m.degree, self.degree))
                self.taylor[n] = m
        self.max_arity = None if max_arity is None else int(max_arity)
        if self.max_arity is not None:
            for n in self.taylor:
                if n > self.max_arity:
                    raise StructureError(
                        "taylor[%d] stored beyond declared max_arity %d"
                        % (n, self.max_arity))

    # -- bookkeeping ---------------------------------------------------------
    @property
    def exact(self):
        return self.max_arity is None

    def known_through(self):
        return INF if self.max_arity is None else self.max_arity

    def top_arity(self):
        """Largest arity carrying a nonzero coefficient (0 = const only, -1 = zero)."""
        if self.taylor:
            return max(self.taylor)
        return 0 if self.const else -1

    def coefficient(self, n):
        """Taylor coefficient of arity n >= 1; None means exactly zero."""
        m = self.taylor.get(n)
        if m is not None:
            return m
        if self.max_arity is not None and n > self.max_arity:
            raise TruncationError(
                "coefficient of arity %d requested, tower certified through %d"
                % (n, self.max_arity))
        return None

    def is_zero(self):
        return not self.const and not self.taylor

    def embed(self):
        """Embedding of a reduced coderivation into the non-reduced ones."""
        if self.variant == NONREDUCED:
            return self
        return Coderivation(self.space, self.degree, NONREDUCED, None,
                            self.taylor, self.max_arity)

    def restricted(self, up_to):
        """The same tower truncated at `up_to` (certification shrinks with it)."""
        kept = {n: m for n, m in self.taylor.items() if n <= up_to}
        cap = up_to if self.max_arity is None else min(self.max_arity, up_to)
        return Coderivation(self.space, self.degree, self.variant, self.const,
                            kept, cap)

    # -- linear structure ------------------------------------------------------
    def scaled(self, coeff):
        coeff = Fraction(coeff)
        return Coderivation(
            self.space, self.degree, self.variant,
            vec_scale(self.const, coeff),
            {n: m.scaled(coeff) for n, m in self.taylor.items()},
            self.max_arity)

    def __add__(self, other):
        if (self.space != other.space or self.variant != other.variant
                or self.degree != other.degree):
            raise StructureError("coderivations not addable")
        const = dict(self.const)
        vec_add(const, other.const)
        taylor = {}
        cap = min(self.known_through(), other.known_through())
        for n in set(self.taylor) | set(other.taylor):
            if n > cap:
                continue
            a, b = self.taylor.get(n), other.taylor.get(n)
            m = a + b if a is not None and b is not None else (a or b).copy()
            if not m.is_zero():
                taylor[n] = m
        return Coderivation(self.space, self.degree, self.variant, const,
                            taylor, None if math.isinf(cap) else int(cap))

    def __sub__(self, other):
        return self + other.scaled(-1)

    def agrees_with(self, other, through):
        """Coefficient-by-coefficient equality for all arities <= through."""
        if self.space != other.space:
            return False
        for n in range(0, int(through) + 1):
            if n == 0:
                a = self.const if self.variant == NONREDUCED else {}
                b = other.const if other.variant == NONREDUCED else {}
                if {g: c for g, c in a.items() if c} != {g: c for g, c in b.items() if c}:
                    return False
                continue
            a, b = self.coefficient(n), other.coefficient(n)
            if a is None and b is None:
                continue
            if a is None:
                if not b.is_zero():
                    return False
            elif b is None:
                if not a.is_zero():
                    return False
            elif a.entries != b.entries:
                return False
        return True

    def __repr__(self):
        arities = sorted(self.taylor)
        return "<Coderivation %s deg=%d arities=%s%s max=%s>" % (
            self.variant, self.degree, arities,
            " const" if self.const else "", self.max_arity)


def _zero_coderivation(space, degree, variant, exactly=True, max_arity=None):
    return Coderivation(space, degree, variant, None, None,
                        None if exactly else max_arity)


# ---------------------------------------------------------------------------
# expansion (inverse of corestriction) and the coproduct


def expand(Q, mono):
    """Action of the coderivation on a symmetric monomial, as an element of
    the (non-)reduced symmetric coalgebra: {monomial: coefficient}.

    Implements the unshuffle sum
    Q(v_1...v_n) = sum_i sum_{S(i,n-i)} eps(sigma) q_i(front) (.) rest,
    with the arity-0 coefficient contributing q_0(1) (.) v_1 ... v_n.
    """
    space = Q.space
    mono = tuple(mono)
    if not mono and Q.variant == REDUCED:
        raise StructureError("the unit is not part of the reduced coalgebra")
    canon = space.sym_canonical(mono)
    if canon is None:
        return {}
    mono, presign = canon
    n = len(mono)
    degs = [space.degree(i) for i in mono]
    out = {}

    def emit(front_vec, rest, sign):
        for g, c in front_vec.items():
            res = space.sym_canonical((g,) + rest)
            if res is None:
                continue
            m2, s2 = res
            v = out.get(m2, ZERO) + sign * s2 * c
            if v:
                out[m2] = v
            else:
                out.pop(m2, None)

    if Q.variant == NONREDUCED and Q.const:
        emit(Q.const, mono, presign)
    for i in range(1, n + 1):
        qi = Q.coefficient(i)
        if qi is None or qi.is_zero():
            continue
        for positions in combinations(range(n), i):
            sub = tuple(mono[p] for p in positions)
            inner = qi.evaluate(sub)
            if not inner:
                continue
            chosen = set(positions)
            rest = tuple(mono[p] for p in range(n) if p not in chosen)
            emit(inner, rest, presign * subset_sign(degs, positions))
    return out


def corestrict(space, degree, variant, action, max_arity):
    """Recover the Taylor tower of a coderivation from its expanded action.

    `action` maps canonical symmetric monomials (and () for the non-reduced
    variant) to coalgebra elements; only the length-1 components survive.
    """
    const = None
    if variant == NONREDUCED:
        const = {m[0]: c for m, c in action(()).items() if len(m) == 1 and c}
    taylor = {}
    for n in range(1, max_arity + 1):
        m = SymMap(space, space, n, degree)
        for mono in space.monomials(n):
            for out_mono, c in action(mono).items():
                if len(out_mono) == 1 and c:
                    m.add_term(mono, out_mono[0], c)
        if not m.is_zero():
            taylor[n] = m
    return Coderivation(space, degree, variant, const, taylor, max_arity)


def coproduct(space, mono, variant=REDUCED):
    """Symmetric deconcatenation coproduct of a monomial.

    Returns {(left monomial, right monomial): sign}; the reduced variant
    keeps both factors nonempty, the non-reduced one includes the unit.
    """
    mono = tuple(mono)
    n = len(mono)
    degs = [space.degree(i) for i in mono]
    lo, hi = (1, n - 1) if variant == REDUCED else (0, n)
    out = {}
    for i in range(lo, hi + 1):
        for positions in combinations(range(n), i):
            chosen = set(positions)
            left = tuple(mono[p] for p in positions)
            right = tuple(mono[p] for p in range(n) if p not in chosen)
            sign = subset_sign(degs, positions)
            key = (left, right)
            v = out.get(key, 0) + sign
            if v:
                out[key] = v
            else:
                out.pop(key, None)
    return out


# ---------------------------------------------------------------------------
# Nijenhuis-Richardson product and bracket


def _product_cap(Q, R, up_to=None):
    cap = min(R.known_through(),
              Q.known_through() - (1 if R.const else 0))
    if up_to is not None:
        cap = min(cap, up_to)
    return cap


def nr_product(Q, R, up_to=None):
    """Right pre-Lie product Q bullet R whose commutator is the coderivation
    bracket; the arity-n coefficient is the unshuffle sum
    sum_i sum_sigma eps q_{n-i+1}(r_i(front) (.) rest).
    """
    if Q.space != R.space:
        raise StructureError("coderivations live on different carriers")
    if Q.variant != R.variant:
        raise StructureError("coderivations have different variants")
    space = Q.space
    degree = Q.degree + R.degree
    cap = _product_cap(Q, R, up_to)
    exact = math.isinf(cap)
    if Q.is_zero() or R.is_zero():
        return _zero_coderivation(space, degree, Q.variant, exactly=exact,
                                  max_arity=None if exact else int(cap))
    if exact:
        top = Q.top_arity() + max(R.top_arity(), 0) - 1
        cap = max(top, 0)
    cap = int(cap)

    const = None
    if Q.variant == NONREDUCED:
        const = {}
        if R.const:
            q1 = Q.coefficient(1)
            if q1 is not None:
                for g, c in R.const.items():
                    vec_add(const, q1.evaluate((g,)), c)

    taylor = {}
    for n in range(1, cap + 1):
        coeff = _nr_coefficient(Q, R, n)
        if coeff is not None and not coeff.is_zero():
            taylor[n] = coeff
    return Coderivation(space, degree, Q.variant, const, taylor,
                        None if exact else cap)


def _nr_coefficient(Q, R, n):
    space = Q.space
    out = SymMap(space, space, n, Q.degree + R.degree)
    q_maps = {}
    for i in range(0, n + 1):
        if i == 0:
            if not R.const:
                continue
        else:
            ri = R.coefficient(i)
            if ri is None or ri.is_zero():
                continue
        q_maps[i] = Q.coefficient(n - i + 1)
    if not any(m is not None for m in q_maps.values()):
        return None
    for mono in space.monomials(n):
        degs = [space.degree(g) for g in mono]
        acc = {}
        for i, qmap in q_maps.items():
            if qmap is None:
                continue
            if i == 0:
                for g, c in R.const.items():
                    vec_add(acc, qmap.evaluate((g,) + mono), c)
                continue
            ri = R.coefficient(i)
            for positions in combinations(range(n), i):
                sub = tuple(mono[p] for p in positions)
                inner = ri.evaluate(sub)
                if not inner:
                    continue
                chosen = set(positions)
                rest = tuple(mono[p] for p in range(n) if p not in chosen)
                sign = subset_sign(degs, positions)
                for g, c in inner.items():
                    vec_add(acc, qmap.evaluate((g,) + rest), sign * c)
        for g, c in acc.items():
            out.add_term(mono, g, c)
    return out


def nr_bracket(Q, R, up_to=None):
    """Graded commutator [Q, R] = Q bullet R - (-1)^{|Q||R|} R bullet Q."""
    sign = -1 if (Q.degree % 2) and (R.degree % 2) else 1
    a = nr_product(Q, R, up_to)
    b = nr_product(R, Q, up_to)
    return a - b.scaled(sign)


# ---------------------------------------------------------------------------
# the exact sequence 0 -> Coder(S~V) -> Coder(SV) -> V -> 0


def sigma(space, vec, degree=None):
    """The non-reduced coderivation with lone Taylor coefficient 1 -> v."""
    vec = {g: Fraction(c) for g, c in vec.items() if c}
    deg = vec_degree(space, vec)
    if deg is None:
        deg = 0 if degree is None else degree
    return Coderivation(space, deg, NONREDUCED, vec, None, None)


def ev1(Q):
    """Evaluation at the coalgebra unit: Q |-> Q(1) = q_0(1)."""
    if Q.variant != NONREDUCED:
        raise StructureError("evaluation at the identity needs the non-reduced variant")
    return dict(Q.const)


def bracket_with_sigma(Q, vec):
    """[Q, sigma_v], computed directly: the arity-n coefficient is
    q_{n+1}(v (.) -) and the arity-0 one is q_1(v).

    Also asserts sigma_v bullet Q = 0, which holds identically.
    """
    Q = Q.embed()
    space = Q.space
    vec = {g: Fraction(c) for g, c in vec.items() if c}
    vdeg = vec_degree(space, vec)
    if vdeg is None:
        return _zero_coderivation(space, Q.degree, NONREDUCED)
    sv = sigma(space, vec)
    left_zero = nr_product(sv, Q)
    if not left_zero.is_zero():
        raise StructureError("sigma_v bullet Q must vanish identically")

    const = {}
    q1 = Q.coefficient(1)
    if q1 is not None:
        for g, c in vec.items():
            vec_add(const, q1.evaluate((g,)), c)
    cap = Q.known_through() - 1
    exact = math.isinf(cap)
    top = max(Q.top_arity() - 1, 0)
    limit = top if exact else int(cap)
    taylor = {}
    for n in range(1, limit + 1):
        qn1 = Q.coefficient(n + 1)
        if qn1 is None or qn1.is_zero():
            continue
        m = SymMap(space, space, n, Q.degree + vdeg)
        for mono in space.monomials(n):
            acc = {}
            for g, c in vec.items():
                vec_add(acc, qn1.evaluate((g,) + mono), c)
            for g, c in acc.items():
                m.add_term(mono, g, c)
        if not m.is_zero():
            taylor[n] = m
    return Coderivation(space, Q.degree + vdeg, NONREDUCED, const, taylor,
                        None if exact else int(cap))


# ---------------------------------------------------------------------------
# Gerstenhaber product on the tensor coalgebra


def gerstenhaber_product(f, g):
    """f o g on Hom(V tensor powers, V): insert g into every slot of f with
    the Koszul sign (-1)^{|g| (deg of the arguments left of the slot)}."""
    if f.domain != g.domain or f.codomain != g.codomain or f.domain != f.codomain:
        raise StructureError("tensor maps live on different carriers")
    space = f.domain
    out = TensorMap(space, space, f.arity + g.arity - 1, f.degree + g.degree)
    g_is_odd = g.degree % 2
    for fm, fcombo in f.entries.items():
        for k in range(f.arity):
            slot = fm[k]
            left_odd = sum(space.degree(t) % 2 for t in fm[:k])
            sign = -1 if (g_is_odd and left_odd % 2) else 1
            for gm, gcombo in g.entries.items():
                gc = gcombo.get(slot)
                if not gc:
                    continue
                t = fm[:k] + gm + fm[k + 1:]
                for og, fc in fcombo.items():
                    out.add_term(t, og, sign * gc * fc)
    return out


def gerstenhaber_bracket(f, g):
    sign = -1 if (f.degree % 2) and (g.degree % 2) else 1
    a = gerstenhaber_product(f, g)
    b = gerstenhaber_product(g, f)
    return a - b.scaled(sign)


class TensorCoderivation:
    """Tower of tensor-map Taylor coefficients of a coderivation of the
    reduced tensor coalgebra."""

    __slots__ = ("space", "degree", "taylor", "max_arity")

    def __init__(self, space, degree, taylor=None, max_arity=None):
        self.space = space
        self.degree = int(degree)
        self.taylor = {}
        if taylor:
            for n, m in taylor.items():
                if m is None or m.is_zero():
                    continue
                if m.arity != n or m.degree != self.degree or m.domain != space:
                    raise StructureError("tensor taylor[%d] malformed" % n)
                self.taylor[n] = m
        self.max_arity = None if max_arity is None else int(max_arity)

    def known_through(self):
        return INF if self.max_arity is None else self.max_arity

    def coefficient(self, n):
        m = self.taylor.get(n)
        if m is not None:
            return m
        if self.max_arity is not None and n > self.max_arity:
            raise TruncationError(
                "tensor coefficient of arity %d beyond certification %d"
                % (n, self.max_arity))
        return None

    def product(self, other, up_to=None):
        """Coefficient tower of the Gerstenhaber product: the arity-n output
        collects f_i o g_j over i + j - 1 = n."""
        if self.space != other.space:
            raise StructureError("tensor coderivations on different carriers")
        cap = min(self.known_through(), other.known_through())
        if up_to is not None:
            cap = min(cap, up_to)
        exact = math.isinf(cap)
        if exact:
            tops = [max(self.taylor, default=0), max(other.taylor, default=0)]
            cap = max(tops[0] + tops[1] - 1, 0)
        taylor = {}
        for n in range(1, int(cap) + 1):
            acc = None
            for i in range(1, n + 1):
                j = n + 1 - i
                fi, gj = self.taylor.get(i), other.taylor.get(j)
                if fi is None or gj is None:
                    continue
                term = gerstenhaber_product(fi, gj)
                acc = term if acc is None else acc + term
            if acc is not None and not acc.is_zero():
                taylor[n] = acc
        return TensorCoderivation(self.space, self.degree + other.degree,
                                  taylor, None if exact else int(cap))

    def bracket(self, other, up_to=None):
        sign = -1 if (self.degree % 2) and (other.degree % 2) else 1
        a = self.product(other, up_to)
        b = other.product(self, up_to)
        taylor = dict(a.taylor)
        cap = min(a.known_through(), b.known_through())
        for n, m in b.taylor.items():
            cur = taylor.get(n)
            m = m.scaled(-sign)
            taylor[n] = cur + m if cur is not None else m
        taylor = {n: m for n, m in taylor.items()
                  if not m.is_zero() and n <= cap}
        return TensorCoderivation(self.space, a.degree, taylor,
                                  None if math.isinf(cap) else int(cap))


# ---------------------------------------------------------------------------
# coalgebra morphisms


class CoalgebraMorphism:
    """Degree-0 morphism of reduced symmetric coalgebras via Taylor
    coefficients {n >= 1: SymMap source^(.)n -> target}; extended to the
    non-reduced coalgebras by fixing the unit."""

    __slots__ = ("source", "target", "taylor", "max_arity")

    def __init__(self, source, target, taylor, max_arity=None):
        self.source = source
        self.target = target
        self.taylor = {}
        for n, m in (taylor or {}).items():
            if m is None or m.is_zero():
                continue
            if m.arity != n or m.domain != source or m.codomain != target:
                raise StructureError("morphism taylor[%d] malformed" % n)
            if m.degree != 0:
                raise StructureError("morphism coefficients must have degree 0")
            self.taylor[n] = m
        self.max_arity = None if max_arity is None else int(max_arity)

    @property
    def exact(self):
        return self.max_arity is None

    def known_through(self):
        return INF if self.max_arity is None else self.max_arity

    def top_arity(self):
        return max(self.taylor, default=0)

    def coefficient(self, n):
        m = self.taylor.get(n)
        if m is not None:
            return m
        if self.max_arity is not None and n > self.max_arity:
            raise TruncationError(
                "morphism coefficient of arity %d beyond certification %d"
                % (n, self.max_arity))
        return None

    def is_linear(self):
        return all(n == 1 for n in self.taylor)

    def __repr__(self):
        return "<CoalgebraMorphism arities=%s max=%s>" % (
            sorted(self.taylor), self.max_arity)


def identity_morphism(space):
    m = SymMap(space, space, 1, 0)
    for i in range(space.dim):
        m.add_term((i,), i, ONE)
    return CoalgebraMorphism(space, space, {1: m}, None)


def set_partitions(items, min_blocks=1):
    """All partitions of `items` into unordered nonempty blocks.

    Blocks keep the input order internally and are listed by first element,
    so the output is canonical and deterministic.
    """
    items = list(items)
    results = []

    def rec(k, blocks):
        if k == len(items):
            if len(blocks) >= min_blocks:
                results.append(tuple(tuple(b) for b in blocks))
            return
        x = items[k]
        for b in blocks:
            b.append(x)
            rec(k + 1, blocks)
            b.pop()
        blocks.append([x])
        rec(k + 1, blocks)
        blocks.pop()

    rec(0, [])
    return results


def expand_morphism(F, mono, min_blocks=1):
    """Action of the morphism on a symmetric monomial:
    F(m) = sum over set partitions of eps * f(block 1) (.) ... (.) f(block k).

    All coefficients have degree zero, so the only signs are the Koszul signs
    of sorting the factors into block order.  F(1) = 1.
    """
    space = F.source
    target = F.target
    mono = tuple(mono)
    if not mono:
        return {(): ONE}
    canon = space.sym_canonical(mono)
    if canon is None:
        return {}
    mono, presign = canon
    degs = [space.degree(i) for i in mono]
    out = {}
    for partition in set_partitions(range(len(mono)), min_blocks):
        flat = tuple(p for block in partition for p in block)
        sign = presign * koszul_sign(flat, degs)
        block_vals = []
        ok = True
        for block in partition:
            f = F.coefficient(len(block))
            if f is None:
                ok = False
                break
            val = f.evaluate(tuple(mono[p] for p in block))
            if not val:
                ok = False
                break
            block_vals.append(val)
        if not ok:
            continue

        def spread(idx, gens, coeff):
            if idx == len(block_vals):
                res = target.sym_canonical(tuple(gens))
                if res is None:
                    return
                m2, s2 = res
                v = out.get(m2, ZERO) + sign * s2 * coeff
                if v:
                    out[m2] = v
                else:
                    out.pop(m2, None)
                return
            for g, c in block_vals[idx].items():
                gens.append(g)
                spread(idx + 1, gens, coeff * c)
                gens.pop()

        spread(0, [], ONE)
    return out


def compose_morphisms(F, G, up_to=None):
    """Composite F after G, computed arity by arity through corestriction."""
    if F.source != G.target:
        raise StructureError("morphisms not composable")
    cap = min(F.known_through(), G.known_through())
    if up_to is not None:
        cap = min(cap, up_to)
    exact = math.isinf(cap)
    if exact:
        cap = max(F.top_arity() * G.top_arity(), 1)
    taylor = {}
    for n in range(1, int(cap) + 1):
        m = SymMap(G.source, F.target, n, 0)
        for mono in G.source.monomials(n):
            acc = {}
            for comp, c in expand_morphism(G, mono).items():
                f = F.coefficient(len(comp))
                if f is None:
                    continue
                vec_add(acc, f.evaluate(comp), c)
            for g, c in acc.items():
                m.add_term(mono, g, c)
        if not m.is_zero():
            taylor[n] = m
    return CoalgebraMorphism(G.source, F.target, taylor,
                             None if exact else int(cap))


def _invert_linear(f1, source, target):
    """Inverse of an invertible degree-0 linear Taylor coefficient."""
    if source.dim != target.dim:
        raise InversionError("linear coefficient cannot be invertible: dimensions differ")
    n = source.dim
    # dense Gauss-Jordan on the n x n matrix over the rationals
    mat = [[ZERO] * n for _ in range(n)]
    for (i,), combo in f1.entries.items():
        for g, c in combo.items():
            mat[g][i] = c
    aug = [[mat[r][c] for c in range(n)] + [ONE if r == c else ZERO for c in range(n)]
           for r in range(n)]
    row = 0
    for col in range(n):
        piv = next((r for r in range(row, n) if aug[r][col]), None)
        if piv is None:
            raise InversionError("linear Taylor coefficient is not invertible")
        aug[row], aug[piv] = aug[piv], aug[row]
        p = aug[row][col]
        aug[row] = [x / p for x in aug[row]]
        for r in range(n):
            if r != row and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[row])]
        row += 1
    inv = SymMap(target, source, 1, 0)
    for i in range(n):
        for g in range(n):
            c = aug[g][n + i]
            if c:
                inv.add_term((i,), g, c)
    return inv


def invert_morphism(F, up_to):
    """Inverse coalgebra morphism, solved arity by arity: the arity-n
    coefficient is -f_1^{-1} applied to all multi-block contributions."""
    g1 = _invert_linear(F.coefficient(1) or SymMap(F.source, F.target, 1, 0),
                        F.source, F.target)
    taylor = {1: g1}
    if F.known_through() < up_to:
        raise TruncationError(
            "inverting through arity %d needs the morphism through arity %d"
            % (up_to, up_to))
    partial = CoalgebraMorphism(F.target, F.source, dict(taylor), 1)
    for m in range(2, up_to + 1):
        gm = SymMap(F.target, F.source, m, 0)
        for mono in F.target.monomials(m):
            acc = {}
            for comp, c in expand_morphism(partial, mono, min_blocks=2).items():
                f = F.coefficient(len(comp))
                if f is None:
                    continue
                vec_add(acc, f.evaluate(comp), c)
            val = g1.evaluate_multi((acc,))
            for g, c in val.items():
                gm.add_term(mono, g, -c)
        if not gm.is_zero():
            taylor[m] = gm
        partial = CoalgebraMorphism(F.target, F.source, dict(taylor), m)
    exact = F.exact and F.top_arity() <= 1
    return CoalgebraMorphism(F.target, F.source, taylor,
                             None if exact else up_to)


def conjugate(F, R, up_to=None):
    """F^{-1} R F as a coderivation; conjugation preserves the bracket.

    F must be an automorphism of the carrier of R; the non-reduced variant
    uses the extension F(1) = 1.
    """
    if F.source != F.target or F.source != R.space:
        raise StructureError("conjugation needs an automorphism of the carrier")
    cap = min(R.known_through(),
              F.known_through() if F.exact else F.known_through() - 1)
    if up_to is not None:
        cap = min(cap, up_to)
    if math.isinf(cap):
        raise ValueError("conjugate needs an explicit up_to for exact towers")
    cap = int(cap)
    finv = invert_morphism(F, cap + 1)

    def corestricted(element):
        acc = {}
        for comp, c in element.items():
            f = finv.coefficient(len(comp))
            if f is None:
                continue
            vec_add(acc, f.evaluate(comp), c)
        return acc

    const = None
    if R.variant == NONREDUCED:
        const = corestricted(expand(R, ()))
    taylor = {}
    for n in range(1, cap + 1):
        m = SymMap(R.space, R.space, n, R.degree)
        for mono in R.space.monomials(n):
            through_f = expand_morphism(F, mono)
            acted = {}
            for comp, c in through_f.items():
                for out_mono, c2 in expand(R, comp).items():
                    v = acted.get(out_mono, ZERO) + c * c2
                    if v:
                        acted[out_mono] = v
                    else:
                        acted.pop(out_mono, None)
            for g, c in corestricted(acted).items():
                m.add_term(mono, g, c)
        if not m.is_zero():
            taylor[n] = m
    return Coderivation(R.space, R.degree, R.variant, const, taylor, cap)

"""Graded spaces, Koszul signs, and sparse graded multilinear maps.

All scalars are exact rationals (`fractions.Fraction`); nothing in this
package ever rounds.  A vector is a sparse dict ``{generator index: Fraction}``
with zero coefficients pruned.  Monomials are tuples of generator indices:
non-decreasing for the symmetric and alternating kinds, arbitrary for the
tensor kind.  In characteristic zero a symmetric monomial with a repeated odd
generator vanishes, as does an alternating monomial with a repeated even one.

Sign convention: ``koszul_sign(sigma, degrees)`` is the sign making

    v_1 (.) ... (.) v_n  =  sign * v_{sigma(1)} (.) ... (.) v_{sigma(n)}

for homogeneous elements of the listed degrees, computed over inversion
pairs.  Permutations are 0-based tuples: entry ``i`` of the permuted tuple is
element ``sigma[i]`` of the original one.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, combinations_with_replacement

from .errors import StructureError

__all__ = [
    "Fraction",
    "GradedSpace",
    "SymMap",
    "TensorMap",
    "AltMap",
    "koszul_sign",
    "perm_sign",
    "unshuffles",
    "subset_sign",
    "decalage",
    "vec_add",
    "vec_scale",
    "vec_degree",
    "vec_eq",
]

ZERO = Fraction(0)
ONE = Fraction(1)


def _sign_pow(exponent):
    """(-1)**exponent with plain-int parity (safe for negative degrees)."""
    return -1 if exponent % 2 else 1


# ---------------------------------------------------------------------------
# permutation combinatorics


def koszul_sign(sigma, degrees):
    """Koszul sign of a permutation acting on elements of the given degrees.

    Product over inversion pairs of (-1)^(product of the two transposed
    degrees); agrees with accumulating one Koszul factor per adjacent
    transposition.
    """
    n = len(sigma)
    if len(degrees) != n:
        raise ValueError("permutation and degree list have different lengths")
    if sorted(sigma) != list(range(n)):
        raise ValueError("sigma is not a permutation of 0..n-1")
    sign = 1
    for k in range(n):
        sk = sigma[k]
        for l in range(k + 1, n):
            sl = sigma[l]
            if sk > sl and degrees[sk] % 2 and degrees[sl] % 2:
                sign = -sign
    return sign


def perm_sign(sigma):
    """Ordinary signature of a 0-based permutation tuple."""
    sign = 1
    for k in range(len(sigma)):
        for l in range(k + 1, len(sigma)):
            if sigma[k] > sigma[l]:
                sign = -sign
    return sign


def unshuffles(p, q):
    """All (p,q)-unshuffles of {0,...,p+q-1} in lexicographic order.

    An unshuffle is a permutation increasing on the first p and the last q
    positions; there are binomial(p+q, p) of them.
    """
    if p < 0 or q < 0:
        raise ValueError("unshuffle block sizes must be non-negative")
    n = p + q
    rng = range(n)
    out = []
    for front in combinations(rng, p):
        chosen = set(front)
        back = tuple(i for i in rng if i not in chosen)
        out.append(front + back)
    return out


def subset_sign(degrees, positions):
    """Koszul sign extracting the listed positions of a monomial to the front.

    `positions` must be strictly increasing; the complement keeps its order.
    Equals koszul_sign of the corresponding unshuffle.
    """
    sign = 1
    prev_end = 0
    skipped_odd = 0
    for pos in positions:
        for t in range(prev_end, pos):
            if degrees[t] % 2:
                skipped_odd += 1
        if degrees[pos] % 2 and skipped_odd % 2:
            sign = -sign
        prev_end = pos + 1
    return sign


# ---------------------------------------------------------------------------
# vectors (sparse linear combinations of generators)


def vec_add(dst, src, coeff=ONE):
    """dst += coeff * src, in place; returns dst with zeros pruned."""
    if not coeff:
        return dst
    for g, c in src.items():
        v = dst.get(g, ZERO) + coeff * c
        if v:
            dst[g] = v
        else:
            dst.pop(g, None)
    return dst


def vec_scale(vec, coeff):
    if not coeff:
        return {}
    return {g: coeff * c for g, c in vec.items()}


def vec_eq(a, b):
    return {g: c for g, c in a.items() if c} == {g: c for g, c in b.items() if c}


def vec_degree(space, vec):
    """Degree of a homogeneous vector; None when zero; error when mixed."""
    degs = {space.degree(g) for g in vec}
    if not degs:
        return None
    if len(degs) > 1:
        raise StructureError("vector is not homogeneous: degrees %s" % sorted(degs))
    return degs.pop()


# ---------------------------------------------------------------------------
# graded spaces


class GradedSpace:
    """A finite ordered list of named generators with integer degrees.

    The list order fixes the canonical basis order used everywhere for sign
    normalization.  Instances are immutable value objects.
    """

    __slots__ = ("generators", "_index", "_degrees", "_mono_cache", "_hash")

    def __init__(self, generators):
        gens = tuple((str(name), int(deg)) for name, deg in generators)
        names = [name for name, _ in gens]
        if len(set(names)) != len(names):
            raise StructureError("generator names must be unique")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "_index", {name: i for i, (name, _) in enumerate(gens)})
        object.__setattr__(self, "_degrees", tuple(deg for _, deg in gens))
        object.__setattr__(self, "_mono_cache", {})
        object.__setattr__(self, "_hash", hash(gens))

    def __setattr__(self, name, value):
        raise AttributeError("GradedSpace is immutable")

    def __eq__(self, other):
        return isinstance(other, GradedSpace) and self.generators == other.generators

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "GradedSpace(%r)" % (list(self.generators),)

    @property
    def dim(self):
        return len(self.generators)

    def degree(self, i):
        return self._degrees[i]

    @property
    def degrees(self):
        return self._degrees

    def name(self, i):
        return self.generators[i][0]

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise StructureError("unknown generator %r" % (name,)) from None

    def basis_vector(self, i):
        return {i: ONE}

    def vector(self, combo):
        """Vector from a {name: coefficient} mapping."""
        out = {}
        for name, c in combo.items():
            c = Fraction(c)
            if c:
                out[self.index(name)] = c
        return out

    def shift(self, k=1):
        """Suspension: generator of degree g here has degree g - k in the shift."""
        return GradedSpace((name, deg - k) for name, deg in self.generators)

    def mono_degree(self, mono):
        return sum(self._degrees[i] for i in mono)

    def monomials(self, n, kind="symmetric"):
        """All canonical monomials of length n, in lexicographic order."""
        key = (n, kind)
        cached = self._mono_cache.get(key)
        if cached is not None:
            return cached
        out = []
        if kind == "tensor":
            def rec(prefix):
                if len(prefix) == n:
                    out.append(tuple(prefix))
                    return
                for i in range(self.dim):
                    rec(prefix + [i])
            rec([])
        else:
            forbid_parity = 1 if kind == "symmetric" else 0
            for combo in combinations_with_replacement(range(self.dim), n):
                ok = True
                for a, b in zip(combo, combo[1:]):
                    if a == b and self._degrees[a] % 2 == forbid_parity:
                        ok = False
                        break
                if ok:
                    out.append(combo)
        out = tuple(out)
        self._mono_cache[key] = out
        return out

    def sym_canonical(self, mono):
        """Sort a tuple into canonical symmetric order.

        Returns (canonical, sign) or None when the monomial vanishes because
        an odd generator repeats.
        """
        lst = list(mono)
        degs = self._degrees
        sign = 1
        for i in range(1, len(lst)):
            j = i
            while j > 0 and lst[j - 1] > lst[j]:
                a, b = lst[j - 1], lst[j]
                if degs[a] % 2 and degs[b] % 2:
                    sign = -sign
                lst[j - 1], lst[j] = b, a
                j -= 1
        for a, b in zip(lst, lst[1:]):
            if a == b and degs[a] % 2:
                return None
        return tuple(lst), sign

    def alt_canonical(self, mono):
        """Canonical form for alternating monomials: repeated even vanishes."""
        lst = list(mono)
        degs = self._degrees
        sign = 1
        for i in range(1, len(lst)):
            j = i
            while j > 0 and lst[j - 1] > lst[j]:
                a, b = lst[j - 1], lst[j]
                # x ^ y = -(-1)^{|x||y|} y ^ x
                if not (degs[a] % 2 and degs[b] % 2):
                    sign = -sign
                lst[j - 1], lst[j] = b, a
                j -= 1
        for a, b in zip(lst, lst[1:]):
            if a == b and degs[a] % 2 == 0:
                return None
        return tuple(lst), sign


# ---------------------------------------------------------------------------
# sparse multilinear maps


class _MultiMap:
    """Shared implementation of sparse arity-n maps domain^(x)n -> codomain.

    Entries live on canonical monomials only; `evaluate` normalizes its input
    tuple and applies the appropriate sign rule.  Every stored output term is
    checked to be degree-homogeneous with the declared map degree.
    """

    kind = None  # overridden

    __slots__ = ("domain", "codomain", "arity", "degree", "entries")

    def __init__(self, domain, codomain, arity, degree, entries=None):
        if arity < 1:
            raise ValueError("arity must be >= 1")
        self.domain = domain
        self.codomain = codomain
        self.arity = int(arity)
        self.degree = int(degree)
        self.entries = {}
        if entries:
            for mono, combo in entries.items():
                for g, c in combo.items():
                    self.add_term(mono, g, c)

    # --- canonicalization hooks -------------------------------------------
    def _canon(self, mono):
        raise NotImplementedError

    # --- mutation ----------------------------------------------------------
    def add_term(self, inputs, out_gen, coeff):
        """Add coeff * (inputs -> out_gen); inputs may be in any order."""
        if len(inputs) != self.arity:
            raise ValueError("expected %d inputs, got %d" % (self.arity, len(inputs)))
        coeff = Fraction(coeff)
        if not coeff:
            return
        canon = self._canon(tuple(inputs))
        if canon is None:
            return
        mono, sign = canon
        want = self.domain.mono_degree(mono) + self.degree
        if self.codomain.degree(out_gen) != want:
            raise StructureError(
                "inhomogeneous entry: %s -> %s has degree %d, map degree says %d"
                % (mono, out_gen, self.codomain.degree(out_gen), want))
        combo = self.entries.setdefault(mono, {})
        v = combo.get(out_gen, ZERO) + sign * coeff
        if v:
            combo[out_gen] = v
        else:
            combo.pop(out_gen, None)
            if not combo:
                del self.entries[mono]

    def add_combo(self, inputs, combo, coeff=ONE):
        for g, c in combo.items():
            self.add_term(inputs, g, coeff * c)

    # --- evaluation ---------------------------------------------------------
    def evaluate(self, inputs):
        """Value on a tuple of generator indices, as a fresh sparse vector."""
        if len(inputs) != self.arity:
            raise ValueError("expected %d inputs, got %d" % (self.arity, len(inputs)))
        canon = self._canon(tuple(inputs))
        if canon is None:
            return {}
        mono, sign = canon
        combo = self.entries.get(mono)
        if not combo:
            return {}
        return {g: sign * c for g, c in combo.items()}

    def evaluate_multi(self, combos):
        """Multilinear extension to a tuple of vectors (scalars carry no sign)."""
        if len(combos) != self.arity:
            raise ValueError("expected %d inputs, got %d" % (self.arity, len(combos)))
        out = {}
        def rec(k, idxs, coeff):
            if k == len(combos):
                vec_add(out, self.evaluate(tuple(idxs)), coeff)
                return
            for g, c in combos[k].items():
                idxs.append(g)
                rec(k + 1, idxs, coeff * c)
                idxs.pop()
        rec(0, [], ONE)
        return out

    # --- algebra -------------------------------------------------------------
    def _like(self):
        return type(self)(self.domain, self.codomain, self.arity, self.degree)

    def copy(self):
        new = self._like()
        new.entries = {m: dict(c) for m, c in self.entries.items()}
        return new

    def scaled(self, coeff):
        coeff = Fraction(coeff)
        new = self._like()
        if coeff:
            new.entries = {m: {g: coeff * c for g, c in combo.items()}
                           for m, combo in self.entries.items()}
        return new

    def __add__(self, other):
        self._check_compatible(other)
        new = self.copy()
        for m, combo in other.entries.items():
            dst = new.entries.setdefault(m, {})
            vec_add(dst, combo)
            if not dst:
                del new.entries[m]
        return new

    def __sub__(self, other):
        return self + other.scaled(-1)

    def __neg__(self):
        return self.scaled(-1)

    def _check_compatible(self, other):
        if (type(self) is not type(other) or self.domain != other.domain
                or self.codomain != other.codomain or self.arity != other.arity
                or self.degree != other.degree):
            raise StructureError("maps have incompatible signatures")

    def is_zero(self):
        return not self.entries

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return (self.domain == other.domain and self.codomain == other.codomain
                and self.arity == other.arity and self.degree == other.degree
                and self.entries == other.entries)

    __hash__ = None  # mutable

    def sorted_terms(self):
        """Deterministic (mono, out_gen, coeff) triples for reports."""
        out = []
        for mono in sorted(self.entries):
            combo = self.entries[mono]
            for g in sorted(combo):
                out.append((mono, g, combo[g]))
        return out

    def __repr__(self):
        terms = ", ".join(
            "%s(%s)->%s%s" % (c, ",".join(self.domain.name(i) for i in m),
                              "" if c == 1 else "", self.codomain.name(g))
            for m, g, c in self.sorted_terms()[:6])
        return "<%s arity=%d deg=%d %s%s>" % (
            type(self).__name__, self.arity, self.degree, terms,
            " ..." if len(self.entries) > 6 else "")


class SymMap(_MultiMap):
    """Graded-symmetric multilinear map on symmetric powers of the domain."""

    kind = "symmetric"

    def _canon(self, mono):
        return self.domain.sym_canonical(mono)


class TensorMap(_MultiMap):
    """Multilinear map on tensor powers; no symmetry is imposed."""

    kind = "tensor"

    def _canon(self, mono):
        return mono, 1


class AltMap(_MultiMap):
    """Graded-antisymmetric multilinear map on exterior powers."""

    kind = "alternating"

    def _canon(self, mono):
        return self.domain.alt_canonical(mono)


def linear_map(space, images, degree, codomain=None):
    """Arity-1 SymMap from {gen index: output vector} images."""
    m = SymMap(space, codomain or space, 1, degree)
    for i, vec in images.items():
        m.add_combo((i,), vec)
    return m


def compose_linear(f, g):
    """f after g for arity-1 maps."""
    if f.domain != g.codomain:
        raise StructureError("linear maps not composable")
    out = SymMap(g.domain, f.codomain, 1, f.degree + g.degree)
    for (i,), combo in g.entries.items():
        out.add_combo((i,), f.evaluate_multi((combo,)))
    return out


def as_tensor(m):
    """Symmetrization-free inclusion of a graded-symmetric map into tensor maps."""
    out = TensorMap(m.domain, m.codomain, m.arity, m.degree)
    for mono, combo in m.entries.items():
        for g, c in combo.items():
            out.add_term(mono, g, c)
    return out


# ---------------------------------------------------------------------------
# decalage


def _decalage_sign(space, mono):
    # sign exponent sum_{j=1}^{n-1} (n-j) * deg(x_j), degrees taken on the
    # symmetric (shifted) side; involutive, so one formula serves both ways
    n = len(mono)
    exp = 0
    for t in range(n - 1):
        exp += (n - 1 - t) * space.degree(mono[t])
    return _sign_pow(exp)


def decalage(m, direction):
    """Shift isomorphism between alternating maps and their symmetric avatars.

    direction "down": an AltMap of degree k and arity n on V becomes a SymMap
    of degree k + n - 1 on the suspension V[1] (generator degrees lowered by
    one).  direction "up" is the inverse.  Round trips are the identity; the
    sign convention is pinned by the dg Lie functor test (its quadratic
    coefficient must square to zero).
    """
    if direction == "down":
        if not isinstance(m, AltMap):
            raise StructureError("decalage down expects an alternating map")
        if m.domain != m.codomain:
            raise StructureError("decalage expects an endomorphism-style map")
        shifted = m.domain.shift(1)
        out = SymMap(shifted, shifted, m.arity, m.degree + m.arity - 1)
        for mono, combo in m.entries.items():
            sign = _decalage_sign(shifted, mono)
            for g, c in combo.items():
                out.add_term(mono, g, sign * c)
        return out
    if direction == "up":
        if not isinstance(m, SymMap):
            raise StructureError("decalage up expects a symmetric map")
        if m.domain != m.codomain:
            raise StructureError("decalage expects an endomorphism-style map")
        unshifted = m.domain.shift(-1)
        out = AltMap(unshifted, unshifted, m.arity, m.degree - m.arity + 1)
        for mono, combo in m.entries.items():
            sign = _decalage_sign(m.domain, mono)
            for g, c in combo.items():
                out.add_term(mono, g, sign * c)
        return out
    raise ValueError("direction must be 'down' or 'up'")

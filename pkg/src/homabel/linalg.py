"""Exact sparse linear algebra over the rationals.

Vectors and matrix rows are sparse ``{column: Fraction}`` dicts.  Everything
is deterministic: pivots are always the smallest remaining column, rows are
processed in input order, so identical inputs give identical eliminations,
kernels, solutions and certificates.
"""

from __future__ import annotations

from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

__all__ = ["Eliminator", "rank", "nullspace", "solve", "SolveResult"]


class Eliminator:
    """Incremental exact row elimination.

    Each added row is reduced against the stored pivot rows; a surviving row
    is normalized to leading coefficient one and stored under its leading
    (smallest) column.  With ``track=True`` every pivot row and every
    reduced-to-zero result carries its expression as a combination of the
    input rows.
    """

    def __init__(self, track=False):
        self.pivot_rows = {}
        self.combos = {}
        self.track = track
        self.count = 0

    @property
    def rank(self):
        return len(self.pivot_rows)

    def reduce(self, row, combo=None):
        """Reduce a sparse row against the pivots; returns the residue
        (may be empty) and its tracked combination."""
        r = {c: v for c, v in row.items() if v}
        while r:
            lead = min(r)
            piv = self.pivot_rows.get(lead)
            if piv is None:
                return r, combo
            f = r.pop(lead)
            for c, v in piv.items():
                if c == lead:
                    continue
                nv = r.get(c, ZERO) - f * v
                if nv:
                    r[c] = nv
                else:
                    r.pop(c, None)
            if combo is not None:
                pc = self.combos[lead]
                for k, v in pc.items():
                    nv = combo.get(k, ZERO) - f * v
                    if nv:
                        combo[k] = nv
                    else:
                        combo.pop(k, None)
        return r, combo

    def add_row(self, row, tag=None):
        """Feed one row; returns (is_new_pivot, leading column or residual combo)."""
        combo = None
        if self.track:
            combo = {self.count if tag is None else tag: ONE}
        self.count += 1
        r, combo = self.reduce(row, combo)
        if not r:
            return False, combo
        lead = min(r)
        inv = ONE / r[lead]
        r = {c: v * inv for c, v in r.items()}
        if combo is not None:
            combo = {k: v * inv for k, v in combo.items()}
        self.pivot_rows[lead] = r
        self.combos[lead] = combo
        return True, lead


def rank(rows):
    """Rank of the matrix whose rows (or spanning vectors) are given."""
    elim = Eliminator()
    for row in rows:
        elim.add_row(row)
    return elim.rank


def nullspace(rows, ncols):
    """Deterministic basis of {x : A x = 0}; one vector per free column."""
    elim = Eliminator()
    for row in rows:
        elim.add_row(row)
    pivots = elim.pivot_rows
    pivot_cols = sorted(pivots)
    free_cols = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free_cols:
        vec = {fc: ONE}
        # back-substitute pivot variables, largest pivot column first
        for pc in reversed(pivot_cols):
            if pc > fc:
                continue
            row = pivots[pc]
            s = ZERO
            for c, v in row.items():
                if c != pc:
                    x = vec.get(c)
                    if x:
                        s += v * x
            if s:
                vec[pc] = -s
        basis.append(vec)
    return basis


class SolveResult:
    """Outcome of an exact linear solve: a particular solution or a Farkas
    certificate (a combination y of the equations with y.A = 0, y.b != 0)."""

    def __init__(self, solution=None, certificate=None):
        self.solution = solution
        self.certificate = certificate

    @property
    def feasible(self):
        return self.solution is not None


def solve(rows, rhs, ncols):
    """Solve A x = b for one solution (free variables zero) or certify
    infeasibility.  `rows` are the equations, `rhs` their right sides."""
    BCOL = ncols  # sentinel column, larger than every variable column
    elim = Eliminator(track=True)
    for i, row in enumerate(rows):
        aug = {c: v for c, v in row.items() if v}
        b = rhs[i] if i < len(rhs) else ZERO
        if b:
            aug[BCOL] = -b
        new, info = elim.add_row(aug, tag=i)
        if new and info == BCOL:
            # 0 = nonzero: the tracked combination is a Farkas certificate
            y = elim.combos[BCOL]
            return SolveResult(certificate=dict(y))
    pivots = elim.pivot_rows
    sol = {}
    for pc in sorted(pivots, reverse=True):
        row = pivots[pc]
        s = ZERO
        for c, v in row.items():
            if c == pc:
                continue
            if c == BCOL:
                s += v  # constant term of the reduced equation
            else:
                x = sol.get(c)
                if x:
                    s += v * x
        if s:
            sol[pc] = -s
    return SolveResult(solution=sol)


def verify_certificate(rows, rhs, certificate):
    """Check y.A = 0 and y.b != 0 exactly; used to self-validate solvers."""
    acc = {}
    bacc = ZERO
    for i, y in certificate.items():
        if not y:
            continue
        for c, v in rows[i].items():
            nv = acc.get(c, ZERO) + y * v
            if nv:
                acc[c] = nv
            else:
                acc.pop(c, None)
        if i < len(rhs):
            bacc += y * rhs[i]
    return not acc and bacc != 0

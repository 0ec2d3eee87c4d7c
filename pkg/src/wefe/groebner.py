"""Exact polynomial algebra for the non-existence argument for complex Ricci
eigenvalues.

Everything here is exact rational arithmetic over the five quantities
J, a, b, alpha, H attached to a Type I.b candidate solution: J is the
weighted trace quantity tau/6, (a, b) the real/imaginary parts of the complex
eigenvalue pair, alpha the remaining real eigenvalue and H = h^2/|grad h|^2.
The derivation nabla_h encodes how these quantities evolve along grad h.
A Groebner basis of the ideal generated by the derived polynomial system
certifies that b must vanish, so no such solution exists.
"""

from __future__ import annotations

import re
from fractions import Fraction
from itertools import combinations

from .errors import GeneratorMismatch, ResourceLimit

VARS = ("J", "a", "b", "alpha", "H")
NVARS = 5
_ZERO = (0, 0, 0, 0, 0)
# lex tie-break uses the fixed variable order J < a < b < alpha < H,
# so exponents are compared from H (largest) down to J
_LEX = (4, 3, 2, 1, 0)


def grlex_key(mono):
    return (sum(mono), tuple(mono[i] for i in _LEX))


class Poly:
    """Sparse polynomial: exponent 5-tuple -> Fraction, no zero coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {m: c for m, c in (terms or {}).items() if c != 0}

    @staticmethod
    def zero():
        return Poly()

    @staticmethod
    def constant(c):
        c = Fraction(c)
        return Poly({_ZERO: c} if c else {})

    @staticmethod
    def variable(name):
        e = [0] * NVARS
        e[VARS.index(name)] = 1
        return Poly({tuple(e): Fraction(1)})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, int):
            other = Poly.constant(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        if isinstance(other, int):
            other = Poly.constant(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        p = Poly()
        p.terms = out
        return p

    __radd__ = __add__

    def __neg__(self):
        p = Poly()
        p.terms = {m: -c for m, c in self.terms.items()}
        return p

    def __sub__(self, other):
        if isinstance(other, int):
            other = Poly.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return Poly.constant(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return Poly()
            p = Poly()
            p.terms = {m: c * other for m, c in self.terms.items()}
            return p
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = (m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2],
                     m1[3] + m2[3], m1[4] + m2[4])
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    del out[m]
        p = Poly()
        p.terms = out
        return p

    __rmul__ = __mul__

    def __truediv__(self, k):
        return self * Fraction(1, k) if isinstance(k, int) else self * (1 / Fraction(k))

    def diff(self, var_index):
        out = {}
        for m, c in self.terms.items():
            e = m[var_index]
            if e:
                mm = list(m)
                mm[var_index] = e - 1
                out[tuple(mm)] = c * e
        p = Poly()
        p.terms = out
        return p

    def leading(self):
        m = max(self.terms, key=grlex_key)
        return m, self.terms[m]

    def monic(self):
        if not self.terms:
            return self
        _, c = self.leading()
        return self * (1 / c)

    def total_degree(self):
        return max((sum(m) for m in self.terms), default=-1)

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        for m in sorted(self.terms, key=grlex_key, reverse=True):
            c = self.terms[m]
            body = " ".join(
                v if e == 1 else f"{v}^{e}"
                for v, e in zip(VARS, m) if e
            )
            coeff = str(c) if (abs(c) != 1 or not body) else ("-" if c < 0 else "")
            sep = " " if coeff not in ("", "-") and body else ""
            bits.append(f"{coeff}{sep}{body}" if body else coeff)
        s = " + ".join(bits).replace("+ -", "- ")
        return s

    __repr__ = __str__


J, a, b, alpha, H = (Poly.variable(v) for v in VARS)

_TERM_RE = re.compile(r"([+-]?)\s*(\d+)?\s*((?:alpha|[JabH])(?:\^\d+)?"
                      r"(?:\s+(?:alpha|[JabH])(?:\^\d+)?)*)?")


def parse_poly(text: str) -> Poly:
    """Parse a human-readable sum of monomials like '-8 J^2 a H + 2 a alpha'."""
    out = Poly()
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"bad polynomial near {text[pos:pos+20]!r}")
        sign, num, factors = m.groups()
        coeff = Fraction(int(num) if num else 1)
        if sign == "-":
            coeff = -coeff
        expo = [0] * NVARS
        if factors:
            for f in factors.split():
                name, _, p = f.partition("^")
                expo[VARS.index(name)] += int(p) if p else 1
        out = out + Poly({tuple(expo): coeff})
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


# evolution of the five quantities along grad h, divided by h
_LAMBDA = 6 * J - 2 * a - alpha
_DERIVS = {
    0: Poly.zero(),                          # J
    1: b * b + (_LAMBDA - a) * (a - 2 * J),  # a
    2: b * (_LAMBDA + 2 * J - 2 * a),        # b
    3: (_LAMBDA - alpha) * (alpha - 2 * J),  # alpha
    4: 2 * (1 - H * (_LAMBDA - 2 * J)),      # H
}


def nabla_h(q: Poly) -> Poly:
    """The derivation Q -> (1/h) grad-h derivative of Q."""
    out = Poly.zero()
    for i in range(NVARS):
        d = q.diff(i)
        if d:
            out = out + d * _DERIVS[i]
    return out


P1_EXPECTED = parse_poly(
    "-a b^2 H -8 J^2 a H -4 J a H alpha +6 J a^2 H +2 J a +a H alpha^2 -a^3 H"
    " +2 a alpha -2 a^2 -2 J b^2 H +2 b^2 H alpha +2 b^2 +8 J^2 H alpha"
    " -2 J H alpha^2 -2 J alpha")
P2_EXPECTED = parse_poly(
    "-8 J a H +2 a H alpha +a^2 H +2 a +b^2 H +12 J^2 H -4 J H alpha -3 J +alpha")
P3_EXPECTED = parse_poly(
    "8 J a b^2 H -11 a b^2 H alpha +4 a^2 b^2 H -22 a b^2 -96 J^3 a H"
    " -64 J^2 a H alpha +108 J^2 a^2 H +24 J^2 a +6 J a^2 H alpha"
    " +28 J a H alpha^2 -40 J a^3 H +30 J a alpha -34 J a^2 +a^3 H alpha"
    " -3 a^2 H alpha^2 -3 a H alpha^3 +5 a^4 H -6 a^2 alpha -4 a alpha^2"
    " +10 a^3 -36 J^2 b^2 H +30 J b^2 H alpha +30 J b^2 -3 b^2 H alpha^2"
    " -b^4 H +2 b^2 alpha +96 J^3 H alpha -44 J^2 H alpha^2 -24 J^2 alpha"
    " +6 J H alpha^3 +4 J alpha^2")
P4_EXPECTED = parse_poly(
    "-a b^2 H -24 J^2 a H +8 J a H alpha +8 J a^2 H +6 J a -a H alpha^2"
    " -a^2 H alpha -a^3 H -2 a^2 +b^2 H alpha +2 b^2 +24 J^3 H -12 J^2 H alpha"
    " -6 J^2 +2 J H alpha^2 +3 J alpha -alpha^2")
P5_EXPECTED = parse_poly(
    "676 J^2 a b^2 H -514 J a b^2 H alpha -92 J a^2 b^2 H -900 J a b^2"
    " +94 a^2 b^2 H alpha +51 a b^2 H alpha^2 -20 a^3 b^2 H +20 a b^4 H"
    " +12 a b^2 alpha +280 a^2 b^2 -1824 J^4 a H -1536 J^3 a H alpha"
    " +2744 J^3 a^2 H +456 J^3 a +240 J^2 a^2 H alpha +1012 J^2 a H alpha^2"
    " -1564 J^2 a^3 H +692 J^2 a alpha -840 J^2 a^2 +70 J a^3 H alpha"
    " -234 J a^2 H alpha^2 -210 J a H alpha^3 +404 J a^4 H -246 J a^2 alpha"
    " -202 J a alpha^2 +460 J a^3 -17 a^4 H alpha +15 a^3 H alpha^2"
    " +27 a^2 H alpha^3 +15 a H alpha^4 -40 a^5 H +20 a^3 alpha"
    " +46 a^2 alpha^2 +14 a alpha^3 -80 a^4 -840 J^3 b^2 H"
    " +696 J^2 b^2 H alpha +672 J^2 b^2 -138 J b^2 H alpha^2 -16 J b^4 H"
    " +38 J b^2 alpha +9 b^2 H alpha^3 -9 b^4 H alpha -18 b^2 alpha^2 -24 b^4"
    " +1824 J^4 H alpha -1208 J^3 H alpha^2 -456 J^3 alpha +312 J^2 H alpha^3"
    " +148 J^2 alpha^2 -30 J H alpha^4 -12 J alpha^3")
P6_EXPECTED = parse_poly(
    "-7 a b^2 H alpha +4 a^2 b^2 H -22 a b^2 -336 J^3 a H +160 J^2 a H alpha"
    " +184 J^2 a^2 H +84 J^2 a -36 J a H alpha^2 -48 J a^2 H alpha"
    " -48 J a^3 H -12 J a alpha -50 J a^2 +3 a H alpha^3 +5 a^2 H alpha^2"
    " +5 a^3 H alpha +5 a^4 H +2 a alpha^2 +2 a^2 alpha +10 a^3"
    " -24 J^2 b^2 H +24 J b^2 H alpha +38 J b^2 -3 b^2 H alpha^2 -b^4 H"
    " -2 b^2 alpha +240 J^4 H -168 J^3 H alpha -60 J^3 +52 J^2 H alpha^2"
    " +42 J^2 alpha -6 J H alpha^3 -22 J alpha^2 +4 alpha^3")


def generator_table():
    """Computed P3..P6 next to their expected forms; list of
    (name, computed, expected, diff)."""
    p3 = nabla_h(P1_EXPECTED)
    p4 = nabla_h(P2_EXPECTED) / 2
    p5 = nabla_h(p3)
    p6 = nabla_h(p4)
    rows = []
    for name, comp, exp in (("P3", p3, P3_EXPECTED), ("P4", p4, P4_EXPECTED),
                            ("P5", p5, P5_EXPECTED), ("P6", p6, P6_EXPECTED)):
        rows.append((name, comp, exp, comp - exp))
    return rows


def generators():
    """The six ideal generators.  P1, P2 come from the eliminated curvature
    system; P3..P6 are derived by nabla_h and must reproduce the expected
    closed forms exactly."""
    rows = generator_table()
    bad = [(name, str(diff)) for name, _, _, diff in rows if diff]
    if bad:
        raise GeneratorMismatch(
            "derived generators disagree with expected forms", bad)
    return (P1_EXPECTED, P2_EXPECTED) + tuple(r[1] for r in rows)


def _reduce(q: Poly, basis, collect_quotients=False):
    """Multivariate division: remainder of q modulo basis (grlex)."""
    lead = [(g.leading(), g) for g in basis]
    rem = {}
    work = dict(q.terms)
    quots = [Poly.zero() for _ in basis] if collect_quotients else None
    while work:
        m = max(work, key=grlex_key)
        c = work.pop(m)
        for i, ((lm, lc), g) in enumerate(lead):
            if all(m[k] >= lm[k] for k in range(NVARS)):
                qm = tuple(m[k] - lm[k] for k in range(NVARS))
                qc = c / lc
                for gm, gc in g.terms.items():
                    t = (qm[0] + gm[0], qm[1] + gm[1], qm[2] + gm[2],
                         qm[3] + gm[3], qm[4] + gm[4])
                    if t == m:
                        continue
                    s = work.get(t, 0) - qc * gc
                    if s:
                        work[t] = s
                    else:
                        work.pop(t, None)
                if collect_quotients:
                    quots[i] = quots[i] + Poly({qm: qc})
                break
        else:
            rem[m] = c
    r = Poly()
    r.terms = rem
    return (r, quots) if collect_quotients else r


def normal_form(q: Poly, basis) -> Poly:
    """Remainder of q on division by the basis; zero iff q is in the ideal
    when the basis is a Groebner basis."""
    return _reduce(q, basis)


def division(q: Poly, basis):
    """(remainder, quotients) with q = sum quotients[i]*basis[i] + remainder."""
    return _reduce(q, basis, collect_quotients=True)


def _lcm(m1, m2):
    return tuple(max(x, y) for x, y in zip(m1, m2))


def _spoly(f, g):
    (mf, cf), (mg, cg) = f.leading(), g.leading()
    l = _lcm(mf, mg)
    uf = Poly({tuple(l[k] - mf[k] for k in range(NVARS)): 1 / cf})
    ug = Poly({tuple(l[k] - mg[k] for k in range(NVARS)): 1 / cg})
    return uf * f - ug * g


def buchberger(gens, max_pairs: int = 200000):
    """Reduced Groebner basis in grlex order, deterministic.

    Normal selection strategy (smallest lcm in grlex) with the coprimality
    and chain criteria.  Raises ResourceLimit if the pair budget is exhausted.
    """
    basis = [g.monic() for g in gens if g]
    if not basis:
        return []
    pairs = {(i, j) for i, j in combinations(range(len(basis)), 2)}
    lead = [g.leading()[0] for g in basis]
    processed = 0
    while pairs:
        i, j = min(pairs, key=lambda p: (grlex_key(_lcm(lead[p[0]], lead[p[1]])), p))
        pairs.discard((i, j))
        processed += 1
        if processed > max_pairs:
            raise ResourceLimit(f"pair budget {max_pairs} exhausted")
        l = _lcm(lead[i], lead[j])
        # coprime leading monomials: S-poly reduces to zero
        if all(lead[i][k] == 0 or lead[j][k] == 0 for k in range(NVARS)):
            continue
        # chain criterion
        skip = False
        for k in range(len(basis)):
            if k in (i, j):
                continue
            if all(lead[k][t] <= l[t] for t in range(NVARS)):
                ki, kj = (min(i, k), max(i, k)), (min(j, k), max(j, k))
                if ki not in pairs and kj not in pairs:
                    skip = True
                    break
        if skip:
            continue
        r = _reduce(_spoly(basis[i], basis[j]), basis)
        if r:
            r = r.monic()
            new = len(basis)
            basis.append(r)
            lead.append(r.leading()[0])
            for k in range(new):
                pairs.add((k, new))
    return _interreduce(basis)


def _interreduce(basis):
    # drop redundant leading terms, then fully reduce tails
    basis = sorted(basis, key=lambda g: grlex_key(g.leading()[0]))
    kept = []
    for i, g in enumerate(basis):
        lm = g.leading()[0]
        others = [h.leading()[0] for j, h in enumerate(basis) if j != i
                  and (j > i or basis[j] in kept)]
        if any(all(lm[k] >= om[k] for k in range(NVARS)) for om in
               (h.leading()[0] for h in kept)):
            continue
        kept.append(g)
    out = []
    for i, g in enumerate(kept):
        rest = kept[:i] + kept[i + 1:]
        r = _reduce(g, rest) if rest else g
        if r:
            out.append(r.monic())
    return sorted(out, key=lambda g: grlex_key(g.leading()[0]))


def is_groebner(basis) -> bool:
    """Post-hoc certificate: every S-polynomial reduces to zero."""
    for f, g in combinations(basis, 2):
        if _reduce(_spoly(f, g), basis):
            return False
    return True


G_TARGET = parse_poly("16 b^8 +8 b^6 alpha^2 +b^4 alpha^4")


def alpha_equals_a_branch():
    """Contradiction certificate for the branch where the real eigenvalues
    coincide.

    The constraint Q = b^2 H^2 + 6 + 3 J H and its grad-h derivative
    R = 5 b^2 H^2 - 12 J H + 30 combine linearly to 6 + b^2 H^2 = 0,
    which has no real solution.  Returns the exact multipliers and the
    verification residuals (all must be the zero polynomial).
    """
    Q = b * b * H * H + 6 + 3 * J * H
    R = 5 * b * b * H * H - 12 * J * H + 30
    cQ, cR = Fraction(4, 9), Fraction(1, 9)
    target = 6 + b * b * H * H
    combination_residual = cQ * Q + cR * R - target
    jh_residual = 5 * Q - R - 27 * J * H

    # derivative identity on the branch: lambda = 6/H, a = alpha = 2(JH-1)/H.
    # With D the branch derivation, H^2 D(b^2 H + 3 J) - 6 D(H) must equal 2R.
    db = b * (10 - 2 * J * H)           # H * D(b)
    dH = 2 * (2 * J * H - 5)            # D(H)
    deriv = H * H * (2 * b * db + b * b * dH) - 6 * dH
    derivative_residual = deriv - 2 * R
    return {
        "Q": Q,
        "R": R,
        "multipliers": (cQ, cR),
        "target": target,
        "combination_residual": combination_residual,
        "jh_residual": jh_residual,
        "derivative_residual": derivative_residual,
    }

"""Closed-form scalar expressions and their order-3 Taylor jets.

An :class:`Expr` is a small immutable tree over chart coordinates built
from {constants, coordinates, add, mul, div, neg, pow, exp, log, sin,
cos, sqrt}.  Evaluation produces either plain values or order-3
truncated Taylor expansions (jets) holding every mixed partial up to
third order, which is all the curvature machinery ever needs.

Jets are stored densely: one coefficient per multi-index of total
degree <= 3, Taylor-normalized (the coefficient of ``alpha`` is
``d^alpha f / alpha!``).  The batched engine works on numpy arrays
whose last axis runs over the multi-indices, so evaluating a component
at 100 sample points costs about the same as at one.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError

MAX_ORDER = 3

_UNARY_KINDS = frozenset({"neg", "exp", "log", "sin", "cos", "sqrt"})
_BINARY_KINDS = frozenset({"add", "mul", "div"})

_EPS_DIV = 1e-300  # hard zero guard; tolerance checks live upstream


class Expr:
    """Immutable closed-form expression tree node."""

    __slots__ = ("kind", "children", "value")

    def __init__(self, kind, children=(), value=None):
        self.kind = kind
        self.children = tuple(children)
        self.value = value
        if kind == "const":
            assert isinstance(value, (int, float, Fraction))
        elif kind == "coord":
            assert isinstance(value, int) and value >= 0
        elif kind == "pow":
            assert len(self.children) == 1
            assert isinstance(value, (int, Fraction))
        elif kind in _UNARY_KINDS:
            assert len(self.children) == 1
        elif kind in _BINARY_KINDS:
            assert len(self.children) == 2
        else:
            raise ValueError(f"unknown node kind {kind!r}")

    # -- convenience constructors -------------------------------------

    def __add__(self, other):
        return Expr("add", (self, _as_expr(other)))

    def __radd__(self, other):
        return Expr("add", (_as_expr(other), self))

    def __sub__(self, other):
        return Expr("add", (self, Expr("neg", (_as_expr(other),))))

    def __rsub__(self, other):
        return Expr("add", (_as_expr(other), Expr("neg", (self,))))

    def __mul__(self, other):
        return Expr("mul", (self, _as_expr(other)))

    def __rmul__(self, other):
        return Expr("mul", (_as_expr(other), self))

    def __truediv__(self, other):
        return Expr("div", (self, _as_expr(other)))

    def __rtruediv__(self, other):
        return Expr("div", (_as_expr(other), self))

    def __neg__(self):
        return Expr("neg", (self,))

    def __pow__(self, q):
        if not isinstance(q, (int, Fraction)):
            raise TypeError("pow exponent must be int or Fraction")
        return Expr("pow", (self,), Fraction(q))

    def __repr__(self):
        return f"Expr<{to_sexpr(self)}>"


def const(v):
    return Expr("const", value=v)


def coord(i):
    return Expr("coord", value=i)


def _as_expr(v):
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, float, Fraction)):
        return const(v)
    raise TypeError(f"cannot coerce {v!r} to Expr")


def exp(e):
    return Expr("exp", (_as_expr(e),))


def log(e):
    return Expr("log", (_as_expr(e),))


def sin(e):
    return Expr("sin", (_as_expr(e),))


def cos(e):
    return Expr("cos", (_as_expr(e),))


def sqrt(e):
    return Expr("sqrt", (_as_expr(e),))


def max_coord_index(e):
    if e.kind == "coord":
        return e.value
    if not e.children:
        return -1
    return max(max_coord_index(c) for c in e.children)


# -- s-expression serialization ---------------------------------------

def default_coord_names(n):
    return [f"x{i}" for i in range(n)]


def to_sexpr(e, coord_names=None):
    """Render an Expr in the prefix form used by manifest files."""
    if e.kind == "const":
        v = e.value
        if isinstance(v, Fraction):
            return str(v) if v.denominator != 1 else str(v.numerator)
        if isinstance(v, int):
            return str(v)
        return repr(float(v))
    if e.kind == "coord":
        if coord_names is not None:
            return coord_names[e.value]
        return f"x{e.value}"
    parts = [to_sexpr(c, coord_names) for c in e.children]
    if e.kind == "pow":
        parts.append(str(e.value))
    return "(" + " ".join([e.kind] + parts) + ")"


def _tokenize(text):
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _parse_atom(tok, coord_names, params):
    if params and tok in params:
        return const(float(params[tok]))
    if tok in coord_names:
        return coord(coord_names.index(tok))
    try:
        if "/" in tok:
            return const(Fraction(tok))
        if any(c in tok for c in ".eE") and not tok.lstrip("+-").isdigit():
            return const(float(tok))
        return const(int(tok))
    except ValueError:
        raise DomainError(f"unknown atom {tok!r} in expression") from None


def _parse_number(tok):
    if "/" in tok:
        return Fraction(tok)
    return int(tok)


def parse_sexpr(text, coord_names, params=None):
    """Parse the prefix s-expression form, e.g.
    ``(mul (exp (neg t)) (cos (mul 2 t)))``.

    ``coord_names`` maps atoms to coordinate indices; ``params`` maps
    named constants to values.  ``add``/``mul`` accept two or more
    arguments (folded left), and ``(sub a b)`` is sugar for
    ``(add a (neg b))``.
    """
    toks = _tokenize(text)
    pos = 0

    def parse():
        nonlocal pos
        tok = toks[pos]
        pos += 1
        if tok != "(":
            return _parse_atom(tok, coord_names, params)
        head = toks[pos]
        pos += 1
        args = []
        while toks[pos] != ")":
            if head == "pow" and len(args) == 1 and toks[pos] != "(":
                # trailing rational exponent
                args.append(_parse_number(toks[pos]))
                pos += 1
            else:
                args.append(parse())
        pos += 1  # consume ')'
        if head == "pow":
            if len(args) != 2 or isinstance(args[1], Expr):
                raise DomainError("pow needs (pow <expr> <rational>)")
            return Expr("pow", (args[0],), Fraction(args[1]))
        if head == "sub":
            if len(args) != 2:
                raise DomainError("sub needs exactly two arguments")
            return args[0] - args[1]
        if head in ("add", "mul"):
            if len(args) < 2:
                raise DomainError(f"{head} needs at least two arguments")
            out = args[0]
            for a in args[1:]:
                out = Expr(head, (out, a))
            return out
        if head == "div":
            if len(args) != 2:
                raise DomainError("div needs exactly two arguments")
            return Expr("div", tuple(args))
        if head in _UNARY_KINDS:
            if len(args) != 1:
                raise DomainError(f"{head} needs exactly one argument")
            return Expr(head, tuple(args))
        raise DomainError(f"unknown operator {head!r}")

    try:
        out = parse()
    except IndexError:
        raise DomainError("unbalanced parentheses") from None
    if pos != len(toks):
        raise DomainError("trailing tokens after expression")
    return out


# -- jet context -------------------------------------------------------

@lru_cache(maxsize=None)
def jet_context(n):
    return JetContext(n)


class JetContext:
    """Multi-index bookkeeping and vectorized ring operations for
    order-3 jets in ``n`` variables.

    Jet arrays have shape ``(..., N)`` with ``N = C(n+3, 3)``; the last
    axis is indexed by :attr:`multi_indices` (degree-ascending, then
    lexicographic)."""

    def __init__(self, n):
        self.n = n
        mis = []
        for deg in range(MAX_ORDER + 1):
            mis.extend(sorted(_multi_indices(n, deg)))
        self.multi_indices = mis
        self.N = len(mis)
        self.index_of = {a: i for i, a in enumerate(mis)}
        self.degrees = np.array([sum(a) for a in mis])

        ti, tj, tk = [], [], []
        for i, a in enumerate(mis):
            for j, b in enumerate(mis):
                s = tuple(x + y for x, y in zip(a, b))
                if sum(s) <= MAX_ORDER:
                    ti.append(i)
                    tj.append(j)
                    tk.append(self.index_of[s])
        self._ti = np.array(ti)
        self._tj = np.array(tj)
        self._tk = np.array(tk)
        scatter = np.zeros((len(tk), self.N))
        scatter[np.arange(len(tk)), self._tk] = 1.0
        self._scatter = scatter

        # per-axis derivative maps: out[tgt] = in[src] * mult
        self._deriv = []
        for d in range(n):
            tgt, src, mult = [], [], []
            for i, a in enumerate(mis):
                if sum(a) >= MAX_ORDER:
                    continue
                up = list(a)
                up[d] += 1
                tgt.append(i)
                src.append(self.index_of[tuple(up)])
                mult.append(float(up[d]))
            self._deriv.append((np.array(tgt), np.array(src), np.array(mult)))

        fact = [math.factorial(sum(a)) for a in mis]
        self.alpha_factorial = np.array(
            [np.prod([math.factorial(x) for x in a]) for a in mis], dtype=float)
        del fact

    # -- constructors --------------------------------------------------

    def constant(self, value, lead_shape=()):
        out = np.zeros(lead_shape + (self.N,))
        out[..., 0] = value
        return out

    def coordinate(self, i, values):
        values = np.asarray(values, dtype=float)
        out = np.zeros(values.shape + (self.N,))
        out[..., 0] = values
        out[..., self.index_of[_unit(self.n, i)]] = 1.0
        return out

    # -- ring operations ------------------------------------------------

    def mul(self, a, b):
        a, b = np.broadcast_arrays(a, b)
        prod = a[..., self._ti] * b[..., self._tj]
        return prod @ self._scatter

    def deriv(self, a, axis):
        """Jet of the partial derivative along ``axis``.  Degree-3
        coefficients of the result are zeroed (unknown)."""
        tgt, src, mult = self._deriv[axis]
        out = np.zeros_like(a)
        out[..., tgt] = a[..., src] * mult
        return out

    def compose(self, a, derivs, label, path):
        """Univariate composition f(a) from the stack ``derivs`` of
        f(a0), f'(a0), f''(a0), f'''(a0) evaluated at the constant term."""
        d0, d1, d2, d3 = derivs
        delta = a.copy()
        delta[..., 0] = 0.0
        d2sq = self.mul(delta, delta)
        d3cu = self.mul(d2sq, delta)
        out = (d1[..., None] * delta
               + (d2 / 2.0)[..., None] * d2sq
               + (d3 / 6.0)[..., None] * d3cu)
        out[..., 0] += d0
        return out

    def recip(self, a, path):
        a0 = a[..., 0]
        if np.any(np.abs(a0) <= _EPS_DIV) or not np.all(np.isfinite(a0)):
            raise DomainError("division by zero", path)
        inv = 1.0 / a0
        return self.compose(
            a, (inv, -inv**2, 2.0 * inv**3, -6.0 * inv**4), "recip", path)

    def exp(self, a, path):
        e = np.exp(a[..., 0])
        return self.compose(a, (e, e, e, e), "exp", path)

    def log(self, a, path):
        a0 = a[..., 0]
        if np.any(a0 <= 0.0):
            raise DomainError("log of non-positive value", path)
        return self.compose(
            a, (np.log(a0), 1.0 / a0, -1.0 / a0**2, 2.0 / a0**3), "log", path)

    def sin(self, a, path):
        s, c = np.sin(a[..., 0]), np.cos(a[..., 0])
        return self.compose(a, (s, c, -s, -c), "sin", path)

    def cos(self, a, path):
        s, c = np.sin(a[..., 0]), np.cos(a[..., 0])
        return self.compose(a, (c, -s, -c, s), "cos", path)

    def power(self, a, q, path):
        q = Fraction(q)
        a0 = a[..., 0]
        if q.denominator == 1:
            k = int(q)
            if k >= 0:
                out = self.constant(1.0, a.shape[:-1])
                for _ in range(k):
                    out = self.mul(out, a)
                return out
            return self.recip(self.power(a, -k, path), path)
        if np.any(a0 <= 0.0):
            raise DomainError("fractional power of non-positive value", path)
        qf = float(q)
        d0 = a0**qf
        d1 = qf * a0 ** (qf - 1)
        d2 = qf * (qf - 1) * a0 ** (qf - 2)
        d3 = qf * (qf - 1) * (qf - 2) * a0 ** (qf - 3)
        return self.compose(a, (d0, d1, d2, d3), "pow", path)

    def sqrt(self, a, path):
        return self.power(a, Fraction(1, 2), path)


def _multi_indices(n, deg):
    for c in itertools.combinations_with_replacement(range(n), deg):
        a = [0] * n
        for i in c:
            a[i] += 1
        yield tuple(a)


def _unit(n, i):
    a = [0] * n
    a[i] = 1
    return tuple(a)


# -- evaluation --------------------------------------------------------

def eval_jets(e, pts, ctx, path=()):
    """Batched jet evaluation: ``pts`` has shape (npts, n); result has
    shape (npts, N)."""
    pts = np.asarray(pts, dtype=float)
    k = e.kind
    if k == "const":
        return ctx.constant(float(e.value), pts.shape[:-1])
    if k == "coord":
        if e.value >= ctx.n:
            raise DomainError(
                f"coordinate index {e.value} outside chart dimension {ctx.n}",
                path)
        return ctx.coordinate(e.value, pts[..., e.value])
    if k == "add":
        return (eval_jets(e.children[0], pts, ctx, path + (0,))
                + eval_jets(e.children[1], pts, ctx, path + (1,)))
    if k == "neg":
        return -eval_jets(e.children[0], pts, ctx, path + (0,))
    if k == "mul":
        return ctx.mul(eval_jets(e.children[0], pts, ctx, path + (0,)),
                       eval_jets(e.children[1], pts, ctx, path + (1,)))
    if k == "div":
        num = eval_jets(e.children[0], pts, ctx, path + (0,))
        den = eval_jets(e.children[1], pts, ctx, path + (1,))
        return ctx.mul(num, ctx.recip(den, path + (1,)))
    a = eval_jets(e.children[0], pts, ctx, path + (0,))
    if k == "exp":
        return ctx.exp(a, path)
    if k == "log":
        return ctx.log(a, path)
    if k == "sin":
        return ctx.sin(a, path)
    if k == "cos":
        return ctx.cos(a, path)
    if k == "sqrt":
        return ctx.sqrt(a, path)
    if k == "pow":
        return ctx.power(a, e.value, path)
    raise ValueError(f"unknown node kind {k!r}")


def eval_values(e, pts, path=()):
    """Plain (order-0) batched evaluation with the same domain checks."""
    pts = np.asarray(pts, dtype=float)
    k = e.kind
    if k == "const":
        return np.full(pts.shape[:-1], float(e.value))
    if k == "coord":
        return pts[..., e.value].astype(float)
    if k == "add":
        return (eval_values(e.children[0], pts, path + (0,))
                + eval_values(e.children[1], pts, path + (1,)))
    if k == "neg":
        return -eval_values(e.children[0], pts, path + (0,))
    if k == "mul":
        return (eval_values(e.children[0], pts, path + (0,))
                * eval_values(e.children[1], pts, path + (1,)))
    if k == "div":
        num = eval_values(e.children[0], pts, path + (0,))
        den = eval_values(e.children[1], pts, path + (1,))
        if np.any(np.abs(den) <= _EPS_DIV):
            raise DomainError("division by zero", path + (1,))
        return num / den
    a = eval_values(e.children[0], pts, path + (0,))
    if k == "exp":
        return np.exp(a)
    if k == "log":
        if np.any(a <= 0.0):
            raise DomainError("log of non-positive value", path)
        return np.log(a)
    if k == "sin":
        return np.sin(a)
    if k == "cos":
        return np.cos(a)
    if k == "sqrt":
        if np.any(a < 0.0):
            raise DomainError("sqrt of negative value", path)
        return np.sqrt(a)
    if k == "pow":
        q = Fraction(e.value)
        if q.denominator == 1 and int(q) >= 0:
            return a ** int(q)
        if q.denominator == 1:
            if np.any(np.abs(a) <= _EPS_DIV):
                raise DomainError("zero to a negative power", path)
            return a ** float(q)
        if np.any(a <= 0.0):
            raise DomainError("fractional power of non-positive value", path)
        return a ** float(q)
    raise ValueError(f"unknown node kind {k!r}")


class Jet3:
    """Order-3 jet of a scalar expression at a single chart point."""

    __slots__ = ("n", "coeffs", "_ctx")

    def __init__(self, n, coeffs, ctx=None):
        self.n = n
        self.coeffs = np.asarray(coeffs, dtype=float)
        self._ctx = ctx or jet_context(n)

    @property
    def value(self):
        return float(self.coeffs[0])

    def coefficient(self, alpha):
        """Taylor coefficient of multi-index ``alpha``."""
        return float(self.coeffs[self._ctx.index_of[tuple(alpha)]])

    def derivative(self, alpha):
        """Mixed partial d^alpha f at the base point (coefficient times
        alpha factorial)."""
        idx = self._ctx.index_of[tuple(alpha)]
        return float(self.coeffs[idx] * self._ctx.alpha_factorial[idx])

    def _wrap(self, arr):
        return Jet3(self.n, arr, self._ctx)

    def __add__(self, other):
        if isinstance(other, Jet3):
            return self._wrap(self.coeffs + other.coeffs)
        return self._wrap(self.coeffs + self._ctx.constant(float(other)))

    def __neg__(self):
        return self._wrap(-self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet3) else -float(other))

    def __mul__(self, other):
        if isinstance(other, Jet3):
            return self._wrap(self._ctx.mul(self.coeffs, other.coeffs))
        return self._wrap(self.coeffs * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet3):
            return self._wrap(
                self._ctx.mul(self.coeffs, self._ctx.recip(other.coeffs, ())))
        return self._wrap(self.coeffs / float(other))


def eval_jet(e, p, n):
    """Order-3 jet of ``e`` at point ``p`` in an ``n``-dimensional chart."""
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape[0] != n:
        raise DomainError(f"point has {p.shape[0]} coordinates, chart has {n}")
    if max_coord_index(e) >= n:
        raise DomainError("coordinate index outside chart dimension")
    ctx = jet_context(n)
    coeffs = eval_jets(e, p[None, :], ctx)[0]
    return Jet3(n, coeffs, ctx)


# -- finite-difference oracle ------------------------------------------

# Step sizes balance stencil truncation (O(h^2)) against round-off
# amplification (eps / h^order), per total derivative order.
_FD_STEPS = {1: 1e-5, 2: 1e-4, 3: 1e-3}

_STENCIL_1D = {
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
}


def fd_oracle(e, p, order, direction, step=None):
    """Central finite-difference estimate of a mixed partial.

    ``direction`` is a multi-index (length = chart dimension) whose
    entries sum to ``order``; returns the plain derivative value
    (not the Taylor coefficient)."""
    p = np.asarray(p, dtype=float).reshape(-1)
    direction = tuple(int(d) for d in direction)
    if len(direction) != p.shape[0]:
        raise DomainError("direction multi-index length must match point")
    if sum(direction) != order or not 0 <= order <= MAX_ORDER:
        raise DomainError("direction degree must equal order, 0..3")
    if order == 0:
        return float(eval_values(e, p[None, :])[0])

    axes = [i for i, d in enumerate(direction) if d > 0]
    base = _FD_STEPS[order] if step is None else float(step)
    steps = {i: max(abs(p[i]), 1.0) * base for i in axes}

    stencils = [_STENCIL_1D[direction[i]] for i in axes]
    pts = []
    weights = []
    for combo in itertools.product(*stencils):
        q = p.copy()
        w = 1.0
        for ax, (off, coef) in zip(axes, combo):
            q[ax] += off * steps[ax]
            w *= coef / steps[ax] ** direction[ax]
        pts.append(q)
        weights.append(w)
    vals = eval_values(e, np.array(pts))
    return float(np.dot(weights, vals))

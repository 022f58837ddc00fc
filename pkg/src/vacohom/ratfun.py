"""Exact rational functions in z_1..z_n with poles only on z_i = z_j and z_i = 0.

A RatFun is a sparse numerator polynomial together with a pole-exponent
table: nonnegative powers of (z_i - z_j) for i < j and of z_i in the
denominator.  Permutation signs are pushed into the numerator so the
denominator normal form is canonical.  Everything is exact over Q.

The module also provides region-wise Laurent expansion (LaurentSlab),
reconstruction of a RatFun from finitely many expansion coefficients under
pole-order and homogeneity bounds, and a graded series reconstruction used
by the correlation-function engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .linear import Q, qstr


class NoSolution(Exception):
    """No rational function with the declared pole caps and degree matches."""


class Underdetermined(Exception):
    """Not enough coefficients at the current truncation; deepen and retry."""


# ---------------------------------------------------------------------------
# sparse polynomials: dict mapping exponent tuple -> Fraction

def p_zero():
    return {}


def p_const(n, c):
    c = Q(c)
    return {(0,) * n: c} if c else {}


def p_add(a, b):
    out = dict(a)
    for m, c in b.items():
        s = out.get(m, Q(0)) + c
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    return out


def p_scale(a, c):
    c = Q(c)
    if not c:
        return {}
    return {m: c * v for m, v in a.items()}


def p_mul(a, b):
    out = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            s = out.get(m, Q(0)) + ca * cb
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def p_eval(a, point):
    tot = Q(0)
    for m, c in a.items():
        v = c
        for e, x in zip(m, point):
            v *= x ** e
        tot += v
    return tot


def p_subst_var(a, i, j):
    """Substitute z_i -> z_j (i != j)."""
    out = {}
    for m, c in a.items():
        lm = list(m)
        lm[j] += lm[i]
        lm[i] = 0
        m2 = tuple(lm)
        s = out.get(m2, Q(0)) + c
        if s:
            out[m2] = s
        else:
            out.pop(m2, None)
    return out


def p_subst_poly(a, i, repl, n_out):
    """Substitute z_i -> repl (a polynomial in the output ring).

    Monomials of ``a`` are reindexed identically except exponent i, which is
    raised through powers of ``repl``.  ``a`` and ``repl`` must already share
    the output ring's variable count ``n_out``.
    """
    powers = {0: p_const(n_out, 1)}
    out = {}
    for m, c in a.items():
        e = m[i]
        if e not in powers:
            k = max(powers)
            cur = powers[k]
            while k < e:
                cur = p_mul(cur, repl)
                k += 1
                powers[k] = cur
        base = tuple(x if t != i else 0 for t, x in enumerate(m))
        for mr, cr in powers[e].items():
            m2 = tuple(x + y for x, y in zip(base, mr))
            s = out.get(m2, Q(0)) + c * cr
            if s:
                out[m2] = s
            else:
                out.pop(m2, None)
    return out


def p_diff(a, i):
    out = {}
    for m, c in a.items():
        if m[i]:
            m2 = tuple(x - 1 if t == i else x for t, x in enumerate(m))
            s = out.get(m2, Q(0)) + c * m[i]
            if s:
                out[m2] = s
    return out


def p_total_degrees(a):
    return {sum(m) for m in a}


def p_divide_pair(a, i, j):
    """Exact quotient of a by (z_i - z_j), or None if not divisible."""
    # synthetic division in z_i at the root z_i = z_j
    by_deg = {}
    for m, c in a.items():
        by_deg.setdefault(m[i], {})[m] = c
    if not by_deg:
        return {}
    top = max(by_deg)
    quot = {}
    carry = {}
    for k in range(top, -1, -1):
        level = by_deg.get(k, {})
        cur = p_add(level, carry)
        if k == 0:
            return None if cur else quot
        for m, c in cur.items():
            mq = tuple(x - 1 if t == i else x for t, x in enumerate(m))
            quot[mq] = quot.get(mq, Q(0)) + c
            if not quot[mq]:
                del quot[mq]
        carry = {}
        for m, c in cur.items():
            m2 = tuple(x - 1 if t == i else (x + 1 if t == j else x)
                       for t, x in enumerate(m))
            s = carry.get(m2, Q(0)) + c
            if s:
                carry[m2] = s
            else:
                carry.pop(m2, None)
    return None if carry else quot


def p_divide_var(a, i):
    """Exact quotient of a by z_i, or None."""
    if any(m[i] == 0 for m in a):
        return None
    return {tuple(x - 1 if t == i else x for t, x in enumerate(m)): c
            for m, c in a.items()}


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatFun:
    """P / (prod (z_i - z_j)^pairs[i,j] * prod z_i^origins[i]), reduced."""

    n: int
    num: tuple  # sorted tuple of (exponent-tuple, Fraction)
    pairs: tuple  # sorted tuple of ((i, j), positive int), i < j
    origins: tuple  # sorted tuple of (i, positive int)

    def poly(self):
        return dict(self.num)

    def pair_map(self):
        return dict(self.pairs)

    def origin_map(self):
        return dict(self.origins)

    def is_zero(self):
        return not self.num


def ratfun(n, num, pairs=None, origins=None) -> RatFun:
    """Canonical constructor: strips zeros and fully reduces."""
    num = {m: Q(c) for m, c in num.items() if c}
    pairs = {k: int(v) for k, v in (pairs or {}).items() if v}
    origins = {k: int(v) for k, v in (origins or {}).items() if v}
    for (i, j) in list(pairs):
        assert 0 <= i < j < n
    if not num:
        return RatFun(n, (), (), ())
    changed = True
    while changed:
        changed = False
        for (i, j), e in list(pairs.items()):
            while e > 0:
                q = p_divide_pair(num, i, j)
                if q is None:
                    break
                num, e, changed = q, e - 1, True
            if e:
                pairs[(i, j)] = e
            else:
                del pairs[(i, j)]
        for i, e in list(origins.items()):
            while e > 0:
                q = p_divide_var(num, i)
                if q is None:
                    break
                num, e, changed = q, e - 1, True
            if e:
                origins[i] = e
            else:
                del origins[i]
    return RatFun(n, tuple(sorted(num.items())), tuple(sorted(pairs.items())),
                  tuple(sorted(origins.items())))


def rf_zero(n):
    return ratfun(n, {})


def rf_const(n, c):
    return ratfun(n, p_const(n, c))


def rf_monomial(n, mono, c=1):
    return ratfun(n, {tuple(mono): Q(c)})


def rf_var(n, i):
    return rf_monomial(n, tuple(1 if t == i else 0 for t in range(n)))


def rf_pole_pair(n, i, j, e=1):
    """1/(z_i - z_j)^e with sign normalization for i > j."""
    sign = 1
    if i > j:
        i, j = j, i
        sign = (-1) ** e
    return RatFun(n, tuple(sorted(p_const(n, sign).items())), (((i, j), e),), ())


def rf_pole_origin(n, i, e=1):
    return RatFun(n, tuple(sorted(p_const(n, 1).items())), (), ((i, e),))


@lru_cache(maxsize=None)
def _factor_poly_cached(n, pairs, origins):
    out = p_const(n, 1)
    for (i, j), e in pairs:
        lin = {tuple(1 if t == i else 0 for t in range(n)): Q(1),
               tuple(1 if t == j else 0 for t in range(n)): Q(-1)}
        for _ in range(e):
            out = p_mul(out, lin)
    for i, e in origins:
        out = p_mul(out, {tuple(e if t == i else 0 for t in range(n)): Q(1)})
    return tuple(sorted(out.items()))


def factor_poly(n, pairs, origins):
    """Expanded denominator polynomial prod (z_i-z_j)^e * prod z_i^e."""
    key_p = tuple(sorted((k, v) for k, v in pairs.items() if v))
    key_o = tuple(sorted((k, v) for k, v in origins.items() if v))
    return dict(_factor_poly_cached(n, key_p, key_o))


def rf_add(f: RatFun, g: RatFun) -> RatFun:
    assert f.n == g.n
    if f.is_zero():
        return g
    if g.is_zero():
        return f
    fp, gp = f.pair_map(), g.pair_map()
    fo, go = f.origin_map(), g.origin_map()
    pairs = {k: max(fp.get(k, 0), gp.get(k, 0)) for k in set(fp) | set(gp)}
    origins = {k: max(fo.get(k, 0), go.get(k, 0)) for k in set(fo) | set(go)}
    cof_f = factor_poly(f.n, {k: pairs[k] - fp.get(k, 0) for k in pairs},
                        {k: origins[k] - fo.get(k, 0) for k in origins})
    cof_g = factor_poly(f.n, {k: pairs[k] - gp.get(k, 0) for k in pairs},
                        {k: origins[k] - go.get(k, 0) for k in origins})
    num = p_add(p_mul(f.poly(), cof_f), p_mul(g.poly(), cof_g))
    return ratfun(f.n, num, pairs, origins)


def rf_neg(f: RatFun) -> RatFun:
    return RatFun(f.n, tuple(sorted((m, -c) for m, c in f.num)), f.pairs, f.origins)


def rf_sub(f, g):
    return rf_add(f, rf_neg(g))


def rf_scale(f: RatFun, c) -> RatFun:
    c = Q(c)
    if not c:
        return rf_zero(f.n)
    return RatFun(f.n, tuple(sorted((m, c * v) for m, v in f.num)), f.pairs, f.origins)


def rf_mul(f: RatFun, g: RatFun) -> RatFun:
    assert f.n == g.n
    if f.is_zero() or g.is_zero():
        return rf_zero(f.n)
    fp, gp = f.pair_map(), g.pair_map()
    fo, go = f.origin_map(), g.origin_map()
    pairs = {k: fp.get(k, 0) + gp.get(k, 0) for k in set(fp) | set(gp)}
    origins = {k: fo.get(k, 0) + go.get(k, 0) for k in set(fo) | set(go)}
    return ratfun(f.n, p_mul(f.poly(), g.poly()), pairs, origins)


def rf_sum(fs, n=None):
    it = list(fs)
    if not it:
        assert n is not None
        return rf_zero(n)
    out = it[0]
    for f in it[1:]:
        out = rf_add(out, f)
    return out


def rf_eval(f: RatFun, point):
    """Exact evaluation at pairwise-distinct nonzero rational coordinates."""
    num = p_eval(f.poly(), point)
    den = Q(1)
    for (i, j), e in f.pairs:
        den *= (point[i] - point[j]) ** e
    for i, e in f.origins:
        den *= point[i] ** e
    return num / den


def sn_act(sigma, f: RatFun) -> RatFun:
    """(sigma(f))(z_1,...,z_n) = f(z_{sigma(1)},...,z_{sigma(n)}).

    sigma is a tuple of length n with 1-based images sigma[k-1] = sigma(k).
    """
    n = f.n
    assert sorted(sigma) == list(range(1, n + 1))
    num = {}
    for m, c in f.num:
        m2 = [0] * n
        for k in range(n):
            m2[sigma[k] - 1] = m[k]
        num[tuple(m2)] = c
    sign = 1
    pairs = {}
    for (i, j), e in f.pairs:
        a, b = sigma[i] - 1, sigma[j] - 1
        if a > b:
            a, b = b, a
            sign *= (-1) ** e
        pairs[(a, b)] = pairs.get((a, b), 0) + e
    origins = {sigma[i] - 1: e for i, e in f.origins}
    if sign == -1:
        num = p_scale(num, -1)
    return ratfun(n, num, pairs, origins)


def homogeneity_degree(f: RatFun):
    """Total degree if f is homogeneous, else None.  Zero gives None."""
    if f.is_zero():
        return None
    degs = {sum(m) for m, _c in f.num}
    if len(degs) != 1:
        return None
    return degs.pop() - sum(e for _k, e in f.pairs) - sum(e for _k, e in f.origins)


def rf_diff(f: RatFun, i) -> RatFun:
    """Partial derivative with respect to z_i."""
    n = f.n
    base = ratfun(n, p_diff(f.poly(), i), f.pair_map(), f.origin_map())
    terms = [base]
    for (a, b), e in f.pairs:
        d = 0
        if a == i:
            d = 1
        elif b == i:
            d = -1
        if d:
            pm = f.pair_map()
            pm[(a, b)] += 1
            terms.append(ratfun(n, p_scale(f.poly(), -e * d), pm, f.origin_map()))
    for a, e in f.origins:
        if a == i:
            om = f.origin_map()
            om[a] += 1
            terms.append(ratfun(n, p_scale(f.poly(), -e), f.pair_map(), om))
    return rf_sum(terms, n)


def rf_lift(f: RatFun, n_new, varmap) -> RatFun:
    """Reindex into a larger ring; varmap[k] is the new index of old var k."""
    num = {}
    for m, c in f.num:
        m2 = [0] * n_new
        for k, e in enumerate(m):
            m2[varmap[k]] = e
        num[tuple(m2)] = c
    sign = 1
    pairs = {}
    for (i, j), e in f.pairs:
        a, b = varmap[i], varmap[j]
        if a > b:
            a, b = b, a
            sign *= (-1) ** e
        pairs[(a, b)] = pairs.get((a, b), 0) + e
    origins = {varmap[i]: e for i, e in f.origins}
    if sign == -1:
        num = p_scale(num, -1)
    return ratfun(n_new, num, pairs, origins)


def rf_set_zero(f: RatFun, i) -> RatFun:
    """Specialize z_i = 0; requires no origin pole and no z_i = z_j pole at i."""
    for a, _e in f.origins:
        if a == i:
            raise NoSolution("specialization at a pole of z_%d" % i)
    origins = f.origin_map()
    sign = 1
    for (a, b), e in f.pairs:
        if a == i:
            # 1/(0 - z_b)^e = (-1)^e / z_b^e
            origins[b] = origins.get(b, 0) + e
            sign *= (-1) ** e
        elif b == i:
            origins[a] = origins.get(a, 0) + e
    pairs = {k: e for k, e in f.pairs if i not in k}
    num = {m: sign * c for m, c in f.num if m[i] == 0}
    return ratfun(f.n, num, pairs, origins)


def rf_drop_var(f: RatFun, i) -> RatFun:
    """Specialize z_i = 0 and remove the variable from the ring."""
    g = rf_set_zero(f, i)
    varmap = [k if k < i else k - 1 for k in range(f.n)]
    num = {tuple(e for t, e in enumerate(m) if t != i): c for m, c in g.num}
    pairs = {}
    for (a, b), e in g.pairs:
        pairs[(varmap[a], varmap[b])] = e
    origins = {varmap[a]: e for a, e in g.origins}
    return ratfun(f.n - 1, num, pairs, origins)


def rf_text(f: RatFun) -> str:
    """Canonical text form, e.g. "(z1^2 - 2*z2^2) / ((z1-z2)^2 * z1)"."""
    if f.is_zero():
        return "0"

    def mono_text(m, c):
        parts = []
        for i, e in enumerate(m):
            if e == 1:
                parts.append("z%d" % (i + 1))
            elif e:
                parts.append("z%d^%d" % (i + 1, e))
        if not parts:
            return qstr(c)
        if c == 1:
            return "*".join(parts)
        if c == -1:
            return "-" + "*".join(parts)
        return qstr(c) + "*" + "*".join(parts)

    terms = [mono_text(m, c) for m, c in sorted(f.num, reverse=True)]
    num = terms[0]
    for t in terms[1:]:
        num += " - " + t[1:] if t.startswith("-") else " + " + t
    dens = []
    for (i, j), e in f.pairs:
        base = "(z%d-z%d)" % (i + 1, j + 1)
        dens.append(base if e == 1 else base + "^%d" % e)
    for i, e in f.origins:
        dens.append("z%d" % (i + 1) if e == 1 else "z%d^%d" % (i + 1, e))
    if not dens:
        return num
    if len(f.num) > 1:
        num = "(" + num + ")"
    den = " * ".join(dens)
    if len(dens) > 1:
        den = "(" + den + ")"
    return num + " / " + den


# ---------------------------------------------------------------------------
# regions and Laurent slabs

@dataclass(frozen=True)
class Region:
    """Expansion region.

    ``order`` lists variable indices from outermost (largest modulus) to
    innermost.  If ``assoc`` is an index j, coordinate j of the slab means
    u = z_j - z_{j+1} (the associativity region |z_{j+1}| > |z_j - z_{j+1}|),
    and j's position in ``order`` places u in the modulus chain.
    """

    order: tuple
    assoc: int | None = None

    def bigger(self, a, b):
        return self.order.index(a) < self.order.index(b)


@dataclass
class LaurentSlab:
    """Window-truncated Laurent expansion.

    coeffs holds the exact coefficient of every exponent vector m with
    lo <= m <= hi componentwise.  sflo/shi are structural support bounds of
    the underlying true expansion (coefficients vanish outside [sflo, shi]);
    BIG sentinels mark unbounded sides.  Slabs from slab_mul only certify
    the coefficients actually stored; their lo/hi box is informational.
    """

    n: int
    coeffs: dict
    lo: tuple
    hi: tuple
    sflo: tuple
    shi: tuple

    def in_box(self, m):
        return all(l <= e <= h for e, l, h in zip(m, self.lo, self.hi))

    def coeff(self, m):
        return self.coeffs.get(tuple(m), Q(0))

    def known(self, m):
        """Coefficient is exactly known: inside the window or off support."""
        return all(l <= e <= h or e < sl or e > sh for e, l, h, sl, sh
                   in zip(m, self.lo, self.hi, self.sflo, self.shi))


BIG = 10 ** 9


def _coord_factors(f: RatFun, region: Region):
    """Rewrite f in the region's coordinate system.

    Returns (num, factors) with num a polynomial in the coordinates and
    factors a list of (big, small_poly, e) meaning 1/(c_big - small_poly)^e
    where every variable of small_poly sits strictly after ``big`` in the
    modulus order.  Signs are folded into num.  When region.assoc == j the
    coordinate j stands for u = z_j - z_{j+1}.
    """
    n = f.n
    j = region.assoc
    num = f.poly()
    sign = 1
    if j is not None:
        repl = {tuple(1 if t == j else 0 for t in range(n)): Q(1),
                tuple(1 if t == j + 1 else 0 for t in range(n)): Q(1)}
        num = p_subst_poly(num, j, repl, n)

    def var_poly(i, c=1):
        return {tuple(1 if t == i else 0 for t in range(n)): Q(c)}

    factors = []

    def emit(big, small, e):
        for m in small:
            if m[big]:
                raise AssertionError("factor small side contains its big variable")
            for t, x in enumerate(m):
                if x and not region.bigger(big, t):
                    raise NoSolution("region order incompatible with pole structure")
        factors.append((big, small, e))

    for (a, b), e in f.pairs:
        if j is not None and (a, b) == (j, j + 1):
            emit(j, {}, e)  # z_j - z_{j+1} = u
        elif j is not None and a == j:
            # z_j - z_b = u + z_{j+1} - z_b
            if region.bigger(j + 1, b):
                emit(j + 1, p_add(var_poly(b), var_poly(j, -1)), e)
            else:
                sign *= (-1) ** e
                emit(b, p_add(var_poly(j + 1), var_poly(j)), e)
        elif j is not None and b == j:
            # z_a - z_j = z_a - z_{j+1} - u
            if region.bigger(a, j + 1):
                emit(a, p_add(var_poly(j + 1), var_poly(j)), e)
            else:
                sign *= (-1) ** e
                emit(j + 1, p_add(var_poly(a), var_poly(j, -1)), e)
        else:
            if region.bigger(a, b):
                emit(a, var_poly(b), e)
            else:
                sign *= (-1) ** e
                emit(b, var_poly(a), e)
    for a, e in f.origins:
        if j is not None and a == j:
            # z_j = u + z_{j+1} = z_{j+1} - (-u)
            emit(j + 1, var_poly(j, -1), e)
        else:
            emit(a, {}, e)
    if sign == -1:
        num = p_scale(num, -1)
    return num, factors


def _window_expand(n, num, factors, order_seq, lo, hi):
    """Exact expansion coefficients on the window lo <= m <= hi.

    The product num * prod 1/(c_big - small)^e is expanded with each big
    variable largest among its factor's variables; order_seq lists the
    remaining coordinates outermost first.
    """
    if not factors:
        return {m: c for m, c in num.items()
                if all(l <= e <= h for e, l, h in zip(m, lo, hi))}
    b = order_seq[0]
    bfac = [f for f in factors if f[0] == b]
    rest = [f for f in factors if f[0] != b]
    if not bfac:
        return _window_expand(n, num, factors, order_seq[1:], lo, hi)
    e_tot = sum(e for _b, _s, e in bfac)
    # split the numerator by its c_b degree
    by_deg = {}
    for m, c in num.items():
        stripped = tuple(0 if t == b else x for t, x in enumerate(m))
        by_deg.setdefault(m[b], {}).setdefault(stripped, Q(0))
        by_deg[m[b]][stripped] += c
    # prefix[E] = polynomial coefficient of c_b^E from num and the b-factors
    prefix = {}
    small_pows = []
    for _b, small, e in bfac:
        small_pows.append((e, small, [p_const(n, 1)]))

    def small_term(fi, k):
        e, small, pows = small_pows[fi]
        while len(pows) <= k:
            pows.append(p_mul(pows[-1], small))
        return p_scale(pows[k], math.comb(e - 1 + k, k))

    for d, dnum in by_deg.items():
        dnum = {m: c for m, c in dnum.items() if c}
        if not dnum:
            continue
        kmax = d - e_tot - lo[b]
        if kmax < 0:
            continue

        def rec(fi, ksum, acc):
            if fi == len(bfac):
                E = d - e_tot - ksum
                if E > hi[b]:
                    return
                tgt = prefix.setdefault(E, {})
                for m, c in acc.items():
                    s = tgt.get(m, Q(0)) + c
                    if s:
                        tgt[m] = s
                    else:
                        tgt.pop(m, None)
                return
            for k in range(kmax - ksum + 1):
                term = small_term(fi, k)
                if not term:
                    if k == 0:
                        break
                    continue
                rec(fi + 1, ksum + k, p_mul(acc, term))

        rec(0, 0, dnum)
    prefix = {E: p for E, p in prefix.items() if p}
    if not prefix:
        return {}
    # widen the window for the recursive factor product
    pmax = [0] * n
    for p in prefix.values():
        for m in p:
            for t in range(n):
                pmax[t] = max(pmax[t], m[t])
    lo2 = tuple((l - pm) if t != b else 0
                for t, (l, pm) in enumerate(zip(lo, pmax)))
    hi2 = tuple(h if t != b else 0 for t, h in enumerate(hi))
    sub = _window_expand(n, p_const(n, 1), rest, order_seq[1:], lo2, hi2)
    out = {}
    for E, p in prefix.items():
        for m1, c1 in p.items():
            for m2, c2 in sub.items():
                m = tuple((x + y) if t != b else E
                          for t, (x, y) in enumerate(zip(m1, m2)))
                if not all(l <= e <= h for e, l, h in zip(m, lo, hi)):
                    continue
                s = out.get(m, Q(0)) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
    return out


def _structural_bounds(n, num, factors):
    """Per-variable support bounds of the true expansion, with BIG sentinels."""
    if not num:
        return (0,) * n, (0,) * n
    big_of = {}
    small_vars = set()
    for big, small, e in factors:
        big_of[big] = big_of.get(big, 0) + e
        for m in small:
            for t, x in enumerate(m):
                if x:
                    small_vars.add(t)
    sflo, shi = [], []
    for t in range(n):
        nmin = min(m[t] for m in num)
        nmax = max(m[t] for m in num)
        sflo.append(-BIG if t in big_of else nmin)
        shi.append(BIG if t in small_vars else nmax - big_of.get(t, 0))
    return tuple(sflo), tuple(shi)


def expand(f: RatFun, region: Region, order: int) -> LaurentSlab:
    """Region expansion of f, exact on the slab's window."""
    n = f.n
    assert sorted(region.order) == list(range(n))
    num, factors = _coord_factors(f, region)
    invol = [0] * n
    bigexp = [0] * n
    for big, small, e in factors:
        invol[big] += e
        bigexp[big] += e
        for m in small:
            for t, x in enumerate(m):
                if x:
                    invol[t] += e
    lo = tuple(-iv - order for iv in invol)
    hi = tuple(order for _ in range(n))
    coeffs = _window_expand(n, num, factors, region.order, lo, hi)
    sflo, shi = _structural_bounds(n, num, factors)
    return LaurentSlab(n, coeffs, lo, hi, sflo, shi)


def slab_mul(s1: LaurentSlab, s2: LaurentSlab) -> LaurentSlab:
    """Convolution keeping only certifiably complete coefficients.

    A product coefficient is kept when interval reasoning on the factors'
    structural supports confines every contributing split to the stored
    windows.
    """
    assert s1.n == s2.n
    n = s1.n
    out = {}
    for m1, c1 in s1.coeffs.items():
        for m2, c2 in s2.coeffs.items():
            m = tuple(x + y for x, y in zip(m1, m2))
            s = out.get(m, Q(0)) + c1 * c2
            if s:
                out[m] = s
            else:
                out.pop(m, None)

    def certified(m):
        for t in range(n):
            a_lo = max(s1.sflo[t], m[t] - s2.shi[t])
            a_hi = min(s1.shi[t], m[t] - s2.sflo[t])
            if a_lo > a_hi:
                continue  # no true splits touch this coordinate: coeff 0
            if not (s1.lo[t] <= a_lo and a_hi <= s1.hi[t]):
                return False
            if not (s2.lo[t] <= m[t] - a_hi and m[t] - a_lo <= s2.hi[t]):
                return False
        return True

    kept = {m: c for m, c in out.items() if certified(m)}
    sflo = tuple(max(-BIG, a + b) if a != -BIG and b != -BIG else -BIG
                 for a, b in zip(s1.sflo, s2.sflo))
    shi = tuple(min(BIG, a + b) if a != BIG and b != BIG else BIG
                for a, b in zip(s1.shi, s2.shi))
    if kept:
        lo = tuple(min(m[t] for m in kept) for t in range(n))
        hi = tuple(max(m[t] for m in kept) for t in range(n))
    else:
        lo = (BIG,) * n
        hi = (-BIG,) * n
    return LaurentSlab(n, kept, lo, hi, sflo, shi)


def reconstruct(slab: LaurentSlab, region: Region, pair_caps, origin_caps,
                degree, verify=True) -> RatFun:
    """The unique RatFun with the given pole caps and homogeneity degree
    whose region expansion matches the slab.  Exact; never guesses: raises
    Underdetermined when the window cannot decide and NoSolution when no
    such rational function exists.
    """
    n = slab.n
    pair_caps = {k: v for k, v in dict(pair_caps).items() if v}
    origin_caps = {k: v for k, v in dict(origin_caps).items() if v}
    den_z = factor_poly(n, pair_caps, origin_caps)
    j = region.assoc
    if j is None:
        den = den_z
    else:
        # rewrite the denominator in region coordinates: z_j = u + z_{j+1}
        repl = {tuple(1 if t == j else 0 for t in range(n)): Q(1),
                tuple(1 if t == j + 1 else 0 for t in range(n)): Q(1)}
        den = p_subst_poly(den_z, j, repl, n)
    dP = degree + sum(pair_caps.values()) + sum(origin_caps.values())
    if dP < 0:
        if any(c for c in slab.coeffs.values()):
            raise NoSolution("negative numerator degree with nonzero slab")
        return rf_zero(n)
    dmax = [0] * n
    for m in den:
        for t in range(n):
            dmax[t] = max(dmax[t], m[t])
    for t in range(n):
        # numerator monomials are read through slab values on [-dmax, dP]
        read_lo = max(-dmax[t], slab.sflo[t])
        read_hi = min(dP, slab.shi[t])
        if read_lo <= read_hi and not (slab.lo[t] <= read_lo
                                       and read_hi <= slab.hi[t]):
            raise Underdetermined(
                "slab window [%d, %d] on variable %d does not cover [%d, %d]"
                % (slab.lo[t], slab.hi[t], t + 1, read_lo, read_hi))
    prod = {}
    for m1, c1 in slab.coeffs.items():
        for m2, c2 in den.items():
            m = tuple(x + y for x, y in zip(m1, m2))
            s = prod.get(m, Q(0)) + c1 * c2
            if s:
                prod[m] = s
            else:
                prod.pop(m, None)

    def complete(m):
        for m2 in den:
            if not slab.known(tuple(x - y for x, y in zip(m, m2))):
                return False
        return True

    num = {}
    for m, c in prod.items():
        if all(e >= 0 for e in m) and sum(m) == dP:
            num[m] = c
        elif c and complete(m):
            raise NoSolution("stray expansion term at %s" % (m,))
    if j is not None:
        # numerator currently in coordinates with c_j = u = z_j - z_{j+1}
        repl = {tuple(1 if t == j else 0 for t in range(n)): Q(1),
                tuple(1 if t == j + 1 else 0 for t in range(n)): Q(-1)}
        num = p_subst_poly(num, j, repl, n)
    out = ratfun(n, num, pair_caps, origin_caps)
    if verify:
        back = expand(out, region, max(2, max(dmax) + abs(degree) + 2))
        for m, c in slab.coeffs.items():
            if back.known(m) and back.coeff(m) != c:
                raise NoSolution("expansion mismatch at %s" % (m,))
        for m, c in back.coeffs.items():
            if slab.known(m) and slab.coeff(m) != c:
                raise NoSolution("expansion mismatch at %s" % (m,))
    return out


# ---------------------------------------------------------------------------
# graded series reconstruction
#
# A rational function F with known denominator Den is recovered from the
# graded components of a series expansion: components[e] is the exact
# block-degree-e part of F, Den is supplied as block-graded parts
# den_parts[m], and the product P = F * Den is a "polynomial" (no block
# poles) with block degrees in [0, dP].  Known components cover e >= lo
# (direction 'up') or e <= hi (direction 'down'); outside the given keys the
# components vanish identically.

def graded_series_to_poly(n, components, den_parts, dP, direction, bound,
                          hi_known=None):
    """Sum of the block-degree components of P = (sum components) * Den.

    Returns the RatFun sum of P's graded parts.  Raises Underdetermined if
    the known window cannot certify all of P's degrees [0, dP], NoSolution
    if a certified component outside [0, dP] is nonzero.
    """
    if not components or all(f.is_zero() for f in components.values()):
        return rf_zero(n)
    m_min = min(den_parts)
    m_max = max(den_parts)
    if direction == 'up':
        lo = bound
        if lo + m_max > 0:
            raise Underdetermined("series known from %d; need %d" % (lo, -m_max))
        if hi_known is not None and hi_known + m_min < dP:
            raise Underdetermined("series known to %d; need %d"
                                  % (hi_known, dP - m_min))
        top = BIG if hi_known is None else hi_known + m_min
        exact = lambda e: lo + m_max <= e <= top
    else:
        hi = bound
        if hi + m_min < dP:
            raise Underdetermined("series known to %d; need %d" % (hi, dP - m_min))
        exact = lambda e: e <= hi + m_min
    tdeg = {}
    for m, dm in den_parts.items():
        for d, cd in components.items():
            e = m + d
            if not exact(e):
                continue
            t = rf_mul(dm, cd)
            tdeg[e] = rf_add(tdeg[e], t) if e in tdeg else t
    out = rf_zero(n)
    for e, t in tdeg.items():
        if 0 <= e <= dP:
            out = rf_add(out, t)
        elif not t.is_zero():
            raise NoSolution("nonzero graded component at degree %d" % e)
    return out

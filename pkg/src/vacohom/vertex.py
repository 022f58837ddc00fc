"""Grading-restricted vertex algebras and modules as executable objects.

A space is presented by structure constants: basis keys are (weight, index)
pairs, and mode(u_key, n, w_key) returns the sparse coefficients of
(Y)_n(u)w.  Built-ins generate their tables lazily from commutation
relations and can extend past the declared cutoff; JSON-loaded specs have
fixed finite tables and flag truncation instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .linear import Q, GradedVector, qparse, qstr


@dataclass
class VertexSpec:
    """Structure-constant presentation of an algebra or module."""

    name: str
    kind: str  # 'algebra' or 'module'
    cutoff: Fraction
    generator: bool  # table extends lazily beyond cutoff
    dims_fn: object  # weight -> int
    weights_fn: object  # wmax -> sorted weights with dim > 0
    mode_fn: object  # (u_key, n, w_key) -> {key: Fraction}
    lm1_fn: object  # key -> {key: Fraction}
    vacuum: tuple = None
    algebra: "VertexSpec" = None
    l0_nilp: object = None  # key -> {key: Fraction}; None means semisimple

    def dim(self, wt):
        return self.dims_fn(Q(wt))

    def weights(self, wmax=None):
        return self.weights_fn(Q(wmax) if wmax is not None else self.cutoff)

    def basis_keys(self, wmax=None):
        for wt in self.weights(wmax):
            for i in range(self.dim(wt)):
                yield (wt, i)

    def mode(self, u_key, n, w_key):
        return self.mode_fn(u_key, n, w_key)

    def mode_exact(self, u_key, n, w_key):
        """Whether the table certifies this entry (vs. truncated away)."""
        if self.generator:
            return True
        tgt = u_key[0] + w_key[0] - n - 1
        return (u_key[0] <= self.cutoff and w_key[0] <= self.cutoff
                and tgt <= self.cutoff)

    def lm1(self, key):
        return self.lm1_fn(key)

    def semisimple_l0(self):
        return self.l0_nilp is None

    def vec(self, coeffs, cutoff=None):
        return GradedVector(self.name, coeffs,
                            self.cutoff if cutoff is None else Q(cutoff))

    def basis_vec(self, key):
        return self.vec({key: Q(1)})

    def vacuum_vec(self):
        return self.vec({self.vacuum: Q(1)})


def mode_act(space: VertexSpec, u: GradedVector, n: int, w: GradedVector) -> GradedVector:
    """(Y)_n(u)w extended bilinearly; truncation above cutoff is flagged."""
    out = {}
    truncated = u.truncated or w.truncated
    for uk, cu in u.coeffs.items():
        for wk, cw in w.coeffs.items():
            if not space.mode_exact(uk, n, wk):
                truncated = True
            for rk, c in space.mode(uk, n, wk).items():
                s = out.get(rk, Q(0)) + cu * cw * c
                if s:
                    out[rk] = s
                else:
                    out.pop(rk, None)
    v = space.vec(out)
    v.truncated = v.truncated or truncated
    return v


def lm1_act(space: VertexSpec, w: GradedVector) -> GradedVector:
    out = {}
    for wk, cw in w.coeffs.items():
        for rk, c in space.lm1(wk).items():
            s = out.get(rk, Q(0)) + cw * c
            if s:
                out[rk] = s
            else:
                out.pop(rk, None)
    v = space.vec(out)
    v.truncated = v.truncated or w.truncated
    return v


def translate(space: VertexSpec, order: int, w: GradedVector):
    """Coefficients of e^{zL(-1)}w: [w, L(-1)w, L(-1)^2 w/2, ...] up to z^order."""
    out = [w]
    cur = w
    for k in range(1, order + 1):
        cur = lm1_act(space, cur).scale(Q(1, k))
        out.append(cur)
    return out


def skew_vertex(module: VertexSpec, w: GradedVector, v: GradedVector, wt_cap):
    """Series coefficients of Y^W_WV(w, z)v = e^{zL(-1)} Y_W(v, -z) w.

    Returns {exponent e: GradedVector} for all coefficients of weight at
    most wt_cap.  v lives in the algebra, w in the module; the result lives
    in the module.
    """
    wt_cap = Q(wt_cap)
    out = {}
    base = {}
    # Y_W(v, -z) w = sum_j (-1)^{j+1} (Y_W)_j(v) w z^{-j-1}
    for vk, cv in v.coeffs.items():
        for wk, cw in w.coeffs.items():
            jmax = int(vk[0] + wk[0] - module_min_weight(module)) + 1
            j = -int(wt_cap - vk[0] - wk[0]) - 1
            for j in range(j, jmax + 1):
                md = module.mode(vk, j, wk)
                if not md:
                    continue
                e = -j - 1
                acc = base.setdefault(e, {})
                sgn = -1 if (j + 1) % 2 else 1
                for rk, c in md.items():
                    s = acc.get(rk, Q(0)) + sgn * cv * cw * c
                    if s:
                        acc[rk] = s
                    else:
                        acc.pop(rk, None)
    for e0, coeffs in sorted(base.items()):
        vec = module.vec(coeffs, cutoff=wt_cap)
        term = vec
        e = e0
        while True:
            if not term.is_zero():
                out[e] = out.get(e, module.vec({}, cutoff=wt_cap)).add(term)
            nxt = lm1_act(module, term).scale(Q(1, e - e0 + 1))
            nxt = module.vec(nxt.coeffs, cutoff=wt_cap)
            if nxt.is_zero():
                break
            term, e = nxt, e + 1
    return {e: v for e, v in out.items() if not v.is_zero()}


def module_min_weight(space: VertexSpec):
    ws = space.weights()
    return ws[0] if ws else Q(0)


# ---------------------------------------------------------------------------
# pole bounds

@dataclass
class PoleBound:
    """Smallest N with (Y)_n(u)v = 0 for all n >= N, read off the tables."""

    specV: VertexSpec
    specW: VertexSpec
    _n_cache: dict = field(default_factory=dict)
    _k_cache: dict = field(default_factory=dict)

    def N(self, u_key, v_key):
        key = (u_key, v_key)
        if key not in self._n_cache:
            jmax = int(u_key[0] + v_key[0]) - 1  # below weight 0 all modes die
            n = 0
            for j in range(jmax, -1, -1):
                if self.specV.mode(u_key, j, v_key):
                    n = j + 1
                    break
            self._n_cache[key] = n
        return self._n_cache[key]

    def NW(self, u_key, w_key):
        key = (u_key, w_key)
        if key not in self._k_cache:
            jmax = int(u_key[0] + w_key[0] - module_min_weight(self.specW))
            n = 0
            for j in range(jmax, -1, -1):
                if self.specW.mode(u_key, j, w_key):
                    n = j + 1
                    break
            self._k_cache[key] = n
        return self._k_cache[key]

    def K(self, u_key):
        best = 0
        for w_key in self.specW.basis_keys():
            best = max(best, self.NW(u_key, w_key))
        return best


def pole_bounds(specV: VertexSpec, specW: VertexSpec = None) -> PoleBound:
    return PoleBound(specV, specW if specW is not None else specV)


# ---------------------------------------------------------------------------
# built-in: rank-1 Heisenberg (free boson), <alpha, alpha> = 1

def partitions_of(n):
    """Partitions of n as descending tuples, sorted descending-lex."""
    if n == 0:
        return [()]
    out = []

    def rec(rem, mx, acc):
        if rem == 0:
            out.append(tuple(acc))
            return
        for p in range(min(rem, mx), 0, -1):
            acc.append(p)
            rec(rem - p, p, acc)
            acc.pop()

    rec(n, n, [])
    return out


def heisenberg(cutoff=8) -> VertexSpec:
    """Rank-1 Heisenberg vertex algebra on its Fock space.

    Basis of weight n: partitions of n, a partition (p_1 >= p_2 >= ...)
    standing for alpha(-p_1)...alpha(-p_k) |0>.  Commutators
    [alpha_m, alpha_n] = m delta_{m+n,0} generate the mode table.
    """
    cutoff = Q(cutoff)
    parts = {}
    index = {}

    def plist(n):
        if n not in parts:
            parts[n] = partitions_of(n)
            index[n] = {p: i for i, p in enumerate(parts[n])}
        return parts[n]

    def key_of(p):
        w = sum(p)
        plist(w)
        return (Q(w), index[w][p])

    def part_of(key):
        return plist(int(key[0]))[key[1]]

    # structure constants are integers; Fractions appear only at the
    # public mode_fn boundary
    def alpha_act(m, vec):
        """alpha_m applied to a dict partition -> int coeff."""
        if m == 0:
            return {}
        out = {}
        for p, c in vec.items():
            if m < 0:
                p2 = tuple(sorted(p + (-m,), reverse=True))
                out[p2] = out.get(p2, 0) + c
            else:
                mult = p.count(m)
                if mult:
                    q = list(p)
                    q.remove(m)
                    p2 = tuple(q)
                    out[p2] = out.get(p2, 0) + m * mult * c
        return {p: c for p, c in out.items() if c}

    memo = {}

    def ymode(u, j, v):
        """(Y)_j(u)v on partitions; returns dict partition -> int coeff."""
        key = (u, j, v)
        if key in memo:
            return memo[key]
        if not u:
            res = {v: 1} if j == -1 else {}
            memo[key] = res
            return res
        n1, rest = u[0], u[1:]
        wr, wv = sum(rest), sum(v)
        out = {}
        # creation part: m <= -n1, coefficient C(-m-1, n1-1)
        for k in range(j, wr + wv):
            inner = ymode(rest, k, v)
            if not inner:
                continue
            m = j - n1 - k
            if m > -n1:
                continue
            coef = math.comb(-m - 1, n1 - 1)
            for p, c in alpha_act(m, inner).items():
                out[p] = out.get(p, 0) + coef * c
        # annihilation part: m >= 0, coefficient (-1)^{n1-1} C(m+n1-1, n1-1)
        for m in sorted(set(v)):
            av = alpha_act(m, {v: 1})
            if not av:
                continue
            k = j - m - n1
            coef = (-1) ** (n1 - 1) * math.comb(m + n1 - 1, n1 - 1)
            for p0, c0 in av.items():
                for p, c in ymode(rest, k, p0).items():
                    out[p] = out.get(p, 0) + coef * c0 * c
        res = {p: c for p, c in out.items() if c}
        memo[key] = res
        return res

    def lm1_part(vec):
        """L(-1) on a dict partition -> coeff (alpha(-p) -> p alpha(-p-1))."""
        out = {}
        for p, c in vec.items():
            for i in range(len(p)):
                q = list(p)
                q[i] += 1
                p2 = tuple(sorted(q, reverse=True))
                out[p2] = out.get(p2, 0) + p[i] * c
        return {p: c for p, c in out.items() if c}

    smart_cache = {}

    def ymode_smart(u, j, v):
        """(Y)_j(u)v, routed through skew-symmetry when v is the lighter
        side: (Y)_j(u)v = sum_k (-1)^{j+k+1} L(-1)^k/k! (Y)_{j+k}(v)u."""
        if sum(u) <= sum(v):
            return ymode(u, j, v)
        key = (u, j, v)
        if key in smart_cache:
            return smart_cache[key]
        out = {}
        for m in range(j, sum(u) + sum(v)):
            term = ymode(v, m, u)
            if not term:
                continue
            k = m - j
            for _ in range(k):
                term = lm1_part(term)
            sgn = -1 if (m + 1) % 2 else 1
            for p, c in term.items():
                q = Q(sgn * c, math.factorial(k))
                s = out.get(p, 0) + q
                if s:
                    out[p] = s
                else:
                    out.pop(p, None)
        smart_cache[key] = out
        return out

    def alpha_T(m, psi):
        """Transpose of alpha_m on functionals (dict partition -> coeff):
        (alpha_m^T psi)(v) = psi(alpha_m v)."""
        if m == 0:
            return {}
        out = {}
        for p, c in psi.items():
            if m < 0:
                n = -m
                if n in p:
                    q = list(p)
                    q.remove(n)
                    p2 = tuple(q)
                    out[p2] = out.get(p2, 0) + c
            else:
                p2 = tuple(sorted(p + (m,), reverse=True))
                out[p2] = out.get(p2, 0) + m * (p.count(m) + 1) * c
        return {p: c for p, c in out.items() if c}

    dual_memo = {}

    def dual_ymode(u, j, psi):
        """psi o (Y)_j(u) as a functional dict partition -> coeff.

        Mirrors the ymode recursion with each composition transposed, so a
        dual vector is pushed through the mode without sweeping the target
        basis."""
        if not psi:
            return {}
        if not u:
            return dict(psi) if j == -1 else {}
        key = (u, j, tuple(sorted(psi.items())))
        if key in dual_memo:
            return dual_memo[key]
        n1, rest = u[0], u[1:]
        wpsi = sum(next(iter(psi)))
        wr = sum(rest)
        out = {}
        # creation part transposed: (Y)_k(rest)^T o alpha_m^T, m <= -n1
        for m in {-n for p in psi for n in set(p)}:
            if m > -n1:
                continue
            apsi = alpha_T(m, psi)
            if not apsi:
                continue
            coef = math.comb(-m - 1, n1 - 1)
            for p, c in dual_ymode(rest, j - n1 - m, apsi).items():
                out[p] = out.get(p, 0) + coef * c
        # annihilation part transposed: alpha_m^T o (Y)_k(rest)^T, m >= 1
        sgn = -1 if (n1 - 1) % 2 else 1
        for m in range(1, j - n1 + wpsi - wr + 2):
            inner = dual_ymode(rest, j - m - n1, psi)
            if not inner:
                continue
            coef = sgn * math.comb(m + n1 - 1, n1 - 1)
            for p, c in alpha_T(m, inner).items():
                out[p] = out.get(p, 0) + coef * c
        res = {p: c for p, c in out.items() if c}
        dual_memo[key] = res
        return res

    dual_cache = {}

    def dual_mode_fn(u_key, n, psi_items):
        """Functional b |-> <psi, (Y)_n(u) b> as dict key -> coeff."""
        ck = (part_of(u_key), n, psi_items)
        if ck not in dual_cache:
            psi = {part_of(k): c for k, c in psi_items}
            res = dual_ymode(ck[0], n, psi)
            dual_cache[ck] = {key_of(p): Q(c) for p, c in res.items()}
        return dual_cache[ck]

    mode_cache = {}

    def mode_fn(u_key, n, w_key):
        ck = (part_of(u_key), n, part_of(w_key))
        if ck not in mode_cache:
            res = ymode_smart(*ck)
            mode_cache[ck] = {key_of(p): Q(c) for p, c in res.items()}
        return mode_cache[ck]

    def lm1_fn(key):
        p = part_of(key)
        out = {}
        for i in range(len(p)):
            q = list(p)
            q[i] += 1
            k2 = key_of(tuple(sorted(q, reverse=True)))
            out[k2] = out.get(k2, Q(0)) + Q(p[i])
        return {k: c for k, c in out.items() if c}

    spec = VertexSpec(
        name="heisenberg",
        kind="algebra",
        cutoff=cutoff,
        generator=True,
        dims_fn=lambda wt: (len(plist(int(wt)))
                            if wt >= 0 and wt.denominator == 1 else 0),
        weights_fn=lambda wmax: [Q(k) for k in range(int(wmax) + 1)],
        mode_fn=mode_fn,
        lm1_fn=lm1_fn,
        vacuum=(Q(0), 0),
    )
    spec.algebra = spec
    spec.key_of_partition = key_of
    spec.partition_of_key = part_of
    spec.dual_mode_fn = dual_mode_fn
    return spec


# ---------------------------------------------------------------------------
# built-in: commutative associative algebra with derivation (pole-free)

def commutative_algebra(nil=9) -> VertexSpec:
    """A = Q[t]/(t^nil) with wt t^k = k, derivation D = t^2 d/dt.

    Y(u, x)v = (e^{xD}u)v; all modes are in nonnegative powers of x, so
    correlation functions have no poles at all.
    """
    nil = int(nil)
    cutoff = Q(nil - 1)

    def mode_fn(u_key, n, w_key):
        a, b = int(u_key[0]), int(w_key[0])
        if n > -1:
            return {}
        k = -n - 1
        # D^k(t^a)/k! = C(a+k-1, k) t^{a+k}
        if a == 0:
            return {(Q(b), 0): Q(1)} if k == 0 else {}
        tgt = a + b + k
        if tgt >= nil:
            return {}
        return {(Q(tgt), 0): Q(math.comb(a + k - 1, k))}

    def lm1_fn(key):
        a = int(key[0])
        if a == 0 or a + 1 >= nil:
            return {}
        return {(Q(a + 1), 0): Q(a)}

    spec = VertexSpec(
        name="commutative",
        kind="algebra",
        cutoff=cutoff,
        generator=True,
        dims_fn=lambda wt: 1 if 0 <= wt <= cutoff and wt.denominator == 1 else 0,
        weights_fn=lambda wmax: [Q(k) for k in range(int(min(wmax, cutoff)) + 1)],
        mode_fn=mode_fn,
        lm1_fn=lm1_fn,
        vacuum=(Q(0), 0),
    )
    spec.algebra = spec
    return spec


# ---------------------------------------------------------------------------
# axiom verification

@dataclass
class AxiomReport:
    space: str
    weight_max: Fraction
    results: list = field(default_factory=list)  # (axiom, ok, witness)

    def record(self, axiom, ok, witness=None):
        self.results.append((axiom, bool(ok), witness))

    def passed(self):
        return all(ok for _a, ok, _w in self.results)

    def failures(self):
        return [(a, w) for a, ok, w in self.results if not ok]


def check_axioms(spec: VertexSpec, weight_max, duality=True) -> AxiomReport:
    """Executable form of the defining axioms over basis inputs of weight
    at most weight_max.  Failures carry witnesses; nothing raises.
    """
    weight_max = Q(weight_max)
    alg = spec.algebra
    rep = AxiomReport(spec.name, weight_max)
    keys = list(spec.basis_keys(weight_max))
    akeys = list(alg.basis_keys(weight_max))
    vac = alg.vacuum

    # identity: (Y)_n(1)w = delta_{n,-1} w
    ok, wit = True, None
    for wk in keys:
        top = int(vac[0] + wk[0]) + 1
        for n in range(-int(weight_max) - 2, top + 1):
            got = spec.mode(vac, n, wk)
            want = {wk: Q(1)} if n == -1 else {}
            if got != want:
                ok, wit = False, ("identity", wk, n, got)
                break
        if not ok:
            break
    rep.record("identity", ok, wit)

    if spec.kind == "algebra":
        # creation: Y(u, x)1 regular at 0 with limit u
        ok, wit = True, None
        for uk in keys:
            for n in range(0, int(uk[0]) + 2):
                if spec.mode(uk, n, vac):
                    ok, wit = False, ("creation-pole", uk, n)
                    break
            if spec.mode(uk, -1, vac) != {uk: Q(1)}:
                ok, wit = False, ("creation-limit", uk, spec.mode(uk, -1, vac))
            if not ok:
                break
        rep.record("creation", ok, wit)

    # lower truncation: modes vanish for n >= wt u + wt w (weight < 0 target)
    ok, wit = True, None
    for uk in akeys:
        for wk in keys:
            top = int(uk[0] + wk[0] - module_min_weight(spec))
            for n in range(top, top + 3):
                if spec.mode(uk, n, wk):
                    ok, wit = False, ("lower-truncation", uk, n, wk)
                    break
    rep.record("lower-truncation", ok, wit)

    # grading bookkeeping: wt((Y)_n(u)w) = wt u + wt w - n - 1
    ok, wit = True, None
    for uk in akeys:
        for wk in keys:
            top = int(uk[0] + wk[0] - module_min_weight(spec)) + 1
            for n in range(-int(weight_max) - 2, top):
                for rk in spec.mode(uk, n, wk):
                    if rk[0] != uk[0] + wk[0] - n - 1:
                        ok, wit = False, ("grading", uk, n, wk, rk)
    rep.record("grading", ok, wit)

    # L(0)-bracket: [L(0), (Y)_n(u)] = (wt u - n - 1)(Y)_n(u) on homogeneous
    # inputs; with semisimple L(0) this is weight bookkeeping, checked above
    # through the grading axiom; non-semisimple parts are out of scope.
    rep.record("l0-bracket", spec.semisimple_l0() and not rep.failures(),
               None if spec.semisimple_l0() else ("non-semisimple L(0)",))

    # L(-1)-derivative: (Y)_n(L(-1)u)w = -n (Y)_{n-1}(u)w
    ok, wit = True, None
    for uk in akeys:
        lm1u = alg.lm1(uk)
        for wk in keys:
            top = int(uk[0] + wk[0] - module_min_weight(spec)) + 2
            for n in range(-int(weight_max) - 2, top):
                lhs = {}
                for uk2, c2 in lm1u.items():
                    for rk, c in spec.mode(uk2, n, wk).items():
                        lhs[rk] = lhs.get(rk, Q(0)) + c2 * c
                lhs = {k: c for k, c in lhs.items() if c}
                rhs = {k: Q(-n) * c for k, c in spec.mode(uk, n - 1, wk).items()
                       if Q(-n) * c}
                if lhs != rhs:
                    ok, wit = False, ("lm1-derivative", uk, n, wk, lhs, rhs)
    rep.record("lm1-derivative", ok, wit)

    if spec.kind == "algebra":
        # L(-1)v = (Y)_{-2}(v)1
        ok, wit = True, None
        for uk in keys:
            if spec.mode(uk, -2, vac) != {k: c for k, c in alg.lm1(uk).items()}:
                ok, wit = False, ("lm1-creation", uk)
        rep.record("lm1-creation", ok, wit)

        # skew-symmetry: Y(u, z)v = e^{zL(-1)} Y(v, -z) u coefficientwise
        ok, wit = True, None
        cap = 2 * weight_max
        for uk in keys:
            for vk in keys:
                u, v = spec.basis_vec(uk), spec.basis_vec(vk)
                skew = skew_vertex(spec, u, v, cap)
                top = int(uk[0] + vk[0]) + 1
                for n in range(-int(cap) - 1, top):
                    direct = spec.vec(
                        {k: c for k, c in spec.mode(uk, n, vk).items()},
                        cutoff=cap)
                    other = skew.get(-n - 1, spec.vec({}, cutoff=cap))
                    if direct.coeffs != other.coeffs:
                        ok, wit = False, ("skew-symmetry", uk, vk, n)
        rep.record("skew-symmetry", ok, wit)

    if duality:
        from .correlators import verify_commutativity, verify_associativity, CorrContext
        ctx = CorrContext(alg, spec)
        ok, wit = True, None
        pairs = [(uk, vk) for uk in akeys for vk in akeys]
        for uk, vk in pairs:
            for wk in keys:
                for dual in spec.basis_keys(weight_max):
                    r1 = verify_commutativity(ctx, [uk, vk], wk, dual, (2, 1))
                    if not r1[0]:
                        ok, wit = False, ("duality-comm", uk, vk, wk, dual)
                        break
                    r2 = verify_associativity(ctx, 1, [uk, vk], wk, dual)
                    if not r2[0]:
                        ok, wit = False, ("duality-asso", uk, vk, wk, dual)
                        break
                if not ok:
                    break
            if not ok:
                break
        rep.record("duality", ok, wit)
    return rep


# ---------------------------------------------------------------------------
# JSON interface

def spec_to_json(spec: VertexSpec, weight_max=None) -> dict:
    """Serialize a spec's table up to weight_max (default: its cutoff)."""
    wmax = Q(weight_max) if weight_max is not None else spec.cutoff
    alg = spec.algebra
    keys = list(spec.basis_keys(wmax))
    akeys = list(alg.basis_keys(wmax))
    modes = []
    for uk in akeys:
        for wk in keys:
            top = int(uk[0] + wk[0] - module_min_weight(spec)) + 1
            lo = -int(wmax - uk[0] - wk[0]) - 1
            for n in range(lo, top):
                md = spec.mode(uk, n, wk)
                md = {k: c for k, c in md.items() if k[0] <= wmax}
                if md:
                    modes.append([[qstr(uk[0]), uk[1]], n, [qstr(wk[0]), wk[1]],
                                  [[qstr(k[0]), k[1], qstr(c)]
                                   for k, c in sorted(md.items())]])
    lm1 = []
    for wk in keys:
        img = {k: c for k, c in spec.lm1(wk).items() if k[0] <= wmax}
        if img:
            lm1.append([[qstr(wk[0]), wk[1]],
                        [[qstr(k[0]), k[1], qstr(c)] for k, c in sorted(img.items())]])
    doc = {
        "name": spec.name,
        "kind": spec.kind,
        "weights": [qstr(w) for w in spec.weights(wmax)],
        "dims": {qstr(w): spec.dim(w) for w in spec.weights(wmax)},
        "modes": modes,
        "L0": "semisimple",
        "Lm1": lm1,
        "cutoff": qstr(wmax),
    }
    if spec.kind == "algebra":
        doc["vacuum"] = [qstr(spec.vacuum[0]), spec.vacuum[1]]
    return doc


def spec_from_json(doc: dict, algebra: VertexSpec = None) -> VertexSpec:
    dims = {qparse(w): int(d) for w, d in doc["dims"].items()}
    table = {}
    for u, n, w, img in doc["modes"]:
        uk = (qparse(u[0]), int(u[1]))
        wk = (qparse(w[0]), int(w[1]))
        table[(uk, int(n), wk)] = {(qparse(a), int(b)): qparse(c)
                                   for a, b, c in img}
    lm1 = {}
    for w, img in doc.get("Lm1", []):
        wk = (qparse(w[0]), int(w[1]))
        lm1[wk] = {(qparse(a), int(b)): qparse(c) for a, b, c in img}
    weights = sorted(dims)

    spec = VertexSpec(
        name=doc.get("name", "loaded"),
        kind=doc.get("kind", "algebra"),
        cutoff=qparse(doc["cutoff"]),
        generator=False,
        dims_fn=lambda wt: dims.get(wt, 0),
        weights_fn=lambda wmax: [w for w in weights if w <= wmax],
        mode_fn=lambda uk, n, wk: dict(table.get((uk, n, wk), {})),
        lm1_fn=lambda wk: dict(lm1.get(wk, {})),
    )
    if doc.get("kind", "algebra") == "algebra":
        v = doc["vacuum"]
        spec.vacuum = (qparse(v[0]), int(v[1]))
        spec.algebra = spec
    else:
        assert algebra is not None, "module spec needs its algebra"
        spec.algebra = algebra
        spec.vacuum = algebra.vacuum
    return spec


def load_spec(path, algebra: VertexSpec = None) -> VertexSpec:
    with open(path) as fh:
        return spec_from_json(json.load(fh), algebra)


def save_spec(spec: VertexSpec, path, weight_max=None):
    with open(path, "w") as fh:
        json.dump(spec_to_json(spec, weight_max), fh, indent=1)

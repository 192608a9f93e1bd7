"""Exact bivariate polynomial arithmetic and real-root isolation.

Polynomials in the two symbols tau (scaled time) and E (scaled energy) are
sparse maps from exponent pairs to rational coefficients.  All arithmetic is
over arbitrary-precision rationals; nothing in this module ever touches
floating point.  Root finding works on univariate restrictions: rational
roots are identified exactly, irrational ones are isolated in rational
intervals by Sturm-chain bisection.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Dict, Iterable, Mapping, Optional, Tuple

BigRat = Fraction
BiPoly = Dict[Tuple[int, int], Fraction]

RatLike = int | Fraction | str


class ZeroPolynomial(ValueError):
    """Operation needs a nonzero polynomial but received the zero one."""


# ---------------------------------------------------------------------------
# construction and arithmetic

def poly_new(terms: Mapping[Tuple[int, int], RatLike]) -> BiPoly:
    """Build a polynomial from an exponent->coefficient mapping."""
    out: BiPoly = {}
    for (dt, de), c in terms.items():
        if dt < 0 or de < 0:
            raise ValueError(f"negative exponent in {(dt, de)}")
        q = Fraction(c)
        if q:
            out[(int(dt), int(de))] = q
    return out


def poly_const(c: RatLike) -> BiPoly:
    q = Fraction(c)
    return {(0, 0): q} if q else {}


def poly_add(a: BiPoly, b: BiPoly) -> BiPoly:
    out = dict(a)
    for k, c in b.items():
        s = out.get(k, Fraction(0)) + c
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def poly_sub(a: BiPoly, b: BiPoly) -> BiPoly:
    out = dict(a)
    for k, c in b.items():
        s = out.get(k, Fraction(0)) - c
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def poly_mul(a: BiPoly, b: BiPoly) -> BiPoly:
    out: BiPoly = {}
    for (i, j), ca in a.items():
        for (k, l), cb in b.items():
            key = (i + k, j + l)
            s = out.get(key, Fraction(0)) + ca * cb
            if s:
                out[key] = s
            else:
                out.pop(key, None)
    return out


def poly_arith(a: BiPoly, b: BiPoly, op: str) -> BiPoly:
    if op == "add":
        return poly_add(a, b)
    if op == "sub":
        return poly_sub(a, b)
    if op == "mul":
        return poly_mul(a, b)
    raise ValueError(f"unknown op {op!r}")


def poly_scale(a: BiPoly, c: RatLike) -> BiPoly:
    q = Fraction(c)
    if not q:
        return {}
    return {k: v * q for k, v in a.items()}


def poly_diff_tau(p: BiPoly) -> BiPoly:
    """Exact partial derivative with respect to tau; E held constant."""
    out: BiPoly = {}
    for (dt, de), c in p.items():
        if dt > 0:
            out[(dt - 1, de)] = c * dt
    return out


def poly_eval(p: BiPoly, tau: RatLike, e: RatLike) -> Fraction:
    """Exact value of p at a rational point (tau, E)."""
    t = Fraction(tau)
    w = Fraction(e)
    total = Fraction(0)
    for (dt, de), c in p.items():
        total += c * t ** dt * w ** de
    return total


def poly_eval_tau(p: BiPoly, tau: RatLike) -> BiPoly:
    """Substitute tau -> rational value, leaving a univariate polynomial in E."""
    t = Fraction(tau)
    out: BiPoly = {}
    for (dt, de), c in p.items():
        key = (0, de)
        s = out.get(key, Fraction(0)) + c * t ** dt
        if s:
            out[key] = s
        else:
            out.pop(key, None)
    return out


def poly_eval_e(p: BiPoly, e: RatLike) -> BiPoly:
    """Substitute E -> rational value, leaving a univariate polynomial in tau."""
    w = Fraction(e)
    out: BiPoly = {}
    for (dt, de), c in p.items():
        key = (dt, 0)
        s = out.get(key, Fraction(0)) + c * w ** de
        if s:
            out[key] = s
        else:
            out.pop(key, None)
    return out


def poly_is_zero(p: BiPoly) -> bool:
    return not p


def poly_degrees(p: BiPoly) -> Tuple[int, int]:
    """(max degree in tau, max degree in E); (-1, -1) for the zero polynomial."""
    if not p:
        return (-1, -1)
    return (max(k[0] for k in p), max(k[1] for k in p))


# ---------------------------------------------------------------------------
# univariate restriction

def uni_coeffs(p: BiPoly) -> list[Fraction]:
    """Ascending coefficient list of a univariate polynomial.

    Accepts polynomials in tau alone or in E alone (constants count as
    either).  Raises ZeroPolynomial on the zero polynomial and ValueError
    when both variables are genuinely present.
    """
    if not p:
        raise ZeroPolynomial("zero polynomial has no coefficient list")
    dts = {k[0] for k in p}
    des = {k[1] for k in p}
    if dts == {0}:
        deg = max(des)
        out = [Fraction(0)] * (deg + 1)
        for (_, de), c in p.items():
            out[de] = c
        return out
    if des == {0}:
        deg = max(dts)
        out = [Fraction(0)] * (deg + 1)
        for (dt, _), c in p.items():
            out[dt] = c
        return out
    raise ValueError("polynomial is not univariate")


# ---------------------------------------------------------------------------
# integer-coefficient helpers (internal)

def _trim(c: list) -> list:
    while c and c[-1] == 0:
        c.pop()
    return c


def _int_scaled(coeffs: Iterable[Fraction]) -> list[int]:
    """Clear denominators and divide by content; sign of the input is kept."""
    cs = list(coeffs)
    den = 1
    for c in cs:
        den = lcm(den, c.denominator)
    ints = [int(c * den) for c in cs]
    g = 0
    for c in ints:
        g = gcd(g, c)
    return [c // g for c in ints] if g else ints


def _ieval(p: list[int], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _ideriv(p: list[int]) -> list[int]:
    return [i * c for i, c in enumerate(p)][1:]


def _frem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    """Remainder of a by b over the rationals (b nonzero)."""
    a = list(a)
    while len(a) >= len(b) and _trim(a):
        q = a[-1] / b[-1]
        d = len(a) - len(b)
        for i, c in enumerate(b):
            a[i + d] -= q * c
        _trim(a)
    return a


def _fgcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a, b = list(a), list(b)
    _trim(a)
    _trim(b)
    while b:
        a, b = b, _frem(a, b)
        _trim(b)
    return a


def _fdivexact(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    """Exact quotient a / b; remainder must vanish."""
    a = list(a)
    out = [Fraction(0)] * (len(a) - len(b) + 1)
    while len(a) >= len(b) and _trim(a):
        q = a[-1] / b[-1]
        d = len(a) - len(b)
        out[d] = q
        for i, c in enumerate(b):
            a[i + d] -= q * c
        _trim(a)
    if _trim(a):
        raise ArithmeticError("division was not exact")
    return out


def _squarefree(ip: list[int]) -> list[int]:
    """Square-free part p/gcd(p, p') with integer primitive coefficients."""
    if len(ip) <= 2:
        return ip
    fa = [Fraction(c) for c in ip]
    g = _fgcd(fa, [Fraction(c) for c in _ideriv(ip)])
    if len(g) <= 1:
        return ip
    return _int_scaled(_fdivexact(fa, g))


def _sturm_chain(ip: list[int]) -> list[list[int]]:
    chain = [ip, _int_scaled([Fraction(c) for c in _ideriv(ip)])]
    while len(chain[-1]) > 0:
        fa = [Fraction(c) for c in chain[-2]]
        fb = [Fraction(c) for c in chain[-1]]
        r = _frem(fa, fb)
        if not r:
            break
        chain.append(_int_scaled([-c for c in r]))
        if len(chain[-1]) == 1:
            break
    return chain


def _variations(chain: list[list[int]], x: Fraction) -> int:
    signs = []
    for q in chain:
        v = _ieval(q, x)
        if v:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _cauchy_bound(ip: list[int]) -> Fraction:
    lead = abs(ip[-1])
    rest = max((abs(c) for c in ip[:-1]), default=0)
    return Fraction(rest, lead) + 1


def _simplest_between(a: Fraction, b: Fraction) -> Fraction:
    """The smallest-denominator rational in the open interval (a, b)."""
    if not a < b:
        raise ValueError("empty interval")
    if a < 0 < b:
        return Fraction(0)
    if b <= 0:
        return -_simplest_between(-b, -a)
    # 0 <= a < b from here on
    ia = a.numerator // a.denominator  # floor(a)
    if ia + 1 < b:
        return Fraction(ia + 1)  # a < floor(a)+1 always, so it lies inside
    if a == ia:
        # interval (n, n + w) with w <= 1: simplest is n + 1/k, minimal k
        k = (b - a) ** -1
        return a + Fraction(1, k.numerator // k.denominator + 1)
    # strictly inside (ia, ia+1): descend via the continued-fraction step
    inner = _simplest_between((b - ia) ** -1, (a - ia) ** -1)
    return ia + 1 / inner


def _divisors(n: int, cap: int = 10 ** 6) -> list[int]:
    """Positive divisors of |n|; empty when |n| exceeds the screening cap."""
    n = abs(n)
    if n == 0 or n > cap:
        return []
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return out


def _deflate(coeffs: list[Fraction], r: Fraction) -> list[Fraction]:
    """Exact synthetic division by (x - r); remainder must be zero."""
    n = len(coeffs) - 1
    out = [Fraction(0)] * n
    out[n - 1] = coeffs[n]
    for i in range(n - 2, -1, -1):
        out[i] = coeffs[i + 1] + r * out[i + 1]
    if coeffs[0] + r * out[0]:
        raise ArithmeticError("deflation by a non-root")
    return out


# ---------------------------------------------------------------------------
# root isolation

@dataclass(frozen=True)
class RootInterval:
    """One real root, either exactly (rational) or bracketed in [low, high]."""
    low: Fraction
    high: Fraction
    exact: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if self.exact is not None:
            if self.low != self.exact or self.high != self.exact:
                raise ValueError("exact root must collapse the interval")
        elif not self.low < self.high:
            raise ValueError("empty interval")

    @property
    def midpoint(self) -> Fraction:
        if self.exact is not None:
            return self.exact
        return (self.low + self.high) / 2

    @property
    def width(self) -> Fraction:
        return self.high - self.low


def _screen_rational_roots(coeffs: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    """Strip rational roots found by divisor screening.

    Returns (roots found, remaining coefficient list).  Screening is a fast
    path only: it is skipped for oversized leading/trailing coefficients and
    completeness is restored later by exact identification on the isolated
    intervals.
    """
    found: list[Fraction] = []
    work = list(coeffs)
    # roots at zero first
    while work[0] == 0:
        found.append(Fraction(0))
        work = work[1:]
    if len(work) <= 1:
        return found, work
    ints = _int_scaled(work)
    ps = _divisors(ints[0])
    qs = _divisors(ints[-1])
    if not ps or not qs:
        return found, work
    cands = set()
    for p in ps:
        for q in qs:
            cands.add(Fraction(p, q))
            cands.add(Fraction(-p, q))
    for r in sorted(cands):
        while len(work) > 1 and not _ieval(ints, r):
            found.append(r)
            work = _deflate(work, r)
            ints = _int_scaled(work) if len(work) > 1 else [1]
    return found, work


def isolate_real_roots(p: BiPoly) -> list[RootInterval]:
    """Isolate every distinct real root of a univariate polynomial.

    Rational roots come back exact; irrational ones come back as rational
    brackets each holding exactly one root.  Results are sorted ascending.
    """
    if not p:
        raise ZeroPolynomial("cannot isolate roots of the zero polynomial")
    coeffs = uni_coeffs(p)
    if len(coeffs) == 1:
        return []

    exact_roots, rest = _screen_rational_roots(coeffs)
    out = [RootInterval(r, r, r) for r in set(exact_roots)]

    if len(rest) > 1:
        ip = _squarefree(_int_scaled(rest))
        if len(ip) >= 2:
            out.extend(_isolate_squarefree(ip))
    out.sort(key=lambda iv: iv.midpoint)
    return out


def _isolate_squarefree(ip: list[int]) -> list[RootInterval]:
    if len(ip) == 2:
        r = Fraction(-ip[0], ip[1])
        return [RootInterval(r, r, r)]
    chain = _sturm_chain(ip)
    bound = _cauchy_bound(ip)
    lo, hi = -bound, bound  # strict bound: p(+-bound) != 0

    def var(x: Fraction) -> int:
        return _variations(chain, x)

    brackets: list[tuple[Fraction, Fraction]] = []
    exacts: list[Fraction] = []
    stack = [(lo, hi, var(lo) - var(hi))]
    while stack:
        a, b, n = stack.pop()
        if n == 0:
            continue
        if n == 1:
            brackets.append((a, b))
            continue
        m = (a + b) / 2
        if _ieval(ip, m) == 0:
            exacts.append(m)
            # carve out a punctured neighbourhood containing only this root
            d = (b - a) / 4
            while _ieval(ip, m - d) == 0 or _ieval(ip, m + d) == 0 \
                    or var(m - d) - var(m + d) != 1:
                d /= 2
            va, vl = var(a), var(m - d)
            vr, vb = var(m + d), var(b)
            stack.append((a, m - d, va - vl))
            stack.append((m + d, b, vr - vb))
        else:
            vm = var(m)
            stack.append((a, m, var(a) - vm))
            stack.append((m, b, vm - var(b)))

    out = [RootInterval(r, r, r) for r in exacts]
    lc2 = ip[-1] * ip[-1]
    for a, b in brackets:
        iv = _identify_or_bracket(ip, a, b, lc2)
        out.append(iv)
    return out


def _identify_or_bracket(ip: list[int], a: Fraction, b: Fraction, lc2: int) -> RootInterval:
    """Shrink (a, b) below 1/lc^2 and test the simplest rational inside.

    Any rational root of a primitive integer polynomial has denominator
    dividing the leading coefficient, and two such rationals differ by at
    least 1/lc^2; a bracket narrower than that holds at most one candidate,
    the simplest rational in it.
    """
    sa = 1 if _ieval(ip, a) > 0 else -1
    while (b - a) * lc2 >= 1:
        m = (a + b) / 2
        v = _ieval(ip, m)
        if v == 0:
            return RootInterval(m, m, m)
        if (1 if v > 0 else -1) == sa:
            a = m
        else:
            b = m
    cand = _simplest_between(a, b)
    if _ieval(ip, cand) == 0:
        return RootInterval(cand, cand, cand)
    return RootInterval(a, b)


def refine_root(p: BiPoly, iv: RootInterval, tol: RatLike) -> Fraction:
    """Bisect an isolating interval to width <= tol; return the midpoint.

    Exact roots are returned unchanged, and a bracket that shrinks onto a
    rational root collapses to it exactly.
    """
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if iv.exact is not None:
        return iv.exact
    if not p:
        raise ZeroPolynomial("cannot refine a root of the zero polynomial")
    ip = _squarefree(_int_scaled(uni_coeffs(p)))
    a, b = iv.low, iv.high
    va = _ieval(ip, a)
    if va == 0:
        return a
    if _ieval(ip, b) == 0:
        return b
    sa = 1 if va > 0 else -1
    lc2 = ip[-1] * ip[-1]
    tried_exact = False
    while b - a > tol:
        if not tried_exact and (b - a) * lc2 < 1:
            tried_exact = True
            cand = _simplest_between(a, b)
            if _ieval(ip, cand) == 0:
                return cand
        m = (a + b) / 2
        v = _ieval(ip, m)
        if v == 0:
            return m
        if (1 if v > 0 else -1) == sa:
            a = m
        else:
            b = m
    if not tried_exact and (b - a) * lc2 < 1:
        cand = _simplest_between(a, b)
        if _ieval(ip, cand) == 0:
            return cand
    return (a + b) / 2


def uni_reduce(num: list[Fraction], den: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    """Cancel the polynomial gcd from a rational function's coefficient lists."""
    num = _trim(list(num))
    den = _trim(list(den))
    if not den:
        raise ZeroPolynomial("zero denominator")
    if not num:
        return [], [Fraction(1)]  # zero function: no spurious denominator roots
    g = _fgcd(num, den)
    if len(g) > 1:
        num = _fdivexact(num, g)
        den = _fdivexact(den, g)
    return num, den


def sturm_count(p: BiPoly) -> int:
    """Number of distinct real roots over the whole line."""
    if not p:
        raise ZeroPolynomial("zero polynomial")
    coeffs = uni_coeffs(p)
    if len(coeffs) == 1:
        return 0
    ip = _squarefree(_int_scaled(coeffs))
    if len(ip) == 2:
        return 1
    chain = _sturm_chain(ip)
    bound = _cauchy_bound(ip)
    return _variations(chain, -bound) - _variations(chain, bound)

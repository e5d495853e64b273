"""Exact arithmetic in Q(beta) for a designated real root beta > 1.

Elements are coefficient vectors modulo the minimal polynomial, so equality
and the zero test are exact coefficient checks.  Sign queries refine an
isolating interval of the root by bisection with rational endpoints; no
floating point enters any decision.  Pisot status is certified numerically
with a residual bound and a fixed decision margin.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import mpmath

from .errors import InvalidInputError, InvariantError, UndecidableError

MAX_DEGREE = 10

# Primes tried for the mod-p irreducibility certificate.
_CERT_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43)

Rational = Union[int, Fraction]


# ---------------------------------------------------------------------------
# dense polynomial helpers (coefficient lists, constant term first)
# ---------------------------------------------------------------------------

def _poly_eval(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _poly_derivative(coeffs: Sequence[Fraction]) -> list[Fraction]:
    return [Fraction(k) * coeffs[k] for k in range(1, len(coeffs))]


def _poly_rem(num: Sequence[Fraction], den: Sequence[Fraction]) -> list[Fraction]:
    num = list(num)
    dd = len(den) - 1
    lead = den[-1]
    while len(num) - 1 >= dd and any(num):
        while num and num[-1] == 0:
            num.pop()
        if len(num) - 1 < dd:
            break
        q = num[-1] / lead
        shift = len(num) - 1 - dd
        for i, c in enumerate(den):
            num[shift + i] -= q * c
        num.pop()
    while num and num[-1] == 0:
        num.pop()
    return num


def _sturm_sequence(coeffs: Sequence[Fraction]) -> list[list[Fraction]]:
    seq = [list(coeffs), _poly_derivative(coeffs)]
    while seq[-1]:
        rem = _poly_rem(seq[-2], seq[-1])
        if not rem:
            break
        seq.append([-c for c in rem])
    return [p for p in seq if p]


def _sign_variations(values: Iterable[Fraction]) -> int:
    signs = [1 if v > 0 else -1 for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _roots_in_interval(sturm: Sequence[Sequence[Fraction]], a: Fraction, b: Fraction) -> int:
    """Number of distinct real roots in (a, b]; endpoints must not be roots of f."""
    va = _sign_variations(_poly_eval(p, a) for p in sturm)
    vb = _sign_variations(_poly_eval(p, b) for p in sturm)
    return va - vb


# ---------------------------------------------------------------------------
# irreducibility: rational roots, mod-p certificate, small-factor witness
# ---------------------------------------------------------------------------

def _divisors(n: int) -> list[int]:
    n = abs(n)
    out = [d for d in range(1, int(math.isqrt(n)) + 1) if n % d == 0]
    return sorted(set(out + [n // d for d in out]))


def _has_rational_root(coeffs: Sequence[int]) -> bool:
    if coeffs[0] == 0:
        return True
    for p in _divisors(coeffs[0]):
        for q in _divisors(coeffs[-1]):
            for sign in (1, -1):
                if _poly_eval([Fraction(c) for c in coeffs], Fraction(sign * p, q)) == 0:
                    return True
    return False


def _gf_trim(p: list[int]) -> list[int]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _gf_mulmod(a: list[int], b: list[int], f: list[int], p: int) -> list[int]:
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    # reduce mod f (f monic)
    d = len(f) - 1
    for k in range(len(prod) - 1, d - 1, -1):
        c = prod[k]
        if c:
            prod[k] = 0
            for i in range(d):
                prod[k - d + i] = (prod[k - d + i] - c * f[i]) % p
    return _gf_trim(prod[:d])


def _gf_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _gf_trim(list(a)), _gf_trim(list(b))
    while b:
        inv = pow(b[-1], p - 2, p)
        r = [c % p for c in a]
        while len(r) >= len(b):
            r = _gf_trim(r)
            if len(r) < len(b):
                break
            q = (r[-1] * inv) % p
            shift = len(r) - len(b)
            for i, c in enumerate(b):
                r[shift + i] = (r[shift + i] - q * c) % p
            r = _gf_trim(r)
        a, b = b, r
    return a


def _gf_pow_x(e: int, f: list[int], p: int) -> list[int]:
    """x**e modulo (f, p) by square and multiply."""
    result = [1]
    base = [0, 1] if len(f) > 2 else _gf_mulmod([0, 1], [1], f, p)
    while e:
        if e & 1:
            result = _gf_mulmod(result, base, f, p)
        base = _gf_mulmod(base, base, f, p)
        e >>= 1
    return result


def _gf_sub(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return _gf_trim([(x - y) % p for x, y in zip(a, b)])


def _irreducible_mod_p(coeffs: Sequence[int], p: int) -> bool:
    """Rabin's test for irreducibility of coeffs over GF(p)."""
    d = len(coeffs) - 1
    lead_inv = pow(coeffs[-1] % p, p - 2, p)
    f = [(c * lead_inv) % p for c in coeffs]
    if len(_gf_trim(list(f))) - 1 != d:
        return False
    x = [0, 1]
    if _gf_sub(_gf_pow_x(p ** d, f, p), x, p):
        return False
    prime_divs = {q for q in range(2, d + 1) if d % q == 0 and all(q % r for r in range(2, q))}
    for q in prime_divs:
        diff = _gf_sub(_gf_pow_x(p ** (d // q), f, p), x, p)
        g = _gf_gcd(f, diff, p)
        if len(g) != 1:
            return False
    return True


def _small_factor_witness(coeffs: Sequence[int], bound: int = 20) -> bool:
    """Search for a small monic integer factor of degree 2..3; True if found."""
    d = len(coeffs) - 1
    fr = [Fraction(c) for c in coeffs]
    for k in (2, 3):
        if k > d // 2:
            break
        rng = range(-bound, bound + 1)
        for c0 in rng:
            for c1 in rng:
                if k == 2:
                    if not _poly_rem(fr, [Fraction(c0), Fraction(c1), Fraction(1)]):
                        return True
                else:
                    for c2 in rng:
                        if not _poly_rem(
                            fr, [Fraction(c0), Fraction(c1), Fraction(c2), Fraction(1)]
                        ):
                            return True
    return False


def _check_irreducible(coeffs: Sequence[int]) -> None:
    d = len(coeffs) - 1
    if d == 1:
        return
    if _has_rational_root(coeffs):
        raise InvalidInputError(f"polynomial {list(coeffs)} is reducible (rational root)")
    if d <= 3:
        return
    for p in _CERT_PRIMES:
        if coeffs[-1] % p == 0:
            continue
        if _irreducible_mod_p(coeffs, p):
            return
    if _small_factor_witness(coeffs):
        raise InvalidInputError(f"polynomial {list(coeffs)} is reducible (small factor)")
    raise InvalidInputError(
        f"cannot verify irreducibility of {list(coeffs)} by trial methods"
    )


@dataclass(frozen=True)
class MinimalPolynomial:
    """Primitive integer polynomial, constant term first, irreducible over Q."""

    coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def monic(self) -> bool:
        return self.coeffs[-1] == 1

    @staticmethod
    def from_coeffs(seq: Sequence[int]) -> "MinimalPolynomial":
        coeffs = [int(c) for c in seq]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if len(coeffs) < 2:
            raise InvalidInputError("minimal polynomial must have degree >= 1")
        if len(coeffs) - 1 > MAX_DEGREE:
            raise InvalidInputError(f"degree {len(coeffs) - 1} exceeds cap {MAX_DEGREE}")
        g = 0
        for c in coeffs:
            g = math.gcd(g, c)
        coeffs = [c // g for c in coeffs]
        if coeffs[-1] < 0:
            coeffs = [-c for c in coeffs]
        _check_irreducible(coeffs)
        return MinimalPolynomial(tuple(coeffs))

    def eval_at(self, x: Fraction) -> Fraction:
        return _poly_eval([Fraction(c) for c in self.coeffs], x)


class FieldElement:
    """Element of Q(beta), canonical representative of degree < deg(minpoly)."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: "NumberField", coeffs: tuple[Fraction, ...]):
        self.field = field
        self.coeffs = coeffs

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "FieldElement | None":
        if isinstance(other, FieldElement):
            if other.field is not self.field:
                raise InvalidInputError("elements from different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.rational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.field, tuple(a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.field, tuple(a * other for a in self.coeffs))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.field, self.field._mul(self.coeffs, o.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return FieldElement(self.field, tuple(a / other for a in self.coeffs))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field._inverse(self.coeffs))

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def sign(self) -> int:
        """-1, 0 or +1 at the designated real embedding; exact."""
        if self.is_zero():
            return 0
        return self.field.sign_of(self.coeffs)

    def __eq__(self, other):
        o = self._coerce(other) if not isinstance(other, FieldElement) else other
        if o is None:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def __hash__(self):
        return hash(self.coeffs)

    def __lt__(self, other):
        return (self - self._coerce(other)).sign() < 0

    def __le__(self, other):
        return (self - self._coerce(other)).sign() <= 0

    def __gt__(self, other):
        return (self - self._coerce(other)).sign() > 0

    def __ge__(self, other):
        return (self - self._coerce(other)).sign() >= 0

    # -- conversions --------------------------------------------------------

    def as_fraction(self) -> Fraction:
        """Exact value when the element is rational; error otherwise."""
        if any(c != 0 for c in self.coeffs[1:]):
            raise InvalidInputError("element is not rational")
        return self.coeffs[0]

    def __float__(self) -> float:
        beta = self.field.beta_float_powers()
        return float(sum(float(c) * b for c, b in zip(self.coeffs, beta)))

    def __repr__(self):
        return f"FieldElement({list(self.coeffs)})"


class NumberField:
    """Q[x]/(p) together with an isolating interval for the designated root.

    The isolating interval is refined lazily by bisection; refinement is the
    only mutable state and sits behind a lock, so constructed elements are
    safe to share across workers.
    """

    def __init__(self, minpoly: MinimalPolynomial, bracket: tuple[Fraction, Fraction]):
        self.minpoly = minpoly
        self.degree = minpoly.degree
        self._fr_coeffs = [Fraction(c) for c in minpoly.coeffs]
        self._lock = threading.Lock()
        self._lo, self._hi = bracket
        self._sign_lo = self._eval_sign(self._lo)
        self._reduction = self._build_reduction()
        self._float_powers: tuple[float, ...] | None = None
        self.zero = FieldElement(self, tuple([Fraction(0)] * self.degree))
        one = [Fraction(0)] * self.degree
        one[0] = Fraction(1)
        self.one = FieldElement(self, tuple(one))
        if self.degree >= 2:
            gen = [Fraction(0)] * self.degree
            gen[1] = Fraction(1)
            self.beta = FieldElement(self, tuple(gen))
        else:
            # degree one: the generator is the rational root itself
            self.beta = FieldElement(
                self, (Fraction(-minpoly.coeffs[0], minpoly.coeffs[1]),)
            )

    # -- construction helpers ------------------------------------------------

    def _eval_sign(self, x: Fraction) -> int:
        v = _poly_eval(self._fr_coeffs, x)
        return 0 if v == 0 else (1 if v > 0 else -1)

    def _build_reduction(self) -> list[tuple[Fraction, ...]]:
        """Rows for x^(d+k), k = 0..d-2, reduced mod the minimal polynomial."""
        d = self.degree
        lead = self._fr_coeffs[-1]
        rows: list[tuple[Fraction, ...]] = []
        base = [-c / lead for c in self._fr_coeffs[:-1]]  # x^d
        rows.append(tuple(base))
        cur = list(base)
        for _ in range(d - 2):
            shifted = [Fraction(0)] + cur[:-1]
            top = cur[-1]
            nxt = [shifted[i] + top * base[i] for i in range(d)]
            rows.append(tuple(nxt))
            cur = nxt
        return rows

    def rational(self, r: Rational) -> FieldElement:
        coeffs = [Fraction(0)] * self.degree
        coeffs[0] = Fraction(r)
        return FieldElement(self, tuple(coeffs))

    def element(self, value) -> FieldElement:
        if isinstance(value, FieldElement):
            if value.field is not self:
                raise InvalidInputError("element belongs to a different field")
            return value
        if isinstance(value, (int, Fraction)):
            return self.rational(value)
        if isinstance(value, str):
            return self.rational(Fraction(value))
        if isinstance(value, float):
            raise InvalidInputError("floats are not accepted; pass an exact rational")
        raise InvalidInputError(f"cannot coerce {value!r} into the field")

    def from_coeffs(self, coeffs: Sequence[Rational]) -> FieldElement:
        if len(coeffs) > self.degree:
            raise InvalidInputError("coefficient vector longer than field degree")
        vec = [Fraction(c) for c in coeffs] + [Fraction(0)] * (self.degree - len(coeffs))
        return FieldElement(self, tuple(vec))

    # -- multiplication / inversion ------------------------------------------

    def _mul(self, a: tuple[Fraction, ...], b: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
        d = self.degree
        if d == 1:
            return (a[0] * b[0],)
        prod = [Fraction(0)] * (2 * d - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        prod[i + j] += ai * bj
        out = prod[:d]
        for k in range(d, 2 * d - 1):
            c = prod[k]
            if c:
                row = self._reduction[k - d]
                for i in range(d):
                    out[i] += c * row[i]
        return tuple(out)

    def _inverse(self, a: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
        if all(c == 0 for c in a):
            raise ZeroDivisionError("inverse of zero")
        if self.degree == 1:
            return (1 / a[0],)
        # extended Euclid in Q[x]: find u with u*a == 1 mod minpoly
        r0, r1 = self._fr_coeffs[:], list(a)
        s0, s1 = [Fraction(0)], [Fraction(1)]

        def trim(p):
            while p and p[-1] == 0:
                p.pop()
            return p

        r0, r1 = trim(r0), trim(r1)
        while len(r1) > 1:
            q, rem = self._divmod(r0, r1)
            r0, r1 = r1, trim(rem)
            s_new = self._poly_sub(s0, self._poly_mul(q, s1))
            s0, s1 = s1, trim(s_new) or [Fraction(0)]
            if not r1:
                raise InvariantError("minimal polynomial not coprime with element")
        const = r1[0]
        inv = [c / const for c in s1]
        inv = inv[: self.degree] + [Fraction(0)] * max(0, self.degree - len(inv))
        # reduce degree just in case
        if len(inv) > self.degree:
            raise InvariantError("inverse reduction failed")
        return tuple(inv)

    @staticmethod
    def _poly_mul(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
        return out

    @staticmethod
    def _poly_sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
        n = max(len(a), len(b))
        a = list(a) + [Fraction(0)] * (n - len(a))
        b = list(b) + [Fraction(0)] * (n - len(b))
        return [x - y for x, y in zip(a, b)]

    @staticmethod
    def _divmod(num: Sequence[Fraction], den: Sequence[Fraction]):
        num = list(num)
        q = [Fraction(0)] * max(1, len(num) - len(den) + 1)
        dd = len(den) - 1
        lead = den[-1]
        while len(num) - 1 >= dd and any(num):
            while num and num[-1] == 0:
                num.pop()
            if len(num) - 1 < dd:
                break
            c = num[-1] / lead
            shift = len(num) - 1 - dd
            q[shift] = c
            for i, dc in enumerate(den):
                num[shift + i] -= c * dc
            num.pop()
        return q, num

    # -- sign determination ----------------------------------------------------

    def bracket(self) -> tuple[Fraction, Fraction]:
        with self._lock:
            return self._lo, self._hi

    def _refine_once_locked(self) -> None:
        mid = (self._lo + self._hi) / 2
        s = self._eval_sign(mid)
        if s == 0:
            raise InvariantError("bisection midpoint is a root; polynomial not irreducible?")
        if s == self._sign_lo:
            self._lo = mid
        else:
            self._hi = mid
        self._float_powers = None

    def refine_to(self, width: Fraction) -> tuple[Fraction, Fraction]:
        with self._lock:
            while self._hi - self._lo > width:
                self._refine_once_locked()
            return self._lo, self._hi

    def sign_of(self, coeffs: Sequence[Fraction]) -> int:
        """Sign of a *nonzero* canonical coefficient vector, exact."""
        while True:
            with self._lock:
                lo, hi = self._lo, self._hi
            vlo, vhi = _interval_horner(coeffs, lo, hi)
            if vlo > 0:
                return 1
            if vhi < 0:
                return -1
            if lo == hi:
                # degree-one field: evaluation was exact, value must be zero
                raise InvariantError("sign query on zero element slipped through")
            with self._lock:
                self._refine_once_locked()

    def beta_float_powers(self) -> tuple[float, ...]:
        with self._lock:
            cached = self._float_powers
        if cached is not None:
            return cached
        lo, hi = self.refine_to(Fraction(1, 10 ** 30))
        mid = (lo + hi) / 2
        powers = tuple(float(mid ** k) for k in range(self.degree))
        with self._lock:
            self._float_powers = powers
        return powers

    def sign_int_coeffs(self, coeffs: Sequence[int]) -> int:
        """Exact sign of sum(c_k beta^k) for integer coefficients.

        A float evaluation with a conservative error bound screens the easy
        cases; only near-boundary values fall back to interval bisection.
        """
        if all(c == 0 for c in coeffs):
            return 0
        powers = self.beta_float_powers()
        val = 0.0
        mag = 0.0
        for c, p in zip(coeffs, powers):
            val += c * p
            mag += abs(c) * p
        guard = mag * (self.degree + 4) * 4e-16
        if val > guard:
            return 1
        if val < -guard:
            return -1
        return self.sign_of(tuple(Fraction(c) for c in coeffs))

    def beta_fraction(self, width: Fraction = Fraction(1, 10 ** 30)) -> Fraction:
        lo, hi = self.refine_to(width)
        return (lo + hi) / 2


def _interval_horner(
    coeffs: Sequence[Fraction], lo: Fraction, hi: Fraction
) -> tuple[Fraction, Fraction]:
    """Enclosure of sum(c_k * t^k) over t in [lo, hi]."""
    alo = ahi = Fraction(0)
    for c in reversed(list(coeffs)):
        p1, p2, p3, p4 = alo * lo, alo * hi, ahi * lo, ahi * hi
        alo = min(p1, p2, p3, p4) + c
        ahi = max(p1, p2, p3, p4) + c
    return alo, ahi


# ---------------------------------------------------------------------------
# root isolation
# ---------------------------------------------------------------------------

def _isolate_largest_root_above_one(minpoly: MinimalPolynomial) -> tuple[Fraction, Fraction]:
    coeffs = [Fraction(c) for c in minpoly.coeffs]
    if minpoly.degree == 1:
        root = Fraction(-minpoly.coeffs[0], minpoly.coeffs[1])
        if root <= 1:
            raise InvalidInputError("no real root greater than 1")
        return root, root
    if _poly_eval(coeffs, Fraction(1)) == 0:
        raise InvalidInputError("polynomial vanishes at 1; not a valid base")
    bound = Fraction(1) + max(abs(c) for c in coeffs[:-1]) / abs(coeffs[-1])
    sturm = _sturm_sequence(coeffs)
    total = _roots_in_interval(sturm, Fraction(1), bound)
    if total == 0:
        raise InvalidInputError("no real root greater than 1")
    lo, hi = Fraction(1), bound
    count = total
    while count > 1:
        mid = (lo + hi) / 2
        right = _roots_in_interval(sturm, mid, hi)
        if right >= 1:
            lo, count = mid, right
        else:
            hi, count = mid, count - right
    # ensure a sign change bracket for bisection refinement
    while _poly_eval(coeffs, lo) == 0 or (
        (_poly_eval(coeffs, lo) > 0) == (_poly_eval(coeffs, hi) > 0)
    ):
        mid = (lo + hi) / 2
        if _roots_in_interval(sturm, mid, hi) >= 1:
            lo = mid
        else:
            hi = mid
    return lo, hi


# ---------------------------------------------------------------------------
# Pisot certification
# ---------------------------------------------------------------------------

_PISOT_MARGIN = 1e-9
_RESIDUAL_CAP = 1e-12


def _certified_conjugates(minpoly: MinimalPolynomial) -> list[tuple[float, float]]:
    """(modulus, residual error bound) for every root, at 128-bit precision."""
    out = []
    with mpmath.workprec(192):
        poly = [mpmath.mpf(c) for c in reversed(minpoly.coeffs)]
        roots = mpmath.polyroots(poly, maxsteps=200, extraprec=128)
        deriv = [c * (len(poly) - 1 - i) for i, c in enumerate(poly[:-1])]
        d = minpoly.degree
        for z in roots:
            fz = mpmath.polyval(poly, z)
            fpz = mpmath.polyval(deriv, z)
            if fpz == 0:
                raise UndecidableError("repeated root encountered in certification")
            err = d * abs(fz) / abs(fpz)
            out.append((float(abs(z)), float(err)))
    return out


def _pisot_flag(minpoly: MinimalPolynomial, bracket: tuple[Fraction, Fraction]) -> bool:
    if not minpoly.monic:
        return False
    if bracket[0] == bracket[1]:  # degree one, integer root k >= 2
        return bracket[0] > 1
    lo, hi = bracket
    mid = float((lo + hi) / 2)
    conjs = _certified_conjugates(minpoly)
    # drop the certified root closest in modulus to the designated one
    idx = min(range(len(conjs)), key=lambda i: abs(conjs[i][0] - abs(mid)))
    rest = [c for i, c in enumerate(conjs) if i != idx]
    for modulus, err in rest:
        if err > _RESIDUAL_CAP:
            raise UndecidableError("root certification residual too large")
        if modulus + err < 1 - _PISOT_MARGIN:
            continue
        if modulus - err > 1 + _PISOT_MARGIN:
            return False
        raise UndecidableError(
            f"conjugate modulus {modulus} within {_PISOT_MARGIN} of 1; undecidable"
        )
    return True


def is_pisot(minpoly: MinimalPolynomial) -> bool:
    """True iff the largest real root exceeds 1 and all conjugates are inside
    the unit circle (certified numerically)."""
    try:
        bracket = _isolate_largest_root_above_one(minpoly)
    except InvalidInputError:
        return False
    return _pisot_flag(minpoly, bracket)


# ---------------------------------------------------------------------------
# BetaSystem and parsing
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BetaSystem:
    """A base beta > 1 with digit count m > beta and the derived constants."""

    spec: str
    minpoly: MinimalPolynomial
    field: NumberField
    m: int
    beta: FieldElement
    rho: FieldElement
    right_end: FieldElement  # (m-1)/(beta-1), right endpoint of I_beta
    pisot: bool
    root_interval: tuple[Fraction, Fraction]

    @property
    def degree(self) -> int:
        return self.field.degree

    def element(self, value) -> FieldElement:
        return self.field.element(value)

    def beta_floor(self) -> int:
        """Exact integer part of beta."""
        t = 1
        while (self.beta - (t + 1)).sign() >= 0:
            t += 1
        return t

    def is_integer_base(self) -> bool:
        return self.degree == 1 and self.beta.coeffs[0].denominator == 1

    def in_interval(self, x: FieldElement) -> bool:
        """x in I_beta = [0, (m-1)/(beta-1)], endpoint inclusive."""
        return x.sign() >= 0 and (self.right_end - x).sign() >= 0

    def __repr__(self):
        return f"BetaSystem({self.spec!r}, m={self.m})"


def _system_from_minpoly(spec: str, minpoly: MinimalPolynomial, m: int) -> BetaSystem:
    if m < 2:
        raise InvalidInputError("digit count m must be at least 2")
    bracket = _isolate_largest_root_above_one(minpoly)
    field = NumberField(minpoly, bracket)
    beta = field.beta
    # m >= beta keeps [0,1] an attractor; equality only happens for integer
    # bases (the unique-expansion calibration case).
    if (field.rational(m) - beta).sign() < 0:
        raise InvalidInputError(f"m={m} must not be smaller than beta")
    rho = field.one / beta
    if not (rho * beta == field.one):
        raise InvariantError("rho * beta != 1")
    right_end = field.rational(m - 1) / (beta - field.one)
    pisot = _pisot_flag(minpoly, bracket)
    return BetaSystem(
        spec=spec,
        minpoly=minpoly,
        field=field,
        m=m,
        beta=beta,
        rho=rho,
        right_end=right_end,
        pisot=pisot,
        root_interval=bracket,
    )


def multinacci_polynomial(n: int) -> MinimalPolynomial:
    if not 2 <= n <= MAX_DEGREE:
        raise InvalidInputError(f"multinacci index must be in [2, {MAX_DEGREE}]")
    return MinimalPolynomial.from_coeffs([-1] * n + [1])


def multinacci(n: int) -> BetaSystem:
    """The n-th multinacci base (positive root of x^n = x^(n-1)+...+1), m=2."""
    sys = _system_from_minpoly(f"multinacci:{n}", multinacci_polynomial(n), m=2)
    if not sys.pisot:
        raise InvariantError("multinacci base failed Pisot certification")
    return sys


def parse_beta(spec: str, m: int) -> BetaSystem:
    """Build a BetaSystem from a spec string.

    Accepted forms: "golden", "multinacci:n", "int:k", "poly:c0,c1,...,cd"
    (constant term first, designated root = largest real root > 1), or a
    decimal literal such as "1.5" (treated as an exact rational).
    """
    spec = spec.strip()
    if spec == "golden":
        return _system_from_minpoly(spec, multinacci_polynomial(2), m)
    if spec.startswith("multinacci:"):
        n = int(spec.split(":", 1)[1])
        mp = multinacci_polynomial(n)
        return _system_from_minpoly(spec, mp, m)
    if spec.startswith("int:"):
        k = int(spec.split(":", 1)[1])
        if k < 2:
            raise InvalidInputError("integer base must be at least 2")
        return _system_from_minpoly(spec, MinimalPolynomial.from_coeffs([-k, 1]), m)
    if spec.startswith("poly:"):
        parts = spec.split(":", 1)[1].split(",")
        coeffs = [int(p) for p in parts]
        return _system_from_minpoly(spec, MinimalPolynomial.from_coeffs(coeffs), m)
    try:
        value = Fraction(spec)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInputError(f"cannot parse beta spec {spec!r}") from exc
    if value <= 1:
        raise InvalidInputError("beta must exceed 1")
    mp = MinimalPolynomial.from_coeffs([-value.numerator, value.denominator])
    return _system_from_minpoly(spec, mp, m)

"""Special functions used by the matrix assembly and the metric closed form.

Complete elliptic integrals come from the arithmetic-geometric mean.
Polygamma and Hurwitz zeta use Euler-Maclaurin summation with exact
Bernoulli numbers; the same code runs on Python floats and on
``mpmath.mpf`` values, so the stiffness assembly can request extra
working precision without a second implementation.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Sequence

import mpmath
import numpy as np

__all__ = [
    "DomainError",
    "PolynomialCoeffs",
    "elliptic_k",
    "elliptic_e",
    "elliptic_k_derivative",
    "elliptic_agm",
    "laguerre_rodrigues",
    "bernoulli_numbers",
    "polygamma",
    "hurwitz_zeta",
    "hurwitz_zeta_batch",
    "sinh2_laplace",
    "sinh_laplace",
]


class DomainError(ValueError):
    """Argument outside the domain where the function is defined."""


# ---------------------------------------------------------------------------
# exact polynomials


class PolynomialCoeffs:
    """Polynomial with exact rational coefficients, constant term first.

    Coefficients are stored as :class:`fractions.Fraction` and converted to
    floating point only when the polynomial is evaluated.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        c = [Fraction(x) for x in coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(c) if c else (Fraction(0),)

    @property
    def degree(self) -> int:
        return -1 if self.is_zero() else len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def __iter__(self):
        return iter(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, PolynomialCoeffs):
            return self.coeffs == other.coeffs
        if isinstance(other, (Sequence, np.ndarray)):
            return self == PolynomialCoeffs(other)
        if isinstance(other, (int, Rational)):
            return self.coeffs == (Fraction(other),)
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"PolynomialCoeffs({[str(c) for c in self.coeffs]})"

    def __neg__(self):
        return PolynomialCoeffs(-c for c in self.coeffs)

    def __add__(self, other):
        if not isinstance(other, PolynomialCoeffs):
            other = PolynomialCoeffs([other])
        n = max(len(self), len(other))
        a = list(self.coeffs) + [Fraction(0)] * (n - len(self))
        b = list(other.coeffs) + [Fraction(0)] * (n - len(other))
        return PolynomialCoeffs(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PolynomialCoeffs):
            f = Fraction(other)
            return PolynomialCoeffs(f * c for c in self.coeffs)
        out = [Fraction(0)] * (len(self) + len(other) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    out[i + j] += x * y
        return PolynomialCoeffs(out)

    __rmul__ = __mul__

    def deriv(self, order: int = 1) -> "PolynomialCoeffs":
        c = list(self.coeffs)
        for _ in range(order):
            c = [c[i] * i for i in range(1, len(c))] or [Fraction(0)]
        return PolynomialCoeffs(c)

    def rescale(self, t) -> "PolynomialCoeffs":
        """Return the polynomial ``x -> p(t x)``."""
        t = Fraction(t)
        return PolynomialCoeffs(c * t**i for i, c in enumerate(self.coeffs))

    def shift_degree(self, k: int) -> "PolynomialCoeffs":
        """Multiply by ``x**k`` (k >= 0)."""
        return PolynomialCoeffs([Fraction(0)] * k + list(self.coeffs))

    def as_float(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    def __call__(self, x):
        """Evaluate by Horner's rule.

        ``mpmath.mpf`` input is evaluated in the current mpmath precision;
        anything else goes through float64.
        """
        if isinstance(x, mpmath.mpf):
            acc = mpmath.mpf(0)
            for c in reversed(self.coeffs):
                acc = acc * x + mpmath.mpf(c.numerator) / c.denominator
            return acc
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for c in reversed(self.as_float()):
            acc = acc * x + c
        return acc if acc.ndim else float(acc)


def laguerre_rodrigues(k: int, N: int = 0) -> PolynomialCoeffs:
    """Laguerre polynomial in Rodrigues normalization.

    ``L_k(r) = e^r d^k/dr^k (r^k e^-r)``, which is ``k!`` times the usual
    Laguerre polynomial, and the associated version
    ``L^N_k = (-1)^N d^N/dr^N L_{k+N}``.

    Parameters
    ----------
    k, N : int
        Degree and association order, both nonnegative.
    """
    if k < 0 or N < 0:
        raise DomainError("laguerre_rodrigues needs k >= 0 and N >= 0")
    n = k + N
    fn = math.factorial(n)
    base = PolynomialCoeffs(
        Fraction(fn * math.comb(n, i) * (-1) ** i, math.factorial(i)) for i in range(n + 1)
    )
    return base.deriv(N) * ((-1) ** N)


# ---------------------------------------------------------------------------
# elliptic integrals


def elliptic_agm(k, kp=None, tol: float = 1e-17, max_iter: int = 60):
    """Arithmetic-geometric mean for K and E at modulus ``k``.

    Returns ``(K, E, T)`` with ``E - k'^2 K = K k^2 T``. The third value is
    free of cancellation for small ``k`` because the AGM gaps are advanced
    with ``c_{n+1} = c_n^2 / (4 a_{n+1})`` rather than by subtraction.

    Parameters
    ----------
    k : array_like
        Modulus in ``[0, 1)``.
    kp : array_like, optional
        Complementary modulus ``sqrt(1 - k^2)``. Passing it directly keeps
        full accuracy as ``k -> 1``.
    """
    k = np.asarray(k, dtype=float)
    if kp is None:
        kp = np.sqrt((1.0 - k) * (1.0 + k))
    kp = np.asarray(kp, dtype=float)
    a = np.ones(np.broadcast(k, kp).shape)
    b = kp * np.ones_like(a)
    # c_n / k; c_1 / k = k / (2 (1 + k'))
    a_next = 0.5 * (a + b)
    ck = k / (2.0 * (1.0 + kp)) * np.ones_like(a)
    c = k * ck
    b = np.sqrt(a * b)
    a = a_next
    T = 0.5 - ck * ck
    weight = 1.0
    for _ in range(max_iter):
        if np.all(np.abs(c) <= tol * a):
            break
        a_next = 0.5 * (a + b)
        b = np.sqrt(a * b)
        ck = c * ck / (4.0 * a_next)
        c = c * c / (4.0 * a_next)
        a = a_next
        weight *= 2.0
        T = T - weight * ck * ck
    K = np.pi / (2.0 * a)
    E = K * (kp * kp + k * k * T)
    return K, E, T


def _as_output(x):
    return float(x) if np.ndim(x) == 0 else x


def elliptic_k(k):
    """Complete elliptic integral of the first kind, modulus ``k`` in [0, 1)."""
    k = np.asarray(k, dtype=float)
    if np.any(~np.isfinite(k)) or np.any(k < 0) or np.any(k >= 1):
        raise DomainError("elliptic_k needs 0 <= k < 1 (K diverges at k = 1)")
    return _as_output(elliptic_agm(k)[0])


def elliptic_e(k):
    """Complete elliptic integral of the second kind, modulus ``k`` in [0, 1]."""
    k = np.asarray(k, dtype=float)
    if np.any(~np.isfinite(k)) or np.any(k < 0) or np.any(k > 1):
        raise DomainError("elliptic_e needs 0 <= k <= 1")
    inner = np.where(k < 1, k, 0.0)
    E = elliptic_agm(inner)[1]
    return _as_output(np.where(k < 1, E, 1.0))


def elliptic_k_derivative(k):
    """dK/dk = (E - k'^2 K) / (k k'^2), evaluated without cancellation."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0) or np.any(k >= 1):
        raise DomainError("elliptic_k_derivative needs 0 <= k < 1")
    K, _, T = elliptic_agm(k)
    return _as_output(K * k * T / ((1.0 - k) * (1.0 + k)))


# ---------------------------------------------------------------------------
# Bernoulli numbers, Hurwitz zeta, polygamma


@lru_cache(maxsize=None)
def bernoulli_numbers(n: int) -> tuple[Fraction, ...]:
    """Exact Bernoulli numbers B_0 .. B_n (convention B_1 = -1/2)."""
    B = [Fraction(1)]
    for m in range(1, n + 1):
        acc = sum((math.comb(m + 1, j) * B[j] for j in range(m)), Fraction(0))
        B.append(-acc / (m + 1))
    return tuple(B)


@lru_cache(maxsize=None)
def _em_coefficients(n_terms: int) -> tuple[Fraction, ...]:
    # B_{2j} / (2j)! for j = 1..n_terms
    B = bernoulli_numbers(2 * n_terms)
    return tuple(B[2 * j] / math.factorial(2 * j) for j in range(1, n_terms + 1))


def _check_zeta_args(q, w):
    if not q > 1:
        raise DomainError(f"hurwitz_zeta needs q > 1, got {q}")
    if not w > 0:
        raise DomainError(f"hurwitz_zeta needs w > 0, got {w}")


def _hurwitz_float(q: float, w: float) -> float:
    # shift so that the Euler-Maclaurin tail converges quickly
    n_direct = max(0, int(math.ceil(max(16.0, 0.6 * q) - w)))
    s = math.fsum((n + w) ** (-q) for n in range(n_direct))
    x = n_direct + w
    tail = x ** (1.0 - q) / (q - 1.0) + 0.5 * x ** (-q)
    rising = q  # q (q+1) ... (q+2j-2)
    xp = x ** (-q - 1.0)
    x2 = 1.0 / (x * x)
    for j, coef in enumerate(_em_coefficients(25), start=1):
        term = float(coef) * rising * xp
        tail += term
        if abs(term) < 1e-18 * (s + tail):
            break
        rising *= (q + 2 * j - 1) * (q + 2 * j)
        xp *= x2
    return s + tail


def hurwitz_zeta(q, w):
    """Hurwitz zeta function ``sum_{n>=0} (n + w)^{-q}`` for q > 1, w > 0.

    Floats are summed in double precision; ``mpmath.mpf`` arguments are
    summed in the current mpmath working precision.
    """
    _check_zeta_args(q, w)
    if isinstance(q, mpmath.mpf) or isinstance(w, mpmath.mpf):
        return hurwitz_zeta_batch([q], w)[0]
    return _hurwitz_float(float(q), float(w))


def hurwitz_zeta_batch(qs: Sequence, w, prec: int | None = None) -> list:
    """Hurwitz zeta at several integer or real orders sharing one ``w``.

    Runs in mpmath arithmetic with ``prec`` bits (default: current mpmath
    precision). The direct part of the Euler-Maclaurin sum is shared across
    orders, which is what makes the stiffness assembly affordable.

    Returns
    -------
    list of mpmath.mpf, in the order of ``qs``.
    """
    qs = list(qs)
    for q in qs:
        _check_zeta_args(q, w)
    bits = int(prec) if prec else mpmath.mp.prec
    with mpmath.workprec(bits + 16):
        w = mpmath.mpf(w)
        qmax = max(qs)
        target = mpmath.mpf(2) ** (-(bits + 8))
        # the smallest Euler-Maclaurin term sits near j ~ pi x; make it tiny
        x_min = max(bits * math.log(2) / (2 * math.pi) * 1.3, 0.55 * float(qmax) + 8)
        n_direct = max(0, int(math.ceil(x_min - float(w))))
        x = n_direct + w
        integer_orders = all(float(q).is_integer() for q in qs)
        if integer_orders:
            # running powers (n + w)^-q for q = 0..qmax, no transcendental calls
            qmax_int = int(qmax)
            inv = [1 / (n + w) for n in range(n_direct)] + [1 / x]
            powers = {}
            cur = [mpmath.mpf(1)] * len(inv)
            for q in range(1, qmax_int + 1):
                cur = [c * v for c, v in zip(cur, inv)]
                powers[q] = cur
        else:
            logs = [mpmath.log(n + w) for n in range(n_direct)]
            logx = mpmath.log(x)
        out = []
        n_terms = 12 + bits // 3
        coefs = [mpmath.mpf(c.numerator) / c.denominator for c in _em_coefficients(n_terms)]
        for q in qs:
            qm = mpmath.mpf(q)
            if integer_orders:
                pw = powers[int(q)]
                s = mpmath.fsum(pw[:-1])
                xq = pw[-1]
            else:
                s = mpmath.fsum(mpmath.exp(-qm * lg) for lg in logs)
                xq = mpmath.exp(-qm * logx)
            tail = xq * x / (qm - 1) + xq / 2
            rising = qm
            xp = xq / x
            x2 = 1 / (x * x)
            scale = abs(s) + abs(tail)
            for j, coef in enumerate(coefs, start=1):
                term = coef * rising * xp
                tail += term
                if abs(term) < target * scale:
                    break
                rising *= (qm + 2 * j - 1) * (qm + 2 * j)
                xp *= x2
            else:
                raise ArithmeticError("Euler-Maclaurin tail did not converge")
            out.append(s + tail)
    return [+v for v in out]


def _digamma_float(x: float) -> float:
    acc = 0.0
    while x < 12.0:
        acc -= 1.0 / x
        x += 1.0
    x2 = 1.0 / (x * x)
    series = 0.0
    xp = x2
    B = bernoulli_numbers(24)
    for j in range(1, 13):
        series += float(B[2 * j]) / (2 * j) * xp
        xp *= x2
    return acc + math.log(x) - 0.5 / x - series


def polygamma(order: int, x: float) -> float:
    """Polygamma function psi^(order)(x) for x > 0.

    Order zero is the digamma function; higher orders use
    ``psi^(m)(x) = (-1)^(m+1) m! zeta(m+1, x)``.
    """
    order = int(order)
    if order < 0:
        raise DomainError("polygamma order must be nonnegative")
    if not x > 0:
        raise DomainError(f"polygamma needs x > 0, got {x}")
    if order == 0:
        return _digamma_float(float(x))
    sign = 1.0 if order % 2 == 1 else -1.0
    return sign * math.factorial(order) * _hurwitz_float(order + 1.0, float(x))


# ---------------------------------------------------------------------------
# Laplace transforms against 1/sinh^2 and 1/sinh


def sinh2_laplace(a: int, sigma, prec: int | None = None):
    """``int_0^inf r^a e^{-sigma r} / sinh(r)^2 dr`` for integer a >= 2.

    Closed form ``a!/2^(a-1) [zeta(a, 1+sigma/2) - sigma/2 zeta(a+1, 1+sigma/2)]``,
    valid for ``sigma > -2``. With ``prec`` the value is an mpmath number
    computed with that many bits; otherwise a float.
    """
    if a < 2:
        raise DomainError("sinh2_laplace needs a >= 2 for convergence at r = 0")
    if not sigma > -2:
        raise DomainError(f"sinh2_laplace needs sigma > -2, got {sigma}")
    if prec is None:
        w = 1.0 + 0.5 * float(sigma)
        return math.factorial(a) / 2.0 ** (a - 1) * (
            _hurwitz_float(a, w) - 0.5 * float(sigma) * _hurwitz_float(a + 1, w)
        )
    with mpmath.workprec(prec):
        sig = mpmath.mpf(sigma)
        z = hurwitz_zeta_batch([a, a + 1], 1 + sig / 2, prec)
        return mpmath.factorial(a) / mpmath.mpf(2) ** (a - 1) * (z[0] - sig / 2 * z[1])


def sinh_laplace(b: int, sigma, prec: int | None = None):
    """``int_0^inf r^b e^{-sigma r} / sinh(r) dr`` for integer b >= 1, sigma > -1.

    Closed form ``b!/2^b zeta(b+1, (sigma+1)/2)``.
    """
    if b < 1:
        raise DomainError("sinh_laplace needs b >= 1")
    if not sigma > -1:
        raise DomainError(f"sinh_laplace needs sigma > -1, got {sigma}")
    if prec is None:
        return math.factorial(b) / 2.0**b * _hurwitz_float(b + 1, 0.5 * (float(sigma) + 1.0))
    with mpmath.workprec(prec):
        sig = mpmath.mpf(sigma)
        z = hurwitz_zeta_batch([b + 1], (sig + 1) / 2, prec)[0]
        return mpmath.factorial(b) / mpmath.mpf(2) ** b * z

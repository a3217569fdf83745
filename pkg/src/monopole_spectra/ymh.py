"""Radial fluctuation operator of the charge-one BPS monopole.

The operator is ``-d^2/dr^2 + V(r)`` with

    V(r) = 1/sinh^2 r + 2/r^2 - 2 coth(r)/r + coth^2 r,

which behaves like ``2/r^2`` at the origin and like ``1 - 2/r + 2/r^2`` at
infinity. Its discrete spectrum below 1 is bounded from above by a
Rayleigh-Ritz projection onto hydrogen-like functions

    b_n(r) = r^2 exp(-r/(n+1)) L^3_{n-1}(2r/(n+1)),   n = 1..dim,

with Laguerre polynomials in Rodrigues normalization. Mass matrix entries
are exact rationals. The stiffness matrix splits into a rational part
(``-d^2 + 2/r^2 - 2/r``) and a remainder whose matrix elements are Laplace
transforms against ``1/sinh^2`` and ``1/sinh``, evaluated through Hurwitz
zeta values in extended precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import eval_genlaguerre

from . import specfun
from .halfline import AsymptoticData, PotentialProfile, SpectrumResult
from .linalg import NotPositiveDefiniteError, gen_sym_eig, gen_sym_eig_mp
from .specfun import DomainError, PolynomialCoeffs, laguerre_rodrigues

__all__ = [
    "SERIES_SWITCH",
    "v_ymh",
    "w_ymh",
    "ymh_profile",
    "BasisFunction",
    "CoulombBasis",
    "build_basis",
    "coulomb_eigencheck",
    "MatrixPair",
    "mass_matrix",
    "stiffness_matrix",
    "assemble",
    "default_precision",
    "solve_table1",
    "GalerkinMode",
    "galerkin_mode",
    "reconstruct_fluctuation",
    "fluctuation_with_derivatives",
    "coupled_residual",
    "PrecisionError",
]

SERIES_SWITCH = 1e-3


class PrecisionError(ArithmeticError):
    """Generalized eigenproblem broke down; assemble with more bits."""


# ---------------------------------------------------------------------------
# potential

# coth r - 1/r = sum_k 2^(2k) B_2k r^(2k-1) / (2k)!
_B = specfun.bernoulli_numbers(40)
_PHI = [float(Fraction(2) ** (2 * k) * _B[2 * k] / math.factorial(2 * k)) for k in range(1, 21)]


def _phi(r):
    """``coth(r) - 1/r`` without cancellation."""
    r = np.asarray(r, float)
    small = r < 0.5
    rs = np.where(small, r, 0.5)
    r2 = rs * rs
    ser = np.zeros_like(rs)
    for c in reversed(_PHI):
        ser = ser * r2 + c
    ser = ser * rs
    rl = np.where(small, 1.0, r)
    direct = 1.0 / np.tanh(rl) - 1.0 / rl
    return np.where(small, ser, direct)


def _dphi(r):
    """Derivative of ``coth(r) - 1/r``, equal to ``1/r^2 - 1/sinh^2 r``."""
    r = np.asarray(r, float)
    small = r < 0.5
    rs = np.where(small, r, 0.5)
    r2 = rs * rs
    ser = np.zeros_like(rs)
    for k in range(len(_PHI), 0, -1):
        ser = ser * r2 + (2 * k - 1) * _PHI[k - 1]
    rl = np.where(small, 1.0, r)
    csch = 2.0 * np.exp(-rl) / -np.expm1(-2.0 * rl)
    direct = 1.0 / rl**2 - csch * csch
    return np.where(small, ser, direct)


def _laurent_coefficients(n_terms: int = 5):
    # V - 2/r^2 = 1 - 2 phi'(r) - 2 phi(r)/r with phi = sum_k a_k r^(2k-1);
    # the coefficient of r^(2k-2) is -4 k a_k, plus the constant 1
    out = []
    for k in range(1, n_terms + 1):
        a = Fraction(2) ** (2 * k) * _B[2 * k] / math.factorial(2 * k)
        out.append(float(-4 * k * a + (1 if k == 1 else 0)))
    return out


# V = 2/r^2 + sum_j _V_SER[j] r^(2j) near the origin
_V_SER = _laurent_coefficients(5)


def v_ymh(r):
    """The fluctuation potential; a Laurent series is used below ``SERIES_SWITCH``.

    Raises
    ------
    DomainError
        For ``r <= 0``.
    """
    r = np.asarray(r, float)
    if np.any(~(r > 0)):
        raise DomainError("v_ymh needs r > 0")
    small = r < SERIES_SWITCH
    rs = np.where(small, r, SERIES_SWITCH)
    r2 = rs * rs
    ser = np.zeros_like(rs)
    for c in reversed(_V_SER):
        ser = ser * r2 + c
    ser = ser + 2.0 / r2
    rl = np.where(small, 1.0, r)
    cth = 1.0 / np.tanh(rl)
    # csch through exp(-r) so that large r does not overflow
    csch = 2.0 * np.exp(-rl) / -np.expm1(-2.0 * rl)
    direct = csch * csch + cth * cth - 2.0 * _phi(rl) / rl
    out = np.where(small, ser, direct)
    return float(out) if out.ndim == 0 else out


def w_ymh(r):
    """``v_ymh(r) - 2/r^2`` in a form that stays accurate as ``r -> 0``."""
    r = np.asarray(r, float)
    if np.any(~(r > 0)):
        raise DomainError("w_ymh needs r > 0")
    out = 1.0 - 2.0 * _dphi(r) - 2.0 * _phi(r) / r
    return float(out) if out.ndim == 0 else out


def ymh_profile() -> PotentialProfile:
    return PotentialProfile(
        evaluate=v_ymh,
        asymptotics=AsymptoticData(c2=2.0, C0=1.0, C1=-2.0),
        description="monopole fluctuation potential",
        remainder=w_ymh,
    )


# ---------------------------------------------------------------------------
# basis


@dataclass(frozen=True)
class BasisFunction:
    """``poly(r) * exp(-decay * r)`` with ``poly`` divisible by ``r^2``."""

    index: int
    poly: PolynomialCoeffs
    decay: Fraction

    def __call__(self, r):
        if isinstance(r, mpmath.mpf):
            return self.poly(r) * mpmath.exp(-mpmath.mpf(self.decay.numerator) / self.decay.denominator * r)
        return _eval_basis(self.index, np.asarray(r, float), 0)

    def derivative(self, r, order: int = 1):
        return _eval_basis(self.index, np.asarray(r, float), order)


def _eval_basis(n: int, r: np.ndarray, order: int):
    """Derivatives of ``b_n`` via the stable Laguerre recurrence.

    ``b_n = r^2 e^{-beta r} P(2 beta r)``, ``P = (n+2)! L^(3)_{n-1}`` in the
    standard normalization and ``P^(k) = (-1)^k (n+2)! L^(3+k)_{n-1-k}``.
    """
    beta = 1.0 / (n + 1)
    t = 2.0 * beta * r
    scale = float(math.factorial(n + 2))
    A = [r * r, 2 * r, np.full_like(r, 2.0), np.zeros_like(r)]
    E = np.exp(-beta * r)
    Pk = []
    for k in range(order + 1):
        deg = n - 1 - k
        if deg < 0:
            Pk.append(np.zeros_like(r))
        else:
            Pk.append((-1) ** k * scale * (2 * beta) ** k * eval_genlaguerre(deg, 3 + k, t))
    total = np.zeros_like(r)
    for i in range(order + 1):
        for j in range(order + 1 - i):
            k = order - i - j
            coef = math.factorial(order) / (math.factorial(i) * math.factorial(j) * math.factorial(k))
            total = total + coef * A[i] * (-beta) ** j * Pk[k]
    total = total * E
    return float(total) if total.ndim == 0 else total


@dataclass(frozen=True)
class CoulombBasis:
    """Hydrogen-like trial functions with exact norms."""

    dimension: int
    functions: tuple
    norms: tuple  # exact int_0^inf b_n^2 dr

    def normalized(self, n: int, r):
        """``b_n / sqrt(norm)``: the unit-norm function of index ``n`` (1-based)."""
        return self.functions[n - 1](r) / math.sqrt(self.norms[n - 1])


def _laplace_poly(poly: PolynomialCoeffs, beta: Fraction) -> Fraction:
    """Exact ``int_0^inf poly(r) e^{-beta r} dr``."""
    return sum(
        (c * math.factorial(q) / beta ** (q + 1) for q, c in enumerate(poly.coeffs) if c),
        Fraction(0),
    )


@lru_cache(maxsize=None)
def _basis_function(n: int) -> BasisFunction:
    L = laguerre_rodrigues(n - 1, 3)
    poly = L.rescale(Fraction(2, n + 1)).shift_degree(2)
    return BasisFunction(index=n, poly=poly, decay=Fraction(1, n + 1))


def build_basis(dim: int) -> CoulombBasis:
    """Trial functions ``b_1..b_dim`` with exact norms.

    Raises
    ------
    ValueError
        Unless ``1 <= dim <= 60``.
    """
    if not 1 <= dim <= 60:
        raise ValueError("dimension must be between 1 and 60")
    funcs = tuple(_basis_function(n) for n in range(1, dim + 1))
    norms = tuple(_laplace_poly(f.poly * f.poly, 2 * f.decay) for f in funcs)
    return CoulombBasis(dimension=dim, functions=funcs, norms=norms)


def _apply_h1(poly: PolynomialCoeffs, beta: Fraction) -> PolynomialCoeffs:
    """Polynomial part of ``(-d^2/dr^2 + 2/r^2 - 2/r)(poly e^{-beta r})``."""
    d1 = poly.deriv()
    d2 = d1.deriv()
    out = -d2 + d1 * (2 * beta) - poly * (beta * beta)
    c = poly.coeffs
    if c[0] != 0 or (len(c) > 1 and c[1] != 0):
        raise DomainError("polynomial must vanish to second order at r = 0")
    lowered = PolynomialCoeffs(
        [2 * c[q + 2] - 2 * c[q + 1] for q in range(len(c) - 2)] + [-2 * c[-1]]
    )
    return out + lowered


def coulomb_eigencheck(n: int, grid=None) -> float:
    """Residual of the hydrogen-like eigen-relation for ``xi_n = b_{n-1}``.

    Applies ``-d^2 + 2/r^2 - 2/r + 1`` exactly to ``b_{n-1}`` and subtracts
    ``(1 - 1/n^2) b_{n-1}``. The result is exact rational arithmetic, so a
    correct eigenfunction gives an identically zero polynomial; the return
    value is the maximum absolute residual of the normalized function on
    ``grid`` (default ``linspace(0.01, 40, 400)``).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    f = _basis_function(n - 1)
    res_poly = _apply_h1(f.poly, f.decay) + f.poly * Fraction(1, n * n)
    grid = np.linspace(0.01, 40.0, 400) if grid is None else np.asarray(grid, float)
    nrm = math.sqrt(_laplace_poly(f.poly * f.poly, 2 * f.decay))
    with mpmath.workprec(200):
        vals = [
            abs(res_poly(mpmath.mpf(x)) * mpmath.exp(-mpmath.mpf(x) / n)) / nrm for x in grid
        ]
    return float(max(vals))


# ---------------------------------------------------------------------------
# matrices


@dataclass
class MatrixPair:
    """Mass and stiffness matrices of a Galerkin subspace.

    ``mass`` and ``stiffness`` are float64 views; ``mass_exact`` holds the
    rational diagonal and ``stiffness_mp`` the extended-precision entries.
    """

    mass: np.ndarray
    stiffness: np.ndarray
    mass_exact: tuple
    stiffness_mp: list
    precision_bits: int
    metadata: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.mass.shape[0]


def default_precision(dim: int) -> int:
    """Working precision in bits for the stiffness remainder at dimension ``dim``."""
    return 64 + 5 * dim


def mass_matrix(basis: CoulombBasis) -> np.ndarray:
    """Diagonal mass matrix ``diag(norms)`` as float64."""
    return np.diag([float(x) for x in basis.norms])


@lru_cache(maxsize=4096)
def _sinh_kernel_terms(s: Fraction, a_max: int, bits: int) -> tuple:
    """``T_a`` for ``a = 2..a_max`` at total decay ``s``.

    ``T_a = 3/2 K(a, s) + 1/4 K(a, s-2) + 1/4 K(a, s+2) - 2 L(a-1, s+1)``
    with ``K(a, sig) = int r^a e^{-sig r}/sinh^2`` and
    ``L(b, sig) = int r^b e^{-sig r}/sinh``. All Hurwitz arguments reduce to
    ``1 + s/2`` and ``2 + s/2``.
    """
    if not 0 < s < 2:
        raise DomainError(f"decay sum {s} outside (0, 2); Laplace transforms diverge")
    qs = list(range(2, a_max + 2))
    with mpmath.workprec(bits):
        sm = mpmath.mpf(s.numerator) / s.denominator
        half = sm / 2
        w1 = 1 + half
        w2 = 2 + half
        z1 = dict(zip(qs, specfun.hurwitz_zeta_batch(qs, w1, bits)))
        z2 = dict(zip(qs, specfun.hurwitz_zeta_batch(qs, w2, bits)))
        # zeta(q, s/2) = (s/2)^-q + zeta(q, 1 + s/2): a sum of positive terms
        z0 = {q: half ** (-q) + z1[q] for q in qs}
        out = []
        for a in range(2, a_max + 1):
            pref = mpmath.factorial(a) / mpmath.mpf(2) ** (a - 1)
            K_s = pref * (z1[a] - half * z1[a + 1])
            K_m = pref * (z0[a] - (half - 1) * z0[a + 1])
            K_p = pref * (z2[a] - (half + 1) * z2[a + 1])
            b = a - 1
            L_s = mpmath.factorial(b) / mpmath.mpf(2) ** b * z1[b + 1]
            out.append(mpmath.mpf(3) / 2 * K_s + K_m / 4 + K_p / 4 - 2 * L_s)
        return tuple(out)


def _stiffness_entry(fi: BasisFunction, fj: BasisFunction, bits: int):
    s = fi.decay + fj.decay
    rational = _laplace_poly(_apply_h1(fi.poly, fi.decay) * fj.poly, s)
    prod = fi.poly * fj.poly  # r^2 * sum_p d_p r^p
    a_max = len(prod.coeffs) - 1
    terms = _sinh_kernel_terms(s, max(a_max, 2), bits)
    with mpmath.workprec(bits):
        acc = mpmath.mpf(rational.numerator) / rational.denominator
        acc += mpmath.fsum(
            (mpmath.mpf(c.numerator) / c.denominator) * terms[q - 2]
            for q, c in enumerate(prod.coeffs)
            if c and q >= 2
        )
        return +acc


def stiffness_matrix(basis: CoulombBasis, bits: int | None = None) -> list:
    """Stiffness matrix entries as mpmath numbers (list of rows).

    Each entry is computed independently of the others, so the result does
    not depend on evaluation order.
    """
    bits = default_precision(basis.dimension) if bits is None else int(bits)
    d = basis.dimension
    S = [[None] * d for _ in range(d)]
    for i in range(d):
        for j in range(i, d):
            S[i][j] = S[j][i] = _stiffness_entry(basis.functions[i], basis.functions[j], bits)
    return S


def assemble(dim: int, bits: int | None = None) -> MatrixPair:
    basis = build_basis(dim)
    bits = default_precision(dim) if bits is None else int(bits)
    S = stiffness_matrix(basis, bits)
    with mpmath.workprec(bits):
        Sf = np.array([[float(x) for x in row] for row in S])
    return MatrixPair(
        mass=mass_matrix(basis),
        stiffness=Sf,
        mass_exact=basis.norms,
        stiffness_mp=S,
        precision_bits=bits,
    )


def solve_table1(dim: int, n_eigs: int | None = None, bits: int | None = None,
                 extended_precision: bool = False, pair: MatrixPair | None = None) -> SpectrumResult:
    """Rayleigh-Ritz upper bounds for the lowest levels below 1.

    The estimated error of level ``k`` is the drop ``lambda_k(dim-1) -
    lambda_k(dim)`` from the previous dimension (a truncation indicator;
    the values are upper bounds).

    Raises
    ------
    PrecisionError
        When the reduction to a standard problem breaks down.
    """
    n_eigs = dim if n_eigs is None else n_eigs
    if not 1 <= n_eigs <= dim:
        raise ValueError("n_eigs must be between 1 and dim")
    pair = assemble(dim, bits) if pair is None else pair

    def solve(k):
        if extended_precision:
            with mpmath.workprec(pair.precision_bits):
                Mk = [[mpmath.mpf(0)] * k for _ in range(k)]
                for i in range(k):
                    f = pair.mass_exact[i]
                    Mk[i][i] = mpmath.mpf(f.numerator) / f.denominator
                Sk = [row[:k] for row in pair.stiffness_mp[:k]]
                vals = gen_sym_eig_mp(Sk, Mk, min(n_eigs, k), prec=pair.precision_bits)
                return np.array([float(v) for v in vals])
        return gen_sym_eig(pair.stiffness[:k, :k], pair.mass[:k, :k], min(n_eigs, k))

    try:
        lam = solve(dim)
        prev = solve(dim - 1) if dim > 1 else None
    except NotPositiveDefiniteError as exc:
        raise PrecisionError(
            "mass matrix lost positive definiteness; increase precision_bits"
        ) from exc
    err = np.full(n_eigs, np.inf)
    if prev is not None:
        m = min(prev.size, n_eigs)
        err[:m] = prev[:m] - lam[:m]
    err = np.maximum(err, 1e-15)
    return SpectrumResult(
        eigenvalues=lam,
        method="rayleigh-ritz",
        grid_size=dim,
        domain_cutoff=math.inf,
        estimated_error=err,
        reliable=lam < 1.0,
        metadata={"precision_bits": pair.precision_bits, "upper_bounds": True,
                  "extended_precision": extended_precision},
    )


# ---------------------------------------------------------------------------
# eigenfunctions and the decoupled fluctuation


@dataclass
class GalerkinMode:
    """Eigenvector of the Galerkin problem as a function of ``r``."""

    dim: int
    eigenvalue: float
    coefficients: np.ndarray  # with respect to b_1..b_dim

    def __call__(self, r, order: int = 0):
        r = np.asarray(r, float)
        out = np.zeros_like(r)
        for n, c in enumerate(self.coefficients, start=1):
            out = out + c * _eval_basis(n, r, order)
        return out


def galerkin_mode(dim: int, k: int = 1, pair: MatrixPair | None = None) -> GalerkinMode:
    """The ``k``-th Galerkin eigenfunction (1-based), unit L2 norm."""
    pair = assemble(dim) if pair is None else pair
    lam, vecs = gen_sym_eig(pair.stiffness, pair.mass, k, return_vectors=True)
    c = vecs[:, k - 1]
    c = c / math.sqrt(float(c @ pair.mass @ c))
    if c[0] < 0:
        c = -c
    return GalerkinMode(dim=dim, eigenvalue=float(lam[k - 1]), coefficients=c)


def _g(r):
    # (1 - r coth r) / r = -phi(r)
    return -_phi(r)


def reconstruct_fluctuation(r, xi, dxi, omega: float):
    """Gauge and Higgs profiles ``(v, alpha)`` from the decoupled mode ``xi``.

    ``v = -(xi' + (1 - r coth r)/r xi)/omega`` and
    ``alpha = sqrt(2)/sinh(r) xi/omega``.

    Raises
    ------
    ValueError
        For ``omega == 0`` (the zero mode is not produced by this map).
    """
    if omega == 0:
        raise ValueError("omega must be nonzero")
    r = np.asarray(r, float)
    xi = np.asarray(xi, float)
    dxi = np.asarray(dxi, float)
    v = -(dxi + _g(r) * xi) / omega
    alpha = math.sqrt(2.0) / np.sinh(r) * xi / omega
    return v, alpha


def fluctuation_with_derivatives(r, xi_derivs, omega: float):
    """``(v, v', v'')`` and ``(alpha, alpha', alpha'')`` from ``xi`` and three derivatives."""
    if omega == 0:
        raise ValueError("omega must be nonzero")
    r = np.asarray(r, float)
    x0, x1, x2, x3 = (np.asarray(x, float) for x in xi_derivs)
    g = _g(r)
    csch2 = 1.0 / np.sinh(r) ** 2
    coth = 1.0 / np.tanh(r)
    g1 = -1.0 / r**2 + csch2
    g2 = 2.0 / r**3 - 2.0 * csch2 * coth
    v = -(x1 + g * x0) / omega
    v1 = -(x2 + g1 * x0 + g * x1) / omega
    v2 = -(x3 + g2 * x0 + 2 * g1 * x1 + g * x2) / omega
    s = math.sqrt(2.0) / np.sinh(r)
    s1 = -s * coth
    s2 = s * (coth**2 + csch2)
    a = s * x0 / omega
    a1 = (s1 * x0 + s * x1) / omega
    a2 = (s2 * x0 + 2 * s1 * x1 + s * x2) / omega
    return (v, v1, v2), (a, a1, a2)


def coupled_residual(r, v_derivs, alpha_derivs, omega2: float):
    """Residuals of the coupled gauge/Higgs radial system.

    ``-v'' + (3 csch^2 - 2 coth/r + coth^2) v + 2 sqrt2 coth csch alpha - omega2 v`` and
    ``-alpha'' + (2 csch^2 + 2/r^2) alpha + 2 sqrt2 coth csch v - omega2 alpha``.
    """
    r = np.asarray(r, float)
    v, _, v2 = v_derivs
    a, _, a2 = alpha_derivs
    csch = 1.0 / np.sinh(r)
    coth = 1.0 / np.tanh(r)
    kappa = 2.0 * math.sqrt(2.0) * coth * csch
    res_v = -v2 + (3 * csch**2 - 2 * coth / r + coth**2) * v + kappa * a - omega2 * v
    res_a = -a2 + (2 * csch**2 + 2 / r**2) * a + kappa * v - omega2 * a
    return res_v, res_a

"""Schroedinger operators ``-d^2/drho^2 + V`` on the half-line.

Potentials of interest behave like ``c2/rho^2`` at the origin and like
``C0 + C1/rho`` at infinity. This module classifies such potentials,
checks the Hardy lower bound, builds the dyadic trial-function certificate
for infinitely many bound states below ``C0`` and computes the low
spectrum with a second-order finite-volume scheme plus Richardson
extrapolation.

Finite-volume scheme
--------------------
With ``c2 = m^2 - 1/4`` write ``eta = g u`` where ``g = rho^(1/2+m)`` is the
regular branch at the origin. The eigenproblem becomes the weighted
Sturm-Liouville problem

    -(g^2 u')' + g^2 W u = eps g^2 u,   W = V - c2/rho^2,

whose natural boundary condition at ``rho = 0`` selects ``rho^(1/2+m)`` and
excludes the second branch (``rho^(1/2-m)`` or ``sqrt(rho) log rho``). Cells
are centred on uniform nodes, the mass uses exact cell integrals of
``rho^(1+2m)`` and a Dirichlet condition is imposed at the cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .linalg import tridiag_eig_bisect
from .specfun import DomainError

__all__ = [
    "HypothesisViolatedError",
    "ClassificationError",
    "NumericalError",
    "AsymptoticData",
    "PotentialProfile",
    "BoundaryRule",
    "SpectrumResult",
    "Bump",
    "HardyReport",
    "Certificate",
    "classify",
    "hardy_witness",
    "bound_state_certificate",
    "flatten_radial",
    "solve_fd",
    "tail_shift_estimate",
    "coulomb_profile",
    "calogero_profile",
    "fornberg_weights",
]


class HypothesisViolatedError(ValueError):
    """The potential does not satisfy the assumptions of the requested check."""


class ClassificationError(ValueError):
    """Asymptotic fit residuals exceed the configured threshold."""


class NumericalError(ArithmeticError):
    """Quadrature or solver did not reach the requested accuracy."""


@dataclass(frozen=True)
class AsymptoticData:
    """Asymptotic constants: ``V ~ c2/rho^2`` at 0 and ``V ~ C0 + C1/rho`` at infinity."""

    c2: float
    C0: float
    C1: float
    residuals: dict = field(default_factory=dict, compare=False)

    @property
    def m(self) -> float:
        """Branch index with ``c2 = m^2 - 1/4``; NaN below the Hardy threshold."""
        return math.sqrt(self.c2 + 0.25) if self.c2 >= -0.25 else float("nan")


@dataclass
class PotentialProfile:
    """Evaluatable potential with its asymptotic data.

    Parameters
    ----------
    evaluate : callable
        Vectorized ``V(rho)`` for ``rho > 0``.
    asymptotics : AsymptoticData
    description : str
    remainder : callable, optional
        ``W(rho) = V(rho) - c2/rho^2`` in a cancellation-free form. When
        omitted it is formed by subtraction.
    """

    evaluate: Callable
    asymptotics: AsymptoticData
    description: str = ""
    remainder: Callable | None = None

    def __call__(self, rho):
        return self.evaluate(rho)

    def W(self, rho):
        if self.remainder is not None:
            return self.remainder(rho)
        rho = np.asarray(rho, dtype=float)
        return self.evaluate(rho) - self.asymptotics.c2 / rho**2


@dataclass(frozen=True)
class BoundaryRule:
    """Behaviour imposed at ``rho = 0``.

    ``m`` picks the ``rho^(1/2+m)`` branch. With ``dirichlet=True`` the
    solver instead uses a plain Dirichlet condition at ``core_offset``
    (sensitivity checks only).
    """

    m: float
    dirichlet: bool = False
    core_offset: float = 0.0

    @property
    def small_rho_exponent(self) -> float:
        return 0.5 + self.m

    @property
    def limit_point(self) -> bool:
        return self.m >= 1.0

    @classmethod
    def from_asymptotics(cls, data: AsymptoticData, **kw) -> "BoundaryRule":
        if data.c2 < -0.25:
            raise HypothesisViolatedError("c2 < -1/4: operator is not bounded below")
        return cls(m=data.m, **kw)


@dataclass
class SpectrumResult:
    """Ordered eigenvalues with error estimates and provenance."""

    eigenvalues: np.ndarray
    method: str
    grid_size: int
    domain_cutoff: float
    estimated_error: np.ndarray
    reliable: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)
        self.estimated_error = np.asarray(self.estimated_error, dtype=float)
        self.reliable = np.asarray(self.reliable, dtype=bool)
        if np.any(np.diff(self.eigenvalues) < 0):
            raise ValueError("eigenvalues must be sorted ascending")

    def __len__(self):
        return self.eigenvalues.size


# ---------------------------------------------------------------------------
# profiles


def coulomb_profile(alpha: float = -2.0, l: int = 1, C0: float = 1.0) -> PotentialProfile:
    """``l(l+1)/rho^2 + alpha/rho + C0``; bound states ``C0 - alpha^2/(4 (n+l)^2)``."""
    c2 = float(l * (l + 1))
    return PotentialProfile(
        evaluate=lambda r: c2 / np.asarray(r, float) ** 2 + alpha / np.asarray(r, float) + C0,
        asymptotics=AsymptoticData(c2=c2, C0=C0, C1=alpha),
        description=f"Coulomb plus centrifugal (alpha={alpha}, l={l})",
        remainder=lambda r: alpha / np.asarray(r, float) + C0,
    )


def calogero_profile(c2: float) -> PotentialProfile:
    """Pure inverse-square potential ``c2/rho^2``."""
    return PotentialProfile(
        evaluate=lambda r: c2 / np.asarray(r, float) ** 2,
        asymptotics=AsymptoticData(c2=c2, C0=0.0, C1=0.0),
        description=f"inverse square c2={c2}",
        remainder=lambda r: np.zeros_like(np.asarray(r, float)),
    )


# ---------------------------------------------------------------------------
# classification


def _lstsq(cols, y):
    A = np.column_stack(cols)
    scale = np.linalg.norm(A, axis=0)
    coef, *_ = np.linalg.lstsq(A / scale, y, rcond=None)
    coef = coef / scale
    resid = y - A @ coef
    return coef, resid


def classify(evaluate: Callable, near: Sequence[float] | None = None,
             far: Sequence[float] | None = None, threshold: float = 1e-7) -> AsymptoticData:
    """Fit ``(c2, C0, C1)`` of a potential from samples near 0 and far out.

    Near the origin ``rho^2 V`` is fitted by a cubic in ``rho``; at large
    ``rho`` ``V`` is fitted by ``C0 + C1/rho`` plus ``1/rho^2``,
    ``log(rho)/rho^2``, ``1/rho^3`` and ``log(rho)/rho^3`` corrections.

    Raises
    ------
    ClassificationError
        If either fit has relative rms residual above ``threshold``.
    """
    near = np.geomspace(1e-6, 1e-3, 40) if near is None else np.asarray(near, float)
    far = np.geomspace(100.0, 1000.0, 60) if far is None else np.asarray(far, float)
    vn = np.asarray(evaluate(near), float) * near**2
    vf = np.asarray(evaluate(far), float)
    if not (np.all(np.isfinite(vn)) and np.all(np.isfinite(vf))):
        raise ClassificationError("potential is not finite on the fit windows")
    cn, rn = _lstsq([np.ones_like(near), near, near**2, near**3], vn)
    lf = np.log(far)
    cf, rf = _lstsq(
        [np.ones_like(far), 1 / far, 1 / far**2, lf / far**2, 1 / far**3, lf / far**3], vf
    )
    res_near = float(np.sqrt(np.mean(rn**2)) / max(np.max(np.abs(vn)), 1e-300))
    res_far = float(np.sqrt(np.mean(rf**2)) / max(np.max(np.abs(vf)), 1e-300))
    if res_near > threshold or res_far > threshold:
        raise ClassificationError(
            f"fit residuals near={res_near:.2e}, far={res_far:.2e} exceed {threshold:.1e}"
        )
    return AsymptoticData(
        c2=float(cn[0]), C0=float(cf[0]), C1=float(cf[1]),
        residuals={"near": res_near, "far": res_far},
    )


# ---------------------------------------------------------------------------
# trial functions and quadratic forms


@dataclass(frozen=True)
class Bump:
    """Smooth bump ``exp(-1/(t(1-t)))`` on ``[lo, hi]`` with ``t`` the rescaled variable.

    ``scale`` multiplies the function; :meth:`normalized` returns a copy
    with unit L2 norm.
    """

    lo: float = 1.0
    hi: float = 2.0
    scale: float = 1.0

    def _t(self, rho):
        return (np.asarray(rho, float) - self.lo) / (self.hi - self.lo)

    def __call__(self, rho):
        t = self._t(rho)
        inside = (t > 0) & (t < 1)
        tt = np.where(inside, t, 0.5)
        return np.where(inside, self.scale * np.exp(-1.0 / (tt * (1 - tt))), 0.0)

    def derivative(self, rho):
        t = self._t(rho)
        inside = (t > 0) & (t < 1)
        tt = np.where(inside, t, 0.5)
        g = tt * (1 - tt)
        val = self.scale * np.exp(-1.0 / g) * (1 - 2 * tt) / g**2 / (self.hi - self.lo)
        return np.where(inside, val, 0.0)

    def norm(self) -> float:
        v, _ = quad(lambda r: float(self(r)) ** 2, self.lo, self.hi, epsabs=1e-14, epsrel=1e-13)
        return math.sqrt(v)

    def normalized(self) -> "Bump":
        return Bump(self.lo, self.hi, self.scale / self.norm())

    def dilated(self, n: int) -> "Bump":
        """``2^(-n/2) u(2^(-n) rho)``: same norm, support scaled by ``2^n``."""
        f = 2.0**n
        return Bump(self.lo * f, self.hi * f, self.scale / math.sqrt(f))


def _form(profile: PotentialProfile, u: Bump, shift: float = 0.0, tol: float = 1e-10):
    """Kinetic, potential and norm integrals of a bump against ``V - shift``."""

    def integrate(fn):
        val, err = quad(fn, u.lo, u.hi, epsabs=tol, epsrel=1e-12, limit=200)
        if err > 10 * max(tol, 1e-12 * abs(val)):
            raise NumericalError(f"quadrature error {err:.2e} on [{u.lo}, {u.hi}]")
        return val

    kin = integrate(lambda r: float(u.derivative(r)) ** 2)
    pot = integrate(lambda r: (float(profile(r)) - shift) * float(u(r)) ** 2)
    nrm = integrate(lambda r: float(u(r)) ** 2)
    return kin, pot, nrm


@dataclass
class HardyReport:
    quotients: list
    inf_W: float
    min_quotient: float
    passed: bool


def hardy_witness(profile: PotentialProfile, test_functions: Sequence[Bump] | None = None,
                  w_grid: np.ndarray | None = None) -> HardyReport:
    """Rayleigh quotients of compactly supported test functions versus ``inf W``.

    For ``c2 >= -1/4`` Hardy's inequality gives
    ``<H u, u> / <u, u> >= inf W`` for every admissible ``u``. ``inf W`` is
    taken over a logarithmic grid on ``(1e-6, max support]``.

    Raises
    ------
    HypothesisViolatedError
        If ``c2 < -1/4``.
    """
    c2 = profile.asymptotics.c2
    if c2 < -0.25:
        raise HypothesisViolatedError(f"c2 = {c2} < -1/4: Hardy bound does not apply")
    if test_functions is None:
        test_functions = [Bump(1, 2), Bump(2, 4), Bump(4, 8)]
    top = max(u.hi for u in test_functions)
    grid = np.geomspace(1e-6, top, 20001) if w_grid is None else np.asarray(w_grid, float)
    inf_W = float(np.min(profile.W(grid)))
    quotients = []
    for u in test_functions:
        kin, pot, nrm = _form(profile, u)
        quotients.append((kin + pot) / nrm)
    qmin = min(quotients)
    return HardyReport(quotients=quotients, inf_W=inf_W, min_quotient=qmin, passed=qmin >= inf_W)


@dataclass
class Certificate:
    """Shifted Rayleigh quotients of the dyadic family and the verdict."""

    quotients: list  # (n, <(H - C0) u_n, u_n>)
    kinetic: list
    potential: list
    success: bool
    longest_negative_run: int


def bound_state_certificate(profile: PotentialProfile, seed_bump: Bump | None = None,
                            n_max: int = 12, n_min: int = 0) -> Certificate:
    """Dyadic trial functions witnessing infinitely many levels below ``C0``.

    The family ``u_n(rho) = 2^(-n/2) u(2^(-n) rho)`` is orthonormal with
    disjoint supports ``[2^n, 2^(n+1)]``. Each shifted quotient
    ``<(H - C0) u_n, u_n>`` equals ``4^(-n) int |u'|^2`` plus the potential
    term, which behaves like ``2^(-n) C1 int |u|^2 / sigma`` when
    ``C1 < 0``. Three consecutive negative quotients count as success.

    Raises
    ------
    HypothesisViolatedError
        If ``C1 >= 0``.
    """
    C0, C1 = profile.asymptotics.C0, profile.asymptotics.C1
    if C1 >= 0:
        raise HypothesisViolatedError(f"C1 = {C1} >= 0: no Coulomb attraction at infinity")
    u = (seed_bump or Bump(1.0, 2.0)).normalized()
    kin0, _, _ = _form(calogero_profile(0.0), u)
    out, kins, pots = [], [], []
    run = best = 0
    for n in range(n_min, n_max + 1):
        f = 2.0**n
        # potential term in the seed variable sigma = rho / 2^n
        val, err = quad(lambda s: (float(profile(f * s)) - C0) * float(u(s)) ** 2,
                        u.lo, u.hi, epsabs=1e-10 * min(1.0, 1.0 / f), epsrel=1e-12, limit=200)
        if err > 1e-8 * max(1.0, abs(val)):
            raise NumericalError(f"quadrature did not converge for n={n}")
        kin = kin0 / f**2
        q = kin + val
        out.append((n, q))
        kins.append(kin)
        pots.append(val)
        run = run + 1 if q < 0 else 0
        best = max(best, run)
    return Certificate(quotients=out, kinetic=kins, potential=pots, success=best >= 3,
                       longest_negative_run=best)


# ---------------------------------------------------------------------------
# nu''/nu


def fornberg_weights(x0: float, x: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights for derivative ``order`` at ``x0`` from nodes ``x``."""
    x = np.asarray(x, float)
    n = x.size
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def flatten_radial(nu, grid, d2nu=None) -> np.ndarray:
    """Effective potential ``nu''/nu`` from the radial reduction.

    Parameters
    ----------
    nu : callable or array_like
        Positive function (or its samples on ``grid``).
    grid : array_like
        Increasing sample points.
    d2nu : callable or array_like, optional
        Analytic second derivative. Without it a five-point stencil is used,
        centred in the interior and one-sided at the two ends.
    """
    grid = np.asarray(grid, float)
    vals = np.asarray(nu(grid) if callable(nu) else nu, float)
    if np.any(vals <= 0):
        raise DomainError("nu must be positive on the grid")
    if d2nu is not None:
        second = np.asarray(d2nu(grid) if callable(d2nu) else d2nu, float)
        return second / vals
    n = grid.size
    if n < 5:
        raise ValueError("need at least five samples for the difference stencil")
    second = np.empty(n)
    for i in range(n):
        lo = min(max(i - 2, 0), n - 5)
        sl = slice(lo, lo + 5)
        second[i] = fornberg_weights(grid[i], grid[sl], 2) @ vals[sl]
    return second / vals


# ---------------------------------------------------------------------------
# finite-volume spectrum


def _fv_matrix(W: Callable, m: float, cutoff: float, n: int):
    """Symmetric tridiagonal matrix of the weighted finite-volume scheme."""
    h = cutoff / n
    e = 1.0 + 2.0 * m
    faces = (np.arange(n) + 0.5) * h  # face k sits between nodes k and k+1
    p_face = faces**e
    cum = faces ** (e + 1) / (e + 1)
    w = np.diff(np.concatenate([[0.0], cum]))  # exact cell integrals of rho^e
    nodes = np.arange(n) * h
    nodes[0] = (e + 1) / (e + 2) * 0.5 * h  # weighted centroid of the half cell
    A = np.empty(n)
    A[0] = p_face[0] / h
    A[1:] = (p_face[:-1] + p_face[1:]) / h
    A += np.asarray(W(nodes), float) * w
    off = -p_face[:-1] / h
    s = 1.0 / np.sqrt(w)
    return A * s * s, off * s[:-1] * s[1:]


def _dirichlet_matrix(V: Callable, rho0: float, cutoff: float, n: int):
    h = (cutoff - rho0) / n
    nodes = rho0 + h * np.arange(1, n)
    d = 2.0 / h**2 + np.asarray(V(nodes), float)
    off = np.full(n - 2, -1.0 / h**2)
    return d, off


def tail_shift_estimate(C0: float, C1: float, eps: float, cutoff: float) -> float:
    """Rough upper estimate of the shift caused by truncating at ``cutoff``.

    WKB decay of a level ``eps < C0`` in the tail ``C0 + C1/rho`` gives a
    shift of order ``4 kappa^2 exp(-2 int_{rho_t}^{L} sqrt(kappa^2 + C1/rho))``
    with ``kappa^2 = C0 - eps`` and ``rho_t`` the turning point. Returns
    ``inf`` when the turning point lies beyond the cutoff.
    """
    k2 = C0 - eps
    if k2 <= 0:
        return math.inf
    rt = max(-C1 / k2, 0.0) if C1 < 0 else 0.0
    if rt >= cutoff:
        return math.inf
    integral, _ = quad(lambda r: math.sqrt(max(k2 + C1 / r, 0.0)), max(rt, 1e-12), cutoff,
                       limit=200)
    return 4.0 * k2 * math.exp(-2.0 * integral)


def solve_fd(profile: PotentialProfile, rule: BoundaryRule, cutoff: float, grid_size: int,
             n_eigs: int, refinements: int = 2, tail_tol: float = 1e-8,
             backend: str | None = None) -> SpectrumResult:
    """Lowest eigenvalues by finite volumes, Sturm bisection and Richardson extrapolation.

    The scheme runs on ``grid_size * 2**j`` cells for ``j = 0..refinements``
    and removes the ``h^2`` and ``h^4`` terms. The estimated error per level
    is the larger of the last Richardson correction and the tail estimate
    from :func:`tail_shift_estimate`. Levels too close to ``C0`` for the
    cutoff are flagged in ``reliable`` rather than dropped.
    """
    if grid_size < 200:
        raise ValueError("grid_size must be at least 200")
    if n_eigs < 1:
        raise ValueError("n_eigs must be positive")
    if refinements < 0:
        raise ValueError("refinements must be nonnegative")
    data = profile.asymptotics
    runs = []
    for j in range(refinements + 1):
        n = grid_size * 2**j
        if rule.dirichlet:
            d, off = _dirichlet_matrix(profile.evaluate, rule.core_offset, cutoff, n)
        else:
            d, off = _fv_matrix(profile.W, rule.m, cutoff, n)
        k = min(n_eigs, d.size)
        runs.append(tridiag_eig_bisect(d, off, (0, k), backend=backend))
    k = min(len(r) for r in runs)
    table = np.array([r[:k] for r in runs])
    # Richardson tableau in h^2, h^4, ...
    levels = [table]
    for p in range(1, refinements + 1):
        prev = levels[-1]
        f = 4.0**p
        levels.append((f * prev[1:] - prev[:-1]) / (f - 1.0))
    best = levels[-1][-1]
    if refinements >= 1:
        rich_err = np.abs(best - levels[-2][-1])
    else:
        rich_err = np.full(k, np.nan)
    tails = np.array([tail_shift_estimate(data.C0, data.C1, e, cutoff) for e in best])
    err = np.maximum(np.nan_to_num(rich_err, nan=np.inf), tails)
    err = np.maximum(err, 4 * np.finfo(float).eps * np.maximum(np.abs(best), 1.0))
    reliable = (best < data.C0) & (data.C0 - best > 5.0 * tails) & (tails <= tail_tol)
    order = np.argsort(best)
    return SpectrumResult(
        eigenvalues=best[order],
        method="dirichlet-fd" if rule.dirichlet else "finite-volume",
        grid_size=grid_size,
        domain_cutoff=cutoff,
        estimated_error=err[order],
        reliable=reliable[order],
        metadata={
            "grids": [grid_size * 2**j for j in range(refinements + 1)],
            "raw": table[:, order].tolist(),
            "richardson_error": rich_err[order].tolist(),
            "tail_estimate": tails[order].tolist(),
            "m": rule.m,
            "backend": backend,
        },
    )

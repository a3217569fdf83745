"""Radial geometry of the Atiyah-Hitchin metric.

The metric functions ``a, b, c`` of the radial coordinate ``r > pi`` obey
the self-duality system (gauge ``f = -b/r``)

    a' = (a^2 - (b - c)^2) / (2 r c)
    b' = b (b^2 - (c - a)^2) / (2 r c a)
    c' = (c^2 - (a - b)^2) / (2 r a)

with ``(a, b, c) -> (0, pi, -pi)`` as ``r -> pi``. Two independent
constructions are provided: numerical integration of the system and the
elliptic-integral closed form parametrised by ``beta in (0, pi)``. The
proper radial distance is ``R = int_pi^r b(s)/s ds`` and ``nu = sqrt(-abc)``.

The closed form is evaluated in terms of ``k = sin(beta/2)`` and the
quantity ``T`` of :func:`specfun.elliptic_agm`, for which

    r = 2K,  w2 = -4 K^2 k^2 T,  w3 = 4 K^2 k^2 (1 - T),  w1 = -4 K^2 (k^2 T + k'^2).

These expressions have no cancellation as ``beta -> 0``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad, solve_ivp

from .specfun import DomainError, elliptic_agm

__all__ = [
    "IntegrationError",
    "MetricTable",
    "self_duality_rhs",
    "self_duality_residual",
    "closed_form_abc",
    "closed_form_full",
    "beta_from_r",
    "closed_form_at_r",
    "taub_nut_abc",
    "integrate_abc",
    "proper_distance",
    "nu_and_derivatives",
    "nu_derivatives",
    "AHMetric",
    "build_metric",
    "write_metric_csv",
    "METRIC_COLUMNS",
]

METRIC_COLUMNS = ("r", "beta", "R", "a", "b", "c", "nu", "dnu_dR", "d2nu_dR2")


class IntegrationError(ArithmeticError):
    """ODE integration failed or left the admissible region."""


# ---------------------------------------------------------------------------
# the ODE system


def self_duality_rhs(r, a, b, c):
    """``(da/dr, db/dr, dc/dr)`` of the self-duality system."""
    da = (a * a - (b - c) ** 2) / (2 * r * c)
    db = b * (b * b - (c - a) ** 2) / (2 * r * c * a)
    dc = (c * c - (a - b) ** 2) / (2 * r * a)
    return da, db, dc


def self_duality_residual(r, a, b, c, da, db, dc):
    """Residuals of ``(2bc/f) a' - (b-c)^2 + a^2`` and cyclic, with ``f = -b/r``."""
    f = -b / r
    return (
        2 * b * c / f * da - ((b - c) ** 2 - a * a),
        2 * c * a / f * db - ((c - a) ** 2 - b * b),
        2 * a * b / f * dc - ((a - b) ** 2 - c * c),
    )


def _second_derivatives(r, a, b, c):
    """First and second r-derivatives of (a, b, c) from the ODE by the quotient rule."""
    da, db, dc = self_duality_rhs(r, a, b, c)
    Na = a * a - (b - c) ** 2
    Da = 2 * r * c
    dda = ((2 * a * da - 2 * (b - c) * (db - dc)) * Da - Na * (2 * c + 2 * r * dc)) / Da**2
    Nb = b * (b * b - (c - a) ** 2)
    Db = 2 * r * c * a
    dNb = db * (b * b - (c - a) ** 2) + b * (2 * b * db - 2 * (c - a) * (dc - da))
    dDb = 2 * (c * a + r * dc * a + r * c * da)
    ddb = (dNb * Db - Nb * dDb) / Db**2
    Nc = c * c - (a - b) ** 2
    Dc = 2 * r * a
    ddc = ((2 * c * dc - 2 * (a - b) * (da - db)) * Dc - Nc * (2 * a + 2 * r * da)) / Dc**2
    return (da, db, dc), (dda, ddb, ddc)


def nu_derivatives(r, a, b, c):
    """``nu = sqrt(-abc)`` with analytic ``dnu/dR`` and ``d2nu/dR2``.

    ``dR/dr = b/r``; derivatives of ``a, b, c`` come from the ODE itself.
    """
    (da, db, dc), (dda, ddb, ddc) = _second_derivatives(r, a, b, c)
    P = -a * b * c
    P1 = -(da * b * c + a * db * c + a * b * dc)
    P2 = -(dda * b * c + a * ddb * c + a * b * ddc + 2 * (da * db * c + da * b * dc + a * db * dc))
    nu = np.sqrt(P)
    nu_r = P1 / (2 * nu)
    nu_rr = P2 / (2 * nu) - P1**2 / (4 * nu**3)
    s = r / b  # dr/dR
    s_r = (b - r * db) / b**2
    nu_R = s * nu_r
    nu_RR = s * (s_r * nu_r + s * nu_rr)
    return nu, nu_R, nu_RR


# ---------------------------------------------------------------------------
# closed form


def closed_form_full(beta):
    """Closed-form solution at angle ``beta``, with intermediate quantities.

    Returns a dict with keys ``r, dr_dbeta, w1, w2, w3, a, b, c, k, kp``.

    Raises
    ------
    DomainError
        Unless ``0 < beta < pi``.
    """
    beta = np.asarray(beta, float)
    if np.any(~((beta > 0) & (beta < math.pi))):
        raise DomainError("closed form needs 0 < beta < pi")
    k = np.sin(0.5 * beta)
    kp = np.cos(0.5 * beta)
    return _closed_from_moduli(k, kp)


def _closed_from_moduli(k, kp):
    K, _, T = elliptic_agm(k, kp)
    r = 2 * K
    k2 = k * k
    w2 = -4 * K * K * k2 * T
    w3 = 4 * K * K * k2 * (1 - T)
    w1 = -4 * K * K * (k2 * T + kp * kp)
    root = np.sqrt((1 - T) * (k2 * T + kp * kp) / T)
    a = 2 * K * k2 * np.sqrt(T * (1 - T) / (k2 * T + kp * kp))
    b = 2 * K * root
    c = -2 * K * np.sqrt(T * (k2 * T + kp * kp) / (1 - T))
    # dr/dbeta = 2 dK/dk * dk/dbeta = K k T / k'
    dr = K * k * T / kp
    return {"r": r, "dr_dbeta": dr, "w1": w1, "w2": w2, "w3": w3, "a": a, "b": b, "c": c,
            "k": k, "kp": kp}


def closed_form_abc(beta):
    """``(r, a, b, c)`` of the closed-form solution at ``beta in (0, pi)``."""
    d = closed_form_full(beta)
    out = (d["r"], d["a"], d["b"], d["c"])
    if np.ndim(beta) == 0:
        return tuple(float(x) for x in out)
    return out


def _moduli_from_log(t):
    kp = np.exp(t)
    k = np.sqrt(-np.expm1(2 * t))
    return k, kp


def beta_from_r(r, tol: float = 1e-15, max_iter: int = 60):
    """Invert ``r = 2K(sin(beta/2))`` by Newton's method on ``log(cos(beta/2))``.

    Works for ``pi < r`` up to about 1400, where ``cos(beta/2)`` underflows.
    Returns ``(beta, k, k')``.
    """
    r = np.atleast_1d(np.asarray(r, float))
    if np.any(~(r > math.pi)):
        raise DomainError("need r > pi")
    if np.any(r > 1400):
        raise DomainError("r too large for double-precision inversion")
    x = r - math.pi
    # starting guesses from the two limits
    t_small = 0.5 * np.log1p(-np.minimum(4 * x / math.pi, 0.9))
    t_large = math.log(4.0) - 0.5 * r
    t = np.where(x < 0.5, t_small, np.minimum(t_large, -1e-3))
    for _ in range(max_iter):
        k, kp = _moduli_from_log(t)
        K, _, T = elliptic_agm(k, kp)
        g = 2 * K - r
        slope = -2 * K * T  # d(2K)/dt
        step = g / slope
        t_new = t - step
        t_new = np.where(t_new >= 0, 0.5 * t, t_new)
        done = np.abs(t_new - t) <= tol * np.maximum(1.0, np.abs(t))
        t = t_new
        if np.all(done):
            break
    k, kp = _moduli_from_log(t)
    beta = 2 * np.arctan2(k, kp)
    return beta, k, kp


def closed_form_at_r(r):
    """Closed-form ``(beta, a, b, c)`` at radial coordinate(s) ``r``."""
    scalar = np.ndim(r) == 0
    beta, k, kp = beta_from_r(r)
    d = _closed_from_moduli(k, kp)
    out = (beta, d["a"], d["b"], d["c"])
    if scalar:
        return tuple(float(np.asarray(x).ravel()[0]) for x in out)
    return out


def taub_nut_abc(r):
    """Taub-NUT coefficients ``a = b = r sqrt(1-2/r)``, ``c = -2/sqrt(1-2/r)``."""
    r = np.asarray(r, float)
    if np.any(~(r > 2)):
        raise DomainError("Taub-NUT coefficients need r > 2")
    q = np.sqrt(1 - 2 / r)
    a = r * q
    c = -2 / q
    if a.ndim == 0:
        return float(a), float(a), float(c)
    return a, a.copy(), c


# ---------------------------------------------------------------------------
# tables


@dataclass
class MetricTable:
    """Samples of the radial geometry, ordered by ``r``."""

    r: np.ndarray
    beta: np.ndarray
    R: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    nu: np.ndarray | None = None
    dnu_dR: np.ndarray | None = None
    d2nu_dR2: np.ndarray | None = None
    interpolant: Callable | None = field(default=None, repr=False)
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return self.r.size

    def check_invariants(self, raise_on_failure: bool = True) -> bool:
        # b - a ~ r^2 exp(-r) drops below the integration accuracy beyond r ~ 30,
        # so b > a is asserted only up to that resolution
        rel = max(float(self.metadata.get("rtol", 0.0)), 16 * np.finfo(float).eps)
        slack = rel * np.abs(self.b)
        ok = bool(
            np.all(self.b - self.a > -slack) and np.all(self.a > 0) and np.all(self.c < -2)
            and np.all(-self.a * self.b * self.c > 0) and np.all(np.diff(self.r) > 0)
            and (self.R is None or np.all(np.diff(self.R) > 0))
        )
        if not ok and raise_on_failure:
            raise IntegrationError("metric invariants b > a > 0, c < -2 violated")
        return ok

    def columns(self):
        return {name: getattr(self, name) for name in METRIC_COLUMNS}


def _offset_start(h):
    return [math.pi + h, 2 * h, math.pi + h, -math.pi + h]


def _rhs_r(r, y):
    a, b, c = y
    return list(self_duality_rhs(r, a, b, c))


def _integrate_from(r0, y0, r_max, rtol):
    sol = solve_ivp(_rhs_r, (r0, r_max), y0, method="DOP853", rtol=rtol, atol=rtol * 1e-2,
                    dense_output=True)
    if not sol.success:
        raise IntegrationError(f"integration failed: {sol.message}; try a larger core offset")
    if np.any(sol.y[0] <= 0) or np.any(sol.y[2] >= 0):
        raise IntegrationError("solution left the region a > 0, c < 0")
    return sol


def _core_distance(x):
    # R(pi + x) for small x: dR/dr = b/r = 1 - x/(2 pi) + O(x^2)
    return x - x * x / (4 * math.pi)


def integrate_abc(r_max: float, step_control: float = 1e-12, h: float = 1e-3,
                  grid=None, richardson: bool = True) -> MetricTable:
    """Integrate the self-duality system outward from the offset core data.

    The start is ``(a, b, c) = (2h, pi + h, -pi + h)`` at ``r = pi + h``. With
    ``richardson`` the integration is repeated for ``h/2`` and ``h/4`` and
    the three solutions are combined to cancel the ``h^2`` and ``h^3``
    offset errors. Rows are the adaptive nodes of the finest run plus
    ``grid``; the ``R`` and ``nu`` columns are filled in.
    """
    hs = [h, h / 2, h / 4] if richardson else [h]
    if r_max <= math.pi + h:
        raise ValueError("r_max must exceed pi + h")
    # the combination below amplifies the independent dense-output errors of the
    # runs, so each run is integrated tighter to keep the combined target
    run_tol = max(step_control / 30, 3e-14) if richardson else step_control
    sols = [_integrate_from(math.pi + hh, _offset_start(hh)[1:], r_max, run_tol) for hh in hs]
    fine = sols[-1]
    nodes = fine.t
    if grid is not None:
        g = np.asarray(grid, float)
        g = g[(g >= math.pi + h) & (g <= r_max)]
        nodes = np.union1d(nodes, g)
    nodes = nodes[nodes >= math.pi + h]

    def combined(r):
        r = np.asarray(r, float)
        vals = [s.sol(r) for s in sols]
        if len(vals) == 1:
            return vals[0]
        y1, y2, y3 = vals
        # error model c2 h^2 + c3 h^3 for offsets h, h/2, h/4
        return (y1 - 12 * y2 + 32 * y3) / 21

    a, b, c = combined(nodes)
    raw_gap = np.max(np.abs(sols[0].sol(nodes) - np.vstack([a, b, c])), axis=1)

    def interp(r):
        return tuple(combined(r))

    table = MetricTable(
        r=nodes, beta=beta_from_r(nodes)[0], R=None, a=a, b=b, c=c, interpolant=interp,
        metadata={
            "core_offsets": hs,
            "rtol": step_control,
            "offset_error_single_h": raw_gap.tolist(),
            "solutions": sols,
        },
    )
    proper_distance(table)
    nu_and_derivatives(table)
    table.check_invariants()
    return table


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def proper_distance(table: MetricTable) -> MetricTable:
    """Fill ``table.R`` with ``int_pi^r b(s)/s ds`` by cumulative Gauss-Legendre quadrature.

    Uses the table interpolant on each interval and the near-core expansion
    ``R = x - x^2/(4 pi)`` (``x = r - pi``) for the first row.
    """
    r = table.r
    if np.any(np.diff(r) <= 0):
        raise ValueError("table must be strictly increasing in r")
    if table.interpolant is None:
        raise ValueError("table has no interpolant for quadrature")
    lo, hi = r[:-1], r[1:]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * _GL_X[None, :]
    _, bq, _ = table.interpolant(pts.ravel())
    vals = (bq / pts.ravel()).reshape(pts.shape)
    pieces = half * (vals @ _GL_W)
    R0 = _core_distance(r[0] - math.pi)
    table.R = R0 + np.concatenate([[0.0], np.cumsum(pieces)])
    return table


def nu_and_derivatives(table: MetricTable) -> MetricTable:
    """Fill ``nu``, ``dnu_dR`` and ``d2nu_dR2`` analytically from the ODE right-hand side."""
    table.nu, table.dnu_dR, table.d2nu_dR2 = nu_derivatives(table.r, table.a, table.b, table.c)
    return table


# ---------------------------------------------------------------------------
# metric on the R-line


def _rhs_R(R, y):
    r, a, b, c = y
    s = r / b
    da, db, dc = self_duality_rhs(r, a, b, c)
    return [s, s * da, s * db, s * dc]


class AHMetric:
    """The radial geometry as a function of the proper distance ``R``.

    The initial point is taken from the closed form at a small angle
    ``beta0``, where ``R(beta0)`` is the integral of ``(b/r) dr/dbeta``; the
    system is then integrated in ``R`` with dense output up to ``R_max``.
    """

    def __init__(self, R_max: float, beta0: float = 0.05, rtol: float = 1e-13):
        self.R_max = float(R_max)
        self.beta0 = float(beta0)

        def dR_dbeta(bb):
            d = closed_form_full(bb)
            return float(d["b"] / d["r"] * d["dr_dbeta"])

        R0, _ = quad(dR_dbeta, 0.0, beta0, epsabs=1e-16, epsrel=1e-14)
        r0, a0, b0, c0 = closed_form_abc(beta0)
        self.R0 = R0
        sol = solve_ivp(_rhs_R, (R0, self.R_max), [r0, a0, b0, c0], method="DOP853",
                        rtol=rtol, atol=rtol * 1e-2, dense_output=True)
        if not sol.success:
            raise IntegrationError(sol.message)
        self._sol = sol

    def at(self, R):
        """``(r, a, b, c)`` at proper distance ``R`` (``R0 <= R <= R_max``)."""
        R = np.asarray(R, float)
        if np.any(R < self.R0 * (1 - 1e-12)) or np.any(R > self.R_max * (1 + 1e-12)):
            raise DomainError(f"R outside the integrated range [{self.R0}, {self.R_max}]")
        return self._sol.sol(R)

    def nu(self, R):
        r, a, b, c = self.at(R)
        return nu_derivatives(r, a, b, c)

    def table(self, R_grid) -> MetricTable:
        R_grid = np.asarray(R_grid, float)
        r, a, b, c = self.at(R_grid)
        t = MetricTable(r=r, beta=beta_from_r(r)[0], R=R_grid, a=a, b=b, c=c,
                        interpolant=None, metadata={"R0": self.R0, "beta0": self.beta0})
        nu_and_derivatives(t)
        return t


_METRIC_CACHE: dict = {}


def build_metric(R_max: float) -> AHMetric:
    """Cached :class:`AHMetric` covering at least ``[R0, R_max]``."""
    for key, m in _METRIC_CACHE.items():
        if key >= R_max:
            return m
    m = AHMetric(R_max)
    _METRIC_CACHE[R_max] = m
    return m


def write_metric_csv(table: MetricTable, path_or_file) -> None:
    """Write the table with header ``r,beta,R,a,b,c,nu,dnu_dR,d2nu_dR2``."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh)
        w.writerow(METRIC_COLUMNS)
        cols = [np.asarray(getattr(table, n), float) for n in METRIC_COLUMNS]
        for row in zip(*cols):
            w.writerow([f"{x:.17g}" for x in row])
    finally:
        if own:
            fh.close()

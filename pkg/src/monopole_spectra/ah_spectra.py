"""Single-channel radial spectra of the Laplacian on the Atiyah-Hitchin space.

For the channels ``(j, s) = (1, 1), (2, 1), (3, 2)`` the radial equation is

    -(1/(abcf)) d/dr ((abc/f) du/dr) + V_js u = eps u,

with ``V_11 = 1/b^2 + 1/c^2``, ``V_21 = 4/a^2 + 1/b^2 + 1/c^2`` and
``V_32 = 4(1/a^2 + 1/b^2 + 1/c^2)``. Substituting ``eta = nu u`` on the
proper-distance line gives ``-eta'' + (nu''/nu + V_js) eta = eps eta``.

Two discretizations are provided and serve as mutual checks: the
``R``-line form through :func:`halfline.solve_fd`, and a finite-volume
discretization of the weighted ``r``-form built from the closed-form
metric. The Taub-NUT approximation has closed-form levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .ah_geometry import AHMetric, build_metric, closed_form_at_r, nu_derivatives
from .halfline import (
    AsymptoticData,
    BoundaryRule,
    PotentialProfile,
    SpectrumResult,
    solve_fd,
    tail_shift_estimate,
)
from .linalg import tridiag_eig_bisect
from .specfun import DomainError

__all__ = [
    "Channel",
    "CHANNELS",
    "ChannelPotential",
    "channel_potential",
    "channel_V",
    "default_cutoff",
    "solve_channel",
    "solve_channel_weighted",
    "taub_nut_eigs",
    "agreement_report",
]


@dataclass(frozen=True)
class Channel:
    """Total angular momentum ``j`` and relative charge ``s``."""

    j: int
    s: int

    def __post_init__(self):
        if (self.j, self.s) not in _ASYMPTOTICS:
            raise ValueError(f"channel ({self.j},{self.s}) has no single radial equation here")

    @classmethod
    def parse(cls, text: str) -> "Channel":
        j, s = (int(x) for x in str(text).replace(" ", "").split(","))
        return cls(j, s)

    @property
    def asymptotics(self) -> AsymptoticData:
        c2, C0, C1 = _ASYMPTOTICS[(self.j, self.s)]
        return AsymptoticData(c2=c2, C0=C0, C1=C1)

    @property
    def m(self) -> float:
        return self.asymptotics.m

    def __str__(self):
        return f"{self.j},{self.s}"


_ASYMPTOTICS = {
    (1, 1): (-0.25, 0.25, -0.5),
    (2, 1): (0.75, 0.25, -0.5),
    (3, 2): (0.75, 1.0, -2.0),
}

CHANNELS = tuple(Channel(j, s) for j, s in _ASYMPTOTICS)


def channel_V(channel: Channel, a, b, c):
    """Angular potential ``V_js`` from the metric coefficients."""
    key = (channel.j, channel.s)
    if key == (1, 1):
        return 1 / b**2 + 1 / c**2
    if key == (2, 1):
        return 4 / a**2 + 1 / b**2 + 1 / c**2
    return 4 / a**2 + 4 / b**2 + 4 / c**2


@dataclass
class ChannelPotential:
    """Effective potential of a channel on the ``R``-line."""

    channel: Channel
    R: np.ndarray
    values: np.ndarray
    asymptotics: AsymptoticData
    profile: PotentialProfile
    near_core: tuple  # (w0, w1): W ~ w0 + w1 R below R_switch
    R_switch: float
    metadata: dict = field(default_factory=dict)


def _raw_W(channel: Channel, metric: AHMetric, R):
    R = np.asarray(R, float)
    r, a, b, c = metric.at(R)
    nu, _, nu_RR = nu_derivatives(r, a, b, c)
    return nu_RR / nu + channel_V(channel, a, b, c) - channel.asymptotics.c2 / R**2


def channel_potential(channel: Channel, metric: AHMetric | None = None, R_max: float = 100.0,
                      R_switch: float = 1e-2, grid=None) -> ChannelPotential:
    """``V_eff = nu''/nu + V_js`` on the ``R``-line.

    Below ``R_switch`` the smooth part ``W = V_eff - c2/R^2`` is replaced by
    the line ``w0 + w1 R`` fitted on ``[R_switch, 2 R_switch]``.

    Raises
    ------
    DomainError
        If the metric does not cover ``[R_switch, R_max]``.
    """
    metric = build_metric(R_max) if metric is None else metric
    if metric.R0 >= R_switch or metric.R_max < R_max:
        raise DomainError("metric does not cover the requested R range")
    data = channel.asymptotics
    fit_R = np.linspace(R_switch, 2 * R_switch, 9)
    w1, w0 = np.polyfit(fit_R, _raw_W(channel, metric, fit_R), 1)

    def W(R):
        R = np.asarray(R, float)
        inner = R < R_switch
        Rc = np.where(inner, R_switch, R)
        out = np.where(inner, w0 + w1 * R, _raw_W(channel, metric, Rc))
        return float(out) if out.ndim == 0 else out

    def V(R):
        R = np.asarray(R, float)
        return W(R) + data.c2 / R**2

    grid = np.geomspace(max(metric.R0, 1e-3), R_max, 400) if grid is None else np.asarray(grid, float)
    profile = PotentialProfile(evaluate=V, asymptotics=data,
                               description=f"effective potential, channel ({channel})", remainder=W)
    return ChannelPotential(channel=channel, R=grid, values=V(grid), asymptotics=data,
                            profile=profile, near_core=(float(w0), float(w1)), R_switch=R_switch,
                            metadata={"R0": metric.R0})


def default_cutoff(channel: Channel, n_eigs: int) -> float:
    """Cutoff of about three classical turning radii of the highest requested level.

    A level with effective principal number ``n = n_eigs + j`` turns near
    ``R_t = -4 n^2 / C1`` in the Coulomb tail. ``3 R_t + 50`` (rounded up to
    a multiple of 50) keeps the truncation shift far below the
    discretization error.
    """
    C1 = channel.asymptotics.C1
    n = n_eigs + channel.j
    return float(math.ceil(6.0 * n * n / (-C1 / 2.0) / 50.0) * 50.0 + 50.0)


def solve_channel(channel: Channel, cutoff: float | None = None, grid_size: int | None = None,
                  n_eigs: int = 4, refinements: int = 2, R_switch: float = 1e-2,
                  dirichlet: bool = False, core_offset: float = 0.0,
                  backend: str | None = None) -> SpectrumResult:
    """Lowest levels of the ``R``-line channel operator.

    Uses the ``sqrt(R)`` branch (``m = 0``) for ``(1, 1)`` and ``m = 1`` for
    the others. Defaults: cutoff from :func:`default_cutoff` and spacing
    ``0.1`` on the coarsest of three grids.
    """
    cutoff = default_cutoff(channel, n_eigs) if cutoff is None else float(cutoff)
    grid_size = int(round(cutoff * 10)) if grid_size is None else int(grid_size)
    metric = build_metric(cutoff + 1.0)
    pot = channel_potential(channel, metric, R_max=cutoff, R_switch=R_switch)
    rule = BoundaryRule(m=channel.m, dirichlet=dirichlet, core_offset=core_offset)
    res = solve_fd(pot.profile, rule, cutoff, grid_size, n_eigs, refinements=refinements,
                   backend=backend)
    res.method = f"R-line {res.method}"
    res.metadata.update({"channel": str(channel), "R_switch": R_switch,
                         "near_core_fit": pot.near_core})
    return res


def _cutoff_in_r(R_target: float) -> float:
    """``r`` with ``int_pi^r b/s ds = R_target`` from the closed form alone."""

    def integrand(x):
        return closed_form_at_r(x)[2] / x

    def R_of(r):
        pts = [math.pi, math.pi + 1.0, math.pi + 10.0]
        pts = [p for p in pts if p < r] + [r]
        total = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            v, _ = quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=400)
            total += v
        return total - R_target

    # R grows like r - ln r, so r_end lies between R_target and this bound
    lo = math.pi + 1e-12
    hi = R_target + 2.0 * math.log(R_target + 2.0) + math.pi + 10.0
    return brentq(R_of, lo, hi, xtol=1e-13)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)


def _weighted_matrix(channel: Channel, r_end: float, n: int):
    """Finite volumes for ``-(p u')' + w V u = eps w u`` on ``[pi, r_end]``.

    ``p = -a c r`` and ``w = -a b^2 c / r`` (both positive). Node 0 sits at
    the core; it is kept for ``m = 0`` (natural condition) and removed for
    ``m = 1`` (the regular branch vanishes there).
    """
    h = (r_end - math.pi) / n
    x = np.arange(n) * h  # distance from the core, node n is the Dirichlet end
    faces = (np.arange(n) + 0.5) * h
    _, a_f, b_f, c_f = closed_form_at_r(math.pi + faces)
    p_face = -a_f * c_f * (math.pi + faces)
    # cell integrals of w by Gauss-Legendre on each cell
    lo = np.concatenate([[0.0], faces[:-1]])
    hi = faces
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    q = mid[:, None] + half[:, None] * _GL_X[None, :]
    _, aq, bq, cq = closed_form_at_r(math.pi + q.ravel())
    rq = math.pi + q.ravel()
    wq = (-aq * bq * bq * cq / rq).reshape(q.shape)
    Vq = channel_V(channel, aq, bq, cq).reshape(q.shape)
    mass = half * (wq @ _GL_W)
    pot = half * ((wq * Vq) @ _GL_W)
    A = np.empty(n)
    A[0] = p_face[0] / h
    A[1:] = (p_face[:-1] + p_face[1:]) / h
    A += pot
    off = -p_face[:-1] / h
    if channel.m >= 1:
        A, off, mass = A[1:], off[1:], mass[1:]
    s = 1.0 / np.sqrt(mass)
    return A * s * s, off * s[:-1] * s[1:]


def solve_channel_weighted(channel: Channel, cutoff: float | None = None,
                           grid_size: int | None = None, n_eigs: int = 4,
                           refinements: int = 2, backend: str | None = None) -> SpectrumResult:
    """Lowest levels from the weighted ``r``-form on the closed-form metric.

    ``cutoff`` is a proper distance; the Dirichlet end is placed at the
    ``r`` where the proper distance reaches it, so both solvers treat the
    same domain.
    """
    cutoff = default_cutoff(channel, n_eigs) if cutoff is None else float(cutoff)
    r_end = _cutoff_in_r(cutoff)
    grid_size = int(round(cutoff * 10)) if grid_size is None else int(grid_size)
    runs = []
    for j in range(refinements + 1):
        d, off = _weighted_matrix(channel, r_end, grid_size * 2**j)
        runs.append(tridiag_eig_bisect(d, off, (0, n_eigs), backend=backend))
    table = np.array(runs)
    levels = [table]
    for p in range(1, refinements + 1):
        prev = levels[-1]
        f = 4.0**p
        levels.append((f * prev[1:] - prev[:-1]) / (f - 1.0))
    best = levels[-1][-1]
    rich = np.abs(best - levels[-2][-1]) if refinements else np.full(best.size, np.inf)
    data = channel.asymptotics
    tails = np.array([tail_shift_estimate(data.C0, data.C1, e, cutoff) for e in best])
    err = np.maximum(np.maximum(rich, tails), 4 * np.finfo(float).eps)
    reliable = (best < data.C0) & (data.C0 - best > 5 * tails) & (tails <= 1e-8)
    return SpectrumResult(
        eigenvalues=best, method="r-line weighted finite-volume", grid_size=grid_size,
        domain_cutoff=cutoff, estimated_error=err, reliable=reliable,
        metadata={"channel": str(channel), "r_end": r_end, "raw": table.tolist(),
                  "richardson_error": rich.tolist(), "tail_estimate": tails.tolist()},
    )


def taub_nut_eigs(channel, n_count: int) -> np.ndarray:
    """Taub-NUT levels ``(1/2) sqrt(n^2 - s^2) (n - sqrt(n^2 - s^2))``, ``n = j+1..j+n_count``.

    ``channel`` may be a :class:`Channel` or a ``(j, s)`` pair with ``|s| <= j``.
    """
    j, s = (channel.j, channel.s) if isinstance(channel, Channel) else channel
    if abs(s) > j:
        raise DomainError("need |s| <= j")
    n = np.arange(j + 1, j + n_count + 1, dtype=float)
    q = np.sqrt(n * n - s * s)
    # n - q = s^2 / (n + q) avoids cancellation
    return 0.5 * q * (s * s) / (n + q)


def agreement_report(channel: Channel, ah: SpectrumResult | np.ndarray | None = None,
                     n_levels: int | None = None) -> list[dict]:
    """Per-level comparison of the Taub-NUT and Atiyah-Hitchin levels.

    ``sign`` is ``"+"`` when the Taub-NUT level lies above.
    """
    if ah is None:
        ah = solve_channel(channel, n_eigs=n_levels or 4)
    vals = ah.eigenvalues if isinstance(ah, SpectrumResult) else np.asarray(ah, float)
    if n_levels is not None:
        vals = vals[:n_levels]
    tn = taub_nut_eigs(channel, vals.size)
    rows = []
    for k, (e_ah, e_tn) in enumerate(zip(vals, tn), start=1):
        rel = (e_tn - e_ah) / e_ah
        rows.append({
            "level": k, "ah": float(e_ah), "taub_nut": float(e_tn), "difference": float(e_tn - e_ah),
            "relative": float(rel), "sign": "+" if e_tn > e_ah else "-",
            "agreement_percent": 100.0 * (1.0 - abs(rel)),
        })
    return rows

"""Pure numpy Sturm-sequence kernels, used when the compiled module is missing.

Same call signatures as the compiled version. The recurrence is vectorized
across shifts, and bisection is replaced by multisection so each sweep
over the matrix narrows every open bracket by a factor ``n_probe + 1``.
"""

import numpy as np


def _counts(d, e2, sigmas, pivmin):
    sigmas = np.asarray(sigmas, dtype=float)
    q = d[0] - sigmas
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    cnt = (q < 0).astype(np.int64)
    for i in range(1, d.shape[0]):
        q = d[i] - sigmas - e2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        cnt += q < 0
    return cnt


def sturm_count(d, e2, sigma, pivmin):
    """Number of eigenvalues strictly below ``sigma``."""
    return int(_counts(np.asarray(d, float), np.asarray(e2, float), [sigma], pivmin)[0])


def bisect(d, e2, lo, hi, lower, upper, abstol, pivmin, n_probe=15):
    """Eigenvalues with indices ``lo <= k < hi`` by vectorized multisection."""
    d = np.asarray(d, float)
    e2 = np.asarray(e2, float)
    m = hi - lo
    idx = np.arange(lo, hi)
    lb = np.full(m, float(lower))
    ub = np.full(m, float(upper))
    eps = np.finfo(float).eps
    frac = np.arange(1, n_probe + 1) / (n_probe + 1.0)
    for _ in range(200):
        width = ub - lb
        open_ = width > abstol + 2.0 * eps * np.maximum(np.abs(lb), np.abs(ub))
        if not open_.any():
            break
        sel = np.flatnonzero(open_)
        probes = lb[sel, None] + width[sel, None] * frac[None, :]
        cnt = _counts(d, e2, probes.ravel(), pivmin).reshape(probes.shape)
        below = cnt > idx[sel, None]  # eigenvalue idx lies below the probe
        # lowest probe above the eigenvalue, highest probe at or below it
        has_above = below.any(axis=1)
        first_above = np.argmax(below, axis=1)
        new_ub = np.where(has_above, probes[np.arange(sel.size), first_above], ub[sel])
        last_below = n_probe - 1 - np.argmax(~below[:, ::-1], axis=1)
        has_below = (~below).any(axis=1)
        new_lb = np.where(has_below, probes[np.arange(sel.size), last_below], lb[sel])
        stalled = (new_lb == lb[sel]) & (new_ub == ub[sel])
        lb[sel] = new_lb
        ub[sel] = new_ub
        if stalled.all():
            break
    return 0.5 * (lb + ub)

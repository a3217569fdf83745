"""Published reference values used for side-by-side reproduction reports.

Values are transcribed as printed, including entries known to be
inconsistent with their own defining formulas; consumers compare against
them and report the differences rather than editing the numbers.
"""

from __future__ import annotations

# Rayleigh-Ritz upper bounds for the YMH channel with a 20-function basis,
# and values extrapolated to a 1000-function basis.
YMH_DIM20 = (0.773243, 0.897117, 0.941347, 0.962124, 0.973529, 0.980458,
             0.984983, 0.988100, 0.990179, 0.990339, 0.993265)
YMH_EXTRAPOLATED = (0.772215, 0.896315, 0.940714, 0.961609, 0.973099, 0.980094,
                    0.984669, 0.987825, 0.990096, 0.991761, 0.993174)

# Lowest Atiyah-Hitchin channel eigenvalues, keyed by (j, s).
AH_LEVELS = {
    (1, 1): (0.23151604, 0.24250546, 0.24605425, 0.24898588),
    (2, 1): (0.24264773, 0.24597017, 0.24745446, 0.24836885, 0.24942162),
    (3, 2): (0.92838765, 0.95655735, 0.97063593, 0.97876253, 0.98390049, 0.98736886),
}

# Taub-NUT levels and the sign of (Taub-NUT minus Atiyah-Hitchin).
TAUB_NUT_LEVELS = {
    (1, 1): (0.23205081, 0.24264069, 0.24596669, 0.24744871),
    (2, 1): (0.24264069, 0.24596669, 0.24744871, 0.24823935, 0.24744871),
    (3, 2): (0.92820323, 0.95643924, 0.97056275, 0.97871376, 0.98386677, 0.98733975),
}
TAUB_NUT_SIGNS = {
    (1, 1): "++--",
    (2, 1): "-----",
    (3, 2): "------",
}

# Leading near-core and far-field terms of the channel potentials:
# (c2, near-core constant, C0, C1) as printed.
AH_ASYMPTOTICS = {
    (1, 1): (-0.25, "2/pi^2", 0.25, -0.5),
    (2, 1): (0.75, "2/pi^2", 0.25, -0.5),
    (3, 2): (0.75, "8/pi^2", 1.0, -2.0),
}

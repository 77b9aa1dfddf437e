"""Absorption coefficients h(x, t) = exp(-l(d)) built from decay profiles.

The profile l is positive, nonincreasing and blows up at 0, so h vanishes
exactly on the degeneracy set and is positive elsewhere.  Three families
span the propagation/localization boundary:

* ``inverse-square``: l(r) = A / r**2 (satisfies liminf r**2 l(r) = A > 0)
* ``power``:          l(r) = A / r**theta
* ``log``:            l(r) = A * ln(1/r), clamped to 0 for r >= 1

The distance feeding l is either the parabolic distance to a space-time
curve, the anisotropic distance max(sqrt(t), |x'|) to a line in the initial
plane, or a constant floor (h identically beta, for cylinder estimates).
"""

from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import ConfigurationError, DomainError

INVERSE_SQUARE = "inverse-square"
POWER = "power"
LOG = "log"
_FAMILIES = (INVERSE_SQUARE, POWER, LOG)

PARABOLIC = "parabolic"
ANISOTROPIC = "anisotropic"
CONSTANT_FLOOR = "constant-floor"


@dataclass(frozen=True)
class DecayProfile:
    """Flatness profile l of the absorption coefficient."""

    family: str
    amplitude: float
    exponent: float | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ConfigurationError(f"unknown profile family {self.family!r}")
        if not self.amplitude > 0:
            raise ConfigurationError("profile amplitude must be positive")
        if self.family == POWER and not (self.exponent and self.exponent > 0):
            raise ConfigurationError("power profile needs exponent > 0")

    def __call__(self, r):
        return eval_profile(self, r)


def eval_profile(profile, r):
    """Evaluate l(r) for r > 0 (vectorized)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("profile is unbounded at r <= 0")
    A = profile.amplitude
    if profile.family == INVERSE_SQUARE:
        out = A / (r * r)
    elif profile.family == POWER:
        out = A / r ** profile.exponent
    else:  # log, clamped to keep l nonnegative and nonincreasing
        out = np.maximum(A * np.log(1.0 / r), 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Potential:
    """Absorption coefficient h tied to a profile and a distance functional.

    ``distance`` selects parabolic (needs ``curve``), anisotropic (line in
    the initial plane, point split as (x1, x', t)) or constant-floor
    (h == ``floor`` everywhere, for minimum-of-h cylinder estimates).
    """

    profile: DecayProfile | None
    distance: str
    curve: geometry.Curve | None = None
    gamma: float = 0.0
    floor: float | None = None

    def __post_init__(self):
        if self.distance not in (PARABOLIC, ANISOTROPIC, CONSTANT_FLOOR):
            raise ConfigurationError(f"unknown distance mode {self.distance!r}")
        if self.distance == PARABOLIC and self.curve is None:
            raise ConfigurationError("parabolic distance needs a curve")
        if self.distance == CONSTANT_FLOOR and not (self.floor and self.floor > 0):
            raise ConfigurationError("constant-floor potential needs floor > 0")
        if self.gamma < 0:
            raise ConfigurationError("weight exponent gamma must be >= 0")

    # ------------------------------------------------------------------
    def distance_value(self, point):
        if self.distance == PARABOLIC:
            return geometry.parabolic_distance(point, self.curve)
        if self.distance == ANISOTROPIC:
            return geometry.anisotropic_distance(point)
        return None  # constant floor has no distance

    def evaluate(self, point):
        """h at a single point; exactly 0 on the degeneracy set."""
        if self.distance == CONSTANT_FLOOR:
            return float(self.floor)
        d = self.distance_value(point)
        if d == 0.0:
            return 0.0
        return float(np.exp(-eval_profile(self.profile, d)))

    def evaluate_grid(self, points, t):
        """Vectorized h over solver nodes at one time level.

        Returns ``(values, n_underflow)`` where the count records nodes at
        positive distance whose exp(-l) underflowed to zero; those zeros are
        kept as-is (the solver treats h = 0 as exact degeneracy).
        """
        if self.distance == CONSTANT_FLOOR:
            pts = np.atleast_2d(np.asarray(points, dtype=float))
            return np.full(pts.shape[0], float(self.floor)), 0
        if self.distance == PARABOLIC:
            d = geometry.parabolic_distance_grid(points, t, self.curve)
        else:
            pts = np.atleast_2d(np.asarray(points, dtype=float))
            xp = pts[:, 1:] if pts.shape[1] > 1 else np.zeros((pts.shape[0], 1))
            d = np.maximum(np.sqrt(max(t, 0.0)), np.linalg.norm(xp, axis=1))
        vals = np.zeros_like(d)
        pos = d > 0
        with np.errstate(under="ignore"):
            vals[pos] = np.exp(-eval_profile(self.profile, d[pos]))
        n_underflow = int(np.count_nonzero(pos & (vals == 0.0)))
        return vals, n_underflow


def eval_h(pot, point):
    """Functional form of :meth:`Potential.evaluate`."""
    return pot.evaluate(point)


def split_h(pot, gamma, point, p=None, n_dim=None):
    """Split h into (weight, exp_factor) with weight = d**gamma.

    The pair multiplies back to ``eval_h`` exactly: the shifted profile is
    l(s) + gamma*ln(s), so exp_factor = s**(-gamma) * exp(-l(s)).  When the
    supercritical exponent data (p, n_dim) are supplied the weight exponent
    is gated by gamma > n_dim*(p - 1) - 2.
    """
    if pot.distance != ANISOTROPIC:
        raise ConfigurationError("split form needs the anisotropic distance")
    if gamma < 0:
        raise ConfigurationError("gamma must be >= 0")
    if p is not None and n_dim is not None:
        required = n_dim * (p - 1.0) - 2.0
        if not gamma > required:
            raise ConfigurationError(
                f"gamma = {gamma} must exceed N(p-1)-2 = {required} "
                "for the weighted line-degeneracy form")
    d = pot.distance_value(point)
    if d == 0.0:
        return 0.0, 0.0
    h = pot.evaluate(point)
    if gamma == 0.0:
        return 1.0, h
    weight = d ** gamma
    return float(weight), float(h / weight)


def shifted_profile(profile, gamma, s):
    """l~(s) = l(s) + gamma*ln(s): the profile driving the split exp factor."""
    return eval_profile(profile, s) + gamma * np.log(s)

"""Driving-field configurations for the two-state problem.

The package covers one six-parameter family of constant-amplitude drives whose
detuning is periodically modulated,

    delta_t(t) = Delta1 + (1 - a) * Delta2 / (1 + a - 2*sqrt(a)*cos(Delta*(t - t0))),

together with two distinguished sub-families obtained by terminating the
series solution: a two-parameter model whose detuning crosses resonance twice
per period (the generic member stays exactly solvable for every coupling
strength), and a three-parameter model that is solvable only when the coupling
strength is tied to the detuning parameters.

Depending on the parameter point the detuning crosses zero transversally,
touches it tangentially ("glancing", a double root at an extremum of the
modulation) or stays away from resonance altogether; :func:`classify_crossings`
sorts a configuration into these classes and locates the crossing instants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import DomainError, ParameterError

TWO_PI = 2.0 * math.pi

# crossing detection (see classify_crossings)
SAMPLES_PER_PERIOD = 4096
ROOT_XTOL = 1e-14          # bisection interval width in t
GLANCING_TOL = 1e-9        # |delta_t| and |d delta_t/dt| at an extremum


@dataclass(frozen=True)
class FieldConfig:
    """Parameters of the general periodically modulated drive.

    ``u0`` is the constant Rabi frequency, ``a`` the modulation shape parameter
    (also the extra singular point of the associated linear ODE), ``delta1``
    the carrier detuning, ``delta2`` the modulation strength, ``delta`` the
    drive angular frequency and ``t0`` a time offset.  All rates are in
    physical units (rad / time).
    """

    u0: float
    a: float
    delta1: float
    delta2: float
    delta: float = 1.0
    t0: float = 0.0

    def __post_init__(self):
        if not self.u0 > 0:
            raise ParameterError(f"FieldConfig: u0 must be > 0, got {self.u0}")
        if not self.a > 0 or self.a == 1.0:
            raise ParameterError(f"FieldConfig: need a > 0 and a != 1, got {self.a}")
        if not self.delta > 0:
            raise ParameterError(f"FieldConfig: delta must be > 0, got {self.delta}")

    @property
    def period(self) -> float:
        return TWO_PI / self.delta

    def scaled(self) -> "FieldConfig":
        """Equivalent configuration in drive-scaled time tau = delta*(t - t0).

        All rates are divided by the drive frequency; the scaled configuration
        has delta = 1 and t0 = 0 and satisfies
        ``delta_t(t) = delta * delta_t_scaled(tau)``.
        """
        return FieldConfig(self.u0 / self.delta, self.a, self.delta1 / self.delta,
                           self.delta2 / self.delta, 1.0, 0.0)


@dataclass(frozen=True)
class N2Config:
    """The unconditionally solvable two-parameter periodic-crossing model.

    ``u0`` and ``delta1`` are measured in units of the drive frequency
    (the analytic solution lives in scaled time); ``delta`` and ``t0`` map
    scaled time onto physical time.  The detuning is real only for
    ``|delta1| > 1``.  The derived shape parameter is
    ``a = (delta1 + 1)/(delta1 - 1)``; it exceeds 1 for ``delta1 > 1`` and
    lies in (0, 1) for ``delta1 < -1``.
    """

    u0: float
    delta1: float
    delta: float = 1.0
    t0: float = 0.0

    def __post_init__(self):
        if not self.u0 > 0:
            raise ParameterError(f"N2Config: u0 must be > 0, got {self.u0}")
        if not abs(self.delta1) > 1:
            raise ParameterError(f"N2Config: need |delta1| > 1, got {self.delta1}")
        if not self.delta > 0:
            raise ParameterError(f"N2Config: delta must be > 0, got {self.delta}")

    @property
    def a(self) -> float:
        return a_from_delta1(self.delta1)

    @property
    def period(self) -> float:
        return TWO_PI / self.delta

    def as_general(self) -> FieldConfig:
        """The member of the general family with the same physical detuning.

        Exact for ``delta1 > 1``.  For ``delta1 < -1`` the general-family
        member is the same drive shifted by half a period (the two-parameter
        form fixes the sign of the cosine term).
        """
        return FieldConfig(self.u0 * self.delta, self.a, self.delta1 * self.delta,
                           2.0 * self.delta, self.delta, self.t0)


@dataclass(frozen=True)
class CrossingReport:
    """Resonance-crossing census over a time window."""

    kind: Literal["crossing", "glancing", "non-crossing"]
    times: tuple[float, ...]


@dataclass(frozen=True)
class DriveField:
    """Callable view of a drive, the only interface the numerical oracle uses."""

    u: Callable[[float], float]
    delta_t: Callable[[float], float]
    period: float


def detuning_general(cfg: FieldConfig, t):
    """Detuning of the general family at time ``t`` (scalar or array).

    The denominator ``1 + a - 2 sqrt(a) cos(...)`` is bounded below by
    ``(sqrt(a) - 1)^2 > 0``, so the value is finite for every valid config.
    It is evaluated as ``(sqrt(a)-1)^2 + 4 sqrt(a) sin^2(.../2)``, a sum of
    non-negative terms, to avoid cancellation near the modulation peak.
    """
    theta = cfg.delta * (np.asarray(t, dtype=float) - cfg.t0)
    sqa = math.sqrt(cfg.a)
    den = (sqa - 1.0) ** 2 + 4.0 * sqa * np.sin(0.5 * theta) ** 2
    out = cfg.delta1 + (1.0 - cfg.a) * cfg.delta2 / den
    return float(out) if np.isscalar(t) else out


def detuning_general_deriv(cfg: FieldConfig, t):
    """Time derivative of :func:`detuning_general` (analytic)."""
    theta = cfg.delta * (np.asarray(t, dtype=float) - cfg.t0)
    den = 1.0 + cfg.a - 2.0 * math.sqrt(cfg.a) * np.cos(theta)
    out = -(1.0 - cfg.a) * cfg.delta2 * 2.0 * math.sqrt(cfg.a) * cfg.delta * np.sin(theta) / den**2
    return float(out) if np.isscalar(t) else out


def detuning_n2(cfg: N2Config, t):
    """Detuning of the two-parameter periodic-crossing model (scalar or array).

    The resonant denominator ``delta1 - sqrt(delta1^2-1) cos(...)`` is
    rationalized into a single-signed sum so the spike near the modulation
    peak is computed without cancellation.
    """
    theta = cfg.delta * (np.asarray(t, dtype=float) - cfg.t0)
    d1 = cfg.delta1
    b = math.sqrt(d1 * d1 - 1.0)
    if d1 > 0:
        den = 1.0 / (d1 + b) + 2.0 * b * np.sin(0.5 * theta) ** 2
    else:
        den = -1.0 / (b - d1) - 2.0 * b * np.cos(0.5 * theta) ** 2
    out = cfg.delta * (d1 - 2.0 / den)
    return float(out) if np.isscalar(t) else out


def detuning_n3(u0: float, delta1: float, branch: int, t):
    """Detuning of the conditionally solvable three-term model, scaled time.

    ``branch`` selects the sign of the auxiliary root
    ``r = branch * sqrt(u0^2 + delta1^2 - 1)``.  The expression is rejected
    wherever it stops being a real periodic modulation: ``r`` imaginary or
    zero, or the interior square root negative.
    """
    if branch not in (+1, -1):
        raise ParameterError(f"detuning_n3: branch must be +1 or -1, got {branch}")
    rr = u0 * u0 + delta1 * delta1 - 1.0
    if rr <= 0.0:
        raise DomainError(f"detuning_n3: requires u0^2 + delta1^2 > 1, got {rr + 1.0}")
    r = branch * math.sqrt(rr)
    s3 = math.sqrt(3.0)
    pole = 3.0 + s3 * r - 3.0 * delta1
    if pole == 0.0:
        raise DomainError("detuning_n3: degenerate parameter point (zero inner denominator)")
    inner = 1.0 - 6.0 / pole
    if inner <= 0.0:
        raise DomainError(f"detuning_n3: interior square root negative (inner={inner})")
    num = 9.0 - 3.0 * s3 * r - 9.0 * delta1
    den = ((s3 - r) * r + 3.0 * (delta1 - 1.0) * delta1
           + math.sqrt(inner) * (r * r - 3.0 * (delta1 - 1.0) ** 2) * np.cos(np.asarray(t, dtype=float)))
    out = delta1 + num / den
    return float(out) if np.isscalar(t) else out


def n3_singular_point(u0: float, delta1: float, branch: int) -> float:
    """Shape parameter ``a`` of the general family matching the three-term model."""
    if branch not in (+1, -1):
        raise ParameterError(f"n3_singular_point: branch must be +1 or -1, got {branch}")
    rr = u0 * u0 + delta1 * delta1 - 1.0
    if rr <= 0.0:
        raise DomainError(f"n3_singular_point: requires u0^2 + delta1^2 > 1, got {rr + 1.0}")
    r = branch * math.sqrt(rr)
    pole = 3.0 + math.sqrt(3.0) * r - 3.0 * delta1
    if pole == 0.0:
        raise DomainError("n3_singular_point: degenerate parameter point")
    a = 1.0 - 6.0 / pole
    if a <= 0.0:
        raise DomainError(f"n3_singular_point: inadmissible shape parameter a={a}")
    return a


def n3_general_config(u0: float, delta1: float, branch: int) -> FieldConfig:
    """General-family twin of the three-term model (scaled time, delta2 = 3)."""
    return FieldConfig(u0, n3_singular_point(u0, delta1, branch), delta1, 3.0)


def a_from_delta1(delta1: float) -> float:
    """Shape parameter of the two-parameter model: a = (delta1 + 1)/(delta1 - 1)."""
    if delta1 == 1.0:
        raise ParameterError("a_from_delta1: singular at delta1 = 1")
    return (delta1 + 1.0) / (delta1 - 1.0)


def glancing_ratios(a: float) -> tuple[float, float]:
    """The two critical values of delta1/delta2 at which the detuning glances zero.

    The first ratio puts the tangential touch at t = t0, the second at half a
    period later; the two are reciprocals of each other.
    """
    if a == 1.0 or not a > 0:
        raise DomainError(f"glancing_ratios: need a > 0, a != 1, got {a}")
    s = math.sqrt(a)
    return (s + 1.0) / (s - 1.0), (s - 1.0) / (s + 1.0)


def drive_field(cfg) -> DriveField:
    """Physical-time callables (Rabi frequency, detuning) for the oracle."""
    if isinstance(cfg, N2Config):
        u_phys = cfg.u0 * cfg.delta
        return DriveField(u=lambda t: u_phys,
                          delta_t=lambda t: detuning_n2(cfg, t),
                          period=cfg.period)
    if isinstance(cfg, FieldConfig):
        return DriveField(u=lambda t: cfg.u0,
                          delta_t=lambda t: detuning_general(cfg, t),
                          period=cfg.period)
    raise ParameterError(f"drive_field: unsupported config type {type(cfg)!r}")


def _bisect(f, lo: float, hi: float, xtol: float) -> float:
    flo = f(lo)
    for _ in range(200):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (flo < 0) != (fm < 0):
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def classify_crossings(cfg, window: tuple[float, float]) -> CrossingReport:
    """Locate resonance crossings of the detuning inside ``window``.

    Transversal roots are found by dense sampling (4096 points per period),
    sign-change bracketing and bisection.  A tangential touch has no sign
    change; it is detected at the modulation extrema, where the detuning
    derivative vanishes identically, by ``|delta_t| < 1e-9`` there.
    Accepts either a :class:`FieldConfig` or an :class:`N2Config`.
    """
    if isinstance(cfg, N2Config):
        period, t0, delta = cfg.period, cfg.t0, cfg.delta
        d1, b = cfg.delta1, math.sqrt(cfg.delta1**2 - 1.0)
        f = lambda t: detuning_n2(cfg, t)
        fprime = lambda t: (-2.0 * delta**2 * b * np.sin(delta * (t - t0))
                            / (d1 - b * np.cos(delta * (t - t0))) ** 2)
    elif isinstance(cfg, FieldConfig):
        f = lambda t: detuning_general(cfg, t)
        fprime = lambda t: detuning_general_deriv(cfg, t)
        period, t0, delta = cfg.period, cfg.t0, cfg.delta
    else:
        raise ParameterError(f"classify_crossings: unsupported config type {type(cfg)!r}")

    t_lo, t_hi = window
    if not t_hi > t_lo:
        raise ParameterError("classify_crossings: window must satisfy t_hi > t_lo")

    n = max(SAMPLES_PER_PERIOD, int(math.ceil(SAMPLES_PER_PERIOD * (t_hi - t_lo) / period))) + 1
    ts = np.linspace(t_lo, t_hi, n)
    vals = f(ts)

    roots = []
    for i in range(n - 1):
        if vals[i] == 0.0:
            roots.append(float(ts[i]))
        elif (vals[i] < 0) != (vals[i + 1] < 0):
            roots.append(_bisect(f, float(ts[i]), float(ts[i + 1]), ROOT_XTOL))
    if vals[-1] == 0.0:
        roots.append(float(ts[-1]))

    # modulation extrema inside the window: theta = k*pi
    glance = []
    k_lo = math.ceil((t_lo - t0) * delta / math.pi)
    k_hi = math.floor((t_hi - t0) * delta / math.pi)
    for k in range(k_lo, k_hi + 1):
        te = t0 + k * math.pi / delta
        if abs(f(te)) < GLANCING_TOL and abs(fprime(te)) < GLANCING_TOL:
            glance.append(te)

    # drop bracketed roots that duplicate a glancing touch or each other
    merged = []
    for r in sorted(roots):
        if glance and any(abs(r - g) <= 1e-7 * period for g in glance):
            continue
        if merged and abs(r - merged[-1]) <= 1e-10 * period:
            continue
        merged.append(r)
    clean = merged

    if clean:
        times = tuple(sorted(clean + glance))
        return CrossingReport("crossing", times)
    if glance:
        return CrossingReport("glancing", tuple(sorted(glance)))
    return CrossingReport("non-crossing", ())

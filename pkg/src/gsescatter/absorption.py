"""Exact single-channel distributions for chaotic scattering with absorption.

For a perfectly coupled single channel the sub-unitary scattering amplitude
``S = sqrt(R) * exp(i*theta)`` and the reaction (Wigner K) matrix
``K = u - i*v = i(S-1)/(S+1)`` are governed by one positive variable::

    x = (1 + R) / (1 - R) = (u^2 + v^2 + 1) / (2v),   x >= 1

whose density ``P0(x)`` depends only on the absorption strength ``gamma``
and the symmetry class (symplectic or unitary).  Every other density in
this module — reflection coefficient ``R``, its amplitude ``r = sqrt(R)``,
and the two K-matrix quadratures ``u = Re K``, ``v = -Im K`` — is an exact
change of variables or a one-dimensional integral transform of ``P0``.

The symplectic-class ``P0`` contains the hyperbolic sine integral
``Shi(gamma)`` multiplied by coefficients growing like ``exp(2*gamma)``;
everything here is evaluated in an exponentially rescaled form so the
functions stay finite for all practically relevant ``gamma`` (tested up to
a few hundred).

In the strong-absorption (Ericson) regime the rescaled reflection
coefficient becomes exponential and the rescaled amplitude Rayleigh
distributed; :func:`ericson_density` provides those limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

__all__ = [
    "AbsorptionParams",
    "DistributionCurve",
    "FitResult",
    "default_grid",
    "distribution_curve",
    "ericson_density",
    "fit_gamma",
    "mean_amplitude",
    "mean_reflection",
    "p0_x",
    "p_amplitude",
    "p_im_k",
    "p_re_k",
    "p_reflection",
    "sample_reflection",
    "shi",
]

_CLASSES = ("gse", "gue")
#: variables whose densities this module evaluates (plus the Ericson tags)
_VARIABLES = ("x", "R", "r", "v", "u")

_QUAD_OPTS = dict(limit=250, epsabs=1e-250, epsrel=1e-10)


@dataclass(frozen=True)
class AbsorptionParams:
    """Absorption strength and symmetry class of the analytic curves.

    ``gamma`` must be strictly positive: the lossless point is a singular
    limit of the formulas (evaluate at e.g. ``gamma = 1e-3`` to approach
    it).  ``symmetry`` is ``"gse"`` or ``"gue"``.
    """

    gamma: float
    symmetry: str = "gse"

    def __post_init__(self) -> None:
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.symmetry not in _CLASSES:
            raise ValueError(f"symmetry must be one of {_CLASSES}, got {self.symmetry!r}")


@dataclass
class DistributionCurve:
    """One analytic density evaluated on a grid."""

    variable: str
    x: np.ndarray
    density: np.ndarray
    params: AbsorptionParams | str

    def mass(self) -> float:
        """Trapezoidal integral over the grid (should be 1 to ~1e-4)."""
        return float(np.trapezoid(self.density, self.x))


def shi(gamma: float) -> float:
    """Hyperbolic sine integral ``Shi(gamma) = int_0^gamma sinh(t)/t dt``.

    Accurate to relative ``1e-12`` over the non-negative reals; grows like
    ``exp(gamma)/(2*gamma)``, so the unscaled value overflows beyond
    ``gamma ~ 710`` (inf is returned there; internally the module always
    uses the ``exp(-gamma)``-scaled combination, which never overflows).
    """
    if gamma < 0:
        raise ValueError("shi is used for non-negative arguments only")
    if gamma < 700.0:
        return float(special.shichi(gamma)[0])
    return math.inf


def _shi_scaled(gamma: float) -> float:
    """``exp(-gamma) * Shi(gamma)``, stable for all gamma >= 0."""
    if gamma < 600.0:
        return float(np.exp(-gamma) * special.shichi(gamma)[0])
    # asymptotic tail: Shi(g) ~ e^g/(2g) * sum_k k!/g^k  (truncated well
    # before the divergent terms matter at this size of g)
    s, term = 1.0, 1.0
    for k in range(1, 25):
        term *= k / gamma
        s += term
    return s / (2.0 * gamma)


def p0_x(x, params: AbsorptionParams):
    """Density of ``x = (1+R)/(1-R)`` at absorption ``gamma``.

    Symplectic class::

        P0(x) = 1/2 * [ A*g*(x+1) + B ] * exp(-g*(x+1)) + C * exp(-g*x) * Shi(g)

    with ``A = e^{2g}-1``, ``B = 1+2g-e^{2g}`` and
    ``C = g^2 (x+1)^2/2 - g(g+1)(x+1) + g``; the unitary class drops the
    ``C`` term and halves ``gamma``.  Both are evaluated with the large
    exponentials cancelled analytically.  Values below the support
    (``x < 1``) give density 0.
    """
    scalar = np.isscalar(x)
    x = np.asarray(x, dtype=float)
    g = params.gamma
    out = np.zeros_like(x)
    m = x >= 1.0
    xm = x[m]
    if params.symmetry == "gue":
        t1 = np.exp(-g * (xm - 1.0) / 2.0)
        t2 = np.exp(-g * (xm + 1.0) / 2.0)
        out[m] = 0.5 * (g * (xm + 1.0) / 2.0 * (t1 - t2) + (1.0 + g) * t2 - t1)
    else:
        e1 = np.exp(-g * (xm - 1.0))  # e^{2g} * e^{-g(x+1)}
        e2 = np.exp(-g * (xm + 1.0))
        c = g * g * (xm + 1.0) ** 2 / 2.0 - g * (g + 1.0) * (xm + 1.0) + g
        out[m] = (
            0.5 * (g * (xm + 1.0) * (e1 - e2) + (1.0 + 2.0 * g) * e2 - e1)
            + c * e1 * _shi_scaled(g)
        )
    return float(out) if scalar else out


def p_reflection(refl, params: AbsorptionParams):
    """Density of the reflection coefficient ``R = |S|^2`` on ``[0, 1)``.

    ``P(R) = 2/(1-R)^2 * P0((1+R)/(1-R))``; zero outside the support.
    """
    scalar = np.isscalar(refl)
    refl = np.asarray(refl, dtype=float)
    out = np.zeros_like(refl)
    m = (refl >= 0.0) & (refl < 1.0)
    rm = refl[m]
    out[m] = 2.0 / (1.0 - rm) ** 2 * p0_x((1.0 + rm) / (1.0 - rm), params)
    return float(out) if scalar else out


def p_amplitude(amp, params: AbsorptionParams):
    """Density of the reflection amplitude ``r = |S|``: ``2 r P(R = r^2)``."""
    scalar = np.isscalar(amp)
    amp = np.asarray(amp, dtype=float)
    out = 2.0 * amp * p_reflection(amp * amp, params)
    return float(out) if scalar else out


def _transform_quad(outer, params: AbsorptionParams):
    """Common driver for the two semi-infinite integral transforms."""
    integral, _ = integrate.quad(outer, 0.0, np.inf, **_QUAD_OPTS)
    return integral


def p_im_k(v, params: AbsorptionParams):
    """Density of ``v = -Im K`` (positive for passive systems).

    ``P(v) = sqrt(2)/(pi v^{3/2}) * int_0^inf P0(q^2 + (v + 1/v)/2) dq``.
    Satisfies the reciprocity ``P(1/v) = v^3 P(v)`` exactly, since ``v``
    enters only through ``v + 1/v``.
    """
    scalar = np.isscalar(v)
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    for idx in np.ndindex(v.shape):
        vi = v[idx]
        if vi <= 0.0:
            continue
        w = 0.5 * (vi + 1.0 / vi)
        integral = _transform_quad(lambda q: p0_x(q * q + w, params), params)
        out[idx] = math.sqrt(2.0) / (math.pi * vi**1.5) * integral
    return float(out) if scalar else out


def p_re_k(u, params: AbsorptionParams):
    """Density of ``u = Re K`` (even in ``u``, defined on the whole line).

    ``P(u) = 1/(2 pi sqrt(u^2+1)) * int_0^inf P0(sqrt(u^2+1)/2 * (q + 1/q)) dq``.
    """
    scalar = np.isscalar(u)
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    for idx in np.ndindex(u.shape):
        a = math.sqrt(u[idx] ** 2 + 1.0)
        integral = _transform_quad(
            lambda q: p0_x(0.5 * a * (q + 1.0 / q), params), params
        )
        out[idx] = integral / (2.0 * math.pi * a)
    return float(out) if scalar else out


def _x_cutoff(gamma: float) -> float:
    """x beyond which P0 is dead to double precision for practical purposes."""
    return 1.0 + 60.0 / gamma


def mean_reflection(params: AbsorptionParams) -> float:
    """``<R> = int_0^1 R P(R) dR`` by adaptive quadrature (relative ~1e-8).

    Strictly decreasing in ``gamma``; tends to 1 in the lossless limit and
    to 0 under strong absorption.
    """
    return _moment(params, lambda r: r)


def mean_amplitude(params: AbsorptionParams) -> float:
    """``<r> = int_0^1 r P(r) dr``, i.e. the mean of ``sqrt(R)``."""
    return _moment(params, np.sqrt)


def _moment(params: AbsorptionParams, weight) -> float:
    xc = _x_cutoff(params.gamma)
    upper = (xc - 1.0) / (xc + 1.0)
    hints = [p for p in ((xc / 10 - 1) / (xc / 10 + 1), 0.5 * upper) if 0 < p < upper]
    val, _ = integrate.quad(
        lambda r: weight(r) * p_reflection(r, params),
        0.0,
        upper,
        points=sorted(set(hints)) or None,
        limit=400,
        epsabs=1e-13,
        epsrel=1e-10,
    )
    return float(val)


def ericson_density(variable: str, value):
    """Strong-absorption limits for the rescaled reflection variables.

    After rescaling to unit mean, the reflection coefficient becomes
    exponential, ``P(R~) = exp(-R~)``, and the amplitude Rayleigh,
    ``P(r~) = (pi/2) r~ exp(-pi r~^2 / 4)``.  ``variable`` selects between
    ``"R"`` and ``"r"``; negative arguments give density 0.
    """
    scalar = np.isscalar(value)
    value = np.asarray(value, dtype=float)
    out = np.zeros_like(value)
    m = value >= 0.0
    if variable == "R":
        out[m] = np.exp(-value[m])
    elif variable == "r":
        out[m] = 0.5 * math.pi * value[m] * np.exp(-math.pi * value[m] ** 2 / 4.0)
    else:
        raise ValueError(f"Ericson limit is defined for 'R' or 'r', got {variable!r}")
    return float(out) if scalar else out


def default_grid(variable: str, params: AbsorptionParams | str) -> np.ndarray:
    """Evaluation grid on which the density of ``variable`` carries mass 1.

    Grids adapt to ``gamma`` (support shrinks as absorption grows) and are
    sized so the trapezoidal integral of the corresponding density is 1 to
    about ``1e-4`` or better.
    """
    if params == "ericson":
        if variable == "R":
            return np.linspace(0.0, 12.0, 2401)
        if variable == "r":
            return np.linspace(0.0, 4.0, 1601)
        raise ValueError(f"no Ericson limit for variable {variable!r}")
    if not isinstance(params, AbsorptionParams):
        raise TypeError("params must be AbsorptionParams or the string 'ericson'")
    g = params.gamma
    xc = _x_cutoff(g)
    if variable == "x":
        return np.linspace(1.0, xc, 4001)
    if variable == "R":
        return np.linspace(0.0, (xc - 1.0) / (xc + 1.0), 4001)
    if variable == "r":
        return np.linspace(0.0, math.sqrt((xc - 1.0) / (xc + 1.0)), 4001)
    if variable == "v":
        vmax = 2.0 + 90.0 / g
        return np.geomspace(1.0 / vmax, vmax, 1601)
    if variable == "u":
        umax = 2.0 + 60.0 / g
        # the central peak is Gaussian-like with width ~ sqrt(2/g); keep the
        # dense core several widths wide before switching to coarse tails
        core = min(max(8.0 / g, 5.0 * math.sqrt(2.0 / g)), 0.8 * umax)
        right = np.concatenate(
            [np.linspace(0.0, core, 601), np.linspace(core, umax, 402)[1:]]
        )
        return np.concatenate([-right[:0:-1], right])
    raise ValueError(f"unknown variable {variable!r}")


def distribution_curve(
    variable: str,
    params: AbsorptionParams | str,
    grid: np.ndarray | None = None,
) -> DistributionCurve:
    """Evaluate one of the analytic densities on a grid.

    ``variable`` is one of ``"x"``, ``"R"``, ``"r"``, ``"v"``, ``"u"``;
    with ``params="ericson"`` the strong-absorption limits of ``"R"`` or
    ``"r"`` are returned instead.  ``grid=None`` uses
    :func:`default_grid`.
    """
    if grid is None:
        grid = default_grid(variable, params)
    grid = np.asarray(grid, dtype=float)
    if params == "ericson":
        dens = ericson_density(variable, grid)
    elif isinstance(params, AbsorptionParams):
        table = {
            "x": p0_x,
            "R": p_reflection,
            "r": p_amplitude,
            "v": p_im_k,
            "u": p_re_k,
        }
        if variable not in table:
            raise ValueError(f"unknown variable {variable!r}")
        dens = table[variable](grid, params)
    else:
        raise TypeError("params must be AbsorptionParams or the string 'ericson'")
    return DistributionCurve(variable=variable, x=grid, density=dens, params=params)


def _reflection_cdf(params: AbsorptionParams, n_grid: int = 10001):
    """Tabulated CDF of P(R), strictly increasing, for inverse sampling."""
    xc = _x_cutoff(params.gamma)
    # cluster x-nodes toward the lower support edge where the mass sits
    t = np.linspace(0.0, 1.0, n_grid) ** 1.5
    xs = 1.0 + (xc - 1.0) * t
    dens = p0_x(xs, params)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(xs))])
    cdf /= cdf[-1]
    rs = (xs - 1.0) / (xs + 1.0)
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    return cdf[keep], rs[keep]


def sample_reflection(
    n: int,
    params: AbsorptionParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw ``n`` reflection coefficients from the analytic ``P(R)``.

    Inverse-CDF sampling on a dense monotone table; used for synthetic
    data in the absorption-strength fit tests.
    """
    if n < 1:
        raise ValueError("need at least one draw")
    cdf, rs = _reflection_cdf(params)
    return np.interp(rng.random(n), cdf, rs)


@dataclass
class FitResult:
    """Absorption strength estimated from reflection data."""

    gamma: float
    gamma_err: float
    sample_mean: float
    n_samples: int
    variable: str
    symmetry: str
    n_boot: int


def fit_gamma(
    samples: np.ndarray,
    variable: str = "R",
    symmetry: str = "gse",
    n_boot: int = 50,
    rng: np.random.Generator | None = None,
    bounds: tuple[float, float] = (1e-3, 500.0),
) -> FitResult:
    """Estimate the absorption strength from reflection measurements.

    Solves ``<R>(gamma) = mean(samples)`` on the monotone mean-reflection
    curve; the uncertainty is the standard deviation of the estimate over
    bootstrap resamples of the data.

    Parameters
    ----------
    samples : array
        Reflection coefficients ``R`` (``variable="R"``) or amplitudes
        ``r`` (``variable="r"``, squared internally); at least 1000 values
        in ``[0, 1)``.
    symmetry : {"gse", "gue"}
        Symmetry class of the analytic curve.
    n_boot : int
        Bootstrap resamples for the error bar (0 skips it).
    rng : numpy.random.Generator, optional
        Randomness for the bootstrap.
    bounds : pair of floats
        Search interval for gamma.

    Raises
    ------
    ValueError
        For too few samples, out-of-range values, degenerate (constant)
        input, or a sample mean outside the attainable range.
    """
    samples = np.asarray(samples, dtype=float)
    if variable == "r":
        samples = samples * samples
    elif variable != "R":
        raise ValueError("fit variable must be 'R' or 'r'")
    if samples.size < 1000:
        raise ValueError(f"need at least 1000 samples, got {samples.size}")
    if np.any((samples < 0) | (samples >= 1)):
        raise ValueError("reflection samples must lie in [0, 1)")
    if samples.std() == 0.0:
        raise ValueError("degenerate input: all samples identical")

    lo, hi = bounds

    def invert(target: float) -> float:
        f = lambda lg: mean_reflection(
            AbsorptionParams(math.exp(lg), symmetry)
        ) - target
        return math.exp(optimize.brentq(f, math.log(lo), math.log(hi), xtol=1e-10))

    mean = float(samples.mean())
    lo_mean = mean_reflection(AbsorptionParams(hi, symmetry))
    hi_mean = mean_reflection(AbsorptionParams(lo, symmetry))
    if not lo_mean < mean < hi_mean:
        raise ValueError(
            f"sample mean {mean:.4f} outside the attainable range "
            f"({lo_mean:.4f}, {hi_mean:.4f}) for gamma in {bounds}"
        )
    gamma_hat = invert(mean)

    gamma_err = 0.0
    if n_boot > 0:
        if rng is None:
            rng = np.random.default_rng()
        boot = np.empty(n_boot)
        for b in range(n_boot):
            resampled = samples[rng.integers(0, samples.size, samples.size)]
            m = min(max(float(resampled.mean()), lo_mean * 1.0000001), hi_mean * 0.9999999)
            boot[b] = invert(m)
        gamma_err = float(boot.std(ddof=1))

    return FitResult(
        gamma=float(gamma_hat),
        gamma_err=gamma_err,
        sample_mean=mean,
        n_samples=int(samples.size),
        variable=variable,
        symmetry=symmetry,
        n_boot=n_boot,
    )

"""Resolvent-based scattering Monte Carlo with absorbing fictitious channels.

The scattering matrix of a chaotic cavity coupled to ``C`` single-mode
channels is modeled as::

    S(e) = 1 - i lam W^dag (e - H_eff)^{-1} W,
    H_eff = H - (i/2) lam W W^dag,          lam = 2 pi dim(H)

where the columns of ``W`` are mutually orthogonal channel vectors.  The
column normalization fixes each channel's transmission ``T = 1 - |<S>|^2``
through ``T = 4x/(1+x)^2`` with ``x = pi^2 w^2 / d`` (``w^2`` the squared
column norm, ``d`` the mean level spacing at band center, counting Kramers
partners separately).  With that scaling the factor ``lam`` above makes the
realized transmission meet the target independently of the matrix dimension.

Absorption is not put in by hand: ``lam_fic`` additional *fictitious*
channels with a common small transmission ``T_f`` drain flux, and only the
product ``tau_abs = 2 lam_fic T_f`` matters for the observable channel.
The dimensionless absorption strength ``gamma`` of the analytic curves in
:mod:`gsescatter.absorption` maps onto ``tau_abs`` monotonically but not
identically; :func:`calibrate_tau_abs` pins the map by matching the mean
reflection coefficient.

For the symplectic class the channel vectors come in time-reversal pairs
``(y, T y)``: each doublet eigenvector of an auxiliary GSE sample together
with its Kramers partner.  This keeps the doubled channel space exactly
quaternion-structured, so the 2x2 open block of ``S`` is diagonal with
equal entries — one complex number per energy, as for a genuine
single-antenna measurement.  For the unitary class plain eigenvectors of
an auxiliary GUE sample are used, one column per channel.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .absorption import AbsorptionParams, mean_reflection
from .ensembles import (
    NumericalFailure,
    QuaternionHermitian,
    rng_stream,
    sample_gse,
    sample_gue,
    semicircle_radius,
)
from .spectral import StatCurve

__all__ = [
    "CalibrationError",
    "CalibrationResult",
    "CouplingSpec",
    "NumericalFailure",
    "RunConfig",
    "ScatteringEnsemble",
    "autocorrelation",
    "build_coupling",
    "calibrate_tau_abs",
    "heidelberg_smatrix",
    "inverse_transmission",
    "k_matrix",
    "k_matrix_variables",
    "parse_run_config",
    "run_ensemble",
    "transmission",
]


class CalibrationError(RuntimeError):
    """Absorption calibration could not reach the requested target."""


# ---------------------------------------------------------------------------
# channel transmission algebra
# ---------------------------------------------------------------------------


def transmission(w: float, d: float) -> float:
    """Channel transmission ``T = 4x/(1+x)^2`` with ``x = pi^2 w^2 / d``.

    ``w`` is the channel-vector norm, ``d`` the mean level spacing at the
    band center.  ``T`` is the unitarity deficit of the energy-averaged
    ``S``: 0 for a decoupled channel, 1 at critical coupling ``x = 1``.
    """
    if d <= 0:
        raise ValueError("mean spacing d must be positive")
    x = math.pi**2 * w * w / d
    return 4.0 * x / (1.0 + x) ** 2


def inverse_transmission(T: float, d: float) -> float:
    """Coupling norm ``w`` realizing transmission ``T`` (sub-critical branch).

    Inverts :func:`transmission` via ``x = (2 - T - 2 sqrt(1-T)) / T``,
    choosing the branch with ``x <= 1``.
    """
    if not 0.0 < T <= 1.0:
        raise ValueError(f"transmission must lie in (0, 1], got {T}")
    if d <= 0:
        raise ValueError("mean spacing d must be positive")
    x = (2.0 - T - 2.0 * math.sqrt(1.0 - T)) / T
    return math.sqrt(x * d) / math.pi


# ---------------------------------------------------------------------------
# coupling matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CouplingSpec:
    """Channel layout for one realization.

    Parameters
    ----------
    n : int
        Quaternion dimension of the Hamiltonian (dense dimension ``2n``).
    open_transmissions : tuple of float
        Target ``T`` of each observable channel, each in ``(0, 1]``.
    lam : int
        Number of fictitious absorbing channels (quaternion count in the
        symplectic case; each contributes two columns).
    t_fictitious : float
        Common transmission of the fictitious channels; ``(0, 1]`` when
        ``lam > 0``, exactly 0 when ``lam = 0``.
    d : float
        Mean level spacing at band center (Kramers partners counted
        separately), measured from the realization being coupled.
    """

    n: int
    open_transmissions: tuple[float, ...]
    lam: int
    t_fictitious: float
    d: float

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "open_transmissions", tuple(float(t) for t in self.open_transmissions)
        )
        for name in ("n", "lam"):
            value = getattr(self, name)
            if value != int(value):
                raise ValueError(f"{name} must be a whole number, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.n < 2:
            raise ValueError("quaternion dimension must be at least 2")
        if not self.open_transmissions:
            raise ValueError("need at least one open channel")
        if any(not 0 < t <= 1 for t in self.open_transmissions):
            raise ValueError("open transmissions must lie in (0, 1]")
        if self.lam < 0:
            raise ValueError("fictitious channel count must be >= 0")
        if self.lam + len(self.open_transmissions) >= self.n:
            raise ValueError(
                f"need lam + open channels < n, got {self.lam} + "
                f"{len(self.open_transmissions)} >= {self.n}"
            )
        if self.lam > 0:
            if not 0 < self.t_fictitious <= 1:
                raise ValueError("t_fictitious must lie in (0, 1] when lam > 0")
        elif self.t_fictitious != 0.0:
            raise ValueError("t_fictitious must be 0 when lam = 0")
        if self.d <= 0:
            raise ValueError("mean spacing d must be positive")

    @property
    def tau_abs(self) -> float:
        """Absorption parameter ``2 lam T_f``."""
        return 2.0 * self.lam * self.t_fictitious

    @property
    def n_open(self) -> int:
        return len(self.open_transmissions)


def _t_partner(vec: np.ndarray) -> np.ndarray:
    """Kramers partner ``Y conj(v)`` in the paired basis; orthogonal to ``v``."""
    n = vec.shape[0] // 2
    return np.concatenate([-np.conj(vec[n:]), np.conj(vec[:n])])


def build_coupling(
    spec: CouplingSpec,
    rng: np.random.Generator,
    ensemble: str = "gse",
) -> np.ndarray:
    """Channel matrix ``W`` with orthogonal columns and calibrated norms.

    Columns are eigenvectors of an independent auxiliary sample of the
    matching ensemble, so they are generic with respect to the Hamiltonian
    while exactly orthogonal to each other.  In the symplectic case each
    channel occupies a Kramers doublet: the doublet eigenvector and its
    time-reversal partner form two columns of equal norm, giving
    ``W^dag W = diag(w_1^2, w_1^2, w_2^2, w_2^2, ...)`` — open channels
    first, fictitious ones after.  In the unitary case each channel is a
    single column (fictitious count doubled to keep ``tau_abs = 2 lam T_f``
    meaning the same thing).

    The returned matrix is complex of shape ``(2n, C)`` with
    ``C = 2(open + lam)`` for ``"gse"`` and ``C = open + 2 lam`` for
    ``"gue"``.
    """
    targets = list(spec.open_transmissions)
    norms = [inverse_transmission(t, spec.d) for t in targets]
    if spec.lam > 0:
        w_f = inverse_transmission(spec.t_fictitious, spec.d)
    if ensemble == "gse":
        aux = sample_gse(spec.n, rng)
        try:
            _, vecs = np.linalg.eigh(aux.to_dense())
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("eigen-decomposition of the auxiliary sample failed") from exc
        cols = []
        all_norms = norms + [w_f] * spec.lam if spec.lam > 0 else norms
        for ch, w in enumerate(all_norms):
            v = vecs[:, 2 * ch]  # one eigenvector per Kramers doublet
            cols.append(w * v)
            cols.append(w * _t_partner(v))
        return np.column_stack(cols)
    if ensemble == "gue":
        aux = sample_gue(2 * spec.n, rng)
        try:
            _, vecs = np.linalg.eigh(aux)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("eigen-decomposition of the auxiliary sample failed") from exc
        all_norms = norms + [w_f] * (2 * spec.lam) if spec.lam > 0 else norms
        cols = [w * vecs[:, ch] for ch, w in enumerate(all_norms)]
        return np.column_stack(cols)
    raise ValueError(f"unknown ensemble {ensemble!r}")


# ---------------------------------------------------------------------------
# S matrix and K matrix
# ---------------------------------------------------------------------------


def _smatrix_batch(dense_h: np.ndarray, w: np.ndarray, energies: np.ndarray) -> np.ndarray:
    """Full channel-space S matrices for a batch of energies."""
    dim = dense_h.shape[0]
    lam_c = 2.0 * math.pi * dim
    h_eff = dense_h - 0.5j * lam_c * (w @ w.conj().T)
    a = energies[:, None, None] * np.eye(dim)[None] - h_eff[None]
    g = np.linalg.solve(a, np.broadcast_to(w, (energies.size, dim, w.shape[1])))
    return np.eye(w.shape[1])[None] - 1j * lam_c * np.einsum("vc,bvd->bcd", w.conj(), g)


def heidelberg_smatrix(
    h: QuaternionHermitian | np.ndarray,
    w: np.ndarray,
    e: float,
) -> np.ndarray:
    """Channel-space scattering matrix at one energy.

    ``S = 1 - i lam W^dag (e - H_eff)^{-1} W`` with
    ``H_eff = H - (i/2) lam W W^dag`` and ``lam = 2 pi dim``.  Without
    fictitious channels and at real energy ``S`` is unitary; a zero ``W``
    gives the identity.
    """
    dense = h.to_dense() if isinstance(h, QuaternionHermitian) else np.asarray(h)
    try:
        return _smatrix_batch(dense, np.asarray(w, dtype=complex), np.atleast_1d(float(e)))[0]
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"singular resolvent at e={e}") from exc


def k_matrix(s):
    """Reaction matrix ``K = i (S - 1) / (S + 1)`` of scalar amplitudes.

    Raises near the pole ``S = -1`` (total reflection with pi phase),
    where ``K`` diverges.
    """
    s = np.asarray(s, dtype=complex)
    if np.any(np.abs(s + 1.0) < 1e-12):
        raise ValueError("S = -1 pole: K matrix diverges")
    return 1j * (s - 1.0) / (s + 1.0)


def k_matrix_variables(s):
    """The reaction-matrix triple ``(u, v, x)`` of scalar amplitudes.

    ``u = Re K``, ``v = -Im K`` (positive for absorbing systems), and
    ``x = (u^2 + v^2 + 1) / (2v)``, which equals ``(1+R)/(1-R)`` with
    ``R = |S|^2``.  At ``v = 0`` (lossless samples) ``x`` is returned as
    ``inf``.
    """
    k = k_matrix(s)
    u = k.real
    v = -k.imag
    with np.errstate(divide="ignore"):
        x = (u * u + v * v + 1.0) / (2.0 * v)
    return u, v, x


# ---------------------------------------------------------------------------
# ensemble runs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """Reproducible description of one Monte Carlo run.

    Exactly one of ``tau_abs`` (direct absorption setting) or ``gamma``
    (analytic target, to be calibrated first) is usually set;
    :func:`run_ensemble` requires ``tau_abs``.
    """

    ensemble: str = "gse"
    n: int = 100
    lam: int = 30
    t_open: tuple[float, ...] = (1.0,)
    tau_abs: float | None = None
    gamma: float | None = None
    n_realizations: int = 400
    n_energies: int = 64
    energy_window: float = 0.25
    seed: int = 0
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "t_open", tuple(float(t) for t in self.t_open))
        for name in ("n", "lam", "n_realizations", "n_energies"):
            value = getattr(self, name)
            if value != int(value):
                raise ValueError(f"{name} must be a whole number, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.ensemble not in ("gse", "gue"):
            raise ValueError("ensemble must be 'gse' or 'gue'")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not self.t_open:
            raise ValueError("need at least one open channel transmission")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.tau_abs is not None:
            if self.tau_abs < 0:
                raise ValueError("tau_abs must be >= 0")
            if self.lam > 0 and self.tau_abs > 2.0 * self.lam:
                raise ValueError(
                    f"tau_abs = {self.tau_abs} unreachable: 2*lam = {2 * self.lam} "
                    "bounds it (fictitious transmissions cannot exceed 1)"
                )
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if self.n_realizations < 1 or self.n_energies < 1:
            raise ValueError("need at least one realization and one energy")
        if not 0 < self.energy_window <= 1:
            raise ValueError("energy_window must lie in (0, 1]")

    def to_dict(self) -> dict:
        return {
            "ensemble": self.ensemble,
            "n": self.n,
            "lam": self.lam,
            "t_open": list(self.t_open),
            "tau_abs": self.tau_abs,
            "gamma": self.gamma,
            "n_realizations": self.n_realizations,
            "n_energies": self.n_energies,
            "energy_window": self.energy_window,
            "seed": self.seed,
            "label": self.label,
        }


_CONFIG_KEYS = {
    "ensemble": str,
    "n": int,
    "lam": int,
    "t_open": "floats",
    "tau_abs": float,
    "gamma": float,
    "n_realizations": int,
    "n_energies": int,
    "energy_window": float,
    "seed": int,
    "label": str,
}


def parse_run_config(source) -> RunConfig:
    """Read a run configuration from key/value text.

    One ``key value`` pair per line; ``#`` starts a comment.  ``t_open``
    takes a comma-separated list.  ``source`` is a path or an already-open
    file object.  Unknown keys or malformed values raise ``ValueError``
    with the line number.
    """

    def parse_lines(fh):
        kwargs = {}
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = re.split(r"\s+", line, maxsplit=1)
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'key value', got {line!r}")
            key, value = parts[0].lower(), parts[1].strip()
            conv = _CONFIG_KEYS.get(key)
            if conv is None:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
            try:
                if conv == "floats":
                    kwargs[key] = tuple(float(v) for v in value.split(","))
                else:
                    kwargs[key] = conv(value)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: bad value for {key}: {value!r}") from exc
        return RunConfig(**kwargs)

    if hasattr(source, "read"):
        return parse_lines(source)
    with open(source, encoding="utf-8") as fh:
        return parse_lines(fh)


@dataclass
class ScatteringEnsemble:
    """Scalar scattering amplitudes collected over a Monte Carlo run.

    ``s`` holds the observable-channel amplitude for every (realization,
    energy) record; all reaction-matrix variables derive from it.
    ``kramers_defect`` and ``cross_coupling`` are run maxima of
    ``|S11 - S22|`` and ``|S12|`` over the open 2x2 block (symplectic runs
    only; both should sit at rounding level).
    """

    realization: np.ndarray
    energy: np.ndarray
    s: np.ndarray
    config: RunConfig
    gamma: float | None = None
    kramers_defect: float = 0.0
    cross_coupling: float = 0.0
    n_failures: int = 0

    @property
    def n_records(self) -> int:
        return self.s.size

    @property
    def reflection(self) -> np.ndarray:
        """Reflection coefficients ``R = |S|^2``."""
        return np.abs(self.s) ** 2

    def variables(self):
        """Reaction-matrix records ``(u, v, x)``; see :func:`k_matrix_variables`."""
        return k_matrix_variables(self.s)

    def mean_reflection(self) -> float:
        return float(self.reflection.mean())


def _center_spacing(levels: np.ndarray, fraction: float = 0.2) -> float:
    """Mean spacing over the central fraction of a sorted spectrum."""
    dim = levels.size
    half_count = max(1, int(dim * fraction / 2))
    mid = dim // 2
    return float(
        (levels[mid + half_count] - levels[mid - half_count]) / (2 * half_count)
    )


def energy_grid(config: RunConfig) -> np.ndarray:
    """The shared energy grid: central ``energy_window`` of the band."""
    radius = semicircle_radius(2 * config.n)
    half = config.energy_window * radius
    return np.linspace(-half, half, config.n_energies)


def run_ensemble(config: RunConfig) -> ScatteringEnsemble:
    """Monte Carlo sweep: fresh Hamiltonian and coupling per realization.

    Per realization the level spacing at band center is measured from the
    actual sample and the coupling is rescaled to it, so channel
    transmissions hit their targets irrespective of dimension.  Records
    are gathered on the shared energy grid.  Realizations draw independent
    reproducible streams, making the run deterministic given
    ``config.seed`` (and embarrassingly parallel, though this
    implementation runs them serially).

    Singular solves (never observed with absorption on) are skipped and
    counted; more than 1% failed records raise :class:`NumericalFailure`.
    """
    if config.tau_abs is None:
        raise ValueError(
            "run_ensemble needs tau_abs; calibrate gamma first "
            "(calibrate_tau_abs) or set tau_abs directly"
        )
    lam = config.lam if config.tau_abs > 0 else 0
    t_f = config.tau_abs / (2.0 * lam) if lam else 0.0
    energies = energy_grid(config)

    s_rows, e_rows, real_ids = [], [], []
    kramers = 0.0
    cross = 0.0
    failures = 0
    for i in range(config.n_realizations):
        rng = rng_stream(config.seed, i)
        if config.ensemble == "gse":
            dense = sample_gse(config.n, rng).to_dense()
        else:
            dense = sample_gue(2 * config.n, rng)
        levels = np.linalg.eigvalsh(dense)
        spec = CouplingSpec(
            n=config.n,
            open_transmissions=config.t_open,
            lam=lam,
            t_fictitious=t_f,
            d=_center_spacing(levels),
        )
        w = build_coupling(spec, rng, config.ensemble)
        n_open_cols = 2 * spec.n_open if config.ensemble == "gse" else spec.n_open
        kept = energies
        try:
            s_full = _open_block_batch(dense, w, energies, n_open_cols)
        except np.linalg.LinAlgError:
            s_full, kept_idx, n_bad = _open_block_loop(dense, w, energies, n_open_cols)
            kept = energies[kept_idx]
            failures += n_bad
        s_rows.append(s_full[:, 0, 0])
        e_rows.append(kept)
        real_ids.append(np.full(kept.size, i))
        if config.ensemble == "gse" and s_full.size:
            kramers = max(kramers, float(np.max(np.abs(s_full[:, 0, 0] - s_full[:, 1, 1]))))
            cross = max(cross, float(np.max(np.abs(s_full[:, 0, 1]))))

    total = config.n_realizations * config.n_energies
    if failures > 0.01 * total:
        raise NumericalFailure(
            f"{failures}/{total} records failed the linear solve; "
            "the configuration is numerically unhealthy"
        )
    return ScatteringEnsemble(
        realization=np.concatenate(real_ids),
        energy=np.concatenate(e_rows),
        s=np.concatenate(s_rows),
        config=config,
        gamma=config.gamma,
        kramers_defect=kramers,
        cross_coupling=cross,
        n_failures=failures,
    )


def _open_block_batch(
    dense: np.ndarray, w: np.ndarray, energies: np.ndarray, n_open_cols: int
) -> np.ndarray:
    """Open-channel block of S for all energies via one stacked solve.

    Only the open columns of the resolvent are needed, so the solve uses
    just those right-hand sides; the fictitious channels enter through
    ``h_eff`` alone.
    """
    dim = dense.shape[0]
    lam_c = 2.0 * math.pi * dim
    h_eff = dense - 0.5j * lam_c * (w @ w.conj().T)
    a = energies[:, None, None] * np.eye(dim)[None] - h_eff[None]
    w_open = w[:, :n_open_cols]
    g = np.linalg.solve(a, np.broadcast_to(w_open, (energies.size, dim, n_open_cols)))
    return np.eye(n_open_cols)[None] - 1j * lam_c * np.einsum(
        "vc,bvd->bcd", w_open.conj(), g
    )


def _open_block_loop(dense, w, energies, n_open_cols):
    """Per-energy fallback when the stacked solve hits a singular matrix."""
    blocks, picked, bad = [], [], 0
    for idx, e in enumerate(energies):
        try:
            blocks.append(_open_block_batch(dense, w, np.asarray([e]), n_open_cols)[0])
            picked.append(idx)
        except np.linalg.LinAlgError:
            bad += 1
    out = (
        np.stack(blocks)
        if blocks
        else np.empty((0, n_open_cols, n_open_cols), dtype=complex)
    )
    return out, np.asarray(picked, dtype=int), bad


# ---------------------------------------------------------------------------
# absorption calibration
# ---------------------------------------------------------------------------


@dataclass
class CalibrationResult:
    """Outcome of matching Monte Carlo absorption to an analytic target."""

    gamma: float
    tau_abs: float
    t_fictitious: float
    lam: int
    target_mean: float
    achieved_mean: float
    n_full_runs: int
    converged: bool


def calibrate_tau_abs(
    gamma_target: float,
    config: RunConfig,
    rel_tol: float = 0.01,
    coarse_realizations: int | None = None,
    max_refine: int = 5,
) -> CalibrationResult:
    """Find ``tau_abs`` whose ensemble mean reflection matches ``gamma_target``.

    The mean reflection is monotone decreasing in ``tau_abs`` while the
    per-channel transmission stays moderate, so a coarse log-space
    bisection on a thinned configuration brackets the value cheaply; the
    estimate is then polished on the full configuration with a secant-type
    update exploiting the nearly reciprocal dependence of the mean on
    ``tau_abs``.  All evaluations recycle the same master seed, so the
    calibrated value is exact for the production run by construction
    (common random numbers).

    The search is capped at ``tau_abs = lam`` (per-channel transmission
    1/2): beyond that the strongly coupled fictitious channels trap
    resonance width on a few broad states instead of spreading it, the
    mean reflection stops decreasing, and the channel model no longer
    mimics uniform absorption.  Targets that need more absorption raise
    :class:`CalibrationError` with the advice to raise ``lam`` (which
    keeps every channel weak); refinement stalls raise as well.
    """
    if gamma_target <= 0:
        raise ValueError("gamma_target must be > 0")
    if config.lam < 1:
        raise CalibrationError("calibration needs at least one fictitious channel")
    target = mean_reflection(AbsorptionParams(gamma_target, config.ensemble))

    coarse = replace(
        config,
        gamma=None,
        tau_abs=None,
        n_realizations=coarse_realizations
        or max(24, config.n_realizations // 8),
        n_energies=min(config.n_energies, 16),
    )

    def mean_r(tau: float, cfg: RunConfig) -> float:
        return run_ensemble(replace(cfg, tau_abs=tau, gamma=None)).mean_reflection()

    tau_hi = float(config.lam)
    tau_lo = tau_hi * 1e-3
    r_hi = mean_r(tau_hi, coarse)
    if r_hi > target:
        raise CalibrationError(
            f"target <R> = {target:.4f} (gamma = {gamma_target}) is below "
            f"{r_hi:.4f}, the reachable minimum at tau_abs = {tau_hi:g} "
            "(per-channel transmission 1/2, the weak-coupling limit of the "
            "search); increase lam"
        )
    r_lo = mean_r(tau_lo, coarse)
    if r_lo < target:
        raise CalibrationError(
            f"target <R> = {target:.4f} already exceeded at tau_abs = {tau_lo:.3g} "
            f"(<R> = {r_lo:.4f}); gamma this small needs a finer tau range"
        )
    lo, hi = math.log(tau_lo), math.log(tau_hi)
    for _ in range(9):
        mid = 0.5 * (lo + hi)
        if mean_r(math.exp(mid), coarse) > target:
            lo = mid
        else:
            hi = mid
    tau = math.exp(0.5 * (lo + hi))

    n_full = 0
    for _ in range(max_refine):
        achieved = mean_r(tau, config)
        n_full += 1
        if abs(achieved - target) <= rel_tol * target:
            return CalibrationResult(
                gamma=gamma_target,
                tau_abs=tau,
                t_fictitious=tau / (2.0 * config.lam),
                lam=config.lam,
                target_mean=target,
                achieved_mean=achieved,
                n_full_runs=n_full,
                converged=True,
            )
        # <R> scales close to 1/tau in the absorbing regime
        tau = min(max(tau * achieved / target, math.exp(lo) * 0.5), tau_hi)
    raise CalibrationError(
        f"refinement did not converge: last <R> = {achieved:.5f} vs target "
        f"{target:.5f} (tau_abs = {tau:.4f} after {n_full} full runs)"
    )


# ---------------------------------------------------------------------------
# correlation functions
# ---------------------------------------------------------------------------


def autocorrelation(ensemble: ScatteringEnsemble, n_offsets: int | None = None) -> StatCurve:
    """Normalized two-point correlation of ``S`` along the energy axis.

    ``C(eps) = [<S(e) S*(e+eps)> - |<S>|^2] / [<|S|^2> - |<S>|^2]`` with the
    averages over energies and realizations; ``C(0) = 1`` exactly.  The
    offsets are multiples of the run's energy step, expressed in units of
    the mean level spacing at band center (the natural scale for comparing
    runs).  Standard errors come from the scatter across realizations.

    Raises ``ValueError`` when the ensemble shows no fluctuations.
    """
    cfg = ensemble.config
    if ensemble.s.size != cfg.n_realizations * cfg.n_energies:
        raise ValueError(
            "ensemble has dropped records; autocorrelation needs the full "
            "realization x energy grid"
        )
    grid = ensemble.s.reshape(cfg.n_realizations, cfg.n_energies)
    if n_offsets is None:
        n_offsets = min(cfg.n_energies - 1, 32)
    if not 0 <= n_offsets < cfg.n_energies:
        raise ValueError("n_offsets must be smaller than the energy grid")
    s_mean = grid.mean()

    step = energy_grid(cfg)[1] - energy_grid(cfg)[0] if cfg.n_energies > 1 else 0.0
    # express offsets in units of the mean spacing of the run's dimension
    d_typical = math.pi * semicircle_radius(2 * cfg.n) / (2 * (2 * cfg.n))

    eps = np.arange(n_offsets + 1) * step / d_typical
    raw = np.empty(n_offsets + 1, dtype=complex)
    spread = np.empty(n_offsets + 1)
    for m in range(n_offsets + 1):
        if m == 0:
            # |S|^2 taken on the real axis: complex multiply would leave a
            # rounding-level imaginary residue and spoil C(0) = 1 exactly
            pairs = np.abs(grid) ** 2
        else:
            pairs = grid[:, : cfg.n_energies - m] * np.conj(grid[:, m:])
        per_real = pairs.mean(axis=1) - abs(s_mean) ** 2
        raw[m] = per_real.mean()
        spread[m] = (
            float(np.abs(per_real).std(ddof=1) / math.sqrt(per_real.size))
            if per_real.size > 1
            else 0.0
        )
    # normalizing by the zero-offset estimate itself makes C(0) = 1 exact
    denom = raw[0].real
    if denom < 1e-14:
        raise ValueError("degenerate ensemble: S does not fluctuate")
    values = raw / denom
    errors = spread / denom
    return StatCurve(
        x=eps,
        y=values,
        err=errors,
        label="S autocorrelation",
        meta={
            "normalization": "complex C(eps), modulus taken by consumers",
            "offset_unit": "mean level spacing at band center",
        },
    )

"""Spectral fluctuation statistics on unfolded level sequences.

Everything in this module works on *unfolded* spectra, i.e. sequences whose
local mean spacing is already one.  Producing such sequences is the job of
the ensemble and graph modules (:func:`~gsescatter.ensembles.unfold_semicircle`,
:func:`~gsescatter.graphs.weyl_unfold`).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Histogram",
    "StatCurve",
    "ks_distance",
    "nnsd",
    "number_variance",
    "thin_spectrum",
    "wigner_surmise",
]


@dataclass
class Histogram:
    """Density histogram: bin edges, raw counts, and normalized heights.

    ``density`` integrates to 1 over the binned range (samples falling
    outside the edges are not counted).  ``mean`` is the mean of the pooled
    samples that produced the histogram, when the producer reports it.
    """

    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    n_samples: int
    mean: float | None = None

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)


@dataclass
class StatCurve:
    """A statistic on a grid with optional standard errors and metadata."""

    x: np.ndarray
    y: np.ndarray
    err: np.ndarray | None = None
    label: str = ""
    meta: dict = field(default_factory=dict)


def _as_sequences(unfolded_sets) -> list[np.ndarray]:
    if isinstance(unfolded_sets, np.ndarray) and unfolded_sets.ndim == 1:
        unfolded_sets = [unfolded_sets]
    return [np.asarray(s, dtype=float) for s in unfolded_sets]


def nnsd(
    unfolded_sets: np.ndarray | list[np.ndarray],
    bins: int | np.ndarray = 40,
    range_max: float = 4.0,
    normalize: bool = True,
) -> Histogram:
    """Nearest-neighbour spacing histogram of one or many level sequences.

    Parameters
    ----------
    unfolded_sets : array or list of arrays
        One unfolded spectrum, or a list of them.  Spacings are pooled; no
        spacing is formed across sequence boundaries, and sequences with
        fewer than two levels are skipped with a warning.
    bins, range_max
        Bin count over ``[0, range_max]``, or explicit bin edges.
    normalize : bool
        If true (default), rescale the pooled spacings by their mean first.
        Unfolding should already give mean 1; the rescale removes the
        residual finite-window bias.  Set false to histogram raw spacings.
    """
    pieces = []
    for i, seq in enumerate(_as_sequences(unfolded_sets)):
        if seq.size < 2:
            warnings.warn(f"sequence {i} has {seq.size} level(s); skipped", stacklevel=2)
            continue
        pieces.append(np.diff(seq))
    if not pieces:
        raise ValueError("no sequence contributed any spacing")
    spacings = np.concatenate(pieces)
    if np.any(spacings < 0):
        raise ValueError("level sequences must be ascending")
    pooled_mean = float(spacings.mean())
    if normalize:
        if pooled_mean <= 0:
            raise ValueError("pooled mean spacing is zero; cannot normalize")
        spacings = spacings / pooled_mean
    if np.isscalar(bins):
        edges = np.linspace(0.0, range_max, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
    counts, edges = np.histogram(spacings, bins=edges)
    total = counts.sum()
    if total == 0:
        raise ValueError("all spacings fall outside the requested bin range")
    density = counts / (total * np.diff(edges))
    return Histogram(
        edges=edges,
        counts=counts,
        density=density,
        n_samples=int(spacings.size),
        mean=pooled_mean,
    )


def wigner_surmise(sym: str, s: np.ndarray | None = None) -> StatCurve:
    """Wigner-surmise spacing density for one of the classical classes.

    Parameters
    ----------
    sym : {"goe", "gue", "gse"}
        Symmetry class (case-insensitive).  The repulsion exponents are 1,
        2 and 4; all three curves are normalized with unit mean spacing.
    s : array, optional
        Evaluation grid; defaults to 400 points on ``[0, 4]``.
    """
    if s is None:
        s = np.linspace(0.0, 4.0, 401)
    s = np.asarray(s, dtype=float)
    key = sym.lower()
    if key == "goe":
        y = (np.pi / 2.0) * s * np.exp(-np.pi * s * s / 4.0)
    elif key == "gue":
        y = (32.0 / np.pi**2) * s * s * np.exp(-4.0 * s * s / np.pi)
    elif key == "gse":
        y = (262144.0 / (729.0 * np.pi**3)) * s**4 * np.exp(-64.0 * s * s / (9.0 * np.pi))
    else:
        raise ValueError(f"unknown symmetry class {sym!r}")
    return StatCurve(x=s, y=y, label=f"{key} surmise")


def number_variance(
    unfolded_sets: np.ndarray | list[np.ndarray],
    lengths: np.ndarray | None = None,
    n_windows: int | None = None,
    rng: np.random.Generator | None = None,
) -> StatCurve:
    """Variance of the level count in windows of given unfolded length.

    For each length the window start is drawn uniformly inside each
    sequence and the count variance is taken per sequence; the returned
    value is the across-sequence mean, with its standard error when more
    than one sequence is supplied.  Lengths exceeding half the shortest
    sequence span are dropped with a warning.

    Parameters
    ----------
    unfolded_sets : array or list of arrays
        Unfolded spectra.
    lengths : array, optional
        Window lengths; default ``0.1 .. 5.0`` in steps of 0.1.
    n_windows : int, optional
        Random window positions per sequence per length; defaults to 10x
        the sequence's level count.
    rng : numpy.random.Generator, optional
        Randomness for window placement (fresh default generator if omitted).
    """
    seqs = [s for s in _as_sequences(unfolded_sets) if s.size >= 2]
    if not seqs:
        raise ValueError("need at least one sequence with two or more levels")
    if lengths is None:
        lengths = np.arange(0.1, 5.0 + 1e-9, 0.1)
    lengths = np.asarray(lengths, dtype=float)
    min_span = min(s[-1] - s[0] for s in seqs)
    usable = lengths <= 0.5 * min_span
    if not np.all(usable):
        warnings.warn(
            f"dropping {np.count_nonzero(~usable)} window length(s) above half the "
            f"shortest span ({0.5 * min_span:.3g})",
            stacklevel=2,
        )
        lengths = lengths[usable]
    if lengths.size == 0:
        raise ValueError("no usable window lengths remain")
    if rng is None:
        rng = np.random.default_rng()

    per_seq = np.empty((len(seqs), lengths.size))
    for j, seq in enumerate(seqs):
        m = n_windows if n_windows is not None else 10 * seq.size
        starts = seq[0] + rng.uniform(0.0, 1.0, size=m)[:, None] * (
            seq[-1] - seq[0] - lengths
        )[None, :]
        counts = np.searchsorted(seq, starts + lengths[None, :]) - np.searchsorted(
            seq, starts
        )
        per_seq[j] = counts.var(axis=0)
    y = per_seq.mean(axis=0)
    err = (
        per_seq.std(axis=0, ddof=1) / np.sqrt(len(seqs))
        if len(seqs) > 1
        else None
    )
    return StatCurve(
        x=lengths,
        y=y,
        err=err,
        label="number variance",
        meta={"n_sequences": len(seqs), "window_policy": "uniform-random"},
    )


def thin_spectrum(levels: np.ndarray, keep: float, rng: np.random.Generator) -> np.ndarray:
    """Randomly keep each level with probability ``keep``, then rescale.

    Surviving levels are multiplied by ``keep`` so the mean spacing returns
    to one in expectation.  Thinning destroys spectral rigidity: a heavily
    thinned correlated sequence drifts toward Poisson statistics, which is
    the standard control for claims of level repulsion and the model for
    incomplete experimental spectra.
    """
    if not 0 < keep <= 1:
        raise ValueError("keep probability must lie in (0, 1]")
    levels = np.asarray(levels, dtype=float)
    picked = levels[rng.random(levels.size) < keep]
    if picked.size < 2:
        raise ValueError("thinning left fewer than 2 levels")
    return picked * keep


def ks_distance(
    samples: np.ndarray | Histogram,
    curve_x: np.ndarray,
    curve_y: np.ndarray,
) -> float:
    """Kolmogorov-Smirnov distance between data and a normalized density.

    The curve is integrated with the trapezoid rule to a CDF and compared
    against the empirical CDF with the two-sided convention (the supremum
    is checked both just before and at each jump).  The curve must carry
    unit mass on its grid to within ``10^-3``; a larger deviation raises
    ``ValueError`` instead of silently renormalizing.

    ``samples`` may be a raw sample array or a :class:`Histogram`, in which
    case the empirical CDF is the cumulative count fraction at the bin
    edges.
    """
    curve_x = np.asarray(curve_x, dtype=float)
    curve_y = np.asarray(curve_y, dtype=float)
    if curve_x.ndim != 1 or curve_x.shape != curve_y.shape:
        raise ValueError("curve grid and values must be matching 1-d arrays")
    cdf = np.concatenate(
        [[0.0], np.cumsum(0.5 * (curve_y[1:] + curve_y[:-1]) * np.diff(curve_x))]
    )
    if abs(cdf[-1] - 1.0) > 1e-3:
        raise ValueError(
            f"reference density integrates to {cdf[-1]:.6f} on its grid; "
            "not a normalized density"
        )

    if isinstance(samples, Histogram):
        total = samples.counts.sum()
        if total == 0:
            raise ValueError("histogram holds no samples")
        emp = np.concatenate([[0.0], np.cumsum(samples.counts)]) / total
        model = np.interp(samples.edges, curve_x, cdf, left=0.0, right=cdf[-1])
        return float(np.max(np.abs(emp - model)))

    samples = np.sort(np.asarray(samples, dtype=float))
    if samples.size == 0:
        raise ValueError("no samples")
    model = np.interp(samples, curve_x, cdf, left=0.0, right=cdf[-1])
    n = samples.size
    emp_hi = np.arange(1, n + 1) / n
    emp_lo = np.arange(0, n) / n
    return float(max(np.max(np.abs(emp_hi - model)), np.max(np.abs(model - emp_lo))))

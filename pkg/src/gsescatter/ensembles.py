"""Random-matrix ensembles with and without symplectic structure.

Conventions
-----------
A quaternion-real Hermitian matrix of quaternion dimension ``n`` is stored
through its two complex ``n x n`` blocks ``(H0, V)`` and expands to the
``2n x 2n`` Hermitian matrix::

    H = [[ H0       , V        ],
         [ -conj(V) , conj(H0) ]]

with ``H0`` Hermitian and ``V`` antisymmetric (``V = -V.T``).  This "paired"
basis lists all first doublet partners before all second partners, so the
time-reversal dual is ``Y @ H.T @ Y.T`` with::

    Y = [[ 0 , -1_n ],
         [ 1_n ,  0 ]]

Self-duality ``H == Y @ H.T @ Y.T`` plus Hermiticity is what
:func:`symplectic_check` verifies, and it forces every eigenvalue to be
doubly degenerate (Kramers doublets).

Sampling scale: all independent off-diagonal quaternion coefficients are
``N(0, sigma^2)`` while the real diagonal entries are ``N(0, 2 sigma^2)``
(standard deviation larger by ``sqrt(2)``).  With that convention every
complex off-diagonal entry of the dense matrix has mean square ``2 sigma^2``
and the limiting spectral density is a semicircle of radius
``2 * sigma * sqrt(2 * dim)`` where ``dim`` is the dense dimension
(``2n`` for the symplectic ensemble, ``n`` for the unitary one).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NumericalFailure",
    "QuaternionHermitian",
    "SpectrumSample",
    "eigen_kramers",
    "rng_stream",
    "sample_gse",
    "sample_gue",
    "semicircle_radius",
    "symplectic_check",
    "unfold_semicircle",
]


class NumericalFailure(RuntimeError):
    """A numerical routine failed to converge; the message carries diagnostics."""

#: quaternion units tau_mu = -i * sigma_mu next to the 2x2 identity;
#: used to expand coefficient arrays into dense 2x2 blocks.
_TAU = np.array(
    [
        [[1.0, 0.0], [0.0, 1.0]],
        [[0.0, -1.0j], [-1.0j, 0.0]],
        [[0.0, -1.0], [1.0, 0.0]],
        [[-1.0j, 0.0], [0.0, 1.0j]],
    ]
)


def rng_stream(master_seed: int, index: int) -> np.random.Generator:
    """Return an independent, reproducible random stream.

    Streams are derived from a counter-based bit generator keyed by
    ``(master_seed, index)``; the same pair always yields the same stream
    and different indices never collide, so per-realization streams can be
    consumed in any order (or in parallel workers) without changing results.
    """
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(seq))


@dataclass
class QuaternionHermitian:
    """Quaternion-real Hermitian matrix stored as complex blocks.

    Parameters
    ----------
    upper : ndarray, shape (n, n), complex
        The Hermitian block ``H0``.
    skew : ndarray, shape (n, n), complex
        The antisymmetric block ``V``.
    sigma : float
        Sampling scale of the coefficients; kept so spectra can be unfolded
        against the matching semicircle without re-deriving it.
    """

    upper: np.ndarray
    skew: np.ndarray
    sigma: float = 1.0

    def __post_init__(self) -> None:
        self.upper = np.asarray(self.upper, dtype=complex)
        self.skew = np.asarray(self.skew, dtype=complex)
        if self.upper.ndim != 2 or self.upper.shape[0] != self.upper.shape[1]:
            raise ValueError("upper block must be a square matrix")
        if self.skew.shape != self.upper.shape:
            raise ValueError("skew block must match the upper block shape")
        if self.upper.shape[0] < 1:
            raise ValueError("quaternion dimension must be at least 1")

    @property
    def n(self) -> int:
        """Quaternion dimension."""
        return self.upper.shape[0]

    @property
    def dim(self) -> int:
        """Dense (complex) dimension, ``2 * n``."""
        return 2 * self.upper.shape[0]

    def to_dense(self) -> np.ndarray:
        """Dense ``2n x 2n`` matrix in the paired basis."""
        return np.block(
            [[self.upper, self.skew], [-self.skew.conj(), self.upper.conj()]]
        )

    def blocks(self) -> np.ndarray:
        """Quaternion 2x2 blocks, shape ``(n, n, 2, 2)``.

        ``blocks()[m, p]`` is ``sum_mu c_mu * tau_mu`` where the four real
        coefficient matrices are symmetric (``mu = 0``) respectively
        antisymmetric (``mu = 1, 2, 3``); diagonal blocks are real multiples
        of the identity.
        """
        c0 = self.upper.real
        c3 = -self.upper.imag
        c2 = -self.skew.real
        c1 = -self.skew.imag
        coeff = np.stack([c0, c1, c2, c3], axis=-1)  # (n, n, 4)
        return np.einsum("mpu,uab->mpab", coeff, _TAU)


def sample_gse(n: int, rng: np.random.Generator, sigma: float = 1.0) -> QuaternionHermitian:
    """Draw a Gaussian symplectic-ensemble matrix of quaternion dimension ``n``.

    The four real coefficient matrices are sampled directly (symmetric scalar
    part, antisymmetric quaternion parts), which enforces Hermiticity and
    self-duality exactly rather than to rounding.

    Parameters
    ----------
    n : int
        Quaternion dimension; the dense matrix is ``2n x 2n``.
    rng : numpy.random.Generator
        Source of randomness.
    sigma : float
        Standard deviation of the independent off-diagonal coefficients;
        diagonal entries get ``sqrt(2) * sigma``.

    Returns
    -------
    QuaternionHermitian
    """
    if n < 1:
        raise ValueError(f"invalid quaternion dimension n={n}")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    c0 = np.triu(rng.normal(scale=sigma, size=(n, n)), 1)
    c0 = c0 + c0.T + np.diag(rng.normal(scale=np.sqrt(2.0) * sigma, size=n))
    skew_parts = []
    for _ in range(3):
        a = np.triu(rng.normal(scale=sigma, size=(n, n)), 1)
        skew_parts.append(a - a.T)
    c1, c2, c3 = skew_parts
    upper = c0 - 1j * c3
    skew = -c2 - 1j * c1
    return QuaternionHermitian(upper=upper, skew=skew, sigma=sigma)


def sample_gue(n: int, rng: np.random.Generator, sigma: float = 1.0) -> np.ndarray:
    """Draw a Gaussian unitary-ensemble matrix of dimension ``n``.

    Matches the scale convention of :func:`sample_gse`: off-diagonal entries
    have mean square ``2 sigma^2`` (real and imaginary parts ``sigma`` each)
    and real diagonal entries have variance ``2 sigma^2``.
    """
    if n < 1:
        raise ValueError(f"invalid dimension n={n}")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    a = rng.normal(scale=sigma, size=(n, n)) + 1j * rng.normal(scale=sigma, size=(n, n))
    return (a + a.conj().T) / np.sqrt(2.0)


def _dual_defect(h: np.ndarray) -> float:
    n = h.shape[0] // 2
    a, b = h[:n, :n], h[:n, n:]
    c, d = h[n:, :n], h[n:, n:]
    # Y @ H.T @ Y.T assembled blockwise: [[D.T, -B.T], [-C.T, A.T]]
    defect = max(
        np.max(np.abs(a - d.T)),
        np.max(np.abs(b + b.T)),
        np.max(np.abs(c + c.T)),
        np.max(np.abs(d - a.T)),
        np.max(np.abs(b + c.conj())) if n else 0.0,
    )
    return float(defect)


def symplectic_check(h: np.ndarray | QuaternionHermitian, tol: float = 1e-12) -> bool:
    """Test Hermiticity plus symplectic self-duality of a dense matrix.

    Returns ``True`` iff ``h`` is Hermitian and equals ``Y @ h.T @ Y.T``
    (max-norm, tolerance ``tol``).  Odd-dimensional input raises
    ``ValueError`` since no pairing exists.
    """
    if isinstance(h, QuaternionHermitian):
        h = h.to_dense()
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("expected a square matrix")
    if h.shape[0] % 2 != 0:
        raise ValueError(f"dimension {h.shape[0]} is odd; symplectic structure needs pairs")
    if np.max(np.abs(h - h.conj().T)) > tol:
        return False
    return _dual_defect(h) <= tol


@dataclass
class SpectrumSample:
    """Eigenvalue set of one realization.

    ``raw`` keeps every level (doublet partners included); ``collapsed``
    replaces each Kramers pair by its mean; ``unfolded`` is filled once an
    unfolding has been applied and then has unit mean spacing on its window.
    """

    raw: np.ndarray
    collapsed: np.ndarray
    unfolded: np.ndarray | None = None
    label: str = ""
    max_splitting: float = 0.0
    max_rel_splitting: float = 0.0

    def __post_init__(self) -> None:
        for name in ("raw", "collapsed"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1 or np.any(np.diff(arr) < 0):
                raise ValueError(f"{name} levels must be a 1-d ascending array")
            setattr(self, name, arr)


def eigen_kramers(h: QuaternionHermitian | np.ndarray, label: str = "") -> SpectrumSample:
    """Eigenvalues of a self-dual matrix with Kramers doublets collapsed.

    Consecutive levels of the sorted spectrum are paired and averaged; the
    largest intra-doublet splitting (absolute and relative to the local
    scale) is recorded on the returned sample so callers can assert the
    degeneracy really held.
    """
    if isinstance(h, QuaternionHermitian):
        dense = h.to_dense()
    else:
        dense = np.asarray(h)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise ValueError("expected a square matrix")
        if dense.shape[0] % 2 != 0:
            raise ValueError("odd dimension has no doublet structure")
    try:
        levels = np.linalg.eigvalsh(dense)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(
            f"eigen-solver failed on a {dense.shape[0]}x{dense.shape[0]} matrix "
            f"(label={label!r}): {exc}"
        ) from exc
    first, second = levels[::2], levels[1::2]
    split = second - first
    scale = np.maximum(np.abs(first), np.abs(second))
    scale[scale == 0.0] = 1.0
    return SpectrumSample(
        raw=levels,
        collapsed=0.5 * (first + second),
        label=label,
        max_splitting=float(split.max()) if split.size else 0.0,
        max_rel_splitting=float((split / scale).max()) if split.size else 0.0,
    )


def semicircle_radius(dim: int, sigma: float = 1.0) -> float:
    """Limiting semicircle radius for the sampling conventions of this module.

    ``dim`` is the dense dimension (``2n`` for symplectic samples).
    """
    return 2.0 * sigma * np.sqrt(2.0 * dim)


def unfold_semicircle(
    levels: np.ndarray,
    radius: float,
    central_fraction: float = 0.5,
) -> np.ndarray:
    """Map levels through the integrated semicircle and keep a central window.

    Parameters
    ----------
    levels : array_like
        Ascending eigenvalues of a single realization.
    radius : float
        Semicircle radius; :func:`semicircle_radius` supplies it for sampled
        ensembles.
    central_fraction : float
        Fraction of levels (by count, centred on the median index) to
        return; edge levels are discarded because the semicircle stops being
        a good density model there.

    Returns
    -------
    ndarray
        Unfolded levels with mean spacing ~1 on the retained window.
    """
    levels = np.asarray(levels, dtype=float)
    if levels.ndim != 1 or levels.size < 4:
        raise ValueError("need an ascending 1-d array with at least 4 levels")
    if np.any(np.diff(levels) < 0):
        raise ValueError("levels must be ascending")
    if not 0 < central_fraction <= 1:
        raise ValueError("central_fraction must lie in (0, 1]")
    u = np.clip(levels / radius, -1.0, 1.0)
    cum = levels.size * (0.5 + (u * np.sqrt(1.0 - u * u) + np.arcsin(u)) / np.pi)
    keep = int(round(levels.size * central_fraction))
    keep = max(keep, 2)
    lo = (levels.size - keep) // 2
    return cum[lo : lo + keep]

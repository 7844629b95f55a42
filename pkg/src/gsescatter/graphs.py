"""Quantum graphs with symplectic symmetry built from two mirrored subgraphs.

A metric graph is described by its bonds; on each bond of length ``L`` a
wave ``exp(ikx)`` accumulates the phase ``kL`` plus a direction-dependent
vector-potential phase (the microwave realization of such a phase is a
circulator).  With Neumann vertex conditions the eigen-wavenumbers solve
``det h(k) = 0`` where the vertex secular matrix ``h(k)`` has

* diagonal:  ``- sum over bonds at vertex of cot(k L)``,
* off-diagonal for a bond (i, j):  ``exp(-i (a + phi)) / sin(k L)`` stored
  at ``(i, j)`` and ``exp(-i (-a + phi)) / sin(k L)`` at ``(j, i)``,

with ``a`` the directed vector-potential phase and ``phi`` a reciprocal
phase that we restrict to 0 or pi (applied symmetrically, so ``h`` stays
Hermitian for real ``k``).

The symplectic (GSE-like) construction pairs a subgraph carrying phases
``a`` with a mirror copy carrying ``-a`` and couples them by exactly two
equal-length bonds, one of which carries the extra phase pi.  Ordering the
mirror vertices after the originals makes ``h(k)`` exactly self-dual,
``h = Y h^T Y^T``, so all eigen-wavenumbers come in Kramers doublets while
a single subgraph alone shows unitary-class statistics.

Open systems attach single-mode leads at vertices: with the lead incidence
matrix ``W`` (one column per lead) the scattering matrix is::

    S(k) = 2i W^T [h(k) + i W W^T]^{-1} W - 1

which is exactly unitary for real ``k`` and sub-unitary once uniform wall
absorption is switched on by the complex wavenumber ``k (1 + i eta)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .ensembles import NumericalFailure

__all__ = [
    "Bond",
    "GraphSpec",
    "GraphSpecError",
    "GraphSpectrum",
    "PoleProximityError",
    "SPEED_OF_LIGHT",
    "dump_graph_spec",
    "example_gse_paired",
    "example_gue_subgraph",
    "graph_smatrix",
    "h_matrix",
    "load_graph_spec",
    "paired_graph",
    "secular_spectrum",
    "weyl_unfold",
]

SPEED_OF_LIGHT = 299_792_458.0  # m/s

#: |sin(kL)| below this is treated as sitting on a bond pole
POLE_GUARD = 1e-8


class GraphSpecError(ValueError):
    """Invalid graph description (construction or file parsing)."""


class PoleProximityError(ValueError):
    """The requested wavenumber sits on (or too close to) a bond pole."""


@dataclass(frozen=True)
class Bond:
    """One bond: endpoints, metric length, and the two bond phases.

    ``a_phase`` is the directed phase ``A*L`` picked up along i -> j (and
    with opposite sign along j -> i); ``extra_phase`` is reciprocal, the
    same in both directions.
    """

    i: int
    j: int
    length: float
    a_phase: float = 0.0
    extra_phase: float = 0.0

    def __post_init__(self) -> None:
        if self.i == self.j:
            raise GraphSpecError(f"self-loop at vertex {self.i} is not supported")
        if self.i < 0 or self.j < 0:
            raise GraphSpecError("vertex indices must be non-negative")
        if not self.length > 0:
            raise GraphSpecError(f"bond ({self.i},{self.j}) has non-positive length")


@dataclass(frozen=True)
class GraphSpec:
    """Immutable description of a metric graph.

    ``symmetry`` is ``"gse-paired"`` for the mirrored two-subgraph
    construction (vertices ``0..V-1`` and their partners ``V..2V-1``) or
    ``"free"`` for anything else.  ``eta`` is the uniform absorption
    parameter entering through ``k (1 + i eta)``.
    """

    n_vertices: int
    bonds: tuple[Bond, ...]
    leads: tuple[int, ...] = ()
    symmetry: str = "free"
    eta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "bonds", tuple(self.bonds))
        object.__setattr__(self, "leads", tuple(self.leads))
        if self.n_vertices < 2:
            raise GraphSpecError("need at least two vertices")
        for b in self.bonds:
            if b.i >= self.n_vertices or b.j >= self.n_vertices:
                raise GraphSpecError(f"bond ({b.i},{b.j}) references a missing vertex")
        seen = set()
        for b in self.bonds:
            key = (min(b.i, b.j), max(b.i, b.j))
            if key in seen:
                raise GraphSpecError(f"duplicate bond between {key[0]} and {key[1]}")
            seen.add(key)
        for v in self.leads:
            if not 0 <= v < self.n_vertices:
                raise GraphSpecError(f"lead attached to missing vertex {v}")
        if self.eta < 0:
            raise GraphSpecError("eta must be >= 0")
        if self.symmetry not in ("free", "gse-paired"):
            raise GraphSpecError(f"unknown symmetry tag {self.symmetry!r}")
        if self.symmetry == "gse-paired":
            self._check_pairing()

    # -- structure ---------------------------------------------------------

    @property
    def total_length(self) -> float:
        return float(sum(b.length for b in self.bonds))

    def closed(self) -> "GraphSpec":
        """The same graph without leads (for spectral work)."""
        return replace(self, leads=())

    def _check_pairing(self) -> None:
        if self.n_vertices % 2:
            raise GraphSpecError("gse-paired graphs need an even vertex count")
        half = self.n_vertices // 2
        intra1, intra2, cross = [], {}, []
        for b in self.bonds:
            side_i, side_j = b.i >= half, b.j >= half
            if side_i != side_j:
                cross.append(b)
            elif side_i:
                intra2[(b.i - half, b.j - half)] = b
            else:
                intra1.append(b)
        if len(cross) != 2:
            raise GraphSpecError(
                f"gse-paired graphs need exactly 2 connecting bonds, found {len(cross)}"
            )
        c1, c2 = cross
        if abs(c1.length - c2.length) > 1e-12:
            raise GraphSpecError("connecting bonds must have equal length")
        if any(abs(c.a_phase) > 1e-12 for c in cross):
            raise GraphSpecError("connecting bonds must carry zero directed phase")
        phases = sorted(abs(c.extra_phase) for c in cross)
        if abs(phases[0]) > 1e-12 or abs(phases[1] - math.pi) > 1e-12:
            raise GraphSpecError(
                "exactly one connecting bond must carry the extra phase pi"
            )
        if len(intra1) != len(intra2):
            raise GraphSpecError("subgraphs have different bond counts")
        for b in intra1:
            p = intra2.get((b.i, b.j)) or intra2.get((b.j, b.i))
            if p is None:
                raise GraphSpecError(f"bond ({b.i},{b.j}) has no mirror partner")
            # partner traversed in the same vertex order must carry -a
            a_partner = p.a_phase if (p.i - half, p.j - half) == (b.i, b.j) else -p.a_phase
            if abs(p.length - b.length) > 1e-12 or abs(a_partner + b.a_phase) > 1e-12:
                raise GraphSpecError(
                    f"mirror of bond ({b.i},{b.j}) must have equal length and "
                    "opposite directed phase"
                )


# ---------------------------------------------------------------------------
# secular matrix and spectra
# ---------------------------------------------------------------------------


def _h_batch(spec: GraphSpec, k: np.ndarray) -> np.ndarray:
    """Secular matrices for a batch of (possibly complex) wavenumbers.

    No pole guard here: internal callers keep their grids away from poles.
    """
    k = np.atleast_1d(np.asarray(k))
    nv = spec.n_vertices
    h = np.zeros((k.shape[0], nv, nv), dtype=complex)
    for b in spec.bonds:
        kl = k * b.length
        sn = np.sin(kl)
        cot = np.cos(kl) / sn
        h[:, b.i, b.i] -= cot
        h[:, b.j, b.j] -= cot
        h[:, b.i, b.j] += np.exp(-1j * (b.a_phase + b.extra_phase)) / sn
        h[:, b.j, b.i] += np.exp(-1j * (-b.a_phase + b.extra_phase)) / sn
    return h


def h_matrix(spec: GraphSpec, k: complex) -> np.ndarray:
    """Vertex secular matrix ``h(k)`` of a closed graph.

    Hermitian for real ``k``; raises :class:`PoleProximityError` when
    ``|sin(k L)|`` of any bond falls below the pole guard (``1e-8``),
    naming the offending bond.
    """
    for b in spec.bonds:
        if abs(np.sin(k * b.length)) < POLE_GUARD:
            raise PoleProximityError(
                f"k={k} sits on a pole of bond ({b.i},{b.j}) with length {b.length}"
            )
    return _h_batch(spec, np.asarray([k]))[0]


@dataclass
class GraphSpectrum:
    """Eigen-wavenumbers of a closed graph on a scan interval.

    ``k_raw`` lists every root (Kramers partners separately for paired
    graphs); ``k_collapsed`` holds doublet means and is ``None`` for free
    graphs.  ``max_splitting`` is the largest intra-doublet gap in rad/m.
    """

    k_raw: np.ndarray
    k_collapsed: np.ndarray | None
    max_splitting: float
    total_length: float
    symmetry: str
    k_window: tuple[float, float]
    n_scan_points: int

    @property
    def n_doublets(self) -> int:
        return 0 if self.k_collapsed is None else self.k_collapsed.size

    def unfolded(self) -> np.ndarray:
        """Weyl-unfolded levels with unit mean spacing.

        Uses the collapsed doublet wavenumbers when available (half the
        optical length counts then), otherwise the raw roots.
        """
        if self.k_collapsed is not None:
            return self.k_collapsed * (self.total_length / 2.0) / math.pi
        return self.k_raw * self.total_length / math.pi


def secular_spectrum(
    spec: GraphSpec,
    k_min: float,
    k_max: float,
    points_per_spacing: int = 20,
    tol: float = 1e-12,
) -> GraphSpectrum:
    """All roots of ``det h(k) = 0`` in ``[k_min, k_max]``.

    The determinant itself is useless for root finding here: at a Kramers
    doublet it touches zero quadratically without a sign change.  Instead
    the (real, continuous-between-poles) eigenvalue branches of ``h(k)``
    are tracked on a scan grid and each sign change is bisected.  The scan
    interval is first partitioned at the bond poles ``m pi / L`` so no
    branch is followed across a divergence; grid points are kept a guard
    distance away from every pole.

    Parameters
    ----------
    spec : GraphSpec
        Closed graph (leads are rejected).
    k_min, k_max : float
        Scan window, ``0 < k_min < k_max``.
    points_per_spacing : int
        Scan density relative to the mean level spacing ``pi / L_total``;
        the default of 20 makes missed roots very unlikely for generic
        (incommensurate) graphs.
    tol : float
        Bisection window width at which a root is accepted, in rad/m.

    Raises
    ------
    GraphSpecError
        Spec has leads, or the window is invalid.
    NumericalFailure
        Bisection failed to shrink below ``tol`` (never observed for sane
        tolerances; guards against NaNs from pathological specs).
    """
    if spec.leads:
        raise GraphSpecError("secular_spectrum expects a closed graph; drop the leads")
    if not (0 < k_min < k_max):
        raise GraphSpecError("need 0 < k_min < k_max")
    lengths = np.array([b.length for b in spec.bonds])
    step = (math.pi / lengths.sum()) / points_per_spacing
    guard = 1e-6

    poles = []
    for length in lengths:
        m0 = int(np.floor(k_min * length / math.pi)) + 1
        m1 = int(np.floor(k_max * length / math.pi))
        if m1 >= m0:
            poles.append(np.arange(m0, m1 + 1) * math.pi / length)
    poles = np.sort(np.concatenate(poles)) if poles else np.empty(0)
    edges = np.concatenate([[k_min], poles, [k_max]])

    panels = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        lo, hi = lo + guard, hi - guard
        if hi <= lo:
            continue  # panel narrower than the pole guard: skipped
        n_pts = max(2, int(np.ceil((hi - lo) / step)) + 1)
        panels.append(np.linspace(lo, hi, n_pts))
    if not panels:
        raise GraphSpecError("scan window contains no pole-free panel")
    grid = np.unique(np.concatenate(panels))

    lam = np.linalg.eigvalsh(_h_batch(spec, grid))
    panel_id = np.searchsorted(poles, grid)
    positive = lam > 0
    same_panel = panel_id[1:] == panel_id[:-1]
    flips = (positive[1:] != positive[:-1]) & same_panel[:, None]
    idx, branch = np.nonzero(flips)

    lo = grid[idx].copy()
    hi = grid[idx + 1].copy()
    f_lo = lam[idx, branch].copy()
    for _ in range(64):
        if lo.size == 0 or np.max(hi - lo) < tol:
            break
        mid = 0.5 * (lo + hi)
        f_mid = np.linalg.eigvalsh(_h_batch(spec, mid))[np.arange(mid.size), branch]
        same_side = (f_mid > 0) == (f_lo > 0)
        lo = np.where(same_side, mid, lo)
        f_lo = np.where(same_side, f_mid, f_lo)
        hi = np.where(same_side, hi, mid)
    else:
        raise NumericalFailure(
            f"bisection stalled: max bracket {np.max(hi - lo):.3e} > tol {tol:.3e}"
        )
    roots = np.sort(0.5 * (lo + hi))

    collapsed = None
    max_split = 0.0
    if spec.symmetry == "gse-paired":
        if roots.size % 2:
            raise NumericalFailure(
                f"paired graph returned an odd root count ({roots.size}); "
                "a doublet partner was missed — increase points_per_spacing"
            )
        first, second = roots[::2], roots[1::2]
        collapsed = 0.5 * (first + second)
        max_split = float(np.max(second - first)) if first.size else 0.0
    return GraphSpectrum(
        k_raw=roots,
        k_collapsed=collapsed,
        max_splitting=max_split,
        total_length=spec.total_length,
        symmetry=spec.symmetry,
        k_window=(k_min, k_max),
        n_scan_points=int(grid.size),
    )


def weyl_unfold(
    frequencies_ghz: np.ndarray,
    total_optical_length: float,
    collapsed: bool = False,
) -> np.ndarray:
    """Unfold resonance frequencies with the smooth (Weyl) counting law.

    ``e = 2 L nu / c`` with the frequency in Hz and the optical length in
    meters.  For a spectrum reduced to one partner per Kramers doublet,
    pass ``collapsed=True``: only half the optical length then contributes
    per retained level.
    """
    nu = np.asarray(frequencies_ghz, dtype=float) * 1e9
    if nu.ndim != 1 or np.any(np.diff(nu) < 0) or np.any(nu < 0):
        raise ValueError("frequencies must be an ascending, non-negative 1-d array")
    if not total_optical_length > 0:
        raise ValueError("total optical length must be positive")
    eff = total_optical_length * (0.5 if collapsed else 1.0)
    return 2.0 * eff * nu / SPEED_OF_LIGHT


# ---------------------------------------------------------------------------
# open graphs
# ---------------------------------------------------------------------------


def graph_smatrix(
    spec: GraphSpec,
    k: float | np.ndarray,
    eta: float | None = None,
) -> np.ndarray:
    """Lead-to-lead scattering matrix of an open graph.

    Parameters
    ----------
    spec : GraphSpec
        Graph with at least one lead.
    k : float or array
        Real wavenumber(s) in rad/m; an array gives a stacked result of
        shape ``(n_k, M, M)`` for ``M`` leads.
    eta : float, optional
        Absorption override; defaults to ``spec.eta``.  The wavenumber is
        continued to ``k (1 + i eta)``, making ``S`` sub-unitary.

    Raises
    ------
    GraphSpecError
        No leads attached.
    NumericalFailure
        Singular linear solve (reports the wavenumber).
    """
    if not spec.leads:
        raise GraphSpecError("graph_smatrix needs at least one lead")
    if eta is None:
        eta = spec.eta
    scalar = np.isscalar(k)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    kc = k * (1.0 + 1j * eta) if eta else k
    h = _h_batch(spec, kc)
    n_leads = len(spec.leads)
    w = np.zeros((spec.n_vertices, n_leads))
    for col, vtx in enumerate(spec.leads):
        w[vtx, col] = 1.0
    try:
        g = np.linalg.solve(
            h + 1j * (w @ w.T)[None],
            np.broadcast_to(w, (k.shape[0], spec.n_vertices, n_leads)),
        )
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"singular lead-coupled solve near k={k}") from exc
    s = 2j * np.einsum("vc,bvd->bcd", w, g) - np.eye(n_leads)[None]
    return s[0] if scalar else s


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def paired_graph(
    sub_bonds: list[Bond] | tuple[Bond, ...],
    n_sub_vertices: int,
    connector: tuple[int, int, float],
    leads: tuple[int, ...] = (),
    eta: float = 0.0,
) -> GraphSpec:
    """Mirror a subgraph into its symplectic pair.

    Every bond ``(i, j, L, a, phi)`` of the subgraph gets a partner
    ``(i+V, j+V, L, -a, phi)``; the two halves are joined by two bonds of
    the connector length between ``(i0, j0+V)`` and ``(j0, i0+V)``, the
    first carrying the extra phase pi.  The result satisfies the pairing
    invariants by construction.

    Parameters
    ----------
    sub_bonds : list of Bond
        Bonds of the first subgraph (vertices ``0..V-1``).
    n_sub_vertices : int
        ``V``, vertex count of one subgraph.
    connector : (i0, j0, length)
        Distinct subgraph vertices to join across, and the bond length.
    leads, eta
        Passed through to the resulting spec.
    """
    i0, j0, conn_len = connector
    if i0 == j0:
        raise GraphSpecError("connector endpoints must be distinct vertices")
    bonds = []
    for b in sub_bonds:
        bonds.append(b)
        bonds.append(
            Bond(
                b.i + n_sub_vertices,
                b.j + n_sub_vertices,
                b.length,
                -b.a_phase,
                b.extra_phase,
            )
        )
    bonds.append(Bond(i0, j0 + n_sub_vertices, conn_len, 0.0, math.pi))
    bonds.append(Bond(j0, i0 + n_sub_vertices, conn_len, 0.0, 0.0))
    return GraphSpec(
        n_vertices=2 * n_sub_vertices,
        bonds=tuple(bonds),
        leads=leads,
        symmetry="gse-paired",
        eta=eta,
    )


def _k4_bonds(scale: float, a_magnitude: float) -> list[Bond]:
    """Fully connected 4-vertex subgraph with incommensurate lengths."""
    primes = (2, 3, 5, 7, 11, 13)
    pairs = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    return [
        Bond(i, j, scale * math.sqrt(p), a_magnitude, 0.0)
        for (i, j), p in zip(pairs, primes)
    ]


def example_gse_paired(
    total_length: float = 7.09,
    leads: tuple[int, ...] = (),
    eta: float = 0.0,
) -> GraphSpec:
    """Shipped reference graph: two mirrored fully-connected quartets.

    Intra-subgraph lengths are proportional to the square roots of the
    first six primes, the connectors to ``sqrt(17)``, everything scaled to
    the requested total optical length (the 7.09 m default matches the
    scale of the microwave networks this models).  All intra bonds carry
    directed phase ``pi/2``.  Leads at a vertex and its mirror partner
    (e.g. ``(2, 6)``) expose the cross-transmission suppression.
    """
    primes_sum = sum(math.sqrt(p) for p in (2, 3, 5, 7, 11, 13))
    conn_unit = math.sqrt(17.0)
    scale = total_length / (2.0 * primes_sum + 2.0 * conn_unit)
    return paired_graph(
        _k4_bonds(scale, math.pi / 2.0),
        4,
        connector=(0, 1, scale * conn_unit),
        leads=leads,
        eta=eta,
    )


def example_gue_subgraph(
    total_length: float = 3.5,
    leads: tuple[int, ...] = (),
    eta: float = 0.0,
) -> GraphSpec:
    """A single fully-connected quartet with time reversal broken.

    The directed ``pi/2`` bond phases suppress time-reversal symmetry
    without the mirror copy, so the level statistics follow the unitary
    class; useful as the reference partner of :func:`example_gse_paired`.
    """
    primes_sum = sum(math.sqrt(p) for p in (2, 3, 5, 7, 11, 13))
    scale = total_length / primes_sum
    return GraphSpec(
        n_vertices=4,
        bonds=tuple(_k4_bonds(scale, math.pi / 2.0)),
        leads=leads,
        symmetry="free",
        eta=eta,
    )


# ---------------------------------------------------------------------------
# plain-text spec files
# ---------------------------------------------------------------------------

_SPEC_DOC = """\
# graph spec: '#' comments; blank lines ignored
# vertices <count>
# symmetry free | gse-paired
# eta <float>
# bond <i> <j> <length_m> [a_phase_rad] [extra_phase_rad]
# lead <vertex>
"""


def dump_graph_spec(spec: GraphSpec, path) -> None:
    """Write a graph description in the plain-text format of :func:`load_graph_spec`."""
    lines = [_SPEC_DOC]
    lines.append(f"vertices {spec.n_vertices}")
    lines.append(f"symmetry {spec.symmetry}")
    lines.append(f"eta {spec.eta!r}")
    for b in spec.bonds:
        lines.append(
            f"bond {b.i} {b.j} {b.length!r} {b.a_phase!r} {b.extra_phase!r}"
        )
    for v in spec.leads:
        lines.append(f"lead {v}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_graph_spec(path) -> GraphSpec:
    """Parse the plain-text graph format.

    Directives (one per line, ``#`` starts a comment)::

        vertices 8
        symmetry gse-paired
        eta 0.0
        bond 0 1 0.83 1.5707963267948966 0.0
        lead 2

    ``bond`` takes ``i j length [a_phase [extra_phase]]``; missing phases
    default to zero.  Structural problems raise :class:`GraphSpecError`
    with the offending line number.
    """
    n_vertices = None
    symmetry = "free"
    eta = 0.0
    bonds: list[Bond] = []
    leads: list[int] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = re.split(r"\s+", line)
            word, args = fields[0].lower(), fields[1:]
            try:
                if word == "vertices":
                    n_vertices = int(args[0])
                elif word == "symmetry":
                    symmetry = args[0].lower()
                elif word == "eta":
                    eta = float(args[0])
                elif word == "bond":
                    if not 3 <= len(args) <= 5:
                        raise GraphSpecError("bond takes 3 to 5 fields")
                    phases = [float(a) for a in args[3:]] + [0.0, 0.0]
                    bonds.append(
                        Bond(int(args[0]), int(args[1]), float(args[2]),
                             phases[0], phases[1])
                    )
                elif word == "lead":
                    leads.append(int(args[0]))
                else:
                    raise GraphSpecError(f"unknown directive {word!r}")
            except (IndexError, ValueError) as exc:
                if isinstance(exc, GraphSpecError):
                    raise GraphSpecError(f"{path}:{lineno}: {exc}") from None
                raise GraphSpecError(f"{path}:{lineno}: malformed line {line!r}") from exc
    if n_vertices is None:
        raise GraphSpecError(f"{path}: missing 'vertices' directive")
    try:
        return GraphSpec(
            n_vertices=n_vertices,
            bonds=tuple(bonds),
            leads=tuple(leads),
            symmetry=symmetry,
            eta=eta,
        )
    except GraphSpecError as exc:
        raise GraphSpecError(f"{path}: {exc}") from None

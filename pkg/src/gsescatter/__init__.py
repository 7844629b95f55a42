"""Chaotic scattering in the symplectic symmetry class.

A simulation and analysis library for wave-chaotic systems whose dynamics
fall in the Gaussian symplectic ensemble (GSE) universality class:

- :mod:`gsescatter.ensembles` -- quaternion-real Hermitian random matrices
  (GSE), unitary-class references (GUE), Kramers-doublet spectra and
  semicircle unfolding.
- :mod:`gsescatter.graphs` -- metric (quantum) graphs with vector-potential
  phases, the paired construction that emulates symplectic symmetry,
  secular spectra and lead scattering matrices.
- :mod:`gsescatter.heidelberg` -- resonance scattering from random-matrix
  Hamiltonians with tunable channel transmissions and absorption modelled
  by weakly coupled fictitious channels.
- :mod:`gsescatter.absorption` -- closed-form distributions of reflection
  and reaction-matrix (K-matrix) variables at finite absorption, their
  strong-absorption limits, and absorption-strength fitting.
- :mod:`gsescatter.spectral` -- spacing histograms, number variance,
  missing-level thinning, Wigner surmises and Kolmogorov-Smirnov distances.
- :mod:`gsescatter.cli` -- reproducible command-line experiments with
  manifest/checksum output.
"""

from gsescatter.ensembles import (
    QuaternionHermitian,
    SpectrumSample,
    eigen_kramers,
    rng_stream,
    sample_gse,
    sample_gue,
    semicircle_radius,
    symplectic_check,
    unfold_semicircle,
)
from gsescatter.spectral import (
    Histogram,
    StatCurve,
    ks_distance,
    nnsd,
    number_variance,
    thin_spectrum,
    wigner_surmise,
)
from gsescatter.absorption import (
    AbsorptionParams,
    DistributionCurve,
    FitResult,
    default_grid,
    distribution_curve,
    ericson_density,
    fit_gamma,
    mean_amplitude,
    mean_reflection,
    p0_x,
    p_amplitude,
    p_im_k,
    p_re_k,
    p_reflection,
    sample_reflection,
    shi,
)
from gsescatter.graphs import (
    Bond,
    GraphSpec,
    GraphSpecError,
    GraphSpectrum,
    example_gse_paired,
    example_gue_subgraph,
    graph_smatrix,
    h_matrix,
    load_graph_spec,
    dump_graph_spec,
    paired_graph,
    secular_spectrum,
    weyl_unfold,
)
from gsescatter.heidelberg import (
    CalibrationError,
    CalibrationResult,
    CouplingSpec,
    NumericalFailure,
    RunConfig,
    ScatteringEnsemble,
    autocorrelation,
    build_coupling,
    calibrate_tau_abs,
    heidelberg_smatrix,
    inverse_transmission,
    k_matrix,
    k_matrix_variables,
    parse_run_config,
    run_ensemble,
    transmission,
)

__version__ = "0.1.0"

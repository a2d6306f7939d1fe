"""Eigenvalue densities for sums of matrices on fixed-spectrum orbits (Horn's problem).

Analytic densities for Hermitian n = 2, 3, 4, real skew-symmetric n = 2, 3, 4
and real symmetric n = 2, checked against a Haar Monte-Carlo sampler, the Horn
inequalities and exact normalization constants.
"""
from .analytic import (
    Atoms,
    DensityValue,
    KernelValue,
    enhancement_lines_n3,
    hc_orthogonal,
    hciz_unitary,
    j_kernel,
    pdf_hermitian,
    pdf_skew,
    pdf_symmetric_n2,
)
from .core_types import (
    ConditioningWarning,
    DegenerateSpectrumError,
    Ensemble,
    EnsembleKind,
    HornError,
    QuadratureError,
    SkewGroup,
    SkewSpectrum,
    Spectrum,
    UnsupportedCaseError,
    appendix_a_constants,
    j_normalization,
    prefactor_hermitian,
    vandermonde,
    vandermonde_O,
)
from .experiment import (
    ComparisonReport,
    GridSpec,
    HistogramGrid,
    QuadratureSpec,
    compare,
    normalization_check,
    run_mc,
)
from .sampling import (
    RngStream,
    haar_orthogonal,
    haar_unitary,
    hermitian_eigenvalues,
    sample_gamma,
    skew_canonical_form,
)
from .support import (
    PolygonN3,
    SupportVerdict,
    check_horn_n2,
    check_horn_n3,
    check_horn_n4,
    polygon_n3,
    xi_interval,
)

__version__ = "0.1.0"

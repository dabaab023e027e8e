"""Tweedie-type family with characteristic function exp{a [1 - (1 - i t c) ** gamma]}:
regimes and validity, tilting, chf identities, Fourier inversion, sampling and
maximum-likelihood fitting."""

from .chf import (
    GridSpec,
    ProbeReport,
    SubordinationSpec,
    balance_residual,
    bochner_check,
    chf,
    chf_geometric,
    chf_tilted,
    log_chf,
    magnitude_check,
    member_chf,
    mixture_residual,
    probe,
    stability_residual,
    tilt_residual,
)
from .errors import GenstabError, InputError, NumericalError
from .family import (
    CaseTag,
    FamilyParams,
    GeometricView,
    TiltedView,
    ValidityReport,
    cgf,
    classify,
    cumulant,
    geometric,
    theta_domain,
    tilt,
    tweedie_power,
    validate,
)
from .fit import FitResult, ingest, mle_fit, mom_init, profile_gamma
from .inversion import DensityTable, cdf_at, cdf_grid, density_table, pdf_at, pdf_grid, quantile
from .sampler import SampleBatch, empirical_chf, ks_statistic, sample, sample_geometric

__version__ = "0.1.0"

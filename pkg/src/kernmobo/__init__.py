"""Exact fingerprint-kernel Gaussian processes and multi-objective Bayesian optimization.

Sparse count fingerprints stay at full 64-bit key width, GP regression uses
the MinMax or Tanimoto kernel with an exact Cholesky solve, and the
multi-objective loop scores a fixed candidate pool by Monte Carlo expected
hypervolume improvement.
"""

__version__ = "0.1.0"

from kernmobo.acquisition import (
    AcquisitionConfig,
    AcquisitionKind,
    ehvi_mc,
    ehvi_mc_batch,
    expected_improvement,
    geometric_mean,
    select_candidate,
    ucb,
)
from kernmobo.bo import (
    BORunConfig,
    BORunResult,
    CandidatePool,
    CompositeOracle,
    IterationRecord,
    Oracle,
    csv_oracle,
    run_gp_mobo,
    run_random_baseline,
    run_scalarized_sobo,
    similarity_oracle,
)
from kernmobo.fingerprint import (
    FingerprintConfig,
    MorganCountFingerprinter,
    SparseFingerprint,
    fold,
    morgan_count_fingerprint,
    smiles_fingerprint,
    to_binary,
)
from kernmobo.gp import (
    GPHyperparams,
    MultiObjectiveTanimotoGP,
    TanimotoGPRegressor,
    fit,
    mo_fit,
    mo_predict,
    nlml,
    nlpd,
    predict,
)
from kernmobo.kernels import KernelKind, gram_matrix, minmax, tanimoto
from kernmobo.pareto import (
    ImprovementBoxes,
    ParetoFront,
    ReferencePointConfig,
    hv_hso,
    hv_ie_oracle,
    hv_mc_oracle,
    hv_sweep,
    hvi,
    hypervolume,
    infer_reference_point,
    pareto_filter,
)
from kernmobo.smiles import MolGraph, parse_smiles

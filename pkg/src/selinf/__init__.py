"""Exact tests for selective influences on finite input-output experiments.

Given per-treatment joint distributions, decide whether a single jointly
distributed family of hidden responses (one per input value) can reproduce
them: the exact linear feasibility test, plus the cheaper necessary
conditions (marginal selectivity, Bell-CHSH-Fine inequalities, order-distance
chain tests, cosphericity).
"""

from .cosphericity import (
    CorrelationQuad,
    CosphericityResult,
    correlations_from_dataset,
    cosphericity_test,
)
from .distances import (
    AxiomReport,
    ChainRecord,
    ChainReport,
    FineInequality,
    FineReport,
    InputPointSequence,
    OrderRelation,
    canonical_tetrad,
    chain_test,
    check_pq_metric_axioms,
    enumerate_irreducible_sequences,
    enumerate_tetradic_sequences,
    fine_inequalities,
    order_distance,
    preset_order,
    random_order,
)
from .errors import DatasetParseError, MarginalSelectivityError, SizeGuardError
from .experiment import (
    Dataset,
    ExperimentDesign,
    Input,
    MarginalReport,
    MarginalViolation,
    Output,
    ValidationBreach,
    ValidationReport,
    check_marginal_selectivity,
    make_design,
    marginal,
    transform_outputs,
    validate_dataset,
)
from .generators import (
    AngleSpec,
    gen_classical,
    gen_double_detection,
    gen_ghz,
    gen_prbox,
    gen_singlet,
    parse_angle,
)
from .io import dataset_from_json_dict, dataset_to_json_dict, dump_dataset, load_dataset
from .lft import (
    JdcMatrix,
    LftVerdict,
    PVector,
    QVector,
    Si2Model,
    build_jdc_matrix,
    build_p_vector,
    construct_si2,
    restrict_design,
    run_lft,
)
from .rational_lp import (
    FeasibilityResult,
    SparseMatrix,
    solve_equality_feasibility,
    verify_certificate,
)

__version__ = "0.1.0"

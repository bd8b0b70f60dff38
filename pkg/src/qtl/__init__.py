"""Numerical laboratory for transfer learning with quantum embeddings.

Implements classical-to-quantum embedding circuits, exact Helstrom
classification of embedded tasks, task-dissimilarity measures, Renyi-2
mutual information, Rademacher complexity estimation, and the
excess-risk bounds they assemble into, plus a replicated experiment
harness with a CSV/SVG reporting CLI.
"""

from .classifier import (
    Povm,
    empirical_risk,
    expected_risk,
    generalization_error,
    helstrom,
    loss,
    min_expected_risk,
    train_povm,
)
from .complexity import (
    RademacherEstimate,
    one_time_encoding_cap,
    rademacher_cap_dim,
    rademacher_cap_mi,
    rademacher_joint,
    rademacher_povm,
    renyi2_mi,
)
from .config import ExperimentConfig, load_config, parse_config
from .divergence import TaskPair, check_dissimilarity, dst_trace, dst_tv, task_distance
from .embedding import (
    EmbeddingAnsatz,
    TableEmbedding,
    ThetaGrid,
    ThetaVector,
    embed,
    make_theta_grid,
    rot_gate,
    rx_gate,
    single_qubit_rx_rot_rx,
)
from .pipeline import (
    BoundConfig,
    RiskReport,
    TrainedModel,
    bound_no_transfer,
    bound_transfer,
    no_transfer_excess_risk,
    pretrain_theta,
    replicate,
    shift_sweep,
    transfer_excess_risk,
    transfer_learn,
)
from .qmath import (
    DensityMatrix,
    Spectrum,
    hermitian_eig,
    positive_part_trace,
    psd_sqrt,
    trace_distance,
    trace_norm,
)
from .tasks import (
    Dataset,
    DiscreteTask,
    GaussianTaskSpec,
    class_average_density,
    empirical_class_density,
    quantize_gaussian_pair,
    quantize_gaussian_task,
    sample_dataset,
    tv_distance,
)

__version__ = "0.1.0"

from .distributions import (
    TRAINING_FAMILIES,
    DistributionSpec,
    Family,
    parse_family,
    random_spec,
    sample_design,
    validate_params,
)
from .generator import (
    CorpusEntry,
    CorpusSampler,
    SyntheticSystem,
    SystemConfig,
    case_control_response,
    compute_noise_std,
    draw_sparse_beta,
    generate_corpus,
    generate_system,
    plan_corpus,
)
from .manifest import dump_system_csv, read_manifest, write_manifest

__all__ = [
    'TRAINING_FAMILIES', 'DistributionSpec', 'Family', 'parse_family', 'random_spec',
    'sample_design', 'validate_params',
    'CorpusEntry', 'CorpusSampler', 'SyntheticSystem', 'SystemConfig', 'case_control_response',
    'compute_noise_std', 'draw_sparse_beta', 'generate_corpus', 'generate_system', 'plan_corpus',
    'dump_system_csv', 'read_manifest', 'write_manifest',
]

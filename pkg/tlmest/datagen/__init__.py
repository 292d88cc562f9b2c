"""Seeded simulation designs for transfer studies."""

from .config import CoeffFamily, Design, ScenarioConfig
from .ensembles import gen_goe, goe_matrix, haar_columns, matrix_normal, unit_vector
from .scenarios import (
    GeneratedStudy,
    almost_homogeneous_gap,
    gen_linear_scenario,
    gen_trace_scenario,
    generate,
    population_pooled_linear,
)
from .seeding import replication_seed, substream
from .storage import (
    load_datasets,
    load_study,
    read_csv_dataset,
    read_tlmx,
    save_study,
    write_csv_dataset,
    write_tlmx,
)

__all__ = [
    "CoeffFamily",
    "Design",
    "GeneratedStudy",
    "ScenarioConfig",
    "almost_homogeneous_gap",
    "gen_goe",
    "gen_linear_scenario",
    "gen_trace_scenario",
    "generate",
    "goe_matrix",
    "haar_columns",
    "load_datasets",
    "load_study",
    "matrix_normal",
    "population_pooled_linear",
    "read_csv_dataset",
    "read_tlmx",
    "replication_seed",
    "save_study",
    "unit_vector",
    "write_csv_dataset",
    "write_tlmx",
    "substream",
]

"""Random high-dimensional expanders from pruned labelings and covers."""

from .complexes import (
    PureComplex,
    build_complex,
    check_suitable,
    complete_complex,
    tensor_with_complete,
)
from .graphs import WGraph
from .spectral import (
    adjacency_spectrum,
    bipartite_lambda,
    coloring_measure,
    composition_check,
    converse_eml_bound,
    eml_discrepancy,
    is_hdx,
    lambda_report,
)
from .groups import (
    GroupTable,
    cayley_clique_complex,
    cyclic,
    dihedral,
    link_of_identity,
    make_group,
    product_group,
    quotient_group,
    scan_gensets,
    subgroup_closure,
    symmetric_group,
    validate_genset,
)
from .covers import (
    build_cover,
    cover_components,
    holonomy_subgroup,
    is_cocycle,
    push_cocycle,
    verify_cover,
)
from .pruning import (
    PruneConfig,
    Pruner,
    dependency_scope,
    eval_event,
    f_pruning,
    is_satisfied,
    measure_ratio_audit,
    moser_tardos_prune,
    pruned_measure,
    sample_labeling,
    satisfaction_graph,
)
from .combine import (
    CombineConfig,
    c_pruning,
    c_satisfied,
    eval_event_combine,
    moser_tardos_combine,
    verify_combine,
)
from .sparsify import bipartite_vertex_split, edge_subsample, sparsify_trial
from .harness import emit_report, run_experiment

__version__ = "0.1.0"

"""Perfect K_{s,t}-tilings of balanced bipartite graphs: extremal-case tiler,
exact oracle, generators and structural validators."""

from .bigraph import (
    U,
    V,
    BipartiteGraph,
    GraphError,
    InvalidQuery,
    VertexSet,
    build_graph,
    degree_stats,
    density,
    edges_between,
    max_deg_into,
    min_deg_into,
    read_graph,
    write_graph,
)
from .copies import KstCopy, Tiling, size_split, split_kstst, verify_tiling
from .errors import KstError, NotFoundError, PreconditionError, ShortfallError, TilingError
from .gen import (
    gen_complete,
    gen_counterexample,
    gen_extremal_instance,
    gen_pmp,
    gen_swap_gadget,
    is_k22_free,
    sidon_set,
)
from .oracle import (
    all_tilings,
    brute_force_tileable,
    classify_crossing,
    enumerate_kst,
    exact_tile,
    reduce_type2_pairs,
    touching_sets,
)
from .partition import (
    PartitionLabels,
    TilingParameters,
    check_extremal,
    derive_partition,
    diagonal_density_check,
    edge_minimalize,
    exceptional_degree_check,
    validate_bounds,
)
from .stars import Star, StarSet, balanced_star_sets, extract_disjoint_stars, star_bounds, tilde_stars
from .tiler import find_special_kst, plan_split, tile_extremal, tile_near_complete

__version__ = "0.1.0"

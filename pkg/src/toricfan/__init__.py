"""Exact-arithmetic toolkit for complete simplicial fans over a lattice.

Primitive collections and relations, equivariant blow-ups/downs and flops,
reflexive polytopes with polar duality and crepant resolutions, and
isomorphism-free enumeration of nonsingular toric Fano varieties.
"""

from .fan import Fan, product_fan, projective_space_fan
from .polytope import (
    LatticePolytope,
    ReflexivityCertificate,
    convex_hull,
    crepant_resolution,
    face_fan,
    fano_polytope_of,
    gorenstein_class_of,
    is_reflexive,
    polar_dual,
    unimodularly_equivalent,
)
from .primitive import (
    PrimitiveRelation,
    is_extremal,
    is_fano,
    is_pseudo_symmetric,
    is_splitting_fan,
    is_weak_fano,
    mori_extreme_rays,
    one_cycle_r,
    one_cycle_v,
    primitive_collections,
    primitive_relation,
    primitive_relations,
)
from .surgery import (
    blow_down,
    blow_down_candidates,
    blow_up,
    flop,
    predict_blowdown_fano,
    predict_pc_after,
    predict_pc_after_blowdown,
    star_subdivide,
)
from .classify import (
    EquivalenceGraph,
    IsoKey,
    TableMatch,
    are_isomorphic,
    canonical_key,
    del_pezzo_fan,
    f_closure,
    fano_seeds,
    load_graph,
    match_table_labels,
    named_fano_4folds,
    pseudo_del_pezzo_fan,
    pseudo_symmetric_catalog,
    spot_check_table1,
    table1_rows,
    verify_table1_edges,
)

__version__ = "0.1.0"

__all__ = [
    "Fan",
    "LatticePolytope",
    "PrimitiveRelation",
    "ReflexivityCertificate",
    "EquivalenceGraph",
    "IsoKey",
    "TableMatch",
    "are_isomorphic",
    "blow_down",
    "blow_down_candidates",
    "blow_up",
    "canonical_key",
    "convex_hull",
    "crepant_resolution",
    "del_pezzo_fan",
    "f_closure",
    "face_fan",
    "fano_polytope_of",
    "fano_seeds",
    "flop",
    "gorenstein_class_of",
    "is_extremal",
    "is_fano",
    "is_pseudo_symmetric",
    "is_reflexive",
    "is_splitting_fan",
    "is_weak_fano",
    "load_graph",
    "match_table_labels",
    "mori_extreme_rays",
    "named_fano_4folds",
    "one_cycle_r",
    "one_cycle_v",
    "polar_dual",
    "predict_blowdown_fano",
    "predict_pc_after",
    "predict_pc_after_blowdown",
    "primitive_collections",
    "primitive_relation",
    "primitive_relations",
    "product_fan",
    "projective_space_fan",
    "pseudo_del_pezzo_fan",
    "pseudo_symmetric_catalog",
    "spot_check_table1",
    "star_subdivide",
    "table1_rows",
    "unimodularly_equivalent",
    "verify_table1_edges",
]

"""Finite groups, subgroups, quotients and cocycle extensions."""

from .core import (
    TABLE_LIMIT,
    CyclicGroup,
    ElementaryAbelian,
    EmbeddedSubgroup,
    Extension,
    FiniteGroup,
    QuotientGroup,
    TableGroup,
    check_table,
    is_prime,
    make_cyclic,
)
from .extensions import (
    ActionHom,
    Cocycle,
    CocycleCheck,
    ExtensionData,
    cocycle_extension,
    extension_isomorphism,
    extract_cocycle,
    make_group_algebra,
    orbit_closure,
    semidirect_product,
    trivial_action,
    verify_cocycle,
)
from .io import dumps_table, loads_table, read_table, write_table
from .subgroups import (
    QuotientMap,
    SubgroupHandle,
    center,
    check_p_series,
    commutator_of,
    commutator_subgroup,
    element_order,
    lower_p_series,
    normal_closure,
    quotient_by_normal,
    quotient_map_from_projection,
    subgroup_generated,
    trivial_subgroup,
    whole_group,
)

__all__ = [
    "dumps_table",
    "loads_table",
    "read_table",
    "write_table",
    "ActionHom",
    "center",
    "check_p_series",
    "check_table",
    "Cocycle",
    "cocycle_extension",
    "CocycleCheck",
    "commutator_of",
    "commutator_subgroup",
    "CyclicGroup",
    "element_order",
    "ElementaryAbelian",
    "EmbeddedSubgroup",
    "Extension",
    "extension_isomorphism",
    "ExtensionData",
    "extract_cocycle",
    "FiniteGroup",
    "is_prime",
    "lower_p_series",
    "make_cyclic",
    "make_group_algebra",
    "normal_closure",
    "orbit_closure",
    "quotient_by_normal",
    "quotient_map_from_projection",
    "QuotientGroup",
    "QuotientMap",
    "semidirect_product",
    "subgroup_generated",
    "SubgroupHandle",
    "TABLE_LIMIT",
    "TableGroup",
    "trivial_action",
    "trivial_subgroup",
    "verify_cocycle",
    "whole_group",
]

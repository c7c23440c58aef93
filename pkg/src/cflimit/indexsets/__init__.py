from .base import (
    Block,
    EnumerationBudgetError,
    IndexSet,
    UnsupportedSetError,
    finite,
    full,
    make_geometric,
    make_i0,
    parse_set,
    read_alphabet_file,
    write_alphabet_file,
)
from .regularity import (
    CRITERIA,
    CheckResult,
    RegularityReport,
    check_c1,
    check_c2_gap,
    check_c3_tail,
    check_lower_b,
    check_upper_b,
    regularity_report,
)

_LAZY = {
    "AuditLog", "ConstructionError", "build_R", "build_I_delta", "build_liouville_set",
    "check_stage_inequalities", "choose_n1_scale",
}

__all__ = [
    "Block", "EnumerationBudgetError", "IndexSet", "UnsupportedSetError", "finite", "full",
    "make_geometric", "make_i0", "parse_set", "read_alphabet_file", "write_alphabet_file",
    "CRITERIA", "CheckResult", "RegularityReport", "check_c1", "check_c2_gap", "check_c3_tail",
    "check_lower_b", "check_upper_b", "regularity_report", *sorted(_LAZY),
]


def __getattr__(name):
    # constructions depend on the pressure module, which itself imports this package
    if name in _LAZY:
        from . import constructions
        return getattr(constructions, name)
    raise AttributeError(name)

"""Dynamic information-flow-control monitor for a small imperative
language, with pluggable assignment strategies over finite security
lattices and an executable noninterference test harness."""

from .labels import Label, Prod, Pure, Star, format_label, is_pure, label_join, parse_label, pure_bound
from .lang import parse_program, print_program
from .lattice import LatticeSpec, builtin, parse_lattice
from .monitor import (
    LabeledValue,
    MonitorConfig,
    Outcome,
    STRATEGIES,
    assign_label,
    branch_guard,
    eval_expr,
    exec_program,
    format_store,
    parse_store,
)
from .nicheck import check_tini, gen_equiv_store_pairs, store_equiv, value_equiv

__all__ = [
    "Label",
    "LabeledValue",
    "LatticeSpec",
    "MonitorConfig",
    "Outcome",
    "Prod",
    "Pure",
    "STRATEGIES",
    "Star",
    "assign_label",
    "branch_guard",
    "builtin",
    "check_tini",
    "eval_expr",
    "exec_program",
    "format_label",
    "format_store",
    "gen_equiv_store_pairs",
    "is_pure",
    "label_join",
    "parse_label",
    "parse_lattice",
    "parse_program",
    "parse_store",
    "print_program",
    "pure_bound",
    "store_equiv",
    "value_equiv",
]

__version__ = "0.1.0"

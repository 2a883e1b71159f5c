from .ast import (Add, Atom, AtomDef, Const, Expr, Inv, Mul, SeqProb, Sub,
                  TransVar, contains_division, count_atoms, eval_pse,
                  expand_transition_vars, expression_size, is_pse, leaves,
                  max_arity, pretty_print)
from .labeled import (LAdd, LConst, LExpr, LInv, LMul, LSub, LVar,
                      assign_labels, erase_labels, is_division_free,
                      labeled_vars)
from .normal_form import (DivisionDecomposition, Monomial, PolynomialForm,
                          decompose_division, polynomial_to_expression,
                          to_polynomial)
from .parser import SpecDocument, parse, parse_spec_file
from .ranges import SlotLayout, assign_slots, bse_range, expr_range

__all__ = [
    "Add", "Atom", "AtomDef", "Const", "Expr", "Inv", "Mul", "SeqProb",
    "Sub", "TransVar", "contains_division", "count_atoms", "eval_pse",
    "expand_transition_vars", "expression_size", "is_pse", "leaves",
    "max_arity", "pretty_print",
    "LAdd", "LConst", "LExpr", "LInv", "LMul", "LSub", "LVar",
    "assign_labels", "erase_labels", "is_division_free", "labeled_vars",
    "DivisionDecomposition", "Monomial", "PolynomialForm",
    "decompose_division", "polynomial_to_expression", "to_polynomial",
    "SpecDocument", "parse", "parse_spec_file",
    "SlotLayout", "assign_slots", "bse_range", "expr_range",
]

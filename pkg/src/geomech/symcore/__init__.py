"""Exact symbolic expressions over jet and phase coordinates."""
from .calculus import gradient, partial, substitute, total_derivative, total_derivative_n
from .coords import CoordSystem, JetOrderError, jet_name
from .evaluate import EvaluationError, UnboundSymbolError, evaluate
from .expr import ONE, ZERO, Expr, const, cos, exp, log, sin, sqrt, sym, symbols
from .parser import ParseError, parse
from .zero import Verdict, ZeroTest, all_zero, combine, is_zero, set_default_seed, zero_test

__all__ = [
    "CoordSystem", "EvaluationError", "Expr", "JetOrderError", "ONE", "ParseError",
    "UnboundSymbolError", "Verdict", "ZERO", "ZeroTest", "all_zero", "combine", "const", "cos",
    "evaluate", "exp", "gradient", "is_zero", "jet_name", "log", "parse", "partial",
    "set_default_seed", "sin", "sqrt", "substitute", "sym", "symbols", "total_derivative",
    "total_derivative_n", "zero_test",
]

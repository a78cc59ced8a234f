"""Deciding, proving, and explaining (in)equivalence of context-free grammars."""

from .engine import Verdict, classify, explain, make_exercise_context
from .grammar import Grammar, parse_grammar, render_grammar

__version__ = "0.1.0"

__all__ = [
    "Grammar",
    "Verdict",
    "classify",
    "explain",
    "make_exercise_context",
    "parse_grammar",
    "render_grammar",
    "__version__",
]

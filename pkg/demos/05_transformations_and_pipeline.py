"""The pattern-based transformation language and the normalization pipeline.

Run: python demos/05_transformations_and_pipeline.py
"""

from cfgeq.budget import Budget
from cfgeq.grammar import parse_grammar, render_grammar
from cfgeq.transform import (
    apply_builtin,
    apply_transformation,
    default_registry,
    normalization_pipeline,
    run_pipeline,
)

registry = default_registry()

# A pattern transformation rewrites matched productions; matching must cover
# every production of a touched non-terminal ("exhaustiveness").
rho = registry.patterns["RightStarLoopToDoubling"]   # X -> sigma X | eps  ~>  X -> XX | sigma | eps
g = parse_grammar("S -> b A | a B ; A -> a A | eps ; B -> b B | eps")
print("one transformation, one match per a*-loop:")
for out in apply_transformation(rho, g):
    print("  ", render_grammar(out).replace("\n", " ; "))

# Exhaustiveness in action: the extra alternative "b" blocks the match.
print("non-applicable:", apply_transformation(rho, parse_grammar("A -> a A | eps | b")))

# Bug-fixing transformations are patterns too.
fix = registry.patterns["ReplaceEpsByCanonicalRecursionEnd"]
print("bug fix for S -> a S b | eps:",
      [render_grammar(x) for x in apply_transformation(fix, parse_grammar("S -> a S b | eps"))])

# Hard-coded cleanups share the registry namespace.
print("EliminateDelegatingVars:",
      render_grammar(apply_builtin("EliminateDelegatingVars", parse_grammar("S -> A ; A -> a A | eps"))))

# The bundled pipeline interprets sequencing, branching, iteration, and
# guards over *sets* of grammars; memoization computes shared steps once.
pipe, registry = normalization_pipeline(registry)
result = run_pipeline(pipe, g, registry, Budget(ms=20_000))
print(f"\nnormal set N(G): {len(result.grammars)} grammars "
      f"({len(result.visited)} visited, partial={result.partial})")
for out in result.grammars:
    print("  ", render_grammar(out).replace("\n", " ; "))

# Two different write-ups of the same idea meet in their normal sets.
other = parse_grammar("S -> b A | a B ; A -> A a | eps ; B -> b B | eps")
overlap = result.keys & run_pipeline(pipe, other, registry, Budget(ms=20_000)).keys
print("normal sets overlap (equivalence proven):", bool(overlap))

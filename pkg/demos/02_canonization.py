"""Canonical keys: isomorphism testing and cache keys in one.

Run: python demos/02_canonization.py
"""

from cfgeq.canon import canonical_grammar, canonical_key, is_isomorphic
from cfgeq.grammar import parse_grammar, render_grammar

# Students rename non-terminals and reorder rules freely; the canonical key
# is invariant under exactly those changes.
a = parse_grammar("S -> a S b | a b")
b = parse_grammar("T -> a b | a T b")          # renamed + reordered
c = parse_grammar("S -> a S b | a b b")        # a different language

print("key(a) == key(b):", canonical_key(a) == canonical_key(b))
print("key(a) == key(c):", canonical_key(a) == canonical_key(c))
print("is_isomorphic(a, b):", is_isomorphic(a, b))

# The key is the rendered relabeled grammar, so it doubles as a readable
# cache key.
print("\nthe key itself:")
print(canonical_key(a).bytes.decode())

# canonical_grammar returns that relabeling as a Grammar.
messy = parse_grammar("Expr -> Expr p Term | Term ; Term -> x")
print("\ncanonical form of a messy grammar:")
print(render_grammar(canonical_grammar(messy)))

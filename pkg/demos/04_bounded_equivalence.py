"""Boundedness testing and the complete equivalence test for bounded languages.

Run: python demos/04_bounded_equivalence.py
"""

from cfgeq.bounded import (
    BoundednessWitness,
    bounded_equivalence,
    discover_witness,
    test_bounded_by_witness,
)
from cfgeq.grammar import parse_grammar

target = parse_grammar("S -> a S b | a b b b")      # {a^n b^{n+2}, n >= 1}
witness = BoundednessWitness(("a", "b"))

# Boundedness: L(target) is inside a* b*.
print("target bounded by a*, b*:", test_bounded_by_witness(target, witness).outcome)

# A grammar that wanders outside the shape yields a structural counterexample.
wild = parse_grammar("S -> a S | T | eps ; T -> b T | S | eps")
check = test_bounded_by_witness(wild, witness)
print("wild grammar:", check.outcome, "counterexample:", check.counterexample)

# Witness discovery factors sample words into repeated blocks, then verifies.
ib8 = parse_grammar("S -> A b b B ; A -> a A b | eps ; B -> c B | eps")
print("discovered witness for {a^n b^{n+2} c^m}:", discover_witness(ib8).words)

# The equivalence test itself: both languages become Presburger formulas over
# the block exponents; the symmetric difference goes to the solver; a model
# converts back into a counterexample word, membership-verified on both sides.
attempt = parse_grammar("S -> a S b | a b b")
outcome = bounded_equivalence(target, witness, attempt)
print("\ntarget vs attempt:", outcome.outcome,
      "counterexample:", outcome.counterexample, f"({outcome.side})")

same = parse_grammar("S -> a T b ; T -> a T b | b b")
print("target vs a different encoding:", bounded_equivalence(target, witness, same).outcome)

"""Grammars, parsing, and the elementary language algorithms.

Run: python demos/01_grammars_and_languages.py
"""

from cfgeq.grammar import parse_grammar, render_grammar
from cfgeq.language import (
    enumerate_words,
    is_empty,
    is_finite,
    membership,
    nullable_nonterminals,
    words_up_to,
)

# The running example: a student was asked for {a^n b^{n+2} | n >= 1} and
# submitted a grammar that is off by one b.
target = parse_grammar("S -> a S b | a b b b")
attempt = parse_grammar("S -> a S b | a b b")

print("target:")
print(render_grammar(target))
print()

# Membership runs an Earley chart parser, so eps- and unit-productions need
# no preprocessing.
for word in ["abb", "abbb", "aabbbb", ""]:
    print(f"  {word!r:10} in target: {membership(target, word)!s:5}  in attempt: {membership(attempt, word)}")

# Enumeration is the workhorse oracle: exactly the words up to a length.
print("\nshortest members, target :", words_up_to(target, 8))
print("shortest members, attempt:", words_up_to(attempt, 8))

# The decision helpers.
empty = parse_grammar("S -> a S")          # no terminating rule
finite = parse_grammar("S -> a b | b a")
print("\nis_empty(S -> a S)      :", is_empty(empty))
print("is_finite(S -> ab | ba) :", is_finite(finite))
print("is_finite(target)       :", is_finite(target))
print("nullable in S -> A B; A -> eps; B -> b:",
      sorted(s.name for s in nullable_nonterminals(parse_grammar("S -> A B ; A -> eps ; B -> b"))))

# The two languages first differ at length three.
difference = sorted(
    enumerate_words(attempt, 6) ^ enumerate_words(target, 6), key=lambda w: (len(w), w)
)
print("\nsymmetric difference up to length 6:", difference)

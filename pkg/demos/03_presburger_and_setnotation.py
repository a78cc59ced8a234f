"""The linear-arithmetic layer: quantifier elimination, models, set notation.

Run: python demos/03_presburger_and_setnotation.py
"""

from cfgeq import qe
from cfgeq.bounded import BoundednessWitness, adapted_parikh_formula, set_notation
from cfgeq.grammar import parse_grammar
from cfgeq.presburger import Divides, cmp, const, exists, land, var
from cfgeq.setnotation import is_concise

# Cooper-style elimination keeps divisibility atoms first-class.
x, y = var("x"), var("y")
parity = exists(["y"], cmp("=", x, y.scale(2)))
print("exists y. x = 2y   ->", qe.to_internal(qe.eliminate_quantifiers(parity)))

successor = exists(["y"], land(cmp("=", x, y + const(1)), cmp(">=", y, 0)))
print("exists y>=0. x=y+1 ->", qe.to_internal(qe.eliminate_quantifiers(successor)))

# Satisfiability returns the lexicographically least model.
model = qe.satisfiable(land(cmp(">=", x + y, 3), Divides(2, x)), nonneg={"x", "y"})
print("least model of x+y>=3 and 2|x:", model)

# The adapted Parikh image of a bounded language, relative to a witness, is
# an existential formula over the block exponents ...
witness = BoundednessWitness(("a", "b"))
grammar = parse_grammar("S -> a S b | a b b")
formula = adapted_parikh_formula(grammar, witness)
print("\nadapted Parikh formula size before elimination:",
      sum(1 for _ in str(formula).split("LinearTerm")) - 1, "terms")

# ... and after elimination + normal form + sugar it reads like a textbook:
notation = set_notation(grammar, witness)
print("set notation:", notation.rendered)
print("concise per the explanation criteria:", is_concise(notation.predicate))

# The three showcase languages:
for text in [
    "S -> A B ; A -> A a | a ; B -> B b | b",
    "S -> A ; A -> a B b ; B -> a A b | eps",
    "S -> a X b | a Y b ; X -> a X b | a ; Y -> a Y b | b",
]:
    print(" ", set_notation(parse_grammar(text), witness).rendered)

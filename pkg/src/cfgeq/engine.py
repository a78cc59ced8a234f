"""Orchestration: the method battery, cache, explanations, and clustering.

classify() runs the methods from cheap to expensive and stops at the first
decisive one: cache, equality, isomorphism, emptiness, finiteness,
counterexample search, symbol frequencies (Parikh difference), normalization
overlap, and the bounded-language branch.  Per-method timeouts degrade to a
skipped method, never to a wrong verdict; every inequivalence verdict carries
verified evidence.
"""

from __future__ import annotations

import base64
import json
import threading
from dataclasses import dataclass, field, replace
from typing import Literal, Optional

from . import bounded, language, qe, setnotation
from .budget import Budget, BudgetExceeded
from .canon import canonical_key
from .grammar import Grammar, Word
from .presburger import Formula, Valuation, land, lnot, lor
from .transform import pipeline as pipeline_mod
from .transform.pipeline import PipelineResult, TransformationRegistry

Side = Literal["only_in_left", "only_in_right"]

BUG_FIXES = (
    ("C1", "AddEpsAsRecursionEnd"),
    ("C2", "AddCanonicalRecursionEnd"),
    ("C3", "ReplaceEpsByCanonicalRecursionEnd"),
)


class CacheIntegrityError(RuntimeError):
    """Two proofs disagreed about one canonical key; an engine bug."""


@dataclass(frozen=True)
class Explanation:
    counterexample: Optional[tuple[Word, Side]] = None
    structural_counterexample: Optional[tuple[Word, tuple[str, ...]]] = None
    parikh_difference: Optional[tuple[str, Valuation, bool]] = None
    attempt_set_notation: Optional[tuple[setnotation.SetNotation, bool]] = None
    target_set_notation: Optional[setnotation.SetNotation] = None
    bug_fix: Optional[tuple[str, Grammar]] = None


@dataclass(frozen=True)
class Verdict:
    outcome: Literal["equivalent", "not_equivalent", "undecided"]
    method: str
    evidence: Optional[Explanation] = None

    def __post_init__(self):
        if self.outcome == "not_equivalent":
            assert self.evidence is not None, "inequivalence verdicts carry evidence"


@dataclass(frozen=True)
class CacheEntry:
    key: bytes
    verdict: Verdict
    origin: Literal["attempt", "normalization_intermediate", "variation", "manual"]


class VerdictCache:
    """Canonical-key -> verdict map with append-only persistence.

    Reads go straight to the dict; writes serialize on a lock (idempotent
    inserts, conflicting outcomes raise)."""

    def __init__(self, path=None):
        self.entries: dict[bytes, CacheEntry] = {}
        self.path = path
        self._write_lock = threading.Lock()
        if path is not None and path.exists():
            for line in path.read_text("utf-8").splitlines():
                if not line.strip():
                    continue
                key_b64, payload = line.split("\t", 1)
                data = json.loads(payload)
                entry = CacheEntry(
                    key=base64.b64decode(key_b64),
                    verdict=Verdict(
                        data["outcome"],
                        data["method"],
                        Explanation(counterexample=tuple(data["counterexample"]))
                        if data.get("counterexample")
                        else (Explanation() if data["outcome"] == "not_equivalent" else None),
                    ),
                    origin=data["origin"],
                )
                self.entries.setdefault(entry.key, entry)

    def lookup(self, key: bytes) -> Optional[Verdict]:
        entry = self.entries.get(key)
        return entry.verdict if entry else None

    def insert(self, entry: CacheEntry):
        with self._write_lock:
            existing = self.entries.get(entry.key)
            if existing is not None:
                if existing.verdict.outcome != entry.verdict.outcome:
                    raise CacheIntegrityError(
                        f"conflicting verdicts for one key: {existing.verdict.outcome} vs {entry.verdict.outcome}"
                    )
                return
            self.entries[entry.key] = entry
            if self.path is not None:
                ce = entry.verdict.evidence.counterexample if entry.verdict.evidence else None
                record = {
                    "outcome": entry.verdict.outcome,
                    "method": entry.verdict.method,
                    "origin": entry.origin,
                    "counterexample": list(ce) if ce else None,
                }
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(base64.b64encode(entry.key).decode() + "\t" + json.dumps(record) + "\n")


@dataclass
class EngineConfig:
    max_counterexample_len: int = 15
    normalization_budget_ms: float = 10_000
    set_notation_budget_ms: float = 10_000
    bounded_budget_ms: float = 20_000
    parikh_budget_ms: float = 20_000
    use_cache: bool = True


@dataclass
class ExerciseContext:
    target: Grammar
    witness: Optional[bounded.BoundednessWitness]
    registry: TransformationRegistry
    pipeline: pipeline_mod.Pipeline
    basic_pipeline: pipeline_mod.Pipeline
    cache: VerdictCache
    config: EngineConfig = field(default_factory=EngineConfig)
    _n_target: Optional[PipelineResult] = None
    _target_qf: Optional[Formula] = None
    _target_set_notation: Optional[setnotation.SetNotation] = None

    @property
    def target_key(self) -> bytes:
        return canonical_key(self.target).bytes

    def n_target(self) -> PipelineResult:
        if self._n_target is None:
            self._n_target = pipeline_mod.run_pipeline(
                self.pipeline, self.target, self.registry, Budget(ms=self.config.normalization_budget_ms)
            )
        return self._n_target

    def target_adapted_qf(self) -> Optional[Formula]:
        """Quantifier-free adapted Parikh formula of the target, cached."""
        if self.witness is None:
            return None
        if self._target_qf is None:
            budget = Budget(ms=self.config.bounded_budget_ms)
            phi = bounded.adapted_parikh_formula(self.target, self.witness)
            self._target_qf = qe.eliminate_quantifiers(phi, budget)
        return self._target_qf

    def target_set_notation(self) -> Optional[setnotation.SetNotation]:
        if self.witness is None:
            return None
        if self._target_set_notation is None:
            try:
                self._target_set_notation = bounded.set_notation(
                    self.target, self.witness, Budget(ms=self.config.set_notation_budget_ms)
                )
            except BudgetExceeded:
                return None
        return self._target_set_notation


def make_exercise_context(
    target: Grammar,
    witness: Optional[bounded.BoundednessWitness] = None,
    config: Optional[EngineConfig] = None,
    cache: Optional[VerdictCache] = None,
    registry: Optional[TransformationRegistry] = None,
) -> ExerciseContext:
    """Build the per-exercise context; a supplied witness is verified bounded
    for the target, otherwise discovery is attempted."""
    config = config or EngineConfig()
    registry = registry or pipeline_mod.default_registry()
    pipe, registry = pipeline_mod.normalization_pipeline(registry)
    basic, registry = pipeline_mod.basic_simplification(registry)
    if witness is not None:
        check = bounded.test_bounded_by_witness(target, witness)
        if check.outcome != "bounded":
            raise ValueError(f"target is not bounded by the supplied witness ({check.outcome})")
    else:
        witness = bounded.discover_witness(target)
    return ExerciseContext(
        target=target,
        witness=witness,
        registry=registry,
        pipeline=pipe,
        basic_pipeline=basic,
        cache=cache or VerdictCache(),
        config=config,
    )


def counterexample_search(
    g: Grammar, h: Grammar, max_len: int = 15
) -> Optional[tuple[Word, Side]]:
    """Shortest word in the symmetric difference up to max_len.

    Enumerates both languages (never raw alphabet power sets) and diffs the
    sets; a short pass first so tiny counterexamples return without
    enumerating the full length range.  The winner is double-checked with
    the chart parser.
    """
    for bound in sorted({min(4, max_len), max_len}):
        words_g = language.enumerate_words(g, bound)
        words_h = language.enumerate_words(h, bound)
        difference = sorted(words_g ^ words_h, key=lambda w: (len(w), w))
        if difference:
            word = difference[0]
            side: Side = "only_in_left" if word in words_g else "only_in_right"
            if language.membership(g, word) == language.membership(h, word):
                raise CacheIntegrityError(
                    f"enumeration and membership disagree on {word!r}"
                )
            return word, side
    return None


def _verify_word(word: Word, attempt: Grammar, target: Grammar, side: Side):
    in_attempt = language.membership(attempt, word)
    in_target = language.membership(target, word)
    expected = (side == "only_in_left", side == "only_in_right")
    if (in_attempt, in_target) != expected:
        raise CacheIntegrityError(f"counterexample {word!r} failed membership verification")


def classify(
    attempt: Grammar,
    ctx: ExerciseContext,
    diagnostic: bool = False,
):
    """Decide equivalence of the attempt against the exercise target.

    Returns the Verdict; in diagnostic mode returns (verdict, outcomes) where
    outcomes maps every method that reached a decision to its verdict, so the
    no-contradiction property can be asserted.
    """
    outcomes: dict[str, Verdict] = {}
    decided: Optional[Verdict] = None
    attempt_key = canonical_key(attempt).bytes
    extra_keys: list[tuple[bytes, str]] = []
    n_attempt: Optional[PipelineResult] = None

    def record(method: str, verdict: Verdict):
        nonlocal decided
        outcomes[method] = verdict
        if decided is None:
            decided = verdict

    # (1) cache tiers: raw canonization, then basic simplification
    if ctx.config.use_cache:
        hit = ctx.cache.lookup(attempt_key)
        if hit is not None:
            record("cache", replace(hit, method="cache"))
            if not diagnostic:
                return decided
        if decided is None:
            try:
                simplified = pipeline_mod.run_pipeline(
                    ctx.basic_pipeline, attempt, ctx.registry, Budget(ms=2000)
                )
                for key in sorted(simplified.keys):
                    extra_keys.append((key, "normalization_intermediate"))
                    hit = ctx.cache.lookup(key)
                    if hit is not None:
                        record("cache", replace(hit, method="cache"))
                        break
            except BudgetExceeded:
                pass
        if decided is not None and not diagnostic:
            return decided

    # (2) equality, then isomorphism
    if set(attempt.productions) == set(ctx.target.productions) and attempt.start == ctx.target.start:
        record("equality", Verdict("equivalent", "equality"))
        if not diagnostic:
            return _finish(decided, attempt_key, extra_keys, n_attempt, ctx)
    if attempt_key == ctx.target_key:
        record("isomorphism", Verdict("equivalent", "isomorphism"))
        if not diagnostic:
            return _finish(decided, attempt_key, extra_keys, n_attempt, ctx)

    # (3) emptiness and finiteness agreement
    attempt_empty, target_empty = language.is_empty(attempt), language.is_empty(ctx.target)
    if attempt_empty and target_empty:
        record("emptiness", Verdict("equivalent", "emptiness"))
    elif attempt_empty != target_empty:
        nonempty = ctx.target if attempt_empty else attempt
        word = language.shortest_member(nonempty)
        assert word is not None
        side: Side = "only_in_right" if attempt_empty else "only_in_left"
        _verify_word(word, attempt, ctx.target, side)
        record(
            "emptiness",
            Verdict("not_equivalent", "emptiness", Explanation(counterexample=(word, side))),
        )
    if decided is not None and not diagnostic:
        return _finish(decided, attempt_key, extra_keys, n_attempt, ctx)
    if not attempt_empty and not target_empty:
        attempt_finite, target_finite = language.is_finite(attempt), language.is_finite(ctx.target)
        if attempt_finite != target_finite:
            word_side = _finiteness_witness(attempt, ctx.target, attempt_finite)
            if word_side is not None:
                word, side = word_side
                _verify_word(word, attempt, ctx.target, side)
                record(
                    "finiteness",
                    Verdict(
                        "not_equivalent", "finiteness", Explanation(counterexample=word_side)
                    ),
                )
    if decided is not None and not diagnostic:
        return _finish(decided, attempt_key, extra_keys, n_attempt, ctx)

    # (4) counterexample words up to the configured length
    found = counterexample_search(attempt, ctx.target, ctx.config.max_counterexample_len)
    if found is not None:
        word, side = found
        _verify_word(word, attempt, ctx.target, side)
        record(
            "counterexample",
            Verdict("not_equivalent", "counterexample", Explanation(counterexample=(word, side))),
        )
    if decided is not None and not diagnostic:
        return _finish(decided, attempt_key, extra_keys, n_attempt, ctx)

    # (5) symbol frequencies: Parikh-image difference
    try:
        diff = bounded.parikh_difference(attempt, ctx.target, Budget(ms=ctx.config.parikh_budget_ms))
        if diff is not None:
            valuation, description = diff
            rendered = setnotation.render_predicate(description)
            record(
                "symbol_frequencies",
                Verdict(
                    "not_equivalent",
                    "symbol_frequencies",
                    Explanation(
                        parikh_difference=(rendered, valuation, setnotation.is_concise(description))
                    ),
                ),
            )
    except BudgetExceeded:
        pass
    if decided is not None and not diagnostic:
        return _finish(decided, attempt_key, extra_keys, n_attempt, ctx)

    # (6) normalization overlap
    try:
        n_attempt = pipeline_mod.run_pipeline(
            ctx.pipeline, attempt, ctx.registry, Budget(ms=ctx.config.normalization_budget_ms)
        )
        # intersecting the visited sets is sound: every intermediate comes
        # from an equivalence transformation
        if frozenset(n_attempt.visited) & frozenset(ctx.n_target().visited):
            record("normalization", Verdict("equivalent", "normalization"))
        elif ctx.config.use_cache:
            # third cache tier: canons of the fully normalized grammars
            for key in sorted(n_attempt.visited):
                hit = ctx.cache.lookup(key)
                if hit is not None:
                    record("cache", replace(hit, method="cache"))
                    break
    except BudgetExceeded:
        n_attempt = None
    if decided is not None and not diagnostic:
        return _finish(decided, attempt_key, extra_keys, n_attempt, ctx)

    # (7) bounded branch
    if ctx.witness is not None:
        outcome = _bounded_method(attempt, ctx)
        if outcome is not None:
            record(outcome.method, outcome)
    if decided is not None and not diagnostic:
        return _finish(decided, attempt_key, extra_keys, n_attempt, ctx)

    if decided is None:
        decided = Verdict("undecided", "manual")
    verdict = _finish(decided, attempt_key, extra_keys, n_attempt, ctx)
    if diagnostic:
        agreed = {v.outcome for v in outcomes.values() if v.outcome != "undecided"}
        if len(agreed) > 1:
            raise CacheIntegrityError(f"methods disagree: {outcomes}")
        return verdict, outcomes
    return verdict


def _finiteness_witness(attempt: Grammar, target: Grammar, attempt_finite: bool):
    finite, infinite = (attempt, target) if attempt_finite else (target, attempt)
    bound = 2 * len(finite.nonterminals) + sum(len(p.rhs) for p in finite.productions)
    finite_words = language.enumerate_words(finite, bound)
    longest = max((len(w) for w in finite_words), default=0)
    pump = 2 * len(infinite.nonterminals) + sum(len(p.rhs) for p in infinite.productions)
    for n in range(longest + 1, longest + pump + 2):
        words = sorted(w for w in language.enumerate_words(infinite, n) if len(w) == n)
        if words:
            side: Side = "only_in_right" if attempt_finite else "only_in_left"
            return words[0], side
    return None


def _bounded_method(attempt: Grammar, ctx: ExerciseContext) -> Optional[Verdict]:
    witness = ctx.witness
    assert witness is not None
    budget = Budget(ms=ctx.config.bounded_budget_ms)
    check = bounded.test_bounded_by_witness(attempt, witness, budget)
    if check.outcome == "timeout":
        return None
    if check.outcome == "not_bounded":
        word = check.counterexample
        assert word is not None
        if not language.membership(attempt, word) or language.membership(ctx.target, word):
            raise bounded.InternalConsistencyError(f"structural counterexample {word!r} failed checks")
        dfa = bounded.witness_automaton(witness, attempt.terminal_names())
        if dfa.accepts(word):
            raise bounded.InternalConsistencyError(f"{word!r} is accepted by the witness automaton")
        return Verdict(
            "not_equivalent",
            "boundedness_witness",
            Explanation(
                counterexample=(word, "only_in_left"),
                structural_counterexample=(word, witness.words),
            ),
        )
    finite = bounded._finite_pair_outcome(ctx.target, attempt)
    if finite is not None:
        if finite.outcome == "equivalent":
            return Verdict("equivalent", "bounded_equivalence")
        word = finite.counterexample
        # _finite_pair_outcome sides are relative to (target, attempt);
        # explanation sides are relative to (attempt, target)
        side: Side = "only_in_left" if finite.side == "only_in_right" else "only_in_right"
        _verify_word(word, attempt, ctx.target, side)
        return Verdict(
            "not_equivalent",
            "bounded_equivalence",
            Explanation(counterexample=(word, side)),
        )
    try:
        target_qf = ctx.target_adapted_qf()
        attempt_qf = qe.eliminate_quantifiers(
            bounded.adapted_parikh_formula(attempt, witness), budget
        )
        xs = set(bounded.exponent_vars(witness))
        difference = lor(land(target_qf, lnot(attempt_qf)), land(attempt_qf, lnot(target_qf)))
        model = qe.satisfiable(difference, nonneg=xs, budget=budget)
    except BudgetExceeded:
        return None
    if model is None:
        return Verdict("equivalent", "bounded_equivalence")
    exponents = [model.get(x, 0) for x in bounded.exponent_vars(witness)]
    word = witness.expand(exponents)
    in_attempt = language.membership(attempt, word)
    in_target = language.membership(ctx.target, word)
    if in_attempt == in_target:
        raise bounded.InternalConsistencyError(f"bounded model produced non-separating word {word!r}")
    side: Side = "only_in_left" if in_attempt else "only_in_right"
    return Verdict(
        "not_equivalent",
        "bounded_equivalence",
        Explanation(counterexample=(word, side)),
    )


def _finish(
    verdict: Verdict,
    attempt_key: bytes,
    extra_keys: list[tuple[bytes, str]],
    n_attempt: Optional[PipelineResult],
    ctx: ExerciseContext,
) -> Verdict:
    if verdict.outcome == "undecided" or not ctx.config.use_cache:
        return verdict
    ctx.cache.insert(CacheEntry(attempt_key, verdict, "attempt"))
    for key, origin in extra_keys:
        ctx.cache.insert(CacheEntry(key, verdict, origin))
    if n_attempt is not None:
        for key in sorted(n_attempt.visited):
            ctx.cache.insert(CacheEntry(key, verdict, "normalization_intermediate"))
    return verdict


def explain(attempt: Grammar, target: Grammar, verdict: Verdict, ctx: ExerciseContext) -> Explanation:
    """Assemble every obtainable explanation piece; absent pieces are omitted."""
    assert verdict.outcome == "not_equivalent"
    base = verdict.evidence or Explanation()
    counterexample = base.counterexample
    if counterexample is None:
        counterexample = counterexample_search(attempt, target, ctx.config.max_counterexample_len)
    structural = base.structural_counterexample
    parikh = base.parikh_difference
    if parikh is None:
        try:
            diff = bounded.parikh_difference(attempt, target, Budget(ms=ctx.config.parikh_budget_ms))
            if diff is not None:
                valuation, description = diff
                parikh = (
                    setnotation.render_predicate(description),
                    valuation,
                    setnotation.is_concise(description),
                )
        except BudgetExceeded:
            pass
    attempt_sn = base.attempt_set_notation
    if attempt_sn is None and ctx.witness is not None:
        check = bounded.test_bounded_by_witness(attempt, ctx.witness)
        if check.outcome == "bounded":
            try:
                sn = bounded.set_notation(
                    attempt, ctx.witness, Budget(ms=ctx.config.set_notation_budget_ms)
                )
                attempt_sn = (sn, setnotation.is_concise(sn.predicate))
            except BudgetExceeded:
                pass
        elif check.outcome == "not_bounded" and structural is None:
            word = check.counterexample
            if word is not None and language.membership(attempt, word):
                structural = (word, ctx.witness.words)
    fix = bug_fix_search(attempt, target, ctx)
    return Explanation(
        counterexample=counterexample,
        structural_counterexample=structural,
        parikh_difference=parikh,
        attempt_set_notation=attempt_sn,
        target_set_notation=ctx.target_set_notation(),
        bug_fix=fix,
    )


def _proves_equivalent(candidate: Grammar, ctx: ExerciseContext) -> bool:
    if canonical_key(candidate).bytes == ctx.target_key:
        return True
    try:
        n_candidate = pipeline_mod.run_pipeline(
            ctx.pipeline, candidate, ctx.registry, Budget(ms=ctx.config.normalization_budget_ms)
        )
        if frozenset(n_candidate.visited) & frozenset(ctx.n_target().visited):
            return True
    except BudgetExceeded:
        pass
    if ctx.witness is not None:
        try:
            outcome = bounded.bounded_equivalence(
                ctx.target, ctx.witness, candidate, Budget(ms=ctx.config.bounded_budget_ms)
            )
            return outcome.outcome == "equivalent"
        except BudgetExceeded:
            return False
    return False


def bug_fix_search(attempt: Grammar, target: Grammar, ctx: ExerciseContext) -> Optional[tuple[str, Grammar]]:
    """Try the prototypical bug-fixing transformations in order; a fix counts
    only when the fixed grammar provably equals the target."""
    from .transform.matching import apply_transformation

    for label, name in BUG_FIXES:
        t = ctx.registry.patterns.get(name)
        if t is None:
            continue
        for candidate in apply_transformation(t, attempt):
            if _proves_equivalent(candidate, ctx):
                return label, candidate
    return None


@dataclass
class Cluster:
    kind: Literal["solution", "error", "unrecognized"]
    representative: Grammar
    member_keys: frozenset[bytes]


def cluster_attempts(attempts: list[Grammar], target: Grammar, ctx: ExerciseContext) -> list[Cluster]:
    """Union-find over canonical keys: merge on key equality, normal-set
    overlap, and (with a witness) pairwise bounded equivalence of
    representatives; the target anchors the single solution cluster."""
    items: list[tuple[bytes, Grammar]] = [(ctx.target_key, target)]
    for g in attempts:
        items.append((canonical_key(g).bytes, g))
    keys = [k for k, _ in items]
    parent = list(range(len(items)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int):
        parent[find(i)] = find(j)

    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if keys[i] == keys[j]:
                union(i, j)
    normal_sets: dict[int, frozenset[bytes]] = {}
    for i, (_, g) in enumerate(items):
        try:
            res = pipeline_mod.run_pipeline(
                ctx.pipeline, g, ctx.registry, Budget(ms=ctx.config.normalization_budget_ms)
            )
            normal_sets[i] = frozenset(res.visited)
        except BudgetExceeded:
            normal_sets[i] = frozenset({keys[i]})
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if find(i) != find(j) and normal_sets[i] & normal_sets[j]:
                union(i, j)
    if ctx.witness is not None:
        reps = sorted({find(i) for i in range(len(items))})
        # the equivalence test's left side must satisfy its boundedness
        # precondition, otherwise it only compares witness-shaped sublanguages
        bounded_reps = {
            i
            for i in reps
            if bounded.test_bounded_by_witness(items[i][1], ctx.witness).outcome == "bounded"
        }
        for a_pos, i in enumerate(reps):
            if i not in bounded_reps:
                continue
            for j in reps[a_pos + 1 :]:
                if find(i) == find(j) or j not in bounded_reps:
                    continue
                try:
                    outcome = bounded.bounded_equivalence(
                        items[i][1], ctx.witness, items[j][1], Budget(ms=ctx.config.bounded_budget_ms)
                    )
                except (BudgetExceeded, bounded.InternalConsistencyError):
                    continue
                if outcome.outcome == "equivalent":
                    union(i, j)
    groups: dict[int, list[int]] = {}
    for i in range(len(items)):
        groups.setdefault(find(i), []).append(i)
    target_root = find(0)
    solution_keys: set[bytes] = set()
    rest: list[Cluster] = []
    for root, members in sorted(groups.items()):
        member_keys = frozenset(keys[i] for i in members if i != 0)
        if root == target_root:
            solution_keys |= member_keys
            continue
        rep = items[members[0]][1]
        verdict = classify(rep, ctx)
        if verdict.outcome == "equivalent":
            solution_keys |= member_keys  # provably equal: one solution cluster
        elif verdict.outcome == "not_equivalent":
            rest.append(Cluster("error", rep, member_keys))
        else:
            rest.append(Cluster("unrecognized", rep, member_keys))
    return [Cluster("solution", target, frozenset(solution_keys))] + rest


def generate_variations(g: Grammar, verdict: Verdict, ctx: ExerciseContext) -> frozenset[bytes]:
    """Apply the equivalence transformations once and cache the results under
    the grammar's verdict."""
    from .transform.matching import apply_transformation

    keys = {canonical_key(g).bytes}
    for t in ctx.registry.equivalence_transformations():
        for out in apply_transformation(t, g):
            keys.add(canonical_key(out).bytes)
    if verdict.outcome != "undecided" and ctx.config.use_cache:
        for key in sorted(keys):
            ctx.cache.insert(CacheEntry(key, verdict, "variation"))
    return frozenset(keys)

"""Weighted tree automata with hom-constraints (WTAh), their runs, and
bounded enumeration.

A rule is (lhs, E, target, weight): lhs is a tree over the alphabet with
state leaves (not itself a bare state), E an equivalence over the state
positions of lhs stored as a canonical partition, and the weight nonzero.
Constraints are literal subtree equality: a run applies a rule only if all
subtrees at the positions of one class coincide.  Every state position gets
its own child run factor, even when a constraint forces equal subtrees.

WTG = all constraints trivial; WTA = additionally flat left-hand sides.
An automaton is eq-restricted when it has a non-final sink with exactly the
weight-one rules sigma(sink,...,sink) -> sink, and every constraint class of
every other rule contains exactly one non-sink position.

Bounded operations (support, unambiguity, state languages) saturate the set
of trees generated by the rules instead of walking all trees of a given
height: trees without a run to a real state evaluate to zero and carry no
accepting runs, so nothing is missed.
"""

from __future__ import annotations

from itertools import product

from .semiring import Semiring, Weight
from .term import (
    NAME_RE,
    Position,
    RankedAlphabet,
    Tree,
    enumerate_trees,
    format_position,
    replace_at,
    tree_key,
)
from .verdict import Verdict, verified, violated


class AutomatonError(ValueError):
    pass


class Rule:
    __slots__ = (
        "lhs",
        "target",
        "weight",
        "classes",
        "state_positions",
        "state_labels",
        "class_labels",
        "class_indices",
        "index",
        "_states",
        "_text",
    )

    def __init__(self, lhs, target, weight, classes, state_positions, state_labels, states):
        self.lhs = lhs
        self.target = target
        self.weight = weight
        self.classes = classes
        self.state_positions = state_positions
        self.state_labels = state_labels
        self._states = states
        pos_index = {p: i for i, p in enumerate(state_positions)}
        self.class_indices = tuple(tuple(pos_index[p] for p in cls) for cls in classes)
        self.class_labels = tuple(
            tuple(state_labels[i] for i in idxs) for idxs in self.class_indices
        )
        self.index = -1
        self._text = None

    @property
    def key(self):
        return (self.lhs, self.classes, self.target)

    def constraint_text(self) -> str:
        parts = []
        for cls in self.classes:
            if len(cls) < 2:
                continue
            head = format_position(cls[0])
            parts.extend(f"{head} = {format_position(p)}" for p in cls[1:])
        return ", ".join(parts)

    @property
    def text(self) -> str:
        if self._text is None:
            s = f"{self.lhs.text} -> {self.target} @ {self.weight}"
            constraint = self.constraint_text()
            if constraint:
                s += f" | {constraint}"
            self._text = s
        return self._text

    def __repr__(self):
        return f"Rule({self.text!r})"


def _scan_lhs(lhs: Tree, alphabet: RankedAlphabet, states: frozenset):
    """Validate an lhs and collect state positions in prefix order."""
    state_positions = []
    state_labels = []

    def walk(node, prefix):
        if node.label in states:
            if node.children:
                raise AutomatonError(f"state {node.label} used with arguments in {lhs.text}")
            state_positions.append(prefix)
            state_labels.append(node.label)
            return
        if node.label not in alphabet:
            raise AutomatonError(f"undeclared symbol {node.label} in {lhs.text}")
        if alphabet.rank(node.label) != len(node.children):
            raise AutomatonError(
                f"symbol {node.label} has rank {alphabet.rank(node.label)}, "
                f"used with {len(node.children)} arguments in {lhs.text}"
            )
        for i, c in enumerate(node.children, start=1):
            walk(c, prefix + (i,))

    if lhs.label in states and not lhs.children:
        raise AutomatonError(f"left-hand side must not be a bare state: {lhs.text}")
    walk(lhs, ())
    return tuple(state_positions), tuple(state_labels)


def _close_partition(state_positions, pairs):
    """Union-find closure of constraint pairs into a canonical full partition."""
    parent = {p: p for p in state_positions}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    pos_set = set(state_positions)
    for a, b in pairs:
        for p in (a, b):
            if p not in pos_set:
                raise AutomatonError(
                    f"constraint position {format_position(p)} is not a state position"
                )
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups: dict = {}
    for p in state_positions:
        groups.setdefault(find(p), []).append(p)
    classes = [tuple(sorted(g)) for g in groups.values()]
    classes.sort(key=lambda cls: cls[0])
    return tuple(classes)


def make_rule(alphabet, states, semiring, lhs, target, weight, pairs=()) -> Rule:
    states = frozenset(states)
    if target not in states:
        raise AutomatonError(f"undeclared target state: {target}")
    if not isinstance(weight, Weight):
        raise AutomatonError(f"rule weight must be a Weight, got {weight!r}")
    if weight.semiring != semiring:
        raise AutomatonError(
            f"rule weight lives in {weight.semiring.id}, automaton in {semiring.id}"
        )
    if weight.is_zero:
        raise AutomatonError(f"zero-weight rule: {lhs.text} -> {target}")
    state_positions, state_labels = _scan_lhs(lhs, alphabet, states)
    classes = _close_partition(state_positions, pairs)
    return Rule(lhs, target, weight, classes, state_positions, state_labels, states)


class Automaton:
    def __init__(self, semiring: Semiring, alphabet: RankedAlphabet, states, finals, rules,
                 sink: str | None = None):
        self.semiring = semiring
        self.alphabet = alphabet
        self.states = tuple(states)
        if len(set(self.states)) != len(self.states):
            raise AutomatonError("duplicate state declarations")
        for q in self.states:
            if not NAME_RE.fullmatch(q):
                raise AutomatonError(f"illegal state name: {q!r}")
            if q in alphabet:
                raise AutomatonError(f"name {q} is both a state and an alphabet symbol")
        state_set = frozenset(self.states)
        finals = list(dict.fromkeys(finals))
        for q in finals:
            if q not in state_set:
                raise AutomatonError(f"undeclared final state: {q}")
        self.finals = tuple(sorted(finals))
        if sink is not None:
            if sink not in state_set:
                raise AutomatonError(f"undeclared sink state: {sink}")
            if sink in self.finals:
                raise AutomatonError(f"sink state {sink} must not be final")
        self.sink = sink

        prepared = []
        for r in rules:
            if isinstance(r, Rule):
                # Rebuild rather than share: the automaton owns its rules
                # (it assigns their indices).
                lhs, target, weight = r.lhs, r.target, r.weight
                pairs = [(cls[0], p) for cls in r.classes for p in cls[1:]]
            else:
                lhs, target, weight, *rest = r
                pairs = rest[0] if rest else ()
            prepared.append(make_rule(alphabet, state_set, semiring, lhs, target, weight, pairs))
        seen_keys = set()
        for rule in prepared:
            if rule.key in seen_keys:
                raise AutomatonError(f"duplicate rule: {rule.text}")
            seen_keys.add(rule.key)
        self.rules = tuple(prepared)
        for i, rule in enumerate(self.rules):
            rule.index = i

        self._rules_by_target: dict[str, list[Rule]] = {}
        for rule in self.rules:
            self._rules_by_target.setdefault(rule.target, []).append(rule)

        self._pure_sink_cache = -1  # not computed yet

    @property
    def is_wtg(self) -> bool:
        return all(len(cls) == 1 for rule in self.rules for cls in rule.classes)

    @property
    def is_wta(self) -> bool:
        if not self.is_wtg:
            return False
        for rule in self.rules:
            if rule.state_positions != tuple((i,) for i in range(1, len(rule.lhs.children) + 1)):
                return False
        return True

    @property
    def pure_sink(self) -> str | None:
        """The sink name if it has exactly the weight-one sink rules, else None."""
        if self._pure_sink_cache == -1:
            self._pure_sink_cache = None
            if self.sink is not None and _sink_shape_violation(self) is None:
                self._pure_sink_cache = self.sink
        return self._pure_sink_cache

    def sink_rule_for(self, symbol: str) -> Rule:
        for rule in self._rules_by_target[self.sink]:
            if rule.lhs.label == symbol:
                return rule
        raise AutomatonError(f"no sink rule for symbol {symbol}")

    def rules_for(self, target: str):
        return tuple(self._rules_by_target.get(target, ()))

    @property
    def real_states(self):
        sink = self.pure_sink
        return tuple(q for q in self.states if q != sink)

    def __repr__(self):
        kind = "WTA" if self.is_wta else "WTG" if self.is_wtg else "WTAh"
        return (f"<{kind} over {self.semiring.id}: {len(self.states)} states, "
                f"{len(self.rules)} rules>")


def _sink_shape_violation(A: Automaton) -> str | None:
    sink = A.sink
    covered = set()
    for rule in A.rules:
        if rule.target != sink:
            continue
        lhs = rule.lhs
        flat = all(not c.children and c.label == sink for c in lhs.children)
        if not flat or not rule.weight.is_one or any(len(c) > 1 for c in rule.classes):
            return f"rule targeting the sink is not a weight-one sink rule: {rule.text}"
        if lhs.label in covered:
            return f"duplicate sink rule for symbol {lhs.label}"
        covered.add(lhs.label)
    missing = [name for name in A.alphabet.names() if name not in covered]
    if missing:
        return f"missing sink rule for symbol {missing[0]}"
    return None


def eq_restriction_violation(A: Automaton) -> str | None:
    """None if A is eq-restricted, else a human-readable reason."""
    if A.sink is None:
        return "no sink state declared"
    reason = _sink_shape_violation(A)
    if reason is not None:
        return reason
    sink = A.sink
    for rule in A.rules:
        if rule.target == sink:
            continue
        for cls, labels in zip(rule.classes, rule.class_labels):
            real = [lbl for lbl in labels if lbl != sink]
            if len(real) != 1:
                kind = "no" if not real else f"{len(real)}"
                members = ", ".join(format_position(p) for p in cls)
                return (
                    f"constraint class {{{members}}} of rule '{rule.text}' has "
                    f"{kind} non-sink positions (expected exactly one)"
                )
    return None


def is_eq_restricted(A: Automaton) -> bool:
    return eq_restriction_violation(A) is None


def match_lhs(rule: Rule, t: Tree):
    """Subtrees captured at the rule's state positions, or None if no match."""
    out = []

    def walk(node, tn):
        if node.label in rule._states:
            out.append(tn)
            return True
        if node.label != tn.label or len(node.children) != len(tn.children):
            return False
        for c, tc in zip(node.children, tn.children):
            if not walk(c, tc):
                return False
        return True

    if not walk(rule.lhs, t):
        return None
    return out


def constraints_ok(rule: Rule, subs) -> bool:
    for idxs in rule.class_indices:
        if len(idxs) < 2:
            continue
        first = subs[idxs[0]]
        for i in idxs[1:]:
            if subs[i] != first:
                return False
    return True


class Run:
    """A run per the constrained semantics: a rule plus one child run per
    state position (in prefix order).  Identity is (rule, child runs)."""

    __slots__ = ("rule", "subruns", "weight", "subject", "_hash")

    def __init__(self, rule: Rule, subruns):
        self.rule = rule
        self.subruns = tuple(subruns)
        sr = rule.weight.semiring
        val = rule.weight.value
        subject = rule.lhs
        for p, sub in zip(rule.state_positions, self.subruns):
            val = sr.mul(val, sub.weight.value)
            subject = replace_at(subject, p, sub.subject)
        self.weight = Weight(sr, val)
        self.subject = subject
        self._hash = hash((rule.index, self.subruns))

    @property
    def target(self) -> str:
        return self.rule.target

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Run):
            return NotImplemented
        return self.rule is other.rule and self.subruns == other.subruns

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"<run on {self.subject.text} to {self.target}, weight {self.weight}>"


def format_run(run: Run, indent: str = "") -> str:
    lines = [f"{indent}{run.rule.text}"]
    for sub in run.subruns:
        lines.append(format_run(sub, indent + "  "))
    return "\n".join(lines)


def run_state_map(run: Run) -> dict[Position, str]:
    """Position -> target state map of a WTA-shaped run."""
    out = {(): run.rule.target}
    for p, sub in zip(run.rule.state_positions, run.subruns):
        for sp, q in run_state_map(sub).items():
            out[p + sp] = q
    return out


def check_run(A: Automaton, run: Run, expect_tree: Tree | None = None,
              expect_state: str | None = None):
    """Self-consistency of a run; raises AutomatonError on any violation."""
    if run.rule.index < 0 or run.rule.index >= len(A.rules) or \
            A.rules[run.rule.index] is not run.rule:
        raise AutomatonError("run uses a rule not belonging to this automaton")
    rule = run.rule
    if len(run.subruns) != len(rule.state_positions):
        raise AutomatonError("run arity does not match the rule's state positions")
    for lbl, sub in zip(rule.state_labels, run.subruns):
        if sub.target != lbl:
            raise AutomatonError(
                f"child run targets {sub.target}, rule expects {lbl}"
            )
        check_run(A, sub)
    subs = [sub.subject for sub in run.subruns]
    if not constraints_ok(rule, subs):
        raise AutomatonError(f"constraint violated by run on {run.subject.text}")
    sr = A.semiring
    val = rule.weight.value
    for sub in run.subruns:
        val = sr.mul(val, sub.weight.value)
    if val != run.weight.value:
        raise AutomatonError("run weight does not equal rule weight times child weights")
    if expect_tree is not None and run.subject != expect_tree:
        raise AutomatonError(f"run subject {run.subject.text} != {expect_tree.text}")
    if expect_state is not None and run.target != expect_state:
        raise AutomatonError(f"run target {run.target} != {expect_state}")


def _check_ground(A: Automaton, t: Tree):
    if t.label not in A.alphabet:
        raise AutomatonError(f"undeclared symbol {t.label} in input tree")
    if A.alphabet.rank(t.label) != len(t.children):
        raise AutomatonError(f"symbol {t.label} used at wrong rank in input tree")
    for c in t.children:
        _check_ground(A, c)


class Evaluator:
    """Memoized weight computation wt_q(t); memo persists across calls."""

    def __init__(self, A: Automaton):
        self.automaton = A
        self._memo: dict = {}

    def state_value(self, t: Tree, q: str):
        key = (t, q)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        A = self.automaton
        sr = A.semiring
        total = sr.zero
        for rule in A._rules_by_target.get(q, ()):
            subs = match_lhs(rule, t)
            if subs is None or not constraints_ok(rule, subs):
                continue
            val = rule.weight.value
            for sub, lbl in zip(subs, rule.state_labels):
                val = sr.mul(val, self.state_value(sub, lbl))
            total = sr.add(total, val)
        self._memo[key] = total
        return total

    def state_weight(self, t: Tree, q: str) -> Weight:
        if q not in self.automaton.states:
            raise AutomatonError(f"undeclared state: {q}")
        return Weight(self.automaton.semiring, self.state_value(t, q))

    def evaluate(self, t: Tree) -> Weight:
        _check_ground(self.automaton, t)
        sr = self.automaton.semiring
        total = sr.zero
        for q in self.automaton.finals:
            total = sr.add(total, self.state_value(t, q))
        return Weight(sr, total)


def evaluate(A: Automaton, t: Tree) -> Weight:
    """The recognized series at t: sum over all runs to final states."""
    return Evaluator(A).evaluate(t)


def state_weight(A: Automaton, t: Tree, q: str) -> Weight:
    """wt_q(t): sum of the weights of all runs for t to state q."""
    _check_ground(A, t)
    return Evaluator(A).state_weight(t, q)


def runs_to_state(A: Automaton, t: Tree, q: str) -> tuple[Run, ...]:
    """All runs for t to q, ordered by (rule index, child-run order)."""
    _check_ground(A, t)
    if q not in A.states:
        raise AutomatonError(f"undeclared state: {q}")
    memo: dict = {}

    def rec(t, q):
        key = (t, q)
        hit = memo.get(key)
        if hit is not None:
            return hit
        out = []
        for rule in A._rules_by_target.get(q, ()):
            subs = match_lhs(rule, t)
            if subs is None or not constraints_ok(rule, subs):
                continue
            lists = [rec(sub, lbl) for sub, lbl in zip(subs, rule.state_labels)]
            for combo in product(*lists):
                out.append(Run(rule, combo))
        memo[key] = tuple(out)
        return memo[key]

    return rec(t, q)


def accepting_runs(A: Automaton, t: Tree) -> tuple[Run, ...]:
    """Valid (nonzero-weight) runs for t to a final state."""
    out = []
    for q in A.finals:
        for run in runs_to_state(A, t, q):
            if not run.weight.is_zero:
                out.append(run)
    return tuple(out)


class RunsTable:
    """All runs to real states on trees of height <= bound, computed by
    saturating the rule system rather than enumerating all trees.

    A pure sink is kept implicit: it accepts every tree with exactly one
    weight-one run, materialized on demand.
    """

    def __init__(self, A: Automaton, height_bound: int):
        if height_bound < 0:
            raise AutomatonError("height bound must be nonnegative")
        self.automaton = A
        self.bound = height_bound
        sink = A.pure_sink
        self._sink_memo: dict[Tree, Run] = {}
        self._langs: dict[str, dict[Tree, list[Run]]] = {
            q: {} for q in A.states if q != sink
        }
        self._run_sets: dict[tuple, set] = {}
        self._saturate(sink)
        trees = set()
        for lang in self._langs.values():
            trees.update(lang)
        self.trees = sorted(trees, key=tree_key)

    def _sink_run(self, t: Tree) -> Run:
        hit = self._sink_memo.get(t)
        if hit is None:
            rule = self.automaton.sink_rule_for(t.label)
            hit = Run(rule, tuple(self._sink_run(c) for c in t.children))
            self._sink_memo[t] = hit
        return hit

    def _saturate(self, sink):
        A = self.automaton
        bound = self.bound
        rules = [r for r in A.rules if r.target != sink]
        changed = True
        while changed:
            changed = False
            for rule in rules:
                domains = self._domains(rule, sink)
                if domains is None:
                    continue
                for combo in product(*domains):
                    class_tree = {}
                    t = rule.lhs
                    for cls, tc in zip(rule.classes, combo):
                        for p in cls:
                            class_tree[p] = tc
                            t = replace_at(t, p, tc)
                    if t.height > bound:
                        continue
                    options = []
                    for p, lbl in zip(rule.state_positions, rule.state_labels):
                        tc = class_tree[p]
                        if lbl == sink:
                            options.append((self._sink_run(tc),))
                        else:
                            options.append(tuple(self._langs[lbl][tc]))
                    for subruns in product(*options):
                        run = Run(rule, subruns)
                        key = (t, rule.target)
                        bucket = self._run_sets.get(key)
                        if bucket is None:
                            bucket = self._run_sets[key] = set()
                        if run not in bucket:
                            bucket.add(run)
                            self._langs[rule.target].setdefault(t, []).append(run)
                            changed = True

    def _domains(self, rule: Rule, sink):
        domains = []
        for cls, labels in zip(rule.classes, rule.class_labels):
            cap = self.bound - max(len(p) for p in cls)
            if cap < 0:
                return None
            real = [lbl for lbl in dict.fromkeys(labels) if lbl != sink]
            if real:
                base = [t for t in self._langs[real[0]] if t.height <= cap]
                for q in real[1:]:
                    lang = self._langs[q]
                    base = [t for t in base if t in lang]
            else:
                # Class constrains only pure-sink positions: any tree works.
                base = enumerate_trees(self.automaton.alphabet, cap)
            domains.append(base)
        return domains

    def runs(self, t: Tree, q: str) -> tuple[Run, ...]:
        sink = self.automaton.pure_sink
        if q == sink:
            return (self._sink_run(t),) if t.height <= self.bound else ()
        return tuple(self._langs[q].get(t, ()))

    def weight_value(self, t: Tree, q: str):
        sr = self.automaton.semiring
        total = sr.zero
        for run in self.runs(t, q):
            total = sr.add(total, run.weight.value)
        return total

    def state_weight(self, t: Tree, q: str) -> Weight:
        return Weight(self.automaton.semiring, self.weight_value(t, q))

    def evaluate_value(self, t: Tree):
        sr = self.automaton.semiring
        total = sr.zero
        for q in self.automaton.finals:
            total = sr.add(total, self.weight_value(t, q))
        return total

    def evaluate(self, t: Tree) -> Weight:
        return Weight(self.automaton.semiring, self.evaluate_value(t))

    def accepting_runs(self, t: Tree) -> tuple[Run, ...]:
        out = []
        for q in self.automaton.finals:
            for run in self.runs(t, q):
                if not run.weight.is_zero:
                    out.append(run)
        return tuple(out)

    def support(self):
        sr = self.automaton.semiring
        out = []
        for t in self.trees:
            v = self.evaluate_value(t)
            if v != sr.zero:
                out.append((t, Weight(sr, v)))
        return out

    def state_trees(self, q: str):
        sr = self.automaton.semiring
        out = []
        for t in self.trees:
            v = self.weight_value(t, q)
            if v != sr.zero:
                out.append((t, Weight(sr, v)))
        return out


def support_up_to(A: Automaton, height_bound: int):
    """All (tree, weight) with nonzero series value and height <= bound, in
    (height, size, text) order."""
    return RunsTable(A, height_bound).support()


def state_language_up_to(A: Automaton, q: str, height_bound: int):
    """All (tree, wt_q(tree)) with nonzero value and height <= bound."""
    if q not in A.states:
        raise AutomatonError(f"undeclared state: {q}")
    if q == A.pure_sink:
        one = A.semiring.one_weight
        return [(t, one) for t in enumerate_trees(A.alphabet, height_bound)]
    return RunsTable(A, height_bound).state_trees(q)


def check_unambiguous(A: Automaton, height_bound: int) -> Verdict:
    """First tree of height <= bound carrying two accepting runs, if any."""
    table = RunsTable(A, height_bound)
    for t in table.trees:
        acc = table.accepting_runs(t)
        if len(acc) > 1:
            return violated(
                height_bound,
                (t, acc),
                f"{len(acc)} accepting runs for {t.text}",
            )
    return verified(height_bound)

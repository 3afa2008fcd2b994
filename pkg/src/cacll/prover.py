"""Bounded, exhaustive, cut-free backward proof search for all three
calculi.

Branches are pruned on repeated sequents (modulo top-level structural
equivalence on the one-sided system), which keeps the top-level moves from
cycling without hurting completeness: a minimal proof never repeats a goal
along a branch.  An outcome of NotProvableExhaustive is only reported when
no branch was cut short by a budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import calculus as C
from . import formulas as F
from . import structures as S
from .calculus import CalculusConfig, OneSided, Proof, Sequent, Step

PROVED = "proved"
NOT_PROVABLE = "not-provable-exhaustive"
BUDGET = "budget-exhausted"


@dataclass(frozen=True)
class SearchBudget:
    max_depth: int = 64
    max_contractions_per_branch: Optional[int] = None

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


@dataclass(frozen=True)
class SearchOutcome:
    status: str
    proof: Optional[Proof] = None

    @property
    def proved(self) -> bool:
        return self.status == PROVED

    @property
    def exhaustive(self) -> bool:
        return self.status == NOT_PROVABLE


_CONTRACTION_RULES = ("qc", "contr")


def _count_contractable(f: F.Formula, sig, cls) -> int:
    n = 0
    if isinstance(f, (F.Bang, F.Quest)):
        if isinstance(f, cls) and f.label in sig and sig.has(f.label, "C"):
            n += 1
        n += _count_contractable(f.body, sig, cls)
    elif isinstance(f, F._BINARY):
        n += _count_contractable(f.left, sig, cls)
        n += _count_contractable(f.right, sig, cls)
    return n


def default_contraction_budget(seq: Sequent, cfg: CalculusConfig) -> int:
    """Twice the number of contractable modal subformula occurrences."""
    if isinstance(seq, OneSided):
        vals = S.leaf_values(seq.structure)
        cls = F.Quest
    else:
        vals = S.leaf_values(seq.antecedent) + [seq.succedent]
        cls = F.Bang
    return 2 * sum(_count_contractable(v, cfg.signature, cls) for v in vals)


def _goal_key(seq: Sequent):
    if isinstance(seq, OneSided):
        return S.canonical_member(seq.structure)
    return seq


def prove(seq: Sequent, cfg: CalculusConfig, budget: SearchBudget = SearchBudget()) -> SearchOutcome:
    """First proof under the fixed rule order, or a (possibly certified)
    failure."""
    if cfg.allow_cut:
        raise ValueError("search is cut-free; use allow_cut=False")
    bad = C.check_sequent(seq, cfg)
    if bad:
        raise C.MalformedProof(bad)
    contr = budget.max_contractions_per_branch
    if contr is None:
        contr = default_contraction_budget(seq, cfg)
    visited: set = set()

    def search(goal: Sequent, depth: int, contr_left: int):
        key = _goal_key(goal)
        if key in visited:
            return None, True
        if depth <= 0:
            return None, False
        visited.add(key)
        try:
            exhaustive = True
            for inst in C.applicable_rules(goal, cfg):
                c2 = contr_left
                if inst.rule in _CONTRACTION_RULES:
                    if contr_left <= 0:
                        exhaustive = False
                        continue
                    c2 = contr_left - 1
                subproofs = []
                failed = False
                for prem in inst.premises:
                    pr, exh = search(prem, depth - 1, c2)
                    if pr is None:
                        failed = True
                        if not exh:
                            exhaustive = False
                        break
                    subproofs.append(pr)
                if failed:
                    continue
                node = Proof(inst.conclusion, inst.rule, inst.data, tuple(subproofs))
                if inst.conclusion is not goal:
                    gens = S.sim_path(
                        inst.conclusion.structure, goal.structure  # type: ignore[attr-defined]
                    )
                    node = Proof(goal, "sim", Step(gens=gens), (node,))
                return node, True
            return None, exhaustive
        finally:
            visited.discard(key)

    proof, exhaustive = search(seq, budget.max_depth, contr)
    if proof is not None:
        _polarity_check(seq)
        return SearchOutcome(PROVED, proof)
    return SearchOutcome(NOT_PROVABLE if exhaustive else BUDGET)


def _polarity_check(seq: Sequent) -> None:
    """Provable one-sided sequents over translation images must carry
    counter sum n - 1 (checked whenever the counter is defined)."""
    if not isinstance(seq, OneSided):
        return
    values = S.leaf_values(seq.structure)
    from . import embedding

    if any(embedding.classify_leaf(v) is None for v in values):
        return
    try:
        total = S.counter_structure(seq.structure)
    except F.UndefinedCounter:
        return
    if total != len(values) - 1:
        raise AssertionError(
            f"provable translated sequent with counter sum {total}, "
            f"expected {len(values) - 1}"
        )


# -- the paper's two separating examples -------------------------------------

ASSOC_SIGNATURE = F.Signature.make(["a1"], (), {"a1": {"A1"}})
# The displayed classical proof re-associates under the ?a formula, so the
# label carries A1 (and nothing weakenable).
ZERO_SIGNATURE = F.Signature.make(["a"], (), {"a": {"A1"}})

ASSOC_SEQUENT_TEXT = "(a*b)*!a1.c |- a*(b*!a1.c)"
ZERO_SEQUENT_TEXT = "!a((r<-(0->q))<-p),(s<-p)->0 |- r"


@dataclass(frozen=True)
class CounterexampleReport:
    name: str
    sequent: Sequent
    intuitionistic: SearchOutcome
    translation: Sequent
    classical: SearchOutcome

    @property
    def separates(self) -> bool:
        return self.intuitionistic.exhaustive and self.classical.proved


def translate_sequent(seq: C.TwoSided) -> OneSided:
    """|- (neg-translated antecedent, translated succedent)."""
    return C.one_sided(
        S.pair(S.neg_translate(seq.antecedent), S.leaf(F.translate(seq.succedent)))
    )


def decide_paper_counterexamples(which: str, budget: SearchBudget = SearchBudget(max_depth=24)) -> CounterexampleReport:
    """Run one of the two separating examples end to end.

    'assoc': provable classically only because the translation can
    re-associate under an A1 subexponential.  'zero': same phenomenon for
    the 0 constant.  Raises if either half disagrees with the expected
    separation.
    """
    from . import syntax

    if which == "assoc":
        sig = ASSOC_SIGNATURE
        seq = syntax.parse_sequent(ASSOC_SEQUENT_TEXT)
        int_cfg = CalculusConfig("acll", sig)
    elif which == "zero":
        sig = ZERO_SIGNATURE
        seq = syntax.parse_sequent(ZERO_SEQUENT_TEXT)
        int_cfg = CalculusConfig("acll", sig, allow_zero=True)
    else:
        raise ValueError(f"unknown counterexample {which!r}")
    cls_cfg = CalculusConfig("cacll", sig, allow_zero=int_cfg.allow_zero)
    int_out = prove(seq, int_cfg, budget)
    tr = translate_sequent(seq)
    cls_out = prove(tr, cls_cfg, budget)
    report = CounterexampleReport(which, seq, int_out, tr, cls_out)
    if not int_out.exhaustive:
        raise AssertionError(
            f"{which}: expected certified intuitionistic failure, got {int_out.status}"
        )
    if not cls_out.proved:
        raise AssertionError(
            f"{which}: expected a classical proof of the translation, got {cls_out.status}"
        )
    C.assert_valid(cls_out.proof, cls_cfg)
    return report

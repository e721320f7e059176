"""Context-free grammars for word problems built from normal-form sections."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DataError, InputError, UnsupportedBackendError
from .group_oracle import (
    FreeAbelianOracle,
    FreeProductOracle,
    GroupOracle,
    IDENTITY,
    NormalForm,
    Word,
    format_word,
)

AXIOM = "S"


def tree_distance(u: Sequence[str], v: Sequence[str]) -> int:
    """|u'| + |v'| after removing the longest common prefix."""
    p = 0
    while p < len(u) and p < len(v) and u[p] == v[p]:
        p += 1
    return len(u) + len(v) - 2 * p


def _supports_section(oracle: GroupOracle) -> None:
    if isinstance(oracle, FreeAbelianOracle):
        raise UnsupportedBackendError("free abelian normal forms are not a quasi-isometric section")
    if isinstance(oracle, FreeProductOracle):
        for f in oracle.factors:
            _supports_section(f)


@dataclass
class QisSection:
    oracle: GroupOracle

    def __post_init__(self):
        _supports_section(self.oracle)

    def __call__(self, g: NormalForm) -> Word:
        return g.word()

    def word_of(self, w: Sequence[str]) -> Word:
        return self.oracle.normal_form(w).word()


def qis_section(oracle: GroupOracle) -> QisSection:
    return QisSection(oracle)


@dataclass
class QisReport:
    k: int
    analytic_bound: int
    sample_radius: int
    witness: tuple[str, str] | None  # (g, a) attaining k


def qis_constant(oracle: GroupOracle, sample_radius: int = 4) -> QisReport:
    """Largest d(σ(g), σ(ga)) over the sampled ball and all letters a."""
    if sample_radius < 2:
        raise InputError("sample radius must be at least 2")
    section = qis_section(oracle)
    bound = oracle.analytic_section_bound()
    best, witness = 0, None
    for g, _ in oracle.enumerate_ball_elements(None, sample_radius):
        sg = section(g)
        for a in oracle.alphabet:
            d = tree_distance(sg, section(oracle.step(g, a)))
            if d > best:
                best, witness = d, (str(g), a)
    if best > bound:
        raise DataError(f"section constant {best} exceeds the analytic bound {bound} at {witness}")
    return QisReport(best, bound, sample_radius, witness)


def variable_name(g: NormalForm) -> str:
    return f"[{g}]"


@dataclass
class Grammar:
    oracle: GroupOracle
    k: int
    elements: list[NormalForm]  # non-axiom variables, canonical order
    terminals: tuple[str, ...]
    unit: dict[str, list[str]]  # terminal -> heads (rules A -> a and S -> a)
    binary: dict[tuple[str, str], list[str]]  # (B, C) -> heads
    epsilon: bool = True

    @property
    def variables(self) -> list[str]:
        return [AXIOM] + [variable_name(g) for g in self.elements]

    def productions(self) -> list[tuple[str, tuple[str, ...]]]:
        out: list[tuple[str, tuple[str, ...]]] = []
        if self.epsilon:
            out.append((AXIOM, ()))
        for a, heads in self.unit.items():
            out.extend((h, (a,)) for h in heads)
        for (b, c), heads in self.binary.items():
            out.extend((h, (b, c)) for h in heads)
        order = {v: i for i, v in enumerate(self.variables)}
        out.sort(key=lambda p: (order[p[0]], len(p[1]), [order.get(x, -1) for x in p[1]], p[1]))
        return out

    def format_productions(self) -> list[str]:
        return [f"{a} -> {' '.join(rhs)}".rstrip() for a, rhs in self.productions()]


def grammar_variables(oracle: GroupOracle, k: int) -> list[NormalForm]:
    """Elements g with |σ(g)| ≤ k, in breadth-first order over the alphabet."""
    return [g for g, _ in oracle.enumerate_ball_elements(tuple(oracle.alphabet), k) if len(g) <= k]


def build_grammar(oracle: GroupOracle, k: int) -> Grammar:
    """The five rule families: S → ε; S → a with π(a) = 1; S → BC with BC = 1;
    A → BC with A = BC; A → a with A = π(a)."""
    if k < 1:
        raise InputError("k must be at least 1")
    _supports_section(oracle)
    elements = grammar_variables(oracle, k)
    members = set(elements)
    names = {g: variable_name(g) for g in elements}
    unit: dict[str, list[str]] = {}
    for a in oracle.alphabet:
        g = oracle.normal_form((a,))
        heads = []
        if g.is_identity:
            heads.append(AXIOM)
        if g in members:
            heads.append(names[g])
        unit[a] = heads
    binary: dict[tuple[str, str], list[str]] = {}
    for b, c in itertools.product(elements, repeat=2):
        bc = oracle.multiply(b, c)
        heads = []
        if bc.is_identity:
            heads.append(AXIOM)
        if bc in members:
            heads.append(names[bc])
        if heads:
            binary[names[b], names[c]] = heads
    return Grammar(oracle, k, elements, tuple(oracle.alphabet), unit, binary)


def _cyk_table(grammar: Grammar, word: Sequence[str]):
    n = len(word)
    table: dict[tuple[int, int], dict[str, tuple]] = {}
    for i, a in enumerate(word):
        if a not in grammar.unit:
            raise InputError(f"letter {a!r} is not a terminal")
        table[i, i + 1] = {h: (a,) for h in grammar.unit[a]}
    for length in range(2, n + 1):
        for i in range(n - length + 1):
            j = i + length
            cell: dict[str, tuple] = {}
            for m in range(i + 1, j):
                left, right = table[i, m], table[m, j]
                if not left or not right:
                    continue
                for b in left:
                    for c in right:
                        for h in grammar.binary.get((b, c), ()):
                            cell.setdefault(h, (m, b, c))
            table[i, j] = cell
    return table


def cyk_membership(grammar: Grammar, word: str | Sequence[str], parse: bool = False):
    """Whether S derives ``word``; with ``parse`` also returns a derivation tree."""
    word = grammar.oracle.check_word(word)
    if not word:
        return (grammar.epsilon, (AXIOM, ())) if parse else grammar.epsilon
    table = _cyk_table(grammar, word)
    ok = AXIOM in table[0, len(word)]
    if not parse:
        return ok
    if not ok:
        return False, None

    def build(sym, i, j):
        back = table[i, j][sym]
        if len(back) == 1:
            return (sym, back[0])
        m, b, c = back
        return (sym, build(b, i, m), build(c, m, j))

    return True, build(AXIOM, 0, len(word))


@dataclass
class LanguageReport:
    n: int
    kernel_counts: list[int]
    accepted_counts: list[int]
    words_checked: int
    mismatches: list[tuple[str, bool, bool]] = field(default_factory=list)  # (word, accepted, identity)

    @property
    def passed(self) -> bool:
        return not self.mismatches

    @property
    def counterexample(self) -> str | None:
        return self.mismatches[0][0] if self.mismatches else None


def language_equality_bounded(grammar: Grammar, oracle: GroupOracle, n: int) -> LanguageReport:
    """Compare CYK acceptance with the word problem on every word of length ≤ n."""
    if n > 12:
        raise InputError("n is capped at 12")
    letters = tuple(oracle.alphabet)
    kernel = [0] * (n + 1)
    accepted = [0] * (n + 1)
    mismatches = []
    checked = 0
    for length in range(n + 1):
        for word in itertools.product(letters, repeat=length):
            checked += 1
            ident = oracle.is_identity(word)
            acc = cyk_membership(grammar, word)
            kernel[length] += ident
            accepted[length] += acc
            if ident != acc:
                mismatches.append((format_word(word), acc, ident))
    return LanguageReport(n, kernel, accepted, checked, mismatches)


def derivation_constant(grammar: Grammar) -> int:
    """max over variables A of the length of a shortest word derived from A."""
    inf = float("inf")
    best = {v: inf for v in grammar.variables}
    if grammar.epsilon:
        best[AXIOM] = 0
    for a, heads in grammar.unit.items():
        for h in heads:
            best[h] = min(best[h], 1)
    changed = True
    while changed:
        changed = False
        for (b, c), heads in grammar.binary.items():
            total = best[b] + best[c]
            for h in heads:
                if total < best[h]:
                    best[h] = total
                    changed = True
    if any(v == inf for v in best.values()):
        missing = [v for v, x in best.items() if x == inf]
        raise DataError(f"variables derive no word: {missing[:5]}")
    return int(max(best.values()))


@dataclass
class Presentation:
    generators: list[str]
    relations: list[str]

    @property
    def deficiency(self) -> int:
        return len(self.generators) - len(self.relations)

    def __str__(self) -> str:
        return f"⟨ {', '.join(self.generators)} | {', '.join(self.relations)} ⟩"


def reachable_variables(grammar: Grammar) -> set[str]:
    seen = {AXIOM}
    stack = [AXIOM]
    by_head: dict[str, list[tuple[str, str]]] = {}
    for (b, c), heads in grammar.binary.items():
        for h in heads:
            by_head.setdefault(h, []).append((b, c))
    while stack:
        x = stack.pop()
        for b, c in by_head.get(x, ()):
            for y in (b, c):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
    return seen


def emit_presentation(grammar: Grammar) -> Presentation:
    """Generators V ∪ Σ, one relation per production of the pruned grammar."""
    keep = reachable_variables(grammar)
    gens = [v for v in grammar.variables if v in keep] + list(grammar.terminals)
    rels = []
    for head, rhs in grammar.productions():
        if head not in keep:
            continue
        if not rhs:
            rels.append(f"{head} = 1")
        else:
            rels.append(f"{head} = {'·'.join(rhs)}")
    return Presentation(gens, rels)


def default_grammar_k(oracle: GroupOracle, sample_radius: int = 4) -> int:
    return qis_constant(oracle, sample_radius).k


def identity_letter_present(oracle: GroupOracle) -> bool:
    return IDENTITY in oracle.alphabet


__all__ = [
    "AXIOM",
    "Grammar",
    "LanguageReport",
    "Presentation",
    "QisReport",
    "QisSection",
    "build_grammar",
    "cyk_membership",
    "default_grammar_k",
    "derivation_constant",
    "emit_presentation",
    "language_equality_bounded",
    "qis_constant",
    "qis_section",
    "tree_distance",
]

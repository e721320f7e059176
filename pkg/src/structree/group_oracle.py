"""Finitely generated groups given by normal-form machines.

Every oracle computes normal forms letter by letter through :meth:`GroupOracle.step`,
which is the transition of a deterministic pushdown machine whose stack is a
freely reduced word and whose state is a transversal letter.  Words are tuples of
letter strings; the formal inverse of a free letter ``a`` is spelled ``a^-1``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import yaml

from .errors import DataError, GroupFileError, InputError, UnsupportedBackendError

IDENTITY = "1"
INVERSE_SUFFIX = "^-1"

Word = tuple[str, ...]


def formal_inverse(letter: str) -> str:
    if letter.endswith(INVERSE_SUFFIX):
        return letter[: -len(INVERSE_SUFFIX)]
    return letter + INVERSE_SUFFIX


def parse_word(text: str | Sequence[str]) -> Word:
    """Split ``"a b^-1 t"`` into letters.  ``""``, ``"ε"`` and ``"1"`` alone give ε."""
    if not isinstance(text, str):
        return tuple(text)
    text = text.replace("⁻¹", INVERSE_SUFFIX).replace("ε", " ")
    letters = tuple(text.split())
    return letters


def format_word(word: Sequence[str]) -> str:
    return " ".join(word) if word else "ε"


def free_reduce(word: Iterable[str]) -> Word:
    out: list[str] = []
    for x in word:
        if out and out[-1] == formal_inverse(x):
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def _append_reduced(stack: Word, word: Word) -> Word:
    if not word:
        return stack
    out = list(stack)
    for x in word:
        if out and out[-1] == formal_inverse(x):
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True, order=True)
class NormalForm:
    """``free_part`` times the transversal letter ``coset_part``."""

    free_part: Word = ()
    coset_part: str = IDENTITY

    def word(self) -> Word:
        if self.coset_part == IDENTITY:
            return self.free_part
        return self.free_part + (self.coset_part,)

    @property
    def is_identity(self) -> bool:
        return not self.free_part and self.coset_part == IDENTITY

    def __len__(self) -> int:
        return len(self.word())

    def __str__(self) -> str:
        w = self.word()
        return " ".join(w) if w else IDENTITY

    def pair(self) -> str:
        return f"({format_word(self.free_part)},{self.coset_part})"


ONE = NormalForm()


@dataclass(frozen=True)
class Alphabet:
    letters: tuple[str, ...]
    involution: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.letters)) != len(self.letters):
            raise InputError(f"duplicate letters in alphabet {self.letters}")
        for x, y in self.involution.items():
            if x not in self.letters or y not in self.letters:
                raise InputError(f"involution pair {x}->{y} outside the alphabet")
            if x == y:
                raise InputError(f"formal inverse of {x} is {x} itself")
            if self.involution.get(y) != x:
                raise InputError(f"involution is not symmetric at {x}")

    def __contains__(self, letter: str) -> bool:
        return letter in self.letters

    def __iter__(self):
        return iter(self.letters)

    def __len__(self) -> int:
        return len(self.letters)


def _free_letters(generators: Sequence[str]) -> tuple[tuple[str, ...], dict[str, str]]:
    letters: list[str] = []
    inv: dict[str, str] = {}
    for x in generators:
        if not x or x == IDENTITY or x.endswith(INVERSE_SUFFIX) or " " in x:
            raise InputError(f"bad free generator name {x!r}")
        letters += [x, formal_inverse(x)]
        inv[x] = formal_inverse(x)
        inv[formal_inverse(x)] = x
    return tuple(letters), inv


class GroupOracle:
    """Common machinery; subclasses define ``alphabet``, ``kind`` and ``step``."""

    kind = "abstract"
    alphabet: Alphabet

    def step(self, g: NormalForm, letter: str) -> NormalForm:  # pragma: no cover
        raise NotImplementedError

    # word problem -----------------------------------------------------------

    def check_word(self, word: Sequence[str]) -> Word:
        word = parse_word(word)
        for x in word:
            if x not in self.alphabet:
                raise InputError(f"letter {x!r} is not in the alphabet {list(self.alphabet)}")
        return word

    def normal_form(self, word: str | Sequence[str]) -> NormalForm:
        g = ONE
        for x in self.check_word(word):
            g = self.step(g, x)
        return g

    def is_identity(self, word: str | Sequence[str]) -> bool:
        return self.normal_form(word).is_identity

    def multiply(self, g: NormalForm, h: NormalForm) -> NormalForm:
        for x in h.word():
            g = self.step(g, x)
        return g

    def letter_inverse(self, letter: str) -> Word:
        """A word representing the inverse of ``letter`` (found by search if not formal)."""
        cache = self.__dict__.setdefault("_inverse_cache", {})
        if letter not in cache:
            cache[letter] = self._search_inverse(letter)
        return cache[letter]

    def _search_inverse(self, letter: str) -> Word:
        if letter in self.alphabet.involution:
            return (self.alphabet.involution[letter],)
        start = self.normal_form((letter,))
        if start.is_identity:
            return ()
        seen = {start: ()}
        queue = deque([start])
        while queue:
            g = queue.popleft()
            for x in self.alphabet:
                h = self.step(g, x)
                if h in seen:
                    continue
                seen[h] = seen[g] + (x,)
                if h.is_identity:
                    return seen[h]
                queue.append(h)
        raise DataError(f"letter {letter} has no inverse")  # pragma: no cover

    def inverse_word(self, word: Sequence[str]) -> Word:
        return tuple(itertools.chain.from_iterable(self.letter_inverse(x) for x in reversed(word)))

    def inverse(self, g: NormalForm) -> NormalForm:
        return self.normal_form(self.inverse_word(g.word()))

    # generating sets --------------------------------------------------------

    def generators(self) -> tuple[str, ...]:
        """Default Cayley generating set: every letter except the identity letter."""
        return tuple(x for x in self.alphabet if x != IDENTITY)

    def check_generating_set(self, gens: Sequence[str]) -> tuple[str, ...]:
        gens = tuple(gens)
        for x in gens:
            if x not in self.alphabet:
                raise InputError(f"generator {x!r} is not a letter")
        images = {self.normal_form((x,)) for x in gens}
        if ONE in images:
            raise InputError("generating set contains a letter equal to the identity")
        for x in gens:
            if self.inverse(self.normal_form((x,))) not in images:
                raise InputError(f"generating set is not closed under inverses at {x}")
        return gens

    def enumerate_ball_elements(
        self, gens: Sequence[str] | None = None, radius: int = 1
    ) -> list[tuple[NormalForm, int]]:
        """All elements of word length at most ``radius``, in breadth-first order."""
        gens = self.generators() if gens is None else tuple(gens)
        for x in gens:
            if x not in self.alphabet:
                raise InputError(f"generator {x!r} is not a letter")
        dist = {ONE: 0}
        order = [ONE]
        layer = [ONE]
        for d in range(1, radius + 1):
            nxt = []
            for g in layer:
                for x in gens:
                    h = self.step(g, x)
                    if h not in dist:
                        dist[h] = d
                        order.append(h)
                        nxt.append(h)
            layer = nxt
        return [(g, dist[g]) for g in order]

    def analytic_section_bound(self) -> int:
        raise UnsupportedBackendError(f"{self.kind} groups have no quasi-isometric section")

    def describe(self) -> dict:  # pragma: no cover - overridden
        return {"type": self.kind}


class FreeGroupOracle(GroupOracle):
    kind = "free"

    def __init__(self, generators: Sequence[str]):
        self.free_generators = tuple(generators)
        letters, inv = _free_letters(self.free_generators)
        self.alphabet = Alphabet(letters, inv)

    def step(self, g: NormalForm, letter: str) -> NormalForm:
        return NormalForm(_append_reduced(g.free_part, (letter,)), IDENTITY)

    def analytic_section_bound(self) -> int:
        return 2

    def describe(self) -> dict:
        return {"type": "free", "free_generators": list(self.free_generators)}


@dataclass(frozen=True)
class VirtuallyFreeData:
    """Rewrite data ``s b -> x r`` for a free subgroup ``F(X)`` with transversal ``R``."""

    free_generators: tuple[str, ...]
    transversal: tuple[str, ...]
    rules: Mapping[tuple[str, str], tuple[Word, str]]

    def __post_init__(self):
        if IDENTITY not in self.transversal:
            raise DataError("the transversal must contain the identity letter '1'")
        letters, _ = _free_letters(self.free_generators)
        clash = set(letters) & set(self.transversal)
        if clash:
            raise DataError(f"letters {sorted(clash)} are both free and transversal")
        sigma = set(letters) | set(self.transversal)
        for (s, b), (x, r) in self.rules.items():
            if s not in self.transversal:
                raise DataError(f"rule state {s!r} is not a transversal letter")
            if b not in sigma:
                raise DataError(f"rule input {b!r} is not a letter")
            if r not in self.transversal:
                raise DataError(f"rule target {r!r} is not a transversal letter")
            for y in x:
                if y not in letters:
                    raise DataError(f"rule word for ({s},{b}) uses non-free letter {y!r}")
            if free_reduce(x) != tuple(x):
                raise DataError(f"rule word for ({s},{b}) is not freely reduced")

    @property
    def max_rule_length(self) -> int:
        return max((len(x) for x, _ in self.rules.values()), default=0)


class VirtuallyFreeOracle(GroupOracle):
    kind = "virtually_free"

    def __init__(self, data: VirtuallyFreeData):
        self.data = data
        free_letters, inv = _free_letters(data.free_generators)
        self._free = frozenset(free_letters)
        self.alphabet = Alphabet(free_letters + tuple(data.transversal), inv)

    def rule(self, state: str, letter: str) -> tuple[Word, str]:
        found = self.data.rules.get((state, letter))
        if found is not None:
            return found
        if state == IDENTITY:
            return ((letter,), IDENTITY) if letter in self._free else ((), letter)
        if letter == IDENTITY:
            return (), state
        raise DataError(f"rule table has no entry for ({state},{letter})")

    def step(self, g: NormalForm, letter: str) -> NormalForm:
        x, r = self.rule(g.coset_part, letter)
        return NormalForm(_append_reduced(g.free_part, x), r)

    def analytic_section_bound(self) -> int:
        return 2 * self.data.max_rule_length + 2

    def describe(self) -> dict:
        return {
            "type": "virtually_free",
            "free_generators": list(self.data.free_generators),
            "transversal": list(self.data.transversal),
            "rules": {
                f"{s},{b}": {"x": " ".join(x), "r": r}
                for (s, b), (x, r) in sorted(self.data.rules.items())
            },
        }


class FiniteTableOracle(GroupOracle):
    """A finite group; every element is a letter and a transversal state."""

    kind = "finite"

    def __init__(self, elements: Sequence[str], table: Mapping[tuple[str, str], str]):
        self.elements = tuple(elements)
        if IDENTITY not in self.elements:
            raise DataError("finite group elements must include '1'")
        self.table = dict(table)
        for x in self.elements:
            self.table.setdefault((IDENTITY, x), x)
            self.table.setdefault((x, IDENTITY), x)
        for x, y in itertools.product(self.elements, repeat=2):
            z = self.table.get((x, y))
            if z is None:
                raise DataError(f"multiplication table has no entry for ({x},{y})")
            if z not in self.elements:
                raise DataError(f"product {x}*{y} = {z!r} is not an element")
        for x in self.elements:
            row = {self.table[x, y] for y in self.elements}
            if len(row) != len(self.elements):
                raise DataError(f"row {x} of the multiplication table is not a permutation")
        for x, y, z in itertools.product(self.elements, repeat=3):
            if self.table[self.table[x, y], z] != self.table[x, self.table[y, z]]:
                raise DataError(f"multiplication is not associative at ({x},{y},{z})")
        self.alphabet = Alphabet(self.elements)

    @classmethod
    def cyclic(cls, order: int, letter: str) -> "FiniteTableOracle":
        """Cyclic group spelled with ``letter`` and ``letter^-1`` (order 3 only) or powers."""
        names = [IDENTITY]
        for i in range(1, order):
            if order == 3 and i == 2:
                names.append(formal_inverse(letter))
            elif i == 1:
                names.append(letter)
            else:
                names.append(f"{letter}{i}")
        table = {(names[i], names[j]): names[(i + j) % order] for i in range(order) for j in range(order)}
        return cls(names, table)

    def step(self, g: NormalForm, letter: str) -> NormalForm:
        return NormalForm((), self.table[g.coset_part, letter])

    def analytic_section_bound(self) -> int:
        return 2

    def describe(self) -> dict:
        return {
            "type": "finite",
            "elements": list(self.elements),
            "table": {f"{x},{y}": z for (x, y), z in sorted(self.table.items())},
        }


class FreeAbelianOracle(GroupOracle):
    """ℤ^n; normal forms spell each exponent in generator order."""

    kind = "free_abelian"

    def __init__(self, generators: Sequence[str]):
        self.free_generators = tuple(generators)
        letters, inv = _free_letters(self.free_generators)
        self.alphabet = Alphabet(letters, inv)
        self._index = {x: i for i, x in enumerate(self.free_generators)}

    def exponents(self, g: NormalForm) -> list[int]:
        e = [0] * len(self.free_generators)
        for x in g.free_part:
            if x.endswith(INVERSE_SUFFIX):
                e[self._index[formal_inverse(x)]] -= 1
            else:
                e[self._index[x]] += 1
        return e

    def from_exponents(self, e: Sequence[int]) -> NormalForm:
        word: list[str] = []
        for x, n in zip(self.free_generators, e):
            word += [x] * n if n > 0 else [formal_inverse(x)] * (-n)
        return NormalForm(tuple(word), IDENTITY)

    def step(self, g: NormalForm, letter: str) -> NormalForm:
        e = self.exponents(g)
        if letter.endswith(INVERSE_SUFFIX):
            e[self._index[formal_inverse(letter)]] -= 1
        else:
            e[self._index[letter]] += 1
        return self.from_exponents(e)

    def describe(self) -> dict:
        return {"type": "free_abelian", "free_generators": list(self.free_generators)}


class FreeProductOracle(GroupOracle):
    """Free product of oracles with pairwise disjoint alphabets.

    A normal form is the concatenation of factor normal forms (syllables) from
    alternating factors; ``coset_part`` is always the identity letter.
    """

    kind = "free_product"

    def __init__(self, factors: Sequence[GroupOracle]):
        self.factors = tuple(factors)
        letters: list[str] = []
        inv: dict[str, str] = {}
        self._factor_of: dict[str, int] = {}
        has_identity = False
        for i, f in enumerate(self.factors):
            for x in f.alphabet:
                if x == IDENTITY:
                    has_identity = True
                    continue
                if x in self._factor_of:
                    raise DataError(f"letter {x!r} occurs in two free factors")
                self._factor_of[x] = i
                letters.append(x)
            inv.update(f.alphabet.involution)
        if has_identity:
            letters.append(IDENTITY)
        self.alphabet = Alphabet(tuple(letters), inv)

    def _last_syllable(self, word: Word) -> tuple[int, int]:
        """Return (factor index, start position) of the last syllable of ``word``."""
        if not word:
            return -1, 0
        i = self._factor_of[word[-1]]
        start = len(word)
        while start > 0 and self._factor_of[word[start - 1]] == i:
            start -= 1
        return i, start

    def step(self, g: NormalForm, letter: str) -> NormalForm:
        if letter == IDENTITY:
            return g
        word = g.free_part
        j = self._factor_of[letter]
        i, start = self._last_syllable(word)
        factor = self.factors[j]
        if i == j:
            syl = factor.step(factor.normal_form(word[start:]), letter)
            return NormalForm(word[:start] + syl.word(), IDENTITY)
        syl = factor.step(ONE, letter)
        return NormalForm(word + syl.word(), IDENTITY)

    def syllables(self, g: NormalForm) -> list[tuple[int, NormalForm]]:
        out = []
        word = g.free_part
        while word:
            i, start = self._last_syllable(word)
            out.append((i, self.factors[i].normal_form(word[start:])))
            word = word[:start]
        return out[::-1]

    def analytic_section_bound(self) -> int:
        return max(f.analytic_section_bound() for f in self.factors)

    def describe(self) -> dict:
        return {"type": "free_product", "factors": [f.describe() for f in self.factors]}


# ---------------------------------------------------------------------------
# group specification files


def _node_line(node) -> int:
    return node.start_mark.line + 1


def _mapping(node, path: str) -> dict[str, tuple[object, object]]:
    """Map keys of a YAML mapping node to (key node, value node)."""
    if not isinstance(node, yaml.MappingNode):
        raise GroupFileError("expected a mapping", path, _node_line(node))
    out = {}
    for k, v in node.value:
        if not isinstance(k, yaml.ScalarNode):
            raise GroupFileError("mapping keys must be plain strings", path, _node_line(k))
        if k.value in out:
            raise GroupFileError(f"duplicate key {k.value!r}", path, _node_line(k))
        out[k.value] = (k, v)
    return out


def _scalar(node, path: str, what: str) -> str:
    if not isinstance(node, yaml.ScalarNode):
        raise GroupFileError(f"{what} must be a string", path, _node_line(node))
    return str(node.value)


def _string_list(node, path: str, what: str) -> list[str]:
    if not isinstance(node, yaml.SequenceNode):
        raise GroupFileError(f"{what} must be a list", path, _node_line(node))
    return [_scalar(item, path, what + " entry") for item in node.value]


def _require(fields: dict, key: str, node, path: str):
    if key not in fields:
        raise GroupFileError(f"missing field {key!r}", path, _node_line(node))
    return fields[key][1]


def _pair_key(text: str, knode, path: str) -> tuple[str, str]:
    parts = [p.strip() for p in text.replace("⁻¹", INVERSE_SUFFIX).split(",")]
    if len(parts) != 2 or not all(parts):
        raise GroupFileError(f"key {text!r} must look like 's,b'", path, _node_line(knode))
    return parts[0], parts[1]


def _oracle_from_node(node, path: str) -> GroupOracle:
    fields = _mapping(node, path)
    kind = _scalar(_require(fields, "type", node, path), path, "type")
    try:
        if kind == "free":
            gens = _string_list(_require(fields, "free_generators", node, path), path, "free_generators")
            return FreeGroupOracle(gens)
        if kind == "free_abelian":
            gens = _string_list(_require(fields, "free_generators", node, path), path, "free_generators")
            return FreeAbelianOracle(gens)
        if kind == "virtually_free":
            gens = _string_list(_require(fields, "free_generators", node, path), path, "free_generators")
            trans = _string_list(_require(fields, "transversal", node, path), path, "transversal")
            rules_node = _require(fields, "rules", node, path)
            rules = {}
            for key, (knode, vnode) in _mapping(rules_node, path).items():
                s, b = _pair_key(key, knode, path)
                body = _mapping(vnode, path)
                x = parse_word(_scalar(_require(body, "x", vnode, path), path, "x"))
                r = _scalar(_require(body, "r", vnode, path), path, "r")
                if x == (IDENTITY,):
                    x = ()
                try:
                    VirtuallyFreeData(tuple(gens), tuple(trans), {(s, b): (x, r)})
                except DataError as exc:
                    raise GroupFileError(str(exc), path, _node_line(knode)) from None
                rules[s, b] = (x, r)
            return VirtuallyFreeOracle(VirtuallyFreeData(tuple(gens), tuple(trans), rules))
        if kind == "finite":
            elements = _string_list(_require(fields, "elements", node, path), path, "elements")
            table = {}
            for key, (knode, vnode) in _mapping(_require(fields, "table", node, path), path).items():
                table[_pair_key(key, knode, path)] = _scalar(vnode, path, "table entry")
            return FiniteTableOracle(elements, table)
        if kind == "free_product":
            factors_node = _require(fields, "factors", node, path)
            if not isinstance(factors_node, yaml.SequenceNode):
                raise GroupFileError("factors must be a list", path, _node_line(factors_node))
            return FreeProductOracle([_oracle_from_node(f, path) for f in factors_node.value])
    except (DataError, InputError) as exc:
        if isinstance(exc, GroupFileError):
            raise
        raise GroupFileError(str(exc), path, _node_line(node)) from None
    raise GroupFileError(
        f"unknown type {kind!r} (expected virtually_free, free, finite, free_product, free_abelian)",
        path,
        _node_line(fields["type"][1]),
    )


def load_group_text(text: str, path: str = "<group>") -> GroupOracle:
    try:
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise GroupFileError(f"cannot parse: {getattr(exc, 'problem', exc)}", path, line) from None
    if node is None:
        raise GroupFileError("empty group file", path, 1)
    return _oracle_from_node(node, path)


def load_group_file(path: str | Path) -> GroupOracle:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise GroupFileError(f"cannot read: {exc.strerror}", str(path)) from None
    return load_group_text(text, str(path))


def dump_group(oracle: GroupOracle) -> str:
    return yaml.safe_dump(oracle.describe(), sort_keys=False, allow_unicode=True)

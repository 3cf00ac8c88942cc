"""Dataset ingestion: vocabulary, triple sets, relation statistics, filter index.

Triple files are UTF-8 text, one fact per line, fields separated by a single
TAB: ``head<TAB>relation<TAB>tail`` with an optional fourth field ``1``/``-1``
for labeled (classification) files.  Lines are order-significant and there is
no header.
"""

from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

import numpy as np

CATEGORY_1_1 = "1-1"
CATEGORY_1_N = "1-N"
CATEGORY_N_1 = "N-1"
CATEGORY_N_N = "N-N"
CATEGORIES = (CATEGORY_1_1, CATEGORY_1_N, CATEGORY_N_1, CATEGORY_N_N)

DEFAULT_CATEGORY_CUTOFF = 1.5


class ParseError(ValueError):
    """A malformed line in a triple file; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class UnknownNameError(KeyError):
    """A name was looked up in a frozen vocabulary that does not contain it."""


class UnknownRelationError(KeyError):
    """A relation without statistics was queried."""


class Vocabulary:
    """Bidirectional name <-> dense-index maps for entities and relations.

    Indices are assigned contiguously in first-encounter order.  Once
    ``freeze()`` is called, lookups of unseen names raise
    :class:`UnknownNameError` instead of growing the maps; evaluation code
    freezes the vocabulary so out-of-vocabulary names are a hard error.
    """

    def __init__(self):
        self._entity_ids: dict[str, int] = {}
        self._entity_names: list[str] = []
        self._relation_ids: dict[str, int] = {}
        self._relation_names: list[str] = []
        self.frozen = False

    @property
    def num_entities(self) -> int:
        return len(self._entity_names)

    @property
    def num_relations(self) -> int:
        return len(self._relation_names)

    def freeze(self) -> "Vocabulary":
        self.frozen = True
        return self

    def entity_id(self, name: str) -> int:
        eid = self._entity_ids.get(name)
        if eid is None:
            if self.frozen:
                raise UnknownNameError(f"unknown entity: {name!r}")
            eid = len(self._entity_names)
            self._entity_ids[name] = eid
            self._entity_names.append(name)
        return eid

    def relation_id(self, name: str) -> int:
        rid = self._relation_ids.get(name)
        if rid is None:
            if self.frozen:
                raise UnknownNameError(f"unknown relation: {name!r}")
            rid = len(self._relation_names)
            self._relation_ids[name] = rid
            self._relation_names.append(name)
        return rid

    def entity_name(self, eid: int) -> str:
        return self._entity_names[eid]

    def relation_name(self, rid: int) -> str:
        return self._relation_names[rid]

    def has_entity(self, name: str) -> bool:
        return name in self._entity_ids

    def has_relation(self, name: str) -> bool:
        return name in self._relation_ids


class Triple(tuple):
    """A (head, relation, tail) fact over dense vocabulary indices."""

    __slots__ = ()

    def __new__(cls, head: int, relation: int, tail: int):
        return tuple.__new__(cls, (head, relation, tail))

    @property
    def head(self) -> int:
        return self[0]

    @property
    def relation(self) -> int:
        return self[1]

    @property
    def tail(self) -> int:
        return self[2]

    def __repr__(self):
        return f"Triple(head={self[0]}, relation={self[1]}, tail={self[2]})"


@dataclass
class TripleSet:
    """An ordered list of triples belonging to one split.

    ``labels`` is present only for classification valid/test sets and holds
    one boolean per triple (True = positive fact).
    """

    triples: list[Triple]
    split: str = "train"
    labels: list[bool] | None = None

    def __post_init__(self):
        if self.labels is not None and len(self.labels) != len(self.triples):
            raise ValueError(
                f"labels length {len(self.labels)} != triple count {len(self.triples)}"
            )

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (heads, relations, tails) as int64 arrays."""
        if not self.triples:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty.copy(), empty.copy()
        arr = np.asarray(self.triples, dtype=np.int64)
        return arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy()


def _iter_lines(source) -> Iterable[str]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from fh
    else:
        yield from source


def load_triples(
    source: str | Path | IO[str] | Iterable[str],
    vocab: Vocabulary,
    split: str = "train",
    labeled: bool = False,
) -> TripleSet:
    """Parse a triple file/stream into a TripleSet, growing ``vocab``.

    Unseen names are appended to the vocabulary in first-encounter order
    (head, then relation, then tail within a line).  Empty lines are skipped.
    With ``labeled=True`` each line must carry a fourth field ``1`` or ``-1``.

    Raises ParseError (with line number) for a wrong field count or a bad
    label, and UnknownNameError if the vocabulary is frozen and a new name
    appears.
    """
    triples: list[Triple] = []
    labels: list[bool] | None = [] if labeled else None
    expected_fields = 4 if labeled else 3

    for line_number, raw in enumerate(_iter_lines(source), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != expected_fields:
            detail = "missing label field" if labeled and len(fields) == 3 else (
                f"expected {expected_fields} tab-separated fields, got {len(fields)}"
            )
            raise ParseError(detail, line_number)
        h = vocab.entity_id(fields[0])
        r = vocab.relation_id(fields[1])
        t = vocab.entity_id(fields[2])
        triples.append(Triple(h, r, t))
        if labeled:
            if fields[3] == "1":
                labels.append(True)
            elif fields[3] == "-1":
                labels.append(False)
            else:
                raise ParseError(f"label must be 1 or -1, got {fields[3]!r}", line_number)

    return TripleSet(triples=triples, split=split, labels=labels)


def categorize(tph: float, hpt: float, cutoff: float = DEFAULT_CATEGORY_CUTOFF) -> str:
    """Map (tails-per-head, heads-per-tail) to a mapping category.

    Total over all real inputs: below the cutoff on both axes is 1-1, at or
    above on exactly one axis is 1-N / N-1, at or above on both is N-N.
    """
    if tph < cutoff and hpt < cutoff:
        return CATEGORY_1_1
    if tph >= cutoff and hpt < cutoff:
        return CATEGORY_1_N
    if tph < cutoff and hpt >= cutoff:
        return CATEGORY_N_1
    return CATEGORY_N_N


@dataclass(frozen=True)
class RelationProfile:
    tph: float
    hpt: float
    category: str


class RelationStats:
    """Per-relation multiplicity statistics derived from a training split."""

    def __init__(self, profiles: dict[int, RelationProfile], cutoff: float):
        self._profiles = dict(profiles)
        self.cutoff = cutoff

    def __contains__(self, relation: int) -> bool:
        return relation in self._profiles

    def relations(self):
        return self._profiles.keys()

    def _get(self, relation: int) -> RelationProfile:
        try:
            return self._profiles[relation]
        except KeyError:
            raise UnknownRelationError(f"unknown relation: {relation}") from None

    def tph(self, relation: int) -> float:
        return self._get(relation).tph

    def hpt(self, relation: int) -> float:
        return self._get(relation).hpt

    def category(self, relation: int) -> str:
        return self._get(relation).category

    def head_replace_probability(self, relation: int) -> float:
        """Probability of corrupting the head under Bernoulli sampling."""
        p = self._get(relation)
        return p.tph / (p.tph + p.hpt)


def compute_relation_stats(
    train: TripleSet, cutoff: float = DEFAULT_CATEGORY_CUTOFF
) -> RelationStats:
    """Compute tails-per-head, heads-per-tail, and category per relation.

    tph = (#triples with the relation) / (#distinct heads under it); hpt is
    the analogue with tails.  Relations with zero triples are absent from the
    result and raise UnknownRelationError when queried.
    """
    if cutoff <= 0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    counts: dict[int, int] = defaultdict(int)
    heads: dict[int, set[int]] = defaultdict(set)
    tails: dict[int, set[int]] = defaultdict(set)
    for h, r, t in train:
        counts[r] += 1
        heads[r].add(h)
        tails[r].add(t)

    profiles = {}
    for r, n in counts.items():
        tph = n / len(heads[r])
        hpt = n / len(tails[r])
        profiles[r] = RelationProfile(tph=tph, hpt=hpt, category=categorize(tph, hpt, cutoff))
    return RelationStats(profiles, cutoff)


class FilterIndex:
    """Membership and adjacency over the union of all known triples.

    Used by the "filter" evaluation setting to discard corrupted triples that
    are themselves known facts, and by the negative sampler to avoid drawing
    known facts as negatives.
    """

    def __init__(self, membership: set[Triple], tails_of, heads_of):
        self._membership = membership
        self._tails_of = tails_of
        self._heads_of = heads_of

    def __contains__(self, triple) -> bool:
        return tuple(triple) in self._membership

    def __len__(self) -> int:
        return len(self._membership)

    def known_tails(self, head: int, relation: int) -> frozenset:
        return self._tails_of.get((head, relation), frozenset())

    def known_heads(self, relation: int, tail: int) -> frozenset:
        return self._heads_of.get((relation, tail), frozenset())

    @property
    def membership(self) -> set:
        return self._membership


def build_filter_index(
    train: TripleSet,
    valid: TripleSet | None = None,
    test: TripleSet | None = None,
) -> FilterIndex:
    """Deduplicated membership/adjacency index over the given splits."""
    membership: set = set()
    tails_of: dict[tuple[int, int], set] = defaultdict(set)
    heads_of: dict[tuple[int, int], set] = defaultdict(set)
    for split in (train, valid, test):
        if split is None:
            continue
        for h, r, t in split:
            key = (h, r, t)
            if key in membership:
                continue
            membership.add(key)
            tails_of[(h, r)].add(t)
            heads_of[(r, t)].add(h)
    tails_frozen = {k: frozenset(v) for k, v in tails_of.items()}
    heads_frozen = {k: frozenset(v) for k, v in heads_of.items()}
    return FilterIndex(membership, tails_frozen, heads_frozen)


def illposedness_ratio(num_triples: int, num_entities: int, num_relations: int) -> float:
    """Triples per parameter row: T / (E + R).

    An embedding dimension at or above this ratio makes the fact-matching
    equation system carry at least as many free parameters as equations.
    """
    denom = num_entities + num_relations
    if denom <= 0:
        raise ValueError("entity + relation count must be positive")
    return num_triples / denom

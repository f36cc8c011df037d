"""Triple store: vocabulary, typed entities, graph assembly and numeric export.

Input files are flattened TSVs (UTF-8, tab separated):

* triple files: ``subject<TAB>predicate<TAB>object`` per line;
* annotation files: ``entity<TAB>term1 term2 ...`` (terms whitespace separated);
* link files (cross-ontology edges): triple TSVs whose predicate column is
  replaced by a dedicated relation label, or two-column ``class<TAB>class``.

The numeric export follows the classic embedding-trainer layout: id files as
``string<TAB>id``, triple files prefixed with their count, triples written as
``e1 e2 rel`` (head tail relation), space separated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .errors import ConsistencyError, ParseError

ASSOCIATION_RELATION = "association"
LD_RELATION = "logicalDefinition"
MAP_RELATION = "ontologyMapping"


def annotation_relation(source: str) -> str:
    """Relation label for annotation edges of one ontology source."""
    return f"hasAnnotation_{source}"


class EntityKind(enum.Enum):
    ONTOLOGY_CLASS = "class"
    GENE = "gene"
    DISEASE = "disease"


class Triple(NamedTuple):
    head: int
    relation: int
    tail: int


class Vocabulary:
    """Bijective string<->dense-id maps for entities and relations.

    Ids are handed out contiguously from 0 at first sight.  Every entity
    carries exactly one :class:`EntityKind`; re-registering with a different
    kind is an error.
    """

    def __init__(self) -> None:
        self._ent_to_id: dict[str, int] = {}
        self._ent_names: list[str] = []
        self._rel_to_id: dict[str, int] = {}
        self._rel_names: list[str] = []
        self.kinds: dict[int, EntityKind] = {}

    def add_entity(self, name: str, kind: EntityKind = EntityKind.ONTOLOGY_CLASS) -> int:
        eid = self._ent_to_id.get(name)
        if eid is None:
            eid = len(self._ent_names)
            self._ent_to_id[name] = eid
            self._ent_names.append(name)
            self.kinds[eid] = kind
        elif self.kinds[eid] is not kind:
            raise ConsistencyError(
                f"entity {name!r} already registered as {self.kinds[eid].value}, "
                f"cannot re-register as {kind.value}"
            )
        return eid

    def add_relation(self, name: str) -> int:
        rid = self._rel_to_id.get(name)
        if rid is None:
            rid = len(self._rel_names)
            self._rel_to_id[name] = rid
            self._rel_names.append(name)
        return rid

    def entity_id(self, name: str) -> int:
        return self._ent_to_id[name]

    def relation_id(self, name: str) -> int:
        return self._rel_to_id[name]

    def entity_name(self, eid: int) -> str:
        return self._ent_names[eid]

    def relation_name(self, rid: int) -> str:
        return self._rel_names[rid]

    def has_entity(self, name: str) -> bool:
        return name in self._ent_to_id

    def has_relation(self, name: str) -> bool:
        return name in self._rel_to_id

    @property
    def num_entities(self) -> int:
        return len(self._ent_names)

    @property
    def num_relations(self) -> int:
        return len(self._rel_names)

    def entities_of_kind(self, kind: EntityKind) -> list[int]:
        return [eid for eid in range(self.num_entities) if self.kinds[eid] is kind]


@dataclass
class AnnotationTable:
    """Annotations of one source file: entity -> ontology terms."""

    relation: str
    kind: EntityKind
    entries: list[tuple[int, list[int]]] = field(default_factory=list)

    @property
    def num_entities(self) -> int:
        return len(self.entries)

    @property
    def num_edges(self) -> int:
        return sum(len(terms) for _, terms in self.entries)


def _read_lines(path: str | Path) -> Iterable[tuple[int, str]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if line:
                yield lineno, line


def load_triples(path: str | Path, vocab: Vocabulary) -> list[Triple]:
    """Parse a 3-column triple TSV, registering fresh names in `vocab`.

    Line order is preserved.  An empty file yields an empty list.
    """
    triples: list[Triple] = []
    for lineno, line in _read_lines(path):
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(f"{path}:{lineno}: expected 3 tab-separated fields, got {len(fields)}")
        s, p, o = fields
        triples.append(Triple(vocab.add_entity(s), vocab.add_relation(p), vocab.add_entity(o)))
    return triples


def load_links(path: str | Path, vocab: Vocabulary, relation: str) -> list[Triple]:
    """Parse a cross-ontology link file, forcing the dedicated relation label.

    Accepts 3-column triples (predicate column ignored) or bare 2-column
    ``class<TAB>class`` pairs.
    """
    rid = vocab.add_relation(relation)
    triples: list[Triple] = []
    for lineno, line in _read_lines(path):
        fields = line.split("\t")
        if len(fields) == 3:
            s, o = fields[0], fields[2]
        elif len(fields) == 2:
            s, o = fields
        else:
            raise ParseError(f"{path}:{lineno}: expected 2 or 3 fields, got {len(fields)}")
        triples.append(Triple(vocab.add_entity(s), rid, vocab.add_entity(o)))
    return triples


def load_annotations(
    path: str | Path, kind: EntityKind, vocab: Vocabulary, source: str
) -> AnnotationTable:
    """Parse an ``entity<TAB>terms`` annotation file.

    Entities are registered with `kind`; terms become ontology classes.
    Duplicate entity lines are merged (set union, first-seen order).  A term
    equal to its own entity is rejected as a self-annotation.
    """
    table = AnnotationTable(relation=annotation_relation(source), kind=kind)
    by_entity: dict[int, list[int]] = {}
    seen: dict[int, set[int]] = {}
    for lineno, line in _read_lines(path):
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(f"{path}:{lineno}: expected 2 tab-separated fields, got {len(fields)}")
        name, term_part = fields
        eid = vocab.add_entity(name, kind)
        terms = by_entity.setdefault(eid, [])
        term_set = seen.setdefault(eid, set())
        for term in term_part.split():
            if term == name:
                raise ParseError(f"{path}:{lineno}: self-annotation {name!r}")
            tid = vocab.add_entity(term, EntityKind.ONTOLOGY_CLASS)
            if tid not in term_set:
                term_set.add(tid)
                terms.append(tid)
    table.entries = [(eid, by_entity[eid]) for eid in by_entity]
    return table


@dataclass(frozen=True)
class KgStats:
    """Headline counts of an assembled graph (classes, annotations, links)."""

    n_triples: int
    n_classes: int
    n_gene_annotated: int
    n_disease_annotated: int
    n_ld: int
    n_map: int
    n_association: int


class KnowledgeGraph:
    """Immutable deduplicated triple list plus adjacency and kind indices."""

    def __init__(self, triples: Sequence[Triple], vocab: Vocabulary, variant: str) -> None:
        deduped: list[Triple] = []
        seen: set[Triple] = set()
        for t in triples:
            if t not in seen:
                seen.add(t)
                deduped.append(t)
        self.triples: tuple[Triple, ...] = tuple(deduped)
        self.triple_set: frozenset[Triple] = frozenset(seen)
        self.vocab = vocab
        self.variant = variant
        out: dict[int, list[tuple[int, int]]] = {}
        for h, r, t in self.triples:
            out.setdefault(h, []).append((r, t))
        # sorted adjacency keeps walk generation independent of input order
        self.out_edges: dict[int, tuple[tuple[int, int], ...]] = {
            h: tuple(sorted(edges)) for h, edges in out.items()
        }

    def __contains__(self, triple: Triple) -> bool:
        return triple in self.triple_set

    @property
    def num_entities(self) -> int:
        return self.vocab.num_entities

    @property
    def num_relations(self) -> int:
        return self.vocab.num_relations

    def entities_in_triples(self) -> set[int]:
        present: set[int] = set()
        for h, _, t in self.triples:
            present.add(h)
            present.add(t)
        return present

    def stats(self) -> KgStats:
        present = self.entities_in_triples()
        kinds = self.vocab.kinds
        n_classes = sum(1 for e in present if kinds[e] is EntityKind.ONTOLOGY_CLASS)
        genes: set[int] = set()
        diseases: set[int] = set()
        n_ld = n_map = n_assoc = 0
        for h, r, t in self.triples:
            rel = self.vocab.relation_name(r)
            if rel.startswith("hasAnnotation_"):
                if kinds[h] is EntityKind.GENE:
                    genes.add(h)
                elif kinds[h] is EntityKind.DISEASE:
                    diseases.add(h)
            elif rel == LD_RELATION:
                n_ld += 1
            elif rel == MAP_RELATION:
                n_map += 1
            elif rel == ASSOCIATION_RELATION:
                n_assoc += 1
        return KgStats(
            n_triples=len(self.triples),
            n_classes=n_classes,
            n_gene_annotated=len(genes),
            n_disease_annotated=len(diseases),
            n_ld=n_ld,
            n_map=n_map,
            n_association=n_assoc,
        )


def assemble_kg(
    ontology_triples: Sequence[Triple],
    annotations: Sequence[AnnotationTable],
    extra_links: Sequence[Triple],
    vocab: Vocabulary,
    training_edges: Sequence | None = None,
    variant: str = "",
) -> KnowledgeGraph:
    """Assemble one graph variant from its parts.

    `training_edges` (positive gene-disease pairs) are injected as
    ``association`` triples; this is the only difference between the
    link-prediction and the classification variant of the same graph.
    """
    assoc_rid = vocab.add_relation(ASSOCIATION_RELATION)
    triples: list[Triple] = list(ontology_triples)
    annotated: set[int] = set()
    for table in annotations:
        rid = vocab.add_relation(table.relation)
        for eid, terms in table.entries:
            annotated.add(eid)
            triples.extend(Triple(eid, rid, tid) for tid in terms)
    triples.extend(extra_links)
    if training_edges is not None:
        bad = [p for p in training_edges if p.gene not in annotated or p.disease not in annotated]
        if bad:
            names = ", ".join(
                f"({vocab.entity_name(p.gene)}, {vocab.entity_name(p.disease)})" for p in bad[:10]
            )
            raise ConsistencyError(
                f"{len(bad)} training pair(s) reference unannotated entities: {names}"
            )
        triples.extend(Triple(p.gene, assoc_rid, p.disease) for p in training_edges)
    return KnowledgeGraph(triples, vocab, variant)


# ---------------------------------------------------------------------------
# numeric export / import


def _write_id_file(path: Path, names: Iterable[tuple[str, int]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for name, idx in names:
            fh.write(f"{name}\t{idx}\n")


def _write_triple_file(path: Path, triples: Sequence[Triple]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(triples)}\n")
        for h, r, t in triples:
            fh.write(f"{h} {t} {r}\n")


def export_numeric(kg: KnowledgeGraph, split, out_dir: str | Path) -> dict[str, Path]:
    """Write the id/triple files consumed by the embedding trainer.

    Produces entity2id, relation2id, the entities eligible for the
    ``association`` relation (genes and diseases), a count-prefixed train
    file holding every graph triple, and a count-prefixed test file holding
    the positive test pairs as association triples.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    vocab = kg.vocab
    for pair in list(split.test_pos) + list(split.train_pos):
        for eid in (pair.gene, pair.disease):
            if eid >= vocab.num_entities:
                raise ConsistencyError(f"split entity id {eid} missing from graph vocabulary")
    assoc_rid = vocab.relation_id(ASSOCIATION_RELATION)
    files = {
        "entity2id": out / "entity2id.txt",
        "relation2id": out / "relation2id.txt",
        "association_entities": out / "association_entities.txt",
        "train": out / "train2id.txt",
        "test": out / "test2id.txt",
    }
    _write_id_file(files["entity2id"], ((vocab.entity_name(i), i) for i in range(vocab.num_entities)))
    _write_id_file(
        files["relation2id"], ((vocab.relation_name(i), i) for i in range(vocab.num_relations))
    )
    eligible = [
        (vocab.entity_name(i), i)
        for i in range(vocab.num_entities)
        if vocab.kinds[i] in (EntityKind.GENE, EntityKind.DISEASE)
    ]
    _write_id_file(files["association_entities"], eligible)
    _write_triple_file(files["train"], kg.triples)
    test_triples = [Triple(p.gene, assoc_rid, p.disease) for p in split.test_pos]
    _write_triple_file(files["test"], test_triples)
    return files


def read_triple_file(path: str | Path) -> list[Triple]:
    """Re-parse a count-prefixed ``e1 e2 rel`` triple file."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.strip():
            raise ParseError(f"{path}: missing count line")
        expected = int(header)
        triples = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            e1, e2, rel = line.split()
            triples.append(Triple(int(e1), int(rel), int(e2)))
    if len(triples) != expected:
        raise ParseError(f"{path}: count line says {expected}, found {len(triples)} triples")
    return triples


def read_id_file(path: str | Path) -> dict[str, int]:
    mapping: dict[str, int] = {}
    for lineno, line in _read_lines(path):
        name, idx = line.split("\t")
        mapping[name] = int(idx)
    return mapping


def load_numeric_kg(in_dir: str | Path) -> tuple[KnowledgeGraph, list[Triple]]:
    """Rebuild a trainable graph from a numeric export directory.

    Entities eligible for the ``association`` relation are restored as genes
    (full kinds are not part of the numeric format; training does not need
    them).  Returns the graph plus the test triples.
    """
    src = Path(in_dir)
    ent2id = read_id_file(src / "entity2id.txt")
    rel2id = read_id_file(src / "relation2id.txt")
    vocab = Vocabulary()
    for name, idx in sorted(ent2id.items(), key=lambda kv: kv[1]):
        if vocab.add_entity(name) != idx:
            raise ParseError(f"{src}: entity ids are not contiguous from 0")
    for name, idx in sorted(rel2id.items(), key=lambda kv: kv[1]):
        if vocab.add_relation(name) != idx:
            raise ParseError(f"{src}: relation ids are not contiguous from 0")
    train = read_triple_file(src / "train2id.txt")
    test = read_triple_file(src / "test2id.txt")
    variant = src.name
    return KnowledgeGraph(train, vocab, variant), test

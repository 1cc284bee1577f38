"""Marker candidate selection, filtering and lexicon assembly/export."""

import json
from dataclasses import dataclass, field, replace

from .ingest import PUNCTUATION, normalize_case, tokenize
from .phrases import PhraseTable, PhraseTableEntry

# Single-character punctuation tokens produced by the tokenizer.
PUNCT_TOKENS = set(PUNCTUATION)

CONTEXTS = ("none", "preceded", "followed", "both")


def is_punct_token(token: str) -> bool:
    return all(ch in PUNCTUATION for ch in token)


@dataclass
class SeedMarkerList:
    markers: list  # ordered list of token tuples


@dataclass
class MarkerCandidate:
    marker: tuple
    language: str
    translation: tuple
    raw_entry: PhraseTableEntry
    context: str  # none | preceded | followed | both
    score: float = 0.0


@dataclass
class FilterPolicy:
    min_dir_phrase_prob: float = 0.05
    min_inv_phrase_prob: float = 0.05
    min_joint_count: int = 2
    max_length_delta: int = 3
    require_full_marker_alignment: bool = True

    def __post_init__(self):
        if not (0 <= self.min_dir_phrase_prob <= 1 and 0 <= self.min_inv_phrase_prob <= 1):
            raise ValueError("probability floors must lie in [0, 1]")
        if self.min_joint_count < 1:
            raise ValueError("min_joint_count must be >= 1")


@dataclass(frozen=True)
class LexiconRecord:
    translation: tuple
    score: float
    joint_count: float
    context: str


@dataclass
class Lexicon:
    entries: dict = field(default_factory=dict)  # marker -> {language: [LexiconRecord]}


def load_seed_markers(path) -> SeedMarkerList:
    """One marker per line; `#` comments and blank lines skipped;
    tokenized/lowercased with the corpus tokenizer; first-seen order kept."""
    markers = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            marker = tuple(normalize_case(tokenize(line)))
            if marker and marker not in seen:
                seen.add(marker)
                markers.append(marker)
    if not markers:
        raise ValueError(f"seed marker file {path} contains no markers")
    return SeedMarkerList(markers=markers)


def select_candidates(table: PhraseTable, marker, language: str = "") -> list:
    """Phrase-table entries whose english side is the marker alone or the
    marker with one punctuation token before and/or after it."""
    marker = tuple(marker)
    patterns = [(marker, "none")]
    for p in sorted(PUNCT_TOKENS):
        patterns.append((marker + (p,), "followed"))
        patterns.append(((p,) + marker, "preceded"))
        for q in sorted(PUNCT_TOKENS):
            patterns.append(((p,) + marker + (q,), "both"))

    candidates = []
    for english, context in patterns:
        for entry in table.by_english.get(english, []):
            candidates.append(
                MarkerCandidate(
                    marker=marker,
                    language=language,
                    translation=entry.foreign_phrase,
                    raw_entry=entry,
                    context=context,
                )
            )
    return candidates


def strip_punctuation_context(candidate: MarkerCandidate) -> MarkerCandidate:
    """Trim leading/trailing punctuation tokens off the foreign translation."""
    translation = list(candidate.translation)
    while translation and is_punct_token(translation[0]):
        translation.pop(0)
    while translation and is_punct_token(translation[-1]):
        translation.pop()
    return replace(candidate, translation=tuple(translation))


def _marker_positions(candidate: MarkerCandidate):
    offset = 1 if candidate.context in ("preceded", "both") else 0
    return range(offset, offset + len(candidate.marker))


def filter_candidates(candidates, policy: FilterPolicy) -> list:
    """Score and filter candidates; duplicates keep their best-scoring instance."""
    best = {}
    order = []
    for cand in candidates:
        entry = cand.raw_entry
        if not cand.translation or all(is_punct_token(t) for t in cand.translation):
            continue
        if entry.dir_phrase_prob < policy.min_dir_phrase_prob:
            continue
        if entry.inv_phrase_prob < policy.min_inv_phrase_prob:
            continue
        if entry.joint_count < policy.min_joint_count:
            continue
        if abs(len(cand.translation) - len(cand.marker)) > policy.max_length_delta:
            continue
        if policy.require_full_marker_alignment:
            aligned_e = {j for _, j in entry.most_frequent_internal_alignment}
            if any(pos not in aligned_e for pos in _marker_positions(cand)):
                continue
        scored = replace(cand, score=entry.dir_phrase_prob * entry.inv_phrase_prob)
        key = (scored.marker, scored.language, scored.translation)
        if key not in best:
            best[key] = scored
            order.append(key)
        elif scored.score > best[key].score:
            best[key] = scored
    return [best[key] for key in order]


def build_lexicon(per_language: dict, markers: SeedMarkerList | None = None) -> Lexicon:
    """Group filtered candidates by marker then language, ranked by score.

    Markers from the seed list appear even when no candidate survived.
    """
    lex = Lexicon()
    if markers is not None:
        for marker in markers.markers:
            lex.entries[marker] = {}
    for language in sorted(per_language):
        for cand in per_language[language]:
            lex.entries.setdefault(cand.marker, {}).setdefault(language, []).append(
                LexiconRecord(
                    translation=cand.translation,
                    score=cand.score,
                    joint_count=cand.raw_entry.joint_count,
                    context=cand.context,
                )
            )
    for langs in lex.entries.values():
        for language, records in langs.items():
            records.sort(key=lambda r: (-r.score, " ".join(r.translation)))
    return lex


def export_lexicon(lex: Lexicon, fmt: str, path) -> None:
    """tsv: one line per (marker, language, translation); structured: JSON."""
    if fmt == "tsv":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("marker\tlanguage\ttranslation\tscore\tjoint_count\n")
            for marker, langs in lex.entries.items():
                for language in sorted(langs):
                    for rec in langs[language]:
                        fh.write(
                            f"{' '.join(marker)}\t{language}\t{' '.join(rec.translation)}"
                            f"\t{rec.score:.6g}\t{rec.joint_count:g}\n"
                        )
    elif fmt == "structured":
        doc = {
            "markers": [
                {
                    "marker": " ".join(marker),
                    "languages": {
                        language: [
                            {
                                "translation": " ".join(rec.translation),
                                "score": rec.score,
                                "joint_count": rec.joint_count,
                                "context": rec.context,
                            }
                            for rec in langs[language]
                        ]
                        for language in sorted(langs)
                    },
                }
                for marker, langs in lex.entries.items()
            ]
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, ensure_ascii=False, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown export format: {fmt}")


def import_lexicon(path) -> Lexicon:
    """Read back a structured export."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    lex = Lexicon()
    for item in doc["markers"]:
        marker = tuple(item["marker"].split())
        langs = {}
        for language, records in item["languages"].items():
            langs[language] = [
                LexiconRecord(
                    translation=tuple(rec["translation"].split()),
                    score=rec["score"],
                    joint_count=rec["joint_count"],
                    context=rec["context"],
                )
                for rec in records
            ]
        lex.entries[marker] = langs
    return lex

"""Alignment-consistent phrase extraction and phrase-table scoring."""

from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .model1 import NULL_WORD, TranslationTable


@dataclass(frozen=True)
class PhrasePairInstance:
    foreign_phrase: tuple
    english_phrase: tuple
    internal_alignment: frozenset  # (foreign offset, english offset) links
    origin: int  # sentence-pair index


@dataclass
class PhraseTableEntry:
    foreign_phrase: tuple
    english_phrase: tuple
    inv_phrase_prob: float  # phi(f|e)
    inv_lex_weight: float  # lex(f|e)
    dir_phrase_prob: float  # phi(e|f)
    dir_lex_weight: float  # lex(e|f)
    most_frequent_internal_alignment: frozenset
    joint_count: float


@dataclass
class PhraseTable:
    entries: dict = field(default_factory=dict)  # (foreign, english) -> entry
    by_foreign: dict = field(default_factory=dict)
    by_english: dict = field(default_factory=dict)
    corpus_size: int = 0

    def add(self, entry: PhraseTableEntry) -> None:
        key = (entry.foreign_phrase, entry.english_phrase)
        self.entries[key] = entry
        self.by_foreign.setdefault(entry.foreign_phrase, []).append(entry)
        self.by_english.setdefault(entry.english_phrase, []).append(entry)

    def __len__(self) -> int:
        return len(self.entries)


def extract_phrase_pairs(src_tokens, tgt_tokens, alignment, max_phrase_len: int = 7,
                         origin: int = 0) -> list:
    """All consistent phrase pairs up to max_phrase_len tokens per side.

    src is the foreign side, tgt the english side; alignment links are
    (src_pos, tgt_pos). Consistency: no link leaves the span pair and at
    least one link lies inside; spans extend over unaligned edge words.
    """
    if max_phrase_len < 1:
        raise ValueError("max_phrase_len must be >= 1")
    links = sorted(alignment)
    if not links:
        return []
    n_src = len(src_tokens)
    n_tgt = len(tgt_tokens)
    tgt_to_src = defaultdict(list)
    src_aligned = [False] * n_src
    for i, j in links:
        tgt_to_src[j].append(i)
        src_aligned[i] = True

    out = []
    for e_start in range(n_tgt):
        for e_end in range(e_start, min(n_tgt, e_start + max_phrase_len)):
            f_positions = [i for j in range(e_start, e_end + 1) for i in tgt_to_src[j]]
            if not f_positions:
                continue
            f_min, f_max = min(f_positions), max(f_positions)
            # consistency: every link touching [f_min, f_max] must stay inside
            if any(not (e_start <= j <= e_end) for i, j in links if f_min <= i <= f_max):
                continue
            inside = frozenset(
                (i, j) for i, j in links if f_min <= i <= f_max and e_start <= j <= e_end
            )
            fs = f_min
            while True:
                fe = f_max
                while True:
                    if fe - fs + 1 <= max_phrase_len:
                        out.append(
                            PhrasePairInstance(
                                foreign_phrase=tuple(src_tokens[fs:fe + 1]),
                                english_phrase=tuple(tgt_tokens[e_start:e_end + 1]),
                                internal_alignment=frozenset(
                                    (i - fs, j - e_start) for i, j in inside
                                ),
                                origin=origin,
                            )
                        )
                    fe += 1
                    if fe >= n_src or src_aligned[fe]:
                        break
                fs -= 1
                if fs < 0 or src_aligned[fs]:
                    break
    return out


def lexical_weight(english_phrase, foreign_phrase, internal_alignment,
                   word_probs: TranslationTable) -> float:
    """lex(e|f, a): product over english positions of the mean translation
    probability from their linked foreign words (NULL if unlinked)."""
    links_by_e = defaultdict(list)
    for i, j in internal_alignment:
        links_by_e[j].append(i)
    weight = 1.0
    for j, e_word in enumerate(english_phrase):
        srcs = links_by_e.get(j)
        if srcs:
            weight *= sum(word_probs.lookup(foreign_phrase[i], e_word) for i in srcs) / len(srcs)
        else:
            weight *= word_probs.lookup(NULL_WORD, e_word)
    return weight


def inverse_lexical_weight(foreign_phrase, english_phrase, internal_alignment,
                           word_probs: TranslationTable) -> float:
    """lex(f|e, a): the symmetric weight generating the foreign side."""
    transposed = frozenset((j, i) for i, j in internal_alignment)
    return lexical_weight(foreign_phrase, english_phrase, transposed, word_probs)


def score_phrase_table(instances, word_probs_fe: TranslationTable,
                       word_probs_ef: TranslationTable, corpus_size: int) -> PhraseTable:
    """Relative-frequency phrase probabilities plus lexical weights.

    word_probs_fe generates foreign from english (for lex(f|e));
    word_probs_ef generates english from foreign (for lex(e|f)).
    """
    joint = Counter()
    marg_f = Counter()
    marg_e = Counter()
    alignments = defaultdict(Counter)
    for inst in instances:
        key = (inst.foreign_phrase, inst.english_phrase)
        joint[key] += 1
        marg_f[inst.foreign_phrase] += 1
        marg_e[inst.english_phrase] += 1
        alignments[key][inst.internal_alignment] += 1

    table = PhraseTable(corpus_size=corpus_size)
    for key in sorted(joint):
        f, e = key
        count = joint[key]
        best_align = min(
            (a for a, c in alignments[key].items() if c == max(alignments[key].values())),
            key=lambda a: sorted(a),
        )
        table.add(
            PhraseTableEntry(
                foreign_phrase=f,
                english_phrase=e,
                inv_phrase_prob=count / marg_e[e],
                inv_lex_weight=inverse_lexical_weight(f, e, best_align, word_probs_fe),
                dir_phrase_prob=count / marg_f[f],
                dir_lex_weight=lexical_weight(e, f, best_align, word_probs_ef),
                most_frequent_internal_alignment=best_align,
                joint_count=float(count),
            )
        )
    return table


def _fmt(x: float) -> str:
    return f"{x:.8g}"


def write_phrase_table(table: PhraseTable, path) -> None:
    """`f ||| e ||| 4 scores ||| i-j links ||| count`, lexicographically sorted."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# N={table.corpus_size}\n")
        for f, e in sorted(table.entries):
            entry = table.entries[(f, e)]
            scores = " ".join(
                _fmt(x)
                for x in (
                    entry.inv_phrase_prob,
                    entry.inv_lex_weight,
                    entry.dir_phrase_prob,
                    entry.dir_lex_weight,
                )
            )
            links = " ".join(f"{i}-{j}" for i, j in sorted(entry.most_frequent_internal_alignment))
            fh.write(
                f"{' '.join(f)} ||| {' '.join(e)} ||| {scores} ||| {links} ||| {_fmt(entry.joint_count)}\n"
            )


class PhraseTableFormatError(ValueError):
    def __init__(self, line_number, message):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


def read_phrase_table(path) -> PhraseTable:
    table = PhraseTable()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key == "N":
                    table.corpus_size = int(value)
                continue
            fields = line.split(" ||| ")
            if len(fields) != 5:
                raise PhraseTableFormatError(lineno, f"expected 5 fields, got {len(fields)}")
            f_str, e_str, scores_str, links_str, count_str = fields
            try:
                scores = [float(x) for x in scores_str.split()]
                if len(scores) != 4:
                    raise ValueError("expected 4 scores")
                links = frozenset(
                    (int(a), int(b))
                    for a, b in (link.split("-") for link in links_str.split())
                )
                count = float(count_str)
            except ValueError as exc:
                raise PhraseTableFormatError(lineno, str(exc)) from exc
            table.add(
                PhraseTableEntry(
                    foreign_phrase=tuple(f_str.split()),
                    english_phrase=tuple(e_str.split()),
                    inv_phrase_prob=scores[0],
                    inv_lex_weight=scores[1],
                    dir_phrase_prob=scores[2],
                    dir_lex_weight=scores[3],
                    most_frequent_internal_alignment=links,
                    joint_count=count,
                )
            )
    return table

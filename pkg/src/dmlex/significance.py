"""Significance pruning of phrase tables via Fisher's exact test."""

import math
from collections import defaultdict
from dataclasses import dataclass, field

from .phrases import PhraseTable


@dataclass(frozen=True)
class ContingencyTable:
    c_s: int  # sentence pairs whose foreign side contains the foreign phrase
    c_t: int  # pairs whose english side contains the english phrase
    c_st: int  # pairs containing both
    n: int  # total sentence pairs

    def __post_init__(self):
        if not (0 < self.c_st <= min(self.c_s, self.c_t) <= self.n):
            raise ValueError(f"invalid contingency counts: {self}")


@dataclass
class PruneConfig:
    threshold_mode: str = "alpha_plus_epsilon"  # alpha | alpha_plus_epsilon | custom
    custom_neg_log_p: float = 0.0
    epsilon: float = 1e-9

    def __post_init__(self):
        if self.threshold_mode not in ("alpha", "alpha_plus_epsilon", "custom"):
            raise ValueError(f"unknown threshold mode: {self.threshold_mode}")
        if self.threshold_mode == "custom" and self.custom_neg_log_p < 0:
            raise ValueError("custom_neg_log_p must be >= 0")


class PhraseIndex:
    """Inverted token index over one side of an aligned corpus, answering
    per-sentence-pair contiguous containment queries."""

    def __init__(self, sentences):
        self.sentences = [tuple(s) for s in sentences]
        self.postings = defaultdict(set)
        for pair_id, sent in enumerate(self.sentences):
            for tok in set(sent):
                self.postings[tok].add(pair_id)

    def containing_pairs(self, phrase) -> set:
        phrase = tuple(phrase)
        candidates = None
        for tok in set(phrase):
            ids = self.postings.get(tok)
            if not ids:
                return set()
            candidates = ids if candidates is None else candidates & ids
        return {pid for pid in candidates if _contains_contiguous(self.sentences[pid], phrase)}


def _contains_contiguous(sentence, phrase) -> bool:
    k = len(phrase)
    return any(sentence[i:i + k] == phrase for i in range(len(sentence) - k + 1))


def contingency_counts(table: PhraseTable, corpus) -> dict:
    """Per-entry contingency counts against the extraction corpus."""
    src_index = PhraseIndex(src for src, _ in corpus.pairs)
    tgt_index = PhraseIndex(tgt for _, tgt in corpus.pairs)
    n = len(corpus.pairs)
    counts = {}
    for key in table.entries:
        foreign, english = key
        s_ids = src_index.containing_pairs(foreign)
        t_ids = tgt_index.containing_pairs(english)
        joint = len(s_ids & t_ids)
        if joint == 0:
            raise RuntimeError(f"phrase pair {key} never co-occurs in its own corpus")
        counts[key] = ContingencyTable(c_s=len(s_ids), c_t=len(t_ids), c_st=joint, n=n)
    return counts


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def fisher_neg_log_p(ct: ContingencyTable) -> float:
    """-log of the right-tail Fisher exact p-value, computed in log space."""
    k_max = min(ct.c_s, ct.c_t)
    log_denom = _log_comb(ct.n, ct.c_t)
    log_terms = [
        _log_comb(ct.c_s, k) + _log_comb(ct.n - ct.c_s, ct.c_t - k) - log_denom
        for k in range(ct.c_st, k_max + 1)
    ]
    m = max(log_terms)
    log_p = m + math.log(sum(math.exp(t - m) for t in log_terms))
    return max(0.0, -log_p)


def threshold_for(mode: str, n: int, epsilon: float = 1e-9, custom: float = 0.0) -> float:
    """Pruning threshold on -log p: alpha is ln(n), the score of a 1-1-1 entry."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if mode == "alpha":
        return math.log(n)
    if mode == "alpha_plus_epsilon":
        return math.log(n) + epsilon
    if mode == "custom":
        return custom
    raise ValueError(f"unknown threshold mode: {mode}")


@dataclass
class PruneReport:
    threshold: float
    rows: list = field(default_factory=list)  # (foreign, english, ct, neg_log_p, kept)
    kept_count: int = 0
    pruned_count: int = 0


def prune(table: PhraseTable, counts: dict, config: PruneConfig) -> tuple:
    """Keep entries whose -log p exceeds the configured threshold.

    Surviving entries are carried over unchanged. Returns (table, report).
    """
    threshold = threshold_for(
        config.threshold_mode, table.corpus_size, config.epsilon, config.custom_neg_log_p
    )
    kept = PhraseTable(corpus_size=table.corpus_size)
    report = PruneReport(threshold=threshold)
    for key in sorted(table.entries):
        ct = counts[key]
        score = fisher_neg_log_p(ct)
        keep = score > threshold
        report.rows.append((key[0], key[1], ct, score, keep))
        if keep:
            kept.add(table.entries[key])
            report.kept_count += 1
        else:
            report.pruned_count += 1
    return kept, report


def write_prune_report(report: PruneReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# threshold={report.threshold:.8g}\n")
        for foreign, english, ct, score, keep in report.rows:
            fh.write(
                f"{' '.join(foreign)} ||| {' '.join(english)}"
                f"\t{ct.c_s}\t{ct.c_t}\t{ct.c_st}\t{score:.8g}\t{'kept' if keep else 'pruned'}\n"
            )

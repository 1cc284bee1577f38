"""Length-based sentence alignment (Gale & Church dynamic program)."""

import math
from dataclasses import dataclass, field

from scipy.special import log_ndtr

# Bead shapes in tie-break preference order: (src sentences, tgt sentences).
SHAPES = [(1, 1), (1, 0), (0, 1), (2, 1), (1, 2), (2, 2)]
SHAPE_NAMES = {s: f"{s[0]}-{s[1]}" for s in SHAPES}

# Fixed |delta| charged to insertion/deletion beads, which a pure length
# model cannot score.
DELETION_DELTA = 4.0

LOG2 = math.log(2.0)


def default_bead_priors() -> dict:
    """Classical prior mass per shape, renormalized to sum to 1."""
    raw = {
        "1-1": 0.89,
        "1-0": 0.0099,
        "0-1": 0.0099,
        "2-1": 0.089 / 2,
        "1-2": 0.089 / 2,
        "2-2": 0.011,
    }
    total = sum(raw.values())
    return {k: v / total for k, v in raw.items()}


@dataclass
class AlignerParams:
    mean_char_ratio: float = 1.0
    variance: float = 6.8
    bead_priors: dict = field(default_factory=default_bead_priors)

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError("variance must be positive")
        total = sum(self.bead_priors.values())
        if abs(total - 1.0) > 1e-9 or any(v <= 0 for v in self.bead_priors.values()):
            raise ValueError("bead priors must be positive and sum to 1")


@dataclass(frozen=True)
class Bead:
    src_span: tuple  # half-open (start, end) sentence indices
    tgt_span: tuple
    shape: str
    cost: float


@dataclass
class AlignedCorpus:
    pairs: list = field(default_factory=list)  # (src_tokens, tgt_tokens)
    provenance: list = field(default_factory=list)  # (file_id, paragraph idx, bead idx, bead shape)

    def extend(self, other: "AlignedCorpus") -> None:
        self.pairs.extend(other.pairs)
        self.provenance.extend(other.provenance)


def sentence_char_length(tokens: list) -> int:
    """Characters of the space-joined tokenized sentence."""
    if not tokens:
        return 0
    return sum(len(t) for t in tokens) + len(tokens) - 1


def _log_two_tail(abs_delta: float) -> float:
    # log(2 * (1 - Phi(|delta|))), robust far into the tail
    return LOG2 + float(log_ndtr(-abs_delta))


def length_cost(src_len: int, tgt_len: int, shape, params: AlignerParams) -> float:
    """-log prior(shape) - log P(delta) for a candidate bead."""
    if src_len < 0 or tgt_len < 0:
        raise ValueError("lengths must be non-negative")
    if src_len == 0 and tgt_len == 0:
        raise ValueError("at least one side must be non-empty")
    if isinstance(shape, tuple):
        shape = SHAPE_NAMES[shape]
    prior = params.bead_priors[shape]
    if shape in ("1-0", "0-1"):
        abs_delta = DELETION_DELTA
    else:
        c = params.mean_char_ratio
        s2 = params.variance
        denom = math.sqrt(src_len * s2) if src_len > 0 else math.sqrt(s2)
        abs_delta = abs(tgt_len - src_len * c) / denom
    return -math.log(prior) - _log_two_tail(abs_delta)


def align_paragraph(src: list, tgt: list, params: AlignerParams) -> list:
    """Minimum-cost bead tiling of the two sentence lists.

    Ties at each DP cell are broken by SHAPES order (1-1 first).
    """
    m, n = len(src), len(tgt)
    if m == 0 and n == 0:
        return []
    src_lens = [sentence_char_length(s) for s in src]
    tgt_lens = [sentence_char_length(s) for s in tgt]

    INF = float("inf")
    cost = [[INF] * (n + 1) for _ in range(m + 1)]
    back = [[None] * (n + 1) for _ in range(m + 1)]
    cost[0][0] = 0.0

    for i in range(m + 1):
        for j in range(n + 1):
            if i == 0 and j == 0:
                continue
            best = INF
            best_shape = None
            for s, t in SHAPES:
                pi, pj = i - s, j - t
                if pi < 0 or pj < 0 or cost[pi][pj] == INF:
                    continue
                sl = sum(src_lens[pi:i])
                tl = sum(tgt_lens[pj:j])
                cand = cost[pi][pj] + length_cost(sl, tl, (s, t), params)
                if cand < best:
                    best = cand
                    best_shape = (s, t)
            cost[i][j] = best
            back[i][j] = best_shape

    beads = []
    i, j = m, n
    while i > 0 or j > 0:
        s, t = back[i][j]
        beads.append(
            Bead(
                src_span=(i - s, i),
                tgt_span=(j - t, j),
                shape=SHAPE_NAMES[(s, t)],
                cost=cost[i][j] - cost[i - s][j - t],
            )
        )
        i, j = i - s, j - t
    beads.reverse()
    return beads


def default_bead_emission(bead: Bead, src: list, tgt: list):
    """Emit one sentence pair per bead, concatenating multi-sentence sides;
    drop insertion/deletion beads."""
    if bead.shape in ("1-0", "0-1"):
        return []
    src_tokens = [tok for k in range(*bead.src_span) for tok in src[k]]
    tgt_tokens = [tok for k in range(*bead.tgt_span) for tok in tgt[k]]
    return [(src_tokens, tgt_tokens)]


def align_corpus(pairs: list, params: AlignerParams, policy=default_bead_emission,
                 file_id: str = "") -> AlignedCorpus:
    corpus = AlignedCorpus()
    for pp in pairs:
        beads = align_paragraph(pp.src_paragraph, pp.tgt_paragraph, params)
        for bead_idx, bead in enumerate(beads):
            for src_tokens, tgt_tokens in policy(bead, pp.src_paragraph, pp.tgt_paragraph):
                corpus.pairs.append((src_tokens, tgt_tokens))
                corpus.provenance.append((file_id, pp.pair_index, bead_idx, bead.shape))
    return corpus


def write_aligned_corpus(corpus: AlignedCorpus, src_path, tgt_path, prov_path=None) -> None:
    with open(src_path, "w", encoding="utf-8") as fs, open(tgt_path, "w", encoding="utf-8") as ft:
        for src_tokens, tgt_tokens in corpus.pairs:
            fs.write(" ".join(src_tokens) + "\n")
            ft.write(" ".join(tgt_tokens) + "\n")
    if prov_path is not None:
        with open(prov_path, "w", encoding="utf-8") as fp:
            for k, (file_id, para_idx, bead_idx, shape) in enumerate(corpus.provenance):
                fp.write(f"{k}\t{file_id}\t{para_idx}\t{bead_idx}\t{shape}\n")


def read_aligned_corpus(src_path, tgt_path, prov_path=None) -> AlignedCorpus:
    corpus = AlignedCorpus()
    with open(src_path, encoding="utf-8") as fs, open(tgt_path, encoding="utf-8") as ft:
        for src_line, tgt_line in zip(fs, ft):
            corpus.pairs.append((src_line.split(), tgt_line.split()))
    if prov_path is not None:
        with open(prov_path, encoding="utf-8") as fp:
            for line in fp:
                _, file_id, para_idx, bead_idx, shape = line.rstrip("\n").split("\t")
                corpus.provenance.append((file_id, int(para_idx), int(bead_idx), shape))
    return corpus

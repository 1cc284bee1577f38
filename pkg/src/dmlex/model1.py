"""IBM Model 1 EM training, Viterbi alignment and symmetrization."""

import math
from dataclasses import dataclass, field

NULL_WORD = "<NULL>"


@dataclass
class TranslationTable:
    """Directional word-translation probabilities t(generated | conditioning)."""

    direction: str  # free-form label, e.g. "pt|en"
    probs: dict  # conditioning word -> {generated word: probability}
    prob_floor: float = 1e-7
    use_null: bool = True
    log_likelihoods: list = field(default_factory=list)  # one per EM iteration
    generated_vocab: set = field(default_factory=set)

    def lookup(self, cond: str, gen: str) -> float:
        return self.probs.get(cond, {}).get(gen, self.prob_floor)


@dataclass
class DirectionalAlignment:
    """For each generated-side position, a conditioning-side position or None."""

    links: list  # list[Optional[int]]
    conditioning_len: int


def train_model1(pairs, iterations: int = 5, prob_floor: float = 1e-7,
                 use_null: bool = True, direction: str = "") -> TranslationTable:
    """EM for Model 1 over (conditioning_tokens, generated_tokens) pairs.

    Uniform initialization over co-occurring word pairs; distributions are
    renormalized and floor-pruned after every M-step; the corpus
    log-likelihood under the table entering each iteration is recorded.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    pairs = list(pairs)
    if not pairs:
        raise ValueError("empty corpus")

    def cond_tokens(cond):
        return [NULL_WORD] + list(cond) if use_null else list(cond)

    # uniform init over co-occurring pairs
    cooc = {}
    for cond, gen in pairs:
        for c in cond_tokens(cond):
            seen = cooc.setdefault(c, set())
            seen.update(gen)
    probs = {c: {g: 1.0 / len(gens) for g in sorted(gens)} for c, gens in cooc.items()}

    generated_vocab = set()
    for _, gen in pairs:
        generated_vocab.update(gen)

    log_likelihoods = []
    for _ in range(iterations):
        counts = {c: dict.fromkeys(gens, 0.0) for c, gens in probs.items()}
        totals = dict.fromkeys(probs, 0.0)
        ll = 0.0
        for cond, gen in pairs:
            ctoks = cond_tokens(cond)
            ll -= len(gen) * math.log(len(ctoks))
            for g in gen:
                denom = 0.0
                for c in ctoks:
                    denom += probs[c].get(g, 0.0)
                ll += math.log(denom) if denom > 0.0 else math.log(prob_floor)
                for c in ctoks:
                    p = probs[c].get(g, 0.0)
                    if p > 0.0:
                        frac = p / denom
                        counts[c][g] += frac
                        totals[c] += frac
        log_likelihoods.append(ll)

        new_probs = {}
        for c, gcounts in counts.items():
            total = totals[c]
            if total <= 0.0:
                continue
            dist = {g: v / total for g, v in gcounts.items() if v / total >= prob_floor}
            if not dist:
                continue
            norm = sum(dist.values())
            new_probs[c] = {g: v / norm for g, v in dist.items()}
        probs = new_probs

    return TranslationTable(
        direction=direction,
        probs=probs,
        prob_floor=prob_floor,
        use_null=use_null,
        log_likelihoods=log_likelihoods,
        generated_vocab=generated_vocab,
    )


def viterbi_align(cond_tokens, gen_tokens, table: TranslationTable) -> DirectionalAlignment:
    """Link every generated token to its best conditioning position.

    Ties go to the smallest conditioning index; NULL loses all ties;
    out-of-vocabulary generated tokens link to NULL.
    """
    links = []
    for g in gen_tokens:
        if g not in table.generated_vocab:
            links.append(None)
            continue
        best_i = None
        best_p = -1.0
        for i, c in enumerate(cond_tokens):
            p = table.lookup(c, g)
            if p > best_p:
                best_p = p
                best_i = i
        if table.use_null and table.lookup(NULL_WORD, g) > best_p:
            best_i = None
        links.append(best_i)
    return DirectionalAlignment(links=links, conditioning_len=len(cond_tokens))


def directional_links(src_to_tgt: DirectionalAlignment) -> set:
    """Non-NULL links of a src-conditioned alignment as (src, tgt) pairs."""
    return {(i, j) for j, i in enumerate(src_to_tgt.links) if i is not None}


_NEIGHBORS = [(-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1)]


def symmetrize(src_to_tgt: DirectionalAlignment, tgt_to_src: DirectionalAlignment,
               heuristic: str = "grow-diag-final-and") -> set:
    """Combine the two directional alignments into one (src, tgt) link set."""
    src_len = len(tgt_to_src.links)
    tgt_len = len(src_to_tgt.links)
    if src_to_tgt.conditioning_len != src_len or tgt_to_src.conditioning_len != tgt_len:
        raise ValueError("directional alignments cover different sentence lengths")

    a = directional_links(src_to_tgt)
    b = set(_transpose_links(tgt_to_src))
    inter = a & b
    union = a | b

    if heuristic == "intersection":
        return set(inter)
    if heuristic == "union":
        return set(union)
    if heuristic != "grow-diag-final-and":
        raise ValueError(f"unknown heuristic: {heuristic}")

    aligned = set(inter)
    src_aligned = {i for i, _ in aligned}
    tgt_aligned = {j for _, j in aligned}

    # grow-diag: repeatedly absorb union neighbors of current links that
    # re-align at least one still-unaligned word
    changed = True
    while changed:
        changed = False
        for i, j in sorted(aligned):
            for di, dj in _NEIGHBORS:
                ni, nj = i + di, j + dj
                if (ni, nj) in union and (ni, nj) not in aligned and (
                    ni not in src_aligned or nj not in tgt_aligned
                ):
                    aligned.add((ni, nj))
                    src_aligned.add(ni)
                    tgt_aligned.add(nj)
                    changed = True

    # final-and: union links with both endpoints still unaligned
    for i, j in sorted(union):
        if i not in src_aligned and j not in tgt_aligned:
            aligned.add((i, j))
            src_aligned.add(i)
            tgt_aligned.add(j)

    return aligned


def _transpose_links(tgt_to_src: DirectionalAlignment):
    for i, j in enumerate(tgt_to_src.links):
        if j is not None:
            yield (i, j)


def corpus_log_likelihood(pairs, table: TranslationTable) -> float:
    """Sum of log P(generated | conditioning) under Model 1 (epsilon = 1)."""
    total = 0.0
    for cond, gen in pairs:
        ctoks = [NULL_WORD] + list(cond) if table.use_null else list(cond)
        for g in gen:
            s = sum(table.lookup(c, g) for c in ctoks)
            total += math.log(s) - math.log(len(ctoks))
    return total


def write_translation_table(table: TranslationTable, path) -> None:
    """Tab-separated `cond \\t gen \\t prob`, 8 significant digits, sorted."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# direction={table.direction}\n")
        fh.write(f"# floor={table.prob_floor!r}\n")
        fh.write(f"# null={'true' if table.use_null else 'false'}\n")
        for cond in sorted(table.probs):
            for gen in sorted(table.probs[cond]):
                fh.write(f"{cond}\t{gen}\t{table.probs[cond][gen]:.8g}\n")


def read_translation_table(path) -> TranslationTable:
    direction = ""
    floor = 1e-7
    use_null = True
    probs = {}
    generated_vocab = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key == "direction":
                    direction = value
                elif key == "floor":
                    floor = float(value)
                elif key == "null":
                    use_null = value == "true"
                continue
            cond, gen, prob = line.split("\t")
            probs.setdefault(cond, {})[gen] = float(prob)
            generated_vocab.add(gen)
    return TranslationTable(
        direction=direction,
        probs=probs,
        prob_floor=floor,
        use_null=use_null,
        generated_vocab=generated_vocab,
    )

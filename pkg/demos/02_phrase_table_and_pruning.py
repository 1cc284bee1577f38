"""Build a phrase table from aligned sentence pairs, then prune it with
Fisher's exact test and watch the 1-1-1 noise disappear.

Run as:  python3 demos/02_phrase_table_and_pruning.py
"""

from dmlex.galechurch import AlignedCorpus
from dmlex.model1 import directional_links, train_model1, viterbi_align
from dmlex.phrases import extract_phrase_pairs, score_phrase_table
from dmlex.significance import PruneConfig, contingency_counts, prune

# foreign / english pairs; "bom dia" <-> "good morning" recurs, while the
# last pair contributes vocabulary that occurs exactly once
pairs = [
    ("bom dia".split(), "good morning".split()),
    ("bom dia a todos".split(), "good morning to all".split()),
    ("um bom relatorio".split(), "a good report".split()),
    ("bom dia senhor presidente".split(), "good morning mister president".split()),
    ("obrigado pela resposta".split(), "thanks for the answer".split()),
]

table_ef = train_model1(pairs, iterations=8, direction="f->e")
table_fe = train_model1([(e, f) for f, e in pairs], iterations=8, direction="e->f")

instances = []
for k, (f, e) in enumerate(pairs):
    # foreign conditions, english generated: links come back as (f_pos, e_pos)
    alignment = viterbi_align(f, e, table_ef)
    links = directional_links(alignment)
    instances.extend(extract_phrase_pairs(f, e, links, max_phrase_len=3, origin=k))

table = score_phrase_table(instances, table_fe, table_ef, corpus_size=len(pairs))
print(f"extracted {len(table)} phrase pairs from {len(pairs)} sentence pairs")

corpus = AlignedCorpus(pairs=pairs)
counts = contingency_counts(table, corpus)
kept, report = prune(table, counts, PruneConfig())

n = len(pairs)
print(f"threshold = ln({n}) + eps = {report.threshold:.4f}")
print(f"kept {report.kept_count}, pruned {report.pruned_count}\n")

print("surviving entries:")
for (f, e), entry in sorted(kept.entries.items()):
    ct = counts[(f, e)]
    print(f"  {' '.join(f):24s} ||| {' '.join(e):24s} joint={ct.c_st}")

dropped_111 = sum(
    1
    for key in table.entries
    if key not in kept.entries
    and (counts[key].c_s, counts[key].c_t, counts[key].c_st) == (1, 1, 1)
)
print(f"\n{dropped_111} of the pruned entries were 1-1-1 singletons")

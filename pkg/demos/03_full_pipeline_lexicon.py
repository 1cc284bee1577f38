"""Generate a small synthetic Europarl-style corpus with planted marker
translations, run the whole pipeline on it, and print the induced lexicon.

Run as:  python3 demos/03_full_pipeline_lexicon.py
"""

import os
import random
import tempfile

from dmlex.pipeline import render_report, run_pipeline, validate_config

MARKERS = {
    "above all": "sobretudo",
    "however": "contudo",
    "for instance": "por exemplo",
}
CONTENT = [(f"word{k}", f"vort{k}") for k in range(20)]


def write_corpus(root):
    rng = random.Random(7)
    en_lines, xx_lines = [], []
    for k in range(120):
        picks = rng.sample(CONTENT, 4)
        e_body = " ".join(w for w, _ in picks)
        f_body = " ".join(w for _, w in picks)
        if k % 3 == 0:
            marker = rng.choice(list(MARKERS))
            e_line = f"{marker.capitalize()} , {e_body} ."
            f_line = f"{MARKERS[marker].capitalize()} , {f_body} ."
        else:
            e_line, f_line = f"{e_body} .", f"{f_body} ."
        en_lines.append(e_line)
        xx_lines.append(f_line)

    for lang, lines in (("en", en_lines), ("xx", xx_lines)):
        lang_dir = os.path.join(root, "corpus", lang)
        os.makedirs(lang_dir)
        body = ["<CHAPTER 1>", "<SPEAKER 1>"]
        for idx, line in enumerate(lines):
            if idx % 4 == 0:
                body.append("<P>")
            body.append(line)
        with open(os.path.join(lang_dir, "ep-0.txt"), "w", encoding="utf-8") as fh:
            fh.write("\n".join(body) + "\n")

    with open(os.path.join(root, "markers.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(MARKERS) + "\n")

    cfg = os.path.join(root, "pipeline.cfg")
    with open(cfg, "w", encoding="utf-8") as fh:
        fh.write(
            "corpus_root = corpus\n"
            "english = en\n"
            "foreign = xx\n"
            "markers = markers.txt\n"
            f"output = {os.path.join(root, 'out')}\n"
        )
    return cfg


with tempfile.TemporaryDirectory() as root:
    config = validate_config(write_corpus(root))
    report = run_pipeline(config)
    print(render_report(report))

    print("induced lexicon:")
    with open(os.path.join(root, "out", "lexicon.tsv"), encoding="utf-8") as fh:
        for line in fh:
            print(" ", line.rstrip("\n"))

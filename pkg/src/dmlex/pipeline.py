"""Stage-graph orchestration with content-hash caching and run reports."""

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import galechurch, ingest, lexicon as lexmod, model1, phrases, significance

STAGES = ["ingest", "align", "wordalign", "phrases", "prune", "markers", "lexicon"]

_TRUE = {"true", "yes", "1", "on"}
_FALSE = {"false", "no", "0", "off"}


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class PipelineConfig:
    corpus_root: str
    english_code: str
    foreign_codes: list
    markers_file: str
    output_dir: str = "out"
    cache: bool = True
    jobs: int = 1
    aligner: galechurch.AlignerParams = field(default_factory=galechurch.AlignerParams)
    em_iterations: int = 5
    em_prob_floor: float = 1e-7
    em_null: bool = True
    symmetrization: str = "grow-diag-final-and"
    max_phrase_len: int = 7
    prune_config: significance.PruneConfig = field(default_factory=significance.PruneConfig)
    filter_policy: lexmod.FilterPolicy = field(default_factory=lexmod.FilterPolicy)


def _parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _parse_prune_mode(value: str):
    v = value.strip()
    if v == "alpha":
        return ("alpha", 0.0)
    if v in ("alpha+e", "alpha_plus_epsilon"):
        return ("alpha_plus_epsilon", 0.0)
    return ("custom", float(v))


# key -> (parser, default-as-string or None for required)
_KNOWN_KEYS = {
    "corpus_root": (str, None),
    "english": (str, None),
    "foreign": (str, None),
    "markers": (str, None),
    "output": (str, "out"),
    "cache": (_parse_bool, "true"),
    "jobs": (int, "1"),
    "aligner.mean_char_ratio": (float, "1.0"),
    "aligner.variance": (float, "6.8"),
    "em.iterations": (int, "5"),
    "em.prob_floor": (float, "1e-7"),
    "em.null": (_parse_bool, "true"),
    "wordalign.symmetrization": (str, "grow-diag-final-and"),
    "phrases.max_len": (int, "7"),
    "prune.mode": (str, "alpha+e"),
    "prune.epsilon": (float, "1e-9"),
    "filter.min_dir_phrase_prob": (float, "0.05"),
    "filter.min_inv_phrase_prob": (float, "0.05"),
    "filter.min_joint_count": (int, "2"),
    "filter.max_length_delta": (int, "3"),
    "filter.require_full_marker_alignment": (_parse_bool, "true"),
}


def parse_config_file(path) -> dict:
    """Flat `key = value` lines with dotted keys; `#` starts a comment."""
    values = {}
    errors = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                errors.append(f"line {lineno}: expected `key = value`")
                continue
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    if errors:
        raise ConfigError(errors)
    return values


def validate_config(path, overrides: dict | None = None) -> PipelineConfig:
    """Resolve a config file into a PipelineConfig, accumulating every error."""
    values = parse_config_file(path)
    if overrides:
        values.update(overrides)
    errors = []

    for key in values:
        if key not in _KNOWN_KEYS:
            errors.append(f"unknown config key: {key}")

    parsed = {}
    for key, (parser, default) in _KNOWN_KEYS.items():
        raw = values.get(key, default)
        if raw is None:
            errors.append(f"missing required config key: {key}")
            continue
        try:
            parsed[key] = parser(raw)
        except ValueError as exc:
            errors.append(f"bad value for {key}: {exc}")

    if errors:
        raise ConfigError(errors)

    english = parsed["english"]
    foreign = [c.strip() for c in parsed["foreign"].split(",") if c.strip()]
    if not foreign:
        errors.append("foreign must list at least one language code")
    if english in foreign:
        errors.append(f"english code {english!r} repeated in foreign codes")

    corpus_root = parsed["corpus_root"]
    base = os.path.dirname(os.path.abspath(path))
    corpus_root = corpus_root if os.path.isabs(corpus_root) else os.path.join(base, corpus_root)
    markers_file = parsed["markers"]
    markers_file = markers_file if os.path.isabs(markers_file) else os.path.join(base, markers_file)

    if not os.path.isdir(corpus_root):
        errors.append(f"corpus_root does not exist: {corpus_root}")
    else:
        english_dir = os.path.join(corpus_root, english)
        if not os.path.isdir(english_dir):
            errors.append(f"missing corpus directory: {english_dir}")
        else:
            english_files = sorted(os.listdir(english_dir))
            if not english_files:
                errors.append(f"no corpus files under {english_dir}")
            for code in foreign:
                lang_dir = os.path.join(corpus_root, code)
                if not os.path.isdir(lang_dir):
                    errors.append(f"missing corpus directory: {lang_dir}")
                    continue
                for name in english_files:
                    if not os.path.isfile(os.path.join(lang_dir, name)):
                        errors.append(f"missing corpus file: {os.path.join(lang_dir, name)}")
    if not os.path.isfile(markers_file):
        errors.append(f"missing seed marker file: {markers_file}")

    try:
        mode, custom = _parse_prune_mode(parsed["prune.mode"])
        aligner = galechurch.AlignerParams(
            mean_char_ratio=parsed["aligner.mean_char_ratio"],
            variance=parsed["aligner.variance"],
        )
        prune_config = significance.PruneConfig(
            threshold_mode=mode, custom_neg_log_p=custom, epsilon=parsed["prune.epsilon"]
        )
        filter_policy = lexmod.FilterPolicy(
            min_dir_phrase_prob=parsed["filter.min_dir_phrase_prob"],
            min_inv_phrase_prob=parsed["filter.min_inv_phrase_prob"],
            min_joint_count=parsed["filter.min_joint_count"],
            max_length_delta=parsed["filter.max_length_delta"],
            require_full_marker_alignment=parsed["filter.require_full_marker_alignment"],
        )
    except ValueError as exc:
        errors.append(str(exc))

    if errors:
        raise ConfigError(errors)

    return PipelineConfig(
        corpus_root=corpus_root,
        english_code=english,
        foreign_codes=foreign,
        markers_file=markers_file,
        output_dir=parsed["output"],
        cache=parsed["cache"],
        jobs=parsed["jobs"],
        aligner=aligner,
        em_iterations=parsed["em.iterations"],
        em_prob_floor=parsed["em.prob_floor"],
        em_null=parsed["em.null"],
        symmetrization=parsed["wordalign.symmetrization"],
        max_phrase_len=parsed["phrases.max_len"],
        prune_config=prune_config,
        filter_policy=filter_policy,
    )


@dataclass
class StageResult:
    pair: str  # language code, or "shared" / "all"
    stage: str
    cache_hit: bool = False
    seconds: float = 0.0
    stats: dict = field(default_factory=dict)
    error: str | None = None


@dataclass
class RunReport:
    results: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.error is None for r in self.results)


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _digest(param_obj, input_files, upstream: str = "") -> str:
    h = hashlib.sha256()
    h.update(repr(param_obj).encode("utf-8"))
    h.update(upstream.encode("utf-8"))
    for path in sorted(str(p) for p in input_files):
        h.update(os.path.basename(path).encode("utf-8"))
        h.update(_sha256_file(path).encode("utf-8"))
    return h.hexdigest()


class _Cache:
    def __init__(self, path, enabled):
        self.path = path
        self.enabled = enabled
        self.manifest = {}
        if enabled and os.path.isfile(path):
            with open(path, encoding="utf-8") as fh:
                self.manifest = json.load(fh)

    def hit(self, key, digest, outputs) -> dict | None:
        if not self.enabled:
            return None
        rec = self.manifest.get(key)
        if rec and rec["digest"] == digest and all(os.path.isfile(p) for p in outputs):
            return rec
        return None

    def store(self, key, digest, outputs, stats) -> None:
        self.manifest[key] = {"digest": digest, "outputs": [str(p) for p in outputs], "stats": stats}
        if self.enabled:
            with open(self.path, "w", encoding="utf-8") as fh:
                json.dump(self.manifest, fh, indent=2, sort_keys=True)

    def digest_of(self, key) -> str:
        rec = self.manifest.get(key)
        return rec["digest"] if rec else ""


class PipelineRunner:
    def __init__(self, config: PipelineConfig):
        self.cfg = config
        self.out = config.output_dir
        os.makedirs(self.out, exist_ok=True)
        self.cache = _Cache(os.path.join(self.out, ".cache.json"), config.cache)
        self.file_ids = sorted(
            os.listdir(os.path.join(config.corpus_root, config.english_code))
        )

    # ---- paths ----------------------------------------------------------
    def ingest_dir(self, lang):
        return os.path.join(self.out, "ingest", lang)

    def pair_dir(self, lang):
        return os.path.join(self.out, "pairs", lang)

    def _pair_paths(self, lang):
        d = self.pair_dir(lang)
        return {
            "aligned_src": os.path.join(d, "aligned.src"),
            "aligned_tgt": os.path.join(d, "aligned.tgt"),
            "aligned_prov": os.path.join(d, "aligned.prov"),
            "table_fe": os.path.join(d, "model1.f_given_e.tsv"),
            "table_ef": os.path.join(d, "model1.e_given_f.tsv"),
            "alignments": os.path.join(d, "alignments.txt"),
            "phrase_table": os.path.join(d, "phrase-table.txt"),
            "pruned_table": os.path.join(d, "phrase-table.pruned.txt"),
            "prune_report": os.path.join(d, "prune-report.tsv"),
            "candidates": os.path.join(d, "candidates.tsv"),
        }

    # ---- stage bodies ---------------------------------------------------
    def _run_stage(self, pair, stage, params, inputs, outputs, upstream_key, body) -> StageResult:
        key = f"{stage}:{pair}"
        upstream = self.cache.digest_of(upstream_key) if upstream_key else ""
        digest = _digest(params, inputs, upstream)
        started = time.monotonic()
        cached = self.cache.hit(key, digest, outputs)
        if cached is not None:
            return StageResult(pair=pair, stage=stage, cache_hit=True, seconds=0.0,
                               stats=cached["stats"])
        for path in outputs:
            os.makedirs(os.path.dirname(path), exist_ok=True)
        stats = body()
        self.cache.store(key, digest, outputs, stats)
        return StageResult(pair=pair, stage=stage, seconds=time.monotonic() - started,
                           stats=stats)

    def stage_ingest(self, lang) -> StageResult:
        src_dir = os.path.join(self.cfg.corpus_root, lang)
        inputs = [os.path.join(src_dir, f) for f in self.file_ids]
        outputs = [os.path.join(self.ingest_dir(lang), f) for f in self.file_ids]

        def body():
            n_paragraphs = n_sentences = 0
            for file_id, out_path in zip(self.file_ids, outputs):
                doc = ingest.load_document(os.path.join(src_dir, file_id), lang, file_id)
                ingest.write_tokenized_document(doc, out_path)
                n_paragraphs += len(doc.paragraphs)
                n_sentences += sum(len(p) for p in doc.paragraphs)
            return {"files": len(self.file_ids), "paragraphs": n_paragraphs,
                    "sentences": n_sentences}

        return self._run_stage(lang, "ingest", "tokenize-v1", inputs, outputs, None, body)

    def stage_align(self, lang) -> StageResult:
        p = self._pair_paths(lang)
        inputs = [os.path.join(self.ingest_dir(code), f)
                  for code in (lang, self.cfg.english_code) for f in self.file_ids]
        outputs = [p["aligned_src"], p["aligned_tgt"], p["aligned_prov"]]

        def body():
            corpus = galechurch.AlignedCorpus()
            for file_id in self.file_ids:
                src_doc = ingest.read_tokenized_document(
                    os.path.join(self.ingest_dir(lang), file_id), lang, file_id)
                tgt_doc = ingest.read_tokenized_document(
                    os.path.join(self.ingest_dir(self.cfg.english_code), file_id),
                    self.cfg.english_code, file_id)
                paragraph_pairs = ingest.pair_documents(src_doc, tgt_doc)
                corpus.extend(galechurch.align_corpus(
                    paragraph_pairs, self.cfg.aligner, file_id=file_id))
            galechurch.write_aligned_corpus(
                corpus, p["aligned_src"], p["aligned_tgt"], p["aligned_prov"])
            return {"sentence_pairs": len(corpus.pairs)}

        return self._run_stage(lang, "align", self.cfg.aligner, inputs, outputs,
                               f"ingest:{lang}", body)

    def stage_wordalign(self, lang) -> StageResult:
        p = self._pair_paths(lang)
        inputs = [p["aligned_src"], p["aligned_tgt"]]
        outputs = [p["table_fe"], p["table_ef"], p["alignments"]]
        em = (self.cfg.em_iterations, self.cfg.em_prob_floor, self.cfg.em_null,
              self.cfg.symmetrization)

        def body():
            corpus = galechurch.read_aligned_corpus(p["aligned_src"], p["aligned_tgt"])
            pairs_fe = [(tgt, src) for src, tgt in corpus.pairs]  # t(f|e): english conditions
            pairs_ef = corpus.pairs  # t(e|f): foreign conditions
            table_fe = model1.train_model1(
                pairs_fe, self.cfg.em_iterations, self.cfg.em_prob_floor,
                self.cfg.em_null, direction=f"{lang}|{self.cfg.english_code}")
            table_ef = model1.train_model1(
                pairs_ef, self.cfg.em_iterations, self.cfg.em_prob_floor,
                self.cfg.em_null, direction=f"{self.cfg.english_code}|{lang}")
            model1.write_translation_table(table_fe, p["table_fe"])
            model1.write_translation_table(table_ef, p["table_ef"])
            with open(p["alignments"], "w", encoding="utf-8") as fh:
                for src, tgt in corpus.pairs:
                    src_to_tgt = model1.viterbi_align(src, tgt, table_ef)
                    tgt_to_src = model1.viterbi_align(tgt, src, table_fe)
                    links = model1.symmetrize(src_to_tgt, tgt_to_src,
                                              self.cfg.symmetrization)
                    fh.write(" ".join(f"{i}-{j}" for i, j in sorted(links)) + "\n")
            return {"sentence_pairs": len(corpus.pairs),
                    "final_ll_f_given_e": table_fe.log_likelihoods[-1],
                    "final_ll_e_given_f": table_ef.log_likelihoods[-1]}

        return self._run_stage(lang, "wordalign", em, inputs, outputs,
                               f"align:{lang}", body)

    def stage_phrases(self, lang) -> StageResult:
        p = self._pair_paths(lang)
        inputs = [p["aligned_src"], p["aligned_tgt"], p["table_fe"], p["table_ef"],
                  p["alignments"]]
        outputs = [p["phrase_table"]]

        def body():
            corpus = galechurch.read_aligned_corpus(p["aligned_src"], p["aligned_tgt"])
            table_fe = model1.read_translation_table(p["table_fe"])
            table_ef = model1.read_translation_table(p["table_ef"])
            instances = []
            with open(p["alignments"], encoding="utf-8") as fh:
                for idx, line in enumerate(fh):
                    links = {tuple(int(x) for x in link.split("-"))
                             for link in line.split()}
                    src, tgt = corpus.pairs[idx]
                    instances.extend(phrases.extract_phrase_pairs(
                        src, tgt, links, self.cfg.max_phrase_len, origin=idx))
            table = phrases.score_phrase_table(
                instances, table_fe, table_ef, len(corpus.pairs))
            phrases.write_phrase_table(table, p["phrase_table"])
            return {"instances": len(instances), "entries": len(table)}

        return self._run_stage(lang, "phrases", self.cfg.max_phrase_len, inputs,
                               outputs, f"wordalign:{lang}", body)

    def stage_prune(self, lang) -> StageResult:
        p = self._pair_paths(lang)
        inputs = [p["phrase_table"], p["aligned_src"], p["aligned_tgt"]]
        outputs = [p["pruned_table"], p["prune_report"]]

        def body():
            table = phrases.read_phrase_table(p["phrase_table"])
            corpus = galechurch.read_aligned_corpus(p["aligned_src"], p["aligned_tgt"])
            counts = significance.contingency_counts(table, corpus)
            kept, report = significance.prune(table, counts, self.cfg.prune_config)
            phrases.write_phrase_table(kept, p["pruned_table"])
            significance.write_prune_report(report, p["prune_report"])
            return {"entries_in": len(table), "entries_kept": report.kept_count,
                    "entries_pruned": report.pruned_count,
                    "threshold": report.threshold}

        return self._run_stage(lang, "prune", self.cfg.prune_config, inputs, outputs,
                               f"phrases:{lang}", body)

    def stage_markers(self, lang) -> StageResult:
        p = self._pair_paths(lang)
        inputs = [p["pruned_table"], self.cfg.markers_file]
        outputs = [p["candidates"]]

        def body():
            table = phrases.read_phrase_table(p["pruned_table"])
            seeds = lexmod.load_seed_markers(self.cfg.markers_file)
            selected = kept_rows = 0
            with open(p["candidates"], "w", encoding="utf-8") as fh:
                fh.write("marker\tlanguage\ttranslation\tscore\tjoint_count\tcontext\n")
                for marker in seeds.markers:
                    raw = lexmod.select_candidates(table, marker, language=lang)
                    selected += len(raw)
                    stripped = [lexmod.strip_punctuation_context(c) for c in raw]
                    for cand in lexmod.filter_candidates(stripped, self.cfg.filter_policy):
                        kept_rows += 1
                        fh.write(
                            f"{' '.join(cand.marker)}\t{cand.language}"
                            f"\t{' '.join(cand.translation)}\t{cand.score:.6g}"
                            f"\t{cand.raw_entry.joint_count:g}\t{cand.context}\n")
            return {"markers": len(seeds.markers), "candidates_selected": selected,
                    "candidates_kept": kept_rows}

        return self._run_stage(lang, "markers", self.cfg.filter_policy, inputs,
                               outputs, f"prune:{lang}", body)

    def stage_lexicon(self, languages) -> StageResult:
        inputs = [self._pair_paths(lang)["candidates"] for lang in languages]
        inputs.append(self.cfg.markers_file)
        lex_tsv = os.path.join(self.out, "lexicon.tsv")
        lex_json = os.path.join(self.out, "lexicon.json")
        outputs = [lex_tsv, lex_json]

        def body():
            seeds = lexmod.load_seed_markers(self.cfg.markers_file)
            lex = lexmod.Lexicon()
            for marker in seeds.markers:
                lex.entries[marker] = {}
            n_records = 0
            for lang in languages:
                with open(self._pair_paths(lang)["candidates"], encoding="utf-8") as fh:
                    next(fh)  # header
                    for line in fh:
                        marker_s, language, translation_s, score_s, count_s, context = (
                            line.rstrip("\n").split("\t"))
                        marker = tuple(marker_s.split())
                        rec = lexmod.LexiconRecord(
                            translation=tuple(translation_s.split()),
                            score=float(score_s), joint_count=float(count_s),
                            context=context)
                        lex.entries.setdefault(marker, {}).setdefault(language, []).append(rec)
                        n_records += 1
            for langs in lex.entries.values():
                for records in langs.values():
                    records.sort(key=lambda r: (-r.score, " ".join(r.translation)))
            lexmod.export_lexicon(lex, "tsv", lex_tsv)
            lexmod.export_lexicon(lex, "structured", lex_json)
            covered = sum(1 for langs in lex.entries.values() if langs)
            return {"markers": len(lex.entries), "markers_with_translations": covered,
                    "records": n_records}

        params = ("lexicon-v1", tuple(languages))
        return self._run_stage("all", "lexicon", params, inputs, outputs, None, body)


def run_pipeline(config: PipelineConfig, stages=None) -> RunReport:
    """Execute the stage graph for every language pair; failures halt only
    the affected pair. Results appear in config order."""
    selected = [s for s in STAGES if stages is None or s in stages]
    runner = PipelineRunner(config)
    report = RunReport()

    ingest_langs = []
    if "ingest" in selected:
        ingest_langs = [config.english_code] + list(config.foreign_codes)
    ingest_ok = {}
    for lang in ingest_langs:
        try:
            report.results.append(runner.stage_ingest(lang))
            ingest_ok[lang] = True
        except Exception as exc:  # noqa: BLE001 - reported per stage
            report.results.append(StageResult(pair=lang, stage="ingest", error=str(exc)))
            ingest_ok[lang] = False

    per_pair_stages = [s for s in selected if s in ("align", "wordalign", "phrases",
                                                    "prune", "markers")]

    def run_pair(lang):
        results = []
        if not ingest_ok.get(lang, True) or not ingest_ok.get(config.english_code, True):
            results.append(StageResult(pair=lang, stage="align",
                                       error="skipped: ingest failed"))
            return results, False
        stage_fns = {
            "align": runner.stage_align,
            "wordalign": runner.stage_wordalign,
            "phrases": runner.stage_phrases,
            "prune": runner.stage_prune,
            "markers": runner.stage_markers,
        }
        for stage in per_pair_stages:
            try:
                results.append(stage_fns[stage](lang))
            except Exception as exc:  # noqa: BLE001 - reported per stage
                results.append(StageResult(pair=lang, stage=stage, error=str(exc)))
                return results, False
        return results, True

    pair_ok = {}
    if per_pair_stages:
        if config.jobs > 1:
            with ThreadPoolExecutor(max_workers=config.jobs) as pool:
                futures = {lang: pool.submit(run_pair, lang)
                           for lang in config.foreign_codes}
            for lang in config.foreign_codes:
                results, ok = futures[lang].result()
                report.results.extend(results)
                pair_ok[lang] = ok
        else:
            for lang in config.foreign_codes:
                results, ok = run_pair(lang)
                report.results.extend(results)
                pair_ok[lang] = ok
    else:
        pair_ok = {lang: True for lang in config.foreign_codes}

    if "lexicon" in selected:
        ready = [lang for lang in config.foreign_codes
                 if pair_ok.get(lang, False) and os.path.isfile(
                     runner._pair_paths(lang)["candidates"])]
        try:
            report.results.append(runner.stage_lexicon(ready))
        except Exception as exc:  # noqa: BLE001 - reported per stage
            report.results.append(StageResult(pair="all", stage="lexicon", error=str(exc)))

    write_report(report, config.output_dir)
    return report


def render_report(report: RunReport) -> str:
    lines = []
    for r in report.results:
        status = "FAILED" if r.error else ("cached" if r.cache_hit else "ran")
        stats = " ".join(f"{k}={v}" for k, v in sorted(r.stats.items()))
        line = f"{r.stage:10s} {r.pair:8s} {status:7s} {r.seconds:8.3f}s  {stats}"
        if r.error:
            line += f"  error: {r.error}"
        lines.append(line)
    lines.append(f"overall: {'ok' if report.ok else 'FAILED'}")
    return "\n".join(lines) + "\n"


def write_report(report: RunReport, output_dir) -> None:
    with open(os.path.join(output_dir, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(render_report(report))
    doc = {
        "ok": report.ok,
        "stages": [
            {"pair": r.pair, "stage": r.stage, "cache_hit": r.cache_hit,
             "seconds": r.seconds, "stats": r.stats, "error": r.error}
            for r in report.results
        ],
    }
    with open(os.path.join(output_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")

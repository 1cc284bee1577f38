import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dmlex.model1 import (
    NULL_WORD,
    DirectionalAlignment,
    TranslationTable,
    corpus_log_likelihood,
    directional_links,
    read_translation_table,
    symmetrize,
    train_model1,
    viterbi_align,
    write_translation_table,
)

TOY = [(["the", "house"], ["la", "maison"]), (["the"], ["la"])]


class TestTrainModel1:
    def test_first_iteration_matches_hand_run(self):
        # hand-run EM: count(la|the) = 0.5 + 1.0 = 1.5, total(the) = 2.0
        table = train_model1(TOY, iterations=1, use_null=False)
        assert table.probs["the"]["la"] == pytest.approx(0.75, abs=1e-12)

    def test_toy_corpus_converges(self):
        table = train_model1(TOY, iterations=30, use_null=False)
        assert table.probs["the"]["la"] >= 0.999
        # t(maison|house) approaches 1 only as 1 - 1/(2n); check the trend
        assert table.probs["house"]["maison"] >= 0.98
        slower = train_model1(TOY, iterations=10, use_null=False)
        assert table.probs["house"]["maison"] > slower.probs["house"]["maison"]

    def test_single_pair_converges_in_one_iteration(self):
        table = train_model1([(["a"], ["x"])], iterations=1, use_null=False)
        assert table.probs["a"]["x"] == pytest.approx(1.0, abs=1e-12)

    def test_distributions_normalized(self):
        table = train_model1(TOY, iterations=5, use_null=True)
        for cond, dist in table.probs.items():
            assert sum(dist.values()) == pytest.approx(1.0, abs=1e-9), cond

    def test_log_likelihood_non_decreasing(self):
        for use_null in (False, True):
            table = train_model1(TOY, iterations=20, use_null=use_null)
            lls = table.log_likelihoods
            assert len(lls) == 20
            assert all(b >= a - 1e-12 for a, b in zip(lls, lls[1:]))

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            train_model1([], iterations=1)

    def test_zero_iterations_rejected(self):
        with pytest.raises(ValueError):
            train_model1(TOY, iterations=0)

    def test_deterministic(self):
        t1 = train_model1(TOY, iterations=10)
        t2 = train_model1(TOY, iterations=10)
        assert t1.probs == t2.probs
        assert t1.log_likelihoods == t2.log_likelihoods

    def test_floor_pruning_drops_tiny_probabilities(self):
        corpus = [(["a", "b"], ["x"]) for _ in range(5)] + [(["a"], ["x"])] * 50
        table = train_model1(corpus, iterations=10, prob_floor=0.05, use_null=False)
        assert all(p >= 0.05 for dist in table.probs.values() for p in dist.values())
        for dist in table.probs.values():
            assert sum(dist.values()) == pytest.approx(1.0, abs=1e-9)


class TestViterbiAlign:
    def test_converged_toy_table(self):
        table = train_model1(TOY, iterations=30, use_null=False)
        alignment = viterbi_align(["the", "house"], ["la", "maison"], table)
        assert alignment.links == [0, 1]

    def test_uniform_table_ties_break_to_first_position(self):
        table = TranslationTable(
            direction="",
            probs={"a": {"x": 0.5, "y": 0.5}, "b": {"x": 0.5, "y": 0.5}},
            use_null=False,
            generated_vocab={"x", "y"},
        )
        alignment = viterbi_align(["a", "b"], ["x", "y"], table)
        assert alignment.links == [0, 0]

    def test_oov_links_to_null(self):
        table = train_model1(TOY, iterations=5, use_null=False)
        alignment = viterbi_align(["the"], ["zzz"], table)
        assert alignment.links == [None]

    def test_null_loses_ties(self):
        table = TranslationTable(
            direction="",
            probs={NULL_WORD: {"x": 0.5}, "a": {"x": 0.5}},
            use_null=True,
            generated_vocab={"x"},
        )
        assert viterbi_align(["a"], ["x"], table).links == [0]


def _dir(links, cond_len):
    return DirectionalAlignment(links=links, conditioning_len=cond_len)


class TestSymmetrize:
    def test_identical_alignments_idempotent(self):
        src_to_tgt = _dir([0, 1], 2)  # tgt j -> src i
        tgt_to_src = _dir([0, 1], 2)
        expected = {(0, 0), (1, 1)}
        for heuristic in ("intersection", "union", "grow-diag-final-and"):
            assert symmetrize(src_to_tgt, tgt_to_src, heuristic) == expected

    def test_intersection_and_union(self):
        # a_fe = {(0,0),(1,1)}, a_ef = {(0,0)}
        src_to_tgt = _dir([0, 1], 2)
        tgt_to_src = _dir([0, None], 2)
        assert symmetrize(src_to_tgt, tgt_to_src, "intersection") == {(0, 0)}
        assert symmetrize(src_to_tgt, tgt_to_src, "union") == {(0, 0), (1, 1)}

    def test_grow_diag_final_and_hand_executed(self):
        # 3x3: intersection {(1,1)}; union adds (0,0), (2,2), (0,2).
        # Hand execution: (0,0) and (2,2) join via the diagonal growth from
        # (1,1); (0,2) joins while tgt 2 is still unaligned.
        src_to_tgt = _dir([0, 1, 2], 3)
        tgt_to_src = _dir([2, 1, None], 3)
        result = symmetrize(src_to_tgt, tgt_to_src, "grow-diag-final-and")
        assert result == {(1, 1), (0, 0), (2, 2), (0, 2)}

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ValueError):
            symmetrize(_dir([0, 1], 2), _dir([0], 3))

    @given(
        st.integers(1, 5),
        st.integers(1, 5),
        st.data(),
    )
    def test_sandwich_property(self, src_len, tgt_len, data):
        links_a = data.draw(
            st.lists(
                st.one_of(st.none(), st.integers(0, src_len - 1)),
                min_size=tgt_len,
                max_size=tgt_len,
            )
        )
        links_b = data.draw(
            st.lists(
                st.one_of(st.none(), st.integers(0, tgt_len - 1)),
                min_size=src_len,
                max_size=src_len,
            )
        )
        src_to_tgt = _dir(links_a, src_len)
        tgt_to_src = _dir(links_b, tgt_len)
        inter = symmetrize(src_to_tgt, tgt_to_src, "intersection")
        gdfa = symmetrize(src_to_tgt, tgt_to_src, "grow-diag-final-and")
        union = symmetrize(src_to_tgt, tgt_to_src, "union")
        assert inter <= gdfa <= union


class TestCorpusLogLikelihood:
    def test_certain_pair_is_zero(self):
        table = train_model1([(["a"], ["x"])], iterations=1, use_null=False)
        assert corpus_log_likelihood([(["a"], ["x"])], table) == pytest.approx(0.0, abs=1e-12)

    def test_direct_substitution(self):
        table = TranslationTable(
            direction="", probs={"a": {"x": 0.5}}, use_null=False, generated_vocab={"x"}
        )
        assert corpus_log_likelihood([(["a"], ["x"])], table) == pytest.approx(
            math.log(0.5), abs=1e-12
        )

    def test_matches_brute_force_summation(self):
        table = train_model1(TOY, iterations=1, use_null=False)
        # independent direct summation of Model 1 likelihood
        expected = 0.0
        for cond, gen in TOY:
            for g in gen:
                expected += math.log(
                    sum(table.probs.get(c, {}).get(g, table.prob_floor) for c in cond)
                    / len(cond)
                )
        assert corpus_log_likelihood(TOY, table) == pytest.approx(expected, rel=1e-12)


class TestSerialization:
    def test_round_trip(self, tmp_path):
        table = train_model1(TOY, iterations=5, use_null=True)
        path = tmp_path / "table.tsv"
        write_translation_table(table, path)
        back = read_translation_table(path)
        assert back.direction == table.direction
        assert back.use_null == table.use_null
        assert set(back.probs) == set(table.probs)
        for cond in table.probs:
            for gen, p in table.probs[cond].items():
                assert back.probs[cond][gen] == pytest.approx(p, rel=1e-7)

    def test_null_is_spelled_out(self, tmp_path):
        table = train_model1(TOY, iterations=2, use_null=True)
        path = tmp_path / "table.tsv"
        write_translation_table(table, path)
        body = path.read_text(encoding="utf-8")
        assert "<NULL>\t" in body


def test_directional_links_drops_null():
    assert directional_links(_dir([1, None, 0], 2)) == {(1, 0), (0, 2)}

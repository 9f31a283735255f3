from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quillmark.corpus import (
    DISPUTED,
    REASON_AUTHOR_BELOW_MIN_PLAYS,
    REASON_BELOW_MIN_UTTERANCES,
    SINGLE_AUTHOR,
    FilterConfig,
    PlayRecord,
    SegmenterConfig,
    Utterance,
    filter_corpus,
    normalize_text,
    segment_and_chunk,
    split_utterances_plain,
    split_utterances_xml,
)


def make_play(play_id: str, author: str, utterance_words: list[int]) -> PlayRecord:
    utts = [Utterance(speaker=None, text=" ".join(f"w{i}" for i in range(n)), word_count=n) for n in utterance_words]
    return PlayRecord(play_id=play_id, title=play_id, author=author, source="test", raw_text="", utterances=utts)


class TestNormalizeText:
    def test_ascii_identity(self):
        assert normalize_text("plain ASCII text") == "plain ASCII text"

    def test_line_breaks_become_spaces(self):
        assert normalize_text("a\nb\r\nc") == "a b c"

    def test_curly_apostrophe(self):
        assert normalize_text("don’t") == "don't"

    def test_typographic_replacements(self):
        assert normalize_text("“quoted” — and…") == '"quoted" - and...'

    def test_accented_latin_preserved(self):
        assert normalize_text("café naïve") == "café naïve"

    def test_non_latin_removed(self):
        assert normalize_text("alpha αβ beta") == "alpha beta"

    def test_long_s_and_ligatures(self):
        assert normalize_text("bleſt ﬁre") == "blest fire"

    def test_whitespace_collapse(self):
        assert normalize_text("  a \t b  c  ") == "a b c"

    @given(st.text(max_size=200))
    @settings(max_examples=200, deadline=None)
    def test_idempotent(self, raw):
        once = normalize_text(raw)
        assert normalize_text(once) == once

    @given(st.text(max_size=200))
    @settings(max_examples=200, deadline=None)
    def test_output_is_single_line_near_ascii(self, raw):
        out = normalize_text(raw)
        assert "\n" not in out and "\r" not in out
        assert "  " not in out


class TestSegmentAndChunk:
    def test_exact_division(self):
        play = make_play("p1", "A", [900])
        samples = segment_and_chunk(play, SegmenterConfig(max_words=450, min_words=5))
        assert [s.word_count for s in samples] == [450, 450]

    def test_trailing_short_chunk_discarded(self):
        play = make_play("p1", "A", [451])
        samples = segment_and_chunk(play, SegmenterConfig())
        assert [s.word_count for s in samples] == [450]

    def test_short_utterance_dropped(self):
        play = make_play("p1", "A", [4])
        assert segment_and_chunk(play, SegmenterConfig()) == []

    def test_ids_deterministic_and_ordered(self):
        play = make_play("p1", "A", [10, 900])
        samples = segment_and_chunk(play, SegmenterConfig())
        assert [s.sample_id for s in samples] == ["p1-u00000-c000", "p1-u00001-c000", "p1-u00001-c001"]

    @given(st.lists(st.integers(min_value=0, max_value=1200), min_size=1, max_size=8))
    @settings(max_examples=100, deadline=None)
    def test_bounds_and_length_conservation(self, lengths):
        cfg = SegmenterConfig(max_words=450, min_words=5)
        play = make_play("p1", "A", lengths)
        samples = segment_and_chunk(play, cfg)
        for s in samples:
            assert cfg.min_words <= s.word_count <= cfg.max_words
            assert s.word_count == len(s.text.split())
        # kept + discarded words add back up to the utterance total
        kept = sum(s.word_count for s in samples)
        discarded = 0
        for n in lengths:
            for c in range(0, max(1, -(-n // cfg.max_words))):
                size = min(cfg.max_words, n - c * cfg.max_words)
                if size < cfg.min_words:
                    discarded += size
        assert kept + discarded == sum(lengths)

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            SegmenterConfig(max_words=4, min_words=5)


class TestFilterCorpus:
    def _fixture(self):
        plays = [
            make_play("keep1", "A", [30] * 300),
            make_play("keep2", "A", [30] * 350),
            make_play("keep3", "A", [30] * 300),
            make_play("short", "B", [30] * 299),
            make_play("dual", "C", [30] * 400),
            make_play("lone1", "D", [30] * 320),
        ]
        authorship = {p.play_id: SINGLE_AUTHOR for p in plays}
        authorship["dual"] = DISPUTED
        samples = {p.play_id: segment_and_chunk(p, SegmenterConfig()) for p in plays}
        return plays, authorship, samples

    def test_partition_and_reasons(self):
        plays, authorship, samples = self._fixture()
        cfg = FilterConfig(min_utterances_per_play=300, min_plays_per_author=3)
        primary, disputed, rejected = filter_corpus(plays, authorship, cfg, samples)
        assert sorted(p.play_id for p in primary) == ["keep1", "keep2", "keep3"]
        assert [p.play_id for p in disputed] == ["dual"]
        assert dict(rejected) == {
            "short": REASON_BELOW_MIN_UTTERANCES,
            "lone1": REASON_AUTHOR_BELOW_MIN_PLAYS,
        }

    def test_author_with_exactly_min_plays_kept(self):
        plays, authorship, samples = self._fixture()
        cfg = FilterConfig(min_utterances_per_play=300, min_plays_per_author=3)
        primary, _, _ = filter_corpus(plays, authorship, cfg, samples)
        assert {p.author for p in primary} == {"A"}

    def test_disjoint_and_complete(self):
        plays, authorship, samples = self._fixture()
        cfg = FilterConfig(min_utterances_per_play=300, min_plays_per_author=3)
        primary, disputed, rejected = filter_corpus(plays, authorship, cfg, samples)
        buckets = [p.play_id for p in primary] + [p.play_id for p in disputed] + [pid for pid, _ in rejected]
        assert sorted(buckets) == sorted(p.play_id for p in plays)

    def test_missing_authorship_is_error(self):
        plays, authorship, samples = self._fixture()
        del authorship["keep1"]
        with pytest.raises(KeyError, match="keep1"):
            filter_corpus(plays, authorship, FilterConfig(), samples)


class TestIngestion:
    def test_plain_blocks(self):
        raw = "First speech here\nacross two lines\n\nSecond speech\n\n\nThird"
        utts = split_utterances_plain(raw)
        assert [u.text for u in utts] == ["First speech here across two lines", "Second speech", "Third"]
        assert [u.word_count for u in utts] == [6, 2, 1]

    def test_xml_sp_elements(self):
        raw = (
            "<play><body>"
            "<sp><speaker>HAMLET.</speaker><l>To be or not</l><l>to be</l></sp>"
            "<sp who='GHOST'>Mark me.</sp>"
            "</body></play>"
        )
        utts = split_utterances_xml(raw)
        assert [u.speaker for u in utts] == ["HAMLET.", "GHOST"]
        assert [u.text for u in utts] == ["To be or not to be", "Mark me."]

    def test_empty_author_rejected(self):
        with pytest.raises(ValueError):
            PlayRecord(play_id="x", title="x", author="", source="", raw_text="")

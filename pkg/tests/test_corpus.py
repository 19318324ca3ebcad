import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import content
from mixner.corpus import (ColumnSpec, Dataset, ParseError, Sentence, TagSet,
                           Token, induce_tagset, mix_datasets, parse_conll,
                           validate_iob, write_conll)


def sent(pairs, id=None):
    return Sentence(tuple(Token(w, t) for w, t in pairs), id=id)


class TestParse:
    def test_table1(self, table1_text):
        ds = parse_conll(table1_text)
        assert len(ds) == 1
        s = ds.sentences[0]
        assert s.surfaces == ["hameM", "this", "magic", "moment"]
        assert s.tags == ["O", "B-CW", "I-CW", "I-CW"]

    def test_table1_language_column(self, table1_lang_text):
        layout = ColumnSpec(token_column=0, tag_column="last", lang_column=1)
        ds = parse_conll(table1_lang_text, layout)
        assert [t.lang for t in ds.sentences[0].tokens] == ["Hi", "En", "En", "En"]

    def test_table2(self, table2_text):
        ds = parse_conll(table2_text)
        assert [len(s) for s in ds] == [10, 7, 5]
        assert ds.sentences[1].tags == ["O", "O", "O", "B-CW", "I-CW", "I-CW", "O"]
        assert ds.sentences[2].tags == ["O", "B-CW", "I-CW", "O", "O"]

    def test_multiconer_four_column(self, multiconer_text):
        ds = parse_conll(multiconer_text)
        assert len(ds) == 2
        assert ds.sentences[0].id == "5bb93fba-ba27-4a91-9b6d-ed1a9e4ff94b"
        assert ds.sentences[0].surfaces[:4] == ["what", "city", "is", "dig"]
        assert ds.sentences[0].tags[3] == "B-CW"

    def test_empty_document(self):
        assert len(parse_conll("")) == 0

    def test_consecutive_blank_lines_collapse(self):
        ds = parse_conll("a\tO\n\n\n\nb\tO\n")
        assert [s.surfaces for s in ds] == [["a"], ["b"]]

    def test_id_equals_form(self):
        ds = parse_conll("# id = my sentence\nfoo\tO\n")
        assert ds.sentences[0].id == "my sentence"

    def test_missing_tag_column(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_conll("a\tO\nb\n")

    def test_bad_tag(self):
        with pytest.raises(ParseError, match="line 1.*X-CW"):
            parse_conll("a\tX-CW\n")

    def test_zero_is_not_a_tag(self):
        with pytest.raises(ParseError, match="invalid IOB tag"):
            parse_conll("das\t0\n")

    def test_lenient_mode_fills_o(self):
        ds = parse_conll("hello\nworld\n", require_tags=False)
        assert ds.sentences[0].tags == ["O", "O"]

    def test_hash_initial_token_is_not_metadata(self):
        ds = parse_conll("#hashtag\tO\n")
        assert ds.sentences[0].surfaces == ["#hashtag"]

    def test_bare_hash_token_round_trips(self):
        # "#\tO" is a data line; only "#" alone or "# ..." is metadata.
        ds = parse_conll("#\tO\n")
        assert ds.sentences[0].surfaces == ["#"]
        assert parse_conll(write_conll(ds)).sentences[0].surfaces == ["#"]

    def test_tab_separator_keeps_underscores(self, multiconer_text):
        layout = ColumnSpec(separator="tab")
        ds = parse_conll(multiconer_text.replace(" _ _ ", "\t_\t_\t"), layout)
        assert ds.sentences[0].tags[3] == "B-CW"


class TestWrite:
    def test_round_trip_table1(self, table1_text):
        ds = parse_conll(table1_text)
        assert content(parse_conll(write_conll(ds))) == content(ds)

    def test_round_trip_multiconer(self, multiconer_text):
        ds = parse_conll(multiconer_text)
        again = parse_conll(write_conll(ds))
        assert content(again) == content(ds)

    def test_empty_dataset(self):
        assert write_conll(Dataset()) == ""

    def test_single_interior_blank_line(self):
        ds = Dataset((sent([("a", "O")]), sent([("b", "O")])))
        assert write_conll(ds) == "a\tO\n\nb\tO\n"

    def test_id_line_written(self):
        ds = Dataset((sent([("a", "O")], id="s1"),))
        assert write_conll(ds) == "# id = s1\na\tO\n"


class TestIob:
    def test_valid_sequence_clean(self, table1_text):
        assert validate_iob(parse_conll(table1_text), "strict") == []

    def test_stray_inside_reported(self):
        ds = Dataset((sent([("a", "O"), ("b", "I-CW")]),))
        violations = validate_iob(ds, "strict")
        assert len(violations) == 1
        assert (violations[0].sentence, violations[0].position) == (0, 1)

    def test_repair_stray_inside(self):
        ds = Dataset((sent([("a", "O"), ("b", "I-CW"), ("c", "I-CW")]),))
        fixed = validate_iob(ds, "repair")
        assert fixed.sentences[0].tags == ["O", "B-CW", "I-CW"]

    def test_repair_class_switch(self):
        ds = Dataset((sent([("a", "I-PROD"), ("b", "I-CW")]),))
        fixed = validate_iob(ds, "repair")
        assert fixed.sentences[0].tags == ["B-PROD", "B-CW"]

    def test_repair_idempotent(self):
        ds = Dataset((sent([("a", "I-X"), ("b", "O"), ("c", "I-Y")]),))
        once = validate_iob(ds, "repair")
        assert content(validate_iob(once, "repair")) == content(once)
        assert validate_iob(once, "strict") == []


class TestTagset:
    def test_table1_tagset(self, table1_text):
        ts = induce_tagset(parse_conll(table1_text))
        assert ts.tags == ("O", "B-CW", "I-CW")
        assert ts.classes == ("CW",)

    def test_only_o(self):
        ts = induce_tagset(Dataset((sent([("a", "O")]),)))
        assert ts.tags == ("O",)

    def test_closure_adds_begin(self):
        ds = Dataset((sent([("a", "I-PROD")]),))
        assert induce_tagset(ds).tags == ("O", "B-PROD", "I-PROD")

    def test_order_insensitive(self, table2_text):
        ds = parse_conll(table2_text)
        reversed_ds = Dataset(tuple(reversed(ds.sentences)))
        assert induce_tagset(ds) == induce_tagset(reversed_ds)

    def test_invalid_tagset_rejected(self):
        with pytest.raises(ValueError):
            TagSet(("B-CW", "O"))
        with pytest.raises(ValueError):
            TagSet(("O", "I-CW"))


class TestMix:
    def make(self, n, prefix, label):
        return Dataset(tuple(sent([(f"{prefix}{i}", "O")]) for i in range(n)),
                       source_label=label)

    def test_size_additivity(self):
        mixed = mix_datasets(self.make(3, "a", "cm"),
                             [self.make(2, "b", "ml"), self.make(1, "c", "xx")])
        assert len(mixed) == 6

    def test_identity_without_shuffle(self):
        ds = self.make(4, "a", "cm")
        mixed = mix_datasets(ds)
        assert [s.surfaces for s in mixed] == [s.surfaces for s in ds]

    def test_source_preserved(self):
        mixed = mix_datasets(self.make(1, "a", "cm"), [self.make(1, "b", "ml")])
        assert [s.source for s in mixed] == ["cm", "ml"]

    def test_shuffle_is_permutation(self):
        mixed = mix_datasets(self.make(5, "a", "cm"), [self.make(5, "b", "ml")],
                             seed=3, shuffle=True)
        assert sorted(s.surfaces[0] for s in mixed) == sorted(
            f"{p}{i}" for p in "ab" for i in range(5))

    def test_same_seed_same_bytes(self):
        a = self.make(6, "a", "cm")
        b = self.make(6, "b", "ml")
        one = write_conll(mix_datasets(a, [b], seed=13, shuffle=True))
        two = write_conll(mix_datasets(a, [b], seed=13, shuffle=True))
        assert one == two

    def test_different_seed_usually_differs(self):
        a = self.make(8, "a", "cm")
        b = self.make(8, "b", "ml")
        one = write_conll(mix_datasets(a, [b], seed=1, shuffle=True))
        two = write_conll(mix_datasets(a, [b], seed=2, shuffle=True))
        assert one != two


# Hypothesis strategies for arbitrary IOB-valid datasets.

surfaces = st.text(
    alphabet=st.characters(whitelist_categories=("L", "N", "P", "S")),
    min_size=1, max_size=6)
classes = st.sampled_from(["CW", "PROD", "GRP"])


@st.composite
def sentences(draw):
    chunks = draw(st.lists(
        st.one_of(st.none(), st.tuples(classes, st.integers(1, 3))),
        min_size=1, max_size=5))
    pairs = []
    for chunk in chunks:
        if chunk is None:
            pairs.append((draw(surfaces), "O"))
        else:
            cls, length = chunk
            pairs.append((draw(surfaces), f"B-{cls}"))
            for _ in range(length - 1):
                pairs.append((draw(surfaces), f"I-{cls}"))
    id_ = draw(st.none() | st.from_regex(r"[A-Za-z0-9_.-]{1,12}", fullmatch=True))
    return sent(pairs, id=id_)


datasets = st.builds(lambda ss: Dataset(tuple(ss)),
                     st.lists(sentences(), min_size=0, max_size=5))


@settings(max_examples=60, deadline=None)
@given(datasets)
def test_round_trip_property(ds):
    assert content(parse_conll(write_conll(ds))) == content(ds)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(["O", "B-CW", "I-CW", "B-PROD", "I-PROD"]),
                min_size=1, max_size=8))
def test_repair_idempotent_property(tags):
    ds = Dataset((sent([(f"w{i}", t) for i, t in enumerate(tags)]),))
    once = validate_iob(ds, "repair")
    assert validate_iob(once, "strict") == []
    assert content(validate_iob(once, "repair")) == content(once)

import pytest
from hypothesis import given
from hypothesis import strategies as st

from builders import commutation_cases, simple_element, split_sequences, wide_element
from gkfuse.algebra import AlgebraError
from gkfuse.words import (HomT, MorphismWord, SplitT, commute_inv_corner_past_split, level_one_word,
                          normal_form_chain, normalize, verify_commutation)

SEQ = split_sequences()[1]  # C -> C + D2 -> D2; objects are matched by label, so keep them distinct
TOK = {"i": HomT(SEQ.iota, name="i"), "D": SplitT(SEQ, name="D"), "f": HomT(SEQ.f, name="f"),
       "s": HomT(SEQ.s, name="s")}
# composable steps from each object of the sequence
STEPS = {"J": ["i"], "X": ["D", "f"], "A": ["s"]}
TARGET = {"i": "X", "D": "J", "f": "A", "s": "X"}


@st.composite
def walks(draw, start="X", max_len=6):
    cur, toks = start, []
    for _ in range(draw(st.integers(1, max_len))):
        name = draw(st.sampled_from(STEPS[cur]))
        toks.append(name)
        cur = TARGET[name]
    return toks, cur


@st.composite
def words(draw):
    toks, end = draw(walks())
    terms = [(draw(st.integers(-3, 3).filter(bool)), toks)]
    for _ in range(draw(st.integers(0, 3))):
        t, e = draw(walks())
        if e == end:
            terms.append((draw(st.integers(-3, 3).filter(bool)), t))
    w = None
    for c, t in terms:
        x = MorphismWord.of(*[TOK[n] for n in t], coef=c)
        w = x if w is None else w + x
    return w


def test_iota_then_split_is_identity():
    w = normalize(MorphismWord.of(TOK["i"], TOK["D"]))
    assert w.same_as(MorphismWord.identity(SEQ.J.label))


def test_split_relation_cancels():
    w = MorphismWord.identity(SEQ.X.label) - MorphismWord.of(TOK["D"], TOK["i"]) - MorphismWord.of(TOK["f"], TOK["s"])
    assert normalize(w).is_zero()


def test_section_then_split_vanishes():
    # s . D = 0 and iota . f = 0 follow from the relations
    assert normalize(MorphismWord.of(TOK["s"], TOK["D"])).is_zero()
    assert normalize(MorphismWord.of(TOK["i"], TOK["f"])).is_zero()


def test_ill_composed_word_raises():
    with pytest.raises(AlgebraError):
        MorphismWord.of(TOK["i"], TOK["f"], TOK["i"])


def test_words_with_different_ends_cannot_be_added():
    with pytest.raises(AlgebraError):
        MorphismWord.of(TOK["D"]) + MorphismWord.of(TOK["f"])


def test_trace_records_rules():
    steps = []
    normalize(MorphismWord.of(TOK["i"], TOK["D"]), trace=steps)
    assert steps and steps[0].to_json()["rule"]


@given(words())
def test_normalization_is_idempotent(w):
    n = normalize(w)
    assert normalize(n).same_as(n)


@given(words(), words())
def test_normalization_is_linear(w1, w2):
    if (w1.source, w1.target) != (w2.source, w2.target):
        return
    assert normalize(w1 + w2).same_as(normalize(normalize(w1) + normalize(w2)))


@given(words())
def test_normal_forms_have_no_reducible_pairs(w):
    for _, toks in normalize(w).terms:
        names = [t.render() for t in toks]
        for a, b in zip(names, names[1:]):
            assert (a, b) not in {("i", "D"), ("s", "D"), ("i", "f"), ("s", "f")}


def test_level_one_word_shape():
    assert level_one_word(simple_element()).shape() == ["hom", "split", "inv_corner"]
    assert level_one_word(wide_element()).render()


def test_commutation_facts_verify():
    for eM, seq in commutation_cases():
        cf = commute_inv_corner_past_split(eM, seq)
        assert cf.certificate.ok and verify_commutation(cf)
        assert cf.tensored.check() is None


def test_chain_of_three():
    z = simple_element()
    res = normal_form_chain([z, z, z])
    assert res.word.shape() == ["hom", "split", "split", "split", "inv_corner"]
    assert all(c.ok for c in res.certificates)
    assert res.log[-1].startswith("normal form")

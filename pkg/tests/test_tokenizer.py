import random

import numpy as np
import pytest

from oracles import random_corpus
from vocoptim.bpe import BpeModel, MergeRule, train_bpe
from vocoptim.corpus import Corpus
from vocoptim.exceptions import DomainError, InvalidTokenId, ModelFormatError, UnencodableCharacter
from vocoptim.serialization import dumps, escape_piece, load_model, loads, save_model, unescape_piece
from vocoptim.tokenizer import Segmentation, decode, encode, train
from vocoptim.unigram import UnigramModel


def test_segmentation_beta():
    s = Segmentation([3, 2, 3])
    assert s.beta == 3 and list(s) == [3, 2, 3]


def test_train_dispatch(mini):
    assert train("bpe", mini, 4).pieces == ("a", "b", " ", "ab")
    assert train("unigram", mini, 4).pieces == ("a", "b", " ", "ab")
    with pytest.raises(ValueError):
        train("wordpiece", mini, 4)


def test_encode_decode_contract(mini):
    m = train("bpe", mini, 4)
    seg = encode(m, "ab ab")
    assert m.id_to_piece(seg.token_ids) == ["ab", " ", "ab"]
    assert decode(m, seg) == "ab ab"
    assert decode(m, []) == ""
    with pytest.raises(InvalidTokenId):
        decode(m, [0, 4])
    with pytest.raises(UnencodableCharacter) as err:
        encode(m, "abc")
    assert err.value.position == 2


def test_encode_many_reports_sentence(mini):
    m = train("bpe", mini, 4)
    with pytest.raises(UnencodableCharacter) as err:
        m.encode_many(["ab", "b a", "xa"])
    assert err.value.sentence_index == 2


def test_duplicate_pieces_rejected():
    with pytest.raises(ValueError):
        UnigramModel(["a", "a"], np.log([0.5, 0.5]))


@pytest.mark.parametrize("piece", ["a", " ", "\\", "a b", "\t\n\r", "\\s", "é漢"])
def test_escape_roundtrip(piece):
    esc = escape_piece(piece)
    assert " " not in esc and "\t" not in esc and "\n" not in esc
    assert unescape_piece(esc) == piece


def test_mini_model_file(mini):
    text = dumps(train("bpe", mini, 4))
    assert text == "vocoptim-model v1 kind=bpe n=4\n0\ta\t-\n1\tb\t-\n2\t\\s\t-\n3\tab\t0\t1\n"


def test_ambiguous_merge_split_survives():
    # "aab" could be (a, ab) or (aa, b); the split column keeps them apart
    m = BpeModel(["a", "b"], [MergeRule("a", "b", 0), MergeRule("a", "a", 1),
                              MergeRule("aa", "b", 2)])
    back = loads(dumps(m))
    assert back == m
    assert back.merges[2] == MergeRule("aa", "b", 2)


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("kind", ["bpe", "unigram"])
def test_file_roundtrip(tmp_path, seed, kind):
    c = Corpus.from_sentences(random_corpus(random.Random(seed), max_chars=400))
    n = len(set("".join(c.sentences)) | {" "})
    m = train(kind, c, n)
    for extra in range(1, 7):
        try:
            m = train(kind, c, n + extra)
        except DomainError:
            break
    path = tmp_path / "m.txt"
    save_model(m, path)
    back = load_model(path)
    assert back == m
    assert [back.encode(s) for s in c] == [m.encode(s) for s in c]
    if kind == "unigram":
        np.testing.assert_array_equal(back.logprobs, m.logprobs)


@pytest.mark.parametrize("text", [
    "",
    "not a model\n",
    "vocoptim-model v2 kind=bpe n=1\n0\ta\t-\n",
    "vocoptim-model v1 kind=bpe n=2\n0\ta\t-\n",
    "vocoptim-model v1 kind=bpe\n",
    "vocoptim-model v1 kind=xyz n=1\n0\ta\t-\n",
    "vocoptim-model v1 kind=bpe n=1\n1\ta\t-\n",
    "vocoptim-model v1 kind=bpe n=1\n0\ta\\q\t-\n",
    "vocoptim-model v1 kind=bpe n=3\n0\ta\t-\n1\taa\t0\n2\tb\t-\n",
])
def test_malformed_files(text):
    with pytest.raises(ModelFormatError):
        loads(text)


def test_bpe_and_unigram_differ_in_type(mini):
    assert train("bpe", mini, 4) != train("unigram", mini, 4)
    assert train_bpe(mini, 4) == train_bpe(mini, 4)

from attn_exporter.tokenizer import SPECIALS, Vocab, split_with_offsets


class TestSplitWithOffsets:
    def test_offsets_reproduce_pieces(self):
        text = "int get_value ( int a ) { return a + 1 ; }"
        data = text.encode("utf-8")
        for piece in split_with_offsets(text):
            assert data[piece.char_start:piece.char_end].decode() == piece.text

    def test_non_ascii(self):
        text = "int f ( ) { return héllo ; }"
        data = text.encode("utf-8")
        pieces = split_with_offsets(text)
        assert any(p.text == "héllo" for p in pieces)
        for piece in pieces:
            assert data[piece.char_start:piece.char_end].decode() == piece.text

    def test_spans_ordered(self):
        pieces = split_with_offsets("a bb(c) ;")
        for prev, cur in zip(pieces, pieces[1:]):
            assert prev.char_end <= cur.char_start


class TestVocab:
    def test_round_trip(self):
        vocab = Vocab.build(["int f ( a )", "return a ;"])
        ids = vocab.encode(["int", "a", "zzz"])
        assert vocab.decode(ids)[:2] == ["int", "a"]
        assert vocab.decode(ids)[2] == "<unk>"

    def test_specials_first(self):
        vocab = Vocab.build(["x"])
        assert tuple(vocab.itos[:4]) == SPECIALS

    def test_serialization(self):
        vocab = Vocab.build(["a b c"])
        again = Vocab.from_dict(vocab.to_dict())
        assert again.itos == vocab.itos
        assert again.stoi == vocab.stoi

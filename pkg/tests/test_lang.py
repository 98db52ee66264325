import numpy as np
import pytest

from forcelang.core import (
    BLOCK_SIZE,
    EMBED_DIM,
    EMPTY_INDEX,
    PHRASE_VEC_DIM,
    Phrase,
    all_phrases,
    phrase_to_text,
)
from forcelang.errors import EmbeddingLookupError, InputError, TableFormatError
from forcelang.lang import (
    DEFAULT_SIGMA,
    HashingProvider,
    TableProvider,
    cosine_similarity,
    decode_binary,
    encode_binary,
    hashing_provider,
    nearest_mvv,
    nearest_phrase_to_vector,
    required_table_texts,
    table_provider,
)


def hot_indices(vec):
    return [int(i) for i in np.flatnonzero(vec)]


def test_encode_binary_examples():
    assert hot_indices(encode_binary(Phrase("quickly", "forward"))) == [5, 40]
    assert hot_indices(encode_binary(Phrase(None, "left"))) == [30, 44]
    assert hot_indices(encode_binary(Phrase(None, None))) == [30, 61]


def test_encode_binary_two_hot_invariant():
    for p in all_phrases():
        vec = encode_binary(p)
        assert vec.shape == (PHRASE_VEC_DIM,)
        assert np.sum(vec[:BLOCK_SIZE]) == 1.0
        assert np.sum(vec[BLOCK_SIZE:]) == 1.0
        assert set(np.unique(vec)) <= {0.0, 1.0}


def test_decode_binary_round_trip_exhaustive():
    for p in all_phrases():
        assert decode_binary(encode_binary(p)) == p


def test_decode_binary_empty_and_ties():
    vec = np.zeros(PHRASE_VEC_DIM)
    vec[EMPTY_INDEX] = 1.0
    vec[BLOCK_SIZE + EMPTY_INDEX] = 1.0
    assert decode_binary(vec) == Phrase(None, None)
    # all-equal vector: lowest index wins in both blocks
    assert decode_binary(np.ones(PHRASE_VEC_DIM)) == Phrase("slightly", "backward")
    assert decode_binary(np.zeros(PHRASE_VEC_DIM)) == Phrase("slightly", "backward")


def test_decode_binary_reserved_indices_read_as_empty():
    for m_idx in (12, 20, 29):
        vec = np.zeros(PHRASE_VEC_DIM)
        vec[m_idx] = 1.0
        vec[BLOCK_SIZE + 0] = 1.0
        assert decode_binary(vec) == Phrase(None, "backward")
    for d_idx in (18, 25, 29):
        vec = np.zeros(PHRASE_VEC_DIM)
        vec[0] = 1.0
        vec[BLOCK_SIZE + d_idx] = 1.0
        assert decode_binary(vec) == Phrase("slightly", None)


def test_decode_binary_validation():
    with pytest.raises(InputError):
        decode_binary(np.zeros(10))
    bad = np.zeros(PHRASE_VEC_DIM)
    bad[0] = np.nan
    with pytest.raises(InputError):
        decode_binary(bad)


def test_required_table_texts():
    texts = required_table_texts()
    # 30 words + 247 renderings, minus the 18 bare directions and the 12
    # bare modifiers that already appear as single-slot renderings, plus ""
    assert len(texts) == 259
    assert len(set(texts)) == len(texts)
    assert "" in texts
    assert "quickly" in texts
    assert "quickly forward" in texts
    assert "forward right" not in texts  # only whole renderings and words


def test_hashing_provider_deterministic_unit_vectors():
    p = HashingProvider(0)
    v1 = p.embed("left")
    v2 = p.embed("left")
    assert v1 is v2  # cached
    assert v1.shape == (EMBED_DIM,)
    assert abs(np.linalg.norm(v1) - 1.0) < 1e-6
    assert not v1.flags.writeable
    fresh = HashingProvider(0).embed("left")
    np.testing.assert_array_equal(v1, fresh)
    assert cosine_similarity(v1, v1) == pytest.approx(1.0)


def test_hashing_provider_seed_sensitivity():
    a = HashingProvider(0).embed("left")
    b = HashingProvider(1).embed("left")
    assert abs(cosine_similarity(a, b)) < 0.2


def test_hashing_provider_near_orthogonality():
    p = HashingProvider(0)
    sims = []
    for i in range(1000):
        sims.append(abs(cosine_similarity(p.embed(f"text-a-{i}"), p.embed(f"text-b-{i}"))))
    assert np.mean(sims) < 0.15


def test_hashing_provider_rejects_non_string():
    with pytest.raises(InputError):
        HashingProvider(0).embed(42)
    assert isinstance(hashing_provider(7), HashingProvider)


def test_table_provider_lookup_and_errors():
    v = np.zeros(EMBED_DIM)
    v[0] = 1.0
    p = TableProvider({"quickly": v}, source="test")
    np.testing.assert_array_equal(p.embed("quickly"), v)
    assert len(p) == 1
    assert p.texts() == ["quickly"]
    with pytest.raises(EmbeddingLookupError):
        p.embed("slowly")
    with pytest.raises(InputError):
        p.embed(None)


def write_table(path, rows, dim=EMBED_DIM):
    lines = [f"dim\t{dim}"]
    for text, vec in rows:
        lines.append(text + "\t" + "\t".join(str(x) for x in vec))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def test_table_parse_errors(tmp_path):
    path = tmp_path / "t.tsv"

    with pytest.raises(TableFormatError, match="cannot read"):
        table_provider(tmp_path / "missing.tsv")

    path.write_text("", encoding="utf-8")
    with pytest.raises(TableFormatError, match="empty"):
        table_provider(path)

    path.write_text("dimension 768\n", encoding="utf-8")
    with pytest.raises(TableFormatError, match="header"):
        table_provider(path)

    path.write_text("dim\t512\n", encoding="utf-8")
    with pytest.raises(TableFormatError, match="512"):
        table_provider(path)

    write_table(path, [("a", np.ones(10))])
    with pytest.raises(TableFormatError, match="line 2"):
        table_provider(path)

    write_table(path, [("a", np.ones(EMBED_DIM)), ("a", np.ones(EMBED_DIM))])
    with pytest.raises(TableFormatError, match="duplicate"):
        table_provider(path)

    bad = ["x"] * EMBED_DIM
    path.write_text(f"dim\t{EMBED_DIM}\n" + "a\t" + "\t".join(bad) + "\n", encoding="utf-8")
    with pytest.raises(TableFormatError, match="non-numeric"):
        table_provider(path)

    vec = np.ones(EMBED_DIM)
    vec[3] = np.inf
    write_table(path, [("a", vec)])
    with pytest.raises(TableFormatError, match="non-finite"):
        table_provider(path)

    write_table(path, [("a", np.zeros(EMBED_DIM))])
    with pytest.raises(TableFormatError, match="zero"):
        table_provider(path)

    # coverage check: one row is nowhere near the full vocabulary
    write_table(path, [("a", np.ones(EMBED_DIM))])
    with pytest.raises(TableFormatError, match="missing"):
        table_provider(path)
    partial = table_provider(path, require_vocabulary=False)
    assert len(partial) == 1


def test_table_rows_unit_normalized(tmp_path):
    path = tmp_path / "t.tsv"
    write_table(path, [("a", np.full(EMBED_DIM, 3.0))])
    p = table_provider(path, require_vocabulary=False)
    assert abs(np.linalg.norm(p.embed("a")) - 1.0) < 1e-6


def test_fixture_table_matches_hashing_provider(table, provider):
    # the committed fixture was exported from HashingProvider(0)
    assert len(table) >= 278
    for text in ("quickly", "quickly forward", "", "forward and right ?"):
        if text in table.texts():
            assert cosine_similarity(table.embed(text), provider.embed(text)) > 1 - 1e-9
    for text in required_table_texts():
        assert abs(np.linalg.norm(table.embed(text)) - 1.0) < 1e-6


def test_cosine_similarity_basics():
    assert cosine_similarity([1, 0], [2, 0]) == pytest.approx(1.0)
    assert cosine_similarity([1, 0], [0, 3]) == pytest.approx(0.0)
    assert cosine_similarity([1, 0], [-1, 0]) == pytest.approx(-1.0)
    assert cosine_similarity([0, 0], [1, 0]) == 0.0
    rng = np.random.default_rng(5)
    a, b = rng.standard_normal(8), rng.standard_normal(8)
    assert cosine_similarity(a, b) == pytest.approx(cosine_similarity(b, a))
    assert cosine_similarity(2.5 * a, b) == pytest.approx(cosine_similarity(a, b))


def test_nearest_mvv_exact_rendering_self_match(provider):
    for phrase in (Phrase("quickly", "forward"), Phrase(None, "up"),
                   Phrase("slowly", None), Phrase("slightly", "backward-down")):
        assert nearest_mvv(phrase_to_text(phrase), provider, sigma=0.99) == phrase


def test_nearest_mvv_sigma_gate(provider):
    for text in ("quickly forward", "up", "", "anything at all"):
        assert nearest_mvv(text, provider, sigma=1.0) == Phrase(None, None)
        assert nearest_mvv(text, provider, sigma=1.5) == Phrase(None, None)


def test_nearest_mvv_unrelated_text_gated_out(provider):
    # hashed embeddings are near-orthogonal, far below the default gate
    assert DEFAULT_SIGMA == 0.6
    assert nearest_mvv("I like apples", provider) == Phrase(None, None)


def test_nearest_phrase_to_vector_zero_and_shape(provider):
    assert nearest_phrase_to_vector(np.zeros(EMBED_DIM), provider) == Phrase(None, None)
    with pytest.raises(InputError):
        nearest_phrase_to_vector(np.zeros(10), provider)


def test_nearest_mvv_tie_breaks_to_canonical_order():
    phrases = all_phrases()
    base = HashingProvider(0)
    vectors = {phrase_to_text(p): base.embed(phrase_to_text(p)) for p in phrases}
    shared = base.embed("tie-vector")
    early, late = phrases[10], phrases[20]
    vectors[phrase_to_text(early)] = shared
    vectors[phrase_to_text(late)] = shared
    table = TableProvider(vectors, source="tie")
    assert nearest_phrase_to_vector(shared, table, sigma=0.5) == early


def test_mvv_matrix_cached_per_provider(provider):
    p = HashingProvider(3)
    nearest_mvv("up", p, sigma=0.5)
    first = p._mvv_matrix
    nearest_mvv("down", p, sigma=0.5)
    assert p._mvv_matrix is first

#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"

#include "corrlda/corpus.hpp"
#include "corrlda/errors.hpp"
#include "corrlda/stopwords.hpp"
#include "corrlda/tokenize.hpp"
#include "corrlda/vocabulary.hpp"
#include "test_util.hpp"

using namespace corrlda;

namespace {

Vocabulary sensory_vocab3() { return testutil::make_vocab(3, "s"); }

Vocabulary text_vocab() {
    return Vocabulary::from_tokens({"parade", "river", "boat", "street", "crowd"});
}

Corpus tiny_corpus() {
    std::vector<Document> docs;
    docs.push_back({"a", BowVector::from_entries({{0, 2}, {2, 1}}), {0, 1}, "outdoor"});
    docs.push_back({"b", BowVector::from_entries({{1, 1}}), {}, std::nullopt});
    return Corpus(std::move(docs), sensory_vocab3(), text_vocab());
}

} // namespace

TEST_SUITE("corpus") {

TEST_CASE("vocabulary round trips through a file") {
    testutil::TempDir dir;
    const auto path = dir.path() / "vocab.txt";
    testutil::write_file(path, "parade\nriver\nboat\n");

    const Vocabulary v = Vocabulary::load(path);
    CHECK(v.size() == 3);
    CHECK(v.token(1) == "river");
    CHECK(v.find("boat") == 2);
    CHECK_FALSE(v.find("ocean").has_value());

    const auto out = dir.path() / "copy.txt";
    v.save(out);
    CHECK(testutil::read_file(out) == testutil::read_file(path));
}

TEST_CASE("vocabulary rejects bad inputs") {
    testutil::TempDir dir;

    SUBCASE("duplicate token names both lines") {
        const auto path = dir.path() / "dup.txt";
        testutil::write_file(path, "ab\ncd\nab\n");
        CHECK_THROWS_WITH_AS(Vocabulary::load(path),
                             "duplicate vocabulary token 'ab' at lines 1 and 3", ValidationError);
    }
    SUBCASE("empty file") {
        const auto path = dir.path() / "empty.txt";
        testutil::write_file(path, "");
        CHECK_THROWS_AS(Vocabulary::load(path), ValidationError);
    }
    SUBCASE("blank line") {
        const auto path = dir.path() / "blank.txt";
        testutil::write_file(path, "ab\n\ncd\n");
        CHECK_THROWS_AS(Vocabulary::load(path), ValidationError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(Vocabulary::load(dir.path() / "nope.txt"), ValidationError);
    }
    SUBCASE("whitespace token") {
        CHECK_THROWS_AS(Vocabulary::from_tokens({"a b"}), ValidationError);
    }
    SUBCASE("no tokens at all") {
        CHECK_THROWS_AS(Vocabulary::from_tokens({}), ValidationError);
    }
}

TEST_CASE("vocabulary scales to realistic sizes") {
    const Vocabulary v = testutil::make_vocab(10000, "w");
    CHECK(v.size() == 10000);
    CHECK(v.find("w9999") == 9999);
    CHECK(v.token(123) == "w123");
}

TEST_CASE("split_tokens lowercases and splits on non-alphanumerics") {
    CHECK(split_tokens("A Parade, down Main-Street!") ==
          std::vector<std::string>{"a", "parade", "down", "main", "street"});
    CHECK(split_tokens("route 66") == std::vector<std::string>{"route", "66"});
    CHECK(split_tokens("  \t\n ") == std::vector<std::string>{});
    CHECK(split_tokens("") == std::vector<std::string>{});
}

TEST_CASE("tokenize_caption filters stop words before vocabulary lookup") {
    const Vocabulary v = text_vocab();
    const StopwordSet& sw = StopwordSet::builtin();
    CHECK(sw.contains("the"));
    CHECK(sw.contains("with"));
    CHECK_FALSE(sw.contains("parade"));

    const TokenizeResult r = tokenize_caption("The parade near the river with BALLOONS.", v, sw);
    CHECK(r.indices == std::vector<std::size_t>{0, 1});
    CHECK(r.oov_tokens == std::vector<std::string>{"near", "balloons"});
    CHECK(r.stopword_count == 3);
}

TEST_CASE("custom stop list overrides the builtin") {
    testutil::TempDir dir;
    const auto path = dir.path() / "sw.txt";
    testutil::write_file(path, "parade\n\nboat\n");
    const StopwordSet sw = StopwordSet::load(path);
    CHECK(sw.size() == 2);
    CHECK(sw.contains("parade"));
    CHECK_FALSE(sw.contains("the"));
    CHECK_THROWS_AS(StopwordSet::load(dir.path() / "missing.txt"), ValidationError);
}

TEST_CASE("bow vector invariants") {
    const BowVector bow = BowVector::from_entries({{2, 1}, {0, 3}});
    CHECK(bow.entries == std::vector<BowEntry>{{0, 3}, {2, 1}});
    CHECK(bow.total == 4);
    bow.validate(3);
    CHECK_THROWS_AS(bow.validate(2), ValidationError); // index 2 out of range

    CHECK_THROWS_AS(BowVector::from_entries({{0, 1}, {0, 2}}), ValidationError);
    CHECK_THROWS_AS(BowVector::from_entries({{1, 0}}), ValidationError);
}

TEST_CASE("document validation wraps errors with the document id") {
    Document doc{"vid7", BowVector::from_entries({{5, 1}}), {0}, std::nullopt};
    CHECK_THROWS_WITH_AS(
        doc.validate(3, 5),
        "document 'vid7': bag-of-words index 5 out of range for vocabulary of size 3",
        ValidationError);

    Document bad_caption{"vid8", BowVector::from_entries({{0, 1}}), {9}, std::nullopt};
    CHECK_THROWS_AS(bad_caption.validate(3, 5), ValidationError);

    Document no_id{"", BowVector::from_entries({{0, 1}}), {}, std::nullopt};
    CHECK_THROWS_AS(no_id.validate(3, 5), ValidationError);
}

TEST_CASE("corpus construction rejects duplicate ids") {
    std::vector<Document> docs;
    docs.push_back({"same", BowVector::from_entries({{0, 1}}), {}, std::nullopt});
    docs.push_back({"same", BowVector::from_entries({{1, 1}}), {}, std::nullopt});
    CHECK_THROWS_WITH_AS(Corpus(std::move(docs), sensory_vocab3(), text_vocab()),
                         "duplicate document id 'same'", ValidationError);
}

TEST_CASE("load_corpus parses well-formed lines") {
    testutil::TempDir dir;
    const auto path = dir.path() / "corpus.jsonl";
    testutil::write_file(
        path,
        R"({"id":"a","sensory":{"0":2,"2":1},"caption":["parade","river"],"category":"outdoor"})"
        "\n"
        R"({"id":"b","sensory":{"1":1},"caption":[],"category":null})"
        "\n");
    const Corpus c = load_corpus(path, sensory_vocab3(), text_vocab());
    CHECK(c.size() == 2);
    CHECK(c.doc(0).id == "a");
    CHECK(c.doc(0).sensory.total == 3);
    CHECK(c.doc(0).caption == std::vector<std::size_t>{0, 1});
    CHECK(c.doc(0).category == "outdoor");
    CHECK(c.doc(1).caption.empty());
    CHECK_FALSE(c.doc(1).category.has_value());
}

TEST_CASE("load_corpus reports the offending line") {
    testutil::TempDir dir;
    const auto path = dir.path() / "corpus.jsonl";
    const std::string good =
        R"({"id":"a","sensory":{"0":1},"caption":[],"category":null})"
        "\n";

    auto expect_line2 = [&](const std::string& line, const char* fragment) {
        testutil::write_file(path, good + line + "\n");
        try {
            load_corpus(path, sensory_vocab3(), text_vocab());
            FAIL_CHECK("expected ValidationError for: " << line);
        } catch (const ValidationError& e) {
            const std::string what = e.what();
            CAPTURE(what);
            CHECK(what.find("corpus line 2") != std::string::npos);
            CHECK(what.find(fragment) != std::string::npos);
        }
    };

    expect_line2("{not json", "malformed JSON");
    expect_line2(R"(["id"])", "expected a JSON object");
    expect_line2(R"({"id":"b","sensory":{"0":1},"caption":[]})", "missing field 'category'");
    expect_line2(R"({"id":"b","sensory":{"0":1},"caption":[],"category":null,"extra":1})",
                 "unknown field 'extra'");
    expect_line2(R"({"id":7,"sensory":{"0":1},"caption":[],"category":null})",
                 "'id' must be a string");
    expect_line2(R"({"id":"","sensory":{"0":1},"caption":[],"category":null})",
                 "'id' must be non-empty");
    expect_line2(R"({"id":"b","sensory":{"01":1},"caption":[],"category":null})",
                 "not a canonical decimal index");
    expect_line2(R"({"id":"b","sensory":{"x":1},"caption":[],"category":null})",
                 "not a canonical decimal index");
    expect_line2(R"({"id":"b","sensory":{"3":1},"caption":[],"category":null})", "out of range");
    expect_line2(R"({"id":"b","sensory":{"0":0},"caption":[],"category":null})",
                 "must be a positive integer");
    expect_line2(R"({"id":"b","sensory":{"0":-2},"caption":[],"category":null})",
                 "must be a positive integer");
    expect_line2(R"({"id":"b","sensory":{"0":1.5},"caption":[],"category":null})",
                 "must be a positive integer");
    expect_line2(R"({"id":"b","sensory":{},"caption":[],"category":null})",
                 "at least one word");
    expect_line2(R"({"id":"b","sensory":{"0":1},"caption":["ocean"],"category":null})",
                 "not in the text vocabulary");
    expect_line2(R"({"id":"b","sensory":{"0":1},"caption":[1],"category":null})",
                 "'caption' entries must be strings");
    expect_line2(R"({"id":"b","sensory":{"0":1},"caption":[],"category":3})",
                 "'category' must be a string or null");
    expect_line2("", "blank line");
}

TEST_CASE("load_corpus rejects a missing file") {
    testutil::TempDir dir;
    CHECK_THROWS_AS(load_corpus(dir.path() / "nope.jsonl", sensory_vocab3(), text_vocab()),
                    ValidationError);
}

TEST_CASE("canonical writer orders sensory keys numerically") {
    Vocabulary sv = testutil::make_vocab(12, "s");
    Document doc{"x", BowVector::from_entries({{10, 1}, {2, 3}}), {0}, std::nullopt};
    const std::string line = corpus_line(doc, text_vocab());
    // "2" precedes "10" numerically even though it follows it as a string.
    CHECK(line ==
          R"({"id":"x","sensory":{"2":3,"10":1},"caption":["parade"],"category":null})");
}

TEST_CASE("write_corpus output reloads byte-identically") {
    testutil::TempDir dir;
    const Corpus c = tiny_corpus();
    const auto first = dir.path() / "first.jsonl";
    write_corpus(c, first);

    const Corpus reloaded = load_corpus(first, c.sensory_vocab(), c.text_vocab());
    CHECK(reloaded.documents() == c.documents());

    const auto second = dir.path() / "second.jsonl";
    write_corpus(reloaded, second);
    CHECK(testutil::read_file(first) == testutil::read_file(second));
    // Canonical form: one minified object per line, LF terminated.
    const std::string text = testutil::read_file(first);
    CHECK(text.back() == '\n');
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}

TEST_CASE("split_corpus partitions by rounded fraction") {
    const Vocabulary sv = testutil::make_vocab(4, "s");
    const Vocabulary tv = testutil::make_vocab(4, "t");
    Rng rng(31);
    std::vector<Document> docs;
    for (std::size_t i = 0; i < 625; ++i)
        docs.push_back(testutil::random_document(rng, 4, 4, 3, 2, "d" + std::to_string(i)));
    const Corpus corpus(std::move(docs), sv, tv);

    auto [train, test] = split_corpus(corpus, 0.2, 7);
    CHECK(train.size() == 500);
    CHECK(test.size() == 125);

    SUBCASE("same seed reproduces the split") {
        auto [train2, test2] = split_corpus(corpus, 0.2, 7);
        CHECK(train2.documents() == train.documents());
        CHECK(test2.documents() == test.documents());
    }
    SUBCASE("parts preserve corpus order and partition the documents") {
        std::size_t ti = 0;
        std::size_t si = 0;
        for (const Document& d : corpus.documents()) {
            if (ti < train.size() && train.doc(ti).id == d.id) {
                ++ti;
            } else {
                REQUIRE(si < test.size());
                CHECK(test.doc(si).id == d.id);
                ++si;
            }
        }
        CHECK(ti == train.size());
        CHECK(si == test.size());
    }
    SUBCASE("a different seed moves documents") {
        auto [train3, test3] = split_corpus(corpus, 0.2, 8);
        CHECK(train3.size() == 500);
        CHECK_FALSE(train3.documents() == train.documents());
    }
}

TEST_CASE("split_corpus rejects degenerate requests") {
    const Corpus c = tiny_corpus();
    CHECK_THROWS_AS(split_corpus(c, 0.0, 1), ValidationError);
    CHECK_THROWS_AS(split_corpus(c, 1.0, 1), ValidationError);
    CHECK_THROWS_AS(split_corpus(c, 0.1, 1), ValidationError); // rounds to zero test docs

    std::vector<Document> one;
    one.push_back({"only", BowVector::from_entries({{0, 1}}), {}, std::nullopt});
    const Corpus single(std::move(one), sensory_vocab3(), text_vocab());
    CHECK_THROWS_AS(split_corpus(single, 0.5, 1), ValidationError);
}

} // TEST_SUITE

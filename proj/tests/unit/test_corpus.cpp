#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "refind/corpus.hpp"
#include "refind/error.hpp"

using namespace refind;
using refind::testing::docs_with_pages;
using refind::testing::make_doc;

TEST_CASE("a well-formed record validates cleanly") {
    const auto report = validate_document(make_doc("a"));
    CHECK(report.ok());
    CHECK(validate_document(make_doc("a"), 2).ok());
}

TEST_CASE("zero pages is reported") {
    auto d = make_doc("a", 0);
    const auto report = validate_document(d);
    REQUIRE_FALSE(report.ok());
    CHECK(report.mentions("pages >= 1"));
}

TEST_CASE("creation after modification is an ordering violation") {
    auto d = make_doc("a");
    d.created_at = d.modified_at + 1;
    CHECK(validate_document(d).mentions("ordering"));
}

TEST_CASE("validation collects every violation at once") {
    auto d = make_doc("a", 0);
    d.image_count = -1;
    d.difficulty_level = 9;
    d.topic_vector = {0.5, 0.5};
    const auto report = validate_document(d);
    CHECK(report.violations.size() == 4);
    CHECK(validate_document(d).violations == report.violations);
}

TEST_CASE("author genders must match the author count") {
    auto d = make_doc("a");
    d.author_count = 2;
    d.author_genders = {Gender::female};
    CHECK(validate_document(d).mentions("author_genders"));
    d.author_genders.push_back(Gender::unknown);
    CHECK(validate_document(d).ok());
}

TEST_CASE("topic vectors: unit or all-zero, sized to the vocabulary") {
    auto d = make_doc("a");
    d.topic_vector = {0.0, 0.0};
    CHECK(validate_document(d).ok());
    d.topic_vector = {0.6, 0.8};
    CHECK(validate_document(d).ok());
    CHECK_FALSE(validate_document(d, 3).ok());
    d.topic_vector = {-0.6, 0.8};
    CHECK(validate_document(d).mentions("non-negative"));
}

TEST_CASE("topic distance") {
    auto doc = make_doc("a");
    SUBCASE("worked dot product") {
        doc.topic_vector = {0.6, 0.8};
        CHECK(topic_distance(doc, UserProfile{{1.0, 0.0}}) == doctest::Approx(0.4).epsilon(1e-12));
    }
    SUBCASE("identical unit vectors") {
        doc.topic_vector = {0.6, 0.8};
        CHECK(topic_distance(doc, UserProfile{{0.6, 0.8}}) == doctest::Approx(0.0));
    }
    SUBCASE("orthogonal") {
        doc.topic_vector = {0.0, 1.0};
        CHECK(topic_distance(doc, UserProfile{{1.0, 0.0}}) == doctest::Approx(1.0));
    }
    SUBCASE("zero vector on either side") {
        doc.topic_vector = {0.0, 0.0};
        CHECK(topic_distance(doc, UserProfile{{1.0, 0.0}}) == 1.0);
        doc.topic_vector = {1.0, 0.0};
        CHECK(topic_distance(doc, UserProfile{{0.0, 0.0}}) == 1.0);
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(topic_distance(doc, UserProfile{{1.0, 0.0, 0.0}}), Error);
    }
}

TEST_CASE("cosine distance is symmetric and bounded") {
    const std::vector<std::vector<double>> vs = {{1, 0, 0}, {0.6, 0.8, 0}, {0, 0, 1}, {0.48, 0.6, 0.64}, {0, 0, 0}};
    for (const auto& a : vs)
        for (const auto& b : vs) {
            const double d = cosine_distance(a, b);
            CHECK(d >= 0.0);
            CHECK(d <= 2.0);
            CHECK(d == doctest::Approx(cosine_distance(b, a)));
        }
    CHECK(cosine_distance(std::vector<double>{1, 0}, std::vector<double>{-1, 0}) == doctest::Approx(2.0));
}

TEST_CASE("page statistics") {
    SUBCASE("heavy tail: mean 53, median 11") {
        const auto s = compute_corpus_stats(docs_with_pages({5, 8, 11, 40, 201})).numeric_at("pages");
        CHECK(s.mean == 53.0);
        CHECK(s.median == 11.0);
        CHECK(s.min == 5.0);
        CHECK(s.max == 201.0);
    }
    SUBCASE("singleton") {
        const auto s = compute_corpus_stats(docs_with_pages({7})).numeric_at("pages");
        CHECK(s.mean == 7.0);
        CHECK(s.median == 7.0);
    }
    SUBCASE("even count takes the lower middle element") {
        const auto s = compute_corpus_stats(docs_with_pages({4, 2})).numeric_at("pages");
        CHECK(s.mean == 3.0);
        CHECK(s.median == 2.0);
    }
}

TEST_CASE("summary ordering holds for arbitrary columns") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> xs(1 + gen() % 30);
        for (double& x : xs) x = u(gen);
        const auto s = summarize_numeric(xs);
        CHECK(s.min <= s.median);
        CHECK(s.median <= s.max);
        CHECK(s.min <= s.mean);
        CHECK(s.mean <= s.max);
    }
}

TEST_CASE("an empty corpus has no statistics") {
    CHECK_THROWS_AS(compute_corpus_stats({}), Error);
}

TEST_CASE("categorical histograms") {
    auto docs = docs_with_pages({1, 2, 3});
    docs[1].file_type = "docx";
    docs[2].has_bibliography = true;
    const auto stats = compute_corpus_stats(docs);
    CHECK(stats.document_count == 3);
    CHECK(stats.categorical_at("file_type") == Histogram{{"docx", 1}, {"pdf", 2}});
    CHECK(stats.categorical_at("has_bibliography") == Histogram{{"false", 2}, {"true", 1}});
    CHECK_THROWS_AS(stats.numeric_at("no_such_attribute"), Error);
}

TEST_CASE("corpus JSON Lines round trip") {
    CorpusFile corpus{{"alpha", "beta"}, UserProfile{{0.6, 0.8}}, docs_with_pages({3, 9})};
    corpus.documents[0].author_count = 1;
    corpus.documents[0].author_genders = {Gender::female};
    corpus.documents[1].image_color = ImageColor::colorized;
    std::stringstream buf;
    write_corpus_jsonl(buf, corpus);
    const CorpusFile back = read_corpus_jsonl(buf);
    CHECK(back.vocab == corpus.vocab);
    REQUIRE(back.profile.has_value());
    CHECK(back.profile->interest_vector == corpus.profile->interest_vector);
    CHECK(back.documents == corpus.documents);
}

TEST_CASE("corpus parse errors name the line") {
    auto parse = [](const std::string& text) {
        std::stringstream in(text);
        return read_corpus_jsonl(in);
    };
    CorpusFile ok{{"a", "b"}, std::nullopt, docs_with_pages({3})};
    std::stringstream buf;
    write_corpus_jsonl(buf, ok);
    const std::string good = buf.str();

    SUBCASE("malformed JSON") {
        try {
            parse(good + "{not json\n");
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::schema);
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SUBCASE("duplicate id") {
        const std::string record = good.substr(good.find('\n') + 1);
        CHECK_THROWS_AS(parse(good + record), Error);
    }
    SUBCASE("invalid record") {
        std::string bad = good;
        bad.replace(bad.find("\"pages\":3"), 9, "\"pages\":0");
        CHECK_THROWS_AS(parse(bad), Error);
    }
    SUBCASE("missing header") {
        CHECK_THROWS_AS(parse(good.substr(good.find('\n') + 1)), Error);
    }
}

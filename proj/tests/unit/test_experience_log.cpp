#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "refind/error.hpp"
#include "refind/experience_log.hpp"

using namespace refind;
using namespace refind::testing;

namespace {

constexpr EpochSeconds kDay = 86400;
constexpr EpochSeconds kT0 = 1'700'000'000;

ExperienceLog worked_log() {
    ExperienceLog log;
    log.append(open_event("doc", kT0 - 9 * kDay));
    log.append(view_event("doc", kT0 - 9 * kDay + 10, 1, 240.0));
    log.append(open_event("doc", kT0 - 5 * kDay));
    log.append(view_event("doc", kT0 - 5 * kDay + 10, 2, 180.0));
    log.append(open_event("doc", kT0 - 2 * kDay));
    log.append(view_event("doc", kT0 - 2 * kDay, 3, 180.0));
    return log;
}

}  // namespace

TEST_CASE("features of a document read three times") {
    const auto doc = make_doc("doc", 4);
    const auto f = derive_features(worked_log(), doc, UserProfile{{1.0, 0.0}}, kT0);
    CHECK(f.doc_id == "doc");
    CHECK(f.R == 3.0);
    CHECK(f.C == doctest::Approx(10.0));
    CHECK(f.I == doctest::Approx(2.0));
    CHECK(f.D == doctest::Approx(0.0));
}

TEST_CASE("a document that was never opened") {
    auto doc = make_doc("fresh");
    doc.created_at = doc.modified_at = kT0;
    const auto f = derive_features(worked_log(), doc, UserProfile{{1.0, 0.0}}, kT0);
    CHECK(f.R == 0.0);
    CHECK(f.C == 0.0);
    CHECK(f.I == 0.0);
}

TEST_CASE("recency falls back to the creation time") {
    auto doc = make_doc("fresh");
    doc.created_at = doc.modified_at = kT0 - 3 * kDay;
    CHECK(derive_features(ExperienceLog{}, doc, UserProfile{{1.0, 0.0}}, kT0).I == doctest::Approx(3.0));
}

TEST_CASE("zero-second views add no reading time") {
    ExperienceLog log;
    log.append(open_event("a", kT0));
    log.append(view_event("a", kT0 + 1, 1, 0.0));
    CHECK(cumulative_minutes(log, "a") == 0.0);
    CHECK(derive_features(log, make_doc("a"), UserProfile{{1.0, 0.0}}, kT0 + 1).R == 1.0);
}

TEST_CASE("features only grow as events are appended") {
    const auto doc = make_doc("doc", 4);
    const UserProfile profile{{1.0, 0.0}};
    ExperienceLog log;
    CandidateFeatures prev = derive_features(log, doc, profile, kT0);
    const auto all = worked_log();
    for (const auto& e : all.events()) {
        log.append(e);
        const auto f = derive_features(log, doc, profile, kT0);
        CHECK(f.R >= prev.R);
        CHECK(f.C >= prev.C);
        CHECK(f.I <= prev.I);
        prev = f;
    }
}

TEST_CASE("events stamped before creation do not age the document") {
    auto doc = make_doc("doc");
    doc.created_at = doc.modified_at = kT0 - kDay;
    ExperienceLog log;
    const UserProfile profile{{1.0, 0.0}};
    const double before = derive_features(log, doc, profile, kT0).I;
    log.append(open_event("doc", kT0 - 5 * kDay));
    CHECK(derive_features(log, doc, profile, kT0).I == before);
}

TEST_CASE("replaying a log gives identical features") {
    std::stringstream buf;
    write_event_log(buf, worked_log());
    const auto replay = read_event_log(buf);
    const auto doc = make_doc("doc", 4);
    CHECK(derive_features(replay, doc, UserProfile{{0.6, 0.8}}, kT0) ==
          derive_features(worked_log(), doc, UserProfile{{0.6, 0.8}}, kT0));
}

TEST_CASE("a copied log is an unaffected snapshot") {
    ExperienceLog log = worked_log();
    const ExperienceLog snapshot = log;
    log.append(open_event("doc", kT0));
    CHECK(snapshot.size() + 1 == log.size());
    CHECK(derive_features(snapshot, make_doc("doc", 4), UserProfile{{1.0, 0.0}}, kT0).R == 3.0);
}

TEST_CASE("experience summary") {
    ExperienceLog log;
    SUBCASE("coverage counts distinct pages") {
        log.append(view_event("a", kT0, 1, 5));
        log.append(view_event("a", kT0 + 1, 2, 5));
        log.append(view_event("a", kT0 + 2, 2, 5));
        CHECK(summarize_experience(log, make_doc("a", 4)).coverage == 0.5);
    }
    SUBCASE("out-of-range pages still cap coverage at one") {
        log.append(view_event("a", kT0, 9, 5));
        for (int p = 1; p <= 5; ++p) log.append(view_event("a", kT0 + p, p, 5));
        CHECK(summarize_experience(log, make_doc("a", 5)).coverage == 1.0);
    }
    SUBCASE("flags") {
        log.append(simple_event("a", EventKind::print, kT0));
        auto e = open_event("a", kT0 + 1);
        e.time_tag = "late-night";
        log.append(e);
        log.append(simple_event("b", EventKind::refind, kT0));
        const auto s = summarize_experience(log, make_doc("a"));
        CHECK(s.printed);
        CHECK_FALSE(s.refound_before);
        CHECK(s.unusual_time_access);
        CHECK_FALSE(s.unusual_location_access);
        CHECK(summarize_experience(log, make_doc("b")).refound_before);
    }
}

TEST_CASE("malformed events are rejected") {
    ExperienceLog log;
    auto view = view_event("a", kT0, 1, 3.0);
    view.duration_s.reset();
    CHECK_THROWS_AS(log.append(view), Error);
    auto open = open_event("a", kT0);
    open.page = 2;
    CHECK_THROWS_AS(log.append(open), Error);
    CHECK_THROWS_AS(log.append(view_event("a", kT0, 0, 3.0)), Error);
    CHECK_THROWS_AS(log.append(view_event("a", kT0, 1, -1.0)), Error);
    CHECK_THROWS_AS(log.append(open_event("", kT0)), Error);
    CHECK(log.empty());
}

TEST_CASE("event file round trip preserves insertion order") {
    ExperienceLog log = worked_log();
    auto tagged = simple_event("other", EventKind::annotate, kT0 - kDay);
    tagged.location_tag = "airport";
    log.append(tagged);
    std::stringstream buf;
    write_event_log(buf, log);
    const ExperienceLog back = read_event_log(buf);
    REQUIRE(back.size() == log.size());
    for (std::size_t i = 0; i < log.size(); ++i) CHECK(back.events()[i] == log.events()[i]);
    CHECK(back.positions_for("other").size() == 1);
}

TEST_CASE("event parse errors name the line") {
    std::stringstream in(event_to_json_line(open_event("a", kT0)) + "\n\n{\"doc_id\":\"a\",\"kind\":\"sneeze\",\"timestamp\":5}\n");
    try {
        read_event_log(in);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("appending to a file accumulates lines") {
    TempDir dir;
    const auto path = dir.file("events.jsonl");
    append_event_to_file(path, open_event("a", kT0));
    append_event_to_file(path, view_event("a", kT0 + 1, 1, 2.0));
    CHECK(read_event_log_file(path).size() == 2);
}

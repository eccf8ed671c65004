// Acceptance runner: one PASS/FAIL line per criterion.
//
//   refind_acceptance [--only NAME]... [--refind PATH]
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "refind/familiarity_model.hpp"
#include "refind/nnign_ranker.hpp"
#include "refind/question_engine.hpp"
#include "refind/random.hpp"
#include "refind/simulation.hpp"

using namespace refind;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    double budget_s;  // 0 means no runtime bound
    std::function<Verdict()> check;
};

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

// --- regression ------------------------------------------------------------------

std::vector<TrainingExample> random_instance(Rng& rng) {
    const std::size_t d = 1 + rng.index(4);
    const std::size_t n = d + 2 + rng.index(50 - (d + 2) + 1);
    std::vector<double> scale(d), shift(d);
    for (std::size_t j = 0; j < d; ++j) {
        scale[j] = std::pow(10.0, rng.uniform(-2.0, 3.0));
        shift[j] = rng.uniform(-100.0, 100.0);
    }
    std::vector<TrainingExample> ex(n);
    for (auto& e : ex) {
        e.features.resize(d);
        for (std::size_t j = 0; j < d; ++j) e.features[j] = shift[j] + scale[j] * rng.normal();
        e.grade = rng.uniform(1.0, 10.0);
    }
    return ex;
}

Verdict regression_oracle() {
    Rng rng(derive_seed(42, 101));
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto ex = random_instance(rng);
        const LinearModel m = fit_linear(ex);
        const auto o = oracle::normal_equations_fit(ex, kRidgeLambda);
        for (std::size_t j = 0; j < o.coefficients.size(); ++j)
            worst = std::max(worst, std::abs(m.coefficients[j] - o.coefficients[j]));
    }

    double worst_planted = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = 1 + rng.index(4);
        const std::size_t n = d + 2 + rng.index(40);
        std::vector<double> slope(d);
        for (double& s : slope) s = rng.uniform(-1.0, 1.0);
        std::vector<TrainingExample> ex(n);
        for (auto& e : ex) {
            e.features.resize(d);
            double y = 5.5;
            for (std::size_t j = 0; j < d; ++j) {
                e.features[j] = rng.uniform(-1.0, 1.0);
                y += slope[j] * e.features[j];
            }
            e.grade = y;
        }
        const LinearModel m = fit_linear(ex);
        double intercept = m.coefficients[0];
        for (std::size_t j = 0; j < d; ++j) {
            const double raw = m.coefficients[j + 1] / m.stds[j];
            intercept -= raw * m.means[j];
            worst_planted = std::max(worst_planted, std::abs(raw - slope[j]));
        }
        worst_planted = std::max(worst_planted, std::abs(intercept - 5.5));
    }
    return {worst <= 1e-8 && worst_planted <= 1e-6,
            fmt("1000 instances, max |coef - oracle| = %.3g; planted recovery max error %.3g", worst, worst_planted)};
}

// --- ranking ---------------------------------------------------------------------

std::vector<ScoredCandidate> random_candidates(Rng& rng) {
    const std::size_t n = 1 + rng.index(8);
    std::vector<ScoredCandidate> c(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Quarter-grid values: frequent, exact distance ties.
        c[i].doc_id = "d" + std::to_string(rng.index(100));
        c[i].F_i = static_cast<double>(rng.index(41)) * 0.25;
    }
    std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
    c.erase(std::unique(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.doc_id == b.doc_id; }),
            c.end());
    for (std::size_t i = c.size(); i > 1; --i) std::swap(c[i - 1], c[rng.index(i)]);
    return c;
}

std::vector<std::string> ids_of(const std::vector<RankedCandidate>& r) {
    std::vector<std::string> out;
    for (const auto& x : r) out.push_back(x.doc_id);
    return out;
}

Verdict ranking_oracle() {
    Rng rng(derive_seed(42, 102));
    int mismatches = 0, affine_failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto c = random_candidates(rng);
        const double F_t = static_cast<double>(rng.index(41)) * 0.25;
        if (ids_of(rank_by_familiarity(c, F_t)) != oracle::exhaustive_order(c, F_t)) ++mismatches;
    }
    for (int trial = 0; trial < 1000; ++trial) {
        const auto c = random_candidates(rng);
        const double F_t = static_cast<double>(rng.index(41)) * 0.25;
        const double a = std::ldexp(static_cast<double>(1 + rng.index(7)), static_cast<int>(rng.index(7)) - 3);
        const double b = static_cast<double>(static_cast<int>(rng.index(81)) - 40) * 0.125;
        auto moved = c;
        for (auto& x : moved) x.F_i = a * x.F_i + b;
        if (ids_of(rank_by_familiarity(c, F_t)) != ids_of(rank_by_familiarity(moved, a * F_t + b))) ++affine_failures;
    }
    return {mismatches == 0 && affine_failures == 0,
            fmt("1000 sets vs exhaustive oracle: %d mismatches; 1000 affine trials: %d failures", mismatches,
                affine_failures)};
}

// --- filters ---------------------------------------------------------------------

AnswerValue random_answer(Rng& rng, const Question& q, const CorpusIndex& corpus) {
    const auto& docs = corpus.documents();
    const auto& donor = docs[rng.index(docs.size())].doc_id;
    const double u = rng.uniform();
    if (u < 0.2) return Skip{};
    switch (q.kind) {
        case QuestionKind::binary_split:
        case QuestionKind::precise_numeric_allowed:
            if (u < 0.4) return std::get<double>(corpus.attribute(donor, q.attribute));
            return u < 0.7 ? AnswerValue{OptionA{}} : AnswerValue{OptionB{}};
        case QuestionKind::boolean: return u < 0.6;
        case QuestionKind::categorical:
        default: return q.options[rng.index(q.options.size())];
    }
}

AnswerValue truthful_answer(Rng& rng, const Question& q, const AttributeValue& truth) {
    if (rng.uniform() < 0.2) return Skip{};
    if (q.kind == QuestionKind::binary_split || q.kind == QuestionKind::precise_numeric_allowed) {
        const double v = std::get<double>(truth);
        if (rng.uniform() < 0.3) return v;
        return v > *q.split_threshold ? AnswerValue{OptionA{}} : AnswerValue{OptionB{}};
    }
    if (q.kind == QuestionKind::boolean) return std::get<bool>(truth);
    return std::get<std::string>(truth);
}

Verdict filter_properties() {
    const auto world = sim::generate_corpus(42, 200);
    const auto env = sim::make_environment(world);
    const auto& catalog = env.catalog;
    Rng rng(derive_seed(42, 103));
    int monotone = 0, skip_noop = 0, order = 0, survival = 0;

    for (int trial = 0; trial < 500; ++trial) {
        const std::string sid = "s" + std::to_string(trial);
        std::vector<std::size_t> picks(catalog.size());
        std::iota(picks.begin(), picks.end(), 0);
        for (std::size_t i = picks.size(); i > 1; --i) std::swap(picks[i - 1], picks[rng.index(i)]);
        picks.resize(1 + rng.index(catalog.size()));

        std::vector<Answer> answers;
        for (std::size_t i : picks) answers.push_back({catalog[i].question_id, random_answer(rng, catalog[i], env.corpus), 1.0});

        SessionState s = start_session(sid, env.corpus);
        bool ok_monotone = true, ok_skip = true;
        for (const auto& a : answers) {
            const auto before = s.candidate_ids;
            s = apply_answer(std::move(s), a, catalog, env.corpus, env.tolerances);
            if (s.candidate_ids.size() > before.size() ||
                !std::includes(before.begin(), before.end(), s.candidate_ids.begin(), s.candidate_ids.end(),
                               [&](const std::string& x, const std::string& y) {
                                   return env.corpus.index_of(x) < env.corpus.index_of(y);
                               }))
                ok_monotone = false;
            if (a.is_skip() && s.candidate_ids != before) ok_skip = false;
        }
        monotone += ok_monotone;
        skip_noop += ok_skip;

        auto shuffled = answers;
        for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.index(i)]);
        SessionState t = start_session(sid, env.corpus);
        for (const auto& a : shuffled) t = apply_answer(std::move(t), a, catalog, env.corpus, env.tolerances);
        order += t.candidate_ids == s.candidate_ids;

        const auto& target = world.documents[rng.index(world.documents.size())].doc_id;
        SessionState u = start_session(sid, env.corpus);
        for (std::size_t i : picks) {
            const Question& q = catalog[i];
            u = apply_answer(std::move(u), {q.question_id, truthful_answer(rng, q, env.corpus.attribute(target, q.attribute)), 1.0},
                             catalog, env.corpus, env.tolerances);
        }
        survival += std::find(u.candidate_ids.begin(), u.candidate_ids.end(), target) != u.candidate_ids.end();
    }
    const bool pass = monotone == 500 && skip_noop == 500 && order == 500 && survival == 500;
    return {pass, fmt("500 sessions on 200 docs: monotone %d, skip no-op %d, order independent %d, truthful survival %d",
                      monotone, skip_noop, order, survival)};
}

// --- end-to-end ---------------------------------------------------------------------

const sim::SimulationReport& benchmark_report() {
    static const sim::SimulationReport report = sim::run_simulation(sim::SimulationConfig{});
    return report;
}

Verdict end_to_end_rank() {
    const auto& e = benchmark_report().evaluation;
    return {e.survived > 0 && e.mean_rank_fraction <= 0.10,
            fmt("seed 42, 500 docs, 200 episodes: target survived %zu, mean (rank-1)/survivors = %.4f (need <= 0.10)",
                e.survived, e.mean_rank_fraction)};
}

Verdict end_to_end_mrr() {
    const auto& e = benchmark_report().evaluation;
    const double ratio = e.baseline_mrr > 0.0 ? e.mrr / e.baseline_mrr : 0.0;
    return {e.mrr >= 2.0 * e.baseline_mrr && e.mrr > 0.0,
            fmt("MRR %.4f vs survivor-shuffle baseline %.4f, ratio %.3f (need >= 2); mean survivors %.2f", e.mrr,
                e.baseline_mrr, ratio, e.mean_survivors)};
}

// --- split direction -------------------------------------------------------------

Verdict split_direction() {
    sim::SimulationConfig config;
    config.recall = sim::RecallModel::proportional_error;
    const auto world = sim::generate_corpus(config.seed, config.docs, config.vocab_size);
    const auto env = sim::make_environment(world);
    const auto tasks = sim::generate_tasks(world.documents, world.log, derive_seed(config.seed, 6), config.compare_tasks, "split");
    const auto c = sim::compare_split_parameters(env, tasks, sim::make_user(config));
    return {c.mean_answers >= 2000 && c.median_answers >= 2000 && c.mean_accuracy > c.median_accuracy,
            fmt("mean threshold %.2f accuracy %.4f (%zu answers) vs median threshold %.2f accuracy %.4f (%zu answers)",
                c.mean_threshold, c.mean_accuracy, c.mean_answers, c.median_threshold, c.median_accuracy,
                c.median_answers)};
}

// --- difficulty ------------------------------------------------------------------

Verdict difficulty() {
    auto make = [](double wall, std::optional<int> rank) {
        sim::EpisodeResult r;
        r.wall_time_s = wall;
        r.target_survived = rank.has_value();
        r.target_rank = rank;
        r.survivor_count = rank ? 50 : 0;
        return r;
    };
    const bool over = sim::classify_difficult(make(301.0, 1));
    const bool boundary = sim::classify_difficult(make(300.0, 1));
    const bool quick = sim::classify_difficult(make(10.0, 1));
    const bool lost = sim::classify_difficult(make(1.0, std::nullopt));
    int inconsistent = 0;
    for (const auto& r : benchmark_report().episodes) {
        const bool expected = r.wall_time_s > 300.0 || !r.target_rank || *r.target_rank > 20;
        inconsistent += r.difficult != expected;
    }
    return {over && !boundary && !quick && lost && inconsistent == 0,
            fmt("301 s -> %s, 300 s -> %s, 10 s -> %s, eliminated -> %s; %d of 200 episodes misclassified",
                over ? "difficult" : "easy", boundary ? "difficult" : "easy", quick ? "difficult" : "easy",
                lost ? "difficult" : "easy", inconsistent)};
}

// --- determinism -------------------------------------------------------------------

std::string capture(const std::string& command, int& status) {
    std::string out;
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) {
        status = -1;
        return out;
    }
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    status = pclose(pipe);
    return out;
}

Verdict determinism(const std::string& refind_path) {
    const auto a = sim::report_to_json(sim::run_simulation(sim::SimulationConfig{}));
    const auto b = sim::report_to_json(benchmark_report());
    if (a != b) return {false, "in-process reports differ between runs"};
    if (refind_path.empty()) return {true, "in-process reports identical (no --refind binary given)"};

    const std::string cmd = "'" + refind_path + "' simulate --seed 42";
    int s1 = 0, s2 = 0;
    const auto first = capture(cmd, s1);
    const auto second = capture(cmd, s2);
    const bool same = s1 == 0 && s2 == 0 && !first.empty() && first == second;
    return {same, fmt("`refind simulate --seed 42` twice: %zu and %zu bytes, %s", first.size(), second.size(),
                      same ? "byte-identical" : "DIFFERENT or failed")};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks for refind"};
    std::vector<std::string> only;
    std::string refind_path;
    app.add_option("--only", only, "Run only these criteria");
    app.add_option("--refind", refind_path, "Path to the refind binary for the CLI determinism check");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria = {
        {"regression_oracle", 10.0, regression_oracle},
        {"ranking_oracle", 5.0, ranking_oracle},
        {"filter_properties", 30.0, filter_properties},
        {"end_to_end_rank", 60.0, end_to_end_rank},
        {"end_to_end_mrr", 60.0, end_to_end_mrr},
        {"split_direction", 0.0, split_direction},
        {"difficulty", 0.0, difficulty},
        {"determinism", 0.0, [&] { return determinism(refind_path); }},
    };
    for (const auto& name : only) {
        if (std::none_of(criteria.begin(), criteria.end(), [&](const Criterion& c) { return c.name == name; })) {
            std::cerr << "unknown criterion '" << name << "'\n";
            return 2;
        }
    }

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.budget_s == 0.0 || secs < c.budget_s;
        const bool pass = v.pass && in_time;
        failures += !pass;
        std::cout << (pass ? "PASS " : "FAIL ") << c.name << ": " << v.detail;
        if (c.budget_s > 0.0) std::cout << fmt(" [%.2f s, budget %.0f s]", secs, c.budget_s);
        else std::cout << fmt(" [%.2f s]", secs);
        std::cout << std::endl;
    }
    return failures == 0 ? 0 : 1;
}

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "refind/error.hpp"
#include "refind/random.hpp"
#include "refind/simulation.hpp"

namespace refind::sim {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) throw invalid_argument("expected a number, got '" + v + "'");
    return out;
}

template <typename Int>
Int to_integer(const std::string& v) {
    Int out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw invalid_argument("expected a non-negative integer, got '" + v + "'");
    return out;
}

std::vector<int> to_int_list(const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const int k = to_integer<int>(trim(item));
        if (k < 1) throw invalid_argument("k values must be positive");
        out.push_back(k);
    }
    if (out.empty()) throw invalid_argument("k_values must list at least one value");
    return out;
}

using Setter = std::function<void(SimulationConfig&, const std::string&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"seed", [](auto& c, const auto& v) { c.seed = to_integer<std::uint64_t>(v); }},
        {"docs", [](auto& c, const auto& v) { c.docs = to_integer<std::size_t>(v); }},
        {"tasks", [](auto& c, const auto& v) { c.tasks = to_integer<std::size_t>(v); }},
        {"training_tasks", [](auto& c, const auto& v) { c.training_tasks = to_integer<std::size_t>(v); }},
        {"vocab_size", [](auto& c, const auto& v) { c.vocab_size = to_integer<std::size_t>(v); }},
        {"policy",
         [](auto& c, const auto& v) {
             auto p = parse_split_policy(v);
             if (!p) throw invalid_argument("policy must be mean or median");
             c.policy = *p;
         }},
        {"rel_tol", [](auto& c, const auto& v) { c.rel_tol = to_double(v); }},
        {"k_values", [](auto& c, const auto& v) { c.k_values = to_int_list(v); }},
        {"time_budget_s", [](auto& c, const auto& v) { c.time_budget_s = to_double(v); }},
        {"top_k", [](auto& c, const auto& v) { c.top_k = to_integer<int>(v); }},
        {"threads", [](auto& c, const auto& v) { c.threads = to_integer<unsigned>(v); }},
        {"base_time_s", [](auto& c, const auto& v) { c.behavior.base_time_s = to_double(v); }},
        {"time_slope_s", [](auto& c, const auto& v) { c.behavior.time_slope_s = to_double(v); }},
        {"time_noise_s", [](auto& c, const auto& v) { c.behavior.time_noise_s = to_double(v); }},
        {"skip_base", [](auto& c, const auto& v) { c.behavior.skip_base = to_double(v); }},
        {"skip_slope", [](auto& c, const auto& v) { c.behavior.skip_slope = to_double(v); }},
        {"precise_slope", [](auto& c, const auto& v) { c.behavior.precise_slope = to_double(v); }},
        {"correct_base", [](auto& c, const auto& v) { c.behavior.correct_base = to_double(v); }},
        {"correct_slope", [](auto& c, const auto& v) { c.behavior.correct_slope = to_double(v); }},
        {"max_probability", [](auto& c, const auto& v) { c.behavior.max_probability = to_double(v); }},
        {"scan_time_s", [](auto& c, const auto& v) { c.behavior.scan_time_s = to_double(v); }},
        {"grade_intercept", [](auto& c, const auto& v) { c.grade.intercept = to_double(v); }},
        {"grade_R", [](auto& c, const auto& v) { c.grade.r = to_double(v); }},
        {"grade_C", [](auto& c, const auto& v) { c.grade.c = to_double(v); }},
        {"grade_I", [](auto& c, const auto& v) { c.grade.i = to_double(v); }},
        {"grade_D", [](auto& c, const auto& v) { c.grade.d = to_double(v); }},
        {"recall",
         [](auto& c, const auto& v) {
             auto m = parse_recall_model(v);
             if (!m) throw invalid_argument("recall must be grade_based, coin_flip or proportional_error");
             c.recall = *m;
         }},
        {"recall_sigma", [](auto& c, const auto& v) { c.recall_sigma = to_double(v); }},
        {"compare_tasks", [](auto& c, const auto& v) { c.compare_tasks = to_integer<std::size_t>(v); }},
    };
    return table;
}

void check(const SimulationConfig& c) {
    if (c.docs < 1) throw invalid_argument("docs must be at least 1");
    if (c.vocab_size < 1) throw invalid_argument("vocab_size must be at least 1");
    if (c.training_tasks < 2) throw invalid_argument("training_tasks must be at least 2");
    if (!(c.time_budget_s > 0.0)) throw invalid_argument("time_budget_s must be positive");
    if (!(c.rel_tol >= 0.0)) throw invalid_argument("rel_tol must be non-negative");
    if (c.top_k < 1) throw invalid_argument("top_k must be positive");
}

}  // namespace

SimulationConfig parse_config(std::string_view text) {
    SimulationConfig config;
    std::stringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string where = "config line " + std::to_string(line_no) + ": ";
        if (eq == std::string::npos) throw invalid_argument(where + "expected key = value");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        auto it = setters().find(key);
        if (it == setters().end()) throw invalid_argument(where + "unknown key '" + key + "'");
        try {
            it->second(config, value);
        } catch (const Error& e) {
            throw invalid_argument(where + key + ": " + e.what());
        }
    }
    check(config);
    return config;
}

SimulationConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_text(const SimulationConfig& c) {
    std::ostringstream out;
    out.precision(17);
    std::string ks;
    for (int k : c.k_values) ks += (ks.empty() ? "" : ",") + std::to_string(k);
    out << "seed = " << c.seed << "\n"
        << "docs = " << c.docs << "\n"
        << "tasks = " << c.tasks << "\n"
        << "training_tasks = " << c.training_tasks << "\n"
        << "vocab_size = " << c.vocab_size << "\n"
        << "policy = " << to_string(c.policy) << "\n"
        << "rel_tol = " << c.rel_tol << "\n"
        << "k_values = " << ks << "\n"
        << "time_budget_s = " << c.time_budget_s << "\n"
        << "top_k = " << c.top_k << "\n"
        << "threads = " << c.threads << "\n"
        << "base_time_s = " << c.behavior.base_time_s << "\n"
        << "time_slope_s = " << c.behavior.time_slope_s << "\n"
        << "time_noise_s = " << c.behavior.time_noise_s << "\n"
        << "skip_base = " << c.behavior.skip_base << "\n"
        << "skip_slope = " << c.behavior.skip_slope << "\n"
        << "precise_slope = " << c.behavior.precise_slope << "\n"
        << "correct_base = " << c.behavior.correct_base << "\n"
        << "correct_slope = " << c.behavior.correct_slope << "\n"
        << "max_probability = " << c.behavior.max_probability << "\n"
        << "scan_time_s = " << c.behavior.scan_time_s << "\n"
        << "grade_intercept = " << c.grade.intercept << "\n"
        << "grade_R = " << c.grade.r << "\n"
        << "grade_C = " << c.grade.c << "\n"
        << "grade_I = " << c.grade.i << "\n"
        << "grade_D = " << c.grade.d << "\n"
        << "recall = " << to_string(c.recall) << "\n"
        << "recall_sigma = " << c.recall_sigma << "\n"
        << "compare_tasks = " << c.compare_tasks << "\n";
    return out.str();
}

SimulatedUser make_user(const SimulationConfig& config) {
    SimulatedUser user;
    user.rng_seed = derive_seed(config.seed, 3);
    user.true_grade_fn = config.grade;
    user.behavior = config.behavior;
    user.recall = config.recall;
    user.recall_sigma = config.recall_sigma;
    return user;
}

SimulationReport run_simulation(const SimulationConfig& config) {
    check(config);
    const SyntheticWorld world = generate_corpus(config.seed, config.docs, config.vocab_size);
    const Environment env = make_environment(world, config.policy, FilterTolerances{config.rel_tol});
    const SimulatedUser user = make_user(config);

    const auto training = generate_tasks(world.documents, world.log, derive_seed(config.seed, 4),
                                         config.training_tasks, "train");
    SimulationReport report;
    report.config = config;
    report.models = fit_models(build_training_sets(env, training, user));

    const DifficultyPolicy policy{config.time_budget_s, config.top_k};
    const auto tasks = generate_tasks(world.documents, world.log, derive_seed(config.seed, 5), config.tasks);
    report.episodes = simulate_episodes(tasks, user, env, report.models, policy, config.threads);
    if (!report.episodes.empty()) report.evaluation = evaluate(report.episodes, policy, config.k_values);
    return report;
}

}  // namespace refind::sim

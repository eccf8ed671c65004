#include "cli.hpp"

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "dataset.hpp"
#include "json.hpp"
#include "refind/error.hpp"
#include "refind/familiarity_model.hpp"
#include "refind/nnign_ranker.hpp"
#include "refind/question_engine.hpp"
#include "refind/random.hpp"
#include "refind/service.hpp"
#include "refind/simulation.hpp"

namespace refind::cli {

namespace {

using nlohmann::json;

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::vector<TrainingExample> read_examples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open examples file '" + path + "'");
    return read_training_examples(in);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write '" + path + "'");
    out << text;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io_error("cannot create directory '" + dir + "': " + ec.message());
}

void print_coefficients(std::ostream& out, const LinearModel& m, std::initializer_list<const char*> names) {
    out << "intercept  " << num(m.coefficients[0]) << "\n";
    std::size_t i = 1;
    for (const char* n : names) out << n << "  " << num(m.coefficients[i++]) << "\n";
}

// --- Options shared by several subcommands ------------------------------------

struct DataOptions {
    std::string data_dir;
    std::string corpus;
    std::string events;
    std::optional<EpochSeconds> now;

    void attach(CLI::App* sub, bool with_events = true) {
        sub->add_option("--corpus", corpus, "Corpus JSONL (default: <data-dir>/corpus.jsonl)");
        if (with_events) {
            sub->add_option("--events", events, "Event log JSONL (default: <data-dir>/events.jsonl)");
            sub->add_option("--now", now, "Reference time in epoch seconds (default: latest timestamp)");
        }
    }

    Dataset load() const {
        const DataFiles files = data_files(resolve_data_dir(data_dir));
        return load_dataset(corpus.empty() ? files.corpus : corpus, events.empty() ? files.events : events, now);
    }
};

struct SimOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> docs;
    std::optional<std::size_t> tasks;
    std::optional<unsigned> threads;
    std::string policy;

    void attach(CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value simulation config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Master seed");
        sub->add_option("--docs", docs, "Synthetic corpus size")->check(CLI::PositiveNumber);
        sub->add_option("--threads", threads, "Worker threads (results do not depend on it)");
        sub->add_option("--policy", policy, "Split policy")->check(CLI::IsMember({"mean", "median"}));
    }

    sim::SimulationConfig resolve() const {
        sim::SimulationConfig c = config_path.empty() ? sim::SimulationConfig{} : sim::load_config_file(config_path);
        if (seed) c.seed = *seed;
        if (docs) c.docs = *docs;
        if (threads) c.threads = *threads;
        if (!policy.empty()) c.policy = *parse_split_policy(policy);
        return c;
    }
};

// --- Subcommands -------------------------------------------------------------------

int cmd_ingest(const std::string& data_dir, const std::string& corpus_path, const std::string& events_path,
               std::ostream& out) {
    if (!events_path.empty() && !file_exists(events_path)) throw io_error("cannot open events file '" + events_path + "'");
    const Dataset data = load_dataset(corpus_path, events_path);
    const std::string dir = resolve_data_dir(data_dir);
    ensure_dir(dir);
    const DataFiles files = data_files(dir);
    write_corpus_file(files.corpus, data.corpus);
    std::ofstream ev(files.events, std::ios::binary);
    if (!ev) throw io_error("cannot write '" + files.events + "'");
    write_event_log(ev, data.log);
    out << "ingested " << data.corpus.documents.size() << " documents and " << data.log.size() << " events into "
        << dir << "\n";
    return kExitOk;
}

int cmd_stats(const DataOptions& opts, const std::string& format, std::ostream& out) {
    const Dataset data = opts.load();
    const CorpusStats stats = compute_corpus_stats(data.corpus.documents);
    if (format == "json") {
        json j{{"document_count", stats.document_count}, {"numeric", json::object()}, {"categorical", json::object()}};
        for (const auto& [name, s] : stats.numeric)
            j["numeric"][name] = {{"mean", s.mean}, {"median", s.median}, {"min", s.min}, {"max", s.max}};
        for (const auto& [name, h] : stats.categorical) j["categorical"][name] = h;
        out << j.dump(2) << "\n";
        return kExitOk;
    }
    out << "documents " << stats.document_count << "\n\n";
    std::size_t width = 9;
    for (const auto& [name, s] : stats.numeric) width = std::max(width, name.size());
    char line[256];
    std::snprintf(line, sizeof line, "%-*s  %14s  %14s  %14s  %14s\n", static_cast<int>(width), "attribute", "mean",
                  "median", "min", "max");
    out << line;
    for (const auto& [name, s] : stats.numeric) {
        std::snprintf(line, sizeof line, "%-*s  %14s  %14s  %14s  %14s\n", static_cast<int>(width), name.c_str(),
                      num(s.mean).c_str(), num(s.median).c_str(), num(s.min).c_str(), num(s.max).c_str());
        out << line;
    }
    out << "\n";
    for (const auto& [name, h] : stats.categorical) {
        out << name << ":";
        for (const auto& [value, count] : h) out << " " << value << "=" << count;
        out << "\n";
    }
    return kExitOk;
}

int cmd_catalog(const DataOptions& opts, const std::string& policy, const std::string& format, std::ostream& out) {
    const Dataset data = opts.load();
    const sim::Environment env = make_environment(data, *parse_split_policy(policy));
    if (format == "json") {
        json arr = json::array();
        for (const auto& q : env.catalog) {
            json j{{"question_id", q.question_id},
                   {"attribute", q.attribute},
                   {"prompt", q.prompt},
                   {"kind", std::string(to_string(q.kind))},
                   {"options", q.options}};
            j["split_threshold"] = q.split_threshold ? json(*q.split_threshold) : json(nullptr);
            arr.push_back(std::move(j));
        }
        out << arr.dump(2) << "\n";
        return kExitOk;
    }
    int i = 0;
    for (const auto& q : env.catalog) {
        out << ++i << ". " << q.prompt << "\n";
        char label = 'A';
        for (const auto& o : q.options) out << "   " << label++ << ". " << o << "\n";
    }
    return kExitOk;
}

int cmd_train(bool candidate, const std::string& data_dir, const std::string& examples_path, std::string out_path,
              std::ostream& out) {
    const auto examples = read_examples(examples_path);
    if (out_path.empty()) {
        const std::string dir = resolve_data_dir(data_dir);
        ensure_dir(dir);
        const DataFiles files = data_files(dir);
        out_path = candidate ? files.candidate_model : files.target_model;
    }
    if (candidate) {
        const CandidateModel m = fit_candidate_model(examples);
        save_model(m, out_path);
        out << "candidate model fitted on " << examples.size() << " examples -> " << out_path << "\n";
        print_coefficients(out, m.linear, {"R", "C", "I", "D"});
    } else {
        const TargetModel m = fit_target_model(examples);
        save_model(m, out_path);
        out << "target model fitted on " << examples.size() << " examples -> " << out_path << "\n";
        print_coefficients(out, m.linear, {"T_a", "P_s", "P_e"});
    }
    return kExitOk;
}

struct RankOptions {
    DataOptions data;
    std::string candidate_model;
    std::string target_model;
    std::optional<double> f_t;
    std::optional<double> t_a, p_s, p_e;
    std::vector<std::string> ids;
    std::size_t top = 0;
};

int cmd_rank(const RankOptions& o, std::ostream& out) {
    const DataFiles files = data_files(resolve_data_dir(o.data.data_dir));
    const CandidateModel cm = load_candidate_model(o.candidate_model.empty() ? files.candidate_model : o.candidate_model);
    double F_t = 0.0;
    if (o.f_t) {
        F_t = *o.f_t;
    } else {
        const TargetModel tm = load_target_model(o.target_model.empty() ? files.target_model : o.target_model);
        if (o.t_a || o.p_s || o.p_e) {
            if (!(o.t_a && o.p_s && o.p_e)) throw invalid_argument("--t-a, --p-s and --p-e must be given together");
            F_t = predict_target(tm, SessionMetrics{*o.t_a, *o.p_s, *o.p_e});
        } else {
            F_t = sim::neutral_target_familiarity(tm);
        }
    }
    const Dataset data = o.data.load();
    const sim::Environment env = make_environment(data);
    std::vector<CandidateFeatures> features;
    if (o.ids.empty()) {
        features = env.features;
    } else {
        for (const auto& id : o.ids) features.push_back(env.features_of(id));
    }
    auto ranked = rank(features, cm, F_t);
    if (o.top && ranked.size() > o.top) ranked.resize(o.top);
    json j{{"F_t", F_t}, {"ranked", json::parse(ranked_to_json(ranked))}};
    out << j.dump(2) << "\n";
    return kExitOk;
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
    } else {
        write_text(out_path, text);
    }
}

int cmd_simulate(const SimOptions& o, const std::string& format, const std::string& out_path, std::ostream& out) {
    sim::SimulationConfig config = o.resolve();
    if (o.tasks) config.tasks = *o.tasks;
    const sim::SimulationReport report = sim::run_simulation(config);
    emit(format == "json" ? sim::report_to_json(report) : sim::report_to_text(report), out_path, out);
    return kExitOk;
}

int cmd_compare_splits(const SimOptions& o, const std::string& recall, const std::string& format, std::ostream& out) {
    sim::SimulationConfig config = o.resolve();
    if (o.tasks) config.compare_tasks = *o.tasks;
    if (!recall.empty()) {
        config.recall = *sim::parse_recall_model(recall);
    } else if (o.config_path.empty()) {
        config.recall = sim::RecallModel::proportional_error;
    }
    const sim::SyntheticWorld world = sim::generate_corpus(config.seed, config.docs, config.vocab_size);
    const sim::Environment env = sim::make_environment(world, config.policy, FilterTolerances{config.rel_tol});
    const auto tasks =
        sim::generate_tasks(world.documents, world.log, derive_seed(config.seed, 6), config.compare_tasks, "split");
    const auto cmp = sim::compare_split_parameters(env, tasks, sim::make_user(config));
    out << (format == "json" ? sim::comparison_to_json(cmp) : sim::comparison_to_text(cmp));
    return kExitOk;
}

int cmd_generate(const SimOptions& o, const std::string& data_dir, std::ostream& out) {
    sim::SimulationConfig config = o.resolve();
    if (o.tasks) config.training_tasks = *o.tasks;
    const std::string dir = resolve_data_dir(data_dir);
    ensure_dir(dir);
    const sim::SyntheticWorld world = sim::generate_corpus(config.seed, config.docs, config.vocab_size);
    const sim::Environment env = sim::make_environment(world, config.policy, FilterTolerances{config.rel_tol});
    const auto tasks =
        sim::generate_tasks(world.documents, world.log, derive_seed(config.seed, 4), config.training_tasks, "train");
    const sim::TrainingSets sets = sim::build_training_sets(env, tasks, sim::make_user(config));

    const DataFiles files = data_files(dir);
    write_corpus_file(files.corpus, world.corpus_file());
    std::ofstream ev(files.events, std::ios::binary);
    write_event_log(ev, world.log);
    const std::filesystem::path base(dir);
    std::ofstream ce(base / "candidate_examples.jsonl", std::ios::binary);
    write_training_examples(ce, sets.candidate);
    std::ofstream te(base / "target_examples.jsonl", std::ios::binary);
    write_training_examples(te, sets.target);
    if (!ev || !ce || !te) throw io_error("cannot write into '" + dir + "'");
    out << "wrote " << world.documents.size() << " documents, " << world.log.size() << " events, "
        << sets.candidate.size() << " candidate and " << sets.target.size() << " target examples to " << dir << "\n";
    return kExitOk;
}

service::HttpServer* g_server = nullptr;

extern "C" void stop_server(int) {
    if (g_server) g_server->stop();
}

int cmd_serve(const DataOptions& data_opts, const std::string& host, int port, std::optional<std::uint64_t> demo,
              std::size_t demo_docs, std::ostream& out) {
    auto snap = std::make_shared<service::Snapshot>();
    if (demo) {
        sim::SimulationConfig config;
        config.seed = *demo;
        config.docs = demo_docs;
        const sim::SyntheticWorld world = sim::generate_corpus(config.seed, config.docs, config.vocab_size);
        auto env = std::make_shared<sim::Environment>(sim::make_environment(world));
        const auto tasks =
            sim::generate_tasks(world.documents, world.log, derive_seed(config.seed, 4), config.training_tasks, "train");
        const sim::Models models = sim::fit_models(sim::build_training_sets(*env, tasks, sim::make_user(config)));
        snap->env = std::move(env);
        snap->candidate = models.candidate;
        snap->target = models.target;
    } else {
        const Dataset data = data_opts.load();
        snap->env = std::make_shared<sim::Environment>(make_environment(data));
        const DataFiles files = data_files(resolve_data_dir(data_opts.data_dir));
        if (file_exists(files.candidate_model)) snap->candidate = load_candidate_model(files.candidate_model);
        if (file_exists(files.target_model)) snap->target = load_target_model(files.target_model);
    }
    service::Service svc(std::move(snap));
    service::HttpServer server(svc);
    const int bound = server.bind(host, port);
    if (bound < 0) throw io_error("cannot bind " + host + ":" + std::to_string(port));
    out << "listening on http://" << host << ":" << bound << (svc.snapshot()->trained() ? "" : " (models not trained)")
        << std::endl;
    g_server = &server;
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);
    const bool ok = server.listen();
    g_server = nullptr;
    return ok ? kExitOk : kExitDataError;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"refind: re-find personal documents by familiarity", "refind"};
    app.require_subcommand(1);
    std::string data_dir;
    app.add_option("--data-dir", data_dir, "Data directory (default: $REFIND_DATA_DIR or ./refind-data)");

    std::string format = "text";
    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
    };

    std::string ingest_corpus, ingest_events;
    auto* ingest = app.add_subcommand("ingest", "Validate a corpus and event log and store them in the data dir");
    ingest->add_option("--corpus", ingest_corpus, "Corpus JSONL")->required();
    ingest->add_option("--events", ingest_events, "Event log JSONL");

    DataOptions data_opts;
    auto* stats = app.add_subcommand("stats", "Per-attribute corpus statistics");
    data_opts.attach(stats, false);
    add_format(stats);

    std::string policy = "mean";
    auto* catalog = app.add_subcommand("catalog", "List the question catalog");
    data_opts.attach(catalog);
    catalog->add_option("--policy", policy, "Split threshold")->check(CLI::IsMember({"mean", "median"}));
    add_format(catalog);

    std::string examples, model_out;
    auto* train_c = app.add_subcommand("train-candidate", "Fit the candidate familiarity model");
    auto* train_t = app.add_subcommand("train-target", "Fit the target familiarity model");
    for (auto* sub : {train_c, train_t}) {
        sub->add_option("--examples", examples, "Training examples JSONL")->required();
        sub->add_option("--out", model_out, "Model output path (default: in the data dir)");
    }

    RankOptions rank_opts;
    auto* rank_cmd = app.add_subcommand("rank", "Rank documents by distance to the target familiarity");
    rank_opts.data.attach(rank_cmd);
    rank_cmd->add_option("--candidate-model", rank_opts.candidate_model, "Candidate model JSON");
    rank_cmd->add_option("--target-model", rank_opts.target_model, "Target model JSON");
    auto* ft = rank_cmd->add_option("--f-t", rank_opts.f_t, "Target familiarity to rank against");
    rank_cmd->add_option("--t-a", rank_opts.t_a, "Mean seconds per question")->excludes(ft);
    rank_cmd->add_option("--p-s", rank_opts.p_s, "Fraction skipped")->excludes(ft);
    rank_cmd->add_option("--p-e", rank_opts.p_e, "Fraction answered precisely")->excludes(ft);
    rank_cmd->add_option("--ids", rank_opts.ids, "Restrict to these doc ids")->delimiter(',');
    rank_cmd->add_option("--top", rank_opts.top, "Print only the first N");

    SimOptions sim_opts;
    std::string out_path;
    auto* simulate = app.add_subcommand("simulate", "Run the end-to-end simulation and print the metrics report");
    sim_opts.attach(simulate);
    simulate->add_option("--tasks", sim_opts.tasks, "Evaluation episodes");
    simulate->add_option("--out", out_path, "Write the report here instead of stdout");
    add_format(simulate);

    std::string recall;
    auto* compare = app.add_subcommand("compare-splits", "Compare answer accuracy under mean and median thresholds");
    sim_opts.attach(compare);
    compare->add_option("--tasks", sim_opts.tasks, "Number of tasks");
    compare->add_option("--recall", recall, "Recall model")
        ->check(CLI::IsMember({"grade_based", "coin_flip", "proportional_error"}));
    add_format(compare);

    auto* generate = app.add_subcommand("generate", "Write a synthetic corpus, event log and training examples");
    sim_opts.attach(generate);
    generate->add_option("--tasks", sim_opts.tasks, "Target-model training tasks");

    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::uint64_t> demo;
    std::size_t demo_docs = 500;
    auto* serve = app.add_subcommand("serve", "Serve the wizard session API over HTTP");
    data_opts.attach(serve);
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
    serve->add_option("--demo", demo, "Serve a synthetic corpus generated from this seed, with trained models");
    serve->add_option("--demo-docs", demo_docs, "Synthetic corpus size for --demo")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    data_opts.data_dir = data_dir;
    rank_opts.data.data_dir = data_dir;
    try {
        if (ingest->parsed()) return cmd_ingest(data_dir, ingest_corpus, ingest_events, out);
        if (stats->parsed()) return cmd_stats(data_opts, format, out);
        if (catalog->parsed()) return cmd_catalog(data_opts, policy, format, out);
        if (train_c->parsed()) return cmd_train(true, data_dir, examples, model_out, out);
        if (train_t->parsed()) return cmd_train(false, data_dir, examples, model_out, out);
        if (rank_cmd->parsed()) return cmd_rank(rank_opts, out);
        if (simulate->parsed()) return cmd_simulate(sim_opts, format, out_path, out);
        if (compare->parsed()) return cmd_compare_splits(sim_opts, recall, format, out);
        if (generate->parsed()) return cmd_generate(sim_opts, data_dir, out);
        if (serve->parsed()) return cmd_serve(data_opts, host, port, demo, demo_docs, out);
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (char& c : msg)
            if (c == '\n') c = ' ';
        err << "refind: error: " << msg << "\n";
        return kExitDataError;
    }
    return kExitUsage;
}

}  // namespace refind::cli

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "refind/error.hpp"
#include "refind/random.hpp"
#include "refind/simulation.hpp"

namespace refind::sim {

namespace {

constexpr EpochSeconds kSnapshotTime = 1'700'000'000;  // 2023-11-14
constexpr EpochSeconds kDay = 86'400;
constexpr EpochSeconds kHistory = 6 * 365 * kDay;

constexpr std::array<std::string_view, 16> kTopicWords = {
    "databases", "networking", "statistics", "biology",  "finance",  "history",  "physics",  "cooking",
    "law",       "music",      "medicine",   "robotics", "politics", "travel",   "sports",   "education",
};

template <typename T, std::size_t N>
const T& pick_weighted(Rng& rng, const std::array<std::pair<T, double>, N>& table) {
    double total = 0.0;
    for (const auto& [v, w] : table) total += w;
    double u = rng.uniform() * total;
    for (const auto& [v, w] : table) {
        if (u < w) return v;
        u -= w;
    }
    return table.back().first;
}

std::string make_doc_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "doc-%05zu", i + 1);
    return buf;
}

void normalize(std::vector<double>& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (sq == 0.0) return;
    const double n = std::sqrt(sq);
    for (double& x : v) x /= n;
}

struct PendingEvent {
    ExperienceEvent event;
    std::size_t doc_index;
    std::size_t seq;
};

}  // namespace

CorpusFile SyntheticWorld::corpus_file() const { return CorpusFile{vocab, profile, documents}; }

SyntheticWorld generate_corpus(std::uint64_t seed, std::size_t n_docs, std::size_t vocab_size) {
    if (n_docs == 0) throw invalid_argument("n_docs must be at least 1");
    if (vocab_size == 0) throw invalid_argument("vocab_size must be at least 1");

    SyntheticWorld world;
    world.now = kSnapshotTime;
    for (std::size_t t = 0; t < vocab_size; ++t) {
        std::string word(kTopicWords[t % kTopicWords.size()]);
        if (t >= kTopicWords.size()) word += "-" + std::to_string(t / kTopicWords.size());
        world.vocab.push_back(std::move(word));
    }

    Rng profile_rng(derive_seed(seed, 1));
    world.profile.interest_vector.assign(vocab_size, 0.0);
    const std::size_t focus = std::min<std::size_t>(vocab_size, 2 + profile_rng.index(2));
    std::vector<std::size_t> focus_topics;
    for (std::size_t k = 0; k < focus; ++k) {
        std::size_t t = profile_rng.index(vocab_size);
        world.profile.interest_vector[t] += profile_rng.uniform(0.5, 1.0);
        focus_topics.push_back(t);
    }
    normalize(world.profile.interest_vector);

    static constexpr std::array<std::pair<std::string_view, double>, 5> kTypes = {{
        {"pdf", 0.55}, {"docx", 0.2}, {"txt", 0.1}, {"pptx", 0.08}, {"html", 0.07}}};
    static constexpr std::array<std::pair<std::string_view, double>, 6> kCategories = {{
        {"research-paper", 0.35}, {"report", 0.2}, {"news", 0.15}, {"manual", 0.12}, {"novel", 0.08}, {"slides", 0.1}}};
    static constexpr std::array<std::pair<std::string_view, double>, 4> kLanguages = {{
        {"en", 0.75}, {"de", 0.1}, {"fr", 0.08}, {"zh", 0.07}}};

    // Documents come in projects (a thesis folder, a downloaded manual set,
    // a course): members share type, category, language, era, typical size
    // and topic, and differ mostly in how they were read.
    struct Project {
        std::string file_type;
        std::string category;
        std::string language;
        double pages_z;
        double images_per_page;
        double tables_per_page;
        bool colorized;
        int author_count;
        int difficulty;
        double bibliography_p;
        EpochSeconds started;
        std::vector<double> topic;
    };
    Rng project_rng(derive_seed(seed, 7));
    const std::size_t n_projects = std::max<std::size_t>(1, (n_docs + 24) / 25);
    std::vector<Project> projects;
    std::vector<double> project_weights;
    for (std::size_t k = 0; k < n_projects; ++k) {
        Project p;
        p.file_type = std::string(pick_weighted(project_rng, kTypes));
        p.category = p.file_type == "pptx" ? "slides" : std::string(pick_weighted(project_rng, kCategories));
        p.language = std::string(pick_weighted(project_rng, kLanguages));
        p.pages_z = project_rng.normal();
        p.images_per_page = project_rng.uniform() * project_rng.uniform() * 0.6;
        p.tables_per_page = project_rng.uniform() * project_rng.uniform() * 0.25;
        p.colorized = project_rng.bernoulli(0.5);
        p.author_count = static_cast<int>(std::min<std::uint64_t>(
            8, project_rng.index(3) + (project_rng.bernoulli(0.3) ? project_rng.index(6) : 0)));
        p.difficulty = 1 + static_cast<int>(project_rng.index(5));
        p.bibliography_p = p.category == "research-paper" ? 0.9 : 0.15;
        p.started = world.now - 60 * kDay - static_cast<EpochSeconds>(project_rng.uniform() * (kHistory - 90 * kDay));
        p.topic.assign(vocab_size, 0.0);
        const std::size_t n_topics = 1 + project_rng.index(2);
        for (std::size_t t = 0; t < n_topics; ++t) {
            const std::size_t topic = (t == 0 && project_rng.bernoulli(0.4))
                                          ? focus_topics[project_rng.index(focus_topics.size())]
                                          : project_rng.index(vocab_size);
            p.topic[topic] += project_rng.uniform(0.3, 1.0);
        }
        projects.push_back(std::move(p));
        project_weights.push_back(1.0 / std::sqrt(static_cast<double>(k + 1)));
    }
    double project_weight_total = 0.0;
    for (double w : project_weights) project_weight_total += w;

    Rng rng(derive_seed(seed, 2));
    std::vector<PendingEvent> pending;
    std::size_t seq = 0;

    for (std::size_t i = 0; i < n_docs; ++i) {
        std::size_t pk = 0;
        for (double u = rng.uniform() * project_weight_total; pk + 1 < n_projects && u >= project_weights[pk]; ++pk)
            u -= project_weights[pk];
        const Project& proj = projects[pk];

        DocumentRecord d;
        d.doc_id = make_doc_id(i);
        d.file_type = rng.bernoulli(0.92) ? proj.file_type : std::string(pick_weighted(rng, kTypes));
        d.content_category = d.file_type == "pptx" ? "slides" : proj.category;
        d.path = "library/project-" + std::to_string(pk + 1) + "/" + d.doc_id + "." + d.file_type;
        d.language = rng.bernoulli(0.96) ? proj.language : std::string(pick_weighted(rng, kLanguages));

        // Marginally log-normal around 11 pages with a heavy right tail;
        // documents of one project have correlated lengths.
        const double pages_z = 0.6 * proj.pages_z + 0.8 * rng.normal();
        d.pages = static_cast<int>(std::clamp(std::round(std::exp(std::log(11.0) + 1.75 * pages_z)), 1.0, 3000.0));
        d.file_size = static_cast<std::uint64_t>(2048.0 + d.pages * rng.lognormal(std::log(40'000.0), 0.3));

        d.author_count = proj.author_count;
        for (int a = 0; a < d.author_count; ++a) {
            const double u = rng.uniform();
            d.author_genders.push_back(u < 0.55 ? Gender::male : (u < 0.9 ? Gender::female : Gender::unknown));
        }
        d.image_count = static_cast<int>(std::floor(proj.images_per_page * d.pages * rng.uniform(0.7, 1.3)));
        d.table_count = static_cast<int>(std::floor(proj.tables_per_page * d.pages * rng.uniform(0.7, 1.3)));
        d.image_color = d.image_count == 0 ? ImageColor::none
                                           : (proj.colorized ? ImageColor::colorized : ImageColor::monochrome);
        d.difficulty_level = proj.difficulty;
        d.has_bibliography = rng.bernoulli(proj.bibliography_p);

        d.topic_vector.assign(vocab_size, 0.0);
        if (!rng.bernoulli(0.03)) {
            for (std::size_t t = 0; t < vocab_size; ++t)
                if (proj.topic[t] > 0.0) d.topic_vector[t] = proj.topic[t] * rng.uniform(0.7, 1.3);
            if (rng.bernoulli(0.3)) d.topic_vector[rng.index(vocab_size)] += rng.uniform(0.1, 0.5);
            normalize(d.topic_vector);
        }

        d.created_at = std::min(world.now - 30 * kDay, proj.started + static_cast<EpochSeconds>(rng.uniform() * 60 * kDay));
        const EpochSeconds age = world.now - d.created_at;
        d.modified_at = d.created_at + static_cast<EpochSeconds>(rng.uniform() * rng.uniform() * std::min(age, 30 * kDay));

        // Reading history: a third never opened, the rest log-normal session counts.
        const double interest = 1.0 - cosine_distance(d.topic_vector, world.profile.interest_vector);
        std::size_t sessions = 0;
        if (rng.bernoulli(0.7)) {
            sessions = static_cast<std::size_t>(std::min(60.0, std::floor(rng.lognormal(0.6 + 1.2 * interest, 0.9))));
        }
        EpochSeconds last_event = 0;
        for (std::size_t s = 0; s < sessions; ++s) {
            const EpochSeconds latest = world.now - 3 * 3600;
            EpochSeconds t = d.created_at + static_cast<EpochSeconds>(rng.uniform() * static_cast<double>(latest - d.created_at));
            const bool night = rng.bernoulli(0.1);
            const bool away = rng.bernoulli(0.05);
            auto push = [&](ExperienceEvent e) {
                if (night) e.time_tag = "night";
                if (away) e.location_tag = "travel";
                last_event = std::max(last_event, e.timestamp);
                pending.push_back({std::move(e), i, seq++});
            };
            push({d.doc_id, EventKind::open, t, std::nullopt, std::nullopt, std::nullopt, std::nullopt});
            int page = 1 + static_cast<int>(rng.index(std::min<std::uint64_t>(d.pages, 3)));
            const std::size_t views = 1 + static_cast<std::size_t>(std::floor(rng.lognormal(1.0, 0.9)));
            for (std::size_t v = 0; v < views && page <= d.pages; ++v) {
                const double dur = std::round(std::min(1800.0, rng.lognormal(std::log(45.0), 0.9)));
                t += 1;
                push({d.doc_id, EventKind::page_view, t, page, dur, std::nullopt, std::nullopt});
                t += static_cast<EpochSeconds>(dur);
                page += rng.bernoulli(0.85) ? 1 : 1 + static_cast<int>(rng.index(5));
            }
            if (rng.bernoulli(0.05)) push({d.doc_id, EventKind::print, ++t, std::nullopt, std::nullopt, std::nullopt, std::nullopt});
            if (rng.bernoulli(0.04)) push({d.doc_id, EventKind::annotate, ++t, std::nullopt, std::nullopt, std::nullopt, std::nullopt});
            if (s > 0 && rng.bernoulli(0.08)) push({d.doc_id, EventKind::refind, ++t, std::nullopt, std::nullopt, std::nullopt, std::nullopt});
            push({d.doc_id, EventKind::close, ++t, std::nullopt, std::nullopt, std::nullopt, std::nullopt});
        }
        d.last_accessed_at = sessions > 0 ? last_event : d.modified_at;
        world.documents.push_back(std::move(d));
    }

    std::sort(pending.begin(), pending.end(), [](const PendingEvent& a, const PendingEvent& b) {
        return std::tie(a.event.timestamp, a.doc_index, a.seq) < std::tie(b.event.timestamp, b.doc_index, b.seq);
    });
    for (auto& p : pending) world.log.append(std::move(p.event));
    return world;
}

const CandidateFeatures& Environment::features_of(std::string_view doc_id) const {
    return features.at(corpus.index_of(doc_id));
}

Environment make_environment(std::vector<DocumentRecord> documents, const ExperienceLog& log,
                             const UserProfile& profile, EpochSeconds now, SplitPolicy policy,
                             FilterTolerances tolerances) {
    Environment env;
    env.features.reserve(documents.size());
    for (const auto& d : documents) env.features.push_back(derive_features(log, d, profile, now));
    env.corpus = CorpusIndex::build(std::move(documents), log);
    env.catalog = build_catalog(compute_catalog_stats(env.corpus), policy);
    env.tolerances = tolerances;
    return env;
}

Environment make_environment(const SyntheticWorld& world, SplitPolicy policy, FilterTolerances tolerances) {
    return make_environment(world.documents, world.log, world.profile, world.now, policy, tolerances);
}

namespace {

std::vector<double> task_weights(std::span<const DocumentRecord> corpus, const ExperienceLog& log) {
    if (corpus.empty()) throw invalid_argument("cannot generate a task from an empty corpus");
    std::vector<double> weights;
    weights.reserve(corpus.size());
    for (const auto& d : corpus) weights.push_back(1.0 + cumulative_minutes(log, d.doc_id));
    return weights;
}

RefindingTask draw_task(std::span<const DocumentRecord> corpus, const std::vector<double>& weights,
                        std::uint64_t seed, std::string task_id) {
    double total = 0.0;
    for (double w : weights) total += w;
    Rng rng(seed);
    double u = rng.uniform() * total;
    std::size_t chosen = corpus.size() - 1;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (u < weights[i]) {
            chosen = i;
            break;
        }
        u -= weights[i];
    }
    return {std::move(task_id), corpus[chosen].doc_id, weights[chosen]};
}

}  // namespace

RefindingTask generate_task(std::span<const DocumentRecord> corpus, const ExperienceLog& log, std::uint64_t seed,
                            std::string task_id) {
    return draw_task(corpus, task_weights(corpus, log), seed, std::move(task_id));
}

std::vector<RefindingTask> generate_tasks(std::span<const DocumentRecord> corpus, const ExperienceLog& log,
                                          std::uint64_t master_seed, std::size_t count,
                                          std::string_view id_prefix) {
    const std::vector<double> weights = task_weights(corpus, log);
    std::vector<RefindingTask> tasks;
    tasks.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "-%04zu", i + 1);
        tasks.push_back(draw_task(corpus, weights, derive_seed(master_seed, i), std::string(id_prefix) + id));
    }
    return tasks;
}

}  // namespace refind::sim

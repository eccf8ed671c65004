#include <benchmark/benchmark.h>

#include "refind/familiarity_model.hpp"
#include "refind/nnign_ranker.hpp"
#include "refind/random.hpp"
#include "refind/simulation.hpp"

using namespace refind;

namespace {

std::vector<TrainingExample> examples(std::size_t n, std::size_t d) {
    Rng rng(7);
    std::vector<TrainingExample> out(n);
    for (auto& e : out) {
        e.features.resize(d);
        for (double& x : e.features) x = rng.normal();
        e.grade = rng.uniform(1.0, 10.0);
    }
    return out;
}

void BM_FitLinear(benchmark::State& state) {
    const auto ex = examples(static_cast<std::size_t>(state.range(0)), 4);
    for (auto _ : state) benchmark::DoNotOptimize(fit_linear(ex));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitLinear)->Arg(50)->Arg(500)->Arg(5000);

void BM_Rank(benchmark::State& state) {
    const auto model = fit_candidate_model(examples(200, 4));
    Rng rng(11);
    std::vector<CandidateFeatures> feats(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < feats.size(); ++i)
        feats[i] = {"doc-" + std::to_string(i), std::floor(rng.uniform(0, 10)), rng.uniform(0, 60), rng.uniform(0, 400),
                    rng.uniform()};
    const auto threads = static_cast<unsigned>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(rank(feats, model, 5.0, threads));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Rank)->Args({500, 1})->Args({10000, 1})->Args({10000, 4})->Args({100000, 4});

struct EpisodeFixture {
    sim::SyntheticWorld world = sim::generate_corpus(42, 500);
    sim::Environment env = sim::make_environment(world);
    std::vector<sim::RefindingTask> tasks = sim::generate_tasks(world.documents, world.log, 3, 64);
    sim::SimulatedUser user;
    sim::Models models = sim::fit_models(sim::build_training_sets(env, tasks, user));
};

void BM_Episode(benchmark::State& state) {
    static const EpisodeFixture fx;
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sim::simulate_episode(fx.tasks[i++ % fx.tasks.size()], fx.user, fx.env, fx.models));
}
BENCHMARK(BM_Episode);

void BM_GenerateCorpus(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(sim::generate_corpus(1, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_GenerateCorpus)->Arg(500)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();

// One simulated year under the serial reference and the OpenMP policy.

#include <benchmark/benchmark.h>

#include "attisim/simulation.hpp"
#include "fixtures.hpp"
#include "harness.hpp"

namespace {

struct Setup {
    harness::TempDir dir{"bench"};
    attisim::RunConfig config;
    attisim::RunInputs inputs;
    std::unique_ptr<attisim::Gateway> gateway;

    Setup() {
        fixtures::write_lines(dir.file("corpus.jsonl"), fixtures::synthetic_corpus_lines(2000, 2005, 2006, 11));
        config = harness::mock_config(dir.file("corpus.jsonl"), harness::fixture("agents.json"), dir.file("out"), 100,
                                      2005, 2006);
        inputs = attisim::RunInputs::load(config);
        gateway = attisim::Gateway::create(config.backend);
    }
};

Setup& setup() {
    static Setup s;
    return s;
}

void year_step(benchmark::State& st, attisim::ExecutionPolicy policy) {
    auto& s = setup();
    auto config = s.config;
    config.policy = policy;
    const attisim::YearStepper stepper(config, s.inputs, *s.gateway);
    for (auto _ : st) {
        auto state = stepper.initial_state();
        auto out = stepper.step(state, 2005);
        benchmark::DoNotOptimize(out.result.mean_score);
    }
    st.counters["agents"] = static_cast<double>(s.inputs.agents.size());
}

void BM_YearStepSerial(benchmark::State& st) { year_step(st, attisim::ExecutionPolicy::serial); }
void BM_YearStepParallel(benchmark::State& st) { year_step(st, attisim::ExecutionPolicy::parallel); }

}  // namespace

BENCHMARK(BM_YearStepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_YearStepParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

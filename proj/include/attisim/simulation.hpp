#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "attisim/config.hpp"
#include "attisim/corpus.hpp"
#include "attisim/gateway.hpp"
#include "attisim/interventions.hpp"
#include "attisim/lexicon.hpp"
#include "attisim/profiles.hpp"
#include "attisim/prompts.hpp"
#include "attisim/reflection.hpp"
#include "attisim/survey.hpp"
#include "attisim/taxonomy.hpp"

namespace attisim {

// Everything a run reads, loaded once.
struct RunInputs {
    TopicTaxonomy taxonomy;
    MockLexicon lexicon;
    PromptLibrary prompts;
    CorpusIndex corpus;
    IngestReport corpus_report;
    std::vector<AgentProfile> agents;  // the sampled population, in run order
    GroundTruthSeries ground_truth;

    static RunInputs load(const RunConfig& config);
};

// Totals accumulated across years; persisted in the checkpoint.
struct RunCounters {
    long offers = 0;               // headlines offered
    long selected = 0;             // payloads delivered
    long reflected = 0;            // payloads in successful reflection batches
    long failed_reflections = 0;   // batches
    long failed_payloads = 0;      // payloads in failed batches
    long selection_fallbacks = 0;
    long debiased_articles = 0;
    long debias_failures = 0;
    long critique_failures = 0;
    std::map<std::string, long> calls_by_schema;     // requests (first attempts)
    std::map<std::string, long> attempts_by_schema;  // including retries

    nlohmann::json to_json() const;
    static RunCounters from_json(const nlohmann::json& j);
};

struct RunState {
    std::string config_hash;
    nlohmann::json config;   // result fields at start
    nlohmann::json inputs;   // input digests at start
    std::vector<int> completed_years;
    std::vector<int> skipped_years;  // no articles published; no survey taken
    std::vector<OpinionState> states;  // agent order
    std::vector<YearlyResult> results;
    std::uintmax_t replay_offset = 0;
    DebiasCache debias_cache;
    RunCounters counters;

    nlohmann::json to_json() const;
    static RunState from_json(const nlohmann::json& j);
    bool finished(int year) const;
};

// Everything one year produced, before it is written out.
struct YearOutput {
    YearlyResult result;
    std::vector<DomainUpdateLog> update_logs;
    nlohmann::json audit;  // offers, selections, critiques, debiased ids
    Journal journal;       // replay-log entries in flush order
};

// One simulated year. The serial and parallel policies are required to
// produce identical YearOutput and state.
class YearStepper {
  public:
    YearStepper(const RunConfig& config, const RunInputs& inputs, const Gateway& gateway);

    RunState initial_state() const;
    YearOutput step(RunState& state, int year) const;

  private:
    const RunConfig& config_;
    const RunInputs& inputs_;
    const Gateway& gateway_;
};

// Output directory layout.
struct RunLayout {
    std::string root;

    std::string checkpoint() const { return root + "/checkpoint.json"; }
    std::string config() const { return root + "/config.json"; }
    std::string replay_log() const { return root + "/replay_log.jsonl"; }
    std::string update_log(int year) const;
    std::string year_audit(int year) const;
    std::string results_json() const { return root + "/results.json"; }
    std::string results_csv() const { return root + "/results.csv"; }
    std::string domain_influence_csv() const { return root + "/domain_influence.csv"; }
    std::string demographics_csv() const { return root + "/demographics.csv"; }
    std::string run_report() const { return root + "/run_report.json"; }
    std::string chart(const std::string& name) const { return root + "/charts/" + name; }
};

struct RunOptions {
    std::optional<int> stop_after_year;  // checkpoint this year, then stop
};

enum class RunStatus { complete, stopped };

// Fresh run into config.paths.output_dir (previous artifacts there are
// replaced). Fatal errors propagate after the last checkpoint is on disk.
RunStatus run(const RunConfig& config, const RunOptions& options = {});

// Continues from the checkpoint in `output_dir`. When `config` is given its
// result fields and inputs must hash to the checkpoint's; otherwise a
// ConfigError carrying the diff is thrown.
RunStatus resume(const std::string& output_dir, const std::optional<RunConfig>& config = std::nullopt,
                 const RunOptions& options = {});

RunState load_checkpoint(const std::string& path);

// Writes results, CSVs, charts and the run report from a checkpoint and the
// per-year update logs.
void write_outputs(const RunConfig& config, const RunInputs& inputs, const RunState& state);

}  // namespace attisim

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "attisim/distribution.hpp"
#include "attisim/gateway.hpp"
#include "attisim/interventions.hpp"

namespace attisim {

// How the per-agent work inside one year is executed. Both produce
// byte-identical outputs; serial is the reference.
enum class ExecutionPolicy { serial, parallel };

std::string to_string(ExecutionPolicy p);
ExecutionPolicy execution_policy_from_string(const std::string& s);

// Directory holding the shipped taxonomy, lexicon and prompt templates;
// ATTISIM_DATA_DIR in the environment overrides the build-time location.
std::string default_data_dir();

struct RunPaths {
    std::string corpus;
    std::string profiles;
    std::string ground_truth;  // optional; empty disables MAE and gt chart lines
    std::string taxonomy = default_data_dir() + "/taxonomy.json";
    std::string lexicon = default_data_dir() + "/lexicon.json";
    std::string prompts_dir = default_data_dir() + "/prompts";
    std::string output_dir = "out";
};

struct RunConfig {
    std::uint64_t seed = 42;
    int first_year = 2005;
    int last_year = 2025;
    std::size_t n_agents = 100;
    std::size_t headlines_per_agent = 50;  // k
    std::size_t reads_per_year = 10;       // m
    std::size_t batch_size = 0;            // 0 means m
    BackendConfig backend;
    InterventionMode intervention = InterventionMode::baseline;
    AblationFlags ablation;
    std::string mae_basis = "both";
    int workers = 0;  // 0: OpenMP default
    ExecutionPolicy policy = ExecutionPolicy::parallel;
    RunPaths paths;

    std::size_t effective_batch() const { return batch_size == 0 ? reads_per_year : batch_size; }
    int year_count() const { return last_year - first_year + 1; }

    // Throws ConfigError on m > k, batch > m, more than one ablation, an
    // empty year range or missing required paths.
    void validate() const;

    nlohmann::json to_json() const;
    // Unknown keys are rejected. Relative paths resolve against `base_dir`.
    static RunConfig from_json(const nlohmann::json& j, const std::string& base_dir = "");
    static RunConfig load(const std::string& path);

    // The fields that change simulation results (no output dir, worker
    // count, policy, credentials or timeouts).
    nlohmann::json result_fields() const;
};

// Digest of every input file the simulation reads.
nlohmann::json input_digests(const RunConfig& config);

// Hex digest of result_fields() and input_digests().
std::string config_hash(const RunConfig& config);
std::string config_hash(const nlohmann::json& result_fields, const nlohmann::json& digests);

// "path: old -> new" lines for every leaf that differs.
std::vector<std::string> json_diff(const nlohmann::json& before, const nlohmann::json& after,
                                   const std::string& prefix = "");

}  // namespace attisim

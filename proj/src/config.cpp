#include "attisim/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <set>

#include <fmt/format.h>

#include "attisim/common.hpp"
#include "attisim/rng.hpp"
#include "attisim/survey.hpp"

#ifndef ATTISIM_DATA_DIR
#define ATTISIM_DATA_DIR "data"
#endif

namespace fs = std::filesystem;

namespace attisim {

std::string to_string(ExecutionPolicy p) { return p == ExecutionPolicy::serial ? "serial" : "parallel"; }

ExecutionPolicy execution_policy_from_string(const std::string& s) {
    if (s == "serial") return ExecutionPolicy::serial;
    if (s == "parallel") return ExecutionPolicy::parallel;
    throw ConfigError("unknown execution policy: " + s);
}

std::string default_data_dir() {
    if (const char* env = std::getenv("ATTISIM_DATA_DIR")) return env;
    return ATTISIM_DATA_DIR;
}

void RunConfig::validate() const {
    if (first_year > last_year) throw ConfigError(fmt::format("empty year range {}-{}", first_year, last_year));
    if (n_agents == 0) throw ConfigError("n_agents must be positive");
    if (reads_per_year == 0) throw ConfigError("reads_per_year must be positive");
    if (reads_per_year > headlines_per_agent) {
        throw ConfigError(fmt::format("reads_per_year ({}) exceeds headlines_per_agent ({})", reads_per_year,
                                      headlines_per_agent));
    }
    if (effective_batch() > reads_per_year) {
        throw ConfigError(fmt::format("batch_size ({}) exceeds reads_per_year ({})", batch_size, reads_per_year));
    }
    ablation.validate();
    mae_basis_from_string(mae_basis);
    if (workers < 0) throw ConfigError("workers must be >= 0");
    if (paths.corpus.empty()) throw ConfigError("paths.corpus is required");
    if (paths.profiles.empty()) throw ConfigError("paths.profiles is required");
    if (paths.output_dir.empty()) throw ConfigError("paths.output_dir is required");
    backend.validate();
}

namespace {

nlohmann::json backend_to_json(const BackendConfig& b) {
    return {{"mode", to_string(b.mode)},
            {"base_url", b.base_url},
            {"model_name", b.model_name},
            {"api_key_env", b.api_key_env},
            {"max_in_flight", b.max_in_flight},
            {"max_attempts", b.retry.max_attempts},
            {"backoff_ms", b.retry.backoff_ms},
            {"timeout_s", b.timeout_s},
            {"temperature", b.decoding.temperature},
            {"max_tokens", b.decoding.max_tokens},
            {"replay_source", b.replay_source}};
}

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw ConfigError(fmt::format("unknown config key '{}{}'", where, key));
    }
}

std::string resolve(const std::string& base, const std::string& p) {
    if (p.empty() || base.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(base) / p).lexically_normal().string();
}

BackendConfig backend_from_json(const nlohmann::json& j, const std::string& base) {
    check_keys(j,
               {"mode", "base_url", "model_name", "api_key_env", "max_in_flight", "max_attempts", "backoff_ms",
                "timeout_s", "temperature", "max_tokens", "replay_source"},
               "backend.");
    BackendConfig b;
    b.mode = backend_mode_from_string(j.value("mode", std::string("mock")));
    b.base_url = j.value("base_url", b.base_url);
    b.model_name = j.value("model_name", b.model_name);
    b.api_key_env = j.value("api_key_env", b.api_key_env);
    b.max_in_flight = j.value("max_in_flight", b.max_in_flight);
    b.retry.max_attempts = j.value("max_attempts", b.retry.max_attempts);
    if (j.contains("backoff_ms")) b.retry.backoff_ms = j["backoff_ms"].get<std::vector<int>>();
    b.timeout_s = j.value("timeout_s", b.timeout_s);
    b.decoding.temperature = j.value("temperature", b.decoding.temperature);
    b.decoding.max_tokens = j.value("max_tokens", b.decoding.max_tokens);
    b.replay_source = resolve(base, j.value("replay_source", b.replay_source));
    return b;
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
    return {{"seed", seed},
            {"years", {{"first", first_year}, {"last", last_year}}},
            {"n_agents", n_agents},
            {"headlines_per_agent", headlines_per_agent},
            {"reads_per_year", reads_per_year},
            {"batch_size", effective_batch()},
            {"backend", backend_to_json(backend)},
            {"intervention", to_string(intervention)},
            {"ablation", ablation.name()},
            {"mae_basis", mae_basis},
            {"workers", workers},
            {"policy", to_string(policy)},
            {"paths",
             {{"corpus", paths.corpus},
              {"profiles", paths.profiles},
              {"ground_truth", paths.ground_truth},
              {"taxonomy", paths.taxonomy},
              {"lexicon", paths.lexicon},
              {"prompts_dir", paths.prompts_dir},
              {"output_dir", paths.output_dir}}}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::string& base_dir) {
    check_keys(j,
               {"seed", "years", "n_agents", "headlines_per_agent", "reads_per_year", "batch_size", "backend",
                "intervention", "ablation", "mae_basis", "workers", "policy", "paths"},
               "");
    RunConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        if (j.contains("years")) {
            check_keys(j["years"], {"first", "last"}, "years.");
            c.first_year = j["years"].value("first", c.first_year);
            c.last_year = j["years"].value("last", c.last_year);
        }
        c.n_agents = j.value("n_agents", c.n_agents);
        c.headlines_per_agent = j.value("headlines_per_agent", c.headlines_per_agent);
        c.reads_per_year = j.value("reads_per_year", c.reads_per_year);
        c.batch_size = j.value("batch_size", c.batch_size);
        if (j.contains("backend")) c.backend = backend_from_json(j["backend"], base_dir);
        c.intervention = intervention_from_string(j.value("intervention", std::string("baseline")));
        c.ablation = AblationFlags::from_name(j.value("ablation", std::string("none")));
        c.mae_basis = j.value("mae_basis", c.mae_basis);
        c.workers = j.value("workers", c.workers);
        c.policy = execution_policy_from_string(j.value("policy", std::string("parallel")));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    if (j.contains("paths")) {
        const auto& p = j["paths"];
        check_keys(p, {"corpus", "profiles", "ground_truth", "taxonomy", "lexicon", "prompts_dir", "output_dir"},
                   "paths.");
        auto get = [&](const char* key, std::string& field) {
            if (p.contains(key)) field = resolve(base_dir, p[key].get<std::string>());
        };
        get("corpus", c.paths.corpus);
        get("profiles", c.paths.profiles);
        get("ground_truth", c.paths.ground_truth);
        get("taxonomy", c.paths.taxonomy);
        get("lexicon", c.paths.lexicon);
        get("prompts_dir", c.paths.prompts_dir);
        get("output_dir", c.paths.output_dir);
    }
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path, e.what()));
    }
    return from_json(j, fs::path(path).parent_path().string());
}

nlohmann::json RunConfig::result_fields() const {
    auto j = to_json();
    j.erase("workers");
    j.erase("policy");
    j["paths"].erase("output_dir");
    j["paths"].erase("ground_truth");
    for (const char* k : {"api_key_env", "max_in_flight", "backoff_ms", "timeout_s", "replay_source"}) {
        j["backend"].erase(k);
    }
    return j;
}

nlohmann::json input_digests(const RunConfig& config) {
    auto digest = [](const std::string& path) { return fmt::format("{:016x}", fnv1a64(read_file(path))); };
    nlohmann::json j = {{"corpus", digest(config.paths.corpus)},
                        {"profiles", digest(config.paths.profiles)},
                        {"taxonomy", digest(config.paths.taxonomy)},
                        {"lexicon", digest(config.paths.lexicon)}};
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(config.paths.prompts_dir)) {
        if (e.path().extension() == ".txt") files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) j["prompts"][fs::path(f).filename().string()] = digest(f);
    return j;
}

std::string config_hash(const nlohmann::json& result_fields, const nlohmann::json& digests) {
    return fmt::format("{:016x}", fnv1a64(result_fields.dump() + "\n" + digests.dump()));
}

std::string config_hash(const RunConfig& config) { return config_hash(config.result_fields(), input_digests(config)); }

std::vector<std::string> json_diff(const nlohmann::json& before, const nlohmann::json& after,
                                   const std::string& prefix) {
    std::vector<std::string> out;
    if (before.is_object() && after.is_object()) {
        std::set<std::string> keys;
        for (const auto& [k, v] : before.items()) keys.insert(k);
        for (const auto& [k, v] : after.items()) keys.insert(k);
        for (const auto& k : keys) {
            const std::string path = prefix.empty() ? k : prefix + "." + k;
            if (!before.contains(k)) {
                out.push_back(fmt::format("{}: (absent) -> {}", path, after[k].dump()));
            } else if (!after.contains(k)) {
                out.push_back(fmt::format("{}: {} -> (absent)", path, before[k].dump()));
            } else {
                auto sub = json_diff(before[k], after[k], path);
                out.insert(out.end(), sub.begin(), sub.end());
            }
        }
        return out;
    }
    if (before != after) out.push_back(fmt::format("{}: {} -> {}", prefix, before.dump(), after.dump()));
    return out;
}

}  // namespace attisim

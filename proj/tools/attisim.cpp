// attisim command-line front end.
//
// Exit codes: 0 success (run/resume: every year completed and all outputs
// written), 1 runtime or data error, 2 invalid configuration, 3 run stopped
// early on request.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "attisim/charts.hpp"
#include "attisim/common.hpp"
#include "attisim/config.hpp"
#include "attisim/corpus.hpp"
#include "attisim/outputs.hpp"
#include "attisim/profiles.hpp"
#include "attisim/simulation.hpp"

namespace fs = std::filesystem;
using namespace attisim;

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string backend;
    std::string intervention;
    std::string ablation;
    std::string out;
    std::optional<std::size_t> agents;
    std::string years;
    std::optional<int> workers;
    std::string policy;
    std::string replay_source;
    std::string ground_truth;
};

void add_run_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Run seed");
    cmd->add_option("--backend", o.backend, "Generation backend")->check(CLI::IsMember({"remote", "mock", "replay"}));
    cmd->add_option("--intervention", o.intervention, "Intervention mode")
        ->check(CLI::IsMember({"baseline", "debias", "devils-advocate"}));
    cmd->add_option("--ablation", o.ablation, "Ablation")
        ->check(CLI::IsMember({"none", "no-cognitive", "no-profile", "no-selection", "title-only"}));
    cmd->add_option("--agents", o.agents, "Number of agents");
    cmd->add_option("--years", o.years, "Inclusive year range FIRST-LAST");
    cmd->add_option("--workers", o.workers, "Worker threads (0: all cores)");
    cmd->add_option("--policy", o.policy, "Execution policy")->check(CLI::IsMember({"serial", "parallel"}));
    cmd->add_option("--replay-source", o.replay_source, "Recorded replay log for --backend replay");
    cmd->add_option("--ground-truth", o.ground_truth, "Ground-truth CSV");
}

RunConfig apply(RunConfig c, const Overrides& o) {
    if (o.seed) c.seed = *o.seed;
    if (!o.backend.empty()) c.backend.mode = backend_mode_from_string(o.backend);
    if (!o.intervention.empty()) c.intervention = intervention_from_string(o.intervention);
    if (!o.ablation.empty()) c.ablation = AblationFlags::from_name(o.ablation);
    if (!o.out.empty()) c.paths.output_dir = o.out;
    if (o.agents) c.n_agents = *o.agents;
    if (!o.years.empty()) {
        const auto dash = o.years.find('-');
        if (dash == std::string::npos) throw ConfigError("--years expects FIRST-LAST");
        c.first_year = std::stoi(o.years.substr(0, dash));
        c.last_year = std::stoi(o.years.substr(dash + 1));
    }
    if (o.workers) c.workers = *o.workers;
    if (!o.policy.empty()) c.policy = execution_policy_from_string(o.policy);
    if (!o.replay_source.empty()) c.backend.replay_source = o.replay_source;
    if (!o.ground_truth.empty()) c.paths.ground_truth = o.ground_truth;
    return c;
}

RunConfig config_for(const Overrides& o) {
    RunConfig c = o.config_path.empty() ? RunConfig{} : RunConfig::load(o.config_path);
    return apply(std::move(c), o);
}

RunConfig stored_config(const std::string& out_dir) {
    const RunLayout layout{out_dir};
    if (!fs::exists(layout.config())) throw ConfigError("no run configuration in " + out_dir);
    auto c = RunConfig::from_json(nlohmann::json::parse(read_file(layout.config())));
    c.paths.output_dir = out_dir;
    return c;
}

int status_code(RunStatus s) { return s == RunStatus::complete ? 0 : 3; }

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_logger_mt("attisim");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);

    CLI::App app{"Agent-based simulation of public attitudes shaped by news exposure"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error"}));

    // build-profiles
    auto* bp = app.add_subcommand("build-profiles", "Match social-media and survey records into agent profiles");
    std::string social_path, survey_path, schema_path = default_data_dir() + "/profile_schema.json";
    Overrides bp_o;
    bp->add_option("--social", social_path, "Social-media records (JSON Lines)")->required();
    bp->add_option("--survey", survey_path, "Survey respondent records (JSON Lines)")->required();
    bp->add_option("--schema", schema_path, "Profile schema");
    bp->add_option("--config", bp_o.config_path, "Run config (backend and data paths)");
    bp->add_option("--backend", bp_o.backend, "Generation backend")->check(CLI::IsMember({"remote", "mock", "replay"}));
    bp->add_option("--replay-source", bp_o.replay_source, "Recorded replay log for --backend replay");
    bp->add_option("--out", bp_o.out, "Output directory")->required();

    // ingest-corpus
    auto* ic = app.add_subcommand("ingest-corpus", "Validate a news corpus and report statistics");
    std::string corpus_path;
    int first_year = 2005, last_year = 2025;
    std::string ic_out;
    ic->add_option("--corpus", corpus_path, "Corpus (JSON Lines)")->required();
    ic->add_option("--first-year", first_year);
    ic->add_option("--last-year", last_year);
    ic->add_option("--out", ic_out, "Directory for corpus_report.json and corpus_stats.json");

    // run
    auto* rn = app.add_subcommand("run", "Run a simulation");
    Overrides rn_o;
    std::optional<int> stop_after;
    rn->add_option("--config", rn_o.config_path, "Run config (JSON)");
    rn->add_option("--out", rn_o.out, "Output directory");
    add_run_flags(rn, rn_o);
    rn->add_option("--stop-after-year", stop_after, "Checkpoint the given year and stop")->group("");

    // resume
    auto* rs = app.add_subcommand("resume", "Continue an interrupted run from its checkpoint");
    Overrides rs_o;
    rs->add_option("--out", rs_o.out, "Output directory of the interrupted run")->required();
    rs->add_option("--config", rs_o.config_path, "Config to check against the checkpoint");
    rs->add_option("--stop-after-year", stop_after, "Checkpoint the given year and stop")->group("");

    // report
    auto* rp = app.add_subcommand("report", "Rewrite results, CSVs, charts and the run report from a checkpoint");
    Overrides rp_o;
    rp->add_option("--out", rp_o.out, "Run output directory")->required();
    rp->add_option("--ground-truth", rp_o.ground_truth, "Ground-truth CSV");

    // charts
    auto* ch = app.add_subcommand("charts", "Render SVG charts from results.json");
    Overrides ch_o;
    ch->add_option("--out", ch_o.out, "Run output directory")->required();
    ch->add_option("--ground-truth", ch_o.ground_truth, "Ground-truth CSV");

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (*bp) {
            RunConfig c = config_for(bp_o);
            c.backend.validate();
            const auto taxonomy = TopicTaxonomy::load(c.paths.taxonomy);
            const auto prompts = PromptLibrary::load(c.paths.prompts_dir);
            const auto schema = ProfileSchema::load(schema_path);
            const auto gateway = Gateway::create(c.backend);
            auto built = build_profiles_from_files(social_path, survey_path, schema, taxonomy, *gateway, prompts);
            fs::create_directories(bp_o.out);
            write_file_atomic(bp_o.out + "/profiles.json", profiles_to_string(built.profiles) + "\n");
            write_file_atomic(bp_o.out + "/matching_report.json", built.report.to_json().dump(2) + "\n");
            write_file_atomic(bp_o.out + "/matching_report.txt", built.report.to_text());
            ReplayLogWriter log(bp_o.out + "/profiles_replay.jsonl");
            log.truncate_to(0);
            log.append(built.journal);
            std::cout << built.report.to_text();
            return 0;
        }
        if (*ic) {
            CorpusConfig cc;
            cc.first_year = first_year;
            cc.last_year = last_year;
            const auto taxonomy = TopicTaxonomy::load(default_data_dir() + "/taxonomy.json");
            auto result = ingest_corpus(corpus_path, cc, &taxonomy);
            const auto stats = corpus_stats(result.index);
            if (!ic_out.empty()) {
                fs::create_directories(ic_out);
                write_file_atomic(ic_out + "/corpus_report.json", result.report.to_json().dump(2) + "\n");
                write_file_atomic(ic_out + "/corpus_stats.json", stats.to_json().dump(2) + "\n");
            }
            std::cout << nlohmann::json{{"report", result.report.to_json()}, {"stats", stats.to_json()}}.dump(2)
                      << "\n";
            return 0;
        }
        if (*rn) {
            RunOptions opts;
            opts.stop_after_year = stop_after;
            return status_code(run(config_for(rn_o), opts));
        }
        if (*rs) {
            RunOptions opts;
            opts.stop_after_year = stop_after;
            std::optional<RunConfig> given;
            if (!rs_o.config_path.empty()) given = RunConfig::load(rs_o.config_path);
            return status_code(resume(rs_o.out, given, opts));
        }
        if (*rp) {
            RunConfig c = stored_config(rp_o.out);
            if (!rp_o.ground_truth.empty()) c.paths.ground_truth = rp_o.ground_truth;
            const auto state = load_checkpoint(RunLayout{rp_o.out}.checkpoint());
            const auto inputs = RunInputs::load(c);
            write_outputs(c, inputs, state);
            std::cout << read_file(RunLayout{rp_o.out}.run_report());
            return 0;
        }
        if (*ch) {
            const RunLayout layout{ch_o.out};
            const auto results = results_from_document(nlohmann::json::parse(read_file(layout.results_json())));
            std::string gt_path = ch_o.ground_truth;
            if (gt_path.empty() && fs::exists(layout.config())) gt_path = stored_config(ch_o.out).paths.ground_truth;
            GroundTruthSeries gt;
            if (!gt_path.empty()) gt = load_ground_truth(gt_path);
            if (gt.empty()) spdlog::warn("no ground truth series; charts omit ground-truth lines");
            std::vector<DomainUpdateLog> logs;
            for (const auto& r : results) {
                auto year_logs = parse_update_log(read_file(layout.update_log(r.year)));
                logs.insert(logs.end(), year_logs.begin(), year_logs.end());
            }
            fs::create_directories(layout.root + "/charts");
            write_file_atomic(layout.chart("favorability.svg"), favorability_svg(results, gt));
            write_file_atomic(layout.chart("mean_score.svg"), mean_score_svg(results));
            write_file_atomic(layout.chart("domain_influence.svg"), domain_influence_svg(domain_influence(logs)));
            return 0;
        }
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}

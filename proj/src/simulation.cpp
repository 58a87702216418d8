#include "attisim/simulation.hpp"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <set>

#include <fmt/format.h>
#include <omp.h>
#include <spdlog/spdlog.h>

#include "attisim/charts.hpp"
#include "attisim/common.hpp"
#include "attisim/outputs.hpp"

namespace fs = std::filesystem;

namespace attisim {

RunInputs RunInputs::load(const RunConfig& config) {
    RunInputs in;
    in.taxonomy = TopicTaxonomy::load(config.paths.taxonomy);
    in.lexicon = MockLexicon::load(config.paths.lexicon);
    in.prompts = PromptLibrary::load(config.paths.prompts_dir);
    CorpusConfig cc;
    cc.first_year = config.first_year;
    cc.last_year = config.last_year;
    cc.headline_only = config.ablation.title_only;
    auto ingested = ingest_corpus(config.paths.corpus, cc, &in.taxonomy);
    in.corpus = std::move(ingested.index);
    in.corpus_report = std::move(ingested.report);
    in.agents = sample_agents(load_profiles(config.paths.profiles), config.n_agents, config.seed);
    if (!config.paths.ground_truth.empty()) in.ground_truth = load_ground_truth(config.paths.ground_truth);
    return in;
}

// ---------------------------------------------------------------------------
// Persisted state

nlohmann::json RunCounters::to_json() const {
    return {{"offers", offers},
            {"selected", selected},
            {"reflected", reflected},
            {"failed_reflections", failed_reflections},
            {"failed_payloads", failed_payloads},
            {"selection_fallbacks", selection_fallbacks},
            {"debiased_articles", debiased_articles},
            {"debias_failures", debias_failures},
            {"critique_failures", critique_failures},
            {"calls_by_schema", calls_by_schema},
            {"attempts_by_schema", attempts_by_schema}};
}

RunCounters RunCounters::from_json(const nlohmann::json& j) {
    RunCounters c;
    c.offers = j.at("offers").get<long>();
    c.selected = j.at("selected").get<long>();
    c.reflected = j.at("reflected").get<long>();
    c.failed_reflections = j.at("failed_reflections").get<long>();
    c.failed_payloads = j.at("failed_payloads").get<long>();
    c.selection_fallbacks = j.at("selection_fallbacks").get<long>();
    c.debiased_articles = j.at("debiased_articles").get<long>();
    c.debias_failures = j.at("debias_failures").get<long>();
    c.critique_failures = j.at("critique_failures").get<long>();
    c.calls_by_schema = j.at("calls_by_schema").get<std::map<std::string, long>>();
    c.attempts_by_schema = j.at("attempts_by_schema").get<std::map<std::string, long>>();
    return c;
}

nlohmann::json RunState::to_json() const {
    nlohmann::json states_j = nlohmann::json::array();
    for (const auto& s : states) states_j.push_back(s.to_json());
    nlohmann::json results_j = nlohmann::json::array();
    for (const auto& r : results) results_j.push_back(r.to_json());
    return {{"config_hash", config_hash},
            {"config", config},
            {"inputs", inputs},
            {"completed_years", completed_years},
            {"skipped_years", skipped_years},
            {"states", states_j},
            {"results", results_j},
            {"replay_offset", replay_offset},
            {"debias_cache", debias_cache.to_json()},
            {"counters", counters.to_json()}};
}

RunState RunState::from_json(const nlohmann::json& j) {
    RunState s;
    s.config_hash = j.at("config_hash").get<std::string>();
    s.config = j.at("config");
    s.inputs = j.at("inputs");
    s.completed_years = j.at("completed_years").get<std::vector<int>>();
    s.skipped_years = j.at("skipped_years").get<std::vector<int>>();
    for (const auto& e : j.at("states")) s.states.push_back(OpinionState::from_json(e));
    for (const auto& e : j.at("results")) s.results.push_back(YearlyResult::from_json(e));
    s.replay_offset = j.at("replay_offset").get<std::uintmax_t>();
    s.debias_cache = DebiasCache::from_json(j.at("debias_cache"));
    s.counters = RunCounters::from_json(j.at("counters"));
    return s;
}

bool RunState::finished(int year) const {
    return std::find(completed_years.begin(), completed_years.end(), year) != completed_years.end() ||
           std::find(skipped_years.begin(), skipped_years.end(), year) != skipped_years.end();
}

RunState load_checkpoint(const std::string& path) {
    if (!fs::exists(path)) throw ConfigError("no checkpoint at " + path);
    try {
        return RunState::from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw FatalDataError(fmt::format("corrupt checkpoint {}: {}", path, e.what()));
    }
}

std::string RunLayout::update_log(int year) const { return fmt::format("{}/update_logs/{}.jsonl", root, year); }
std::string RunLayout::year_audit(int year) const { return fmt::format("{}/years/{}.json", root, year); }

// ---------------------------------------------------------------------------
// Year stepper

namespace {

// Runs fn(0..n-1). Every index runs even if another throws; the exception of
// the lowest failing index is rethrown so both policies fail identically.
template <class F>
void for_each_index(std::size_t n, ExecutionPolicy policy, int workers, F&& fn) {
    std::vector<std::exception_ptr> errors(n);
    if (policy == ExecutionPolicy::serial) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        const int threads = workers > 0 ? workers : omp_get_max_threads();
        const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (long i = 0; i < count; ++i) {
            try {
                fn(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

void append(Journal& into, Journal&& from) {
    into.insert(into.end(), std::make_move_iterator(from.begin()), std::make_move_iterator(from.end()));
}

struct AgentYear {
    Journal select_journal;
    Journal journal;
    HeadlineOffer offer;
    std::vector<std::string> selected;
    std::vector<Payload> payloads;
    bool selection_fallback = false;
    std::vector<DomainUpdateLog> logs;
    std::vector<std::string> critiques;
    long reflected = 0;
    long failed_batches = 0;
    long failed_payloads = 0;
    long critique_failures = 0;
    double overall = 0.0;
    int response = 0;
};

}  // namespace

YearStepper::YearStepper(const RunConfig& config, const RunInputs& inputs, const Gateway& gateway)
    : config_(config), inputs_(inputs), gateway_(gateway) {}

RunState YearStepper::initial_state() const {
    RunState s;
    for (const auto& a : inputs_.agents) {
        s.states.push_back(OpinionState::initial(a.agent_id, inputs_.taxonomy.size(), config_.first_year));
    }
    return s;
}

YearOutput YearStepper::step(RunState& state, int year) const {
    const auto& agents = inputs_.agents;
    const std::size_t n = agents.size();
    if (state.states.size() != n) throw FatalDataError("checkpoint agent count does not match the population");
    const auto& flags = config_.ablation;
    const SelectionContext sctx{inputs_.taxonomy, inputs_.lexicon, gateway_, inputs_.prompts};
    const InterventionContext ictx{inputs_.lexicon, gateway_, inputs_.prompts};
    const ReflectionContext rctx{inputs_.taxonomy, inputs_.lexicon, gateway_, inputs_.prompts};
    const SurveyContext vctx{inputs_.taxonomy, gateway_, inputs_.prompts};

    std::vector<AgentYear> work(n);

    // Distribution: offers, selection, retrieval.
    for_each_index(n, config_.policy, config_.workers, [&](std::size_t i) {
        auto& w = work[i];
        w.offer = sample_headlines(inputs_.corpus, year, agents[i].agent_id, config_.headlines_per_agent,
                                   config_.seed);
        const std::size_t m = std::min(config_.reads_per_year, w.offer.offers.size());
        w.selected = select_articles(agents[i], w.offer, m, sctx, flags, w.select_journal, &w.selection_fallback);
        w.payloads = retrieve_full_text(inputs_.corpus, w.selected, flags);
    });

    // Debias pre-pass: each selected article not yet cached is rewritten once.
    Journal debias_journal;
    nlohmann::json debiased_audit = nlohmann::json::array();
    long debiased = 0;
    long debias_failures = 0;
    if (config_.intervention == InterventionMode::debias) {
        std::map<std::string, const Payload*> todo;
        for (const auto& w : work) {
            for (const auto& p : w.payloads) {
                if (!p.full_text.empty() && !state.debias_cache.find(p.article_id)) todo.emplace(p.article_id, &p);
            }
        }
        std::vector<const Payload*> items;
        for (const auto& [id, p] : todo) items.push_back(p);
        std::vector<Payload> out(items.size());
        std::vector<Journal> journals(items.size());
        for_each_index(items.size(), config_.policy, config_.workers,
                       [&](std::size_t j) { out[j] = debias_article(*items[j], ictx, journals[j]); });
        for (std::size_t j = 0; j < items.size(); ++j) {
            state.debias_cache.put(out[j]);
            ++debiased;
            if (out[j].debias_failed) ++debias_failures;
            debiased_audit.push_back({{"article_id", out[j].article_id},
                                      {"debias_failed", out[j].debias_failed},
                                      {"full_text", out[j].full_text}});
            append(debias_journal, std::move(journals[j]));
        }
    }

    // Reflection and survey on a copy; state only changes at the barrier.
    std::vector<OpinionState> next = state.states;
    const std::size_t batch_size = config_.effective_batch();
    for_each_index(n, config_.policy, config_.workers, [&](std::size_t i) {
        auto& w = work[i];
        auto& st = next[i];
        int b = 0;
        for (std::size_t start = 0; start < w.payloads.size(); start += batch_size, ++b) {
            const auto end = std::min(start + batch_size, w.payloads.size());
            std::vector<Payload> batch(w.payloads.begin() + static_cast<long>(start),
                                       w.payloads.begin() + static_cast<long>(end));
            auto transformed =
                apply_intervention(config_.intervention, batch, fmt::format("y{}/{}/critique/b{}", year, st.agent_id, b),
                                   state.debias_cache, ictx, w.journal);
            if (transformed.critique) {
                w.critiques.push_back(*transformed.critique);
                if (transformed.critique->empty()) ++w.critique_failures;
            }
            ReflectionInput in{&agents[i], &st, std::move(transformed.payloads), transformed.critique, year, b};
            const auto outcome = reflect_batch(in, rctx, flags, w.journal);
            if (outcome.failed) {
                ++w.failed_batches;
                w.failed_payloads += static_cast<long>(batch.size());
            } else {
                w.reflected += static_cast<long>(batch.size());
            }
            auto logs = apply_updates(st, outcome, inputs_.taxonomy, year, b);
            w.logs.insert(w.logs.end(), logs.begin(), logs.end());
        }
        w.overall = overall_valence(st);
        w.response = survey_response(&agents[i], st, w.overall, year, vctx, w.journal);
        st.last_response = w.response;
        st.year_cursor = year + 1;
    });

    // Barrier: everything below is single-threaded and in agent order.
    YearOutput out;
    std::vector<AgentYearResult> responses;
    nlohmann::json agents_audit = nlohmann::json::array();
    RunCounters delta;
    for (std::size_t i = 0; i < n; ++i) {
        auto& w = work[i];
        responses.push_back({agents[i].agent_id, w.overall, w.response});
        out.update_logs.insert(out.update_logs.end(), w.logs.begin(), w.logs.end());
        delta.offers += static_cast<long>(w.offer.offers.size());
        delta.selected += static_cast<long>(w.payloads.size());
        delta.reflected += w.reflected;
        delta.failed_reflections += w.failed_batches;
        delta.failed_payloads += w.failed_payloads;
        delta.selection_fallbacks += w.selection_fallback ? 1 : 0;
        delta.critique_failures += w.critique_failures;
        nlohmann::json entry = {{"agent_id", agents[i].agent_id},
                                {"offered", w.offer.ids()},
                                {"selected", w.selected},
                                {"selection_fallback", w.selection_fallback}};
        if (config_.intervention == InterventionMode::devils_advocate) entry["critiques"] = w.critiques;
        agents_audit.push_back(std::move(entry));
    }
    for (auto& w : work) append(out.journal, std::move(w.select_journal));
    append(out.journal, std::move(debias_journal));
    for (auto& w : work) append(out.journal, std::move(w.journal));
    for (const auto& e : out.journal) {
        const auto schema = e.at("schema").get<std::string>();
        ++delta.attempts_by_schema[schema];
        if (e.at("attempt").get<int>() == 1) ++delta.calls_by_schema[schema];
    }

    out.result = aggregate_year(year, responses);
    out.result.payloads_reflected = delta.reflected;
    out.result.failed_reflections = delta.failed_reflections;
    std::map<std::string, std::pair<double, long>> sums;
    for (const auto& l : out.update_logs) {
        auto& s = sums[l.domain];
        s.first += l.new_valence;
        ++s.second;
    }
    for (const auto& [domain, s] : sums) out.result.domain_mean_update[domain] = s.first / static_cast<double>(s.second);

    out.audit = {{"year", year}, {"agents", agents_audit}};
    if (config_.intervention == InterventionMode::debias) out.audit["debiased"] = debiased_audit;

    auto& c = state.counters;
    c.offers += delta.offers;
    c.selected += delta.selected;
    c.reflected += delta.reflected;
    c.failed_reflections += delta.failed_reflections;
    c.failed_payloads += delta.failed_payloads;
    c.selection_fallbacks += delta.selection_fallbacks;
    c.critique_failures += delta.critique_failures;
    c.debiased_articles += debiased;
    c.debias_failures += debias_failures;
    for (const auto& [k, v] : delta.calls_by_schema) c.calls_by_schema[k] += v;
    for (const auto& [k, v] : delta.attempts_by_schema) c.attempts_by_schema[k] += v;
    state.states = std::move(next);
    state.results.push_back(out.result);
    state.completed_years.push_back(year);
    return out;
}

// ---------------------------------------------------------------------------
// Run / resume

namespace {

RunConfig with_absolute_paths(RunConfig c) {
    auto abs = [](std::string& p) {
        if (!p.empty()) p = fs::absolute(p).lexically_normal().string();
    };
    abs(c.paths.corpus);
    abs(c.paths.profiles);
    abs(c.paths.ground_truth);
    abs(c.paths.taxonomy);
    abs(c.paths.lexicon);
    abs(c.paths.prompts_dir);
    abs(c.paths.output_dir);
    abs(c.backend.replay_source);
    return c;
}

RunStatus drive(const RunConfig& config, const RunInputs& inputs, const Gateway& gateway, RunState& state,
                ReplayLogWriter& log, const RunOptions& options) {
    const RunLayout layout{config.paths.output_dir};
    fs::create_directories(layout.root + "/update_logs");
    fs::create_directories(layout.root + "/years");
    const YearStepper stepper(config, inputs, gateway);
    for (int year = config.first_year; year <= config.last_year; ++year) {
        if (state.finished(year)) continue;
        if (inputs.corpus.articles_for_year(year).empty()) {
            spdlog::warn("{}; skipping the year", YearEmptyError(year).what());
            state.skipped_years.push_back(year);
            write_file_atomic(layout.checkpoint(), state.to_json().dump() + "\n");
        } else {
            spdlog::info("year {}: {} agents", year, inputs.agents.size());
            auto out = stepper.step(state, year);
            log.append(out.journal);
            write_file_atomic(layout.update_log(year), update_log_jsonl(out.update_logs));
            write_file_atomic(layout.year_audit(year), out.audit.dump(1) + "\n");
            state.replay_offset = log.offset();
            write_file_atomic(layout.checkpoint(), state.to_json().dump() + "\n");
            spdlog::info("year {}: favorable {:.1f}%, mean score {:.3f}", year, out.result.favorable_pct,
                         out.result.mean_score);
        }
        if (options.stop_after_year && *options.stop_after_year == year && year != config.last_year) {
            spdlog::info("stopping after {} as requested", year);
            return RunStatus::stopped;
        }
    }
    write_outputs(config, inputs, state);
    return RunStatus::complete;
}

}  // namespace

RunStatus run(const RunConfig& raw_config, const RunOptions& options) {
    raw_config.validate();
    const RunConfig config = with_absolute_paths(raw_config);
    const RunLayout layout{config.paths.output_dir};

    const RunInputs inputs = RunInputs::load(config);
    const auto gateway = Gateway::create(config.backend);  // replay sources are read before the log is reset

    fs::create_directories(layout.root);
    for (const char* sub : {"update_logs", "years", "charts"}) fs::remove_all(layout.root + "/" + sub);
    for (const auto& f : {layout.checkpoint(), layout.results_json(), layout.results_csv(),
                          layout.domain_influence_csv(), layout.demographics_csv(), layout.run_report()}) {
        fs::remove(f);
    }
    write_file_atomic(layout.config(), config.to_json().dump(2) + "\n");

    const YearStepper stepper(config, inputs, *gateway);
    RunState state = stepper.initial_state();
    state.config = config.result_fields();
    state.inputs = input_digests(config);
    state.config_hash = config_hash(state.config, state.inputs);

    ReplayLogWriter log(layout.replay_log());
    log.truncate_to(0);
    return drive(config, inputs, *gateway, state, log, options);
}

RunStatus resume(const std::string& output_dir, const std::optional<RunConfig>& given, const RunOptions& options) {
    const RunLayout layout{output_dir};
    RunState state = load_checkpoint(layout.checkpoint());

    RunConfig config;
    if (given) {
        config = *given;
    } else {
        config = RunConfig::from_json(nlohmann::json::parse(read_file(layout.config())));
    }
    config.paths.output_dir = output_dir;
    config.validate();
    config = with_absolute_paths(config);

    const auto fields = config.result_fields();
    const auto digests = input_digests(config);
    if (config_hash(fields, digests) != state.config_hash) {
        auto diff = json_diff(state.config, fields);
        auto inputs_diff = json_diff(state.inputs, digests, "inputs");
        diff.insert(diff.end(), inputs_diff.begin(), inputs_diff.end());
        std::string msg = "configuration differs from the checkpoint; refusing to resume";
        for (const auto& d : diff) msg += "\n  " + d;
        throw ConfigError(msg);
    }

    const bool done = static_cast<int>(state.completed_years.size() + state.skipped_years.size()) ==
                      config.year_count();
    if (done && fs::exists(layout.results_json())) {
        spdlog::info("run in {} is already complete", output_dir);
        return RunStatus::complete;
    }

    const RunInputs inputs = RunInputs::load(config);
    const auto gateway = Gateway::create(config.backend);
    ReplayLogWriter log(layout.replay_log());
    log.truncate_to(state.replay_offset);
    if (!done) spdlog::info("resuming {}", output_dir);
    return drive(config, inputs, *gateway, state, log, options);
}

// ---------------------------------------------------------------------------
// Outputs

void write_outputs(const RunConfig& config, const RunInputs& inputs, const RunState& state) {
    const RunLayout layout{config.paths.output_dir};
    const auto basis = mae_basis_from_string(config.mae_basis);

    std::vector<DomainUpdateLog> logs;
    for (int year : state.completed_years) {
        auto year_logs = parse_update_log(read_file(layout.update_log(year)));
        logs.insert(logs.end(), year_logs.begin(), year_logs.end());
    }
    const auto influence = domain_influence(logs);

    if (inputs.ground_truth.empty()) spdlog::warn("no ground truth series; charts omit ground-truth lines");
    write_file_atomic(layout.results_json(), results_document(state.results, inputs.ground_truth, basis).dump(2) + "\n");
    write_file_atomic(layout.results_csv(), results_csv(state.results, inputs.ground_truth));
    write_file_atomic(layout.domain_influence_csv(), domain_influence_csv(logs));
    write_file_atomic(layout.demographics_csv(), demographics_csv(state.results, inputs.agents));

    fs::create_directories(layout.root + "/charts");
    write_file_atomic(layout.chart("favorability.svg"), favorability_svg(state.results, inputs.ground_truth));
    write_file_atomic(layout.chart("mean_score.svg"), mean_score_svg(state.results));
    write_file_atomic(layout.chart("domain_influence.svg"), domain_influence_svg(influence));

    const auto years = static_cast<long>(state.completed_years.size());
    const auto n = static_cast<long>(inputs.agents.size());
    const auto& c = state.counters;
    nlohmann::json report = {
        {"agents", n},
        {"years_completed", years},
        {"intervention", to_string(config.intervention)},
        {"ablation", config.ablation.name()},
        {"backend", to_string(config.backend.mode)},
        {"counters", c.to_json()},
        {"expected_offers", n * static_cast<long>(config.headlines_per_agent) * years},
        {"expected_payloads", n * static_cast<long>(config.reads_per_year) * years},
        {"payloads_processed", c.selected},
        {"reconciled", c.reflected + c.failed_payloads == c.selected},
        {"corpus", inputs.corpus_report.to_json()},
        {"mae", mae_summary(state.results, inputs.ground_truth)},
    };
    write_file_atomic(layout.run_report(), report.dump(2) + "\n");
}

}  // namespace attisim

#include "attisim/gateway.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "attisim/common.hpp"

namespace attisim {

namespace {

std::int64_t now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

struct SemaphoreGuard {
    explicit SemaphoreGuard(std::counting_semaphore<1 << 16>& s) : sem(s) { sem.acquire(); }
    ~SemaphoreGuard() { sem.release(); }
    std::counting_semaphore<1 << 16>& sem;
};

std::optional<int> as_small_int(const nlohmann::json& v) {
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (std::floor(d) == d && std::fabs(d) < 1e6) return static_cast<int>(d);
        return std::nullopt;
    }
    if (v.is_string()) {
        auto s = trim(v.get<std::string>());
        if (s.size() == 1 && s[0] >= '0' && s[0] <= '9') return s[0] - '0';
    }
    return std::nullopt;
}

}  // namespace

std::string to_string(SchemaId s) {
    switch (s) {
        case SchemaId::selection_list: return "selection_list";
        case SchemaId::reflection_update: return "reflection_update";
        case SchemaId::debiased_text: return "debiased_text";
        case SchemaId::critique_text: return "critique_text";
        case SchemaId::survey_answer: return "survey_answer";
        case SchemaId::interest_list: return "interest_list";
    }
    return "unknown";
}

SchemaId schema_from_string(std::string_view s) {
    for (auto id : {SchemaId::selection_list, SchemaId::reflection_update, SchemaId::debiased_text,
                    SchemaId::critique_text, SchemaId::survey_answer, SchemaId::interest_list}) {
        if (to_string(id) == s) return id;
    }
    throw ValidationError("unknown schema id: " + std::string(s));
}

std::string to_string(BackendMode m) {
    switch (m) {
        case BackendMode::mock: return "mock";
        case BackendMode::remote: return "remote";
        case BackendMode::replay: return "replay";
    }
    return "unknown";
}

BackendMode backend_mode_from_string(std::string_view s) {
    if (s == "mock") return BackendMode::mock;
    if (s == "remote") return BackendMode::remote;
    if (s == "replay") return BackendMode::replay;
    throw ConfigError("unknown backend mode: " + std::string(s));
}

void BackendConfig::validate() const {
    if (max_in_flight < 1) throw ConfigError("backend.max_in_flight must be positive");
    if (retry.max_attempts < 1) throw ConfigError("backend.retry.max_attempts must be positive");
    if (mode == BackendMode::remote) {
        if (base_url.empty()) throw ConfigError("remote backend requires base_url");
        if (model_name.empty()) throw ConfigError("remote backend requires model_name");
    }
    if (mode == BackendMode::replay && replay_source.empty()) {
        throw ConfigError("replay backend requires a recorded replay log");
    }
}

// ---------------------------------------------------------------------------
// JSON extraction and schema normalization

std::optional<nlohmann::json> extract_json(std::string_view text) {
    for (std::size_t start = 0; start < text.size(); ++start) {
        char open = text[start];
        if (open != '{' && open != '[') continue;
        std::vector<char> stack;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{' || c == '[') {
                stack.push_back(c == '{' ? '}' : ']');
            } else if (c == '}' || c == ']') {
                if (stack.empty() || stack.back() != c) break;
                stack.pop_back();
                if (stack.empty()) {
                    auto parsed = nlohmann::json::parse(text.substr(start, i - start + 1), nullptr, false);
                    if (!parsed.is_discarded()) return parsed;
                    break;
                }
            }
        }
    }
    auto whole = nlohmann::json::parse(trim(text), nullptr, false);
    if (!whole.is_discarded()) return whole;
    return std::nullopt;
}

std::optional<nlohmann::json> normalize_schema(SchemaId schema, const std::string& raw,
                                               std::string& error) {
    auto parsed = extract_json(raw);
    if (schema == SchemaId::critique_text) {
        if (parsed && parsed->is_object() && parsed->contains("critique") && (*parsed)["critique"].is_string()) {
            auto text = trim((*parsed)["critique"].get<std::string>());
            if (!text.empty()) return nlohmann::json{{"critique", text}};
        }
        // a plain paragraph is an acceptable critique
        auto text = trim(raw);
        if (!parsed && !text.empty()) return nlohmann::json{{"critique", text}};
        error = "critique_text: expected {\"critique\": <non-empty text>}";
        return std::nullopt;
    }
    if (!parsed) {
        error = "no JSON value found in response";
        return std::nullopt;
    }
    const nlohmann::json& v = *parsed;
    switch (schema) {
        case SchemaId::survey_answer: {
            std::optional<int> answer;
            if (v.is_object()) {
                for (const char* key : {"answer", "response", "rating"}) {
                    if (v.contains(key)) {
                        answer = as_small_int(v[key]);
                        break;
                    }
                }
            } else {
                answer = as_small_int(v);
            }
            if (!answer || *answer < 1 || *answer > 4) {
                error = "survey_answer: expected an integer 1-4";
                return std::nullopt;
            }
            return nlohmann::json(*answer);
        }
        case SchemaId::selection_list: {
            const nlohmann::json* arr = &v;
            if (v.is_object() && v.contains("selected")) arr = &v["selected"];
            if (!arr->is_array()) {
                error = "selection_list: expected an array of headline numbers";
                return std::nullopt;
            }
            nlohmann::json out = nlohmann::json::array();
            for (const auto& e : *arr) {
                auto n = as_small_int(e);
                if (!n && e.is_string()) {
                    auto parsed_n = nlohmann::json::parse(trim(e.get<std::string>()), nullptr, false);
                    if (!parsed_n.is_discarded()) n = as_small_int(parsed_n);
                }
                if (n) out.push_back(*n);
            }
            return out;
        }
        case SchemaId::interest_list: {
            const nlohmann::json* arr = &v;
            if (v.is_object() && v.contains("interests")) arr = &v["interests"];
            if (!arr->is_array()) {
                error = "interest_list: expected an array of topic names";
                return std::nullopt;
            }
            nlohmann::json out = nlohmann::json::array();
            for (const auto& e : *arr) {
                if (e.is_string()) out.push_back(to_lower(trim(e.get<std::string>())));
            }
            return out;
        }
        case SchemaId::debiased_text: {
            if (!v.is_object() || !v.contains("debiased_text") || !v["debiased_text"].is_string() ||
                trim(v["debiased_text"].get<std::string>()).empty()) {
                error = "debiased_text: expected {\"debiased_text\": <non-empty text>}";
                return std::nullopt;
            }
            return nlohmann::json{{"debiased_text", v["debiased_text"].get<std::string>()}};
        }
        case SchemaId::reflection_update: {
            if (!v.is_object() || !v.contains("updates") || !v["updates"].is_array()) {
                error = "reflection_update: expected an object with an 'updates' array";
                return std::nullopt;
            }
            nlohmann::json out;
            out["themes"] = nlohmann::json::array();
            if (v.contains("themes") && v["themes"].is_array()) {
                for (const auto& t : v["themes"]) {
                    if (t.is_string()) out["themes"].push_back(t);
                }
            }
            out["reasoning"] = v.contains("reasoning") && v["reasoning"].is_string() ? v["reasoning"]
                                                                                     : nlohmann::json("");
            out["updates"] = nlohmann::json::array();
            for (const auto& u : v["updates"]) {
                if (!u.is_object() || !u.contains("domain") || !u["domain"].is_string() ||
                    !u.contains("new_valence") || !u["new_valence"].is_number()) {
                    error = "reflection_update: each update needs 'domain' and numeric 'new_valence'";
                    return std::nullopt;
                }
                double nv = u["new_valence"].get<double>();
                if (!(nv >= -2.0 && nv <= 2.0)) {
                    error = "reflection_update: new_valence outside [-2, 2]";
                    return std::nullopt;
                }
                nlohmann::json nu;
                nu["domain"] = to_lower(trim(u["domain"].get<std::string>()));
                nu["new_valence"] = nv;
                nu["action"] = u.contains("action") && u["action"].is_string()
                                   ? to_lower(trim(u["action"].get<std::string>()))
                                   : std::string("none");
                nu["cognitions"] = nlohmann::json::array();
                if (u.contains("cognitions") && u["cognitions"].is_array()) {
                    for (const auto& c : u["cognitions"]) {
                        if (c.is_string()) nu["cognitions"].push_back(c);
                    }
                }
                out["updates"].push_back(std::move(nu));
            }
            return out;
        }
        case SchemaId::critique_text: break;
    }
    error = "unsupported schema";
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// HTTP transport

HttpChatTransport::HttpChatTransport(const BackendConfig& config)
    : config_(config), in_flight_(config.max_in_flight) {
    config_.validate();
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
    // split "scheme://host[:port]/prefix"
    auto scheme_end = config_.base_url.find("://");
    auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = config_.base_url.find('/', host_start);
    if (path_start == std::string::npos) {
        host_ = config_.base_url;
    } else {
        host_ = config_.base_url.substr(0, path_start);
        path_prefix_ = config_.base_url.substr(path_start);
    }
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

nlohmann::json HttpChatTransport::build_body(const GenerationRequest& request, const std::string& model) {
    nlohmann::json messages = nlohmann::json::array();
    if (!request.role_preamble.empty()) {
        messages.push_back({{"role", "system"}, {"content", request.role_preamble}});
    }
    messages.push_back({{"role", "user"}, {"content", request.user_text}});
    return {{"model", model},
            {"messages", messages},
            {"temperature", request.decoding.temperature},
            {"max_tokens", request.decoding.max_tokens}};
}

std::string HttpChatTransport::extract_content(const std::string& response_body) {
    auto j = nlohmann::json::parse(response_body, nullptr, false);
    if (j.is_discarded()) throw TransportError("backend returned non-JSON body");
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw TransportError("backend response lacks choices[0].message.content");
    }
}

std::string HttpChatTransport::complete(const GenerationRequest& request, int /*attempt*/) {
    const auto body = build_body(request, config_.model_name).dump();
    const auto& backoff = config_.retry.backoff_ms;
    std::string last_error;
    for (int attempt = 0; attempt < config_.retry.max_attempts; ++attempt) {
        if (attempt > 0 && !backoff.empty()) {
            auto idx = std::min<std::size_t>(static_cast<std::size_t>(attempt - 1), backoff.size() - 1);
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff[idx]));
        }
        httplib::Result res{nullptr, httplib::Error::Unknown};
        {
            SemaphoreGuard guard(in_flight_);
            httplib::Client client(host_);
            auto secs = static_cast<time_t>(config_.timeout_s);
            client.set_connection_timeout(secs, 0);
            client.set_read_timeout(secs, 0);
            client.set_write_timeout(secs, 0);
            httplib::Headers headers;
            if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
            res = client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
        }
        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
        } else if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
        } else if (res->status != 200) {
            throw TransportError("backend rejected request " + request.request_tag + ": HTTP " +
                                 std::to_string(res->status));
        } else {
            return extract_content(res->body);
        }
        spdlog::warn("request {} failed ({}), attempt {}/{}", request.request_tag, last_error, attempt + 1,
                     config_.retry.max_attempts);
    }
    throw TransportError("request " + request.request_tag + " failed after retries: " + last_error);
}

// ---------------------------------------------------------------------------
// Replay transport

std::shared_ptr<ReplayTransport> ReplayTransport::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open replay log: " + path);
    auto t = std::make_shared<ReplayTransport>();
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto j = nlohmann::json::parse(line);
        Recorded rec{j.at("raw_response").get<std::string>(), j.value("timestamps", nlohmann::json::object())};
        if (j.contains("request") && j["request"].value("model", std::string()) != "mock") t->recorded_from_mock_ = false;
        t->entries_[{j.at("request_tag").get<std::string>(), j.at("attempt").get<int>()}] = std::move(rec);
    }
    return t;
}

std::string ReplayTransport::complete(const GenerationRequest& request, int attempt) {
    auto it = entries_.find({request.request_tag, attempt});
    if (it == entries_.end()) {
        throw TransportError("replay log has no response for " + request.request_tag + " attempt " +
                             std::to_string(attempt));
    }
    return it->second.raw;
}

std::optional<nlohmann::json> ReplayTransport::timestamps(const std::string& tag, int attempt) const {
    auto it = entries_.find({tag, attempt});
    if (it == entries_.end()) return std::nullopt;
    return std::optional<nlohmann::json>(std::in_place, it->second.timestamps);
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(BackendConfig config, std::shared_ptr<CompletionTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    config_.validate();
    if (config_.mode != BackendMode::mock && !transport_) {
        throw ConfigError(to_string(config_.mode) + " backend requires a transport");
    }
}

bool Gateway::mock_semantics() const {
    if (config_.mode == BackendMode::mock) return true;
    auto* replay = dynamic_cast<const ReplayTransport*>(transport_.get());
    return replay && replay->recorded_from_mock();
}

std::unique_ptr<Gateway> Gateway::create(const BackendConfig& config) {
    config.validate();
    std::shared_ptr<CompletionTransport> transport;
    if (config.mode == BackendMode::remote) transport = std::make_shared<HttpChatTransport>(config);
    if (config.mode == BackendMode::replay) transport = ReplayTransport::load(config.replay_source);
    return std::make_unique<Gateway>(config, std::move(transport));
}

nlohmann::json Gateway::generate(GenerationRequest request, const MockProducer& mock, Journal& journal,
                                 const Validator& extra) const {
    if (config_.mode != BackendMode::mock) {
        request.decoding.temperature = config_.decoding.temperature;
        request.decoding.max_tokens = config_.decoding.max_tokens;
    }
    std::string raw;
    for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
        nlohmann::json timestamps{{"sent_ms", 0}, {"received_ms", 0}};
        if (config_.mode == BackendMode::mock) {
            raw = mock().dump();
        } else if (config_.mode == BackendMode::replay) {
            raw = transport_->complete(request, attempt);
            auto* replay = dynamic_cast<ReplayTransport*>(transport_.get());
            if (replay) {
                if (auto ts = replay->timestamps(request.request_tag, attempt)) timestamps = *ts;
            }
        } else {
            timestamps["sent_ms"] = now_ms();
            raw = transport_->complete(request, attempt);
            timestamps["received_ms"] = now_ms();
        }

        std::string error;
        auto normalized = normalize_schema(request.schema, raw, error);
        if (normalized && extra) {
            error = extra(*normalized);
            if (!error.empty()) normalized.reset();
        }

        nlohmann::json entry;
        entry["request_tag"] = request.request_tag;
        entry["attempt"] = attempt;
        entry["schema"] = to_string(request.schema);
        entry["request"] = {{"model", config_.mode == BackendMode::mock ? std::string("mock") : config_.model_name},
                            {"role_preamble", request.role_preamble},
                            {"user_text", request.user_text},
                            {"temperature", request.decoding.temperature},
                            {"max_tokens", request.decoding.max_tokens}};
        entry["raw_response"] = raw;
        entry["parsed"] = normalized ? *normalized : nlohmann::json(nullptr);
        if (!normalized) entry["error"] = error;
        entry["timestamps"] = timestamps;
        journal.push_back(std::move(entry));

        if (normalized) return *normalized;
        spdlog::debug("schema violation for {} (attempt {}): {}", request.request_tag, attempt, error);
    }
    throw SchemaError("response for " + request.request_tag + " violated schema " + to_string(request.schema) +
                          " after " + std::to_string(config_.retry.max_attempts) + " attempts",
                      raw);
}

// ---------------------------------------------------------------------------
// Replay log writer

ReplayLogWriter::ReplayLogWriter(std::string path) : path_(std::move(path)) {
    std::filesystem::path p(path_);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream touch(path_, std::ios::app);
    if (!touch) throw std::runtime_error("cannot open replay log for writing: " + path_);
}

void ReplayLogWriter::truncate_to(std::uintmax_t offset) {
    if (std::filesystem::file_size(path_) < offset) {
        throw FatalDataError("replay log shorter than checkpoint offset: " + path_);
    }
    std::filesystem::resize_file(path_, offset);
}

void ReplayLogWriter::append(const Journal& entries) {
    if (entries.empty()) return;
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    for (const auto& e : entries) out << e.dump() << '\n';
    if (!out) throw std::runtime_error("replay log write failed: " + path_);
}

std::uintmax_t ReplayLogWriter::offset() const { return std::filesystem::file_size(path_); }

}  // namespace attisim

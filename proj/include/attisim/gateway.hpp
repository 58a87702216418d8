#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace attisim {

enum class SchemaId {
    selection_list,
    reflection_update,
    debiased_text,
    critique_text,
    survey_answer,
    interest_list,
};

std::string to_string(SchemaId s);
SchemaId schema_from_string(std::string_view s);

struct Decoding {
    double temperature = 0.7;
    int max_tokens = 1024;
};

struct GenerationRequest {
    std::string role_preamble;
    std::string user_text;
    SchemaId schema = SchemaId::survey_answer;
    Decoding decoding;
    std::string request_tag;  // unique per run; the replay key
};

enum class BackendMode { mock, remote, replay };

std::string to_string(BackendMode m);
BackendMode backend_mode_from_string(std::string_view s);

struct RetryPolicy {
    int max_attempts = 3;
    std::vector<int> backoff_ms{250, 1000, 4000};
};

struct BackendConfig {
    BackendMode mode = BackendMode::mock;
    std::string base_url;
    std::string model_name;
    std::string api_key_env = "ATTISIM_API_KEY";
    int max_in_flight = 8;
    RetryPolicy retry;
    double timeout_s = 120.0;
    Decoding decoding;
    std::string replay_source;  // recorded log consumed in replay mode

    // Throws ConfigError when the remote-mode requirements are not met.
    void validate() const;
};

// Response never conformed to the expected schema within the attempt budget.
class SchemaError : public std::runtime_error {
  public:
    SchemaError(const std::string& what, std::string raw)
        : std::runtime_error(what), raw_text(std::move(raw)) {}
    std::string raw_text;
};

// Backend unreachable (or replay entry missing) after the backoff schedule.
class TransportError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Returns the raw completion text for one attempt of a request.
class CompletionTransport {
  public:
    virtual ~CompletionTransport() = default;
    virtual std::string complete(const GenerationRequest& request, int attempt) = 0;
};

// OpenAI-compatible chat-completion client: POST {base_url}/chat/completions
// with a bearer token read from the environment. At most `max_in_flight`
// requests are outstanding at once.
class HttpChatTransport : public CompletionTransport {
  public:
    explicit HttpChatTransport(const BackendConfig& config);
    std::string complete(const GenerationRequest& request, int attempt) override;

    static nlohmann::json build_body(const GenerationRequest& request, const std::string& model);
    static std::string extract_content(const std::string& response_body);

  private:
    BackendConfig config_;
    std::string api_key_;
    std::string host_;
    std::string path_prefix_;
    std::counting_semaphore<1 << 16> in_flight_;
};

// Serves completions recorded in a replay log, keyed by (request_tag, attempt).
class ReplayTransport : public CompletionTransport {
  public:
    static std::shared_ptr<ReplayTransport> load(const std::string& path);
    std::string complete(const GenerationRequest& request, int attempt) override;
    std::optional<nlohmann::json> timestamps(const std::string& tag, int attempt) const;
    // Every recorded entry came from the mock backend.
    bool recorded_from_mock() const { return recorded_from_mock_; }

  private:
    struct Recorded {
        std::string raw;
        nlohmann::json timestamps;
    };
    std::map<std::pair<std::string, int>, Recorded> entries_;
    bool recorded_from_mock_ = true;
};

// First balanced JSON object or array in `text` that parses; falls back to
// parsing the whole trimmed text as a JSON value.
std::optional<nlohmann::json> extract_json(std::string_view text);

// Shape-checks a parsed value against a schema and returns its normal form
// (selection_list -> int array, survey_answer -> int, ...). Returns nullopt
// with `error` set on violation.
std::optional<nlohmann::json> normalize_schema(SchemaId schema, const std::string& raw,
                                               std::string& error);

// Per-caller buffer of replay-log entries; flushed in a fixed order by the
// orchestrator so the log layout never depends on thread scheduling.
using Journal = std::vector<nlohmann::json>;

// Produces the mock backend's structured answer for a request.
using MockProducer = std::function<nlohmann::json()>;
// Extra semantic check on a normalized value; returns an error message or "".
using Validator = std::function<std::string(const nlohmann::json&)>;

class Gateway {
  public:
    // `transport` is required for remote and replay modes.
    Gateway(BackendConfig config, std::shared_ptr<CompletionTransport> transport);

    static std::unique_ptr<Gateway> create(const BackendConfig& config);

    const BackendConfig& config() const { return config_; }
    BackendMode mode() const { return config_.mode; }
    bool is_mock() const { return config_.mode == BackendMode::mock; }
    // Mock rules apply: the mock backend itself, or a replay of a mock run.
    bool mock_semantics() const;

    // Sends the request (or evaluates `mock`), validates against the
    // request's schema and `extra`, retries up to max_attempts, and appends
    // one journal entry per attempt.
    nlohmann::json generate(GenerationRequest request, const MockProducer& mock, Journal& journal,
                            const Validator& extra = {}) const;

  private:
    BackendConfig config_;
    std::shared_ptr<CompletionTransport> transport_;
};

// Append-only JSON Lines writer for the replay log.
class ReplayLogWriter {
  public:
    explicit ReplayLogWriter(std::string path);
    // Truncates the file to `offset` bytes (resume) and positions at the end.
    void truncate_to(std::uintmax_t offset);
    void append(const Journal& entries);
    std::uintmax_t offset() const;
    const std::string& path() const { return path_; }

  private:
    std::string path_;
};

}  // namespace attisim

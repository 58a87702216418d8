#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace attisim {

// Input that violates a declared format or vocabulary.
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Invalid run configuration (bad flag combination, n > population, ...).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Unrecoverable data inconsistency (duplicate ids, dangling references).
class FatalDataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

constexpr double kValenceMin = -2.0;
constexpr double kValenceMax = 2.0;

double clamp_valence(double v);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Lower-cased word tokens: maximal runs of ASCII letters and digits.
std::vector<std::string> tokenize(std::string_view text);

// Number of occurrences of `phrase` (one or more words) in `tokens`,
// matched on word boundaries.
std::size_t count_phrase(const std::vector<std::string>& tokens,
                         const std::vector<std::string>& phrase);

// Single-pass `{name}` substitution. Braces whose content is not a key in
// `values` are copied through unchanged, so JSON examples survive.
std::string fill_template(std::string_view tmpl,
                          const std::map<std::string, std::string>& values);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace attisim

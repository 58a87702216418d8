#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attisim/corpus.hpp"
#include "attisim/gateway.hpp"

namespace attisim {

struct AgentProfile;

// A template file is a system preamble and a user body separated by a line
// containing only "---".
struct PromptTemplate {
    std::string preamble;
    std::string body;

    static PromptTemplate parse(const std::string& text);
};

struct PromptLibrary {
    static constexpr const char* kNoProfile = "(no profile available)";

    std::map<std::string, PromptTemplate> templates;

    // Loads every *.txt in `dir`; the file stem is the template name.
    static PromptLibrary load(const std::string& dir);
    const PromptTemplate& get(const std::string& name) const;
};

struct DomainOpinion {
    std::string domain;
    double valence = 0.0;
    long exposure = 0;
};

std::string format_demographics(const AgentProfile& profile);
std::string format_fields(const std::map<std::string, std::string>& fields);
std::string format_opinions(const std::vector<DomainOpinion>& opinions);
std::string format_news_list(const std::vector<Payload>& payloads);
std::string join(const std::vector<std::string>& items, const std::string& sep);

GenerationRequest interest_request(const PromptLibrary& lib, const std::string& user_content,
                                   const std::vector<std::string>& topics, std::string tag);

GenerationRequest selection_request(const PromptLibrary& lib, const AgentProfile& profile,
                                    const std::vector<std::string>& headlines, std::size_t m, std::string tag);

struct ReflectionPromptInput {
    const AgentProfile* profile = nullptr;  // null under the no-profile ablation
    std::vector<DomainOpinion> opinions;
    std::vector<Payload> payloads;
    std::vector<std::string> domains;
    bool no_cognitive = false;
    std::optional<std::string> critique;  // devil's-advocate reflection when set
};

GenerationRequest reflection_request(const PromptLibrary& lib, const ReflectionPromptInput& in, std::string tag);

GenerationRequest debias_request(const PromptLibrary& lib, const std::string& full_text, std::string tag);

GenerationRequest critique_request(const PromptLibrary& lib, const std::vector<Payload>& payloads,
                                   std::string tag);

GenerationRequest survey_request(const PromptLibrary& lib, const AgentProfile* profile,
                                 const std::vector<DomainOpinion>& opinions, double overall_valence,
                                 std::optional<int> previous_response, std::string tag);

}  // namespace attisim

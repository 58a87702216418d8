#include "attisim/prompts.hpp"

#include <filesystem>

#include <fmt/format.h>

#include "attisim/common.hpp"
#include "attisim/profiles.hpp"

namespace attisim {

PromptTemplate PromptTemplate::parse(const std::string& text) {
    PromptTemplate t;
    const std::string sep = "\n---\n";
    auto pos = text.find(sep);
    if (pos == std::string::npos) {
        t.body = text;
    } else {
        t.preamble = trim(text.substr(0, pos));
        t.body = text.substr(pos + sep.size());
    }
    while (!t.body.empty() && (t.body.back() == '\n' || t.body.back() == ' ')) t.body.pop_back();
    return t;
}

PromptLibrary PromptLibrary::load(const std::string& dir) {
    namespace fs = std::filesystem;
    PromptLibrary lib;
    if (!fs::is_directory(dir)) throw ConfigError("prompt directory not found: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".txt") continue;
        lib.templates[entry.path().stem().string()] = PromptTemplate::parse(read_file(entry.path().string()));
    }
    for (const char* required : {"reflection", "reflection_devils_advocate", "dissonance",
                                 "dissonance_devils_advocate", "reflection_output", "debias", "devils_advocate",
                                 "selection", "survey", "interests"}) {
        if (!lib.templates.count(required)) {
            throw ConfigError(std::string("prompt template missing: ") + required + ".txt in " + dir);
        }
    }
    return lib;
}

const PromptTemplate& PromptLibrary::get(const std::string& name) const {
    auto it = templates.find(name);
    if (it == templates.end()) throw ConfigError("unknown prompt template: " + name);
    return it->second;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string format_fields(const std::map<std::string, std::string>& fields) {
    std::vector<std::string> parts;
    parts.reserve(fields.size());
    for (const auto& [k, v] : fields) parts.push_back(k + ": " + v);
    return join(parts, "; ");
}

std::string format_demographics(const AgentProfile& profile) { return format_fields(profile.demographics); }

std::string format_opinions(const std::vector<DomainOpinion>& opinions) {
    std::string out;
    for (const auto& o : opinions) {
        out += fmt::format("- {}: {:.2f} (read {} articles)\n", o.domain, o.valence, o.exposure);
    }
    return out;
}

std::string format_news_list(const std::vector<Payload>& payloads) {
    std::string out;
    for (std::size_t i = 0; i < payloads.size(); ++i) {
        out += fmt::format("Article {}: {}\n", i + 1, payloads[i].headline);
        if (!payloads[i].full_text.empty()) out += payloads[i].full_text + "\n";
        out += "\n";
    }
    return out;
}

namespace {

GenerationRequest make_request(const PromptTemplate& t, const std::map<std::string, std::string>& values,
                               SchemaId schema, std::string tag) {
    GenerationRequest r;
    r.role_preamble = fill_template(t.preamble, values);
    r.user_text = fill_template(t.body, values);
    r.schema = schema;
    r.request_tag = std::move(tag);
    return r;
}

std::string interests_str(const AgentProfile& p) { return join(p.interests, ", "); }

}  // namespace

GenerationRequest interest_request(const PromptLibrary& lib, const std::string& user_content,
                                   const std::vector<std::string>& topics, std::string tag) {
    return make_request(lib.get("interests"), {{"user_content", user_content}, {"topic_list", join(topics, ", ")}},
                        SchemaId::interest_list, std::move(tag));
}

GenerationRequest selection_request(const PromptLibrary& lib, const AgentProfile& profile,
                                    const std::vector<std::string>& headlines, std::size_t m, std::string tag) {
    std::string numbered;
    for (std::size_t i = 0; i < headlines.size(); ++i) numbered += fmt::format("{}. {}\n", i + 1, headlines[i]);
    return make_request(lib.get("selection"),
                        {{"interests", interests_str(profile)},
                         {"demographics_str", format_demographics(profile)},
                         {"political_str", format_fields(profile.political_preferences)},
                         {"media_str", format_fields(profile.media_preferences)},
                         {"numbered_headlines", numbered},
                         {"m", std::to_string(m)}},
                        SchemaId::selection_list, std::move(tag));
}

GenerationRequest reflection_request(const PromptLibrary& lib, const ReflectionPromptInput& in, std::string tag) {
    const bool da = in.critique.has_value();
    const auto& tmpl = lib.get(da ? "reflection_devils_advocate" : "reflection");
    std::string dissonance;
    if (!in.no_cognitive) dissonance = lib.get(da ? "dissonance_devils_advocate" : "dissonance").body;
    const std::string actions = in.no_cognitive ? "none" : "confirm|revise|reinforce|dismiss";
    const std::string output_format =
        fill_template(lib.get("reflection_output").body,
                      {{"domain_list", join(in.domains, ", ")}, {"action_list", actions}});

    std::map<std::string, std::string> values{
        {"current_opinions", format_opinions(in.opinions)},
        {"formatted_news_list", format_news_list(in.payloads)},
        {"dissonance_block", dissonance},
        {"output_format", output_format},
    };
    if (in.profile) {
        values["interests"] = interests_str(*in.profile);
        values["demographics_str"] = format_demographics(*in.profile);
        values["domestic_views_str"] = format_fields(in.profile->domestic_views);
    } else {
        values["interests"] = PromptLibrary::kNoProfile;
        values["demographics_str"] = PromptLibrary::kNoProfile;
        values["domestic_views_str"] = PromptLibrary::kNoProfile;
    }
    if (da) values["devils_advocate_response"] = *in.critique;
    return make_request(tmpl, values, SchemaId::reflection_update, std::move(tag));
}

GenerationRequest debias_request(const PromptLibrary& lib, const std::string& full_text, std::string tag) {
    return make_request(lib.get("debias"), {{"full_text", full_text}}, SchemaId::debiased_text, std::move(tag));
}

GenerationRequest critique_request(const PromptLibrary& lib, const std::vector<Payload>& payloads,
                                   std::string tag) {
    return make_request(lib.get("devils_advocate"), {{"formatted_news_list", format_news_list(payloads)}},
                        SchemaId::critique_text, std::move(tag));
}

GenerationRequest survey_request(const PromptLibrary& lib, const AgentProfile* profile,
                                 const std::vector<DomainOpinion>& opinions, double overall_valence,
                                 std::optional<int> previous_response, std::string tag) {
    std::map<std::string, std::string> values{
        {"current_opinions", format_opinions(opinions)},
        {"overall_valence", fmt::format("{:.3f}", overall_valence)},
        {"previous_response", previous_response ? std::to_string(*previous_response) : "(none)"},
    };
    values["interests"] = profile ? interests_str(*profile) : PromptLibrary::kNoProfile;
    values["demographics_str"] = profile ? format_demographics(*profile) : PromptLibrary::kNoProfile;
    values["domestic_views_str"] = profile ? format_fields(profile->domestic_views) : PromptLibrary::kNoProfile;
    return make_request(lib.get("survey"), values, SchemaId::survey_answer, std::move(tag));
}

}  // namespace attisim

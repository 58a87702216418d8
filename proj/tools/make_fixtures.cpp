// Regenerates data/fixtures from the deterministic generators.
//   make_fixtures [DATA_DIR]

#include <filesystem>
#include <iostream>

#include "attisim/common.hpp"
#include "attisim/config.hpp"
#include "attisim/gateway.hpp"
#include "attisim/profiles.hpp"
#include "attisim/prompts.hpp"
#include "attisim/taxonomy.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    const std::string data = argc > 1 ? argv[1] : attisim::default_data_dir();
    const std::string dir = data + "/fixtures";
    fs::create_directories(dir);

    fixtures::write_lines(dir + "/profiles_social.jsonl", fixtures::profile_social_lines());
    fixtures::write_lines(dir + "/profiles_survey.jsonl", fixtures::profile_survey_lines());
    fixtures::write_lines(dir + "/corpus_gate.jsonl", fixtures::corpus_gate_lines());
    fixtures::write_lines(dir + "/negative_corpus.jsonl", fixtures::negative_corpus_lines());
    attisim::write_file_atomic(dir + "/ground_truth.csv", fixtures::ground_truth_csv(2005, 2025));

    const auto population = fixtures::synthetic_population(200, 7);
    const auto taxonomy = attisim::TopicTaxonomy::load(data + "/taxonomy.json");
    const auto prompts = attisim::PromptLibrary::load(data + "/prompts");
    const auto schema = attisim::ProfileSchema::load(data + "/profile_schema.json");
    const auto gateway = attisim::Gateway::create(attisim::BackendConfig{});
    const auto built =
        attisim::build_profiles(population.social, population.survey, schema, taxonomy, *gateway, prompts);
    attisim::write_file_atomic(dir + "/agents.json", attisim::profiles_to_string(built.profiles) + "\n");

    std::cout << "wrote fixtures to " << dir << " (" << built.profiles.size() << " agents)\n";
    return 0;
}

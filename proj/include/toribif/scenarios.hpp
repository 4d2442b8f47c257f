#ifndef TORIBIF_SCENARIOS_HPP
#define TORIBIF_SCENARIOS_HPP

#include <string>
#include <vector>

#include <json.hpp>

namespace toribif {

// All diagnostics for the given config, empty when runnable.
std::vector<std::string> validate_scenario(const nlohmann::json& cfg);

// Execute the scenario, writing its outputs and run_manifest.json into
// out_dir.  Returns the list of files written.  Throws toribif::Error on
// numerical failure; config problems should be caught by validate first.
std::vector<std::string> run_scenario(const nlohmann::json& cfg, const std::string& out_dir,
                                      int workers);

} // namespace toribif

#endif

#pragma once

#include <map>
#include <string>
#include <vector>

#include "restprobe/oas_model.hpp"

namespace restprobe {

/// Values suggested ahead of a session, keyed by normalized parameter name.
using LlmDictionary = std::map<std::string, std::vector<nlohmann::json>>;

/// Loads a JSON file mapping parameter name -> array of scalar values.
/// Non-scalar entries are skipped with a warning line.
LlmDictionary load_llm_dictionary_file(const std::string& path, std::vector<std::string>* warnings);

/// Builds the suggestion prompt for one parameter: operation method, path
/// and description plus the parameter's name, type and description, asking
/// for at least `min_values` realistic values.
std::string llm_prompt(const oas::OperationSpec& op, const oas::ParameterSpec& param,
                       int min_values = 20);

/// Queries a generic completion endpoint once per parameter in the model:
/// POST {"prompt": ...} expecting {"values": [...]}. Failures degrade to an
/// empty entry with a warning; they never abort the session.
LlmDictionary fetch_llm_dictionary(const std::string& endpoint_url, const oas::ApiModel& api,
                                   double timeout_s, std::vector<std::string>* warnings);

}  // namespace restprobe

#pragma once

#include <filesystem>

#include <json.hpp>

#include "meshstyle/config.hpp"

namespace meshstyle {

using Json = nlohmann::ordered_json;

Json config_to_json(const RunConfig& config);
RunConfig config_from_json(const Json& doc);

Json load_json_file(const std::filesystem::path& path);
void save_json_file(const Json& doc, const std::filesystem::path& path);

}  // namespace meshstyle

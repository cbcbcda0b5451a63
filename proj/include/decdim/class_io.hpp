#pragma once

#include <string>

#include <json.hpp>

#include "decdim/model.hpp"

namespace decdim {

inline constexpr const char* kSchemaVersion = "decdim/v1";

ModelClass ClassFromJson(const nlohmann::json& doc);
nlohmann::json ClassToJson(const ModelClass& cls);

ModelClass LoadClass(const std::string& path);
void SaveClass(const ModelClass& cls, const std::string& path);

}  // namespace decdim

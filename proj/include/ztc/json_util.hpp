// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

// Strict accessors for the document schemas the control plane accepts.
namespace ztc::json_util {

nlohmann::json parse(std::string_view text);

void require_object(const nlohmann::json& j, std::string_view where);
void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                    std::string_view where);

std::string require_string(const nlohmann::json& j, std::string_view key, std::string_view where);
double require_number(const nlohmann::json& j, std::string_view key, std::string_view where);
std::int64_t require_int(const nlohmann::json& j, std::string_view key, std::string_view where);
std::int64_t require_non_negative_int(const nlohmann::json& j, std::string_view key,
                                      std::string_view where);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temp file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// JSON has no infinity; unbounded values are emitted as null.
nlohmann::json finite_or_null(double v);

}  // namespace ztc::json_util

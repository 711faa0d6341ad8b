// SPDX-License-Identifier: Apache-2.0

#include "ztc/json_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "ztc/error.hpp"

namespace ztc::json_util {

nlohmann::json parse(std::string_view text) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("malformed JSON: ") + e.what());
  }
}

void require_object(const nlohmann::json& j, std::string_view where) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, std::string(where) + ": expected an object");
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                    std::string_view where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::kParse, std::string(where) + ": unknown field \"" + key + "\"");
    }
  }
}

namespace {
const nlohmann::json& field(const nlohmann::json& j, std::string_view key, std::string_view where) {
  auto it = j.find(std::string(key));
  if (it == j.end()) {
    throw Error(ErrorCode::kParse, std::string(where) + ": missing field \"" + std::string(key) + "\"");
  }
  return *it;
}
}  // namespace

std::string require_string(const nlohmann::json& j, std::string_view key, std::string_view where) {
  const auto& v = field(j, key, where);
  if (!v.is_string()) {
    throw Error(ErrorCode::kParse, std::string(where) + ": \"" + std::string(key) + "\" must be a string");
  }
  return v.get<std::string>();
}

double require_number(const nlohmann::json& j, std::string_view key, std::string_view where) {
  const auto& v = field(j, key, where);
  if (!v.is_number()) {
    throw Error(ErrorCode::kParse, std::string(where) + ": \"" + std::string(key) + "\" must be a number");
  }
  return v.get<double>();
}

std::int64_t require_int(const nlohmann::json& j, std::string_view key, std::string_view where) {
  const auto& v = field(j, key, where);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && std::floor(d) == d) return static_cast<std::int64_t>(d);
  }
  throw Error(ErrorCode::kParse, std::string(where) + ": \"" + std::string(key) + "\" must be an integer");
}

std::int64_t require_non_negative_int(const nlohmann::json& j, std::string_view key,
                                      std::string_view where) {
  const auto v = require_int(j, key, where);
  if (v < 0) {
    throw Error(ErrorCode::kParse, std::string(where) + ": \"" + std::string(key) + "\" must be >= 0");
  }
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "rename " + tmp.string() + ": " + ec.message());
}

nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace ztc::json_util

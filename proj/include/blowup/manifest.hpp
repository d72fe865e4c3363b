#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

#include "json.hpp"

namespace blowup::experiments {

inline constexpr const char* kToolVersion = "0.1.0";

// sha1("blob <len>\0" + bytes), as git hashes file contents.
std::string git_blob_sha1(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);

class RunManifest {
 public:
  RunManifest(std::string command, nlohmann::json params, std::uint64_t seed);

  const std::string& hash() const { return hash_; }
  // `#`-prefixed JSON line carried by every output file.
  std::string header() const;

  // Writes header + body to dir/name and registers the file.
  void write_csv(const std::filesystem::path& dir, const std::string& name,
                 const std::function<void(std::ostream&)>& body);
  void write_json(const std::filesystem::path& dir, const std::string& name, const nlohmann::json& j);

  void set_timing(const std::string& what, double seconds);
  void set_result(const std::string& key, nlohmann::json value);
  nlohmann::json to_json() const;
  void save(const std::filesystem::path& dir) const;  // dir/manifest.json

  // Recomputes every registered file hash; reports mismatches to `log`.
  static bool verify(const std::filesystem::path& manifest_path, std::ostream& log);

 private:
  void register_file(const std::filesystem::path& dir, const std::string& name, const std::string& bytes);

  std::string command_;
  nlohmann::json params_;
  std::uint64_t seed_;
  std::string hash_;
  nlohmann::json files_ = nlohmann::json::array();
  nlohmann::json timings_ = nlohmann::json::object();
  nlohmann::json results_ = nlohmann::json::object();
};

}  // namespace blowup::experiments

#include "blowup/manifest.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "blowup/error.hpp"

namespace blowup::experiments {

namespace {

std::string digest_hex(const EVP_MD* md, std::string_view bytes) {
  unsigned char out[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out, &len, md, nullptr) != 1)
    throw Error("digest computation failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(out[i]);
  return os.str();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << bytes;
}

}  // namespace

std::string git_blob_sha1(std::string_view bytes) {
  std::string buf = "blob " + std::to_string(bytes.size());
  buf.push_back('\0');
  buf.append(bytes);
  return digest_hex(EVP_sha1(), buf);
}

std::string sha256_hex(std::string_view bytes) { return digest_hex(EVP_sha256(), bytes); }

RunManifest::RunManifest(std::string command, nlohmann::json params, std::uint64_t seed)
    : command_(std::move(command)), params_(std::move(params)), seed_(seed) {
  nlohmann::json cfg{{"command", command_}, {"params", params_}, {"seed", seed_}};
  hash_ = git_blob_sha1(cfg.dump());  // nlohmann sorts object keys: canonical
}

std::string RunManifest::header() const {
  nlohmann::json h{{"manifest_hash", hash_}, {"command", command_}, {"params", params_},
                   {"seed", seed_}, {"tool_version", kToolVersion}};
  return "# " + h.dump() + "\n";
}

void RunManifest::register_file(const std::filesystem::path& dir, const std::string& name,
                                const std::string& bytes) {
  spit(dir / name, bytes);
  files_.push_back({{"path", name}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
}

void RunManifest::write_csv(const std::filesystem::path& dir, const std::string& name,
                            const std::function<void(std::ostream&)>& body) {
  std::ostringstream os;
  os << header();
  body(os);
  register_file(dir, name, os.str());
}

void RunManifest::write_json(const std::filesystem::path& dir, const std::string& name,
                             const nlohmann::json& j) {
  nlohmann::json doc = j;
  doc["manifest_hash"] = hash_;
  register_file(dir, name, doc.dump(2) + "\n");
}

void RunManifest::set_timing(const std::string& what, double seconds) { timings_[what] = seconds; }

void RunManifest::set_result(const std::string& key, nlohmann::json value) {
  results_[key] = std::move(value);
}

nlohmann::json RunManifest::to_json() const {
  return {{"tool_version", kToolVersion}, {"command", command_}, {"params", params_},
          {"config_hash", hash_},         {"rng_seed", seed_},   {"outputs", files_},
          {"timings_s", timings_},        {"results", results_}};
}

void RunManifest::save(const std::filesystem::path& dir) const {
  spit(dir / "manifest.json", to_json().dump(2) + "\n");
}

bool RunManifest::verify(const std::filesystem::path& manifest_path, std::ostream& log) {
  const auto j = nlohmann::json::parse(slurp(manifest_path));
  const auto dir = manifest_path.parent_path();
  nlohmann::json cfg{{"command", j.at("command")}, {"params", j.at("params")}, {"seed", j.at("rng_seed")}};
  bool ok = true;
  if (git_blob_sha1(cfg.dump()) != j.at("config_hash").get<std::string>()) {
    log << "config hash mismatch\n";
    ok = false;
  }
  const std::string tag = j.at("config_hash").get<std::string>();
  for (const auto& f : j.at("outputs")) {
    const auto p = dir / f.at("path").get<std::string>();
    if (!std::filesystem::exists(p)) {
      log << "missing: " << p.string() << '\n';
      ok = false;
      continue;
    }
    const std::string bytes = slurp(p);
    if (sha256_hex(bytes) != f.at("sha256").get<std::string>()) {
      log << "hash mismatch: " << p.string() << '\n';
      ok = false;
    } else if (bytes.find(tag) == std::string::npos) {
      log << "manifest hash missing from header: " << p.string() << '\n';
      ok = false;
    } else {
      log << "ok: " << p.string() << '\n';
    }
  }
  return ok;
}

}  // namespace blowup::experiments

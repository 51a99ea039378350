#include "acq/pipeline/workspace.hpp"

#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace acq::pipeline {

namespace {

constexpr const char* kState = "state.json";

std::string to_hex(const unsigned char* d, unsigned n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < n; ++i) {
    out.push_back(kDigits[d[i] >> 4]);
    out.push_back(kDigits[d[i] & 15]);
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned n = 0;
  if (EVP_Digest(data.data(), data.size(), md, &n, EVP_sha256(), nullptr) != 1)
    throw ConfigError("SHA-256 digest failed");
  return to_hex(md, n);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_file(const std::filesystem::path& p) { return sha256_hex(read_file(p)); }

void write_file(const std::filesystem::path& p, std::string_view content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ConfigError("cannot write " + p.string());
  }
  std::filesystem::rename(tmp, p);
}

Workspace::Workspace(const std::filesystem::path& out_dir) : dir_(out_dir / "cache") {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw ConfigError("cannot create " + dir_.string() + ": " + ec.message());
  const auto state = dir_ / kState;
  if (std::filesystem::exists(state)) {
    try {
      state_ = nlohmann::json::parse(read_file(state));
    } catch (const nlohmann::json::exception&) {
      state_ = nullptr;
    }
  }
  if (!state_.is_object() || state_.value("version", 0) != kVersion)
    state_ = {{"version", kVersion}, {"stages", nlohmann::json::object()}};
}

void Workspace::save() const { write_file(dir_ / kState, state_.dump(2) + "\n"); }

void Workspace::record(const std::string& stage, const std::string& key, const std::vector<std::string>& files,
                       nlohmann::json summary) {
  nlohmann::json hashes = nlohmann::json::object();
  for (const auto& f : files) hashes[f] = sha256_file(file(f));
  state_["stages"][stage] = {{"key", key}, {"files", hashes}, {"summary", std::move(summary)}};
  save();
}

void Workspace::require(const std::string& stage, const std::string& key) const {
  const auto& stages = state_["stages"];
  if (!stages.contains(stage)) throw StaleCacheError("stage '" + stage + "' has not run; run it first");
  const auto& rec = stages[stage];
  if (rec.value("key", "") != key)
    throw StaleCacheError("stage '" + stage + "' ran with different inputs or parameters; rerun it");
  for (const auto& [name, hash] : rec["files"].items()) {
    const auto p = file(name);
    if (!std::filesystem::exists(p) || sha256_file(p) != hash.get<std::string>())
      throw StaleCacheError("cached " + name + " changed since stage '" + stage + "' wrote it; rerun it");
  }
}

bool Workspace::fresh(const std::string& stage, const std::string& key) const {
  try {
    require(stage, key);
    return true;
  } catch (const StaleCacheError&) {
    return false;
  }
}

nlohmann::json Workspace::summary(const std::string& stage) const {
  const auto& stages = state_["stages"];
  if (!stages.contains(stage)) return nullptr;
  return stages[stage].value("summary", nlohmann::json(nullptr));
}

void Workspace::invalidate(const std::string& stage) {
  if (state_["stages"].erase(stage) > 0) save();
}

}  // namespace acq::pipeline

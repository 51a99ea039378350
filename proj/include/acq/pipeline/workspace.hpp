#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "acq/error.hpp"

namespace acq::pipeline {

/// Cached intermediates are missing, from another format version, built
/// from different inputs or parameters, or modified since they were written.
class StaleCacheError : public ConfigError {
 public:
  explicit StaleCacheError(const std::string& what) : ConfigError("stale cache: " + what) {}
};

std::string sha256_hex(std::string_view data);
/// Throws ConfigError when the file cannot be read.
std::string sha256_file(const std::filesystem::path& p);

/// Writes through a temporary file and a rename.
void write_file(const std::filesystem::path& p, std::string_view content);
std::string read_file(const std::filesystem::path& p);

/// Versioned stage cache under <out>/cache. state.json holds, per stage,
/// the key the stage ran with and the hash of every file it wrote.
class Workspace {
 public:
  static constexpr int kVersion = 1;

  explicit Workspace(const std::filesystem::path& out_dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path file(std::string_view name) const { return dir_ / std::string(name); }

  /// Marks `stage` complete. `files` are names inside the cache directory.
  void record(const std::string& stage, const std::string& key, const std::vector<std::string>& files,
              nlohmann::json summary = nlohmann::json::object());
  /// Throws StaleCacheError unless `stage` last ran with `key` and its files
  /// are unchanged.
  void require(const std::string& stage, const std::string& key) const;
  bool fresh(const std::string& stage, const std::string& key) const;
  /// Summary recorded with the stage, or null.
  nlohmann::json summary(const std::string& stage) const;
  /// Drops a stage record, e.g. before rerunning it.
  void invalidate(const std::string& stage);

 private:
  void save() const;

  std::filesystem::path dir_;
  nlohmann::json state_;
};

}  // namespace acq::pipeline

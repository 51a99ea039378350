#include "acq/pipeline/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "acq/error.hpp"
#include "acq/ingest/csv.hpp"

namespace acq::pipeline {

using nlohmann::json;

namespace {

constexpr const char* kManifest = "run_manifest.json";
constexpr const char* kBlockGroupsOut = "blockgroups_out.geojson";
constexpr const char* kParcelsSelected = "parcels_selected.geojson";

struct Rule {
  int digits = 0;
  bool percent = false;
  bool time = false;
};

Rule rule_for(std::string_view table, std::string_view metric) {
  if (table == "table1_counts.csv") return metric == "night_share" ? Rule{2, true} : Rule{0};
  if (table == "table2_distances.csv") {
    if (metric == "share_within" || metric == "coverage_fraction") return {1, true};
    if (metric == "median_miles") return {3};
    return {0};
  }
  if (table == "table3_moran.csv") return metric == "I" || metric == "expected" || metric == "p_perm" ? Rule{3} : Rule{0};
  if (table == "table4_summary.csv") return metric == "n" ? Rule{0} : Rule{2};
  if (table == "table5_hotspot_profiles.csv") return metric == "units" || metric == "n" ? Rule{0} : Rule{2};
  if (table == "table6_correlations.csv" || table == "table7_night_diffs.csv")
    return metric == "pairs" ? Rule{0} : Rule{2};
  if (table == "table8_regressions.csv") {
    if (metric == "se" || metric == "p") return {3};
    if (metric == "n" || metric == "k") return {0};
    return {2};
  }
  if (table == "fig2_histograms.csv" && metric == "median_time") return {0, false, true};
  return {0};
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

json number_or_null(const std::string& s) {
  if (s.empty()) return nullptr;
  const auto v = ingest::parse_double(s);
  return v ? json(*v) : json(s);
}

void write_blockgroups_out(const Workspace& ws, const std::filesystem::path& out) {
  auto fc = json::parse(read_file(ws.file("blockgroups.geojson")));
  const auto rates = Frame::load(ws.file("rates.csv"));
  const auto dep = Frame::load(ws.file("deprivation.csv"));
  const auto qmi = Frame::load(ws.file("qmiparc.csv"));
  const auto gz = Frame::load(ws.file("gstar.csv"));
  std::map<std::string, std::size_t> row;
  for (std::size_t i = 0; i < rates.size(); ++i) row[rates.at(i, "id")] = i;
  for (const auto* f : {&dep, &qmi, &gz})
    if (f->strings("id") != rates.strings("id")) throw StaleCacheError("cached per-unit tables disagree on ids");

  for (auto& feature : fc.at("features")) {
    auto& props = feature["properties"];
    const auto it = row.find(props.at("id").get<std::string>());
    if (it == row.end()) throw StaleCacheError("cached block groups and rates disagree");
    const auto i = it->second;
    props["excluded"] = rates.at(i, "excluded") == "1";
    for (const auto& c : rates.columns())
      if (c != "id" && c != "excluded" && !props.contains(c)) props[c] = number_or_null(rates.at(i, c));
    props["deprivation"] = number_or_null(dep.at(i, "deprivation"));
    props["qmiparc"] = number_or_null(qmi.at(i, "qmiparc"));
    for (const auto& c : gz.columns()) {
      if (c == "id") continue;
      const auto& v = gz.at(i, c);
      if (c.ends_with("_class")) props[c] = v.empty() ? json(nullptr) : json(v);
      else props[c] = number_or_null(v);
    }
  }
  write_file(out / kBlockGroupsOut, fc.dump() + "\n");
}

std::string kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Data: return "data";
    case ErrorKind::Numerical: return "numerical";
  }
  return "unknown";
}

}  // namespace

std::vector<std::string> bundle_files() {
  auto files = kTables;
  files.push_back(kBlockGroupsOut);
  files.push_back(kParcelsSelected);
  files.push_back(kManifest);
  return files;
}

std::string display(std::string_view table, std::string_view metric, std::string_view value) {
  if (value.empty()) return {};
  const auto v = ingest::parse_double(value);
  if (!v) return std::string(value);
  const auto r = rule_for(table, metric);
  if (r.time) {
    const long s = std::lround(*v);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%02ld:%02ld", s / 3600, (s / 60) % 60);
    return buf;
  }
  return fixed(r.percent ? *v * 100.0 : *v, r.digits);
}

Frame with_display(const Frame& f, std::string_view table) {
  const auto vc = f.column("value");
  const auto mc = f.column("metric");
  auto cols = f.columns();
  cols.insert(cols.begin() + static_cast<std::ptrdiff_t>(vc) + 1, "display");
  Frame out(cols);
  for (const auto& r : f.rows()) {
    auto row = r;
    row.insert(row.begin() + static_cast<std::ptrdiff_t>(vc) + 1, display(table, r[mc], r[vc]));
    out.add(std::move(row));
  }
  return out;
}

void export_table(const Workspace& ws, const std::string& table, const std::filesystem::path& out_dir) {
  with_display(Frame::load(ws.file(table)), table).save(out_dir / table);
}

json build_manifest(const RunConfig& cfg, const Workspace& ws, const StageKeys& keys,
                    const std::vector<std::string>& completed, const json& failure) {
  json inputs = json::object();
  for (const auto& [name, h] : keys.inputs)
    inputs[name] = {{"path", h.path.empty() ? json(nullptr) : json(h.path)},
                    {"sha256", h.sha256 ? json(*h.sha256) : json(nullptr)}};
  json stages = json::object();
  json warnings = json::array();
  for (const auto& name : completed) {
    auto s = ws.summary(name);
    if (s.is_object() && s.contains("warnings"))
      for (const auto& w : s["warnings"]) warnings.push_back(w);
    stages[name] = std::move(s);
  }
  json outputs = json::object();
  if (failure.is_null())
    for (const auto& f : bundle_files())
      if (f != kManifest) outputs[f] = sha256_file(cfg.out / f);
  return {{"format_version", Workspace::kVersion},
          {"status", failure.is_null() ? "complete" : "failed"},
          {"stages_completed", completed},
          {"failure", failure},
          {"parameters", to_json(cfg)},
          {"seed", cfg.seed ? json(*cfg.seed) : json(nullptr)},
          {"synth_seed", cfg.synth_seed ? json(*cfg.synth_seed) : json(nullptr)},
          {"inputs", inputs},
          {"stages", stages},
          {"warnings", warnings},
          {"outputs", outputs}};
}

void render_report(const RunConfig& cfg, Workspace& ws, const StageKeys& keys) {
  std::vector<std::string> completed;
  for (auto s : kStages) {
    ws.require(std::string(stage_name(s)), keys[s]);
    completed.emplace_back(stage_name(s));
  }
  for (const auto& t : kTables) export_table(ws, t, cfg.out);
  write_blockgroups_out(ws, cfg.out);
  write_file(cfg.out / kParcelsSelected, read_file(ws.file(kParcelsSelected)));
  write_file(cfg.out / kManifest, build_manifest(cfg, ws, keys, completed, nullptr).dump(2) + "\n");
}

void run_pipeline(const RunConfig& cfg) {
  Workspace ws(cfg.out);
  for (const auto& f : bundle_files()) std::filesystem::remove(cfg.out / f);
  const auto keys = stage_keys(cfg);
  std::vector<std::string> completed;
  std::string current = "config";
  try {
    validate(cfg);
    for (auto s : kStages) {
      current = stage_name(s);
      run_stage(s, cfg, ws, keys);
      completed.push_back(current);
    }
    current = "report";
    render_report(cfg, ws, keys);
  } catch (const Error& e) {
    const json failure = {{"stage", current}, {"kind", kind_name(e.kind())}, {"message", e.what()}};
    write_file(cfg.out / kManifest, build_manifest(cfg, ws, keys, completed, failure).dump(2) + "\n");
    throw;
  } catch (const json::exception& e) {
    const json failure = {{"stage", current}, {"kind", "data"}, {"message", e.what()}};
    write_file(cfg.out / kManifest, build_manifest(cfg, ws, keys, completed, failure).dump(2) + "\n");
    throw DataError(e.what());
  }
}

}  // namespace acq::pipeline

#include "acq/pipeline/stages.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include "acq/error.hpp"
#include "acq/esda/gstar.hpp"
#include "acq/esda/moran.hpp"
#include "acq/esda/pca.hpp"
#include "acq/esda/profile.hpp"
#include "acq/esda/spearman.hpp"
#include "acq/geo/geometry_io.hpp"
#include "acq/parcels/parcel.hpp"
#include "acq/parcels/proximity.hpp"
#include "acq/parcels/selection.hpp"
#include "acq/slm/lag_model.hpp"
#include "acq/weights/contiguity.hpp"

namespace acq::pipeline {

using ingest::CrimeType;
using ingest::kCrimeTypes;
using ingest::kWindows;
using ingest::Window;
using nlohmann::json;

namespace {

constexpr const char* kRates = "rates.csv";
constexpr const char* kCrimes = "crimes.csv";
constexpr const char* kBlockGroups = "blockgroups.geojson";
constexpr const char* kDeprivation = "deprivation.csv";
constexpr const char* kQmiParc = "qmiparc.csv";
constexpr const char* kWeights = "weights.txt";
constexpr const char* kIslands = "islands.csv";
constexpr const char* kGStar = "gstar.csv";

std::size_t idx(Stage s) { return static_cast<std::size_t>(s); }

struct Context {
  const RunConfig& cfg;
  Workspace& ws;
  const StageKeys& keys;
  std::vector<std::string> warnings;
  json summary = json::object();
};

// ---- cache readers ----

std::vector<ingest::BlockGroup> cached_blockgroups(const Workspace& ws, geo::LinearUnits units) {
  return ingest::load_blockgroups(json::parse(read_file(ws.file(kBlockGroups))), {}, units).blockgroups;
}

std::vector<ingest::CrimeRecord> cached_crimes(const Workspace& ws) {
  std::ifstream in(ws.file(kCrimes), std::ios::binary);
  auto parsed = ingest::parse_crimes(in);
  if (!parsed.rejected.empty()) throw StaleCacheError("cached crimes.csv has malformed rows");
  return std::move(parsed.records);
}

weights::ContiguityWeights cached_weights(const Workspace& ws, const std::vector<std::string>& ids) {
  std::ifstream in(ws.file(kWeights), std::ios::binary);
  return weights::read_sparse(in, ids);
}

/// Per-unit columns from the ingest, parcel and deprivation caches.
struct Units {
  Frame rates;
  std::vector<std::string> ids;
  std::vector<std::optional<double>> deprivation;
  std::vector<std::optional<double>> qmiparc;

  std::vector<std::optional<double>> column(const std::string& name) const {
    if (name == "deprivation") return deprivation;
    if (name == "qmiparc") return qmiparc;
    return rates.numbers(name);
  }
  std::vector<std::optional<double>> rate(CrimeType t, Window w) const {
    return rates.numbers(cell_name(t, w) + "_rate");
  }
};

Units cached_units(const Workspace& ws, bool with_parcels) {
  Units u{Frame::load(ws.file(kRates)), {}, {}, {}};
  u.ids = u.rates.strings("id");
  const auto dep = Frame::load(ws.file(kDeprivation));
  if (dep.strings("id") != u.ids) throw StaleCacheError("deprivation.csv does not match rates.csv");
  u.deprivation = dep.numbers("deprivation");
  if (with_parcels) {
    const auto q = Frame::load(ws.file(kQmiParc));
    if (q.strings("id") != u.ids) throw StaleCacheError("qmiparc.csv does not match rates.csv");
    u.qmiparc = q.numbers("qmiparc");
  }
  return u;
}

std::vector<std::size_t> present(const std::vector<std::optional<double>>& v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i]) out.push_back(i);
  return out;
}

std::vector<double> take(const std::vector<std::optional<double>>& v, const std::vector<std::size_t>& keep) {
  std::vector<double> out;
  out.reserve(keep.size());
  for (auto i : keep) out.push_back(*v[i]);
  return out;
}

std::vector<std::optional<double>> take_opt(const std::vector<std::optional<double>>& v,
                                            const std::vector<std::size_t>& keep) {
  std::vector<std::optional<double>> out;
  out.reserve(keep.size());
  for (auto i : keep) out.push_back(v[i]);
  return out;
}

geo::PolygonGeom load_boundary(const std::filesystem::path& p) {
  json j;
  try {
    j = json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw DataError("boundary " + p.string() + ": " + e.what());
  }
  const auto type = j.value("type", "");
  if (type == "FeatureCollection") {
    std::vector<geo::PolygonPart> parts;
    for (const auto& f : j.at("features")) {
      const auto g = geo::polygon_from_geojson(f.at("geometry"));
      parts.insert(parts.end(), g.parts().begin(), g.parts().end());
    }
    if (parts.empty()) throw DataError("boundary " + p.string() + " has no features");
    return geo::PolygonGeom(std::move(parts));
  }
  if (type == "Feature") return geo::polygon_from_geojson(j.at("geometry"));
  return geo::polygon_from_geojson(j);
}

json issues_json(const std::vector<ingest::RowIssue>& issues) {
  json out = json::array();
  for (const auto& r : issues) out.push_back({{"line", r.line}, {"reason", r.reason}});
  return out;
}

void save(Context& ctx, const std::string& name, const Frame& f) { f.save(ctx.ws.file(name)); }

// ---- stages ----

void run_ingest(Context& ctx) {
  const auto& cfg = ctx.cfg;
  require_input(cfg.crimes, "crimes");
  require_input(cfg.blockgroups, "blockgroups");
  require_input(cfg.licenses, "licenses");
  const auto units = cfg.units();
  const auto windows = cfg.windows();
  const auto cbd = cfg.cbd();

  ingest::CrimeParse crimes;
  {
    std::ifstream in(cfg.crimes, std::ios::binary);
    crimes = ingest::parse_crimes(in);
  }
  auto& recs = crimes.records;
  auto order = [](const ingest::CrimeRecord& r) {
    return std::make_tuple(ingest::index_of(r.type), r.timestamp.year, r.timestamp.month, r.timestamp.day,
                           r.timestamp.time.seconds(), r.location.x, r.location.y);
  };
  std::sort(recs.begin(), recs.end(), [&](const auto& a, const auto& b) { return order(a) < order(b); });

  json bg_json;
  try {
    bg_json = json::parse(read_file(cfg.blockgroups));
  } catch (const json::exception& e) {
    throw DataError("blockgroups " + cfg.blockgroups.string() + ": " + e.what());
  }
  auto bgs = ingest::load_blockgroups(bg_json, {}, units);

  ingest::LicenseParse lic;
  {
    std::ifstream in(cfg.licenses, std::ios::binary);
    lic = ingest::parse_licenses(in);
  }
  std::sort(lic.points.begin(), lic.points.end(),
            [](geo::Point a, geo::Point b) { return std::tie(a.x, a.y) < std::tie(b.x, b.y); });

  const auto rates = ingest::assign_and_rate(recs, bgs.blockgroups, lic.points, cbd, {windows, units});
  const auto dep = esda::deprivation_pca(esda::deprivation_indicators(bgs.blockgroups));

  {
    std::ostringstream out;
    out << "type,datetime,x,y\n";
    for (const auto& r : recs)
      out << ingest::short_code(r.type) << ',' << r.timestamp.to_string() << ',' << cell(r.location.x) << ','
          << cell(r.location.y) << '\n';
    write_file(ctx.ws.file(kCrimes), out.str());
  }
  write_file(ctx.ws.file(kBlockGroups), ingest::blockgroups_to_geojson(bgs.blockgroups).dump() + "\n");

  std::vector<std::string> cols{"id",      "excluded", "pop",           "percrent", "percwhite", "percvac",
                                "popdens", "medy",     "license_count", "liqdens",  "lnmedy",    "lndistcbd"};
  for (auto t : kCrimeTypes)
    for (auto w : kWindows) {
      cols.push_back(cell_name(t, w) + "_count");
      cols.push_back(cell_name(t, w) + "_rate");
    }
  Frame rf(cols);
  for (std::size_t i = 0; i < bgs.blockgroups.size(); ++i) {
    const auto& bg = bgs.blockgroups[i];
    std::vector<std::string> row{bg.id,           rates.excluded[i] ? "1" : "0", cell(bg.pop),
                                 cell(bg.percrent), cell(bg.percwhite),        cell(bg.percvac),
                                 cell(bg.popdens),  cell(bg.medy),             cell(rates.license_count[i]),
                                 cell(rates.liqdens[i]), cell(rates.lnmedy[i]), cell(rates.lndistcbd[i])};
    for (auto t : kCrimeTypes)
      for (auto w : kWindows) {
        row.push_back(cell(rates.count(t, w)[i]));
        row.push_back(cell(rates.rate(t, w)[i]));
      }
    rf.add(std::move(row));
  }
  save(ctx, kRates, rf);

  Frame df({"id", "deprivation"});
  for (std::size_t i = 0; i < bgs.blockgroups.size(); ++i) df.add({bgs.blockgroups[i].id, cell(dep.score[i])});
  save(ctx, kDeprivation, df);

  const auto tally = ingest::tally_windows(recs, windows);
  Frame t1({"type", "metric", "value"});
  for (auto t : kCrimeTypes) {
    const auto& c = tally[ingest::index_of(t)];
    const std::string type(ingest::to_string(t));
    t1.add({type, "all", cell(c.all)});
    t1.add({type, "day", cell(c.day)});
    t1.add({type, "night", cell(c.night)});
    t1.add({type, "night_share", cell(c.night_share)});
  }
  save(ctx, "table1_counts.csv", t1);

  Frame f2({"type", "hour", "metric", "value"});
  for (auto t : kCrimeTypes) {
    const std::string type(ingest::to_string(t));
    const auto bins = ingest::hourly_histogram(recs, t);
    for (int h = 0; h < 24; ++h) f2.add({type, cell(h), "count", cell(bins[static_cast<std::size_t>(h)])});
    std::vector<ingest::CrimeRecord> of_type;
    for (const auto& r : recs)
      if (r.type == t) of_type.push_back(r);
    std::optional<double> median;
    if (!of_type.empty()) median = ingest::median_report_time(of_type).seconds();
    f2.add({type, "", "median_time", cell(median)});
  }
  save(ctx, "fig2_histograms.csv", f2);

  if (!crimes.rejected.empty())
    ctx.warnings.push_back("crimes: " + std::to_string(crimes.rejected.size()) + " rows rejected");
  if (!lic.rejected.empty())
    ctx.warnings.push_back("licenses: " + std::to_string(lic.rejected.size()) + " rows rejected");
  for (const auto& w : bgs.warnings) ctx.warnings.push_back("blockgroups: " + w);
  for (const auto& w : rates.warnings) ctx.warnings.push_back("rates: " + w);
  for (const auto& w : dep.warnings) ctx.warnings.push_back("deprivation: " + w);

  json unassigned = json::object();
  for (auto t : kCrimeTypes) unassigned[std::string(ingest::to_string(t))] = rates.unassigned[ingest::index_of(t)];
  std::size_t excluded = 0;
  for (bool e : rates.excluded) excluded += e;
  ctx.summary = {{"crimes_parsed", recs.size()},
                 {"crimes_rejected", issues_json(crimes.rejected)},
                 {"licenses_parsed", lic.points.size()},
                 {"licenses_rejected", issues_json(lic.rejected)},
                 {"blockgroups", bgs.blockgroups.size()},
                 {"blockgroups_excluded", excluded},
                 {"crimes_unassigned", unassigned},
                 {"licenses_unassigned", rates.unassigned_licenses},
                 {"deprivation",
                  {{"indicators", dep.indicators},
                   {"loadings", dep.loadings},
                   {"eigenvalue", dep.eigenvalue},
                   {"explained_share", dep.explained_share},
                   {"fitted_units", dep.fitted_units}}}};
}

void run_parcels(Context& ctx) {
  const auto& cfg = ctx.cfg;
  require_input(cfg.parcels, "parcels");
  if (!cfg.boundary.empty()) require_input(cfg.boundary, "boundary");
  const auto units = cfg.units();
  const auto windows = cfg.windows();

  const auto loaded = parcels::load_parcels(cfg.parcels);
  const auto sel = parcels::select_multiunit(loaded.parcels, cfg.rules, units);
  const auto selected = parcels::selected_parcels(loaded.parcels, sel);
  const auto bgs = cached_blockgroups(ctx.ws, units);
  std::vector<geo::Point> centroids;
  for (const auto& bg : bgs) centroids.push_back(bg.centroid);
  const double radius = units.from_miles(cfg.radius_miles);
  const auto qmi = parcels::qmi_parc(centroids, selected, radius);

  write_file(ctx.ws.file("parcels_selected.geojson"), parcels::parcels_to_geojson(selected).dump() + "\n");
  Frame qf({"id", "qmiparc"});
  for (std::size_t i = 0; i < bgs.size(); ++i) qf.add({bgs[i].id, cell(qmi[i])});
  save(ctx, kQmiParc, qf);

  Frame t2({"type", "window", "metric", "value"});
  t2.add({"city", "All", "parcels", cell(loaded.parcels.size())});
  t2.add({"city", "All", "selected_parcels", cell(sel.selected.size())});
  t2.add({"city", "All", "selected_by_size", cell(sel.by_size)});
  t2.add({"city", "All", "selected_by_cluster", cell(sel.by_cluster)});
  std::optional<double> coverage;
  if (!cfg.boundary.empty())
    coverage = parcels::coverage_fraction(load_boundary(cfg.boundary), selected, radius,
                                          units.from_feet(cfg.coverage_step_ft));
  else
    ctx.warnings.push_back("parcels: no boundary given; coverage not computed");
  t2.add({"city", "All", "coverage_fraction", cell(coverage)});
  if (selected.empty()) {
    ctx.warnings.push_back("parcels: no parcels selected; crime distances not computed");
  } else {
    const auto crimes = cached_crimes(ctx.ws);
    const auto dist = parcels::crime_parcel_distances(crimes, selected, windows, units, cfg.radius_miles);
    for (const auto& s : dist.summaries) {
      const std::string type(ingest::to_string(s.type)), win(ingest::to_string(s.window));
      t2.add({type, win, "crimes", cell(s.crimes)});
      t2.add({type, win, "within", cell(s.within)});
      t2.add({type, win, "share_within", cell(s.share_within)});
      t2.add({type, win, "median_miles", cell(s.median_miles)});
    }
  }
  save(ctx, "table2_distances.csv", t2);

  const auto hist = parcels::parcel_histograms(selected, cfg.cbd(), units);
  Frame f3({"histogram", "bin_lo", "bin_hi", "metric", "value"});
  auto add_hist = [&](const char* name, const parcels::Histogram& h) {
    for (std::size_t i = 0; i < h.counts.size(); ++i)
      f3.add({name, cell(static_cast<double>(i) * h.bin_width), cell(static_cast<double>(i + 1) * h.bin_width), "count",
              cell(h.counts[i])});
  };
  add_hist("distance_miles", hist.distance_miles);
  add_hist("units", hist.units);
  save(ctx, "fig3_parcel_histograms.csv", f3);

  if (!loaded.rejected.empty())
    ctx.warnings.push_back("parcels: " + std::to_string(loaded.rejected.size()) + " features rejected");
  json clusters = json::array();
  for (const auto& c : sel.clusters)
    clusters.push_back({{"members", c.members}, {"total_units", c.total_units}, {"qualifies", c.qualifies}});
  ctx.summary = {{"parcels", loaded.parcels.size()},
                 {"parcels_rejected", issues_json(loaded.rejected)},
                 {"selected", sel.selected.size()},
                 {"clusters", clusters}};
}

void run_weights(Context& ctx) {
  const auto bgs = cached_blockgroups(ctx.ws, ctx.cfg.units());
  const auto w = weights::build_queen(bgs);
  {
    std::ostringstream out;
    weights::write_sparse(out, w);
    write_file(ctx.ws.file(kWeights), out.str());
  }
  Frame islands({"id"});
  for (auto i : w.islands()) islands.add({w.ids()[i]});
  save(ctx, kIslands, islands);
  if (islands.size() > 0)
    ctx.warnings.push_back("weights: " + std::to_string(islands.size()) + " block groups have no neighbors");
  json range = nullptr;
  if (islands.size() == 0) {
    const auto r = weights::eigen_range(w);
    range = {{"min", r.min}, {"max", r.max}};
  }
  ctx.summary = {{"units", w.n()}, {"links", w.nnz()}, {"islands", islands.size()}, {"eigen_range", range}};
}

Frame moran_frame(const RunConfig& cfg, const Workspace& ws, std::optional<CrimeType> only_type,
                  std::optional<Window> only_window, bool wide) {
  const auto u = cached_units(ws, false);
  const auto w = cached_weights(ws, u.ids);
  Frame f = wide ? Frame({"type", "window", "n", "I", "expected", "p_perm", "permutations", "seed", "note"})
                 : Frame({"type", "window", "metric", "value", "note"});
  for (auto t : kCrimeTypes)
    for (auto win : kWindows) {
      if ((only_type && *only_type != t) || (only_window && *only_window != win)) continue;
      const std::string type(ingest::to_string(t)), wname(ingest::to_string(win));
      const auto rate = u.rate(t, win);
      const auto keep = present(rate);
      std::optional<double> I, expected, p;
      std::string note;
      try {
        const auto x = take(rate, keep);
        const auto wr = weights::row_standardize(weights::subset(w, keep));
        if (cfg.permutations > 0) {
          const auto m = esda::morans_permutation(x, wr, cfg.permutations, *cfg.seed);
          I = m.I;
          expected = m.expected;
          p = m.p_perm;
        } else {
          I = esda::morans_i(x, wr);
          expected = -1.0 / (static_cast<double>(x.size()) - 1.0);
        }
      } catch (const Error& e) {
        note = e.what();
      }
      const std::string seed = cfg.permutations > 0 ? std::to_string(*cfg.seed) : "";
      if (wide) {
        f.add({type, wname, cell(keep.size()), cell(I), cell(expected), cell(p), cell(cfg.permutations), seed, note});
      } else {
        f.add({type, wname, "I", cell(I), note});
        f.add({type, wname, "expected", cell(expected), ""});
        f.add({type, wname, "p_perm", cell(p), ""});
        f.add({type, wname, "permutations", cell(cfg.permutations), ""});
        f.add({type, wname, "n", cell(keep.size()), ""});
      }
    }
  return f;
}

void run_moran(Context& ctx) {
  const auto f = moran_frame(ctx.cfg, ctx.ws, std::nullopt, std::nullopt, false);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!f.at(i, "note").empty())
      ctx.warnings.push_back("moran " + f.at(i, "type") + " " + f.at(i, "window") + ": " + f.at(i, "note"));
  save(ctx, "table3_moran.csv", f);
  ctx.summary = {{"permutations", ctx.cfg.permutations}, {"seed", ctx.cfg.seed ? json(*ctx.cfg.seed) : json(nullptr)}};
}

const std::vector<std::pair<std::string, std::string>> kProfileVars{
    {"DEPRIVATION", "deprivation"}, {"QMIPARC", "qmiparc"},   {"LIQDENS", "liqdens"},
    {"PERCWHITE", "percwhite"},     {"PERCRENT", "percrent"}, {"MEDY", "medy"}};

void run_hotspots(Context& ctx) {
  const auto u = cached_units(ctx.ws, true);
  const auto w = cached_weights(ctx.ws, u.ids);
  std::vector<std::string> cols{"id"};
  for (auto t : kCrimeTypes)
    for (auto win : kWindows) {
      cols.push_back(cell_name(t, win) + "_z");
      cols.push_back(cell_name(t, win) + "_class");
    }
  std::vector<std::vector<std::string>> grid(u.ids.size(), std::vector<std::string>(cols.size()));
  for (std::size_t i = 0; i < u.ids.size(); ++i) grid[i][0] = u.ids[i];

  Frame t5({"type", "window", "class", "variable", "metric", "value"});
  std::size_t col = 1;
  for (auto t : kCrimeTypes)
    for (auto win : kWindows) {
      const std::string type(ingest::to_string(t)), wname(ingest::to_string(win));
      const auto rate = u.rate(t, win);
      const auto keep = present(rate);
      try {
        const auto g = esda::getis_ord_gstar(take(rate, keep), weights::with_self(weights::subset(w, keep)),
                                             ctx.cfg.gstar_z);
        for (std::size_t k = 0; k < keep.size(); ++k) {
          grid[keep[k]][col] = std::isfinite(g.z[k]) ? cell(g.z[k]) : "";
          grid[keep[k]][col + 1] = esda::to_string(g.cls[k]);
        }
        for (const auto& warn : g.warnings) ctx.warnings.push_back("hotspots " + cell_name(t, win) + ": " + warn);
        std::vector<esda::NamedColumn> vars;
        for (const auto& [label, source] : kProfileVars) vars.push_back({label, take_opt(u.column(source), keep)});
        for (auto cls : {esda::HotspotClass::Hot, esda::HotspotClass::Cold}) {
          const auto prof = esda::hotspot_profile(g, vars, cls);
          const std::string cname = esda::to_string(cls);
          t5.add({type, wname, cname, "", "units", cell(prof.units)});
          for (const auto& v : prof.variables) {
            t5.add({type, wname, cname, v.name, "n", cell(v.n)});
            t5.add({type, wname, cname, v.name, "mean", cell(v.mean)});
            t5.add({type, wname, cname, v.name, "sd", cell(v.sd)});
          }
        }
      } catch (const Error& e) {
        ctx.warnings.push_back("hotspots " + cell_name(t, win) + ": " + e.what());
      }
      col += 2;
    }
  Frame gz(cols);
  for (auto& row : grid) gz.add(std::move(row));
  save(ctx, kGStar, gz);
  save(ctx, "table5_hotspot_profiles.csv", t5);
  ctx.summary = {{"threshold", ctx.cfg.gstar_z}};
}

void run_correlate(Context& ctx) {
  const auto u = cached_units(ctx.ws, true);
  const auto excluded = u.rates.strings("excluded");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < excluded.size(); ++i)
    if (excluded[i] != "1") keep.push_back(i);

  std::vector<esda::NamedColumn> summary_vars;
  for (auto t : kCrimeTypes)
    for (auto win : kWindows) summary_vars.push_back({cell_name(t, win), take_opt(u.rate(t, win), keep)});
  for (const auto& [label, source] :
       std::vector<std::pair<std::string, std::string>>{{"LIQDENS", "liqdens"},   {"PERCRENT", "percrent"},
                                                        {"POP", "pop"},           {"PERCWHITE", "percwhite"},
                                                        {"PERCVAC", "percvac"},   {"POPDENS", "popdens"},
                                                        {"MEDY", "medy"},         {"DEPRIVATION", "deprivation"},
                                                        {"QMIPARC", "qmiparc"}})
    summary_vars.push_back({label, take_opt(u.column(source), keep)});
  Frame t4({"variable", "metric", "value"});
  for (const auto& s : esda::summarize(summary_vars)) {
    t4.add({s.name, "n", cell(s.n)});
    t4.add({s.name, "mean", cell(s.mean)});
    t4.add({s.name, "sd", cell(s.sd)});
    t4.add({s.name, "min", cell(s.min)});
    t4.add({s.name, "max", cell(s.max)});
  }
  save(ctx, "table4_summary.csv", t4);

  std::vector<esda::NamedColumn> all, night, covs;
  for (auto t : kCrimeTypes) {
    const std::string code(ingest::short_code(t));
    all.push_back({code, take_opt(u.rate(t, Window::All), keep)});
    night.push_back({code, take_opt(u.rate(t, Window::Night), keep)});
  }
  for (const auto& [label, source] : std::vector<std::pair<std::string, std::string>>{{"LIQDENS", "liqdens"},
                                                                                      {"PERCRENT", "percrent"},
                                                                                      {"PERCWHITE", "percwhite"},
                                                                                      {"PERCVAC", "percvac"},
                                                                                      {"POPDENS", "popdens"},
                                                                                      {"LNMEDY", "lnmedy"},
                                                                                      {"DEPRIVATION", "deprivation"},
                                                                                      {"QMIPARC", "qmiparc"},
                                                                                      {"LNDISTCBD", "lndistcbd"}})
    covs.push_back({label, take_opt(u.column(source), keep)});
  const auto tables = esda::correlation_tables(all, night, covs);

  Frame t6({"row", "column", "metric", "value"});
  const auto& names = tables.all.names;
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      t6.add({names[i], names[j], "rho", cell(tables.all.r[i][j])});
      t6.add({names[i], names[j], "pairs", cell(tables.all.pairs[i][j])});
    }
  save(ctx, "table6_correlations.csv", t6);

  Frame t7({"row", "column", "metric", "value"});
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = 0; j <= i && j < all.size(); ++j) {
      t7.add({names[i], names[j], "night", cell(tables.night.r[i][j])});
      t7.add({names[i], names[j], "diff", cell(tables.diff.r[i][j])});
      t7.add({names[i], names[j], "pairs", cell(tables.night.pairs[i][j])});
    }
  save(ctx, "table7_night_diffs.csv", t7);
  ctx.summary = {{"units", keep.size()}};
}

void run_regress(Context& ctx) {
  const auto u = cached_units(ctx.ws, true);
  const auto w = cached_weights(ctx.ws, u.ids);
  std::vector<slm::ResponseColumn> responses;
  for (auto t : kCrimeTypes)
    for (auto win : kWindows) responses.push_back({t, win, u.rate(t, win)});
  std::vector<esda::NamedColumn> covs;
  for (const auto& name : slm::kRegressors) covs.push_back({name, u.column(name)});
  const auto table = slm::fit_all(responses, covs, w, ctx.cfg.drop_islands);

  Frame t8({"type", "window", "term", "metric", "value", "note"});
  for (const auto& c : table.cells) {
    const std::string type(ingest::to_string(c.type)), wname(ingest::to_string(c.window));
    if (!c.fit) {
      t8.add({type, wname, "model", "error", "", c.error});
      ctx.warnings.push_back("regress " + cell_name(c.type, c.window) + ": " + c.error);
      continue;
    }
    const auto& fit = *c.fit;
    auto add_estimate = [&](const slm::Estimate& e) {
      t8.add({type, wname, e.term, "estimate", cell(e.value), ""});
      t8.add({type, wname, e.term, "se", cell(e.se), ""});
      t8.add({type, wname, e.term, "z", cell(e.z), ""});
      t8.add({type, wname, e.term, "p", cell(e.p), ""});
    };
    add_estimate(fit.rho);
    for (const auto& b : fit.beta) add_estimate(b);
    std::string note;
    for (const auto& warn : fit.warnings) note += (note.empty() ? "" : "; ") + warn;
    t8.add({type, wname, "model", "n", cell(fit.n), note});
    t8.add({type, wname, "model", "k", cell(fit.k), ""});
    t8.add({type, wname, "model", "sigma2", cell(fit.sigma2), ""});
    t8.add({type, wname, "model", "loglik", cell(fit.loglik), ""});
    t8.add({type, wname, "model", "pseudo_r2", cell(fit.pseudo_r2), ""});
    t8.add({type, wname, "model", "aic", cell(fit.aic), ""});
    for (const auto& warn : fit.warnings) ctx.warnings.push_back("regress " + cell_name(c.type, c.window) + ": " + warn);
  }
  save(ctx, "table8_regressions.csv", t8);
  if (!table.dropped_islands.empty())
    ctx.warnings.push_back("regress: dropped " + std::to_string(table.dropped_islands.size()) + " island block groups");
  ctx.summary = {{"units", table.ids.size()},
                 {"incomplete", table.incomplete},
                 {"dropped_islands", table.dropped_islands}};
}

}  // namespace

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::Ingest: return "ingest";
    case Stage::Parcels: return "select-parcels";
    case Stage::Weights: return "weights";
    case Stage::Moran: return "moran";
    case Stage::Hotspots: return "hotspots";
    case Stage::Correlate: return "correlate";
    case Stage::Regress: return "regress";
  }
  return "?";
}

std::vector<Stage> upstream(Stage s) {
  switch (s) {
    case Stage::Ingest: return {};
    case Stage::Parcels: return {Stage::Ingest};
    case Stage::Weights: return {Stage::Ingest};
    case Stage::Moran: return {Stage::Ingest, Stage::Weights};
    case Stage::Hotspots: return {Stage::Ingest, Stage::Parcels, Stage::Weights};
    case Stage::Correlate: return {Stage::Ingest, Stage::Parcels};
    case Stage::Regress: return {Stage::Ingest, Stage::Parcels, Stage::Weights};
  }
  return {};
}

std::vector<std::string> stage_files(Stage s) {
  switch (s) {
    case Stage::Ingest:
      return {kCrimes, kBlockGroups, kRates, kDeprivation, "table1_counts.csv", "fig2_histograms.csv"};
    case Stage::Parcels:
      return {"parcels_selected.geojson", kQmiParc, "table2_distances.csv", "fig3_parcel_histograms.csv"};
    case Stage::Weights: return {kWeights, kIslands};
    case Stage::Moran: return {"table3_moran.csv"};
    case Stage::Hotspots: return {kGStar, "table5_hotspot_profiles.csv"};
    case Stage::Correlate: return {"table4_summary.csv", "table6_correlations.csv", "table7_night_diffs.csv"};
    case Stage::Regress: return {"table8_regressions.csv"};
  }
  return {};
}

std::string cell_name(CrimeType t, Window w) {
  return std::string(ingest::short_code(t)) + "_" + std::string(ingest::to_string(w));
}

StageKeys stage_keys(const RunConfig& cfg) {
  StageKeys keys;
  for (const auto& [name, path] : std::vector<std::pair<std::string, std::filesystem::path>>{
           {"crimes", cfg.crimes},
           {"blockgroups", cfg.blockgroups},
           {"parcels", cfg.parcels},
           {"licenses", cfg.licenses},
           {"boundary", cfg.boundary}}) {
    InputHash h{path.generic_string(), std::nullopt};
    if (!path.empty()) {
      try {
        h.sha256 = sha256_file(path);
      } catch (const ConfigError&) {
      }
    }
    keys.inputs[name] = h;
  }
  auto in = [&](const std::string& name) {
    const auto& h = keys.inputs[name].sha256;
    return h ? json(*h) : json(nullptr);
  };
  const auto p = to_json(cfg);
  auto set = [&](Stage s, json j) {
    j["stage"] = stage_name(s);
    j["version"] = Workspace::kVersion;
    keys.key[idx(s)] = sha256_hex(j.dump());
  };
  auto key = [&](Stage s) { return keys.key[idx(s)]; };
  set(Stage::Ingest, {{"crimes", in("crimes")},
                      {"blockgroups", in("blockgroups")},
                      {"licenses", in("licenses")},
                      {"cbd", p["cbd"]},
                      {"feet_per_unit", p["feet_per_unit"]},
                      {"night_windows", p["night_windows"]}});
  set(Stage::Parcels, {{"ingest", key(Stage::Ingest)},
                       {"parcels", in("parcels")},
                       {"boundary", in("boundary")},
                       {"landuse_codes", p["landuse_codes"]},
                       {"unit_threshold", p["unit_threshold"]},
                       {"cluster_min_units", p["cluster_min_units"]},
                       {"cluster_gap_ft", p["cluster_gap_ft"]},
                       {"radius_miles", p["radius_miles"]},
                       {"coverage_step_ft", p["coverage_step_ft"]}});
  set(Stage::Weights, {{"ingest", key(Stage::Ingest)}});
  set(Stage::Moran, {{"ingest", key(Stage::Ingest)},
                     {"weights", key(Stage::Weights)},
                     {"permutations", p["permutations"]},
                     {"seed", p["seed"]}});
  set(Stage::Hotspots, {{"ingest", key(Stage::Ingest)},
                        {"parcels", key(Stage::Parcels)},
                        {"weights", key(Stage::Weights)},
                        {"gstar_z", p["gstar_z"]}});
  set(Stage::Correlate, {{"ingest", key(Stage::Ingest)}, {"parcels", key(Stage::Parcels)}});
  set(Stage::Regress, {{"ingest", key(Stage::Ingest)},
                       {"parcels", key(Stage::Parcels)},
                       {"weights", key(Stage::Weights)},
                       {"drop_islands", p["drop_islands"]}});
  return keys;
}

std::vector<std::string> run_stage(Stage s, const RunConfig& cfg, Workspace& ws, const StageKeys& keys) {
  validate(cfg);
  for (auto up : upstream(s)) ws.require(std::string(stage_name(up)), keys[up]);
  const std::string name(stage_name(s));
  ws.invalidate(name);
  Context ctx{cfg, ws, keys, {}};
  switch (s) {
    case Stage::Ingest: run_ingest(ctx); break;
    case Stage::Parcels: run_parcels(ctx); break;
    case Stage::Weights: run_weights(ctx); break;
    case Stage::Moran: run_moran(ctx); break;
    case Stage::Hotspots: run_hotspots(ctx); break;
    case Stage::Correlate: run_correlate(ctx); break;
    case Stage::Regress: run_regress(ctx); break;
  }
  ctx.summary["warnings"] = ctx.warnings;
  ws.record(name, keys[s], stage_files(s), ctx.summary);
  return ctx.warnings;
}

Frame moran_cells(const RunConfig& cfg, const Workspace& ws, const StageKeys& keys,
                  std::optional<CrimeType> type, std::optional<Window> window) {
  validate(cfg);
  for (auto up : upstream(Stage::Moran)) ws.require(std::string(stage_name(up)), keys[up]);
  return moran_frame(cfg, ws, type, window, true);
}

}  // namespace acq::pipeline

// Desk-scale acceptance suite. One PASS/FAIL line per criterion; exits
// nonzero when any of criteria 1-11 fails. Criterion 12 runs only when
// ACQ_REFERENCE_DIR names a directory holding config.json for the real
// extracts, and never fails the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "acq/error.hpp"
#include "acq/esda/gstar.hpp"
#include "acq/esda/moran.hpp"
#include "acq/esda/pca.hpp"
#include "acq/esda/spearman.hpp"
#include "acq/ingest/crime.hpp"
#include "acq/parcels/proximity.hpp"
#include "acq/parcels/selection.hpp"
#include "acq/pipeline/config.hpp"
#include "acq/pipeline/frame.hpp"
#include "acq/pipeline/report.hpp"
#include "acq/pipeline/workspace.hpp"
#include "acq/slm/lag_model.hpp"
#include "acq/synth/city.hpp"
#include "acq/weights/contiguity.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace acq;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<weights::ContiguityWeights> random_maps(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size(4, 60);
  std::vector<weights::ContiguityWeights> maps;
  for (std::size_t k = 0; k < count; ++k) {
    const auto n = size(rng);
    const auto extra = std::uniform_int_distribution<std::size_t>(0, 2 * n)(rng);
    maps.push_back(testing::random_connected(rng, n, extra));
  }
  return maps;
}

Outcome moran_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (const auto& b : random_maps(1, 100)) {
    const auto x = testing::normal_draws(rng, b.n());
    for (const auto& w : {b, weights::row_standardize(b)})
      worst = std::max(worst, std::abs(esda::morans_i(x, w) - testing::moran_double_sum(x, w)));
  }
  const std::vector<double> k4x{1.0, 4.0, 2.0, 8.0};
  const double k4 = esda::morans_i(k4x, testing::complete_graph(4));
  const double k4_err = std::abs(k4 + 1.0 / 3.0);
  const double t = seconds_since(t0);
  return {worst < 1e-10 && k4_err < 1e-15 && t < 5.0,
          fmt("max |I - oracle| %.2e, K4 I = %.17g, %.2f s", worst, k4, t)};
}

Outcome gstar_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  bool nan_mismatch = false;
  for (const auto& b : random_maps(1, 100)) {
    const auto x = testing::normal_draws(rng, b.n());
    const auto w = weights::with_self(b);
    const auto g = esda::getis_ord_gstar(x, w);
    const auto oracle = testing::gstar_direct(x, w);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::isnan(g.z[i]) || std::isnan(oracle[i])) {
        nan_mismatch |= std::isnan(g.z[i]) != std::isnan(oracle[i]);
        continue;
      }
      worst = std::max(worst, std::abs(g.z[i] - oracle[i]));
    }
  }
  std::vector<double> spike(25, 1.0);
  spike[12] = 10.0;
  const auto gs = esda::getis_ord_gstar(spike, weights::with_self(testing::queen_lattice(5, 5)));
  const double top = *std::max_element(gs.z.begin(), gs.z.end());
  const bool at_spike = gs.z[12] >= top - 1e-12;
  const double t = seconds_since(t0);
  return {worst < 1e-10 && !nan_mismatch && at_spike && t < 5.0,
          fmt("max |z - oracle| %.2e, spike z %.4f vs max %.4f, %.2f s", worst, gs.z[12], top, t)};
}

Outcome log_det_agreement() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(303);
  double worst = 0.0;
  int maps = 0;
  for (auto [rows, cols] : {std::pair{10, 10}, std::pair{7, 9}, std::pair{4, 5}}) {
    const auto w = testing::queen_lattice(rows, cols);
    const slm::SpatialLagEstimator est(w);
    const Eigen::MatrixXd wr = testing::dense(weights::row_standardize(w));
    const auto [lo, hi] = est.rho_domain();
    for (int k = 0; k < 50; ++k) {
      const double rho = lo + (hi - lo) * (k + 0.5) / 50.0;
      worst = std::max(worst, std::abs(est.log_det(rho) - testing::dense_log_det(wr, rho)));
    }
    ++maps;
  }
  for (int k = 0; k < 5; ++k) {
    const auto n = std::uniform_int_distribution<std::size_t>(20, 100)(rng);
    const auto w = testing::random_connected(rng, n, n);
    const slm::SpatialLagEstimator est(w);
    const Eigen::MatrixXd wr = testing::dense(weights::row_standardize(w));
    const auto [lo, hi] = est.rho_domain();
    for (int j = 0; j < 50; ++j) {
      const double rho = lo + (hi - lo) * (j + 0.5) / 50.0;
      worst = std::max(worst, std::abs(est.log_det(rho) - testing::dense_log_det(wr, rho)));
    }
    ++maps;
  }
  const double t = seconds_since(t0);
  return {worst < 1e-8 && t < 10.0, fmt("%d maps x 50 rho, max diff %.2e, %.2f s", maps, worst, t)};
}

struct Replicate {
  slm::DesignMatrix dm;
  Eigen::VectorXd beta;
};

Replicate lag_replicate(const weights::ContiguityWeights& w, double rho, std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(w.n());
  std::normal_distribution<double> z;
  Replicate r;
  r.beta.resize(4);
  r.beta << 3.0, 1.5, -2.0, 0.5;
  r.dm.response = "y";
  r.dm.ids = w.ids();
  r.dm.terms = {"constant", "x1", "x2", "x3"};
  r.dm.X.resize(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    r.dm.X(i, 0) = 1.0;
    r.dm.X(i, 1) = z(rng);
    r.dm.X(i, 2) = 5.0 + 2.0 * z(rng);
    r.dm.X(i, 3) = 10.0 * z(rng);
  }
  r.dm.y = synth::simulate_lag_response(w, r.dm.X, r.beta, rho, 1.0, rng);
  return r;
}

Outcome parameter_recovery() {
  const auto t0 = Clock::now();
  const auto w = testing::queen_lattice(20, 20);
  const slm::SpatialLagEstimator est(w);
  std::mt19937_64 rng(404);
  const int reps = 50;
  double sum_rho = 0.0, sum_abs0 = 0.0;
  int covered = 0, intervals = 0;
  for (int k = 0; k < reps; ++k) {
    const auto r = lag_replicate(w, 0.4, rng);
    const auto fit = est.fit(r.dm);
    sum_rho += fit.rho.value;
    for (std::size_t j = 0; j < fit.beta.size(); ++j) {
      const auto b = r.beta(static_cast<Eigen::Index>(j));
      covered += fit.beta[j].se && std::abs(fit.beta[j].value - b) <= 1.959963984540054 * *fit.beta[j].se;
      ++intervals;
    }
  }
  for (int k = 0; k < reps; ++k) sum_abs0 += std::abs(est.fit(lag_replicate(w, 0.0, rng).dm).rho.value);
  const double mean_rho = sum_rho / reps;
  const double coverage = static_cast<double>(covered) / intervals;
  const double mean_abs0 = sum_abs0 / reps;
  const double t = seconds_since(t0);
  return {mean_rho >= 0.35 && mean_rho <= 0.45 && coverage >= 0.88 && coverage <= 1.0 && mean_abs0 < 0.05 &&
              t < 120.0,
          fmt("rho 0.4: mean %.4f, beta coverage %.1f%%; rho 0: mean |rho| %.4f; %.2f s", mean_rho,
              100.0 * coverage, mean_abs0, t)};
}

Outcome grid_oracle() {
  const auto w = testing::queen_lattice(20, 20);
  const slm::SpatialLagEstimator est(w);
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> true_rho(-0.3, 0.8);
  const auto [lo, hi] = est.rho_domain();
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const auto r = lag_replicate(w, true_rho(rng), rng);
    const auto c = est.concentrate(r.dm);
    const double rho_hat = est.fit(r.dm).rho.value;
    double best = -INFINITY, best_rho = 0.0;
    for (long g = static_cast<long>(std::ceil(lo * 1e4)); g * 1e-4 < hi; ++g) {
      const double v = est.concentrated_loglik(g * 1e-4, c);
      if (v > best) {
        best = v;
        best_rho = g * 1e-4;
      }
    }
    worst = std::max(worst, std::abs(rho_hat - best_rho));
  }
  return {worst < 2e-4, fmt("10 replicates, max |rho - rho_grid| %.2e", worst)};
}

Outcome spearman_oracle() {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> len(3, 80), coarse(0, 6);
  std::normal_distribution<double> z;
  double worst = 0.0;
  int tested = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto n = static_cast<std::size_t>(len(rng));
    std::vector<double> x(n), y(n);
    const bool ties = k % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = ties ? coarse(rng) : z(rng);
      y[i] = ties ? coarse(rng) + 0.5 * x[i] : z(rng) + 0.3 * x[i];
    }
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
        std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; }))
      continue;
    worst = std::max(worst, std::abs(esda::spearman(x, y) - testing::spearman_brute(x, y)));
    ++tested;
  }
  const double tie = esda::spearman(std::vector<double>{1, 2, 2, 3}, std::vector<double>{1, 3, 2, 4});
  return {worst < 1e-12 && std::abs(tie - 0.9487) < 1e-4 && tested > 900,
          fmt("%d pairs, max diff %.2e, tie fixture %.6f", tested, worst, tie)};
}

ingest::CrimeRecord record_at(ingest::CrimeType t, int h, int m, int s = 0) {
  ingest::CrimeRecord r;
  r.type = t;
  r.timestamp = {2014, 6, 15, ingest::TimeOfDay::from_hms(h, m, s)};
  return r;
}

Outcome daynight() {
  using ingest::CrimeType;
  using ingest::Period;
  const ingest::NightWindows w;
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<int> sec(0, 86399), type(0, 3);
  const int n = 100000;
  int night = 0;
  for (int i = 0; i < n; ++i) {
    const int s = sec(rng);
    const auto t = static_cast<CrimeType>(type(rng));
    night += ingest::classify_daynight(record_at(t, s / 3600, (s / 60) % 60, s % 60), w) == Period::Night;
  }
  const double share = static_cast<double>(night) / n;
  const bool edges = ingest::classify_daynight(record_at(CrimeType::Burglary, 22, 0), w) == Period::Night &&
                     ingest::classify_daynight(record_at(CrimeType::Burglary, 4, 0), w) == Period::Day &&
                     ingest::classify_daynight(record_at(CrimeType::Robbery, 21, 0), w) == Period::Night &&
                     ingest::classify_daynight(record_at(CrimeType::Robbery, 3, 0), w) == Period::Day;
  return {std::abs(share - 0.25) <= 0.01 && edges,
          fmt("night share %.4f at %d records, boundary cases %s", share, n, edges ? "exact" : "wrong")};
}

parcels::Parcel box(std::string id, double x, double y, double side, int code, int units) {
  return parcels::make_parcel(std::move(id), geo::PolygonGeom::rectangle(x, y, x + side, y + side), code, units);
}

Outcome parcel_rules() {
  using parcels::select_multiunit;
  std::vector<parcels::Parcel> single{box("a", 0, 0, 50, 8830, 30)};
  std::vector<parcels::Parcel> near{box("a", 0, 0, 50, 8830, 12), box("b", 70, 0, 50, 8830, 12)};
  std::vector<parcels::Parcel> far{box("a", 0, 0, 50, 8830, 12), box("b", 90, 0, 50, 8830, 12)};
  const bool fixtures = select_multiunit(single).selected.size() == 1 &&
                        select_multiunit(near).selected.size() == 2 && select_multiunit(far).selected.empty();

  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> pos(0, 3000), side(20, 80);
  std::uniform_int_distribution<int> units(0, 60), code(0, 3);
  const int codes[] = {8830, 8899, 8810, 8830};
  int violations = 0;
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<parcels::Parcel> ps;
    for (int i = 0; i < 200; ++i)
      ps.push_back(box("P" + std::to_string(1000 + i), pos(rng), pos(rng), side(rng), codes[code(rng)], units(rng)));
    parcels::SelectionRules rules;
    std::vector<std::size_t> previous;
    for (int threshold : {6, 12, 18, 24, 30, 45, 70, 200}) {
      rules.unit_threshold = threshold;
      const auto sel = select_multiunit(ps, rules).selected;
      if (threshold > 6 && !std::includes(previous.begin(), previous.end(), sel.begin(), sel.end())) ++violations;
      previous = sel;
    }
  }
  return {fixtures && violations == 0,
          fmt("forced fixtures %s, %d monotonicity violations over 25 sets", fixtures ? "exact" : "wrong", violations)};
}

Outcome coverage_disc() {
  const double mile = 5280.0;
  const auto city = geo::PolygonGeom::rectangle(0, 0, 4 * mile, 4 * mile);
  std::vector<parcels::Parcel> one{box("c", 2 * mile - 0.5, 2 * mile - 0.5, 1.0, 8830, 30)};
  const double r = 1320.0;
  const double est = parcels::coverage_fraction(city, one, r, 100.0);
  const double analytic = std::numbers::pi * r * r / (16.0 * mile * mile);
  return {std::abs(est - analytic) <= 0.001, fmt("estimate %.5f, analytic %.5f", est, analytic)};
}

Outcome pca_degenerate() {
  std::mt19937_64 rng(1010);
  std::normal_distribution<double> z;
  std::vector<esda::NamedColumn> cols{{"poverty", {}}, {"snap", {}}};
  for (int i = 0; i < 50; ++i) {
    const double v = 20.0 + 6.0 * z(rng);
    cols[0].values.push_back(v);
    cols[1].values.push_back(3.0 * v - 7.0);
  }
  const auto d = esda::deprivation_pca(cols);
  double mean = 0.0, var = 0.0;
  for (const auto& s : d.score) mean += *s / 50.0;
  for (const auto& s : d.score) var += (*s - mean) * (*s - mean) / 49.0;
  return {std::abs(d.explained_share - 1.0) < 1e-9 && std::abs(mean) < 1e-9 && std::abs(var - d.eigenvalue) < 1e-9,
          fmt("share %.12f, score mean %.2e, variance %.12f vs eigenvalue %.12f", d.explained_share, mean, var,
              d.eigenvalue)};
}

Outcome determinism() {
  const auto t0 = Clock::now();
  const auto dir = fs::temp_directory_path() / "acq_acceptance_determinism";
  fs::remove_all(dir);
  const auto files = synth::write_city(synth::make_city(synth::SynthConfig{}), dir / "city");
  auto a = pipeline::load_config(files.config);
  auto b = a;
  a.out = dir / "a";
  b.out = dir / "b";
  pipeline::run_pipeline(a);
  pipeline::run_pipeline(b);
  int differing = 0, compared = 0;
  for (const auto& f : pipeline::bundle_files()) {
    differing += pipeline::read_file(a.out / f) != pipeline::read_file(b.out / f);
    ++compared;
  }
  fs::remove_all(dir);
  return {differing == 0, fmt("%d files compared, %d differ, %.2f s", compared, differing, seconds_since(t0))};
}

std::optional<double> lookup(const pipeline::Frame& f, const std::map<std::string, std::string>& where) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    bool match = true;
    for (const auto& [col, v] : where) match = match && f.at(i, col) == v;
    if (match) return f.number(i, "value");
  }
  return std::nullopt;
}

Outcome reference(const fs::path& ref) {
  auto cfg = pipeline::load_config(ref / "config.json");
  cfg.out = fs::temp_directory_path() / "acq_acceptance_reference";
  pipeline::run_pipeline(cfg);
  const auto t1 = pipeline::Frame::load(cfg.out / "table1_counts.csv");
  const auto t3 = pipeline::Frame::load(cfg.out / "table3_moran.csv");
  const auto t8 = pipeline::Frame::load(cfg.out / "table8_regressions.csv");

  const char* types[] = {"Burglary", "Robbery", "TheftOfMV", "TheftFromMV"};
  const char* windows[] = {"All", "Day", "Night"};
  const double night_pct[] = {13.48, 34.79, 16.04, 11.71};
  const double moran[4][3] = {{0.390, 0.351, 0.246}, {0.428, 0.410, 0.268}, {0.441, 0.417, 0.292}, {0.308, 0.313, 0.193}};
  const double rho[4][3] = {{0.29, 0.28, 0.09}, {0.30, 0.23, 0.19}, {0.41, 0.39, 0.30}, {0.43, 0.43, 0.32}};

  std::ostringstream out;
  int outside = 0;
  auto compare = [&](const std::string& label, std::optional<double> got, double want, double tol) {
    if (!got || std::abs(*got - want) > tol) {
      ++outside;
      out << "\n    " << label << ": got " << (got ? fmt("%.3f", *got) : "missing") << ", printed "
          << fmt("%.3f", want);
    }
  };
  for (int t = 0; t < 4; ++t) {
    const auto share = lookup(t1, {{"type", types[t]}, {"metric", "night_share"}});
    compare(std::string(types[t]) + " % night", share ? std::optional(*share * 100.0) : std::nullopt, night_pct[t], 0.5);
    for (int w = 0; w < 3; ++w) {
      compare(std::string(types[t]) + " " + windows[w] + " Moran I",
              lookup(t3, {{"type", types[t]}, {"window", windows[w]}, {"metric", "I"}}), moran[t][w], 0.05);
      compare(std::string(types[t]) + " " + windows[w] + " rho",
              lookup(t8, {{"type", types[t]}, {"window", windows[w]}, {"term", "rho"}, {"metric", "estimate"}}),
              rho[t][w], 0.05);
    }
  }
  return {outside == 0, fmt("%d of 28 reference values outside tolerance", outside) + out.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "Moran oracle equivalence", moran_oracle},
      {2, "G* oracle equivalence", gstar_oracle},
      {3, "log-determinant agreement", log_det_agreement},
      {4, "lag model parameter recovery", parameter_recovery},
      {5, "optimizer matches grid search", grid_oracle},
      {6, "Spearman brute-force equivalence", spearman_oracle},
      {7, "day/night classification", daynight},
      {8, "parcel selection rules", parcel_rules},
      {9, "coverage estimator", coverage_disc},
      {10, "PCA on a degenerate pair", pca_degenerate},
      {11, "pipeline determinism", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }

  const char* ref = std::getenv("ACQ_REFERENCE_DIR");
  if (!ref || !*ref) {
    std::printf("SKIP 12 reference reproduction: ACQ_REFERENCE_DIR not set\n");
  } else {
    Outcome o;
    try {
      o = reference(ref);
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s 12 reference reproduction (non-fatal): %s\n", o.pass ? "PASS" : "FAIL", o.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}

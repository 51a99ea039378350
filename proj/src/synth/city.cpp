#include "acq/synth/city.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <Eigen/SparseLU>

#include "acq/error.hpp"
#include "acq/esda/pca.hpp"
#include "acq/geo/geometry_io.hpp"
#include "acq/ingest/csv.hpp"
#include "acq/ingest/rates.hpp"
#include "acq/parcels/proximity.hpp"
#include "acq/parcels/selection.hpp"
#include "acq/slm/lag_model.hpp"

namespace acq::synth {

namespace {

constexpr double kFeetPerQuarterMile = 1320.0;
constexpr double kPairGapFt = 20.0;
constexpr int kSlots = 10;  // parcel slots per cell side

std::string padded(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

double clamp_pct(double v) { return std::clamp(v, 0.0, 100.0); }

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && leap(y) ? 29 : kDays[m - 1];
}

ingest::LocalDateTime random_timestamp(std::mt19937_64& rng, int year, const ingest::TimeWindow& night,
                                       double night_share) {
  ingest::LocalDateTime ts;
  ts.year = year;
  int doy = std::uniform_int_distribution<int>(0, leap(year) ? 365 : 364)(rng);
  ts.month = 1;
  while (doy >= days_in_month(year, ts.month)) doy -= days_in_month(year, ts.month++);
  ts.day = doy + 1;

  constexpr int kDay = 86400;
  const int start = night.start().seconds();
  const int length = (night.end().seconds() - start + kDay) % kDay;
  int s = 0;
  if (std::bernoulli_distribution(night_share)(rng)) {
    s = (start + std::uniform_int_distribution<int>(0, length - 1)(rng)) % kDay;
  } else {
    std::normal_distribution<double> bell(13.0 * 3600, 3.5 * 3600);
    for (;;) {
      const double v = std::round(bell(rng));
      if (v < 0 || v >= kDay) continue;
      s = static_cast<int>(v);
      if (!night.contains(ingest::TimeOfDay::from_hms(s / 3600, (s / 60) % 60, s % 60))) break;
    }
  }
  ts.time = ingest::TimeOfDay::from_hms(s / 3600, (s / 60) % 60, s % 60);
  return ts;
}

geo::Point uniform_in(std::mt19937_64& rng, const geo::Box& b, double inset) {
  std::uniform_real_distribution<double> ux(b.min_x + inset, b.max_x - inset);
  std::uniform_real_distribution<double> uy(b.min_y + inset, b.max_y - inset);
  const double x = ux(rng);
  return {x, uy(rng)};
}

int parcel_units(std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < 0.6) return std::uniform_int_distribution<int>(1, 9)(rng);
  if (u < 0.85) return std::uniform_int_distribution<int>(11, 23)(rng);
  return std::uniform_int_distribution<int>(24, 150)(rng);
}

int landuse_code(std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return u < 0.6 ? 8830 : u < 0.8 ? 8899 : 8810;
}

}  // namespace

void validate(const SynthConfig& cfg) {
  if (cfg.rows < 1 || cfg.cols < 1 || cfg.rows * cfg.cols < 9) throw ConfigError("synth grid needs at least 9 cells");
  if (!(cfg.cell_size >= 500.0)) throw ConfigError("synth cell_size must be at least 500 ft");
  if (!(cfg.rho > -0.9 && cfg.rho < 0.99)) throw ConfigError("synth rho must lie in (-0.9, 0.99)");
  if (!(cfg.noise_sd > 0.0)) throw ConfigError("synth noise_sd must be positive");
  if (cfg.beta.size() != slm::kRegressors.size() + 1)
    throw ConfigError("synth beta needs " + std::to_string(slm::kRegressors.size() + 1) + " coefficients");
  for (double b : cfg.beta)
    if (!std::isfinite(b)) throw ConfigError("synth beta must be finite");
  for (double v : cfg.intensity)
    if (!(v >= 0.0)) throw ConfigError("synth intensity must be non-negative");
  for (double v : cfg.night_share)
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("synth night_share must lie in [0, 1]");
  if (!(cfg.parcel_density >= 0.0) || !(cfg.license_density >= 0.0))
    throw ConfigError("synth densities must be non-negative");
  if (!(cfg.cluster_pair_rate >= 0.0 && cfg.cluster_pair_rate <= 1.0))
    throw ConfigError("synth cluster_pair_rate must lie in [0, 1]");
}

Eigen::VectorXd lag_forward_solve(const weights::ContiguityWeights& w, double rho, const Eigen::VectorXd& rhs) {
  const auto n = static_cast<Eigen::Index>(w.n());
  if (rhs.size() != n) throw DataError("forward solve: right-hand side length does not match weights");
  Eigen::SparseMatrix<double> a(n, n);
  a.setIdentity();
  if (w.nnz() > 0) a -= rho * weights::row_standardize(w).to_sparse();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw NumericalError("forward solve: I - rho W is singular");
  return lu.solve(rhs);
}

Eigen::VectorXd simulate_lag_response(const weights::ContiguityWeights& w, const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& beta, double rho, double noise_sd,
                                      std::mt19937_64& rng, Eigen::VectorXd* eps) {
  std::normal_distribution<double> z(0.0, noise_sd);
  Eigen::VectorXd e(X.rows());
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = z(rng);
  Eigen::VectorXd y = lag_forward_solve(w, rho, X * beta + e);
  if (eps) *eps = e;
  return y;
}

City make_city(const SynthConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> z;
  const auto rows = static_cast<std::size_t>(cfg.rows), cols = static_cast<std::size_t>(cfg.cols);
  const std::size_t n = rows * cols;
  const double s = cfg.cell_size;
  const double ox = 100000.0, oy = 200000.0;

  std::vector<geo::PolygonGeom> cells;
  std::vector<std::string> ids;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double x0 = ox + static_cast<double>(c) * s, y0 = oy + static_cast<double>(r) * s;
      cells.push_back(geo::PolygonGeom::rectangle(x0, y0, x0 + s, y0 + s));
      ids.push_back(padded("BG", ids.size(), 5));
    }
  auto contiguity = weights::build_queen(ids, cells);

  // Latent deprivation: white noise smoothed once over the lattice.
  Eigen::VectorXd latent(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < latent.size(); ++i) latent(i) = z(rng);
  latent += weights::row_standardize(contiguity).to_sparse() * latent;
  latent.array() -= latent.mean();
  latent /= std::sqrt(latent.squaredNorm() / static_cast<double>(n));

  std::vector<ingest::BlockGroup> bgs;
  const double area_sq_mi = s * s / (geo::kFeetPerMile * geo::kFeetPerMile);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = latent(static_cast<Eigen::Index>(i));
    auto bg = ingest::make_blockgroup(ids[i], cells[i], std::round(std::uniform_real_distribution<double>(400, 2400)(rng)));
    bg.poverty = clamp_pct(22 + 10 * d + 3 * z(rng));
    bg.unemployment = clamp_pct(9 + 4 * d + 1.5 * z(rng));
    bg.no_diploma = clamp_pct(16 + 7 * d + 2.5 * z(rng));
    bg.snap = clamp_pct(20 + 9 * d + 3 * z(rng));
    bg.percrent = clamp_pct(50 + 12 * d + 10 * z(rng));
    bg.percwhite = clamp_pct(55 - 25 * d + 10 * z(rng));
    bg.percvac = clamp_pct(9 + 4 * d + 3 * z(rng));
    bg.medy = std::round(42000 * std::exp(-0.35 * d + 0.15 * z(rng)));
    bg.popdens = bg.pop / area_sq_mi;
    bgs.push_back(std::move(bg));
  }

  const geo::Point cbd{ox + s * static_cast<double>(cols) / 2, oy + s * static_cast<double>(rows) / 2};

  std::vector<geo::Point> licenses;
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = cfg.license_density * std::exp(0.3 * latent(static_cast<Eigen::Index>(i)));
    const int k = std::poisson_distribution<int>(mean)(rng);
    for (int j = 0; j < k; ++j) licenses.push_back(uniform_in(rng, cells[i].bounds(), 1.0));
  }

  std::vector<parcels::Parcel> parcel_list;
  const double slot = s / kSlots;
  std::vector<int> slot_order(kSlots * kSlots);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = cells[i].bounds();
    std::iota(slot_order.begin(), slot_order.end(), 0);
    std::shuffle(slot_order.begin(), slot_order.end(), rng);
    std::size_t next = 0;
    auto slot_origin = [&](int k) {
      return geo::Point{b.min_x + (k % kSlots) * slot + 0.1 * slot, b.min_y + (k / kSlots) * slot + 0.1 * slot};
    };
    auto add = [&](double x0, double y0, double w, double h, int code, int units) {
      parcel_list.push_back(parcels::make_parcel(padded("P", parcel_list.size() + 1, 7),
                                                 geo::PolygonGeom::rectangle(x0, y0, x0 + w, y0 + h), code, units));
    };
    if (std::bernoulli_distribution(cfg.cluster_pair_rate)(rng)) {
      const auto o = slot_origin(slot_order[next++]);
      const double side = (0.8 * slot - kPairGapFt) / 2;
      add(o.x, o.y, side, side, 8830, 12);
      add(o.x + side + kPairGapFt, o.y, side, side, 8830, 12);
    }
    const int k = std::min<int>(std::poisson_distribution<int>(cfg.parcel_density)(rng),
                                static_cast<int>(slot_order.size() - next));
    std::uniform_real_distribution<double> side(0.3 * slot, 0.8 * slot);
    for (int j = 0; j < k; ++j) {
      const auto o = slot_origin(slot_order[next++]);
      const double w = side(rng), h = side(rng);
      const int code = landuse_code(rng);
      add(o.x, o.y, w, h, code, parcel_units(rng));
    }
  }

  City city{cfg,
            std::move(bgs),
            std::move(parcel_list),
            {},
            std::move(licenses),
            geo::PolygonGeom::rectangle(ox, oy, ox + s * static_cast<double>(cols), oy + s * static_cast<double>(rows)),
            cbd,
            std::move(contiguity),
            {},
            {},
            {},
            {},
            {}};

  // Covariates through the library, as the pipeline computes them.
  const auto base = ingest::assign_and_rate({}, city.blockgroups, city.licenses, cbd, {cfg.windows, {}});
  const auto selection = parcels::select_multiunit(city.parcels);
  const auto selected = parcels::selected_parcels(city.parcels, selection);
  std::vector<geo::Point> centroids;
  for (const auto& bg : city.blockgroups) centroids.push_back(bg.centroid);
  const auto qmi = parcels::qmi_parc(centroids, selected, kFeetPerQuarterMile);
  const auto dep = esda::deprivation_pca(esda::deprivation_indicators(city.blockgroups));

  for (const auto& name : slm::kRegressors) {
    esda::NamedColumn col{name, {}};
    for (std::size_t i = 0; i < n; ++i) {
      const auto& bg = city.blockgroups[i];
      std::optional<double> v;
      if (name == "liqdens") v = base.liqdens[i];
      else if (name == "percrent") v = bg.percrent;
      else if (name == "percwhite") v = bg.percwhite;
      else if (name == "percvac") v = bg.percvac;
      else if (name == "deprivation") v = dep.score[i];
      else if (name == "popdens") v = bg.popdens;
      else if (name == "qmiparc") v = static_cast<double>(qmi[i]);
      col.values.push_back(v);
    }
    city.covariates.push_back(std::move(col));
  }
  std::vector<double> zero(n, 0.0);
  city.X = slm::make_design("synth", ids, zero, city.covariates).X;
  const Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(cfg.beta.data(), static_cast<Eigen::Index>(cfg.beta.size()));

  for (auto t : ingest::kCrimeTypes) {
    const auto ti = ingest::index_of(t);
    city.rates[ti] = simulate_lag_response(city.contiguity, city.X, beta, cfg.rho, cfg.noise_sd, rng, &city.noise[ti]);
    city.counts[ti].assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double rate = std::max(city.rates[ti](static_cast<Eigen::Index>(i)), 0.0);
      const double mean = cfg.intensity[ti] * rate * city.blockgroups[i].pop / 1000.0;
      const int k = mean > 0.0 ? std::poisson_distribution<int>(mean)(rng) : 0;
      city.counts[ti][i] = k;
      for (int j = 0; j < k; ++j)
        city.crimes.push_back({t, random_timestamp(rng, cfg.year, cfg.windows[t], cfg.night_share[ti]),
                               uniform_in(rng, cells[i].bounds(), 1.0)});
    }
  }
  return city;
}

CityFiles write_city(const City& city, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  CityFiles f{dir / "crimes.csv",      dir / "blockgroups.geojson", dir / "parcels.geojson",
              dir / "licenses.csv",    dir / "boundary.geojson",    dir / "city.json"};
  auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    return out;
  };
  {
    auto out = open(f.crimes);
    out << "type,datetime,x,y\n";
    for (const auto& c : city.crimes)
      out << ingest::short_code(c.type) << ',' << c.timestamp.to_string() << ',' << ingest::format_number(c.location.x)
          << ',' << ingest::format_number(c.location.y) << '\n';
  }
  {
    auto out = open(f.licenses);
    out << "x,y\n";
    for (const auto& p : city.licenses)
      out << ingest::format_number(p.x) << ',' << ingest::format_number(p.y) << '\n';
  }
  open(f.blockgroups) << ingest::blockgroups_to_geojson(city.blockgroups).dump() << '\n';
  open(f.parcels) << parcels::parcels_to_geojson(city.parcels).dump() << '\n';
  const nlohmann::json boundary = {
      {"type", "FeatureCollection"},
      {"features", {{{"type", "Feature"}, {"properties", nlohmann::json::object()}, {"geometry", geo::to_geojson(city.boundary)}}}}};
  open(f.boundary) << boundary.dump() << '\n';

  const nlohmann::json config = {{"crimes", f.crimes.filename().string()},
                                 {"blockgroups", f.blockgroups.filename().string()},
                                 {"parcels", f.parcels.filename().string()},
                                 {"licenses", f.licenses.filename().string()},
                                 {"boundary", f.boundary.filename().string()},
                                 {"cbd_x", city.cbd.x},
                                 {"cbd_y", city.cbd.y},
                                 {"feet_per_unit", 1.0},
                                 {"seed", city.config.seed},
                                 {"synth_seed", city.config.seed}};
  open(f.config) << config.dump(2) << '\n';
  return f;
}

}  // namespace acq::synth

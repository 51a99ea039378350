#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "acq/esda/spearman.hpp"
#include "acq/ingest/blockgroup.hpp"
#include "acq/ingest/crime.hpp"
#include "acq/parcels/parcel.hpp"
#include "acq/weights/contiguity.hpp"

namespace acq::synth {

/// Synthetic city on a square grid. Coordinates are in feet.
struct SynthConfig {
  int rows = 12;
  int cols = 12;
  double cell_size = 2640.0;
  std::uint64_t seed = 20140101;
  double rho = 0.4;
  /// constant followed by the seven model regressors
  std::vector<double> beta{2.0, 0.8, 0.05, -0.04, 0.15, 2.0, 0.0004, 0.3};
  double noise_sd = 2.0;
  /// Multiplier on the simulated rate, per crime type.
  std::array<double, 4> intensity{1.0, 0.6, 0.8, 1.2};
  /// Share of each type's crimes timed inside its night window.
  std::array<double, 4> night_share{0.2, 0.35, 0.3, 0.3};
  /// Mean parcels per cell.
  double parcel_density = 20.0;
  /// Chance that a cell holds a pair of 12-unit parcels 20 ft apart.
  double cluster_pair_rate = 0.25;
  /// Mean liquor licenses per cell.
  double license_density = 2.0;
  int year = 2014;
  ingest::NightWindows windows;
};

/// Throws ConfigError when `cfg` violates its invariants.
void validate(const SynthConfig& cfg);

struct City {
  SynthConfig config;
  std::vector<ingest::BlockGroup> blockgroups;  // row-major, sorted by id
  std::vector<parcels::Parcel> parcels;
  std::vector<ingest::CrimeRecord> crimes;
  std::vector<geo::Point> licenses;
  geo::PolygonGeom boundary;
  geo::Point cbd;

  weights::ContiguityWeights contiguity;  // binary Queen
  std::vector<esda::NamedColumn> covariates;  // model regressors
  Eigen::MatrixXd X;                          // constant plus covariates
  std::array<Eigen::VectorXd, 4> noise;       // per crime type
  std::array<Eigen::VectorXd, 4> rates;       // simulated response per type
  std::array<std::vector<int>, 4> counts;     // crimes drawn per block group
};

City make_city(const SynthConfig& cfg);

/// y = (I - rho W)^-1 rhs with W row-standardized.
Eigen::VectorXd lag_forward_solve(const weights::ContiguityWeights& w, double rho, const Eigen::VectorXd& rhs);

/// Lag-model response with N(0, noise_sd^2) errors written to `eps`.
Eigen::VectorXd simulate_lag_response(const weights::ContiguityWeights& w, const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& beta, double rho, double noise_sd,
                                      std::mt19937_64& rng, Eigen::VectorXd* eps = nullptr);

/// File names written by write_city.
struct CityFiles {
  std::filesystem::path crimes;
  std::filesystem::path blockgroups;
  std::filesystem::path parcels;
  std::filesystem::path licenses;
  std::filesystem::path boundary;
  std::filesystem::path config;  // run configuration pointing at the files above
};

/// crimes.csv, blockgroups.geojson, parcels.geojson, licenses.csv,
/// boundary.geojson and city.json. Paths inside city.json are relative to `dir`.
CityFiles write_city(const City& city, const std::filesystem::path& dir);

}  // namespace acq::synth

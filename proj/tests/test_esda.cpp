#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "acq/error.hpp"
#include "acq/esda/gstar.hpp"
#include "acq/esda/moran.hpp"
#include "acq/esda/pca.hpp"
#include "acq/esda/profile.hpp"
#include "acq/esda/spearman.hpp"

using namespace acq::esda;
using acq::weights::ContiguityWeights;
using acq::weights::Standardization;

namespace {

using Rows = std::vector<std::vector<std::pair<std::size_t, double>>>;

std::vector<std::string> ids_for(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("u" + std::to_string(1000 + i));
  return ids;
}

// Queen lattice on a rows x cols grid, optionally wrapped into a torus.
ContiguityWeights lattice(int rows, int cols, bool torus = false) {
  Rows adj(static_cast<std::size_t>(rows * cols));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          int rr = r + dr, cc = c + dc;
          if (torus) {
            rr = (rr + rows) % rows;
            cc = (cc + cols) % cols;
          } else if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) {
            continue;
          }
          adj[static_cast<std::size_t>(r * cols + c)].emplace_back(static_cast<std::size_t>(rr * cols + cc), 1.0);
        }
  return ContiguityWeights(ids_for(adj.size()), adj, Standardization::Binary, false);
}

ContiguityWeights complete_graph(std::size_t n) {
  Rows adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) adj[i].emplace_back(j, 1.0);
  return ContiguityWeights(ids_for(n), adj, Standardization::Binary, false);
}

std::vector<std::vector<double>> dense(const ContiguityWeights& w) {
  std::vector<std::vector<double>> m(w.n(), std::vector<double>(w.n(), 0.0));
  for (std::size_t i = 0; i < w.n(); ++i)
    for (std::size_t j = 0; j < w.n(); ++j) m[i][j] = w.weight(i, j);
  return m;
}

// Moran's I as printed, over a dense matrix.
double moran_oracle(const std::vector<double>& x, const ContiguityWeights& w) {
  const auto m = dense(w);
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v / n;
  double s0 = 0.0, num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - mean) * (x[i] - mean);
    for (std::size_t j = 0; j < x.size(); ++j) {
      s0 += m[i][j];
      num += m[i][j] * (x[i] - mean) * (x[j] - mean);
    }
  }
  return n / s0 * num / den;
}

// G*_i as printed, over a dense matrix, with s_x = sqrt(sum x^2 / n - mean^2).
std::vector<double> gstar_oracle(const std::vector<double>& x, const ContiguityWeights& w) {
  const auto m = dense(w);
  const double n = static_cast<double>(x.size());
  double sum = 0.0, sum_sq = 0.0;
  for (double v : x) {
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double s = std::sqrt(sum_sq / n - mean * mean);
  std::vector<double> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double wx = 0.0, ws = 0.0, ws2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      wx += m[i][j] * x[j];
      ws += m[i][j];
      ws2 += m[i][j] * m[i][j];
    }
    out.push_back((wx - mean * ws) / (s * std::sqrt((n * ws2 - ws * ws) / (n - 1))));
  }
  return out;
}

std::vector<double> normal_field(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> z;
  std::vector<double> x(n);
  for (auto& v : x) v = z(rng);
  return x;
}

// Rank of each value: (#less) + (#equal + 1) / 2, by brute force.
double spearman_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r;
    for (double a : v) {
      double less = 0, equal = 0;
      for (double b : v) {
        less += b < a;
        equal += b == a;
      }
      r.push_back(less + (equal + 1) / 2);
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("morans_i") {
  const auto k4 = acq::weights::row_standardize(complete_graph(4));
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(morans_i(x, k4) == doctest::Approx(-1.0 / 3).epsilon(1e-14));
  CHECK(moran_oracle(x, k4) == doctest::Approx(-1.0 / 3).epsilon(1e-14));
  CHECK_THROWS_AS(morans_i(std::vector<double>{2, 2, 2, 2}, k4), acq::NumericalError);

  std::mt19937_64 rng(3);
  for (bool standardize : {false, true}) {
    auto w = lattice(7, 6);
    if (standardize) w = acq::weights::row_standardize(w);
    for (int trial = 0; trial < 10; ++trial) {
      auto v = normal_field(rng, w.n());
      const double I = morans_i(v, w);
      CHECK(I == doctest::Approx(moran_oracle(v, w)).epsilon(1e-12));
      std::vector<double> affine;
      for (double a : v) affine.push_back(-3.5 * a + 120.0);
      CHECK(std::abs(morans_i(affine, w) - I) < 1e-12);
    }
  }
}

TEST_CASE("morans_permutation") {
  const auto w = acq::weights::row_standardize(lattice(10, 10));
  std::mt19937_64 rng(11);
  const auto x = normal_field(rng, 100);

  const auto a = morans_permutation(x, w, 999, 42);
  const auto b = morans_permutation(x, w, 999, 42);
  CHECK(a.p_perm == b.p_perm);
  CHECK(a.I == b.I);
  CHECK(a.expected == doctest::Approx(-1.0 / 99));
  CHECK(a.p_perm > 0.0);
  CHECK(a.p_perm <= 1.0);
  CHECK_THROWS_AS(morans_permutation(x, w, 50, 1), acq::ConfigError);

  SUBCASE("smooth gradient is always extreme") {
    std::vector<double> g;
    for (int r = 0; r < 10; ++r)
      for (int c = 0; c < 10; ++c) g.push_back(r + c);
    CHECK(morans_permutation(g, w, 999, 7).p_perm == doctest::Approx(1.0 / 1000));
  }

  SUBCASE("null rejection rate is calibrated") {
    const int trials = 200;
    int rejections = 0;
    for (int t = 0; t < trials; ++t) {
      const auto noise = normal_field(rng, 100);
      if (morans_permutation(noise, w, 499, 1000 + static_cast<std::uint64_t>(t)).p_perm <= 0.05) ++rejections;
    }
    // binomial(200, 0.05): mean 10, sd 3.08; accept within 3 sd
    MESSAGE("rejections: " << rejections);
    CHECK(rejections >= 1);
    CHECK(rejections <= 19);
  }
}

TEST_CASE("getis_ord_gstar") {
  SUBCASE("oracle agreement and spike") {
    const auto w = acq::weights::with_self(lattice(5, 5));
    std::vector<double> x(25, 1.0);
    x[12] = 10.0;
    const auto g = getis_ord_gstar(x, w);
    const auto oracle = gstar_oracle(x, w);
    for (std::size_t i = 0; i < 25; ++i) CHECK(g.z[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
    // every interior window holds the spike, so the centre ties with its ring
    CHECK(*std::max_element(g.z.begin(), g.z.end()) == doctest::Approx(g.z[12]).epsilon(1e-14));
    for (std::size_t edge : {2, 10, 14, 22}) CHECK(g.z[edge] < g.z[12]);
    for (std::size_t corner : {0, 4, 20, 24}) CHECK(g.z[corner] < 0.0);
    CHECK(g.warnings.empty());
  }
  SUBCASE("mirror symmetry") {
    const auto w = acq::weights::with_self(lattice(6, 7));
    std::mt19937_64 rng(19);
    const auto x = normal_field(rng, 42);
    std::vector<double> mirrored(42);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 7; ++c) mirrored[static_cast<std::size_t>(r * 7 + (6 - c))] = x[static_cast<std::size_t>(r * 7 + c)];
    const auto g = getis_ord_gstar(x, w);
    const auto gm = getis_ord_gstar(mirrored, w);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 7; ++c)
        CHECK(gm.z[static_cast<std::size_t>(r * 7 + (6 - c))] ==
              doctest::Approx(g.z[static_cast<std::size_t>(r * 7 + c)]).epsilon(1e-12));
  }
  SUBCASE("uniform degree lattice centres the scores") {
    const auto w = acq::weights::with_self(lattice(10, 10, true));
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 5; ++trial) {
      const auto x = normal_field(rng, 100);
      const auto g = getis_ord_gstar(x, w);
      double mean = 0.0;
      for (double z : g.z) mean += z / 100.0;
      CHECK(std::abs(mean) < 0.05);
    }
  }
  SUBCASE("classification and degenerate units") {
    const auto w = acq::weights::with_self(complete_graph(5));
    const auto g = getis_ord_gstar(std::vector<double>{1, 2, 3, 4, 5}, w);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(std::isnan(g.z[i]));
      CHECK(g.cls[i] == HotspotClass::NotSignificant);
    }
    CHECK(g.warnings.size() == 5);
    CHECK_THROWS_AS(getis_ord_gstar(std::vector<double>(25, 3.0), acq::weights::with_self(lattice(5, 5))),
                    acq::NumericalError);

    const auto wl = acq::weights::with_self(lattice(5, 5));
    std::vector<double> x(25, 0.0);
    x[0] = x[1] = x[5] = x[6] = 10.0;
    x[18] = x[19] = x[23] = x[24] = -10.0;
    for (double threshold : {1.0, 1.96, 2.5}) {
      const auto g2 = getis_ord_gstar(x, wl, threshold);
      for (std::size_t i = 0; i < 25; ++i) {
        CHECK((g2.cls[i] == HotspotClass::Hot) == (g2.z[i] >= threshold));
        CHECK((g2.cls[i] == HotspotClass::Cold) == (g2.z[i] <= -threshold));
      }
    }
  }
}

TEST_CASE("spearman") {
  const std::vector<double> x{1, 2, 2, 3}, y{1, 3, 2, 4};
  CHECK(spearman(x, y) == doctest::Approx(4.5 / std::sqrt(22.5)).epsilon(1e-14));
  CHECK(spearman(x, y) == doctest::Approx(0.9487).epsilon(1e-4));
  CHECK(average_ranks(x) == std::vector<double>{1, 2.5, 2.5, 4});
  CHECK(spearman(x, x) == doctest::Approx(1.0));
  const std::vector<double> up{1, 5, 7, 9}, down{9, 7, 5, 1};
  CHECK(spearman(up, down) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), acq::NumericalError);
  CHECK_THROWS_AS(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), acq::DataError);

  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> small(0, 6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a, b;
    for (int i = 0; i < 40; ++i) {
      a.push_back(small(rng));
      b.push_back(small(rng) + 0.5 * a.back());
    }
    const double r = spearman(a, b);
    CHECK(r == doctest::Approx(spearman_oracle(a, b)).epsilon(1e-12));
    std::vector<double> ta, tb;
    for (double v : a) ta.push_back(std::exp(v / 3.0));
    for (double v : b) tb.push_back(-1.0 / (v + 10.0));
    CHECK(spearman(ta, tb) == doctest::Approx(r).epsilon(1e-12));
  }
}

TEST_CASE("correlation tables") {
  std::vector<NamedColumn> all{{"BURG", {1, 2, 3, 4, 5, 6}}, {"ROB", {2, 1, 4, 3, 6, 5}}};
  std::vector<NamedColumn> night{{"BURGN", {1, 3, 2, 4, 6, 5}}, {"ROBN", {2, 1, 4, 3, 6, 5}}};
  std::vector<NamedColumn> covs{{"PERCWHITE", {6, 5, std::nullopt, 3, 2, 1}}, {"CONST", {1, 1, 1, 1, 1, 1}}};
  const auto t = correlation_tables(all, night, covs);
  REQUIRE(t.all.names == std::vector<std::string>{"BURG", "ROB", "PERCWHITE", "CONST"});
  for (std::size_t i = 0; i < 3; ++i) CHECK(*t.all.r[i][i] == 1.0);
  CHECK_FALSE(t.all.r[3][3].has_value());
  CHECK_FALSE(t.all.at("CONST", "BURG").has_value());
  CHECK(*t.all.at("PERCWHITE", "BURG") == doctest::Approx(-1.0));
  CHECK(t.all.pairs[2][0] == 5);
  CHECK(*t.diff.at("ROB", "PERCWHITE") == doctest::Approx(0.0));
  const double burg_rob_all = spearman(std::vector<double>{1, 2, 3, 4, 5, 6}, std::vector<double>{2, 1, 4, 3, 6, 5});
  const double burg_rob_night =
      spearman(std::vector<double>{1, 3, 2, 4, 6, 5}, std::vector<double>{2, 1, 4, 3, 6, 5});
  CHECK(*t.diff.at("ROB", "BURG") == doctest::Approx(burg_rob_night - burg_rob_all));
  CHECK(*t.diff.at("PERCWHITE", "PERCWHITE") == 0.0);

  const auto same = correlation_tables(all, all, covs);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) CHECK(*same.diff.r[a][b] == 0.0);
}

TEST_CASE("deprivation_pca") {
  SUBCASE("perfectly correlated pair") {
    std::vector<NamedColumn> cols{{"poverty", {1, 2, 3, 4, 5, 6}}, {"snap", {10, 12, 14, 16, 18, 20}}};
    const auto d = deprivation_pca(cols);
    CHECK(d.explained_share == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.loadings[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(d.loadings[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  }
  SUBCASE("single usable indicator") {
    std::vector<NamedColumn> cols{{"poverty", {3, 1, 4, 1, 5, 9}}, {"flat", {2, 2, 2, 2, 2, 2}}};
    const auto d = deprivation_pca(cols);
    REQUIRE(d.indicators == std::vector<std::string>{"poverty"});
    CHECK(d.warnings.size() == 1);
    const double mean = 23.0 / 6;
    double ss = 0;
    for (double v : {3, 1, 4, 1, 5, 9}) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / 5);
    const std::vector<double> raw{3, 1, 4, 1, 5, 9};
    for (std::size_t i = 0; i < 6; ++i) CHECK(*d.score[i] == doctest::Approx((raw[i] - mean) / sd).epsilon(1e-12));
  }
  SUBCASE("four indicators against power iteration") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> z;
    std::vector<NamedColumn> cols{{"poverty", {}}, {"unemployment", {}}, {"no_diploma", {}}, {"snap", {}}};
    for (int i = 0; i < 120; ++i) {
      const double latent = z(rng);
      const double scales[] = {8, 3, 5, 12};
      for (std::size_t k = 0; k < 4; ++k) {
        std::optional<double> v = 20 + scales[k] * (0.8 * latent + 0.6 * z(rng));
        if (k == 2 && i % 17 == 0) v.reset();
        cols[k].values.push_back(v);
      }
    }
    const auto d = deprivation_pca(cols);
    CHECK(d.fitted_units == 112);
    CHECK(d.loadings[0] > 0.0);
    double norm = 0;
    for (double l : d.loadings) norm += l * l;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));

    // oracle: correlation matrix by hand, leading eigenvector by power iteration
    std::vector<std::size_t> complete;
    for (std::size_t i = 0; i < 120; ++i)
      if (cols[2].values[i]) complete.push_back(i);
    const double n = static_cast<double>(complete.size());
    std::vector<std::vector<double>> zs(4);
    for (std::size_t k = 0; k < 4; ++k) {
      double mean = 0, ss = 0;
      for (auto i : complete) mean += *cols[k].values[i] / n;
      for (auto i : complete) ss += std::pow(*cols[k].values[i] - mean, 2);
      for (auto i : complete) zs[k].push_back((*cols[k].values[i] - mean) / std::sqrt(ss / (n - 1)));
    }
    double c[4][4];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        c[a][b] = 0;
        for (std::size_t i = 0; i < complete.size(); ++i) c[a][b] += zs[a][i] * zs[b][i] / (n - 1);
      }
    double v[4] = {1, 1, 1, 1}, lambda = 0;
    for (int it = 0; it < 2000; ++it) {
      double nv[4] = {0, 0, 0, 0}, len = 0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) nv[a] += c[a][b] * v[b];
      for (double e : nv) len += e * e;
      len = std::sqrt(len);
      lambda = len;
      for (int a = 0; a < 4; ++a) v[a] = nv[a] / len;
    }
    CHECK(d.eigenvalue == doctest::Approx(lambda).epsilon(1e-10));
    for (int a = 0; a < 4; ++a) CHECK(d.loadings[static_cast<std::size_t>(a)] == doctest::Approx(v[a]).epsilon(1e-8));
    CHECK(d.explained_share == doctest::Approx(lambda / 4).epsilon(1e-10));

    double mean = 0, var = 0;
    for (const auto& s : d.score)
      if (s) mean += *s / n;
    for (const auto& s : d.score)
      if (s) var += (*s - mean) * (*s - mean) / (n - 1);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::abs(var - d.eigenvalue) < 1e-9);
    CHECK_FALSE(d.score[0].has_value());
  }
  SUBCASE("sign follows the first indicator") {
    std::vector<NamedColumn> cols{{"poverty", {1, 2, 3, 4, 5, 7}}, {"unemployment", {9, 8, 7, 6, 4, 3}}};
    const auto d = deprivation_pca(cols);
    CHECK(d.loadings[0] > 0.0);
    CHECK(d.loadings[1] < 0.0);
    CHECK(*d.score[5] > 0.0);
  }
  SUBCASE("too few units") {
    std::vector<NamedColumn> cols{{"poverty", {1, 2, 3, 4}}};
    CHECK_THROWS_AS(deprivation_pca(cols), acq::DataError);
  }
}

TEST_CASE("hotspot_profile") {
  GStarResult g;
  g.cls = {HotspotClass::Hot, HotspotClass::Cold, HotspotClass::Hot, HotspotClass::Hot,
           HotspotClass::NotSignificant, HotspotClass::Hot};
  std::vector<NamedColumn> vars{{"deprivation", {1, 50, 2, 4, 60, std::nullopt}}, {"medy", {10, 20, 30, 40, 50, 60}}};
  const auto p = hotspot_profile(g, vars);
  CHECK(p.units == 4);
  CHECK_FALSE(p.empty);
  CHECK(p.variables[0].n == 3);
  CHECK(*p.variables[0].mean == doctest::Approx(7.0 / 3));
  CHECK(*p.variables[0].sd == doctest::Approx(std::sqrt(7.0 / 3)));
  CHECK(*p.variables[1].mean == doctest::Approx(35.0));
  CHECK(*p.variables[1].sd == doctest::Approx(std::sqrt(1300.0 / 3)));

  const auto cold = hotspot_profile(g, vars, HotspotClass::Cold);
  CHECK(cold.units == 1);
  CHECK(*cold.variables[0].mean == 50.0);
  CHECK_FALSE(cold.variables[0].sd.has_value());

  GStarResult none;
  none.cls.assign(6, HotspotClass::NotSignificant);
  const auto empty = hotspot_profile(none, vars);
  CHECK(empty.empty);
  CHECK_FALSE(empty.variables[0].mean.has_value());
}

TEST_CASE("summarize") {
  std::vector<NamedColumn> vars{{"a", {1.0, std::nullopt, 4.0, -2.0, 7.0}}, {"b", {std::nullopt, 3.0}}, {"c", {}}};
  const auto s = summarize(vars);
  REQUIRE(s.size() == 3);
  CHECK(s[0].n == 4);
  CHECK(*s[0].mean == doctest::Approx(2.5));
  CHECK(*s[0].sd == doctest::Approx(std::sqrt(45.0 / 3)));
  CHECK(*s[0].min == -2.0);
  CHECK(*s[0].max == 7.0);
  CHECK(s[1].n == 1);
  CHECK(*s[1].mean == 3.0);
  CHECK_FALSE(s[1].sd.has_value());
  CHECK(s[2].n == 0);
  CHECK_FALSE(s[2].mean.has_value());
}

#include "acq/esda/gstar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "acq/error.hpp"

namespace acq::esda {

const char* to_string(HotspotClass c) {
  switch (c) {
    case HotspotClass::Hot: return "hot";
    case HotspotClass::Cold: return "cold";
    case HotspotClass::NotSignificant: return "not_significant";
  }
  return "not_significant";
}

GStarResult getis_ord_gstar(std::span<const double> x, const weights::ContiguityWeights& w,
                            double threshold) {
  const std::size_t n = x.size();
  if (n != w.n()) throw ConfigError("G* input length does not match the weights");
  if (n < 2) throw DataError("G* needs at least two units");
  if (!(threshold > 0.0)) throw ConfigError("G* threshold must be positive");

  double sum = 0.0, scale = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw DataError("G* input has a non-finite value");
    sum += v;
    scale = std::max(scale, std::abs(v));
  }
  const double nd = static_cast<double>(n);
  const double mean = sum / nd;
  double m2 = 0.0;
  for (double v : x) m2 += (v - mean) * (v - mean);
  if (!(m2 > nd * std::pow(1e-12 * scale, 2))) throw NumericalError("G* is undefined for a constant variable");
  const double s = std::sqrt(m2 / nd);

  GStarResult out;
  out.threshold = threshold;
  out.z.resize(n);
  out.cls.resize(n, HotspotClass::NotSignificant);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = w.neighbors(i);
    const auto ws = w.row_weights(i);
    double wx = 0.0, wsum = 0.0, wsq = 0.0;
    for (std::size_t k = 0; k < nb.size(); ++k) {
      wx += ws[k] * x[nb[k]];
      wsum += ws[k];
      wsq += ws[k] * ws[k];
    }
    const double radicand = (nd * wsq - wsum * wsum) / (nd - 1.0);
    if (!(radicand > 1e-12 * std::max(1.0, nd * wsq))) {
      out.z[i] = std::numeric_limits<double>::quiet_NaN();
      out.warnings.push_back("G* undefined for unit " + w.ids()[i] + ": weights cover every unit equally");
      continue;
    }
    const double z = (wx - mean * wsum) / (s * std::sqrt(radicand));
    out.z[i] = z;
    if (z >= threshold)
      out.cls[i] = HotspotClass::Hot;
    else if (z <= -threshold)
      out.cls[i] = HotspotClass::Cold;
  }
  return out;
}

}  // namespace acq::esda

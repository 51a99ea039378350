#include "acq/esda/profile.hpp"

#include <algorithm>
#include <cmath>

#include "acq/error.hpp"

namespace acq::esda {

std::vector<SummaryStatistics> summarize(std::span<const NamedColumn> variables) {
  std::vector<SummaryStatistics> out;
  for (const auto& var : variables) {
    SummaryStatistics s{var.name, 0, {}, {}, {}, {}};
    double sum = 0.0;
    for (const auto& v : var.values)
      if (v) {
        sum += *v;
        ++s.n;
        s.min = s.min ? std::min(*s.min, *v) : *v;
        s.max = s.max ? std::max(*s.max, *v) : *v;
      }
    if (s.n > 0) {
      const double mean = sum / s.n;
      s.mean = mean;
      if (s.n > 1) {
        double ss = 0.0;
        for (const auto& v : var.values)
          if (v) ss += (*v - mean) * (*v - mean);
        s.sd = std::sqrt(ss / (s.n - 1));
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

HotspotProfile hotspot_profile(const GStarResult& gstar, std::span<const NamedColumn> variables,
                               HotspotClass cls) {
  HotspotProfile out;
  out.cls = cls;
  for (auto c : gstar.cls)
    if (c == cls) ++out.units;
  out.empty = out.units == 0;
  for (const auto& var : variables) {
    if (var.values.size() != gstar.cls.size())
      throw ConfigError("profile variable " + var.name + " does not match the G* units");
    VariableProfile p{var.name, 0, std::nullopt, std::nullopt};
    double sum = 0.0;
    for (std::size_t i = 0; i < var.values.size(); ++i)
      if (gstar.cls[i] == cls && var.values[i]) {
        sum += *var.values[i];
        ++p.n;
      }
    if (p.n > 0) {
      const double mean = sum / p.n;
      p.mean = mean;
      if (p.n > 1) {
        double ss = 0.0;
        for (std::size_t i = 0; i < var.values.size(); ++i)
          if (gstar.cls[i] == cls && var.values[i]) ss += (*var.values[i] - mean) * (*var.values[i] - mean);
        p.sd = std::sqrt(ss / (p.n - 1));
      }
    }
    out.variables.push_back(std::move(p));
  }
  return out;
}

}  // namespace acq::esda

#pragma once

namespace acq::geo {

inline constexpr double kFeetPerMile = 5280.0;

/// Conversion between input CRS units and feet/miles.
struct LinearUnits {
  double feet_per_unit = 1.0;

  constexpr double from_feet(double feet) const { return feet / feet_per_unit; }
  constexpr double from_miles(double miles) const { return from_feet(miles * kFeetPerMile); }
  constexpr double to_feet(double units) const { return units * feet_per_unit; }
  constexpr double to_miles(double units) const { return to_feet(units) / kFeetPerMile; }
  constexpr double to_square_miles(double area_units) const {
    return area_units * feet_per_unit * feet_per_unit / (kFeetPerMile * kFeetPerMile);
  }
};

}  // namespace acq::geo

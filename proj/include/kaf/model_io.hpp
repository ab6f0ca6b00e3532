#pragma once

#include "kaf/forecast.hpp"

#include <iosfwd>
#include <string>

namespace kaf {

/// Model file layout:
///
///   kaf-model v1
///   key=value                  (metadata, one per line)
///   array <name> <rows> <cols> (one per stored array)
///   end
///   <raw float64 little-endian, column-major, arrays in header order>
///
/// Numbers in the metadata use shortest round-trip formatting, so a saved
/// and reloaded model reproduces every value bit for bit.
void save_model(const std::string &path, const ForecastModel &model);
ForecastModel load_model(const std::string &path);

void write_model(std::ostream &out, const ForecastModel &model);
ForecastModel read_model(std::istream &in);

} // namespace kaf

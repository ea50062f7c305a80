#pragma once

#include "weakkam/grid.hpp"
#include "weakkam/semiconcave.hpp"

#include <iosfwd>
#include <string>

namespace weakkam::io {

/// CSV layout: `# {"n":..,"d":..,"c":[..],"lambda":..,"alpha":..}` then one row
/// `i_0[,i_1..],value` per grid point, values printed with 17 significant digits.
void write_grid_csv(const GridFunction& u, std::ostream& os);
GridFunction read_grid_csv(std::istream& is);

/// Binary layout: "GFN1", little-endian uint32 header length, the JSON header,
/// then the values as little-endian doubles in storage order.
void write_grid_binary(const GridFunction& u, std::ostream& os);
GridFunction read_grid_binary(std::istream& is);

/// Chooses the format from the extension (".csv" is text, anything else binary).
void save_grid(const GridFunction& u, const std::string& path);
GridFunction load_grid(const std::string& path);

/// Columns theta_1..theta_d, p_1..p_d, source_tag.
void write_cloud_csv(const GraphCloud& cloud, std::ostream& os);
GraphCloud read_cloud_csv(std::istream& is);

/// "%.17g"
std::string format_double(double x);

}  // namespace weakkam::io

// Versioned grid file: a JSON metadata header followed by the flat
// (k, i, u, x, y, probability) table and per-step transition blocks.
// Only preset-backed grids serialize (the model must be reconstructible).

#pragma once

#include <iosfwd>
#include <string>

#include "jrmq/jrmq.hpp"

namespace jrmq {

// Fixed floating-point text format: 12 significant digits.
std::string format_float(double v);

void write_grid(std::ostream& os, const QuantizationGrid& grid);
void write_grid_file(const std::string& path, const QuantizationGrid& grid);

QuantizationGrid read_grid(std::istream& is);
QuantizationGrid read_grid_file(const std::string& path);

} // namespace jrmq

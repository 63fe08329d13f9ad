#pragma once

#include <string>

namespace kcl {

// Renders one column pair of a kcore-lab CSV file as a standalone SVG 1.1
// line chart. Deterministic output for fixed input.
void emit_plot(const std::string& csv_path, const std::string& x_column,
               const std::string& y_column, const std::string& out_path);

}  // namespace kcl

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace trajrl::svgplot {

using Series = std::pair<std::string, std::vector<double>>;

// Per-step line chart (one polyline per series), with optional vertical
// marker positions.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<Series>& series,
                      const std::vector<int>& markers = {});

// One violin (mirrored kernel density) per group with mean and median marks.
void write_violin(const std::string& path, const std::string& title,
                  const std::vector<Series>& groups);

// Empirical CDF step curves, one per group.
void write_cdf(const std::string& path, const std::string& title,
               const std::vector<Series>& groups);

}  // namespace trajrl::svgplot

#pragma once

#include <filesystem>
#include <vector>

#include "tollcast/fusion/feature_table.hpp"

namespace tollcast::eval {

struct SuiteResult;

/// Standalone SVG charts of the suite numbers: grouped bars of MAE, MAPE and
/// R2 by horizon, error box plots, and the toll vs tt_diff scatter.
std::vector<std::filesystem::path> write_svg_charts(const SuiteResult& result,
                                                    const fusion::FeatureTable& table,
                                                    const std::filesystem::path& dir);

}  // namespace tollcast::eval

#pragma once

#include "edgedeploy/collector.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace edgedeploy {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitDivergence = 4;

/// Runs one command line (without the program name). Reports go to `out`,
/// diagnostics to `err`; files land in the configured output directory.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "approach,L/F,KF#,WT,WP,P/V,mAP"
[[nodiscard]] std::string metrics_csv_header();
[[nodiscard]] std::string metrics_csv_row(std::string_view approach, const EpisodeMetrics& m);

} // namespace edgedeploy

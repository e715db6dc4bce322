#pragma once

#include <string>

#include "qgdirac/config.hpp"

namespace qgdirac {

// Exit codes: 0 success, 1 validation failure, 2 solver failure.
int run_subcommand(const std::string& name, const std::string& config_path);

// The same entry point on an already-parsed config (used by tests).
int run_subcommand_on(const std::string& name, const ConfigFile& file,
                      const std::string& out_dir_override = "");

BarycenterConfig make_barycenter_config(const RunConfig& rc, const MetricGraph& g);

}  // namespace qgdirac

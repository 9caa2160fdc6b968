#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "idci/cli/config.hpp"

namespace idci::cli {

struct Flags {
  std::optional<Sweep> sweep;
  bool certify = false;
  bool with_mc = false;
  bool g_curve = false;
};

/// "c=0.01:0.20:0.01"; the parameter is one of c, phi, q.
Sweep parse_sweep(const std::string& text);

const std::vector<std::string>& command_names();

/// Runs one command and returns its exit code: 0 ok, 2 configuration or domain
/// error, 3 numerical failure, 4 verification failure. Diagnostics go to err.
int run_command(const std::string& name, const RunConfig& cfg, const Flags& flags,
                std::ostream& out, std::ostream& err);

}  // namespace idci::cli

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "idci/hjb.hpp"
#include "idci/levy_model.hpp"
#include "idci/optimizer.hpp"
#include "idci/simulator.hpp"

namespace idci::cli {

/// Malformed configuration file or flag; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { kCsv, kJson };

struct GridRange {
  double from = 0.0;
  double to = 5.0;
  double step = 0.5;
};

/// One swept parameter: "c=0.01:0.20:0.01" or "phi=1.01:1.20:0.01".
struct Sweep {
  std::string parameter;
  double from = 0.0;
  double to = 0.0;
  double step = 0.0;
  std::vector<double> values() const;
};

struct RunConfig {
  LevyModel model = BrownianDrift{1.0, 0.36};
  Costs costs;
  /// When absent, commands that need a strategy run the optimizer first.
  std::optional<Strategy> strategy;
  /// Discount rate for eval-scale; defaults to costs.q. The fixed-jump model only
  /// has a 0-scale function, so eval-scale alone accepts 0 here.
  std::optional<double> scale_q;
  /// x grid for eval-scale and value; value defaults to [0, 4] step 0.05.
  std::optional<GridRange> grid;
  OptimizeOptions optimizer;
  double surface_max = 4.0;
  double surface_step = 0.05;
  GridSpec hjb;
  SimConfig sim;
  std::vector<double> x0 = {1.0};
  /// When set, simulate estimates E_x[exp(-q T_b+)] instead of the value.
  std::optional<double> exit_b;
  Format format = Format::kCsv;
  std::string output_path;
  int precision = 5;
};

/// Raw key/value entries in file order, keyed by "section.key".
class ConfigSource {
 public:
  /// Parses "[section]" headers, "key = value" lines, '#' and ';' comments.
  /// Errors carry "<origin>:<line>:".
  void parse(const std::string& text, const std::string& origin);
  /// `key` may be "section.key" or a bare key that is unique in the schema.
  void set(const std::string& key, const std::string& value, const std::string& origin);
  RunConfig build() const;

 private:
  struct Entry {
    std::string value;
    std::string where;
  };
  std::map<std::string, Entry> entries_;
};

/// Section-qualified name for a bare key; throws ConfigError if unknown.
std::string qualify(const std::string& key);

}  // namespace idci::cli

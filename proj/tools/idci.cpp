#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "idci/cli/commands.hpp"
#include "idci/cli/config.hpp"

namespace {

struct Options {
  std::string config;
  std::string format;
  std::string output;
  std::string precision;
  std::string threads;
  std::string sweep;
  idci::cli::Flags flags;
};

void add_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "configuration file ([section] key = value)");
  cmd->add_option("--format", o.format, "csv or json");
  cmd->add_option("--output", o.output, "write to this file instead of stdout");
  cmd->add_option("--precision", o.precision, "decimals in numeric output (default 5)");
  cmd->add_option("--threads", o.threads, "worker threads (default from IDCI_THREADS)");
  cmd->allow_extras();
}

// Leftover "--key value" or "--key=value" pairs override configuration keys.
void apply_overrides(const std::vector<std::string>& extras, idci::cli::ConfigSource& src) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0) throw idci::cli::ConfigError("unexpected argument '" + tok + "'");
    std::string key = tok.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else {
      if (i + 1 >= extras.size()) throw idci::cli::ConfigError("missing value for " + tok);
      value = extras[++i];
    }
    src.set(key, value, "flag --" + key);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Impulse dividend and capital injection strategies for spectrally negative Levy models"};
  app.require_subcommand(1);
  Options o;
  for (const auto& name : idci::cli::command_names()) {
    auto* cmd = app.add_subcommand(name);
    add_options(cmd, o);
    if (name == "optimize") cmd->add_option("--sweep", o.sweep, "c=from:to:step or phi=from:to:step");
    if (name == "eval-scale") cmd->add_flag("--certify", o.flags.certify, "add Laplace identity residuals");
    if (name == "value") cmd->add_flag("--with-mc", o.flags.with_mc, "add Monte Carlo comparison columns");
    if (name == "xi-surface") cmd->add_flag("--g-curve", o.flags.g_curve, "emit G(x) instead of the surface");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  CLI::App* cmd = app.get_subcommands().front();

  idci::cli::RunConfig cfg;
  try {
    idci::cli::ConfigSource src;
    if (const char* env = std::getenv("IDCI_THREADS"); env != nullptr && *env != '\0') {
      src.set("run.threads", env, "IDCI_THREADS");
    }
    if (!o.config.empty()) {
      std::ifstream in(o.config);
      if (!in) throw idci::cli::ConfigError(o.config + ": cannot open");
      std::stringstream text;
      text << in.rdbuf();
      src.parse(text.str(), o.config);
    }
    if (!o.format.empty()) src.set("output.format", o.format, "flag --format");
    if (!o.output.empty()) src.set("output.path", o.output, "flag --output");
    if (!o.precision.empty()) src.set("output.precision", o.precision, "flag --precision");
    if (!o.threads.empty()) src.set("run.threads", o.threads, "flag --threads");
    apply_overrides(cmd->remaining(), src);
    cfg = src.build();
    if (!o.sweep.empty()) o.flags.sweep = idci::cli::parse_sweep(o.sweep);
  } catch (const idci::cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  if (cfg.output_path.empty()) return idci::cli::run_command(cmd->get_name(), cfg, o.flags, std::cout, std::cerr);
  std::ofstream file(cfg.output_path);
  if (!file) {
    std::cerr << "error: cannot write " << cfg.output_path << '\n';
    return 2;
  }
  return idci::cli::run_command(cmd->get_name(), cfg, o.flags, file, std::cerr);
}

#include "idci/cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <locale>
#include <map>
#include <ostream>
#include <sstream>
#include <variant>

#include "idci/errors.hpp"
#include "idci/hjb.hpp"
#include "idci/optimizer.hpp"
#include "idci/scale_functions.hpp"
#include "idci/simulator.hpp"
#include "idci/value_function.hpp"
#include "json.hpp"

namespace idci::cli {
namespace {

using Cell = std::variant<double, std::int64_t, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_double(double v, int precision) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::abs(v) < 0.5 * std::pow(10.0, -precision)) v = 0.0;
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.setf(std::ios::fixed);
  s.precision(precision);
  s << v;
  return s.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string csv_cell(const Cell& c, int precision) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(v, precision);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          return csv_field(v);
        }
      },
      c);
}

double round_to(double v, int precision) {
  if (!std::isfinite(v) || precision >= 15) return v;
  const double scale = std::pow(10.0, precision);
  if (std::abs(v) * scale > 1e15) return v;
  const double r = std::round(v * scale) / scale;
  return r == 0.0 ? 0.0 : r;
}

nlohmann::ordered_json json_cell(const Cell& c, int precision) {
  return std::visit(
      [&](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return round_to(v, precision);
        } else {
          return v;
        }
      },
      c);
}

nlohmann::ordered_json json_row(const Table& t, const std::vector<Cell>& row, int precision) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < t.columns.size(); ++i) obj[t.columns[i]] = json_cell(row[i], precision);
  return obj;
}

void write(const Table& t, const RunConfig& cfg, std::ostream& out) {
  if (cfg.format == Format::kJson) {
    for (const auto& row : t.rows) out << json_row(t, row, cfg.precision).dump() << '\n';
    return;
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i], cfg.precision);
    out << '\n';
  }
}

std::vector<double> grid_points(const GridRange& g) {
  const auto n = static_cast<long>(std::floor((g.to - g.from) / g.step + 1e-9)) + 1;
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) xs.push_back(g.from + static_cast<double>(i) * g.step);
  return xs;
}

Strategy strategy_for(const RunConfig& cfg, const ScaleSet& set) {
  if (cfg.strategy) return *cfg.strategy;
  return optimize(set, cfg.costs, cfg.optimizer).strategy;
}

int eval_scale(const RunConfig& cfg, const Flags& flags, std::ostream& out) {
  const double q = cfg.scale_q.value_or(cfg.costs.q);
  const ScaleSet set(cfg.model, q);
  Table t{{"x", "W", "Wp", "Z", "Zbar", "H", "G"}, {}};
  if (flags.certify) {
    t.columns.push_back("theta");
    t.columns.push_back("laplace_residual");
  }
  bool certified = true;
  const auto xs = grid_points(cfg.grid.value_or(GridRange{}));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double wp = x > 0.0 ? set.w_prime(x) : x == 0.0 ? set.w_prime_at_zero() : 0.0;
    // H and G at 0 are the right limits; below 0 W vanishes.
    double h = 1.0;
    double g = 0.0;
    if (x > 0.0) {
      h = set.h_func(x);
      g = set.g_func(cfg.costs.phi, x);
    } else if (x == 0.0) {
      const double w0 = set.w(0.0);
      h = 1.0 - q * w0 * w0 / wp;
      g = cfg.costs.phi * q * w0 * w0 + (1.0 - cfg.costs.phi) * wp;
    }
    std::vector<Cell> row{x, set.w(x), wp, set.z(x), set.zbar(x), h, g};
    if (flags.certify) {
      const double theta = set.phi_q() + 0.5 * static_cast<double>(i + 1);
      const double r = set.laplace_identity_check(theta);
      certified = certified && r < 1e-8;
      row.emplace_back(theta);
      row.emplace_back(r);
    }
    t.rows.push_back(std::move(row));
  }
  write(t, cfg, out);
  return certified ? 0 : 4;
}

Table sweep_table(const RunConfig& cfg, const Sweep& sweep) {
  Table t{{sweep.parameter, "z1", "z2"}, {}};
  for (double v : sweep.values()) {
    Costs costs = cfg.costs;
    if (sweep.parameter == "c") costs.c = v;
    if (sweep.parameter == "phi") costs.phi = v;
    if (sweep.parameter == "q") costs.q = v;
    validate(costs);
    const ScaleSet set(cfg.model, costs.q);
    const auto rep = optimize(set, costs, cfg.optimizer);
    t.rows.push_back({v, rep.strategy.z1, rep.strategy.z2});
  }
  return t;
}

int optimize_cmd(const RunConfig& cfg, const Flags& flags, std::ostream& out) {
  if (flags.sweep) {
    write(sweep_table(cfg, *flags.sweep), cfg, out);
    return 0;
  }
  const ScaleSet set(cfg.model, cfg.costs.q);
  const auto rep = optimize(set, cfg.costs, cfg.optimizer);
  Table t{{"z1", "z2", "xi", "foc_dz1", "foc_dz2", "identity_residual", "hessian_check", "d11",
           "d12", "d22", "search_bound_z0", "grid_points", "simplex_iterations",
           "newton_iterations", "on_z1_boundary"},
          {}};
  t.rows.push_back({rep.strategy.z1, rep.strategy.z2, rep.xi_value, rep.foc_residuals.first,
                    rep.foc_residuals.second, rep.identity_residual, to_string(rep.hessian_check),
                    rep.hessian[0], rep.hessian[1], rep.hessian[2], rep.search_bound_z0,
                    std::int64_t{rep.grid_stats.grid_points},
                    std::int64_t{rep.grid_stats.simplex_iterations},
                    std::int64_t{rep.grid_stats.newton_iterations}, rep.grid_stats.on_z1_boundary});
  write(t, cfg, out);
  return 0;
}

int tables_cmd(const RunConfig& cfg, std::ostream& out) {
  write(sweep_table(cfg, parse_sweep("c=0.01:0.20:0.01")), cfg, out);
  if (cfg.format == Format::kCsv) out << '\n';
  write(sweep_table(cfg, parse_sweep("phi=1.01:1.20:0.01")), cfg, out);
  return 0;
}

int value_cmd(const RunConfig& cfg, const Flags& flags, std::ostream& out) {
  const ScaleSet set(cfg.model, cfg.costs.q);
  const Strategy s = strategy_for(cfg, set);
  Table t{{"x", "V", "f", "g", "branch"}, {}};
  if (flags.with_mc) {
    t.columns.insert(t.columns.end(), {"mc", "mc_stderr", "mc_z"});
  }
  bool agree = true;
  for (double x : grid_points(cfg.grid.value_or(GridRange{0.0, 4.0, 0.05}))) {
    const auto r = value_function(set, cfg.costs, s, x);
    std::vector<Cell> row{x, r.value, r.dividends_part, r.injections_part, to_string(r.branch)};
    if (flags.with_mc) {
      if (x < 0.0) throw DomainError("--with-mc needs grid points x >= 0");
      const auto e = estimate_value(cfg.model, cfg.costs, s, x, cfg.sim);
      const double diff = e.mean - r.value;
      const double z = e.std_error > 0.0 ? diff / e.std_error : (diff == 0.0 ? 0.0 : INFINITY);
      agree = agree && std::abs(z) <= 3.0;
      row.insert(row.end(), {e.mean, e.std_error, z});
    }
    t.rows.push_back(std::move(row));
  }
  write(t, cfg, out);
  return agree ? 0 : 4;
}

int xi_surface_cmd(const RunConfig& cfg, const Flags& flags, std::ostream& out) {
  const ScaleSet set(cfg.model, cfg.costs.q);
  const auto rep = optimize(set, cfg.costs, cfg.optimizer);
  if (flags.g_curve) {
    Table t{{"x", "G"}, {}};
    for (double x : grid_points(GridRange{0.0, rep.strategy.z2 + 20.0, 0.01})) {
      const double g = x > 0.0 ? set.g_func(cfg.costs.phi, x)
                               : cfg.costs.phi * cfg.costs.q * set.w(0.0) * set.w(0.0) +
                                     (1.0 - cfg.costs.phi) * set.w_prime_at_zero();
      t.rows.push_back({x, g});
    }
    write(t, cfg, out);
    return 0;
  }
  Table t{{"z1", "z2", "xi", "maximizer"}, {}};
  const auto axis = grid_points(GridRange{0.0, cfg.surface_max, cfg.surface_step});
  for (double z1 : axis) {
    for (double z2 : axis) {
      if (z2 < z1 + cfg.costs.c - 1e-12) continue;
      // Cells on the edge z2 = z1 + c can fall just short of it in floating point.
      t.rows.push_back({z1, z2, xi(set, cfg.costs, z1, std::max(z2, z1 + cfg.costs.c)), false});
    }
  }
  t.rows.push_back({rep.strategy.z1, rep.strategy.z2, rep.xi_value, true});
  write(t, cfg, out);
  return 0;
}

int verify_cmd(const RunConfig& cfg, std::ostream& out) {
  const ScaleSet set(cfg.model, cfg.costs.q);
  const Strategy s = strategy_for(cfg, set);
  const auto rep = check_hjb(set, cfg.costs, s, cfg.hjb);
  Table summary{{"z1", "z2", "pass", "grid_points", "residual_below", "worst_above",
                 "max_abs_value", "slope_violations", "transaction_violations", "excluded"},
                {}};
  summary.rows.push_back({s.z1, s.z2, rep.pass, static_cast<std::int64_t>(rep.grid.size()),
                          rep.residual_below, rep.worst_above, rep.max_abs_value,
                          std::int64_t{rep.slope_violations},
                          std::int64_t{rep.transaction_violations},
                          static_cast<std::int64_t>(rep.excluded.size())});
  Table violations{{"kind", "x", "y", "amount"}, {}};
  for (const auto& v : rep.violations) violations.rows.push_back({v.kind, v.x, v.y, v.amount});
  if (cfg.format == Format::kJson) {
    auto obj = json_row(summary, summary.rows.front(), cfg.precision);
    obj["excluded_points"] = nlohmann::ordered_json::array();
    for (double x : rep.excluded) obj["excluded_points"].push_back(round_to(x, cfg.precision));
    obj["violations"] = nlohmann::ordered_json::array();
    for (const auto& row : violations.rows) {
      obj["violations"].push_back(json_row(violations, row, cfg.precision));
    }
    out << obj.dump() << '\n';
  } else {
    write(summary, cfg, out);
    out << '\n';
    write(violations, cfg, out);
  }
  return rep.pass ? 0 : 4;
}

int simulate_cmd(const RunConfig& cfg, std::ostream& out) {
  validate(cfg.sim);
  if (cfg.exit_b) {
    Table t{{"x0", "b", "mean", "stderr", "n_paths", "truncation_bound"}, {}};
    for (double x0 : cfg.x0) {
      const auto e = estimate_exit_laplace(cfg.model, cfg.costs.q, cfg.sim, x0, *cfg.exit_b);
      t.rows.push_back({x0, *cfg.exit_b, e.mean, e.std_error, e.n_paths, e.truncation_bound});
    }
    write(t, cfg, out);
    return 0;
  }
  Strategy s;
  if (cfg.strategy) {
    s = *cfg.strategy;
  } else {
    s = strategy_for(cfg, ScaleSet(cfg.model, cfg.costs.q));
  }
  Table t{{"x0", "z1", "z2", "mean", "stderr", "n_paths", "dividends_mean", "dividends_stderr",
           "injections_mean", "injections_stderr", "truncation_bound", "note"},
          {}};
  for (double x0 : cfg.x0) {
    const auto e = estimate_value(cfg.model, cfg.costs, s, x0, cfg.sim);
    t.rows.push_back({x0, s.z1, s.z2, e.mean, e.std_error, e.n_paths, e.dividends_mean,
                      e.dividends_stderr, e.injections_mean, e.injections_stderr,
                      e.truncation_bound, e.discretization_note});
  }
  write(t, cfg, out);
  return 0;
}

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError("--sweep: bad " + what + " '" + text + "'");
  }
  return v;
}

}  // namespace

Sweep parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("--sweep: expected name=from:to:step");
  Sweep s;
  s.parameter = text.substr(0, eq);
  if (s.parameter != "c" && s.parameter != "phi" && s.parameter != "q") {
    throw ConfigError("--sweep: parameter must be c, phi or q, got '" + s.parameter + "'");
  }
  const std::string range = text.substr(eq + 1);
  const auto a = range.find(':');
  const auto b = a == std::string::npos ? a : range.find(':', a + 1);
  if (b == std::string::npos) throw ConfigError("--sweep: expected name=from:to:step");
  s.from = parse_number(range.substr(0, a), "start");
  s.to = parse_number(range.substr(a + 1, b - a - 1), "end");
  s.step = parse_number(range.substr(b + 1), "step");
  if (!(s.step > 0.0) || s.to < s.from) throw ConfigError("--sweep: empty or reversed range");
  return s;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"eval-scale", "optimize", "value", "xi-surface",
                                              "verify",     "simulate", "tables"};
  return names;
}

int run_command(const std::string& name, const RunConfig& cfg, const Flags& flags,
                std::ostream& out, std::ostream& err) {
  try {
    if (name == "eval-scale") return eval_scale(cfg, flags, out);
    if (name == "optimize") return optimize_cmd(cfg, flags, out);
    if (name == "tables") return tables_cmd(cfg, out);
    if (name == "value") return value_cmd(cfg, flags, out);
    if (name == "xi-surface") return xi_surface_cmd(cfg, flags, out);
    if (name == "verify") return verify_cmd(cfg, out);
    if (name == "simulate") return simulate_cmd(cfg, out);
    throw ConfigError("unknown command '" + name + "'");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const UnsupportedError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "error: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const InconsistencyError& e) {
    err << "error: inconsistent results: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace idci::cli

#include "idci/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "idci/errors.hpp"

namespace idci::cli {
namespace {

struct Key {
  const char* section;
  const char* name;
};

constexpr Key kSchema[] = {
    {"model", "variant"},      {"model", "mu"},          {"model", "sigma"},
    {"model", "beta"},         {"model", "lambda"},      {"model", "alpha_jump"},
    {"model", "eta"},          {"costs", "q"},           {"costs", "c"},
    {"costs", "phi"},          {"strategy", "z1"},       {"strategy", "z2"},
    {"scale", "scale_q"},      {"grid", "x_min"},        {"grid", "x_max"},
    {"grid", "x_step"},        {"optimizer", "grid_n"},  {"run", "threads"},
    {"surface", "z_max"},      {"surface", "z_step"},    {"verify", "hjb_x_min"},
    {"verify", "hjb_x_max"},   {"verify", "hjb_step"},   {"verify", "fd_step"},
    {"verify", "tol_eq"},      {"verify", "tol_ineq"},   {"sim", "dt"},
    {"sim", "horizon"},        {"sim", "n_paths"},       {"sim", "seed"},
    {"sim", "bridge_correction"}, {"sim", "x0"},         {"sim", "exit_b"},
    {"output", "format"},      {"output", "path"},       {"output", "precision"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool known(const std::string& full) {
  return std::any_of(std::begin(kSchema), std::end(kSchema), [&](const Key& k) {
    return full == std::string(k.section) + "." + k.name;
  });
}

double parse_double(const std::string& text, const std::string& key, const std::string& where) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ConfigError(where + ": " + key + ": expected a finite number, got '" + text + "'");
  }
  return v;
}

long long parse_int(const std::string& text, const std::string& key, const std::string& where) {
  long long v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError(where + ": " + key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& key, const std::string& where) {
  if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "off" || text == "no") return false;
  throw ConfigError(where + ": " + key + ": expected true or false, got '" + text + "'");
}

}  // namespace

std::vector<double> Sweep::values() const {
  const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (long i = 0; i < n; ++i) {
    // Round to the step's decimal grid so 0.01 * 7 prints as 0.07.
    out.push_back(std::round((from + static_cast<double>(i) * step) * 1e10) / 1e10);
  }
  return out;
}

std::string qualify(const std::string& key) {
  if (key.find('.') != std::string::npos) {
    if (!known(key)) throw ConfigError("unknown key '" + key + "'");
    return key;
  }
  std::string found;
  for (const auto& k : kSchema) {
    if (key == k.name) {
      found = std::string(k.section) + "." + k.name;
      break;
    }
  }
  if (found.empty()) throw ConfigError("unknown key '" + key + "'");
  return found;
}

void ConfigSource::parse(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = origin + ":" + std::to_string(number);
    const auto hash = line.find_first_of("#;");
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(body.substr(1, body.size() - 2));
      const bool any = std::any_of(std::begin(kSchema), std::end(kSchema),
                                   [&](const Key& k) { return section == k.section; });
      if (!any) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside of a section");
    const std::string full = section + "." + key;
    if (!known(full)) throw ConfigError(where + ": unknown key '" + key + "' in [" + section + "]");
    if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
    entries_[full] = {value, where};
  }
}

void ConfigSource::set(const std::string& key, const std::string& value, const std::string& origin) {
  std::string full;
  try {
    full = qualify(key);
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  entries_[full] = {trim(value), origin};
}

RunConfig ConfigSource::build() const {
  RunConfig cfg;
  const auto find = [&](const char* full) -> const Entry* {
    const auto it = entries_.find(full);
    return it == entries_.end() ? nullptr : &it->second;
  };
  const auto where = [&](const char* full) {
    const Entry* e = find(full);
    return e ? e->where : std::string("defaults");
  };
  const auto num = [&](const char* full, double& out) {
    if (const Entry* e = find(full)) out = parse_double(e->value, full, e->where);
  };
  const auto opt_num = [&](const char* full) -> std::optional<double> {
    if (const Entry* e = find(full)) return parse_double(e->value, full, e->where);
    return std::nullopt;
  };
  const auto integer = [&](const char* full, auto& out, long long lo) {
    if (const Entry* e = find(full)) {
      const long long v = parse_int(e->value, full, e->where);
      if (v < lo) throw ConfigError(e->where + ": " + full + " must be >= " + std::to_string(lo));
      out = static_cast<std::remove_reference_t<decltype(out)>>(v);
    }
  };

  // Model: only the keys of the chosen variant may appear.
  std::string variant = "brownian";
  if (const Entry* e = find("model.variant")) variant = e->value;
  const auto reject = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      if (const Entry* e = find(k)) {
        throw ConfigError(e->where + ": " + k + " is not a parameter of variant " + variant);
      }
    }
  };
  if (variant == "brownian") {
    BrownianDrift m{1.0, 0.36};
    num("model.mu", m.mu);
    num("model.sigma", m.sigma);
    reject({"model.beta", "model.lambda", "model.alpha_jump", "model.eta"});
    cfg.model = m;
  } else if (variant == "fixed_jump") {
    FixedJumpCL m;
    num("model.beta", m.beta);
    num("model.lambda", m.lambda);
    num("model.alpha_jump", m.alpha_jump);
    reject({"model.mu", "model.sigma", "model.eta"});
    cfg.model = m;
  } else if (variant == "exp_jump") {
    ExpJumpCL m;
    num("model.beta", m.beta);
    num("model.lambda", m.lambda);
    num("model.eta", m.eta);
    reject({"model.mu", "model.sigma", "model.alpha_jump"});
    cfg.model = m;
  } else {
    throw ConfigError(where("model.variant") +
                      ": model.variant must be brownian, fixed_jump or exp_jump, got '" + variant + "'");
  }
  try {
    validate(cfg.model);
  } catch (const DomainError& e) {
    // Point at the parameter named in the message when there is one.
    std::string at = where("model.variant");
    const std::string msg = e.what();
    for (const auto& k : kSchema) {
      const std::string full = std::string("model.") + k.name;
      if (std::string(k.section) == "model" && msg.rfind(k.name, 0) == 0 && find(full.c_str())) {
        at = where(full.c_str());
      }
    }
    throw ConfigError(at + ": " + msg);
  }

  num("costs.q", cfg.costs.q);
  num("costs.c", cfg.costs.c);
  num("costs.phi", cfg.costs.phi);
  try {
    validate(cfg.costs);
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    const char* key = msg.rfind("q ", 0) == 0 ? "costs.q" : msg.rfind("c ", 0) == 0 ? "costs.c" : "costs.phi";
    throw ConfigError(where(key) + ": " + msg);
  }

  const auto z1 = opt_num("strategy.z1");
  const auto z2 = opt_num("strategy.z2");
  if (z1.has_value() != z2.has_value()) {
    throw ConfigError(where(z1 ? "strategy.z1" : "strategy.z2") +
                      ": strategy needs both z1 and z2");
  }
  if (z1) {
    cfg.strategy = Strategy{*z1, *z2, false};
    try {
      validate(*cfg.strategy, cfg.costs);
    } catch (const DomainError& e) {
      throw ConfigError(where("strategy.z2") + ": " + e.what());
    }
  }

  cfg.scale_q = opt_num("scale.scale_q");
  if (cfg.scale_q && !(*cfg.scale_q >= 0.0)) {
    throw ConfigError(where("scale.scale_q") + ": scale_q must be >= 0");
  }

  if (find("grid.x_min") || find("grid.x_max") || find("grid.x_step")) {
    GridRange g;
    num("grid.x_min", g.from);
    num("grid.x_max", g.to);
    num("grid.x_step", g.step);
    if (!(g.step > 0.0)) throw ConfigError(where("grid.x_step") + ": x_step must be > 0");
    if (!(g.to >= g.from)) throw ConfigError(where("grid.x_max") + ": x_max must be >= x_min");
    cfg.grid = g;
  }

  integer("optimizer.grid_n", cfg.optimizer.grid_n, 3);
  integer("run.threads", cfg.optimizer.threads, 1);
  cfg.sim.threads = cfg.optimizer.threads;

  num("surface.z_max", cfg.surface_max);
  num("surface.z_step", cfg.surface_step);
  if (!(cfg.surface_step > 0.0)) throw ConfigError(where("surface.z_step") + ": z_step must be > 0");
  if (!(cfg.surface_max > 0.0)) throw ConfigError(where("surface.z_max") + ": z_max must be > 0");

  num("verify.hjb_x_min", cfg.hjb.x_min);
  num("verify.hjb_x_max", cfg.hjb.x_max);
  num("verify.hjb_step", cfg.hjb.step);
  num("verify.fd_step", cfg.hjb.fd_step);
  num("verify.tol_eq", cfg.hjb.tol_eq);
  num("verify.tol_ineq", cfg.hjb.tol_ineq);
  if (!(cfg.hjb.x_min > 0.0)) throw ConfigError(where("verify.hjb_x_min") + ": hjb_x_min must be > 0");
  if (!(cfg.hjb.step > 0.0)) throw ConfigError(where("verify.hjb_step") + ": hjb_step must be > 0");
  if (!(cfg.hjb.fd_step > 0.0)) throw ConfigError(where("verify.fd_step") + ": fd_step must be > 0");

  num("sim.dt", cfg.sim.dt);
  num("sim.horizon", cfg.sim.horizon);
  integer("sim.n_paths", cfg.sim.n_paths, 1);
  if (const Entry* e = find("sim.seed")) {
    const long long s = parse_int(e->value, "sim.seed", e->where);
    if (s < 0) throw ConfigError(e->where + ": sim.seed must be >= 0");
    cfg.sim.seed = static_cast<std::uint64_t>(s);
  }
  if (const Entry* e = find("sim.bridge_correction")) {
    cfg.sim.bridge_correction = parse_bool(e->value, "sim.bridge_correction", e->where);
  }
  if (!(cfg.sim.dt > 0.0)) throw ConfigError(where("sim.dt") + ": dt must be > 0");
  if (!(cfg.sim.horizon > 0.0)) throw ConfigError(where("sim.horizon") + ": horizon must be > 0");
  if (const Entry* e = find("sim.x0")) {
    cfg.x0.clear();
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const double v = parse_double(trim(item), "sim.x0", e->where);
      if (v < 0.0) throw ConfigError(e->where + ": sim.x0 entries must be >= 0");
      cfg.x0.push_back(v);
    }
    if (cfg.x0.empty()) throw ConfigError(e->where + ": sim.x0 is empty");
  }
  cfg.exit_b = opt_num("sim.exit_b");
  if (cfg.exit_b && !(*cfg.exit_b > 0.0)) throw ConfigError(where("sim.exit_b") + ": exit_b must be > 0");

  if (const Entry* e = find("output.format")) {
    if (e->value == "csv") {
      cfg.format = Format::kCsv;
    } else if (e->value == "json") {
      cfg.format = Format::kJson;
    } else {
      throw ConfigError(e->where + ": output.format must be csv or json, got '" + e->value + "'");
    }
  }
  if (const Entry* e = find("output.path")) cfg.output_path = e->value;
  integer("output.precision", cfg.precision, 0);
  if (cfg.precision > 17) throw ConfigError(where("output.precision") + ": precision must be <= 17");
  return cfg;
}

}  // namespace idci::cli

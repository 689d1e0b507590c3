#include "config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stcli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& v, const std::string& where) {
  T out{};
  const char* first = v.data();
  const char* last = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw std::invalid_argument(where + ": cannot parse '" + v + "' as a number");
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, ExperimentConfig cfg) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(lineno);
    if (eq == std::string::npos) throw std::invalid_argument(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "command") cfg.command = val;
    else if (key == "target") cfg.target = val;
    else if (key == "potential") cfg.potential = val;
    else if (key == "kernel") cfg.kernel = val;
    else if (key == "nu") cfg.nu = parse_number<int>(val, where);
    else if (key == "beta") cfg.beta = parse_number<double>(val, where);
    else if (key == "grid-a") cfg.grid_a = parse_number<double>(val, where);
    else if (key == "grid-b") cfg.grid_b = parse_number<double>(val, where);
    else if (key == "grid-m") cfg.grid_m = parse_number<int>(val, where);
    else if (key == "m-max") cfg.m_max = parse_number<int>(val, where);
    else if (key == "gh-points") cfg.gh_points = parse_number<int>(val, where);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(val, where);
    else if (key == "samples") cfg.samples = parse_number<long>(val, where);
    else if (key == "truncation") cfg.truncation = parse_number<int>(val, where);
    else if (key == "levels") cfg.levels = parse_number<int>(val, where);
    else if (key == "x") cfg.x = parse_number<double>(val, where);
    else if (key == "xp") cfg.xp = parse_number<double>(val, where);
    else if (key == "n-ref") cfg.n_ref = parse_number<int>(val, where);
    else if (key == "tol") cfg.tol = parse_number<double>(val, where);
    else if (key == "out") cfg.out = val;
    else throw std::invalid_argument(where + ": unknown key '" + key + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream os;
  auto line = [&](const char* k, const std::string& v) {
    if (!v.empty()) os << k << " = " << v << '\n';
  };
  line("command", c.command);
  line("target", c.target);
  line("potential", c.potential);
  line("kernel", c.kernel);
  line("nu", std::to_string(c.nu));
  if (c.beta) line("beta", fmt(*c.beta));
  if (c.grid_a) line("grid-a", fmt(*c.grid_a));
  if (c.grid_b) line("grid-b", fmt(*c.grid_b));
  if (c.grid_m) line("grid-m", std::to_string(*c.grid_m));
  if (c.m_max) line("m-max", std::to_string(*c.m_max));
  line("gh-points", std::to_string(c.gh_points));
  line("seed", std::to_string(c.seed));
  line("samples", std::to_string(c.samples));
  line("truncation", std::to_string(c.truncation));
  line("levels", std::to_string(c.levels));
  line("x", fmt(c.x));
  line("xp", fmt(c.xp));
  line("n-ref", std::to_string(c.n_ref));
  if (c.tol) line("tol", fmt(*c.tol));
  line("out", c.out);
  return os.str();
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j = {{"command", c.command},     {"target", c.target},
                      {"potential", c.potential}, {"kernel", c.kernel},
                      {"nu", c.nu},               {"gh_points", c.gh_points},
                      {"seed", c.seed},           {"samples", c.samples},
                      {"truncation", c.truncation}, {"levels", c.levels},
                      {"x", c.x},                 {"xp", c.xp},
                      {"n_ref", c.n_ref},         {"out", c.out}};
  auto opt = [&](const char* k, const auto& v) {
    if (v) j[k] = *v;
    else j[k] = nullptr;
  };
  opt("beta", c.beta);
  opt("grid_a", c.grid_a);
  opt("grid_b", c.grid_b);
  opt("grid_m", c.grid_m);
  opt("m_max", c.m_max);
  opt("tol", c.tol);
  return j;
}

}  // namespace stcli

#include "squash/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "squash/errors.hpp"

namespace squash {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  std::ostringstream os;
  os << "config line " << line << ": " << msg;
  throw ConfigError(os.str());
}

double to_double(const std::string& v, int line, const std::string& key) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) fail(line, "'" + key + "' expects a number, got '" + v + "'");
  return x;
}

template <class Int>
Int to_int(const std::string& v, int line, const std::string& key) {
  Int x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) fail(line, "'" + key + "' expects an integer, got '" + v + "'");
  return x;
}

std::string real(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

void RunConfig::validate() const {
  try {
    model.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid model parameter: ") + e.what());
  }
  if (dim < 2) throw ConfigError("dim must be >= 2");
  if (!(dt > 0)) throw ConfigError("dt must be > 0");
  if (!(t_final >= 0)) throw ConfigError("t_final must be >= 0");
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
  if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  if (checkpoints < 1) throw ConfigError("checkpoints must be >= 1");
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  using Setter = std::function<void(const std::string&, int, const std::string&)>;
  auto dbl = [](double& field) -> Setter {
    return [&field](const std::string& v, int line, const std::string& k) { field = to_double(v, line, k); };
  };
  const std::map<std::string, Setter> setters = {
      {"gamma", dbl(c.model.gamma)},
      {"kappa", dbl(c.model.kappa)},
      {"chi", dbl(c.model.chi)},
      {"g", dbl(c.model.g)},
      {"phi", dbl(c.model.phi)},
      {"eta", dbl(c.model.eta)},
      {"nbar", dbl(c.model.nbar)},
      {"dt", dbl(c.dt)},
      {"t_final", dbl(c.t_final)},
      {"dim", [&](const std::string& v, int l, const std::string& k) { c.dim = to_int<int>(v, l, k); }},
      {"n_traj", [&](const std::string& v, int l, const std::string& k) { c.n_traj = to_int<int>(v, l, k); }},
      {"seed", [&](const std::string& v, int l, const std::string& k) { c.seed = to_int<std::uint64_t>(v, l, k); }},
      {"workers", [&](const std::string& v, int l, const std::string& k) { c.workers = to_int<int>(v, l, k); }},
      {"checkpoints", [&](const std::string& v, int l, const std::string& k) { c.checkpoints = to_int<int>(v, l, k); }},
      {"out_dir", [&](const std::string& v, int, const std::string&) { c.out_dir = v; }},
      {"format", [&](const std::string& v, int, const std::string&) { c.format = v; }},
  };

  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) fail(line, "unknown key '" + key + "'");
    if (!seen.insert(key).second) fail(line, "duplicate key '" + key + "'");
    if (value.empty()) fail(line, "missing value for '" + key + "'");
    it->second(value, line, key);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const RunConfig& c) {
  std::ostringstream os;
  os << "gamma = " << real(c.model.gamma) << "\n"
     << "kappa = " << real(c.model.kappa) << "\n"
     << "chi = " << real(c.model.chi) << "\n"
     << "g = " << real(c.model.g) << "\n"
     << "phi = " << real(c.model.phi) << "\n"
     << "eta = " << real(c.model.eta) << "\n"
     << "nbar = " << real(c.model.nbar) << "\n"
     << "dim = " << c.dim << "\n"
     << "dt = " << real(c.dt) << "\n"
     << "t_final = " << real(c.t_final) << "\n"
     << "n_traj = " << c.n_traj << "\n"
     << "seed = " << c.seed << "\n"
     << "out_dir = " << c.out_dir << "\n"
     << "format = " << c.format << "\n"
     << "workers = " << c.workers << "\n"
     << "checkpoints = " << c.checkpoints << "\n";
  return os.str();
}

}  // namespace squash

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "twophase/harness.hpp"

namespace twophase {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  return d;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("key '" + key + "': not an integer: '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  const auto s = lower(v);
  if (s == "on" || s == "true" || s == "yes" || s == "1") return true;
  if (s == "off" || s == "false" || s == "no" || s == "0") return false;
  throw ConfigError("key '" + key + "': expected on/off, got '" + v + "'");
}

Membership to_membership(const std::string& key, const std::string& v) {
  const auto s = lower(v);
  if (s == "parametrization" || s == "parametrisation") return Membership::Parametrization;
  if (s == "paper-text") return Membership::PaperText;
  throw ConfigError("key '" + key + "': expected parametrization or paper-text, got '" + v + "'");
}

std::vector<int> dims(const std::string& key, const std::string& v, std::size_t n) {
  std::vector<int> d;
  try {
    d = parse_dims(v);
  } catch (const SamplingError& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
  if (d.size() != n) throw ConfigError("key '" + key + "': expected " + std::to_string(n) + " factors in '" + v + "'");
  return d;
}

std::vector<int> int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<int>(to_int(key, trim(item))));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

const char* membership_name(Membership m) { return m == Membership::Parametrization ? "parametrization" : "paper-text"; }

void apply(RunConfig& c, const std::string& key, const std::string& v) {
  auto& tr = c.train;
  auto& sp = c.sampling;
  if (key == "interior") {
    const auto d = dims(key, v, 3);
    sp.interior = {d[0], d[1], d[2]};
  } else if (key == "boundary") {
    const auto d = dims(key, v, 3);
    if (d[1] != 4) throw ConfigError("key 'boundary': the middle factor counts sides and must be 4");
    sp.boundary = {d[0], d[1], d[2]};
  } else if (key == "interface") {
    const auto d = dims(key, v, 2);
    sp.interface = {d[0], d[1]};
  } else if (key == "initial") {
    const auto d = dims(key, v, 2);
    sp.initial = {d[0], d[1]};
  } else if (key == "sampling_mode") {
    const auto s = lower(v);
    if (s == "uniform") sp.mode = SamplingMode::Uniform;
    else if (s == "random" || s == "seeded-random") sp.mode = SamplingMode::SeededRandom;
    else throw ConfigError("key 'sampling_mode': expected uniform or random");
  } else if (key == "seed") {
    tr.seed = static_cast<std::uint64_t>(to_int(key, v));
    sp.seed = tr.seed;
  } else if (key == "pretrain_epochs") {
    tr.pretrain_epochs = to_int(key, v);
  } else if (key == "main_epochs") {
    tr.main_epochs = to_int(key, v);
  } else if (key == "pretrain_lr") {
    tr.pretrain_lr = to_double(key, v);
  } else if (key == "lr_max") {
    tr.lr_max = to_double(key, v);
  } else if (key == "lr_min") {
    tr.lr_min = to_double(key, v);
  } else if (key == "lr_schedule") {
    const auto s = lower(v);
    if (s == "cosine") tr.main_schedule = LrSchedule::Cosine;
    else if (s == "constant") tr.main_schedule = LrSchedule::Constant;
    else throw ConfigError("key 'lr_schedule': expected cosine or constant");
  } else if (key == "weight_mode") {
    const auto s = lower(v);
    if (s == "fixed" || s == "fixed-10") tr.weight_mode = WeightMode::Fixed;
    else if (s == "adaptive") tr.weight_mode = WeightMode::Adaptive;
    else throw ConfigError("key 'weight_mode': expected fixed or adaptive");
  } else if (key == "weight_interface") {
    tr.fixed_interface_weight = to_double(key, v);
  } else if (key == "weight_boundary") {
    tr.fixed_boundary_weight = to_double(key, v);
  } else if (key == "weight_observation") {
    tr.observation_weight = to_double(key, v);
  } else if (key == "cadence") {
    tr.interface_update_cadence = to_int(key, v);
  } else if (key == "hidden") {
    auto h = int_list(key, v);
    h.insert(h.begin(), 3);
    h.push_back(3);
    tr.shape = h;
  } else if (key == "shard_size") {
    const auto s = to_int(key, v);
    if (s < 1) throw ConfigError("key 'shard_size' must be >= 1");
    tr.shard_size = static_cast<std::size_t>(s);
  } else if (key == "progress_every") {
    tr.progress_every = to_int(key, v);
  } else if (key == "history_every") {
    tr.history_every = to_int(key, v);
  } else if (key == "checkpoint_every") {
    tr.checkpoint_every = to_int(key, v);
  } else if (key == "observation") {
    c.observation = to_bool(key, v);
  } else if (key == "membership") {
    c.membership = to_membership(key, v);
  } else if (key == "observation_coords") {
    c.observation_coords = to_membership(key, v);
  } else if (key == "rho1") {
    c.phase1.rho = to_double(key, v);
  } else if (key == "mu1") {
    c.phase1.mu = to_double(key, v);
  } else if (key == "rho2") {
    c.phase2.rho = to_double(key, v);
  } else if (key == "mu2") {
    c.phase2.mu = to_double(key, v);
  } else if (key == "domain") {
    std::vector<double> b;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) b.push_back(to_double(key, trim(item)));
    if (b.size() != 4 || !(b[0] < b[1]) || !(b[2] < b[3]))
      throw ConfigError("key 'domain': expected xmin,xmax,ymin,ymax with xmin < xmax and ymin < ymax");
    c.box = {b[0], b[1], b[2], b[3]};
  } else if (key == "terminal_time") {
    c.T = to_double(key, v);
  } else if (key == "eval_grid") {
    const auto d = dims(key, v, 3);
    c.eval = {d[0], d[1], d[2]};
  } else if (key == "exact_vertices") {
    c.exact_vertices = static_cast<int>(to_int(key, v));
  } else if (key == "output_dir") {
    c.output_dir = v;
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

}  // namespace

RunConfig preset(int example) {
  RunConfig c;
  c.example = example;
  switch (example) {
    case 1:
      break;
    case 2:
      c.box = {0.0, 3.5, 0.0, 3.5};
      c.phase2 = {1000.0, 1000.0};
      c.observation = true;
      break;
    case 3:
      c.phase2 = {1000.0, 1000.0};
      c.observation = true;
      c.train.weight_mode = WeightMode::Adaptive;
      break;
    default:
      throw ConfigError("example must be 1, 2 or 3");
  }
  return c;
}

RunConfig parse_config(std::istream& is) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = lower(trim(std::string_view(t).substr(0, eq)));
    std::string val = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (seen[key]++) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    entries.emplace_back(std::move(key), std::move(val));
  }

  int example = 1;
  for (const auto& [k, v] : entries)
    if (k == "example") example = static_cast<int>(to_int(k, v));
  RunConfig c = preset(example);
  for (const auto& [k, v] : entries)
    if (k != "example") apply(c, k, v);
  c.train.threads = threads_from_env();

  if (c.T <= 0.0) throw ConfigError("terminal_time must be positive");
  if (!(c.phase1.rho > 0 && c.phase1.mu > 0 && c.phase2.rho > 0 && c.phase2.mu > 0))
    throw ConfigError("densities and viscosities must be positive");
  if (c.observation && c.example == 1) throw ConfigError("observation points are defined for examples 2 and 3 only");
  if (c.exact_vertices < 3) throw ConfigError("exact_vertices must be >= 3");
  if (c.eval.nt < 1) throw ConfigError("eval_grid time count must be >= 1");
  try {
    validate(c.train);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  return parse_config(is);
}

void write_config(std::ostream& os, const RunConfig& c) {
  const auto& sp = c.sampling;
  const auto& tr = c.train;
  std::ostringstream o;
  o.precision(17);
  o << "example = " << c.example << '\n';
  o << "interior = " << format_dims({sp.interior.nx, sp.interior.ny, sp.interior.nt}) << '\n';
  o << "boundary = " << format_dims({sp.boundary.per_side, sp.boundary.sides, sp.boundary.nt}) << '\n';
  o << "interface = " << format_dims({sp.interface.ntheta, sp.interface.nt}) << '\n';
  o << "initial = " << format_dims({sp.initial.nx, sp.initial.ny}) << '\n';
  o << "sampling_mode = " << (sp.mode == SamplingMode::Uniform ? "uniform" : "random") << '\n';
  o << "seed = " << tr.seed << '\n';
  o << "pretrain_epochs = " << tr.pretrain_epochs << '\n';
  o << "main_epochs = " << tr.main_epochs << '\n';
  o << "pretrain_lr = " << tr.pretrain_lr << '\n';
  o << "lr_max = " << tr.lr_max << '\n';
  o << "lr_min = " << tr.lr_min << '\n';
  o << "lr_schedule = " << (tr.main_schedule == LrSchedule::Cosine ? "cosine" : "constant") << '\n';
  o << "weight_mode = " << (tr.weight_mode == WeightMode::Fixed ? "fixed" : "adaptive") << '\n';
  o << "weight_interface = " << tr.fixed_interface_weight << '\n';
  o << "weight_boundary = " << tr.fixed_boundary_weight << '\n';
  o << "weight_observation = " << tr.observation_weight << '\n';
  o << "cadence = " << tr.interface_update_cadence << '\n';
  o << "hidden = ";
  for (std::size_t i = 1; i + 1 < tr.shape.size(); ++i) o << (i > 1 ? "," : "") << tr.shape[i];
  o << '\n';
  o << "shard_size = " << tr.shard_size << '\n';
  o << "progress_every = " << tr.progress_every << '\n';
  o << "history_every = " << tr.history_every << '\n';
  o << "checkpoint_every = " << tr.checkpoint_every << '\n';
  o << "observation = " << (c.observation ? "on" : "off") << '\n';
  o << "membership = " << membership_name(c.membership) << '\n';
  o << "observation_coords = " << membership_name(c.observation_coords) << '\n';
  o << "rho1 = " << c.phase1.rho << '\n';
  o << "mu1 = " << c.phase1.mu << '\n';
  o << "rho2 = " << c.phase2.rho << '\n';
  o << "mu2 = " << c.phase2.mu << '\n';
  o << "domain = " << c.box.xmin << ',' << c.box.xmax << ',' << c.box.ymin << ',' << c.box.ymax << '\n';
  o << "terminal_time = " << c.T << '\n';
  o << "eval_grid = " << format_dims({c.eval.nx, c.eval.ny, c.eval.nt}) << '\n';
  o << "exact_vertices = " << c.exact_vertices << '\n';
  o << "output_dir = " << c.output_dir << '\n';
  os << o.str();
}

std::vector<std::string> check_config(const RunConfig& c) {
  std::vector<std::string> w;
  const bool contrast = c.phase2.rho / c.phase1.rho >= 10.0 || c.phase2.mu / c.phase1.mu >= 10.0;
  if (c.example != 1 && contrast && !c.observation)
    w.push_back("high-contrast run without observation points; the pressure is poorly determined");
  return w;
}

int threads_from_env() {
  const char* s = std::getenv("TWOPHASE_THREADS");
  if (!s || !*s) return 1;
  int n = 0;
  const auto [p, ec] = std::from_chars(s, s + std::char_traits<char>::length(s), n);
  if (ec != std::errc() || *p != '\0' || n < 1) throw ConfigError("TWOPHASE_THREADS must be a positive integer");
  return n;
}

}  // namespace twophase

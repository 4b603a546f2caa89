#include "iterfac/config_file.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "iterfac/textio.hpp"

namespace iterfac {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
  std::ostringstream os;
  os << origin;
  if (line > 0) os << ":" << line;
  os << ": " << what;
  throw ConfigError(os.str(), line);
}

double parse_real(const std::string& origin, int line, const std::string& key,
                  const std::string& value) {
  double out;
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc() || res.ptr != end)
    fail(origin, line, "key '" + key + "': expected a real number, got '" + value + "'");
  return out;
}

template <typename Int>
Int parse_integer(const std::string& origin, int line, const std::string& key,
                  const std::string& value) {
  Int out;
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc() || res.ptr != end)
    fail(origin, line, "key '" + key + "': expected an integer, got '" + value + "'");
  return out;
}

bool parse_bool(const std::string& origin, int line, const std::string& key,
                const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  fail(origin, line, "key '" + key + "': expected true or false, got '" + value + "'");
}

// "kind name=value ..." descriptors shared by priors and costs.
struct Descriptor {
  std::string kind;
  std::map<std::string, double> args;
};

Descriptor parse_descriptor(const std::string& origin, int line, const std::string& key,
                            const std::string& value) {
  std::istringstream is(value);
  Descriptor d;
  is >> d.kind;
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      fail(origin, line, "key '" + key + "': expected name=value, got '" + tok + "'");
    d.args[tok.substr(0, eq)] = parse_real(origin, line, key, tok.substr(eq + 1));
  }
  return d;
}

double take_arg(const std::string& origin, int line, const std::string& key, Descriptor& d,
                const std::string& name) {
  const auto it = d.args.find(name);
  if (it == d.args.end())
    fail(origin, line, "key '" + key + "': missing argument '" + name + "' for " + d.kind);
  const double v = it->second;
  d.args.erase(it);
  return v;
}

void expect_no_args(const std::string& origin, int line, const std::string& key,
                    const Descriptor& d) {
  if (!d.args.empty())
    fail(origin, line, "key '" + key + "': unknown argument '" + d.args.begin()->first + "'");
}

Prior parse_prior(const std::string& origin, int line, const std::string& key,
                  const std::string& value) {
  Descriptor d = parse_descriptor(origin, line, key, value);
  if (d.kind == "gaussian") {
    GaussianPrior g{take_arg(origin, line, key, d, "mean"),
                    take_arg(origin, line, key, d, "variance")};
    expect_no_args(origin, line, key, d);
    return g;
  }
  if (d.kind == "bernoulli_exp") {
    BernoulliExpPrior b{take_arg(origin, line, key, d, "sparsity"),
                        take_arg(origin, line, key, d, "rate")};
    expect_no_args(origin, line, key, d);
    return b;
  }
  if (d.kind == "point_mass") {
    PointMassPrior p{take_arg(origin, line, key, d, "value")};
    expect_no_args(origin, line, key, d);
    return p;
  }
  fail(origin, line, "key '" + key + "': unknown prior kind '" + d.kind + "'");
}

ScalarCost parse_cost(const std::string& origin, int line, const std::string& key,
                      const std::string& value) {
  Descriptor d = parse_descriptor(origin, line, key, value);
  if (d.kind == "zero") {
    expect_no_args(origin, line, key, d);
    return ZeroCost{};
  }
  if (d.kind == "l1") {
    L1Cost c{take_arg(origin, line, key, d, "gamma")};
    expect_no_args(origin, line, key, d);
    return c;
  }
  if (d.kind == "nonneg_l1") {
    NonnegL1Cost c{take_arg(origin, line, key, d, "gamma")};
    expect_no_args(origin, line, key, d);
    return c;
  }
  if (d.kind == "squared_l2") {
    SquaredL2Cost c{take_arg(origin, line, key, d, "weight")};
    expect_no_args(origin, line, key, d);
    return c;
  }
  fail(origin, line, "key '" + key + "': unknown cost kind '" + d.kind + "'");
}

std::vector<double> parse_snr_grid(const std::string& origin, int line, const std::string& value) {
  std::vector<double> grid;
  if (value.find(':') != std::string::npos) {
    const auto parts = split(value, ':');
    if (parts.size() != 3) fail(origin, line, "snr_db range must be lo:step:hi");
    const double lo = parse_real(origin, line, "snr_db", parts[0]);
    const double step = parse_real(origin, line, "snr_db", parts[1]);
    const double hi = parse_real(origin, line, "snr_db", parts[2]);
    if (!(step > 0.0)) fail(origin, line, "snr_db range step must be > 0");
    if (hi < lo) fail(origin, line, "snr_db range must have hi >= lo");
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (int k = 0; k < count; ++k) grid.push_back(lo + k * step);
    return grid;
  }
  for (const std::string& tok : split(value, ','))
    grid.push_back(parse_real(origin, line, "snr_db", tok));
  return grid;
}

// Exact (shortest round-trip) rendering for serialization.
std::string render(double x) {
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string render(const Prior& prior) {
  std::ostringstream os;
  if (const auto* g = std::get_if<GaussianPrior>(&prior))
    os << "gaussian mean=" << render(g->mean) << " variance=" << render(g->variance);
  else if (const auto* b = std::get_if<BernoulliExpPrior>(&prior))
    os << "bernoulli_exp sparsity=" << render(b->sparsity) << " rate=" << render(b->rate);
  else
    os << "point_mass value=" << render(std::get<PointMassPrior>(prior).value);
  return os.str();
}

std::string render(const ScalarCost& cost) {
  std::ostringstream os;
  if (std::holds_alternative<ZeroCost>(cost))
    os << "zero";
  else if (const auto* l1 = std::get_if<L1Cost>(&cost))
    os << "l1 gamma=" << render(l1->gamma);
  else if (const auto* nl1 = std::get_if<NonnegL1Cost>(&cost))
    os << "nonneg_l1 gamma=" << render(nl1->gamma);
  else
    os << "squared_l2 weight=" << render(std::get<SquaredL2Cost>(cost).weight);
  return os.str();
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  static const std::map<std::string, std::vector<std::string>> kSchema = {
      {"problem", {"m", "n", "normalize_factors"}},
      {"priors", {"u", "v"}},
      {"rules", {"families", "cost_u", "cost_v", "lambda_u", "lambda_v"}},
      {"sweep", {"snr_db", "trials", "iters", "master_seed", "baseline", "init_v"}},
      {"output", {"write_trials"}},
  };

  std::map<std::string, Section> sections;
  std::string current;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_no, "malformed section header '" + line + "'");
      current = trim(line.substr(1, line.size() - 2));
      if (kSchema.find(current) == kSchema.end())
        fail(origin, line_no, "unknown section [" + current + "]");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "expected key = value, got '" + line + "'");
    if (current.empty()) fail(origin, line_no, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& allowed = kSchema.at(current);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail(origin, line_no, "unknown key '" + key + "' in section [" + current + "]");
    auto [it, inserted] = sections[current].emplace(key, Entry{value, line_no, false});
    if (!inserted) fail(origin, line_no, "duplicate key '" + key + "' in section [" + current + "]");
  }

  auto lookup = [&](const std::string& section, const std::string& key) -> Entry* {
    auto sit = sections.find(section);
    if (sit == sections.end()) return nullptr;
    auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return nullptr;
    kit->second.used = true;
    return &kit->second;
  };
  auto require = [&](const std::string& section, const std::string& key) -> Entry& {
    Entry* e = lookup(section, key);
    if (e == nullptr) fail(origin, 0, "missing required key '" + key + "' in section [" + section + "]");
    return *e;
  };

  ExperimentConfig cfg;
  {
    Entry& m = require("problem", "m");
    cfg.m = parse_integer<Eigen::Index>(origin, m.line, "m", m.value);
    Entry& n = require("problem", "n");
    cfg.n = parse_integer<Eigen::Index>(origin, n.line, "n", n.value);
    if (Entry* e = lookup("problem", "normalize_factors"))
      cfg.normalize_factors = parse_bool(origin, e->line, "normalize_factors", e->value);
  }
  {
    Entry& u = require("priors", "u");
    cfg.prior_u = parse_prior(origin, u.line, "u", u.value);
    Entry& v = require("priors", "v");
    cfg.prior_v = parse_prior(origin, v.line, "v", v.value);
  }
  {
    Entry& fams = require("rules", "families");
    cfg.families.clear();
    for (const std::string& tok : split(fams.value, ',')) {
      try {
        cfg.families.push_back(parse_family(tok));
      } catch (const std::invalid_argument& e) {
        fail(origin, fams.line, e.what());
      }
    }
    if (Entry* e = lookup("rules", "cost_u")) cfg.prox.cost_u = parse_cost(origin, e->line, "cost_u", e->value);
    if (Entry* e = lookup("rules", "cost_v")) cfg.prox.cost_v = parse_cost(origin, e->line, "cost_v", e->value);
    if (Entry* e = lookup("rules", "lambda_u"))
      cfg.prox.lambda_u = parse_real(origin, e->line, "lambda_u", e->value);
    if (Entry* e = lookup("rules", "lambda_v"))
      cfg.prox.lambda_v = parse_real(origin, e->line, "lambda_v", e->value);
  }
  {
    Entry& snr = require("sweep", "snr_db");
    cfg.snr_grid_db = parse_snr_grid(origin, snr.line, snr.value);
    Entry& trials = require("sweep", "trials");
    cfg.trials = parse_integer<int>(origin, trials.line, "trials", trials.value);
    Entry& iters = require("sweep", "iters");
    cfg.iters = parse_integer<int>(origin, iters.line, "iters", iters.value);
    Entry& seed = require("sweep", "master_seed");  // reproducibility: no default
    cfg.master_seed = parse_integer<std::uint64_t>(origin, seed.line, "master_seed", seed.value);
    if (Entry* e = lookup("sweep", "baseline"))
      cfg.baseline = parse_bool(origin, e->line, "baseline", e->value);
    if (Entry* e = lookup("sweep", "init_v")) {
      if (e->value == "prior_mean")
        cfg.random_init_v = false;
      else if (e->value == "random_unit")
        cfg.random_init_v = true;
      else
        fail(origin, e->line, "init_v must be prior_mean or random_unit");
    }
  }
  if (Entry* e = lookup("output", "write_trials"))
    cfg.write_trials = parse_bool(origin, e->line, "write_trials", e->value);

  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    fail(origin, 0, e.what());
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what(), 0);
  }
  return parse_config_text(text, path);
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream os;
  os << "[problem]\n";
  os << "m = " << config.m << "\n";
  os << "n = " << config.n << "\n";
  os << "normalize_factors = " << (config.normalize_factors ? "true" : "false") << "\n";
  os << "\n[priors]\n";
  os << "u = " << render(config.prior_u) << "\n";
  os << "v = " << render(config.prior_v) << "\n";
  os << "\n[rules]\n";
  os << "families = ";
  for (std::size_t i = 0; i < config.families.size(); ++i)
    os << (i ? ", " : "") << family_name(config.families[i]);
  os << "\n";
  os << "cost_u = " << render(config.prox.cost_u) << "\n";
  os << "cost_v = " << render(config.prox.cost_v) << "\n";
  os << "lambda_u = " << render(config.prox.lambda_u) << "\n";
  os << "lambda_v = " << render(config.prox.lambda_v) << "\n";
  os << "\n[sweep]\n";
  os << "snr_db = ";
  for (std::size_t i = 0; i < config.snr_grid_db.size(); ++i)
    os << (i ? ", " : "") << render(config.snr_grid_db[i]);
  os << "\n";
  os << "trials = " << config.trials << "\n";
  os << "iters = " << config.iters << "\n";
  os << "master_seed = " << config.master_seed << "\n";
  os << "baseline = " << (config.baseline ? "true" : "false") << "\n";
  os << "init_v = " << (config.random_init_v ? "random_unit" : "prior_mean") << "\n";
  os << "\n[output]\n";
  os << "write_trials = " << (config.write_trials ? "true" : "false") << "\n";
  return os.str();
}

bool config_equal(const ExperimentConfig& a, const ExperimentConfig& b) {
  const auto prior_eq = [](const Prior& x, const Prior& y) {
    if (x.index() != y.index()) return false;
    if (const auto* g = std::get_if<GaussianPrior>(&x)) {
      const auto& h = std::get<GaussianPrior>(y);
      return g->mean == h.mean && g->variance == h.variance;
    }
    if (const auto* bx = std::get_if<BernoulliExpPrior>(&x)) {
      const auto& by = std::get<BernoulliExpPrior>(y);
      return bx->sparsity == by.sparsity && bx->rate == by.rate;
    }
    return std::get<PointMassPrior>(x).value == std::get<PointMassPrior>(y).value;
  };
  const auto cost_eq = [](const ScalarCost& x, const ScalarCost& y) {
    if (x.index() != y.index()) return false;
    if (std::holds_alternative<ZeroCost>(x)) return true;
    if (const auto* l = std::get_if<L1Cost>(&x)) return l->gamma == std::get<L1Cost>(y).gamma;
    if (const auto* nl = std::get_if<NonnegL1Cost>(&x))
      return nl->gamma == std::get<NonnegL1Cost>(y).gamma;
    return std::get<SquaredL2Cost>(x).weight == std::get<SquaredL2Cost>(y).weight;
  };
  return a.m == b.m && a.n == b.n && prior_eq(a.prior_u, b.prior_u) &&
         prior_eq(a.prior_v, b.prior_v) && a.families == b.families &&
         cost_eq(a.prox.cost_u, b.prox.cost_u) && cost_eq(a.prox.cost_v, b.prox.cost_v) &&
         a.prox.lambda_u == b.prox.lambda_u && a.prox.lambda_v == b.prox.lambda_v &&
         a.snr_grid_db == b.snr_grid_db && a.trials == b.trials && a.iters == b.iters &&
         a.master_seed == b.master_seed && a.baseline == b.baseline &&
         a.normalize_factors == b.normalize_factors &&
         a.random_init_v == b.random_init_v && a.write_trials == b.write_trials;
}

}  // namespace iterfac

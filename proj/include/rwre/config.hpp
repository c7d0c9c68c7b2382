#ifndef RWRE_CONFIG_HPP
#define RWRE_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rwre/environment.hpp"

namespace rwre {

/// Parse or validation failure; the message names the line and field when known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment {
  moments,
  variance_scan,
  phi_decay,
  identity_check,
  fclt,
  max_drift,
  ychain_exit,
  ychain_excursion,
  occupation,
  counterexample,
};

inline constexpr std::array<std::pair<Experiment, std::string_view>, 10> kExperimentNames{{
    {Experiment::moments, "moments"},
    {Experiment::variance_scan, "variance-scan"},
    {Experiment::phi_decay, "phi-decay"},
    {Experiment::identity_check, "identity-check"},
    {Experiment::fclt, "fclt"},
    {Experiment::max_drift, "max-drift"},
    {Experiment::ychain_exit, "ychain-exit"},
    {Experiment::ychain_excursion, "ychain-excursion"},
    {Experiment::occupation, "occupation"},
    {Experiment::counterexample, "counterexample"},
}};

inline std::string experiment_name(Experiment e) {
  for (const auto& [k, name] : kExperimentNames) {
    if (k == e) return std::string(name);
  }
  return "?";
}

struct Criteria {
  double k_se = 4.0;       // tolerance in standard errors for estimate-vs-oracle checks
  double cov_k_se = 5.0;   // tolerance for FCLT covariance entries
  double alpha = 0.01;     // KS level
  std::size_t min_pass = 8;  // seeds or replicas that must pass
  std::optional<double> exponent_min;
  std::optional<double> exponent_max;
  double envelope = 13.0;   // ychain-exit: slope ceiling
  double ratio = 0.5;       // max-drift: last / first must fall below this
  double escape_scaled_min = 0.25;  // ychain-exit: r * P(escape) floor
  std::optional<double> zero_beyond;  // phi-decay: |x| past which phi must vanish
  bool negative_control = false;
};

struct ExperimentConfig {
  std::string text;  // verbatim input
  Experiment experiment = Experiment::moments;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string format = "json";
  std::string out_dir = ".";

  Model model;

  std::size_t replicas = 0;
  std::size_t walks = 0;
  std::size_t environments = 0;
  std::size_t y_replicas = 0;
  std::int64_t step_cap = 1'000'000;
  std::string chain = "same";
  std::string mean_method = "exact";
  std::string centering = "velocity";

  std::vector<std::int64_t> n;
  std::vector<double> r;
  std::vector<double> x;
  std::vector<double> t;
  std::vector<double> a;
  double epsilon = 0.0;
  std::vector<double> escape_r;
  double escape_r0 = 2.0;
  double escape_budget = 4.0;  // time budget = escape_budget * r^3

  Criteria criteria;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

/// 1-based line of `key` inside `[section]`, 0 when not found.
inline int locate(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line, current;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string s = trim(line);
    if (s.empty() || s[0] == ';' || s[0] == '#') continue;
    if (s.front() == '[' && s.back() == ']') {
      current = trim(std::string_view(s).substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (current == section && trim(std::string_view(s).substr(0, eq)) == key) return no;
  }
  return 0;
}

class Reader {
 public:
  Reader(const std::string& text, const boost::property_tree::ptree& tree) : text_(text), tree_(tree) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& msg) const {
    const int line = locate(text_, section, key);
    std::string where = line > 0 ? "line " + std::to_string(line) + ": " : "";
    throw ConfigError(where + "[" + section + "] " + key + ": " + msg);
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_child_optional(boost::property_tree::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return trim(v->data());
  }

  double number(const std::string& section, const std::string& key, const std::string& s) const {
    // 2^k powers are accepted wherever a real is expected.
    if (const auto caret = s.find('^'); caret != std::string::npos) {
      const double base = number(section, key, s.substr(0, caret));
      const double expo = number(section, key, s.substr(caret + 1));
      return std::pow(base, expo);
    }
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
      fail(section, key, "cannot parse '" + s + "' as a number");
    }
    return v;
  }

  std::int64_t integer(const std::string& section, const std::string& key, const std::string& s) const {
    const double v = number(section, key, s);
    if (v != std::floor(v) || std::abs(v) > 9.0e15) fail(section, key, "'" + s + "' is not an integer");
    return static_cast<std::int64_t>(v);
  }

  template <class T>
  void get(const std::string& section, const std::string& key, T& out) const {
    const auto v = raw(section, key);
    if (!v) return;
    if constexpr (std::is_same_v<T, std::string>) {
      out = *v;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (*v == "true" || *v == "1" || *v == "yes") {
        out = true;
      } else if (*v == "false" || *v == "0" || *v == "no") {
        out = false;
      } else {
        fail(section, key, "expected true or false, got '" + *v + "'");
      }
    } else if constexpr (std::is_same_v<T, double>) {
      out = number(section, key, *v);
    } else if constexpr (std::is_same_v<T, std::optional<double>>) {
      out = number(section, key, *v);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (v->empty() || v->front() == '-') fail(section, key, "expected an unsigned integer, got '" + *v + "'");
      std::uint64_t u = 0;
      const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), u);
      if (ec != std::errc() || p != v->data() + v->size()) fail(section, key, "cannot parse '" + *v + "' as u64");
      out = u;
    } else {
      const std::int64_t i = integer(section, key, *v);
      if constexpr (std::is_unsigned_v<T>) {
        if (i < 0) fail(section, key, "must be nonnegative");
      }
      out = static_cast<T>(i);
    }
  }

  /// Comma-separated list; an item "2^a..2^b" expands to every power of two in between.
  template <class T>
  void list(const std::string& section, const std::string& key, std::vector<T>& out) const {
    const auto v = raw(section, key);
    if (!v) return;
    out.clear();
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(section, key, "empty list item");
      if (const auto dots = item.find(".."); dots != std::string::npos) {
        const std::string lo = trim(item.substr(0, dots)), hi = trim(item.substr(dots + 2));
        if (lo.rfind("2^", 0) != 0 || hi.rfind("2^", 0) != 0) fail(section, key, "ranges must read 2^a..2^b");
        const std::int64_t a = integer(section, key, lo.substr(2)), b = integer(section, key, hi.substr(2));
        if (a > b) fail(section, key, "empty range '" + item + "'");
        for (std::int64_t k = a; k <= b; ++k) out.push_back(static_cast<T>(std::ldexp(1.0, static_cast<int>(k))));
        continue;
      }
      if constexpr (std::is_integral_v<T>) {
        out.push_back(static_cast<T>(integer(section, key, item)));
      } else {
        out.push_back(number(section, key, item));
      }
    }
    if (out.empty()) fail(section, key, "empty list");
  }

  /// Rejects sections and keys outside `allowed` (section -> keys).
  void check_known(const std::map<std::string, std::set<std::string>>& allowed, const std::string& context) const {
    for (const auto& [section, sub] : tree_) {
      const auto it = allowed.find(section);
      if (it == allowed.end()) {
        if (sub.empty() && !sub.data().empty()) {
          fail("", section, "keys must live inside a section");
        }
        throw ConfigError("unknown section [" + section + "]");
      }
      for (const auto& [key, value] : sub) {
        (void)value;
        if (!it->second.count(key)) fail(section, key, "unknown key (not used by " + context + ")");
      }
    }
  }

 private:
  const std::string& text_;
  const boost::property_tree::ptree& tree_;
};

inline std::set<std::string> run_keys(Experiment e) {
  std::set<std::string> k{"experiment", "seed", "workers", "format", "out"};
  switch (e) {
    case Experiment::moments: k.insert({"replicas", "walks"}); break;
    case Experiment::variance_scan: k.insert({"replicas", "walks", "mean_method"}); break;
    case Experiment::phi_decay: k.insert({"replicas"}); break;
    case Experiment::identity_check: k.insert({"replicas", "y_replicas"}); break;
    case Experiment::fclt: k.insert({"environments", "walks", "centering"}); break;
    case Experiment::max_drift: k.insert({"replicas"}); break;
    case Experiment::ychain_exit: k.insert({"replicas", "step_cap", "chain"}); break;
    case Experiment::ychain_excursion: k.insert({"replicas", "chain"}); break;
    case Experiment::occupation: k.insert({"replicas", "chain"}); break;
    case Experiment::counterexample: k.insert({"environments", "walks"}); break;
  }
  return k;
}

inline std::set<std::string> grid_keys(Experiment e) {
  switch (e) {
    case Experiment::moments: return {};
    case Experiment::variance_scan: return {"n"};
    case Experiment::phi_decay: return {"x"};
    case Experiment::identity_check: return {"n"};
    case Experiment::fclt: return {"epsilon", "t"};
    case Experiment::max_drift: return {"n"};
    case Experiment::ychain_exit: return {"r", "escape_r", "escape_r0", "escape_budget"};
    case Experiment::ychain_excursion: return {"n", "epsilon", "a"};
    case Experiment::occupation: return {"n", "epsilon"};
    case Experiment::counterexample: return {"epsilon", "t"};
  }
  return {};
}

inline std::set<std::string> criteria_keys(Experiment e) {
  switch (e) {
    case Experiment::moments: return {"k_se"};
    case Experiment::variance_scan: return {"exponent_min", "exponent_max"};
    case Experiment::phi_decay: return {"k_se", "zero_beyond"};
    case Experiment::identity_check: return {"k_se"};
    case Experiment::fclt: return {"alpha", "min_pass", "cov_k_se", "negative_control"};
    case Experiment::max_drift: return {"min_pass", "ratio", "negative_control"};
    case Experiment::ychain_exit: return {"exponent_min", "exponent_max", "envelope", "escape_scaled_min"};
    case Experiment::ychain_excursion: return {"exponent_min", "exponent_max"};
    case Experiment::occupation: return {"exponent_max"};
    case Experiment::counterexample: return {"alpha", "min_pass"};
  }
  return {};
}

inline std::set<std::string> model_keys(const std::string& kind, const std::string& family) {
  std::set<std::string> k{"kind", "dim"};
  if (kind == "dirac") {
    k.insert({"displacement", "scale", "uniform_offset"});
    return k;
  }
  k.insert("family");
  if (family == "coin") k.insert({"p_lo", "p_hi", "step"});
  if (family == "gaussian") k.insert({"mean", "variance", "drift_spread"});
  if (kind == "lattice") k.insert("uniform_offset");
  if (kind == "finite-range") k.insert({"range", "interpolation"});
  return k;
}

inline Model parse_model(const Reader& rd, Experiment e) {
  std::string kind = e == Experiment::counterexample ? "fully-correlated" : "lattice";
  std::string family = "coin";
  int dim = 1;
  rd.get("model", "kind", kind);
  rd.get("model", "family", family);
  rd.get("model", "dim", dim);
  if (dim < 1 || dim > kMaxDim) rd.fail("model", "dim", "must be 1, 2 or 3");
  if (kind != "dirac" && family != "coin" && family != "gaussian") {
    rd.fail("model", "family", "unknown family '" + family + "' (coin, gaussian)");
  }
  SiteFamily fam;
  if (family == "coin") {
    CoinFamily c;
    rd.get("model", "p_lo", c.p_lo);
    rd.get("model", "p_hi", c.p_hi);
    rd.get("model", "step", c.step);
    fam = c;
  } else {
    double mean = 0.0, variance = 1.0, spread = 0.0;
    rd.get("model", "mean", mean);
    rd.get("model", "variance", variance);
    rd.get("model", "drift_spread", spread);
    fam = GaussianFamily{Vec::filled(dim, mean), Mat::identity(dim) * variance, spread};
  }
  Model m;
  m.dim = dim;
  if (kind == "lattice") {
    LatticeProduct l{fam, true};
    rd.get("model", "uniform_offset", l.uniform_offset);
    m.spec = l;
  } else if (kind == "finite-range") {
    FiniteRange f{fam, 1.0, Interpolation::average};
    rd.get("model", "range", f.range);
    std::string rule = "average";
    rd.get("model", "interpolation", rule);
    if (rule == "nearest") {
      f.rule = Interpolation::nearest;
    } else if (rule != "average") {
      rd.fail("model", "interpolation", "expected average or nearest, got '" + rule + "'");
    }
    m.spec = f;
  } else if (kind == "fully-correlated") {
    m.spec = FullyCorrelated{fam};
  } else if (kind == "dirac") {
    DiracField f;
    std::string disp = "plus-minus";
    rd.get("model", "displacement", disp);
    if (disp == "box") {
      f.displacement = Displacement::box;
    } else if (disp != "plus-minus") {
      rd.fail("model", "displacement", "expected plus-minus or box, got '" + disp + "'");
    }
    rd.get("model", "scale", f.scale);
    rd.get("model", "uniform_offset", f.uniform_offset);
    m.spec = f;
  } else {
    rd.fail("model", "kind", "unknown model '" + kind + "' (lattice, finite-range, fully-correlated, dirac)");
  }
  try {
    validate_model(m);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("[model]: ") + ex.what());
  }
  return m;
}

inline void apply_defaults(ExperimentConfig& c) {
  auto dyadic = [](int a, int b) {
    std::vector<std::int64_t> v;
    for (int k = a; k <= b; ++k) v.push_back(std::int64_t{1} << k);
    return v;
  };
  switch (c.experiment) {
    case Experiment::moments:
      c.replicas = 100000;
      c.walks = 1;
      break;
    case Experiment::variance_scan:
      c.replicas = 1000;
      c.walks = 1000;
      c.n = dyadic(4, 12);
      c.criteria.exponent_min = 0.0;
      c.criteria.exponent_max = 1.1;
      break;
    case Experiment::phi_decay:
      c.replicas = 10000;
      c.x = {0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0};
      break;
    case Experiment::identity_check:
      c.replicas = 2000;
      c.y_replicas = 100000;
      c.n = {1, 4, 8};
      break;
    case Experiment::fclt:
    case Experiment::counterexample:
      c.environments = 10;
      c.walks = 10000;
      c.epsilon = 1.0 / 1024.0;
      c.t = {0.25, 0.5, 1.0};
      break;
    case Experiment::max_drift:
      c.replicas = 10;
      c.n = dyadic(6, 12);
      break;
    case Experiment::ychain_exit:
      c.replicas = 20000;
      c.r = {4.0, 8.0, 16.0, 32.0};
      break;
    case Experiment::ychain_excursion:
      c.replicas = 1000;
      c.n = {16384};
      c.epsilon = 0.2;
      c.criteria.exponent_min = 0.35;
      c.criteria.exponent_max = 0.65;
      break;
    case Experiment::occupation:
      c.replicas = 1000;
      c.n = dyadic(8, 14);
      c.epsilon = 0.2;
      c.criteria.exponent_max = 1.0;
      break;
  }
}

}  // namespace detail

/// Parses the INI text of one experiment. Sections: [run], [model], [grid],
/// [criteria]. Unknown sections or keys, and keys the chosen experiment or
/// model does not use, are rejected.
inline ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& ex) {
    throw ConfigError("line " + std::to_string(ex.line()) + ": " + ex.message());
  }
  const detail::Reader rd(text, tree);
  ExperimentConfig c;
  c.text = text;

  std::string name;
  rd.get("run", "experiment", name);
  if (name.empty()) throw ConfigError("[run] experiment: required (one of moments, variance-scan, ...)");
  bool found = false;
  for (const auto& [k, n] : kExperimentNames) {
    if (n == name) {
      c.experiment = k;
      found = true;
    }
  }
  if (!found) rd.fail("run", "experiment", "unknown experiment '" + name + "'");

  std::string kind = c.experiment == Experiment::counterexample ? "fully-correlated" : "lattice";
  std::string family = "coin";
  rd.get("model", "kind", kind);
  rd.get("model", "family", family);
  rd.check_known({{"run", detail::run_keys(c.experiment)},
                  {"model", detail::model_keys(kind, family)},
                  {"grid", detail::grid_keys(c.experiment)},
                  {"criteria", detail::criteria_keys(c.experiment)}},
                 name + " / " + kind + " model");

  detail::apply_defaults(c);
  rd.get("run", "seed", c.seed);
  rd.get("run", "workers", c.workers);
  if (c.workers < 1) rd.fail("run", "workers", "must be >= 1");
  rd.get("run", "format", c.format);
  if (c.format != "json" && c.format != "csv") rd.fail("run", "format", "expected json or csv");
  rd.get("run", "out", c.out_dir);
  rd.get("run", "replicas", c.replicas);
  rd.get("run", "walks", c.walks);
  rd.get("run", "environments", c.environments);
  rd.get("run", "y_replicas", c.y_replicas);
  rd.get("run", "step_cap", c.step_cap);
  rd.get("run", "chain", c.chain);
  if (c.chain != "same" && c.chain != "independent") rd.fail("run", "chain", "expected same or independent");
  rd.get("run", "mean_method", c.mean_method);
  if (c.mean_method != "exact" && c.mean_method != "mc") rd.fail("run", "mean_method", "expected exact or mc");
  rd.get("run", "centering", c.centering);
  if (c.centering != "velocity" && c.centering != "quenched-mean") {
    rd.fail("run", "centering", "expected velocity or quenched-mean");
  }

  c.model = detail::parse_model(rd, c.experiment);

  rd.list("grid", "n", c.n);
  rd.list("grid", "r", c.r);
  rd.list("grid", "x", c.x);
  rd.list("grid", "t", c.t);
  rd.list("grid", "a", c.a);
  rd.list("grid", "escape_r", c.escape_r);
  rd.get("grid", "epsilon", c.epsilon);
  rd.get("grid", "escape_r0", c.escape_r0);
  rd.get("grid", "escape_budget", c.escape_budget);

  Criteria& k = c.criteria;
  rd.get("criteria", "k_se", k.k_se);
  rd.get("criteria", "cov_k_se", k.cov_k_se);
  rd.get("criteria", "alpha", k.alpha);
  rd.get("criteria", "min_pass", k.min_pass);
  rd.get("criteria", "exponent_min", k.exponent_min);
  rd.get("criteria", "exponent_max", k.exponent_max);
  rd.get("criteria", "envelope", k.envelope);
  rd.get("criteria", "ratio", k.ratio);
  rd.get("criteria", "escape_scaled_min", k.escape_scaled_min);
  rd.get("criteria", "zero_beyond", k.zero_beyond);
  rd.get("criteria", "negative_control", k.negative_control);

  // Grid feasibility.
  auto increasing = [](const auto& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (!(v[i - 1] < v[i])) return false;
    }
    return true;
  };
  if (!increasing(c.n) || (!c.n.empty() && c.n.front() < 1)) rd.fail("grid", "n", "must be increasing and >= 1");
  if (!increasing(c.r) || (!c.r.empty() && !(c.r.front() > 0.0))) rd.fail("grid", "r", "must be increasing and > 0");
  if (!increasing(c.t) || (!c.t.empty() && !(c.t.front() > 0.0))) rd.fail("grid", "t", "must be increasing and > 0");
  if (!increasing(c.a) || (!c.a.empty() && !(c.a.front() >= 1.0))) rd.fail("grid", "a", "must be increasing and >= 1");
  const bool needs_eps = c.experiment == Experiment::fclt || c.experiment == Experiment::counterexample ||
                         c.experiment == Experiment::ychain_excursion || c.experiment == Experiment::occupation;
  if (needs_eps && !(c.epsilon > 0.0)) rd.fail("grid", "epsilon", "must be > 0");
  if ((c.experiment == Experiment::fclt || c.experiment == Experiment::counterexample) &&
      std::floor(1.0 / c.epsilon) < 64.0) {
    rd.fail("grid", "epsilon", "floor(1/epsilon) must be >= 64");
  }
  if (c.experiment == Experiment::ychain_excursion && c.n.size() != 1) {
    rd.fail("grid", "n", "excursion scans take a single horizon n");
  }
  if (c.experiment == Experiment::max_drift && c.n.size() < 2) rd.fail("grid", "n", "needs at least two values");
  if (c.escape_r0 < 0.0) rd.fail("grid", "escape_r0", "must be >= 0");
  for (double r : c.escape_r) {
    if (!(r > c.escape_r0)) rd.fail("grid", "escape_r", "every radius must exceed escape_r0");
  }
  if (!(k.alpha > 0.0 && k.alpha < 1.0)) rd.fail("criteria", "alpha", "must lie in (0, 1)");
  return c;
}

}  // namespace rwre

#endif  // RWRE_CONFIG_HPP

#include "balnet/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace balnet {

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::Limit: return "limit";
    case RunMode::Particle: return "particle";
    case RunMode::Compare: return "compare";
  }
  return "?";
}

RunMode parse_mode(std::string_view text) {
  if (text == "limit") return RunMode::Limit;
  if (text == "particle") return RunMode::Particle;
  if (text == "compare") return RunMode::Compare;
  throw ValidationError("unknown mode '" + std::string(text) + "' (expected limit, particle or compare)");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

struct Entry {
  std::string value;
  int line;
};

// Recognized keys per section; "" is the preamble before any section.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"", {"name", "mode"}},
      {"model",
       {"domain", "basis", "tau_e", "tau_i", "sigma_e", "sigma_i", "kernel_ee", "kernel_ei", "kernel_ie", "kernel_ii",
        "gain_ee", "gain_ei", "gain_ie", "gain_ii"}},
      {"run",
       {"n", "dt", "T", "seed", "stride", "snapshot_stride", "quadrature_order", "newton_tol", "newton_max_iter",
        "tol_mean_e", "tol_mean_i", "tol_var", "tol_wasserstein"}},
      {"init", {"K_e0", "K_i0", "v_guess", "v0"}},
      {"output", {"dir", "precision"}},
  };
  return s;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  const Entry& entry(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ParseError(0, "missing required key '" + key + "'");
    return it->second;
  }

  std::string str(const std::string& key) const { return entry(key).value; }

  double real(const std::string& key) const { return to_real(entry(key).value, entry(key).line, key); }
  double real(const std::string& key, double fallback) const { return has(key) ? real(key) : fallback; }

  long long integer(const std::string& key) const {
    const auto& e = entry(key);
    long long v = 0;
    const auto* end = e.value.data() + e.value.size();
    auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ParseError(e.line, "'" + key + "' expects an integer");
    return v;
  }
  long long integer(const std::string& key, long long fallback) const { return has(key) ? integer(key) : fallback; }

  Eigen::VectorXd vector(const std::string& key) const {
    const auto& e = entry(key);
    const auto parts = split_ws(e.value);
    Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t k = 0; k < parts.size(); ++k) v(static_cast<Eigen::Index>(k)) = to_real(parts[k], e.line, key);
    return v;
  }

  static double to_real(std::string_view text, int line, const std::string& key) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty()) {
      throw ParseError(line, "'" + key + "' expects a number, got '" + std::string(text) + "'");
    }
    return v;
  }

 private:
  std::map<std::string, Entry> entries_;
};

GainSpec parse_gain(const Entry& e, const std::string& key) {
  const auto parts = split_ws(e.value);
  if (parts.empty()) throw ParseError(e.line, "'" + key + "' is empty");
  std::vector<double> args;
  for (std::size_t k = 1; k < parts.size(); ++k) args.push_back(Reader::to_real(parts[k], e.line, key));
  if (parts[0] == "constant" && args.size() == 1) return GainSpec::constant(args[0]);
  if (parts[0] == "linear" && args.size() == 1) return GainSpec::linear(args[0]);
  if (parts[0] == "tanh" && args.size() >= 1 && args.size() <= 3) {
    return GainSpec::tanh(args[0], args.size() > 1 ? args[1] : 1.0, args.size() > 2 ? args[2] : 0.0);
  }
  throw ParseError(e.line, "'" + key + "' expects 'constant A', 'linear C' or 'tanh C [gamma [shift]]'");
}

Eigen::MatrixXd parse_kernel(const Entry& e, const std::string& key, int m) {
  std::vector<std::vector<double>> rows;
  std::string_view rest = e.value;
  for (;;) {
    const auto semi = rest.find(';');
    std::vector<double> row;
    for (auto tok : split_ws(trim(rest.substr(0, semi)))) row.push_back(Reader::to_real(tok, e.line, key));
    rows.push_back(std::move(row));
    if (semi == std::string_view::npos) break;
    rest = rest.substr(semi + 1);
  }
  if (rows.size() == 1) {
    if (static_cast<int>(rows[0].size()) != m) {
      throw ParseError(e.line, "'" + key + "' needs " + std::to_string(m) + " diagonal coefficients");
    }
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a) c(a, a) = rows[0][a];
    return c;
  }
  if (static_cast<int>(rows.size()) != m) throw ParseError(e.line, "'" + key + "' needs " + std::to_string(m) + " rows");
  Eigen::MatrixXd c(m, m);
  for (int a = 0; a < m; ++a) {
    if (static_cast<int>(rows[a].size()) != m) throw ParseError(e.line, "'" + key + "' rows need M entries");
    for (int b = 0; b < m; ++b) c(a, b) = rows[a][b];
  }
  return c;
}

SpatialBasis parse_basis(const Reader& r) {
  const auto& domain = r.entry("model.domain");
  if (domain.value == "point") {
    if (r.has("model.basis") && r.str("model.basis") != "constant") {
      throw ParseError(r.entry("model.basis").line, "point domain supports only the constant basis");
    }
    return SpatialBasis::point();
  }
  if (domain.value != "ring") throw ParseError(domain.line, "domain must be 'point' or 'ring'");
  const auto& e = r.entry("model.basis");
  std::vector<BasisFunction> fns;
  for (auto tok : split_ws(e.value)) {
    if (tok == "constant") fns.push_back(BasisFunction::Constant);
    else if (tok == "cosine") fns.push_back(BasisFunction::Cosine);
    else if (tok == "sine") fns.push_back(BasisFunction::Sine);
    else throw ParseError(e.line, "unknown basis function '" + std::string(tok) + "'");
  }
  try {
    return SpatialBasis::ring(std::move(fns));
  } catch (const ValidationError& err) {
    throw ParseError(e.line, err.what());
  }
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty() || !schema().count(section)) throw ParseError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(line_no, "missing key");
    if (value.empty()) throw ParseError(line_no, "missing value for '" + key + "'");
    if (!schema().at(section).count(key)) {
      throw ParseError(line_no, "unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"));
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (!entries.emplace(full, Entry{value, line_no}).second) {
      throw ParseError(line_no, "duplicate key '" + key + "'");
    }
  }
  if (entries.empty()) throw ParseError(line_no, "empty configuration");

  const Reader r(std::move(entries));
  ScenarioConfig cfg;
  cfg.name = r.str("name");
  try {
    cfg.mode = parse_mode(r.str("mode"));
  } catch (const ValidationError& e) {
    throw ParseError(r.entry("mode").line, e.what());
  }

  Model& model = cfg.model;
  model.basis = parse_basis(r);
  const int m = model.basis.size();
  std::array<Eigen::MatrixXd, 4> coeffs;
  for (Pair p : kAllPairs) {
    const std::string key = std::string("model.kernel_") + to_string(p);
    coeffs[index_of(p)] = parse_kernel(r.entry(key), key, m);
    const std::string gkey = std::string("model.gain_") + to_string(p);
    model.gains[index_of(p)] = parse_gain(r.entry(gkey), gkey);
  }
  model.kernel = ConnectivityKernel(std::move(coeffs));
  try {
    model.dynamics.drift_e = DriftSpec::linear_decay(r.real("model.tau_e"));
    model.dynamics.drift_i = DriftSpec::linear_decay(r.real("model.tau_i"));
    model.dynamics.noise_e = NoiseSpec::additive(r.real("model.sigma_e"));
    model.dynamics.noise_i = NoiseSpec::additive(r.real("model.sigma_i"));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("[model] ") + e.what());
  }

  cfg.n = static_cast<int>(r.integer("run.n"));
  cfg.dt = r.real("run.dt");
  cfg.horizon = r.real("run.T");
  cfg.seed = static_cast<std::uint64_t>(r.integer("run.seed"));
  cfg.stride = static_cast<int>(r.integer("run.stride", 10));
  cfg.snapshot_stride = static_cast<int>(r.integer("run.snapshot_stride", 0));
  cfg.quadrature_order = static_cast<int>(r.integer("run.quadrature_order", kDefaultQuadratureOrder));
  cfg.balance.tolerance = r.real("run.newton_tol", cfg.balance.tolerance);
  cfg.balance.max_iterations = static_cast<int>(r.integer("run.newton_max_iter", cfg.balance.max_iterations));
  cfg.tolerances.mean_e = r.real("run.tol_mean_e", cfg.tolerances.mean_e);
  cfg.tolerances.mean_i = r.real("run.tol_mean_i", cfg.tolerances.mean_i);
  cfg.tolerances.variance = r.real("run.tol_var", cfg.tolerances.variance);
  cfg.tolerances.wasserstein = r.real("run.tol_wasserstein", cfg.tolerances.wasserstein);

  cfg.k_e0 = r.real("init.K_e0");
  cfg.k_i0 = r.real("init.K_i0");
  if (r.has("init.v_guess")) cfg.v_guess = r.vector("init.v_guess");
  if (r.has("init.v0")) cfg.v0 = r.vector("init.v0");

  if (r.has("output.dir")) cfg.output_dir = r.str("output.dir");
  cfg.precision = static_cast<int>(r.integer("output.precision", 17));

  cfg.validate();
  return cfg;
}

void ScenarioConfig::validate() const {
  model.validate();
  const int m = model.rank();
  if (n < 1) throw ValidationError("[run] n must be at least 1");
  if (!(dt > 0.0)) throw ValidationError("[run] dt must be positive");
  if (!(horizon >= dt)) throw ValidationError("[run] T must be at least dt");
  if (stride < 1) throw ValidationError("[run] stride must be at least 1");
  if (snapshot_stride < 0 || (snapshot_stride > 0 && snapshot_stride % stride != 0)) {
    throw ValidationError("[run] snapshot_stride must be a non-negative multiple of stride");
  }
  if (quadrature_order < 2) throw ValidationError("[run] quadrature_order must be at least 2");
  if (!(balance.tolerance > 0.0) || balance.max_iterations < 1) {
    throw ValidationError("[run] Newton tolerance and iteration limit must be positive");
  }
  if (!(k_e0 >= 0.0) || !(k_i0 >= 0.0)) throw ValidationError("[init] variances must be non-negative");
  if (mode != RunMode::Particle && (!(k_e0 > 0.0) || !(k_i0 > 0.0))) {
    throw ValidationError("[init] the limit solver needs positive initial variances");
  }
  if (v_guess && v_guess->size() != 2 * m) throw ValidationError("[init] v_guess needs 2M values");
  if (v0 && v0->size() != 2 * m) throw ValidationError("[init] v0 needs 2M values");
  if (precision < 1 || precision > 17) throw ValidationError("[output] precision must be within 1..17");

  const GainSpec& ee = model.gain(Pair::EE);
  const GainSpec& ei = model.gain(Pair::EI);
  if (ee.kind() == GainSpec::Kind::Constant && ei.kind() == GainSpec::Kind::Tanh &&
      !(std::abs(ei.amplitude()) > ee.amplitude())) {
    throw ValidationError("[model] balance infeasible: C_ei must exceed A_e so bounded inhibition can cancel the "
                          "constant excitation");
  }
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kTest1 = R"(# Inhibition-stabilized mean-field network with linear gains.
name = test1
mode = compare

[model]
domain = point
tau_e = 1
tau_i = 1
sigma_e = 1
sigma_i = 1
kernel_ee = 1
kernel_ei = 1
kernel_ie = 1
kernel_ii = 1
gain_ee = constant 1
gain_ei = linear 1
gain_ie = linear 1
gain_ii = linear 0.5

[run]
n = 40000
dt = 0.001
T = 5
seed = 1
stride = 10

[init]
K_e0 = 0.5
K_i0 = 0.5

[output]
dir = out/test1
)";

constexpr const char* kTest2 = R"(# Mean-field network with tanh interactions relaxing from K0 = (1, 2).
name = test2
mode = compare

[model]
domain = point
tau_e = 1
tau_i = 1
sigma_e = 1
sigma_i = 1
kernel_ee = 1
kernel_ei = 1
kernel_ie = 1
kernel_ii = 1
gain_ee = constant 0.1
gain_ei = tanh 1
gain_ie = tanh 1
gain_ii = tanh 0.5

[run]
n = 10000
dt = 0.001
T = 5
seed = 1
stride = 10
tol_mean_e = 0.08
tol_mean_i = 0.08

[init]
K_e0 = 1
K_i0 = 2

[output]
dir = out/test2
)";

constexpr const char* kTest3 = R"(# Ring network, kernel c1 + c2 cos(x - x'); no stable balanced state exists.
name = test3
mode = particle

[model]
domain = ring
basis = constant cosine sine
tau_e = 0.5
tau_i = 0.5
sigma_e = 0.5
sigma_i = 0.5
kernel_ee = 0.5 2 2
kernel_ei = 4 4 4
kernel_ie = 1 2 2
kernel_ii = 1 2 2
gain_ee = tanh 1
gain_ei = tanh 1
gain_ie = tanh 1
gain_ii = tanh 1

[run]
n = 500
dt = 0.001
T = 20
seed = 1
stride = 10

[init]
K_e0 = 0.0625
K_i0 = 0.0625
v0 = 0 0 0 0 0 0

[output]
dir = out/test3
)";

}  // namespace

std::vector<std::string> preset_names() { return {"test1", "test2", "test3"}; }

std::string preset_text(const std::string& name) {
  if (name == "test1") return kTest1;
  if (name == "test2") return kTest2;
  if (name == "test3") return kTest3;
  throw Error("unknown preset '" + name + "'");
}

}  // namespace balnet

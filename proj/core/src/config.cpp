#include "fluctlab/config.hpp"

#include "fluctlab/version.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fluctlab::scenario {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

bool is_power_of_two(long long v) { return v > 0 && (v & (v - 1)) == 0; }

// One parsed section: raw key -> value strings plus bookkeeping for
// unknown-key detection.
struct Section {
  std::string name;
  std::string origin;
  std::map<std::string, std::string> kv;
  std::map<std::string, int> line_of;
  mutable std::set<std::string> consumed;

  bool has(const std::string& key) const { return kv.count(key) != 0; }

  const std::string* raw(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    consumed.insert(key);
    return &it->second;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(origin + ": [" + name + "] " + key + ": " + what);
  }

  double get_double(const std::string& key, double dflt) const {
    const std::string* r = raw(key);
    if (!r) return dflt;
    char* end = nullptr;
    const double v = std::strtod(r->c_str(), &end);
    if (end == r->c_str() || *end != '\0') fail(key, "expected a number, got '" + *r + "'");
    return v;
  }

  long long get_int(const std::string& key, long long dflt) const {
    const std::string* r = raw(key);
    if (!r) return dflt;
    char* end = nullptr;
    const long long v = std::strtoll(r->c_str(), &end, 10);
    if (end == r->c_str() || *end != '\0') fail(key, "expected an integer, got '" + *r + "'");
    return v;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const {
    const std::string* r = raw(key);
    if (!r) return dflt;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(r->c_str(), &end, 10);
    if (end == r->c_str() || *end != '\0')
      fail(key, "expected an unsigned integer, got '" + *r + "'");
    return v;
  }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    const std::string* r = raw(key);
    return r ? strip_quotes(*r) : dflt;
  }

  std::vector<std::string> get_list_items(const std::string& key) const {
    const std::string* r = raw(key);
    if (!r) return {};
    std::string s = trim(*r);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
      fail(key, "expected a bracketed list, got '" + *r + "'");
    s = s.substr(1, s.size() - 2);
    std::vector<std::string> items;
    std::string cur;
    for (char ch : s) {
      if (ch == ',') {
        items.push_back(trim(cur));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    return items;
  }

  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> dflt) const {
    if (!has(key)) return dflt;
    std::vector<double> out;
    for (const std::string& it : get_list_items(key)) {
      char* end = nullptr;
      const double v = std::strtod(it.c_str(), &end);
      if (end == it.c_str() || *end != '\0')
        fail(key, "list entry '" + it + "' is not a number");
      out.push_back(v);
    }
    return out;
  }

  std::vector<int> get_int_list(const std::string& key, std::vector<int> dflt) const {
    if (!has(key)) return dflt;
    std::vector<int> out;
    for (const std::string& it : get_list_items(key)) {
      char* end = nullptr;
      const long long v = std::strtoll(it.c_str(), &end, 10);
      if (end == it.c_str() || *end != '\0')
        fail(key, "list entry '" + it + "' is not an integer");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : kv)
      if (!consumed.count(key))
        throw ConfigError(origin + ":" + std::to_string(line_of.at(key)) +
                          ": unknown key '" + key + "' in section [" + name + "]");
  }
};

struct ParsedFile {
  std::map<std::string, Section> sections;
  std::vector<std::string> order;  // encounter order, for phi:* sections
};

ParsedFile parse_raw(const std::string& text, const std::string& origin) {
  ParsedFile out;
  std::istringstream in(text);
  std::string line;
  std::string current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments outside quotes; the grammar has no escaped quotes.
    bool in_quote = false;
    char quote = 0;
    std::string body;
    for (char ch : line) {
      if (in_quote) {
        body += ch;
        if (ch == quote) in_quote = false;
        continue;
      }
      if (ch == '#') break;
      if (ch == '"' || ch == '\'') {
        in_quote = true;
        quote = ch;
      }
      body += ch;
    }
    body = trim(body);
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": unterminated section header");
      current = trim(body.substr(1, body.size() - 2));
      if (current.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      if (!out.sections.count(current)) {
        out.sections[current] = Section{current, origin, {}, {}, {}};
        out.order.push_back(current);
      }
      continue;
    }
    const size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + body + "'");
    if (current.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": key outside of any [section]");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + body + "'");
    Section& sec = out.sections[current];
    if (sec.kv.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                        key + "' in section [" + current + "]");
    sec.kv[key] = value;
    sec.line_of[key] = lineno;
  }
  return out;
}

CoefficientSpec parse_coefficient(const Section& sec, int d, double dflt_scale) {
  const std::string variant = sec.get_string("variant", "constant");
  const int cols = static_cast<int>(sec.get_int("cols", d));
  std::vector<double> entries;
  if (sec.has("identity_scale")) {
    const double s = sec.get_double("identity_scale", 0.0);
    if (cols != d) sec.fail("identity_scale", "requires cols = d");
    entries.assign(static_cast<size_t>(d) * d, 0.0);
    for (int q = 0; q < d; ++q) entries[static_cast<size_t>(q) * d + q] = s;
  } else if (sec.has("entries")) {
    entries = sec.get_double_list("entries", {});
  } else {
    entries.assign(static_cast<size_t>(d) * cols, 0.0);
    for (int q = 0; q < std::min(d, cols); ++q)
      entries[static_cast<size_t>(q) * cols + q] = dflt_scale;
  }
  if (static_cast<int>(entries.size()) != d * cols)
    sec.fail("entries", "expected d*cols = " + std::to_string(d * cols) + " numbers");
  if (variant == "constant") {
    sec.finish();
    return make_constant_coeff(d, cols, std::move(entries));
  }
  if (variant == "smooth_perturbation") {
    const double eps = sec.get_double("eps", 0.1);
    std::vector<double> omega = sec.get_double_list("omega", std::vector<double>(d, 1.0));
    const double tau = sec.get_double("tau", 0.0);
    if (static_cast<int>(omega.size()) != d) sec.fail("omega", "expected d numbers");
    sec.finish();
    return make_perturbed_coeff(d, cols, std::move(entries), eps, std::move(omega), tau);
  }
  sec.fail("variant", "unknown variant '" + variant + "'");
}

KernelSpec parse_kernel(const Section& sec, int d) {
  const std::string variant = sec.get_string("variant", "zero");
  if (variant == "zero") {
    sec.finish();
    return make_zero_kernel(d);
  }
  const double amplitude = sec.get_double("amplitude", 1.0);
  if (variant == "gaussian") {
    const double width = sec.get_double("width", 1.0);
    sec.finish();
    return make_gaussian_kernel(d, amplitude, width);
  }
  if (variant == "bump") {
    const double radius = sec.get_double("radius", 1.0);
    sec.finish();
    return make_bump_kernel(d, amplitude, radius);
  }
  sec.fail("variant", "unknown variant '" + variant + "'");
}

DensitySpec parse_rho0(const Section& sec, int d) {
  const std::string variant = sec.get_string("variant", "gaussian_mixture");
  if (variant == "uniform") {
    const double hw = sec.get_double("half_width", 1.0);
    sec.finish();
    return make_uniform_density(d, hw);
  }
  if (variant != "gaussian_mixture")
    sec.fail("variant", "unknown variant '" + variant + "'");
  if (sec.has("weights")) {
    std::vector<double> weights = sec.get_double_list("weights", {});
    std::vector<double> means = sec.get_double_list("means", {});
    std::vector<double> sds = sec.get_double_list("sds", {});
    const size_t nc = weights.size();
    if (means.size() != nc * static_cast<size_t>(d))
      sec.fail("means", "expected d numbers per component");
    if (sds.size() != nc) sec.fail("sds", "expected one sd per component");
    std::vector<MixtureComponent> comps(nc);
    for (size_t c = 0; c < nc; ++c) {
      comps[c].weight = weights[c];
      comps[c].mean.assign(means.begin() + static_cast<long>(c) * d,
                           means.begin() + static_cast<long>(c + 1) * d);
      comps[c].sd = sds[c];
    }
    sec.finish();
    return make_mixture_density(d, std::move(comps));
  }
  std::vector<double> mean = sec.get_double_list("mean", std::vector<double>(d, 0.0));
  const double sd = sec.get_double("sd", 1.0);
  if (static_cast<int>(mean.size()) != d) sec.fail("mean", "expected d numbers");
  sec.finish();
  return make_gaussian_density(d, std::move(mean), sd);
}

TestFunctionSpec parse_phi(const Section& sec, const std::string& name) {
  TestFunctionSpec spec;
  spec.name = name;
  spec.kind = sec.get_string("kind", "bump");
  spec.radius = sec.get_double("radius", 2.0);
  spec.center = sec.get_double_list("center", {});
  spec.amplitude = sec.get_double("amplitude", 1.0);
  spec.axis = static_cast<int>(sec.get_int("axis", 0));
  spec.power = static_cast<int>(sec.get_int("power", 1));
  sec.finish();
  return spec;
}

ordered_json coeff_json(const CoefficientSpec& c) {
  ordered_json j;
  j["variant"] = c.variant_name();
  j["rows"] = c.d;
  j["cols"] = c.m;
  j["entries"] = c.base;
  if (c.variant == CoeffVariant::SmoothPerturbation) {
    j["eps"] = c.eps;
    j["omega"] = c.omega;
    j["tau"] = c.tau;
  }
  return j;
}

}  // namespace

TestFunction TestFunctionSpec::materialize(int d) const {
  std::vector<double> c = center;
  if (c.empty()) c.assign(d, 0.0);
  if (static_cast<int>(c.size()) != d)
    throw ConfigError("phi '" + name + "': center must have d entries");
  if (kind == "bump") return make_bump_phi(d, radius, std::move(c), amplitude, name);
  if (kind == "monomial")
    return make_windowed_monomial(d, axis, power, radius, std::move(c), amplitude, name);
  throw ConfigError("phi '" + name + "': unknown kind '" + kind + "'");
}

void ScenarioConfig::validate() const {
  auto reject = [](const std::string& msg) { throw ConfigError(msg); };
  if (d != 1 && d != 2) reject("d must be 1 or 2");
  if (N_list.empty()) reject("N_list must be nonempty");
  for (size_t i = 0; i < N_list.size(); ++i) {
    if (N_list[i] < 1) reject("N_list entries must be >= 1");
    if (i > 0 && N_list[i] <= N_list[i - 1]) reject("N_list must be strictly increasing");
  }
  if (!(T > 0.0)) reject("T must be > 0");
  if (n_steps < 1) reject("n_steps must be >= 1");
  if (!(L > 0.0)) reject("L must be > 0");
  if (!is_power_of_two(M)) reject("M must be a power of two");
  if (!is_power_of_two(M_f)) reject("M_f must be a power of two");
  if (!(Xi > 0.0)) reject("Xi must be > 0");
  if (!(alpha > d / 2.0)) reject("alpha must exceed d/2");
  if (!(alpha_interaction > d / 2.0 + 2.0))
    reject("alpha_interaction must exceed d/2 + 2");
  if (R < 1) reject("R must be >= 1");
  if (snapshot_stride < 1) reject("snapshot_stride must be >= 1");

  if (kernel.d != d) reject("kernel dimension must match d");
  try {
    sigma.validate(/*require_elliptic=*/true);
  } catch (const std::exception& e) {
    reject(std::string("sigma: ") + e.what());
  }
  try {
    nu.validate(/*require_elliptic=*/false);
  } catch (const std::exception& e) {
    reject(std::string("nu: ") + e.what());
  }
  if (sigma.d != d) reject("sigma must have d rows");
  if (nu.d != d) reject("nu must have d rows");
  try {
    rho0.validate(L);
  } catch (const std::exception& e) {
    reject(std::string("rho0: ") + e.what());
  }
  if (rho0.d != d) reject("rho0 dimension must match d");

  std::set<std::string> names;
  for (const TestFunctionSpec& p : phis) {
    if (p.name.empty()) reject("phi sections need a name: [phi:<name>]");
    if (!names.insert(p.name).second) reject("duplicate phi name '" + p.name + "'");
    if (p.radius <= 0.0) reject("phi '" + p.name + "': radius must be > 0");
    std::vector<double> c = p.center;
    if (c.empty()) c.assign(d, 0.0);
    if (static_cast<int>(c.size()) != d)
      reject("phi '" + p.name + "': center must have d entries");
    for (double cq : c)
      if (std::abs(cq) + p.radius > L)
        reject("phi '" + p.name + "': support must fit inside the box");
    if (p.kind != "bump" && p.kind != "monomial")
      reject("phi '" + p.name + "': unknown kind '" + p.kind + "'");
    if (p.kind == "monomial" && (p.axis < 0 || p.axis >= d))
      reject("phi '" + p.name + "': axis out of range");
    if (p.kind == "monomial" && p.power < 1)
      reject("phi '" + p.name + "': power must be >= 1");
  }

  if (elln.samples < 1) reject("elln samples must be >= 1");
  if (elln.N_list.empty()) reject("elln N_list must be nonempty");
  for (size_t i = 1; i < elln.N_list.size(); ++i)
    if (elln.N_list[i] <= elln.N_list[i - 1])
      reject("elln N_list must be strictly increasing");
  if (!(elln.phi_sup > 0.0)) reject("elln phi_sup must be > 0");
  if (elln.kappa < 0.0) reject("elln kappa must be >= 0");
  for (int p : elln.p_list)
    if (p != 1 && p != 2 && p != 4) reject("elln p_list entries must be in {1,2,4}");
  if (increments.lag_fractions.size() < 3)
    reject("increments needs at least 3 lag fractions");
  for (double f : increments.lag_fractions)
    if (!(f > 0.0 && f <= 1.0)) reject("increment lag fractions must lie in (0,1]");
}

std::vector<TestFunction> ScenarioConfig::test_functions() const {
  std::vector<TestFunction> out;
  out.reserve(phis.size());
  for (const TestFunctionSpec& p : phis) out.push_back(p.materialize(d));
  return out;
}

std::string ScenarioConfig::manifest_json() const {
  ordered_json j;
  j["version"] = kVersion;
  ordered_json s;
  s["d"] = d;
  s["N_list"] = N_list;
  s["T"] = T;
  s["n_steps"] = n_steps;
  s["L"] = L;
  s["M"] = M;
  s["Xi"] = Xi;
  s["M_f"] = M_f;
  s["alpha"] = alpha;
  s["alpha_interaction"] = alpha_interaction;
  s["R"] = R;
  s["seed"] = std::to_string(seed);
  s["snapshot_stride"] = snapshot_stride;
  j["scenario"] = s;

  ordered_json k;
  k["variant"] = kernel.variant_name();
  if (kernel.variant == KernelVariant::Gaussian) {
    k["amplitude"] = kernel.amplitude;
    k["width"] = kernel.width;
  } else if (kernel.variant == KernelVariant::Bump) {
    k["amplitude"] = kernel.amplitude;
    k["radius"] = kernel.radius;
  }
  j["kernel"] = k;
  j["sigma"] = coeff_json(sigma);
  j["nu"] = coeff_json(nu);

  ordered_json r;
  r["variant"] = rho0.variant_name();
  if (rho0.variant == DensityVariant::Uniform) {
    r["half_width"] = rho0.uniform_half_width;
  } else {
    ordered_json comps = ordered_json::array();
    for (const MixtureComponent& c : rho0.components) {
      ordered_json cj;
      cj["weight"] = c.weight;
      cj["mean"] = c.mean;
      cj["sd"] = c.sd;
      comps.push_back(cj);
    }
    r["components"] = comps;
  }
  j["rho0"] = r;

  ordered_json ph = ordered_json::array();
  for (const TestFunctionSpec& p : phis) {
    ordered_json pj;
    pj["name"] = p.name;
    pj["kind"] = p.kind;
    pj["radius"] = p.radius;
    pj["center"] = p.center.empty() ? std::vector<double>(d, 0.0) : p.center;
    pj["amplitude"] = p.amplitude;
    if (p.kind == "monomial") {
      pj["axis"] = p.axis;
      pj["power"] = p.power;
    }
    ph.push_back(pj);
  }
  j["phi"] = ph;

  ordered_json e;
  e["samples"] = elln.samples;
  e["N_list"] = elln.N_list;
  e["phi_sup"] = elln.phi_sup;
  e["kappa"] = elln.kappa;
  e["p_list"] = elln.p_list;
  j["elln"] = e;
  j["increments"]["lag_fractions"] = increments.lag_fractions;

  const RngPlan plan = rng_plan();
  ordered_json sp;
  sp["master"] = std::to_string(plan.master);
  sp["init"] = std::to_string(plan.init_seed(0));
  sp["idiosyncratic"] = std::to_string(plan.idio_seed(0, 0));
  sp["common_noise"] = std::to_string(plan.common_noise_seed(0));
  sp["white_noise"] = std::to_string(plan.white_noise_seed(0));
  sp["sampling"] = std::to_string(plan.sampling_seed(0));
  j["seed_plan"] = sp;
  return j.dump(2) + "\n";
}

ScenarioConfig parse_config_text(const std::string& text, const std::string& origin) {
  const ParsedFile file = parse_raw(text, origin);
  ScenarioConfig cfg;

  auto find = [&](const std::string& name) -> const Section* {
    auto it = file.sections.find(name);
    return it == file.sections.end() ? nullptr : &it->second;
  };

  const Section* sc = find("scenario");
  if (!sc) throw ConfigError(origin + ": missing required section [scenario]");
  cfg.d = static_cast<int>(sc->get_int("d", 1));
  cfg.N_list = sc->get_int_list("N_list", {1000});
  cfg.T = sc->get_double("T", 0.5);
  cfg.n_steps = static_cast<int>(sc->get_int("n_steps", 100));
  cfg.L = sc->get_double("L", 8.0);
  cfg.M = static_cast<int>(sc->get_int("M", 256));
  cfg.Xi = sc->get_double("Xi", cfg.d == 1 ? 64.0 : 32.0);
  cfg.M_f = static_cast<int>(sc->get_int("M_f", cfg.d == 1 ? 1024 : 256));
  cfg.alpha = sc->get_double("alpha", 1.0);
  cfg.alpha_interaction = sc->get_double("alpha_interaction", cfg.d / 2.0 + 2.1);
  cfg.R = static_cast<int>(sc->get_int("R", 200));
  cfg.seed = sc->get_u64("seed", 1);
  cfg.snapshot_stride = static_cast<int>(sc->get_int("stride", 1));
  sc->finish();

  cfg.kernel = find("kernel") ? parse_kernel(*find("kernel"), cfg.d)
                              : make_zero_kernel(cfg.d);
  cfg.sigma = find("sigma") ? parse_coefficient(*find("sigma"), cfg.d, 1.0)
                            : make_scaled_identity_coeff(cfg.d, 1.0);
  cfg.nu = find("nu") ? parse_coefficient(*find("nu"), cfg.d, 0.0)
                      : make_scaled_identity_coeff(cfg.d, 0.0);
  cfg.rho0 = find("rho0") ? parse_rho0(*find("rho0"), cfg.d)
                          : make_gaussian_density(cfg.d, std::vector<double>(cfg.d, 0.0), 1.0);

  bool any_phi = false;
  for (const std::string& name : file.order) {
    if (name.rfind("phi:", 0) != 0) continue;
    any_phi = true;
    cfg.phis.push_back(parse_phi(file.sections.at(name), trim(name.substr(4))));
  }
  if (!any_phi) {
    TestFunctionSpec b;
    b.name = "bump0";
    cfg.phis.push_back(b);
    TestFunctionSpec m;
    m.name = "xwin";
    m.kind = "monomial";
    cfg.phis.push_back(m);
  }

  if (const Section* el = find("elln")) {
    cfg.elln.samples = static_cast<int>(el->get_int("samples", cfg.elln.samples));
    cfg.elln.N_list = el->get_int_list("N_list", cfg.elln.N_list);
    cfg.elln.phi_sup = el->get_double("phi_sup", cfg.elln.phi_sup);
    cfg.elln.kappa = el->get_double("kappa", cfg.elln.kappa);
    cfg.elln.p_list = el->get_int_list("p_list", cfg.elln.p_list);
    el->finish();
  }
  if (const Section* inc = find("increments")) {
    cfg.increments.lag_fractions =
        inc->get_double_list("lag_fractions", cfg.increments.lag_fractions);
    inc->finish();
  }

  static const std::set<std::string> known = {"scenario", "kernel", "sigma",
                                              "nu", "rho0", "elln", "increments"};
  for (const std::string& name : file.order)
    if (!known.count(name) && name.rfind("phi:", 0) != 0)
      throw ConfigError(origin + ": unknown section [" + name + "]");

  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace fluctlab::scenario

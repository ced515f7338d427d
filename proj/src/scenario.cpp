#include "pmcm/scenario.hpp"

#include "pmcm/approximation.hpp"
#include "pmcm/certificates.hpp"
#include "pmcm/errors.hpp"
#include "pmcm/minimizer.hpp"
#include "pmcm/radial_solver.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace pmcm {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kTasks = {"radial", "minimize", "verify", "gamma", "family", "maxprinciple", "checks"};

[[noreturn]] void field_error(const std::string& field, const std::string& msg) {
  throw ConfigError("field '" + field + "': " + msg);
}

double number_at(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) field_error(path + key, "missing");
  if (!j.at(key).is_number()) field_error(path + key, "expected a number");
  return j.at(key).get<double>();
}

json task_defaults(const std::string& task) {
  json d = {{"tol", 1e-8}, {"seed", 0}, {"jobs", 1}, {"resolution", 4096}};
  if (task == "radial" || task == "family") d["grid_step"] = 1e-3;
  if (task == "family") d["members"] = 5;
  if (task == "minimize") {
    d["grid_step"] = 1e-3;
    d["tol_gap"] = 1e-6;
    d["max_iter"] = 1000000;
    d["check_every"] = 1000;
  }
  if (task == "verify") {
    d["grid_step"] = 1e-3;
    d["discrete"] = true;
    d["tol_gap"] = 1e-8;
    d["max_iter"] = 1000000;
    d["check_every"] = 1000;
  }
  if (task == "gamma") {
    d["grid_step"] = 5e-3;
    d["tol_gap"] = 1e-6;
    d["max_iter"] = 1000000;
    d["check_every"] = 1000;
    d["deltas"] = json::array({0.2, 0.1, 0.05, 0.025});
  }
  if (task == "maxprinciple") {
    d["grid_step"] = 2e-3;
    d["tol"] = 1e-6;
    d["tol_gap"] = 1e-8;
    d["max_iter"] = 1000000;
    d["check_every"] = 1000;
  }
  if (task == "checks") d["samples"] = 64;
  return d;
}

RadialMeasure measure_from_scenario(const json& domain, const json& measure, const std::string& path) {
  json mj = measure.is_null() ? json::object() : measure;
  if (!mj.is_object()) field_error(path, "expected an object");
  for (const char* k : {"n", "r_a", "r_b", "R_B"}) mj[k] = domain.at(k);
  RadialMeasure m;
  try {
    m = measure_from_json(mj);
  } catch (const json::exception& e) {
    field_error(path, e.what());
  }
  std::sort(m.atoms.begin(), m.atoms.end(), [](const Atom& a, const Atom& b) { return a.radius < b.radius; });
  try {
    m.validate();
  } catch (const std::exception& e) {
    field_error(path, e.what());
  }
  return m;
}

RadialDomain domain_from_json(const json& d) {
  if (!d.is_object()) field_error("domain", "expected an object");
  RadialDomain dom;
  if (!d.contains("n") || !d.at("n").is_number_integer()) field_error("domain.n", "expected an integer");
  dom.n = d.at("n").get<int>();
  dom.r_a = number_at(d, "r_a", "domain.");
  dom.r_b = number_at(d, "r_b", "domain.");
  dom.R_B = number_at(d, "R_B", "domain.");
  if (dom.n < 2) field_error("domain.n", "dimension must be at least 2");
  if (!(dom.r_a > 0.0)) field_error("domain.r_a", "must be positive");
  if (!(dom.r_a < dom.r_b)) field_error("domain.r_b", "need r_a < r_b");
  if (!(dom.r_b < dom.R_B)) field_error("domain.R_B", "need r_b < R_B");
  return dom;
}

// phi_b may be given relative to the oscillation bound of the radial solver.
double resolve_phi_b(const json& b, const RadialMeasure& m, double phi_a, const std::string& path) {
  if (!b.contains("phi_b")) field_error(path + "phi_b", "missing");
  const json& v = b.at("phi_b");
  if (v.is_number()) return v.get<double>();
  if (v.is_object() && v.contains("above_oscillation_bound")) {
    if (!m.atoms_only()) field_error(path + "phi_b", "oscillation bound needs an atomic measure");
    const RadialSolveResult r = solve_dirichlet_radial(m, phi_a, phi_a);
    if (!(r.L_hat < 1.0)) field_error(path + "phi_b", "oscillation bound needs a non-extremal measure");
    return phi_a + r.increment_high + v.at("above_oscillation_bound").get<double>();
  }
  field_error(path + "phi_b", "expected a number or {\"above_oscillation_bound\": x}");
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + std::min(byte, text.size()), '\n'));
}

// Exact rational from the shortest decimal that round-trips the double.
boost::multiprecision::cpp_rational exact_decimal(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific);
  std::string s(buf, res.ptr);
  const auto e = s.find('e');
  const int exp10 = std::stoi(s.substr(e + 1));
  std::string mant = s.substr(0, e);
  bool neg = false;
  if (mant[0] == '-') neg = true, mant.erase(0, 1);
  int frac = 0;
  if (const auto dot = mant.find('.'); dot != std::string::npos) {
    frac = static_cast<int>(mant.size() - dot - 1);
    mant.erase(dot, 1);
  }
  boost::multiprecision::cpp_int num(mant);
  boost::multiprecision::cpp_int den = 1;
  const int p = exp10 - frac;
  boost::multiprecision::cpp_int ten = 10;
  if (p >= 0) num *= boost::multiprecision::pow(ten, p);
  else den = boost::multiprecision::pow(ten, -p);
  boost::multiprecision::cpp_rational r(num, den);
  return neg ? boost::multiprecision::cpp_rational(-r) : r;
}

std::string rational_string(const boost::multiprecision::cpp_rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

MinimizeOptions options_from(const json& p) {
  MinimizeOptions o;
  o.tol_gap = p.at("tol_gap").get<double>();
  o.max_iter = p.at("max_iter").get<std::size_t>();
  o.check_every = p.at("check_every").get<std::size_t>();
  return o;
}

std::vector<double> atom_breaks(const RadialMeasure& m) {
  std::vector<double> b;
  for (const Atom& a : m.atoms) b.push_back(a.radius);
  return b;
}

// ---------------------------------------------------------------------------
// Embedded assertions

const json* walk(const json& root, const std::string& path) {
  const json* cur = &root;
  std::stringstream ss(path);
  std::string key;
  while (std::getline(ss, key, '.')) {
    if (cur->is_object()) {
      if (!cur->contains(key)) return nullptr;
      cur = &cur->at(key);
    } else if (cur->is_array()) {
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
      if (ec != std::errc() || ptr != key.data() + key.size() || idx >= cur->size()) return nullptr;
      cur = &cur->at(idx);
    } else {
      return nullptr;
    }
  }
  return cur;
}

bool approx_equal(const json& actual, const json& expected, double tol) {
  if (expected.is_array()) {
    if (!actual.is_array() || actual.size() != expected.size()) return false;
    for (std::size_t i = 0; i < expected.size(); ++i)
      if (!approx_equal(actual[i], expected[i], tol)) return false;
    return true;
  }
  if (!actual.is_number() || !expected.is_number()) return actual == expected;
  return std::abs(actual.get<double>() - expected.get<double>()) <= tol;
}

json check_expectations(const json& expect, const json& results, bool& all_pass) {
  json out = json::array();
  for (const auto& [path, want] : expect.items()) {
    const json* got = walk(results, path);
    bool ok = false;
    if (got) {
      if (want.is_object() && want.contains("approx")) {
        ok = approx_equal(*got, want.at("approx"), want.value("tol", 0.0));
      } else if (want.is_object() && (want.contains("max") || want.contains("min"))) {
        ok = got->is_number();
        if (ok && want.contains("max")) ok = got->get<double>() <= want.at("max").get<double>();
        if (ok && want.contains("min")) ok = got->get<double>() >= want.at("min").get<double>();
      } else {
        ok = (*got == want);
      }
    }
    all_pass = all_pass && ok;
    out.push_back({{"path", path}, {"expected", want}, {"actual", got ? *got : json(nullptr)}, {"pass", ok}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tasks

struct TaskResult {
  json results = json::object();
  std::map<std::string, std::string> files;
  bool task_ok = true;
  std::string failure;
};

json windows_json(const RadialMeasure& m) {
  json arr = json::array();
  const int n = m.domain.n;
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    using boost::multiprecision::cpp_rational;
    const double inner = i == 0 ? m.domain.r_a : m.atoms[i - 1].radius;
    const JumpWindow<cpp_rational> w = classify_jump<cpp_rational>(n, exact_decimal(inner), exact_decimal(m.atoms[i].radius),
                                                                   exact_decimal(m.atoms[i].weight));
    arr.push_back({{"radius", m.atoms[i].radius},
                   {"mu", m.atoms[i].weight},
                   {"class", to_string(w.cls)},
                   {"lower", static_cast<double>(w.lower)},
                   {"upper", static_cast<double>(w.upper)},
                   {"lower_exact", rational_string(w.lower)},
                   {"upper_exact", rational_string(w.upper)}});
  }
  return arr;
}

json coefficients_json(const RadialMeasure& m, const json& p) {
  using boost::multiprecision::cpp_rational;
  std::vector<std::pair<cpp_rational, cpp_rational>> atoms;
  for (const Atom& a : m.atoms) atoms.emplace_back(exact_decimal(a.radius), exact_decimal(a.weight));
  int kind = static_cast<int>(FieldAnchor::Kind::Value);
  std::size_t index = 0;
  cpp_rational g0 = 0;
  json anchor;
  if (p.contains("anchor")) {
    const json& a = p.at("anchor");
    if (a.contains("jump_rule")) {
      kind = static_cast<int>(FieldAnchor::Kind::JumpRule);
      index = a.at("jump_rule").get<std::size_t>();
    } else {
      index = a.value("interval", std::size_t{0});
      g0 = exact_decimal(a.value("gamma", 0.0));
    }
  } else {
    // first atom that admits a jump
    const json w = windows_json(m);
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i]["class"] == "JumpUp" || w[i]["class"] == "JumpDown") {
        kind = static_cast<int>(FieldAnchor::Kind::JumpRule);
        index = i;
        break;
      }
  }
  if (kind == static_cast<int>(FieldAnchor::Kind::JumpRule)) {
    if (index >= m.atoms.size()) field_error("params.anchor.jump_rule", "no such atom");
    anchor = {{"jump_rule", index}};
  } else {
    if (index > m.atoms.size()) field_error("params.anchor.interval", "no such interval");
    anchor = {{"interval", index}, {"gamma", static_cast<double>(g0)}};
  }
  const FieldCoefficients<cpp_rational> fc =
      propagate_field<cpp_rational>(m.domain.n, exact_decimal(m.domain.r_a), atoms, kind, index, g0);
  json g = json::array(), ge = json::array();
  for (const cpp_rational& v : fc.gamma) {
    g.push_back(static_cast<double>(v));
    ge.push_back(rational_string(v));
  }
  json out = {{"anchor", anchor}, {"gamma", g}, {"gamma_exact", ge}, {"feasible", fc.feasible}};
  if (!fc.feasible) out["offending_interval"] = fc.offending;
  return out;
}

TaskResult task_radial(const Scenario& s) {
  TaskResult t;
  const RadialMeasure& m = s.measure;
  t.results["classification"] = windows_json(m);
  if (!m.atoms.empty()) t.results["coefficients"] = coefficients_json(m, s.params);
  const RadialSolveResult r = solve_dirichlet_radial(m, s.phi_a, s.phi_b);
  t.results["status"] = to_string(r.status);
  t.results["diagnostic"] = r.diagnostic;
  t.results["L_hat"] = r.L_hat;
  t.results["increment_low"] = r.increment_low;
  t.results["increment_high"] = r.increment_high;
  if (!r.solution) {
    t.task_ok = false;
    t.failure = r.diagnostic;
    return t;
  }
  const RadialSolution& sol = *r.solution;
  t.results["solution"] = sol.to_json();
  t.results["gamma"] = sol.gammas();
  t.results["energy"] = energy_radial(sol, m);
  const std::vector<double> grid = radial_grid(m.domain, s.params.at("grid_step").get<double>(), atom_breaks(m));
  t.files["profile.csv"] = sol.sample(grid).to_csv();
  t.files["field.csv"] = sol.field(grid).to_csv();
  return t;
}

struct ClosedForm {
  bool available = false;
  RadialSolution sol;
};

ClosedForm closed_form(const RadialMeasure& m, double phi_a, double phi_b) {
  ClosedForm c;
  if (!m.atoms_only()) return c;
  const RadialSolveResult r = solve_dirichlet_radial(m, phi_a, phi_b);
  if (!r.solution) return c;
  c.available = true;
  c.sol = *r.solution;
  return c;
}

TaskResult task_minimize(const Scenario& s) {
  TaskResult t;
  const RadialMeasure& m = s.measure;
  const RadialProblem p = make_radial_problem(m, s.phi_a, s.phi_b, s.params.at("grid_step").get<double>());
  const RadialMinimizer r = minimize(p, options_from(s.params));
  t.results["report"] = r.report.to_json();
  t.results["energy"] = r.report.energy;
  t.results["gap"] = r.report.gap;
  t.results["converged"] = r.report.converged;
  if (const ClosedForm c = closed_form(m, s.phi_a, s.phi_b); c.available) {
    const RadialProfile exact = c.sol.sample(p.grid);
    const RadialProfile zero(exact.domain(), exact.grid(), std::vector<double>(exact.nodes(), 0.0));
    const double e = energy_radial(c.sol, m);
    t.results["closed_form_energy"] = e;
    t.results["energy_rel_diff"] = std::abs(r.report.energy - e) / std::abs(e);
    t.results["l1_rel"] = l1_distance(r.u, exact) / l1_distance(exact, zero);
  }
  t.files["profile.csv"] = r.u.to_csv();
  t.files["field.csv"] = r.T.to_csv();
  if (!r.report.converged) {
    t.task_ok = false;
    t.failure = "minimizer did not reach the gap tolerance: " + r.report.status;
  }
  return t;
}

TaskResult task_verify(const Scenario& s) {
  TaskResult t;
  const RadialMeasure& m = s.measure;
  const double h = s.params.at("grid_step").get<double>();
  const double tol = s.params.at("tol").get<double>();
  const HahnSplit lam = hahn_lambda(m);
  std::vector<std::string> failed;
  if (const ClosedForm c = closed_form(m, s.phi_a, s.phi_b); c.available) {
    const std::vector<double> grid = radial_grid(m.domain, h, atom_breaks(m));
    const CertificateReport rep = verify_weak_solution(c.sol.sample(grid), c.sol.field(grid), m, lam, tol);
    t.results["analytic"] = rep.to_json();
    if (!rep.pass()) failed.push_back("analytic: " + rep.failed_conditions());
  }
  if (s.params.at("discrete").get<bool>()) {
    const RadialProblem p = make_radial_problem(m, s.phi_a, s.phi_b, h);
    const RadialMinimizer r = minimize(p, options_from(s.params));
    const double dtol = std::max(1e-4, 10.0 * r.report.gap);
    const CertificateReport rep = verify_weak_solution(r.u, r.T, m, lam, dtol);
    t.results["minimizer"] = r.report.to_json();
    t.results["discrete"] = rep.to_json();
    if (!rep.pass()) failed.push_back("discrete: " + rep.failed_conditions());
    t.files["profile.csv"] = r.u.to_csv();
    t.files["field.csv"] = r.T.to_csv();
  }
  if (!failed.empty()) {
    t.task_ok = false;
    std::string msg = "certificate failed for conditions";
    for (const auto& f : failed) msg += " [" + f + "]";
    t.failure = msg;
  }
  return t;
}

TaskResult task_gamma(const Scenario& s) {
  TaskResult t;
  GammaConfig cfg;
  cfg.measure = s.measure;
  cfg.phi_a = s.phi_a;
  cfg.phi_b = s.phi_b;
  cfg.h = s.params.at("grid_step").get<double>();
  cfg.deltas = s.params.at("deltas").get<std::vector<double>>();
  cfg.options = options_from(s.params);
  cfg.resolution = s.params.at("resolution").get<int>();
  cfg.jobs = s.params.at("jobs").get<int>();
  try {
    const GammaTable table = gamma_experiment(cfg);
    t.results["table"] = table.to_json();
    t.results["monotone"] = table.monotone;
    t.results["final_gap"] = table.final_gap();
    t.results["final_abs_gap"] = std::abs(table.final_gap());
    double worst_L = 0.0;
    for (const GammaRow& r : table.rows) worst_L = std::max(worst_L, r.L_hat);
    t.results["max_L_hat"] = worst_L;
    if (const ClosedForm c = closed_form(s.measure, s.phi_a, s.phi_b); c.available)
      t.results["closed_form_energy"] = energy_radial(c.sol, s.measure);
    t.files["gamma.csv"] = table.to_csv();
    if (!table.monotone) {
      t.task_ok = false;
      t.failure = "energy gaps do not decrease within twice the solver tolerance";
    }
  } catch (const Refused& e) {
    t.task_ok = false;
    t.failure = e.what();
    t.results["refused"] = e.what();
  }
  return t;
}

TaskResult task_family(const Scenario& s) {
  TaskResult t;
  const RadialMeasure& m = s.measure;
  const RadialSolveResult r = solve_dirichlet_radial(m, s.phi_a, s.phi_b);
  t.results["status"] = to_string(r.status);
  t.results["diagnostic"] = r.diagnostic;
  t.results["oscillation_bound"] = r.increment_high;
  if (!r.family) {
    t.task_ok = false;
    t.failure = "no solution family for these data: " + r.diagnostic;
    return t;
  }
  const SolutionFamily& fam = *r.family;
  const int count = s.params.at("members").get<int>();
  if (count < 2) field_error("params.members", "need at least two members");
  const std::vector<double> grid = radial_grid(m.domain, s.params.at("grid_step").get<double>(), atom_breaks(m));
  json locs = json::array();
  for (std::size_t j : fam.locations()) locs.push_back(j == 0 ? m.domain.r_a : m.atoms[j - 1].radius);
  t.results["locations"] = locs;
  t.results["deficit"] = fam.deficit();

  json members = json::array();
  std::vector<RadialProfile> profiles;
  double e_min = INFINITY, e_max = -INFINITY;
  bool traces_equal = true;
  std::ostringstream csv;
  csv.precision(17);
  csv << "member,t,energy,trace_inner,trace_outer\n";
  for (int k = 0; k < count; ++k) {
    const double tk = fam.deficit() * k / (count - 1);
    std::vector<double> heights(fam.locations().size(), 0.0);
    heights[0] = tk;
    heights[1] = fam.deficit() - tk;
    const RadialSolution sol = fam.member(heights);
    const double e = energy_radial(sol, m);
    const RadialProfile u = sol.sample(grid);
    json js = json::array();
    for (const SolutionJump& j : sol.jumps()) js.push_back({{"radius", j.radius}, {"height", j.height}});
    members.push_back({{"t", tk}, {"energy", e}, {"trace_inner", u.trace_inner()}, {"trace_outer", u.trace_outer()}, {"jumps", js}});
    csv << k << ',' << tk << ',' << e << ',' << u.trace_inner() << ',' << u.trace_outer() << '\n';
    if (!profiles.empty())
      traces_equal = traces_equal && u.trace_inner() == profiles.front().trace_inner() &&
                     std::abs(u.trace_outer() - profiles.front().trace_outer()) <= 1e-12 * (1.0 + std::abs(u.trace_outer()));
    e_min = std::min(e_min, e);
    e_max = std::max(e_max, e);
    t.files["member_" + std::to_string(k) + ".csv"] = u.to_csv();
    profiles.push_back(u);
  }
  t.files["family.csv"] = csv.str();
  t.results["members"] = members;
  t.results["member_count"] = count;
  t.results["energy_spread_rel"] = (e_max - e_min) / std::abs(e_max);
  t.results["traces_identical"] = traces_equal;
  const MaxPrincipleVerdict v = compare_max_principle(profiles.front(), profiles.back(), m, m, s.params.at("tol").get<double>());
  t.results["max_principle"] = {{"refused", v.refused}, {"failed_hypothesis", v.failed_hypothesis}, {"holds", v.holds}};
  return t;
}

TaskResult task_maxprinciple(const Scenario& s) {
  TaskResult t;
  const json& sec = s.params.at("second");
  const RadialMeasure m2 = sec.contains("measure") ? measure_from_scenario(s.resolved.at("domain"), sec.at("measure"), "params.second.measure")
                                                   : s.measure;
  const double a2 = number_at(sec, "phi_a", "params.second.");
  const double b2 = resolve_phi_b(sec, m2, a2, "params.second.");
  const double h = s.params.at("grid_step").get<double>();
  std::vector<double> breaks = atom_breaks(s.measure);
  for (double b : atom_breaks(m2)) breaks.push_back(b);
  RadialProblem p1 = make_radial_problem(s.measure, s.phi_a, s.phi_b, h, breaks);
  RadialProblem p2 = make_radial_problem(m2, a2, b2, h, breaks);
  const MinimizeOptions opt = options_from(s.params);
  const RadialMinimizer r1 = minimize(p1, opt);
  const RadialMinimizer r2 = minimize(p2, opt);
  const MaxPrincipleVerdict v = compare_max_principle(r1.u, r2.u, s.measure, m2, s.params.at("tol").get<double>());
  t.results["first"] = r1.report.to_json();
  t.results["second"] = r2.report.to_json();
  t.results["verdict"] = {{"refused", v.refused},
                          {"failed_hypothesis", v.failed_hypothesis},
                          {"holds", v.holds},
                          {"worst_violation", v.worst_violation},
                          {"worst_radius", v.worst_radius}};
  t.files["profile_first.csv"] = r1.u.to_csv();
  t.files["profile_second.csv"] = r2.u.to_csv();
  return t;
}

TaskResult task_checks(const Scenario& s) {
  TaskResult t;
  const RadialMeasure& m = s.measure;
  const NonExtremalityReport ne = nonextremality(m, s.params.at("resolution").get<int>());
  t.results["nonextremality"] = {{"L_hat", ne.L_hat}, {"s", ne.s}, {"t", ne.t}, {"candidates", ne.candidates},
                                 {"lower_bound", ne.lower_bound}};
  if (ne.analytic) t.results["nonextremality"]["analytic"] = *ne.analytic;
  t.results["L_hat"] = ne.L_hat;
  const BallReport b = ball_condition_check(m, s.params.at("samples").get<int>());
  t.results["ball"] = {{"worst_ratio", b.worst_ratio}, {"center_radius", b.center_radius}, {"ball_radius", b.ball_radius},
                       {"violated", b.violated}};
  const DensityBound db = density_bound_check(m);
  t.results["density_bound"] = {{"ok", db.ok}, {"Lambda", db.Lambda}, {"rho_bar", db.rho_bar}, {"failure", db.failure}};
  t.results["classification"] = windows_json(m);
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------

json read_scenario_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << "line " << line_of(text, e.byte) << ": " << e.what();
    throw ConfigError(os.str());
  }
}

json read_scenario_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return read_scenario_text(ss.str());
}

Scenario parse_scenario(const json& j, const RunOverrides& ov) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer())
    field_error("schema_version", "missing or not an integer");
  if (j.at("schema_version").get<int>() != kScenarioSchemaVersion)
    field_error("schema_version", "unsupported version " + j.at("schema_version").dump());
  Scenario s;
  if (!j.contains("name") || !j.at("name").is_string()) field_error("name", "missing or not a string");
  s.name = j.at("name").get<std::string>();
  s.description = j.value("description", "");
  if (!j.contains("task") || !j.at("task").is_string()) field_error("task", "missing or not a string");
  s.task = j.at("task").get<std::string>();
  if (!kTasks.count(s.task)) field_error("task", "unknown task '" + s.task + "'");
  if (!j.contains("domain")) field_error("domain", "missing");
  const RadialDomain dom = domain_from_json(j.at("domain"));
  const json domain = {{"n", dom.n}, {"r_a", dom.r_a}, {"r_b", dom.r_b}, {"R_B", dom.R_B}};
  s.measure = measure_from_scenario(domain, j.value("measure", json::object()), "measure");

  json params = task_defaults(s.task);
  if (j.contains("params")) {
    if (!j.at("params").is_object()) field_error("params", "expected an object");
    for (const auto& [k, v] : j.at("params").items()) params[k] = v;
  }
  if (ov.tol) params["tol"] = *ov.tol;
  if (ov.grid) params["grid_step"] = *ov.grid;
  if (ov.seed) params["seed"] = *ov.seed;
  if (ov.jobs) params["jobs"] = *ov.jobs;
  if (params.contains("grid_step") && !(params.at("grid_step").get<double>() > 0.0))
    field_error("params.grid_step", "must be positive");
  if (s.task == "maxprinciple" && !params.contains("second")) field_error("params.second", "missing for maxprinciple");
  if (s.task == "gamma") {
    if (!params.at("deltas").is_array() || params.at("deltas").empty()) field_error("params.deltas", "expected a non-empty list");
  }
  s.params = params;

  json boundary = j.value("boundary", json{{"phi_a", 0.0}, {"phi_b", 0.0}});
  s.phi_a = boundary.contains("phi_a") ? number_at(boundary, "phi_a", "boundary.") : 0.0;
  if (!boundary.contains("phi_b")) boundary["phi_b"] = 0.0;
  s.phi_b = resolve_phi_b(boundary, s.measure, s.phi_a, "boundary.");
  s.expect = j.value("expect", json::object());
  if (!s.expect.is_object()) field_error("expect", "expected an object");

  s.resolved = {{"schema_version", kScenarioSchemaVersion},
                {"name", s.name},
                {"description", s.description},
                {"task", s.task},
                {"domain", domain},
                {"measure", measure_to_json(s.measure)},
                {"boundary", {{"phi_a", s.phi_a}, {"phi_b", s.phi_b}, {"phi_b_given", boundary.at("phi_b")}}},
                {"params", s.params},
                {"expect", s.expect}};
  return s;
}

std::vector<Diagnostic> validate_scenario(const json& j) {
  std::vector<Diagnostic> out;
  Scenario s;
  try {
    s = parse_scenario(j);
  } catch (const std::exception& e) {
    std::string msg = e.what(), field;
    if (msg.rfind("field '", 0) == 0) {
      const auto end = msg.find("': ");
      field = msg.substr(7, end - 7);
      msg = msg.substr(end + 3);
    }
    out.push_back({"error", field, msg});
    return out;
  }
  const RadialMeasure& m = s.measure;
  const json w = windows_json(m);
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i]["class"] == "Infeasible") {
      std::ostringstream os;
      os << "necessary condition violated at r=" << m.atoms[i].radius << " (|mu|=" << std::abs(m.atoms[i].weight)
         << " exceeds the window [" << w[i]["lower"].get<double>() << ", " << w[i]["upper"].get<double>() << "])";
      out.push_back({"warning", "measure.atoms[" + std::to_string(i) + "]", os.str()});
    }
  const double L = nonextremality(m, s.params.value("resolution", 4096)).L_hat;
  if (!(L < 1.0)) {
    std::ostringstream os;
    os << "non-extremality estimate L_hat=" << L << " is not below 1";
    out.push_back({"warning", "measure", os.str()});
  }
  if (s.task == "gamma") {
    for (double d : s.params.at("deltas").get<std::vector<double>>()) try {
        (void)mollify_measure(m, d);
      } catch (const std::exception& e) {
        out.push_back({"error", "params.deltas", e.what()});
      }
  }
  if ((s.task == "radial" || s.task == "family") && !m.atoms_only())
    out.push_back({"error", "measure.density", "task '" + s.task + "' needs an atomic measure"});
  return out;
}

RunOutcome run_scenario(const Scenario& s) {
  RunOutcome out;
  TaskResult t;
  try {
    if (s.task == "radial") t = task_radial(s);
    else if (s.task == "minimize") t = task_minimize(s);
    else if (s.task == "verify") t = task_verify(s);
    else if (s.task == "gamma") t = task_gamma(s);
    else if (s.task == "family") t = task_family(s);
    else if (s.task == "maxprinciple") t = task_maxprinciple(s);
    else t = task_checks(s);
  } catch (const ConfigError& e) {
    out.exit_code = 2;
    out.report = {{"version", PMCM_VERSION}, {"config", s.resolved}, {"error", e.what()}, {"pass", false}};
    return out;
  } catch (const Refused& e) {
    t.task_ok = false;
    t.failure = std::string("refused: ") + e.what();
  }
  bool pass = t.task_ok;
  const json assertions = check_expectations(s.expect, t.results, pass);
  out.report = {{"version", PMCM_VERSION},
                {"config", s.resolved},
                {"results", t.results},
                {"assertions", assertions},
                {"pass", pass}};
  if (!t.task_ok) out.report["failure"] = t.failure;
  out.files = std::move(t.files);
  out.exit_code = pass ? 0 : 1;
  return out;
}

RunOutcome run_scenario_json(const json& j, const RunOverrides& ov) {
  try {
    return run_scenario(parse_scenario(j, ov));
  } catch (const ConfigError& e) {
    RunOutcome out;
    out.exit_code = 2;
    out.report = {{"version", PMCM_VERSION}, {"error", e.what()}, {"pass", false}};
    return out;
  }
}

void write_outcome(const RunOutcome& out, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream(dir / "report.json") << out.report.dump(2) << '\n';
  for (const auto& [name, content] : out.files) std::ofstream(dir / name) << content;
}

fs::path bundled_scenario_dir() {
  if (const char* env = std::getenv("PMCM_SCENARIO_DIR")) return env;
  return PMCM_SCENARIO_DIR;
}

fs::path resolve_scenario(const std::string& name_or_path) {
  const fs::path p(name_or_path);
  if (fs::exists(p)) return p;
  const fs::path b = bundled_scenario_dir() / (name_or_path + ".json");
  if (fs::exists(b)) return b;
  throw ConfigError("no scenario file or bundled scenario named '" + name_or_path + "'");
}

std::vector<std::pair<std::string, std::string>> list_bundled_scenarios() {
  std::vector<std::pair<std::string, std::string>> out;
  const fs::path dir = bundled_scenario_dir();
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    std::string desc;
    try {
      desc = read_scenario_file(e.path()).value("description", "");
    } catch (const std::exception& ex) {
      desc = std::string("unreadable: ") + ex.what();
    }
    out.emplace_back(e.path().stem().string(), desc);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace pmcm

#include "lavlab/gap.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lavlab/catalog.hpp"
#include "lavlab/errors.hpp"
#include "lavlab/support.hpp"
#include "lavlab/version.hpp"

namespace lavlab {

namespace {

using ordered_json = nlohmann::ordered_json;

Mesh1D graded_family(const Lagrangian& L, int n, double beta) {
  const double a = L.domain.lo[0], b = L.domain.hi[0];
  if (std::isfinite(L.singular_at) && L.singular_at > a && L.singular_at < b) {
    return Mesh1D::graded_at(a, b, n, beta, L.singular_at);
  }
  return Mesh1D::graded(a, b, n, beta);
}

void validate_experiment(const GapExperiment& ex) {
  if (ex.levels.empty()) throw invalid_argument("gap probe: need at least one level");
  for (std::size_t i = 0; i < ex.levels.size(); ++i) {
    if (ex.levels[i] < 2) throw invalid_argument("gap probe: levels need at least two cells");
    if (i > 0 && ex.levels[i] <= ex.levels[i - 1]) {
      throw invalid_argument("gap probe: levels must be strictly increasing");
    }
  }
  if (!(ex.graded_beta > 0.0) || !std::isfinite(ex.graded_beta)) {
    throw invalid_argument("gap probe: grading exponent must be positive");
  }
  if (ex.iters < 1) throw invalid_argument("gap probe: need at least one sweep");
  if (ex.restarts < 0) throw invalid_argument("gap probe: restarts must be nonnegative");
}

std::string fmt(double v) { return ordered_json(v).dump(); }

void decide_verdict(GapReport& report) {
  if (report.levels.size() < 2) {
    report.verdict = "INCONCLUSIVE";
    report.notes.push_back("at least two levels are needed for a verdict");
    return;
  }
  const GapLevel& lo = report.levels[report.levels.size() - 2];
  const GapLevel& hi = report.levels.back();
  const bool uniform_stable = hi.uniform_energy >= 0.8 * lo.uniform_energy;
  const bool graded_stable = hi.graded_energy <= lo.graded_energy * 1.05;
  const bool separated = lo.uniform_energy >= 5.0 * lo.graded_energy &&
                         hi.uniform_energy >= 5.0 * hi.graded_energy;
  auto close = [](const GapLevel& l) {
    const double scale = std::max({std::fabs(l.uniform_energy), std::fabs(l.graded_energy), 1e-12});
    return std::fabs(l.uniform_energy - l.graded_energy) <= 0.03 * scale;
  };
  if (!uniform_stable) {
    report.verdict = "INCONCLUSIVE";
    report.notes.push_back("uniform-mesh minimum fell by more than 20% across the top two levels");
    return;
  }
  if (graded_stable && separated) {
    report.verdict = "GAP";
    report.notes.push_back("uniform minimum stays at least 5x above the graded minimum at the top two levels");
    return;
  }
  if (close(lo) && close(hi)) {
    report.verdict = "NO_GAP";
    report.notes.push_back("uniform and graded minima agree within 3% at the top two levels");
    return;
  }
  report.verdict = "INCONCLUSIVE";
  report.notes.push_back("energy trails neither separate by 5x nor agree within 3%");
}

}  // namespace

GapReport lavrentiev_probe(const GapExperiment& ex) {
  const Lagrangian L = make_lagrangian(ex.problem, ex.params);
  return lavrentiev_probe(L, ex);
}

GapReport lavrentiev_probe(const Lagrangian& L, const GapExperiment& ex) {
  if (L.dim != 1) throw invalid_argument("gap probe: one-dimensional problem required");
  validate_experiment(ex);

  BoundaryData bc = L.bc;
  if (std::isfinite(ex.bc_left)) bc.left = ex.bc_left;
  if (std::isfinite(ex.bc_right)) bc.right = ex.bc_right;

  GapReport report;
  report.problem = L.name;
  report.params = L.params;
  report.bc = bc;
  report.seed = ex.seed;
  report.tool_version = version_string;
  report.spec = ex;
  report.spec.problem = L.name;
  report.levels.resize(ex.levels.size());
  for (std::size_t i = 0; i < ex.levels.size(); ++i) report.levels[i].n = ex.levels[i];

  const double a = L.domain.lo[0], b = L.domain.hi[0];
  for (int family = 0; family < 2; ++family) {
    PLFunction prev;
    for (std::size_t li = 0; li < ex.levels.size(); ++li) {
      const int n = ex.levels[li];
      const Mesh1D mesh = family == 0 ? Mesh1D::uniform(a, b, n)
                                      : graded_family(L, n, ex.graded_beta);
      std::vector<double> init;
      if (!prev.nodes.empty()) {
        init.resize(mesh.nodes.size());
        for (std::size_t k = 0; k < mesh.nodes.size(); ++k) init[k] = prev.eval(mesh.nodes[k]);
      }
      const std::uint64_t run_seed =
          mix_seed(ex.seed, static_cast<std::uint64_t>(family) * 1000 + li);
      PLFunction u = minimize_energy(L, mesh, bc, init, ex.iters, ex.restarts, run_seed,
                                     ex.quad_order);
      const double e = energy(L, u, ex.quad_order);
      if (family == 0) {
        report.levels[li].uniform_energy = e;
      } else {
        report.levels[li].graded_energy = e;
      }
      prev = std::move(u);
    }
  }

  decide_verdict(report);
  return report;
}

std::string gap_report_json(const GapReport& report) {
  ordered_json j;
  j["problem"] = report.problem;
  j["params"] = ordered_json::object();
  for (const auto& [k, v] : report.params) j["params"][k] = v;
  j["bc"] = {{"left", report.bc.left}, {"right", report.bc.right}};
  j["levels"] = ordered_json::array();
  j["uniform"] = ordered_json::array();
  j["graded"] = ordered_json::array();
  for (const auto& lv : report.levels) {
    j["levels"].push_back(lv.n);
    j["uniform"].push_back(lv.uniform_energy);
    j["graded"].push_back(lv.graded_energy);
  }
  j["verdict"] = report.verdict;
  j["seed"] = report.seed;
  j["tool_version"] = report.tool_version;
  j["spec"] = {{"graded_beta", report.spec.graded_beta},
               {"iters", report.spec.iters},
               {"restarts", report.spec.restarts},
               {"quad_order", report.spec.quad_order}};
  j["notes"] = report.notes;
  return j.dump(2);
}

std::string gap_report_csv(const GapReport& report) {
  std::ostringstream os;
  os << "n,uniform,graded\n";
  for (const auto& lv : report.levels) {
    os << lv.n << "," << fmt(lv.uniform_energy) << "," << fmt(lv.graded_energy) << "\n";
  }
  return os.str();
}

namespace {

std::string safe_name(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? std::string("report") : out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw io_error("could not open " + path.string() + " for writing");
  os << content;
  if (!os) throw io_error("could not write " + path.string());
}

}  // namespace

void write_gap_reports(const std::string& dir, const std::vector<GapReport>& reports,
                       bool write_dat) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("could not create directory " + dir);

  ordered_json index;
  index["schema_version"] = 1;
  index["reports"] = ordered_json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const std::string base = "gap_" + safe_name(reports[i].problem) + "_" + std::to_string(i);
    write_file(fs::path(dir) / (base + ".json"), gap_report_json(reports[i]));
    write_file(fs::path(dir) / (base + ".csv"), gap_report_csv(reports[i]));
    ordered_json entry;
    entry["problem"] = reports[i].problem;
    entry["verdict"] = reports[i].verdict;
    entry["json"] = base + ".json";
    entry["csv"] = base + ".csv";
    if (write_dat) {
      std::ostringstream os;
      os << "# n uniform graded\n";
      for (const auto& lv : reports[i].levels) {
        os << lv.n << " " << fmt(lv.uniform_energy) << " " << fmt(lv.graded_energy) << "\n";
      }
      write_file(fs::path(dir) / (base + ".dat"), os.str());
      entry["dat"] = base + ".dat";
    }
    index["reports"].push_back(entry);
  }
  write_file(fs::path(dir) / "index.json", index.dump(2));
}

double ManiaReference::graded_first_cell(int n, double beta) const {
  return (8.0 / 105.0) * std::pow(static_cast<double>(n), beta);
}

double ManiaReference::minimizer(double x) const { return std::cbrt(x); }

ManiaReference mania_reference() { return ManiaReference{}; }

DemoReport scheme_no_gap_demo(const std::string& problem,
                              const std::map<std::string, double>& params, int steps,
                              std::uint64_t seed) {
  if (steps < 1) throw invalid_argument("demo: need at least one step");
  const Lagrangian L = make_lagrangian(problem, params);
  if (L.dim != 1) throw invalid_argument("demo: one-dimensional problem required");

  // Gate: the scheme's certificates are meaningful only behind a balance
  // condition, so check it first on a trimmed sweep.
  ConditionSpec spec;
  spec.condition = Condition::hiso0;
  const double diam = L.domain.hi[0] - L.domain.lo[0];
  spec.eps = {diam * 0.5, diam * 0.25, diam * 0.125, diam * 0.0625};
  const double a = L.domain.lo[0], b = L.domain.hi[0];
  for (int i = 0; i < 9; ++i) {
    spec.x_points.push_back({a + (b - a) * (0.05 + 0.9 * i / 8.0)});
  }
  spec.t_grid = {-1.0, -0.5, 0.0, 0.5, 1.0};
  spec.ball_samples = 65;
  spec.radial_points = 129;
  const BalanceReport balance = check_condition(L, spec);

  DemoReport demo;
  demo.problem = L.name;
  demo.balance_verdict = balance.verdict;
  if (balance.verdict != Verdict::satisfied) {
    throw unsupported_error("demo: balance condition " + condition_name(spec.condition) +
                            " is not SATISFIED for " + L.name +
                            " (got " + verdict_name(balance.verdict) + ")");
  }
  demo.notes.push_back("balance condition " + condition_name(spec.condition) +
                       " SATISFIED on a trimmed sweep (4 eps levels, 9 sample points)");

  const Mesh1D mesh = graded_family(L, 1024, 2.0);
  const PLFunction minimizer =
      minimize_energy(L, mesh, L.bc, {}, 200, 1, seed, 5);
  const PLFunction captured = minimizer;
  const auto target_fn = [captured](double x) { return captured.eval(x); };

  demo.scheme = run_scheme(L, target_fn, steps);
  const SchemeRow& last = demo.scheme.rows.back();
  demo.final_l1 = last.l1_error;
  demo.final_energy = last.energy;
  demo.target_energy = last.target_energy;
  for (const auto& n : demo.scheme.notes) demo.notes.push_back(n);
  return demo;
}

std::string demo_report_json(const DemoReport& report) {
  ordered_json j;
  j["problem"] = report.problem;
  j["balance_verdict"] = verdict_name(report.balance_verdict);
  j["final_l1"] = report.final_l1;
  j["final_energy"] = report.final_energy;
  j["target_energy"] = report.target_energy;
  j["scheme"] = ordered_json::parse(scheme_report_json(report.scheme));
  j["notes"] = report.notes;
  return j.dump(2);
}

}  // namespace lavlab

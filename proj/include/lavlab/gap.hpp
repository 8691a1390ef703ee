#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "lavlab/balance.hpp"
#include "lavlab/lagrangian.hpp"
#include "lavlab/mesh.hpp"
#include "lavlab/scheme.hpp"

namespace lavlab {

// Mesh-refinement probe: minimize the energy over uniform and graded meshes
// at each level and compare the two energy trails.
struct GapExperiment {
  std::string problem = "mania";
  std::map<std::string, double> params;
  // NaN means "use the problem's boundary data".
  double bc_left = std::numeric_limits<double>::quiet_NaN();
  double bc_right = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> levels = {64, 128, 256, 512, 1024, 2048};
  double graded_beta = 3.0;
  int iters = 400;
  int restarts = 2;
  int quad_order = 5;
  std::uint64_t seed = 0;
};

struct GapLevel {
  int n = 0;
  double uniform_energy = 0.0;
  double graded_energy = 0.0;
};

struct GapReport {
  std::string problem;
  std::map<std::string, double> params;
  BoundaryData bc;
  std::vector<GapLevel> levels;
  std::string verdict;  // "GAP", "NO_GAP" or "INCONCLUSIVE"
  std::uint64_t seed = 0;
  std::string tool_version;
  GapExperiment spec;
  std::vector<std::string> notes;
};

GapReport lavrentiev_probe(const GapExperiment& ex);
GapReport lavrentiev_probe(const Lagrangian& L, const GapExperiment& ex);

std::string gap_report_json(const GapReport& report);
std::string gap_report_csv(const GapReport& report);

// Writes one JSON and one CSV file per report (plus an optional .dat table)
// and always an index.json carrying the schema version.
void write_gap_reports(const std::string& dir, const std::vector<GapReport>& reports,
                       bool write_dat = false);

// Closed forms for the classical one-dimensional pathology: the cost of
// climbing the cube-root profile across a single first cell of width h.
struct ManiaReference {
  double first_cell_cost(double h) const { return (8.0 / 105.0) / h; }
  double uniform_first_cell(int n) const { return (8.0 / 105.0) * n; }
  double graded_first_cell(int n, double beta) const;
  double sobolev_infimum() const { return 0.0; }
  double minimizer(double x) const;
};

ManiaReference mania_reference();

struct DemoReport {
  std::string problem;
  Verdict balance_verdict = Verdict::inconclusive;
  SchemeReport scheme;
  double final_l1 = 0.0;
  double final_energy = 0.0;
  double target_energy = 0.0;
  std::vector<std::string> notes;
};

// Certified no-gap demonstration: refuses unless the balance condition is
// SATISFIED, then approximates a mesh minimizer with the subgraph scheme.
DemoReport scheme_no_gap_demo(const std::string& problem,
                              const std::map<std::string, double>& params, int steps,
                              std::uint64_t seed = 0);

std::string demo_report_json(const DemoReport& report);

}  // namespace lavlab

#include "lavlab.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>
#include <vector>

#include "json.hpp"
#include "lavlab/balance.hpp"
#include "lavlab/catalog.hpp"
#include "lavlab/convex.hpp"
#include "lavlab/errors.hpp"
#include "lavlab/gap.hpp"
#include "lavlab/mesh.hpp"
#include "lavlab/scheme.hpp"
#include "lavlab/version.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

thread_local std::string g_error;

void set_error(const std::string& message) { g_error = message; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
lav_status guard(F&& fn) {
  try {
    fn();
    g_error.clear();
    return LAV_OK;
  } catch (const lavlab::unsupported_error& e) {
    set_error(e.what());
    return LAV_EUNSUPPORTED;
  } catch (const lavlab::io_error& e) {
    set_error(e.what());
    return LAV_EIO;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return LAV_EINVAL;
  } catch (const std::domain_error& e) {
    set_error(e.what());
    return LAV_EDOMAIN;
  } catch (const nlohmann::json::exception& e) {
    set_error(e.what());
    return LAV_EINVAL;
  } catch (const std::bad_alloc&) {
    set_error("out of memory");
    return LAV_ENOMEM;
  } catch (const std::exception& e) {
    set_error(e.what());
    return LAV_EINTERNAL;
  }
}

lav_status fail_invalid(const char* message) {
  set_error(message);
  return LAV_EINVAL;
}

std::map<std::string, double> parse_params(const char* params_json) {
  std::map<std::string, double> out;
  if (params_json == nullptr || *params_json == '\0') return out;
  const auto j = nlohmann::json::parse(params_json);
  if (!j.is_object()) throw lavlab::invalid_argument("params must be a JSON object");
  for (const auto& [key, value] : j.items()) out[key] = value.get<double>();
  return out;
}

lavlab::ConditionSpec parse_spec(const lavlab::Lagrangian& L, const char* spec_json) {
  lavlab::ConditionSpec s;
  if (spec_json == nullptr || *spec_json == '\0') return s;
  const auto j = nlohmann::json::parse(spec_json);
  if (!j.is_object()) throw lavlab::invalid_argument("spec must be a JSON object");
  if (j.contains("condition")) s.condition = lavlab::parse_condition(j.at("condition").get<std::string>());
  if (j.contains("k1")) s.k1 = j.at("k1").get<double>();
  if (j.contains("k2")) s.k2 = j.at("k2").get<double>();
  const double diam = L.domain.diameter();
  if (j.contains("eps")) {
    s.eps = j.at("eps").get<std::vector<double>>();
  } else if (j.contains("eps_levels")) {
    const int n = j.at("eps_levels").get<int>();
    if (n < 1) throw lavlab::invalid_argument("eps_levels must be at least 1");
    for (int k = 1; k <= n; ++k) s.eps.push_back(std::ldexp(diam, -k));
  }
  if (j.contains("t_grid")) {
    s.t_grid = j.at("t_grid").get<std::vector<double>>();
  } else if (j.contains("t_points")) {
    const int n = j.at("t_points").get<int>();
    if (n < 1) throw lavlab::invalid_argument("t_points must be at least 1");
    if (n == 1) {
      s.t_grid.push_back(0.0);
    } else {
      for (int i = 0; i < n; ++i) s.t_grid.push_back(s.k1 * (2.0 * i / (n - 1.0) - 1.0));
    }
  }
  if (j.contains("x_list")) {
    s.x_points = j.at("x_list").get<std::vector<std::vector<double>>>();
  } else if (j.contains("x_points")) {
    const int n = j.at("x_points").get<int>();
    if (n < 2) throw lavlab::invalid_argument("x_points must be at least 2");
    if (L.dim == 1) {
      for (int i = 0; i < n; ++i) {
        s.x_points.push_back({L.domain.lo[0] + (L.domain.hi[0] - L.domain.lo[0]) * i / (n - 1.0)});
      }
    } else {
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
          s.x_points.push_back(
              {L.domain.lo[0] + (L.domain.hi[0] - L.domain.lo[0]) * i / (n - 1.0),
               L.domain.lo[1] + (L.domain.hi[1] - L.domain.lo[1]) * k / (n - 1.0)});
        }
      }
    }
  }
  if (j.contains("xi_list")) {
    s.xi_probes = j.at("xi_list").get<std::vector<std::vector<double>>>();
  } else if (j.contains("xi_points")) {
    s.radial_points = j.at("xi_points").get<int>();
  }
  if (j.contains("ball_samples")) s.ball_samples = j.at("ball_samples").get<int>();
  if (j.contains("radial_points")) s.radial_points = j.at("radial_points").get<int>();
  if (j.contains("ratio_cap")) s.ratio_cap = j.at("ratio_cap").get<double>();
  if (j.contains("slope_satisfied")) s.slope_satisfied = j.at("slope_satisfied").get<double>();
  if (j.contains("slope_violated")) s.slope_violated = j.at("slope_violated").get<double>();
  if (j.contains("threads")) s.threads = j.at("threads").get<int>();
  return s;
}

std::function<double(double)> parse_target(const lavlab::Lagrangian& L, const char* target) {
  if (L.dim != 1) throw lavlab::invalid_argument("target profiles are one-dimensional");
  if (target == nullptr || *target == '\0') throw lavlab::invalid_argument("missing target spec");
  const std::string t(target);
  const double a = L.domain.lo[0], b = L.domain.hi[0];
  const double left = L.bc.left, right = L.bc.right;
  if (t == "linear") {
    return [a, b, left, right](double x) { return left + (right - left) * (x - a) / (b - a); };
  }
  if (t == "singular") {
    if (!L.singular_profile) throw lavlab::invalid_argument("problem has no reference profile");
    return L.singular_profile;
  }
  if (t.rfind("power:", 0) == 0) {
    double expo = 0.0;
    try {
      expo = std::stod(t.substr(6));
    } catch (const std::exception&) {
      throw lavlab::invalid_argument("bad exponent in target spec: " + t);
    }
    if (!(expo > 0.0)) throw lavlab::invalid_argument("target exponent must be positive");
    return [a, b, left, right, expo](double x) {
      return left + (right - left) * std::pow((x - a) / (b - a), expo);
    };
  }
  throw lavlab::invalid_argument("unknown target spec: " + t);
}

lavlab::GapExperiment parse_experiment(const char* experiment_json) {
  if (experiment_json == nullptr || *experiment_json == '\0') {
    throw lavlab::invalid_argument("missing experiment spec");
  }
  const auto j = nlohmann::json::parse(experiment_json);
  if (!j.is_object()) throw lavlab::invalid_argument("experiment must be a JSON object");
  lavlab::GapExperiment ex;
  ex.problem = j.at("problem").get<std::string>();
  if (j.contains("params")) {
    for (const auto& [key, value] : j.at("params").items()) ex.params[key] = value.get<double>();
  }
  if (j.contains("bc")) {
    const auto bc = j.at("bc").get<std::vector<double>>();
    if (bc.size() != 2) throw lavlab::invalid_argument("bc must be [left, right]");
    ex.bc_left = bc[0];
    ex.bc_right = bc[1];
  }
  if (j.contains("levels")) ex.levels = j.at("levels").get<std::vector<int>>();
  if (j.contains("graded_beta")) ex.graded_beta = j.at("graded_beta").get<double>();
  if (j.contains("iters")) ex.iters = j.at("iters").get<int>();
  if (j.contains("restarts")) ex.restarts = j.at("restarts").get<int>();
  if (j.contains("quad_order")) ex.quad_order = j.at("quad_order").get<int>();
  if (j.contains("seed")) ex.seed = j.at("seed").get<std::uint64_t>();
  return ex;
}

}  // namespace

struct lav_lagrangian {
  lavlab::Lagrangian L;
};

struct lav_report {
  std::string json;
  std::string csv;
  std::string dat;
  std::string verdict;
  std::vector<lavlab::GapReport> gap_reports;
};

extern "C" {

const char* lav_version(void) { return lavlab::version_string; }

const char* lav_last_error(void) { return g_error.c_str(); }

void lav_string_free(char* s) { std::free(s); }

lav_status lav_catalog_json(char** out_json) {
  if (out_json == nullptr) return fail_invalid("out_json is null");
  return guard([&] {
    ordered_json arr = ordered_json::array();
    for (const auto& name : lavlab::catalog_names()) {
      const lavlab::Lagrangian L = lavlab::make_lagrangian(name);
      ordered_json e;
      e["name"] = name;
      e["describe"] = lavlab::catalog_describe(name);
      e["dim"] = L.dim;
      e["p"] = L.p;
      e["structure"] = L.structure == lavlab::Structure::isotropic     ? "isotropic"
                       : L.structure == lavlab::Structure::orthotropic ? "orthotropic"
                                                                       : "general";
      e["vanishes_at_zero"] = L.vanishes_at_zero;
      e["claims_delta2"] = L.claims_delta2;
      e["claims_convex_in_xi"] = L.claims_convex_in_xi;
      e["domain"] = {{"lo", std::vector<double>(L.domain.lo, L.domain.lo + L.dim)},
                     {"hi", std::vector<double>(L.domain.hi, L.domain.hi + L.dim)}};
      e["bc"] = {{"left", L.bc.left}, {"right", L.bc.right}};
      e["params"] = ordered_json::object();
      for (const auto& [k, v] : L.params) e["params"][k] = v;
      arr.push_back(e);
    }
    *out_json = dup_string(arr.dump(2));
  });
}

lav_status lav_lagrangian_create(const char* name, const char* params_json,
                                 lav_lagrangian** out) {
  if (out == nullptr) return fail_invalid("out is null");
  if (name == nullptr || *name == '\0') return fail_invalid("name is null or empty");
  return guard([&] {
    auto handle = std::make_unique<lav_lagrangian>();
    handle->L = lavlab::make_lagrangian(name, parse_params(params_json));
    *out = handle.release();
  });
}

void lav_lagrangian_destroy(lav_lagrangian* L) { delete L; }

lav_status lav_lagrangian_eval(const lav_lagrangian* L, const double* x, size_t x_len,
                               double t, const double* xi, size_t xi_len,
                               double* out_value) {
  if (L == nullptr || x == nullptr || xi == nullptr || out_value == nullptr) {
    return fail_invalid("null argument");
  }
  if (x_len != static_cast<size_t>(L->L.dim) || xi_len != static_cast<size_t>(L->L.dim)) {
    return fail_invalid("x and xi must have the problem dimension");
  }
  return guard([&] { *out_value = L->L.eval(x, t, xi); });
}

lav_status lav_inf_over_ball(const lav_lagrangian* L, const double* x, size_t x_len,
                             double eps, double t, const double* xi, size_t xi_len,
                             int ball_samples, double* out_value) {
  if (L == nullptr || x == nullptr || xi == nullptr || out_value == nullptr) {
    return fail_invalid("null argument");
  }
  return guard([&] {
    const std::vector<double> xv(x, x + x_len);
    const std::vector<double> xiv(xi, xi + xi_len);
    *out_value = lavlab::inf_over_ball(L->L, xv, eps, t, xiv, ball_samples);
  });
}

lav_status lav_radial_envelope_json(const lav_lagrangian* L, const double* x,
                                    size_t x_len, double eps, double t, double s_cap,
                                    int axis, char** out_json) {
  if (L == nullptr || x == nullptr || out_json == nullptr) return fail_invalid("null argument");
  return guard([&] {
    const std::vector<double> xv(x, x + x_len);
    const lavlab::ConvexEnvelope env =
        lavlab::radial_envelope(L->L, xv, eps, t, s_cap, 257, 513, axis);
    ordered_json j;
    j["s"] = env.bs;
    j["w"] = env.bw;
    j["final_slope"] = env.final_slope;
    *out_json = dup_string(j.dump(2));
  });
}

namespace {

lav_status balance_call(const lav_lagrangian* L, const char* spec_json, lav_report** out,
                        bool iso_implies) {
  if (L == nullptr || out == nullptr) return fail_invalid("null argument");
  return guard([&] {
    const lavlab::ConditionSpec spec = parse_spec(L->L, spec_json);
    const lavlab::BalanceReport rep = iso_implies ? lavlab::check_iso_implies_conv(L->L, spec)
                                                  : lavlab::check_condition(L->L, spec);
    auto handle = std::make_unique<lav_report>();
    handle->json = lavlab::balance_report_json(rep);
    handle->csv = lavlab::balance_report_csv(rep);
    handle->verdict = lavlab::verdict_name(rep.verdict);
    *out = handle.release();
  });
}

}  // namespace

lav_status lav_check_condition(const lav_lagrangian* L, const char* spec_json,
                               lav_report** out) {
  return balance_call(L, spec_json, out, false);
}

lav_status lav_iso_implies_conv(const lav_lagrangian* L, const char* spec_json,
                                lav_report** out) {
  return balance_call(L, spec_json, out, true);
}

lav_status lav_run_scheme(const lav_lagrangian* L, const char* target, int steps,
                          int out_nodes, lav_report** out) {
  if (L == nullptr || out == nullptr) return fail_invalid("null argument");
  return guard([&] {
    const auto fn = parse_target(L->L, target);
    const lavlab::SchemeReport rep = lavlab::run_scheme(L->L, fn, steps, out_nodes);
    auto handle = std::make_unique<lav_report>();
    handle->json = lavlab::scheme_report_json(rep);
    handle->csv = lavlab::scheme_report_csv(rep);
    handle->verdict = rep.all_certified() ? "CERTIFIED" : "UNCERTIFIED";
    *out = handle.release();
  });
}

lav_status lav_boundary_match(const lav_lagrangian* L, const char* target, double eps,
                              double delta, double s, int out_nodes, lav_report** out) {
  if (L == nullptr || out == nullptr) return fail_invalid("null argument");
  return guard([&] {
    const auto fn = parse_target(L->L, target);
    const lavlab::BoundaryMatchReport rep =
        lavlab::boundary_match(L->L, fn, eps, delta, s, out_nodes);
    ordered_json j;
    j["problem"] = L->L.name;
    j["s"] = rep.s;
    j["eps"] = rep.eps;
    j["delta"] = rep.delta;
    j["band"] = rep.band;
    j["datum_rank"] = rep.datum_rank;
    j["endpoint_exact"] = rep.endpoint_exact;
    j["max_band_deviation"] = rep.max_band_deviation;
    j["pre_truncation_ok"] = rep.pre_truncation_ok;
    j["energy_delta"] = rep.energy_delta;
    j["k_bound"] = rep.k_bound;
    j["cutoff_ok"] = rep.cutoff_ok;
    j["notes"] = rep.notes;
    auto handle = std::make_unique<lav_report>();
    handle->json = j.dump(2);
    handle->csv = rep.matched.to_csv();
    handle->verdict = rep.ok() ? "MATCHED" : "FAILED";
    *out = handle.release();
  });
}

lav_status lav_gap_probe(const char* experiment_json, lav_report** out) {
  if (out == nullptr) return fail_invalid("out is null");
  return guard([&] {
    const lavlab::GapExperiment ex = parse_experiment(experiment_json);
    lavlab::GapReport rep = lavrentiev_probe(ex);
    auto handle = std::make_unique<lav_report>();
    handle->json = lavlab::gap_report_json(rep);
    handle->csv = lavlab::gap_report_csv(rep);
    handle->verdict = rep.verdict;
    handle->gap_reports.push_back(std::move(rep));
    *out = handle.release();
  });
}

lav_status lav_demo(const char* problem, const char* params_json, int steps,
                    uint64_t seed, lav_report** out) {
  if (out == nullptr || problem == nullptr) return fail_invalid("null argument");
  return guard([&] {
    const lavlab::DemoReport rep =
        lavlab::scheme_no_gap_demo(problem, parse_params(params_json), steps, seed);
    auto handle = std::make_unique<lav_report>();
    handle->json = lavlab::demo_report_json(rep);
    handle->csv = lavlab::scheme_report_csv(rep.scheme);
    handle->verdict = lavlab::verdict_name(rep.balance_verdict);
    *out = handle.release();
  });
}

lav_status lav_report_json(const lav_report* report, char** out_json) {
  if (report == nullptr || out_json == nullptr) return fail_invalid("null argument");
  return guard([&] { *out_json = dup_string(report->json); });
}

lav_status lav_report_csv(const lav_report* report, char** out_csv) {
  if (report == nullptr || out_csv == nullptr) return fail_invalid("null argument");
  if (report->csv.empty()) return fail_invalid("report carries no table");
  return guard([&] { *out_csv = dup_string(report->csv); });
}

lav_status lav_report_verdict(const lav_report* report, char** out_verdict) {
  if (report == nullptr || out_verdict == nullptr) return fail_invalid("null argument");
  return guard([&] { *out_verdict = dup_string(report->verdict); });
}

lav_status lav_report_write(const lav_report* report, const char* dir,
                            const char* basename, int write_dat) {
  if (report == nullptr || dir == nullptr) return fail_invalid("null argument");
  return guard([&] {
    if (!report->gap_reports.empty()) {
      lavlab::write_gap_reports(dir, report->gap_reports, write_dat != 0);
      return;
    }
    if (basename == nullptr || *basename == '\0') {
      throw lavlab::invalid_argument("basename is required for this report");
    }
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw lavlab::io_error(std::string("could not create directory ") + dir);
    auto write_one = [&](const std::string& name, const std::string& content) {
      const fs::path path = fs::path(dir) / name;
      std::ofstream os(path, std::ios::binary);
      if (!os) throw lavlab::io_error("could not open " + path.string() + " for writing");
      os << content;
      if (!os) throw lavlab::io_error("could not write " + path.string());
    };
    write_one(std::string(basename) + ".json", report->json);
    if (!report->csv.empty()) write_one(std::string(basename) + ".csv", report->csv);
    if (write_dat != 0 && !report->dat.empty()) write_one(std::string(basename) + ".dat", report->dat);
  });
}

void lav_report_destroy(lav_report* report) { delete report; }

}  // extern "C"

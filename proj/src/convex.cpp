#include "lavlab/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lavlab/errors.hpp"

namespace lavlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cross product (b - a) x (c - a) in the (s, w) plane; <= 0 means b does not
// lie strictly below segment a-c.
double cross(double sa, double wa, double sb, double wb, double sc, double wc) {
  return (sb - sa) * (wc - wa) - (wb - wa) * (sc - sa);
}

}  // namespace

void SampledProfile::validate() const {
  if (grid.size() < 2) throw invalid_argument("profile needs at least 2 samples");
  if (grid.size() != values.size()) throw invalid_argument("profile grid/values size mismatch");
  if (grid.front() != 0.0) throw invalid_argument("profile grid must start at 0");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (!(grid[i] < grid[i + 1])) throw invalid_argument("profile grid must increase strictly");
  }
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw invalid_argument("profile values must be finite and >= 0");
  }
}

double ConvexEnvelope::value(double s) const {
  if (bs.size() == 1) return bw.front();
  if (s >= bs.back()) return bw.back() + final_slope * (s - bs.back());
  if (s <= bs.front()) {
    double slope = (bw[1] - bw[0]) / (bs[1] - bs[0]);
    return bw.front() + slope * (s - bs.front());
  }
  auto it = std::upper_bound(bs.begin(), bs.end(), s);
  std::size_t j = static_cast<std::size_t>(it - bs.begin());
  double slope = (bw[j] - bw[j - 1]) / (bs[j] - bs[j - 1]);
  return bw[j - 1] + slope * (s - bs[j - 1]);
}

double ConvexEnvelope::right_derivative(double s) const {
  if (s < 0.0) throw invalid_argument("right_derivative requires s >= 0");
  if (bs.size() == 1) return final_slope;
  if (s >= bs.back()) return final_slope;
  auto it = std::upper_bound(bs.begin(), bs.end(), s);
  std::size_t j = static_cast<std::size_t>(it - bs.begin());
  if (j == 0) j = 1;
  return (bw[j] - bw[j - 1]) / (bs[j] - bs[j - 1]);
}

double ConvexEnvelope::contact_point(double t) const {
  if (t < bs.front() || t > bs.back()) throw invalid_argument("contact_point: t outside grid range");
  auto it = std::upper_bound(bs.begin(), bs.end(), t);
  return *(it - 1);
}

ConvexEnvelope convex_minorant(const std::vector<double>& s, const std::vector<double>& w) {
  if (s.size() < 2) throw invalid_argument("convex_minorant needs at least 2 samples");
  if (s.size() != w.size()) throw invalid_argument("convex_minorant size mismatch");
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (!(s[i] < s[i + 1])) throw invalid_argument("convex_minorant abscissae must increase strictly");
  }
  for (double v : w) {
    if (!std::isfinite(v)) throw invalid_argument("convex_minorant values must be finite");
  }

  ConvexEnvelope env;
  std::vector<std::size_t> stack;
  stack.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    while (stack.size() >= 2) {
      std::size_t a = stack[stack.size() - 2];
      std::size_t b = stack[stack.size() - 1];
      if (cross(s[a], w[a], s[b], w[b], s[i], w[i]) <= 0.0) {
        stack.pop_back();
      } else {
        break;
      }
    }
    stack.push_back(i);
  }
  env.bs.reserve(stack.size());
  env.bw.reserve(stack.size());
  for (std::size_t idx : stack) {
    env.bs.push_back(s[idx]);
    env.bw.push_back(w[idx]);
    env.bidx.push_back(idx);
  }
  if (env.bs.size() >= 2) {
    std::size_t m = env.bs.size();
    env.final_slope = (env.bw[m - 1] - env.bw[m - 2]) / (env.bs[m - 1] - env.bs[m - 2]);
  }
  return env;
}

ConvexEnvelope convex_minorant(const SampledProfile& profile) {
  profile.validate();
  return convex_minorant(profile.grid, profile.values);
}

bool essinf_derivative_bound(const std::vector<SampledProfile>& family, double s) {
  if (family.empty()) throw invalid_argument("essinf_derivative_bound: empty family");
  for (const auto& p : family) p.validate();
  const auto& grid = family.front().grid;
  for (const auto& p : family) {
    if (p.grid != grid) throw invalid_argument("essinf_derivative_bound: members must share a grid");
  }

  std::vector<double> pmin(grid.size(), kInf);
  for (const auto& p : family) {
    for (std::size_t i = 0; i < grid.size(); ++i) pmin[i] = std::min(pmin[i], p.values[i]);
  }
  ConvexEnvelope env_min = convex_minorant(grid, pmin);
  double lhs = env_min.right_derivative(s);

  double rhs = kInf;
  for (const auto& p : family) {
    ConvexEnvelope env = convex_minorant(p.grid, p.values);
    rhs = std::min(rhs, env.right_derivative(s));
  }
  return lhs >= rhs - 1e-9;
}

double hat(const std::function<double(const std::vector<double>&)>& h,
           const std::vector<double>& qx, double qt, double recession_cap) {
  if (qt > 0.0) return kInf;
  if (qt < 0.0) {
    std::vector<double> arg(qx.size());
    for (std::size_t i = 0; i < qx.size(); ++i) arg[i] = qx[i] / (-qt);
    double v = (-qt) * h(arg);
    return std::isfinite(v) ? v : kInf;
  }
  // qt == 0: recession function along qx.
  bool zero = true;
  for (double c : qx) {
    if (c != 0.0) zero = false;
  }
  if (zero) return 0.0;
  std::vector<double> zeros(qx.size(), 0.0);
  double h0 = h(zeros);
  double best = -kInf;
  std::vector<double> arg(qx.size());
  for (int k = 0; k <= 48; ++k) {
    double lambda = std::ldexp(1.0, k);
    for (std::size_t i = 0; i < qx.size(); ++i) arg[i] = lambda * qx[i];
    double slope = (h(arg) - h0) / lambda;
    if (!std::isfinite(slope) || slope > recession_cap) return kInf;
    best = std::max(best, slope);
  }
  return best;
}

double envelope_upper_bound(const std::vector<XiSample>& samples,
                            const std::vector<double>& target) {
  if (samples.empty()) throw invalid_argument("envelope_upper_bound: no samples");
  const std::size_t dim = target.size();
  if (dim == 0) throw invalid_argument("envelope_upper_bound: empty target");
  for (const auto& s : samples) {
    if (s.xi.size() != dim) throw invalid_argument("envelope_upper_bound: dimension mismatch");
  }

  double scale = 0.0;
  for (double c : target) scale = std::max(scale, std::fabs(c));
  for (const auto& s : samples) {
    for (double c : s.xi) scale = std::max(scale, std::fabs(c));
  }
  const double tol = 1e-9 * (1.0 + scale);

  double best = kInf;

  // Exact matches.
  for (const auto& s : samples) {
    double dist = 0.0;
    for (std::size_t k = 0; k < dim; ++k) dist = std::max(dist, std::fabs(s.xi[k] - target[k]));
    if (dist <= tol && std::isfinite(s.w)) best = std::min(best, s.w);
  }

  // Segment pairs.
  const std::size_t m = samples.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (!std::isfinite(samples[i].w) || !std::isfinite(samples[j].w)) continue;
      double dd = 0.0, td = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        double d = samples[j].xi[k] - samples[i].xi[k];
        dd += d * d;
        td += (target[k] - samples[i].xi[k]) * d;
      }
      if (dd == 0.0) continue;
      double theta = td / dd;
      if (theta < -1e-12 || theta > 1.0 + 1e-12) continue;
      double resid = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        double proj = samples[i].xi[k] + theta * (samples[j].xi[k] - samples[i].xi[k]);
        resid = std::max(resid, std::fabs(proj - target[k]));
      }
      if (resid > tol) continue;
      double th = std::clamp(theta, 0.0, 1.0);
      best = std::min(best, (1.0 - th) * samples[i].w + th * samples[j].w);
    }
  }

  // Triangles, only in the plane and only for modest sample counts.
  if (dim == 2 && m <= 80) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        for (std::size_t k = j + 1; k < m; ++k) {
          const auto& A = samples[i];
          const auto& B = samples[j];
          const auto& C = samples[k];
          if (!std::isfinite(A.w) || !std::isfinite(B.w) || !std::isfinite(C.w)) continue;
          double det = (B.xi[0] - A.xi[0]) * (C.xi[1] - A.xi[1]) -
                       (C.xi[0] - A.xi[0]) * (B.xi[1] - A.xi[1]);
          if (std::fabs(det) < 1e-14 * (1.0 + scale * scale)) continue;
          double l1 = ((target[0] - A.xi[0]) * (C.xi[1] - A.xi[1]) -
                       (C.xi[0] - A.xi[0]) * (target[1] - A.xi[1])) /
                      det;
          double l2 = ((B.xi[0] - A.xi[0]) * (target[1] - A.xi[1]) -
                       (target[0] - A.xi[0]) * (B.xi[1] - A.xi[1])) /
                      det;
          double l0 = 1.0 - l1 - l2;
          if (l0 < -1e-12 || l1 < -1e-12 || l2 < -1e-12) continue;
          l0 = std::max(l0, 0.0);
          l1 = std::max(l1, 0.0);
          l2 = std::max(l2, 0.0);
          double norm = l0 + l1 + l2;
          best = std::min(best, (l0 * A.w + l1 * B.w + l2 * C.w) / norm);
        }
      }
    }
  }

  return best;
}

}  // namespace lavlab

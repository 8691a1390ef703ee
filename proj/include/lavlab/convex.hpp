#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace lavlab {

// A radial slice sampled on a strictly increasing grid starting at 0,
// with nonnegative values.
struct SampledProfile {
  std::vector<double> grid;
  std::vector<double> values;
  void validate() const;  // raises invalid_argument on broken invariants
};

// Greatest convex minorant of finitely many points (s_i, w_i), stored as its
// breakpoints. Between breakpoints the envelope is linear; beyond the last
// breakpoint it continues with final_slope, before the first with the slope
// of the first segment.
struct ConvexEnvelope {
  std::vector<double> bs;         // breakpoint abscissae, strictly increasing
  std::vector<double> bw;         // envelope values at the breakpoints
  std::vector<std::size_t> bidx;  // index of each breakpoint in the input grid
  double final_slope = 0.0;

  double value(double s) const;
  // Slope immediately to the right of s (at a breakpoint: the next segment).
  // s must be >= 0.
  double right_derivative(double s) const;
  // Largest breakpoint <= t; the envelope touches the data there and is
  // affine on [contact_point(t), t]. t must lie in the grid range.
  double contact_point(double t) const;
};

// Lower convex hull of the graph points. s must be strictly increasing with
// finite values and at least 2 samples.
ConvexEnvelope convex_minorant(const std::vector<double>& s, const std::vector<double>& w);
ConvexEnvelope convex_minorant(const SampledProfile& profile);

// Checks that the minorant of the pointwise minimum of the family has right
// derivative at s no smaller than the smallest member right derivative,
// up to 1e-9 slack. Members must share one grid.
bool essinf_derivative_bound(const std::vector<SampledProfile>& family, double s);

// One-homogeneous lift of a convex integrand h over xi-space to rays in
// (xi, t)-space, evaluated at q = (qx, qt):
//   qt < 0:  (-qt) * h(qx / (-qt))
//   qt = 0:  recession slope of h along qx, sampled on a dyadic ladder;
//            values past recession_cap report infinity
//   qt > 0:  infinity
double hat(const std::function<double(const std::vector<double>&)>& h,
           const std::vector<double>& qx, double qt, double recession_cap = 1e12);

// A sampled value of an integrand at a gradient point.
struct XiSample {
  std::vector<double> xi;
  double w = 0.0;
};

// Upper bound for the convex envelope (in xi) of the samples, evaluated at
// target: the best convex combination among exact matches, segment pairs and,
// in two dimensions with at most 80 samples, triangles. Returns infinity when
// no combination reaches target.
double envelope_upper_bound(const std::vector<XiSample>& samples,
                            const std::vector<double>& target);

}  // namespace lavlab

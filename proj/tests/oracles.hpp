#pragma once

// Independent reference implementations used to validate the library. They
// trade speed for obviousness: plain loops, brute-force search, and long
// double accumulation, sharing no code with the implementations under test.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "ccagrade/matrix.hpp"

namespace oracle {

struct Covariance {
  Eigen::MatrixXd c_aa;
  Eigen::MatrixXd c_bb;
  Eigen::MatrixXd c_ab;
  Eigen::VectorXd mean_a;
  Eigen::VectorXd mean_b;
};

// Unbiased two-view covariance by explicit summation.
inline Covariance covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index k = a.rows();
  Covariance out;
  out.mean_a = Eigen::VectorXd::Zero(a.cols());
  out.mean_b = Eigen::VectorXd::Zero(b.cols());
  for (Eigen::Index i = 0; i < k; ++i) {
    out.mean_a += a.row(i).transpose();
    out.mean_b += b.row(i).transpose();
  }
  out.mean_a /= double(k);
  out.mean_b /= double(k);

  auto block = [&](const Eigen::MatrixXd& x, const Eigen::VectorXd& mx, const Eigen::MatrixXd& y,
                   const Eigen::VectorXd& my) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(x.cols(), y.cols());
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index p = 0; p < x.cols(); ++p)
        for (Eigen::Index q = 0; q < y.cols(); ++q)
          c(p, q) += (x(i, p) - mx(p)) * (y(i, q) - my(q));
    return Eigen::MatrixXd(c / double(k - 1));
  };
  out.c_aa = block(a, out.mean_a, a, out.mean_a);
  out.c_bb = block(b, out.mean_b, b, out.mean_b);
  out.c_ab = block(a, out.mean_a, b, out.mean_b);
  return out;
}

// Direction on the unit sphere from spherical angles; supports 1-3 dims.
inline Eigen::VectorXd direction(const std::vector<double>& angles, Eigen::Index dim) {
  Eigen::VectorXd u(dim);
  if (dim == 1) {
    u(0) = 1.0;
  } else if (dim == 2) {
    u(0) = std::cos(angles[0]);
    u(1) = std::sin(angles[0]);
  } else {
    u(0) = std::cos(angles[0]);
    u(1) = std::sin(angles[0]) * std::cos(angles[1]);
    u(2) = std::sin(angles[0]) * std::sin(angles[1]);
  }
  return u;
}

inline Eigen::Index angle_count(Eigen::Index dim) { return dim - 1; }

// Largest canonical correlation by brute-force maximization of
// |u' C_ab v| / sqrt(u' C_aa u * v' C_bb v) over both unit spheres,
// a coarse grid followed by shrinking local refinements. Views are
// limited to three variables each.
inline double top_canonical_correlation(const Eigen::MatrixXd& c_aa, const Eigen::MatrixXd& c_bb,
                                        const Eigen::MatrixXd& c_ab) {
  const Eigen::Index da = c_aa.rows();
  const Eigen::Index db = c_bb.rows();
  const Eigen::Index na = angle_count(da);
  const Eigen::Index nb = angle_count(db);
  const Eigen::Index total = na + nb;

  auto objective = [&](const std::vector<double>& angles) {
    std::vector<double> ua(angles.begin(), angles.begin() + na);
    std::vector<double> vb(angles.begin() + na, angles.end());
    const Eigen::VectorXd u = direction(ua, da);
    const Eigen::VectorXd v = direction(vb, db);
    const double va = u.dot(c_aa * u);
    const double vbb = v.dot(c_bb * v);
    if (va <= 0.0 || vbb <= 0.0) return 0.0;
    return std::abs(u.dot(c_ab * v)) / std::sqrt(va * vbb);
  };

  struct Candidate {
    double value;
    std::vector<double> angles;
  };
  std::vector<Candidate> candidates;

  if (total == 0) return objective({});

  // Coarse pass: 16 points per angle across the whole range.
  const int coarse = 16;
  std::vector<int> idx(total, 0);
  std::vector<double> angles(total, 0.0);
  for (;;) {
    for (Eigen::Index i = 0; i < total; ++i) angles[i] = M_PI * (double(idx[i]) + 0.5) / coarse * 2.0;
    candidates.push_back({objective(angles), angles});
    Eigen::Index carry = 0;
    while (carry < total && ++idx[carry] == coarse) idx[carry++] = 0;
    if (carry == total) break;
  }
  std::partial_sort(candidates.begin(), candidates.begin() + std::min<std::size_t>(5, candidates.size()),
                    candidates.end(), [](const Candidate& x, const Candidate& y) { return x.value > y.value; });
  candidates.resize(std::min<std::size_t>(5, candidates.size()));

  // Refinement: around each survivor, sweep a 7-point-per-angle local grid,
  // re-center on its best point, shrink, repeat.
  double best = 0.0;
  for (Candidate cand : candidates) {
    double width = 2.0 * M_PI / coarse;
    std::vector<double> local(total);
    for (int round = 0; round < 14; ++round) {
      std::vector<int> ridx(total, 0);
      std::vector<double> best_here = cand.angles;
      double best_value = cand.value;
      for (;;) {
        for (Eigen::Index i = 0; i < total; ++i)
          local[i] = cand.angles[i] + width * (double(ridx[i]) / 3.0 - 1.0);
        const double value = objective(local);
        if (value > best_value) {
          best_value = value;
          best_here = local;
        }
        Eigen::Index carry = 0;
        while (carry < total && ++ridx[carry] == 7) ridx[carry++] = 0;
        if (carry == total) break;
      }
      cand.angles = best_here;
      cand.value = best_value;
      width /= 3.0;
    }
    best = std::max(best, cand.value);
  }
  return best;
}

// Two-pass Pearson correlation in long double.
inline double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.size();
  long double mx = 0.0L, my = 0.0L;
  for (Eigen::Index i = 0; i < n; ++i) {
    mx += x(i);
    my += y(i);
  }
  mx /= n;
  my /= n;
  long double sxy = 0.0L, sx = 0.0L, sy = 0.0L;
  for (Eigen::Index i = 0; i < n; ++i) {
    const long double dx = x(i) - mx;
    const long double dy = y(i) - my;
    sxy += dx * dy;
    sx += dx * dx;
    sy += dy * dy;
  }
  return double(sxy / std::sqrt(sx * sy));
}

// Gaussian NLL straight from the textbook formula, using dense inverse and
// determinant (a different numerical path from the library's eigensolve).
inline double gaussian_nll(const Eigen::MatrixXd& model_cov, const Eigen::VectorXd& model_mean,
                           const Eigen::MatrixXd& stacked_rows) {
  const Eigen::Index k = stacked_rows.rows();
  const Eigen::Index d = stacked_rows.cols();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < k; ++i) mean += stacked_rows.row(i).transpose();
  mean /= double(k);
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::VectorXd c = stacked_rows.row(i).transpose() - mean;
    scatter += c * c.transpose();
  }
  const Eigen::MatrixXd sample_cov = scatter / double(k);
  const Eigen::MatrixXd inv = model_cov.inverse();
  const double log_det = std::log(model_cov.determinant());
  const Eigen::VectorXd delta = mean - model_mean;
  const double trace = (inv * sample_cov).trace();
  const double quad = delta.dot(inv * delta);
  return 0.5 * double(k) * (double(d) * std::log(2.0 * M_PI) + log_det + trace + quad);
}

}  // namespace oracle

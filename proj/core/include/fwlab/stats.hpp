#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace fwlab {

// Neumaier-compensated running sum
class StableSum {
 public:
  void add(double x) {
    const double t = s_ + x;
    c_ += std::abs(s_) >= std::abs(x) ? (s_ - t) + x : (x - t) + s_;
    s_ = t;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0.0, c_ = 0.0;
};

struct MeanSE {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::int64_t n = 0;
};

MeanSE mean_se(const std::vector<double>& x);
// ratio of means with a delta-method standard error; x and y paired per unit
MeanSE ratio_of_means(const std::vector<double>& num, const std::vector<double>& den);

// sup |F1 - F2| between two empirical CDFs
double ks_two_sample(std::vector<double> a, std::vector<double> b);
// sup |F_n - F| against a model CDF
double ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf);

}  // namespace fwlab

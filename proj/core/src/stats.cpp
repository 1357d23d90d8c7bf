#include "fwlab/stats.hpp"

#include <algorithm>

namespace fwlab {

MeanSE mean_se(const std::vector<double>& x) {
  MeanSE r;
  r.n = static_cast<std::int64_t>(x.size());
  if (x.empty()) return r;
  StableSum s;
  for (double v : x) s.add(v);
  r.mean = s.value() / r.n;
  if (r.n > 1) {
    StableSum q;
    for (double v : x) q.add((v - r.mean) * (v - r.mean));
    r.stderr_ = std::sqrt(q.value() / (r.n - 1) / r.n);
  }
  return r;
}

MeanSE ratio_of_means(const std::vector<double>& num, const std::vector<double>& den) {
  const MeanSE a = mean_se(num), b = mean_se(den);
  MeanSE r;
  r.n = std::min(a.n, b.n);
  if (r.n < 2 || b.mean == 0.0) return r;
  r.mean = a.mean / b.mean;
  // linearised residuals num - R den
  StableSum q;
  for (std::size_t i = 0; i < static_cast<std::size_t>(r.n); ++i) {
    const double e = num[i] - r.mean * den[i];
    q.add(e * e);
  }
  r.stderr_ = std::sqrt(q.value() / (r.n - 1) / r.n) / std::abs(b.mean);
  return r;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return 1.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = a.size(), nb = b.size();
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

double ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) return 1.0;
  std::sort(a.begin(), a.end());
  const double n = a.size();
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double F = cdf(a[i]);
    d = std::max({d, std::abs((i + 1) / n - F), std::abs(F - i / n)});
  }
  return d;
}

}  // namespace fwlab

#include "stripes/common.hpp"

#include <cstdio>
#include <map>
#include <utility>

namespace stripes {

double pairwise_sum(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  // Bottom-up pairwise reduction: deterministic and O(log n) error growth.
  std::size_t n = v.size();
  while (n > 1) {
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) v[i] = v[2 * i] + v[2 * i + 1];
    if (n % 2) {
      v[half] = v[n - 1];
      n = half + 1;
    } else {
      n = half;
    }
  }
  return v[0];
}

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

const std::vector<std::pair<double, double>>& gauss_legendre(int n) {
  if (n < 1) throw Error("gauss_legendre: order " + std::to_string(n) + " < 1");
  static std::map<int, std::vector<std::pair<double, double>>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Newton iteration on P_n from the asymptotic root estimates; symmetric
  // halves mirrored.
  std::vector<std::pair<double, double>> nw(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nw[i] = {-x, w};  // estimates start near +1; store ascending
    nw[n - 1 - i] = {x, w};
  }
  return cache.emplace(n, std::move(nw)).first->second;
}

}  // namespace stripes

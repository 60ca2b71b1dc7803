#include "trajrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace trajrl::metrics {

namespace {

std::vector<geom::PixelPoint> to_px(std::span<const geom::PixelPoint> v,
                                    Resolution res) {
  std::vector<geom::PixelPoint> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = {v[i].x * res.width, v[i].y * res.height};
  return out;
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  if (v.empty()) {
    mean = sd = 0.0;
    return;
  }
  mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
}

}  // namespace

double ade(std::span<const geom::PixelPoint> pred,
           std::span<const geom::PixelPoint> gt) {
  if (pred.size() != gt.size()) throw LengthMismatch("ade: length mismatch");
  if (pred.empty()) throw EmptyTrajectory("ade: empty trajectory");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    sum += geom::distance(pred[i], gt[i]);
  return sum / static_cast<double>(pred.size());
}

double fde(std::span<const geom::PixelPoint> pred,
           std::span<const geom::PixelPoint> gt) {
  if (pred.size() != gt.size()) throw LengthMismatch("fde: length mismatch");
  if (pred.empty()) throw EmptyTrajectory("fde: empty trajectory");
  return geom::distance(pred.back(), gt.back());
}

double frechet(std::span<const geom::PixelPoint> pred,
               std::span<const geom::PixelPoint> gt) {
  if (pred.empty() || gt.empty())
    throw EmptyTrajectory("frechet: empty trajectory");
  const std::size_t n = pred.size(), m = gt.size();
  std::vector<double> dp(n * m);
  auto at = [&](std::size_t i, std::size_t j) -> double& {
    return dp[i * m + j];
  };
  at(0, 0) = geom::distance(pred[0], gt[0]);
  for (std::size_t i = 1; i < n; ++i)
    at(i, 0) = std::max(at(i - 1, 0), geom::distance(pred[i], gt[0]));
  for (std::size_t j = 1; j < m; ++j)
    at(0, j) = std::max(at(0, j - 1), geom::distance(pred[0], gt[j]));
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 1; j < m; ++j)
      at(i, j) =
          std::max(std::min({at(i - 1, j), at(i - 1, j - 1), at(i, j - 1)}),
                   geom::distance(pred[i], gt[j]));
  return at(n - 1, m - 1);
}

double ade_px(std::span<const geom::PixelPoint> pred,
              std::span<const geom::PixelPoint> gt, Resolution res) {
  const auto a = to_px(pred, res), b = to_px(gt, res);
  return ade(a, b);
}

double fde_px(std::span<const geom::PixelPoint> pred,
              std::span<const geom::PixelPoint> gt, Resolution res) {
  const auto a = to_px(pred, res), b = to_px(gt, res);
  return fde(a, b);
}

double frechet_px(std::span<const geom::PixelPoint> pred,
                  std::span<const geom::PixelPoint> gt, Resolution res) {
  const auto a = to_px(pred, res), b = to_px(gt, res);
  return frechet(a, b);
}

void MetricsReport::finalize() {
  std::vector<double> a, f, d;
  a.reserve(per_trajectory.size());
  for (const auto& r : per_trajectory) {
    a.push_back(r.ade);
    f.push_back(r.fde);
    d.push_back(r.fd);
  }
  mean_std(a, mean_ade, std_ade);
  mean_std(f, mean_fde, std_fde);
  mean_std(d, mean_fd, std_fd);
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a,
                                    std::span<const double> b) {
  if (a.size() != b.size())
    throw LengthMismatch("wilcoxon: paired samples must match in length");

  std::vector<double> diff;
  diff.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diff.push_back(d);
  }
  if (diff.empty())
    throw NoNonzeroDifferences("wilcoxon: all differences are zero");
  const int n = static_cast<int>(diff.size());
  if (n < 5) throw TooFewPairs("wilcoxon: need at least 5 nonzero pairs");

  // Midranks of |diff|, doubled so ties stay integral.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return std::abs(diff[i]) < std::abs(diff[j]);
  });
  std::vector<long long> rank2(n, 0);  // 2 * midrank
  std::vector<long long> tie_sizes;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j < n &&
           std::abs(diff[order[j]]) == std::abs(diff[order[i]]))
      ++j;
    // ranks i+1 .. j span this tie group; midrank*2 = (i+1 + j)
    const long long r2 = (i + 1) + j;
    for (int k = i; k < j; ++k) rank2[order[k]] = r2;
    tie_sizes.push_back(j - i);
    i = j;
  }

  long long w_plus2 = 0, w_minus2 = 0;
  for (int k = 0; k < n; ++k) {
    if (diff[k] > 0)
      w_plus2 += rank2[k];
    else
      w_minus2 += rank2[k];
  }
  const long long w2 = std::min(w_plus2, w_minus2);

  WilcoxonResult res;
  res.n = n;
  res.statistic = w2 / 2.0;

  if (n <= 25) {
    // Exact null distribution of the doubled rank-sum: every subset of the
    // ranks is equally likely under H0.
    const long long total2 =
        std::accumulate(rank2.begin(), rank2.end(), 0LL);
    std::vector<double> count(total2 + 1, 0.0);
    count[0] = 1.0;
    for (int k = 0; k < n; ++k) {
      const long long r = rank2[k];
      for (long long s = total2; s >= r; --s) count[s] += count[s - r];
    }
    double cum = 0.0;
    for (long long s = 0; s <= w2; ++s) cum += count[s];
    const double p = 2.0 * cum / std::pow(2.0, n);
    res.p_value = std::min(1.0, p);
    res.exact = true;
  } else {
    const double w = w2 / 2.0;
    const double mu = n * (n + 1) / 4.0;
    double tie_corr = 0.0;
    for (long long t : tie_sizes)
      tie_corr += static_cast<double>(t) * t * t - t;
    const double sigma2 =
        n * (n + 1) * (2.0 * n + 1) / 24.0 - tie_corr / 48.0;
    const double sigma = std::sqrt(sigma2);
    // Continuity correction toward the mean; W = min side, so z <= 0.
    const double z = (w - mu + 0.5) / sigma;
    const double p = std::erfc(-z / std::sqrt(2.0));
    res.p_value = std::min(1.0, p);
    res.exact = false;
  }
  return res;
}

double conservatism_fraction(const QCurve& qc, double slack) {
  if (qc.q_policy.empty()) return 0.0;
  std::size_t good = 0;
  for (std::size_t k = 0; k < qc.q_policy.size(); ++k)
    if (qc.q_policy[k] >= qc.q_expert[k] - slack) ++good;
  return static_cast<double>(good) / static_cast<double>(qc.q_policy.size());
}

}  // namespace trajrl::metrics

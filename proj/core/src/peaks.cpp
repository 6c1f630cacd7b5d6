#include "ctpack/peaks.hpp"

#include <algorithm>

namespace ctpack {
namespace {

std::vector<std::size_t> local_maxima(std::span<const double> x) {
  std::vector<std::size_t> out;
  const std::size_t n = x.size();
  if (n < 3) return out;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i - 1] < x[i]) {
      std::size_t ahead = i + 1;
      while (ahead + 1 < n && x[ahead] == x[i]) ++ahead;
      if (x[ahead] < x[i]) {
        out.push_back((i + ahead - 1) / 2);
        i = ahead;
        continue;
      }
    }
    ++i;
  }
  return out;
}

void measure(std::span<const double> x, Peak& p, double rel_height) {
  const std::size_t n = x.size();
  const double summit = x[p.index];

  double left_min = summit;
  p.left_base = p.index;
  for (std::size_t i = p.index + 1; i-- > 0;) {
    if (x[i] > summit) break;
    if (x[i] < left_min) {
      left_min = x[i];
      p.left_base = i;
    }
  }
  double right_min = summit;
  p.right_base = p.index;
  for (std::size_t i = p.index; i < n; ++i) {
    if (x[i] > summit) break;
    if (x[i] < right_min) {
      right_min = x[i];
      p.right_base = i;
    }
  }
  p.height = summit;
  p.prominence = summit - std::max(left_min, right_min);

  const double line = summit - p.prominence * rel_height;
  std::size_t i = p.index;
  while (p.left_base < i && line < x[i]) --i;
  p.left_ip = static_cast<double>(i);
  if (x[i] < line) p.left_ip += (line - x[i]) / (x[i + 1] - x[i]);
  i = p.index;
  while (i < p.right_base && line < x[i]) ++i;
  p.right_ip = static_cast<double>(i);
  if (x[i] < line) p.right_ip -= (line - x[i]) / (x[i - 1] - x[i]);
  p.width = p.right_ip - p.left_ip;

  p.position = static_cast<double>(p.index);
  if (p.index > 0 && p.index + 1 < n) {
    const double a = x[p.index - 1];
    const double b = x[p.index];
    const double c = x[p.index + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) p.position += std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
  }
}

}  // namespace

std::vector<Peak> find_peaks(std::span<const double> signal, const PeakOptions& options) {
  std::vector<Peak> peaks;
  if (signal.empty()) return peaks;
  const auto [lo, hi] = std::minmax_element(signal.begin(), signal.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return peaks;
  const double min_prominence = options.min_prominence_fraction * range;

  for (std::size_t idx : local_maxima(signal)) {
    Peak p;
    p.index = idx;
    measure(signal, p, options.rel_height);
    if (p.prominence >= min_prominence && p.width >= options.min_width) peaks.push_back(p);
  }
  return peaks;
}

std::vector<Peak> strongest_peaks(std::vector<Peak> peaks, std::size_t count) {
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
  if (peaks.size() > count) peaks.resize(count);
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.index < b.index; });
  return peaks;
}

}  // namespace ctpack

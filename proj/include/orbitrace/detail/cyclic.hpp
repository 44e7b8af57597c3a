#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace orbitrace::detail {

// Minimum over cyclic shifts of max_j metric(a_j, b_{j+k}), refined to fractional
// shifts by cubic Lagrange interpolation of b. `interp(pts, w)` combines four
// consecutive points of b (it may unwrap periodic coordinates against pts[1]).
template <class P, class Metric, class Interp>
double directed_cyclic_distance(const std::vector<P>& a, const std::vector<P>& b, Metric metric, Interp interp) {
    const std::size_t n = a.size();
    auto B = [&](std::size_t j) -> const P& { return b[j % n]; };

    std::vector<double> first(n);
    for (std::size_t k = 0; k < n; ++k) first[k] = metric(a[0], B(k));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t u, std::size_t v) { return first[u] < first[v]; });

    double best = INFINITY;
    std::size_t shift = 0;
    for (std::size_t k : order) {
        if (first[k] >= best) break;
        double worst = 0.0;
        for (std::size_t j = 0; j < n && worst < best; ++j) worst = std::max(worst, metric(a[j], B(j + k)));
        if (worst < best) {
            best = worst;
            shift = k;
        }
    }

    auto at = [&](double u) {
        const double fl = std::floor(u);
        const double f = u - fl;
        const auto base = static_cast<std::size_t>(static_cast<long long>(fl) % static_cast<long long>(n) +
                                                   static_cast<long long>(n));
        const P pts[4] = {B(base + n - 1), B(base), B(base + 1), B(base + 2)};
        const double w[4] = {-f * (f - 1.0) * (f - 2.0) / 6.0, (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
                             -(f + 1.0) * f * (f - 2.0) / 2.0, (f + 1.0) * f * (f - 1.0) / 6.0};
        return interp(pts, w);
    };
    auto cost = [&](double delta) {
        double worst = 0.0;
        for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, metric(a[j], at(double(j + shift) + delta)));
        return worst;
    };
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = -1.0, hi = 1.0;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = cost(x1), f2 = cost(x2);
    for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = cost(x2);
        }
    }
    return std::min({best, f1, f2});
}

}  // namespace orbitrace::detail

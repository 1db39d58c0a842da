// quadrature.hpp: Gauss-Legendre rules, single and composite

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>

namespace polariton {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1].
inline QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    const auto zeros = boost::math::legendre_p_zeros<double>(n);  // non-negative half
    QuadratureRule rule;
    auto add = [&](double x) {
        const double dp = boost::math::legendre_p_prime<double>(n, x);
        rule.nodes.push_back(x);
        rule.weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
    };
    for (auto it = zeros.rbegin(); it != zeros.rend(); ++it)
        if (*it != 0.0) add(-*it);
    for (double x : zeros) add(x);
    return rule;
}

// `panels` equal panels on [lo, hi], each with an `order`-point rule.
// Nodes come out in increasing order.
inline QuadratureRule composite_gauss_legendre(double lo, double hi, int panels, int order) {
    const QuadratureRule base = gauss_legendre(order);
    QuadratureRule rule;
    rule.nodes.reserve(static_cast<std::size_t>(panels) * order);
    rule.weights.reserve(rule.nodes.capacity());
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = lo + (p + 0.5) * h;
        for (std::size_t q = 0; q < base.nodes.size(); ++q) {
            rule.nodes.push_back(mid + 0.5 * h * base.nodes[q]);
            rule.weights.push_back(0.5 * h * base.weights[q]);
        }
    }
    return rule;
}

} // namespace polariton

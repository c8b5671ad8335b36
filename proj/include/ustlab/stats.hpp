#pragma once

// Small statistical helpers shared by estimators and tests.

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace ustlab {

// Goodness-of-fit p-value for observed counts against expected probabilities.
inline double chi_squared_pvalue(const std::vector<std::uint64_t>& observed,
                                 const std::vector<double>& expected_prob) {
    if (observed.size() != expected_prob.size() || observed.size() < 2)
        throw std::invalid_argument("chi_squared_pvalue: bad inputs");
    std::uint64_t total = 0;
    for (auto c : observed) total += c;
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        double e = expected_prob[i] * static_cast<double>(total);
        if (e <= 0) throw std::invalid_argument("chi_squared_pvalue: zero expected cell");
        double d = static_cast<double>(observed[i]) - e;
        stat += d * d / e;
    }
    boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.96) {
    if (trials == 0) return {0.0, 1.0};
    double n = static_cast<double>(trials);
    double p = static_cast<double>(successes) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (p + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Total-variation distance between two empirical distributions given as
// key -> count maps.
template <typename Key>
double empirical_tv_distance(const std::map<Key, std::uint64_t>& a,
                             const std::map<Key, std::uint64_t>& b) {
    std::uint64_t na = 0, nb = 0;
    for (const auto& [k, c] : a) na += c;
    for (const auto& [k, c] : b) nb += c;
    if (na == 0 || nb == 0) throw std::invalid_argument("empirical_tv_distance: empty sample");
    double tv = 0.0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() || ib != b.end()) {
        double pa = 0.0, pb = 0.0;
        if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
            pa = static_cast<double>(ia->second) / static_cast<double>(na);
            ++ia;
        } else if (ia == a.end() || ib->first < ia->first) {
            pb = static_cast<double>(ib->second) / static_cast<double>(nb);
            ++ib;
        } else {
            pa = static_cast<double>(ia->second) / static_cast<double>(na);
            pb = static_cast<double>(ib->second) / static_cast<double>(nb);
            ++ia;
            ++ib;
        }
        tv += std::abs(pa - pb);
    }
    return tv / 2.0;
}

}  // namespace ustlab

#ifndef TILEVOTE_STATS_HPP
#define TILEVOTE_STATS_HPP

#include <span>
#include <vector>

namespace tilevote::stats {

double median(std::vector<double> values);

struct Quartiles {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

// Linear interpolation between order statistics.
Quartiles quartiles(std::vector<double> values);

// Mann-Kendall trend statistic S = sum_{i<j} sgn(v_j - v_i) with the exact
// permutation null (all orderings equally likely), usable up to ~9 points.
// p_decreasing = P(S_perm <= S_observed).
struct TrendTest {
    int s = 0;
    double p_decreasing = 1.0;
};
TrendTest mann_kendall(std::span<const double> values);

} // namespace tilevote::stats

#endif

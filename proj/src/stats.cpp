#include "tilevote/stats.hpp"

#include <algorithm>
#include <numeric>

#include "tilevote/errors.hpp"

namespace tilevote::stats {

namespace {

double interpolated(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1)
        return sorted[0];
    const double pos = p * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = lo + 1 < n ? lo + 1 : lo;
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

int kendall_s(std::span<const double> v) {
    int s = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
            s += (v[j] > v[i]) - (v[j] < v[i]);
    return s;
}

} // namespace

double median(std::vector<double> values) { return quartiles(std::move(values)).median; }

Quartiles quartiles(std::vector<double> values) {
    if (values.empty())
        throw Error(ErrorCode::ConfigInvalid, "no values");
    std::sort(values.begin(), values.end());
    Quartiles q;
    q.min = values.front();
    q.max = values.back();
    q.q1 = interpolated(values, 0.25);
    q.median = interpolated(values, 0.50);
    q.q3 = interpolated(values, 0.75);
    return q;
}

TrendTest mann_kendall(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2 || n > 9)
        throw Error(ErrorCode::ConfigInvalid, "mann_kendall needs 2..9 points");
    TrendTest t;
    t.s = kendall_s(values);

    std::vector<double> ranks(n);
    std::iota(ranks.begin(), ranks.end(), 1.0);
    std::uint64_t total = 0, at_most = 0;
    do {
        ++total;
        if (kendall_s(ranks) <= t.s)
            ++at_most;
    } while (std::next_permutation(ranks.begin(), ranks.end()));
    t.p_decreasing = static_cast<double>(at_most) / static_cast<double>(total);
    return t;
}

} // namespace tilevote::stats

#include "spikebench/roc.hpp"

#include <algorithm>

#include "spikebench/errors.hpp"

namespace spikebench {

RocResult roc_auc(const std::vector<double>& member_scores,
                  const std::vector<double>& nonmember_scores) {
    if (member_scores.empty() || nonmember_scores.empty())
        throw ConfigError("roc_auc: both score lists must be nonempty");

    RocResult r;
    r.n_pos = member_scores.size();
    r.n_neg = nonmember_scores.size();

    std::vector<std::pair<double, int>> all;  // (score, is_member)
    all.reserve(r.n_pos + r.n_neg);
    for (double s : member_scores) all.emplace_back(s, 1);
    for (double s : nonmember_scores) all.emplace_back(s, 0);
    std::sort(all.begin(), all.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // Mann-Whitney U from member rank sums; tie groups share their average
    // rank, which is an exact integer or half-integer
    double rank_sum = 0.0;
    const size_t n = all.size();
    for (size_t i = 0; i < n;) {
        size_t j = i;
        while (j < n && all[j].first == all[i].first) ++j;
        const double avg_rank = 0.5 * double(i + 1 + j);  // ranks are 1-based
        for (size_t t = i; t < j; ++t)
            if (all[t].second) rank_sum += avg_rank;
        i = j;
    }
    const double u = rank_sum - 0.5 * double(r.n_pos) * double(r.n_pos + 1);
    r.auc = u / (double(r.n_pos) * double(r.n_neg));

    // curve: walk thresholds from high to low, one point per distinct score
    r.curve.emplace_back(0.0, 0.0);
    size_t tp = 0, fp = 0;
    for (size_t i = n; i > 0;) {
        size_t j = i;
        while (j > 0 && all[j - 1].first == all[i - 1].first) --j;
        for (size_t t = j; t < i; ++t) {
            if (all[t].second)
                ++tp;
            else
                ++fp;
        }
        r.curve.emplace_back(double(fp) / double(r.n_neg), double(tp) / double(r.n_pos));
        i = j;
    }
    return r;
}

}  // namespace spikebench

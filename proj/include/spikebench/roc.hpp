#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace spikebench {

struct RocResult {
    double auc = 0.5;
    std::vector<std::pair<double, double>> curve;  // (fpr, tpr) from (0,0) to (1,1)
    size_t n_pos = 0, n_neg = 0;
};

// AUC via the rank statistic with tie correction (equal scores count half a
// win), so it matches the pairwise definition exactly, plus the ROC curve
// swept over distinct score thresholds. Throws ConfigError on empty input.
RocResult roc_auc(const std::vector<double>& member_scores,
                  const std::vector<double>& nonmember_scores);

}  // namespace spikebench

#include "occauth/types.hpp"

namespace occauth {

std::strong_ordering compare_scores(GenuinenessScore a, GenuinenessScore b) {
    if (!std::isfinite(a.value) || !std::isfinite(b.value)) {
        throw InvalidScoreError("compare_scores: non-finite score");
    }
    if (a.value < b.value) return std::strong_ordering::less;
    if (a.value > b.value) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

}  // namespace occauth

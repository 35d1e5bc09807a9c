#include <algorithm>
#include <cmath>
#include <numeric>

#include "rdv/numerics.hpp"

namespace rdv {

std::vector<std::size_t> select_top_k(std::span<const double> values, std::size_t k,
                                      SelectDirection direction) {
    if (k > values.size()) {
        throw DomainError("select_top_k: k=" + std::to_string(k) + " exceeds length " +
                          std::to_string(values.size()));
    }
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});

    const bool minimize = direction == SelectDirection::Min;
    auto better = [&](std::size_t i, std::size_t j) {
        const double a = values[i];
        const double b = values[j];
        const bool a_nan = std::isnan(a);
        const bool b_nan = std::isnan(b);
        if (a_nan || b_nan) {
            if (a_nan && b_nan) return i < j;
            return b_nan;
        }
        if (a != b) return minimize ? a < b : a > b;
        return i < j;
    };
    // Strict weak ordering with index tie-break, so the partial result is unique.
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), better);
    idx.resize(k);
    return idx;
}

}  // namespace rdv

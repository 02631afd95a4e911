#pragma once

#include <cstdint>
#include <vector>

#include "xaistudy/tabular/dataset.hpp"

namespace xaistudy::tabular {

// Synthetic decision dataset for desk-scale tests.
//
// Numeric features num_1..num_p ~ N(0, 1). Categorical features cat_1..cat_q
// are uniform over {a, b, c}. A protected feature "group" takes "minority"
// with probability 0.3 and does not affect the label. Labels are
// Bernoulli(sigmoid(w . z)) where z stacks the numeric values followed by
// the one-hot indicators of each categorical feature, so `true_weights`
// has length p + 3q.
Dataset generate_synthetic(std::size_t n, std::size_t d_numeric, std::size_t d_categorical,
                           const std::vector<double>& true_weights, std::uint64_t seed);

}  // namespace xaistudy::tabular

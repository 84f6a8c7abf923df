#pragma once

#include <cstddef>
#include <vector>

#include "synthpop/data.hpp"
#include "synthpop/matrix.hpp"
#include "synthpop/nn.hpp"
#include "synthpop/rng.hpp"

namespace synthpop::models::detail {

inline constexpr std::size_t kSampleChunk = 2048;

/// Draws one category per block from each row of block-normalized probabilities.
void append_categorical_rows(const Matrix& probs, const data::Schema& schema, Rng& rng, data::CodedTable& out);

Matrix standard_normal(std::size_t rows, std::size_t cols, Rng& rng);

/// Rows of `source` selected by `indices[first, first + count)`.
Matrix gather_rows(const Matrix& source, const std::vector<std::size_t>& indices, std::size_t first,
                   std::size_t count);

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

}  // namespace synthpop::models::detail

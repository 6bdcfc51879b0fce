#pragma once

#include <cstddef>
#include <vector>

namespace optomx {

// Borrowed row-major view of a numeric matrix; the storage outlives the
// view. Keeps the ranking/classifier code independent of FeatureTable.
struct MatrixView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  const double* row(std::size_t r) const { return data + r * cols; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

inline MatrixView view_of(const std::vector<double>& values, std::size_t rows,
                          std::size_t cols) {
  return {values.data(), rows, cols};
}

// Copies the given columns into a dense rows x indices.size() matrix.
inline std::vector<double> gather_columns(
    const MatrixView& m, const std::vector<std::size_t>& indices) {
  std::vector<double> out;
  out.reserve(m.rows * indices.size());
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c : indices) out.push_back(m.at(r, c));
  return out;
}

}  // namespace optomx

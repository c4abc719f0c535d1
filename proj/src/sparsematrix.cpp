#include "hbs/sparsematrix.hpp"

#include <algorithm>

namespace hbs {

void SparseMatrix::add(Index r, Index c, Complex v) {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
    throw std::invalid_argument("sparse entry index out of range");
  entries_.push_back({r, c, v});
  finalized_ = false;
}

void SparseMatrix::finalize() {
  std::sort(entries_.begin(), entries_.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Triplet> merged;
  merged.reserve(entries_.size());
  for (const Triplet& t : entries_) {
    if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col)
      merged.back().value += t.value;
    else
      merged.push_back(t);
  }
  entries_.clear();
  for (const Triplet& t : merged)
    if (t.value != Complex(0, 0)) entries_.push_back(t);

  row_ptr_.assign(rows_ + 1, 0);
  for (const Triplet& t : entries_) ++row_ptr_[t.row + 1];
  for (Index r = 0; r < rows_; ++r) row_ptr_[r + 1] += row_ptr_[r];
  finalized_ = true;
}

std::pair<Index, Index> SparseMatrix::row_range(Index r) const {
  if (!finalized_) throw std::logic_error("sparse matrix not finalized");
  return {row_ptr_[r], row_ptr_[r + 1]};
}

Matrix SparseMatrix::to_dense() const {
  Matrix A = Matrix::Zero(rows_, cols_);
  for (const Triplet& t : entries_) A(t.row, t.col) += t.value;
  return A;
}

Eigen::SparseMatrix<Complex> SparseMatrix::to_eigen() const {
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(entries_.size());
  for (const Triplet& t : entries_)
    trips.emplace_back(static_cast<int>(t.row), static_cast<int>(t.col), t.value);
  Eigen::SparseMatrix<Complex> A(rows_, cols_);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

double SparseMatrix::max_abs() const {
  double m = 0;
  for (const Triplet& t : entries_) m = std::max(m, std::abs(t.value));
  return m;
}

Index SparseMatrix::max_row_nnz() const {
  std::vector<Index> count(rows_, 0);
  for (const Triplet& t : entries_) ++count[t.row];
  Index m = 0;
  for (Index c : count) m = std::max(m, c);
  return m;
}

Index SparseMatrix::max_col_nnz() const {
  std::vector<Index> count(cols_, 0);
  for (const Triplet& t : entries_) ++count[t.col];
  Index m = 0;
  for (Index c : count) m = std::max(m, c);
  return m;
}

const BlockSegment* SparseMatrix::find_segment(const std::string& name) const {
  for (const BlockSegment& s : block_layout)
    if (s.name == name) return &s;
  return nullptr;
}

}  // namespace hbs

#pragma once

#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "hbs/common.hpp"

namespace hbs {

struct Triplet {
  Index row = 0;
  Index col = 0;
  Complex value{};
};

struct BlockSegment {
  std::string name;
  Index offset = 0;
  Index size = 0;
};

// Coordinate storage with a compressed, sorted row index built on finalize().
// Duplicates are merged by summation and exact zeros are dropped, so nnz()
// counts true structural nonzeros.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols) : rows_(rows), cols_(cols) {}

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(entries_.size()); }

  void add(Index r, Index c, Complex v);
  void finalize();
  bool finalized() const { return finalized_; }

  const std::vector<Triplet>& entries() const { return entries_; }
  // Entry range of one row (finalized only).
  std::pair<Index, Index> row_range(Index r) const;

  Matrix to_dense() const;
  Eigen::SparseMatrix<Complex> to_eigen() const;

  double max_abs() const;
  Index max_row_nnz() const;
  Index max_col_nnz() const;

  // Solution-vector segments (x, y1, z1, ...) and equation segments.
  std::vector<BlockSegment> block_layout;
  std::vector<BlockSegment> row_layout;

  const BlockSegment* find_segment(const std::string& name) const;

 private:
  Index rows_ = 0, cols_ = 0;
  bool finalized_ = false;
  std::vector<Triplet> entries_;
  std::vector<Index> row_ptr_;
};

}  // namespace hbs

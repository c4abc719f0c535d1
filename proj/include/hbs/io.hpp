#pragma once

#include <string>

#include "hbs/blockenc.hpp"
#include "hbs/factor.hpp"
#include "hbs/sparsematrix.hpp"

namespace hbs {

// Triplet matrix format used repo-wide:
//   %%sparse complex <n_rows> <n_cols> <nnz>
//   <row> <col> <re> <im>          (1-based indices)
// The block layout, when present, goes to a "<path>.layout" sidecar with one
// "name offset size" line per segment.
void write_triplets(const SparseMatrix& A, const std::string& path);
SparseMatrix read_triplets(const std::string& path);

void write_dense_triplets(const Matrix& A, const std::string& path);

// Factor directory: one triplet file per D_l/L_l/R_l plus a plain-text
// manifest carrying depth, dims, the permutation and the skeleton maps.
void save_factors(const HBSFactors& factors, const std::string& dir);
HBSFactors load_factors(const std::string& dir);

// Descriptor record: "alpha ancillas eps payload_file?" (one line); the
// payload unitary, when present, is stored fully populated in triplet format.
void save_descriptor(const EncodingDescriptor& desc, const std::string& path);

}  // namespace hbs

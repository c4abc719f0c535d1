#include "hbs/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace hbs {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out.precision(17);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  return in;
}

}  // namespace

void write_triplets(const SparseMatrix& A, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "%%sparse complex " << A.rows() << ' ' << A.cols() << ' ' << A.nnz() << '\n';
  for (const Triplet& t : A.entries())
    out << t.row + 1 << ' ' << t.col + 1 << ' ' << t.value.real() << ' ' << t.value.imag() << '\n';
  if (!A.block_layout.empty()) {
    std::ofstream side = open_out(path + ".layout");
    for (const BlockSegment& s : A.block_layout)
      side << s.name << ' ' << s.offset << ' ' << s.size << '\n';
  }
}

SparseMatrix read_triplets(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string tag1, tag2;
  Index rows = 0, cols = 0, nnz = 0;
  in >> tag1 >> tag2 >> rows >> cols >> nnz;
  if (tag1 != "%%sparse" || tag2 != "complex")
    throw std::invalid_argument("bad triplet header in " + path);
  SparseMatrix A(rows, cols);
  for (Index k = 0; k < nnz; ++k) {
    Index r, c;
    double re, im;
    if (!(in >> r >> c >> re >> im)) throw std::invalid_argument("truncated triplet file " + path);
    A.add(r - 1, c - 1, Complex(re, im));
  }
  A.finalize();
  std::ifstream side(path + ".layout");
  if (side) {
    std::string name;
    Index off, size;
    while (side >> name >> off >> size) A.block_layout.push_back({name, off, size});
  }
  return A;
}

void write_dense_triplets(const Matrix& A, const std::string& path) {
  SparseMatrix S(A.rows(), A.cols());
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i < A.rows(); ++i)
      if (A(i, j) != Complex(0, 0)) S.add(i, j, A(i, j));
  S.finalize();
  write_triplets(S, path);
}

namespace {

SparseMatrix dense_blocks_to_sparse(const std::vector<Matrix>& blocks) {
  Index rows = 0, cols = 0;
  for (const Matrix& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  SparseMatrix S(rows, cols);
  Index r0 = 0, c0 = 0;
  for (const Matrix& b : blocks) {
    for (Index j = 0; j < b.cols(); ++j)
      for (Index i = 0; i < b.rows(); ++i)
        if (b(i, j) != Complex(0, 0)) S.add(r0 + i, c0 + j, b(i, j));
    r0 += b.rows();
    c0 += b.cols();
  }
  S.finalize();
  return S;
}

void write_index_list(std::ostream& out, const std::vector<Index>& v) {
  out << v.size();
  for (Index x : v) out << ' ' << x;
  out << '\n';
}

std::vector<Index> read_index_list(std::istream& in) {
  std::size_t n;
  if (!(in >> n)) throw std::invalid_argument("truncated manifest");
  std::vector<Index> v(n);
  for (Index& x : v)
    if (!(in >> x)) throw std::invalid_argument("truncated manifest");
  return v;
}

}  // namespace

void save_factors(const HBSFactors& F, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream man = open_out(dir + "/manifest.txt");
  man << "hbs-factors 1\n";
  man << "dim " << F.dim << '\n';
  man << "N " << F.N << '\n';
  man << "depth " << F.depth << '\n';
  man << "t " << F.t << '\n';
  man << "perm ";
  write_index_list(man, F.perm);

  for (int l = 1; l <= F.depth; ++l) {
    const LevelFactor& lf = F.levels[l - 1];
    man << "level " << l << ' ' << lf.row_block_sizes.size() << '\n';
    man << "row_sizes ";
    write_index_list(man, lf.row_block_sizes);
    man << "col_sizes ";
    write_index_list(man, lf.col_block_sizes);
    for (const auto& sk : lf.row_skel) {
      man << "row_skel ";
      write_index_list(man, sk);
    }
    for (const auto& sk : lf.col_skel) {
      man << "col_skel ";
      write_index_list(man, sk);
    }
    write_triplets(lf.D, dir + "/D" + std::to_string(l) + ".mtx");
    write_triplets(dense_blocks_to_sparse(lf.L_blocks), dir + "/L" + std::to_string(l) + ".mtx");
    write_triplets(dense_blocks_to_sparse(lf.R_blocks), dir + "/R" + std::to_string(l) + ".mtx");
  }
  write_triplets(F.D_last, dir + "/D" + std::to_string(F.depth + 1) + ".mtx");
}

HBSFactors load_factors(const std::string& dir) {
  std::ifstream man = open_in(dir + "/manifest.txt");
  std::string tag;
  int version;
  man >> tag >> version;
  if (tag != "hbs-factors") throw std::invalid_argument("bad factor manifest in " + dir);

  HBSFactors F;
  std::string key;
  man >> key >> F.dim;
  man >> key >> F.N;
  man >> key >> F.depth;
  man >> key >> F.t;
  man >> key;
  F.perm = read_index_list(man);

  for (int l = 1; l <= F.depth; ++l) {
    LevelFactor lf;
    int lvl;
    std::size_t nb;
    man >> key >> lvl >> nb;
    man >> key;
    lf.row_block_sizes = read_index_list(man);
    man >> key;
    lf.col_block_sizes = read_index_list(man);
    lf.row_skel.resize(nb);
    lf.col_skel.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      man >> key;
      lf.row_skel[b] = read_index_list(man);
    }
    for (std::size_t b = 0; b < nb; ++b) {
      man >> key;
      lf.col_skel[b] = read_index_list(man);
    }
    lf.D = read_triplets(dir + "/D" + std::to_string(l) + ".mtx");
    const SparseMatrix Ls = read_triplets(dir + "/L" + std::to_string(l) + ".mtx");
    const SparseMatrix Rs = read_triplets(dir + "/R" + std::to_string(l) + ".mtx");
    const Matrix Ld = Ls.to_dense(), Rd = Rs.to_dense();
    Index r0 = 0, c0 = 0;
    for (std::size_t b = 0; b < nb; ++b) {
      const Index n = lf.row_block_sizes[b];
      const Index k = static_cast<Index>(lf.row_skel[b].size());
      lf.L_blocks.push_back(Ld.block(r0, c0, n, k));
      r0 += n;
      c0 += k;
    }
    r0 = c0 = 0;
    for (std::size_t b = 0; b < nb; ++b) {
      const Index n = lf.col_block_sizes[b];
      const Index k = static_cast<Index>(lf.col_skel[b].size());
      lf.R_blocks.push_back(Rd.block(r0, c0, k, n));
      r0 += k;
      c0 += n;
    }
    F.levels.push_back(std::move(lf));
  }
  F.D_last = read_triplets(dir + "/D" + std::to_string(F.depth + 1) + ".mtx");
  return F;
}

void save_descriptor(const EncodingDescriptor& desc, const std::string& path) {
  std::ofstream out = open_out(path);
  out << desc.alpha << ' ' << desc.ancillas << ' ' << desc.eps;
  if (desc.has_payload) {
    const std::string payload_path = path + ".payload";
    out << ' ' << payload_path;
    write_dense_triplets(desc.payload, payload_path);
  }
  out << '\n';
}

}  // namespace hbs

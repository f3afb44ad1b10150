#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <vector>

namespace hytegrid {

/// Row-map sparse matrix for coarse solves and as the assembly oracle. Not a
/// performance structure: the library's operators stay matrix-free; this is
/// only ever built at capped levels.
class SparseMatrix {
  public:
    SparseMatrix(std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_.size(); }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const;

    void add(std::size_t r, std::size_t c, double v); // accumulates
    void set(std::size_t r, std::size_t c, double v); // overwrites
    void clear_row(std::size_t r);

    /// Stored coefficient, 0 for absent entries.
    double coeff(std::size_t r, std::size_t c) const;
    const std::map<std::size_t, double>& row(std::size_t r) const;

    std::vector<double> multiply(const std::vector<double>& x) const;

    /// Coordinate-format text, one "row col value" line per stored entry,
    /// rows ascending then columns ascending, full double precision.
    void write_coo(std::ostream& out) const;

  private:
    void check(std::size_t r, std::size_t c) const;

    std::size_t cols_;
    std::vector<std::map<std::size_t, double>> rows_;
};

} // namespace hytegrid

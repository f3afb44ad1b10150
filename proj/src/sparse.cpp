#include "hytegrid/sparse.hpp"

#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace hytegrid {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows) {}

void SparseMatrix::check(std::size_t r, std::size_t c) const {
    if (r >= rows_.size() || c >= cols_)
        throw std::out_of_range("SparseMatrix: entry (" + std::to_string(r) + ", " +
                                std::to_string(c) + ") outside " + std::to_string(rows_.size()) +
                                " x " + std::to_string(cols_));
}

std::size_t SparseMatrix::nnz() const {
    std::size_t n = 0;
    for (const auto& row : rows_)
        n += row.size();
    return n;
}

void SparseMatrix::add(std::size_t r, std::size_t c, double v) {
    check(r, c);
    rows_[r][c] += v;
}

void SparseMatrix::set(std::size_t r, std::size_t c, double v) {
    check(r, c);
    rows_[r][c] = v;
}

void SparseMatrix::clear_row(std::size_t r) {
    check(r, 0);
    rows_[r].clear();
}

double SparseMatrix::coeff(std::size_t r, std::size_t c) const {
    check(r, c);
    const auto it = rows_[r].find(c);
    return it == rows_[r].end() ? 0.0 : it->second;
}

const std::map<std::size_t, double>& SparseMatrix::row(std::size_t r) const {
    check(r, 0);
    return rows_[r];
}

std::vector<double> SparseMatrix::multiply(const std::vector<double>& x) const {
    if (x.size() != cols_)
        throw std::invalid_argument("SparseMatrix::multiply: vector has " +
                                    std::to_string(x.size()) + " entries, expected " +
                                    std::to_string(cols_));
    std::vector<double> y(rows_.size(), 0.0);
    for (std::size_t r = 0; r < rows_.size(); ++r)
        for (const auto& [c, v] : rows_[r])
            y[r] += v * x[c];
    return y;
}

void SparseMatrix::write_coo(std::ostream& out) const {
    const auto prec = out.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t r = 0; r < rows_.size(); ++r)
        for (const auto& [c, v] : rows_[r])
            out << r << ' ' << c << ' ' << v << '\n';
    out.precision(prec);
}

} // namespace hytegrid

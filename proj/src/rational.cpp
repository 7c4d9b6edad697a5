#include "toda/rational.hpp"
#include "toda/error.hpp"

#include <utility>

namespace toda {

std::string to_string(const Rational& x) {
    Rational c = x;
    c.canonicalize();
    if (c.get_den() == 1) return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

Rational parse_rational(const std::string& s) {
    try {
        Rational q(s, 10);
        if (q.get_den() == 0) throw ValidationError("zero denominator in rational '" + s + "'");
        q.canonicalize();
        return q;
    } catch (const std::invalid_argument&) {
        throw ValidationError("cannot parse rational '" + s + "'");
    }
}

RatMat RatMat::identity(int n) {
    RatMat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

RatMat RatMat::operator*(const RatMat& o) const {
    RatMat out(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k) {
            if ((*this)(i, k) == 0) continue;
            for (int j = 0; j < o.cols_; ++j) out(i, j) += (*this)(i, k) * o(k, j);
        }
    return out;
}

RatMat RatMat::operator+(const RatMat& o) const {
    RatMat out(*this);
    for (size_t i = 0; i < data_.size(); ++i) out.data_[i] += o.data_[i];
    return out;
}

RatMat RatMat::operator-(const RatMat& o) const {
    RatMat out(*this);
    for (size_t i = 0; i < data_.size(); ++i) out.data_[i] -= o.data_[i];
    return out;
}

RatMat RatMat::transpose() const {
    RatMat out(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
}

bool RatMat::operator==(const RatMat& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
}

RatMat RatMat::inverse() const {
    if (rows_ != cols_) throw NumericalError("inverse of non-square matrix");
    const int n = rows_;
    RatMat a(*this), inv = identity(n);
    for (int c = 0; c < n; ++c) {
        int p = c;
        while (p < n && a(p, c) == 0) ++p;
        if (p == n) throw NumericalError("singular rational matrix");
        if (p != c)
            for (int j = 0; j < n; ++j) {
                std::swap(a(p, j), a(c, j));
                std::swap(inv(p, j), inv(c, j));
            }
        Rational piv = a(c, c);
        for (int j = 0; j < n; ++j) {
            a(c, j) /= piv;
            inv(c, j) /= piv;
        }
        for (int i = 0; i < n; ++i) {
            if (i == c || a(i, c) == 0) continue;
            Rational f = a(i, c);
            for (int j = 0; j < n; ++j) {
                a(i, j) -= f * a(c, j);
                inv(i, j) -= f * inv(c, j);
            }
        }
    }
    return inv;
}

RatVec mat_vec(const RatMat& m, const RatVec& v) {
    RatVec out(m.rows());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out[i] += m(i, j) * v[j];
    return out;
}

bool solve_exact(RatMat a, RatVec b, RatVec& x) {
    const int m = a.rows(), n = a.cols();
    std::vector<int> pivot_col;
    int row = 0;
    for (int c = 0; c < n && row < m; ++c) {
        int p = row;
        while (p < m && a(p, c) == 0) ++p;
        if (p == m) continue;
        if (p != row) {
            for (int j = 0; j < n; ++j) std::swap(a(p, j), a(row, j));
            std::swap(b[p], b[row]);
        }
        Rational piv = a(row, c);
        for (int j = c; j < n; ++j) a(row, j) /= piv;
        b[row] /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == row || a(i, c) == 0) continue;
            Rational f = a(i, c);
            for (int j = c; j < n; ++j) a(i, j) -= f * a(row, j);
            b[i] -= f * b[row];
        }
        pivot_col.push_back(c);
        ++row;
    }
    for (int i = row; i < m; ++i)
        if (b[i] != 0) return false;
    x.assign(n, Rational(0));
    for (int k = 0; k < row; ++k) x[pivot_col[k]] = b[k];
    return true;
}

}  // namespace toda

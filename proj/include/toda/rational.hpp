#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace toda {

using Rational = mpq_class;

std::string to_string(const Rational& x);
Rational parse_rational(const std::string& s);

// Small dense matrix over Q. Sizes here never exceed a few dozen.
class RatMat {
public:
    RatMat() = default;
    RatMat(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols) {}

    static RatMat identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    Rational& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
    const Rational& operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

    RatMat operator*(const RatMat& o) const;
    RatMat operator+(const RatMat& o) const;
    RatMat operator-(const RatMat& o) const;
    RatMat transpose() const;
    bool operator==(const RatMat& o) const;

    // Throws NumericalError when singular.
    RatMat inverse() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Rational> data_;
};

using RatVec = std::vector<Rational>;

RatVec mat_vec(const RatMat& m, const RatVec& v);

// Exact solve of A x = b for a general (possibly rectangular) system.
// Returns false if inconsistent; free variables are set to zero.
bool solve_exact(RatMat a, RatVec b, RatVec& x);

}  // namespace toda

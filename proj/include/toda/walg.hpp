#pragma once

#include "toda/rational.hpp"
#include "toda/rootdata.hpp"

#include <array>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace toda {

// Polynomial in two formal parameters q and p with rational coefficients; key = (deg q, deg p).
class QPoly {
public:
    QPoly() = default;
    QPoly(const Rational& c, int dq = 0, int dp = 0);

    static QPoly q(int power = 1) { return QPoly(Rational(1), power, 0); }
    static QPoly p(int power = 1) { return QPoly(Rational(1), 0, power); }

    bool zero() const { return terms_.empty(); }
    const std::map<std::array<int, 2>, Rational>& terms() const { return terms_; }
    Rational coeff(int dq, int dp = 0) const;

    QPoly operator+(const QPoly& o) const;
    QPoly operator-(const QPoly& o) const;
    QPoly operator*(const QPoly& o) const;
    QPoly operator-() const;
    bool operator==(const QPoly& o) const { return terms_ == o.terms_; }
    bool operator<(const QPoly& o) const { return terms_ < o.terms_; }

    // q -> a q, p -> b p
    QPoly rescale(const Rational& a, const Rational& b = Rational(1)) const;
    double eval(double q, double p = 0) const;

private:
    void add_term(const std::array<int, 2>& k, const Rational& c);
    std::map<std::array<int, 2>, Rational> terms_;
};

std::string to_string(const QPoly& c);

// Indeterminate: the index-th simple-root coordinate of d^order Psi, order >= 1.
struct Var {
    int order = 1;
    int index = 0;
    auto operator<=>(const Var&) const = default;
};

using Monomial = std::vector<Var>;  // sorted multiset

// Commutative differential polynomial in the Var's with QPoly coefficients, canonical form:
// sorted monomials, no zero coefficients.
class DiffPoly {
public:
    DiffPoly() = default;
    explicit DiffPoly(const QPoly& c);  // constant
    static DiffPoly var(int order, int index);
    // <v, d^order Psi> for v in simple-root coordinates: sum_i (Gram v)_i c_i^(order).
    static DiffPoly pairing(const RootSystem& rs, const RatVec& v_e, int order);

    bool zero() const { return terms_.empty(); }
    const std::map<Monomial, QPoly>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }

    DiffPoly operator+(const DiffPoly& o) const;
    DiffPoly operator-(const DiffPoly& o) const;
    DiffPoly operator*(const DiffPoly& o) const;
    DiffPoly operator*(const QPoly& c) const;
    DiffPoly operator-() const;
    DiffPoly& operator+=(const DiffPoly& o);
    bool operator==(const DiffPoly& o) const { return terms_ == o.terms_; }

    // Total derivative: c_i^(k) -> c_i^(k+1), Leibniz rule.
    DiffPoly derivative() const;
    // Weights sum(order) over factors; -1 for the zero polynomial, -2 when not homogeneous.
    int weight() const;
    // Terms of degree d in q (any p degree).
    DiffPoly q_degree(int d) const;
    DiffPoly rescale(const Rational& a, const Rational& b = Rational(1)) const;
    // values(order, index) gives the numeric value of each indeterminate.
    template <class F>
    double eval(double q, double p, F values) const {
        double s = 0;
        for (const auto& [m, c] : terms_) {
            double t = c.eval(q, p);
            for (const auto& v : m) t *= values(v.order, v.index);
            s += t;
        }
        return s;
    }

private:
    void add_term(const Monomial& m, const QPoly& c);
    std::map<Monomial, QPoly> terms_;
};

struct Current {
    int spin = 0;
    DiffPoly poly;
};

// Psi -> tau Psi: c_i^(k) -> c_{tau^{-1}(i)}^(k).
DiffPoly apply_tau(const DiffPoly& p, const OuterAut& tau);
Current apply_tau(const Current& c, const OuterAut& tau);

// h_i = omega_1 - sum_{k < i} e_k in simple-root coordinates (i = 1..n).
std::vector<RatVec> miura_weights(const RootSystem& rs);

// All W^(k), k = 0..n, of prod_i (q d + <h_i, d Psi>) = sum_k W^(k) (q d)^(n-k); 2 <= n <= 6.
std::vector<DiffPoly> miura_expansion(int n);
// Spins 2..n.
std::vector<Current> miura_currents(int n);

// <Q, d^2 Psi> - <d Psi, d Psi> with Q = q rho (simply laced) or Q = q rho + p rho^vee, q = gamma, p = 2/gamma.
Current stress_tensor(const RootSystem& rs);

struct ParityResult {
    std::vector<Current> currents;
    std::vector<int> signs;  // epsilon_s, tau W^(s) = epsilon_s W^(s)
};

// Inductive correction making each current a tau-eigenvector; tau of order 2.
// Throws StructuralError when a decomposition system is inconsistent or the result is not an eigenvector.
ParityResult parity_correct(const std::vector<Current>& currents, const RootSystem& rs, const OuterAut& tau);

void print(std::ostream& os, const DiffPoly& p);
void print(std::ostream& os, const Current& c);
std::string to_string(const DiffPoly& p);

}  // namespace toda

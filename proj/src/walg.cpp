#include "toda/walg.hpp"

#include "toda/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace toda {

QPoly::QPoly(const Rational& c, int dq, int dp) { add_term({dq, dp}, c); }

void QPoly::add_term(const std::array<int, 2>& k, const Rational& c) {
    if (c == 0) return;
    auto it = terms_.find(k);
    if (it == terms_.end()) {
        terms_.emplace(k, c);
        return;
    }
    it->second += c;
    if (it->second == 0) terms_.erase(it);
}

Rational QPoly::coeff(int dq, int dp) const {
    auto it = terms_.find({dq, dp});
    return it == terms_.end() ? Rational(0) : it->second;
}

QPoly QPoly::operator+(const QPoly& o) const {
    QPoly r = *this;
    for (const auto& [k, c] : o.terms_) r.add_term(k, c);
    return r;
}

QPoly QPoly::operator-(const QPoly& o) const { return *this + (-o); }

QPoly QPoly::operator-() const {
    QPoly r;
    for (const auto& [k, c] : terms_) r.terms_.emplace(k, -c);
    return r;
}

QPoly QPoly::operator*(const QPoly& o) const {
    QPoly r;
    for (const auto& [k1, c1] : terms_)
        for (const auto& [k2, c2] : o.terms_) r.add_term({k1[0] + k2[0], k1[1] + k2[1]}, c1 * c2);
    return r;
}

QPoly QPoly::rescale(const Rational& a, const Rational& b) const {
    QPoly r;
    for (const auto& [k, c] : terms_) {
        Rational f = c;
        for (int i = 0; i < k[0]; ++i) f *= a;
        for (int i = 0; i < k[1]; ++i) f *= b;
        r.add_term(k, f);
    }
    return r;
}

double QPoly::eval(double q, double p) const {
    double s = 0;
    for (const auto& [k, c] : terms_) s += c.get_d() * std::pow(q, k[0]) * std::pow(p, k[1]);
    return s;
}

std::string to_string(const QPoly& c) {
    if (c.zero()) return "0";
    std::ostringstream os;
    bool first = true;
    // Highest q power first.
    for (auto it = c.terms().rbegin(); it != c.terms().rend(); ++it) {
        const auto& [k, v] = *it;
        Rational a = v;
        if (first) {
            if (a < 0) os << "-";
        } else {
            os << (a < 0 ? " - " : " + ");
        }
        a = abs(a);
        const bool bare = k[0] == 0 && k[1] == 0;
        if (a != 1 || bare) os << to_string(a) << (bare ? "" : " ");
        std::string sep;
        if (k[0] > 0) {
            os << "q";
            if (k[0] > 1) os << "^" << k[0];
            sep = " ";
        }
        if (k[1] > 0) {
            os << sep << "p";
            if (k[1] > 1) os << "^" << k[1];
        }
        first = false;
    }
    return os.str();
}

DiffPoly::DiffPoly(const QPoly& c) {
    if (!c.zero()) terms_.emplace(Monomial{}, c);
}

DiffPoly DiffPoly::var(int order, int index) {
    if (order < 1) throw ValidationError("indeterminates carry at least one derivative");
    DiffPoly p;
    p.terms_.emplace(Monomial{Var{order, index}}, QPoly(Rational(1)));
    return p;
}

DiffPoly DiffPoly::pairing(const RootSystem& rs, const RatVec& v_e, int order) {
    const RatVec gv = mat_vec(rs.gram, v_e);
    DiffPoly p;
    for (int i = 0; i < rs.r; ++i)
        if (gv[i] != 0) p.add_term(Monomial{Var{order, i}}, QPoly(gv[i]));
    return p;
}

void DiffPoly::add_term(const Monomial& m, const QPoly& c) {
    if (c.zero()) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        terms_.emplace(m, c);
        return;
    }
    it->second = it->second + c;
    if (it->second.zero()) terms_.erase(it);
}

DiffPoly DiffPoly::operator+(const DiffPoly& o) const {
    DiffPoly r = *this;
    r += o;
    return r;
}

DiffPoly& DiffPoly::operator+=(const DiffPoly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

DiffPoly DiffPoly::operator-() const {
    DiffPoly r;
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
    return r;
}

DiffPoly DiffPoly::operator-(const DiffPoly& o) const { return *this + (-o); }

DiffPoly DiffPoly::operator*(const DiffPoly& o) const {
    DiffPoly r;
    for (const auto& [m1, c1] : terms_)
        for (const auto& [m2, c2] : o.terms_) {
            Monomial m;
            m.reserve(m1.size() + m2.size());
            std::merge(m1.begin(), m1.end(), m2.begin(), m2.end(), std::back_inserter(m));
            r.add_term(m, c1 * c2);
        }
    return r;
}

DiffPoly DiffPoly::operator*(const QPoly& c) const {
    DiffPoly r;
    for (const auto& [m, v] : terms_) r.add_term(m, v * c);
    return r;
}

DiffPoly DiffPoly::derivative() const {
    DiffPoly r;
    for (const auto& [m, c] : terms_)
        for (std::size_t f = 0; f < m.size(); ++f) {
            // Repeated factors appear once per copy, which supplies the multiplicity.
            Monomial d = m;
            d[f].order += 1;
            std::sort(d.begin(), d.end());
            r.add_term(d, c);
        }
    return r;
}

int DiffPoly::weight() const {
    if (terms_.empty()) return -1;
    int w = -1;
    for (const auto& [m, c] : terms_) {
        int s = 0;
        for (const auto& v : m) s += v.order;
        if (w == -1)
            w = s;
        else if (w != s)
            return -2;
    }
    return w;
}

DiffPoly DiffPoly::q_degree(int d) const {
    DiffPoly r;
    for (const auto& [m, c] : terms_) {
        QPoly part;
        for (const auto& [k, v] : c.terms())
            if (k[0] == d) part = part + QPoly(v, k[0], k[1]);
        r.add_term(m, part);
    }
    return r;
}

DiffPoly DiffPoly::rescale(const Rational& a, const Rational& b) const {
    DiffPoly r;
    for (const auto& [m, c] : terms_) r.add_term(m, c.rescale(a, b));
    return r;
}

DiffPoly apply_tau(const DiffPoly& p, const OuterAut& tau) {
    const std::vector<int> inv = tau.inverse();
    DiffPoly r;
    for (const auto& [m, c] : p.terms()) {
        DiffPoly t(c);
        for (const auto& v : m) {
            if (v.index < 0 || v.index >= static_cast<int>(inv.size()))
                throw ValidationError("automorphism does not match the polynomial's rank");
            t = t * DiffPoly::var(v.order, inv[v.index]);
        }
        r += t;
    }
    return r;
}

Current apply_tau(const Current& c, const OuterAut& tau) { return {c.spin, apply_tau(c.poly, tau)}; }

std::vector<RatVec> miura_weights(const RootSystem& rs) {
    if (rs.type.family != Family::A) throw ValidationError("Miura weights are defined for sl_n only");
    const int r = rs.r;
    std::vector<RatVec> h;
    RatVec cur(rs.fund_weights_e.cols());
    for (int j = 0; j < r; ++j) cur[j] = rs.fund_weights_e(0, j);
    for (int i = 0; i <= r; ++i) {
        h.push_back(cur);
        if (i < r) cur[i] -= 1;
    }
    return h;
}

namespace {

Rational binomial(int n, int k) {
    Rational b = 1;
    for (int i = 1; i <= k; ++i) b = b * Rational(n - k + i) / Rational(i);
    return b;
}

// Exact division of every coefficient by q^m.
DiffPoly divide_q(const DiffPoly& p, int m) {
    DiffPoly r;
    for (const auto& [mono, c] : p.terms()) {
        QPoly out;
        for (const auto& [k, v] : c.terms()) {
            if (k[0] < m) throw StructuralError("Miura coefficient not divisible by the expected power of q");
            out = out + QPoly(v, k[0] - m, k[1]);
        }
        DiffPoly t(out);
        for (const auto& v : mono) t = t * DiffPoly::var(v.order, v.index);
        r += t;
    }
    return r;
}

}  // namespace

std::vector<DiffPoly> miura_expansion(int n) {
    if (n < 2 || n > 6) throw ValidationError("Miura construction limited to 2 <= n <= 6");
    const RootSystem rs = build_root_system({Family::A, n - 1});
    const auto h = miura_weights(rs);
    // L = sum_m L[m] d^m with coefficients on the left.
    std::vector<DiffPoly> L{DiffPoly(QPoly(Rational(1)))};
    for (int i = 0; i < n; ++i) {
        std::vector<DiffPoly> dX{DiffPoly::pairing(rs, h[i], 1)};
        for (int j = 1; j <= i; ++j) dX.push_back(dX.back().derivative());
        std::vector<DiffPoly> next(L.size() + 1);
        for (std::size_t m = 0; m < L.size(); ++m) {
            // L[m] d^m (q d + X) = q L[m] d^{m+1} + sum_j C(m, j) L[m] (d^j X) d^{m-j}
            next[m + 1] += L[m] * QPoly::q();
            for (std::size_t j = 0; j <= m; ++j)
                next[m - j] += L[m] * dX[j] * QPoly(binomial(static_cast<int>(m), static_cast<int>(j)));
        }
        L = std::move(next);
    }
    std::vector<DiffPoly> W(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) W[k] = divide_q(L[n - k], n - k);
    return W;
}

std::vector<Current> miura_currents(int n) {
    const auto W = miura_expansion(n);
    std::vector<Current> out;
    for (int s = 2; s <= n; ++s) out.push_back({s, W[s]});
    return out;
}

Current stress_tensor(const RootSystem& rs) {
    const int r = rs.r;
    DiffPoly t;
    // <Q, d^2 Psi> = sum_i (Gram Q_e)_i c_i^(2)
    const DiffPoly rho2 = DiffPoly::pairing(rs, rs.rho_e, 2);
    if (rs.simply_laced()) {
        t = rho2 * QPoly::q();
    } else {
        t = rho2 * QPoly::q() + DiffPoly::pairing(rs, rs.rho_vee_e, 2) * QPoly::p();
    }
    // <d Psi, d Psi> = sum_ij Gram_ij c_i c_j
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            if (rs.gram(i, j) != 0) t = t - DiffPoly::var(1, i) * DiffPoly::var(1, j) * QPoly(rs.gram(i, j));
    return {2, t};
}

namespace {

struct BasisItem {
    int current;  // index into the corrected list
    int order;    // derivatives applied
};

// Multisets of (current, order) with sum(spin + order) = target.
void enumerate(const std::vector<Current>& cur, int target, std::size_t start_item,
               const std::vector<BasisItem>& items, std::vector<BasisItem>& acc,
               std::vector<std::vector<BasisItem>>& out) {
    if (target == 0) {
        if (!acc.empty()) out.push_back(acc);
        return;
    }
    for (std::size_t k = start_item; k < items.size(); ++k) {
        const int w = cur[items[k].current].spin + items[k].order;
        if (w > target) continue;
        acc.push_back(items[k]);
        enumerate(cur, target - w, k, items, acc, out);
        acc.pop_back();
    }
}

bool has_p(const DiffPoly& d) {
    for (const auto& [m, c] : d.terms())
        for (const auto& [k, v] : c.terms())
            if (k[1] != 0) return true;
    return false;
}

}  // namespace

ParityResult parity_correct(const std::vector<Current>& currents, const RootSystem& rs, const OuterAut& tau) {
    ParityResult res;
    if (tau.is_identity()) {
        res.currents = currents;
        res.signs.assign(currents.size(), 1);
        return res;
    }
    if (tau.order != 2) throw ValidationError("parity correction needs an automorphism of order 2");
    if (static_cast<int>(tau.perm.size()) != rs.r) throw ValidationError("automorphism does not match the root system");
    for (const auto& c : currents) {
        if (c.poly.weight() != c.spin) throw ValidationError("current is not homogeneous of weight equal to its spin");
        // The q-homogeneity ansatz below needs a single formal parameter.
        if (has_p(c.poly)) throw ValidationError("parity correction supports currents in q only");
        const DiffPoly T = apply_tau(c.poly, tau);
        // Lower-current differential monomials of weight s; coefficient x * q^{sum orders} by q-homogeneity.
        std::vector<BasisItem> items;
        for (std::size_t j = 0; j < res.currents.size(); ++j)
            for (int k = 0; res.currents[j].spin + k <= c.spin; ++k) items.push_back({static_cast<int>(j), k});
        std::vector<std::vector<BasisItem>> combos;
        std::vector<BasisItem> acc;
        enumerate(res.currents, c.spin, 0, items, acc, combos);
        std::vector<DiffPoly> cols{c.poly};
        for (const auto& combo : combos) {
            DiffPoly b(QPoly(Rational(1)));
            int qd = 0;
            for (const auto& it : combo) {
                DiffPoly d = res.currents[it.current].poly;
                for (int k = 0; k < it.order; ++k) d = d.derivative();
                b = b * d;
                qd += it.order;
            }
            cols.push_back(b * QPoly::q(qd));
        }
        // Rows: (monomial, q power) coordinates.
        std::map<std::pair<Monomial, std::array<int, 2>>, int> row_of;
        auto rows_from = [&](const DiffPoly& d) {
            for (const auto& [m, q] : d.terms())
                for (const auto& [k, v] : q.terms()) row_of.emplace(std::make_pair(m, k), 0);
        };
        rows_from(T);
        for (const auto& col : cols) rows_from(col);
        int idx = 0;
        for (auto& [key, v] : row_of) v = idx++;
        RatMat A(idx, static_cast<int>(cols.size()));
        RatVec b(static_cast<std::size_t>(idx), Rational(0));
        for (std::size_t j = 0; j < cols.size(); ++j)
            for (const auto& [m, q] : cols[j].terms())
                for (const auto& [k, v] : q.terms()) A(row_of.at({m, k}), static_cast<int>(j)) = v;
        for (const auto& [m, q] : T.terms())
            for (const auto& [k, v] : q.terms()) b[row_of.at({m, k})] = v;
        RatVec x;
        if (!solve_exact(A, b, x))
            throw StructuralError("tau image of W^(" + std::to_string(c.spin) +
                                  ") is not in the span of W and lower currents");
        const Rational lambda = x[0];
        if (lambda != 1 && lambda != -1)
            throw StructuralError("tau acts on W^(" + std::to_string(c.spin) + ") with coefficient " + to_string(lambda));
        DiffPoly D;
        for (std::size_t j = 1; j < cols.size(); ++j)
            if (x[j] != 0) D += cols[j] * QPoly(x[j]);
        const DiffPoly tD = apply_tau(D, tau);
        const DiffPoly D_even = (D + tD) * QPoly(Rational(1, 2));
        const DiffPoly D_odd = (D - tD) * QPoly(Rational(1, 2));
        // Applying tau twice forces D odd when lambda = 1 and even when lambda = -1.
        DiffPoly W = lambda == 1 ? c.poly + D_odd * QPoly(Rational(1, 2)) : c.poly - D_even * QPoly(Rational(1, 2));
        const int eps = lambda == 1 ? 1 : -1;
        if (!(apply_tau(W, tau) == W * QPoly(Rational(eps))))
            throw StructuralError("corrected W^(" + std::to_string(c.spin) + ") is not a tau eigenvector");
        res.currents.push_back({c.spin, W});
        res.signs.push_back(eps);
    }
    return res;
}

void print(std::ostream& os, const DiffPoly& p) {
    if (p.zero()) {
        os << "  0\n";
        return;
    }
    for (const auto& [m, c] : p.terms()) {
        os << "  (" << to_string(c) << ")";
        for (const auto& v : m) os << " c" << v.index + 1 << "^(" << v.order << ")";
        os << "\n";
    }
}

void print(std::ostream& os, const Current& c) {
    os << "W^(" << c.spin << ")\n";
    print(os, c.poly);
}

std::string to_string(const DiffPoly& p) {
    std::ostringstream os;
    print(os, p);
    return os.str();
}

}  // namespace toda

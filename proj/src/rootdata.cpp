#include "toda/rootdata.hpp"
#include "toda/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace toda {

namespace {

char family_letter(Family f) { return "ABCDEFG"[static_cast<int>(f)]; }

std::vector<std::vector<int>> chain(int r) {
    std::vector<std::vector<int>> a(r, std::vector<int>(r, 0));
    for (int i = 0; i < r; ++i) {
        a[i][i] = 2;
        if (i + 1 < r) a[i][i + 1] = a[i + 1][i] = -1;
    }
    return a;
}

Eigen::MatrixXd to_double(const RatMat& m) {
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).get_d();
    return out;
}

Eigen::VectorXd to_double(const RatVec& v) {
    Eigen::VectorXd out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i].get_d();
    return out;
}

int perm_order(const std::vector<int>& p) {
    std::vector<int> cur = p;
    int order = 1;
    auto is_id = [](const std::vector<int>& q) {
        for (size_t i = 0; i < q.size(); ++i)
            if (q[i] != static_cast<int>(i)) return false;
        return true;
    };
    while (!is_id(cur)) {
        std::vector<int> next(p.size());
        for (size_t i = 0; i < p.size(); ++i) next[i] = p[cur[i]];
        cur = std::move(next);
        ++order;
    }
    return order;
}

bool preserves_cartan(const std::vector<std::vector<int>>& a, const std::vector<int>& p) {
    const int r = static_cast<int>(a.size());
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            if (a[p[i]][p[j]] != a[i][j]) return false;
    return true;
}

}  // namespace

std::string LieType::name() const { return std::string(1, family_letter(family)) + std::to_string(rank); }

void validate(const LieType& t) {
    auto fail = [&](const std::string& rule) {
        throw ValidationError("invalid Lie type " + t.name() + ": " + rule);
    };
    switch (t.family) {
        case Family::A: if (t.rank < 1) fail("family A requires rank >= 1"); break;
        case Family::B: if (t.rank < 2) fail("family B requires rank >= 2"); break;
        case Family::C: if (t.rank < 3) fail("family C requires rank >= 3"); break;
        case Family::D: if (t.rank < 4) fail("family D requires rank >= 4"); break;
        case Family::E: if (t.rank < 6 || t.rank > 8) fail("family E requires rank 6, 7 or 8"); break;
        case Family::F: if (t.rank != 4) fail("family F requires rank 4"); break;
        case Family::G: if (t.rank != 2) fail("family G requires rank 2"); break;
    }
}

LieType parse_lie_type(const std::string& s) {
    if (s.size() < 2) throw ValidationError("cannot parse Lie type '" + s + "'");
    const std::string letters = "ABCDEFG";
    auto pos = letters.find(static_cast<char>(std::toupper(static_cast<unsigned char>(s[0]))));
    if (pos == std::string::npos) throw ValidationError("unknown Lie family in '" + s + "'");
    int rank = 0;
    try {
        size_t used = 0;
        rank = std::stoi(s.substr(1), &used);
        if (used != s.size() - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw ValidationError("cannot parse rank in '" + s + "'");
    }
    LieType t{static_cast<Family>(pos), rank};
    validate(t);
    return t;
}

std::vector<std::vector<int>> canonical_cartan(const LieType& t) {
    const int r = t.rank;
    if (r < 1) throw ValidationError("rank must be positive");
    std::vector<std::vector<int>> a;
    switch (t.family) {
        case Family::A: a = chain(r); break;
        case Family::B:
            a = chain(r);
            if (r >= 2) a[r - 1][r - 2] = -2;
            break;
        case Family::C:
            a = chain(r);
            if (r >= 2) a[r - 2][r - 1] = -2;
            break;
        case Family::D: {
            if (r < 3) throw ValidationError("family D requires rank >= 3 for a Cartan matrix");
            a = chain(r);
            a[r - 2][r - 1] = a[r - 1][r - 2] = 0;
            a[r - 3][r - 1] = a[r - 1][r - 3] = -1;
            break;
        }
        case Family::E: {
            a.assign(r, std::vector<int>(r, 0));
            for (int i = 0; i < r; ++i) a[i][i] = 2;
            auto link = [&](int i, int j) { a[i][j] = a[j][i] = -1; };
            link(0, 2);
            link(1, 3);
            for (int i = 2; i + 1 < r; ++i) link(i, i + 1);
            break;
        }
        case Family::F:
            a = chain(4);
            a[2][1] = -2;
            break;
        case Family::G:
            a = chain(2);
            a[1][0] = -3;
            break;
    }
    return a;
}

bool RootSystem::simply_laced() const {
    return std::all_of(norms_sq.begin(), norms_sq.end(), [](const Rational& x) { return x == 2; });
}

Eigen::VectorXd RootSystem::from_root_basis(const Eigen::VectorXd& coeffs) const {
    return roots.transpose() * coeffs;
}

Eigen::VectorXd RootSystem::from_root_basis(const RatVec& coeffs) const {
    return from_root_basis(to_double(coeffs));
}

RootSystem build_root_system(const LieType& t) {
    validate(t);
    RootSystem rs;
    rs.type = t;
    rs.r = t.rank;
    rs.cartan = canonical_cartan(t);
    const int r = rs.r;

    // A_ij d_i = A_ji d_j along the (connected) diagram fixes length ratios.
    std::vector<Rational> d(r, Rational(0));
    d[0] = 1;
    std::queue<int> bfs;
    bfs.push(0);
    while (!bfs.empty()) {
        int i = bfs.front();
        bfs.pop();
        for (int j = 0; j < r; ++j) {
            if (j == i || rs.cartan[i][j] == 0 || d[j] != 0) continue;
            d[j] = Rational(rs.cartan[i][j]) * d[i] / Rational(rs.cartan[j][i]);
            bfs.push(j);
        }
    }
    Rational mx = *std::max_element(d.begin(), d.end());
    for (auto& x : d) {
        x = 2 * x / mx;
        x.canonicalize();
    }
    rs.norms_sq = d;

    rs.gram = RatMat(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) rs.gram(i, j) = Rational(rs.cartan[i][j]) * d[i] / 2;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            if (rs.gram(i, j) != rs.gram(j, i)) throw StructuralError("Cartan matrix not symmetrizable");

    RatMat ginv = rs.gram.inverse();
    // <w_i^vee, e_k> = delta_ik  =>  coefficients = G^{-1};  <w_i, e_k> = delta_ik d_k/2.
    rs.co_fund_weights_e = ginv;
    rs.fund_weights_e = RatMat(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) rs.fund_weights_e(i, j) = d[i] / 2 * ginv(i, j);
    rs.rho_e.assign(r, Rational(0));
    rs.rho_vee_e.assign(r, Rational(0));
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            rs.rho_e[j] += rs.fund_weights_e(i, j);
            rs.rho_vee_e[j] += rs.co_fund_weights_e(i, j);
        }

    Eigen::LLT<Eigen::MatrixXd> llt(to_double(rs.gram));
    if (llt.info() != Eigen::Success) throw StructuralError("Gram matrix not positive definite");
    rs.roots = llt.matrixL();
    rs.coroots.resize(r, r);
    for (int i = 0; i < r; ++i) rs.coroots.row(i) = 2.0 / d[i].get_d() * rs.roots.row(i);
    rs.fund_weights = to_double(rs.fund_weights_e) * rs.roots;
    rs.co_fund_weights = to_double(rs.co_fund_weights_e) * rs.roots;
    rs.rho = rs.fund_weights.colwise().sum().transpose();
    rs.rho_vee = rs.co_fund_weights.colwise().sum().transpose();
    return rs;
}

bool OuterAut::is_identity() const {
    for (size_t i = 0; i < perm.size(); ++i)
        if (perm[i] != static_cast<int>(i)) return false;
    return true;
}

std::vector<int> OuterAut::inverse() const {
    std::vector<int> inv(perm.size());
    for (size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<int>(i);
    return inv;
}

OuterAut make_outer_aut(const RootSystem& rs, const std::vector<int>& perm) {
    if (static_cast<int>(perm.size()) != rs.r) throw ValidationError("automorphism has wrong length");
    std::vector<int> seen(rs.r, 0);
    for (int p : perm) {
        if (p < 0 || p >= rs.r || seen[p]++) throw ValidationError("automorphism is not a permutation");
    }
    if (!preserves_cartan(rs.cartan, perm))
        throw ValidationError("permutation is not a Dynkin diagram automorphism of " + rs.type.name());
    return OuterAut{perm, perm_order(perm)};
}

std::vector<OuterAut> outer_automorphisms(const RootSystem& rs) {
    std::vector<int> p(rs.r);
    std::iota(p.begin(), p.end(), 0);
    std::vector<OuterAut> out;
    do {
        if (preserves_cartan(rs.cartan, p)) out.push_back(OuterAut{p, perm_order(p)});
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

OuterAut parse_tau(const RootSystem& rs, const std::string& name) {
    auto all = outer_automorphisms(rs);
    if (name == "id" || name == "identity") return all.front();
    if (name == "swap") {
        if (rs.type.family == Family::D && rs.r == 4) {
            return make_outer_aut(rs, {0, 1, 3, 2});
        }
        for (const auto& a : all)
            if (a.order == 2) return a;
        throw ValidationError(rs.type.name() + " has no diagram involution");
    }
    if (name == "triality") {
        if (!(rs.type.family == Family::D && rs.r == 4)) throw ValidationError("triality exists only for D4");
        return make_outer_aut(rs, {2, 1, 3, 0});
    }
    std::vector<int> perm;
    std::stringstream ss(name);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            perm.push_back(std::stoi(tok) - 1);
        } catch (const std::exception&) {
            throw ValidationError("cannot parse automorphism '" + name + "'");
        }
    }
    return make_outer_aut(rs, perm);
}

Eigen::MatrixXd tau_matrix(const RootSystem& rs, const OuterAut& tau) {
    Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(rs.r, rs.r);
    for (int i = 0; i < rs.r; ++i) perm(tau.perm[i], i) = 1.0;
    Eigen::MatrixXd et = rs.roots.transpose();
    return et * perm * et.inverse();
}

std::optional<std::vector<int>> match_cartan(const std::vector<std::vector<int>>& a,
                                             const std::vector<std::vector<int>>& b) {
    if (a.size() != b.size()) return std::nullopt;
    std::vector<int> p(a.size());
    std::iota(p.begin(), p.end(), 0);
    do {
        bool ok = true;
        for (size_t i = 0; i < a.size() && ok; ++i)
            for (size_t j = 0; j < a.size() && ok; ++j) ok = a[p[i]][p[j]] == b[i][j];
        if (ok) return p;
    } while (std::next_permutation(p.begin(), p.end()));
    return std::nullopt;
}

std::optional<LieType> folding_table_type(const LieType& t, int order) {
    if (order == 1) return t;
    if (t.family == Family::A && order == 2) {
        if (t.rank % 2 == 0) {
            if (t.rank == 2) return LieType{Family::A, 1};
            return LieType{Family::B, t.rank / 2};
        }
        return LieType{Family::C, (t.rank + 1) / 2};
    }
    if (t.family == Family::D && order == 2) return LieType{Family::B, t.rank - 1};
    if (t.family == Family::D && t.rank == 4 && order == 3) return LieType{Family::G, 2};
    if (t.family == Family::E && t.rank == 6 && order == 2) return LieType{Family::F, 4};
    return std::nullopt;
}

FoldingData fold(const RootSystem& rs, const OuterAut& tau_in) {
    const OuterAut tau = make_outer_aut(rs, tau_in.perm);
    const int r = rs.r;
    FoldingData fd;
    fd.tau = tau;

    std::vector<int> orbit_of(r, -1);
    for (int i = 0; i < r; ++i) {
        if (orbit_of[i] >= 0) continue;
        std::vector<int> orb;
        int j = i;
        do {
            orbit_of[j] = static_cast<int>(fd.orbits.size());
            orb.push_back(j);
            j = tau.perm[j];
        } while (j != i);
        std::sort(orb.begin(), orb.end());
        fd.orbits.push_back(orb);
    }
    fd.d_N = static_cast<int>(fd.orbits.size());
    fd.d_D = r - fd.d_N;
    const int dn = fd.d_N;

    fd.folded_roots_e = RatMat(dn, r);
    for (int j = 0; j < dn; ++j)
        for (int i : fd.orbits[j]) fd.folded_roots_e(j, i) = Rational(1, static_cast<unsigned>(fd.orbits[j].size()));
    RatMat fgram = fd.folded_roots_e * rs.gram * fd.folded_roots_e.transpose();
    fd.folded_norms_sq.resize(dn);
    fd.folded_cartan.assign(dn, std::vector<int>(dn, 0));
    for (int j = 0; j < dn; ++j) fd.folded_norms_sq[j] = fgram(j, j);
    for (int j = 0; j < dn; ++j)
        for (int k = 0; k < dn; ++k) {
            Rational c = 2 * fgram(j, k) / fgram(j, j);
            c.canonicalize();
            if (c.get_den() != 1) throw StructuralError("folded Cartan matrix is not integral");
            fd.folded_cartan[j][k] = static_cast<int>(c.get_num().get_si());
        }

    auto expected = folding_table_type(rs.type, tau.order);
    if (!expected) throw StructuralError("no folding table row for " + rs.type.name());
    fd.folded_type = *expected;
    if (!match_cartan(fd.folded_cartan, canonical_cartan(fd.folded_type)))
        throw StructuralError("folded Cartan matrix does not match type " + fd.folded_type.name());

    fd.kappa_sq = *std::max_element(fd.folded_norms_sq.begin(), fd.folded_norms_sq.end());
    for (int j = 0; j < dn; ++j)
        if (fd.folded_norms_sq[j] == 2) fd.I_tau.push_back(j);

    fd.p_N_e = RatMat(r, r);
    for (int i = 0; i < r; ++i)
        for (int k : fd.orbits[orbit_of[i]])
            fd.p_N_e(i, k) = Rational(1, static_cast<unsigned>(fd.orbits[orbit_of[i]].size()));

    const Eigen::MatrixXd et = rs.roots.transpose();
    const Eigen::MatrixXd et_inv = et.inverse();
    fd.p_N = et * to_double(fd.p_N_e) * et_inv;
    fd.p_N = 0.5 * (fd.p_N + fd.p_N.transpose());
    fd.p_D = Eigen::MatrixXd::Identity(r, r) - fd.p_N;
    fd.tau_mat = tau_matrix(rs, tau);
    fd.folded_roots = to_double(fd.folded_roots_e) * rs.roots;

    RatVec half_norms(dn);
    for (int j = 0; j < dn; ++j) half_norms[j] = fd.folded_norms_sq[j] / 2;
    RatVec c = mat_vec(fgram.inverse(), half_norms);
    fd.rho_tau_e.assign(r, Rational(0));
    for (int j = 0; j < dn; ++j)
        for (int i = 0; i < r; ++i) fd.rho_tau_e[i] += c[j] * fd.folded_roots_e(j, i);
    fd.rho_tau = rs.from_root_basis(fd.rho_tau_e);

    fd.f_dual = Eigen::MatrixXd::Zero(dn, r);
    for (int j = 0; j < dn; ++j)
        for (int i : fd.orbits[j]) fd.f_dual.row(j) += rs.co_fund_weights.row(i);
    return fd;
}

BackgroundCharge background_charges(const RootSystem& rs, const FoldingData& fd, double gamma) {
    if (!(gamma > 0.0 && gamma < std::sqrt(2.0)))
        throw ValidationError("coupling constant gamma must lie in (0, sqrt(2))");
    BackgroundCharge bc;
    bc.gamma = gamma;
    bc.Q = gamma * rs.rho + (2.0 / gamma) * rs.rho_vee;
    if (!fd.tau.is_identity()) bc.Q_tau = gamma * fd.rho_tau + (2.0 / gamma) * rs.rho;
    return bc;
}

namespace {

nlohmann::json rat_matrix_json(const RatMat& m) {
    nlohmann::json out = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out.push_back(to_string(m(i, j)));
    return out;
}

nlohmann::json int_matrix_json(const std::vector<std::vector<int>>& m) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : m)
        for (int x : row) out.push_back(to_string(Rational(x)));
    return out;
}

nlohmann::json rat_vec_json(const RatVec& v) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& x : v) out.push_back(to_string(x));
    return out;
}

}  // namespace

nlohmann::json to_json(const RootSystem& rs) {
    nlohmann::json j;
    j["family"] = std::string(1, family_letter(rs.type.family));
    j["rank"] = rs.r;
    j["cartan"] = int_matrix_json(rs.cartan);
    j["gram"] = rat_matrix_json(rs.gram);
    j["norms_sq"] = rat_vec_json(rs.norms_sq);
    j["fund_weights"] = rat_matrix_json(rs.fund_weights_e);
    j["co_fund_weights"] = rat_matrix_json(rs.co_fund_weights_e);
    j["rho"] = rat_vec_json(rs.rho_e);
    j["rho_vee"] = rat_vec_json(rs.rho_vee_e);
    j["basis"] = "simple_roots";
    return j;
}

nlohmann::json to_json(const RootSystem& rs, const FoldingData& fd) {
    nlohmann::json j;
    j["root_system"] = to_json(rs);
    std::vector<int> perm1;
    for (int p : fd.tau.perm) perm1.push_back(p + 1);
    j["tau"] = perm1;
    j["order"] = fd.tau.order;
    nlohmann::json orbits = nlohmann::json::array();
    for (const auto& o : fd.orbits) {
        std::vector<int> o1;
        for (int i : o) o1.push_back(i + 1);
        orbits.push_back(o1);
    }
    j["orbits"] = orbits;
    j["folded"] = fd.folded_type.name();
    j["d_N"] = fd.d_N;
    j["d_D"] = fd.d_D;
    j["folded_cartan"] = int_matrix_json(fd.folded_cartan);
    j["folded_norms_sq"] = rat_vec_json(fd.folded_norms_sq);
    j["kappa_sq"] = to_string(fd.kappa_sq);
    std::vector<int> itau;
    for (int i : fd.I_tau) itau.push_back(i + 1);
    j["I_tau"] = itau;
    j["p_N"] = rat_matrix_json(fd.p_N_e);
    j["rho_tau"] = rat_vec_json(fd.rho_tau_e);
    return j;
}

}  // namespace toda

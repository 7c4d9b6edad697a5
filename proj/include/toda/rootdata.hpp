#pragma once

#include "toda/rational.hpp"

#include <Eigen/Dense>
#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace toda {

enum class Family { A, B, C, D, E, F, G };

struct LieType {
    Family family = Family::A;
    int rank = 1;

    std::string name() const;
    bool operator==(const LieType&) const = default;
};

// Throws ValidationError naming the family constraint.
void validate(const LieType& t);
LieType parse_lie_type(const std::string& s);

// Canonical Cartan matrix, A_ij = <e_i^vee, e_j>, Bourbaki node order.
std::vector<std::vector<int>> canonical_cartan(const LieType& t);

struct RootSystem {
    LieType type;
    int r = 0;
    std::vector<std::vector<int>> cartan;
    RatMat gram;                 // <e_i, e_j>
    std::vector<Rational> norms_sq;

    // Exact coordinates in the simple-root basis (row i = coefficients of the vector).
    RatMat fund_weights_e;
    RatMat co_fund_weights_e;
    RatVec rho_e;
    RatVec rho_vee_e;

    // Orthonormal coordinates; rows are vectors in a = R^r.
    Eigen::MatrixXd roots;
    Eigen::MatrixXd coroots;
    Eigen::MatrixXd fund_weights;
    Eigen::MatrixXd co_fund_weights;
    Eigen::VectorXd rho;
    Eigen::VectorXd rho_vee;

    bool simply_laced() const;
    // Orthonormal coordinates of a vector given in the simple-root basis.
    Eigen::VectorXd from_root_basis(const Eigen::VectorXd& coeffs) const;
    Eigen::VectorXd from_root_basis(const RatVec& coeffs) const;
};

RootSystem build_root_system(const LieType& t);

struct OuterAut {
    std::vector<int> perm;  // 0-based, e_i -> e_perm[i]
    int order = 1;

    bool is_identity() const;
    std::vector<int> inverse() const;
    bool operator==(const OuterAut& o) const { return perm == o.perm; }
};

OuterAut make_outer_aut(const RootSystem& rs, const std::vector<int>& perm);
std::vector<OuterAut> outer_automorphisms(const RootSystem& rs);
// Names: "id", "swap", "triality", or a 1-based list "4,3,2,1".
OuterAut parse_tau(const RootSystem& rs, const std::string& name);

// Matrix of tau in orthonormal coordinates (acts on column vectors).
Eigen::MatrixXd tau_matrix(const RootSystem& rs, const OuterAut& tau);

struct FoldingData {
    OuterAut tau;
    std::vector<std::vector<int>> orbits;
    RatMat folded_roots_e;            // d_N x r, simple-root coordinates
    Eigen::MatrixXd folded_roots;     // d_N x r, orthonormal coordinates
    std::vector<Rational> folded_norms_sq;
    std::vector<std::vector<int>> folded_cartan;
    LieType folded_type;
    int d_N = 0;
    int d_D = 0;
    RatMat p_N_e;                     // projections acting on simple-root coordinates
    Eigen::MatrixXd p_N;
    Eigen::MatrixXd p_D;
    Eigen::MatrixXd tau_mat;
    Rational kappa_sq;
    std::vector<int> I_tau;
    RatVec rho_tau_e;
    Eigen::VectorXd rho_tau;
    // Dual basis of the f_j inside a_N: <f_star_j, f_k> = delta_jk.
    Eigen::MatrixXd f_dual;
};

FoldingData fold(const RootSystem& rs, const OuterAut& tau);

struct BackgroundCharge {
    double gamma = 0;
    Eigen::VectorXd Q;
    std::optional<Eigen::VectorXd> Q_tau;
};

BackgroundCharge background_charges(const RootSystem& rs, const FoldingData& fd, double gamma);

// Searches a simultaneous permutation of rows/columns mapping a onto b.
std::optional<std::vector<int>> match_cartan(const std::vector<std::vector<int>>& a,
                                             const std::vector<std::vector<int>>& b);

// Folded type predicted by the folding table for (type, order of tau).
std::optional<LieType> folding_table_type(const LieType& t, int order);

nlohmann::json to_json(const RootSystem& rs);
nlohmann::json to_json(const RootSystem& rs, const FoldingData& fd);

}  // namespace toda

#pragma once

#include "toda/exec.hpp"
#include "toda/fields.hpp"
#include "toda/rational.hpp"
#include "toda/rootdata.hpp"

#include <Eigen/Dense>
#include "json.hpp"

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace toda {

using cplx = std::complex<double>;

struct BulkInsertion {
    int vertex = 0;
    Eigen::VectorXd alpha;
};

struct BoundaryInsertion {
    int vertex = 0;
    Eigen::VectorXd beta;  // in a_N
};

struct InsertionSpec {
    std::vector<BulkInsertion> bulk;
    // Listed in curve order within each boundary component.
    std::vector<BoundaryInsertion> boundary;
};

struct CorrelatorSpec {
    double gamma = 1.0;
    std::vector<double> mu_bulk;        // r entries, all > 0
    std::vector<cplx> mu_boundary;      // d_N entries, used on every arc unless mu_arcs is set
    // mu_arcs[n][l][j]: component n, arc l starting at the l-th insertion of that component
    // (a component without insertions has one arc), folded root j.
    std::vector<std::vector<std::vector<cplx>>> mu_arcs;
    InsertionSpec insertions;
    bool conformal_restriction = true;
    // Run even when the Seiberg bounds fail; a divergent zero mode is then flagged, not thrown.
    bool override_bounds = false;
};

// Field used by the correlator: closed GFF on closed surfaces, Cardy GFF otherwise.
FieldKind correlator_field(const FieldEnsemble& ens);

// Throws ValidationError naming the broken invariant.
void validate(const CorrelatorSpec& spec, const FieldEnsemble& ens);

struct SeibergReport {
    Eigen::VectorXd s_bar;                       // sum alpha + sum beta/2 - Q chi
    std::vector<double> condition_1;             // <s_bar, omega_i^vee>, i = 1..r
    std::vector<std::vector<double>> condition_2_bulk;      // [k][i] = <alpha_k - Q, e_i>
    std::vector<std::vector<double>> condition_2_boundary;  // [l][i] = <beta_l - Q, e_i>
    bool verdict = false;
};

SeibergReport seiberg_check(const CorrelatorSpec& spec, const FieldEnsemble& ens);

struct ConformalData {
    double delta = 0;
    double central_charge = 0;
};

ConformalData conformal_data(const RootSystem& rs, double gamma, const Eigen::VectorXd& alpha);

// Mesh-scale exponent of a vertex operator, exactly: |w|^2/2 in the bulk, |w|^2/4 on the boundary.
Rational vertex_exponent(const RootSystem& rs, const RatVec& w_e, bool boundary);

struct GirsanovReduction {
    double log_C0 = 0;
    double variance_Y = 0;
    Eigen::MatrixXd H;  // n x r drift E[X(x) Y]
    Eigen::VectorXd s_bar;
};

// Lattice-Wick constant: log C0 = Var(Y)/2 + sum |alpha_k|^2/2 log delta_k + sum |beta_l|^2/4 log delta_l
// with delta = sqrt(a_v) in the bulk and l_v on the boundary.
GirsanovReduction girsanov_reduce(const CorrelatorSpec& spec, const FieldEnsemble& ens);

struct ZeroModeOptions {
    double rel_tol = 1e-8;
    int max_depth = 15;
    bool allow_divergent = false;
};

// The integral is value * exp(log_scale); |value| = 1 away from divergence.
struct ZeroModeResult {
    cplx value{0.0, 0.0};
    double log_scale = 0;
    double rel_error = 0;   // quadrature error estimate relative to |value|
    bool divergent = false;
    std::vector<std::pair<double, double>> box;  // integration range per coordinate

    cplx total() const;
};

// K(kappa, b) = int exp(kappa t - e^t - b e^{t/2}) dt for kappa > 0, Re b >= 0.
// Adaptive Gauss-Kronrod on a window around the maximum plus a series for the left tail.
ZeroModeResult k_integral(double kappa, cplx b, double rel_tol = 1e-10, int max_depth = 15);

// int exp(s c - m e^{a c}) dc by direct adaptive quadrature; closed form a^{-1} m^{-s/a} Gamma(s/a).
ZeroModeResult rank_one_integral(double s, double a, double m, double rel_tol = 1e-10);

// I(Z) = int_{a_N} exp(<s_bar, c> - sum_i mu_i Z_i e^{<gamma e_i, c>} - sum_j B_j e^{<gamma f_j, c>/2}) dc
// where B_j already contains the boundary cosmological constants.
// In t_j = <gamma f_j, c> the integral factorizes: J0 prod_j A_j^{-kappa_j} K(kappa_j, B_j / sqrt(A_j)),
// A_j = sum_{i in orbit j} mu_i Z_i, kappa_j = <s_bar, f*_j> / gamma.
class ZeroModeIntegral {
public:
    // fd = nullptr: closed surface, the zero mode ranges over all of a.
    ZeroModeIntegral(const RootSystem& rs, const FoldingData* fd, double gamma, Eigen::VectorXd s_bar,
                     std::vector<double> mu_bulk, ZeroModeOptions opt = {});

    int dim() const { return d_; }
    const std::vector<double>& kappa() const { return kappa_; }
    double log_jacobian() const { return log_J0_; }
    bool divergent() const { return divergent_; }

    ZeroModeResult integrate(const Eigen::VectorXd& Z, const Eigen::VectorXcd& B) const;
    // Same integral without the factorization: nested adaptive quadrature over an orthonormal basis of a_N.
    ZeroModeResult integrate_nested(const Eigen::VectorXd& Z, const Eigen::VectorXcd& B) const;
    // B = 0 only: J0 prod_j A_j^{-kappa_j} Gamma(kappa_j).
    double analytic(const Eigen::VectorXd& Z) const;

private:
    double gamma_;
    int r_ = 0;
    int d_ = 0;
    Eigen::VectorXd s_bar_;
    std::vector<double> mu_;
    std::vector<std::vector<int>> orbits_;
    Eigen::MatrixXd f_;       // d x r
    Eigen::MatrixXd roots_;   // r x r
    Eigen::MatrixXd basis_;   // r x d orthonormal basis of the zero-mode space
    std::vector<double> kappa_;
    std::vector<ZeroModeResult> k_at_zero_;
    double log_J0_ = 0;
    bool divergent_ = false;
    ZeroModeOptions opt_;
};

enum class ZeroModeMethod { Factorized, Nested, Analytic };
std::string to_string(ZeroModeMethod m);
ZeroModeMethod parse_zero_mode_method(const std::string& s);

struct EstimateOptions {
    std::int64_t n_samples = 10000;
    std::uint64_t seed = 0;
    ExecPolicy exec{};
    ZeroModeMethod method = ZeroModeMethod::Factorized;
    ZeroModeOptions zero_mode{};
    bool keep_samples = false;
};

struct Estimate {
    cplx value{0.0, 0.0};
    double stderr_re = 0;
    double stderr_im = 0;
    std::int64_t n_samples = 0;
    double log_C0 = 0;
    double max_quad_error = 0;  // worst relative quadrature error over samples
    bool divergent = false;
    SeibergReport seiberg;
    ZeroModeMethod method = ZeroModeMethod::Factorized;
    std::vector<cplx> samples;  // per-replica C0 I(Z) when requested
};

Estimate estimate_correlator(const CorrelatorSpec& spec, const FieldEnsemble& ens, const EstimateOptions& opt);

// Aitken extrapolation of three successive refinements; returns the last value when differences do not contract.
double richardson(double coarse, double mid, double fine);

struct WeylShiftReport {
    double variance_Y = 0;
    double energy_formula = 0;  // |Q|^2/(8 pi) sum_edges c (phi_v - phi_w)^2
    double variance_error = 0;
    std::vector<int> probes;
    std::vector<double> shift;
    std::vector<double> shift_formula;  // -(<Q,u>/2)(phi - m(phi))
    double shift_error = 0;
};

// Exact linear algebra with the closed (or Neumann) Green matrix of s.
WeylShiftReport weyl_shift_check(const DiscreteSurface& s, const RootSystem& rs, double gamma,
                                 const Eigen::VectorXd& phi, const Eigen::VectorXd& u,
                                 std::vector<int> probes = {});

// Weights are simple-root coordinates; complex constants may be given as [re, im].
CorrelatorSpec correlator_spec_from_json(const nlohmann::json& j, const RootSystem& rs);
nlohmann::json to_json(const SeibergReport& s);
nlohmann::json to_json(const Estimate& e);

}  // namespace toda

#pragma once

#include "toda/fields.hpp"
#include "toda/rational.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace toda {

enum class ChaosRegion { Bulk, Boundary };
enum class ChaosMode { Raw, Wick };
std::string to_string(ChaosRegion r);
std::string to_string(ChaosMode m);
ChaosRegion parse_chaos_region(const std::string& s);
ChaosMode parse_chaos_mode(const std::string& s);

struct ChaosSpec {
    Eigen::VectorXd direction;
    ChaosRegion region = ChaosRegion::Bulk;
    ChaosMode mode = ChaosMode::Wick;
    // Per vertex; empty means sqrt(a_v) in the bulk and l_v on the boundary.
    std::vector<double> mesh_scale;
};

// Deterministic insertion weight exp(<u, E[X(.) <alpha, X(vertex)>]>) multiplying each site.
struct ChaosShift {
    int vertex = 0;
    Eigen::VectorXd alpha;
};

struct ChaosSample {
    std::vector<int> sites;
    std::vector<double> masses;
    double total = 0;
};

// Squared norm governing the boundary behaviour of <u, X>: |u|^2 for Neumann, |p_N u|^2 for Cardy.
double boundary_norm_sq(const FieldEnsemble& ens, FieldKind kind, const Eigen::VectorXd& u);

// Precomputed per-site data; mass_v = exp(<u, X(v)> + log_prefactor_v).
class ChaosKernel {
public:
    ChaosKernel(const FieldEnsemble& ens, FieldKind kind, const ChaosSpec& spec,
                const std::vector<char>& mask = {}, const std::optional<ChaosShift>& shift = std::nullopt);

    ChaosSample apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
    double total(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
    double expected_total() const;
    // raw_v / wick_v = delta_v^{exponent} exp(Var_v / 2); independent of the field.
    const std::vector<double>& mode_ratio() const { return ratio_; }
    const std::vector<int>& sites() const { return sites_; }
    double exponent() const { return exponent_; }
    const std::vector<double>& variance() const { return var_; }

private:
    Eigen::VectorXd u_;
    std::vector<int> sites_;
    std::vector<double> log_pref_;
    std::vector<double> ratio_;
    std::vector<double> var_;
    std::vector<double> expected_;
    double exponent_ = 0;
};

ChaosSample gmc_bulk(const FieldEnsemble& ens, FieldKind kind, const ChaosSpec& spec, const FieldSample& field);
ChaosSample gmc_boundary(const FieldEnsemble& ens, FieldKind kind, const ChaosSpec& spec, const FieldSample& field);

// Exponent of the mesh scale in the Raw normalization, exactly, for u given in simple-root
// coordinates: |u|^2/2 in the bulk, |p_N u|^2 on the boundary of a Cardy field (p_N = I for Neumann).
Rational raw_exponent(const RootSystem& rs, const FoldingData& fd, FieldKind kind, ChaosRegion region,
                      const RatVec& u_e);

// Total masses for replicas [0, count) in replica order.
std::vector<double> gmc_totals(const FieldEnsemble& ens, FieldKind kind, const ChaosKernel& kernel,
                               std::int64_t count, std::uint64_t seed, const ExecPolicy& policy = {},
                               std::uint64_t tag = 0);

enum class MomentVerdict { Finite, Divergent, Inconclusive };
std::string to_string(MomentVerdict v);

struct TailEstimate {
    double alpha = 0;   // Hill estimate of the tail index
    double band = 0;    // +- 2 alpha / sqrt(k)
    int k = 0;
};

// Hill estimator on the k largest values (k = 0: floor(sqrt(n)), at least 10).
TailEstimate hill_estimate(std::vector<double> values, int k = 0);

// Max relative spread of the running mean over the checkpoints n/16, n/8, n/4, n/2, n.
double running_mean_drift(const std::vector<double>& values);

struct MomentRow {
    double p = 0;
    double estimate = 0;
    double stderr_ = 0;
    double drift = 0;
    MomentVerdict verdict = MomentVerdict::Inconclusive;
};

struct MomentReport {
    std::vector<MomentRow> rows;
    TailEstimate tail;
    double predicted_threshold = 0;  // moment window
    double scaling_threshold = 0;    // multifractal scaling root; differs only near boundary insertions
    double expected_mass = 0;
    std::int64_t n_samples = 0;
    int mesh_level = 0;
};

// Moment window: 4/|u|^2 in the bulk, capped by 2/|u|^2 once the region reaches the boundary,
// 1/|u_b|^2 for boundary chaos (u_b as in boundary_norm_sq). A shift at an interior vertex caps
// it by 1 + (4 - 2<u,alpha>)/|u|^2; boundary shifts use the singularity a = 2<u_b, alpha>.
double predicted_threshold(const FieldEnsemble& ens, FieldKind kind, const ChaosSpec& spec,
                           const std::vector<char>& mask = {}, const std::optional<ChaosShift>& shift = std::nullopt);

double scaling_threshold(const FieldEnsemble& ens, FieldKind kind, const ChaosSpec& spec,
                         const std::vector<char>& mask = {}, const std::optional<ChaosShift>& shift = std::nullopt);

// Bulk threshold for u = gamma e: (1/gamma) <Q - alpha, 2e/|e|^2>.
double shift_threshold(const Eigen::VectorXd& Q, const Eigen::VectorXd& alpha, double gamma, const Eigen::VectorXd& e);

struct MomentScanOptions {
    std::vector<double> p_grid{-1.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    std::int64_t n_samples = 10000;
    std::uint64_t seed = 0;
    int mesh_level = 0;
    int hill_k = 0;
    ExecPolicy exec{};
};

MomentReport moment_scan(const FieldEnsemble& ens, FieldKind kind, const ChaosSpec& spec,
                         const std::vector<char>& mask, const std::optional<ChaosShift>& shift,
                         const MomentScanOptions& opt);

void write_moment_csv(std::ostream& os, const std::vector<MomentReport>& reports);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(std::vector<double> a, std::vector<double> b);

// Wick total mass on LxL unit tori (spacing 1/L, L = base * 2^level), closed field;
// returns KS distances between consecutive levels. Levels use independent seeds.
std::vector<double> wick_refinement_ks(const RootSystem& rs, const FoldingData& fd, const Eigen::VectorXd& u,
                                       int base, int levels, std::int64_t count, std::uint64_t seed,
                                       const ExecPolicy& policy = {});

}  // namespace toda

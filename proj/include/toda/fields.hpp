#pragma once

#include "toda/exec.hpp"
#include "toda/rng.hpp"
#include "toda/rootdata.hpp"
#include "toda/surface.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace toda {

enum class FieldKind { Closed, Neumann, Dirichlet, Cardy };
std::string to_string(FieldKind k);
FieldKind parse_field_kind(const std::string& s);

// Covariance of an a-valued field: E[<u,X(x)><v,X(y)>] = sum_parts G(x,y) u^T P v.
struct CovarianceLaw {
    struct Part {
        std::shared_ptr<const GreenMatrix> green;
        Eigen::MatrixXd P;
    };
    std::vector<Part> parts;

    double pair(int x, int y, const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
    // E[X(x) <u, X(y)>] as a vector in a.
    Eigen::VectorXd apply(int x, int y, const Eigen::VectorXd& u) const;
    // Var <u, X(v)> for every vertex.
    Eigen::VectorXd variance(const Eigen::VectorXd& u) const;
};

// Row v of a sample is the field vector at vertex v in orthonormal coordinates.
using FieldSample = Eigen::MatrixXd;

class FieldEnsemble {
public:
    FieldEnsemble(DiscreteSurface surface, RootSystem rs, FoldingData fold, const GreenOptions& opt = {});

    int n() const { return surface_.n_vertices; }
    int r() const { return rs_.r; }
    const DiscreteSurface& surface() const { return surface_; }
    const RootSystem& root_system() const { return rs_; }
    const FoldingData& folding() const { return fold_; }

    bool has(GreenKind k) const;
    const GreenMatrix& green(GreenKind k) const;
    // L with L L^T = G (eigen-factor, tiny negative eigenvalues clamped).
    const Eigen::MatrixXd& factor(GreenKind k) const;
    double factor_error(GreenKind k) const;
    CovarianceLaw law(FieldKind k) const;
    void require(FieldKind k) const;

    // Replicas first..first+count-1 stacked as n x (count*r); replica j uses stream (j, tag).
    Eigen::MatrixXd sample_block(FieldKind k, const StreamFamily& streams, std::uint64_t first, int count,
                                 std::uint64_t tag = 0) const;
    FieldSample sample_one(FieldKind k, const StreamFamily& streams, std::uint64_t replica, std::uint64_t tag = 0) const;

    const Eigen::MatrixXd& basis_N() const { return U_N_; }
    const Eigen::MatrixXd& basis_D() const { return U_D_; }

private:
    DiscreteSurface surface_;
    RootSystem rs_;
    FoldingData fold_;
    std::shared_ptr<const GreenMatrix> g_[3];
    Eigen::MatrixXd L_[3];
    double err_[3] = {0, 0, 0};
    Eigen::MatrixXd U_N_, U_D_;
};

constexpr int kReplicaBlock = 256;

// Replicas [0, count) in blocks of kReplicaBlock; blocks may run concurrently.
// fn(block_index, first_replica, block) must only touch state owned by its block.
void for_each_sample_block(const FieldEnsemble& ens, FieldKind k, std::uint64_t seed, std::int64_t count,
                           const ExecPolicy& policy, std::uint64_t tag,
                           const std::function<void(std::int64_t, std::int64_t, const Eigen::MatrixXd&)>& fn);

std::vector<FieldSample> sample(const FieldEnsemble& ens, FieldKind k, std::int64_t count, std::uint64_t seed,
                                const ExecPolicy& policy = {});
std::vector<FieldSample> sample_cardy(const FieldEnsemble& ens, std::int64_t count, std::uint64_t seed,
                                     const ExecPolicy& policy = {});

// Exact covariance of (X^ + tau X^ o sigma)/sqrt(2) built on the double, against
// kron(G^N, p_N) + kron(G^D, p_D) from direct solves. Index (x, a) -> x*r + a.
struct CardyDoublingCheck {
    Eigen::MatrixXd from_double;
    Eigen::MatrixXd direct;
    double max_error = 0;
};
CardyDoublingCheck cardy_doubling_covariance(const DiscreteSurface& s, const RootSystem& rs, const FoldingData& fd);

// Y = sum_m w_m <u_m, X(x_m)>.
struct LinearFunctional {
    std::vector<int> vertices;
    std::vector<Eigen::VectorXd> directions;
    std::vector<double> weights;

    double eval(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
};

enum class TestFunctionalKind { Constant, Linear, BoundedExp };

// Linear: <v, X(z)>. BoundedExp: exp(-s * exp(<v, X(z)>)), valued in (0, 1].
struct TestFunctional {
    TestFunctionalKind kind = TestFunctionalKind::Constant;
    int vertex = 0;
    Eigen::VectorXd direction;
    double scale = 1.0;

    double eval(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
};

struct GirsanovReport {
    double variance_Y = 0;
    double tilted = 0;
    double tilted_stderr = 0;
    double shifted = 0;
    double shifted_stderr = 0;
    std::optional<double> exact;
    Eigen::MatrixXd shift;  // n x r, shift(x) = E[Y X(x)]
    std::int64_t n_samples = 0;
};

GirsanovReport girsanov_check(const FieldEnsemble& ens, FieldKind k, const LinearFunctional& y,
                              const TestFunctional& f, std::int64_t n_samples, std::uint64_t seed,
                              const ExecPolicy& policy = {});

// Binary dump: u64 n_vertices, u64 r, u64 count, u64 seed, then row-major float64 samples.
void write_sample_dump(const std::string& path, const FieldEnsemble& ens, FieldKind k, std::int64_t count,
                       std::uint64_t seed, const ExecPolicy& policy = {});

struct SampleDump {
    std::uint64_t n_vertices = 0, r = 0, count = 0, seed = 0;
    std::vector<double> values;
};
SampleDump read_sample_dump(const std::string& path);

}  // namespace toda

#include "toda/fields.hpp"

#include "toda/error.hpp"
#include "toda/stats.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace toda {

namespace {

int slot(GreenKind k) { return static_cast<int>(k); }

// Symmetric PSD square root factor; rank deficiency of the mean-zero Green
// matrices shows up as eigenvalues of size ~1e-14 with either sign.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& G) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of Green matrix failed");
    Eigen::VectorXd lam = es.eigenvalues();
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] < -1e-10 * scale)
            throw NumericalError("Green matrix has a negative eigenvalue " + std::to_string(lam[i]));
        lam[i] = lam[i] > 0 ? std::sqrt(lam[i]) : 0.0;
    }
    return es.eigenvectors() * lam.asDiagonal();
}

// Orthonormal basis (columns) of the range of a symmetric projector.
Eigen::MatrixXd projector_basis(const Eigen::MatrixXd& P, int dim) {
    const int r = static_cast<int>(P.rows());
    if (dim == 0) return Eigen::MatrixXd(r, 0);
    if (dim == r) return Eigen::MatrixXd::Identity(r, r);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    // Eigenvalues ascending: the last dim columns span the range.
    return es.eigenvectors().rightCols(dim);
}

void fill_normals(std::mt19937_64& gen, double* out, std::int64_t count) {
    std::normal_distribution<double> nd;
    for (std::int64_t i = 0; i < count; ++i) out[i] = nd(gen);
}

}  // namespace

std::string to_string(FieldKind k) {
    switch (k) {
        case FieldKind::Closed: return "closed";
        case FieldKind::Neumann: return "neumann";
        case FieldKind::Dirichlet: return "dirichlet";
        case FieldKind::Cardy: return "cardy";
    }
    return "?";
}

FieldKind parse_field_kind(const std::string& s) {
    if (s == "closed") return FieldKind::Closed;
    if (s == "neumann") return FieldKind::Neumann;
    if (s == "dirichlet") return FieldKind::Dirichlet;
    if (s == "cardy") return FieldKind::Cardy;
    throw ValidationError("unknown field kind '" + s + "' (closed, neumann, dirichlet, cardy)");
}

double CovarianceLaw::pair(int x, int y, const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    double s = 0;
    for (const auto& p : parts) s += p.green->G(x, y) * u.dot(p.P * v);
    return s;
}

Eigen::VectorXd CovarianceLaw::apply(int x, int y, const Eigen::VectorXd& u) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
    for (const auto& p : parts) out += p.green->G(x, y) * (p.P * u);
    return out;
}

Eigen::VectorXd CovarianceLaw::variance(const Eigen::VectorXd& u) const {
    if (parts.empty()) return {};
    Eigen::VectorXd out = Eigen::VectorXd::Zero(parts.front().green->G.rows());
    for (const auto& p : parts) out += u.dot(p.P * u) * p.green->G.diagonal();
    return out;
}

FieldEnsemble::FieldEnsemble(DiscreteSurface surface, RootSystem rs, FoldingData fold, const GreenOptions& opt)
    : surface_(std::move(surface)), rs_(std::move(rs)), fold_(std::move(fold)) {
    validate(surface_);
    if (fold_.p_N.rows() != rs_.r) throw ValidationError("folding data does not match the root system");
    std::vector<GreenKind> kinds;
    if (surface_.closed())
        kinds = {GreenKind::Closed};
    else
        kinds = {GreenKind::Neumann, GreenKind::Dirichlet};
    for (GreenKind k : kinds) {
        auto g = std::make_shared<GreenMatrix>(toda::green(surface_, k, opt));
        Eigen::MatrixXd L;
        if (k == GreenKind::Dirichlet) {
            // Factor the interior block only; boundary rows of L stay exactly zero.
            const auto mask = surface_.boundary_mask();
            std::vector<int> interior;
            for (int v = 0; v < surface_.n_vertices; ++v)
                if (!mask[v]) interior.push_back(v);
            const int m = static_cast<int>(interior.size());
            Eigen::MatrixXd GI(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) GI(i, j) = g->G(interior[i], interior[j]);
            const Eigen::MatrixXd LI = psd_factor(GI);
            L = Eigen::MatrixXd::Zero(surface_.n_vertices, m);
            for (int i = 0; i < m; ++i) L.row(interior[i]) = LI.row(i);
        } else {
            L = psd_factor(g->G);
        }
        const double err = (L * L.transpose() - g->G).cwiseAbs().maxCoeff();
        if (err > 1e-10) throw NumericalError("covariance factor error " + std::to_string(err) + " exceeds 1e-10");
        g_[slot(k)] = g;
        L_[slot(k)] = std::move(L);
        err_[slot(k)] = err;
    }
    U_N_ = projector_basis(fold_.p_N, fold_.d_N);
    U_D_ = projector_basis(fold_.p_D, fold_.d_D);
}

bool FieldEnsemble::has(GreenKind k) const { return g_[slot(k)] != nullptr; }

const GreenMatrix& FieldEnsemble::green(GreenKind k) const {
    if (!has(k)) throw ValidationError(to_string(k) + " Green function is not available on this surface");
    return *g_[slot(k)];
}

const Eigen::MatrixXd& FieldEnsemble::factor(GreenKind k) const {
    green(k);
    return L_[slot(k)];
}

double FieldEnsemble::factor_error(GreenKind k) const {
    green(k);
    return err_[slot(k)];
}

void FieldEnsemble::require(FieldKind k) const {
    switch (k) {
        case FieldKind::Closed:
            if (!surface_.closed()) throw ValidationError("closed GFF requested on a surface with boundary");
            break;
        case FieldKind::Neumann:
        case FieldKind::Dirichlet:
            if (surface_.closed()) throw ValidationError(to_string(k) + " GFF requires a surface with boundary");
            break;
        case FieldKind::Cardy:
            if (surface_.closed()) throw ValidationError("Cardy GFF requires a surface with boundary");
            break;
    }
}

CovarianceLaw FieldEnsemble::law(FieldKind k) const {
    require(k);
    CovarianceLaw out;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(r(), r());
    switch (k) {
        case FieldKind::Closed: out.parts.push_back({g_[slot(GreenKind::Closed)], I}); break;
        case FieldKind::Neumann: out.parts.push_back({g_[slot(GreenKind::Neumann)], I}); break;
        case FieldKind::Dirichlet: out.parts.push_back({g_[slot(GreenKind::Dirichlet)], I}); break;
        case FieldKind::Cardy:
            if (fold_.d_N > 0) out.parts.push_back({g_[slot(GreenKind::Neumann)], fold_.p_N});
            if (fold_.d_D > 0) out.parts.push_back({g_[slot(GreenKind::Dirichlet)], fold_.p_D});
            break;
    }
    return out;
}

Eigen::MatrixXd FieldEnsemble::sample_block(FieldKind k, const StreamFamily& streams, std::uint64_t first, int count,
                                            std::uint64_t tag) const {
    require(k);
    const int nv = n(), rr = r();
    Eigen::MatrixXd out(nv, static_cast<Eigen::Index>(count) * rr);
    if (k != FieldKind::Cardy) {
        const GreenKind gk = k == FieldKind::Closed ? GreenKind::Closed
                             : k == FieldKind::Neumann ? GreenKind::Neumann
                                                       : GreenKind::Dirichlet;
        const Eigen::MatrixXd& L = L_[slot(gk)];
        const Eigen::Index m = L.cols();
        Eigen::MatrixXd Z(m, out.cols());
        for (int j = 0; j < count; ++j) {
            auto gen = streams.stream(first + j, tag);
            fill_normals(gen, Z.data() + static_cast<Eigen::Index>(j) * rr * m, m * rr);
        }
        out.noalias() = L * Z;
        return out;
    }
    // Cardy: independent a_N-valued Neumann and a_D-valued Dirichlet parts, one stream per replica.
    const Eigen::MatrixXd& LN = L_[slot(GreenKind::Neumann)];
    const Eigen::MatrixXd& LD = L_[slot(GreenKind::Dirichlet)];
    const int dN = fold_.d_N, dD = fold_.d_D;
    const Eigen::Index mN = LN.cols(), mD = LD.cols();
    Eigen::MatrixXd ZN(mN, static_cast<Eigen::Index>(count) * dN), ZD(mD, static_cast<Eigen::Index>(count) * dD);
    for (int j = 0; j < count; ++j) {
        auto gen = streams.stream(first + j, tag);
        fill_normals(gen, ZN.data() + static_cast<Eigen::Index>(j) * dN * mN, mN * dN);
        fill_normals(gen, ZD.data() + static_cast<Eigen::Index>(j) * dD * mD, mD * dD);
    }
    const Eigen::MatrixXd YN = LN * ZN;
    const Eigen::MatrixXd YD = LD * ZD;
    for (int j = 0; j < count; ++j) {
        auto blk = out.middleCols(static_cast<Eigen::Index>(j) * rr, rr);
        blk.setZero();
        if (dN > 0) blk.noalias() += YN.middleCols(static_cast<Eigen::Index>(j) * dN, dN) * U_N_.transpose();
        if (dD > 0) blk.noalias() += YD.middleCols(static_cast<Eigen::Index>(j) * dD, dD) * U_D_.transpose();
    }
    return out;
}

FieldSample FieldEnsemble::sample_one(FieldKind k, const StreamFamily& streams, std::uint64_t replica,
                                      std::uint64_t tag) const {
    return sample_block(k, streams, replica, 1, tag);
}

void for_each_sample_block(const FieldEnsemble& ens, FieldKind k, std::uint64_t seed, std::int64_t count,
                           const ExecPolicy& policy, std::uint64_t tag,
                           const std::function<void(std::int64_t, std::int64_t, const Eigen::MatrixXd&)>& fn) {
    if (count < 0) throw ValidationError("sample count must be non-negative");
    ens.require(k);
    const StreamFamily streams(seed);
    const std::int64_t n_blocks = (count + kReplicaBlock - 1) / kReplicaBlock;
    for_each_block(policy, n_blocks, [&](std::int64_t b) {
        const std::int64_t first = b * kReplicaBlock;
        const int cnt = static_cast<int>(std::min<std::int64_t>(kReplicaBlock, count - first));
        const Eigen::MatrixXd block = ens.sample_block(k, streams, static_cast<std::uint64_t>(first), cnt, tag);
        fn(b, first, block);
    });
}

std::vector<FieldSample> sample(const FieldEnsemble& ens, FieldKind k, std::int64_t count, std::uint64_t seed,
                                const ExecPolicy& policy) {
    std::vector<FieldSample> out(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
    const int r = ens.r();
    for_each_sample_block(ens, k, seed, count, policy, 0,
                          [&](std::int64_t, std::int64_t first, const Eigen::MatrixXd& block) {
                              const auto cnt = block.cols() / r;
                              for (Eigen::Index j = 0; j < cnt; ++j)
                                  out[static_cast<std::size_t>(first + j)] = block.middleCols(j * r, r);
                          });
    return out;
}

std::vector<FieldSample> sample_cardy(const FieldEnsemble& ens, std::int64_t count, std::uint64_t seed,
                                      const ExecPolicy& policy) {
    return sample(ens, FieldKind::Cardy, count, seed, policy);
}

CardyDoublingCheck cardy_doubling_covariance(const DiscreteSurface& s, const RootSystem& rs, const FoldingData& fd) {
    if (s.closed()) throw ValidationError("Cardy covariance requires a surface with boundary");
    // X^C = (X^ + tau X^ o sigma)/sqrt(2) reproduces the Cardy law only when tau is an involution.
    if (fd.tau.order > 2) throw ValidationError("doubling construction needs an involutive automorphism");
    const DoubledSurface d = double_surface(s);
    const GreenMatrix hat = green(d.closed, GreenKind::Closed);
    const GreenMatrix gn = green(s, GreenKind::Neumann);
    const GreenMatrix gd = green(s, GreenKind::Dirichlet);
    const int n = s.n_vertices, r = rs.r;
    const Eigen::MatrixXd& T = fd.tau_mat;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(r, r);
    CardyDoublingCheck out;
    out.from_double.resize(n * r, n * r);
    out.direct.resize(n * r, n * r);
    // Cov(X^(p), X^(q)) = G^(p,q) I, so the block (x,y) of T (G^ (x) I) T^T is
    // 1/2 [G^(fx,fy) I + G^(fx,sy) T^T + G^(sx,fy) T + G^(sx,sy) T T^T].
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            const int fx = d.embed_front[x], fy = d.embed_front[y];
            const int sx = d.sigma[fx], sy = d.sigma[fy];
            out.from_double.block(x * r, y * r, r, r) =
                0.5 * (hat.G(fx, fy) * I + hat.G(fx, sy) * T.transpose() + hat.G(sx, fy) * T +
                       hat.G(sx, sy) * (T * T.transpose()));
            out.direct.block(x * r, y * r, r, r) = gn.G(x, y) * fd.p_N + gd.G(x, y) * fd.p_D;
        }
    out.max_error = (out.from_double - out.direct).cwiseAbs().maxCoeff();
    return out;
}

double LinearFunctional::eval(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    double s = 0;
    for (std::size_t m = 0; m < vertices.size(); ++m) s += weights[m] * x.row(vertices[m]).dot(directions[m]);
    return s;
}

double TestFunctional::eval(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    switch (kind) {
        case TestFunctionalKind::Constant: return 1.0;
        case TestFunctionalKind::Linear: return x.row(vertex).dot(direction);
        case TestFunctionalKind::BoundedExp: return std::exp(-scale * std::exp(x.row(vertex).dot(direction)));
    }
    return 0.0;
}

GirsanovReport girsanov_check(const FieldEnsemble& ens, FieldKind k, const LinearFunctional& y,
                              const TestFunctional& f, std::int64_t n_samples, std::uint64_t seed,
                              const ExecPolicy& policy) {
    const int n = ens.n(), r = ens.r();
    if (y.vertices.size() != y.directions.size() || y.vertices.size() != y.weights.size())
        throw ValidationError("linear functional: vertices, directions and weights differ in length");
    for (std::size_t m = 0; m < y.vertices.size(); ++m) {
        if (y.vertices[m] < 0 || y.vertices[m] >= n) throw ValidationError("linear functional vertex out of range");
        if (y.directions[m].size() != r) throw ValidationError("linear functional direction has wrong dimension");
    }
    if (f.kind != TestFunctionalKind::Constant &&
        (f.vertex < 0 || f.vertex >= n || f.direction.size() != r))
        throw ValidationError("test functional vertex or direction invalid");
    if (n_samples < 2) throw ValidationError("need at least two samples");

    const CovarianceLaw law = ens.law(k);
    GirsanovReport rep;
    rep.n_samples = n_samples;
    for (std::size_t a = 0; a < y.vertices.size(); ++a)
        for (std::size_t b = 0; b < y.vertices.size(); ++b)
            rep.variance_Y += y.weights[a] * y.weights[b] *
                              law.pair(y.vertices[a], y.vertices[b], y.directions[a], y.directions[b]);
    rep.shift = Eigen::MatrixXd::Zero(n, r);
    for (int x = 0; x < n; ++x)
        for (std::size_t m = 0; m < y.vertices.size(); ++m)
            rep.shift.row(x) += y.weights[m] * law.apply(x, y.vertices[m], y.directions[m]).transpose();

    switch (f.kind) {
        case TestFunctionalKind::Constant: rep.exact = 1.0; break;
        case TestFunctionalKind::Linear: rep.exact = rep.shift.row(f.vertex).dot(f.direction); break;
        case TestFunctionalKind::BoundedExp: break;
    }

    const std::int64_t n_blocks = (n_samples + kReplicaBlock - 1) / kReplicaBlock;
    std::vector<RunningStats> lhs(static_cast<std::size_t>(n_blocks)), rhs(static_cast<std::size_t>(n_blocks));
    const double half_var = 0.5 * rep.variance_Y;
    // Distinct tags keep the two estimators independent.
    for_each_sample_block(ens, k, seed, n_samples, policy, 1,
                          [&](std::int64_t b, std::int64_t, const Eigen::MatrixXd& block) {
                              for (Eigen::Index j = 0; j < block.cols() / r; ++j) {
                                  const auto X = block.middleCols(j * r, r);
                                  lhs[b].add(std::exp(y.eval(X) - half_var) * f.eval(X));
                              }
                          });
    for_each_sample_block(ens, k, seed, n_samples, policy, 2,
                          [&](std::int64_t b, std::int64_t, const Eigen::MatrixXd& block) {
                              Eigen::MatrixXd X(n, r);
                              for (Eigen::Index j = 0; j < block.cols() / r; ++j) {
                                  X = block.middleCols(j * r, r) + rep.shift;
                                  rhs[b].add(f.eval(X));
                              }
                          });
    const RunningStats L = merge_in_order(lhs), R = merge_in_order(rhs);
    rep.tilted = L.mean;
    rep.tilted_stderr = L.stderr_mean();
    rep.shifted = R.mean;
    rep.shifted_stderr = R.stderr_mean();
    return rep;
}

void write_sample_dump(const std::string& path, const FieldEnsemble& ens, FieldKind k, std::int64_t count,
                       std::uint64_t seed, const ExecPolicy& policy) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    const std::uint64_t header[4] = {static_cast<std::uint64_t>(ens.n()), static_cast<std::uint64_t>(ens.r()),
                                     static_cast<std::uint64_t>(count), seed};
    os.write(reinterpret_cast<const char*>(header), sizeof(header));
    const int n = ens.n(), r = ens.r();
    // Generate in chunks of blocks so memory stays bounded; write in replica order.
    constexpr std::int64_t kChunkBlocks = 16;
    const std::int64_t chunk = kChunkBlocks * kReplicaBlock;
    const StreamFamily streams(seed);
    for (std::int64_t start = 0; start < count; start += chunk) {
        const std::int64_t len = std::min(chunk, count - start);
        const std::int64_t nb = (len + kReplicaBlock - 1) / kReplicaBlock;
        std::vector<Eigen::MatrixXd> blocks(static_cast<std::size_t>(nb));
        for_each_block(policy, nb, [&](std::int64_t b) {
            const std::int64_t first = start + b * kReplicaBlock;
            const int cnt = static_cast<int>(std::min<std::int64_t>(kReplicaBlock, count - first));
            blocks[b] = ens.sample_block(k, streams, static_cast<std::uint64_t>(first), cnt, 0);
        });
        std::vector<double> row_major(static_cast<std::size_t>(n) * r);
        for (const auto& blk : blocks)
            for (Eigen::Index j = 0; j < blk.cols() / r; ++j) {
                for (int v = 0; v < n; ++v)
                    for (int a = 0; a < r; ++a) row_major[static_cast<std::size_t>(v) * r + a] = blk(v, j * r + a);
                os.write(reinterpret_cast<const char*>(row_major.data()),
                         static_cast<std::streamsize>(row_major.size() * sizeof(double)));
            }
    }
    if (!os) throw IoError("write to '" + path + "' failed");
}

SampleDump read_sample_dump(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    SampleDump d;
    std::uint64_t header[4];
    if (!is.read(reinterpret_cast<char*>(header), sizeof(header))) throw IoError("truncated sample dump header");
    d.n_vertices = header[0];
    d.r = header[1];
    d.count = header[2];
    d.seed = header[3];
    d.values.resize(d.n_vertices * d.r * d.count);
    if (!is.read(reinterpret_cast<char*>(d.values.data()),
                 static_cast<std::streamsize>(d.values.size() * sizeof(double))))
        throw IoError("truncated sample dump body");
    return d;
}

}  // namespace toda

#include "toda/chaos.hpp"

#include "toda/error.hpp"
#include "toda/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

namespace toda {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_direction(const FieldEnsemble& ens, const Eigen::VectorXd& u) {
    if (u.size() != ens.r())
        throw ValidationError("chaos direction has dimension " + std::to_string(u.size()) + ", expected " +
                              std::to_string(ens.r()));
    if (!u.allFinite()) throw ValidationError("chaos direction must be finite");
}

// Coefficients of the log-divergence of <u, X> at the boundary: the coarse variance at scale r
// around a boundary point is 2 nb log(1/r); a bulk point at distance d carries an extra y log(1/d).
struct BoundaryCoefficients {
    double nb = 0;
    double y = 0;
};

BoundaryCoefficients boundary_coefficients(const FieldEnsemble& ens, FieldKind kind, const Eigen::VectorXd& u) {
    const double x = u.squaredNorm();
    switch (kind) {
        case FieldKind::Neumann: return {x, x};
        case FieldKind::Dirichlet: return {0.0, -x};
        case FieldKind::Cardy: {
            const double n = (ens.folding().p_N * u).squaredNorm();
            const double d = (ens.folding().p_D * u).squaredNorm();
            return {n, n - d};
        }
        case FieldKind::Closed: break;
    }
    return {0.0, 0.0};
}

// Largest root of nb p^2 - b p + c = 0 (the moment exponent zeta(p) - c changes sign there).
double upper_root(double nb, double b, double c) {
    if (nb <= 0) return kInf;
    const double disc = b * b - 4 * nb * c;
    if (disc < 0) return 0.0;
    return (b + std::sqrt(disc)) / (2 * nb);
}

}  // namespace

std::string to_string(ChaosRegion r) { return r == ChaosRegion::Bulk ? "bulk" : "boundary"; }
std::string to_string(ChaosMode m) { return m == ChaosMode::Raw ? "raw" : "wick"; }

ChaosRegion parse_chaos_region(const std::string& s) {
    if (s == "bulk") return ChaosRegion::Bulk;
    if (s == "boundary") return ChaosRegion::Boundary;
    throw ValidationError("unknown chaos region '" + s + "' (bulk, boundary)");
}

ChaosMode parse_chaos_mode(const std::string& s) {
    if (s == "raw") return ChaosMode::Raw;
    if (s == "wick") return ChaosMode::Wick;
    throw ValidationError("unknown chaos mode '" + s + "' (raw, wick)");
}

std::string to_string(MomentVerdict v) {
    switch (v) {
        case MomentVerdict::Finite: return "finite";
        case MomentVerdict::Divergent: return "divergent";
        case MomentVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

double boundary_norm_sq(const FieldEnsemble& ens, FieldKind kind, const Eigen::VectorXd& u) {
    check_direction(ens, u);
    if (kind == FieldKind::Cardy) return (ens.folding().p_N * u).squaredNorm();
    if (kind == FieldKind::Neumann) return u.squaredNorm();
    throw ValidationError("boundary chaos needs a Neumann or Cardy field, got " + to_string(kind));
}

ChaosKernel::ChaosKernel(const FieldEnsemble& ens, FieldKind kind, const ChaosSpec& spec,
                         const std::vector<char>& mask, const std::optional<ChaosShift>& shift)
    : u_(spec.direction) {
    check_direction(ens, u_);
    const DiscreteSurface& s = ens.surface();
    const int n = s.n_vertices;
    if (!mask.empty() && static_cast<int>(mask.size()) != n) throw ValidationError("region mask size mismatch");
    if (!spec.mesh_scale.empty()) {
        if (static_cast<int>(spec.mesh_scale.size()) != n) throw ValidationError("mesh scale needs one entry per vertex");
        for (double d : spec.mesh_scale)
            if (!(d > 0) || !std::isfinite(d)) throw ValidationError("mesh scale must be positive");
    }
    const CovarianceLaw law = ens.law(kind);
    const auto bmask = s.boundary_mask();
    Eigen::VectorXd weight;
    if (spec.region == ChaosRegion::Bulk) {
        const double x = u_.squaredNorm();
        if (x >= 4) throw ValidationError("bulk chaos is subcritical only for |u|^2 < 4, got " + std::to_string(x));
        exponent_ = x / 2;
        weight = s.areas();
        for (int v = 0; v < n; ++v)
            if (mask.empty() || mask[v]) sites_.push_back(v);
    } else {
        if (s.closed()) throw ValidationError("boundary chaos on a closed surface");
        const double nb = boundary_norm_sq(ens, kind, u_);
        if (nb >= 1)
            throw ValidationError("boundary chaos is subcritical only for |p_N u|^2 < 1, got " + std::to_string(nb));
        exponent_ = nb;
        weight = s.lengths();
        for (int v = 0; v < n; ++v)
            if (bmask[v] && (mask.empty() || mask[v])) sites_.push_back(v);
    }
    Eigen::VectorXd H = Eigen::VectorXd::Zero(n);
    if (shift) {
        if (shift->vertex < 0 || shift->vertex >= n) throw ValidationError("shift vertex out of range");
        if (shift->alpha.size() != ens.r()) throw ValidationError("shift vector has wrong dimension");
        for (int v : sites_) H[v] = u_.dot(law.apply(v, shift->vertex, shift->alpha));
    }
    const Eigen::VectorXd var = law.variance(u_);
    const std::size_t m = sites_.size();
    log_pref_.resize(m);
    ratio_.resize(m);
    var_.resize(m);
    expected_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const int v = sites_[i];
        const double delta = spec.mesh_scale.empty()
                                 ? (spec.region == ChaosRegion::Bulk ? std::sqrt(s.area(v)) : s.length(v))
                                 : spec.mesh_scale[v];
        const double log_ratio = exponent_ * std::log(delta) + 0.5 * var[v];
        var_[i] = var[v];
        ratio_[i] = std::exp(log_ratio);
        const double base = std::log(weight[v]) + H[v];
        if (spec.mode == ChaosMode::Wick) {
            log_pref_[i] = base - 0.5 * var[v];
            expected_[i] = std::exp(base);
        } else {
            log_pref_[i] = base + exponent_ * std::log(delta);
            expected_[i] = std::exp(base + log_ratio);
        }
    }
}

ChaosSample ChaosKernel::apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    ChaosSample out;
    out.sites = sites_;
    out.masses.resize(sites_.size());
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        out.masses[i] = std::exp(x.row(sites_[i]).dot(u_) + log_pref_[i]);
        out.total += out.masses[i];
    }
    return out;
}

double ChaosKernel::total(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    const Eigen::VectorXd proj = x * u_;
    double t = 0;
    for (std::size_t i = 0; i < sites_.size(); ++i) t += std::exp(proj[sites_[i]] + log_pref_[i]);
    return t;
}

double ChaosKernel::expected_total() const {
    double t = 0;
    for (double e : expected_) t += e;
    return t;
}

ChaosSample gmc_bulk(const FieldEnsemble& ens, FieldKind kind, const ChaosSpec& spec, const FieldSample& field) {
    if (spec.region != ChaosRegion::Bulk) throw ValidationError("gmc_bulk called with a boundary spec");
    return ChaosKernel(ens, kind, spec).apply(field);
}

ChaosSample gmc_boundary(const FieldEnsemble& ens, FieldKind kind, const ChaosSpec& spec, const FieldSample& field) {
    if (spec.region != ChaosRegion::Boundary) throw ValidationError("gmc_boundary called with a bulk spec");
    return ChaosKernel(ens, kind, spec).apply(field);
}

Rational raw_exponent(const RootSystem& rs, const FoldingData& fd, FieldKind kind, ChaosRegion region,
                      const RatVec& u_e) {
    if (static_cast<int>(u_e.size()) != rs.r) throw ValidationError("direction has wrong dimension");
    auto norm_sq = [&](const RatVec& v) {
        const RatVec gv = mat_vec(rs.gram, v);
        Rational s = 0;
        for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * gv[i];
        return s;
    };
    if (region == ChaosRegion::Bulk) return norm_sq(u_e) / 2;
    if (kind == FieldKind::Neumann) return norm_sq(u_e);
    if (kind == FieldKind::Cardy) return norm_sq(mat_vec(fd.p_N_e, u_e));
    throw ValidationError("boundary chaos needs a Neumann or Cardy field");
}

std::vector<double> gmc_totals(const FieldEnsemble& ens, FieldKind kind, const ChaosKernel& kernel,
                               std::int64_t count, std::uint64_t seed, const ExecPolicy& policy, std::uint64_t tag) {
    std::vector<double> out(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
    const int r = ens.r();
    for_each_sample_block(ens, kind, seed, count, policy, tag,
                          [&](std::int64_t, std::int64_t first, const Eigen::MatrixXd& block) {
                              for (Eigen::Index j = 0; j < block.cols() / r; ++j)
                                  out[static_cast<std::size_t>(first + j)] = kernel.total(block.middleCols(j * r, r));
                          });
    return out;
}

TailEstimate hill_estimate(std::vector<double> values, int k) {
    const int n = static_cast<int>(values.size());
    if (n < 12) throw ValidationError("Hill estimator needs at least 12 values");
    if (k <= 0) k = std::max(10, static_cast<int>(std::sqrt(static_cast<double>(n))));
    k = std::min(k, n - 1);
    std::partial_sort(values.begin(), values.begin() + k + 1, values.end(), std::greater<double>());
    const double ref = values[k];
    if (!(ref > 0)) throw NumericalError("Hill estimator needs positive order statistics");
    double s = 0;
    for (int i = 0; i < k; ++i) s += std::log(values[i] / ref);
    TailEstimate t;
    t.k = k;
    t.alpha = s > 0 ? k / s : kInf;
    t.band = 2 * t.alpha / std::sqrt(static_cast<double>(k));
    return t;
}

double running_mean_drift(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 16) return 0.0;
    std::vector<double> means;
    double sum = 0;
    std::size_t next = n / 16;
    for (std::size_t i = 0; i < n; ++i) {
        sum += values[i];
        if (i + 1 == next || i + 1 == n) {
            means.push_back(sum / static_cast<double>(i + 1));
            next *= 2;
        }
    }
    const double last = means.back();
    const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
    return last != 0 ? (*hi - *lo) / std::abs(last) : 0.0;
}

double shift_threshold(const Eigen::VectorXd& Q, const Eigen::VectorXd& alpha, double gamma, const Eigen::VectorXd& e) {
    return (Q - alpha).dot(2 * e / e.squaredNorm()) / gamma;
}

namespace {

// Near a boundary insertion the Neumann kernel grows like 2 log(1/r), so the weight
// exp(<u, H>) behaves like r^{-a} with a = 2 <p_N u, alpha>.
double boundary_singularity(const FieldEnsemble& ens, FieldKind kind, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& alpha) {
    const Eigen::VectorXd un = kind == FieldKind::Cardy ? Eigen::VectorXd(ens.folding().p_N * u) : u;
    return 2 * un.dot(alpha);
}

struct Thresholds {
    double window = kInf;   // moment window from the insertion bounds
    double scaling = kInf;  // sign change of the multifractal exponent
};

Thresholds thresholds(const FieldEnsemble& ens, FieldKind kind, const ChaosSpec& spec, const std::vector<char>& mask,
                      const std::optional<ChaosShift>& shift) {
    const Eigen::VectorXd& u = spec.direction;
    check_direction(ens, u);
    const double x = u.squaredNorm();
    const auto bmask = ens.surface().boundary_mask();
    const int n = ens.n();
    const bool raw = spec.mode == ChaosMode::Raw;
    bool touches = false;
    if (!ens.surface().closed() && kind != FieldKind::Closed)
        for (int v = 0; v < n; ++v)
            if (bmask[v] && (mask.empty() || mask[v])) touches = true;
    const bool shift_on_boundary = shift && bmask[shift->vertex];
    Thresholds t;
    if (x == 0) return t;
    if (spec.region == ChaosRegion::Bulk) {
        t.window = t.scaling = 4 / x;
        if (shift && !shift_on_boundary) {
            const double a = u.dot(shift->alpha);
            t.window = t.scaling = std::min(t.window, 1 + (4 - 2 * a) / x);
        }
        if (touches && kind != FieldKind::Dirichlet) {
            const auto c = boundary_coefficients(ens, kind, u);
            // Raw densities pick up d^{-y/2} near the boundary; Wick densities do not.
            const double lin = 2 + c.nb - (raw ? c.y / 2 : 0.0);
            t.window = std::min(t.window, 2 / x);
            t.scaling = std::min(t.scaling, upper_root(c.nb, lin, 1.0));
            if (shift_on_boundary) {
                const double a = boundary_singularity(ens, kind, u, shift->alpha);
                t.window = std::min(t.window, 1 + (4 - 2 * a) / x);
                t.scaling = std::min(t.scaling, c.nb > 0 ? (lin - a) / c.nb : kInf);
            }
        }
    } else {
        const double nb = boundary_norm_sq(ens, kind, u);
        if (nb == 0) return t;
        t.window = t.scaling = 1 / nb;
        if (shift_on_boundary) {
            const double a = boundary_singularity(ens, kind, u, shift->alpha);
            t.window = t.scaling = std::min(t.window, (1 - a + nb) / nb);
        }
    }
    return t;
}

}  // namespace

double predicted_threshold(const FieldEnsemble& ens, FieldKind kind, const ChaosSpec& spec,
                           const std::vector<char>& mask, const std::optional<ChaosShift>& shift) {
    return thresholds(ens, kind, spec, mask, shift).window;
}

double scaling_threshold(const FieldEnsemble& ens, FieldKind kind, const ChaosSpec& spec,
                         const std::vector<char>& mask, const std::optional<ChaosShift>& shift) {
    return thresholds(ens, kind, spec, mask, shift).scaling;
}

MomentReport moment_scan(const FieldEnsemble& ens, FieldKind kind, const ChaosSpec& spec,
                         const std::vector<char>& mask, const std::optional<ChaosShift>& shift,
                         const MomentScanOptions& opt) {
    if (opt.n_samples < 16) throw ValidationError("moment scan needs at least 16 samples");
    const ChaosKernel kernel(ens, kind, spec, mask, shift);
    const auto totals = gmc_totals(ens, kind, kernel, opt.n_samples, opt.seed, opt.exec);
    MomentReport rep;
    rep.n_samples = opt.n_samples;
    rep.mesh_level = opt.mesh_level;
    rep.expected_mass = kernel.expected_total();
    const Thresholds th = thresholds(ens, kind, spec, mask, shift);
    rep.predicted_threshold = th.window;
    rep.scaling_threshold = th.scaling;
    rep.tail = hill_estimate(totals, opt.hill_k);
    std::vector<double> powered(totals.size());
    for (double p : opt.p_grid) {
        MomentRow row;
        row.p = p;
        RunningStats st;
        for (std::size_t i = 0; i < totals.size(); ++i) {
            powered[i] = std::pow(totals[i], p);
            st.add(powered[i]);
        }
        row.estimate = st.mean;
        row.stderr_ = st.stderr_mean();
        row.drift = running_mean_drift(powered);
        // Masses are positive with a finite mean, so p <= 1 moments exist.
        if (p <= 1)
            row.verdict = MomentVerdict::Finite;
        else if (p > rep.tail.alpha + rep.tail.band)
            row.verdict = MomentVerdict::Divergent;
        else if (p < rep.tail.alpha - rep.tail.band && row.drift < 0.5)
            row.verdict = MomentVerdict::Finite;
        else
            row.verdict = MomentVerdict::Inconclusive;
        rep.rows.push_back(row);
    }
    return rep;
}

void write_moment_csv(std::ostream& os, const std::vector<MomentReport>& reports) {
    os << "p,estimate,stderr,verdict,mesh_level\n";
    os << std::setprecision(17);
    for (const auto& rep : reports)
        for (const auto& row : rep.rows)
            os << row.p << ',' << row.estimate << ',' << row.stderr_ << ',' << to_string(row.verdict) << ','
               << rep.mesh_level << '\n';
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw ValidationError("KS distance needs non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        const double t = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= t) ++i;
        while (j < b.size() && b[j] <= t) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

std::vector<double> wick_refinement_ks(const RootSystem& rs, const FoldingData& fd, const Eigen::VectorXd& u,
                                       int base, int levels, std::int64_t count, std::uint64_t seed,
                                       const ExecPolicy& policy) {
    if (base < 3 || levels < 2) throw ValidationError("refinement study needs base >= 3 and at least two levels");
    std::vector<std::vector<double>> totals;
    for (int level = 0; level < levels; ++level) {
        const int L = base << level;
        const FieldEnsemble ens(torus_surface(L, L, 1.0 / L), rs, fd);
        ChaosSpec spec;
        spec.direction = u;
        spec.mode = ChaosMode::Wick;
        const ChaosKernel kernel(ens, FieldKind::Closed, spec);
        totals.push_back(gmc_totals(ens, FieldKind::Closed, kernel, count, seed + static_cast<std::uint64_t>(level), policy));
    }
    std::vector<double> out;
    for (int level = 0; level + 1 < levels; ++level) out.push_back(ks_distance(totals[level], totals[level + 1]));
    return out;
}

}  // namespace toda

#include "toda/correlator.hpp"

#include "toda/error.hpp"
#include "toda/rng.hpp"
#include "toda/stats.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <set>

namespace toda {

namespace {

constexpr double kPi = std::numbers::pi;
// Windows stop once the log-integrand has dropped this far below its maximum.
constexpr double kDrop = 50.0;

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

Eigen::VectorXd bulk_delta_log(const DiscreteSurface& s) { return 0.5 * s.areas().array().log().matrix(); }

struct Window {
    double lo = 0, peak = 0, hi = 0, hmax = 0;
};

// Maximum of a concave function on the line: bracket by doubling steps, then Brent.
std::pair<double, double> maximize_1d(const std::function<double(double)>& h, double x0) {
    auto neg = [&](double x) { return -h(x); };
    double a = x0 - 1, b = x0 + 1;
    double ha = h(a), h0 = h(x0), hb = h(b);
    double step = 1;
    int guard = 0;
    while (ha > h0 && guard++ < 200) {
        b = x0;
        x0 = a;
        h0 = ha;
        step *= 2;
        a = x0 - step;
        ha = h(a);
    }
    while (hb > h0 && guard++ < 200) {
        a = x0;
        x0 = b;
        h0 = hb;
        step *= 2;
        b = x0 + step;
        hb = h(b);
    }
    if (guard >= 200) throw NumericalError("zero-mode integrand has no maximum (unbounded direction)");
    const auto res = boost::math::tools::brent_find_minima(neg, a, b, 50);
    return {res.first, -res.second};
}

Window find_window(const std::function<double(double)>& h, double x0, double left_floor = -1e300) {
    Window w;
    std::tie(w.peak, w.hmax) = maximize_1d(h, x0);
    double step = 1;
    w.lo = w.peak - step;
    while (h(w.lo) > w.hmax - kDrop && w.lo > left_floor) {
        step *= 2;
        w.lo = w.peak - step;
        if (step > 1e8) throw NumericalError("zero-mode integrand decays too slowly on the left");
    }
    w.lo = std::max(w.lo, left_floor);
    step = 1;
    w.hi = w.peak + step;
    while (h(w.hi) > w.hmax - kDrop) {
        step *= 2;
        w.hi = w.peak + step;
        if (step > 1e8) throw NumericalError("zero-mode integrand decays too slowly on the right");
    }
    return w;
}

// int_lo^hi f on two panels split at the peak; returns value and absolute error.
template <class F>
std::pair<cplx, double> gk_two_panels(F f, const Window& w, double rel_tol, int depth) {
    double e1 = 0, e2 = 0;
    const cplx a = GK::integrate(f, w.lo, w.peak, static_cast<unsigned>(depth), rel_tol, &e1);
    const cplx b = GK::integrate(f, w.peak, w.hi, static_cast<unsigned>(depth), rel_tol, &e2);
    return {a + b, e1 + e2};
}

ZeroModeResult finish(cplx v, double abs_err, double log_scale, std::vector<std::pair<double, double>> box) {
    ZeroModeResult r;
    const double m = std::abs(v);
    if (!(m > 0) || !std::isfinite(m)) throw NumericalError("zero-mode quadrature produced a degenerate value");
    // Store as a unit-scale mantissa; the magnitude moves into log_scale.
    r.value = v / m;
    r.log_scale = log_scale + std::log(m);
    r.rel_error = abs_err / m;
    r.box = std::move(box);
    return r;
}

}  // namespace

cplx ZeroModeResult::total() const {
    if (divergent) return {std::numeric_limits<double>::infinity(), 0.0};
    return value * std::exp(log_scale);
}

ZeroModeResult k_integral(double kappa, cplx b, double rel_tol, int max_depth) {
    if (!(kappa > 0)) throw ValidationError("K(kappa, b) needs kappa > 0");
    if (b.real() < 0) throw ValidationError("K(kappa, b) needs Re b >= 0");
    const double beta = b.real();
    auto g = [&](double t) { return kappa * t - std::exp(t) - beta * std::exp(0.5 * t); };
    // Stationary point: w^2 + (beta/2) w - kappa = 0 with w = e^{t/2}.
    const double w = 0.5 * (-0.5 * beta + std::sqrt(0.25 * beta * beta + 4 * kappa));
    const double tstar = 2 * std::log(w);
    // Left of t_series both e^{t/2} and |b| e^{t/2} are below 1e-3 and the tail is a fast series.
    const double t_series = std::min(tstar - 1, 2 * std::log(1e-3 / std::max(1.0, std::abs(b))));
    Window win = find_window(g, tstar, t_series);
    const double hmax = win.hmax;
    auto f = [&](double t) {
        return std::exp(cplx(g(t) - hmax + beta * std::exp(0.5 * t), 0.0) - b * std::exp(0.5 * t));
    };
    auto [v, err] = gk_two_panels(f, win, rel_tol, max_depth);
    if (win.lo <= t_series) {
        // exp(-w^2 - b w) = sum_n c_n w^n; int_{-inf}^T e^{kappa t} w^n dt = e^{(kappa + n/2) T} / (kappa + n/2).
        const double T = win.lo;
        constexpr int kTerms = 18;
        std::vector<cplx> mb(kTerms + 1);
        mb[0] = 1;
        for (int m = 1; m <= kTerms; ++m) mb[m] = mb[m - 1] * (-b) / static_cast<double>(m);
        cplx tail = 0;
        for (int n = 0; n <= kTerms; ++n) {
            cplx c = 0;
            double fk = 1;
            for (int k = 0; 2 * k <= n; ++k) {
                if (k > 0) fk *= -1.0 / k;
                c += fk * mb[n - 2 * k];
            }
            const double e = kappa + 0.5 * n;
            tail += c * std::exp(e * T - hmax) / e;
        }
        v += tail;
    }
    return finish(v, err, hmax, {{win.lo, win.hi}});
}

ZeroModeResult rank_one_integral(double s, double a, double m, double rel_tol) {
    if (!(s > 0 && a > 0 && m > 0)) throw ValidationError("rank-one integral needs s, a, m > 0");
    auto h = [&](double c) { return s * c - m * std::exp(a * c); };
    const double c0 = std::log(s / (a * m)) / a;
    const Window win = find_window(h, c0);
    auto f = [&](double c) { return cplx(std::exp(h(c) - win.hmax), 0.0); };
    auto [v, err] = gk_two_panels(f, win, rel_tol, 15);
    // Left of the window the potential is negligible: int_{-inf}^{lo} e^{s c} dc.
    v += std::exp(s * win.lo - win.hmax) / s;
    return finish(v, err, win.hmax, {{win.lo, win.hi}});
}

FieldKind correlator_field(const FieldEnsemble& ens) {
    return ens.surface().closed() ? FieldKind::Closed : FieldKind::Cardy;
}

namespace {

// Arc index of every boundary vertex; -1 off the boundary.
std::vector<int> arc_of_vertex(const DiscreteSurface& s, const InsertionSpec& ins, std::vector<int>* arcs_per_comp) {
    std::vector<int> arc(static_cast<std::size_t>(s.n_vertices), -1);
    std::vector<int> pos(static_cast<std::size_t>(s.n_vertices), -1), comp(static_cast<std::size_t>(s.n_vertices), -1);
    for (std::size_t n = 0; n < s.boundary.size(); ++n)
        for (std::size_t q = 0; q < s.boundary[n].size(); ++q) {
            pos[s.boundary[n][q]] = static_cast<int>(q);
            comp[s.boundary[n][q]] = static_cast<int>(n);
        }
    std::vector<std::vector<int>> starts(s.boundary.size());
    for (const auto& b : ins.boundary) starts[comp[b.vertex]].push_back(pos[b.vertex]);
    if (arcs_per_comp) arcs_per_comp->clear();
    for (std::size_t n = 0; n < s.boundary.size(); ++n) {
        const auto& st = starts[n];
        if (!std::is_sorted(st.begin(), st.end()))
            throw ValidationError("boundary insertions must be listed in curve order on each component");
        const int m = static_cast<int>(st.size());
        if (arcs_per_comp) arcs_per_comp->push_back(std::max(1, m));
        for (std::size_t q = 0; q < s.boundary[n].size(); ++q) {
            int l = m == 0 ? 0 : m - 1;  // before the first insertion: the arc wrapping round from the last
            for (int k = 0; k < m; ++k)
                if (st[k] <= static_cast<int>(q)) l = k;
            arc[s.boundary[n][q]] = l;
        }
    }
    return arc;
}

Eigen::VectorXd q_vector(const RootSystem& rs, double gamma) {
    if (!(gamma > 0.0 && gamma < std::sqrt(2.0))) throw ValidationError("coupling constant gamma must lie in (0, sqrt(2))");
    return gamma * rs.rho + (2.0 / gamma) * rs.rho_vee;
}

}  // namespace

void validate(const CorrelatorSpec& spec, const FieldEnsemble& ens) {
    const auto& s = ens.surface();
    const auto& rs = ens.root_system();
    const auto& fd = ens.folding();
    const int r = rs.r, n = s.n_vertices;
    q_vector(rs, spec.gamma);
    if (static_cast<int>(spec.mu_bulk.size()) != r)
        throw ValidationError("mu_bulk needs one constant per simple root (" + std::to_string(r) + ")");
    for (double m : spec.mu_bulk)
        if (!(m > 0) || !std::isfinite(m))
            throw ValidationError("bulk cosmological constants must be positive; the zero-mode integral needs a "
                                  "potential in every direction");
    // GMC windows: bulk |gamma e_i|^2 < 4, boundary |gamma f_j / 2|^2 < 1.
    for (int i = 0; i < r; ++i)
        if (spec.gamma * spec.gamma * rs.norms_sq[i].get_d() >= 4)
            throw ValidationError("bulk potential e_" + std::to_string(i + 1) + " is outside the subcritical window");

    const auto mask = s.boundary_mask();
    std::set<int> used;
    for (const auto& b : spec.insertions.bulk) {
        if (b.vertex < 0 || b.vertex >= n) throw ValidationError("bulk insertion vertex out of range");
        if (mask[b.vertex]) throw ValidationError("bulk insertion on boundary vertex " + std::to_string(b.vertex));
        if (b.alpha.size() != r) throw ValidationError("bulk insertion weight has wrong dimension");
        if (!used.insert(b.vertex).second) throw ValidationError("insertion vertices must be distinct");
    }
    for (const auto& b : spec.insertions.boundary) {
        if (s.closed()) throw ValidationError("boundary insertions on a closed surface");
        if (b.vertex < 0 || b.vertex >= n || !mask[b.vertex])
            throw ValidationError("boundary insertion at vertex " + std::to_string(b.vertex) + " off the boundary");
        if (b.beta.size() != r) throw ValidationError("boundary insertion weight has wrong dimension");
        if ((fd.p_D * b.beta).norm() > 1e-12 * std::max(1.0, b.beta.norm()))
            throw ValidationError("boundary insertion weight must lie in a_N");
        if (!used.insert(b.vertex).second) throw ValidationError("insertion vertices must be distinct");
    }

    if (s.closed()) {
        for (const auto& m : spec.mu_boundary)
            if (m != cplx(0, 0)) throw ValidationError("boundary cosmological constants on a closed surface");
        if (!spec.mu_arcs.empty()) throw ValidationError("boundary cosmological constants on a closed surface");
        return;
    }
    const int dn = fd.d_N;
    for (int j = 0; j < dn; ++j)
        if (spec.gamma * spec.gamma * fd.folded_norms_sq[j].get_d() >= 4)
            throw ValidationError("boundary potential f_" + std::to_string(j + 1) + " is outside the subcritical window");
    std::vector<const std::vector<cplx>*> lists;
    if (!spec.mu_boundary.empty()) {
        if (static_cast<int>(spec.mu_boundary.size()) != dn)
            throw ValidationError("mu_boundary needs one constant per folded root (" + std::to_string(dn) + ")");
        lists.push_back(&spec.mu_boundary);
    }
    std::vector<int> arcs;
    arc_of_vertex(s, spec.insertions, &arcs);
    if (!spec.mu_arcs.empty()) {
        if (spec.mu_arcs.size() != s.boundary.size())
            throw ValidationError("mu_arcs needs one entry per boundary component");
        for (std::size_t c = 0; c < arcs.size(); ++c) {
            if (static_cast<int>(spec.mu_arcs[c].size()) != arcs[c])
                throw ValidationError("mu_arcs component " + std::to_string(c) + " needs " + std::to_string(arcs[c]) +
                                      " arcs");
            for (const auto& a : spec.mu_arcs[c]) {
                if (static_cast<int>(a.size()) != dn)
                    throw ValidationError("each arc needs one constant per folded root");
                lists.push_back(&a);
            }
        }
    }
    for (const auto* l : lists)
        for (int j = 0; j < dn; ++j) {
            const cplx m = (*l)[j];
            if (!std::isfinite(m.real()) || !std::isfinite(m.imag()))
                throw ValidationError("boundary cosmological constants must be finite");
            if (m.real() < 0) throw ValidationError("boundary cosmological constants need Re mu >= 0");
            if (spec.conformal_restriction && !fd.tau.is_identity() && fd.folded_norms_sq[j] != 2 && m != cplx(0, 0))
                throw ValidationError("conformal restriction: mu_" + std::to_string(j + 1) +
                                      " must vanish because |f_j|^2 != 2");
        }
}

SeibergReport seiberg_check(const CorrelatorSpec& spec, const FieldEnsemble& ens) {
    const auto& rs = ens.root_system();
    const Eigen::VectorXd Q = q_vector(rs, spec.gamma);
    SeibergReport rep;
    rep.s_bar = -static_cast<double>(ens.surface().euler_char) * Q;
    for (const auto& b : spec.insertions.bulk) rep.s_bar += b.alpha;
    for (const auto& b : spec.insertions.boundary) rep.s_bar += 0.5 * b.beta;
    rep.verdict = true;
    for (int i = 0; i < rs.r; ++i) {
        rep.condition_1.push_back(rep.s_bar.dot(rs.co_fund_weights.row(i).transpose()));
        if (!(rep.condition_1.back() > 0)) rep.verdict = false;
    }
    auto cond2 = [&](const Eigen::VectorXd& w) {
        std::vector<double> m;
        for (int i = 0; i < rs.r; ++i) {
            m.push_back((w - Q).dot(rs.roots.row(i).transpose()));
            if (!(m.back() < 0)) rep.verdict = false;
        }
        return m;
    };
    for (const auto& b : spec.insertions.bulk) rep.condition_2_bulk.push_back(cond2(b.alpha));
    for (const auto& b : spec.insertions.boundary) rep.condition_2_boundary.push_back(cond2(b.beta));
    return rep;
}

ConformalData conformal_data(const RootSystem& rs, double gamma, const Eigen::VectorXd& alpha) {
    const Eigen::VectorXd Q = q_vector(rs, gamma);
    if (alpha.size() != rs.r) throw ValidationError("weight has wrong dimension");
    return {(0.5 * alpha).dot(Q - 0.5 * alpha), rs.r + 6 * Q.squaredNorm()};
}

Rational vertex_exponent(const RootSystem& rs, const RatVec& w_e, bool boundary) {
    if (static_cast<int>(w_e.size()) != rs.r) throw ValidationError("weight has wrong dimension");
    const RatVec gw = mat_vec(rs.gram, w_e);
    Rational n2 = 0;
    for (std::size_t i = 0; i < w_e.size(); ++i) n2 += w_e[i] * gw[i];
    return boundary ? n2 / 4 : n2 / 2;
}

GirsanovReduction girsanov_reduce(const CorrelatorSpec& spec, const FieldEnsemble& ens) {
    validate(spec, ens);
    const auto& s = ens.surface();
    const int n = ens.n(), r = ens.r();
    const CovarianceLaw law = ens.law(correlator_field(ens));
    // Y = sum <alpha_k, X(x_k)> + sum <beta_l / 2, X(s_l)>
    std::vector<int> vs;
    std::vector<Eigen::VectorXd> ws;
    for (const auto& b : spec.insertions.bulk) {
        vs.push_back(b.vertex);
        ws.push_back(b.alpha);
    }
    for (const auto& b : spec.insertions.boundary) {
        vs.push_back(b.vertex);
        ws.push_back(0.5 * b.beta);
    }
    GirsanovReduction red;
    red.s_bar = seiberg_check(spec, ens).s_bar;
    red.H = Eigen::MatrixXd::Zero(n, r);
    for (int x = 0; x < n; ++x)
        for (std::size_t k = 0; k < vs.size(); ++k) red.H.row(x) += law.apply(x, vs[k], ws[k]).transpose();
    for (std::size_t a = 0; a < vs.size(); ++a)
        for (std::size_t b = 0; b < vs.size(); ++b) red.variance_Y += law.pair(vs[a], vs[b], ws[a], ws[b]);
    red.log_C0 = 0.5 * red.variance_Y;
    const Eigen::VectorXd ld = bulk_delta_log(s);
    for (const auto& b : spec.insertions.bulk) red.log_C0 += 0.5 * b.alpha.squaredNorm() * ld[b.vertex];
    for (const auto& b : spec.insertions.boundary)
        red.log_C0 += 0.25 * b.beta.squaredNorm() * std::log(s.length(b.vertex));
    return red;
}

ZeroModeIntegral::ZeroModeIntegral(const RootSystem& rs, const FoldingData* fd, double gamma, Eigen::VectorXd s_bar,
                                   std::vector<double> mu_bulk, ZeroModeOptions opt)
    : gamma_(gamma), r_(rs.r), s_bar_(std::move(s_bar)), mu_(std::move(mu_bulk)), roots_(rs.roots), opt_(opt) {
    q_vector(rs, gamma);
    if (s_bar_.size() != r_ || static_cast<int>(mu_.size()) != r_)
        throw ValidationError("zero mode: s_bar and mu_bulk must have r entries");
    Eigen::MatrixXd f_dual;
    if (fd == nullptr) {
        d_ = r_;
        for (int i = 0; i < r_; ++i) orbits_.push_back({i});
        f_ = rs.roots;
        f_dual = rs.co_fund_weights;
    } else {
        d_ = fd->d_N;
        orbits_ = fd->orbits;
        f_ = fd->folded_roots;
        f_dual = fd->f_dual;
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(f_.transpose());
    basis_ = qr.householderQ() * Eigen::MatrixXd::Identity(r_, d_);
    const Eigen::MatrixXd gram = f_ * f_.transpose();
    log_J0_ = -d_ * std::log(gamma_) - 0.5 * std::log(gram.determinant());
    for (int j = 0; j < d_; ++j) {
        kappa_.push_back(s_bar_.dot(f_dual.row(j).transpose()) / gamma_);
        if (!(kappa_.back() > 1e-12)) divergent_ = true;
    }
    if (divergent_ && !opt_.allow_divergent)
        throw ValidationError("zero-mode integral diverges: <s_bar, f*_j> <= 0 for some folded root");
    if (!divergent_)
        for (int j = 0; j < d_; ++j) k_at_zero_.push_back(k_integral(kappa_[j], 0.0, opt_.rel_tol, opt_.max_depth));
}

ZeroModeResult ZeroModeIntegral::integrate(const Eigen::VectorXd& Z, const Eigen::VectorXcd& B) const {
    ZeroModeResult out;
    if (divergent_) {
        out.divergent = true;
        out.log_scale = std::numeric_limits<double>::infinity();
        return out;
    }
    out.value = 1.0;
    out.log_scale = log_J0_;
    for (int j = 0; j < d_; ++j) {
        double A = 0;
        for (int i : orbits_[j]) A += mu_[i] * Z[i];
        if (!(A > 0)) throw NumericalError("zero mode: non-positive bulk potential mass");
        const cplx b = B.size() ? B[j] / std::sqrt(A) : cplx(0, 0);
        const ZeroModeResult k = b == cplx(0, 0) ? k_at_zero_[j] : k_integral(kappa_[j], b, opt_.rel_tol, opt_.max_depth);
        out.value *= k.value;
        out.log_scale += k.log_scale - kappa_[j] * std::log(A);
        out.rel_error += k.rel_error;
        // Box in t_j = <gamma f_j, c>: K runs over t_j + log A_j.
        out.box.emplace_back(k.box[0].first - std::log(A), k.box[0].second - std::log(A));
    }
    return out;
}

ZeroModeResult ZeroModeIntegral::integrate_nested(const Eigen::VectorXd& Z, const Eigen::VectorXcd& B) const {
    ZeroModeResult out;
    if (divergent_) {
        out.divergent = true;
        out.log_scale = std::numeric_limits<double>::infinity();
        return out;
    }
    // h(y) = <s_bar, U y> - sum_i mu_i Z_i e^{<gamma e_i, U y>} - sum_j B_j e^{<gamma f_j, U y>/2}
    const Eigen::VectorXd s = basis_.transpose() * s_bar_;
    const Eigen::MatrixXd a = gamma_ * roots_ * basis_;       // r x d
    const Eigen::MatrixXd c = 0.5 * gamma_ * f_ * basis_;     // d x d
    std::vector<double> w(r_);
    for (int i = 0; i < r_; ++i) w[i] = mu_[i] * Z[i];
    std::vector<cplx> bj(d_, cplx(0, 0));
    for (int j = 0; j < B.size(); ++j) bj[j] = B[j];
    auto h = [&](const std::vector<double>& y) {
        Eigen::Map<const Eigen::VectorXd> yv(y.data(), d_);
        cplx v = s.dot(yv);
        const Eigen::VectorXd ay = a * yv;
        for (int i = 0; i < r_; ++i) v -= w[i] * std::exp(ay[i]);
        const Eigen::VectorXd cy = c * yv;
        for (int j = 0; j < d_; ++j)
            if (bj[j] != cplx(0, 0)) v -= bj[j] * std::exp(cy[j]);
        return v;
    };
    std::vector<double> y(d_, 0.0);
    std::vector<std::pair<double, double>> box(d_, {std::numeric_limits<double>::infinity(),
                                                    -std::numeric_limits<double>::infinity()});
    double err_sum = 0;
    // profile(k): max of Re h over y[k..d) with y[0..k) fixed.
    std::function<double(int)> profile = [&](int k) -> double {
        if (k == d_) return h(y).real();
        auto line = [&, k](double x) {
            y[k] = x;
            return profile(k + 1);
        };
        const double x0 = y[k];
        const auto m = maximize_1d(line, x0);
        y[k] = m.first;
        return m.second;
    };
    // integral over y[k..d) as (mantissa, log scale)
    std::function<std::pair<cplx, double>(int)> integ = [&](int k) -> std::pair<cplx, double> {
        if (k == d_) {
            const cplx v = h(y);
            return {std::exp(cplx(0, v.imag())), v.real()};
        }
        auto line = [&, k](double x) {
            y[k] = x;
            return profile(k + 1);
        };
        const Window win = find_window(line, y[k]);
        box[k].first = std::min(box[k].first, win.lo);
        box[k].second = std::max(box[k].second, win.hi);
        const std::vector<double> saved(y.begin(), y.end());
        auto f = [&, k](double x) {
            y[k] = x;
            const auto [m, ls] = integ(k + 1);
            return m * std::exp(ls - win.hmax);
        };
        auto [v, e] = gk_two_panels(f, win, opt_.rel_tol, opt_.max_depth);
        y = saved;
        err_sum += std::abs(v) > 0 ? e / std::abs(v) : 0.0;
        return {v, win.hmax};
    };
    const auto [v, ls] = integ(0);
    // Orthonormal coordinates on a_N: no Jacobian.
    out = finish(v, 0.0, ls, box);
    out.rel_error = err_sum;
    return out;
}

double ZeroModeIntegral::analytic(const Eigen::VectorXd& Z) const {
    if (divergent_) return std::numeric_limits<double>::infinity();
    double lv = log_J0_;
    for (int j = 0; j < d_; ++j) {
        double A = 0;
        for (int i : orbits_[j]) A += mu_[i] * Z[i];
        lv += std::lgamma(kappa_[j]) - kappa_[j] * std::log(A);
    }
    return std::exp(lv);
}

std::string to_string(ZeroModeMethod m) {
    switch (m) {
        case ZeroModeMethod::Factorized: return "factorized";
        case ZeroModeMethod::Nested: return "nested";
        case ZeroModeMethod::Analytic: return "analytic";
    }
    return "?";
}

ZeroModeMethod parse_zero_mode_method(const std::string& s) {
    if (s == "factorized") return ZeroModeMethod::Factorized;
    if (s == "nested") return ZeroModeMethod::Nested;
    if (s == "analytic") return ZeroModeMethod::Analytic;
    throw ValidationError("unknown zero-mode method '" + s + "' (factorized, nested, analytic)");
}

namespace {

// Per-vertex data turning one field sample into the masses Z_i and B_j.
struct PotentialKernel {
    Eigen::MatrixXd bulk_dir;     // r x r, rows gamma e_i
    Eigen::MatrixXd bulk_lp;      // n x r log prefactors
    std::vector<int> bverts;
    Eigen::MatrixXd bnd_dir;      // d x r, rows gamma f_j / 2
    Eigen::MatrixXd bnd_lp;       // |bverts| x d
    Eigen::MatrixXcd bnd_mu;      // |bverts| x d
    bool has_boundary = false;

    void masses(const Eigen::Ref<const Eigen::MatrixXd>& X, Eigen::VectorXd& Z, Eigen::VectorXcd& B) const {
        const Eigen::MatrixXd P = X * bulk_dir.transpose() + bulk_lp;
        Z = P.array().exp().colwise().sum().transpose();
        B = Eigen::VectorXcd::Zero(bnd_dir.rows());
        if (!has_boundary) return;
        for (std::size_t q = 0; q < bverts.size(); ++q) {
            const Eigen::VectorXd p = bnd_dir * X.row(bverts[q]).transpose();
            for (Eigen::Index j = 0; j < B.size(); ++j)
                if (bnd_mu(q, j) != cplx(0, 0)) B[j] += bnd_mu(q, j) * std::exp(p[j] + bnd_lp(q, j));
        }
    }
};

PotentialKernel make_kernel(const CorrelatorSpec& spec, const FieldEnsemble& ens, const GirsanovReduction& red) {
    const auto& s = ens.surface();
    const auto& rs = ens.root_system();
    const int n = ens.n(), r = ens.r();
    const double g = spec.gamma;
    PotentialKernel k;
    k.bulk_dir = g * rs.roots;
    const Eigen::VectorXd la = s.areas().array().log().matrix();
    k.bulk_lp.resize(n, r);
    // Raw lattice chaos: a_v delta_v^{|gamma e_i|^2 / 2} e^{<gamma e_i, X + H>}, delta_v = sqrt(a_v).
    for (int v = 0; v < n; ++v)
        for (int i = 0; i < r; ++i)
            k.bulk_lp(v, i) = la[v] + 0.25 * g * g * rs.norms_sq[i].get_d() * la[v] + k.bulk_dir.row(i).dot(red.H.row(v));
    if (s.closed()) {
        k.bnd_dir = Eigen::MatrixXd::Zero(r, r);
        return k;
    }
    const auto& fd = ens.folding();
    const int dn = fd.d_N;
    k.bnd_dir = 0.5 * g * fd.folded_roots;
    k.bverts = s.boundary_vertices();
    const std::vector<int> arc = arc_of_vertex(s, spec.insertions, nullptr);
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    for (std::size_t c = 0; c < s.boundary.size(); ++c)
        for (int v : s.boundary[c]) comp[v] = static_cast<int>(c);
    const int nb = static_cast<int>(k.bverts.size());
    k.bnd_lp.resize(nb, dn);
    k.bnd_mu = Eigen::MatrixXcd::Zero(nb, dn);
    for (int q = 0; q < nb; ++q) {
        const int v = k.bverts[q];
        const double ll = std::log(s.length(v));
        for (int j = 0; j < dn; ++j) {
            // l_v delta_v^{|gamma f_j / 2|^2} e^{<gamma f_j / 2, X + H>}, delta_v = l_v.
            k.bnd_lp(q, j) = ll + k.bnd_dir.row(j).squaredNorm() * ll + k.bnd_dir.row(j).dot(red.H.row(v));
            cplx m = spec.mu_arcs.empty() ? (spec.mu_boundary.empty() ? cplx(0, 0) : spec.mu_boundary[j])
                                          : spec.mu_arcs[comp[v]][arc[v]][j];
            k.bnd_mu(q, j) = m;
            if (m != cplx(0, 0)) k.has_boundary = true;
        }
    }
    return k;
}

ZeroModeResult evaluate(const ZeroModeIntegral& zm, ZeroModeMethod method, const Eigen::VectorXd& Z,
                        const Eigen::VectorXcd& B) {
    switch (method) {
        case ZeroModeMethod::Factorized: return zm.integrate(Z, B);
        case ZeroModeMethod::Nested: return zm.integrate_nested(Z, B);
        case ZeroModeMethod::Analytic: {
            ZeroModeResult r;
            r.value = 1.0;
            r.log_scale = std::log(zm.analytic(Z));
            return r;
        }
    }
    return {};
}

}  // namespace

Estimate estimate_correlator(const CorrelatorSpec& spec, const FieldEnsemble& ens, const EstimateOptions& opt) {
    validate(spec, ens);
    if (opt.n_samples < 2) throw ValidationError("need at least two samples");
    Estimate est;
    est.method = opt.method;
    est.n_samples = opt.n_samples;
    est.seiberg = seiberg_check(spec, ens);
    if (!est.seiberg.verdict && !spec.override_bounds)
        throw ValidationError("Seiberg bounds fail; set override_bounds to run anyway");
    const GirsanovReduction red = girsanov_reduce(spec, ens);
    est.log_C0 = red.log_C0;
    const FieldKind kind = correlator_field(ens);
    ZeroModeOptions zopt = opt.zero_mode;
    zopt.allow_divergent = spec.override_bounds;
    const ZeroModeIntegral zm(ens.root_system(), ens.surface().closed() ? nullptr : &ens.folding(), spec.gamma,
                              red.s_bar, spec.mu_bulk, zopt);
    if (zm.divergent()) {
        est.divergent = true;
        est.value = {std::numeric_limits<double>::infinity(), 0.0};
        return est;
    }
    const PotentialKernel kern = make_kernel(spec, ens, red);
    if (opt.method == ZeroModeMethod::Analytic && kern.has_boundary)
        throw ValidationError("the analytic zero-mode path needs vanishing boundary cosmological constants");
    if (opt.method == ZeroModeMethod::Nested && zm.dim() > 2)
        throw ValidationError("nested zero-mode quadrature is limited to dimension 2");

    const int r = ens.r();
    // Reference scale from replica 0 keeps the running sums near 1 whatever the worker count.
    double ref = 0;
    {
        const StreamFamily streams(opt.seed);
        const Eigen::MatrixXd X0 = ens.sample_one(kind, streams, 0, 0);
        Eigen::VectorXd Z;
        Eigen::VectorXcd B;
        kern.masses(X0, Z, B);
        ref = evaluate(zm, opt.method, Z, B).log_scale;
    }
    const std::int64_t n_blocks = (opt.n_samples + kReplicaBlock - 1) / kReplicaBlock;
    std::vector<RunningStats> re(static_cast<std::size_t>(n_blocks)), im(static_cast<std::size_t>(n_blocks));
    std::vector<double> qerr(static_cast<std::size_t>(n_blocks), 0.0);
    if (opt.keep_samples) est.samples.resize(static_cast<std::size_t>(opt.n_samples));
    for_each_sample_block(ens, kind, opt.seed, opt.n_samples, opt.exec, 0,
                          [&](std::int64_t b, std::int64_t first, const Eigen::MatrixXd& block) {
                              Eigen::VectorXd Z;
                              Eigen::VectorXcd B;
                              for (Eigen::Index j = 0; j < block.cols() / r; ++j) {
                                  kern.masses(block.middleCols(j * r, r), Z, B);
                                  const ZeroModeResult res = evaluate(zm, opt.method, Z, B);
                                  const cplx v = res.value * std::exp(res.log_scale - ref);
                                  re[b].add(v.real());
                                  im[b].add(v.imag());
                                  qerr[b] = std::max(qerr[b], res.rel_error);
                                  if (opt.keep_samples)
                                      est.samples[static_cast<std::size_t>(first + j)] =
                                          res.value * std::exp(res.log_scale + red.log_C0);
                              }
                          });
    const RunningStats R = merge_in_order(re), I = merge_in_order(im);
    const double scale = std::exp(ref + red.log_C0);
    est.value = cplx(R.mean, I.mean) * scale;
    est.stderr_re = R.stderr_mean() * scale;
    est.stderr_im = I.stderr_mean() * scale;
    est.max_quad_error = *std::max_element(qerr.begin(), qerr.end());
    return est;
}

double richardson(double coarse, double mid, double fine) {
    const double d1 = mid - coarse, d2 = fine - mid;
    const double denom = d2 - d1;
    if (std::abs(d2) >= std::abs(d1) || std::abs(denom) < 1e-300) return fine;
    return fine - d2 * d2 / denom;
}

WeylShiftReport weyl_shift_check(const DiscreteSurface& s, const RootSystem& rs, double gamma,
                                 const Eigen::VectorXd& phi, const Eigen::VectorXd& u, std::vector<int> probes) {
    validate(s);
    const int n = s.n_vertices;
    if (phi.size() != n) throw ValidationError("conformal factor needs one value per vertex");
    if (u.size() != rs.r) throw ValidationError("probe direction has wrong dimension");
    const Eigen::VectorXd Q = q_vector(rs, gamma);
    const GreenMatrix g = green(s, s.closed() ? GreenKind::Closed : GreenKind::Neumann);
    const Eigen::VectorXd a = s.areas();
    // Y = (1/4 pi) sum_v w_v <Q, X(v)>
    Eigen::VectorXd w = a.cwiseProduct(bulk_laplacian(s, phi));
    if (!s.closed()) w -= s.lengths().cwiseProduct(normal_derivative(s, phi));
    const Eigen::VectorXd Gw = g.G * w;
    WeylShiftReport rep;
    rep.variance_Y = Q.squaredNorm() / (16 * kPi * kPi) * w.dot(Gw);
    double energy = 0;
    for (const auto& e : s.edges) energy += e.c * (phi[e.v] - phi[e.w]) * (phi[e.v] - phi[e.w]);
    rep.energy_formula = Q.squaredNorm() / (8 * kPi) * energy;
    rep.variance_error = std::abs(rep.variance_Y - rep.energy_formula) / std::max(1.0, std::abs(rep.energy_formula));
    if (probes.empty())
        for (int v = 0; v < n; ++v) probes.push_back(v);
    const double mean_phi = a.dot(phi) / a.sum();
    const double qu = Q.dot(u);
    for (int x : probes) {
        if (x < 0 || x >= n) throw ValidationError("probe vertex out of range");
        rep.probes.push_back(x);
        rep.shift.push_back(qu / (4 * kPi) * Gw[x]);
        rep.shift_formula.push_back(-0.5 * qu * (phi[x] - mean_phi));
        rep.shift_error = std::max(rep.shift_error, std::abs(rep.shift.back() - rep.shift_formula.back()));
    }
    return rep;
}

namespace {

cplx complex_from_json(const nlohmann::json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
    throw ValidationError("complex constant must be a number or [re, im]");
}

Eigen::VectorXd weight_from_json(const nlohmann::json& j, const RootSystem& rs) {
    if (!j.is_array() || static_cast<int>(j.size()) != rs.r)
        throw ValidationError("weight needs " + std::to_string(rs.r) + " simple-root coefficients");
    Eigen::VectorXd c(rs.r);
    for (int i = 0; i < rs.r; ++i) c[i] = j[i].is_string() ? parse_rational(j[i].get<std::string>()).get_d() : j[i].get<double>();
    return rs.from_root_basis(c);
}

}  // namespace

CorrelatorSpec correlator_spec_from_json(const nlohmann::json& j, const RootSystem& rs) {
    CorrelatorSpec spec;
    try {
        spec.gamma = j.at("gamma").get<double>();
        spec.mu_bulk = j.at("mu_bulk").get<std::vector<double>>();
        if (j.contains("mu_boundary"))
            for (const auto& m : j["mu_boundary"]) spec.mu_boundary.push_back(complex_from_json(m));
        if (j.contains("mu_arcs"))
            for (const auto& comp : j["mu_arcs"]) {
                std::vector<std::vector<cplx>> arcs;
                for (const auto& arc : comp) {
                    std::vector<cplx> a;
                    for (const auto& m : arc) a.push_back(complex_from_json(m));
                    arcs.push_back(std::move(a));
                }
                spec.mu_arcs.push_back(std::move(arcs));
            }
        if (j.contains("bulk"))
            for (const auto& b : j["bulk"])
                spec.insertions.bulk.push_back({b.at("vertex").get<int>(), weight_from_json(b.at("weight"), rs)});
        if (j.contains("boundary"))
            for (const auto& b : j["boundary"])
                spec.insertions.boundary.push_back({b.at("vertex").get<int>(), weight_from_json(b.at("weight"), rs)});
        spec.conformal_restriction = j.value("conformal_restriction", true);
        spec.override_bounds = j.value("override_bounds", false);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("correlator spec: ") + e.what());
    }
    return spec;
}

nlohmann::json to_json(const SeibergReport& s) {
    nlohmann::json j;
    j["s_bar"] = std::vector<double>(s.s_bar.data(), s.s_bar.data() + s.s_bar.size());
    j["condition_1"] = s.condition_1;
    j["condition_2_bulk"] = s.condition_2_bulk;
    j["condition_2_boundary"] = s.condition_2_boundary;
    j["verdict"] = s.verdict;
    return j;
}

nlohmann::json to_json(const Estimate& e) {
    nlohmann::json j;
    j["value"] = e.value.real();
    j["value_imag"] = e.value.imag();
    j["stderr"] = e.stderr_re;
    j["stderr_imag"] = e.stderr_im;
    j["n_samples"] = e.n_samples;
    j["log_C0"] = e.log_C0;
    j["divergent"] = e.divergent;
    j["zero_mode"] = {{"method", to_string(e.method)}, {"max_relative_quadrature_error", e.max_quad_error}};
    j["seiberg"] = to_json(e.seiberg);
    j["convention"] = {{"normalization", "lattice-wick"},
                       {"partition_function", "omitted"},
                       {"bulk_vertex", "delta^{|alpha|^2/2} e^{<alpha, X + c>}, delta = sqrt(area)"},
                       {"boundary_vertex", "delta^{|beta|^2/4} e^{<beta/2, X + c>}, delta = boundary length"},
                       {"potentials", "raw lattice chaos"}};
    return j;
}

}  // namespace toda

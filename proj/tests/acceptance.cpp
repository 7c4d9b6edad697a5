// One line per acceptance criterion; exit status 0 iff every criterion passes.
#include "support.hpp"
#include "toda/chaos.hpp"
#include "toda/correlator.hpp"
#include "toda/error.hpp"
#include "toda/fields.hpp"
#include "toda/rootdata.hpp"
#include "toda/stats.hpp"
#include "toda/surface.hpp"
#include "toda/walg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace toda;
using toda::testing::uniform;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

FieldEnsemble make_ensemble(DiscreteSurface s, const std::string& type, const std::string& tau = "id") {
    RootSystem rs = build_root_system(parse_lie_type(type));
    FoldingData fd = fold(rs, parse_tau(rs, tau));
    return FieldEnsemble(std::move(s), std::move(rs), std::move(fd));
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

Outcome folding_table() {
    int ok = 0, total = 0;
    for (const auto& c : toda::testing::folding_table_cases()) {
        ++total;
        const RootSystem rs = build_root_system(c.type);
        const FoldingData fd = fold(rs, parse_tau(rs, c.tau));
        const bool match = fd.folded_type.name() == c.folded && fd.d_N == c.d_N &&
                           fd.kappa_sq == Rational(c.kappa_sq_num, c.kappa_sq_den);
        ok += match;
    }
    return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " table instances (all five rows)"};
}

Outcome dualities() {
    std::mt19937_64 rng(2);
    double worst = 0;
    int algebras = 0;
    for (const auto& t : toda::testing::supported_types()) {
        ++algebras;
        const RootSystem rs = build_root_system(t);
        const FoldingData fd = fold(rs, parse_tau(rs, "id"));
        for (int i = 0; i < rs.r; ++i) {
            const Eigen::VectorXd ei = rs.roots.row(i).transpose();
            const double n2 = ei.squaredNorm();
            worst = std::max(worst, std::abs(rs.rho.dot(2.0 * ei / n2) - 1.0));
            for (int j = 0; j < rs.r; ++j)
                worst = std::max(worst, std::abs(rs.co_fund_weights.row(i).dot(rs.roots.row(j)) - (i == j ? 1.0 : 0.0)));
        }
        for (int k = 0; k < 100; ++k) {
            const double g = uniform(rng, 0.05, 1.41);
            const Eigen::VectorXd Q = background_charges(rs, fd, g).Q;
            for (int i = 0; i < rs.r; ++i) {
                const Eigen::VectorXd ei = rs.roots.row(i).transpose();
                const double expect = g * ei.squaredNorm() / 2 + 2 / g;
                worst = std::max(worst, std::abs(Q.dot(ei) - expect) / std::max(1.0, std::abs(expect)));
            }
        }
    }
    return {worst <= 1e-12, std::to_string(algebras) + " algebras x 100 gamma, max error " + fmt(worst)};
}

Outcome doubling_identity() {
    std::mt19937_64 rng(3);
    std::vector<DiscreteSurface> family;
    while (family.size() < 30) {
        const int k = static_cast<int>(family.size());
        const int a = 3 + static_cast<int>(rng() % 6), b = 3 + static_cast<int>(rng() % 6);
        switch (k % 4) {
            case 0: family.push_back(random_triangulation(a, b, rng)); break;
            case 1: family.push_back(grid_surface(a, b, uniform(rng, 0.1, 1.0))); break;
            case 2: family.push_back(annulus_surface(3 + static_cast<int>(rng() % 3), 4 + static_cast<int>(rng() % 6))); break;
            default: family.push_back(path_surface(a + b)); break;
        }
    }
    double worst = 0;
    for (const auto& s : family) {
        const GreenPair pair = green_from_double(s);
        worst = std::max(worst, (pair.neumann.G - green(s, GreenKind::Neumann).G).cwiseAbs().maxCoeff());
        worst = std::max(worst, (pair.dirichlet.G - green(s, GreenKind::Dirichlet).G).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-10, std::to_string(family.size()) + " bordered surfaces, max error " + fmt(worst)};
}

Outcome cardy_covariance() {
    std::mt19937_64 rng(4);
    double worst = 0;
    int checks = 0;
    for (const char* t : {"A2", "A3", "D4", "E6"}) {
        const RootSystem rs = build_root_system(parse_lie_type(t));
        const FoldingData fd = fold(rs, parse_tau(rs, "swap"));
        for (const auto& s : {grid_surface(4, 3), random_triangulation(4, 4, rng), annulus_surface(3, 6)}) {
            worst = std::max(worst, cardy_doubling_covariance(s, rs, fd).max_error);
            ++checks;
        }
    }
    return {worst <= 1e-10, std::to_string(checks) + " (algebra, surface) pairs, max error " + fmt(worst)};
}

Outcome gff_statistics() {
    const std::int64_t N = 100000;
    std::mt19937_64 rng(5);
    const auto closed = make_ensemble(torus_surface(10, 10), "A2");
    const auto bordered = make_ensemble(grid_surface(10, 10), "A2", "swap");
    struct Case {
        const FieldEnsemble* ens;
        FieldKind kind;
    };
    int inside = 0, total = 0;
    double worst = 0;
    for (Case c : {Case{&closed, FieldKind::Closed}, Case{&bordered, FieldKind::Neumann},
                   Case{&bordered, FieldKind::Dirichlet}, Case{&bordered, FieldKind::Cardy}}) {
        const int r = c.ens->r();
        struct Probe {
            int x, y;
            Eigen::VectorXd u, v;
            double exact;
        };
        const CovarianceLaw law = c.ens->law(c.kind);
        std::vector<Probe> probes;
        std::uniform_int_distribution<int> vert(0, c.ens->n() - 1);
        for (int k = 0; k < 20; ++k) {
            Probe p{vert(rng), vert(rng), toda::testing::random_vector(rng, r), toda::testing::random_vector(rng, r), 0};
            p.exact = law.pair(p.x, p.y, p.u, p.v);
            probes.push_back(p);
        }
        const std::int64_t n_blocks = (N + kReplicaBlock - 1) / kReplicaBlock;
        std::vector<std::vector<RunningStats>> parts(static_cast<std::size_t>(n_blocks), std::vector<RunningStats>(probes.size()));
        for_each_sample_block(*c.ens, c.kind, 55, N, ExecPolicy{}, 0,
                              [&](std::int64_t b, std::int64_t, const Eigen::MatrixXd& block) {
                                  auto& acc = parts[static_cast<std::size_t>(b)];
                                  const Eigen::Index reps = block.cols() / r;
                                  for (Eigen::Index j = 0; j < reps; ++j)
                                      for (std::size_t k = 0; k < probes.size(); ++k) {
                                          const double a = block.block(probes[k].x, j * r, 1, r).row(0).dot(probes[k].u);
                                          const double bb = block.block(probes[k].y, j * r, 1, r).row(0).dot(probes[k].v);
                                          acc[k].add(a * bb);
                                      }
                              });
        for (std::size_t k = 0; k < probes.size(); ++k) {
            RunningStats st;
            for (const auto& part : parts) st.merge(part[k]);
            const double dev = std::abs(st.mean - probes[k].exact);
            // A Dirichlet probe on the boundary is an exact zero.
            const double z = st.stderr_mean() > 0 ? dev / st.stderr_mean() : (dev == 0 ? 0.0 : INFINITY);
            worst = std::max(worst, z);
            inside += z <= 3;
            ++total;
        }
    }
    return {inside == total, std::to_string(inside) + "/" + std::to_string(total) + " probes within 3 SE (4 kinds), max z " + fmt(worst)};
}

Outcome gmc_identities() {
    const std::int64_t N = 100000;
    const auto torus = make_ensemble(torus_surface(8, 8, 0.25), "A2");
    const auto disk = make_ensemble(grid_surface(8, 8, 0.25), "A2", "swap");
    const Eigen::VectorXd u = 0.8 * torus.root_system().roots.row(0).transpose();
    struct Case {
        const FieldEnsemble* ens;
        FieldKind kind;
        ChaosRegion region;
        Eigen::VectorXd u;
    };
    const std::vector<Case> cases = {{&torus, FieldKind::Closed, ChaosRegion::Bulk, u},
                                     {&disk, FieldKind::Neumann, ChaosRegion::Bulk, u},
                                     {&disk, FieldKind::Dirichlet, ChaosRegion::Bulk, u},
                                     {&disk, FieldKind::Cardy, ChaosRegion::Bulk, u},
                                     {&disk, FieldKind::Cardy, ChaosRegion::Boundary, 0.6 * u},
                                     {&disk, FieldKind::Neumann, ChaosRegion::Boundary, 0.5 * u}};
    int inside = 0, total = 0, ratio_bad = 0;
    double worst_z = 0;
    std::uint64_t seed = 60;
    for (const auto& c : cases) {
        for (ChaosMode mode : {ChaosMode::Wick, ChaosMode::Raw}) {
            ChaosSpec spec;
            spec.direction = c.u;
            spec.region = c.region;
            spec.mode = mode;
            const ChaosKernel k(*c.ens, c.kind, spec);
            RunningStats st;
            for (double t : gmc_totals(*c.ens, c.kind, k, N, ++seed)) st.add(t);
            const double z = std::abs(st.mean - k.expected_total()) / st.stderr_mean();
            worst_z = std::max(worst_z, z);
            inside += z <= 3;
            ++total;
        }
        // Per-sample Raw/Wick ratio is the deterministic factor delta^exponent exp(Var/2).
        ChaosSpec sw{c.u, c.region, ChaosMode::Wick, {}}, sr{c.u, c.region, ChaosMode::Raw, {}};
        const ChaosKernel wick(*c.ens, c.kind, sw), raw(*c.ens, c.kind, sr);
        const Eigen::VectorXd var = c.ens->law(c.kind).variance(c.u);
        for (const auto& X : sample(*c.ens, c.kind, 200, seed + 100)) {
            const auto a = raw.apply(X), b = wick.apply(X);
            for (std::size_t i = 0; i < a.masses.size(); ++i) {
                const int v = raw.sites()[i];
                const double delta = c.region == ChaosRegion::Bulk ? std::sqrt(c.ens->surface().area(v)) : c.ens->surface().length(v);
                const double factor = std::pow(delta, raw.exponent()) * std::exp(0.5 * var[v]);
                if (std::abs(a.masses[i] / b.masses[i] - factor) > 1e-12 * factor) ++ratio_bad;
            }
        }
    }
    return {inside == total && ratio_bad == 0,
            std::to_string(inside) + "/" + std::to_string(total) + " means within 3 SE (max z " + fmt(worst_z) +
                "), " + std::to_string(ratio_bad) + " Raw/Wick ratio mismatches"};
}

Outcome girsanov() {
    const std::int64_t N = 100000;
    const auto ens = make_ensemble(grid_surface(6, 6), "A2", "swap");
    LinearFunctional y;
    y.vertices = {14, 21, 8};
    y.directions = {Eigen::Vector2d(0.4, -0.1), Eigen::Vector2d(0.2, 0.3), Eigen::Vector2d(-0.3, 0.1)};
    y.weights = {1.0, 0.7, 0.5};
    int ok = 0, total = 0;
    double worst = 0;
    std::uint64_t seed = 70;
    for (FieldKind k : {FieldKind::Neumann, FieldKind::Cardy}) {
        const std::vector<TestFunctional> fs = {
            TestFunctional{},
            TestFunctional{TestFunctionalKind::Linear, 15, Eigen::Vector2d(1.0, 0.5), 1.0},
            TestFunctional{TestFunctionalKind::BoundedExp, 20, Eigen::Vector2d(0.6, -0.4), 0.8}};
        for (const auto& f : fs) {
            const auto r = girsanov_check(ens, k, y, f, N, ++seed);
            const double se = std::hypot(r.tilted_stderr, r.shifted_stderr);
            double z = se > 0 ? std::abs(r.tilted - r.shifted) / se : (r.tilted == r.shifted ? 0.0 : INFINITY);
            if (r.exact) {
                if (r.tilted_stderr > 0) z = std::max(z, std::abs(r.tilted - *r.exact) / r.tilted_stderr);
                if (r.shifted_stderr > 0) z = std::max(z, std::abs(r.shifted - *r.exact) / r.shifted_stderr);
            }
            worst = std::max(worst, z);
            ok += z <= 3;
            ++total;
        }
    }
    return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " (field, functional) pairs within 3 SE, max z " + fmt(worst)};
}

Outcome weyl_shift() {
    std::mt19937_64 rng(8);
    const char* types[] = {"A2", "B2", "G2", "A1", "D4"};
    double worst = 0;
    for (int k = 0; k < 10; ++k) {
        DiscreteSurface s;
        switch (k % 5) {
            case 0: s = torus_surface(5, 6, 0.2); break;
            case 1: s = grid_surface(6, 5, 0.3); break;
            case 2: s = annulus_surface(3, 8); break;
            case 3: s = random_triangulation(5, 5, rng); break;
            default: s = random_triangulation(5, 5, rng, true); break;
        }
        const RootSystem rs = build_root_system(parse_lie_type(types[k % 5]));
        Eigen::VectorXd phi(s.n_vertices);
        for (int v = 0; v < s.n_vertices; ++v) phi[v] = uniform(rng, -0.5, 0.5);
        const Eigen::VectorXd u = toda::testing::random_vector(rng, rs.r);
        const auto rep = weyl_shift_check(s, rs, uniform(rng, 0.3, 1.4), phi, u);
        worst = std::max({worst, rep.variance_error, rep.shift_error});
    }
    return {worst <= 1e-10, "10 (surface, phi) pairs, max error " + fmt(worst)};
}

// Compliant draws: A1/A2 on 6x6 tori (chi 0) or grids (chi 1, Neumann or A2 swap),
// gamma in [0.5, 1.1], 1-3 bulk weights near multiples of Q, zero-mode exponents at most 2.5.
CorrelatorSpec draw_compliant(std::mt19937_64& rng, const FieldEnsemble& ens, bool with_boundary_mu) {
    const RootSystem& rs = ens.root_system();
    const DiscreteSurface& s = ens.surface();
    std::vector<int> interior;
    const auto mask = s.boundary_mask();
    for (int v = 0; v < s.n_vertices; ++v)
        if (!mask[v]) interior.push_back(v);
    CorrelatorSpec sp;
    for (int attempt = 0; attempt < 10000; ++attempt) {
        sp = CorrelatorSpec{};
        sp.gamma = uniform(rng, 0.5, 1.1);
        for (int i = 0; i < rs.r; ++i) sp.mu_bulk.push_back(uniform(rng, 0.5, 2.0));
        if (!s.closed()) {
            sp.mu_boundary.assign(static_cast<std::size_t>(ens.folding().d_N), cplx(0, 0));
            if (with_boundary_mu)
                for (auto& m : sp.mu_boundary) m = uniform(rng, 0.2, 1.0);
        }
        const Eigen::VectorXd Q = sp.gamma * rs.rho + (2.0 / sp.gamma) * rs.rho_vee;
        std::vector<int> verts = interior;
        std::shuffle(verts.begin(), verts.end(), rng);
        const int m = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXd a = uniform(rng, 0.2, 0.8) * Q;
            for (int j = 0; j < rs.r; ++j) a += uniform(rng, -0.2, 0.2) * rs.roots.row(j).transpose();
            // Cardy weights must lie in a_N only at the boundary; bulk weights are unrestricted.
            sp.insertions.bulk.push_back({verts[static_cast<std::size_t>(i)], a});
        }
        const SeibergReport rep = seiberg_check(sp, ens);
        if (!rep.verdict) continue;
        double kmax = 0;
        for (double c : rep.condition_1) kmax = std::max(kmax, c / sp.gamma);
        if (kmax <= 2.5) return sp;
    }
    throw NumericalError("no compliant spec drawn");
}

Outcome seiberg_engine() {
    std::mt19937_64 rng(9);
    // Violations: s_bar in a_N with a non-positive coweight pairing.
    int flagged = 0;
    for (int k = 0; k < 100; ++k) {
        const bool a2 = k % 2;
        const bool cardy = a2 && k % 4 == 3;
        DiscreteSurface s = cardy ? grid_surface(5, 5, 0.25) : torus_surface(5, 5, 0.2);
        s.euler_char = cardy ? 1 : 0;
        const auto ens = make_ensemble(s, a2 ? "A2" : "A1", cardy ? "swap" : "id");
        const RootSystem& rs = ens.root_system();
        CorrelatorSpec sp;
        sp.gamma = uniform(rng, 0.5, 1.4);
        sp.mu_bulk.assign(static_cast<std::size_t>(rs.r), 1.0);
        if (!s.closed()) sp.mu_boundary.assign(static_cast<std::size_t>(ens.folding().d_N), cplx(0, 0));
        // <s_bar, omega_i^vee> = x_i; equal coordinates keep s_bar tau-invariant.
        Eigen::VectorXd x(rs.r);
        for (int i = 0; i < rs.r; ++i) x[i] = uniform(rng, 0.1, 3.0);
        const int bad = static_cast<int>(rng() % rs.r);
        x[bad] = -uniform(rng, 0.0, 2.0);
        if (cardy) x.setConstant(x[bad]);
        const Eigen::VectorXd sbar = rs.roots.transpose() * x;
        const Eigen::VectorXd Q = sp.gamma * rs.rho + (2.0 / sp.gamma) * rs.rho_vee;
        sp.insertions.bulk.push_back({12, sbar + s.euler_char * Q});
        sp.override_bounds = true;
        EstimateOptions opt;
        opt.n_samples = 32;
        opt.seed = 900 + static_cast<std::uint64_t>(k);
        opt.zero_mode.allow_divergent = true;
        const Estimate e = estimate_correlator(sp, ens, opt);
        flagged += e.divergent && !e.seiberg.verdict;
    }
    // Compliant draws: finite estimates within 10 percent at 1e5 samples.
    int finite = 0;
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        const bool a2 = k % 2;
        const int shape = (k / 2) % 3;
        DiscreteSurface s = shape == 0 ? torus_surface(6, 6, 1.0 / 6) : grid_surface(6, 6, 0.2);
        s.euler_char = shape == 0 ? 0 : 1;
        const std::string tau = a2 && shape == 2 ? "swap" : "id";
        const auto ens = make_ensemble(s, a2 ? "A2" : "A1", tau);
        const CorrelatorSpec sp = draw_compliant(rng, ens, tau == "id");
        EstimateOptions opt;
        opt.n_samples = 100000;
        opt.seed = 1000 + static_cast<std::uint64_t>(k);
        const Estimate e = estimate_correlator(sp, ens, opt);
        const double rel = e.stderr_re / std::abs(e.value.real());
        const bool ok = std::isfinite(e.value.real()) && e.value.real() > 0 && !e.divergent && rel < 0.10;
        finite += ok;
        worst = std::max(worst, rel);
    }
    return {flagged == 100 && finite == 100,
            std::to_string(flagged) + "/100 violations flagged, " + std::to_string(finite) +
                "/100 compliant finite, worst stderr/value " + fmt(worst)};
}

Outcome rank_one() {
    const double triples[10][3] = {{1.3, 2.1, 0.7}, {0.2, 0.5, 0.01}, {5.0, 0.5, 30.0}, {2.0, 1.0, 1.0},
                                   {0.7, 3.0, 100.0}, {0.05, 1.4, 2.0}, {3.3, 2.8, 0.001}, {9.0, 1.2, 5.0},
                                   {0.9, 0.3, 0.2}, {1.0, 2.0, 50.0}};
    double worst_q = 0;
    for (const auto& t : triples) {
        const auto r = rank_one_integral(t[0], t[1], t[2]);
        const double exact = -std::log(t[1]) - (t[0] / t[1]) * std::log(t[2]) + toda::testing::ln_gamma_oracle(t[0] / t[1]);
        const double got = std::log(std::abs(r.value)) + r.log_scale;
        worst_q = std::max(worst_q, std::abs(std::expm1(got - exact)));
    }
    std::mt19937_64 rng(10);
    int agree = 0;
    double worst_z = 0;
    for (int k = 0; k < 10; ++k) {
        DiscreteSurface s = torus_surface(6, 6, 1.0 / 6);
        s.euler_char = k % 2 ? 0 : -2;
        const auto ens = make_ensemble(s, "A1");
        const RootSystem& rs = ens.root_system();
        CorrelatorSpec sp;
        sp.gamma = uniform(rng, 0.6, 1.3);
        sp.mu_bulk = {uniform(rng, 0.5, 2.0)};
        const Eigen::VectorXd Q = sp.gamma * rs.rho + (2.0 / sp.gamma) * rs.rho_vee;
        sp.insertions.bulk.push_back({static_cast<int>(rng() % 36), uniform(rng, 0.3, 0.8) * Q});
        EstimateOptions opt;
        opt.n_samples = 20000;
        opt.seed = 300 + 2 * static_cast<std::uint64_t>(k);
        const Estimate quad = estimate_correlator(sp, ens, opt);
        opt.method = ZeroModeMethod::Analytic;
        opt.seed += 1;
        const Estimate ana = estimate_correlator(sp, ens, opt);
        const double z = std::abs(quad.value.real() - ana.value.real()) / std::hypot(quad.stderr_re, ana.stderr_re);
        worst_z = std::max(worst_z, z);
        agree += z <= 3;
    }
    return {worst_q <= 1e-6 && agree == 10, "quadrature vs Gamma max rel " + fmt(worst_q) + ", " + std::to_string(agree) +
                                                "/10 estimator pairs within 3 SE (max z " + fmt(worst_z) + ")"};
}

Outcome conformal_weights() {
    std::mt19937_64 rng(11);
    double worst = 0;
    for (const auto& t : toda::testing::supported_types()) {
        const RootSystem rs = build_root_system(t);
        for (int k = 0; k < 50; ++k) {
            const double g = uniform(rng, 0.05, 1.41);
            for (int i = 0; i < rs.r; ++i)
                worst = std::max(worst, std::abs(conformal_data(rs, g, g * rs.roots.row(i).transpose()).delta - 1.0));
        }
    }
    return {worst <= 1e-12, "all supported algebras x 50 gamma, max error " + fmt(worst)};
}

Outcome w_parity() {
    bool ok = true;
    std::ostringstream os;
    for (int n = 3; n <= 5; ++n) {
        const RootSystem rs = build_root_system({Family::A, n - 1});
        const OuterAut tau = parse_tau(rs, "swap");
        const ParityResult res = parity_correct(miura_currents(n), rs, tau);
        os << "sl" << n << " [";
        for (std::size_t k = 0; k < res.currents.size(); ++k) {
            const int s = res.currents[k].spin;
            const int expect = s % 2 == 0 ? 1 : -1;
            ok &= res.signs[k] == expect;
            ok &= apply_tau(res.currents[k].poly, tau) == res.currents[k].poly * QPoly(Rational(res.signs[k]));
            os << (k ? " " : "") << (res.signs[k] > 0 ? "+" : "-");
        }
        os << "] ";
    }
    int inv = 0, rows = 0;
    for (const auto& c : toda::testing::folding_table_cases()) {
        const RootSystem rs = build_root_system(c.type);
        const Current st = stress_tensor(rs);
        inv += apply_tau(st, parse_tau(rs, c.tau)).poly == st.poly;
        ++rows;
    }
    ok &= inv == rows;
    os << "stress tensor invariant " << inv << "/" << rows;
    return {ok, os.str()};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"folding table", folding_table},
        {"root-data dualities", dualities},
        {"doubling identity", doubling_identity},
        {"Cardy covariance", cardy_covariance},
        {"GFF sampler statistics", gff_statistics},
        {"GMC expected masses", gmc_identities},
        {"Girsanov identity", girsanov},
        {"Weyl-shift identities", weyl_shift},
        {"Seiberg engine", seiberg_engine},
        {"rank-one Gamma oracle", rank_one},
        {"conformal weight of gamma e_i", conformal_weights},
        {"W-current parity", w_parity},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::printf("%s %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(), sec);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}

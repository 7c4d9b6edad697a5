#include "doctest.h"
#include "support.hpp"
#include "toda/error.hpp"
#include "toda/fields.hpp"
#include "toda/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace toda;

namespace {

FieldEnsemble make_ensemble(DiscreteSurface s, const std::string& type, const std::string& tau = "id") {
    RootSystem rs = build_root_system(parse_lie_type(type));
    FoldingData fd = fold(rs, parse_tau(rs, tau));
    return FieldEnsemble(std::move(s), std::move(rs), std::move(fd));
}

struct Probe {
    int x, y;
    Eigen::VectorXd u, v;
};

std::vector<Probe> random_probes(std::mt19937_64& rng, int n, int r, int count) {
    std::uniform_int_distribution<int> vert(0, n - 1);
    std::vector<Probe> out;
    for (int k = 0; k < count; ++k)
        out.push_back({vert(rng), vert(rng), toda::testing::random_vector(rng, r), toda::testing::random_vector(rng, r)});
    return out;
}

// |z| of the empirical mean of <u,X(x)><v,X(y)> against the exact value, one per probe.
std::vector<double> probe_z(const std::vector<FieldSample>& xs, const std::vector<Probe>& probes,
                            const std::function<double(const Probe&)>& exact) {
    std::vector<double> z;
    for (const auto& p : probes) {
        RunningStats st;
        for (const auto& X : xs) st.add(X.row(p.x).dot(p.u) * X.row(p.y).dot(p.v));
        const double dev = std::abs(st.mean - exact(p));
        // Boundary probes of a Dirichlet field are deterministic zeros.
        z.push_back(st.stderr_mean() > 0 ? dev / st.stderr_mean() : (dev == 0 ? 0.0 : INFINITY));
    }
    return z;
}

}  // namespace

TEST_CASE("fields: factor reproduces each Green matrix") {
    std::mt19937_64 rng(11);
    auto ens = make_ensemble(random_triangulation(5, 6, rng), "A3", "swap");
    for (GreenKind k : {GreenKind::Neumann, GreenKind::Dirichlet}) {
        const auto& L = ens.factor(k);
        CHECK((L * L.transpose() - ens.green(k).G).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(ens.factor_error(k) <= 1e-10);
    }
    CHECK_FALSE(ens.has(GreenKind::Closed));
    CHECK_THROWS_AS(ens.green(GreenKind::Closed), ValidationError);
    const auto& LD = ens.factor(GreenKind::Dirichlet);
    for (int v : ens.surface().boundary_vertices()) CHECK(LD.row(v).cwiseAbs().maxCoeff() == 0.0);

    auto torus = make_ensemble(torus_surface(5, 4), "G2");
    const auto& L = torus.factor(GreenKind::Closed);
    CHECK((L * L.transpose() - torus.green(GreenKind::Closed).G).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("fields: sampling map has the exact covariance") {
    // X = L_N Z_N U_N^T + L_D Z_D U_D^T, so Cov(vec X) = G^N (x) U_N U_N^T + G^D (x) U_D U_D^T.
    for (const char* spec : {"A2:swap", "A3:swap", "D4:swap", "D4:triality", "E6:swap", "B3:id"}) {
        const std::string s = spec;
        const auto colon = s.find(':');
        auto ens = make_ensemble(grid_surface(4, 5), s.substr(0, colon), s.substr(colon + 1));
        const auto& fd = ens.folding();
        const auto& UN = ens.basis_N();
        const auto& UD = ens.basis_D();
        CHECK(UN.cols() == fd.d_N);
        CHECK(UD.cols() == fd.d_D);
        CHECK((UN.transpose() * UN - Eigen::MatrixXd::Identity(fd.d_N, fd.d_N)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((UN * UN.transpose() - fd.p_N).cwiseAbs().maxCoeff() < 1e-12);
        if (fd.d_D > 0) CHECK((UD * UD.transpose() - fd.p_D).cwiseAbs().maxCoeff() < 1e-12);
        const auto& LN = ens.factor(GreenKind::Neumann);
        const auto& LD = ens.factor(GreenKind::Dirichlet);
        const Eigen::MatrixXd covN = LN * LN.transpose();
        const Eigen::MatrixXd covD = LD * LD.transpose();
        // Projected parts of the Cardy law.
        const auto law = ens.law(FieldKind::Cardy);
        std::mt19937_64 rng(5);
        for (int k = 0; k < 20; ++k) {
            auto p = random_probes(rng, ens.n(), ens.r(), 1).front();
            const double via_map = covN(p.x, p.y) * p.u.dot(UN * (UN.transpose() * p.v)) +
                                   (fd.d_D ? covD(p.x, p.y) * p.u.dot(UD * (UD.transpose() * p.v)) : 0.0);
            const double expected = ens.green(GreenKind::Neumann).G(p.x, p.y) * (fd.p_N * p.u).dot(fd.p_N * p.v) +
                                    ens.green(GreenKind::Dirichlet).G(p.x, p.y) * (fd.p_D * p.u).dot(fd.p_D * p.v);
            CHECK(std::abs(via_map - expected) < 1e-10);
            CHECK(std::abs(law.pair(p.x, p.y, p.u, p.v) - expected) < 1e-10);
        }
    }
}

TEST_CASE("fields: empirical covariance matches the Green matrix") {
    const std::int64_t N = 20000;
    std::mt19937_64 rng(2024);
    auto bordered = make_ensemble(grid_surface(6, 6), "A2", "swap");
    auto closed = make_ensemble(torus_surface(6, 6), "A2");
    struct Case {
        const FieldEnsemble* ens;
        FieldKind kind;
    };
    for (Case c : {Case{&closed, FieldKind::Closed}, Case{&bordered, FieldKind::Neumann},
                   Case{&bordered, FieldKind::Dirichlet}, Case{&bordered, FieldKind::Cardy}}) {
        CAPTURE(to_string(c.kind));
        const auto xs = sample(*c.ens, c.kind, N, 77);
        REQUIRE(xs.size() == static_cast<std::size_t>(N));
        const auto probes = random_probes(rng, c.ens->n(), c.ens->r(), 10);
        const FoldingData& fd = c.ens->folding();
        auto exact = [&](const Probe& p) {
            switch (c.kind) {
                case FieldKind::Closed: return p.u.dot(p.v) * c.ens->green(GreenKind::Closed).G(p.x, p.y);
                case FieldKind::Neumann: return p.u.dot(p.v) * c.ens->green(GreenKind::Neumann).G(p.x, p.y);
                case FieldKind::Dirichlet: return p.u.dot(p.v) * c.ens->green(GreenKind::Dirichlet).G(p.x, p.y);
                case FieldKind::Cardy:
                    return (fd.p_N * p.u).dot(fd.p_N * p.v) * c.ens->green(GreenKind::Neumann).G(p.x, p.y) +
                           (fd.p_D * p.u).dot(fd.p_D * p.v) * c.ens->green(GreenKind::Dirichlet).G(p.x, p.y);
            }
            return 0.0;
        };
        // 40 probes in total: one 3 SE excursion is expected at a rate near 10%, so allow
        // a single one and bound everything at 4 SE.
        const auto z = probe_z(xs, probes, exact);
        CHECK(std::count_if(z.begin(), z.end(), [](double t) { return t > 3; }) <= 1);
        CHECK(*std::max_element(z.begin(), z.end()) <= 4);

        // Centered: every entry's mean within 3 SE, allowing the expected ~0.3% of entries to miss.
        int miss = 0, total = 0;
        for (int v = 0; v < c.ens->n(); ++v)
            for (int a = 0; a < c.ens->r(); ++a) {
                RunningStats st;
                for (const auto& X : xs) st.add(X(v, a));
                if (st.stderr_mean() == 0.0) {
                    CHECK(st.mean == 0.0);
                    continue;
                }
                ++total;
                if (std::abs(st.mean) > 3 * st.stderr_mean()) ++miss;
            }
        CHECK(miss <= std::max(2, total / 100));
    }
}

TEST_CASE("fields: boundary behaviour of Dirichlet and Cardy samples") {
    auto ens = make_ensemble(grid_surface(5, 4), "E6", "swap");
    const auto bv = ens.surface().boundary_vertices();
    for (const auto& X : sample(ens, FieldKind::Dirichlet, 50, 3))
        for (int v : bv) CHECK(X.row(v).cwiseAbs().maxCoeff() == 0.0);
    const auto& pD = ens.folding().p_D;
    for (const auto& X : sample_cardy(ens, 50, 3))
        for (int v : bv) CHECK((pD * X.row(v).transpose()).norm() < 1e-13);
}

TEST_CASE("fields: Cardy with trivial automorphism is the Neumann field") {
    auto ens = make_ensemble(annulus_surface(3, 8), "B2");
    CHECK(ens.folding().d_D == 0);
    const auto a = sample_cardy(ens, 300, 42);
    const auto b = sample(ens, FieldKind::Neumann, 300, 42);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("fields: Cardy covariance through the double") {
    std::mt19937_64 rng(8);
    for (const char* spec : {"A2:swap", "A3:swap", "D4:swap", "E6:swap", "A4:id", "D5:swap"}) {
        const std::string s = spec;
        const auto colon = s.find(':');
        RootSystem rs = build_root_system(parse_lie_type(s.substr(0, colon)));
        FoldingData fd = fold(rs, parse_tau(rs, s.substr(colon + 1)));
        for (int k = 0; k < 3; ++k) {
            DiscreteSurface surf = k == 0 ? grid_surface(4, 3) : k == 1 ? random_triangulation(4, 5, rng) : path_surface(6);
            auto chk = cardy_doubling_covariance(surf, rs, fd);
            CAPTURE(s);
            CHECK(chk.max_error <= 1e-10);
        }
    }
    RootSystem d4 = build_root_system(parse_lie_type("D4"));
    CHECK_THROWS_AS(cardy_doubling_covariance(grid_surface(3, 3), d4, fold(d4, parse_tau(d4, "triality"))),
                    ValidationError);
    CHECK_THROWS_AS(cardy_doubling_covariance(torus_surface(3, 3), d4, fold(d4, parse_tau(d4, "swap"))),
                    ValidationError);
}

TEST_CASE("fields: kind compatibility") {
    auto bordered = make_ensemble(grid_surface(3, 3), "A1");
    auto closed = make_ensemble(torus_surface(3, 3), "A1");
    CHECK_THROWS_AS(sample(bordered, FieldKind::Closed, 1, 0), ValidationError);
    CHECK_THROWS_AS(sample(closed, FieldKind::Neumann, 1, 0), ValidationError);
    CHECK_THROWS_AS(sample(closed, FieldKind::Dirichlet, 1, 0), ValidationError);
    CHECK_THROWS_AS(sample_cardy(closed, 1, 0), ValidationError);
    CHECK(parse_field_kind("cardy") == FieldKind::Cardy);
    CHECK_THROWS_AS(parse_field_kind("robin"), ValidationError);
}

TEST_CASE("fields: streams are independent of scheduling") {
    auto ens = make_ensemble(grid_surface(5, 5), "A3", "swap");
    const std::int64_t N = 3 * kReplicaBlock + 17;
    for (FieldKind k : {FieldKind::Neumann, FieldKind::Cardy}) {
        const auto serial = sample(ens, k, N, 9, {Exec::Serial, 1});
        const auto par = sample(ens, k, N, 9, {Exec::Parallel, 3});
        for (std::size_t i = 0; i < serial.size(); ++i) REQUIRE(serial[i] == par[i]);
        // Replica j does not depend on how many replicas are drawn.
        const auto prefix = sample(ens, k, 5, 9, {Exec::Serial, 1});
        for (std::size_t i = 0; i < prefix.size(); ++i) CHECK(prefix[i] == serial[i]);
        CHECK(sample(ens, k, 1, 10, {Exec::Serial, 1})[0] != serial[0]);
    }
}

TEST_CASE("fields: Girsanov identity") {
    auto ens = make_ensemble(grid_surface(6, 6), "A2", "swap");
    LinearFunctional y;
    y.vertices = {14, 21, 8};
    y.directions = {Eigen::Vector2d(0.4, -0.1), Eigen::Vector2d(0.2, 0.3), Eigen::Vector2d(-0.3, 0.1)};
    y.weights = {1.0, 0.7, 0.5};
    const std::int64_t N = 40000;
    for (FieldKind k : {FieldKind::Neumann, FieldKind::Cardy}) {
        CAPTURE(to_string(k));
        TestFunctional one;
        auto r1 = girsanov_check(ens, k, y, one, N, 101);
        REQUIRE(r1.exact.has_value());
        CHECK(std::abs(r1.tilted - 1.0) <= 3 * r1.tilted_stderr);
        CHECK(r1.shifted == 1.0);

        TestFunctional lin{TestFunctionalKind::Linear, 15, Eigen::Vector2d(1.0, 0.5), 1.0};
        auto r2 = girsanov_check(ens, k, y, lin, N, 102);
        const double se = std::hypot(r2.tilted_stderr, r2.shifted_stderr);
        CHECK(std::abs(r2.tilted - *r2.exact) <= 3 * r2.tilted_stderr);
        CHECK(std::abs(r2.shifted - *r2.exact) <= 3 * r2.shifted_stderr);
        CHECK(std::abs(r2.tilted - r2.shifted) <= 3 * se);

        TestFunctional bexp{TestFunctionalKind::BoundedExp, 20, Eigen::Vector2d(0.6, -0.4), 0.8};
        auto r3 = girsanov_check(ens, k, y, bexp, N, 103);
        CHECK_FALSE(r3.exact.has_value());
        CHECK(std::abs(r3.tilted - r3.shifted) <= 3 * std::hypot(r3.tilted_stderr, r3.shifted_stderr));
    }
    // The shift is the exact covariance of Y with the field.
    auto rep = girsanov_check(ens, FieldKind::Neumann, y, TestFunctional{}, 2, 1);
    const auto& G = ens.green(GreenKind::Neumann).G;
    for (int x : {0, 7, 35}) {
        Eigen::Vector2d expect = Eigen::Vector2d::Zero();
        for (std::size_t m = 0; m < 3; ++m) expect += y.weights[m] * G(x, y.vertices[m]) * y.directions[m];
        CHECK((rep.shift.row(x).transpose() - expect).norm() < 1e-12);
    }
}

TEST_CASE("fields: binary dump round trip") {
    auto ens = make_ensemble(grid_surface(4, 3), "A2", "swap");
    const auto path = (std::filesystem::temp_directory_path() / "toda_fields_dump.bin").string();
    const std::int64_t N = kReplicaBlock + 3;
    write_sample_dump(path, ens, FieldKind::Cardy, N, 55);
    const auto d = read_sample_dump(path);
    std::remove(path.c_str());
    CHECK(d.n_vertices == 12);
    CHECK(d.r == 2);
    CHECK(d.count == static_cast<std::uint64_t>(N));
    CHECK(d.seed == 55);
    const auto xs = sample_cardy(ens, N, 55);
    bool same = true;
    for (std::int64_t j = 0; j < N; ++j)
        for (int v = 0; v < 12; ++v)
            for (int a = 0; a < 2; ++a)
                same = same && d.values[static_cast<std::size_t>((j * 12 + v) * 2 + a)] == xs[j](v, a);
    CHECK(same);
    CHECK_THROWS_AS(read_sample_dump(path), IoError);
}

#include "toda/surface.hpp"
#include "toda/error.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <queue>

namespace toda {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::vector<std::vector<std::pair<int, double>>> adjacency(const DiscreteSurface& s) {
    std::vector<std::vector<std::pair<int, double>>> adj(s.n_vertices);
    for (const auto& e : s.edges) {
        adj[e.v].push_back({e.w, e.c});
        adj[e.w].push_back({e.v, e.c});
    }
    return adj;
}

}  // namespace

double DiscreteSurface::area(int v) const {
    const double p = phi.empty() ? 0.0 : phi[v];
    return std::exp(p) * base_area[v];
}

double DiscreteSurface::length(int v) const {
    const double p = phi.empty() ? 0.0 : phi[v];
    const double l0 = base_length.empty() ? 1.0 : base_length[v];
    return std::exp(0.5 * p) * l0;
}

Eigen::VectorXd DiscreteSurface::areas() const {
    Eigen::VectorXd a(n_vertices);
    for (int v = 0; v < n_vertices; ++v) a[v] = area(v);
    return a;
}

Eigen::VectorXd DiscreteSurface::lengths() const {
    Eigen::VectorXd l = Eigen::VectorXd::Zero(n_vertices);
    for (int v : boundary_vertices()) l[v] = length(v);
    return l;
}

std::vector<int> DiscreteSurface::boundary_vertices() const {
    std::vector<int> out;
    for (const auto& comp : boundary) out.insert(out.end(), comp.begin(), comp.end());
    return out;
}

std::vector<char> DiscreteSurface::boundary_mask() const {
    std::vector<char> m(n_vertices, 0);
    for (int v : boundary_vertices()) m[v] = 1;
    return m;
}

double DiscreteSurface::total_area() const { return areas().sum(); }

void validate(const DiscreteSurface& s) {
    const int n = s.n_vertices;
    if (n < 2) throw ValidationError("surface needs at least two vertices");
    if (static_cast<int>(s.base_area.size()) != n) throw ValidationError("area list must have one entry per vertex");
    if (!s.phi.empty() && static_cast<int>(s.phi.size()) != n)
        throw ValidationError("conformal factor must have one entry per vertex");
    if (!s.base_length.empty() && static_cast<int>(s.base_length.size()) != n)
        throw ValidationError("boundary length list must have one entry per vertex");
    for (int v = 0; v < n; ++v) {
        if (!(s.base_area[v] > 0) || !std::isfinite(s.area(v)))
            throw ValidationError("vertex " + std::to_string(v) + " has non-positive area");
        if (!s.phi.empty() && !std::isfinite(s.phi[v])) throw ValidationError("conformal factor must be finite");
    }
    for (const auto& e : s.edges) {
        if (e.v < 0 || e.v >= n || e.w < 0 || e.w >= n) throw ValidationError("edge endpoint out of range");
        if (e.v == e.w) throw ValidationError("self-loop at vertex " + std::to_string(e.v));
        if (!(e.c > 0) || !std::isfinite(e.c)) throw ValidationError("edge conductance must be positive");
    }
    std::vector<char> seen(n, 0);
    for (const auto& comp : s.boundary) {
        if (comp.empty()) throw ValidationError("empty boundary component");
        for (int v : comp) {
            if (v < 0 || v >= n) throw ValidationError("boundary vertex out of range");
            if (seen[v]++) throw ValidationError("boundary vertex " + std::to_string(v) + " listed twice");
            if (!(s.length(v) > 0)) throw ValidationError("boundary vertex " + std::to_string(v) + " has non-positive length");
        }
    }
    auto adj = adjacency(s);
    std::vector<char> reached(n, 0);
    std::queue<int> q;
    q.push(0);
    reached[0] = 1;
    int count = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (auto [w, c] : adj[v])
            if (!reached[w]) {
                reached[w] = 1;
                ++count;
                q.push(w);
            }
    }
    if (count != n) throw ValidationError("surface graph is disconnected");
}

Eigen::SparseMatrix<double> conductance_laplacian(const DiscreteSurface& s) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(4 * s.edges.size());
    for (const auto& e : s.edges) {
        t.emplace_back(e.v, e.v, e.c);
        t.emplace_back(e.w, e.w, e.c);
        t.emplace_back(e.v, e.w, -e.c);
        t.emplace_back(e.w, e.v, -e.c);
    }
    Eigen::SparseMatrix<double> k(s.n_vertices, s.n_vertices);
    k.setFromTriplets(t.begin(), t.end());
    return k;
}

Eigen::VectorXd laplacian_apply(const DiscreteSurface& s, const Eigen::VectorXd& f) {
    Eigen::VectorXd kf = conductance_laplacian(s) * f;
    return -kf.cwiseQuotient(s.areas());
}

Eigen::VectorXd normal_derivative(const DiscreteSurface& s, const Eigen::VectorXd& f) {
    auto mask = s.boundary_mask();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(s.n_vertices);
    for (const auto& e : s.edges) {
        if (mask[e.v] && !mask[e.w]) out[e.v] += e.c * (f[e.v] - f[e.w]);
        if (mask[e.w] && !mask[e.v]) out[e.w] += e.c * (f[e.w] - f[e.v]);
    }
    for (int v = 0; v < s.n_vertices; ++v)
        if (mask[v]) out[v] /= s.length(v);
    return out;
}

Eigen::VectorXd bulk_laplacian(const DiscreteSurface& s, const Eigen::VectorXd& f) {
    Eigen::VectorXd weighted = -(conductance_laplacian(s) * f);
    Eigen::VectorXd dn = normal_derivative(s, f);
    auto mask = s.boundary_mask();
    for (int v = 0; v < s.n_vertices; ++v)
        if (mask[v]) weighted[v] += s.length(v) * dn[v];
    return weighted.cwiseQuotient(s.areas());
}

std::string to_string(GreenKind k) {
    switch (k) {
        case GreenKind::Closed: return "closed";
        case GreenKind::Neumann: return "neumann";
        case GreenKind::Dirichlet: return "dirichlet";
    }
    return "?";
}

namespace {

// Solves sys * X = 2*pi*E_cols for every column, in fixed blocks.
template <class Solve>
void solve_unit_columns(int n, const GreenOptions& opt, Eigen::MatrixXd& out, Solve&& solve) {
    out.resize(n, n);
    const int block = std::max(1, opt.block);
    const std::int64_t n_blocks = (n + block - 1) / block;
    for_each_block(opt.exec, n_blocks, [&](std::int64_t b) {
        const int c0 = static_cast<int>(b) * block;
        const int w = std::min(block, n - c0);
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, w);
        for (int j = 0; j < w; ++j) rhs(c0 + j, j) = two_pi;
        out.middleCols(c0, w) = solve(rhs);
    });
}

Eigen::MatrixXd cg_columns(const Eigen::SparseMatrix<double>& k, const Eigen::MatrixXd& rhs, double tol,
                           const Eigen::VectorXd* mean_weights) {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(tol);
    cg.setMaxIterations(std::max<int>(1000, 20 * static_cast<int>(k.rows())));
    cg.compute(k);
    Eigen::MatrixXd out(rhs.rows(), rhs.cols());
    for (int j = 0; j < rhs.cols(); ++j) {
        Eigen::VectorXd b = rhs.col(j);
        if (mean_weights) b -= (b.sum() / mean_weights->sum()) * (*mean_weights);
        Eigen::VectorXd x = cg.solve(b);
        if (cg.info() != Eigen::Success) throw NumericalError("conjugate gradient did not converge");
        if (mean_weights) x.array() -= mean_weights->dot(x) / mean_weights->sum();
        out.col(j) = x;
    }
    return out;
}

}  // namespace

GreenMatrix green(const DiscreteSurface& s, GreenKind kind, const GreenOptions& opt) {
    validate(s);
    const int n = s.n_vertices;
    if (kind == GreenKind::Closed && !s.closed()) throw ValidationError("closed Green function needs an empty boundary");
    if (kind != GreenKind::Closed && s.closed())
        throw ValidationError(to_string(kind) + " Green function needs a nonempty boundary");

    GreenMatrix g;
    g.kind = kind;
    g.area = s.areas();
    g.boundary_mask = s.boundary_mask();
    const Eigen::SparseMatrix<double> k = conductance_laplacian(s);
    const double vol = g.area.sum();

    if (kind != GreenKind::Dirichlet) {
        if (n <= opt.dense_limit) {
            Eigen::MatrixXd m = Eigen::MatrixXd(k) + g.area * g.area.transpose() / vol;
            Eigen::LLT<Eigen::MatrixXd> llt(m);
            if (llt.info() != Eigen::Success) throw NumericalError("Green system is singular");
            solve_unit_columns(n, opt, g.G, [&](const Eigen::MatrixXd& rhs) { return llt.solve(rhs); });
            g.G.array() -= two_pi / vol;
        } else {
            solve_unit_columns(n, opt, g.G, [&](const Eigen::MatrixXd& rhs) {
                return cg_columns(k, rhs, opt.cg_tolerance, &g.area);
            });
        }
    } else {
        std::vector<int> interior;
        std::vector<int> pos(n, -1);
        for (int v = 0; v < n; ++v)
            if (!g.boundary_mask[v]) {
                pos[v] = static_cast<int>(interior.size());
                interior.push_back(v);
            }
        const int ni = static_cast<int>(interior.size());
        if (ni == 0) throw ValidationError("Dirichlet problem has no interior vertex");
        std::vector<Eigen::Triplet<double>> t;
        for (int o = 0; o < k.outerSize(); ++o)
            for (Eigen::SparseMatrix<double>::InnerIterator it(k, o); it; ++it)
                if (pos[it.row()] >= 0 && pos[it.col()] >= 0) t.emplace_back(pos[it.row()], pos[it.col()], it.value());
        Eigen::SparseMatrix<double> kii(ni, ni);
        kii.setFromTriplets(t.begin(), t.end());
        Eigen::MatrixXd gii;
        if (ni <= opt.dense_limit) {
            Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(kii)};
            if (llt.info() != Eigen::Success) throw NumericalError("Dirichlet system is singular");
            solve_unit_columns(ni, opt, gii, [&](const Eigen::MatrixXd& rhs) { return llt.solve(rhs); });
        } else {
            solve_unit_columns(ni, opt, gii, [&](const Eigen::MatrixXd& rhs) {
                return cg_columns(kii, rhs, opt.cg_tolerance, nullptr);
            });
        }
        g.G = Eigen::MatrixXd::Zero(n, n);
        for (int a = 0; a < ni; ++a)
            for (int b = 0; b < ni; ++b) g.G(interior[a], interior[b]) = gii(a, b);
    }
    g.G = 0.5 * (g.G + g.G.transpose()).eval();

    Eigen::MatrixXd rhs;
    Eigen::MatrixXd kg = k * g.G;
    if (kind == GreenKind::Dirichlet) {
        rhs = two_pi * Eigen::MatrixXd::Identity(n, n);
        for (int v = 0; v < n; ++v)
            if (g.boundary_mask[v]) {
                rhs.row(v).setZero();
                kg.row(v).setZero();
            }
    } else {
        rhs = two_pi * (Eigen::MatrixXd::Identity(n, n) - g.area * Eigen::RowVectorXd::Ones(n) / vol);
    }
    g.residual = (kg - rhs).cwiseAbs().maxCoeff() / two_pi;
    if (!(g.residual < 1e-8)) throw NumericalError("Green solve residual " + std::to_string(g.residual) + " too large");
    return g;
}

DoubledSurface double_surface(const DiscreteSurface& s) {
    validate(s);
    if (s.closed()) throw ValidationError("doubling needs a nonempty boundary");
    const int n = s.n_vertices;
    auto mask = s.boundary_mask();
    DoubledSurface d;
    d.embed_front.resize(n);
    d.embed_back.resize(n);
    int next = n;
    for (int v = 0; v < n; ++v) {
        d.embed_front[v] = v;
        d.embed_back[v] = mask[v] ? v : next++;
    }
    const int nd = next;
    DiscreteSurface& c = d.closed;
    c.n_vertices = nd;
    c.base_area.assign(nd, 0.0);
    c.base_length.clear();
    c.phi.clear();
    for (int v = 0; v < n; ++v) {
        if (mask[v]) {
            c.base_area[v] = 2.0 * s.area(v);
        } else {
            c.base_area[v] = s.area(v);
            c.base_area[d.embed_back[v]] = s.area(v);
        }
    }
    for (const auto& e : s.edges) {
        if (mask[e.v] && mask[e.w]) {
            c.edges.push_back({e.v, e.w, 2.0 * e.c});
        } else {
            c.edges.push_back({e.v, e.w, e.c});
            c.edges.push_back({d.embed_back[e.v], d.embed_back[e.w], e.c});
        }
    }
    int point_components = 0;
    for (const auto& comp : s.boundary) point_components += comp.size() == 1;
    c.euler_char = 2 * s.euler_char - point_components;
    d.sigma.resize(nd);
    std::iota(d.sigma.begin(), d.sigma.end(), 0);
    for (int v = 0; v < n; ++v) {
        d.sigma[d.embed_front[v]] = d.embed_back[v];
        d.sigma[d.embed_back[v]] = d.embed_front[v];
    }
    return d;
}

GreenPair green_from_double(const DiscreteSurface& s, const GreenOptions& opt) {
    DoubledSurface d = double_surface(s);
    GreenMatrix hat = green(d.closed, GreenKind::Closed, opt);
    const int n = s.n_vertices;
    GreenPair out;
    out.neumann.kind = GreenKind::Neumann;
    out.dirichlet.kind = GreenKind::Dirichlet;
    out.neumann.G.resize(n, n);
    out.dirichlet.G.resize(n, n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            // Symmetric in sigma so that boundary rows and columns cancel exactly.
            const int fx = d.embed_front[x], fy = d.embed_front[y];
            const double direct = 0.5 * (hat.G(fx, fy) + hat.G(d.sigma[fx], d.sigma[fy]));
            const double mirror = 0.5 * (hat.G(fx, d.sigma[fy]) + hat.G(d.sigma[fx], fy));
            out.neumann.G(x, y) = direct + mirror;
            out.dirichlet.G(x, y) = direct - mirror;
        }
    for (GreenMatrix* g : {&out.neumann, &out.dirichlet}) {
        g->area = s.areas();
        g->boundary_mask = s.boundary_mask();
        g->residual = hat.residual;
    }
    return out;
}

GreenMatrix conformal_reweight(const GreenMatrix& g, const Eigen::VectorXd& new_area) {
    if (g.kind == GreenKind::Dirichlet)
        throw ValidationError("conformal reweighting applies to closed and Neumann Green functions only");
    if (new_area.size() != g.G.rows() || (new_area.array() <= 0).any())
        throw ValidationError("new area must be positive with one entry per vertex");
    const double vol = new_area.sum();
    const Eigen::VectorXd row_mean = g.G * new_area / vol;
    const double total = new_area.dot(row_mean) / vol;
    GreenMatrix out = g;
    out.area = new_area;
    const int n = static_cast<int>(g.G.rows());
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) out.G(x, y) = g.G(x, y) - row_mean[x] - row_mean[y] + total;
    return out;
}

DiscreteSurface path_surface(int n) {
    if (n < 3) throw ValidationError("path surface needs at least 3 vertices");
    DiscreteSurface s;
    s.n_vertices = n;
    for (int v = 0; v + 1 < n; ++v) s.edges.push_back({v, v + 1, 1.0});
    s.boundary = {{0}, {n - 1}};
    s.base_area.assign(n, 1.0);
    s.base_length.assign(n, 1.0);
    s.euler_char = 1;
    return s;
}

DiscreteSurface grid_surface(int nx, int ny, double h) {
    if (nx < 3 || ny < 3) throw ValidationError("grid surface needs at least 3x3 vertices");
    if (!(h > 0)) throw ValidationError("lattice spacing must be positive");
    DiscreteSurface s;
    s.n_vertices = nx * ny;
    auto id = [nx](int i, int j) { return i + nx * j; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (i + 1 < nx) s.edges.push_back({id(i, j), id(i + 1, j), 1.0});
            if (j + 1 < ny) s.edges.push_back({id(i, j), id(i, j + 1), 1.0});
        }
    s.base_area.resize(s.n_vertices);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double a = h * h;
            if (i == 0 || i == nx - 1) a *= 0.5;
            if (j == 0 || j == ny - 1) a *= 0.5;
            s.base_area[id(i, j)] = a;
        }
    std::vector<int> ring;
    for (int i = 0; i < nx; ++i) ring.push_back(id(i, 0));
    for (int j = 1; j < ny; ++j) ring.push_back(id(nx - 1, j));
    for (int i = nx - 2; i >= 0; --i) ring.push_back(id(i, ny - 1));
    for (int j = ny - 2; j >= 1; --j) ring.push_back(id(0, j));
    s.boundary = {ring};
    s.base_length.assign(s.n_vertices, h);
    s.euler_char = 1;
    return s;
}

DiscreteSurface torus_surface(int nx, int ny, double h) {
    if (nx < 3 || ny < 3) throw ValidationError("torus surface needs at least 3x3 vertices");
    if (!(h > 0)) throw ValidationError("lattice spacing must be positive");
    DiscreteSurface s;
    s.n_vertices = nx * ny;
    auto id = [nx, ny](int i, int j) { return ((i + nx) % nx) + nx * ((j + ny) % ny); };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            s.edges.push_back({id(i, j), id(i + 1, j), 1.0});
            s.edges.push_back({id(i, j), id(i, j + 1), 1.0});
        }
    s.base_area.assign(s.n_vertices, h * h);
    s.euler_char = 0;
    return s;
}

DiscreteSurface annulus_surface(int n_radial, int n_angular, double h) {
    if (n_radial < 3 || n_angular < 3) throw ValidationError("annulus needs at least 3 radial and 3 angular vertices");
    DiscreteSurface s;
    s.n_vertices = n_radial * n_angular;
    auto id = [n_angular](int i, int k) { return ((k + n_angular) % n_angular) + n_angular * i; };
    for (int i = 0; i < n_radial; ++i)
        for (int k = 0; k < n_angular; ++k) {
            s.edges.push_back({id(i, k), id(i, k + 1), 1.0});
            if (i + 1 < n_radial) s.edges.push_back({id(i, k), id(i + 1, k), 1.0});
        }
    s.base_area.assign(s.n_vertices, h * h);
    std::vector<int> inner, outer;
    for (int k = 0; k < n_angular; ++k) {
        inner.push_back(id(0, k));
        outer.push_back(id(n_radial - 1, n_angular - 1 - k));
        s.base_area[id(0, k)] *= 0.5;
        s.base_area[id(n_radial - 1, k)] *= 0.5;
    }
    s.boundary = {inner, outer};
    s.base_length.assign(s.n_vertices, h);
    s.euler_char = 0;
    return s;
}

DiscreteSurface random_triangulation(int nx, int ny, std::mt19937_64& rng, bool periodic) {
    DiscreteSurface s = periodic ? torus_surface(nx, ny) : grid_surface(nx, ny);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    std::bernoulli_distribution coin(0.5);
    auto wrap = [&](int i, int j) { return ((i + nx) % nx) + nx * ((j + ny) % ny); };
    const int ci = periodic ? nx : nx - 1;
    const int cj = periodic ? ny : ny - 1;
    for (int j = 0; j < cj; ++j)
        for (int i = 0; i < ci; ++i) {
            if (coin(rng))
                s.edges.push_back({wrap(i, j), wrap(i + 1, j + 1), 1.0});
            else
                s.edges.push_back({wrap(i + 1, j), wrap(i, j + 1), 1.0});
        }
    for (auto& e : s.edges) e.c = u(rng);
    for (auto& a : s.base_area) a *= u(rng);
    for (int v : s.boundary_vertices()) s.base_length[v] *= u(rng);
    return s;
}

nlohmann::json to_json(const DiscreteSurface& s) {
    nlohmann::json j;
    j["n_vertices"] = s.n_vertices;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : s.edges) edges.push_back({e.v, e.w, e.c});
    j["edges"] = edges;
    j["boundary"] = s.boundary;
    j["area"] = s.base_area;
    if (!s.base_length.empty()) j["boundary_length"] = s.base_length;
    if (!s.phi.empty()) j["phi"] = s.phi;
    j["euler_char"] = s.euler_char;
    return j;
}

DiscreteSurface surface_from_json(const nlohmann::json& j) {
    try {
        DiscreteSurface s;
        if (j.contains("generator")) {
            const std::string g = j.at("generator");
            const double h = j.value("h", 1.0);
            if (g == "grid") s = grid_surface(j.at("nx"), j.at("ny"), h);
            else if (g == "torus") s = torus_surface(j.at("nx"), j.at("ny"), h);
            else if (g == "annulus") s = annulus_surface(j.at("n_radial"), j.at("n_angular"), h);
            else if (g == "path") s = path_surface(j.at("n"));
            else if (g == "double_grid") s = double_surface(grid_surface(j.at("nx"), j.at("ny"), h)).closed;
            else throw ValidationError("unknown surface generator '" + g + "'");
        } else {
            s.n_vertices = j.at("n_vertices");
            for (const auto& e : j.at("edges")) s.edges.push_back({e.at(0), e.at(1), e.size() > 2 ? e.at(2).get<double>() : 1.0});
            if (j.contains("boundary")) s.boundary = j.at("boundary").get<std::vector<std::vector<int>>>();
            s.base_area = j.at("area").get<std::vector<double>>();
            if (j.contains("boundary_length")) s.base_length = j.at("boundary_length").get<std::vector<double>>();
            s.euler_char = j.at("euler_char");
        }
        if (j.contains("phi")) s.phi = j.at("phi").get<std::vector<double>>();
        if (j.contains("euler_char")) s.euler_char = j.at("euler_char");
        validate(s);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed surface description: ") + e.what());
    }
}

DiscreteSurface load_surface(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open surface file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("surface file '" + path + "' is not valid JSON: " + e.what());
    }
    return surface_from_json(j);
}

}  // namespace toda

#pragma once

#include "toda/exec.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include "json.hpp"

#include <random>
#include <string>
#include <vector>

namespace toda {

struct Edge {
    int v = 0;
    int w = 0;
    double c = 1.0;
};

// Metric g = e^phi g_0: a_v = e^{phi_v} a0_v, l_v = e^{phi_v/2} l0_v.
struct DiscreteSurface {
    int n_vertices = 0;
    std::vector<Edge> edges;
    std::vector<std::vector<int>> boundary;  // components, each ordered along the curve
    std::vector<double> base_area;
    std::vector<double> base_length;         // per vertex; read only on boundary vertices
    std::vector<double> phi;
    int euler_char = 0;

    bool closed() const { return boundary.empty(); }
    double area(int v) const;
    double length(int v) const;
    Eigen::VectorXd areas() const;
    Eigen::VectorXd lengths() const;          // zero off the boundary
    std::vector<int> boundary_vertices() const;
    std::vector<char> boundary_mask() const;
    double total_area() const;
};

// Throws ValidationError on any broken invariant (connectivity, positivity, ids).
void validate(const DiscreteSurface& s);

// Graph Laplacian K (K_vv = sum c, K_vw = -c); Delta = -A^{-1} K.
Eigen::SparseMatrix<double> conductance_laplacian(const DiscreteSurface& s);
Eigen::VectorXd laplacian_apply(const DiscreteSurface& s, const Eigen::VectorXd& f);

// Split at boundary vertices: a_v (Delta_bulk f)_v - l_v (dn f)_v = -(K f)_v.
// (dn f)_v l_v collects the flux towards interior neighbours; off the boundary dn f = 0.
Eigen::VectorXd normal_derivative(const DiscreteSurface& s, const Eigen::VectorXd& f);
Eigen::VectorXd bulk_laplacian(const DiscreteSurface& s, const Eigen::VectorXd& f);

enum class GreenKind { Closed, Neumann, Dirichlet };
std::string to_string(GreenKind k);

struct GreenOptions {
    int dense_limit = 4000;   // above: conjugate gradient per column
    int block = 64;           // columns per solve block
    double cg_tolerance = 1e-13;
    ExecPolicy exec{};
};

struct GreenMatrix {
    GreenKind kind = GreenKind::Closed;
    Eigen::MatrixXd G;
    Eigen::VectorXd area;
    std::vector<char> boundary_mask;
    double residual = 0;      // max |K G - rhs| / max |rhs|
};

GreenMatrix green(const DiscreteSurface& s, GreenKind kind, const GreenOptions& opt = {});

struct DoubledSurface {
    DiscreteSurface closed;
    std::vector<int> sigma;
    std::vector<int> embed_front;
    std::vector<int> embed_back;
};

// Boundary vertices keep one copy carrying twice the area; boundary-boundary
// conductances double. This makes the decomposition below exact on graphs.
DoubledSurface double_surface(const DiscreteSurface& s);

struct GreenPair {
    GreenMatrix neumann;
    GreenMatrix dirichlet;
};

GreenPair green_from_double(const DiscreteSurface& s, const GreenOptions& opt = {});

GreenMatrix conformal_reweight(const GreenMatrix& g, const Eigen::VectorXd& new_area);

// Generators. h is the lattice spacing: interior areas h^2, boundary lengths h.
DiscreteSurface path_surface(int n);
DiscreteSurface grid_surface(int nx, int ny, double h = 1.0);
DiscreteSurface torus_surface(int nx, int ny, double h = 1.0);
DiscreteSurface annulus_surface(int n_radial, int n_angular, double h = 1.0);
// Grid with random diagonals, conductances in [0.5, 1.5] and areas scaled by [0.5, 1.5].
DiscreteSurface random_triangulation(int nx, int ny, std::mt19937_64& rng, bool periodic = false);

nlohmann::json to_json(const DiscreteSurface& s);
DiscreteSurface surface_from_json(const nlohmann::json& j);
DiscreteSurface load_surface(const std::string& path);

}  // namespace toda

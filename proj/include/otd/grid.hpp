// Uniform tensor grid on a box domain, node fields, edge fields, and the
// discrete calculus (gradient at edge midpoints, adjoint divergence,
// trapezoid quadrature) used by every functional in the library.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace otd {

struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Node-centered uniform grid on [lo,hi], 1D or 2D. Nodes carry trapezoid
// quadrature weights; edges (midpoints between neighbor nodes) carry the
// matching dual weights so that <grad u, v>_E = -<u, div v>_N exactly.
class Grid {
  public:
    Grid(int dim, std::array<double, 2> lo, std::array<double, 2> hi,
         std::array<int, 2> n_nodes);

    int dim() const { return dim_; }
    double lo(int a) const { return lo_[a]; }
    double hi(int a) const { return hi_[a]; }
    int n(int a) const { return n_[a]; }
    double h(int a) const { return h_[a]; }

    int n_total() const { return n_[0] * n_[1]; }
    int node_id(int i, int j) const { return j * n_[0] + i; }
    double x(int i) const { return lo_[0] + i * h_[0]; }
    double y(int j) const { return lo_[1] + j * h_[1]; }
    std::array<double, 2> coord(int id) const {
        return {x(id % n_[0]), dim_ == 2 ? y(id / n_[0]) : 0.0};
    }

    bool is_boundary(int id) const { return boundary_[id] != 0; }
    int n_boundary() const { return n_boundary_; }

    // trapezoid weight of node id (area/length of its dual cell clipped to the box)
    double w(int id) const { return w_[id]; }
    double volume() const;

    // edges along axis a: (n[a]-1) per line, ordered lexicographically
    int n_edges(int a) const;
    // node ids at the two ends of edge e along axis a
    std::pair<int, int> edge_nodes(int a, int e) const;
    // dual weight of an edge: h along its axis times the transverse trapezoid weight
    double edge_w(int a, int e) const;

    bool same_as(const Grid& o) const { return this == &o; }

  private:
    int dim_;
    std::array<double, 2> lo_, hi_;
    std::array<int, 2> n_;
    std::array<double, 2> h_;
    std::vector<std::uint8_t> boundary_;
    std::vector<double> w_;
    int n_boundary_ = 0;
};

Grid build_grid(int dim, std::array<double, 2> lo, std::array<double, 2> hi,
                std::array<int, 2> n_nodes);
inline Grid build_grid(double lo, double hi, int n) {
    return build_grid(1, {lo, 0.0}, {hi, 0.0}, {n, 1});
}

// One real value per node.
struct ScalarField {
    const Grid* grid = nullptr;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g) : grid(&g), values(g.n_total(), 0.0) {}
    ScalarField(const Grid& g, std::function<double(double, double)> fn);

    double& operator[](int id) { return values[id]; }
    double operator[](int id) const { return values[id]; }
    int size() const { return static_cast<int>(values.size()); }
    bool all_finite() const;
};

// Per-axis values at edge midpoints (MAC layout).
struct EdgeField {
    const Grid* grid = nullptr;
    std::array<std::vector<double>, 2> comp;

    EdgeField() = default;
    explicit EdgeField(const Grid& g) : grid(&g) {
        for (int a = 0; a < g.dim(); ++a) comp[a].assign(g.n_edges(a), 0.0);
    }
};

void require_same_grid(const Grid& a, const Grid& b);

EdgeField grad(const ScalarField& u);
// exact negative adjoint of grad w.r.t. the node/edge weighted inner products,
// with homogeneous Neumann closure (missing boundary fluxes are zero)
ScalarField div(const EdgeField& v);

double integrate(const ScalarField& u);                      // trapezoid
double inner(const ScalarField& u, const ScalarField& v);    // node-weighted
double inner(const EdgeField& u, const EdgeField& v);        // edge-weighted
double l2_norm(const ScalarField& u);
double max_abs(const ScalarField& u);

// Zero-mean compactly supported source term. Mass balance is a hypothesis of
// the problem, so by default a spec with nonzero mean is rejected.
struct SourceData {
    ScalarField field;
    std::array<double, 2> support_lo{}, support_hi{};
    double mean_correction = 0.0;
};

struct SourceBox {
    std::array<double, 2> lo{}, hi{};
    double value = 0.0;
};

SourceData make_source(const Grid& g, const std::vector<SourceBox>& boxes,
                       bool allow_mean_correction = false);
SourceData make_source(const Grid& g, std::function<double(double, double)> fn,
                       std::array<double, 2> support_lo,
                       std::array<double, 2> support_hi,
                       bool allow_mean_correction = false);

// CSV dump: metadata header line, then x[,y],value rows
void write_field_csv(std::ostream& os, const ScalarField& u);
void write_field_csv(const std::string& path, const ScalarField& u);

}  // namespace otd

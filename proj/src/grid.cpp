#include "otd/grid.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace otd {

Grid::Grid(int dim, std::array<double, 2> lo, std::array<double, 2> hi,
           std::array<int, 2> n_nodes)
    : dim_(dim), lo_(lo), hi_(hi), n_(n_nodes) {
    if (dim != 1 && dim != 2) throw GridError("grid: dim must be 1 or 2");
    if (dim == 1) {
        n_[1] = 1;
        lo_[1] = hi_[1] = 0.0;
    }
    for (int a = 0; a < dim_; ++a) {
        if (!std::isfinite(lo_[a]) || !std::isfinite(hi_[a]))
            throw GridError("grid: non-finite extents");
        if (!(hi_[a] > lo_[a])) throw GridError("grid: hi must exceed lo");
        if (n_[a] < 3) throw GridError("grid: need at least 3 nodes per axis");
        h_[a] = (hi_[a] - lo_[a]) / (n_[a] - 1);
    }
    if (dim_ == 1) h_[1] = 1.0;

    boundary_.assign(n_total(), 0);
    w_.assign(n_total(), 0.0);
    auto axis_w = [&](int a, int i) {
        return (i == 0 || i == n_[a] - 1) ? 0.5 * h_[a] : h_[a];
    };
    for (int j = 0; j < n_[1]; ++j) {
        for (int i = 0; i < n_[0]; ++i) {
            int id = node_id(i, j);
            bool b = (i == 0 || i == n_[0] - 1);
            if (dim_ == 2) b = b || (j == 0 || j == n_[1] - 1);
            boundary_[id] = b ? 1 : 0;
            if (b) ++n_boundary_;
            w_[id] = axis_w(0, i) * (dim_ == 2 ? axis_w(1, j) : 1.0);
        }
    }
}

double Grid::volume() const {
    double v = hi_[0] - lo_[0];
    if (dim_ == 2) v *= hi_[1] - lo_[1];
    return v;
}

int Grid::n_edges(int a) const {
    if (a == 0) return (n_[0] - 1) * n_[1];
    return n_[0] * (n_[1] - 1);
}

std::pair<int, int> Grid::edge_nodes(int a, int e) const {
    if (a == 0) {
        int j = e / (n_[0] - 1), i = e % (n_[0] - 1);
        return {node_id(i, j), node_id(i + 1, j)};
    }
    int j = e / n_[0], i = e % n_[0];
    return {node_id(i, j), node_id(i, j + 1)};
}

double Grid::edge_w(int a, int e) const {
    if (dim_ == 1) return h_[0];
    auto tw = [&](int b, int i) {
        return (i == 0 || i == n_[b] - 1) ? 0.5 * h_[b] : h_[b];
    };
    if (a == 0) {
        int j = e / (n_[0] - 1);
        return h_[0] * tw(1, j);
    }
    int i = e % n_[0];
    return h_[1] * tw(0, i);
}

Grid build_grid(int dim, std::array<double, 2> lo, std::array<double, 2> hi,
                std::array<int, 2> n_nodes) {
    return Grid(dim, lo, hi, n_nodes);
}

ScalarField::ScalarField(const Grid& g, std::function<double(double, double)> fn)
    : grid(&g), values(g.n_total()) {
    for (int id = 0; id < g.n_total(); ++id) {
        auto c = g.coord(id);
        values[id] = fn(c[0], c[1]);
    }
}

bool ScalarField::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

void require_same_grid(const Grid& a, const Grid& b) {
    if (!a.same_as(b)) throw GridError("fields live on different grids");
}

EdgeField grad(const ScalarField& u) {
    const Grid& g = *u.grid;
    EdgeField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        const double inv_h = 1.0 / g.h(a);
        for (int e = 0; e < g.n_edges(a); ++e) {
            auto [l, r] = g.edge_nodes(a, e);
            out.comp[a][e] = (u[r] - u[l]) * inv_h;
        }
    }
    return out;
}

ScalarField div(const EdgeField& v) {
    const Grid& g = *v.grid;
    ScalarField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        const double inv_h = 1.0 / g.h(a);
        for (int e = 0; e < g.n_edges(a); ++e) {
            auto [l, r] = g.edge_nodes(a, e);
            const double flux = g.edge_w(a, e) * v.comp[a][e] * inv_h;
            out[l] += flux;
            out[r] -= flux;
        }
    }
    for (int id = 0; id < g.n_total(); ++id) out[id] /= g.w(id);
    return out;
}

double integrate(const ScalarField& u) {
    const Grid& g = *u.grid;
    // extended-precision accumulation keeps energy differences resolvable
    // near stationarity
    long double s = 0.0L;
    for (int id = 0; id < g.n_total(); ++id)
        s += static_cast<long double>(g.w(id)) * u[id];
    return static_cast<double>(s);
}

double inner(const ScalarField& u, const ScalarField& v) {
    require_same_grid(*u.grid, *v.grid);
    const Grid& g = *u.grid;
    long double s = 0.0L;
    for (int id = 0; id < g.n_total(); ++id)
        s += static_cast<long double>(g.w(id)) * u[id] * v[id];
    return static_cast<double>(s);
}

double inner(const EdgeField& u, const EdgeField& v) {
    require_same_grid(*u.grid, *v.grid);
    const Grid& g = *u.grid;
    long double s = 0.0L;
    for (int a = 0; a < g.dim(); ++a)
        for (int e = 0; e < g.n_edges(a); ++e)
            s += static_cast<long double>(g.edge_w(a, e)) * u.comp[a][e] *
                 v.comp[a][e];
    return static_cast<double>(s);
}

double l2_norm(const ScalarField& u) { return std::sqrt(inner(u, u)); }

double max_abs(const ScalarField& u) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::abs(v));
    return m;
}

namespace {

// indicator of a box sampled at nodes, 1/2 on the faces so that trapezoid
// sums of piecewise-constant data stay exact away from the kink nodes
double box_weight(const Grid& g, const std::array<double, 2>& blo,
                  const std::array<double, 2>& bhi, double px, double py) {
    double w = 1.0;
    const double p[2] = {px, py};
    for (int a = 0; a < g.dim(); ++a) {
        const double tol = 1e-9 * g.h(a);
        if (p[a] < blo[a] - tol || p[a] > bhi[a] + tol) return 0.0;
        if (std::abs(p[a] - blo[a]) <= tol || std::abs(p[a] - bhi[a]) <= tol)
            w *= 0.5;
    }
    return w;
}

SourceData finalize_source(const Grid& g, ScalarField field,
                           std::array<double, 2> slo, std::array<double, 2> shi,
                           bool allow_mean_correction) {
    for (int a = 0; a < g.dim(); ++a) {
        if (!(slo[a] > g.lo(a) && shi[a] < g.hi(a)))
            throw GridError("source support must be strictly inside the domain");
    }
    SourceData out;
    out.support_lo = slo;
    out.support_hi = shi;

    const double mean = integrate(field);
    const double f_inf = max_abs(field);
    const double tol = 1e-14 * std::max(f_inf, 1e-300) * g.volume();
    if (std::abs(mean) > tol) {
        if (!allow_mean_correction)
            throw GridError("source does not integrate to zero");
        // subtract a constant on the support so the discrete integral vanishes
        double supp_measure = 0.0;
        std::vector<double> bw(g.n_total());
        for (int id = 0; id < g.n_total(); ++id) {
            auto c = g.coord(id);
            bw[id] = box_weight(g, slo, shi, c[0], c[1]);
            if (bw[id] > 0.0) supp_measure += g.w(id) * bw[id];
        }
        const double c = mean / supp_measure;
        for (int id = 0; id < g.n_total(); ++id)
            if (bw[id] > 0.0) field[id] -= c * bw[id];
        out.mean_correction = c;
    }
    out.field = std::move(field);
    return out;
}

}  // namespace

SourceData make_source(const Grid& g, const std::vector<SourceBox>& boxes,
                       bool allow_mean_correction) {
    std::array<double, 2> slo{g.hi(0), g.hi(1)}, shi{g.lo(0), g.lo(1)};
    if (boxes.empty()) {
        // f = 0 is a valid degenerate input; support collapses to the center
        for (int a = 0; a < 2; ++a)
            slo[a] = shi[a] = 0.5 * (g.lo(a) + g.hi(a));
    }
    for (const auto& b : boxes) {
        for (int a = 0; a < g.dim(); ++a) {
            slo[a] = std::min(slo[a], b.lo[a]);
            shi[a] = std::max(shi[a], b.hi[a]);
        }
    }
    if (g.dim() == 1) slo[1] = shi[1] = 0.0;

    ScalarField field(g);
    for (int id = 0; id < g.n_total(); ++id) {
        auto c = g.coord(id);
        double v = 0.0;
        for (const auto& b : boxes)
            v += b.value * box_weight(g, b.lo, b.hi, c[0], c[1]);
        field[id] = v;
    }
    return finalize_source(g, std::move(field), slo, shi, allow_mean_correction);
}

SourceData make_source(const Grid& g, std::function<double(double, double)> fn,
                       std::array<double, 2> support_lo,
                       std::array<double, 2> support_hi,
                       bool allow_mean_correction) {
    ScalarField field(g);
    for (int id = 0; id < g.n_total(); ++id) {
        auto c = g.coord(id);
        const double w =
            box_weight(g, support_lo, support_hi, c[0], c[1]);
        field[id] = w > 0.0 ? w * fn(c[0], c[1]) : 0.0;
    }
    return finalize_source(g, std::move(field), support_lo, support_hi,
                           allow_mean_correction);
}

void write_field_csv(std::ostream& os, const ScalarField& u) {
    const Grid& g = *u.grid;
    os.precision(17);
    os << "# dim=" << g.dim();
    for (int a = 0; a < g.dim(); ++a)
        os << " n" << a << "=" << g.n(a) << " lo" << a << "=" << g.lo(a)
           << " hi" << a << "=" << g.hi(a);
    os << "\n";
    os << (g.dim() == 2 ? "x,y,value\n" : "x,value\n");
    for (int id = 0; id < g.n_total(); ++id) {
        auto c = g.coord(id);
        os << c[0];
        if (g.dim() == 2) os << "," << c[1];
        os << "," << u[id] << "\n";
    }
}

void write_field_csv(const std::string& path, const ScalarField& u) {
    std::ofstream os(path);
    if (!os) throw GridError("cannot open " + path);
    write_field_csv(os, u);
}

}  // namespace otd

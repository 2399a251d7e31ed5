#include "wpl/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "wpl/profiles.hpp"

namespace wpl {

namespace {

Vec unit3(double th, double ph) { return Vec{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th), 0.0}; }

Vec sub(const Vec& a, const Vec& b) { return Vec{a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]}; }
Vec cross(const Vec& a, const Vec& b) {
    return Vec{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0], 0.0};
}
double dist(const Vec& a, const Vec& b, int n) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Incremental convex hull of points on S^2. The spherical Delaunay triangles
// are the hull faces and their empty caps give the exact covering radius.
class SphereHull {
public:
    explicit SphereHull(std::vector<Vec>& pts) : P_(pts) {}

    void build() {
        faces_.clear();
        int n = static_cast<int>(P_.size());
        if (n < 4) throw ConstructionError("hull: need at least 4 points");
        int a = 0, b = -1, c = -1, d = -1;
        double best = -1;
        for (int i = 1; i < n; ++i)
            if (double v = dist(P_[a], P_[i], 3); v > best) best = v, b = i;
        best = -1;
        for (int i = 0; i < n; ++i) {
            double v = norm(cross(sub(P_[b], P_[a]), sub(P_[i], P_[a])), 3);
            if (v > best) best = v, c = i;
        }
        best = -1;
        Vec nrm = cross(sub(P_[b], P_[a]), sub(P_[c], P_[a]));
        for (int i = 0; i < n; ++i) {
            double v = std::abs(dot(nrm, sub(P_[i], P_[a]), 3));
            if (v > best) best = v, d = i;
        }
        if (best < 1e-12) throw ConstructionError("hull: degenerate seed");
        for (int q = 0; q < 3; ++q) inner_[q] = (P_[a][q] + P_[b][q] + P_[c][q] + P_[d][q]) / 4.0;
        add_face(a, b, c);
        add_face(a, b, d);
        add_face(a, c, d);
        add_face(b, c, d);
        for (int i = 0; i < n; ++i)
            if (i != a && i != b && i != c && i != d) insert(i);
    }

    void insert(int p) {
        std::vector<int> vis;
        for (int pass = 0; pass < 2 && vis.empty(); ++pass) {
            double eps = pass == 0 ? 1e-13 : -1e-13;
            for (int f = 0; f < static_cast<int>(faces_.size()); ++f)
                if (faces_[f].alive && side(faces_[f], P_[p]) > eps) vis.push_back(f);
        }
        if (vis.empty()) return;
        std::set<std::pair<int, int>> edges;
        for (int f : vis) {
            auto& F = faces_[f];
            edges.insert({F.v[0], F.v[1]});
            edges.insert({F.v[1], F.v[2]});
            edges.insert({F.v[2], F.v[0]});
            F.alive = false;
        }
        for (auto& e : edges)
            if (!edges.count({e.second, e.first})) add_face(e.first, e.second, p);
    }

    // worst face: (chord circumradius, cap center)
    std::pair<double, Vec> worst() const {
        double best = -1;
        Vec c{};
        for (auto& F : faces_) {
            if (!F.alive) continue;
            double r = dist(F.normal, P_[F.v[0]], 3);
            if (r > best) best = r, c = F.normal;
        }
        return {best, c};
    }

private:
    struct Face {
        int v[3];
        Vec normal;
        bool alive = true;
    };

    double side(const Face& F, const Vec& x) const { return dot(F.normal, sub(x, P_[F.v[0]]), 3); }

    void add_face(int a, int b, int c) {
        Face F{{a, b, c}, {}, true};
        Vec nrm = cross(sub(P_[b], P_[a]), sub(P_[c], P_[a]));
        double l = norm(nrm, 3);
        if (l == 0) throw ConstructionError("hull: zero-area face");
        for (int q = 0; q < 3; ++q) nrm[q] /= l;
        if (dot(nrm, sub(inner_, P_[a]), 3) > 0) {
            std::swap(F.v[1], F.v[2]);
            for (int q = 0; q < 3; ++q) nrm[q] = -nrm[q];
        }
        F.normal = nrm;
        faces_.push_back(F);
    }

    std::vector<Vec>& P_;
    std::vector<Face> faces_;
    Vec inner_{};
};

// staggered latitude rings, arc spacing a*theta_delta, ring spacing (sqrt3/2) a theta_delta
std::vector<Vec> ring_seed(double delta, double a) {
    double ang = 2.0 * std::asin(std::min(1.0, delta / 2.0));
    double A = a * ang;
    double B = std::sqrt(3.0) / 2.0 * A;
    int nr = std::max(1, static_cast<int>(std::floor(kPi / B)));
    std::vector<Vec> pts;
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 0; i <= nr; ++i) {
        double th = kPi * i / nr;
        double s = std::sin(th);
        int m = (i == 0 || i == nr) ? 1 : std::max(1, static_cast<int>(std::floor(2.0 * kPi * s / A)));
        double off = std::fmod(i * golden, 1.0);
        for (int j = 0; j < m; ++j) pts.push_back(unit3(th, 2.0 * kPi * (j + off) / m));
    }
    return pts;
}

std::vector<Vec> sphere_set(int k) {
    double delta = std::pow(2.0, -0.5 * k);
    std::vector<Vec> best;
    for (double a : {1.3, 1.4, 1.5, 1.6}) {
        std::vector<Vec> pts = ring_seed(delta, a);
        if (pts.size() < 4) continue;
        SphereHull hull(pts);
        hull.build();
        for (;;) {
            auto [r, c] = hull.worst();
            if (r <= delta) break;
            pts.push_back(c);
            hull.insert(static_cast<int>(pts.size()) - 1);
        }
        if (best.empty() || pts.size() < best.size()) best = pts;
    }
    return best;
}

}  // namespace

int circle_count(int k) {
    double delta = std::pow(2.0, -0.5 * k);
    int m = 3;
    // relative slack: at k = 0 the hexagon has chord exactly 1
    while (2.0 * std::sin(kPi / (m + 1)) >= delta * (1 - 1e-12)) ++m;
    return m;
}

double DirectionSet::min_separation() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dirs.size(); ++i)
        for (std::size_t j = i + 1; j < dirs.size(); ++j) best = std::min(best, dist(dirs[i], dirs[j], n));
    return best;
}

double DirectionSet::cover_radius(const std::vector<Vec>& probes) const {
    double worst = 0;
    for (auto& p : probes) {
        double b = std::numeric_limits<double>::infinity();
        for (auto& d : dirs) b = std::min(b, dist(p, d, n));
        worst = std::max(worst, b);
    }
    return worst;
}

DirectionSet build_direction_set(int n, int k) {
    if (n < 2) throw ParameterError("direction set: n must be >= 2");
    if (k < 0) throw ParameterError("direction set: k must be >= 0");
    if (n > 3) throw UnsupportedError("direction set: construction implemented for n in {2,3}, got n=" + std::to_string(n));
    DirectionSet d;
    d.n = n;
    d.k = k;
    d.delta = std::pow(2.0, -0.5 * k);
    if (n == 2) {
        int m = circle_count(k);
        for (int j = 0; j < m; ++j) {
            double t = 2.0 * kPi * j / m;
            d.dirs.push_back(Vec{std::cos(t), std::sin(t), 0.0, 0.0});
        }
    } else {
        d.dirs = sphere_set(k);
    }
    return d;
}

nlohmann::json to_json(const DirectionSet& d) {
    nlohmann::json dirs = nlohmann::json::array();
    for (auto& v : d.dirs) {
        nlohmann::json row = nlohmann::json::array();
        for (int i = 0; i < d.n; ++i) row.push_back(v[i]);
        dirs.push_back(row);
    }
    return {{"n", d.n}, {"k", d.k}, {"delta", d.delta}, {"dirs", dirs}};
}

DirectionSet direction_set_from_json(const nlohmann::json& j) {
    DirectionSet d;
    d.n = j.at("n").get<int>();
    d.k = j.at("k").get<int>();
    d.delta = std::pow(2.0, -0.5 * d.k);
    if (d.n < 2 || d.n > kMaxDim) throw ParameterError("direction set json: bad n");
    for (auto& row : j.at("dirs")) {
        if (static_cast<int>(row.size()) != d.n) throw ParameterError("direction set json: bad vector length");
        Vec v{};
        for (int i = 0; i < d.n; ++i) v[i] = row[i].get<double>();
        d.dirs.push_back(v);
    }
    return d;
}

std::vector<Vec> probe_mesh(int n, double spacing) {
    std::vector<Vec> out;
    if (n == 2) {
        int m = std::max(8, static_cast<int>(std::ceil(2.0 * kPi / spacing)));
        for (int j = 0; j < m; ++j) {
            // half-step offset so probes avoid the direction angles
            double t = 2.0 * kPi * (j + 0.5) / m;
            out.push_back(Vec{std::cos(t), std::sin(t), 0.0, 0.0});
        }
    } else if (n == 3) {
        int m = std::max(32, static_cast<int>(std::ceil(4.0 * kPi / (spacing * spacing))));
        const double ga = kPi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < m; ++i) {
            double z = 1.0 - 2.0 * (i + 0.5) / m;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            out.push_back(Vec{r * std::cos(ga * i), r * std::sin(ga * i), z, 0.0});
        }
    } else {
        throw UnsupportedError("probe mesh: n in {2,3} only");
    }
    return out;
}

SectorPartition::SectorPartition(DirectionSet dirs, double support_factor) : dirs_(std::move(dirs)) {
    if (dirs_.dirs.empty()) throw ConstructionError("sector partition: empty direction set");
    if (dirs_.n != 2 && dirs_.n != 3) throw UnsupportedError("sector partition: n in {2,3} only");
    R_ = support_factor > 0 ? support_factor : (dirs_.n == 2 ? 0.6 : 1.5);
    if (R_ > 2.0) throw ParameterError("sector partition: support factor must be <= 2");
    build_cells();
    double m = min_denominator(probe_mesh(dirs_.n, dirs_.delta / 16.0));
    if (m < 1e-6)
        throw ConstructionError("sector partition: normalizing denominator " + std::to_string(m) +
                                " below 1e-6 (direction set not maximal?)");
}

void SectorPartition::build_cells() {
    cell_ = std::max(support_radius(), 1e-3);
    cells_per_axis_ = static_cast<int>(std::ceil(2.0 / cell_)) + 1;
    std::size_t total = 1;
    for (int i = 0; i < dirs_.n; ++i) total *= static_cast<std::size_t>(cells_per_axis_);
    cells_.assign(total, {});
    for (int j = 0; j < static_cast<int>(dirs_.size()); ++j) {
        std::size_t key = 0;
        for (int i = 0; i < dirs_.n; ++i) {
            int c = std::clamp(static_cast<int>(std::floor((dirs_.dirs[j][i] + 1.0) / cell_)), 0, cells_per_axis_ - 1);
            key = key * cells_per_axis_ + c;
        }
        cells_[key].push_back(j);
    }
}

void SectorPartition::candidates(const Vec& u, std::vector<int>& out) const {
    out.clear();
    int base[kMaxDim];
    for (int i = 0; i < dirs_.n; ++i)
        base[i] = std::clamp(static_cast<int>(std::floor((u[i] + 1.0) / cell_)), 0, cells_per_axis_ - 1);
    int span = 1;
    for (int i = 0; i < dirs_.n; ++i) span *= 3;
    for (int t = 0; t < span; ++t) {
        int r = t;
        std::size_t key = 0;
        bool ok = true;
        for (int i = 0; i < dirs_.n; ++i) {
            int c = base[i] + (r % 3) - 1;
            r /= 3;
            if (c < 0 || c >= cells_per_axis_) {
                ok = false;
                break;
            }
            key = key * cells_per_axis_ + c;
        }
        if (!ok) continue;
        for (int j : cells_[key]) out.push_back(j);
    }
    std::sort(out.begin(), out.end());
}

double SectorPartition::rho(int nu, const Vec& unit) const {
    return profile::bump(dist(unit, dirs_.dirs[nu], dirs_.n) / support_radius());
}

double SectorPartition::denominator(const Vec& u, std::vector<std::pair<int, double>>& rho_out) const {
    thread_local std::vector<int> cand;
    candidates(u, cand);
    rho_out.clear();
    double s = 0;
    for (int j : cand) {
        double r = rho(j, u);
        if (r > 0) {
            rho_out.push_back({j, r});
            s += r;
        }
    }
    return s;
}

void SectorPartition::active(const Vec& xi, std::vector<std::pair<int, double>>& out) const {
    out.clear();
    double r = norm(xi, dirs_.n);
    if (r == 0) return;
    Vec u{};
    for (int i = 0; i < dirs_.n; ++i) u[i] = xi[i] / r;
    double s = denominator(u, out);
    if (s < 1e-6) throw ConstructionError("sector partition: denominator below 1e-6 at a query point");
    std::size_t w = 0;
    for (auto& e : out) {
        if (e.first == dropped_) continue;
        out[w++] = {e.first, e.second / s};
    }
    out.resize(w);
}

double SectorPartition::chi(int nu, const Vec& xi) const {
    thread_local std::vector<std::pair<int, double>> act;
    active(xi, act);
    for (auto& e : act)
        if (e.first == nu) return e.second;
    return 0.0;
}

double SectorPartition::sum(const Vec& xi) const {
    thread_local std::vector<std::pair<int, double>> act;
    active(xi, act);
    double s = 0;
    for (auto& e : act) s += e.second;
    return s;
}

SectorPartition SectorPartition::with_dropped(int idx) const {
    if (idx < 0 || idx >= static_cast<int>(size())) throw ParameterError("with_dropped: index out of range");
    SectorPartition p = *this;
    p.dropped_ = idx;
    return p;
}

double SectorPartition::min_denominator(const std::vector<Vec>& probes) const {
    std::vector<std::pair<int, double>> tmp;
    double m = std::numeric_limits<double>::infinity();
    for (auto& u : probes) m = std::min(m, denominator(u, tmp));
    return m;
}

SphereRule uniform_circle_rule(int m) {
    if (m < 3) throw ParameterError("circle rule: need at least 3 nodes");
    SphereRule r;
    r.n = 2;
    for (int j = 0; j < m; ++j) {
        double t = 2.0 * kPi * j / m;
        r.nodes.push_back(Vec{std::cos(t), std::sin(t), 0.0, 0.0});
        r.weights.push_back(1.0 / m);
    }
    r.spacing = 2.0 * kPi / m;
    return r;
}

SphereRule sphere_rule_from_directions(const DirectionSet& d) {
    SphereRule r;
    r.n = d.n;
    r.nodes = d.dirs;
    r.weights.assign(d.size(), 1.0 / static_cast<double>(d.size()));
    r.spacing = 2.0 * std::asin(std::min(1.0, d.delta / 2.0));
    return r;
}

SphereRule default_sphere_rule(int n, int k) {
    if (n == 2) return uniform_circle_rule(circle_count(k + 2));
    return sphere_rule_from_directions(build_direction_set(n, k + 2));
}

}  // namespace wpl

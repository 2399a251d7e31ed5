#pragma once

#include <utility>
#include <vector>

#include "json.hpp"

#include "wpl/common.hpp"

namespace wpl {

// maximal delta-separated subset of S^{n-1}, delta = 2^{-k/2}
struct DirectionSet {
    int n = 2;
    int k = 0;
    double delta = 1.0;
    std::vector<Vec> dirs;

    std::size_t size() const { return dirs.size(); }
    double min_separation() const;
    // max over probes of the distance to the nearest direction
    double cover_radius(const std::vector<Vec>& probes) const;
};

DirectionSet build_direction_set(int n, int k);
// count of the uniform circle set: max{m : 2 sin(pi/m) >= delta}
int circle_count(int k);

nlohmann::json to_json(const DirectionSet& d);
DirectionSet direction_set_from_json(const nlohmann::json& j);

// n = 2: equally spaced circle points; n = 3: Fibonacci points. Spacing is the
// approximate nearest-neighbour distance.
std::vector<Vec> probe_mesh(int n, double spacing);

// chi_nu(xi) = rho_nu(xi^) / sum_mu rho_mu(xi^), rho_nu = b(|xi^ - nu| / (R delta))
class SectorPartition {
public:
    SectorPartition() = default;
    // support_factor R; 0 selects the default (0.6 for n = 2, 1.5 for n = 3)
    explicit SectorPartition(DirectionSet dirs, double support_factor = 0.0);

    const DirectionSet& dirs() const { return dirs_; }
    int k() const { return dirs_.k; }
    int n() const { return dirs_.n; }
    std::size_t size() const { return dirs_.size(); }
    double support_factor() const { return R_; }
    double support_radius() const { return R_ * dirs_.delta; }  // chord
    int dropped() const { return dropped_; }

    // (index, chi) for every sector with chi > 0 at xi; empty at xi = 0
    void active(const Vec& xi, std::vector<std::pair<int, double>>& out) const;
    double chi(int nu, const Vec& xi) const;
    double sum(const Vec& xi) const;
    double rho(int nu, const Vec& unit) const;

    // mutation variant: chi of sector idx forced to 0, others untouched
    SectorPartition with_dropped(int idx) const;

    // smallest normalizing denominator seen on a probe mesh
    double min_denominator(const std::vector<Vec>& probes) const;

private:
    void build_cells();
    void candidates(const Vec& u, std::vector<int>& out) const;
    double denominator(const Vec& u, std::vector<std::pair<int, double>>& rho_out) const;

    DirectionSet dirs_;
    double R_ = 0;
    int dropped_ = -1;
    double cell_ = 1;
    int cells_per_axis_ = 1;
    std::vector<std::vector<int>> cells_;
};

// weighted nodes on S^{n-1}, weights sum to 1 (normalized measure)
struct SphereRule {
    int n = 2;
    std::vector<Vec> nodes;
    std::vector<double> weights;
    double spacing = 0;  // largest gap (angle) between a sphere point and the nodes, roughly

    std::size_t size() const { return nodes.size(); }
};

SphereRule uniform_circle_rule(int m);
// uniform refinement of the Theta_{k+2} node set
SphereRule default_sphere_rule(int n, int k);
SphereRule sphere_rule_from_directions(const DirectionSet& d);

}  // namespace wpl

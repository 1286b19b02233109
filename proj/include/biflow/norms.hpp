#pragma once

#include <array>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "biflow/grid.hpp"

namespace biflow {

/// Centers (strided grid subsample) and a dyadic radius ladder used for all
/// ball suprema. Balls are grid-point sets under the periodic Euclidean
/// metric; averages are unweighted sample means.
struct BallFamily {
    GridSpec grid;
    int stride = 4;
    std::vector<std::size_t> centers;                    // flat indices
    std::vector<double> radii;                           // descending dyadic ladder
    std::vector<std::vector<std::array<int, 3>>> offsets;  // per radius, index deltas

    /// Ladder r = R, R/2, ... down to 2*spacing; requires R <= box_length/4
    /// and at least 3 rungs.
    static BallFamily make(const GridSpec& grid, double R, int stride = 4);
};

/// Time-graded sequence of fields on (0, T]: t_0 = 0 < t_1 < ... < t_M = T
/// with geometric grading near 0 (ratio <= 2).
struct Trajectory {
    GridSpec grid;
    std::vector<double> times;
    std::vector<Field> fields;

    void validate() const;
    std::size_t node_count() const { return times.size(); }
    double horizon() const { return times.empty() ? 0.0 : times.back(); }
    /// Index of the node at time t (relative tolerance 1e-9); throws if absent.
    std::size_t node_at(double t) const;
};

/// Graded node times for a horizon T: t_0 = 0, then a geometric ladder from
/// T * max(1e-6, 2^{-(M-1)}) up to T, so the grading ratio never exceeds 2.
std::vector<double> graded_times(double T, int node_count);

Trajectory trajectory_sub(const Trajectory& a, const Trajectory& b);
Trajectory trajectory_scale(double s, const Trajectory& a);
/// Sup over nodes of the sup-norm of a(t_j) - b(t_j).
double trajectory_sup_distance(const Trajectory& a, const Trajectory& b);

struct NormWitness {
    double t = 0.0;                       // time attaining a sup (N_k_inf)
    std::array<double, 3> x{0, 0, 0};     // ball center (carleson components)
    double r = 0.0;                       // ball radius
};

/// Components of the solution norm: total = sum_k N_{k,inf} + N_{k,c}.
struct NormReport {
    std::map<int, double> n_inf;
    std::map<int, double> n_carleson;
    std::map<int, NormWitness> inf_witness;
    std::map<int, NormWitness> carleson_witness;
    double total = 0.0;
    int skipped_balls = 0;
    std::string to_json() const;
};

struct BallScanOptions {
    int stride = 4;
};

struct CarlesonOptions {
    int stride = 4;
    int nodes_per_decade = 16;  // log-uniform midpoint ladder in t
    int decades = 5;            // ladder spans [r^4 * 10^-decades, r^4]
};

/// Classical mean-oscillation seminorm, restricted to ball radii <= R:
/// sup over the family of avg_B |a - avg_B a|. Balls with fewer than 8 grid
/// points are skipped (counted in info->skipped_balls).
struct OscillationInfo {
    NormWitness witness;
    int skipped_balls = 0;
};
double oscillation_bmo(const Field& a, double R, const BallScanOptions& options = {},
                       OscillationInfo* info = nullptr);

/// Carleson-extension local BMO seminorm:
///   sum_{k=1,2} sup_{(x, r<=R)} ( int_0^{r^4} avg_{B(x,r)}
///       t^{(2k-4)/4} |grad^k S(t) a|^2 dy dt )^{1/2}.
double carleson_bmo(const Field& a, double R, const CarlesonOptions& options = {},
                    NormReport* report = nullptr);

/// Solution norm on (0, T]: N_{k,inf} = sup_nodes t^{k/4} sup|grad^k u|;
/// N_{k,c} = sup over balls with r <= T^{1/4} of
/// (int_0^{r^4} avg |grad^k u|^{4/k} dt)^{k/4}, trapezoid on trajectory nodes.
NormReport xt_norm(const Trajectory& u, double T, const BallScanOptions& options = {});

/// Auxiliary norm: sup_t ( |f|_p + t^{1/4} |grad f|_p + t^{1/2} |grad^2 f|_p ).
/// Supported p: 2, 4, the grid dimension, and infinity.
double lpt_norm(const Trajectory& f, double p, double T);

/// Morrey norm: sup over the family of (r^-lambda int_B |a|^p dy)^{1/p}.
double morrey_norm(const Field& a, double p, double lambda,
                   const BallScanOptions& options = {});

/// Thin-film energy int 1/2 |grad^2 u|^2 + sign/4 |grad u|^4 over the torus.
double energy(const Field& u, int sign);

/// Discrete L^p norm of pointwise samples with cell-volume weight; p may be
/// infinity.
double grid_lp(const GridSpec& g, const std::vector<double>& v, double p);

}  // namespace biflow

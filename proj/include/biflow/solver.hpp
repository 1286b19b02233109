#pragma once

#include <string>
#include <utility>
#include <vector>

#include "biflow/grid.hpp"
#include "biflow/norms.hpp"

namespace biflow {

/// Gradient nonlinearity F in div F(grad u).
/// cubic kinds: F(xi) = sign |xi|^2 xi; power: F(xi) = sign |xi|^{p-2} xi.
struct Nonlinearity {
    enum class Kind { CubicCoercive, CubicNoncoercive, Power };
    Kind kind = Kind::CubicCoercive;
    double p = 4.0;   // power exponent (> 2), cubic corresponds to p = 4
    int sigma = 1;    // sign for the power kind

    int sign() const {
        switch (kind) {
            case Kind::CubicCoercive: return 1;
            case Kind::CubicNoncoercive: return -1;
            case Kind::Power: return sigma;
        }
        return 1;
    }
    bool cubic() const { return kind != Kind::Power; }

    static Nonlinearity cubic_coercive() { return {Kind::CubicCoercive, 4.0, 1}; }
    static Nonlinearity cubic_noncoercive() { return {Kind::CubicNoncoercive, 4.0, -1}; }
    static Nonlinearity power(double p, int sigma);
};

struct SolverConfig {
    int time_nodes = 64;            // graded trajectory nodes (>= 16)
    int max_picard_iters = 20;
    double picard_tol = 1e-6;       // on the X_T norm of successive differences
    bool dealias = true;
    double blowup_threshold = 1e3;  // on t^{1/4} |grad u|_inf
    double smallness_budget = 0.1;  // budget for |S(.)u0|_{X_T}
    int diag_stride = 4;            // ball-family stride for diagnostic norms

    int etd_steps = 1024;           // >= 1000
    double etd_richardson_tol = 1e-6;
    int etd_max_halvings = 6;

    void validate() const;
};

enum class Termination { Converged, MaxIters, Blowup };

std::string to_string(Termination t);

struct SolveDiagnostics {
    std::vector<double> iterate_norms;  // X_T norm per iterate
    std::vector<double> diff_norms;     // X_T norm of successive differences
    std::vector<double> sup_diffs;      // sup-norm over nodes of successive differences
    std::vector<double> ratios;         // diff_norms[i] / diff_norms[i-1]
    Termination termination = Termination::Converged;
    int iterations = 0;
    double extension_norm = 0.0;        // |S(.)u0|_{X_T}
    bool budget_exceeded = false;
    std::string to_json() const;
};

/// Pointwise application of F to a gradient field, dealiased on input and
/// output when enabled.
TensorField evaluate_F(const TensorField& grad, const Nonlinearity& nl, bool dealias = true);

/// Trajectory of the free flow S(t_j) u0 on the given nodes.
Trajectory semigroup_trajectory(const Field& u0, const std::vector<double>& times);

/// Duhamel integral int_0^t S(t-s) div F(grad u(s)) ds on the trajectory's
/// graded nodes. Each panel integrates the semigroup factor exactly against
/// linear-in-s node data (exponential product trapezoid), so the stiff
/// exp(-(t-s)|k|^4) factor costs no quadrature error.
Field duhamel(const Trajectory& source, double t, const Nonlinearity& nl, bool dealias = true);

/// Picard fixed point u_1 = S(t)u0, u_{j+1} = u_1 + G(u_j): iterates on the
/// shared graded grid until the successive difference (X_T norm and node
/// sup-norm) falls below picard_tol.
std::pair<Trajectory, SolveDiagnostics> picard_solve(const Field& u0, double T,
                                                     const Nonlinearity& nl,
                                                     const SolverConfig& cfg);

struct EtdResult {
    Trajectory trajectory;
    Termination termination = Termination::Converged;
    double blowup_time = 0.0;
    int steps_used = 0;
};

/// First-order exponential time differencing oracle with Richardson
/// step-halving until two resolutions agree to etd_richardson_tol in
/// sup-norm at t = T. Fields exceeding sup-norm 1e6 terminate as blow-up.
EtdResult etd_solve(const Field& u0, double T, const Nonlinearity& nl,
                    const SolverConfig& cfg);

/// As etd_solve but with a fixed step count and an optional per-step
/// observer (called after each step with (t, field)).
EtdResult etd_run(const Field& u0, double T, const Nonlinearity& nl, int steps,
                  const SolverConfig& cfg,
                  const std::function<void(double, const Field&)>& observer = {});

/// Psi(f,g,h)(t) = int_0^t S(t-s) div((grad f . grad g) grad h)(s) ds,
/// same quadrature as `duhamel`.
Field trilinear_psi(const Trajectory& f, const Trajectory& g, const Trajectory& h,
                    double t, bool dealias = true);

/// Solves the perturbation equation for w = u - v by direct iteration
///   w <- S(t)w0 + sign [ L_{u,u} w - B_u(w,w) + Psi(w,w,w) ],
/// with L and B assembled from the trilinear operator. Divergence raises
/// SmallnessViolation.
std::pair<Trajectory, SolveDiagnostics> perturbation_solve(const Trajectory& u,
                                                           const Field& w0,
                                                           const Nonlinearity& nl,
                                                           const SolverConfig& cfg);

struct BlowupReport {
    bool detected = false;
    double t_star = 0.0;
    double threshold = 0.0;
    double t_max = 0.0;
    std::vector<double> times;
    std::vector<double> metric;  // t^{1/4} |grad u(t)|_inf
    std::string to_json() const;
};

/// Runs the ETD oracle over geometrically extended horizons and reports the
/// first crossing of blowup_threshold by t^{1/4} |grad u|_inf, or that no
/// blow-up was detected up to t_max. Both outcomes are valid reports.
BlowupReport blowup_probe(const Field& u0, const Nonlinearity& nl, const SolverConfig& cfg,
                          double t_max = 100.0);

}  // namespace biflow

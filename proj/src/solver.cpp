#include "biflow/solver.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "biflow/errors.hpp"
#include "biflow/fft.hpp"
#include "biflow/numerics.hpp"

namespace biflow {

namespace {

using cvec = std::vector<std::complex<double>>;

cvec zero_spectral(const GridSpec& g) {
    return cvec(fft::spectral_size(g.dim, g.points_per_axis));
}

// Zeroes coefficients beyond the N/3 cutoff on a raw spectral array.
void dealias_spectral(const GridSpec& g, cvec& c) {
    Field f = Field::from_spectral(g, std::move(c));
    c = dealias(f).spectral();
}

std::vector<Field> gradient_fields(const Field& u, bool do_dealias) {
    std::vector<Field> grads;
    grads.reserve(u.grid().dim);
    for (int d = 0; d < u.grid().dim; ++d) {
        std::array<int, 3> alpha{0, 0, 0};
        alpha[d] = 1;
        Field g = derivative(u, alpha);
        grads.push_back(do_dealias ? dealias(g) : g);
    }
    return grads;
}

// Spectral array of div q for a vector of physical-space components,
// dealiasing each component first when enabled.
cvec divergence_spectral(const GridSpec& g, std::vector<std::vector<double>>& q,
                         bool do_dealias) {
    const auto kv = gradient_wavevectors(g);
    cvec acc = zero_spectral(g);
    cvec comp(acc.size());
    for (int d = 0; d < g.dim; ++d) {
        fft::forward(g.dim, g.points_per_axis, q[d].data(), comp.data());
        if (do_dealias) dealias_spectral(g, comp);
        for (std::size_t m = 0; m < acc.size(); ++m)
            acc[m] += std::complex<double>(0.0, kv[m][d]) * comp[m];
    }
    return acc;
}

// Integrand of the combined perturbation nonlinearity at one node:
//   sign * [ (2 p_uw - p_ww) grad u + (p_uu - 2 p_uw + p_ww) grad w ],
// i.e. the trilinear expansion of G(u) - G(u - w). Returned as the spectral
// divergence source.
cvec perturbation_source(const Field& u, const Field& w, int sign, bool do_dealias) {
    const GridSpec& g = u.grid();
    const auto gu = gradient_fields(u, do_dealias);
    const auto gw = gradient_fields(w, do_dealias);
    const std::size_t n = g.point_count();
    std::vector<double> puu(n, 0.0), puw(n, 0.0), pww(n, 0.0);
    for (int d = 0; d < g.dim; ++d) {
        const auto& a = gu[d].values();
        const auto& b = gw[d].values();
        for (std::size_t i = 0; i < n; ++i) {
            puu[i] += a[i] * a[i];
            puw[i] += a[i] * b[i];
            pww[i] += b[i] * b[i];
        }
    }
    std::vector<std::vector<double>> q(g.dim, std::vector<double>(n));
    for (int d = 0; d < g.dim; ++d) {
        const auto& a = gu[d].values();
        const auto& b = gw[d].values();
        for (std::size_t i = 0; i < n; ++i) {
            const double cu = 2.0 * puw[i] - pww[i];
            const double cw = puu[i] - 2.0 * puw[i] + pww[i];
            q[d][i] = sign * (cu * a[i] + cw * b[i]);
        }
    }
    return divergence_spectral(g, q, do_dealias);
}

// div((grad f . grad g) grad h) as a spectral source.
cvec trilinear_source(const Field& f, const Field& g_, const Field& h, bool do_dealias) {
    const GridSpec& g = f.grid();
    const auto gf = gradient_fields(f, do_dealias);
    const auto gg = gradient_fields(g_, do_dealias);
    const auto gh = gradient_fields(h, do_dealias);
    const std::size_t n = g.point_count();
    std::vector<double> p(n, 0.0);
    for (int d = 0; d < g.dim; ++d) {
        const auto& a = gf[d].values();
        const auto& b = gg[d].values();
        for (std::size_t i = 0; i < n; ++i) p[i] += a[i] * b[i];
    }
    std::vector<std::vector<double>> q(g.dim, std::vector<double>(n));
    for (int d = 0; d < g.dim; ++d) {
        const auto& c = gh[d].values();
        for (std::size_t i = 0; i < n; ++i) q[d][i] = p[i] * c[i];
    }
    return divergence_spectral(g, q, do_dealias);
}

// div F(grad u) as a spectral source. Cubic kinds route through the
// trilinear integrand so the solution identity u = S u0 + sign*Psi(u,u,u)
// holds bit-exactly.
cvec div_F_spectral(const Field& u, const Nonlinearity& nl, bool do_dealias) {
    const GridSpec& g = u.grid();
    if (nl.cubic()) {
        cvec src = trilinear_source(u, u, u, do_dealias);
        if (nl.sign() < 0)
            for (auto& c : src) c = -c;
        return src;
    }
    const auto grads = gradient_fields(u, do_dealias);
    const std::size_t n = g.point_count();
    std::vector<double> mag2(n, 0.0);
    for (int d = 0; d < g.dim; ++d) {
        const auto& a = grads[d].values();
        for (std::size_t i = 0; i < n; ++i) mag2[i] += a[i] * a[i];
    }
    std::vector<std::vector<double>> q(g.dim, std::vector<double>(n));
    const double expo = 0.5 * (nl.p - 2.0);
    for (int d = 0; d < g.dim; ++d) {
        const auto& a = grads[d].values();
        for (std::size_t i = 0; i < n; ++i)
            q[d][i] = nl.sigma * std::pow(mag2[i], expo) * a[i];
    }
    return divergence_spectral(g, q, do_dealias);
}

// Exponential product-trapezoid over the trajectory panels: the semigroup
// factor is integrated exactly against linear-in-s node data, so the stiff
// exp(-(t-s)|k|^4) costs no quadrature error (plain trapezoid on the same
// nodes cannot resolve it near s = t).
cvec duhamel_spectral(const GridSpec& g, const std::vector<double>& times,
                      const std::vector<cvec>& sources, double t,
                      const std::vector<double>& kappa) {
    cvec acc = zero_spectral(g);
    if (!(t > 0.0)) return acc;
    if (times.back() < t * (1.0 - 1e-9))
        throw DomainError("duhamel: trajectory does not cover (0, t]");

    const std::size_t modes = acc.size();
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        const double s0 = times[i];
        if (s0 >= t * (1.0 - 1e-15)) break;
        const double s1 = times[i + 1];
        const bool partial = s1 > t;
        const double h = (partial ? t : s1) - s0;
        if (!(h > 0.0)) continue;
        const double lerp_w = partial ? (t - s0) / (s1 - s0) : 1.0;
        const cvec& f0 = sources[i];
        const cvec& f1 = sources[i + 1];
        const double t_end = partial ? t : s1;
        for (std::size_t m = 0; m < modes; ++m) {
            const double kap = kappa[m];
            const auto [A, B] = exp_panel_weights(h * kap);
            const double E = std::exp(-(t - t_end) * kap);
            const std::complex<double> fe =
                partial ? f0[m] + lerp_w * (f1[m] - f0[m]) : f1[m];
            acc[m] += E * h * (A * f0[m] + B * fe);
        }
        if (partial) break;
    }
    return acc;
}

Field semigroup_node(const Field& u0, double t, const std::vector<double>& kappa) {
    if (t == 0.0) return u0;
    cvec c = u0.spectral();
    for (std::size_t m = 0; m < c.size(); ++m) c[m] *= std::exp(-t * kappa[m]);
    return Field::from_spectral(u0.grid(), std::move(c));
}

}  // namespace

Nonlinearity Nonlinearity::power(double p, int sigma) {
    if (!(p > 2.0)) throw ConfigError("Nonlinearity::power: p must be > 2");
    if (sigma != 1 && sigma != -1) throw ConfigError("Nonlinearity::power: sigma must be +-1");
    return {Kind::Power, p, sigma};
}

void SolverConfig::validate() const {
    if (time_nodes < 16) throw ConfigError("SolverConfig: time_nodes must be >= 16");
    if (!(picard_tol > 0.0)) throw ConfigError("SolverConfig: picard_tol must be > 0");
    if (!(blowup_threshold > 0.0)) throw ConfigError("SolverConfig: blowup_threshold must be > 0");
    if (max_picard_iters < 1) throw ConfigError("SolverConfig: max_picard_iters must be >= 1");
    if (!(smallness_budget > 0.0)) throw ConfigError("SolverConfig: smallness_budget must be > 0");
    if (diag_stride < 1) throw ConfigError("SolverConfig: diag_stride must be >= 1");
    if (etd_steps < 1000) throw ConfigError("SolverConfig: etd_steps must be >= 1000");
    if (etd_max_halvings < 0) throw ConfigError("SolverConfig: etd_max_halvings must be >= 0");
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::Converged: return "converged";
        case Termination::MaxIters: return "max_iters";
        case Termination::Blowup: return "blowup";
    }
    return "unknown";
}

std::string SolveDiagnostics::to_json() const {
    nlohmann::json j;
    j["iterate_norms"] = iterate_norms;
    j["diff_norms"] = diff_norms;
    j["sup_diffs"] = sup_diffs;
    j["ratios"] = ratios;
    j["termination"] = to_string(termination);
    j["iterations"] = iterations;
    j["extension_norm"] = extension_norm;
    j["budget_exceeded"] = budget_exceeded;
    return j.dump(2);
}

TensorField evaluate_F(const TensorField& grad, const Nonlinearity& nl, bool do_dealias) {
    if (grad.order != 1) throw DomainError("evaluate_F: gradient tensor must have order 1");
    const GridSpec& g = grad.grid;
    std::vector<const std::vector<double>*> comps;
    std::vector<Field> dealiased;
    for (const Field& c : grad.components)
        dealiased.push_back(do_dealias ? dealias(c) : c);
    for (const Field& c : dealiased) comps.push_back(&c.values());

    const std::size_t n = g.point_count();
    std::vector<double> mag2(n, 0.0);
    for (int d = 0; d < g.dim; ++d)
        for (std::size_t i = 0; i < n; ++i) mag2[i] += (*comps[d])[i] * (*comps[d])[i];

    TensorField out;
    out.grid = g;
    out.order = 1;
    for (int d = 0; d < g.dim; ++d) {
        std::vector<double> f(n);
        if (nl.cubic()) {
            const double s = nl.sign();
            for (std::size_t i = 0; i < n; ++i) f[i] = s * mag2[i] * (*comps[d])[i];
        } else {
            const double expo = 0.5 * (nl.p - 2.0);
            for (std::size_t i = 0; i < n; ++i)
                f[i] = nl.sigma * std::pow(mag2[i], expo) * (*comps[d])[i];
        }
        Field fc = Field::from_values(g, std::move(f));
        out.components.push_back(do_dealias ? dealias(fc) : fc);
    }
    return out;
}

Trajectory semigroup_trajectory(const Field& u0, const std::vector<double>& times) {
    Trajectory traj;
    traj.grid = u0.grid();
    traj.times = times;
    const auto kappa = kappa4_table(u0.grid());
    traj.fields.reserve(times.size());
    for (double t : times) traj.fields.push_back(semigroup_node(u0, t, kappa));
    return traj;
}

Field duhamel(const Trajectory& source, double t, const Nonlinearity& nl, bool do_dealias) {
    source.validate();
    if (!(t > 0.0)) return Field::zero(source.grid);
    if (source.horizon() < t * (1.0 - 1e-9))
        throw DomainError("duhamel: trajectory does not cover (0, t]");
    const auto kappa = kappa4_table(source.grid);
    std::vector<cvec> sources;
    sources.reserve(source.node_count());
    for (const Field& f : source.fields)
        sources.push_back(div_F_spectral(f, nl, do_dealias));
    return Field::from_spectral(source.grid,
                                duhamel_spectral(source.grid, source.times, sources, t, kappa));
}

std::pair<Trajectory, SolveDiagnostics> picard_solve(const Field& u0, double T,
                                                     const Nonlinearity& nl,
                                                     const SolverConfig& cfg) {
    cfg.validate();
    const GridSpec& g = u0.grid();
    const auto kappa = kappa4_table(g);
    const auto times = graded_times(T, cfg.time_nodes);
    const BallScanOptions scan{cfg.diag_stride};

    Trajectory u1 = semigroup_trajectory(u0, times);
    SolveDiagnostics diag;
    diag.extension_norm = xt_norm(u1, T, scan).total;
    diag.budget_exceeded = diag.extension_norm > cfg.smallness_budget;
    diag.iterate_norms.push_back(diag.extension_norm);

    Trajectory u = u1;
    diag.termination = Termination::MaxIters;
    for (int iter = 1; iter <= cfg.max_picard_iters; ++iter) {
        diag.iterations = iter;
        std::vector<cvec> sources;
        sources.reserve(u.node_count());
        for (const Field& f : u.fields) sources.push_back(div_F_spectral(f, nl, cfg.dealias));

        Trajectory next;
        next.grid = g;
        next.times = times;
        next.fields.reserve(times.size());
        for (std::size_t j = 0; j < times.size(); ++j) {
            if (times[j] == 0.0) {
                next.fields.push_back(u1.fields[j]);
                continue;
            }
            Field gj = Field::from_spectral(
                g, duhamel_spectral(g, times, sources, times[j], kappa));
            next.fields.push_back(u1.fields[j] + gj);
        }

        const Trajectory dtraj = trajectory_sub(next, u);
        const double diff_x = xt_norm(dtraj, T, scan).total;
        const double diff_sup = trajectory_sup_distance(next, u);
        const NormReport next_norm = xt_norm(next, T, scan);
        diag.diff_norms.push_back(diff_x);
        diag.sup_diffs.push_back(diff_sup);
        diag.iterate_norms.push_back(next_norm.total);
        if (diag.diff_norms.size() >= 2) {
            const double prev = diag.diff_norms[diag.diff_norms.size() - 2];
            diag.ratios.push_back(prev > 0.0 ? diff_x / prev
                                             : (diff_x > 0.0 ? INFINITY : 0.0));
        }
        u = std::move(next);

        if (next_norm.n_inf.at(1) > cfg.blowup_threshold) {
            diag.termination = Termination::Blowup;
            break;
        }
        if (std::max(diff_x, diff_sup) < cfg.picard_tol) {
            diag.termination = Termination::Converged;
            break;
        }
    }
    return {std::move(u), std::move(diag)};
}

EtdResult etd_run(const Field& u0, double T, const Nonlinearity& nl, int steps,
                  const SolverConfig& cfg,
                  const std::function<void(double, const Field&)>& observer) {
    if (!(T > 0.0)) throw DomainError("etd_run: T must be > 0");
    const GridSpec& g = u0.grid();
    const auto kappa = kappa4_table(g);
    const double dt = T / steps;

    std::vector<double> decay(kappa.size()), phi(kappa.size());
    for (std::size_t m = 0; m < kappa.size(); ++m) {
        decay[m] = std::exp(-dt * kappa[m]);
        phi[m] = dt * etd_phi1(-dt * kappa[m]);
    }

    // Capture the graded ladder, ceil-snapped to step multiples (ceiling
    // preserves the <= 2 grading ratio).
    std::vector<long> capture_steps;
    for (double t : graded_times(T, std::max(16, cfg.time_nodes))) {
        const long s = static_cast<long>(std::ceil(t / dt - 1e-9));
        if (s >= 1 && s <= steps && (capture_steps.empty() || s > capture_steps.back()))
            capture_steps.push_back(s);
    }
    if (capture_steps.empty() || capture_steps.back() != steps) capture_steps.push_back(steps);

    EtdResult result;
    result.steps_used = steps;
    result.trajectory.grid = g;
    result.trajectory.times.push_back(0.0);
    result.trajectory.fields.push_back(u0);

    cvec c = u0.spectral();
    Field current = u0;
    std::size_t next_cap = 0;
    for (long m = 1; m <= steps; ++m) {
        cvec src = div_F_spectral(current, nl, cfg.dealias);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = decay[i] * c[i] + phi[i] * src[i];
        const double t = dt * m;
        current = Field::from_spectral(g, c);
        if (observer) observer(t, current);
        if (current.sup_norm() > 1e6) {
            result.termination = Termination::Blowup;
            result.blowup_time = t;
            return result;
        }
        if (next_cap < capture_steps.size() && m == capture_steps[next_cap]) {
            result.trajectory.times.push_back(t);
            result.trajectory.fields.push_back(current);
            ++next_cap;
        }
    }
    return result;
}

EtdResult etd_solve(const Field& u0, double T, const Nonlinearity& nl,
                    const SolverConfig& cfg) {
    cfg.validate();
    int steps = cfg.etd_steps;
    EtdResult prev = etd_run(u0, T, nl, steps, cfg);
    if (prev.termination == Termination::Blowup) return prev;
    for (int halving = 0; halving < cfg.etd_max_halvings; ++halving) {
        steps *= 2;
        EtdResult cur = etd_run(u0, T, nl, steps, cfg);
        if (cur.termination == Termination::Blowup) return cur;
        const double d =
            (prev.trajectory.fields.back() - cur.trajectory.fields.back()).sup_norm();
        if (d <= cfg.etd_richardson_tol) return cur;
        prev = std::move(cur);
    }
    throw ResolutionError("etd_solve: step-halving budget exceeded without convergence");
}

Field trilinear_psi(const Trajectory& f, const Trajectory& g_, const Trajectory& h,
                    double t, bool do_dealias) {
    f.validate();
    if (f.times != g_.times || f.times != h.times || !(f.grid == g_.grid) ||
        !(f.grid == h.grid))
        throw DomainError("trilinear_psi: trajectories must share grid and nodes");
    if (!(t > 0.0)) return Field::zero(f.grid);
    if (f.horizon() < t * (1.0 - 1e-9))
        throw DomainError("trilinear_psi: trajectory does not cover (0, t]");
    const auto kappa = kappa4_table(f.grid);
    std::vector<cvec> sources;
    sources.reserve(f.node_count());
    for (std::size_t j = 0; j < f.node_count(); ++j)
        sources.push_back(trilinear_source(f.fields[j], g_.fields[j], h.fields[j], do_dealias));
    return Field::from_spectral(f.grid,
                                duhamel_spectral(f.grid, f.times, sources, t, kappa));
}

std::pair<Trajectory, SolveDiagnostics> perturbation_solve(const Trajectory& u,
                                                           const Field& w0,
                                                           const Nonlinearity& nl,
                                                           const SolverConfig& cfg) {
    cfg.validate();
    if (!nl.cubic())
        throw ConfigError("perturbation_solve: requires a cubic nonlinearity");
    u.validate();
    if (!(u.grid == w0.grid())) throw DomainError("perturbation_solve: grid mismatch");
    const GridSpec& g = u.grid;
    const double T = u.horizon();
    const auto kappa = kappa4_table(g);
    const BallScanOptions scan{cfg.diag_stride};
    const int sign = nl.sign();

    Trajectory z = semigroup_trajectory(w0, u.times);
    SolveDiagnostics diag;
    diag.extension_norm = xt_norm(z, T, scan).total;
    diag.budget_exceeded = diag.extension_norm > 0.5 * cfg.smallness_budget;
    diag.iterate_norms.push_back(diag.extension_norm);

    Trajectory w = z;
    diag.termination = Termination::MaxIters;
    for (int iter = 1; iter <= cfg.max_picard_iters; ++iter) {
        diag.iterations = iter;
        std::vector<cvec> sources;
        sources.reserve(u.node_count());
        for (std::size_t j = 0; j < u.node_count(); ++j)
            sources.push_back(perturbation_source(u.fields[j], w.fields[j], sign, cfg.dealias));

        Trajectory next;
        next.grid = g;
        next.times = u.times;
        next.fields.reserve(u.times.size());
        for (std::size_t j = 0; j < u.times.size(); ++j) {
            if (u.times[j] == 0.0) {
                next.fields.push_back(z.fields[j]);
                continue;
            }
            Field nj = Field::from_spectral(
                g, duhamel_spectral(g, u.times, sources, u.times[j], kappa));
            next.fields.push_back(z.fields[j] + nj);
        }

        const double diff_x = xt_norm(trajectory_sub(next, w), T, scan).total;
        const double diff_sup = trajectory_sup_distance(next, w);
        const double norm_next = xt_norm(next, T, scan).total;
        diag.diff_norms.push_back(diff_x);
        diag.sup_diffs.push_back(diff_sup);
        diag.iterate_norms.push_back(norm_next);
        if (diag.diff_norms.size() >= 2) {
            const double prev = diag.diff_norms[diag.diff_norms.size() - 2];
            diag.ratios.push_back(prev > 0.0 ? diff_x / prev
                                             : (diff_x > 0.0 ? INFINITY : 0.0));
        }
        w = std::move(next);

        if (!std::isfinite(norm_next) || norm_next > 1e3)
            throw SmallnessViolation("perturbation_solve: iteration diverged");
        if (diag.ratios.size() >= 3) {
            const auto& r = diag.ratios;
            if (r[r.size() - 1] > 1.0 && r[r.size() - 2] > 1.0 && r[r.size() - 3] > 1.0)
                throw SmallnessViolation("perturbation_solve: contraction ratios exceed 1");
        }
        if (std::max(diff_x, diff_sup) < cfg.picard_tol) {
            diag.termination = Termination::Converged;
            break;
        }
    }
    return {std::move(w), std::move(diag)};
}

std::string BlowupReport::to_json() const {
    nlohmann::json j;
    j["detected"] = detected;
    if (detected) j["t_star"] = t_star;
    j["threshold"] = threshold;
    j["t_max"] = t_max;
    j["times"] = times;
    j["metric"] = metric;
    return j.dump(2);
}

BlowupReport blowup_probe(const Field& u0, const Nonlinearity& nl, const SolverConfig& cfg,
                          double t_max) {
    cfg.validate();
    if (!(t_max > 0.0)) throw DomainError("blowup_probe: t_max must be > 0");
    BlowupReport report;
    report.threshold = cfg.blowup_threshold;
    report.t_max = t_max;

    // Geometric horizon windows, chaining the state; crossing times are
    // reported at observer samples (qualitative resolution is all the
    // amplitude sweep needs).
    Field state = u0;
    double t_base = 0.0;
    double window = std::min(0.01, t_max);
    while (t_base < t_max && !report.detected) {
        const double wlen = std::min(window, t_max - t_base);
        const int steps = cfg.etd_steps;
        const int sample_every = std::max(1, steps / 16);
        auto observer = [&](double t_local, const Field& f) {
            const long step = std::lround(t_local / (wlen / steps));
            if (step % sample_every != 0 && t_local < wlen) return;
            const double t = t_base + t_local;
            double sup_grad = 0.0;
            for (double v : pointwise_magnitude(derivative_tensor(f, 1)))
                sup_grad = std::max(sup_grad, v);
            const double metric = std::pow(t, 0.25) * sup_grad;
            report.times.push_back(t);
            report.metric.push_back(metric);
            if (!report.detected && metric > cfg.blowup_threshold) {
                report.detected = true;
                report.t_star = t;
            }
        };
        EtdResult res = etd_run(state, wlen, nl, steps, cfg, observer);
        if (res.termination == Termination::Blowup && !report.detected) {
            report.detected = true;
            report.t_star = t_base + res.blowup_time;
        }
        if (report.detected) break;
        state = res.trajectory.fields.back();
        t_base += wlen;
        window *= 2.0;
    }
    return report;
}

}  // namespace biflow

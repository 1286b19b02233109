#include "biflow/norms.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "biflow/errors.hpp"

namespace biflow {

namespace {

constexpr int kMinBallPoints = 8;

std::array<int, 3> axis_indices(const GridSpec& g, std::size_t flat) {
    std::array<int, 3> idx{0, 0, 0};
    for (int d = g.dim - 1; d >= 0; --d) {
        idx[d] = static_cast<int>(flat % g.points_per_axis);
        flat /= g.points_per_axis;
    }
    return idx;
}

std::size_t wrapped_flat(const GridSpec& g, const std::array<int, 3>& center,
                         const std::array<int, 3>& delta) {
    const int n = g.points_per_axis;
    std::size_t flat = 0;
    for (int d = 0; d < g.dim; ++d) {
        int i = (center[d] + delta[d]) % n;
        if (i < 0) i += n;
        flat = flat * n + static_cast<std::size_t>(i);
    }
    return flat;
}

// Mean of v over the ball (center, offsets).
double ball_mean(const GridSpec& g, const std::vector<double>& v,
                 const std::array<int, 3>& center,
                 const std::vector<std::array<int, 3>>& offsets) {
    double sum = 0.0;
    for (const auto& d : offsets) sum += v[wrapped_flat(g, center, d)];
    return sum / static_cast<double>(offsets.size());
}

}  // namespace

BallFamily BallFamily::make(const GridSpec& grid, double R, int stride) {
    if (!(R > 0.0)) throw DomainError("BallFamily: R must be positive");
    if (R > grid.box_length / 4.0 * (1.0 + 1e-12))
        throw DomainError("BallFamily: R must be <= box_length / 4");
    if (stride < 1) throw ConfigError("BallFamily: stride must be >= 1");

    BallFamily fam;
    fam.grid = grid;
    fam.stride = stride;

    const double h = grid.spacing();
    for (double r = R; r >= 2.0 * h * (1.0 - 1e-12); r /= 2.0) fam.radii.push_back(r);
    if (fam.radii.size() < 3)
        throw ConfigError("BallFamily: fewer than 3 radii in the ladder (R too small for grid)");

    for (double r : fam.radii) {
        std::vector<std::array<int, 3>> offs;
        const int dmax = static_cast<int>(std::floor(r / h * (1.0 + 1e-12)));
        const double r2 = (r / h) * (r / h) * (1.0 + 1e-12);
        std::array<int, 3> d{0, 0, 0};
        const int lo1 = grid.dim >= 2 ? -dmax : 0, hi1 = grid.dim >= 2 ? dmax : 0;
        const int lo2 = grid.dim >= 3 ? -dmax : 0, hi2 = grid.dim >= 3 ? dmax : 0;
        for (int a = -dmax; a <= dmax; ++a)
            for (int b = lo1; b <= hi1; ++b)
                for (int c = lo2; c <= hi2; ++c) {
                    const double dist2 = double(a) * a + double(b) * b + double(c) * c;
                    if (dist2 <= r2) {
                        d[0] = a;
                        d[1] = b;
                        d[2] = c;
                        offs.push_back(d);
                    }
                }
        fam.offsets.push_back(std::move(offs));
    }

    const int n = grid.points_per_axis;
    const int n0 = grid.dim >= 2 ? n : 1;
    const int n1 = grid.dim >= 3 ? n : 1;
    for (int a = 0; a < n; a += stride)
        for (int b = 0; b < n0; b += (grid.dim >= 2 ? stride : 1))
            for (int c = 0; c < n1; c += (grid.dim >= 3 ? stride : 1)) {
                std::size_t flat = static_cast<std::size_t>(a);
                if (grid.dim >= 2) flat = flat * n + b;
                if (grid.dim >= 3) flat = flat * n + c;
                fam.centers.push_back(flat);
            }
    return fam;
}

void Trajectory::validate() const {
    if (times.size() != fields.size() || times.empty())
        throw DomainError("Trajectory: times/fields size mismatch");
    if (times.front() != 0.0) throw DomainError("Trajectory: times must start at 0");
    for (std::size_t j = 1; j < times.size(); ++j) {
        if (!(times[j] > times[j - 1])) throw DomainError("Trajectory: times must ascend");
        if (times[j - 1] > 0.0 && times[j] / times[j - 1] > 2.0 * (1.0 + 1e-12))
            throw DomainError("Trajectory: grading ratio exceeds 2");
        if (!(fields[j].grid() == grid)) throw DomainError("Trajectory: grid mismatch");
    }
    if (!fields.empty() && !(fields[0].grid() == grid))
        throw DomainError("Trajectory: grid mismatch");
}

std::size_t Trajectory::node_at(double t) const {
    for (std::size_t j = 0; j < times.size(); ++j)
        if (std::abs(times[j] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return j;
    throw DomainError("Trajectory: no node at requested time");
}

std::vector<double> graded_times(double T, int node_count) {
    if (!(T > 0.0)) throw DomainError("graded_times: T must be positive");
    if (node_count < 16) throw ConfigError("graded_times: need at least 16 nodes");
    const int m = node_count;  // nodes t_1..t_m, plus t_0 = 0
    const double frac = std::max(1e-6, std::pow(2.0, -(m - 1)));
    const double t1 = T * frac;
    std::vector<double> times(m + 1);
    times[0] = 0.0;
    const double q = std::pow(T / t1, 1.0 / (m - 1));
    for (int j = 1; j <= m; ++j) times[j] = t1 * std::pow(q, j - 1);
    times[m] = T;  // exact endpoint
    return times;
}

Trajectory trajectory_sub(const Trajectory& a, const Trajectory& b) {
    if (a.times != b.times) throw DomainError("trajectory_sub: node mismatch");
    Trajectory out;
    out.grid = a.grid;
    out.times = a.times;
    out.fields.reserve(a.fields.size());
    for (std::size_t j = 0; j < a.fields.size(); ++j)
        out.fields.push_back(a.fields[j] - b.fields[j]);
    return out;
}

Trajectory trajectory_scale(double s, const Trajectory& a) {
    Trajectory out;
    out.grid = a.grid;
    out.times = a.times;
    out.fields.reserve(a.fields.size());
    for (const Field& f : a.fields) out.fields.push_back(s * f);
    return out;
}

double trajectory_sup_distance(const Trajectory& a, const Trajectory& b) {
    if (a.times != b.times) throw DomainError("trajectory_sup_distance: node mismatch");
    double m = 0.0;
    for (std::size_t j = 0; j < a.fields.size(); ++j)
        m = std::max(m, (a.fields[j] - b.fields[j]).sup_norm());
    return m;
}

std::string NormReport::to_json() const {
    nlohmann::json j;
    for (const auto& [k, v] : n_inf) {
        j["n_inf"][std::to_string(k)] = v;
        const auto it = inf_witness.find(k);
        if (it != inf_witness.end()) j["n_inf_argmax_t"][std::to_string(k)] = it->second.t;
    }
    for (const auto& [k, v] : n_carleson) {
        j["n_carleson"][std::to_string(k)] = v;
        const auto it = carleson_witness.find(k);
        if (it != carleson_witness.end()) {
            j["n_carleson_argmax"][std::to_string(k)] = {
                {"x", {it->second.x[0], it->second.x[1], it->second.x[2]}},
                {"r", it->second.r}};
        }
    }
    j["total"] = total;
    j["skipped_balls"] = skipped_balls;
    return j.dump(2);
}

double oscillation_bmo(const Field& a, double R, const BallScanOptions& options,
                       OscillationInfo* info) {
    const GridSpec& g = a.grid();
    BallFamily fam = BallFamily::make(g, R, options.stride);
    const auto& v = a.values();
    double sup = 0.0;
    OscillationInfo local;
    for (std::size_t ri = 0; ri < fam.radii.size(); ++ri) {
        const auto& offs = fam.offsets[ri];
        if (static_cast<int>(offs.size()) < kMinBallPoints) {
            local.skipped_balls += static_cast<int>(fam.centers.size());
            continue;
        }
        for (std::size_t ci : fam.centers) {
            const auto center = axis_indices(g, ci);
            const double mean = ball_mean(g, v, center, offs);
            double dev = 0.0;
            for (const auto& d : offs) dev += std::abs(v[wrapped_flat(g, center, d)] - mean);
            dev /= static_cast<double>(offs.size());
            if (dev > sup) {
                sup = dev;
                const auto x = g.coords(ci);
                local.witness = {0.0, x, fam.radii[ri]};
            }
        }
    }
    if (info) *info = local;
    return sup;
}

double carleson_bmo(const Field& a, double R, const CarlesonOptions& options,
                    NormReport* report) {
    const GridSpec& g = a.grid();
    BallFamily fam = BallFamily::make(g, R, options.stride);
    NormReport rep;
    double total = 0.0;

    for (int k = 1; k <= 2; ++k) {
        double sup_sq = 0.0;
        NormWitness wit;
        for (std::size_t ri = 0; ri < fam.radii.size(); ++ri) {
            const double r = fam.radii[ri];
            const auto& offs = fam.offsets[ri];
            if (static_cast<int>(offs.size()) < kMinBallPoints) {
                rep.skipped_balls += static_cast<int>(fam.centers.size());
                continue;
            }
            const double t_hi = r * r * r * r;
            const int nt = options.decades * options.nodes_per_decade;
            const double dln = std::log(10.0) / options.nodes_per_decade;
            const double t_lo = t_hi * std::pow(10.0, -options.decades);

            std::vector<double> integral(fam.centers.size(), 0.0);
            for (int i = 0; i < nt; ++i) {
                // midpoint rule in log t
                const double t = t_lo * std::exp((i + 0.5) * dln);
                const double weight = std::pow(t, 0.25 * (2 * k - 4)) * t * dln;
                TensorField dk = semigroup_derivative(a, t, k);
                std::vector<double> sq(g.point_count(), 0.0);
                for (const Field& comp : dk.components) {
                    const auto& cv = comp.values();
                    for (std::size_t p = 0; p < sq.size(); ++p) sq[p] += cv[p] * cv[p];
                }
                for (std::size_t c = 0; c < fam.centers.size(); ++c) {
                    const auto center = axis_indices(g, fam.centers[c]);
                    integral[c] += weight * ball_mean(g, sq, center, offs);
                }
            }
            for (std::size_t c = 0; c < fam.centers.size(); ++c) {
                if (integral[c] > sup_sq) {
                    sup_sq = integral[c];
                    wit = {0.0, g.coords(fam.centers[c]), r};
                }
            }
        }
        const double val = std::sqrt(sup_sq);
        rep.n_carleson[k] = val;
        rep.carleson_witness[k] = wit;
        total += val;
    }
    rep.total = total;
    if (report) *report = rep;
    return total;
}

NormReport xt_norm(const Trajectory& u, double T, const BallScanOptions& options) {
    u.validate();
    const GridSpec& g = u.grid;
    if (u.horizon() < T * (1.0 - 1e-9))
        throw DomainError("xt_norm: trajectory does not cover (0, T]");

    NormReport rep;

    // Nodes inside (0, T], plus the t=0 node as trapezoid base.
    std::vector<std::size_t> nodes;
    for (std::size_t j = 0; j < u.times.size(); ++j)
        if (u.times[j] <= T * (1.0 + 1e-12)) nodes.push_back(j);

    for (int k = 1; k <= 2; ++k) {
        // Pointwise |grad^k u| at every node.
        std::vector<std::vector<double>> mag(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i)
            mag[i] = pointwise_magnitude(derivative_tensor(u.fields[nodes[i]], k));

        double n_inf = 0.0;
        NormWitness inf_wit;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double t = u.times[nodes[i]];
            if (!(t > 0.0)) continue;
            double sup = 0.0;
            for (double m : mag[i]) sup = std::max(sup, m);
            const double val = std::pow(t, 0.25 * k) * sup;
            if (val > n_inf) {
                n_inf = val;
                inf_wit.t = t;
            }
        }
        rep.n_inf[k] = n_inf;
        rep.inf_witness[k] = inf_wit;

        // Carleson component: integrand |grad^k u|^{4/k}.
        const double pow_exp = 4.0 / k;
        std::vector<std::vector<double>> integrand(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            integrand[i].resize(mag[i].size());
            for (std::size_t p = 0; p < mag[i].size(); ++p)
                integrand[i][p] = std::pow(mag[i][p], pow_exp);
        }

        const double R = std::min(std::pow(T, 0.25), g.box_length / 4.0);
        BallFamily fam = BallFamily::make(g, R, options.stride);
        double sup_int = 0.0;
        NormWitness c_wit;
        for (std::size_t ri = 0; ri < fam.radii.size(); ++ri) {
            const double r = fam.radii[ri];
            const auto& offs = fam.offsets[ri];
            if (static_cast<int>(offs.size()) < kMinBallPoints) {
                rep.skipped_balls += static_cast<int>(fam.centers.size());
                continue;
            }
            const double t_cap = r * r * r * r;
            // Collect node indices with t <= r^4 (always includes t=0).
            std::vector<std::size_t> sub;
            for (std::size_t i = 0; i < nodes.size(); ++i)
                if (u.times[nodes[i]] <= t_cap * (1.0 + 1e-12)) sub.push_back(i);
            if (sub.size() < 2) continue;

            for (std::size_t c = 0; c < fam.centers.size(); ++c) {
                const auto center = axis_indices(g, fam.centers[c]);
                double acc = 0.0;
                double prev_t = u.times[nodes[sub[0]]];
                double prev_avg = ball_mean(g, integrand[sub[0]], center, offs);
                for (std::size_t s = 1; s < sub.size(); ++s) {
                    const double t = u.times[nodes[sub[s]]];
                    const double avg = ball_mean(g, integrand[sub[s]], center, offs);
                    acc += 0.5 * (avg + prev_avg) * (t - prev_t);
                    prev_t = t;
                    prev_avg = avg;
                }
                if (acc > sup_int) {
                    sup_int = acc;
                    c_wit = {0.0, g.coords(fam.centers[c]), r};
                }
            }
        }
        const double val = std::pow(sup_int, 0.25 * k);
        rep.n_carleson[k] = val;
        rep.carleson_witness[k] = c_wit;
    }
    rep.total = rep.n_inf[1] + rep.n_inf[2] + rep.n_carleson[1] + rep.n_carleson[2];
    return rep;
}

double grid_lp(const GridSpec& g, const std::vector<double>& v, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x), p);
    return std::pow(s * g.cell_volume(), 1.0 / p);
}

double lpt_norm(const Trajectory& f, double p, double T) {
    f.validate();
    const GridSpec& g = f.grid;
    const bool p_ok = std::isinf(p) || p == 2.0 || p == 4.0 ||
                      p == static_cast<double>(g.dim);
    if (!p_ok) throw ConfigError("lpt_norm: p must be 2, 4, dim, or infinity");
    if (f.horizon() < T * (1.0 - 1e-9))
        throw DomainError("lpt_norm: trajectory does not cover (0, T]");

    double sup = 0.0;
    for (std::size_t j = 0; j < f.times.size(); ++j) {
        const double t = f.times[j];
        if (!(t > 0.0) || t > T * (1.0 + 1e-12)) continue;
        const Field& u = f.fields[j];
        const double lp0 = grid_lp(g, u.values(), p);
        const double lp1 = grid_lp(g, pointwise_magnitude(derivative_tensor(u, 1)), p);
        const double lp2 = grid_lp(g, pointwise_magnitude(derivative_tensor(u, 2)), p);
        sup = std::max(sup, lp0 + std::pow(t, 0.25) * lp1 + std::sqrt(t) * lp2);
    }
    return sup;
}

double morrey_norm(const Field& a, double p, double lambda, const BallScanOptions& options) {
    if (!(p >= 1.0)) throw DomainError("morrey_norm: p must be >= 1");
    const GridSpec& g = a.grid();
    if (!(lambda >= 0.0) || lambda >= static_cast<double>(g.dim))
        throw DomainError("morrey_norm: lambda must be in [0, dim)");
    BallFamily fam = BallFamily::make(g, g.box_length / 4.0, options.stride);
    const auto& v = a.values();
    const double vol = g.cell_volume();
    double sup = 0.0;
    for (std::size_t ri = 0; ri < fam.radii.size(); ++ri) {
        const double r = fam.radii[ri];
        const auto& offs = fam.offsets[ri];
        if (static_cast<int>(offs.size()) < kMinBallPoints) continue;
        for (std::size_t ci : fam.centers) {
            const auto center = axis_indices(g, ci);
            double s = 0.0;
            for (const auto& d : offs) s += std::pow(std::abs(v[wrapped_flat(g, center, d)]), p);
            sup = std::max(sup, std::pow(std::pow(r, -lambda) * s * vol, 1.0 / p));
        }
    }
    return sup;
}

double energy(const Field& u, int sign) {
    if (sign != 1 && sign != -1) throw DomainError("energy: sign must be +1 or -1");
    const GridSpec& g = u.grid();
    const auto grad = pointwise_magnitude(derivative_tensor(u, 1));
    const auto hess = pointwise_magnitude(derivative_tensor(u, 2));
    double e = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double g4 = grad[i] * grad[i] * grad[i] * grad[i];
        e += 0.5 * hess[i] * hess[i] + 0.25 * sign * g4;
    }
    return e * g.cell_volume();
}

}  // namespace biflow

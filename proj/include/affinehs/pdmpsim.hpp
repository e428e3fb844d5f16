#pragma once

// Simulation of the finite-activity processes X^(k): affine deterministic
// flow between jumps, jump clock by thinning against a windowed intensity
// bound, and Monte Carlo estimators with reproducible parallel reduction.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "affinehs/errors.hpp"
#include "affinehs/params.hpp"
#include "affinehs/rng.hpp"
#include "affinehs/symcone.hpp"

namespace affinehs {

/// b̃ = b − ∫_{0<‖ξ‖≤1} ξ m(dξ),  B̃(x) = B(x) − ∫_{0<‖ξ‖≤1} ξ⟨μ(dξ),x⟩/‖ξ‖²
struct DriftData {
    SymMatrix btilde;
    SuperOperator Btilde;

    explicit DriftData(const ParameterSet& p) {
        const auto small = NormBand::norm_leq(1.0);
        btilde = p.b - first_moment(p.m, p.dim, small);
        Btilde = p.B - compensator(p.mu, p.dim, small);
        if (!btilde.all_finite()) throw InputError("drift: small-jump mean of m is not finite");
        const double lmin = min_eigenvalue(btilde);
        if (lmin < -1e-9 * (1.0 + btilde.norm()))
            throw InputError("drift: b - I_m has eigenvalue " + std::to_string(lmin) + " (parameters not admissible)");
    }
};

/// Augmented generator [[B̃, vec b̃], [0, 0]] of the affine flow in VecBasis coordinates.
inline Matrix flow_generator(const DriftData& drift) {
    const VecBasis basis(drift.btilde.dim());
    const int n = basis.size();
    Matrix g = Matrix::Zero(n + 1, n + 1);
    g.topLeftCorner(n, n) = drift.Btilde.coordinates();
    g.topRightCorner(n, 1) = basis.vec(drift.btilde);
    return g;
}

/// e^{t·B̃}x + ∫₀ᵗ e^{(t−s)B̃} b̃ ds, from one exponential of the augmented generator.
inline SymMatrix flow(const DriftData& drift, const SymMatrix& x, double t) {
    if (!(t >= 0)) throw InputError("flow: t must be nonnegative");
    const VecBasis basis(x.dim());
    const int n = basis.size();
    Vector z(n + 1);
    z.head(n) = basis.vec(x);
    z(n) = 1.0;
    const Vector out = expm(t * flow_generator(drift)) * z;
    return basis.unvec(out.head(n));
}

/**
 * Advances augmented states z = [vec x; 1] by arbitrary durations using
 * precomputed exponentials of the generator at d·window·16^{-j}, d = 1..15,
 * j = 1..4. A duration is decomposed into hexadecimal digits of window; the
 * remainder below window·16^{-4} is handled by a third-order Taylor step.
 */
class FlowMap {
public:
    FlowMap(const DriftData& drift, double window) : window_(window), gen_(flow_generator(drift)) {
        if (!(window > 0)) throw InputError("FlowMap: window must be positive");
        full_ = expm(window * gen_);
        for (int j = 1; j <= kLevels; ++j) {
            step_[j - 1] = std::ldexp(window, -4 * j);
            for (int digit = 1; digit < 16; ++digit) table_.push_back(expm(digit * step_[j - 1] * gen_));
        }
    }

    double window() const { return window_; }
    const Matrix& generator() const { return gen_; }

    /// z ← e^{τG} z; `tmp` is scratch of the same size.
    void advance(Vector& z, double tau, Vector& tmp) const {
        if (!(tau >= 0)) throw InputError("FlowMap: negative duration");
        const Eigen::Index last = z.size() - 1;
        auto apply = [&](const Matrix& m) {
            matvec(m, z, tmp);
            z.swap(tmp);
            z(last) = 1.0;
        };
        while (tau >= window_) {
            apply(full_);
            tau -= window_;
        }
        for (int j = 0; j < kLevels && tau > 0; ++j) {
            const int digit = std::min(15, static_cast<int>(tau / step_[j]));
            if (digit == 0) continue;
            apply(table_[static_cast<std::size_t>(15 * j + digit - 1)]);
            tau = std::max(0.0, tau - digit * step_[j]);
        }
        if (tau > 0) {
            // z + τG(z + τ/2·G(z + τ/3·Gz))
            Vector acc = z;
            for (double c : {tau / 3.0, tau / 2.0, tau}) {
                matvec(gen_, acc, tmp);
                acc = z + c * tmp;
            }
            z = acc;
            z(last) = 1.0;
        }
    }

    Vector advance(Vector z, double tau) const {
        Vector tmp(z.size());
        advance(z, tau, tmp);
        return z;
    }

private:
    // out = m·in; plain loops beat the blocked kernel at these sizes
    static void matvec(const Matrix& m, const Vector& in, Vector& out) {
        const Eigen::Index n = m.rows();
        const double* a = m.data();
        double* o = out.data();
        for (Eigen::Index i = 0; i < n; ++i) o[i] = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double x = in[j];
            if (x == 0.0) continue;
            const double* col = a + j * n;
            for (Eigen::Index i = 0; i < n; ++i) o[i] += col[i] * x;
        }
    }

    static constexpr int kLevels = 4;
    double window_;
    Matrix gen_;
    Matrix full_;
    std::array<double, kLevels> step_{};
    std::vector<Matrix> table_;
};

/**
 * Sampler for a normalized radial density on a finite-mass support: a
 * 4096-point table of (CDF, radius) inverted with monotone cubic (Fritsch–
 * Carlson) interpolation. Power densities are tabulated on a log grid and
 * interpolated in log r; exponential densities on a linear grid.
 */
class RadialSampler {
public:
    static constexpr int kTableSize = 4096;

    explicit RadialSampler(const RadialDensity& h) : log_scale_(h.family() == RadialDensity::Family::power) {
        const double total = h.moment(0.0);
        if (!(total > 0) || !std::isfinite(total)) throw InputError("radial sampler: density must have finite positive mass (truncate first)");
        double lo = h.rmin();
        double hi = h.rmax();
        if (std::isinf(hi)) {
            constexpr double tail = 1e-14;
            if (log_scale_) {
                if (!(h.shape() > 0)) throw InputError("radial sampler: unbounded power density needs alpha > 0");
                hi = std::pow(h.scale() / (h.shape() * tail * total), 1.0 / h.shape());
                hi = std::max(hi, lo * 2.0);
            } else {
                hi = lo + 35.0 / h.shape();
            }
        }
        if (log_scale_ && !(lo > 0)) throw InputError("radial sampler: power density needs rmin > 0");
        u_.resize(kTableSize);
        y_.resize(kTableSize);
        for (int i = 0; i < kTableSize; ++i) {
            const double s = static_cast<double>(i) / (kTableSize - 1);
            double r = log_scale_ ? std::exp(std::log(lo) + s * (std::log(hi) - std::log(lo))) : lo + s * (hi - lo);
            if (i == kTableSize - 1) r = hi;
            u_[i] = i == 0 ? 0.0 : std::min(1.0, h.moment(0.0, 0.0, r) / total);
            y_[i] = log_scale_ ? std::log(r) : r;
        }
        u_.back() = std::max(u_.back(), 1.0);
        slopes();
    }

    double operator()(CounterRng& rng) const { return quantile(rng.uniform()); }

    double quantile(double u) const {
        if (u <= u_.front()) return value(y_.front());
        if (u >= u_.back()) return value(y_.back());
        const auto it = std::upper_bound(u_.begin(), u_.end(), u);
        const std::size_t i = static_cast<std::size_t>(it - u_.begin()) - 1;
        const double h = u_[i + 1] - u_[i];
        if (!(h > 0)) return value(y_[i]);
        const double s = (u - u_[i]) / h;
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
        return value(h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1]);
    }

private:
    double value(double y) const { return log_scale_ ? std::exp(y) : y; }

    void slopes() {
        const std::size_t n = u_.size();
        std::vector<double> delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double h = u_[i + 1] - u_[i];
            delta[i] = h > 0 ? (y_[i + 1] - y_[i]) / h : 0.0;
        }
        m_.assign(n, 0.0);
        m_[0] = delta[0];
        m_[n - 1] = delta[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i)
            m_[i] = (delta[i - 1] > 0 && delta[i] > 0) ? 0.5 * (delta[i - 1] + delta[i]) : 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (delta[i] == 0.0) {
                m_[i] = m_[i + 1] = 0.0;
                continue;
            }
            const double a = m_[i] / delta[i];
            const double b = m_[i + 1] / delta[i];
            const double s = a * a + b * b;
            if (s > 9.0) {
                const double tau = 3.0 / std::sqrt(s);
                m_[i] = tau * a * delta[i];
                m_[i + 1] = tau * b * delta[i];
            }
        }
    }

    bool log_scale_;
    std::vector<double> u_, y_, m_;
};

enum class EventType { flow_sample, jump };

struct SimEvent {
    double time = 0.0;
    EventType type = EventType::flow_sample;
    SymMatrix state;            // state after the event
    SymMatrix xi;               // jump size (jumps only)
    std::uint64_t rng_counter = 0;  // generator position after the event
    double safety = 1.5;        // thinning safety factor in force after the event
};

struct SimPath {
    std::vector<SimEvent> events;
    SymMatrix terminal;
    std::uint64_t stream_key = 0;
    int n_jumps = 0;
    long n_proposals = 0;
    long n_accepted = 0;
    int escalations = 0;
    double min_state_eig = kInf;

    double acceptance_ratio() const { return n_proposals > 0 ? static_cast<double>(n_accepted) / n_proposals : 1.0; }
    std::vector<double> jump_times() const {
        std::vector<double> t;
        for (const auto& e : events)
            if (e.type == EventType::jump) t.push_back(e.time);
        return t;
    }
};

struct SimOptions {
    double initial_safety = 1.5;
    int grid_points = 16;
    int max_escalations = 6;  // safety may double at most this many times
    bool record_events = true;
    bool record_windows = false;  // flow samples at every window end
};

/**
 * Simulator for a finite-activity parameter set P_k. Jump kernel at state x:
 *   ν(x,dξ) = m(dξ) + ⟨μ(dξ), x⟩/‖ξ‖²,  λ(x) = m(total) + ⟨∫μ(dξ)/‖ξ‖², x⟩.
 * Between jumps the state follows the flow with drift (b̃, B̃).
 */
class Simulator {
public:
    explicit Simulator(const ParameterSet& pk, SimOptions opts = {})
        : p_(pk), opts_(opts), drift_(pk), basis_(pk.dim) {
        check_structure(pk);
        if (opts.grid_points < 2) throw InputError("simulator: need at least two grid points");
        if (!finite_activity(pk)) throw InputError("simulator: infinite-activity measure, truncate first");
        const int d = pk.dim;
        lambda0_ = activity(pk.m);
        kernel_ = kernel_activity(pk.mu, d);
        for (const auto& r : pk.m.rays) m_samplers_.emplace_back(r.density);
        for (const auto& r : pk.mu.rays) mu_samplers_.emplace_back(r.kernel);
        for (const auto& r : pk.mu.rays) mu_ray_mass_.push_back(r.kernel.moment(0.0));
        for (const auto& r : pk.m.rays) m_ray_mass_.push_back(r.density.moment(0.0));
        const int n = basis_.size();
        ell_.resize(n + 1);
        ell_.head(n) = basis_.vec(kernel_);
        ell_(n) = lambda0_;
    }

    const ParameterSet& parameters() const { return p_; }
    const DriftData& drift() const { return drift_; }

    double intensity(const SymMatrix& x) const { return lambda0_ + inner(kernel_, x); }

    /// Draws ξ from ν(x,·)/λ(x).
    SymMatrix sample_jump(const SymMatrix& x, CounterRng& rng) const {
        const double lam = intensity(x);
        if (!(lam > 0)) throw NumericalError("sample_jump: zero jump intensity at x");
        double target = rng.uniform() * lam;
        for (const auto& a : p_.m.atoms) {
            if (target < a.weight) return a.xi;
            target -= a.weight;
        }
        for (std::size_t j = 0; j < p_.m.rays.size(); ++j) {
            if (target < m_ray_mass_[j]) return m_samplers_[j](rng) * p_.m.rays[j].direction;
            target -= m_ray_mass_[j];
        }
        for (const auto& a : p_.mu.atoms) {
            const double n = a.xi.norm();
            const double w = inner(a.mass, x) / (n * n);
            if (target < w) return a.xi;
            target -= w;
        }
        for (std::size_t j = 0; j < p_.mu.rays.size(); ++j) {
            const double w = inner(p_.mu.rays[j].weight, x) * mu_ray_mass_[j];
            if (target < w) return mu_samplers_[j](rng) * p_.mu.rays[j].direction;
            target -= w;
        }
        // rounding left target just above the last positive component
        for (std::size_t j = p_.mu.rays.size(); j-- > 0;)
            if (inner(p_.mu.rays[j].weight, x) * mu_ray_mass_[j] > 0) return mu_samplers_[j](rng) * p_.mu.rays[j].direction;
        for (std::size_t j = p_.mu.atoms.size(); j-- > 0;)
            if (inner(p_.mu.atoms[j].mass, x) > 0) return p_.mu.atoms[j].xi;
        if (!p_.m.rays.empty()) return m_samplers_.back()(rng) * p_.m.rays.back().direction;
        return p_.m.atoms.back().xi;
    }

    /// Lookahead window length for horizon T.
    static double window_for(double T) { return std::min(0.1, T / 10.0); }

    /**
     * One path on [t_start, T] from x0. Thinning: on each window of length
     * Δ = min(0.1, T/10) the intensity along the flow is bounded by its
     * maximum over a 16-point grid times the safety factor; a proposal whose
     * intensity exceeds the bound doubles the factor (kept for the rest of
     * the path) and restarts the window at the proposal time.
     */
    SimPath simulate(const SymMatrix& x0, double T, CounterRng& rng, double t_start = 0.0,
                     std::optional<double> safety_start = std::nullopt) const {
        if (x0.dim() != p_.dim) throw InputError("simulate: x0 has the wrong dimension");
        if (!is_psd(x0, default_cone_tol(x0))) throw InputError("simulate: x0 must be PSD");
        if (!(T >= t_start) || !(t_start >= 0)) throw InputError("simulate: need 0 <= t_start <= T");
        SimPath path;
        path.stream_key = rng.key();
        const int n = basis_.size();
        Vector z(n + 1), tmp(n + 1), zg(n + 1), grid_vals(opts_.grid_points);
        z.head(n) = basis_.vec(x0);
        z(n) = 1.0;
        double t = t_start;
        double safety = safety_start.value_or(opts_.initial_safety);
        const double max_safety = opts_.initial_safety * std::ldexp(1.0, opts_.max_escalations);
        auto state = [&]() { return basis_.unvec(z.head(n)); };
        auto note_state = [&](const SymMatrix& x) { path.min_state_eig = std::min(path.min_state_eig, min_eigenvalue(x)); };
        note_state(x0);

        if (T == t_start) {
            path.terminal = x0;
            if (opts_.record_events) path.events.push_back({T, EventType::flow_sample, x0, SymMatrix(p_.dim), rng.counter(), safety});
            return path;
        }

        const double window = window_for(T);
        const WindowData& wd = window_data(window);
        const bool has_jumps = !(p_.m.empty() && p_.mu.empty());
        const int g = opts_.grid_points;

        while (t < T) {
            const double w_end = std::min(t + window, T);
            const double len = w_end - t;
            double bound = 0.0;
            if (has_jumps) {
                // the grid is only a bound heuristic, so a rounding-level mismatch is harmless
                if (std::abs(len - window) <= 1e-12 * window) {
                    grid_vals.noalias() = wd.grid_rows * z;
                    bound = grid_vals.maxCoeff();
                } else {
                    zg = z;
                    bound = ell_.dot(zg);
                    for (int j = 1; j < g; ++j) {
                        wd.flow.advance(zg, len / (g - 1), tmp);
                        bound = std::max(bound, ell_.dot(zg));
                    }
                }
                bound *= safety;
            }
            if (!(bound > 0)) {
                wd.flow.advance(z, len, tmp);
                t = w_end;
                record_window(path, t, state(), rng, safety);
                continue;
            }
            while (true) {
                const double tau = rng.exponential(bound);
                if (t + tau >= w_end) {
                    wd.flow.advance(z, w_end - t, tmp);
                    t = w_end;
                    record_window(path, t, state(), rng, safety);
                    break;
                }
                wd.flow.advance(z, tau, tmp);
                t += tau;
                ++path.n_proposals;
                const double lam = ell_.dot(z);
                if (lam > bound) {
                    safety *= 2.0;
                    ++path.escalations;
                    if (safety > max_safety)
                        throw NumericalError("simulate: intensity bound failed after " + std::to_string(path.escalations) +
                                             " safety escalations");
                    break;
                }
                if (rng.uniform() * bound < lam) {
                    ++path.n_accepted;
                    const SymMatrix x = state();
                    const SymMatrix xi = sample_jump(x, rng);
                    const SymMatrix after = x + xi;
                    z.head(n) = basis_.vec(after);
                    ++path.n_jumps;
                    note_state(after);
                    if (opts_.record_events)
                        path.events.push_back({t, EventType::jump, after, xi, rng.counter(), safety});
                    break;
                }
            }
        }
        path.terminal = state();
        note_state(path.terminal);
        if (opts_.record_events && (path.events.empty() || path.events.back().time != T || path.events.back().type == EventType::jump))
            path.events.push_back({T, EventType::flow_sample, path.terminal, SymMatrix(p_.dim), rng.counter(), safety});
        return path;
    }

    /// Builds the flow tables for horizon T ahead of concurrent simulation.
    void prepare(double T) const {
        if (T > 0) window_data(window_for(T));
    }

private:
    struct WindowData {
        FlowMap flow;
        Matrix grid_rows;  // row j: λ at the j-th grid point of a full window, as a functional of z
    };

    void record_window(SimPath& path, double t, const SymMatrix& x, const CounterRng& rng, double safety) const {
        if (opts_.record_events && opts_.record_windows)
            path.events.push_back({t, EventType::flow_sample, x, SymMatrix(p_.dim), rng.counter(), safety});
    }

    const WindowData& window_data(double window) const {
        for (const auto& wd : windows_)
            if (wd.flow.window() == window) return wd;
        // Only reached before concurrent use: estimators call prepare() first.
        FlowMap fm(drift_, window);
        const int g = opts_.grid_points;
        Matrix rows(g, ell_.size());
        for (int j = 0; j < g; ++j) {
            // λ(e^{sG} z) = (e^{sGᵀ} ℓ)ᵀ z
            const double s = window * j / (g - 1);
            rows.row(j) = (expm(s * fm.generator()).transpose() * ell_).transpose();
        }
        windows_.push_back({std::move(fm), std::move(rows)});
        return windows_.back();
    }

    ParameterSet p_;
    SimOptions opts_;
    DriftData drift_;
    VecBasis basis_;
    double lambda0_ = 0.0;
    SymMatrix kernel_;
    Vector ell_;  // λ(x) = ℓᵀ[vec x; 1]
    std::vector<RadialSampler> m_samplers_, mu_samplers_;
    std::vector<double> m_ray_mass_, mu_ray_mass_;
    mutable std::deque<WindowData> windows_;
};

inline double jump_intensity(const ParameterSet& pk, const SymMatrix& x) { return Simulator(pk).intensity(x); }

inline SymMatrix sample_jump(const ParameterSet& pk, const SymMatrix& x, CounterRng& rng) {
    return Simulator(pk).sample_jump(x, rng);
}

inline SimPath simulate_path(const ParameterSet& pk, const SymMatrix& x0, double T, CounterRng& rng) {
    return Simulator(pk).simulate(x0, T, rng);
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct MCEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    long n_paths = 0;
    std::uint64_t seed = 0;
    double wall_time = 0.0;  // seconds; excluded from reproducible reports
};

/// Σ values[lo, hi) by recursive halving; the association depends only on the range.
inline double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

/// Mean and standard error of the per-path values in path-index order.
inline std::pair<double, double> mean_and_se(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n == 0) return {0.0, 0.0};
    // shifted by v[0] so that identical samples give exactly zero spread
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = v[i] - v[0];
    const double shift = pairwise_sum(dev, 0, n) / static_cast<double>(n);
    const double mean = v[0] + shift;
    if (n < 2) return {mean, 0.0};
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (dev[i] - shift) * (dev[i] - shift);
    const double var = pairwise_sum(sq, 0, n) / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

/// Worker count: requested (0 = hardware), capped by AFFINEHS_THREADS when set.
inline int resolve_threads(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("AFFINEHS_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return std::max(1, n);
}

using PathFunctional = std::function<double(const SymMatrix&)>;

/**
 * Simulates n_paths paths of X^(k) from x0 to T, path i on stream
 * CounterRng::stream(seed, i), and estimates E[f(X_T)] for every functional.
 * Values are stored by path index and reduced in that order, so the result
 * does not depend on the worker count.
 */
inline std::vector<MCEstimate> mc_estimate(const Simulator& sim, const SymMatrix& x0, double T,
                                           const std::vector<PathFunctional>& fs, long n_paths, std::uint64_t seed,
                                           int threads = 0) {
    if (n_paths < 100) throw InputError("Monte Carlo: n_paths must be >= 100");
    const auto start = std::chrono::steady_clock::now();
    const std::size_t nf = fs.size();
    std::vector<std::vector<double>> values(nf, std::vector<double>(static_cast<std::size_t>(n_paths)));
    sim.prepare(T);
    std::atomic<long> next{0};
    std::vector<std::string> errors(static_cast<std::size_t>(resolve_threads(threads)));
    auto worker = [&](std::size_t id) {
        try {
            constexpr long chunk = 64;
            while (true) {
                const long begin = next.fetch_add(chunk);
                if (begin >= n_paths) break;
                const long end = std::min(n_paths, begin + chunk);
                for (long i = begin; i < end; ++i) {
                    CounterRng rng = CounterRng::stream(seed, static_cast<std::uint64_t>(i));
                    const SimPath path = sim.simulate(x0, T, rng);
                    for (std::size_t f = 0; f < nf; ++f) values[f][static_cast<std::size_t>(i)] = fs[f](path.terminal);
                }
            }
        } catch (const std::exception& e) {
            errors[id] = e.what();
            next.store(n_paths);
        }
    };
    const std::size_t nt = errors.size();
    if (nt == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < nt; ++i) pool.emplace_back(worker, i);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (!e.empty()) throw NumericalError("Monte Carlo: " + e);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::vector<MCEstimate> out;
    for (std::size_t f = 0; f < nf; ++f) {
        auto [m, se] = mean_and_se(values[f]);
        out.push_back({m, se, n_paths, seed, wall});
    }
    return out;
}

inline MCEstimate mc_laplace(const ParameterSet& pk, const SymMatrix& x0, double T, const SymMatrix& u, long n_paths,
                             std::uint64_t seed, int threads = 0) {
    const Simulator sim(pk, {.record_events = false});
    return mc_estimate(sim, x0, T, {[&](const SymMatrix& x) { return std::exp(-inner(x, u)); }}, n_paths, seed, threads)[0];
}

inline MCEstimate mc_mean(const ParameterSet& pk, const SymMatrix& x0, double T, const SymMatrix& v, long n_paths,
                          std::uint64_t seed, int threads = 0) {
    const Simulator sim(pk, {.record_events = false});
    return mc_estimate(sim, x0, T, {[&](const SymMatrix& x) { return inner(x, v); }}, n_paths, seed, threads)[0];
}

inline MCEstimate mc_second_moment(const ParameterSet& pk, const SymMatrix& x0, double T, const SymMatrix& v,
                                   const SymMatrix& w, long n_paths, std::uint64_t seed, int threads = 0) {
    const Simulator sim(pk, {.record_events = false});
    return mc_estimate(sim, x0, T, {[&](const SymMatrix& x) { return inner(x, v) * inner(x, w); }}, n_paths, seed,
                       threads)[0];
}

} // namespace affinehs

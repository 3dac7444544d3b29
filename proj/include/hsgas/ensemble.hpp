#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsgas/hard_sphere.hpp"
#include "hsgas/initial_data.hpp"
#include "hsgas/parallel.hpp"
#include "hsgas/rng.hpp"
#include "hsgas/stats.hpp"

namespace hsgas {

template <std::size_t D>
struct InitialSample {
    Configuration<D> Z;
    std::size_t attempts = 0;
    double acceptance_rate() const { return attempts ? 1.0 / double(attempts) : 0.0; }
};

/// Exact rejection sampling of 1_{D^eps_N} f0^{(x)N}, normalized.
template <std::size_t D>
inline InitialSample<D> sample_initial(Rng& g, int N, double eps, const InitialData<D>& f0,
                                       std::size_t max_rejects = 10'000'000)
{
    InitialSample<D> out;
    out.Z.eps = eps;
    out.Z.p.resize(N);
    const double wall = 0.5 * eps;
    const double e2 = eps * eps;
    for (;;) {
        if (out.attempts >= max_rejects)
            throw std::runtime_error("sample_initial: acceptance below 1/" + std::to_string(max_rejects) + " (N=" +
                                     std::to_string(N) + ", eps=" + std::to_string(eps) + ")");
        ++out.attempts;
        bool ok = true;
        // draw all N states to keep the stream layout independent of where a rejection happens
        for (auto& q : out.Z.p) q = f0.sample(g);
        for (int i = 0; i < N && ok; ++i) {
            if (out.Z.p[i].x[0] < wall) ok = false;
            for (int j = 0; j < i && ok; ++j)
                if (norm2(out.Z.p[i].x - out.Z.p[j].x) < e2) ok = false;
        }
        if (ok) return out;
    }
}

struct EnsembleStats {
    std::size_t replicas = 0;
    std::size_t attempts = 0;           ///< initial-data draws over all replicas
    std::size_t pathological = 0;       ///< resampled trajectories
    std::size_t pair_collisions = 0;
    std::size_t wall_bounces = 0;
    double energy_initial = 0.0;        ///< ensemble mean kinetic energy at time 0
    double energy_final = 0.0;          ///< ensemble mean kinetic energy at time t
    double acceptance() const { return attempts ? double(replicas) / double(attempts) : 0.0; }
    double pathological_fraction() const
    {
        const double n = double(replicas + pathological);
        return n > 0 ? double(pathological) / n : 0.0;
    }
    bool pathological_warning() const { return pathological_fraction() > 0.01; }
};

inline double kinetic_energy_of(const auto& Z)
{
    double e = 0.0;
    for (const auto& q : Z.p) e += 0.5 * norm2(q.v);
    return e;
}

/// Visits `replicas` independent non-pathological hard-sphere states at time t.
/// Replicas are grouped into fixed chunks; visit(chunk, replica, Z) is called in increasing replica order within a
/// chunk and may touch only chunk-local state.
template <std::size_t D, class Visit>
inline EnsembleStats run_ensemble(int N, double eps, const InitialData<D>& f0, double t, std::size_t replicas,
                                  std::uint64_t seed, std::size_t chunks, unsigned threads, Visit&& visit)
{
    chunks = std::max<std::size_t>(1, std::min(chunks, std::max<std::size_t>(replicas, 1)));
    std::vector<EnsembleStats> part(chunks);
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::size_t lo = replicas * c / chunks, hi = replicas * (c + 1) / chunks;
        EnsembleStats& st = part[c];
        FlowParams prm;
        prm.record_events = false;
        for (std::size_t r = lo; r < hi; ++r) {
            for (std::uint64_t attempt = 0;; ++attempt) {
                Rng g = make_rng(seed, {0xe25e3bULL, r, attempt});
                const InitialSample<D> s = sample_initial(g, N, eps, f0);
                st.attempts += s.attempts;
                EventSim<D> sim(s.Z, prm);
                sim.run_until(t);
                if (sim.pathological()) {
                    ++st.pathological;
                    if (attempt > 1000) throw std::runtime_error("run_ensemble: persistent pathological draws");
                    continue;
                }
                const Configuration<D> Zt = sim.state();
                st.pair_collisions += sim.pair_collisions();
                st.wall_bounces += sim.wall_bounces();
                st.energy_initial += kinetic_energy_of(s.Z);
                st.energy_final += kinetic_energy_of(Zt);
                ++st.replicas;
                visit(c, r, Zt);
                break;
            }
        }
    });
    EnsembleStats tot;
    for (const auto& p : part) {
        tot.replicas += p.replicas;
        tot.attempts += p.attempts;
        tot.pathological += p.pathological;
        tot.pair_collisions += p.pair_collisions;
        tot.wall_bounces += p.wall_bounces;
        tot.energy_initial += p.energy_initial;
        tot.energy_final += p.energy_final;
    }
    if (tot.replicas) {
        tot.energy_initial /= double(tot.replicas);
        tot.energy_final /= double(tot.replicas);
    }
    return tot;
}

/// Collects the final states of a small ensemble.
template <std::size_t D>
inline std::vector<Configuration<D>> collect_ensemble(int N, double eps, const InitialData<D>& f0, double t,
                                                      std::size_t replicas, std::uint64_t seed,
                                                      EnsembleStats* stats = nullptr)
{
    std::vector<Configuration<D>> out(replicas);
    auto st = run_ensemble<D>(N, eps, f0, t, replicas, seed, 1, 1,
                              [&](std::size_t, std::size_t r, const Configuration<D>& Z) { out[r] = Z; });
    if (stats) *stats = st;
    return out;
}

struct AdmissibleDeviation {
    std::vector<double> ratio, ratio_se; ///< f^{(s)}_{N,0} / (1_{D_s} f0^{(x)s}) at each point
    std::vector<double> dev, dev_se;     ///< |1_{D_s} f0^{(x)s} - f^{(s)}_{N,0}| with velocities at 0
    double sup_dev = 0.0;
    double se_at_sup = 0.0;
    std::size_t argmax = 0;
    double partition = 0.0; ///< Z_N, acceptance probability of N independent draws
    double partition_se = 0.0;
    std::size_t samples = 0;
};

/// Deviation of the conditioned s-particle initial marginal from the tensorized data at the given position tuples.
/// The conditioning depends on positions only, so the ratio is A_s(X_s) / Z_N with
/// A_s(X_s) = P[(X_s, W) admissible] over N - s independent positions W; both are estimated on shared draws of W.
template <std::size_t D>
inline AdmissibleDeviation admissible_deviation(const InitialData<D>& f0, int N, double eps,
                                                const std::vector<std::vector<Vec<D>>>& points, std::size_t samples,
                                                std::uint64_t seed, unsigned threads = 1, std::size_t blocks = 32,
                                                std::size_t probes = 8)
{
    if (points.empty()) throw std::invalid_argument("admissible_deviation: no points");
    const int s = static_cast<int>(points.front().size());
    if (s < 1 || s > N) throw std::invalid_argument("admissible_deviation: need 1 <= s <= N");
    const double wall = 0.5 * eps, e2 = eps * eps;
    auto admissible_with = [&](const std::vector<Vec<D>>& X, const std::vector<Vec<D>>& W) {
        for (const auto& x : X) {
            if (x[0] < wall) return false;
            for (const auto& w : W)
                if (norm2(x - w) < e2) return false;
        }
        for (std::size_t i = 0; i < X.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (norm2(X[i] - X[j]) < e2) return false;
        return true;
    };
    const std::size_t P = points.size();
    blocks = std::max<std::size_t>(2, blocks);
    const std::size_t per = std::max<std::size_t>(1, samples / blocks);
    std::vector<std::vector<double>> a(blocks, std::vector<double>(P, 0.0));
    std::vector<double> z(blocks, 0.0);
    parallel_for(blocks, threads, [&](std::size_t b) {
        Rng g = make_rng(seed, {0xad3155ULL, b});
        std::vector<Vec<D>> W(N - s), X(s);
        for (std::size_t m = 0; m < per; ++m) {
            for (auto& w : W) w = f0.sample(g).x;
            std::vector<Vec<D>> Xp(s);
            std::vector<std::vector<Vec<D>>> probe(probes, std::vector<Vec<D>>(s));
            for (auto& pr : probe)
                for (auto& x : pr) x = f0.sample(g).x;
            bool ok = true;
            for (std::size_t i = 0; i < W.size() && ok; ++i) {
                if (W[i][0] < wall) ok = false;
                for (std::size_t j = 0; j < i && ok; ++j)
                    if (norm2(W[i] - W[j]) < e2) ok = false;
            }
            if (!ok) continue;
            for (std::size_t p = 0; p < P; ++p)
                if (admissible_with(points[p], W)) a[b][p] += 1.0;
            double hit = 0.0;
            for (const auto& pr : probe) hit += admissible_with(pr, W) ? 1.0 : 0.0;
            z[b] += hit / double(probes);
        }
        for (auto& v : a[b]) v /= double(per);
        z[b] /= double(per);
    });
    AdmissibleDeviation r;
    r.samples = blocks * per;
    std::tie(r.partition, r.partition_se) = mean_and_se(z);
    if (!(r.partition > 0.0)) throw std::runtime_error("admissible_deviation: no admissible draw");
    const double m0 = f0.maxwellian(Vec<D>{});
    for (std::size_t p = 0; p < P; ++p) {
        double am = 0.0;
        for (std::size_t b = 0; b < blocks; ++b) am += a[b][p];
        am /= double(blocks);
        const double ratio = am / r.partition;
        std::vector<double> resid(blocks);
        for (std::size_t b = 0; b < blocks; ++b) resid[b] = a[b][p] - ratio * z[b];
        const double se = mean_and_se(resid).second / r.partition;
        double f = admissible_with(points[p], {}) ? 1.0 : 0.0;
        for (const auto& x : points[p]) f *= f0.g(x) * m0;
        r.ratio.push_back(ratio);
        r.ratio_se.push_back(se);
        r.dev.push_back(f * std::abs(1.0 - ratio));
        r.dev_se.push_back(f * se);
        if (r.dev.back() >= r.sup_dev) {
            r.sup_dev = r.dev.back();
            r.se_at_sup = r.dev_se.back();
            r.argmax = p;
        }
    }
    return r;
}

/// One histogram axis: particle p (< s), coordinate `comp` of x (is_velocity = false) or v.
struct HistAxis {
    int particle = 0;
    bool is_velocity = false;
    int comp = 0;
    double lo = 0.0, hi = 1.0;
    int bins = 10;
};

/// Binned estimate of the s-particle marginal over a bounded window.
struct MarginalHistogram {
    int s = 1;
    std::vector<HistAxis> axes;
    std::vector<double> mass;    ///< estimated probability of each cell
    std::vector<double> mass_se;
    std::size_t replicas = 0;
    std::size_t subsets_per_replica = 0;

    std::size_t cells() const
    {
        std::size_t n = 1;
        for (const auto& a : axes) n *= static_cast<std::size_t>(a.bins);
        return n;
    }
    double cell_volume() const
    {
        double v = 1.0;
        for (const auto& a : axes) v *= (a.hi - a.lo) / a.bins;
        return v;
    }
    std::vector<int> unravel(std::size_t c) const
    {
        std::vector<int> idx(axes.size());
        for (std::size_t k = axes.size(); k-- > 0;) {
            idx[k] = static_cast<int>(c % axes[k].bins);
            c /= axes[k].bins;
        }
        return idx;
    }
    std::vector<double> center(std::size_t c) const
    {
        const auto idx = unravel(c);
        std::vector<double> x(axes.size());
        for (std::size_t k = 0; k < axes.size(); ++k) {
            const double w = (axes[k].hi - axes[k].lo) / axes[k].bins;
            x[k] = axes[k].lo + (idx[k] + 0.5) * w;
        }
        return x;
    }
    double density(std::size_t c) const { return mass[c] / cell_volume(); }
    double density_se(std::size_t c) const { return mass_se[c] / cell_volume(); }

    /// Cell index of a phase point, or -1 outside the window.
    template <std::size_t D>
    long long locate(const std::vector<const ParticleState<D>*>& z) const
    {
        long long c = 0;
        for (const auto& a : axes) {
            const ParticleState<D>& q = *z[a.particle];
            const double x = a.is_velocity ? q.v[a.comp] : q.x[a.comp];
            if (!(x >= a.lo && x < a.hi)) return -1;
            int b = static_cast<int>((x - a.lo) / (a.hi - a.lo) * a.bins);
            b = std::clamp(b, 0, a.bins - 1);
            c = c * a.bins + b;
        }
        return c;
    }
};

/// Streaming accumulator of per-replica cell fractions; merge order is fixed by the caller.
class MarginalAccumulator {
public:
    MarginalAccumulator() = default;
    MarginalAccumulator(MarginalHistogram shape, std::size_t subset_cap)
        : h_(std::move(shape)), cap_(subset_cap), sum_(h_.cells(), 0.0), sum2_(h_.cells(), 0.0), local_(h_.cells(), 0)
    {
        for (const auto& a : h_.axes)
            if (a.particle < 0 || a.particle >= h_.s || a.bins < 1 || !(a.hi > a.lo))
                throw std::invalid_argument("histogram: bad axis");
    }

    template <std::size_t D>
    void add(const Configuration<D>& Z)
    {
        const int N = static_cast<int>(Z.size());
        if (h_.s > N) throw std::invalid_argument("marginal_estimate: s > N");
        std::vector<int> idx(h_.s);
        std::vector<const ParticleState<D>*> z(h_.s);
        std::vector<std::size_t> touched;
        std::size_t used = 0;
        // ordered s-tuples of distinct particles in lexicographic order, up to the cap
        std::function<bool(int)> rec = [&](int depth) {
            if (depth == h_.s) {
                for (int k = 0; k < h_.s; ++k) z[k] = &Z.p[idx[k]];
                const long long c = h_.locate<D>(z);
                if (c >= 0) {
                    if (local_[c]++ == 0) touched.push_back(static_cast<std::size_t>(c));
                }
                return ++used < cap_;
            }
            for (int i = 0; i < N; ++i) {
                bool dup = false;
                for (int k = 0; k < depth; ++k) dup |= idx[k] == i;
                if (dup) continue;
                idx[depth] = i;
                if (!rec(depth + 1)) return false;
            }
            return true;
        };
        rec(0);
        for (std::size_t c : touched) {
            const double y = double(local_[c]) / double(used);
            sum_[c] += y;
            sum2_[c] += y * y;
            local_[c] = 0;
        }
        if (n_ == 0) per_ = used;
        ++n_;
    }

    void merge(const MarginalAccumulator& o)
    {
        if (o.n_ == 0) return;
        if (n_ == 0 && sum_.empty()) {
            *this = o;
            return;
        }
        for (std::size_t c = 0; c < sum_.size(); ++c) {
            sum_[c] += o.sum_[c];
            sum2_[c] += o.sum2_[c];
        }
        if (n_ == 0) per_ = o.per_;
        n_ += o.n_;
    }

    MarginalHistogram result() const
    {
        MarginalHistogram h = h_;
        h.replicas = n_;
        h.subsets_per_replica = per_;
        h.mass.assign(sum_.size(), 0.0);
        h.mass_se.assign(sum_.size(), 0.0);
        const double n = double(n_);
        for (std::size_t c = 0; c < sum_.size(); ++c) {
            if (n_ == 0) continue;
            const double m = sum_[c] / n;
            h.mass[c] = m;
            if (sum_[c] == 0.0) {
                h.mass_se[c] = 3.0 / (n * double(std::max<std::size_t>(per_, 1))); // zero-count bound
            } else if (n_ > 1) {
                const double var = std::max(0.0, (sum2_[c] - n * m * m) / (n - 1));
                h.mass_se[c] = std::sqrt(var / n);
            }
        }
        return h;
    }

    std::size_t replicas() const { return n_; }

private:
    MarginalHistogram h_;
    std::size_t cap_ = 100;
    std::vector<double> sum_, sum2_;
    std::vector<std::uint32_t> local_;
    std::size_t n_ = 0, per_ = 0;
};

template <std::size_t D>
inline MarginalHistogram marginal_estimate(const std::vector<Configuration<D>>& ensemble, const MarginalHistogram& shape,
                                           std::size_t subset_cap = 100)
{
    MarginalAccumulator acc(shape, subset_cap);
    for (const auto& Z : ensemble) acc.add(Z);
    return acc.result();
}

} // namespace hsgas

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "hsgas/geometry.hpp"
#include "hsgas/rng.hpp"

namespace hsgas {

inline constexpr double default_gap_tol = 1e-9;
inline constexpr double inf = std::numeric_limits<double>::infinity();

enum class EventKind { pair, wall };

struct Event {
    EventKind kind = EventKind::wall;
    int i = -1;
    int j = -1;
    double time = 0.0;
};

template <std::size_t D>
struct FlowResult {
    Configuration<D> final;
    std::vector<Event> events;
    bool pathological = false;
    double min_event_gap = inf;
};

struct FlowParams {
    double gap_tol = default_gap_tol;
    std::size_t max_events = 50'000'000;
    bool record_events = true;
};

/// Contact time of two spheres of diameter eps, or nothing if they never meet head-on.
template <std::size_t D>
inline std::optional<double> pair_collision_time(const ParticleState<D>& p1, const ParticleState<D>& p2, double eps)
{
    const Vec<D> dx = p2.x - p1.x;
    const Vec<D> dv = p2.v - p1.v;
    const double c = norm2(dx) - eps * eps;
    const double lim = eps - geom_tol;
    if (eps > 0.0 && norm2(dx) < lim * lim) throw std::invalid_argument("pair_collision_time: overlapping spheres");
    const double a = norm2(dv);
    const double b = dot(dx, dv);
    // grazing or receding
    if (!(b < -1e-12 * std::sqrt(a * norm2(dx)))) return std::nullopt;
    const double disc = b * b - a * c;
    if (!(disc > 0.0)) return std::nullopt;
    const double t = c / (-b + std::sqrt(disc));
    return std::max(t, 0.0);
}

template <std::size_t D>
inline std::optional<double> wall_bounce_time(const ParticleState<D>& p, double eps)
{
    if (!(p.v[0] < 0.0)) return std::nullopt;
    return std::max((p.x[0] - 0.5 * eps) / (-p.v[0]), 0.0);
}

/// Event-driven hard-sphere system with lazy particle clocks and an invalidation-based queue.
template <std::size_t D>
class EventSim {
public:
    /// Called on every event-free interval [t0, t1] before the event at t1 is applied.
    using SegmentObserver = std::function<bool(const EventSim&, double t0, double t1)>;

    EventSim(const Configuration<D>& Z, FlowParams prm = {})
        : eps_(Z.eps), prm_(prm), x_(Z.size()), v_(Z.size()), t_(Z.size(), 0.0),
          count_(Z.size(), 0), last_(Z.size(), -inf)
    {
        for (std::size_t i = 0; i < Z.size(); ++i) {
            x_[i] = Z.p[i].x;
            v_[i] = Z.p[i].v;
            if (!all_finite(x_[i]) || !all_finite(v_[i])) throw std::runtime_error("EventSim: non-finite state");
        }
        const int n = static_cast<int>(Z.size());
        for (int i = 0; i < n; ++i) {
            schedule_wall(i);
            for (int j = i + 1; j < n; ++j) schedule_pair(i, j);
        }
    }

    double now() const { return now_; }
    int size() const { return static_cast<int>(x_.size()); }
    Vec<D> position(int i, double t) const { return x_[i] + (t - t_[i]) * v_[i]; }
    const Vec<D>& velocity(int i) const { return v_[i]; }
    bool pathological() const { return pathological_; }
    double min_event_gap() const { return min_gap_; }
    const std::vector<Event>& events() const { return events_; }
    std::size_t pair_collisions() const { return n_pair_; }
    std::size_t wall_bounces() const { return n_wall_; }

    /// Time of the next valid event, infinity when the system is free forever.
    double next_event_time()
    {
        drop_stale();
        return q_.empty() ? inf : q_.top().time;
    }

    /// Runs until t_end or until a tie is detected; returns false on a tie or when the observer stops the run.
    bool run_until(double t_end, const SegmentObserver& obs = nullptr)
    {
        if (pathological_) return false;
        for (;;) {
            drop_stale();
            if (q_.empty() || q_.top().time > t_end) break;
            const Entry e = q_.top();
            q_.pop();
            if (obs && !obs(*this, now_, e.time)) {
                now_ = e.time;
                return false;
            }
            const double gap = event_gap(e);
            min_gap_ = std::min(min_gap_, gap);
            now_ = e.time;
            if (gap < prm_.gap_tol) {
                pathological_ = true;
                return false;
            }
            apply(e);
            if (n_pair_ + n_wall_ > prm_.max_events) throw std::runtime_error("EventSim: event cap exceeded");
        }
        if (obs && t_end > now_ && !obs(*this, now_, t_end)) {
            now_ = t_end;
            return false;
        }
        if (t_end > now_) now_ = t_end;
        return true;
    }

    Configuration<D> state() const
    {
        Configuration<D> Z;
        Z.eps = eps_;
        Z.p.resize(x_.size());
        for (std::size_t i = 0; i < x_.size(); ++i) {
            Z.p[i].x = position(static_cast<int>(i), now_);
            Z.p[i].v = v_[i];
        }
        return Z;
    }

private:
    struct Entry {
        double time;
        int i, j; // j < 0: wall
        std::uint32_t ci, cj;
        bool operator>(const Entry& o) const
        {
            if (time != o.time) return time > o.time;
            if (i != o.i) return i > o.i;
            return j > o.j;
        }
    };

    ParticleState<D> at(int i, double t) const { return {position(i, t), v_[i]}; }

    std::optional<double> pair_dt(int i, int j, double t) const
    {
        return pair_collision_time(at(i, t), at(j, t), eps_);
    }

    void schedule_pair(int i, int j)
    {
        if (auto dt = pair_dt(i, j, now_))
            q_.push({now_ + *dt, i, j, count_[i], count_[j]});
    }

    void schedule_wall(int i)
    {
        if (auto dt = wall_bounce_time(at(i, now_), eps_)) q_.push({now_ + *dt, i, -1, count_[i], 0});
    }

    bool valid(const Entry& e) const
    {
        if (count_[e.i] != e.ci) return false;
        return e.j < 0 || count_[e.j] == e.cj;
    }

    void drop_stale()
    {
        while (!q_.empty() && !valid(q_.top())) q_.pop();
    }

    // Distance in time to the nearest other event sharing a particle with e.
    double event_gap(const Entry& e) const
    {
        double g = inf;
        const int parts[2] = {e.i, e.j};
        for (int p : parts) {
            if (p < 0) continue;
            g = std::min(g, e.time - last_[p]);
            if (e.j >= 0) {
                if (auto w = wall_bounce_time(at(p, e.time), eps_)) g = std::min(g, *w);
            }
            for (int k = 0; k < size(); ++k) {
                if (k == e.i || k == e.j) continue;
                if (auto dt = pair_dt(p, k, e.time)) g = std::min(g, *dt);
            }
        }
        return g;
    }

    void sync(int i)
    {
        x_[i] = position(i, now_);
        t_[i] = now_;
    }

    void apply(const Entry& e)
    {
        if (e.j < 0) {
            sync(e.i);
            x_[e.i][0] = std::max(x_[e.i][0], 0.5 * eps_);
            v_[e.i] = specular_reflect(v_[e.i]);
            ++count_[e.i];
            last_[e.i] = now_;
            ++n_wall_;
            if (prm_.record_events) events_.push_back({EventKind::wall, e.i, -1, now_});
            reschedule(e.i, -1);
        } else {
            sync(e.i);
            sync(e.j);
            Vec<D> w = x_[e.j] - x_[e.i];
            w = (1.0 / norm(w)) * w;
            auto [a, b] = scattering_map(v_[e.i], v_[e.j], w);
            v_[e.i] = a;
            v_[e.j] = b;
            ++count_[e.i];
            ++count_[e.j];
            last_[e.i] = last_[e.j] = now_;
            ++n_pair_;
            if (prm_.record_events) events_.push_back({EventKind::pair, e.i, e.j, now_});
            reschedule(e.i, e.j);
        }
        if (!all_finite(v_[e.i])) throw std::runtime_error("EventSim: non-finite state");
    }

    void reschedule(int i, int j)
    {
        const int parts[2] = {i, j};
        for (int p : parts) {
            if (p < 0) continue;
            schedule_wall(p);
            for (int k = 0; k < size(); ++k)
                if (k != i && k != j) schedule_pair(std::min(p, k), std::max(p, k));
        }
        if (j >= 0) schedule_pair(std::min(i, j), std::max(i, j));
    }

    double eps_;
    FlowParams prm_;
    std::vector<Vec<D>> x_, v_;
    std::vector<double> t_;
    std::vector<std::uint32_t> count_;
    std::vector<double> last_;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> q_;
    std::vector<Event> events_;
    double now_ = 0.0;
    double min_gap_ = inf;
    bool pathological_ = false;
    std::size_t n_pair_ = 0, n_wall_ = 0;
};

template <std::size_t D>
inline Configuration<D> negate_velocities(Configuration<D> Z)
{
    for (auto& q : Z.p) q.v = -q.v;
    return Z;
}

/// Hard-sphere transport by t (negative t runs the backward flow by velocity reversal).
template <std::size_t D>
inline FlowResult<D> advance(const Configuration<D>& Z, double t, FlowParams prm = {})
{
    if (!phase_space_contains(Z)) throw std::invalid_argument("advance: configuration outside phase space");
    const bool back = t < 0.0;
    EventSim<D> sim(back ? negate_velocities(Z) : Z, prm);
    sim.run_until(std::abs(t));
    FlowResult<D> r;
    r.final = sim.state();
    if (back) r.final = negate_velocities(r.final);
    r.events = sim.events();
    r.pathological = sim.pathological();
    r.min_event_gap = sim.min_event_gap();
    return r;
}

enum class Verdict { yes, no, undetermined };

/// Minimum of |y + s w| over s in [0, L] and the minimizing s.
template <std::size_t D>
inline std::pair<double, double> segment_min_distance(const Vec<D>& y, const Vec<D>& w, double L)
{
    const double w2 = norm2(w);
    double s = 0.0;
    if (w2 > 0.0) s = std::clamp(-dot(y, w) / w2, 0.0, L);
    return {norm(y + s * w), s};
}

/// Hard-sphere good configuration: every pair stays farther than c along the backward flow, for all tau > 0.
template <std::size_t D>
inline Verdict good_config_hard(const Configuration<D>& Z, double c, double horizon = 1e6)
{
    if (c < Z.eps) throw std::invalid_argument("good_config_hard: c < eps");
    if (!phase_space_contains(Z)) return Verdict::no;
    const int n = static_cast<int>(Z.size());
    bool bad = false;
    auto check = [&](const EventSim<D>& s, double t0, double t1) {
        for (int i = 0; i < n && !bad; ++i)
            for (int j = i + 1; j < n; ++j) {
                const Vec<D> y = s.position(j, t0) - s.position(i, t0);
                const Vec<D> w = s.velocity(j) - s.velocity(i);
                auto [d, sm] = segment_min_distance<D>(y, w, t1 - t0);
                const double tau = t0 + sm;
                if (d < c - geom_tol || (d <= c + geom_tol && tau > 0.0)) {
                    bad = true;
                    break;
                }
            }
        return !bad;
    };
    EventSim<D> sim(negate_velocities(Z), FlowParams{0.0, 50'000'000, false});
    sim.run_until(horizon, check);
    if (bad) return Verdict::no;
    if (sim.next_event_time() < inf) return Verdict::undetermined;
    check(sim, sim.now(), inf);
    return bad ? Verdict::no : Verdict::yes;
}

struct ProbeResult {
    double fraction = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    std::size_t samples = 0;
    std::size_t flagged = 0;
    std::size_t rejections = 0;
};

/// Wilson score interval at 95%.
inline std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054)
{
    if (n == 0) return {0.0, 1.0};
    const double p = double(k) / double(n), nn = double(n);
    const double den = 1.0 + z * z / nn;
    const double mid = (p + z * z / (2 * nn)) / den;
    const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / den;
    return {std::max(0.0, mid - half), std::min(1.0, mid + half)};
}

/// Uniform admissible initial configuration in [eps/2, R] x [-R, R]^{D-1} with velocities in B(0,R).
template <std::size_t D>
inline Configuration<D> sample_box_configuration(Rng& g, int N, double eps, double R, std::size_t& rejections,
                                                 std::size_t max_rejects = 10'000'000)
{
    Configuration<D> Z;
    Z.eps = eps;
    Z.p.resize(N);
    for (std::size_t tries = 0;; ++tries) {
        if (tries >= max_rejects) throw std::runtime_error("sample_box_configuration: no admissible sample");
        for (auto& q : Z.p) {
            q.x[0] = 0.5 * eps + (R - 0.5 * eps) * uniform01(g);
            for (std::size_t k = 1; k < D; ++k) q.x[k] = -R + 2.0 * R * uniform01(g);
            q.v = sample_ball<D>(g, R);
        }
        if (phase_space_contains(Z)) return Z;
        ++rejections;
    }
}

/// Fraction of random initial data whose flow up to t meets two events sharing a particle within each gap_tol.
template <std::size_t D>
inline std::vector<ProbeResult> pathology_probe(int N, double eps, double R, double t, std::size_t samples,
                                                const std::vector<double>& gap_tols, std::uint64_t seed)
{
    std::vector<ProbeResult> out(gap_tols.size());
    std::size_t rej = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        Rng g = make_rng(seed, {0x9a7401ULL, s});
        const Configuration<D> Z = sample_box_configuration<D>(g, N, eps, R, rej);
        for (std::size_t k = 0; k < gap_tols.size(); ++k) {
            FlowParams p;
            p.gap_tol = gap_tols[k];
            p.record_events = false;
            if (advance(Z, t, p).pathological) ++out[k].flagged;
        }
    }
    for (auto& r : out) {
        r.samples = samples;
        r.rejections = rej;
        r.fraction = samples ? double(r.flagged) / double(samples) : 0.0;
        std::tie(r.ci_lo, r.ci_hi) = wilson_interval(r.flagged, samples);
    }
    return out;
}

template <std::size_t D>
inline ProbeResult pathology_probe(int N, double eps, double R, double t, std::size_t samples, double gap_tol,
                                   std::uint64_t seed)
{
    return pathology_probe<D>(N, eps, R, t, samples, std::vector<double>{gap_tol}, seed).front();
}

} // namespace hsgas

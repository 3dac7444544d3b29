#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hsgas/cutoffs.hpp"
#include "hsgas/free_flow.hpp"
#include "hsgas/geometry.hpp"
#include "hsgas/hard_sphere.hpp"
#include "hsgas/rng.hpp"

namespace hsgas {

enum class PseudoKind { eps, zero };
enum class BuildStatus { ok, invalid_adjunction, sign_inconsistent, pathological };

inline const char* to_string(BuildStatus s)
{
    switch (s) {
    case BuildStatus::ok: return "ok";
    case BuildStatus::invalid_adjunction: return "invalid_adjunction";
    case BuildStatus::sign_inconsistent: return "sign_inconsistent";
    case BuildStatus::pathological: return "pathological";
    }
    return "?";
}

/// One collision tree. Labels are 0-based: labels[i] < s + i. signs[i] = +1 post-collisional, -1 pre-collisional.
template <std::size_t D>
struct CollisionTreeSpec {
    int s = 1;
    double t = 0.0;
    std::vector<double> times; // strictly decreasing
    std::vector<int> labels;
    std::vector<int> signs;
    std::vector<Vec<D>> omega;
    std::vector<Vec<D>> vel;

    int k() const { return static_cast<int>(times.size()); }

    void validate() const
    {
        const std::size_t n = times.size();
        if (s < 1) throw std::invalid_argument("tree: s < 1");
        if (labels.size() != n || signs.size() != n || omega.size() != n || vel.size() != n)
            throw std::invalid_argument("tree: size mismatch");
        double prev = t;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(times[i] < prev) && !(i == 0 && times[i] <= t)) throw std::invalid_argument("tree: times not decreasing");
            if (times[i] < 0.0) throw std::invalid_argument("tree: negative time");
            prev = times[i];
            if (labels[i] < 0 || labels[i] >= s + static_cast<int>(i)) throw std::invalid_argument("tree: label out of range");
            if (signs[i] != 1 && signs[i] != -1) throw std::invalid_argument("tree: sign must be +1 or -1");
            checked_unit(omega[i]);
        }
    }
};

/// Accepts times listed in either order and stores them decreasing.
template <std::size_t D>
inline void normalize_times(CollisionTreeSpec<D>& spec)
{
    if (spec.times.size() > 1 && std::is_sorted(spec.times.begin(), spec.times.end()))
        std::reverse(spec.times.begin(), spec.times.end());
}

template <std::size_t D>
inline nlohmann::json tree_to_json(const CollisionTreeSpec<D>& spec)
{
    nlohmann::json j;
    j["d"] = D;
    j["s"] = spec.s;
    j["t"] = spec.t;
    j["times"] = spec.times;
    j["labels"] = spec.labels;
    j["signs"] = spec.signs;
    j["omega"] = spec.omega;
    j["v"] = spec.vel;
    return j;
}

template <std::size_t D>
inline CollisionTreeSpec<D> tree_from_json(const nlohmann::json& j)
{
    if (j.at("d").get<int>() != D) throw std::invalid_argument("tree: dimension mismatch");
    CollisionTreeSpec<D> spec;
    spec.s = j.at("s").get<int>();
    spec.t = j.at("t").get<double>();
    spec.times = j.at("times").get<std::vector<double>>();
    spec.labels = j.at("labels").get<std::vector<int>>();
    spec.signs = j.at("signs").get<std::vector<int>>();
    spec.omega = j.at("omega").get<std::vector<Vec<D>>>();
    spec.vel = j.at("v").get<std::vector<Vec<D>>>();
    normalize_times(spec);
    spec.validate();
    return spec;
}

struct Recollision {
    int i = -1, j = -1;
    double time = 0.0; // forward time at which it happens
};

template <std::size_t D>
struct PseudoTrajectory {
    PseudoKind kind = PseudoKind::zero;
    BuildStatus status = BuildStatus::ok;
    int failed_at = -1;                         ///< adjunction index of a failure
    std::vector<Configuration<D>> before;       ///< configuration at times[i], before adjunction i
    std::vector<Vec<D>> kernel_velocity;        ///< velocity of particle labels[i] at times[i]
    Configuration<D> final;                     ///< configuration at time 0
    std::optional<Recollision> recollision;     ///< first unprescribed collision
    std::size_t recollisions = 0;
    std::vector<int> bounces;                   ///< wall bounces per particle
};

/// Incremental backward construction of a pseudo-trajectory.
template <std::size_t D>
class PseudoBuilder {
public:
    PseudoBuilder(const Configuration<D>& Zs, double t, PseudoKind kind, double eps, FlowParams prm = {})
        : kind_(kind), eps_(kind == PseudoKind::eps ? eps : 0.0), t_(t), Z_(Zs), prm_(prm)
    {
        Z_.eps = eps_;
        if (!phase_space_contains(Z_)) throw std::invalid_argument("pseudo: initial configuration outside phase space");
        prm_.record_events = true;
        bounces_.assign(Z_.size(), 0);
    }

    double time() const { return t_; }
    const Configuration<D>& config() const { return Z_; }
    BuildStatus status() const { return status_; }
    const std::optional<Recollision>& recollision() const { return rec_; }
    std::size_t recollisions() const { return nrec_; }
    const std::vector<int>& bounces() const { return bounces_; }

    /// Backward transport down to absolute time tn <= time().
    BuildStatus transport_to(double tn)
    {
        if (status_ != BuildStatus::ok) return status_;
        const double dt = t_ - tn;
        if (dt < 0.0) throw std::invalid_argument("pseudo: transport forward in time");
        if (dt == 0.0) return status_;
        if (kind_ == PseudoKind::zero) {
            for (std::size_t i = 0; i < Z_.size(); ++i) {
                if (Z_.p[i].x[0] - dt * Z_.p[i].v[0] < 0.0) ++bounces_[i];
                Z_.p[i] = free_transport(Z_.p[i], -dt);
            }
        } else {
            EventSim<D> sim(negate_velocities(Z_), prm_);
            sim.run_until(dt);
            if (sim.pathological()) status_ = BuildStatus::pathological;
            for (const auto& e : sim.events()) {
                if (e.kind == EventKind::wall) {
                    ++bounces_[e.i];
                } else {
                    if (!rec_) rec_ = Recollision{e.i, e.j, t_ - e.time};
                    ++nrec_;
                }
            }
            Z_ = negate_velocities(sim.state());
        }
        t_ = tn;
        return status_;
    }

    /// Adjoins particle size() next to particle j with parameters (omega, v).
    BuildStatus adjoin(int j, const Vec<D>& omega_in, const Vec<D>& v, int sign)
    {
        if (status_ != BuildStatus::ok) return status_;
        if (j < 0 || j >= static_cast<int>(Z_.size())) throw std::invalid_argument("pseudo: label out of range");
        const Vec<D> omega = checked_unit(omega_in);
        const double c = dot(omega, v - Z_.p[j].v);
        if (!((sign > 0 && c > 0.0) || (sign < 0 && c < 0.0))) return status_ = BuildStatus::sign_inconsistent;
        ParticleState<D> q{Z_.p[j].x + eps_ * omega, v};
        if (kind_ == PseudoKind::eps) {
            if (q.x[0] < 0.5 * eps_ - geom_tol) return status_ = BuildStatus::invalid_adjunction;
            const double lim = eps_ - geom_tol;
            for (std::size_t m = 0; m < Z_.size(); ++m)
                if (static_cast<int>(m) != j && norm2(Z_.p[m].x - q.x) < lim * lim)
                    return status_ = BuildStatus::invalid_adjunction;
        }
        Z_.p.push_back(q);
        bounces_.push_back(0);
        if (sign > 0) {
            auto [a, b] = scattering_map(Z_.p[j].v, Z_.p.back().v, omega);
            Z_.p[j].v = a;
            Z_.p.back().v = b;
        }
        return status_;
    }

private:
    PseudoKind kind_;
    double eps_;
    double t_;
    Configuration<D> Z_;
    FlowParams prm_;
    BuildStatus status_ = BuildStatus::ok;
    std::optional<Recollision> rec_;
    std::size_t nrec_ = 0;
    std::vector<int> bounces_;
};

template <std::size_t D>
inline PseudoTrajectory<D> build_pseudo(const Configuration<D>& Zs, const CollisionTreeSpec<D>& spec, PseudoKind kind,
                                        double eps, FlowParams prm = {})
{
    spec.validate();
    if (static_cast<int>(Zs.size()) != spec.s) throw std::invalid_argument("pseudo: configuration size differs from s");
    PseudoBuilder<D> b(Zs, spec.t, kind, eps, prm);
    PseudoTrajectory<D> P;
    P.kind = kind;
    for (int i = 0; i < spec.k(); ++i) {
        if (b.transport_to(spec.times[i]) != BuildStatus::ok) {
            P.failed_at = i;
            break;
        }
        P.before.push_back(b.config());
        P.kernel_velocity.push_back(b.config().p[spec.labels[i]].v);
        if (b.adjoin(spec.labels[i], spec.omega[i], spec.vel[i], spec.signs[i]) != BuildStatus::ok) {
            P.failed_at = i;
            break;
        }
    }
    if (b.status() == BuildStatus::ok) b.transport_to(0.0);
    P.status = b.status();
    P.final = b.config();
    P.recollision = b.recollision();
    P.recollisions = b.recollisions();
    P.bounces = b.bounces();
    return P;
}

enum class VelocityRelation { equal, mirrored, other };

struct DivergenceReport {
    double max_distance = 0.0;
    std::vector<VelocityRelation> relation;
};

/// Position divergence at time 0 between the eps and 0 pseudo-trajectories of the same tree.
template <std::size_t D>
inline DivergenceReport divergence_at_zero(const PseudoTrajectory<D>& pe, const PseudoTrajectory<D>& p0,
                                           double vel_tol = 1e-9)
{
    if (pe.kind != PseudoKind::eps || p0.kind != PseudoKind::zero)
        throw std::invalid_argument("divergence_at_zero: expects (eps, 0) trajectories");
    if (pe.status != BuildStatus::ok || p0.status != BuildStatus::ok)
        throw std::invalid_argument("divergence_at_zero: incomplete trajectory");
    if (pe.final.size() != p0.final.size()) throw std::invalid_argument("divergence_at_zero: mismatched specs");
    DivergenceReport r;
    for (std::size_t m = 0; m < pe.final.size(); ++m) {
        const auto& a = pe.final.p[m];
        const auto& b = p0.final.p[m];
        r.max_distance = std::max(r.max_distance, norm(a.x - b.x));
        const double scale = std::max(1.0, norm(b.v));
        if (norm(a.v - b.v) <= vel_tol * scale)
            r.relation.push_back(VelocityRelation::equal);
        else if (norm(a.v - specular_reflect(b.v)) <= vel_tol * scale)
            r.relation.push_back(VelocityRelation::mirrored);
        else
            r.relation.push_back(VelocityRelation::other);
    }
    return r;
}

struct Interval {
    double lo = 0.0, hi = 0.0;
    bool empty() const { return !(hi > lo); }
    double length() const { return empty() ? 0.0 : hi - lo; }
    bool contains(double x) const { return x > lo && x < hi; }
};

/// Backward elapsed times tau in [0, window] at which particle j of a free-flow configuration is closer than rho to the wall.
template <std::size_t D>
inline Interval pathological_times(const Configuration<D>& Z, int j, double rho, double alpha, double window)
{
    const double x1 = Z.p.at(j).x[0];
    const double v1 = Z.p.at(j).v[0];
    if (std::abs(v1) < alpha) throw std::invalid_argument("pathological_times: grazing velocity");
    // |x1 - tau v1| < rho
    double lo = (x1 - rho) / v1, hi = (x1 + rho) / v1;
    if (lo > hi) std::swap(lo, hi);
    Interval I{std::max(lo, 0.0), std::min(hi, window)};
    if (I.empty()) I = {0.0, 0.0};
    return I;
}

enum class Exclusion {
    none,
    grazing,
    near_velocity,
    wall_recollision,
    wall_free_flow,
    shooting,
    shooting_free_flow,
};

inline const char* to_string(Exclusion e)
{
    switch (e) {
    case Exclusion::none: return "none";
    case Exclusion::grazing: return "grazing";
    case Exclusion::near_velocity: return "near_velocity";
    case Exclusion::wall_recollision: return "wall_recollision";
    case Exclusion::wall_free_flow: return "wall_free_flow";
    case Exclusion::shooting: return "shooting";
    case Exclusion::shooting_free_flow: return "shooting_free_flow";
    }
    return "?";
}

/// Velocity w of a particle at x2 lies in one of the three shooting cylinder families of a partner (x1, u).
template <std::size_t D>
inline bool in_shooting_cylinders(const Vec<D>& x1, const Vec<D>& u, const Vec<D>& x2, const Vec<D>& w, double r_direct,
                                  double r_reflected)
{
    auto hit = [&](const Vec<D>& anchor, const Vec<D>& axis, double r) {
        if (!(norm2(axis) > 0.0)) return norm(w - anchor) <= r;
        return distance_to_axis(anchor, axis, w) <= r;
    };
    if (hit(u, x1 - x2, r_direct)) return true;
    const Vec<D> su = specular_reflect(u);
    if (hit(su, specular_reflect(x1) - x2, r_reflected)) return true;
    return hit(su, specular_reflect(Vec<D>(x1 - specular_reflect(x2))), r_reflected);
}

/// Surgery set E_j for adjoining a particle next to particle j of the free-flow configuration Zbar.
template <std::size_t D>
inline Exclusion surgery_excluded(const Configuration<D>& Zbar, int j, const Vec<D>& omega_in, const Vec<D>& v,
                                  const CutoffParams& c, bool with_grazing = true)
{
    const Vec<D> omega = checked_unit(omega_in);
    const Vec<D>& xj = Zbar.p.at(j).x;
    const Vec<D>& vj = Zbar.p[j].v;
    const bool post = dot(omega, v - vj) > 0.0;
    Vec<D> vjn = vj, vn = v;
    if (post) std::tie(vjn, vn) = scattering_map(vj, v, omega);

    if (with_grazing && (std::abs(vn[0]) <= c.alpha || (post && std::abs(vjn[0]) <= c.alpha))) return Exclusion::grazing;
    if (norm(v - vj) < c.eta) return Exclusion::near_velocity;

    const Vec<D> E1 = e1<D>();
    const double r_wall = 10.0 * c.R * c.a / c.rho;
    const double r_free = c.eps0 / c.delta;
    auto wall_cyl = [&](double r) {
        if (distance_to_axis(specular_reflect(vjn), E1, vn) <= r) return true;
        if (post) {
            const Vec<D> axis = E1 - 2.0 * dot(E1, omega) * omega;
            if (distance_to_axis(Vec<D>{}, axis, v - vj) <= r) return true;
        }
        return false;
    };
    if (wall_cyl(r_wall)) return Exclusion::wall_recollision;
    if (wall_cyl(r_free)) return Exclusion::wall_free_flow;

    const double r1 = 12.0 * c.R * c.a / c.eps0, r2 = 16.0 * c.R * c.a / c.eps0;
    for (std::size_t i = 0; i < Zbar.size(); ++i) {
        if (static_cast<int>(i) == j) continue;
        const Vec<D>& xi = Zbar.p[i].x;
        const Vec<D>& vi = Zbar.p[i].v;
        for (const Vec<D>& u : {vi, specular_reflect(vi)}) {
            if (in_shooting_cylinders(xi, u, xj, vn, r1, r2)) return Exclusion::shooting;
            if (post && in_shooting_cylinders(xi, u, xj, vjn, r1, r2)) return Exclusion::shooting;
        }
        if (in_shooting_cylinders(xi, vi, xj, vn, r_free, r_free)) return Exclusion::shooting_free_flow;
        if (post && in_shooting_cylinders(xi, vi, xj, vjn, r_free, r_free)) return Exclusion::shooting_free_flow;
    }
    return Exclusion::none;
}

/// Draws a collision tree rooted at Zs whose adjunctions avoid the pathological times and parameters;
/// returns nothing when the draw lands in them (the caller redraws).
template <std::size_t D>
inline std::optional<CollisionTreeSpec<D>> sample_compliant_tree(Rng& g, const Configuration<D>& Zs, int k, double t,
                                                                 const CutoffParams& c)
{
    const int s = static_cast<int>(Zs.size());
    const double L = t - (k - 1) * c.delta;
    if (k > 0 && L < 0.0) throw std::invalid_argument("sample_compliant_tree: t < (k-1) delta");
    CollisionTreeSpec<D> spec;
    spec.s = s;
    spec.t = t;
    std::vector<double> u(k);
    for (auto& x : u) x = uniform01(g);
    std::sort(u.begin(), u.end(), std::greater<>());
    for (int i = 0; i < k; ++i) spec.times.push_back(u[i] * L + (k - 1 - i) * c.delta);
    double e2 = 0.0;
    for (const auto& q : Zs.p) e2 += norm2(q.v);
    PseudoBuilder<D> b(Zs, t, PseudoKind::zero, 0.0);
    for (int i = 0; i < k; ++i) {
        b.transport_to(spec.times[i]);
        const int j = std::min(static_cast<int>(uniform01(g) * (s + i)), s + i - 1);
        const Vec<D> omega = sample_unit_sphere<D>(g);
        const Vec<D> v = sample_ball<D>(g, c.R);
        const Configuration<D>& Z = b.config();
        e2 += norm2(v);
        if (e2 > c.R * c.R) return std::nullopt;
        if (Z.p[j].x[0] < c.rho) return std::nullopt;
        if (surgery_excluded(Z, j, omega, v, c) != Exclusion::none) return std::nullopt;
        const int sign = dot(omega, v - Z.p[j].v) > 0.0 ? 1 : -1;
        spec.labels.push_back(j);
        spec.signs.push_back(sign);
        spec.omega.push_back(omega);
        spec.vel.push_back(v);
        b.adjoin(j, omega, v, sign);
    }
    return spec;
}

struct MeasureEstimate {
    double measure = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    double se = 0.0;
    std::size_t samples = 0;
    std::size_t hits = 0;
};

inline MeasureEstimate measure_from_hits(std::size_t hits, std::size_t n, double total)
{
    MeasureEstimate m;
    m.samples = n;
    m.hits = hits;
    const double p = n ? double(hits) / double(n) : 0.0;
    m.measure = total * p;
    auto [lo, hi] = wilson_interval(hits, n);
    m.ci_lo = total * lo;
    m.ci_hi = total * hi;
    m.se = n ? total * std::sqrt(p * (1 - p) / double(n)) : 0.0;
    return m;
}

struct BadSetEstimate {
    MeasureEstimate total;      ///< any clause violated
    MeasureEstimate free_flow;  ///< free-flow clause violated
    MeasureEstimate hard_only;  ///< only the recollision clause violated
    MeasureEstimate superset;   ///< union of the excluded cylinders and the near-velocity ball (grazing set left out)
    std::size_t outside_superset = 0; ///< samples in the bad set but not in the superset
    std::size_t undetermined = 0;
};

/// Monte Carlo measure of the adjunction parameters (omega, v) next to the last particle of Zbar that are not good by adjunction.
template <std::size_t D>
inline BadSetEstimate bad_set_estimate(const Configuration<D>& Zbar_in, const CutoffParams& c, std::size_t samples,
                                       std::uint64_t seed)
{
    Configuration<D> Zbar = Zbar_in;
    Zbar.eps = 0.0;
    const int k = static_cast<int>(Zbar.size());
    if (k < 1) throw std::invalid_argument("bad_set_estimate: empty configuration");
    std::string pre;
    if (!good_config_free(Zbar, c.eps0)) pre += "Z̄_k is not a free-flow good configuration at ε₀; ";
    if (Zbar.p[k - 1].x[0] < c.rho) pre += "x̄_k·e1 < ρ; ";
    if (!pre.empty()) throw std::invalid_argument("bad_set_estimate: " + pre);

    // Allowed Z_k family: nominal plus axis-extreme shifts of one particle, times S0 substitutions of v_1..v_{k-1}
    std::vector<Configuration<D>> family;
    const int nsub = 1 << (k - 1);
    for (int mask = 0; mask < nsub; ++mask) {
        Configuration<D> base = Zbar;
        base.eps = c.eps;
        for (int i = 0; i + 1 < k; ++i)
            if (mask & (1 << i)) base.p[i].v = specular_reflect(base.p[i].v);
        std::vector<Configuration<D>> shifted{base};
        for (int i = 0; i < k; ++i)
            for (std::size_t l = 0; l < D; ++l)
                for (double sgn : {-1.0, 1.0}) {
                    Configuration<D> z = base;
                    z.p[i].x[l] += sgn * c.a;
                    shifted.push_back(z);
                }
        for (auto& z : shifted)
            if (phase_space_contains(z) && (k == 1 || good_config_hard(z, c.eps) == Verdict::yes))
                family.push_back(std::move(z));
    }

    const double total = sphere_area<D>() * ball_volume<D>(c.R);
    std::size_t bad = 0, bad_free = 0, bad_hard_only = 0, undet = 0, in_sup = 0, outside = 0;
    for (std::size_t n = 0; n < samples; ++n) {
        Rng g = make_rng(seed, {0xbad5e7ULL, n});
        const Vec<D> omega = sample_unit_sphere<D>(g);
        const Vec<D> v = sample_ball<D>(g, c.R);
        const bool post = dot(omega, v - Zbar.p[k - 1].v) > 0.0;

        Configuration<D> z0 = Zbar;
        z0.p.push_back({Zbar.p[k - 1].x, v});
        if (post) std::tie(z0.p[k - 1].v, z0.p[k].v) = scattering_map(z0.p[k - 1].v, z0.p[k].v, omega);
        const bool free_bad = !good_config_free(free_transport(z0, -c.delta), c.eps0);

        bool hard_bad = false;
        for (const auto& zk : family) {
            Configuration<D> ze = zk;
            ze.p.push_back({zk.p[k - 1].x + c.eps * omega, v});
            if (post) std::tie(ze.p[k - 1].v, ze.p[k].v) = scattering_map(ze.p[k - 1].v, ze.p[k].v, omega);
            if (!phase_space_contains(ze)) {
                hard_bad = true;
                break;
            }
            const Verdict vd = good_config_hard(ze, c.eps);
            if (vd == Verdict::undetermined) ++undet;
            if (vd != Verdict::yes) {
                hard_bad = true;
                break;
            }
        }
        const bool sup = surgery_excluded(Zbar, k - 1, omega, v, c, false) != Exclusion::none;
        if (sup) ++in_sup;
        if ((free_bad || hard_bad) && !sup) ++outside;
        if (free_bad) ++bad_free;
        if (hard_bad && !free_bad) ++bad_hard_only;
        if (free_bad || hard_bad) ++bad;
    }
    BadSetEstimate r;
    r.total = measure_from_hits(bad, samples, total);
    r.free_flow = measure_from_hits(bad_free, samples, total);
    r.hard_only = measure_from_hits(bad_hard_only, samples, total);
    r.superset = measure_from_hits(in_sup, samples, total);
    r.outside_superset = outside;
    r.undetermined = undet;
    return r;
}

/// Monte Carlo measure of post-collisional parameters (omega, v2) producing a grazing outgoing velocity.
template <std::size_t D>
inline MeasureEstimate grazing_set_estimate(const Vec<D>& v1, double R, double alpha, std::size_t samples,
                                            std::uint64_t seed)
{
    if (norm(v1) > R) throw std::invalid_argument("grazing_set_estimate: |v1| > R");
    std::size_t hits = 0;
    Rng g = make_rng(seed, {0x9a21e6ULL});
    for (std::size_t n = 0; n < samples; ++n) {
        const Vec<D> omega = sample_unit_sphere<D>(g);
        const Vec<D> v2 = sample_ball<D>(g, R);
        if (!(dot(v2 - v1, omega) > 0.0)) continue;
        auto [a, b] = scattering_map(v1, v2, omega);
        if (std::abs(a[0]) <= alpha || std::abs(b[0]) <= alpha) ++hits;
    }
    return measure_from_hits(hits, samples, sphere_area<D>() * ball_volume<D>(R));
}

struct DomainVerdict {
    bool in_omega = true;
    bool in_delta = true;
    std::string failing_clause; ///< first failing clause, empty when both hold
};

/// Distance of w to the line u + R*axis; distance to u when the axis vanishes.
template <std::size_t D>
inline double line_distance(const Vec<D>& u, const Vec<D>& axis, const Vec<D>& w)
{
    if (!(norm2(axis) > 0.0)) return norm(w - u);
    return distance_to_axis(u, axis, w);
}

/// Minima of the quantities entering the convergence-domain clauses.
struct DomainMinima {
    double wall = inf;      ///< min x.e1
    double max_speed = 0.0; ///< max |v| (the energy clause uses |V|)
    double energy = 0.0;    ///< |V|
    double pair = inf;      ///< min |x_i - x_j|
    double normal = inf;    ///< min |v.e1|
    double line = inf;      ///< min distance of v_j to v_i + span(x_i - x_j)
    double line_s0 = inf;   ///< min distance of v_j to S0 v_i + span(S0 x_i - x_j)
};

template <std::size_t D>
inline DomainMinima domain_minima(const Configuration<D>& Z)
{
    DomainMinima m;
    double e = 0.0;
    for (const auto& q : Z.p) {
        m.wall = std::min(m.wall, q.x[0]);
        m.max_speed = std::max(m.max_speed, norm(q.v));
        m.normal = std::min(m.normal, std::abs(q.v[0]));
        e += norm2(q.v);
    }
    m.energy = std::sqrt(e);
    for (std::size_t i = 0; i < Z.size(); ++i)
        for (std::size_t j = i + 1; j < Z.size(); ++j) {
            const auto& a = Z.p[i];
            const auto& b = Z.p[j];
            m.pair = std::min(m.pair, norm(a.x - b.x));
            m.line = std::min(m.line, line_distance<D>(a.v, a.x - b.x, b.v));
            m.line_s0 = std::min(m.line_s0, line_distance<D>(specular_reflect(a.v), specular_reflect(a.x) - b.x, b.v));
        }
    return m;
}

/// Membership in the open domain Omega_s and in its compact exhaustion Delta_s built from the cut-off thresholds.
template <std::size_t D>
inline DomainVerdict domain_predicates(const Configuration<D>& Z, const CutoffParams& c)
{
    DomainVerdict r;
    const DomainMinima m = domain_minima(Z);
    auto fail = [&](bool bad, const char* name, bool omega) {
        if (!bad) return;
        if (omega) r.in_omega = false;
        r.in_delta = false;
        if (r.failing_clause.empty()) r.failing_clause = name;
    };
    fail(!(m.pair > 0.0), "Omega^1", true);
    fail(!(m.normal > 0.0), "Omega^2", true);
    fail(!(m.line > 0.0), "Omega^3", true);
    fail(!(m.line_s0 > 0.0), "Omega^4", true);
    fail(!(m.wall > c.eps / 2), "Delta^1", false);
    fail(!(m.energy <= c.R), "Delta^2", false);
    fail(!(m.pair >= c.eps0), "Delta^3", false);
    fail(!(m.normal >= c.alpha), "Delta^4", false);
    fail(!(m.line >= c.gamma), "Delta^5", false);
    fail(!(m.line_s0 >= c.gamma), "Delta^6", false);
    return r;
}

} // namespace hsgas

#include "gms/fpt.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace gms {

double bridge_crossing_probability(const FlowCache& flow, double x_l, double x_r, double l,
                                   double r, double level_l, double level_r) {
    if (x_l >= level_l || x_r >= level_r) return 1.0;
    // Doob time change: y = x / g, eta = h(t) turns the pinned process
    // into a Brownian bridge; a boundary linear in (eta, y) has the exact
    // exponential crossing probability. The clock gap eta_r - eta_l is
    // h(l, r), computed locally so short intervals keep full precision.
    const double gl = flow.g(l)(0, 0), gr = flow.g(r)(0, 0);
    const double gap = flow.h0(l, r)(0, 0);
    if (!(gap > 0.0)) throw DegeneracyError("degenerate interval in crossing probability");
    const double a_l = level_l / gl - x_l / gl;
    const double a_r = level_r / gr - x_r / gr;
    return std::exp(-2.0 * a_l * a_r / gap);
}

namespace {

struct PathPoint {
    double t;
    Vec x;
    int level;  ///< dyadic level of the interval starting here
};

/// Crossing statistics of the scalar projection of a pinned interval.
class BoundaryView {
public:
    BoundaryView(const SchauderBasis& basis, const FptQuery& q)
        : basis_(basis), query_(q), d_(basis.dim()) {
        if (d_ > 1) {
            if (query_.direction.size() != d_)
                throw InputError("half-space direction must have the state dimension");
            dir_ = query_.direction;
        } else {
            dir_ = Vec::Ones(1);
        }
    }

    double level_at(double t) const { return query_.level_fn ? query_.level_fn(t) : query_.level; }
    double project(const Vec& x) const { return dir_.dot(x); }

    double crossing_probability(const PathPoint& a, const PathPoint& b) const {
        const double sa = project(a.x), sb = project(b.x);
        const double la = level_at(a.t), lb = level_at(b.t);
        if (sa >= la || sb >= lb) return 1.0;
        if (d_ == 1)
            return bridge_crossing_probability(basis_.flow(), sa, sb, a.t, b.t, la, lb);
        // Projected multi-D process: use the variance of the projection as
        // the bridge clock (approximation; exact 1-D statistics do not
        // project for general models).
        const FlowCache& fl = basis_.flow();
        const double va = dir_.dot(fl.covariance(a.t, a.t) * dir_);
        const double vb = dir_.dot(fl.covariance(b.t, b.t) * dir_);
        const double gap = vb - va;
        if (!(gap > 0.0)) return 0.0;
        return std::exp(-2.0 * (la - sa) * (lb - sb) / gap);
    }

private:
    const SchauderBasis& basis_;
    const FptQuery& query_;
    int d_;
    Vec dir_;
};

FptRecord run_single_path(const SchauderBasis& basis, const FptQuery& q,
                          const BoundaryView& boundary, std::int64_t path_id,
                          std::atomic<std::int64_t>& refined) {
    const SamplePath coarse = sample_path(basis, q.coarse_depth, q.seed, std::uint64_t(path_id));
    std::vector<PathPoint> pts;
    pts.reserve(coarse.times.size());
    for (std::size_t i = 0; i < coarse.times.size(); ++i)
        pts.push_back({coarse.times[i], coarse.values[i], q.coarse_depth});

    // Refine, left of the first certain crossing, every interval whose
    // crossing probability is above p_low, until max_depth.
    std::int64_t local_refined = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        double t_stop = 2.0;  // first definitely-crossed grid point
        for (const PathPoint& p : pts)
            if (boundary.project(p.x) >= boundary.level_at(p.t)) {
                t_stop = p.t;
                break;
            }
        std::vector<PathPoint> next;
        next.reserve(pts.size() * 2);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            next.push_back(pts[i]);
            if (i + 1 == pts.size()) break;
            if (pts[i].t >= t_stop || pts[i].level >= q.max_depth) continue;
            const double p = boundary.crossing_probability(pts[i], pts[i + 1]);
            if (p <= q.p_low) continue;
            // Split: draw the midpoint of support (level+1, k).
            const int level = pts[i].level + 1;
            const int k = int(std::llround(std::ldexp(pts[i].t, level - 1)));
            const BasisElement& el = basis.element(level, k);
            Vec z(basis.dim());
            for (int c = 0; c < basis.dim(); ++c)
                z[c] = normal_draw(q.seed, std::uint64_t(path_id), level, k, c);
            Vec mid = el.mu_l_mid * pts[i].x + el.mu_r_mid * pts[i + 1].x + el.sigma_root * z;
            next.push_back({el.m, std::move(mid), level});
            next.back().level = level;
            next[next.size() - 2].level = level;
            ++local_refined;
            changed = true;
        }
        pts.swap(next);
    }
    refined += local_refined;

    FptRecord rec;
    rec.path_id = path_id;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (boundary.project(pts[i].x) >= boundary.level_at(pts[i].t)) {
            rec.crossed = true;
            rec.tau_lo = i == 0 ? 0.0 : pts[i - 1].t;
            rec.tau_hi = pts[i].t;
            return rec;
        }
        if (i + 1 < pts.size() &&
            boundary.crossing_probability(pts[i], pts[i + 1]) >= q.p_high) {
            rec.crossed = true;
            rec.tau_lo = pts[i].t;
            rec.tau_hi = pts[i + 1].t;
            return rec;
        }
    }
    rec.crossed = false;
    rec.tau_lo = rec.tau_hi = std::numeric_limits<double>::quiet_NaN();
    return rec;
}

}  // namespace

std::vector<FptRecord> first_passage(const SchauderBasis& basis, const FptQuery& query,
                                     FptStats* stats) {
    if (query.max_depth > basis.max_level())
        throw RangeError("max_depth exceeds the built basis level");
    if (query.coarse_depth > query.max_depth)
        throw RangeError("coarse_depth exceeds max_depth");
    if (!(query.p_low > 0.0 && query.p_low < query.p_high && query.p_high < 1.0))
        throw RangeError("thresholds must satisfy 0 < p_low < p_high < 1");

    const BoundaryView boundary(basis, query);
    std::vector<FptRecord> records(query.paths);
    std::atomic<std::int64_t> refined{0};

    const int threads = std::max(1, query.threads);
    auto worker = [&](std::int64_t first, std::int64_t last) {
        for (std::int64_t id = first; id < last; ++id)
            records[id] = run_single_path(basis, query, boundary, id, refined);
    };
    if (threads == 1 || query.paths < 2) {
        worker(0, query.paths);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w)
            pool.emplace_back(worker, query.paths * w / threads, query.paths * (w + 1) / threads);
        for (auto& th : pool) th.join();
    }

    if (stats) {
        stats->refined_nodes = refined.load();
        stats->full_tree_nodes =
            query.paths * ((std::int64_t(1) << query.max_depth) -
                           (std::int64_t(1) << query.coarse_depth));
    }
    return records;
}

}  // namespace gms

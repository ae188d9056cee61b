#pragma once

// Randomized Caratheodory decomposition: write a point x of a bounded
// polytope  P = {z >= 0, A z <= b, M z = c}  as a convex combination of at
// most n+1 vertices.  Each level maximizes a uniform random objective over
// the current face, walks from x away from that vertex until a facet stops
// the ray, and recurses on the facet.
//
// Nonnegativity is part of the polytope type rather than rows of A so that
// basic solutions of the simplex are guaranteed to be vertices.  Works in
// double or exact rational arithmetic; grid games additionally get a
// combinatorial vertex oracle that bypasses the LP.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "patrol/common.hpp"
#include "patrol/lp.hpp"
#include "patrol/model.hpp"

namespace patrol::card {

template <class T>
struct Polytope {
    int n = 0;
    std::vector<std::vector<T>> A;  // A z <= b
    std::vector<T> b;
    std::vector<std::vector<T>> M;  // M z = c
    std::vector<T> c;
};

using PolytopeD = Polytope<double>;
using PolytopeQ = Polytope<Rational>;

template <class T>
struct Decomposition {
    std::vector<std::vector<T>> vertices;
    std::vector<T> weights;
    int depth = 0;  // facet-recursion levels, including the terminal one
};

struct DecomposeOptions {
    double facet_tol = 1e-9;     // threshold on A_i (x - v1) for candidate rows
    double stall_tol = 1e-7;     // ||x - v1||_inf below this means x is the vertex v1
    double membership_tol = 1e-8;
    int max_levels = 0;          // 0: n + 2
};

// maps (objective, pinned-to-zero coordinate mask) to an integral vertex of
// the face {z in P : z_j = 0 for pinned j}
using VertexOracle =
    std::function<std::vector<double>(const std::vector<double>&, const std::vector<uint8_t>&)>;

namespace detail {

template <class T>
T abs_of(const T& v) {
    return v < T(0) ? -v : v;
}

// incremental row-space rank via Gaussian elimination; exact when T is
// rational, thresholded against the input row's scale when T is double
template <class T>
class RankTracker {
  public:
    explicit RankTracker(int n) : n_(n) {}

    int rank() const { return int(rows_.size()); }

    bool add(std::vector<T> row) {
        if (int(row.size()) != n_) throw Error("rank tracker: row size mismatch");
        T scale = T(0);
        for (const T& v : row)
            if (abs_of(v) > scale) scale = abs_of(v);
        for (const auto& [piv, r] : rows_) {
            T f = row[piv];
            if (f == T(0)) continue;
            for (int j = 0; j < n_; ++j) row[j] -= f * r[j];
            row[piv] = T(0);
        }
        int piv = -1;
        T best = lp::Eps<T>::pivot() * (T(1) + scale);
        for (int j = 0; j < n_; ++j)
            if (abs_of(row[j]) > best) {
                best = abs_of(row[j]);
                piv = j;
            }
        if (piv < 0) return false;
        T d = row[piv];
        for (int j = 0; j < n_; ++j) row[j] /= d;
        row[piv] = T(1);
        rows_.push_back({piv, std::move(row)});
        return true;
    }

  private:
    int n_;
    std::vector<std::pair<int, std::vector<T>>> rows_;
};

template <class T>
std::vector<T> random_objective(int n, Rng& rng) {
    std::vector<T> a(n);
    std::uniform_int_distribution<int> d(-65536, 65536);
    for (int j = 0; j < n; ++j) a[j] = T(d(rng)) / T(65536);
    return a;
}

template <>
inline std::vector<double> random_objective<double>(int n, Rng& rng) {
    std::vector<double> a(n);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int j = 0; j < n; ++j) a[j] = d(rng);
    return a;
}

}  // namespace detail

template <class T>
void check_membership(const Polytope<T>& P, const std::vector<T>& x, const T& tol) {
    if (int(x.size()) != P.n) throw NotInPolytope("membership: dimension mismatch");
    for (int j = 0; j < P.n; ++j)
        if (x[j] < -tol) throw NotInPolytope("membership: negative coordinate");
    for (size_t i = 0; i < P.A.size(); ++i) {
        T lhs = T(0);
        for (int j = 0; j < P.n; ++j) lhs += P.A[i][j] * x[j];
        if (lhs > P.b[i] + tol) throw NotInPolytope("membership: inequality violated");
    }
    for (size_t i = 0; i < P.M.size(); ++i) {
        T lhs = T(0);
        for (int j = 0; j < P.n; ++j) lhs += P.M[i][j] * x[j];
        T diff = lhs - P.c[i];  // materialized: keeps expression templates out of abs_of
        if (detail::abs_of(diff) > tol) throw NotInPolytope("membership: equality violated");
    }
}

template <class T>
std::vector<T> lp_argmax(const Polytope<T>& P, const std::vector<T>& objective,
                         const std::vector<std::vector<T>>* extra_eq = nullptr,
                         const std::vector<T>* extra_rhs = nullptr) {
    lp::Problem<T> p;
    p.n = P.n;
    p.maximize = true;
    p.c = objective;
    p.A = P.A;
    p.b = P.b;
    p.E = P.M;
    p.f = P.c;
    if (extra_eq) {
        p.E.insert(p.E.end(), extra_eq->begin(), extra_eq->end());
        p.f.insert(p.f.end(), extra_rhs->begin(), extra_rhs->end());
    }
    auto sol = lp::solve(p);
    if (sol.status == lp::Status::Infeasible) throw Infeasible("lp_argmax: empty polytope");
    if (sol.status == lp::Status::Unbounded) throw Unbounded("lp_argmax: unbounded objective");
    return sol.x;
}

namespace detail {

// one ray-shooting level: given v1, find the blocking facet of the ray
// x + t (x - v1).  Rows are scanned bounds first, then A, lowest index wins
// ties.  Returns {t, bound_coord, a_row}; a_row = -1 when a bound blocked.
template <class T>
struct RayHit {
    bool found = false;
    T t = T(0);
    int bound_coord = -1;
    int a_row = -1;
};

template <class T>
RayHit<T> shoot_ray(const Polytope<T>& P, const std::vector<T>& x, const std::vector<T>& v1,
                    const T& tau) {
    RayHit<T> hit;
    auto consider = [&](const T& denom, const T& slack, int bound, int arow) {
        if (denom <= tau) return;
        T t = slack / denom;
        if (t < T(0)) t = T(0);
        if (!hit.found || t < hit.t) {
            hit.found = true;
            hit.t = t;
            hit.bound_coord = bound;
            hit.a_row = arow;
        }
    };
    for (int j = 0; j < P.n; ++j) {
        // bound row -z_j <= 0: denom = v1_j - x_j, slack = x_j
        consider(v1[j] - x[j], x[j], j, -1);
    }
    for (size_t i = 0; i < P.A.size(); ++i) {
        T ax = T(0), av = T(0);
        for (int j = 0; j < P.n; ++j) {
            ax += P.A[i][j] * x[j];
            av += P.A[i][j] * v1[j];
        }
        consider(ax - av, P.b[i] - ax, -1, int(i));
    }
    return hit;
}

}  // namespace detail

template <class T>
Decomposition<T> decompose(const Polytope<T>& P, std::vector<T> x, Rng& rng,
                           const DecomposeOptions& opt = {}) {
    check_membership(P, x, T(opt.membership_tol));
    Decomposition<T> out;
    detail::RankTracker<T> tracker(P.n);
    for (const auto& row : P.M) tracker.add(row);
    std::vector<std::vector<T>> face_eq;
    std::vector<T> face_rhs;
    T scale = T(1);
    int max_levels = opt.max_levels > 0 ? opt.max_levels : P.n + 2;
    for (int level = 0; level < max_levels; ++level) {
        ++out.depth;
        if (tracker.rank() == P.n) {  // the face is a single point: x itself
            out.vertices.push_back(x);
            out.weights.push_back(scale);
            return out;
        }
        auto a = detail::random_objective<T>(P.n, rng);
        auto v1 = lp_argmax(P, a, &face_eq, &face_rhs);
        T dist = T(0);
        for (int j = 0; j < P.n; ++j) {
            T d = x[j] - v1[j];
            d = detail::abs_of(d);
            if (d > dist) dist = d;
        }
        if (dist <= T(opt.stall_tol)) {
            out.vertices.push_back(v1);
            out.weights.push_back(scale);
            return out;
        }
        auto hit = detail::shoot_ray(P, x, v1, T(opt.facet_tol));
        if (!hit.found)
            throw NumericalStall("decompose: no facet blocks the ray but x is not a vertex");
        T w1 = scale * hit.t / (T(1) + hit.t);
        if (w1 > T(0)) {
            out.vertices.push_back(v1);
            out.weights.push_back(w1);
        }
        scale = scale / (T(1) + hit.t);
        for (int j = 0; j < P.n; ++j) x[j] = x[j] + hit.t * (x[j] - v1[j]);
        std::vector<T> row(P.n, T(0));
        T rhs;
        if (hit.a_row >= 0) {
            row = P.A[hit.a_row];
            rhs = P.b[hit.a_row];
        } else {
            row[hit.bound_coord] = T(1);
            rhs = T(0);
            x[hit.bound_coord] = T(0);  // land exactly on the facet
        }
        face_eq.push_back(row);
        face_rhs.push_back(rhs);
        tracker.add(std::move(row));
    }
    throw NumericalStall("decompose: level limit exceeded");
}

// grid fast path: vertex maximization by dynamic programming instead of the
// LP, and no rank bookkeeping (every facet is a z_j >= 0 bound, so the
// recursion terminates via the stall check on an exact integral vertex)
Decomposition<double> decompose(const PolytopeD& P, std::vector<double> x, Rng& rng,
                                const VertexOracle& oracle, const DecomposeOptions& opt = {});

// --- grid realization-space polytope -------------------------------------
//
// One unit of time-expanded flow per patroller: variables are k blocks of
// [source arcs s_i (N of them), then edge arcs per layer step in (t, i, j)
// order, allowed edges only].  Conservation rows make every vertex a k-tuple
// of paths.

struct GridFlowLayout {
    int T = 0, N = 0, k = 0;
    int per_factor = 0;                     // variables per patroller block
    std::vector<std::vector<int>> edge_id;  // [t][i*N+j] -> offset within block, -1 if absent

    int var(int factor, int offset) const { return factor * per_factor + offset; }
    int src(int factor, int i) const { return factor * per_factor + i; }
};

struct GridFlow {
    PolytopeD P;
    GridFlowLayout layout;
};

GridFlow make_grid_flow(const GridGame& g);
VertexOracle make_grid_vertex_oracle(const GridGame& g, const GridFlowLayout& layout);

// averages the 0/1 flow vectors of the mixture's pure strategies
std::vector<double> grid_flow_point(const GridGame& g, const GridFlowLayout& layout,
                                    const ExplicitStrategy& mix);
GridRealization decode_grid_vertex(const GridGame& g, const GridFlowLayout& layout,
                                   const std::vector<double>& z);

// --- FAMS realization-space polytope --------------------------------------
//
// One variable per feasible edge, degree <= 1 per flight, total size = k.

struct FamsMatching {
    PolytopeD P;
    std::vector<std::pair<int, int>> edges;  // global edge order (orig indices)
};

FamsMatching make_fams_matching(const FamsInstance& fi);
std::vector<double> fams_edge_point(const FamsInstance& fi, const FamsMatching& fm,
                                    const ExplicitStrategy& mix);
FamsRealization decode_fams_vertex(const FamsInstance& fi, const FamsMatching& fm,
                                   const std::vector<double>& z);

// --- sampling --------------------------------------------------------------

using DecodeFn = std::function<PureStrategy(const std::vector<double>&)>;

// one-shot draw: fresh decomposition per call
PureStrategy card_sample(const PolytopeD& P, const std::vector<double>& x, const DecodeFn& decode,
                         Rng& rng, const VertexOracle& oracle = nullptr);

// batch flavor for experiments: D decompositions with independent random
// objectives, each draw picks a decomposition uniformly and a vertex by its
// weights
class CardSampler {
  public:
    CardSampler(PolytopeD P, std::vector<double> x, DecodeFn decode, int num_decompositions,
                Rng& rng, const VertexOracle& oracle = nullptr);

    PureStrategy sample(Rng& rng) const;
    // all decoded vertices with averaged weights, deduplicated by covered set
    ExplicitStrategy mixture() const;
    int support_size() const;

  private:
    PolytopeD P_;
    std::vector<double> x_;
    DecodeFn decode_;
    std::vector<Decomposition<double>> decs_;
    std::vector<std::vector<PureStrategy>> decoded_;
};

// sum over targets of max(0, x_cov - mixture coverage); nonzero only when
// patrollers co-locate (grid), zero for FAMS
double coverage_shortfall(const std::vector<double>& x_cov, const ExplicitStrategy& mix);

void validate_polytope(const PolytopeD& P, bool check_bounded);

nlohmann::json polytope_to_json(const PolytopeD& P);
PolytopeD polytope_from_json(const nlohmann::json& j);
PolytopeQ to_rational(const PolytopeD& P);

}  // namespace patrol::card

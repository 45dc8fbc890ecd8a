#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdlvq/assignment.hpp"
#include "mdlvq/lattice.hpp"
#include "mdlvq/nested.hpp"
#include "mdlvq/parallel.hpp"
#include "mdlvq/weights.hpp"

namespace mdlvq {

// n sublattice points, each in central basis coordinates.
using Tuple = std::vector<std::vector<int64_t>>;

struct IndexBoundError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConstructionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotALabelError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct TupleSet {
    std::shared_ptr<const NestedSystem> sys;
    std::vector<Tuple> tuples;
    double radius = 0.0;      // final sphere radius
    double baseRadius = 0.0;  // radius at the volume lower bound
    double psi = 1.0;
};

struct GenerateOptions {
    int workers = 1;
    double tupleBudget = 2e7;
    bool enforceIndexBound = true;
};

namespace detail {

inline void checkConsistent(const NestedSystem& sys, const WeightProfile& p) {
    if (sys.n != p.n) throw std::invalid_argument("system and profile disagree on the number of descriptions");
    if (sys.n < 2) throw std::invalid_argument("at least two descriptions are required");
    for (int i = 0; i < sys.n; ++i)
        if (std::abs(sys.mu[i] - p.mu[i]) > 1e-12) throw std::invalid_argument("system and profile disagree on mu");
    const auto v = validate(p);
    if (!v.ok) throw std::invalid_argument(v.message);
}

inline double realDist(const NestedSystem& sys, const std::vector<int64_t>& a, const std::vector<int64_t>& b) {
    return std::sqrt(dist2(sys.coords(a), sys.coords(b)));
}

struct Candidate {
    double need = 0.0;  // smallest sphere radius admitting the tuple
    double cost = 0.0;
    Tuple t;
};

}  // namespace detail

// Sphere radius whose volume equals the lower bound on the tuple-construction region.
inline double baseRadius(const NestedSystem& sys) {
    const int L = sys.L();
    const double vol = sys.central.cellVolume * std::pow(sys.indexProduct(), 1.0 / (sys.n - 1));
    return std::pow(vol / unitSphereVolume(L), 1.0 / L);
}

inline void checkIndexBound(const NestedSystem& sys) {
    const int L = sys.L();
    const double cap = std::pow(std::sqrt(2.0), L) * unitSphereVolume(L) * std::pow(sys.indexProduct(), 1.0 / (sys.n - 1));
    for (int i = 0; i < sys.n; ++i)
        if (static_cast<double>(sys.subs[i].index) > cap)
            throw IndexBoundError("index " + std::to_string(sys.subs[i].index) + " of description " +
                                  std::to_string(i) + " exceeds the admissible bound " + std::to_string(cap));
}

inline double pairwiseCost(const NestedSystem& sys, const WeightProfile& p, const std::vector<double>& w,
                           const Tuple& t) {
    const int n = sys.n;
    std::vector<std::vector<double>> s(n);
    for (int i = 0; i < n; ++i) {
        s[i] = sys.coords(t[i]);
        for (double& v : s[i]) v *= p.mu[i];
    }
    double c = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) c += w[i * n + j] * normDim2(s[i], s[j]);
    return c;
}

inline TupleSet generateTuples(std::shared_ptr<const NestedSystem> sysPtr, const WeightProfile& prof,
                               const GenerateOptions& opt = {}) {
    const NestedSystem& sys = *sysPtr;
    detail::checkConsistent(sys, prof);
    if (opt.enforceIndexBound) checkIndexBound(sys);
    const int n = sys.n;
    const auto w = pairWeights(prof);
    const auto& roots = sys.subCell[0];
    const int64_t want = sys.subs[0].index;
    const double r0 = baseRadius(sys);

    double reach = r0 * 1.25;
    std::vector<std::vector<detail::Candidate>> found(roots.size());
    for (int attempt = 0;; ++attempt) {
        std::vector<char> shortfall(roots.size(), 0);
        std::vector<double> sizes(roots.size(), 0.0);
        forEachBlock(static_cast<int64_t>(roots.size()), opt.workers, [&](int64_t b) {
            const auto& root = roots[b];
            const auto x0 = sys.coords(root);
            std::vector<std::vector<std::vector<int64_t>>> cand(n);
            for (int i = 1; i < n; ++i)
                for (const auto& k : ballBasisCoords(sys.subs[i].basis, x0, prof.radiusFactor(0, i) * reach)) {
                    std::vector<int64_t> u(sys.L(), 0);
                    addTranslate(sys.subs[i], u, k);
                    cand[i].push_back(std::move(u));
                }
            std::vector<detail::Candidate> out;
            Tuple cur(n);
            cur[0] = root;
            auto dfs = [&](auto&& self, int i, double need) -> void {
                if (i == n) {
                    if (static_cast<double>(out.size()) > opt.tupleBudget)
                        throw CapacityError("tuple enumeration exceeds budget");
                    out.push_back({need, 0.0, cur});
                    return;
                }
                for (const auto& u : cand[i]) {
                    double nd = std::max(need, detail::realDist(sys, root, u) / prof.radiusFactor(0, i));
                    bool ok = true;
                    for (int j = 1; j < i && ok; ++j) {
                        const double d = detail::realDist(sys, cur[j], u) / prof.radiusFactor(j, i);
                        ok = d <= reach + kTol;
                        nd = std::max(nd, d);
                    }
                    if (!ok) continue;
                    cur[i] = u;
                    self(self, i + 1, nd);
                }
            };
            dfs(dfs, 1, 0.0);
            std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.need < b.need; });
            shortfall[b] = static_cast<int64_t>(out.size()) < want;
            sizes[b] = static_cast<double>(out.size());
            found[b] = std::move(out);
        });
        if (std::accumulate(sizes.begin(), sizes.end(), 0.0) > opt.tupleBudget)
            throw CapacityError("tuple enumeration exceeds budget");
        if (std::none_of(shortfall.begin(), shortfall.end(), [](char c) { return c != 0; })) break;
        if (attempt > 40) throw ConstructionError("tuple sphere failed to reach the required count");
        reach *= 1.5;
    }

    double rfin = r0;
    for (const auto& f : found) rfin = std::max(rfin, f[want - 1].need);

    TupleSet ts;
    ts.sys = sysPtr;
    ts.baseRadius = r0;
    ts.radius = rfin;
    ts.psi = rfin / r0;
    std::vector<std::vector<Tuple>> kept(roots.size());
    forEachBlock(static_cast<int64_t>(roots.size()), opt.workers, [&](int64_t b) {
        auto& f = found[b];
        std::vector<detail::Candidate> pool;
        for (auto& c : f)
            if (c.need <= rfin + kTol) {
                c.cost = pairwiseCost(sys, prof, w, c.t);
                pool.push_back(std::move(c));
            }
        std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
            if (a.cost != b.cost) return a.cost < b.cost;
            return a.t < b.t;
        });
        for (int64_t k = 0; k < want; ++k) kept[b].push_back(std::move(pool[k].t));
        f.clear();
    });
    for (auto& k : kept)
        for (auto& t : k) ts.tuples.push_back(std::move(t));
    return ts;
}

// Translate so the first element is a canonical product-cell representative; returns the translate removed.
inline std::vector<int64_t> canonicalizeTuple(const NestedSystem& sys, Tuple& t) {
    const auto split = splitCoset(sys.product, t[0]);
    for (auto& e : t) addTranslate(sys.product, e, split.translate, -1);
    return split.translate;
}

inline TupleSet reduceToCosets(TupleSet ts) {
    const NestedSystem& sys = *ts.sys;
    VecMap<int> seen;
    std::vector<Tuple> out;
    for (auto& t : ts.tuples) {
        canonicalizeTuple(sys, t);
        std::vector<int64_t> key;
        for (const auto& e : t) key.insert(key.end(), e.begin(), e.end());
        if (seen.emplace(std::move(key), 1).second) out.push_back(std::move(t));
    }
    if (static_cast<int64_t>(out.size()) != sys.productIndex())
        throw ConstructionError("coset reduction left " + std::to_string(out.size()) + " tuples, expected " +
                                std::to_string(sys.productIndex()));
    ts.tuples = std::move(out);
    return ts;
}

// Per-κ centroid weights: w[κ-1][i] = γ̄(L_i)·μ_i / (κ·γ̄(L)).
inline std::vector<std::vector<double>> centroidWeights(const WeightProfile& p) {
    std::vector<std::vector<double>> w(p.n - 1, std::vector<double>(p.n));
    for (int k = 1; k < p.n; ++k) {
        const double all = gammaBar(p, k);
        for (int i = 0; i < p.n; ++i) w[k - 1][i] = gammaBar(p, k, i) * p.mu[i] / (k * all);
    }
    return w;
}

inline std::vector<std::vector<double>> centroids(const NestedSystem& sys, const WeightProfile& p, const Tuple& t) {
    const auto w = centroidWeights(p);
    std::vector<std::vector<double>> c(p.n - 1, std::vector<double>(sys.L(), 0.0));
    for (int i = 0; i < p.n; ++i) {
        const auto x = sys.coords(t[i]);
        for (int k = 0; k < p.n - 1; ++k)
            for (int d = 0; d < sys.L(); ++d) c[k][d] += w[k][i] * x[d];
    }
    return c;
}

inline double assignmentCost(const NestedSystem& sys, const WeightProfile& p, const std::vector<double>& lc,
                             const Tuple& t) {
    const auto cen = centroids(sys, p, t);
    double s = 0.0;
    for (int k = 1; k < p.n; ++k) s += gammaBar(p, k) * normDim2(lc, cen[k - 1]);
    return s;
}

struct CostSplit {
    double f = 0.0;  // pairwise part
    double g = 0.0;  // centroid part
    double J() const { return f + g; }
};

struct LabelingFunction {
    std::shared_ptr<const NestedSystem> sys;
    WeightProfile profile;
    double psi = 1.0;
    std::vector<Tuple> forward;  // by canonical central index
    VecMap<std::pair<int, std::vector<int64_t>>> inverse;
    CostSplit cost;
    double matchingCost = 0.0;
    bool certified = false;
};

namespace detail {

inline std::vector<int64_t> tupleKey(const Tuple& t) {
    std::vector<int64_t> key;
    for (const auto& e : t) key.insert(key.end(), e.begin(), e.end());
    return key;
}

}  // namespace detail

inline CostSplit evaluateLabeling(const LabelingFunction& lab) {
    const NestedSystem& sys = *lab.sys;
    const auto w = pairWeights(lab.profile);
    CostSplit s;
    for (size_t p = 0; p < lab.forward.size(); ++p) {
        s.f += pairwiseCost(sys, lab.profile, w, lab.forward[p]);
        s.g += assignmentCost(sys, lab.profile, sys.coords(sys.centralCell[p]), lab.forward[p]);
    }
    const double m = static_cast<double>(lab.forward.size());
    s.f /= m;
    s.g /= m;
    return s;
}

inline void rebuildInverse(LabelingFunction& lab) {
    const NestedSystem& sys = *lab.sys;
    lab.inverse.clear();
    for (int p = 0; p < static_cast<int>(lab.forward.size()); ++p) {
        Tuple t = lab.forward[p];
        auto k = canonicalizeTuple(sys, t);
        if (!lab.inverse.emplace(detail::tupleKey(t), std::make_pair(p, std::move(k))).second)
            throw ConstructionError("two central points share a tuple coset");
    }
}

// Single: each tuple is offered at one translate, the one placing its first-level centroid in the canonical cell.
// Wrapped: each (point, tuple) pair is priced at the best nearby translate.
enum class TranslateMode { Single, Wrapped };

inline std::string translateModeName(TranslateMode m) { return m == TranslateMode::Single ? "single" : "wrapped"; }

inline TranslateMode translateModeFromName(const std::string& s) {
    if (s == "single") return TranslateMode::Single;
    if (s == "wrapped") return TranslateMode::Wrapped;
    throw std::invalid_argument("unknown translate mode: " + s);
}

namespace detail {

struct Priced {
    double cost;
    std::vector<int64_t> k;
};

// Centroid levels move by shift[κ]·λ_π when the tuple moves by λ_π.
inline Priced priceTranslates(const NestedSystem& sys, const std::vector<double>& x, const std::vector<double>& cen,
                              const std::vector<double>& gb, const std::vector<double>& shift, TranslateMode mode) {
    const int L = sys.L();
    const int K = static_cast<int>(gb.size());
    auto eval = [&](const std::vector<double>& off) {
        double s = 0.0;
        for (int k = 0; k < K; ++k) {
            double d2 = 0.0;
            for (int d = 0; d < L; ++d) {
                const double e = x[d] - cen[k * L + d] - shift[k] * off[d];
                d2 += e * e;
            }
            s += gb[k] * d2 / L;
        }
        return s;
    };
    std::vector<double> zero(L, 0.0);
    Priced best{eval(zero), std::vector<int64_t>(L, 0)};
    if (mode == TranslateMode::Single) return best;
    std::vector<double> diff(L);
    for (int d = 0; d < L; ++d) diff[d] = x[d] - cen[d];
    const auto y = sys.product.basis.solve(diff);
    std::vector<int64_t> lo(L), hi(L);
    for (int d = 0; d < L; ++d) {
        lo[d] = std::llround(y[d]) - 1;
        hi[d] = lo[d] + 2;
    }
    scanBox(lo, hi, [&](const std::vector<int64_t>& k) {
        const double c = eval(sys.product.basis.map(k));
        if (c < best.cost - 1e-15 || (std::abs(c - best.cost) <= 1e-15 && k < best.k)) best = {c, k};
    });
    return best;
}

}  // namespace detail

inline LabelingFunction assignTuples(const TupleSet& ts, const WeightProfile& prof, int workers = 1,
                                     TranslateMode mode = TranslateMode::Single) {
    const NestedSystem& sys = *ts.sys;
    const int N = static_cast<int>(sys.productIndex());
    if (static_cast<int>(ts.tuples.size()) != N) throw std::invalid_argument("tuple count must equal the product index");
    const int K = prof.n - 1;
    const auto cw = centroidWeights(prof);
    std::vector<double> gb(K), shift(K, 0.0);
    for (int k = 1; k <= K; ++k) {
        gb[k - 1] = gammaBar(prof, k);
        for (double w : cw[k - 1]) shift[k - 1] += w;
    }

    // Move each tuple by the product translate that brings its first-level centroid into the canonical cell.
    std::vector<Tuple> moved(N);
    std::vector<std::vector<double>> cen(N);  // K·L per tuple
    forEachBlock(N, workers, [&](int64_t t) {
        Tuple tu = ts.tuples[t];
        auto c = centroids(sys, prof, tu);
        const auto nearest = nearestPoint(sys.central, c[0]).basisCoords;
        const auto split = splitCoset(sys.product, nearest);
        for (auto& e : tu) addTranslate(sys.product, e, split.translate, -1);
        c = centroids(sys, prof, tu);
        std::vector<double> flat;
        for (const auto& v : c) flat.insert(flat.end(), v.begin(), v.end());
        moved[t] = std::move(tu);
        cen[t] = std::move(flat);
    });
    std::vector<std::vector<double>> pts(N);
    for (int p = 0; p < N; ++p) pts[p] = sys.coords(sys.centralCell[p]);

    std::vector<double> C(static_cast<size_t>(N) * N);
    forEachBlock(N, workers, [&](int64_t p) {
        double* row = C.data() + static_cast<size_t>(p) * N;
        for (int t = 0; t < N; ++t) row[t] = detail::priceTranslates(sys, pts[p], cen[t], gb, shift, mode).cost;
    });
    const auto res = solveAssignment(C, N);
    double scale = 0.0;
    for (double v : C) scale = std::max(scale, std::abs(v));

    LabelingFunction lab;
    lab.sys = ts.sys;
    lab.profile = prof;
    lab.psi = ts.psi;
    lab.forward.resize(N);
    for (int p = 0; p < N; ++p) {
        const int t = res.rowToCol[p];
        lab.forward[p] = moved[t];
        const auto k = detail::priceTranslates(sys, pts[p], cen[t], gb, shift, mode).k;
        for (auto& e : lab.forward[p]) addTranslate(sys.product, e, k);
    }
    lab.matchingCost = res.total;
    lab.certified = res.certified(1e-9 * std::max(1.0, scale) * N);
    if (!lab.certified) throw ConstructionError("assignment failed its optimality certificate");
    rebuildInverse(lab);
    lab.cost = evaluateLabeling(lab);
    return lab;
}

inline LabelingFunction buildLabeling(std::shared_ptr<const NestedSystem> sys, const WeightProfile& prof,
                                      const GenerateOptions& opt = {}, TranslateMode mode = TranslateMode::Single) {
    auto ts = reduceToCosets(generateTuples(std::move(sys), prof, opt));
    return assignTuples(ts, prof, opt.workers, mode);
}

inline Tuple alphaApply(const LabelingFunction& lab, const std::vector<int64_t>& lc) {
    const NestedSystem& sys = *lab.sys;
    const auto split = splitCoset(sys.product, lc);
    const auto it = sys.centralIndex.find(split.rep);
    if (it == sys.centralIndex.end()) throw ConstructionError("canonical representative missing from cell index");
    Tuple t = lab.forward[it->second];
    for (auto& e : t) addTranslate(sys.product, e, split.translate);
    return t;
}

inline std::vector<int64_t> alphaInvert(const LabelingFunction& lab, Tuple t) {
    const NestedSystem& sys = *lab.sys;
    if (static_cast<int>(t.size()) != sys.n) throw NotALabelError("tuple has the wrong number of elements");
    const auto ku = canonicalizeTuple(sys, t);
    const auto it = lab.inverse.find(detail::tupleKey(t));
    if (it == lab.inverse.end()) throw NotALabelError("tuple is not in the image of the labeling");
    const auto& [p, kp] = it->second;
    std::vector<int64_t> lc = sys.centralCell[p];
    std::vector<int64_t> d(ku.size());
    for (size_t i = 0; i < ku.size(); ++i) d[i] = ku[i] - kp[i];
    addTranslate(sys.product, lc, d);
    return lc;
}

// Mean per-dimension squared error of each erasure pattern, from the table alone.
inline std::vector<double> tablePatternDistortion(const LabelingFunction& lab) {
    const NestedSystem& sys = *lab.sys;
    const int n = sys.n;
    std::vector<double> d(size_t{1} << n, 0.0);
    for (size_t p = 0; p < lab.forward.size(); ++p) {
        const auto x = sys.coords(sys.centralCell[p]);
        std::vector<std::vector<double>> s(n);
        for (int i = 0; i < n; ++i) {
            s[i] = sys.coords(lab.forward[p][i]);
            for (double& v : s[i]) v *= lab.profile.mu[i];
        }
        for (Mask m = 1; m + 1 < (Mask{1} << n); ++m) {
            std::vector<double> avg(sys.L(), 0.0);
            const int k = popcount(m);
            for (int i = 0; i < n; ++i)
                if (has(m, i))
                    for (int q = 0; q < sys.L(); ++q) avg[q] += s[i][q] / k;
            d[m] += normDim2(x, avg);
        }
    }
    for (double& v : d) v /= static_cast<double>(lab.forward.size());
    return d;
}

// Share of stored tuples with an element outside the product cell holding their central point.
inline double outsideFraction(const LabelingFunction& lab) {
    const NestedSystem& sys = *lab.sys;
    int64_t bad = 0;
    for (const auto& t : lab.forward) {
        bool out = false;
        for (const auto& e : t) {
            const auto s = splitCoset(sys.product, e);
            for (int64_t v : s.translate) out = out || v != 0;
        }
        bad += out ? 1 : 0;
    }
    return static_cast<double>(bad) / static_cast<double>(lab.forward.size());
}

}  // namespace mdlvq

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mdlvq/labeling.hpp"
#include "mdlvq/rng.hpp"

namespace mdlvq {

// A sublattice point relative to description i's translate: (side index, translate difference).
struct PairClass {
    int64_t first = 0;   // side index of description i
    int64_t second = 0;  // side index of description j
    std::vector<int64_t> shift;  // translate of j minus translate of i
    auto operator<=>(const PairClass&) const = default;
};

struct BinTable {
    std::shared_ptr<const LabelingFunction> lab;
    double rate = 0.0;  // bits per dimension
    std::vector<int64_t> bins;                 // per description
    std::vector<std::vector<int64_t>> binOf;   // per description, per side index
    std::vector<std::vector<std::vector<int64_t>>> members;  // per description, per bin
    // partners[i][j][a]: (c, shift, central index p, translate of i in stored tuple p)
    struct Partner {
        int64_t second;
        std::vector<int64_t> shift;
        int p;
        std::vector<int64_t> ki;
    };
    std::vector<std::vector<std::vector<std::vector<Partner>>>> partners;

    double codebookRate(int i) const {
        return std::log2(static_cast<double>(binOf[i].size())) / lab->sys->L();
    }
};

inline BinTable binAssign(std::shared_ptr<const LabelingFunction> lab, double rate, uint64_t seed) {
    const NestedSystem& sys = *lab->sys;
    if (sys.n != 3) throw std::invalid_argument("binning is defined for three descriptions");
    if (!(rate > 0.0)) throw std::invalid_argument("binning rate must be positive");
    const int n = sys.n, L = sys.L();
    BinTable t;
    t.lab = lab;
    t.rate = rate;
    for (int i = 0; i < n; ++i) {
        const int64_t M = static_cast<int64_t>(sys.subCell[i].size());
        const int64_t B = std::max<int64_t>(1, std::llround(std::exp2(L * rate)));
        t.bins.push_back(B);
        std::vector<int64_t> perm(M);
        std::iota(perm.begin(), perm.end(), 0);
        RngStream rng(seed, StreamTag::Binning, static_cast<uint32_t>(i));
        for (int64_t k = M - 1; k > 0; --k) std::swap(perm[k], perm[rng.below(k + 1)]);
        std::vector<int64_t> b(M);
        std::vector<std::vector<int64_t>> mem(B);
        for (int64_t a = 0; a < M; ++a) {
            b[a] = perm[a] % B;
            mem[b[a]].push_back(a);
        }
        t.binOf.push_back(std::move(b));
        t.members.push_back(std::move(mem));
    }
    t.partners.assign(n, std::vector<std::vector<std::vector<BinTable::Partner>>>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) t.partners[i][j].assign(sys.subCell[i].size(), {});
    for (int p = 0; p < static_cast<int>(lab->forward.size()); ++p) {
        const Tuple& tu = lab->forward[p];
        std::vector<CosetSplit> s;
        std::vector<int64_t> idx;
        for (int i = 0; i < n; ++i) {
            s.push_back(splitCoset(sys.product, tu[i]));
            idx.push_back(sys.subIndex[i].at(s.back().rep));
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                std::vector<int64_t> sh(L);
                for (int d = 0; d < L; ++d) sh[d] = s[j].translate[d] - s[i].translate[d];
                t.partners[i][j][idx[i]].push_back({idx[j], std::move(sh), p, s[i].translate});
            }
    }
    return t;
}

struct BinDecodeResult {
    std::vector<PairClass> candidates;
    bool unique() const { return candidates.size() == 1; }
    // Filled when unique.
    std::optional<std::vector<double>> pairReconstruction;
    std::optional<std::vector<int64_t>> centralPoint;
};

// Receives the bins of descriptions i and j together with description i's product translate.
inline BinDecodeResult binDecode(const BinTable& t, int i, int64_t binI, int j, int64_t binJ,
                                 const std::vector<int64_t>& translateI) {
    const LabelingFunction& lab = *t.lab;
    const NestedSystem& sys = *lab.sys;
    if (i == j || i < 0 || j < 0 || i >= sys.n || j >= sys.n) throw std::invalid_argument("need two distinct descriptions");
    BinDecodeResult r;
    std::map<PairClass, std::vector<const BinTable::Partner*>> found;
    for (int64_t a : t.members[i].at(binI))
        for (const auto& pr : t.partners[i][j][a])
            if (t.binOf[j][pr.second] == binJ) found[{a, pr.second, pr.shift}].push_back(&pr);
    for (const auto& [c, v] : found) r.candidates.push_back(c);
    if (!r.unique()) return r;
    const auto& [cls, owners] = *found.begin();
    std::vector<int64_t> li = sys.subCell[i][cls.first];
    addTranslate(sys.product, li, translateI);
    std::vector<int64_t> lj = sys.subCell[j][cls.second];
    std::vector<int64_t> kj = translateI;
    for (size_t d = 0; d < kj.size(); ++d) kj[d] += cls.shift[d];
    addTranslate(sys.product, lj, kj);
    const auto xi = sys.coords(li), xj = sys.coords(lj);
    std::vector<double> x(sys.L());
    for (int d = 0; d < sys.L(); ++d) x[d] = 0.5 * (lab.profile.mu[i] * xi[d] + lab.profile.mu[j] * xj[d]);
    r.pairReconstruction = std::move(x);
    if (owners.size() == 1) {
        const auto* o = owners.front();
        std::vector<int64_t> lc = sys.centralCell[o->p];
        std::vector<int64_t> d(translateI.size());
        for (size_t q = 0; q < d.size(); ++q) d[q] = translateI[q] - o->ki[q];
        addTranslate(sys.product, lc, d);
        r.centralPoint = std::move(lc);
    }
    return r;
}

struct AmbiguityReport {
    int64_t trials = 0;
    int64_t ambiguous = 0;
    int64_t wrong = 0;  // unique but not the transmitted pair
    double rate() const { return trials ? static_cast<double>(ambiguous) / trials : 0.0; }
};

// Random central points and random received pairs; counts decodes with more than one consistent pair.
inline AmbiguityReport binAmbiguity(const BinTable& t, int64_t trials, uint64_t seed) {
    const LabelingFunction& lab = *t.lab;
    const NestedSystem& sys = *lab.sys;
    static constexpr std::array<std::array<int, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};
    RngStream rng(seed, StreamTag::Binning, 0x10000u);
    AmbiguityReport rep;
    for (int64_t s = 0; s < trials; ++s) {
        const int p = static_cast<int>(rng.below(lab.forward.size()));
        const auto [i, j] = kPairs[rng.below(3)];
        const Tuple& tu = lab.forward[p];
        const auto si = splitCoset(sys.product, tu[i]);
        const auto sj = splitCoset(sys.product, tu[j]);
        const int64_t a = sys.subIndex[i].at(si.rep), c = sys.subIndex[j].at(sj.rep);
        const auto r = binDecode(t, i, t.binOf[i][a], j, t.binOf[j][c], si.translate);
        ++rep.trials;
        if (!r.unique()) {
            ++rep.ambiguous;
        } else if (r.candidates[0].first != a || r.candidates[0].second != c) {
            ++rep.wrong;
        }
    }
    return rep;
}

}  // namespace mdlvq

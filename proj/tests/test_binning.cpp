#include <gtest/gtest.h>

#include "mdlvq/analysis.hpp"
#include "mdlvq/binning.hpp"

using namespace mdlvq;

namespace {

std::shared_ptr<const LabelingFunction> labeling(int64_t N) {
    const Multiplier m{MultiplierKind::Scalar, N, 0};
    auto sys = std::make_shared<const NestedSystem>(buildNested(makeLattice(LatticeKind::Z, 1), {m, m, m}, {1, 1, 1}));
    return std::make_shared<const LabelingFunction>(buildLabeling(sys, uniformProfile(3)));
}

}  // namespace

TEST(Binning, BinCountAndPermutation) {
    const auto lab = labeling(31);
    const auto t = binAssign(lab, std::log2(20.0), 1);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(t.bins[i], 20);
        EXPECT_EQ(t.binOf[i].size(), lab->sys->subCell[i].size());
        std::vector<int64_t> sizes;
        for (const auto& m : t.members[i]) sizes.push_back(static_cast<int64_t>(m.size()));
        EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1);
    }
    EXPECT_NEAR(t.codebookRate(0), std::log2(static_cast<double>(lab->sys->subCell[0].size())), 1e-12);
    EXPECT_EQ(binAssign(lab, std::log2(20.0), 1).binOf, t.binOf);
    EXPECT_NE(binAssign(lab, std::log2(20.0), 2).binOf, t.binOf);
}

TEST(Binning, InjectiveBinsNeverAmbiguous) {
    const auto lab = labeling(31);
    const auto t = binAssign(lab, std::log2(static_cast<double>(lab->sys->subCell[0].size())), 3);
    const auto rep = binAmbiguity(t, 5000, 3);
    EXPECT_EQ(rep.ambiguous, 0);
    EXPECT_EQ(rep.wrong, 0);
}

TEST(Binning, AmbiguityGrowsAsRateFalls) {
    const auto lab = labeling(31);
    const double thr = binningThreshold(std::log2(31.0), 31.0, 1);
    double prev = -1.0;
    for (double off : {1.5, 1.0, 0.5, -1.0}) {
        const auto rep = binAmbiguity(binAssign(lab, thr + off, 4), 5000, 4);
        EXPECT_GE(rep.rate(), prev) << off;
        EXPECT_EQ(rep.wrong, 0);
        prev = rep.rate();
    }
    EXPECT_GT(prev, 0.9);
}

TEST(Binning, UniqueDecodeReturnsTransmittedPair) {
    const auto lab = labeling(15);
    const auto& sys = *lab->sys;
    const auto t = binAssign(lab, std::log2(static_cast<double>(sys.subCell[0].size())), 5);
    for (int64_t c = -40; c <= 40; ++c) {
        const auto tu = alphaApply(*lab, {c});
        const auto s0 = splitCoset(sys.product, tu[0]);
        const auto s2 = splitCoset(sys.product, tu[2]);
        const int64_t a = sys.subIndex[0].at(s0.rep), b = sys.subIndex[2].at(s2.rep);
        const auto r = binDecode(t, 0, t.binOf[0][a], 2, t.binOf[2][b], s0.translate);
        ASSERT_TRUE(r.unique());
        ASSERT_TRUE(r.pairReconstruction.has_value());
        EXPECT_DOUBLE_EQ((*r.pairReconstruction)[0], 0.5 * static_cast<double>(tu[0][0] + tu[2][0]));
        if (r.centralPoint) {
            EXPECT_EQ(*r.centralPoint, std::vector<int64_t>{c});
        }
    }
}

TEST(Binning, Validation) {
    const auto lab = labeling(7);
    EXPECT_THROW(binAssign(lab, 0.0, 1), std::invalid_argument);
    const auto t = binAssign(lab, 2.0, 1);
    EXPECT_THROW(binDecode(t, 1, 0, 1, 0, {0}), std::invalid_argument);
    const Multiplier m{MultiplierKind::Scalar, 5, 0};
    auto two = std::make_shared<const NestedSystem>(buildNested(makeLattice(LatticeKind::Z, 1), {m, m}, {1, 1}));
    auto lab2 = std::make_shared<const LabelingFunction>(buildLabeling(two, uniformProfile(2)));
    EXPECT_THROW(binAssign(lab2, 2.0, 1), std::invalid_argument);
}

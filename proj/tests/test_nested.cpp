#include <gtest/gtest.h>

#include <set>

#include "mdlvq/nested.hpp"
#include "mdlvq/rng.hpp"

using namespace mdlvq;

namespace {

Multiplier scalar(int64_t k) { return {MultiplierKind::Scalar, k, 0}; }
Multiplier gauss(int64_t a, int64_t b) { return {MultiplierKind::Gaussian, a, b}; }

std::vector<int64_t> flat(const std::vector<std::vector<int64_t>>& v) {
    std::vector<int64_t> out;
    for (const auto& e : v) out.push_back(e.at(0));
    return out;
}

}  // namespace

TEST(Nested, ScalarFourFive) {
    const auto s = buildNested(makeLattice(LatticeKind::Z, 1), {scalar(4), scalar(5)}, {1, 1});
    EXPECT_EQ(s.productIndex(), 20);
    EXPECT_EQ(s.subs[0].index, 4);
    EXPECT_EQ(s.subs[1].index, 5);
    ASSERT_EQ(s.centralCell.size(), 20u);
    std::vector<int64_t> want(20);
    for (int i = 0; i < 20; ++i) want[i] = i;
    EXPECT_EQ(flat(s.centralCell), want);
    EXPECT_EQ(flat(s.subCell[0]), (std::vector<int64_t>{0, 4, 8, 12, 16}));
    EXPECT_EQ(flat(s.subCell[1]), (std::vector<int64_t>{0, 5, 10, 15}));
}

TEST(Nested, GaussianConjugatePair) {
    const auto s = buildNested(makeLattice(LatticeKind::Z, 2), {gauss(2, 1), gauss(2, -1)}, {1, 1});
    EXPECT_EQ(s.subs[0].index, 5);
    EXPECT_EQ(s.subs[1].index, 5);
    EXPECT_EQ(s.productIndex(), 25);
    EXPECT_EQ(s.centralCell.size(), 25u);
    EXPECT_EQ(s.subCell[0].size(), 5u);
}

TEST(Nested, EqualIndicesUseSquare) {
    const auto s = buildNested(makeLattice(LatticeKind::Z, 2), {scalar(5), scalar(5)}, {1, 1});
    EXPECT_EQ(s.productIndex(), 625);
    // 5Z² has index 25; the cell has 625 central points
    std::set<std::vector<int64_t>> scan;
    for (int64_t a = 0; a < 25; ++a)
        for (int64_t b = 0; b < 25; ++b) scan.insert({a, b});
    std::set<std::vector<int64_t>> got(s.centralCell.begin(), s.centralCell.end());
    EXPECT_EQ(got, scan);
}

TEST(Nested, ThreeEqualKeepOneDuplicate) {
    const auto c = makeLattice(LatticeKind::Z, 1);
    EXPECT_EQ(buildNested(c, {scalar(7), scalar(7), scalar(7)}, {}).productIndex(), 49);
    EXPECT_EQ(buildNested(c, {scalar(3), scalar(3), scalar(5)}, {}).productIndex(), 15);
    EXPECT_EQ(buildNested(c, {scalar(7), scalar(7), scalar(7)}, {}, ProductRule::Full).productIndex(), 343);
}

TEST(Nested, IdentitySublattice) {
    const auto s = buildNested(makeLattice(LatticeKind::A2, 2), {{MultiplierKind::Eisenstein, 1, 0}}, {1.0});
    EXPECT_EQ(s.subs[0].index, 1);
    EXPECT_EQ(s.productIndex(), 1);
    EXPECT_EQ(s.centralCell.size(), 1u);
}

TEST(Nested, EisensteinIndex) {
    const auto s = buildNested(makeLattice(LatticeKind::A2, 2), {{MultiplierKind::Eisenstein, 2, 1}, {MultiplierKind::Eisenstein, 3, 1}}, {1, 1});
    EXPECT_EQ(s.subs[0].index, 7);
    EXPECT_EQ(s.subs[1].index, 13);
    EXPECT_EQ(s.productIndex(), 91);
    EXPECT_EQ(s.centralCell.size(), 91u);
    EXPECT_EQ(s.subCell[0].size(), 13u);
    EXPECT_EQ(s.subCell[1].size(), 7u);
}

TEST(Nested, CountsHoldForManySystems) {
    const auto z2 = makeLattice(LatticeKind::Z, 2);
    for (auto [a, b, c, d] : {std::tuple{2, 1, 1, 1}, {3, 2, 1, 2}, {4, 1, 2, 3}, {1, 0, 3, 0}}) {
        const auto s = buildNested(z2, {gauss(a, b), gauss(c, d)}, {1, 1});
        EXPECT_EQ(static_cast<int64_t>(s.centralCell.size()), s.productIndex());
        for (int i = 0; i < 2; ++i) {
            EXPECT_EQ(static_cast<int64_t>(s.subCell[i].size()) * s.subs[i].index, s.productIndex());
            for (const auto& u : s.subCell[i]) EXPECT_TRUE(inSublattice(s.subs[i], u));
        }
        EXPECT_EQ(s.product.index, std::abs(determinant(s.product.scale)));
        EXPECT_NEAR(s.product.basis.det() / s.central.cellVolume, static_cast<double>(s.productIndex()), 1e-9);
    }
}

TEST(Nested, NestingErrorOnWrongLattice) {
    EXPECT_THROW(buildNested(makeLattice(LatticeKind::Z, 3), {gauss(2, 1), gauss(1, 1)}, {}), std::invalid_argument);
    EXPECT_THROW(buildNested(makeLattice(LatticeKind::Z, 1), {scalar(2), scalar(3)}, {1.0, -1.0}), std::invalid_argument);
}

TEST(Nested, CanonicalRepReducesModulo) {
    const auto c = makeLattice(LatticeKind::Z, 1);
    const auto s = buildNested(c, {scalar(4), scalar(5)}, {1, 1});
    EXPECT_EQ(canonicalRep(s, pointFromBasis(c, {23})).basisCoords[0], 3);
    EXPECT_EQ(canonicalRep(s, pointFromBasis(c, {-1})).basisCoords[0], 19);
    EXPECT_EQ(canonicalRep(s, pointFromBasis(c, {7})).basisCoords[0], 7);
}

TEST(Nested, CanonicalRepIsRetraction) {
    const auto z2 = makeLattice(LatticeKind::Z, 2);
    const auto s = buildNested(z2, {gauss(3, 2), gauss(1, 2)}, {1, 1});
    RngStream r(8, StreamTag::Source, 0);
    std::set<std::vector<int64_t>> cell(s.centralCell.begin(), s.centralCell.end());
    for (int t = 0; t < 10000; ++t) {
        std::vector<int64_t> u{static_cast<int64_t>(r.below(2001)) - 1000, static_cast<int64_t>(r.below(2001)) - 1000};
        const auto p = pointFromBasis(z2, u);
        const auto q = canonicalRep(s, p);
        ASSERT_TRUE(cell.count(q.basisCoords));
        std::vector<int64_t> diff{u[0] - q.basisCoords[0], u[1] - q.basisCoords[1]};
        ASSERT_TRUE(inSublattice(s.product, diff));
        EXPECT_EQ(canonicalRep(s, q).basisCoords, q.basisCoords);
        std::vector<int64_t> shifted = u;
        addTranslate(s.product, shifted, {static_cast<int64_t>(r.below(9)) - 4, static_cast<int64_t>(r.below(9)) - 4});
        ASSERT_EQ(canonicalRep(s, pointFromBasis(z2, shifted)).basisCoords, q.basisCoords);
    }
}

TEST(Nested, PointsInProductCell) {
    const auto s = buildNested(makeLattice(LatticeKind::Z, 1), {scalar(4), scalar(5)}, {1, 1});
    EXPECT_EQ(pointsInProductCell(s, -1).size(), 20u);
    const auto sub0 = pointsInProductCell(s, 0);
    ASSERT_EQ(sub0.size(), 5u);
    EXPECT_DOUBLE_EQ(sub0[4].coords[0], 16.0);
}

TEST(Nested, CleanlinessExamples) {
    const auto z1 = makeLattice(LatticeKind::Z, 1);
    EXPECT_TRUE(isClean(buildNested(z1, {scalar(3), scalar(5)}, {}), -1).clean);
    const auto even = buildNested(z1, {scalar(2)}, {1.0});
    ASSERT_EQ(even.productIndex(), 2);
    const auto rep = isClean(even, -1);
    EXPECT_FALSE(rep.clean);
    ASSERT_TRUE(rep.witness.has_value());
    EXPECT_EQ(rep.witness->basisCoords[0], 1);
    const auto g = buildNested(makeLattice(LatticeKind::Z, 2), {gauss(2, 1)}, {1.0});
    EXPECT_TRUE(isClean(g, 0).clean);
    EXPECT_TRUE(isClean(g, -1).clean);
}

TEST(Nested, OrderIsPreserved) {
    const auto s = buildNested(makeLattice(LatticeKind::Z, 1), {scalar(5), scalar(4)}, {2.0, 1.0});
    EXPECT_EQ(s.subs[0].index, 5);
    EXPECT_EQ(s.subs[1].index, 4);
    EXPECT_DOUBLE_EQ(s.mu[0], 2.0);
}

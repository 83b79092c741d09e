#include <gtest/gtest.h>

#include <cmath>

#include "qsph/podles.hpp"

using namespace qsph;
using namespace qsph::podles;

namespace {

HalfInt H(int twice) { return HalfInt::from_twice(twice); }

double b(double x, double q) { return (std::pow(q, x) - std::pow(q, -x)) / (q - 1 / q); }

Terms<Label> minus(Terms<Label> a, const Terms<Label>& c) {
    for (auto [t, v] : c) a.emplace_back(t, -v);
    return merge_terms(std::move(a));
}

}  // namespace

TEST(PodlesParams, Validation) {
    EXPECT_THROW(Params(0.5, 1.5, H(1)), std::invalid_argument);
    EXPECT_THROW(Params(1.5, 0.5, H(1)), std::invalid_argument);
    EXPECT_THROW(dirac(Params(0.5, 0.5, H(0))), std::invalid_argument);
    EXPECT_THROW(fredholm_index(Params(0.5, 0.5, H(0)), 5), std::invalid_argument);
    EXPECT_THROW(zeta_closed_form(2.0, Params(0.5, 0.5, H(1))), std::invalid_argument);
}

TEST(PodlesCoefficients, AlphaBeta) {
    Params p(0.5, 1.0, H(1));
    EXPECT_EQ(alpha(H(1), p), 0.0);
    // t = 0: [2N][2]/(q[2l+2]) = 2.5/(0.5*5.25)
    EXPECT_NEAR(beta(H(1), p), 0.952381, 1e-6);
    EXPECT_NEAR(beta(H(1), p), 2.5 / (0.5 * 5.25), 1e-14);
    Params p2(0.5, 0.3, H(2));
    EXPECT_EQ(alpha(H(2), p2), 0.0);
    EXPECT_GT(alpha(H(4), p2), 0.0);
    EXPECT_THROW(alpha(H(0), p2), std::invalid_argument);
}

TEST(PodlesKernels, X1OnLowestSpinor) {
    const double q = 0.5;
    Params p(q, 1.0, H(1));
    auto t = generator_kernel(Gen::x1, p)({1, -1, 1});
    ASSERT_EQ(t.size(), 2u);
    // hand evaluation at N = 1/2, s = 1, l = 1/2, m = -1/2
    double up = (1 / q) * std::sqrt(b(2, q)) * std::sqrt(b(2, q) / b(4, q)) *
                std::sqrt((q * q + 1 / (q * q)) * (q + 1 / q)) / b(3, q);
    double mid = -std::pow(q, 1.5) * std::sqrt(b(2, q)) * b(2, q) / (q * b(3, q));
    EXPECT_NEAR(coefficient_of(t, Label{3, 1, 1}).real(), up, 1e-13);
    EXPECT_NEAR(coefficient_of(t, Label{1, 1, 1}).real(), mid, 1e-13);
}

TEST(PodlesKernels, VanishingCoefficients) {
    Params p(0.5, 0.5, H(2));
    // the l -> l-1 coefficient of x1 at m = l-1 contains [0]
    for (int l2 = 4; l2 <= 10; l2 += 2) {
        auto t = generator_kernel(Gen::x1, p)({l2, l2 - 2, 1});
        EXPECT_EQ(coefficient_of(t, Label{l2 - 2, l2, 1}), cplx(0.0));
    }
    for (int l2 = 2; l2 <= 10; l2 += 2) EXPECT_TRUE(uqsu2_kernel(Hopf::E, p)({l2, l2, -1}).empty());
}

TEST(PodlesRelations, Grid) {
    for (double q : {0.3, 0.5, 0.9})
        for (double s : {0.0, 0.5, 1.0})
            for (int n2 : {0, 1, -1, 2, 3}) {
                Params p(q, s, H(n2));
                auto B = basis(p, 8);
                auto g = generators(p);
                EXPECT_LT(relation_residual(relations_x(p), g, B, 2), 1e-10) << q << " " << s << " " << n2;
                EXPECT_LT(relation_residual(relations_AB(p), g, B, 2), 1e-10) << q << " " << s << " " << n2;
                EXPECT_LT(relation_residual(crossed_relations(p), crossed_generators(p), B, 2), 1e-10);
                EXPECT_LT(adjoint_mismatch(g["x1"], g["x1*"], B, 1), 1e-10);
                EXPECT_LT(adjoint_mismatch(g["B"], g["B*"], B, 1), 1e-10);
                EXPECT_LT(adjoint_mismatch(g["A"], g["A"], B, 1), 1e-10);
            }
}

TEST(PodlesSpectral, DiracAndGrading) {
    Params p(0.5, 0.5, H(3));
    auto B = basis(p, 6);
    auto D = dirac(p), F = sign_F(p), g = grading(p);
    auto D2 = compose(D, D);
    auto anti = add(compose(g, F), compose(F, g));
    for (const auto& v : B.labels()) {
        double ev = level(v, p) + 1.0;
        auto t = D2(v);
        ASSERT_EQ(t.size(), 1u);
        EXPECT_EQ(t[0].first, v);
        EXPECT_EQ(t[0].second, cplx(ev * ev));
        EXPECT_TRUE(anti(v).empty());
    }
    for (int n = 0; n <= 6; ++n) {
        long count = 0;
        for (const auto& v : B.labels()) count += level(v, p) == n;
        EXPECT_EQ(count, multiplicity(p, n));
        EXPECT_EQ(multiplicity(p, n), 4 * n + 4 * 1.5 + 2);
    }
}

TEST(PodlesIdempotent, Projection) {
    for (double s : {0.0, 0.5, 1.0}) {
        Params p(0.5, s, H(1));
        EXPECT_LT(idempotent_defect(p, 10), 1e-10);
    }
    Params near(1 - 1e-6, 0.5, H(1));
    auto B = ampliate(basis(near, 6), 2);
    auto e = matrix_kernel(idempotent_es(near), "e");
    EXPECT_LT(adjoint_mismatch(e, e, B, 1), 1e-4);
}

TEST(PodlesIdempotent, TwistedTraceOfGrading) {
    for (double q : {0.3, 0.5})
        for (double s : {0.0, 0.4, 1.0}) {
            Params p(q, s, H(1));
            EXPECT_NEAR(trace_eta_gamma_s(p), (1 / q - q) * (1 - s * s) / (1 + s * s), 1e-14);
        }
}

TEST(PodlesIndex, Examples) {
    EXPECT_NEAR(fredholm_index(Params(0.5, 1.0, H(1)), 40), 1.0, 1e-8);
    EXPECT_NEAR(fredholm_index(Params(0.5, 0.0, H(-2)), 40), -2.0, 1e-8);
    EXPECT_NEAR(fredholm_index(Params(0.8, 0.7, H(3)), 80), 3.0, 1e-6);
}

TEST(PodlesIndex, SeriesAgrees) {
    for (int n2 : {1, 2, 3}) {
        Params p(0.5, 0.5, H(n2));
        EXPECT_NEAR(index_series(p, 40), n2, 1e-8);
    }
}

TEST(PodlesIndex, GeometricConvergence) {
    Params p(0.5, 0.5, H(2));
    double prev = std::abs(fredholm_index(p, 8) - fredholm_index(p, 4));
    for (int L = 12; L <= 20; L += 4) {
        double d = std::abs(fredholm_index(p, L) - fredholm_index(p, L - 4));
        EXPECT_LT(d, 0.1 * prev + 1e-14);
        prev = d;
    }
}

TEST(PodlesIndex, Chern0) {
    Params p(0.5, 0.5, H(2));
    EXPECT_EQ(chern0(AlgebraWord::unit(), p, 20), 0.0);
    // γF[F,A] is diagonal with entry ±(A_- - A_+) on each sector
    const double q = p.q, s2 = p.s * p.s;
    auto bet = [&](double Nv, double l) {
        double num = (b(2 * l, q) - std::pow(q, l + Nv + 1) * b(2, q) * b(l - Nv, q)) * (1 - s2) +
                     q * b(2, q) * b(2 * Nv, q) * s2;
        return num / (q * q * b(2 * l, q) * b(2 * l + 2, q));
    };
    double sum = 0.0;
    for (int k = 0; k <= 20 - index_margin; ++k) {
        double l = 1.0 + k;
        for (double m = -l; m <= l; m += 1.0) {
            double X = b(2 * l, q) - std::pow(q, l + m + 1) * b(2, q) * b(l - m, q);
            sum += -X * (bet(-1.0, l) - bet(1.0, l)) / (q * b(2, q));
        }
    }
    EXPECT_NEAR(chern0(AlgebraWord::gen("A"), p, 20), sum, 1e-12);
}

TEST(PodlesQIndex, Values) {
    EXPECT_NEAR(twisted_q_index(Params(0.5, 1.0, H(1)), 40), 1.0, 1e-6);
    EXPECT_NEAR(twisted_q_index(Params(0.5, 0.3, H(2)), 40), 2.5, 1e-6);
    EXPECT_NEAR(twisted_q_index(Params(0.5, 0.3, H(-1)), 40), -1.0, 1e-6);
}

TEST(PodlesQIndex, IndependentOfS) {
    double ref = twisted_q_index(Params(0.3, 0.0, H(2)), 30);
    for (double s : {0.25, 0.5, 0.75, 1.0}) EXPECT_NEAR(twisted_q_index(Params(0.3, s, H(2)), 30), ref, 1e-8);
}

TEST(PodlesZeta, ClosedForms) {
    Params half(0.5, 0.5, H(1));
    const int L = 100000;
    double z = zeta_partial(nullptr, 3, half, L);
    double c = 4 * std::numbers::pi * std::numbers::pi / 6;
    EXPECT_LE(c - z, zeta_tail_bound(3, half, L));
    EXPECT_GE(c - z, 0.0);
    Params one(0.5, 0.5, H(2));
    z = zeta_partial(nullptr, 4, one, L);
    c = zeta_closed_form(4, one);
    EXPECT_NEAR(c, 4 * 1.2020569031595942 + 2 * std::pow(std::numbers::pi, 4) / 90, 1e-12);
    EXPECT_LE(c - z, zeta_tail_bound(4, one, L));
    EXPECT_GE(c - z, 0.0);
}

TEST(PodlesZeta, WeightedMatchesCount) {
    Params p(0.5, 0.5, H(3));
    std::function<double(const Label&)> one = [](const Label&) { return 1.0; };
    EXPECT_NEAR(zeta_partial(one, 3.5, p, 30), zeta_partial(nullptr, 3.5, p, 30), 1e-12);
}

TEST(PodlesZeta, ResidueAtTwo) {
    Params p(0.5, 0.5, H(1));
    double prev = 1.0;
    for (int k = 1; k <= 3; ++k) {
        double e = std::pow(10.0, -k);
        double d = std::abs(e * zeta_closed_form(2 + e, p) - 4.0);
        EXPECT_LT(d, prev);
        EXPECT_LT(d, 4 * e);
        prev = d;
    }
}

TEST(PodlesResidue, Symbols) {
    for (double s : {0.0, 0.3, 1.0}) {
        Params p(0.5, s, H(1));
        EXPECT_DOUBLE_EQ(top_residue(AlgebraWord::unit(), p), 4.0);
        EXPECT_EQ(top_residue(AlgebraWord::gen("B"), p), 0.0);
        EXPECT_NEAR(top_residue(AlgebraWord::parse("B B*"), p), 4 * s * s, 1e-15);
        EXPECT_EQ(top_residue(AlgebraWord::parse("A B B*"), p), 0.0);
    }
    EXPECT_THROW(top_residue(AlgebraWord::gen("K"), Params(0.5, 0.5, H(1))), std::invalid_argument);
}

TEST(PodlesReal, JSquaredAndDirac) {
    for (int n2 : {1, 2, 3, -1}) {
        Params p(0.5, 0.5, H(n2));
        auto J = real_structure_J(p);
        auto D = dirac(p);
        const double sgn = n2 % 2 == 0 ? 1.0 : -1.0;
        for (const auto& v : basis(p, 5).labels()) {
            Terms<Label> x{{v, cplx(0.3, 0.7)}};
            auto jj = J.apply(J.apply(x));
            ASSERT_EQ(jj.size(), 1u);
            EXPECT_EQ(jj[0].first, v);
            EXPECT_EQ(jj[0].second, sgn * cplx(0.3, 0.7));
            EXPECT_TRUE(minus(J.apply(D.apply(x)), D.apply(J.apply(x))).empty());
        }
    }
}

TEST(PodlesReal, WeakDecayStable) {
    Params p(0.5, 1.0, H(1));
    double r10 = weak_real_decay("x1", "x1", p, 10);
    double prev = r10;
    EXPECT_TRUE(std::isfinite(r10));
    for (int L : {15, 20, 25}) {
        double r = weak_real_decay("x1", "x1", p, L);
        EXPECT_LE(r, prev * (1 + 1e-9));
        prev = r;
    }
}

TEST(PodlesDecay, SignCommutatorBound) {
    Params p(0.5, 1.0, H(1));
    auto F = sign_F(p);
    auto g = generators(p);
    std::function<double(const Label&)> rate = [](const Label& v) { return std::pow(0.5, v.l()); };
    for (std::string name : {"x1", "x0", "xm1"}) {
        auto c = commutator(F, g[name]);
        double r20 = sup_decay_ratio(c, basis(p, 20).interior(1), rate);
        double r30 = sup_decay_ratio(c, basis(p, 30).interior(1), rate);
        EXPECT_TRUE(std::isfinite(r20));
        EXPECT_NEAR(r30, r20, 1e-9 * r20 + 1e-12) << name;
    }
}

TEST(PodlesDecay, OneSectorBoundAtSZero) {
    Params p(0.5, 0.0, H(1));
    auto x1 = generator_kernel(Gen::x1, p);
    std::function<double(const Label&)> rate = [](const Label& v) { return std::pow(0.5, v.l()); };
    auto shifting = [&](int cutoff) {
        double r = 0.0;
        for (const auto& v : basis(p, cutoff).interior(1))
            for (const auto& [t, c] : x1(v))
                if (t.l2 != v.l2) r = std::max(r, std::abs(c) / rate(v));
        return r;
    };
    double a = shifting(15), c = shifting(30);
    EXPECT_TRUE(std::isfinite(a));
    EXPECT_NEAR(a, c, 1e-9 * a);
}

TEST(PodlesScalar, MatchesLeftRegular) {
    for (double s : {0.0, 0.5, 1.0}) EXPECT_LT(scalar_consistency(Params(0.5, s, H(0)), 8), 1e-10);
    Params p(0.5, 0.5, H(0));
    auto B = basis(p, 8);
    auto Al = left_regular(Gen::A, p);
    EXPECT_LT(adjoint_mismatch(Al, Al, B, 1), 1e-10);
    // B⁺ at m = l after the change of generators
    const double q = p.q;
    auto x1 = generator_kernel(Gen::x1, p);
    auto Bl = left_regular(Gen::B, p);
    for (int l2 = 0; l2 <= 10; l2 += 2) {
        Label v{l2, l2, 1}, w{l2 + 2, l2 + 2, 1};
        EXPECT_NEAR(coefficient_of(Bl(v), w).real(), coefficient_of(x1(v), w).real() / std::sqrt(q * b(2, q)),
                    1e-12);
    }
    EXPECT_THROW(left_regular(Gen::x1, p), std::invalid_argument);
}

#include <gtest/gtest.h>

#include <cmath>

#include "qsph/oddspheres.hpp"

using namespace qsph;
using namespace qsph::odd;

namespace {

// dimension of the SU(3) irrep with Dynkin labels (a, b)
std::int64_t su3_dim(int a, int b) { return std::int64_t(a + 1) * (b + 1) * (a + b + 2) / 2; }

}  // namespace

TEST(OddLabels, Enumeration) {
    EXPECT_EQ(enumerate_labels(2, 0).size(), 1u);
    EXPECT_EQ(enumerate_labels(2, 1).size(), 7u);
    EXPECT_EQ(enumerate_labels(2, 0)[0].r, Tableau(2));
    EXPECT_THROW(enumerate_labels(1, 3), std::invalid_argument);
    EXPECT_THROW(enumerate_labels(2, -1), std::invalid_argument);
    EXPECT_EQ(tableaux(2, 1, 0).size(), 3u);
}

TEST(OddLabels, CountsMatchWeyl) {
    for (int n = 0; n <= 5; ++n)
        for (int h = 0; n + h <= 5; ++h) {
            EXPECT_EQ(count_tableaux(2, n, h), su3_dim(n, h));
            EXPECT_EQ(count_tableaux(2, n, h), weyl_dim_nh(2, n, h));
            EXPECT_EQ(count_tableaux(3, n, h), weyl_dim_nh(3, n, h));
        }
    // SU(4): (1,0,0) -> 4, (1,1,1) -> 4bar, (2,1,1) -> 15
    EXPECT_EQ(weyl_dim({1, 0, 0}), 4);
    EXPECT_EQ(weyl_dim({1, 1, 1}), 4);
    EXPECT_EQ(weyl_dim({2, 1, 1}), 15);
}

TEST(OddLabels, TableauxAreValid) {
    for (int ell : {2, 3})
        for (const auto& v : enumerate_labels(ell, 5).labels()) {
            EXPECT_TRUE(v.r.valid());
            EXPECT_EQ(v.r.at(1, 1), v.n + v.h);
            for (int j = 2; j <= ell; ++j) EXPECT_EQ(v.r.at(1, j), v.h);
        }
}

TEST(OddLambda, PartialIsometry) {
    for (int ell : {2, 3})
        for (const auto& v : enumerate_labels(ell, 6).labels()) {
            auto x = W(v);
            EXPECT_TRUE(in_lambda(x));
            auto back = W_star(x);
            ASSERT_TRUE(back.has_value());
            EXPECT_EQ(*back, v);
        }
    OddLabel zero{0, 0, Tableau(2)};
    auto z = W(zero);
    EXPECT_EQ(z.a, std::vector<int>({0}));
    EXPECT_EQ(z.b, std::vector<int>({0, 0}));
    // b_0 < -a_1
    EXPECT_FALSE(W_star(LambdaLabel{1, 1, {0}, {-1, 0}}).has_value());
    // b_1 < 0
    EXPECT_FALSE(W_star(LambdaLabel{1, 1, {1}, {-1, -1}}).has_value());
    EXPECT_TRUE(W_star(LambdaLabel{1, 1, {1}, {-1, 0}}).has_value());
}

TEST(OddCG, ZeroOnInvalidTarget) {
    const double q = 0.5;
    for (int i = 1; i <= 3; ++i)
        for (const auto& v : enumerate_labels(2, 4).labels())
            for (const auto& m : moves(i, 2))
                if (!apply_move(v.r, m).valid()) EXPECT_EQ(cg_coeff(i, v.r, m, q), 0.0);
    EXPECT_THROW(cg_coeff(2, Tableau(2), Move{1}, q), std::invalid_argument);
}

TEST(OddCG, MovesAndUndo) {
    EXPECT_EQ(moves(1, 2).size(), 3u);
    EXPECT_EQ(moves(3, 2).size(), 3u * 2u * 1u);
    EXPECT_EQ(privileged_move(3, 2), Move({3, 2, 1}));
    for (const auto& v : enumerate_labels(3, 3).labels())
        for (int i = 1; i <= 4; ++i)
            for (const auto& m : moves(i, 3)) {
                auto t = apply_move(v.r, m);
                if (!t.valid()) continue;
                auto u = undo_move(t, m);
                ASSERT_TRUE(u.has_value());
                EXPECT_EQ(*u, v.r);
            }
}

TEST(OddCG, BoundedByKExponent) {
    // max |C_q| q^{-K} over n+h <= cutoff; the constant must not grow with the cutoff
    auto constant = [](double q, int cutoff) {
        double c = 0.0;
        for (const auto& v : enumerate_labels(2, cutoff).labels())
            for (int i = 1; i <= 3; ++i)
                for (const auto& m : moves(i, 2)) {
                    double x = std::abs(cg_coeff(i, v.r, m, q));
                    if (x != 0.0) c = std::max(c, x * std::pow(q, -K_bound(i, v.r, m)));
                }
        return c;
    };
    for (double q : {0.3, 0.5}) {
        double c4 = constant(q, 4), c5 = constant(q, 5), c7 = constant(q, 7);
        EXPECT_TRUE(std::isfinite(c5));
        EXPECT_LE(c7, c5 * (1 + 1e-9));
        EXPECT_LE(c5, c4 * (1 + 1e-9));
    }
}

TEST(OddCG, PrivilegedMoveLeadingPart) {
    for (double q : {0.3, 0.5}) {
        auto ratio = [q](int cutoff) {
            double r = 0.0;
            for (const auto& v : enumerate_labels(2, cutoff).labels())
                for (int i = 1; i <= 3; ++i) {
                    auto m = privileged_move(i, 2);
                    if (!apply_move(v.r, m).valid()) continue;
                    double d = std::abs(std::pow(q, 1 - i) * cg_coeff(i, v.r, m, q) - ctilde(i, v.r, q));
                    r = std::max(r, d / std::pow(q, v.h));
                }
            return r;
        };
        double r5 = ratio(5), r7 = ratio(7);
        EXPECT_TRUE(std::isfinite(r5));
        EXPECT_LE(r7, r5 * (1 + 1e-3));
    }
}

TEST(OddCG, KAtLeastHOffPrivileged) {
    for (int ell : {2, 3})
        for (const auto& v : enumerate_labels(ell, ell == 2 ? 6 : 4).labels())
            for (int i = 2; i <= ell + 1; ++i)
                for (const auto& m : moves(i, ell)) {
                    if (m[0] != ell + 1 || m == privileged_move(i, ell)) continue;
                    if (!apply_move(v.r, m).valid()) continue;
                    EXPECT_GE(K_bound(i, v.r, m), v.h);
                }
}

TEST(OddRepresentation, Relations) {
    for (int ell : {2, 3})
        for (double q : {0.3, 0.5}) {
            auto B = enumerate_labels(ell, ell == 2 ? 5 : 4);
            auto g = generators(Params(ell, q));
            EXPECT_LT(relation_residual(relations(ell, q), g, B, 2), 1e-8) << ell << " " << q;
            // the sphere relation alone
            EXPECT_LT(relation_residual({relations(ell, q).back()}, g, B, 2), 1e-8);
        }
}

TEST(OddRepresentation, PrintedSignOfZeroFails) {
    auto B = enumerate_labels(2, 4);
    EXPECT_GT(relation_residual(relations(2, 0.5), generators(Params(2, 0.5, +1)), B, 2), 0.1);
}

TEST(OddRepresentation, PerturbationIsDetected) {
    auto B = enumerate_labels(2, 4);
    EXPECT_GT(relation_residual(relations(2, 0.5), generators(Params(2, 0.5, -1, 1e-4)), B, 2), 1e-6);
}

TEST(OddRepresentation, AdjointsAndTargets) {
    Params par(2, 0.5);
    auto B = enumerate_labels(2, 6);
    auto g = generators(par);
    for (int i = 1; i <= 3; ++i) {
        auto z = "z" + std::to_string(i);
        EXPECT_LT(adjoint_mismatch(g[z], g[z + "*"], B, 1), 1e-8);
        for (const auto& v : B.labels())
            for (const auto& [t, c] : g[z + "*"](v)) EXPECT_TRUE(t.r.valid());
    }
}

TEST(OddRepresentation, FirstBranchBoundedByQh) {
    for (double q : {0.3, 0.5}) {
        Params par(2, q);
        std::function<double(const OddLabel&)> rate = [q](const OddLabel& v) { return std::pow(q, v.h); };
        for (int g = 1; g <= 3; ++g) {
            auto k = zstar_kernel(g, par, Branch::raise_n);
            double r5 = sup_decay_ratio(k, enumerate_labels(2, 5).labels(), rate);
            double r7 = sup_decay_ratio(k, enumerate_labels(2, 7).labels(), rate);
            EXPECT_TRUE(std::isfinite(r5));
            EXPECT_LE(r7, r5 * 1.01 + 1e-12);
        }
    }
}

TEST(OddDirac, SpectrumAndCommutators) {
    Params par(2, 0.5);
    auto B = enumerate_labels(2, 8);
    double lo = 1e9;
    for (const auto& v : B.labels()) {
        EXPECT_EQ(std::abs(dirac_eigenvalue(v)), v.n + v.h + 1.0);
        lo = std::min(lo, std::abs(dirac_eigenvalue(v)));
    }
    EXPECT_EQ(lo, 1.0);
    for (int g = 1; g <= 3; ++g) {
        double s8 = dirac_commutator_sup(z_kernel(g, par), B);
        double s6 = dirac_commutator_sup(z_kernel(g, par), enumerate_labels(2, 6));
        EXPECT_TRUE(std::isfinite(s8));
        EXPECT_LE(s8, s6 * 1.05);
    }
}

TEST(OddMultiplicity, CountsAndPolynomial) {
    for (int ell : {2, 3}) {
        EXPECT_EQ(multiplicity(ell, 1), 1);
        for (int k = 1; k <= 8; ++k) EXPECT_EQ(multiplicity(ell, k), multiplicity_weyl(ell, k));
        for (int k = 1; k <= 4; ++k) EXPECT_EQ(mu_difference(ell, 2 * ell + 1, k), 0);
    }
    for (std::int64_t k = 1; k <= 12; ++k) EXPECT_EQ(multiplicity(2, int(k)), k * (k + 1) * (k + 1) * (k + 2) / 12);
    EXPECT_THROW(multiplicity(2, 0), std::invalid_argument);
}

TEST(OddMultiplicity, PrintedConstant) {
    EXPECT_EQ(C_const(1), Rational(1));
    EXPECT_EQ(C_const(2), Rational(1, 6));
    EXPECT_EQ(C_const(3), Rational(31, 1440));
}

TEST(OddMultiplicity, LeadingCoefficient) {
    EXPECT_EQ(dixmier_constant(1), Rational(1));
    EXPECT_EQ(dixmier_constant(2), Rational(1, 12));
    EXPECT_EQ(dixmier_constant(3), Rational(1, 360));
    for (int ell : {2, 3}) {
        for (const auto& r : leading_from_differences(ell, 8)) EXPECT_EQ(r, dixmier_constant(ell));
        EXPECT_EQ(finite_diff_check(ell, 8, dixmier_constant(ell)), 0.0);
    }
    // C_const is off by a factor 2 at ell = 2
    EXPECT_NEAR(finite_diff_check(2, 8), 1.0 / 12.0, 1e-15);
    // mu_k / k^{2 ell} tends to the same constant
    EXPECT_NEAR(double(multiplicity_weyl(2, 200)) / std::pow(200.0, 4), 1.0 / 12.0, 3e-3);
}

TEST(OddSymbol, ExactRepresentation) {
    for (int ell : {2, 3})
        for (double q : {0.3, 0.5}) {
            auto B = lambda_basis(ell, ell == 2 ? 6 : 5);
            EXPECT_LT(relation_residual(relations(ell, q), symbol_generators(ell, q), B, 2), 1e-10);
        }
}

TEST(OddSymbol, ResidualBoundStable) {
    for (double q : {0.3, 0.5}) {
        Params par(2, q);
        for (int g = 1; g <= 3; ++g)
            for (bool star : {false, true}) {
                auto prof = residual_profile(g, star, par, 8);
                double r6 = *std::max_element(prof.begin(), prof.begin() + 7);
                double r8 = *std::max_element(prof.begin(), prof.end());
                EXPECT_LE(r8, 1.0 + 1e-12);
                EXPECT_LE(r8, r6 * (1 + 1e-3));
                // the per-level ratio approaches q^{g-1}
                EXPECT_NEAR(prof.back(), std::pow(q, g - 1), 1e-3);
            }
    }
}

TEST(OddSymbol, ProjectiveResidual) {
    Params par(2, 0.5);
    for (int N = 0; N <= 2; ++N) {
        double r6 = projective_residual(1, 2, par, N, 6);
        double r8 = projective_residual(1, 2, par, N, 8);
        EXPECT_LE(r8, 1.0);
        EXPECT_LE(r8, r6 * 1.01);
    }
    EXPECT_THROW(projective_residual(1, 2, par, -1, 3), std::invalid_argument);
}

TEST(OddDecay, IdealCheck) {
    auto d = decay_ideal_check(2, 0.5, 5.0, 40);
    for (std::size_t k = 1; k < d.partial.size(); ++k) {
        EXPECT_GE(d.partial[k], d.partial[k - 1]);
        EXPECT_LE(d.partial[k], d.bound[k]);
    }
    for (std::size_t k = 12; k < d.partial.size(); ++k)
        EXPECT_LE(d.partial[k] - d.partial[k - 1], d.partial[k - 1] - d.partial[k - 2]);
    auto slow = decay_ideal_check(2, 0.5, 4.1, 30);
    EXPECT_LE(slow.partial.back(), slow.bound.back());
    EXPECT_THROW(decay_ideal_check(2, 0.5, 4.0, 10), std::invalid_argument);
    for (const auto& v : enumerate_labels(2, 6).labels())
        EXPECT_LE(L_kernel(1, 2, 0.5)(v)[0].second.real(), L_kernel(2, 2, 0.5)(v)[0].second.real());
}

TEST(OddIntegral, Values) {
    for (int ell : {2, 3}) {
        const double C = leading_from_differences(ell, 8).front().value();
        auto top = "z" + std::to_string(ell + 1);
        EXPECT_NEAR(nc_integral(AlgebraWord::unit(), ell).real(), C, 1e-15);
        EXPECT_EQ(nc_integral(AlgebraWord::gen("z1"), ell), cplx(0.0));
        EXPECT_NEAR(nc_integral(AlgebraWord::parse(top + " " + top + "*"), ell).real(), C, 1e-15);
        EXPECT_EQ(nc_integral(AlgebraWord::parse(top + " " + top), ell), cplx(0.0));
    }
    EXPECT_THROW(nc_integral(AlgebraWord::gen("x"), 2), std::invalid_argument);
}

TEST(OddIntegral, ShellAveragesFollowSymbol) {
    Params par(2, 0.5);
    auto top = AlgebraWord::parse("z3 z3*"), low = AlgebraWord::parse("z1 z1*");
    double t5 = shell_average(top, par, 5).real(), t20 = shell_average(top, par, 20).real();
    double l5 = shell_average(low, par, 5).real(), l20 = shell_average(low, par, 20).real();
    EXPECT_GT(t20, t5);
    EXPECT_LT(l20, l5);
    EXPECT_LT(1 - t20, 0.25);
    EXPECT_LT(l20, 0.05);
}

/**
 * @file s4q.hpp
 * @brief The quantum orthogonal 4-sphere: U_q(so(5)) data, scalar, chiral and
 * Fock representations, index pairings, Haar state, gamma matrices, zeta
 * functions and the real structure.
 */
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsph/opalg.hpp"
#include "qsph/qcore.hpp"

namespace qsph::s4q {

/// Which label a coefficient's epsilon is read from.  `source` uses the
/// epsilon of the vector being acted on for every coefficient; `subscript`
/// recomputes it from the coefficient's own (l, j, m2) arguments.
enum class EpsMode { source, subscript };

struct Params {
    double q;
    EpsMode eps = EpsMode::subscript;
    double perturb = 0.0;  // relative error injected into D+, for soundness probes

    explicit Params(double q_, EpsMode e = EpsMode::subscript, double perturb_ = 0.0)
        : q(check_q(q_)), eps(e), perturb(perturb_) {}
};

/// |l,m1,m2;j> with chir = 0 on the scalar space and chir = +1/-1 on H_+/H_-.
struct Label {
    HalfInt l, m1, m2, j;
    int chir = 0;
    auto operator<=>(const Label&) const = default;
    bool operator==(const Label&) const = default;
    std::size_t hash() const {
        std::size_t h = std::hash<int>{}(l.twice);
        for (int v : {m1.twice, m2.twice, j.twice, chir}) h = hash_mix(h, std::hash<int>{}(v));
        return h;
    }
};

inline bool admissible(const Label& v) {
    const int l2 = v.l.twice, j2 = v.j.twice, a2 = v.m1.twice, b2 = v.m2.twice;
    if (l2 < 0 || j2 < 0 || j2 > l2) return false;
    if (j2 - std::abs(a2) < 0 || (j2 - a2) % 2 != 0) return false;
    if (l2 % 2 == 0) {
        if (v.chir != 0 || j2 % 2 != 0) return false;
        int r2 = l2 - j2 - std::abs(b2);
        return r2 >= 0 && r2 % 4 == 0;
    }
    if (v.chir != 1 && v.chir != -1) return false;
    if (j2 % 2 == 0) return false;
    int r2 = l2 + 1 - j2 - std::abs(b2);
    return r2 >= 0 && r2 % 2 == 0;
}

/// Governing level: l on the scalar space, l - 1/2 on the chiral spaces.
inline int level(const Label& v) { return v.l.twice / 2; }

/// The unique eps in {0, ±1/2} with l + eps - j - m2 in 2N, stored doubled.
inline int eps2_of(HalfInt l, HalfInt j, HalfInt m2) {
    if (l.is_integer()) return 0;
    int n2 = l.twice + 1 - j.twice - m2.twice;  // twice an integer
    return parity_sign(n2);
}

inline int eps2_of(const Label& v) { return eps2_of(v.l, v.j, v.m2); }

inline double root(double x) {
    if (x < -1e-9) throw std::domain_error("negative radicand " + std::to_string(x));
    return x > 0.0 ? std::sqrt(x) : 0.0;
}

// ---------------------------------------------------------------------------
// Coefficients.  Arguments are plain values; e is epsilon (0 or ±1/2).

struct Coefficients {
    double q;

    double b(double x) const { return qnum(x, q); }
    double p(double x) const { return std::pow(q, x); }

    // chiral representation
    double Ap(double j, double m) const { return p(m - 1) * root(b(j + m + 1) * b(j - m + 1)) / b(2 * j + 2); }
    double A0(double j, double m) const {
        return p(-2) * (p(j + m + 1) * b(2) * b(j - m) - b(2 * j)) / (b(2 * j) * b(2 * j + 2));
    }
    double Bp(double j, double m) const {
        return p(-j + m - 0.5) * root(b(j + m + 1) * b(j + m + 2)) / b(2 * j + 2);
    }
    double B0(double j, double m) const {
        return (1 + q * q) * p(m - 0.5) * root(b(j - m) * b(j + m + 1)) / (b(2 * j) * b(2 * j + 2));
    }
    double Bm(double j, double m) const { return -p(j + m + 0.5) * root(b(j - m) * b(j - m - 1)) / b(2 * j); }

    double Cp(double l, double j, double k, double e) const {
        return -p(k - 1 - e) * root(b(l + j + k + 3 + e) * b(l + j - k + 3 - e)) / b(2 * l + 4);
    }
    double C0(double l, double j, double k, double e) const {
        return b(4 * e) * p(2 * e * l + k - 1 + 3 * e) *
               root(b(l + 0.5 + j - 2 * e * k + 2) * b(l + 0.5 - j - 2 * e * k)) / (b(2 * l + 2) * b(2 * l + 4));
    }
    double Cm(double l, double j, double k, double e) const {
        return -p(k - 1 + e) * root(b(l - j + k - e) * b(l - j - k + e)) / b(2 * l + 2);
    }
    double Hp(double l, double j, double k, double e) const {
        return p(k - 1 + e * (2 * j + 1)) * root(b(l + 2 * e * j - k + 2 + e) * b(l - 2 * e * j + k + 2 - e)) /
               b(2 * l + 4);
    }
    double H0(double l, double j, double k, double e) const {
        const double f = e * (2 * j + 1);
        return (b(l - f - k + 1) * b(l - f + k + 2) - p(-2) * b(l + f - k + 2) * b(l + f + k + 1)) /
               (b(2 * l + 2) * b(2 * l + 4));
    }
    double Dp(double l, double j, double k, double e) const {
        return p(-l + k - 1.5) * root(b(l + j + k + 3 + e) * b(l - j + k + 2 - e)) / b(2 * l + 4);
    }
    double D0(double l, double j, double k, double e) const {
        return b(2) * p(k + 0.5) * root(b(l - 2 * e * j - k + 1 - e) * b(l - 2 * e * j + k + 2 - e)) /
               (b(2 * l + 2) * b(2 * l + 4));
    }
    double Dm(double l, double j, double k, double e) const {
        return -p(l + k + 1.5) * root(b(l - j - k + e) * b(l + j - k + 1 - e)) / b(2 * l + 2);
    }

    // scalar representation
    double As(double j, double m) const {
        return p(m - 1) * root(b(j + m + 1) * b(j - m + 1) / (b(2 * j + 1) * b(2 * j + 3)));
    }
    double Bps(double j, double m) const {
        return p(-j + m - 0.5) * root(b(j + m + 1) * b(j + m + 2) / (b(2 * j + 1) * b(2 * j + 3)));
    }
    double Bms(double j, double m) const {
        return -p(j + m + 0.5) * root(b(j - m) * b(j - m - 1) / (b(2 * j - 1) * b(2 * j + 1)));
    }
    double Cps(double l, double j, double k) const {
        return p(k - 1) * root(b(l + j + k + 3) * b(l + j - k + 3) / (b(2 * l + 3) * b(2 * l + 5)));
    }
    double Cms(double l, double j, double k) const {
        return -p(k - 1) * root(b(l - j + k) * b(l - j - k) / (b(2 * l + 1) * b(2 * l + 3)));
    }
    double Dps(double l, double j, double k) const {
        return p(-l + k - 1.5) * root(b(l + j + k + 3) * b(l - j + k + 2) / (b(2 * l + 3) * b(2 * l + 5)));
    }
    double Dms(double l, double j, double k) const {
        return p(l + k + 1.5) * root(b(l - j - k) * b(l + j - k + 1) / (b(2 * l + 1) * b(2 * l + 3)));
    }

    // U_q(so(5)) irreps
    double a(double l, double j, double k, double e) const {
        const double ae = std::abs(e);
        return root(b(l - j - k + e) * b(l + j + k + 3 + e) / (b(2 * (j + ae) + 1) * b(2 * (j - ae) + 3))) / b(2);
    }
    double bcoef(double l, double j, double k, double e) const {
        if (e == 0.0) return 0.0;
        const double f = e * (2 * j + 1);
        return root(b(l - f - k + 1) * b(l - f + k + 2)) / (b(2 * j) * b(2 * j + 2));
    }
    double c(double l, double j, double k, double e) const {
        const double ae = std::abs(e), sgn = e == 0.0 ? 1.0 : -1.0;
        return sgn * root(b(l - j + k + 2 - e) * b(l + j - k + 1 - e) / (b(2 * (j + ae) - 1) * b(2 * (j - ae) + 1))) /
               b(2);
    }
};

// ---------------------------------------------------------------------------
// Representations of A(S^4_q)

namespace detail {
inline Label shifted(const Label& v, int dl2, int dm1_2, int dm2_2, int dj2) {
    return {HalfInt{v.l.twice + dl2}, HalfInt{v.m1.twice + dm1_2}, HalfInt{v.m2.twice + dm2_2},
            HalfInt{v.j.twice + dj2}, v.chir};
}

template <class F>
void emit(Terms<Label>& out, const Label& t, F coef) {
    if (!admissible(t)) return;
    double c = coef();
    if (c != 0.0) out.emplace_back(t, c);
}

/// epsilon used for a coefficient whose own subscripts are (l, j, m2)
inline double eps_for(const Params& p, double e_src, HalfInt l, HalfInt j, HalfInt m2) {
    if (p.eps == EpsMode::source) return e_src;
    return 0.5 * eps2_of(l, j, m2);
}
}  // namespace detail

enum class Gen { x0, x1, x2 };

/// x0, x1 or x2 on any S4 label; the label decides between the scalar and the
/// two chiral representations.
inline Kernel<Label> generator_kernel(Gen g, const Params& par) {
    const std::string name = g == Gen::x0 ? "x0" : g == Gen::x1 ? "x1" : "x2";
    return {name,
            [g, par](const Label& v) {
                using detail::emit;
                using detail::shifted;
                Coefficients C{par.q};
                Terms<Label> out;
                const double l = v.l.value(), j = v.j.value(), m1 = v.m1.value(), k = v.m2.value();
                if (v.chir == 0) {
                    if (g == Gen::x2) {
                        emit(out, shifted(v, 2, 0, 2, 0), [&] { return (1 + par.perturb) * C.Dps(l, j, k); });
                        emit(out, shifted(v, -2, 0, 2, 0), [&] { return C.Dms(l, j, k); });
                        return out;
                    }
                    const int dm = g == Gen::x1 ? 2 : 0;
                    auto up = [&] { return g == Gen::x0 ? C.As(j, m1) : C.Bps(j, m1); };
                    auto dn = [&] { return g == Gen::x0 ? C.As(j - 1, m1) : C.Bms(j, m1); };
                    emit(out, shifted(v, 2, dm, 0, 2), [&] { return up() * C.Cps(l, j, k); });
                    emit(out, shifted(v, -2, dm, 0, 2), [&] { return up() * C.Cms(l, j, k); });
                    emit(out, shifted(v, 2, dm, 0, -2), [&] { return dn() * C.Cms(l + 1, j - 1, k); });
                    emit(out, shifted(v, -2, dm, 0, -2), [&] { return dn() * C.Cps(l - 1, j - 1, k); });
                    return out;
                }
                const double e = 0.5 * eps2_of(v);
                const double s = v.chir;
                auto E = [&](int dl, int dj) {
                    return detail::eps_for(par, e, v.l + HalfInt::from_int(dl), v.j + HalfInt::from_int(dj), v.m2);
                };
                if (g == Gen::x2) {
                    emit(out, shifted(v, 2, 0, 2, 0), [&] { return (1 + par.perturb) * C.Dp(l, j, k, e); });
                    emit(out, shifted(v, 0, 0, 2, 0), [&] { return s * C.D0(l, j, k, e); });
                    emit(out, shifted(v, -2, 0, 2, 0), [&] { return C.Dm(l, j, k, e); });
                    return out;
                }
                const int dm = g == Gen::x1 ? 2 : 0;
                auto up = [&] { return g == Gen::x0 ? C.Ap(j, m1) : C.Bp(j, m1); };
                auto mid = [&] { return g == Gen::x0 ? C.A0(j, m1) : C.B0(j, m1); };
                auto dn = [&] { return g == Gen::x0 ? C.Ap(j - 1, m1) : C.Bm(j, m1); };
                emit(out, shifted(v, 2, dm, 0, 2), [&] { return up() * C.Cp(l, j, k, e); });
                emit(out, shifted(v, 0, dm, 0, 2), [&] { return -s * up() * C.C0(l, j, k, e); });
                emit(out, shifted(v, -2, dm, 0, 2), [&] { return up() * C.Cm(l, j, k, e); });
                emit(out, shifted(v, 2, dm, 0, 0), [&] { return mid() * C.Hp(l, j, k, e); });
                emit(out, shifted(v, 0, dm, 0, 0), [&] { return s * mid() * C.H0(l, j, k, e); });
                emit(out, shifted(v, -2, dm, 0, 0), [&] { return mid() * C.Hp(l - 1, j, k, E(-1, 0)); });
                emit(out, shifted(v, 2, dm, 0, -2), [&] { return dn() * C.Cm(l + 1, j - 1, k, E(1, -1)); });
                emit(out, shifted(v, 0, dm, 0, -2), [&] { return -s * dn() * C.C0(l, j - 1, k, E(0, -1)); });
                emit(out, shifted(v, -2, dm, 0, -2), [&] { return dn() * C.Cp(l - 1, j - 1, k, E(-1, -1)); });
                return out;
            },
            1};
}

namespace detail {
/// Candidate sources u with <w|x|u> possibly nonzero.
inline std::vector<Label> preimages(Gen g, const Label& w) {
    std::vector<Label> out;
    const int dm1 = g == Gen::x1 ? 2 : 0, dm2 = g == Gen::x2 ? 2 : 0;
    for (int dl : {-2, 0, 2})
        for (int dj : {-2, 0, 2}) {
            if (g == Gen::x2 && dj != 0) continue;
            Label u = shifted(w, -dl, -dm1, -dm2, -dj);
            if (admissible(u)) out.push_back(u);
        }
    return out;
}
}  // namespace detail

inline Kernel<Label> adjoint_generator(Gen g, const Params& par) {
    return adjoint_kernel<Label>(generator_kernel(g, par),
                                 [g](const Label& w) { return detail::preimages(g, w); });
}

/// x0, x1, x1*, x2, x2*
inline GeneratorMap<Label> generators(const Params& par) {
    GeneratorMap<Label> m;
    m.emplace("x0", generator_kernel(Gen::x0, par));
    m.emplace("x1", generator_kernel(Gen::x1, par));
    m.emplace("x2", generator_kernel(Gen::x2, par));
    m.emplace("x0*", m.at("x0"));
    m.emplace("x1*", adjoint_generator(Gen::x1, par));
    m.emplace("x2*", adjoint_generator(Gen::x2, par));
    return m;
}

/// Pol_1 ... Pol_7
inline std::vector<AlgebraWord> seven_polynomials(double q) {
    auto x = [](const char* n, bool st = false) { return AlgebraWord::gen(n, st); };
    const double q2 = q * q, q4 = q2 * q2;
    auto x0 = x("x0"), x1 = x("x1"), x2 = x("x2"), x1s = x("x1", true), x2s = x("x2", true);
    return {x0 * x2 - q2 * (x2 * x0),
            x1 * x2 - q2 * (x2 * x1),
            x2s * x1 - q2 * (x1 * x2s),
            x0 * x1 - q2 * (x1 * x0),
            x1 * x1s - x1s * x1 + (1 - q4) * (x0 * x0),
            x2 * x2s - x2s * x2 + x1s * x1 - q4 * (x1 * x1s),
            x0 * x0 + x1 * x1s + x2 * x2s - AlgebraWord::unit()};
}

// ---------------------------------------------------------------------------
// U_q(so(5))

enum class Hopf { K1, K2, K1inv, K2inv, E1, E2 };

inline Kernel<Label> so5_kernel(Hopf h, const Params& par) {
    const double q = par.q;
    switch (h) {
        case Hopf::K1:
        case Hopf::K1inv: {
            double sg = h == Hopf::K1 ? 1.0 : -1.0;
            return diagonal_kernel<Label>(h == Hopf::K1 ? "K1" : "K1inv", [q, sg](const Label& v) {
                return cplx(std::pow(q, sg * v.m1.value()));
            });
        }
        case Hopf::K2:
        case Hopf::K2inv: {
            double sg = h == Hopf::K2 ? 1.0 : -1.0;
            return diagonal_kernel<Label>(h == Hopf::K2 ? "K2" : "K2inv", [q, sg](const Label& v) {
                return cplx(std::pow(q, sg * (v.m2.value() - v.m1.value())));
            });
        }
        case Hopf::E1:
            return {"E1",
                    [q](const Label& v) {
                        Terms<Label> out;
                        const double j = v.j.value(), m = v.m1.value();
                        detail::emit(out, detail::shifted(v, 0, 2, 0, 0),
                                     [&] { return root(qnum(j - m, q) * qnum(j + m + 1, q)); });
                        return out;
                    },
                    0};
        case Hopf::E2:
            return {"E2",
                    [q](const Label& v) {
                        Coefficients C{q};
                        Terms<Label> out;
                        const double l = v.l.value(), j = v.j.value(), m = v.m1.value(), k = v.m2.value();
                        const double e = 0.5 * eps2_of(v);
                        auto b = [q](double x) { return qnum(x, q); };
                        detail::emit(out, detail::shifted(v, 0, -2, 2, 2),
                                     [&] { return root(b(j - m + 1) * b(j - m + 2)) * C.a(l, j, k, e); });
                        detail::emit(out, detail::shifted(v, 0, -2, 2, 0),
                                     [&] { return root(b(j + m) * b(j - m + 1)) * C.bcoef(l, j, k, e); });
                        detail::emit(out, detail::shifted(v, 0, -2, 2, -2),
                                     [&] { return root(b(j + m) * b(j + m - 1)) * C.c(l, j, k, e); });
                        return out;
                    },
                    0};
    }
    throw std::invalid_argument("unknown U_q(so(5)) generator");
}

/// K1, K2, K1inv, K2inv, E1, E2, F1 = E1^*, F2 = E2^*
inline GeneratorMap<Label> hopf_generators(const Params& par) {
    GeneratorMap<Label> m;
    m.emplace("K1", so5_kernel(Hopf::K1, par));
    m.emplace("K2", so5_kernel(Hopf::K2, par));
    m.emplace("K1inv", so5_kernel(Hopf::K1inv, par));
    m.emplace("K2inv", so5_kernel(Hopf::K2inv, par));
    m.emplace("E1", so5_kernel(Hopf::E1, par));
    m.emplace("E2", so5_kernel(Hopf::E2, par));
    m.emplace("F1", adjoint_kernel<Label>(m.at("E1"), [](const Label& w) {
                  Label u = detail::shifted(w, 0, -2, 0, 0);
                  return admissible(u) ? std::vector<Label>{u} : std::vector<Label>{};
              }));
    m.emplace("F2", adjoint_kernel<Label>(m.at("E2"), [](const Label& w) {
                  std::vector<Label> out;
                  for (int dj : {-2, 0, 2}) {
                      Label u = detail::shifted(w, 0, 2, -2, -dj);
                      if (admissible(u)) out.push_back(u);
                  }
                  return out;
              }));
    return m;
}

/// [E_i,F_j] = delta_ij (K_i^2 - K_i^-2)/(q^i - q^-i) and the K-E commutation rules.
inline std::vector<AlgebraWord> hopf_relations(double q) {
    auto g = [](const char* n) { return AlgebraWord::gen(n); };
    auto K1 = g("K1"), K2 = g("K2"), K1i = g("K1inv"), K2i = g("K2inv");
    auto E1 = g("E1"), E2 = g("E2"), F1 = g("F1"), F2 = g("F2");
    return {E1 * F1 - F1 * E1 - (1.0 / (q - 1 / q)) * (K1 * K1 - K1i * K1i),
            E2 * F2 - F2 * E2 - (1.0 / (q * q - 1 / (q * q))) * (K2 * K2 - K2i * K2i),
            E1 * F2 - F2 * E1,
            E2 * F1 - F1 * E2,
            K1 * E1 * K1i - q * E1,
            K2 * E2 * K2i - q * q * E2,
            K1 * E2 * K1i - (1 / q) * E2,
            K2 * E1 * K2i - (1 / q) * E1};
}

/// C_1 = q^-1 K1^2 + q K1^-2 + (q - q^-1)^2 E1 F1
inline AlgebraWord casimir1(double q) {
    auto g = [](const char* n) { return AlgebraWord::gen(n); };
    return (1 / q) * (g("K1") * g("K1")) + q * (g("K1inv") * g("K1inv")) +
           ((q - 1 / q) * (q - 1 / q)) * (g("E1") * g("F1"));
}

/// The crossed-product relations h a = (h_(1) |> a) h_(2) on generators.
inline std::vector<AlgebraWord> crossed_relations(double q) {
    auto g = [](const char* n, bool st = false) { return AlgebraWord::gen(n, st); };
    auto x0 = g("x0"), x1 = g("x1"), x2 = g("x2"), x1s = g("x1", true);
    auto K1 = g("K1"), K2 = g("K2"), E1 = g("E1"), E2 = g("E2"), F1 = g("F1"), F2 = g("F2");
    const double sq = std::sqrt(q), q2n = qnum(2, q);
    return {K1 * x0 - x0 * K1,
            K1 * x1 - q * (x1 * K1),
            K1 * x2 - x2 * K1,
            K2 * x0 - x0 * K2,
            K2 * x1 - (1 / q) * (x1 * K2),
            K2 * x2 - q * (x2 * K2),
            E1 * x0 - x0 * E1 - (1 / sq) * (x1 * K1),
            E1 * x1 - (1 / q) * (x1 * E1),
            E1 * x2 - x2 * E1,
            F1 * x0 - x0 * F1 + (1 / sq) * (K1 * x1s),
            F1 * x1 - (1 / q) * (x1 * F1) - (sq * q2n) * (x0 * K1),
            F1 * x2 - x2 * F1,
            E2 * x0 - x0 * E2,
            E2 * x1 - q * (x1 * E2) - x2 * K2,
            E2 * x2 - (1 / q) * (x2 * E2),
            F2 * x0 - x0 * F2,
            F2 * x1 - q * (x1 * F2),
            F2 * x2 - (1 / q) * (x2 * F2) - x1 * K2};
}

inline GeneratorMap<Label> crossed_generators(const Params& par) {
    auto m = generators(par);
    for (auto& [k, v] : hopf_generators(par)) m.emplace(k, v);
    return m;
}

// ---------------------------------------------------------------------------
// Bases

enum class Space { scalar, chiral_plus, chiral_minus, chiral_both };

inline bool is_chiral(Space s) { return s != Space::scalar; }

/// All labels of V_l (chir = 0 for integer l, else the given chirality).
inline std::vector<Label> irrep_labels(HalfInt l, int chir) {
    std::vector<Label> out;
    for (int j2 = l.is_integer() ? 0 : 1; j2 <= l.twice; j2 += 2)
        for (int a2 = -j2; a2 <= j2; a2 += 2)
            for (int b2 = -l.twice - 1; b2 <= l.twice + 1; ++b2) {
                Label v{l, HalfInt{a2}, HalfInt{b2}, HalfInt{j2}, chir};
                if (admissible(v)) out.push_back(v);
            }
    return out;
}

/// Labels with level <= cutoff (l <= cutoff, resp. l <= cutoff + 1/2).
inline TruncatedBasis<Label> basis(Space s, int cutoff) {
    std::vector<Label> labs;
    std::vector<int> chirs;
    switch (s) {
        case Space::scalar: chirs = {0}; break;
        case Space::chiral_plus: chirs = {1}; break;
        case Space::chiral_minus: chirs = {-1}; break;
        case Space::chiral_both: chirs = {1, -1}; break;
    }
    for (int lev = 0; lev <= cutoff; ++lev)
        for (int c : chirs) {
            HalfInt l{c == 0 ? 2 * lev : 2 * lev + 1};
            auto v = irrep_labels(l, c);
            labs.insert(labs.end(), v.begin(), v.end());
        }
    return TruncatedBasis<Label>(std::move(labs), [](const Label& v) { return level(v); }, cutoff);
}

/// Level cutoff for an l-cutoff Lambda on the given space.
inline int level_cutoff(Space s, HalfInt Lambda) {
    return is_chiral(s) ? (Lambda.twice - 1) / 2 : Lambda.twice / 2;
}

/// dim V_l for l in N + 1/2.
inline double dim_chiral(double l) { return 2.0 / 3.0 * (l + 2.5) * (l + 1.5) * (l + 0.5); }
/// dim V_l for l in N.
inline double dim_scalar(double l) { return (2 * l + 3) * (l + 1) * (l + 2) / 6.0; }

// ---------------------------------------------------------------------------
// Fock representations

struct FockLabel {
    int k1 = 0, k2 = 0, sec = 1;
    auto operator<=>(const FockLabel&) const = default;
    bool operator==(const FockLabel&) const = default;
    std::size_t hash() const {
        return hash_mix(hash_mix(std::hash<int>{}(k1), std::hash<int>{}(k2)), std::hash<int>{}(sec));
    }
};

inline GeneratorMap<FockLabel> fock_generators(double q) {
    check_q(q);
    using T = Terms<FockLabel>;
    GeneratorMap<FockLabel> m;
    m.emplace("x0", diagonal_kernel<FockLabel>("x0", [q](const FockLabel& v) {
                  return cplx(v.sec * std::pow(q, 2 * (v.k1 + v.k2)));
              }));
    m.emplace("x0*", m.at("x0"));
    m.emplace("x1", Kernel<FockLabel>{"x1",
                                      [q](const FockLabel& v) {
                                          double c = std::pow(q, 2 * v.k2) * std::sqrt(1 - std::pow(q, 4 * (v.k1 + 1)));
                                          return T{{{v.k1 + 1, v.k2, v.sec}, c}};
                                      },
                                      1});
    m.emplace("x1*", Kernel<FockLabel>{"x1*",
                                       [q](const FockLabel& v) {
                                           if (v.k1 == 0) return T{};
                                           double c = std::pow(q, 2 * v.k2) * std::sqrt(1 - std::pow(q, 4 * v.k1));
                                           return T{{{v.k1 - 1, v.k2, v.sec}, c}};
                                       },
                                       1});
    m.emplace("x2", Kernel<FockLabel>{"x2",
                                      [q](const FockLabel& v) {
                                          double c = std::sqrt(1 - std::pow(q, 4 * (v.k2 + 1)));
                                          return T{{{v.k1, v.k2 + 1, v.sec}, c}};
                                      },
                                      1});
    m.emplace("x2*", Kernel<FockLabel>{"x2*",
                                       [q](const FockLabel& v) {
                                           if (v.k2 == 0) return T{};
                                           double c = std::sqrt(1 - std::pow(q, 4 * v.k2));
                                           return T{{{v.k1, v.k2 - 1, v.sec}, c}};
                                       },
                                       1});
    return m;
}

/// k1 + k2 <= cutoff, both sectors unless sec is given.
inline TruncatedBasis<FockLabel> fock_basis(int cutoff, std::optional<int> sec = std::nullopt) {
    std::vector<FockLabel> labs;
    for (int s : {1, -1}) {
        if (sec && *sec != s) continue;
        for (int a = 0; a <= cutoff; ++a)
            for (int b = 0; a + b <= cutoff; ++b) labs.push_back({a, b, s});
    }
    return TruncatedBasis<FockLabel>(std::move(labs), [](const FockLabel& v) { return v.k1 + v.k2; },
                                     cutoff);
}

// ---------------------------------------------------------------------------
// Idempotent and gamma matrices

/// The 4x4 idempotent e over the algebra, for any representation given by its
/// generator map (keys x0, x1, x1*, x2, x2*).
template <class L>
KernelMatrix<L> idempotent_e(const GeneratorMap<L>& g, double q) {
    auto id = identity_kernel<L>();
    auto zero = zero_kernel<L>();
    auto half = [](cplx c, const Kernel<L>& k) { return scale<L>(0.5 * c, k); };
    auto diag = [&](double c) {
        return linear_combination<L>({{0.5, id}, {0.5 * c, g.at("x0")}});
    };
    const double q2 = q * q, q3 = q2 * q, q4 = q2 * q2;
    return {{diag(1.0), half(q3, g.at("x2")), half(-q, g.at("x1")), zero},
            {half(1 / q3, g.at("x2*")), diag(-q2), zero, half(q3, g.at("x1"))},
            {half(-1 / q, g.at("x1*")), zero, diag(-q2), half(q3, g.at("x2"))},
            {zero, half(q, g.at("x1*")), half(1 / q3, g.at("x2*")), diag(q4)}};
}

struct GammaSet {
    std::array<Eigen::Matrix4d, 5> g;  // index i + 2 for i in -2..2
    Eigen::Matrix4d eta;

    const Eigen::Matrix4d& operator()(int i) const {
        if (i < -2 || i > 2) throw std::out_of_range("gamma index must lie in -2..2");
        return g[static_cast<std::size_t>(i + 2)];
    }
};

inline GammaSet gamma_matrices(double q) {
    check_q(q);
    GammaSet s;
    for (auto& m : s.g) m.setZero();
    const double q2 = q * q, q3 = q2 * q, q4 = q2 * q2;
    s.g[2].diagonal() << 1, -q2, -q2, q4;
    s.g[3](0, 2) = -q;
    s.g[3](1, 3) = q3;
    s.g[1](2, 0) = -1 / q;
    s.g[1](3, 1) = q;
    s.g[4](0, 1) = q3;
    s.g[4](2, 3) = q3;
    s.g[0](1, 0) = 1 / q3;
    s.g[0](3, 2) = 1 / q3;
    s.eta.setZero();
    s.eta.diagonal() << q4, 1 / q2, q2, 1 / q4;
    return s;
}

/// Tr(eta g_i g_j g_k), or the untwisted trace when twisted is false.
inline double gamma_trace(int i, int j, int k, double q, bool twisted = true) {
    auto s = gamma_matrices(q);
    Eigen::Matrix4d m = s(i) * s(j) * s(k);
    if (twisted) m = s.eta * m;
    return m.trace();
}

// ---------------------------------------------------------------------------
// Fredholm module and index

/// The operator e_+ - e_- on H ⊗ C^4, acting on labels of one chirality
/// (sector labels are identified).  It preserves l.
template <class L, class Flip>
Kernel<Indexed<L>> chirality_difference(const KernelMatrix<L>& e, Flip flip) {
    auto E = matrix_kernel(e, "e");
    return {"e+ - e-",
            [E, flip](const Indexed<L>& v) {
                Terms<Indexed<L>> out = E(v);
                Indexed<L> w{flip(v.base), v.comp};
                for (auto& [t, c] : E(w)) out.emplace_back(Indexed<L>{flip(t.base), t.comp}, -c);
                return merge_terms(std::move(out));
            },
            E.radius};
}

/// 1/2 gamma F [F, e] on the doubled space, with gamma = +1 on the + sector.
template <class L, class Flip, class Sector>
Kernel<Indexed<L>> half_gamma_F_comm(const KernelMatrix<L>& e, Flip flip, Sector sector) {
    auto E = matrix_kernel(e, "e");
    auto F = Kernel<Indexed<L>>{"F", [flip](const Indexed<L>& v) {
                                    return Terms<Indexed<L>>{{{flip(v.base), v.comp}, 1.0}};
                                }, 0};
    auto gF = Kernel<Indexed<L>>{"gF", [flip, sector](const Indexed<L>& v) {
                                     Indexed<L> t{flip(v.base), v.comp};
                                     return Terms<Indexed<L>>{{t, 0.5 * sector(t.base)}};
                                 }, 0};
    return compose(gF, commutator(F, E));
}

inline Label flip_chirality(const Label& v) {
    Label w = v;
    w.chir = -v.chir;
    return w;
}

inline FockLabel flip_sector(const FockLabel& v) { return {v.k1, v.k2, -v.sec}; }

/// 1/2 Tr(gamma F [F,e]) on the doubled Fock space truncated at k1 + k2 <= cutoff.
inline double fock_index(double q, int cutoff, unsigned threads = 0) {
    auto g = fock_generators(q);
    auto e = idempotent_e(g, q);
    auto K = half_gamma_F_comm<FockLabel>(e, flip_sector, [](const FockLabel& v) { return double(v.sec); });
    auto B = ampliate(fock_basis(cutoff), 4);
    return weighted_trace<Indexed<FockLabel>>(nullptr, K, B, 0, threads).real();
}

/// Chiral index 1/2 Tr(gamma F [F,e]) over labels with l <= Lambda.
inline double chiral_index(double q, HalfInt Lambda, unsigned threads = 0) {
    if (Lambda.twice < 9) throw std::invalid_argument("chiral_index: requires Lambda >= 9/2");
    Params par(q);
    auto e = idempotent_e(generators(par), q);
    auto K = half_gamma_F_comm<Label>(e, flip_chirality, [](const Label& v) { return double(v.chir); });
    auto B = ampliate(basis(Space::chiral_both, level_cutoff(Space::chiral_both, Lambda)), 4);
    return weighted_trace<Indexed<Label>>(nullptr, K, B, 0, threads).real();
}

/// Generic term f_lj(q) of the index series.
inline double f_lj(double l, double j, double q) {
    auto P = [q](double x) { return std::pow(q, x); };
    const double r = (1 + q * q) / (1 - q * q);
    double num1 = (2 * j + 1) * (1 + P(4 * j + 2)) - r * (1 - P(4 * j + 2));
    double den = (1 - P(4 * l + 4)) * (1 - P(4 * l + 8)) * (1 - P(4 * j)) * (1 - P(4 * j + 4));
    double num2 = (l - j + 1) * (1 + P(4 * l + 6)) * (1 + P(4 * j + 2)) - r * q * q * (P(4 * j) - P(4 * l + 4));
    return std::pow(1 - q * q, 4) * num1 / den * P(2 * l - 1) * num2;
}

/// Partial sum of f_lj over l <= Lambda.
inline double index_series(double q, HalfInt Lambda) {
    double s = 0.0;
    for (int l2 = 1; l2 <= Lambda.twice; l2 += 2)
        for (int j2 = 1; j2 <= l2; j2 += 2) s += f_lj(0.5 * l2, 0.5 * j2, q);
    return s;
}

// ---------------------------------------------------------------------------
// Twisted pairing Tr(eta K1^-8 K2^-6 gamma F [F,e]^5)

/// Weight eta_c q^{-(2 m1 + 6 m2)} of a component label.
inline double twist_weight(const Indexed<Label>& v, double q) {
    static const int eta_pow[4] = {4, -2, 2, -4};
    return std::pow(q, eta_pow[v.comp] - 2 * v.base.m1.value() - 6 * v.base.m2.value());
}

struct PairingResult {
    double value = 0.0;
    double last_block = 0.0;  // |contribution| of the last l-block summed
    int blocks = 0;
};

namespace detail {
/// Tr(W D^5) on one l-block, D the block of e_+ - e_-.
inline double twisted_block(const Kernel<Indexed<Label>>& delta, HalfInt l, double q) {
    std::vector<Indexed<Label>> labs;
    for (const auto& v : irrep_labels(l, 1))
        for (int c = 0; c < 4; ++c) labs.push_back({v, c});
    TruncatedBasis<Indexed<Label>> B(std::move(labs), [](const Indexed<Label>&) { return 0; }, 0);
    SparseMatrix D = materialize(delta, B);
    SparseMatrix D2 = D * D;
    Eigen::SparseMatrix<cplx, Eigen::ColMajor> D2c = D2;
    const Eigen::Index n = D.rows();
    std::vector<cplx> acc(static_cast<std::size_t>(n), 0.0);
    std::vector<char> hit(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> touched;
    cplx total = 0.0;
    for (Eigen::Index v = 0; v < n; ++v) {
        // s = e_v^T D^2 D, then <s, D^2 e_v>
        touched.clear();
        for (SparseMatrix::InnerIterator a(D2, v); a; ++a)
            for (SparseMatrix::InnerIterator b(D, a.col()); b; ++b) {
                auto u = static_cast<std::size_t>(b.col());
                if (!hit[u]) {
                    hit[u] = 1;
                    touched.push_back(b.col());
                }
                acc[u] += a.value() * b.value();
            }
        cplx t = 0.0;
        for (Eigen::SparseMatrix<cplx, Eigen::ColMajor>::InnerIterator c(D2c, v); c; ++c)
            t += acc[static_cast<std::size_t>(c.row())] * c.value();
        for (auto u : touched) {
            acc[static_cast<std::size_t>(u)] = 0.0;
            hit[static_cast<std::size_t>(u)] = 0;
        }
        total += twist_weight(B[static_cast<std::size_t>(v)], q) * t;
    }
    return 2.0 * total.real();
}
}  // namespace detail

/// Sums l-blocks up to Lambda, stopping early once two consecutive blocks
/// contribute less than tol.  The factor 2 from the doubled space is included.
inline PairingResult twisted_pairing4(double q, HalfInt Lambda, double tol = 0.0) {
    Params par(q);
    auto e = idempotent_e(generators(par), q);
    auto delta = chirality_difference<Label>(e, flip_chirality);
    PairingResult r;
    int small = 0;
    for (int l2 = 1; l2 <= Lambda.twice; l2 += 2) {
        double c = detail::twisted_block(delta, HalfInt{l2}, q);
        r.value += c;
        r.last_block = std::abs(c);
        ++r.blocks;
        small = std::abs(c) < tol ? small + 1 : 0;
        if (tol > 0.0 && small >= 2) break;
    }
    return r;
}

/// Same pairing from lazy kernels on the doubled space; slow, for cross-checks.
inline double twisted_pairing4_direct(double q, HalfInt Lambda) {
    Params par(q);
    auto e = idempotent_e(generators(par), q);
    auto E = matrix_kernel(e, "e");
    Kernel<Indexed<Label>> F{"F", [](const Indexed<Label>& v) {
                                 return Terms<Indexed<Label>>{{{flip_chirality(v.base), v.comp}, 1.0}};
                             }, 0};
    auto C = commutator(F, E);
    Kernel<Indexed<Label>> P = C;
    for (int i = 0; i < 4; ++i) P = compose(C, P);
    Kernel<Indexed<Label>> gF{"gF", [](const Indexed<Label>& v) {
                                  Indexed<Label> t{flip_chirality(v.base), v.comp};
                                  return Terms<Indexed<Label>>{{t, double(t.base.chir)}};
                              }, 0};
    auto K = compose(gF, P);
    auto B = ampliate(basis(Space::chiral_both, level_cutoff(Space::chiral_both, Lambda)), 4);
    return weighted_trace<Indexed<Label>>([q](const Indexed<Label>& v) { return twist_weight(v, q); }, K, B)
        .real();
}

// ---------------------------------------------------------------------------
// Haar state

/// phi(x0^{2j} x1^k (x1^*)^k) = q^{2jk-4j-k} [3] [2j-1]!! [2k]!! / [2(j+k)+3]!!.
/// The exponent comes from the recursion
/// phi(x0^{2j} x1^k x1*^k) = q^{2k-2j-1} [2j-1]/[2k+2] phi(x0^{2j-2} x1^{k+1} x1*^{k+1}),
/// which is what twisted cyclicity and x1^* x1^{k+1} = x1^{k+1} x1^* + (q^{-4k}-q^4) x0^2 x1^k give.
inline double haar_formula(int j, int k, double q) {
    if (j < 0 || k < 0) throw std::invalid_argument("haar_formula: negative exponent");
    return std::pow(q, 2 * j * k - 4 * j - k) * qnum(3, q) * qdfact(2 * j - 1, q) * qdfact(2 * k, q) /
           qdfact(2 * (j + k) + 3, q);
}

/// q = 1 value 3 (2k)!! (2j-1)!! / (2j+2k+3)!!
inline double haar_classical(int j, int k) {
    auto df = [](int n) {
        double r = 1.0;
        for (int i = n; i >= 2; i -= 2) r *= i;
        return r;
    };
    return 3.0 * df(2 * k) * df(2 * j - 1) / df(2 * j + 2 * k + 3);
}

/// phi on x0^n0 x1^n1 (x1^*)^n2 x2^n3 from the formula, zero off the support.
inline double haar_monomial(int n0, int n1, int n2, int n3, double q) {
    if (n0 % 2 != 0 || n1 != n2 || n3 != 0) return 0.0;
    return haar_formula(n0 / 2, n1, q);
}

inline const Label& vacuum() {
    static const Label v{HalfInt{0}, HalfInt{0}, HalfInt{0}, HalfInt{0}, 0};
    return v;
}

/// <0|w|0> in the scalar representation.
inline cplx haar_gns(const AlgebraWord& w, double q) {
    auto g = generators(Params(q));
    return coefficient_of(evaluate_word(w, g, vacuum()), vacuum());
}

inline AlgebraWord haar_word(int n0, int n1, int n2, int n3) {
    Monomial m;
    for (int i = 0; i < n0; ++i) m.push_back({"x0", false});
    for (int i = 0; i < n1; ++i) m.push_back({"x1", false});
    for (int i = 0; i < n2; ++i) m.push_back({"x1", true});
    for (int i = 0; i < n3; ++i) m.push_back({"x2", false});
    return AlgebraWord::monomial(m);
}

// ---------------------------------------------------------------------------
// Zeta functions

/// sum over l <= Lambda of 2 (l+3/2)^-s dim V_l
inline double zeta4(double s, HalfInt Lambda) {
    if (!(s > 4.0)) throw std::invalid_argument("zeta4: requires s > 4");
    double r = 0.0;
    for (int l2 = Lambda.twice - (Lambda.is_integer() ? 1 : 0); l2 >= 1; l2 -= 2) {
        double l = 0.5 * l2;
        r += 2.0 * std::pow(l + 1.5, -s) * dim_chiral(l);
    }
    return r;
}

inline double zeta4_closed(double s) { return 4.0 / 3.0 * (zeta(s - 3) - zeta(s - 1)); }

/// Upper bound on the omitted tail, n = l + 3/2 > Lambda + 3/2.
inline double zeta4_tail_bound(double s, HalfInt Lambda) {
    double N = Lambda.value() + 1.5;
    return 4.0 / 3.0 * std::pow(N, 4.0 - s) / (s - 4.0);
}

/// Sum over both chiralities at l of 1 - <v|x2 x2^*|v>.  Grows like
/// 4 (l+1/2)(l+3/2)/(1-q^4), the residue at s = 3 of zeta_1 - zeta_{x2 x2^*}.
inline double x2x2star_defect(HalfInt l, double q) {
    Params par(q);
    auto g = generators(par);
    auto w = AlgebraWord::gen("x2") * AlgebraWord::gen("x2", true);
    double d = 0.0;
    for (int c : {1, -1})
        for (const auto& v : irrep_labels(l, c)) d += 1.0 - coefficient_of(evaluate_word(w, g, v), v).real();
    return d;
}

/// Partial sum over l <= Lambda of (l+3/2)^-s <v|x2 x2^*|v> on H_+ ⊕ H_-.
inline double zeta_x2x2star(double s, double q, HalfInt Lambda) {
    double r = 0.0;
    for (int l2 = 1; l2 <= Lambda.twice; l2 += 2) {
        double l = 0.5 * l2;
        r += std::pow(l + 1.5, -s) * (2.0 * dim_chiral(l) - x2x2star_defect(HalfInt{l2}, q));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Real structure

/// J|l,m1,m2;j> = i^{2l+1} (-1)^{j+m1} |l,-m1,-m2;j>
inline AntiKernel<Label> real_structure_J4() {
    return {"J", [](const Label& v) {
                int n = v.l.twice + 1;  // 2l+1, even on the chiral spaces
                cplx ph = std::pow(cplx(0, 1), n);
                ph *= parity_sign(v.j.twice + v.m1.twice);
                Label t{v.l, -v.m1, -v.m2, v.j, v.chir};
                return std::pair<Label, cplx>{t, ph};
            }};
}

/// sup over interior labels of |coef [a, J b J^-1]| / q^{2j}.
inline double weak_real_decay4(const std::string& a, const std::string& b, double q, HalfInt Lambda,
                               int margin = 2) {
    auto g = generators(Params(q));
    auto J = real_structure_J4();
    auto A = lookup(g, Letter{a.back() == '*' ? a.substr(0, a.size() - 1) : a, a.back() == '*'});
    auto Bk = lookup(g, Letter{b.back() == '*' ? b.substr(0, b.size() - 1) : b, b.back() == '*'});
    auto K = commutator(A, conjugate_by(J, Bk));
    auto B = basis(Space::chiral_plus, level_cutoff(Space::chiral_plus, Lambda));
    return sup_decay_ratio<Label>(K, B.interior(margin), [q](const Label& v) { return std::pow(q, v.j.twice); });
}

/// f(l,1/2,l) = ± <l+1,m1,l;1/2|[x2, J x2 J]|l,m1,l;1/2>_±, taken on H_+ with m1 = 1/2.
inline double f_real_numeric(HalfInt l, double q) {
    auto g = generators(Params(q));
    auto J = real_structure_J4();
    const auto& x2 = g.at("x2");
    Kernel<Label> JxJ{"Jx2J", [J, x2](const Label& v) { return J.apply(x2.apply(J.apply({{v, 1.0}}))); }, 1};
    auto K = commutator(x2, JxJ);
    Label v{l, HalfInt{1}, l, HalfInt{1}, 1};
    Label t{l + HalfInt::from_int(1), HalfInt{1}, l, HalfInt{1}, 1};
    return coefficient_of(K(v), t).real();
}

/// Closed form of f(l,1/2,l), from the four D^+ D^0 products at j = 1/2, m2 = l.
inline double f_real_closed(double l, double q) {
    auto b = [q](double x) { return qnum(x, q); };
    return -std::pow(q, -l - 4) * std::pow(1 - q * q, 2) * b(2) * b(l + 2) * b(l + 3) *
           std::sqrt(b(3) * b(2 * l + 1)) / (b(2 * l + 4) * b(2 * l + 4) * b(2 * l + 6));
}

}  // namespace qsph::s4q

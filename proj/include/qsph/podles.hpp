/**
 * @file podles.hpp
 * @brief Podles spheres: equivariant representations on H_N, Dirac operator,
 * Fredholm index, twisted q-index, zeta partial sums and the real structure.
 */
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsph/opalg.hpp"
#include "qsph/qcore.hpp"

namespace qsph::podles {

struct Params {
    double q;
    double s;
    HalfInt N;

    Params(double q_, double s_, HalfInt N_) : q(check_q(q_)), s(s_), N(N_) {
        if (!(s_ >= 0.0 && s_ <= 1.0)) throw std::invalid_argument("s must lie in [0,1]");
    }
    double t() const { return 1.0 - s * s; }
    double absN() const { return 0.5 * std::abs(N.twice); }
};

/// |l,m;sec N> with sec = +1 or -1.  For N = 0 only sec = +1 is used.
struct Label {
    int l2 = 0;
    int m2 = 0;
    int sec = 1;
    auto operator<=>(const Label&) const = default;
    bool operator==(const Label&) const = default;
    std::size_t hash() const {
        return hash_mix(hash_mix(std::hash<int>{}(l2), std::hash<int>{}(m2)), std::hash<int>{}(sec));
    }
    double l() const { return 0.5 * l2; }
    double m() const { return 0.5 * m2; }
};

inline bool admissible(const Label& v, const Params& p) {
    int n2 = std::abs(p.N.twice);
    if (v.l2 < n2 || (v.l2 - n2) % 2 != 0) return false;
    if (std::abs(v.m2) > v.l2 || (v.l2 - v.m2) % 2 != 0) return false;
    if (v.sec != 1 && v.sec != -1) return false;
    if (p.N.twice == 0 && v.sec != 1) return false;
    return true;
}

/// Governing level l - |N|.
inline int level(const Label& v, const Params& p) { return (v.l2 - std::abs(p.N.twice)) / 2; }

/// sqrt with a runtime check that the radicand is not genuinely negative.
inline double root(double x) {
    if (x < -1e-9) throw std::domain_error("negative radicand " + std::to_string(x));
    return x > 0.0 ? std::sqrt(x) : 0.0;
}

// ---------------------------------------------------------------------------
// Coefficients.  Nv is the signed value of N seen by the sector.

inline double alpha_nl(double Nv, double l, const Params& p) {
    const double q = p.q, s2 = p.s * p.s;
    if (l <= std::abs(Nv) + 1e-12) return 0.0;
    auto b = [q](double x) { return qnum(x, q); };
    double r1 = b(2) * b(l + Nv) * b(l - Nv) / (b(2 * l - 1) * b(2 * l + 1));
    double r2 = (std::pow(q, l + Nv) + std::pow(q, -(l + Nv)) * s2) *
                (std::pow(q, l - Nv) * s2 + std::pow(q, -(l - Nv)));
    return root(r1) * root(r2) / b(2 * l);
}

inline double beta_nl(double Nv, double l, const Params& p) {
    const double q = p.q, s2 = p.s * p.s;
    auto b = [q](double x) { return qnum(x, q); };
    double num = (b(2 * l) - std::pow(q, l + Nv + 1) * b(2) * b(l - Nv)) * (1 - s2) + q * b(2) * b(2 * Nv) * s2;
    return num / (q * q * b(2 * l) * b(2 * l + 2));
}

/// alpha_N(l) in the second normalization ([2l-1]^{1/2}[2l]^{1/2} alpha_{N,l}).
inline double alpha(HalfInt l, const Params& p) {
    const double L = l.value(), Nv = p.N.value(), q = p.q, t = p.t();
    if (l.twice < std::abs(p.N.twice)) throw std::invalid_argument("alpha: l < |N|");
    if (l.twice == std::abs(p.N.twice)) return 0.0;
    auto b = [q](double x) { return qnum(x, q); };
    double r1 = b(2) * b(L + Nv) * b(L - Nv) * b(2 * L) / b(2 * L + 1);
    double r2 = (1 - t) / (b(L) * b(L)) +
                std::pow(q, -2 * Nv) * std::pow(t - 1 + std::pow(q, 2 * Nv), 2) / (b(2 * L) * b(2 * L));
    return root(r1) * root(r2);
}

inline double beta(HalfInt l, const Params& p) {
    const double L = l.value(), Nv = p.N.value(), q = p.q, t = p.t();
    if (l.twice < std::abs(p.N.twice)) throw std::invalid_argument("beta: l < |N|");
    auto b = [q](double x) { return qnum(x, q); };
    const double aN = std::abs(Nv);
    const int sgn = p.N.twice < 0 ? -1 : 1;
    return (b(2 * Nv) * (b(2) - std::pow(q, sgn) * t) + t * (1 / q - q) * b(L - aN) * b(L + aN + 1)) /
           (q * b(2 * L + 2));
}

struct Coefficients {
    const Params& p;
    double Nv;

    double b(double x) const { return qnum(x, p.q); }
    double Ap(double l, double m) const {
        return std::pow(p.q, m) * root(b(2) * b(l - m + 1) * b(l + m + 1)) * alpha_nl(Nv, l + 1, p);
    }
    double A0(double l, double m) const {
        // 0/0 at l = 0 (only for N = 0); the numerator factor vanishes there
        if (l == 0.0) return 0.0;
        return (b(2 * l) - std::pow(p.q, l + m + 1) * b(2) * b(l - m)) * beta_nl(Nv, l, p);
    }
    double Bp(double l, double m) const {
        return std::pow(p.q, -l + m) * root(b(l + m + 1) * b(l + m + 2)) * alpha_nl(Nv, l + 1, p);
    }
    double B0(double l, double m) const {
        if (l == 0.0) return 0.0;
        return -std::pow(p.q, m + 2) * root(b(2) * b(l - m) * b(l + m + 1)) * beta_nl(Nv, l, p);
    }
    double Bm(double l, double m) const {
        return -std::pow(p.q, l + m + 1) * root(b(l - m) * b(l - m - 1)) * alpha_nl(Nv, l, p);
    }
};

// ---------------------------------------------------------------------------
// Kernels

namespace detail {
/// Adds a term if the target is admissible; a nonzero coefficient on an
/// inadmissible target is a bug in the formulas and throws.
inline void emit(Terms<Label>& out, const Params& p, Label t, double c) {
    if (!admissible(t, p)) {
        if (std::abs(c) > 1e-12) throw std::logic_error("nonzero coefficient on inadmissible label");
        return;
    }
    if (c != 0.0) out.emplace_back(t, c);
}
}  // namespace detail

enum class Gen { x1, x0, xm1, A, B, Bstar };

inline Kernel<Label> generator_kernel(Gen g, const Params& p, double perturb = 0.0) {
    const double q = p.q;
    const double t = p.t();
    const double q2 = qnum(2, q);
    std::string name[] = {"x1", "x0", "xm1", "A", "B", "B*"};
    auto fn = [g, p, q, t, q2, perturb](const Label& v) {
        Terms<Label> out;
        if (!admissible(v, p)) return out;
        Coefficients C{p, v.sec * p.N.value()};
        const double l = v.l(), m = v.m();
        const int L = v.l2, M = v.m2;
        using detail::emit;
        switch (g) {
            case Gen::x1:
            case Gen::B: {
                double f = g == Gen::x1 ? 1.0 : 1.0 / std::sqrt(q * q2);
                emit(out, p, {L + 2, M + 2, v.sec}, f * C.Bp(l, m) * (1.0 + perturb));
                emit(out, p, {L, M + 2, v.sec}, f * C.B0(l, m));
                emit(out, p, {L - 2, M + 2, v.sec}, f * C.Bm(l, m));
                break;
            }
            case Gen::xm1:
            case Gen::Bstar: {
                // -q x_{-1} = x_1^*
                double f = g == Gen::xm1 ? -1.0 / q : 1.0 / std::sqrt(q * q2);
                emit(out, p, {L + 2, M - 2, v.sec}, f * C.Bm(l + 1, m - 1));
                emit(out, p, {L, M - 2, v.sec}, f * C.B0(l, m - 1));
                emit(out, p, {L - 2, M - 2, v.sec}, f * C.Bp(l - 1, m - 1));
                break;
            }
            case Gen::x0: {
                emit(out, p, {L + 2, M, v.sec}, C.Ap(l, m));
                emit(out, p, {L, M, v.sec}, C.A0(l, m));
                emit(out, p, {L - 2, M, v.sec}, C.Ap(l - 1, m));
                break;
            }
            case Gen::A: {
                // A = (t - x0) / (q[2])
                double f = -1.0 / (q * q2);
                emit(out, p, {L + 2, M, v.sec}, f * C.Ap(l, m));
                emit(out, p, {L, M, v.sec}, f * C.A0(l, m) + t / (q * q2));
                emit(out, p, {L - 2, M, v.sec}, f * C.Ap(l - 1, m));
                break;
            }
        }
        return merge_terms(std::move(out));
    };
    return {name[static_cast<int>(g)], fn, 1};
}

/// Named generators for word evaluation: x1, x0, xm1, A, B and their stars.
inline GeneratorMap<Label> generators(const Params& p, double perturb = 0.0) {
    GeneratorMap<Label> g;
    g["x1"] = generator_kernel(Gen::x1, p, perturb);
    g["x0"] = generator_kernel(Gen::x0, p);
    g["xm1"] = generator_kernel(Gen::xm1, p);
    g["A"] = generator_kernel(Gen::A, p);
    g["B"] = generator_kernel(Gen::B, p, perturb);
    g["B*"] = generator_kernel(Gen::Bstar, p);
    g["A*"] = g["A"];
    g["x0*"] = g["x0"];
    g["x1*"] = scale<Label>(-p.q, g["xm1"]);
    g["xm1*"] = scale<Label>(-1.0 / p.q, g["x1"]);
    return g;
}

enum class Hopf { K, Kinv, E, F };

inline Kernel<Label> uqsu2_kernel(Hopf h, const Params& p) {
    const double q = p.q;
    auto fn = [h, p, q](const Label& v) {
        Terms<Label> out;
        if (!admissible(v, p)) return out;
        const double l = v.l(), m = v.m();
        auto b = [q](double x) { return qnum(x, q); };
        switch (h) {
            case Hopf::K: out.emplace_back(v, std::pow(q, m)); break;
            case Hopf::Kinv: out.emplace_back(v, std::pow(q, -m)); break;
            case Hopf::E: detail::emit(out, p, {v.l2, v.m2 + 2, v.sec}, root(b(l - m) * b(l + m + 1))); break;
            case Hopf::F: detail::emit(out, p, {v.l2, v.m2 - 2, v.sec}, root(b(l + m) * b(l - m + 1))); break;
        }
        return out;
    };
    const char* names[] = {"K", "K^-1", "E", "F"};
    return {names[static_cast<int>(h)], fn, 0};
}

/// Defining relations in the x-generators.
inline std::vector<AlgebraWord> relations_x(const Params& p) {
    using W = AlgebraWord;
    const double q = p.q, t = p.t(), q2 = qnum(2, q);
    auto x1 = W::gen("x1"), x0 = W::gen("x0"), xm = W::gen("xm1"), one = W::unit();
    return {
        x1 * x0 - (1 / (q * q)) * (x0 * x1) - (t * (1 - 1 / (q * q))) * x1,
        xm * x0 - (q * q) * (x0 * xm) - (t * (1 - q * q)) * xm,
        (-q2) * (xm * x1) + ((q * q) * x0 + t * one) * (x0 - t * one) - (q2 * q2 * (1 - t)) * one,
        (-q2) * (x1 * xm) + ((1 / (q * q)) * x0 + t * one) * (x0 - t * one) - (q2 * q2 * (1 - t)) * one,
    };
}

/// Defining relations in the A, B generators.
inline std::vector<AlgebraWord> relations_AB(const Params& p) {
    using W = AlgebraWord;
    const double q = p.q, s2 = p.s * p.s;
    auto A = W::gen("A"), B = W::gen("B"), Bs = W::gen("B", true), one = W::unit();
    return {
        A * B - (q * q) * (B * A),
        B * Bs + (A + s2 * one) * (A - one),
        Bs * B + ((q * q) * A + s2 * one) * ((q * q) * A - one),
    };
}

/// Crossed-product relations KB=qBK, KA=AK, EB=q^{-1}BE, EA=AE-q^{-1/2}BK.
inline std::vector<AlgebraWord> crossed_relations(const Params& p) {
    using W = AlgebraWord;
    const double q = p.q;
    auto K = W::gen("K"), E = W::gen("E"), A = W::gen("A"), B = W::gen("B");
    return {K * B - q * (B * K), K * A - A * K, E * B - (1 / q) * (B * E),
            E * A - A * E + std::pow(q, -0.5) * (B * K)};
}

inline GeneratorMap<Label> crossed_generators(const Params& p) {
    auto g = generators(p);
    g["K"] = uqsu2_kernel(Hopf::K, p);
    g["E"] = uqsu2_kernel(Hopf::E, p);
    g["F"] = uqsu2_kernel(Hopf::F, p);
    return g;
}

/// All admissible labels with l - |N| <= cutoff.  Both sectors when N != 0.
inline TruncatedBasis<Label> basis(const Params& p, int cutoff) {
    std::vector<Label> labs;
    const int n2 = std::abs(p.N.twice);
    std::vector<int> secs = p.N.twice == 0 ? std::vector<int>{1} : std::vector<int>{-1, 1};
    for (int k = 0; k <= cutoff; ++k) {
        int l2 = n2 + 2 * k;
        for (int m2 = -l2; m2 <= l2; m2 += 2)
            for (int s : secs) labs.push_back({l2, m2, s});
    }
    return TruncatedBasis<Label>(std::move(labs), [p](const Label& v) { return level(v, p); }, cutoff);
}

// ---------------------------------------------------------------------------
// Spectral data

inline void require_spinor(const Params& p) {
    if (p.N.twice == 0) throw std::invalid_argument("spinor constructions require N != 0");
}

/// D|l,m;±N> = (l-|N|+1)|l,m;∓N>
inline Kernel<Label> dirac(const Params& p) {
    require_spinor(p);
    return {"D",
            [p](const Label& v) {
                return Terms<Label>{{Label{v.l2, v.m2, -v.sec}, double(level(v, p) + 1)}};
            },
            0};
}

inline Kernel<Label> sign_F(const Params& p) {
    require_spinor(p);
    return {"F", [](const Label& v) { return Terms<Label>{{Label{v.l2, v.m2, -v.sec}, 1.0}}; }, 0};
}

/// gamma = +1 on H_{-N}, -1 on H_N.
inline Kernel<Label> grading(const Params& p) {
    require_spinor(p);
    return diagonal_kernel<Label>("gamma", [](const Label& v) { return cplx(v.sec == -1 ? 1.0 : -1.0); });
}

/// Multiplicity of the |D| eigenvalue n+1 from the label count.
inline long multiplicity(const Params& p, int n) {
    const int l2 = std::abs(p.N.twice) + 2 * n;
    return 2L * (l2 + 1);
}

/// e_s = (1+s^2)^{-1} [[s^2+A, qB], [q^{-1}B^*, 1-q^2A]]
inline KernelMatrix<Label> idempotent_es(const Params& p) {
    const double q = p.q, s2 = p.s * p.s, c = 1.0 / (1.0 + s2);
    auto g = generators(p);
    auto one = identity_kernel<Label>();
    return {{linear_combination<Label>({{c * s2, one}, {c, g["A"]}}), scale<Label>(c * q, g["B"])},
            {scale<Label>(c / q, g["B*"]), linear_combination<Label>({{c, one}, {-c * q * q, g["A"]}})}};
}

/// max |coefficient| of e^2 - e on interior labels of H ⊗ C^2.
inline double idempotent_defect(const Params& p, int cutoff) {
    auto e = matrix_kernel(idempotent_es(p), "e");
    auto d = linear_combination<Indexed<Label>>({{1.0, compose(e, e)}, {-1.0, e}});
    auto B = ampliate(basis(p, cutoff), 2);
    double r = 0.0;
    for (const auto& v : B.interior(2)) r = std::max(r, max_abs(d(v)));
    return r;
}

inline constexpr int index_margin = 3;

/// ½ Tr_{H⊗C²}(γF[F,e_s]) over interior labels.
inline double fredholm_index(const Params& p, int cutoff) {
    require_spinor(p);
    auto e = matrix_kernel(idempotent_es(p), "e");
    auto F = ampliate(sign_F(p));
    auto gF = ampliate(compose(grading(p), sign_F(p)));
    auto T = compose(gF, commutator(F, e));
    auto B = ampliate(basis(p, cutoff), 2);
    return 0.5 * weighted_trace<Indexed<Label>>(nullptr, T, B, index_margin).real();
}

/// ½ Tr_H(γF[F,a]) for a word in the generators.
inline double chern0(const AlgebraWord& a, const Params& p, int cutoff) {
    require_spinor(p);
    auto g = generators(p);
    auto ak = word_kernel(a, g);
    auto T = compose(compose(grading(p), sign_F(p)), commutator(sign_F(p), ak));
    return 0.5 * weighted_trace<Label>(nullptr, T, basis(p, cutoff), std::max(index_margin, ak.radius)).real();
}

/// Series (q^{-2}-1)[2N] Σ_{l,m} ([2l]-q^{l+m+1}[2][l-m])/([2l][2l+2]) truncated at level cutoff.
inline double index_series(const Params& p, int cutoff) {
    const double q = p.q;
    auto b = [q](double x) { return qnum(x, q); };
    double sum = 0.0;
    const int n2 = std::abs(p.N.twice);
    for (int k = 0; k <= cutoff; ++k) {
        double l = 0.5 * (n2 + 2 * k);
        for (double m = -l; m <= l + 1e-9; m += 1.0)
            sum += (b(2 * l) - std::pow(q, l + m + 1) * b(2) * b(l - m)) / (b(2 * l) * b(2 * l + 2));
    }
    return (1 / (q * q) - 1) * b(p.N.twice) * sum;
}

/// -½ Tr_{H⊗C²}(K^{-2} η γ F [F,e_s]^3) with η = diag(q, q^{-1}).
inline double twisted_q_index(const Params& p, int cutoff) {
    require_spinor(p);
    const double q = p.q;
    auto e = matrix_kernel(idempotent_es(p), "e");
    auto F = ampliate(sign_F(p));
    auto c = commutator(F, e);
    auto gF = ampliate(compose(grading(p), sign_F(p)));
    auto T = compose(gF, compose(c, compose(c, c)));
    auto w = [q](const Indexed<Label>& v) { return std::pow(q, -v.base.m2) * (v.comp == 0 ? q : 1 / q); };
    auto B = ampliate(basis(p, cutoff), 2);
    return -0.5 * weighted_trace<Indexed<Label>>(w, T, B, index_margin).real();
}

/// Tr_{C²}(η γ_s) on the constant part; the A-dependence cancels since
/// η_00 - q^2 η_11 = 0.
inline double trace_eta_gamma_s(const Params& p) {
    const double q = p.q, s2 = p.s * p.s;
    // 2e_s - 1 restricted to scalars: diag((2s^2 - 1 - s^2)/(1+s^2), (2 - 1 - s^2)/(1+s^2))
    return q * (s2 - 1) / (1 + s2) + (1 / q) * (1 - s2) / (1 + s2);
}

// ---------------------------------------------------------------------------
// Zeta functions

/// Σ over labels with level <= cutoff of weight(v) |D|^{-s}.  A null weight
/// means the identity and uses the multiplicity count.
inline double zeta_partial(const std::function<double(const Label&)>& weight, double s, const Params& p,
                           int cutoff) {
    require_spinor(p);
    if (!weight) {
        double sum = 0.0;
        for (int n = cutoff; n >= 0; --n) sum += double(multiplicity(p, n)) * std::pow(n + 1.0, -s);
        return sum;
    }
    double sum = 0.0;
    for (const auto& v : basis(p, cutoff).labels()) sum += weight(v) * std::pow(level(v, p) + 1.0, -s);
    return sum;
}

/// 4ζ(s-1) + (4|N|-2)ζ(s)
inline double zeta_closed_form(double s, const Params& p) {
    if (!(s > 2.0)) throw std::invalid_argument("zeta_closed_form requires s > 2");
    return 4 * zeta(s - 1) + (4 * p.absN() - 2) * zeta(s);
}

/// Upper bound on the omitted tail Σ_{k>K+1} (4k+4|N|-2) k^{-s} of the unit partial sum.
inline double zeta_tail_bound(double s, const Params& p, int cutoff) {
    const double K = cutoff + 1.0;
    return 4 * std::pow(K, 2 - s) / (s - 2) + std::abs(4 * p.absN() - 2) * std::pow(K, 1 - s) / (s - 1);
}

/// (2/π)∫σ_s(a)dθ = 4 × (u^0 Fourier coefficient of σ_s(a)).
/// σ_s(A)=0, σ_s(B)=su, σ(x0)=t, σ(x1)=√(q[2]) s u, σ(xm1) = -q^{-1}√(q[2]) s u^{-1}.
inline double top_residue(const AlgebraWord& a, const Params& p) {
    const double q = p.q, s = p.s, t = p.t(), r = std::sqrt(q * qnum(2, q));
    double total = 0.0;
    for (const auto& [mono, c] : a.terms()) {
        cplx val = c;
        int upow = 0;
        for (const auto& L : mono) {
            const std::string k = L.key();
            if (k == "A" || k == "A*") val = 0.0;
            else if (k == "B") { val *= s; ++upow; }
            else if (k == "B*") { val *= s; --upow; }
            else if (k == "x0" || k == "x0*") val *= t;
            else if (k == "x1") { val *= r * s; ++upow; }
            else if (k == "x1*") { val *= r * s; --upow; }
            else if (k == "xm1") { val *= -r * s / q; --upow; }
            else if (k == "xm1*") { val *= -r * s / q; ++upow; }
            else throw std::invalid_argument("unknown generator in symbol map: " + k);
        }
        if (upow == 0) total += val.real();
    }
    return 4.0 * total;
}

// ---------------------------------------------------------------------------
// Real structure

/// J|l,m;±N> = (-1)^{m+N}|l,-m;∓N>, antilinear.
inline AntiKernel<Label> real_structure_J(const Params& p) {
    require_spinor(p);
    return {"J", [p](const Label& v) {
                int e2 = v.m2 + p.N.twice;
                return std::pair<Label, cplx>{Label{v.l2, -v.m2, -v.sec}, double(parity_sign(e2))};
            }};
}

/// sup over interior labels of the coefficients of [a, J b^* J^{-1}] and
/// [[D,a], J b^* J^{-1}] divided by q^l.
inline double weak_real_decay(const std::string& a, const std::string& b, const Params& p, int cutoff) {
    require_spinor(p);
    auto g = generators(p);
    auto J = real_structure_J(p);
    auto jb = conjugate_by(J, lookup(g, Letter{b, true}));
    auto ak = lookup(g, Letter{a, false});
    auto c1 = commutator(ak, jb);
    auto c2 = commutator(commutator(dirac(p), ak), jb);
    auto labs = basis(p, cutoff).interior(2);
    std::function<double(const Label&)> rate = [q = p.q](const Label& v) { return std::pow(q, v.l()); };
    return std::max(sup_decay_ratio(c1, labs, rate), sup_decay_ratio(c2, labs, rate));
}

// ---------------------------------------------------------------------------
// Left regular representation at N = 0 (A, B generators)

inline Kernel<Label> left_regular(Gen g, const Params& p) {
    if (p.N.twice != 0) throw std::invalid_argument("left regular representation needs N = 0");
    if (g != Gen::A && g != Gen::B) throw std::invalid_argument("left regular: only A and B");
    const double q = p.q, s2 = p.s * p.s, t = p.t();
    auto b = [q](double x) { return qnum(x, q); };
    // [l]/[2l] = 1/(q^l + q^-l)
    auto ratio = [q](double l) { return 1.0 / (std::pow(q, l) + std::pow(q, -l)); };
    auto Ap = [=](double l, double m) {
        return -std::pow(q, m - 1) * root(b(2 * l + 2) * b(2 * l + 2) * s2 + b(l + 1) * b(l + 1) * t * t) /
               b(2 * l + 2) * root(b(l + m + 1) * b(l - m + 1) / (b(2 * l + 1) * b(2 * l + 3)));
    };
    auto A0 = [=](double l, double m) {
        return t / q * (1 + std::pow(q, 2 * m)) * ratio(l) * b(l + 1) / b(2 * l + 2);
    };
    auto Bp = [=](double l, double m) {
        return std::pow(q, -(l - m) - 0.5) * root(b(2 * l + 2) * b(2 * l + 2) * s2 + b(l + 1) * b(l + 1) * t * t) /
               b(2 * l + 2) * root(b(l + m + 1) * b(l + m + 2) / (b(2 * l + 1) * b(2 * l + 3)));
    };
    auto B0 = [=](double l, double m) {
        return -t * (1 - q * q) * std::pow(q, m - 0.5) * ratio(l) * b(l + 1) / b(2 * l + 2) *
               root(b(l - m) * b(l + m + 1));
    };
    auto Bm = [=](double l, double m) {
        if (l == 0.0) return 0.0;
        return -std::pow(q, l + m + 0.5) * root(b(2 * l) * b(2 * l) * s2 + b(l) * b(l) * t * t) / b(2 * l) *
               root(b(l - m) * b(l - m - 1) / (b(2 * l - 1) * b(2 * l + 1)));
    };
    return {g == Gen::A ? "A_left" : "B_left",
            [=](const Label& v) {
                Terms<Label> out;
                if (!admissible(v, p)) return out;
                const double l = v.l(), m = v.m();
                if (g == Gen::A) {
                    detail::emit(out, p, {v.l2 + 2, v.m2, 1}, Ap(l, m));
                    detail::emit(out, p, {v.l2, v.m2, 1}, A0(l, m));
                    if (v.l2 >= 2) detail::emit(out, p, {v.l2 - 2, v.m2, 1}, Ap(l - 1, m));
                } else {
                    detail::emit(out, p, {v.l2 + 2, v.m2 + 2, 1}, Bp(l, m));
                    detail::emit(out, p, {v.l2, v.m2 + 2, 1}, B0(l, m));
                    detail::emit(out, p, {v.l2 - 2, v.m2 + 2, 1}, Bm(l, m));
                }
                return merge_terms(std::move(out));
            },
            1};
}

/// Max deviation between the N = 0 crossed representation (A, B) and the left
/// regular representation, over interior labels.
inline double scalar_consistency(const Params& p, int cutoff) {
    if (p.N.twice != 0) throw std::invalid_argument("scalar_consistency needs N = 0");
    auto labs = basis(p, cutoff).interior(1);
    double r = 0.0;
    for (Gen g : {Gen::A, Gen::B}) {
        auto k1 = generator_kernel(g, p);
        auto k2 = left_regular(g, p);
        for (const auto& v : labs) {
            Terms<Label> d = k1(v);
            for (auto [t, c] : k2(v)) d.emplace_back(t, -c);
            r = std::max(r, max_abs(merge_terms(std::move(d))));
        }
    }
    return r;
}

}  // namespace qsph::podles

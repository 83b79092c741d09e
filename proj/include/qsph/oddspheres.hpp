/**
 * @file oddspheres.hpp
 * @brief Odd quantum spheres S^{2l+1}_q: Gelfand-Tsetlin labels, the left
 * regular representation, the optimal Dirac operator, the symbol map and the
 * noncommutative integral.
 */
#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsph/opalg.hpp"
#include "qsph/qcore.hpp"

namespace qsph::odd {

// ---------------------------------------------------------------------------
// GT tableaux

/// Triangular array r_{i,j}, 1 <= i <= ell+1, 1 <= j <= ell+2-i, stored row by row.
struct Tableau {
    int ell = 0;
    std::vector<int> v;

    Tableau() = default;
    explicit Tableau(int ell_) : ell(ell_), v(static_cast<std::size_t>((ell_ + 1) * (ell_ + 2) / 2), 0) {}

    int row_length(int i) const { return ell + 2 - i; }
    int offset(int i) const { return (i - 1) * (ell + 2) - (i - 1) * i / 2; }
    bool in_range(int i, int j) const { return i >= 1 && i <= ell + 1 && j >= 1 && j <= row_length(i); }

    /// 0 out of range.
    int at(int i, int j) const { return in_range(i, j) ? v[static_cast<std::size_t>(offset(i) + j - 1)] : 0; }
    int& ref(int i, int j) { return v[static_cast<std::size_t>(offset(i) + j - 1)]; }

    std::vector<std::vector<int>> rows() const {
        std::vector<std::vector<int>> out;
        for (int i = 1; i <= ell + 1; ++i) {
            std::vector<int> r;
            for (int j = 1; j <= row_length(i); ++j) r.push_back(at(i, j));
            out.push_back(std::move(r));
        }
        return out;
    }

    /// Betweenness plus r_{1,ell+1} = 0.
    bool valid() const {
        if (at(1, ell + 1) != 0) return false;
        for (int i = 1; i <= ell; ++i)
            for (int j = 1; j <= row_length(i + 1); ++j)
                if (at(i, j) < at(i + 1, j) || at(i + 1, j) < at(i, j + 1)) return false;
        return true;
    }

    auto operator<=>(const Tableau&) const = default;
    bool operator==(const Tableau&) const = default;
};

/// |n,h;r>
struct OddLabel {
    int n = 0, h = 0;
    Tableau r;
    auto operator<=>(const OddLabel&) const = default;
    bool operator==(const OddLabel&) const = default;
    std::size_t hash() const {
        std::size_t s = hash_mix(std::hash<int>{}(n), std::hash<int>{}(h));
        for (int x : r.v) s = hash_mix(s, std::hash<int>{}(x));
        return s;
    }
};

inline int level(const OddLabel& v) { return v.n + v.h; }

/// All tableaux with top row (n+h, h, ..., h, 0).
inline std::vector<Tableau> tableaux(int ell, int n, int h) {
    if (ell < 1) throw std::invalid_argument("tableaux: ell must be positive");
    if (n < 0 || h < 0) throw std::invalid_argument("tableaux: negative n or h");
    std::vector<Tableau> out;
    Tableau t(ell);
    t.ref(1, 1) = n + h;
    for (int j = 2; j <= ell; ++j) t.ref(1, j) = h;
    // fill row i entry j between r_{i-1,j+1} and r_{i-1,j}
    std::function<void(int, int)> fill = [&](int i, int j) {
        if (i > ell + 1) {
            out.push_back(t);
            return;
        }
        if (j > t.row_length(i)) {
            fill(i + 1, 1);
            return;
        }
        for (int x = t.at(i - 1, j + 1); x <= t.at(i - 1, j); ++x) {
            t.ref(i, j) = x;
            fill(i, j + 1);
        }
    };
    fill(2, 1);
    return out;
}

inline std::int64_t count_tableaux(int ell, int n, int h) {
    return static_cast<std::int64_t>(tableaux(ell, n, h).size());
}

inline TruncatedBasis<OddLabel> enumerate_labels(int ell, int Lambda) {
    if (ell < 2) throw std::invalid_argument("enumerate_labels: ell must be at least 2");
    if (Lambda < 0) throw std::invalid_argument("enumerate_labels: negative cutoff");
    std::vector<OddLabel> labs;
    for (int s = 0; s <= Lambda; ++s)
        for (int n = 0; n <= s; ++n)
            for (auto& t : tableaux(ell, n, s - n)) labs.push_back({n, s - n, std::move(t)});
    return TruncatedBasis<OddLabel>(std::move(labs), [](const OddLabel& v) { return level(v); }, Lambda);
}

// ---------------------------------------------------------------------------
// Exact combinatorics

struct Rational {
    std::int64_t num = 0, den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
        if (d == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) num = -num, den = -den;
        std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) num /= g, den /= g;
    }
    friend Rational operator+(Rational a, Rational b) {
        std::int64_t g = std::gcd(a.den, b.den);
        return {a.num * (b.den / g) + b.num * (a.den / g), a.den / g * b.den};
    }
    friend Rational operator-(Rational a, Rational b) { return a + Rational(-b.num, b.den); }
    friend Rational operator*(Rational a, Rational b) { return {a.num * b.num, a.den * b.den}; }
    friend bool operator==(Rational, Rational) = default;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }
};

inline std::int64_t factorial(int n) {
    std::int64_t r = 1;
    for (int k = 2; k <= n; ++k) r *= k;
    return r;
}

/// Dimension of the SU(len+1) irrep with Young tableau young.
inline std::int64_t weyl_dim(const std::vector<int>& young) {
    const int m = static_cast<int>(young.size());
    std::vector<int> lam(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) lam[static_cast<std::size_t>(i)] = young[static_cast<std::size_t>(i)] - (i + 1 < m ? young[static_cast<std::size_t>(i + 1)] : 0);
    __int128 num = 1, den = 1;
    for (int j = 1; j <= m; ++j)
        for (int k = j; k <= m; ++k) {
            int s = k - j + 1;
            for (int i = j; i <= k; ++i) s += lam[static_cast<std::size_t>(i - 1)];
            num *= s;
        }
    for (int k = 1; k <= m; ++k) den *= factorial(k);
    if (num % den != 0) throw std::logic_error("weyl_dim: non-integral dimension");
    return static_cast<std::int64_t>(num / den);
}

/// Weyl dimension of (n+h, h, ..., h), ell entries.
inline std::int64_t weyl_dim_nh(int ell, int n, int h) {
    std::vector<int> y(static_cast<std::size_t>(ell), h);
    y[0] = n + h;
    return weyl_dim(y);
}

/// Multiplicity of the |D| eigenvalue k = n+h+1, by counting labels.
inline std::int64_t multiplicity(int ell, int k) {
    if (k < 1) throw std::invalid_argument("multiplicity: k must be positive");
    std::int64_t m = 0;
    for (int h = 0; h < k; ++h) m += count_tableaux(ell, k - 1 - h, h);
    return m;
}

inline std::int64_t multiplicity_weyl(int ell, int k) {
    if (k < 1) throw std::invalid_argument("multiplicity: k must be positive");
    std::int64_t m = 0;
    for (int h = 0; h < k; ++h) m += weyl_dim_nh(ell, k - 1 - h, h);
    return m;
}

/// C_ell = (1/ell!) sum_{i<ell} (-1)^i / (i! (ell+i)!).  This is not the leading
/// coefficient of mu_k for ell >= 2; that is dixmier_constant.
inline Rational C_const(int ell) {
    if (ell < 1) throw std::invalid_argument("C_const: ell must be positive");
    Rational s(0);
    for (int i = 0; i < ell; ++i) s = s + Rational(i % 2 ? -1 : 1, factorial(i) * factorial(ell + i));
    return s * Rational(1, factorial(ell));
}

/// Leading coefficient of mu_k, i.e. Res_{s=2 ell+1} Tr |D|^{-s}:
/// sum_i (-1)^i binom(ell-1,i)/(ell+i) / (ell! (ell-1)!) = 1/(ell (2 ell - 1)!).
inline Rational dixmier_constant(int ell) {
    if (ell < 1) throw std::invalid_argument("dixmier_constant: ell must be positive");
    return Rational(1, ell * factorial(2 * ell - 1));
}

/// Forward difference of the given order of mu at k, in integers.
inline std::int64_t mu_difference(int ell, int order, int k, bool weyl = false) {
    std::int64_t d = 0, binom = 1;
    for (int t = 0; t <= order; ++t) {
        std::int64_t mu = weyl ? multiplicity_weyl(ell, k + t) : multiplicity(ell, k + t);
        d += ((order - t) % 2 ? -1 : 1) * binom * mu;
        binom = binom * (order - t) / (t + 1);
    }
    return d;
}

/// Delta^{2 ell} mu_k / (2 ell)! for k = 1 .. kmax - 2 ell, exactly.
inline std::vector<Rational> leading_from_differences(int ell, int kmax) {
    if (kmax < 2 * ell + 1) throw std::invalid_argument("finite differences need kmax >= 2 ell + 1");
    std::vector<Rational> out;
    for (int k = 1; k + 2 * ell <= kmax; ++k) out.emplace_back(mu_difference(ell, 2 * ell, k), factorial(2 * ell));
    return out;
}

/// max over k of |Delta^{2 ell} mu_k / (2 ell)! - target|; target defaults to C_const.
inline double finite_diff_check(int ell, int kmax, std::optional<Rational> target = std::nullopt) {
    const Rational C = target ? *target : C_const(ell);
    double worst = 0.0;
    for (const auto& lead : leading_from_differences(ell, kmax)) worst = std::max(worst, std::abs((lead - C).value()));
    return worst;
}

// ---------------------------------------------------------------------------
// Moves and Clebsch-Gordan coefficients

using Move = std::vector<int>;

/// Gamma^(i): 1 <= m_k <= ell+2-k.
inline std::vector<Move> moves(int i, int ell) {
    std::vector<Move> out;
    Move m(static_cast<std::size_t>(i), 1);
    for (;;) {
        out.push_back(m);
        int k = i - 1;
        while (k >= 0 && m[static_cast<std::size_t>(k)] == ell + 2 - (k + 1)) m[static_cast<std::size_t>(k--)] = 1;
        if (k < 0) break;
        ++m[static_cast<std::size_t>(k)];
    }
    return out;
}

/// m^i = (ell+1, ell, ..., ell+2-i)
inline Move privileged_move(int i, int ell) {
    Move m;
    for (int k = 1; k <= i; ++k) m.push_back(ell + 2 - k);
    return m;
}

/// r^(m), renormalized to r_{1,ell+1} = 0.  May be an invalid tableau.
inline Tableau apply_move(const Tableau& r, const Move& m) {
    Tableau t = r;
    for (std::size_t k = 0; k < m.size(); ++k) ++t.ref(static_cast<int>(k) + 1, m[k]);
    if (m[0] == r.ell + 1)
        for (int& x : t.v) --x;
    return t;
}

/// The r with r^(m) = target, if any.
inline std::optional<Tableau> undo_move(const Tableau& target, const Move& m) {
    Tableau t = target;
    if (m[0] == target.ell + 1)
        for (int& x : t.v) ++x;
    for (std::size_t k = 0; k < m.size(); ++k) --t.ref(static_cast<int>(k) + 1, m[k]);
    if (!t.valid()) return std::nullopt;
    return t;
}

namespace detail {
inline int sign_of(int x, int sign_zero) { return x > 0 ? 1 : (x < 0 ? -1 : sign_zero); }
}  // namespace detail

/// C_q(i, r, m).  Zero when r^(m) is not a tableau.  sign_zero is the value
/// given to sign(0) in the sign product; -1 is the choice under which the
/// representation satisfies the sphere relations.
inline double cg_coeff(int i, const Tableau& r, const Move& m, double q, int sign_zero = -1) {
    const int ell = r.ell;
    if (static_cast<int>(m.size()) != i) throw std::invalid_argument("cg_coeff: move length differs from i");
    if (!apply_move(r, m).valid()) return 0.0;
    auto R = [&](int a, int b) { return r.at(a, b); };
    auto M = [&](int k) { return m[static_cast<std::size_t>(k - 1)]; };
    auto br = [q](int x) { return qnum(x, q); };

    int e2 = 1 + M(1) - 2 * M(i) - R(1, M(1)) + 2 * R(i, M(i)) - R(i, ell + 2 - i);
    for (int k = 1; k <= ell + 1 - i; ++k) e2 += R(i + 1, k) - R(i, k);

    int sgn = 1;
    for (int k = 1; k < i; ++k) sgn *= detail::sign_of(M(k) - M(k + 1), sign_zero);

    double p = 1.0;
    for (int k = 1; k < i; ++k) {
        for (int j = 1; j <= ell + 2 - k; ++j) {
            if (j == M(k)) continue;
            p *= br(R(k, j) - R(k + 1, M(k + 1)) - j + M(k + 1)) / br(R(k, j) - R(k, M(k)) - j + M(k));
        }
        for (int j = 1; j <= ell + 1 - k; ++j) {
            if (j == M(k + 1)) continue;
            p *= br(R(k + 1, j) - R(k, M(k)) - j + M(k) - 1) /
                 br(R(k + 1, j) - R(k + 1, M(k + 1)) - j + M(k + 1) - 1);
        }
    }
    for (int k = 1; k <= ell + 1 - i; ++k) p *= br(R(i + 1, k) - R(i, M(i)) - k + M(i) - 1);
    for (int k = 1; k <= ell + 2 - i; ++k) {
        if (k == M(i)) continue;
        p /= br(R(i, k) - R(i, M(i)) - k + M(i));
    }
    if (p < -1e-12) throw std::logic_error("cg_coeff: negative radicand on a valid move");
    return std::pow(q, 0.5 * e2) * sgn * std::sqrt(std::max(p, 0.0));
}

/// Exponent K(i, r, m) of the coefficient bound.
inline int K_bound(int i, const Tableau& r, const Move& m) {
    auto R = [&](int a, int b) { return r.at(a, b); };
    auto M = [&](int k) { return m[static_cast<std::size_t>(k - 1)]; };
    int K = 0;
    for (int k = 1; k < i; ++k) {
        for (int j = std::min(M(k), M(k + 1)); j <= std::max(M(k), M(k + 1)) - 1; ++j) K += R(k + 1, j) - R(k, j + 1);
        for (int j = M(k + 1) + 1; j <= M(k) - 1; ++j) K += 2 * (R(k, j) - R(k + 1, j));
    }
    return K;
}

/// Leading part of q^{1-i} C_q(i, r, m^i).  The bracket in the middle case is
/// 1 - q^{2x}, the same one the coefficient formula is written in.
inline double ctilde(int i, const Tableau& r, double q) {
    const int ell = r.ell;
    if (i == 1) return std::sqrt(1.0 - std::pow(q, 2 * r.at(2, ell)));
    if (i == ell + 1) return std::pow(q, r.at(ell + 1, 1));
    return std::pow(q, r.at(i, ell + 2 - i)) *
           std::sqrt(1.0 - std::pow(q, 2 * (r.at(i + 1, ell + 1 - i) - r.at(i, ell + 2 - i))));
}

// ---------------------------------------------------------------------------
// Left regular representation

struct Params {
    int ell;
    double q;
    int sign_zero = -1;
    double perturb = 0.0;  // relative error injected into the n-raising branch

    Params(int ell_, double q_, int sign_zero_ = -1, double perturb_ = 0.0)
        : ell(ell_), q(check_q(q_)), sign_zero(sign_zero_), perturb(perturb_) {
        if (ell < 1) throw std::invalid_argument("ell must be positive");
        if (sign_zero != 1 && sign_zero != -1) throw std::invalid_argument("sign_zero must be +1 or -1");
    }
};

/// Which branch of pi(z_g^*) to keep.
enum class Branch { both, raise_n, lower_h };

/// pi(z_g^*), g = 1..ell+1.
inline Kernel<OddLabel> zstar_kernel(int g, const Params& par, Branch which = Branch::both) {
    const int ell = par.ell;
    if (g < 1 || g > ell + 1) throw std::invalid_argument("generator index out of range");
    const int i = ell + 2 - g;
    auto mv = std::make_shared<std::vector<Move>>(moves(i, ell));
    return {"z" + std::to_string(g) + "*",
            [par, i, mv, which](const OddLabel& v) {
                const int ell = par.ell;
                const double q = par.q;
                Terms<OddLabel> out;
                for (const auto& m : *mv) {
                    double pref;
                    OddLabel t;
                    if (m[0] == 1) {
                        if (which == Branch::lower_h) continue;
                        pref = std::pow(q, 0.5 * (ell + v.h) - i + 1) *
                               std::sqrt(qnum(v.n + 1, q) / qnum(v.n + v.h + ell + 1, q)) * (1.0 + par.perturb);
                        t.n = v.n + 1, t.h = v.h;
                    } else if (m[0] == ell + 1) {
                        if (which == Branch::raise_n || v.h == 0) continue;
                        pref = std::pow(q, -0.5 * v.n - i + 1) *
                               std::sqrt(qnum(v.h + ell - 1, q) / qnum(v.n + v.h + ell - 1, q));
                        t.n = v.n, t.h = v.h - 1;
                    } else {
                        continue;
                    }
                    t.r = apply_move(v.r, m);
                    if (!t.r.valid()) continue;
                    double c = cg_coeff(i, v.r, m, q, par.sign_zero);
                    if (c != 0.0) out.emplace_back(std::move(t), pref * c);
                }
                return merge_terms(std::move(out));
            },
            1};
}

namespace detail {
/// Labels u with z_g^* u possibly containing w.
inline std::vector<OddLabel> zstar_preimages(int g, int ell, const OddLabel& w) {
    std::vector<OddLabel> out;
    for (const auto& m : moves(ell + 2 - g, ell)) {
        OddLabel u;
        if (m[0] == 1) {
            if (w.n == 0) continue;
            u.n = w.n - 1, u.h = w.h;
        } else if (m[0] == ell + 1) {
            u.n = w.n, u.h = w.h + 1;
        } else {
            continue;
        }
        auto r = undo_move(w.r, m);
        if (!r) continue;
        u.r = std::move(*r);
        out.push_back(std::move(u));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}
}  // namespace detail

inline Kernel<OddLabel> z_kernel(int g, const Params& par) {
    const int ell = par.ell;
    auto k = adjoint_kernel<OddLabel>(zstar_kernel(g, par),
                                      [g, ell](const OddLabel& w) { return detail::zstar_preimages(g, ell, w); });
    k.name = "z" + std::to_string(g);
    return k;
}

/// z1 ... z_{ell+1} and their adjoints.
inline GeneratorMap<OddLabel> generators(const Params& par) {
    GeneratorMap<OddLabel> m;
    for (int g = 1; g <= par.ell + 1; ++g) {
        m.emplace("z" + std::to_string(g), z_kernel(g, par));
        m.emplace("z" + std::to_string(g) + "*", zstar_kernel(g, par));
    }
    return m;
}

/// The defining relations of A(S^{2 ell + 1}_q), each as a word that should vanish.
inline std::vector<AlgebraWord> relations(int ell, double q) {
    auto z = [](int g, bool st = false) { return AlgebraWord::gen("z" + std::to_string(g), st); };
    std::vector<AlgebraWord> rels;
    for (int a = 1; a <= ell + 1; ++a)
        for (int b = a + 1; b <= ell + 1; ++b) rels.push_back(z(a) * z(b) - q * (z(b) * z(a)));
    for (int a = 1; a <= ell + 1; ++a)
        for (int b = 1; b <= ell + 1; ++b)
            if (a != b) rels.push_back(z(a, true) * z(b) - q * (z(b) * z(a, true)));
    rels.push_back(z(1, true) * z(1) - z(1) * z(1, true));
    AlgebraWord partial = AlgebraWord::unit(0.0);
    for (int a = 1; a <= ell; ++a) {
        partial = partial + z(a) * z(a, true);
        rels.push_back(z(a + 1, true) * z(a + 1) - z(a + 1) * z(a + 1, true) - (1.0 - q * q) * partial);
    }
    rels.push_back(partial + z(ell + 1) * z(ell + 1, true) - AlgebraWord::unit());
    return rels;
}

// ---------------------------------------------------------------------------
// Dirac operator

inline double dirac_eigenvalue(const OddLabel& v) { return v.n == 0 ? -(v.h + 1.0) : v.n + v.h + 1.0; }

inline Kernel<OddLabel> dirac_kernel() {
    return diagonal_kernel<OddLabel>("D", [](const OddLabel& v) { return cplx(dirac_eigenvalue(v)); });
}

/// sup over labels below cutoff-1 of |coefficient of [D, a]|.
inline double dirac_commutator_sup(const Kernel<OddLabel>& a, const TruncatedBasis<OddLabel>& basis) {
    auto k = commutator(dirac_kernel(), a);
    return sup_decay_ratio<OddLabel>(k, basis.interior(1), [](const OddLabel&) { return 1.0; });
}

// ---------------------------------------------------------------------------
// Symbol map

/// (n, h; a_1..a_{ell-1}, b_0..b_{ell-1})
struct LambdaLabel {
    int n = 0, h = 0;
    std::vector<int> a, b;
    auto operator<=>(const LambdaLabel&) const = default;
    bool operator==(const LambdaLabel&) const = default;
    std::size_t hash() const {
        std::size_t s = hash_mix(std::hash<int>{}(n), std::hash<int>{}(h));
        for (int x : a) s = hash_mix(s, std::hash<int>{}(x));
        for (int x : b) s = hash_mix(s, std::hash<int>{}(x) + 7);
        return s;
    }
};

inline bool in_lambda(const LambdaLabel& v) {
    if (v.n < 0 || v.h < 0) return false;
    int prev = 0;
    for (int x : v.a) {
        if (x < prev) return false;
        prev = x;
    }
    if (!v.a.empty() && v.a.back() > v.n) return false;
    for (std::size_t k = 1; k < v.b.size(); ++k)
        if (v.b[k] < v.b[k - 1]) return false;
    return v.b.empty() || v.b.back() <= v.h;
}

inline LambdaLabel W(const OddLabel& v) {
    const int ell = v.r.ell;
    LambdaLabel out{v.n, v.h, {}, {}};
    for (int j = 1; j <= ell - 1; ++j) out.a.push_back(v.r.at(ell + 1 - j, 1) - v.h);
    for (int k = 0; k <= ell - 1; ++k) out.b.push_back(v.h - v.r.at(ell + 1 - k, k + 1));
    return out;
}

/// Null unless b_1 >= 0 and b_0 >= -a_1.
inline std::optional<OddLabel> W_star(const LambdaLabel& x) {
    const int ell = static_cast<int>(x.b.size());
    if (ell < 2) throw std::invalid_argument("W_star: ell must be at least 2");
    if (!in_lambda(x)) return std::nullopt;
    if (!(x.b[1] >= 0 && x.b[0] >= -x.a[0])) return std::nullopt;
    Tableau t(ell);
    t.ref(1, 1) = x.n + x.h;
    for (int j = 2; j <= ell; ++j) t.ref(1, j) = x.h;
    for (int i = 2; i <= ell; ++i) {
        const int len = ell + 2 - i;  // row i = (a_{len-1}+h, h, ..., h, h - b_{len-1})
        t.ref(i, 1) = x.a[static_cast<std::size_t>(len - 2)] + x.h;
        for (int j = 2; j < len; ++j) t.ref(i, j) = x.h;
        t.ref(i, len) = x.h - x.b[static_cast<std::size_t>(len - 1)];
    }
    t.ref(ell + 1, 1) = x.h - x.b[0];
    return OddLabel{x.n, x.h, std::move(t)};
}

/// rho(z_g) (star = false) or rho(z_g^*) on the Lambda basis.
inline Kernel<LambdaLabel> rho_kernel(int g, bool star, int ell, double q) {
    if (g < 1 || g > ell + 1) throw std::invalid_argument("generator index out of range");
    return {"rho(z" + std::to_string(g) + (star ? "*)" : ")"),
            [g, star, ell, q](const LambdaLabel& v) {
                // b_k for k = 0..ell, with b_ell := h
                auto bb = [&](int k) { return k == ell ? v.h : v.b[static_cast<std::size_t>(k)]; };
                auto A = [&](int i) { return std::pow(q, bb(i - 1) - bb(i - 2)); };
                double c = 1.0;
                for (int k = std::max(g + 1, 2); k <= ell + 1; ++k) c *= A(k);
                const int d = star ? -1 : 1;
                LambdaLabel t = v;
                t.h += d;
                // b + d * underline(g); underline(1) is all ones
                for (int k = std::max(g - 1, 0); k < ell; ++k) t.b[static_cast<std::size_t>(k)] += d;
                if (g >= 2) {
                    int gap = bb(g - 1) - bb(g - 2);
                    double rad = star ? 1.0 - std::pow(q, 2 * gap) : 1.0 - std::pow(q, 2 * (gap + 1));
                    c *= std::sqrt(std::max(rad, 0.0));
                }
                if (c == 0.0) return Terms<LambdaLabel>{};
                return Terms<LambdaLabel>{{std::move(t), c}};
            },
            1};
}

inline GeneratorMap<LambdaLabel> symbol_generators(int ell, double q) {
    GeneratorMap<LambdaLabel> m;
    for (int g = 1; g <= ell + 1; ++g) {
        m.emplace("z" + std::to_string(g), rho_kernel(g, false, ell, q));
        m.emplace("z" + std::to_string(g) + "*", rho_kernel(g, true, ell, q));
    }
    return m;
}

/// Lambda labels with n + h + max(0, -b_0) <= cutoff.
inline TruncatedBasis<LambdaLabel> lambda_basis(int ell, int cutoff) {
    std::vector<LambdaLabel> labs;
    auto lev = [](const LambdaLabel& v) { return v.n + v.h + std::max(0, -v.b[0]); };
    for (int s = 0; s <= cutoff; ++s)
        for (int n = 0; n <= s; ++n) {
            const int h = s - n;
            LambdaLabel v{n, h, std::vector<int>(static_cast<std::size_t>(ell - 1)), std::vector<int>(static_cast<std::size_t>(ell))};
            std::function<void(int)> fa, fb;
            fb = [&](int k) {
                if (k < 0) {
                    labs.push_back(v);
                    return;
                }
                // b_0 >= -(cutoff - s) and the chain bound every b_k below
                const int hi = k == ell - 1 ? h : v.b[static_cast<std::size_t>(k + 1)];
                for (int x = -(cutoff - s); x <= hi; ++x) {
                    v.b[static_cast<std::size_t>(k)] = x;
                    fb(k - 1);
                }
            };
            fa = [&](int k) {
                if (k == ell - 1) {
                    fb(ell - 1);
                    return;
                }
                for (int x = k == 0 ? 0 : v.a[static_cast<std::size_t>(k - 1)]; x <= n; ++x) {
                    v.a[static_cast<std::size_t>(k)] = x;
                    fa(k + 1);
                }
            };
            fa(0);
        }
    return TruncatedBasis<LambdaLabel>(std::move(labs), lev, cutoff);
}

/// W^* rho(z_g) W, or with z_g^*.
inline Kernel<OddLabel> pulled_back_symbol(int g, bool star, int ell, double q) {
    auto rk = rho_kernel(g, star, ell, q);
    return {"W*" + rk.name + "W",
            [rk](const OddLabel& v) {
                Terms<OddLabel> out;
                for (auto& [t, c] : rk(W(v)))
                    if (auto u = W_star(t)) out.emplace_back(std::move(*u), c);
                return merge_terms(std::move(out));
            },
            1};
}

/// pi(z_g) - W^* rho(z_g) W (or the starred version).
inline Kernel<OddLabel> symbol_residual_kernel(int g, bool star, const Params& par) {
    auto pi = star ? zstar_kernel(g, par) : z_kernel(g, par);
    return linear_combination<OddLabel>({{1.0, pi}, {-1.0, pulled_back_symbol(g, star, par.ell, par.q)}});
}

/// sup |coefficient| / q^h of the symbol residual over labels at each level 0..Lambda.
inline std::vector<double> residual_profile(int g, bool star, const Params& par, int Lambda) {
    auto k = symbol_residual_kernel(g, star, par);
    std::vector<double> prof(static_cast<std::size_t>(Lambda + 1), 0.0);
    for (int s = 0; s <= Lambda; ++s)
        for (int n = 0; n <= s; ++n)
            for (auto& t : tableaux(par.ell, n, s - n)) {
                OddLabel v{n, s - n, std::move(t)};
                double rate = std::pow(par.q, v.h);
                for (const auto& [u, c] : k(v))
                    prof[static_cast<std::size_t>(s)] = std::max(prof[static_cast<std::size_t>(s)], std::abs(c) / rate);
            }
    return prof;
}

/// sup over labels with n + h <= Lambda of |coefficient of pi(z_i) - W^* rho(z_i) W| / q^h.
inline double residual_bound(int g, const Params& par, int Lambda, bool star = false) {
    auto p = residual_profile(g, star, par, Lambda);
    return *std::max_element(p.begin(), p.end());
}

/// Same ratio for p_ij = z_i^* z_j restricted to the span of |h+N, h; r>, h <= hmax.
inline double projective_residual(int i, int j, const Params& par, int N, int hmax) {
    if (N < 0) throw std::invalid_argument("projective_residual: N must be non-negative");
    auto pi = compose(zstar_kernel(i, par), z_kernel(j, par));
    auto rs = compose(rho_kernel(i, true, par.ell, par.q), rho_kernel(j, false, par.ell, par.q));
    double worst = 0.0;
    for (int h = 0; h <= hmax; ++h)
        for (auto& t : tableaux(par.ell, h + N, h)) {
            OddLabel v{h + N, h, std::move(t)};
            Terms<OddLabel> diff = pi(v);
            for (auto& [x, c] : rs(W(v)))
                if (auto u = W_star(x)) diff.emplace_back(std::move(*u), -c);
            for (const auto& [u, c] : merge_terms(std::move(diff))) {
                if (u.n - u.h != N) throw std::logic_error("projective_residual: charge not preserved");
                worst = std::max(worst, std::abs(c) / std::pow(par.q, h));
            }
        }
    return worst;
}

// ---------------------------------------------------------------------------
// Decay ideal and noncommutative integral

/// L_{j,k}: multiplication by q^{r_{j,k}}.
inline Kernel<OddLabel> L_kernel(int j, int k, double q) {
    return diagonal_kernel<OddLabel>("L", [j, k, q](const OddLabel& v) { return cplx(std::pow(q, v.r.at(j, k))); });
}

struct DecayCheck {
    std::vector<double> partial;  // Tr(L_{2,ell} |D|^{-s}) summed over n + h < K, K = 1..Lambda+1
    std::vector<double> bound;    // the comparison series summed to the same K
};

inline DecayCheck decay_ideal_check(int ell, double q, double s, int Lambda) {
    check_q(q);
    if (!(s > 2.0 * ell)) throw std::invalid_argument("decay_ideal_check: requires s > 2 ell");
    DecayCheck out;
    double acc = 0.0, bacc = 0.0, inner = 0.0;
    for (int k = 1; k <= Lambda + 1; ++k) {
        for (int n = 0; n < k; ++n)
            for (const auto& t : tableaux(ell, n, k - 1 - n)) acc += std::pow(q, t.at(2, ell)) * std::pow(k, -s);
        // sum_{i<k} mu^{(ell-1)}_{i+1}
        inner += static_cast<double>(ell - 1 >= 1 ? multiplicity_weyl(ell - 1, k) : 1);
        bacc += std::pow(k, -s) * inner / (1.0 - q);
        out.partial.push_back(acc);
        out.bound.push_back(bacc);
    }
    return out;
}

/// Res_{s=2 ell+1} Tr(pi(word)|D|^{-s}) = (c / 2 pi) times the integral of
/// sigma(word), with c = dixmier_constant(ell).  sigma kills z_1..z_ell and
/// sends z_{ell+1} to the unit circle.
inline cplx nc_integral(const AlgebraWord& w, int ell) {
    const double C = dixmier_constant(ell).value();
    const std::string top = "z" + std::to_string(ell + 1);
    cplx total = 0.0;
    for (const auto& [m, c] : w.terms()) {
        int charge = 0;
        bool killed = false;
        for (const auto& l : m) {
            if (l.name == top)
                charge += l.star ? -1 : 1;
            else if (l.name.size() > 1 && l.name[0] == 'z')
                killed = true;
            else
                throw std::invalid_argument("nc_integral: unknown generator " + l.name);
        }
        if (!killed && charge == 0) total += c * C;
    }
    return total;
}

/// Mean of <v|pi(word)|v> over the labels with n + h + 1 = k.
inline cplx shell_average(const AlgebraWord& w, const Params& par, int k) {
    auto gens = generators(par);
    cplx s = 0.0;
    std::int64_t count = 0;
    for (int n = 0; n < k; ++n)
        for (auto& t : tableaux(par.ell, n, k - 1 - n)) {
            OddLabel v{n, k - 1 - n, std::move(t)};
            s += coefficient_of(evaluate_word(w, gens, v), v);
            ++count;
        }
    return s / static_cast<double>(count);
}

}  // namespace qsph::odd

/**
 * @file opalg.hpp
 * @brief Lazy sparse shift operators on labeled orthonormal bases.
 *
 * An operator is a Kernel: a rule sending one basis label to a finite list of
 * (label, coefficient) terms, plus a declared shift radius measured in units of
 * the basis' governing level (l, n+h, k1+k2, ...).  Labels must provide
 * operator<=>, operator== and hash().
 */
#pragma once

#include <Eigen/SparseCore>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

namespace qsph {

using cplx = std::complex<double>;

template <class L>
using Terms = std::vector<std::pair<L, cplx>>;

template <class L>
struct LabelHash {
    std::size_t operator()(const L& l) const noexcept { return l.hash(); }
};

inline std::size_t hash_mix(std::size_t seed, std::size_t v) {
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

/// Sorts by label and combines like terms; exact zeros are dropped.
template <class L>
Terms<L> merge_terms(Terms<L> t) {
    std::sort(t.begin(), t.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    Terms<L> out;
    out.reserve(t.size());
    for (auto& [lab, c] : t) {
        if (!out.empty() && out.back().first == lab)
            out.back().second += c;
        else
            out.emplace_back(std::move(lab), c);
    }
    std::erase_if(out, [](const auto& p) { return p.second == cplx(0.0); });
    return out;
}

template <class L>
cplx coefficient_of(const Terms<L>& t, const L& lab) {
    cplx s = 0.0;
    for (const auto& [l, c] : t)
        if (l == lab) s += c;
    return s;
}

template <class L>
double max_abs(const Terms<L>& t) {
    double m = 0.0;
    for (const auto& p : t) m = std::max(m, std::abs(p.second));
    return m;
}

template <class L>
struct Kernel {
    using Fn = std::function<Terms<L>(const L&)>;
    std::string name;
    Fn fn;
    int radius = 0;

    Terms<L> operator()(const L& v) const { return fn ? fn(v) : Terms<L>{}; }

    Terms<L> apply(const Terms<L>& vec) const {
        Terms<L> out;
        for (const auto& [lab, c] : vec)
            for (auto& [t, d] : (*this)(lab)) out.emplace_back(t, c * d);
        return merge_terms(std::move(out));
    }
};

template <class L>
Kernel<L> zero_kernel() {
    return {"0", [](const L&) { return Terms<L>{}; }, 0};
}

template <class L>
Kernel<L> identity_kernel() {
    return {"1", [](const L& v) { return Terms<L>{{v, 1.0}}; }, 0};
}

template <class L>
Kernel<L> diagonal_kernel(std::string name, std::function<cplx(const L&)> w) {
    return {std::move(name),
            [w](const L& v) {
                cplx c = w(v);
                return c == cplx(0.0) ? Terms<L>{} : Terms<L>{{v, c}};
            },
            0};
}

/// a∘b : b is applied first.
template <class L>
Kernel<L> compose(const Kernel<L>& a, const Kernel<L>& b) {
    return {a.name + "*" + b.name,
            [a, b](const L& v) { return a.apply(b(v)); },
            a.radius + b.radius};
}

template <class L>
Kernel<L> linear_combination(std::vector<std::pair<cplx, Kernel<L>>> parts) {
    int r = 0;
    std::string name;
    for (const auto& [c, k] : parts) {
        r = std::max(r, k.radius);
        name += (name.empty() ? "" : "+") + k.name;
    }
    return {name,
            [parts](const L& v) {
                Terms<L> out;
                for (const auto& [c, k] : parts)
                    for (auto& [t, d] : k(v)) out.emplace_back(t, c * d);
                return merge_terms(std::move(out));
            },
            r};
}

template <class L>
Kernel<L> add(const Kernel<L>& a, const Kernel<L>& b) {
    return linear_combination<L>({{1.0, a}, {1.0, b}});
}

template <class L>
Kernel<L> scale(cplx c, const Kernel<L>& a) {
    return linear_combination<L>({{c, a}});
}

template <class L>
Kernel<L> commutator(const Kernel<L>& a, const Kernel<L>& b) {
    return linear_combination<L>({{1.0, compose(a, b)}, {-1.0, compose(b, a)}});
}

/// Antiunitary operator given by an involutive label map with unit phases:
/// J(c e_v) = conj(c) phase(v) e_{map(v)}.
template <class L>
struct AntiKernel {
    std::string name;
    std::function<std::pair<L, cplx>(const L&)> fn;

    Terms<L> apply(const Terms<L>& vec) const {
        Terms<L> out;
        for (const auto& [lab, c] : vec) {
            auto [t, ph] = fn(lab);
            out.emplace_back(t, std::conj(c) * ph);
        }
        return merge_terms(std::move(out));
    }
    /// J^{-1}; uses that the label map is an involution.
    Terms<L> apply_inverse(const Terms<L>& vec) const {
        Terms<L> out;
        for (const auto& [lab, c] : vec) {
            // J^{-1} e_w = phase(v) e_v with v = map(w)
            const L src = fn(lab).first;
            out.emplace_back(src, std::conj(c) * fn(src).second);
        }
        return merge_terms(std::move(out));
    }
};

/// The linear kernel J b J^{-1}.
template <class L>
Kernel<L> conjugate_by(const AntiKernel<L>& J, const Kernel<L>& b) {
    return {J.name + b.name + J.name + "^-1",
            [J, b](const L& v) { return J.apply(b.apply(J.apply_inverse({{v, 1.0}}))); },
            b.radius};
}

/// Exact adjoint of k, given for each label w the labels whose image under k may contain w.
template <class L>
Kernel<L> adjoint_kernel(const Kernel<L>& k, std::function<std::vector<L>(const L&)> preimages) {
    return {k.name + "*",
            [k, preimages](const L& w) {
                Terms<L> out;
                for (const auto& u : preimages(w)) {
                    cplx c = coefficient_of(k(u), w);
                    if (c != cplx(0.0)) out.emplace_back(u, std::conj(c));
                }
                return merge_terms(std::move(out));
            },
            k.radius};
}

/// Label paired with a component index, for operators on H ⊗ C^k.
template <class L>
struct Indexed {
    L base;
    int comp = 0;
    auto operator<=>(const Indexed&) const = default;
    bool operator==(const Indexed&) const = default;
    std::size_t hash() const { return hash_mix(base.hash(), static_cast<std::size_t>(comp)); }
};

/// Matrix of kernels acting on H ⊗ C^k; entries[i][j] maps component j to i.
template <class L>
using KernelMatrix = std::vector<std::vector<Kernel<L>>>;

template <class L>
Kernel<Indexed<L>> matrix_kernel(const KernelMatrix<L>& m, std::string name = "M") {
    int r = 0;
    for (const auto& row : m)
        for (const auto& k : row) r = std::max(r, k.radius);
    return {std::move(name),
            [m](const Indexed<L>& v) {
                Terms<Indexed<L>> out;
                for (std::size_t i = 0; i < m.size(); ++i)
                    for (auto& [t, c] : m[i][static_cast<std::size_t>(v.comp)](v.base))
                        out.emplace_back(Indexed<L>{t, static_cast<int>(i)}, c);
                return merge_terms(std::move(out));
            },
            r};
}

/// A ⊗ 1_k
template <class L>
Kernel<Indexed<L>> ampliate(const Kernel<L>& a) {
    return {a.name,
            [a](const Indexed<L>& v) {
                Terms<Indexed<L>> out;
                for (auto& [t, c] : a(v.base)) out.emplace_back(Indexed<L>{t, v.comp}, c);
                return out;
            },
            a.radius};
}

template <class L>
AntiKernel<Indexed<L>> ampliate(const AntiKernel<L>& J) {
    return {J.name, [J](const Indexed<L>& v) {
                auto [t, ph] = J.fn(v.base);
                return std::pair<Indexed<L>, cplx>{Indexed<L>{t, v.comp}, ph};
            }};
}

/// Deterministic finite basis: labels sorted ascending, level() governs truncation.
template <class L>
class TruncatedBasis {
public:
    using LevelFn = std::function<int(const L&)>;

    TruncatedBasis(std::vector<L> labels, LevelFn level, int cutoff)
        : labels_(std::move(labels)), level_(std::move(level)), cutoff_(cutoff) {
        std::sort(labels_.begin(), labels_.end());
        labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
        index_.reserve(labels_.size());
        for (std::size_t i = 0; i < labels_.size(); ++i) index_.emplace(labels_[i], i);
    }

    std::size_t size() const { return labels_.size(); }
    const std::vector<L>& labels() const& { return labels_; }
    // a temporary basis hands its labels over, so range-for over it is safe
    std::vector<L> labels() && { return std::move(labels_); }
    const L& operator[](std::size_t i) const { return labels_[i]; }
    int cutoff() const { return cutoff_; }
    int level(const L& v) const { return level_(v); }
    const LevelFn& level_fn() const { return level_; }

    bool contains(const L& v) const { return index_.count(v) != 0; }
    std::ptrdiff_t index_of(const L& v) const {
        auto it = index_.find(v);
        return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
    }

    /// Labels whose level is at most cutoff - margin.
    std::vector<L> interior(int margin) const {
        std::vector<L> out;
        for (const auto& v : labels_)
            if (level_(v) <= cutoff_ - margin) out.push_back(v);
        return out;
    }

private:
    std::vector<L> labels_;
    LevelFn level_;
    int cutoff_;
    std::unordered_map<L, std::size_t, LabelHash<L>> index_;
};

/// Basis of H ⊗ C^k built from a basis of H.
template <class L>
TruncatedBasis<Indexed<L>> ampliate(const TruncatedBasis<L>& b, int k) {
    std::vector<Indexed<L>> labs;
    labs.reserve(b.size() * static_cast<std::size_t>(k));
    for (const auto& v : b.labels())
        for (int c = 0; c < k; ++c) labs.push_back({v, c});
    auto lf = b.level_fn();
    return TruncatedBasis<Indexed<L>>(std::move(labs),
                                      [lf](const Indexed<L>& v) { return lf(v.base); },
                                      b.cutoff());
}

// ---------------------------------------------------------------------------
// Sparse matrices

using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

/// Matrix of k on the basis; targets outside the basis are dropped.
template <class L>
SparseMatrix materialize(const Kernel<L>& k, const TruncatedBasis<L>& basis) {
    std::vector<Eigen::Triplet<cplx>> trip;
    for (std::size_t j = 0; j < basis.size(); ++j)
        for (const auto& [t, c] : k(basis[j])) {
            auto i = basis.index_of(t);
            if (i >= 0) trip.emplace_back(static_cast<int>(i), static_cast<int>(j), c);
        }
    SparseMatrix m(static_cast<int>(basis.size()), static_cast<int>(basis.size()));
    m.setFromTriplets(trip.begin(), trip.end());
    m.prune(cplx(0.0));
    return m;
}

inline void require_same_shape(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("sparse matrix dimension mismatch");
}

inline SparseMatrix adjoint(const SparseMatrix& m) { return SparseMatrix(m.adjoint()); }

inline SparseMatrix compose(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("sparse matrix dimension mismatch");
    return SparseMatrix(a * b);
}

inline SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b) {
    require_same_shape(a, b);
    return SparseMatrix(a + b);
}

inline SparseMatrix scale(cplx c, const SparseMatrix& a) { return SparseMatrix(c * a); }

inline SparseMatrix commutator(const SparseMatrix& a, const SparseMatrix& b) {
    require_same_shape(a, b);
    return SparseMatrix(a * b - b * a);
}

inline cplx trace(const SparseMatrix& m) {
    cplx s = 0.0;
    for (int i = 0; i < std::min(m.rows(), m.cols()); ++i) s += m.coeff(i, i);
    return s;
}

/// Tr(a b) without forming the product.
inline cplx trace_of_product(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols() != b.rows() || a.rows() != b.cols())
        throw std::invalid_argument("sparse matrix dimension mismatch");
    SparseMatrix bt = b.transpose();
    cplx s = 0.0;
    for (int i = 0; i < a.outerSize(); ++i) {
        SparseMatrix::InnerIterator ia(a, i), ib(bt, i);
        while (ia && ib) {
            if (ia.col() == ib.col()) {
                s += ia.value() * ib.value();
                ++ia;
                ++ib;
            } else if (ia.col() < ib.col()) {
                ++ia;
            } else {
                ++ib;
            }
        }
    }
    return s;
}

inline double max_abs(const SparseMatrix& m) {
    double r = 0.0;
    for (int i = 0; i < m.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(m, i); it; ++it) r = std::max(r, std::abs(it.value()));
    return r;
}

/// Kernel of the adjoint of k, tabulated from its matrix on a basis.  Exact on
/// labels at least k.radius below the cutoff.
template <class L>
Kernel<L> tabulated_adjoint(const Kernel<L>& k, const TruncatedBasis<L>& basis) {
    auto m = std::make_shared<SparseMatrix>(materialize(k, basis));
    auto b = std::make_shared<TruncatedBasis<L>>(basis);
    return {k.name + "^*",
            [m, b](const L& v) {
                Terms<L> out;
                auto j = b->index_of(v);
                if (j < 0) return out;
                // (k^*)_{i,v} = conj(k_{v,i}): row v of the row-major matrix
                for (SparseMatrix::InnerIterator it(*m, static_cast<int>(j)); it; ++it)
                    out.emplace_back((*b)[static_cast<std::size_t>(it.col())], std::conj(it.value()));
                return merge_terms(std::move(out));
            },
            k.radius};
}

// ---------------------------------------------------------------------------
// Deterministic block-parallel reduction

/// Sums f(i) for i in [0,n) in fixed-size blocks combined in block order, so the
/// result does not depend on the thread count.
template <class T, class F>
T parallel_sum(std::size_t n, F f, unsigned threads = 0, std::size_t block = 256) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::size_t nblocks = (n + block - 1) / block;
    std::vector<T> partial(nblocks, T{});
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t b = next.fetch_add(1);
            if (b >= nblocks) break;
            T s{};
            for (std::size_t i = b * block; i < std::min(n, (b + 1) * block); ++i) s += f(i);
            partial[b] = s;
        }
    };
    std::vector<std::thread> pool;
    unsigned nt = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, nblocks)));
    for (unsigned t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    T total{};
    for (const auto& s : partial) total += s;
    return total;
}

/// Maximum of f(i) over [0,n), parallel.
template <class F>
double parallel_max(std::size_t n, F f, unsigned threads = 0) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<double> best(threads, 0.0);
    std::atomic<std::size_t> next{0};
    auto worker = [&](unsigned t) {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            best[t] = std::max(best[t], f(i));
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker, t);
    worker(0);
    for (auto& th : pool) th.join();
    return *std::max_element(best.begin(), best.end());
}

// ---------------------------------------------------------------------------
// Traces and decay

/// Σ weight(v) <v|k|v> over labels at level <= cutoff - margin, in basis order.
template <class L>
cplx weighted_trace(const std::function<double(const L&)>& weight, const Kernel<L>& k,
                    const TruncatedBasis<L>& basis, int margin = 0, unsigned threads = 0) {
    auto labs = basis.interior(margin);
    return parallel_sum<cplx>(
        labs.size(),
        [&](std::size_t i) {
            const L& v = labs[i];
            double w = weight ? weight(v) : 1.0;
            if (w == 0.0) return cplx(0.0);
            return w * coefficient_of(k(v), v);
        },
        threads);
}

/// max |coefficient| / rate(source) over all terms emitted from the given labels.
template <class L>
double sup_decay_ratio(const Kernel<L>& k, const std::vector<L>& labels,
                       const std::function<double(const L&)>& rate) {
    double r = 0.0;
    for (const auto& v : labels) {
        double rv = rate(v);
        if (!(rv > 0.0)) throw std::invalid_argument("decay rate must be positive");
        for (const auto& [t, c] : k(v)) r = std::max(r, std::abs(c) / rv);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Formal *-polynomials

struct Letter {
    std::string name;
    bool star = false;
    auto operator<=>(const Letter&) const = default;
    bool operator==(const Letter&) const = default;
    std::string key() const { return star ? name + "*" : name; }
};

using Monomial = std::vector<Letter>;

class AlgebraWord {
public:
    AlgebraWord() = default;
    static AlgebraWord unit(cplx c = 1.0) {
        AlgebraWord w;
        w.add_term({}, c);
        return w;
    }
    static AlgebraWord gen(const std::string& name, bool star = false) {
        AlgebraWord w;
        w.add_term({Letter{name, star}}, 1.0);
        return w;
    }
    static AlgebraWord monomial(Monomial m, cplx c = 1.0) {
        AlgebraWord w;
        w.add_term(std::move(m), c);
        return w;
    }

    void add_term(Monomial m, cplx c) {
        for (auto& [mm, cc] : terms_)
            if (mm == m) {
                cc += c;
                return;
            }
        terms_.emplace_back(std::move(m), c);
    }
    const std::vector<std::pair<Monomial, cplx>>& terms() const { return terms_; }

    friend AlgebraWord operator+(AlgebraWord a, const AlgebraWord& b) {
        for (const auto& [m, c] : b.terms_) a.add_term(m, c);
        return a;
    }
    friend AlgebraWord operator*(cplx c, AlgebraWord a) {
        for (auto& t : a.terms_) t.second *= c;
        return a;
    }
    friend AlgebraWord operator-(AlgebraWord a, const AlgebraWord& b) { return a + (-1.0) * b; }
    friend AlgebraWord operator*(const AlgebraWord& a, const AlgebraWord& b) {
        AlgebraWord w;
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) {
                Monomial m = ma;
                m.insert(m.end(), mb.begin(), mb.end());
                w.add_term(std::move(m), ca * cb);
            }
        return w;
    }

    /// Antilinear anti-homomorphic involution.
    AlgebraWord star() const {
        AlgebraWord w;
        for (const auto& [m, c] : terms_) {
            Monomial r(m.rbegin(), m.rend());
            for (auto& l : r) l.star = !l.star;
            w.add_term(std::move(r), std::conj(c));
        }
        return w;
    }

    /// Exponent of each letter key in a monomial word.
    static std::map<std::string, int> letter_counts(const Monomial& m) {
        std::map<std::string, int> out;
        for (const auto& l : m) ++out[l.key()];
        return out;
    }

    /// Parses products such as "x0^2 x1 x1*", "B B*", "z3 z3*" or "1".
    static AlgebraWord parse(const std::string& text) {
        Monomial m;
        std::size_t i = 0;
        auto skip = [&] {
            while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == '.'))
                ++i;
        };
        skip();
        if (text.find_first_not_of(" \t") == std::string::npos)
            throw std::invalid_argument("empty word");
        while (i < text.size()) {
            std::size_t start = i;
            while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_' ||
                                       (text[i] == '-' && i > start)))
                ++i;
            std::string name = text.substr(start, i - start);
            if (name.empty()) throw std::invalid_argument("cannot parse word: " + text);
            bool st = false;
            if (i < text.size() && text[i] == '*') {
                st = true;
                ++i;
            }
            int power = 1;
            if (i < text.size() && text[i] == '^') {
                ++i;
                std::size_t ps = i;
                while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
                if (ps == i) throw std::invalid_argument("missing exponent in: " + text);
                power = std::stoi(text.substr(ps, i - ps));
            }
            if (name != "1")
                for (int p = 0; p < power; ++p) m.push_back({name, st});
            skip();
        }
        return monomial(std::move(m));
    }

private:
    std::vector<std::pair<Monomial, cplx>> terms_;
};

template <class L>
using GeneratorMap = std::map<std::string, Kernel<L>>;

template <class L>
const Kernel<L>& lookup(const GeneratorMap<L>& gens, const Letter& l) {
    auto it = gens.find(l.key());
    if (it == gens.end()) throw std::invalid_argument("unbound generator: " + l.key());
    return it->second;
}

template <class L>
int word_radius(const AlgebraWord& w, const GeneratorMap<L>& gens) {
    int r = 0;
    for (const auto& [m, c] : w.terms()) {
        int s = 0;
        for (const auto& l : m) s += lookup(gens, l).radius;
        r = std::max(r, s);
    }
    return r;
}

/// Applies w to a vector; the rightmost letter acts first.
template <class L>
Terms<L> evaluate_word(const AlgebraWord& w, const GeneratorMap<L>& gens, const Terms<L>& vec) {
    Terms<L> out;
    for (const auto& [m, c] : w.terms()) {
        Terms<L> cur = vec;
        for (auto it = m.rbegin(); it != m.rend() && !cur.empty(); ++it) cur = lookup(gens, *it).apply(cur);
        for (auto& [t, d] : cur) out.emplace_back(t, c * d);
    }
    return merge_terms(std::move(out));
}

template <class L>
Terms<L> evaluate_word(const AlgebraWord& w, const GeneratorMap<L>& gens, const L& v) {
    return evaluate_word(w, gens, Terms<L>{{v, 1.0}});
}

template <class L>
Kernel<L> word_kernel(const AlgebraWord& w, const GeneratorMap<L>& gens) {
    return {"word", [w, gens](const L& v) { return evaluate_word(w, gens, v); }, word_radius(w, gens)};
}

/// Largest coefficient of any relation applied to any interior label.
template <class L>
double relation_residual(const std::vector<AlgebraWord>& rels, const GeneratorMap<L>& gens,
                         const TruncatedBasis<L>& basis, int margin, unsigned threads = 0) {
    for (const auto& r : rels)
        if (word_radius(r, gens) > margin)
            throw std::invalid_argument("interior margin smaller than relation shift radius");
    auto labs = basis.interior(margin);
    return parallel_max(
        labs.size(),
        [&](std::size_t i) {
            double m = 0.0;
            for (const auto& r : rels) m = std::max(m, max_abs(evaluate_word(r, gens, labs[i])));
            return m;
        },
        threads);
}

/// max |<w|a|v> - conj(<v|b|w>)| over interior sources v, i.e. how far b is from a^*.
template <class L>
double adjoint_mismatch(const Kernel<L>& a, const Kernel<L>& b, const TruncatedBasis<L>& basis,
                        int margin) {
    auto ma = materialize(a, basis);
    auto mb = materialize(b, basis);
    SparseMatrix diff = ma - SparseMatrix(mb.adjoint());
    double r = 0.0;
    for (int i = 0; i < diff.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(diff, i); it; ++it) {
            const L& row = basis[static_cast<std::size_t>(it.row())];
            const L& col = basis[static_cast<std::size_t>(it.col())];
            if (basis.level(row) <= basis.cutoff() - margin && basis.level(col) <= basis.cutoff() - margin)
                r = std::max(r, std::abs(it.value()));
        }
    return r;
}

}  // namespace qsph

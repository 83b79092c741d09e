// Batch front end: one JSON (or CSV) record per computation.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "qsph/qsph.hpp"

using json = nlohmann::ordered_json;
using namespace qsph;

namespace {

struct Opts {
    std::string algebra = "podles";
    double q = 0.5;
    double s = 1.0;
    std::string N = "1/2";
    int ell = 2;
    std::string cutoff;
    double tol = 1e-9;
    std::string format = "json";
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    unsigned threads = 0;
    double perturb = 0.0;
    std::string out;
    // command specific
    int j = 0, k = 1;
    int n = 0, h = 0;
    std::string word;
    double exponent = 3.0;
    bool list = false;
};

struct Record {
    std::string command, quantity;
    json params;
    json value;
    std::optional<double> est_error;
    bool pass = true;
    json extra = json::object();
    double wall = 0.0;
};

const char* kAlgebras[] = {"podles", "s4q-scalar", "s4q-chiral+", "s4q-chiral-", "s4q-fock", "odd"};

bool is_s4(const std::string& a) { return a.rfind("s4q", 0) == 0; }
bool is_chiral(const std::string& a) { return a == "s4q-chiral+" || a == "s4q-chiral-"; }

void require_algebra(const Opts& o, std::initializer_list<const char*> allowed, const std::string& cmd) {
    for (const char* a : allowed)
        if (o.algebra == a) return;
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    throw std::invalid_argument(cmd + ": --algebra must be one of " + list);
}

/// Cutoff as a half-integer; default depends on the algebra.
HalfInt cutoff_of(const Opts& o, const std::string& fallback) {
    return HalfInt::parse(o.cutoff.empty() ? fallback : o.cutoff);
}

int int_cutoff(const Opts& o, const std::string& fallback) {
    HalfInt c = cutoff_of(o, fallback);
    if (!c.is_integer() || c.twice < 0) throw std::invalid_argument("--cutoff must be a non-negative integer here");
    return c.twice / 2;
}

podles::Params podles_params(const Opts& o) { return podles::Params(o.q, o.s, HalfInt::parse(o.N)); }

json base_params(const Opts& o, const std::string& cutoff) {
    json p = {{"q", o.q}};
    if (o.algebra == "podles") {
        p["s"] = o.s;
        p["N"] = HalfInt::parse(o.N).str();
    }
    if (o.algebra == "odd") p["ell"] = o.ell;
    p["cutoff"] = cutoff;
    p["tol"] = o.tol;
    return p;
}

/// Interior labels, optionally a seeded random sample of them.
template <class L>
TruncatedBasis<L> sampled(const TruncatedBasis<L>& B, int margin, const Opts& o) {
    if (o.samples == 0) return B;
    auto labs = B.interior(margin);
    std::mt19937_64 rng(o.seed);
    std::shuffle(labs.begin(), labs.end(), rng);
    if (labs.size() > o.samples) labs.resize(o.samples);
    // keep the original level function, but only the sample as the label set;
    // margin 0 on the result then means "exactly the sample"
    auto lf = B.level_fn();
    return TruncatedBasis<L>(std::move(labs), lf, B.cutoff());
}

template <class L>
double residual_on(const std::vector<AlgebraWord>& rels, const GeneratorMap<L>& g, const TruncatedBasis<L>& B,
                   int margin, const Opts& o) {
    if (o.samples == 0) return relation_residual(rels, g, B, margin, o.threads);
    auto S = sampled(B, margin, o);
    double r = 0.0;
    for (const auto& v : S.labels())
        for (const auto& w : rels) r = std::max(r, max_abs(evaluate_word(w, g, v)));
    return r;
}

Record cmd_verify(const Opts& o) {
    Record r{"verify", "max_residual"};
    double rel = 0.0, adj = 0.0;
    std::string cut;
    if (o.algebra == "podles") {
        auto p = podles_params(o);
        int L = int_cutoff(o, "8");
        cut = std::to_string(L);
        auto B = podles::basis(p, L);
        auto g = podles::generators(p, o.perturb);
        rel = std::max({residual_on(podles::relations_x(p), g, B, 2, o),
                        residual_on(podles::relations_AB(p), g, B, 2, o)});
        if (o.perturb == 0.0) rel = std::max(rel, residual_on(podles::crossed_relations(p), podles::crossed_generators(p), B, 2, o));
        adj = std::max(adjoint_mismatch(g["x1"], g["x1*"], B, 1), adjoint_mismatch(g["A"], g["A"], B, 1));
    } else if (o.algebra == "s4q-fock") {
        int L = int_cutoff(o, "12");
        cut = std::to_string(L);
        auto g = s4q::fock_generators(o.q);
        if (o.perturb != 0.0) g["x2"] = scale<s4q::FockLabel>(1.0 + o.perturb, g["x2"]);
        auto B = s4q::fock_basis(L);
        rel = residual_on(s4q::seven_polynomials(o.q), g, B, 2, o);
        adj = adjoint_mismatch(g["x1"], g["x1*"], B, 1);
    } else if (is_s4(o.algebra)) {
        s4q::Space sp = o.algebra == "s4q-scalar"    ? s4q::Space::scalar
                        : o.algebra == "s4q-chiral+" ? s4q::Space::chiral_plus
                                                     : s4q::Space::chiral_minus;
        HalfInt Lam = cutoff_of(o, is_chiral(o.algebra) ? "13/2" : "6");
        cut = Lam.str();
        s4q::Params par(o.q, s4q::EpsMode::subscript, o.perturb);
        auto g = s4q::generators(par);
        auto B = s4q::basis(sp, s4q::level_cutoff(sp, Lam));
        rel = residual_on(s4q::seven_polynomials(o.q), g, B, 2, o);
        adj = std::max(adjoint_mismatch(g["x0"], g["x0"], B, 1), adjoint_mismatch(g["x2"], g["x2*"], B, 1));
    } else if (o.algebra == "odd") {
        int L = int_cutoff(o, "5");
        cut = std::to_string(L);
        odd::Params par(o.ell, o.q, -1, o.perturb);
        auto g = odd::generators(par);
        auto B = odd::enumerate_labels(o.ell, L);
        rel = residual_on(odd::relations(o.ell, o.q), g, B, 2, o);
        adj = adjoint_mismatch(g["z1"], g["z1*"], B, 1);
    } else {
        throw std::invalid_argument("unknown algebra " + o.algebra);
    }
    r.params = base_params(o, cut);
    r.value = std::max(rel, adj);
    r.extra["relation_residual"] = rel;
    r.extra["adjoint_residual"] = adj;
    r.pass = std::max(rel, adj) <= o.tol;
    return r;
}

/// Value at the cutoff and |value(cutoff) - value(cutoff - 2)| in cutoff units.
template <class F>
std::pair<double, double> with_error(F f, int cutoff, int floor = 0) {
    double v = f(cutoff);
    if (cutoff - 2 < floor) return {v, std::nan("")};
    return {v, std::abs(v - f(cutoff - 2))};
}

Record cmd_index(const Opts& o, bool twisted) {
    Record r{twisted ? "qindex" : "index", twisted ? "twisted_q_index" : "fredholm_index"};
    double expected = 0.0;
    std::pair<double, double> ve;
    std::string cut;
    if (o.algebra == "podles") {
        auto p = podles_params(o);
        int L = int_cutoff(o, "40");
        cut = std::to_string(L);
        const double aN = p.absN();
        const int sg = p.N.sign();
        expected = twisted ? sg * qnum(2 * aN, o.q) : 2 * p.N.value();
        ve = with_error([&](int c) { return twisted ? podles::twisted_q_index(p, c) : podles::fredholm_index(p, c); },
                        L);
    } else if (o.algebra == "s4q-fock" && !twisted) {
        int L = int_cutoff(o, "30");
        cut = std::to_string(L);
        expected = 1.0;
        ve = with_error([&](int c) { return s4q::fock_index(o.q, c, o.threads); }, L);
    } else if (is_chiral(o.algebra)) {
        HalfInt Lam = cutoff_of(o, twisted ? "15/2" : "25");
        cut = Lam.str();
        if (twisted) {
            r.quantity = "twisted_pairing4";
            expected = 2.0;
            // Lambda - 1 is two half-integer levels down
            ve = with_error([&](int t) { return s4q::twisted_pairing4(o.q, HalfInt::from_twice(t)).value; }, Lam.twice, 1);
        } else {
            r.quantity = "chiral_index";
            expected = 1.0;
            ve = with_error([&](int t) { return s4q::chiral_index(o.q, HalfInt::from_twice(t), o.threads); }, Lam.twice, 9);
            r.extra["series_value"] = s4q::index_series(o.q, Lam);
        }
    } else {
        throw std::invalid_argument(std::string(twisted ? "qindex" : "index") +
                                    ": --algebra must be podles, s4q-chiral+, s4q-chiral-" +
                                    (twisted ? "" : " or s4q-fock"));
    }
    r.params = base_params(o, cut);
    r.value = ve.first;
    if (!std::isnan(ve.second)) r.est_error = ve.second;
    r.extra["expected"] = expected;
    r.pass = std::abs(ve.first - expected) <= o.tol;
    return r;
}

Record cmd_haar(const Opts& o) {
    Record r{"haar", "haar_state"};
    require_algebra(o, {"s4q-scalar"}, "haar");
    r.params = {{"q", o.q}, {"tol", o.tol}};
    double formula;
    cplx gns;
    if (!o.word.empty()) {
        auto w = AlgebraWord::parse(o.word);
        auto cnt = AlgebraWord::letter_counts(w.terms().at(0).first);
        auto get = [&](const char* k) { return cnt.count(k) ? cnt.at(k) : 0; };
        for (const auto& [key, c] : cnt)
            if (key != "x0" && key != "x1" && key != "x1*" && key != "x2")
                throw std::invalid_argument("haar: word must be a monomial in x0, x1, x1*, x2");
        // x1 and x1* must come in the normal order x0^a x1^b x1*^c x2^d
        auto canon = s4q::haar_word(get("x0"), get("x1"), get("x1*"), get("x2"));
        if (canon.terms()[0].first != w.terms()[0].first)
            throw std::invalid_argument("haar: word must be ordered as x0^a x1^b x1*^c x2^d");
        formula = s4q::haar_monomial(get("x0"), get("x1"), get("x1*"), get("x2"), o.q);
        gns = s4q::haar_gns(w, o.q);
        r.params["word"] = o.word;
    } else {
        formula = s4q::haar_formula(o.j, o.k, o.q);
        gns = s4q::haar_gns(s4q::haar_word(2 * o.j, o.k, o.k, 0), o.q);
        r.params["j"] = o.j;
        r.params["k"] = o.k;
    }
    r.value = formula;
    r.extra["gns"] = gns.real();
    r.pass = std::abs(gns - formula) <= o.tol * std::max(1.0, std::abs(formula));
    return r;
}

Record cmd_zeta(const Opts& o) {
    Record r{"zeta", "zeta_partial"};
    const double z = o.exponent;
    double closed, tail;
    std::pair<double, double> ve;
    std::string cut;
    if (o.algebra == "podles") {
        auto p = podles_params(o);
        int L = int_cutoff(o, "100000");
        cut = std::to_string(L);
        ve = with_error([&](int c) { return podles::zeta_partial(nullptr, z, p, c); }, L);
        closed = podles::zeta_closed_form(z, p);
        tail = podles::zeta_tail_bound(z, p, L);
    } else if (is_chiral(o.algebra)) {
        HalfInt Lam = cutoff_of(o, "10000");
        cut = Lam.str();
        ve = with_error([&](int t) { return s4q::zeta4(z, HalfInt::from_twice(t)); }, Lam.twice, 1);
        closed = s4q::zeta4_closed(z);
        tail = s4q::zeta4_tail_bound(z, Lam);
    } else {
        throw std::invalid_argument("zeta: --algebra must be podles, s4q-chiral+ or s4q-chiral-");
    }
    r.params = base_params(o, cut);
    r.params["exponent"] = z;
    r.value = ve.first;
    if (!std::isnan(ve.second)) r.est_error = ve.second;
    r.extra["closed_form"] = closed;
    r.extra["tail_bound"] = tail;
    r.pass = closed - ve.first >= -o.tol && closed - ve.first <= tail + o.tol;
    return r;
}

Record cmd_residue(const Opts& o) {
    Record r{"residue", "top_residue"};
    require_algebra(o, {"podles"}, "residue");
    auto p = podles_params(o);
    r.params = base_params(o, "");
    r.params.erase("cutoff");
    r.params["word"] = o.word.empty() ? "1" : o.word;
    r.value = podles::top_residue(AlgebraWord::parse(o.word.empty() ? "1" : o.word), p);
    return r;
}

Record cmd_tableaux(const Opts& o) {
    Record r{"tableaux", "count"};
    auto t = odd::tableaux(o.ell, o.n, o.h);
    r.params = {{"ell", o.ell}, {"n", o.n}, {"h", o.h}};
    r.value = t.size();
    const auto weyl = odd::weyl_dim_nh(o.ell, o.n, o.h);
    r.extra["weyl_dimension"] = weyl;
    if (o.list) {
        json arr = json::array();
        for (const auto& x : t) arr.push_back(x.rows());
        r.extra["tableaux"] = arr;
    }
    r.pass = static_cast<std::int64_t>(t.size()) == weyl;
    return r;
}

Record cmd_ncintegral(const Opts& o) {
    Record r{"ncintegral", "nc_integral"};
    const std::string w = o.word.empty() ? "1" : o.word;
    r.params = {{"ell", o.ell}, {"word", w}};
    r.value = odd::nc_integral(AlgebraWord::parse(w), o.ell).real();
    r.extra["residue_constant"] = odd::dixmier_constant(o.ell).str();
    return r;
}

json to_json(const Record& r, const Opts& o) {
    json j;
    j["command"] = r.command;
    if (r.command != "tableaux" && r.command != "ncintegral") j["algebra"] = o.algebra;
    j["params"] = r.params;
    j["quantity"] = r.quantity;
    j["value"] = r.value;
    j["est_error"] = r.est_error ? json(*r.est_error) : json(nullptr);
    for (auto& [k, v] : r.extra.items()) j[k] = v;
    j["pass"] = r.pass;
    j["wall_time_s"] = r.wall;
    return j;
}

std::string csv_cell(const json& v) {
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    if (s.find_first_of(",\"\n") != std::string::npos) {
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    return s;
}

std::string render(const json& j, const std::string& format) {
    if (format == "json") return j.dump();
    std::string head, row;
    for (auto& [k, v] : j.items()) {
        if (k == "tableaux") continue;
        if (k == "params") {
            for (auto& [pk, pv] : v.items()) {
                head += (head.empty() ? "" : ",") + pk;
                row += (row.empty() ? "" : ",") + csv_cell(pv);
            }
            continue;
        }
        head += (head.empty() ? "" : ",") + k;
        row += (row.empty() ? "" : ",") + csv_cell(v);
    }
    return head + "\n" + row;
}

void add_common(CLI::App* c, Opts& o) {
    c->add_option("--algebra", o.algebra, "podles | s4q-scalar | s4q-chiral+ | s4q-chiral- | s4q-fock | odd")
        ->check(CLI::IsMember(std::vector<std::string>(std::begin(kAlgebras), std::end(kAlgebras))));
    c->add_option("--q", o.q, "deformation parameter in (0,1)");
    c->add_option("--s", o.s, "Podles parameter s in [0,1]");
    c->add_option("--N", o.N, "Podles monopole charge, e.g. 1/2 or -1");
    c->add_option("--ell", o.ell, "odd sphere rank");
    c->add_option("--cutoff", o.cutoff, "truncation cutoff (half-integers as 13/2)");
    c->add_option("--tol", o.tol, "pass tolerance");
    c->add_option("--format", o.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    c->add_option("--seed", o.seed, "seed for sampled checks");
    c->add_option("--samples", o.samples, "check this many seeded random interior labels (0 = all)");
    c->add_option("--threads", o.threads, "worker threads (0 = hardware)");
    c->add_option("--perturb", o.perturb, "relative error injected into one coefficient family");
    c->add_option("--out", o.out, "append records to this file instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Computations on quantum spheres"};
    app.require_subcommand(1);
    Opts o;
    auto* verify = app.add_subcommand("verify", "relation and adjoint residuals");
    auto* index = app.add_subcommand("index", "Fredholm index pairing");
    auto* qindex = app.add_subcommand("qindex", "twisted index pairing");
    auto* haar = app.add_subcommand("haar", "Haar state on S^4_q, formula against GNS");
    auto* zeta = app.add_subcommand("zeta", "partial zeta sums against closed forms");
    auto* residue = app.add_subcommand("residue", "Podles top residue of a word");
    auto* tabl = app.add_subcommand("tableaux", "GT tableaux with top row (n+h, h, ..., h)");
    auto* ncint = app.add_subcommand("ncintegral", "odd sphere noncommutative integral of a word");
    for (auto* c : {verify, index, qindex, haar, zeta, residue, tabl, ncint}) add_common(c, o);
    haar->add_option("--j", o.j, "power of x0^2");
    haar->add_option("--k", o.k, "power of x1 and x1*");
    haar->add_option("--word", o.word, "monomial x0^a x1^b x1*^c x2^d");
    zeta->add_option("--exponent", o.exponent, "zeta variable");
    residue->add_option("--word", o.word, "word such as \"B B*\"");
    ncint->add_option("--word", o.word, "word such as \"z3 z3*\"");
    tabl->add_option("--n", o.n, "n");
    tabl->set_help_flag("--help", "Print this help message and exit");
    tabl->add_option("--h", o.h, "h");
    tabl->add_flag("--list", o.list, "include the tableaux");
    haar->callback([&] { o.algebra = haar->count("--algebra") ? o.algebra : "s4q-scalar"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help exits 0, everything else is a usage error
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    Record rec;
    auto t0 = std::chrono::steady_clock::now();
    try {
        if (*verify) rec = cmd_verify(o);
        else if (*index) rec = cmd_index(o, false);
        else if (*qindex) rec = cmd_index(o, true);
        else if (*haar) rec = cmd_haar(o);
        else if (*zeta) rec = cmd_zeta(o);
        else if (*residue) rec = cmd_residue(o);
        else if (*tabl) rec = cmd_tableaux(o);
        else rec = cmd_ncintegral(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.get_subcommands().front()->help();
        return 2;
    }
    rec.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::string text = render(to_json(rec, o), o.format);
    if (o.out.empty()) {
        std::cout << text << "\n";
    } else {
        std::ofstream f(o.out, std::ios::app);
        if (!f) {
            std::cerr << "error: cannot open " << o.out << "\n";
            return 2;
        }
        f << text << "\n";
    }
    return rec.pass ? 0 : 1;
}

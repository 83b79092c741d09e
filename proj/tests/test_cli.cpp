#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdio>
#include <string>

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    std::string cmd = std::string(QSPH_CLI_PATH) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, p)) r.out += buf;
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

nlohmann::json record(const Run& r) { return nlohmann::json::parse(r.out); }

}  // namespace

TEST(Cli, VerifyPodles) {
    auto r = run("verify --algebra podles --q 0.5 --s 0.5 --N 1/2");
    ASSERT_EQ(r.code, 0) << r.out;
    auto j = record(r);
    EXPECT_EQ(j["command"], "verify");
    EXPECT_TRUE(j["pass"].get<bool>());
    EXPECT_LE(j["value"].get<double>(), 1e-9);
    for (const char* k : {"algebra", "params", "quantity", "value", "est_error", "wall_time_s"})
        EXPECT_TRUE(j.contains(k)) << k;
}

TEST(Cli, VerifyChiralHalfIntegerCutoff) {
    auto r = run("verify --algebra s4q-chiral+ --q 0.3 --cutoff 13/2");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(record(r)["params"]["cutoff"], "13/2");
}

TEST(Cli, PerturbationFailsEveryAlgebra) {
    for (const char* a : {"podles", "s4q-scalar", "s4q-chiral+", "s4q-fock", "odd"}) {
        auto r = run(std::string("verify --algebra ") + a + " --perturb 1e-3");
        EXPECT_EQ(r.code, 1) << a;
        EXPECT_FALSE(record(r)["pass"].get<bool>()) << a;
    }
}

TEST(Cli, SampledVerifyIsSeeded) {
    auto a = run("verify --algebra odd --samples 15 --seed 3");
    auto b = run("verify --algebra odd --samples 15 --seed 3");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(record(a)["value"], record(b)["value"]);
}

TEST(Cli, PodlesIndex) {
    auto r = run("index --algebra podles --N 1 --q 0.3 --s 0");
    ASSERT_EQ(r.code, 0) << r.out;
    auto j = record(r);
    EXPECT_NEAR(j["value"].get<double>(), 2.0, 1e-6);
    EXPECT_LE(j["est_error"].get<double>(), 1e-6);
}

TEST(Cli, PodlesQIndex) {
    auto r = run("qindex --algebra podles --N -1/2 --q 0.3");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NEAR(record(r)["value"].get<double>(), -1.0, 1e-5);
}

TEST(Cli, FockIndex) {
    auto r = run("index --algebra s4q-fock --q 0.5 --cutoff 30");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NEAR(record(r)["value"].get<double>(), 1.0, 1e-10);
}

TEST(Cli, ChiralIndexNeedsLargerCutoff) {
    auto r = run("index --algebra s4q-chiral+ --q 0.5 --cutoff 19/2 --tol 1e-6");
    auto j = record(r);
    EXPECT_EQ(r.code, 1);
    EXPECT_NEAR(j["value"].get<double>(), 1.0, 1e-2);
    EXPECT_NEAR(j["value"].get<double>(), j["series_value"].get<double>(), 1e-8);
}

TEST(Cli, Tableaux) {
    auto r = run("tableaux --ell 2 --n 1 --h 0 --list");
    ASSERT_EQ(r.code, 0) << r.out;
    auto j = record(r);
    EXPECT_EQ(j["value"].get<int>(), 3);
    EXPECT_EQ(j["tableaux"].size(), 3u);
}

TEST(Cli, CsvHasHeaderAndRow) {
    auto r = run("tableaux --ell 2 --n 1 --format csv");
    ASSERT_EQ(r.code, 0);
    auto nl = r.out.find('\n');
    ASSERT_NE(nl, std::string::npos);
    EXPECT_EQ(r.out.substr(0, 8), "command,");
    EXPECT_EQ(r.out.substr(nl + 1, 9), "tableaux,");
}

TEST(Cli, HaarAndZetaAndResidue) {
    auto h = run("haar --j 1 --k 2 --q 0.5");
    EXPECT_EQ(h.code, 0) << h.out;
    auto z = run("zeta --algebra podles --exponent 3 --N 1");
    EXPECT_EQ(z.code, 0) << z.out;
    auto rs = run("residue --word \"B B*\" --s 0.5");
    ASSERT_EQ(rs.code, 0);
    EXPECT_NEAR(record(rs)["value"].get<double>(), 1.0, 1e-12);
    auto nc = run("ncintegral --ell 3 --word z1");
    ASSERT_EQ(nc.code, 0);
    EXPECT_NEAR(record(nc)["value"].get<double>(), 0.0, 1e-15);
}

TEST(Cli, Deterministic) {
    auto a = run("qindex --algebra podles --N 1 --q 0.5 --cutoff 20");
    auto b = run("qindex --algebra podles --N 1 --q 0.5 --cutoff 20 --threads 3");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(record(a)["value"], record(b)["value"]);
}

TEST(Cli, BadParametersExitTwo) {
    EXPECT_EQ(run("verify --q 1.5").code, 2);
    EXPECT_EQ(run("verify --algebra podles --s 2").code, 2);
    EXPECT_EQ(run("verify --algebra nope").code, 2);
    EXPECT_EQ(run("index --algebra odd").code, 2);
    EXPECT_EQ(run("verify --algebra s4q-scalar --cutoff x").code, 2);
    EXPECT_EQ(run("").code, 2);
}
